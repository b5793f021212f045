//! Scenario-driven command line.
//!
//! Each subcommand reads one scenario file, validates everything it needs,
//! computes, and only then writes its CSV files plus `summary.txt` into the
//! output directory. Exit status: 0 success, 2 configuration error,
//! 3 runtime or domain error, 4 a `compare` tolerance check failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classical::{
    integrate_full, integrate_reduced, ClassicalState, ExitReason, TrajectorySeries,
};
use crate::comparison::{observed_order, run_comparison, Comparison, Refinement, Setup};
use crate::config::{ScenarioConfig, KEYS};
use crate::error::{Error, Result};
use crate::potentials::{
    delta_v_eff, delta_v_eff_grad, v_cl, v_qu, v_qu_grad, EffectivePotential, ModeLabel,
};
use crate::quantum::{
    build_full_mode_hamiltonian, build_naive_hamiltonian, build_reduced_hamiltonian,
    crank_nicolson_evolve, lift_to_reduced, project_to_full, EvolutionResult, ObservableSeries,
    Schedule,
};
use crate::reducibility::{check_factorization, SampledFiberMetric};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

// amplitudes above this at the walls mean the run felt the truncation
const BOUNDARY_LIMIT: f64 = 1e-8;
// discrepancies below this are rounding noise; their ratios mean nothing
const NOISE_FLOOR: f64 = 1e-12;

fn keys_help() -> String {
    let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out =
        String::from("Scenario keys (`key = value`, one per line, '#' starts a comment):\n");
    for (k, desc) in KEYS {
        let _ = writeln!(out, "  {k:width$}  {desc}");
    }
    out.push_str(
        "\nExit status: 0 ok, 2 configuration error, 3 runtime error, 4 compare tolerance failed.",
    );
    out
}

#[derive(Debug, Parser)]
#[command(
    name = "veff",
    version,
    about = "Quantum effective potential of warped-product tubes: tabulate, evolve, compare",
    after_long_help = keys_help()
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file
    pub config: PathBuf,
    /// Directory for CSV output and summary.txt
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate V0, V_cl, dV_eff, V_qu and V_qu' over the grid (deltav.csv)
    #[command(after_long_help = keys_help())]
    Deltav(RunArgs),
    /// Classical trajectory under V_cl, or the full geodesic problem (classical.csv)
    #[command(after_long_help = keys_help())]
    Classical(RunArgs),
    /// Trajectory under V_qu = V_cl + dV_eff (semiclassical.csv)
    #[command(after_long_help = keys_help())]
    Semiclassical(RunArgs),
    /// Evolve the full-mode amplitude chi (snapshots.csv, observables.csv)
    #[command(after_long_help = keys_help())]
    EvolveFull(RunArgs),
    /// Evolve the reduced wavefunction (snapshots.csv, observables.csv)
    #[command(after_long_help = keys_help())]
    EvolveReduced {
        #[command(flatten)]
        run: RunArgs,
        /// Drop dV_eff from the reduced operator
        #[arg(long)]
        naive: bool,
    },
    /// Full vs reduced vs naive evolutions, Ehrenfest report, convergence (report.csv, trajectories.csv)
    #[command(after_long_help = keys_help())]
    Compare(RunArgs),
    /// Test a sampled metric for the single-parameter reduction (reduce_x.csv, reduce_phi.csv)
    #[command(after_long_help = keys_help())]
    ReduceCheck(RunArgs),
}

/// Parse arguments, run, and return the exit status. Messages go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => EXIT_CONFIG,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

pub fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Deltav(a) => deltav(a),
        Command::Classical(a) => trajectory(a, false),
        Command::Semiclassical(a) => trajectory(a, true),
        Command::EvolveFull(a) => evolve(a, Flavor::Full),
        Command::EvolveReduced { run, naive } => evolve(
            run,
            if *naive {
                Flavor::Naive
            } else {
                Flavor::Reduced
            },
        ),
        Command::Compare(a) => compare(a),
        Command::ReduceCheck(a) => reduce_check(a),
    }
}

/// Shortest round-trip rendering; signed zeros print as `0.0`.
fn real(v: f64) -> String {
    if v == 0.0 {
        "0.0".into()
    } else {
        format!("{v:?}")
    }
}

/// `name=value` lines, in insertion order.
#[derive(Default)]
struct Summary(Vec<(String, String)>);

impl Summary {
    fn text(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.0.push((name.to_string(), value.to_string()));
        self
    }

    fn real(&mut self, name: &str, value: f64) -> &mut Self {
        self.text(name, real(value))
    }

    fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn one_line(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        self.push_cells(row.into_iter().map(real).collect());
    }

    fn push_cells(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Everything a subcommand produces, written in one go at the end.
struct Output {
    files: Vec<(String, Vec<u8>)>,
    summary: Summary,
}

impl Output {
    fn new(cfg: &ScenarioConfig, command: &str) -> Self {
        let mut summary = Summary::default();
        summary
            .text("scenario", cfg.name())
            .text("command", command);
        Self {
            files: Vec::new(),
            summary,
        }
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        self.files.push((name.to_string(), table.to_bytes()?));
        Ok(())
    }

    fn write(self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        fs::write(dir.join("summary.txt"), self.summary.render())?;
        println!("{}", self.summary.one_line());
        Ok(())
    }
}

fn deltav(args: &RunArgs) -> Result<i32> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let setup = cfg.setup()?;
    let mut out = Output::new(&cfg, "deltav");
    let (base, profile, fiber, params) = (&setup.base, &setup.profile, &setup.fiber, &setup.params);
    let e_phi = setup.leading_mode().value;
    let mut table = Table::new(&["x", "v0", "vcl", "dveff", "vqu", "dvqu_dx"]);
    let (mut max_dv, mut max_dv_grad) = (0.0f64, 0.0f64);
    for x in setup.grid.nodes() {
        let dv = delta_v_eff(profile, fiber, params, x)?;
        max_dv = max_dv.max(dv.abs());
        max_dv_grad = max_dv_grad.max(delta_v_eff_grad(profile, fiber, params, x)?.abs());
        table.push(vec![
            x,
            base.value(x),
            v_cl(base, profile, e_phi, x)?,
            dv,
            v_qu(base, profile, fiber, e_phi, params, x)?,
            v_qu_grad(base, profile, fiber, e_phi, params, x)?,
        ]);
    }
    out.table("deltav.csv", &table)?;
    out.summary
        .text("mode", &setup.leading_mode().label)
        .real("e_phi", e_phi)
        .text("nodes", setup.grid.len())
        .real("max_abs_dveff", max_dv)
        .real("max_abs_dveff_grad", max_dv_grad);
    out.write(&args.out)?;
    Ok(EXIT_OK)
}

fn p_phi_of(label: &ModeLabel, hbar: f64) -> Result<Vec<f64>> {
    match label {
        ModeLabel::Circle(k) => Ok(vec![hbar * *k as f64]),
        ModeLabel::Torus(ks) => Ok(ks.iter().map(|k| hbar * *k as f64).collect()),
        ModeLabel::Sphere(_) => Err(Error::Unsupported(
            "full classical runs need coordinate-geodesic fibers; got round_sphere".into(),
        )),
    }
}

fn trajectory_table(series: &TrajectorySeries, every: usize) -> Table {
    let mut table = Table::new(&["t", "x", "xdot", "energy", "pphi_drift"]);
    let thinned = series.thinned(every);
    let mut rows: Vec<_> = thinned.records.clone();
    // keep the final sample even when it falls between thinning points
    if rows.last() != series.records.last() {
        rows.push(*series.last());
    }
    for r in rows {
        table.push(vec![r.t, r.x, r.xdot, r.energy, r.pphi_drift]);
    }
    table
}

fn exit_text(exit: &Option<ExitReason>) -> String {
    match exit {
        None => "complete".into(),
        Some(ExitReason::LeftDomain { t, x }) => {
            format!("left_domain(t={},x={})", real(*t), real(*x))
        }
        Some(ExitReason::NonFinite { t }) => format!("non_finite(t={})", real(*t)),
    }
}

fn trajectory(args: &RunArgs, semiclassical: bool) -> Result<i32> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let setup = cfg.setup()?;
    let time = cfg.time()?;
    let spec = cfg.classical()?;
    // initial conditions default to the packet's moments
    let packet_moments = || -> Result<(f64, f64)> {
        let psi = cfg.packet(&setup.grid)?.reduced_state(&setup)?;
        Ok((
            psi.mean_x(),
            psi.mean_momentum(setup.params.hbar) / setup.params.mass,
        ))
    };
    let (x0, xdot) = match (spec.x0, spec.xdot) {
        (Some(x), Some(v)) => (x, v),
        (x, v) => {
            let (px, pv) = packet_moments()?;
            (x.unwrap_or(px), v.unwrap_or(pv))
        }
    };
    let mass = setup.params.mass;
    let d = setup.fiber.dim();
    let mode = setup.leading_mode();
    let (command, file) = if semiclassical {
        ("semiclassical", "semiclassical.csv")
    } else {
        ("classical", "classical.csv")
    };
    let series = if semiclassical {
        let pot = EffectivePotential::semiclassical(
            &setup.base,
            &setup.profile,
            d,
            mode.value,
            setup.params,
        );
        integrate_reduced(&pot, mass, x0, xdot, time.dt, time.t_end)?
    } else if spec.full {
        let init = ClassicalState::new(x0, xdot, p_phi_of(&mode.label, setup.params.hbar)?);
        integrate_full(
            &setup.profile,
            &setup.fiber,
            &setup.base,
            mass,
            &init,
            time.dt,
            time.t_end,
        )?
    } else {
        let pot = EffectivePotential::classical(&setup.base, &setup.profile, d, mode.value);
        integrate_reduced(&pot, mass, x0, xdot, time.dt, time.t_end)?
    };
    let mut out = Output::new(&cfg, command);
    out.table(file, &trajectory_table(&series, time.snapshot_every))?;
    let last = series.last();
    out.summary
        .text("mode", &mode.label)
        .real("e_phi", mode.value)
        .text("full", !semiclassical && spec.full)
        .real("x0", x0)
        .real("xdot0", xdot)
        .real("final_t", last.t)
        .real("final_x", last.x)
        .real("max_energy_drift", series.max_energy_drift())
        .real("max_pphi_drift", series.max_pphi_drift())
        .text("exit", exit_text(&series.exit));
    out.write(&args.out)?;
    Ok(EXIT_OK)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flavor {
    Full,
    Reduced,
    Naive,
}

fn snapshot_table(result: &EvolutionResult) -> Table {
    let mut table = Table::new(&["t", "x", "re_psi", "im_psi", "rho"]);
    for (t, psi) in &result.snapshots {
        let rho = psi.density();
        for (i, v) in psi.values.iter().enumerate() {
            table.push(vec![*t, psi.grid.node(i), v.re, v.im, rho[i]]);
        }
    }
    table
}

fn observable_table(obs: &ObservableSeries) -> Table {
    let mut table = Table::new(&["t", "mean_x", "norm", "grad_vcl_exp", "grad_dveff_exp"]);
    for i in 0..obs.len() {
        table.push(vec![
            obs.times[i],
            obs.mean_x[i],
            obs.norm[i],
            obs.grad_vcl[i],
            obs.grad_dveff[i],
        ]);
    }
    table
}

fn warn_boundary(amplitude: f64) {
    if amplitude > BOUNDARY_LIMIT {
        eprintln!(
            "warning: amplitude {} reached the grid ends (limit {}); the walls influence this run",
            real(amplitude),
            real(BOUNDARY_LIMIT)
        );
    }
}

fn evolve(args: &RunArgs, flavor: Flavor) -> Result<i32> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let setup = cfg.setup()?;
    let time = cfg.time()?;
    let packet = cfg.packet(&setup.grid)?;
    let psi0 = packet.reduced_state(&setup)?;
    let schedule = Schedule::every(time.snapshot_every);
    let mut results = Vec::with_capacity(setup.modes.len());
    for comp in &setup.modes {
        let a = (
            &setup.grid,
            &setup.profile,
            &setup.fiber,
            &comp.energy,
            &setup.params,
            &setup.base,
        );
        let h_full = build_full_mode_hamiltonian(a.0, a.1, a.2, a.3, a.4, a.5)?;
        let mut chi0 = project_to_full(&psi0.scaled(comp.amplitude), &h_full.measure)?;
        chi0.mode = Some(comp.energy.clone());
        let result = match flavor {
            Flavor::Full => crank_nicolson_evolve(&h_full, &chi0, time.dt, time.steps, schedule)?,
            Flavor::Reduced | Flavor::Naive => {
                let h = if flavor == Flavor::Reduced {
                    build_reduced_hamiltonian(a.0, a.1, a.2, a.3, a.4, a.5)?
                } else {
                    build_naive_hamiltonian(a.0, a.1, a.2, a.3, a.4, a.5)?
                };
                crank_nicolson_evolve(&h, &lift_to_reduced(&chi0)?, time.dt, time.steps, schedule)?
            }
        };
        results.push(result);
    }
    let observables =
        ObservableSeries::combine(&results.iter().map(|r| &r.observables).collect::<Vec<_>>())?;
    let boundary = results
        .iter()
        .map(|r| r.max_boundary_amplitude)
        .fold(0.0, f64::max);
    warn_boundary(boundary);

    let command = match flavor {
        Flavor::Full => "evolve-full",
        Flavor::Reduced => "evolve-reduced",
        Flavor::Naive => "evolve-reduced --naive",
    };
    let mut out = Output::new(&cfg, command);
    if results.len() == 1 {
        out.table("snapshots.csv", &snapshot_table(&results[0]))?;
    } else {
        for (k, r) in results.iter().enumerate() {
            out.table(&format!("snapshots_{k}.csv"), &snapshot_table(r))?;
        }
    }
    out.table("observables.csv", &observable_table(&observables))?;
    let modes: Vec<String> = setup
        .modes
        .iter()
        .map(|m| m.energy.label.to_string())
        .collect();
    out.summary
        .text("modes", modes.join(";"))
        .text("steps", time.steps)
        .real("dt", time.dt)
        .real(
            "final_mean_x",
            *observables.mean_x.last().expect("initial observation"),
        )
        .real("max_norm_drift", observables.max_norm_drift())
        .real("max_boundary_amplitude", boundary);
    out.write(&args.out)?;
    Ok(EXIT_OK)
}

fn comparison_tables(c: &Comparison, observe_every: usize) -> (Table, Table) {
    let r = &c.report;
    let mut report = Table::new(&["t", "mean_x", "classical_x", "r0", "r1", "exp_grad_dveff"]);
    for i in 0..r.len() {
        report.push(vec![
            r.times[i],
            r.mean_x[i],
            r.classical_x[i],
            r.naive_residual[i],
            r.corrected_residual[i],
            r.exp_grad_dveff[i],
        ]);
    }
    let mut traj = Table::new(&[
        "t",
        "classical_x",
        "semiclassical_x",
        "naive_x",
        "quantum_x",
    ]);
    for (k, t) in c.full.times.iter().enumerate() {
        let step = k * observe_every;
        traj.push(vec![
            *t,
            c.classical.records[step].x,
            c.semiclassical.records[step].x,
            c.naive.mean_x[k],
            c.full.mean_x[k],
        ]);
    }
    (report, traj)
}

fn compare(args: &RunArgs) -> Result<i32> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let setup: Setup = cfg.setup()?;
    let time = cfg.time()?;
    let packet = cfg.packet(&setup.grid)?;
    let spec = cfg.compare()?;
    if time.steps % spec.observe_every != 0 || time.steps / spec.observe_every < 4 {
        return Err(Error::Config {
            field: "compare.observe_every".into(),
            message: "must divide the step count into at least 4 intervals".into(),
        });
    }
    let (coarse, fine) = if spec.refine {
        let r = Refinement::run(&setup, &packet, time.dt, time.steps, spec.observe_every)?;
        (r.coarse, Some(r.fine))
    } else {
        (
            run_comparison(&setup, &packet, time.dt, time.steps, spec.observe_every)?,
            None,
        )
    };
    let classical_complete = coarse.classical.is_complete() && coarse.semiclassical.is_complete();
    if !classical_complete {
        return Err(Error::Insufficient(
            "a classical comparison trajectory left the domain".into(),
        ));
    }
    warn_boundary(coarse.max_boundary_amplitude);

    let rep = &coarse.report;
    let mut failed: Vec<&str> = Vec::new();
    let mut out = Output::new(&cfg, "compare");
    let (report, traj) = comparison_tables(&coarse, spec.observe_every);
    out.table("report.csv", &report)?;
    out.table("trajectories.csv", &traj)?;
    let s = &mut out.summary;
    s.real("oracle_discrepancy", coarse.oracle_discrepancy)
        .real("naive_discrepancy", coarse.naive_discrepancy)
        .real("max_r1", rep.max_r1)
        .real("max_r0", rep.max_r0)
        .real("max_grad_dveff", rep.max_grad_dveff)
        .real("max_naive_excess", rep.naive_excess())
        .real("identity_defect", rep.identity_defect)
        .real("max_norm_drift", coarse.max_norm_drift())
        .real("max_boundary_amplitude", coarse.max_boundary_amplitude)
        .real("final_quantum_x", coarse.final_mean_x())
        .real("final_classical_x", coarse.classical.last().x)
        .real("final_semiclassical_x", coarse.semiclassical.last().x)
        .real(
            "final_naive_x",
            *coarse.naive.mean_x.last().expect("initial observation"),
        );

    if coarse.oracle_discrepancy > spec.tolerance {
        failed.push("oracle_tolerance");
    }
    if rep.max_grad_dveff > 0.0 && rep.max_r1 > spec.ehrenfest_fraction * rep.max_grad_dveff {
        failed.push("ehrenfest");
    }
    if let Some(fine) = &fine {
        let oracle_ratio = coarse.oracle_discrepancy / fine.oracle_discrepancy;
        let naive_ratio = coarse.naive_discrepancy / fine.naive_discrepancy;
        let r1_ratio = rep.max_r1 / fine.report.max_r1;
        s.real("oracle_discrepancy_fine", fine.oracle_discrepancy)
            .real("oracle_ratio", oracle_ratio)
            .real("oracle_order", observed_order(oracle_ratio))
            .real("naive_discrepancy_fine", fine.naive_discrepancy)
            .real("naive_ratio", naive_ratio)
            .real("max_r1_fine", fine.report.max_r1)
            .real("r1_ratio", r1_ratio)
            .real("r1_order", observed_order(r1_ratio));
        if coarse.oracle_discrepancy > NOISE_FLOOR && !(3.5..=4.5).contains(&oracle_ratio) {
            failed.push("oracle_order");
        }
        let gap = coarse.naive_discrepancy - coarse.oracle_discrepancy;
        if gap > NOISE_FLOOR && !(0.8..=1.2).contains(&naive_ratio) {
            failed.push("naive_gap");
        }
    }
    s.text("status", if failed.is_empty() { "pass" } else { "fail" })
        .text("failed", failed.join(";"));
    out.write(&args.out)?;
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("compare: tolerance checks failed: {}", failed.join(", "));
        Ok(EXIT_TOLERANCE)
    }
}

fn reduce_check(args: &RunArgs) -> Result<i32> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let spec = cfg.reduce()?;
    let file = fs::File::open(&spec.metric_file).map_err(|e| Error::Config {
        field: "reduce.metric_file".into(),
        message: format!("{}: {e}", spec.metric_file.display()),
    })?;
    let metric = SampledFiberMetric::from_csv(file)?;
    let verdict = check_factorization(&metric, spec.x0_index, spec.threshold)?;

    let mut out = Output::new(&cfg, "reduce-check");
    let split = verdict.potential_split.as_ref();
    let mut header = vec!["x_index", "x", "beta", "b"];
    if split.is_some() {
        header.push("v_x");
    }
    let mut xs = Table::new(&header);
    for (i, x) in metric.x_nodes().iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            real(*x),
            real(verdict.beta[i]),
            real(verdict.b[i]),
        ];
        if let Some(s) = split {
            row.push(real(s.v_x[i]));
        }
        xs.push_cells(row);
    }
    out.table("reduce_x.csv", &xs)?;
    if let Some(s) = split {
        let mut phis = Table::new(&["phi_index", "v_phi"]);
        for (j, v) in s.v_phi.iter().enumerate() {
            phis.push_cells(vec![j.to_string(), real(*v)]);
        }
        out.table("reduce_phi.csv", &phis)?;
    }
    out.summary
        .text("x_nodes", metric.n_x())
        .text("phi_nodes", metric.n_phi())
        .text("dim", metric.dim())
        .text("x0_index", spec.x0_index)
        .real("threshold", spec.threshold)
        .text("reducible", verdict.reducible)
        .real("residual", verdict.residual);
    if let Some(s) = split {
        out.summary
            .text("separable", s.separable)
            .real("split_residual", s.residual);
    }
    out.write(&args.out)?;
    Ok(EXIT_OK)
}

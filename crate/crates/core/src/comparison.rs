//! End-to-end comparison of the full and reduced descriptions.
//!
//! One [`Setup`] describes a tube, a fiber state and an initial packet. The
//! packet is prepared as a reduced wavefunction `Ψ(0)`, projected to the
//! full-mode amplitude `χ(0)`, and then evolved three ways per mode: under
//! the full covariant operator, under the reduced operator with `ΔV_eff`,
//! and under the naive reduced operator without it. Classical and
//! semiclassical trajectories start from the packet's `⟨x⟩` and `⟨p⟩/m`.

use crate::classical::{integrate_reduced, TrajectorySeries};
use crate::ehrenfest::{build_report, DeviationReport};
use crate::error::{param, Error, Result};
use crate::geometry::{FiberSpace, Profile, QuantumParams};
use crate::potentials::{
    fiber_mode_energy, BasePotential, EffectivePotential, ModeEnergy, ModeLabel,
};
use crate::quantum::{
    build_full_mode_hamiltonian, build_naive_hamiltonian, build_reduced_hamiltonian,
    crank_nicolson_evolve, flat_distance, gaussian_packet, lift_to_reduced, project_to_full,
    EvolutionResult, Grid1D, Measure, ModeWavefunction, ObservableSeries, Schedule,
};

/// One fiber mode of the initial state with its amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeComponent {
    pub energy: ModeEnergy,
    pub amplitude: f64,
}

/// Build components for `labels` with amplitudes normalized to unit total
/// probability. `weights = None` gives equal weights.
pub fn mode_components(
    fiber: &FiberSpace,
    labels: &[ModeLabel],
    weights: Option<&[f64]>,
    params: &QuantumParams,
) -> Result<Vec<ModeComponent>> {
    if labels.is_empty() {
        return Err(param("modes.labels", "at least one mode is required"));
    }
    let raw: Vec<f64> = match weights {
        Some(w) if w.len() != labels.len() => {
            return Err(param(
                "modes.weights",
                format!("{} weights for {} modes", w.len(), labels.len()),
            ))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; labels.len()],
    };
    if raw.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(param("modes.weights", "weights must be positive"));
    }
    let total = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
    labels
        .iter()
        .zip(raw)
        .map(|(label, w)| {
            Ok(ModeComponent {
                energy: fiber_mode_energy(fiber, label, params)?,
                amplitude: w / total,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Setup {
    pub profile: Profile,
    pub fiber: FiberSpace,
    pub params: QuantumParams,
    pub base: BasePotential,
    pub modes: Vec<ModeComponent>,
    pub grid: Grid1D,
}

impl Setup {
    /// Same physics on a grid with half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            grid: self.grid.refined(),
            ..self.clone()
        }
    }

    /// Energy of the mode that drives the classical comparison runs.
    pub fn leading_mode(&self) -> &ModeEnergy {
        &self.modes[0].energy
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Packet {
    pub x0: f64,
    pub sigma: f64,
    pub p0: f64,
}

impl Packet {
    /// Unit-norm reduced wavefunction on the setup's grid.
    pub fn reduced_state(&self, setup: &Setup) -> Result<ModeWavefunction> {
        gaussian_packet(
            &setup.grid,
            self.x0,
            self.sigma,
            self.p0,
            setup.params.hbar,
            Measure::Flat,
            None,
        )
    }
}

/// Per-mode outcome of the three evolutions.
#[derive(Clone, Debug)]
pub struct ModeRuns {
    pub mode: ModeEnergy,
    pub full: EvolutionResult,
    pub reduced: EvolutionResult,
    pub naive: EvolutionResult,
    /// `‖lift(χ(T)) − Ψ(T)‖`
    pub oracle_discrepancy: f64,
    /// Same distance for the naive reduced run.
    pub naive_discrepancy: f64,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub dt: f64,
    pub steps: usize,
    pub modes: Vec<ModeRuns>,
    /// Observables of the full runs summed over modes.
    pub full: ObservableSeries,
    pub reduced: ObservableSeries,
    pub naive: ObservableSeries,
    pub classical: TrajectorySeries,
    pub semiclassical: TrajectorySeries,
    pub report: DeviationReport,
    /// Root-sum-square over modes.
    pub oracle_discrepancy: f64,
    pub naive_discrepancy: f64,
    pub max_boundary_amplitude: f64,
}

impl Comparison {
    pub fn final_mean_x(&self) -> f64 {
        *self.full.mean_x.last().expect("series is never empty")
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.full
            .max_norm_drift()
            .max(self.reduced.max_norm_drift())
    }
}

/// `observe_every` controls the observation interval used by the Ehrenfest
/// report; at least five observations are needed.
pub fn run_comparison(
    setup: &Setup,
    packet: &Packet,
    dt: f64,
    steps: usize,
    observe_every: usize,
) -> Result<Comparison> {
    if steps == 0 {
        return Err(param("time.t_end", "must cover at least one step"));
    }
    let psi0 = packet.reduced_state(setup)?;
    let schedule = Schedule::observables_only(observe_every);
    let mut runs = Vec::with_capacity(setup.modes.len());
    for comp in &setup.modes {
        let args = (
            &setup.grid,
            &setup.profile,
            &setup.fiber,
            &comp.energy,
            &setup.params,
            &setup.base,
        );
        let h_full = build_full_mode_hamiltonian(args.0, args.1, args.2, args.3, args.4, args.5)?;
        let h_red = build_reduced_hamiltonian(args.0, args.1, args.2, args.3, args.4, args.5)?;
        let h_naive = build_naive_hamiltonian(args.0, args.1, args.2, args.3, args.4, args.5)?;

        let mut chi0 = project_to_full(&psi0.scaled(comp.amplitude), &h_full.measure)?;
        chi0.mode = Some(comp.energy.clone());
        let red0 = lift_to_reduced(&chi0)?;

        let full = crank_nicolson_evolve(&h_full, &chi0, dt, steps, schedule)?;
        let reduced = crank_nicolson_evolve(&h_red, &red0, dt, steps, schedule)?;
        let naive = crank_nicolson_evolve(&h_naive, &red0, dt, steps, schedule)?;
        let lifted = lift_to_reduced(&full.final_state)?;
        runs.push(ModeRuns {
            mode: comp.energy.clone(),
            oracle_discrepancy: flat_distance(&lifted, &reduced.final_state)?,
            naive_discrepancy: flat_distance(&lifted, &naive.final_state)?,
            full,
            reduced,
            naive,
        });
    }
    let combine = |pick: fn(&ModeRuns) -> &ObservableSeries| {
        ObservableSeries::combine(&runs.iter().map(pick).collect::<Vec<_>>())
    };
    let full = combine(|r| &r.full.observables)?;
    let reduced = combine(|r| &r.reduced.observables)?;
    let naive = combine(|r| &r.naive.observables)?;

    let mass = setup.params.mass;
    let x0 = full.mean_x[0];
    let v0 = psi0.mean_momentum(setup.params.hbar) / mass;
    let d = setup.fiber.dim();
    let e_phi = setup.leading_mode().value;
    let t_end = dt * steps as f64;
    let v_cl = EffectivePotential::classical(&setup.base, &setup.profile, d, e_phi);
    let v_qu =
        EffectivePotential::semiclassical(&setup.base, &setup.profile, d, e_phi, setup.params);
    let classical = integrate_reduced(&v_cl, mass, x0, v0, dt, t_end)?;
    let semiclassical = integrate_reduced(&v_qu, mass, x0, v0, dt, t_end)?;
    let report = build_report(&full, &naive, &classical, mass)?;

    let rss = |f: fn(&ModeRuns) -> f64| runs.iter().map(|r| f(r).powi(2)).sum::<f64>().sqrt();
    let oracle_discrepancy = rss(|r| r.oracle_discrepancy);
    let naive_discrepancy = rss(|r| r.naive_discrepancy);
    let max_boundary_amplitude = runs
        .iter()
        .map(|r| {
            r.full
                .max_boundary_amplitude
                .max(r.reduced.max_boundary_amplitude)
        })
        .fold(0.0, f64::max);
    Ok(Comparison {
        dt,
        steps,
        modes: runs,
        full,
        reduced,
        naive,
        classical,
        semiclassical,
        report,
        oracle_discrepancy,
        naive_discrepancy,
        max_boundary_amplitude,
    })
}

/// A comparison and the same comparison with `dx` and `dt` halved.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub coarse: Comparison,
    pub fine: Comparison,
}

impl Refinement {
    pub fn run(
        setup: &Setup,
        packet: &Packet,
        dt: f64,
        steps: usize,
        observe_every: usize,
    ) -> Result<Self> {
        let coarse = run_comparison(setup, packet, dt, steps, observe_every)?;
        // the observation interval stays fixed in time
        let fine = run_comparison(
            &setup.refined(),
            packet,
            dt / 2.0,
            2 * steps,
            2 * observe_every,
        )?;
        Ok(Self { coarse, fine })
    }

    pub fn oracle_ratio(&self) -> f64 {
        self.coarse.oracle_discrepancy / self.fine.oracle_discrepancy
    }

    pub fn naive_ratio(&self) -> f64 {
        self.coarse.naive_discrepancy / self.fine.naive_discrepancy
    }

    pub fn r1_ratio(&self) -> f64 {
        self.coarse.report.max_r1 / self.fine.report.max_r1
    }
}

/// Convergence order implied by the error ratio between a grid and its
/// halving.
pub fn observed_order(ratio: f64) -> f64 {
    ratio.log2()
}

/// Whole number of steps of size `dt` covering `t_end`.
pub fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(param("time.dt", format!("must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(param(
            "time.t_end",
            format!("must be positive, got {t_end}"),
        ));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::Parameter {
            name: "time.t_end",
            reason: format!("{t_end} is not a whole number of steps of {dt}"),
        });
    }
    Ok(steps as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tube(n: usize, modes: &[i64]) -> Setup {
        let params = QuantumParams::new(1.0, 1.0, 0.2).unwrap();
        let fiber = FiberSpace::Circle;
        let labels: Vec<ModeLabel> = modes.iter().map(|&k| ModeLabel::Circle(k)).collect();
        Setup {
            profile: Profile::gaussian_bump(1.0, 0.5, 0.0, 1.0, -8.0, 8.0).unwrap(),
            modes: mode_components(&fiber, &labels, None, &params).unwrap(),
            fiber,
            params,
            base: BasePotential::Zero,
            grid: Grid1D::new(-8.0, 8.0, n).unwrap(),
        }
    }

    const PACKET: Packet = Packet {
        x0: -3.0,
        sigma: 0.5,
        p0: 2.0,
    };

    #[test]
    fn components_are_normalized() {
        let p = QuantumParams::default();
        let labels = [ModeLabel::Circle(1), ModeLabel::Circle(-2)];
        let comps = mode_components(&FiberSpace::Circle, &labels, Some(&[1.0, 3.0]), &p).unwrap();
        let total: f64 = comps.iter().map(|c| c.amplitude.powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(comps[1].energy.value, 2.0);
        assert!(mode_components(&FiberSpace::Circle, &[], None, &p).is_err());
        assert!(mode_components(&FiberSpace::Circle, &labels, Some(&[1.0]), &p).is_err());
    }

    #[test]
    fn short_comparison_is_consistent() {
        let setup = tube(512, &[3]);
        let c = run_comparison(&setup, &PACKET, 1e-3, 200, 1).unwrap();
        assert!(c.oracle_discrepancy < c.naive_discrepancy);
        assert!(c.max_norm_drift() < 1e-12);
        assert!(c.report.identity_defect < 1e-12);
        assert_eq!(c.full.len(), 201);
        assert!((c.classical.records[0].x - c.full.mean_x[0]).abs() == 0.0);
    }

    #[test]
    fn two_mode_state_combines_observables() {
        let setup = tube(256, &[0, 2]);
        let c = run_comparison(&setup, &PACKET, 2e-3, 50, 5).unwrap();
        assert!((c.full.norm[0] - 1.0).abs() < 1e-12);
        let parts: f64 = c.modes.iter().map(|m| m.full.observables.mean_x[3]).sum();
        assert_eq!(parts, c.full.mean_x[3]);
    }

    #[test]
    fn steps_must_tile_the_interval() {
        assert_eq!(step_count(1e-3, 2.0).unwrap(), 2000);
        assert!(step_count(0.3, 1.0).is_err());
        assert!(step_count(-1.0, 1.0).is_err());
    }
}

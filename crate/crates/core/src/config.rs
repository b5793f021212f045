//! Scenario files: flat `key = value` text with dotted section prefixes.
//!
//! ```text
//! # comments start with '#'
//! profile.kind = gaussian_bump
//! profile.b0 = 1
//! grid.n = 2048
//! ```
//!
//! Every key is listed in [`KEYS`]; anything else is rejected. Sections are
//! validated lazily, so a file only has to carry what its subcommand needs,
//! but all validation happens before any computation starts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::comparison::{mode_components, step_count, Packet, Setup};
use crate::error::{Error, Result};
use crate::geometry::{FiberSpace, Profile, QuantumParams};
use crate::potentials::{BasePotential, ModeLabel};
use crate::quantum::Grid1D;
use crate::reducibility::DEFAULT_THRESHOLD;
use crate::spline::CubicSpline;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("run.name", "free-form scenario name, echoed into summary.txt"),
    ("profile.kind", "constant | power_law | cosh | gaussian_bump | exponential | tabulated"),
    ("profile.b0", "constant and gaussian_bump: baseline b0"),
    ("profile.c", "power_law, cosh, exponential: prefactor c"),
    ("profile.p", "power_law: exponent p in b = c x^p"),
    ("profile.w", "cosh, gaussian_bump: width w"),
    ("profile.a", "gaussian_bump: bump height a"),
    ("profile.x0", "gaussian_bump: bump centre"),
    ("profile.alpha", "exponential: rate alpha in b = c e^(alpha x)"),
    ("profile.file", "tabulated: CSV with header x,b (relative to the scenario file)"),
    ("fiber.kind", "circle | flat_torus | round_sphere (default circle)"),
    ("fiber.d", "round_sphere: dimension d"),
    ("fiber.radii", "flat_torus: comma-separated radii, one per dimension"),
    ("params.hbar", "reduced Planck constant (default 1)"),
    ("params.mass", "particle mass (default 1)"),
    ("params.xi", "curvature coupling (default 0)"),
    ("potential.kind", "zero | harmonic | inverse_power | linear | tabulated (default zero)"),
    ("potential.k", "harmonic: stiffness"),
    ("potential.center", "harmonic: centre (default 0)"),
    ("potential.c", "inverse_power: coefficient in c / x^p"),
    ("potential.p", "inverse_power: exponent"),
    ("potential.g", "linear: slope in g x"),
    ("potential.file", "tabulated: CSV with header x,v (relative to the scenario file)"),
    ("modes.labels", "';'-separated mode labels: k for circle, k1,k2,.. for flat_torus, l for round_sphere (default the zero mode)"),
    ("modes.weights", "';'-separated positive amplitudes, one per label (default equal)"),
    ("grid.x_lo", "left end of the reduced line"),
    ("grid.x_hi", "right end of the reduced line"),
    ("grid.n", "number of nodes including both ends (default 2048)"),
    ("time.dt", "time step (default 1e-3)"),
    ("time.t_end", "final time; must be a whole number of steps"),
    ("time.snapshot_every", "steps between written snapshots and trajectory rows (default 100)"),
    ("packet.x0", "initial packet centre"),
    ("packet.sigma", "initial packet width"),
    ("packet.p0", "initial packet momentum (default 0)"),
    ("classical.full", "classical: integrate the full geodesic problem instead of the reduced one (default false)"),
    ("classical.x0", "classical, semiclassical: initial x (default the packet mean)"),
    ("classical.xdot", "classical, semiclassical: initial velocity (default packet <p>/m)"),
    ("compare.tolerance", "compare: largest accepted oracle discrepancy (default 1e-4)"),
    ("compare.ehrenfest_fraction", "compare: largest accepted max|r1| / max|<dV'>| (default 0.05)"),
    ("compare.refine", "compare: repeat with dx and dt halved and check convergence (default true)"),
    ("compare.observe_every", "compare: steps between observations for the Ehrenfest report (default 1)"),
    ("reduce.metric_file", "reduce-check: CSV with header x_index,phi_index,I,J,value"),
    ("reduce.x0_index", "reduce-check: reference x node (default 0)"),
    ("reduce.threshold", "reduce-check: factorization and split threshold (default 1e-8)"),
];

fn cfg_err(field: &str, message: impl std::fmt::Display) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.to_string(),
    }
}

/// Raw key/value pairs of one scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioConfig {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| cfg_err("config", format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, dir)
    }

    /// `base_dir` anchors relative file references.
    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(&format!("line {}", n + 1), "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(cfg_err(key, "unknown key"));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(cfg_err(key, "given more than once"));
            }
        }
        Ok(Self { values, base_dir })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| cfg_err(key, format!("`{v}` is not a finite number")))
            })
            .transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?
            .ok_or_else(|| cfg_err(key, "is required"))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| cfg_err(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(cfg_err(key, format!("`{v}` is not true or false"))),
        }
    }

    fn path(&self, key: &str) -> Result<PathBuf> {
        let v = self.get(key).ok_or_else(|| cfg_err(key, "is required"))?;
        Ok(self.base_dir.join(v))
    }

    pub fn name(&self) -> &str {
        self.get("run.name").unwrap_or("unnamed")
    }

    pub fn grid(&self) -> Result<Grid1D> {
        let lo = self.f64_req("grid.x_lo")?;
        let hi = self.f64_req("grid.x_hi")?;
        let n = self.usize_or("grid.n", 2048)?;
        Grid1D::new(lo, hi, n).map_err(|e| cfg_err("grid", e))
    }

    pub fn params(&self) -> Result<QuantumParams> {
        let hbar = self.f64_or("params.hbar", 1.0)?;
        let mass = self.f64_or("params.mass", 1.0)?;
        let xi = self.f64_or("params.xi", 0.0)?;
        QuantumParams::new(hbar, mass, xi).map_err(|e| match e {
            Error::Parameter { name, reason } => cfg_err(name, reason),
            other => cfg_err("params", other),
        })
    }

    /// Profile on the grid's interval.
    pub fn profile(&self, grid: &Grid1D) -> Result<Profile> {
        let (lo, hi) = (grid.x_lo(), grid.x_hi());
        let kind = self
            .get("profile.kind")
            .ok_or_else(|| cfg_err("profile.kind", "is required"))?;
        let built = match kind {
            "constant" => Profile::constant(self.f64_req("profile.b0")?, lo, hi),
            "power_law" => Profile::power_law(
                self.f64_req("profile.c")?,
                self.f64_req("profile.p")?,
                lo,
                hi,
            ),
            "cosh" => Profile::cosh(
                self.f64_req("profile.c")?,
                self.f64_req("profile.w")?,
                lo,
                hi,
            ),
            "gaussian_bump" => Profile::gaussian_bump(
                self.f64_req("profile.b0")?,
                self.f64_req("profile.a")?,
                self.f64_or("profile.x0", 0.0)?,
                self.f64_req("profile.w")?,
                lo,
                hi,
            ),
            "exponential" => Profile::exponential(
                self.f64_req("profile.c")?,
                self.f64_req("profile.alpha")?,
                lo,
                hi,
            ),
            "tabulated" => {
                let (x, b) = read_table(&self.path("profile.file")?, "b")
                    .map_err(|e| cfg_err("profile.file", e))?;
                Profile::tabulated(x, b, lo, hi)
            }
            other => {
                return Err(cfg_err(
                    "profile.kind",
                    format!("unknown profile `{other}`"),
                ))
            }
        };
        built.map_err(|e| cfg_err("profile", e))
    }

    pub fn fiber(&self) -> Result<FiberSpace> {
        match self.get("fiber.kind").unwrap_or("circle") {
            "circle" => Ok(FiberSpace::Circle),
            "flat_torus" => {
                let radii = self
                    .get("fiber.radii")
                    .ok_or_else(|| cfg_err("fiber.radii", "is required for flat_torus"))?
                    .split(',')
                    .map(|r| r.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| cfg_err("fiber.radii", e))?;
                FiberSpace::flat_torus(radii).map_err(|e| cfg_err("fiber.radii", e))
            }
            "round_sphere" => {
                let d = self.usize_or("fiber.d", 0)?;
                FiberSpace::round_sphere(d).map_err(|e| cfg_err("fiber.d", e))
            }
            other => Err(cfg_err("fiber.kind", format!("unknown fiber `{other}`"))),
        }
    }

    pub fn base_potential(&self, grid: &Grid1D) -> Result<BasePotential> {
        let base = match self.get("potential.kind").unwrap_or("zero") {
            "zero" => BasePotential::Zero,
            "harmonic" => BasePotential::Harmonic {
                k: self.f64_req("potential.k")?,
                center: self.f64_or("potential.center", 0.0)?,
            },
            "inverse_power" => BasePotential::InversePower {
                c: self.f64_req("potential.c")?,
                p: self.f64_req("potential.p")?,
            },
            "linear" => BasePotential::Linear {
                g: self.f64_req("potential.g")?,
            },
            "tabulated" => {
                let (x, v) = read_table(&self.path("potential.file")?, "v")
                    .map_err(|e| cfg_err("potential.file", e))?;
                BasePotential::Tabulated(
                    CubicSpline::natural(x, v).map_err(|e| cfg_err("potential.file", e))?,
                )
            }
            other => {
                return Err(cfg_err(
                    "potential.kind",
                    format!("unknown potential `{other}`"),
                ))
            }
        };
        base.check_on(grid.x_lo(), grid.x_hi())
            .map_err(|e| cfg_err("potential", e))?;
        Ok(base)
    }

    pub fn mode_labels(&self, fiber: &FiberSpace) -> Result<Vec<ModeLabel>> {
        let Some(text) = self.get("modes.labels") else {
            return Ok(vec![match fiber {
                FiberSpace::Circle => ModeLabel::Circle(0),
                FiberSpace::FlatTorus { radii } => ModeLabel::Torus(vec![0; radii.len()]),
                FiberSpace::RoundSphere { .. } => ModeLabel::Sphere(0),
            }]);
        };
        let bad = |item: &str| {
            cfg_err(
                "modes.labels",
                format!("`{item}` is not a mode label for {}", fiber.name()),
            )
        };
        text.split(';')
            .map(|item| {
                let item = item.trim();
                let inner = item.trim_start_matches('(').trim_end_matches(')');
                match fiber {
                    FiberSpace::Circle => {
                        inner.parse().map(ModeLabel::Circle).map_err(|_| bad(item))
                    }
                    FiberSpace::FlatTorus { .. } => inner
                        .split(',')
                        .map(|k| k.trim().parse::<i64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map(ModeLabel::Torus)
                        .map_err(|_| bad(item)),
                    FiberSpace::RoundSphere { .. } => {
                        inner.parse().map(ModeLabel::Sphere).map_err(|_| bad(item))
                    }
                }
            })
            .collect()
    }

    fn mode_weights(&self) -> Result<Option<Vec<f64>>> {
        self.get("modes.weights")
            .map(|text| {
                text.split(';')
                    .map(|w| w.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| cfg_err("modes.weights", e))
            })
            .transpose()
    }

    /// Tube, fiber state and grid.
    pub fn setup(&self) -> Result<Setup> {
        let grid = self.grid()?;
        let params = self.params()?;
        let profile = self.profile(&grid)?;
        let fiber = self.fiber()?;
        let base = self.base_potential(&grid)?;
        let labels = self.mode_labels(&fiber)?;
        let weights = self.mode_weights()?;
        let modes =
            mode_components(&fiber, &labels, weights.as_deref(), &params).map_err(|e| match e {
                Error::Parameter { name, reason } => cfg_err(name, reason),
                other => cfg_err("modes.labels", other),
            })?;
        Ok(Setup {
            profile,
            fiber,
            params,
            base,
            modes,
            grid,
        })
    }

    pub fn time(&self) -> Result<TimeSpec> {
        let dt = self.f64_or("time.dt", 1e-3)?;
        let t_end = self.f64_req("time.t_end")?;
        let steps = step_count(dt, t_end).map_err(|e| match e {
            Error::Parameter { name, reason } => cfg_err(name, reason),
            other => cfg_err("time", other),
        })?;
        let snapshot_every = self.usize_or("time.snapshot_every", 100)?;
        if snapshot_every == 0 {
            return Err(cfg_err("time.snapshot_every", "must be at least 1"));
        }
        Ok(TimeSpec {
            dt,
            t_end,
            steps,
            snapshot_every,
        })
    }

    pub fn packet(&self, grid: &Grid1D) -> Result<Packet> {
        let packet = Packet {
            x0: self.f64_req("packet.x0")?,
            sigma: self.f64_req("packet.sigma")?,
            p0: self.f64_or("packet.p0", 0.0)?,
        };
        if !(packet.sigma > grid.dx()) {
            return Err(cfg_err(
                "packet.sigma",
                format!(
                    "{} does not resolve on a grid with dx = {}",
                    packet.sigma,
                    grid.dx()
                ),
            ));
        }
        if !(grid.x_lo() < packet.x0 && packet.x0 < grid.x_hi()) {
            return Err(cfg_err("packet.x0", "must lie inside the grid"));
        }
        Ok(packet)
    }

    pub fn classical(&self) -> Result<ClassicalSpec> {
        Ok(ClassicalSpec {
            full: self.bool_or("classical.full", false)?,
            x0: self.f64_opt("classical.x0")?,
            xdot: self.f64_opt("classical.xdot")?,
        })
    }

    pub fn compare(&self) -> Result<CompareSpec> {
        let spec = CompareSpec {
            tolerance: self.f64_or("compare.tolerance", 1e-4)?,
            ehrenfest_fraction: self.f64_or("compare.ehrenfest_fraction", 0.05)?,
            refine: self.bool_or("compare.refine", true)?,
            observe_every: self.usize_or("compare.observe_every", 1)?,
        };
        if !(spec.tolerance > 0.0) {
            return Err(cfg_err("compare.tolerance", "must be positive"));
        }
        if !(spec.ehrenfest_fraction > 0.0) {
            return Err(cfg_err("compare.ehrenfest_fraction", "must be positive"));
        }
        if spec.observe_every == 0 {
            return Err(cfg_err("compare.observe_every", "must be at least 1"));
        }
        Ok(spec)
    }

    pub fn reduce(&self) -> Result<ReduceSpec> {
        let threshold = self.f64_or("reduce.threshold", DEFAULT_THRESHOLD)?;
        if !(threshold > 0.0) {
            return Err(cfg_err("reduce.threshold", "must be positive"));
        }
        Ok(ReduceSpec {
            metric_file: self.path("reduce.metric_file")?,
            x0_index: self.usize_or("reduce.x0_index", 0)?,
            threshold,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub snapshot_every: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalSpec {
    pub full: bool,
    pub x0: Option<f64>,
    pub xdot: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareSpec {
    pub tolerance: f64,
    pub ehrenfest_fraction: f64,
    pub refine: bool,
    pub observe_every: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReduceSpec {
    pub metric_file: PathBuf,
    pub x0_index: usize,
    pub threshold: f64,
}

/// Two-column CSV with header `x,<column>`.
fn read_table(path: &Path, column: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != column {
        return Err(Error::Insufficient(format!(
            "{}: header must be x,{column}",
            path.display()
        )));
    }
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::Insufficient(format!("{}: `{s}` is not a number", path.display()))
            })
        };
        xs.push(parse(&rec[0])?);
        vs.push(parse(&rec[1])?);
    }
    Ok((xs, vs))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TUBE: &str = "
        run.name = tube
        profile.kind = gaussian_bump   # b = 1 + 0.5 exp(-x^2)
        profile.b0 = 1
        profile.a = 0.5
        profile.w = 1
        params.xi = 0.2
        modes.labels = 3
        grid.x_lo = -8
        grid.x_hi = 8
        grid.n = 256
        time.t_end = 0.5
        packet.x0 = -3
        packet.sigma = 0.5
        packet.p0 = 2
    ";

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(text, PathBuf::new())
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn full_scenario_validates() {
        let cfg = parse(TUBE).unwrap();
        assert_eq!(cfg.name(), "tube");
        let setup = cfg.setup().unwrap();
        assert_eq!(setup.modes[0].energy.value, 4.5);
        assert_eq!(setup.params.xi, 0.2);
        let time = cfg.time().unwrap();
        assert_eq!((time.steps, time.snapshot_every), (500, 100));
        assert_eq!(cfg.packet(&setup.grid).unwrap().p0, 2.0);
        assert!(cfg.compare().unwrap().refine);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert_eq!(field_of(parse("grid.m = 3").unwrap_err()), "grid.m");
        assert_eq!(
            field_of(parse("grid.n = 3\ngrid.n = 4").unwrap_err()),
            "grid.n"
        );
        assert!(parse("just words").is_err());
    }

    #[test]
    fn negative_mass_names_the_field() {
        let cfg = parse(&format!("{TUBE}\nparams.mass = -1")).unwrap();
        let field = field_of(cfg.setup().unwrap_err());
        assert!(field.contains("mass"), "{field}");
    }

    #[test]
    fn torus_and_sphere_labels() {
        let cfg = parse("fiber.kind = flat_torus\nfiber.radii = 1, 2\nmodes.labels = (1,2); 0,1")
            .unwrap();
        let fiber = cfg.fiber().unwrap();
        assert_eq!(
            cfg.mode_labels(&fiber).unwrap(),
            vec![ModeLabel::Torus(vec![1, 2]), ModeLabel::Torus(vec![0, 1])]
        );
        let cfg = parse("fiber.kind = round_sphere\nfiber.d = 2\nmodes.labels = 2").unwrap();
        let fiber = cfg.fiber().unwrap();
        assert_eq!(cfg.mode_labels(&fiber).unwrap(), vec![ModeLabel::Sphere(2)]);
        let cfg = parse("modes.labels = 1,2").unwrap();
        assert_eq!(
            field_of(cfg.mode_labels(&FiberSpace::Circle).unwrap_err()),
            "modes.labels"
        );
    }

    #[test]
    fn inconsistent_values_are_config_errors() {
        let bad_time = parse(&format!("{TUBE}\ntime.dt = 0.3")).unwrap();
        assert_eq!(field_of(bad_time.time().unwrap_err()), "time.t_end");
        let thin = parse(&TUBE.replace("packet.sigma = 0.5", "packet.sigma = 0.01")).unwrap();
        let grid = thin.grid().unwrap();
        assert_eq!(field_of(thin.packet(&grid).unwrap_err()), "packet.sigma");
        let plane = parse(&TUBE.replace(
            "profile.kind = gaussian_bump",
            "profile.kind = power_law\nprofile.c = 1\nprofile.p = 1",
        ))
        .unwrap();
        assert_eq!(field_of(plane.setup().unwrap_err()), "profile");
        let wrong = parse("compare.refine = yes").unwrap();
        assert_eq!(field_of(wrong.compare().unwrap_err()), "compare.refine");
    }
}

//! Classical and semiclassical trajectories.
//!
//! [`integrate_full`] follows the particle on the whole warped product
//! (fiber angles included) for fibers whose angle coordinates are
//! geodesic: the circle and the flat torus. [`integrate_reduced`] solves
//! `m ẍ = −V'(x)` on the line for any [`Potential1D`], which with `V_cl`
//! is the classical reduction and with `V_qu` the semiclassical one.

use crate::error::{param, Error, Result};
use crate::geometry::{FiberSpace, Profile};
use crate::potentials::{BasePotential, Potential1D};

/// Phase-space point of a full run.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    /// Fiber angles, one per fiber dimension.
    pub phi: Vec<f64>,
    /// Conjugate fiber momenta `p_I = m b² g̃_II φ̇^I`.
    pub p_phi: Vec<f64>,
}

impl ClassicalState {
    pub fn new(x: f64, xdot: f64, p_phi: Vec<f64>) -> Self {
        Self {
            t: 0.0,
            x,
            xdot,
            phi: vec![0.0; p_phi.len()],
            p_phi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub energy: f64,
    /// Relative drift of the fiber momenta (absolute if they start at zero);
    /// zero for reduced runs.
    pub pphi_drift: f64,
}

/// Why a run stopped before `t_end`.
#[derive(Clone, Debug, PartialEq)]
pub enum ExitReason {
    LeftDomain { t: f64, x: f64 },
    NonFinite { t: f64 },
}

/// Uniformly sampled trajectory; truncated if the particle left the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySeries {
    pub dt: f64,
    pub records: Vec<TrajectoryRecord>,
    pub exit: Option<ExitReason>,
    /// Final full state, for full runs.
    pub final_state: Option<ClassicalState>,
}

impl TrajectorySeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.x).collect()
    }

    pub fn last(&self) -> &TrajectoryRecord {
        self.records
            .last()
            .expect("series always holds the initial record")
    }

    pub fn max_pphi_drift(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.pphi_drift)
            .fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.records[0].energy;
        self.records
            .iter()
            .map(|r| (r.energy - e0).abs())
            .fold(0.0, f64::max)
    }

    /// Keeps every `every`-th record (and always the first).
    pub fn thinned(&self, every: usize) -> Self {
        let every = every.max(1);
        Self {
            dt: self.dt * every as f64,
            records: self.records.iter().step_by(every).copied().collect(),
            exit: self.exit.clone(),
            final_state: self.final_state.clone(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.exit.is_none()
    }
}

fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(param("dt", format!("must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(param("t_end", format!("must be positive, got {t_end}")));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end || steps < 1.0 {
        return Err(param(
            "dt",
            format!("t_end = {t_end} is not a whole number of steps of {dt}"),
        ));
    }
    Ok(steps as usize)
}

fn rk4_step(y: &[f64], dt: f64, rhs: &dyn Fn(&[f64], &mut [f64])) -> Vec<f64> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    rhs(y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    rhs(&tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    rhs(&tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + dt * k3[i];
    }
    rhs(&tmp, &mut k4);
    (0..n)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn domain_exit(t: f64, x: f64, domain: (f64, f64), y: &[f64]) -> Option<ExitReason> {
    if y.iter().any(|v| !v.is_finite()) {
        Some(ExitReason::NonFinite { t })
    } else if x < domain.0 || x > domain.1 {
        Some(ExitReason::LeftDomain { t, x })
    } else {
        None
    }
}

/// Full motion on the warped product with a circle or flat-torus fiber.
///
/// State is `(x, ẋ, φ^I, φ̇^I)`; the fiber angles follow their geodesic
/// equation `φ̈^I = −2 (b'/b) ẋ φ̇^I`, so conservation of `p_I` is a
/// diagnostic rather than an input.
pub fn integrate_full(
    profile: &Profile,
    fiber: &FiberSpace,
    base: &BasePotential,
    mass: f64,
    init: &ClassicalState,
    dt: f64,
    t_end: f64,
) -> Result<TrajectorySeries> {
    let metric = fiber.coordinate_metric().ok_or_else(|| {
        Error::Unsupported(format!(
            "full classical runs need coordinate-geodesic fibers; got {}",
            fiber.name()
        ))
    })?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(param("mass", format!("must be positive, got {mass}")));
    }
    let d = metric.len();
    if init.p_phi.len() != d || init.phi.len() != d {
        return Err(Error::Mismatch(format!(
            "initial state has {} angles and {} momenta for a {d}-dimensional fiber",
            init.phi.len(),
            init.p_phi.len()
        )));
    }
    profile.check(init.x)?;
    let steps = step_count(dt, t_end)?;

    let b0 = profile.value(init.x);
    let mut y = Vec::with_capacity(2 + 2 * d);
    y.push(init.x);
    y.push(init.xdot);
    y.extend_from_slice(&init.phi);
    y.extend(
        init.p_phi
            .iter()
            .zip(&metric)
            .map(|(p, g)| p / (mass * b0 * b0 * g)),
    );

    let rhs = |s: &[f64], out: &mut [f64]| {
        let jet = profile.jet(s[0]);
        let rate = jet.db / jet.b;
        let phidot = &s[2 + d..];
        let kinetic: f64 = phidot.iter().zip(&metric).map(|(w, g)| g * w * w).sum();
        out[0] = s[1];
        out[1] = jet.b * jet.db * kinetic - base.grad(s[0]) / mass;
        for i in 0..d {
            out[2 + i] = phidot[i];
            out[2 + d + i] = -2.0 * rate * s[1] * phidot[i];
        }
    };
    let momenta = |s: &[f64]| -> Vec<f64> {
        let b = profile.value(s[0]);
        s[2 + d..]
            .iter()
            .zip(&metric)
            .map(|(w, g)| mass * b * b * g * w)
            .collect()
    };
    let p_ref = init.p_phi.clone();
    let p_scale = p_ref.iter().map(|p| p * p).sum::<f64>().sqrt();
    let record = |t: f64, s: &[f64]| {
        let b = profile.value(s[0]);
        let kinetic: f64 = s[2 + d..].iter().zip(&metric).map(|(w, g)| g * w * w).sum();
        let energy = 0.5 * mass * (s[1] * s[1] + b * b * kinetic) + base.value(s[0]);
        let dp = momenta(s)
            .iter()
            .zip(&p_ref)
            .map(|(p, p0)| (p - p0).powi(2))
            .sum::<f64>()
            .sqrt();
        TrajectoryRecord {
            t,
            x: s[0],
            xdot: s[1],
            energy,
            pphi_drift: if p_scale > 0.0 { dp / p_scale } else { dp },
        }
    };

    let domain = profile.domain();
    let mut records = Vec::with_capacity(steps + 1);
    records.push(record(init.t, &y));
    let mut exit = None;
    for i in 1..=steps {
        let t = init.t + i as f64 * dt;
        let next = rk4_step(&y, dt, &rhs);
        if let Some(reason) = domain_exit(t, next[0], domain, &next) {
            exit = Some(reason);
            break;
        }
        y = next;
        records.push(record(t, &y));
    }
    let final_state = ClassicalState {
        t: records.last().map_or(init.t, |r| r.t),
        x: y[0],
        xdot: y[1],
        phi: y[2..2 + d].to_vec(),
        p_phi: momenta(&y),
    };
    Ok(TrajectorySeries {
        dt,
        records,
        exit,
        final_state: Some(final_state),
    })
}

/// `m ẍ = −V'(x)` with classical RK4, starting at `t = 0`.
pub fn integrate_reduced(
    potential: &dyn Potential1D,
    mass: f64,
    x0: f64,
    v0: f64,
    dt: f64,
    t_end: f64,
) -> Result<TrajectorySeries> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(param("mass", format!("must be positive, got {mass}")));
    }
    let domain = potential.domain();
    if x0 < domain.0 || x0 > domain.1 {
        return Err(Error::OutOfDomain {
            x: x0,
            lo: domain.0,
            hi: domain.1,
        });
    }
    let steps = step_count(dt, t_end)?;
    let rhs = |s: &[f64], out: &mut [f64]| {
        out[0] = s[1];
        out[1] = -potential.grad(s[0]) / mass;
    };
    let record = |t: f64, s: &[f64]| TrajectoryRecord {
        t,
        x: s[0],
        xdot: s[1],
        energy: 0.5 * mass * s[1] * s[1] + potential.value(s[0]),
        pphi_drift: 0.0,
    };
    let mut y = vec![x0, v0];
    let mut records = Vec::with_capacity(steps + 1);
    records.push(record(0.0, &y));
    let mut exit = None;
    for i in 1..=steps {
        let t = i as f64 * dt;
        let next = rk4_step(&y, dt, &rhs);
        if let Some(reason) = domain_exit(t, next[0], domain, &next) {
            exit = Some(reason);
            break;
        }
        y = next;
        records.push(record(t, &y));
    }
    Ok(TrajectorySeries {
        dt,
        records,
        exit,
        final_state: None,
    })
}

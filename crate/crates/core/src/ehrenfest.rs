//! Ehrenfest diagnostics: how far `⟨x⟩` strays from the classical force law.
//!
//! For a reduced state the exact relation is `m ∂²⟨x⟩/∂t² = −⟨V_cl' + ΔV_eff'⟩`.
//! [`build_report`] differentiates the observed `⟨x⟩` twice and forms
//!
//! * `r₁ = m ẍ + ⟨V_cl'⟩ + ⟨ΔV_eff'⟩`, which should vanish up to discretization;
//! * `r₀ = m ẍ + ⟨V_cl'⟩`, which should track `−⟨ΔV_eff'⟩`.

use crate::classical::TrajectorySeries;
use crate::error::{Error, Result};
use crate::quantum::{Measure, ModeWavefunction, ObservableSeries};

/// `Σ_k ∫ |Ψ_k|² f'(x) dx` over flat-measure components.
pub fn expectation_force(
    components: &[ModeWavefunction],
    grad: impl Fn(f64) -> f64,
) -> Result<f64> {
    let first = components
        .first()
        .ok_or_else(|| Error::Insufficient("no components".into()))?;
    let grid = first.grid;
    let force: Vec<f64> = grid.nodes().into_iter().map(grad).collect();
    let mut total = 0.0;
    for c in components {
        if c.grid != grid {
            return Err(Error::Mismatch("components live on different grids".into()));
        }
        if c.measure != Measure::Flat {
            return Err(Error::Mismatch(
                "expected forces are taken over flat-measure components".into(),
            ));
        }
        total += grid.integrate(|i| c.values[i].norm_sqr() * force[i]);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    /// Interior observation times (the second difference needs both neighbours).
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub classical_x: Vec<f64>,
    pub naive_quantum_x: Vec<f64>,
    pub corrected_residual: Vec<f64>,
    pub naive_residual: Vec<f64>,
    /// `⟨ΔV_eff'⟩`
    pub exp_grad_dveff: Vec<f64>,
    pub max_r1: f64,
    pub max_r0: f64,
    pub max_grad_dveff: f64,
    /// `max |r₀ + ⟨ΔV_eff'⟩ − r₁|`; zero up to rounding.
    pub identity_defect: f64,
}

impl DeviationReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |r₀ + ⟨ΔV_eff'⟩|`
    pub fn naive_excess(&self) -> f64 {
        max_abs(
            self.naive_residual
                .iter()
                .zip(&self.exp_grad_dveff)
                .map(|(r, g)| r + g),
        )
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Sample a fixed-step trajectory at the given times. Every time must sit on
/// the trajectory's step lattice.
fn resample(series: &TrajectorySeries, times: &[f64]) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            let k = (t / series.dt).round();
            let rec = series.records.get(k as usize).ok_or_else(|| {
                Error::Insufficient(format!("classical trajectory ends before t = {t}"))
            })?;
            if (rec.t - t).abs() > 1e-9 * series.dt.max(t.abs()) {
                return Err(Error::Mismatch(format!(
                    "classical samples do not land on observation time {t}"
                )));
            }
            Ok(rec.x)
        })
        .collect()
}

/// Combine a corrected-quantum run, a naive-quantum run and a classical
/// trajectory into a report. The quantum series must share a uniform time
/// base with at least 5 samples.
pub fn build_report(
    corrected: &ObservableSeries,
    naive: &ObservableSeries,
    classical: &TrajectorySeries,
    mass: f64,
) -> Result<DeviationReport> {
    let n = corrected.len();
    if n < 5 {
        return Err(Error::Insufficient(format!(
            "{n} observations; second differences need at least 5"
        )));
    }
    if naive.times != corrected.times {
        return Err(Error::Mismatch(
            "naive and corrected runs use different time bases".into(),
        ));
    }
    let h = corrected.times[1] - corrected.times[0];
    if corrected
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h)
    {
        return Err(Error::Mismatch("observation times are not uniform".into()));
    }
    let classical_all = resample(classical, &corrected.times)?;

    let x = &corrected.mean_x;
    let mut report = DeviationReport {
        times: Vec::with_capacity(n - 2),
        mean_x: Vec::with_capacity(n - 2),
        classical_x: Vec::with_capacity(n - 2),
        naive_quantum_x: Vec::with_capacity(n - 2),
        corrected_residual: Vec::with_capacity(n - 2),
        naive_residual: Vec::with_capacity(n - 2),
        exp_grad_dveff: Vec::with_capacity(n - 2),
        max_r1: 0.0,
        max_r0: 0.0,
        max_grad_dveff: 0.0,
        identity_defect: 0.0,
    };
    for i in 1..n - 1 {
        let accel = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (h * h);
        let r0 = mass * accel + corrected.grad_vcl[i];
        let r1 = mass * accel + corrected.grad_vcl[i] + corrected.grad_dveff[i];
        report.times.push(corrected.times[i]);
        report.mean_x.push(x[i]);
        report.classical_x.push(classical_all[i]);
        report.naive_quantum_x.push(naive.mean_x[i]);
        report.naive_residual.push(r0);
        report.corrected_residual.push(r1);
        report.exp_grad_dveff.push(corrected.grad_dveff[i]);
    }
    report.max_r1 = max_abs(report.corrected_residual.iter().copied());
    report.max_r0 = max_abs(report.naive_residual.iter().copied());
    report.max_grad_dveff = max_abs(report.exp_grad_dveff.iter().copied());
    report.identity_defect = max_abs((0..report.len()).map(|i| {
        report.naive_residual[i] + report.exp_grad_dveff[i] - report.corrected_residual[i]
    }));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::integrate_reduced;
    use crate::geometry::{FiberSpace, Profile, QuantumParams};
    use crate::potentials::{fiber_mode_energy, BasePotential, EffectivePotential, ModeLabel};
    use crate::quantum::{
        build_naive_hamiltonian, build_reduced_hamiltonian, crank_nicolson_evolve, gaussian_packet,
        Grid1D, Schedule,
    };

    fn packet(grid: &Grid1D, x0: f64) -> ModeWavefunction {
        gaussian_packet(grid, x0, 0.5, 1.0, 1.0, Measure::Flat, None).unwrap()
    }

    #[test]
    fn constant_and_linear_forces() {
        let grid = Grid1D::new(-6.0, 6.0, 601).unwrap();
        let psi = packet(&grid, 0.3);
        assert_eq!(
            expectation_force(std::slice::from_ref(&psi), |_| 0.0).unwrap(),
            0.0
        );
        let g = 0.7;
        assert!((expectation_force(std::slice::from_ref(&psi), |_| g).unwrap() - g).abs() < 1e-12);

        let s = 0.5f64.sqrt();
        let other = packet(&grid, -1.0);
        let mixed = [psi.scaled(s), other.scaled(s)];
        assert!((expectation_force(&mixed, |_| g).unwrap() - g).abs() < 1e-12);
    }

    #[test]
    fn harmonic_force_matches_quadrature() {
        let grid = Grid1D::new(-6.0, 6.0, 1201).unwrap();
        let psi = packet(&grid, 0.8);
        let k = 2.5;
        let f = expectation_force(std::slice::from_ref(&psi), |x| k * x).unwrap();
        // continuum oracle: |ψ|² is a normal density with mean 0.8
        assert!((f - k * 0.8).abs() < 1e-8);
        assert!((f - k * psi.mean_x()).abs() < 1e-12);
    }

    #[test]
    fn weighted_components_are_rejected() {
        let grid = Grid1D::new(1.0, 5.0, 201).unwrap();
        let plane = Profile::power_law(1.0, 1.0, 1.0, 5.0).unwrap();
        let w = Measure::weighted(&grid, &plane, 1).unwrap();
        let chi = gaussian_packet(&grid, 3.0, 0.4, 0.0, 1.0, w, None).unwrap();
        assert!(expectation_force(&[chi], |_| 1.0).is_err());
    }

    fn synthetic_series(n: usize) -> ObservableSeries {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
        ObservableSeries {
            mean_x: times.iter().map(|t| t.sin()).collect(),
            norm: vec![1.0; n],
            grad_vcl: times.iter().map(|t| 0.5 * t.sin()).collect(),
            grad_dveff: times.iter().map(|t| 0.3 * t.cos() - 0.1).collect(),
            times,
        }
    }

    fn flat_trajectory(n: usize, dt: f64) -> TrajectorySeries {
        let pot = BasePotential::Zero;
        integrate_reduced(&pot, 1.0, 0.0, 1.0, dt, dt * (n - 1) as f64).unwrap()
    }

    #[test]
    fn residuals_satisfy_the_identity() {
        let obs = synthetic_series(40);
        let classical = flat_trajectory(40, 0.1);
        let rep = build_report(&obs, &obs, &classical, 1.3).unwrap();
        assert_eq!(rep.len(), 38);
        assert!(rep.identity_defect <= 1e-15);
        for i in 0..rep.len() {
            assert!((rep.classical_x[i] - rep.times[i]).abs() < 1e-12);
        }
        assert!(rep.max_grad_dveff > 0.0);
    }

    #[test]
    fn too_few_observations() {
        let obs = synthetic_series(4);
        let classical = flat_trajectory(4, 0.1);
        assert!(matches!(
            build_report(&obs, &obs, &classical, 1.0),
            Err(Error::Insufficient(_))
        ));
    }

    #[test]
    fn constant_profile_has_no_deviation() {
        let grid = Grid1D::new(-8.0, 8.0, 1024).unwrap();
        let flat = Profile::constant(1.2, -8.0, 8.0).unwrap();
        let fiber = FiberSpace::Circle;
        let p = QuantumParams::new(1.0, 1.0, 0.2).unwrap();
        let mode = fiber_mode_energy(&fiber, &ModeLabel::Circle(2), &p).unwrap();
        let base = BasePotential::Harmonic {
            k: 1.0,
            center: 0.0,
        };
        let psi = gaussian_packet(&grid, -1.5, 0.5, 0.5, 1.0, Measure::Flat, None).unwrap();
        let (dt, steps) = (1e-3, 1000);
        let h = build_reduced_hamiltonian(&grid, &flat, &fiber, &mode, &p, &base).unwrap();
        let hn = build_naive_hamiltonian(&grid, &flat, &fiber, &mode, &p, &base).unwrap();
        let run =
            crank_nicolson_evolve(&h, &psi, dt, steps, Schedule::observables_only(10)).unwrap();
        let naive =
            crank_nicolson_evolve(&hn, &psi, dt, steps, Schedule::observables_only(10)).unwrap();
        let pot = EffectivePotential::classical(&base, &flat, 1, mode.value);
        let x0 = psi.mean_x();
        let v0 = psi.mean_momentum(1.0);
        let classical = integrate_reduced(&pot, 1.0, x0, v0, dt, dt * steps as f64).unwrap();
        let rep = build_report(&run.observables, &naive.observables, &classical, 1.0).unwrap();
        let scale = max_abs(run.observables.grad_vcl.iter().copied());
        assert_eq!(rep.max_grad_dveff, 0.0);
        assert!(rep.max_r1 <= 1e-3 * scale, "r1 {} vs {scale}", rep.max_r1);
        assert!(rep.max_r0 <= 1e-3 * scale);
        let last = rep.len() - 1;
        assert!((rep.naive_quantum_x[last] - rep.mean_x[last]).abs() < 1e-6);
        // harmonic: ⟨x⟩ obeys the classical equation exactly
        assert!((rep.classical_x[last] - rep.mean_x[last]).abs() < 1e-3);
    }
}

//! Fiber-mode Schrödinger evolution on the reduced line.
//!
//! Two independent discretizations of the same physics live here:
//!
//! * the full covariant operator restricted to one fiber mode, acting on
//!   `χ(x)` with the weighted inner product `Σ b^d ψ* φ dx`. Its kinetic
//!   term is written in flux form with `b^d` sampled at half nodes, which
//!   makes the matrix exactly self-adjoint in that inner product;
//! * the reduced operator `−(ħ²/2m)∂² + V_qu` acting on `Ψ_x = b^{d/2} χ`
//!   with the flat inner product.
//!
//! Both are evolved with Crank–Nicolson. [`lift_to_reduced`] maps the
//! first kind of state onto the second.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::geometry::{ricci_from_jet, FiberSpace, Profile, QuantumParams};
use crate::potentials::{
    delta_v_eff_from_jet, delta_v_eff_grad_from_jet, BasePotential, ModeEnergy,
};
use crate::tridiag::Factored;

/// Uniform grid with `n` nodes including both end points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    x_lo: f64,
    x_hi: f64,
    n: usize,
}

impl Grid1D {
    pub const MIN_NODES: usize = 16;

    pub fn new(x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        if !(x_lo.is_finite() && x_hi.is_finite() && x_lo < x_hi) {
            return Err(Error::Grid(format!(
                "[{x_lo}, {x_hi}] is not a finite interval"
            )));
        }
        if n < Self::MIN_NODES {
            return Err(Error::Grid(format!(
                "need at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { x_lo, x_hi, n })
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.x_hi
        } else {
            self.x_lo + i as f64 * self.dx()
        }
    }

    /// Midpoint between nodes `j` and `j + 1`.
    pub fn half_node(&self, j: usize) -> f64 {
        self.x_lo + (j as f64 + 0.5) * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }

    pub fn check_within(&self, profile: &Profile) -> Result<()> {
        profile.check(self.x_lo)?;
        profile.check(self.x_hi)
    }

    /// Trapezoid rule over node samples.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let inner: f64 = (1..self.n - 1).map(&f).sum();
        (inner + 0.5 * (f(0) + f(self.n - 1))) * self.dx()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    /// `Σ b(x_i)^d ψ* φ dx`, for full-space mode amplitudes `χ`.
    WeightedBd,
    /// `Σ ψ* φ dx`, for reduced wavefunctions `Ψ_x`.
    Flat,
}

/// Inner-product weights on a grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Flat,
    WeightedBd { d: usize, weights: Arc<[f64]> },
}

impl Measure {
    pub fn weighted(grid: &Grid1D, profile: &Profile, d: usize) -> Result<Self> {
        grid.check_within(profile)?;
        let weights: Vec<f64> = (0..grid.len())
            .map(|i| profile.value(grid.node(i)).powi(d as i32))
            .collect();
        Ok(Self::WeightedBd {
            d,
            weights: weights.into(),
        })
    }

    pub fn kind(&self) -> MeasureKind {
        match self {
            Self::Flat => MeasureKind::Flat,
            Self::WeightedBd { .. } => MeasureKind::WeightedBd,
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        match self {
            Self::Flat => 1.0,
            Self::WeightedBd { weights, .. } => weights[i],
        }
    }
}

/// Complex amplitudes of one fiber mode on a grid, in a declared measure.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeWavefunction {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub measure: Measure,
    pub mode: Option<ModeEnergy>,
}

impl ModeWavefunction {
    pub fn new(
        grid: Grid1D,
        values: Vec<Complex64>,
        measure: Measure,
        mode: Option<ModeEnergy>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} amplitudes on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if let Measure::WeightedBd { weights, .. } = &measure {
            if weights.len() != grid.len() {
                return Err(Error::Mismatch(
                    "measure weights do not match the grid".into(),
                ));
            }
        }
        Ok(Self {
            grid,
            values,
            measure,
            mode,
        })
    }

    /// Density over the reduced line: `w_i |ψ_i|²`.
    pub fn density(&self) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.measure.weight(i) * v.norm_sqr())
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid
            .integrate(|i| self.measure.weight(i) * self.values[i].norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩` in the shared measure.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_compatible(other)?;
        let dx = self.grid.dx();
        let n = self.grid.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += self.values[i].conj() * other.values[i] * (w * self.measure.weight(i));
        }
        Ok(acc * dx)
    }

    pub fn mean_x(&self) -> f64 {
        let rho = self.density();
        self.grid.integrate(|i| rho[i] * self.grid.node(i))
    }

    /// `⟨p⟩` of the reduced wavefunction by central differences.
    pub fn mean_momentum(&self, hbar: f64) -> f64 {
        let psi: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.measure.weight(i).sqrt())
            .collect();
        let dx = self.grid.dx();
        let n = psi.len();
        let sum: f64 = (1..n - 1)
            .map(|i| (psi[i].conj() * (psi[i + 1] - psi[i - 1])).im / (2.0 * dx))
            .sum();
        hbar * sum * dx
    }

    /// Largest reduced amplitude `√(w|ψ|²)` on the nodes next to the walls.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.grid.len();
        let amp = |i: usize| (self.measure.weight(i) * self.values[i].norm_sqr()).sqrt();
        amp(1).max(amp(n - 2))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Mismatch(
                "wavefunctions live on different grids".into(),
            ));
        }
        if self.measure != other.measure {
            return Err(Error::Mismatch(
                "wavefunctions use different measures".into(),
            ));
        }
        Ok(())
    }
}

/// Normalized Gaussian `∝ exp(−(x−x0)²/4σ² + i p0 x/ħ)` with Dirichlet ends.
pub fn gaussian_packet(
    grid: &Grid1D,
    x0: f64,
    sigma: f64,
    p0: f64,
    hbar: f64,
    measure: Measure,
    mode: Option<ModeEnergy>,
) -> Result<ModeWavefunction> {
    if !(sigma.is_finite() && sigma > grid.dx()) {
        return Err(param(
            "packet.sigma",
            format!("{sigma} does not resolve on a grid with dx = {}", grid.dx()),
        ));
    }
    let n = grid.len();
    let values: Vec<Complex64> = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                return Complex64::new(0.0, 0.0);
            }
            let x = grid.node(i);
            let s = (x - x0) / (2.0 * sigma);
            Complex64::from_polar((-s * s).exp(), p0 * x / hbar)
        })
        .collect();
    let raw = ModeWavefunction::new(*grid, values, measure, mode)?;
    let norm = raw.norm();
    if !(norm > 0.0) {
        return Err(param("packet.x0", "packet has no weight on the grid"));
    }
    Ok(raw.scaled(1.0 / norm))
}

/// `Ψ_x = b^{d/2} χ`: full-space mode amplitude to reduced wavefunction.
pub fn lift_to_reduced(chi: &ModeWavefunction) -> Result<ModeWavefunction> {
    let Measure::WeightedBd { weights, .. } = &chi.measure else {
        return Err(Error::Mismatch(
            "lift expects a weighted-measure state".into(),
        ));
    };
    let values = chi
        .values
        .iter()
        .zip(weights.iter())
        .map(|(v, w)| v * w.sqrt())
        .collect();
    ModeWavefunction::new(chi.grid, values, Measure::Flat, chi.mode.clone())
}

/// Inverse of [`lift_to_reduced`] for the given weighted measure.
pub fn project_to_full(psi: &ModeWavefunction, measure: &Measure) -> Result<ModeWavefunction> {
    if psi.measure != Measure::Flat {
        return Err(Error::Mismatch(
            "projection expects a flat-measure state".into(),
        ));
    }
    let Measure::WeightedBd { weights, .. } = measure else {
        return Err(Error::Mismatch(
            "projection target must be a weighted measure".into(),
        ));
    };
    if weights.len() != psi.grid.len() {
        return Err(Error::Mismatch(
            "measure weights do not match the grid".into(),
        ));
    }
    let values = psi
        .values
        .iter()
        .zip(weights.iter())
        .map(|(v, w)| v / w.sqrt())
        .collect();
    ModeWavefunction::new(psi.grid, values, measure.clone(), psi.mode.clone())
}

/// `ρ_x = Σ_k w|ψ_k|²` over mode components sharing a grid.
pub fn probability_density(components: &[ModeWavefunction]) -> Result<Vec<f64>> {
    let first = components
        .first()
        .ok_or_else(|| Error::Insufficient("no components".into()))?;
    let mut rho = vec![0.0; first.grid.len()];
    for c in components {
        if c.grid != first.grid {
            return Err(Error::Mismatch("components live on different grids".into()));
        }
        for (r, v) in rho.iter_mut().zip(c.density()) {
            *r += v;
        }
    }
    Ok(rho)
}

/// Flat-norm distance between two flat-measure states.
pub fn flat_distance(a: &ModeWavefunction, b: &ModeWavefunction) -> Result<f64> {
    if a.measure != Measure::Flat || b.measure != Measure::Flat {
        return Err(Error::Mismatch(
            "distance is measured between flat states".into(),
        ));
    }
    if a.grid != b.grid {
        return Err(Error::Mismatch("states live on different grids".into()));
    }
    Ok(a.grid
        .integrate(|i| (a.values[i] - b.values[i]).norm_sqr())
        .sqrt())
}

/// Tridiagonal Hamiltonian with Dirichlet ends.
///
/// Row `i` (interior only) reads `lower[i] ψ[i-1] + diag[i] ψ[i] + upper[i] ψ[i+1]`.
/// The operator also carries `V_cl'` and `ΔV_eff'` at the nodes so that
/// evolutions can record expected forces.
#[derive(Clone, Debug)]
pub struct TridiagonalOperator {
    pub grid: Grid1D,
    pub measure: Measure,
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub mode: ModeEnergy,
    pub params: QuantumParams,
    pub grad_vcl: Vec<f64>,
    pub grad_dveff: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..n - 1 {
            out[i] =
                psi[i] * self.diag[i] + psi[i - 1] * self.lower[i] + psi[i + 1] * self.upper[i];
        }
        out
    }

    /// Interior matrix conjugated by `W^{1/2}`: symmetric when the operator
    /// is self-adjoint in its measure. Returns `(diagonal, off-diagonal)`.
    pub fn symmetric_form(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.len();
        let diag = self.diag[1..n - 1].to_vec();
        let off = (1..n - 2)
            .map(|i| {
                let (wi, wj) = (self.measure.weight(i), self.measure.weight(i + 1));
                self.upper[i] * (wi / wj).sqrt()
            })
            .collect();
        (diag, off)
    }

    /// `⟨Hψ, φ⟩ − ⟨ψ, Hφ⟩` in the operator's measure.
    pub fn adjointness_defect(
        &self,
        psi: &ModeWavefunction,
        phi: &ModeWavefunction,
    ) -> Result<f64> {
        let hpsi = ModeWavefunction {
            values: self.apply(&psi.values),
            ..psi.clone()
        };
        let hphi = ModeWavefunction {
            values: self.apply(&phi.values),
            ..phi.clone()
        };
        Ok((hpsi.inner(phi)? - psi.inner(&hphi)?).norm())
    }
}

fn nodal_forces(
    grid: &Grid1D,
    profile: &Profile,
    d: usize,
    e_phi: f64,
    params: &QuantumParams,
    base: &BasePotential,
) -> (Vec<f64>, Vec<f64>) {
    grid.nodes()
        .into_iter()
        .map(|x| {
            let jet = profile.jet(x);
            let vcl = base.grad(x) - 2.0 * e_phi * jet.db / (jet.b * jet.b * jet.b);
            (vcl, delta_v_eff_grad_from_jet(&jet, d, params))
        })
        .unzip()
}

/// Covariant Hamiltonian restricted to one fiber mode, acting on `χ`.
pub fn build_full_mode_hamiltonian(
    grid: &Grid1D,
    profile: &Profile,
    fiber: &FiberSpace,
    mode: &ModeEnergy,
    params: &QuantumParams,
    base: &BasePotential,
) -> Result<TridiagonalOperator> {
    grid.check_within(profile)?;
    let d = fiber.dim();
    let n = grid.len();
    let c = params.kinetic_scale();
    let dx2 = grid.dx() * grid.dx();
    let measure = Measure::weighted(grid, profile, d)?;
    // b^d at x_{j+1/2}, shared by rows j and j+1 so the weighted matrix is
    // exactly symmetric
    let half: Vec<f64> = (0..n - 1)
        .map(|j| profile.value(grid.half_node(j)).powi(d as i32))
        .collect();

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let x = grid.node(i);
        let jet = profile.jet(x);
        let w = measure.weight(i);
        let curvature = ricci_from_jet(&jet, d, 0.0);
        lower[i] = -c * half[i - 1] / (w * dx2);
        upper[i] = -c * half[i] / (w * dx2);
        diag[i] = c * (half[i - 1] + half[i]) / (w * dx2)
            + mode.value / (jet.b * jet.b)
            + c * params.xi * curvature
            + base.value(x);
    }
    let (grad_vcl, grad_dveff) = nodal_forces(grid, profile, d, mode.value, params, base);
    Ok(TridiagonalOperator {
        grid: *grid,
        measure,
        lower,
        diag,
        upper,
        mode: mode.clone(),
        params: *params,
        grad_vcl,
        grad_dveff,
    })
}

fn build_flat(
    grid: &Grid1D,
    profile: &Profile,
    fiber: &FiberSpace,
    mode: &ModeEnergy,
    params: &QuantumParams,
    base: &BasePotential,
    correction: bool,
) -> Result<TridiagonalOperator> {
    grid.check_within(profile)?;
    let d = fiber.dim();
    let n = grid.len();
    let c = params.kinetic_scale();
    let dx2 = grid.dx() * grid.dx();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let x = grid.node(i);
        let jet = profile.jet(x);
        let mut v = base.value(x) + mode.value / (jet.b * jet.b);
        if correction {
            v += delta_v_eff_from_jet(&jet, d, params);
        }
        lower[i] = -c / dx2;
        upper[i] = -c / dx2;
        diag[i] = 2.0 * c / dx2 + v;
    }
    let (grad_vcl, grad_dveff) = nodal_forces(grid, profile, d, mode.value, params, base);
    Ok(TridiagonalOperator {
        grid: *grid,
        measure: Measure::Flat,
        lower,
        diag,
        upper,
        mode: mode.clone(),
        params: *params,
        grad_vcl,
        grad_dveff,
    })
}

/// `−(ħ²/2m)∂² + V₀ + E_φ/b² + ΔV_eff` acting on `Ψ_x`.
pub fn build_reduced_hamiltonian(
    grid: &Grid1D,
    profile: &Profile,
    fiber: &FiberSpace,
    mode: &ModeEnergy,
    params: &QuantumParams,
    base: &BasePotential,
) -> Result<TridiagonalOperator> {
    build_flat(grid, profile, fiber, mode, params, base, true)
}

/// Reduced operator without `ΔV_eff`: what quantizing the reduced classical
/// system directly produces.
pub fn build_naive_hamiltonian(
    grid: &Grid1D,
    profile: &Profile,
    fiber: &FiberSpace,
    mode: &ModeEnergy,
    params: &QuantumParams,
    base: &BasePotential,
) -> Result<TridiagonalOperator> {
    build_flat(grid, profile, fiber, mode, params, base, false)
}

/// Expected values recorded along an evolution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub norm: Vec<f64>,
    /// `⟨V_cl'⟩`
    pub grad_vcl: Vec<f64>,
    /// `⟨ΔV_eff'⟩`
    pub grad_dveff: Vec<f64>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, op: &TridiagonalOperator, psi: &ModeWavefunction) {
        let rho = psi.density();
        let g = &psi.grid;
        self.times.push(t);
        self.mean_x.push(g.integrate(|i| rho[i] * g.node(i)));
        self.norm.push(g.integrate(|i| rho[i]));
        self.grad_vcl.push(g.integrate(|i| rho[i] * op.grad_vcl[i]));
        self.grad_dveff
            .push(g.integrate(|i| rho[i] * op.grad_dveff[i]));
    }

    /// Sum of mode components observed on a common time base.
    pub fn combine(parts: &[&ObservableSeries]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Insufficient("no series to combine".into()))?;
        let mut out = ObservableSeries {
            times: first.times.clone(),
            mean_x: vec![0.0; first.len()],
            norm: vec![0.0; first.len()],
            grad_vcl: vec![0.0; first.len()],
            grad_dveff: vec![0.0; first.len()],
        };
        for p in parts {
            if p.times != first.times {
                return Err(Error::Mismatch("series use different time bases".into()));
            }
            for i in 0..first.len() {
                out.mean_x[i] += p.mean_x[i];
                out.norm[i] += p.norm[i];
                out.grad_vcl[i] += p.grad_vcl[i];
                out.grad_dveff[i] += p.grad_dveff[i];
            }
        }
        Ok(out)
    }

    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.norm[0];
        self.norm.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }
}

/// When to record observables and when to keep full snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub observe_every: usize,
    pub snapshot_every: Option<usize>,
}

impl Schedule {
    pub fn every(steps: usize) -> Self {
        Self {
            observe_every: steps,
            snapshot_every: Some(steps),
        }
    }

    pub fn observables_only(steps: usize) -> Self {
        Self {
            observe_every: steps,
            snapshot_every: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub snapshots: Vec<(f64, ModeWavefunction)>,
    pub observables: ObservableSeries,
    pub final_state: ModeWavefunction,
    /// Largest `√ρ` seen next to either wall over the whole run.
    pub max_boundary_amplitude: f64,
}

/// Prefactored Crank–Nicolson propagator for a fixed operator and step.
pub struct CrankNicolson<'a> {
    op: &'a TridiagonalOperator,
    factored: Factored<Complex64>,
    alpha: Complex64,
}

impl<'a> CrankNicolson<'a> {
    pub fn new(op: &'a TridiagonalOperator, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(param("time.dt", format!("must be positive, got {dt}")));
        }
        let alpha = Complex64::new(0.0, dt / (2.0 * op.params.hbar));
        let n = op.grid.len();
        let one = Complex64::new(1.0, 0.0);
        let lower: Vec<Complex64> = (1..n - 1).map(|i| alpha * op.lower[i]).collect();
        let diag: Vec<Complex64> = (1..n - 1).map(|i| one + alpha * op.diag[i]).collect();
        let upper: Vec<Complex64> = (1..n - 1).map(|i| alpha * op.upper[i]).collect();
        let factored = Factored::new(&lower, &diag, &upper)?;
        Ok(Self {
            op,
            factored,
            alpha,
        })
    }

    /// `(I + iΔt H/2ħ) ψ' = (I − iΔt H/2ħ) ψ`, in place.
    pub fn step(&self, psi: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = psi.len();
        let op = self.op;
        scratch.clear();
        scratch.extend((1..n - 1).map(|i| {
            let h = psi[i] * op.diag[i] + psi[i - 1] * op.lower[i] + psi[i + 1] * op.upper[i];
            psi[i] - self.alpha * h
        }));
        self.factored.solve_in_place(scratch);
        psi[1..n - 1].copy_from_slice(scratch);
        psi[0] = Complex64::new(0.0, 0.0);
        psi[n - 1] = Complex64::new(0.0, 0.0);
    }
}

pub fn crank_nicolson_evolve(
    op: &TridiagonalOperator,
    psi0: &ModeWavefunction,
    dt: f64,
    steps: usize,
    schedule: Schedule,
) -> Result<EvolutionResult> {
    if psi0.grid != op.grid {
        return Err(Error::Mismatch(
            "state and operator live on different grids".into(),
        ));
    }
    if psi0.measure != op.measure {
        return Err(Error::Mismatch(
            "state and operator use different measures".into(),
        ));
    }
    if schedule.observe_every == 0 || schedule.snapshot_every == Some(0) {
        return Err(param("time.snapshot_every", "must be at least 1"));
    }
    let cn = CrankNicolson::new(op, dt)?;
    let mut psi = psi0.clone();
    let mut scratch = Vec::with_capacity(psi.values.len());
    let mut observables = ObservableSeries::default();
    let mut snapshots = Vec::new();
    let mut boundary = psi.boundary_amplitude();
    for s in 0..=steps {
        let t = s as f64 * dt;
        if s % schedule.observe_every == 0 {
            observables.push(t, op, &psi);
        }
        if schedule.snapshot_every.is_some_and(|k| s % k == 0) {
            snapshots.push((t, psi.clone()));
        }
        if s == steps {
            break;
        }
        cn.step(&mut psi.values, &mut scratch);
        boundary = boundary.max(psi.boundary_amplitude());
    }
    Ok(EvolutionResult {
        snapshots,
        observables,
        final_state: psi,
        max_boundary_amplitude: boundary,
    })
}

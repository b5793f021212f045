//! Effective potentials on the reduced line.
//!
//! The classical effective potential is `V_cl = V₀ + E_φ/b²`. Quantizing
//! before reducing adds the correction
//!
//! ```text
//! ΔV_eff = (ħ²d/2m) [ ((d−2)/4 + ξ(1−d)) (b'/b)² + ((1−4ξ)/2) (b''/b) ]
//!        = (ħ²/8m)  [ (1 − 4ξ(d+1)/d) S'² + 2(1−4ξ) S'' ]
//! ```
//!
//! where `S = d ln b + const` is the log of the fiber's cell count. Every
//! term here has an analytic gradient so that dynamics never differentiate
//! numerically.

use std::fmt;

use crate::error::{param, Error, Result};
use crate::geometry::{entropy, entropy_derivatives, FiberSpace, Profile, QuantumParams, WarpJet};
use crate::spline::CubicSpline;

/// Label of a fiber eigenmode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    /// `e^{ikφ}` on the circle.
    Circle(i64),
    /// `e^{i k·φ}` on the flat torus.
    Torus(Vec<i64>),
    /// Spherical harmonics of degree `ℓ`.
    Sphere(u32),
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Circle(k) => write!(f, "k={k}"),
            Self::Torus(ks) => {
                let parts: Vec<String> = ks.iter().map(i64::to_string).collect();
                write!(f, "k=({})", parts.join(","))
            }
            Self::Sphere(l) => write!(f, "l={l}"),
        }
    }
}

/// Eigenvalue of `(ħ²/2m)(−∇̃² + ξR̃)` on the fiber, tagged with its mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeEnergy {
    pub value: f64,
    pub label: ModeLabel,
}

pub fn fiber_mode_energy(
    fiber: &FiberSpace,
    label: &ModeLabel,
    params: &QuantumParams,
) -> Result<ModeEnergy> {
    let scale = params.kinetic_scale();
    let value = match (fiber, label) {
        (FiberSpace::Circle, ModeLabel::Circle(k)) => scale * (*k as f64).powi(2),
        (FiberSpace::FlatTorus { radii }, ModeLabel::Torus(ks)) if ks.len() == radii.len() => {
            scale
                * ks.iter()
                    .zip(radii)
                    .map(|(k, r)| (*k as f64 / r).powi(2))
                    .sum::<f64>()
        }
        (FiberSpace::RoundSphere { d }, ModeLabel::Sphere(l)) => {
            let (l, d) = (*l as f64, *d as f64);
            scale * (l * (l + d - 1.0) + params.xi * d * (d - 1.0))
        }
        _ => {
            let contract = match fiber {
                FiberSpace::Circle => "expects a single integer k",
                FiberSpace::FlatTorus { .. } => "expects one integer per torus dimension",
                FiberSpace::RoundSphere { .. } => "expects a degree l >= 0",
            };
            return Err(Error::ModeLabel {
                label: label.to_string(),
                fiber: fiber.name(),
                contract,
            });
        }
    };
    Ok(ModeEnergy {
        value,
        label: label.clone(),
    })
}

/// `V₀(x)`, the potential the particle sees before reduction.
#[derive(Clone, Debug, PartialEq)]
pub enum BasePotential {
    Zero,
    /// `½k(x − center)²`
    Harmonic {
        k: f64,
        center: f64,
    },
    /// `c·x^{−p}`
    InversePower {
        c: f64,
        p: f64,
    },
    /// `g·x`
    Linear {
        g: f64,
    },
    Tabulated(CubicSpline),
}

impl BasePotential {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Harmonic { k, center } => 0.5 * k * (x - center).powi(2),
            Self::InversePower { c, p } => c * x.powf(-p),
            Self::Linear { g } => g * x,
            Self::Tabulated(s) => s.value(x),
        }
    }

    pub fn grad(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Harmonic { k, center } => k * (x - center),
            Self::InversePower { c, p } => -c * p * x.powf(-p - 1.0),
            Self::Linear { g } => *g,
            Self::Tabulated(s) => s.jet(x)[1],
        }
    }

    /// Rejects potentials that are not finite somewhere on `[lo, hi]`.
    pub fn check_on(&self, lo: f64, hi: f64) -> Result<()> {
        if let Self::Tabulated(s) = self {
            if lo < s.first_knot() || hi > s.last_knot() {
                return Err(param(
                    "potential",
                    format!("tabulated samples do not cover [{lo}, {hi}]"),
                ));
            }
        }
        let n = 2048;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            if !(self.value(x).is_finite() && self.grad(x).is_finite()) {
                return Err(param("potential", format!("not finite at x = {x}")));
            }
        }
        Ok(())
    }
}

/// `V_cl = V₀ + E_φ/b²`
pub fn v_cl(base: &BasePotential, profile: &Profile, e_phi: f64, x: f64) -> Result<f64> {
    let b = profile.b(x)?;
    Ok(base.value(x) + e_phi / (b * b))
}

pub fn v_cl_grad(base: &BasePotential, profile: &Profile, e_phi: f64, x: f64) -> Result<f64> {
    let jet = profile.eval(x)?;
    Ok(base.grad(x) + centrifugal_grad(&jet, e_phi))
}

/// Quantum correction for a `d`-dimensional fiber, from the warp jet.
pub fn delta_v_eff_from_jet(jet: &WarpJet, d: usize, params: &QuantumParams) -> f64 {
    let (a, c) = correction_coefficients(d, params.xi);
    let u = jet.log_slope();
    let w = jet.curvature_ratio();
    params.kinetic_scale() * d as f64 * (a * u * u + c * w)
}

/// `dΔV_eff/dx` from the warp jet.
pub fn delta_v_eff_grad_from_jet(jet: &WarpJet, d: usize, params: &QuantumParams) -> f64 {
    let (a, c) = correction_coefficients(d, params.xi);
    let u = jet.log_slope();
    let w = jet.curvature_ratio();
    let du = w - u * u;
    let dw = jet.d3b / jet.b - u * w;
    params.kinetic_scale() * d as f64 * (2.0 * a * u * du + c * dw)
}

fn correction_coefficients(d: usize, xi: f64) -> (f64, f64) {
    let d = d as f64;
    ((d - 2.0) / 4.0 + xi * (1.0 - d), (1.0 - 4.0 * xi) / 2.0)
}

/// `ΔV_eff(x)`; depends on the fiber only through its dimension.
pub fn delta_v_eff(
    profile: &Profile,
    fiber: &FiberSpace,
    params: &QuantumParams,
    x: f64,
) -> Result<f64> {
    Ok(delta_v_eff_from_jet(&profile.eval(x)?, fiber.dim(), params))
}

pub fn delta_v_eff_grad(
    profile: &Profile,
    fiber: &FiberSpace,
    params: &QuantumParams,
    x: f64,
) -> Result<f64> {
    Ok(delta_v_eff_grad_from_jet(
        &profile.eval(x)?,
        fiber.dim(),
        params,
    ))
}

/// `ΔV_eff` written through the entropy derivatives `S'`, `S''`.
pub fn delta_v_eff_entropy(
    sprime: f64,
    sdoubleprime: f64,
    d: usize,
    params: &QuantumParams,
) -> Result<f64> {
    if d < 1 {
        return Err(param("d", "fiber dimension must be at least 1"));
    }
    let df = d as f64;
    let xi = params.xi;
    let scale = params.hbar * params.hbar / (8.0 * params.mass);
    Ok(scale
        * ((1.0 - 4.0 * xi * (df + 1.0) / df) * sprime * sprime
            + 2.0 * (1.0 - 4.0 * xi) * sdoubleprime))
}

/// Entropy route end to end: `S(x)` at the given cell size, then its
/// derivatives, then the entropy form of the correction.
pub fn delta_v_eff_via_entropy(
    profile: &Profile,
    fiber: &FiberSpace,
    params: &QuantumParams,
    x: f64,
    cell: f64,
) -> Result<f64> {
    // validates the cell and domain; the constant it carries drops out below
    entropy(profile, fiber, x, cell)?;
    let (s1, s2) = entropy_derivatives(profile, fiber, x)?;
    delta_v_eff_entropy(s1, s2, fiber.dim(), params)
}

/// `V_qu = V_cl + ΔV_eff`
pub fn v_qu(
    base: &BasePotential,
    profile: &Profile,
    fiber: &FiberSpace,
    e_phi: f64,
    params: &QuantumParams,
    x: f64,
) -> Result<f64> {
    Ok(v_cl(base, profile, e_phi, x)? + delta_v_eff(profile, fiber, params, x)?)
}

pub fn v_qu_grad(
    base: &BasePotential,
    profile: &Profile,
    fiber: &FiberSpace,
    e_phi: f64,
    params: &QuantumParams,
    x: f64,
) -> Result<f64> {
    Ok(v_cl_grad(base, profile, e_phi, x)? + delta_v_eff_grad(profile, fiber, params, x)?)
}

fn centrifugal_grad(jet: &WarpJet, e_phi: f64) -> f64 {
    -2.0 * e_phi * jet.db / (jet.b * jet.b * jet.b)
}

/// A potential on the line, with its gradient.
pub trait Potential1D {
    fn value(&self, x: f64) -> f64;
    fn grad(&self, x: f64) -> f64;
    /// Interval on which the potential is defined.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

impl Potential1D for BasePotential {
    fn value(&self, x: f64) -> f64 {
        BasePotential::value(self, x)
    }

    fn grad(&self, x: f64) -> f64 {
        BasePotential::grad(self, x)
    }
}

/// `V_cl` (classical reduction) or `V_qu` (semiclassical) for one mode.
#[derive(Clone, Copy, Debug)]
pub struct EffectivePotential<'a> {
    pub base: &'a BasePotential,
    pub profile: &'a Profile,
    pub d: usize,
    pub e_phi: f64,
    pub params: QuantumParams,
    pub quantum_correction: bool,
}

impl<'a> EffectivePotential<'a> {
    pub fn classical(base: &'a BasePotential, profile: &'a Profile, d: usize, e_phi: f64) -> Self {
        Self {
            base,
            profile,
            d,
            e_phi,
            params: QuantumParams::default(),
            quantum_correction: false,
        }
    }

    pub fn semiclassical(
        base: &'a BasePotential,
        profile: &'a Profile,
        d: usize,
        e_phi: f64,
        params: QuantumParams,
    ) -> Self {
        Self {
            base,
            profile,
            d,
            e_phi,
            params,
            quantum_correction: true,
        }
    }

    /// The `V_cl` part only.
    pub fn classical_value(&self, x: f64) -> f64 {
        let b = self.profile.value(x);
        self.base.value(x) + self.e_phi / (b * b)
    }

    pub fn classical_grad(&self, x: f64) -> f64 {
        self.base.grad(x) + centrifugal_grad(&self.profile.jet(x), self.e_phi)
    }

    pub fn correction(&self, x: f64) -> f64 {
        delta_v_eff_from_jet(&self.profile.jet(x), self.d, &self.params)
    }

    pub fn correction_grad(&self, x: f64) -> f64 {
        delta_v_eff_grad_from_jet(&self.profile.jet(x), self.d, &self.params)
    }
}

impl Potential1D for EffectivePotential<'_> {
    fn value(&self, x: f64) -> f64 {
        let v = self.classical_value(x);
        if self.quantum_correction {
            v + self.correction(x)
        } else {
            v
        }
    }

    fn grad(&self, x: f64) -> f64 {
        let g = self.classical_grad(x);
        if self.quantum_correction {
            g + self.correction_grad(x)
        } else {
            g
        }
    }

    fn domain(&self) -> (f64, f64) {
        self.profile.domain()
    }
}

//! Warped-product configuration space `ds² = dx² + b(x)² g̃_IJ dφ^I dφ^J`.
//!
//! A [`Profile`] is the warp function `b(x)` on a closed interval, with
//! analytic derivatives up to third order. A [`FiberSpace`] is the compact
//! manifold swept out at each `x`; only its dimension, intrinsic curvature,
//! volume and mode spectrum matter downstream.

use std::f64::consts::PI;

use crate::error::{param, Error, Result};
use crate::spline::CubicSpline;

/// Smallest admissible value of `b` anywhere on the domain.
pub const MIN_WARP: f64 = 1e-8;

/// Samples used when checking positivity of `b` on a domain.
const POSITIVITY_SAMPLES: usize = 4096;

/// `b(x)` together with its first three derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpJet {
    pub b: f64,
    pub db: f64,
    pub d2b: f64,
    pub d3b: f64,
}

impl WarpJet {
    /// `b'/b`
    pub fn log_slope(&self) -> f64 {
        self.db / self.b
    }

    /// `b''/b`
    pub fn curvature_ratio(&self) -> f64 {
        self.d2b / self.b
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    /// `b(x) = b0`
    Constant { b0: f64 },
    /// `b(x) = c·x^p`; the domain must lie in `x > 0`.
    PowerLaw { c: f64, p: f64 },
    /// `b(x) = c·cosh(x/w)`
    Cosh { c: f64, w: f64 },
    /// `b(x) = b0 + a·exp(−(x−x0)²/w²)`
    GaussianBump { b0: f64, a: f64, x0: f64, w: f64 },
    /// `b(x) = c·exp(αx)`
    Exponential { c: f64, alpha: f64 },
    /// Natural cubic spline through samples.
    Tabulated(CubicSpline),
}

/// The warp function on its declared domain `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    kind: ProfileKind,
    lo: f64,
    hi: f64,
}

impl Profile {
    pub fn new(kind: ProfileKind, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Profile(format!(
                "domain [{lo}, {hi}] must be a finite interval with lo < hi"
            )));
        }
        match &kind {
            ProfileKind::Constant { b0 } => positive("profile.b0", *b0)?,
            ProfileKind::PowerLaw { c, p } => {
                positive("profile.c", *c)?;
                finite("profile.p", *p)?;
                if lo <= 0.0 {
                    return Err(Error::Profile(format!(
                        "power-law profile needs a domain in x > 0, got lo = {lo}"
                    )));
                }
            }
            ProfileKind::Cosh { c, w } => {
                positive("profile.c", *c)?;
                positive("profile.w", *w)?;
            }
            ProfileKind::GaussianBump { b0, a, x0, w } => {
                finite("profile.b0", *b0)?;
                finite("profile.a", *a)?;
                finite("profile.x0", *x0)?;
                positive("profile.w", *w)?;
            }
            ProfileKind::Exponential { c, alpha } => {
                positive("profile.c", *c)?;
                finite("profile.alpha", *alpha)?;
            }
            ProfileKind::Tabulated(spline) => {
                if lo < spline.first_knot() || hi > spline.last_knot() {
                    return Err(Error::Profile(format!(
                        "domain [{lo}, {hi}] extends beyond tabulated samples [{}, {}]",
                        spline.first_knot(),
                        spline.last_knot()
                    )));
                }
            }
        }
        let profile = Self { kind, lo, hi };
        profile.check_positive()?;
        Ok(profile)
    }

    pub fn constant(b0: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(ProfileKind::Constant { b0 }, lo, hi)
    }

    pub fn power_law(c: f64, p: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(ProfileKind::PowerLaw { c, p }, lo, hi)
    }

    pub fn cosh(c: f64, w: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(ProfileKind::Cosh { c, w }, lo, hi)
    }

    pub fn gaussian_bump(b0: f64, a: f64, x0: f64, w: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(ProfileKind::GaussianBump { b0, a, x0, w }, lo, hi)
    }

    pub fn exponential(c: f64, alpha: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(ProfileKind::Exponential { c, alpha }, lo, hi)
    }

    pub fn tabulated(x: Vec<f64>, b: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        Self::new(ProfileKind::Tabulated(CubicSpline::natural(x, b)?), lo, hi)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Membership with a few ulps of slack so grid nodes computed as
    /// `lo + i·dx` at the ends are accepted.
    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * (self.hi - self.lo).max(self.lo.abs()).max(self.hi.abs());
        x >= self.lo - slack && x <= self.hi + slack
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `b` and derivatives at `x`, with a domain check.
    pub fn eval(&self, x: f64) -> Result<WarpJet> {
        self.check(x)?;
        Ok(self.jet(x))
    }

    /// `b(x)` with a domain check.
    pub fn b(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.value(x))
    }

    /// `b(x)` without a domain check.
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Tabulated(s) => s.value(x),
            _ => self.jet(x).b,
        }
    }

    /// Analytic `b, b', b'', b'''` at `x` without a domain check.
    pub fn jet(&self, x: f64) -> WarpJet {
        match &self.kind {
            ProfileKind::Constant { b0 } => WarpJet {
                b: *b0,
                db: 0.0,
                d2b: 0.0,
                d3b: 0.0,
            },
            ProfileKind::PowerLaw { c, p } => {
                let (c, p) = (*c, *p);
                WarpJet {
                    b: c * x.powf(p),
                    db: c * p * x.powf(p - 1.0),
                    d2b: c * p * (p - 1.0) * x.powf(p - 2.0),
                    d3b: c * p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
                }
            }
            ProfileKind::Cosh { c, w } => {
                let u = x / w;
                let (ch, sh) = (u.cosh(), u.sinh());
                WarpJet {
                    b: c * ch,
                    db: c * sh / w,
                    d2b: c * ch / (w * w),
                    d3b: c * sh / (w * w * w),
                }
            }
            ProfileKind::GaussianBump { b0, a, x0, w } => {
                let s = (x - x0) / w;
                let g = a * (-s * s).exp();
                WarpJet {
                    b: b0 + g,
                    db: -2.0 * s / w * g,
                    d2b: (4.0 * s * s - 2.0) / (w * w) * g,
                    d3b: (12.0 * s - 8.0 * s * s * s) / (w * w * w) * g,
                }
            }
            ProfileKind::Exponential { c, alpha } => {
                let e = c * (alpha * x).exp();
                WarpJet {
                    b: e,
                    db: alpha * e,
                    d2b: alpha * alpha * e,
                    d3b: alpha * alpha * alpha * e,
                }
            }
            ProfileKind::Tabulated(s) => {
                let [b, db, d2b, d3b] = s.jet(x);
                WarpJet { b, db, d2b, d3b }
            }
        }
    }

    fn check_positive(&self) -> Result<()> {
        let mut probes: Vec<f64> = (0..=POSITIVITY_SAMPLES)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / POSITIVITY_SAMPLES as f64)
            .collect();
        match &self.kind {
            ProfileKind::GaussianBump { x0, .. } if self.contains(*x0) => probes.push(*x0),
            ProfileKind::Tabulated(s) => probes.extend(
                s.knots()
                    .iter()
                    .copied()
                    .filter(|k| *k >= self.lo && *k <= self.hi),
            ),
            _ => {}
        }
        for x in probes {
            let jet = self.jet(x);
            let finite = jet.b.is_finite()
                && jet.db.is_finite()
                && jet.d2b.is_finite()
                && jet.d3b.is_finite();
            if !finite {
                return Err(Error::Profile(format!(
                    "b or a derivative is not finite at x = {x}"
                )));
            }
            if jet.b < MIN_WARP {
                return Err(Error::Profile(format!(
                    "b({x}) = {} falls below {MIN_WARP}; the reduction is undefined where the fiber collapses",
                    jet.b
                )));
            }
        }
        Ok(())
    }
}

/// The discarded compact manifold.
#[derive(Clone, Debug, PartialEq)]
pub enum FiberSpace {
    /// `φ ∈ [0, 2π)` with `g̃ = 1`.
    Circle,
    /// `φ^I ∈ [0, 2π)` with `g̃ = diag(r_1², …, r_d²)`.
    FlatTorus { radii: Vec<f64> },
    /// Unit round sphere `S^d`.
    RoundSphere { d: usize },
}

impl FiberSpace {
    pub fn flat_torus(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Fiber(
                "a flat torus needs at least one radius".into(),
            ));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Fiber(format!("torus radius {r} must be positive")));
        }
        Ok(Self::FlatTorus { radii })
    }

    pub fn round_sphere(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Fiber("sphere dimension must be positive".into()));
        }
        Ok(Self::RoundSphere { d })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Circle => "circle",
            Self::FlatTorus { .. } => "flat torus",
            Self::RoundSphere { .. } => "round sphere",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Circle => 1,
            Self::FlatTorus { radii } => radii.len(),
            Self::RoundSphere { d } => *d,
        }
    }

    /// Ricci scalar `R̃` of the fiber metric.
    pub fn intrinsic_curvature(&self) -> f64 {
        match self {
            Self::Circle | Self::FlatTorus { .. } => 0.0,
            Self::RoundSphere { d } => (*d as f64) * (*d as f64 - 1.0),
        }
    }

    /// Volume of the fiber in its own metric `g̃`.
    pub fn volume(&self) -> f64 {
        match self {
            Self::Circle => 2.0 * PI,
            Self::FlatTorus { radii } => radii.iter().map(|r| 2.0 * PI * r).product(),
            Self::RoundSphere { d } => unit_sphere_area(*d),
        }
    }

    /// Diagonal of `g̃` in the angle coordinates, for fibers with
    /// coordinate geodesics (circle and flat torus).
    pub fn coordinate_metric(&self) -> Option<Vec<f64>> {
        match self {
            Self::Circle => Some(vec![1.0]),
            Self::FlatTorus { radii } => Some(radii.iter().map(|r| r * r).collect()),
            Self::RoundSphere { .. } => None,
        }
    }
}

/// Area of the unit sphere `S^d ⊂ R^{d+1}`.
fn unit_sphere_area(d: usize) -> f64 {
    // S_0 = 2, S_1 = 2π, S_d = 2π S_{d-2} / (d-1)
    let (mut area, start) = if d.is_multiple_of(2) {
        (2.0, 0)
    } else {
        (2.0 * PI, 1)
    };
    let mut k = start;
    while k < d {
        k += 2;
        area *= 2.0 * PI / (k as f64 - 1.0);
    }
    area
}

/// Physical constants of the quantum particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumParams {
    pub hbar: f64,
    pub mass: f64,
    /// Curvature coupling of the `ξR` term.
    pub xi: f64,
}

impl QuantumParams {
    pub fn new(hbar: f64, mass: f64, xi: f64) -> Result<Self> {
        positive("params.hbar", hbar)?;
        positive("params.mass", mass)?;
        finite("params.xi", xi)?;
        Ok(Self { hbar, mass, xi })
    }

    /// `ħ²/2m`
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

impl Default for QuantumParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            xi: 0.0,
        }
    }
}

/// Ricci scalar of the full `d+1` dimensional space at `x`.
pub fn ricci_scalar(profile: &Profile, fiber: &FiberSpace, x: f64) -> Result<f64> {
    let jet = profile.eval(x)?;
    Ok(ricci_from_jet(
        &jet,
        fiber.dim(),
        fiber.intrinsic_curvature(),
    ))
}

pub(crate) fn ricci_from_jet(jet: &WarpJet, d: usize, fiber_curvature: f64) -> f64 {
    let d = d as f64;
    let u = jet.log_slope();
    d * (1.0 - d) * u * u - 2.0 * d * jet.curvature_ratio() + fiber_curvature / (jet.b * jet.b)
}

/// Log of the number of fiber cells of linear size `cell` at `x`.
pub fn entropy(profile: &Profile, fiber: &FiberSpace, x: f64, cell: f64) -> Result<f64> {
    positive("cell", cell)?;
    let b = profile.b(x)?;
    let d = fiber.dim() as f64;
    Ok(d * b.ln() + fiber.volume().ln() - d * cell.ln())
}

/// `(S', S'')` of the entropy; neither depends on the cell size.
pub fn entropy_derivatives(profile: &Profile, fiber: &FiberSpace, x: f64) -> Result<(f64, f64)> {
    let jet = profile.eval(x)?;
    let d = fiber.dim() as f64;
    let u = jet.log_slope();
    Ok((d * u, d * (jet.curvature_ratio() - u * u)))
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(param(
            name,
            format!("must be a positive finite number, got {v}"),
        ))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(param(name, format!("must be finite, got {v}")))
    }
}

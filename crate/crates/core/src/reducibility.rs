//! Decide from samples whether a metric admits the single-parameter reduction.
//!
//! A metric on `x × fiber` reduces to one degree of freedom exactly when its
//! inverse fiber block factorizes as `g^{IJ}(x, φ) = β(x) g^{IJ}(x₀, φ)`; the
//! warp is then `b = β^{−1/2}` (relative to the reference slice). A base
//! potential is compatible when it splits as `V_x(x) + V_φ(φ)/b(x)²`.
//!
//! Inputs are assumed to already be in adapted coordinates with `g^{xx} = 1`.

use std::io::Read;

use nalgebra::{DMatrix, DVector};

use crate::error::{param, Error, Result};
use crate::geometry::{FiberSpace, Profile};

pub const DEFAULT_THRESHOLD: f64 = 1e-8;

// reference entries smaller than this are skipped by the ratio estimator
const REFERENCE_FLOOR: f64 = 1e-12;

/// Inverse fiber metric `g^{IJ}` sampled on `x_nodes × φ nodes`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFiberMetric {
    x_nodes: Vec<f64>,
    n_phi: usize,
    d: usize,
    // row-major over (x, φ)
    ginv: Vec<DMatrix<f64>>,
    v0: Option<Vec<f64>>,
}

impl SampledFiberMetric {
    /// `ginv[ix * n_phi + j]` is the `d × d` matrix at `(x_nodes[ix], φ_j)`;
    /// `v0`, when given, uses the same layout.
    pub fn new(
        x_nodes: Vec<f64>,
        n_phi: usize,
        ginv: Vec<DMatrix<f64>>,
        v0: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n_x = x_nodes.len();
        if n_x < 3 || n_phi < 2 {
            return Err(Error::Insufficient(format!(
                "need at least 3 x nodes and 2 phi nodes, got {n_x} and {n_phi}"
            )));
        }
        if ginv.len() != n_x * n_phi {
            return Err(Error::Mismatch(format!(
                "{} metric samples for a {n_x} x {n_phi} grid",
                ginv.len()
            )));
        }
        let d = ginv[0].nrows();
        for (k, g) in ginv.iter().enumerate() {
            let (ix, j) = (k / n_phi, k % n_phi);
            if g.nrows() != d || g.ncols() != d {
                return Err(Error::Mismatch(format!(
                    "sample (x {ix}, phi {j}) is {}x{}, expected {d}x{d}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            let scale = g.amax();
            if (g - g.transpose()).amax() > 1e-12 * scale {
                return Err(Error::Insufficient(format!(
                    "sample (x {ix}, phi {j}) is not symmetric"
                )));
            }
            if g.iter().any(|v| !v.is_finite()) || g.clone().cholesky().is_none() {
                return Err(Error::Insufficient(format!(
                    "sample (x {ix}, phi {j}) is not positive definite"
                )));
            }
        }
        if let Some(v) = &v0 {
            if v.len() != n_x * n_phi {
                return Err(Error::Mismatch(format!(
                    "{} potential samples for a {n_x} x {n_phi} grid",
                    v.len()
                )));
            }
        }
        Ok(Self {
            x_nodes,
            n_phi,
            d,
            ginv,
            v0,
        })
    }

    /// Samples of `g^{IJ} = g̃^{IJ}(φ) / b(x)²` from a profile and a set of
    /// fiber inverse metrics, one per φ node.
    pub fn warped(
        profile: &Profile,
        x_nodes: Vec<f64>,
        fiber_ginv: &[DMatrix<f64>],
    ) -> Result<Self> {
        let mut ginv = Vec::with_capacity(x_nodes.len() * fiber_ginv.len());
        for &x in &x_nodes {
            let b = profile.b(x)?;
            for g in fiber_ginv {
                ginv.push(g / (b * b));
            }
        }
        Self::new(x_nodes, fiber_ginv.len(), ginv, None)
    }

    /// Inverse metric of `profile × fiber` in angle coordinates, repeated on
    /// `n_phi` fiber nodes.
    pub fn from_geometry(
        profile: &Profile,
        fiber: &FiberSpace,
        x_nodes: Vec<f64>,
        n_phi: usize,
    ) -> Result<Self> {
        let diag = fiber.coordinate_metric().ok_or_else(|| {
            Error::Unsupported(format!("{} has no global angle coordinates", fiber.name()))
        })?;
        let inv = DMatrix::from_diagonal(&DVector::from_iterator(
            diag.len(),
            diag.iter().map(|g| 1.0 / g),
        ));
        Self::warped(profile, x_nodes, &vec![inv; n_phi])
    }

    /// Parse `x_index,phi_index,I,J,value` rows. Only `I ≤ J` is required;
    /// a mirrored entry, if present, must agree. Rows with `I = J = v0`
    /// carry potential samples. x nodes are labelled by their index.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let expected = ["x_index", "phi_index", "I", "J", "value"];
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Insufficient(format!(
                "metric CSV header must be {}, got {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut metric = Vec::new();
        let mut potential = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let at = |k: usize| rec.get(k).unwrap_or("");
            let bad = |what: &str| Error::Insufficient(format!("row {}: bad {what}", line + 2));
            let ix: usize = at(0).parse().map_err(|_| bad("x_index"))?;
            let j: usize = at(1).parse().map_err(|_| bad("phi_index"))?;
            let value: f64 = at(4).parse().map_err(|_| bad("value"))?;
            if at(2) == "v0" && at(3) == "v0" {
                potential.push((ix, j, value));
                continue;
            }
            let a: usize = at(2).parse().map_err(|_| bad("I"))?;
            let b: usize = at(3).parse().map_err(|_| bad("J"))?;
            metric.push((ix, j, a.min(b), a.max(b), value));
        }
        if metric.is_empty() {
            return Err(Error::Insufficient("metric CSV has no entries".into()));
        }
        let n_x = metric.iter().map(|e| e.0).max().unwrap_or(0) + 1;
        let n_phi = metric.iter().map(|e| e.1).max().unwrap_or(0) + 1;
        let d = metric.iter().map(|e| e.3).max().unwrap_or(0) + 1;
        let mut ginv = vec![DMatrix::from_element(d, d, f64::NAN); n_x * n_phi];
        for (ix, j, a, b, v) in metric {
            let g = &mut ginv[ix * n_phi + j];
            if !g[(a, b)].is_nan() && g[(a, b)] != v {
                return Err(Error::Insufficient(format!(
                    "conflicting entries for ({a},{b}) at x {ix}, phi {j}"
                )));
            }
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
        if let Some(k) = ginv.iter().position(|g| g.iter().any(|v| v.is_nan())) {
            return Err(Error::Insufficient(format!(
                "missing metric entries at x {}, phi {}",
                k / n_phi,
                k % n_phi
            )));
        }
        let v0 = if potential.is_empty() {
            None
        } else {
            let mut v = vec![f64::NAN; n_x * n_phi];
            for (ix, j, value) in potential {
                if ix >= n_x || j >= n_phi {
                    return Err(Error::Insufficient(format!(
                        "v0 row outside the grid at x {ix}, phi {j}"
                    )));
                }
                v[ix * n_phi + j] = value;
            }
            if let Some(k) = v.iter().position(|v| v.is_nan()) {
                return Err(Error::Insufficient(format!(
                    "missing v0 sample at x {}, phi {}",
                    k / n_phi,
                    k % n_phi
                )));
            }
            Some(v)
        };
        Self::new((0..n_x).map(|i| i as f64).collect(), n_phi, ginv, v0)
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn n_x(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ginv(&self, ix: usize, j: usize) -> &DMatrix<f64> {
        &self.ginv[ix * self.n_phi + j]
    }

    pub fn v0(&self) -> Option<&[f64]> {
        self.v0.as_deref()
    }

    pub fn with_potential(mut self, v0: Vec<f64>) -> Result<Self> {
        if v0.len() != self.ginv.len() {
            return Err(Error::Mismatch(format!(
                "{} potential samples for {} metric samples",
                v0.len(),
                self.ginv.len()
            )));
        }
        self.v0 = Some(v0);
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSplit {
    pub v_x: Vec<f64>,
    /// Gauge-fixed to zero sum.
    pub v_phi: Vec<f64>,
    /// Largest absolute misfit of `V_x + V_φ/b²` against the samples.
    pub residual: f64,
    pub separable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducibilityVerdict {
    pub reducible: bool,
    /// Normalized so that `β(x₀) = 1`.
    pub beta: Vec<f64>,
    pub b: Vec<f64>,
    /// Largest relative deviation of any ratio from `β(x)`.
    pub residual: f64,
    pub potential_split: Option<PotentialSplit>,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold > 0.0 {
        Ok(())
    } else {
        Err(param(
            "threshold",
            format!("must be positive, got {threshold}"),
        ))
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Estimate `β(x)` against the slice at `x0_index` and test the factorization.
/// When the metric carries potential samples and factorizes, the potential
/// split is attempted at the same threshold.
pub fn check_factorization(
    m: &SampledFiberMetric,
    x0_index: usize,
    threshold: f64,
) -> Result<ReducibilityVerdict> {
    check_threshold(threshold)?;
    if x0_index >= m.n_x() {
        return Err(param(
            "x0_index",
            format!("{x0_index} is outside 0..{}", m.n_x()),
        ));
    }
    // reference entries that take part in the estimator, per φ node
    let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
    for j in 0..m.n_phi() {
        let reference = m.ginv(x0_index, j);
        let before = entries.len();
        for a in 0..m.dim() {
            for b in a..m.dim() {
                let r = reference[(a, b)];
                if r.abs() > REFERENCE_FLOOR {
                    entries.push((j, a, b, r));
                }
            }
        }
        if entries.len() == before {
            return Err(Error::DegenerateReference { phi: j });
        }
    }

    let mut beta = Vec::with_capacity(m.n_x());
    let mut residual: f64 = 0.0;
    let mut ratios = vec![0.0; entries.len()];
    for ix in 0..m.n_x() {
        for (slot, &(j, a, b, r)) in ratios.iter_mut().zip(&entries) {
            *slot = m.ginv(ix, j)[(a, b)] / r;
        }
        let bx = median(&mut ratios);
        let dev = ratios
            .iter()
            .map(|q| (q - bx).abs() / bx.abs())
            .fold(0.0, f64::max);
        residual = residual.max(dev);
        beta.push(bx);
    }
    let reducible = residual <= threshold && beta.iter().all(|&v| v > 0.0);
    let b: Vec<f64> = beta.iter().map(|v| v.abs().sqrt().recip()).collect();
    let potential_split = match (reducible, m.v0()) {
        (true, Some(v0)) => Some(split_potential(v0, m.n_x(), m.n_phi(), &b, threshold)?),
        _ => None,
    };
    Ok(ReducibilityVerdict {
        reducible,
        beta,
        b,
        residual,
        potential_split,
    })
}

/// Least-squares fit of `V₀(x_i, φ_j) ≈ V_x(x_i) + V_φ(φ_j)/b_i²` with the
/// gauge `Σ_j V_φ(φ_j) = 0`. `v0` is row-major over `(x, φ)`.
pub fn split_potential(
    v0: &[f64],
    n_x: usize,
    n_phi: usize,
    b: &[f64],
    threshold: f64,
) -> Result<PotentialSplit> {
    check_threshold(threshold)?;
    let unknowns = n_x + n_phi;
    let samples = n_x * n_phi;
    if unknowns > samples {
        return Err(Error::Underdetermined { unknowns, samples });
    }
    if v0.len() != samples || b.len() != n_x {
        return Err(Error::Mismatch(format!(
            "{} potential samples and {} warp values for a {n_x} x {n_phi} grid",
            v0.len(),
            b.len()
        )));
    }
    if b.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(param("b", "warp values must be positive"));
    }
    let inv_b2: Vec<f64> = b.iter().map(|v| 1.0 / (v * v)).collect();
    // Normal equations in closed form. The model has a one-dimensional null
    // space (V_x − c/b², V_φ + c); under the zero-sum gauge the V_x equations
    // give row means, and the V_φ equations a w-weighted projection of the
    // row-centred samples (which already sums to zero over φ).
    let row = |i: usize| &v0[i * n_phi..(i + 1) * n_phi];
    let v_x: Vec<f64> = (0..n_x)
        .map(|i| row(i).iter().sum::<f64>() / n_phi as f64)
        .collect();
    let ww: f64 = inv_b2.iter().map(|w| w * w).sum();
    let v_phi: Vec<f64> = (0..n_phi)
        .map(|j| {
            (0..n_x)
                .map(|i| inv_b2[i] * (row(i)[j] - v_x[i]))
                .sum::<f64>()
                / ww
        })
        .collect();
    let mut residual: f64 = 0.0;
    for i in 0..n_x {
        for j in 0..n_phi {
            let model = v_x[i] + v_phi[j] * inv_b2[i];
            residual = residual.max((model - v0[i * n_phi + j]).abs());
        }
    }
    Ok(PotentialSplit {
        v_x,
        v_phi,
        residual,
        separable: residual <= threshold,
    })
}

//! Scalar-sequence primitives: differences, `Q_n`, Hankel matrices and the
//! truncated PD / CPD / Stieltjes tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::psd_verdict_real;
use crate::tol::ToleranceConfig;
use crate::verdict::{Verdict, Witness};
use crate::RMat;

/// Truncation used when a sequence is given by a rule instead of a list.
pub const DEFAULT_TRUNCATION: usize = 24;

/// Finite truncation `γ₀,…,γ_N` of a real sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealSequence {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for RealSequence {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        RealSequence::new(values)
    }
}

impl From<RealSequence> for Vec<f64> {
    fn from(s: RealSequence) -> Self {
        s.values
    }
}

impl RealSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Length { needed: 1, got: 0 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sequence value at index {i} is not finite"
            )));
        }
        Ok(RealSequence { values })
    }

    /// `γ_n = rule(n)` for `n = 0..=truncation`.
    pub fn from_fn(truncation: usize, rule: impl Fn(usize) -> f64) -> Result<Self> {
        RealSequence::new((0..=truncation).map(rule).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The truncation index `N` (last available subscript).
    pub fn truncation(&self) -> usize {
        self.values.len() - 1
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    /// `{θⁿ γ_n}`.
    pub fn scaled(&self, theta: f64) -> Result<Self> {
        let mut p = 1.0;
        let mut out = Vec::with_capacity(self.len());
        for &v in &self.values {
            out.push(p * v);
            p *= theta;
        }
        RealSequence::new(out)
    }

    /// Entrywise (Schur) product, truncated to the shorter length.
    pub fn hadamard(&self, other: &RealSequence) -> Result<Self> {
        RealSequence::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        RealSequence::new(self.values.iter().map(|&v| f(v)).collect())
    }

    fn require_truncation(&self, min_n: usize) -> Result<()> {
        if self.truncation() < min_n {
            Err(Error::Length {
                needed: min_n + 1,
                got: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// `Δᵏγ`, with `(Δγ)_n = γ_{n+1} − γ_n`.
pub fn difference(seq: &RealSequence, k: usize) -> Result<RealSequence> {
    if k > seq.truncation() {
        return Err(Error::Length {
            needed: k + 1,
            got: seq.len(),
        });
    }
    let mut v = seq.values.clone();
    for _ in 0..k {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    RealSequence::new(v)
}

/// `Q_n(x) = Σ_{j=0}^{n-2} (n−j−1) xʲ = (xⁿ − 1 − n(x−1)) / (x−1)²`.
///
/// The polynomial sum is used near the removable singularity `x = 1`.
pub fn q_poly(n: usize, x: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if (x - 1.0).abs() < 1e-4 {
        // Horner on coefficients n-1, n-2, …, 1 (ascending powers).
        (0..=n - 2).rev().fold(0.0, |acc, j| acc * x + (n - j - 1) as f64)
    } else {
        let d = x - 1.0;
        (x.powi(n as i32) - 1.0 - n as f64 * d) / (d * d)
    }
}

/// Largest Hankel matrix `H_ij = γ_{i+j+shift}` fitting the truncation.
pub fn hankel(seq: &RealSequence, shift: usize) -> Result<RMat> {
    let n = seq.truncation();
    if n < shift {
        return Err(Error::Length {
            needed: shift + 1,
            got: seq.len(),
        });
    }
    let m = (n - shift) / 2 + 1;
    Ok(RMat::from_fn(m, m, |i, j| seq.values[i + j + shift]))
}

/// Square Hankel matrix of a prescribed size.
pub fn hankel_sized(seq: &RealSequence, shift: usize, size: usize) -> Result<RMat> {
    let needed = 2 * size.saturating_sub(1) + shift + 1;
    if seq.len() < needed {
        return Err(Error::Length {
            needed,
            got: seq.len(),
        });
    }
    Ok(RMat::from_fn(size, size, |i, j| seq.values[i + j + shift]))
}

/// `(m+1)×m` matrix with columns `e_i − e_{i+1}`; `BᵀHB = Hankel(Δ²γ)`.
pub fn difference_basis(m: usize) -> RMat {
    RMat::from_fn(m + 1, m, |r, col| {
        if r == col {
            1.0
        } else if r == col + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Truncated PD test: the shift-0 Hankel matrix is PSD within `psd_tol`.
/// Necessary for genuine positive definiteness, never sufficient.
pub fn is_pd_truncated(seq: &RealSequence, cfg: &ToleranceConfig) -> Result<Verdict> {
    seq.require_truncation(2)?;
    Ok(psd_verdict_real(&hankel(seq, 0)?, cfg.psd_tol))
}

/// Truncated CPD test: `Hankel(Δ²γ)` is PSD. A failing eigenvector `v` is
/// reported as the zero-sum coefficient vector `λ = Bv` of the original
/// quadratic form.
pub fn is_cpd_truncated(seq: &RealSequence, cfg: &ToleranceConfig) -> Result<Verdict> {
    seq.require_truncation(2)?;
    let d2 = difference(seq, 2)?;
    let h = hankel(&d2, 0)?;
    let verdict = psd_verdict_real(&h, cfg.psd_tol);
    Ok(match verdict.witness {
        Some(Witness::QuadraticForm {
            coefficients,
            value,
        }) => {
            let b = difference_basis(coefficients.len());
            let lambda = &b * nalgebra::DVector::from_vec(coefficients);
            Verdict::fails(Witness::QuadraticForm {
                coefficients: lambda.iter().copied().collect(),
                value,
            })
            .with_note("zero-sum form negative; value is the Rayleigh quotient of Hankel(Δ²γ)")
        }
        _ => verdict,
    })
}

/// Truncated Stieltjes test: shift-0 and shift-1 Hankel matrices both PSD.
pub fn is_stieltjes_truncated(seq: &RealSequence, cfg: &ToleranceConfig) -> Result<Verdict> {
    seq.require_truncation(3)?;
    let h0 = psd_verdict_real(&hankel(seq, 0)?, cfg.psd_tol);
    if h0.is_fail() {
        return Ok(h0.with_note("shift-0 Hankel indefinite"));
    }
    let h1 = psd_verdict_real(&hankel(seq, 1)?, cfg.psd_tol);
    if h1.is_fail() {
        return Ok(h1.with_note("shift-1 Hankel indefinite"));
    }
    Ok(Verdict::holds())
}

/// Samples the exponential characterization: `γ` is CPD iff `{e^{tγ_n}}` is PD
/// for every `t > 0`. A pass only covers the sampled `t`; a failure at any `t`
/// refutes CPD at this truncation.
pub fn schoenberg_probe(seq: &RealSequence, ts: &[f64], cfg: &ToleranceConfig) -> Result<Verdict> {
    seq.require_truncation(2)?;
    if let Some(t) = ts.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "Schoenberg parameter must be positive, got {t}"
        )));
    }
    let mut pending = None;
    for &t in ts {
        let exp: Vec<f64> = seq.values.iter().map(|g| (t * g).exp()).collect();
        if exp.iter().any(|v| !v.is_finite()) {
            pending.get_or_insert_with(|| {
                Verdict::inconclusive(format!("e^(tγ) overflows at t = {t}"))
            });
            continue;
        }
        let v = is_pd_truncated(&RealSequence::new(exp)?, cfg)?;
        if let Some(w) = v.witness.clone().filter(|_| v.is_fail()) {
            return Ok(Verdict::fails(Witness::Parameter {
                name: "t".into(),
                value: t,
                inner: Box::new(w),
            }));
        }
    }
    Ok(pending.unwrap_or_else(|| {
        Verdict::holds().with_note(format!("PD of e^(tγ) at {} sampled t", ts.len()))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateQuality {
    /// Finite-window surrogate of an asymptotic quantity.
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub value: f64,
    pub quality: EstimateQuality,
}

/// `max |γ_n|^{1/n}` over the upper half of the window; a stand-in for
/// `limsup |γ_n|^{1/n}`.
pub fn growth_rate(seq: &RealSequence) -> Result<GrowthEstimate> {
    seq.require_truncation(4)?;
    let n = seq.truncation();
    let start = n.div_ceil(2).max(1);
    let value = (start..=n)
        .map(|k| seq.values[k].abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    Ok(GrowthEstimate {
        value,
        quality: EstimateQuality::Estimate,
    })
}

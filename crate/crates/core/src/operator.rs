//! Operators, the hereditary calculus `p⟨T⟩ = Σ αᵢ T*ⁱTⁱ`, brackets `B_m(T)`,
//! trajectories and operator-level class tests.
//!
//! Dense operators are plain complex matrices. Banded operators (weighted
//! shifts and the class-Q blocks) are lower-banded infinite matrices that are
//! only ever applied to finitely supported vectors, so every windowed quantity
//! is exact. A banded computation of degree `k` on a window of `L` slots
//! returns the leading `L − k·bandwidth` block and refuses smaller windows.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, eigenvalues, herm_eigen, identity, kron, psd_verdict, spectral_norm};
use crate::polynomial::Polynomial;
use crate::seq::{is_cpd_truncated, is_stieltjes_truncated, RealSequence};
use crate::tol::ToleranceConfig;
use crate::verdict::{Status, Verdict, Witness};
use crate::{CMat, C64};

/// Weight families of unilateral weighted shifts `T eₙ = λₙ eₙ₊₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightRule {
    /// `λₙ = value`.
    Constant { value: f64 },
    /// `λ₀ = √a`, `λₙ = √((1 + n(b−1)) / (1 + (n−1)(b−1)))` for `n ≥ 1`.
    Wab { a: f64, b: f64 },
    /// `λₙ = √((n + num_offset) / (n + den_offset))`.
    RatioSqrt { num_offset: f64, den_offset: f64 },
    /// Listed weights followed by a constant tail.
    Explicit { head: Vec<f64>, tail: f64 },
}

impl WeightRule {
    pub fn weight(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            WeightRule::Constant { value } => *value,
            WeightRule::Wab { a, b } => {
                if n == 0 {
                    a.sqrt()
                } else {
                    ((1.0 + nf * (b - 1.0)) / (1.0 + (nf - 1.0) * (b - 1.0))).sqrt()
                }
            }
            WeightRule::RatioSqrt {
                num_offset,
                den_offset,
            } => ((nf + num_offset) / (nf + den_offset)).sqrt(),
            WeightRule::Explicit { head, tail } => head.get(n).copied().unwrap_or(*tail),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match self {
            WeightRule::Constant { value } => ok(*value),
            WeightRule::Wab { a, b } => ok(*a) && b.is_finite() && *b >= 1.0,
            WeightRule::RatioSqrt {
                num_offset,
                den_offset,
            } => ok(*num_offset) && ok(*den_offset),
            WeightRule::Explicit { head, tail } => head.iter().all(|&w| ok(w)) && ok(*tail),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "weights must be finite and positive: {self:?}"
            )))
        }
    }
}

/// Unilateral weighted shift with an exactly evaluated weight rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedShift {
    pub rule: WeightRule,
}

impl WeightedShift {
    pub fn new(rule: WeightRule) -> Result<Self> {
        rule.validate()?;
        Ok(WeightedShift { rule })
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.rule.weight(n)
    }

    pub fn weights(&self, count: usize) -> Vec<f64> {
        (0..count).map(|n| self.weight(n)).collect()
    }
}

pub type EntryRule = Arc<dyn Fn(usize, usize) -> C64 + Send + Sync>;

/// Lower-banded operator: `entry(i, j)` is read only for `j ≤ i ≤ j + bandwidth`.
#[derive(Clone)]
pub struct BandedOperator {
    pub bandwidth: usize,
    pub label: String,
    pub entry: EntryRule,
}

impl fmt::Debug for BandedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandedOperator")
            .field("bandwidth", &self.bandwidth)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum LinearOperator {
    Dense(CMat),
    Shift(WeightedShift),
    Banded(BandedOperator),
}

/// Finitely supported vector in canonical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeVector {
    pub coeffs: Vec<C64>,
}

impl ProbeVector {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("probe has non-finite entries".into()));
        }
        Ok(ProbeVector { coeffs })
    }

    pub fn basis(index: usize) -> Self {
        let mut coeffs = vec![c(0.0); index + 1];
        coeffs[index] = c(1.0);
        ProbeVector { coeffs }
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        ProbeVector::new(values.iter().map(|&v| c(v)).collect())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    // ⟨a, b⟩ linear in the first argument.
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

impl LinearOperator {
    pub fn dense(m: CMat) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "dense operator must be square and nonempty, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("dense operator has non-finite entries".into()));
        }
        Ok(LinearOperator::Dense(m))
    }

    /// Dense operator from real row-major entries.
    pub fn dense_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows must form a square matrix".into()));
        }
        LinearOperator::dense(CMat::from_fn(n, n, |i, j| c(rows[i][j])))
    }

    pub fn shift(rule: WeightRule) -> Result<Self> {
        Ok(LinearOperator::Shift(WeightedShift::new(rule)?))
    }

    pub fn banded(
        bandwidth: usize,
        label: impl Into<String>,
        entry: impl Fn(usize, usize) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if bandwidth == 0 {
            return Err(Error::InvalidInput("bandwidth must be positive".into()));
        }
        Ok(LinearOperator::Banded(BandedOperator {
            bandwidth,
            label: label.into(),
            entry: Arc::new(entry),
        }))
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, LinearOperator::Dense(_))
    }

    pub fn as_dense(&self) -> Option<&CMat> {
        match self {
            LinearOperator::Dense(m) => Some(m),
            _ => None,
        }
    }

    /// Dimension of a dense operator; `None` for banded ones.
    pub fn dim(&self) -> Option<usize> {
        self.as_dense().map(|m| m.nrows())
    }

    /// Slots consumed per application; 0 for dense operators.
    pub fn bandwidth(&self) -> usize {
        match self {
            LinearOperator::Dense(_) => 0,
            LinearOperator::Shift(_) => 1,
            LinearOperator::Banded(b) => b.bandwidth,
        }
    }

    pub fn label(&self) -> String {
        match self {
            LinearOperator::Dense(m) => format!("dense {}×{}", m.nrows(), m.ncols()),
            LinearOperator::Shift(s) => format!("weighted shift {:?}", s.rule),
            LinearOperator::Banded(b) => b.label.clone(),
        }
    }

    /// Matrix entry `⟨T e_j, e_i⟩`.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match self {
            LinearOperator::Dense(m) => m[(i, j)],
            LinearOperator::Shift(s) => {
                if i == j + 1 {
                    c(s.weight(j))
                } else {
                    c(0.0)
                }
            }
            LinearOperator::Banded(b) => {
                if i >= j && i <= j + b.bandwidth {
                    (b.entry)(i, j)
                } else {
                    c(0.0)
                }
            }
        }
    }

    /// `T v`. Banded outputs are `bandwidth` slots longer than the input, so
    /// no mass is ever lost.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            LinearOperator::Dense(m) => {
                let d = m.nrows();
                (0..d)
                    .map(|i| {
                        v.iter()
                            .take(d)
                            .enumerate()
                            .map(|(j, x)| m[(i, j)] * x)
                            .sum()
                    })
                    .collect()
            }
            LinearOperator::Shift(s) => {
                let mut out = vec![c(0.0); v.len() + 1];
                for (n, x) in v.iter().enumerate() {
                    out[n + 1] = x * s.weight(n);
                }
                out
            }
            LinearOperator::Banded(b) => {
                let mut out = vec![c(0.0); v.len() + b.bandwidth];
                for (j, x) in v.iter().enumerate() {
                    if *x == c(0.0) {
                        continue;
                    }
                    for (i, o) in out.iter_mut().enumerate().skip(j).take(b.bandwidth + 1) {
                        *o += (b.entry)(i, j) * x;
                    }
                }
                out
            }
        }
    }

    /// Leading `size × size` section of the matrix (the whole matrix for
    /// dense operators).
    pub fn window_matrix(&self, size: usize) -> CMat {
        match self {
            LinearOperator::Dense(m) => m.clone(),
            _ => CMat::from_fn(size, size, |i, j| self.entry(i, j)),
        }
    }

    /// Size of the exact block left after `degree` applications on a window.
    pub fn block_size(&self, window: usize, degree: usize) -> Result<usize> {
        match self {
            LinearOperator::Dense(m) => Ok(m.nrows()),
            _ => {
                let needed = degree * self.bandwidth() + 1;
                if window < needed {
                    Err(Error::WindowTooSmall { window, needed })
                } else {
                    Ok(window - degree * self.bandwidth())
                }
            }
        }
    }

    /// `T*ᵏTᵏ` for `k = 0..=upto`, exact on the returned block.
    pub fn grams(&self, upto: usize, window: usize) -> Result<Vec<CMat>> {
        if let LinearOperator::Dense(t) = self {
            let mut out = Vec::with_capacity(upto + 1);
            let mut g = identity(t.nrows());
            out.push(g.clone());
            for _ in 0..upto {
                g = t.adjoint() * &g * t;
                out.push(g.clone());
            }
            return Ok(out);
        }
        let k = self.block_size(window, upto)?;
        let mut orbits: Vec<Vec<Vec<C64>>> = Vec::with_capacity(k);
        for j in 0..k {
            let mut v = vec![c(0.0); j + 1];
            v[j] = c(1.0);
            let mut orbit = Vec::with_capacity(upto + 1);
            orbit.push(v.clone());
            for _ in 0..upto {
                v = self.apply(&v);
                orbit.push(v.clone());
            }
            orbits.push(orbit);
        }
        Ok((0..=upto)
            .map(|p| CMat::from_fn(k, k, |i, j| inner(&orbits[j][p], &orbits[i][p])))
            .collect())
    }

    /// `‖T‖`: exact for dense operators, the norm of the exactly known columns
    /// of the window for banded ones (the supremum of weights for shifts).
    pub fn norm(&self, window: usize) -> Result<f64> {
        match self {
            LinearOperator::Dense(m) => Ok(spectral_norm(m)),
            LinearOperator::Shift(s) => {
                let cols = self.block_size(window, 1)?;
                Ok(s.weights(cols).into_iter().fold(0.0, f64::max))
            }
            LinearOperator::Banded(_) => {
                let cols = self.block_size(window, 1)?;
                let m = CMat::from_fn(window, cols, |i, j| self.entry(i, j));
                Ok(spectral_norm(&m))
            }
        }
    }

    /// `Tⁱ`.
    pub fn power(&self, i: usize) -> Result<LinearOperator> {
        if i == 0 {
            return Err(Error::InvalidInput("power must be positive".into()));
        }
        match self {
            LinearOperator::Dense(m) => LinearOperator::dense(m.pow(i as u32)),
            _ => {
                let base = self.clone();
                let band = self.bandwidth() * i;
                LinearOperator::banded(band, format!("({})^{i}", self.label()), move |r, col| {
                    let mut v = vec![c(0.0); col + 1];
                    v[col] = c(1.0);
                    for _ in 0..i {
                        v = base.apply(&v);
                    }
                    v.get(r).copied().unwrap_or(c(0.0))
                })
            }
        }
    }
}

/// `p⟨T⟩ = Σ αᵢ T*ⁱTⁱ` on the exact block of the window.
pub fn hereditary_eval(p: &Polynomial, t: &LinearOperator, window: usize) -> Result<CMat> {
    let grams = t.grams(p.degree(), window)?;
    let mut out = CMat::zeros(grams[0].nrows(), grams[0].ncols());
    for (alpha, g) in p.coeffs().iter().zip(&grams) {
        out += g * *alpha;
    }
    Ok(out)
}

/// `B_m(T) = Σ (−1)ᵏ C(m,k) T*ᵏTᵏ`.
pub fn bracket_bm(t: &LinearOperator, m: usize, window: usize) -> Result<CMat> {
    hereditary_eval(&Polynomial::one_minus_x_pow(m), t, window)
}

/// `B_m(T)·T` on the block where both factors are exact.
pub fn bracket_times_t(t: &LinearOperator, m: usize, window: usize) -> Result<CMat> {
    let b = bracket_bm(t, m, window)?;
    let k = b.nrows();
    let cols = match t {
        LinearOperator::Dense(_) => k,
        _ => k.checked_sub(t.bandwidth()).filter(|&c| c > 0).ok_or(
            Error::WindowTooSmall {
                window,
                needed: (m + 1) * t.bandwidth() + 1,
            },
        )?,
    };
    let tm = CMat::from_fn(k, cols, |i, j| t.entry(i, j));
    let prod = b * tm;
    Ok(prod.view((0, 0), (cols, cols)).into_owned())
}

fn isometry_scale(t: &LinearOperator, m: usize, window: usize) -> Result<f64> {
    Ok(t.norm(window)?.powi(2 * m as i32).max(1.0))
}

/// `B_m(T) = 0` within `psd_tol·max(1, ‖T‖^{2m})`; `strict` also requires
/// `B_{m−1}(T) ≠ 0`.
pub fn is_m_isometry(
    t: &LinearOperator,
    m: usize,
    window: usize,
    strict: bool,
    cfg: &ToleranceConfig,
) -> Result<Verdict> {
    cfg.validate()?;
    let tol = cfg.psd_tol * isometry_scale(t, m, window)?;
    let norm = spectral_norm(&bracket_bm(t, m, window)?);
    if norm > tol {
        return Ok(Verdict::fails(Witness::Inequality {
            description: format!("‖B_{m}(T)‖ <= tolerance"),
            lhs: norm,
            rhs: tol,
        }));
    }
    if strict && m > 0 {
        let lower = spectral_norm(&bracket_bm(t, m - 1, window)?);
        let lower_tol = cfg.psd_tol * isometry_scale(t, m - 1, window)?;
        if lower <= lower_tol {
            return Ok(Verdict::fails(Witness::Inequality {
                description: format!("‖B_{}(T)‖ > tolerance (strictness)", m - 1),
                lhs: lower_tol,
                rhs: lower,
            }));
        }
    }
    Ok(Verdict::holds())
}

/// `‖Tⁿh‖²` for `n = 0..=upto`, exact.
pub fn trajectory(t: &LinearOperator, h: &ProbeVector, upto: usize) -> Result<RealSequence> {
    let mut v = h.coeffs.clone();
    if let Some(d) = t.dim() {
        if v.len() > d {
            if v[d..].iter().any(|z| *z != c(0.0)) {
                return Err(Error::InvalidInput(format!(
                    "probe of length {} exceeds dimension {d}",
                    v.len()
                )));
            }
            v.truncate(d);
        }
        v.resize(d, c(0.0));
    }
    let mut out = Vec::with_capacity(upto + 1);
    for n in 0..=upto {
        out.push(v.iter().map(|z| z.norm_sqr()).sum());
        if n < upto {
            v = t.apply(&v);
        }
    }
    RealSequence::new(out)
}

/// `Aₙ = T*ⁿB₂(T)Tⁿ` for `n = 0..=upto`. Dense operators use the recursion
/// `Aₙ₊₁ = T*AₙT`; banded ones use `Aₙ = Gₙ − 2Gₙ₊₁ + Gₙ₊₂` with exact Gram
/// blocks, which is the same recursion unrolled.
pub fn op_moment_sequence(t: &LinearOperator, upto: usize, window: usize) -> Result<Vec<CMat>> {
    match t {
        LinearOperator::Dense(m) => {
            let mut a = bracket_bm(t, 2, window)?;
            let mut out = Vec::with_capacity(upto + 1);
            out.push(a.clone());
            for _ in 0..upto {
                a = m.adjoint() * &a * m;
                out.push(a.clone());
            }
            Ok(out)
        }
        _ => {
            let g = t.grams(upto + 2, window)?;
            Ok((0..=upto)
                .map(|n| &g[n] - &g[n + 1] * c(2.0) + &g[n + 2])
                .collect())
        }
    }
}

/// Canonical basis vectors followed by `random` seeded unit vectors. Banded
/// operators are probed on the first `support` coordinates.
pub fn default_probes(t: &LinearOperator, random: usize, seed: u64) -> Vec<ProbeVector> {
    let support = t
        .dim()
        .unwrap_or_else(|| (2 * t.bandwidth()).max(4));
    let mut probes: Vec<ProbeVector> = (0..support).map(ProbeVector::basis).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let mut v: Vec<C64> = (0..support)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            v.iter_mut().for_each(|z| *z /= n);
        }
        probes.push(ProbeVector { coeffs: v });
    }
    probes
}

fn probe_witness(index: usize, h: &ProbeVector, inner: Option<Witness>) -> Witness {
    Witness::Probe {
        index,
        vector: h.coeffs.clone(),
        inner: Box::new(inner.unwrap_or(Witness::Inequality {
            description: "probe verdict".into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
        })),
    }
}

/// Probe-wise CPD test: each trajectory must pass the truncated CPD test and
/// its scalarized operator moments `⟨Aₙh, h⟩ = (Δ²γ)ₙ` the Stieltjes test. The
/// first failing probe (in order) is the witness.
pub fn is_cpd_operator(
    t: &LinearOperator,
    probes: &[ProbeVector],
    upto: usize,
    cfg: &ToleranceConfig,
) -> Result<Verdict> {
    cfg.validate()?;
    if upto < 4 {
        return Err(Error::Length {
            needed: 4,
            got: upto,
        });
    }
    let mut inconclusive = None;
    for (index, h) in probes.iter().enumerate() {
        let gamma = trajectory(t, h, upto)?;
        let cpd = is_cpd_truncated(&gamma, cfg)?;
        let verdict = if cpd.holds_at_truncation() {
            let d2 = crate::seq::difference(&gamma, 2)?;
            is_stieltjes_truncated(&d2, cfg)?
                .with_note("scalarized operator moments ⟨Aₙh, h⟩ are not Stieltjes")
        } else {
            cpd
        };
        match verdict.status {
            Status::Fails => {
                let mut v = Verdict::fails(probe_witness(index, h, verdict.witness));
                v.note = verdict.note;
                return Ok(v);
            }
            Status::Inconclusive if inconclusive.is_none() => inconclusive = Some(verdict),
            _ => {}
        }
    }
    Ok(inconclusive.unwrap_or_else(|| {
        Verdict::holds().with_note(format!("{} probes, truncation {upto}", probes.len()))
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketVerdict {
    pub m: usize,
    pub verdict: Verdict,
}

/// `B_m(T) ≤ 0` for `m = 1..=mmax`: the windowed surrogate for complete
/// hyperexpansivity.
pub fn hyperexpansive_window(
    t: &LinearOperator,
    mmax: usize,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<Vec<BracketVerdict>> {
    (1..=mmax)
        .map(|m| {
            let b = bracket_bm(t, m, window)?;
            Ok(BracketVerdict {
                m,
                verdict: psd_verdict(&(-b), cfg.psd_tol),
            })
        })
        .collect()
}

/// Kronecker product of two dense operators.
pub fn tensor(t1: &LinearOperator, t2: &LinearOperator) -> Result<LinearOperator> {
    match (t1, t2) {
        (LinearOperator::Dense(a), LinearOperator::Dense(b)) => LinearOperator::dense(kron(a, b)),
        _ => Err(Error::Unsupported(
            "tensor products are only formed for dense operators".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitStatus {
    /// Increments vanished within tolerance.
    Converged,
    /// Increments decay geometrically; `tail_bound` bounds the distance from
    /// the last iterate to the limit.
    Geometric { ratio: f64, tail_bound: f64 },
    /// Increments do not decay; the witness is the growing direction.
    Divergent { witness: Witness },
}

#[derive(Debug, Clone)]
pub struct DifferenceLimit {
    /// `Dₙ₊₁ − Dₙ = Aₙ ≥ 0` for every computed `n`.
    pub monotone: Verdict,
    pub status: LimitStatus,
    /// Last iterate `D_upto`.
    pub estimate: CMat,
    pub iterates: Vec<CMat>,
}

/// `Dₙ = T*ⁿ⁺¹Tⁿ⁺¹ − T*ⁿTⁿ` for `n = 0..upto`.
pub fn difference_limit(
    t: &LinearOperator,
    upto: usize,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<DifferenceLimit> {
    if upto < 3 {
        return Err(Error::Length {
            needed: 3,
            got: upto,
        });
    }
    let g = t.grams(upto + 1, window)?;
    let iterates: Vec<CMat> = (0..=upto).map(|n| &g[n + 1] - &g[n]).collect();
    let increments: Vec<CMat> = iterates.windows(2).map(|w| &w[1] - &w[0]).collect();
    let monotone = Verdict::all(
        increments
            .iter()
            .map(|a| psd_verdict(a, cfg.psd_tol)),
    );
    let sizes: Vec<f64> = increments.iter().map(spectral_norm).collect();
    let scale = iterates
        .iter()
        .map(spectral_norm)
        .fold(1.0, f64::max);
    let last = *sizes.last().expect("upto >= 3");
    let prev = sizes[sizes.len() - 2];
    let prev2 = sizes[sizes.len() - 3];
    let status = if last <= cfg.rank_tol * scale {
        LimitStatus::Converged
    } else {
        let r1 = last / prev;
        let r2 = prev / prev2;
        let ratio = r1.max(r2);
        if ratio.is_finite() && ratio < 1.0 - 1e-3 {
            LimitStatus::Geometric {
                ratio,
                tail_bound: last * ratio / (1.0 - ratio),
            }
        } else {
            let a = increments.last().expect("upto >= 3");
            let (values, vectors) = herm_eigen(a);
            let k = values.len() - 1;
            LimitStatus::Divergent {
                witness: Witness::Eigenvector {
                    vector: vectors.column(k).iter().copied().collect(),
                    value: values[k],
                },
            }
        }
    };
    Ok(DifferenceLimit {
        monotone,
        status,
        estimate: iterates.last().expect("nonempty").clone(),
        iterates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociatedShift {
    /// `e^{(γₙ₊₁ − γₙ)/2}`.
    pub weights: Vec<f64>,
    /// `e^{sup Δγ}` when the supremum settles on the window.
    pub norm_squared_estimate: Option<f64>,
    /// Stieltjes test of the shift's moments `e^{γₙ − γ₀}`.
    pub subnormal: Verdict,
}

fn exp_sequence(gamma: &RealSequence, sign: f64) -> Option<RealSequence> {
    let g0 = gamma.values()[0];
    let v: Vec<f64> = gamma
        .values()
        .iter()
        .map(|g| (sign * (g - g0)).exp())
        .collect();
    if v.iter().all(|x| x.is_finite()) {
        RealSequence::new(v).ok()
    } else {
        None
    }
}

/// The weighted shift built from the trajectory increments of `h`.
pub fn associated_shift_weights(
    t: &LinearOperator,
    h: &ProbeVector,
    upto: usize,
    cfg: &ToleranceConfig,
) -> Result<AssociatedShift> {
    let gamma = trajectory(t, h, upto)?;
    let inc: Vec<f64> = gamma.values().windows(2).map(|w| w[1] - w[0]).collect();
    let weights = inc.iter().map(|d| (d / 2.0).exp()).collect();
    let n = inc.len();
    let sup = inc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let settled = n >= 2
        && (inc[n - 1] - inc[n - 2]).abs() <= cfg.rank_tol * sup.abs().max(1.0)
        && inc[n - 1] >= sup - cfg.rank_tol * sup.abs().max(1.0);
    let norm_squared_estimate = settled.then(|| sup.exp());
    let subnormal = match exp_sequence(&gamma, 1.0) {
        Some(s) => is_stieltjes_truncated(&s, cfg)?,
        None => Verdict::inconclusive("e^γ overflows on the window"),
    };
    Ok(AssociatedShift {
        weights,
        norm_squared_estimate,
        subnormal,
    })
}

/// Stieltjes test of `{e^{γ₀ − γₙ}}`, the moments of the shift with weights
/// `e^{(γₙ − γₙ₊₁)/2}`; passes for every probe of a completely hyperexpansive
/// operator.
pub fn complete_hyperexpansive_dual_check(
    t: &LinearOperator,
    h: &ProbeVector,
    upto: usize,
    cfg: &ToleranceConfig,
) -> Result<Verdict> {
    let gamma = trajectory(t, h, upto)?;
    match exp_sequence(&gamma, -1.0) {
        Some(s) => is_stieltjes_truncated(&s, cfg),
        None => Ok(Verdict::inconclusive("e^{-γ} underflows on the window")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRadius {
    pub value: f64,
    /// `true` when the value is a finite-window estimate.
    pub estimate: bool,
}

/// Dense: `max |λ|` over the spectrum. Banded: `max_k ‖Tⁿe_k‖^{1/n}` with
/// `n = window` over the leading `window / 2` basis vectors, flagged as an
/// estimate.
pub fn spectral_radius(t: &LinearOperator, window: usize) -> Result<SpectralRadius> {
    match t {
        LinearOperator::Dense(m) => Ok(SpectralRadius {
            value: eigenvalues(m).iter().fold(0.0, |a: f64, z| a.max(z.norm())),
            estimate: false,
        }),
        _ => {
            let n = window.max(2);
            let probes = (window / 2).max(1);
            let mut value: f64 = 0.0;
            for k in 0..probes {
                let gamma = trajectory(t, &ProbeVector::basis(k), n)?;
                value = value.max(gamma.values()[n].powf(0.5 / n as f64));
            }
            Ok(SpectralRadius {
                value,
                estimate: true,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn nil3() -> LinearOperator {
        LinearOperator::dense_real(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap()
    }

    #[test]
    fn wab_bracket_and_trajectory() {
        let (a, b) = (4.0, 2.0);
        let w = LinearOperator::shift(WeightRule::Wab { a, b }).unwrap();
        let b2 = bracket_bm(&w, 2, 30).unwrap();
        assert_eq!(b2.nrows(), 28);
        assert!((b2[(0, 0)].re - (1.0 - 2.0 * a + a * b)).abs() < 1e-12);
        let off = b2.iter().skip(1).fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(off < 1e-12);
        let g = trajectory(&w, &ProbeVector::basis(0), 10).unwrap();
        for n in 1..=10 {
            let want = a * (1.0 + (n as f64 - 1.0) * (b - 1.0));
            assert!((g.values()[n] - want).abs() < 1e-10);
        }
        assert!((w.norm(30).unwrap().powi(2) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn at91_bracket_diagonal() {
        let w = LinearOperator::shift(WeightRule::RatioSqrt {
            num_offset: 3.0,
            den_offset: 1.0,
        })
        .unwrap();
        let b2 = bracket_bm(&w, 2, 20).unwrap();
        for n in 0..b2.nrows() {
            let want = 2.0 / ((n as f64 + 1.0) * (n as f64 + 2.0));
            assert!((b2[(n, n)].re - want).abs() < 1e-12);
        }
        assert!(is_m_isometry(&w, 3, 20, true, &cfg()).unwrap().holds_at_truncation());
    }

    #[test]
    fn window_refusal() {
        let w = LinearOperator::shift(WeightRule::Constant { value: 1.0 }).unwrap();
        assert!(matches!(
            bracket_bm(&w, 5, 5),
            Err(Error::WindowTooSmall { window: 5, needed: 6 })
        ));
    }

    #[test]
    fn three_isometry_moments() {
        let t = nil3();
        assert!(is_m_isometry(&t, 3, 0, true, &cfg()).unwrap().holds_at_truncation());
        let a = op_moment_sequence(&t, 6, 0).unwrap();
        for an in &a {
            assert!((an - &a[0]).norm() < 1e-12);
        }
        assert!((a[0][(1, 1)].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn banded_moments_agree_with_recursion() {
        let w = LinearOperator::shift(WeightRule::Wab { a: 4.0, b: 2.0 }).unwrap();
        let a = op_moment_sequence(&w, 4, 20).unwrap();
        assert!((a[0][(0, 0)].re - 1.0).abs() < 1e-12);
        for an in &a[1..] {
            assert!(an.norm() < 1e-12);
        }
    }

    #[test]
    fn cpd_operator_examples() {
        let w = LinearOperator::shift(WeightRule::Wab { a: 4.0, b: 2.0 }).unwrap();
        let probes = default_probes(&w, 4, 7);
        assert!(is_cpd_operator(&w, &probes, 24, &cfg()).unwrap().holds_at_truncation());
        let sq = tensor(&nil3(), &nil3()).unwrap();
        let v = is_cpd_operator(&sq, &default_probes(&sq, 8, 1), 24, &cfg()).unwrap();
        assert!(v.is_fail());
        let diag = LinearOperator::dense_real(&[&[0.3, 0.0], &[0.0, 0.9]]).unwrap();
        let v = is_cpd_operator(&diag, &default_probes(&diag, 8, 1), 24, &cfg()).unwrap();
        assert!(v.holds_at_truncation());
    }

    #[test]
    fn difference_limits() {
        let two = LinearOperator::shift(WeightRule::RatioSqrt {
            num_offset: 2.0,
            den_offset: 1.0,
        })
        .unwrap();
        let d = difference_limit(&two, 8, 30, &cfg()).unwrap();
        assert_eq!(d.status, LimitStatus::Converged);
        let b1 = bracket_bm(&two, 1, 30).unwrap();
        let k = d.estimate.nrows();
        assert!((&d.estimate + b1.view((0, 0), (k, k))).norm() < 1e-12);
        let d = difference_limit(&nil3(), 8, 0, &cfg()).unwrap();
        assert!(matches!(d.status, LimitStatus::Divergent { .. }));
    }

    #[test]
    fn spectral_radii() {
        let d = LinearOperator::dense_real(&[&[0.5, 0.0], &[0.0, 2.0]]).unwrap();
        assert!((spectral_radius(&d, 0).unwrap().value - 2.0).abs() < 1e-12);
        let n = LinearOperator::dense_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(spectral_radius(&n, 0).unwrap().value < 1e-12);
        let w = LinearOperator::shift(WeightRule::Wab { a: 4.0, b: 2.0 }).unwrap();
        let r = spectral_radius(&w, 40).unwrap();
        assert!(r.estimate && (r.value - 1.0).abs() < 0.15);
    }

    #[test]
    fn dual_hyperexpansive() {
        let iso = LinearOperator::shift(WeightRule::Constant { value: 1.0 }).unwrap();
        let e0 = ProbeVector::basis(0);
        assert!(complete_hyperexpansive_dual_check(&iso, &e0, 12, &cfg())
            .unwrap()
            .holds_at_truncation());
        let w = LinearOperator::shift(WeightRule::Wab { a: 4.0, b: 2.0 }).unwrap();
        assert!(complete_hyperexpansive_dual_check(&w, &e0, 12, &cfg())
            .unwrap()
            .is_fail());
    }

    #[test]
    fn power_of_shift_is_exact() {
        let w = LinearOperator::shift(WeightRule::Wab { a: 4.0, b: 2.0 }).unwrap();
        let w2 = w.power(2).unwrap();
        let g1 = trajectory(&w, &ProbeVector::basis(0), 8).unwrap();
        let g2 = trajectory(&w2, &ProbeVector::basis(0), 4).unwrap();
        for n in 0..=4 {
            assert!((g2.values()[n] - g1.values()[2 * n]).abs() < 1e-10);
        }
    }
}

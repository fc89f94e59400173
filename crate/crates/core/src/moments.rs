//! Truncated moment problems and the scalar representation theory:
//! atom recovery, representing triplets `(b, c, ν)`, the PD decision and the
//! bounded-difference forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pinv_real, sym_eigen};
use crate::seq::{
    difference, growth_rate, hankel_sized, is_cpd_truncated, is_pd_truncated, q_poly,
    RealSequence,
};
use crate::tol::ToleranceConfig;
use crate::verdict::{Verdict, Witness};
use crate::RMat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Finitely atomic positive measure on the real line, atoms sorted by
/// location.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn empty() -> Self {
        AtomicMeasure { atoms: Vec::new() }
    }

    pub fn dirac(location: f64, mass: f64) -> Result<Self> {
        AtomicMeasure::new(vec![Atom { location, mass }], 0.0)
    }

    /// Validates masses and merges atoms closer than `merge_tol`
    /// (mass-weighted location, summed mass).
    pub fn new(mut atoms: Vec<Atom>, merge_tol: f64) -> Result<Self> {
        for a in &atoms {
            if !(a.location.is_finite() && a.mass.is_finite()) {
                return Err(Error::InvalidInput("non-finite atom".into()));
            }
            if a.mass <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "atom at {} has non-positive mass {}",
                    a.location, a.mass
                )));
            }
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if (a.location - last.location).abs() <= merge_tol => {
                    let m = last.mass + a.mass;
                    last.location = (last.location * last.mass + a.location * a.mass) / m;
                    last.mass = m;
                }
                _ => merged.push(a),
            }
        }
        Ok(AtomicMeasure { atoms: merged })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn moment(&self, n: usize) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass * a.location.powi(n as i32))
            .sum()
    }

    pub fn moments(&self, truncation: usize) -> Result<RealSequence> {
        RealSequence::from_fn(truncation, |n| self.moment(n))
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.mass * f(a.location)).sum()
    }

    /// Mass carried within `tol` of `x`.
    pub fn mass_near(&self, x: f64, tol: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.location - x).abs() < tol)
            .map(|a| a.mass)
            .sum()
    }

    /// The measure with every atom within `tol` of `x` removed.
    pub fn without_near(&self, x: f64, tol: f64) -> AtomicMeasure {
        AtomicMeasure {
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|a| (a.location - x).abs() >= tol)
                .collect(),
        }
    }

    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.location).collect()
    }
}

/// `(b, c, ν)` with `γ_n = γ₀ + bn + cn² + ∫ Q_n dν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentingTriplet {
    pub b: f64,
    pub c: f64,
    pub nu: AtomicMeasure,
}

impl RepresentingTriplet {
    /// Checks `c ≥ 0` and that `ν` has no atom at 1.
    pub fn validate(&self, cfg: &ToleranceConfig) -> Result<()> {
        if !(self.b.is_finite() && self.c.is_finite()) {
            return Err(Error::InvalidInput("non-finite triplet".into()));
        }
        if self.c < 0.0 {
            return Err(Error::InvalidInput(format!("c = {} is negative", self.c)));
        }
        if self.nu.mass_near(1.0, cfg.atom_merge_tol) > 0.0 {
            return Err(Error::Structural("ν carries an atom at 1".into()));
        }
        Ok(())
    }
}

/// `(d, ν)` with `γ_n = γ₀ + nd − ∫ (1−xⁿ)/(1−x)² dν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferencePair {
    pub d: f64,
    pub nu: AtomicMeasure,
}

/// Pseudo-inverse `P` with `masses = P·data` for the Vandermonde system
/// `Σ_k m_k x_kⁿ = data_n`, `n = 0..rows`. Rows are weighted by `ρ⁻ⁿ` and
/// columns normalized so growing and decaying atoms are fitted on equal terms.
pub(crate) fn vandermonde_solver(locations: &[f64], rows: usize, rho: f64) -> RMat {
    let k = locations.len();
    let mut a = RMat::from_fn(rows, k, |n, j| (locations[j] / rho).powi(n as i32));
    let scales: Vec<f64> = (0..k)
        .map(|j| {
            let s = a.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let pinv = pinv_real(&a, 1e-14);
    RMat::from_fn(k, rows, |j, n| pinv[(j, n)] / rho.powi(n as i32) / scales[j])
}

fn balancing_scale(values: &[f64]) -> f64 {
    let n = values.len() - 1;
    let top_even = n - n % 2;
    if top_even == 0 || values[0] <= 0.0 || values[top_even] <= 0.0 {
        return 1.0;
    }
    let rho = (values[top_even] / values[0]).powf(1.0 / top_even as f64);
    if rho.is_finite() {
        rho.max(1.0)
    } else {
        1.0
    }
}

fn max_residual(seq: &RealSequence, measure: &AtomicMeasure) -> f64 {
    seq.values()
        .iter()
        .enumerate()
        .map(|(n, g)| (measure.moment(n) - g).abs())
        .fold(0.0, f64::max)
}

/// Recovers the atomic representing measure of a truncated Hamburger moment
/// sequence with the Hankel pencil on the numerically dominant subspace.
///
/// Locations are eigenvalues of `Σ^{-1/2} Uᵀ H₁ U Σ^{-1/2}` where `U Σ Uᵀ` is
/// the rank-revealed shift-0 Hankel matrix; masses come from a least-squares
/// fit against the Vandermonde system. Growing sequences are first balanced
/// by `γ_n / ρⁿ` with `ρ ≥ 1`.
pub fn recover_atoms(seq: &RealSequence, cfg: &ToleranceConfig) -> Result<AtomicMeasure> {
    cfg.validate()?;
    let pd = is_pd_truncated(seq, cfg)?;
    if let Some(Witness::QuadraticForm { value, .. }) = pd.witness.filter(|_| pd.status == crate::Status::Fails) {
        return Err(Error::NotPsd {
            min_eigenvalue: value,
        });
    }
    let sup = seq.sup_norm();
    if sup == 0.0 {
        return Ok(AtomicMeasure::empty());
    }
    let values = seq.values();
    let n = seq.truncation();
    let rho = balancing_scale(values);
    let balanced = RealSequence::new(
        values
            .iter()
            .enumerate()
            .map(|(k, v)| v / rho.powi(k as i32))
            .collect(),
    )?;
    if values[0] <= cfg.rank_tol * balanced.sup_norm() {
        return Err(Error::inconclusive(
            "total mass γ₀ vanishes while higher moments do not",
            f64::INFINITY,
            sup,
        ));
    }
    let m = (n - 1) / 2 + 1;
    let h0 = hankel_sized(&balanced, 0, m)?;
    let h1 = hankel_sized(&balanced, 1, m)?;
    let (ev, vecs) = sym_eigen(&h0);
    let top = ev.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..m).rev().filter(|&i| ev[i] > cfg.rank_tol * top).collect();
    if keep.is_empty() {
        return Ok(AtomicMeasure::empty());
    }
    let r = keep.len();
    let condition = top / ev[*keep.last().unwrap()];
    // Whitened basis of the dominant subspace.
    let w = RMat::from_fn(m, r, |i, k| vecs[(i, keep[k])] / ev[keep[k]].sqrt());
    let pencil = w.transpose() * &h1 * &w;
    let (scaled_locs, _) = sym_eigen(&pencil);
    let locations: Vec<f64> = scaled_locs.iter().map(|y| y * rho).collect();

    let fit = |locs: &[f64]| -> Result<AtomicMeasure> {
        let solver = vandermonde_solver(locs, n + 1, rho);
        let masses = &solver * nalgebra::DVector::from_column_slice(values);
        let total: f64 = masses.iter().map(|v| v.abs()).sum();
        let mut atoms = Vec::new();
        for (k, &mass) in masses.iter().enumerate() {
            if mass > cfg.rank_tol * total {
                atoms.push(Atom {
                    location: locs[k],
                    mass,
                });
            } else if mass < -cfg.rank_tol * total {
                return Err(Error::inconclusive(
                    format!("recovered mass {mass:e} at {} is negative", locs[k]),
                    condition,
                    mass.abs(),
                ));
            }
        }
        AtomicMeasure::new(atoms, cfg.atom_merge_tol)
    };
    // First pass drops noise atoms and merges near-duplicates, second refits.
    let first = fit(&locations)?;
    let measure = fit(&first.locations())?;
    let residual = max_residual(seq, &measure);
    if residual > cfg.rank_tol * sup {
        return Err(Error::inconclusive(
            "recovered atoms do not reproduce the window",
            condition,
            residual,
        ));
    }
    Ok(measure)
}

fn decision_tol(cfg: &ToleranceConfig, scale: f64) -> f64 {
    cfg.rank_tol * scale.max(1.0)
}

/// `γ_n = γ₀ + bn + cn² + Σ mass·Q_n(x)` for `n = 0..=upto`.
pub fn reconstruct_sequence(
    t: &RepresentingTriplet,
    gamma0: f64,
    upto: usize,
) -> Result<RealSequence> {
    RealSequence::from_fn(upto, |n| {
        let nf = n as f64;
        gamma0 + t.b * nf + t.c * nf * nf + t.nu.integrate(|x| q_poly(n, x))
    })
}

/// Representing triplet of a CPD window: `μ` represents `Δ²γ`, the atom of `μ`
/// at 1 gives `c = μ({1})/2`, `b = γ₁ − γ₀ − c` and `ν = μ` off 1.
pub fn triplet_from_sequence(
    seq: &RealSequence,
    cfg: &ToleranceConfig,
) -> Result<RepresentingTriplet> {
    let cpd = is_cpd_truncated(seq, cfg)?;
    if !cpd.holds_at_truncation() {
        return Err(Error::Precondition(
            "sequence is not CPD at truncation".into(),
        ));
    }
    let d2 = difference(seq, 2)?;
    let mu = recover_atoms(&d2, cfg)?;
    let at_one = mu.mass_near(1.0, cfg.atom_merge_tol);
    // `+ 0.0` normalizes a signed zero
    let c = at_one / 2.0 + 0.0;
    let v = seq.values();
    let triplet = RepresentingTriplet {
        b: v[1] - v[0] - c,
        c,
        nu: mu.without_near(1.0, cfg.atom_merge_tol),
    };
    let rebuilt = reconstruct_sequence(&triplet, v[0], seq.truncation())?;
    let residual = rebuilt
        .values()
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > cfg.rank_tol * seq.sup_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::inconclusive(
            "triplet does not reproduce the window",
            f64::NAN,
            residual,
        ));
    }
    Ok(triplet)
}

/// Warning when `c > 0` but the window grows slower than `1ⁿ`; asymptotically
/// `c > 0` forces `limsup |γ_n|^{1/n} ≥ 1`, so on a finite window this is only
/// advisory.
pub fn growth_warning(t: &RepresentingTriplet, seq: &RealSequence) -> Option<String> {
    let g = growth_rate(seq).ok()?.value;
    (t.c > 0.0 && g < 1.0).then(|| {
        format!("c = {} > 0 but the growth estimate {g} is below 1", t.c)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdDecision {
    pub verdict: Verdict,
    /// Representing measure `μ` when the sequence is PD.
    pub measure: Option<AtomicMeasure>,
}

/// PD iff `c = 0`, `b = ∫ dν/(x−1)` and `∫ dν/(x−1)² ≤ γ₀`. On success the
/// representing measure is `ν/(x−1)² + (γ₀ − ∫ dν/(x−1)²)·δ₁`.
pub fn pd_decision(
    t: &RepresentingTriplet,
    gamma0: f64,
    cfg: &ToleranceConfig,
) -> Result<PdDecision> {
    t.validate(cfg)?;
    let s1 = t.nu.integrate(|x| 1.0 / (x - 1.0));
    let s2 = t.nu.integrate(|x| 1.0 / ((x - 1.0) * (x - 1.0)));
    let tol = decision_tol(cfg, gamma0.abs().max(t.b.abs()).max(s1.abs()).max(s2));
    let fail = |description: &str, lhs: f64, rhs: f64| PdDecision {
        verdict: Verdict::fails(Witness::Inequality {
            description: description.into(),
            lhs,
            rhs,
        }),
        measure: None,
    };
    if t.c > tol {
        return Ok(fail("c <= 0", t.c, 0.0));
    }
    if (t.b - s1).abs() > tol {
        return Ok(fail("|b - ∫ dν/(x-1)| <= 0", (t.b - s1).abs(), 0.0));
    }
    if s2 > gamma0 + tol {
        return Ok(fail("∫ dν/(x-1)² <= γ₀", s2, gamma0));
    }
    let mut atoms: Vec<Atom> = t
        .nu
        .atoms()
        .iter()
        .map(|a| Atom {
            location: a.location,
            mass: a.mass / ((a.location - 1.0) * (a.location - 1.0)),
        })
        .collect();
    let rest = gamma0 - s2;
    if rest > tol {
        atoms.push(Atom {
            location: 1.0,
            mass: rest,
        });
    }
    Ok(PdDecision {
        verdict: Verdict::holds(),
        measure: Some(AtomicMeasure::new(atoms, cfg.atom_merge_tol)?),
    })
}

/// Which support condition the bounded-difference form checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceSupport {
    /// `supp ν ⊆ [0, 1)`: bounded differences with positive support.
    HalfOpenUnit,
    /// `supp ν ⊆ (−1, 1)`: convergent differences.
    OpenSymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedDifference {
    pub verdict: Verdict,
    pub pair: Option<DifferencePair>,
}

pub fn bounded_difference_form(
    seq: &RealSequence,
    support: DifferenceSupport,
    cfg: &ToleranceConfig,
) -> Result<BoundedDifference> {
    let t = triplet_from_sequence(seq, cfg)?;
    let scale = seq.sup_norm();
    let tol = decision_tol(cfg, scale);
    let fail = |w: Witness| BoundedDifference {
        verdict: Verdict::fails(w),
        pair: None,
    };
    if t.c > tol {
        return Ok(fail(Witness::Inequality {
            description: "c <= 0".into(),
            lhs: t.c,
            rhs: 0.0,
        }));
    }
    let lower = match support {
        DifferenceSupport::HalfOpenUnit => -cfg.atom_merge_tol,
        DifferenceSupport::OpenSymmetric => -1.0 + cfg.atom_merge_tol,
    };
    for a in t.nu.atoms() {
        if a.location >= 1.0 - cfg.atom_merge_tol {
            return Ok(fail(Witness::Inequality {
                description: "atom location < 1".into(),
                lhs: a.location,
                rhs: 1.0,
            }));
        }
        if a.location < lower {
            return Ok(fail(Witness::Inequality {
                description: "atom location >= lower support bound".into(),
                lhs: lower,
                rhs: a.location,
            }));
        }
    }
    let d = t.b + t.nu.integrate(|x| 1.0 / (1.0 - x));
    let v = seq.values();
    let residual = (0..v.len())
        .map(|n| {
            let explicit = v[0] + n as f64 * d
                - t.nu
                    .integrate(|x| (1.0 - x.powi(n as i32)) / ((1.0 - x) * (1.0 - x)));
            (explicit - v[n]).abs()
        })
        .fold(0.0, f64::max);
    let pair = DifferencePair { d, nu: t.nu };
    if residual > tol {
        return Ok(BoundedDifference {
            verdict: Verdict::inconclusive(format!(
                "explicit form misses the window by {residual:e}"
            )),
            pair: Some(pair),
        });
    }
    Ok(BoundedDifference {
        verdict: Verdict::holds(),
        pair: Some(pair),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledVerdict {
    pub theta: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GyeonReport {
    pub pd: Verdict,
    pub scaled: Vec<ScaledVerdict>,
    /// Cross-check findings between the PD verdict and the scaled verdicts.
    pub flags: Vec<String>,
    /// Conjunction of the scaled CPD verdicts.
    pub verdict: Verdict,
}

/// Runs the CPD test on `{θⁿγ_n}` for each `θ` and cross-checks against PD:
/// PD forces every scaling to be CPD, and a small-`θ` CPD pass suggests PD.
pub fn gyeon_scaling_probe(
    seq: &RealSequence,
    thetas: &[f64],
    cfg: &ToleranceConfig,
) -> Result<GyeonReport> {
    if let Some(t) = thetas.iter().find(|t| !(t.is_finite() && **t != 0.0)) {
        return Err(Error::InvalidInput(format!(
            "scaling parameter must be finite and nonzero, got {t}"
        )));
    }
    let pd = is_pd_truncated(seq, cfg)?;
    let growth = growth_rate(seq).map(|g| g.value).unwrap_or(f64::NAN);
    let mut scaled = Vec::with_capacity(thetas.len());
    let mut flags = Vec::new();
    for &theta in thetas {
        let verdict = is_cpd_truncated(&seq.scaled(theta)?, cfg)?;
        if pd.holds_at_truncation() && verdict.is_fail() {
            flags.push(format!(
                "PD holds but θ = {theta} scaling fails CPD (truncation or tolerance artefact)"
            ));
        }
        if pd.is_fail() && verdict.holds_at_truncation() && theta.abs() * growth < 1.0 {
            flags.push(format!(
                "θ = {theta} satisfies |θ|·growth < 1 and passes CPD while PD fails"
            ));
        }
        scaled.push(ScaledVerdict { theta, verdict });
    }
    let verdict = Verdict::all(scaled.iter().map(|s| match &s.verdict.witness {
        Some(w) if s.verdict.is_fail() => Verdict::fails(Witness::Parameter {
            name: "theta".into(),
            value: s.theta,
            inner: Box::new(w.clone()),
        }),
        _ => s.verdict.clone(),
    }));
    Ok(GyeonReport {
        pd,
        scaled,
        flags,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    /// `Δγ → 0`, read from the triplet (`c = 0`, `supp ν ⊆ [0,1)`, `d = 0`).
    pub limit_zero: bool,
    /// `γ` decreasing on the window.
    pub decreasing: bool,
    /// `γ` convergent: the convergent-difference form holds with `d = 0`.
    pub convergent: bool,
    pub pd: Option<Verdict>,
    /// Holds when the three conditions agree and, if they hold, PD is confirmed.
    pub verdict: Verdict,
}

/// For CPD windows with `supp ν ⊆ ℝ₊` and an eventually nonnegative tail:
/// `Δγ → 0` ⇔ decreasing ⇔ convergent, and then `γ` is PD.
pub fn monotone_cpd_check(seq: &RealSequence, cfg: &ToleranceConfig) -> Result<MonotoneReport> {
    let unmet = |why: String| MonotoneReport {
        limit_zero: false,
        decreasing: false,
        convergent: false,
        pd: None,
        verdict: Verdict::inconclusive(why),
    };
    if !is_cpd_truncated(seq, cfg)?.holds_at_truncation() {
        return Ok(unmet("sequence is not CPD at truncation".into()));
    }
    let t = match triplet_from_sequence(seq, cfg) {
        Ok(t) => t,
        Err(e) => return Ok(unmet(format!("triplet unavailable: {e}"))),
    };
    if let Some(a) = t
        .nu
        .atoms()
        .iter()
        .find(|a| a.location < -cfg.atom_merge_tol)
    {
        return Ok(unmet(format!("ν has an atom at {} < 0", a.location)));
    }
    let v = seq.values();
    let n = seq.truncation();
    let scale = seq.sup_norm();
    let tol = decision_tol(cfg, scale);
    if v[n / 2..].iter().any(|&g| g < -tol) {
        return Ok(unmet("window tail has negative terms".into()));
    }
    let d = t.b + t.nu.integrate(|x| 1.0 / (1.0 - x));
    let structural = t.c <= tol && t.nu.atoms().iter().all(|a| a.location < 1.0 - cfg.atom_merge_tol);
    let limit_zero = structural && d.abs() <= tol;
    let decreasing = v.windows(2).all(|w| w[1] - w[0] <= tol);
    let convergent = match bounded_difference_form(seq, DifferenceSupport::OpenSymmetric, cfg) {
        Ok(BoundedDifference {
            pair: Some(p),
            verdict,
        }) if verdict.holds_at_truncation() => p.d.abs() <= tol,
        _ => false,
    };
    if !(limit_zero == decreasing && decreasing == convergent) {
        return Ok(MonotoneReport {
            limit_zero,
            decreasing,
            convergent,
            pd: None,
            verdict: Verdict::fails(Witness::Inequality {
                description: format!(
                    "equivalent conditions disagree (limit_zero={limit_zero}, decreasing={decreasing}, convergent={convergent})"
                ),
                lhs: d,
                rhs: 0.0,
            }),
        });
    }
    if !limit_zero {
        return Ok(MonotoneReport {
            limit_zero,
            decreasing,
            convergent,
            pd: None,
            verdict: Verdict::holds().with_note("all three conditions fail consistently"),
        });
    }
    let pd = is_pd_truncated(seq, cfg)?;
    let verdict = if pd.holds_at_truncation() {
        Verdict::holds().with_note("decreasing, Δγ → 0 and PD confirmed")
    } else {
        pd.clone()
    };
    Ok(MonotoneReport {
        limit_zero,
        decreasing,
        convergent,
        pd: Some(pd),
        verdict,
    })
}

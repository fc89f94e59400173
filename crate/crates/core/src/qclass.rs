//! Class-Q block operators `T = [[V, E], [0, Q]]` on `H₁ ⊕ H₂` with a finite
//! joint spectrum of `(|Q|, |E|)`.
//!
//! The concrete model uses `H₂ = ℂ^d` and one unilateral shift slot per
//! coordinate. Index `d·k + j` is `f_j ∈ H₂` for `k = 0` and the `(k−1)`-th
//! basis vector of slot `j` for `k ≥ 1`, so `T` is lower-banded with
//! bandwidth `d` and every windowed quantity is exact:
//! `T f_j = s_j f_j + t_j e₀⁽ʲ⁾`, `T eₖ⁽ʲ⁾ = eₖ₊₁⁽ʲ⁾`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, herm_eigen, psd_verdict, spectral_norm};
use crate::operator::{bracket_bm, LinearOperator};
use crate::repr::{OperatorAtom, OperatorMeasure};
use crate::tol::ToleranceConfig;
use crate::verdict::{Verdict, Witness};
use crate::CMat;

#[derive(Debug, Clone)]
pub struct QBlockOperator {
    /// Joint spectrum: `|Q| = diag(s)`, `|E| = diag(t)`.
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub op: LinearOperator,
}

impl QBlockOperator {
    pub fn d(&self) -> usize {
        self.s.len()
    }

    /// Window of `levels` slots per coordinate.
    pub fn window(&self, levels: usize) -> usize {
        levels * self.d()
    }
}

pub fn build_qclass(s: &[f64], t: &[f64]) -> Result<QBlockOperator> {
    if s.len() != t.len() || s.is_empty() {
        return Err(Error::InvalidInput(format!(
            "need equally many s and t values, got {} and {}",
            s.len(),
            t.len()
        )));
    }
    if s.iter().chain(t).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidInput(
            "s and t must be finite and nonnegative".into(),
        ));
    }
    let d = s.len();
    let (sv, tv) = (s.to_vec(), t.to_vec());
    let op = LinearOperator::banded(d, format!("class-Q block, d = {d}"), move |i, j| {
        let (level, slot) = (j / d, j % d);
        if level == 0 && i == j {
            c(sv[slot])
        } else if level == 0 && i == j + d {
            c(tv[slot])
        } else if level > 0 && i == j + d {
            c(1.0)
        } else {
            c(0.0)
        }
    })?;
    Ok(QBlockOperator {
        s: s.to_vec(),
        t: t.to_vec(),
        op,
    })
}

/// Reduces commuting positive `|Q|`, `|E|` to their joint spectrum by a
/// simultaneous eigendecomposition.
pub fn from_commuting(
    qabs: &CMat,
    eabs: &CMat,
    cfg: &ToleranceConfig,
) -> Result<QBlockOperator> {
    let d = qabs.nrows();
    if !qabs.is_square() || eabs.shape() != qabs.shape() {
        return Err(Error::InvalidInput("|Q| and |E| must be square of equal size".into()));
    }
    let scale = spectral_norm(qabs).max(spectral_norm(eabs)).max(1.0);
    let tol = cfg.rank_tol * scale;
    if spectral_norm(&(qabs * eabs - eabs * qabs)) > tol {
        return Err(Error::Structural("|Q| and |E| do not commute".into()));
    }
    for (name, m) in [("|Q|", qabs), ("|E|", eabs)] {
        if spectral_norm(&(m - m.adjoint())) > tol || psd_verdict(m, cfg.psd_tol).is_fail() {
            return Err(Error::InvalidInput(format!("{name} is not positive")));
        }
    }
    // A generic combination separates the joint eigenspaces.
    let mix = qabs + eabs * c(std::f64::consts::SQRT_2 + 0.1);
    let (_, u) = herm_eigen(&mix);
    let dq = u.adjoint() * qabs * &u;
    let de = u.adjoint() * eabs * &u;
    let off = |m: &CMat| {
        let mut o = m.clone();
        o.fill_diagonal(c(0.0));
        spectral_norm(&o)
    };
    if off(&dq).max(off(&de)) > tol {
        return Err(Error::inconclusive(
            "joint eigenbasis not resolved",
            f64::NAN,
            off(&dq).max(off(&de)),
        ));
    }
    let s: Vec<f64> = (0..d).map(|i| dq[(i, i)].re.max(0.0)).collect();
    let t: Vec<f64> = (0..d).map(|i| de[(i, i)].re.max(0.0)).collect();
    build_qclass(&s, &t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blocks {
    pub v_isometric: f64,
    pub v_star_e: f64,
    pub q_commutes_e2: f64,
    pub q_normal: f64,
    pub lower_left: f64,
}

/// Reads `V, E, Q` off a window of `levels` slots and measures the defects of
/// `V*V = I`, `V*E = 0`, `Q|E|² = |E|²Q`, `QQ*Q = Q*QQ` and the zero block.
pub fn block_defects(q: &QBlockOperator, levels: usize) -> Result<Blocks> {
    if levels < 3 {
        return Err(Error::WindowTooSmall {
            window: q.window(levels),
            needed: q.window(3),
        });
    }
    let d = q.d();
    let w = q.window(levels);
    let t = q.op.window_matrix(w);
    let h1 = w - d;
    let exact = h1 - d;
    let v = t.view((d, d), (h1, exact)).into_owned();
    let e = t.view((d, 0), (h1, d)).into_owned();
    let qm = t.view((0, 0), (d, d)).into_owned();
    let lower_left = spectral_norm(&t.view((0, d), (d, h1)).into_owned());
    let e2 = e.adjoint() * &e;
    Ok(Blocks {
        v_isometric: spectral_norm(&(v.adjoint() * &v - CMat::identity(exact, exact))),
        v_star_e: spectral_norm(&(v.adjoint() * &e)),
        q_commutes_e2: spectral_norm(&(&qm * &e2 - &e2 * &qm)),
        q_normal: spectral_norm(&(&qm * qm.adjoint() * &qm - qm.adjoint() * &qm * &qm)),
        lower_left,
    })
}

/// All four block identities within `rank_tol`; violations are structural
/// errors.
pub fn validate_pacz(q: &QBlockOperator, levels: usize, cfg: &ToleranceConfig) -> Result<Blocks> {
    let b = block_defects(q, levels)?;
    let worst = b
        .v_isometric
        .max(b.v_star_e)
        .max(b.q_commutes_e2)
        .max(b.q_normal)
        .max(b.lower_left);
    let scale = q.s.iter().chain(&q.t).fold(1.0, |a: f64, v| a.max(*v));
    if worst > cfg.rank_tol * scale.powi(3) {
        return Err(Error::Structural(format!(
            "class-Q identities violated by {worst:e}: {b:?}"
        )));
    }
    Ok(b)
}

fn in_cpd_region(s: f64, t: f64, tol: f64) -> bool {
    s * s + t * t <= 1.0 + tol || s >= 1.0 - tol
}

fn in_subnormal_region(s: f64, t: f64, tol: f64) -> bool {
    s * s + t * t <= 1.0 + tol || (s >= 1.0 - tol && t <= tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QclassCpd {
    /// Joint spectrum inside `{s² + t² ≤ 1} ∪ {s ≥ 1}`.
    pub region: Verdict,
    /// `B₂(T) ≥ 0` and `B₄(T) ≥ 0` on the banded window.
    pub brackets: Verdict,
    pub verdict: Verdict,
}

/// Levels used for bracket computations: `B₄` consumes four.
pub const BRACKET_LEVELS: usize = 8;

pub fn qclass_cpd_test(q: &QBlockOperator, cfg: &ToleranceConfig) -> Result<QclassCpd> {
    validate_pacz(q, BRACKET_LEVELS, cfg)?;
    let region = Verdict::all(q.s.iter().zip(&q.t).enumerate().map(|(j, (&s, &t))| {
        if in_cpd_region(s, t, cfg.psd_tol) {
            Verdict::holds()
        } else {
            Verdict::fails(Witness::Inequality {
                description: format!("pair {j}: s² + t² <= 1 or s >= 1"),
                lhs: s * s + t * t,
                rhs: 1.0,
            })
        }
    }));
    let w = q.window(BRACKET_LEVELS);
    let brackets = Verdict::all([2usize, 4].iter().map(|&m| {
        bracket_bm(&q.op, m, w)
            .map(|b| {
                let v = psd_verdict(&b, cfg.psd_tol);
                if v.is_fail() {
                    v.with_note(format!("B_{m}(T) is not PSD"))
                } else {
                    v
                }
            })
            .unwrap_or_else(|e| Verdict::inconclusive(e.to_string()))
    }));
    let verdict = if region.status == brackets.status {
        region.clone()
    } else {
        Verdict::inconclusive(format!(
            "region test {} but bracket test {}",
            region.label(),
            brackets.label()
        ))
    };
    Ok(QclassCpd {
        region,
        brackets,
        verdict,
    })
}

/// `A = (I − |Q|² − |E|²)(I − |Q|²)` as the diagonal over the joint spectrum.
pub fn a_diagonal(q: &QBlockOperator) -> Vec<f64> {
    q.s.iter()
        .zip(&q.t)
        .map(|(&s, &t)| (1.0 - s * s - t * t) * (1.0 - s * s))
        .collect()
}

/// `M = 0 ⊕ √A·P_{|Q|²}(·)·√A`, embedded in a `dim`-dimensional block whose
/// leading `d` coordinates are `H₂`.
pub fn qclass_m(q: &QBlockOperator, dim: usize, cfg: &ToleranceConfig) -> Result<OperatorMeasure> {
    let d = q.d();
    if dim < d {
        return Err(Error::InvalidInput(format!(
            "embedding dimension {dim} is below d = {d}"
        )));
    }
    let a = a_diagonal(q);
    if let Some((j, v)) = a
        .iter()
        .enumerate()
        .find(|(_, v)| **v < -cfg.psd_tol * 1f64.max(v.abs()))
    {
        return Err(Error::inconclusive(
            format!("A is not PSD at pair {j}"),
            f64::NAN,
            *v,
        ));
    }
    let atoms = (0..d)
        .filter(|&j| a[j] > cfg.psd_tol)
        .map(|j| {
            let mut w = CMat::zeros(dim, dim);
            w[(j, j)] = c(a[j]);
            OperatorAtom {
                location: q.s[j] * q.s[j],
                weight: w,
            }
        })
        .collect();
    OperatorMeasure::new(dim, atoms, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QclassRegions {
    /// Joint spectrum inside `{s² + t² ≤ 1} ∪ ([1, ∞) × {0})`.
    pub subnormal: Verdict,
    /// Pairs in the CPD region but outside the subnormal one.
    pub cpd_only: Vec<usize>,
}

pub fn qclass_subnormal_region(q: &QBlockOperator, cfg: &ToleranceConfig) -> Result<QclassRegions> {
    validate_pacz(q, 3, cfg)?;
    let tol = cfg.psd_tol;
    let subnormal = Verdict::all(q.s.iter().zip(&q.t).enumerate().map(|(j, (&s, &t))| {
        if in_subnormal_region(s, t, tol) {
            Verdict::holds()
        } else {
            Verdict::fails(Witness::Inequality {
                description: format!("pair {j}: s² + t² <= 1 or (s >= 1 and t = 0)"),
                lhs: s * s + t * t,
                rhs: 1.0,
            })
        }
    }));
    let cpd_only = q
        .s
        .iter()
        .zip(&q.t)
        .enumerate()
        .filter(|(_, (&s, &t))| in_cpd_region(s, t, tol) && !in_subnormal_region(s, t, tol))
        .map(|(j, _)| j)
        .collect();
    Ok(QclassRegions {
        subnormal,
        cpd_only,
    })
}

fn rank(m: &CMat, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    sv.iter().filter(|&&s| s > tol * top.max(1.0)).count()
}

fn kernel_basis(m: &CMat, tol: f64) -> CMat {
    let (values, vectors) = herm_eigen(&(m.adjoint() * m));
    let top = values.iter().fold(0.0f64, |a, &v| a.max(v));
    let cols: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] <= tol * top.max(1.0))
        .collect();
    CMat::from_fn(m.nrows(), cols.len(), |r, k| vectors[(r, cols[k])])
}

/// For commuting normal `A`, `B`: `ker AB = ker A + ker B` and
/// `cl ran AB = cl ran A ∩ cl ran B`, compared through subspace dimensions.
pub fn kernel_range_identity(a: &CMat, b: &CMat, cfg: &ToleranceConfig) -> Result<Verdict> {
    let tol = cfg.rank_tol;
    let scale = spectral_norm(a).max(spectral_norm(b)).max(1.0);
    if spectral_norm(&(a * b - b * a)) > tol * scale * scale {
        return Err(Error::Precondition("A and B do not commute".into()));
    }
    let d = a.nrows();
    let ab = a * b;
    let ker_ab = d - rank(&ab, tol);
    let (ka, kb) = (kernel_basis(a, tol), kernel_basis(b, tol));
    let mut joined = CMat::zeros(d, ka.ncols() + kb.ncols());
    joined.view_mut((0, 0), (d, ka.ncols())).copy_from(&ka);
    joined.view_mut((0, ka.ncols()), (d, kb.ncols())).copy_from(&kb);
    let ker_sum = rank(&joined, tol);
    let mut ranges = CMat::zeros(d, 2 * d);
    ranges.view_mut((0, 0), (d, d)).copy_from(a);
    ranges.view_mut((0, d), (d, d)).copy_from(b);
    let ran_cap = rank(a, tol) + rank(b, tol) - rank(&ranges, tol);
    let ran_ab = rank(&ab, tol);
    Ok(if ker_ab != ker_sum {
        Verdict::fails(Witness::Inequality {
            description: "dim ker AB = dim (ker A + ker B)".into(),
            lhs: ker_ab as f64,
            rhs: ker_sum as f64,
        })
    } else if ran_ab != ran_cap {
        Verdict::fails(Witness::Inequality {
            description: "dim ran AB = dim (ran A ∩ ran B)".into(),
            lhs: ran_ab as f64,
            rhs: ran_cap as f64,
        })
    } else {
        Verdict::holds()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{measure_distance, recover_m};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn construction_satisfies_identities() {
        let q = build_qclass(&[0.6, 1.5, 0.9], &[0.8, 7.0, 0.9]).unwrap();
        let b = validate_pacz(&q, 6, &cfg()).unwrap();
        assert_eq!(b.v_isometric, 0.0);
        assert_eq!(b.v_star_e, 0.0);
    }

    #[test]
    fn pinned_pairs() {
        for (s, t, cpd) in [(0.6, 0.7, true), (0.9, 0.9, false), (1.5, 7.0, true)] {
            let q = build_qclass(&[s], &[t]).unwrap();
            let r = qclass_cpd_test(&q, &cfg()).unwrap();
            assert_eq!(r.verdict.holds_at_truncation(), cpd, "({s}, {t})");
            assert_eq!(r.verdict.is_fail(), !cpd);
        }
    }

    #[test]
    fn a_formula_values() {
        let q = build_qclass(&[0.6, 0.0, 2.0], &[0.8, 0.5, 3.0]).unwrap();
        let a = a_diagonal(&q);
        assert!(a[0].abs() < 1e-12);
        assert!((a[1] - 0.75).abs() < 1e-12);
        assert!((a[2] - 36.0).abs() < 1e-12);
        let m = qclass_m(&q, 3, &cfg()).unwrap();
        assert_eq!(m.locations(), vec![0.0, 4.0]);
    }

    #[test]
    fn measure_matches_recovery() {
        let q = build_qclass(&[0.5, 1.2], &[0.3, 0.4]).unwrap();
        let w = q.window(20);
        let rec = recover_m(&q.op, 12, w, &cfg()).unwrap();
        let closed = qclass_m(&q, rec.dim(), &cfg()).unwrap();
        assert!(measure_distance(&rec, &closed) < 1e-8);
    }

    #[test]
    fn regions() {
        let q = build_qclass(&[1.5, 1.5, 0.3], &[0.0, 7.0, 0.4]).unwrap();
        let r = qclass_subnormal_region(&q, &cfg()).unwrap();
        assert!(r.subnormal.is_fail());
        assert_eq!(r.cpd_only, vec![1]);
    }

    #[test]
    fn commuting_reduction() {
        let u = CMat::from_fn(2, 2, |i, j| c(if i == j { 0.6 } else if i < j { 0.8 } else { -0.8 }));
        let qd = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.6), c(1.5)]));
        let ed = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.8), c(7.0)]));
        let q = from_commuting(&(&u * qd * u.adjoint()), &(&u * ed * u.adjoint()), &cfg()).unwrap();
        let mut pairs: Vec<(f64, f64)> = q.s.iter().copied().zip(q.t.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((pairs[0].0 - 0.6).abs() < 1e-10 && (pairs[0].1 - 0.8).abs() < 1e-10);
        assert!((pairs[1].0 - 1.5).abs() < 1e-10 && (pairs[1].1 - 7.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_range_on_diagonals() {
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0), c(2.0), c(0.0)]));
        let b = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(3.0), c(1.0), c(0.0)]));
        assert!(kernel_range_identity(&a, &b, &cfg()).unwrap().holds_at_truncation());
    }
}

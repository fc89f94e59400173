//! The calculus `Λ_T(f) = ∫ f dM` attached to a CPD operator, its norm, and
//! the polynomial, resolvent and exponential estimates it yields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, spectral_norm};
use crate::operator::{op_moment_sequence, LinearOperator};
use crate::polynomial::Polynomial;
use crate::repr::{recover_m_from_moments, Dilation, OperatorMeasure};
use crate::tol::ToleranceConfig;
use crate::verdict::{Verdict, Witness};
use crate::{CMat, C64};

/// `M` together with `B₂(T) = M(ℝ₊)`, the support `Ω` and the moments
/// `Aₙ = ∫ xⁿ dM` they were recovered from.
#[derive(Debug, Clone)]
pub struct CalculusHandle {
    pub m: OperatorMeasure,
    pub b2: CMat,
    pub support: Vec<f64>,
    pub moments: Vec<CMat>,
}

impl CalculusHandle {
    pub fn new(
        m: OperatorMeasure,
        moments: Vec<CMat>,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let b2 = moments
            .first()
            .cloned()
            .ok_or_else(|| Error::InvalidInput("no operator moments".into()))?;
        let gap = spectral_norm(&(m.total() - &b2));
        if gap > cfg.psd_tol * spectral_norm(&b2).max(1.0) {
            return Err(Error::Structural(format!(
                "M(ℝ₊) differs from B₂(T) by {gap:e}"
            )));
        }
        let support = m.locations();
        Ok(CalculusHandle {
            m,
            b2,
            support,
            moments,
        })
    }

    /// Recovers `M` from `A₀..A_upto` of `T`.
    pub fn from_operator(
        t: &LinearOperator,
        upto: usize,
        window: usize,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let moments = op_moment_sequence(t, upto, window)?;
        let scale = t
            .grams(upto + 2, window)?
            .iter()
            .map(spectral_norm)
            .fold(1.0, f64::max);
        let m = recover_m_from_moments(&moments, scale, cfg)?;
        CalculusHandle::new(m, moments, cfg)
    }

    pub fn dim(&self) -> usize {
        self.b2.nrows()
    }

    fn support_max(&self) -> f64 {
        self.support.iter().fold(0.0, |a: f64, &x| a.max(x))
    }
}

/// `Λ_T(f) = Σ f(x_k) M_k`.
pub fn lambda_eval(h: &CalculusHandle, f: impl Fn(f64) -> C64) -> CMat {
    let mut out = CMat::zeros(h.dim(), h.dim());
    for a in h.m.atoms() {
        out += &a.weight * f(a.location);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaNorm {
    /// `max ‖Λ_T(f)‖` over `f` with values `±1` on the atoms.
    pub by_sign_patterns: f64,
    /// `‖M(ℝ₊)‖ = ‖B₂(T)‖`.
    pub by_total: f64,
}

/// `‖Λ_T‖` computed over sign patterns and as `‖B₂(T)‖`.
pub fn lambda_norm(h: &CalculusHandle) -> Result<LambdaNorm> {
    let k = h.m.atoms().len();
    if k > 20 {
        return Err(Error::Unsupported(format!(
            "{k} atoms are too many for sign-pattern enumeration"
        )));
    }
    let mut best: f64 = 0.0;
    for mask in 0u32..(1u32 << k) {
        let mut sum = CMat::zeros(h.dim(), h.dim());
        for (i, a) in h.m.atoms().iter().enumerate() {
            let sign = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            sum += &a.weight * c(sign);
        }
        best = best.max(spectral_norm(&sum));
    }
    Ok(LambdaNorm {
        by_sign_patterns: best,
        by_total: spectral_norm(&h.b2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyBound {
    /// `‖Σ αⱼ Aⱼ‖`.
    pub lhs: f64,
    /// `‖B₂(T)‖·sup_Ω |q|`.
    pub rhs: f64,
    pub verdict: Verdict,
}

/// `‖Σ αⱼ Aⱼ‖ ≤ ‖B₂(T)‖·sup_{x∈Ω} |Σ αⱼ xʲ|`.
pub fn poly_bound_check(
    h: &CalculusHandle,
    q: &Polynomial,
    cfg: &ToleranceConfig,
) -> Result<PolyBound> {
    let deg = q.degree();
    if deg >= h.moments.len() {
        return Err(Error::Length {
            needed: deg + 1,
            got: h.moments.len(),
        });
    }
    let mut sum = CMat::zeros(h.dim(), h.dim());
    let mut mass = 0.0;
    for (alpha, a) in q.coeffs().iter().zip(&h.moments) {
        sum += a * *alpha;
        mass += alpha.norm() * spectral_norm(a);
    }
    let lhs = spectral_norm(&sum);
    let sup = h
        .support
        .iter()
        .map(|&x| q.eval_real(x).norm())
        .fold(0.0, f64::max);
    let rhs = spectral_norm(&h.b2) * sup;
    let tol = cfg.psd_tol * mass.max(1.0);
    let verdict = if lhs <= rhs + tol {
        Verdict::holds()
    } else {
        Verdict::fails(Witness::Inequality {
            description: "‖Σ αⱼAⱼ‖ <= ‖B₂‖·sup_Ω |q|".into(),
            lhs,
            rhs,
        })
    };
    Ok(PolyBound { lhs, rhs, verdict })
}

/// The bound for `q = Π (X − zᵢ)`, whose coefficients are the signed
/// elementary symmetric functions of the roots.
pub fn root_product_bound(
    h: &CalculusHandle,
    roots: &[C64],
    cfg: &ToleranceConfig,
) -> Result<PolyBound> {
    poly_bound_check(h, &Polynomial::from_roots(roots), cfg)
}

/// `‖B_{n+2}(T)‖ ≤ ‖B₂(T)‖·sup_Ω |1 − x|ⁿ`, via `B_{n+2} = Λ_T((1−X)ⁿ)`.
pub fn bracket_bound(h: &CalculusHandle, n: usize, cfg: &ToleranceConfig) -> Result<PolyBound> {
    poly_bound_check(h, &Polynomial::one_minus_x_pow(n), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheck {
    /// Distance between the partial sum and the closed form.
    pub error: f64,
    pub tail_bound: f64,
    pub verdict: Verdict,
}

/// `Σ_{n≤N} zⁿAₙ` against `R*(I − zS)⁻¹R` for `|z|·sup Ω < 1`, with the
/// geometric tail `‖B₂‖ q^{N+1}/(1−q)`, `q = |z|·sup Ω`.
pub fn resolvent_check(
    h: &CalculusHandle,
    dil: &Dilation,
    z: C64,
    cfg: &ToleranceConfig,
) -> Result<SeriesCheck> {
    let q = z.norm() * h.support_max();
    if q >= 1.0 {
        return Err(Error::Precondition(format!(
            "|z|·sup Ω = {q} is not below 1"
        )));
    }
    let mut partial = CMat::zeros(h.dim(), h.dim());
    let mut zn = c(1.0);
    for a in &h.moments {
        partial += a * zn;
        zn *= z;
    }
    let n = h.moments.len() - 1;
    let b2 = spectral_norm(&h.b2);
    let tail_bound = b2 * q.powi(n as i32 + 1) / (1.0 - q);
    let error = spectral_norm(&(partial - dil.resolvent(z, h.dim())));
    let slack = cfg.psd_tol * b2.max(1.0) / (1.0 - q);
    let verdict = if error <= tail_bound + slack {
        Verdict::holds()
    } else {
        Verdict::fails(Witness::Inequality {
            description: "‖Σ zⁿAₙ − R*(I−zS)⁻¹R‖ <= tail bound".into(),
            lhs: error,
            rhs: tail_bound + slack,
        })
    };
    Ok(SeriesCheck {
        error,
        tail_bound,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialCheck {
    pub series: SeriesCheck,
    /// `‖R* e^{ixS} R‖`.
    pub group_norm: f64,
    /// `‖R* e^{ixS} R‖ ≤ ‖B₂(T)‖`.
    pub bounded: Verdict,
}

/// `Σ_{n≤N} (ix)ⁿ/n!·Aₙ` against `R* e^{ixS} R` and the bound `‖B₂‖`.
pub fn exponential_check(
    h: &CalculusHandle,
    dil: &Dilation,
    x: f64,
    cfg: &ToleranceConfig,
) -> Result<ExponentialCheck> {
    let mut partial = CMat::zeros(h.dim(), h.dim());
    let mut term = c(1.0);
    let mut mass = 0.0;
    for (n, a) in h.moments.iter().enumerate() {
        if n > 0 {
            term *= C64::new(0.0, x) / n as f64;
        }
        partial += a * term;
        mass += term.norm() * spectral_norm(a);
    }
    let big_n = h.moments.len() - 1;
    let b2 = spectral_norm(&h.b2);
    let w = x.abs() * h.support_max();
    let mut next = 1.0;
    for k in 1..=big_n + 1 {
        next *= w / k as f64;
    }
    let tail_bound = b2 * next * w.exp();
    let group = dil.unitary_group(x, h.dim());
    let error = spectral_norm(&(partial - &group));
    let slack = cfg.psd_tol * mass.max(1.0);
    let series = SeriesCheck {
        error,
        tail_bound,
        verdict: if error <= tail_bound + slack {
            Verdict::holds()
        } else {
            Verdict::fails(Witness::Inequality {
                description: "‖Σ (ix)ⁿ/n!·Aₙ − R*e^{ixS}R‖ <= tail bound".into(),
                lhs: error,
                rhs: tail_bound + slack,
            })
        },
    };
    let group_norm = spectral_norm(&group);
    let bounded = if group_norm <= b2 + cfg.psd_tol * b2.max(1.0) {
        Verdict::holds()
    } else {
        Verdict::fails(Witness::Inequality {
            description: "‖R*e^{ixS}R‖ <= ‖B₂‖".into(),
            lhs: group_norm,
            rhs: b2,
        })
    };
    Ok(ExponentialCheck {
        series,
        group_norm,
        bounded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealGenerator {
    /// `w_T = Π (X − u)` over the atoms; `1` when `M = 0`.
    pub generator: Polynomial,
    /// `‖Σⱼ wⱼ Aⱼ‖`, zero for the generator of the annihilating ideal.
    pub residual: f64,
    pub verdict: Verdict,
}

pub fn ideal_generator(h: &CalculusHandle) -> Result<IdealGenerator> {
    let roots: Vec<C64> = h.support.iter().map(|&x| c(x)).collect();
    let generator = Polynomial::from_roots(&roots);
    let deg = generator.degree();
    if deg >= h.moments.len() {
        return Err(Error::Length {
            needed: deg + 1,
            got: h.moments.len(),
        });
    }
    let mut sum = CMat::zeros(h.dim(), h.dim());
    let mut mass = 0.0;
    for (w, a) in generator.coeffs().iter().zip(&h.moments) {
        sum += a * *w;
        mass += w.norm() * spectral_norm(a);
    }
    let residual = if roots.is_empty() {
        spectral_norm(&h.b2)
    } else {
        spectral_norm(&sum)
    };
    let bound = 1e-9 * mass.max(1.0);
    let verdict = if residual <= bound {
        Verdict::holds()
    } else {
        Verdict::fails(Witness::Inequality {
            description: "‖Σ (−1)ʲ s_{n−j} Aⱼ‖ <= tolerance".into(),
            lhs: residual,
            rhs: bound,
        })
    };
    Ok(IdealGenerator {
        generator,
        residual,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{bracket_bm, hereditary_eval, WeightRule};
    use crate::repr::naimark_dilation;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn nil3() -> LinearOperator {
        LinearOperator::dense_real(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap()
    }

    #[test]
    fn norms_agree() {
        let w = LinearOperator::shift(WeightRule::Wab { a: 3.0, b: 3.0 }).unwrap();
        let h = CalculusHandle::from_operator(&w, 12, 40, &cfg()).unwrap();
        let n = lambda_norm(&h).unwrap();
        assert!((n.by_total - 4.0).abs() < 1e-10);
        assert!((n.by_sign_patterns - n.by_total).abs() < 1e-10);
    }

    #[test]
    fn ideal_generators() {
        let h = CalculusHandle::from_operator(&nil3(), 12, 0, &cfg()).unwrap();
        let g = ideal_generator(&h).unwrap();
        assert_eq!(g.generator.degree(), 1);
        assert!((g.generator.coeffs()[0] + c(1.0)).norm() < 1e-9);
        assert!(g.verdict.holds_at_truncation());
        let two = LinearOperator::shift(WeightRule::RatioSqrt {
            num_offset: 2.0,
            den_offset: 1.0,
        })
        .unwrap();
        let h = CalculusHandle::from_operator(&two, 12, 40, &cfg()).unwrap();
        let g = ideal_generator(&h).unwrap();
        assert_eq!(g.generator, Polynomial::one());
    }

    #[test]
    fn resolvent_on_three_isometry() {
        let h = CalculusHandle::from_operator(&nil3(), 24, 0, &cfg()).unwrap();
        let dil = naimark_dilation(&h.m, &cfg());
        let r = resolvent_check(&h, &dil, c(0.5), &cfg()).unwrap();
        assert!(r.verdict.holds_at_truncation(), "{r:?}");
        assert!((dil.resolvent(c(0.5), 2) - &h.b2 * c(2.0)).norm() < 1e-9);
        assert!(resolvent_check(&h, &dil, c(1.5), &cfg()).is_err());
        let e = exponential_check(&h, &dil, 3.0, &cfg()).unwrap();
        assert!(e.series.verdict.holds_at_truncation());
        assert!(e.bounded.holds_at_truncation());
    }

    #[test]
    fn calculus_matches_hereditary() {
        let t = LinearOperator::dense_real(&[&[0.6, 0.3], &[0.3, 0.6]]).unwrap();
        let h = CalculusHandle::from_operator(&t, 24, 0, &cfg()).unwrap();
        let q = Polynomial::from_real(&[0.5, -1.0, 2.0]);
        let lhs = lambda_eval(&h, |x| q.eval_real(x));
        let rhs = hereditary_eval(&Polynomial::from_real(&[1.0, -2.0, 1.0]).mul(&q), &t, 0).unwrap();
        assert!((lhs - rhs).norm() < 1e-9);
        let b4 = bracket_bm(&t, 4, 0).unwrap();
        let bb = bracket_bound(&h, 2, &cfg()).unwrap();
        assert!((bb.lhs - spectral_norm(&b4)).abs() < 1e-9);
        assert!(bb.verdict.holds_at_truncation());
    }
}

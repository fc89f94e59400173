//! Operator-level representation theory: the semispectral measure `M` with
//! `T*ⁿB₂(T)Tⁿ = ∫ xⁿ dM`, the triplet `(B, C, F)`, Naimark dilations,
//! subnormality and the small-support classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, cmat_serde, identity, psd_factor, psd_projection, psd_verdict, spectral_norm,
};
use crate::moments::{recover_atoms, vandermonde_solver};
use crate::operator::{
    bracket_bm, bracket_times_t, difference_limit, is_m_isometry, op_moment_sequence,
    spectral_radius, LimitStatus, LinearOperator,
};
use crate::seq::{q_poly, RealSequence};
use crate::tol::ToleranceConfig;
use crate::verdict::{Verdict, Witness};
use crate::CMat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorAtom {
    pub location: f64,
    #[serde(with = "cmat_serde")]
    pub weight: CMat,
}

/// Finitely atomic semispectral measure on `[0, ∞)` with PSD matrix weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeasure {
    dim: usize,
    atoms: Vec<OperatorAtom>,
}

impl OperatorMeasure {
    pub fn zero(dim: usize) -> Self {
        OperatorMeasure {
            dim,
            atoms: Vec::new(),
        }
    }

    /// Validates PSD weights and nonnegative locations (values in
    /// `[−atom_merge_tol, 0)` snap to 0), merges close atoms and drops zero
    /// weights.
    pub fn new(dim: usize, atoms: Vec<OperatorAtom>, cfg: &ToleranceConfig) -> Result<Self> {
        let mut cleaned: Vec<OperatorAtom> = Vec::with_capacity(atoms.len());
        for mut a in atoms {
            if a.weight.nrows() != dim || a.weight.ncols() != dim {
                return Err(Error::InvalidInput(format!(
                    "weight is {}×{}, expected {dim}×{dim}",
                    a.weight.nrows(),
                    a.weight.ncols()
                )));
            }
            if !a.location.is_finite() || a.location < -cfg.atom_merge_tol {
                return Err(Error::InvalidInput(format!(
                    "atom location {} is not in [0, ∞)",
                    a.location
                )));
            }
            a.location = a.location.max(0.0);
            if psd_verdict(&a.weight, cfg.psd_tol).is_fail() {
                return Err(Error::InvalidInput(format!(
                    "weight at {} is not PSD",
                    a.location
                )));
            }
            if a.weight.norm() == 0.0 {
                continue;
            }
            cleaned.push(a);
        }
        cleaned.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<OperatorAtom> = Vec::with_capacity(cleaned.len());
        for a in cleaned {
            match merged.last_mut() {
                Some(last) if (a.location - last.location).abs() <= cfg.atom_merge_tol => {
                    let (wl, wa) = (last.weight.trace().re, a.weight.trace().re);
                    if wl + wa > 0.0 {
                        last.location = (last.location * wl + a.location * wa) / (wl + wa);
                    }
                    last.weight += &a.weight;
                }
                _ => merged.push(a),
            }
        }
        Ok(OperatorMeasure {
            dim,
            atoms: merged,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[OperatorAtom] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.location).collect()
    }

    /// `∫ f dM`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for a in &self.atoms {
            out += &a.weight * c(f(a.location));
        }
        out
    }

    /// `M(ℝ₊)`.
    pub fn total(&self) -> CMat {
        self.integrate(|_| 1.0)
    }

    pub fn moment(&self, n: usize) -> CMat {
        self.integrate(|x| x.powi(n as i32))
    }

    /// `M({x})` up to `tol`.
    pub fn weight_near(&self, x: f64, tol: f64) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for a in self.atoms.iter().filter(|a| (a.location - x).abs() < tol) {
            out += &a.weight;
        }
        out
    }

    pub fn without_near(&self, x: f64, tol: f64) -> OperatorMeasure {
        OperatorMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .filter(|a| (a.location - x).abs() >= tol)
                .cloned()
                .collect(),
        }
    }

    /// The measure with every weight replaced by its leading `size` block.
    pub fn cropped(&self, size: usize) -> OperatorMeasure {
        OperatorMeasure {
            dim: size,
            atoms: self
                .atoms
                .iter()
                .map(|a| OperatorAtom {
                    location: a.location,
                    weight: a.weight.view((0, 0), (size, size)).into_owned(),
                })
                .collect(),
        }
    }
}

fn crop(m: &CMat, size: usize) -> CMat {
    m.view((0, 0), (size, size)).into_owned()
}

/// `(B, C, F)` with `T*ⁿTⁿ = I + nB + n²C + ∫ Q_n dF`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTriplet {
    #[serde(with = "cmat_serde")]
    pub b: CMat,
    #[serde(with = "cmat_serde")]
    pub c: CMat,
    pub f: OperatorMeasure,
}

/// Dilation `(κ, R, S)` with `Aₙ = R*SⁿR`; `S` is diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dilation {
    /// `κ × d`.
    #[serde(with = "cmat_serde")]
    pub r: CMat,
    /// Diagonal of `S`.
    pub s: Vec<f64>,
    /// Atom index owning each row of `R`.
    pub atom_map: Vec<usize>,
}

impl Dilation {
    pub fn kappa(&self) -> usize {
        self.s.len()
    }

    /// `R*SⁿR`.
    pub fn moment(&self, n: usize, dim: usize) -> CMat {
        if self.s.is_empty() {
            return CMat::zeros(dim, dim);
        }
        let mut sr = self.r.clone();
        for (i, x) in self.s.iter().enumerate() {
            sr.row_mut(i).scale_mut(x.powi(n as i32));
        }
        self.r.adjoint() * sr
    }

    pub fn s_norm(&self) -> f64 {
        self.s.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// `R*(I − zS)⁻¹R`.
    pub fn resolvent(&self, z: crate::C64, dim: usize) -> CMat {
        if self.s.is_empty() {
            return CMat::zeros(dim, dim);
        }
        let mut sr = self.r.clone();
        for (i, x) in self.s.iter().enumerate() {
            let f = c(1.0) / (c(1.0) - z * *x);
            for v in sr.row_mut(i).iter_mut() {
                *v *= f;
            }
        }
        self.r.adjoint() * sr
    }

    /// `R* e^{ixS} R`.
    pub fn unitary_group(&self, x: f64, dim: usize) -> CMat {
        if self.s.is_empty() {
            return CMat::zeros(dim, dim);
        }
        let mut sr = self.r.clone();
        for (i, s) in self.s.iter().enumerate() {
            let f = crate::C64::new(0.0, x * s).exp();
            for v in sr.row_mut(i).iter_mut() {
                *v *= f;
            }
        }
        self.r.adjoint() * sr
    }
}

fn gram_scale(t: &LinearOperator, upto: usize, window: usize) -> Result<f64> {
    Ok(t.grams(upto, window)?
        .iter()
        .map(spectral_norm)
        .fold(1.0, f64::max))
}

/// Recovers `M` from `Aₙ = T*ⁿB₂(T)Tⁿ`, `n = 0..=upto`: shared locations from
/// the trace sequence, matrix weights by least squares against the
/// Vandermonde system, then PSD projection with a hard cap on how far the
/// projection may move a weight.
pub fn recover_m(
    t: &LinearOperator,
    upto: usize,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<OperatorMeasure> {
    let a = op_moment_sequence(t, upto, window)?;
    recover_m_from_moments(&a, gram_scale(t, upto + 2, window)?, cfg)
}

/// [`recover_m`] on precomputed moments; `scale` sets the zero threshold.
pub fn recover_m_from_moments(
    a: &[CMat],
    scale: f64,
    cfg: &ToleranceConfig,
) -> Result<OperatorMeasure> {
    let dim = a[0].nrows();
    let top = a.iter().map(spectral_norm).fold(0.0, f64::max);
    if top <= cfg.psd_tol * scale.max(1.0) {
        return Ok(OperatorMeasure::zero(dim));
    }
    let trace = RealSequence::new(a.iter().map(|m| m.trace().re).collect())?;
    let scalar = recover_atoms(&trace, cfg)?;
    let locations = scalar.locations();
    if let Some(x) = locations.iter().find(|&&x| x < -cfg.atom_merge_tol) {
        return Err(Error::inconclusive(
            format!("trace measure has an atom at {x} < 0"),
            f64::NAN,
            x.abs(),
        ));
    }
    let rho = locations.iter().fold(1.0, |m: f64, x| m.max(x.abs()));
    let solver = vandermonde_solver(&locations, a.len(), rho);
    let mut atoms = Vec::with_capacity(locations.len());
    for (k, &x) in locations.iter().enumerate() {
        let mut w = CMat::zeros(dim, dim);
        for (n, an) in a.iter().enumerate() {
            w += an * c(solver[(k, n)]);
        }
        let w = (&w + w.adjoint()) * c(0.5);
        let (projected, moved) = psd_projection(&w);
        let cap = cfg.rank_tol * spectral_norm(&w).max(top);
        if moved > cap {
            return Err(Error::inconclusive(
                format!("weight at {x} is indefinite beyond tolerance"),
                f64::NAN,
                moved,
            ));
        }
        atoms.push(OperatorAtom {
            location: x,
            weight: projected,
        });
    }
    let m = OperatorMeasure::new(dim, atoms, cfg)?;
    let residual = a
        .iter()
        .enumerate()
        .map(|(n, an)| spectral_norm(&(an - m.moment(n))))
        .fold(0.0, f64::max);
    if residual > cfg.rank_tol * top {
        return Err(Error::inconclusive(
            "recovered measure does not reproduce the operator moments",
            f64::NAN,
            residual,
        ));
    }
    Ok(m)
}

/// Largest reconstruction error `max_n ‖Aₙ − ∫ xⁿ dM‖`.
pub fn moment_residual(a: &[CMat], m: &OperatorMeasure) -> f64 {
    a.iter()
        .enumerate()
        .map(|(n, an)| spectral_norm(&(crop(an, m.dim()) - m.moment(n))))
        .fold(0.0, f64::max)
}

/// `C = M({1})/2`, `B = −B₁(T) − C`, `F = M` off 1.
pub fn triplet_from_m(
    t: &LinearOperator,
    m: &OperatorMeasure,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<OperatorTriplet> {
    let dim = m.dim();
    let b1 = crop(&bracket_bm(t, 1, window)?, dim);
    let cm = m.weight_near(1.0, cfg.atom_merge_tol) * c(0.5);
    Ok(OperatorTriplet {
        b: -b1 - &cm,
        c: cm,
        f: m.without_near(1.0, cfg.atom_merge_tol),
    })
}

/// `I + nB + n²C + ∫ Q_n dF`.
pub fn reconstruct_gram(t: &OperatorTriplet, n: usize) -> CMat {
    let nf = n as f64;
    identity(t.b.nrows()) + &t.b * c(nf) + &t.c * c(nf * nf) + t.f.integrate(|x| q_poly(n, x))
}

/// Per atom `(x_k, M_k)`, a block spanned by the range of `M_k^{1/2}` with
/// `S = x_k` on it.
pub fn naimark_dilation(m: &OperatorMeasure, cfg: &ToleranceConfig) -> Dilation {
    let dim = m.dim();
    let mut rows: Vec<CMat> = Vec::new();
    let mut s = Vec::new();
    let mut atom_map = Vec::new();
    for (k, a) in m.atoms().iter().enumerate() {
        let r = psd_factor(&a.weight, cfg.rank_tol);
        for _ in 0..r.nrows() {
            s.push(a.location);
            atom_map.push(k);
        }
        rows.push(r);
    }
    let kappa = s.len();
    let mut r = CMat::zeros(kappa, dim);
    let mut at = 0;
    for block in rows {
        let h = block.nrows();
        r.view_mut((at, 0), (h, dim)).copy_from(&block);
        at += h;
    }
    Dilation { r, s, atom_map }
}

/// Largest `‖Aₙ − R*SⁿR‖` over the supplied moments.
pub fn dilation_residual(a: &[CMat], dil: &Dilation) -> f64 {
    a.iter()
        .enumerate()
        .map(|(n, an)| spectral_norm(&(an - dil.moment(n, an.nrows()))))
        .fold(0.0, f64::max)
}

/// `σ(S) = supp M` and `‖S‖ = max(0, sup supp M) ≤ r(T)²`.
pub fn dilation_spectrum_check(
    t: &LinearOperator,
    dil: &Dilation,
    m: &OperatorMeasure,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<Verdict> {
    let mut spectrum = dil.s.clone();
    spectrum.dedup_by(|a, b| (*a - *b).abs() <= cfg.atom_merge_tol);
    let support = m.locations();
    if spectrum.len() != support.len()
        || spectrum
            .iter()
            .zip(&support)
            .any(|(a, b)| (a - b).abs() > cfg.atom_merge_tol)
    {
        return Ok(Verdict::fails(Witness::Inequality {
            description: "σ(S) = supp M".into(),
            lhs: spectrum.len() as f64,
            rhs: support.len() as f64,
        }));
    }
    let s_norm = dil.s_norm();
    let expected = support.iter().fold(0.0, |a: f64, &x| a.max(x));
    if (s_norm - expected).abs() > cfg.atom_merge_tol {
        return Ok(Verdict::fails(Witness::Inequality {
            description: "‖S‖ = max(0, sup supp M)".into(),
            lhs: s_norm,
            rhs: expected,
        }));
    }
    let r = spectral_radius(t, window)?;
    let bound = r.value * r.value + 1e-6;
    if s_norm > bound {
        return Ok(Verdict::fails(Witness::Inequality {
            description: "‖S‖ <= r(T)²".into(),
            lhs: s_norm,
            rhs: bound,
        }));
    }
    let v = Verdict::holds();
    Ok(if r.estimate {
        v.with_note("r(T) is a finite-window estimate")
    } else {
        v
    })
}

/// `B_m(T) = ∫ (1−x)^{m−2} dM` for `m ≥ 2`.
pub fn bm_from_m(m: &OperatorMeasure, order: usize) -> Result<CMat> {
    if order < 2 {
        return Err(Error::InvalidInput(format!(
            "bracket order must be at least 2, got {order}"
        )));
    }
    Ok(m.integrate(|x| (1.0 - x).powi(order as i32 - 2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubnormalDecision {
    pub verdict: Verdict,
    /// `‖T‖ ≤ 1`: with CPD this alone forces subnormality.
    pub contraction: bool,
    /// Radial pushforward `G∘φ⁻¹` when subnormal.
    pub pushforward: Option<OperatorMeasure>,
}

/// Subnormal iff `C = 0`, `∫ dF/(x−1)² ≤ I` and `B = ∫ dF/(x−1)`.
pub fn subnormality_decision(
    t: &LinearOperator,
    triplet: &OperatorTriplet,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<SubnormalDecision> {
    if triplet
        .f
        .atoms()
        .iter()
        .any(|a| (a.location - 1.0).abs() < cfg.atom_merge_tol)
    {
        return Err(Error::Structural("F carries an atom at 1".into()));
    }
    let dim = triplet.b.nrows();
    let s1 = triplet.f.integrate(|x| 1.0 / (x - 1.0));
    let s2 = triplet.f.integrate(|x| 1.0 / ((x - 1.0) * (x - 1.0)));
    let tol = cfg.rank_tol
        * 1f64
            .max(spectral_norm(&triplet.b))
            .max(spectral_norm(&s1))
            .max(spectral_norm(&s2));
    let contraction = t.norm(window)? <= 1.0 + cfg.psd_tol;
    let c_norm = spectral_norm(&triplet.c);
    let gap = identity(dim) - &s2;
    let b_gap = spectral_norm(&(&triplet.b - &s1));
    let verdict = if c_norm > tol {
        Verdict::fails(Witness::Inequality {
            description: "‖C‖ <= 0".into(),
            lhs: c_norm,
            rhs: tol,
        })
    } else if b_gap > tol {
        Verdict::fails(Witness::Inequality {
            description: "‖B - ∫ dF/(x-1)‖ <= 0".into(),
            lhs: b_gap,
            rhs: tol,
        })
    } else {
        let psd = psd_verdict(&gap, cfg.psd_tol.max(tol));
        if psd.is_fail() {
            psd.with_note("∫ dF/(x-1)² <= I violated")
        } else {
            Verdict::holds()
        }
    };
    let verdict = if contraction && verdict.is_fail() {
        Verdict::inconclusive(
            "T is a contraction (subnormality forced for CPD T) but the triplet test fails",
        )
    } else {
        verdict
    };
    let pushforward = if verdict.holds_at_truncation() {
        let mut atoms: Vec<OperatorAtom> = triplet
            .f
            .atoms()
            .iter()
            .map(|a| OperatorAtom {
                location: a.location,
                weight: &a.weight * c(1.0 / ((a.location - 1.0) * (a.location - 1.0))),
            })
            .collect();
        let (rest, _) = psd_projection(&gap);
        atoms.push(OperatorAtom {
            location: 1.0,
            weight: rest,
        });
        Some(OperatorMeasure::new(dim, atoms, cfg)?)
    } else {
        None
    };
    Ok(SubnormalDecision {
        verdict,
        contraction,
        pushforward,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundiffOperator {
    pub verdict: Verdict,
    #[serde(with = "option_cmat", skip_serializing_if = "Option::is_none", default)]
    pub d: Option<CMat>,
    /// Set when `D ≠ 0`, which forces `r(T) = 1`.
    pub spectral_radius_one: Option<bool>,
}

mod option_cmat {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::cmat_serde;
    use crate::{CMat, C64};

    pub fn serialize<S: Serializer>(m: &Option<CMat>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(cmat_serde::rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMat>, D::Error> {
        let rows = Option::<Vec<Vec<C64>>>::deserialize(d)?;
        Ok(rows.map(|rows| {
            let n = rows.len();
            let m = rows.first().map_or(0, |r| r.len());
            CMat::from_fn(n, m, |i, j| rows[i][j])
        }))
    }
}

/// `C = 0`, `supp F ⊆ [0, 1)` and `D = B + ∫ dF/(1−x)`, compared against the
/// limit of `T*ⁿ⁺¹Tⁿ⁺¹ − T*ⁿTⁿ`.
pub fn boundiff_form_operator(
    t: &LinearOperator,
    triplet: &OperatorTriplet,
    upto: usize,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<BoundiffOperator> {
    let tol = cfg.rank_tol * spectral_norm(&triplet.b).max(1.0);
    let fail = |w: Witness| BoundiffOperator {
        verdict: Verdict::fails(w),
        d: None,
        spectral_radius_one: None,
    };
    let c_norm = spectral_norm(&triplet.c);
    if c_norm > tol {
        return Ok(fail(Witness::Inequality {
            description: "‖C‖ <= 0".into(),
            lhs: c_norm,
            rhs: tol,
        }));
    }
    if let Some(a) = triplet
        .f
        .atoms()
        .iter()
        .find(|a| a.location >= 1.0 - cfg.atom_merge_tol)
    {
        return Ok(fail(Witness::Inequality {
            description: "F atom location < 1".into(),
            lhs: a.location,
            rhs: 1.0,
        }));
    }
    let d = &triplet.b + triplet.f.integrate(|x| 1.0 / (1.0 - x));
    let psd = psd_verdict(&d, cfg.psd_tol);
    if psd.is_fail() {
        return Ok(BoundiffOperator {
            verdict: psd.with_note("D is not PSD"),
            d: Some(d),
            spectral_radius_one: None,
        });
    }
    let limit = difference_limit(t, upto, window, cfg)?;
    let k = limit.estimate.nrows().min(d.nrows());
    let gap = spectral_norm(&(crop(&limit.estimate, k) - crop(&d, k)));
    let slack = match &limit.status {
        LimitStatus::Converged => 0.0,
        LimitStatus::Geometric { tail_bound, .. } => *tail_bound,
        LimitStatus::Divergent { .. } => f64::INFINITY,
    };
    let nonzero = spectral_norm(&d) > tol;
    let spectral_radius_one = if nonzero {
        let r = spectral_radius(t, window)?;
        Some((r.value - 1.0).abs() <= if r.estimate { 0.2 } else { 1e-6 })
    } else {
        None
    };
    let verdict = if gap <= slack + tol.max(cfg.psd_tol) {
        Verdict::holds()
    } else {
        Verdict::inconclusive(format!(
            "D differs from the difference limit by {gap:e} (tail bound {slack:e})"
        ))
    };
    Ok(BoundiffOperator {
        verdict,
        d: Some(d),
        spectral_radius_one,
    })
}

/// Pushforward of `(1 + x + … + x^{i−1})² dM` under `x ↦ xⁱ`: the measure of
/// `Tⁱ`.
pub fn power_pushforward(
    m: &OperatorMeasure,
    i: usize,
    cfg: &ToleranceConfig,
) -> Result<OperatorMeasure> {
    if i == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    let atoms = m
        .atoms()
        .iter()
        .map(|a| {
            let geo: f64 = (0..i).map(|k| a.location.powi(k as i32)).sum();
            OperatorAtom {
                location: a.location.powi(i as i32),
                weight: &a.weight * c(geo * geo),
            }
        })
        .collect();
    OperatorMeasure::new(m.dim(), atoms, cfg)
}

/// Largest distance between two measures compared atom by atom.
pub fn measure_distance(a: &OperatorMeasure, b: &OperatorMeasure) -> f64 {
    if a.atoms().len() != b.atoms().len() {
        return f64::INFINITY;
    }
    a.atoms()
        .iter()
        .zip(b.atoms())
        .map(|(x, y)| {
            let k = x.weight.nrows().min(y.weight.nrows());
            (x.location - y.location)
                .abs()
                .max(spectral_norm(&(crop(&x.weight, k) - crop(&y.weight, k))))
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportClass {
    /// `M = 0`.
    IsometryOr2Isometry,
    /// `supp M ⊆ {1}`.
    #[serde(rename = "3-isometry")]
    ThreeIsometry,
    /// `supp M ⊆ {0}`: `B₂(T)T = 0`, `B₂(T) ≥ 0`.
    Kop2izoClass,
    General,
}

impl SupportClass {
    pub fn label(&self) -> &'static str {
        match self {
            SupportClass::IsometryOr2Isometry => "isometry-or-2-isometry",
            SupportClass::ThreeIsometry => "3-isometry",
            SupportClass::Kop2izoClass => "kop-2izo-class",
            SupportClass::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: SupportClass,
    /// Agreement of the support reading with the bracket conditions.
    pub cross_check: Verdict,
    /// For the `{0}` class: `B₁(T)T = 0` and `‖T‖ ≤ 1`, i.e. subnormal.
    pub subnormal_subcriterion: Option<bool>,
}

fn gram_form_gap(
    t: &LinearOperator,
    window: usize,
    upto: usize,
    form: impl Fn(usize) -> Option<CMat>,
) -> Result<f64> {
    let g = t.grams(upto, window)?;
    let mut worst: f64 = 0.0;
    for (n, gn) in g.iter().enumerate() {
        if let Some(f) = form(n) {
            let k = f.nrows().min(gn.nrows());
            worst = worst.max(spectral_norm(&(crop(gn, k) - crop(&f, k))));
        }
    }
    Ok(worst)
}

/// Reads the class from `supp M` and cross-checks it against the equivalent
/// bracket conditions.
pub fn classify_small_support(
    t: &LinearOperator,
    m: &OperatorMeasure,
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<Classification> {
    let at = |x: f64| {
        m.atoms()
            .iter()
            .all(|a| (a.location - x).abs() < cfg.atom_merge_tol)
    };
    let upto = 6;
    let scale = gram_scale(t, upto, window)?;
    let tol = cfg.rank_tol * scale;
    let b2 = bracket_bm(t, 2, window)?;
    let b1 = crop(&bracket_bm(t, 1, window)?, b2.nrows());
    let mismatch = |what: &str, lhs: f64| {
        Verdict::inconclusive(format!("support reading disagrees with {what}"))
            .with_note(format!("support class vs bracket check: residual {lhs:e}"))
    };
    let (class, cross_check, subnormal_subcriterion) = if m.is_zero() {
        let v = is_m_isometry(t, 2, window, false, cfg)?;
        let cc = if v.holds_at_truncation() {
            Verdict::holds()
        } else {
            mismatch("B₂(T) = 0", f64::NAN)
        };
        (SupportClass::IsometryOr2Isometry, cc, None)
    } else if at(1.0) {
        let gap = gram_form_gap(t, window, upto, |n| {
            let nf = n as f64;
            Some(identity(b1.nrows()) - &b1 * c(nf) + &b2 * c(nf * (nf - 1.0) / 2.0))
        })?;
        let iso = is_m_isometry(t, 3, window, false, cfg)?;
        let cc = if gap <= tol && iso.holds_at_truncation() {
            Verdict::holds()
        } else {
            mismatch("I − nB₁ + n(n−1)/2·B₂", gap)
        };
        (SupportClass::ThreeIsometry, cc, None)
    } else if at(0.0) {
        let b2t = spectral_norm(&bracket_times_t(t, 2, window)?);
        let psd = psd_verdict(&b2, cfg.psd_tol);
        let gap = gram_form_gap(t, window, upto, |n| {
            (n >= 1).then(|| identity(b1.nrows()) - &b2 + (&b2 - &b1) * c(n as f64))
        })?;
        let cc = if b2t <= tol && psd.holds_at_truncation() && gap <= tol {
            Verdict::holds()
        } else {
            mismatch("B₂(T)T = 0, B₂(T) ≥ 0", b2t.max(gap))
        };
        let b1t = spectral_norm(&bracket_times_t(t, 1, window)?);
        let sub = b1t <= tol && t.norm(window)? <= 1.0 + cfg.psd_tol;
        (SupportClass::Kop2izoClass, cc, Some(sub))
    } else {
        (SupportClass::General, Verdict::holds(), None)
    };
    Ok(Classification {
        class,
        cross_check,
        subnormal_subcriterion,
    })
}

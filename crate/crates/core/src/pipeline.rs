//! JSON analysis requests, the fixture gallery, and deterministic reports.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calculus::{
    exponential_check, ideal_generator, lambda_norm, poly_bound_check, resolvent_check,
    CalculusHandle,
};
use crate::error::{Error, Result};
use crate::linalg::{c, spectral_norm};
use crate::moments::{
    bounded_difference_form, growth_warning, gyeon_scaling_probe, monotone_cpd_check,
    pd_decision, triplet_from_sequence, DifferenceSupport,
};
use crate::operator::{
    complete_hyperexpansive_dual_check, default_probes, difference_limit,
    hyperexpansive_window, is_cpd_operator, is_m_isometry, associated_shift_weights,
    bracket_bm, spectral_radius, LimitStatus, LinearOperator, ProbeVector, WeightRule,
};
use crate::polynomial::Polynomial;
use crate::qclass::{
    a_diagonal, build_qclass, qclass_cpd_test, qclass_m, qclass_subnormal_region, validate_pacz,
};
use crate::repr::{
    bm_from_m, boundiff_form_operator, classify_small_support, dilation_residual,
    dilation_spectrum_check, measure_distance, naimark_dilation, power_pushforward, recover_m,
    subnormality_decision, triplet_from_m,
};
use crate::seq::{
    growth_rate, is_cpd_truncated, is_pd_truncated, is_stieltjes_truncated, schoenberg_probe,
    RealSequence, DEFAULT_TRUNCATION,
};
use crate::tol::ToleranceConfig;
use crate::verdict::Verdict;
use crate::{CMat, C64};

pub const SCHEMA_VERSION: u32 = 1;

/// Random probes added to the canonical basis for operator CPD tests.
pub const RANDOM_PROBES: usize = 8;

/// Sequence given by a formula instead of a value list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceRule {
    /// `Σ cₖ nᵏ`.
    Polynomial { coeffs: Vec<f64> },
    /// `scale·θⁿ`.
    Geometric {
        theta: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `θⁿ / (θ − 1)²`.
    ThetaKernel { theta: f64 },
}

fn unit() -> f64 {
    1.0
}

impl SequenceRule {
    pub fn sequence(&self, truncation: usize) -> Result<RealSequence> {
        match self {
            SequenceRule::Polynomial { coeffs } => RealSequence::from_fn(truncation, |n| {
                coeffs
                    .iter()
                    .rev()
                    .fold(0.0, |acc, ck| acc * n as f64 + ck)
            }),
            SequenceRule::Geometric { theta, scale } => {
                RealSequence::from_fn(truncation, |n| scale * theta.powi(n as i32))
            }
            SequenceRule::ThetaKernel { theta } => {
                if *theta == 1.0 {
                    return Err(Error::InvalidInput("θ = 1 is excluded".into()));
                }
                RealSequence::from_fn(truncation, |n| {
                    theta.powi(n as i32) / ((theta - 1.0) * (theta - 1.0))
                })
            }
        }
    }
}

/// Matrix entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => c(x),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }

    fn from_c64(z: C64) -> Self {
        if z.im == 0.0 {
            Entry::Real(z.re)
        } else {
            Entry::Complex([z.re, z.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subject {
    Sequence {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rule: Option<SequenceRule>,
    },
    DenseOperator {
        rows: Vec<Vec<Entry>>,
    },
    WeightedShift {
        weights: WeightRule,
    },
    QclassPair {
        s: Vec<f64>,
        t: Vec<f64>,
    },
}

impl Subject {
    pub fn kind(&self) -> &'static str {
        match self {
            Subject::Sequence { .. } => "sequence",
            Subject::DenseOperator { .. } => "dense_operator",
            Subject::WeightedShift { .. } => "weighted_shift",
            Subject::QclassPair { .. } => "qclass_pair",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    // sequences
    Pd,
    Cpd,
    Stieltjes,
    Schoenberg,
    Growth,
    Triplet,
    PdDecision,
    BoundedDifference,
    Gyeon,
    Monotone,
    // operators
    Isometry,
    Hyperexpansive,
    Norm,
    Spectral,
    DifferenceLimit,
    AssociatedShift,
    DualHyperexpansive,
    Measure,
    Classification,
    Subnormal,
    Boundiff,
    Dilation,
    Calculus,
    Powers,
    // class Q
    Blocks,
    Regions,
}

impl Analysis {
    fn applies_to(self, kind: &str) -> bool {
        use Analysis::*;
        match kind {
            "sequence" => matches!(
                self,
                Pd | Cpd
                    | Stieltjes
                    | Schoenberg
                    | Growth
                    | Triplet
                    | PdDecision
                    | BoundedDifference
                    | Gyeon
                    | Monotone
            ),
            "qclass_pair" => matches!(self, Blocks | Cpd | Measure | Regions),
            _ => !matches!(
                self,
                Pd | Stieltjes
                    | Schoenberg
                    | Growth
                    | PdDecision
                    | BoundedDifference
                    | Gyeon
                    | Monotone
                    | Blocks
                    | Regions
            ),
        }
    }
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub subject: Subject,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub seed: u64,
    /// Empty means every analysis applicable to the subject.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analyses: Vec<Analysis>,
}

impl AnalysisRequest {
    pub fn new(subject: Subject) -> Self {
        AnalysisRequest {
            name: None,
            subject,
            truncation: DEFAULT_TRUNCATION,
            window: None,
            tolerances: ToleranceConfig::default(),
            seed: 0,
            analyses: Vec::new(),
        }
    }

    /// Parses a JSON request. Numbers may be written as decimal strings.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        decimal_strings_to_numbers(&mut value, None);
        serde_path_to_error::deserialize(value.clone()).map_err(|e| {
            let path = e.path().to_string();
            match (path.as_str(), locate_subject_error(&value)) {
                ("." | "", Some(located)) => located,
                _ => Error::Parse {
                    location: path,
                    message: e.inner().to_string(),
                },
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("request serializes")
    }

    /// Window actually used: ignored for dense operators, defaulted for
    /// banded ones.
    pub fn effective_window(&self) -> usize {
        match &self.subject {
            Subject::Sequence { .. } | Subject::DenseOperator { .. } => 0,
            Subject::WeightedShift { .. } => self.window.unwrap_or(self.truncation + 40),
            Subject::QclassPair { s, .. } => self
                .window
                .unwrap_or((self.truncation + 8) * s.len().max(1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        let input = |location: &str, message: String| Error::Parse {
            location: location.into(),
            message,
        };
        if self.truncation < 4 {
            return Err(input(
                "truncation",
                format!("must be at least 4, got {}", self.truncation),
            ));
        }
        let kind = self.subject.kind();
        for (i, a) in self.analyses.iter().enumerate() {
            if !a.applies_to(kind) {
                return Err(input(
                    &format!("analyses[{i}]"),
                    format!("{a:?} does not apply to {kind}"),
                ));
            }
        }
        match &self.subject {
            Subject::Sequence { values, rule } => match (values, rule) {
                (Some(v), None) if v.len() < 5 => Err(input(
                    "values",
                    format!("need at least 5 terms, got {}", v.len()),
                )),
                (Some(_), None) | (None, Some(_)) => Ok(()),
                _ => Err(input(
                    "values",
                    "give exactly one of `values` and `rule`".into(),
                )),
            },
            Subject::DenseOperator { rows } => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    Err(input("rows", "dense operator must be a nonempty square matrix".into()))
                } else {
                    Ok(())
                }
            }
            Subject::WeightedShift { .. } => {
                let w = self.effective_window();
                if w < self.truncation + 4 {
                    Err(input(
                        "window",
                        format!("must be at least truncation + 4 = {}", self.truncation + 4),
                    ))
                } else {
                    Ok(())
                }
            }
            Subject::QclassPair { s, t } => {
                if s.len() != t.len() || s.is_empty() {
                    Err(input("s", "s and t must be nonempty and of equal length".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The operator under analysis and its effective window; `None` for
    /// sequences.
    pub fn operator(&self) -> Result<Option<(LinearOperator, usize)>> {
        let window = self.effective_window();
        Ok(match &self.subject {
            Subject::Sequence { .. } => None,
            Subject::DenseOperator { rows } => {
                let n = rows.len();
                let m = CMat::from_fn(n, n, |i, j| rows[i][j].value());
                Some((LinearOperator::dense(m)?, window))
            }
            Subject::WeightedShift { weights } => {
                Some((LinearOperator::shift(weights.clone())?, window))
            }
            Subject::QclassPair { s, t } => Some((build_qclass(s, t)?.op, window)),
        })
    }

    fn wants(&self, a: Analysis) -> bool {
        self.analyses.is_empty() || self.analyses.contains(&a)
    }
}

/// Flattened, tagged subjects lose the error path; re-parse the subject's
/// fields on their own to recover it.
fn locate_subject_error(value: &Value) -> Option<Error> {
    #[derive(Deserialize)]
    #[allow(dead_code)]
    struct SequenceFields {
        values: Option<Vec<f64>>,
        rule: Option<SequenceRule>,
    }
    #[derive(Deserialize)]
    #[allow(dead_code)]
    struct DenseFields {
        rows: Vec<Vec<Entry>>,
    }
    #[derive(Deserialize)]
    #[allow(dead_code)]
    struct ShiftFields {
        weights: WeightRule,
    }
    #[derive(Deserialize)]
    #[allow(dead_code)]
    struct QclassFields {
        s: Vec<f64>,
        t: Vec<f64>,
    }
    fn probe<T: serde::de::DeserializeOwned>(v: &Value) -> Option<Error> {
        serde_path_to_error::deserialize::<_, T>(v.clone())
            .err()
            .map(|e| Error::Parse {
                location: e.path().to_string(),
                message: e.inner().to_string(),
            })
    }
    match value.get("kind").and_then(Value::as_str)? {
        "sequence" => probe::<SequenceFields>(value),
        "dense_operator" => probe::<DenseFields>(value),
        "weighted_shift" => probe::<ShiftFields>(value),
        "qclass_pair" => probe::<QclassFields>(value),
        _ => None,
    }
}

fn is_decimal(s: &str) -> bool {
    let s = s.trim();
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let digits_ok = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    let mantissa_ok = match mantissa.split_once('.') {
        Some((a, b)) => (digits_ok(a) || a.is_empty()) && (digits_ok(b) || b.is_empty()) && !(a.is_empty() && b.is_empty()),
        None => digits_ok(mantissa),
    };
    let exponent_ok = exponent.is_none_or(|e| digits_ok(e.strip_prefix(['-', '+']).unwrap_or(e)));
    mantissa_ok && exponent_ok
}

fn decimal_strings_to_numbers(value: &mut Value, key: Option<&str>) {
    if matches!(key, Some("kind" | "family" | "name" | "analyses")) {
        return;
    }
    match value {
        Value::String(s) if is_decimal(s) => {
            let t = s.trim();
            let number = t
                .parse::<u64>()
                .map(serde_json::Number::from)
                .ok()
                .or_else(|| t.parse::<i64>().map(serde_json::Number::from).ok())
                .or_else(|| t.parse::<f64>().ok().and_then(serde_json::Number::from_f64));
            if let Some(n) = number {
                *value = Value::Number(n);
            }
        }
        Value::Array(items) => items
            .iter_mut()
            .for_each(|v| decimal_strings_to_numbers(v, None)),
        Value::Object(map) => map
            .iter_mut()
            .for_each(|(k, v)| decimal_strings_to_numbers(v, Some(k))),
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub crate_version: String,
    pub seed: u64,
    pub truncation: usize,
    pub window: usize,
    pub tolerances: ToleranceConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub subject: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub provenance: Provenance,
    /// One short value per analysis, for pinning and quick reading.
    pub headline: BTreeMap<String, String>,
    pub analyses: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let title = self.name.as_deref().unwrap_or("(unnamed)");
        out.push_str(&format!(
            "condpd report (schema {}): {} [{}]\n",
            self.schema_version, title, self.subject
        ));
        let p = &self.provenance;
        out.push_str(&format!(
            "seed {}  truncation {}  window {}  psd_tol {:e}  rank_tol {:e}  atom_merge_tol {:e}\n",
            p.seed,
            p.truncation,
            p.window,
            p.tolerances.psd_tol,
            p.tolerances.rank_tol,
            p.tolerances.atom_merge_tol
        ));
        if let Some(probes) = &p.probes {
            out.push_str(&format!("probes: {probes}\n"));
        }
        out.push('\n');
        let width = self.headline.keys().map(|k| k.len()).max().unwrap_or(0);
        for (k, v) in &self.headline {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        let notes: Vec<String> = self
            .analyses
            .iter()
            .filter_map(|(key, value)| {
                let note = value.get("note").and_then(Value::as_str)?;
                Some(format!("  note [{key}]: {note}\n"))
            })
            .collect();
        if !notes.is_empty() {
            out.push('\n');
            notes.iter().for_each(|n| out.push_str(n));
        }
        if !self.warnings.is_empty() {
            out.push_str("\nwarnings:\n");
            for w in &self.warnings {
                out.push_str(&format!("  - {w}\n"));
            }
        }
        out
    }

    pub fn headline(&self, key: &str) -> Option<&str> {
        self.headline.get(key).map(String::as_str)
    }
}

/// Rounded decimal used in headlines, with `-0` normalized.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn fmt_list(xs: &[f64]) -> String {
    format!(
        "[{}]",
        xs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ")
    )
}

#[derive(Default)]
struct Outcome {
    headline: BTreeMap<String, String>,
    analyses: BTreeMap<String, Value>,
    warnings: Vec<String>,
}

impl Outcome {
    fn error(&mut self, key: &str, e: &Error) {
        self.headline.insert(key.into(), "error".into());
        self.analyses
            .insert(key.into(), json!({ "status": "inconclusive", "error": e.to_string() }));
    }

    fn skip(&mut self, key: &str, reason: &str) {
        self.headline.insert(key.into(), "skipped".into());
        self.analyses.insert(key.into(), json!({ "skipped": reason }));
    }

    fn verdict(&mut self, key: &str, v: Result<Verdict>) -> Option<Verdict> {
        match v {
            Ok(v) => {
                self.headline.insert(key.into(), v.label().into());
                self.analyses
                    .insert(key.into(), serde_json::to_value(&v).expect("serializable"));
                Some(v)
            }
            Err(e) => {
                self.error(key, &e);
                None
            }
        }
    }

    fn object<T: Serialize>(
        &mut self,
        key: &str,
        r: Result<T>,
        headline: impl FnOnce(&T) -> String,
    ) -> Option<T> {
        match r {
            Ok(v) => {
                self.headline.insert(key.into(), headline(&v));
                self.analyses
                    .insert(key.into(), serde_json::to_value(&v).expect("serializable"));
                Some(v)
            }
            Err(e) => {
                self.error(key, &e);
                None
            }
        }
    }
}

/// Runs every requested analysis. Per-analysis failures are recorded in the
/// report; only invalid requests return an error.
pub fn run(request: &AnalysisRequest) -> Result<Report> {
    request.validate()?;
    let mut out = Outcome::default();
    let window = request.effective_window();
    let mut probes = None;
    match &request.subject {
        Subject::Sequence { values, rule } => {
            let seq = match (values, rule) {
                (Some(v), _) => RealSequence::new(v.clone())?,
                (None, Some(r)) => r.sequence(request.truncation)?,
                _ => unreachable!("validated"),
            };
            run_sequence(request, &seq, &mut out);
        }
        Subject::DenseOperator { .. } | Subject::WeightedShift { .. } => {
            let (t, _) = request.operator()?.expect("operator subject");
            let basis = if t.is_dense() {
                "canonical basis"
            } else {
                "leading basis vectors"
            };
            probes = Some(format!(
                "{basis} + {RANDOM_PROBES} seeded random unit vectors"
            ));
            run_operator(request, &t, window, &mut out);
        }
        Subject::QclassPair { s, t } => {
            run_qclass(request, s, t, window, &mut out)?;
        }
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        subject: request.subject.kind().into(),
        name: request.name.clone(),
        provenance: Provenance {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            seed: request.seed,
            truncation: request.truncation,
            window,
            tolerances: request.tolerances,
            probes,
        },
        headline: out.headline,
        analyses: out.analyses,
        warnings: out.warnings,
    })
}

fn run_sequence(req: &AnalysisRequest, seq: &RealSequence, out: &mut Outcome) {
    let cfg = &req.tolerances;
    if req.wants(Analysis::Pd) {
        out.verdict("pd", is_pd_truncated(seq, cfg));
    }
    let cpd = is_cpd_truncated(seq, cfg);
    let cpd_holds = cpd.as_ref().is_ok_and(|v| v.holds_at_truncation());
    if req.wants(Analysis::Cpd) {
        out.verdict("cpd", cpd);
    }
    if req.wants(Analysis::Stieltjes) {
        out.verdict("stieltjes", is_stieltjes_truncated(seq, cfg));
    }
    if req.wants(Analysis::Schoenberg) {
        out.verdict("schoenberg", schoenberg_probe(seq, &[0.001, 0.01, 0.1], cfg));
    }
    if req.wants(Analysis::Growth) {
        out.object("growth", growth_rate(seq), |g| format!("{} (estimate)", fmt_num(g.value)));
    }
    if req.wants(Analysis::Gyeon) {
        out.object(
            "gyeon",
            gyeon_scaling_probe(seq, &[0.25, 0.5, 0.9, -0.5], cfg),
            |g| g.verdict.label().into(),
        );
    }
    let needs_triplet = [
        Analysis::Triplet,
        Analysis::PdDecision,
        Analysis::BoundedDifference,
        Analysis::Monotone,
    ]
    .iter()
    .any(|a| req.wants(*a));
    if !needs_triplet {
        return;
    }
    if !cpd_holds {
        for (a, key) in [
            (Analysis::Triplet, "triplet"),
            (Analysis::PdDecision, "pd_decision"),
            (Analysis::BoundedDifference, "bounded_difference"),
            (Analysis::Monotone, "monotone"),
        ] {
            if req.wants(a) {
                out.skip(key, "sequence is not CPD at truncation");
            }
        }
        return;
    }
    let triplet = out.object(
        "triplet",
        triplet_from_sequence(seq, cfg).map(|t| json!({ "triplet": t, "validated_at": cfg })),
        |v| {
            let t: crate::RepresentingTriplet =
                serde_json::from_value(v["triplet"].clone()).expect("roundtrip");
            format!(
                "b={}, c={}, nu={}",
                fmt_num(t.b),
                fmt_num(t.c),
                describe_atoms(&t.nu)
            )
        },
    );
    let triplet: Option<crate::RepresentingTriplet> =
        triplet.map(|v| serde_json::from_value(v["triplet"].clone()).expect("roundtrip"));
    if !req.wants(Analysis::Triplet) {
        out.headline.remove("triplet");
        out.analyses.remove("triplet");
    }
    if let Some(t) = &triplet {
        if let Some(w) = growth_warning(t, seq) {
            out.warnings.push(w);
        }
    }
    let gamma0 = seq.values()[0];
    if req.wants(Analysis::PdDecision) {
        match &triplet {
            Some(t) => {
                out.object("pd_decision", pd_decision(t, gamma0, cfg), |d| {
                    match (&d.measure, d.verdict.holds_at_truncation()) {
                        (Some(m), true) => format!("pd, mu={}", describe_atoms(m)),
                        _ => d.verdict.label().into(),
                    }
                });
            }
            None => out.skip("pd_decision", "triplet unavailable"),
        }
    }
    if req.wants(Analysis::BoundedDifference) {
        for (support, key) in [
            (DifferenceSupport::HalfOpenUnit, "bounded_difference"),
            (DifferenceSupport::OpenSymmetric, "convergent_difference"),
        ] {
            out.object(key, bounded_difference_form(seq, support, cfg), |b| {
                match (&b.pair, b.verdict.holds_at_truncation()) {
                    (Some(p), true) => format!("d={}", fmt_num(p.d)),
                    _ => b.verdict.label().into(),
                }
            });
        }
    }
    if req.wants(Analysis::Monotone) {
        out.object("monotone", monotone_cpd_check(seq, cfg), |m| {
            m.verdict.label().into()
        });
    }
}

fn describe_atoms(m: &crate::AtomicMeasure) -> String {
    if m.is_empty() {
        return "empty".into();
    }
    m.atoms()
        .iter()
        .map(|a| format!("{}@{}", fmt_num(a.mass), fmt_num(a.location)))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn matrix_json(m: &CMat) -> Value {
    serde_json::to_value(crate::linalg::cmat_serde::rows(m)).expect("serializable")
}

/// `m` in `[2, 8]` where `‖bm_from_M − B_m(T)‖` is largest, relative to
/// `max(1, ‖B_m‖)`.
fn bracket_identity_error(
    t: &LinearOperator,
    m: &crate::OperatorMeasure,
    window: usize,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for order in 2..=8 {
        let direct = bracket_bm(t, order, window)?;
        let k = direct.nrows().min(m.dim());
        let from_m = bm_from_m(&m.cropped(k), order)?;
        let d = direct.view((0, 0), (k, k)).into_owned();
        worst = worst.max(spectral_norm(&(from_m - &d)) / spectral_norm(&d).max(1.0));
    }
    Ok(worst)
}

fn run_operator(req: &AnalysisRequest, t: &LinearOperator, window: usize, out: &mut Outcome) {
    let cfg = &req.tolerances;
    let upto = req.truncation;
    let probes = default_probes(t, RANDOM_PROBES, req.seed);
    let cpd = is_cpd_operator(t, &probes, upto, cfg);
    let cpd_holds = cpd.as_ref().is_ok_and(|v| v.holds_at_truncation());
    if req.wants(Analysis::Cpd) {
        out.verdict("cpd", cpd);
    }
    if req.wants(Analysis::Isometry) {
        let found = (1..=6).find(|&m| {
            is_m_isometry(t, m, window, false, cfg).is_ok_and(|v| v.holds_at_truncation())
        });
        let value = json!({ "smallest_m": found, "searched_up_to": 6 });
        out.headline.insert(
            "m_isometry".into(),
            found.map_or("none up to 6".into(), |m| format!("strict {m}-isometry")),
        );
        out.analyses.insert("m_isometry".into(), value);
    }
    if req.wants(Analysis::Hyperexpansive) {
        out.object("hyperexpansive", hyperexpansive_window(t, 4, window, cfg), |vs| {
            let failing: Vec<String> = vs
                .iter()
                .filter(|b| !b.verdict.holds_at_truncation())
                .map(|b| b.m.to_string())
                .collect();
            if failing.is_empty() {
                "holds_at_truncation (m <= 4)".into()
            } else {
                format!("fails at m = {}", failing.join(", "))
            }
        });
    }
    if req.wants(Analysis::Norm) {
        out.object("norm_squared", t.norm(window).map(|n| n * n), |n| fmt_num(*n));
    }
    if req.wants(Analysis::Spectral) {
        out.object("spectral_radius", spectral_radius(t, window), |r| {
            if r.estimate {
                format!("{} (estimate)", fmt_num(r.value))
            } else {
                fmt_num(r.value)
            }
        });
    }
    if req.wants(Analysis::AssociatedShift) {
        out.object(
            "associated_shift",
            associated_shift_weights(t, &ProbeVector::basis(0), upto, cfg),
            |a| a.subnormal.label().into(),
        );
    }
    if req.wants(Analysis::DualHyperexpansive) {
        let basis: Vec<ProbeVector> = probes
            .iter()
            .filter(|p| p.coeffs.iter().filter(|z| z.norm() > 0.0).count() == 1)
            .cloned()
            .collect();
        let v = basis
            .iter()
            .map(|h| complete_hyperexpansive_dual_check(t, h, upto, cfg))
            .collect::<Result<Vec<_>>>()
            .map(Verdict::all);
        out.verdict("dual_hyperexpansive", v);
    }
    let m_keys = [
        (Analysis::DifferenceLimit, "difference_limit"),
        (Analysis::Measure, "measure"),
        (Analysis::Triplet, "triplet"),
        (Analysis::Classification, "classification"),
        (Analysis::Subnormal, "subnormal"),
        (Analysis::Boundiff, "boundiff"),
        (Analysis::Dilation, "dilation"),
        (Analysis::Calculus, "calculus"),
        (Analysis::Powers, "powers"),
    ];
    if !cpd_holds {
        for (a, key) in m_keys {
            if req.wants(a) {
                out.skip(key, "operator is not CPD at truncation");
            }
        }
        return;
    }
    if req.wants(Analysis::DifferenceLimit) {
        match difference_limit(t, upto, window, cfg) {
            Ok(d) => {
                let status = match &d.status {
                    LimitStatus::Converged => "converged".to_string(),
                    LimitStatus::Geometric { ratio, .. } => format!("geometric (ratio {})", fmt_num(*ratio)),
                    LimitStatus::Divergent { .. } => "divergent".to_string(),
                };
                out.headline.insert("difference_limit".into(), status);
                out.analyses.insert(
                    "difference_limit".into(),
                    json!({
                        "monotone": d.monotone,
                        "status": d.status,
                        "estimate": matrix_json(&d.estimate),
                    }),
                );
            }
            Err(e) => out.error("difference_limit", &e),
        }
    }
    let wants_m = m_keys[1..].iter().any(|(a, _)| req.wants(*a));
    if !wants_m {
        return;
    }
    let handle = match CalculusHandle::from_operator(t, upto, window, cfg) {
        Ok(h) => h,
        Err(e) => {
            for (a, key) in &m_keys[1..] {
                if req.wants(*a) {
                    out.error(key, &e);
                }
            }
            return;
        }
    };
    let m = handle.m.clone();
    let residual = crate::repr::moment_residual(&handle.moments, &m);
    if req.wants(Analysis::Measure) {
        out.headline.insert(
            "measure".into(),
            if m.is_zero() {
                "zero".into()
            } else {
                format!("atoms at {}", fmt_list(&m.locations()))
            },
        );
        out.analyses.insert(
            "measure".into(),
            json!({
                "measure": m,
                "moment_residual": residual,
                "validated_at": cfg,
                "weight_norms": m.atoms().iter().map(|a| spectral_norm(&a.weight)).collect::<Vec<_>>(),
            }),
        );
    }
    let triplet = match triplet_from_m(t, &m, window, cfg) {
        Ok(tr) => tr,
        Err(e) => {
            out.error("triplet", &e);
            return;
        }
    };
    if req.wants(Analysis::Triplet) {
        out.headline.insert(
            "triplet".into(),
            format!(
                "|B|={}, |C|={}, F atoms {}",
                fmt_num(spectral_norm(&triplet.b)),
                fmt_num(spectral_norm(&triplet.c)),
                fmt_list(&triplet.f.locations())
            ),
        );
        out.analyses.insert(
            "triplet".into(),
            json!({ "triplet": triplet, "validated_at": cfg }),
        );
    }
    if req.wants(Analysis::Classification) {
        out.object(
            "classification",
            classify_small_support(t, &m, window, cfg),
            |cl| cl.class.label().into(),
        );
    }
    if req.wants(Analysis::Subnormal) {
        out.object(
            "subnormal",
            subnormality_decision(t, &triplet, window, cfg),
            |s| match s.verdict.status {
                crate::Status::HoldsAtTruncation => "true".into(),
                crate::Status::Fails => "false".into(),
                crate::Status::Inconclusive => "inconclusive".into(),
            },
        );
    }
    if req.wants(Analysis::Boundiff) {
        out.object(
            "boundiff",
            boundiff_form_operator(t, &triplet, upto, window, cfg),
            |b| b.verdict.label().into(),
        );
    }
    if req.wants(Analysis::Dilation) {
        let dil = naimark_dilation(&m, cfg);
        let upto12 = handle.moments.len().min(13);
        let dres = dilation_residual(&handle.moments[..upto12], &dil);
        let spectrum = dilation_spectrum_check(t, &dil, &m, window, cfg);
        let brackets = bracket_identity_error(t, &m, window);
        let r = match (spectrum, brackets) {
            (Ok(sp), Ok(br)) => {
                let verdict = Verdict::all([
                    bound(
                        "‖Aₙ − R*SⁿR‖, n <= 12",
                        dres,
                        1e-10 * spectral_norm(&handle.b2).max(1.0),
                    ),
                    sp.clone(),
                    bound("‖bm_from_M − B_m(T)‖ relative, m = 2..8", br, 1e-9),
                ]);
                Ok(json!({
                    "kappa": dil.kappa(),
                    "s": dil.s,
                    "moment_residual": dres,
                    "spectrum": sp,
                    "bracket_identity_error": br,
                    "verdict": verdict,
                }))
            }
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        out.object("dilation", r, |v| {
            v["verdict"]["status"].as_str().unwrap_or("inconclusive").into()
        });
    }
    if req.wants(Analysis::Calculus) {
        let r = calculus_suite(&handle, req.seed, cfg);
        out.object("calculus", r, |v| {
            v["verdict"]["status"].as_str().unwrap_or("inconclusive").into()
        });
    }
    if req.wants(Analysis::Powers) {
        let r = powers_suite(t, &m, &probes, window, cfg);
        out.object("powers", r, |v| {
            v["verdict"]["status"].as_str().unwrap_or("inconclusive").into()
        });
    }
}

/// `lhs <= rhs` as a verdict.
fn bound(description: &str, lhs: f64, rhs: f64) -> Verdict {
    if lhs <= rhs {
        Verdict::holds()
    } else {
        Verdict::fails(crate::Witness::Inequality {
            description: description.into(),
            lhs,
            rhs,
        })
    }
}

/// Seeded random polynomials with coefficients in `[−1, 1]²`.
pub fn random_polynomials(count: usize, max_degree: usize, seed: u64) -> Vec<Polynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_ca1c);
    (0..count)
        .map(|_| {
            let deg = rng.gen_range(0..=max_degree);
            Polynomial::new(
                (0..=deg)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
        })
        .collect()
}

/// Five points with `|z|·sup Ω ≤ 0.4`.
pub fn resolvent_samples(support_max: f64) -> Vec<C64> {
    let radius = 0.4 / support_max.max(1.0);
    (0..5)
        .map(|k| C64::from_polar(radius * k as f64 / 4.0, 1.3 * k as f64))
        .collect()
}

fn calculus_suite(h: &CalculusHandle, seed: u64, cfg: &ToleranceConfig) -> Result<Value> {
    let norm = lambda_norm(h)?;
    let norm_gap = (norm.by_sign_patterns - norm.by_total).abs();
    let polys = random_polynomials(100, 6, seed);
    let mut poly_fail = 0;
    let mut worst_ratio: f64 = 0.0;
    for q in &polys {
        let b = poly_bound_check(h, q, cfg)?;
        if !b.verdict.holds_at_truncation() {
            poly_fail += 1;
        }
        if b.rhs > 0.0 {
            worst_ratio = worst_ratio.max(b.lhs / b.rhs);
        }
    }
    let ideal = ideal_generator(h)?;
    let dil = naimark_dilation(&h.m, cfg);
    let smax = h.support.iter().fold(0.0, |a: f64, &x| a.max(x));
    let resolvents = resolvent_samples(smax)
        .into_iter()
        .map(|z| resolvent_check(h, &dil, z, cfg))
        .collect::<Result<Vec<_>>>()?;
    let exps = [-2.0, 1.0, 3.0]
        .iter()
        .map(|&x| exponential_check(h, &dil, x, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = vec![
        bound("|‖Λ‖ by sign patterns − ‖B₂‖|", norm_gap, 1e-10 * norm.by_total.max(1.0)),
        bound("polynomial bound failures", poly_fail as f64, 0.0),
        ideal.verdict.clone(),
    ];
    checks.extend(resolvents.iter().map(|r| r.verdict.clone()));
    for e in &exps {
        checks.push(e.series.verdict.clone());
        checks.push(e.bounded.clone());
    }
    Ok(json!({
        "lambda_norm": norm,
        "polynomial_bound": { "samples": polys.len(), "failures": poly_fail, "worst_ratio": worst_ratio },
        "ideal_generator": ideal,
        "resolvent": resolvents,
        "exponential": exps,
        "verdict": Verdict::all(checks),
    }))
}

fn powers_suite(
    t: &LinearOperator,
    m: &crate::OperatorMeasure,
    probes: &[ProbeVector],
    window: usize,
    cfg: &ToleranceConfig,
) -> Result<Value> {
    let mut entries = Vec::new();
    let mut checks = Vec::new();
    for i in [2usize, 3] {
        let ti = t.power(i)?;
        let cpd = is_cpd_operator(&ti, probes, 16, cfg)?;
        let pushed = power_pushforward(m, i, cfg)?;
        let direct = recover_m(&ti, 12, window, cfg)?;
        let distance = measure_distance(&pushed, &direct);
        let scale = spectral_norm(&pushed.total()).max(1.0);
        checks.push(cpd.clone());
        checks.push(bound(
            &format!("distance between pushforward and M(T^{i})"),
            distance,
            1e-8 * scale,
        ));
        entries.push(json!({
            "power": i,
            "cpd": cpd,
            "pushforward_distance": distance,
            "pushforward_support": pushed.locations(),
        }));
    }
    Ok(json!({
        "powers": entries,
        "verdict": Verdict::all(checks),
    }))
}

fn run_qclass(
    req: &AnalysisRequest,
    s: &[f64],
    tv: &[f64],
    window: usize,
    out: &mut Outcome,
) -> Result<()> {
    let cfg = &req.tolerances;
    let q = build_qclass(s, tv)?;
    if req.wants(Analysis::Blocks) {
        out.object("blocks", validate_pacz(&q, 6, cfg), |_| "holds_at_truncation".into());
    }
    let cpd = qclass_cpd_test(&q, cfg);
    let cpd_holds = cpd.as_ref().is_ok_and(|v| v.verdict.holds_at_truncation());
    if req.wants(Analysis::Cpd) {
        out.object("cpd", cpd, |r| r.verdict.label().into());
    }
    if req.wants(Analysis::Regions) {
        out.object("regions", qclass_subnormal_region(&q, cfg), |r| {
            if r.cpd_only.is_empty() {
                format!("subnormal region {}", r.subnormal.label())
            } else {
                format!("cpd-only pairs {:?}", r.cpd_only)
            }
        });
    }
    if req.wants(Analysis::Measure) {
        if !cpd_holds {
            out.skip("measure", "operator is not CPD");
            return Ok(());
        }
        let r = (|| -> Result<Value> {
            let rec = recover_m(&q.op, req.truncation, window, cfg)?;
            let closed = qclass_m(&q, rec.dim(), cfg)?;
            let b2 = bracket_bm(&q.op, 2, window)?;
            let a = a_diagonal(&q);
            let d = q.d();
            let a_gap = (0..d)
                .map(|j| (b2[(j, j)] - c(a[j])).norm())
                .fold(0.0, f64::max);
            Ok(json!({
                "measure": closed,
                "a_diagonal": a,
                "a_formula_gap": a_gap,
                "recovery_distance": measure_distance(&rec, &closed),
                "validated_at": cfg,
            }))
        })();
        out.object("measure", r, |v| {
            let m: crate::OperatorMeasure =
                serde_json::from_value(v["measure"].clone()).expect("roundtrip");
            if m.is_zero() {
                "zero".into()
            } else {
                format!("atoms at {}", fmt_list(&m.locations()))
            }
        });
    }
    Ok(())
}

/// Names accepted by [`gallery`].
pub const GALLERY: &[&str] = &[
    "wab",
    "wa1",
    "wa",
    "nilpotent3iso",
    "at91shift",
    "tensor5iso",
    "isometry",
    "twoiso",
    "subnormal_diag",
    "quasinilpotent",
    "theta_sequence",
    "squares",
    "qclass_disk",
    "qclass_excluded",
    "qclass_shifted",
];

fn dense_rows(m: &CMat) -> Vec<Vec<Entry>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::from_c64(m[(i, j)])).collect())
        .collect()
}

fn real_rows(rows: &[&[f64]]) -> Vec<Vec<Entry>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| Entry::Real(x)).collect())
        .collect()
}

/// Fully parameterized request for a named fixture.
pub fn gallery(name: &str) -> Result<AnalysisRequest> {
    let nil3 = [[1.0, 1.0], [0.0, 1.0]];
    let subject = match name {
        "wab" => Subject::WeightedShift {
            weights: WeightRule::Wab { a: 4.0, b: 2.0 },
        },
        "wa1" => Subject::WeightedShift {
            weights: WeightRule::Wab { a: 0.25, b: 1.0 },
        },
        "wa" => Subject::WeightedShift {
            weights: WeightRule::Wab { a: 3.0, b: 3.0 },
        },
        "nilpotent3iso" => Subject::DenseOperator {
            rows: real_rows(&[&nil3[0], &nil3[1]]),
        },
        "at91shift" => Subject::WeightedShift {
            weights: WeightRule::RatioSqrt {
                num_offset: 3.0,
                den_offset: 1.0,
            },
        },
        "tensor5iso" => {
            let t = CMat::from_fn(2, 2, |i, j| c(nil3[i][j]));
            Subject::DenseOperator {
                rows: dense_rows(&t.kronecker(&t)),
            }
        }
        "isometry" => Subject::WeightedShift {
            weights: WeightRule::Constant { value: 1.0 },
        },
        "twoiso" => Subject::WeightedShift {
            weights: WeightRule::RatioSqrt {
                num_offset: 2.0,
                den_offset: 1.0,
            },
        },
        "subnormal_diag" => Subject::DenseOperator {
            rows: real_rows(&[&[0.3, 0.0], &[0.0, 0.9]]),
        },
        "quasinilpotent" => Subject::DenseOperator {
            rows: real_rows(&[&[0.3, 1.0], &[0.0, 0.3]]),
        },
        "theta_sequence" => Subject::Sequence {
            values: None,
            rule: Some(SequenceRule::ThetaKernel { theta: 0.3 }),
        },
        "squares" => Subject::Sequence {
            values: Some((0..=DEFAULT_TRUNCATION).map(|n| (n * n) as f64).collect()),
            rule: None,
        },
        "qclass_disk" => Subject::QclassPair {
            s: vec![0.6],
            t: vec![0.7],
        },
        "qclass_excluded" => Subject::QclassPair {
            s: vec![0.9],
            t: vec![0.9],
        },
        "qclass_shifted" => Subject::QclassPair {
            s: vec![1.5],
            t: vec![7.0],
        },
        _ => {
            return Err(Error::Parse {
                location: "gallery".into(),
                message: format!("unknown fixture `{name}`; valid names: {}", GALLERY.join(", ")),
            })
        }
    };
    let mut req = AnalysisRequest::new(subject);
    req.name = Some(name.into());
    Ok(req)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_detection() {
        for s in ["1", "-2.5", "3e-4", ".5", "7.", "+1E+3"] {
            assert!(is_decimal(s), "{s}");
        }
        for s in ["nan", "inf", "", ".", "1e", "abc", "1.2.3"] {
            assert!(!is_decimal(s), "{s}");
        }
    }

    #[test]
    fn parses_string_numbers() {
        let r = AnalysisRequest::from_json(
            r#"{"kind": "weighted_shift", "weights": {"family": "wab", "a": "4", "b": "2.0"}, "truncation": "20"}"#,
        )
        .unwrap();
        assert_eq!(r.truncation, 20);
        assert_eq!(
            r.subject,
            Subject::WeightedShift {
                weights: WeightRule::Wab { a: 4.0, b: 2.0 }
            }
        );
    }

    #[test]
    fn parse_errors_carry_location() {
        let e = AnalysisRequest::from_json(r#"{"kind": "sequence", "values": [1, "x"]}"#).unwrap_err();
        match e {
            Error::Parse { location, .. } => assert!(location.contains("values"), "{location}"),
            other => panic!("{other:?}"),
        }
        assert!(AnalysisRequest::from_json("{").unwrap_err().is_input_error());
        assert!(gallery("nope").unwrap_err().to_string().contains("wab"));
    }

    #[test]
    fn gallery_roundtrips_through_json() {
        for name in GALLERY {
            let req = gallery(name).unwrap();
            let back = AnalysisRequest::from_json(&req.to_json()).unwrap();
            assert_eq!(back, req, "{name}");
        }
    }
}

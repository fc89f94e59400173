//! Trichotomous verdicts with certificates.

use serde::{Deserialize, Serialize};

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The property holds on the inspected window. Never a claim about the
    /// infinite object.
    HoldsAtTruncation,
    Fails,
    Inconclusive,
}

/// Certificate attached to a failing (or diagnostic) verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Coefficients `λ` with `Σ γ_{i+j} λ_i λ_j = value < 0`.
    QuadraticForm { coefficients: Vec<f64>, value: f64 },
    /// Unit vector `v` of a Hermitian matrix with `⟨Hv, v⟩ = value`.
    Eigenvector { vector: Vec<C64>, value: f64 },
    /// A scalar inequality `lhs <= rhs` that was violated.
    Inequality {
        description: String,
        lhs: f64,
        rhs: f64,
    },
    /// Failure observed along a particular probe vector.
    Probe {
        index: usize,
        vector: Vec<C64>,
        inner: Box<Witness>,
    },
    /// Failure observed at a particular parameter value (e.g. Schoenberg `t`).
    Parameter {
        name: String,
        value: f64,
        inner: Box<Witness>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn holds() -> Self {
        Verdict {
            status: Status::HoldsAtTruncation,
            witness: None,
            note: None,
        }
    }

    /// A failing verdict always carries its certificate.
    pub fn fails(witness: Witness) -> Self {
        Verdict {
            status: Status::Fails,
            witness: Some(witness),
            note: None,
        }
    }

    pub fn inconclusive(note: impl Into<String>) -> Self {
        Verdict {
            status: Status::Inconclusive,
            witness: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn holds_at_truncation(&self) -> bool {
        self.status == Status::HoldsAtTruncation
    }

    pub fn is_fail(&self) -> bool {
        self.status == Status::Fails
    }

    /// Conjunction: first failure wins, then first inconclusive, else holds.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut pending: Option<Verdict> = None;
        for v in verdicts {
            match v.status {
                Status::Fails => return v,
                Status::Inconclusive if pending.is_none() => pending = Some(v),
                _ => {}
            }
        }
        pending.unwrap_or_else(Verdict::holds)
    }

    pub fn label(&self) -> &'static str {
        match self.status {
            Status::HoldsAtTruncation => "holds_at_truncation",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        }
    }
}

//! Conditionally positive definite (CPD) sequences and operators.
//!
//! The crate works at finite truncation: scalar sequences are finite windows
//! `γ₀,…,γ_N`, measures are finitely atomic, and operators are either dense
//! complex matrices or exactly evaluated banded operators (unilateral weighted
//! shifts and class-Q block operators) inspected on a declared index window.
//!
//! Module map:
//!
//! - [`seq`]: difference transforms, the `Q_n` kernel polynomials, Hankel
//!   matrices and truncated PD / CPD / Stieltjes verdicts.
//! - [`moments`]: atomic measure recovery, representing triplets `(b, c, ν)`
//!   and the bounded-difference forms.
//! - [`operator`]: operators, the hereditary calculus `p⟨T⟩`, brackets
//!   `B_m(T)`, trajectories and operator-level class tests.
//! - [`repr`]: the semispectral measure `M`, operator triplets `(B, C, F)`,
//!   Naimark dilations and subnormality decisions.
//! - [`calculus`]: the functional calculus `Λ_T` attached to `M`.
//! - [`qclass`]: class-Q block operators and their spectral regions.
//! - [`pipeline`]: JSON requests, the fixture gallery and reports.

#![forbid(unsafe_code)]

pub mod calculus;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod operator;
pub mod pipeline;
pub mod polynomial;
pub mod qclass;
pub mod repr;
pub mod seq;
pub mod tol;
pub mod verdict;

pub use error::{Error, Result};
pub use moments::{Atom, AtomicMeasure, DifferencePair, RepresentingTriplet};
pub use operator::{LinearOperator, ProbeVector, WeightRule, WeightedShift};
pub use polynomial::Polynomial;
pub use repr::{Dilation, OperatorMeasure, OperatorTriplet};
pub use seq::RealSequence;
pub use tol::ToleranceConfig;
pub use verdict::{Status, Verdict, Witness};

/// Complex scalar used for all operator arithmetic.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;

#![allow(dead_code)]

use condpd::{LinearOperator, ToleranceConfig, WeightRule};

pub const UPTO: usize = 24;
pub const WINDOW: usize = 64;

pub fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// CPD operators with the window they are analysed on.
pub fn cpd_operators() -> Vec<(&'static str, LinearOperator, usize)> {
    let dense = |rows: &[&[f64]]| LinearOperator::dense_real(rows).unwrap();
    let shift = |rule| LinearOperator::shift(rule).unwrap();
    vec![
        ("nilpotent3iso", dense(&[&[1.0, 1.0], &[0.0, 1.0]]), 0),
        ("subnormal_diag", dense(&[&[0.3, 0.0], &[0.0, 0.9]]), 0),
        ("normal", dense(&[&[0.6, 0.3], &[0.3, 0.6]]), 0),
        ("expansive_diag", dense(&[&[1.2, 0.0], &[0.0, 0.4]]), 0),
        ("wab", shift(WeightRule::Wab { a: 4.0, b: 2.0 }), WINDOW),
        ("wa1", shift(WeightRule::Wab { a: 0.25, b: 1.0 }), WINDOW),
        ("wa", shift(WeightRule::Wab { a: 3.0, b: 3.0 }), WINDOW),
        ("at91shift", shift(WeightRule::RatioSqrt { num_offset: 3.0, den_offset: 1.0 }), WINDOW),
        ("isometry", shift(WeightRule::Constant { value: 1.0 }), WINDOW),
        ("twoiso", shift(WeightRule::RatioSqrt { num_offset: 2.0, den_offset: 1.0 }), WINDOW),
    ]
}

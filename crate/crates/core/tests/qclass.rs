use condpd::linalg::spectral_norm;
use condpd::operator::bracket_bm;
use condpd::qclass::{
    a_diagonal, build_qclass, kernel_range_identity, qclass_cpd_test, qclass_m,
    qclass_subnormal_region, validate_pacz, BRACKET_LEVELS,
};
use condpd::repr::{measure_distance, recover_m};
use condpd::{CMat, ToleranceConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn random_pairs(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)))
        .collect()
}

#[test]
fn region_and_brackets_agree() {
    let mut cpd = 0;
    for (s, t) in random_pairs(50, 42) {
        let q = build_qclass(&[s], &[t]).unwrap();
        let r = qclass_cpd_test(&q, &cfg()).unwrap();
        assert_eq!(r.region.status, r.brackets.status, "(s, t) = ({s}, {t})");
        let expected = s * s + t * t <= 1.0 || s >= 1.0;
        assert_eq!(r.verdict.holds_at_truncation(), expected, "(s, t) = ({s}, {t})");
        cpd += expected as usize;
    }
    assert!(cpd > 5 && cpd < 45);
}

#[test]
fn multi_slot_operators() {
    let pairs = random_pairs(12, 3);
    for chunk in pairs.chunks(3) {
        let (s, t): (Vec<f64>, Vec<f64>) = chunk.iter().copied().unzip();
        let q = build_qclass(&s, &t).unwrap();
        let r = qclass_cpd_test(&q, &cfg()).unwrap();
        assert_eq!(r.region.status, r.brackets.status);
        let expected = chunk.iter().all(|&(s, t)| s * s + t * t <= 1.0 || s >= 1.0);
        assert_eq!(r.verdict.holds_at_truncation(), expected);
    }
}

#[test]
fn construction_is_exact() {
    for (s, t) in random_pairs(10, 8) {
        let q = build_qclass(&[s, 0.5], &[t, 0.1]).unwrap();
        let b = validate_pacz(&q, 6, &cfg()).unwrap();
        assert_eq!(b.v_isometric, 0.0);
        assert_eq!(b.v_star_e, 0.0);
        assert_eq!(b.lower_left, 0.0);
    }
}

#[test]
fn a_formula_matches_bracket_block() {
    for (s, t) in random_pairs(50, 17) {
        let q = build_qclass(&[s], &[t]).unwrap();
        let b2 = bracket_bm(&q.op, 2, q.window(BRACKET_LEVELS)).unwrap();
        let a = a_diagonal(&q)[0];
        assert!((b2[(0, 0)] - C64::new(a, 0.0)).norm() <= 1e-10 * a.abs().max(1.0), "({s}, {t})");
    }
}

#[test]
fn closed_form_measure_matches_recovery() {
    for (s, t) in [(0.6, 0.7), (0.0, 0.5), (2.0, 3.0), (1.5, 7.0), (0.3, 0.4)] {
        let q = build_qclass(&[s], &[t]).unwrap();
        let window = q.window(36);
        let rec = recover_m(&q.op, 24, window, &cfg()).unwrap();
        let closed = qclass_m(&q, rec.dim(), &cfg()).unwrap();
        let scale = spectral_norm(&closed.total()).max(1.0);
        assert!(measure_distance(&rec, &closed) <= 1e-8 * scale, "({s}, {t})");
    }
}

#[test]
fn pinned_pairs() {
    let check = |s: f64, t: f64| qclass_cpd_test(&build_qclass(&[s], &[t]).unwrap(), &cfg()).unwrap();
    assert!(check(0.6, 0.7).verdict.holds_at_truncation());
    assert!(check(0.9, 0.9).verdict.is_fail());
    assert!(check(1.5, 7.0).verdict.holds_at_truncation());

    let m = qclass_m(&build_qclass(&[0.6], &[0.8]).unwrap(), 1, &cfg()).unwrap();
    assert!(m.is_zero());
    let m = qclass_m(&build_qclass(&[0.0], &[0.5]).unwrap(), 1, &cfg()).unwrap();
    assert_eq!(m.locations(), vec![0.0]);
    assert!((m.total()[(0, 0)].re - 0.75).abs() < 1e-12);
    let m = qclass_m(&build_qclass(&[2.0], &[3.0]).unwrap(), 1, &cfg()).unwrap();
    assert_eq!(m.locations(), vec![4.0]);
    assert!((m.total()[(0, 0)].re - 36.0).abs() < 1e-12);

    let regions = |s: f64, t: f64| {
        qclass_subnormal_region(&build_qclass(&[s], &[t]).unwrap(), &cfg()).unwrap()
    };
    assert!(regions(1.5, 0.0).subnormal.holds_at_truncation());
    assert_eq!(regions(1.5, 7.0).cpd_only, vec![0]);
    assert!(regions(0.3, 0.4).subnormal.holds_at_truncation());
}

#[test]
fn kernel_and_range_of_commuting_diagonals() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..30 {
        let mut diag = || {
            CMat::from_diagonal(&nalgebra::DVector::from_fn(5, |_, _| {
                if rng.gen_bool(0.4) { C64::new(0.0, 0.0) } else { C64::new(rng.gen_range(-2.0..2.0), 0.0) }
            }))
        };
        let (a, b) = (diag(), diag());
        assert!(kernel_range_identity(&a, &b, &cfg()).unwrap().holds_at_truncation());
    }
    let a = CMat::identity(4, 4);
    let b = CMat::from_fn(4, 4, |i, j| C64::new((i == j && i > 1) as u8 as f64, 0.0));
    assert!(kernel_range_identity(&a, &b, &cfg()).unwrap().holds_at_truncation());
}

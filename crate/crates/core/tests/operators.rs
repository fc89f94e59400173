use condpd::linalg::{herm_eigen, spectral_norm};
use condpd::operator::{
    bracket_bm, default_probes, hereditary_eval, is_cpd_operator, trajectory,
};
use condpd::repr::{recover_m, subnormality_decision, triplet_from_m};
use condpd::{CMat, LinearOperator, Polynomial, ProbeVector, ToleranceConfig, C64};
use proptest::prelude::*;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(n: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(complex(), n * n).prop_map(move |v| CMat::from_vec(n, n, v))
}

fn poly(max_degree: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(complex(), 1..=max_degree + 1).prop_map(Polynomial::new)
}

/// `Σ αᵢ T*ⁱTⁱ` by explicit powers.
fn oracle_hereditary(p: &Polynomial, t: &CMat) -> CMat {
    let mut out = CMat::zeros(t.nrows(), t.ncols());
    let mut power = CMat::identity(t.nrows(), t.ncols());
    for alpha in p.coeffs() {
        out += power.adjoint() * &power * *alpha;
        power = t * power;
    }
    out
}

fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
    spectral_norm(&(a - b)) <= tol * spectral_norm(b).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 30, ..ProptestConfig::default() })]

    #[test]
    fn hereditary_recursion(t in matrix(3), p in poly(5)) {
        let op = LinearOperator::dense(t.clone()).unwrap();
        let lhs = hereditary_eval(&p.shift_up(), &op, 0).unwrap();
        let inner = hereditary_eval(&p, &op, 0).unwrap();
        prop_assert!(close(&lhs, &(t.adjoint() * &inner * &t), 1e-11));
        prop_assert!(close(&inner, &oracle_hereditary(&p, &t), 1e-11));
    }

    #[test]
    fn nabla_is_multiplicative(t in matrix(3), p in poly(4), q in poly(4)) {
        let op = LinearOperator::dense(t.clone()).unwrap();
        let qt = hereditary_eval(&q, &op, 0).unwrap();
        // p(∇_T) X = Σ pᵢ T*ⁱ X Tⁱ
        let mut nabla = CMat::zeros(3, 3);
        let mut power = CMat::identity(3, 3);
        for alpha in p.coeffs() {
            nabla += power.adjoint() * &qt * &power * *alpha;
            power = &t * power;
        }
        let pq = hereditary_eval(&p.mul(&q), &op, 0).unwrap();
        prop_assert!(close(&nabla, &pq, 1e-10));
    }

    #[test]
    fn trajectory_matches_hereditary_monomials(t in matrix(3), h in prop::collection::vec(complex(), 3)) {
        let op = LinearOperator::dense(t).unwrap();
        let probe = ProbeVector { coeffs: h.clone() };
        let traj = trajectory(&op, &probe, 8).unwrap();
        let v = nalgebra::DVector::from_vec(h);
        for n in 0..=8 {
            let g = hereditary_eval(&Polynomial::monomial(n), &op, 0).unwrap();
            let form = (v.adjoint() * g * &v)[(0, 0)].re;
            let scale = traj.values()[n].abs().max(1.0);
            prop_assert!((form - traj.values()[n]).abs() <= 1e-11 * scale);
        }
    }
}

fn dense(rows: &[&[f64]]) -> LinearOperator {
    LinearOperator::dense_real(rows).unwrap()
}

fn cpd(t: &LinearOperator) -> bool {
    is_cpd_operator(t, &default_probes(t, 16, 3), 24, &cfg())
        .unwrap()
        .holds_at_truncation()
}

fn cpd_examples() -> Vec<CMat> {
    let rot = std::f64::consts::FRAC_PI_3;
    [
        dense(&[&[1.0, 1.0], &[0.0, 1.0]]),
        dense(&[&[0.3, 0.0], &[0.0, 0.9]]),
        dense(&[&[0.6, 0.3], &[0.3, 0.6]]),
        dense(&[&[rot.cos(), -rot.sin()], &[rot.sin(), rot.cos()]]),
        dense(&[&[1.0, 0.0, 2.0], &[0.0, 0.5, 0.0], &[0.0, 0.0, 1.0]]),
        dense(&[&[1.2, 0.0], &[0.0, 0.4]]),
    ]
    .into_iter()
    .map(|t| t.as_dense().unwrap().clone())
    .collect()
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows() + b.nrows();
    let mut out = CMat::zeros(n, n);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.nrows()), b.shape()).copy_from(b);
    out
}

#[test]
fn examples_are_cpd() {
    for t in cpd_examples() {
        assert!(cpd(&LinearOperator::dense(t.clone()).unwrap()), "{t}");
    }
}

#[test]
fn restriction_to_invariant_coordinate_subspace() {
    let mut checked = 0;
    for t in cpd_examples() {
        let n = t.nrows();
        for k in 1..n {
            let invariant = (k..n).all(|i| (0..k).all(|j| t[(i, j)].norm() == 0.0));
            if invariant {
                let r = t.view((0, 0), (k, k)).into_owned();
                assert!(cpd(&LinearOperator::dense(r).unwrap()));
                checked += 1;
            }
        }
    }
    assert!(checked >= 4);
}

#[test]
fn direct_sums_stay_cpd() {
    let ex = cpd_examples();
    for a in &ex {
        for b in &ex {
            assert!(cpd(&LinearOperator::dense(block_diag(a, b)).unwrap()));
        }
    }
}

#[test]
fn inverses_of_invertible_cpd_operators() {
    for t in cpd_examples() {
        let Some(inv) = t.clone().try_inverse() else { continue };
        assert!(cpd(&LinearOperator::dense(inv).unwrap()), "inverse of {t}");
    }
}

#[test]
fn subnormal_examples_are_normaloid() {
    let mut seen = 0;
    for t in cpd_examples() {
        let op = LinearOperator::dense(t.clone()).unwrap();
        let m = recover_m(&op, 24, 0, &cfg()).unwrap();
        let triplet = triplet_from_m(&op, &m, 0, &cfg()).unwrap();
        let decision = subnormality_decision(&op, &triplet, 0, &cfg()).unwrap();
        if !decision.verdict.holds_at_truncation() {
            continue;
        }
        seen += 1;
        let norm = spectral_norm(&t);
        let mut power = t.clone();
        for n in 1..=6 {
            let expected = norm.powi(n);
            assert!((spectral_norm(&power) - expected).abs() <= 1e-8 * expected.max(1.0));
            power = &power * &t;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn subnormality_matches_probewise_pd() {
    use condpd::seq::is_pd_truncated;
    for t in cpd_examples() {
        let op = LinearOperator::dense(t).unwrap();
        let m = recover_m(&op, 24, 0, &cfg()).unwrap();
        let triplet = triplet_from_m(&op, &m, 0, &cfg()).unwrap();
        let decision = subnormality_decision(&op, &triplet, 0, &cfg()).unwrap();
        let all_pd = default_probes(&op, 16, 3).iter().all(|h| {
            let traj = trajectory(&op, h, 24).unwrap();
            is_pd_truncated(&traj, &cfg()).unwrap().holds_at_truncation()
        });
        assert_eq!(decision.verdict.holds_at_truncation(), all_pd);
    }
}

#[test]
fn quasinilpotent_perturbations_fail() {
    let alphas = [
        C64::new(0.3, 0.0),
        C64::from_polar(0.9, std::f64::consts::FRAC_PI_4),
        C64::new(0.0, 0.5),
        C64::new(-0.7, 0.1),
    ];
    let nilpotents = [
        [[0.0, 1.0], [0.0, 0.0]],
        [[0.0, 0.2], [0.0, 0.0]],
        [[1.0, 1.0], [-1.0, -1.0]],
    ];
    for alpha in alphas {
        for n in nilpotents {
            let t = CMat::from_fn(2, 2, |i, j| {
                C64::new(n[i][j], 0.0) + if i == j { alpha } else { C64::new(0.0, 0.0) }
            });
            let op = LinearOperator::dense(t).unwrap();
            let v = is_cpd_operator(&op, &default_probes(&op, 64, 0), 24, &cfg()).unwrap();
            assert!(v.is_fail(), "alpha = {alpha}, N = {n:?}");
        }
    }
    for alpha in [C64::new(1.0, 0.0), C64::from_polar(1.0, 2.0)] {
        let t = CMat::from_fn(2, 2, |i, j| match j as isize - i as isize {
            0 => alpha,
            1 => C64::new(1.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        assert!(cpd(&LinearOperator::dense(t).unwrap()));
    }
}

#[test]
fn even_brackets_nonnegative_for_cpd() {
    let mut ops: Vec<(LinearOperator, usize)> = cpd_examples()
        .into_iter()
        .map(|t| (LinearOperator::dense(t).unwrap(), 0))
        .collect();
    for rule in [
        condpd::WeightRule::Wab { a: 4.0, b: 2.0 },
        condpd::WeightRule::RatioSqrt { num_offset: 3.0, den_offset: 1.0 },
    ] {
        ops.push((LinearOperator::shift(rule).unwrap(), 40));
    }
    for (t, window) in ops {
        assert!(cpd(&t));
        for k in 1..=4 {
            let b = bracket_bm(&t, 2 * k, window).unwrap();
            let (ev, _) = herm_eigen(&condpd::linalg::hermitian_part(&b));
            let scale = spectral_norm(&b).max(1.0);
            assert!(ev[0] >= -cfg().psd_tol * scale, "B_{} min eig {}", 2 * k, ev[0]);
        }
    }
}

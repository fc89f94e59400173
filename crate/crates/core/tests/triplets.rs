use condpd::moments::{
    pd_decision, reconstruct_sequence, recover_atoms, triplet_from_sequence, AtomicMeasure,
};
use condpd::seq::{difference, growth_rate, is_pd_truncated};
use condpd::{Atom, RealSequence, RepresentingTriplet, ToleranceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 16;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// Atoms in `[0, 3]` at least 0.1 away from 1 and 0.2 apart.
fn random_atoms(rng: &mut ChaCha8Rng, max_atoms: usize) -> Vec<Atom> {
    let k = rng.gen_range(0..=max_atoms);
    let mut atoms: Vec<Atom> = Vec::new();
    while atoms.len() < k {
        let x = rng.gen_range(0.0..3.0);
        if (x - 1.0f64).abs() < 0.1 || atoms.iter().any(|a| (a.location - x).abs() < 0.2) {
            continue;
        }
        atoms.push(Atom {
            location: x,
            mass: rng.gen_range(0.05..2.0),
        });
    }
    atoms
}

fn random_triplet(rng: &mut ChaCha8Rng) -> RepresentingTriplet {
    RepresentingTriplet {
        b: rng.gen_range(-2.0..2.0),
        c: rng.gen_range(0.0..1.0),
        nu: AtomicMeasure::new(random_atoms(rng, 3), 1e-9).unwrap(),
    }
}

/// Independent reconstruction from the closed form of `Q_n`.
fn oracle_sequence(t: &RepresentingTriplet, gamma0: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let kf = k as f64;
            let q: f64 = t
                .nu
                .atoms()
                .iter()
                .map(|a| {
                    let x = a.location;
                    a.mass * (x.powi(k as i32) - 1.0 - kf * (x - 1.0)) / ((x - 1.0) * (x - 1.0))
                })
                .sum();
            gamma0 + t.b * kf + t.c * kf * kf + q
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn roundtrip_on_random_triplets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let t = random_triplet(&mut rng);
        let gamma0 = rng.gen_range(-1.0..1.0);
        let seq = reconstruct_sequence(&t, gamma0, N).unwrap();
        let oracle = oracle_sequence(&t, gamma0, N);
        let scale = oracle.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in seq.values().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10 * scale, "case {case}: reconstruction");
        }
        let back = triplet_from_sequence(&seq, &cfg())
            .unwrap_or_else(|e| panic!("case {case}: {e} for {t:?}"));
        assert!(rel(back.b, t.b) <= 1e-8, "case {case}: b {} vs {}", back.b, t.b);
        assert!(rel(back.c, t.c) <= 1e-8, "case {case}: c {} vs {}", back.c, t.c);
        assert_eq!(back.nu.len(), t.nu.len(), "case {case}: {:?} vs {:?}", back.nu, t.nu);
        for (x, y) in back.nu.atoms().iter().zip(t.nu.atoms()) {
            assert!(rel(x.location, y.location) <= 1e-8, "case {case}: location");
            assert!(rel(x.mass, y.mass) <= 1e-8, "case {case}: mass {} vs {}", x.mass, y.mass);
        }
    }
}

#[test]
fn distinct_triplets_give_distinct_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let tol = cfg().rank_tol;
    for _ in 0..100 {
        let (s, t) = (random_triplet(&mut rng), random_triplet(&mut rng));
        let a = reconstruct_sequence(&s, 0.5, N).unwrap();
        let b = reconstruct_sequence(&t, 0.5, N).unwrap();
        let gap = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(gap > tol, "{s:?} and {t:?} agree on the window");
    }
    // the zero triplet is the only one reproducing a constant
    let zero = RepresentingTriplet { b: 0.0, c: 0.0, nu: AtomicMeasure::empty() };
    let constant = RealSequence::new(vec![0.5; N + 1]).unwrap();
    let back = triplet_from_sequence(&constant, &cfg()).unwrap();
    assert_eq!((back.b, back.c, back.nu.len()), (zero.b, zero.c, 0));
}

#[test]
fn second_difference_is_moment_sequence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let t = random_triplet(&mut rng);
        let seq = reconstruct_sequence(&t, 1.0, N).unwrap();
        let d2 = difference(&seq, 2).unwrap();
        for (n, v) in d2.values().iter().enumerate() {
            let expected = t.nu.moment(n) + 2.0 * t.c;
            assert!((v - expected).abs() <= 1e-10 * expected.abs().max(1.0), "n={n}");
        }
    }
}

#[test]
fn recovered_support_within_growth_bound() {
    // The windowed growth estimate approaches limsup |γ_n|^{1/n} like K^{1/n},
    // so it is taken on a long exact window with a 1% slack.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let t = random_triplet(&mut rng);
        let seq = reconstruct_sequence(&t, 1.0, N).unwrap();
        let recovered = triplet_from_sequence(&seq, &cfg()).unwrap();
        let long = reconstruct_sequence(&t, 1.0, 400).unwrap();
        let g = growth_rate(&long).unwrap().value;
        for a in recovered.nu.atoms() {
            assert!(a.location.abs() <= g * 1.01 + cfg().rank_tol, "{} > {g}", a.location);
        }
    }
}

#[test]
fn pd_decision_agrees_with_hankel_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut pd_count = 0;
    for case in 0..60 {
        // half the cases come from a genuine moment sequence
        let seq = if case % 2 == 0 {
            let atoms: Vec<Atom> = random_atoms(&mut rng, 3)
                .into_iter()
                .map(|a| Atom { location: a.location * 0.6 - 0.4, mass: a.mass })
                .collect();
            let mut mu = AtomicMeasure::new(atoms, 1e-9).unwrap().moments(N).unwrap().values().to_vec();
            mu.iter_mut().for_each(|v| *v += 0.3);
            RealSequence::new(mu).unwrap()
        } else {
            reconstruct_sequence(&random_triplet(&mut rng), 1.0, N).unwrap()
        };
        let t = triplet_from_sequence(&seq, &cfg()).unwrap();
        let d = pd_decision(&t, seq.values()[0], &cfg()).unwrap();
        if d.verdict.holds_at_truncation() {
            pd_count += 1;
            let rebuilt = reconstruct_sequence(&t, seq.values()[0], N).unwrap();
            assert!(is_pd_truncated(&rebuilt, &cfg()).unwrap().holds_at_truncation());
            let mu = d.measure.unwrap();
            let from_mu = recover_atoms(&seq, &cfg()).unwrap();
            assert!((mu.total_mass() - from_mu.total_mass()).abs() < 1e-8 * mu.total_mass().max(1.0));
        }
    }
    assert!(pd_count >= 30);
}

#[test]
fn theta_kernel_triplet() {
    for theta in [0.3f64, 0.7] {
        let seq = RealSequence::from_fn(24, |n| theta.powi(n as i32) / (theta - 1.0).powi(2)).unwrap();
        let t = triplet_from_sequence(&seq, &cfg()).unwrap();
        assert!((t.b - 1.0 / (theta - 1.0)).abs() <= 1e-8);
        assert!(t.c.abs() <= 1e-8);
        assert_eq!(t.nu.len(), 1);
        assert!((t.nu.atoms()[0].location - theta).abs() <= 1e-8);
        assert!((t.nu.atoms()[0].mass - 1.0).abs() <= 1e-8);
        let d = pd_decision(&t, seq.values()[0], &cfg()).unwrap();
        let mu = d.measure.expect("PD");
        assert!(mu.mass_near(1.0, 1e-6) <= 1e-8);
        assert!((mu.mass_near(theta, 1e-6) - (theta - 1.0).powi(-2)).abs() <= 1e-8);
    }
}

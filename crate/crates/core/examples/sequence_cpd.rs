//! Truncated PD / CPD / Stieltjes tests on a few polynomial sequences.

use condpd::seq::{is_cpd_truncated, is_pd_truncated, is_stieltjes_truncated, schoenberg_probe};
use condpd::{RealSequence, ToleranceConfig, Witness};

fn main() -> condpd::Result<()> {
    let cfg = ToleranceConfig::default();
    type Case = (&'static str, fn(f64) -> f64);
    let cases: [Case; 4] = [
        ("n^2", |n| n * n),
        ("n^3", |n| n.powi(3)),
        ("n^4", |n| n.powi(4)),
        ("-n^2", |n| -n * n),
    ];
    for (name, rule) in cases {
        let seq = RealSequence::from_fn(12, |n| rule(n as f64))?;
        let cpd = is_cpd_truncated(&seq, &cfg)?;
        println!(
            "{name:>5}: pd={} cpd={} stieltjes={}",
            is_pd_truncated(&seq, &cfg)?.label(),
            cpd.label(),
            is_stieltjes_truncated(&seq, &cfg)?.label(),
        );
        if let Some(Witness::QuadraticForm { coefficients, value }) = &cpd.witness {
            let lead: Vec<String> = coefficients.iter().take(5).map(|c| format!("{c:+.3}")).collect();
            println!("       zero-sum witness λ = [{}, ...], form = {value:.3e}", lead.join(", "));
        }
    }

    // e^{tγ} is PD for every t > 0 exactly when γ is CPD
    let squares = RealSequence::from_fn(12, |n| (n * n) as f64)?;
    let v = schoenberg_probe(&squares, &[0.001, 0.01, 0.1], &cfg)?;
    println!("exp(t n^2) PD for sampled t: {}", v.label());
    Ok(())
}

//! The weighted shift `W_{a,b}`: brackets, CPD test, the measure `M`, the
//! triplet and the subnormality decision.

use condpd::linalg::spectral_norm;
use condpd::operator::{bracket_bm, default_probes, is_cpd_operator};
use condpd::repr::{classify_small_support, recover_m, subnormality_decision, triplet_from_m};
use condpd::{LinearOperator, ToleranceConfig, WeightRule};

fn main() -> condpd::Result<()> {
    let cfg = ToleranceConfig::default();
    let window = 64;
    for (a, b) in [(4.0, 2.0), (0.25, 1.0)] {
        let t = LinearOperator::shift(WeightRule::Wab { a, b })?;
        println!("W_(a,b) with a = {a}, b = {b}");

        let b2 = bracket_bm(&t, 2, window)?;
        let diag: Vec<String> = (0..4).map(|i| format!("{:.3}", b2[(i, i)].re)).collect();
        println!("  diag B2 = [{}, ...]", diag.join(", "));
        println!("  |T|^2 on window = {:.6}", t.norm(window)?.powi(2));

        let probes = default_probes(&t, 8, 7);
        let cpd = is_cpd_operator(&t, &probes, 24, &cfg)?;
        println!("  cpd: {}", cpd.label());

        let m = recover_m(&t, 24, window, &cfg)?;
        for atom in m.atoms() {
            println!(
                "  M atom at {:.3}, weight norm {:.6}",
                atom.location,
                spectral_norm(&atom.weight)
            );
        }
        let class = classify_small_support(&t, &m, window, &cfg)?;
        println!("  class: {}", class.class.label());

        let triplet = triplet_from_m(&t, &m, window, &cfg)?;
        let sub = subnormality_decision(&t, &triplet, window, &cfg)?;
        println!("  subnormal: {} (contraction: {})", sub.verdict.label(), sub.contraction);
    }
    Ok(())
}

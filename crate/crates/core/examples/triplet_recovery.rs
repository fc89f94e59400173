//! Recover the representing triplet `(b, c, ν)` of a CPD sequence and decide
//! PD from it.

use condpd::moments::{pd_decision, reconstruct_sequence, triplet_from_sequence};
use condpd::{RealSequence, ToleranceConfig};

fn main() -> condpd::Result<()> {
    let cfg = ToleranceConfig::default();
    for theta in [0.3f64, 0.7] {
        let seq = RealSequence::from_fn(24, |n| {
            theta.powi(n as i32) / ((theta - 1.0) * (theta - 1.0))
        })?;
        let tr = triplet_from_sequence(&seq, &cfg)?;
        println!("theta = {theta}");
        println!("  b = {:.10} (expected {:.10})", tr.b, 1.0 / (theta - 1.0));
        println!("  c = {:.2e}", tr.c);
        for atom in tr.nu.atoms() {
            println!("  nu atom {:.10} with mass {:.10}", atom.location, atom.mass);
        }

        let back = reconstruct_sequence(&tr, seq.values()[0], 24)?;
        let err = back
            .values()
            .iter()
            .zip(seq.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("  reconstruction error {err:.2e}");

        let pd = pd_decision(&tr, seq.values()[0], &cfg)?;
        if let Some(mu) = &pd.measure {
            for atom in mu.atoms() {
                println!("  PD with mu atom {:.6} mass {:.6}", atom.location, atom.mass);
            }
        }
    }

    // n² has c = 1 and nothing else
    let squares = RealSequence::from_fn(12, |n| (n * n) as f64)?;
    let tr = triplet_from_sequence(&squares, &cfg)?;
    println!("n^2: b = {:.2e}, c = {:.6}, |nu| = {}", tr.b, tr.c, tr.nu.len());
    Ok(())
}

//! The Kronecker square of a CPD 3-isometry is a 5-isometry that is not CPD.

use condpd::linalg::spectral_norm;
use condpd::operator::{bracket_bm, default_probes, is_cpd_operator, tensor};
use condpd::{LinearOperator, ToleranceConfig, Witness};

fn main() -> condpd::Result<()> {
    let cfg = ToleranceConfig::default();
    let t = LinearOperator::dense_real(&[&[1.0, 1.0], &[0.0, 1.0]])?;
    let tt = tensor(&t, &t)?;
    for m in 3..=5 {
        println!("|B{m}(T⊗T)| = {:.3e}", spectral_norm(&bracket_bm(&tt, m, 0)?));
    }

    let probes = default_probes(&tt, 64, 1);
    let v = is_cpd_operator(&tt, &probes, 24, &cfg)?;
    println!("T cpd: {}", is_cpd_operator(&t, &default_probes(&t, 64, 1), 24, &cfg)?.label());
    println!("T⊗T cpd: {}", v.label());
    if let Some(Witness::Probe { index, vector, .. }) = &v.witness {
        let coords: Vec<String> = vector.iter().map(|z| format!("{:.3}", z.re)).collect();
        println!("  failing probe #{index}: [{}]", coords.join(", "));
    }
    Ok(())
}

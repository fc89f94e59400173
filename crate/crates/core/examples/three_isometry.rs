//! `T = I + N` is a 3-isometry: its measure is a single atom at 1, it has a
//! one-point dilation, and powers push the measure forward.

use condpd::linalg::spectral_norm;
use condpd::operator::{bracket_bm, op_moment_sequence};
use condpd::repr::{
    dilation_residual, measure_distance, naimark_dilation, power_pushforward, recover_m,
};
use condpd::{LinearOperator, ToleranceConfig};

fn main() -> condpd::Result<()> {
    let cfg = ToleranceConfig::default();
    let t = LinearOperator::dense_real(&[&[1.0, 1.0], &[0.0, 1.0]])?;
    println!("|B3| = {:.2e}", spectral_norm(&bracket_bm(&t, 3, 0)?));
    println!("B2 = {:.3}", bracket_bm(&t, 2, 0)?.map(|z| z.re));

    let m = recover_m(&t, 16, 0, &cfg)?;
    println!("M atoms at {:?}", m.locations());

    let dil = naimark_dilation(&m, &cfg);
    let moments = op_moment_sequence(&t, 12, 0)?;
    println!(
        "dilation kappa = {}, |S| = {}, residual on A_0..A_12 = {:.2e}",
        dil.kappa(),
        dil.s_norm(),
        dilation_residual(&moments, &dil)
    );

    for i in [2, 3] {
        let pushed = power_pushforward(&m, i, &cfg)?;
        let direct = recover_m(&t.power(i)?, 16, 0, &cfg)?;
        println!(
            "T^{i}: weight norm {:.3}, distance to recovered {:.2e}",
            spectral_norm(&pushed.total()),
            measure_distance(&pushed, &direct)
        );
    }
    Ok(())
}

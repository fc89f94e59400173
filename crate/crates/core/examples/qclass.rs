//! Block operators `[[V, E], [0, Q]]` with diagonal `|Q|` and `|E|`: the CPD
//! region, its measure, and the gap to the subnormal region.

use condpd::qclass::{a_diagonal, build_qclass, qclass_cpd_test, qclass_subnormal_region};
use condpd::ToleranceConfig;

fn main() -> condpd::Result<()> {
    let cfg = ToleranceConfig::default();
    for (s, t) in [(0.6, 0.7), (0.9, 0.9), (1.5, 7.0), (1.5, 0.0), (0.0, 0.5), (2.0, 3.0)] {
        let q = build_qclass(&[s], &[t])?;
        let cpd = qclass_cpd_test(&q, &cfg)?;
        let regions = qclass_subnormal_region(&q, &cfg)?;
        println!(
            "(s, t) = ({s}, {t}): region {}, brackets {}, subnormal region {}, A = {:.4}",
            cpd.region.label(),
            cpd.brackets.label(),
            regions.subnormal.label(),
            a_diagonal(&q)[0],
        );
    }
    Ok(())
}

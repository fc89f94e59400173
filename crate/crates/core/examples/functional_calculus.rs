//! The functional calculus `f ↦ ∫ f dM` of a CPD operator, checked against
//! its dilation.

use condpd::calculus::{
    exponential_check, ideal_generator, lambda_norm, poly_bound_check, resolvent_check,
    CalculusHandle,
};
use condpd::repr::naimark_dilation;
use condpd::{LinearOperator, Polynomial, ToleranceConfig, C64};

fn main() -> condpd::Result<()> {
    let cfg = ToleranceConfig::default();
    let t = LinearOperator::dense_real(&[&[0.3, 0.0], &[0.0, 0.9]])?;
    let h = CalculusHandle::from_operator(&t, 24, 0, &cfg)?;
    println!("support {:?}", h.support);

    let norm = lambda_norm(&h)?;
    println!("|Λ| = {:.10} by sign patterns, {:.10} as |B2|", norm.by_sign_patterns, norm.by_total);

    let q = Polynomial::from_real(&[1.0, -2.0, 0.5]);
    let bound = poly_bound_check(&h, &q, &cfg)?;
    println!("|q<T>| = {:.6} <= {:.6}: {}", bound.lhs, bound.rhs, bound.verdict.label());

    let ideal = ideal_generator(&h)?;
    println!("annihilating generator residual {:.2e}", ideal.residual);

    let dil = naimark_dilation(&h.m, &cfg);
    let r = resolvent_check(&h, &dil, C64::new(0.4, 0.2), &cfg)?;
    println!("resolvent series error {:.2e} (tail bound {:.2e})", r.error, r.tail_bound);
    let e = exponential_check(&h, &dil, 2.0, &cfg)?;
    println!("|R* e^(ixS) R| = {:.6}, bounded: {}", e.group_norm, e.bounded.label());
    Ok(())
}

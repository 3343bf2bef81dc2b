//! Tensor-product rules on the disc, the ball and the annulus.

use bergman_lab::domain::DomainSpec;
use bergman_lab::quadrature::{build_rule, integrate};
use num_complex::Complex64;

fn main() -> bergman_lab::error::Result<()> {
    let domains = [
        DomainSpec::disc(),
        DomainSpec::ball(2)?,
        DomainSpec::polydisc(2)?,
        DomainSpec::annulus(0.5)?,
    ];
    for d in &domains {
        let rule = build_rule(d, 12)?;
        // ∫ |z₁|² dV and the volume; both exact at this order.
        let vol = integrate(&rule, |_| Complex64::new(1.0, 0.0))?;
        let m2 = integrate(&rule, |p| Complex64::new(p[0].norm_sqr(), 0.0))?;
        println!(
            "{d:<14} nodes {:>6}  exact to degree {:?}  volume {:.15}  ∫|z₁|² {:.15}",
            rule.len(),
            rule.exact_degree(),
            vol.re,
            m2.re
        );
    }
    Ok(())
}

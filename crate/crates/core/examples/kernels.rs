//! The three kernel backends side by side.

use bergman_lab::domain::DomainSpec;
use bergman_lab::kernel::{closed_form_kernel, laurent_kernel, numeric_kernel, separates_points};
use bergman_lab::point::CPoint;
use bergman_lab::quadrature::build_rule;
use num_complex::Complex64;

fn main() -> bergman_lab::error::Result<()> {
    let disc = DomainSpec::disc();
    let closed = closed_form_kernel(&disc)?;
    let numeric = numeric_kernel(&disc, &build_rule(&disc, 40)?, 30)?;
    println!("disc, numeric basis size {:?}", numeric.effective_basis_size());
    for (z, xi) in [(0.0, 0.0), (0.3, -0.2), (0.5, 0.5)] {
        let (z, xi) = ([Complex64::new(z, 0.1)], [Complex64::new(xi, -0.1)]);
        let a = closed.value(&z, &xi)?;
        let b = numeric.value(&z, &xi)?;
        println!("  K({}, {}) closed {a:.12}  numeric {b:.12}", z[0], xi[0]);
    }

    let ball = closed_form_kernel(&DomainSpec::ball(2)?)?;
    let jet = ball.jet(&[Complex64::new(0.2, 0.0); 2], &[Complex64::new(0.0, 0.3); 2])?;
    println!("ball(2) jet: K = {:.6}, ∂_z K = {}", jet.value, CPoint::new(jet.dz.iter().copied().collect()));

    let ann = DomainSpec::annulus(0.5)?;
    let laurent = laurent_kernel(&ann, 60)?;
    let numeric = numeric_kernel(&ann, &build_rule(&ann, 47)?, 20)?;
    let (z, xi) = ([Complex64::new(0.7, 0.0)], [Complex64::new(0.0, 0.8)]);
    println!(
        "annulus(0.5): Laurent {:.10}  numeric degree 20 {:.10}",
        laurent.value(&z, &xi)?,
        numeric.value(&z, &xi)?
    );
    println!(
        "points 0.1 and 0.2 separated on the disc: {}",
        separates_points(&closed, &[Complex64::new(0.1, 0.0)], &[Complex64::new(0.2, 0.0)])?
    );
    Ok(())
}

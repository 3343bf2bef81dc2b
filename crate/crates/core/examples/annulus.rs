//! The annulus: Laurent and numeric kernels agree, the kernel has a zero, and
//! the representative map grows towards the outer circle.

use bergman_lab::domain::DomainSpec;
use bergman_lab::gradient::Representative;
use bergman_lab::kernel::{laurent_kernel, KernelConfig, KernelKind};
use bergman_lab::point::CPoint;
use bergman_lab::stats::kernel_zero_on_segment;
use num_complex::Complex64;

fn main() -> bergman_lab::error::Result<()> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let ann = DomainSpec::annulus(0.5)?;
    let laurent = laurent_kernel(&ann, 30)?;
    let numeric = KernelConfig {
        kernel: KernelKind::Numeric,
        degree: Some(30),
        truncation: None,
        order: None,
    }
    .build(&ann)?;
    let (z, xi) = ([Complex64::from_polar(0.6, 0.4)], [Complex64::from_polar(0.85, -1.0)]);
    println!("K Laurent {:.12}  numeric {:.12}", laurent.value(&z, &xi)?, numeric.value(&z, &xi)?);

    let series = laurent_kernel(&ann, 60)?;
    let zero = kernel_zero_on_segment(&series, &[c(0.7)], &[c(-0.501)], &[c(-0.95)])?;
    println!("K(0.7, ·) vanishes at {zero}");

    let rep = Representative::new(&series, &CPoint::real(&[0.7]))?;
    for r in [0.75, 0.85, 0.95, 0.99, 0.999] {
        println!("  |rep_0.7({r})|² = {:.6}", rep.image(&[c(r)])?.norm_sqr());
    }
    Ok(())
}

//! Bergman metric tensors and their finite-difference cross-check.

use bergman_lab::domain::DomainSpec;
use bergman_lab::kernel::closed_form_kernel;
use bergman_lab::metric::{finite_difference_check, metric_at, oneform_norm};
use bergman_lab::point::CPoint;
use num_complex::Complex64;

fn main() -> bergman_lab::error::Result<()> {
    let c = Complex64::new;
    for d in [DomainSpec::disc(), DomainSpec::ball(2)?, DomainSpec::polydisc(2)?] {
        let k = closed_form_kernel(&d)?;
        let z = CPoint::new(vec![c(0.2, -0.1); d.dim()]);
        let g = metric_at(&k, &z)?;
        let fd = finite_difference_check(&k, &z, 1e-4)?;
        println!("{d} at {z}: eigenvalues {:?}, finite-difference error {fd:.1e}", g.eigenvalues);
        let eta = vec![c(1.0, 0.0); d.dim()];
        println!("  |η|² for η = (1,…,1): {:.6}", oneform_norm(&g, &eta)?);
    }
    Ok(())
}

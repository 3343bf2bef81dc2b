//! The representative map and the gradient norm it realizes.

use bergman_lab::domain::DomainSpec;
use bergman_lab::gradient::{boundary_constancy_scan, grad_logp_norm, invariance_check, Representative};
use bergman_lab::kernel::closed_form_kernel;
use bergman_lab::maps::MapSpec;
use bergman_lab::point::CPoint;
use num_complex::Complex64;

fn main() -> bergman_lab::error::Result<()> {
    let c = Complex64::new;
    let ball = DomainSpec::ball(2)?;
    let k = closed_form_kernel(&ball)?;
    let rep = Representative::new(&k, &CPoint::origin(2))?;
    let xi = [c(0.3, 0.1), c(-0.2, 0.4)];
    println!("rep₀({}) = {}  (√3·ξ)", CPoint::new(xi.to_vec()), CPoint::new(rep.image(&xi)?.b.to_vec()));

    let w = CPoint::new(vec![c(0.1, 0.2), c(0.3, -0.1)]);
    let f = grad_logp_norm(&k, &w, &xi)?;
    let b = Representative::new(&k, &w)?.image(&xi)?.norm_sqr();
    println!("F(w,ξ) = {f:.15}, |rep_w(ξ)|² = {b:.15}");

    let grid: Vec<CPoint> = (1..6).map(|i| CPoint::new(vec![c(0.15 * i as f64, 0.0), c(0.0, 0.1)])).collect();
    let scan = boundary_constancy_scan(&k, &CPoint::real(&[0.6, 0.8]), &grid)?;
    println!("boundary ξ₀ = (0.6, 0.8): F ≡ {} within {:.1e}", scan.expected, scan.max_deviation);

    let bidisc = closed_form_kernel(&DomainSpec::polydisc(2)?)?;
    let phi = MapSpec::mobius_product(&[c(0.4, 0.0), c(0.0, -0.3)])?;
    let res = invariance_check(&phi, &bidisc, &bidisc, &w, &xi)?;
    println!("Möbius invariance residual on the bidisc: {res:.1e}");
    Ok(())
}

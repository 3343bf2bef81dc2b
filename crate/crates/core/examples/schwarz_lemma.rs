//! The variance bound, the equality classifier and the global bound for the
//! built-in maps out of the disc.

use bergman_lab::domain::DomainSpec;
use bergman_lab::kernel::closed_form_kernel;
use bergman_lab::point::CPoint;
use bergman_lab::quadrature::RefinedRule;
use bergman_lab::schwarz::{analytic_sup, builtin_map_suite, equality_classifier, verify_global, verify_pointwise, SchwarzContext};
use num_complex::Complex64;

fn main() -> bergman_lab::error::Result<()> {
    let disc = DomainSpec::disc();
    let z = CPoint::new(vec![Complex64::new(0.3, 0.2)]);
    let x = vec![Complex64::new(1.0, 0.0)];
    let sample: Vec<_> = [0.1, -0.4, 0.55]
        .iter()
        .map(|&r| (CPoint::new(vec![Complex64::new(r, 0.2)]), x.clone()))
        .collect();
    for f in builtin_map_suite()? {
        if f.source().to_string() != disc.to_string() {
            continue;
        }
        let ctx = SchwarzContext::new(closed_form_kernel(f.source())?, closed_form_kernel(f.target())?, RefinedRule::new(f.source(), 16)?)?;
        ctx.check_map(&f)?;
        let r = verify_pointwise(&f, &z, &x, &ctx)?;
        let eq = equality_classifier(&f, &sample, &ctx)?;
        let c = analytic_sup(f.target()).unwrap_or(f64::NAN);
        let g = verify_global(&f, c, &sample.iter().map(|s| s.0.clone()).collect::<Vec<_>>(), &ctx)?;
        println!(
            "{:<14} pullback {:.6}  Var[W]·g {:.6}  slack {:+.2e}  {}  C = {c}: min eig {:.3}",
            f.name, r.pullback, r.rhs, r.slack, eq.classification, g.min_eigenvalue
        );
    }
    Ok(())
}

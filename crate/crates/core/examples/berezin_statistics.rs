//! The Berezin density as a statistical model: normalization, score mean and
//! Fisher information against the metric.

use bergman_lab::domain::DomainSpec;
use bergman_lab::kernel::{closed_form_kernel, special_basis};
use bergman_lab::metric::metric_at;
use bergman_lab::point::{CPoint, TangentVector};
use bergman_lab::quadrature::RefinedRule;
use bergman_lab::stats::{fisher_pullback, normalization, score_mean, BerezinDensity};
use num_complex::Complex64;

fn main() -> bergman_lab::error::Result<()> {
    let d = DomainSpec::polydisc(2)?;
    let k = closed_form_kernel(&d)?;
    let p = BerezinDensity::new(k.clone());
    let rule = RefinedRule::new(&d, 8)?;
    let z = CPoint::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.2)]);
    let x = TangentVector::new(z.clone(), vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)])?;

    let n = normalization(&p, &rule, &z)?;
    let mean = score_mean(&p, &rule, &z, &x)?;
    let fisher = fisher_pullback(&p, &rule, &z, &x)?;
    let g = metric_at(&k, &z)?.norm_sqr(&x.dir)?;
    println!("∫ P(z,·) = {:.12} (±{:.1e})", n.re(), n.quad_error_estimate);
    println!("E[score] = {:.1e}", mean.value.norm());
    println!("Var[score] = {:.12}, g(X,X) = {g:.12}", fisher.re());

    let pair = special_basis(&k, &rule.fine, &z, &x)?;
    println!(
        "special basis: t²/K(z,z) = {:.12}, orthonormality defect {:.1e}",
        pair.metric_ratio(),
        pair.orthonormality_defect()
    );
    Ok(())
}

//! Seeded random interior points and tangent directions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::point::CPoint;

fn unit_disc(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if c.norm_sqr() < 1.0 {
            return c;
        }
    }
}

/// `count` points inside `domain`, each coordinate drawn uniformly from the disc
/// of radius `radius` (scaled by 1/√n on balls so the point stays inside).
pub fn random_points(domain: &DomainSpec, count: usize, radius: f64, seed: u64) -> Result<Vec<CPoint>> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidArgument(format!("sampling radius {radius} must lie in (0,1)")));
    }
    let n = domain.dim();
    let scale = match domain {
        DomainSpec::Ball { dim } => radius / (*dim as f64).sqrt(),
        _ => radius,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) {
            return Err(Error::InvalidArgument(format!(
                "could not sample {count} points of {domain} within radius {radius}"
            )));
        }
        let p: Vec<Complex64> = (0..n).map(|_| unit_disc(&mut rng) * scale).collect();
        if domain.contains(&p)? {
            out.push(CPoint::new(p));
        }
    }
    Ok(out)
}

/// `count` unit vectors in ℂⁿ.
pub fn random_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<Complex64> = (0..dim).map(|_| unit_disc(&mut rng)).collect();
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-3 {
                break v.into_iter().map(|c| c / norm).collect();
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_inside() {
        let ball = DomainSpec::ball(3).unwrap();
        let a = random_points(&ball, 20, 0.9, 7).unwrap();
        assert_eq!(a, random_points(&ball, 20, 0.9, 7).unwrap());
        assert!(a.iter().all(|p| p.norm_sqr() < 0.81 + 1e-12));
        let ann = DomainSpec::annulus(0.5).unwrap();
        assert!(random_points(&ann, 10, 0.9, 1).unwrap().iter().all(|p| p[0].norm() > 0.5));
        let d = random_directions(2, 5, 3);
        assert!(d.iter().all(|v| (v.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12));
    }
}

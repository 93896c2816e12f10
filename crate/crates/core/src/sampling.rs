//! Deterministic sample generators: disk grids, circle samples, seeded random
//! unitaries and annulus points. Everything is driven by explicit seeds so
//! sweeps and tests reproduce exactly.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{c64, C64};

/// Golden-angle spiral covering `|w| <= rmax` with `count` points.
///
/// The spiral has no rotational symmetry, which makes it a good generic grid
/// for residual sweeps.
pub fn disk_grid(count: usize, rmax: f64) -> Vec<C64> {
    let golden = 2.399_963_229_728_653; // 2π(1 − 1/φ)
    (0..count)
        .map(|k| {
            let r = rmax * (((k as f64) + 0.5) / count as f64).sqrt();
            let theta = golden * k as f64;
            c64(r * theta.cos(), r * theta.sin())
        })
        .collect()
}

/// `count` equispaced points on the circle `|w| = radius`.
pub fn circle_samples(count: usize, radius: f64) -> Vec<C64> {
    (0..count)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            c64(radius * theta.cos(), radius * theta.sin())
        })
        .collect()
}

/// Standard-normal complex entries via Box–Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    c64(r * t.cos(), r * t.sin())
}

/// Haar-ish random unitary from the QR factorization of a Gaussian matrix,
/// with the phase convention that makes R's diagonal positive.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Uniform point of the annulus `rmin < |ζ| < rmax` (area measure), seeded.
pub fn annulus_point(rmin: f64, rmax: f64, rng: &mut ChaCha8Rng) -> C64 {
    let t: f64 = rng.random();
    let r = (rmin * rmin + t * (rmax * rmax - rmin * rmin)).sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    c64(r * theta.cos(), r * theta.sin())
}

/// Seeded RNG with a fixed stream, shared by every deterministic sampler.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_grid_stays_in_disk() {
        let grid = disk_grid(200, 0.95);
        assert_eq!(grid.len(), 200);
        assert!(grid.iter().all(|w| w.norm() <= 0.95 + 1e-12));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = seeded_rng(42);
        let u = random_unitary(5, &mut rng);
        let err = (&u * u.adjoint() - DMatrix::<C64>::identity(5, 5))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn annulus_point_respects_bounds() {
        let mut rng = seeded_rng(1);
        for _ in 0..100 {
            let z = annulus_point(0.3, 0.9, &mut rng);
            assert!(z.norm() > 0.3 && z.norm() < 0.9);
        }
    }
}

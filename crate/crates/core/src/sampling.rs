//! Seeded random elements of the Lie algebras used by the verification suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::g2core::G2Data;
use crate::metric_lie::{Mat6, Mat7, Vec7};

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mat6(rng: &mut SampleRng, scale: f64) -> Mat6 {
    Mat6::from_fn(|_, _| scale * rng.gen_range(-1.0..1.0))
}

pub fn random_symmetric6(rng: &mut SampleRng, scale: f64) -> Mat6 {
    let m = random_mat6(rng, scale);
    (m + m.transpose()) * 0.5
}

pub fn random_symmetric7(rng: &mut SampleRng, scale: f64) -> Mat7 {
    let m = Mat7::from_fn(|_, _| scale * rng.gen_range(-1.0..1.0));
    (m + m.transpose()) * 0.5
}

pub fn random_vec7(rng: &mut SampleRng, scale: f64) -> Vec7 {
    Vec7::from_fn(|_, _| scale * rng.gen_range(-1.0..1.0))
}

/// `A = J X` with X symmetric spans sp(ℝ⁶, ω).
pub fn random_sp(rng: &mut SampleRng, g2: &G2Data, scale: f64) -> Mat6 {
    g2.j * random_symmetric6(rng, scale)
}

/// Skew elements commuting with J, i.e. u(3).
pub fn random_u3(rng: &mut SampleRng, g2: &G2Data, scale: f64) -> Mat6 {
    let m = random_mat6(rng, scale);
    let k = (m - m.transpose()) * 0.5;
    (k - g2.j * k * g2.j) * 0.5
}

/// u(3) elements with `tr(JA) = 0`.
pub fn random_su3(rng: &mut SampleRng, g2: &G2Data, scale: f64) -> Mat6 {
    let k = random_u3(rng, g2, scale);
    k + g2.j * ((g2.j * k).trace() / 6.0)
}

/// Symmetric elements of sp(ℝ⁶, ω), i.e. symmetric S anticommuting with J.
pub fn random_symmetric_sp(rng: &mut SampleRng, g2: &G2Data, scale: f64) -> Mat6 {
    let x = random_symmetric6(rng, scale);
    (x + g2.j * x * g2.j) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{canonical_g2, Convention};

    #[test]
    fn samples_lie_in_their_algebras() {
        for c in Convention::ALL {
            let g2 = canonical_g2(c);
            let mut r = rng(42);
            for _ in 0..50 {
                let a = random_sp(&mut r, &g2, 1.0);
                assert!(g2.sp_residual(&a) < 1e-14);
                let k = random_su3(&mut r, &g2, 1.0);
                assert!(g2.sp_residual(&k) < 1e-14);
                assert!((k + k.transpose()).amax() < 1e-15);
                assert!((k * g2.j - g2.j * k).amax() < 1e-15);
                assert!((g2.j * k).trace().abs() < 1e-14);
                let s = random_symmetric_sp(&mut r, &g2, 1.0);
                assert!(g2.sp_residual(&s) < 1e-14);
                assert!((s - s.transpose()).amax() < 1e-15);
            }
        }
    }
}

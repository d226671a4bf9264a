//! Seeded randomness.
//!
//! All sampling runs on [`SeededRng`] (ChaCha8). Standard normals use the
//! Marsaglia polar method over 53-bit uniforms, so a given seed reproduces the
//! same stream on every platform. Independent streams for sample or trajectory
//! `k` come from [`derive_seed`].

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};

pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Uniform in `[0, 1)` with 53 bits of resolution.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal deviate (polar method; the second deviate of each
/// accepted pair is discarded so the stream layout stays one-draw-per-call).
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * uniform(rng) - 1.0;
        let v = 2.0 * uniform(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

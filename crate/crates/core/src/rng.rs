//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`seeded`], a ChaCha8 stream
//! keyed by a 64-bit seed and a domain tag, so reports are reproducible
//! across platforms and independent call sites never share a stream.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64, domain: u64) -> SeededRng {
    // splitmix64 finaliser to decorrelate nearby (seed, domain) pairs
    let mut z = seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Uniform sample from the closed unit disk.
pub fn unit_disk(rng: &mut SeededRng) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.gen::<f64>();
    Complex64::from_polar(r, theta)
}

/// Uniform sample from the unit circle.
pub fn unit_circle(rng: &mut SeededRng) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * rng.gen::<f64>())
}

pub(crate) mod domains {
    pub const CHART: u64 = 1;
    pub const BASE_PARAM: u64 = 2;
    pub const ARTAL_G: u64 = 3;
    pub const ORACLE_KERNEL: u64 = 4;
    pub const SMOOTHNESS: u64 = 5;
    pub const CHART_SELECT: u64 = 6;
}

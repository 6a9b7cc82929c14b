//! Deterministic seeded sampling of directions and radii.
//!
//! Every sampling site draws from a counter-mode stream cipher seeded by the
//! user seed and a fixed per-purpose context, so results are reproducible
//! across runs and thread counts, and the first `n` samples of a stream are
//! always a prefix of the first `2n` (which makes sampled maximum-modulus
//! estimates monotone in the sample count).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::real::{cast, Real};

pub(crate) const CTX_MAX_MODULUS: u64 = 1;
pub(crate) const CTX_RING: u64 = 2;
pub(crate) const CTX_WITNESS: u64 = 3;

pub(crate) fn stream(seed: u64, context: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ context.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Uniform draw from the open interval `(0, 1)`.
pub(crate) fn open_unit<T: Real>(rng: &mut ChaCha8Rng) -> T {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return cast(u);
        }
    }
}

/// Uniform direction on the max-norm unit sphere in `R^d`: a face is picked
/// uniformly and the remaining coordinates are uniform in `[-1, 1]`.
pub(crate) fn max_norm_direction<T: Real>(rng: &mut ChaCha8Rng, dimension: usize) -> Vec<T> {
    let axis = rng.gen_range(0..dimension);
    let sign: bool = rng.gen();
    (0..dimension)
        .map(|i| {
            if i == axis {
                if sign {
                    T::one()
                } else {
                    -T::one()
                }
            } else {
                cast::<T>(rng.gen_range(-1.0..=1.0))
            }
        })
        .collect()
}

/// Uniform direction on the Euclidean unit sphere (`d` = 2 or 3).
pub(crate) fn euclid_direction<T: Real>(rng: &mut ChaCha8Rng, dimension: usize) -> Vec<T> {
    match dimension {
        2 => {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![cast(theta.cos()), cast(theta.sin())]
        }
        3 => {
            // Cylindrical equal-area parameterisation.
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).max(0.0).sqrt();
            vec![cast(s * theta.cos()), cast(s * theta.sin()), cast(z)]
        }
        d => panic!("euclidean sphere sampling implemented for d = 2, 3 only (got {d})"),
    }
}

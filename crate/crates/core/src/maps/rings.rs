//! Ring containment checks.
//!
//! For a ladder of radii `rho_n` (profile knots for the radial model, a
//! seeded maximum-modulus ladder otherwise) the open rings
//!
//! ```text
//! A_n = { x : 2 rho_n < |x| < eps rho_{n+1} }
//! ```
//!
//! should each map strictly inside the next one. Before a ring is checked,
//! three index conditions must hold (with the radial model's envelope
//! constants both equal to one):
//!
//! 1. the scaled ring is nonempty: `2 rho_n < eps rho_{n+1}`;
//! 2. `2^n >= 2`;
//! 3. `eps^n <= eps`.
//!
//! The report states the smallest index where all three hold, and per ring
//! every sampled containment violation.

use serde::Serialize;

use crate::loggrowth::LogMag;
use crate::maps::{sampling, MapError, MapFamily, MapKind, Point};
use crate::real::{cast, plain_limit, Real};

const MAX_RECORDED_VIOLATIONS: usize = 32;

/// One sampled point whose image left the target ring.
#[derive(Debug, Clone, Serialize)]
pub struct RingViolation<T> {
    pub n: u32,
    pub sample_log_r: T,
    pub image_log_r: T,
    /// True if the image fell below the inner target bound, false if it
    /// exceeded the outer one.
    pub below_inner: bool,
}

/// Containment results for a single ring.
#[derive(Debug, Clone, Serialize)]
pub struct RingCheck<T> {
    pub n: u32,
    pub inner_log: T,
    pub outer_log: T,
    pub target_inner_log: T,
    pub target_outer_log: T,
    pub conditions_ok: bool,
    pub failed_conditions: Vec<String>,
    pub samples: usize,
    pub violation_count: usize,
    pub violations: Vec<RingViolation<T>>,
}

/// Full ring containment report.
#[derive(Debug, Clone, Serialize)]
pub struct RingContainmentReport<T> {
    pub epsilon: T,
    /// Smallest checked index where all three ring conditions hold.
    pub first_valid_n: Option<u32>,
    pub rings: Vec<RingCheck<T>>,
    pub total_violations: usize,
    /// True when ring radii came from sampled maximum-modulus estimates.
    pub sampled_modulus: bool,
}

/// Samples each ring `A_n` for `n = n_lo ..= n_hi` and verifies that images
/// land strictly inside `A_{n+1}`, with a relative tolerance `rel_tol` on
/// magnitudes to absorb floating-point noise in non-exact evaluation.
pub fn verify_ring_containment<T: Real>(
    map: &MapFamily<T>,
    epsilon: T,
    n_lo: u32,
    n_hi: u32,
    samples_per_ring: usize,
    rel_tol: T,
) -> Result<RingContainmentReport<T>, MapError<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(MapError::InvalidFamily(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if n_lo > n_hi {
        return Err(MapError::InvalidFamily(format!("empty ring range {n_lo}..{n_hi}")));
    }
    if let MapKind::RadialModel { profile } = map.kind() {
        if n_lo < profile.n0() {
            return Err(MapError::InvalidFamily(format!(
                "ring indices for the radial model start at n0 = {}, got {n_lo}",
                profile.n0()
            )));
        }
    } else if n_lo == 0 {
        return Err(MapError::InvalidFamily("ring indices start at 1".into()));
    }

    // Radii rho_{n_lo} ..= rho_{n_hi + 2}; the +2 covers the target ring.
    let mut radii = Vec::new();
    for n in n_lo..=n_hi + 2 {
        radii.push(map.ring_radius(n)?);
    }
    let rho = |n: u32| radii[(n - n_lo) as usize];

    let log_eps = epsilon.ln();
    let ln2 = T::LN_2();
    let two = cast::<T>(2.0);
    let tol_log = rel_tol.ln_1p();

    let mut rings = Vec::new();
    let mut first_valid_n = None;
    let mut total_violations = 0usize;

    for n in n_lo..=n_hi {
        let inner = ln2 + rho(n).ln_or_neg_inf();
        let outer = log_eps + rho(n + 1).ln_or_neg_inf();
        let target_inner = ln2 + rho(n + 1).ln_or_neg_inf();
        let target_outer = log_eps + rho(n + 2).ln_or_neg_inf();

        let nf = cast::<T>(f64::from(n));
        let mut failed = Vec::new();
        if !(inner < outer) {
            failed.push(format!("ring {n} empty after scaling: 2 rho_{n} >= eps rho_{}", n + 1));
        }
        if !(two.powf(nf) >= two) {
            failed.push(format!("2^{n} < 2"));
        }
        if !(epsilon.powf(nf) <= epsilon) {
            failed.push(format!("eps^{n} > eps"));
        }
        let conditions_ok = failed.is_empty();
        if conditions_ok && first_valid_n.is_none() {
            first_valid_n = Some(n);
        }

        let mut check = RingCheck {
            n,
            inner_log: inner,
            outer_log: outer,
            target_inner_log: target_inner,
            target_outer_log: target_outer,
            conditions_ok,
            failed_conditions: failed,
            samples: 0,
            violation_count: 0,
            violations: Vec::new(),
        };

        if conditions_ok {
            let mut rng = sampling::stream(map.seed(), sampling::CTX_RING.wrapping_add(u64::from(n) << 8));
            for _ in 0..samples_per_ring {
                let u = sampling::open_unit::<T>(&mut rng);
                let sample_log = inner + u * (outer - inner);
                let image_log = image_log_radius(map, &mut rng, sample_log)?;
                let below = image_log < target_inner - tol_log;
                let above = image_log > target_outer + tol_log;
                if below || above {
                    check.violation_count += 1;
                    total_violations += 1;
                    if check.violations.len() < MAX_RECORDED_VIOLATIONS {
                        check.violations.push(RingViolation {
                            n,
                            sample_log_r: sample_log,
                            image_log_r: image_log,
                            below_inner: below,
                        });
                    }
                }
                check.samples += 1;
            }
        }
        rings.push(check);
    }

    Ok(RingContainmentReport {
        epsilon,
        first_valid_n,
        rings,
        total_violations,
        sampled_modulus: !matches!(map.max_modulus_mode(), super::MaxModulusMode::Exact)
            || !matches!(map.kind(), MapKind::RadialModel { .. }),
    })
}

/// Draws a direction appropriate for the family norm, evaluates the map at
/// the given log radius and returns the image log radius. An image beyond
/// plain scale still yields its log-magnitude estimate.
fn image_log_radius<T: Real>(
    map: &MapFamily<T>,
    rng: &mut rand_chacha::ChaCha8Rng,
    sample_log: T,
) -> Result<T, MapError<T>> {
    let point = match map.kind() {
        MapKind::RadialModel { .. } => Point::from_polar(
            sampling::max_norm_direction::<T>(rng, map.dimension()),
            LogMag::from_ln(sample_log),
        )?,
        _ => {
            // Non-radial families measure radii in the Euclidean norm and
            // need plain coordinates: scale a unit Euclidean direction.
            if sample_log > plain_limit::<T>().ln() {
                return Err(MapError::BeyondPlainScale { log_magnitude: sample_log });
            }
            let r = sample_log.exp();
            let dir = sampling::euclid_direction::<T>(rng, map.dimension());
            Point::from_coords(dir.into_iter().map(|d| d * r).collect())?
        }
    };
    match map.eval(&point) {
        Ok(img) => Ok(map.norm(&img).ln_or_neg_inf()),
        Err(MapError::EscapedRange { log_magnitude }) => Ok(log_magnitude),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loggrowth::GrowthProfile;

    #[test]
    fn radial_rings_have_zero_violations() {
        let mut profile = GrowthProfile::new(2, 5.0).unwrap();
        profile.extend_to(10);
        let map = MapFamily::radial(profile, 2).unwrap();
        let report = verify_ring_containment(&map, 0.5, 2, 5, 120, 0.0).unwrap();
        assert_eq!(report.first_valid_n, Some(2));
        assert_eq!(report.total_violations, 0);
        assert!(!report.sampled_modulus);
        for ring in &report.rings {
            assert!(ring.conditions_ok, "conditions failed at n = {}", ring.n);
            assert_eq!(ring.samples, 120);
        }
    }

    #[test]
    fn entire_product_first_ring_contained() {
        let map = MapFamily::entire_product(1.0f64, vec![10.0, 1e4, 1e9, 1e16])
            .unwrap()
            .with_ring_seed(50.0)
            .unwrap();
        let report = verify_ring_containment(&map, 0.5, 1, 1, 150, 1e-6).unwrap();
        assert_eq!(report.first_valid_n, Some(1));
        assert_eq!(report.total_violations, 0, "violations: {:?}", report.rings[0].violations);
        assert!(report.sampled_modulus);
    }

    #[test]
    fn ring_seed_is_required_for_entire_product() {
        let map = MapFamily::entire_product(1.0f64, vec![10.0]).unwrap();
        assert!(matches!(
            verify_ring_containment(&map, 0.5, 1, 2, 10, 0.0),
            Err(MapError::MissingRingSeed)
        ));
    }

    #[test]
    fn failed_conditions_are_named_not_fatal() {
        // A profile with tiny first gap: ring at n0 can be empty after
        // scaling when epsilon is small enough.
        let mut profile = GrowthProfile::new(2, 5.0).unwrap();
        profile.extend_to(8);
        let map = MapFamily::radial(profile, 2).unwrap();
        let report = verify_ring_containment(&map, 0.05, 2, 3, 20, 0.0).unwrap();
        // 2 r_2 = 10 vs eps r_3 = 1.25: empty; n = 3: 2 r_3 = 50 vs eps r_4 ~ 56.8: ok.
        assert!(!report.rings[0].conditions_ok);
        assert!(report.rings[0].failed_conditions[0].contains("empty"));
        assert_eq!(report.rings[0].samples, 0);
        assert_eq!(report.first_valid_n, Some(3));
    }
}

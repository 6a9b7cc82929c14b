//! Map families and maximum-modulus machinery.
//!
//! Three families are provided:
//!
//! * **Radial model** — `f(x) = g(|x|) * x/|x|` in the max norm, where `g`
//!   is the identity below radius 1 and the profile growth function `L`
//!   above it. Evaluation is exact at any magnitude because it acts on log
//!   radii; this is the workhorse for every theorem-level experiment.
//! * **Entire product** — `f(z) = c * z^2 * prod_k (1 + z/a_k)` on the
//!   plane, with real positive roots `a_k`. Orbits are followed in plain
//!   coordinates and switch to a log-magnitude estimate once any coordinate
//!   leaves plain scale.
//! * **Zorich-type beam map** — `Z(x1, x2, x3) = e^{x3} * h(x1, x2)` on
//!   `R^3`, where `h` folds the plane into the square `[-1,1]^2` by
//!   reflections and maps it onto the upper or lower unit hemisphere
//!   (parity of reflections picks the side). Exploration-only.
//!
//! The maximum modulus `M(r) = max_{|x| = r} |f(x)|` is exact for the radial
//! model and estimated by seeded sphere sampling otherwise; iterating it
//! builds the ladders that all escape classification measures against.

mod rings;
pub(crate) mod sampling;

pub use rings::{verify_ring_containment, RingCheck, RingContainmentReport, RingViolation};

use serde::Serialize;
use thiserror::Error;

use crate::loggrowth::{GrowthError, GrowthProfile, LogMag};
use crate::real::{cast, plain_limit, Real};

/// Errors from map construction and evaluation.
#[derive(Debug, Error)]
pub enum MapError<T: Real> {
    #[error("point escaped the representable range: log |x| = {log_magnitude}")]
    EscapedRange { log_magnitude: T },
    #[error("magnitude beyond plain scale (log |x| = {log_magnitude}) where plain coordinates are required")]
    BeyondPlainScale { log_magnitude: T },
    #[error("map acts on R^{expected}, point lives in R^{got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid map family: {0}")]
    InvalidFamily(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("exact maximum modulus is only available for the radial model")]
    ExactUnsupported,
    #[error("maximum modulus requires a positive radius")]
    ZeroRadius,
    #[error("maximum-modulus ladder stalls: M(r) <= r at log r = {log_r}")]
    BelowEscapeThreshold { log_r: T },
    #[error("ring ladder requires a seed radius for this family")]
    MissingRingSeed,
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

/// A point of `R^d`, stored either as plain coordinates or in polar form
/// (max-norm unit direction plus log-scale radius). Polar form is what lets
/// radial-model orbits run for arbitrarily many iterations.
#[derive(Debug, Clone)]
pub enum Point<T> {
    Cartesian(Vec<T>),
    Polar { direction: Vec<T>, radius: LogMag<T> },
}

impl<T: Real> PartialEq for Point<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Point::Cartesian(a), Point::Cartesian(b)) => a == b,
            (
                Point::Polar { direction: da, radius: ra },
                Point::Polar { direction: db, radius: rb },
            ) => da == db && ra == rb,
            _ => false,
        }
    }
}

impl<T: Real> Point<T> {
    /// Builds from plain coordinates (finite, nonempty).
    pub fn from_coords(coords: Vec<T>) -> Result<Self, MapError<T>> {
        if coords.is_empty() {
            return Err(MapError::InvalidPoint("empty coordinate vector".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MapError::InvalidPoint("coordinates must be finite".into()));
        }
        Ok(Point::Cartesian(coords))
    }

    /// Builds from a direction and a log-scale radius. The direction is
    /// normalised to max norm 1; it must be nonzero and finite.
    pub fn from_polar(direction: Vec<T>, radius: LogMag<T>) -> Result<Self, MapError<T>> {
        if direction.is_empty() || direction.iter().any(|c| !c.is_finite()) {
            return Err(MapError::InvalidPoint("direction must be nonempty and finite".into()));
        }
        let m = direction.iter().fold(T::zero(), |acc, c| acc.max(c.abs()));
        if m == T::zero() {
            return Err(MapError::InvalidPoint("direction must be nonzero".into()));
        }
        let direction = direction.into_iter().map(|c| c / m).collect();
        Ok(Point::Polar { direction, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Cartesian(c) => c.len(),
            Point::Polar { direction, .. } => direction.len(),
        }
    }

    /// Max norm as a log-scale magnitude (exact in both representations).
    pub fn max_norm(&self) -> LogMag<T> {
        match self {
            Point::Cartesian(c) => {
                let m = c.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
                LogMag::from_value(m).expect("abs max is nonnegative")
            }
            Point::Polar { radius, .. } => *radius,
        }
    }

    /// Euclidean norm as a log-scale magnitude, overflow-free.
    pub fn euclid_norm(&self) -> LogMag<T> {
        match self {
            Point::Cartesian(c) => {
                let m = c.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
                if m == T::zero() {
                    return LogMag::zero();
                }
                let s = c.iter().map(|x| (*x / m) * (*x / m)).fold(T::zero(), |a, b| a + b);
                LogMag::from_ln(m.ln() + s.ln() / cast(2.0))
            }
            Point::Polar { direction, radius } => {
                if radius.is_zero() {
                    return LogMag::zero();
                }
                let s = direction.iter().map(|x| *x * *x).fold(T::zero(), |a, b| a + b);
                LogMag::from_ln(radius.ln_or_neg_inf() + s.ln() / cast(2.0))
            }
        }
    }

    /// Polar representation; the origin gets the first basis direction.
    pub fn to_polar(&self) -> Self {
        match self {
            Point::Polar { .. } => self.clone(),
            Point::Cartesian(c) => {
                let m = c.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
                if m == T::zero() {
                    let mut direction = vec![T::zero(); c.len()];
                    direction[0] = T::one();
                    return Point::Polar { direction, radius: LogMag::zero() };
                }
                let direction = c.iter().map(|x| *x / m).collect();
                Point::Polar { direction, radius: LogMag::from_value(m).expect("positive") }
            }
        }
    }

    /// Plain coordinates; fails once the radius leaves plain scale.
    pub fn to_cartesian(&self) -> Result<Vec<T>, MapError<T>> {
        match self {
            Point::Cartesian(c) => Ok(c.clone()),
            Point::Polar { direction, radius } => {
                if radius.is_zero() {
                    return Ok(vec![T::zero(); direction.len()]);
                }
                if !radius.is_plain_scale() {
                    return Err(MapError::BeyondPlainScale { log_magnitude: radius.ln_or_neg_inf() });
                }
                let r = radius.value();
                Ok(direction.iter().map(|d| *d * r).collect())
            }
        }
    }
}

/// Which maximum-modulus evaluation the family uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaxModulusMode {
    /// Closed form; radial model only.
    Exact,
    /// Seeded quasi-uniform sphere sampling with this many points.
    Sampled { n_samples: usize },
}

/// The concrete map of a family.
#[derive(Debug, Clone)]
pub enum MapKind<T> {
    RadialModel { profile: GrowthProfile<T> },
    EntireProduct { coefficient: T, roots: Vec<T>, ring_seed: Option<T> },
    Zorich,
}

/// A maximum-modulus estimate, flagged when it came from sampling.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModulusEstimate<T> {
    pub value: LogMag<T>,
    pub sampled: bool,
}

/// A map together with the metadata the analysis layer needs: dimension,
/// declared inner-dilatation bound, modulus mode and sampling seed.
#[derive(Debug, Clone)]
pub struct MapFamily<T: Real> {
    dimension: usize,
    ki_bound: T,
    kind: MapKind<T>,
    mode: MaxModulusMode,
    seed: u64,
}

impl<T: Real> MapFamily<T> {
    /// Radial model over a growth profile, acting on `R^dimension`.
    pub fn radial(profile: GrowthProfile<T>, dimension: usize) -> Result<Self, MapError<T>> {
        if dimension < 2 {
            return Err(MapError::InvalidFamily(format!("dimension must be >= 2, got {dimension}")));
        }
        Ok(Self {
            dimension,
            ki_bound: T::one(),
            kind: MapKind::RadialModel { profile },
            mode: MaxModulusMode::Exact,
            seed: 0,
        })
    }

    /// Entire product `c z^2 prod (1 + z/a_k)` on the plane. Roots must be
    /// positive and strictly increasing; the coefficient positive.
    pub fn entire_product(coefficient: T, roots: Vec<T>) -> Result<Self, MapError<T>> {
        if !(coefficient > T::zero()) {
            return Err(MapError::InvalidFamily("coefficient must be positive".into()));
        }
        for w in roots.windows(2) {
            if !(w[1] > w[0]) {
                return Err(MapError::InvalidFamily("roots must strictly increase".into()));
            }
        }
        if roots.first().is_some_and(|a| !(*a > T::zero())) {
            return Err(MapError::InvalidFamily("roots must be positive".into()));
        }
        Ok(Self {
            dimension: 2,
            ki_bound: T::one(),
            kind: MapKind::EntireProduct { coefficient, roots, ring_seed: None },
            mode: MaxModulusMode::Sampled { n_samples: 64 },
            seed: 0,
        })
    }

    /// Zorich-type beam map on `R^3` with a declared dilatation bound.
    pub fn zorich(ki_bound: T) -> Result<Self, MapError<T>> {
        if !(ki_bound >= T::one()) {
            return Err(MapError::InvalidFamily("ki_bound must be >= 1".into()));
        }
        Ok(Self {
            dimension: 3,
            ki_bound,
            kind: MapKind::Zorich,
            mode: MaxModulusMode::Sampled { n_samples: 256 },
            seed: 0,
        })
    }

    pub fn with_ki_bound(mut self, ki_bound: T) -> Result<Self, MapError<T>> {
        if !(ki_bound >= T::one()) {
            return Err(MapError::InvalidFamily("ki_bound must be >= 1".into()));
        }
        self.ki_bound = ki_bound;
        Ok(self)
    }

    pub fn with_max_modulus_mode(mut self, mode: MaxModulusMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets the base radius for the ring ladder of non-radial families.
    pub fn with_ring_seed(mut self, seed_radius: T) -> Result<Self, MapError<T>> {
        match &mut self.kind {
            MapKind::EntireProduct { ring_seed, .. } => {
                if !(seed_radius > T::zero()) {
                    return Err(MapError::InvalidFamily("ring seed radius must be positive".into()));
                }
                *ring_seed = Some(seed_radius);
                Ok(self)
            }
            _ => Err(MapError::InvalidFamily("ring seed only applies to the entire product family".into())),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ki_bound(&self) -> T {
        self.ki_bound
    }

    pub fn kind(&self) -> &MapKind<T> {
        &self.kind
    }

    pub fn max_modulus_mode(&self) -> MaxModulusMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn profile(&self) -> Option<&GrowthProfile<T>> {
        match &self.kind {
            MapKind::RadialModel { profile } => Some(profile),
            _ => None,
        }
    }

    /// Extends the underlying profile (radial model only; no-op otherwise).
    pub fn extend_profile_to(&mut self, n: u32) {
        if let MapKind::RadialModel { profile } = &mut self.kind {
            profile.extend_to(n);
        }
    }

    /// The norm the family measures radii in: max norm for the radial model,
    /// Euclidean for the plane and the beam map.
    pub fn norm(&self, p: &Point<T>) -> LogMag<T> {
        match self.kind {
            MapKind::RadialModel { .. } => p.max_norm(),
            _ => p.euclid_norm(),
        }
    }

    /// Radial image `g(r)`: identity below radius 1, growth function above.
    pub fn radial_image(&self, r: LogMag<T>) -> Result<LogMag<T>, MapError<T>> {
        match &self.kind {
            MapKind::RadialModel { profile } => {
                if r <= LogMag::one() {
                    Ok(r)
                } else {
                    Ok(profile.l_eval(r)?)
                }
            }
            _ => Err(MapError::ExactUnsupported),
        }
    }

    /// Applies the map to a point.
    ///
    /// A result magnitude beyond plain scale is reported as
    /// [`MapError::EscapedRange`] carrying the best log-scale estimate of the
    /// image magnitude (the radial model never escapes: it stays in polar
    /// form).
    pub fn eval(&self, p: &Point<T>) -> Result<Point<T>, MapError<T>> {
        if p.dim() != self.dimension {
            return Err(MapError::DimensionMismatch { expected: self.dimension, got: p.dim() });
        }
        match &self.kind {
            MapKind::RadialModel { .. } => {
                let polar = p.to_polar();
                let (direction, radius) = match polar {
                    Point::Polar { direction, radius } => (direction, radius),
                    Point::Cartesian(_) => unreachable!(),
                };
                let image = self.radial_image(radius)?;
                Ok(Point::Polar { direction, radius: image })
            }
            MapKind::EntireProduct { coefficient, roots, .. } => {
                let c = p.to_cartesian().map_err(|_| MapError::EscapedRange {
                    log_magnitude: entire_log_modulus_polar(*coefficient, roots, p),
                })?;
                eval_entire(*coefficient, roots, c[0], c[1])
            }
            MapKind::Zorich => {
                let c = p.to_cartesian().map_err(|e| match e {
                    // e^{x3} with x3 beyond plain scale is far beyond range.
                    MapError::BeyondPlainScale { log_magnitude } => {
                        MapError::EscapedRange { log_magnitude }
                    }
                    other => other,
                })?;
                eval_zorich(c[0], c[1], c[2])
            }
        }
    }

    /// Maximum modulus `M(r) = max_{|x| = r} |f(x)|` in the family norm.
    pub fn max_modulus(&self, r: LogMag<T>) -> Result<ModulusEstimate<T>, MapError<T>> {
        if r.is_zero() {
            return Err(MapError::ZeroRadius);
        }
        match (self.mode, &self.kind) {
            (MaxModulusMode::Exact, MapKind::RadialModel { .. }) => {
                Ok(ModulusEstimate { value: self.radial_image(r)?, sampled: false })
            }
            (MaxModulusMode::Exact, _) => Err(MapError::ExactUnsupported),
            (MaxModulusMode::Sampled { .. }, MapKind::RadialModel { .. }) => {
                // The modulus is direction-independent, so every sample
                // evaluates to g(r) exactly.
                Ok(ModulusEstimate { value: self.radial_image(r)?, sampled: true })
            }
            (MaxModulusMode::Sampled { n_samples }, MapKind::EntireProduct { coefficient, roots, .. }) => {
                if !r.is_plain_scale() {
                    return Err(MapError::BeyondPlainScale { log_magnitude: r.ln_or_neg_inf() });
                }
                let mut rng = sampling::stream(self.seed, sampling::CTX_MAX_MODULUS);
                let radius = r.value();
                let mut best = LogMag::zero();
                for _ in 0..n_samples.max(1) {
                    let dir = sampling::euclid_direction::<T>(&mut rng, 2);
                    let lm = entire_log_modulus(*coefficient, roots, dir[0] * radius, dir[1] * radius);
                    best = best.max(lm);
                }
                Ok(ModulusEstimate { value: best, sampled: true })
            }
            (MaxModulusMode::Sampled { n_samples }, MapKind::Zorich) => {
                if !r.is_plain_scale() {
                    return Err(MapError::BeyondPlainScale { log_magnitude: r.ln_or_neg_inf() });
                }
                let mut rng = sampling::stream(self.seed, sampling::CTX_MAX_MODULUS);
                let radius = r.value();
                let mut best = LogMag::zero();
                for _ in 0..n_samples.max(1) {
                    let dir = sampling::euclid_direction::<T>(&mut rng, 3);
                    // |Z(x)| = e^{x3}, so the log modulus is just x3.
                    best = best.max(LogMag::from_ln(dir[2] * radius));
                }
                Ok(ModulusEstimate { value: best, sampled: true })
            }
        }
    }

    /// Iterates the maximum modulus: returns `[M^1(r), ..., M^k(r)]`.
    /// Requires `M(r) > r`, the regime where the ladder climbs.
    pub fn iterate_max_modulus(&self, base_r: LogMag<T>, k: usize) -> Result<Vec<LogMag<T>>, MapError<T>> {
        let mut levels = Vec::with_capacity(k);
        let mut current = base_r;
        for step in 0..k {
            let next = self.max_modulus(current)?.value;
            if step == 0 && next <= current {
                return Err(MapError::BelowEscapeThreshold { log_r: current.ln_or_neg_inf() });
            }
            levels.push(next);
            current = next;
        }
        Ok(levels)
    }

    /// `K_I(f)^k` as a log-scale magnitude (it overflows plain scale for
    /// large `k` whenever `K_I > 1`).
    pub fn dilatation_power_bound(&self, k: usize) -> LogMag<T> {
        LogMag::from_ln(cast::<T>(k as f64) * self.ki_bound.ln())
    }

    /// Radii for the nested-ring experiments. For the radial model these are
    /// the profile knots `r_n` (indexed by actual knot index); for other
    /// families they form the ladder `rho_1 = seed, rho_{j+1} = M(rho_j)`.
    pub(crate) fn ring_radius(&self, n: u32) -> Result<LogMag<T>, MapError<T>> {
        match &self.kind {
            MapKind::RadialModel { profile } => {
                profile.knot(n).ok_or(MapError::Growth(GrowthError::ProfileExhausted {
                    log_r: f64::from(n),
                    covered: f64::from(profile.last_n()),
                }))
            }
            MapKind::EntireProduct { ring_seed, .. } => {
                let seed = ring_seed.ok_or(MapError::MissingRingSeed)?;
                if n == 0 {
                    return Err(MapError::InvalidFamily("ring indices start at 1".into()));
                }
                let base = LogMag::from_value(seed)?;
                if n == 1 {
                    return Ok(base);
                }
                Ok(*self.iterate_max_modulus(base, (n - 1) as usize)?.last().unwrap())
            }
            MapKind::Zorich => Err(MapError::MissingRingSeed),
        }
    }
}

/// `ln |f(z)|` for the entire product at plain-scale `z = x + i y`,
/// overflow-free (works even when `|f(z)|` is far beyond plain scale).
fn entire_log_modulus<T: Real>(coefficient: T, roots: &[T], x: T, y: T) -> LogMag<T> {
    let m = x.hypot(y);
    if m == T::zero() {
        return LogMag::zero();
    }
    let mut acc = coefficient.ln() + cast::<T>(2.0) * m.ln();
    for a in roots {
        let t = (T::one() + x / *a).hypot(y / *a);
        if t == T::zero() {
            return LogMag::zero();
        }
        acc = acc + t.ln();
    }
    LogMag::from_ln(acc)
}

/// Log-magnitude estimate for polar input beyond plain scale: all factors
/// are dominated by `z/a_k`, so `ln|f| ~ ln c + 2 ln|z| + sum (ln|z| - ln a_k)`.
fn entire_log_modulus_polar<T: Real>(coefficient: T, roots: &[T], p: &Point<T>) -> T {
    let lr = p.euclid_norm().ln_or_neg_inf();
    let mut acc = coefficient.ln() + cast::<T>(2.0) * lr;
    for a in roots {
        acc = acc + (lr - a.ln());
    }
    acc
}

fn eval_entire<T: Real>(coefficient: T, roots: &[T], x: T, y: T) -> Result<Point<T>, MapError<T>> {
    let limit = plain_limit::<T>();
    // Squaring and the product factors can overflow well before the final
    // magnitude does, so route large inputs straight to the log estimate.
    if x.hypot(y) > limit.sqrt() / cast(16.0) {
        return Err(MapError::EscapedRange {
            log_magnitude: entire_log_modulus(coefficient, roots, x, y).ln_or_neg_inf(),
        });
    }
    let (mut wx, mut wy) = (coefficient * (x * x - y * y), coefficient * (cast::<T>(2.0) * x * y));
    for a in roots {
        let (fx, fy) = (T::one() + x / *a, y / *a);
        let (nx, ny) = (wx * fx - wy * fy, wx * fy + wy * fx);
        wx = nx;
        wy = ny;
    }
    if !wx.is_finite() || !wy.is_finite() || wx.abs().max(wy.abs()) > limit {
        return Err(MapError::EscapedRange {
            log_magnitude: entire_log_modulus(coefficient, roots, x, y).ln_or_neg_inf(),
        });
    }
    Ok(Point::Cartesian(vec![wx, wy]))
}

/// Reflects `u` into `[-1, 1]`; the flag records an odd number of
/// reflections. (For inputs so large that floats lose integer resolution the
/// parity is still deterministic, just no longer meaningful.)
fn fold<T: Real>(u: T) -> (T, bool) {
    let two = cast::<T>(2.0);
    let c = ((u + T::one()) / two).floor();
    let frac = u - two * c;
    let parity = c - two * (c / two).floor();
    if parity == T::one() {
        (-frac, true)
    } else {
        (frac, false)
    }
}

/// Maps the square `[-1,1]^2` onto the upper unit hemisphere: a radial
/// (max-norm preserving) square-to-disk projection followed by the vertical
/// lift. The square boundary lands on the equator, which is what makes the
/// reflected copies glue continuously.
fn square_to_hemisphere<T: Real>(u: T, v: T) -> (T, T, T) {
    let m = u.abs().max(v.abs());
    if m == T::zero() {
        return (T::zero(), T::zero(), T::one());
    }
    let e = u.hypot(v);
    let scale = m / e;
    let (x, y) = (u * scale, v * scale);
    let z = (T::one() - x * x - y * y).max(T::zero()).sqrt();
    (x, y, z)
}

fn eval_zorich<T: Real>(x1: T, x2: T, x3: T) -> Result<Point<T>, MapError<T>> {
    if x3 > plain_limit::<T>().ln() {
        // |Z(x)| = e^{x3} in the Euclidean norm.
        return Err(MapError::EscapedRange { log_magnitude: x3 });
    }
    let (u, odd_u) = fold(x1);
    let (v, odd_v) = fold(x2);
    let (hx, hy, hz) = square_to_hemisphere(u, v);
    let hz = if odd_u ^ odd_v { -hz } else { hz };
    let s = x3.exp();
    Ok(Point::Cartesian(vec![hx * s, hy * s, hz * s]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial_map() -> MapFamily<f64> {
        let mut profile = GrowthProfile::new(2, 5.0).unwrap();
        profile.extend_to(30);
        MapFamily::radial(profile, 2).unwrap()
    }

    #[test]
    fn point_round_trip() {
        let p = Point::<f64>::from_coords(vec![3.0, -4.0]).unwrap();
        let polar = p.to_polar();
        let back = polar.to_cartesian().unwrap();
        assert!((back[0] - 3.0).abs() < 1e-12 && (back[1] + 4.0).abs() < 1e-12);
        assert_eq!(p.max_norm().value(), 4.0);
        assert!((p.euclid_norm().value() - 5.0).abs() < 1e-12);
        // Polar magnitudes never lose the exact direction ratio.
        if let Point::Polar { direction, .. } = polar {
            assert_eq!(direction[1].abs(), 1.0);
        }
    }

    #[test]
    fn point_beyond_plain_scale() {
        let p = Point::from_polar(vec![1.0, 0.0], LogMag::from_ln(5000.0)).unwrap();
        assert!(matches!(p.to_cartesian(), Err(MapError::BeyondPlainScale { .. })));
        assert_eq!(p.max_norm().ln(), Some(5000.0));
    }

    #[test]
    fn radial_eval_preserves_direction_and_uses_growth() {
        let map = radial_map();
        let p = Point::from_coords(vec![5.0, 2.5]).unwrap();
        let img = map.eval(&p).unwrap();
        match &img {
            Point::Polar { direction, radius } => {
                assert!((direction[0] - 1.0).abs() < 1e-15);
                assert!((direction[1] - 0.5).abs() < 1e-15);
                assert!((radius.value() / 25.0 - 1.0).abs() < 1e-12);
            }
            _ => panic!("radial image should be polar"),
        }
        // Below radius 1 the map is the identity on radii.
        let small = Point::from_coords(vec![0.25, 0.1]).unwrap();
        let img = map.eval(&small).unwrap();
        assert!((img.max_norm().value() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn radial_modulus_exact_equals_sampled() {
        let map = radial_map();
        let r = LogMag::from_value(7.0).unwrap();
        let exact = map.max_modulus(r).unwrap();
        assert!(!exact.sampled);
        let sampled = map
            .clone()
            .with_max_modulus_mode(MaxModulusMode::Sampled { n_samples: 17 })
            .max_modulus(r)
            .unwrap();
        assert!(sampled.sampled);
        let (a, b) = (exact.value.ln().unwrap(), sampled.value.ln().unwrap());
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn ladder_matches_knots_for_radial_base() {
        let map = radial_map();
        let levels = map.iterate_max_modulus(LogMag::from_value(5.0).unwrap(), 6).unwrap();
        let profile = map.profile().unwrap();
        for (i, level) in levels.iter().enumerate() {
            let knot = profile.knot(3 + i as u32).unwrap();
            assert_eq!(level.ln(), knot.ln(), "M^{}(5) != r_{}", i + 1, 3 + i);
        }
    }

    #[test]
    fn ladder_requires_climbing() {
        let map = radial_map();
        let err = map.iterate_max_modulus(LogMag::from_value(0.5).unwrap(), 3);
        assert!(matches!(err, Err(MapError::BelowEscapeThreshold { .. })));
    }

    #[test]
    fn entire_product_trivial_square() {
        // c = 1, no roots: f(z) = z^2, so M(2) = 4 whatever the samples.
        let map = MapFamily::entire_product(1.0f64, vec![]).unwrap();
        let m = map.max_modulus(LogMag::from_value(2.0).unwrap()).unwrap();
        assert!((m.value.value() - 4.0).abs() < 1e-9);
        let img = map.eval(&Point::from_coords(vec![2.0, 0.0]).unwrap()).unwrap();
        let c = img.to_cartesian().unwrap();
        assert!((c[0] - 4.0).abs() < 1e-12 && c[1].abs() < 1e-12);
    }

    #[test]
    fn entire_product_matches_independent_log_route() {
        let map = MapFamily::entire_product(1.0f64, vec![10.0, 1e4, 1e9, 1e16]).unwrap();
        for &(x, y) in &[(3.0, 4.0), (-120.0, 7.5), (0.0, 55.0), (9000.0, -9000.0)] {
            let img = map.eval(&Point::from_coords(vec![x, y]).unwrap()).unwrap();
            let direct = img.euclid_norm().ln().unwrap();
            // Independent route: sum of factor log-magnitudes.
            let mut expect = 2.0 * x.hypot(y).ln();
            for a in [10.0, 1e4, 1e9, 1e16] {
                expect += (1.0 + x / a).hypot(y / a).ln();
            }
            assert!((direct - expect).abs() < 1e-10 * expect.abs().max(1.0), "at ({x}, {y})");
        }
    }

    #[test]
    fn entire_product_escape_is_flagged_with_estimate() {
        let map = MapFamily::entire_product(1.0f64, vec![10.0]).unwrap();
        let big = 1e200;
        let err = map.eval(&Point::from_coords(vec![big, 0.0]).unwrap());
        match err {
            Err(MapError::EscapedRange { log_magnitude }) => {
                // ln|f| ~ 2 ln z + ln z - ln 10.
                let expect = 3.0 * big.ln() - 10.0f64.ln();
                assert!((log_magnitude - expect).abs() < 1e-6 * expect);
            }
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn entire_modulus_sample_count_is_monotone() {
        let map = MapFamily::entire_product(0.7f64, vec![10.0, 1e4]).unwrap();
        let r = LogMag::from_value(250.0).unwrap();
        let m = |n: usize| {
            map.clone()
                .with_max_modulus_mode(MaxModulusMode::Sampled { n_samples: n })
                .max_modulus(r)
                .unwrap()
                .value
        };
        let (m8, m16, m32) = (m(8), m(16), m(32));
        assert!(m8 <= m16 && m16 <= m32);
        // Analytic maximum sits on the positive real axis.
        let exact = 0.7 * 250.0f64.powi(2) * (1.0 + 250.0 / 10.0) * (1.0 + 250.0 / 1e4);
        assert!(m32.value() <= exact * (1.0 + 1e-12));
    }

    #[test]
    fn zorich_axis_and_continuity() {
        let map = MapFamily::zorich(2.0f64).unwrap();
        let img = map.eval(&Point::from_coords(vec![0.0, 0.0, 3.0]).unwrap()).unwrap();
        let c = img.to_cartesian().unwrap();
        assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12);
        assert!((c[2] - 3.0f64.exp()).abs() < 1e-9);
        // Crossing a fold line is continuous and flips the hemisphere.
        let at = |x1: f64| {
            map.eval(&Point::from_coords(vec![x1, 0.3, 1.0]).unwrap())
                .unwrap()
                .to_cartesian()
                .unwrap()
        };
        // The height approaches the equator like sqrt(distance to fold),
        // so the mismatch across the fold is O(sqrt(eps)), not O(eps).
        let eps = 1e-9f64;
        let tol = 4.0 * (2.0 * eps).sqrt() * 1.0f64.exp();
        let (a, b) = (at(1.0 - eps), at(1.0 + eps));
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < tol, "discontinuity in coordinate {i}");
        }
        assert!(a[2] > 0.0 && b[2] < 0.0, "fold crossing should flip the hemisphere");
        let deep = at(1.5);
        assert!(deep[2] < 0.0, "odd reflection should flip the hemisphere");
        // Euclidean magnitude is e^{x3} exactly.
        let p = Point::from_coords(vec![0.77, -0.2, 2.0]).unwrap();
        let img = map.eval(&p).unwrap();
        assert!((img.euclid_norm().ln().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zorich_escape() {
        let map = MapFamily::zorich(2.0f64).unwrap();
        let err = map.eval(&Point::from_coords(vec![0.0, 0.0, 1e10]).unwrap());
        match err {
            Err(MapError::EscapedRange { log_magnitude }) => assert_eq!(log_magnitude, 1e10),
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn dilatation_power_in_log_form() {
        let map = MapFamily::zorich(2.0f64).unwrap();
        let p = map.dilatation_power_bound(10);
        assert!((p.value() - 1024.0).abs() < 1e-6);
        let huge = map.dilatation_power_bound(5000);
        assert!((huge.ln().unwrap() - 5000.0 * 2.0f64.ln()).abs() < 1e-9);
        assert!(!huge.is_plain_scale());
    }

    #[test]
    fn family_validation() {
        assert!(MapFamily::entire_product(0.0f64, vec![]).is_err());
        assert!(MapFamily::entire_product(1.0f64, vec![5.0, 2.0]).is_err());
        assert!(MapFamily::entire_product(1.0f64, vec![-1.0, 2.0]).is_err());
        assert!(MapFamily::zorich(0.5f64).is_err());
        let profile = GrowthProfile::new(2, 5.0).unwrap();
        assert!(MapFamily::radial(profile, 1).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let map = radial_map();
        let p = Point::from_coords(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(map.eval(&p), Err(MapError::DimensionMismatch { expected: 2, got: 3 })));
    }
}

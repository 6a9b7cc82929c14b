//! Orbits, maximum-modulus ladders and escape classification.
//!
//! The central comparison is between an orbit's radii and the iterated
//! maximum modulus of the map from a base radius: a point is *fast escaping*
//! with offset `ell` when `|f^{k+ell}(x)| >= M^k(base)` for every admissible
//! `k >= 1`. Offset 0 is the strongest statement a finite experiment can
//! make: the orbit keeps pace with the ladder from the start.
//!
//! All radii are log-scale magnitudes, so classification works unchanged for
//! orbits whose plain coordinates overflowed thousands of iterations ago.

use serde::Serialize;
use thiserror::Error;

use crate::loggrowth::LogMag;
use crate::maps::{MapError, MapFamily, Point};
use crate::real::Real;

/// Errors from orbit computation and classification.
#[derive(Debug, Error)]
pub enum EscapeError<T: Real> {
    #[error(transparent)]
    Map(#[from] MapError<T>),
    #[error("ladder too short: need M^k up to k = {required}, have {have}")]
    LadderTooShort { required: usize, have: usize },
    #[error("ladder levels must strictly increase (violation at level {at})")]
    LadderNotIncreasing { at: usize },
    #[error("separation constant c must exceed 1, got {0}")]
    InvalidC(T),
    #[error("ladder exhausted before all three separation conditions stabilised ({0})")]
    LadderExhaustedForK2(String),
    #[error("ln ln M^k undefined: level {k} has M^k <= 1")]
    LogLogUndefined { k: usize },
    #[error("apart-hypothesis check has empty k range: k0 = {k0}, max usable k = {k_hi}")]
    ApartRangeEmpty { k0: usize, k_hi: isize },
    #[error("k0 must be >= 1")]
    InvalidK0,
}

/// An orbit `x, f(x), f^2(x), ...` recorded through its radii.
///
/// `radii[k]` is the family-norm magnitude of `f^k(x)`; `truncated` means
/// the map signalled an escape beyond representable range at the last
/// recorded step (only possible for non-radial families), in which case the
/// final entry is the log-scale estimate of that unrepresentable magnitude.
#[derive(Debug, Clone)]
pub struct OrbitRecord<T> {
    pub start: Point<T>,
    pub radii: Vec<LogMag<T>>,
    pub truncated: bool,
}

impl<T: Real> OrbitRecord<T> {
    /// Number of iterations recorded (`radii.len() - 1`).
    pub fn k_max(&self) -> usize {
        self.radii.len() - 1
    }
}

/// Computes an orbit of up to `k_max` iterations. The radial model iterates
/// log radii exactly and never truncates; other families stop early (with
/// the truncation flag) once an image leaves plain scale.
pub fn compute_orbit<T: Real>(
    map: &MapFamily<T>,
    start: Point<T>,
    k_max: usize,
) -> Result<OrbitRecord<T>, EscapeError<T>> {
    let mut radii = Vec::with_capacity(k_max + 1);
    radii.push(map.norm(&start));
    let mut current = start.clone();
    let mut truncated = false;
    for _ in 0..k_max {
        match map.eval(&current) {
            Ok(next) => {
                radii.push(map.norm(&next));
                current = next;
            }
            Err(MapError::EscapedRange { log_magnitude }) => {
                radii.push(LogMag::from_ln(log_magnitude));
                truncated = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(OrbitRecord { start, radii, truncated })
}

/// The iterated maximum modulus `M^k(base)`, with `levels[0] = base`.
#[derive(Debug, Clone)]
pub struct Ladder<T> {
    levels: Vec<LogMag<T>>,
    sampled: bool,
}

impl<T: Real> Ladder<T> {
    /// Builds a ladder by iterating the family's maximum modulus `k` times.
    pub fn compute(map: &MapFamily<T>, base_r: LogMag<T>, k: usize) -> Result<Self, EscapeError<T>> {
        let mut levels = Vec::with_capacity(k + 1);
        levels.push(base_r);
        levels.extend(map.iterate_max_modulus(base_r, k)?);
        let sampled = levels.len() > 1
            && map.max_modulus(base_r).map(|m| m.sampled).unwrap_or(false);
        Self::from_levels_inner(levels, sampled)
    }

    /// Builds from explicit levels `[M^0, M^1, ...]`; they must strictly
    /// increase.
    pub fn from_levels(levels: Vec<LogMag<T>>) -> Result<Self, EscapeError<T>> {
        Self::from_levels_inner(levels, false)
    }

    fn from_levels_inner(levels: Vec<LogMag<T>>, sampled: bool) -> Result<Self, EscapeError<T>> {
        if levels.is_empty() {
            return Err(EscapeError::LadderTooShort { required: 1, have: 0 });
        }
        for (i, w) in levels.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(EscapeError::LadderNotIncreasing { at: i + 1 });
            }
        }
        Ok(Self { levels, sampled })
    }

    pub fn base_r(&self) -> LogMag<T> {
        self.levels[0]
    }

    /// `M^k(base)`, if the ladder reaches that high.
    pub fn level(&self, k: usize) -> Option<LogMag<T>> {
        self.levels.get(k).copied()
    }

    /// Highest iterate index available.
    pub fn top_k(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[LogMag<T>] {
        &self.levels
    }

    /// True when levels came from sampled modulus estimates.
    pub fn sampled(&self) -> bool {
        self.sampled
    }
}

/// Orbit classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EscapeTag {
    /// `|f^{k+offset}(x)| >= M^k(base)` for all checked `k >= 1`.
    FastEscaping { offset: usize },
    /// Radii exceeded the bail threshold but no offset kept pace with the
    /// ladder over the whole checked range.
    EscapingUndetermined,
    /// Neither: the orbit stayed below bail for every examined iterate.
    BoundedSoFar,
}

/// Classification plus the amount of evidence behind it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EscapeClass {
    pub tag: EscapeTag,
    /// Number of ladder comparisons (or iterations examined) supporting the
    /// verdict.
    pub evidence_k: usize,
}

/// Classifies an orbit against a ladder.
///
/// Offsets are tried smallest first, so the returned offset is minimal; the
/// fast-escaping check for offset `ell` requires at least one admissible
/// `k` (i.e. `ell < k_max`). Requires the ladder to extend `ell_max` levels
/// beyond the orbit so every offset is checked against full information.
pub fn classify<T: Real>(
    orbit: &OrbitRecord<T>,
    ladder: &Ladder<T>,
    ell_max: usize,
    bail: LogMag<T>,
) -> Result<EscapeClass, EscapeError<T>> {
    let k_max = orbit.k_max();
    let required = k_max + ell_max;
    if ladder.top_k() < required {
        return Err(EscapeError::LadderTooShort { required, have: ladder.top_k() });
    }
    for ell in 0..=ell_max.min(k_max.saturating_sub(1)) {
        let hi = k_max - ell;
        let fast = (1..=hi).all(|k| orbit.radii[k + ell] >= ladder.level(k).unwrap());
        if fast {
            return Ok(EscapeClass { tag: EscapeTag::FastEscaping { offset: ell }, evidence_k: hi });
        }
    }
    if orbit.truncated || orbit.radii.iter().any(|r| *r > bail) {
        return Ok(EscapeClass { tag: EscapeTag::EscapingUndetermined, evidence_k: k_max });
    }
    Ok(EscapeClass { tag: EscapeTag::BoundedSoFar, evidence_k: k_max })
}

/// Result of the two-orbit separation check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApartReport {
    pub holds: bool,
    /// Inclusive `k` range that was checked.
    pub checked_k: (usize, usize),
    /// First `k` at which the sandwich failed, when it did.
    pub first_violation: Option<usize>,
}

/// Checks the orbit-separation sandwich: for every `k` in
/// `k0 ..= min(k_max) - ell0`,
///
/// ```text
/// |f^{k+ell0}(y)| <= M^{k-1}(r) < M^k(r) <= |f^{k+ell0}(x)|
/// ```
///
/// i.e. the two orbits stay separated by one full ladder rung.
pub fn check_apart_hypothesis<T: Real>(
    orbit_x: &OrbitRecord<T>,
    orbit_y: &OrbitRecord<T>,
    ladder: &Ladder<T>,
    ell0: usize,
    k0: usize,
) -> Result<ApartReport, EscapeError<T>> {
    if k0 < 1 {
        return Err(EscapeError::InvalidK0);
    }
    let usable = orbit_x.k_max().min(orbit_y.k_max());
    let k_hi = usable as isize - ell0 as isize;
    if k_hi < k0 as isize {
        return Err(EscapeError::ApartRangeEmpty { k0, k_hi });
    }
    let k_hi = k_hi as usize;
    if ladder.top_k() < k_hi {
        return Err(EscapeError::LadderTooShort { required: k_hi, have: ladder.top_k() });
    }
    let mut first_violation = None;
    for k in k0..=k_hi {
        let ok = orbit_y.radii[k + ell0] <= ladder.level(k - 1).unwrap()
            && ladder.level(k - 1).unwrap() < ladder.level(k).unwrap()
            && ladder.level(k).unwrap() <= orbit_x.radii[k + ell0];
        if !ok {
            first_violation = Some(k);
            break;
        }
    }
    Ok(ApartReport { holds: first_violation.is_none(), checked_k: (k0, k_hi), first_violation })
}

/// Finds the least `k2` such that for every `k >= k2` within the ladder all
/// three separation conditions hold:
///
/// 1. `ln ln M^{k-1} >= 2k ln c`
/// 2. `ln M^k >= 2 ln M^{k-1}`
/// 3. `c^{2k} >= c^k + ln 2`
///
/// Errors when any condition still fails at the top of the ladder.
pub fn find_k2<T: Real>(c: T, ladder: &Ladder<T>) -> Result<usize, EscapeError<T>> {
    if !(c > T::one()) {
        return Err(EscapeError::InvalidC(c));
    }
    let top = ladder.top_k();
    if top < 1 {
        return Err(EscapeError::LadderTooShort { required: 1, have: 0 });
    }
    let ln_c = c.ln();
    let two = T::one() + T::one();
    let mut last_fail: [Option<usize>; 3] = [None; 3];
    for k in 1..=top {
        let kf = T::from(k).unwrap();
        let prev_log = ladder.level(k - 1).unwrap().ln_or_neg_inf();
        let cond1 = prev_log > T::zero() && prev_log.ln() >= two * kf * ln_c;
        let cond2 = ladder.level(k).unwrap().ln_or_neg_inf() >= two * prev_log;
        // c^{2k} >= c^k + ln 2, rearranged stably via t = k ln c:
        // t >= ln(1 + ln 2 * e^{-t}).
        let t = kf * ln_c;
        let cond3 = t >= (T::LN_2() * (-t).exp()).ln_1p();
        if !cond1 {
            last_fail[0] = Some(k);
        }
        if !cond2 {
            last_fail[1] = Some(k);
        }
        if !cond3 {
            last_fail[2] = Some(k);
        }
    }
    let k2 = last_fail.iter().flatten().max().map_or(1, |k| k + 1);
    if k2 > top {
        let detail = format!(
            "last failures within {top} levels: condition1 at {:?}, condition2 at {:?}, condition3 at {:?}",
            last_fail[0], last_fail[1], last_fail[2]
        );
        return Err(EscapeError::LadderExhaustedForK2(detail));
    }
    Ok(k2)
}

/// The sequence `ln ln M^k / k` for `k = 1 ..= top`. Its divergence is what
/// separates genuinely transcendental-type growth from power-type ladders
/// (for which it stays bounded). Errors when some `M^k <= 1`.
pub fn loglog_growth_report<T: Real>(ladder: &Ladder<T>) -> Result<Vec<T>, EscapeError<T>> {
    let mut values = Vec::with_capacity(ladder.top_k());
    for k in 1..=ladder.top_k() {
        let log = ladder.level(k).unwrap().ln_or_neg_inf();
        if !(log > T::zero()) {
            return Err(EscapeError::LogLogUndefined { k });
        }
        values.push(log.ln() / T::from(k).unwrap());
    }
    Ok(values)
}

/// Divergence assessment for a `ln ln M^k / k` sequence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DivergenceVerdict {
    /// Smallest `k` (1-based) from which every later value exceeds the
    /// threshold.
    pub sustained_above_from: Option<usize>,
    /// Smallest `k` from which the sequence strictly increases.
    pub increasing_from: Option<usize>,
    /// Both: the tail exceeds the threshold and keeps growing.
    pub diverging: bool,
}

/// Assesses whether the tail of `values` exceeds `threshold` and increases.
pub fn divergence_verdict<T: Real>(values: &[T], threshold: T) -> DivergenceVerdict {
    let n = values.len();
    let mut sustained = None;
    if n > 0 && *values.last().unwrap() > threshold {
        let mut from = n;
        while from > 1 && values[from - 2] > threshold {
            from -= 1;
        }
        sustained = Some(from);
    }
    let mut increasing = None;
    if n >= 2 && values[n - 1] > values[n - 2] {
        let mut from = n - 1;
        while from > 1 && values[from - 1] > values[from - 2] {
            from -= 1;
        }
        increasing = Some(from);
    }
    DivergenceVerdict {
        sustained_above_from: sustained,
        increasing_from: increasing,
        diverging: sustained.is_some() && increasing.is_some(),
    }
}

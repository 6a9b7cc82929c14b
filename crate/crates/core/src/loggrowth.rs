//! Log-scale magnitude arithmetic and the piecewise-linear growth profile.
//!
//! Magnitudes here routinely exceed every floating-point range after a few
//! map iterations, so they are stored as natural logarithms ([`LogMag`]).
//! The growth profile ([`GrowthProfile`]) is the backbone of the radial model
//! map: a counting function `nu` that equals `n0` up to a starting radius
//! `r'` and then climbs linearly (in plain scale) from value `n` at knot
//! `r_n` to `n + 1` at knot `r_{n+1}`, together with the induced growth
//! function
//!
//! ```text
//! L(r) = exp( integral_1^r nu(t)/t dt ),        r_{n+1} = L(r_n).
//! ```
//!
//! Knots are generated by a closed-form recurrence on the log-scale gaps
//! `delta_n = log r_{n+1} - log r_n`:
//!
//! ```text
//! delta_{n0} = (n0 - 1) * ln r'
//! delta_n    = 1 + ( (n-1) - 1/(e^{delta_{n-1}} - 1) ) * delta_{n-1}
//! ```
//!
//! which follows from integrating the linear `nu` across one full segment.
//! All evaluations use `exp_m1`/`ln_1p` forms so they stay accurate both for
//! narrow early segments and for the astronomically wide late ones.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use thiserror::Error;

use crate::real::{cast, plain_limit, Real};

/// Errors from log-scale arithmetic and profile evaluation.
#[derive(Debug, Error)]
pub enum GrowthError {
    #[error("magnitude must be nonnegative, got {0}")]
    NegativeMagnitude(f64),
    #[error("zero magnitude cannot be raised to the nonpositive power {0}")]
    ZeroPower(f64),
    #[error("profile floor n0 must be an integer >= 2, got {0}")]
    InvalidN0(u32),
    #[error("profile starting radius r' must exceed 4, got {0}")]
    InvalidRPrime(f64),
    #[error("profile exhausted: log r = {log_r} lies beyond covered log r = {covered}; extend the profile")]
    ProfileExhausted { log_r: f64, covered: f64 },
    #[error("growth function L(r) requires r >= 1, got log r = {0}")]
    BelowOne(f64),
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    InvalidEpsilon(f64),
    #[error("ratio sequence needs n_max >= n0 + 2 (n0 = {n0}, n_max = {n_max})")]
    RangeTooShort { n0: u32, n_max: u32 },
    #[error("profile table parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// `1 / (e^x - 1)` for `x > 0`, stable for both tiny and huge `x`.
pub(crate) fn inv_expm1<T: Real>(x: T) -> T {
    debug_assert!(x > T::zero());
    (-x).exp() / -(-x).exp_m1()
}

/// `(e^a - 1) / (e^b - 1)` for `0 <= a <= b`, `b > 0`, without overflow.
pub(crate) fn expm1_ratio<T: Real>(a: T, b: T) -> T {
    debug_assert!(a >= T::zero() && b > T::zero());
    (a - b).exp() * -(-a).exp_m1() / -(-b).exp_m1()
}

/// A nonnegative magnitude stored as its natural logarithm.
///
/// Zero is representable through a dedicated flag; every other value is
/// `exp(log_value)`. Comparisons order zero below every positive magnitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogMag<T> {
    log_value: T,
    zero: bool,
}

impl<T: Real> LogMag<T> {
    /// The magnitude 0.
    pub fn zero() -> Self {
        Self { log_value: T::neg_infinity(), zero: true }
    }

    /// The magnitude 1.
    pub fn one() -> Self {
        Self { log_value: T::zero(), zero: false }
    }

    /// Builds from a plain-scale value; `v = 0` maps to the zero magnitude.
    pub fn from_value(v: T) -> Result<Self, GrowthError> {
        if v < T::zero() || v.is_nan() {
            return Err(GrowthError::NegativeMagnitude(v.to_f64().unwrap_or(f64::NAN)));
        }
        if v == T::zero() {
            return Ok(Self::zero());
        }
        Ok(Self { log_value: v.ln(), zero: false })
    }

    /// Builds directly from a natural logarithm (never the zero magnitude).
    pub fn from_ln(log_value: T) -> Self {
        debug_assert!(!log_value.is_nan(), "log magnitude must not be NaN");
        Self { log_value, zero: false }
    }

    /// Natural logarithm, or `None` for the zero magnitude.
    pub fn ln(&self) -> Option<T> {
        if self.zero {
            None
        } else {
            Some(self.log_value)
        }
    }

    /// Natural logarithm with zero mapped to `-inf`.
    pub fn ln_or_neg_inf(&self) -> T {
        if self.zero {
            T::neg_infinity()
        } else {
            self.log_value
        }
    }

    /// Plain-scale value; overflows to `inf` when the exponent is too large.
    pub fn value(&self) -> T {
        if self.zero {
            T::zero()
        } else {
            self.log_value.exp()
        }
    }

    /// True for the zero magnitude.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// True when `exp(log_value)` is finitely representable in plain scale.
    pub fn is_plain_scale(&self) -> bool {
        self.zero || self.log_value <= plain_limit::<T>().ln()
    }

    /// Raises to a real power. Zero to a nonpositive power is an error.
    pub fn powf(self, p: T) -> Result<Self, GrowthError> {
        if self.zero {
            if p <= T::zero() {
                return Err(GrowthError::ZeroPower(p.to_f64().unwrap_or(f64::NAN)));
            }
            return Ok(Self::zero());
        }
        Ok(Self::from_ln(self.log_value * p))
    }

    /// Multiplies by a plain-scale factor, which must be strictly positive.
    pub fn scaled(self, factor: T) -> Self {
        assert!(factor > T::zero(), "scaling factor must be positive");
        if self.zero {
            return self;
        }
        Self::from_ln(self.log_value + factor.ln())
    }

    /// Larger of two magnitudes.
    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Smaller of two magnitudes.
    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl<T: Real> Mul for LogMag<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.zero || rhs.zero {
            return Self::zero();
        }
        Self::from_ln(self.log_value + rhs.log_value)
    }
}

impl<T: Real> PartialEq for LogMag<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self.zero, other.zero) {
            (true, true) => true,
            (false, false) => self.log_value == other.log_value,
            _ => false,
        }
    }
}

impl<T: Real> Eq for LogMag<T> {}

impl<T: Real> PartialOrd for LogMag<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for LogMag<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.zero, other.zero) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self
                .log_value
                .partial_cmp(&other.log_value)
                .expect("log magnitudes are never NaN"),
        }
    }
}

impl<T: Real> fmt::Display for LogMag<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            write!(f, "0")
        } else if self.log_value.abs() <= cast(200.0) {
            write!(f, "{}", self.log_value.exp())
        } else {
            write!(f, "exp({})", self.log_value)
        }
    }
}

/// Piecewise-linear counting function and its induced growth function.
///
/// Stores, for `n = n0, n0+1, ...`, the knot logs `log r_n` and the segment
/// widths `delta_n = log r_{n+1} - log r_n`. The arrays always have equal
/// length: the last stored `delta` describes the segment beyond the last
/// knot (it only depends on the previous `delta` through the recurrence), so
/// evaluation is valid up to `log r_last + delta_last`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile<T> {
    n0: u32,
    log_knots: Vec<T>,
    deltas: Vec<T>,
}

impl<T: Real> GrowthProfile<T> {
    /// Creates a profile with floor `n0 >= 2` and starting radius `r' > 4`.
    pub fn new(n0: u32, r_prime: T) -> Result<Self, GrowthError> {
        if n0 < 2 {
            return Err(GrowthError::InvalidN0(n0));
        }
        if !(r_prime > cast(4.0)) {
            return Err(GrowthError::InvalidRPrime(r_prime.to_f64().unwrap_or(f64::NAN)));
        }
        let log_rp = r_prime.ln();
        let first_delta = cast::<T>(f64::from(n0 - 1)) * log_rp;
        Ok(Self { n0, log_knots: vec![log_rp], deltas: vec![first_delta] })
    }

    /// Floor value of the counting function.
    pub fn n0(&self) -> u32 {
        self.n0
    }

    /// Starting radius `r'` (equals the first knot `r_{n0}`).
    pub fn r_prime(&self) -> T {
        self.log_knots[0].exp()
    }

    /// Index of the last stored knot.
    pub fn last_n(&self) -> u32 {
        self.n0 + (self.log_knots.len() - 1) as u32
    }

    /// Largest `log r` the profile can currently evaluate (one virtual knot
    /// beyond the last stored one, since its segment width is already known).
    pub fn covered_log_r(&self) -> T {
        *self.log_knots.last().unwrap() + *self.deltas.last().unwrap()
    }

    /// Knot magnitude `r_n`, if stored.
    pub fn knot(&self, n: u32) -> Option<LogMag<T>> {
        self.index_of(n).map(|i| LogMag::from_ln(self.log_knots[i]))
    }

    /// Segment width `delta_n = log r_{n+1} - log r_n`, if stored.
    pub fn delta(&self, n: u32) -> Option<T> {
        self.index_of(n).map(|i| self.deltas[i])
    }

    /// Iterates stored `(n, log r_n, delta_n)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (u32, T, T)> + '_ {
        self.log_knots
            .iter()
            .zip(&self.deltas)
            .enumerate()
            .map(move |(i, (lk, d))| (self.n0 + i as u32, *lk, *d))
    }

    fn index_of(&self, n: u32) -> Option<usize> {
        if n < self.n0 {
            return None;
        }
        let i = (n - self.n0) as usize;
        (i < self.log_knots.len()).then_some(i)
    }

    /// Extends stored knots so that `last_n() >= n`.
    pub fn extend_to(&mut self, n: u32) {
        while self.last_n() < n {
            let i = self.log_knots.len() - 1;
            let last_log = self.log_knots[i];
            let last_delta = self.deltas[i];
            let next_n = self.n0 + i as u32 + 1;
            self.log_knots.push(last_log + last_delta);
            let coeff = cast::<T>(f64::from(next_n - 1)) - inv_expm1(last_delta);
            self.deltas.push(T::one() + coeff * last_delta);
        }
    }

    /// Extends until `log_r` is within the evaluable range.
    pub fn extend_to_cover(&mut self, log_r: T) {
        while self.covered_log_r() < log_r {
            self.extend_to(self.last_n() + 1);
        }
    }

    /// Counting function `nu(r)`: `n0` on `[0, r']`, then linear in plain
    /// scale from `n` at `r_n` to `n + 1` at `r_{n+1}`.
    pub fn nu_eval(&self, r: LogMag<T>) -> Result<T, GrowthError> {
        let n0 = cast::<T>(f64::from(self.n0));
        let lr = match r.ln() {
            None => return Ok(n0),
            Some(lr) => lr,
        };
        if lr <= self.log_knots[0] {
            return Ok(n0);
        }
        let (n, d, dn) = self.segment(lr)?;
        Ok(cast::<T>(f64::from(n)) + expm1_ratio(d, dn))
    }

    /// Growth function `L(r)` for `r >= 1`, as a log-scale magnitude.
    ///
    /// `log L(r) = integral_1^r nu(t)/t dt`; over `[1, r']` the integrand is
    /// the constant `n0`, and over a partial segment `[r_n, r]` the linear
    /// `nu` integrates in closed form to
    /// `(e^d - 1)/(e^delta_n - 1) + (n - 1/(e^delta_n - 1)) * d`
    /// with `d = log r - log r_n`. Knots map to knots exactly:
    /// `L(r_n) = r_{n+1}` bit-for-bit.
    pub fn l_eval(&self, r: LogMag<T>) -> Result<LogMag<T>, GrowthError> {
        let lr = r.ln_or_neg_inf();
        if lr < T::zero() {
            return Err(GrowthError::BelowOne(lr.to_f64().unwrap_or(f64::NEG_INFINITY)));
        }
        if lr <= self.log_knots[0] {
            return Ok(LogMag::from_ln(cast::<T>(f64::from(self.n0)) * lr));
        }
        let (n, d, dn) = self.segment(lr)?;
        let i = (n - self.n0) as usize;
        let log_next = self.log_knots[i] + self.deltas[i];
        if d == T::zero() {
            return Ok(LogMag::from_ln(log_next));
        }
        let partial = expm1_ratio(d, dn) + (cast::<T>(f64::from(n)) - inv_expm1(dn)) * d;
        Ok(LogMag::from_ln(log_next + partial))
    }

    /// Locates the segment containing `lr > log r_{n0}` and returns
    /// `(n, lr - log r_n, delta_n)`.
    fn segment(&self, lr: T) -> Result<(u32, T, T), GrowthError> {
        let covered = self.covered_log_r();
        if lr > covered {
            return Err(GrowthError::ProfileExhausted {
                log_r: lr.to_f64().unwrap_or(f64::INFINITY),
                covered: covered.to_f64().unwrap_or(f64::INFINITY),
            });
        }
        let i = self.log_knots.partition_point(|k| *k <= lr) - 1;
        let n = self.n0 + i as u32;
        Ok((n, lr - self.log_knots[i], self.deltas[i]))
    }

    /// The sequence `(n, n * delta_n)` over stored knots. In plain scale
    /// `n * delta_n = ln( r_{n+1}^n / r_n^n )`, the quantity whose divergence
    /// separates genuinely fast growth from polynomial-type ladders.
    pub fn growth_condition_sequence(&self) -> Vec<(u32, T)> {
        self.rows().map(|(n, _, d)| (n, cast::<T>(f64::from(n)) * d)).collect()
    }

    /// The ratio sequence `b_n = ( ln(2(n+1)) + lnln(2 r_n) ) / lnln(2 r_n)`
    /// for `n = n0 ..= n_max`, whose limit inferior governs how slowly an
    /// orbit threading the knot rings may grow relative to the maximum
    /// modulus ladder.
    pub fn liminf_ratio_sequence(&self, n_max: u32) -> Result<Vec<(u32, T)>, GrowthError> {
        if n_max < self.n0 + 2 {
            return Err(GrowthError::RangeTooShort { n0: self.n0, n_max });
        }
        if n_max > self.last_n() {
            return Err(GrowthError::ProfileExhausted {
                log_r: f64::from(n_max),
                covered: f64::from(self.last_n()),
            });
        }
        let ln2 = T::LN_2();
        let two = cast::<T>(2.0);
        Ok(self
            .rows()
            .take_while(|(n, _, _)| *n <= n_max)
            .map(|(n, lk, _)| {
                let lnln = (ln2 + lk).ln();
                let b = ((two * (cast::<T>(f64::from(n)) + T::one())).ln() + lnln) / lnln;
                (n, b)
            })
            .collect())
    }

    /// Serialises stored knots as a whitespace-separated text table, one row
    /// per knot: `n log_r_n delta_n`, 17 significant digits, so that parsing
    /// the output reproduces the profile bit for bit.
    pub fn to_table_string(&self) -> String {
        let mut s = String::from("# columns: n log_r_n delta_n\n");
        for (n, lk, d) in self.rows() {
            s.push_str(&format!("{} {:.16e} {:.16e}\n", n, lk, d));
        }
        s
    }

    /// Parses the table format produced by [`Self::to_table_string`].
    /// Lines starting with `#` and blank lines are ignored.
    pub fn from_table_str(s: &str) -> Result<Self, GrowthError> {
        let mut ns: Vec<u32> = Vec::new();
        let mut log_knots: Vec<T> = Vec::new();
        let mut deltas: Vec<T> = Vec::new();
        for (line_no, line) in s.lines().enumerate() {
            let line_no = line_no + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let parse_err = |reason: String| GrowthError::Parse { line: line_no, reason };
            let n: u32 = fields
                .next()
                .ok_or_else(|| parse_err("missing knot index".into()))?
                .parse()
                .map_err(|e| parse_err(format!("bad knot index: {e}")))?;
            let lk: T = fields
                .next()
                .ok_or_else(|| parse_err("missing log_r_n".into()))?
                .parse()
                .map_err(|e| parse_err(format!("bad log_r_n: {e}")))?;
            let d: T = fields
                .next()
                .ok_or_else(|| parse_err("missing delta_n".into()))?
                .parse()
                .map_err(|e| parse_err(format!("bad delta_n: {e}")))?;
            if fields.next().is_some() {
                return Err(parse_err("trailing fields".into()));
            }
            if let Some(prev) = ns.last() {
                if n != prev + 1 {
                    return Err(parse_err(format!("knot indices must be consecutive, got {n} after {prev}")));
                }
                if lk <= *log_knots.last().unwrap() {
                    return Err(parse_err("knot logs must strictly increase".into()));
                }
            }
            if !(d > T::zero()) {
                return Err(parse_err("delta_n must be positive".into()));
            }
            ns.push(n);
            log_knots.push(lk);
            deltas.push(d);
        }
        let first_n = *ns.first().ok_or(GrowthError::Parse { line: 0, reason: "empty table".into() })?;
        if first_n < 2 {
            return Err(GrowthError::InvalidN0(first_n));
        }
        if !(log_knots[0] > cast::<T>(4.0f64.ln())) {
            return Err(GrowthError::InvalidRPrime(log_knots[0].exp().to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { n0: first_n, log_knots, deltas })
    }
}

/// The union of the closed intervals `[eps * r_n, r_n]` over stored knots
/// with `n > n0`: the radii excluded from the clean-growth estimates.
#[derive(Debug, Clone)]
pub struct ExceptionalSet<'a, T> {
    profile: &'a GrowthProfile<T>,
    epsilon: T,
}

impl<'a, T: Real> ExceptionalSet<'a, T> {
    /// Requires `0 < epsilon < 1`.
    pub fn new(profile: &'a GrowthProfile<T>, epsilon: T) -> Result<Self, GrowthError> {
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(GrowthError::InvalidEpsilon(epsilon.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { profile, epsilon })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// The interval `[eps * r_n, r_n]`, if knot `n` is stored and `n > n0`.
    pub fn interval(&self, n: u32) -> Option<(LogMag<T>, LogMag<T>)> {
        if n <= self.profile.n0() {
            return None;
        }
        let hi = self.profile.knot(n)?;
        Some((hi.scaled(self.epsilon), hi))
    }

    /// Membership test over all stored intervals.
    pub fn contains(&self, r: LogMag<T>) -> bool {
        let lr = match r.ln() {
            None => return false,
            Some(lr) => lr,
        };
        let log_eps = self.epsilon.ln();
        self.profile
            .rows()
            .skip(1)
            .any(|(_, lk, _)| lr >= log_eps + lk && lr <= lk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> GrowthProfile<f64> {
        let mut p = GrowthProfile::new(2, 5.0).unwrap();
        p.extend_to(12);
        p
    }

    #[test]
    fn logmag_ordering_and_zero() {
        let z = LogMag::<f64>::zero();
        let one = LogMag::<f64>::one();
        let five = LogMag::from_value(5.0).unwrap();
        assert!(z < one && one < five);
        assert_eq!(z, LogMag::zero());
        assert!(z.is_zero());
        assert_eq!(z.value(), 0.0);
        assert_eq!(one.ln(), Some(0.0));
        assert!(LogMag::<f64>::from_value(-1.0).is_err());
    }

    #[test]
    fn logmag_mul_and_pow() {
        let a = LogMag::<f64>::from_value(3.0).unwrap();
        let b = LogMag::<f64>::from_value(7.0).unwrap();
        let prod = a * b;
        assert!((prod.value() - 21.0).abs() < 1e-12);
        assert_eq!(a * LogMag::zero(), LogMag::zero());
        let p = a.powf(4.0).unwrap();
        assert!((p.value() - 81.0).abs() < 1e-9);
        assert!(LogMag::<f64>::zero().powf(-1.0).is_err());
        assert_eq!(LogMag::<f64>::zero().powf(2.0).unwrap(), LogMag::zero());
        // Far beyond plain scale: (e^1000)^2 = e^2000.
        let big = LogMag::from_ln(1000.0).powf(2.0).unwrap();
        assert_eq!(big.ln(), Some(2000.0));
        assert!(!big.is_plain_scale());
    }

    #[test]
    fn profile_rejects_bad_parameters() {
        assert!(matches!(GrowthProfile::<f64>::new(1, 5.0), Err(GrowthError::InvalidN0(1))));
        assert!(matches!(GrowthProfile::<f64>::new(2, 4.0), Err(GrowthError::InvalidRPrime(_))));
        assert!(GrowthProfile::<f64>::new(2, 4.0001).is_ok());
    }

    #[test]
    fn knot_recurrence_matches_closed_forms() {
        let p = profile();
        let ln5 = 5.0f64.ln();
        assert_eq!(p.knot(2).unwrap().ln().unwrap(), ln5);
        assert_eq!(p.delta(2).unwrap(), ln5);
        // r_3 = L(5) = 25 and delta_3 = 1 + 1.75 ln 5 exactly.
        assert_eq!(p.knot(3).unwrap().ln().unwrap(), ln5 + ln5);
        let d3 = p.delta(3).unwrap();
        assert!((d3 - (1.0 + 1.75 * ln5)).abs() < 1e-14, "delta_3 = {d3}");
        let r4 = p.knot(4).unwrap().value();
        assert!((r4 / 1136.1403868597297 - 1.0).abs() < 1e-12, "r_4 = {r4}");
    }

    #[test]
    fn super_polynomial_knot_growth() {
        // log r_{n+1} >= n0 * log r_n over a long stretch of knots.
        let mut p = GrowthProfile::new(2, 5.0).unwrap();
        p.extend_to(40);
        for n in 2..40 {
            let a = p.knot(n).unwrap().ln().unwrap();
            let b = p.knot(n + 1).unwrap().ln().unwrap();
            assert!(b >= 2.0 * a, "knot growth failed at n = {n}: {b} < 2 * {a}");
        }
    }

    #[test]
    fn nu_eval_piecewise_linear() {
        let p = profile();
        let at = |r: f64| p.nu_eval(LogMag::from_value(r).unwrap()).unwrap();
        assert_eq!(at(0.0), 2.0);
        assert_eq!(at(3.0), 2.0);
        assert_eq!(at(5.0), 2.0);
        assert!((at(15.0) - 2.5).abs() < 1e-12);
        assert!((at(25.0) - 3.0).abs() < 1e-12);
        // Continuity across a knot from both sides.
        let r3 = p.knot(3).unwrap().ln().unwrap();
        let lo = p.nu_eval(LogMag::from_ln(r3 - 1e-9)).unwrap();
        let hi = p.nu_eval(LogMag::from_ln(r3 + 1e-9)).unwrap();
        assert!((lo - 3.0).abs() < 1e-8 && (hi - 3.0).abs() < 1e-8);
        // Monotone in r.
        let mut prev = 0.0;
        for i in 0..200 {
            let v = p.nu_eval(LogMag::from_ln(i as f64 * 0.2)).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn l_eval_matches_examples() {
        let p = profile();
        let l5 = p.l_eval(LogMag::from_value(5.0).unwrap()).unwrap();
        assert!((l5.value() / 25.0 - 1.0).abs() <= 1e-12);
        let l25 = p.l_eval(LogMag::from_value(25.0).unwrap()).unwrap();
        assert!((l25.ln().unwrap() - 7.035392171627876).abs() < 1e-12);
        assert_eq!(p.l_eval(LogMag::one()).unwrap(), LogMag::one());
        assert!(matches!(
            p.l_eval(LogMag::from_value(0.5).unwrap()),
            Err(GrowthError::BelowOne(_))
        ));
    }

    #[test]
    fn l_maps_knots_to_knots_bit_exactly() {
        let p = profile();
        for n in 2..=10 {
            let img = p.l_eval(p.knot(n).unwrap()).unwrap();
            assert_eq!(img.ln().unwrap(), p.knot(n + 1).unwrap().ln().unwrap(), "L(r_{n}) != r_{}", n + 1);
        }
    }

    #[test]
    fn profile_exhaustion_is_reported() {
        let p = GrowthProfile::new(2, 5.0).unwrap();
        // Fresh profile covers through the first virtual knot r_3 = 25.
        assert!(p.l_eval(LogMag::from_value(25.0).unwrap()).is_ok());
        assert!(matches!(
            p.l_eval(LogMag::from_value(26.0).unwrap()),
            Err(GrowthError::ProfileExhausted { .. })
        ));
        let mut p2 = p.clone();
        p2.extend_to_cover(26.0f64.ln());
        assert!(p2.l_eval(LogMag::from_value(26.0).unwrap()).is_ok());
    }

    #[test]
    fn table_round_trip_is_bit_identical() {
        let p = profile();
        let s = p.to_table_string();
        let q = GrowthProfile::<f64>::from_table_str(&s).unwrap();
        assert_eq!(p, q);
        assert_eq!(s, q.to_table_string());
    }

    #[test]
    fn table_parse_rejects_corruption() {
        let p = profile();
        let s = p.to_table_string();
        let gap = s.replace("\n3 ", "\n7 ");
        assert!(GrowthProfile::<f64>::from_table_str(&gap).is_err());
        assert!(GrowthProfile::<f64>::from_table_str("").is_err());
        assert!(GrowthProfile::<f64>::from_table_str("2 notanumber 1.0\n").is_err());
    }

    #[test]
    fn exceptional_set_membership() {
        let p = profile();
        let es = ExceptionalSet::new(&p, 0.5).unwrap();
        let r = |v: f64| LogMag::from_value(v).unwrap();
        // [0.5 * 25, 25] is the first interval (n = 3 > n0).
        assert!(es.contains(r(12.5)));
        assert!(es.contains(r(25.0)));
        assert!(es.contains(r(20.0)));
        assert!(!es.contains(r(12.4)));
        assert!(!es.contains(r(26.0)));
        // n = n0 interval is excluded.
        assert!(!es.contains(r(3.0)));
        assert!(!es.contains(r(5.0)));
        assert!(!es.contains(LogMag::zero()));
        assert!(ExceptionalSet::new(&p, 0.0).is_err());
        assert!(ExceptionalSet::new(&p, 1.0).is_err());
    }

    #[test]
    fn exceptional_intervals_eventually_disjoint() {
        let p = profile();
        let es = ExceptionalSet::new(&p, 0.5).unwrap();
        for n in 3..=11 {
            let (_, hi) = es.interval(n).unwrap();
            let (lo_next, _) = es.interval(n + 1).unwrap();
            assert!(hi < lo_next, "intervals {n} and {} overlap", n + 1);
        }
    }

    #[test]
    fn growth_condition_sequence_increases() {
        let p = profile();
        let seq = p.growth_condition_sequence();
        assert_eq!(seq[0].0, 2);
        for w in seq.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        let at12 = seq.iter().find(|(n, _)| *n == 12).unwrap().1;
        assert!(at12 > 100.0);
    }

    #[test]
    fn liminf_ratio_sequence_values() {
        let p = profile();
        let seq = p.liminf_ratio_sequence(10).unwrap();
        assert_eq!(seq.len(), 9);
        let b2 = seq[0].1;
        assert!((b2 - 3.1483).abs() < 1e-3, "b_2 = {b2}");
        for w in seq.windows(2) {
            assert!(w[1].1 < w[0].1, "b_n not decreasing at n = {}", w[0].0);
        }
        assert!(matches!(
            p.liminf_ratio_sequence(3),
            Err(GrowthError::RangeTooShort { .. })
        ));
    }
}

//! Independent cross-checks of the growth engine.
//!
//! The growth function is defined by `ln L(r) = ∫_1^r ν(t)/t dt` with ν
//! piecewise linear between knots and each knot the image of the previous
//! one. The engine computes this in closed form with log-scale recurrences;
//! the oracle here rebuilds everything numerically from the definition —
//! composite Simpson quadrature in the substitution `s = ln t`, plain `f64`
//! knot bootstrapping — sharing no code with the engine. Landmark values
//! are additionally frozen as literals so a regression in either route is
//! caught even if both drift together.

use qflab_core::loggrowth::{ExceptionalSet, GrowthProfile, LogMag};

const N0: f64 = 2.0;
const R_PRIME: f64 = 5.0;

/// Plain-scale knots `r_2 .. r_7` bootstrapped by quadrature alone, plus
/// `ln r_8` (whose plain value would overflow).
struct OracleKnots {
    /// `knots[i]` is `r_{i+2}`.
    knots: Vec<f64>,
    log_r8: f64,
}

/// ν(t) from explicit plain knots: `n0` below the first knot, linear
/// ramp from `n` to `n+1` between consecutive knots.
fn nu_plain(t: f64, knots: &[f64]) -> f64 {
    if t <= knots[0] {
        return N0;
    }
    for (i, w) in knots.windows(2).enumerate() {
        if t <= w[1] {
            let n = N0 + i as f64;
            return n + (t - w[0]) / (w[1] - w[0]);
        }
    }
    panic!("oracle nu evaluated beyond bootstrapped knots: t = {t}");
}

/// Composite Simpson for `∫ nu(e^s) ds` over `[a, b]`.
fn simpson_log(a: f64, b: f64, knots: &[f64], panels: usize) -> f64 {
    assert!(b >= a && panels.is_multiple_of(2));
    if b == a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let f = |s: f64| nu_plain(s.exp(), knots);
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// `ln L(r)` by quadrature, splitting the integral at knots so Simpson only
/// ever sees a smooth integrand.
fn oracle_log_l(r: f64, knots: &[f64]) -> f64 {
    let lr = r.ln();
    if lr <= 0.0 {
        return N0 * lr; // below 1 the profile continues with exponent n0
    }
    // Constant-ν head is exact.
    let head_top = lr.min(knots[0].ln());
    let mut total = N0 * head_top;
    let mut lo = head_top;
    for w in knots.windows(2) {
        if lo >= lr {
            break;
        }
        let hi = lr.min(w[1].ln());
        if hi > lo {
            total += simpson_log(lo, hi, knots, 20_000);
            lo = hi;
        }
    }
    assert!(lo >= lr - 1e-12, "oracle integral ran past its knots: r = {r}");
    total
}

fn bootstrap() -> OracleKnots {
    let mut knots = vec![R_PRIME];
    // r_{n+1} = L(r_n); plain values stay representable through
    // r_7 = exp(323.1...) ~ 2e140.
    for _ in 0..5 {
        let top = *knots.last().unwrap();
        let next = oracle_log_l(top, &knots).exp();
        knots.push(next);
    }
    let log_r8 = oracle_log_l(*knots.last().unwrap(), &knots);
    OracleKnots { knots, log_r8 }
}

fn profile() -> GrowthProfile<f64> {
    let mut p = GrowthProfile::new(2, 5.0).unwrap();
    p.extend_to(40);
    p
}

#[test]
fn knots_match_quadrature_bootstrap() {
    let oracle = bootstrap();
    let p = profile();
    for (i, &r) in oracle.knots.iter().enumerate() {
        let n = 2 + i as u32;
        let engine = p.knot(n).unwrap().ln().unwrap();
        let rel = (engine - r.ln()).abs() / r.ln().max(1.0);
        assert!(rel < 1e-9, "knot {n}: engine ln {engine} vs oracle ln {}", r.ln());
    }
    let engine_r8 = p.knot(8).unwrap().ln().unwrap();
    let rel = (engine_r8 - oracle.log_r8).abs() / oracle.log_r8;
    assert!(rel < 1e-9, "ln r_8: engine {engine_r8} vs oracle {}", oracle.log_r8);
}

#[test]
fn growth_function_matches_quadrature_between_knots() {
    let oracle = bootstrap();
    let p = profile();
    // Sample radii straddling every bootstrapped segment, knot values
    // included (where the two piecewise branches must agree).
    let samples = [
        1.3,
        4.999,
        5.0,
        9.7,
        25.0,
        147.0,
        1136.0,
        80_000.0,
        1.0e12,
        6.0e24,
        1.0e100,
        1.0e133,
    ];
    for &r in &samples {
        let engine = p.l_eval(LogMag::from_value(r).unwrap()).unwrap().ln().unwrap();
        let numeric = oracle_log_l(r, &oracle.knots);
        let rel = (engine - numeric).abs() / numeric.abs().max(1.0);
        assert!(rel < 1e-8, "L({r}): engine ln {engine} vs quadrature {numeric} (rel {rel:.3e})");
    }
}

#[test]
fn landmark_values_are_frozen() {
    let p = profile();
    // These literals were produced by an independent arbitrary-precision
    // evaluation of the closed-form recurrence and are pinned for life.
    let d3 = p.delta(3).unwrap();
    assert!((d3 - 3.816_516_346_759_675_7).abs() < 1e-12 * d3, "delta_3 = {d3}");
    let log_r4 = p.knot(4).unwrap().ln().unwrap();
    assert!((log_r4 - 7.035_392_171_627_876).abs() < 1e-12 * log_r4, "ln r_4 = {log_r4}");
    let r4 = p.knot(4).unwrap().value();
    assert!((r4 - 1_136.140_386_859_729_7).abs() < 1e-9 * r4, "r_4 = {r4}");
}

/// Re-derivation of the knot spacing sequence straight from the recurrence
/// `Δ_{n0} = (n0 - 1) ln R'`, `Δ_n = 1 + (n - 1 - 1/(e^{Δ_{n-1}} - 1)) Δ_{n-1}`,
/// written without any shared helper.
#[test]
fn delta_recurrence_independent_reimplementation() {
    let p = profile();
    let mut delta = (N0 - 1.0) * R_PRIME.ln();
    let mut n = 2u32;
    assert!((p.delta(n).unwrap() - delta).abs() < 1e-12 * delta);
    while n < 40 {
        n += 1;
        delta = 1.0 + ((n - 1) as f64 - 1.0 / delta.exp_m1()) * delta;
        let engine = p.delta(n).unwrap();
        let rel = (engine - delta).abs() / delta;
        assert!(rel < 1e-9, "delta_{n}: engine {engine} vs recurrence {delta}");
    }
    // Doubly-exponential flavour: spacing itself grows superexponentially.
    assert!(p.delta(12).unwrap() > 8.0e7);
}

#[test]
fn growth_condition_and_liminf_landmarks() {
    let p = profile();
    let seq = p.growth_condition_sequence();
    assert!(seq.windows(2).all(|w| w[1].1 > w[0].1), "n * delta_n must strictly increase");
    let crossing = seq.iter().find(|(_, v)| *v > 100.0).map(|(n, _)| *n).unwrap();
    assert!(crossing <= 12, "n * delta_n should exceed 100 by n = 12, first at {crossing}");

    let ratios = p.liminf_ratio_sequence(20).unwrap();
    let b20 = ratios.last().unwrap().1;
    assert!((b20 - 1.1005).abs() < 1e-3, "b_20 = {b20}");
    assert!(b20 < 1.6);
    // Eventually decreasing towards 1.
    let tail: Vec<f64> = ratios.iter().skip(10).map(|(_, b)| *b).collect();
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "tail of b_n should decrease: {tail:?}");

    // Exceptional shells sit at [eps r_n, r_n]; the first admissible ring
    // (2 r_n, eps r_{n+1}) for eps = 1/2 is (10, 12.5), ending exactly
    // where the next exceptional shell begins.
    let es = ExceptionalSet::new(&p, 0.5).unwrap();
    assert!(es.interval(2).is_none(), "no shell below the first grown knot");
    let (lo, hi) = es.interval(3).unwrap();
    assert!((lo.value() - 12.5).abs() < 1e-12);
    assert!((hi.value() - 25.0).abs() < 1e-12);
    let r2 = p.knot(2).unwrap().value();
    assert!(2.0 * r2 < lo.value(), "ring (2 r_2, eps r_3) must be nonempty");
    assert!(!es.contains(LogMag::from_value(11.0).unwrap()));
    assert!(es.contains(LogMag::from_value(13.0).unwrap()));
    assert!(es.contains(LogMag::from_value(600.0).unwrap()));
    assert!(!es.contains(LogMag::zero()));
}

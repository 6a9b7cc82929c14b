//! Certificate-level drivers.
//!
//! These combine the growth engine, orbit classification and voxel
//! topology into three experiments:
//!
//! * a scaled lower bound for the domain metric used in dilatation
//!   arguments ([`mu_lower_bound`], [`mu_chain_bound`]);
//! * the engulfing certificate ([`certify_engulfing`]): starting from a
//!   region containing both a fast-escaping and a slow point, verify that
//!   iterated images swallow the balls of the maximum-modulus ladder,
//!   `B(0, M^k) ⊂ hull(f^{k+ℓ}(G))`;
//! * the wandering-ring check ([`check_wandering_rings`]): iterated images
//!   of a hollow bounded ring stay hollow and bounded, each surrounds its
//!   predecessor (and its pre-predecessor — transitivity), their distance
//!   from the origin strictly grows, and their closures stay on the
//!   offset-zero fast-escaping ladder.
//!
//! Imaging of regions is exact for the radial family: a mask reduces to its
//! radial support interval, which maps to an interval of the radial growth
//! function. Masks whose cells do not fill their radial band, and all
//! non-radial families, are handled approximately and flagged as such. Grid
//! verdicts are computed in log-compressed coordinates
//! `x ↦ (x/‖x‖_∞)·ln(1+‖x‖_∞)`, a radial reparametrisation that preserves
//! hulls and surrounds relations of max-norm-radial sets while keeping
//! tower-scale radii on a plottable window.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::escape::{
    check_apart_hypothesis, classify, compute_orbit, find_k2, ApartReport, EscapeClass,
    EscapeError, EscapeTag, Ladder,
};
use crate::loggrowth::LogMag;
use crate::maps::sampling::{self, CTX_WITNESS};
use crate::maps::{MapError, MapFamily, Point};
use crate::real::{cast, Real};
use crate::topology::{
    is_hollow, mask_is_bounded, surrounds_mask, topological_hull, CellMask, GridSpec,
    TopologyError,
};

/// Errors from the analysis drivers.
#[derive(Debug, Error)]
pub enum AnalysisError<T: Real> {
    #[error("parameter error: {0}")]
    InvalidParameter(String),
    #[error("distances to the boundary must be positive, got {dist_a} and {dist_b}")]
    NonPositiveDistance { dist_a: T, dist_b: T },
    #[error("points have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("the region mask is empty")]
    EmptyRegion,
    #[error("the region touches the window border; enlarge the window beyond max-norm radius {required}")]
    RegionTouchesBorder { required: T },
    #[error("forward imaging unsupported: {0}")]
    UnsupportedImaging(String),
    #[error(transparent)]
    Map(#[from] MapError<T>),
    #[error(transparent)]
    Escape(#[from] EscapeError<T>),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Scaled lower bound for the domain metric between two interior points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuEstimate<T> {
    /// `c_d * ln(1 + separation / min(dist_a, dist_b))`.
    pub value: T,
    pub c_d: T,
    /// Euclidean distance between the two points.
    pub separation: T,
    pub dist_a: T,
    pub dist_b: T,
}

/// Lower bound for the domain metric between interior points `a` and `b`
/// whose distances to the domain boundary are `dist_a` and `dist_b`. The
/// dimensional constant `c_d` scales the whole estimate; connectivity of
/// the boundary is the caller's responsibility and is not verified here.
pub fn mu_lower_bound<T: Real>(
    a: &[T],
    b: &[T],
    dist_a: T,
    dist_b: T,
    c_d: T,
) -> Result<MuEstimate<T>, AnalysisError<T>> {
    if a.len() != b.len() || a.is_empty() {
        return Err(AnalysisError::DimensionMismatch(a.len(), b.len()));
    }
    if !(dist_a > T::zero() && dist_b > T::zero() && dist_a.is_finite() && dist_b.is_finite()) {
        return Err(AnalysisError::NonPositiveDistance { dist_a, dist_b });
    }
    if !(c_d > T::zero() && c_d.is_finite()) {
        return Err(AnalysisError::InvalidParameter(format!(
            "dimensional constant c_d must be positive, got {c_d}"
        )));
    }
    let separation = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |acc, s| acc + s)
        .sqrt();
    let value = c_d * (separation / dist_a.min(dist_b)).ln_1p();
    Ok(MuEstimate { value, c_d, separation, dist_a, dist_b })
}

/// The chain bound `ki_bound^k * mu_start`: how far the metric estimate can
/// be pushed through `k` compositions of a map with declared inner
/// dilatation `ki_bound`.
pub fn mu_chain_bound<T: Real>(ki_bound: T, k: u32, mu_start: T) -> Result<T, AnalysisError<T>> {
    if !(ki_bound >= T::one()) {
        return Err(AnalysisError::InvalidParameter(format!(
            "dilatation bound must be >= 1, got {ki_bound}"
        )));
    }
    if !(mu_start >= T::zero()) {
        return Err(AnalysisError::InvalidParameter(format!(
            "metric estimate must be nonnegative, got {mu_start}"
        )));
    }
    Ok(ki_bound.powi(k as i32) * mu_start)
}

/// `ln(1 + r)` of a log-scale magnitude: the compressed radial coordinate.
fn log1p_radius<T: Real>(r: LogMag<T>) -> T {
    match r.ln() {
        None => T::zero(),
        Some(lr) if lr < cast(600.0) => lr.exp().ln_1p(),
        Some(lr) => lr,
    }
}

/// Radial reduction of a mask: the min/max of the family norm over cell
/// centres, and whether the mask fills its radial band exactly (every cell
/// whose centre radius lies within the band belongs to the mask).
struct AnnularView<T> {
    inner: LogMag<T>,
    outer: LogMag<T>,
    exact: bool,
    cells: Vec<usize>,
}

fn annular_view<T: Real>(
    map: &MapFamily<T>,
    mask: &CellMask<T>,
) -> Result<AnnularView<T>, AnalysisError<T>> {
    let grid = mask.grid();
    if grid.dimension() != map.dimension() {
        return Err(AnalysisError::InvalidParameter(format!(
            "mask is {}-dimensional but the map acts on {} dimensions",
            grid.dimension(),
            map.dimension()
        )));
    }
    let dim = grid.dimension();
    let radius_of = |idx: usize| -> Result<LogMag<T>, AnalysisError<T>> {
        let c = grid.cell_center(idx);
        Ok(map.norm(&Point::from_coords(c[..dim].to_vec())?))
    };
    let mut inner: Option<LogMag<T>> = None;
    let mut outer: Option<LogMag<T>> = None;
    let mut cells = Vec::new();
    for idx in 0..grid.len() {
        if !mask.get(idx) {
            continue;
        }
        let r = radius_of(idx)?;
        inner = Some(inner.map_or(r, |v| v.min(r)));
        outer = Some(outer.map_or(r, |v| v.max(r)));
        cells.push(idx);
    }
    let (inner, outer) = match (inner, outer) {
        (Some(i), Some(o)) => (i, o),
        _ => return Err(AnalysisError::EmptyRegion),
    };
    let mut exact = true;
    for idx in 0..grid.len() {
        if mask.get(idx) {
            continue;
        }
        let r = radius_of(idx)?;
        if r >= inner && r <= outer {
            exact = false;
            break;
        }
    }
    Ok(AnnularView { inner, outer, exact, cells })
}

/// Parameters of the engulfing certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertifyParams<T> {
    /// Base radius of the maximum-modulus ladder.
    pub base_r: LogMag<T>,
    /// Iterate offset used in the separation hypothesis and the
    /// intermediate distance claim.
    pub ell0: usize,
    /// First `k` checked by the separation hypothesis.
    pub k0: usize,
    /// Inclusions are checked for `k = 1 ..= k_max`.
    pub k_max: usize,
    /// Candidate engulfing offsets `ℓ = 0 ..= ell_max`, smallest first.
    pub ell_max: usize,
    /// Separation constant for the threshold-index search; must exceed 1
    /// (and, to be meaningful, the declared dilatation bound).
    pub c: T,
    /// Seeded witness candidates drawn from the region (the extremal-radius
    /// cells are always included).
    pub witness_samples: usize,
    /// Cells per side of the log-compressed windows used for grid verdicts.
    pub inclusion_cells: usize,
    /// Ladder length; must cover `k_max + ell0 + ell_max` and the
    /// threshold-index search.
    pub ladder_k: usize,
}

impl<T: Real> CertifyParams<T> {
    pub fn new(base_r: LogMag<T>) -> Self {
        Self {
            base_r,
            ell0: 1,
            k0: 1,
            k_max: 8,
            ell_max: 4,
            c: cast(2.0),
            witness_samples: 64,
            inclusion_cells: 64,
            ladder_k: 20,
        }
    }
}

/// One `(ℓ, k)` engulfing inclusion, with both the scalar and the grid
/// verdict.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InclusionCheck<T> {
    pub ell: usize,
    pub k: usize,
    /// `ln M^k(base_r)`.
    pub ladder_log: T,
    /// `ln dist(0, ∂_out f^{k+ℓ}(G))`, i.e. the log outer radius of the
    /// image region's hull.
    pub hull_inradius_log: T,
    /// Scalar verdict `M^k <= dist(0, ∂_out ...)`.
    pub scalar_ok: bool,
    /// Grid verdict: every ladder-ball cell lies in the hull of the
    /// rasterised image (resolved at cell resolution).
    pub grid_ok: bool,
}

/// A failed check while hunting for the engulfing offset.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub ell: usize,
    pub k: usize,
    pub reason: String,
}

/// A witness point together with its classification.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport<T> {
    pub point: Vec<T>,
    pub start_log_radius: T,
    pub class: EscapeClass,
}

/// Outcome of [`certify_engulfing`].
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport<T> {
    /// Whether two witnesses separated by a full ladder rung were found.
    pub hypothesis_ok: bool,
    pub witness_fast: Option<WitnessReport<T>>,
    pub witness_slow: Option<WitnessReport<T>>,
    pub apart: Option<ApartReport>,
    /// Smallest offset for which every inclusion in `checked_k` passed.
    pub ell: Option<usize>,
    pub checked_k: (usize, usize),
    pub failures: Vec<FailureRecord>,
    pub inclusion_checks: Vec<InclusionCheck<T>>,
    /// True when scalar and grid verdicts agreed on every tested pair.
    pub grid_agrees_with_scalar: bool,
    /// Least index from which all three separation conditions hold for the
    /// configured constant, when the ladder reaches that far.
    pub k2: Option<usize>,
    /// The same search over scaled constants `factor * c`.
    pub k2_sweep: Vec<(T, Option<usize>)>,
    /// Range of `k` over which the intermediate distance claim
    /// `dist(0, ∂_out f^{k+ell0}(G)) >= M^{k-1}` was checked (empty when
    /// the threshold index exceeds `k_max`).
    pub intermediate_checked_k: Option<(usize, usize)>,
    pub intermediate_ok: bool,
    /// Declared dilatation bound raised to `k_max`.
    pub ki_power_used: T,
    /// True when the region reduced exactly to a radial interval and the
    /// family images intervals exactly.
    pub imaging_exact: bool,
    pub region_inner_log: T,
    pub region_outer_log: T,
    pub params: CertifyParams<T>,
}

/// Per-iterate forward images of the region, either as exact radial
/// intervals or as sampled point clouds.
enum Imaging<T> {
    Exact {
        intervals: Vec<(LogMag<T>, LogMag<T>)>,
    },
    Sampled {
        /// Per iterate: surviving image points (in plain coordinates) and
        /// whether every region cell still had a representable image.
        clouds: Vec<(Vec<Point<T>>, bool)>,
        outers: Vec<Option<LogMag<T>>>,
    },
}

impl<T: Real> Imaging<T> {
    fn outer(&self, j: usize) -> Option<LogMag<T>> {
        match self {
            Imaging::Exact { intervals } => Some(intervals[j].1),
            Imaging::Sampled { outers, .. } => outers[j],
        }
    }
}

fn build_imaging<T: Real>(
    map: &MapFamily<T>,
    mask: &CellMask<T>,
    view: &AnnularView<T>,
    top_j: usize,
) -> Result<Imaging<T>, AnalysisError<T>> {
    if map.profile().is_some() {
        let mut intervals = Vec::with_capacity(top_j + 1);
        let mut lo = view.inner;
        let mut hi = view.outer;
        intervals.push((lo, hi));
        for _ in 0..top_j {
            lo = map.radial_image(lo)?;
            hi = map.radial_image(hi)?;
            intervals.push((lo, hi));
        }
        return Ok(Imaging::Exact { intervals });
    }
    // Sampled route: push every region cell centre forward while its
    // images stay representable; record the largest seen magnitude per
    // iterate (escape estimates included so the outer radius stays honest).
    let grid = mask.grid();
    let dim = grid.dimension();
    let mut current: Vec<Point<T>> = Vec::with_capacity(view.cells.len());
    for &idx in &view.cells {
        let c = grid.cell_center(idx);
        current.push(Point::from_coords(c[..dim].to_vec())?);
    }
    let mut clouds = vec![(current.clone(), true)];
    let mut outers = vec![Some(view.outer)];
    for _ in 0..top_j {
        let mut next = Vec::with_capacity(current.len());
        let mut complete = true;
        let mut outer: Option<LogMag<T>> = None;
        for p in &current {
            match map.eval(p) {
                Ok(img) => {
                    let r = map.norm(&img);
                    outer = Some(outer.map_or(r, |v| v.max(r)));
                    next.push(img);
                }
                Err(MapError::EscapedRange { log_magnitude }) => {
                    let r = LogMag::from_ln(log_magnitude);
                    outer = Some(outer.map_or(r, |v| v.max(r)));
                    complete = false;
                }
                Err(e) => return Err(e.into()),
            }
        }
        let complete = complete && clouds.last().is_none_or(|(_, c)| *c);
        clouds.push((next.clone(), complete));
        outers.push(outer);
        current = next;
    }
    Ok(Imaging::Sampled { clouds, outers })
}

/// Grid verdict for one inclusion: rasterise the image region on a
/// log-compressed window, fill its holes, and require every cell of the
/// ladder ball to be covered.
fn grid_inclusion<T: Real>(
    imaging: &Imaging<T>,
    j: usize,
    ball: LogMag<T>,
    dimension: usize,
    cells_per_side: usize,
) -> Result<bool, AnalysisError<T>> {
    let outer = match imaging.outer(j) {
        Some(o) if !o.is_zero() => o,
        _ => return Ok(false),
    };
    let rho_outer = log1p_radius(outer);
    let half = rho_outer * cast(1.1);
    if !(half > T::zero()) {
        return Ok(false);
    }
    let grid = GridSpec::centered(dimension, cells_per_side, half)?;
    let rho_ball = log1p_radius(ball);
    let mask = match imaging {
        Imaging::Exact { intervals } => {
            let (lo, hi) = intervals[j];
            let (rho_lo, rho_hi) = (log1p_radius(lo), log1p_radius(hi));
            CellMask::from_fn(grid.clone(), |c| {
                let r = c.iter().fold(T::zero(), |m, x| m.max(x.abs()));
                r > rho_lo && r < rho_hi
            })
        }
        Imaging::Sampled { clouds, .. } => {
            let (points, complete) = &clouds[j];
            if !complete || points.is_empty() {
                return Ok(false);
            }
            let mut mask = CellMask::empty(grid.clone());
            for p in points {
                // Compress via the polar form so tower-scale radii never
                // have to materialise as plain coordinates.
                let compressed: Vec<T> = match p.to_polar() {
                    Point::Polar { direction, radius } => {
                        let rho = log1p_radius(radius);
                        direction.iter().map(|&d| d * rho).collect()
                    }
                    Point::Cartesian(_) => unreachable!("to_polar returns the polar form"),
                };
                if let Some(idx) = grid.cell_containing(&compressed) {
                    mask.set(idx, true);
                }
            }
            mask
        }
    };
    let hull = topological_hull(&mask);
    for idx in 0..grid.len() {
        let c = grid.cell_center(idx);
        let r = c[..dimension].iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if r <= rho_ball && !hull.get(idx) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs the engulfing certificate for a region given as a plain-coordinate
/// mask. See the module documentation for the three stages; every verdict
/// that depends on sampling or rasterisation is reported alongside the
/// exact scalar comparison so disagreements are visible, never silent.
pub fn certify_engulfing<T: Real>(
    map: &MapFamily<T>,
    region: &CellMask<T>,
    params: CertifyParams<T>,
) -> Result<CertificateReport<T>, AnalysisError<T>> {
    if params.k0 < 1 || params.k_max < params.k0 {
        return Err(AnalysisError::InvalidParameter(
            "need 1 <= k0 <= k_max for the certificate".into(),
        ));
    }
    if params.k_max + params.ell0 > params.ladder_k.saturating_sub(params.ell_max) {
        return Err(AnalysisError::InvalidParameter(format!(
            "ladder_k = {} too short: need at least k_max + ell0 + ell_max = {}",
            params.ladder_k,
            params.k_max + params.ell0 + params.ell_max
        )));
    }
    if params.inclusion_cells < 16 {
        return Err(AnalysisError::InvalidParameter(
            "inclusion windows need at least 16 cells per side".into(),
        ));
    }
    if !(params.c > T::one()) {
        return Err(AnalysisError::InvalidParameter(format!(
            "separation constant must exceed 1, got {}",
            params.c
        )));
    }

    let view = annular_view(map, region)?;
    let ladder = Ladder::compute(map, params.base_r, params.ladder_k)?;
    let bail = ladder.level(ladder.top_k()).unwrap().scaled(cast(10.0));
    let grid = region.grid();
    let dim = grid.dimension();

    // Witness candidates: the extremal-radius cells plus seeded draws.
    let mut candidates: Vec<usize> = Vec::new();
    let mut lo_cell = view.cells[0];
    let mut hi_cell = view.cells[0];
    let norm_of = |idx: usize| {
        let c = grid.cell_center(idx);
        map.norm(&Point::from_coords(c[..dim].to_vec()).expect("finite centre"))
    };
    for &idx in &view.cells {
        if norm_of(idx) < norm_of(lo_cell) {
            lo_cell = idx;
        }
        if norm_of(idx) > norm_of(hi_cell) {
            hi_cell = idx;
        }
    }
    candidates.push(hi_cell);
    candidates.push(lo_cell);
    let mut rng = sampling::stream(map.seed(), CTX_WITNESS);
    for _ in 0..params.witness_samples {
        let pick = view.cells[rng.gen_range(0..view.cells.len())];
        if !candidates.contains(&pick) {
            candidates.push(pick);
        }
    }

    let orbit_len = params.k_max + params.ell0;
    let mut witnessed = Vec::with_capacity(candidates.len());
    for idx in candidates {
        let c = grid.cell_center(idx);
        let start = Point::from_coords(c[..dim].to_vec())?;
        let orbit = compute_orbit(map, start, orbit_len)?;
        let class = classify(&orbit, &ladder, params.ell_max, bail)?;
        witnessed.push((orbit, class));
    }
    let fast_pick = witnessed
        .iter()
        .enumerate()
        .filter_map(|(i, (orbit, class))| match class.tag {
            EscapeTag::FastEscaping { offset } => Some((offset, orbit.radii[0], i)),
            _ => None,
        })
        .min_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|(_, _, i)| i);
    let slow_pick = witnessed
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != fast_pick)
        .min_by(|(_, (oa, _)), (_, (ob, _))| {
            let fa = *oa.radii.last().unwrap();
            let fb = *ob.radii.last().unwrap();
            fa.cmp(&fb).then(oa.radii[0].cmp(&ob.radii[0]))
        })
        .map(|(i, _)| i);

    let witness_report = |i: usize| -> Result<WitnessReport<T>, AnalysisError<T>> {
        let (orbit, class) = &witnessed[i];
        Ok(WitnessReport {
            point: orbit.start.to_cartesian()?,
            start_log_radius: orbit.radii[0].ln_or_neg_inf(),
            class: *class,
        })
    };
    let (hypothesis_ok, witness_fast, witness_slow, apart) = match (fast_pick, slow_pick) {
        (Some(xi), Some(yi)) => {
            let report = check_apart_hypothesis(
                &witnessed[xi].0,
                &witnessed[yi].0,
                &ladder,
                params.ell0,
                params.k0,
            )?;
            (report.holds, Some(witness_report(xi)?), Some(witness_report(yi)?), Some(report))
        }
        (Some(xi), None) => (false, Some(witness_report(xi)?), None, None),
        (None, Some(yi)) => (false, None, Some(witness_report(yi)?), None),
        (None, None) => (false, None, None, None),
    };

    // Engulfing inclusions, smallest offset first.
    let top_j = params.k_max + params.ell_max.max(params.ell0);
    let imaging = build_imaging(map, region, &view, top_j)?;
    let mut inclusion_checks = Vec::new();
    let mut failures = Vec::new();
    let mut found_ell = None;
    let mut grid_agrees = true;
    if hypothesis_ok {
        'offsets: for ell in 0..=params.ell_max {
            let mut all_ok = true;
            for k in 1..=params.k_max {
                let level = ladder.level(k).unwrap();
                let hull_inradius = imaging.outer(k + ell);
                let scalar_ok = hull_inradius.is_some_and(|outer| level <= outer);
                let grid_ok =
                    grid_inclusion(&imaging, k + ell, level, dim, params.inclusion_cells)?;
                inclusion_checks.push(InclusionCheck {
                    ell,
                    k,
                    ladder_log: level.ln_or_neg_inf(),
                    hull_inradius_log: hull_inradius
                        .map_or(T::neg_infinity(), |o| o.ln_or_neg_inf()),
                    scalar_ok,
                    grid_ok,
                });
                grid_agrees &= scalar_ok == grid_ok;
                if !(scalar_ok && grid_ok) {
                    all_ok = false;
                    failures.push(FailureRecord {
                        ell,
                        k,
                        reason: match (scalar_ok, grid_ok) {
                            (false, false) => "ladder level exceeds the image hull".into(),
                            (true, false) => "grid hull missed a ladder-ball cell".into(),
                            (false, true) => "grid hull overcovered the scalar bound".into(),
                            (true, true) => unreachable!(),
                        },
                    });
                }
            }
            if all_ok {
                found_ell = Some(ell);
                break 'offsets;
            }
        }
    }

    // Threshold index for the configured constant and a small sweep.
    let k2_for = |c: T| -> Result<Option<usize>, AnalysisError<T>> {
        match find_k2(c, &ladder) {
            Ok(k2) => Ok(Some(k2)),
            Err(EscapeError::LadderExhaustedForK2(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    let k2 = k2_for(params.c)?;
    let mut k2_sweep = Vec::new();
    for factor in [1.0, 1.5, 2.0, 4.0] {
        let c_i = params.c * cast(factor);
        k2_sweep.push((c_i, k2_for(c_i)?));
    }

    // Intermediate distance claim from the threshold index onwards.
    let (intermediate_checked_k, intermediate_ok) = match k2 {
        Some(k2) if hypothesis_ok && k2 <= params.k_max => {
            let mut ok = true;
            for k in k2..=params.k_max {
                let dist = imaging.outer(k + params.ell0);
                let level = ladder.level(k - 1).unwrap();
                if !dist.is_some_and(|d| d >= level) {
                    ok = false;
                }
            }
            (Some((k2, params.k_max)), ok)
        }
        _ => (None, false),
    };

    Ok(CertificateReport {
        hypothesis_ok,
        witness_fast,
        witness_slow,
        apart,
        ell: found_ell,
        checked_k: (1, params.k_max),
        failures,
        inclusion_checks,
        grid_agrees_with_scalar: grid_agrees,
        k2,
        k2_sweep,
        intermediate_checked_k,
        intermediate_ok,
        ki_power_used: map.ki_bound().powi(params.k_max as i32),
        imaging_exact: map.profile().is_some() && view.exact,
        region_inner_log: view.inner.ln_or_neg_inf(),
        region_outer_log: view.outer.ln_or_neg_inf(),
        params,
    })
}

/// One iterated ring in the wandering-ring experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RingStep<T> {
    pub k: usize,
    pub inner_log: T,
    pub outer_log: T,
    /// No contact with its window border.
    pub bounded: bool,
    /// Encloses at least one hole.
    pub hollow: bool,
    /// Surrounds the previous ring (grid verdict on a shared window).
    pub surrounds_prev: Option<bool>,
    /// Surrounds the ring two steps back.
    pub surrounds_prev2: Option<bool>,
}

/// Outcome of [`check_wandering_rings`].
#[derive(Debug, Clone, Serialize)]
pub struct WanderingReport<T> {
    /// False when the starting region is full: the experiment needs a
    /// hollow region and is then inapplicable rather than failed.
    pub applicable: bool,
    pub inapplicable_reason: Option<String>,
    pub checked_k: usize,
    pub steps: Vec<RingStep<T>>,
    /// The inner radii (= distance of each ring from the origin) strictly
    /// increase; compared exactly in log scale.
    pub dist_strictly_increasing: bool,
    /// Smallest ring index whose closure samples all classify as fast
    /// escaping with offset zero.
    pub fast_ell: Option<usize>,
    pub fast_samples_per_ring: usize,
    pub imaging_exact: bool,
    pub all_pass: bool,
}

/// Builds the shared log-compressed window for a pair of radial intervals
/// and rasterises both; spacing resolves the narrower feature (either
/// interval's width or the gap between them) by at least three cells.
fn pair_masks<T: Real>(
    a: (LogMag<T>, LogMag<T>),
    b: (LogMag<T>, LogMag<T>),
    dimension: usize,
) -> Result<(CellMask<T>, CellMask<T>), AnalysisError<T>> {
    let rho = |x: LogMag<T>| log1p_radius(x);
    let (a_lo, a_hi, b_lo, b_hi) = (rho(a.0), rho(a.1), rho(b.0), rho(b.1));
    let mut feature = (a_hi - a_lo).min(b_hi - b_lo);
    let gap = b_lo - a_hi;
    if gap > T::zero() {
        feature = feature.min(gap);
    }
    let top = a_hi.max(b_hi);
    if !(feature > T::zero() && top > T::zero()) {
        return Err(AnalysisError::InvalidParameter(
            "degenerate radial intervals for a pair window".into(),
        ));
    }
    let spacing = feature / cast(3.0);
    let half = top + spacing * cast(2.0);
    let cap = if dimension == 3 { 192 } else { 2048 };
    let mut n = num_traits::cast::<T, usize>((half * cast(2.0) / spacing).ceil())
        .ok_or_else(|| AnalysisError::InvalidParameter("window size overflow".into()))?
        .max(8);
    if n > cap {
        n = cap;
    }
    let grid = GridSpec::centered(dimension, n, half)?;
    let band = |lo: T, hi: T| {
        CellMask::from_fn(grid.clone(), move |c| {
            let r = c.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            r > lo && r < hi
        })
    };
    Ok((band(a_lo, a_hi), band(b_lo, b_hi)))
}

/// Checks that iterated images of a hollow bounded region wander outward
/// as nested rings. Imaging is exact (interval) for the radial family;
/// other families are not supported by this driver.
pub fn check_wandering_rings<T: Real>(
    map: &MapFamily<T>,
    region: &CellMask<T>,
    k_max: usize,
    base_r: LogMag<T>,
    samples_per_ring: usize,
) -> Result<WanderingReport<T>, AnalysisError<T>> {
    if k_max < 1 {
        return Err(AnalysisError::InvalidParameter("k_max must be at least 1".into()));
    }
    if samples_per_ring < 2 {
        return Err(AnalysisError::InvalidParameter(
            "need at least 2 closure samples per ring".into(),
        ));
    }
    if map.profile().is_none() {
        return Err(AnalysisError::UnsupportedImaging(
            "the wandering-ring driver images regions as exact radial intervals, which only \
             the radial family supports; use ring-containment sampling for other families"
                .into(),
        ));
    }
    let view = annular_view(map, region)?;
    if !mask_is_bounded(region) {
        return Err(AnalysisError::RegionTouchesBorder {
            required: view.outer.ln_or_neg_inf().exp() * cast(1.1),
        });
    }
    if !is_hollow(region) {
        return Ok(WanderingReport {
            applicable: false,
            inapplicable_reason: Some(
                "the starting region is full (encloses no hole); the wandering-ring \
                 experiment needs a hollow region"
                    .into(),
            ),
            checked_k: k_max,
            steps: Vec::new(),
            dist_strictly_increasing: false,
            fast_ell: None,
            fast_samples_per_ring: samples_per_ring,
            imaging_exact: view.exact,
            all_pass: false,
        });
    }

    let mut intervals = Vec::with_capacity(k_max + 1);
    intervals.push((view.inner, view.outer));
    for k in 0..k_max {
        let (lo, hi) = intervals[k];
        intervals.push((map.radial_image(lo)?, map.radial_image(hi)?));
    }

    let mut steps: Vec<RingStep<T>> = Vec::with_capacity(k_max + 1);
    steps.push(RingStep {
        k: 0,
        inner_log: view.inner.ln_or_neg_inf(),
        outer_log: view.outer.ln_or_neg_inf(),
        bounded: true,
        hollow: true,
        surrounds_prev: None,
        surrounds_prev2: None,
    });
    for k in 1..=k_max {
        let (prev_mask, cur_mask) = pair_masks(intervals[k - 1], intervals[k], map.dimension())?;
        let bounded = mask_is_bounded(&cur_mask);
        let hollow = is_hollow(&cur_mask);
        let surrounds_prev = Some(surrounds_mask(&cur_mask, &prev_mask)?);
        let surrounds_prev2 = if k >= 2 {
            let (pp_mask, c_mask) = pair_masks(intervals[k - 2], intervals[k], map.dimension())?;
            Some(surrounds_mask(&c_mask, &pp_mask)?)
        } else {
            None
        };
        steps.push(RingStep {
            k,
            inner_log: intervals[k].0.ln_or_neg_inf(),
            outer_log: intervals[k].1.ln_or_neg_inf(),
            bounded,
            hollow,
            surrounds_prev,
            surrounds_prev2,
        });
    }

    let dist_strictly_increasing =
        intervals.windows(2).all(|w| w[1].0 > w[0].0);

    // Fast-escape audit of ring closures: interval endpoints plus seeded
    // log-uniform interior radii, random max-norm directions.
    let k_cls = k_max.max(8);
    let ladder = Ladder::compute(map, base_r, k_cls)?;
    let bail = ladder.level(ladder.top_k()).unwrap().scaled(cast(10.0));
    let mut fast_ell = None;
    'rings: for (ell, &(lo, hi)) in intervals.iter().enumerate() {
        let mut rng = sampling::stream(map.seed(), CTX_WITNESS ^ ((ell as u64 + 1) << 16));
        let (lo_ln, hi_ln) = (lo.ln_or_neg_inf(), hi.ln_or_neg_inf());
        let mut radii = vec![lo, hi];
        for _ in 0..samples_per_ring.saturating_sub(2) {
            let u: T = sampling::open_unit(&mut rng);
            radii.push(LogMag::from_ln(lo_ln + (hi_ln - lo_ln) * u));
        }
        for r in radii {
            let dir = sampling::max_norm_direction::<T>(&mut rng, map.dimension());
            let start = Point::from_polar(dir, r)?;
            let orbit = compute_orbit(map, start, k_cls)?;
            let class = classify(&orbit, &ladder, 0, bail)?;
            if class.tag != (EscapeTag::FastEscaping { offset: 0 }) {
                continue 'rings;
            }
        }
        fast_ell = Some(ell);
        break;
    }

    let rings_pass = steps.iter().skip(1).all(|s| {
        s.bounded
            && s.hollow
            && s.surrounds_prev == Some(true)
            && s.surrounds_prev2.unwrap_or(true)
    });
    let all_pass = rings_pass && dist_strictly_increasing && fast_ell.is_some();
    Ok(WanderingReport {
        applicable: true,
        inapplicable_reason: None,
        checked_k: k_max,
        steps,
        dist_strictly_increasing,
        fast_ell,
        fast_samples_per_ring: samples_per_ring,
        imaging_exact: view.exact,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loggrowth::GrowthProfile;

    fn radial_map() -> MapFamily<f64> {
        let mut profile = GrowthProfile::new(2, 5.0).unwrap();
        profile.extend_to(40);
        MapFamily::radial(profile, 2).unwrap()
    }

    fn base5() -> LogMag<f64> {
        LogMag::from_value(5.0).unwrap()
    }

    /// The plain-window annulus 0.9 < max-norm < 50 used by the default
    /// certificate experiment (50 = 2 * knot 3).
    fn annulus_mask(cells: usize) -> CellMask<f64> {
        let g = GridSpec::centered(2, cells, 55.0).unwrap();
        CellMask::from_fn(g, |c| {
            let r = c[0].abs().max(c[1].abs());
            r > 0.9 && r < 50.0
        })
    }

    #[test]
    fn mu_bounds_match_formulas() {
        let mu = mu_lower_bound(&[0.0, 0.0], &[3.0, 0.0], 1.0, 2.0, 1.0).unwrap();
        assert!((mu.value - 4.0f64.ln()).abs() < 1e-15);
        assert_eq!(mu.separation, 3.0);
        // Symmetry in the two (point, distance) slots.
        let swapped = mu_lower_bound(&[3.0, 0.0], &[0.0, 0.0], 2.0, 1.0, 1.0).unwrap();
        assert_eq!(mu.value, swapped.value);
        // Linearity in the dimensional constant.
        let doubled = mu_lower_bound(&[0.0, 0.0], &[3.0, 0.0], 1.0, 2.0, 2.0).unwrap();
        assert_eq!(doubled.value, 2.0 * mu.value);
        // Coincident points give zero.
        let same = mu_lower_bound(&[1.0, 1.0], &[1.0, 1.0], 0.5, 0.5, 1.0).unwrap();
        assert_eq!(same.value, 0.0);
        assert!(mu_lower_bound(&[0.0], &[1.0], 0.0, 1.0, 1.0).is_err());
        assert!(mu_lower_bound(&[0.0], &[1.0, 2.0], 1.0, 1.0, 1.0).is_err());

        assert_eq!(mu_chain_bound(1.0, 17, 0.37).unwrap(), 0.37);
        assert_eq!(mu_chain_bound(2.0, 5, 0.5).unwrap(), 16.0);
        assert!(mu_chain_bound(0.5, 1, 1.0).is_err());
        assert!(mu_chain_bound(2.0, 1, -1.0).is_err());
    }

    #[test]
    fn certificate_on_the_default_annulus() {
        let map = radial_map();
        let region = annulus_mask(128);
        let params = CertifyParams { k_max: 12, ..CertifyParams::new(base5()) };
        let report = certify_engulfing(&map, &region, params).unwrap();
        assert!(report.hypothesis_ok);
        assert!(report.imaging_exact);
        assert_eq!(report.ell, Some(0));
        assert!(report.failures.is_empty());
        assert!(report.grid_agrees_with_scalar);
        assert_eq!(report.inclusion_checks.len(), 12);
        assert!(report.inclusion_checks.iter().all(|c| c.scalar_ok && c.grid_ok));
        assert_eq!(report.k2, Some(11));
        // The sweep is monotone: harsher constants stabilise later (or
        // run off the ladder).
        let found: Vec<_> = report.k2_sweep.iter().map(|(_, k2)| *k2).collect();
        assert_eq!(found[0], Some(11));
        assert!(report.k2_sweep[3].1.is_none() || report.k2_sweep[3].1 >= found[0]);
        // Intermediate claim covers [k2, k_max] and holds.
        assert_eq!(report.intermediate_checked_k, Some((11, 12)));
        assert!(report.intermediate_ok);
        assert_eq!(report.ki_power_used, 1.0);
        let fast = report.witness_fast.unwrap();
        assert!(matches!(fast.class.tag, EscapeTag::FastEscaping { .. }));
        let slow = report.witness_slow.unwrap();
        assert!(
            slow.start_log_radius < 5.0f64.ln(),
            "slow witness should start below the ladder base"
        );
    }

    #[test]
    fn certificate_offset_is_stable_under_refinement() {
        let map = radial_map();
        let mut ells = Vec::new();
        // Resolutions chosen so the innermost mask cell keeps a radius
        // whose second image stays below the ladder base (the slow
        // witness must lag a full rung): 1.29, 1.43 and 1.07 here.
        for cells in [128, 192, 256] {
            let region = annulus_mask(cells);
            let report =
                certify_engulfing(&map, &region, CertifyParams::new(base5())).unwrap();
            assert!(report.grid_agrees_with_scalar);
            ells.push(report.ell);
        }
        assert!(ells.windows(2).all(|w| w[1] <= w[0]), "refinement must not increase ℓ: {ells:?}");
        assert_eq!(ells[2], Some(0));
    }

    #[test]
    fn certificate_hypothesis_fails_without_both_witnesses() {
        let map = radial_map();
        // Entirely inside the invariant unit ball: no fast witness.
        let g = GridSpec::<f64>::centered(2, 32, 0.8).unwrap();
        let inner = CellMask::from_fn(g, |c| c[0].abs().max(c[1].abs()) < 0.7);
        let report = certify_engulfing(&map, &inner, CertifyParams::new(base5())).unwrap();
        assert!(!report.hypothesis_ok);
        assert!(report.ell.is_none());
        assert!(report.witness_fast.is_none());
        assert!(report.inclusion_checks.is_empty());
        // A thin shell at the ladder base: every point escapes fast, no
        // slow witness can be separated below the ladder.
        let g = GridSpec::<f64>::centered(2, 64, 6.0).unwrap();
        let shell = CellMask::from_fn(g, |c| {
            let r = c[0].abs().max(c[1].abs());
            r > 5.0 && r < 5.4
        });
        let report = certify_engulfing(&map, &shell, CertifyParams::new(base5())).unwrap();
        assert!(!report.hypothesis_ok, "apart check must fail when y also dominates the ladder");
    }

    #[test]
    fn certificate_rejects_bad_parameters() {
        let map = radial_map();
        let region = annulus_mask(64);
        let mut p = CertifyParams::new(base5());
        p.ladder_k = 5;
        assert!(matches!(
            certify_engulfing(&map, &region, p),
            Err(AnalysisError::InvalidParameter(_))
        ));
        let mut p = CertifyParams::new(base5());
        p.c = 1.0;
        assert!(certify_engulfing(&map, &region, p).is_err());
        let empty = CellMask::empty(GridSpec::centered(2, 16, 1.0).unwrap());
        assert!(matches!(
            certify_engulfing(&map, &empty, CertifyParams::new(base5())),
            Err(AnalysisError::EmptyRegion)
        ));
    }

    /// First ring index whose image dynamics are fully inside the profile's
    /// ring conditions, then the ring (2 r_n, eps r_{n+1}) as a plain mask.
    fn first_ring_mask(map: &MapFamily<f64>, eps: f64) -> (CellMask<f64>, f64, f64) {
        let profile = map.profile().unwrap();
        let r2 = profile.knot(2).unwrap().value();
        let r3 = profile.knot(3).unwrap().value();
        let (lo, hi) = (2.0 * r2, eps * r3);
        assert!(lo < hi, "first ring must be nonempty");
        let g = GridSpec::centered(2, 256, hi * 1.1).unwrap();
        let mask = CellMask::from_fn(g, |c| {
            let r = c[0].abs().max(c[1].abs());
            r > lo && r < hi
        });
        (mask, lo, hi)
    }

    #[test]
    fn wandering_rings_pass_on_the_first_ring() {
        let map = radial_map();
        let (region, lo, hi) = first_ring_mask(&map, 0.5);
        let report = check_wandering_rings(&map, &region, 4, base5(), 16).unwrap();
        assert!(report.applicable);
        assert!(report.all_pass, "{report:?}");
        assert!(report.dist_strictly_increasing);
        assert_eq!(report.fast_ell, Some(0));
        assert_eq!(report.steps.len(), 5);
        for s in report.steps.iter().skip(1) {
            assert!(s.bounded && s.hollow);
            assert_eq!(s.surrounds_prev, Some(true));
            if s.k >= 2 {
                assert_eq!(s.surrounds_prev2, Some(true));
            }
        }
        // The reported radial support brackets the construction interval
        // (cell centres sit strictly inside it).
        assert!(report.steps[0].inner_log >= lo.ln());
        assert!(report.steps[0].outer_log <= hi.ln());
        // Distances from the origin are the iterated inner radii: strictly
        // increasing and racing far beyond the starting window.
        assert!(report.steps[4].inner_log > 1e2);
    }

    #[test]
    fn wandering_rings_inapplicable_for_full_regions() {
        let map = radial_map();
        let g = GridSpec::<f64>::centered(2, 64, 12.0).unwrap();
        let ball = CellMask::from_fn(g, |c| c[0].abs().max(c[1].abs()) < 10.0);
        let report = check_wandering_rings(&map, &ball, 3, base5(), 8).unwrap();
        assert!(!report.applicable);
        assert!(!report.all_pass);
        assert!(report.inapplicable_reason.is_some());
    }

    #[test]
    fn wandering_rings_reject_border_contact_and_non_radial() {
        let map = radial_map();
        let g = GridSpec::<f64>::centered(2, 32, 4.0).unwrap();
        let touching = CellMask::from_fn(g, |c| c[0].abs().max(c[1].abs()) > 2.0);
        assert!(matches!(
            check_wandering_rings(&map, &touching, 2, base5(), 8),
            Err(AnalysisError::RegionTouchesBorder { .. })
        ));
        let entire = MapFamily::entire_product(1.0f64, vec![10.0, 1e4]).unwrap();
        let (region, _, _) = first_ring_mask(&map, 0.5);
        assert!(matches!(
            check_wandering_rings(&entire, &region, 2, base5(), 8),
            Err(AnalysisError::UnsupportedImaging(_))
        ));
    }
}

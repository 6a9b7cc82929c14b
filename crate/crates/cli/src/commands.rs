//! The six experiment drivers behind the subcommands.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use qflab_core::analysis::{certify_engulfing, check_wandering_rings, CertifyParams};
use qflab_core::escape::{classify, compute_orbit, EscapeTag};
use qflab_core::maps::verify_ring_containment;
use qflab_core::topology::io::{write_mask, write_slice_pgm};
use qflab_core::topology::{
    detect_nested_web, is_full, is_hollow, label_components, mask_is_bounded, topological_hull,
    WebVerdict,
};
use qflab_core::{CellMask, GridSpec, Ladder, LogMag, MapFamily, Point};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::fixtures;
use crate::report::{out_path, text_preamble, write_json, write_text};

fn chebyshev(c: &[f64]) -> f64 {
    c.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Knot table, growth-condition sequence `n * delta_n`, liminf ratios.
pub fn run_profile(cfg: &RunConfig) -> Result<(), CliError> {
    let profile = cfg.build_profile()?;
    if cfg.profile_n < profile.n0() + 2 {
        return Err(CliError::config(
            "profile_n",
            format!("liminf ratios need profile_n >= n0 + 2 = {}", profile.n0() + 2),
        ));
    }

    let mut table = text_preamble("profile", cfg);
    table.push_str(&profile.to_table_string());
    write_text(&out_path(cfg, "profile.txt")?, &table)?;

    let mut cond = text_preamble("profile", cfg);
    cond.push_str("# columns: n n_times_delta_n\n");
    for (n, v) in profile.growth_condition_sequence() {
        let _ = writeln!(cond, "{n} {v}");
    }
    write_text(&out_path(cfg, "growth_condition.txt")?, &cond)?;

    let mut lim = text_preamble("profile", cfg);
    lim.push_str("# columns: n b_n\n");
    for (n, b) in profile.liminf_ratio_sequence(cfg.profile_n)? {
        let _ = writeln!(lim, "{n} {b}");
    }
    write_text(&out_path(cfg, "liminf.txt")?, &lim)
}

/// One orbit as CSV: `k, log_radius, truncated`.
pub fn run_orbit(cfg: &RunConfig) -> Result<(), CliError> {
    let map = cfg.build_map()?;
    if cfg.orbit_start.len() != map.dimension() {
        return Err(CliError::config(
            "orbit_start",
            format!(
                "map acts on R^{}, start point has {} coordinates",
                map.dimension(),
                cfg.orbit_start.len()
            ),
        ));
    }
    let start = Point::from_coords(cfg.orbit_start.clone())?;
    let record = compute_orbit(&map, start, cfg.orbit_k)?;

    let mut csv = text_preamble("orbit", cfg);
    csv.push_str("k,log_radius,truncated\n");
    let last = record.radii.len() - 1;
    for (k, r) in record.radii.iter().enumerate() {
        let truncated = record.truncated && k == last;
        let _ = writeln!(csv, "{k},{},{truncated}", r.ln_or_neg_inf());
    }
    write_text(&out_path(cfg, "orbit.csv")?, &csv)
}

/// Classifies a seeded point cloud against the maximum-modulus ladder;
/// orbits run in parallel, output order is the (deterministic) draw order.
pub fn run_classify(cfg: &RunConfig) -> Result<(), CliError> {
    let map = cfg.build_map()?;
    let dim = map.dimension();
    let base = LogMag::from_value(cfg.base_r)?;
    let ladder = Ladder::compute(&map, base, cfg.ladder_k)?;
    let top_ln = ladder.level(ladder.top_k()).expect("ladder has its top").ln_or_neg_inf();
    let bail = LogMag::from_ln((top_ln * 10.0).max(100.0));

    // CLI-owned sample stream, disjoint from the library's internal ones.
    let mut rng =
        ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC1A5_51F9_u64.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (lo, hi) = (cfg.classify_inner.ln(), cfg.classify_outer.ln());
    let mut points = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let ln_r = rng.gen_range(lo..=hi);
        let axis = rng.gen_range(0..dim);
        let sign: bool = rng.gen();
        let direction: Vec<f64> = (0..dim)
            .map(|i| {
                if i == axis {
                    if sign {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    rng.gen_range(-1.0..=1.0)
                }
            })
            .collect();
        points.push(Point::from_polar(direction, LogMag::from_ln(ln_r))?);
    }

    let rows = points
        .par_iter()
        .map(|point| -> Result<String, CliError> {
            let coords = point.to_cartesian()?;
            let record = compute_orbit(&map, point.clone(), cfg.k_max)?;
            let class = classify(&record, &ladder, cfg.ell_max, bail)?;
            let (tag, offset) = match class.tag {
                EscapeTag::FastEscaping { offset } => ("fast_escaping", offset.to_string()),
                EscapeTag::EscapingUndetermined => ("escaping_undetermined", String::new()),
                EscapeTag::BoundedSoFar => ("bounded_so_far", String::new()),
            };
            let mut row = String::new();
            for c in &coords {
                let _ = write!(row, "{c},");
            }
            let _ = write!(row, "{tag},{offset},{}", class.evidence_k);
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = text_preamble("classify", cfg);
    csv.push_str(if dim == 3 { "x,y,z,tag,offset,evidence_k\n" } else { "x,y,tag,offset,evidence_k\n" });
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    write_text(&out_path(cfg, "classify.csv")?, &csv)
}

/// Components, hull, hollowness and web detection on a built-in fixture,
/// exported as binary masks, PGM slices and a JSON report.
pub fn run_topology(cfg: &RunConfig) -> Result<(), CliError> {
    let mask = fixtures::build(cfg)?;
    let grid = mask.grid().clone();
    let labeling = label_components(&mask);
    let hull = topological_hull(&mask);
    let web = detect_nested_web(&mask, cfg.min_levels);

    write_mask(&mask, &out_path(cfg, "mask.bin")?, &out_path(cfg, "mask.json")?)?;
    write_mask(&hull, &out_path(cfg, "hull.bin")?, &out_path(cfg, "hull.json")?)?;
    let z_slice = (grid.dimension() == 3).then(|| grid.dims()[2] / 2);
    write_slice_pgm(&mask, &out_path(cfg, "mask.pgm")?, z_slice)?;
    write_slice_pgm(&hull, &out_path(cfg, "hull.pgm")?, z_slice)?;
    for name in ["mask.bin", "mask.json", "mask.pgm", "hull.bin", "hull.json", "hull.pgm"] {
        println!("wrote {}", cfg.out_dir.join(name).display());
    }

    let web_json = match web {
        WebVerdict::ConsistentWithSpidersWeb { levels } => {
            json!({ "consistent": true, "levels": levels })
        }
        WebVerdict::NotDetected { reason } => {
            json!({ "consistent": false, "levels": web.levels(), "reason": format!("{reason:?}") })
        }
    };
    let report = json!({
        "fixture": cfg.fixture,
        "grid": {
            "dimension": grid.dimension(),
            "dims": grid.dims(),
            "origin": grid.origin(),
            "spacing": grid.spacing(),
        },
        "cells_in_mask": mask.count(),
        "mask_components": labeling.mask_components().count(),
        "complement_components": labeling.complement_components().count(),
        "bounded_complement_components": labeling.bounded_complement_components().count(),
        "bounded": mask_is_bounded(&mask),
        "full": is_full(&mask),
        "hollow": is_hollow(&mask),
        "hull_cells": hull.count(),
        "web": web_json,
        "files": ["mask.bin", "mask.json", "mask.pgm", "hull.bin", "hull.json", "hull.pgm"],
    });
    write_json(&out_path(cfg, "topology.json")?, "topology", cfg, report)
}

/// Engulfing certificate on the configured annular region.
pub fn run_certify(cfg: &RunConfig) -> Result<(), CliError> {
    let map = cfg.build_map()?;
    let grid = GridSpec::centered(map.dimension(), cfg.grid_cells, 1.1 * cfg.region_outer)?;
    let (lo, hi) = (cfg.region_inner, cfg.region_outer);
    let region = CellMask::from_fn(grid, move |c| {
        let r = chebyshev(c);
        r > lo && r < hi
    });
    let params = CertifyParams {
        base_r: LogMag::from_value(cfg.base_r)?,
        ell0: 1,
        k0: 1,
        k_max: cfg.k_max,
        ell_max: cfg.ell_max,
        c: cfg.c,
        witness_samples: cfg.witness_samples,
        inclusion_cells: cfg.inclusion_cells,
        ladder_k: cfg.ladder_k,
    };
    let report = certify_engulfing(&map, &region, params)?;
    write_json(&out_path(cfg, "certificate.json")?, "certify", cfg, report)
}

/// Ring containment scan plus the wandering-ring experiment.
pub fn run_rings(cfg: &RunConfig) -> Result<(), CliError> {
    let map = cfg.build_map()?;
    let n_lo = map.profile().map_or(1, |p| p.n0());
    let scan_hi = n_lo + cfg.rings_count + 8;
    let scan = verify_ring_containment(&map, cfg.epsilon, n_lo, scan_hi, 8, 1e-9)?;
    let first_valid = scan.first_valid_n.ok_or_else(|| {
        CliError::Computation(format!(
            "no ring index in {n_lo}..={scan_hi} satisfies all three ring conditions"
        ))
    })?;
    let report = verify_ring_containment(
        &map,
        cfg.epsilon,
        first_valid,
        first_valid + cfg.rings_count - 1,
        cfg.samples,
        1e-9,
    )?;
    write_json(
        &out_path(cfg, "containment.json")?,
        "rings",
        cfg,
        json!({
            "scan": { "n_lo": n_lo, "n_hi": scan_hi, "first_valid_n": first_valid },
            "containment": report,
        }),
    )?;

    let payload = wandering_payload(cfg, &map, first_valid)?;
    write_json(&out_path(cfg, "wandering.json")?, "rings", cfg, payload)
}

/// Wandering-ring experiment on the first valid ring; families without
/// exact interval imaging get an inapplicability note instead of an error.
fn wandering_payload(
    cfg: &RunConfig,
    map: &MapFamily,
    first_valid: u32,
) -> Result<serde_json::Value, CliError> {
    let Some(profile) = map.profile() else {
        return Ok(json!({
            "applicable": false,
            "reason": "the wandering-ring driver needs exact interval imaging, \
                       which only the radial family provides",
        }));
    };
    let missing = || {
        CliError::Computation(format!("profile does not reach knot {}", first_valid + 1))
    };
    let r_lo = profile.knot(first_valid).ok_or_else(missing)?;
    let r_hi = profile.knot(first_valid + 1).ok_or_else(missing)?;
    if !(r_lo.is_plain_scale() && r_hi.is_plain_scale()) {
        return Ok(json!({
            "applicable": false,
            "reason": "ring radii exceed plain scale; no window can rasterise the region",
        }));
    }
    let lo = 2.0 * r_lo.value();
    let hi = cfg.epsilon * r_hi.value();
    if !(hi > lo) {
        return Ok(json!({
            "applicable": false,
            "reason": format!("ring ({lo}, {hi}) is empty for epsilon = {}", cfg.epsilon),
        }));
    }
    let grid = GridSpec::centered(map.dimension(), cfg.grid_cells, 1.1 * hi)?;
    let region = CellMask::from_fn(grid, move |c| {
        let r = chebyshev(c);
        r > lo && r < hi
    });
    let report = check_wandering_rings(
        map,
        &region,
        cfg.wander_k,
        LogMag::from_value(cfg.base_r)?,
        cfg.samples,
    )?;
    serde_json::to_value(report).map_err(|e| CliError::Computation(format!("serialize: {e}")))
}

//! Built-in voxel fixtures for the topology command.

use qflab_core::{CellMask, GridSpec};

use crate::config::RunConfig;
use crate::error::CliError;

fn chebyshev(c: &[f64]) -> f64 {
    c.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Builds the named fixture. Geometry is fixed for the structural fixtures
/// (`web`, `blobs`) and configuration-driven for the sized ones.
pub fn build(cfg: &RunConfig) -> Result<CellMask, CliError> {
    let mask = match cfg.fixture.as_str() {
        // Three square rings at max-norm radii 6, 9, 12 joined by a spoke
        // along the positive x-axis: peeling finds exactly three nested
        // enclosing levels. (Each ring contributes one level; the spoke's
        // attach cell on the innermost ring survives as the last remainder
        // and its own peel closes no loop, so it adds nothing.)
        "web" => {
            let grid = GridSpec::centered(2, 31, 15.5)?;
            CellMask::from_fn(grid, |c| {
                let r = chebyshev(c);
                let on_ring = [6.0, 9.0, 12.0].iter().any(|&ring| (r - ring).abs() < 0.25);
                let on_spoke = c[1].abs() < 0.25 && c[0] > 5.75 && c[0] < 12.25;
                on_ring || on_spoke
            })
        }
        // Hollow max-norm shell in R^3.
        "shell" => {
            let cells = cfg.grid_cells.min(64);
            let grid = GridSpec::centered(3, cells, 1.3)?;
            CellMask::from_fn(grid, |c| {
                let r = chebyshev(c);
                r > 0.5 && r < 1.0
            })
        }
        // Solid max-norm ball in R^3: full, nothing enclosed.
        "ball" => {
            let cells = cfg.grid_cells.min(64);
            let grid = GridSpec::centered(3, cells, 1.3)?;
            CellMask::from_fn(grid, |c| chebyshev(c) < 1.0)
        }
        // Half window: unbounded in the window sense, encloses nothing.
        "halfspace" => {
            let grid = GridSpec::centered(2, cfg.grid_cells.min(256), 10.0)?;
            CellMask::from_fn(grid, |c| c[0] >= 0.0)
        }
        // Two disjoint solid squares: disconnected, web detection declines.
        "blobs" => {
            let grid = GridSpec::centered(2, 31, 15.5)?;
            CellMask::from_fn(grid, |c| {
                let left = (c[0] + 8.0).abs() < 3.0 && c[1].abs() < 3.0;
                let right = (c[0] - 8.0).abs() < 3.0 && c[1].abs() < 3.0;
                left || right
            })
        }
        // The configured annular region on its analysis window.
        "annulus" => {
            let grid = GridSpec::centered(
                cfg.dimension,
                cfg.grid_cells,
                1.1 * cfg.region_outer,
            )?;
            let (lo, hi) = (cfg.region_inner, cfg.region_outer);
            CellMask::from_fn(grid, move |c| {
                let r = chebyshev(c);
                r > lo && r < hi
            })
        }
        other => unreachable!("validated fixture {other}"),
    };
    Ok(mask)
}

//! Flat `key = value` run configuration: one key per line, `#` comments,
//! unknown keys rejected by name. The resolved configuration (minus
//! filesystem and scheduling knobs) is echoed into every output file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qflab_core::{GrowthProfile, MapFamily};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Map family: `radial`, `entire_product` or `zorich`.
    pub map: String,
    /// Ambient dimension for the radial family (entire_product is planar,
    /// zorich acts on R^3).
    pub dimension: usize,
    /// Leading coefficient of the entire product.
    pub coefficient: f64,
    /// Entire-product roots, positive and strictly increasing.
    pub roots: Vec<f64>,
    /// Declared dilatation bound; when unset each family keeps its default.
    pub ki_bound: Option<f64>,
    /// Counting-function floor of the growth profile.
    pub n0: u32,
    /// Starting radius of the growth profile (strictly above 4).
    pub r_prime: f64,
    /// Ring/exceptional-set shape parameter in (0, 1).
    pub epsilon: f64,
    /// Base radius of the maximum-modulus ladder.
    pub base_r: f64,
    /// Iteration depth for certificates and classification orbits.
    pub k_max: usize,
    /// Largest classification/engulfing offset tried.
    pub ell_max: usize,
    /// Maximum-modulus ladder length.
    pub ladder_k: usize,
    /// Separation constant for the threshold-index search.
    pub c: f64,
    /// Dimensional constant of the metric lower bound.
    pub c_d: f64,
    /// Sampling seed; fixed seed means byte-identical outputs.
    pub seed: u64,
    /// Output directory (not echoed: it does not affect report content).
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Cells per side of analysis windows.
    pub grid_cells: usize,
    /// Inner plain radius of the certificate/ring region.
    pub region_inner: f64,
    /// Outer plain radius of the certificate/ring region.
    pub region_outer: f64,
    /// Samples per ring for containment checks and ring closures.
    pub samples: usize,
    /// Seeded witness candidates for the certificate.
    pub witness_samples: usize,
    /// Cells per side of the certificate inclusion windows.
    pub inclusion_cells: usize,
    /// Starting point of the orbit command (one coordinate per axis).
    pub orbit_start: Vec<f64>,
    /// Iterations recorded by the orbit command.
    pub orbit_k: usize,
    /// Smallest sampled start radius for classification.
    pub classify_inner: f64,
    /// Largest sampled start radius for classification.
    pub classify_outer: f64,
    /// Topology fixture: `web`, `shell`, `ball`, `halfspace`, `blobs` or
    /// `annulus`.
    pub fixture: String,
    /// Nesting levels the web detector must find.
    pub min_levels: usize,
    /// Knot reach of the profile tables.
    pub profile_n: u32,
    /// Optional path to a knot table to load instead of constructing the
    /// profile from (n0, r_prime).
    pub profile_table: Option<String>,
    /// Number of consecutive rings checked for containment.
    pub rings_count: u32,
    /// Iterations of the wandering-ring experiment.
    pub wander_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: "radial".into(),
            dimension: 2,
            coefficient: 1.0,
            roots: vec![1.0, 2.0, 4.0],
            ki_bound: None,
            n0: 2,
            r_prime: 5.0,
            epsilon: 0.5,
            base_r: 5.0,
            k_max: 8,
            ell_max: 4,
            ladder_k: 20,
            c: 2.0,
            c_d: 1.0,
            seed: 0,
            out_dir: PathBuf::from("qflab-out"),
            grid_cells: 128,
            region_inner: 0.9,
            region_outer: 50.0,
            samples: 1000,
            witness_samples: 64,
            inclusion_cells: 64,
            orbit_start: vec![6.0, 0.0],
            orbit_k: 16,
            classify_inner: 0.5,
            classify_outer: 1136.0,
            fixture: "web".into(),
            min_levels: 1,
            profile_n: 40,
            profile_table: None,
            rings_count: 5,
            wander_k: 4,
        }
    }
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::config(key, format!("cannot parse '{}': {e}", value.trim())))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|piece| parse_field::<f64>(key, piece))
        .collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config {
            key: None,
            message: format!("cannot read config file {}: {e}", path.display()),
        })?;
        let mut cfg = Self::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                key: None,
                message: format!("line {}: expected 'key = value', got '{line}'", line_no + 1),
            })?;
            cfg.apply(key.trim(), value)?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "map" => self.map = value.trim().to_string(),
            "dimension" => self.dimension = parse_field(key, value)?,
            "coefficient" => self.coefficient = parse_field(key, value)?,
            "roots" => self.roots = parse_list(key, value)?,
            "ki_bound" => self.ki_bound = Some(parse_field(key, value)?),
            "n0" => self.n0 = parse_field(key, value)?,
            "r_prime" => self.r_prime = parse_field(key, value)?,
            "epsilon" => self.epsilon = parse_field(key, value)?,
            "base_r" => self.base_r = parse_field(key, value)?,
            "k_max" => self.k_max = parse_field(key, value)?,
            "ell_max" => self.ell_max = parse_field(key, value)?,
            "ladder_k" => self.ladder_k = parse_field(key, value)?,
            "c" => self.c = parse_field(key, value)?,
            "c_d" => self.c_d = parse_field(key, value)?,
            "seed" => self.seed = parse_field(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "grid_cells" => self.grid_cells = parse_field(key, value)?,
            "region_inner" => self.region_inner = parse_field(key, value)?,
            "region_outer" => self.region_outer = parse_field(key, value)?,
            "samples" => self.samples = parse_field(key, value)?,
            "witness_samples" => self.witness_samples = parse_field(key, value)?,
            "inclusion_cells" => self.inclusion_cells = parse_field(key, value)?,
            "orbit_start" => self.orbit_start = parse_list(key, value)?,
            "orbit_k" => self.orbit_k = parse_field(key, value)?,
            "classify_inner" => self.classify_inner = parse_field(key, value)?,
            "classify_outer" => self.classify_outer = parse_field(key, value)?,
            "fixture" => self.fixture = value.trim().to_string(),
            "min_levels" => self.min_levels = parse_field(key, value)?,
            "profile_n" => self.profile_n = parse_field(key, value)?,
            "profile_table" => self.profile_table = Some(value.trim().to_string()),
            "rings_count" => self.rings_count = parse_field(key, value)?,
            "wander_k" => self.wander_k = parse_field(key, value)?,
            other => {
                return Err(CliError::config(other, "unknown configuration key"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self.map.as_str() {
            "radial" | "entire_product" | "zorich" => {}
            other => {
                return Err(CliError::config(
                    "map",
                    format!("unknown family '{other}' (expected radial, entire_product or zorich)"),
                ))
            }
        }
        if !(self.dimension == 2 || self.dimension == 3) {
            return Err(CliError::config("dimension", format!("must be 2 or 3, got {}", self.dimension)));
        }
        if self.map == "entire_product" {
            if !(self.coefficient > 0.0) {
                return Err(CliError::config("coefficient", "must be positive"));
            }
            if self.roots.is_empty() {
                return Err(CliError::config("roots", "need at least one root"));
            }
            if self.roots.iter().any(|a| !(*a > 0.0)) {
                return Err(CliError::config("roots", "roots must be positive"));
            }
            if self.roots.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::config("roots", "roots must strictly increase"));
            }
        }
        if let Some(ki) = self.ki_bound {
            if !(ki >= 1.0 && ki.is_finite()) {
                return Err(CliError::config("ki_bound", format!("must be a finite value >= 1, got {ki}")));
            }
        }
        if self.n0 < 2 {
            return Err(CliError::config("n0", format!("the construction needs n0 >= 2, got {}", self.n0)));
        }
        if !(self.r_prime > 4.0) {
            return Err(CliError::config(
                "r_prime",
                format!("the construction needs r' > 4 (strict), got {}", self.r_prime),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::config("epsilon", format!("must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.base_r > 1.0 && self.base_r.is_finite()) {
            return Err(CliError::config("base_r", format!("must be a finite radius > 1, got {}", self.base_r)));
        }
        if self.k_max < 1 {
            return Err(CliError::config("k_max", "must be at least 1"));
        }
        if self.ladder_k < self.k_max + self.ell_max + 1 {
            return Err(CliError::config(
                "ladder_k",
                format!(
                    "ladder must cover k_max + ell_max + 1 = {} levels, got {}",
                    self.k_max + self.ell_max + 1,
                    self.ladder_k
                ),
            ));
        }
        if !(self.c > 1.0) {
            return Err(CliError::config("c", format!("separation constant must exceed 1, got {}", self.c)));
        }
        if !(self.c_d > 0.0) {
            return Err(CliError::config("c_d", format!("must be positive, got {}", self.c_d)));
        }
        if !(16..=2048).contains(&self.grid_cells) {
            return Err(CliError::config("grid_cells", format!("must lie in 16..=2048, got {}", self.grid_cells)));
        }
        if !(0.0 < self.region_inner && self.region_inner < self.region_outer) {
            return Err(CliError::config(
                "region_inner",
                format!(
                    "need 0 < region_inner < region_outer, got {} and {}",
                    self.region_inner, self.region_outer
                ),
            ));
        }
        if !(self.region_outer.is_finite() && self.region_outer < 1e300) {
            return Err(CliError::config("region_outer", "must stay below 1e300 for plain-coordinate grids"));
        }
        if self.samples < 2 {
            return Err(CliError::config("samples", "need at least 2 samples"));
        }
        if self.witness_samples < 1 {
            return Err(CliError::config("witness_samples", "need at least 1 witness sample"));
        }
        if self.inclusion_cells < 16 {
            return Err(CliError::config("inclusion_cells", "inclusion windows need at least 16 cells per side"));
        }
        if self.orbit_k < 1 {
            return Err(CliError::config("orbit_k", "must record at least one iteration"));
        }
        if self.orbit_start.iter().any(|c| !c.is_finite()) {
            return Err(CliError::config("orbit_start", "coordinates must be finite"));
        }
        if !(2..=3).contains(&self.orbit_start.len()) {
            return Err(CliError::config(
                "orbit_start",
                format!("need 2 or 3 coordinates, got {}", self.orbit_start.len()),
            ));
        }
        if !(0.0 < self.classify_inner && self.classify_inner < self.classify_outer) {
            return Err(CliError::config(
                "classify_inner",
                format!(
                    "need 0 < classify_inner < classify_outer, got {} and {}",
                    self.classify_inner, self.classify_outer
                ),
            ));
        }
        if !(self.classify_outer.is_finite() && self.classify_outer < 1e300) {
            return Err(CliError::config("classify_outer", "must stay below 1e300 for plain coordinates"));
        }
        match self.fixture.as_str() {
            "web" | "shell" | "ball" | "halfspace" | "blobs" | "annulus" => {}
            other => {
                return Err(CliError::config(
                    "fixture",
                    format!(
                        "unknown fixture '{other}' (expected web, shell, ball, halfspace, \
                         blobs or annulus)"
                    ),
                ))
            }
        }
        if self.min_levels < 1 {
            return Err(CliError::config("min_levels", "must be at least 1"));
        }
        if self.profile_n < self.n0 + 2 {
            return Err(CliError::config(
                "profile_n",
                format!("profile tables need profile_n >= n0 + 2 = {}", self.n0 + 2),
            ));
        }
        if !(1..=64).contains(&self.rings_count) {
            return Err(CliError::config("rings_count", format!("must lie in 1..=64, got {}", self.rings_count)));
        }
        if self.wander_k < 1 {
            return Err(CliError::config("wander_k", "must be at least 1"));
        }
        Ok(())
    }

    /// Echo lines for text reports: every resolved field, alphabetical,
    /// with JSON-formatted values.
    pub fn echo_lines(&self) -> Vec<String> {
        let value = serde_json::to_value(self).expect("config serializes");
        let map = value.as_object().expect("config is an object");
        map.iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }

    /// The knot profile described by this configuration, extended to
    /// `profile_n` knots.
    pub fn build_profile(&self) -> Result<GrowthProfile, CliError> {
        let mut profile = match &self.profile_table {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::config("profile_table", format!("cannot read {path}: {e}"))
                })?;
                GrowthProfile::from_table_str(&text)
                    .map_err(|e| CliError::config("profile_table", e.to_string()))?
            }
            None => GrowthProfile::new(self.n0, self.r_prime)
                .map_err(|e| CliError::config("n0/r_prime", e.to_string()))?,
        };
        profile.extend_to(self.profile_n);
        Ok(profile)
    }

    /// Knot reach that keeps every orbit, ladder and certificate of this
    /// configuration inside the profile.
    fn dynamics_reach(&self, n0: u32) -> u32 {
        let steps = self.ladder_k + self.orbit_k + self.k_max + self.ell_max + 8;
        (n0 + steps as u32).max(self.profile_n)
    }

    /// The configured map family, seeded, with its profile (when it has
    /// one) extended far enough for this run's dynamics.
    pub fn build_map(&self) -> Result<MapFamily, CliError> {
        let mut map = match self.map.as_str() {
            "radial" => {
                let profile = self.build_profile()?;
                MapFamily::radial(profile, self.dimension)
                    .map_err(|e| CliError::config("dimension", e.to_string()))?
            }
            "entire_product" => MapFamily::entire_product(self.coefficient, self.roots.clone())
                .map_err(|e| CliError::config("roots", e.to_string()))?
                .with_ring_seed(self.base_r)
                .map_err(|e| CliError::config("base_r", e.to_string()))?,
            "zorich" => MapFamily::zorich(self.ki_bound.unwrap_or(2.0))
                .map_err(|e| CliError::config("ki_bound", e.to_string()))?,
            other => unreachable!("validated family {other}"),
        }
        .with_seed(self.seed);
        if self.map != "zorich" {
            if let Some(ki) = self.ki_bound {
                map = map
                    .with_ki_bound(ki)
                    .map_err(|e| CliError::config("ki_bound", e.to_string()))?;
            }
        }
        let reach = self.dynamics_reach(map.profile().map_or(self.n0, |p| p.n0()));
        map.extend_profile_to(reach);
        Ok(map)
    }
}

use chernlab::chern::SwitchFunction;
use chernlab::lattice::{build_model, Boundary, DisorderKind, ModelSpec};
use chernlab::pipeline::Filling;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Marker,
    Gwb,
    Dichotomy,
    Stability,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Marker => "marker",
            Experiment::Gwb => "gwb",
            Experiment::Dichotomy => "dichotomy",
            Experiment::Stability => "stability",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GwbConfig {
    pub cluster_tol: Option<f64>,
    pub s_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub growth_tolerance: f64,
}

impl Default for GwbConfig {
    fn default() -> Self {
        Self {
            cluster_tol: None,
            s_grid: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            alpha_grid: vec![0.05, 0.1, 0.25, 0.5],
            growth_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchPair {
    pub first: SwitchFunction,
    pub second: SwitchFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChernConfig {
    /// Starting k-grid of the Bloch oracle.
    pub k_grid: usize,
    pub switch: Option<SwitchPair>,
    pub local_map: bool,
}

impl Default for ChernConfig {
    fn default() -> Self {
        Self { k_grid: 24, switch: None, local_map: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub lambda_grid: Vec<f64>,
    pub disorder_kind: DisorderKind,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self { lambda_grid: vec![0.0, 0.1, 0.2], disorder_kind: DisorderKind::OnsiteUniform }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub l_values: Vec<f64>,
    pub model: ModelSpec,
    #[serde(default)]
    pub filling: Filling,
    /// Smallest accepted spectral gap around the occupied states.
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
    #[serde(default)]
    pub gwb: GwbConfig,
    #[serde(default)]
    pub chern: ChernConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
    /// Used when `--out` is not given.
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_min_gap() -> f64 {
    1e-6
}

/// A configuration problem, naming the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

fn bad(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), message: message.into() }
}

fn strictly_ascending<T: PartialOrd>(values: &[T]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError { field: "config".into(), message: e.to_string() })?;
        if let Some(d) = config.model.disorder.as_mut() {
            d.seed.get_or_insert(config.seed);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sizes.is_empty() {
            return Err(bad("sizes", "must not be empty"));
        }
        if !strictly_ascending(&self.sizes) {
            return Err(bad("sizes", "must be strictly ascending"));
        }
        let family = self.model.family().map_err(|e| bad("model", e.to_string()))?;
        let needs_boxes = family.dimension() == 2;
        if self.experiment != Experiment::Gwb && !needs_boxes {
            return Err(bad("model", format!("experiment `{}` needs a 2D model", self.experiment.name())));
        }
        if needs_boxes {
            if self.l_values.len() < 2 {
                return Err(bad("l_values", "need at least two box half-widths"));
            }
            if self.l_values[0] <= 0.0 || !strictly_ascending(&self.l_values) {
                return Err(bad("l_values", "must be positive and strictly ascending"));
            }
            let smallest = build_model(&self.model, self.sizes[0], Boundary::Open)
                .map_err(|e| bad("sizes", format!("size {}: {e}", self.sizes[0])))?;
            let reach = smallest.geometry().half_width();
            let largest = self.l_values[self.l_values.len() - 1];
            if largest >= reach {
                return Err(bad(
                    "l_values",
                    format!("box half-width {largest} does not fit inside size {} (half-width {reach})", self.sizes[0]),
                ));
            }
        }
        if self.gwb.s_grid.is_empty() || self.gwb.s_grid.iter().any(|s| !(*s > 0.0)) {
            return Err(bad("gwb.s_grid", "must be non-empty with positive entries"));
        }
        if self.gwb.alpha_grid.is_empty() || self.gwb.alpha_grid.iter().any(|a| !(*a > 0.0)) {
            return Err(bad("gwb.alpha_grid", "must be non-empty with positive entries"));
        }
        if let Some(tol) = self.gwb.cluster_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(bad("gwb.cluster_tol", "must be positive"));
            }
        }
        if !(self.gwb.growth_tolerance > 0.0) {
            return Err(bad("gwb.growth_tolerance", "must be positive"));
        }
        if !(self.min_gap >= 0.0) {
            return Err(bad("min_gap", "must be >= 0"));
        }
        if self.chern.k_grid < 6 {
            return Err(bad("chern.k_grid", "must be at least 6"));
        }
        if self.stability.lambda_grid.is_empty() || self.stability.lambda_grid.iter().any(|l| !(*l >= 0.0)) {
            return Err(bad("stability.lambda_grid", "must be non-empty with entries >= 0"));
        }
        Ok(())
    }
}

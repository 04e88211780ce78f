//! Experiment configuration files. Every field may also come from a flag;
//! flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kcsm_core::models::ModelDescriptor;
use kcsm_core::spectra::SolverOptions;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub gibbs: GibbsSection,
    #[serde(default)]
    pub hitting: HittingSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub output: Output,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema: SCHEMA_VERSION,
            command: None,
            model: None,
            grid: Grid::default(),
            sampling: Sampling::default(),
            solver: Solver::default(),
            gibbs: GibbsSection::default(),
            hitting: HittingSection::default(),
            check: CheckSection::default(),
            output: Output::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Values of `q`; empty means the model's own `q`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<f64>,
    /// Sizes; empty means the model's own size.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_fallback_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_basis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration_factor: Option<usize>,
}

impl Solver {
    pub fn options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            dense_limit: self.dense_limit.unwrap_or(d.dense_limit),
            dense_fallback_limit: self.dense_fallback_limit.unwrap_or(d.dense_fallback_limit),
            max_basis: self.max_basis.unwrap_or(d.max_basis),
            iteration_factor: self.iteration_factor.unwrap_or(d.iteration_factor),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsSection {
    /// Interaction file; when absent, random interactions are drawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<PathBuf>,
    /// Values of `‖Φ‖` for random interactions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub norms: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<usize>,
    /// Random interactions per norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Constant boundary value on the collar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    /// The all-occupied configuration.
    #[default]
    Ones,
    /// A sample of the product measure.
    Equilibrium,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<StartKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graphs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persistence_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hitting_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// CSV destination; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("{e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!("config schema {} is not supported (this build reads schema {SCHEMA_VERSION})", self.schema);
        }
        if let Some(m) = &self.model {
            m.validate()?;
        }
        if let Some(q) = self.grid.q.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            bail!("grid value q = {q} is outside [0, 1]");
        }
        if self.sampling.samples == Some(0) {
            bail!("`samples` must be positive");
        }
        if let Some(t) = self.sampling.t_max {
            if !(t.is_finite() && t > 0.0) {
                bail!("`t_max` must be a positive number, got {t}");
            }
        }
        if self.sampling.t_points.is_some_and(|p| p < 2) {
            bail!("`t_points` must be at least 2");
        }
        if let Some(tol) = self.solver.tolerance {
            if !(tol > 0.0 && tol < 1.0) {
                bail!("solver tolerance must lie in (0, 1), got {tol}");
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> Result<u64> {
        self.sampling
            .seed
            .ok_or_else(|| anyhow::anyhow!("this subcommand is stochastic: give `--seed` or `sampling.seed`"))
    }

    pub fn model(&self) -> Result<&ModelDescriptor> {
        self.model
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("no model: give `--model NAME` or a `[model]` table"))
    }
}

/// Parses `a..b` (inclusive), `a,b,c` or a single size.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty size range {text}");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad size `{s}`")))
        .collect()
}

/// Parses `a..b:step` (inclusive), `a,b,c` or a single value.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some((range, step)) = text.split_once(':') {
        let (a, b) = range.split_once("..").ok_or_else(|| anyhow::anyhow!("expected `a..b:step`, got `{text}`"))?;
        let (a, b, step): (f64, f64, f64) = (a.trim().parse()?, b.trim().parse()?, step.trim().parse()?);
        if !(step > 0.0) || b < a {
            bail!("bad range `{text}`");
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        // round to 12 decimals so grid values print cleanly
        return Ok((0..count).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad value `{s}`")))
        .collect()
}

/// Descriptor with its size replaced by `n`: the side of a square for
/// planar models, the level count for the binary tree, the length otherwise.
pub fn with_size(desc: &ModelDescriptor, n: usize) -> ModelDescriptor {
    let mut d = desc.clone();
    match d.name.as_str() {
        "binary-tree" => d.levels = Some(n as u32),
        "north-east" | "spiral" => {
            d.sides = Some(vec![n; 2]);
            d.n = None;
        }
        _ => match &d.sides {
            Some(s) => d.sides = Some(vec![n; s.len()]),
            None => d.n = Some(n),
        },
    }
    d
}

/// Size reported in output rows.
pub fn size_of(desc: &ModelDescriptor) -> Option<usize> {
    desc.n
        .or_else(|| desc.sides.as_ref().and_then(|s| s.first().copied()))
        .or(desc.levels.map(|l| l as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_and_value_lists() {
        assert_eq!(parse_sizes("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_sizes("3, 8").unwrap(), vec![3, 8]);
        assert!(parse_sizes("5..2").is_err());
        assert_eq!(parse_values("0.3,0.5").unwrap(), vec![0.3, 0.5]);
        assert_eq!(parse_values("0.2..0.3:0.05").unwrap(), vec![0.2, 0.25, 0.3]);
        assert!(parse_values("0.2..0.1:0.05").is_err());
    }

    #[test]
    fn config_round_trip_and_rejections() {
        let text = "schema = 1\n[model]\nname = \"east\"\nn = 6\n[grid]\nq = [0.3, 0.5]\n[sampling]\nseed = 4\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.seed().unwrap(), 4);
        assert!(ExperimentConfig::parse("schema = 2\n").is_err());
        assert!(ExperimentConfig::parse("bogus = 1\n").is_err());
        assert!(ExperimentConfig::parse("[grid]\nq = [1.5]\n").is_err());
        assert!(ExperimentConfig::default().seed().is_err());
    }

    #[test]
    fn sizes_follow_the_model_shape() {
        let ne = ModelDescriptor::named("north-east", 0.5);
        assert_eq!(with_size(&ne, 4).sides, Some(vec![4, 4]));
        let east = ModelDescriptor::named("east", 0.5);
        assert_eq!(with_size(&east, 7).n, Some(7));
        assert_eq!(size_of(&with_size(&east, 7)), Some(7));
    }
}

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::adapt::AdaptConfig;
use crate::error::{DpgError, Result};
use crate::forms::NormVariant;
use crate::problems::ProblemSpec;
use crate::solver::Discretization;

/// Optional run settings, as read from a TOML file or gathered from
/// command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub eps: Option<f64>,
    pub p: Option<usize>,
    pub dp: Option<usize>,
    pub norm: Option<String>,
    pub budget: Option<usize>,
    pub fraction: Option<f64>,
    pub max_cycles: Option<usize>,
    pub out: Option<PathBuf>,
    pub uniform: Option<bool>,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| DpgError::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Fields of `self` where set, otherwise those of `lower`.
    pub fn over(self, lower: FileConfig) -> FileConfig {
        FileConfig {
            problem: self.problem.or(lower.problem),
            eps: self.eps.or(lower.eps),
            p: self.p.or(lower.p),
            dp: self.dp.or(lower.dp),
            norm: self.norm.or(lower.norm),
            budget: self.budget.or(lower.budget),
            fraction: self.fraction.or(lower.fraction),
            max_cycles: self.max_cycles.or(lower.max_cycles),
            out: self.out.or(lower.out),
            uniform: self.uniform.or(lower.uniform),
        }
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub eps: f64,
    pub p: usize,
    pub dp: usize,
    pub norm: NormVariant,
    pub budget: usize,
    pub fraction: f64,
    pub max_cycles: usize,
    pub out: PathBuf,
    pub uniform: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "ex1".into(),
            eps: 1e-2,
            p: 2,
            dp: crate::solver::DEFAULT_ENRICHMENT,
            norm: NormVariant::Proposed,
            budget: 200_000,
            fraction: 0.10,
            max_cycles: 30,
            out: PathBuf::from("."),
            uniform: false,
        }
    }
}

impl RunConfig {
    /// Command line over config file over defaults.
    pub fn resolve(cli: FileConfig, file: Option<FileConfig>) -> Result<Self> {
        let merged = cli.over(file.unwrap_or_default());
        let d = RunConfig::default();
        let norm = match merged.norm {
            Some(s) => s.parse()?,
            None => d.norm,
        };
        let cfg = RunConfig {
            problem: merged.problem.unwrap_or(d.problem),
            eps: merged.eps.unwrap_or(d.eps),
            p: merged.p.unwrap_or(d.p),
            dp: merged.dp.unwrap_or(d.dp),
            norm,
            budget: merged.budget.unwrap_or(d.budget),
            fraction: merged.fraction.unwrap_or(d.fraction),
            max_cycles: merged.max_cycles.unwrap_or(d.max_cycles),
            out: merged.out.unwrap_or(d.out),
            uniform: merged.uniform.unwrap_or(d.uniform),
        };
        if !(cfg.eps > 0.0) {
            return Err(DpgError::invalid(format!("eps must be positive, got {}", cfg.eps)));
        }
        if !(cfg.fraction > 0.0 && cfg.fraction <= 1.0) {
            return Err(DpgError::invalid(format!("fraction {} outside (0, 1]", cfg.fraction)));
        }
        Ok(cfg)
    }

    pub fn adapt_config(&self) -> AdaptConfig {
        AdaptConfig {
            fraction: self.fraction,
            dof_budget: self.budget,
            max_cycles: self.max_cycles,
            discretization: Discretization::new(self.p, self.dp),
            norm: self.norm,
        }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::by_name(&self.problem, self.eps)
    }
}

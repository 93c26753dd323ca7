//! Run config documents.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dupdiv::model::ModelConfig;
use dupdiv::stats::SuiteParams;
use dupdiv::DDGraph;
use serde::{Deserialize, Serialize};

use crate::output::Format;

/// Size of the complete starting graph when nothing else is given.
pub const DEFAULT_M0: usize = 5;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: Option<ModelConfig>,
    /// Per-suite experiment parameters for `verify`.
    #[serde(default)]
    pub params: SuiteParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    /// Starting graph for graph runs and the forward recursion.
    #[serde(default)]
    pub graph: Option<GraphConfig>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// Either a complete graph on `m0` vertices or an explicit edge list.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default)]
    pub m0: Option<usize>,
    #[serde(default)]
    pub edges: Option<Vec<(usize, usize)>>,
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn initial_graph(cfg: Option<&GraphConfig>, m0_flag: Option<usize>) -> Result<DDGraph> {
    let cfg = cfg.cloned().unwrap_or_default();
    if let Some(edges) = &cfg.edges {
        if m0_flag.is_some() {
            bail!("--m0 conflicts with the edge list in the config");
        }
        let needed = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        let n = cfg.m0.unwrap_or(needed);
        if n == 0 {
            bail!("the starting graph has no vertices");
        }
        return DDGraph::from_edges(n, edges).map_err(|e| anyhow::anyhow!("graph.edges: {e}"));
    }
    let m0 = m0_flag.or(cfg.m0).unwrap_or(DEFAULT_M0);
    if m0 == 0 {
        bail!("m0 must be positive");
    }
    Ok(DDGraph::complete(m0))
}

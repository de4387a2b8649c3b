use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fit::select_b;
use super::{BlockState, Multigraph, Objective, SbmConfig, SbmError};
use crate::corpus::CitationGraph;

/// Per-level terms of the nested description length (nats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlBreakdown {
    pub entropy_per_level: Vec<f64>,
    pub partition_dl_per_level: Vec<f64>,
    pub total: f64,
}

impl DlBreakdown {
    fn from_levels(levels: &[BlockState]) -> Self {
        let entropy_per_level: Vec<f64> = levels.iter().map(BlockState::entropy).collect();
        let partition_dl_per_level: Vec<f64> = levels.iter().map(BlockState::partition_dl).collect();
        let total = entropy_per_level.iter().sum::<f64>() + partition_dl_per_level.iter().sum::<f64>();
        Self {
            entropy_per_level,
            partition_dl_per_level,
            total,
        }
    }
}

/// Stack of partitions: level 0 groups graph nodes, level `l` groups the
/// blocks of level `l - 1`, and the top level is a single block.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<BlockState>,
    dl: DlBreakdown,
}

/// JSON form of a [`Hierarchy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyExport {
    pub format: String,
    pub version: u32,
    pub degree_corrected: bool,
    pub n_nodes: usize,
    pub n_edges: u64,
    pub levels: Vec<LevelExport>,
    pub dl: DlBreakdown,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelExport {
    pub level: usize,
    pub n_blocks: usize,
    pub labels: Vec<usize>,
}

pub const HIERARCHY_FORMAT: &str = "citesbm-hierarchy";

/// Rebuild per-level states from label arrays, validating shapes.
fn states_from_labels(
    graph: &Multigraph,
    levels: &[Vec<usize>],
) -> Result<Vec<BlockState>, SbmError> {
    let mut states = Vec::with_capacity(levels.len());
    let mut current = graph.clone();
    for (l, labels) in levels.iter().enumerate() {
        if labels.len() != current.n_nodes() {
            return Err(SbmError::Inconsistent(format!(
                "level {l} labels {} entities, expected {}",
                labels.len(),
                current.n_nodes()
            )));
        }
        let objective = if l == 0 {
            Objective::DegreeCorrected
        } else {
            Objective::Multigraph
        };
        let st = BlockState::from_labels(&current, labels.clone(), objective)?;
        if st.n_nonempty() != st.n_blocks() {
            return Err(SbmError::Inconsistent(format!(
                "level {l} has empty blocks (labels not compact)"
            )));
        }
        current = st.block_multigraph();
        states.push(st);
    }
    Ok(states)
}

/// Nested description length recomputed from scratch from the label arrays.
/// The top level must hold a single block.
pub fn description_length(
    levels: &[Vec<usize>],
    graph: &CitationGraph,
) -> Result<DlBreakdown, SbmError> {
    let states = states_from_labels(&Multigraph::from_citation_graph(graph), levels)?;
    match states.last() {
        Some(top) if top.n_blocks() == 1 || (top.n_blocks() == 0 && graph.n_nodes() == 0) => {}
        Some(top) => {
            return Err(SbmError::Inconsistent(format!(
                "top level has {} blocks, expected 1",
                top.n_blocks()
            )))
        }
        None => return Err(SbmError::Inconsistent("no levels".into())),
    }
    Ok(DlBreakdown::from_levels(&states))
}

impl Hierarchy {
    /// Assemble from fitted states (each level partitioning the one below).
    pub fn from_states(levels: Vec<BlockState>) -> Result<Self, SbmError> {
        match levels.last() {
            Some(top) if top.n_nonempty() == 1 => {}
            _ => return Err(SbmError::Inconsistent("top level must be a single block".into())),
        }
        for w in levels.windows(2) {
            if w[1].n_entities() != w[0].n_blocks() {
                return Err(SbmError::Inconsistent(
                    "level sizes do not chain".into(),
                ));
            }
        }
        let dl = DlBreakdown::from_levels(&levels);
        Ok(Self { levels, dl })
    }

    pub fn from_level_labels(graph: &CitationGraph, levels: &[Vec<usize>]) -> Result<Self, SbmError> {
        let states = states_from_labels(&Multigraph::from_citation_graph(graph), levels)?;
        Self::from_states(states)
    }

    pub fn levels(&self) -> &[BlockState] {
        &self.levels
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn dl(&self) -> &DlBreakdown {
        &self.dl
    }

    /// Block count per level, bottom first.
    pub fn blocks_per_level(&self) -> Vec<usize> {
        self.levels.iter().map(BlockState::n_blocks).collect()
    }

    pub fn level_labels(&self) -> Vec<Vec<usize>> {
        self.levels.iter().map(|s| s.labels().to_vec()).collect()
    }

    /// Community of every graph node at `level` (composition of levels
    /// `0..=level`; ids already run over `0..B_level`).
    pub fn project_level(&self, level: usize) -> Result<Vec<usize>, SbmError> {
        if level >= self.levels.len() {
            return Err(SbmError::LevelOutOfRange {
                level,
                levels: self.levels.len(),
            });
        }
        let mut map = self.levels[0].labels().to_vec();
        for st in &self.levels[1..=level] {
            let up = st.labels();
            for c in map.iter_mut() {
                *c = up[*c];
            }
        }
        Ok(map)
    }

    pub fn to_export(&self, meta: BTreeMap<String, String>) -> HierarchyExport {
        HierarchyExport {
            format: HIERARCHY_FORMAT.into(),
            version: 1,
            degree_corrected: self.levels[0].objective() == Objective::DegreeCorrected,
            n_nodes: self.levels[0].n_entities(),
            n_edges: self.levels[0].n_edges(),
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(level, st)| LevelExport {
                    level,
                    n_blocks: st.n_blocks(),
                    labels: st.labels().to_vec(),
                })
                .collect(),
            dl: self.dl.clone(),
            meta,
        }
    }

    pub fn from_export(graph: &CitationGraph, export: &HierarchyExport) -> Result<Self, SbmError> {
        if export.format != HIERARCHY_FORMAT {
            return Err(SbmError::Inconsistent(format!("unknown format `{}`", export.format)));
        }
        let labels: Vec<Vec<usize>> = export.levels.iter().map(|l| l.labels.clone()).collect();
        Self::from_level_labels(graph, &labels)
    }
}

fn fit_upward<R: Rng + ?Sized>(
    mut levels: Vec<BlockState>,
    mut graph: Multigraph,
    bottom_bounds: (usize, usize),
    cfg: &SbmConfig,
    rng: &mut R,
) -> Result<Vec<BlockState>, SbmError> {
    loop {
        let (objective, b_min, b_max) = if levels.is_empty() {
            (Objective::DegreeCorrected, bottom_bounds.0, bottom_bounds.1)
        } else {
            (Objective::Multigraph, 1, (graph.n_nodes() - 1).max(1))
        };
        let state = if !levels.is_empty() && !cfg.nested {
            BlockState::from_labels(&graph, vec![0; graph.n_nodes()], objective)?
        } else {
            select_b(&graph, objective, b_min, b_max, cfg, rng)?
        };
        let b = state.n_blocks();
        graph = state.block_multigraph();
        levels.push(state);
        if b == 1 {
            return Ok(levels);
        }
    }
}

/// Fit the nested model: select B on the graph (degree-corrected), then
/// recursively on each block multigraph until a single block remains, then
/// run refinement passes that re-select each level (and everything above it)
/// and keep the result whenever the total DL drops.
pub fn fit_nested<R: Rng + ?Sized>(
    graph: &CitationGraph,
    cfg: &SbmConfig,
    rng: &mut R,
) -> Result<Hierarchy, SbmError> {
    let n = graph.n_nodes();
    if n == 0 {
        return Err(SbmError::EmptyGraph);
    }
    let base = Multigraph::from_citation_graph(graph);
    let b_max = cfg.b_max.unwrap_or(n).clamp(1, n);
    let bounds = (cfg.b_min.clamp(1, b_max), b_max);

    let mut levels = fit_upward(Vec::new(), base.clone(), bounds, cfg, rng)?;
    let mut total = DlBreakdown::from_levels(&levels).total;
    log::info!(
        "nested fit: blocks per level {:?}, DL {total:.3}",
        levels.iter().map(BlockState::n_blocks).collect::<Vec<_>>()
    );

    if cfg.nested {
        for pass in 0..cfg.max_passes {
            let start = total;
            let mut l = 0;
            while l < levels.len() {
                let below = if l == 0 {
                    base.clone()
                } else {
                    levels[l - 1].block_multigraph()
                };
                let candidate = fit_upward(levels[..l].to_vec(), below, bounds, cfg, rng)?;
                let dl = DlBreakdown::from_levels(&candidate).total;
                if dl < total {
                    levels = candidate;
                    total = dl;
                }
                l += 1;
            }
            log::debug!("refinement pass {pass}: DL {start:.6} -> {total:.6}");
            if start - total < cfg.tol {
                break;
            }
        }
    }
    Hierarchy::from_states(levels)
}

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::{CorpusError, PatentRecord, Result};

/// Directed simple citation graph. Edges point from the citing patent to the
/// cited patent and are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    ids: Vec<String>,
    years: Vec<i32>,
    edges: Vec<(usize, usize)>,
    index: HashMap<String, usize>,
}

/// Counters from [`build_graph`]. Together with the kept edges they account
/// for every input citation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub kept: usize,
    pub dropped_dangling: usize,
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
}

impl CitationGraph {
    /// Assemble a graph from raw parts, checking every invariant.
    pub fn from_parts(
        ids: Vec<String>,
        years: Vec<i32>,
        mut edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if ids.len() != years.len() {
            return Err(CorpusError::InvalidGraph(format!(
                "{} ids but {} years",
                ids.len(),
                years.len()
            )));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if id.is_empty() {
                return Err(CorpusError::InvalidGraph(format!("node {i} has an empty id")));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(CorpusError::InvalidGraph(format!("duplicate id `{id}`")));
            }
        }
        let n = ids.len();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(CorpusError::InvalidGraph(format!(
                    "duplicate edge {} -> {}",
                    ids[w[0].0], ids[w[0].1]
                )));
            }
        }
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(CorpusError::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(CorpusError::InvalidGraph(format!("self-loop on `{}`", ids[a])));
            }
        }
        Ok(Self {
            ids,
            years,
            edges,
            index,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn id_of(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn year_of(&self, v: usize) -> i32 {
        self.years[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Inclusive (min, max) application year, `None` for an empty graph.
    pub fn year_span(&self) -> Option<(i32, i32)> {
        let min = self.years.iter().min()?;
        let max = self.years.iter().max()?;
        Some((*min, *max))
    }
}

/// Build the citation graph over `records`. Citations with an endpoint outside
/// the table, self-citations and repeated pairs are dropped and counted.
pub fn build_graph(
    records: &[PatentRecord],
    citations: &[(String, String)],
) -> Result<(CitationGraph, BuildReport)> {
    let ids: Vec<String> = records.iter().map(|r| r.app_id.clone()).collect();
    let years: Vec<i32> = records.iter().map(|r| r.app_year).collect();
    let index: HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut report = BuildReport::default();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (citing, cited) in citations {
        let (Some(&a), Some(&b)) = (index.get(citing.as_str()), index.get(cited.as_str())) else {
            report.dropped_dangling += 1;
            continue;
        };
        if a == b {
            report.dropped_self_loops += 1;
        } else if !seen.insert((a, b)) {
            report.dropped_duplicates += 1;
        } else {
            edges.push((a, b));
        }
    }
    report.kept = edges.len();
    log::info!(
        "citation graph: {} nodes, {} edges ({} dangling, {} self-loops, {} duplicates dropped)",
        ids.len(),
        report.kept,
        report.dropped_dangling,
        report.dropped_self_loops,
        report.dropped_duplicates
    );
    Ok((CitationGraph::from_parts(ids, years, edges)?, report))
}

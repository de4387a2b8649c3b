use crate::corpus::CitationGraph;

/// Directed multigraph with integer multiplicities. Level 0 of the hierarchy
/// is the citation graph itself (all multiplicities 1); higher levels run on
/// block multigraphs, which may carry self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    out_adj: Vec<Vec<(usize, u64)>>,
    in_adj: Vec<Vec<(usize, u64)>>,
    k_out: Vec<u64>,
    k_in: Vec<u64>,
    n_edges: u64,
    /// Cumulative undirected multiplicities, parallel to `out_adj ++ in_adj`.
    nbr_cum: Vec<Vec<u64>>,
}

impl Multigraph {
    /// Build from weighted directed edges; repeated pairs are summed.
    pub fn from_weighted_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        let mut out_adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        let mut in_adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for (a, b, m) in edges {
            if m == 0 {
                continue;
            }
            out_adj[a].push((b, m));
            in_adj[b].push((a, m));
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
            let mut merged: Vec<(usize, u64)> = Vec::with_capacity(list.len());
            for &(t, m) in list.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == t => last.1 += m,
                    _ => merged.push((t, m)),
                }
            }
            *list = merged;
        }
        let k_out: Vec<u64> = out_adj.iter().map(|l| l.iter().map(|e| e.1).sum()).collect();
        let k_in: Vec<u64> = in_adj.iter().map(|l| l.iter().map(|e| e.1).sum()).collect();
        let n_edges = k_out.iter().sum();
        let nbr_cum = (0..n)
            .map(|v| {
                let mut acc = 0;
                out_adj[v]
                    .iter()
                    .chain(in_adj[v].iter())
                    .map(|&(_, m)| {
                        acc += m;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self {
            out_adj,
            in_adj,
            k_out,
            k_in,
            n_edges,
            nbr_cum,
        }
    }

    pub fn from_citation_graph(g: &CitationGraph) -> Self {
        Self::from_weighted_edges(g.n_nodes(), g.edges().iter().map(|&(a, b)| (a, b, 1)))
    }

    pub fn n_nodes(&self) -> usize {
        self.out_adj.len()
    }

    pub fn n_edges(&self) -> u64 {
        self.n_edges
    }

    pub fn out_edges(&self, v: usize) -> &[(usize, u64)] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: usize) -> &[(usize, u64)] {
        &self.in_adj[v]
    }

    pub fn k_out(&self) -> &[u64] {
        &self.k_out
    }

    pub fn k_in(&self) -> &[u64] {
        &self.k_in
    }

    /// Total (in + out) degree of `v`.
    pub fn degree(&self, v: usize) -> u64 {
        self.k_out[v] + self.k_in[v]
    }

    /// The neighbour at undirected edge-endpoint position `x < degree(v)`;
    /// drawing `x` uniformly picks a neighbour proportionally to multiplicity.
    pub fn neighbour_at(&self, v: usize, x: u64) -> usize {
        let cum = &self.nbr_cum[v];
        let i = cum.partition_point(|&c| c <= x);
        let n_out = self.out_adj[v].len();
        if i < n_out {
            self.out_adj[v][i].0
        } else {
            self.in_adj[v][i - n_out].0
        }
    }

    /// Multiplicity of the self-loop on `v`.
    pub fn self_loops(&self, v: usize) -> u64 {
        self.out_adj[v]
            .binary_search_by_key(&v, |e| e.0)
            .map(|i| self.out_adj[v][i].1)
            .unwrap_or(0)
    }
}

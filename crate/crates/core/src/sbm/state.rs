use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lgamma::{ln_binomial, ln_factorial, ln_multiset, xlogx};
use super::{Multigraph, SbmError};

/// Which entropy a level uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Directed degree-corrected entropy; used on the observed graph.
    DegreeCorrected,
    /// Non-degree-corrected directed multigraph entropy; used on block graphs.
    Multigraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Random,
    Singleton,
}

/// One level of a partition together with its block statistics.
///
/// `e_rs` is stored twice (row maps and column maps) so that both the
/// out-neighbour and in-neighbour blocks of a block can be walked.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    objective: Objective,
    labels: Vec<usize>,
    block_out: Vec<BTreeMap<usize, u64>>,
    block_in: Vec<BTreeMap<usize, u64>>,
    e_out: Vec<u64>,
    e_in: Vec<u64>,
    sizes: Vec<u64>,
    k_out: Vec<u64>,
    k_in: Vec<u64>,
    n_edges: u64,
    n_nonempty: usize,
}

impl BlockState {
    /// Build statistics for `labels` with `n_blocks` allocated blocks
    /// (labels must be `< n_blocks`; empty blocks are allowed).
    pub fn from_labels_with_blocks(
        graph: &Multigraph,
        labels: Vec<usize>,
        n_blocks: usize,
        objective: Objective,
    ) -> Result<Self, SbmError> {
        let n = graph.n_nodes();
        if labels.len() != n {
            return Err(SbmError::LabelLength {
                got: labels.len(),
                expected: n,
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_blocks) {
            return Err(SbmError::BlockOutOfRange {
                block: bad,
                n_blocks,
            });
        }
        let mut state = Self {
            objective,
            block_out: vec![BTreeMap::new(); n_blocks],
            block_in: vec![BTreeMap::new(); n_blocks],
            e_out: vec![0; n_blocks],
            e_in: vec![0; n_blocks],
            sizes: vec![0; n_blocks],
            k_out: graph.k_out().to_vec(),
            k_in: graph.k_in().to_vec(),
            n_edges: graph.n_edges(),
            n_nonempty: 0,
            labels,
        };
        for v in 0..n {
            let r = state.labels[v];
            state.sizes[r] += 1;
            for &(w, m) in graph.out_edges(v) {
                state.add_edges(r, state.labels[w], m as i64);
            }
        }
        state.n_nonempty = state.sizes.iter().filter(|&&c| c > 0).count();
        Ok(state)
    }

    /// Build statistics with `B = max(label) + 1`.
    pub fn from_labels(
        graph: &Multigraph,
        labels: Vec<usize>,
        objective: Objective,
    ) -> Result<Self, SbmError> {
        let b = labels.iter().max().map_or(0, |&m| m + 1);
        Self::from_labels_with_blocks(graph, labels, b, objective)
    }

    /// Initial state with `n_blocks` non-empty blocks.
    pub fn init(
        graph: &Multigraph,
        n_blocks: usize,
        mode: InitMode,
        objective: Objective,
        seed: u64,
    ) -> Result<Self, SbmError> {
        let n = graph.n_nodes();
        if n_blocks < 1 || n_blocks > n {
            return Err(SbmError::BlockCount { b: n_blocks, n });
        }
        let labels = match mode {
            InitMode::Singleton => {
                if n_blocks != n {
                    return Err(SbmError::Singleton { b: n_blocks, n });
                }
                (0..n).collect()
            }
            InitMode::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                let mut labels = vec![0; n];
                for (i, &v) in order.iter().enumerate() {
                    labels[v] = if i < n_blocks {
                        i
                    } else {
                        rng.random_range(0..n_blocks)
                    };
                }
                labels
            }
        };
        Self::from_labels_with_blocks(graph, labels, n_blocks, objective)
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    /// Allocated blocks (equal to [`Self::n_nonempty`] after compaction).
    pub fn n_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_nonempty(&self) -> usize {
        self.n_nonempty
    }

    pub fn n_entities(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> u64 {
        self.n_edges
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn e_out(&self) -> &[u64] {
        &self.e_out
    }

    pub fn e_in(&self) -> &[u64] {
        &self.e_in
    }

    /// Edge count from block `r` to block `s`.
    pub fn e_rs(&self, r: usize, s: usize) -> u64 {
        self.block_out
            .get(r)
            .and_then(|row| row.get(&s))
            .copied()
            .unwrap_or(0)
    }

    /// Non-zero entries of row `r` of the block matrix.
    pub fn row(&self, r: usize) -> &BTreeMap<usize, u64> {
        &self.block_out[r]
    }

    /// Non-zero entries of column `s` of the block matrix.
    pub fn col(&self, s: usize) -> &BTreeMap<usize, u64> {
        &self.block_in[s]
    }

    fn size(&self, r: usize) -> u64 {
        self.sizes.get(r).copied().unwrap_or(0)
    }

    fn add_edges(&mut self, r: usize, s: usize, m: i64) {
        if m == 0 {
            return;
        }
        fn bump(map: &mut BTreeMap<usize, u64>, key: usize, m: i64) {
            let e = map.entry(key).or_insert(0);
            *e = (*e as i64 + m) as u64;
            if *e == 0 {
                map.remove(&key);
            }
        }
        bump(&mut self.block_out[r], s, m);
        bump(&mut self.block_in[s], r, m);
        self.e_out[r] = (self.e_out[r] as i64 + m) as u64;
        self.e_in[s] = (self.e_in[s] as i64 + m) as u64;
    }

    fn push_empty_block(&mut self) {
        self.block_out.push(BTreeMap::new());
        self.block_in.push(BTreeMap::new());
        self.e_out.push(0);
        self.e_in.push(0);
        self.sizes.push(0);
    }

    /// Renumber blocks by first occurrence in entity order and drop empty ones.
    pub fn compact(&mut self) {
        let mut map = vec![usize::MAX; self.n_blocks()];
        let mut next = 0;
        for l in self.labels.iter_mut() {
            if map[*l] == usize::MAX {
                map[*l] = next;
                next += 1;
            }
            *l = map[*l];
        }
        let remap = |m: &BTreeMap<usize, u64>| m.iter().map(|(&k, &e)| (map[k], e)).collect();
        let mut block_out = vec![BTreeMap::new(); next];
        let mut block_in = vec![BTreeMap::new(); next];
        let mut e_out = vec![0; next];
        let mut e_in = vec![0; next];
        let mut sizes = vec![0; next];
        for r in 0..self.n_blocks() {
            let nr = map[r];
            if nr == usize::MAX {
                continue;
            }
            block_out[nr] = remap(&self.block_out[r]);
            block_in[nr] = remap(&self.block_in[r]);
            e_out[nr] = self.e_out[r];
            e_in[nr] = self.e_in[r];
            sizes[nr] = self.sizes[r];
        }
        self.block_out = block_out;
        self.block_in = block_in;
        self.e_out = e_out;
        self.e_in = e_in;
        self.sizes = sizes;
        self.n_nonempty = next;
    }

    /// The block multigraph: one entity per block, `e_rs` parallel edges.
    pub fn block_multigraph(&self) -> Multigraph {
        Multigraph::from_weighted_edges(
            self.n_blocks(),
            self.block_out
                .iter()
                .enumerate()
                .flat_map(|(r, row)| row.iter().map(move |(&s, &e)| (r, s, e))),
        )
    }

    /// True when the maintained statistics equal a from-scratch recount.
    pub fn is_consistent_with(&self, graph: &Multigraph) -> bool {
        match Self::from_labels_with_blocks(
            graph,
            self.labels.clone(),
            self.n_blocks(),
            self.objective,
        ) {
            Ok(fresh) => fresh == *self,
            Err(_) => false,
        }
    }

    // ----- description length ---------------------------------------------

    /// Entropy of the edges given the partition (nats).
    pub fn entropy(&self) -> f64 {
        match self.objective {
            Objective::DegreeCorrected => {
                let degrees: f64 = self
                    .k_out
                    .iter()
                    .zip(&self.k_in)
                    .map(|(&o, &i)| ln_factorial(o) + ln_factorial(i))
                    .sum();
                let cells: f64 = self
                    .block_out
                    .iter()
                    .flat_map(|row| row.values())
                    .map(|&e| xlogx(e))
                    .sum();
                let margins: f64 = self
                    .e_out
                    .iter()
                    .chain(&self.e_in)
                    .map(|&e| xlogx(e))
                    .sum();
                -(self.n_edges as f64) - degrees - cells + margins
            }
            Objective::Multigraph => self
                .block_out
                .iter()
                .enumerate()
                .flat_map(|(r, row)| row.iter().map(move |(&s, &e)| (r, s, e)))
                .map(|(r, s, e)| ln_multiset(self.sizes[r] * self.sizes[s], e))
                .sum(),
        }
    }

    /// Cost of the partition itself: block count and block sizes.
    pub fn partition_dl(&self) -> f64 {
        partition_dl(self.n_entities() as u64, self.n_nonempty as u64, &self.sizes)
    }

    /// Flat prior on the block matrix: a single block above this level.
    pub fn top_prior(&self) -> f64 {
        let b = self.n_nonempty as u64;
        ln_multiset(b * b, self.n_edges)
    }

    /// Single-level description length: entropy + partition + flat block prior.
    pub fn single_level_dl(&self) -> f64 {
        self.entropy() + self.partition_dl() + self.top_prior()
    }

    // ----- incremental updates ---------------------------------------------

    /// Gathers `v`'s out/in edges as (block, multiplicity), excluding self-loops.
    fn node_group(&self, graph: &Multigraph, v: usize) -> Group {
        let out = graph
            .out_edges(v)
            .iter()
            .filter(|e| e.0 != v)
            .map(|&(w, m)| (self.labels[w], m))
            .collect();
        let inn = graph
            .in_edges(v)
            .iter()
            .filter(|e| e.0 != v)
            .map(|&(u, m)| (self.labels[u], m))
            .collect();
        Group {
            out,
            inn,
            self_w: graph.self_loops(v),
            k_out: graph.k_out()[v],
            k_in: graph.k_in()[v],
            size: 1,
        }
    }

    /// Change in single-level DL if `v` moved to block `s` (`s == n_blocks()`
    /// means a fresh block). The state is not modified.
    pub fn delta_dl_move(&self, graph: &Multigraph, v: usize, s: usize) -> Result<f64, SbmError> {
        if v >= self.n_entities() {
            return Err(SbmError::NodeOutOfRange {
                node: v,
                n: self.n_entities(),
            });
        }
        if s > self.n_blocks() {
            return Err(SbmError::BlockOutOfRange {
                block: s,
                n_blocks: self.n_blocks(),
            });
        }
        Ok(self.delta_move_unchecked(graph, v, s))
    }

    pub(crate) fn delta_move_unchecked(&self, graph: &Multigraph, v: usize, s: usize) -> f64 {
        let r = self.labels[v];
        if r == s {
            return 0.0;
        }
        let group = self.node_group(graph, v);
        self.delta_group(r, s, &group)
    }

    /// Change in single-level DL if every entity of block `r` joined block `s`.
    pub fn delta_dl_merge(&self, r: usize, s: usize) -> f64 {
        if r == s {
            return 0.0;
        }
        let group = Group {
            out: self.block_out[r]
                .iter()
                .filter(|e| *e.0 != r)
                .map(|(&t, &m)| (t, m))
                .collect(),
            inn: self.block_in[r]
                .iter()
                .filter(|e| *e.0 != r)
                .map(|(&t, &m)| (t, m))
                .collect(),
            self_w: self.e_rs(r, r),
            k_out: self.e_out[r],
            k_in: self.e_in[r],
            size: self.sizes[r],
        };
        self.delta_group(r, s, &group)
    }

    fn delta_group(&self, r: usize, s: usize, g: &Group) -> f64 {
        let mut delta: Vec<((usize, usize), i64)> =
            Vec::with_capacity(2 * (g.out.len() + g.inn.len()) + 2);
        for &(t, m) in &g.out {
            delta.push(((r, t), -(m as i64)));
            delta.push(((s, t), m as i64));
        }
        for &(t, m) in &g.inn {
            delta.push(((t, r), -(m as i64)));
            delta.push(((t, s), m as i64));
        }
        if g.self_w > 0 {
            delta.push(((r, r), -(g.self_w as i64)));
            delta.push(((s, s), g.self_w as i64));
        }
        delta.sort_unstable_by_key(|d| d.0);
        let mut merged: Vec<((usize, usize), i64)> = Vec::with_capacity(delta.len());
        for (k, m) in delta {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += m,
                _ => merged.push((k, m)),
            }
        }
        merged.retain(|d| d.1 != 0);

        let n_r = self.sizes[r];
        let n_s = self.size(s);
        let n_edges = self.n_edges;

        let d_entropy = match self.objective {
            Objective::DegreeCorrected => {
                let mut d = 0.0;
                for &((a, b), m) in &merged {
                    let e = self.e_rs(a, b);
                    d -= xlogx((e as i64 + m) as u64) - xlogx(e);
                }
                let out_r = self.e_out[r];
                let out_s = self.e_out.get(s).copied().unwrap_or(0);
                let in_r = self.e_in[r];
                let in_s = self.e_in.get(s).copied().unwrap_or(0);
                d += xlogx(out_r - g.k_out) - xlogx(out_r);
                d += xlogx(out_s + g.k_out) - xlogx(out_s);
                d += xlogx(in_r - g.k_in) - xlogx(in_r);
                d += xlogx(in_s + g.k_in) - xlogx(in_s);
                d
            }
            Objective::Multigraph => {
                let mut keys: Vec<(usize, usize)> = merged.iter().map(|d| d.0).collect();
                for b in [r, s] {
                    if b < self.n_blocks() {
                        keys.extend(self.block_out[b].keys().map(|&x| (b, x)));
                        keys.extend(self.block_in[b].keys().map(|&x| (x, b)));
                    }
                }
                keys.sort_unstable();
                keys.dedup();
                let new_size = |b: usize| {
                    if b == r {
                        n_r - g.size
                    } else if b == s {
                        n_s + g.size
                    } else {
                        self.sizes[b]
                    }
                };
                let mut d = 0.0;
                for (a, b) in keys {
                    let e = self.e_rs(a, b);
                    let dm = merged
                        .binary_search_by_key(&(a, b), |d| d.0)
                        .map(|i| merged[i].1)
                        .unwrap_or(0);
                    let e_new = (e as i64 + dm) as u64;
                    if e > 0 {
                        d -= ln_multiset(self.size(a) * self.size(b), e);
                    }
                    if e_new > 0 {
                        d += ln_multiset(new_size(a) * new_size(b), e_new);
                    }
                }
                d
            }
        };

        let n = self.n_entities() as u64;
        let b_old = self.n_nonempty as u64;
        let b_new = b_old - u64::from(g.size == n_r) + u64::from(n_s == 0);
        let d_partition = ln_binomial(n - 1, b_new - 1) - ln_binomial(n - 1, b_old - 1)
            - (ln_factorial(n_r - g.size) + ln_factorial(n_s + g.size)
                - ln_factorial(n_r)
                - ln_factorial(n_s));
        let d_prior = ln_multiset(b_new * b_new, n_edges) - ln_multiset(b_old * b_old, n_edges);
        d_entropy + d_partition + d_prior
    }

    /// Move `v` to block `s` (`s == n_blocks()` opens a fresh block). A block
    /// left empty stays allocated until [`Self::compact`].
    pub fn apply_move(&mut self, graph: &Multigraph, v: usize, s: usize) -> Result<(), SbmError> {
        if v >= self.n_entities() {
            return Err(SbmError::NodeOutOfRange {
                node: v,
                n: self.n_entities(),
            });
        }
        if s > self.n_blocks() {
            return Err(SbmError::BlockOutOfRange {
                block: s,
                n_blocks: self.n_blocks(),
            });
        }
        self.move_unchecked(graph, v, s);
        Ok(())
    }

    pub(crate) fn move_unchecked(&mut self, graph: &Multigraph, v: usize, s: usize) {
        let r = self.labels[v];
        if r == s {
            return;
        }
        if s == self.n_blocks() {
            self.push_empty_block();
        }
        for &(w, m) in graph.out_edges(v) {
            if w == v {
                continue;
            }
            let t = self.labels[w];
            self.add_edges(r, t, -(m as i64));
            self.add_edges(s, t, m as i64);
        }
        for &(u, m) in graph.in_edges(v) {
            if u == v {
                continue;
            }
            let t = self.labels[u];
            self.add_edges(t, r, -(m as i64));
            self.add_edges(t, s, m as i64);
        }
        let self_w = graph.self_loops(v);
        if self_w > 0 {
            self.add_edges(r, r, -(self_w as i64));
            self.add_edges(s, s, self_w as i64);
        }
        if self.sizes[s] == 0 {
            self.n_nonempty += 1;
        }
        self.sizes[r] -= 1;
        self.sizes[s] += 1;
        if self.sizes[r] == 0 {
            self.n_nonempty -= 1;
        }
        self.labels[v] = s;
    }
}

/// `ln C(N-1, B-1) + ln N! - sum_r ln n_r!`
pub(crate) fn partition_dl(n: u64, b: u64, sizes: &[u64]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ln_binomial(n - 1, b - 1) + ln_factorial(n) - sizes.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

struct Group {
    out: Vec<(usize, u64)>,
    inn: Vec<(usize, u64)>,
    self_w: u64,
    k_out: u64,
    k_in: u64,
    size: u64,
}

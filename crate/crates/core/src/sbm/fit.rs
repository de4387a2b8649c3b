use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mcmc::{mcmc_sweep, sample_near_block_eps};
use super::{BlockState, InitMode, Multigraph, Objective, SbmError};

/// Inference schedule. Defaults: halve the block count per merge step, five
/// merge candidates per block, ten greedy sweeps between merge steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub sigma: f64,
    pub n_merge: usize,
    pub n_sweeps: usize,
    /// Smoothing weight of the merge-candidate proposal; 0 keeps candidates
    /// among adjacent blocks.
    pub merge_epsilon: f64,
    /// Independent chains per `select_b` call; the lowest DL wins.
    pub chains: usize,
    /// Bounds on the bottom-level block count (`None` = number of nodes).
    pub b_min: usize,
    pub b_max: Option<usize>,
    /// Build the full hierarchy rather than a single level.
    pub nested: bool,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            n_merge: 5,
            n_sweeps: 10,
            merge_epsilon: 1.0,
            chains: 1,
            b_min: 1,
            b_max: None,
            nested: true,
            tol: 1e-6,
            max_passes: 10,
        }
    }
}

fn merge_target<R: Rng + ?Sized>(
    state: &BlockState,
    r: usize,
    cfg: &SbmConfig,
    rng: &mut R,
) -> usize {
    let b = state.n_blocks();
    for _ in 0..10 {
        let deg = state.e_out()[r] + state.e_in()[r];
        let t = if deg == 0 {
            rng.random_range(0..b)
        } else {
            let x = rng.random_range(0..deg);
            let (map, mut x) = if x < state.e_out()[r] {
                (state.row(r), x)
            } else {
                (state.col(r), x - state.e_out()[r])
            };
            let mut pick = r;
            for (&s, &e) in map {
                if x < e {
                    pick = s;
                    break;
                }
                x -= e;
            }
            pick
        };
        let s = sample_near_block_eps(state, t, cfg.merge_epsilon, rng);
        if s != r {
            return s;
        }
    }
    let x = rng.random_range(0..b - 1);
    if x >= r {
        x + 1
    } else {
        x
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// One agglomeration step: every block scores `n_merge` candidate partners,
/// then the cheapest merges are applied until `target` blocks remain.
fn merge_step<R: Rng + ?Sized>(
    state: &mut BlockState,
    graph: &Multigraph,
    target: usize,
    cfg: &SbmConfig,
    rng: &mut R,
) {
    let b = state.n_blocks();
    let mut candidates: Vec<(f64, usize, usize)> = (0..b)
        .map(|r| {
            let mut best = (f64::INFINITY, r);
            for _ in 0..cfg.n_merge.max(1) {
                let s = merge_target(state, r, cfg, rng);
                let d = state.delta_dl_merge(r, s);
                if d < best.0 {
                    best = (d, s);
                }
            }
            (best.0, r, best.1)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut parent: Vec<usize> = (0..b).collect();
    let mut count = b;
    for &(_, r, s) in &candidates {
        if count <= target {
            break;
        }
        let (a, c) = (find(&mut parent, r), find(&mut parent, s));
        if a != c {
            parent[a] = c;
            count -= 1;
        }
    }
    let labels: Vec<usize> = state.labels().iter().map(|&l| find(&mut parent, l)).collect();
    let mut merged = BlockState::from_labels_with_blocks(graph, labels, b, state.objective())
        .expect("merged labels stay in range");
    merged.compact();
    *state = merged;
}

/// Agglomerate `state` down to exactly `target` blocks.
pub(crate) fn merge_down<R: Rng + ?Sized>(
    state: &mut BlockState,
    graph: &Multigraph,
    target: usize,
    cfg: &SbmConfig,
    rng: &mut R,
) {
    while state.n_blocks() > target {
        let b = state.n_blocks();
        let next = ((b as f64 / cfg.sigma).ceil() as usize).clamp(target, b - 1);
        merge_step(state, graph, next, cfg, rng);
        for _ in 0..cfg.n_sweeps {
            mcmc_sweep(state, graph, f64::INFINITY, rng);
        }
    }
}

/// Fit exactly `b_target` blocks by agglomeration from the singleton partition.
pub fn agglomerative_fit<R: Rng + ?Sized>(
    graph: &Multigraph,
    objective: Objective,
    b_target: usize,
    cfg: &SbmConfig,
    rng: &mut R,
) -> Result<BlockState, SbmError> {
    let n = graph.n_nodes();
    if b_target < 1 || b_target > n {
        return Err(SbmError::BlockCount { b: b_target, n });
    }
    let mut state = BlockState::init(graph, n, InitMode::Singleton, objective, 0)?;
    merge_down(&mut state, graph, b_target, cfg, rng);
    Ok(state)
}

const INV_PHI_SQ: f64 = 0.381_966_011_250_105_1;

/// Fitted states keyed by block count; new counts are reached by merging
/// down from the closest larger cached state.
struct Ladder<'a> {
    graph: &'a Multigraph,
    cfg: &'a SbmConfig,
    fitted: BTreeMap<usize, (f64, BlockState)>,
}

impl Ladder<'_> {
    fn dl<R: Rng + ?Sized>(&mut self, b: usize, rng: &mut R) -> f64 {
        if let Some((dl, _)) = self.fitted.get(&b) {
            return *dl;
        }
        let (_, (_, above)) = self
            .fitted
            .range(b + 1..)
            .next()
            .expect("the upper bracket end is always fitted");
        let mut state = above.clone();
        merge_down(&mut state, self.graph, b, self.cfg, rng);
        let dl = state.single_level_dl();
        self.fitted.insert(b, (dl, state));
        dl
    }

    fn scan<R: Rng + ?Sized>(&mut self, lo: usize, hi: usize, rng: &mut R) {
        for b in (lo..=hi).rev() {
            self.dl(b, rng);
        }
    }

    fn best(self) -> BlockState {
        self.fitted
            .into_iter()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
            .map(|(_, (_, st))| st)
            .expect("at least one fitted state")
    }
}

/// Strict interior maximum among four bracket values ordered by B.
fn violates_unimodality(f: [f64; 4]) -> bool {
    (f[1] > f[0] && f[1] > f[2]) || (f[2] > f[1] && f[2] > f[3])
}

fn select_single<R: Rng + ?Sized>(
    graph: &Multigraph,
    objective: Objective,
    b_min: usize,
    b_max: usize,
    cfg: &SbmConfig,
    rng: &mut R,
) -> Result<BlockState, SbmError> {
    let top = agglomerative_fit(graph, objective, b_max, cfg, rng)?;
    let mut ladder = Ladder {
        graph,
        cfg,
        fitted: BTreeMap::from([(b_max, (top.single_level_dl(), top))]),
    };
    let (mut lo, mut hi) = (b_min, b_max);
    ladder.dl(lo, rng);
    while hi - lo > 2 {
        let step = ((hi - lo) as f64 * INV_PHI_SQ).round() as usize;
        let mut x1 = (lo + step).clamp(lo + 1, hi - 1);
        let mut x2 = (hi - step).clamp(lo + 1, hi - 1);
        if x1 >= x2 {
            x1 = lo + 1;
            x2 = lo + 2;
        }
        let f2 = ladder.dl(x2, rng);
        let f1 = ladder.dl(x1, rng);
        let f = [ladder.dl(lo, rng), f1, f2, ladder.dl(hi, rng)];
        if violates_unimodality(f) {
            log::debug!("DL(B) not unimodal on [{lo}, {hi}]; scanning");
            ladder.scan(lo, hi, rng);
            break;
        }
        if f1 <= f2 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    ladder.scan(lo, hi, rng);
    Ok(ladder.best())
}

/// Choose the block count in `[b_min, b_max]` minimising single-level DL by
/// golden-section bisection over B, running `cfg.chains` independent chains
/// and keeping the best. Ties go to the smaller B.
pub fn select_b<R: Rng + ?Sized>(
    graph: &Multigraph,
    objective: Objective,
    b_min: usize,
    b_max: usize,
    cfg: &SbmConfig,
    rng: &mut R,
) -> Result<BlockState, SbmError> {
    let n = graph.n_nodes();
    if b_min < 1 || b_min > b_max || b_max > n {
        return Err(SbmError::BlockRange { b_min, b_max, n });
    }
    let seeds: Vec<u64> = (0..cfg.chains.max(1)).map(|_| rng.random()).collect();
    let fits: Vec<BlockState> = seeds
        .par_iter()
        .map(|&seed| {
            let mut chain_rng = ChaCha8Rng::seed_from_u64(seed);
            select_single(graph, objective, b_min, b_max, cfg, &mut chain_rng)
        })
        .collect::<Result<_, _>>()?;
    Ok(fits
        .into_iter()
        .map(|st| (st.single_level_dl(), st))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.n_blocks().cmp(&b.1.n_blocks())))
        .map(|(_, st)| st)
        .expect("at least one chain"))
}

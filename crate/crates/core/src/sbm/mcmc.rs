use rand::seq::SliceRandom;
use rand::Rng;

use super::{BlockState, Multigraph};

/// Draw a block from the neighbourhood of block `t`:
/// `P(s) = (e_ts + e_st + 1) / (e_t + B)` with `e_t` the total degree of `t`.
pub(crate) fn sample_near_block<R: Rng + ?Sized>(state: &BlockState, t: usize, rng: &mut R) -> usize {
    let b = state.n_blocks() as u64;
    let e_out = state.e_out()[t];
    let total = e_out + state.e_in()[t];
    let x = rng.random_range(0..total + b);
    if x >= total {
        return (x - total) as usize;
    }
    let (map, mut x) = if x < e_out {
        (state.row(t), x)
    } else {
        (state.col(t), x - e_out)
    };
    for (&s, &e) in map {
        if x < e {
            return s;
        }
        x -= e;
    }
    unreachable!("block marginals out of sync with block matrix")
}

/// [`sample_near_block`] with a general smoothing weight:
/// `P(s) = (e_ts + e_st + eps) / (e_t + eps * B)`; uniform when `t` has no
/// edges.
pub(crate) fn sample_near_block_eps<R: Rng + ?Sized>(
    state: &BlockState,
    t: usize,
    eps: f64,
    rng: &mut R,
) -> usize {
    let b = state.n_blocks();
    let e_out = state.e_out()[t];
    let total = e_out + state.e_in()[t];
    if total == 0 || rng.random::<f64>() * (total as f64 + eps * b as f64) >= total as f64 {
        return rng.random_range(0..b);
    }
    let x = rng.random_range(0..total);
    let (map, mut x) = if x < e_out {
        (state.row(t), x)
    } else {
        (state.col(t), x - e_out)
    };
    for (&s, &e) in map {
        if x < e {
            return s;
        }
        x -= e;
    }
    unreachable!("block marginals out of sync with block matrix")
}

/// Proposal for entity `v`: the block of a random neighbour seeds
/// [`sample_near_block`]; isolated entities propose uniformly.
pub(crate) fn propose<R: Rng + ?Sized>(
    state: &BlockState,
    graph: &Multigraph,
    v: usize,
    rng: &mut R,
) -> usize {
    let k = graph.degree(v);
    if k == 0 {
        return rng.random_range(0..state.n_blocks());
    }
    let u = graph.neighbour_at(v, rng.random_range(0..k));
    sample_near_block(state, state.labels()[u], rng)
}

/// Probability that [`propose`] returns `s` for `v` in the current state.
pub(crate) fn proposal_prob(state: &BlockState, graph: &Multigraph, v: usize, s: usize) -> f64 {
    let b = state.n_blocks() as f64;
    let k = graph.degree(v);
    if k == 0 {
        return 1.0 / b;
    }
    let labels = state.labels();
    let term = |t: usize, m: u64| {
        let num = (state.e_rs(t, s) + state.e_rs(s, t)) as f64 + 1.0;
        let den = (state.e_out()[t] + state.e_in()[t]) as f64 + b;
        m as f64 * num / den
    };
    let sum: f64 = graph
        .out_edges(v)
        .iter()
        .chain(graph.in_edges(v))
        .map(|&(w, m)| term(labels[w], m))
        .sum();
    sum / k as f64
}

/// One sweep: a proposal per entity in random order, Metropolis-Hastings
/// acceptance at inverse temperature `beta` (`f64::INFINITY` = greedy, strict
/// improvement only). Moves that would empty a block are never made, so the
/// block count is preserved. Returns the number of accepted moves.
pub fn mcmc_sweep<R: Rng + ?Sized>(
    state: &mut BlockState,
    graph: &Multigraph,
    beta: f64,
    rng: &mut R,
) -> usize {
    let n = state.n_entities();
    if state.n_blocks() < 2 {
        return 0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let greedy = beta.is_infinite();
    let mut accepted = 0;
    for v in order {
        let r = state.labels()[v];
        if state.sizes()[r] <= 1 {
            continue;
        }
        let s = propose(state, graph, v, rng);
        if s == r {
            continue;
        }
        let delta = state.delta_move_unchecked(graph, v, s);
        if greedy {
            if delta < 0.0 {
                state.move_unchecked(graph, v, s);
                accepted += 1;
            }
            continue;
        }
        let forward = proposal_prob(state, graph, v, s);
        state.move_unchecked(graph, v, s);
        let backward = proposal_prob(state, graph, v, r);
        let a = (-beta * delta).exp() * backward / forward;
        if rng.random::<f64>() < a {
            accepted += 1;
        } else {
            state.move_unchecked(graph, v, r);
        }
    }
    debug_assert!(state.is_consistent_with(graph));
    accepted
}

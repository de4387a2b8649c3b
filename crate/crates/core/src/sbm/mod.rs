//! Nested degree-corrected stochastic block model.
//!
//! The objective is a description length in nats. For level `l` with
//! `N_l` entities in `B_l` blocks of sizes `n_r`:
//!
//! - level 0 (degree-corrected, directed):
//!   `S_0 = -E - sum_v [ln k_v^in! + ln k_v^out!] - sum_rs e_rs ln(e_rs / (e_r^out e_s^in))`
//! - level `l >= 1` (multigraph): `S_l = sum_rs ln multiset(n_r n_s, e_rs)`
//! - every level: `L_l = ln C(N_l - 1, B_l - 1) + ln N_l! - sum_r ln n_r!`
//!
//! The nested total is `sum_l (S_l + L_l)` with a single block at the top.
//! When one level is fitted in isolation the levels above are replaced by a
//! single block, which adds `ln multiset(B_l^2, E)`; that is the
//! "single-level" DL minimised by [`select_b`].

mod fit;
mod lgamma;
mod mcmc;
mod multigraph;
mod nested;
mod nmi;
mod state;

pub use fit::{agglomerative_fit, select_b, SbmConfig};
pub use lgamma::{ln_binomial, ln_factorial, ln_multiset};
pub use mcmc::mcmc_sweep;
pub use multigraph::Multigraph;
pub use nested::{
    description_length, fit_nested, DlBreakdown, Hierarchy, HierarchyExport, LevelExport,
    HIERARCHY_FORMAT,
};
pub use nmi::nmi;
pub use state::{BlockState, InitMode, Objective};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SbmError {
    #[error("block count {b} outside 1..={n}")]
    BlockCount { b: usize, n: usize },
    #[error("block range {b_min}..={b_max} invalid for {n} entities")]
    BlockRange { b_min: usize, b_max: usize, n: usize },
    #[error("singleton initialisation needs B = N = {n}, got {b}")]
    Singleton { b: usize, n: usize },
    #[error("node {node} out of range ({n} entities)")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("block {block} out of range ({n_blocks} blocks)")]
    BlockOutOfRange { block: usize, n_blocks: usize },
    #[error("label array has {got} entries, expected {expected}")]
    LabelLength { got: usize, expected: usize },
    #[error("level {level} out of range ({levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("inconsistent hierarchy: {0}")]
    Inconsistent(String),
    #[error("cannot fit an empty graph")]
    EmptyGraph,
}

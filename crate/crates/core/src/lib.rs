//! Community detection and growth forecasting on patent citation networks.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`] ingests patent records and citations (CSV), restricts them to
//!   an IPC field and builds a directed [`corpus::CitationGraph`], with DOT
//!   import/export.
//! - [`sbm`] fits a nested degree-corrected stochastic block model by
//!   minimising description length (agglomerative merges, MCMC sweeps and
//!   golden-section selection of the block count).
//! - [`series`] turns a community assignment into annual citation counts.
//! - [`forecast`] is a from-scratch stacked LSTM trained with BPTT and Adam.
//! - [`eval`] computes MAPE and direction accuracy reports.
//! - [`benchgen`] produces deterministic synthetic corpora for testing.

pub mod benchgen;
pub mod corpus;
pub mod eval;
pub mod forecast;
pub mod sbm;
pub mod series;

pub use corpus::{CitationGraph, PatentRecord};
pub use sbm::{BlockState, Hierarchy};
pub use series::CommunitySeries;

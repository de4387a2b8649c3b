//! Patent records, citation tables and the citation graph built from them.

mod dot;
mod graph;
mod table;

pub use dot::{read_dot, read_dot_str, write_dot, write_dot_string, DotGraph};
pub use graph::{build_graph, BuildReport, CitationGraph};
pub use table::{
    filter_by_ipc, load_citations, load_patents, save_citations, save_patents, ColumnConfig,
    PatentRecord,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: duplicate app_id `{app_id}`")]
    DuplicateId {
        path: PathBuf,
        line: u64,
        app_id: String,
    },
    #[error("dot line {line}: {message}")]
    Dot { line: usize, message: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

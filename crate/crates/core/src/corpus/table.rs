use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

use super::{CorpusError, Result};

/// One row of `patents.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatentRecord {
    /// Patent application number.
    pub app_id: String,
    pub app_year: i32,
    pub ipc_codes: Vec<String>,
}

/// Column names and parsing rules for the patent table.
#[derive(Debug, Clone)]
pub struct ColumnConfig {
    pub app_id: String,
    pub app_year: String,
    pub ipc_codes: String,
    pub ipc_delimiter: char,
    /// Years outside this range are rejected.
    pub year_range: RangeInclusive<i32>,
    /// Years outside this range only produce a warning.
    pub expected_years: RangeInclusive<i32>,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        Self {
            app_id: "app_id".into(),
            app_year: "app_year".into(),
            ipc_codes: "ipc_codes".into(),
            ipc_delimiter: ';',
            year_range: 1900..=2100,
            expected_years: 1960..=2013,
        }
    }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CorpusError::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CorpusError + '_ {
    move |source| CorpusError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Read `patents.csv`. The header must name the three configured columns;
/// extra columns are ignored.
pub fn load_patents(path: &Path, cfg: &ColumnConfig) -> Result<Vec<PatentRecord>> {
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let id_col = column(&headers, &cfg.app_id, path)?;
    let year_col = column(&headers, &cfg.app_year, path)?;
    let ipc_col = column(&headers, &cfg.ipc_codes, path)?;

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut warned = 0usize;
    for row in rdr.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let row_err = |message: String| CorpusError::Row {
            path: path.to_path_buf(),
            line,
            message,
        };

        let app_id = row.get(id_col).unwrap_or("").to_string();
        if app_id.is_empty() {
            return Err(row_err("empty app_id".into()));
        }
        let raw_year = row.get(year_col).unwrap_or("");
        let app_year: i32 = raw_year
            .parse()
            .map_err(|_| row_err(format!("unparseable app_year `{raw_year}`")))?;
        if !cfg.year_range.contains(&app_year) {
            return Err(row_err(format!(
                "app_year {app_year} outside {}..={}",
                cfg.year_range.start(),
                cfg.year_range.end()
            )));
        }
        if !cfg.expected_years.contains(&app_year) {
            warned += 1;
        }
        let ipc_codes = row
            .get(ipc_col)
            .unwrap_or("")
            .split(cfg.ipc_delimiter)
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(String::from)
            .collect();
        if !seen.insert(app_id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                line,
                app_id,
            });
        }
        out.push(PatentRecord {
            app_id,
            app_year,
            ipc_codes,
        });
    }
    if warned > 0 {
        log::warn!(
            "{}: {warned} records dated outside {}..={}",
            path.display(),
            cfg.expected_years.start(),
            cfg.expected_years.end()
        );
    }
    Ok(out)
}

/// Write records in the `app_id,app_year,ipc_codes` layout read by [`load_patents`].
pub fn save_patents(path: &Path, records: &[PatentRecord], header: &[String]) -> Result<()> {
    let mut w = writer(path, header)?;
    w.write_record(["app_id", "app_year", "ipc_codes"])
        .map_err(csv_err(path))?;
    for r in records {
        w.write_record([
            r.app_id.as_str(),
            &r.app_year.to_string(),
            &r.ipc_codes.join(";"),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read `citations.csv` (`citing_id,cited_id`).
pub fn load_citations(path: &Path) -> Result<Vec<(String, String)>> {
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let citing = column(&headers, "citing_id", path)?;
    let cited = column(&headers, "cited_id", path)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match (row.get(citing), row.get(cited)) {
            (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => {
                out.push((a.to_string(), b.to_string()))
            }
            _ => {
                return Err(CorpusError::Row {
                    path: path.to_path_buf(),
                    line,
                    message: "empty citing_id or cited_id".into(),
                })
            }
        }
    }
    Ok(out)
}

pub fn save_citations(path: &Path, citations: &[(String, String)], header: &[String]) -> Result<()> {
    let mut w = writer(path, header)?;
    w.write_record(["citing_id", "cited_id"])
        .map_err(csv_err(path))?;
    for (a, b) in citations {
        w.write_record([a, b]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Opens a CSV writer, first emitting each `header` line as a `# ` comment.
fn writer(path: &Path, header: &[String]) -> Result<csv::Writer<File>> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::create(path).map_err(io_err)?;
    for line in header {
        writeln!(file, "# {line}").map_err(io_err)?;
    }
    Ok(csv::Writer::from_writer(file))
}

/// Keep records with at least one IPC code starting with one of `prefixes`.
pub fn filter_by_ipc(records: &[PatentRecord], prefixes: &[String]) -> Vec<PatentRecord> {
    records
        .iter()
        .filter(|r| {
            r.ipc_codes
                .iter()
                .any(|code| prefixes.iter().any(|p| code.starts_with(p.as_str())))
        })
        .cloned()
        .collect()
}

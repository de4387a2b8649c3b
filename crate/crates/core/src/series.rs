//! Annual citation counts per community.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CitationGraph;

#[derive(Debug, Error)]
pub enum SeriesError {
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
    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("empty year range {start}..={end}")]
    EmptyRange { start: i32, end: i32 },
}

/// Citations received by one community, one count per year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunitySeries {
    pub community_id: usize,
    pub year_start: i32,
    pub year_end: i32,
    pub counts: Vec<u64>,
}

impl CommunitySeries {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn years_active(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn year_at(&self, index: usize) -> i32 {
        self.year_start + index as i32
    }
}

/// Inclusive year range; index 0 of every series is `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearRange {
    start: i32,
    end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self, SeriesError> {
        if end < start {
            return Err(SeriesError::EmptyRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    pub fn end(&self) -> i32 {
        self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn index(&self, year: i32) -> Option<usize> {
        (self.start..=self.end)
            .contains(&year)
            .then(|| (year - self.start) as usize)
    }
}

/// Which community a citation is credited to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribution {
    /// The cited patent's community (citations received).
    #[default]
    Incoming,
    /// The citing patent's community (citations made).
    Outgoing,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SeriesOptions {
    pub attribution: Attribution,
    /// Count only citations whose endpoints share a community.
    pub within_community: bool,
}

/// Count citations per community and year. A citation is dated by the citing
/// patent's application year; citations dated outside `range` are skipped.
///
/// Panics if `mapping` does not cover every node.
pub fn build_series(
    graph: &CitationGraph,
    mapping: &[usize],
    range: YearRange,
    opts: SeriesOptions,
) -> Vec<CommunitySeries> {
    assert_eq!(mapping.len(), graph.n_nodes(), "mapping must cover every node");
    let n_comm = mapping.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![vec![0u64; range.len()]; n_comm];
    for &(citing, cited) in graph.edges() {
        let Some(t) = range.index(graph.year_of(citing)) else {
            continue;
        };
        if opts.within_community && mapping[citing] != mapping[cited] {
            continue;
        }
        let c = match opts.attribution {
            Attribution::Incoming => mapping[cited],
            Attribution::Outgoing => mapping[citing],
        };
        counts[c][t] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(community_id, counts)| CommunitySeries {
            community_id,
            year_start: range.start,
            year_end: range.end,
            counts,
        })
        .collect()
}

/// Keep series with at least `min_total` citations over at least
/// `min_years_active` non-zero years.
pub fn filter_series(
    series: &[CommunitySeries],
    min_total: u64,
    min_years_active: usize,
) -> Vec<CommunitySeries> {
    series
        .iter()
        .filter(|s| s.total() >= min_total && s.years_active() >= min_years_active)
        .cloned()
        .collect()
}

/// Write `community_id,year,count` rows, one per community and year.
pub fn write_series_csv(
    path: &Path,
    series: &[CommunitySeries],
    header: &[String],
) -> Result<(), SeriesError> {
    let io_err = |source| SeriesError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = String::new();
    for line in header {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("community_id,year,count\n");
    for s in series {
        for (i, c) in s.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", s.community_id, s.year_at(i), c));
        }
    }
    File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(io_err)
}

/// Read a long-format series file. Years missing inside a community's span
/// count as zero; communities come back sorted by id.
pub fn read_series_csv(path: &Path) -> Result<Vec<CommunitySeries>, SeriesError> {
    let file = File::open(path).map_err(|source| SeriesError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |source| SeriesError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| SeriesError::Row {
                path: path.to_path_buf(),
                line: 1,
                message: format!("missing column `{name}`"),
            })
    };
    let (ci, yi, ni) = (col("community_id")?, col("year")?, col("count")?);
    let mut by_comm: BTreeMap<usize, BTreeMap<i32, u64>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, what: &str| {
            row.get(i).unwrap_or("").to_string().parse::<i64>().map_err(|_| SeriesError::Row {
                path: path.to_path_buf(),
                line,
                message: format!("bad {what} `{}`", row.get(i).unwrap_or("")),
            })
        };
        let (c, y, n) = (field(ci, "community_id")?, field(yi, "year")?, field(ni, "count")?);
        if c < 0 || n < 0 {
            return Err(SeriesError::Row {
                path: path.to_path_buf(),
                line,
                message: "negative community id or count".into(),
            });
        }
        *by_comm.entry(c as usize).or_default().entry(y as i32).or_default() += n as u64;
    }
    Ok(by_comm
        .into_iter()
        .map(|(community_id, years)| {
            let start = *years.keys().next().expect("non-empty");
            let end = *years.keys().next_back().expect("non-empty");
            let counts = (start..=end).map(|y| years.get(&y).copied().unwrap_or(0)).collect();
            CommunitySeries {
                community_id,
                year_start: start,
                year_end: end,
                counts,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Years: a=2000, b=2000, c=2001, d=2002, e=2002.
    /// Communities: {a, b, c} = 0, {d, e} = 1.
    fn hand_graph() -> CitationGraph {
        let ids = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        CitationGraph::from_parts(
            ids,
            vec![2000, 2000, 2001, 2002, 2002],
            vec![(1, 0), (2, 0), (3, 2), (4, 3)],
        )
        .unwrap()
    }

    #[test]
    fn hand_tabulated_counts() {
        let g = hand_graph();
        let range = YearRange::new(2000, 2002).unwrap();
        let s = build_series(&g, &[0, 0, 0, 1, 1], range, SeriesOptions::default());
        // b->a (2000, comm 0), c->a (2001, comm 0), d->c (2002, comm 0), e->d (2002, comm 1)
        assert_eq!(s[0].counts, vec![1, 1, 1]);
        assert_eq!(s[1].counts, vec![0, 0, 1]);

        let out = build_series(
            &g,
            &[0, 0, 0, 1, 1],
            range,
            SeriesOptions {
                attribution: Attribution::Outgoing,
                within_community: false,
            },
        );
        assert_eq!(out[0].counts, vec![1, 1, 0]);
        assert_eq!(out[1].counts, vec![0, 0, 2]);

        let within = build_series(
            &g,
            &[0, 0, 0, 1, 1],
            range,
            SeriesOptions {
                attribution: Attribution::Incoming,
                within_community: true,
            },
        );
        assert_eq!(within[0].counts, vec![1, 1, 0]);
        assert_eq!(within[1].counts, vec![0, 0, 1]);
    }

    #[test]
    fn uncited_community_is_all_zero() {
        let g = hand_graph();
        let s = build_series(
            &g,
            &[0, 1, 1, 1, 2],
            YearRange::new(2000, 2002).unwrap(),
            SeriesOptions::default(),
        );
        assert_eq!(s[2].counts, vec![0, 0, 0]);
    }

    #[test]
    fn out_of_range_citations_skipped() {
        let g = hand_graph();
        let s = build_series(
            &g,
            &[0; 5],
            YearRange::new(1960, 2000).unwrap(),
            SeriesOptions::default(),
        );
        assert_eq!(s[0].counts.len(), 41);
        assert_eq!(s[0].counts[40], 1);
        assert_eq!(s[0].total(), 1);
    }

    #[test]
    fn filters() {
        let mk = |id, counts: Vec<u64>| CommunitySeries {
            community_id: id,
            year_start: 0,
            year_end: counts.len() as i32 - 1,
            counts,
        };
        let all = vec![mk(0, vec![0, 0, 0]), mk(1, vec![5, 0, 5]), mk(2, vec![1, 1, 1])];
        assert_eq!(filter_series(&all, 0, 0), all);
        let kept = filter_series(&all, 1, 0);
        assert_eq!(kept.iter().map(|s| s.community_id).collect::<Vec<_>>(), [1, 2]);
        let kept = filter_series(&all, 3, 3);
        assert_eq!(kept.iter().map(|s| s.community_id).collect::<Vec<_>>(), [2]);
    }

    #[test]
    fn empty_range_rejected() {
        assert!(YearRange::new(2001, 2000).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("series.csv");
        let s = build_series(
            &hand_graph(),
            &[0, 0, 0, 1, 1],
            YearRange::new(2000, 2002).unwrap(),
            SeriesOptions::default(),
        );
        write_series_csv(&p, &s, &["seed = 3".into()]).unwrap();
        assert_eq!(read_series_csv(&p).unwrap(), s);
    }
}

//! The DOT dialect used for citation graphs:
//!
//! ```text
//! // optional comment lines
//! digraph G {
//!   "JP2003-340042" [year=2003, comm=4];
//!   "JP2005-000001" -> "JP2003-340042";
//! }
//! ```
//!
//! Every node is declared (with a `year` attribute) before any edge mentions it.

use std::fmt::Write as _;
use std::path::Path;

use super::{CitationGraph, CorpusError, Result};

/// A parsed DOT file: the graph plus the optional `comm` node attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotGraph {
    pub graph: CitationGraph,
    pub communities: Option<Vec<usize>>,
}

fn quote(id: &str) -> String {
    let mut s = String::with_capacity(id.len() + 2);
    s.push('"');
    for ch in id.chars() {
        if ch == '"' || ch == '\\' {
            s.push('\\');
        }
        s.push(ch);
    }
    s.push('"');
    s
}

pub fn write_dot_string(
    graph: &CitationGraph,
    communities: Option<&[usize]>,
    header: &[String],
) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "// {line}");
    }
    out.push_str("digraph G {\n");
    for v in 0..graph.n_nodes() {
        let _ = write!(out, "  {} [year={}", quote(graph.id_of(v)), graph.year_of(v));
        if let Some(c) = communities {
            let _ = write!(out, ", comm={}", c[v]);
        }
        out.push_str("];\n");
    }
    for &(a, b) in graph.edges() {
        let _ = writeln!(out, "  {} -> {};", quote(graph.id_of(a)), quote(graph.id_of(b)));
    }
    out.push_str("}\n");
    out
}

pub fn write_dot(
    path: &Path,
    graph: &CitationGraph,
    communities: Option<&[usize]>,
    header: &[String],
) -> Result<()> {
    std::fs::write(path, write_dot_string(graph, communities, header)).map_err(|source| {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    })
}

pub fn read_dot(path: &Path) -> Result<DotGraph> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_dot_str(&text)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    Open,
    Close,
    Eq,
    Comma,
    Semi,
    LBrace,
    RBrace,
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Tok>> {
    let err = |message: String| CorpusError::Dot {
        line: lineno,
        message,
    };
    let mut toks = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&ch) = chars.peek() {
        match ch {
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' => {
                chars.next();
                if chars.next() == Some('/') {
                    break;
                }
                return Err(err("stray `/`".into()));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\\') => match chars.next() {
                            Some(c) => s.push(c),
                            None => return Err(err("unterminated escape".into())),
                        },
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err(err("unterminated string".into())),
                    }
                }
                toks.push(Tok::Id(s));
            }
            '-' => {
                chars.next();
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        toks.push(Tok::Arrow);
                    }
                    Some('-') => return Err(err("undirected edge `--` in a digraph".into())),
                    _ => {
                        let mut s = String::from("-");
                        while let Some(&c) = chars.peek() {
                            if c.is_ascii_alphanumeric() || c == '.' {
                                s.push(c);
                                chars.next();
                            } else {
                                break;
                            }
                        }
                        toks.push(Tok::Id(s));
                    }
                }
            }
            '[' | ']' | '=' | ',' | ';' | '{' | '}' => {
                chars.next();
                toks.push(match ch {
                    '[' => Tok::Open,
                    ']' => Tok::Close,
                    '=' => Tok::Eq,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '{' => Tok::LBrace,
                    _ => Tok::RBrace,
                });
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Id(s));
            }
            c => return Err(err(format!("unexpected character `{c}`"))),
        }
    }
    Ok(toks)
}

/// Parse the emitted dialect. Errors carry the 1-based line number.
pub fn read_dot_str(text: &str) -> Result<DotGraph> {
    #[derive(PartialEq)]
    enum Phase {
        Header,
        Body,
        Done,
    }
    let mut phase = Phase::Header;
    let mut ids: Vec<String> = Vec::new();
    let mut years: Vec<i32> = Vec::new();
    let mut comms: Vec<Option<usize>> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let err = |message: String| CorpusError::Dot {
            line: lineno,
            message,
        };
        let trimmed = raw.trim_start();
        if trimmed.starts_with('#') {
            continue;
        }
        let toks = lex(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        match phase {
            Phase::Header => match toks.as_slice() {
                [Tok::Id(kw), rest @ ..] if kw == "digraph" => {
                    let rest = match rest {
                        [Tok::Id(_), rest @ ..] => rest,
                        r => r,
                    };
                    match rest {
                        [Tok::LBrace] => phase = Phase::Body,
                        [Tok::LBrace, Tok::RBrace] => phase = Phase::Done,
                        _ => return Err(err("expected `{` after digraph".into())),
                    }
                }
                [Tok::Id(kw), ..] if kw == "graph" || kw == "strict" => {
                    return Err(err(format!("`{kw}` graphs are not supported; expected digraph")))
                }
                _ => return Err(err("expected `digraph`".into())),
            },
            Phase::Body => match toks.as_slice() {
                [Tok::RBrace] => phase = Phase::Done,
                [Tok::Id(a), Tok::Arrow, Tok::Id(b), Tok::Semi] => {
                    let look = |id: &String| {
                        index
                            .get(id)
                            .copied()
                            .ok_or_else(|| err(format!("edge references undeclared node `{id}`")))
                    };
                    edges.push((look(a)?, look(b)?));
                }
                [Tok::Id(id), Tok::Open, attrs @ .., Tok::Close, Tok::Semi] => {
                    let mut year = None;
                    let mut comm = None;
                    for chunk in attrs.split(|t| *t == Tok::Comma) {
                        match chunk {
                            [Tok::Id(k), Tok::Eq, Tok::Id(v)] => match k.as_str() {
                                "year" => {
                                    year = Some(v.parse::<i32>().map_err(|_| {
                                        err(format!("bad year `{v}`"))
                                    })?)
                                }
                                "comm" => {
                                    comm = Some(v.parse::<usize>().map_err(|_| {
                                        err(format!("bad comm `{v}`"))
                                    })?)
                                }
                                _ => {}
                            },
                            _ => return Err(err("malformed attribute list".into())),
                        }
                    }
                    let year = year.ok_or_else(|| err(format!("node `{id}` lacks a year")))?;
                    if index.insert(id.clone(), ids.len()).is_some() {
                        return Err(err(format!("node `{id}` declared twice")));
                    }
                    ids.push(id.clone());
                    years.push(year);
                    comms.push(comm);
                }
                _ => return Err(err("malformed statement".into())),
            },
            Phase::Done => return Err(err("content after closing `}`".into())),
        }
    }
    if phase != Phase::Done {
        let line = text.lines().count();
        return Err(CorpusError::Dot {
            line,
            message: "unexpected end of file".into(),
        });
    }

    let communities = if !comms.is_empty() && comms.iter().all(Option::is_some) {
        Some(comms.into_iter().map(Option::unwrap).collect())
    } else if comms.iter().any(Option::is_some) {
        return Err(CorpusError::Dot {
            line: 0,
            message: "`comm` attribute present on some nodes only".into(),
        });
    } else {
        None
    };
    let graph = CitationGraph::from_parts(ids, years, edges)?;
    Ok(DotGraph { graph, communities })
}

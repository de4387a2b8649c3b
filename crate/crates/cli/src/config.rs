//! Flat `key = value` configuration with `[section]` headers.
//!
//! Every key is addressed as `section.key` and can be overridden on the
//! command line with `--section.key value` or `--section.key=value`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use citesbm::benchgen::Shape;
use citesbm::series::Attribution;

#[derive(Debug)]
pub struct ConfigError {
    pub location: Option<(PathBuf, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some((path, line)) => write!(f, "{}:{line}: {}", path.display(), self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        location: None,
        message: message.into(),
    }
}

/// Every recognised key with its default, in echo order.
const DEFAULTS: &[(&str, &str)] = &[
    ("run.seed", "0"),
    ("run.out_dir", "out"),
    ("corpus.patents", "patents.csv"),
    ("corpus.citations", "citations.csv"),
    ("corpus.ipc_prefixes", ""),
    ("corpus.ipc_delimiter", ";"),
    ("corpus.id_column", "app_id"),
    ("corpus.year_column", "app_year"),
    ("corpus.ipc_column", "ipc_codes"),
    ("corpus.year_min", "1900"),
    ("corpus.year_max", "2100"),
    ("corpus.warn_year_min", "1960"),
    ("corpus.warn_year_max", "2013"),
    ("corpus.keep_dangling_as_stubs", "false"),
    ("sbm.b_min", "1"),
    ("sbm.b_max", ""),
    ("sbm.chains", "1"),
    ("sbm.nested", "true"),
    ("sbm.sigma", "2"),
    ("sbm.n_merge", "5"),
    ("sbm.n_sweeps", "10"),
    ("sbm.merge_epsilon", "1"),
    ("sbm.tol", "0.000001"),
    ("sbm.max_passes", "10"),
    ("series.level", "0"),
    ("series.attribution", "incoming"),
    ("series.within_community", "false"),
    ("series.min_total", "30"),
    ("series.min_years_active", "5"),
    ("series.year_start", ""),
    ("series.year_end", ""),
    ("model.hidden_size", "32"),
    ("model.window", "5"),
    ("model.n_layers", "4"),
    ("train.epochs", "500"),
    ("train.learning_rate", "0.001"),
    ("train.clip_norm", "5"),
    ("train.train_fraction", "0.8"),
    ("eval.recursive", "false"),
    ("synth.kind", "corpus"),
    ("synth.n_communities", "20"),
    ("synth.shapes", "growth,decline"),
    ("synth.positions", ""),
    ("synth.amplitude", "300"),
    ("synth.noise", "0.01"),
    ("synth.lambda", "0.9"),
    ("synth.cites_per_patent", "10"),
    ("synth.seed_patents", "5"),
    ("synth.ipc_code", "G06Q"),
    ("synth.year_start", "1970"),
    ("synth.year_end", "2013"),
    ("synth.n_nodes", "400"),
    ("synth.n_blocks", "4"),
    ("synth.mean_degree", "10"),
    ("synth.skew", "0"),
];

/// Keys that only affect where or how fast things run, never what is
/// computed; they are left out of the echo so artifacts stay comparable.
const NOT_ECHOED: &[&str] = &["run.out_dir"];

/// Raw configuration: defaults overlaid by a file and then by overrides.
#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|&(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

fn is_known(key: &str) -> bool {
    DEFAULTS.iter().any(|&(k, _)| k == key)
}

impl Config {
    /// Parse the file format: `[section]` headers, `key = value` lines,
    /// `#` or `;` comments.
    pub fn parse_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            location: Some((path.to_path_buf(), 0)),
            message: format!("cannot read config: {e}"),
        })?;
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let at = |message: String| ConfigError {
                location: Some((path.to_path_buf(), i + 1)),
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("unterminated section header `{line}`")))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            if section.is_empty() {
                return Err(at(format!("key `{}` outside any [section]", key.trim())));
            }
            let full = format!("{section}.{}", key.trim());
            self.set(&full, value.trim()).map_err(|e| at(e.message))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !is_known(key) {
            return Err(err(format!("unknown config key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|e| err(format!("`{key}`: cannot parse `{raw}`: {e}")))
    }

    fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        if self.raw(key).is_empty() {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    }

    /// `section.key = value` for every echoed key, sorted.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !NOT_ECHOED.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    pub fn echo_lines(&self) -> Vec<String> {
        self.echo().iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }

    pub fn resolve(&self) -> Result<Settings, ConfigError> {
        let s = Settings {
            seed: self.get("run.seed")?,
            out_dir: PathBuf::from(self.raw("run.out_dir")),
            corpus: CorpusSettings {
                patents: PathBuf::from(self.raw("corpus.patents")),
                citations: PathBuf::from(self.raw("corpus.citations")),
                ipc_prefixes: self.list("corpus.ipc_prefixes"),
                ipc_delimiter: self.get("corpus.ipc_delimiter")?,
                id_column: self.raw("corpus.id_column").to_string(),
                year_column: self.raw("corpus.year_column").to_string(),
                ipc_column: self.raw("corpus.ipc_column").to_string(),
                year_range: (self.get("corpus.year_min")?, self.get("corpus.year_max")?),
                warn_years: (self.get("corpus.warn_year_min")?, self.get("corpus.warn_year_max")?),
                keep_dangling_as_stubs: self.get("corpus.keep_dangling_as_stubs")?,
            },
            sbm: citesbm::sbm::SbmConfig {
                sigma: self.get("sbm.sigma")?,
                n_merge: self.get("sbm.n_merge")?,
                n_sweeps: self.get("sbm.n_sweeps")?,
                merge_epsilon: self.get("sbm.merge_epsilon")?,
                chains: self.get("sbm.chains")?,
                b_min: self.get("sbm.b_min")?,
                b_max: self.get_opt("sbm.b_max")?,
                nested: self.get("sbm.nested")?,
                tol: self.get("sbm.tol")?,
                max_passes: self.get("sbm.max_passes")?,
            },
            series: SeriesSettings {
                level: self.get("series.level")?,
                attribution: match self.raw("series.attribution") {
                    "incoming" => Attribution::Incoming,
                    "outgoing" => Attribution::Outgoing,
                    other => {
                        return Err(err(format!(
                            "`series.attribution`: expected incoming or outgoing, got `{other}`"
                        )))
                    }
                },
                within_community: self.get("series.within_community")?,
                min_total: self.get("series.min_total")?,
                min_years_active: self.get("series.min_years_active")?,
                year_start: self.get_opt("series.year_start")?,
                year_end: self.get_opt("series.year_end")?,
            },
            model: citesbm::forecast::ModelConfig {
                hidden_size: self.get("model.hidden_size")?,
                window: self.get("model.window")?,
                n_layers: self.get("model.n_layers")?,
            },
            train: citesbm::forecast::TrainConfig {
                epochs: self.get("train.epochs")?,
                learning_rate: self.get("train.learning_rate")?,
                clip_norm: self.get("train.clip_norm")?,
                train_fraction: self.get("train.train_fraction")?,
                seed: self.get("run.seed")?,
            },
            recursive: self.get("eval.recursive")?,
            synth: self.synth()?,
        };
        s.validate()?;
        Ok(s)
    }

    fn synth(&self) -> Result<SynthSettings, ConfigError> {
        let seed: u64 = self.get("run.seed")?;
        let year_start = self.get("synth.year_start")?;
        let year_end = self.get("synth.year_end")?;
        match self.raw("synth.kind") {
            "corpus" => {
                let shapes = self
                    .list("synth.shapes")
                    .iter()
                    .map(|s| s.parse::<Shape>().map_err(|e| err(format!("`synth.shapes`: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let positions = self
                    .list("synth.positions")
                    .iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|e| err(format!("`synth.positions`: cannot parse `{s}`: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SynthSettings::Corpus(citesbm::benchgen::CorpusSpec {
                    n_communities: self.get("synth.n_communities")?,
                    shapes,
                    year_start,
                    year_end,
                    amplitude: self.get("synth.amplitude")?,
                    noise: self.get("synth.noise")?,
                    lambda: self.get("synth.lambda")?,
                    cites_per_patent: self.get("synth.cites_per_patent")?,
                    seed_patents: self.get("synth.seed_patents")?,
                    position: (!positions.is_empty()).then_some(positions),
                    ipc_code: self.raw("synth.ipc_code").to_string(),
                    seed,
                }))
            }
            "planted" => Ok(SynthSettings::Planted(citesbm::benchgen::PlantedSpec {
                n_nodes: self.get("synth.n_nodes")?,
                n_blocks: self.get("synth.n_blocks")?,
                mean_degree: self.get("synth.mean_degree")?,
                lambda: self.get("synth.lambda")?,
                skew: self.get("synth.skew")?,
                year_start,
                year_end,
                seed,
            })),
            other => Err(err(format!(
                "`synth.kind`: expected corpus or planted, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusSettings {
    pub patents: PathBuf,
    pub citations: PathBuf,
    pub ipc_prefixes: Vec<String>,
    pub ipc_delimiter: char,
    pub id_column: String,
    pub year_column: String,
    pub ipc_column: String,
    pub year_range: (i32, i32),
    pub warn_years: (i32, i32),
    pub keep_dangling_as_stubs: bool,
}

#[derive(Debug, Clone)]
pub struct SeriesSettings {
    pub level: usize,
    pub attribution: Attribution,
    pub within_community: bool,
    pub min_total: u64,
    pub min_years_active: usize,
    pub year_start: Option<i32>,
    pub year_end: Option<i32>,
}

#[derive(Debug, Clone)]
pub enum SynthSettings {
    Corpus(citesbm::benchgen::CorpusSpec),
    Planted(citesbm::benchgen::PlantedSpec),
}

/// Typed view of a [`Config`].
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub corpus: CorpusSettings,
    pub sbm: citesbm::sbm::SbmConfig,
    pub series: SeriesSettings,
    pub model: citesbm::forecast::ModelConfig,
    pub train: citesbm::forecast::TrainConfig,
    pub recursive: bool,
    pub synth: SynthSettings,
}

impl Settings {
    fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.corpus;
        if c.year_range.0 > c.year_range.1 {
            return Err(err("`corpus.year_min` exceeds `corpus.year_max`"));
        }
        let s = &self.sbm;
        if s.sigma <= 1.0 || s.n_merge == 0 || s.chains == 0 || s.b_min == 0 {
            return Err(err(
                "`sbm.sigma` must exceed 1; `sbm.n_merge`, `sbm.chains` and `sbm.b_min` must be positive",
            ));
        }
        if s.b_max.is_some_and(|b| b < s.b_min) {
            return Err(err("`sbm.b_max` is below `sbm.b_min`"));
        }
        if s.merge_epsilon < 0.0 || s.tol < 0.0 {
            return Err(err("`sbm.merge_epsilon` and `sbm.tol` must be non-negative"));
        }
        if self.model.hidden_size == 0 || self.model.window == 0 || self.model.n_layers == 0 {
            return Err(err("`model.hidden_size`, `model.window` and `model.n_layers` must be positive"));
        }
        let t = &self.train;
        if !(t.train_fraction > 0.0 && t.train_fraction < 1.0) {
            return Err(err("`train.train_fraction` must lie strictly between 0 and 1"));
        }
        if !(t.learning_rate > 0.0) {
            return Err(err("`train.learning_rate` must be positive"));
        }
        if let (Some(a), Some(b)) = (self.series.year_start, self.series.year_end) {
            if b < a {
                return Err(err("`series.year_end` is before `series.year_start`"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let s = Config::default().resolve().unwrap();
        assert_eq!(s.model.n_layers, 4);
        assert_eq!(s.sbm.b_max, None);
        assert!(s.corpus.ipc_prefixes.is_empty());
    }

    #[test]
    fn file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ini");
        std::fs::write(&p, "# comment\n[sbm]\nb_max = 12\n\n[train]\nepochs=7\n").unwrap();
        let mut c = Config::default();
        c.parse_file(&p).unwrap();
        c.set("train.epochs", "9").unwrap();
        let s = c.resolve().unwrap();
        assert_eq!(s.sbm.b_max, Some(12));
        assert_eq!(s.train.epochs, 9);
    }

    #[test]
    fn errors_carry_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ini");
        std::fs::write(&p, "[sbm]\nb_max = 3\nbogus = 1\n").unwrap();
        let e = Config::default().parse_file(&p).unwrap_err();
        assert_eq!(e.location.as_ref().unwrap().1, 3);
        assert!(e.to_string().contains("bogus"));

        std::fs::write(&p, "b_max = 3\n").unwrap();
        assert!(Config::default().parse_file(&p).is_err());
    }

    #[test]
    fn bad_values_rejected() {
        let mut c = Config::default();
        c.set("train.train_fraction", "1.5").unwrap();
        assert!(c.resolve().is_err());
        let mut c = Config::default();
        c.set("series.attribution", "sideways").unwrap();
        assert!(c.resolve().is_err());
        assert!(Config::default().set("nope.key", "1").is_err());
    }

    #[test]
    fn echo_skips_output_dir() {
        let mut c = Config::default();
        c.set("run.out_dir", "/tmp/a").unwrap();
        let e = c.echo();
        assert!(!e.contains_key("run.out_dir"));
        assert_eq!(e["model.window"], "5");
    }
}

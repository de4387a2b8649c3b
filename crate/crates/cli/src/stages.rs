use std::collections::BTreeMap;
use std::fmt::{self, Display, Write as _};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use citesbm::benchgen;
use citesbm::corpus::{self, BuildReport, CitationGraph, ColumnConfig, PatentRecord};
use citesbm::eval::{CommunityMetrics, MetricReport};
use citesbm::forecast::{self, Checkpoint, Segment};
use citesbm::sbm::{self, Hierarchy, HierarchyExport};
use citesbm::series::{self, CommunitySeries, SeriesOptions, YearRange};

use crate::config::{Config, Settings, SynthSettings};

/// A failed run: usage errors exit with 1, data errors with 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data { stage: &'static str, message: String },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data { .. } => 2,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data { stage, message } => write!(f, "{stage}: {message}"),
        }
    }
}

fn data(stage: &'static str) -> impl Fn(&dyn Display) -> Failure {
    move |e| Failure::Data {
        stage,
        message: e.to_string(),
    }
}

/// Artifact paths inside the output directory.
pub struct Layout {
    pub out: PathBuf,
}

impl Layout {
    pub fn graph_dot(&self) -> PathBuf {
        self.out.join("graph.dot")
    }
    pub fn ingest_json(&self) -> PathBuf {
        self.out.join("ingest.json")
    }
    pub fn hierarchy_json(&self) -> PathBuf {
        self.out.join("hierarchy.json")
    }
    pub fn clustered_dot(&self) -> PathBuf {
        self.out.join("clustered.dot")
    }
    pub fn series_csv(&self) -> PathBuf {
        self.out.join("series.csv")
    }
    pub fn checkpoints(&self) -> PathBuf {
        self.out.join("checkpoints")
    }
    pub fn checkpoint(&self, community: usize) -> PathBuf {
        self.checkpoints().join(format!("community_{community}.json"))
    }
    pub fn report_json(&self) -> PathBuf {
        self.out.join("report.json")
    }
    pub fn report_csv(&self) -> PathBuf {
        self.out.join("report.csv")
    }
    pub fn predictions_csv(&self) -> PathBuf {
        self.out.join("predictions.csv")
    }
}

/// Shared state of one invocation.
pub struct Run {
    pub config: Config,
    pub settings: Settings,
    pub layout: Layout,
}

impl Run {
    pub fn new(config: Config) -> Result<Self, Failure> {
        let settings = config.resolve().map_err(|e| Failure::Usage(e.to_string()))?;
        let layout = Layout {
            out: settings.out_dir.clone(),
        };
        Ok(Self {
            config,
            settings,
            layout,
        })
    }

    fn header(&self, stage: &str) -> Vec<String> {
        std::iter::once(format!("stage = {stage}"))
            .chain(self.config.echo_lines())
            .collect()
    }

    fn meta(&self, stage: &str) -> BTreeMap<String, String> {
        let mut m = self.config.echo();
        m.insert("stage".into(), stage.into());
        m
    }

    fn ensure_out(&self, stage: &'static str) -> Result<(), Failure> {
        std::fs::create_dir_all(&self.layout.out).map_err(|e| Failure::Data {
            stage,
            message: format!("cannot create {}: {e}", self.layout.out.display()),
        })
    }

    fn require(&self, stage: &'static str, path: &Path, producer: &str) -> Result<(), Failure> {
        if path.exists() {
            Ok(())
        } else {
            Err(Failure::Data {
                stage,
                message: format!("missing {}; run `{producer}` first", path.display()),
            })
        }
    }

    fn read_graph(&self, stage: &'static str) -> Result<CitationGraph, Failure> {
        let path = self.layout.graph_dot();
        self.require(stage, &path, "ingest")?;
        corpus::read_dot(&path)
            .map(|d| d.graph)
            .map_err(|e| data(stage)(&format!("{}: {e}", path.display())))
    }

    fn read_series(&self, stage: &'static str) -> Result<Vec<CommunitySeries>, Failure> {
        let path = self.layout.series_csv();
        self.require(stage, &path, "series")?;
        series::read_series_csv(&path).map_err(|e| data(stage)(&e))
    }
}

fn write_json<T: Serialize>(stage: &'static str, path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| data(stage)(&e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| data(stage)(&format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct IngestSummary {
    format: &'static str,
    records_loaded: usize,
    records_kept: usize,
    citations_loaded: usize,
    n_nodes: usize,
    n_edges: usize,
    year_span: Option<(i32, i32)>,
    build: BuildReport,
    config: BTreeMap<String, String>,
}

/// Patents and citations CSV to `graph.dot` and `ingest.json`.
pub fn ingest(run: &Run) -> Result<(), Failure> {
    const STAGE: &str = "ingest";
    let c = &run.settings.corpus;
    if c.keep_dangling_as_stubs {
        return Err(Failure::Usage(
            "`corpus.keep_dangling_as_stubs` is reserved and not implemented".into(),
        ));
    }
    let columns = ColumnConfig {
        app_id: c.id_column.clone(),
        app_year: c.year_column.clone(),
        ipc_codes: c.ipc_column.clone(),
        ipc_delimiter: c.ipc_delimiter,
        year_range: c.year_range.0..=c.year_range.1,
        expected_years: c.warn_years.0..=c.warn_years.1,
    };
    let records = corpus::load_patents(&c.patents, &columns).map_err(|e| data(STAGE)(&e))?;
    let kept = if c.ipc_prefixes.is_empty() {
        records.clone()
    } else {
        corpus::filter_by_ipc(&records, &c.ipc_prefixes)
    };
    let citations = corpus::load_citations(&c.citations).map_err(|e| data(STAGE)(&e))?;
    let (graph, report) = corpus::build_graph(&kept, &citations).map_err(|e| data(STAGE)(&e))?;

    run.ensure_out(STAGE)?;
    corpus::write_dot(&run.layout.graph_dot(), &graph, None, &run.header(STAGE))
        .map_err(|e| data(STAGE)(&e))?;
    let summary = IngestSummary {
        format: "citesbm-ingest",
        records_loaded: records.len(),
        records_kept: kept.len(),
        citations_loaded: citations.len(),
        n_nodes: graph.n_nodes(),
        n_edges: graph.n_edges(),
        year_span: graph.year_span(),
        build: report,
        config: run.meta(STAGE),
    };
    write_json(STAGE, &run.layout.ingest_json(), &summary)?;
    log::info!("ingest: {} nodes, {} edges", graph.n_nodes(), graph.n_edges());
    Ok(())
}

/// `graph.dot` to `hierarchy.json` and `clustered.dot`.
pub fn cluster(run: &Run) -> Result<(), Failure> {
    const STAGE: &str = "cluster";
    let graph = run.read_graph(STAGE)?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.settings.seed);
    let h = sbm::fit_nested(&graph, &run.settings.sbm, &mut rng).map_err(|e| data(STAGE)(&e))?;
    let level = run.settings.series.level;
    let comm = h.project_level(level).map_err(|e| data(STAGE)(&e))?;

    let mut meta = run.meta(STAGE);
    meta.insert("degree_corrected_level0".into(), "true".into());
    write_json(STAGE, &run.layout.hierarchy_json(), &h.to_export(meta))?;
    corpus::write_dot(&run.layout.clustered_dot(), &graph, Some(&comm), &run.header(STAGE))
        .map_err(|e| data(STAGE)(&e))?;
    log::info!(
        "cluster: blocks per level {:?}, DL {:.3}",
        h.blocks_per_level(),
        h.dl().total
    );
    Ok(())
}

/// `graph.dot` plus `hierarchy.json` to `series.csv`.
pub fn build_series(run: &Run) -> Result<(), Failure> {
    const STAGE: &str = "series";
    let graph = run.read_graph(STAGE)?;
    let path = run.layout.hierarchy_json();
    run.require(STAGE, &path, "cluster")?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| data(STAGE)(&format!("{}: {e}", path.display())))?;
    let export: HierarchyExport = serde_json::from_str(&text)
        .map_err(|e| data(STAGE)(&format!("{}: {e}", path.display())))?;
    let h = Hierarchy::from_export(&graph, &export).map_err(|e| data(STAGE)(&e))?;

    let s = &run.settings.series;
    let mapping = h.project_level(s.level).map_err(|e| data(STAGE)(&e))?;
    let span = graph.year_span();
    let (start, end) = match (s.year_start.or(span.map(|x| x.0)), s.year_end.or(span.map(|x| x.1))) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(data(STAGE)(&"graph has no nodes and no year range is configured")),
    };
    let range = YearRange::new(start, end).map_err(|e| data(STAGE)(&e))?;
    let opts = SeriesOptions {
        attribution: s.attribution,
        within_community: s.within_community,
    };
    let all = series::build_series(&graph, &mapping, range, opts);
    let kept = series::filter_series(&all, s.min_total, s.min_years_active);
    log::info!("series: kept {} of {} communities", kept.len(), all.len());
    series::write_series_csv(&run.layout.series_csv(), &kept, &run.header(STAGE))
        .map_err(|e| data(STAGE)(&e))
}

/// `series.csv` to one checkpoint per community.
pub fn train(run: &Run) -> Result<(), Failure> {
    const STAGE: &str = "train";
    let all = run.read_series(STAGE)?;
    if all.is_empty() {
        return Err(data(STAGE)(&format!(
            "{} holds no series (all filtered out?)",
            run.layout.series_csv().display()
        )));
    }
    let dir = run.layout.checkpoints();
    if dir.exists() {
        for entry in std::fs::read_dir(&dir).map_err(|e| data(STAGE)(&e))? {
            let p = entry.map_err(|e| data(STAGE)(&e))?.path();
            if is_checkpoint(&p) {
                std::fs::remove_file(&p).map_err(|e| data(STAGE)(&e))?;
            }
        }
    }
    std::fs::create_dir_all(&dir)
        .map_err(|e| data(STAGE)(&format!("{}: {e}", dir.display())))?;

    let s = &run.settings;
    let fits: Vec<Result<Checkpoint, Failure>> = all
        .par_iter()
        .map(|cs| {
            let counts: Vec<f64> = cs.counts.iter().map(|&x| x as f64).collect();
            let mut cfg = s.train.clone();
            cfg.seed = s.seed.wrapping_add(cs.community_id as u64);
            let fit = forecast::fit_series(&counts, &s.model, &cfg)
                .map_err(|e| data(STAGE)(&format!("community {}: {e}", cs.community_id)))?;
            let mut ck = Checkpoint::new(cs.community_id, fit, cfg);
            ck.meta = run.meta(STAGE);
            Ok(ck)
        })
        .collect();
    for ck in fits {
        let ck = ck?;
        ck.save(&run.layout.checkpoint(ck.community_id))
            .map_err(|e| data(STAGE)(&e))?;
        log::info!(
            "train: community {} final loss {:.3e}",
            ck.community_id,
            ck.loss_curve.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn is_checkpoint(p: &Path) -> bool {
    p.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with("community_") && n.ends_with(".json"))
}

/// Checkpoints plus `series.csv` to `report.json`, `report.csv` and
/// `predictions.csv`.
pub fn evaluate(run: &Run) -> Result<(), Failure> {
    const STAGE: &str = "evaluate";
    let dir = run.layout.checkpoints();
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(&dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| is_checkpoint(p))
            .collect(),
        Err(_) => Vec::new(),
    };
    if paths.is_empty() {
        return Err(data(STAGE)(&format!(
            "no checkpoints in {}; run `train` first",
            dir.display()
        )));
    }
    paths.sort();
    let all = run.read_series(STAGE)?;
    let by_id: BTreeMap<usize, &CommunitySeries> = all.iter().map(|s| (s.community_id, s)).collect();

    let mut metrics = Vec::new();
    let mut rows: BTreeMap<usize, String> = BTreeMap::new();
    for p in &paths {
        let ck = Checkpoint::load(p).map_err(|e| data(STAGE)(&e))?;
        let cs = by_id.get(&ck.community_id).ok_or_else(|| {
            data(STAGE)(&format!(
                "{}: community {} is not in series.csv",
                p.display(),
                ck.community_id
            ))
        })?;
        let counts: Vec<f64> = cs.counts.iter().map(|&x| x as f64).collect();
        let points = forecast::predict_series(&ck.model, &counts, ck.split_index, run.settings.recursive)
            .map_err(|e| data(STAGE)(&format!("{}: {e}", p.display())))?;
        metrics.push(
            CommunityMetrics::from_predictions(ck.community_id, &counts, &points)
                .map_err(|e| data(STAGE)(&e))?,
        );
        rows.insert(ck.community_id, prediction_rows(cs, &points));
    }

    let mut config = run.meta(STAGE);
    config.insert("degree_corrected_level0".into(), "true".into());
    let report = MetricReport::new(metrics, config);
    report
        .write_json(&run.layout.report_json())
        .map_err(|e| data(STAGE)(&e))?;
    report
        .write_csv(&run.layout.report_csv())
        .map_err(|e| data(STAGE)(&e))?;

    let mut out = String::new();
    for line in run.header(STAGE) {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("community_id,year,truth,train_pred,test_pred\n");
    for r in rows.values() {
        out.push_str(r);
    }
    let path = run.layout.predictions_csv();
    std::fs::write(&path, out).map_err(|e| data(STAGE)(&format!("{}: {e}", path.display())))?;
    if let Some(acc) = report.aggregate.test_direction_accuracy {
        log::info!("evaluate: test direction accuracy {acc:.2}%");
    }
    Ok(())
}

/// One row per year; prediction cells stay empty where no window fits.
fn prediction_rows(cs: &CommunitySeries, points: &[forecast::PredictedPoint]) -> String {
    let mut train = vec![String::new(); cs.counts.len()];
    let mut test = vec![String::new(); cs.counts.len()];
    for p in points {
        let cell = format!("{:.6}", p.predicted);
        match p.segment {
            Segment::Train => train[p.index] = cell,
            Segment::Test => test[p.index] = cell,
        }
    }
    let mut out = String::new();
    for (i, c) in cs.counts.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            cs.community_id,
            cs.year_at(i),
            c,
            train[i],
            test[i]
        );
    }
    out
}

/// Synthetic `patents.csv`, `citations.csv` and ground truth.
pub fn synth(run: &Run) -> Result<(), Failure> {
    const STAGE: &str = "synth";
    run.ensure_out(STAGE)?;
    let out = &run.layout.out;
    let header = run.header(STAGE);
    let (patents, citations, labels) = match &run.settings.synth {
        SynthSettings::Corpus(spec) => {
            let c = benchgen::lifecycle_corpus(spec).map_err(|e| Failure::Usage(e.to_string()))?;
            series::write_series_csv(&out.join("truth_series.csv"), &c.series, &header)
                .map_err(|e| data(STAGE)(&e))?;
            (c.patents, c.citations, c.labels)
        }
        SynthSettings::Planted(spec) => {
            let (g, labels) = benchgen::planted_graph(spec).map_err(|e| Failure::Usage(e.to_string()))?;
            let ipc = run.config.echo()["synth.ipc_code"].clone();
            let patents = (0..g.n_nodes())
                .map(|v| PatentRecord {
                    app_id: g.id_of(v).to_string(),
                    app_year: g.year_of(v),
                    ipc_codes: vec![ipc.clone()],
                })
                .collect();
            let citations = g
                .edges()
                .iter()
                .map(|&(a, b)| (g.id_of(a).to_string(), g.id_of(b).to_string()))
                .collect();
            (patents, citations, labels)
        }
    };
    corpus::save_patents(&out.join("patents.csv"), &patents, &header).map_err(|e| data(STAGE)(&e))?;
    corpus::save_citations(&out.join("citations.csv"), &citations, &header)
        .map_err(|e| data(STAGE)(&e))?;
    let mut text = String::new();
    for line in &header {
        let _ = writeln!(text, "# {line}");
    }
    text.push_str("app_id,community\n");
    for (p, l) in patents.iter().zip(&labels) {
        let _ = writeln!(text, "{},{l}", p.app_id);
    }
    let path = out.join("labels.csv");
    std::fs::write(&path, text).map_err(|e| data(STAGE)(&format!("{}: {e}", path.display())))?;
    log::info!("synth: {} patents, {} citations", patents.len(), citations.len());
    Ok(())
}

pub fn pipeline(run: &Run) -> Result<(), Failure> {
    ingest(run)?;
    cluster(run)?;
    build_series(run)?;
    train(run)?;
    evaluate(run)
}

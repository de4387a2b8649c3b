//! Deterministic synthetic data: planted-partition citation graphs and
//! life-cycle shaped citation series, plus a corpus generator that combines
//! the two.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CitationGraph, PatentRecord};
use crate::series::CommunitySeries;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("infeasible density: edge probability {0} exceeds 1")]
    Infeasible(f64),
}

/// Parameters of a planted-partition graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub n_nodes: usize,
    pub n_blocks: usize,
    /// Expected total degree per node, 2E/N.
    pub mean_degree: f64,
    /// Share of edges placed inside blocks; 0 gives a uniform random graph.
    pub lambda: f64,
    /// Block `r` gets weight `1 / (1 + skew * r)`; 0 gives equal sizes.
    pub skew: f64,
    pub year_start: i32,
    pub year_end: i32,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn new(n_nodes: usize, n_blocks: usize, mean_degree: f64, lambda: f64, seed: u64) -> Self {
        Self {
            n_nodes,
            n_blocks,
            mean_degree,
            lambda,
            skew: 0.0,
            year_start: 1970,
            year_end: 2013,
            seed,
        }
    }

    fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::InvalidSpec(m));
        if self.n_blocks == 0 || self.n_nodes < self.n_blocks {
            return bad(format!("need N >= B >= 1, got N={}, B={}", self.n_nodes, self.n_blocks));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda {} outside [0, 1]", self.lambda));
        }
        if !(self.mean_degree >= 0.0) || !(self.skew >= 0.0) {
            return bad("mean degree and skew must be non-negative".into());
        }
        if self.year_end < self.year_start {
            return bad(format!("empty year range {}..={}", self.year_start, self.year_end));
        }
        Ok(())
    }
}

/// Block sizes proportional to the skew weights, by largest remainder, each
/// at least one.
fn block_sizes(n: usize, b: usize, skew: f64) -> Vec<usize> {
    let weights: Vec<f64> = (0..b).map(|r| 1.0 / (1.0 + skew * r as f64)).collect();
    let total: f64 = weights.iter().sum();
    let spare = n - b;
    let exact: Vec<f64> = weights.iter().map(|w| spare as f64 * w / total).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&x, &y| {
        let fx = exact[x] - exact[x].floor();
        let fy = exact[y] - exact[y].floor();
        fy.total_cmp(&fx).then(x.cmp(&y))
    });
    let missing = spare - sizes.iter().sum::<usize>();
    for &r in order.iter().take(missing) {
        sizes[r] += 1;
    }
    sizes.iter().map(|s| s + 1).collect()
}

fn node_id(v: usize) -> String {
    format!("P{v:07}")
}

/// Sample a planted-partition graph. Each unordered pair is an edge
/// independently with probability `p_all + [same block] * p_in`, chosen so
/// that the expected edge count is `N * mean_degree / 2` with a share
/// `lambda` inside blocks. Edges point from the later `(year, index)` node
/// to the earlier one. Returns the graph and the planted labels.
pub fn planted_graph(spec: &PlantedSpec) -> Result<(CitationGraph, Vec<usize>), BenchError> {
    spec.validate()?;
    let n = spec.n_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let sizes = block_sizes(n, spec.n_blocks, spec.skew);
    let mut labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(r, &s)| std::iter::repeat_n(r, s))
        .collect();
    labels.shuffle(&mut rng);
    let years: Vec<i32> = (0..n)
        .map(|_| rng.random_range(spec.year_start..=spec.year_end))
        .collect();

    let pairs_all = (n * (n - 1) / 2) as f64;
    let pairs_in: f64 = sizes.iter().map(|&s| (s * (s - 1) / 2) as f64).sum();
    let m = n as f64 * spec.mean_degree / 2.0;
    let p_all = if pairs_all > 0.0 {
        (1.0 - spec.lambda) * m / pairs_all
    } else {
        0.0
    };
    let p_in = if spec.lambda > 0.0 && m > 0.0 {
        if pairs_in == 0.0 {
            return Err(BenchError::Infeasible(f64::INFINITY));
        }
        spec.lambda * m / pairs_in
    } else {
        0.0
    };
    if p_all + p_in > 1.0 || p_all > 1.0 {
        return Err(BenchError::Infeasible(p_all + p_in));
    }

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_all + p_in } else { p_all };
            if p > 0.0 && rng.random::<f64>() < p {
                // v > u, so (year, index) order puts v later on ties
                if years[v] >= years[u] {
                    edges.push((v, u));
                } else {
                    edges.push((u, v));
                }
            }
        }
    }
    edges.sort_unstable();
    let graph = CitationGraph::from_parts((0..n).map(node_id).collect(), years, edges)
        .expect("generated graph satisfies invariants");
    Ok((graph, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Growth,
    /// Mirror image of `Growth`: a high plateau falling off logistically.
    Decline,
    PeakDecline,
    Flat,
}

impl std::str::FromStr for Shape {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "growth" => Ok(Shape::Growth),
            "decline" => Ok(Shape::Decline),
            "peak-decline" => Ok(Shape::PeakDecline),
            "flat" => Ok(Shape::Flat),
            _ => Err(BenchError::InvalidSpec(format!("unknown shape `{s}`"))),
        }
    }
}

/// Parameters of one synthetic series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub shape: Shape,
    pub length: usize,
    /// Standard deviation of the multiplicative noise.
    pub noise: f64,
    /// Plateau (growth, decline) or peak (peak-decline) height; flat sits at
    /// half.
    pub amplitude: f64,
    /// Growth/decline midpoint or peak position as a fraction of the length.
    pub position: Option<f64>,
    /// Final value relative to the peak for peak-decline.
    pub tail_ratio: f64,
    pub year_start: i32,
    pub community_id: usize,
    pub seed: u64,
}

impl SeriesSpec {
    pub fn new(shape: Shape, length: usize, noise: f64, seed: u64) -> Self {
        Self {
            shape,
            length,
            noise,
            amplitude: 100.0,
            position: None,
            tail_ratio: 0.1,
            year_start: 1970,
            community_id: 0,
            seed,
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Noise-free curve.
pub fn base_curve(spec: &SeriesSpec) -> Vec<f64> {
    let len = spec.length as f64;
    let a = spec.amplitude;
    match spec.shape {
        Shape::Flat => vec![a / 2.0; spec.length],
        Shape::Growth | Shape::Decline => {
            let (default_mid, k) = if spec.shape == Shape::Growth {
                (0.6, 8.0 / len)
            } else {
                (0.4, -8.0 / len)
            };
            let mid = spec.position.unwrap_or(default_mid) * len;
            (0..spec.length)
                .map(|t| a * logistic(k * (t as f64 - mid)))
                .collect()
        }
        Shape::PeakDecline => {
            let peak = (spec.position.unwrap_or(0.3) * len).max(1.0);
            let rise = 4.0 / peak;
            let decay = -spec.tail_ratio.ln() / (len - 1.0 - peak).max(1.0);
            (0..spec.length)
                .map(|t| {
                    let t = t as f64;
                    if t <= peak {
                        // logistic rise scaled to reach `a` at the peak
                        a * logistic(rise * (t - peak / 2.0)) / logistic(rise * peak / 2.0)
                    } else {
                        a * (-decay * (t - peak)).exp()
                    }
                })
                .collect()
        }
    }
}

/// Base curve with multiplicative Gaussian noise, floored at zero and
/// rounded. Without noise a peak-decline series has a unique maximum.
pub fn lifecycle_series(spec: &SeriesSpec) -> Result<CommunitySeries, BenchError> {
    if spec.length < 10 {
        return Err(BenchError::InvalidSpec(format!(
            "series length {} below 10",
            spec.length
        )));
    }
    if !(spec.noise >= 0.0) || !(spec.amplitude >= 0.0) {
        return Err(BenchError::InvalidSpec("noise and amplitude must be non-negative".into()));
    }
    if !(spec.tail_ratio > 0.0 && spec.tail_ratio <= 1.0) {
        return Err(BenchError::InvalidSpec(format!("tail ratio {} outside (0, 1]", spec.tail_ratio)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let base = base_curve(spec);
    let mut counts: Vec<u64> = base
        .iter()
        .map(|&x| {
            let eps = if spec.noise > 0.0 {
                normal.sample(&mut rng)
            } else {
                0.0
            };
            (x * (1.0 + spec.noise * eps)).max(0.0).round() as u64
        })
        .collect();
    if spec.shape == Shape::PeakDecline && spec.noise == 0.0 {
        let top = base
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("length >= 10");
        counts[top] += 1;
    }
    Ok(CommunitySeries {
        community_id: spec.community_id,
        year_start: spec.year_start,
        year_end: spec.year_start + spec.length as i32 - 1,
        counts,
    })
}

/// Parameters of a corpus whose communities follow life-cycle curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_communities: usize,
    /// Shapes assigned to communities in rotation.
    pub shapes: Vec<Shape>,
    pub year_start: i32,
    pub year_end: i32,
    pub amplitude: f64,
    pub noise: f64,
    /// Share of citations made from inside the cited community.
    pub lambda: f64,
    /// Citations per citing patent, on average.
    pub cites_per_patent: usize,
    /// Patents present in every community in the first year.
    pub seed_patents: usize,
    /// Per-shape position overrides, assigned in rotation like `shapes`.
    pub position: Option<Vec<f64>>,
    pub ipc_code: String,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_communities: 20,
            shapes: vec![Shape::Growth, Shape::Decline],
            year_start: 1970,
            year_end: 2013,
            amplitude: 300.0,
            noise: 0.01,
            lambda: 0.9,
            cites_per_patent: 10,
            seed_patents: 5,
            position: None,
            ipc_code: "G06Q".into(),
            seed: 0,
        }
    }
}

/// A generated corpus and its ground truth.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub patents: Vec<PatentRecord>,
    pub citations: Vec<(String, String)>,
    /// Planted community of each patent, in `patents` order.
    pub labels: Vec<usize>,
    pub shapes: Vec<Shape>,
    /// Realized incoming citations per community and year.
    pub series: Vec<CommunitySeries>,
}

/// Generate patents and citations so that community `c` receives roughly
/// `target_c(t)` citations from patents filed in year `t`. A share `lambda`
/// of them comes from the community's own patents of that year, the rest
/// from patents of other communities; cited patents are drawn uniformly
/// among the community's patents filed no later than `t`.
pub fn lifecycle_corpus(spec: &CorpusSpec) -> Result<Corpus, BenchError> {
    if spec.n_communities == 0 || spec.shapes.is_empty() {
        return Err(BenchError::InvalidSpec("need at least one community and shape".into()));
    }
    if !(0.0..=1.0).contains(&spec.lambda) || spec.cites_per_patent == 0 || spec.seed_patents == 0 {
        return Err(BenchError::InvalidSpec(
            "lambda in [0, 1], positive cites_per_patent and seed_patents required".into(),
        ));
    }
    if spec.year_end < spec.year_start {
        return Err(BenchError::InvalidSpec("empty year range".into()));
    }
    let length = (spec.year_end - spec.year_start + 1) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_comm = spec.n_communities;

    let shapes: Vec<Shape> = (0..n_comm).map(|c| spec.shapes[c % spec.shapes.len()]).collect();
    let targets: Vec<Vec<u64>> = shapes
        .iter()
        .enumerate()
        .map(|(c, &shape)| {
            let mut s = SeriesSpec::new(shape, length, spec.noise, rng.random());
            s.amplitude = spec.amplitude;
            s.position = spec.position.as_ref().map(|p| p[c % p.len()]);
            lifecycle_series(&s).map(|s| s.counts)
        })
        .collect::<Result<_, _>>()?;

    let mut patents: Vec<PatentRecord> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let ipc = vec![spec.ipc_code.clone()];
    let add_patent = |c: usize, year: i32, patents: &mut Vec<PatentRecord>, labels: &mut Vec<usize>| {
        let v = patents.len();
        patents.push(PatentRecord {
            app_id: node_id(v),
            app_year: year,
            ipc_codes: ipc.clone(),
        });
        labels.push(c);
        v
    };

    // owned[c]: patents of community c in filing order
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); n_comm];
    for (c, list) in owned.iter_mut().enumerate() {
        for _ in 0..spec.seed_patents {
            list.push(add_patent(c, spec.year_start, &mut patents, &mut labels));
        }
    }
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut ordered: Vec<(usize, usize)> = Vec::new();
    for t in 0..length {
        let year = spec.year_start + t as i32;
        let mut new_by_comm: Vec<Vec<usize>> = vec![Vec::new(); n_comm];
        for c in 0..n_comm {
            let n_new = (targets[c][t] as usize).div_ceil(spec.cites_per_patent);
            for _ in 0..n_new {
                let v = add_patent(c, year, &mut patents, &mut labels);
                new_by_comm[c].push(v);
                owned[c].push(v);
            }
        }
        let this_year: Vec<usize> = new_by_comm.iter().flatten().copied().collect();
        for c in 0..n_comm {
            for _ in 0..targets[c][t] {
                let inside = rng.random::<f64>() < spec.lambda;
                for _attempt in 0..20 {
                    let citing = if inside || this_year.len() == new_by_comm[c].len() {
                        match new_by_comm[c].as_slice() {
                            [] => break,
                            own => own[rng.random_range(0..own.len())],
                        }
                    } else {
                        loop {
                            let v = this_year[rng.random_range(0..this_year.len())];
                            if labels[v] != c {
                                break v;
                            }
                        }
                    };
                    let cited = owned[c][rng.random_range(0..owned[c].len())];
                    if cited != citing && edges.insert((citing, cited)) {
                        ordered.push((citing, cited));
                        break;
                    }
                }
            }
        }
    }

    let graph = CitationGraph::from_parts(
        patents.iter().map(|p| p.app_id.clone()).collect(),
        patents.iter().map(|p| p.app_year).collect(),
        {
            let mut e = ordered.clone();
            e.sort_unstable();
            e
        },
    )
    .expect("generated corpus satisfies invariants");
    let range = crate::series::YearRange::new(spec.year_start, spec.year_end)
        .expect("non-empty range");
    let series = crate::series::build_series(&graph, &labels, range, Default::default());
    let citations = ordered
        .iter()
        .map(|&(a, b)| (patents[a].app_id.clone(), patents[b].app_id.clone()))
        .collect();
    Ok(Corpus {
        patents,
        citations,
        labels,
        shapes,
        series,
    })
}

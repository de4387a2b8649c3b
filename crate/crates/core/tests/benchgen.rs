use citesbm::benchgen::{
    lifecycle_corpus, lifecycle_series, planted_graph, CorpusSpec, PlantedSpec, SeriesSpec, Shape,
};
use citesbm::corpus::{build_graph, load_citations, load_patents, save_citations, save_patents, ColumnConfig};

/// Edge counts agree with N * d / 2 within three standard deviations, and
/// their mean over 100 seeds within three standard errors.
#[test]
fn planted_edge_count_matches_expectation() {
    let (n, d) = (200usize, 6.0);
    let mu = n as f64 * d / 2.0;
    // a sum of independent Bernoullis has variance at most its mean
    let sigma = mu.sqrt();
    let mut total = 0.0;
    let mut outliers = 0;
    for seed in 0..100 {
        let (g, _) = planted_graph(&PlantedSpec::new(n, 4, d, 0.7, seed)).unwrap();
        let e = g.n_edges() as f64;
        total += e;
        if (e - mu).abs() > 3.0 * sigma {
            outliers += 1;
        }
    }
    let mean = total / 100.0;
    assert!((mean - mu).abs() < 3.0 * sigma / 10.0, "mean {mean} vs {mu}");
    assert!(outliers <= 1, "{outliers} seeds beyond 3 sigma");
}

#[test]
fn planted_within_share_tracks_lambda() {
    for lambda in [0.0, 0.5, 0.9] {
        let (g, labels) = planted_graph(&PlantedSpec::new(600, 4, 10.0, lambda, 3)).unwrap();
        let within = g.edges().iter().filter(|&&(u, v)| labels[u] == labels[v]).count();
        let share = within as f64 / g.n_edges() as f64;
        // lambda = 0 still places 1/B of edges inside blocks at random
        let want = lambda + (1.0 - lambda) / 4.0;
        assert!((share - want).abs() < 0.05, "lambda {lambda}: share {share}");
    }
}

#[test]
fn noiseless_shapes_are_monotone() {
    let growth = lifecycle_series(&SeriesSpec::new(Shape::Growth, 40, 0.0, 0)).unwrap().counts;
    assert!(growth.windows(2).all(|w| w[0] <= w[1]));
    assert!(growth[39] > growth[0]);
    let decline = lifecycle_series(&SeriesSpec::new(Shape::Decline, 40, 0.0, 0)).unwrap().counts;
    assert!(decline.windows(2).all(|w| w[0] >= w[1]));
    let peak = lifecycle_series(&SeriesSpec::new(Shape::PeakDecline, 30, 0.0, 0)).unwrap().counts;
    let top = peak.iter().max().unwrap();
    assert_eq!(peak.iter().filter(|&c| c == top).count(), 1);
}

#[test]
fn corpus_survives_csv_round_trip() {
    let spec = CorpusSpec {
        n_communities: 4,
        amplitude: 40.0,
        ..CorpusSpec::default()
    };
    let corpus = lifecycle_corpus(&spec).unwrap();
    assert_eq!(corpus.labels.len(), corpus.patents.len());
    let dir = tempfile::tempdir().unwrap();
    let pp = dir.path().join("patents.csv");
    let cp = dir.path().join("citations.csv");
    save_patents(&pp, &corpus.patents, &[]).unwrap();
    save_citations(&cp, &corpus.citations, &[]).unwrap();
    let patents = load_patents(&pp, &ColumnConfig::default()).unwrap();
    let citations = load_citations(&cp).unwrap();
    assert_eq!(patents, corpus.patents);
    assert_eq!(citations, corpus.citations);
    let (a, ra) = build_graph(&corpus.patents, &corpus.citations).unwrap();
    let (b, _) = build_graph(&patents, &citations).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra.kept, corpus.citations.len());
    // citations never point forward in time
    assert!(a.edges().iter().all(|&(u, v)| a.year_of(u) >= a.year_of(v)));
}

#[test]
fn generators_are_seeded() {
    let spec = PlantedSpec::new(100, 2, 5.0, 0.8, 42);
    assert_eq!(planted_graph(&spec).unwrap(), planted_graph(&spec).unwrap());
    let c = CorpusSpec {
        n_communities: 2,
        amplitude: 20.0,
        ..CorpusSpec::default()
    };
    assert_eq!(lifecycle_corpus(&c).unwrap().citations, lifecycle_corpus(&c).unwrap().citations);
}

use citesbm::benchgen::{planted_graph, PlantedSpec};
use citesbm::series::{
    build_series, filter_series, read_series_csv, write_series_csv, Attribution, SeriesOptions,
    YearRange,
};

#[test]
fn counts_conserve_edges() {
    let (g, labels) = planted_graph(&PlantedSpec::new(300, 5, 8.0, 0.6, 7)).unwrap();
    let (lo, hi) = g.year_span().unwrap();
    let range = YearRange::new(lo, hi).unwrap();
    let total = |opts| -> u64 { build_series(&g, &labels, range, opts).iter().map(|s| s.total()).sum() };
    let incoming = SeriesOptions::default();
    let outgoing = SeriesOptions {
        attribution: Attribution::Outgoing,
        ..SeriesOptions::default()
    };
    let within = SeriesOptions {
        within_community: true,
        ..SeriesOptions::default()
    };
    assert_eq!(total(incoming), g.n_edges() as u64);
    assert_eq!(total(outgoing), g.n_edges() as u64);
    let same = g.edges().iter().filter(|&&(u, v)| labels[u] == labels[v]).count();
    assert_eq!(total(within), same as u64);

    // per-community totals equal in-degree sums
    let series = build_series(&g, &labels, range, incoming);
    for s in &series {
        let want = g.edges().iter().filter(|&&(_, v)| labels[v] == s.community_id).count();
        assert_eq!(s.total(), want as u64);
    }
}

#[test]
fn out_of_range_citations_are_skipped() {
    let (g, labels) = planted_graph(&PlantedSpec::new(200, 2, 6.0, 0.6, 1)).unwrap();
    let range = YearRange::new(1990, 1995).unwrap();
    let counted: u64 = build_series(&g, &labels, range, SeriesOptions::default())
        .iter()
        .map(|s| s.total())
        .sum();
    let want = g
        .edges()
        .iter()
        .filter(|&&(u, _)| (1990..=1995).contains(&g.year_of(u)))
        .count();
    assert_eq!(counted, want as u64);
    assert!(YearRange::new(2000, 1999).is_err());
}

#[test]
fn csv_round_trip_and_filter() {
    let (g, labels) = planted_graph(&PlantedSpec::new(200, 4, 6.0, 0.6, 2)).unwrap();
    let (lo, hi) = g.year_span().unwrap();
    let series = build_series(&g, &labels, YearRange::new(lo, hi).unwrap(), SeriesOptions::default());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    write_series_csv(&path, &series, &["x".to_string()]).unwrap();
    assert_eq!(read_series_csv(&path).unwrap(), series);

    let kept = filter_series(&series, 100, 5);
    for s in &series {
        let keep = s.total() >= 100 && s.years_active() >= 5;
        assert_eq!(kept.contains(s), keep);
    }
}

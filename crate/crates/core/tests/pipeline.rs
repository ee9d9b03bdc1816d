use std::collections::BTreeSet;

use visitnet::dag::{self, SearchConfig};
use visitnet::forest;
use visitnet::ingest::{self, CsvSchema, VisitCountTable};
use visitnet::metrics::{MetricsReport, UndirectedGraph};
use visitnet::stats::ScoreConfig;
use visitnet::synth::{self, GroundTruthModel};
use visitnet::{ScoreConfigF32, SearchConfigF32};

fn sample_log() -> ingest::TransactionLog {
    let model = visitnet::cli::random_model(visitnet::cli::ModelKind::Dag, 6, 21, 0.9, 0.5).unwrap();
    synth::sample_itineraries(&model, 2_000, 21, 2012).unwrap()
}

#[test]
fn csv_round_trip_preserves_the_log() {
    let log = sample_log();
    let mut buf = Vec::new();
    ingest::write_transactions(&log, &mut buf).unwrap();
    let back = ingest::parse_transactions(buf.as_slice(), &CsvSchema::default()).unwrap();
    assert_eq!(back.records(), log.records());
}

#[test]
fn log_to_forest_to_metrics() {
    let log = sample_log();
    let counts = VisitCountTable::from_dedup(&ingest::deduplicate(&log));
    let all: BTreeSet<String> = counts.counts.keys().cloned().collect();
    let ds = ingest::build_indicator_dataset(&log, &all, true).unwrap();
    assert_eq!(ds.n_rows(), log.n_subjects());

    let vars = ds.variables(false);
    let f = forest::learn_min_bic_forest::<f64>(&ds, &vars, &ScoreConfig::bic(ds.n_rows())).unwrap();
    let report = MetricsReport::<f64>::compute(&UndirectedGraph::from_forest(&f));
    let degree_sum: usize = report.records.iter().map(|r| r.degree).sum();
    assert_eq!(degree_sum, 2 * f.edges().len());

    let with_status = forest::learn_min_bic_forest::<f64>(&ds, &ds.variables(true), &ScoreConfig::bic(ds.n_rows())).unwrap();
    assert_eq!(with_status.vertices().len(), f.vertices().len() + 1);
}

#[test]
fn f32_scores_track_f64() {
    let log = sample_log();
    let counts = VisitCountTable::from_dedup(&ingest::deduplicate(&log));
    let all: BTreeSet<String> = counts.counts.keys().cloned().collect();
    let ds = ingest::build_indicator_dataset(&log, &all, false).unwrap();
    let vars = ds.variables(false);
    let a = forest::learn_min_bic_forest::<f64>(&ds, &vars, &ScoreConfig::bic(ds.n_rows())).unwrap();
    let b = forest::learn_min_bic_forest::<f32>(&ds, &vars, &ScoreConfigF32::bic(ds.n_rows())).unwrap();
    assert_eq!(a.edges(), b.edges());

    let x = dag::hill_climb(&ds, &SearchConfig::<f64> { restarts: 5, ..SearchConfig::default() }).unwrap();
    let y = dag::hill_climb(&ds, &SearchConfigF32 { restarts: 5, ..SearchConfigF32::default() }).unwrap();
    let y_in_f64 = dag::score_dag(&ds, &y.dag, &ScoreConfig::<f64>::bic(ds.n_rows())).unwrap();
    assert!((y.score as f64 - y_in_f64).abs() < 1e-5 * y_in_f64.abs());
    assert!(x.score > x.empty_score && y.score > y.empty_score);
}

#[test]
fn hill_climb_recovers_a_strong_chain() {
    let g = visitnet::Dag::from_names(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
    let cpt = |p: f64| synth::Cpt { parents: vec![], rows: vec![[1.0 - p, p]] };
    let child = |parent: usize| synth::Cpt { parents: vec![parent], rows: vec![[0.9, 0.1], [0.1, 0.9]] };
    let model = GroundTruthModel::dag(g, vec![cpt(0.5), child(0), child(1)]).unwrap();
    let ds = synth::sample_dag_model(&model, 10_000, 3).unwrap();
    let r = dag::hill_climb(&ds, &SearchConfig::<f64> { restarts: 10, ..SearchConfig::default() }).unwrap();
    let skeleton: BTreeSet<(usize, usize)> = r.dag.arcs().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    assert_eq!(skeleton, BTreeSet::from([(0, 1), (1, 2)]));
    assert!(r.score > r.empty_score);
}

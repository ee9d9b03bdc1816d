//! Structure learning for networks of items built from visit transaction logs.
//!
//! The pipeline turns a log of `(subject, item, date, status)` visit events into a
//! binary indicator dataset (one row per subject, one column per frequently visited
//! item), then learns
//!
//! - the minimum-BIC forest over the items ([`forest`]),
//! - a BIC-scored DAG by hill climbing ([`dag`]),
//!
//! computes degree / betweenness / closeness centrality on the forest ([`metrics`]),
//! and compares the DAG's arc directions with the order in which subjects actually
//! visited the items ([`temporal`]).
//!
//! Scores and centralities are generic over the floating point type through
//! [`Scalar`]; the `*F64` / `*F32` aliases below fix the common choices.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod dag;
pub mod dataset;
pub mod export;
pub mod forest;
pub mod ingest;
pub mod metrics;
pub mod scalar;
pub mod stats;
pub mod synth;
pub mod temporal;

pub use dag::{hill_climb, is_acyclic, score_dag, score_parts, statistical_time, Dag, DagScore, HillClimbResult, SearchConfig};
pub use dataset::{IndicatorDataset, VarId};
pub use forest::{connected_components, learn_min_bic_forest, Forest};
pub use ingest::{
    build_indicator_dataset, deduplicate, parse_transactions, select_main_items, CsvSchema,
    Deduplicated, IngestError, Status, TransactionLog, TransactionRecord, VisitCountTable,
};
pub use metrics::{MetricsReport, UndirectedGraph};
pub use scalar::Scalar;
pub use stats::{ContingencyTable, ScoreConfig};
pub use temporal::{AgreementReport, Direction, PrecedenceEntry, Verdict};

pub type ScoreConfigF64 = ScoreConfig<f64>;
pub type ScoreConfigF32 = ScoreConfig<f32>;
pub type SearchConfigF64 = SearchConfig<f64>;
pub type SearchConfigF32 = SearchConfig<f32>;
pub type HillClimbResultF64 = HillClimbResult<f64>;
pub type HillClimbResultF32 = HillClimbResult<f32>;
pub type MetricsReportF64 = MetricsReport<f64>;
pub type MetricsReportF32 = MetricsReport<f32>;

//! Ground-truth models and samplers for structure-recovery experiments.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), whose output is
//! specified bit-for-bit and therefore identical across platforms. Subject `k` of a
//! sample draws from stream `k + 1` of the generator seeded with the sample seed, so
//! rows can be generated in parallel without changing the result.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dag::{statistical_time, Dag, DagError};
use crate::dataset::{DatasetError, IndicatorDataset, VarId};
use crate::forest::{connected_components, Forest};
use crate::ingest::{IngestError, Status, TransactionLog, TransactionRecord};

const ROW_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("probability row for {variable} (configuration {config}) sums to {sum}")]
    BadRow { variable: String, config: usize, sum: f64 },
    #[error("probability out of [0, 1] for {0}")]
    BadProbability(String),
    #[error("{variable} needs {expected} table rows, got {found}")]
    RowCount { variable: String, expected: usize, found: usize },
    #[error("edge table for ({0}, {1}) disagrees with the vertex marginals")]
    InconsistentEdge(String, String),
    #[error("model has no temporal order")]
    NoTemporalOrder,
    #[error("temporal order is not a permutation of the items")]
    BadTemporalOrder,
    #[error("{items} items cannot get distinct days in year {year}")]
    YearTooShort { items: usize, year: i32 },
    #[error("invalid year {0}")]
    BadYear(i32),
    #[error("root {0} is not in the forest")]
    BadRoot(usize),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Conditional table of a binary variable: `rows[config] = [p(0), p(1)]`, where
/// `config` encodes the parent values in `parents` order, first parent most
/// significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    pub parents: Vec<usize>,
    pub rows: Vec<[f64; 2]>,
}

impl Cpt {
    pub fn bernoulli(p1: f64) -> Self {
        Self { parents: Vec::new(), rows: vec![[1.0 - p1, p1]] }
    }

    fn config(&self, values: &[u8]) -> usize {
        self.parents.iter().fold(0, |acc, &p| acc * 2 + values[p] as usize)
    }
}

/// Forest parameters: vertex marginals `p(X_v = 1)` and, per edge `(a, b)` with
/// `a < b`, the joint table `joint[x_a][x_b]`. Any rooting of a tree yields the same
/// joint distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ForestParams {
    pub marginals: Vec<f64>,
    pub edge_joints: BTreeMap<(usize, usize), [[f64; 2]; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Structure {
    Forest(Forest, ForestParams),
    Dag(Dag, Vec<Cpt>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthModel {
    pub structure: Structure,
    /// Item positions in visiting order.
    pub temporal_order: Option<Vec<usize>>,
}

impl GroundTruthModel {
    pub fn dag(dag: Dag, cpts: Vec<Cpt>) -> Result<Self, SynthError> {
        validate_cpts(&dag, &cpts)?;
        Ok(Self { structure: Structure::Dag(dag, cpts), temporal_order: None })
    }

    pub fn forest(forest: Forest, params: ForestParams) -> Result<Self, SynthError> {
        validate_forest(&forest, &params)?;
        Ok(Self { structure: Structure::Forest(forest, params), temporal_order: None })
    }

    /// Forest with fair marginals where each edge's endpoints agree with probability `p_agree`.
    pub fn symmetric_forest(forest: Forest, p_agree: f64) -> Result<Self, SynthError> {
        let n = forest.vertices().len();
        let pos = |v: VarId| forest.vertices().iter().position(|&w| w == v).unwrap();
        let same = p_agree / 2.0;
        let diff = (1.0 - p_agree) / 2.0;
        let edge_joints = forest
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (pos(a), pos(b));
                ((x.min(y), x.max(y)), [[same, diff], [diff, same]])
            })
            .collect();
        Self::forest(forest, ForestParams { marginals: vec![0.5; n], edge_joints })
    }

    /// `X -> Z <- Y` with fair `X`, `Y` and `Z = X xor Y` flipped with probability `noise`.
    pub fn collider(noise: f64) -> Result<Self, SynthError> {
        let dag = Dag::from_names(&["X", "Y", "Z"], &[("X", "Z"), ("Y", "Z")])?;
        let z = Cpt {
            parents: vec![0, 1],
            rows: vec![[1.0 - noise, noise], [noise, 1.0 - noise], [noise, 1.0 - noise], [1.0 - noise, noise]],
        };
        Self::dag(dag, vec![Cpt::bernoulli(0.5), Cpt::bernoulli(0.5), z])
    }

    pub fn with_temporal_order(mut self, order: Vec<usize>) -> Result<Self, SynthError> {
        let n = self.names().len();
        let set: BTreeSet<usize> = order.iter().copied().collect();
        if order.len() != n || set.len() != n || set.iter().any(|&v| v >= n) {
            return Err(SynthError::BadTemporalOrder);
        }
        self.temporal_order = Some(order);
        Ok(self)
    }

    pub fn names(&self) -> &[String] {
        match &self.structure {
            Structure::Forest(f, _) => f.names(),
            Structure::Dag(d, _) => d.names(),
        }
    }

    /// The DAG this model samples from (forests rooted at their smallest vertex).
    pub fn as_dag(&self) -> Result<(Dag, Vec<Cpt>), SynthError> {
        match &self.structure {
            Structure::Dag(d, c) => Ok((d.clone(), c.clone())),
            Structure::Forest(f, p) => orient_forest(f, p, &[]),
        }
    }
}

fn validate_row(name: &str, config: usize, row: &[f64; 2]) -> Result<(), SynthError> {
    if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(SynthError::BadProbability(name.to_string()));
    }
    let sum = row[0] + row[1];
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(SynthError::BadRow { variable: name.to_string(), config, sum });
    }
    Ok(())
}

fn validate_cpts(dag: &Dag, cpts: &[Cpt]) -> Result<(), SynthError> {
    if cpts.len() != dag.len() {
        return Err(SynthError::RowCount { variable: "model".into(), expected: dag.len(), found: cpts.len() });
    }
    for (v, cpt) in cpts.iter().enumerate() {
        let name = &dag.names()[v];
        let expected: BTreeSet<usize> = dag.parents(v)?;
        let given: BTreeSet<usize> = cpt.parents.iter().copied().collect();
        if expected != given || given.len() != cpt.parents.len() {
            return Err(SynthError::RowCount { variable: name.clone(), expected: expected.len(), found: cpt.parents.len() });
        }
        let rows = 1usize << cpt.parents.len();
        if cpt.rows.len() != rows {
            return Err(SynthError::RowCount { variable: name.clone(), expected: rows, found: cpt.rows.len() });
        }
        for (c, row) in cpt.rows.iter().enumerate() {
            validate_row(name, c, row)?;
        }
    }
    Ok(())
}

fn validate_forest(f: &Forest, p: &ForestParams) -> Result<(), SynthError> {
    let n = f.vertices().len();
    if p.marginals.len() != n {
        return Err(SynthError::RowCount { variable: "marginals".into(), expected: n, found: p.marginals.len() });
    }
    for (v, &m) in p.marginals.iter().enumerate() {
        validate_row(&f.names()[v], 0, &[1.0 - m, m])?;
    }
    let pos = |v: VarId| f.vertices().iter().position(|&w| w == v).unwrap();
    let expected: BTreeSet<(usize, usize)> =
        f.edges().iter().map(|&(a, b)| (pos(a).min(pos(b)), pos(a).max(pos(b)))).collect();
    let given: BTreeSet<(usize, usize)> = p.edge_joints.keys().copied().collect();
    if expected != given {
        return Err(SynthError::RowCount { variable: "edges".into(), expected: expected.len(), found: given.len() });
    }
    for (&(a, b), joint) in &p.edge_joints {
        let (na, nb) = (&f.names()[a], &f.names()[b]);
        let total: f64 = joint.iter().flatten().sum();
        if joint.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) || (total - 1.0).abs() > ROW_TOLERANCE {
            return Err(SynthError::BadRow { variable: format!("{na}-{nb}"), config: 0, sum: total });
        }
        let ma = joint[1][0] + joint[1][1];
        let mb = joint[0][1] + joint[1][1];
        if (ma - p.marginals[a]).abs() > ROW_TOLERANCE || (mb - p.marginals[b]).abs() > ROW_TOLERANCE {
            return Err(SynthError::InconsistentEdge(na.clone(), nb.clone()));
        }
    }
    Ok(())
}

/// Orients each tree away from its root (given in `roots` or else its smallest
/// position) and derives conditional tables from the edge joints.
fn orient_forest(f: &Forest, p: &ForestParams, roots: &[usize]) -> Result<(Dag, Vec<Cpt>), SynthError> {
    let n = f.vertices().len();
    let pos = |v: VarId| f.vertices().iter().position(|&w| w == v).unwrap();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in f.edges() {
        adj[pos(a)].push(pos(b));
        adj[pos(b)].push(pos(a));
    }
    for &r in roots {
        if r >= n {
            return Err(SynthError::BadRoot(r));
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut arcs = Vec::new();
    for comp in connected_components(f) {
        let members: Vec<usize> = comp.iter().map(|&v| pos(v)).collect();
        let root = roots
            .iter()
            .copied()
            .find(|r| members.contains(r))
            .unwrap_or_else(|| *members.iter().min().unwrap());
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    arcs.push((v, w));
                    stack.push(w);
                }
            }
        }
    }
    let cpts = (0..n)
        .map(|v| match parent[v] {
            None => Cpt::bernoulli(p.marginals[v]),
            Some(u) => {
                let key = (u.min(v), u.max(v));
                let j = p.edge_joints[&key];
                // joint[x_u][x_v]
                let joint = |xu: usize, xv: usize| if u < v { j[xu][xv] } else { j[xv][xu] };
                let row = |xu: usize| {
                    let m = joint(xu, 0) + joint(xu, 1);
                    if m > 0.0 {
                        let p1 = joint(xu, 1) / m;
                        [1.0 - p1, p1]
                    } else {
                        [0.5, 0.5]
                    }
                };
                Cpt { parents: vec![u], rows: vec![row(0), row(1)] }
            }
        })
        .collect();
    let dag = Dag::new(f.vertices().to_vec(), f.names().to_vec(), arcs)?;
    Ok((dag, cpts))
}

/// Generator for subject `index` of a sample.
pub fn subject_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn sample_row(order: &[usize], cpts: &[Cpt], rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut row = vec![0u8; cpts.len()];
    for &v in order {
        let cpt = &cpts[v];
        let p1 = cpt.rows[cpt.config(&row)][1];
        row[v] = (rng.random::<f64>() < p1) as u8;
    }
    row
}

fn sample_rows(dag: &Dag, cpts: &[Cpt], n: usize, seed: u64) -> Vec<Vec<u8>> {
    let order = statistical_time(dag);
    (0..n)
        .into_par_iter()
        .map(|k| sample_row(&order, cpts, &mut subject_rng(seed, k)))
        .collect()
}

fn rows_to_dataset(names: &[String], rows: &[Vec<u8>]) -> Result<IndicatorDataset, SynthError> {
    Ok(IndicatorDataset::from_rows(names.to_vec(), rows)?)
}

/// Ancestral sampling of `n` rows from a DAG model.
pub fn sample_dag_model(model: &GroundTruthModel, n: usize, seed: u64) -> Result<IndicatorDataset, SynthError> {
    let (dag, cpts) = model.as_dag()?;
    validate_cpts(&dag, &cpts)?;
    rows_to_dataset(dag.names(), &sample_rows(&dag, &cpts, n, seed))
}

/// Samples a forest model, each tree rooted at its smallest vertex.
pub fn sample_forest_model(model: &GroundTruthModel, n: usize, seed: u64) -> Result<IndicatorDataset, SynthError> {
    sample_forest_model_rooted(model, n, seed, &[])
}

/// Samples a forest model with explicit tree roots (positions); trees without a
/// listed root use their smallest vertex.
pub fn sample_forest_model_rooted(
    model: &GroundTruthModel,
    n: usize,
    seed: u64,
    roots: &[usize],
) -> Result<IndicatorDataset, SynthError> {
    match &model.structure {
        Structure::Forest(f, p) => {
            let (dag, cpts) = orient_forest(f, p, roots)?;
            rows_to_dataset(dag.names(), &sample_rows(&dag, &cpts, n, seed))
        }
        Structure::Dag(..) => sample_dag_model(model, n, seed),
    }
}

/// Day offsets `floor(k * days / visits)`: strictly increasing and inside the year.
fn day_offsets(visits: usize, days: usize) -> impl Iterator<Item = u64> {
    (0..visits).map(move |k| (k * days / visits) as u64)
}

/// Draws `n` subjects, then stamps each subject's visited items on increasing days
/// that follow the model's temporal order. Status is uniform over the three levels.
pub fn sample_itineraries(model: &GroundTruthModel, n: usize, seed: u64, year: i32) -> Result<TransactionLog, SynthError> {
    let order = model.temporal_order.as_ref().ok_or(SynthError::NoTemporalOrder)?;
    let (dag, cpts) = model.as_dag()?;
    validate_cpts(&dag, &cpts)?;
    let start = NaiveDate::from_ymd_opt(year, 1, 1).ok_or(SynthError::BadYear(year))?;
    let days = NaiveDate::from_ymd_opt(year, 12, 31).ok_or(SynthError::BadYear(year))?.ordinal() as usize;
    if order.len() > days {
        return Err(SynthError::YearTooShort { items: order.len(), year });
    }
    let topo = statistical_time(&dag);
    let width = n.max(1).to_string().len();
    let per_subject: Vec<Vec<TransactionRecord>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = subject_rng(seed, k);
            let row = sample_row(&topo, &cpts, &mut rng);
            let status = Status::from_code(rng.random_range(0..3u8)).unwrap();
            let visited: Vec<usize> = order.iter().copied().filter(|&v| row[v] == 1).collect();
            let subject = format!("c{:0width$}", k + 1);
            visited
                .iter()
                .zip(day_offsets(visited.len(), days))
                .map(|(&v, off)| TransactionRecord {
                    subject_id: subject.clone(),
                    item_code: dag.names()[v].clone(),
                    date: start + Days::new(off),
                    status,
                })
                .collect()
        })
        .collect();
    Ok(TransactionLog::new(per_subject.into_iter().flatten().collect())?)
}

/// Uniform random labeled tree on `n` vertices (random attachment, then shuffled labels).
pub fn random_tree_edges(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    (1..n)
        .map(|v| {
            let u = rng.random_range(0..v);
            let (a, b) = (labels[u], labels[v]);
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Random DAG: arcs follow a random vertex order, each present with probability `density`.
pub fn random_dag_arcs(n: usize, density: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                arcs.push((order[i], order[j]));
            }
        }
    }
    arcs
}

/// Conditional tables with every `p(1)` drawn uniformly from `[lo, hi]`.
pub fn random_cpts(dag: &Dag, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<Cpt> {
    (0..dag.len())
        .map(|v| {
            let parents: Vec<usize> = dag.parents(v).expect("vertex in range").into_iter().collect();
            let rows = (0..1usize << parents.len())
                .map(|_| {
                    let p1 = lo + (hi - lo) * rng.random::<f64>();
                    [1.0 - p1, p1]
                })
                .collect();
            Cpt { parents, rows }
        })
        .collect()
}

/// Default item names `M000`, `M001`, ...
pub fn item_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("M{i:03}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_tol(p: f64, n: usize) -> f64 {
        // five standard errors
        5.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    fn two_vertex_forest(p_agree: f64) -> GroundTruthModel {
        let f = Forest::new(vec![VarId(0), VarId(1)], vec!["A".into(), "B".into()], [(VarId(0), VarId(1))]).unwrap();
        GroundTruthModel::symmetric_forest(f, p_agree).unwrap()
    }

    #[test]
    fn degenerate_cpt_gives_constant_column() {
        let dag = Dag::from_names(&["A"], &[]).unwrap();
        let m = GroundTruthModel::dag(dag, vec![Cpt::bernoulli(1.0)]).unwrap();
        let ds = sample_dag_model(&m, 50, 1).unwrap();
        assert_eq!(ds.column_sums(), vec![50]);
    }

    #[test]
    fn deterministic_copy() {
        let dag = Dag::from_names(&["A", "B"], &[("A", "B")]).unwrap();
        let copy = Cpt { parents: vec![0], rows: vec![[1.0, 0.0], [0.0, 1.0]] };
        let m = GroundTruthModel::dag(dag, vec![Cpt::bernoulli(0.5), copy]).unwrap();
        let ds = sample_dag_model(&m, 500, 3).unwrap();
        assert_eq!(ds.column(VarId(0)).unwrap(), ds.column(VarId(1)).unwrap());
    }

    #[test]
    fn collider_noise_rate() {
        let m = GroundTruthModel::collider(0.1).unwrap();
        let n = 10_000;
        let ds = sample_dag_model(&m, n, 11).unwrap();
        let (x, y, z) = (ds.column(VarId(0)).unwrap(), ds.column(VarId(1)).unwrap(), ds.column(VarId(2)).unwrap());
        let flips = (0..n).filter(|&r| z[r] != x[r] ^ y[r]).count() as f64 / n as f64;
        assert!((flips - 0.1).abs() <= 0.01, "flip rate {flips}");
    }

    #[test]
    fn invalid_rows_are_rejected() {
        let dag = Dag::from_names(&["A"], &[]).unwrap();
        let bad = Cpt { parents: vec![], rows: vec![[0.5, 0.6]] };
        assert!(matches!(GroundTruthModel::dag(dag.clone(), vec![bad]), Err(SynthError::BadRow { .. })));
        let missing = Cpt { parents: vec![], rows: vec![] };
        assert!(matches!(GroundTruthModel::dag(dag, vec![missing]), Err(SynthError::RowCount { .. })));
    }

    #[test]
    fn isolated_vertices_are_independent() {
        let f = Forest::new(vec![VarId(0), VarId(1)], vec!["A".into(), "B".into()], []).unwrap();
        let m = GroundTruthModel::forest(f, ForestParams { marginals: vec![0.5, 0.5], edge_joints: BTreeMap::new() }).unwrap();
        let ds = sample_forest_model(&m, 20_000, 5).unwrap();
        let t = crate::stats::pair_counts(&ds, VarId(0), VarId(1)).unwrap();
        let mi: f64 = crate::stats::mutual_information(&t).unwrap();
        assert!(mi < 1e-3, "mi {mi}");
    }

    #[test]
    fn edge_agreement_rate() {
        let n = 20_000;
        let ds = sample_forest_model(&two_vertex_forest(0.9), n, 8).unwrap();
        let (a, b) = (ds.column(VarId(0)).unwrap(), ds.column(VarId(1)).unwrap());
        let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n as f64;
        assert!((agree - 0.9).abs() <= 0.01, "agree {agree}");
    }

    #[test]
    fn rooting_does_not_change_joint() {
        // asymmetric joint so the two rootings use genuinely different tables
        let f = Forest::new(vec![VarId(0), VarId(1)], vec!["A".into(), "B".into()], [(VarId(0), VarId(1))]).unwrap();
        let joint = [[0.5, 0.1], [0.15, 0.25]];
        let params = ForestParams { marginals: vec![0.4, 0.35], edge_joints: BTreeMap::from([((0, 1), joint)]) };
        let m = GroundTruthModel::forest(f, params).unwrap();
        let n = 100_000;
        let a = sample_forest_model_rooted(&m, n, 21, &[0]).unwrap();
        let b = sample_forest_model_rooted(&m, n, 22, &[1]).unwrap();
        let ta = crate::stats::pair_counts(&a, VarId(0), VarId(1)).unwrap();
        let tb = crate::stats::pair_counts(&b, VarId(0), VarId(1)).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let (pa, pb) = (ta.get(x, y) as f64 / n as f64, tb.get(x, y) as f64 / n as f64);
                assert!((pa - pb).abs() < 0.01);
                assert!((pa - joint[x][y]).abs() < binom_tol(joint[x][y], n));
            }
        }
    }

    #[test]
    fn inconsistent_edge_marginals() {
        let f = Forest::new(vec![VarId(0), VarId(1)], vec!["A".into(), "B".into()], [(VarId(0), VarId(1))]).unwrap();
        let params = ForestParams { marginals: vec![0.5, 0.5], edge_joints: BTreeMap::from([((0, 1), [[0.7, 0.1], [0.1, 0.1]])]) };
        assert!(matches!(GroundTruthModel::forest(f, params), Err(SynthError::InconsistentEdge(..))));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = GroundTruthModel::collider(0.2).unwrap();
        assert_eq!(sample_dag_model(&m, 300, 4).unwrap(), sample_dag_model(&m, 300, 4).unwrap());
        assert_ne!(sample_dag_model(&m, 300, 4).unwrap(), sample_dag_model(&m, 300, 5).unwrap());
    }

    #[test]
    fn itineraries_follow_temporal_order() {
        let m = two_vertex_forest(0.9).with_temporal_order(vec![0, 1]).unwrap();
        let log = sample_itineraries(&m, 400, 2, 2012).unwrap();
        let dedup = crate::ingest::deduplicate(&log);
        let mut singles = 0;
        for visits in dedup.values() {
            if let (Some(a), Some(b)) = (visits.get("A"), visits.get("B")) {
                assert!(a < b);
            }
            if visits.len() == 1 {
                singles += 1;
            }
            assert!(visits.values().all(|d| d.year() == 2012));
        }
        assert!(singles > 0);
        assert_eq!(log.records().len(), dedup.values().map(|v| v.len()).sum::<usize>());
        assert!(sample_itineraries(&two_vertex_forest(0.9), 10, 2, 2012).is_err());
    }

    #[test]
    fn day_offsets_are_strict() {
        for visits in 1..40 {
            let offs: Vec<u64> = day_offsets(visits, 365).collect();
            assert!(offs.windows(2).all(|w| w[0] < w[1]));
            assert!(*offs.last().unwrap() < 365);
        }
    }

    #[test]
    fn random_structures_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..12 {
            let edges = random_tree_edges(n, &mut rng);
            assert_eq!(edges.len(), n.saturating_sub(1));
            let verts: Vec<VarId> = (0..n).map(VarId).collect();
            let f = Forest::new(verts, item_names(n), edges.iter().map(|&(a, b)| (VarId(a), VarId(b)))).unwrap();
            assert!(connected_components(&f).len() == 1);
            let arcs = random_dag_arcs(n, 0.5, &mut rng);
            let verts: Vec<VarId> = (0..n).map(VarId).collect();
            let dag = Dag::new(verts, item_names(n), arcs).unwrap();
            let cpts = random_cpts(&dag, 0.1, 0.9, &mut rng);
            GroundTruthModel::dag(dag, cpts).unwrap();
        }
    }
}

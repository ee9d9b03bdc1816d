//! Minimum-BIC forests.
//!
//! The BIC of a forest decomposes into the empty-graph BIC minus the sum of its
//! edge weights, so the minimum-BIC forest is the maximum-weight spanning forest
//! restricted to positive-weight edges. Greedy admission in weight order is exact
//! on the graphic matroid.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{IndicatorDataset, VarId};
use crate::scalar::Scalar;
use crate::stats::{self, ScoreConfig, StatsError};

#[derive(Debug, Error, PartialEq)]
pub enum ForestError {
    #[error("no variables to learn a forest over")]
    EmptyVariableSet,
    #[error("duplicate variable {0}")]
    DuplicateVariable(VarId),
    #[error("edge ({0}, {1}) references a vertex outside the forest")]
    UnknownVertex(VarId, VarId),
    #[error("self-loop on {0}")]
    SelfLoop(VarId),
    #[error("edge ({0}, {1}) closes a cycle")]
    Cycle(VarId, VarId),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Disjoint sets with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }
}

/// An undirected acyclic graph over dataset variables. Edges are stored as
/// `(min, max)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest {
    vertices: Vec<VarId>,
    names: Vec<String>,
    edges: BTreeSet<(VarId, VarId)>,
}

impl Forest {
    pub fn new(
        vertices: Vec<VarId>,
        names: Vec<String>,
        edges: impl IntoIterator<Item = (VarId, VarId)>,
    ) -> Result<Self, ForestError> {
        assert_eq!(vertices.len(), names.len(), "one name per vertex");
        let index: BTreeMap<VarId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if index.len() != vertices.len() {
            let dup = vertices.iter().find(|v| vertices.iter().filter(|w| w == v).count() > 1).unwrap();
            return Err(ForestError::DuplicateVariable(*dup));
        }
        let mut uf = UnionFind::new(vertices.len());
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(ForestError::SelfLoop(a));
            }
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                return Err(ForestError::UnknownVertex(a, b));
            };
            if !uf.union(ia, ib) {
                return Err(ForestError::Cycle(a, b));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { vertices, names, edges: set })
    }

    pub fn vertices(&self) -> &[VarId] {
        &self.vertices
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VarId) -> Option<&str> {
        self.vertices.iter().position(|&w| w == v).map(|i| self.names[i].as_str())
    }

    pub fn edges(&self) -> &BTreeSet<(VarId, VarId)> {
        &self.edges
    }

    pub fn contains_edge(&self, a: VarId, b: VarId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Edges as name pairs, each pair ordered lexicographically.
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (self.name(a).unwrap().to_string(), self.name(b).unwrap().to_string());
                if x <= y { (x, y) } else { (y, x) }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedEdge<S> {
    pub a: VarId,
    pub b: VarId,
    pub weight: S,
}

/// BIC weights for every pair of `vars`, in `(min, max)` lexicographic order.
pub fn edge_weights<S: Scalar>(
    ds: &IndicatorDataset,
    vars: &[VarId],
    cfg: &ScoreConfig<S>,
) -> Result<Vec<WeightedEdge<S>>, ForestError> {
    let mut pairs = Vec::new();
    for (x, &i) in vars.iter().enumerate() {
        for &j in &vars[x + 1..] {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs.sort_unstable();
    pairs
        .into_par_iter()
        .map(|(a, b)| Ok(WeightedEdge { a, b, weight: stats::bic_edge_weight(ds, a, b, cfg)? }))
        .collect()
}

/// Learns the minimum-BIC forest over `vars`.
///
/// Candidate edges are taken in decreasing weight order (ties: lexicographic on the
/// ordered pair) and admitted iff the weight is strictly positive and the endpoints
/// lie in different trees.
pub fn learn_min_bic_forest<S: Scalar>(
    ds: &IndicatorDataset,
    vars: &[VarId],
    cfg: &ScoreConfig<S>,
) -> Result<Forest, ForestError> {
    if vars.is_empty() {
        return Err(ForestError::EmptyVariableSet);
    }
    for &v in vars {
        ds.check(v).map_err(StatsError::from)?;
    }
    if ds.n_rows() < 2 {
        return Err(StatsError::TooFewRows { needed: 2, found: ds.n_rows() }.into());
    }
    let names: Vec<String> = vars.iter().map(|&v| ds.name(v).to_string()).collect();
    let index: BTreeMap<VarId, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if index.len() != vars.len() {
        return Forest::new(vars.to_vec(), names, []);
    }

    let mut candidates = edge_weights(ds, vars, cfg)?;
    candidates.retain(|e| e.weight > S::zero());
    candidates.sort_by(|x, y| {
        y.weight
            .partial_cmp(&x.weight)
            .unwrap_or(Ordering::Equal)
            .then_with(|| (x.a, x.b).cmp(&(y.a, y.b)))
    });

    let mut uf = UnionFind::new(vars.len());
    let mut chosen = Vec::new();
    for e in candidates {
        if uf.union(index[&e.a], index[&e.b]) {
            chosen.push((e.a, e.b));
        }
    }
    Forest::new(vars.to_vec(), names, chosen)
}

/// Trees of the forest, each sorted, ordered by smallest member.
pub fn connected_components(f: &Forest) -> Vec<Vec<VarId>> {
    let index: BTreeMap<VarId, usize> = f.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut uf = UnionFind::new(f.vertices.len());
    for &(a, b) in &f.edges {
        uf.union(index[&a], index[&b]);
    }
    let mut groups: BTreeMap<usize, Vec<VarId>> = BTreeMap::new();
    for (i, &v) in f.vertices.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(v);
    }
    let mut out: Vec<Vec<VarId>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}

/// Orients each tree away from its smallest vertex: the returned map gives each
/// non-root vertex its parent.
pub fn root_forest(f: &Forest) -> BTreeMap<VarId, VarId> {
    let mut adj: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
    for &(a, b) in &f.edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut parent = BTreeMap::new();
    for comp in connected_components(f) {
        let root = comp[0];
        let mut stack = vec![root];
        let mut seen = BTreeSet::from([root]);
        while let Some(v) = stack.pop() {
            for &w in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(w) {
                    parent.insert(w, v);
                    stack.push(w);
                }
            }
        }
    }
    parent
}

/// Penalized log-likelihood of the forest model, computed by rooting every tree and
/// summing DAG family scores. `-2` times this is the forest's BIC when the penalty is
/// `ln(N) / 2`.
pub fn forest_score<S: Scalar>(ds: &IndicatorDataset, f: &Forest, cfg: &ScoreConfig<S>) -> Result<S, ForestError> {
    let parent = root_forest(f);
    let mut total = S::zero();
    for &v in &f.vertices {
        let ps: Vec<VarId> = parent.get(&v).into_iter().copied().collect();
        total = total + stats::dag_family_score(ds, v, &ps, cfg)?;
    }
    Ok(total)
}

/// BIC (`-2 loglik + ln(N) * df`, lower is better) of a forest.
pub fn forest_bic<S: Scalar>(ds: &IndicatorDataset, f: &Forest) -> Result<S, ForestError> {
    let score: S = forest_score(ds, f, &ScoreConfig::bic(ds.n_rows()))?;
    Ok(-S::from_real(2.0) * score)
}

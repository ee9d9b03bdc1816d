//! Degree, betweenness and closeness centrality on small unweighted undirected graphs.
//!
//! Betweenness counts ordered pairs `(s, t)`, so on an undirected graph it is twice
//! the usual unordered-pair value; the centre of a star on `n` vertices scores
//! `(n - 1)(n - 2)`. Closeness is `(n - 1) / sum of distances`, and 0 for a vertex
//! that cannot reach every other vertex.

use std::collections::VecDeque;

use thiserror::Error;

use crate::forest::Forest;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("unknown vertex name {0:?}")]
    UnknownName(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    names: Vec<String>,
    adj: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    /// Builds a simple graph; duplicate edges and self-loops are dropped.
    pub fn new(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, MetricsError> {
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n {
                return Err(MetricsError::UnknownVertex(a));
            }
            if b >= n {
                return Err(MetricsError::UnknownVertex(b));
            }
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { names, adj })
    }

    pub fn from_forest(f: &Forest) -> Self {
        let pos = |v| f.vertices().iter().position(|&w| w == v).expect("edge endpoint in forest");
        let edges: Vec<(usize, usize)> = f.edges().iter().map(|&(a, b)| (pos(a), pos(b))).collect();
        Self::new(f.names().to_vec(), &edges).expect("forest edges are valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, MetricsError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| MetricsError::UnknownName(name.to_string()))
    }

    fn check(&self, v: usize) -> Result<(), MetricsError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(MetricsError::UnknownVertex(v))
        }
    }

    /// Hop distances from `src`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

pub fn degree(g: &UndirectedGraph, v: usize) -> Result<usize, MetricsError> {
    g.check(v)?;
    Ok(g.adj[v].len())
}

/// Ordered-pair betweenness of every vertex (Brandes).
pub fn all_betweenness<S: Scalar>(g: &UndirectedGraph) -> Vec<S> {
    let n = g.len();
    let mut centrality = vec![S::zero(); n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![S::zero(); n];
        let mut dist: Vec<Option<usize>> = vec![None; n];
        sigma[s] = S::one();
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            let dv = dist[v].unwrap();
            for &w in &g.adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
                if dist[w] == Some(dv + 1) {
                    sigma[w] = sigma[w] + sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![S::zero(); n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] = delta[v] + sigma[v] / sigma[w] * (S::one() + delta[w]);
            }
            if w != s {
                centrality[w] = centrality[w] + delta[w];
            }
        }
    }
    centrality
}

pub fn betweenness<S: Scalar>(g: &UndirectedGraph, v: usize) -> Result<S, MetricsError> {
    g.check(v)?;
    Ok(all_betweenness(g)[v])
}

pub fn closeness<S: Scalar>(g: &UndirectedGraph, v: usize) -> Result<S, MetricsError> {
    g.check(v)?;
    let dist = g.bfs_distances(v);
    let mut total = 0usize;
    for (u, d) in dist.iter().enumerate() {
        if u == v {
            continue;
        }
        match d {
            Some(d) => total += d,
            None => return Ok(S::zero()),
        }
    }
    if total == 0 {
        return Ok(S::zero());
    }
    Ok(S::from_count(g.len() as u64 - 1) / S::from_count(total as u64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralityRecord<S> {
    pub vertex: String,
    pub degree: usize,
    pub betweenness: S,
    pub closeness: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport<S> {
    pub records: Vec<CentralityRecord<S>>,
}

impl<S: Scalar> MetricsReport<S> {
    pub fn compute(g: &UndirectedGraph) -> Self {
        let btw = all_betweenness::<S>(g);
        let records = (0..g.len())
            .map(|v| CentralityRecord {
                vertex: g.names[v].clone(),
                degree: g.adj[v].len(),
                betweenness: btw[v],
                closeness: closeness(g, v).expect("vertex in range"),
            })
            .collect();
        Self { records }
    }

    /// Records sorted by vertex name.
    pub fn sorted(mut self) -> Self {
        self.records.sort_by(|a, b| a.vertex.cmp(&b.vertex));
        self
    }

    pub fn get(&self, name: &str) -> Option<&CentralityRecord<S>> {
        self.records.iter().find(|r| r.vertex == name)
    }
}

//! Score-based DAG learning.
//!
//! [`hill_climb`] starts from the empty graph and repeatedly applies the best strictly
//! improving single-arc move (add, delete or reverse) that keeps the graph acyclic.
//! Restarts perturb the first local optimum by toggling random arcs and climb again;
//! the best DAG over all climbs wins. Every random choice comes from a ChaCha8
//! stream keyed by `(seed, restart index)`, so results do not depend on thread
//! scheduling.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{IndicatorDataset, VarId};
use crate::scalar::Scalar;
use crate::stats::{self, ScoreConfig, StatsError};

#[derive(Debug, Error, PartialEq)]
pub enum DagError {
    #[error("arc ({0}, {1}) references an unknown vertex")]
    UnknownVertex(usize, usize),
    #[error("self-arc on vertex {0}")]
    SelfArc(usize),
    #[error("arcs in both directions between {0} and {1}")]
    BothDirections(usize, usize),
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("unknown vertex {0}")]
    UnknownIndex(usize),
    #[error("vertex {0} is not a variable of the dataset")]
    NotInDataset(VarId),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid search configuration: {0}")]
    BadConfig(&'static str),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// True iff Kahn elimination consumes every vertex.
pub fn is_acyclic(n_vertices: usize, arcs: &[(usize, usize)]) -> Result<bool, DagError> {
    let mut indeg = vec![0usize; n_vertices];
    let mut out = vec![Vec::new(); n_vertices];
    for &(u, v) in arcs {
        if u >= n_vertices || v >= n_vertices {
            return Err(DagError::UnknownVertex(u, v));
        }
        out[u].push(v);
        indeg[v] += 1;
    }
    let mut ready: Vec<usize> = (0..n_vertices).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(w);
            }
        }
    }
    Ok(seen == n_vertices)
}

/// A directed acyclic graph over dataset variables. Arcs are `(parent, child)`
/// pairs of positions in [`Dag::vertices`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    vars: Vec<VarId>,
    names: Vec<String>,
    arcs: BTreeSet<(usize, usize)>,
}

impl Dag {
    pub fn new(
        vars: Vec<VarId>,
        names: Vec<String>,
        arcs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, DagError> {
        assert_eq!(vars.len(), names.len(), "one name per vertex");
        let n = vars.len();
        let arcs: BTreeSet<(usize, usize)> = arcs.into_iter().collect();
        for &(u, v) in &arcs {
            if u >= n || v >= n {
                return Err(DagError::UnknownVertex(u, v));
            }
            if u == v {
                return Err(DagError::SelfArc(u));
            }
            if arcs.contains(&(v, u)) {
                return Err(DagError::BothDirections(u.min(v), u.max(v)));
            }
        }
        if !is_acyclic(n, &arcs.iter().copied().collect::<Vec<_>>())? {
            return Err(DagError::Cyclic);
        }
        Ok(Self { vars, names, arcs })
    }

    /// Convenience constructor keyed by name; vertex `i` becomes `VarId(i)`.
    pub fn from_names(names: &[&str], arcs: &[(&str, &str)]) -> Result<Self, DagError> {
        let idx = |s: &str| names.iter().position(|n| *n == s).ok_or(DagError::UnknownVertex(usize::MAX, usize::MAX));
        let arcs = arcs.iter().map(|&(a, b)| Ok((idx(a)?, idx(b)?))).collect::<Result<Vec<_>, DagError>>()?;
        Self::new(
            (0..names.len()).map(VarId).collect(),
            names.iter().map(|s| s.to_string()).collect(),
            arcs,
        )
    }

    pub fn empty(vars: Vec<VarId>, names: Vec<String>) -> Self {
        Self { vars, names, arcs: BTreeSet::new() }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vertices(&self) -> &[VarId] {
        &self.vars
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arcs(&self) -> &BTreeSet<(usize, usize)> {
        &self.arcs
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Arcs as `(parent name, child name)`.
    pub fn named_arcs(&self) -> BTreeSet<(String, String)> {
        self.arcs.iter().map(|&(u, v)| (self.names[u].clone(), self.names[v].clone())).collect()
    }

    pub fn parents(&self, v: usize) -> Result<BTreeSet<usize>, DagError> {
        if v >= self.len() {
            return Err(DagError::UnknownIndex(v));
        }
        Ok(self.arcs.iter().filter(|&&(_, c)| c == v).map(|&(p, _)| p).collect())
    }
}

/// Lexicographically smallest (by vertex name) topological order of `g`.
pub fn statistical_time(g: &Dag) -> Vec<usize> {
    let n = g.len();
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(u, v) in &g.arcs {
        out[u].push(v);
        indeg[v] += 1;
    }
    let mut heap: BinaryHeap<Reverse<(&str, usize)>> =
        (0..n).filter(|&v| indeg[v] == 0).map(|v| Reverse((g.names[v].as_str(), v))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, v))) = heap.pop() {
        order.push(v);
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse((g.names[w].as_str(), w)));
            }
        }
    }
    debug_assert_eq!(order.len(), n, "Dag invariant guarantees acyclicity");
    order
}

fn check_vertices(ds: &IndicatorDataset, g: &Dag) -> Result<(), DagError> {
    match g.vars.iter().find(|&&v| !ds.contains(v)) {
        Some(&v) => Err(DagError::NotInDataset(v)),
        None => Ok(()),
    }
}

fn parent_vars(g: &Dag, v: usize) -> Vec<VarId> {
    g.arcs.iter().filter(|&&(_, c)| c == v).map(|&(p, _)| g.vars[p]).collect()
}

/// Penalized log-likelihood of `g`, summed over families in vertex order.
pub fn score_dag<S: Scalar>(ds: &IndicatorDataset, g: &Dag, cfg: &ScoreConfig<S>) -> Result<S, DagError> {
    check_vertices(ds, g)?;
    let mut total = S::zero();
    for v in 0..g.len() {
        total = total + stats::dag_family_score(ds, g.vars[v], &parent_vars(g, v), cfg)?;
    }
    Ok(total)
}

/// Unpenalized log-likelihood and total free-parameter count of `g`.
pub fn score_terms<S: Scalar>(ds: &IndicatorDataset, g: &Dag) -> Result<(S, u64), DagError> {
    check_vertices(ds, g)?;
    let mut ll = S::zero();
    let mut df = 0u64;
    for v in 0..g.len() {
        let ps = parent_vars(g, v);
        ll = ll + stats::family_log_likelihood::<S>(ds, g.vars[v], &ps)?;
        df += stats::family_df(ds, g.vars[v], &ps)?;
    }
    Ok((ll, df))
}

/// A penalized score kept as its parts. Subtracting two of these subtracts the
/// likelihood and penalty terms separately, so differences between nearby scores
/// do not lose the low bits that rounding `ll - penalty * df` would.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DagScore<S> {
    pub log_likelihood: S,
    pub df: u64,
    pub penalty: S,
}

impl<S: Scalar> DagScore<S> {
    pub fn penalty_term(&self) -> S {
        self.penalty * S::from_count(self.df)
    }

    pub fn total(&self) -> S {
        self.log_likelihood - self.penalty_term()
    }
}

impl<S: Scalar> std::ops::Sub for DagScore<S> {
    type Output = S;

    fn sub(self, rhs: Self) -> S {
        (self.log_likelihood - rhs.log_likelihood) - (self.penalty_term() - rhs.penalty_term())
    }
}

/// Score of `g` under `cfg`, split into likelihood and penalty.
pub fn score_parts<S: Scalar>(ds: &IndicatorDataset, g: &Dag, cfg: &ScoreConfig<S>) -> Result<DagScore<S>, DagError> {
    let (log_likelihood, df) = score_terms(ds, g)?;
    Ok(DagScore { log_likelihood, df, penalty: cfg.penalty })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig<S> {
    /// Penalty per free parameter; `None` means `ln(N) / 2`.
    pub penalty: Option<S>,
    pub restarts: usize,
    /// Arcs toggled per restart.
    pub perturbation_size: usize,
    pub seed: u64,
    /// Cap on moves per climb.
    pub max_iterations: usize,
    /// Learn over the status variable too.
    pub include_status: bool,
}

impl<S: Scalar> Default for SearchConfig<S> {
    fn default() -> Self {
        Self {
            penalty: None,
            restarts: 500,
            perturbation_size: 2,
            seed: 0,
            max_iterations: 10_000,
            include_status: false,
        }
    }
}

impl<S: Scalar> SearchConfig<S> {
    pub fn score_config(&self, n_rows: usize) -> Result<ScoreConfig<S>, DagError> {
        match self.penalty {
            Some(k) => Ok(ScoreConfig::with_penalty(k)?),
            None => Ok(ScoreConfig::bic(n_rows)),
        }
    }

    fn validate(&self) -> Result<(), DagError> {
        if self.max_iterations == 0 {
            return Err(DagError::BadConfig("max_iterations must be at least 1"));
        }
        if self.perturbation_size == 0 {
            return Err(DagError::BadConfig("perturbation_size must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

/// One accepted move. For `Reverse`, `(from, to)` is the arc before reversal.
#[derive(Clone, Debug, PartialEq)]
pub struct MoveRecord<S> {
    pub kind: MoveKind,
    pub from: usize,
    pub to: usize,
    pub score_after: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClimbTrace<S> {
    /// `None` for the initial climb, otherwise the restart index.
    pub restart: Option<usize>,
    pub start_arcs: Vec<(usize, usize)>,
    pub start_score: S,
    pub moves: Vec<MoveRecord<S>>,
}

impl<S: Scalar> ClimbTrace<S> {
    pub fn final_score(&self) -> S {
        self.moves.last().map(|m| m.score_after).unwrap_or(self.start_score)
    }

    /// Replays the moves, returning the arc set after each one.
    pub fn replay(&self) -> Vec<BTreeSet<(usize, usize)>> {
        let mut arcs: BTreeSet<(usize, usize)> = self.start_arcs.iter().copied().collect();
        let mut out = Vec::with_capacity(self.moves.len());
        for m in &self.moves {
            match m.kind {
                MoveKind::Add => {
                    arcs.insert((m.from, m.to));
                }
                MoveKind::Delete => {
                    arcs.remove(&(m.from, m.to));
                }
                MoveKind::Reverse => {
                    arcs.remove(&(m.from, m.to));
                    arcs.insert((m.to, m.from));
                }
            }
            out.push(arcs.clone());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HillClimbResult<S> {
    pub dag: Dag,
    pub score: S,
    pub empty_score: S,
    pub climbs: Vec<ClimbTrace<S>>,
}

/// Memoized family scores shared by all climbs of one search.
struct FamilyScorer<'a, S> {
    ds: &'a IndicatorDataset,
    vars: &'a [VarId],
    cfg: ScoreConfig<S>,
    cache: Mutex<HashMap<(usize, Vec<usize>), S>>,
}

impl<S: Scalar> FamilyScorer<'_, S> {
    /// `parents` must be sorted.
    fn score(&self, child: usize, parents: &[usize]) -> Result<S, DagError> {
        let key = (child, parents.to_vec());
        if let Some(&s) = self.cache.lock().unwrap().get(&key) {
            return Ok(s);
        }
        let pv: Vec<VarId> = parents.iter().map(|&p| self.vars[p]).collect();
        let s = stats::dag_family_score(self.ds, self.vars[child], &pv, &self.cfg)?;
        self.cache.lock().unwrap().insert(key, s);
        Ok(s)
    }
}

/// Working graph for a climb: parent lists plus cached family scores.
#[derive(Clone)]
struct State<S> {
    parents: Vec<Vec<usize>>,
    family: Vec<S>,
}

impl<S: Scalar> State<S> {
    fn new(n: usize, arcs: &BTreeSet<(usize, usize)>, scorer: &FamilyScorer<S>) -> Result<Self, DagError> {
        let mut parents = vec![Vec::new(); n];
        for &(u, v) in arcs {
            parents[v].push(u);
        }
        for p in &mut parents {
            p.sort_unstable();
        }
        let family = (0..n).map(|v| scorer.score(v, &parents[v])).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { parents, family })
    }

    fn total(&self) -> S {
        self.family.iter().fold(S::zero(), |acc, &x| acc + x)
    }

    fn has_arc(&self, u: usize, v: usize) -> bool {
        self.parents[v].binary_search(&u).is_ok()
    }

    fn arcs(&self) -> BTreeSet<(usize, usize)> {
        self.parents.iter().enumerate().flat_map(|(v, ps)| ps.iter().map(move |&u| (u, v))).collect()
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.parents.len()];
        for (v, ps) in self.parents.iter().enumerate() {
            for &u in ps {
                ch[u].push(v);
            }
        }
        ch
    }

    fn with_parent(&self, v: usize, u: usize) -> Vec<usize> {
        let mut p = self.parents[v].clone();
        let at = p.binary_search(&u).unwrap_err();
        p.insert(at, u);
        p
    }

    fn without_parent(&self, v: usize, u: usize) -> Vec<usize> {
        self.parents[v].iter().copied().filter(|&x| x != u).collect()
    }

    fn set_parents(&mut self, v: usize, p: Vec<usize>, scorer: &FamilyScorer<S>) -> Result<(), DagError> {
        self.family[v] = scorer.score(v, &p)?;
        self.parents[v] = p;
        Ok(())
    }
}

/// `reach[a][b]`: a directed path from `a` to `b` exists (length ≥ 1).
fn reachability(children: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = children.len();
    let mut reach = vec![vec![false; n]; n];
    for (s, row) in reach.iter_mut().enumerate() {
        let mut stack: Vec<usize> = children[s].clone();
        while let Some(v) = stack.pop() {
            if !row[v] {
                row[v] = true;
                stack.extend(children[v].iter().copied());
            }
        }
    }
    reach
}

/// Path `u -> ... -> v` that avoids the direct arc `u -> v`.
fn indirect_path(children: &[Vec<usize>], u: usize, v: usize) -> bool {
    let mut seen = vec![false; children.len()];
    let mut stack: Vec<usize> = children[u].iter().copied().filter(|&w| w != v).collect();
    while let Some(w) = stack.pop() {
        if w == v {
            return true;
        }
        if !seen[w] {
            seen[w] = true;
            stack.extend(children[w].iter().copied());
        }
    }
    false
}

/// Smallest delta that counts as an improvement. It sits well above the rounding
/// error of re-summing the family scores, so accepted moves raise the total.
fn improvement_threshold<S: Scalar>(n: usize, total: S) -> S {
    S::epsilon() * S::from_count(64 * (n as u64 + 8)) * total.abs().max(S::one())
}

struct Candidate<S> {
    kind: MoveKind,
    from: usize,
    to: usize,
    delta: S,
}

fn best_move<S: Scalar>(state: &State<S>, scorer: &FamilyScorer<S>) -> Result<Option<Candidate<S>>, DagError> {
    let n = state.parents.len();
    let children = state.children();
    let reach = reachability(&children);
    let mut best: Option<Candidate<S>> = None;
    let mut consider = |c: Candidate<S>| {
        let better = match &best {
            None => true,
            Some(b) => match c.delta.partial_cmp(&b.delta) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Equal) => (c.kind, c.from, c.to) < (b.kind, b.from, b.to),
                _ => false,
            },
        };
        if better {
            best = Some(c);
        }
    };

    for u in 0..n {
        for v in 0..n {
            if u == v || state.has_arc(u, v) || state.has_arc(v, u) || reach[v][u] {
                continue;
            }
            let delta = scorer.score(v, &state.with_parent(v, u))? - state.family[v];
            consider(Candidate { kind: MoveKind::Add, from: u, to: v, delta });
        }
    }
    for v in 0..n {
        for &u in &state.parents[v] {
            let drop = scorer.score(v, &state.without_parent(v, u))? - state.family[v];
            consider(Candidate { kind: MoveKind::Delete, from: u, to: v, delta: drop });
            if !indirect_path(&children, u, v) {
                let gain = scorer.score(u, &state.with_parent(u, v))? - state.family[u];
                consider(Candidate { kind: MoveKind::Reverse, from: u, to: v, delta: drop + gain });
            }
        }
    }
    Ok(best)
}

fn climb<S: Scalar>(
    mut state: State<S>,
    scorer: &FamilyScorer<S>,
    max_iterations: usize,
    restart: Option<usize>,
) -> Result<(State<S>, ClimbTrace<S>), DagError> {
    let n = state.parents.len();
    let mut trace = ClimbTrace {
        restart,
        start_arcs: state.arcs().into_iter().collect(),
        start_score: state.total(),
        moves: Vec::new(),
    };
    let mut current = trace.start_score;
    for _ in 0..max_iterations {
        let Some(m) = best_move(&state, scorer)? else { break };
        if m.delta <= improvement_threshold(n, current) {
            break;
        }
        match m.kind {
            MoveKind::Add => {
                let p = state.with_parent(m.to, m.from);
                state.set_parents(m.to, p, scorer)?;
            }
            MoveKind::Delete => {
                let p = state.without_parent(m.to, m.from);
                state.set_parents(m.to, p, scorer)?;
            }
            MoveKind::Reverse => {
                let pv = state.without_parent(m.to, m.from);
                state.set_parents(m.to, pv, scorer)?;
                let pu = state.with_parent(m.from, m.to);
                state.set_parents(m.from, pu, scorer)?;
            }
        }
        let next = state.total();
        debug_assert!(next > current, "accepted move must raise the score");
        current = next;
        trace.moves.push(MoveRecord { kind: m.kind, from: m.from, to: m.to, score_after: next });
    }
    Ok((state, trace))
}

/// Toggles up to `size` random arcs, skipping toggles that would create a cycle.
fn perturb<S: Scalar>(
    state: &State<S>,
    size: usize,
    rng: &mut ChaCha8Rng,
    scorer: &FamilyScorer<S>,
) -> Result<State<S>, DagError> {
    let n = state.parents.len();
    let mut arcs = state.arcs();
    if n < 2 {
        return State::new(n, &arcs, scorer);
    }
    let mut toggled = 0;
    let mut attempts = 0;
    while toggled < size && attempts < 100 * size {
        attempts += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n - 1);
        let v = if v >= u { v + 1 } else { v };
        if arcs.remove(&(u, v)) {
            toggled += 1;
            continue;
        }
        if arcs.contains(&(v, u)) {
            continue;
        }
        arcs.insert((u, v));
        if is_acyclic(n, &arcs.iter().copied().collect::<Vec<_>>())? {
            toggled += 1;
        } else {
            arcs.remove(&(u, v));
        }
    }
    State::new(n, &arcs, scorer)
}

/// Generator for restart `index` (stream 0 is unused so every restart gets a fresh stream).
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Learns a DAG over the dataset's item variables (plus status if configured).
pub fn hill_climb<S: Scalar>(ds: &IndicatorDataset, cfg: &SearchConfig<S>) -> Result<HillClimbResult<S>, DagError> {
    cfg.validate()?;
    if ds.n_rows() == 0 {
        return Err(DagError::EmptyDataset);
    }
    let vars = ds.variables(cfg.include_status);
    let names: Vec<String> = vars.iter().map(|&v| ds.name(v).to_string()).collect();
    let n = vars.len();
    let scorer = FamilyScorer {
        ds,
        vars: &vars,
        cfg: cfg.score_config(ds.n_rows())?,
        cache: Mutex::new(HashMap::new()),
    };

    let empty = State::new(n, &BTreeSet::new(), &scorer)?;
    let empty_score = empty.total();
    let (local, first) = climb(empty, &scorer, cfg.max_iterations, None)?;

    let restarts = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(cfg.seed, r);
            let start = perturb(&local, cfg.perturbation_size, &mut rng, &scorer)?;
            climb(start, &scorer, cfg.max_iterations, Some(r))
        })
        .collect::<Result<Vec<_>, DagError>>()?;

    let mut best_arcs = local.arcs();
    let mut best_score = local.total();
    let mut climbs = vec![first];
    for (state, trace) in restarts {
        let (score, arcs) = (state.total(), state.arcs());
        let wins = match score.partial_cmp(&best_score) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => arcs < best_arcs,
            _ => false,
        };
        if wins {
            best_score = score;
            best_arcs = arcs;
        }
        climbs.push(trace);
    }

    let dag = Dag::new(vars, names, best_arcs)?;
    Ok(HillClimbResult { dag, score: best_score, empty_score, climbs })
}

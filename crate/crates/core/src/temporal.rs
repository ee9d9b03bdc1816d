//! Physical time: which of two items subjects tend to visit first, and whether DAG
//! arcs point the same way.

use crate::dag::Dag;
use crate::ingest::Deduplicated;

/// First-visit precedence between items `i` and `j` over subjects who visited both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecedenceEntry {
    pub i: String,
    pub j: String,
    /// First visit to `i` strictly before first visit to `j`.
    pub i_first: u64,
    pub j_first: u64,
    /// Same day.
    pub tied: u64,
    pub both: u64,
}

impl PrecedenceEntry {
    pub fn swapped(&self) -> Self {
        Self {
            i: self.j.clone(),
            j: self.i.clone(),
            i_first: self.j_first,
            j_first: self.i_first,
            tied: self.tied,
            both: self.both,
        }
    }
}

pub fn precedence_counts(dedup: &Deduplicated, i: &str, j: &str) -> PrecedenceEntry {
    let mut e = PrecedenceEntry { i: i.to_string(), j: j.to_string(), i_first: 0, j_first: 0, tied: 0, both: 0 };
    for visits in dedup.values() {
        if let (Some(di), Some(dj)) = (visits.get(i), visits.get(j)) {
            e.both += 1;
            match di.cmp(dj) {
                std::cmp::Ordering::Less => e.i_first += 1,
                std::cmp::Ordering::Greater => e.j_first += 1,
                std::cmp::Ordering::Equal => e.tied += 1,
            }
        }
    }
    e
}

/// Precedence entries for every unordered pair of `items`, in input order.
pub fn precedence_table(dedup: &Deduplicated, items: &[String]) -> Vec<PrecedenceEntry> {
    let mut out = Vec::new();
    for (k, i) in items.iter().enumerate() {
        for j in &items[k + 1..] {
            out.push(precedence_counts(dedup, i, j));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `i` tends to be visited before `j`.
    Forward,
    Backward,
    Unordered,
}

/// Majority rule on strict precedences; ties between the two counts leave the pair unordered.
pub fn physical_order(e: &PrecedenceEntry) -> Direction {
    match e.i_first.cmp(&e.j_first) {
        std::cmp::Ordering::Greater => Direction::Forward,
        std::cmp::Ordering::Less => Direction::Backward,
        std::cmp::Ordering::Equal => Direction::Unordered,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    Disagree,
    Tie,
    Insufficient,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Agree => "agree",
            Verdict::Disagree => "disagree",
            Verdict::Tie => "tie",
            Verdict::Insufficient => "insufficient",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcAgreement {
    pub parent: String,
    pub child: String,
    pub parent_first: u64,
    pub child_first: u64,
    pub tied: u64,
    pub both: u64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AgreementReport {
    pub arcs: Vec<ArcAgreement>,
}

impl AgreementReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.arcs.iter().filter(|a| a.verdict == v).count()
    }

    /// Share of agreeing arcs among arcs with a direction call (agree or disagree).
    pub fn agreement_fraction(&self) -> Option<f64> {
        let agree = self.count(Verdict::Agree);
        let decided = agree + self.count(Verdict::Disagree);
        (decided > 0).then(|| agree as f64 / decided as f64)
    }
}

/// Classifies every arc of `g` (in arc order) against physical precedence. Arcs
/// backed by fewer than `min_support` subjects who visited both endpoints are
/// `Insufficient`.
pub fn conjecture_check(g: &Dag, dedup: &Deduplicated, min_support: u64) -> AgreementReport {
    let arcs = g
        .arcs()
        .iter()
        .map(|&(u, v)| {
            let (pu, cv) = (&g.names()[u], &g.names()[v]);
            let e = precedence_counts(dedup, pu, cv);
            let verdict = if e.both < min_support {
                Verdict::Insufficient
            } else {
                match physical_order(&e) {
                    Direction::Forward => Verdict::Agree,
                    Direction::Backward => Verdict::Disagree,
                    Direction::Unordered => Verdict::Tie,
                }
            };
            ArcAgreement {
                parent: pu.clone(),
                child: cv.clone(),
                parent_first: e.i_first,
                child_first: e.j_first,
                tied: e.tied,
                both: e.both,
                verdict,
            }
        })
        .collect();
    AgreementReport { arcs }
}

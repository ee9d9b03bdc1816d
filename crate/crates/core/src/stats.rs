//! Sufficient statistics and scores: contingency tables, plug-in mutual information,
//! BIC edge weights for forests and decomposable family scores for DAGs.
//!
//! All logarithms are natural. A score is a penalized log-likelihood to be
//! maximized: `loglik - penalty * free_parameters`. With `penalty = ln(N) / 2` this is
//! `-BIC / 2`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use thiserror::Error;

use crate::dataset::{DatasetError, IndicatorDataset, VarId};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("a variable cannot be paired with itself ({0})")]
    SameVariable(VarId),
    #[error("child {0} listed among its own parents")]
    ChildInParents(VarId),
    #[error("duplicate parent {0}")]
    DuplicateParent(VarId),
    #[error("contingency table is empty")]
    EmptyTable,
    #[error("penalty must be finite and non-negative, got {0}")]
    BadPenalty(f64),
    #[error("need at least {needed} rows, dataset has {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("parent configuration space too large")]
    ParameterOverflow,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Joint counts of two discrete variables, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    cells: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(rows: usize, cols: usize, cells: Vec<u64>) -> Self {
        assert_eq!(cells.len(), rows * cols, "cell count must equal rows * cols");
        let total = cells.iter().sum();
        Self { rows, cols, cells, total }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.cells[a * self.cols + b]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn row_margins(&self) -> Vec<u64> {
        self.cells.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_margins(&self) -> Vec<u64> {
        (0..self.cols).map(|b| (0..self.rows).map(|a| self.get(a, b)).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for b in 0..self.cols {
            for a in 0..self.rows {
                cells.push(self.get(a, b));
            }
        }
        Self { rows: self.cols, cols: self.rows, cells, total: self.total }
    }
}

/// Penalty per free parameter, natural log scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreConfig<S> {
    pub penalty: S,
}

impl<S: Scalar> ScoreConfig<S> {
    /// The BIC penalty `ln(N) / 2`.
    pub fn bic(n_rows: usize) -> Self {
        let n = S::from_count(n_rows.max(1) as u64);
        Self { penalty: n.ln() / S::from_real(2.0) }
    }

    pub fn with_penalty(penalty: S) -> Result<Self, StatsError> {
        if !penalty.is_finite() || penalty < S::zero() {
            return Err(StatsError::BadPenalty(penalty.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { penalty })
    }
}

pub fn pair_counts(ds: &IndicatorDataset, i: VarId, j: VarId) -> Result<ContingencyTable, StatsError> {
    if i == j {
        return Err(StatsError::SameVariable(i));
    }
    let xi = ds.column(i)?;
    let xj = ds.column(j)?;
    let (ri, rj) = (ds.cardinality(i), ds.cardinality(j));
    let mut cells = vec![0u64; ri * rj];
    for (&a, &b) in xi.iter().zip(xj) {
        cells[a as usize * rj + b as usize] += 1;
    }
    Ok(ContingencyTable { rows: ri, cols: rj, cells, total: ds.n_rows() as u64 })
}

/// Plug-in entropy (nats) of a count vector.
pub fn entropy<S: Scalar>(counts: &[u64]) -> S {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return S::zero();
    }
    let n = S::from_count(total);
    -counts.iter().map(|&c| S::xlogx_ratio(c, total)).sum::<S>() / n
}

/// Plug-in mutual information in nats.
///
/// Terms are summed in sorted order so a table and its transpose give bit-identical
/// results.
pub fn mutual_information<S: Scalar>(tab: &ContingencyTable) -> Result<S, StatsError> {
    if tab.total == 0 {
        return Err(StatsError::EmptyTable);
    }
    let n = tab.total as u128;
    let ra = tab.row_margins();
    let cb = tab.col_margins();
    let mut terms: Vec<S> = Vec::with_capacity(tab.cells.len());
    for a in 0..tab.rows {
        for b in 0..tab.cols {
            let c = tab.get(a, b);
            if c == 0 {
                continue;
            }
            let num = S::from_u128(c as u128 * n).expect("finite");
            let den = S::from_u128(ra[a] as u128 * cb[b] as u128).expect("finite");
            terms.push(S::from_count(c) * (num / den).ln());
        }
    }
    terms.sort_by(|x, y| x.partial_cmp(y).expect("finite terms"));
    let mi = terms.into_iter().sum::<S>() / S::from_count(tab.total);
    Ok(mi.max(S::zero()))
}

/// Score gain of joining `i` and `j` in a forest, on the BIC (`-2 loglik`) scale:
/// `2 N MI - 2 penalty (r_i - 1)(r_j - 1)`. With the default penalty this is
/// `2 N MI - ln(N) * df`.
pub fn bic_edge_weight<S: Scalar>(
    ds: &IndicatorDataset,
    i: VarId,
    j: VarId,
    cfg: &ScoreConfig<S>,
) -> Result<S, StatsError> {
    if ds.n_rows() < 2 {
        return Err(StatsError::TooFewRows { needed: 2, found: ds.n_rows() });
    }
    let tab = pair_counts(ds, i, j)?;
    let mi: S = mutual_information(&tab)?;
    let df = ((ds.cardinality(i) - 1) * (ds.cardinality(j) - 1)) as u64;
    let two = S::from_real(2.0);
    Ok(two * S::from_count(ds.n_rows() as u64) * mi - two * cfg.penalty * S::from_count(df))
}

/// Free parameters of a family: `(r_child - 1) * prod(r_parent)`.
pub fn family_df(ds: &IndicatorDataset, child: VarId, parents: &[VarId]) -> Result<u64, StatsError> {
    let mut q: u64 = 1;
    for &p in parents {
        q = q.checked_mul(ds.cardinality(p) as u64).ok_or(StatsError::ParameterOverflow)?;
    }
    q.checked_mul(ds.cardinality(child) as u64 - 1).ok_or(StatsError::ParameterOverflow)
}

const DENSE_LIMIT: u64 = 1 << 16;

/// Maximized conditional log-likelihood `sum_rows ln p(child | parents)`.
///
/// Parents are canonicalized (sorted), so the result does not depend on their order.
/// Empty parent configurations contribute nothing.
pub fn family_log_likelihood<S: Scalar>(
    ds: &IndicatorDataset,
    child: VarId,
    parents: &[VarId],
) -> Result<S, StatsError> {
    let mut ps = parents.to_vec();
    ps.sort_unstable();
    if let Some(w) = ps.windows(2).find(|w| w[0] == w[1]) {
        return Err(StatsError::DuplicateParent(w[0]));
    }
    if ps.contains(&child) {
        return Err(StatsError::ChildInParents(child));
    }
    let xc = ds.column(child)?;
    let cols = ps.iter().map(|&p| ds.column(p)).collect::<Result<Vec<_>, _>>()?;
    let radices: Vec<u64> = ps.iter().map(|&p| ds.cardinality(p) as u64).collect();
    let rc = ds.cardinality(child);
    let q = radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r)).ok_or(StatsError::ParameterOverflow)?;

    let config = |row: usize| -> u64 {
        cols.iter().zip(&radices).fold(0u64, |acc, (col, &r)| acc * r + col[row] as u64)
    };

    let block_ll = |counts: &[u64]| -> S {
        let total: u64 = counts.iter().sum();
        counts.iter().map(|&c| S::xlogx_ratio(c, total)).sum()
    };

    if q <= DENSE_LIMIT {
        let mut counts = vec![0u64; q as usize * rc];
        for (row, &v) in xc.iter().enumerate() {
            counts[config(row) as usize * rc + v as usize] += 1;
        }
        Ok(counts.chunks(rc).map(block_ll).sum())
    } else {
        let mut counts: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for (row, &v) in xc.iter().enumerate() {
            counts.entry(config(row)).or_insert_with(|| vec![0; rc])[v as usize] += 1;
        }
        Ok(counts.values().map(|c| block_ll(c)).sum())
    }
}

/// Penalized family score `loglik - penalty * df`; higher is better.
pub fn dag_family_score<S: Scalar>(
    ds: &IndicatorDataset,
    child: VarId,
    parents: &[VarId],
    cfg: &ScoreConfig<S>,
) -> Result<S, StatsError> {
    let ll: S = family_log_likelihood(ds, child, parents)?;
    let df = family_df(ds, child, parents)?;
    Ok(ll - cfg.penalty * S::from_count(df))
}

/// Number of undirected graphs on `n` labeled vertices, `2^(n(n-1)/2)`.
pub fn graph_space_size(n: u32) -> BigUint {
    let edges = n as u64 * n.saturating_sub(1) as u64 / 2;
    BigUint::from(1u8) << edges
}

/// Renders a big integer in scientific notation with `digits` significant digits
/// (truncated), e.g. `1.44e76`.
pub fn scientific(x: &BigUint, digits: usize) -> String {
    let s = x.to_string();
    let exp = s.len() - 1;
    let digits = digits.max(1).min(s.len());
    if digits == 1 {
        format!("{}e{exp}", &s[..1])
    } else {
        format!("{}.{}e{exp}", &s[..1], &s[1..digits])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(rows: &[Vec<u8>]) -> IndicatorDataset {
        let n = rows[0].len();
        IndicatorDataset::from_rows((0..n).map(|i| format!("X{i}")).collect(), rows).unwrap()
    }

    // independent oracle: textbook formula over probabilities, straightforward summation
    fn mi_oracle(cells: &[[f64; 2]; 2]) -> f64 {
        let n: f64 = cells.iter().flatten().sum();
        let pa = [(cells[0][0] + cells[0][1]) / n, (cells[1][0] + cells[1][1]) / n];
        let pb = [(cells[0][0] + cells[1][0]) / n, (cells[0][1] + cells[1][1]) / n];
        let mut mi = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let p = cells[a][b] / n;
                if p > 0.0 {
                    mi += p * (p / (pa[a] * pb[b])).ln();
                }
            }
        }
        mi
    }

    #[test]
    fn pair_counts_direct() {
        let d = ds(&[vec![1, 1], vec![0, 0], vec![1, 0]]);
        let t = pair_counts(&d, VarId(0), VarId(1)).unwrap();
        assert_eq!((t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1)), (1, 0, 1, 1));
        assert_eq!(t.total(), 3);
    }

    #[test]
    fn pair_counts_constant_and_status() {
        let d = ds(&[vec![1, 1], vec![1, 0], vec![1, 0]]).with_status(vec![0, 2, 1]).unwrap();
        let t = pair_counts(&d, VarId(0), VarId(1)).unwrap();
        assert_eq!(t.row_margins(), vec![0, 3]);
        let s = pair_counts(&d, d.status_var().unwrap(), VarId(1)).unwrap();
        assert_eq!(s.dims(), (3, 2));
        assert_eq!(s.total(), 3);
        assert!(matches!(pair_counts(&d, VarId(0), VarId(0)), Err(StatsError::SameVariable(_))));
        assert!(matches!(pair_counts(&d, VarId(0), VarId(9)), Err(StatsError::Dataset(_))));
    }

    #[test]
    fn mi_examples() {
        let perfect = ContingencyTable::new(2, 2, vec![50, 0, 0, 50]);
        assert!((mutual_information::<f64>(&perfect).unwrap() - 2f64.ln()).abs() < 1e-12);
        let indep = ContingencyTable::new(2, 2, vec![1, 1, 1, 1]);
        assert_eq!(mutual_information::<f64>(&indep).unwrap(), 0.0);

        let oracle = mi_oracle(&[[40.0, 10.0], [10.0, 40.0]]);
        assert!((oracle - 0.19274).abs() < 5e-6, "oracle {oracle}");
        let mi: f64 = mutual_information(&ContingencyTable::new(2, 2, vec![40, 10, 10, 40])).unwrap();
        assert!((mi - oracle).abs() < 1e-12);
        assert!((mi - 0.192_744_757_021_757_5).abs() < 1e-12);

        assert_eq!(
            mutual_information::<f64>(&ContingencyTable::new(2, 2, vec![0; 4])),
            Err(StatsError::EmptyTable)
        );
    }

    #[test]
    fn edge_weight_examples() {
        let mut rows = vec![vec![0, 0]; 50];
        rows.extend(vec![vec![1, 1]; 50]);
        let d = ds(&rows);
        let w: f64 = bic_edge_weight(&d, VarId(0), VarId(1), &ScoreConfig::bic(100)).unwrap();
        let oracle = 2.0 * 100.0 * mi_oracle(&[[50.0, 0.0], [0.0, 50.0]]) - 100f64.ln();
        assert!((w - oracle).abs() < 1e-9);
        assert!((w - 134.024).abs() < 1e-3);

        let d = ds(&[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let w: f64 = bic_edge_weight(&d, VarId(0), VarId(1), &ScoreConfig::bic(4)).unwrap();
        assert!((w + 4f64.ln()).abs() < 1e-12);
        assert!((w + 1.386).abs() < 1e-3);
    }

    #[test]
    fn status_edge_penalty_has_two_df() {
        let d = ds(&[vec![0], vec![1], vec![0], vec![1], vec![1], vec![0]])
            .with_status(vec![0, 1, 2, 0, 1, 2])
            .unwrap();
        let s = d.status_var().unwrap();
        let cfg = ScoreConfig::bic(6);
        let w: f64 = bic_edge_weight(&d, VarId(0), s, &cfg).unwrap();
        let mi: f64 = mutual_information(&pair_counts(&d, VarId(0), s).unwrap()).unwrap();
        assert!((w - (12.0 * mi - 2.0 * 6f64.ln())).abs() < 1e-12);
        assert_eq!(family_df(&d, s, &[VarId(0)]).unwrap(), 4);
        assert_eq!(family_df(&d, VarId(0), &[s]).unwrap(), 3);
    }

    #[test]
    fn family_score_examples() {
        let mut rows = vec![vec![1]; 40];
        rows.extend(vec![vec![0]; 60]);
        let d = ds(&rows);
        let zero = ScoreConfig::with_penalty(0.0).unwrap();
        let s: f64 = dag_family_score(&d, VarId(0), &[], &zero).unwrap();
        let oracle = 60.0 * 0.6f64.ln() + 40.0 * 0.4f64.ln();
        assert!((s - oracle).abs() < 1e-9);
        assert!((s + 67.301).abs() < 1e-3);

        let d = ds(&[vec![0, 0], vec![1, 1], vec![1, 1], vec![0, 0], vec![1, 1]]);
        let s: f64 = dag_family_score(&d, VarId(1), &[VarId(0)], &zero).unwrap();
        assert_eq!(s, 0.0);

        let heavy = ScoreConfig::with_penalty(200.0).unwrap();
        let a: f64 = dag_family_score(&d, VarId(1), &[VarId(0)], &heavy).unwrap();
        assert_eq!(a - s, -200.0 * 2.0);

        assert!(matches!(
            dag_family_score(&d, VarId(1), &[VarId(1)], &zero),
            Err(StatsError::ChildInParents(_))
        ));
        assert!(ScoreConfig::with_penalty(-1.0f64).is_err());
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        // 17 parents -> 2^17 configurations, exercising the map-backed path
        let n = 18;
        let rows: Vec<Vec<u8>> = (0..300u32)
            .map(|r| (0..n).map(|c| ((r.wrapping_mul(2654435761).rotate_left(c as u32)) >> 7 & 1) as u8).collect())
            .collect();
        let d = ds(&rows);
        let parents: Vec<VarId> = (1..n).map(VarId).collect();
        let sparse: f64 = family_log_likelihood(&d, VarId(0), &parents).unwrap();
        // brute force via string keys
        let mut groups: BTreeMap<Vec<u8>, [u64; 2]> = BTreeMap::new();
        for r in &rows {
            groups.entry(r[1..].to_vec()).or_default()[r[0] as usize] += 1;
        }
        let brute: f64 = groups
            .values()
            .map(|c| c.iter().map(|&k| f64::xlogx_ratio(k, c[0] + c[1])).sum::<f64>())
            .sum();
        assert!((sparse - brute).abs() < 1e-9);
    }

    #[test]
    fn graph_space_counts() {
        assert_eq!(graph_space_size(1), BigUint::from(1u8));
        assert_eq!(graph_space_size(3), BigUint::from(8u8));
        let big = graph_space_size(23);
        assert_eq!(big, BigUint::from(2u8).pow(253));
        assert_eq!(scientific(&big, 3), "1.44e76");
    }

    #[test]
    fn f32_scores_track_f64() {
        let t = ContingencyTable::new(2, 2, vec![40, 10, 10, 40]);
        let a: f32 = mutual_information(&t).unwrap();
        let b: f64 = mutual_information(&t).unwrap();
        assert!((a as f64 - b).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn mi_symmetric_and_bounded(cells in prop::collection::vec(0u64..50, 6)) {
            let t = ContingencyTable::new(3, 2, cells);
            prop_assume!(t.total() > 0);
            let mi: f64 = mutual_information(&t).unwrap();
            let mt: f64 = mutual_information(&t.transpose()).unwrap();
            prop_assert_eq!(mi.to_bits(), mt.to_bits());
            let hi: f64 = entropy(&t.row_margins());
            let hj: f64 = entropy(&t.col_margins());
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= hi.min(hj) + 1e-12);
        }

        #[test]
        fn edge_weight_is_twice_arc_gain(rows in prop::collection::vec((0u8..2, 0u8..2), 2..80)) {
            let d = ds(&rows.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>());
            let cfg = ScoreConfig::bic(d.n_rows());
            let w: f64 = bic_edge_weight(&d, VarId(0), VarId(1), &cfg).unwrap();
            let with_arc: f64 = dag_family_score(&d, VarId(0), &[], &cfg).unwrap()
                + dag_family_score(&d, VarId(1), &[VarId(0)], &cfg).unwrap();
            let empty: f64 = dag_family_score(&d, VarId(0), &[], &cfg).unwrap()
                + dag_family_score(&d, VarId(1), &[], &cfg).unwrap();
            prop_assert!(((with_arc - empty) - w / 2.0).abs() < 1e-9);
        }
    }
}

//! The binary indicator table that every learner consumes.

use std::fmt;

use thiserror::Error;

/// Name given to the subscriber-status column when it is treated as a variable.
pub const STATUS_NAME: &str = "S";

/// Index of a variable in an [`IndicatorDataset`]. Items occupy `0..n_items`; the
/// status column, when present, is `n_items`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("column {column} has length {len}, expected {expected}")]
    RaggedColumn { column: String, len: usize, expected: usize },
    #[error("column {column} row {row} holds {value}, outside its {cardinality} categories")]
    OutOfRange { column: String, row: usize, value: u8, cardinality: u8 },
    #[error("{names} variable names for {columns} columns")]
    NameMismatch { names: usize, columns: usize },
    #[error("variable index {0} out of range")]
    UnknownVariable(usize),
}

/// N subjects by n binary item indicators, plus an optional 3-level status column.
///
/// Stored column-major since every statistic scans whole columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorDataset {
    names: Vec<String>,
    columns: Vec<Vec<u8>>,
    status: Option<Vec<u8>>,
    n_rows: usize,
}

impl IndicatorDataset {
    pub fn from_columns(
        names: Vec<String>,
        columns: Vec<Vec<u8>>,
        status: Option<Vec<u8>>,
        n_rows: usize,
    ) -> Result<Self, DatasetError> {
        if names.len() != columns.len() {
            return Err(DatasetError::NameMismatch { names: names.len(), columns: columns.len() });
        }
        for (name, col) in names.iter().zip(&columns) {
            check_column(name, col, n_rows, 2)?;
        }
        if let Some(s) = &status {
            check_column(STATUS_NAME, s, n_rows, 3)?;
        }
        Ok(Self { names, columns, status, n_rows })
    }

    /// Builds a dataset from row vectors (items only).
    pub fn from_rows(names: Vec<String>, rows: &[Vec<u8>]) -> Result<Self, DatasetError> {
        let n = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); n];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(DatasetError::RaggedColumn {
                    column: format!("row {r}"),
                    len: row.len(),
                    expected: n,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        Self::from_columns(names, columns, None, rows.len())
    }

    /// Attaches (or replaces) the status column.
    pub fn with_status(mut self, status: Vec<u8>) -> Result<Self, DatasetError> {
        check_column(STATUS_NAME, &status, self.n_rows, 3)?;
        self.status = Some(status);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_items(&self) -> usize {
        self.columns.len()
    }

    pub fn has_status(&self) -> bool {
        self.status.is_some()
    }

    pub fn item_names(&self) -> &[String] {
        &self.names
    }

    pub fn status_column(&self) -> Option<&[u8]> {
        self.status.as_deref()
    }

    pub fn status_var(&self) -> Option<VarId> {
        self.status.as_ref().map(|_| VarId(self.columns.len()))
    }

    /// Item variables, followed by the status variable if requested and present.
    pub fn variables(&self, include_status: bool) -> Vec<VarId> {
        let mut vars: Vec<VarId> = (0..self.n_items()).map(VarId).collect();
        if include_status {
            vars.extend(self.status_var());
        }
        vars
    }

    pub fn contains(&self, v: VarId) -> bool {
        v.0 < self.columns.len() || (v.0 == self.columns.len() && self.status.is_some())
    }

    pub fn check(&self, v: VarId) -> Result<(), DatasetError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(DatasetError::UnknownVariable(v.0))
        }
    }

    pub fn column(&self, v: VarId) -> Result<&[u8], DatasetError> {
        if v.0 < self.columns.len() {
            Ok(&self.columns[v.0])
        } else if v.0 == self.columns.len() {
            self.status.as_deref().ok_or(DatasetError::UnknownVariable(v.0))
        } else {
            Err(DatasetError::UnknownVariable(v.0))
        }
    }

    /// Number of categories: 2 for items, 3 for status.
    pub fn cardinality(&self, v: VarId) -> usize {
        if v.0 < self.columns.len() {
            2
        } else {
            3
        }
    }

    pub fn name(&self, v: VarId) -> &str {
        self.names.get(v.0).map(String::as_str).unwrap_or(STATUS_NAME)
    }

    /// Looks up a variable by name; the status column answers to [`STATUS_NAME`].
    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(VarId)
            .or_else(|| (name == STATUS_NAME).then(|| self.status_var()).flatten())
    }

    /// Row `r` as item indicators (status excluded).
    pub fn row(&self, r: usize) -> Vec<u8> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Per-item column sums.
    pub fn column_sums(&self) -> Vec<u64> {
        self.columns
            .iter()
            .map(|c| c.iter().map(|&x| x as u64).sum())
            .collect()
    }

    /// Keeps only the listed item columns (in the given order); status is kept.
    pub fn select_items(&self, vars: &[VarId]) -> Result<Self, DatasetError> {
        let mut names = Vec::with_capacity(vars.len());
        let mut columns = Vec::with_capacity(vars.len());
        for &v in vars {
            if v.0 >= self.columns.len() {
                return Err(DatasetError::UnknownVariable(v.0));
            }
            names.push(self.names[v.0].clone());
            columns.push(self.columns[v.0].clone());
        }
        Ok(Self { names, columns, status: self.status.clone(), n_rows: self.n_rows })
    }
}

fn check_column(name: &str, col: &[u8], n_rows: usize, cardinality: u8) -> Result<(), DatasetError> {
    if col.len() != n_rows {
        return Err(DatasetError::RaggedColumn {
            column: name.to_string(),
            len: col.len(),
            expected: n_rows,
        });
    }
    if let Some((row, &value)) = col.iter().enumerate().find(|(_, &x)| x >= cardinality) {
        return Err(DatasetError::OutOfRange { column: name.to_string(), row, value, cardinality });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rows_round_trip() {
        let ds = IndicatorDataset::from_rows(names(&["A", "B"]), &[vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.row(1), vec![1, 1]);
        assert_eq!(ds.column_sums(), vec![2, 1]);
    }

    #[test]
    fn rejects_non_binary_cells() {
        let err = IndicatorDataset::from_rows(names(&["A"]), &[vec![2]]).unwrap_err();
        assert!(matches!(err, DatasetError::OutOfRange { value: 2, .. }));
    }

    #[test]
    fn status_variable_indexing() {
        let ds = IndicatorDataset::from_rows(names(&["A", "B"]), &[vec![1, 0], vec![0, 1]])
            .unwrap()
            .with_status(vec![0, 2])
            .unwrap();
        let s = ds.status_var().unwrap();
        assert_eq!(s, VarId(2));
        assert_eq!(ds.cardinality(s), 3);
        assert_eq!(ds.name(s), STATUS_NAME);
        assert_eq!(ds.var_by_name("S"), Some(s));
        assert_eq!(ds.variables(true).len(), 3);
        assert_eq!(ds.variables(false).len(), 2);
        assert!(ds.with_status(vec![3, 0]).is_err());
    }
}

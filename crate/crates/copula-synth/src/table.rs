//! Column-major table of numeric and categorical columns, the universal
//! I/O unit of the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// One column of data.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Numeric(_) => ColumnKind::Numeric,
            Column::Categorical(_) => ColumnKind::Categorical,
        }
    }
}

/// A validated table: at least one column, all columns the same nonzero
/// length, numeric values finite, labels non-empty, names distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    names: Vec<String>,
    columns: Vec<Column>,
}

impl DataTable {
    pub fn new(names: Vec<String>, columns: Vec<Column>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::dimension(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::dimension("table must have at least one column"));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::schema(format!("duplicate column name {name:?}")));
            }
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::dimension("table must have at least one row"));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::dimension(format!(
                    "column {name:?} has {} rows, expected {n}",
                    col.len()
                )));
            }
            match col {
                Column::Numeric(v) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::domain(format!(
                            "numeric column {name:?} contains a non-finite value"
                        )));
                    }
                }
                Column::Categorical(v) => {
                    if v.iter().any(String::is_empty) {
                        return Err(Error::domain(format!(
                            "categorical column {name:?} contains an empty label"
                        )));
                    }
                }
            }
        }
        Ok(DataTable { names, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn kind(&self, j: usize) -> ColumnKind {
        self.columns[j].kind()
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Numeric view of column `j`.
    pub fn numeric(&self, j: usize) -> Result<&[f64]> {
        match &self.columns[j] {
            Column::Numeric(v) => Ok(v),
            Column::Categorical(_) => Err(Error::schema(format!(
                "column {:?} is categorical, expected numeric",
                self.names[j]
            ))),
        }
    }

    /// Categorical view of column `j`.
    pub fn categorical(&self, j: usize) -> Result<&[String]> {
        match &self.columns[j] {
            Column::Categorical(v) => Ok(v),
            Column::Numeric(_) => Err(Error::schema(format!(
                "column {:?} is numeric, expected categorical",
                self.names[j]
            ))),
        }
    }

    /// Names of the numeric columns, in table order.
    pub fn numeric_names(&self) -> Vec<&str> {
        self.names
            .iter()
            .zip(&self.columns)
            .filter(|(_, c)| c.kind() == ColumnKind::Numeric)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Names of the categorical columns, in table order.
    pub fn categorical_names(&self) -> Vec<&str> {
        self.names
            .iter()
            .zip(&self.columns)
            .filter(|(_, c)| c.kind() == ColumnKind::Categorical)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Copies the table minus the named columns. Every excluded name must
    /// exist; dropping all columns is an error.
    pub fn without_columns(&self, excluded: &[String]) -> Result<DataTable> {
        for name in excluded {
            if self.column_index(name).is_none() {
                return Err(Error::schema(format!(
                    "excluded column {name:?} does not exist"
                )));
            }
        }
        let keep: Vec<usize> = (0..self.n_cols())
            .filter(|&j| !excluded.contains(&self.names[j]))
            .collect();
        if keep.is_empty() {
            return Err(Error::dimension("exclusions removed every column"));
        }
        DataTable::new(
            keep.iter().map(|&j| self.names[j].clone()).collect(),
            keep.iter().map(|&j| self.columns[j].clone()).collect(),
        )
    }
}

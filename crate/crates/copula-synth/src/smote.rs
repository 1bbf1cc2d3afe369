//! SMOTE baseline: synthetic rows on segments between a training row and
//! one of its k nearest neighbors, x_new = x_i + γ(x_ki − x_i) with
//! γ ~ U(0,1). Used here as a general-purpose generator for comparison
//! against the copula pipeline, not as a class balancer.

use crate::categorical::{decode_categorical, encode_categorical};
use crate::error::{Error, Result};
use crate::numerics::rng::RandomSource;
use crate::par;
use crate::table::{Column, DataTable};

/// SMOTE parameters. `k` must stay below the training row count.
#[derive(Debug, Clone, Copy)]
pub struct SmoteConfig {
    /// Neighbors considered per base row.
    pub k: usize,
    /// Rows to generate.
    pub n_new: usize,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig { k: 5, n_new: 0 }
    }
}

/// Indices of the `k` nearest neighbors (Euclidean, excluding the row
/// itself) for every training row, distance ties broken by lowest index.
fn nearest_neighbors(rows: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let n = rows.len();
    par::map_indexed(n, |i| {
        let mut dist: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d = rows[i]
                    .iter()
                    .zip(&rows[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d, j)
            })
            .collect();
        dist.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        dist.truncate(k);
        dist.into_iter().map(|(_, j)| j).collect()
    })
}

/// Generates `config.n_new` synthetic rows from numeric `columns`.
///
/// Base rows cycle over the training set in order; per generated row the
/// neighbor is drawn uniformly among the base row's k nearest and γ is
/// uniform on (0, 1), both from a child stream keyed by the output row
/// index. Returns columns in the input layout.
pub fn smote_generate(
    columns: &[Vec<f64>],
    config: &SmoteConfig,
    rng: &mut RandomSource,
) -> Result<Vec<Vec<f64>>> {
    if columns.is_empty() {
        return Err(Error::domain("smote: no columns"));
    }
    let n = columns[0].len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::dimension("smote: ragged columns"));
    }
    if columns.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::domain("smote: non-finite value in input"));
    }
    if config.k == 0 {
        return Err(Error::domain("smote: k must be at least 1"));
    }
    if config.k >= n {
        return Err(Error::domain(format!(
            "smote: k = {} must be below the training row count {n}",
            config.k
        )));
    }

    let d = columns.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    let neighbors = nearest_neighbors(&rows, config.k);

    let base = rng.split();
    let new_rows: Vec<Vec<f64>> = par::map_indexed(config.n_new, |out_idx| {
        let mut r = base.child(out_idx as u64);
        let i = out_idx % n;
        let nb = neighbors[i][r.next_below(config.k)];
        let gamma = r.next_open01();
        (0..d)
            .map(|c| rows[i][c] + gamma * (rows[nb][c] - rows[i][c]))
            .collect()
    });

    let mut out = vec![Vec::with_capacity(config.n_new); d];
    for row in &new_rows {
        for (column, v) in out.iter_mut().zip(row) {
            column.push(*v);
        }
    }
    Ok(out)
}

/// SMOTE over a mixed table: categorical columns are run through the
/// proportion encoding first and decoded afterwards (ties uniform, no
/// alignment: generated rows have no original counterpart).
pub fn smote_table(
    table: &DataTable,
    config: &SmoteConfig,
    z: f64,
    rng: &mut RandomSource,
) -> Result<DataTable> {
    let mut numeric: Vec<Vec<f64>> = Vec::with_capacity(table.n_cols());
    let mut encodings = Vec::with_capacity(table.n_cols());
    for j in 0..table.n_cols() {
        match table.column(j) {
            Column::Numeric(v) => {
                numeric.push(v.clone());
                encodings.push(None);
            }
            Column::Categorical(labels) => {
                let mut enc_rng = rng.child(j as u64);
                let (enc, values) = encode_categorical(labels, &mut enc_rng, z)?;
                numeric.push(values);
                encodings.push(Some(enc));
            }
        }
    }

    let generated = smote_generate(&numeric, config, rng)?;

    let mut columns = Vec::with_capacity(table.n_cols());
    for (j, values) in generated.into_iter().enumerate() {
        match &encodings[j] {
            None => columns.push(Column::Numeric(values)),
            Some(enc) => {
                let mut decode_rng = rng.split();
                let labels = decode_categorical(enc, &values, None, &mut decode_rng)?;
                columns.push(Column::Categorical(labels));
            }
        }
    }
    DataTable::new(table.names().to_vec(), columns)
}

//! Fidelity metrics between a real and a synthetic table: mean absolute
//! correlation difference, two-sample Kolmogorov-Smirnov tests per
//! numeric column, descriptive-statistic errors, and chi-squared
//! independence tests on categorical cross-tabulations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::copula::{kendall_tau, pearson_rho, spearman_rho};
use crate::error::{Error, Result};
use crate::numerics::special::{chi_squared_sf, kolmogorov_sf};
use crate::par;
use crate::table::DataTable;

/// Which correlation estimator a metric runs on. Unlike the fitting
/// method enum, Kendall here means the raw tau, not its sine inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Pearson,
    Kendall,
    Spearman,
}

fn correlation(kind: CorrelationKind, x: &[f64], y: &[f64]) -> Result<f64> {
    match kind {
        CorrelationKind::Pearson => pearson_rho(x, y),
        CorrelationKind::Kendall => kendall_tau(x, y),
        CorrelationKind::Spearman => spearman_rho(x, y),
    }
}

/// Pairwise correlation matrix of numeric columns, row-major, without
/// any positive-semidefinite repair (metrics compare raw estimates).
pub fn pairwise_correlation_matrix(
    columns: &[&[f64]],
    kind: CorrelationKind,
) -> Result<Vec<f64>> {
    let d = columns.len();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .collect();
    let estimates = par::try_map_indexed(pairs.len(), |k| {
        let (i, j) = pairs[k];
        correlation(kind, columns[i], columns[j])
    })?;
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    for (&(i, j), &v) in pairs.iter().zip(&estimates) {
        m[i * d + j] = v;
        m[j * d + i] = v;
    }
    Ok(m)
}

/// Shared numeric columns of two tables: names plus both column views.
type MatchedColumns<'t> = (Vec<&'t str>, Vec<&'t [f64]>, Vec<&'t [f64]>);

fn matched_numeric_columns<'t>(
    real: &'t DataTable,
    syn: &'t DataTable,
) -> Result<MatchedColumns<'t>> {
    let real_names = real.numeric_names();
    let syn_names = syn.numeric_names();
    let missing: Vec<&str> = real_names
        .iter()
        .filter(|n| !syn_names.contains(n))
        .cloned()
        .collect();
    let extra: Vec<&str> = syn_names
        .iter()
        .filter(|n| !real_names.contains(n))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::schema(format!(
            "numeric columns differ; missing from synthetic: {missing:?}, unexpected: {extra:?}"
        )));
    }
    let mut real_cols = Vec::with_capacity(real_names.len());
    let mut syn_cols = Vec::with_capacity(real_names.len());
    for name in &real_names {
        let ri = real.column_index(name).expect("name from this table");
        let si = syn.column_index(name).expect("checked above");
        real_cols.push(real.numeric(ri)?);
        syn_cols.push(syn.numeric(si)?);
    }
    Ok((real_names, real_cols, syn_cols))
}

fn mean_abs(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v.abs();
        count += 1;
    }
    sum / count as f64
}

/// Mean absolute difference between the real and synthetic correlation
/// matrices over all d² entries (the zero diagonal included). A single
/// shared numeric column compares two unit matrices and yields exactly 0;
/// at least one shared numeric column is required.
pub fn correlation_mu_diff(
    real: &DataTable,
    syn: &DataTable,
    kind: CorrelationKind,
) -> Result<f64> {
    let (_, real_cols, syn_cols) = matched_numeric_columns(real, syn)?;
    if real_cols.is_empty() {
        return Err(Error::dimension("mu_diff needs a shared numeric column"));
    }
    let a = pairwise_correlation_matrix(&real_cols, kind)?;
    let b = pairwise_correlation_matrix(&syn_cols, kind)?;
    Ok(mean_abs(a.iter().zip(&b).map(|(x, y)| x - y)))
}

/// Two-sample Kolmogorov-Smirnov test. Returns the statistic
/// D = sup |F̂_x − F̂_y| and the asymptotic p-value at effective size
/// n_x·n_y/(n_x+n_y).
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::domain("ks_two_sample: empty sample"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain("ks_two_sample: non-finite value"));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    ys.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));

    let (nx, ny) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    // Walk the pooled distinct values; once either sample is exhausted
    // its CDF sits at 1 and the gap can only shrink, so the maximum has
    // already been seen.
    while i < nx && j < ny {
        let v = xs[i].min(ys[j]);
        while i < nx && xs[i] == v {
            i += 1;
        }
        while j < ny && ys[j] == v {
            j += 1;
        }
        let fx = i as f64 / nx as f64;
        let fy = j as f64 / ny as f64;
        d = d.max((fx - fy).abs());
    }

    let ne = (nx as f64 * ny as f64) / (nx as f64 + ny as f64);
    let p = kolmogorov_sf(ne.sqrt() * d);
    Ok((d, p))
}

/// Absolute errors of the descriptive statistics of one column pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatErrors {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub std: f64,
}

fn quantile_by_min_set(sorted: &[f64], p: f64) -> f64 {
    // min{x : F(x) >= p}, same convention as the marginal module.
    let n = sorted.len();
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if mid as f64 / n as f64 >= p {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    sorted[lo - 1]
}

fn sample_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return 0.0;
    }
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn stat_errors(real: &[f64], syn: &[f64]) -> StatErrors {
    let mut r = real.to_vec();
    let mut s = syn.to_vec();
    r.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    s.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    StatErrors {
        q1: (quantile_by_min_set(&r, 0.25) - quantile_by_min_set(&s, 0.25)).abs(),
        median: (quantile_by_min_set(&r, 0.5) - quantile_by_min_set(&s, 0.5)).abs(),
        q3: (quantile_by_min_set(&r, 0.75) - quantile_by_min_set(&s, 0.75)).abs(),
        std: (sample_std(&r) - sample_std(&s)).abs(),
    }
}

/// Per-column absolute errors of quartiles, median, and standard
/// deviation between matching numeric columns.
pub fn descriptive_stats_error(
    real: &DataTable,
    syn: &DataTable,
) -> Result<BTreeMap<String, StatErrors>> {
    let (names, real_cols, syn_cols) = matched_numeric_columns(real, syn)?;
    let errors = par::map_indexed(names.len(), |k| stat_errors(real_cols[k], syn_cols[k]));
    Ok(names
        .into_iter()
        .map(str::to_string)
        .zip(errors)
        .collect())
}

/// Cross-tabulated counts of two categorical columns. Level order is
/// first appearance in each input.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub row_levels: Vec<String>,
    pub col_levels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.col_levels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// Builds the contingency table of two equally long label vectors.
pub fn cross_tabulate(a: &[String], b: &[String]) -> Result<ContingencyTable> {
    if a.len() != b.len() {
        return Err(Error::dimension(format!(
            "cross_tabulate: length mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::domain("cross_tabulate: empty input"));
    }
    let mut row_levels: Vec<String> = Vec::new();
    let mut col_levels: Vec<String> = Vec::new();
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(a.len());
    for (la, lb) in a.iter().zip(b) {
        let i = match row_levels.iter().position(|l| l == la) {
            Some(i) => i,
            None => {
                row_levels.push(la.clone());
                row_levels.len() - 1
            }
        };
        let j = match col_levels.iter().position(|l| l == lb) {
            Some(j) => j,
            None => {
                col_levels.push(lb.clone());
                col_levels.len() - 1
            }
        };
        cells.push((i, j));
    }
    let mut counts = vec![vec![0u64; col_levels.len()]; row_levels.len()];
    for (i, j) in cells {
        counts[i][j] += 1;
    }
    Ok(ContingencyTable { row_levels, col_levels, counts })
}

/// Pearson chi-squared test of independence. All-zero rows and columns
/// are dropped first; a table that then has fewer than two rows or two
/// columns is degenerate and the test inapplicable.
pub fn chi_squared_independence(t: &ContingencyTable) -> Result<(f64, usize, f64)> {
    let keep_rows: Vec<usize> = (0..t.counts.len())
        .filter(|&i| t.counts[i].iter().any(|&c| c > 0))
        .collect();
    let keep_cols: Vec<usize> = (0..t.col_levels.len())
        .filter(|&j| t.counts.iter().any(|r| r[j] > 0))
        .collect();
    if keep_rows.len() < 2 || keep_cols.len() < 2 {
        return Err(Error::degenerate(format!(
            "chi-squared independence needs at least 2 nonzero rows and columns, \
             got {}x{}",
            keep_rows.len(),
            keep_cols.len()
        )));
    }
    let grand: f64 = t.total() as f64;
    let row_sums = t.row_sums();
    let col_sums = t.col_sums();
    let mut stat = 0.0;
    for &i in &keep_rows {
        for &j in &keep_cols {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / grand;
            let diff = t.counts[i][j] as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    let df = (keep_rows.len() - 1) * (keep_cols.len() - 1);
    let p = chi_squared_sf(stat, df as f64)?;
    Ok((stat, df, p))
}

/// Triple of mu_diff values, one per correlation estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuDiff {
    pub pearson: f64,
    pub kendall: f64,
    pub spearman: f64,
}

/// K-S result for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p: f64,
}

/// Chi-squared independence result for one categorical pair of the
/// synthetic table. `degenerate` marks pairs whose cross-tabulation
/// collapsed to a single nonzero row or column, where the test does not
/// apply and the remaining fields are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub stat: Option<f64>,
    pub df: Option<usize>,
    pub p: Option<f64>,
    pub degenerate: bool,
}

/// Report format version written by [`QualityReport::to_json_string`].
pub const REPORT_FORMAT_VERSION: &str = "copula-synth-report/1";

/// Aggregated fidelity report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub version: String,
    /// Mean |ΔP| over all matrix entries, diagonal included.
    pub mu_diff: MuDiff,
    /// Same, off-diagonal entries only (informational variant).
    pub mu_diff_offdiag: MuDiff,
    /// Two-sample K-S per numeric column.
    pub ks: BTreeMap<String, KsResult>,
    /// Descriptive-statistic errors per numeric column.
    pub stats: BTreeMap<String, StatErrors>,
    /// Independence tests per categorical pair, keyed "a|b".
    pub chi2: BTreeMap<String, Chi2Result>,
}

impl QualityReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let report: QualityReport =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if report.version != REPORT_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported report version {:?}, expected {REPORT_FORMAT_VERSION:?}",
                report.version
            )));
        }
        Ok(report)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

fn mu_diff_pair(
    real_cols: &[&[f64]],
    syn_cols: &[&[f64]],
    kind: CorrelationKind,
) -> Result<(f64, f64)> {
    let a = pairwise_correlation_matrix(real_cols, kind)?;
    let b = pairwise_correlation_matrix(syn_cols, kind)?;
    let d = real_cols.len();
    let all = mean_abs(a.iter().zip(&b).map(|(x, y)| x - y));
    let off = if d > 1 {
        mean_abs(
            a.iter()
                .zip(&b)
                .enumerate()
                .filter(|(idx, _)| idx / d != idx % d)
                .map(|(_, (x, y))| x - y),
        )
    } else {
        0.0
    };
    Ok((all, off))
}

/// Runs every applicable metric between `real` and `syn`.
///
/// Requires the two tables to share column names and kinds (order may
/// differ); mu_diff and K-S run on numeric columns, chi-squared on each
/// pair of categorical columns of the synthetic table.
pub fn build_quality_report(real: &DataTable, syn: &DataTable) -> Result<QualityReport> {
    // Schema compatibility by name.
    let mut offending: Vec<String> = Vec::new();
    for (j, name) in real.names().iter().enumerate() {
        match syn.column_index(name) {
            None => offending.push(format!("{name} (missing from synthetic)")),
            Some(sj) if syn.kind(sj) != real.kind(j) => {
                offending.push(format!("{name} (kind mismatch)"))
            }
            Some(_) => {}
        }
    }
    for name in syn.names() {
        if real.column_index(name).is_none() {
            offending.push(format!("{name} (missing from real)"));
        }
    }
    if !offending.is_empty() {
        return Err(Error::schema(format!(
            "incompatible tables: {}",
            offending.join(", ")
        )));
    }

    let (names, real_cols, syn_cols) = matched_numeric_columns(real, syn)?;

    let (mu_all, mu_off): (Vec<f64>, Vec<f64>) = if !names.is_empty() {
        let kinds = [
            CorrelationKind::Pearson,
            CorrelationKind::Kendall,
            CorrelationKind::Spearman,
        ];
        let mut all = Vec::new();
        let mut off = Vec::new();
        for kind in kinds {
            let (a, o) = mu_diff_pair(&real_cols, &syn_cols, kind)?;
            all.push(a);
            off.push(o);
        }
        (all, off)
    } else {
        (vec![0.0; 3], vec![0.0; 3])
    };

    let ks_entries = par::try_map_indexed(names.len(), |k| {
        ks_two_sample(real_cols[k], syn_cols[k]).map(|(d, p)| KsResult { d, p })
    })?;
    let ks: BTreeMap<String, KsResult> = names
        .iter()
        .map(|n| n.to_string())
        .zip(ks_entries)
        .collect();

    let stats = descriptive_stats_error(real, syn)?;

    let cat_names = syn.categorical_names();
    let mut chi2 = BTreeMap::new();
    for i in 0..cat_names.len() {
        for j in (i + 1)..cat_names.len() {
            let a = syn.categorical(syn.column_index(cat_names[i]).expect("named")).unwrap();
            let b = syn.categorical(syn.column_index(cat_names[j]).expect("named")).unwrap();
            let table = cross_tabulate(a, b)?;
            let key = format!("{}|{}", cat_names[i], cat_names[j]);
            let entry = match chi_squared_independence(&table) {
                Ok((stat, df, p)) => Chi2Result {
                    stat: Some(stat),
                    df: Some(df),
                    p: Some(p),
                    degenerate: false,
                },
                Err(Error::Degenerate(_)) => Chi2Result {
                    stat: None,
                    df: None,
                    p: None,
                    degenerate: true,
                },
                Err(other) => return Err(other),
            };
            chi2.insert(key, entry);
        }
    }

    Ok(QualityReport {
        version: REPORT_FORMAT_VERSION.to_string(),
        mu_diff: MuDiff { pearson: mu_all[0], kendall: mu_all[1], spearman: mu_all[2] },
        mu_diff_offdiag: MuDiff {
            pearson: mu_off[0],
            kendall: mu_off[1],
            spearman: mu_off[2],
        },
        ks,
        stats,
        chi2,
    })
}

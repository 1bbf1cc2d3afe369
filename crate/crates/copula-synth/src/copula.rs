//! Elliptical copula sampling, reference copulas, rank correlation
//! estimators, and correlation-matrix fitting from data.
//!
//! Sampling follows the textbook constructions: a Gaussian copula sample
//! is Φ applied to a correlated normal vector obtained from the Cholesky
//! factor, and a t copula sample additionally divides each row's normal
//! vector by an independent per-row √(χ²_ν/ν) before applying the t CDF.
//! Fitting inverts Kendall's tau through sin(π·τ̂/2) by default, the robust
//! moment-matching route for elliptical families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::matrix::{cholesky, nearest_correlation, CorrelationMatrix, SquareMatrix};
use crate::numerics::rng::RandomSource;
use crate::numerics::special::{
    normal_cdf_raw, student_t_cdf_raw, MAX_OPEN_PROB, MIN_OPEN_PROB,
};
use crate::par;

/// Copula family of a fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFamily {
    Gaussian,
    StudentT,
}

/// A fitted dependence model: family plus correlation matrix, with the
/// degrees of freedom present exactly when the family is Student-t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    pub correlation: CorrelationMatrix,
    pub nu: Option<f64>,
}

impl CopulaSpec {
    pub fn gaussian(correlation: CorrelationMatrix) -> Self {
        CopulaSpec { family: CopulaFamily::Gaussian, correlation, nu: None }
    }

    pub fn student_t(correlation: CorrelationMatrix, nu: f64) -> Result<Self> {
        check_t_dof(nu)?;
        CopulaSpec { family: CopulaFamily::StudentT, correlation, nu: Some(nu) }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match (self.family, self.nu) {
            (CopulaFamily::Gaussian, None) => Ok(self),
            (CopulaFamily::Gaussian, Some(nu)) => Err(Error::domain(format!(
                "Gaussian copula does not take degrees of freedom (got {nu})"
            ))),
            (CopulaFamily::StudentT, Some(nu)) => {
                check_t_dof(nu)?;
                Ok(self)
            }
            (CopulaFamily::StudentT, None) => {
                Err(Error::domain("Student-t copula requires degrees of freedom"))
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.correlation.dim()
    }
}

fn check_t_dof(nu: f64) -> Result<()> {
    if !nu.is_finite() || nu <= 2.0 {
        return Err(Error::domain(format!(
            "t copula requires finite degrees of freedom greater than 2, got {nu}"
        )));
    }
    Ok(())
}

/// A matrix of copula draws, column-major, every entry strictly in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSample {
    columns: Vec<Vec<f64>>,
}

impl UniformSample {
    fn from_row_major(rows: Vec<Vec<f64>>, dim: usize) -> Self {
        let n = rows.len();
        let mut columns = vec![vec![0.0; n]; dim];
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                columns[j][i] = v;
            }
        }
        UniformSample { columns }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }
}

#[inline]
fn clamp_open(u: f64) -> f64 {
    u.clamp(MIN_OPEN_PROB, MAX_OPEN_PROB)
}

/// Draws `n_rows` vectors from the Gaussian copula with correlation `p`.
///
/// Each row is Φ(A·z) with z iid standard normal and A the Cholesky factor
/// of `p`. Every row uses its own child stream of `rng`, so the result is
/// identical whatever the thread count.
pub fn sample_gaussian_copula(
    p: &CorrelationMatrix,
    n_rows: usize,
    rng: &mut RandomSource,
) -> Result<UniformSample> {
    if n_rows == 0 {
        return Err(Error::domain("sample_gaussian_copula: n_rows must be at least 1"));
    }
    let factor = cholesky(p)?;
    let dim = p.dim();
    let base = rng.split();
    let rows = par::map_indexed(n_rows, |i| {
        let mut r = base.child(i as u64);
        let z: Vec<f64> = (0..dim).map(|_| r.next_std_normal()).collect();
        factor
            .lower_mul_vec(&z)
            .into_iter()
            .map(|w| clamp_open(normal_cdf_raw(w)))
            .collect()
    });
    Ok(UniformSample::from_row_major(rows, dim))
}

/// Draws `n_rows` vectors from the t copula with correlation `p` and
/// `nu` degrees of freedom (> 2).
///
/// Per row: w ~ MN(0, p) via the Cholesky factor, an independent
/// chi-squared draw ε with ν degrees of freedom, and the output is
/// t_ν(wᵢ/√(ε/ν)) componentwise.
pub fn sample_t_copula(
    p: &CorrelationMatrix,
    nu: f64,
    n_rows: usize,
    rng: &mut RandomSource,
) -> Result<UniformSample> {
    check_t_dof(nu)?;
    if n_rows == 0 {
        return Err(Error::domain("sample_t_copula: n_rows must be at least 1"));
    }
    let factor = cholesky(p)?;
    let dim = p.dim();
    let base = rng.split();
    let rows = par::map_indexed(n_rows, |i| {
        let mut r = base.child(i as u64);
        let z: Vec<f64> = (0..dim).map(|_| r.next_std_normal()).collect();
        let eps = r
            .next_chi_squared(nu)
            .expect("degrees of freedom validated above");
        let scale = (eps / nu).sqrt();
        factor
            .lower_mul_vec(&z)
            .into_iter()
            .map(|w| clamp_open(student_t_cdf_raw(w / scale, nu)))
            .collect()
    });
    Ok(UniformSample::from_row_major(rows, dim))
}

/// Dispatches on the family of `spec`.
pub fn sample_copula(
    spec: &CopulaSpec,
    n_rows: usize,
    rng: &mut RandomSource,
) -> Result<UniformSample> {
    match spec.family {
        CopulaFamily::Gaussian => sample_gaussian_copula(&spec.correlation, n_rows, rng),
        CopulaFamily::StudentT => {
            let nu = spec
                .nu
                .ok_or_else(|| Error::domain("Student-t copula requires degrees of freedom"))?;
            sample_t_copula(&spec.correlation, nu, n_rows, rng)
        }
    }
}

/// The three reference copulas: perfect positive dependence (upper
/// bound), perfect negative dependence (lower bound, bivariate only),
/// and independence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceCopula {
    Comonotonic,
    Countermonotonic,
    Independence,
}

/// Evaluates a reference copula at `u`.
pub fn reference_copula(kind: ReferenceCopula, u: &[f64]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::domain("reference_copula: empty argument"));
    }
    if u.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::domain("reference_copula: arguments must lie in [0, 1]"));
    }
    match kind {
        ReferenceCopula::Comonotonic => Ok(u.iter().cloned().fold(f64::INFINITY, f64::min)),
        ReferenceCopula::Countermonotonic => {
            if u.len() != 2 {
                return Err(Error::domain(format!(
                    "countermonotonic copula is bivariate; got dimension {}",
                    u.len()
                )));
            }
            Ok((u[0] + u[1] - 1.0).max(0.0))
        }
        ReferenceCopula::Independence => Ok(u.iter().product()),
    }
}

fn check_paired(x: &[f64], y: &[f64], what: &str) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::dimension(format!(
            "{what}: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::domain(format!(
            "{what}: need at least 2 observations, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("{what}: non-finite value in input")));
    }
    Ok(())
}

fn tied_pairs(sorted_runs: impl Iterator<Item = u64>) -> u64 {
    sorted_runs.map(|c| c * (c - 1) / 2).sum()
}

/// Kendall's tau-b: concordant minus discordant pairs over the geometric
/// mean of pair counts net of ties. O(n log n) by merge counting;
/// `tests/` holds the quadratic enumeration oracle it must agree with.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y, "kendall_tau")?;
    let n = x.len();
    let n0 = (n as u64) * (n as u64 - 1) / 2;

    let mut pairs: Vec<(f64, f64)> = x.iter().cloned().zip(y.iter().cloned()).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finiteness checked"));

    // Tie pair counts in x and in (x, y) from the x-sorted order.
    let mut ties_x = Vec::new();
    let mut ties_xy = Vec::new();
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                ties_xy.push(run_xy);
                run_xy = 1;
            }
        } else {
            ties_x.push(run_x);
            run_x = 1;
            ties_xy.push(run_xy);
            run_xy = 1;
        }
    }
    ties_x.push(run_x);
    ties_xy.push(run_xy);
    let n1 = tied_pairs(ties_x.into_iter());
    let n3 = tied_pairs(ties_xy.into_iter());

    // Count discordant pairs as exchanges while merge-sorting y. Equal
    // elements are taken from the left, so ties never count; pairs tied
    // in x are already y-ascending and contribute nothing.
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let mut discordant = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || ys[i] <= ys[j]) {
                    buf[k] = ys[i];
                    i += 1;
                } else {
                    buf[k] = ys[j];
                    discordant += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        ys.copy_from_slice(&buf);
        width *= 2;
    }

    // y tie pairs from the now-sorted ys.
    let mut ties_y = Vec::new();
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y.push(run_y);
            run_y = 1;
        }
    }
    ties_y.push(run_y);
    let n2 = tied_pairs(ties_y.into_iter());

    if n0 == n1 || n0 == n2 {
        return Err(Error::degenerate(
            "kendall_tau: an input is entirely tied (zero rank variance)",
        ));
    }
    let c_minus_d = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * discordant as i64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok((c_minus_d as f64 / denom).clamp(-1.0, 1.0))
}

/// Ranks with ties replaced by the average of the positions they occupy
/// (one-based).
fn average_ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finiteness checked"));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && v[order[end + 1]] == v[order[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = avg;
        }
        start = end + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average-rank transforms.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y, "spearman_rho")?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson_of(&rx, &ry, "spearman_rho: zero rank variance")
}

/// Sample Pearson correlation coefficient.
pub fn pearson_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y, "pearson_rho")?;
    pearson_of(x, y, "pearson_rho: zero variance")
}

fn pearson_of(x: &[f64], y: &[f64], degenerate_msg: &str) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::degenerate(degenerate_msg));
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// How pairwise dependence is turned into the copula correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationFitMethod {
    /// sin(π·τ̂/2) per pair; the robust default.
    #[default]
    KendallInversion,
    /// Spearman's rho taken directly as the correlation entry.
    SpearmanApprox,
    /// Plain sample Pearson correlation.
    Pearson,
}

/// Estimates the copula correlation matrix from numeric columns, then
/// repairs the pairwise estimate into a valid correlation matrix.
pub fn fit_correlation_matrix(
    columns: &[Vec<f64>],
    method: CorrelationFitMethod,
) -> Result<CorrelationMatrix> {
    let d = columns.len();
    if d < 2 {
        return Err(Error::dimension(format!(
            "fit_correlation_matrix: need at least 2 columns, got {d}"
        )));
    }
    let n = columns[0].len();
    if n < 2 {
        return Err(Error::domain("fit_correlation_matrix: need at least 2 rows"));
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::dimension("fit_correlation_matrix: ragged columns"));
    }
    for (j, col) in columns.iter().enumerate() {
        let first = col[0];
        if col.iter().all(|v| *v == first) {
            return Err(Error::degenerate(format!(
                "fit_correlation_matrix: column {j} is constant"
            )));
        }
    }

    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .collect();
    let estimates = par::try_map_indexed(pairs.len(), |k| -> Result<f64> {
        let (i, j) = pairs[k];
        let value = match method {
            CorrelationFitMethod::KendallInversion => {
                let tau = kendall_tau(&columns[i], &columns[j])?;
                (std::f64::consts::FRAC_PI_2 * tau).sin()
            }
            CorrelationFitMethod::SpearmanApprox => spearman_rho(&columns[i], &columns[j])?,
            CorrelationFitMethod::Pearson => pearson_rho(&columns[i], &columns[j])?,
        };
        Ok(value.clamp(-1.0, 1.0))
    })?;

    let mut m = SquareMatrix::identity(d);
    for (&(i, j), &v) in pairs.iter().zip(&estimates) {
        m.set(i, j, v);
        m.set(j, i, v);
    }
    nearest_correlation(&m)
}

/// Empirical copula of a numeric sample: Ĉ(u) is the fraction of rows
/// whose per-column ranks, divided by n, all sit at or below u.
pub struct EmpiricalCopula {
    /// rank/n per row, one inner vector per column.
    rank_cols: Vec<Vec<f64>>,
}

impl EmpiricalCopula {
    pub fn new(columns: &[Vec<f64>]) -> Result<Self> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(Error::domain("empirical copula: empty input"));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::dimension("empirical copula: ragged columns"));
        }
        let rank_cols = columns
            .iter()
            .map(|col| {
                let mut sorted = col.clone();
                sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
                col.iter()
                    .map(|v| sorted.partition_point(|s| s <= v) as f64 / n as f64)
                    .collect()
            })
            .collect();
        Ok(EmpiricalCopula { rank_cols })
    }

    pub fn from_sample(sample: &UniformSample) -> Self {
        Self::new(sample.columns()).expect("uniform samples are rectangular and nonempty")
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.rank_cols.len(), "dimension mismatch");
        let n = self.rank_cols[0].len();
        let mut count = 0usize;
        for row in 0..n {
            if self.rank_cols.iter().zip(u).all(|(col, &uj)| col[row] <= uj) {
                count += 1;
            }
        }
        count as f64 / n as f64
    }
}

//! Small dense symmetric-matrix routines: Cholesky factorization, a cyclic
//! Jacobi eigensolver, and nearest-correlation repair by eigenvalue
//! clipping with diagonal rescaling. Matrices here are desk scale (tens of
//! columns), so simplicity and determinism win over asymptotics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::dimension("matrix rows must form a square"));
        }
        Ok(SquareMatrix { dim, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// y = M x for a full matrix.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// y = L x using only the lower triangle (including the diagonal).
    pub fn lower_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..i * self.dim + i + 1];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Fitted correlation matrix: symmetric, unit diagonal, entries in
/// [-1, 1], and positive semidefinite up to a -1e-10 eigenvalue floor.
/// Construction validates all four.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationMatrixRepr", into = "CorrelationMatrixRepr")]
pub struct CorrelationMatrix {
    matrix: SquareMatrix,
}

#[derive(Serialize, Deserialize)]
struct CorrelationMatrixRepr {
    dim: usize,
    entries: Vec<f64>,
}

impl TryFrom<CorrelationMatrixRepr> for CorrelationMatrix {
    type Error = Error;
    fn try_from(r: CorrelationMatrixRepr) -> Result<Self> {
        if r.entries.len() != r.dim * r.dim {
            return Err(Error::dimension(format!(
                "correlation matrix: {} entries for dimension {}",
                r.entries.len(),
                r.dim
            )));
        }
        CorrelationMatrix::new(SquareMatrix { dim: r.dim, data: r.entries })
    }
}

impl From<CorrelationMatrix> for CorrelationMatrixRepr {
    fn from(c: CorrelationMatrix) -> Self {
        CorrelationMatrixRepr { dim: c.matrix.dim, entries: c.matrix.data }
    }
}

pub(crate) const PSD_EIGUARD: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

impl CorrelationMatrix {
    /// Validates and wraps a symmetric matrix as a correlation matrix.
    pub fn new(matrix: SquareMatrix) -> Result<Self> {
        let d = matrix.dim;
        if d == 0 {
            return Err(Error::dimension("correlation matrix must be at least 1x1"));
        }
        for i in 0..d {
            if matrix.get(i, i) != 1.0 {
                return Err(Error::domain(format!(
                    "correlation matrix: diagonal entry ({i},{i}) is {}, expected exactly 1",
                    matrix.get(i, i)
                )));
            }
            for j in 0..i {
                let a = matrix.get(i, j);
                let b = matrix.get(j, i);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::domain(format!(
                        "correlation matrix: asymmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                if !a.is_finite() || a.abs() > 1.0 {
                    return Err(Error::domain(format!(
                        "correlation matrix: entry ({i},{j}) = {a} outside [-1, 1]"
                    )));
                }
            }
        }
        let (eigenvalues, _) = jacobi_eigen(&matrix);
        let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_EIGUARD {
            return Err(Error::domain(format!(
                "correlation matrix: not positive semidefinite (smallest eigenvalue {min:.3e})"
            )));
        }
        Ok(CorrelationMatrix { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        CorrelationMatrix { matrix: SquareMatrix::identity(dim) }
    }

    /// Convenience constructor with every off-diagonal entry set to `rho`.
    pub fn constant_off_diagonal(dim: usize, rho: f64) -> Result<Self> {
        let mut m = SquareMatrix::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    m.set(i, j, rho);
                }
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.matrix
    }
}

/// Cholesky factorization P = A Aᵀ with A lower triangular. Fails with the
/// zero-based pivot index when the matrix is not positive definite.
pub fn cholesky(p: &CorrelationMatrix) -> Result<SquareMatrix> {
    cholesky_raw(p.as_matrix())
}

pub(crate) fn cholesky_raw(m: &SquareMatrix) -> Result<SquareMatrix> {
    let d = m.dim();
    let mut a = SquareMatrix::zeros(d);
    for j in 0..d {
        let mut diag = m.get(j, j);
        for k in 0..j {
            diag -= a.get(j, k) * a.get(j, k);
        }
        if diag <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let diag = diag.sqrt();
        a.set(j, j, diag);
        for i in (j + 1)..d {
            let mut v = m.get(i, j);
            for k in 0..j {
                v -= a.get(i, k) * a.get(j, k);
            }
            a.set(i, j, v / diag);
        }
    }
    Ok(a)
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations. Returns
/// `(eigenvalues, V)` with `M = V diag(λ) Vᵀ` and eigenvectors in the
/// columns of `V`. Accuracy is excellent at the dimensions this crate
/// handles; cost is O(d³) per sweep.
pub fn jacobi_eigen(m: &SquareMatrix) -> (Vec<f64>, SquareMatrix) {
    let d = m.dim();
    let mut a = m.clone();
    let mut v = SquareMatrix::identity(d);
    if d < 2 {
        return ((0..d).map(|i| a.get(i, i)).collect(), v);
    }
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() < 1e-14 * (d as f64) {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..d {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    ((0..d).map(|i| a.get(i, i)).collect(), v)
}

fn smallest_eigenvalue(m: &SquareMatrix) -> f64 {
    let (eigenvalues, _) = jacobi_eigen(m);
    eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

const NEARCORR_TOL: f64 = 1e-8;
const NEARCORR_MAX_ITER: usize = 200;

/// Repairs a symmetric unit-diagonal matrix with entries in [-1, 1] into a
/// valid correlation matrix. Inputs already satisfying the PSD guard are
/// returned unchanged; otherwise eigenvalue clipping and diagonal
/// rescaling are iterated until successive iterates differ by less than
/// 1e-8 (at most 200 iterations).
pub fn nearest_correlation(s: &SquareMatrix) -> Result<CorrelationMatrix> {
    let d = s.dim();
    if d == 0 {
        return Err(Error::dimension("nearest_correlation: empty matrix"));
    }
    for i in 0..d {
        if (s.get(i, i) - 1.0).abs() > SYMMETRY_TOL {
            return Err(Error::domain(format!(
                "nearest_correlation: diagonal entry ({i},{i}) = {} is not 1",
                s.get(i, i)
            )));
        }
        for j in 0..i {
            if (s.get(i, j) - s.get(j, i)).abs() > SYMMETRY_TOL {
                return Err(Error::domain(format!(
                    "nearest_correlation: input asymmetric at ({i},{j})"
                )));
            }
            if !s.get(i, j).is_finite() || s.get(i, j).abs() > 1.0 + SYMMETRY_TOL {
                return Err(Error::domain(format!(
                    "nearest_correlation: entry ({i},{j}) = {} outside [-1, 1]",
                    s.get(i, j)
                )));
            }
        }
    }

    if smallest_eigenvalue(s) >= -PSD_EIGUARD {
        let mut m = s.clone();
        for i in 0..d {
            m.set(i, i, 1.0);
        }
        return CorrelationMatrix::new(m);
    }

    let mut current = s.clone();
    for _ in 0..NEARCORR_MAX_ITER {
        let (eigenvalues, v) = jacobi_eigen(&current);
        let clipped: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0)).collect();

        // B = V diag(λ⁺) Vᵀ
        let mut b = SquareMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let sum: f64 = clipped
                    .iter()
                    .enumerate()
                    .map(|(k, l)| v.get(i, k) * l * v.get(j, k))
                    .sum();
                b.set(i, j, sum);
                b.set(j, i, sum);
            }
        }

        // Rescale back to unit diagonal.
        let scale: Vec<f64> = (0..d)
            .map(|i| {
                let bii = b.get(i, i);
                if bii > 1e-12 {
                    1.0 / bii.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let mut next = SquareMatrix::identity(d);
        for i in 0..d {
            for j in (i + 1)..d {
                let v = (b.get(i, j) * scale[i] * scale[j]).clamp(-1.0, 1.0);
                next.set(i, j, v);
                next.set(j, i, v);
            }
        }

        let delta = next.max_abs_diff(&current);
        current = next;
        if delta < NEARCORR_TOL && smallest_eigenvalue(&current) >= -PSD_EIGUARD {
            break;
        }
    }
    CorrelationMatrix::new(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reconstruct(a: &SquareMatrix) -> SquareMatrix {
        let d = a.dim();
        let mut p = SquareMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut sum = 0.0;
                for k in 0..d {
                    sum += a.get(i, k) * a.get(j, k);
                }
                p.set(i, j, sum);
            }
        }
        p
    }

    #[test]
    fn cholesky_of_identity_is_identity() {
        let p = CorrelationMatrix::identity(4);
        let a = cholesky(&p).unwrap();
        assert_eq!(a, SquareMatrix::identity(4));
    }

    #[test]
    fn cholesky_two_by_two_known_factor() {
        let p = CorrelationMatrix::constant_off_diagonal(2, 0.9).unwrap();
        let a = cholesky(&p).unwrap();
        assert_abs_diff_eq!(a.get(0, 0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(1, 0), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(1, 1), 0.19_f64.sqrt(), epsilon = 1e-15);
        assert_eq!(a.get(0, 1), 0.0);
        let back = reconstruct(&a);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(back.get(i, j), p.get(i, j), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_reports_failing_pivot() {
        // |rho| > 1 cannot pass CorrelationMatrix validation, so drive the
        // raw factorization directly.
        let m = SquareMatrix::from_rows(&[vec![1.0, 1.5], vec![1.5, 1.0]]).unwrap();
        match cholesky_raw(&m) {
            Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_two_by_two_closed_form() {
        let rho = 0.6;
        let m = SquareMatrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let (mut eigenvalues, v) = jacobi_eigen(&m);
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(eigenvalues[0], 1.0 - rho, epsilon = 1e-12);
        assert_abs_diff_eq!(eigenvalues[1], 1.0 + rho, epsilon = 1e-12);
        // Eigenvectors reproduce the matrix.
        let (l, _) = jacobi_eigen(&m);
        let mut back = SquareMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                let sum: f64 = l
                    .iter()
                    .enumerate()
                    .map(|(k, lam)| v.get(i, k) * lam * v.get(j, k))
                    .sum();
                back.set(i, j, sum);
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(back.get(i, j), m.get(i, j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn nearest_correlation_returns_psd_input_unchanged() {
        let mut m = SquareMatrix::identity(3);
        m.set(0, 1, 0.5);
        m.set(1, 0, 0.5);
        m.set(1, 2, -0.2);
        m.set(2, 1, -0.2);
        let repaired = nearest_correlation(&m).unwrap();
        assert_eq!(repaired.as_matrix().as_slice(), m.as_slice());

        let id = SquareMatrix::identity(5);
        let repaired = nearest_correlation(&id).unwrap();
        assert_eq!(repaired.as_matrix().as_slice(), id.as_slice());
    }

    #[test]
    fn nearest_correlation_repairs_infeasible_three_by_three() {
        // Off-diagonals (0.9, 0.9, -0.9): det < 0 proves a negative
        // eigenvalue (hand-expanded characteristic polynomial at 0).
        let m = SquareMatrix::from_rows(&[
            vec![1.0, 0.9, 0.9],
            vec![0.9, 1.0, -0.9],
            vec![0.9, -0.9, 1.0],
        ])
        .unwrap();
        let det = 1.0 * (1.0 - 0.81) - 0.9 * (0.9 + 0.81) + 0.9 * (-0.81 - 0.9);
        assert!(det < 0.0, "test premise: input must be indefinite");

        let repaired = nearest_correlation(&m).unwrap();
        for i in 0..3 {
            assert_eq!(repaired.get(i, i), 1.0);
        }
        assert!(smallest_eigenvalue(repaired.as_matrix()) >= -PSD_EIGUARD);
    }

    #[test]
    fn nearest_correlation_is_idempotent() {
        let m = SquareMatrix::from_rows(&[
            vec![1.0, 0.9, 0.9],
            vec![0.9, 1.0, -0.9],
            vec![0.9, -0.9, 1.0],
        ])
        .unwrap();
        let once = nearest_correlation(&m).unwrap();
        let twice = nearest_correlation(once.as_matrix()).unwrap();
        let diff = once.as_matrix().max_abs_diff(twice.as_matrix());
        assert!(diff < 1e-10, "second repair moved entries by {diff}");
    }

    #[test]
    fn correlation_matrix_validation_rejects_bad_inputs() {
        let mut m = SquareMatrix::identity(2);
        m.set(0, 0, 0.99);
        assert!(CorrelationMatrix::new(m).is_err());

        let mut m = SquareMatrix::identity(2);
        m.set(0, 1, 0.5);
        m.set(1, 0, 0.4);
        assert!(CorrelationMatrix::new(m).is_err());

        let m = SquareMatrix::from_rows(&[
            vec![1.0, 0.9, 0.9],
            vec![0.9, 1.0, -0.9],
            vec![0.9, -0.9, 1.0],
        ])
        .unwrap();
        assert!(CorrelationMatrix::new(m).is_err(), "indefinite matrix accepted");
    }

    /// Builds a random valid correlation matrix by normalizing G Gᵀ.
    fn random_correlation(dim: usize, seed: u64) -> SquareMatrix {
        let mut rng = crate::numerics::rng::RandomSource::new(seed, 77);
        let mut g = SquareMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                g.set(i, j, rng.next_std_normal());
            }
        }
        let gram = reconstruct(&g);
        let mut out = SquareMatrix::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    let denom = (gram.get(i, i) * gram.get(j, j)).sqrt();
                    out.set(i, j, gram.get(i, j) / denom);
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cholesky_reconstructs_random_correlations(dim in 2usize..=20, seed in 0u64..1000) {
            let m = random_correlation(dim, seed);
            let p = match CorrelationMatrix::new(m.clone()) {
                Ok(p) => p,
                Err(_) => return Ok(()), // Gram normalization is PSD; rounding may rarely fail the guard
            };
            let a = match cholesky(&p) {
                Ok(a) => a,
                Err(_) => return Ok(()), // semidefinite corner
            };
            let back = reconstruct(&a);
            for i in 0..dim {
                for j in 0..dim {
                    prop_assert!((back.get(i, j) - m.get(i, j)).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn jacobi_eigenvalue_sum_matches_trace(dim in 1usize..=12, seed in 0u64..1000) {
            let m = random_correlation(dim, seed);
            let (eigenvalues, _) = jacobi_eigen(&m);
            let sum: f64 = eigenvalues.iter().sum();
            prop_assert!((sum - dim as f64).abs() < 1e-9);
        }
    }
}

//! Empirical marginal distributions and generalized-inverse sampling.
//!
//! An [`Ecdf`] stores one column's sorted sample. Evaluation is the
//! right-continuous step function count(v ≤ x)/n and the quantile is the
//! generalized inverse min{x : F(x) ≥ u}, so synthetic values are always
//! resampled from the observed support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical cumulative distribution function of one numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ecdf {
    values: Vec<f64>, // sorted ascending
}

impl Ecdf {
    /// Fits the ECDF of `sample` (at least one finite value).
    pub fn fit(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::domain("ecdf: empty sample"));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("ecdf: non-finite value in sample"));
        }
        let mut values = sample.to_vec();
        values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finiteness checked"));
        Ok(Ecdf { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Sorted support of the fitted column (duplicates retained).
    pub fn support(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty by construction")
    }

    /// F(x) = count(v ≤ x) / n.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|v| *v <= x) as f64 / self.values.len() as f64
    }

    /// Generalized inverse min{x in support : F(x) ≥ u} for u in (0, 1].
    ///
    /// The step index is located with the same k/n arithmetic `eval` uses,
    /// which makes the Galois pairing `quantile(u) ≤ x ⇔ u ≤ eval(x)`
    /// exact in floating point.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::domain(format!(
                "ecdf quantile: probability {u} outside (0, 1]"
            )));
        }
        let n = self.values.len();
        let (mut lo, mut hi) = (1usize, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if mid as f64 / n as f64 >= u {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(self.values[lo - 1])
    }
}

/// Maps a vector of uniforms through the generalized inverse, reporting
/// the offending index on a domain violation.
pub fn inverse_transform_column(ecdf: &Ecdf, uniforms: &[f64]) -> Result<Vec<f64>> {
    uniforms
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            ecdf.quantile(u)
                .map_err(|e| Error::domain(format!("index {i}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_counts_at_and_below() {
        let e = Ecdf::fit(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(e.eval(1.0), 1.0 / 3.0);
        assert_eq!(e.eval(2.5), 2.0 / 3.0);
        assert_eq!(e.eval(3.0), 1.0);
        assert_eq!(e.eval(0.5), 0.0);
    }

    #[test]
    fn single_point_support() {
        let e = Ecdf::fit(&[5.0]).unwrap();
        assert_eq!(e.eval(4.9), 0.0);
        assert_eq!(e.eval(5.0), 1.0);
        assert_eq!(e.quantile(0.2).unwrap(), 5.0);
        assert_eq!(e.quantile(1.0).unwrap(), 5.0);
    }

    #[test]
    fn duplicates_count_cumulatively() {
        let e = Ecdf::fit(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(e.eval(1.0), 2.0 / 3.0);
    }

    #[test]
    fn quantile_hand_cases() {
        let e = Ecdf::fit(&[1.0, 2.0, 3.0]).unwrap();
        // F(1) = 1/3 < 0.5 ≤ F(2) = 2/3.
        assert_eq!(e.quantile(0.5).unwrap(), 2.0);
        assert_eq!(e.quantile(1.0).unwrap(), 3.0);
        assert_eq!(e.quantile(1.0 / 3.0).unwrap(), 1.0);
    }

    #[test]
    fn quantile_domain() {
        let e = Ecdf::fit(&[1.0, 2.0]).unwrap();
        assert!(e.quantile(0.0).is_err());
        assert!(e.quantile(-0.1).is_err());
        assert!(e.quantile(1.1).is_err());
        assert!(e.quantile(f64::NAN).is_err());
    }

    #[test]
    fn fit_rejects_empty_and_non_finite() {
        assert!(Ecdf::fit(&[]).is_err());
        assert!(Ecdf::fit(&[1.0, f64::NAN]).is_err());
        assert!(Ecdf::fit(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn uniform_grid_reproduces_sorted_support() {
        let raw = [9.0, -2.0, 4.0, 4.0, 0.5, 7.0];
        let e = Ecdf::fit(&raw).unwrap();
        let n = raw.len();
        let grid: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
        let out = inverse_transform_column(&e, &grid).unwrap();
        assert_eq!(out, e.support());
    }

    #[test]
    fn all_ones_yield_support_maximum() {
        let e = Ecdf::fit(&[1.0, 5.0, 3.0]).unwrap();
        let out = inverse_transform_column(&e, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(out.iter().all(|v| *v == 5.0));
    }

    #[test]
    fn inverse_transform_reports_offending_index() {
        let e = Ecdf::fit(&[1.0, 2.0]).unwrap();
        let err = inverse_transform_column(&e, &[0.5, 0.0]).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    #[test]
    fn resampled_quartiles_land_within_two_support_steps() {
        use crate::numerics::rng::RandomSource;
        let mut rng = RandomSource::new(17, 0);
        let support: Vec<f64> = (0..200).map(|_| rng.next_std_normal() * 5.0).collect();
        let e = Ecdf::fit(&support).unwrap();
        let uniforms: Vec<f64> = (0..20_000).map(|_| rng.next_open01()).collect();
        let sample = inverse_transform_column(&e, &uniforms).unwrap();
        let synth = Ecdf::fit(&sample).unwrap();
        let mut distinct = e.support().to_vec();
        distinct.dedup();
        for p in [0.25, 0.5, 0.75] {
            let train_q = e.quantile(p).unwrap();
            let synth_q = synth.quantile(p).unwrap();
            let ti = distinct.partition_point(|v| *v < train_q);
            let si = distinct.partition_point(|v| *v < synth_q);
            assert!(
                ti.abs_diff(si) <= 2,
                "quartile {p}: {synth_q} is {} support steps from {train_q}",
                ti.abs_diff(si)
            );
        }
    }

    #[test]
    fn resampled_column_matches_original_distribution() {
        // Inverse-transformed uniforms must pass a one-sample K-S test
        // against the training ECDF (critical value 1.358/sqrt(n) at 5%).
        use crate::numerics::rng::RandomSource;
        let mut rng = RandomSource::new(7, 0);
        let support: Vec<f64> = (0..500).map(|_| rng.next_std_normal() * 3.0).collect();
        let e = Ecdf::fit(&support).unwrap();
        let n = 20_000;
        let uniforms: Vec<f64> = (0..n).map(|_| rng.next_open01()).collect();
        let sample = inverse_transform_column(&e, &uniforms).unwrap();

        let mut sorted = sample;
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, x) in sorted.iter().enumerate() {
            let f = e.eval(*x);
            d = d.max((f - i as f64 / n as f64).abs());
            d = d.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        // The reference distribution is itself a step function, so allow
        // one support step of slack on top of the K-S critical value.
        assert!(d < 1.358 / (n as f64).sqrt() + 1.0 / 500.0, "K-S = {d}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn galois_pairing_is_exact(
            sample in proptest::collection::vec(-100.0f64..100.0, 1..50),
            u in 0.000001f64..=1.0,
            x in -120.0f64..120.0,
        ) {
            let e = Ecdf::fit(&sample).unwrap();
            let q = e.quantile(u).unwrap();
            prop_assert_eq!(q <= x, u <= e.eval(x));
        }

        #[test]
        fn quantiles_stay_in_support(
            sample in proptest::collection::vec(-100.0f64..100.0, 1..50),
            us in proptest::collection::vec(0.0001f64..=1.0, 1..30),
        ) {
            let e = Ecdf::fit(&sample).unwrap();
            let out = inverse_transform_column(&e, &us).unwrap();
            for v in out {
                prop_assert!(v >= e.min() && v <= e.max());
                prop_assert!(e.support().binary_search_by(|s| s.partial_cmp(&v).unwrap()).is_ok());
            }
        }
    }
}

//! Categorical columns in and out of the numeric pipeline.
//!
//! Encoding replaces each label by a draw from Normal(p̂ᵢ, p̂ᵢ(1−p̂ᵢ)/n),
//! where p̂ᵢ is the level's sample proportion — the proportion estimator
//! plus its sampling noise. Decoding maps a generated numeric value back
//! to the level whose proportion is nearest; ties prefer the original
//! row's label when one is supplied and aligned, and otherwise resolve
//! uniformly at random.
//!
//! Levels sharing one proportion share one encoding mean and cannot be
//! told apart by decode; the tie rules above are the defined behavior for
//! that case, not a workaround.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rng::RandomSource;

/// Distances this close to the minimum count as tied in decode.
const TIE_TOL: f64 = 1e-12;

/// Per-column encoding state: levels in first-appearance order, their
/// sample proportions, and the standard error of each proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalEncoding {
    levels: Vec<String>,
    proportions: Vec<f64>,
    std_errors: Vec<f64>,
    n: usize,
    z: f64,
}

impl CategoricalEncoding {
    /// Estimates level proportions and standard errors from a column.
    /// `z` is the confidence multiplier used when reporting intervals
    /// (1.96 for 95%).
    pub fn estimate(column: &[String], z: f64) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::domain("categorical encoding: empty column"));
        }
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::domain(format!(
                "categorical encoding: confidence multiplier must be positive, got {z}"
            )));
        }
        let mut levels: Vec<String> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for label in column {
            if label.is_empty() {
                return Err(Error::domain("categorical encoding: empty label"));
            }
            match levels.iter().position(|l| l == label) {
                Some(i) => counts[i] += 1,
                None => {
                    levels.push(label.clone());
                    counts.push(1);
                }
            }
        }
        let n = column.len();
        let proportions: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let std_errors: Vec<f64> = proportions
            .iter()
            .map(|&p| (p * (1.0 - p) / n as f64).sqrt())
            .collect();
        Ok(CategoricalEncoding { levels, proportions, std_errors, n, z })
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn std_errors(&self) -> &[f64] {
        &self.std_errors
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }

    /// Confidence interval p̂ ± z·se for level `i`.
    pub fn confidence_interval(&self, i: usize) -> (f64, f64) {
        let half = self.z * self.std_errors[i];
        (self.proportions[i] - half, self.proportions[i] + half)
    }

    /// The argmin set of levels whose proportion is nearest `value`,
    /// with distances within [`TIE_TOL`] of the minimum counting as tied.
    pub fn nearest_levels(&self, value: f64) -> Vec<usize> {
        let mut min = f64::INFINITY;
        for &p in &self.proportions {
            min = min.min((value - p).abs());
        }
        self.proportions
            .iter()
            .enumerate()
            .filter(|(_, &p)| (value - p).abs() <= min + TIE_TOL)
            .map(|(i, _)| i)
            .collect()
    }

    /// Validates the redundant stored fields of a deserialized encoding.
    pub(crate) fn check_consistency(&self) -> Result<()> {
        if self.levels.len() != self.proportions.len()
            || self.levels.len() != self.std_errors.len()
        {
            return Err(Error::Format("categorical encoding: ragged fields".into()));
        }
        let total: f64 = self.proportions.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Format(format!(
                "categorical encoding: proportions sum to {total}, expected 1"
            )));
        }
        for (i, (&p, &se)) in self.proportions.iter().zip(&self.std_errors).enumerate() {
            if se != (p * (1.0 - p) / self.n as f64).sqrt() {
                return Err(Error::Format(format!(
                    "categorical encoding: stored standard error for level {i} is inconsistent"
                )));
            }
        }
        Ok(())
    }
}

/// Encodes a label column to numeric values: row with level i becomes a
/// draw from Normal(p̂ᵢ, p̂ᵢ(1−p̂ᵢ)/n), one independent draw per row in row
/// order from `rng`.
pub fn encode_categorical(
    column: &[String],
    rng: &mut RandomSource,
    z: f64,
) -> Result<(CategoricalEncoding, Vec<f64>)> {
    let enc = CategoricalEncoding::estimate(column, z)?;
    let values = column
        .iter()
        .map(|label| {
            let i = enc.level_index(label).expect("levels cover the column");
            enc.proportions[i] + enc.std_errors[i] * rng.next_std_normal()
        })
        .collect();
    Ok((enc, values))
}

/// Decodes generated numeric values back to levels.
///
/// Per value: the level with the nearest proportion wins outright; on a
/// tie, the aligned `original` label is kept when it belongs to the tie
/// set, and otherwise one tied level is drawn uniformly from `rng`.
pub fn decode_categorical(
    enc: &CategoricalEncoding,
    values: &[f64],
    original: Option<&[String]>,
    rng: &mut RandomSource,
) -> Result<Vec<String>> {
    if let Some(orig) = original {
        if orig.len() != values.len() {
            return Err(Error::dimension(format!(
                "decode_categorical: {} values but {} original labels",
                values.len(),
                orig.len()
            )));
        }
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(row, &v)| {
            let tied = enc.nearest_levels(v);
            let pick = if tied.len() == 1 {
                tied[0]
            } else if let Some(i) = original
                .and_then(|orig| enc.level_index(&orig[row]))
                .filter(|i| tied.contains(i))
            {
                i
            } else {
                tied[rng.next_below(tied.len())]
            };
            enc.levels[pick].clone()
        })
        .collect())
}

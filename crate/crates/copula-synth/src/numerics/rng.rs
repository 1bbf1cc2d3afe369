//! Deterministic, splittable random source.
//!
//! A [`RandomSource`] is fully specified by a `(seed, stream_id)` pair:
//! the same pair always replays the same sequence, and distinct stream
//! ids give statistically independent streams. Samplers never share one
//! source between work items; they derive a child stream per row or per
//! column instead, which is what makes every output of this crate
//! byte-identical across thread counts.
//!
//! The generator is xoshiro256++ seeded through a splitmix64 expansion of
//! the key material. Normal deviates come from the inverse CDF, so a
//! single uniform draw maps to exactly one normal draw.

use crate::error::{Error, Result};
use crate::numerics::special::normal_quantile_raw;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes words together through a splitmix64 chain; used to derive the
/// key of child streams.
#[inline]
fn mix_words(words: &[u64]) -> u64 {
    let mut acc: u64 = 0x6A09_E667_F3BC_C909; // fractional bits of sqrt(2)
    for &w in words {
        let mut s = acc ^ w;
        acc = splitmix64(&mut s);
    }
    acc
}

/// Seeded random stream. See the module docs for the determinism and
/// independence contract.
#[derive(Debug, Clone)]
pub struct RandomSource {
    key: u64,
    state: [u64; 4],
    splits: u64,
}

impl RandomSource {
    /// Creates the stream identified by `(seed, stream_id)`.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::from_key(mix_words(&[seed, stream_id]))
    }

    fn from_key(key: u64) -> Self {
        let mut sm = key;
        let mut state = [0u64; 4];
        for slot in &mut state {
            *slot = splitmix64(&mut sm);
        }
        // splitmix64 cannot emit four zero words from one chain, but the
        // generator must never start from the all-zero state.
        if state == [0, 0, 0, 0] {
            state[0] = GOLDEN;
        }
        RandomSource { key, state, splits: 0 }
    }

    /// Derives the `index`-th child stream without consuming any state.
    /// Children of one source are mutually independent and independent of
    /// the parent's own draws.
    pub fn child(&self, index: u64) -> RandomSource {
        Self::from_key(mix_words(&[self.key, 0x43_48_49_4C_44, index]))
    }

    /// Derives the next child stream in sequence, advancing an internal
    /// counter; successive calls yield distinct streams.
    pub fn split(&mut self) -> RandomSource {
        let c = self.splits;
        self.splits += 1;
        Self::from_key(mix_words(&[self.key, 0x53_50_4C_49_54, c]))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform deviate strictly inside (0, 1): the 52-bit mantissa grid
    /// offset by half a step, so 0.0 and 1.0 are unreachable.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        (((self.next_u64() >> 12) as f64) + 0.5) * (1.0 / (1u64 << 52) as f64)
    }

    /// Standard normal deviate via the inverse CDF.
    #[inline]
    pub fn next_std_normal(&mut self) -> f64 {
        normal_quantile_raw(self.next_open01())
    }

    /// Uniform integer in `0..bound` (`bound` ≥ 1) by fixed-point scaling.
    #[inline]
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound >= 1);
        ((self.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    /// One gamma(shape, 1) deviate by the Marsaglia-Tsang squeeze, with
    /// the power boost for shape < 1.
    fn next_gamma(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let boost = self.next_open01().powf(1.0 / shape);
            return self.next_gamma(shape + 1.0) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.next_std_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.next_open01();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// One chi-squared deviate with `nu` degrees of freedom (nu > 0).
    pub fn next_chi_squared(&mut self, nu: f64) -> Result<f64> {
        if !nu.is_finite() || nu <= 0.0 {
            return Err(Error::domain(format!(
                "chi-squared sample: degrees of freedom must be positive, got {nu}"
            )));
        }
        Ok(2.0 * self.next_gamma(0.5 * nu))
    }
}

/// Fills a vector with `n` standard normal deviates drawn sequentially
/// from `rng`.
pub fn sample_std_normal_vector(n: usize, rng: &mut RandomSource) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sample_std_normal_vector: n must be at least 1"));
    }
    Ok((0..n).map(|_| rng.next_std_normal()).collect())
}

/// One chi-squared draw; free-function form of
/// [`RandomSource::next_chi_squared`].
pub fn sample_chi_squared(nu: f64, rng: &mut RandomSource) -> Result<f64> {
    rng.next_chi_squared(nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{gamma_p, normal_cdf_raw};

    #[test]
    fn same_seed_and_stream_replays_identically() {
        let mut a = RandomSource::new(42, 7);
        let mut b = RandomSource::new(42, 7);
        let xs: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RandomSource::new(42, 0);
        let mut b = RandomSource::new(42, 1);
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn children_are_stable_and_distinct_from_parent() {
        let parent = RandomSource::new(9, 3);
        let mut c1 = parent.child(5);
        let mut c1_again = parent.child(5);
        let mut c2 = parent.child(6);
        let a = c1.next_u64();
        assert_eq!(a, c1_again.next_u64());
        assert_ne!(a, c2.next_u64());
        let mut p = parent.clone();
        assert_ne!(a, p.next_u64());
    }

    #[test]
    fn split_advances() {
        let mut rng = RandomSource::new(1, 0);
        let mut s1 = rng.split();
        let mut s2 = rng.split();
        assert_ne!(s1.next_u64(), s2.next_u64());
        // A fresh source with the same identity splits the same way.
        let mut rng2 = RandomSource::new(1, 0);
        let mut t1 = rng2.split();
        let mut t2 = rng2.split();
        assert_eq!(s1.next_u64(), {
            t1.next_u64();
            t1.next_u64()
        });
        assert_eq!(s2.next_u64(), {
            t2.next_u64();
            t2.next_u64()
        });
    }

    #[test]
    fn open01_stays_strictly_inside_the_unit_interval() {
        let mut rng = RandomSource::new(0, 0);
        for _ in 0..200_000 {
            let u = rng.next_open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_vector_moments_and_ks() {
        let n = 100_000;
        let mut rng = RandomSource::new(1, 0);
        let v = sample_std_normal_vector(n, &mut rng).unwrap();
        let mean = v.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean = {mean}");
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.03, "variance = {var}");

        // One-sample K-S against Φ below the 1% critical value.
        let mut sorted = v;
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, x) in sorted.iter().enumerate() {
            let f = normal_cdf_raw(*x);
            d = d.max((f - i as f64 / n as f64).abs());
            d = d.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(d < 0.006, "K-S statistic {d}");
    }

    #[test]
    fn normal_vector_rejects_zero_length() {
        let mut rng = RandomSource::new(0, 0);
        assert!(sample_std_normal_vector(0, &mut rng).is_err());
    }

    #[test]
    fn chi_squared_mean_and_positivity() {
        let mut rng = RandomSource::new(3, 0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = rng.next_chi_squared(3.0).unwrap();
            assert!(x > 0.0);
            sum += x;
        }
        let mean = sum / n as f64;
        assert!((mean - 3.0).abs() < 0.1, "mean = {mean}");
    }

    #[test]
    fn chi_squared_small_dof_mean() {
        // Exercises the shape < 1 boost.
        let mut rng = RandomSource::new(4, 0);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| rng.next_chi_squared(0.8).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.8).abs() < 0.05, "mean = {mean}");
    }

    #[test]
    fn chi_squared_distribution_matches_cdf() {
        // Empirical CDF against gamma_p at a few quantiles.
        let mut rng = RandomSource::new(5, 0);
        let n = 50_000;
        let mut draws: Vec<f64> = (0..n)
            .map(|_| rng.next_chi_squared(3.0).unwrap())
            .collect();
        draws.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        for &x in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let emp = draws.partition_point(|v| *v <= x) as f64 / n as f64;
            let want = gamma_p(1.5, 0.5 * x);
            assert!(
                (emp - want).abs() < 0.01,
                "chi2 CDF mismatch at {x}: {emp} vs {want}"
            );
        }
    }

    #[test]
    fn chi_squared_rejects_bad_dof() {
        let mut rng = RandomSource::new(0, 0);
        assert!(rng.next_chi_squared(0.0).is_err());
        assert!(rng.next_chi_squared(-1.0).is_err());
        assert!(sample_chi_squared(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn same_state_same_draw() {
        let mut a = RandomSource::new(11, 2);
        let mut b = RandomSource::new(11, 2);
        assert_eq!(
            a.next_chi_squared(2.5).unwrap(),
            b.next_chi_squared(2.5).unwrap()
        );
        assert_eq!(a.next_std_normal(), b.next_std_normal());
    }
}

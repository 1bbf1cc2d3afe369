//! Independent oracles for the metric implementations: a quadratic
//! pair-enumeration Kendall tau that the merge-count version must match
//! exactly, and an exhaustive permutation K-S test whose accept/reject
//! decisions the asymptotic p-value must reproduce at tiny sample sizes.

use copula_synth::copula::kendall_tau;
use copula_synth::numerics::RandomSource;
use copula_synth::quality::ks_two_sample;

/// Kendall tau-b by brute-force enumeration of all pairs, sharing only
/// the final ratio formula with the production path.
fn kendall_tau_brute(x: &[f64], y: &[f64]) -> Option<f64> {
    use std::cmp::Ordering::*;
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut tied_x = 0i64;
    let mut tied_y = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i].partial_cmp(&x[j]).unwrap();
            let dy = y[i].partial_cmp(&y[j]).unwrap();
            match (dx, dy) {
                (Equal, Equal) => {
                    tied_x += 1;
                    tied_y += 1;
                }
                (Equal, _) => tied_x += 1,
                (_, Equal) => tied_y += 1,
                (Less, Less) | (Greater, Greater) => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (n as i64) * (n as i64 - 1) / 2;
    if n0 == tied_x || n0 == tied_y {
        return None;
    }
    let denom = ((n0 - tied_x) as f64 * (n0 - tied_y) as f64).sqrt();
    Some((((concordant - discordant) as f64) / denom).clamp(-1.0, 1.0))
}

#[test]
fn kendall_agrees_exactly_with_pair_enumeration() {
    let mut rng = RandomSource::new(600, 0);
    let mut checked = 0;
    for case in 0..200 {
        let len = 2 + rng.next_below(49);
        // Mix continuous values and coarse ones so ties appear often.
        let coarse = case % 3 == 0;
        let gen = |r: &mut RandomSource| {
            if coarse {
                (r.next_below(6)) as f64
            } else {
                r.next_std_normal()
            }
        };
        let x: Vec<f64> = (0..len).map(|_| gen(&mut rng)).collect();
        let y: Vec<f64> = (0..len).map(|_| gen(&mut rng)).collect();
        match (kendall_tau(&x, &y), kendall_tau_brute(&x, &y)) {
            (Ok(fast), Some(brute)) => {
                assert_eq!(fast, brute, "case {case}: {fast} vs {brute}\nx={x:?}\ny={y:?}");
                checked += 1;
            }
            (Err(_), None) => {} // both sides report full ties
            (fast, brute) => {
                panic!("case {case}: fast {fast:?} disagrees with brute {brute:?}")
            }
        }
    }
    assert!(checked >= 150, "only {checked} non-degenerate cases");
}

/// Exact two-sample K-S p-value by enumerating every assignment of the
/// pooled values into the two groups: the fraction of splits whose
/// statistic is at least the observed one.
fn ks_permutation_p(x: &[f64], y: &[f64]) -> f64 {
    fn statistic(x: &[f64], y: &[f64]) -> f64 {
        let mut xs = x.to_vec();
        let mut ys = y.to_vec();
        xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        ys.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let (nx, ny) = (xs.len(), ys.len());
        let (mut i, mut j) = (0usize, 0usize);
        let mut d: f64 = 0.0;
        while i < nx && j < ny {
            let v = xs[i].min(ys[j]);
            while i < nx && xs[i] == v {
                i += 1;
            }
            while j < ny && ys[j] == v {
                j += 1;
            }
            d = d.max((i as f64 / nx as f64 - j as f64 / ny as f64).abs());
        }
        d
    }

    let observed = statistic(x, y);
    let mut pooled = x.to_vec();
    pooled.extend_from_slice(y);
    let total = pooled.len();
    let nx = x.len();

    // Walk all C(total, nx) index subsets.
    let mut indices: Vec<usize> = (0..nx).collect();
    let mut at_least = 0u64;
    let mut count = 0u64;
    loop {
        let mut in_x = vec![false; total];
        for &i in &indices {
            in_x[i] = true;
        }
        let xs: Vec<f64> = (0..total).filter(|&i| in_x[i]).map(|i| pooled[i]).collect();
        let ys: Vec<f64> = (0..total).filter(|&i| !in_x[i]).map(|i| pooled[i]).collect();
        if statistic(&xs, &ys) >= observed - 1e-12 {
            at_least += 1;
        }
        count += 1;

        // Next combination in lexicographic order.
        let mut k = nx;
        loop {
            if k == 0 {
                return at_least as f64 / count as f64;
            }
            k -= 1;
            if indices[k] != k + total - nx {
                break;
            }
        }
        indices[k] += 1;
        for i in (k + 1)..nx {
            indices[i] = indices[i - 1] + 1;
        }
    }
}

#[test]
fn ks_hand_case_agrees_with_permutation_oracle() {
    let x = [1.0, 2.0];
    let y = [1.5, 2.5];
    let (d, p_asymp) = ks_two_sample(&x, &y).unwrap();
    assert_eq!(d, 0.5);
    let p_exact = ks_permutation_p(&x, &y);
    // All 6 splits reach D >= 0.5 here.
    assert_eq!(p_exact, 1.0);
    assert_eq!(p_asymp > 0.05, p_exact > 0.05);
}

#[test]
fn ks_asymptotic_decisions_match_exact_permutation_on_tiny_samples() {
    let mut rng = RandomSource::new(601, 0);
    let mut agree = 0usize;
    let total = 200usize;
    for case in 0..total {
        let nx = 2 + rng.next_below(5); // 2..=6
        let ny = 2 + rng.next_below(5);
        // Half the cases share a distribution, half are shifted apart so
        // both decisions occur.
        let shift = if case % 2 == 0 { 0.0 } else { 2.5 };
        let x: Vec<f64> = (0..nx).map(|_| rng.next_std_normal()).collect();
        let y: Vec<f64> = (0..ny).map(|_| rng.next_std_normal() + shift).collect();
        let (_, p_asymp) = ks_two_sample(&x, &y).unwrap();
        let p_exact = ks_permutation_p(&x, &y);
        if (p_asymp <= 0.05) == (p_exact <= 0.05) {
            agree += 1;
        }
    }
    let rate = agree as f64 / total as f64;
    assert!(rate >= 0.95, "decision agreement {rate} below 95%");
}

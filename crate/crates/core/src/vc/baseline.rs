//! Degree bounds and random reference functions for the certification runs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::sign::monotone_runs;

/// `(r + 1) k + r (K - 1)`.
pub fn r_monotone_bound(r: usize, k: usize, big_k: usize) -> usize {
    (r + 1) * k + r * (big_k - 1)
}

/// Linear space of dimension `d`.
pub fn linear_space_bound(d: usize) -> usize {
    d + 1
}

/// Single-index class in `R^m` with a `K`-piece constant link.
pub fn single_index_bound(m: usize, big_k: usize) -> usize {
    (m + 1) * big_k
}

/// Points `0, 1, ..., n - 1` as univariate rows.
pub fn integer_grid(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| vec![i as f64]).collect()
}

/// Random cut positions splitting `0..n` into at most `pieces` runs.
fn cuts<R: Rng + ?Sized>(n: usize, pieces: usize, rng: &mut R) -> Vec<usize> {
    let mut inner: Vec<usize> = (1..n).collect();
    inner.shuffle(rng);
    let mut c: Vec<usize> = inner.into_iter().take(pieces.saturating_sub(1)).collect();
    c.sort_unstable();
    c
}

/// Integer step function on `n` points with at most `big_k` steps and at
/// most `k` monotone runs.
pub fn random_step_baseline<R: Rng + ?Sized>(n: usize, k: usize, big_k: usize, rng: &mut R) -> Vec<f64> {
    let c = cuts(n, big_k, rng);
    for _ in 0..1000 {
        let levels: Vec<f64> = (0..=c.len()).map(|_| rng.gen_range(-3..=3) as f64).collect();
        if monotone_runs(&levels) <= k {
            return expand(n, &c, &levels);
        }
    }
    let mut levels: Vec<f64> = (0..=c.len()).map(|_| rng.gen_range(-3..=3) as f64).collect();
    levels.sort_by(f64::total_cmp);
    expand(n, &c, &levels)
}

fn expand(n: usize, cuts: &[usize], levels: &[f64]) -> Vec<f64> {
    (0..n).map(|i| levels[cuts.iter().filter(|&&c| c <= i).count()]).collect()
}

/// Continuous integer-valued function on the grid `0..n`, linear between at
/// most `big_k - 1` breakpoints, monotone and convex or concave.
pub fn random_linear_baseline<R: Rng + ?Sized>(n: usize, big_k: usize, rng: &mut R) -> Vec<f64> {
    let c = cuts(n, big_k, rng);
    let mut slopes: Vec<i64> = (0..=c.len()).map(|_| rng.gen_range(0..=3)).collect();
    slopes.sort_unstable();
    let mut v = vec![0i64; n];
    v[0] = rng.gen_range(-3..=3);
    for i in 1..n {
        let piece = c.iter().filter(|&&b| b < i).count();
        v[i] = v[i - 1] + slopes[piece];
    }
    let mut out: Vec<f64> = v.into_iter().map(|x| x as f64).collect();
    if rng.gen_bool(0.5) {
        out.reverse();
    }
    if rng.gen_bool(0.5) {
        out.iter_mut().for_each(|x| *x = -*x);
    }
    out
}

/// `n` distinct integer points in `[0, 6]^2`.
pub fn random_planar_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = (0..7).flat_map(|a| (0..7).map(move |b| vec![a as f64, b as f64])).collect();
    all.shuffle(rng);
    all.truncate(n);
    all
}

/// `phi(<theta, x>)` with an integer direction and a nondecreasing link
/// taking at most `big_k` integer values.
pub fn random_single_index_baseline<R: Rng + ?Sized>(points: &[Vec<f64>], big_k: usize, rng: &mut R) -> Vec<f64> {
    let (a, b) = loop {
        let a: i64 = rng.gen_range(-3..=3);
        let b: i64 = rng.gen_range(-3..=3);
        if a != 0 || b != 0 {
            break (a, b);
        }
    };
    let t: Vec<f64> = points.iter().map(|p| a as f64 * p[0] + b as f64 * p.get(1).copied().unwrap_or(0.0)).collect();
    let mut distinct = t.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    distinct.remove(0);
    distinct.shuffle(rng);
    let mut thresholds: Vec<f64> = distinct.into_iter().take(big_k.saturating_sub(1)).collect();
    thresholds.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = (0..=thresholds.len()).map(|_| rng.gen_range(-3..=3) as f64).collect();
    levels.sort_by(f64::total_cmp);
    t.iter().map(|v| levels[thresholds.iter().filter(|&&c| c <= *v).count()]).collect()
}

//! Piecewise-constant approximation of monotone values on a design.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Design, Partition};

/// `|X|^{-1} sum |f(x) - mean|`.
pub fn mean_abs_deviation(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::structural("mean deviation of an empty set"));
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - m).abs()).sum::<f64>() / n)
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalVariation {
    /// Design indices covered by the interval.
    pub start: usize,
    pub end: usize,
    pub count: usize,
    pub variation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationReport {
    pub total_variation: f64,
    pub j_variation: f64,
    pub intervals: Vec<IntervalVariation>,
}

impl VariationReport {
    pub(crate) fn from_intervals(intervals: Vec<IntervalVariation>, n: usize) -> Self {
        let total_variation = intervals.iter().map(|i| i.variation).sum();
        let root: f64 = intervals.iter().map(|i| (i.count as f64 * i.variation / n as f64).sqrt()).sum();
        VariationReport { total_variation, j_variation: root * root, intervals }
    }
}

fn range_of(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
    hi - lo
}

/// Variations of the values over the blocks of a partition of the design.
pub fn variation_on_design(values: &[f64], partition: &Partition) -> Result<VariationReport> {
    if partition.n() != values.len() {
        return Err(Error::structural("partition and values differ in length"));
    }
    let intervals = partition
        .blocks()
        .iter()
        .map(|b| IntervalVariation { start: b.start, end: b.end, count: b.len(), variation: range_of(&values[b.clone()]) })
        .collect();
    Ok(VariationReport::from_intervals(intervals, values.len()))
}

pub(crate) fn monotone_direction(v: &[f64]) -> Option<bool> {
    if v.windows(2).all(|w| w[0] <= w[1]) {
        Some(true)
    } else if v.windows(2).all(|w| w[0] >= w[1]) {
        Some(false)
    } else {
        None
    }
}

fn check_ties(design: &Design, values: &[f64]) -> Result<()> {
    if design.len() != values.len() {
        return Err(Error::structural("design and values differ in length"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::structural("values are not finite"));
    }
    for r in design.levels() {
        if values[r.clone()].iter().any(|v| *v != values[r.start]) {
            return Err(Error::contract("values differ at tied abscissas"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockApprox {
    pub fhat: Vec<f64>,
    pub blocks: Vec<Range<usize>>,
    /// `(1/K + 1/n) |f(x_n) - f(x_1)| / 2`.
    pub lemma_bound: f64,
    /// Certified bound on the design loss. Equals `lemma_bound` unless block
    /// ends had to move to keep tied abscissas together, in which case the
    /// largest block size enters instead of `q + 1`.
    pub bound: f64,
}

/// Means over `K ∧ n` consecutive blocks of near-equal size: the first
/// `K - r` blocks have `q` points and the last `r` have `q + 1`, where
/// `n = K q + r`.
pub fn block_mean_approx(design: &Design, values: &[f64], k: usize) -> Result<BlockApprox> {
    if k == 0 {
        return Err(Error::structural("number of blocks must be positive"));
    }
    check_ties(design, values)?;
    if monotone_direction(values).is_none() {
        return Err(Error::contract("values are not monotone along the design"));
    }
    let n = values.len();
    let pts = design.points();
    let mut ends = Vec::new();
    if k >= n {
        ends.extend(1..=n);
    } else {
        let (q, r) = (n / k, n % k);
        let mut e = 0;
        for j in 0..k {
            e += if j < k - r { q } else { q + 1 };
            ends.push(e);
        }
    }
    // a block end may not split tied abscissas
    for e in ends.iter_mut() {
        while *e < n && pts[*e] == pts[*e - 1] {
            *e += 1;
        }
    }
    ends.dedup();
    let mut blocks = Vec::with_capacity(ends.len());
    let mut fhat = vec![0.0; n];
    let mut start = 0;
    for &e in &ends {
        let m = values[start..e].iter().sum::<f64>() / (e - start) as f64;
        fhat[start..e].iter_mut().for_each(|v| *v = m);
        blocks.push(start..e);
        start = e;
    }
    let v = (values[n - 1] - values[0]).abs();
    let kk = k.min(n) as f64;
    let lemma_bound = (1.0 / kk + 1.0 / n as f64) * v / 2.0;
    let max_size = blocks.iter().map(|b| b.len()).max().unwrap_or(0);
    let bound = lemma_bound.max(max_size as f64 * v / (2.0 * n as f64));
    Ok(BlockApprox { fhat, blocks, lemma_bound, bound })
}

#[derive(Debug, Clone, Serialize)]
pub struct PiecewiseApprox {
    pub fhat: Vec<f64>,
    /// Blocks allotted to each interval of the partition.
    pub allocation: Vec<usize>,
    pub pieces: usize,
    /// `V_J(x, f) / gamma`.
    pub proposition_bound: f64,
    pub bound: f64,
    pub variation: VariationReport,
}

/// Block-mean approximation inside each interval of `partition`, with
/// `ceil(gamma sqrt((n_J / n)(V_J / V_J(x, f))))` blocks in interval `J`.
pub fn piecewise_constant_approx(design: &Design, values: &[f64], partition: &Partition, gamma: f64) -> Result<PiecewiseApprox> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::contract("gamma must be positive"));
    }
    check_ties(design, values)?;
    partition.check_design(design)?;
    let variation = variation_on_design(values, partition)?;
    let n = values.len();
    let vj = variation.j_variation;
    let mut fhat = vec![0.0; n];
    let mut allocation = Vec::new();
    let mut pieces = 0;
    let mut block_bound = 0.0;
    for (b, iv) in partition.blocks().iter().zip(&variation.intervals) {
        let part = &values[b.clone()];
        if monotone_direction(part).is_none() {
            return Err(Error::contract(format!("values are not monotone on block {}..{}", b.start, b.end)));
        }
        let kj = if vj > 0.0 {
            ((gamma * (iv.count as f64 / n as f64 * iv.variation / vj).sqrt()).ceil() as usize).max(1)
        } else {
            1
        };
        let sub = Design::new(design.points()[b.clone()].to_vec())?;
        let ap = block_mean_approx(&sub, part, kj)?;
        fhat[b.clone()].copy_from_slice(&ap.fhat);
        allocation.push(kj);
        pieces += ap.blocks.len();
        block_bound += iv.count as f64 / n as f64 * ap.bound;
    }
    let proposition_bound = vj / gamma;
    Ok(PiecewiseApprox { fhat, allocation, pieces, proposition_bound, bound: proposition_bound.max(block_bound), variation })
}

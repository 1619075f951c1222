//! Linear index and variation-index of piecewise monotone convex-concave
//! functions.

use serde::Serialize;

use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::model::Design;

use super::blocks::{IntervalVariation, VariationReport};

#[derive(Debug, Clone, Serialize)]
pub struct LinearIndexReport {
    pub gamma: f64,
    pub right_derivative_a: f64,
    pub left_derivative_b: f64,
    pub chord_slope: f64,
}

// x / y with 0/0 = 1 and x/inf = 0.
fn ratio(x: f64, y: f64) -> f64 {
    if y.is_infinite() {
        0.0
    } else if x == 0.0 && y == 0.0 {
        1.0
    } else {
        x / y
    }
}

/// `1 - [ (|f'_r(a)| ∧ |f'_l(b)|) / |Δ| + |Δ| / (|f'_r(a)| ∨ |f'_l(b)|) ] / 2`.
/// An interval with `f(a) = f(b)` gets index 0.
pub fn linear_index(fa: f64, fb: f64, dr_a: f64, dl_b: f64, a: f64, b: f64) -> Result<LinearIndexReport> {
    if !(a < b) {
        return Err(Error::structural("linear index needs a < b"));
    }
    if !fa.is_finite() || !fb.is_finite() || dr_a.is_nan() || dl_b.is_nan() {
        return Err(Error::structural("linear index inputs must be numbers"));
    }
    let delta = (fb - fa) / (b - a);
    let lo = dr_a.abs().min(dl_b.abs());
    let hi = dr_a.abs().max(dl_b.abs());
    let gamma = if delta == 0.0 {
        0.0
    } else {
        (1.0 - 0.5 * (ratio(lo, delta.abs()) + ratio(delta.abs(), hi))).clamp(0.0, 1.0)
    };
    Ok(LinearIndexReport { gamma, right_derivative_a: dr_a, left_derivative_b: dl_b, chord_slope: delta })
}

pub fn linear_index_of(f: &dyn Curve, a: f64, b: f64) -> Result<LinearIndexReport> {
    linear_index(f.value(a), f.value(b), f.right_derivative(a), f.left_derivative(b), a, b)
}

/// Intervals `[t_j, t_{j+1})` (the last one closed) given the sorted
/// endpoints `t_0 < ... < t_m`.
fn counts(design: &Design, ends: &[f64]) -> Result<Vec<(usize, usize)>> {
    if ends.len() < 2 || ends.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::structural("interval endpoints must increase"));
    }
    let pts = design.points();
    let m = ends.len() - 1;
    Ok((0..m)
        .map(|j| {
            let lo = pts.partition_point(|x| *x < ends[j]);
            let hi = if j + 1 == m { pts.partition_point(|x| *x <= ends[m]) } else { pts.partition_point(|x| *x < ends[j + 1]) };
            (lo, hi.max(lo))
        })
        .collect())
}

/// Variations of a continuous function that is monotone between
/// consecutive `ends`, with design counts per interval.
pub fn variation_of_curve(f: &dyn Curve, ends: &[f64], design: &Design) -> Result<VariationReport> {
    let c = counts(design, ends)?;
    let intervals = c
        .iter()
        .enumerate()
        .map(|(j, &(lo, hi))| IntervalVariation {
            start: lo,
            end: hi,
            count: hi - lo,
            variation: (f.value(ends[j + 1]) - f.value(ends[j])).abs(),
        })
        .collect();
    Ok(VariationReport::from_intervals(intervals, design.len()))
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationIndexReport {
    pub w: f64,
    /// `(sum n_J / n)(sum V_J)(sum Gamma_J)`.
    pub holder_bound: f64,
    /// `(n_J, V_J, Gamma_J)` per interval.
    pub intervals: Vec<(usize, f64, f64)>,
}

/// `[sum_J (n_J V_J Gamma_J / n)^{1/3}]^3` from per-interval triples.
pub fn variation_index_from(triples: &[(usize, f64, f64)], n: usize) -> Result<VariationIndexReport> {
    if n == 0 {
        return Err(Error::structural("empty design"));
    }
    let nn = n as f64;
    let s: f64 = triples.iter().map(|&(c, v, g)| (c as f64 * v * g / nn).cbrt()).sum();
    let frac: f64 = triples.iter().map(|t| t.0 as f64 / nn).sum();
    let vsum: f64 = triples.iter().map(|t| t.1).sum();
    let gsum: f64 = triples.iter().map(|t| t.2).sum();
    Ok(VariationIndexReport { w: s * s * s, holder_bound: frac * vsum * gsum, intervals: triples.to_vec() })
}

pub fn variation_index(f: &dyn Curve, ends: &[f64], design: &Design) -> Result<VariationIndexReport> {
    let c = counts(design, ends)?;
    let mut triples = Vec::with_capacity(c.len());
    for (j, &(lo, hi)) in c.iter().enumerate() {
        let (a, b) = (ends[j], ends[j + 1]);
        let g = linear_index_of(f, a, b)?.gamma;
        triples.push((hi - lo, (f.value(b) - f.value(a)).abs(), g));
    }
    variation_index_from(&triples, design.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::TestCurve;

    #[test]
    fn index_examples() {
        let r = linear_index(1.0, 0.0, -1e10, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(r.gamma, 1.0 - 1e-10 / 2.0);
        let sq = linear_index_of(&TestCurve::Power(2.0), 0.0, 1.0).unwrap();
        assert_eq!(sq.gamma, 0.75);
        let aff = linear_index_of(&TestCurve::Affine { slope: -3.0, intercept: 1.0 }, 0.0, 2.0).unwrap();
        assert_eq!(aff.gamma, 0.0);
        assert_eq!(linear_index_of(&TestCurve::Power(0.5), 0.0, 1.0).unwrap().gamma, 0.75);
        assert!(linear_index(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn w_examples() {
        let r = variation_index_from(&[(5, 1.0, 1.0), (5, 1.0, 1.0)], 10).unwrap();
        assert!((r.w - 4.0).abs() < 1e-12);
        assert!((r.holder_bound - 4.0).abs() < 1e-12);
        let d = Design::equispaced(10).unwrap();
        let aff = TestCurve::parse("pwl:0/0,0.5/1,1/0").unwrap();
        assert_eq!(variation_index(&aff, &[0.0, 0.5, 1.0], &d).unwrap().w, 0.0);
        let sq = TestCurve::Power(2.0);
        let r = variation_index(&sq, &[0.0, 1.0], &d).unwrap();
        assert!((r.w - 0.75).abs() < 1e-12);
    }
}

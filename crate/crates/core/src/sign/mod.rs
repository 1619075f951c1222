//! The sign statistic `T(Z, f, g)`, its expectation and supremum oracles.

mod brute;
mod class;
mod index;
pub(crate) mod oracle;

pub use brute::{brute_force_sup_t, pattern_feasible};
pub(crate) use brute::{chain, Interval};
pub use class::{convex_monotone_runs, linear_span_coef, monotone_runs, ShapeClass};
pub use index::{index_contains, sup_t_index, sup_value_index, IndexGeometry, IndexSupResult};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Data;
use class::sgn;
use oracle::{convex_monotone_sup, level_lists, monotone_sup, pattern_of, piecewise_split, segment_values};

/// `sgn(f_i - g_i)` with `sgn(0) = 0`.
pub fn sign_vector(f: &[f64], g: &[f64]) -> Result<Vec<i8>> {
    check_len(f.len(), g.len())?;
    Ok(pattern_of(f, g))
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::structural(format!("length mismatch {a} vs {b}")));
    }
    Ok(())
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::structural(format!("{what}[{i}] is not finite")));
    }
    Ok(())
}

/// `T(Z, f, g) = sum_i (f_i - Y_i) sgn(f_i - g_i)`.
pub fn t_statistic(data: &Data, f: &[f64], g: &[f64]) -> Result<f64> {
    check_len(data.len(), f.len())?;
    check_len(f.len(), g.len())?;
    Ok(data
        .y
        .iter()
        .zip(f)
        .zip(g)
        .map(|((y, fi), gi)| (fi - y) * sgn(fi - gi) as f64)
        .sum())
}

/// `Lambda(f, g) = sum_i (f_i - f*_i) sgn(f_i - g_i)`, the expectation of
/// `T(Z, f, g)` under centred noise.
pub fn lambda_mean(fstar: &[f64], f: &[f64], g: &[f64]) -> Result<f64> {
    check_len(fstar.len(), f.len())?;
    check_len(f.len(), g.len())?;
    Ok(fstar
        .iter()
        .zip(f)
        .zip(g)
        .map(|((s, fi), gi)| (fi - s) * sgn(fi - gi) as f64)
        .sum())
}

/// Outcome of a supremum oracle.
#[derive(Debug, Clone, Serialize)]
pub struct SupResult {
    pub value: f64,
    /// A class member whose statistic equals `value` when `exact` holds.
    pub witness: Vec<f64>,
    pub pattern: Vec<i8>,
    /// The witness realises `value` exactly in floating point.
    pub exact: bool,
}

/// Maximum of `sum_i r_i s_i` over sign patterns `s = sgn(f - g)` realisable
/// by some `g` in the class, where `r = f - Y`.
pub fn pattern_feasible_max(class: &ShapeClass, data: &Data, f: &[f64]) -> Result<(f64, Vec<i8>)> {
    let s = sup_t(class, data, f)?;
    Ok((s.value, s.pattern))
}

/// `sup_g T(Z, f, g)` over `g` in the class, with a witness.
pub fn sup_t(class: &ShapeClass, data: &Data, f: &[f64]) -> Result<SupResult> {
    check_len(data.len(), f.len())?;
    check_finite(f, "f")?;
    if matches!(class, ShapeClass::SingleIndexMonotone(_)) {
        return Err(Error::contract("single-index classes need an index design; use sup_t_index"));
    }
    if !class.contains(&data.design, f) {
        return Err(Error::contract(format!("f is not a member of class {class}")));
    }
    let (value, witness, planned) = sup_inner(class, data, f, true)?;
    let witness = witness.expect("traced witness");
    let r: Vec<f64> = f.iter().zip(&data.y).map(|(a, b)| a - b).collect();
    let pattern = pattern_of(f, &witness);
    let realised: f64 = r.iter().zip(&pattern).map(|(ri, s)| ri * *s as f64).sum();
    let tol = 1e-9 * (1.0 + r.iter().map(|v| v.abs()).sum::<f64>());
    let exact = (realised - value).abs() <= tol && planned.as_ref().is_none_or(|p| *p == pattern);
    Ok(SupResult { value, witness, pattern, exact })
}

/// Value of the supremum without membership checks or witness.
pub fn sup_value(class: &ShapeClass, data: &Data, f: &[f64]) -> Result<f64> {
    Ok(sup_inner(class, data, f, false)?.0)
}

type Inner = (f64, Option<Vec<f64>>, Option<Vec<i8>>);

fn sup_inner(class: &ShapeClass, data: &Data, f: &[f64], trace: bool) -> Result<Inner> {
    let n = data.len();
    let r: Vec<f64> = f.iter().zip(&data.y).map(|(a, b)| a - b).collect();
    let scatter = |w: Vec<(usize, f64)>| {
        let mut g = vec![0.0; n];
        for (i, v) in w {
            g[i] = v;
        }
        g
    };
    match class {
        ShapeClass::Nondecreasing | ShapeClass::Nonincreasing | ShapeClass::MonotoneEither => {
            let levels = level_lists(data);
            let dirs: &[bool] = match class {
                ShapeClass::Nondecreasing => &[true],
                ShapeClass::Nonincreasing => &[false],
                _ => &[true, false],
            };
            let mut best: Option<(f64, Option<Vec<(usize, f64)>>)> = None;
            for &up in dirs {
                let (v, w) = monotone_sup(&levels, f, &r, up, trace);
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, w));
                }
            }
            let (v, w) = best.expect("at least one direction");
            Ok((v, w.map(scatter), None))
        }
        ShapeClass::PiecewiseMonotone(k) => {
            let levels = level_lists(data);
            let seg = segment_values(&levels, f, &r);
            let (v, runs) = piecewise_split(&seg, *k);
            if !trace {
                return Ok((v, None, None));
            }
            let mut g = vec![0.0; n];
            for (a, b) in runs {
                let part = &levels[a..=b];
                let (vu, wu) = monotone_sup(part, f, &r, true, true);
                let (vd, wd) = monotone_sup(part, f, &r, false, true);
                let w = if vu >= vd { wu } else { wd };
                for (i, x) in w.ok_or_else(|| Error::refusal("problem too large to trace a witness"))? {
                    g[i] = x;
                }
            }
            Ok((v, Some(g), None))
        }
        ShapeClass::FixedPartitionConstant(p) => {
            p.check_design(&data.design)?;
            let mut total = 0.0;
            let mut g = vec![0.0; n];
            for b in p.blocks() {
                let lev = vec![b.clone().collect::<Vec<_>>()];
                let (v, w) = monotone_sup(&lev, f, &r, true, trace);
                total += v;
                if let Some(w) = w {
                    for (i, x) in w {
                        g[i] = x;
                    }
                }
            }
            Ok((total, trace.then_some(g), None))
        }
        ShapeClass::LinearSpan1D(f0) => {
            check_len(n, f0.len())?;
            let a = linear_span_coef(f0, f).ok_or_else(|| Error::contract("f is not in the linear span"))?;
            let s: f64 = r.iter().zip(f0).map(|(ri, z)| ri * sgn(*z) as f64).sum();
            let sigma = sgn(s) as f64;
            let b = a - sigma;
            let g: Vec<f64> = f0.iter().map(|z| b * z).collect();
            let planned: Vec<i8> = f0.iter().map(|z| sgn(sigma * z)).collect();
            Ok((s.abs(), Some(g), Some(planned)))
        }
        ShapeClass::PiecewiseMonotoneConvexConcave(k) => {
            if *k != 1 {
                return Err(Error::refusal("convex-concave supremum is implemented for one piece only"));
            }
            let (v, pattern, w) = convex_monotone_sup(data, f, &r)?;
            let g = w.unwrap_or_else(|| f.to_vec());
            Ok((v, Some(g), Some(pattern)))
        }
        ShapeClass::SingleIndexMonotone(_) => Err(Error::contract("single-index class needs an index design")),
    }
}

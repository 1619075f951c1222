//! Supremum oracle for single-index classes `x -> phi(<theta, x>)` with
//! monotone `phi`, on designs in `R` or `R^2`.
//!
//! The order of the projections changes only at directions orthogonal to a
//! difference of two design points. Enumerating those directions and one
//! direction inside each open cell (all in exact rational arithmetic) covers
//! every realisable ordering.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{q, Q};
use crate::model::{IndexData, IndexDesign};

use super::oracle::{monotone_sup, pattern_of};

type Dir = (Q, Q);

fn canonical(d: Dir) -> Dir {
    if d.1.is_negative() || (d.1.is_zero() && d.0.is_negative()) {
        (-d.0, -d.1)
    } else {
        d
    }
}

fn cross(a: &Dir, b: &Dir) -> Q {
    &a.0 * &b.1 - &a.1 * &b.0
}

fn to_f64(d: &Dir) -> Vec<f64> {
    let x = d.0.to_f64().unwrap_or(0.0);
    let y = d.1.to_f64().unwrap_or(0.0);
    let norm = x.hypot(y);
    vec![x / norm, y / norm]
}

/// Distinct orderings of the projections, with a direction realising each.
#[derive(Debug, Clone)]
pub struct IndexGeometry {
    pub orderings: Vec<(Vec<f64>, Vec<Vec<usize>>)>,
}

impl IndexGeometry {
    pub fn new(design: &IndexDesign) -> Result<Self> {
        match design.dim() {
            1 => {
                let pts: Vec<Q> = design.rows().iter().map(|r| q(r[0])).collect();
                Ok(IndexGeometry { orderings: vec![(vec![1.0], levels_by(&pts))] })
            }
            2 => Ok(Self::planar(design)),
            m => Err(Error::refusal(format!("single-index oracle supports dimension 1 or 2, got {m}"))),
        }
    }

    fn planar(design: &IndexDesign) -> Self {
        let pts: Vec<Dir> = design.rows().iter().map(|r| (q(r[0]), q(r[1]))).collect();
        let mut crit: Vec<Dir> = Vec::new();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let dx = &pts[b].0 - &pts[a].0;
                let dy = &pts[b].1 - &pts[a].1;
                if dx.is_zero() && dy.is_zero() {
                    continue;
                }
                crit.push(canonical((-dy, dx)));
            }
        }
        crit.sort_by(|a, b| {
            let c = cross(a, b);
            if c.is_positive() {
                Ordering::Less
            } else if c.is_negative() {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        });
        crit.dedup_by(|a, b| cross(a, b).is_zero());
        let mut cands: Vec<Dir> = Vec::new();
        match crit.len() {
            0 => cands.push((Q::from_integer(1.into()), Q::zero())),
            1 => {
                let d = crit[0].clone();
                cands.push((-d.1.clone(), d.0.clone()));
                cands.push(d);
            }
            len => {
                for i in 0..len {
                    cands.push(crit[i].clone());
                    let next = if i + 1 < len {
                        crit[i + 1].clone()
                    } else {
                        (-crit[0].0.clone(), -crit[0].1.clone())
                    };
                    cands.push((&crit[i].0 + &next.0, &crit[i].1 + &next.1));
                }
            }
        }
        let mut seen = HashSet::new();
        let mut orderings = Vec::new();
        for d in cands {
            let proj: Vec<Q> = pts.iter().map(|p| &d.0 * &p.0 + &d.1 * &p.1).collect();
            let lv = levels_by(&proj);
            if seen.insert(lv.clone()) {
                orderings.push((to_f64(&d), lv));
            }
        }
        IndexGeometry { orderings }
    }
}

fn levels_by(t: &[Q]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..t.len()).collect();
    idx.sort_by(|&a, &b| t[a].cmp(&t[b]).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match out.last_mut() {
            Some(l) if t[l[0]] == t[i] => l.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

fn monotone_on(levels: &[Vec<usize>], f: &[f64]) -> bool {
    if levels.iter().any(|l| l.iter().any(|&i| f[i] != f[l[0]])) {
        return false;
    }
    let v: Vec<f64> = levels.iter().map(|l| f[l[0]]).collect();
    v.windows(2).all(|w| w[0] <= w[1]) || v.windows(2).all(|w| w[0] >= w[1])
}

/// Is `f` of the form `phi(<theta, x>)` with `phi` monotone?
pub fn index_contains(geom: &IndexGeometry, f: &[f64]) -> bool {
    geom.orderings.iter().any(|(_, lv)| monotone_on(lv, f))
}

#[derive(Debug, Clone)]
pub struct IndexSupResult {
    pub value: f64,
    pub witness: Vec<f64>,
    pub theta: Vec<f64>,
    pub pattern: Vec<i8>,
    pub exact: bool,
}

/// `sup_g T(Z, f, g)` over single-index monotone `g`.
pub fn sup_t_index(data: &IndexData, f: &[f64]) -> Result<IndexSupResult> {
    let geom = IndexGeometry::new(&data.design)?;
    if f.len() != data.len() {
        return Err(Error::structural("length mismatch"));
    }
    if !index_contains(&geom, f) {
        return Err(Error::contract("f is not a single-index monotone function of the design"));
    }
    let r: Vec<f64> = f.iter().zip(&data.y).map(|(a, b)| a - b).collect();
    let mut best: Option<(f64, Vec<f64>, Vec<(usize, f64)>)> = None;
    for (theta, lv) in &geom.orderings {
        for up in [true, false] {
            let (v, w) = monotone_sup(lv, f, &r, up, true);
            if best.as_ref().is_none_or(|b| v > b.0) {
                let w = w.ok_or_else(|| Error::refusal("problem too large to trace a witness"))?;
                best = Some((v, theta.clone(), w));
            }
        }
    }
    let (value, theta, w) = best.expect("at least one ordering");
    let mut g = vec![0.0; data.len()];
    for (i, v) in w {
        g[i] = v;
    }
    let pattern = pattern_of(f, &g);
    let realised: f64 = r.iter().zip(&pattern).map(|(a, s)| a * *s as f64).sum();
    let exact = (realised - value).abs() <= 1e-9 * (1.0 + r.iter().map(|v| v.abs()).sum::<f64>());
    Ok(IndexSupResult { value, witness: g, theta, pattern, exact })
}

/// Value-only supremum with precomputed geometry.
pub fn sup_value_index(geom: &IndexGeometry, y: &[f64], f: &[f64]) -> f64 {
    let r: Vec<f64> = f.iter().zip(y).map(|(a, b)| a - b).collect();
    let mut best = f64::NEG_INFINITY;
    for (_, lv) in &geom.orderings {
        for up in [true, false] {
            best = best.max(monotone_sup(lv, f, &r, up, false).0);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points_orderings() {
        // Triangle: every ordering of three points in general position
        // appears, up to reversal: 3 strict orders + 3 with a tie.
        let d = IndexDesign::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let g = IndexGeometry::new(&d).unwrap();
        assert_eq!(g.orderings.len(), 6);
    }

    #[test]
    fn one_dimensional_matches_monotone() {
        use crate::model::{Data, Design};
        use crate::sign::{sup_t, ShapeClass};
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let y = vec![1.0, -1.0, 3.0, 0.5];
        let f = vec![0.0, 0.0, 1.0, 2.0];
        let idata = IndexData::new(IndexDesign::new(x.iter().map(|v| vec![*v]).collect()).unwrap(), y.clone()).unwrap();
        let data = Data::new(Design::new(x).unwrap(), y).unwrap();
        let a = sup_t_index(&idata, &f).unwrap();
        let b = sup_t(&ShapeClass::MonotoneEither, &data, &f).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.exact);
    }
}

//! Decides whether a subset is `{g > fbar}` (or `{g < fbar}`) for some class
//! member `g`, and constructs such a member.
//!
//! Monotone and single-index generators reduce to interval chains compared
//! in exact floating-point order. Higher-order generators solve the linear
//! system of window determinants and targets by exact Fourier-Motzkin
//! elimination.

use std::collections::HashMap;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{fm_feasible, fm_solve, q, rmono_coeffs, Ineq, Q};
use crate::sign::{chain, Interval};

use super::hull::{order_two_feasible, Eps, Mono};
use super::{Generator, LevelSetFamily, Side};

/// Shape constraints of one run: `(order, sign)` pairs, all required.
type Combo = Vec<(usize, i8)>;

pub(super) struct Solver<'a> {
    fam: &'a LevelSetFamily,
    above: bool,
    fq: Vec<Q>,
    xq: Vec<Q>,
    /// Window coefficients by order, indexed by the first point.
    windows: HashMap<usize, Vec<Vec<Q>>>,
    combos: Vec<Combo>,
    cache: HashMap<(usize, usize, u32), bool>,
}

fn bit(mask: u32, i: usize) -> bool {
    mask >> i & 1 == 1
}

fn mono(ivs: &[Interval], up: bool) -> Option<Vec<f64>> {
    if up {
        chain(ivs)
    } else {
        let rev: Vec<Interval> = ivs.iter().rev().copied().collect();
        chain(&rev).map(|mut v| {
            v.reverse();
            v
        })
    }
}

fn satisfied(c: &Ineq, x: &[Q]) -> bool {
    let lhs: Q = c.coef.iter().zip(x).map(|(a, b)| a * b).sum();
    if c.strict {
        lhs > c.rhs
    } else {
        lhs >= c.rhs
    }
}

impl<'a> Solver<'a> {
    pub(super) fn new(fam: &'a LevelSetFamily) -> Self {
        let combos: Vec<Combo> = match &fam.generator {
            Generator::RMonotone { r, trend, .. } if *r >= 2 => {
                let mut c = Vec::new();
                if trend.allows(true) {
                    c.push(vec![(*r, 1)]);
                }
                if trend.allows(false) {
                    c.push(vec![(*r, -1)]);
                }
                c
            }
            Generator::ConvexConcave { .. } => {
                vec![vec![(1, 1), (2, 1)], vec![(1, 1), (2, -1)], vec![(1, -1), (2, 1)], vec![(1, -1), (2, -1)]]
            }
            _ => Vec::new(),
        };
        let mut windows = HashMap::new();
        if !combos.is_empty() {
            let xq: Vec<Q> = fam.points.iter().map(|p| q(p[0])).collect();
            for combo in &combos {
                for &(r, _) in combo {
                    windows.entry(r).or_insert_with(|| {
                        if xq.len() <= r {
                            Vec::new()
                        } else {
                            (0..xq.len() - r).map(|t| rmono_coeffs(&xq[t..=t + r])).collect()
                        }
                    });
                }
            }
        }
        Solver {
            fam,
            above: fam.side == Side::Above,
            fq: fam.fbar.iter().map(|v| q(*v)).collect(),
            xq: fam.points.iter().map(|p| q(p[0])).collect(),
            windows,
            combos,
            cache: HashMap::new(),
        }
    }

    fn target(&self, i: usize, mask: u32) -> Interval {
        Interval::level_target(self.fam.fbar[i], bit(mask, i), self.above)
    }

    fn target_ineq(&self, nv: usize, v: usize, i: usize, mask: u32) -> Ineq {
        let c = self.fq[i].clone();
        match (self.above, bit(mask, i)) {
            (true, true) => Ineq::lower(nv, v, c, true),
            (true, false) => Ineq::upper(nv, v, c, false),
            (false, true) => Ineq::upper(nv, v, c, true),
            (false, false) => Ineq::lower(nv, v, c, false),
        }
    }

    /// Constraints on the values of points `a..b` for one combo.
    fn system(&self, a: usize, b: usize, mask: u32, combo: &Combo) -> Vec<Ineq> {
        let nv = b - a;
        let mut cons: Vec<Ineq> = (a..b).map(|i| self.target_ineq(nv, i - a, i, mask)).collect();
        for &(r, s) in combo {
            let w = &self.windows[&r];
            if b - a <= r {
                continue;
            }
            for t in a..b - r {
                let mut coef = vec![Q::zero(); nv];
                for (k, c) in w[t].iter().enumerate() {
                    coef[t - a + k] = if s > 0 { c.clone() } else { -c.clone() };
                }
                cons.push(Ineq::ge(coef, Q::zero()));
            }
        }
        cons
    }

    fn order(&self) -> usize {
        match &self.fam.generator {
            Generator::RMonotone { r, .. } => *r,
            _ => 2,
        }
    }

    fn segment_ok(&mut self, a: usize, b: usize, mask: u32) -> Result<bool> {
        if let Generator::RMonotone { r: 1, trend, .. } = &self.fam.generator {
            let trend = *trend;
            let ivs: Vec<Interval> = (a..b).map(|i| self.target(i, mask)).collect();
            return Ok((trend.allows(true) && mono(&ivs, true).is_some())
                || (trend.allows(false) && mono(&ivs, false).is_some()));
        }
        if b - a <= self.order() {
            // no window constraint, targets alone are satisfiable
            return Ok(true);
        }
        let key = (a, b, (mask >> a) & ((1u32 << (b - a)) - 1));
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let ok = if self.order() == 2 {
            self.order_two(a, b, mask)
        } else {
            let mut ok = false;
            for combo in self.combos.clone() {
                if fm_feasible(b - a, self.system(a, b, mask, &combo))? {
                    ok = true;
                    break;
                }
            }
            ok
        };
        self.cache.insert(key, ok);
        Ok(ok)
    }

    /// Lower and upper targets of points `a..b`, strict ones shifted by `eps`.
    fn bounds(&self, a: usize, b: usize, mask: u32) -> (Vec<Option<Eps>>, Vec<Option<Eps>>) {
        let one = Q::from_integer(1.into());
        let mut lo = Vec::with_capacity(b - a);
        let mut hi = Vec::with_capacity(b - a);
        for i in a..b {
            let c = self.fq[i].clone();
            let (l, h) = match (self.above, bit(mask, i)) {
                (true, true) => (Some(Eps::new(c, one.clone())), None),
                (true, false) => (None, Some(Eps::new(c, Q::zero()))),
                (false, true) => (None, Some(Eps::new(c, -one.clone()))),
                (false, false) => (Some(Eps::new(c, Q::zero())), None),
            };
            lo.push(l);
            hi.push(h);
        }
        (lo, hi)
    }

    fn order_two(&self, a: usize, b: usize, mask: u32) -> bool {
        let (lo, hi) = self.bounds(a, b, mask);
        let x = &self.xq[a..b];
        self.combos.iter().any(|combo| {
            let mut convex = true;
            let mut mono = Mono::Free;
            for &(r, s) in combo {
                match (r, s > 0) {
                    (2, c) => convex = c,
                    (1, true) => mono = Mono::Up,
                    (1, false) => mono = Mono::Down,
                    _ => unreachable!("order two combos"),
                }
            }
            order_two_feasible(x, &lo, &hi, convex, mono)
        })
    }

    /// The same decision by elimination, for cross-checking.
    #[cfg(test)]
    pub(super) fn order_two_by_elimination(&self, a: usize, b: usize, mask: u32) -> bool {
        self.combos.iter().any(|c| fm_feasible(b - a, self.system(a, b, mask, c)).unwrap())
    }

    #[cfg(test)]
    pub(super) fn order_two_by_hull(&self, a: usize, b: usize, mask: u32) -> bool {
        self.order_two(a, b, mask)
    }

    /// Greedy cover of `0..j` by maximal feasible runs.
    fn runs(&mut self, j: usize, mask: u32, pieces: usize) -> Result<Option<Vec<(usize, usize)>>> {
        let mut out = Vec::new();
        let mut start = 0;
        while start < j {
            if out.len() == pieces {
                return Ok(None);
            }
            let mut end = start + 1;
            while end < j && self.segment_ok(start, end + 1, mask)? {
                end += 1;
            }
            out.push((start, end));
            start = end;
        }
        Ok(Some(out))
    }

    /// Is the pattern on the first `j` points realisable by the class
    /// restricted to those points?
    pub(super) fn feasible_prefix(&mut self, j: usize, mask: u32) -> Result<bool> {
        match &self.fam.generator {
            Generator::All => Ok(true),
            Generator::RMonotone { pieces, .. } | Generator::ConvexConcave { pieces } => {
                let p = *pieces;
                Ok(self.runs(j, mask, p)?.is_some())
            }
            Generator::FixedPartition { partition } => Ok(partition.blocks().iter().all(|b| {
                (b.start..b.end.min(j)).fold(Interval::default(), |acc, i| acc.meet(self.target(i, mask))).nonempty()
            })),
            Generator::LinearSpan { f0 } => fm_feasible(1, self.span_system(f0, j, mask)),
            Generator::SingleIndex => Ok(self.index_member(j, mask).is_some()),
        }
    }

    fn span_system(&self, f0: &[f64], j: usize, mask: u32) -> Vec<Ineq> {
        (0..j)
            .map(|i| {
                let (z, c) = (q(f0[i]), self.fq[i].clone());
                match (self.above, bit(mask, i)) {
                    (true, true) => Ineq::gt(vec![z], c),
                    (true, false) => Ineq::ge(vec![-z], -c),
                    (false, true) => Ineq::gt(vec![-z], -c),
                    (false, false) => Ineq::ge(vec![z], c),
                }
            })
            .collect()
    }

    fn index_member(&self, j: usize, mask: u32) -> Option<Vec<f64>> {
        let geom = self.fam.geometry.as_ref().expect("geometry");
        for (_, groups) in &geom.orderings {
            let groups: Vec<Vec<usize>> =
                groups.iter().map(|g| g.iter().copied().filter(|&i| i < j).collect::<Vec<_>>()).filter(|g| !g.is_empty()).collect();
            let ivs: Vec<Interval> = groups
                .iter()
                .map(|g| g.iter().fold(Interval::default(), |acc, &i| acc.meet(self.target(i, mask))))
                .collect();
            for up in [true, false] {
                if let Some(v) = mono(&ivs, up) {
                    let mut g = vec![0.0; self.fam.len()];
                    for (grp, val) in groups.iter().zip(v) {
                        for &i in grp {
                            g[i] = val;
                        }
                    }
                    return Some(g);
                }
            }
        }
        None
    }

    fn targets_hold(&self, g: &[f64], mask: u32) -> bool {
        (0..g.len()).all(|i| {
            let c = self.fam.fbar[i];
            match (self.above, bit(mask, i)) {
                (true, true) => g[i] > c,
                (true, false) => g[i] <= c,
                (false, true) => g[i] < c,
                (false, false) => g[i] >= c,
            }
        })
    }

    /// A class member realising `mask` on all points, verified exactly in
    /// floating point.
    pub(super) fn member(&mut self, mask: u32) -> Result<Option<Vec<f64>>> {
        let n = self.fam.len();
        let g = match self.fam.generator.clone() {
            Generator::All => {
                let d = if self.above { 1.0 } else { -1.0 };
                Some((0..n).map(|i| if bit(mask, i) { self.fam.fbar[i] + d } else { self.fam.fbar[i] }).collect())
            }
            Generator::RMonotone { r: 1, pieces, trend } => match self.runs(n, mask, pieces)? {
                None => None,
                Some(runs) => {
                    let mut g = vec![0.0; n];
                    for (a, b) in runs {
                        let ivs: Vec<Interval> = (a..b).map(|i| self.target(i, mask)).collect();
                        let v = [true, false]
                            .into_iter()
                            .filter(|up| trend.allows(*up))
                            .find_map(|up| mono(&ivs, up))
                            .expect("run was feasible");
                        g[a..b].copy_from_slice(&v);
                    }
                    Some(g)
                }
            },
            Generator::RMonotone { pieces, .. } | Generator::ConvexConcave { pieces } => {
                match self.runs(n, mask, pieces)? {
                    None => None,
                    Some(runs) => {
                        let mut g = vec![0.0; n];
                        for (a, b) in runs {
                            let mut found = None;
                            for combo in self.combos.clone() {
                                let cons = self.system(a, b, mask, &combo);
                                if let Some(x) = fm_solve(b - a, cons.clone())? {
                                    if !cons.iter().all(|c| satisfied(c, &x)) {
                                        return Err(Error::contract("elimination returned an infeasible point"));
                                    }
                                    found = Some(x);
                                    break;
                                }
                            }
                            let x = found.expect("run was feasible");
                            for (k, v) in x.iter().enumerate() {
                                g[a + k] = v.to_f64().unwrap_or(f64::NAN);
                            }
                        }
                        Some(g)
                    }
                }
            }
            Generator::FixedPartition { partition } => {
                let mut g = vec![0.0; n];
                for b in partition.blocks() {
                    let iv = b.clone().fold(Interval::default(), |acc, i| acc.meet(self.target(i, mask)));
                    if !iv.nonempty() {
                        return Ok(None);
                    }
                    g[b.clone()].iter_mut().for_each(|v| *v = iv.pick());
                }
                Some(g)
            }
            Generator::LinearSpan { f0 } => {
                let cons = self.span_system(&f0, n, mask);
                match fm_solve(1, cons.clone())? {
                    None => None,
                    Some(b) => {
                        if !cons.iter().all(|c| satisfied(c, &b)) {
                            return Err(Error::contract("elimination returned an infeasible point"));
                        }
                        Some(f0.iter().map(|z| (&b[0] * q(*z)).to_f64().unwrap_or(f64::NAN)).collect())
                    }
                }
            }
            Generator::SingleIndex => self.index_member(n, mask),
        };
        if let Some(g) = &g {
            if !(self.targets_hold(g, mask) && self.fam.contains(g)) {
                return Err(Error::contract("constructed member failed verification"));
            }
        }
        Ok(g)
    }
}

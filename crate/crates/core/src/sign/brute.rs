//! Reference oracle: enumerate every sign pattern and decide feasibility by
//! constructing an explicit class member through interval propagation.

use crate::error::{Error, Result};
use crate::model::Data;

use super::class::{sgn, ShapeClass};
use super::oracle::pattern_of;
use super::SupResult;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Bound {
    pub v: f64,
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Interval {
    pub lo: Option<Bound>,
    pub hi: Option<Bound>,
}

fn tighter_lo(a: Option<Bound>, b: Option<Bound>) -> Option<Bound> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(if b.v > a.v || (b.v == a.v && b.strict) { b } else { a }),
    }
}

fn tighter_hi(a: Option<Bound>, b: Option<Bound>) -> Option<Bound> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(if b.v < a.v || (b.v == a.v && b.strict) { b } else { a }),
    }
}

impl Interval {
    /// Admissible `g_i` for the requested sign of `f_i - g_i`.
    fn from_sign(fi: f64, s: i8) -> Self {
        let b = |strict| Some(Bound { v: fi, strict });
        match s {
            1 => Interval { lo: None, hi: b(true) },
            -1 => Interval { lo: b(true), hi: None },
            _ => Interval { lo: b(false), hi: b(false) },
        }
    }

    /// Admissible `g_i` when `g_i > c` (`above`, `inside`), `g_i <= c`
    /// (`above`, outside), `g_i < c` or `g_i >= c` (below).
    pub(crate) fn level_target(c: f64, inside: bool, above: bool) -> Self {
        let b = |strict| Some(Bound { v: c, strict });
        match (above, inside) {
            (true, true) => Interval { lo: b(true), hi: None },
            (true, false) => Interval { lo: None, hi: b(false) },
            (false, true) => Interval { lo: None, hi: b(true) },
            (false, false) => Interval { lo: b(false), hi: None },
        }
    }

    pub(crate) fn meet(self, o: Interval) -> Interval {
        Interval { lo: tighter_lo(self.lo, o.lo), hi: tighter_hi(self.hi, o.hi) }
    }

    pub(crate) fn nonempty(&self) -> bool {
        match (self.lo, self.hi) {
            (Some(l), Some(h)) => l.v < h.v || (l.v == h.v && !l.strict && !h.strict),
            _ => true,
        }
    }

    pub(crate) fn pick(&self) -> f64 {
        let step = |v: f64| v.abs().max(1.0);
        match (self.lo, self.hi) {
            (None, None) => 0.0,
            (Some(l), None) => if l.strict { l.v + step(l.v) } else { l.v },
            (None, Some(h)) => if h.strict { h.v - step(h.v) } else { h.v },
            (Some(l), Some(h)) => {
                if !h.strict {
                    h.v
                } else if !l.strict {
                    l.v
                } else {
                    l.v + (h.v - l.v) / 2.0
                }
            }
        }
    }
}

/// Values for a `g` nondecreasing along `ivs` (one interval per level), or
/// `None` when no such `g` exists.
pub(crate) fn chain(ivs: &[Interval]) -> Option<Vec<f64>> {
    let mut lows = Vec::with_capacity(ivs.len());
    let mut cur = None;
    for iv in ivs {
        cur = tighter_lo(cur, iv.lo);
        let here = Interval { lo: cur, hi: iv.hi };
        if !here.nonempty() {
            return None;
        }
        lows.push(cur);
    }
    let mut out = vec![0.0; ivs.len()];
    let mut next: Option<Bound> = None;
    for j in (0..ivs.len()).rev() {
        let here = Interval { lo: lows[j], hi: tighter_hi(ivs[j].hi, next) };
        if !here.nonempty() {
            return None;
        }
        out[j] = here.pick();
        next = Some(Bound { v: out[j], strict: false });
    }
    Some(out)
}

fn level_intervals(levels: &[Vec<usize>], f: &[f64], pattern: &[i8]) -> Vec<Interval> {
    levels
        .iter()
        .map(|lev| {
            lev.iter()
                .fold(Interval::default(), |acc, &i| acc.meet(Interval::from_sign(f[i], pattern[i])))
        })
        .collect()
}

fn monotone_member(levels: &[Vec<usize>], ivs: &[Interval], up: bool, g: &mut [f64]) -> bool {
    let vals = if up {
        chain(ivs)
    } else {
        let rev: Vec<Interval> = ivs.iter().rev().copied().collect();
        chain(&rev).map(|mut v| {
            v.reverse();
            v
        })
    };
    match vals {
        Some(v) => {
            for (lev, x) in levels.iter().zip(v) {
                for &i in lev {
                    g[i] = x;
                }
            }
            true
        }
        None => false,
    }
}

/// An explicit class member `g` with `sgn(f - g) = pattern`, if one exists.
pub fn pattern_feasible(class: &ShapeClass, data: &Data, f: &[f64], pattern: &[i8]) -> Result<Option<Vec<f64>>> {
    let n = data.len();
    if f.len() != n || pattern.len() != n {
        return Err(Error::structural("length mismatch"));
    }
    let levels: Vec<Vec<usize>> = data.design.levels().into_iter().map(|r| r.collect()).collect();
    let mut g = vec![0.0; n];
    let ok = match class {
        ShapeClass::Nondecreasing | ShapeClass::Nonincreasing | ShapeClass::MonotoneEither => {
            let ivs = level_intervals(&levels, f, pattern);
            match class {
                ShapeClass::Nondecreasing => monotone_member(&levels, &ivs, true, &mut g),
                ShapeClass::Nonincreasing => monotone_member(&levels, &ivs, false, &mut g),
                _ => monotone_member(&levels, &ivs, true, &mut g) || monotone_member(&levels, &ivs, false, &mut g),
            }
        }
        ShapeClass::PiecewiseMonotone(k) => {
            let ivs = level_intervals(&levels, f, pattern);
            let nl = levels.len();
            let feasible = |a: usize, b: usize| {
                let mut scratch = vec![0.0; n];
                monotone_member(&levels[a..b], &ivs[a..b], true, &mut scratch)
                    || monotone_member(&levels[a..b], &ivs[a..b], false, &mut scratch)
            };
            // fewest runs covering the first j levels
            let mut runs = vec![usize::MAX; nl + 1];
            let mut from = vec![0usize; nl + 1];
            runs[0] = 0;
            for j in 1..=nl {
                for i in 0..j {
                    if runs[i] != usize::MAX && runs[i] + 1 < runs[j] && feasible(i, j) {
                        runs[j] = runs[i] + 1;
                        from[j] = i;
                    }
                }
            }
            if runs[nl] > *k {
                false
            } else {
                let mut j = nl;
                while j > 0 {
                    let i = from[j];
                    let _ = monotone_member(&levels[i..j], &ivs[i..j], true, &mut g)
                        || monotone_member(&levels[i..j], &ivs[i..j], false, &mut g);
                    j = i;
                }
                true
            }
        }
        ShapeClass::FixedPartitionConstant(p) => {
            p.check_design(&data.design)?;
            let mut ok = true;
            for b in p.blocks() {
                let iv = b.clone().fold(Interval::default(), |acc, i| acc.meet(Interval::from_sign(f[i], pattern[i])));
                if !iv.nonempty() {
                    ok = false;
                    break;
                }
                let v = iv.pick();
                for i in b.clone() {
                    g[i] = v;
                }
            }
            ok
        }
        ShapeClass::LinearSpan1D(f0) => {
            let mut iv = Interval::default();
            let mut ok = true;
            for i in 0..n {
                let z = f0[i];
                if z == 0.0 {
                    ok &= sgn(f[i]) == pattern[i];
                    continue;
                }
                let t = f[i] / z;
                // sign of f_i - b z_i as a constraint on b
                let s = if z > 0.0 { pattern[i] } else { -pattern[i] };
                iv = iv.meet(Interval::from_sign(t, s));
            }
            if ok && iv.nonempty() {
                let b = iv.pick();
                for i in 0..n {
                    g[i] = b * f0[i];
                }
                true
            } else {
                false
            }
        }
        ShapeClass::PiecewiseMonotoneConvexConcave(_) | ShapeClass::SingleIndexMonotone(_) => {
            return Err(Error::refusal(format!("no reference oracle for {class}")));
        }
    };
    Ok((ok && pattern_of(f, &g) == pattern).then_some(g))
}

/// Maximum of `T(Z, f, g)` by enumeration of all `3^n` sign patterns.
pub fn brute_force_sup_t(class: &ShapeClass, data: &Data, f: &[f64]) -> Result<SupResult> {
    const LIMIT: usize = 12;
    let n = data.len();
    if n > LIMIT {
        return Err(Error::refusal(format!("brute force is limited to n <= {LIMIT}")));
    }
    if f.len() != n {
        return Err(Error::structural("length mismatch"));
    }
    let r: Vec<f64> = f.iter().zip(&data.y).map(|(a, b)| a - b).collect();
    let mut pat = vec![-1i8; n];
    let mut best: Option<SupResult> = None;
    loop {
        let val: f64 = r.iter().zip(&pat).map(|(ri, s)| ri * *s as f64).sum();
        if best.as_ref().is_none_or(|b| val > b.value) {
            if let Some(g) = pattern_feasible(class, data, f, &pat)? {
                best = Some(SupResult { value: val, witness: g, pattern: pat.clone(), exact: true });
            }
        }
        // odometer over {-1, 0, 1}^n
        let mut i = 0;
        while i < n && pat[i] == 1 {
            pat[i] = -1;
            i += 1;
        }
        if i == n {
            break;
        }
        pat[i] += 1;
    }
    best.ok_or_else(|| Error::contract("no realisable pattern; is f in the class?"))
}

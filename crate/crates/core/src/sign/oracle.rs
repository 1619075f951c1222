//! Exact suprema of `g -> T(Z, f, g)` over design-restricted classes.
//!
//! For order-constrained classes only the position of `g_i` relative to the
//! distinct values of `f` matters. Positions are `2m + 1` symbolic slots
//! (below `v_0`, at `v_0`, between `v_0` and `v_1`, ...), so a nondecreasing
//! `g` is a nondecreasing slot sequence over the levels and the supremum is a
//! prefix-maximum dynamic program.

use crate::error::{Error, Result};
use crate::exact::{fm_feasible, fm_solve, q, rmono_coeffs, Ineq, Q};
use crate::model::Data;

use super::class::sgn;

/// Above this many stored back-pointers the witness is not reconstructed.
const MAX_TRACE: usize = 40_000_000;

pub(crate) struct Slots {
    pub values: Vec<f64>,
}

impl Slots {
    pub fn new(f: &[f64], idx: impl Iterator<Item = usize>) -> Self {
        // `+ 0.0` folds -0.0 into 0.0 so total_cmp agrees with ==
        let mut values: Vec<f64> = idx.map(|i| f[i] + 0.0).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        Slots { values }
    }

    pub fn count(&self) -> usize {
        2 * self.values.len() + 1
    }

    fn rank(&self, v: f64) -> usize {
        self.values.binary_search_by(|p| p.total_cmp(&(v + 0.0))).expect("value in slot table")
    }

    /// A real number occupying slot `p`.
    pub fn value(&self, p: usize) -> f64 {
        let v = &self.values;
        let m = v.len();
        if p % 2 == 1 {
            return v[(p - 1) / 2];
        }
        let k = p / 2;
        if k == 0 {
            v[0] - v[0].abs().max(1.0)
        } else if k == m {
            v[m - 1] + v[m - 1].abs().max(1.0)
        } else {
            v[k - 1] + (v[k] - v[k - 1]) / 2.0
        }
    }

    /// Gain of every slot for one level.
    fn gains(&self, level: &[usize], f: &[f64], r: &[f64], out: &mut Vec<f64>) {
        let pc = self.count();
        out.clear();
        out.resize(pc + 1, 0.0);
        let mut total = 0.0;
        let mut pts: Vec<(usize, f64)> = Vec::with_capacity(level.len());
        for &i in level {
            let a = self.rank(f[i]);
            total += r[i];
            out[0] += 2.0 * r[i];
            out[2 * a + 1] -= 2.0 * r[i];
            pts.push((2 * a + 1, r[i]));
        }
        let mut acc = 0.0;
        for p in 0..pc {
            acc += out[p];
            out[p] = acc - total;
        }
        out.truncate(pc);
        for (p, ri) in pts {
            out[p] += ri;
        }
    }
}

/// Supremum over `g` nondecreasing along `levels` (each level is a set of
/// indices sharing one value of `g`). Returns the value and, if requested,
/// the slot of every level.
pub(crate) fn monotone_dp(
    levels: &[Vec<usize>],
    f: &[f64],
    r: &[f64],
    slots: &Slots,
    trace: bool,
) -> (f64, Option<Vec<usize>>) {
    let pc = slots.count();
    let trace = trace && levels.len().saturating_mul(pc) <= MAX_TRACE;
    let mut best = vec![0.0; pc];
    let mut gain = Vec::with_capacity(pc + 1);
    let mut back: Vec<Vec<u32>> = Vec::new();
    let mut pm_val;
    for (j, lev) in levels.iter().enumerate() {
        slots.gains(lev, f, r, &mut gain);
        let mut from = if trace && j > 0 { vec![0u32; pc] } else { Vec::new() };
        pm_val = f64::NEG_INFINITY;
        let mut pm_arg = 0usize;
        for p in 0..pc {
            let prev = if j == 0 { 0.0 } else { best[p] };
            if prev > pm_val {
                pm_val = prev;
                pm_arg = p;
            }
            if trace && j > 0 {
                from[p] = pm_arg as u32;
            }
            best[p] = pm_val + gain[p];
        }
        if trace && j > 0 {
            back.push(from);
        }
    }
    let (mut arg, mut val) = (0usize, f64::NEG_INFINITY);
    for (p, &b) in best.iter().enumerate() {
        if b > val {
            val = b;
            arg = p;
        }
    }
    if levels.is_empty() {
        return (0.0, Some(Vec::new()));
    }
    if !trace {
        return (val, None);
    }
    let mut pos = vec![0usize; levels.len()];
    pos[levels.len() - 1] = arg;
    for j in (1..levels.len()).rev() {
        pos[j - 1] = back[j - 1][pos[j]] as usize;
    }
    (val, Some(pos))
}

/// Best value over `g` monotone (direction chosen by `up`) on the levels.
/// Returns witness values on the indices of the levels when traced.
pub(crate) fn monotone_sup(
    levels: &[Vec<usize>],
    f: &[f64],
    r: &[f64],
    up: bool,
    trace: bool,
) -> (f64, Option<Vec<(usize, f64)>>) {
    let slots = Slots::new(f, levels.iter().flatten().copied());
    if slots.values.is_empty() {
        return (0.0, Some(Vec::new()));
    }
    let ordered: Vec<Vec<usize>>;
    let lv: &[Vec<usize>] = if up {
        levels
    } else {
        ordered = levels.iter().rev().cloned().collect();
        &ordered
    };
    let (val, pos) = monotone_dp(lv, f, r, &slots, trace);
    let wit = pos.map(|pos| {
        let mut w = Vec::new();
        for (lev, p) in lv.iter().zip(pos) {
            let g = slots.value(p);
            w.extend(lev.iter().map(|&i| (i, g)));
        }
        w
    });
    (val, wit)
}

/// All-segment values for monotone-either `g` on contiguous runs of levels:
/// `seg[a][b - a]` is the best value for levels `a..=b`.
pub(crate) fn segment_values(levels: &[Vec<usize>], f: &[f64], r: &[f64]) -> Vec<Vec<f64>> {
    let slots = Slots::new(f, levels.iter().flatten().copied());
    let pc = slots.count();
    let nl = levels.len();
    let gains: Vec<Vec<f64>> = levels
        .iter()
        .map(|lev| {
            let mut g = Vec::new();
            slots.gains(lev, f, r, &mut g);
            g
        })
        .collect();
    let mut out = vec![Vec::new(); nl];
    for a in 0..nl {
        let mut up = vec![0.0; pc];
        let mut down = vec![0.0; pc];
        let mut row = Vec::with_capacity(nl - a);
        for (j, g) in gains.iter().enumerate().skip(a) {
            let mut m = f64::NEG_INFINITY;
            for p in 0..pc {
                let prev = if j == a { 0.0 } else { up[p] };
                m = m.max(prev);
                up[p] = m + g[p];
            }
            let mut m = f64::NEG_INFINITY;
            for p in (0..pc).rev() {
                let prev = if j == a { 0.0 } else { down[p] };
                m = m.max(prev);
                down[p] = m + g[p];
            }
            let best = up.iter().chain(down.iter()).fold(f64::NEG_INFINITY, |x, &y| x.max(y));
            row.push(best);
        }
        out[a] = row;
    }
    out
}

/// Best split of the levels into at most `k` monotone runs.
pub(crate) fn piecewise_split(seg: &[Vec<f64>], k: usize) -> (f64, Vec<(usize, usize)>) {
    let nl = seg.len();
    // dp[c][j]: best value for the first j levels using c runs.
    let mut dp = vec![vec![f64::NEG_INFINITY; nl + 1]; k + 1];
    let mut arg = vec![vec![0usize; nl + 1]; k + 1];
    dp[0][0] = 0.0;
    for c in 1..=k {
        dp[c][0] = 0.0;
        for j in 1..=nl {
            for i in 0..j {
                if dp[c - 1][i] == f64::NEG_INFINITY {
                    continue;
                }
                let v = dp[c - 1][i] + seg[i][j - 1 - i];
                if v > dp[c][j] {
                    dp[c][j] = v;
                    arg[c][j] = i;
                }
            }
        }
    }
    let mut c = (1..=k).fold(1, |b, c| if dp[c][nl] > dp[b][nl] { c } else { b });
    let val = dp[c][nl];
    let mut runs = Vec::new();
    let mut j = nl;
    while j > 0 {
        let i = arg[c][j];
        runs.push((i, j - 1));
        j = i;
        c -= 1;
    }
    runs.reverse();
    (val, runs)
}

/// Level structure of a one-dimensional design as index lists.
pub(crate) fn level_lists(data: &Data) -> Vec<Vec<usize>> {
    data.design.levels().into_iter().map(|r| r.collect()).collect()
}

/// Exhaustive search over sign patterns for continuous monotone
/// convex-or-concave `g` (one piece). Feasibility of a pattern prefix is an
/// exact linear program solved by Fourier-Motzkin elimination.
pub(crate) fn convex_monotone_sup(data: &Data, f: &[f64], r: &[f64]) -> Result<(f64, Vec<i8>, Option<Vec<f64>>)> {
    const LIMIT: usize = 10;
    let n = data.len();
    if n > LIMIT {
        return Err(Error::refusal(format!(
            "convex-concave supremum is exhaustive and limited to n <= {LIMIT}"
        )));
    }
    let levels = data.design.levels();
    let level_of: Vec<usize> = {
        let mut v = vec![0; n];
        for (j, l) in levels.iter().enumerate() {
            for i in l.clone() {
                v[i] = j;
            }
        }
        v
    };
    let xs: Vec<Q> = levels.iter().map(|l| q(data.design.points()[l.start])).collect();
    let shapes = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)];
    let system = |pat: &[i8], shape: (i8, i8)| -> Vec<Ineq> {
        let nl = level_of[pat.len() - 1] + 1;
        let mut cons = Vec::new();
        for j in 0..nl.saturating_sub(1) {
            let mut c = vec![Q::from_integer(0.into()); nl];
            c[j + 1] = Q::from_integer(shape.0.into());
            c[j] = Q::from_integer((-shape.0).into());
            cons.push(Ineq::ge(c, Q::from_integer(0.into())));
        }
        for j in 0..nl.saturating_sub(2) {
            let co = rmono_coeffs(&xs[j..j + 3]);
            let mut c = vec![Q::from_integer(0.into()); nl];
            for t in 0..3 {
                c[j + t] = &co[t] * Q::from_integer(shape.1.into());
            }
            cons.push(Ineq::ge(c, Q::from_integer(0.into())));
        }
        for (i, &s) in pat.iter().enumerate() {
            let j = level_of[i];
            match s {
                1 => cons.push(Ineq::upper(nl, j, q(f[i]), true)),
                -1 => cons.push(Ineq::lower(nl, j, q(f[i]), true)),
                _ => {
                    cons.push(Ineq::upper(nl, j, q(f[i]), false));
                    cons.push(Ineq::lower(nl, j, q(f[i]), false));
                }
            }
        }
        cons
    };
    let tail: Vec<f64> = (0..=n).map(|i| r[i.min(n)..].iter().map(|v| v.abs()).sum()).collect();
    let mut best = (f64::NEG_INFINITY, Vec::new(), 0usize);
    let mut pat = Vec::with_capacity(n);
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        i: usize,
        acc: f64,
        pat: &mut Vec<i8>,
        alive: &[usize],
        r: &[f64],
        tail: &[f64],
        shapes: &[(i8, i8); 4],
        system: &dyn Fn(&[i8], (i8, i8)) -> Vec<Ineq>,
        best: &mut (f64, Vec<i8>, usize),
    ) -> Result<()> {
        let n = r.len();
        if i == n {
            if acc > best.0 {
                *best = (acc, pat.clone(), alive[0]);
            }
            return Ok(());
        }
        if acc + tail[i] <= best.0 {
            return Ok(());
        }
        let s0 = if r[i] >= 0.0 { 1 } else { -1 };
        for s in [s0, 0, -s0] {
            pat.push(s);
            let mut next = Vec::new();
            for &sh in alive {
                let nl_vars = system(pat, shapes[sh]);
                let nv = nl_vars.first().map(|c| c.coef.len()).unwrap_or(0);
                if fm_feasible(nv, nl_vars)? {
                    next.push(sh);
                }
            }
            if !next.is_empty() {
                dfs(i + 1, acc + r[i] * s as f64, pat, &next, r, tail, shapes, system, best)?;
            }
            pat.pop();
        }
        Ok(())
    }
    dfs(0, 0.0, &mut pat, &[0, 1, 2, 3], r, &tail, &shapes, &system, &mut best)?;
    let (val, pattern, shape) = best;
    let cons = system(&pattern, shapes[shape]);
    let nv = cons.first().map(|c| c.coef.len()).unwrap_or(0);
    let witness = fm_solve(nv, cons)?.map(|g| {
        use num_traits::ToPrimitive;
        (0..n).map(|i| g[level_of[i]].to_f64().unwrap_or(f64::NAN)).collect()
    });
    Ok((val, pattern, witness))
}

pub(crate) fn pattern_of(f: &[f64], g: &[f64]) -> Vec<i8> {
    f.iter().zip(g).map(|(a, b)| sgn(a - b)).collect()
}

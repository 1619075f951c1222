//! Search over finite candidate sets ("sieves") for small values of the
//! supremum oracle. Candidates live on the levels (distinct abscissas) of the
//! design; the objective receives the expanded vector on the design.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sign::monotone_runs;

use super::fit::{block_means, isotonic, project_pieces, segmentations};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Shape {
    Up,
    Down,
    Either,
    Pieces(usize),
}

impl Shape {
    pub(crate) fn admits(self, lv: &[f64]) -> bool {
        let up = || lv.windows(2).all(|w| w[0] <= w[1]);
        let down = || lv.windows(2).all(|w| w[0] >= w[1]);
        match self {
            Shape::Up => up(),
            Shape::Down => down(),
            Shape::Either => up() || down(),
            Shape::Pieces(k) => monotone_runs(lv) <= k,
        }
    }
}

pub(crate) type Objective<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

pub(crate) struct Problem<'a> {
    pub levels: Vec<Vec<usize>>,
    pub n: usize,
    pub shape: Shape,
    pub means: Vec<f64>,
    pub weights: Vec<f64>,
    pub grid: Vec<f64>,
    pub eval: &'a Objective<'a>,
}

#[derive(Debug, Clone)]
pub(crate) struct Found {
    pub lv: Vec<f64>,
    pub t: f64,
    pub examined: usize,
}

/// Sorted distinct responses, consecutive midpoints, and one value beyond
/// each end of the range.
pub(crate) fn value_grid(y: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = y.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut g = Vec::with_capacity(2 * v.len() + 1);
    g.push(v[0] - 1.0);
    for (i, &a) in v.iter().enumerate() {
        if i > 0 {
            g.push(0.5 * (v[i - 1] + a));
        }
        g.push(a);
    }
    g.push(v[v.len() - 1] + 1.0);
    g.dedup();
    g
}

impl<'a> Problem<'a> {
    pub(crate) fn new(levels: Vec<Vec<usize>>, y: &[f64], shape: Shape, eval: &'a Objective<'a>) -> Self {
        let n = y.len();
        let weights: Vec<f64> = levels.iter().map(|l| l.len() as f64).collect();
        let means: Vec<f64> = levels.iter().map(|l| l.iter().map(|&i| y[i]).sum::<f64>() / l.len() as f64).collect();
        Problem { levels, n, shape, means, weights, grid: value_grid(y), eval }
    }

    pub(crate) fn expand(&self, lv: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.n];
        for (l, &v) in self.levels.iter().zip(lv) {
            for &i in l {
                f[i] = v;
            }
        }
        f
    }

    fn score(&self, lv: &[f64]) -> f64 {
        (self.eval)(&self.expand(lv))
    }

    /// Least-squares projections of `values` onto the shape.
    fn project(&self, values: &[f64]) -> Vec<Vec<f64>> {
        match self.shape {
            Shape::Up => vec![isotonic(values, &self.weights, true)],
            Shape::Down => vec![isotonic(values, &self.weights, false)],
            Shape::Either => vec![isotonic(values, &self.weights, true), isotonic(values, &self.weights, false)],
            Shape::Pieces(k) => vec![project_pieces(values, &self.weights, k)],
        }
    }
}

fn better(t: f64, best: f64) -> bool {
    t < best - 1e-12 * (1.0 + best.abs())
}

fn reduce(found: impl IntoIterator<Item = Found>) -> Option<Found> {
    let mut best: Option<Found> = None;
    let mut examined = 0;
    for f in found {
        examined += f.examined;
        if best.as_ref().is_none_or(|b| better(f.t, b.t)) {
            best = Some(f);
        }
    }
    best.map(|mut b| {
        b.examined = examined;
        b
    })
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Every grid-valued assignment on the levels that the shape admits.
pub(crate) fn exact_tiny(p: &Problem, limit: usize) -> Result<Found> {
    let l = p.levels.len();
    let g = p.grid.len();
    if l > 8 {
        return Err(Error::refusal(format!("exact enumeration needs at most 8 distinct abscissas, got {l}")));
    }
    let count = match p.shape {
        Shape::Up | Shape::Down => binom(g + l - 1, l),
        Shape::Either => 2.0 * binom(g + l - 1, l),
        Shape::Pieces(_) => (g as f64).powi(l as i32),
    };
    if count > limit as f64 {
        return Err(Error::refusal(format!("exact enumeration needs {count:.0} candidates, limit is {limit}")));
    }
    let mut cands: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; l];
    let mut push_monotone = |down: bool, cands: &mut Vec<Vec<f64>>| {
        // nondecreasing index sequences, mapped through the grid
        idx.iter_mut().for_each(|v| *v = 0);
        loop {
            let lv: Vec<f64> = if down {
                idx.iter().map(|&i| p.grid[g - 1 - i]).collect()
            } else {
                idx.iter().map(|&i| p.grid[i]).collect()
            };
            cands.push(lv);
            let mut pos = l;
            while pos > 0 && idx[pos - 1] == g - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            let v = idx[pos - 1] + 1;
            for j in pos - 1..l {
                idx[j] = v;
            }
        }
    };
    match p.shape {
        Shape::Up => push_monotone(false, &mut cands),
        Shape::Down => push_monotone(true, &mut cands),
        Shape::Either => {
            push_monotone(false, &mut cands);
            push_monotone(true, &mut cands);
        }
        Shape::Pieces(_) => {
            let mut idx = vec![0usize; l];
            loop {
                let lv: Vec<f64> = idx.iter().map(|&i| p.grid[i]).collect();
                if p.shape.admits(&lv) {
                    cands.push(lv);
                }
                let mut pos = l;
                while pos > 0 && idx[pos - 1] == g - 1 {
                    idx[pos - 1] = 0;
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                idx[pos - 1] += 1;
            }
        }
    }
    let scores: Vec<f64> = cands.par_iter().map(|c| p.score(c)).collect();
    let examined = cands.len();
    let found = cands.into_iter().zip(scores).map(|(lv, t)| Found { lv, t, examined: 0 });
    let mut best = reduce(found).expect("grid is never empty");
    best.examined = examined;
    Ok(best)
}

/// Coordinate descent over grid values. Moves reassign a maximal constant
/// run and, when `fine`, a single level. Each accepted move strictly lowers
/// the objective.
fn polish(p: &Problem, mut lv: Vec<f64>, mut t: f64, sweeps: usize, fine: bool) -> Found {
    let l = lv.len();
    let mut examined = 0;
    let mut try_range = |lv: &mut Vec<f64>, t: &mut f64, a: usize, b: usize| -> bool {
        let old = lv[a];
        let mut best: Option<(f64, f64)> = None;
        for &v in &p.grid {
            if v == old {
                continue;
            }
            lv[a..b].iter_mut().for_each(|x| *x = v);
            if !p.shape.admits(lv) {
                continue;
            }
            let s = p.score(lv);
            examined += 1;
            if better(s, best.map_or(*t, |b| b.1)) {
                best = Some((v, s));
            }
        }
        match best {
            Some((v, s)) => {
                lv[a..b].iter_mut().for_each(|x| *x = v);
                *t = s;
                true
            }
            None => {
                lv[a..b].iter_mut().for_each(|x| *x = old);
                false
            }
        }
    };
    for _ in 0..sweeps {
        let mut improved = false;
        let mut a = 0;
        while a < l {
            let mut b = a + 1;
            while b < l && lv[b] == lv[a] {
                b += 1;
            }
            improved |= try_range(&mut lv, &mut t, a, b);
            a = b;
        }
        if fine {
            for j in 0..l {
                improved |= try_range(&mut lv, &mut t, j, j + 1);
            }
        }
        if !improved {
            break;
        }
    }
    Found { lv, t, examined }
}

fn start(p: &Problem, lv: Vec<f64>, sweeps: usize, fine: bool) -> Found {
    let t = p.score(&lv);
    let mut f = polish(p, lv, t, sweeps, fine);
    f.examined += 1;
    f
}

/// Optimal least-squares segmentations with `1..=max_blocks` blocks,
/// projected onto the shape and polished on runs.
pub(crate) fn regressogram_dp(p: &Problem, max_blocks: usize, sweeps: usize) -> Found {
    let segs = segmentations(&p.means, &p.weights, max_blocks);
    let per_k: Vec<Found> = segs
        .par_iter()
        .map(|ends| {
            let bm = block_means(&p.means, &p.weights, ends);
            reduce(p.project(&bm).into_iter().map(|c| start(p, c, sweeps, false))).expect("nonempty")
        })
        .collect();
    reduce(per_k).expect("at least one block count")
}

/// Multi-restart coordinate descent. Restart 0 starts from the projection of
/// the level means; restart `r` perturbs them with noise drawn from stream `r`.
pub(crate) fn local_search(p: &Problem, restarts: usize, sweeps: usize, seed: u64) -> Found {
    let lo = p.grid[0];
    let hi = p.grid[p.grid.len() - 1];
    let spread = 0.25 * (hi - lo);
    let runs: Vec<Found> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut vals = p.means.clone();
            if r > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                for v in vals.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += spread * z;
                }
            }
            reduce(p.project(&vals).into_iter().map(|c| start(p, c, sweeps, true))).expect("nonempty")
        })
        .collect();
    reduce(runs).expect("at least one restart")
}

//! Exact rational arithmetic: Fourier-Motzkin feasibility for systems of
//! strict and non-strict linear inequalities, and determinants.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Exact rational value of a finite float.
pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite float")
}

pub fn qi(x: i64) -> Q {
    BigRational::from_integer(BigInt::from(x))
}

/// `coef . x > rhs` when `strict`, `coef . x >= rhs` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Ineq {
    pub coef: Vec<Q>,
    pub rhs: Q,
    pub strict: bool,
}

impl Ineq {
    pub fn ge(coef: Vec<Q>, rhs: Q) -> Self {
        Ineq { coef, rhs, strict: false }
    }
    pub fn gt(coef: Vec<Q>, rhs: Q) -> Self {
        Ineq { coef, rhs, strict: true }
    }
    /// Single-variable bound `x_i > c` / `x_i >= c`.
    pub fn lower(n: usize, i: usize, c: Q, strict: bool) -> Self {
        let mut coef = vec![Q::zero(); n];
        coef[i] = Q::one();
        Ineq { coef, rhs: c, strict }
    }
    /// Single-variable bound `x_i < c` / `x_i <= c`.
    pub fn upper(n: usize, i: usize, c: Q, strict: bool) -> Self {
        let mut coef = vec![Q::zero(); n];
        coef[i] = -Q::one();
        Ineq { coef, rhs: -c, strict }
    }
}

const MAX_CONSTRAINTS: usize = 200_000;

type Store = HashMap<Vec<Q>, (Q, bool)>;

/// Insert after scaling; returns `false` if the constraint is a constant
/// contradiction.
fn insert(store: &mut Store, mut c: Ineq) -> bool {
    let lead = c.coef.iter().find(|v| !v.is_zero()).cloned();
    let Some(lead) = lead else {
        return if c.strict { c.rhs.is_negative() } else { !c.rhs.is_positive() };
    };
    let s = lead.abs();
    for v in c.coef.iter_mut() {
        *v /= &s;
    }
    c.rhs /= &s;
    match store.get_mut(&c.coef) {
        Some(cur) => {
            if c.rhs > cur.0 || (c.rhs == cur.0 && c.strict && !cur.1) {
                *cur = (c.rhs, c.strict);
            }
        }
        None => {
            store.insert(c.coef, (c.rhs, c.strict));
        }
    }
    true
}

fn eliminate(store: Store, k: usize) -> Result<Option<Store>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut next = Store::new();
    for (coef, (rhs, strict)) in store {
        let c = Ineq { coef, rhs, strict };
        if c.coef[k].is_positive() {
            pos.push(c);
        } else if c.coef[k].is_negative() {
            neg.push(c);
        } else {
            next.insert(c.coef, (c.rhs, c.strict));
        }
    }
    for p in &pos {
        for m in &neg {
            let a = p.coef[k].clone();
            let b = -m.coef[k].clone();
            let coef: Vec<Q> = p.coef.iter().zip(&m.coef).map(|(x, y)| &b * x + &a * y).collect();
            let rhs = &b * &p.rhs + &a * &m.rhs;
            if !insert(&mut next, Ineq { coef, rhs, strict: p.strict || m.strict }) {
                return Ok(None);
            }
            if next.len() > MAX_CONSTRAINTS {
                return Err(Error::refusal("Fourier-Motzkin elimination exceeded its size limit"));
            }
        }
    }
    Ok(Some(next))
}

fn initial(nvars: usize, cons: Vec<Ineq>) -> Result<Option<Store>> {
    let mut store = Store::new();
    for c in cons {
        if c.coef.len() != nvars {
            return Err(Error::structural("constraint width mismatch"));
        }
        if !insert(&mut store, c) {
            return Ok(None);
        }
    }
    Ok(Some(store))
}

/// Decide whether `{x in Q^n : every constraint holds}` is nonempty.
pub fn fm_feasible(nvars: usize, cons: Vec<Ineq>) -> Result<bool> {
    let Some(mut store) = initial(nvars, cons)? else {
        return Ok(false);
    };
    for k in (0..nvars).rev() {
        match eliminate(store, k)? {
            Some(s) => store = s,
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// A point of the system, if it is feasible. Variables are assigned in
/// index order by back substitution through the elimination stages.
pub fn fm_solve(nvars: usize, cons: Vec<Ineq>) -> Result<Option<Vec<Q>>> {
    let Some(store) = initial(nvars, cons)? else {
        return Ok(None);
    };
    let mut stages: Vec<Vec<Ineq>> = vec![Vec::new(); nvars];
    let mut cur = store;
    for k in (0..nvars).rev() {
        stages[k] = cur.iter().map(|(c, (r, s))| Ineq { coef: c.clone(), rhs: r.clone(), strict: *s }).collect();
        match eliminate(cur, k)? {
            Some(s) => cur = s,
            None => return Ok(None),
        }
    }
    let mut x: Vec<Q> = Vec::with_capacity(nvars);
    for (k, stage) in stages.iter().enumerate() {
        let mut lo: Option<(Q, bool)> = None;
        let mut hi: Option<(Q, bool)> = None;
        for c in stage {
            let ck = &c.coef[k];
            if ck.is_zero() {
                continue;
            }
            let rest: Q = c.coef[..k].iter().zip(&x).map(|(a, b)| a * b).sum();
            let bound = (&c.rhs - rest) / ck;
            if ck.is_positive() {
                let tighter = match &lo {
                    None => true,
                    Some((v, s)) => bound > *v || (bound == *v && c.strict && !s),
                };
                if tighter {
                    lo = Some((bound, c.strict));
                }
            } else {
                let tighter = match &hi {
                    None => true,
                    Some((v, s)) => bound < *v || (bound == *v && c.strict && !s),
                };
                if tighter {
                    hi = Some((bound, c.strict));
                }
            }
        }
        let v = simplest(lo, hi);
        x.push(v);
    }
    Ok(Some(x))
}

/// A dyadic rational `m / 2^k` with the smallest `k` inside the interval,
/// so that solutions stay exactly representable in floating point whenever
/// the interval has positive length.
fn simplest(lo: Option<(Q, bool)>, hi: Option<(Q, bool)>) -> Q {
    let above = |v: &Q, l: &Option<(Q, bool)>| match l {
        None => true,
        Some((b, strict)) => if *strict { v > b } else { v >= b },
    };
    let below = |v: &Q, h: &Option<(Q, bool)>| match h {
        None => true,
        Some((b, strict)) => if *strict { v < b } else { v <= b },
    };
    if above(&Q::zero(), &lo) && below(&Q::zero(), &hi) {
        return Q::zero();
    }
    let mut scale = Q::one();
    for _ in 0..=60 {
        let cand = match (&lo, &hi) {
            (Some((l, _)), _) => (l * &scale).floor() / &scale,
            (None, Some((h, _))) => (h * &scale).ceil() / &scale,
            (None, None) => Q::zero(),
        };
        let step = Q::one() / &scale;
        for v in [cand.clone(), &cand + &step, &cand - &step] {
            if above(&v, &lo) && below(&v, &hi) {
                return v;
            }
        }
        scale *= qi(2);
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => (l + h) / qi(2),
        (Some((l, _)), None) => l + Q::one(),
        (None, Some((h, _))) => h - Q::one(),
        (None, None) => Q::zero(),
    }
}

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub fn det(mut m: Vec<Vec<Q>>) -> Q {
    let n = m.len();
    if n == 0 {
        return Q::one();
    }
    let mut sign = Q::one();
    let mut prev = Q::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Q::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Coefficients `c_i` with `L_v(f) = sum_i c_i f(v_i)` where `L_v` is the
/// determinant with rows `[1, v_i, ..., v_i^{r-1}, f(v_i)]`.
pub fn rmono_coeffs(v: &[Q]) -> Vec<Q> {
    let r = v.len() - 1;
    (0..=r)
        .map(|i| {
            let mut vand = Q::one();
            for a in 0..=r {
                for b in a + 1..=r {
                    if a != i && b != i {
                        vand *= &v[b] - &v[a];
                    }
                }
            }
            if (r - i).is_multiple_of(2) {
                vand
            } else {
                -vand
            }
        })
        .collect()
}

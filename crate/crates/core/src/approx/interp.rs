//! K-linear interpolation of monotone convex-concave functions and error
//! bounds for a single chord.

use serde::{Deserialize, Serialize};

use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::quad::integrate;

use super::index::linear_index_of;
use super::modulus::{Measure, Modulus, ModulusShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpMode {
    /// Needs finite one-sided derivatives at both ends.
    BoundedDerivativeVariation,
    /// Driven by a modulus of the measure; allows infinite end slopes.
    ModulusDriven,
}

/// Piecewise-linear function through `(knots[j], values[j])`.
#[derive(Debug, Clone, Serialize)]
pub struct Interpolant {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl Interpolant {
    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let j = k[1..k.len() - 1].iter().take_while(|t| **t <= x).count();
        let (x0, x1) = (k[j], k[j + 1]);
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        if x <= x0 {
            return y0;
        }
        if x >= x1 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn pieces(&self) -> usize {
        self.knots.len() - 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpCertificate {
    pub mode: InterpMode,
    pub pieces: usize,
    /// Bound on `int |f - fbar| dQ` for the constructed interpolant.
    pub bound: f64,
    /// The closed-form bound for affine moduli, when it applies.
    pub closed_form: Option<f64>,
    pub delta: Option<f64>,
    pub split: Option<f64>,
    pub measured: f64,
}

/// The function seen as nondecreasing and convex on `[a, b]`: optionally
/// reflected (`x -> a + b - x`) and negated.
struct View<'a> {
    f: &'a dyn Curve,
    a: f64,
    b: f64,
    flip: bool,
    neg: bool,
}

impl View<'_> {
    fn s(&self) -> f64 {
        if self.neg {
            -1.0
        } else {
            1.0
        }
    }
    fn x(&self, t: f64) -> f64 {
        if self.flip {
            self.a + self.b - t
        } else {
            t
        }
    }
}

impl Curve for View<'_> {
    fn value(&self, t: f64) -> f64 {
        self.s() * self.f.value(self.x(t))
    }
    fn right_derivative(&self, t: f64) -> f64 {
        if self.flip {
            -self.s() * self.f.left_derivative(self.x(t))
        } else {
            self.s() * self.f.right_derivative(t)
        }
    }
    fn left_derivative(&self, t: f64) -> f64 {
        if self.flip {
            -self.s() * self.f.right_derivative(self.x(t))
        } else {
            self.s() * self.f.left_derivative(t)
        }
    }
}

const SAMPLES: usize = 512;

/// Checks monotonicity and convexity (or concavity) on a sample grid via
/// second divided differences, and returns the normalising view.
fn canonical<'a>(f: &'a dyn Curve, a: f64, b: f64) -> Result<View<'a>> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::structural("interval needs finite a < b"));
    }
    let xs: Vec<f64> = (0..=SAMPLES).map(|i| a + (b - a) * i as f64 / SAMPLES as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| f.value(*x)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::structural("function is not finite on the interval"));
    }
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())) + 1.0;
    let tol = 1e-9 * scale;
    let d: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
    let up = d.iter().all(|v| *v >= -tol);
    let down = d.iter().all(|v| *v <= tol);
    let dd: Vec<f64> = d.windows(2).map(|w| w[1] - w[0]).collect();
    let convex = dd.iter().all(|v| *v >= -tol);
    let concave = dd.iter().all(|v| *v <= tol);
    if !(up || down) || !(convex || concave) {
        return Err(Error::contract("function is not monotone and convex-concave on the interval"));
    }
    let inc = ys[SAMPLES] >= ys[0];
    let cvx = if convex && concave { true } else { convex };
    let (flip, neg) = match (inc, cvx) {
        (true, true) => (false, false),
        (false, false) => (false, true),
        (false, true) => (true, false),
        (true, false) => (true, true),
    };
    Ok(View { f, a, b, flip, neg })
}

/// Knots `a = a_0 < ... < a_K' = c` with
/// `(a_i - a_{i-1})(g'_l(a_i) - g'_r(a_{i-1})) <= (g'_l(c) - g'_r(a))(c - a) / K^2`,
/// each `a_i` the largest admissible point found by bisection.
fn derivative_subdivision(g: &dyn Curve, a: f64, c: f64, k: usize) -> Result<Vec<f64>> {
    let target = (g.left_derivative(c) - g.right_derivative(a)) * (c - a) / (k * k) as f64;
    if !target.is_finite() {
        return Err(Error::contract("one-sided derivatives must be finite for this construction"));
    }
    let mut knots = vec![a];
    if target <= 0.0 {
        knots.push(c);
        return Ok(knots);
    }
    let limit = target * (1.0 + 1e-9);
    let width = 1e-12 * (c - a);
    let mut cur = a;
    let mut dr = g.right_derivative(a);
    while cur < c {
        let crit = |x: f64| (x - cur) * (g.left_derivative(x) - dr);
        let next = if crit(c) <= limit {
            c
        } else {
            let (mut lo, mut hi) = (cur, c);
            while hi - lo > width {
                let mid = 0.5 * (lo + hi);
                if crit(mid) <= limit {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // the supremum lies in [lo, hi]; at a kink inside the bracket the
            // slope to the right of it is the one the next piece starts from
            dr = g.right_derivative(hi);
            if lo > cur {
                lo
            } else {
                hi
            }
        };
        knots.push(next);
        cur = next;
        if knots.len() > k + 1 {
            return Err(Error::refusal("derivative subdivision needed more than K pieces"));
        }
    }
    Ok(knots)
}

/// Splits the longest piece at its midpoint until there are `k` pieces.
fn pad(knots: &mut Vec<f64>, k: usize) {
    while knots.len() < k + 1 {
        let j = (0..knots.len() - 1)
            .max_by(|&i, &l| (knots[i + 1] - knots[i]).total_cmp(&(knots[l + 1] - knots[l])))
            .expect("at least one piece");
        knots.insert(j + 1, 0.5 * (knots[j] + knots[j + 1]));
    }
}

/// Solves `g(x) = y` on `[lo, hi]` for nondecreasing continuous `g`.
fn invert(g: &dyn Curve, y: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g.value(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn effective_affine(m: &Modulus) -> Option<(f64, f64, f64)> {
    match m.shape {
        ModulusShape::Affine { a, alpha, base } => Some((a.max(1.0), alpha, base)),
        ModulusShape::Tabulated { .. } => None,
    }
}

/// A `K`-linear (mode i) or `2K`-linear (mode ii) interpolation of `f` on
/// `[a, b]` with a bound on its `Q`-weighted absolute error. Mode ii uses
/// `modulus` or, when absent, the measure's natural modulus; an affine
/// modulus with constant below one is raised to one.
pub fn k_linear_interpolation(
    f: &dyn Curve,
    a: f64,
    b: f64,
    k: usize,
    q: &Measure,
    modulus: Option<&Modulus>,
    mode: InterpMode,
) -> Result<(Interpolant, InterpCertificate)> {
    if k == 0 {
        return Err(Error::structural("K must be positive"));
    }
    let g = canonical(f, a, b)?;
    let kf = k as f64;
    let dr_a = g.right_derivative(a);
    let dl_b = g.left_derivative(b);
    let v = g.value(b) - g.value(a);
    let (mut knots, bound, closed_form, delta, split) = match mode {
        InterpMode::BoundedDerivativeVariation => {
            if !(dr_a.is_finite() && dl_b.is_finite()) {
                return Err(Error::contract("derivative variation is infinite; use the modulus-driven mode"));
            }
            let mut kn = derivative_subdivision(&g, a, b, k)?;
            pad(&mut kn, k);
            let bound = (dl_b - dr_a).abs() * (b - a) / (4.0 * kf * kf);
            (kn, bound, None, None, None)
        }
        InterpMode::ModulusDriven => {
            let owned;
            let m = match modulus {
                Some(m) => m,
                None => {
                    owned = q.natural_modulus(a, b)?;
                    &owned
                }
            };
            let aff = effective_affine(m);
            let w = match (aff, &m.shape) {
                (Some((aa, alpha, base)), _) => Modulus::affine(m.w0, aa, alpha, base)?,
                _ => m.clone(),
            };
            let (lo_d, hi_d) = (dr_a.max(0.0), dl_b);
            if v <= 0.0 || hi_d <= lo_d {
                let mut kn = vec![a, b];
                pad(&mut kn, 2 * k);
                (kn, v.max(0.0) * w.w0, None, None, None)
            } else {
                let eval_bound = |d: f64| {
                    let tail = if hi_d.is_infinite() { 0.0 } else { w.psi(v / (2.0 * kf * hi_d)) };
                    v * w.w0 + (d - lo_d) * (b - a) / (4.0 * kf * kf) + v / kf * (w.psi(v / (2.0 * kf * d)) - tail)
                };
                let d = match aff {
                    Some((aa, alpha, _)) => {
                        let star = v / (b - a) * (2f64.powf(1.0 - alpha) * aa * kf.powf(1.0 - alpha) / alpha).powf(1.0 / (1.0 + alpha));
                        star.clamp(lo_d, hi_d)
                    }
                    None => {
                        let base = v / (b - a);
                        let lo = lo_d.max(base * 1e-3);
                        let hi = hi_d.min(base * 1e6);
                        let mut best = (f64::INFINITY, hi);
                        for j in 0..=400 {
                            let dd = lo * (hi / lo).powf(j as f64 / 400.0);
                            let val = eval_bound(dd);
                            if val < best.0 {
                                best = (val, dd);
                            }
                        }
                        best.1
                    }
                };
                // tangency point: g'_l(c) <= d <= g'_r(c)
                let c = if d <= lo_d {
                    a
                } else if d >= hi_d {
                    b
                } else {
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if g.left_derivative(mid) <= d {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    lo
                };
                let mut kn = if c > a {
                    let mut left = derivative_subdivision(&g, a, c, k)?;
                    pad(&mut left, k);
                    left
                } else {
                    vec![a]
                };
                if c < b {
                    let (gc, gb) = (g.value(c), g.value(b));
                    let mut prev = c;
                    for i in 1..k {
                        let y = gc + (gb - gc) * i as f64 / kf;
                        let x = invert(&g, y, prev, b);
                        if x > prev && x < b {
                            kn.push(x);
                            prev = x;
                        }
                    }
                    kn.push(b);
                }
                pad(&mut kn, 2 * k);
                let closed = aff.map(|(aa, alpha, _)| {
                    if alpha == 1.0 && aa == 1.0 {
                        let gamma = linear_index_of(f, a, b).map(|r| r.gamma).unwrap_or(1.0);
                        v * (w.w0 + gamma / (kf * kf))
                    } else {
                        v * (w.w0 + (2f64.powf(1.0 - alpha) * aa / (alpha * kf.powf(1.0 + 3.0 * alpha))).powf(1.0 / (1.0 + alpha)))
                    }
                });
                (kn, eval_bound(d), closed, Some(d), Some(g.x(c)))
            }
        }
    };
    if g.flip {
        knots = knots.iter().rev().map(|t| a + b - t).collect();
    }
    knots.dedup();
    let values: Vec<f64> = knots.iter().map(|x| f.value(*x)).collect();
    let interp = Interpolant { knots, values };
    let measured = q.abs_error(f, &|x| interp.eval(x), &interp.knots);
    let cert = InterpCertificate { mode, pieces: interp.pieces(), bound, closed_form, delta, split, measured };
    Ok((interp, cert))
}

#[derive(Debug, Clone, Serialize)]
pub struct ChordBounds {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// `int |f - l| dmu`.
    pub measured: f64,
}

impl ChordBounds {
    pub fn min(&self) -> f64 {
        self.r1.min(self.r2).min(self.r3)
    }
}

/// The three bounds on `int |f - l| dmu` for the chord `l` of a monotone
/// convex (or concave) `f` on `[a, b]`, with `w` a modulus of `mu`.
pub fn interpolant_error_bounds(f: &dyn Curve, a: f64, b: f64, mu: &Measure, w: &Modulus) -> Result<ChordBounds> {
    canonical(f, a, b)?;
    let (fa, fb) = (f.value(a), f.value(b));
    let delta = (fb - fa) / (b - a);
    let chord = |x: f64| fa + delta * (x - a);
    let (dr, dl) = (f.right_derivative(a), f.left_derivative(b));
    let len = b - a;
    let r1 = if (dl - dr).is_finite() { (dl - dr).abs() * len / 4.0 * mu.mass_open(a, b) } else { f64::INFINITY };
    let r2 = if fa == fb {
        0.0
    } else {
        let h = |x: f64| (f.value(x) - chord(x)).abs();
        let area = integrate(&h, a, b, 1e-13);
        (fb - fa).abs() * w.eval(area / (fb - fa).abs())
    };
    let half = len * w.eval(len / 2.0);
    let r3 = if dr == dl {
        0.0
    } else if dr.is_infinite() && dl.is_infinite() {
        f64::INFINITY
    } else if dl.is_infinite() {
        (dr - delta).abs() * half
    } else if dr.is_infinite() {
        (dl - delta).abs() * half
    } else {
        (dr - delta).abs() * (delta - dl).abs() / (dr - dl).abs() * half
    };
    let measured = mu.abs_error(f, &chord, &[]);
    Ok(ChordBounds { r1, r2, r3, measured })
}

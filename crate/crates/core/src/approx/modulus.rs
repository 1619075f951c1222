//! Moduli of measures on the line, `mu(I) <= w(lambda(I))`, and the
//! measures the approximation certificates are stated for.

use serde::{Deserialize, Serialize};

use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::quad::integrate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusShape {
    /// `wbar(u) = a (u / base)^alpha`.
    Affine { a: f64, alpha: f64, base: f64 },
    /// `wbar` interpolated linearly through `(u_j, w_j)` with `u_0 = w_0 = 0`,
    /// continued with the last slope.
    Tabulated { u: Vec<f64>, w: Vec<f64> },
}

/// `w(u) = w0 + wbar(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    pub w0: f64,
    pub shape: ModulusShape,
}

impl Modulus {
    pub fn affine(w0: f64, a: f64, alpha: f64, base: f64) -> Result<Self> {
        if !(w0 >= 0.0 && a >= 0.0 && alpha > 0.0 && alpha <= 1.0 && base > 0.0) || !(w0 + a + base).is_finite() {
            return Err(Error::contract("affine modulus needs w0, a >= 0, alpha in (0, 1], base > 0"));
        }
        Ok(Modulus { w0, shape: ModulusShape::Affine { a, alpha, base } })
    }

    /// Rejects tables that are not nonnegative, nondecreasing and concave.
    pub fn tabulated(w0: f64, u: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if !(w0 >= 0.0) || u.len() != w.len() || u.len() < 2 || u[0] != 0.0 || w[0] != 0.0 {
            return Err(Error::contract("tabulated modulus needs matching grids starting at (0, 0)"));
        }
        if u.iter().chain(&w).any(|v| !v.is_finite()) || u.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::contract("tabulated modulus grid must be finite and increasing"));
        }
        let slopes: Vec<f64> = (1..u.len()).map(|j| (w[j] - w[j - 1]) / (u[j] - u[j - 1])).collect();
        let tol = 1e-12 * (1.0 + slopes.iter().fold(0.0f64, |m, s| m.max(s.abs())));
        if slopes.iter().any(|s| *s < -tol) || slopes.windows(2).any(|p| p[1] > p[0] + tol) {
            return Err(Error::contract("tabulated modulus must be nondecreasing and concave"));
        }
        Ok(Modulus { w0, shape: ModulusShape::Tabulated { u, w } })
    }

    /// `w(u) - w(0)`.
    pub fn bar(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        match &self.shape {
            ModulusShape::Affine { a, alpha, base } => a * (u / base).powf(*alpha),
            ModulusShape::Tabulated { u: g, w } => {
                let m = g.len();
                let j = g[1..m - 1].iter().take_while(|x| **x <= u).count();
                w[j] + (w[j + 1] - w[j]) / (g[j + 1] - g[j]) * (u - g[j])
            }
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.w0 + self.bar(u)
    }

    /// `Psi(x) = int_0^x wbar(t) / t dt`, in closed form.
    pub fn psi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return f64::INFINITY;
        }
        match &self.shape {
            ModulusShape::Affine { a, alpha, base } => a * x.powf(*alpha) / (alpha * base.powf(*alpha)),
            ModulusShape::Tabulated { u, w } => {
                let m = u.len();
                let mut total = 0.0;
                for j in 0..m - 1 {
                    let (t1, t2) = (u[j], u[j + 1].min(x));
                    if t2 <= t1 {
                        break;
                    }
                    let s = (w[j + 1] - w[j]) / (u[j + 1] - u[j]);
                    // wbar(t) = (w_j - s u_j) + s t on this segment
                    let c = w[j] - s * u[j];
                    total += s * (t2 - t1) + if c != 0.0 { c * (t2 / t1).ln() } else { 0.0 };
                }
                if x > u[m - 1] {
                    let s = (w[m - 1] - w[m - 2]) / (u[m - 1] - u[m - 2]);
                    let c = w[m - 1] - s * u[m - 1];
                    total += s * (x - u[m - 1]) + c * (x / u[m - 1]).ln();
                }
                total
            }
        }
    }
}

/// A probability measure on a bounded interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    /// Normalised Lebesgue measure on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Point masses; `points` sorted, weights summing to one.
    Atoms { points: Vec<f64>, weights: Vec<f64> },
}

impl Measure {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::structural("uniform measure needs a finite interval a < b"));
        }
        Ok(Measure::Uniform { a, b })
    }

    /// Equal masses on the given sorted points (repetitions add up).
    pub fn empirical(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::structural("empirical measure of no points"));
        }
        if points.windows(2).any(|w| !(w[0] <= w[1])) || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::structural("points must be finite and sorted"));
        }
        let n = points.len() as f64;
        Ok(Measure::Atoms { points: points.to_vec(), weights: vec![1.0 / n; points.len()] })
    }

    /// Conditional measure on `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        match self {
            Measure::Uniform { .. } => Measure::uniform(a, b),
            Measure::Atoms { points, weights } => {
                let keep: Vec<usize> = (0..points.len()).filter(|&i| points[i] >= a && points[i] <= b).collect();
                let mass: f64 = keep.iter().map(|&i| weights[i]).sum();
                if keep.is_empty() || mass <= 0.0 {
                    return Err(Error::contract("measure has no mass on the interval"));
                }
                Ok(Measure::Atoms {
                    points: keep.iter().map(|&i| points[i]).collect(),
                    weights: keep.iter().map(|&i| weights[i] / mass).collect(),
                })
            }
        }
    }

    /// Mass of the open interval `(s, t)`.
    pub fn mass_open(&self, s: f64, t: f64) -> f64 {
        match self {
            Measure::Uniform { a, b } => ((t.min(*b) - s.max(*a)) / (b - a)).max(0.0),
            Measure::Atoms { points, weights } => {
                points.iter().zip(weights).filter(|(p, _)| **p > s && **p < t).map(|(_, w)| w).sum()
            }
        }
    }

    /// `int |f - g| dQ`; for the uniform measure, `breaks` lists points where
    /// `f - g` may change smoothness or sign.
    pub fn abs_error(&self, f: &dyn Curve, g: &dyn Fn(f64) -> f64, breaks: &[f64]) -> f64 {
        match self {
            Measure::Uniform { a, b } => {
                let mut cuts: Vec<f64> = vec![*a, *b];
                cuts.extend(breaks.iter().copied().filter(|x| x > a && x < b));
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let h = |x: f64| (f.value(x) - g(x)).abs();
                cuts.windows(2).map(|w| integrate(&h, w[0], w[1], 1e-13)).sum::<f64>() / (b - a)
            }
            Measure::Atoms { points, weights } => {
                points.iter().zip(weights).map(|(x, w)| w * (f.value(*x) - g(*x)).abs()).sum()
            }
        }
    }

    /// A modulus of the measure: `u / (b - a)` for the uniform measure, the
    /// fitted affine shape of [`modulus_from_design`] for atoms.
    pub fn natural_modulus(&self, a: f64, b: f64) -> Result<Modulus> {
        match self {
            Measure::Uniform { a, b } => Modulus::affine(0.0, 1.0, 1.0, b - a),
            Measure::Atoms { points, weights } => fit_affine(points, weights, a, b),
        }
    }
}

fn fit_affine(points: &[f64], weights: &[f64], a: f64, b: f64) -> Result<Modulus> {
    if !(a < b) {
        return Err(Error::structural("modulus needs a < b"));
    }
    // merge ties
    let mut z: Vec<f64> = Vec::new();
    let mut m: Vec<f64> = Vec::new();
    for (p, w) in points.iter().zip(weights) {
        if z.last() == Some(p) {
            *m.last_mut().expect("nonempty") += w;
        } else {
            z.push(*p);
            m.push(*w);
        }
    }
    let w0 = m.iter().fold(0.0f64, |x, y| x.max(*y));
    let mut cum = vec![0.0; m.len() + 1];
    for i in 0..m.len() {
        cum[i + 1] = cum[i] + m[i];
    }
    let need = |alpha: f64| -> f64 {
        let mut worst = 0.0f64;
        for k in 0..z.len() {
            for l in k + 1..z.len() {
                let excess = cum[l + 1] - cum[k] - w0;
                if excess > 0.0 {
                    worst = worst.max(excess / ((z[l] - z[k]) / (b - a)).powf(alpha));
                }
            }
        }
        worst
    };
    // largest alpha on a 1/20 grid whose dominating constant is at most 1;
    // otherwise the alpha minimising the K-free factor of the crude bound
    let grid: Vec<f64> = (1..=20).rev().map(|j| j as f64 / 20.0).collect();
    let needs: Vec<f64> = grid.iter().map(|&al| need(al)).collect();
    if let Some(j) = needs.iter().position(|v| *v <= 1.0) {
        return Modulus::affine(w0, 1.0, grid[j], b - a);
    }
    let factor = |j: usize| {
        let (al, aa) = (grid[j], needs[j].max(1.0));
        (2f64.powf(1.0 - al) * aa / al).powf(1.0 / (1.0 + al))
    };
    let j = (0..grid.len()).min_by(|&i, &k| factor(i).total_cmp(&factor(k))).expect("grid nonempty");
    // a tiny relative pad keeps the fitted constant on the safe side of rounding
    Modulus::affine(w0, needs[j].max(1.0) * (1.0 + 1e-12), grid[j], b - a)
}

/// A modulus for the empirical measure of a sorted design on `[a, b]`.
/// With `generator` (a modulus of continuity of `g` where `x_i = g^{-1}(i/n)`)
/// the result is `1/n + generator`; otherwise an affine shape is fitted
/// against every interval spanned by design points.
pub fn modulus_from_design(points: &[f64], a: f64, b: f64, generator: Option<&Modulus>) -> Result<Modulus> {
    if points.is_empty() {
        return Err(Error::structural("empty design"));
    }
    if points.windows(2).any(|w| !(w[0] <= w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::structural("design must be finite and sorted"));
    }
    let n = points.len() as f64;
    if let Some(g) = generator {
        return Ok(Modulus { w0: 1.0 / n + g.w0, shape: g.shape.clone() });
    }
    fit_affine(points, &vec![1.0 / n; points.len()], a, b)
}

/// Largest violation of `Q(I) <= w(lambda(I))` over intervals spanned by the
/// atoms; nonpositive when `w` is a modulus of `Q` on those intervals.
pub fn modulus_violation(q: &Measure, w: &Modulus) -> f64 {
    match q {
        Measure::Uniform { a, b } => {
            (1..=64).map(|j| j as f64 / 64.0 * (b - a)).map(|u| u / (b - a) - w.eval(u)).fold(f64::NEG_INFINITY, f64::max)
        }
        Measure::Atoms { points, weights } => {
            let mut worst = f64::NEG_INFINITY;
            for k in 0..points.len() {
                let mut mass = 0.0;
                for l in k..points.len() {
                    mass += weights[l];
                    if l + 1 < points.len() && points[l + 1] == points[l] {
                        continue;
                    }
                    worst = worst.max(mass - w.eval(points[l] - points[k]));
                }
            }
            worst
        }
    }
}

/// Numerical `Psi` by quadrature, for cross-checking the closed forms.
pub fn psi_by_quadrature(w: &Modulus, x: f64) -> f64 {
    // t = x e^{-v} removes the 1/t singularity: int_0^inf wbar(x e^{-v}) dv
    let g = |v: f64| w.bar(x * (-v).exp());
    // wbar decays like t^alpha near 0, so the tail beyond 60/alpha is below e^-60
    let upper = match &w.shape {
        ModulusShape::Affine { alpha, .. } => 60.0 / alpha,
        ModulusShape::Tabulated { .. } => 60.0,
    };
    integrate(&g, 0.0, upper, 1e-13)
}

//! Risk bound expressions, all up to the unknown constants `kappa` and `C`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub kappa: f64,
    /// Constant in front of the corollary bounds.
    pub c: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig { kappa: 1.0, c: 1.0 }
    }
}

impl BoundConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite() && self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::contract(format!("constants must be positive, got kappa={} C={}", self.kappa, self.c)));
        }
        Ok(())
    }
}

fn check_nd(d: f64, n: f64) -> Result<()> {
    if !(d >= 1.0 && n >= 1.0 && d <= n && n.is_finite()) {
        return Err(Error::contract(format!("need 1 <= D <= n, got D={d} n={n}")));
    }
    Ok(())
}

/// `sigma (D/n)^(1 - 1/p)`.
pub fn rate_term(sigma: f64, d: f64, n: f64, p: f64) -> Result<f64> {
    check_nd(d, n)?;
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::contract(format!("p = {p} outside [1, 2]")));
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::contract(format!("sigma = {sigma} must be nonnegative")));
    }
    Ok(raw_rate(sigma, d / n, p))
}

fn raw_rate(sigma: f64, ratio: f64, p: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    sigma * ratio.powf(1.0 - 1.0 / p)
}

/// Point of `[1, 2]` minimising the rate term and the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedP {
    pub p: f64,
    pub value: f64,
}

const GRID: usize = 10_000;
const GOLDEN_TOL: f64 = 1e-10;

/// Minimises `p -> sigma_p (D/n)^(1-1/p)` over `[1, 2]`.
///
/// Golden section on the log objective, checked against a dense grid so that
/// non-unimodal moment functions still get a sensible answer.
pub fn optimize_p(moment: &dyn Fn(f64) -> f64, d: f64, n: f64) -> Result<OptimizedP> {
    check_nd(d, n)?;
    let ratio = d / n;
    let obj = |p: f64| {
        let s = moment(p);
        if s.is_nan() || s < 0.0 {
            f64::NAN
        } else if s == 0.0 {
            f64::NEG_INFINITY
        } else {
            s.ln() + (1.0 - 1.0 / p) * ratio.ln()
        }
    };
    let consider = |best: &mut (f64, f64), p: f64, v: f64| -> Result<()> {
        if v.is_nan() {
            return Err(Error::contract(format!("moment function returned an invalid value at p={p}")));
        }
        if v < best.1 {
            *best = (p, v);
        }
        Ok(())
    };
    let mut best = (1.0, f64::INFINITY);
    for i in 0..=GRID {
        let p = 1.0 + i as f64 / GRID as f64;
        consider(&mut best, p, obj(p))?;
    }
    // refine around the grid winner, falling back to the full interval
    let h = 1.0 / GRID as f64;
    let (mut a, mut b) = ((best.0 - h).max(1.0), (best.0 + h).min(2.0));
    if best.1.is_infinite() {
        a = 1.0;
        b = 2.0;
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (obj(c), obj(e));
    while b - a > GOLDEN_TOL {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = obj(e);
        }
    }
    let m = 0.5 * (a + b);
    consider(&mut best, m, obj(m))?;
    let (p, v) = best;
    let value = if v == f64::NEG_INFINITY {
        0.0
    } else if v == f64::INFINITY {
        v
    } else {
        raw_rate(moment(p), ratio, p)
    };
    Ok(OptimizedP { p, value })
}

/// `sigma_p = (2 / (2 - p))^(beta / p)` for the symmetric law with density
/// proportional to `q_beta`; infinite at `p = 2`.
pub fn qbeta_moment(beta: f64, p: f64) -> f64 {
    if p >= 2.0 {
        f64::INFINITY
    } else {
        (2.0 / (2.0 - p)).powf(beta / p)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::contract(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

const LN_TOL: f64 = 1e-12;

/// Solution `L >= 2` of `log(n/D) / beta = L - log L - 1`.
pub fn ln_solver(beta: f64, n: f64, d: f64) -> Result<f64> {
    check_beta(beta)?;
    check_nd(d, n)?;
    let z = (n / d).ln() / beta;
    let phi = |l: f64| l - l.ln() - 1.0;
    let floor = phi(2.0);
    if z < floor - 1e-12 {
        return Err(Error::refusal(format!(
            "n/D = {} is below (e/2)^beta = {}; no solution with L >= 2",
            n / d,
            (std::f64::consts::E / 2.0).powf(beta)
        )));
    }
    if z <= floor {
        return Ok(2.0);
    }
    let mut lo = 2.0;
    let mut hi = 2.0 * (z + 2.0);
    while phi(hi) < z {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > LN_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `sqrt(D (e L_n)^beta / n)`.
pub fn heavy_tail_closed_form(beta: f64, n: f64, d: f64) -> Result<f64> {
    let l = ln_solver(beta, n, d)?;
    Ok((d * (std::f64::consts::E * l).powf(beta) / n).sqrt())
}

/// Bracket for `L_n`, available once `n/D >= exp(beta (e - 2))`.
pub fn ln_bracket(beta: f64, n: f64, d: f64) -> Result<Option<(f64, f64)>> {
    check_beta(beta)?;
    check_nd(d, n)?;
    let e = std::f64::consts::E;
    if (n / d).ln() < beta * (e - 2.0) {
        return Ok(None);
    }
    let base = (n / d).ln() / beta + 1.0;
    Ok(Some((base, e / (e - 1.0) * base)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCase {
    /// Extremal elements of the k-piecewise monotone class.
    PiecewiseConstant,
    Monotone,
    ConvexConcaveEquispaced,
    /// Finite variation of the derivative, arbitrary design.
    DerivativeVariation,
    /// Design measure with a power modulus.
    PowerModulus,
    SingleIndex,
    LinearSpace,
}

impl BoundCase {
    pub const ALL: [BoundCase; 7] = [
        BoundCase::PiecewiseConstant,
        BoundCase::Monotone,
        BoundCase::ConvexConcaveEquispaced,
        BoundCase::DerivativeVariation,
        BoundCase::PowerModulus,
        BoundCase::SingleIndex,
        BoundCase::LinearSpace,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::parse(format!("unknown bound case '{s}'")))
    }

    pub fn name(&self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }
}

/// Inputs for [`bound_bn`]; each case reads the fields it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub n: Option<f64>,
    pub p: Option<f64>,
    pub sigma: Option<f64>,
    /// Number of monotone (or convex-concave) pieces.
    pub k: Option<usize>,
    /// Number of constant pieces.
    pub pieces: Option<usize>,
    pub v_j: Option<f64>,
    pub v: Option<f64>,
    pub w: Option<f64>,
    pub v_prime: Option<f64>,
    pub length: Option<f64>,
    pub alpha: Option<f64>,
    pub a: Option<f64>,
    pub w0: Option<f64>,
    pub m: Option<usize>,
    pub dim: Option<usize>,
    /// Approximation error of the linear space, zero when omitted.
    pub approx_error: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, name: &str, case: BoundCase) -> Result<T> {
    v.ok_or_else(|| Error::structural(format!("{} bound needs '{name}'", case.name())))
}

fn nonneg(v: f64, name: &str) -> Result<f64> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::contract(format!("{name} = {v} must be nonnegative")));
    }
    Ok(v)
}

fn pos_count(v: usize, name: &str) -> Result<f64> {
    if v == 0 {
        return Err(Error::contract(format!("{name} must be at least 1")));
    }
    Ok(v as f64)
}

/// Evaluates the bound on `B_n` for one class.
pub fn bound_bn(case: BoundCase, inp: &BoundInputs, cfg: &BoundConfig) -> Result<f64> {
    cfg.validate()?;
    let n = need(inp.n, "n", case)?;
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::contract(format!("n = {n} must be at least 1")));
    }
    let p = need(inp.p, "p", case)?;
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::contract(format!("p = {p} outside [1, 2]")));
    }
    let sigma = nonneg(need(inp.sigma, "sigma", case)?, "sigma")?;
    let s = 1.0 - 1.0 / p;
    let (c, kappa) = (cfg.c, cfg.kappa);
    let rate = |num: f64| raw_rate(sigma, num / n, p);
    let value = match case {
        BoundCase::PiecewiseConstant => {
            let k = pos_count(need(inp.k, "k", case)?, "k")?;
            let kk = pos_count(need(inp.pieces, "pieces", case)?, "pieces")?;
            kappa * rate(2.0 * k + kk - 1.0)
        }
        BoundCase::Monotone => {
            let k = pos_count(need(inp.k, "k", case)?, "k")?;
            let vj = nonneg(need(inp.v_j, "v_j", case)?, "v_j")?;
            c * (mix(sigma, 1.0 / (s + 1.0), vj / n, s / (s + 1.0)) + rate(3.0 * k - 1.0))
        }
        BoundCase::ConvexConcaveEquispaced => {
            let k = pos_count(need(inp.k, "k", case)?, "k")?;
            let w = nonneg(need(inp.w, "w", case)?, "w")?;
            let v = nonneg(need(inp.v, "v", case)?, "v")?;
            c * (mix(sigma, 2.0 / (s + 2.0), w.sqrt() / n, 2.0 * s / (s + 2.0)) + rate(7.0 * k - 2.0) + v / n)
        }
        BoundCase::DerivativeVariation => {
            let vp = nonneg(need(inp.v_prime, "v_prime", case)?, "v_prime")?;
            let len = nonneg(need(inp.length, "length", case)?, "length")?;
            c * (mix(sigma, 2.0 / (s + 2.0), vp * len / (n * n), s / (s + 2.0)) + rate(1.0))
        }
        BoundCase::PowerModulus => {
            let v = nonneg(need(inp.v, "v", case)?, "v")?;
            let alpha = need(inp.alpha, "alpha", case)?;
            let a = need(inp.a, "a", case)?;
            let w0 = nonneg(need(inp.w0, "w0", case)?, "w0")?;
            if !(alpha > 0.0 && alpha <= 1.0) || !(a >= 1.0 && a.is_finite()) {
                return Err(Error::contract(format!("need alpha in (0, 1] and A >= 1, got alpha={alpha} A={a}")));
            }
            let beta = modulus_exponent(alpha);
            let c_alpha = (2f64.powf(1.0 - alpha) * a / alpha).powf(1.0 / (1.0 + alpha));
            c * (mix(sigma, beta / (s + beta), c_alpha * v / n.powf(beta), s / (s + beta)) + v * w0 + rate(1.0))
        }
        BoundCase::SingleIndex => {
            let m = need(inp.m, "m", case)? as f64;
            let v = nonneg(need(inp.v, "v", case)?, "v")?;
            c * (mix(sigma, 1.0 / (s + 1.0), v * (m + 1.0) / n, s / (s + 1.0)) + rate(m + 1.0))
        }
        BoundCase::LinearSpace => {
            let d = pos_count(need(inp.dim, "dim", case)?, "dim")?;
            let err = nonneg(inp.approx_error.unwrap_or(0.0), "approx_error")?;
            3.0 * err + kappa * rate((d + 1.0).min(n))
        }
    };
    Ok(value)
}

/// `sigma^a x^b`, with an infinite `sigma` dominating a vanishing `x`.
fn mix(sigma: f64, a: f64, x: f64, b: f64) -> f64 {
    if sigma.is_infinite() {
        return f64::INFINITY;
    }
    sigma.powf(a) * x.powf(b)
}

/// `(1 + 3 alpha) / (1 + alpha)`.
pub fn modulus_exponent(alpha: f64) -> f64 {
    (1.0 + 3.0 * alpha) / (1.0 + alpha)
}

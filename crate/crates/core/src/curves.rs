//! Test functions on `[0, 1]` with analytic one-sided derivatives, and the
//! text format used to name them.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Step of the one-sided difference quotients used when no analytic
/// derivative is available. The induced error is `O(FD_STEP)`.
pub const FD_STEP: f64 = 1e-6;

pub trait Curve: Sync {
    fn value(&self, x: f64) -> f64;

    fn right_derivative(&self, x: f64) -> f64 {
        (self.value(x + FD_STEP) - self.value(x)) / FD_STEP
    }

    fn left_derivative(&self, x: f64) -> f64 {
        (self.value(x) - self.value(x - FD_STEP)) / FD_STEP
    }
}

/// A closure with difference-quotient derivatives.
pub struct FnCurve<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Curve for FnCurve<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestCurve {
    /// `x^p` for `x >= 0`.
    Power(f64),
    Affine { slope: f64, intercept: f64 },
    /// `exp(r x)`.
    Exp(f64),
    /// `ln(1 + c x)`.
    Log1p(f64),
    /// `1 / (1 + exp(-k (x - m)))`.
    Logistic { k: f64, m: f64 },
    /// `sin(pi x / 2)`.
    Sine,
    /// `1 / (1 + c x)`.
    Recip(f64),
    /// Linear interpolation of the points, extended by the end slopes.
    Pwl(Vec<(f64, f64)>),
    /// `offset + scale * inner`.
    Lin { offset: f64, scale: f64, inner: Box<TestCurve> },
}

fn num(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::parse(format!("bad number '{s}' in curve spec")))?;
    if !v.is_finite() {
        return Err(Error::parse(format!("non-finite number '{s}' in curve spec")));
    }
    Ok(v)
}

impl TestCurve {
    /// Parses `pow:P`, `affine:S:I`, `exp:R`, `log1p:C`, `logistic:K:M`,
    /// `sine`, `recip:C`, `pwl:x/y,x/y,...` and `lin:OFFSET:SCALE:<spec>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let args = |k: usize| -> Result<Vec<f64>> {
            let parts: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
            if parts.len() != k {
                return Err(Error::parse(format!("curve '{head}' takes {k} parameter(s)")));
            }
            parts.into_iter().map(num).collect()
        };
        let c = match head {
            "pow" => {
                let p = args(1)?[0];
                if p <= 0.0 {
                    return Err(Error::parse("power must be positive"));
                }
                TestCurve::Power(p)
            }
            "affine" => {
                let a = args(2)?;
                TestCurve::Affine { slope: a[0], intercept: a[1] }
            }
            "exp" => TestCurve::Exp(args(1)?[0]),
            "log1p" => {
                let c = args(1)?[0];
                if c <= -1.0 {
                    return Err(Error::parse("log1p needs c > -1 on [0, 1]"));
                }
                TestCurve::Log1p(c)
            }
            "logistic" => {
                let a = args(2)?;
                TestCurve::Logistic { k: a[0], m: a[1] }
            }
            "sine" => {
                args(0)?;
                TestCurve::Sine
            }
            "recip" => {
                let c = args(1)?[0];
                if c <= -1.0 {
                    return Err(Error::parse("recip needs c > -1 on [0, 1]"));
                }
                TestCurve::Recip(c)
            }
            "pwl" => {
                let mut pts = Vec::new();
                for p in rest.split(',') {
                    let (x, y) = p.split_once('/').ok_or_else(|| Error::parse(format!("bad pwl point '{p}'")))?;
                    pts.push((num(x)?, num(y)?));
                }
                if pts.len() < 2 || pts.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::parse("pwl needs at least two points with increasing abscissas"));
                }
                TestCurve::Pwl(pts)
            }
            "lin" => {
                let mut it = rest.splitn(3, ':');
                let (o, s, inner) = match (it.next(), it.next(), it.next()) {
                    (Some(o), Some(s), Some(i)) => (num(o)?, num(s)?, i),
                    _ => return Err(Error::parse("lin takes OFFSET:SCALE:<curve>")),
                };
                TestCurve::Lin { offset: o, scale: s, inner: Box::new(TestCurve::parse(inner)?) }
            }
            _ => return Err(Error::parse(format!("unknown curve '{head}'"))),
        };
        Ok(c)
    }

    fn pwl_slopes(pts: &[(f64, f64)]) -> Vec<f64> {
        pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect()
    }

    /// Points of `(0, 1)` splitting `[0, 1]` into pieces on which the curve
    /// is monotone and either convex or concave.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            TestCurve::Logistic { k, m } if *k != 0.0 && *m > 0.0 && *m < 1.0 => vec![*m],
            TestCurve::Pwl(pts) => {
                let s = Self::pwl_slopes(pts);
                let mut out = Vec::new();
                let (mut dir, mut curv) = (0.0f64, 0.0f64);
                for i in 1..s.len() {
                    let knot = pts[i].0;
                    let d = s[i].signum() * (s[i] != 0.0) as u8 as f64;
                    let c = (s[i] - s[i - 1]).signum() * (s[i] != s[i - 1]) as u8 as f64;
                    let d0 = s[i - 1].signum() * (s[i - 1] != 0.0) as u8 as f64;
                    if dir == 0.0 {
                        dir = d0;
                    }
                    let ok_dir = d == 0.0 || dir == 0.0 || d == dir;
                    let ok_curv = c == 0.0 || curv == 0.0 || c == curv;
                    if ok_dir && ok_curv {
                        if dir == 0.0 {
                            dir = d;
                        }
                        if curv == 0.0 {
                            curv = c;
                        }
                    } else {
                        if knot > 0.0 && knot < 1.0 {
                            out.push(knot);
                        }
                        dir = d;
                        curv = 0.0;
                    }
                }
                out
            }
            TestCurve::Lin { inner, .. } => inner.breaks(),
            _ => Vec::new(),
        }
    }
}

impl std::fmt::Display for TestCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestCurve::Power(p) => write!(f, "pow:{p}"),
            TestCurve::Affine { slope, intercept } => write!(f, "affine:{slope}:{intercept}"),
            TestCurve::Exp(r) => write!(f, "exp:{r}"),
            TestCurve::Log1p(c) => write!(f, "log1p:{c}"),
            TestCurve::Logistic { k, m } => write!(f, "logistic:{k}:{m}"),
            TestCurve::Sine => write!(f, "sine"),
            TestCurve::Recip(c) => write!(f, "recip:{c}"),
            TestCurve::Pwl(pts) => {
                let s: Vec<String> = pts.iter().map(|(x, y)| format!("{x}/{y}")).collect();
                write!(f, "pwl:{}", s.join(","))
            }
            TestCurve::Lin { offset, scale, inner } => write!(f, "lin:{offset}:{scale}:{inner}"),
        }
    }
}

impl Curve for TestCurve {
    fn value(&self, x: f64) -> f64 {
        match self {
            TestCurve::Power(p) => x.max(0.0).powf(*p),
            TestCurve::Affine { slope, intercept } => slope * x + intercept,
            TestCurve::Exp(r) => (r * x).exp(),
            TestCurve::Log1p(c) => (c * x).ln_1p(),
            TestCurve::Logistic { k, m } => 1.0 / (1.0 + (-k * (x - m)).exp()),
            TestCurve::Sine => (FRAC_PI_2 * x).sin(),
            TestCurve::Recip(c) => 1.0 / (1.0 + c * x),
            TestCurve::Pwl(pts) => {
                let s = Self::pwl_slopes(pts);
                let i = pts[1..pts.len() - 1].iter().take_while(|p| p.0 <= x).count();
                pts[i].1 + s[i] * (x - pts[i].0)
            }
            TestCurve::Lin { offset, scale, inner } => offset + scale * inner.value(x),
        }
    }

    fn right_derivative(&self, x: f64) -> f64 {
        match self {
            TestCurve::Power(p) => {
                if x > 0.0 {
                    p * x.powf(p - 1.0)
                } else if *p < 1.0 {
                    f64::INFINITY
                } else if *p == 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestCurve::Pwl(pts) => {
                let s = Self::pwl_slopes(pts);
                s[pts[1..pts.len() - 1].iter().take_while(|p| p.0 <= x).count()]
            }
            TestCurve::Lin { scale, inner, .. } => scale * inner.right_derivative(x),
            _ => self.smooth_derivative(x),
        }
    }

    fn left_derivative(&self, x: f64) -> f64 {
        match self {
            TestCurve::Power(_) if x <= 0.0 => 0.0,
            TestCurve::Pwl(pts) => {
                let s = Self::pwl_slopes(pts);
                s[pts[1..pts.len() - 1].iter().take_while(|p| p.0 < x).count()]
            }
            TestCurve::Lin { scale, inner, .. } => scale * inner.left_derivative(x),
            _ => self.smooth_derivative(x),
        }
    }
}

impl TestCurve {
    fn smooth_derivative(&self, x: f64) -> f64 {
        match self {
            TestCurve::Power(p) => p * x.powf(p - 1.0),
            TestCurve::Affine { slope, .. } => *slope,
            TestCurve::Exp(r) => r * (r * x).exp(),
            TestCurve::Log1p(c) => c / (1.0 + c * x),
            TestCurve::Logistic { k, .. } => {
                let s = self.value(x);
                k * s * (1.0 - s)
            }
            TestCurve::Sine => FRAC_PI_2 * (FRAC_PI_2 * x).cos(),
            TestCurve::Recip(c) => -c / ((1.0 + c * x) * (1.0 + c * x)),
            TestCurve::Pwl(_) | TestCurve::Lin { .. } => unreachable!("handled by the one-sided evaluators"),
        }
    }
}

/// Twenty monotone, piecewise convex-concave functions on `[0, 1]`.
pub fn battery() -> Vec<TestCurve> {
    [
        "affine:1:0",
        "affine:-2:1",
        "pow:2",
        "pow:3",
        "pow:1.5",
        "pow:4",
        "pow:0.5",
        "pow:0.25",
        "lin:1:-1:pow:2",
        "exp:1",
        "exp:-3",
        "exp:5",
        "log1p:9",
        "logistic:10:0.5",
        "logistic:4:0",
        "pwl:0/0,0.5/0.25,1/1",
        "pwl:0/0,0.3/0.6,0.7/0.7,1/1.5",
        "pow:10",
        "sine",
        "recip:5",
    ]
    .iter()
    .map(|s| TestCurve::parse(s).expect("battery specs parse"))
    .collect()
}

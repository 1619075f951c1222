use std::fmt;

use crate::error::{Error, Result};
use crate::exact::q;
use crate::io::parse_blocks;
use crate::model::{Design, Partition};

/// Function classes with a supremum oracle and a membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeClass {
    Nondecreasing,
    Nonincreasing,
    /// Nondecreasing or nonincreasing.
    MonotoneEither,
    /// Monotone on each of at most `k` intervals, no continuity requirement.
    PiecewiseMonotone(usize),
    /// Continuous, monotone and convex-or-concave on each of at most `k`
    /// intervals.
    PiecewiseMonotoneConvexConcave(usize),
    FixedPartitionConstant(Partition),
    /// `{a f0 : a in R}`.
    LinearSpan1D(Vec<f64>),
    /// `x -> phi(<theta, x>)` on `R^m` with `phi` monotone.
    SingleIndexMonotone(usize),
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeClass::Nondecreasing => write!(f, "nondecreasing"),
            ShapeClass::Nonincreasing => write!(f, "nonincreasing"),
            ShapeClass::MonotoneEither => write!(f, "monotone"),
            ShapeClass::PiecewiseMonotone(k) => write!(f, "piecewise-monotone:{k}"),
            ShapeClass::PiecewiseMonotoneConvexConcave(k) => write!(f, "convex-concave:{k}"),
            ShapeClass::FixedPartitionConstant(p) => {
                let parts: Vec<String> = p.blocks().iter().map(|b| format!("{}-{}", b.start + 1, b.end)).collect();
                write!(f, "fixed-partition:{}", parts.join(","))
            }
            ShapeClass::LinearSpan1D(_) => write!(f, "linear-span"),
            ShapeClass::SingleIndexMonotone(m) => write!(f, "single-index:{m}"),
        }
    }
}

impl ShapeClass {
    /// Decode a class name such as `piecewise-monotone:2` or
    /// `fixed-partition:1-3,4-6`. `linear-span` needs `f0`.
    pub fn parse(spec: &str, n: usize, f0: Option<&[f64]>) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = match spec.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (spec, None),
        };
        let count = |what: &str| -> Result<usize> {
            let a = arg.ok_or_else(|| Error::parse(format!("{what} needs ':<count>'")))?;
            let k: usize = a.parse().map_err(|_| Error::parse(format!("bad count '{a}'")))?;
            if k == 0 {
                return Err(Error::parse("count must be positive"));
            }
            Ok(k)
        };
        let no_arg = |c: ShapeClass| -> Result<ShapeClass> {
            match arg {
                None => Ok(c),
                Some(_) => Err(Error::parse(format!("'{name}' takes no argument"))),
            }
        };
        match name {
            "nondecreasing" => no_arg(ShapeClass::Nondecreasing),
            "nonincreasing" => no_arg(ShapeClass::Nonincreasing),
            "monotone" => no_arg(ShapeClass::MonotoneEither),
            "piecewise-monotone" => Ok(ShapeClass::PiecewiseMonotone(count(name)?)),
            "convex-concave" => Ok(ShapeClass::PiecewiseMonotoneConvexConcave(count(name)?)),
            "single-index" => Ok(ShapeClass::SingleIndexMonotone(count(name)?)),
            "fixed-partition" => {
                let a = arg.ok_or_else(|| Error::parse("fixed-partition needs ':<blocks>'"))?;
                Ok(ShapeClass::FixedPartitionConstant(parse_blocks(a, n)?))
            }
            "linear-span" => {
                let f0 = f0.ok_or_else(|| Error::parse("linear-span needs an f0 vector"))?;
                if f0.len() != n {
                    return Err(Error::parse(format!("f0 has {} entries, expected {n}", f0.len())));
                }
                no_arg(ShapeClass::LinearSpan1D(f0.to_vec()))
            }
            other => Err(Error::parse(format!("unknown class '{other}'"))),
        }
    }

    /// Does `f` (values on `design`) belong to the class?
    ///
    /// For `PiecewiseMonotoneConvexConcave(k)` with `k >= 2` this checks the
    /// design-level condition (at most `k` runs, each monotone and convex or
    /// concave) and ignores the continuity coupling between runs.
    pub fn contains(&self, design: &Design, f: &[f64]) -> bool {
        if f.len() != design.len() || f.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let levels = design.levels();
        if levels.iter().any(|l| f[l.clone()].iter().any(|&v| v != f[l.start])) {
            return false;
        }
        let lv: Vec<f64> = levels.iter().map(|l| f[l.start]).collect();
        match self {
            ShapeClass::Nondecreasing => lv.windows(2).all(|w| w[0] <= w[1]),
            ShapeClass::Nonincreasing => lv.windows(2).all(|w| w[0] >= w[1]),
            ShapeClass::MonotoneEither => {
                lv.windows(2).all(|w| w[0] <= w[1]) || lv.windows(2).all(|w| w[0] >= w[1])
            }
            ShapeClass::PiecewiseMonotone(k) => monotone_runs(&lv) <= *k,
            ShapeClass::PiecewiseMonotoneConvexConcave(k) => {
                let xs: Vec<f64> = levels.iter().map(|l| design.points()[l.start]).collect();
                convex_monotone_runs(&xs, &lv) <= *k
            }
            ShapeClass::FixedPartitionConstant(p) => {
                p.check_design(design).is_ok()
                    && p.blocks().iter().all(|b| f[b.clone()].iter().all(|&v| v == f[b.start]))
            }
            ShapeClass::LinearSpan1D(f0) => linear_span_coef(f0, f).is_some(),
            ShapeClass::SingleIndexMonotone(_) => false,
        }
    }
}

/// Minimal number of consecutive runs on which `v` is monotone.
pub fn monotone_runs(v: &[f64]) -> usize {
    if v.is_empty() {
        return 0;
    }
    let mut runs = 1;
    let mut dir = 0i8;
    for w in v.windows(2) {
        let d = sgn(w[1] - w[0]);
        if d == 0 {
            continue;
        }
        if dir == 0 {
            dir = d;
        } else if d != dir {
            runs += 1;
            dir = 0;
        }
    }
    runs
}

/// Sign of the second divided difference at three increasing abscissas,
/// computed exactly.
pub(crate) fn curvature_sign(x: [f64; 3], y: [f64; 3]) -> i8 {
    let lhs = (q(y[2]) - q(y[1])) * (q(x[1]) - q(x[0]));
    let rhs = (q(y[1]) - q(y[0])) * (q(x[2]) - q(x[1]));
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Minimal number of runs that are monotone and convex-or-concave.
pub fn convex_monotone_runs(x: &[f64], v: &[f64]) -> usize {
    let n = v.len();
    if n == 0 {
        return 0;
    }
    let ok = |a: usize, b: usize| -> bool {
        let s = &v[a..=b];
        let mono = s.windows(2).all(|w| w[0] <= w[1]) || s.windows(2).all(|w| w[0] >= w[1]);
        if !mono {
            return false;
        }
        let mut curv = 0i8;
        for i in a..b.saturating_sub(1) {
            let c = curvature_sign([x[i], x[i + 1], x[i + 2]], [v[i], v[i + 1], v[i + 2]]);
            if c != 0 {
                if curv != 0 && c != curv {
                    return false;
                }
                curv = c;
            }
        }
        true
    };
    let mut runs = 0;
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && ok(start, end + 1) {
            end += 1;
        }
        runs += 1;
        start = end + 1;
    }
    runs
}

/// `a` with `f = a f0`, if it exists (relative tolerance `1e-9`).
pub fn linear_span_coef(f0: &[f64], f: &[f64]) -> Option<f64> {
    if f0.len() != f.len() {
        return None;
    }
    let ss: f64 = f0.iter().map(|v| v * v).sum();
    let scale = 1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ss == 0.0 {
        return f.iter().all(|v| *v == 0.0).then_some(0.0);
    }
    let a = f0.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() / ss;
    f0.iter().zip(f).all(|(z, v)| (a * z - v).abs() <= 1e-9 * scale).then_some(a)
}

pub(crate) fn sgn(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

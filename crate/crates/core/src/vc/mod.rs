//! Level-set families `{g > fbar}` and `{g < fbar}` of a function class on a
//! finite point set: exhaustive enumeration of the realisable subsets,
//! shattering checks and degree certificates.
//!
//! Every certificate is relative to the point set it was computed on.

mod baseline;
mod feasible;
mod hull;
mod shatter;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{det, q, Q};
use crate::model::{IndexDesign, Partition};
use crate::sign::{convex_monotone_runs, index_contains, IndexGeometry};

pub use baseline::{
    integer_grid, linear_space_bound, random_linear_baseline, random_planar_points, random_single_index_baseline,
    random_step_baseline, single_index_bound, r_monotone_bound,
};
pub use shatter::{
    degree_upper_check, empirical_degree, extremal_check, realizable_subsets, shattered_sets, single_index_degree_check,
    witness, DegreeCertificate, ExtremalCertificate, Member, Realizable, ShatterWitness,
};

/// Largest point set for subset enumeration.
pub const MAX_POINTS: usize = 20;
/// Largest planar point set.
pub const MAX_PLANAR: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Up,
    Down,
    Either,
}

impl Trend {
    fn flip(self) -> Self {
        match self {
            Trend::Up => Trend::Down,
            Trend::Down => Trend::Up,
            Trend::Either => Trend::Either,
        }
    }
    fn allows(self, up: bool) -> bool {
        match self {
            Trend::Up => up,
            Trend::Down => !up,
            Trend::Either => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `{g > fbar}`.
    Above,
    /// `{g < fbar}`.
    Below,
}

/// The class whose members `g` generate the level sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// Every function on the points.
    All,
    /// `r`-monotone on each of at most `pieces` runs of consecutive points,
    /// in the direction allowed by `trend`.
    RMonotone { r: usize, pieces: usize, trend: Trend },
    /// Monotone and convex-or-concave on each of at most `pieces` runs.
    ConvexConcave { pieces: usize },
    /// Constant on each block.
    FixedPartition { partition: Partition },
    /// `{b f0 : b real}`.
    LinearSpan { f0: Vec<f64> },
    /// `x -> phi(<theta, x>)` with `phi` monotone; points in `R` or `R^2`.
    SingleIndex,
}

impl Generator {
    /// The generator of `-g`.
    pub fn negated(&self) -> Self {
        match self {
            Generator::RMonotone { r, pieces, trend } => Generator::RMonotone { r: *r, pieces: *pieces, trend: trend.flip() },
            other => other.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Generator::All => "all".into(),
            Generator::RMonotone { r, pieces, trend } => format!("{r}-monotone:{pieces}:{trend:?}").to_lowercase(),
            Generator::ConvexConcave { pieces } => format!("convex-concave:{pieces}"),
            Generator::FixedPartition { partition } => format!("fixed-partition:{}", partition.blocks().len()),
            Generator::LinearSpan { .. } => "linear-span".into(),
            Generator::SingleIndex => "single-index".into(),
        }
    }

    fn one_dimensional(&self) -> bool {
        !matches!(self, Generator::SingleIndex)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetFamily {
    /// One row per point; rows of length one for the univariate generators.
    pub points: Vec<Vec<f64>>,
    pub fbar: Vec<f64>,
    pub generator: Generator,
    pub side: Side,
    #[serde(skip)]
    geometry: Option<IndexGeometry>,
}

impl LevelSetFamily {
    /// Validates the points and checks that `fbar` belongs to the generator
    /// class (a contract error otherwise).
    pub fn new(points: Vec<Vec<f64>>, fbar: Vec<f64>, generator: Generator, side: Side) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::structural("no points"));
        }
        if fbar.len() != n {
            return Err(Error::structural(format!("fbar has {} values for {n} points", fbar.len())));
        }
        if fbar.iter().chain(points.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::structural("points and fbar must be finite"));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::structural("points must share a positive dimension"));
        }
        if generator.one_dimensional() && dim != 1 {
            return Err(Error::structural(format!("{} needs univariate points", generator.describe())));
        }
        if dim > 2 {
            return Err(Error::refusal(format!("dimension {dim} is not supported")));
        }
        let cap = if dim == 2 { MAX_PLANAR } else { MAX_POINTS };
        if n > cap {
            return Err(Error::refusal(format!("{n} points exceed the enumeration cap of {cap}")));
        }
        match &generator {
            Generator::RMonotone { r, pieces, .. } => {
                if *r == 0 || *pieces == 0 {
                    return Err(Error::structural("r and pieces must be positive"));
                }
            }
            Generator::ConvexConcave { pieces } if *pieces == 0 => {
                return Err(Error::structural("pieces must be positive"));
            }
            Generator::FixedPartition { partition } if partition.n() != n => {
                return Err(Error::structural(format!("partition covers {} of {n} points", partition.n())));
            }
            Generator::LinearSpan { f0 } if f0.len() != n || f0.iter().any(|v| !v.is_finite()) => {
                return Err(Error::structural("f0 must have one finite value per point"));
            }
            _ => {}
        }
        let needs_order = matches!(generator, Generator::RMonotone { .. } | Generator::ConvexConcave { .. });
        if needs_order && points.windows(2).any(|w| !(w[0][0] < w[1][0])) {
            return Err(Error::structural("points must be strictly increasing"));
        }
        let geometry = match generator {
            Generator::SingleIndex => Some(IndexGeometry::new(&IndexDesign::new(points.clone())?)?),
            _ => None,
        };
        let fam = LevelSetFamily { points, fbar, generator, side, geometry };
        if !fam.contains(&fam.fbar) {
            return Err(Error::contract(format!("fbar is not a member of {}", fam.generator.describe())));
        }
        Ok(fam)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points, `fbar -> -fbar`, `g -> -g` and the other side.
    pub fn dual(&self) -> Self {
        LevelSetFamily {
            points: self.points.clone(),
            fbar: self.fbar.iter().map(|v| -v).collect(),
            generator: self.generator.negated(),
            side: match self.side {
                Side::Above => Side::Below,
                Side::Below => Side::Above,
            },
            geometry: self.geometry.clone(),
        }
    }

    pub fn with_side(&self, side: Side) -> Self {
        LevelSetFamily { side, ..self.clone() }
    }

    fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    /// Membership of `g` in the generator class, decided exactly.
    pub fn contains(&self, g: &[f64]) -> bool {
        if g.len() != self.len() || g.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.generator {
            Generator::All => true,
            Generator::RMonotone { r, pieces, trend } => {
                let x: Vec<Q> = self.xs().iter().map(|v| q(*v)).collect();
                let y: Vec<Q> = g.iter().map(|v| q(*v)).collect();
                rmonotone_runs(&x, &y, *r, *trend) <= *pieces
            }
            Generator::ConvexConcave { pieces } => convex_monotone_runs(&self.xs(), g) <= *pieces,
            Generator::FixedPartition { partition } => {
                partition.blocks().iter().all(|b| g[b.clone()].iter().all(|v| *v == g[b.start]))
            }
            Generator::LinearSpan { f0 } => linear_multiple(f0, g).is_some(),
            Generator::SingleIndex => index_contains(self.geometry.as_ref().expect("geometry"), g),
        }
    }
}

/// Exact `b` with `g = b f0`.
fn linear_multiple(f0: &[f64], g: &[f64]) -> Option<Q> {
    let mut b: Option<Q> = None;
    for (z, v) in f0.iter().zip(g) {
        if *z == 0.0 {
            if *v != 0.0 {
                return None;
            }
            continue;
        }
        let t = q(*v) / q(*z);
        match &b {
            Some(c) if *c != t => return None,
            _ => b = Some(t),
        }
    }
    Some(b.unwrap_or_else(Q::zero))
}

/// Sign of `L_v(f)` for each window of `r + 1` consecutive points.
fn window_signs(x: &[Q], y: &[Q], r: usize) -> Vec<i8> {
    if x.len() <= r {
        return Vec::new();
    }
    (0..x.len() - r)
        .map(|t| {
            let c = crate::exact::rmono_coeffs(&x[t..=t + r]);
            let v: Q = c.iter().zip(&y[t..=t + r]).map(|(a, b)| a * b).sum();
            v.cmp(&Q::zero()) as i8
        })
        .collect()
}

/// Fewest runs of consecutive points on which `y` is `r`-monotone in an
/// allowed direction. Nonnegative `L` on consecutive windows implies it on
/// every increasing tuple of the run, so windows suffice.
pub(crate) fn rmonotone_runs(x: &[Q], y: &[Q], r: usize, trend: Trend) -> usize {
    let n = x.len();
    if n == 0 {
        return 0;
    }
    let s = window_signs(x, y, r);
    let mut runs = 0;
    let mut start = 0;
    while start < n {
        // longest run from `start`: windows t with t + r < end
        let mut end = start + 1;
        let (mut pos, mut neg) = (false, false);
        while end < n {
            let ok = if end >= start + r {
                let t = end - r;
                let (p, m) = (pos || s[t] > 0, neg || s[t] < 0);
                let fine = !(p && m) && !(p && !trend.allows(true)) && !(m && !trend.allows(false));
                if fine {
                    pos = p;
                    neg = m;
                }
                fine
            } else {
                true
            };
            if !ok {
                break;
            }
            end += 1;
        }
        runs += 1;
        start = end;
    }
    runs
}

/// `L_v(f)` for strictly increasing `v_0 < ... < v_r`: the determinant with
/// rows `[1, v_i, ..., v_i^{r-1}, f(v_i)]`, computed exactly.
pub fn r_monotone_det(points: &[f64], values: &[f64]) -> Result<f64> {
    if points.len() != values.len() || points.len() < 2 {
        return Err(Error::structural("need r + 1 >= 2 points with one value each"));
    }
    if points.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::structural("points and values must be finite"));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::structural("points must be strictly increasing"));
    }
    let r = points.len() - 1;
    let m: Vec<Vec<Q>> = points
        .iter()
        .zip(values)
        .map(|(x, f)| {
            let xq = q(*x);
            let mut row = Vec::with_capacity(r + 1);
            let mut p = Q::from_integer(1.into());
            for _ in 0..r {
                row.push(p.clone());
                p *= &xq;
            }
            row.push(q(*f));
            row
        })
        .collect();
    Ok(det(m).to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_examples() {
        assert_eq!(r_monotone_det(&[0.0, 1.0], &[3.0, 5.0]).unwrap(), 2.0);
        assert_eq!(r_monotone_det(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]).unwrap(), 2.0);
        // degree <= r - 1 gives zero
        let x = [0.5, 1.0, 2.5, 3.0];
        let p: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v + 0.5 * v * v).collect();
        assert_eq!(r_monotone_det(&x, &p).unwrap(), 0.0);
        assert!(r_monotone_det(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn runs_count() {
        let x: Vec<Q> = (0..6).map(|i| q(i as f64)).collect();
        let y: Vec<Q> = [0.0, 1.0, 4.0, 9.0, 8.0, 1.0].iter().map(|v| q(*v)).collect();
        assert_eq!(rmonotone_runs(&x, &y, 1, Trend::Either), 2);
        assert_eq!(rmonotone_runs(&x, &y, 1, Trend::Up), 3);
        assert_eq!(rmonotone_runs(&x, &y, 2, Trend::Either), 2);
    }

    #[test]
    fn fbar_must_be_member() {
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let g = Generator::RMonotone { r: 1, pieces: 1, trend: Trend::Up };
        assert!(matches!(
            LevelSetFamily::new(pts.clone(), vec![0.0, 1.0, 0.0, 1.0], g.clone(), Side::Above),
            Err(Error::Contract(_))
        ));
        assert!(LevelSetFamily::new(pts, vec![0.0, 1.0, 1.0, 2.0], g, Side::Above).is_ok());
    }
}

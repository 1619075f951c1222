//! Designs, observations, moment profiles and the `ell_s` loss.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Sorted one-dimensional design. Repeated abscissas are kept as separate
/// indices; functions of `x` must agree on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    points: Vec<f64>,
}

impl Design {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::structural("design is empty"));
        }
        if let Some(i) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::structural(format!("design point {i} is not finite")));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::structural("design points must be sorted"));
        }
        Ok(Design { points })
    }

    /// `x_i = i / n` for `i = 1..=n`.
    pub fn equispaced(n: usize) -> Result<Self> {
        Design::new((1..=n).map(|i| i as f64 / n as f64).collect())
    }

    /// `x_i = (i - 1/2) / n` for `i = 1..=n`.
    pub fn midpoints(n: usize) -> Result<Self> {
        Design::new((1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Maximal runs of equal abscissas, in order.
    pub fn levels(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.points.len() {
            if i == self.points.len() || self.points[i] != self.points[start] {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    pub fn has_ties(&self) -> bool {
        self.points.windows(2).any(|w| w[0] == w[1])
    }
}

/// Design in `R^m` for single-index models.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexDesign {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl IndexDesign {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || dim == 0 {
            return Err(Error::structural("index design is empty"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::structural(format!("row {i} has {} coordinates, expected {dim}", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::structural(format!("row {i} has a non-finite coordinate")));
            }
        }
        Ok(IndexDesign { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().zip(theta).map(|(a, b)| a * b).sum()).collect()
    }
}

fn check_obs(n: usize, y: &[f64]) -> Result<()> {
    if y.len() != n {
        return Err(Error::structural(format!("{} observations for {} design points", y.len(), n)));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::structural(format!("observation {i} is not finite")));
    }
    Ok(())
}

/// A sample `Z = ((x_1, Y_1), ..., (x_n, Y_n))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Data {
    pub design: Design,
    pub y: Vec<f64>,
}

impl Data {
    pub fn new(design: Design, y: Vec<f64>) -> Result<Self> {
        check_obs(design.len(), &y)?;
        Ok(Data { design, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexData {
    pub design: IndexDesign,
    pub y: Vec<f64>,
}

impl IndexData {
    pub fn new(design: IndexDesign, y: Vec<f64>) -> Result<Self> {
        check_obs(design.len(), &y)?;
        Ok(IndexData { design, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Contiguous blocks of indices covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Range<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Range<usize>>) -> Result<Self> {
        let mut next = 0;
        for b in &blocks {
            if b.start != next || b.end <= b.start {
                return Err(Error::structural(format!("blocks must be nonempty and contiguous, got {b:?} at {next}")));
            }
            next = b.end;
        }
        if next != n {
            return Err(Error::structural(format!("blocks cover {next} of {n} indices")));
        }
        Ok(Partition { blocks })
    }

    /// Blocks given by their sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let mut blocks = Vec::with_capacity(sizes.len());
        for &s in sizes {
            blocks.push(start..start + s);
            start += s;
        }
        Partition::new(start, blocks)
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.last().map(|b| b.end).unwrap_or(0)
    }

    /// A block boundary may not separate two equal abscissas.
    pub fn check_design(&self, design: &Design) -> Result<()> {
        if self.n() != design.len() {
            return Err(Error::structural(format!("partition covers {} indices, design has {}", self.n(), design.len())));
        }
        let x = design.points();
        for b in &self.blocks[1..] {
            if x[b.start - 1] == x[b.start] {
                return Err(Error::contract(format!("block boundary at {} splits tied abscissas", b.start)));
            }
        }
        Ok(())
    }
}

/// Law of a single noise coordinate, enough to evaluate `E|xi|^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseLaw {
    Zero,
    Gaussian { sd: f64 },
    /// Symmetric law with density `q_beta(|x| / scale) / scale`.
    QBeta { beta: f64, scale: f64 },
    /// `Y - p` for `Y ~ Bernoulli(p)`.
    Bernoulli { p: f64 },
    /// `Y - mean` for `Y ~ Poisson(mean)`.
    Poisson { mean: f64 },
}

impl NoiseLaw {
    /// `E|xi|^p`, possibly `+inf`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        match *self {
            NoiseLaw::Zero => 0.0,
            NoiseLaw::Gaussian { sd } => {
                sd.abs().powf(p) * 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
            }
            NoiseLaw::QBeta { beta, scale } => {
                if p >= 2.0 {
                    f64::INFINITY
                } else {
                    scale.abs().powf(p) * (2.0 / (2.0 - p)).powf(beta)
                }
            }
            NoiseLaw::Bernoulli { p: q } => q * (1.0 - q).powf(p) + (1.0 - q) * q.powf(p),
            NoiseLaw::Poisson { mean } => poisson_abs_moment(mean, p),
        }
    }
}

fn poisson_abs_moment(mean: f64, p: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let kmax = (mean + 40.0 * mean.sqrt() + 60.0).ceil() as u64;
    let mut log_pmf = -mean;
    let mut sum = 0.0;
    for k in 0..=kmax {
        if k > 0 {
            log_pmf += mean.ln() - (k as f64).ln();
        }
        sum += log_pmf.exp() * (k as f64 - mean).abs().powf(p);
    }
    sum
}

/// Per-index noise laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub laws: Vec<NoiseLaw>,
}

impl MomentProfile {
    pub fn new(laws: Vec<NoiseLaw>) -> Self {
        MomentProfile { laws }
    }

    pub fn iid(law: NoiseLaw, n: usize) -> Self {
        MomentProfile { laws: vec![law; n] }
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }
}

/// `sigma_p = (n^{-1} sum_i E|xi_i|^p)^{1/p}` for `p` in `[1, 2]`.
pub fn sigma_p(profile: &MomentProfile, p: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::contract(format!("p = {p} outside [1, 2]")));
    }
    if profile.is_empty() {
        return Err(Error::structural("empty moment profile"));
    }
    let mut acc = 0.0;
    for law in &profile.laws {
        let m = law.abs_moment(p);
        if m.is_nan() || m < 0.0 {
            return Err(Error::structural(format!("invalid moment {m} for {law:?}")));
        }
        if m.is_infinite() {
            return Ok(f64::INFINITY);
        }
        acc += m;
    }
    Ok((acc / profile.len() as f64).powf(1.0 / p))
}

/// `[n^{-1} sum |f_i - g_i|^s]^{1/s}` for `s >= 1`.
pub fn ell_s_loss(f: &[f64], g: &[f64], s: f64) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::structural(format!("length mismatch {} vs {}", f.len(), g.len())));
    }
    if f.is_empty() {
        return Err(Error::structural("empty vectors"));
    }
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::contract(format!("loss exponent s = {s} must be in [1, inf)")));
    }
    let n = f.len() as f64;
    if s == 1.0 {
        return Ok(f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum::<f64>() / n);
    }
    let m = f.iter().zip(g).map(|(a, b)| (a - b).abs().powf(s)).sum::<f64>() / n;
    Ok(m.powf(1.0 / s))
}

/// Shorthand for `ell_s_loss(f, g, 1)` on vectors known to match.
pub fn ell(f: &[f64], g: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), g.len());
    f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum::<f64>() / f.len() as f64
}

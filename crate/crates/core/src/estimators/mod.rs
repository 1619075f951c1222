//! Elements of the estimator set: approximate minimisers of the supremum
//! oracle over a shape class, closed forms for the partition and linear span
//! classes, and the least-squares baseline.

mod fit;
mod sieve;

pub use fit::{block_means, isotonic, project_pieces, segmentations};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Data, IndexData, Partition};
use crate::sign::{index_contains, sup_t, sup_value, sup_value_index, IndexGeometry, ShapeClass};
use sieve::{Found, Problem, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    ExactTiny,
    RegressogramDp,
    LocalSearch,
    AngleGrid,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-tiny" => Ok(Strategy::ExactTiny),
            "regressogram-dp" => Ok(Strategy::RegressogramDp),
            "local-search" => Ok(Strategy::LocalSearch),
            "angle-grid" => Ok(Strategy::AngleGrid),
            _ => Err(Error::parse(format!("unknown strategy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub strategy: Strategy,
    /// Largest number of blocks in the segmentation ladder.
    pub max_blocks: usize,
    pub restarts: usize,
    /// Coordinate-descent sweeps per start.
    pub sweeps: usize,
    /// Number of directions in the half-circle grid.
    pub angle_grid: usize,
    /// Cap on the number of candidates for exact enumeration.
    pub exact_limit: usize,
    pub seed: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            strategy: Strategy::RegressogramDp,
            max_blocks: 32,
            restarts: 8,
            sweeps: 4,
            angle_grid: 720,
            exact_limit: 2_000_000,
            seed: 0,
        }
    }
}

impl SieveConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        SieveConfig { strategy, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_blocks == 0 || self.restarts == 0 || self.sweeps == 0 || self.angle_grid == 0 || self.exact_limit == 0 {
            return Err(Error::contract("sieve budgets must be positive"));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        match self.strategy {
            Strategy::ExactTiny => format!("exact-tiny(limit={})", self.exact_limit),
            Strategy::RegressogramDp => format!("regressogram-dp(max_blocks={}, sweeps={})", self.max_blocks, self.sweeps),
            Strategy::LocalSearch => {
                format!("local-search(restarts={}, sweeps={}, seed={})", self.restarts, self.sweeps, self.seed)
            }
            Strategy::AngleGrid => format!("angle-grid(directions={})", self.angle_grid),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateResult {
    pub fhat: Vec<f64>,
    /// `T(Z, fhat)`, recomputed by the supremum oracle.
    pub t_value: f64,
    /// `t_value` minus the best value found over the examined candidates.
    pub slack_bound: f64,
    /// `fhat` lies in the estimator set for any constant at least this large,
    /// since the infimum over the class is nonnegative.
    pub certified_slack: f64,
    pub sieve_descriptor: String,
    pub candidates_examined: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

fn closed_form(fhat: Vec<f64>, t_value: f64, descriptor: String) -> EstimateResult {
    EstimateResult {
        fhat,
        t_value,
        slack_bound: 0.0,
        certified_slack: t_value.max(0.0),
        sieve_descriptor: descriptor,
        candidates_examined: 1,
        seed: 0,
        theta: None,
    }
}

/// Per-block means of `Y` on a fixed partition.
pub fn regressogram(partition: &Partition, data: &Data) -> Result<EstimateResult> {
    if partition.n() != data.len() {
        return Err(Error::structural(format!("partition covers {} points, data has {}", partition.n(), data.len())));
    }
    partition.check_design(&data.design)?;
    let mut fhat = vec![0.0; data.len()];
    for b in partition.blocks() {
        let m = data.y[b.clone()].iter().sum::<f64>() / b.len() as f64;
        fhat[b.clone()].iter_mut().for_each(|v| *v = m);
    }
    let class = ShapeClass::FixedPartitionConstant(partition.clone());
    let t = sup_value(&class, data, &fhat)?;
    Ok(closed_form(fhat, t, format!("regressogram({} blocks)", partition.blocks().len())))
}

fn check_f0(f0: &[f64], data: &Data) -> Result<()> {
    if f0.len() != data.len() {
        return Err(Error::structural(format!("f0 has {} values, data has {}", f0.len(), data.len())));
    }
    if f0.iter().any(|v| !v.is_finite()) {
        return Err(Error::structural("f0 is not finite"));
    }
    Ok(())
}

/// `sum_i Y_i sgn(f0_i) / sum_i |f0_i|`.
pub fn sign_coefficient(f0: &[f64], y: &[f64]) -> Result<f64> {
    let den: f64 = f0.iter().map(|v| v.abs()).sum();
    if den <= 0.0 {
        return Err(Error::contract("f0 vanishes on the design"));
    }
    let num: f64 = f0.iter().zip(y).map(|(a, b)| b * a.signum() * (*a != 0.0) as u8 as f64).sum();
    Ok(num / den)
}

/// `sum_i Y_i f0_i / sum_i f0_i^2`.
pub fn lse_coefficient(f0: &[f64], y: &[f64]) -> Result<f64> {
    let den: f64 = f0.iter().map(|v| v * v).sum();
    if den <= 0.0 {
        return Err(Error::contract("f0 vanishes on the design"));
    }
    Ok(f0.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / den)
}

/// The minimiser over `{a f0}`.
pub fn linear_span_1d(f0: &[f64], data: &Data) -> Result<EstimateResult> {
    check_f0(f0, data)?;
    let a = sign_coefficient(f0, &data.y)?;
    let fhat: Vec<f64> = f0.iter().map(|v| a * v).collect();
    let t = sup_value(&ShapeClass::LinearSpan1D(f0.to_vec()), data, &fhat)?;
    Ok(closed_form(fhat, t, format!("sign coefficient a={a}")))
}

/// Least squares on `{a f0}`; a baseline, not a minimiser of the statistic.
pub fn lse_linear_1d(f0: &[f64], data: &Data) -> Result<EstimateResult> {
    check_f0(f0, data)?;
    let a = lse_coefficient(f0, &data.y)?;
    let fhat: Vec<f64> = f0.iter().map(|v| a * v).collect();
    let t = sup_value(&ShapeClass::LinearSpan1D(f0.to_vec()), data, &fhat)?;
    Ok(closed_form(fhat, t, format!("least squares a={a}")))
}

fn run_strategy(p: &Problem, cfg: &SieveConfig) -> Result<Found> {
    match cfg.strategy {
        Strategy::ExactTiny => sieve::exact_tiny(p, cfg.exact_limit),
        Strategy::RegressogramDp => Ok(sieve::regressogram_dp(p, cfg.max_blocks, cfg.sweeps)),
        Strategy::LocalSearch => Ok(sieve::local_search(p, cfg.restarts, cfg.sweeps, cfg.seed)),
        Strategy::AngleGrid => Err(Error::refusal("angle-grid applies to single-index designs only")),
    }
}

/// Approximate minimiser of `f -> T(Z, f)` over the class.
pub fn minimize_t(class: &ShapeClass, data: &Data, cfg: &SieveConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let shape = match class {
        ShapeClass::FixedPartitionConstant(p) => return regressogram(p, data),
        ShapeClass::LinearSpan1D(f0) => return linear_span_1d(f0, data),
        ShapeClass::Nondecreasing => Shape::Up,
        ShapeClass::Nonincreasing => Shape::Down,
        ShapeClass::MonotoneEither => Shape::Either,
        ShapeClass::PiecewiseMonotone(k) => Shape::Pieces(*k),
        ShapeClass::PiecewiseMonotoneConvexConcave(_) => {
            return Err(Error::refusal(format!("no sieve search for class {class}")))
        }
        ShapeClass::SingleIndexMonotone(_) => {
            return Err(Error::contract("single-index classes need an index design; use single_index_estimate"))
        }
    };
    let levels: Vec<Vec<usize>> = data.design.levels().into_iter().map(|r| r.collect()).collect();
    let eval = |f: &[f64]| sup_value(class, data, f).unwrap_or(f64::INFINITY);
    let p = Problem::new(levels, &data.y, shape, &eval);
    let found = run_strategy(&p, cfg)?;
    let fhat = p.expand(&found.lv);
    let cert = sup_t(class, data, &fhat)?;
    Ok(EstimateResult {
        fhat,
        t_value: cert.value,
        slack_bound: (cert.value - found.t).max(0.0),
        certified_slack: cert.value.max(0.0),
        sieve_descriptor: format!("{} on {}", cfg.describe(), class),
        candidates_examined: found.examined,
        seed: cfg.seed,
        theta: None,
    })
}

fn float_levels(t: &[f64]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..t.len()).collect();
    idx.sort_by(|&a, &b| t[a].total_cmp(&t[b]).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match out.last_mut() {
            Some(l) if t[l[0]] == t[i] => l.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Directions `(cos(pi j / N), sin(pi j / N))` for `j < N`, or the single
/// direction `1` on the line.
pub fn angle_grid(dim: usize, resolution: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0]];
    }
    (0..resolution)
        .map(|j| {
            let a = std::f64::consts::PI * j as f64 / resolution as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Monotone link fitted along each direction of the angle grid; the
/// direction with the smallest statistic wins, earliest on ties. The inner
/// search uses `cfg.strategy`, with `AngleGrid` meaning the segmentation
/// search.
pub fn single_index_estimate(data: &IndexData, cfg: &SieveConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let dim = data.design.dim();
    if dim > 2 {
        return Err(Error::refusal(format!("single-index estimation supports dimension 1 or 2, got {dim}")));
    }
    if data.len() < 2 {
        return Err(Error::contract("single-index estimation needs at least two points"));
    }
    let geom = IndexGeometry::new(&data.design)?;
    let inner = SieveConfig {
        strategy: if cfg.strategy == Strategy::AngleGrid { Strategy::RegressogramDp } else { cfg.strategy },
        ..cfg.clone()
    };
    let eval = |f: &[f64]| sup_value_index(&geom, &data.y, f);
    let mut seen = HashSet::new();
    let mut best: Option<(Found, Vec<f64>, Vec<Vec<usize>>)> = None;
    let mut examined = 0;
    for theta in angle_grid(dim, cfg.angle_grid) {
        let levels = float_levels(&data.design.project(&theta));
        if !seen.insert(levels.clone()) {
            continue;
        }
        let p = Problem::new(levels.clone(), &data.y, Shape::Either, &eval);
        let found = run_strategy(&p, &inner)?;
        examined += found.examined;
        if best.as_ref().is_none_or(|b| found.t < b.0.t - 1e-12 * (1.0 + b.0.t.abs())) {
            best = Some((found, theta, levels));
        }
    }
    let (found, theta, levels) = best.expect("grid is nonempty");
    let mut fhat = vec![0.0; data.len()];
    for (l, v) in levels.iter().zip(&found.lv) {
        for &i in l {
            fhat[i] = *v;
        }
    }
    if !index_contains(&geom, &fhat) {
        return Err(Error::contract("fitted link is not monotone along any realisable ordering"));
    }
    let t = sup_value_index(&geom, &data.y, &fhat);
    Ok(EstimateResult {
        fhat,
        t_value: t,
        slack_bound: (t - found.t).max(0.0),
        certified_slack: t.max(0.0),
        sieve_descriptor: format!("angle-grid(directions={}) x {}", cfg.angle_grid, inner.describe()),
        candidates_examined: examined,
        seed: cfg.seed,
        theta: Some(theta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Design;

    fn data(y: &[f64]) -> Data {
        Data::new(Design::equispaced(y.len()).unwrap(), y.to_vec()).unwrap()
    }

    #[test]
    fn regressogram_means() {
        let d = data(&[1.0, 3.0, 7.0]);
        let p = Partition::from_sizes(&[2, 1]).unwrap();
        let r = regressogram(&p, &d).unwrap();
        assert_eq!(r.fhat, vec![2.0, 2.0, 7.0]);
        assert_eq!(r.t_value, 0.0);
        let r = regressogram(&Partition::from_sizes(&[1, 1]).unwrap(), &data(&[5.0, -1.0])).unwrap();
        assert_eq!(r.fhat, vec![5.0, -1.0]);
    }

    #[test]
    fn linear_span_examples() {
        let d = data(&[2.0, 0.0]);
        assert_eq!(sign_coefficient(&[1.0, -1.0], &d.y).unwrap(), 1.0);
        assert_eq!(lse_coefficient(&[1.0, -1.0], &d.y).unwrap(), 1.0);
        assert!(matches!(linear_span_1d(&[0.0, 0.0], &d), Err(Error::Contract(_))));
        let f0 = [0.5, 2.0, -1.0];
        let y: Vec<f64> = f0.iter().map(|v| 3.0 * v).collect();
        assert_eq!(sign_coefficient(&f0, &y).unwrap(), 3.0);
        assert_eq!(lse_coefficient(&f0, &y).unwrap(), 3.0);
    }

    #[test]
    fn strategy_class_pairs() {
        let d = data(&[1.0, 0.0, 2.0]);
        let cfg = SieveConfig::with_strategy(Strategy::AngleGrid);
        assert!(matches!(minimize_t(&ShapeClass::Nondecreasing, &d, &cfg), Err(Error::Refusal(_))));
        let cfg = SieveConfig::default();
        let cc = ShapeClass::PiecewiseMonotoneConvexConcave(1);
        assert!(matches!(minimize_t(&cc, &d, &cfg), Err(Error::Refusal(_))));
    }

    #[test]
    fn monotone_data_is_fitted_exactly() {
        let d = data(&[0.0, 1.0, 1.5, 4.0]);
        for s in [Strategy::ExactTiny, Strategy::RegressogramDp, Strategy::LocalSearch] {
            let r = minimize_t(&ShapeClass::Nondecreasing, &d, &SieveConfig::with_strategy(s)).unwrap();
            assert_eq!(r.t_value, 0.0, "{s:?}");
            assert_eq!(r.fhat, d.y);
        }
    }
}

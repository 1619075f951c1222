//! Noise generators, scenarios and Monte-Carlo risk estimation.

mod noise;

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, TestCurve};
use crate::error::{Error, Result};
use crate::estimators::{lse_coefficient, minimize_t, sign_coefficient, SieveConfig};
use crate::model::{ell, Data, Design};
use crate::quad::integrate;
use crate::sign::ShapeClass;

pub use noise::{sample_qbeta, BaseLaw, NoiseSpec};

/// Environment variable overriding the default seed; a command-line flag
/// takes precedence.
pub const SEED_ENV: &str = "SIGNREG_SEED";

/// Flag, then environment, then `default`.
pub fn resolve_seed(flag: Option<u64>, default: u64) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::parse(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(default),
    }
}

/// `E|N(mu, sd^2)|` through the error function.
pub fn folded_normal_mean(mu: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return mu.abs();
    }
    let z = mu / (sd * std::f64::consts::SQRT_2);
    sd * (2.0 / std::f64::consts::PI).sqrt() * (-z * z).exp() + mu * statrs::function::erf::erf(z)
}

/// First absolute moment of a standard Gaussian.
pub fn c0() -> f64 {
    folded_normal_mean(0.0, 1.0)
}

/// Neumaier-compensated sum, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Sample mean with its standard error `sd / sqrt(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_values(v: &[f64]) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::structural("no values to average"));
        }
        let n = v.len() as f64;
        let mean = compensated_sum(v.iter().copied()) / n;
        let var = if v.len() > 1 { compensated_sum(v.iter().map(|x| (x - mean).powi(2))) / (n - 1.0) } else { 0.0 };
        Ok(MeanEstimate { mean, std_error: (var / n).sqrt(), count: v.len() })
    }

    /// `|mean - target| <= z * std_error`.
    pub fn agrees(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.std_error
    }
}

/// Seed of replication `rep`: a SplitMix64 step over the pair, so streams do
/// not depend on scheduling.
pub fn replication_seed(seed: u64, rep: u64) -> u64 {
    let mut z = seed ^ rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean of `draw` over `reps` independent streams, run in parallel.
pub fn monte_carlo_mean<F>(reps: usize, seed: u64, draw: F) -> Result<MeanEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let v: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| draw(&mut ChaCha8Rng::seed_from_u64(replication_seed(seed, r))))
        .collect();
    MeanEstimate::from_values(&v)
}

/// Design, truth on the design and response law.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub design: Design,
    pub truth: Vec<f64>,
    /// Direction for the one-dimensional linear estimators.
    pub f0: Option<Vec<f64>>,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub label: String,
}

impl Scenario {
    pub fn new(design: Design, truth: Vec<f64>, noise: NoiseSpec) -> Result<Self> {
        if truth.len() != design.len() {
            return Err(Error::structural(format!("truth has {} values, design has {}", truth.len(), design.len())));
        }
        if truth.iter().any(|v| !v.is_finite()) {
            return Err(Error::structural("truth is not finite"));
        }
        noise.validate(&truth)?;
        Ok(Scenario { design, truth, f0: None, noise, seed: 0, label: "custom".into() })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    /// One data set drawn from the replication stream.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Data> {
        Data::new(self.design.clone(), self.noise.draw(&self.truth, rng))
    }

    /// `n^{-1} sum_i Var(Y_i)`.
    pub fn sigma2_squared(&self) -> f64 {
        compensated_sum(self.noise.variances(&self.truth)) / self.len() as f64
    }
}

/// `(sqrt(x) |log(x / e)|)^{-1}` on `(0, 1]`.
pub fn hetero_span_f0(x: f64) -> f64 {
    1.0 / (x.sqrt() * (x / std::f64::consts::E).ln().abs())
}

/// Points `i/n`, truth `a* f0`, Gaussian noise on the first coordinate only
/// with variance `n log^2(en)`.
pub fn scenario_hetero_span(n: usize, a_star: f64) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::contract(format!("n = {n} must be at least 2")));
    }
    let x: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let f0: Vec<f64> = x.iter().map(|&v| hetero_span_f0(v)).collect();
    let truth = f0.iter().map(|v| a_star * v).collect();
    let nf = n as f64;
    let mut sigma = vec![0.0; n];
    sigma[0] = nf.sqrt() * (std::f64::consts::E * nf).ln();
    let mut sc = Scenario::new(Design::new(x)?, truth, NoiseSpec::GaussianHetero { sigma })?;
    sc.f0 = Some(f0);
    sc.label = format!("hetero_span(n={n})");
    Ok(sc)
}

/// Exact risks in the heteroscedastic one-dimensional scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeteroSpanPrediction {
    pub n: usize,
    /// `c0 log(en) / sqrt(n)`.
    pub sign_risk: f64,
    /// The same rate written with `log n`.
    pub sign_risk_log_n: f64,
    /// `c0 sum f0 / sum f0^2`.
    pub lse_risk: f64,
    pub mean_f0: f64,
    pub mean_f0_sq: f64,
}

pub fn hetero_span_prediction(n: usize) -> Result<HeteroSpanPrediction> {
    let sc = scenario_hetero_span(n, 0.0)?;
    let f0 = sc.f0.as_deref().unwrap_or_default();
    let s1 = compensated_sum(f0.iter().copied());
    let s2 = compensated_sum(f0.iter().map(|v| v * v));
    let nf = n as f64;
    Ok(HeteroSpanPrediction {
        n,
        sign_risk: c0() * (std::f64::consts::E * nf).ln() / nf.sqrt(),
        sign_risk_log_n: c0() * nf.ln() / nf.sqrt(),
        lse_risk: c0() * s1 / s2,
        mean_f0: s1 / nf,
        mean_f0_sq: s2 / nf,
    })
}

/// Estimators the harness can run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorSpec {
    /// Sign-statistic minimiser over `{a f0}`.
    Sign,
    /// Least squares over `{a f0}`.
    Lse,
    /// Sieve minimiser over a shape class, e.g. `piecewise-monotone:2`.
    Class {
        class: String,
        #[serde(default)]
        sieve: Option<SieveConfig>,
    },
}

impl EstimatorSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sign" => Ok(EstimatorSpec::Sign),
            "lse" => Ok(EstimatorSpec::Lse),
            other => Ok(EstimatorSpec::Class { class: other.to_string(), sieve: None }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            EstimatorSpec::Sign => "sign".into(),
            EstimatorSpec::Lse => "lse".into(),
            EstimatorSpec::Class { class, .. } => class.clone(),
        }
    }

    /// Fitted values on the design.
    /// Rejects configurations that would fail on every replication.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        match self {
            EstimatorSpec::Sign | EstimatorSpec::Lse if scenario.f0.is_none() => {
                Err(Error::structural(format!("estimator '{}' needs an f0 direction in the scenario", self.name())))
            }
            EstimatorSpec::Class { class, .. } => ShapeClass::parse(class, scenario.len(), scenario.f0.as_deref()).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn fit(&self, scenario: &Scenario, data: &Data) -> Result<Vec<f64>> {
        let f0 = || scenario.f0.as_deref().ok_or_else(|| Error::structural("scenario has no f0 direction"));
        match self {
            EstimatorSpec::Sign => {
                let f0 = f0()?;
                let a = sign_coefficient(f0, &data.y)?;
                Ok(f0.iter().map(|v| a * v).collect())
            }
            EstimatorSpec::Lse => {
                let f0 = f0()?;
                let a = lse_coefficient(f0, &data.y)?;
                Ok(f0.iter().map(|v| a * v).collect())
            }
            EstimatorSpec::Class { class, sieve } => {
                let class = ShapeClass::parse(class, data.len(), scenario.f0.as_deref())?;
                let cfg = sieve.clone().unwrap_or_default();
                Ok(minimize_t(&class, data, &cfg)?.fhat)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub reps: usize,
    pub seed: u64,
    /// Record wall-clock times; off by default so outputs are reproducible.
    pub timing: bool,
}

/// One row of the per-replication output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: usize,
    pub seed: u64,
    pub estimator: String,
    pub n: usize,
    /// `None` when the estimator failed on this replication.
    pub ell_loss: Option<f64>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub estimator: String,
    pub mean: f64,
    pub std_error: f64,
    pub reps: usize,
    pub failures: usize,
    #[serde(skip)]
    pub records: Vec<RepRecord>,
}

impl RiskEstimate {
    /// `rep,seed,estimator,n,ell_loss,runtime_ms`; failed replications have an
    /// empty loss.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        write_records(&self.records, out, header)
    }
}

pub const CSV_HEADER: [&str; 6] = ["rep", "seed", "estimator", "n", "ell_loss", "runtime_ms"];

pub fn write_records<W: Write>(records: &[RepRecord], out: W, header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    if header {
        w.write_record(CSV_HEADER).map_err(io)?;
    }
    for r in records {
        let loss = r.ell_loss.map(|v| format!("{v:e}")).unwrap_or_default();
        w.write_record([
            r.rep.to_string(),
            r.seed.to_string(),
            r.estimator.clone(),
            r.n.to_string(),
            loss,
            format!("{}", r.runtime_ms),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Largest tolerated fraction of failed replications.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Average `ell(f*, fhat)` over `reps` simulated data sets.
pub fn monte_carlo_risk(estimator: &EstimatorSpec, scenario: &Scenario, cfg: &MonteCarloConfig) -> Result<RiskEstimate> {
    estimator.check(scenario)?;
    let name = estimator.name();
    monte_carlo_risk_with(&name, &|data| estimator.fit(scenario, data), scenario, cfg)
}

/// As [`monte_carlo_risk`] for an arbitrary fitting routine.
pub fn monte_carlo_risk_with(
    name: &str,
    fit: &(dyn Fn(&Data) -> Result<Vec<f64>> + Sync),
    scenario: &Scenario,
    cfg: &MonteCarloConfig,
) -> Result<RiskEstimate> {
    if cfg.reps == 0 {
        return Err(Error::contract("need at least one replication"));
    }
    let n = scenario.len();
    let records: Vec<RepRecord> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = replication_seed(cfg.seed, rep as u64);
            let start = cfg.timing.then(Instant::now);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let loss = scenario.draw(&mut rng).and_then(|d| fit(&d)).and_then(|fhat| {
                if fhat.len() != n || fhat.iter().any(|v| !v.is_finite()) {
                    return Err(Error::structural("estimator returned an invalid fit"));
                }
                Ok(ell(&scenario.truth, &fhat))
            });
            RepRecord {
                rep,
                seed,
                estimator: name.to_string(),
                n,
                ell_loss: loss.ok(),
                runtime_ms: start.map(|s| s.elapsed().as_secs_f64() * 1e3).unwrap_or(0.0),
            }
        })
        .collect();
    let losses: Vec<f64> = records.iter().filter_map(|r| r.ell_loss).collect();
    let failures = records.len() - losses.len();
    if failures as f64 > MAX_FAILURE_RATE * cfg.reps as f64 {
        return Err(Error::contract(format!("{failures} of {} replications failed", cfg.reps)));
    }
    let est = MeanEstimate::from_values(&losses)?;
    Ok(RiskEstimate { estimator: name.to_string(), mean: est.mean, std_error: est.std_error, reps: cfg.reps, failures, records })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountFamily {
    Bernoulli,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma2Row {
    pub n: usize,
    pub sigma2_squared: f64,
    pub limit: f64,
    pub gap: f64,
}

/// `sigma_2^2` on midpoints `(i - 1/2)/n` against its integral limit.
pub fn sigma2_convergence_check(family: CountFamily, fstar: &dyn Curve, ns: &[usize]) -> Result<Vec<Sigma2Row>> {
    let var = |m: f64| -> Result<f64> {
        match family {
            CountFamily::Bernoulli if (0.0..=1.0).contains(&m) => Ok(m * (1.0 - m)),
            CountFamily::Poisson if m > 0.0 && m.is_finite() => Ok(m),
            _ => Err(Error::contract(format!("mean {m} invalid for {family:?}"))),
        }
    };
    let bad = std::cell::Cell::new(None);
    let limit = integrate(
        &|x| {
            let m = fstar.value(x);
            var(m).unwrap_or_else(|_| {
                bad.set(Some(m));
                0.0
            })
        },
        0.0,
        1.0,
        1e-12,
    );
    if let Some(m) = bad.get() {
        var(m)?;
    }
    ns.iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::contract("n must be positive"));
            }
            let v = (1..=n)
                .map(|i| var(fstar.value((i as f64 - 0.5) / n as f64)))
                .collect::<Result<Vec<_>>>()?;
            let s = compensated_sum(v) / n as f64;
            Ok(Sigma2Row { n, sigma2_squared: s, limit, gap: (s - limit).abs() })
        })
        .collect()
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    HeteroSpan {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default = "one")]
        a_star: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Explicit {
        x: Vec<f64>,
        #[serde(default)]
        truth: Option<Vec<f64>>,
        /// Curve name evaluated on `x` when `truth` is absent.
        #[serde(default)]
        truth_curve: Option<String>,
        #[serde(default)]
        f0: Option<Vec<f64>>,
        noise: NoiseSpec,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn one() -> f64 {
    1.0
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("scenario: {e}")))
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ScenarioSpec::HeteroSpan { seed, .. } | ScenarioSpec::Explicit { seed, .. } => *seed,
        }
    }

    /// Build the scenario; `n_override` replaces the size of generated designs.
    pub fn build(&self, n_override: Option<usize>) -> Result<Scenario> {
        let mut sc = match self {
            ScenarioSpec::HeteroSpan { n, a_star, .. } => {
                let n = n_override.or(*n).ok_or_else(|| Error::structural("hetero_span scenario needs n"))?;
                scenario_hetero_span(n, *a_star)?
            }
            ScenarioSpec::Explicit { x, truth, truth_curve, f0, noise, .. } => {
                if n_override.is_some_and(|n| n != x.len()) {
                    return Err(Error::contract("explicit scenarios fix n through x"));
                }
                let truth = match (truth, truth_curve) {
                    (Some(t), None) => t.clone(),
                    (None, Some(c)) => {
                        let c = TestCurve::parse(c)?;
                        x.iter().map(|&v| c.value(v)).collect()
                    }
                    _ => return Err(Error::structural("give exactly one of truth and truth_curve")),
                };
                let mut sc = Scenario::new(Design::new(x.clone())?, truth, noise.clone())?;
                if let Some(f0) = f0 {
                    if f0.len() != x.len() || f0.iter().any(|v| !v.is_finite()) {
                        return Err(Error::structural("f0 must be finite with one value per point"));
                    }
                    sc.f0 = Some(f0.clone());
                }
                sc
            }
        };
        sc.seed = self.seed().unwrap_or(0);
        Ok(sc)
    }
}

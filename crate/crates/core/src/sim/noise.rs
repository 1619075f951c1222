use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Bernoulli, Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MomentProfile, NoiseLaw};

/// Law of a standardised error before scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum BaseLaw {
    Gaussian,
    QBeta { beta: f64 },
}

/// Response distribution around the truth, one entry per design point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// `Y_i = f_i + tau_i xi_i` with `xi_i` i.i.d. from `base`.
    ScaledIid { tau: Vec<f64>, base: BaseLaw },
    /// `Y_i = f_i + scale xi_i`, `xi_i` with density `q_beta(|x|)`.
    HeavyTailQbeta { beta: f64, scale: f64 },
    /// `Y_i ~ Bernoulli(f_i)`.
    Bernoulli,
    /// `Y_i ~ Poisson(f_i)`.
    Poisson,
    /// `Y_i = f_i + sigma_i Z_i`.
    GaussianHetero { sigma: Vec<f64> },
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::contract(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

fn check_scales(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::structural(format!("{what} has {} entries, design has {n}", v.len())));
    }
    if let Some(s) = v.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::contract(format!("{what} entry {s} must be finite and nonnegative")));
    }
    Ok(())
}

impl NoiseSpec {
    pub fn validate(&self, truth: &[f64]) -> Result<()> {
        let n = truth.len();
        match self {
            NoiseSpec::ScaledIid { tau, base } => {
                if let BaseLaw::QBeta { beta } = base {
                    check_beta(*beta)?;
                }
                check_scales(tau, n, "tau")
            }
            NoiseSpec::HeavyTailQbeta { beta, scale } => {
                check_beta(*beta)?;
                check_scales(&[*scale], 1, "scale")
            }
            NoiseSpec::Bernoulli => match truth.iter().find(|m| !(0.0..=1.0).contains(*m)) {
                Some(m) => Err(Error::contract(format!("Bernoulli mean {m} outside [0, 1]"))),
                None => Ok(()),
            },
            NoiseSpec::Poisson => match truth.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
                Some(m) => Err(Error::contract(format!("Poisson mean {m} must be positive"))),
                None => Ok(()),
            },
            NoiseSpec::GaussianHetero { sigma } => check_scales(sigma, n, "sigma"),
        }
    }

    /// Responses for one replication. Coordinates with zero scale consume no
    /// randomness.
    pub fn draw(&self, truth: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            NoiseSpec::ScaledIid { tau, base } => truth
                .iter()
                .zip(tau)
                .map(|(f, &t)| if t == 0.0 { *f } else { f + t * base_draw(base, rng) })
                .collect(),
            NoiseSpec::HeavyTailQbeta { beta, scale } => {
                truth.iter().map(|f| f + scale * qbeta_draw(*beta, rng)).collect()
            }
            NoiseSpec::Bernoulli => truth
                .iter()
                .map(|&m| Bernoulli::new(m).map(|b| b.sample(rng) as u8 as f64).unwrap_or(f64::NAN))
                .collect(),
            NoiseSpec::Poisson => truth
                .iter()
                .map(|&m| Poisson::new(m).map(|p| p.sample(rng)).unwrap_or(f64::NAN))
                .collect(),
            NoiseSpec::GaussianHetero { sigma } => truth
                .iter()
                .zip(sigma)
                .map(|(f, &s)| if s == 0.0 { *f } else { f + s * rng.sample::<f64, _>(StandardNormal) })
                .collect(),
        }
    }

    /// Per-coordinate laws of `Y_i - f_i`, for moment computations.
    pub fn moment_profile(&self, truth: &[f64]) -> MomentProfile {
        let laws = match self {
            NoiseSpec::ScaledIid { tau, base } => tau
                .iter()
                .map(|&t| match base {
                    BaseLaw::Gaussian => NoiseLaw::Gaussian { sd: t },
                    BaseLaw::QBeta { beta } => NoiseLaw::QBeta { beta: *beta, scale: t },
                })
                .collect(),
            NoiseSpec::HeavyTailQbeta { beta, scale } => {
                vec![NoiseLaw::QBeta { beta: *beta, scale: *scale }; truth.len()]
            }
            NoiseSpec::Bernoulli => truth.iter().map(|&p| NoiseLaw::Bernoulli { p }).collect(),
            NoiseSpec::Poisson => truth.iter().map(|&mean| NoiseLaw::Poisson { mean }).collect(),
            NoiseSpec::GaussianHetero { sigma } => sigma.iter().map(|&sd| NoiseLaw::Gaussian { sd }).collect(),
        };
        MomentProfile::new(laws)
    }

    /// `Var(Y_i)` per coordinate; infinite for heavy tails with `E xi^2 = inf`.
    pub fn variances(&self, truth: &[f64]) -> Vec<f64> {
        match self {
            NoiseSpec::Bernoulli => truth.iter().map(|p| p * (1.0 - p)).collect(),
            NoiseSpec::Poisson => truth.to_vec(),
            _ => self.moment_profile(truth).laws.iter().map(|l| l.abs_moment(2.0)).collect(),
        }
    }
}

fn base_draw(base: &BaseLaw, rng: &mut ChaCha8Rng) -> f64 {
    match base {
        BaseLaw::Gaussian => rng.sample(StandardNormal),
        BaseLaw::QBeta { beta } => qbeta_draw(*beta, rng),
    }
}

/// `|xi| = exp(T/2)` with `T ~ Gamma(beta, 1)`, uniform sign.
pub(crate) fn qbeta_draw(beta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let t: f64 = Gamma::new(beta, 1.0).expect("beta checked positive").sample(rng);
    let mag = (0.5 * t).exp();
    if rng.gen::<bool>() {
        mag
    } else {
        -mag
    }
}

/// `count` draws from the symmetric heavy-tailed law with parameter `beta`.
pub fn sample_qbeta(beta: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| qbeta_draw(beta, &mut rng)).collect())
}

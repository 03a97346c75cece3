//! The two learnable parameter models and their flat `theta` layouts.

use rand::Rng;
use rand_distr::StandardNormal;

use super::squash::{initial_raw_means, squash, squash_all, squash_slope};
use crate::augment::{SensorParams, PARAM_COUNT};
use crate::profile::Distribution;
use crate::rng::stream;

/// Length of the generator's noise input.
pub const NOISE_DIM: usize = 200;
/// Width of the generator's hidden layer.
pub const HIDDEN_DIM: usize = 64;

/// Initial raw standard deviation in distribution mode. Through the squash
/// slope at the center this is 10% of each parameter's range.
pub const INITIAL_RAW_SIGMA: f64 = 0.2;

/// Step multiplier for the log-sigma entries in distribution mode.
pub const LOG_SIGMA_STEP_SCALE: f64 = 10.0;

/// Monte Carlo draws used to summarize a generator as per-parameter moments.
pub const GENERATOR_SUMMARY_DRAWS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LearnMode {
    /// Independent clamped Gaussians: 17 raw means and 17 raw log-sigmas.
    #[default]
    Distribution,
    /// Two-layer network `squash(W₂·tanh(W₁·η + b₁) + b₂)` with
    /// `η ~ U[-1, 1]^200`.
    Generator,
}

impl LearnMode {
    pub fn name(self) -> &'static str {
        match self {
            LearnMode::Distribution => "distribution",
            LearnMode::Generator => "generator",
        }
    }
}

impl std::str::FromStr for LearnMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "distribution" => Ok(LearnMode::Distribution),
            "generator" => Ok(LearnMode::Generator),
            _ => Err(format!("unknown mode '{s}' (expected distribution or generator)")),
        }
    }
}

// Generator layout: W1 [HIDDEN][NOISE], b1 [HIDDEN], W2 [PARAM][HIDDEN], b2 [PARAM].
const W1: usize = 0;
const B1: usize = W1 + HIDDEN_DIM * NOISE_DIM;
const W2: usize = B1 + HIDDEN_DIM;
const B2: usize = W2 + PARAM_COUNT * HIDDEN_DIM;
const GENERATOR_LEN: usize = B2 + PARAM_COUNT;

/// Box that keeps `theta` finite and the squash away from saturation.
const RAW_MEAN_LIMIT: f64 = 8.0;
const LOG_SIGMA_RANGE: (f64, f64) = (-20.0, 0.5);
const WEIGHT_LIMIT: f64 = 8.0;

impl LearnMode {
    pub fn theta_len(self) -> usize {
        match self {
            LearnMode::Distribution => 2 * PARAM_COUNT,
            LearnMode::Generator => GENERATOR_LEN,
        }
    }

    /// Starting point: identity-centred means (see [`initial_raw_means`]).
    /// Generator weights are drawn from a stream derived from `seed`.
    pub fn initial_theta(self, seed: u64) -> Vec<f64> {
        let means = initial_raw_means();
        match self {
            LearnMode::Distribution => {
                let mut t = means.to_vec();
                t.extend(std::iter::repeat_n(INITIAL_RAW_SIGMA.ln(), PARAM_COUNT));
                t
            }
            LearnMode::Generator => {
                let mut rng = stream(crate::rng::mix_seed(&[seed, 0x6e17]));
                let mut t = vec![0.0; GENERATOR_LEN];
                let s1 = 1.0 / (NOISE_DIM as f64).sqrt();
                for w in &mut t[W1..B1] {
                    *w = s1 * rng.sample::<f64, _>(StandardNormal);
                }
                for w in &mut t[W2..B2] {
                    *w = 0.05 * rng.sample::<f64, _>(StandardNormal);
                }
                t[B2..].copy_from_slice(&means);
                t
            }
        }
    }

    /// Per-entry multiplier applied to the SPSA step.
    pub fn step_scale(self, index: usize) -> f64 {
        match self {
            LearnMode::Distribution if index >= PARAM_COUNT => LOG_SIGMA_STEP_SCALE,
            _ => 1.0,
        }
    }

    /// Projects `theta` back into its box.
    pub fn clip(self, theta: &mut [f64]) {
        match self {
            LearnMode::Distribution => {
                for m in &mut theta[..PARAM_COUNT] {
                    *m = m.clamp(-RAW_MEAN_LIMIT, RAW_MEAN_LIMIT);
                }
                for s in &mut theta[PARAM_COUNT..] {
                    *s = s.clamp(LOG_SIGMA_RANGE.0, LOG_SIGMA_RANGE.1);
                }
            }
            LearnMode::Generator => {
                for w in theta.iter_mut() {
                    *w = w.clamp(-WEIGHT_LIMIT, WEIGHT_LIMIT);
                }
            }
        }
    }

    /// One parameter draw. Always satisfies the [`SensorParams`] invariants.
    pub fn sample<R: Rng + ?Sized>(self, theta: &[f64], rng: &mut R) -> SensorParams {
        SensorParams::from_array(squash_all(&self.sample_raw(theta, rng)))
    }

    fn sample_raw<R: Rng + ?Sized>(self, theta: &[f64], rng: &mut R) -> [f64; PARAM_COUNT] {
        match self {
            LearnMode::Distribution => std::array::from_fn(|i| {
                let z: f64 = rng.sample(StandardNormal);
                theta[i] + theta[PARAM_COUNT + i].exp() * z
            }),
            LearnMode::Generator => {
                let eta: Vec<f64> = (0..NOISE_DIM).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let hidden: Vec<f64> = (0..HIDDEN_DIM)
                    .map(|h| {
                        let row = &theta[W1 + h * NOISE_DIM..W1 + (h + 1) * NOISE_DIM];
                        let pre: f64 = row.iter().zip(&eta).map(|(w, e)| w * e).sum::<f64>() + theta[B1 + h];
                        pre.tanh()
                    })
                    .collect();
                std::array::from_fn(|i| {
                    let row = &theta[W2 + i * HIDDEN_DIM..W2 + (i + 1) * HIDDEN_DIM];
                    row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + theta[B2 + i]
                })
            }
        }
    }

    /// Per-parameter Gaussian summary in parameter units. Distribution mode
    /// uses first-order moments through the squash
    /// (`μ = squash(m)`, `σ = squash'(m)·e^s`); generator mode uses Monte Carlo
    /// moments over [`GENERATOR_SUMMARY_DRAWS`] draws seeded by `seed`.
    pub fn summarize(self, theta: &[f64], seed: u64) -> [Distribution; PARAM_COUNT] {
        match self {
            LearnMode::Distribution => std::array::from_fn(|i| Distribution::Gaussian {
                mu: squash(i, theta[i]),
                sigma: squash_slope(i, theta[i]) * theta[PARAM_COUNT + i].exp(),
            }),
            LearnMode::Generator => {
                let mut rng = stream(crate::rng::mix_seed(&[seed, 0x5a3e]));
                let mut sum = [0.0f64; PARAM_COUNT];
                let mut sq = [0.0f64; PARAM_COUNT];
                for _ in 0..GENERATOR_SUMMARY_DRAWS {
                    let p = self.sample(theta, &mut rng).to_array();
                    for i in 0..PARAM_COUNT {
                        sum[i] += p[i];
                        sq[i] += p[i] * p[i];
                    }
                }
                let n = GENERATOR_SUMMARY_DRAWS as f64;
                std::array::from_fn(|i| {
                    let mu = sum[i] / n;
                    let var = (sq[i] / n - mu * mu).max(0.0) * n / (n - 1.0);
                    Distribution::Gaussian { mu, sigma: var.sqrt() }
                })
            }
        }
    }
}

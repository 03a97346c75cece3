//! Learns sensor-parameter distributions that minimize the expected style
//! distance between augmented synthetic images and real images. Gradients
//! of the stochastic objective are estimated with SPSA.

mod model;
mod spsa;
mod squash;

pub use model::{LearnMode, GENERATOR_SUMMARY_DRAWS, HIDDEN_DIM, INITIAL_RAW_SIGMA, LOG_SIGMA_STEP_SCALE, NOISE_DIM};
pub use spsa::{Estimate, Spsa};
pub use squash::{
    initial_raw_means, squash, squash_all, squash_slope, unsquash, INITIAL_BLUR_SIGMA, LOWER_BOUND_INIT_RAW,
};

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;

use crate::augment::{apply_pipeline, SensorParams};
use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::profile::{ProfileMetadata, SensorProfile};
use crate::rng::{mix_seed, stream};
use crate::stylefeat::{gram_distance, style_grams, FeatureExtractor, GramMatrix};

/// How the real image of each training pair enters the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RealSampling {
    /// Exact expectation over a uniformly drawn real image:
    /// `E_j ‖G − G_j‖² = ‖G − Ḡ‖² + E_j ‖G_j − Ḡ‖²` per layer, with `Ḡ`
    /// the mean real Gram matrix. Same expected gradient as
    /// [`RealSampling::Uniform`], without the variance of the draw.
    #[default]
    Expected,
    /// One real image drawn uniformly with replacement per pair.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnConfig {
    pub iterations: usize,
    pub batch_size: usize,
    /// SPSA `a0`, in raw units per unit of normalized loss.
    pub step_size: f64,
    /// SPSA `c0`, in raw units.
    pub perturbation: f64,
    /// SPSA stability constant `A`; `None` uses a tenth of `iterations`.
    pub stability: Option<f64>,
    pub style_layers: usize,
    pub seed: u64,
    pub mode: LearnMode,
    pub smoothing_window: usize,
    /// Image pairs used to measure the initial loss that normalizes the
    /// objective.
    pub calibration_pairs: usize,
    pub real_sampling: RealSampling,
    /// Emit a progress log line every this many steps (0 disables).
    pub log_every: usize,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            batch_size: 1,
            step_size: 0.03,
            perturbation: 0.05,
            stability: None,
            style_layers: crate::stylefeat::DEFAULT_STYLE_LAYERS,
            seed: 0,
            mode: LearnMode::Distribution,
            smoothing_window: 100,
            calibration_pairs: 64,
            real_sampling: RealSampling::Expected,
            log_every: 100,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if self.style_layers == 0 {
            return Err(Error::invalid("style layers must be at least 1"));
        }
        if self.smoothing_window == 0 || self.calibration_pairs == 0 {
            return Err(Error::invalid("smoothing window and calibration pairs must be at least 1"));
        }
        if !(self.step_size.is_finite() && self.step_size >= 0.0) {
            return Err(Error::invalid("step size must be finite and non-negative"));
        }
        if self.stability.is_some_and(|a| !(a.is_finite() && a >= 0.0)) {
            return Err(Error::invalid("stability constant must be finite and non-negative"));
        }
        if !(self.perturbation.is_finite() && self.perturbation > 0.0) {
            return Err(Error::invalid("perturbation must be finite and positive"));
        }
        Ok(())
    }

    pub fn spsa(&self) -> Spsa {
        let stability = self.stability.unwrap_or(self.iterations as f64 / 10.0);
        Spsa::new(self.step_size, self.perturbation).with_stability(stability)
    }
}

/// One entry of the loss history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossRecord {
    pub step: usize,
    /// Mean of the two perturbed objective values, unnormalized. NaN when
    /// the step was rejected.
    pub raw: f64,
    /// Mean of the last `smoothing_window` finite raw values.
    pub smoothed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    pub mode: LearnMode,
    pub theta: Vec<f64>,
    pub step: usize,
    pub history: Vec<LossRecord>,
}

impl LearnerState {
    pub fn new(mode: LearnMode, seed: u64) -> Self {
        Self {
            mode,
            theta: mode.initial_theta(seed),
            step: 0,
            history: Vec::new(),
        }
    }

    pub fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> SensorParams {
        self.mode.sample(&self.theta, rng)
    }
}

/// Training images and the fixed feature network, with the real images'
/// Gram matrices computed once.
pub struct StyleTask<'a> {
    synthetic: &'a [Image],
    real_grams: Vec<Vec<GramMatrix>>,
    real_mean: Vec<GramMatrix>,
    /// `E_j ‖G_j − Ḡ‖²` summed over layers.
    real_spread: f64,
    fx: &'a FeatureExtractor,
    layers: usize,
    sampling: RealSampling,
}

impl<'a> StyleTask<'a> {
    pub fn new(
        synthetic: &'a [Image],
        real: &[Image],
        fx: &'a FeatureExtractor,
        layers: usize,
        sampling: RealSampling,
    ) -> Result<Self> {
        if synthetic.is_empty() {
            return Err(Error::invalid("synthetic dataset is empty"));
        }
        if real.is_empty() {
            return Err(Error::invalid("real dataset is empty"));
        }
        let s = fx.working_size();
        if let Some(img) = synthetic.iter().chain(real).find(|i| i.width() != s || i.height() != s) {
            return Err(Error::Format(format!(
                "extractor '{}' expects {s}x{s} images, got {}x{}",
                fx.id(),
                img.width(),
                img.height()
            )));
        }
        let real_grams = real
            .par_iter()
            .map(|img| style_grams(fx, img, layers))
            .collect::<Result<Vec<_>>>()?;
        let real_mean = mean_grams(&real_grams);
        let real_spread = real_grams.iter().map(|g| gram_distance(g, &real_mean)).sum::<f64>() / real_grams.len() as f64;
        Ok(Self {
            synthetic,
            real_grams,
            real_mean,
            real_spread,
            fx,
            layers,
            sampling,
        })
    }

    pub fn synthetic_len(&self) -> usize {
        self.synthetic.len()
    }

    pub fn real_len(&self) -> usize {
        self.real_grams.len()
    }

    /// Mean style distance over `pairs` of (synthetic, real) indices, each
    /// synthetic image augmented with parameters drawn from `theta`. All
    /// randomness comes from `seed`.
    pub fn objective(&self, mode: LearnMode, theta: &[f64], pairs: &[(usize, usize)], seed: u64) -> Result<f64> {
        let mut rng = stream(seed);
        let mut total = 0.0;
        for &(i, j) in pairs {
            let p = mode.sample(theta, &mut rng);
            let aug = apply_pipeline(&self.synthetic[i], &p, &mut rng)?;
            let grams = style_grams(self.fx, &aug, self.layers)?;
            total += match self.sampling {
                RealSampling::Expected => gram_distance(&grams, &self.real_mean) + self.real_spread,
                RealSampling::Uniform => gram_distance(&grams, &self.real_grams[j]),
            };
        }
        Ok(total / pairs.len() as f64)
    }

    fn draw_pairs<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<(usize, usize)> {
        (0..n)
            .map(|_| {
                (
                    rng.random_range(0..self.synthetic.len()),
                    rng.random_range(0..self.real_grams.len()),
                )
            })
            .collect()
    }
}

fn mean_grams(sets: &[Vec<GramMatrix>]) -> Vec<GramMatrix> {
    let mut mean = sets[0].clone();
    for set in &sets[1..] {
        for (m, g) in mean.iter_mut().zip(set) {
            for (a, b) in m.data.iter_mut().zip(&g.data) {
                *a += b;
            }
        }
    }
    let n = sets.len() as f64;
    for m in &mut mean {
        for a in &mut m.data {
            *a /= n;
        }
    }
    mean
}

/// Result of [`train`].
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub profile: SensorProfile,
    pub state: LearnerState,
    /// `theta` averaged over the final smoothing window; the profile is
    /// built from this.
    pub averaged_theta: Vec<f64>,
    /// Mean objective at the initial `theta` over the calibration pairs.
    pub initial_loss: f64,
}

impl TrainOutcome {
    pub fn final_smoothed_loss(&self) -> Option<f64> {
        self.state.history.last().map(|r| r.smoothed)
    }
}

const CALIBRATION_TAG: u64 = 0xca11;
const STEP_TAG: u64 = 0x57e9;

/// Runs one SPSA step on `state`, using `scale` to normalize the objective.
pub fn spsa_step(
    state: &mut LearnerState,
    task: &StyleTask<'_>,
    config: &LearnConfig,
    scale: f64,
    window: &mut VecDeque<f64>,
) -> Result<LossRecord> {
    let k = state.step;
    let mut rng = stream(mix_seed(&[config.seed, STEP_TAG, k as u64]));
    let pairs = task.draw_pairs(&mut rng, config.batch_size);
    // Both perturbed evaluations share the pairs and the augmentation seed.
    let eval_seed: u64 = rng.random();
    let mode = state.mode;
    let est = config.spsa().estimate(k, &state.theta, &mut rng, |theta| {
        Ok(task.objective(mode, theta, &pairs, eval_seed)? / scale)
    })?;
    let raw = match est {
        Some(e) => {
            let (a, _) = config.spsa().gains(k);
            for (i, (t, g)) in state.theta.iter_mut().zip(&e.gradient).enumerate() {
                *t -= a * mode.step_scale(i) * g;
            }
            mode.clip(&mut state.theta);
            0.5 * (e.f_plus + e.f_minus) * scale
        }
        None => {
            log::warn!("step {k}: rejected after non-finite objective values");
            f64::NAN
        }
    };
    if raw.is_finite() {
        window.push_back(raw);
        if window.len() > config.smoothing_window {
            window.pop_front();
        }
    }
    let smoothed = if window.is_empty() {
        f64::NAN
    } else {
        window.iter().sum::<f64>() / window.len() as f64
    };
    state.step += 1;
    let record = LossRecord { step: k, raw, smoothed };
    state.history.push(record);
    Ok(record)
}

/// Fits a parameter model to make augmented `synthetic` images match the
/// style of `real` images. Images must already be at the extractor's
/// working size.
pub fn train(
    synthetic: &[Image],
    real: &[Image],
    fx: &FeatureExtractor,
    config: &LearnConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let task = StyleTask::new(synthetic, real, fx, config.style_layers, config.real_sampling)?;
    let mut state = LearnerState::new(config.mode, config.seed);

    let mut rng = stream(mix_seed(&[config.seed, CALIBRATION_TAG]));
    let pairs = task.draw_pairs(&mut rng, config.calibration_pairs);
    let cal_seed: u64 = rng.random();
    let initial_loss = task.objective(state.mode, &state.theta, &pairs, cal_seed)?;
    let scale = if initial_loss.is_finite() && initial_loss > 1e-12 { initial_loss } else { 1.0 };
    log::info!(
        "initial loss {initial_loss:.6e} over {} pairs; {} iterations in {} mode",
        pairs.len(),
        config.iterations,
        config.mode.name()
    );

    let mut window = VecDeque::with_capacity(config.smoothing_window + 1);
    // The exported model averages theta over the final smoothing window.
    let tail_start = config.iterations.saturating_sub(config.smoothing_window);
    let mut tail_sum = vec![0.0; state.theta.len()];
    for _ in 0..config.iterations {
        let rec = spsa_step(&mut state, &task, config, scale, &mut window)?;
        if rec.step >= tail_start {
            for (s, t) in tail_sum.iter_mut().zip(&state.theta) {
                *s += t;
            }
        }
        if config.log_every > 0 && (rec.step + 1) % config.log_every == 0 {
            log::info!("step {}: raw {:.6e} smoothed {:.6e}", rec.step + 1, rec.raw, rec.smoothed);
        }
    }

    let averaged = if config.iterations == 0 {
        state.theta.clone()
    } else {
        let n = (config.iterations - tail_start) as f64;
        tail_sum.iter().map(|s| s / n).collect()
    };
    let profile = SensorProfile {
        name: "learned".into(),
        params: state.mode.summarize(&averaged, config.seed),
        metadata: ProfileMetadata {
            extractor_id: fx.id().to_string(),
            seed: Some(config.seed),
            iterations: Some(config.iterations as u64),
            notes: format!("{} mode", config.mode.name()),
            ..Default::default()
        },
        raw_overrides: BTreeMap::new(),
    };
    Ok(TrainOutcome {
        profile,
        state,
        averaged_theta: averaged,
        initial_loss,
    })
}

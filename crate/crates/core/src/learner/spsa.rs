//! Simultaneous perturbation stochastic approximation.

use rand::Rng;

use crate::error::Result;

/// Gain schedule `a_k = a0/(1+k+A)^alpha`, `c_k = c0/(1+k)^gamma`, where
/// `A` is the stability constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spsa {
    pub a0: f64,
    pub c0: f64,
    pub stability: f64,
    pub alpha: f64,
    pub gamma: f64,
}

/// Retries with a halved perturbation after a non-finite evaluation.
const MAX_RETRIES: usize = 3;

/// Outcome of one gradient estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub gradient: Vec<f64>,
    pub f_plus: f64,
    pub f_minus: f64,
    /// Perturbation actually used, after any halving.
    pub c: f64,
}

impl Spsa {
    pub fn new(a0: f64, c0: f64) -> Self {
        Self {
            a0,
            c0,
            stability: 0.0,
            alpha: 0.602,
            gamma: 0.101,
        }
    }

    pub fn with_stability(self, stability: f64) -> Self {
        Self { stability, ..self }
    }

    pub fn gains(&self, k: usize) -> (f64, f64) {
        let n = 1.0 + k as f64;
        (self.a0 / (n + self.stability).powf(self.alpha), self.c0 / n.powf(self.gamma))
    }

    /// Two-sided estimate with a Rademacher perturbation drawn from `rng`.
    /// The two evaluations run concurrently. Returns `None` when every retry
    /// produced a non-finite value.
    pub fn estimate<R, F>(&self, k: usize, theta: &[f64], rng: &mut R, f: F) -> Result<Option<Estimate>>
    where
        R: Rng + ?Sized,
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let delta: Vec<f64> = (0..theta.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let (_, mut c) = self.gains(k);
        for attempt in 0..=MAX_RETRIES {
            let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + c * d).collect();
            let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - c * d).collect();
            let (fp, fm) = rayon::join(|| f(&plus), || f(&minus));
            let (fp, fm) = (fp?, fm?);
            if fp.is_finite() && fm.is_finite() {
                let scale = (fp - fm) / (2.0 * c);
                return Ok(Some(Estimate {
                    gradient: delta.iter().map(|d| scale / d).collect(),
                    f_plus: fp,
                    f_minus: fm,
                    c,
                }));
            }
            log::warn!("SPSA step {k}: non-finite objective (attempt {}), halving perturbation", attempt + 1);
            c *= 0.5;
        }
        Ok(None)
    }

    /// Estimates the gradient and moves `theta` against it. Returns the
    /// estimate, or `None` if the step was rejected.
    pub fn step<R, F>(&self, k: usize, theta: &mut [f64], rng: &mut R, f: F) -> Result<Option<Estimate>>
    where
        R: Rng + ?Sized,
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let est = self.estimate(k, theta, rng, f)?;
        if let Some(e) = &est {
            let (a, _) = self.gains(k);
            for (t, g) in theta.iter_mut().zip(&e.gradient) {
                *t -= a * g;
            }
        }
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn gains_follow_schedule() {
        let s = Spsa::new(0.2, 0.1);
        assert_eq!(s.gains(0), (0.2, 0.1));
        let (a, c) = s.gains(9);
        assert!((a - 0.2 / 10f64.powf(0.602)).abs() < 1e-15);
        assert!((c - 0.1 / 10f64.powf(0.101)).abs() < 1e-15);
        let (a, c2) = s.with_stability(5.0).gains(9);
        assert!((a - 0.2 / 15f64.powf(0.602)).abs() < 1e-15);
        assert_eq!(c2, c);
    }

    #[test]
    fn flat_objective_leaves_theta_unchanged() {
        let s = Spsa::new(0.5, 0.1);
        let mut theta = vec![0.3, -1.0, 2.0];
        let mut rng = stream(1);
        for k in 0..20 {
            s.step(k, &mut theta, &mut rng, |_| Ok(4.0)).unwrap().unwrap();
        }
        assert_eq!(theta, vec![0.3, -1.0, 2.0]);
    }

    #[test]
    fn gradient_of_linear_function_is_exact_in_expectation_direction() {
        // For f = w·θ, each component estimate is w·Δ / Δ_i; its sign along
        // Δ_i matches the directional derivative.
        let s = Spsa::new(0.0, 0.1);
        let w = [1.0, -2.0];
        let est = s
            .estimate(0, &[0.0, 0.0], &mut stream(3), |t| Ok(w[0] * t[0] + w[1] * t[1]))
            .unwrap()
            .unwrap();
        assert!((est.f_plus + est.f_minus).abs() < 1e-12);
        let dir = (est.f_plus - est.f_minus) / (2.0 * est.c);
        assert!((dir.abs() - 1.0).abs() < 1e-12 || (dir.abs() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_evaluations_reject_step() {
        let s = Spsa::new(0.1, 0.1);
        let mut theta = vec![1.0];
        let out = s.step(0, &mut theta, &mut stream(0), |_| Ok(f64::NAN)).unwrap();
        assert!(out.is_none());
        assert_eq!(theta, vec![1.0]);
    }

    #[test]
    fn recovers_after_halving() {
        // Finite only within 0.06 of the origin, so c0 = 0.1 must be halved once.
        let s = Spsa::new(0.1, 0.1);
        let f = |t: &[f64]| Ok(if t[0].abs() < 0.06 { t[0] * t[0] } else { f64::INFINITY });
        let est = s.estimate(0, &[0.0], &mut stream(0), f).unwrap().unwrap();
        assert_eq!(est.c, 0.05);
    }

    #[test]
    fn reproducible_with_same_seed() {
        let s = Spsa::new(0.05, 0.1);
        let f = |t: &[f64]| Ok(t.iter().map(|x| (x - 1.0).powi(2)).sum::<f64>());
        let run = || {
            let mut theta = vec![0.0; 4];
            let mut rng = stream(11);
            for k in 0..2 {
                s.step(k, &mut theta, &mut rng, f).unwrap();
            }
            theta
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn one_dimensional_quadratic_converges() {
        let s = Spsa::new(0.1, 0.05);
        let mut theta = vec![0.0];
        let mut rng = stream(5);
        for k in 0..2000 {
            s.step(k, &mut theta, &mut rng, |t| Ok((t[0] - 3.0).powi(2))).unwrap();
        }
        assert!((theta[0] - 3.0).abs() < 0.1, "{}", theta[0]);
    }

    #[test]
    fn noisy_quadratic_converges() {
        use rand_distr::{Distribution, Normal};
        let s = Spsa::new(0.1, 0.2);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut theta = vec![0.0];
        let mut rng = stream(6);
        for k in 0..2000 {
            let mut eval_rng = stream(1000 + k as u64);
            let f = |t: &[f64]| Ok((t[0] - 3.0).powi(2));
            let est = s.estimate(k, &theta, &mut rng, f).unwrap().unwrap();
            let jitter = noise.sample(&mut eval_rng) - noise.sample(&mut eval_rng);
            let (a, _) = s.gains(k);
            theta[0] -= a * (est.gradient[0] + jitter / (2.0 * est.c));
        }
        assert!((theta[0] - 3.0).abs() < 0.1, "{}", theta[0]);
    }
}

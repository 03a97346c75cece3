use rand::Rng;
use rand_distr::StandardNormal;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use super::params::NoiseParams;
use crate::error::Result;
use crate::imagecore::Image;

/// Heteroscedastic Gaussian approximation of Poisson-Gaussian sensor noise.
///
/// Per channel `c`, a sample `v` becomes `v + sqrt(poiss_c·v)·z₁ + sqrt(gauss_c)·z₂`.
/// The two independent normal terms are drawn as a single normal with the
/// summed variance `poiss_c·v + gauss_c`, which has the same distribution.
///
/// The caller's generator supplies a single `u64` that seeds a fast
/// per-image generator for the normal draws; nothing is consumed when all
/// parameters are zero.
pub fn apply_noise<R: Rng + ?Sized>(img: &Image, p: &NoiseParams, rng: &mut R) -> Result<Image> {
    let Some(kernel) = NoiseKernel::new(p)? else {
        return Ok(img.clone());
    };
    let mut fast = kernel.generator(rng);
    let mut data = img.data().to_vec();
    for px in data.chunks_exact_mut(3) {
        kernel.apply(px, &mut fast);
    }
    Ok(Image::from_raw(img.width(), img.height(), data))
}

/// Per-pixel form of [`apply_noise`]; `None` when every channel is noiseless.
pub(crate) struct NoiseKernel {
    poiss: [f32; 3],
    gauss: [f32; 3],
    active: [bool; 3],
}

impl NoiseKernel {
    pub(crate) fn new(p: &NoiseParams) -> Result<Option<Self>> {
        p.validate()?;
        let poiss = p.poiss().map(|v| v as f32);
        let gauss = p.gauss().map(|v| v as f32);
        let active = [0, 1, 2].map(|c| poiss[c] > 0.0 || gauss[c] > 0.0);
        Ok(active.iter().any(|&a| a).then_some(Self { poiss, gauss, active }))
    }

    pub(crate) fn generator<R: Rng + ?Sized>(&self, rng: &mut R) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(rng.random())
    }

    #[inline]
    pub(crate) fn apply(&self, px: &mut [f32], rng: &mut Xoshiro256PlusPlus) {
        for c in 0..3 {
            if !self.active[c] {
                continue;
            }
            let v = px[c];
            let std = (self.poiss[c] * v + self.gauss[c]).sqrt();
            let z: f32 = rng.sample(StandardNormal);
            px[c] = (v + std * z).clamp(0.0, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn flat_noise(poiss: f64, gauss: f64) -> NoiseParams {
        NoiseParams {
            poiss_r: poiss,
            poiss_g: poiss,
            poiss_b: poiss,
            gauss_r: gauss,
            gauss_g: gauss,
            gauss_b: gauss,
        }
    }

    #[test]
    fn zero_params_identity() {
        let img = Image::from_fn(5, 5, |x, y| [x as f32 / 4.0, y as f32 / 4.0, 0.5]);
        let out = apply_noise(&img, &NoiseParams::zero(), &mut stream(1)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn variance_matches_model() {
        let img = Image::filled(256, 256, [0.5; 3]);
        let out = apply_noise(&img, &flat_noise(0.01, 0.001), &mut stream(7)).unwrap();
        let expected = 0.01 * 0.5 + 0.001;
        for c in 0..3 {
            let xs: Vec<f64> = out.data().iter().skip(c).step_by(3).map(|&v| f64::from(v)).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((var - expected).abs() / expected < 0.05, "channel {c}: {var}");
            // Unbiased: mean within 3 standard errors of 0.5.
            let se = (expected / n).sqrt();
            assert!((mean - 0.5).abs() < 3.0 * se, "channel {c}: mean {mean}");
        }
    }

    #[test]
    fn signal_dependent_term_scales_with_intensity() {
        let dark = Image::filled(128, 128, [0.1; 3]);
        let bright = Image::filled(128, 128, [0.8; 3]);
        let p = flat_noise(0.002, 0.0);
        let var = |img: &Image| {
            let out = apply_noise(img, &p, &mut stream(3)).unwrap();
            let m = out.mean();
            out.data().iter().map(|&v| (f64::from(v) - m).powi(2)).sum::<f64>() / out.data().len() as f64
        };
        let ratio = var(&bright) / var(&dark);
        assert!((ratio - 8.0).abs() < 0.6, "{ratio}");
    }

    #[test]
    fn deterministic_for_seed() {
        let img = Image::filled(32, 32, [0.4, 0.5, 0.6]);
        let p = flat_noise(0.03, 0.002);
        let a = apply_noise(&img, &p, &mut stream(99)).unwrap();
        let b = apply_noise(&img, &p, &mut stream(99)).unwrap();
        assert_eq!(a.data(), b.data());
        let c = apply_noise(&img, &p, &mut stream(100)).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn out_of_range_rejected() {
        let img = Image::filled(2, 2, [0.5; 3]);
        assert!(apply_noise(&img, &flat_noise(0.0, 5.41), &mut stream(0)).is_err());
        assert!(apply_noise(&img, &flat_noise(-0.01, 0.0), &mut stream(0)).is_err());
    }
}

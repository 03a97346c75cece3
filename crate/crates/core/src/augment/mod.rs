//! The five sensor-effect functions and their fixed composition
//! `color ∘ noise ∘ exposure ∘ blur ∘ chromatic aberration`.
//!
//! All effects operate on sRGB-encoded samples.

mod blur;
mod chromab;
mod color;
mod exposure;
mod noise;
mod params;

pub use blur::apply_blur;
pub use chromab::apply_chromatic_aberration;
pub use color::apply_color_shift;
pub use exposure::{apply_exposure, exposure_gain, reexpose, EXPOSURE_EPSILON};
pub use noise::apply_noise;
pub use params::{
    param_index, BlurParams, ChromAbParams, ColorParams, Effect, ExposureParams, NoiseParams, ParamSpec,
    SensorParams, PARAM_COUNT, PARAM_SPECS,
};

use rand::Rng;

use crate::error::Result;
use crate::imagecore::Image;

/// Applies chromatic aberration, blur, exposure, noise and color shift in
/// that order. Deterministic for a given random stream state.
pub fn apply_pipeline<R: Rng + ?Sized>(img: &Image, p: &SensorParams, rng: &mut R) -> Result<Image> {
    p.validate()?;
    let out = apply_chromatic_aberration(img, &p.chrom)?;
    let out = apply_blur(&out, &p.blur)?;
    // The three pointwise effects run together over cache-sized chunks;
    // per-pixel operations and random draws happen in the same order as
    // when the functions are chained.
    let (w, h) = (out.width(), out.height());
    let gain = exposure_gain(p.exposure.delta_s);
    let noise = noise::NoiseKernel::new(&p.noise)?;
    let mut noise_rng = noise.as_ref().map(|n| n.generator(rng));
    let color = color::ColorKernel::new(&p.color)?;
    let mut data = out.into_data();
    for chunk in data.chunks_mut(3 * 1024) {
        for v in chunk.iter_mut() {
            *v = reexpose(*v, gain);
        }
        if let (Some(n), Some(r)) = (&noise, &mut noise_rng) {
            for px in chunk.chunks_exact_mut(3) {
                n.apply(px, r);
            }
        }
        if let Some(c) = &color {
            c.apply(chunk);
        }
    }
    Ok(Image::from_raw(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn scene() -> Image {
        Image::from_fn(40, 30, |x, y| {
            [
                (x as f32 / 39.0) * 0.9 + 0.05,
                (y as f32 / 29.0) * 0.9 + 0.05,
                if (x / 5 + y / 5) % 2 == 0 { 0.8 } else { 0.2 },
            ]
        })
    }

    fn kitti_means() -> SensorParams {
        SensorParams::from_array([
            1.001, 1.134e-4, -0.0013, -4.67e-4, -0.0014, -0.003, -5.16e-5, 0.941, 0.0823, 3.07e-2, 2.62e-2,
            4.47e-2, 9.5e-3, 4.5e-3, 2.65e-2, -0.0131, -0.0882,
        ])
    }

    #[test]
    fn identity_params_identity_output() {
        let img = scene();
        let out = apply_pipeline(&img, &SensorParams::identity(), &mut stream(0)).unwrap();
        assert!(out.max_abs_diff(&img) <= 1e-3);
    }

    #[test]
    fn equals_manual_chaining() {
        let img = scene();
        let p = kitti_means();
        let piped = apply_pipeline(&img, &p, &mut stream(5)).unwrap();

        let mut rng = stream(5);
        let a = apply_chromatic_aberration(&img, &p.chrom).unwrap();
        let b = apply_blur(&a, &p.blur).unwrap();
        let c = apply_exposure(&b, &p.exposure).unwrap();
        let d = apply_noise(&c, &p.noise, &mut rng).unwrap();
        let e = apply_color_shift(&d, &p.color).unwrap();
        assert_eq!(piped, e);
    }

    #[test]
    fn preserves_dimensions() {
        let img = scene();
        let out = apply_pipeline(&img, &kitti_means(), &mut stream(1)).unwrap();
        assert_eq!((out.width(), out.height()), (40, 30));
        assert_eq!(out.data().len(), img.data().len());
    }

    #[test]
    fn cityscapes_means_darken_gray() {
        // Cityscapes means with the two out-of-range entries clamped to their bounds.
        let p = SensorParams::from_array([
            0.999, 0.004, 0.007, 0.005, 0.006, 0.006, -0.05, 0.718, -0.273, 1.0e-6, 1.15e-2, 6.8e-4, 1.0e-6, 0.1,
            1.0e-6, -0.002, -0.0116,
        ]);
        let gray = Image::filled(64, 64, [0.5; 3]);
        let out = apply_pipeline(&gray, &p, &mut stream(2)).unwrap();
        assert!(out.mean() < gray.mean(), "{}", out.mean());
        // Exposure alone is the dominant term: scalar oracle gives 0.4423.
        let exposed = reexpose(0.5, exposure_gain(-0.273));
        assert!((exposed - 0.4423).abs() < 1e-4);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = SensorParams::identity();
        p.chrom.g_scale = 1.5;
        assert!(apply_pipeline(&scene(), &p, &mut stream(0)).is_err());
    }
}

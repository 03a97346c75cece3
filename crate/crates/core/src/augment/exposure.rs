use super::params::{Effect, ExposureParams};
use crate::error::Result;
use crate::imagecore::Image;

/// Clamp applied to normalized intensities before inverting the exposure
/// curve (0.255 on the 8-bit scale).
pub const EXPOSURE_EPSILON: f32 = 0.001;

/// Scalar re-exposure of one normalized intensity.
///
/// With `f(S) = 1 / (1 + e^{-A S})`, `f⁻¹(v)` gives `e^{-A S} = (1 - v) / v`,
/// so `f(f⁻¹(v) + ΔS) = v / (v + (1 - v) e^{-A ΔS})` and no logarithm is needed.
#[inline]
pub fn reexpose(v: f32, gain: f32) -> f32 {
    let v = v.clamp(EXPOSURE_EPSILON, 1.0 - EXPOSURE_EPSILON);
    v / (v + (1.0 - v) * gain)
}

/// `e^{-A ΔS}` for a given shift.
pub fn exposure_gain(delta_s: f64) -> f32 {
    (-ExposureParams::CONTRAST_A * delta_s).exp() as f32
}

pub fn apply_exposure(img: &Image, p: &ExposureParams) -> Result<Image> {
    super::params::check_group(Effect::Exposure, &[p.delta_s])?;
    let gain = exposure_gain(p.delta_s);
    let data = img.data().iter().map(|&v| reexpose(v, gain)).collect();
    Ok(Image::from_raw(img.width(), img.height(), data))
}

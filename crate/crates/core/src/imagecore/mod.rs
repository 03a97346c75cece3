//! Pixel containers and the image primitives shared by every other module.

mod codec;
pub(crate) mod color;
mod kernel;
mod resize;
mod warp;

pub use codec::{decode_file, decode_image, encode_image, probe_dimensions, write_image, ImageFormat};
pub use color::{from_lab, lab_to_srgb, srgb_to_lab, to_lab};
pub use kernel::{gaussian_kernel, gaussian_kernel_1d, Kernel2D, DEFAULT_KERNEL_SIZE};
pub use resize::{resize_and_crop, resize_bilinear};
pub use warp::{warp_affine_channel, warp_affine_rgb, Affine2};

use crate::error::{Error, Result};

/// An RGB image of `f32` samples in `[0, 1]`, sRGB encoded, stored row-major
/// and channel-interleaved (`R, G, B` per pixel).
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Image {
    /// Builds an image from interleaved RGB data, rejecting wrong lengths and
    /// any sample that is non-finite or outside `[0, 1]`.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image dimensions must be nonzero, got {width}x{height}")));
        }
        if data.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "expected {} samples for a {width}x{height} image, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!("sample {i} is {} (must be finite and in [0,1])", data[i])));
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image, clamping samples into `[0, 1]`. NaN maps to 0.
    pub fn from_clamped(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self> {
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let px = rgb.map(clamp_unit);
        let data = std::iter::repeat_n(px, width * height).flatten().collect();
        Self::from_raw(width, height, data)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).map(clamp_unit));
            }
        }
        Self::from_raw(width, height, data)
    }

    /// Assembles an image from three channel planes.
    pub fn from_planes(width: usize, height: usize, planes: [&[f32]; 3]) -> Self {
        let n = width * height;
        assert!(planes.iter().all(|p| p.len() == n), "plane length mismatch");
        let mut data = Vec::with_capacity(n * 3);
        for i in 0..n {
            data.extend(planes.map(|p| clamp_unit(p[i])));
        }
        Self::from_raw(width, height, data)
    }

    /// Internal constructor for data already known to satisfy the invariants.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Interleaved RGB samples.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Copies channel `c` out as a `height × width` plane.
    pub fn plane(&self, c: usize) -> Vec<f32> {
        assert!(c < 3);
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    pub fn channel_mean(&self, c: usize) -> f64 {
        let sum: f64 = self.data.iter().skip(c).step_by(3).map(|&v| f64::from(v)).sum();
        sum / (self.width * self.height) as f64
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| f64::from(v)).sum::<f64>() / self.data.len() as f64
    }

    /// Largest absolute per-sample difference to another image of the same size.
    pub fn max_abs_diff(&self, other: &Image) -> f32 {
        assert_eq!((self.width, self.height), (other.width, other.height), "size mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }
}

/// A CIE L*a*b* image with the same layout as [`Image`]. L* is in `[0, 100]`,
/// a* and b* are unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl LabImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "expected {} samples for a {width}x{height} Lab image, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("Lab samples must be finite"));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f32) -> f32 {
    // `max` discards NaN.
    v.max(0.0).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths_and_values() {
        assert!(Image::new(2, 2, vec![0.0; 11]).is_err());
        assert!(Image::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(Image::new(1, 1, vec![0.0, f32::NAN, 0.0]).is_err());
        assert!(Image::new(0, 1, vec![]).is_err());
        assert!(Image::new(1, 1, vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn clamped_constructor_sanitizes() {
        let img = Image::from_clamped(1, 1, vec![-0.5, f32::NAN, 2.0]).unwrap();
        assert_eq!(img.data(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn planes_round_trip() {
        let img = Image::from_fn(3, 2, |x, y| [x as f32 / 3.0, y as f32 / 2.0, 0.25]);
        let planes = [img.plane(0), img.plane(1), img.plane(2)];
        let back = Image::from_planes(3, 2, [&planes[0], &planes[1], &planes[2]]);
        assert_eq!(img, back);
    }
}

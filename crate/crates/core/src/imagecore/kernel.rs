use crate::error::{Error, Result};

/// Blur window fixed by the sensor model.
pub const DEFAULT_KERNEL_SIZE: usize = 9;

/// A square, odd-sized convolution kernel stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel2D {
    size: usize,
    weights: Vec<f32>,
}

impl Kernel2D {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.weights[row * self.size + col]
    }
}

fn check(sigma: f32, size: usize) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("gaussian sigma must be positive, got {sigma}")));
    }
    if size < 3 || size.is_multiple_of(2) {
        return Err(Error::invalid(format!("kernel size must be odd and >= 3, got {size}")));
    }
    Ok(())
}

/// Normalized 1-D Gaussian taps. The 2-D kernel is their outer product.
pub fn gaussian_kernel_1d(sigma: f32, size: usize) -> Result<Vec<f32>> {
    check(sigma, size)?;
    let c = (size / 2) as f64;
    let s = f64::from(sigma);
    let raw: Vec<f64> = (0..size)
        .map(|i| (-(i as f64 - c).powi(2) / (2.0 * s * s)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.iter().map(|w| (w / total) as f32).collect())
}

pub fn gaussian_kernel(sigma: f32, size: usize) -> Result<Kernel2D> {
    check(sigma, size)?;
    let c = (size / 2) as f64;
    let s = f64::from(sigma);
    let mut raw = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let d2 = (i as f64 - c).powi(2) + (j as f64 - c).powi(2);
            raw.push((-d2 / (2.0 * s * s)).exp());
        }
    }
    let total: f64 = raw.iter().sum();
    Ok(Kernel2D {
        size,
        weights: raw.iter().map(|w| (w / total) as f32).collect(),
    })
}

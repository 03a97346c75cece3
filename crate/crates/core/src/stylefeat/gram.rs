use super::extractor::{FeatureExtractor, FeatureMap};
use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Number of conv layers entering the style loss by default.
pub const DEFAULT_STYLE_LAYERS: usize = 10;

/// Symmetric `C × C` channel correlation matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub size: usize,
    pub data: Vec<f64>,
}

impl GramMatrix {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    /// Squared Frobenius distance to another Gram matrix of the same size.
    pub fn sq_distance(&self, other: &GramMatrix) -> f64 {
        assert_eq!(self.size, other.size, "gram size mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Dot product with eight f32 lanes, flushed into f64 every block.
fn dot(a: &[f32], b: &[f32]) -> f64 {
    const BLOCK: usize = 512;
    let mut total = 0.0f64;
    for (ba, bb) in a.chunks(BLOCK).zip(b.chunks(BLOCK)) {
        let mut lanes = [0.0f32; 8];
        let ca = ba.chunks_exact(8);
        let cb = bb.chunks_exact(8);
        let (ra, rb) = (ca.remainder(), cb.remainder());
        for (x, y) in ca.zip(cb) {
            for l in 0..8 {
                lanes[l] += x[l] * y[l];
            }
        }
        let tail: f32 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
        total += lanes.iter().map(|&v| f64::from(v)).sum::<f64>() + f64::from(tail);
    }
    total
}

/// `G = F·Fᵀ / (C·H·W)` for the `C × HW` unrolling `F` of the map.
pub fn gram(f: &FeatureMap) -> GramMatrix {
    let c = f.channels;
    let norm = (c * f.height * f.width) as f64;
    let mut data = vec![0.0f64; c * c];
    for i in 0..c {
        for j in i..c {
            let v = dot(f.plane(i), f.plane(j)) / norm;
            data[i * c + j] = v;
            data[j * c + i] = v;
        }
    }
    GramMatrix { size: c, data }
}

/// Gram matrices of the first `num_layers` conv layers (fewer if the
/// extractor is shallower).
pub fn style_grams(fx: &FeatureExtractor, img: &Image, num_layers: usize) -> Result<Vec<GramMatrix>> {
    if num_layers == 0 {
        return Err(Error::invalid("style loss needs at least one layer"));
    }
    Ok(fx.extract_first(img, num_layers)?.iter().map(gram).collect())
}

/// `Σ_j ‖G_j(a) − G_j(b)‖²_F` over paired layer lists.
pub fn gram_distance(a: &[GramMatrix], b: &[GramMatrix]) -> f64 {
    assert_eq!(a.len(), b.len(), "layer count mismatch");
    a.iter().zip(b).map(|(x, y)| x.sq_distance(y)).sum()
}

pub fn style_distance(fx: &FeatureExtractor, a: &Image, b: &Image, num_layers: usize) -> Result<f64> {
    let ga = style_grams(fx, a, num_layers)?;
    let gb = style_grams(fx, b, num_layers)?;
    Ok(gram_distance(&ga, &gb))
}

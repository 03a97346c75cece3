use super::conv::{conv3x3_relu, maxpool2x2};
use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Side length of the square input the extractor expects.
pub const DEFAULT_WORKING_SIZE: usize = 224;

/// Per-channel input normalization `(v - mean) / std`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub mean: [f32; 3],
    pub std: [f32; 3],
}

impl Normalization {
    /// The usual ImageNet statistics.
    pub const IMAGENET: Normalization = Normalization {
        mean: [0.485, 0.456, 0.406],
        std: [0.229, 0.224, 0.225],
    };
}

/// A 3×3, stride 1, zero-padded convolution followed by ReLU.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub in_channels: usize,
    pub out_channels: usize,
    /// `[out][in][ky][kx]`
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Conv(ConvLayer),
    MaxPool,
}

/// An immutable, validated feature network.
#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    id: String,
    norm: Normalization,
    layers: Vec<Layer>,
    working_size: usize,
}

/// A `channels × height × width` activation volume.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::invalid("feature map length does not match its shape"));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }
}

impl FeatureExtractor {
    /// Validates the channel chain. `id` identifies the weights in profile metadata.
    pub fn new(id: impl Into<String>, norm: Normalization, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Format("empty extractor".into()));
        }
        if norm.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) || norm.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Format("normalization must be finite with positive std".into()));
        }
        let mut channels = 3;
        for (i, layer) in layers.iter().enumerate() {
            let n = i + 1;
            if let Layer::Conv(c) = layer {
                if c.in_channels != channels {
                    return Err(Error::Format(format!(
                        "layer {n}: in_channels {} does not match incoming {channels} channels",
                        c.in_channels
                    )));
                }
                if c.out_channels == 0 {
                    return Err(Error::Format(format!("layer {n}: zero output channels")));
                }
                if c.weights.len() != c.out_channels * c.in_channels * 9 || c.bias.len() != c.out_channels {
                    return Err(Error::Format(format!("layer {n}: weight shape mismatch")));
                }
                if c.weights.iter().chain(&c.bias).any(|v| !v.is_finite()) {
                    return Err(Error::Format(format!("layer {n}: non-finite weight")));
                }
                channels = c.out_channels;
            }
        }
        Ok(Self {
            id: id.into(),
            norm,
            layers,
            working_size: DEFAULT_WORKING_SIZE,
        })
    }

    /// Same weights, different expected input size. Mostly useful in tests.
    pub fn with_working_size(mut self, size: usize) -> Self {
        self.working_size = size;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn working_size(&self) -> usize {
        self.working_size
    }

    pub fn conv_count(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Conv(_))).count()
    }

    pub fn pool_count(&self) -> usize {
        self.layers.len() - self.conv_count()
    }

    /// Outputs of every conv+ReLU layer, in order.
    pub fn extract_features(&self, img: &Image) -> Result<Vec<FeatureMap>> {
        self.extract_first(img, usize::MAX)
    }

    /// Outputs of the first `max_convs` conv+ReLU layers; later layers are not evaluated.
    pub fn extract_first(&self, img: &Image, max_convs: usize) -> Result<Vec<FeatureMap>> {
        let s = self.working_size;
        if img.width() != s || img.height() != s {
            return Err(Error::invalid(format!(
                "extractor expects {s}x{s} input, got {}x{}",
                img.width(),
                img.height()
            )));
        }
        let (mut h, mut w) = (s, s);
        let mut channels = 3;
        let mut x = self.normalize(img);
        let mut maps = Vec::new();
        for layer in &self.layers {
            if maps.len() >= max_convs {
                break;
            }
            match layer {
                Layer::Conv(c) => {
                    x = conv3x3_relu(&x, h, w, c);
                    channels = c.out_channels;
                    maps.push(FeatureMap {
                        channels,
                        height: h,
                        width: w,
                        data: x.clone(),
                    });
                }
                Layer::MaxPool => {
                    x = maxpool2x2(&x, channels, h, w);
                    h /= 2;
                    w /= 2;
                }
            }
        }
        Ok(maps)
    }

    fn normalize(&self, img: &Image) -> Vec<f32> {
        let n = img.width() * img.height();
        let mut planar = vec![0.0f32; 3 * n];
        let Normalization { mean, std } = self.norm;
        let inv = std.map(|s| 1.0 / s);
        for (i, px) in img.data().chunks_exact(3).enumerate() {
            for c in 0..3 {
                planar[c * n + i] = (px[c] - mean[c]) * inv[c];
            }
        }
        planar
    }
}

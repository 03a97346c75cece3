//! STYLEFX1 weight files (all little-endian):
//!
//! ```text
//! "STYLEFX1"                      8 bytes
//! version                         u32 = 1
//! mean R,G,B  std R,G,B           6 × f32
//! layer_count                     u32
//! per layer:
//!   kind                          u8 (0 = conv3x3+ReLU, 1 = maxpool 2×2)
//!   conv only: in_ch, out_ch      2 × u32
//!              weights            f32 × out·in·9, [out][in][ky][kx]
//!              bias               f32 × out
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use super::extractor::{ConvLayer, FeatureExtractor, Layer, Normalization};
use crate::error::{Error, Result};

pub const STYLEFX1_MAGIC: &[u8; 8] = b"STYLEFX1";
pub const STYLEFX1_VERSION: u32 = 1;

const KIND_CONV: u8 = 0;
const KIND_POOL: u8 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &dyn Fn() -> String) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format(format!("unexpected EOF in {}", what())));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &dyn Fn() -> String) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &dyn Fn() -> String) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32s(&mut self, n: usize, what: &dyn Fn() -> String) -> Result<Vec<f32>> {
        let bytes = n
            .checked_mul(4)
            .ok_or_else(|| Error::Format(format!("size overflow in {}", what())))?;
        let b = self.take(bytes, what)?;
        Ok(b.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
    }
}

/// Parses a STYLEFX1 buffer. `id` is stored as the extractor identifier.
pub fn read_extractor(bytes: &[u8], id: impl Into<String>) -> Result<FeatureExtractor> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let header = || "header".to_string();
    if r.take(8, &header).ok() != Some(&STYLEFX1_MAGIC[..]) {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32(&header)?;
    if version != STYLEFX1_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let norm = r.f32s(6, &header)?;
    let norm = Normalization {
        mean: [norm[0], norm[1], norm[2]],
        std: [norm[3], norm[4], norm[5]],
    };
    let count = r.u32(&header)? as usize;
    if count == 0 {
        return Err(Error::Format("empty extractor".into()));
    }
    let mut layers = Vec::new();
    for n in 1..=count {
        let at = || format!("layer {n}");
        match r.u8(&at)? {
            KIND_CONV => {
                let in_channels = r.u32(&at)? as usize;
                let out_channels = r.u32(&at)? as usize;
                let n_weights = out_channels
                    .checked_mul(in_channels)
                    .and_then(|v| v.checked_mul(9))
                    .ok_or_else(|| Error::Format(format!("layer {n}: channel counts overflow")))?;
                let weights = r.f32s(n_weights, &at)?;
                let bias = r.f32s(out_channels, &at)?;
                layers.push(Layer::Conv(ConvLayer {
                    in_channels,
                    out_channels,
                    weights,
                    bias,
                }));
            }
            KIND_POOL => layers.push(Layer::MaxPool),
            other => return Err(Error::Format(format!("layer {n}: unknown layer kind {other}"))),
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes after layer {count}", bytes.len() - r.pos)));
    }
    FeatureExtractor::new(id, norm, layers)
}

/// Loads a weight file; the extractor id is the file's SHA-256 prefix.
pub fn load_extractor(path: &Path) -> Result<FeatureExtractor> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    let id = format!("sha256:{}", &hex::encode(digest)[..16]);
    read_extractor(&bytes, id).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_extractor(fx: &FeatureExtractor) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(STYLEFX1_MAGIC);
    out.extend_from_slice(&STYLEFX1_VERSION.to_le_bytes());
    let norm = fx.normalization();
    for v in norm.mean.iter().chain(&norm.std) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(fx.layers().len() as u32).to_le_bytes());
    for layer in fx.layers() {
        match layer {
            Layer::Conv(c) => {
                out.push(KIND_CONV);
                out.extend_from_slice(&(c.in_channels as u32).to_le_bytes());
                out.extend_from_slice(&(c.out_channels as u32).to_le_bytes());
                for v in c.weights.iter().chain(&c.bias) {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Layer::MaxPool => out.push(KIND_POOL),
        }
    }
    out
}

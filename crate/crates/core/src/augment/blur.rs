use super::params::BlurParams;
use crate::error::{Error, Result};
use crate::imagecore::{gaussian_kernel_1d, Image};

/// Separable Gaussian blur with a fixed 9-tap window and replicated borders.
pub fn apply_blur(img: &Image, p: &BlurParams) -> Result<Image> {
    if !(p.sigma > 0.0 && p.sigma <= 3.0) {
        return Err(Error::invalid(format!("blur.sigma = {} outside (0, 3]", p.sigma)));
    }
    let taps = gaussian_kernel_1d(p.sigma as f32, BlurParams::WINDOW)?;
    Ok(convolve_separable(img, &taps))
}

pub(crate) fn convolve_separable(img: &Image, taps: &[f32]) -> Image {
    #[cfg(target_arch = "x86_64")]
    if crate::cpu::has_avx2() {
        // SAFETY: AVX2 support was verified at runtime.
        return unsafe { convolve_avx2(img, taps) };
    }
    convolve_body(img, taps)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
fn convolve_avx2(img: &Image, taps: &[f32]) -> Image {
    convolve_body(img, taps)
}

#[inline(always)]
fn convolve_body(img: &Image, taps: &[f32]) -> Image {
    let (w, h) = (img.width(), img.height());
    let radius = taps.len() / 2;
    let stride = w * 3;
    let src = img.data();

    // Horizontally filtered rows live in a ring of `taps.len()` slots keyed by
    // source row, so each source row is filtered once and stays in cache.
    let slots = taps.len();
    let mut ring = vec![0.0f32; slots * stride];
    let mut slot_row = vec![usize::MAX; slots];
    let mut padded = vec![0.0f32; (w + 2 * radius) * 3];
    let mut dst = vec![0.0f32; src.len()];

    for (y, out) in dst.chunks_exact_mut(stride).enumerate() {
        for (k, &wk) in taps.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let sy = (y + k).saturating_sub(radius).min(h - 1);
            let slot = sy % slots;
            let filtered = &mut ring[slot * stride..(slot + 1) * stride];
            if slot_row[slot] != sy {
                filter_row(&src[sy * stride..(sy + 1) * stride], taps, &mut padded, filtered);
                slot_row[slot] = sy;
            }
            for (o, &s) in out.iter_mut().zip(filtered.iter()) {
                *o += wk * s;
            }
        }
        for o in out.iter_mut() {
            *o = o.clamp(0.0, 1.0);
        }
    }
    Image::from_raw(w, h, dst)
}

/// Horizontal pass over one interleaved row, edges replicated.
#[inline(always)]
fn filter_row(row: &[f32], taps: &[f32], padded: &mut [f32], out: &mut [f32]) {
    let radius = taps.len() / 2;
    let stride = row.len();
    let w = stride / 3;
    for i in 0..radius {
        padded[i * 3..i * 3 + 3].copy_from_slice(&row[..3]);
        let j = radius + w + i;
        padded[j * 3..j * 3 + 3].copy_from_slice(&row[stride - 3..]);
    }
    padded[radius * 3..(radius + w) * 3].copy_from_slice(row);
    out.fill(0.0);
    for (k, &wk) in taps.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        let shifted = &padded[k * 3..k * 3 + stride];
        for (o, &s) in out.iter_mut().zip(shifted) {
            *o += wk * s;
        }
    }
}

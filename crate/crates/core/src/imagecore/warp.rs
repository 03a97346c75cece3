//! Affine warps of single channels in normalized image coordinates.
//!
//! Normalized coordinates put `(0, 0)` at the image center; `x` spans
//! `[-0.5, 0.5]` across the width and `y` the same across the height, with
//! pixel `i` centered at `(i + 0.5) / n - 0.5`.

use super::Image;
use crate::error::{Error, Result};

/// `[x', y'] = [[a, b], [c, d]] · [x, y] + [tx, ty]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine2 {
    pub m: [[f64; 3]; 2],
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };

    pub fn translation(tx: f64, ty: f64) -> Self {
        Affine2 {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty]],
        }
    }

    /// Uniform scale about the image center.
    pub fn scale(s: f64) -> Self {
        Affine2 {
            m: [[s, 0.0, 0.0], [0.0, s, 0.0]],
        }
    }

    /// `second ∘ first`: applies `first`, then `second`.
    pub fn then(first: Affine2, second: Affine2) -> Self {
        let [p, q] = second.m;
        let [r, s] = first.m;
        Affine2 {
            m: [
                [
                    p[0] * r[0] + p[1] * s[0],
                    p[0] * r[1] + p[1] * s[1],
                    p[0] * r[2] + p[1] * s[2] + p[2],
                ],
                [
                    q[0] * r[0] + q[1] * s[0],
                    q[0] * r[1] + q[1] * s[1],
                    q[0] * r[2] + q[1] * s[2] + q[2],
                ],
            ],
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let [r0, r1] = self.m;
        (r0[0] * x + r0[1] * y + r0[2], r1[0] * x + r1[1] * y + r1[2])
    }

    pub fn inverse(&self) -> Result<Affine2> {
        let [[a, b, tx], [c, d, ty]] = self.m;
        let det = a * d - b * c;
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(Error::invalid(format!("affine transform is singular (det = {det})")));
        }
        let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
        Ok(Affine2 {
            m: [
                [ia, ib, -(ia * tx + ib * ty)],
                [ic, id, -(ic * tx + id * ty)],
            ],
        })
    }

    fn is_axis_aligned(&self) -> bool {
        self.m[0][1] == 0.0 && self.m[1][0] == 0.0
    }
}

/// Source tap for one output coordinate along an axis: two clamped indices
/// and the weight of the second.
#[derive(Clone, Copy)]
struct Tap {
    i0: usize,
    i1: usize,
    frac: f32,
}

#[inline]
fn tap(pos: f64, n: usize) -> Tap {
    let max = (n - 1) as f64;
    let p = pos.clamp(0.0, max);
    let i0 = p.floor();
    let frac = (p - i0) as f32;
    let i0 = i0 as usize;
    Tap {
        i0,
        i1: (i0 + 1).min(n - 1),
        frac,
    }
}

#[inline]
fn to_pixel(norm: f64, n: usize) -> f64 {
    (norm + 0.5) * n as f64 - 0.5
}

#[inline]
fn to_norm(pix: usize, n: usize) -> f64 {
    (pix as f64 + 0.5) / n as f64 - 0.5
}

#[inline]
fn bilerp(src: &[f32], width: usize, tx: Tap, ty: Tap) -> f32 {
    let r0 = ty.i0 * width;
    let r1 = ty.i1 * width;
    let top = src[r0 + tx.i0] * (1.0 - tx.frac) + src[r0 + tx.i1] * tx.frac;
    let bot = src[r1 + tx.i0] * (1.0 - tx.frac) + src[r1 + tx.i1] * tx.frac;
    top * (1.0 - ty.frac) + bot * ty.frac
}

/// Resamples a `height × width` channel so that
/// `output(p) = input(transform⁻¹(p))`, bilinear with replicated borders.
pub fn warp_affine_channel(
    channel: &[f32],
    width: usize,
    height: usize,
    transform: &Affine2,
) -> Result<Vec<f32>> {
    if channel.len() != width * height || width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "channel has {} samples, expected {width}x{height}",
            channel.len()
        )));
    }
    let inv = transform.inverse()?;
    if *transform == Affine2::IDENTITY {
        return Ok(channel.to_vec());
    }

    let mut out = Vec::with_capacity(channel.len());
    if inv.is_axis_aligned() {
        // Source x depends only on output x, source y only on output y.
        let [[sx, _, ox], [_, sy, oy]] = inv.m;
        let cols: Vec<Tap> = (0..width)
            .map(|x| tap(to_pixel(sx * to_norm(x, width) + ox, width), width))
            .collect();
        for y in 0..height {
            let ty = tap(to_pixel(sy * to_norm(y, height) + oy, height), height);
            out.extend(cols.iter().map(|&tx| bilerp(channel, width, tx, ty)));
        }
    } else {
        for y in 0..height {
            let ny = to_norm(y, height);
            for x in 0..width {
                let (sx, sy) = inv.apply(to_norm(x, width), ny);
                let tx = tap(to_pixel(sx, width), width);
                let ty = tap(to_pixel(sy, height), height);
                out.push(bilerp(channel, width, tx, ty));
            }
        }
    }
    Ok(out)
}

/// Warps each channel of an interleaved RGB image by its own transform.
/// Equivalent to [`warp_affine_channel`] per plane, up to rounding.
pub fn warp_affine_rgb(img: &Image, transforms: &[Affine2; 3]) -> Result<Image> {
    let (w, h) = (img.width(), img.height());
    let mut inv = [Affine2::IDENTITY; 3];
    for (i, t) in inv.iter_mut().zip(transforms) {
        *i = t.inverse()?;
    }
    if !inv.iter().all(Affine2::is_axis_aligned) {
        let planes = (0..3)
            .map(|c| warp_affine_channel(&img.plane(c), w, h, &transforms[c]))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Image::from_planes(w, h, [&planes[0], &planes[1], &planes[2]]));
    }

    let axes: Vec<(Vec<Tap>, Vec<Tap>)> = inv
        .iter()
        .map(|t| {
            let [[sx, _, ox], [_, sy, oy]] = t.m;
            let cols = (0..w).map(|x| tap(to_pixel(sx * to_norm(x, w) + ox, w), w)).collect();
            let rows = (0..h).map(|y| tap(to_pixel(sy * to_norm(y, h) + oy, h), h)).collect();
            (cols, rows)
        })
        .collect();
    let src = img.data();
    let stride = 3 * w;
    let mut out = vec![0.0f32; src.len()];
    let mut blended = vec![0.0f32; w];
    for (y, orow) in out.chunks_exact_mut(stride).enumerate() {
        for c in 0..3 {
            if transforms[c] == Affine2::IDENTITY {
                let srow = &src[y * stride..(y + 1) * stride];
                for (o, s) in orow[c..].iter_mut().step_by(3).zip(srow[c..].iter().step_by(3)) {
                    *o = *s;
                }
                continue;
            }
            let (cols, rows) = &axes[c];
            let ty = rows[y];
            let r0 = &src[ty.i0 * stride..(ty.i0 + 1) * stride];
            let r1 = &src[ty.i1 * stride..(ty.i1 + 1) * stride];
            let (wa, wb) = (1.0 - ty.frac, ty.frac);
            for (x, b) in blended.iter_mut().enumerate() {
                *b = r0[3 * x + c] * wa + r1[3 * x + c] * wb;
            }
            for (o, tx) in orow[c..].iter_mut().step_by(3).zip(cols) {
                *o = blended[tx.i0] * (1.0 - tx.frac) + blended[tx.i1] * tx.frac;
            }
        }
    }
    Ok(Image::from_raw(w, h, out))
}

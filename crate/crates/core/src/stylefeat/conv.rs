//! Direct 3×3 convolution and 2×2 max pooling on planar `C×H×W` buffers.
//!
//! Each output row accumulates `bias + Σ_in Σ_ky (w0·r[x-1] + w1·r[x] + w2·r[x+1])`
//! in a fixed order, so results do not depend on how output channels are
//! spread across threads. The row kernel is compiled twice, once for the
//! baseline target and once with AVX2 enabled; both evaluate the same
//! expression (no FMA contraction), so they produce identical bits.

use rayon::prelude::*;

use super::extractor::ConvLayer;

/// Accumulates one input channel's three rows into `acc` (zero padded).
#[inline(always)]
fn accumulate_rows(acc: &mut [f32], rows: [&[f32]; 3], w: &[f32]) {
    let n = acc.len();
    let [r0, r1, r2] = rows;
    let tap = |r: &[f32], k: usize, x: usize| -> f32 {
        let left = if x > 0 { r[x - 1] } else { 0.0 };
        let right = if x + 1 < n { r[x + 1] } else { 0.0 };
        w[k] * left + w[k + 1] * r[x] + w[k + 2] * right
    };
    if n < 3 {
        for x in 0..n {
            acc[x] += tap(r0, 0, x) + tap(r1, 3, x) + tap(r2, 6, x);
        }
        return;
    }
    acc[0] += tap(r0, 0, 0) + tap(r1, 3, 0) + tap(r2, 6, 0);
    acc[n - 1] += tap(r0, 0, n - 1) + tap(r1, 3, n - 1) + tap(r2, 6, n - 1);

    let (w0, w1, w2, w3, w4, w5, w6, w7, w8) = (w[0], w[1], w[2], w[3], w[4], w[5], w[6], w[7], w[8]);
    let mid = &mut acc[1..n - 1];
    let it = mid
        .iter_mut()
        .zip(r0.windows(3))
        .zip(r1.windows(3))
        .zip(r2.windows(3));
    for (((a, p), q), s) in it {
        *a += (w0 * p[0] + w1 * p[1] + w2 * p[2]) + (w3 * q[0] + w4 * q[1] + w5 * q[2]) + (w6 * s[0] + w7 * s[1] + w8 * s[2]);
    }
}

fn conv_plane_generic(input: &[f32], h: usize, w: usize, layer: &ConvLayer, o: usize, out: &mut [f32]) {
    conv_plane_body(input, h, w, layer, o, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
fn conv_plane_avx2(input: &[f32], h: usize, w: usize, layer: &ConvLayer, o: usize, out: &mut [f32]) {
    conv_plane_body(input, h, w, layer, o, out)
}

#[inline(always)]
fn conv_plane_body(input: &[f32], h: usize, w: usize, layer: &ConvLayer, o: usize, out: &mut [f32]) {
    let plane = h * w;
    let zeros = vec![0.0f32; w];
    let bias = layer.bias[o];
    for y in 0..h {
        let acc = &mut out[y * w..(y + 1) * w];
        acc.fill(bias);
        for i in 0..layer.in_channels {
            let src = &input[i * plane..(i + 1) * plane];
            let row = |yy: isize| -> &[f32] {
                if yy < 0 || yy >= h as isize {
                    &zeros
                } else {
                    let yy = yy as usize;
                    &src[yy * w..(yy + 1) * w]
                }
            };
            let yi = y as isize;
            let kw = &layer.weights[(o * layer.in_channels + i) * 9..][..9];
            accumulate_rows(acc, [row(yi - 1), row(yi), row(yi + 1)], kw);
        }
        for v in acc.iter_mut() {
            *v = v.max(0.0);
        }
    }
}

fn conv_plane(input: &[f32], h: usize, w: usize, layer: &ConvLayer, o: usize, out: &mut [f32]) {
    #[cfg(target_arch = "x86_64")]
    if crate::cpu::has_avx2() {
        // SAFETY: AVX2 support was verified at runtime.
        unsafe { conv_plane_avx2(input, h, w, layer, o, out) };
        return;
    }
    conv_plane_generic(input, h, w, layer, o, out)
}

/// Zero-padded 3×3 convolution followed by ReLU.
pub(crate) fn conv3x3_relu(input: &[f32], h: usize, w: usize, layer: &ConvLayer) -> Vec<f32> {
    debug_assert_eq!(input.len(), layer.in_channels * h * w);
    let mut out = vec![0.0f32; layer.out_channels * h * w];
    out.par_chunks_mut(h * w)
        .enumerate()
        .for_each(|(o, plane)| conv_plane(input, h, w, layer, o, plane));
    out
}

/// 2×2 max pooling with stride 2; odd trailing rows/columns are dropped.
pub(crate) fn maxpool2x2(input: &[f32], channels: usize, h: usize, w: usize) -> Vec<f32> {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(channels * oh * ow);
    for c in 0..channels {
        let src = &input[c * h * w..(c + 1) * h * w];
        for y in 0..oh {
            let r0 = &src[2 * y * w..];
            let r1 = &src[(2 * y + 1) * w..];
            for x in 0..ow {
                out.push(r0[2 * x].max(r0[2 * x + 1]).max(r1[2 * x]).max(r1[2 * x + 1]));
            }
        }
    }
    out
}

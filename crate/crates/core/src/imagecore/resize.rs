use super::Image;
use crate::error::{Error, Result};

/// Bilinear resize with half-pixel centers and clamped borders.
pub fn resize_bilinear(img: &Image, new_width: usize, new_height: usize) -> Result<Image> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::invalid("resize target must be nonzero"));
    }
    let (w, h) = (img.width(), img.height());
    if (w, h) == (new_width, new_height) {
        return Ok(img.clone());
    }
    let axis = |n_out: usize, n_in: usize| -> Vec<(usize, usize, f32)> {
        let scale = n_in as f64 / n_out as f64;
        (0..n_out)
            .map(|i| {
                let p = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
                let i0 = p.floor() as usize;
                (i0, (i0 + 1).min(n_in - 1), (p - i0 as f64) as f32)
            })
            .collect()
    };
    let xs = axis(new_width, w);
    let ys = axis(new_height, h);
    let src = img.data();
    let mut out = Vec::with_capacity(new_width * new_height * 3);
    for &(y0, y1, fy) in &ys {
        let r0 = &src[y0 * w * 3..(y0 + 1) * w * 3];
        let r1 = &src[y1 * w * 3..(y1 + 1) * w * 3];
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let top = r0[x0 * 3 + c] * (1.0 - fx) + r0[x1 * 3 + c] * fx;
                let bot = r1[x0 * 3 + c] * (1.0 - fx) + r1[x1 * 3 + c] * fx;
                out.push((top * (1.0 - fy) + bot * fy).clamp(0.0, 1.0));
            }
        }
    }
    Ok(Image::from_raw(new_width, new_height, out))
}

/// Dimensions after scaling so the shorter side equals `shorter_side`.
pub(crate) fn scaled_dims(width: usize, height: usize, shorter_side: usize) -> (usize, usize) {
    let other = |long: usize, short: usize| -> usize {
        ((long as f64 * shorter_side as f64 / short as f64).round() as usize).max(shorter_side)
    };
    if width <= height {
        (shorter_side, other(height, width))
    } else {
        (other(width, height), shorter_side)
    }
}

/// Resizes so that `min(width, height) == shorter_side`, then takes the
/// centered `crop × crop` window.
pub fn resize_and_crop(img: &Image, shorter_side: usize, crop: usize) -> Result<Image> {
    if crop == 0 || crop > shorter_side {
        return Err(Error::invalid(format!(
            "crop {crop} must be in 1..={shorter_side} (shorter side)"
        )));
    }
    let (rw, rh) = scaled_dims(img.width(), img.height(), shorter_side);
    let resized = resize_bilinear(img, rw, rh)?;
    let x0 = (rw - crop) / 2;
    let y0 = (rh - crop) / 2;
    let src = resized.data();
    let mut out = Vec::with_capacity(crop * crop * 3);
    for y in y0..y0 + crop {
        let row = (y * rw + x0) * 3;
        out.extend_from_slice(&src[row..row + crop * 3]);
    }
    Ok(Image::from_raw(crop, crop, out))
}

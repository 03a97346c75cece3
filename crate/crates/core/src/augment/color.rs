use super::params::{ColorParams, Effect};
use crate::error::Result;
use crate::imagecore::color::{lab_tables, LabTables};
use crate::imagecore::Image;

/// Translates a* and b* by `shift · 128` and converts back to sRGB.
pub fn apply_color_shift(img: &Image, p: &ColorParams) -> Result<Image> {
    let Some(kernel) = ColorKernel::new(p)? else {
        return Ok(img.clone());
    };
    let mut data = img.data().to_vec();
    kernel.apply(&mut data);
    Ok(Image::from_raw(img.width(), img.height(), data))
}

/// Per-pixel form of [`apply_color_shift`]; `None` for a zero shift.
pub(crate) struct ColorKernel {
    tables: &'static LabTables,
    da: f32,
    db: f32,
}

impl ColorKernel {
    pub(crate) fn new(p: &ColorParams) -> Result<Option<Self>> {
        super::params::check_group(Effect::Color, &[p.shift_a, p.shift_b])?;
        if p.shift_a == 0.0 && p.shift_b == 0.0 {
            return Ok(None);
        }
        Ok(Some(Self {
            tables: lab_tables(),
            da: (p.shift_a * ColorParams::LAB_SCALE) as f32,
            db: (p.shift_b * ColorParams::LAB_SCALE) as f32,
        }))
    }

    /// Shifts every pixel of an interleaved buffer in place.
    pub(crate) fn apply(&self, data: &mut [f32]) {
        self.tables.shift_ab_chunk(data, self.da, self.db);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::{from_lab, to_lab};

    #[test]
    fn zero_shift_identity() {
        let img = Image::from_fn(6, 6, |x, y| [x as f32 / 5.0, y as f32 / 5.0, 0.4]);
        let p = ColorParams { shift_a: 0.0, shift_b: 0.0 };
        assert!(apply_color_shift(&img, &p).unwrap().max_abs_diff(&img) <= 1e-3);
    }

    #[test]
    fn negative_b_turns_gray_blue() {
        let gray = Image::filled(1, 1, [0.5; 3]);
        let out = apply_color_shift(&gray, &ColorParams { shift_a: 0.0, shift_b: -0.0882 }).unwrap();
        let [r, _, b] = out.pixel(0, 0);
        assert!(b > r, "{:?}", out.pixel(0, 0));
    }

    #[test]
    fn positive_a_turns_gray_red() {
        let gray = Image::filled(1, 1, [0.5; 3]);
        let out = apply_color_shift(&gray, &ColorParams { shift_a: 0.1, shift_b: 0.0 }).unwrap();
        let [r, g, _] = out.pixel(0, 0);
        assert!(r > g, "{:?}", out.pixel(0, 0));
    }

    #[test]
    fn matches_image_level_lab_route() {
        let img = Image::from_fn(9, 4, |x, y| [0.1 + x as f32 / 10.0, 0.8 - y as f32 / 8.0, 0.35]);
        let p = ColorParams { shift_a: -0.04, shift_b: 0.07 };
        let fused = apply_color_shift(&img, &p).unwrap();
        let mut lab = to_lab(&img);
        for px in lab.data_mut().chunks_exact_mut(3) {
            px[1] += (p.shift_a * 128.0) as f32;
            px[2] += (p.shift_b * 128.0) as f32;
        }
        assert!(fused.max_abs_diff(&from_lab(&lab)) < 1e-5);
    }
}

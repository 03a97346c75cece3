//! sRGB (IEC 61966-2-1, D65) <-> CIE L*a*b* conversion.
//!
//! The sRGB transfer curves are evaluated through linearly interpolated
//! tables, as is the cube root in the forward direction; interpolation error
//! is below 1e-6 over `[0, 1]`, which keeps the round trip well inside 1e-3.

use std::sync::OnceLock;

use super::{clamp_unit, Image, LabImage};

const RGB_TO_XYZ: [[f32; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

const XYZ_TO_RGB: [[f32; 3]; 3] = [
    [3.240_454_2, -1.537_138_5, -0.498_531_4],
    [-0.969_266_0, 1.876_010_8, 0.041_556_0],
    [0.055_643_4, -0.204_025_9, 1.057_225_2],
];

const WHITE_D65: [f32; 3] = [0.950_47, 1.0, 1.088_83];

const DECODE_STEPS: usize = 4096;
const ENCODE_STEPS: usize = 16384;

// (6/29)^3 and related CIE constants.
const LAB_EPSILON: f32 = 216.0 / 24389.0;
const LAB_DELTA: f32 = 6.0 / 29.0;

/// Piecewise-linear table over `[0, 1]`, stored as (value, slope) pairs.
struct Table {
    steps: f32,
    entries: Vec<[f32; 2]>,
}

impl Table {
    fn build(steps: usize, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f32> = (0..=steps).map(|i| f(i as f64 / steps as f64) as f32).collect();
        let entries = values.windows(2).map(|w| [w[0], w[1] - w[0]]).collect();
        Self {
            steps: steps as f32,
            entries,
        }
    }

    #[inline]
    fn eval(&self, v: f32) -> f32 {
        let t = clamp_unit(v) * self.steps;
        // SAFETY: `t` is finite and lies in `[0, steps]`, which fits in u32.
        let i = unsafe { t.to_int_unchecked::<u32>() } as usize;
        let i = i.min(self.entries.len() - 1);
        // SAFETY: `i` was clamped to the last entry just above.
        let [a, d] = unsafe { *self.entries.get_unchecked(i) };
        a + d * (t - i as f32)
    }
}

const CBRT_STEPS: usize = 16384;

/// Lookup tables for both conversion directions.
pub(crate) struct LabTables {
    decode: Table,
    encode: Table,
    /// `lab_f` on `[0, 1]`.
    forward: Table,
}

pub(crate) fn lab_tables() -> &'static LabTables {
    static T: OnceLock<LabTables> = OnceLock::new();
    T.get_or_init(|| LabTables {
        decode: Table::build(DECODE_STEPS, |v| {
            if v <= 0.04045 {
                v / 12.92
            } else {
                ((v + 0.055) / 1.055).powf(2.4)
            }
        }),
        encode: Table::build(ENCODE_STEPS, |l| {
            if l <= 0.003_130_8 {
                12.92 * l
            } else {
                1.055 * l.powf(1.0 / 2.4) - 0.055
            }
        }),
        forward: Table::build(CBRT_STEPS, |t| f64::from(lab_f(t as f32))),
    })
}

#[inline]
fn lab_f(t: f32) -> f32 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        t / (3.0 * LAB_DELTA * LAB_DELTA) + 4.0 / 29.0
    }
}

#[inline]
fn lab_f_inv(u: f32) -> f32 {
    if u > LAB_DELTA {
        u * u * u
    } else {
        3.0 * LAB_DELTA * LAB_DELTA * (u - 4.0 / 29.0)
    }
}

#[inline]
fn mat_mul(m: &[[f32; 3]; 3], v: [f32; 3]) -> [f32; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

impl LabTables {
    #[inline]
    fn f(&self, t: f32) -> f32 {
        if (0.0..=1.0).contains(&t) {
            self.forward.eval(t)
        } else {
            lab_f(t)
        }
    }

    #[inline]
    pub(crate) fn srgb_to_lab(&self, rgb: [f32; 3]) -> [f32; 3] {
        let lin = rgb.map(|v| self.decode.eval(v));
        let xyz = mat_mul(&RGB_TO_XYZ, lin);
        let fx = self.f(xyz[0] / WHITE_D65[0]);
        let fy = self.f(xyz[1] / WHITE_D65[1]);
        let fz = self.f(xyz[2] / WHITE_D65[2]);
        [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
    }

    #[inline]
    pub(crate) fn lab_to_srgb(&self, lab: [f32; 3]) -> [f32; 3] {
        let fy = (lab[0] + 16.0) / 116.0;
        let fx = fy + lab[1] / 500.0;
        let fz = fy - lab[2] / 200.0;
        let xyz = [
            lab_f_inv(fx) * WHITE_D65[0],
            lab_f_inv(fy) * WHITE_D65[1],
            lab_f_inv(fz) * WHITE_D65[2],
        ];
        mat_mul(&XYZ_TO_RGB, xyz).map(|l| self.encode.eval(l))
    }
}

/// Pixels per block in [`LabTables::shift_ab_chunk`].
const BLOCK: usize = 16;

impl LabTables {
    /// `lab_to_srgb(srgb_to_lab(rgb) + [0, da, db])` for every pixel of an
    /// interleaved chunk, computed without the detour through L*: a shift in
    /// a* and b* leaves Y untouched and moves only `f(X/Xn)` and `f(Z/Zn)`.
    pub(crate) fn shift_ab_chunk(&self, data: &mut [f32], da: f32, db: f32) {
        #[cfg(target_arch = "x86_64")]
        if crate::cpu::has_avx2() {
            // SAFETY: AVX2 support was verified at runtime.
            unsafe { self.shift_ab_avx2(data, da, db) };
            return;
        }
        self.shift_ab_body(data, da, db)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    fn shift_ab_avx2(&self, data: &mut [f32], da: f32, db: f32) {
        self.shift_ab_body(data, da, db)
    }

    #[inline(always)]
    fn shift_ab_body(&self, data: &mut [f32], da: f32, db: f32) {
        let (dfx, dfz) = (da / 500.0, db / 200.0);
        let mut blocks = data.chunks_exact_mut(3 * BLOCK);
        for block in &mut blocks {
            let mut rgb = [[0.0f32; BLOCK]; 3];
            for (i, px) in block.chunks_exact(3).enumerate() {
                for c in 0..3 {
                    rgb[c][i] = px[c];
                }
            }
            let out = self.shift_block(&rgb, dfx, dfz);
            for (i, px) in block.chunks_exact_mut(3).enumerate() {
                for c in 0..3 {
                    px[c] = out[c][i];
                }
            }
        }
        for px in blocks.into_remainder().chunks_exact_mut(3) {
            let out = self.shift_block(&[[px[0]; BLOCK], [px[1]; BLOCK], [px[2]; BLOCK]], dfx, dfz);
            for c in 0..3 {
                px[c] = out[c][0];
            }
        }
    }

    /// Structure-of-arrays core; every step is an elementwise loop.
    #[inline(always)]
    fn shift_block(&self, rgb: &[[f32; BLOCK]; 3], dfx: f32, dfz: f32) -> [[f32; BLOCK]; 3] {
        let mut lin = [[0.0f32; BLOCK]; 3];
        for c in 0..3 {
            for i in 0..BLOCK {
                lin[c][i] = self.decode.eval(rgb[c][i]);
            }
        }
        let mut xyz = [[0.0f32; BLOCK]; 3];
        for (r, row) in xyz.iter_mut().enumerate() {
            let m = RGB_TO_XYZ[r];
            for i in 0..BLOCK {
                row[i] = m[0] * lin[0][i] + m[1] * lin[1][i] + m[2] * lin[2][i];
            }
        }
        for i in 0..BLOCK {
            let fx = self.forward.eval(xyz[0][i] / WHITE_D65[0]) + dfx;
            let fz = self.forward.eval(xyz[2][i] / WHITE_D65[2]) - dfz;
            xyz[0][i] = lab_f_inv(fx) * WHITE_D65[0];
            xyz[2][i] = lab_f_inv(fz) * WHITE_D65[2];
        }
        let mut out = [[0.0f32; BLOCK]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            let m = XYZ_TO_RGB[r];
            for i in 0..BLOCK {
                row[i] = self.encode.eval(m[0] * xyz[0][i] + m[1] * xyz[1][i] + m[2] * xyz[2][i]);
            }
        }
        out
    }
}

/// Converts one sRGB-encoded pixel to `[L*, a*, b*]`.
#[inline]
pub fn srgb_to_lab(rgb: [f32; 3]) -> [f32; 3] {
    lab_tables().srgb_to_lab(rgb)
}

/// Converts one `[L*, a*, b*]` triple back to sRGB, clamping out-of-gamut
/// results into `[0, 1]`.
#[inline]
pub fn lab_to_srgb(lab: [f32; 3]) -> [f32; 3] {
    lab_tables().lab_to_srgb(lab)
}

pub fn to_lab(img: &Image) -> LabImage {
    let t = lab_tables();
    let data = img
        .data()
        .chunks_exact(3)
        .flat_map(|p| t.srgb_to_lab([p[0], p[1], p[2]]))
        .collect();
    LabImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

pub fn from_lab(lab: &LabImage) -> Image {
    let t = lab_tables();
    let data = lab
        .data()
        .chunks_exact(3)
        .flat_map(|p| t.lab_to_srgb([p[0], p[1], p[2]]))
        .collect();
    Image::from_raw(lab.width(), lab.height(), data)
}

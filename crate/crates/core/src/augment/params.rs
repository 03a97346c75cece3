//! The 17 free sensor-effect scalars and their valid ranges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chromatic aberration: green-channel scale about the image center plus
/// per-channel translations in normalized image coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChromAbParams {
    pub g_scale: f64,
    pub r_tx: f64,
    pub r_ty: f64,
    pub g_tx: f64,
    pub g_ty: f64,
    pub b_tx: f64,
    pub b_ty: f64,
}

/// Gaussian out-of-focus blur with a fixed 9×9 window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlurParams {
    pub sigma: f64,
}

impl BlurParams {
    pub const WINDOW: usize = crate::imagecore::DEFAULT_KERNEL_SIZE;
    /// Sigma used to express "no blur"; the kernel collapses to a delta.
    pub const IDENTITY_SIGMA: f64 = 1e-6;
}

/// Re-exposure shift in the sigmoid exposure model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposureParams {
    pub delta_s: f64,
}

impl ExposureParams {
    /// Contrast constant of the exposure curve.
    pub const CONTRAST_A: f64 = 0.85;
}

/// Per-channel Poisson-Gaussian noise variances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub poiss_r: f64,
    pub poiss_g: f64,
    pub poiss_b: f64,
    pub gauss_r: f64,
    pub gauss_g: f64,
    pub gauss_b: f64,
}

impl NoiseParams {
    pub fn poiss(&self) -> [f64; 3] {
        [self.poiss_r, self.poiss_g, self.poiss_b]
    }

    pub fn gauss(&self) -> [f64; 3] {
        [self.gauss_r, self.gauss_g, self.gauss_b]
    }
}

/// a*/b* translations, normalized by 128.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorParams {
    pub shift_a: f64,
    pub shift_b: f64,
}

impl ColorParams {
    pub const LAB_SCALE: f64 = 128.0;
}

/// One concrete setting of every sensor effect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub chrom: ChromAbParams,
    pub blur: BlurParams,
    pub exposure: ExposureParams,
    pub noise: NoiseParams,
    pub color: ColorParams,
}

/// Number of free scalars in [`SensorParams`].
pub const PARAM_COUNT: usize = 17;

/// Effect group a parameter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    Chrom,
    Blur,
    Exposure,
    Noise,
    Color,
}

impl Effect {
    pub const ALL: [Effect; 5] = [Effect::Chrom, Effect::Blur, Effect::Exposure, Effect::Noise, Effect::Color];

    pub fn key(self) -> &'static str {
        match self {
            Effect::Chrom => "chrom",
            Effect::Blur => "blur",
            Effect::Exposure => "exposure",
            Effect::Noise => "noise",
            Effect::Color => "color",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Effect::Chrom => "chrom. ab.",
            Effect::Blur => "blur",
            Effect::Exposure => "exposure",
            Effect::Noise => "noise",
            Effect::Color => "post-processing",
        }
    }
}

/// Static description of one parameter.
#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    pub effect: Effect,
    pub name: &'static str,
    /// Short label used in tables.
    pub symbol: &'static str,
    pub lo: f64,
    pub hi: f64,
    /// The lower bound itself is not a valid value.
    pub lo_open: bool,
    /// Value that leaves the image unchanged.
    pub identity: f64,
}

impl ParamSpec {
    /// Dotted key, e.g. `exposure.delta_s`.
    pub fn key(&self) -> String {
        format!("{}.{}", self.effect.key(), self.name)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v.is_finite() && v <= self.hi && if self.lo_open { v > self.lo } else { v >= self.lo }
    }

    /// Clamps into the valid range; open lower bounds clamp to the identity
    /// sigma used for blur.
    pub fn clamp(&self, v: f64) -> f64 {
        let lo = if self.lo_open { BlurParams::IDENTITY_SIGMA.max(self.lo) } else { self.lo };
        if v.is_nan() {
            return lo;
        }
        v.clamp(lo, self.hi)
    }
}

const fn spec(effect: Effect, name: &'static str, symbol: &'static str, lo: f64, hi: f64, identity: f64) -> ParamSpec {
    ParamSpec {
        effect,
        name,
        symbol,
        lo,
        hi,
        lo_open: false,
        identity,
    }
}

/// Canonical parameter order, used for vectors, CSV columns and profiles.
pub const PARAM_SPECS: [ParamSpec; PARAM_COUNT] = [
    spec(Effect::Chrom, "g_scale", "G_scale", 0.9, 1.1, 1.0),
    spec(Effect::Chrom, "r_tx", "R_tx", -0.05, 0.05, 0.0),
    spec(Effect::Chrom, "r_ty", "R_ty", -0.05, 0.05, 0.0),
    spec(Effect::Chrom, "g_tx", "G_tx", -0.05, 0.05, 0.0),
    spec(Effect::Chrom, "g_ty", "G_ty", -0.05, 0.05, 0.0),
    spec(Effect::Chrom, "b_tx", "B_tx", -0.05, 0.05, 0.0),
    spec(Effect::Chrom, "b_ty", "B_ty", -0.05, 0.05, 0.0),
    ParamSpec {
        effect: Effect::Blur,
        name: "sigma",
        symbol: "σ",
        lo: 0.0,
        hi: 3.0,
        lo_open: true,
        identity: BlurParams::IDENTITY_SIGMA,
    },
    spec(Effect::Exposure, "delta_s", "ΔS", -2.0, 2.0, 0.0),
    spec(Effect::Noise, "poiss_r", "R_poiss", 0.0, 0.1, 0.0),
    spec(Effect::Noise, "poiss_g", "G_poiss", 0.0, 0.1, 0.0),
    spec(Effect::Noise, "poiss_b", "B_poiss", 0.0, 0.1, 0.0),
    spec(Effect::Noise, "gauss_r", "R_gauss", 0.0, 0.1, 0.0),
    spec(Effect::Noise, "gauss_g", "G_gauss", 0.0, 0.1, 0.0),
    spec(Effect::Noise, "gauss_b", "B_gauss", 0.0, 0.1, 0.0),
    spec(Effect::Color, "shift_a", "a", -0.5, 0.5, 0.0),
    spec(Effect::Color, "shift_b", "b", -0.5, 0.5, 0.0),
];

/// Index of a parameter by dotted key.
pub fn param_index(key: &str) -> Option<usize> {
    PARAM_SPECS.iter().position(|s| s.key() == key)
}

impl SensorParams {
    /// Parameters that leave an image unchanged (up to interpolation and
    /// exposure clamping).
    pub fn identity() -> Self {
        Self::from_array(PARAM_SPECS.map(|s| s.identity))
    }

    pub fn to_array(&self) -> [f64; PARAM_COUNT] {
        let c = &self.chrom;
        let n = &self.noise;
        [
            c.g_scale,
            c.r_tx,
            c.r_ty,
            c.g_tx,
            c.g_ty,
            c.b_tx,
            c.b_ty,
            self.blur.sigma,
            self.exposure.delta_s,
            n.poiss_r,
            n.poiss_g,
            n.poiss_b,
            n.gauss_r,
            n.gauss_g,
            n.gauss_b,
            self.color.shift_a,
            self.color.shift_b,
        ]
    }

    pub fn from_array(v: [f64; PARAM_COUNT]) -> Self {
        SensorParams {
            chrom: ChromAbParams {
                g_scale: v[0],
                r_tx: v[1],
                r_ty: v[2],
                g_tx: v[3],
                g_ty: v[4],
                b_tx: v[5],
                b_ty: v[6],
            },
            blur: BlurParams { sigma: v[7] },
            exposure: ExposureParams { delta_s: v[8] },
            noise: NoiseParams {
                poiss_r: v[9],
                poiss_g: v[10],
                poiss_b: v[11],
                gauss_r: v[12],
                gauss_g: v[13],
                gauss_b: v[14],
            },
            color: ColorParams {
                shift_a: v[15],
                shift_b: v[16],
            },
        }
    }

    /// Checks every scalar against its range.
    pub fn validate(&self) -> Result<()> {
        for (spec, v) in PARAM_SPECS.iter().zip(self.to_array()) {
            check(spec, v)?;
        }
        Ok(())
    }
}

fn check(spec: &ParamSpec, v: f64) -> Result<()> {
    if spec.contains(v) {
        Ok(())
    } else {
        let open = if spec.lo_open { "(" } else { "[" };
        Err(Error::invalid(format!(
            "{} = {v} outside {open}{}, {}]",
            spec.key(),
            spec.lo,
            spec.hi
        )))
    }
}

pub(crate) fn check_group(effect: Effect, values: &[f64]) -> Result<()> {
    PARAM_SPECS
        .iter()
        .filter(|s| s.effect == effect)
        .zip(values)
        .try_for_each(|(s, &v)| check(s, v))
}

impl ChromAbParams {
    pub fn identity() -> Self {
        SensorParams::identity().chrom
    }

    pub(crate) fn validate(&self) -> Result<()> {
        check_group(
            Effect::Chrom,
            &[self.g_scale, self.r_tx, self.r_ty, self.g_tx, self.g_ty, self.b_tx, self.b_ty],
        )
    }
}

impl NoiseParams {
    pub fn zero() -> Self {
        SensorParams::identity().noise
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let [a, b, c] = self.poiss();
        let [d, e, f] = self.gauss();
        check_group(Effect::Noise, &[a, b, c, d, e, f])
    }
}

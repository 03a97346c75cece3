//! Sensor profiles: a distribution for each of the 17 sensor parameters,
//! persisted as canonical JSON.

mod builtin;
mod json;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::augment::{Effect, SensorParams, PARAM_COUNT, PARAM_SPECS};
use crate::error::{Error, Result};

pub use builtin::{builtin_names, builtin_profile, builtin_profiles};
pub use json::{from_json, to_json};

/// Current `schema_version` written to and accepted from profile files.
pub const SCHEMA_VERSION: u32 = 1;

/// Per-parameter sampling distribution, expressed in parameter units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution {
    /// Draws `mu + sigma·z`, clamped into the parameter's range.
    Gaussian { mu: f64, sigma: f64 },
    /// Draws uniformly from `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl Distribution {
    pub fn point(v: f64) -> Self {
        Distribution::Gaussian { mu: v, sigma: 0.0 }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::Uniform { .. } => "uniform",
        }
    }

    /// Expected value before clamping.
    pub fn center(&self) -> f64 {
        match *self {
            Distribution::Gaussian { mu, .. } => mu,
            Distribution::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Gaussian { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mu + sigma * z
            }
            Distribution::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                lo + (hi - lo) * u
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProfileMetadata {
    pub source_dataset: String,
    pub target_dataset: String,
    pub extractor_id: String,
    pub seed: Option<u64>,
    pub iterations: Option<u64>,
    pub created_at: String,
    pub notes: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorProfile {
    pub name: String,
    /// In [`PARAM_SPECS`] order.
    pub params: [Distribution; PARAM_COUNT],
    pub metadata: ProfileMetadata,
    /// Informational values that lie outside the valid ranges, keyed by
    /// `<effect>.<param>.<field>`, e.g. `chrom.b_ty.mu`.
    pub raw_overrides: BTreeMap<String, f64>,
}

impl SensorProfile {
    /// A profile that always yields `p`.
    pub fn deterministic(name: impl Into<String>, p: &SensorParams) -> Self {
        Self {
            name: name.into(),
            params: p.to_array().map(Distribution::point),
            metadata: ProfileMetadata::default(),
            raw_overrides: BTreeMap::new(),
        }
    }

    pub fn identity() -> Self {
        Self::deterministic("identity", &SensorParams::identity())
    }

    pub fn get(&self, key: &str) -> Option<&Distribution> {
        crate::augment::param_index(key).map(|i| &self.params[i])
    }

    fn has_override(&self, key: &str) -> bool {
        let prefix = format!("{key}.");
        self.raw_overrides.keys().any(|k| k.starts_with(&prefix))
    }

    /// Checks every distribution against its parameter range. Out-of-range
    /// stored values are accepted only when a raw override is recorded for
    /// that parameter.
    pub fn validate(&self) -> Result<()> {
        for (spec, d) in PARAM_SPECS.iter().zip(&self.params) {
            let key = spec.key();
            let in_range = |v: f64| v.is_finite() && v >= spec.lo && v <= spec.hi;
            match *d {
                Distribution::Gaussian { mu, sigma } => {
                    if !mu.is_finite() {
                        return Err(Error::validation(&key, "mu must be finite"));
                    }
                    if !(sigma.is_finite() && sigma >= 0.0) {
                        return Err(Error::validation(&key, format!("sigma must be finite and >= 0, got {sigma}")));
                    }
                    if !in_range(mu) && !self.has_override(&key) {
                        return Err(Error::validation(
                            &key,
                            format!("mu {mu} outside [{}, {}] without raw override", spec.lo, spec.hi),
                        ));
                    }
                }
                Distribution::Uniform { lo, hi } => {
                    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                        return Err(Error::validation(&key, format!("invalid uniform range [{lo}, {hi}]")));
                    }
                    if !(in_range(lo) && in_range(hi)) && !self.has_override(&key) {
                        return Err(Error::validation(
                            &key,
                            format!("range [{lo}, {hi}] outside [{}, {}] without raw override", spec.lo, spec.hi),
                        ));
                    }
                }
            }
        }
        for k in self.raw_overrides.keys() {
            let param = k.rsplit_once('.').map(|(p, _)| p).unwrap_or(k);
            if crate::augment::param_index(param).is_none() {
                return Err(Error::validation(format!("raw_overrides.{k}"), "unknown parameter"));
            }
        }
        Ok(())
    }

    /// One draw. Every component is clamped into its valid range, so the
    /// result always passes [`SensorParams::validate`].
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> SensorParams {
        let mut v = [0.0; PARAM_COUNT];
        for ((out, d), spec) in v.iter_mut().zip(&self.params).zip(&PARAM_SPECS) {
            *out = spec.clamp(d.draw(rng));
        }
        SensorParams::from_array(v)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<SensorParams> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, to_json(self)).map_err(|e| Error::io(path, e))
    }

    /// Loads a profile file, or a builtin profile when `spec` has the form
    /// `builtin:<name>`.
    pub fn load(spec: &str) -> Result<Self> {
        if let Some(name) = spec.strip_prefix("builtin:") {
            return builtin_profile(name).ok_or_else(|| {
                Error::validation(
                    "profile",
                    format!("unknown builtin '{name}' (available: {})", builtin_names().join(", ")),
                )
            });
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        from_json(&text)
    }

    /// Human-readable table grouped by effect, one parameter per row.
    pub fn inspect(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "profile: {}", self.name);
        let m = &self.metadata;
        for (label, value) in [
            ("source", &m.source_dataset),
            ("target", &m.target_dataset),
            ("extractor", &m.extractor_id),
            ("created", &m.created_at),
            ("notes", &m.notes),
        ] {
            if !value.is_empty() {
                let _ = writeln!(s, "{label}: {value}");
            }
        }
        if let Some(seed) = m.seed {
            let _ = writeln!(s, "seed: {seed}");
        }
        if let Some(it) = m.iterations {
            let _ = writeln!(s, "iterations: {it}");
        }
        for effect in Effect::ALL {
            let _ = writeln!(s, "[{}]", effect.title());
            for (spec, d) in PARAM_SPECS.iter().zip(&self.params).filter(|(sp, _)| sp.effect == effect) {
                let _ = write!(s, "{} {}: ", effect.key(), spec.symbol);
                match *d {
                    Distribution::Gaussian { mu, sigma } => {
                        let _ = write!(s, "{} ± {}", fmt_num(mu), fmt_num(sigma));
                    }
                    Distribution::Uniform { lo, hi } => {
                        let _ = write!(s, "uniform [{}, {}]", fmt_num(lo), fmt_num(hi));
                    }
                }
                let key = spec.key();
                let raws: Vec<String> = self
                    .raw_overrides
                    .iter()
                    .filter_map(|(k, v)| {
                        let field = k.strip_prefix(&key)?.strip_prefix('.')?;
                        Some(format!("{field} {}", fmt_num(*v)))
                    })
                    .collect();
                if !raws.is_empty() {
                    let _ = write!(s, "  (raw {})", raws.join(", "));
                }
                s.push('\n');
            }
        }
        s
    }
}

/// Shortest round-trip text: plain decimals for moderate magnitudes,
/// exponent form otherwise.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, -0.273, 0.0249, 2.398e-5, 1.34e-13, 1.0e-6, 1.15e-2, 5.41, -5.052, 1e7] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(2.398e-5), "2.398e-5");
        assert_eq!(fmt_num(-0.273), "-0.273");
    }

    #[test]
    fn point_profile_is_constant() {
        let p = SensorParams::from_array({
            let mut v = SensorParams::identity().to_array();
            v[8] = 0.4;
            v
        });
        let prof = SensorProfile::deterministic("x", &p);
        let draws = prof.sample(&mut stream(1), 3);
        assert!(draws.iter().all(|d| *d == p));
    }

    #[test]
    fn uniform_degenerate_and_containment() {
        let mut prof = SensorProfile::identity();
        prof.params[8] = Distribution::Uniform { lo: 0.3, hi: 0.3 };
        prof.params[15] = Distribution::Uniform { lo: -0.1, hi: 0.2 };
        let mut rng = stream(2);
        for _ in 0..1000 {
            let d = prof.sample_one(&mut rng);
            assert_eq!(d.exposure.delta_s, 0.3);
            assert!((-0.1..=0.2).contains(&d.color.shift_a));
        }
    }

    #[test]
    fn gaussian_draws_are_clamped() {
        let mut prof = SensorProfile::identity();
        prof.params[7] = Distribution::Gaussian { mu: 0.0, sigma: 5.0 };
        prof.params[9] = Distribution::Gaussian { mu: 0.0, sigma: 1.0 };
        let mut rng = stream(3);
        for _ in 0..2000 {
            prof.sample_one(&mut rng).validate().unwrap();
        }
    }

    #[test]
    fn validation_names_field() {
        let mut prof = SensorProfile::identity();
        prof.params[8] = Distribution::Gaussian { mu: 3.0, sigma: 0.0 };
        let err = prof.validate().unwrap_err().to_string();
        assert!(err.starts_with("exposure.delta_s:"), "{err}");
        prof.raw_overrides.insert("exposure.delta_s.mu".into(), 3.0);
        prof.validate().unwrap();

        let mut prof = SensorProfile::identity();
        prof.params[0] = Distribution::Gaussian { mu: 1.0, sigma: -1.0 };
        assert!(prof.validate().unwrap_err().to_string().starts_with("chrom.g_scale:"));
        let mut prof = SensorProfile::identity();
        prof.params[1] = Distribution::Uniform { lo: 0.01, hi: -0.01 };
        assert!(prof.validate().unwrap_err().to_string().starts_with("chrom.r_tx:"));
        let mut prof = SensorProfile::identity();
        prof.raw_overrides.insert("chrom.nope.mu".into(), 1.0);
        assert!(prof.validate().is_err());
    }

    #[test]
    fn load_builtin_by_name() {
        assert_eq!(SensorProfile::load("builtin:gta2kitti").unwrap().name, "gta2kitti");
        assert!(SensorProfile::load("builtin:nope").is_err());
    }
}

//! Maps unconstrained raw values onto each parameter's valid range:
//! `p = lo + (hi - lo)·(1 + tanh u)/2`, followed by a clamp so that
//! saturated `tanh` still yields a valid value for open bounds.

use crate::augment::{PARAM_COUNT, PARAM_SPECS};

/// Raw starting point for parameters whose identity value sits on the lower
/// bound (the noise variances), where the squash is only reached
/// asymptotically. `(1 + tanh(-4))/2 ≈ 3.4e-4` of the range.
pub const LOWER_BOUND_INIT_RAW: f64 = -4.0;

/// Starting blur sigma, away from the degenerate lower bound.
pub const INITIAL_BLUR_SIGMA: f64 = 0.5;

pub fn squash(i: usize, u: f64) -> f64 {
    let s = &PARAM_SPECS[i];
    s.clamp(s.lo + s.width() * 0.5 * (1.0 + u.tanh()))
}

/// `dp/du` at `u`.
pub fn squash_slope(i: usize, u: f64) -> f64 {
    let t = u.tanh();
    PARAM_SPECS[i].width() * 0.5 * (1.0 - t * t)
}

/// Inverse of [`squash`], saturating at `±19` for values on the bounds.
pub fn unsquash(i: usize, p: f64) -> f64 {
    let s = &PARAM_SPECS[i];
    let x = (2.0 * (p - s.lo) / s.width() - 1.0).clamp(-1.0, 1.0);
    x.atanh().clamp(-19.0, 19.0)
}

pub fn squash_all(u: &[f64]) -> [f64; PARAM_COUNT] {
    std::array::from_fn(|i| squash(i, u[i]))
}

/// Raw means that reproduce the identity parameters, except for blur, which
/// starts at [`INITIAL_BLUR_SIGMA`], and lower-bound parameters, which start
/// at [`LOWER_BOUND_INIT_RAW`].
pub fn initial_raw_means() -> [f64; PARAM_COUNT] {
    std::array::from_fn(|i| {
        let s = &PARAM_SPECS[i];
        if s.lo_open {
            unsquash(i, INITIAL_BLUR_SIGMA)
        } else if s.identity <= s.lo {
            LOWER_BOUND_INIT_RAW
        } else {
            unsquash(i, s.identity)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{param_index, SensorParams};
    use proptest::prelude::*;

    #[test]
    fn symmetric_ranges_center_on_zero() {
        let ds = param_index("exposure.delta_s").unwrap();
        assert_eq!(squash(ds, 0.0), 0.0);
        let g = param_index("chrom.g_scale").unwrap();
        assert!((squash(g, 0.0) - 1.0).abs() < 1e-15);
        assert!((squash(ds, (-0.15f64).atanh()) + 0.3).abs() < 1e-12);
    }

    #[test]
    fn initial_means() {
        let u = initial_raw_means();
        let p = SensorParams::from_array(squash_all(&u));
        p.validate().unwrap();
        assert!((p.blur.sigma - 0.5).abs() < 1e-12);
        assert_eq!(p.exposure.delta_s, 0.0);
        assert!(p.noise.gauss_g > 0.0 && p.noise.gauss_g < 1e-4);
        assert_eq!(p.color.shift_a, 0.0);
    }

    #[test]
    fn slope_matches_finite_difference() {
        for i in 0..PARAM_COUNT {
            for u in [-2.0, -0.3, 0.0, 0.7] {
                let h = 1e-6;
                let fd = (squash(i, u + h) - squash(i, u - h)) / (2.0 * h);
                assert!((fd - squash_slope(i, u)).abs() < 1e-6 * PARAM_SPECS[i].width().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn always_valid(u in prop::array::uniform17(-1e6f64..1e6)) {
            SensorParams::from_array(squash_all(&u)).validate().unwrap();
        }

        #[test]
        fn unsquash_inverts(i in 0usize..PARAM_COUNT, u in -5.0f64..5.0) {
            prop_assert!((unsquash(i, squash(i, u)) - u).abs() < 1e-6);
        }
    }
}

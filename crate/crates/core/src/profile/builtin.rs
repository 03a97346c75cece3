//! Shipped reference profiles: learned parameters for GTA Sim10k → Cityscapes
//! and GTA Sim10k → KITTI, and the hand-chosen domain-randomization ranges.

use std::collections::BTreeMap;

use super::{Distribution, ProfileMetadata, SensorProfile};
use crate::augment::ColorParams;

use Distribution::{Gaussian as G, Uniform as U};

const NAMES: [&str; 3] = ["gta2cityscapes", "gta2kitti", "randomization"];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

pub fn builtin_profiles() -> Vec<SensorProfile> {
    NAMES.iter().map(|n| builtin_profile(n).expect("builtin exists")).collect()
}

fn meta(target: &str, notes: &str) -> ProfileMetadata {
    ProfileMetadata {
        source_dataset: "GTA Sim10k".into(),
        target_dataset: target.into(),
        extractor_id: "vgg16".into(),
        notes: notes.into(),
        ..Default::default()
    }
}

pub fn builtin_profile(name: &str) -> Option<SensorProfile> {
    let p = match name {
        "gta2cityscapes" => SensorProfile {
            name: name.into(),
            params: [
                G { mu: 0.999, sigma: 2.398e-5 },
                G { mu: 0.004, sigma: 6.221e-5 },
                G { mu: 0.007, sigma: 5.511e-5 },
                G { mu: 0.005, sigma: 1.111e-5 },
                G { mu: 0.006, sigma: 4.718e-5 },
                G { mu: 0.006, sigma: 5.793e-5 },
                G { mu: -0.05, sigma: 1.16e-4 },
                G { mu: 0.718, sigma: 1.34e-13 },
                G { mu: -0.273, sigma: 0.0249 },
                G { mu: 1.0e-6, sigma: 1.382e-18 },
                G { mu: 1.15e-2, sigma: 7.913e-5 },
                G { mu: 6.8e-4, sigma: 4.608e-6 },
                G { mu: 1.0e-6, sigma: 1.382e-18 },
                G { mu: 0.1, sigma: 4.249e-4 },
                G { mu: 1.0e-6, sigma: 1.382e-18 },
                G { mu: -0.002, sigma: 5.239e-4 },
                G { mu: -0.0116, sigma: 4.727e-4 },
            ],
            metadata: meta(
                "Cityscapes",
                "chrom.b_ty and noise.gauss_g means lie outside their valid ranges and are stored clamped",
            ),
            raw_overrides: BTreeMap::from([("chrom.b_ty.mu".into(), -5.052), ("noise.gauss_g.mu".into(), 5.41)]),
        },
        "gta2kitti" => SensorProfile {
            name: name.into(),
            params: [
                G { mu: 1.001, sigma: 6.425e-5 },
                G { mu: 1.134e-4, sigma: 9.416e-5 },
                G { mu: -0.0013, sigma: 6.874e-5 },
                G { mu: -4.67e-4, sigma: 5.65e-5 },
                G { mu: -0.0014, sigma: 7.228e-5 },
                G { mu: -0.003, sigma: 1.245e-4 },
                G { mu: -5.16e-5, sigma: 1.096e-4 },
                G { mu: 0.941, sigma: 5.173e-7 },
                G { mu: 0.0823, sigma: 0.003 },
                G { mu: 3.07e-2, sigma: 1.295e-3 },
                G { mu: 2.62e-2, sigma: 1.111e-3 },
                G { mu: 4.47e-2, sigma: 1.187e-3 },
                G { mu: 9.5e-3, sigma: 3.713e-4 },
                G { mu: 4.5e-3, sigma: 2.005e-4 },
                G { mu: 2.65e-2, sigma: 1.111e-3 },
                G { mu: -0.0131, sigma: 5.426e-4 },
                G { mu: -0.0882, sigma: 3.25e-3 },
            ],
            metadata: meta("KITTI", ""),
            raw_overrides: BTreeMap::new(),
        },
        "randomization" => {
            let ab = 10.0 / ColorParams::LAB_SCALE;
            let t = U { lo: -0.003, hi: 0.003 };
            let n = U { lo: 0.0, hi: 0.05 };
            SensorProfile {
                name: name.into(),
                params: [
                    U { lo: 0.998, hi: 1.002 },
                    t,
                    t,
                    t,
                    t,
                    t,
                    t,
                    U { lo: 0.0, hi: 3.0 },
                    U { lo: -0.6, hi: 1.2 },
                    n,
                    n,
                    n,
                    n,
                    n,
                    n,
                    U { lo: -ab, hi: ab },
                    U { lo: -ab, hi: ab },
                ],
                metadata: ProfileMetadata {
                    extractor_id: String::new(),
                    notes: "hand-chosen uniform ranges; a/b given in LAB units and stored divided by 128; \
                            kernel size range 3-11 is not modelled, the blur window stays 9 and only sigma varies"
                        .into(),
                    ..meta("", "")
                },
                raw_overrides: BTreeMap::from([
                    ("color.shift_a.hi".into(), 10.0),
                    ("color.shift_a.lo".into(), -10.0),
                    ("color.shift_b.hi".into(), 10.0),
                    ("color.shift_b.lo".into(), -10.0),
                ]),
            }
        }
        _ => return None,
    };
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn all_builtins_validate() {
        for p in builtin_profiles() {
            p.validate().unwrap();
        }
    }

    #[test]
    fn kitti_rows() {
        let p = builtin_profile("gta2kitti").unwrap();
        assert_eq!(*p.get("exposure.delta_s").unwrap(), G { mu: 0.0823, sigma: 0.003 });
        assert_eq!(*p.get("color.shift_b").unwrap(), G { mu: -0.0882, sigma: 3.25e-3 });
    }

    #[test]
    fn cityscapes_clamped_entries() {
        let p = builtin_profile("gta2cityscapes").unwrap();
        assert_eq!(*p.get("exposure.delta_s").unwrap(), G { mu: -0.273, sigma: 0.0249 });
        assert_eq!(*p.get("chrom.b_ty").unwrap(), G { mu: -0.05, sigma: 1.16e-4 });
        assert_eq!(p.raw_overrides["chrom.b_ty.mu"], -5.052);
        assert!(p.inspect().contains("exposure ΔS: -0.273 ± 0.0249\n"));
    }

    #[test]
    fn randomization_ranges() {
        let p = builtin_profile("randomization").unwrap();
        assert_eq!(*p.get("exposure.delta_s").unwrap(), U { lo: -0.6, hi: 1.2 });
        assert_eq!(*p.get("color.shift_a").unwrap(), U { lo: -0.078125, hi: 0.078125 });
        let text = p.inspect();
        assert!(text.contains("exposure ΔS: uniform [-0.6, 1.2]"));
        assert!(!text.contains('±'));
        let mut rng = stream(4);
        for d in p.sample(&mut rng, 2000) {
            let v = d.to_array();
            for (x, dist) in v.iter().zip(&p.params) {
                let Distribution::Uniform { lo, hi } = *dist else { unreachable!() };
                let lo = if lo == 0.0 && dist == &p.params[7] { 1e-6 } else { lo };
                assert!(*x >= lo && *x <= hi);
            }
        }
    }
}

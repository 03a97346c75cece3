//! Procedural street-like test scenes: sky gradient, horizon, road with lane
//! markings, a few box-shaped buildings and vehicles, and a fine
//! deterministic texture. Used by tests, examples and the acceptance suite
//! where no real dataset is available.

use rand::Rng;

use crate::imagecore::Image;
use crate::rng::{mix_seed, splitmix64, stream};

struct Block {
    x0: f32,
    x1: f32,
    y0: f32,
    y1: f32,
    rgb: [f32; 3],
    stripes: bool,
}

/// Gray level from `range` with a small random tint per channel.
fn muted<R: Rng>(rng: &mut R, range: std::ops::Range<f32>, tint: f32) -> [f32; 3] {
    let g = rng.random_range(range);
    [0; 3].map(|_| g + rng.random_range(-tint..tint))
}

/// Renders scene number `index` of the family identified by `seed`.
pub fn street_scene(width: usize, height: usize, seed: u64, index: u64) -> Image {
    let mut rng = stream(mix_seed(&[seed, index, 0x5ce4e]));
    let horizon = rng.random_range(0.42f32..0.48);
    let sky_top = [rng.random_range(0.45f32..0.5), rng.random_range(0.6f32..0.65), rng.random_range(0.82f32..0.88)];
    let sky_bottom = [0.85f32, 0.87, 0.9];
    let road = rng.random_range(0.33f32..0.37);
    let ground_tint = [rng.random_range(0.97f32..1.03), 1.0, rng.random_range(0.94f32..1.0)];

    let mut blocks = Vec::new();
    for _ in 0..rng.random_range(4..7) {
        let w = rng.random_range(0.08f32..0.25);
        let x0 = rng.random_range(-0.05f32..0.95);
        let top = horizon - rng.random_range(0.15f32..0.3);
        blocks.push(Block {
            x0,
            x1: x0 + w,
            y0: top,
            y1: horizon + 0.02,
            rgb: muted(&mut rng, 0.35..0.6, 0.05),
            stripes: rng.random_bool(0.6),
        });
    }
    for _ in 0..rng.random_range(1..4) {
        let w = rng.random_range(0.08f32..0.16);
        let x0 = rng.random_range(0.0f32..0.9);
        let y1 = rng.random_range(horizon + 0.15..0.95);
        blocks.push(Block {
            x0,
            x1: x0 + w,
            y0: y1 - w * 0.6,
            y1,
            rgb: muted(&mut rng, 0.2..0.8, 0.1),
            stripes: false,
        });
    }
    let texture_seed = rng.random::<u64>();

    Image::from_fn(width, height, |x, y| {
        let u = (x as f32 + 0.5) / width as f32;
        let v = (y as f32 + 0.5) / height as f32;
        let mut rgb = if v < horizon {
            let t = v / horizon;
            [0, 1, 2].map(|c| sky_top[c] + (sky_bottom[c] - sky_top[c]) * t)
        } else {
            let depth = (v - horizon) / (1.0 - horizon);
            // Lane marking converging towards the horizon.
            let lane = ((u - 0.5).abs() - 0.02 * depth).abs() < 0.006 + 0.01 * depth && (depth * 12.0).fract() < 0.5;
            if lane {
                [0.9, 0.9, 0.85]
            } else {
                let g = road + 0.1 * depth;
                ground_tint.map(|t| g * t)
            }
        };
        for b in &blocks {
            if u >= b.x0 && u < b.x1 && v >= b.y0 && v < b.y1 {
                rgb = b.rgb;
                if b.stripes && ((v - b.y0) * 40.0).fract() < 0.25 && ((u - b.x0) * 30.0).fract() < 0.6 {
                    rgb = rgb.map(|c| c * 0.55);
                }
            }
        }
        let h = splitmix64(texture_seed ^ ((y as u64) << 32 | x as u64));
        let grain = ((h >> 40) as f32 / (1u64 << 24) as f32 - 0.5) * 0.06;
        rgb.map(|c| (c + grain).clamp(0.02, 0.98))
    })
}

/// `count` scenes with consecutive indices.
pub fn street_scenes(width: usize, height: usize, seed: u64, count: usize) -> Vec<Image> {
    (0..count as u64).map(|i| street_scene(width, height, seed, i)).collect()
}

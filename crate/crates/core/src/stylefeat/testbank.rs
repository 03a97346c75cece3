use rand::Rng;
use rand_distr::StandardNormal;

use super::extractor::{ConvLayer, FeatureExtractor, Layer, Normalization};

pub const TEST_BANK_ID: &str = "builtin:testbank-v1";

const STAGES: [(usize, usize); 6] = [(3, 16), (16, 16), (16, 32), (32, 32), (32, 64), (64, 64)];

/// Gaussian rows orthonormalized by Gram-Schmidt.
fn orthogonal_rows(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<f32> {
    let mut m: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    for i in 0..rows {
        for j in 0..i {
            let d: f64 = m[i].iter().zip(&m[j]).map(|(a, b)| a * b).sum();
            let (head, tail) = m.split_at_mut(i);
            for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= d * b;
            }
        }
        let norm = m[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut m[i] {
            *v /= norm;
        }
    }
    m.into_iter().flatten().map(|v| v as f32).collect()
}

/// The deterministic random extractor used when no weight file is given:
/// `3→16, 16→16, pool, 16→32, 32→32, pool, 32→64, 64→64`, seed 0, zero bias.
pub fn builtin_test_bank() -> FeatureExtractor {
    let mut rng = crate::rng::stream(0);
    let mut layers = Vec::new();
    for (i, &(cin, cout)) in STAGES.iter().enumerate() {
        if i == 2 || i == 4 {
            layers.push(Layer::MaxPool);
        }
        layers.push(Layer::Conv(ConvLayer {
            in_channels: cin,
            out_channels: cout,
            weights: orthogonal_rows(cout, cin * 9, &mut rng),
            bias: vec![0.0; cout],
        }));
    }
    FeatureExtractor::new(TEST_BANK_ID, Normalization::IMAGENET, layers).expect("test bank is well formed")
}

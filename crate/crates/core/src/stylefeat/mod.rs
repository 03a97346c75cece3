//! Convolutional feature extraction and the Gram-matrix style distance.
//!
//! The extractor is a plain stack of `conv3x3 + ReLU` and `maxpool 2×2`
//! layers evaluated on the CPU. Weights come from a STYLEFX1 file or from the
//! builtin test bank, a seeded random network that needs no external files.

mod conv;
mod extractor;
mod format;
mod gram;
mod testbank;

pub use extractor::{ConvLayer, FeatureExtractor, FeatureMap, Layer, Normalization, DEFAULT_WORKING_SIZE};
pub use format::{load_extractor, read_extractor, write_extractor, STYLEFX1_MAGIC, STYLEFX1_VERSION};
pub use gram::{gram, gram_distance, style_distance, style_grams, GramMatrix, DEFAULT_STYLE_LAYERS};
pub use testbank::{builtin_test_bank, TEST_BANK_ID};

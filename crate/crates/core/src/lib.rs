//! Physically motivated camera sensor-effect augmentation, plus a learner
//! that fits augmentation-parameter distributions so that augmented
//! synthetic images match the "sensor style" of a real image set.
//!
//! The crate is organised bottom-up:
//!
//! - [`imagecore`]: float RGB images, CIELAB conversion, warps, kernels, codecs.
//! - [`augment`]: the five sensor effects and their fixed composition order.
//! - [`stylefeat`]: a small CPU convolutional feature extractor and Gram-matrix
//!   style distance.
//! - [`learner`]: SPSA training of parameter distributions against the style loss.
//! - [`profile`]: serialized sensor profiles and the shipped builtin profiles.
//! - [`datasetio`]: image-directory scanning and parallel batch augmentation.

pub mod augment;
mod cpu;
pub mod datasetio;
mod error;
pub mod imagecore;
pub mod learner;
pub mod profile;
pub mod rng;
pub mod scenes;
pub mod stylefeat;

pub use error::{Error, Result};
pub use imagecore::Image;

/// Toolkit version string.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Spectral domain-adaptation tooling for overhead imagery.
//!
//! The centerpiece is randomized histogram matching ([`rhm::rhm_augment`]):
//! each source image has every channel histogram-matched to a target-domain
//! image drawn at random, producing a fresh pixel-wise spectral shift per
//! training iteration. Around it sit the baseline transforms (affine, gamma
//! and HSV augmentation, whole-domain histogram matching, histogram
//! equalization, Gray World) and the measurement tools used to study them
//! (entropy change, IoU aggregation, invariance gap).

pub mod analysis;
pub mod batch;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod histogram;
pub mod raster;
pub mod rhm;
pub mod standardize;
pub mod synthetic;
pub mod transforms;

pub use error::{Error, Result};
pub use histogram::{ChannelHistogram, Cdf, InverseMode, Lut};
pub use raster::{Image, Mask};
pub use rhm::{AugmentConfig, AugmentMethod, SeedPolicy, TargetPool};

//! Randomized histogram matching and the whole-domain matching baseline.
//!
//! A [`TargetPool`] holds the per-channel CDFs of every unlabeled target
//! image plus the CDF of their accumulated histogram. RHM draws one pool
//! entry per call and matches each source channel to the corresponding
//! channel of that entry; domain matching always uses the accumulated CDF.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{Domain, ImageRecord, Manifest};
use crate::error::{Error, Result};
use crate::histogram::{
    ChannelHistogram, Cdf, InverseMode, Lut, accumulate_histograms, build_matching_lut, to_cdf,
};
use crate::raster::Image;
use crate::transforms::{
    AffineParams, GammaParams, HsvParams, apply_affine, apply_gamma, apply_hsv, sample_affine,
    sample_gamma, sample_hsv,
};

fn channel_cdfs(hists: &[ChannelHistogram; 3]) -> Result<[Cdf; 3]> {
    Ok([to_cdf(&hists[0])?, to_cdf(&hists[1])?, to_cdf(&hists[2])?])
}

/// Per-channel CDFs of an image.
pub fn image_cdfs(img: &Image) -> [Cdf; 3] {
    // Image guarantees at least one pixel, so every total is positive.
    channel_cdfs(&img.channel_histograms()).expect("non-empty image")
}

/// Matching tables that take `source` channels onto `target` channels.
pub fn matching_luts(source: &[Cdf; 3], target: &[Cdf; 3], mode: InverseMode) -> [Lut; 3] {
    std::array::from_fn(|c| build_matching_lut(&source[c], &target[c], mode))
}

#[derive(Clone, Debug)]
pub struct PoolEntry {
    pub id: String,
    pub cdfs: [Cdf; 3],
}

/// Unlabeled target-domain images, reduced to their CDFs.
#[derive(Clone, Debug)]
pub struct TargetPool {
    entries: Vec<PoolEntry>,
    domain_cdf: [Cdf; 3],
}

impl TargetPool {
    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; construction rejects empty pools.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn domain_cdf(&self) -> &[Cdf; 3] {
        &self.domain_cdf
    }

    /// Builds the pool from every target record of a manifest, loading
    /// images in parallel.
    pub fn from_manifest(manifest: &Manifest) -> Result<Self> {
        let targets: Vec<&ImageRecord> = manifest.records_in(Domain::Target).collect();
        if targets.is_empty() {
            return Err(Error::EmptyPool);
        }
        let loaded: Vec<Result<(String, [ChannelHistogram; 3])>> = targets
            .par_iter()
            .map(|r| Ok((r.id.clone(), r.load_image()?.channel_histograms())))
            .collect();
        let hists = loaded.into_iter().collect::<Result<Vec<_>>>()?;
        Self::from_histograms(hists)
    }

    /// Builds the pool from precomputed per-channel histograms.
    pub fn from_histograms(items: Vec<(String, [ChannelHistogram; 3])>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyPool);
        }
        let domain_hists: [ChannelHistogram; 3] = std::array::from_fn(|c| {
            accumulate_histograms(items.iter().map(|(_, h)| &h[c])).expect("non-empty pool")
        });
        let domain_cdf = channel_cdfs(&domain_hists)?;
        let entries = items
            .into_iter()
            .map(|(id, h)| {
                channel_cdfs(&h)
                    .map(|cdfs| PoolEntry { id: id.clone(), cdfs })
                    .map_err(|e| Error::for_record(&id, e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            entries,
            domain_cdf,
        })
    }
}

/// Precomputes CDFs for a set of identified target images.
pub fn build_target_pool<'a, I>(images: I) -> Result<TargetPool>
where
    I: IntoIterator<Item = (&'a str, &'a Image)>,
{
    TargetPool::from_histograms(
        images
            .into_iter()
            .map(|(id, img)| (id.to_string(), img.channel_histograms()))
            .collect(),
    )
}

/// Derives a reproducible per-image seed from a global seed, the epoch and
/// the image identifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPolicy {
    pub global_seed: u64,
}

impl SeedPolicy {
    pub fn new(global_seed: u64) -> Self {
        Self { global_seed }
    }

    /// First eight bytes (little endian) of
    /// `SHA-256(global_seed_le || epoch_le || id_utf8)`.
    pub fn derive(&self, epoch: u64, id: &str) -> u64 {
        let mut h = Sha256::new();
        h.update(self.global_seed.to_le_bytes());
        h.update(epoch.to_le_bytes());
        h.update(id.as_bytes());
        let digest = h.finalize();
        let mut first = [0u8; 8];
        first.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(first)
    }
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Picks a pool index uniformly at random.
pub fn select_target(pool: &TargetPool, seed: u64) -> usize {
    // u64 range sampling is portable across pointer widths
    rng_for(seed).random_range(0..pool.len() as u64) as usize
}

/// Matches each channel of `src` to a randomly chosen pool image.
/// Returns the matched image and the chosen target's identifier.
pub fn rhm_augment<'p>(
    src: &Image,
    pool: &'p TargetPool,
    seed: u64,
    mode: InverseMode,
) -> (Image, &'p str) {
    let entry = &pool.entries[select_target(pool, seed)];
    let luts = matching_luts(&image_cdfs(src), &entry.cdfs, mode);
    (src.map_channels(&luts), entry.id.as_str())
}

/// Matches each channel of `src` to the accumulated histogram of the whole pool.
pub fn hist_match_to_domain(src: &Image, pool: &TargetPool, mode: InverseMode) -> Image {
    let luts = matching_luts(&image_cdfs(src), &pool.domain_cdf, mode);
    src.map_channels(&luts)
}

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentMethod {
    None,
    Affine,
    Gamma,
    Hsv,
    Rhm,
    HistMatch,
}

impl AugmentMethod {
    pub fn needs_pool(self) -> bool {
        matches!(self, AugmentMethod::Rhm | AugmentMethod::HistMatch)
    }

    pub fn name(self) -> &'static str {
        match self {
            AugmentMethod::None => "none",
            AugmentMethod::Affine => "affine",
            AugmentMethod::Gamma => "gamma",
            AugmentMethod::Hsv => "hsv",
            AugmentMethod::Rhm => "rhm",
            AugmentMethod::HistMatch => "hist-match",
        }
    }
}

impl std::fmt::Display for AugmentMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What was drawn for one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum AugmentDetail {
    None,
    Affine { params: AffineParams },
    Gamma { params: GammaParams },
    Hsv { params: HsvParams },
    Rhm { target: String },
    HistMatch,
}

#[derive(Clone, Copy, Debug)]
pub struct AugmentConfig<'a> {
    pub method: AugmentMethod,
    pub pool: Option<&'a TargetPool>,
    pub policy: SeedPolicy,
    pub epoch: u64,
    pub mode: InverseMode,
}

impl<'a> AugmentConfig<'a> {
    pub fn new(method: AugmentMethod) -> Self {
        Self {
            method,
            pool: None,
            policy: SeedPolicy::default(),
            epoch: 0,
            mode: InverseMode::Paper,
        }
    }

    pub fn with_pool(mut self, pool: &'a TargetPool) -> Self {
        self.pool = Some(pool);
        self
    }

    pub fn with_seed(mut self, global_seed: u64) -> Self {
        self.policy = SeedPolicy::new(global_seed);
        self
    }

    pub fn with_epoch(mut self, epoch: u64) -> Self {
        self.epoch = epoch;
        self
    }

    pub fn with_mode(mut self, mode: InverseMode) -> Self {
        self.mode = mode;
        self
    }

    fn require_pool(&self) -> Result<&'a TargetPool> {
        self.pool
            .ok_or_else(|| Error::MissingPool(self.method.name().to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct Augmented {
    pub id: String,
    pub image: Image,
    pub seed: u64,
    pub detail: AugmentDetail,
}

/// Augments one image with parameters drawn from its derived seed.
pub fn augment_image(id: &str, img: &Image, cfg: &AugmentConfig<'_>) -> Result<Augmented> {
    let seed = cfg.policy.derive(cfg.epoch, id);
    let (image, detail) = match cfg.method {
        AugmentMethod::None => (img.clone(), AugmentDetail::None),
        AugmentMethod::Affine => {
            let params = sample_affine(&mut rng_for(seed));
            (apply_affine(img, &params), AugmentDetail::Affine { params })
        }
        AugmentMethod::Gamma => {
            let params = sample_gamma(&mut rng_for(seed));
            (apply_gamma(img, &params), AugmentDetail::Gamma { params })
        }
        AugmentMethod::Hsv => {
            let params = sample_hsv(&mut rng_for(seed));
            (apply_hsv(img, &params), AugmentDetail::Hsv { params })
        }
        AugmentMethod::Rhm => {
            let (out, target) = rhm_augment(img, cfg.require_pool()?, seed, cfg.mode);
            let target = target.to_string();
            (out, AugmentDetail::Rhm { target })
        }
        AugmentMethod::HistMatch => (
            hist_match_to_domain(img, cfg.require_pool()?, cfg.mode),
            AugmentDetail::HistMatch,
        ),
    };
    Ok(Augmented {
        id: id.to_string(),
        image,
        seed,
        detail,
    })
}

/// Loads and augments source records on the current rayon pool.
///
/// Output order follows input order. On failure the error of the earliest
/// failing record is returned, independent of scheduling.
pub fn augment_batch(records: &[ImageRecord], cfg: &AugmentConfig<'_>) -> Result<Vec<Augmented>> {
    if cfg.method.needs_pool() {
        cfg.require_pool()?;
    }
    if let Some(r) = records.iter().find(|r| r.domain == Domain::Target) {
        return Err(Error::TargetRecord(r.id.clone()));
    }
    let results: Vec<Result<Augmented>> = records
        .par_iter()
        .map(|r| {
            let img = r.load_image()?;
            augment_image(&r.id, &img, cfg).map_err(|e| Error::for_record(&r.id, e))
        })
        .collect();
    results.into_iter().collect()
}

/// In-memory variant of [`augment_batch`].
pub fn augment_images(items: &[(String, Image)], cfg: &AugmentConfig<'_>) -> Result<Vec<Augmented>> {
    if cfg.method.needs_pool() {
        cfg.require_pool()?;
    }
    let results: Vec<Result<Augmented>> = items
        .par_iter()
        .map(|(id, img)| augment_image(id, img, cfg))
        .collect();
    results.into_iter().collect()
}

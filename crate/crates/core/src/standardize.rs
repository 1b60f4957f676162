//! Per-image domain standardization: histogram equalization and Gray World.

use crate::histogram::{Lut, equalization_lut, quantize};
use crate::raster::Image;
use crate::rhm::image_cdfs;

/// Normalized level every channel mean is scaled to.
pub const GRAY_WORLD_TARGET: f64 = 0.5;

/// Equalizes each channel against its own CDF.
pub fn hist_equalize(img: &Image) -> Image {
    let cdfs = image_cdfs(img);
    let luts: [Lut; 3] = std::array::from_fn(|c| equalization_lut(&cdfs[c]));
    img.map_channels(&luts)
}

#[derive(Clone, Debug)]
pub struct GrayWorld {
    pub image: Image,
    /// Channels left unchanged because their mean was zero.
    pub skipped_channels: Vec<usize>,
}

fn channel_sums(img: &Image) -> [u64; 3] {
    let mut sums = [0u64; 3];
    for px in img.data().chunks_exact(3) {
        sums[0] += px[0] as u64;
        sums[1] += px[1] as u64;
        sums[2] += px[2] as u64;
    }
    sums
}

/// Per-channel normalized means.
pub fn channel_means(img: &Image) -> [f64; 3] {
    let denom = img.pixel_count() as f64 * 255.0;
    channel_sums(img).map(|s| s as f64 / denom)
}

/// Scales each channel so its mean becomes mid-gray: `v -> clamp(v * 0.5 / m_c)`.
pub fn gray_world(img: &Image) -> GrayWorld {
    let sums = channel_sums(img);
    let n = img.pixel_count() as f64;
    let mut skipped_channels = Vec::new();
    let luts: [Lut; 3] = std::array::from_fn(|c| {
        if sums[c] > 0 {
            // v / m_c == level * n / sum in level units
            let sum = sums[c] as f64;
            Lut::from_fn(|l| quantize(l as f64 * n / sum * GRAY_WORLD_TARGET))
        } else {
            skipped_channels.push(c);
            Lut::identity()
        }
    });
    if !skipped_channels.is_empty() {
        log::warn!("gray world: channels {skipped_channels:?} have zero mean and were left unchanged");
    }
    GrayWorld {
        image: img.map_channels(&luts),
        skipped_channels,
    }
}

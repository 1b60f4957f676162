//! Parameterized pixel-wise augmentations: per-channel affine, per-channel
//! gamma, and affine adjustment in HSV space.
//!
//! All transforms read 8-bit samples, work on normalized `[0, 1]` doubles,
//! clamp, and quantize once at the end with [`quantize`].

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::histogram::{Lut, quantize};
use crate::raster::Image;

pub const AFFINE_ALPHA_MEAN: f64 = 1.0;
pub const AFFINE_ALPHA_STD: f64 = 0.1;
pub const AFFINE_MU_MEAN: f64 = 0.0;
pub const AFFINE_MU_STD: f64 = 0.05;
pub const GAMMA_RANGE: (f64, f64) = (0.5, 1.5);
pub const HSV_ALPHA_RANGE: (f64, f64) = (0.7, 1.3);
pub const HSV_MU_RANGE: (f64, f64) = (-0.1, 0.1);

/// `v -> alpha[c] * v + mu[c]` per RGB channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub alpha: [f64; 3],
    pub mu: [f64; 3],
}

impl AffineParams {
    pub const IDENTITY: Self = Self {
        alpha: [1.0; 3],
        mu: [0.0; 3],
    };
}

/// `v -> v^gamma[c]` per RGB channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub gamma: [f64; 3],
}

impl GammaParams {
    pub const IDENTITY: Self = Self { gamma: [1.0; 3] };
}

/// Affine adjustment of H, S and V. Indexed `[H, S, V]`; `alpha[0]` is always 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsvParams {
    pub alpha: [f64; 3],
    pub mu: [f64; 3],
}

impl HsvParams {
    pub const IDENTITY: Self = Self {
        alpha: [1.0; 3],
        mu: [0.0; 3],
    };

    /// Builds parameters with the hue scale fixed to 1.
    pub fn new(alpha_s: f64, alpha_v: f64, mu: [f64; 3]) -> Self {
        Self {
            alpha: [1.0, alpha_s, alpha_v],
            mu,
        }
    }
}

/// One realization of a pixel-wise spectral shift.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralTransform {
    Identity,
    Affine(AffineParams),
    Gamma(GammaParams),
    Hsv(HsvParams),
    /// Per-channel lookup tables, e.g. from histogram matching.
    Matching(Box<[Lut; 3]>),
}

impl SpectralTransform {
    pub fn apply(&self, img: &Image) -> Image {
        match self {
            SpectralTransform::Identity => img.clone(),
            SpectralTransform::Affine(p) => apply_affine(img, p),
            SpectralTransform::Gamma(p) => apply_gamma(img, p),
            SpectralTransform::Hsv(p) => apply_hsv(img, p),
            SpectralTransform::Matching(luts) => img.map_channels(luts),
        }
    }
}

pub fn sample_affine<R: Rng + ?Sized>(rng: &mut R) -> AffineParams {
    let alpha = Normal::new(AFFINE_ALPHA_MEAN, AFFINE_ALPHA_STD).expect("valid std");
    let mu = Normal::new(AFFINE_MU_MEAN, AFFINE_MU_STD).expect("valid std");
    let a = [alpha.sample(rng), alpha.sample(rng), alpha.sample(rng)];
    let m = [mu.sample(rng), mu.sample(rng), mu.sample(rng)];
    AffineParams { alpha: a, mu: m }
}

pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R) -> GammaParams {
    let dist = Uniform::new_inclusive(GAMMA_RANGE.0, GAMMA_RANGE.1).expect("valid range");
    GammaParams {
        gamma: [dist.sample(rng), dist.sample(rng), dist.sample(rng)],
    }
}

pub fn sample_hsv<R: Rng + ?Sized>(rng: &mut R) -> HsvParams {
    let alpha = Uniform::new_inclusive(HSV_ALPHA_RANGE.0, HSV_ALPHA_RANGE.1).expect("valid range");
    let mu = Uniform::new_inclusive(HSV_MU_RANGE.0, HSV_MU_RANGE.1).expect("valid range");
    let alpha_s = alpha.sample(rng);
    let alpha_v = alpha.sample(rng);
    HsvParams::new(alpha_s, alpha_v, [mu.sample(rng), mu.sample(rng), mu.sample(rng)])
}

#[inline]
fn normalize(level: u8) -> f64 {
    level as f64 / 255.0
}

/// Per-channel tables for a function of the normalized intensity.
fn channel_luts(f: impl Fn(usize, f64) -> f64) -> [Lut; 3] {
    std::array::from_fn(|c| Lut::from_fn(|l| quantize(f(c, normalize(l)))))
}

pub fn apply_affine(img: &Image, p: &AffineParams) -> Image {
    img.map_channels(&channel_luts(|c, v| p.alpha[c] * v + p.mu[c]))
}

pub fn apply_gamma(img: &Image, p: &GammaParams) -> Image {
    img.map_channels(&channel_luts(|c, v| v.powf(p.gamma[c])))
}

/// Hexcone RGB to HSV. Hue is in `[0, 1)` (degrees / 360) and 0 for grays.
pub fn rgb_to_hsv(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta <= 0.0 {
        return [0.0, s, v];
    }
    let sector = if max == r {
        (g - b) / delta
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = sector / 6.0;
    if h < 0.0 {
        h += 1.0;
    }
    if h >= 1.0 {
        h -= 1.0;
    }
    [h, s, v]
}

pub fn hsv_to_rgb(hsv: [f64; 3]) -> [f64; 3] {
    let [h, s, v] = hsv;
    if s <= 0.0 {
        return [v, v, v];
    }
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector as u8 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

/// Shifts hue (wrapping modulo 1) and scales/offsets saturation and value
/// (clamped to `[0, 1]`).
pub fn adjust_hsv(hsv: [f64; 3], p: &HsvParams) -> [f64; 3] {
    let h = (p.alpha[0] * hsv[0] + p.mu[0]).rem_euclid(1.0);
    let s = (p.alpha[1] * hsv[1] + p.mu[1]).clamp(0.0, 1.0);
    let v = (p.alpha[2] * hsv[2] + p.mu[2]).clamp(0.0, 1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    [if h >= 1.0 { 0.0 } else { h }, s, v]
}

pub fn apply_hsv(img: &Image, p: &HsvParams) -> Image {
    img.map_pixels(|px| {
        let hsv = rgb_to_hsv([normalize(px[0]), normalize(px[1]), normalize(px[2])]);
        let rgb = hsv_to_rgb(adjust_hsv(hsv, p));
        [quantize(rgb[0]), quantize(rgb[1]), quantize(rgb[2])]
    })
}

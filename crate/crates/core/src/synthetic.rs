//! Small deterministic two-domain dataset: textured ground with rectangular
//! buildings, where the target domain is the same kind of scene seen through
//! a fixed spectral shift.

use std::path::Path;

use rand::Rng;

use crate::dataset::{Domain, ImageRecord, Manifest};
use crate::error::{Error, Result};
use crate::raster::{Image, Mask, save_image, save_mask};
use crate::rhm::rng_for;
use crate::transforms::{AffineParams, GammaParams, apply_affine, apply_gamma};

#[derive(Clone, Copy, Debug)]
pub struct SyntheticConfig {
    pub width: u32,
    pub height: u32,
    /// Images per domain.
    pub per_domain: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            per_domain: 5,
            seed: 7,
        }
    }
}

pub struct SyntheticItem {
    pub id: String,
    pub group: String,
    pub domain: Domain,
    pub image: Image,
    pub label: Mask,
}

const SOURCE_GROUPS: [&str; 2] = ["city-a", "city-b"];
const TARGET_GROUPS: [&str; 2] = ["city-c", "city-d"];

const TARGET_GAMMA: GammaParams = GammaParams {
    gamma: [0.75, 0.9, 1.35],
};
const TARGET_AFFINE: AffineParams = AffineParams {
    alpha: [0.9, 1.05, 0.8],
    mu: [0.06, 0.0, -0.02],
};

fn scene(rng: &mut impl Rng, w: u32, h: u32) -> (Image, Mask) {
    let ground = [
        rng.random_range(70..120i32),
        rng.random_range(90..140i32),
        rng.random_range(50..90i32),
    ];
    let mut data = Vec::with_capacity((w * h * 3) as usize);
    for _ in 0..w * h {
        let n = rng.random_range(-18..=18);
        for g in ground {
            data.push((g + n + rng.random_range(-6..=6)).clamp(0, 255) as u8);
        }
    }
    let mut label = vec![0u8; (w * h) as usize];

    let buildings = rng.random_range(2..=4);
    for _ in 0..buildings {
        let bw = rng.random_range(w / 8..=w / 3);
        let bh = rng.random_range(h / 8..=h / 3);
        let x0 = rng.random_range(0..w - bw);
        let y0 = rng.random_range(0..h - bh);
        let roof = rng.random_range(140..230i32);
        let tint = [rng.random_range(-12..=12), 0, rng.random_range(-12..=12)];
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                let i = (y * w + x) as usize;
                label[i] = 1;
                let n = rng.random_range(-5..=5);
                for c in 0..3 {
                    data[i * 3 + c] = (roof + tint[c] + n).clamp(0, 255) as u8;
                }
            }
        }
    }
    (
        Image::new(w, h, data).expect("sized buffer"),
        Mask::new(w, h, label).expect("sized buffer"),
    )
}

/// Generates `per_domain` source and `per_domain` target scenes.
pub fn generate(cfg: &SyntheticConfig) -> Vec<SyntheticItem> {
    let mut rng = rng_for(cfg.seed);
    let mut items = Vec::with_capacity(cfg.per_domain * 2);
    for (domain, groups, prefix) in [
        (Domain::Source, SOURCE_GROUPS, "src"),
        (Domain::Target, TARGET_GROUPS, "tgt"),
    ] {
        for i in 0..cfg.per_domain {
            let (mut image, label) = scene(&mut rng, cfg.width, cfg.height);
            if domain == Domain::Target {
                image = apply_affine(&apply_gamma(&image, &TARGET_GAMMA), &TARGET_AFFINE);
            }
            items.push(SyntheticItem {
                id: format!("{prefix}_{i:02}"),
                group: groups[i % groups.len()].to_string(),
                domain,
                image,
                label,
            });
        }
    }
    items
}

/// Writes images, labels and `manifest.json` under `out_dir`.
pub fn write_dataset(cfg: &SyntheticConfig, out_dir: &Path) -> Result<Manifest> {
    let images = out_dir.join("images");
    let labels = out_dir.join("labels");
    for d in [&images, &labels] {
        std::fs::create_dir_all(d).map_err(|source| Error::Io {
            path: d.clone(),
            source,
        })?;
    }
    let mut records = Vec::new();
    for item in generate(cfg) {
        let image_path = images.join(format!("{}.png", item.id));
        let label_path = labels.join(format!("{}.png", item.id));
        save_image(&image_path, &item.image)?;
        save_mask(&label_path, &item.label)?;
        records.push(ImageRecord {
            id: item.id,
            image_path,
            label_path: Some(label_path),
            domain: item.domain,
            group: item.group,
        });
    }
    let manifest = Manifest::new(records)?;
    let path = out_dir.join("manifest.json");
    let mut json = manifest.to_json(out_dir)?;
    json.push('\n');
    std::fs::write(&path, json).map_err(|source| Error::Io { path, source })?;
    Ok(manifest)
}

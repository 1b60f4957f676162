#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_shift::histogram::{ChannelHistogram, LEVELS};
use spectral_shift::{Cdf, Image, InverseMode, Mask};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic")
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

/// Histogram with a random number of occupied bins and random counts.
pub fn random_histogram(rng: &mut impl Rng) -> ChannelHistogram {
    let mut bins = [0u64; LEVELS];
    match rng.random_range(0..4) {
        // dense
        0 => bins.iter_mut().for_each(|b| *b = rng.random_range(1..100)),
        // single spike
        1 => bins[rng.random_range(0..LEVELS)] = rng.random_range(1..1000),
        // sparse
        _ => {
            let k = rng.random_range(1..40);
            for _ in 0..k {
                bins[rng.random_range(0..LEVELS)] += rng.random_range(1..500);
            }
        }
    }
    ChannelHistogram::from_bins(bins)
}

pub fn random_cdf(rng: &mut impl Rng) -> Cdf {
    spectral_shift::histogram::to_cdf(&random_histogram(rng)).unwrap()
}

/// Scans the defining set of the inverse directly, O(256^2).
pub fn brute_force_matching(source: &Cdf, target: &Cdf, mode: InverseMode) -> [u8; 256] {
    let f = source.values();
    let g = target.values();
    let mut map = [0u8; 256];
    for x in 0..LEVELS {
        let p = f[x];
        map[x] = match mode {
            InverseMode::Paper => {
                let mut best: Option<usize> = None;
                for (y, &gy) in g.iter().enumerate() {
                    if gy <= p {
                        best = Some(best.map_or(y, |b: usize| b.max(y)));
                    }
                }
                best.unwrap_or(0) as u8
            }
            InverseMode::Conventional => {
                let mut best: Option<usize> = None;
                for (y, &gy) in g.iter().enumerate() {
                    if gy >= p {
                        best = Some(best.map_or(y, |b: usize| b.min(y)));
                    }
                }
                best.expect("G(255) = 1 >= p") as u8
            }
        };
    }
    map
}

pub fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> Image {
    // random per-image level range so histograms differ in shape
    let lo = rng.random_range(0..=200u8);
    let hi = rng.random_range(lo..=255u8);
    let data = (0..w * h * 3).map(|_| rng.random_range(lo..=hi)).collect();
    Image::new(w, h, data).unwrap()
}

/// Every level appears at least once in every channel.
pub fn full_range_image(rng: &mut impl Rng, w: u32, h: u32) -> Image {
    let n = (w * h) as usize;
    assert!(n >= 256);
    let mut data = vec![0u8; n * 3];
    for c in 0..3 {
        let mut levels: Vec<u8> = (0..n).map(|i| if i < 256 { i as u8 } else { rng.random() }).collect();
        for i in (1..n).rev() {
            levels.swap(i, rng.random_range(0..=i));
        }
        for (i, v) in levels.into_iter().enumerate() {
            data[i * 3 + c] = v;
        }
    }
    Image::new(w, h, data).unwrap()
}

pub fn random_mask(rng: &mut impl Rng, w: u32, h: u32) -> Mask {
    let density: f64 = rng.random();
    let data = (0..w * h).map(|_| rng.random_bool(density) as u8).collect();
    Mask::new(w, h, data).unwrap()
}

/// Single pass over pixels: (intersection, union) per group.
pub fn brute_force_iou(items: &[(String, Mask, Mask)]) -> BTreeMap<String, (u64, u64)> {
    let mut out: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (g, p, t) in items {
        let e = out.entry(g.clone()).or_default();
        for i in 0..p.data().len() {
            let (a, b) = (p.data()[i] == 1, t.data()[i] == 1);
            if a && b {
                e.0 += 1;
            }
            if a || b {
                e.1 += 1;
            }
        }
    }
    out
}

/// All files under `dir` keyed by relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[&str]) -> CliOutput {
    cli_env(args, &[])
}

pub fn cli_env(args: &[&str], env: &[(&str, &str)]) -> CliOutput {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_spectral-shift"));
    cmd.args(args).env_remove("SPECTRAL_SHIFT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn cli");
    CliOutput {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Writes a manifest JSON for `(id, image file, label file, domain, group)` rows.
pub fn write_manifest(dir: &Path, rows: &[(&str, &str, Option<&str>, &str, &str)]) -> PathBuf {
    let records: Vec<serde_json::Value> = rows
        .iter()
        .map(|(id, image, label, domain, group)| {
            serde_json::json!({
                "id": id, "image": image, "label": label, "domain": domain, "group": group
            })
        })
        .collect();
    let path = dir.join("manifest.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&serde_json::json!({"version": "1", "records": records})).unwrap(),
    )
    .unwrap();
    path
}

pub fn validate_against_schema(schema_file: &str, instance: &serde_json::Value) -> Result<(), String> {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_dir().join(schema_file)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    if errors.is_empty() { Ok(()) } else { Err(errors.join("; ")) }
}

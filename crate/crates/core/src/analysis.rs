//! Measurement: entropy change caused by an augmentation, IoU with per-group,
//! overall and group-average aggregation, and the invariance gap.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::channel_entropy;
use crate::raster::{Image, Mask};

pub const DEFAULT_ENTROPY_BINS: usize = 20;

/// Neumaier-compensated sum, accumulated in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(compensated_sum(values.iter().copied()) / values.len() as f64)
}

/// Shannon entropy (bits) of each channel.
pub fn image_entropy(img: &Image) -> Result<[f64; 3]> {
    let [r, g, b] = img.channel_histograms();
    Ok([channel_entropy(&r)?, channel_entropy(&g)?, channel_entropy(&b)?])
}

/// Sum over channels of `H(src_c) - H(aug_c)`. Positive values mean the
/// augmentation removed information.
pub fn delta_entropy(src: &Image, aug: &Image) -> Result<f64> {
    let (a, b) = (image_entropy(src)?, image_entropy(aug)?);
    Ok((a[0] - b[0]) + (a[1] - b[1]) + (a[2] - b[2]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDelta {
    pub id: String,
    pub delta_h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub per_pair: Vec<PairDelta>,
    pub mean_delta_h: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Equal-width bins over `[min, max]` of `values`; the last bin is closed.
/// A zero-width range yields a single bin holding everything.
pub fn fixed_width_histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![HistogramBin {
            lower: lo,
            upper: hi,
            count: values.len(),
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lower: lo + width * i as f64,
            upper: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
            count: 0,
        })
        .collect();
    for &v in values {
        let idx = (((v - lo) / width).floor() as usize).min(bins - 1);
        out[idx].count += 1;
    }
    out
}

pub struct EntropyPair<'a> {
    pub id: &'a str,
    pub source: &'a Image,
    pub augmented: &'a Image,
}

/// Per-pair entropy change, its mean, and a histogram of the changes.
pub fn expected_delta_entropy(pairs: &[EntropyPair<'_>], bins: usize) -> Result<EntropyReport> {
    if pairs.is_empty() {
        return Err(Error::EmptySequence);
    }
    let per_pair = pairs
        .par_iter()
        .map(|p| {
            delta_entropy(p.source, p.augmented)
                .map(|delta_h| PairDelta {
                    id: p.id.to_string(),
                    delta_h,
                })
                .map_err(|e| Error::for_record(p.id, e))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport::from_deltas(per_pair, bins))
}

impl EntropyReport {
    pub fn from_deltas(per_pair: Vec<PairDelta>, bins: usize) -> Self {
        let values: Vec<f64> = per_pair.iter().map(|p| p.delta_h).collect();
        let mean_delta_h = mean(&values).unwrap_or(0.0);
        let histogram = fixed_width_histogram(&values, bins);
        Self {
            per_pair,
            mean_delta_h,
            histogram,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Writes `id,delta_h` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["id", "delta_h"]).map_err(csv_err)?;
        for p in &self.per_pair {
            w.write_record([p.id.clone(), p.delta_h.to_string()]).map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Writes `lower,upper,count` rows.
    pub fn write_histogram_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["lower", "upper", "count"]).map_err(csv_err)?;
        for b in &self.histogram {
            w.serialize((b.lower, b.upper, b.count)).map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Intersection and union pixel counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IouCounts {
    pub intersection: u64,
    pub union: u64,
}

impl IouCounts {
    /// `intersection / union`, or 1.0 when both masks were empty.
    pub fn iou(&self) -> f64 {
        if self.union == 0 {
            1.0
        } else {
            self.intersection as f64 / self.union as f64
        }
    }

    fn add(&mut self, other: IouCounts) {
        self.intersection += other.intersection;
        self.union += other.union;
    }
}

pub fn iou_counts(pred: &Mask, truth: &Mask) -> Result<IouCounts> {
    if pred.dimensions() != truth.dimensions() {
        return Err(Error::DimensionMismatch {
            id: None,
            expected: truth.dimensions(),
            actual: pred.dimensions(),
        });
    }
    let mut c = IouCounts::default();
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        c.intersection += (p & t) as u64;
        c.union += (p | t) as u64;
    }
    Ok(c)
}

pub fn iou(pred: &Mask, truth: &Mask) -> Result<f64> {
    iou_counts(pred, truth).map(|c| c.iou())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupIou {
    pub intersection: u64,
    pub union: u64,
    pub iou: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IouReport {
    pub per_group: BTreeMap<String, GroupIou>,
    /// IoU of the pixel counts summed over every item.
    pub overall_iou: f64,
    /// Unweighted mean of the per-group IoUs.
    pub city_average_iou: f64,
}

pub struct IouItem<'a> {
    pub id: &'a str,
    pub group: &'a str,
    pub pred: &'a Mask,
    pub truth: &'a Mask,
}

pub fn aggregate_iou(items: &[IouItem<'_>]) -> Result<IouReport> {
    if items.is_empty() {
        return Err(Error::EmptySequence);
    }
    let counts = items
        .par_iter()
        .map(|it| {
            iou_counts(it.pred, it.truth).map_err(|e| match e {
                Error::DimensionMismatch {
                    expected, actual, ..
                } => Error::DimensionMismatch {
                    id: Some(it.id.to_string()),
                    expected,
                    actual,
                },
                other => other,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut groups: BTreeMap<String, IouCounts> = BTreeMap::new();
    let mut total = IouCounts::default();
    for (it, c) in items.iter().zip(counts) {
        groups.entry(it.group.to_string()).or_default().add(c);
        total.add(c);
    }
    let per_group: BTreeMap<String, GroupIou> = groups
        .into_iter()
        .map(|(g, c)| {
            (
                g,
                GroupIou {
                    intersection: c.intersection,
                    union: c.union,
                    iou: c.iou(),
                },
            )
        })
        .collect();
    let group_ious: Vec<f64> = per_group.values().map(|g| g.iou).collect();
    Ok(IouReport {
        city_average_iou: mean(&group_ious)?,
        overall_iou: total.iou(),
        per_group,
    })
}

impl IouReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Writes `group,intersection,union,iou` rows followed by `Overall` and
    /// `City Average` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["group", "intersection", "union", "iou"])
            .map_err(csv_err)?;
        let (mut inter, mut uni) = (0u64, 0u64);
        for (g, v) in &self.per_group {
            inter += v.intersection;
            uni += v.union;
            w.write_record([
                g.clone(),
                v.intersection.to_string(),
                v.union.to_string(),
                v.iou.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.write_record([
            "Overall".to_string(),
            inter.to_string(),
            uni.to_string(),
            self.overall_iou.to_string(),
        ])
        .map_err(csv_err)?;
        w.write_record([
            "City Average".to_string(),
            String::new(),
            String::new(),
            self.city_average_iou.to_string(),
        ])
        .map_err(csv_err)?;
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardReport {
    /// Reward of the candidate model on spectrally shifted data.
    pub r_star: f64,
    /// Reward of the reference model on unshifted source data.
    pub r_zero: f64,
    pub gap: f64,
}

/// Mean of per-image rewards.
pub fn expected_reward(rewards: &[f64]) -> Result<f64> {
    if let Some(&bad) = rewards.iter().find(|r| !r.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    mean(rewards)
}

/// `r_star - r_zero`; near zero means the candidate is invariant to the
/// shift without losing accuracy against the reference.
pub fn invariance_gap(r_star: f64, r_zero: f64) -> Result<RewardReport> {
    for v in [r_star, r_zero] {
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
    }
    Ok(RewardReport {
        r_star,
        r_zero,
        gap: r_star - r_zero,
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Report(e.to_string())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(csv_err)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Report(e.to_string()))?;
    text.push('\n');
    let mut f = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

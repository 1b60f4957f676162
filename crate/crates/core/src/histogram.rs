//! 8-bit channel histograms, cumulative distributions and lookup tables.
//!
//! Everything that remaps pixel levels goes through a [`Lut`]. Matching
//! builds `x -> G^-1(F(x))` from a source CDF `F` and a target CDF `G`;
//! equalization builds `x -> round(255 * F(x))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of distinct 8-bit levels.
pub const LEVELS: usize = 256;

/// Pixel counts per 8-bit level for one channel.
#[derive(Clone, PartialEq, Eq)]
pub struct ChannelHistogram {
    bins: [u64; LEVELS],
    total: u64,
}

impl std::fmt::Debug for ChannelHistogram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let nonzero: Vec<(usize, u64)> = self
            .bins
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v, c))
            .collect();
        f.debug_struct("ChannelHistogram")
            .field("nonzero_bins", &nonzero)
            .field("total", &self.total)
            .finish()
    }
}

impl Default for ChannelHistogram {
    fn default() -> Self {
        Self {
            bins: [0; LEVELS],
            total: 0,
        }
    }
}

impl ChannelHistogram {
    /// Builds a histogram from explicit bin counts. The total is derived.
    pub fn from_bins(bins: [u64; LEVELS]) -> Self {
        let total = bins.iter().sum();
        Self { bins, total }
    }

    pub fn bins(&self) -> &[u64; LEVELS] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, level: u8) -> u64 {
        self.bins[level as usize]
    }

    #[inline]
    pub(crate) fn add(&mut self, level: u8) {
        self.bins[level as usize] += 1;
        self.total += 1;
    }

    /// Bin-wise sum in place.
    pub fn merge(&mut self, other: &ChannelHistogram) {
        for (a, b) in self.bins.iter_mut().zip(other.bins.iter()) {
            *a += *b;
        }
        self.total += other.total;
    }

    /// Largest single-bin probability. Zero for an empty histogram.
    pub fn max_probability(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let max = self.bins.iter().copied().max().unwrap_or(0);
        max as f64 / self.total as f64
    }
}

/// Counts the occurrences of every level in `channel`.
pub fn compute_histogram(channel: &[u8]) -> Result<ChannelHistogram> {
    if channel.is_empty() {
        return Err(Error::EmptyChannel);
    }
    let mut hist = ChannelHistogram::default();
    for &v in channel {
        hist.add(v);
    }
    Ok(hist)
}

/// Bin-wise sum of a non-empty sequence of histograms.
pub fn accumulate_histograms<'a, I>(hists: I) -> Result<ChannelHistogram>
where
    I: IntoIterator<Item = &'a ChannelHistogram>,
{
    let mut iter = hists.into_iter();
    let mut acc = iter.next().ok_or(Error::EmptySequence)?.clone();
    for h in iter {
        acc.merge(h);
    }
    Ok(acc)
}

/// Normalized cumulative histogram. `values[255]` is exactly 1.
#[derive(Clone, PartialEq)]
pub struct Cdf {
    values: [f64; LEVELS],
}

impl std::fmt::Debug for Cdf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.values.iter()).finish()
    }
}

impl Cdf {
    pub fn values(&self) -> &[f64; LEVELS] {
        &self.values
    }

    pub fn at(&self, level: u8) -> f64 {
        self.values[level as usize]
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }
}

/// `values[y] = sum(bins[0..=y]) / total`, with the last entry pinned to 1.
pub fn to_cdf(hist: &ChannelHistogram) -> Result<Cdf> {
    if hist.total == 0 {
        return Err(Error::ZeroTotal);
    }
    let total = hist.total as f64;
    let mut values = [0.0; LEVELS];
    let mut running = 0u64;
    for (v, &count) in values.iter_mut().zip(hist.bins.iter()) {
        running += count;
        *v = running as f64 / total;
    }
    values[LEVELS - 1] = 1.0;
    Ok(Cdf { values })
}

/// Which generalized inverse of the target CDF to use when matching.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum InverseMode {
    /// `G^-1(p) = max { y : G(y) <= p }`, and 0 when that set is empty.
    /// Any level with `F(x) = 1` maps to 255.
    #[default]
    Paper,
    /// `G^-1(p) = min { y : G(y) >= p }`.
    Conventional,
}

impl std::fmt::Display for InverseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InverseMode::Paper => "paper",
            InverseMode::Conventional => "conventional",
        })
    }
}

/// 256-entry pixel mapping.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lut {
    map: [u8; LEVELS],
}

impl std::fmt::Debug for Lut {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.map.iter()).finish()
    }
}

impl Lut {
    pub fn identity() -> Self {
        Self::from_fn(|v| v)
    }

    pub fn constant(level: u8) -> Self {
        Self { map: [level; LEVELS] }
    }

    pub fn from_fn(f: impl Fn(u8) -> u8) -> Self {
        let mut map = [0u8; LEVELS];
        for (i, m) in map.iter_mut().enumerate() {
            *m = f(i as u8);
        }
        Self { map }
    }

    pub fn from_map(map: [u8; LEVELS]) -> Self {
        Self { map }
    }

    pub fn map(&self) -> &[u8; LEVELS] {
        &self.map
    }

    #[inline]
    pub fn get(&self, level: u8) -> u8 {
        self.map[level as usize]
    }

    pub fn is_monotone(&self) -> bool {
        self.map.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m as usize)
    }
}

/// Builds the matching table `x -> G^-1(F(x))` for one channel.
///
/// Both inverses are found by binary search over the monotone target CDF.
pub fn build_matching_lut(source: &Cdf, target: &Cdf, mode: InverseMode) -> Lut {
    let g = &target.values;
    let mut map = [0u8; LEVELS];
    for (m, &p) in map.iter_mut().zip(source.values.iter()) {
        let y = match mode {
            // number of y with G(y) <= p; the set is a prefix of 0..=255
            InverseMode::Paper => g.partition_point(|&gy| gy <= p).saturating_sub(1),
            InverseMode::Conventional => g.partition_point(|&gy| gy < p).min(LEVELS - 1),
        };
        *m = y as u8;
    }
    Lut { map }
}

/// `x -> round(255 * F(x))`, rounding half away from zero.
pub fn equalization_lut(source: &Cdf) -> Lut {
    let mut map = [0u8; LEVELS];
    for (m, &p) in map.iter_mut().zip(source.values.iter()) {
        *m = quantize(p);
    }
    Lut { map }
}

/// Maps a normalized intensity to an 8-bit level: clamp to [0,1], scale by 255,
/// round half away from zero.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Applies `lut` to every sample of a single-channel plane.
pub fn apply_lut(channel: &[u8], lut: &Lut) -> Vec<u8> {
    channel.iter().map(|&v| lut.map[v as usize]).collect()
}

/// Applies one table per channel to interleaved RGB samples in place.
pub fn apply_luts_rgb(data: &mut [u8], luts: &[Lut; 3]) {
    let [r, g, b] = luts;
    for px in data.chunks_exact_mut(3) {
        px[0] = r.map[px[0] as usize];
        px[1] = g.map[px[1] as usize];
        px[2] = b.map[px[2] as usize];
    }
}

/// Shannon entropy of the level distribution, in bits.
pub fn channel_entropy(hist: &ChannelHistogram) -> Result<f64> {
    if hist.total == 0 {
        return Err(Error::ZeroTotal);
    }
    let total = hist.total as f64;
    let h = hist
        .bins
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    // -0.0 for a single symbol
    Ok(h.max(0.0))
}

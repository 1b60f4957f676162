//! In-memory rasters and PNG encode/decode.

use std::path::Path;

use image::{ColorType, ImageReader};

use crate::error::{Error, Result};
use crate::histogram::{ChannelHistogram, Lut, apply_luts_rgb};

/// 8-bit RGB raster, row-major, interleaved.
#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} samples for {width}x{height} RGB, got {}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image where every pixel has the same color.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        let n = width as usize * height as usize;
        Self::new(width, height, rgb.repeat(n))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Copies out one channel (0 = R, 1 = G, 2 = B) as a plane.
    pub fn channel(&self, c: usize) -> Vec<u8> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    /// Per-channel histograms in a single pass.
    pub fn channel_histograms(&self) -> [ChannelHistogram; 3] {
        let mut hists: [ChannelHistogram; 3] = Default::default();
        for px in self.data.chunks_exact(3) {
            hists[0].add(px[0]);
            hists[1].add(px[1]);
            hists[2].add(px[2]);
        }
        hists
    }

    /// Applies one lookup table per channel.
    pub fn map_channels(&self, luts: &[Lut; 3]) -> Image {
        let mut data = self.data.clone();
        apply_luts_rgb(&mut data, luts);
        Image { data, ..*self }
    }

    /// Applies a function to every pixel.
    pub fn map_pixels(&self, mut f: impl FnMut([u8; 3]) -> [u8; 3]) -> Image {
        let mut data = self.data.clone();
        for px in data.chunks_exact_mut(3) {
            let out = f([px[0], px[1], px[2]]);
            px.copy_from_slice(&out);
        }
        Image { data, ..*self }
    }
}

/// Binary label raster: 0 = background, 1 = foreground.
#[derive(Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for Mask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.foreground_count())
            .finish()
    }
}

impl Mask {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} mask values for {width}x{height}, got {}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&v| v > 1) {
            return Err(Error::Shape(format!("mask value {bad} is not 0 or 1")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_bools(width: u32, height: u32, values: &[bool]) -> Result<Self> {
        Self::new(width, height, values.iter().map(|&b| b as u8).collect())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn foreground_count(&self) -> u64 {
        self.data.iter().map(|&v| v as u64).sum()
    }
}

fn read_dynamic(path: &Path) -> Result<image::DynamicImage> {
    if !path.exists() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    let reader = ImageReader::open(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    if reader.format() != Some(image::ImageFormat::Png) {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "not a PNG file".into(),
        });
    }
    reader.decode().map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads an 8-bit, 3-channel PNG without alpha.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let img = read_dynamic(path)?;
    if img.color() != ColorType::Rgb8 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("expected 8-bit RGB, found {:?}", img.color()),
        });
    }
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    Image::new(w, h, rgb.into_raw())
}

pub fn save_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    image::save_buffer_with_format(
        path,
        &img.data,
        img.width,
        img.height,
        image::ExtendedColorType::Rgb8,
        image::ImageFormat::Png,
    )
    .map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads an 8-bit single-channel PNG whose values are 0 or 255.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let img = read_dynamic(path)?;
    if img.color() != ColorType::L8 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("expected 8-bit single-channel mask, found {:?}", img.color()),
        });
    }
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    let mut data = gray.into_raw();
    for (i, v) in data.iter_mut().enumerate() {
        *v = match *v {
            0 => 0,
            255 => 1,
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!(
                        "mask value {other} at pixel ({}, {}) is not 0 or 255",
                        i % w as usize,
                        i / w as usize
                    ),
                });
            }
        };
    }
    Mask::new(w, h, data)
}

pub fn save_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    let path = path.as_ref();
    let encoded: Vec<u8> = mask.data.iter().map(|&v| v * 255).collect();
    image::save_buffer_with_format(
        path,
        &encoded,
        mask.width,
        mask.height,
        image::ExtendedColorType::L8,
        image::ImageFormat::Png,
    )
    .map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

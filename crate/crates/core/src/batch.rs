//! Contiguous `(N, H, W, 3)` batch buffers, as handed over by data loaders.
//!
//! These functions never touch the caller's buffer; each returns one new
//! allocation of the same shape. Per-image seeds are derived exactly as in
//! [`augment_batch`](crate::rhm::augment_batch), using the supplied id or the
//! decimal batch index when no ids are given.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::InverseMode;
use crate::raster::Image;
use crate::rhm::{AugmentConfig, AugmentDetail, AugmentMethod, SeedPolicy, TargetPool, augment_image};
use crate::standardize::{gray_world, hist_equalize};
use crate::transforms::SpectralTransform;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatchShape {
    pub n: usize,
    pub height: usize,
    pub width: usize,
}

impl BatchShape {
    /// Validates an `(N, H, W, C)` shape against a buffer length.
    pub fn from_dims(dims: &[usize], len: usize) -> Result<Self> {
        let [n, height, width, channels] = dims else {
            return Err(Error::Shape(format!(
                "expected 4 dimensions (N, H, W, 3), got {}",
                dims.len()
            )));
        };
        if *channels != 3 {
            return Err(Error::Shape(format!(
                "dimension 3 (channels) must be 3, got {channels}"
            )));
        }
        for (name, v) in [("1 (height)", height), ("2 (width)", width)] {
            if *v == 0 {
                return Err(Error::Shape(format!("dimension {name} must be positive")));
            }
        }
        if *height > u32::MAX as usize || *width > u32::MAX as usize {
            return Err(Error::Shape("image dimensions exceed u32".into()));
        }
        let expected = n * height * width * 3;
        if expected != len {
            return Err(Error::Shape(format!(
                "shape ({n}, {height}, {width}, 3) needs {expected} bytes, buffer has {len}"
            )));
        }
        Ok(Self {
            n: *n,
            height: *height,
            width: *width,
        })
    }

    pub fn image_len(&self) -> usize {
        self.height * self.width * 3
    }
}

/// Operation applied to every image of a batch.
#[derive(Clone, Debug)]
pub enum BatchOp<'a> {
    /// Fixed parameters for every image.
    Transform(SpectralTransform),
    /// Parameters or targets drawn per image from derived seeds.
    Augment(AugmentConfig<'a>),
    HistEqualize,
    GrayWorld,
}

#[derive(Clone, Debug)]
pub struct BatchOutput {
    pub data: Vec<u8>,
    /// Chosen target id per image for RHM, otherwise `None`.
    pub targets: Vec<Option<String>>,
}

fn batch_ids(n: usize, ids: Option<&[String]>) -> Result<Vec<String>> {
    match ids {
        Some(ids) if ids.len() != n => Err(Error::Shape(format!(
            "dimension 0 (batch) is {n} but {} ids were given",
            ids.len()
        ))),
        Some(ids) => Ok(ids.to_vec()),
        None => Ok((0..n).map(|i| i.to_string()).collect()),
    }
}

pub fn transform_batch(
    buffer: &[u8],
    dims: &[usize],
    op: &BatchOp<'_>,
    ids: Option<&[String]>,
) -> Result<BatchOutput> {
    let shape = BatchShape::from_dims(dims, buffer.len())?;
    let ids = batch_ids(shape.n, ids)?;
    if let BatchOp::Augment(cfg) = op {
        if cfg.method.needs_pool() && cfg.pool.is_none() {
            return Err(Error::MissingPool(cfg.method.name().to_string()));
        }
    }
    let mut data = vec![0u8; buffer.len()];
    let mut targets = vec![None; shape.n];
    if shape.n == 0 {
        return Ok(BatchOutput { data, targets });
    }
    let step = shape.image_len();
    data.par_chunks_mut(step)
        .zip(targets.par_iter_mut())
        .zip(buffer.par_chunks(step))
        .zip(ids.par_iter())
        .try_for_each(|(((out, target), input), id)| -> Result<()> {
            let img = Image::new(shape.width as u32, shape.height as u32, input.to_vec())?;
            let result = match op {
                BatchOp::Transform(t) => t.apply(&img),
                BatchOp::HistEqualize => hist_equalize(&img),
                BatchOp::GrayWorld => gray_world(&img).image,
                BatchOp::Augment(cfg) => {
                    let a = augment_image(id, &img, cfg)?;
                    if let AugmentDetail::Rhm { target: t } = a.detail {
                        *target = Some(t);
                    }
                    a.image
                }
            };
            out.copy_from_slice(result.data());
            Ok(())
        })?;
    Ok(BatchOutput { data, targets })
}

/// RHM over a batch buffer; returns the augmented batch and chosen target ids.
pub fn rhm_augment_batch(
    buffer: &[u8],
    dims: &[usize],
    pool: &TargetPool,
    seed: u64,
    epoch: u64,
    mode: InverseMode,
    ids: Option<&[String]>,
) -> Result<(Vec<u8>, Vec<String>)> {
    let cfg = AugmentConfig {
        method: AugmentMethod::Rhm,
        pool: Some(pool),
        policy: SeedPolicy::new(seed),
        epoch,
        mode,
    };
    let out = transform_batch(buffer, dims, &BatchOp::Augment(cfg), ids)?;
    let targets = out
        .targets
        .into_iter()
        .map(|t| t.expect("rhm always records a target"))
        .collect();
    Ok((out.data, targets))
}

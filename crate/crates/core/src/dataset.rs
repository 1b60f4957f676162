//! Dataset manifests: which images belong to the source and target domains.
//!
//! A manifest is a JSON document:
//!
//! ```json
//! {
//!   "version": "1",
//!   "records": [
//!     { "id": "austin1", "image": "src/austin1.png", "label": "gt/austin1.png",
//!       "domain": "source", "group": "austin" }
//!   ]
//! }
//! ```
//!
//! Paths are relative to the directory containing the manifest.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Image, Mask, load_image, load_mask};

pub const MANIFEST_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Source,
    Target,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRecord {
    pub id: String,
    pub image_path: PathBuf,
    pub label_path: Option<PathBuf>,
    pub domain: Domain,
    pub group: String,
}

impl ImageRecord {
    pub fn load_image(&self) -> Result<Image> {
        load_image(&self.image_path).map_err(|e| Error::for_record(&self.id, e))
    }

    /// Loads the label mask, or `None` when the record has no label.
    pub fn load_label(&self) -> Result<Option<Mask>> {
        self.label_path
            .as_ref()
            .map(|p| load_mask(p).map_err(|e| Error::for_record(&self.id, e)))
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub version: String,
    pub records: Vec<ImageRecord>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    version: String,
    records: Vec<RawRecord>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    image: PathBuf,
    #[serde(default)]
    label: Option<PathBuf>,
    domain: Domain,
    group: String,
}

impl Manifest {
    /// Validates records. Paths are taken as given.
    pub fn new(records: Vec<ImageRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyManifest);
        }
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self {
            version: MANIFEST_VERSION.to_string(),
            records,
        })
    }

    pub fn records_in(&self, domain: Domain) -> impl Iterator<Item = &ImageRecord> {
        self.records.iter().filter(move |r| r.domain == domain)
    }

    pub fn source_records(&self) -> Vec<ImageRecord> {
        self.records_in(Domain::Source).cloned().collect()
    }

    pub fn target_records(&self) -> Vec<ImageRecord> {
        self.records_in(Domain::Target).cloned().collect()
    }

    /// Serializes with paths made relative to `base` where possible.
    pub fn to_json(&self, base: &Path) -> Result<String> {
        let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).to_path_buf();
        let raw = RawManifest {
            version: self.version.clone(),
            records: self
                .records
                .iter()
                .map(|r| RawRecord {
                    id: r.id.clone(),
                    image: rel(&r.image_path),
                    label: r.label_path.as_deref().map(rel),
                    domain: r.domain,
                    group: r.group.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).map_err(|e| Error::Report(e.to_string()))
    }
}

/// Reads, parses and validates a manifest, resolving record paths against
/// the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_manifest(&text, path)
}

/// Parses manifest text as if it were read from `path`.
pub fn parse_manifest(text: &str, path: &Path) -> Result<Manifest> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawManifest = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: format!("field `{}`: {}", e.path(), e.inner()),
    })?;
    if raw.version != MANIFEST_VERSION {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!(
                "field `version`: unsupported version {:?}, expected {MANIFEST_VERSION:?}",
                raw.version
            ),
        });
    }
    let base = path.parent().unwrap_or(Path::new(""));
    let records = raw
        .records
        .into_iter()
        .map(|r| ImageRecord {
            image_path: base.join(&r.image),
            label_path: r.label.map(|l| base.join(l)),
            id: r.id,
            domain: r.domain,
            group: r.group,
        })
        .collect();
    Manifest::new(records)
}

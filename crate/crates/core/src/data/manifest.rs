//! JSON manifest describing a dataset on disk. Paths are resolved relative to
//! the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io, Dataset, PrototypeSet, ViewId, ViewMatrix};
use crate::error::{Error, Result};

/// A matrix file, optionally with its declared column count.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MatrixEntry {
    Path(PathBuf),
    Declared {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

impl MatrixEntry {
    fn path(&self) -> &Path {
        match self {
            MatrixEntry::Path(p) => p,
            MatrixEntry::Declared { path, .. } => path,
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            MatrixEntry::Path(_) => None,
            MatrixEntry::Declared { dim, .. } => *dim,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ViewEntry {
    pub view: ViewId,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AuxiliarySection {
    pub features: MatrixEntry,
    pub semantics: Vec<ViewEntry>,
    pub labels: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TargetSection {
    pub features: MatrixEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub auxiliary: AuxiliarySection,
    pub target: TargetSection,
    #[serde(default)]
    pub prototypes: Vec<ViewEntry>,
}

impl Manifest {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_view(base: &Path, path: &Path, dim: Option<usize>, view: ViewId) -> Result<ViewMatrix> {
    let m = ViewMatrix::load(resolve(base, path), view)?;
    if let Some(d) = dim {
        if m.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} has {} columns but is declared with {d}",
                path.display(),
                m.dim()
            )));
        }
    }
    Ok(m)
}

/// Loads and validates the dataset and prototypes named by a manifest.
pub fn load_manifest(manifest_path: impl AsRef<Path>) -> Result<(Dataset, Option<PrototypeSet>)> {
    let manifest_path = manifest_path.as_ref();
    let manifest = Manifest::from_file(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let aux = &manifest.auxiliary;
    let aux_features = load_view(base, aux.features.path(), aux.features.dim(), ViewId::Features)?;
    let aux_semantics = aux
        .semantics
        .iter()
        .map(|e| load_view(base, &e.path, e.dim, e.view))
        .collect::<Result<Vec<_>>>()?;
    let aux_labels = io::load_labels(resolve(base, &aux.labels))?;

    let tgt = &manifest.target;
    let tgt_features = load_view(base, tgt.features.path(), tgt.features.dim(), ViewId::Features)?;
    let tgt_labels = tgt
        .labels
        .as_ref()
        .map(|p| io::load_labels(resolve(base, p)))
        .transpose()?;

    let prototypes = if manifest.prototypes.is_empty() {
        None
    } else {
        let mut classes: Option<Vec<String>> = None;
        let mut views = BTreeMap::new();
        for e in &manifest.prototypes {
            let (ids, m) = io::load_named_rows(resolve(base, &e.path))?;
            if let Some(d) = e.dim {
                if m.ncols() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "{} has {} columns but is declared with {d}",
                        e.path.display(),
                        m.ncols()
                    )));
                }
            }
            // align each view's rows with the first view's class order
            let m = match &classes {
                None => {
                    classes = Some(ids);
                    m
                }
                Some(first) => {
                    let order = first
                        .iter()
                        .map(|c| {
                            ids.iter().position(|i| i == c).ok_or_else(|| {
                                Error::DimensionMismatch(format!(
                                    "class {c} lacks a prototype in view {}",
                                    e.view
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if ids.len() != first.len() {
                        return Err(Error::DimensionMismatch(format!(
                            "view {} has prototypes for {} classes, expected {}",
                            e.view,
                            ids.len(),
                            first.len()
                        )));
                    }
                    m.select_rows(order.iter())
                }
            };
            views.insert(e.view, m);
        }
        Some(PrototypeSet::new(classes.unwrap_or_default(), views)?)
    };

    let declared: Vec<String> = prototypes.as_ref().map(|p| p.classes().to_vec()).unwrap_or_default();
    let dataset = Dataset::new(
        aux_features,
        aux_semantics,
        &aux_labels,
        tgt_features,
        tgt_labels.as_deref(),
        &declared,
    )?;
    if let Some(p) = &prototypes {
        if let Some(extra) = dataset.target_classes().iter().find(|c| !p.classes().contains(c)) {
            log::warn!("target class {extra} has no prototype");
        }
    }
    Ok((dataset, prototypes))
}

pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Dataset> {
    load_manifest(manifest_path).map(|(d, _)| d)
}

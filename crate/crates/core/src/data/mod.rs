//! Dataset, view, prototype and label containers shared by the rest of the
//! crate. Everything here is immutable once constructed.

mod io;
mod manifest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_labels, load_matrix, load_named_rows, save_labels, save_matrix, save_named_rows};
pub use manifest::{load_dataset, load_manifest, AuxiliarySection, Manifest, MatrixEntry, TargetSection, ViewEntry};

/// Identifies one view of the data: low-level features, attributes, or word
/// vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViewId {
    #[serde(rename = "X")]
    Features,
    #[serde(rename = "A")]
    Attributes,
    #[serde(rename = "V")]
    WordVectors,
}

impl ViewId {
    pub const ALL: [ViewId; 3] = [ViewId::Features, ViewId::Attributes, ViewId::WordVectors];

    pub fn tag(self) -> &'static str {
        match self {
            ViewId::Features => "X",
            ViewId::Attributes => "A",
            ViewId::WordVectors => "V",
        }
    }

    pub fn is_semantic(self) -> bool {
        !matches!(self, ViewId::Features)
    }
}

impl fmt::Display for ViewId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ViewId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(ViewId::Features),
            "A" | "a" => Ok(ViewId::Attributes),
            "V" | "v" => Ok(ViewId::WordVectors),
            other => Err(Error::parse("view id", format!("unknown view '{other}'"))),
        }
    }
}

pub(crate) fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if !m[(r, c)].is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

/// One view of `n` instances: an `n x dim` real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewMatrix {
    data: DMatrix<f64>,
    view: ViewId,
}

impl ViewMatrix {
    pub fn new(data: DMatrix<f64>, view: ViewId) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!("view {view} has zero columns")));
        }
        check_finite(&data)?;
        Ok(Self { data, view })
    }

    pub fn from_rows(rows: &[Vec<f64>], view: ViewId) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "row {k} has {} entries, expected {dim}",
                r.len()
            )));
        }
        let data = DMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c]);
        Self::new(data, view)
    }

    pub fn load(path: impl AsRef<std::path::Path>, view: ViewId) -> Result<Self> {
        Self::new(load_matrix(path)?, view)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    pub fn view(&self) -> ViewId {
        self.view
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, k: usize) -> RowDVector<f64> {
        self.data.row(k).into_owned()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> ViewMatrix {
        Self {
            data: self.data.select_rows(rows.iter()),
            view: self.view,
        }
    }
}

/// Maps string class identifiers onto contiguous indices in lexicographic
/// order.
pub(crate) fn index_labels(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let lookup: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let idx = labels.iter().map(|l| lookup[l.as_str()]).collect();
    (classes, idx)
}

/// Auxiliary (source) and target data. Auxiliary and target class sets are
/// disjoint.
#[derive(Clone, Debug)]
pub struct Dataset {
    auxiliary_features: ViewMatrix,
    auxiliary_semantics: Vec<ViewMatrix>,
    auxiliary_labels: Vec<usize>,
    auxiliary_classes: Vec<String>,
    target_features: ViewMatrix,
    target_labels: Option<Vec<usize>>,
    target_classes: Vec<String>,
}

impl Dataset {
    /// Builds and validates a dataset.
    ///
    /// `target_classes` is the declared target class universe (for example
    /// the classes carrying prototypes); it is merged with any classes seen in
    /// `target_labels`.
    pub fn new(
        auxiliary_features: ViewMatrix,
        auxiliary_semantics: Vec<ViewMatrix>,
        auxiliary_labels: &[String],
        target_features: ViewMatrix,
        target_labels: Option<&[String]>,
        target_classes: &[String],
    ) -> Result<Self> {
        let n_s = auxiliary_features.nrows();
        if auxiliary_labels.len() != n_s {
            return Err(Error::DimensionMismatch(format!(
                "{} auxiliary labels for {n_s} auxiliary instances",
                auxiliary_labels.len()
            )));
        }
        for sem in &auxiliary_semantics {
            if sem.nrows() != n_s {
                return Err(Error::DimensionMismatch(format!(
                    "semantic view {} has {} rows, expected {n_s}",
                    sem.view(),
                    sem.nrows()
                )));
            }
        }
        if target_features.dim() != auxiliary_features.dim() {
            return Err(Error::DimensionMismatch(format!(
                "target features have {} columns, auxiliary features {}",
                target_features.dim(),
                auxiliary_features.dim()
            )));
        }
        let (auxiliary_classes, auxiliary_idx) = index_labels(auxiliary_labels);

        let mut universe: BTreeSet<String> = target_classes.iter().cloned().collect();
        if let Some(tl) = target_labels {
            if tl.len() != target_features.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "{} target labels for {} target instances",
                    tl.len(),
                    target_features.nrows()
                )));
            }
            universe.extend(tl.iter().cloned());
        }
        let overlap: Vec<String> = auxiliary_classes
            .iter()
            .filter(|c| universe.contains(*c))
            .cloned()
            .collect();
        if !overlap.is_empty() {
            return Err(Error::DisjointnessViolated(overlap));
        }
        let target_classes: Vec<String> = universe.into_iter().collect();
        let target_idx = target_labels.map(|tl| {
            let lookup: BTreeMap<&str, usize> =
                target_classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
            tl.iter().map(|l| lookup[l.as_str()]).collect::<Vec<_>>()
        });
        if let Some(idx) = &target_idx {
            let distinct: BTreeSet<usize> = idx.iter().copied().collect();
            if distinct.len() < 2 {
                return Err(Error::InvalidArgument(
                    "target labels must cover at least two classes".into(),
                ));
            }
        }
        Ok(Self {
            auxiliary_features,
            auxiliary_semantics,
            auxiliary_labels: auxiliary_idx,
            auxiliary_classes,
            target_features,
            target_labels: target_idx,
            target_classes,
        })
    }

    pub fn auxiliary_features(&self) -> &ViewMatrix {
        &self.auxiliary_features
    }

    pub fn auxiliary_semantics(&self) -> &[ViewMatrix] {
        &self.auxiliary_semantics
    }

    pub fn auxiliary_semantic(&self, view: ViewId) -> Option<&ViewMatrix> {
        self.auxiliary_semantics.iter().find(|v| v.view() == view)
    }

    pub fn auxiliary_labels(&self) -> &[usize] {
        &self.auxiliary_labels
    }

    pub fn auxiliary_classes(&self) -> &[String] {
        &self.auxiliary_classes
    }

    pub fn target_features(&self) -> &ViewMatrix {
        &self.target_features
    }

    pub fn target_labels(&self) -> Option<&[usize]> {
        self.target_labels.as_deref()
    }

    pub fn target_classes(&self) -> &[String] {
        &self.target_classes
    }

    pub fn n_auxiliary(&self) -> usize {
        self.auxiliary_features.nrows()
    }

    pub fn n_target(&self) -> usize {
        self.target_features.nrows()
    }
}

/// Class-level prototypes, one row per target class for every covered view.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeSet {
    classes: Vec<String>,
    views: BTreeMap<ViewId, DMatrix<f64>>,
}

impl PrototypeSet {
    /// `views` holds, per view, a matrix whose row `r` is the prototype of
    /// `classes[r]`. Classes are reordered lexicographically.
    pub fn new(classes: Vec<String>, views: BTreeMap<ViewId, DMatrix<f64>>) -> Result<Self> {
        let unique: BTreeSet<&String> = classes.iter().collect();
        if unique.len() != classes.len() {
            return Err(Error::InvalidArgument("duplicate prototype class".into()));
        }
        for (view, m) in &views {
            if m.nrows() != classes.len() {
                return Err(Error::DimensionMismatch(format!(
                    "view {view} has {} prototypes for {} classes",
                    m.nrows(),
                    classes.len()
                )));
            }
            check_finite(m)?;
        }
        let mut order: Vec<usize> = (0..classes.len()).collect();
        order.sort_by(|&a, &b| classes[a].cmp(&classes[b]));
        let classes = order.iter().map(|&i| classes[i].clone()).collect();
        let views = views
            .into_iter()
            .map(|(v, m)| (v, m.select_rows(order.iter())))
            .collect();
        Ok(Self { classes, views })
    }

    /// Binary class prototypes from instance-level attribute vectors: the
    /// per-class mean of each attribute, thresholded.
    pub fn from_instance_attributes(
        attributes: &DMatrix<f64>,
        labels: &[usize],
        classes: &[String],
        threshold: f64,
    ) -> Result<Self> {
        if labels.len() != attributes.nrows() {
            return Err(Error::DimensionMismatch("labels vs attribute rows".into()));
        }
        let mut sums = DMatrix::zeros(classes.len(), attributes.ncols());
        let mut counts = vec![0usize; classes.len()];
        for (k, &c) in labels.iter().enumerate() {
            if c >= classes.len() {
                return Err(Error::InvalidArgument(format!("label index {c} out of range")));
            }
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += attributes.row(k);
        }
        for (c, &n) in counts.iter().enumerate() {
            if n == 0 {
                return Err(Error::ClassAbsent(classes[c].clone()));
            }
            for d in 0..attributes.ncols() {
                let mean = sums[(c, d)] / n as f64;
                sums[(c, d)] = if mean > threshold { 1.0 } else { 0.0 };
            }
        }
        let mut views = BTreeMap::new();
        views.insert(ViewId::Attributes, sums);
        Self::new(classes.to_vec(), views)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn views(&self) -> impl Iterator<Item = ViewId> + '_ {
        self.views.keys().copied()
    }

    pub fn get(&self, view: ViewId) -> Option<&DMatrix<f64>> {
        self.views.get(&view)
    }

    pub fn prototype(&self, view: ViewId, class: &str) -> Option<RowDVector<f64>> {
        let idx = self.classes.iter().position(|c| c == class)?;
        self.views.get(&view).map(|m| m.row(idx).into_owned())
    }

    /// Fails unless the prototypes of `view` have `dim` columns.
    pub fn check_dim(&self, view: ViewId, dim: usize) -> Result<()> {
        match self.views.get(&view) {
            None => Err(Error::MissingView(view)),
            Some(m) if m.ncols() != dim => Err(Error::DimensionMismatch(format!(
                "prototypes of view {view} have {} columns, view has {dim}",
                m.ncols()
            ))),
            Some(_) => Ok(()),
        }
    }
}

/// Seed label matrix over (node, class): `+1` for the node's class, `-1` for
/// every other class, all zeros for unknown nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelMatrix {
    z: DMatrix<f64>,
}

impl LabelMatrix {
    pub fn unknown(n_nodes: usize, n_classes: usize) -> Self {
        Self {
            z: DMatrix::zeros(n_nodes, n_classes),
        }
    }

    pub fn from_assignments(n_nodes: usize, n_classes: usize, labelled: &[(usize, usize)]) -> Result<Self> {
        let mut m = Self::unknown(n_nodes, n_classes);
        for &(node, class) in labelled {
            m.set(node, class)?;
        }
        Ok(m)
    }

    pub fn set(&mut self, node: usize, class: usize) -> Result<()> {
        if node >= self.z.nrows() || class >= self.z.ncols() {
            return Err(Error::InvalidArgument(format!(
                "label ({node}, {class}) outside {}x{}",
                self.z.nrows(),
                self.z.ncols()
            )));
        }
        self.z.row_mut(node).fill(-1.0);
        self.z[(node, class)] = 1.0;
        Ok(())
    }

    pub fn label_of(&self, node: usize) -> Option<usize> {
        self.z.row(node).iter().position(|&v| v == 1.0)
    }

    pub fn is_labelled(&self, node: usize) -> bool {
        self.label_of(node).is_some()
    }

    pub fn n_labelled(&self) -> usize {
        (0..self.z.nrows()).filter(|&k| self.is_labelled(k)).count()
    }

    pub fn n_nodes(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.z.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.z
    }
}

//! Cross-view annotation through the embedding space: feature to attribute
//! (instance annotation), word vector to attribute (class description) and
//! attribute to word (naming a prototype against a vocabulary).

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, RowDVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{check_finite, load_named_rows, save_named_rows, ViewId};
use crate::error::{Error, Result};
use crate::linalg::pinv;
use crate::mvcca::MvccaModel;

pub const PINV_TOLERANCE: f64 = 1e-10;

/// Linear map `M = (W_i D_i) pinv(W_j D_j)` from view `i` rows to view `j`
/// rows.
#[derive(Clone, Debug)]
pub struct CrossViewMap {
    source: ViewId,
    target: ViewId,
    matrix: DMatrix<f64>,
    tolerance: f64,
}

impl CrossViewMap {
    pub fn new(model: &MvccaModel, source: ViewId, target: ViewId) -> Result<Self> {
        Self::with_tolerance(model, source, target, PINV_TOLERANCE)
    }

    pub fn with_tolerance(model: &MvccaModel, source: ViewId, target: ViewId, tolerance: f64) -> Result<Self> {
        let ws = model.weighted_projection(source)?;
        let wt = model.weighted_projection(target)?;
        Ok(Self {
            source,
            target,
            matrix: ws * pinv(&wt, tolerance),
            tolerance,
        })
    }

    pub fn source(&self) -> ViewId {
        self.source
    }

    pub fn target(&self) -> ViewId {
        self.target
    }

    /// `m_source x m_target`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn apply(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} map expects {} columns, got {}",
                self.source,
                self.matrix.nrows(),
                rows.ncols()
            )));
        }
        Ok(rows * &self.matrix)
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<RowDVector<f64>> {
        let m = self.apply(&DMatrix::from_row_slice(1, row.len(), row))?;
        Ok(m.row(0).into_owned())
    }
}

/// Word identifiers with their word vectors.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    words: Vec<String>,
    vectors: DMatrix<f64>,
}

impl Vocabulary {
    pub fn new(words: Vec<String>, vectors: DMatrix<f64>) -> Result<Self> {
        if words.len() != vectors.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} words for {} vectors",
                words.len(),
                vectors.nrows()
            )));
        }
        check_finite(&vectors)?;
        let mut seen = HashSet::new();
        for w in &words {
            if !seen.insert(w.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary word {w}")));
            }
        }
        Ok(Self { words, vectors })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (words, vectors) = load_named_rows(path)?;
        Self::new(words, vectors)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_named_rows(&self.words, &self.vectors, path)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vector(&self, word: &str) -> Option<RowDVector<f64>> {
        self.words
            .iter()
            .position(|w| w == word)
            .map(|k| self.vectors.row(k).into_owned())
    }

    /// Sum of the named word vectors, scaled to unit length.
    pub fn query_vector(&self, words: &[&str]) -> Result<RowDVector<f64>> {
        let mut sum = RowDVector::zeros(self.dim());
        for w in words {
            sum += self
                .vector(w)
                .ok_or_else(|| Error::InvalidArgument(format!("word {w} not in vocabulary")))?;
        }
        let norm = sum.norm();
        if norm > 0.0 {
            sum /= norm;
        }
        Ok(sum)
    }

    /// Word indices by descending cosine to `query`; ties keep vocabulary
    /// order.
    pub fn rank(&self, query: &[f64]) -> Result<Vec<(usize, f64)>> {
        if self.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if query.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "query of length {} against {}-dim vocabulary",
                query.len(),
                self.dim()
            )));
        }
        let qn = query.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let row = self.vectors.row(k);
                let denom = qn * row.norm();
                let dot: f64 = row.iter().zip(query).map(|(a, b)| a * b).sum();
                (k, if denom > 0.0 { dot / denom } else { 0.0 })
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(scored)
    }
}

/// Indices of the `k` largest scores, best first; ties to the lower index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Indices of the `k` smallest scores, lowest first; ties to the lower index.
pub fn bottom_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Number of discordant pairs between two rankings of the same items.
pub fn kendall_distance(a: &[usize], b: &[usize]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch("rankings differ in length".into()));
    }
    let mut seen = vec![false; a.len()];
    for &item in a {
        if item >= seen.len() || std::mem::replace(&mut seen[item], true) {
            return Err(Error::InvalidArgument("ranking is not a permutation".into()));
        }
    }
    let mut pos = vec![usize::MAX; a.len()];
    for (r, &item) in b.iter().enumerate() {
        if item >= pos.len() || pos[item] != usize::MAX {
            return Err(Error::InvalidArgument("ranking is not a permutation".into()));
        }
        pos[item] = r;
    }
    let mapped: Vec<usize> = a.iter().map(|&item| pos[item]).collect();
    let mut d = 0;
    for x in 0..mapped.len() {
        for y in x + 1..mapped.len() {
            if mapped[x] > mapped[y] {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// Attribute scores for feature rows.
pub fn instance_annotation(features: &DMatrix<f64>, model: &MvccaModel) -> Result<DMatrix<f64>> {
    CrossViewMap::new(model, ViewId::Features, ViewId::Attributes)?.apply(features)
}

/// Attribute scores for word-vector class prototypes.
pub fn class_description(word_vectors: &DMatrix<f64>, model: &MvccaModel) -> Result<DMatrix<f64>> {
    CrossViewMap::new(model, ViewId::WordVectors, ViewId::Attributes)?.apply(word_vectors)
}

/// Result of naming one attribute prototype.
#[derive(Clone, Debug, Serialize)]
pub struct NameRanking {
    /// Vocabulary words, best first.
    pub ranked: Vec<String>,
    pub similarities: Vec<f64>,
    /// 1-based rank of the requested ground-truth word.
    pub truth_rank: Option<usize>,
}

/// Maps an attribute vector into word space and ranks the vocabulary.
pub fn prototype_to_name(
    attributes: &[f64],
    model: &MvccaModel,
    vocab: &Vocabulary,
    truth: Option<&str>,
) -> Result<NameRanking> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let map = CrossViewMap::new(model, ViewId::Attributes, ViewId::WordVectors)?;
    let mapped = map.apply_row(attributes)?;
    let v: Vec<f64> = mapped.iter().copied().collect();
    let ranked = vocab.rank(&v)?;
    let truth_rank = match truth {
        Some(t) => Some(
            ranked
                .iter()
                .position(|&(k, _)| vocab.words()[k] == t)
                .map(|p| p + 1)
                .ok_or_else(|| Error::InvalidArgument(format!("word {t} not in vocabulary")))?,
        ),
        None => None,
    };
    Ok(NameRanking {
        ranked: ranked.iter().map(|&(k, _)| vocab.words()[k].clone()).collect(),
        similarities: ranked.iter().map(|&(_, s)| s).collect(),
        truth_rank,
    })
}

/// Serialisable record of one annotation query.
#[derive(Clone, Debug, Serialize)]
pub struct AnnotationOutput {
    pub scores: Vec<f64>,
    pub top_k: Vec<usize>,
    pub bottom_k: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<NameRanking>,
}

impl AnnotationOutput {
    pub fn from_scores(scores: &[f64], k: usize) -> Self {
        Self {
            scores: scores.to_vec(),
            top_k: top_k(scores, k),
            bottom_k: bottom_k(scores, k),
            ranks: None,
        }
    }
}

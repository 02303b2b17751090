//! End-to-end pipeline variants and the ablation grid.
//!
//! A [`Pipeline`] holds the per-dataset state that every variant shares: the
//! semantic projections learned on the auxiliary classes, the projected
//! target views, and fitted embeddings keyed by view subset. Variants select
//! the views, whether the embedding is used, the graph kinds, the recogniser,
//! the number of labelled instances per class and the prototype condition.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, MetricsReport};
use super::synth::{generate_synthetic, SynthConfig};
use crate::data::{load_manifest, Dataset, PrototypeSet, ViewId, ViewMatrix};
use crate::error::{Error, Result};
use crate::graphs::{GraphKind, GraphParams};
use crate::mvcca::{fit_mvcca, CovarianceRidge, EmbeddedView, MvccaModel, Weighting};
use crate::projection::{default_ridge, train_projection, ProjectionModel};
use crate::propagation::{embed_prototypes, recognize_embedded, RecognitionConfig, DEFAULT_ETA};

const NSHOT_STREAM: u64 = 0x05ee_d0f1_abe1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recognizer {
    /// Nearest prototype by cosine.
    Nn,
    /// Product of per-attribute posteriors against binary prototypes.
    Dap,
    /// Label propagation over the fused graphs.
    TmvHlp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Variant {
    pub name: String,
    pub views: Vec<ViewId>,
    pub embed: bool,
    pub graphs: Vec<GraphKind>,
    pub recognizer: Recognizer,
    pub n_shot: usize,
    pub use_prototypes: bool,
    pub weighting: Weighting,
}

impl Default for Variant {
    fn default() -> Self {
        Self {
            name: "tmv-hlp".into(),
            views: ViewId::ALL.to_vec(),
            embed: true,
            graphs: vec![GraphKind::TwoGraph, GraphKind::HeteroHyper],
            recognizer: Recognizer::TmvHlp,
            n_shot: 0,
            use_prototypes: true,
            weighting: Weighting::default(),
        }
    }
}

impl Variant {
    pub fn nn(name: &str, views: &[ViewId], embed: bool) -> Self {
        Self {
            name: name.into(),
            views: views.to_vec(),
            embed,
            graphs: vec![],
            recognizer: Recognizer::Nn,
            ..Self::default()
        }
    }

    pub fn tmv_hlp(name: &str, views: &[ViewId], graphs: &[GraphKind]) -> Self {
        Self {
            name: name.into(),
            views: views.to_vec(),
            graphs: graphs.to_vec(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidVariant(format!("{}: {m}", self.name)));
        if self.views.is_empty() {
            return bad("no views selected");
        }
        for (k, v) in self.views.iter().enumerate() {
            if self.views[..k].contains(v) {
                return bad("view listed twice");
            }
        }
        if !self.embed && self.views.contains(&ViewId::Features) {
            return bad("the feature view has no prototypes without the embedding");
        }
        if self.views.iter().all(|v| !v.is_semantic()) {
            return bad("at least one semantic view is required");
        }
        match self.recognizer {
            Recognizer::Dap => {
                if self.embed || self.views != [ViewId::Attributes] {
                    return bad("the attribute-posterior baseline works on projected attributes only");
                }
            }
            Recognizer::TmvHlp => {
                if self.graphs.is_empty() {
                    return bad("no graph kinds selected");
                }
                if self.graphs.contains(&GraphKind::HeteroHyper) && (self.views.len() < 2 || !self.embed) {
                    return bad("heterogeneous hypergraphs need two or more embedded views");
                }
                if self.n_shot == 0 && !self.use_prototypes {
                    return Err(Error::NoSupervision);
                }
            }
            Recognizer::Nn => {}
        }
        if let Weighting::Hard { fraction } = self.weighting {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return bad("hard weighting fraction must lie in (0, 1]");
            }
        }
        Ok(())
    }
}

/// Numeric settings shared by all variants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub params: GraphParams,
    pub eta: f64,
    /// Ridge of the semantic projections; `None` uses the data-scaled
    /// default.
    pub ridge: Option<f64>,
    pub eps: CovarianceRidge,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            params: GraphParams::default(),
            eta: DEFAULT_ETA,
            ridge: None,
            eps: CovarianceRidge::default(),
        }
    }
}

/// Per-variant result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub variant: Variant,
    /// Target instances used as labelled seeds.
    pub labelled: Vec<usize>,
    /// Predicted class index for every target instance.
    pub predictions: Vec<usize>,
    /// Metrics over the unlabelled target instances, when labels are known.
    pub metrics: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl RunRecord {
    pub fn accuracy(&self) -> Option<f64> {
        self.metrics.as_ref().map(|m| m.mean_class_accuracy)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    pub graphs: Vec<String>,
    pub mean_graph_posteriors: Vec<f64>,
    pub isolated_nodes: usize,
    pub residual: f64,
    pub argmax_ties: usize,
}

pub struct Pipeline {
    dataset: Dataset,
    prototypes: PrototypeSet,
    projections: Vec<ProjectionModel>,
    target_views: Vec<ViewMatrix>,
    settings: Settings,
    embeddings: Mutex<HashMap<Vec<ViewId>, Arc<MvccaModel>>>,
}

impl Pipeline {
    /// Learns one projection per semantic view that has both auxiliary data
    /// and target prototypes, and projects the target features.
    pub fn fit(dataset: Dataset, prototypes: PrototypeSet, settings: Settings) -> Result<Self> {
        if prototypes.classes() != dataset.target_classes() {
            return Err(Error::InvalidArgument(
                "prototype classes differ from the dataset's target classes".into(),
            ));
        }
        let x_s = dataset.auxiliary_features();
        let ridge = settings.ridge.unwrap_or_else(|| default_ridge(x_s));
        let mut projections = Vec::new();
        let mut target_views = vec![dataset.target_features().clone()];
        for sem in dataset.auxiliary_semantics() {
            if prototypes.get(sem.view()).is_none() {
                continue;
            }
            prototypes.check_dim(sem.view(), sem.dim())?;
            let model = train_projection(x_s, sem, ridge)?;
            target_views.push(model.apply(dataset.target_features())?);
            projections.push(model);
        }
        if projections.is_empty() {
            return Err(Error::InvalidArgument("no semantic view has both auxiliary data and prototypes".into()));
        }
        Ok(Self {
            dataset,
            prototypes,
            projections,
            target_views,
            settings,
            embeddings: Mutex::new(HashMap::new()),
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn prototypes(&self) -> &PrototypeSet {
        &self.prototypes
    }

    pub fn projections(&self) -> &[ProjectionModel] {
        &self.projections
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    /// Target features followed by the projected semantic views.
    pub fn target_views(&self) -> &[ViewMatrix] {
        &self.target_views
    }

    pub fn target_view(&self, view: ViewId) -> Result<&ViewMatrix> {
        self.target_views
            .iter()
            .find(|v| v.view() == view)
            .ok_or(Error::MissingView(view))
    }

    /// MVCCA over the given target views (in canonical order), cached.
    pub fn embedding(&self, views: &[ViewId]) -> Result<Arc<MvccaModel>> {
        let mut key = views.to_vec();
        key.sort();
        if let Some(m) = self.embeddings.lock().expect("embedding cache").get(&key) {
            return Ok(m.clone());
        }
        let mats = key
            .iter()
            .map(|&v| self.target_view(v).cloned())
            .collect::<Result<Vec<_>>>()?;
        let model = Arc::new(fit_mvcca(&mats, self.settings.eps)?);
        self.embeddings
            .lock()
            .expect("embedding cache")
            .insert(key, model.clone());
        Ok(model)
    }

    /// `n_shot` instances per class drawn deterministically from `seed`.
    pub fn sample_labelled(&self, n_shot: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
        if n_shot == 0 {
            return Ok(vec![]);
        }
        let labels = self.dataset.target_labels().ok_or(Error::MissingLabels)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ NSHOT_STREAM);
        let mut out = Vec::new();
        for c in 0..self.dataset.target_classes().len() {
            let mut members: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] == c).collect();
            if members.len() <= n_shot {
                return Err(Error::InvalidArgument(format!(
                    "class {} has {} instances, cannot label {n_shot} and keep one for evaluation",
                    self.dataset.target_classes()[c],
                    members.len()
                )));
            }
            members.shuffle(&mut rng);
            out.extend(members[..n_shot].iter().map(|&k| (k, c)));
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Instance and prototype rows of every variant view, unit-normalised,
    /// either raw or in the embedding.
    fn view_rows(&self, variant: &Variant) -> Result<(Vec<EmbeddedView>, Vec<EmbeddedView>)> {
        if variant.embed {
            let model = self.embedding(&variant.views)?;
            let model = (*model).clone().with_weighting(variant.weighting);
            let inst = variant
                .views
                .iter()
                .map(|&v| model.embed(self.target_view(v)?))
                .collect::<Result<Vec<_>>>()?;
            let protos = embed_prototypes(&model, &self.prototypes, &variant.views)?;
            Ok((inst, protos))
        } else {
            let mut inst = Vec::new();
            let mut protos = Vec::new();
            for &v in &variant.views {
                inst.push(EmbeddedView::from_unnormalized(self.target_view(v)?.data().clone(), v));
                let p = self.prototypes.get(v).ok_or(Error::MissingView(v))?;
                protos.push(EmbeddedView::from_unnormalized(p.clone(), v));
            }
            Ok((inst, protos))
        }
    }

    fn nearest_prototype(inst: &[EmbeddedView], protos: &[EmbeddedView]) -> Vec<usize> {
        let n = inst[0].nrows();
        let c = protos[0].nrows();
        let mut sim = DMatrix::zeros(n, c);
        for (i, p) in inst.iter().zip(protos) {
            sim += i.psi() * p.psi().transpose();
        }
        sim.row_iter()
            .map(|r| {
                let mut best = 0;
                for k in 1..c {
                    if r[k] > r[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }

    fn attribute_posterior(&self) -> Result<Vec<usize>> {
        let scores = self.target_view(ViewId::Attributes)?.data();
        let protos = self
            .prototypes
            .get(ViewId::Attributes)
            .ok_or(Error::MissingView(ViewId::Attributes))?;
        let n = scores.nrows();
        let tau: Vec<f64> = scores
            .column_iter()
            .map(|col| {
                let mean = col.mean();
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n.max(1) as f64;
                var.sqrt().max(1e-6)
            })
            .collect();
        let clamp = |p: f64| p.clamp(1e-12, 1.0 - 1e-12);
        let preds = (0..n)
            .map(|k| {
                let post: Vec<f64> = (0..scores.ncols())
                    .map(|m| clamp(1.0 / (1.0 + (-(scores[(k, m)] - 0.5) / tau[m]).exp())))
                    .collect();
                let mut best = (0, f64::NEG_INFINITY);
                for c in 0..protos.nrows() {
                    let ll: f64 = post
                        .iter()
                        .enumerate()
                        .map(|(m, &p)| if protos[(c, m)] > 0.5 { p.ln() } else { (1.0 - p).ln() })
                        .sum();
                    if ll > best.1 {
                        best = (c, ll);
                    }
                }
                best.0
            })
            .collect();
        Ok(preds)
    }

    pub fn run_variant(&self, variant: &Variant, seed: u64) -> Result<RunRecord> {
        variant.validate()?;
        let labelled = self.sample_labelled(variant.n_shot, seed)?;
        let n_classes = self.prototypes.n_classes();
        let mut diagnostics = None;
        let predictions = match variant.recognizer {
            Recognizer::Dap => self.attribute_posterior()?,
            Recognizer::Nn => {
                let (inst, protos) = self.view_rows(variant)?;
                Self::nearest_prototype(&inst, &protos)
            }
            Recognizer::TmvHlp => {
                let (inst, protos) = self.view_rows(variant)?;
                let n_nodes = inst[0].nrows() + if variant.use_prototypes { n_classes } else { 0 };
                let mut params = self.settings.params;
                if params.knn >= n_nodes {
                    log::info!("clamping knn {} to {}", params.knn, n_nodes - 1);
                    params.knn = n_nodes - 1;
                }
                let config = RecognitionConfig {
                    graph_kinds: variant.graphs.clone(),
                    params,
                    eta: self.settings.eta,
                    use_prototypes: variant.use_prototypes,
                };
                let rec = recognize_embedded(&inst, Some(&protos), &labelled, n_classes, &config)?;
                diagnostics = Some(Diagnostics {
                    graphs: rec.walk.graph_labels().to_vec(),
                    mean_graph_posteriors: rec.walk.mean_posteriors(),
                    isolated_nodes: rec.walk.isolated().len(),
                    residual: rec.result.residual(),
                    argmax_ties: rec.result.ties(),
                });
                rec.instance_predictions().to_vec()
            }
        };
        let metrics = match self.dataset.target_labels() {
            Some(truth) => {
                let eval: Vec<usize> = (0..truth.len())
                    .filter(|k| labelled.binary_search_by_key(k, |&(i, _)| i).is_err())
                    .collect();
                let p: Vec<usize> = eval.iter().map(|&k| predictions[k]).collect();
                let t: Vec<usize> = eval.iter().map(|&k| truth[k]).collect();
                Some(compute_metrics(&p, &t, n_classes, None)?)
            }
            None => None,
        };
        Ok(RunRecord {
            seed,
            variant: variant.clone(),
            labelled: labelled.iter().map(|&(k, _)| k).collect(),
            predictions,
            metrics,
            diagnostics,
        })
    }
}

/// Where the data of an experiment comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Generated per seed; the config's own seed is overridden.
    Synthetic(SynthConfig),
    Manifest(PathBuf),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SynthConfig::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub data: DataSource,
    pub settings: Settings,
    pub variants: Vec<Variant>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seeds: vec![0],
            data: DataSource::default(),
            settings: Settings::default(),
            variants: vec![Variant::default()],
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }
}

/// Builds the pipeline for one seed.
pub fn pipeline_for_seed(data: &DataSource, settings: Settings, seed: u64) -> Result<Pipeline> {
    let (dataset, prototypes) = match data {
        DataSource::Synthetic(cfg) => {
            let synth = generate_synthetic(&SynthConfig { seed, ..cfg.clone() })?;
            (synth.dataset, synth.prototypes)
        }
        DataSource::Manifest(path) => {
            let (ds, protos) = load_manifest(path)?;
            (ds, protos.ok_or_else(|| Error::InvalidArgument("manifest lists no prototypes".into()))?)
        }
    };
    Pipeline::fit(dataset, prototypes, settings)
}

/// Runs every variant for one seed.
pub fn run_experiment(config: &ExperimentConfig, seed: u64) -> Result<Vec<RunRecord>> {
    for v in &config.variants {
        v.validate()?;
    }
    let pipeline = pipeline_for_seed(&config.data, config.settings, seed)?;
    config
        .variants
        .iter()
        .map(|v| pipeline.run_variant(v, seed))
        .collect()
}

/// Runs the full seed-by-variant grid, seeds in parallel. Records come back
/// ordered by seed, then variant.
pub fn ablate(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let per_seed: Vec<Vec<RunRecord>> = config
        .seeds
        .par_iter()
        .map(|&s| run_experiment(config, s))
        .collect::<Result<_>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Mean accuracy per variant name over all records carrying metrics, in
/// first-seen order.
pub fn mean_accuracy(records: &[RunRecord]) -> Vec<(String, f64)> {
    let mut order: Vec<String> = Vec::new();
    let mut sums: HashMap<String, (f64, usize)> = HashMap::new();
    for r in records {
        if let Some(a) = r.accuracy() {
            let e = sums.entry(r.variant.name.clone()).or_insert_with(|| {
                order.push(r.variant.name.clone());
                (0.0, 0)
            });
            e.0 += a;
            e.1 += 1;
        }
    }
    order
        .into_iter()
        .map(|n| {
            let (s, c) = sums[&n];
            (n, s / c as f64)
        })
        .collect()
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes `<name>_seed<seed>.json` and a predictions file per record.
pub fn write_records(dir: impl AsRef<Path>, records: &[RunRecord], classes: Option<&[String]>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for r in records {
        let stem = format!("{}_seed{}", r.variant.name, r.seed);
        atomic_write(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(r)?.as_bytes())?;
        let lines: Vec<String> = r
            .predictions
            .iter()
            .map(|&p| classes.map_or_else(|| p.to_string(), |c| c[p].clone()))
            .collect();
        atomic_write(&dir.join(format!("{stem}_predictions.txt")), (lines.join("\n") + "\n").as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            n_aux_classes: 6,
            n_target_classes: 4,
            instances_per_class: 12,
            n_distractors: 2,
            ..SynthConfig::default()
        }
    }

    fn pipeline() -> Pipeline {
        pipeline_for_seed(&DataSource::Synthetic(small()), Settings::default(), 1).unwrap()
    }

    #[test]
    fn minimal_nn_variant_runs() {
        let p = pipeline();
        let r = p
            .run_variant(&Variant::nn("nn-a", &[ViewId::Attributes], false), 1)
            .unwrap();
        let m = r.metrics.unwrap();
        assert!((0.0..=1.0).contains(&m.mean_class_accuracy));
        assert_eq!(r.predictions.len(), 48);
    }

    #[test]
    fn minus_without_labels_is_unsupervised() {
        let v = Variant {
            use_prototypes: false,
            ..Variant::default()
        };
        assert!(matches!(v.validate(), Err(Error::NoSupervision)));
    }

    #[test]
    fn hetero_single_view_rejected() {
        let v = Variant::tmv_hlp("x", &[ViewId::Attributes], &[GraphKind::HeteroHyper]);
        assert!(matches!(v.validate(), Err(Error::InvalidVariant(_))));
    }

    #[test]
    fn features_without_embedding_rejected() {
        let v = Variant::nn("x", &[ViewId::Features, ViewId::Attributes], false);
        assert!(matches!(v.validate(), Err(Error::InvalidVariant(_))));
    }

    #[test]
    fn full_variant_reports_diagnostics() {
        let p = pipeline();
        let r = p.run_variant(&Variant::default(), 1).unwrap();
        let d = r.diagnostics.unwrap();
        assert_eq!(d.graphs.len(), 9);
        assert!(d.residual <= 1e-8);
    }

    #[test]
    fn nshot_excludes_labelled_from_evaluation() {
        let p = pipeline();
        let v = Variant {
            n_shot: 3,
            use_prototypes: false,
            ..Variant::default()
        };
        let r = p.run_variant(&v, 2).unwrap();
        assert_eq!(r.labelled.len(), 12);
        let counted: usize = r.metrics.unwrap().confusion.iter().flatten().sum();
        assert_eq!(counted, 48 - 12);
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = ExperimentConfig {
            seeds: vec![3, 4],
            data: DataSource::Synthetic(small()),
            variants: vec![Variant::default(), Variant::nn("nn-v", &[ViewId::WordVectors], false)],
            ..ExperimentConfig::default()
        };
        let a = ablate(&cfg).unwrap();
        let b = ablate(&cfg).unwrap();
        let ma: Vec<_> = a.iter().map(|r| r.metrics.clone()).collect();
        let mb: Vec<_> = b.iter().map(|r| r.metrics.clone()).collect();
        assert_eq!(ma, mb);
        assert_eq!(mean_accuracy(&a).len(), 2);
    }

    #[test]
    fn attribute_posterior_baseline_runs() {
        let p = pipeline();
        let v = Variant {
            name: "dap".into(),
            recognizer: Recognizer::Dap,
            views: vec![ViewId::Attributes],
            embed: false,
            ..Variant::default()
        };
        assert!(p.run_variant(&v, 0).unwrap().metrics.is_some());
    }
}

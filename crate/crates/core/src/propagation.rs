//! Random-walk fusion of several graphs over one node set and closed-form
//! label propagation.
//!
//! Each graph contributes a row-normalised transition matrix and a
//! degree-proportional stationary distribution. At node `k` a graph is chosen
//! with posterior `p(G|k) ∝ pi(k|G) p(G)` (uniform priors), giving the fused
//! transition `P(k,l) = sum_G p(k->l|G) p(G|k)` and stationary
//! `pi(k) = sum_G pi(k|G) p(G)`. With `Pi = diag(pi)` the Laplacian is
//! `L = Pi - (Pi P + P' Pi) / 2`, and propagated scores are
//! `Z_hat = eta (eta Pi + L)^{-1} Pi Z`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::{LabelMatrix, PrototypeSet, ViewId, ViewMatrix};
use crate::error::{Error, Result};
use crate::graphs::{build_graph_suite, GraphKind, GraphParams, NodeSet, SimilarityGraph};
use crate::mvcca::{EmbeddedView, MvccaModel};

pub const DEFAULT_ETA: f64 = 2.0;

const PI_FLOOR: f64 = 1e-12;

/// Row-normalised weights; rows without edges become self-loops. Returns the
/// matrix and the isolated rows.
pub fn per_graph_transition(g: &SimilarityGraph) -> (DMatrix<f64>, Vec<usize>) {
    let n = g.n_nodes();
    let deg = g.degrees();
    let mut p = DMatrix::zeros(n, n);
    for &(r, c, v) in g.entries() {
        p[(r, c)] = v / deg[r];
    }
    let mut isolated = Vec::new();
    for (k, &d) in deg.iter().enumerate() {
        if d <= 0.0 {
            p[(k, k)] = 1.0;
            isolated.push(k);
        }
    }
    (p, isolated)
}

/// `pi(k|G)`: node degree over total weight. All zeros for an empty graph.
pub fn graph_stationary(g: &SimilarityGraph) -> Vec<f64> {
    let deg = g.degrees();
    let total: f64 = deg.iter().sum();
    if total > 0.0 {
        deg.iter().map(|d| d / total).collect()
    } else {
        vec![0.0; deg.len()]
    }
}

/// Posterior over graphs at one node from the per-graph stationary masses
/// `pi(k|G)` and the priors. Falls back to the priors (flagged `true`) when
/// the node has no mass in any graph.
pub fn graph_posterior(stationary_at_k: &[f64], priors: &[f64]) -> (Vec<f64>, bool) {
    let joint: Vec<f64> = stationary_at_k.iter().zip(priors).map(|(s, p)| s * p).collect();
    let total: f64 = joint.iter().sum();
    if total > 0.0 {
        (joint.iter().map(|j| j / total).collect(), false)
    } else {
        let z: f64 = priors.iter().sum();
        (priors.iter().map(|p| p / z).collect(), true)
    }
}

/// Fused random walk over several graphs.
#[derive(Clone, Debug)]
pub struct WalkModel {
    transition: DMatrix<f64>,
    stationary: DVector<f64>,
    posteriors: DMatrix<f64>,
    priors: Vec<f64>,
    laplacian: DMatrix<f64>,
    isolated: Vec<usize>,
    posterior_fallback: Vec<usize>,
    graph_labels: Vec<String>,
}

pub fn fuse_walk(graphs: &[SimilarityGraph]) -> Result<WalkModel> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no graphs to fuse".into()))?;
    let n = first.n_nodes();
    if let Some(g) = graphs.iter().find(|g| g.n_nodes() != n) {
        return Err(Error::NodeSetMismatch(format!(
            "graph {} has {} nodes, expected {n}",
            g.label(),
            g.n_nodes()
        )));
    }
    let n_graphs = graphs.len();
    let priors = vec![1.0 / n_graphs as f64; n_graphs];
    let transitions: Vec<(DMatrix<f64>, Vec<usize>)> = graphs.iter().map(per_graph_transition).collect();
    let stationaries: Vec<Vec<f64>> = graphs.iter().map(graph_stationary).collect();

    let mut posteriors = DMatrix::zeros(n, n_graphs);
    let mut posterior_fallback = Vec::new();
    for k in 0..n {
        let at_k: Vec<f64> = stationaries.iter().map(|s| s[k]).collect();
        let (post, fallback) = graph_posterior(&at_k, &priors);
        if fallback {
            posterior_fallback.push(k);
        }
        for (g, p) in post.into_iter().enumerate() {
            posteriors[(k, g)] = p;
        }
    }

    let mut transition = DMatrix::zeros(n, n);
    for (g, (p, _)) in transitions.iter().enumerate() {
        for k in 0..n {
            let w = posteriors[(k, g)];
            if w != 0.0 {
                let add = p.row(k) * w;
                let mut row = transition.row_mut(k);
                row += add;
            }
        }
    }

    let mut stationary: DVector<f64> = DVector::zeros(n);
    for (s, &prior) in stationaries.iter().zip(&priors) {
        for k in 0..n {
            stationary[k] += s[k] * prior;
        }
    }
    stationary.apply(|v: &mut f64| *v = v.max(PI_FLOOR));
    let total = stationary.sum();
    stationary /= total;

    let isolated: Vec<usize> = (0..n)
        .filter(|k| transitions.iter().all(|(_, iso)| iso.contains(k)))
        .collect();
    if !isolated.is_empty() {
        log::warn!("{} nodes are isolated in every graph", isolated.len());
    }

    let pi = DMatrix::from_diagonal(&stationary);
    let pi_p = &pi * &transition;
    let laplacian = &pi - (&pi_p + pi_p.transpose()) * 0.5;

    Ok(WalkModel {
        transition,
        stationary,
        posteriors,
        priors,
        laplacian,
        isolated,
        posterior_fallback,
        graph_labels: graphs.iter().map(SimilarityGraph::label).collect(),
    })
}

impl WalkModel {
    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn stationary(&self) -> &DVector<f64> {
        &self.stationary
    }

    /// Node-by-graph posterior `p(G|k)`.
    pub fn posteriors(&self) -> &DMatrix<f64> {
        &self.posteriors
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Nodes without edges in any graph.
    pub fn isolated(&self) -> &[usize] {
        &self.isolated
    }

    /// Nodes whose graph posterior fell back to the priors.
    pub fn posterior_fallback(&self) -> &[usize] {
        &self.posterior_fallback
    }

    pub fn graph_labels(&self) -> &[String] {
        &self.graph_labels
    }

    pub fn n_nodes(&self) -> usize {
        self.stationary.len()
    }

    /// `eta * Pi + L`.
    pub fn system(&self, eta: f64) -> DMatrix<f64> {
        let mut a = self.laplacian.clone();
        for k in 0..self.n_nodes() {
            a[(k, k)] += eta * self.stationary[k];
        }
        a
    }

    /// Mean posterior of each graph over all nodes.
    pub fn mean_posteriors(&self) -> Vec<f64> {
        let n = self.n_nodes() as f64;
        self.posteriors.column_iter().map(|c| c.sum() / n).collect()
    }
}

#[derive(Clone, Debug)]
pub struct PropagationResult {
    scores: DMatrix<f64>,
    predictions: Vec<usize>,
    eta: f64,
    residual: f64,
    ties: usize,
}

impl PropagationResult {
    /// Node-by-class scores `Z_hat`.
    pub fn scores(&self) -> &DMatrix<f64> {
        &self.scores
    }

    /// Argmax class per node, ties to the lowest class index.
    pub fn predictions(&self) -> &[usize] {
        &self.predictions
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `max |(eta Pi + L) Z_hat - eta Pi Z|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn ties(&self) -> usize {
        self.ties
    }
}

fn argmax_rows(scores: &DMatrix<f64>) -> (Vec<usize>, usize) {
    let mut ties = 0;
    let preds = scores
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for c in 1..row.len() {
                if row[c] > row[best] {
                    best = c;
                }
            }
            if (0..row.len()).any(|c| c != best && row[c] == row[best]) {
                ties += 1;
            }
            best
        })
        .collect();
    (preds, ties)
}

pub fn propagate(model: &WalkModel, z: &LabelMatrix, eta: f64) -> Result<PropagationResult> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta must be > 0, got {eta}")));
    }
    if z.n_nodes() != model.n_nodes() {
        return Err(Error::NodeSetMismatch(format!(
            "label matrix has {} rows, walk has {} nodes",
            z.n_nodes(),
            model.n_nodes()
        )));
    }
    let a = model.system(eta);
    let mut rhs = z.as_matrix().clone();
    for k in 0..rhs.nrows() {
        rhs.row_mut(k).scale_mut(eta * model.stationary[k]);
    }
    let scores = a.clone().lu().solve(&rhs).ok_or(Error::SingularPropagation)?;
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularPropagation);
    }
    let residual = crate::linalg::max_abs(&(&a * &scores - &rhs));
    let (predictions, ties) = argmax_rows(&scores);
    if ties > 0 {
        log::debug!("{ties} argmax ties broken toward the lowest class index");
    }
    Ok(PropagationResult {
        scores,
        predictions,
        eta,
        residual,
        ties,
    })
}

/// Recognition settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecognitionConfig {
    pub graph_kinds: Vec<GraphKind>,
    pub params: GraphParams,
    pub eta: f64,
    /// Prototype nodes are part of the graph and labelled ("+"). When false
    /// only labelled instances seed the propagation ("-").
    pub use_prototypes: bool,
}

impl Default for RecognitionConfig {
    fn default() -> Self {
        Self {
            graph_kinds: vec![GraphKind::TwoGraph, GraphKind::HeteroHyper],
            params: GraphParams::default(),
            eta: DEFAULT_ETA,
            use_prototypes: true,
        }
    }
}

/// Outcome of recognition over the target instances.
#[derive(Clone, Debug)]
pub struct Recognition {
    pub result: PropagationResult,
    pub walk: WalkModel,
    pub n_instances: usize,
    /// Indices of target instances used as labelled seeds.
    pub labelled: Vec<usize>,
}

impl Recognition {
    /// Predicted class of every target instance (seeds included).
    pub fn instance_predictions(&self) -> &[usize] {
        &self.result.predictions()[..self.n_instances]
    }

    /// Target instances that were not seeds.
    pub fn unlabelled(&self) -> Vec<usize> {
        (0..self.n_instances).filter(|k| !self.labelled.contains(k)).collect()
    }
}

/// Unit-length mean of the attribute and word-vector prototype embeddings,
/// standing in for the missing feature-view prototypes.
pub fn synthesize_feature_prototypes(semantic: &[&EmbeddedView]) -> Result<EmbeddedView> {
    let first = semantic
        .first()
        .ok_or_else(|| Error::InvalidArgument("no semantic prototypes to synthesize from".into()))?;
    let mut sum = first.psi().clone();
    for v in &semantic[1..] {
        if v.psi().shape() != sum.shape() {
            return Err(Error::DimensionMismatch("prototype embeddings differ in shape".into()));
        }
        sum += v.psi();
    }
    sum /= semantic.len() as f64;
    Ok(EmbeddedView::from_unnormalized(sum, ViewId::Features))
}

/// Embeds prototypes of every semantic view in `views` through the model;
/// the feature view, when requested, gets synthesized prototypes.
pub fn embed_prototypes(model: &MvccaModel, prototypes: &PrototypeSet, views: &[ViewId]) -> Result<Vec<EmbeddedView>> {
    let mut semantic = Vec::new();
    for &v in views.iter().filter(|v| v.is_semantic()) {
        let p = prototypes.get(v).ok_or(Error::MissingView(v))?;
        if !model.has_view(v) {
            return Err(Error::MissingView(v));
        }
        semantic.push(model.embed_rows(v, p)?);
    }
    views
        .iter()
        .map(|&v| {
            if v.is_semantic() {
                Ok(semantic.iter().find(|e| e.view() == v).cloned().expect("embedded above"))
            } else {
                synthesize_feature_prototypes(&semantic.iter().collect::<Vec<_>>())
            }
        })
        .collect()
}

/// Label propagation over already-embedded views. `instances[i]` and
/// `prototypes[i]` (when given) must describe the same view; `labelled`
/// pairs an instance index with its class.
pub fn recognize_embedded(
    instances: &[EmbeddedView],
    prototypes: Option<&[EmbeddedView]>,
    labelled: &[(usize, usize)],
    n_classes: usize,
    config: &RecognitionConfig,
) -> Result<Recognition> {
    let n_instances = instances
        .first()
        .map(EmbeddedView::nrows)
        .ok_or_else(|| Error::InvalidArgument("no views".into()))?;
    let prototypes = if config.use_prototypes { prototypes } else { None };
    if prototypes.is_none() && labelled.is_empty() {
        return Err(Error::NoSupervision);
    }
    let views = match prototypes {
        Some(protos) => {
            if protos.len() != instances.len() {
                return Err(Error::DimensionMismatch("prototype views vs instance views".into()));
            }
            instances
                .iter()
                .zip(protos)
                .map(|(i, p)| {
                    if i.view() != p.view() {
                        return Err(Error::DimensionMismatch(format!(
                            "instance view {} paired with prototype view {}",
                            i.view(),
                            p.view()
                        )));
                    }
                    if p.nrows() != n_classes {
                        return Err(Error::DimensionMismatch(format!(
                            "{} prototypes for {n_classes} classes",
                            p.nrows()
                        )));
                    }
                    i.stacked(p)
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => instances.to_vec(),
    };
    let nodes = NodeSet::new(views, n_instances)?;
    let graphs = build_graph_suite(&nodes, &config.graph_kinds, config.params)?;
    let walk = fuse_walk(&graphs)?;

    let mut z = LabelMatrix::unknown(nodes.n_nodes(), n_classes);
    if prototypes.is_some() {
        for c in 0..n_classes {
            z.set(n_instances + c, c)?;
        }
    }
    for &(k, c) in labelled {
        if k >= n_instances {
            return Err(Error::InvalidArgument(format!("labelled instance {k} out of range")));
        }
        z.set(k, c)?;
    }
    let result = propagate(&walk, &z, config.eta)?;
    Ok(Recognition {
        result,
        walk,
        n_instances,
        labelled: labelled.iter().map(|&(k, _)| k).collect(),
    })
}

/// Embeds the target views and prototypes through the model, then runs
/// [`recognize_embedded`].
pub fn recognize(
    model: &MvccaModel,
    target_views: &[ViewMatrix],
    prototypes: Option<&PrototypeSet>,
    labelled: &[(usize, usize)],
    config: &RecognitionConfig,
) -> Result<Recognition> {
    let instances = target_views
        .iter()
        .map(|v| model.embed(v))
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<ViewId> = target_views.iter().map(ViewMatrix::view).collect();
    let protos = match prototypes.filter(|_| config.use_prototypes) {
        Some(p) => Some(embed_prototypes(model, p, &ids)?),
        None => None,
    };
    let n_classes = match (prototypes, labelled.iter().map(|&(_, c)| c + 1).max()) {
        (Some(p), _) => p.n_classes(),
        (None, Some(c)) => c,
        (None, None) => return Err(Error::NoSupervision),
    };
    recognize_embedded(&instances, protos.as_deref(), labelled, n_classes, config)
}

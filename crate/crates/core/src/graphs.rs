//! Similarity graphs over the embedded nodes (target instances followed by
//! class prototypes): within-view KNN 2-graphs, cross-view heterogeneous
//! hypergraphs and single-view homogeneous hypergraphs.
//!
//! Node similarity is `exp(<a,b>^2 / bandwidth)`, with the bandwidth set to
//! the median squared inner product over all node pairs of the two views.
//!
//! A hypergraph from view `i` to view `j` has one hyperedge per node `k`: the
//! `K_h` view-`j` nodes most similar to node `k` of view `i`. Before
//! selection the query-by-member similarity matrix is z-scored per query
//! (row), then per member (column). The stored hyperedge similarities are the
//! selected normalised scores shifted by the row minimum, so they are
//! nonnegative. Each hyperedge's column of the soft incidence matrix
//! `sh = strength * similarity` is scaled to unit l2 norm, and the pairwise
//! weight of nodes `o`, `l` is `sum_e sh(o,e) sh(l,e)`.

use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ViewId;
use crate::error::{Error, Result};
use crate::linalg::median;
use crate::mvcca::EmbeddedView;

pub const DEFAULT_KNN: usize = 30;
pub const DEFAULT_K_HYPER: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    TwoGraph,
    HeteroHyper,
    HomoHyper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    /// Neighbours kept per node when sparsifying.
    pub knn: usize,
    /// Hyperedge cardinality.
    pub k_hyper: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            knn: DEFAULT_KNN,
            k_hyper: DEFAULT_K_HYPER,
        }
    }
}

/// The embedded views of one node set. Rows `0..n_instances` are target
/// instances, the remaining rows are class prototypes, in the same order in
/// every view.
#[derive(Clone, Debug)]
pub struct NodeSet {
    views: Vec<EmbeddedView>,
    n_instances: usize,
}

impl NodeSet {
    pub fn new(views: Vec<EmbeddedView>, n_instances: usize) -> Result<Self> {
        let n = views.first().map(EmbeddedView::nrows).ok_or_else(|| {
            Error::InvalidArgument("a node set needs at least one view".into())
        })?;
        if let Some(v) = views.iter().find(|v| v.nrows() != n) {
            return Err(Error::NodeSetMismatch(format!(
                "view {} has {} nodes, expected {n}",
                v.view(),
                v.nrows()
            )));
        }
        if n_instances > n {
            return Err(Error::InvalidArgument(format!("{n_instances} instances among {n} nodes")));
        }
        Ok(Self { views, n_instances })
    }

    pub fn n_nodes(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn n_instances(&self) -> usize {
        self.n_instances
    }

    pub fn n_prototypes(&self) -> usize {
        self.n_nodes() - self.n_instances
    }

    pub fn view_ids(&self) -> Vec<ViewId> {
        self.views.iter().map(EmbeddedView::view).collect()
    }

    pub fn view(&self, id: ViewId) -> Result<&EmbeddedView> {
        self.views.iter().find(|v| v.view() == id).ok_or(Error::MissingView(id))
    }

    pub fn views(&self) -> &[EmbeddedView] {
        &self.views
    }
}

/// Symmetric, nonnegative, zero-diagonal weights over `n` nodes, stored as a
/// sorted coordinate list.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityGraph {
    kind: GraphKind,
    source: ViewId,
    target: ViewId,
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    knn: usize,
    k_hyper: Option<usize>,
    bandwidth: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphSidecar {
    kind: GraphKind,
    source: ViewId,
    target: ViewId,
    nodes: usize,
    knn: usize,
    k_hyper: Option<usize>,
    bandwidth: f64,
}

impl SimilarityGraph {
    /// Builds a graph from a dense weight matrix; the matrix must be square,
    /// symmetric, nonnegative, with a zero diagonal.
    pub fn from_dense(
        kind: GraphKind,
        source: ViewId,
        target: ViewId,
        w: &DMatrix<f64>,
        knn: usize,
        k_hyper: Option<usize>,
        bandwidth: f64,
    ) -> Result<Self> {
        let n = w.nrows();
        if w.ncols() != n {
            return Err(Error::DimensionMismatch("weight matrix is not square".into()));
        }
        let mut entries = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = w[(r, c)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!("weight ({r}, {c}) = {v}")));
                }
                if r == c && v != 0.0 {
                    return Err(Error::InvalidArgument("nonzero diagonal".into()));
                }
                if (v - w[(c, r)]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!("asymmetric weight at ({r}, {c})")));
                }
                if v > 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Ok(Self {
            kind,
            source,
            target,
            n,
            entries,
            knn,
            k_hyper,
            bandwidth,
        })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn source(&self) -> ViewId {
        self.source
    }

    pub fn target(&self) -> ViewId {
        self.target
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn knn(&self) -> usize {
        self.knn
    }

    pub fn k_hyper(&self) -> Option<usize> {
        self.k_hyper
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Short identifier such as `2gr:X`, `hete:A>V` or `homo:V`.
    pub fn label(&self) -> String {
        match self.kind {
            GraphKind::TwoGraph => format!("2gr:{}", self.source),
            GraphKind::HomoHyper => format!("homo:{}", self.source),
            GraphKind::HeteroHyper => format!("hete:{}>{}", self.source, self.target),
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            w[(r, c)] = v;
        }
        w
    }

    /// Degree (row sum) of every node.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(r, _, v) in &self.entries {
            d[r] += v;
        }
        d
    }

    /// Every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> SimilarityGraph {
        let mut g = self.clone();
        for e in &mut g.entries {
            e.2 *= factor;
        }
        g
    }

    /// Relabels nodes: node `k` of the result is node `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SimilarityGraph> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let mut inverse = vec![usize::MAX; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut g = self.clone();
        g.entries = self
            .entries
            .iter()
            .map(|&(r, c, v)| (inverse[r], inverse[c], v))
            .collect();
        g.entries.sort_by_key(|e| (e.0, e.1));
        Ok(g)
    }

    /// Writes `<stem>.csv` (row, col, weight triples) and `<stem>.json`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        use std::io::Write;
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{stem}.csv"));
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        for &(r, c, v) in &self.entries {
            writeln!(w, "{r},{c},{v:.16e}").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        let sidecar = GraphSidecar {
            kind: self.kind,
            source: self.source,
            target: self.target,
            nodes: self.n,
            knn: self.knn,
            k_hyper: self.k_hyper,
            bandwidth: self.bandwidth,
        };
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(format!("{stem}.json"));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let s: GraphSidecar =
            serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let path = dir.join(format!("{stem}.csv"));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = DMatrix::zeros(s.nodes, s.nodes);
        for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::parse(path.display().to_string(), format!("line {k}: '{line}'"));
            if f.len() != 3 {
                return Err(bad());
            }
            let r: usize = f[0].parse().map_err(|_| bad())?;
            let c: usize = f[1].parse().map_err(|_| bad())?;
            let v: f64 = f[2].parse().map_err(|_| bad())?;
            if r >= s.nodes || c >= s.nodes {
                return Err(bad());
            }
            w[(r, c)] = v;
        }
        Self::from_dense(s.kind, s.source, s.target, &w, s.knn, s.k_hyper, s.bandwidth)
    }
}

/// One hyperedge: the member nodes selected for a query node, their
/// normalised similarities and the mean of those similarities.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperedge {
    pub query: usize,
    pub members: Vec<usize>,
    pub similarities: Vec<f64>,
    pub strength: f64,
}

pub fn node_similarity(a: &[f64], b: &[f64], bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth must be > 0, got {bandwidth}")));
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((s * s / bandwidth).exp())
}

fn inner_products(a: &EmbeddedView, b: &EmbeddedView) -> Result<DMatrix<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "views {} ({}) and {} ({}) live in different spaces",
            a.view(),
            a.dim(),
            b.view(),
            b.dim()
        )));
    }
    Ok(a.psi() * b.psi().transpose())
}

fn median_of_squares(s: &DMatrix<f64>) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("empty view".into()));
    }
    let mut sq: Vec<f64> = s.iter().map(|v| v * v).collect();
    let m = median(&mut sq);
    if m > 0.0 && m.is_finite() {
        Ok(m)
    } else {
        Err(Error::DegenerateBandwidth)
    }
}

/// Median over all node pairs of the squared inner product between the two
/// views.
pub fn median_bandwidth(psi_i: &EmbeddedView, psi_j: &EmbeddedView) -> Result<f64> {
    median_of_squares(&inner_products(psi_i, psi_j)?)
}

/// Population z-score; all zeros when the standard deviation is below 1e-12.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("z-score needs at least two values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| (v - mean) / std).collect())
}

fn kernel(s: &DMatrix<f64>, bandwidth: f64) -> DMatrix<f64> {
    s.map(|v| (v * v / bandwidth).exp())
}

/// Indices of the `k` largest values, ties to the lower index.
fn top_k(values: &[f64], k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&l| Some(l) != skip).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Union KNN sparsification of a symmetric dense weight matrix: an edge is
/// kept when either endpoint ranks the other among its `k` heaviest
/// neighbours; symmetrised by max.
fn knn_sparsify(w: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = w.nrows();
    let mut out = DMatrix::zeros(n, n);
    for r in 0..n {
        let row: Vec<f64> = w.row(r).iter().copied().collect();
        for l in top_k(&row, k, Some(r)) {
            if row[l] > 0.0 {
                out[(r, l)] = row[l];
            }
        }
    }
    for r in 0..n {
        for c in (r + 1)..n {
            let v = out[(r, c)].max(out[(c, r)]);
            out[(r, c)] = v;
            out[(c, r)] = v;
        }
    }
    out
}

pub fn build_two_graph(psi: &EmbeddedView, knn: usize) -> Result<SimilarityGraph> {
    let n = psi.nrows();
    if knn == 0 || knn >= n {
        return Err(Error::InvalidArgument(format!("K = {knn} must be in 1..{n}")));
    }
    let s = inner_products(psi, psi)?;
    let bandwidth = median_of_squares(&s)?;
    let mut w = kernel(&s, bandwidth);
    w.fill_diagonal(0.0);
    let w = knn_sparsify(&w, knn);
    SimilarityGraph::from_dense(GraphKind::TwoGraph, psi.view(), psi.view(), &w, knn, None, bandwidth)
}

/// Hyperedges with `query` nodes drawn from one view and members from
/// another (or the same) view. Returns the hyperedges and the bandwidth.
pub fn hyperedges(query: &EmbeddedView, member: &EmbeddedView, k_hyper: usize) -> Result<(Vec<Hyperedge>, f64)> {
    let n = member.nrows();
    if query.nrows() != n {
        return Err(Error::NodeSetMismatch(format!(
            "query view has {} nodes, member view {n}",
            query.nrows()
        )));
    }
    if k_hyper == 0 || k_hyper >= n {
        return Err(Error::InvalidArgument(format!("K_h = {k_hyper} must be in 1..{n}")));
    }
    let s = inner_products(query, member)?;
    let bandwidth = median_of_squares(&s)?;
    let omega = kernel(&s, bandwidth);

    // per query
    let mut z = DMatrix::zeros(n, n);
    for k in 0..n {
        let row: Vec<f64> = omega.row(k).iter().copied().collect();
        for (l, v) in zscore(&row)?.into_iter().enumerate() {
            z[(k, l)] = v;
        }
    }
    // per member, across queries
    for l in 0..n {
        let col: Vec<f64> = z.column(l).iter().copied().collect();
        for (k, v) in zscore(&col)?.into_iter().enumerate() {
            z[(k, l)] = v;
        }
    }

    let edges = (0..n)
        .into_par_iter()
        .map(|k| {
            let row: Vec<f64> = z.row(k).iter().copied().collect();
            let floor = row.iter().copied().fold(f64::INFINITY, f64::min);
            let members = top_k(&row, k_hyper, None);
            let similarities: Vec<f64> = members.iter().map(|&l| row[l] - floor).collect();
            let strength = similarities.iter().sum::<f64>() / similarities.len() as f64;
            Hyperedge {
                query: k,
                members,
                similarities,
                strength,
            }
        })
        .collect();
    Ok((edges, bandwidth))
}

/// Soft incidence matrix (nodes x hyperedges) with every column scaled to
/// unit l2 norm.
pub fn soft_incidence(edges: &[Hyperedge], n_nodes: usize) -> DMatrix<f64> {
    let mut sh = DMatrix::zeros(n_nodes, edges.len());
    for (e, edge) in edges.iter().enumerate() {
        for (&l, &sim) in edge.members.iter().zip(&edge.similarities) {
            sh[(l, e)] = edge.strength * sim;
        }
        let norm = sh.column(e).norm();
        if norm > 0.0 {
            sh.column_mut(e).unscale_mut(norm);
        }
    }
    sh
}

/// Pairwise hyperedge similarity `sum_e sh(o,e) sh(l,e)` with a zero
/// diagonal, before KNN sparsification.
pub fn hyperedge_weights(edges: &[Hyperedge], n_nodes: usize) -> DMatrix<f64> {
    let sh = soft_incidence(edges, n_nodes);
    let mut w = DMatrix::zeros(n_nodes, n_nodes);
    for (e, edge) in edges.iter().enumerate() {
        for &o in &edge.members {
            for &l in &edge.members {
                if o != l {
                    w[(o, l)] += sh[(o, e)] * sh[(l, e)];
                }
            }
        }
    }
    w
}

fn hypergraph(
    kind: GraphKind,
    query: &EmbeddedView,
    member: &EmbeddedView,
    params: GraphParams,
) -> Result<SimilarityGraph> {
    let n = member.nrows();
    let (edges, bandwidth) = hyperedges(query, member, params.k_hyper)?;
    let w = hyperedge_weights(&edges, n);
    let w = knn_sparsify(&w, params.knn.min(n - 1));
    SimilarityGraph::from_dense(
        kind,
        query.view(),
        member.view(),
        &w,
        params.knn,
        Some(params.k_hyper),
        bandwidth,
    )
}

/// Heterogeneous hypergraph with query nodes from view `i` and hyperedge
/// members from view `j`.
pub fn build_hetero_hypergraph(nodes: &NodeSet, i: ViewId, j: ViewId, params: GraphParams) -> Result<SimilarityGraph> {
    if i == j {
        return Err(Error::InvalidArgument(
            "a heterogeneous hypergraph needs two distinct views".into(),
        ));
    }
    hypergraph(GraphKind::HeteroHyper, nodes.view(i)?, nodes.view(j)?, params)
}

pub fn build_homo_hypergraph(psi: &EmbeddedView, params: GraphParams) -> Result<SimilarityGraph> {
    hypergraph(GraphKind::HomoHyper, psi, psi, params)
}

/// All graphs of the requested kinds: one 2-graph and one homogeneous
/// hypergraph per view, one heterogeneous hypergraph per ordered view pair.
pub fn build_graph_suite(nodes: &NodeSet, kinds: &[GraphKind], params: GraphParams) -> Result<Vec<SimilarityGraph>> {
    let ids = nodes.view_ids();
    let mut jobs: Vec<(GraphKind, ViewId, ViewId)> = Vec::new();
    for &kind in kinds {
        match kind {
            GraphKind::TwoGraph | GraphKind::HomoHyper => jobs.extend(ids.iter().map(|&v| (kind, v, v))),
            GraphKind::HeteroHyper => {
                if ids.len() < 2 {
                    return Err(Error::InvalidVariant(
                        "heterogeneous hypergraphs need at least two views".into(),
                    ));
                }
                for &a in &ids {
                    for &b in &ids {
                        if a != b {
                            jobs.push((kind, a, b));
                        }
                    }
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(kind, a, b)| match kind {
            GraphKind::TwoGraph => build_two_graph(nodes.view(a)?, params.knn),
            GraphKind::HomoHyper => build_homo_hypergraph(nodes.view(a)?, params),
            GraphKind::HeteroHyper => build_hetero_hypergraph(nodes, a, b, params),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ev(rows: &[&[f64]], view: ViewId) -> EmbeddedView {
        let m = DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
        EmbeddedView::from_unnormalized(m, view)
    }

    fn random_view(n: usize, d: usize, seed: u64, view: ViewId) -> EmbeddedView {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        EmbeddedView::from_unnormalized(m, view)
    }

    fn check_valid(g: &SimilarityGraph) {
        let w = g.dense();
        for r in 0..w.nrows() {
            assert_eq!(w[(r, r)], 0.0);
            for c in 0..w.ncols() {
                assert!(w[(r, c)] >= 0.0);
                assert!((w[(r, c)] - w[(c, r)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn kernel_values() {
        let e = std::f64::consts::E;
        assert!((node_similarity(&[1.0, 0.0], &[1.0, 0.0], 1.0).unwrap() - e).abs() < 1e-12);
        assert_eq!(node_similarity(&[1.0, 0.0], &[0.0, 1.0], 0.3).unwrap(), 1.0);
        let b = [0.5, 0.75f64.sqrt()];
        assert!((node_similarity(&[1.0, 0.0], &b, 0.25).unwrap() - e).abs() < 1e-12);
        assert!(node_similarity(&[1.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn zscore_cases() {
        let z = zscore(&[1.0, 2.0, 3.0]).unwrap();
        let expect = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(zscore(&[4.0, 4.0, 4.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(zscore(&[0.0, 10.0]).unwrap(), vec![-1.0, 1.0]);
        assert!(zscore(&[1.0]).is_err());
    }

    #[test]
    fn bandwidth_matches_sort_oracle() {
        let a = random_view(10, 4, 1, ViewId::Attributes);
        let b = random_view(10, 4, 2, ViewId::WordVectors);
        let mut all = Vec::new();
        for k in 0..10 {
            for l in 0..10 {
                let s: f64 = (0..4).map(|d| a.psi()[(k, d)] * b.psi()[(l, d)]).sum();
                all.push(s * s);
            }
        }
        all.sort_by(f64::total_cmp);
        let expect = 0.5 * (all[49] + all[50]);
        assert_eq!(median_bandwidth(&a, &b).unwrap(), expect);
    }

    #[test]
    fn bandwidth_of_orthogonal_views_is_degenerate() {
        let a = ev(&[&[1.0, 0.0], &[1.0, 0.0]], ViewId::Attributes);
        let b = ev(&[&[0.0, 1.0], &[0.0, 1.0]], ViewId::WordVectors);
        assert!(matches!(median_bandwidth(&a, &b), Err(Error::DegenerateBandwidth)));
    }

    #[test]
    fn triangle_with_k_two_is_complete() {
        let psi = ev(&[&[1.0, 0.1], &[0.8, 0.6], &[0.2, 1.0]], ViewId::Features);
        let g = build_two_graph(&psi, 2).unwrap();
        check_valid(&g);
        assert_eq!(g.nnz(), 6);
        assert!(matches!(build_two_graph(&psi, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn separated_clusters_do_not_connect() {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for k in 0..5 {
            rows.push(vec![1.0, 0.02 * k as f64, 0.0]);
        }
        for k in 0..5 {
            rows.push(vec![0.0, 0.02 * k as f64, 1.0]);
        }
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let g = build_two_graph(&ev(&refs, ViewId::Features), 2).unwrap();
        check_valid(&g);
        for &(r, c, _) in g.entries() {
            assert_eq!(r < 5, c < 5, "edge {r}-{c} crosses clusters");
        }
    }

    #[test]
    fn default_knn_range_accepted() {
        let psi = random_view(60, 5, 3, ViewId::Features);
        for k in [10, 30, 50] {
            check_valid(&build_two_graph(&psi, k).unwrap());
        }
    }

    #[test]
    fn incidence_is_membership_scaled() {
        let edge = Hyperedge {
            query: 0,
            members: vec![1],
            similarities: vec![0.8],
            strength: 0.7,
        };
        assert!((edge.strength * edge.similarities[0] - 0.56).abs() < 1e-15);
        let sh = soft_incidence(&[edge], 3);
        assert_eq!(sh[(0, 0)], 0.0);
        assert_eq!(sh[(1, 0)], 1.0);
        assert_eq!(sh[(2, 0)], 0.0);
    }

    #[test]
    fn strength_is_mean_similarity() {
        let a = random_view(12, 4, 4, ViewId::Attributes);
        let b = random_view(12, 4, 5, ViewId::Features);
        let (edges, _) = hyperedges(&a, &b, 3).unwrap();
        assert_eq!(edges.len(), 12);
        for e in &edges {
            assert_eq!(e.members.len(), 3);
            let mean = e.similarities.iter().sum::<f64>() / 3.0;
            assert!((e.strength - mean).abs() < 1e-15);
            assert!(e.similarities.iter().all(|&s| s >= 0.0));
        }
    }

    #[test]
    fn single_member_hyperedge_is_nearest_node() {
        let psi = random_view(8, 3, 6, ViewId::Features);
        let (edges, bw) = hyperedges(&psi, &psi, 1).unwrap();
        let n = 8;
        let mut z = vec![vec![0.0; n]; n];
        for k in 0..n {
            let row: Vec<f64> = (0..n)
                .map(|l| {
                    let a: Vec<f64> = psi.psi().row(k).iter().copied().collect();
                    let b: Vec<f64> = psi.psi().row(l).iter().copied().collect();
                    node_similarity(&a, &b, bw).unwrap()
                })
                .collect();
            z[k] = zscore(&row).unwrap();
        }
        for l in 0..n {
            let col: Vec<f64> = (0..n).map(|k| z[k][l]).collect();
            for (k, v) in zscore(&col).unwrap().into_iter().enumerate() {
                z[k][l] = v;
            }
        }
        for e in &edges {
            assert_eq!(e.members.len(), 1);
            let best = (0..n).max_by(|&a, &b| z[e.query][a].total_cmp(&z[e.query][b]).then(b.cmp(&a))).unwrap();
            assert_eq!(e.members[0], best);
        }
        let g = build_homo_hypergraph(&psi, GraphParams { knn: 7, k_hyper: 1 }).unwrap();
        check_valid(&g);
    }

    #[test]
    fn homo_equals_hetero_on_duplicated_view() {
        let a = random_view(9, 4, 7, ViewId::Attributes);
        let b = EmbeddedView::from_unnormalized(a.psi().clone(), ViewId::WordVectors);
        let nodes = NodeSet::new(vec![a.clone(), b], 9).unwrap();
        let params = GraphParams { knn: 4, k_hyper: 3 };
        let hete = build_hetero_hypergraph(&nodes, ViewId::Attributes, ViewId::WordVectors, params).unwrap();
        let homo = build_homo_hypergraph(&a, params).unwrap();
        assert!(max_abs(&(hete.dense() - homo.dense())) < 1e-14);
    }

    #[test]
    fn hetero_rejects_same_view_and_large_k() {
        let a = random_view(6, 3, 8, ViewId::Attributes);
        let nodes = NodeSet::new(vec![a.clone()], 6).unwrap();
        let p = GraphParams { knn: 3, k_hyper: 2 };
        assert!(build_hetero_hypergraph(&nodes, ViewId::Attributes, ViewId::Attributes, p).is_err());
        assert!(build_homo_hypergraph(&a, GraphParams { knn: 3, k_hyper: 6 }).is_err());
    }

    #[test]
    fn suite_has_nine_graphs_for_three_views() {
        let views = vec![
            random_view(15, 4, 9, ViewId::Features),
            random_view(15, 4, 10, ViewId::Attributes),
            random_view(15, 4, 11, ViewId::WordVectors),
        ];
        let nodes = NodeSet::new(views, 12).unwrap();
        let suite = build_graph_suite(
            &nodes,
            &[GraphKind::TwoGraph, GraphKind::HeteroHyper],
            GraphParams { knn: 5, k_hyper: 4 },
        )
        .unwrap();
        assert_eq!(suite.len(), 9);
        suite.iter().for_each(check_valid);
        assert_eq!(suite.iter().filter(|g| g.kind() == GraphKind::HeteroHyper).count(), 6);
    }

    #[test]
    fn node_set_views_must_agree() {
        let a = random_view(5, 3, 12, ViewId::Features);
        let b = random_view(6, 3, 13, ViewId::Attributes);
        assert!(matches!(NodeSet::new(vec![a, b], 4), Err(Error::NodeSetMismatch(_))));
    }

    #[test]
    fn two_graph_is_permutation_equivariant() {
        let psi = random_view(20, 5, 14, ViewId::Features);
        let perm: Vec<usize> = (0..20).map(|k| (k * 7) % 20).collect();
        let permuted = EmbeddedView::from_unnormalized(psi.psi().select_rows(perm.iter()), ViewId::Features);
        let g = build_two_graph(&psi, 4).unwrap();
        let gp = build_two_graph(&permuted, 4).unwrap();
        assert!(max_abs(&(g.permuted(&perm).unwrap().dense() - gp.dense())) < 1e-12);
    }

    #[test]
    fn graph_dump_round_trip() {
        let psi = random_view(10, 3, 15, ViewId::Features);
        let g = build_homo_hypergraph(&psi, GraphParams { knn: 4, k_hyper: 3 }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        g.save(dir.path(), "homo_X").unwrap();
        assert_eq!(SimilarityGraph::load(dir.path(), "homo_X").unwrap(), g);
    }
}

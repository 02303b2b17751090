//! Multi-view CCA and the eigenvalue-weighted embedding space.
//!
//! The sum-of-correlations objective over `n_V` views is solved in closed form
//! as the generalized symmetric eigenproblem `C w = rho D w`, where `C` is the
//! regularised covariance of the stacked (centred) views and `D` its block
//! diagonal. Every eigenvector is kept, so the embedding has
//! `m_e = sum_i m_i` dimensions; view `i` owns the rows of the stacked
//! eigenvector matrix that belong to it. Eigenvectors are `D`-orthonormal:
//! `sum_i W_i' (S_ii + eps_i I) W_i = I`, and `W' C W = diag(rho)`.

use std::path::Path;

use nalgebra::{DMatrix, RowDVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::{load_matrix, save_matrix, ViewId, ViewMatrix};
use crate::error::{Error, Result};
use crate::linalg::{center, column_means, normalize_rows};

/// Power applied to the eigenvalues when weighting embedding dimensions.
pub const DEFAULT_LAMBDA: f64 = 4.0;

/// Covariance regularisation added to each within-view block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceRidge {
    /// The same `eps` for every view.
    Fixed(f64),
    /// `eps_i = factor * mean(diag(S_ii))`.
    Relative(f64),
}

impl Default for CovarianceRidge {
    fn default() -> Self {
        CovarianceRidge::Relative(1e-6)
    }
}

/// How embedding dimensions are scaled before normalisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Scale dimension `d` by `rho_d^lambda`.
    Soft { lambda: f64 },
    /// Keep the leading `ceil(fraction * m_e)` dimensions with unit weight,
    /// drop the rest.
    Hard { fraction: f64 },
}

impl Default for Weighting {
    fn default() -> Self {
        Weighting::Soft { lambda: DEFAULT_LAMBDA }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MvccaModel {
    views: Vec<ViewId>,
    projections: Vec<DMatrix<f64>>,
    means: Vec<RowDVector<f64>>,
    eps: Vec<f64>,
    eigenvalues: Vec<f64>,
    weighting: Weighting,
}

/// Rows of one view mapped into the embedding, each scaled to unit length.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedView {
    psi: DMatrix<f64>,
    view: ViewId,
    zero_rows: Vec<usize>,
}

impl EmbeddedView {
    /// Normalises the rows of `psi`.
    pub fn from_unnormalized(mut psi: DMatrix<f64>, view: ViewId) -> Self {
        let zero_rows = normalize_rows(&mut psi);
        if !zero_rows.is_empty() {
            log::warn!("view {view}: {} rows embed to zero", zero_rows.len());
        }
        Self { psi, view, zero_rows }
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn view(&self) -> ViewId {
        self.view
    }

    /// Rows that were zero before normalisation and remain zero.
    pub fn zero_rows(&self) -> &[usize] {
        &self.zero_rows
    }

    pub fn nrows(&self) -> usize {
        self.psi.nrows()
    }

    pub fn dim(&self) -> usize {
        self.psi.ncols()
    }

    /// Stacks `other` below `self`.
    pub fn stacked(&self, other: &EmbeddedView) -> Result<EmbeddedView> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {}-dim rows under {}-dim rows",
                other.dim(),
                self.dim()
            )));
        }
        let n = self.nrows();
        let psi = DMatrix::from_fn(n + other.nrows(), self.dim(), |r, c| {
            if r < n {
                self.psi[(r, c)]
            } else {
                other.psi[(r - n, c)]
            }
        });
        let mut zero_rows = self.zero_rows.clone();
        zero_rows.extend(other.zero_rows.iter().map(|r| r + n));
        Ok(EmbeddedView {
            psi,
            view: self.view,
            zero_rows,
        })
    }
}

/// Inner product of two unit rows.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn fit_mvcca(views: &[ViewMatrix], ridge: CovarianceRidge) -> Result<MvccaModel> {
    if views.is_empty() {
        return Err(Error::InvalidArgument("no views to fit".into()));
    }
    let n = views[0].nrows();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two instances".into()));
    }
    if let Some(v) = views.iter().find(|v| v.nrows() != n) {
        return Err(Error::DimensionMismatch(format!(
            "view {} has {} rows, expected {n}",
            v.view(),
            v.nrows()
        )));
    }
    for (a, v) in views.iter().enumerate() {
        if views[..a].iter().any(|u| u.view() == v.view()) {
            return Err(Error::InvalidArgument(format!("view {} supplied twice", v.view())));
        }
    }

    let dims: Vec<usize> = views.iter().map(ViewMatrix::dim).collect();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let m_e: usize = dims.iter().sum();

    let means: Vec<RowDVector<f64>> = views.iter().map(|v| column_means(v.data())).collect();
    let centred: Vec<DMatrix<f64>> = views
        .iter()
        .zip(&means)
        .map(|(v, mu)| center(v.data(), mu))
        .collect();

    let inv_n = 1.0 / n as f64;
    let eps: Vec<f64> = centred
        .iter()
        .map(|c| {
            let diag_mean = c.iter().map(|v| v * v).sum::<f64>() * inv_n / c.ncols() as f64;
            match ridge {
                CovarianceRidge::Fixed(e) => e,
                CovarianceRidge::Relative(f) => f * diag_mean,
            }
        })
        .collect();
    if eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::InvalidArgument("covariance ridge must be finite and >= 0".into()));
    }

    // Cholesky factor of each regularised within-view covariance
    let mut factors = Vec::with_capacity(views.len());
    for (i, c) in centred.iter().enumerate() {
        let mut s = c.transpose() * c * inv_n;
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite covariance".into()));
        }
        let scale = s.diagonal().max().max(f64::MIN_POSITIVE);
        for d in 0..dims[i] {
            s[(d, d)] += eps[i];
        }
        let l = s
            .cholesky()
            .ok_or_else(|| Error::SingularSystem(format!("covariance of view {} is singular", views[i].view())))?
            .l();
        if l.diagonal().iter().any(|&p| p * p <= 1e-14 * scale) {
            return Err(Error::SingularSystem(format!(
                "covariance of view {} is singular; use eps > 0",
                views[i].view()
            )));
        }
        factors.push(l);
    }

    // whitened data Phi_i L_i^{-T}; its cross products give L^{-1} C L^{-T}
    let whitened: Vec<DMatrix<f64>> = centred
        .iter()
        .zip(&factors)
        .map(|(c, l)| {
            l.solve_lower_triangular(&c.transpose())
                .expect("nonsingular factor")
                .transpose()
        })
        .collect();
    let mut a = DMatrix::<f64>::zeros(m_e, m_e);
    for i in 0..views.len() {
        for j in i..views.len() {
            let block = if i == j {
                DMatrix::identity(dims[i], dims[i])
            } else {
                whitened[i].transpose() * &whitened[j] * inv_n
            };
            a.view_mut((offsets[i], offsets[j]), (dims[i], dims[j])).copy_from(&block);
            if i != j {
                a.view_mut((offsets[j], offsets[i]), (dims[j], dims[i]))
                    .copy_from(&block.transpose());
            }
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite covariance".into()));
    }

    let eig = SymmetricEigen::try_new(a, 1e-15, 10_000)
        .ok_or_else(|| Error::EigenFailure("symmetric eigen-decomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..m_e).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();

    // back-transform each view block: W_i = L_i^{-T} Y_i
    let y = eig.eigenvectors.select_columns(order.iter());
    let mut projections: Vec<DMatrix<f64>> = factors
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.transpose()
                .solve_upper_triangular(&y.rows(offsets[i], dims[i]).into_owned())
                .expect("nonsingular factor")
        })
        .collect();

    for col in 0..m_e {
        let mut best = (0usize, 0usize, 0.0f64);
        for (i, w) in projections.iter().enumerate() {
            for r in 0..w.nrows() {
                if w[(r, col)].abs() > best.2.abs() {
                    best = (i, r, w[(r, col)]);
                }
            }
        }
        if best.2 < 0.0 {
            for w in projections.iter_mut() {
                w.column_mut(col).neg_mut();
            }
        }
    }
    if projections.iter().any(|w| w.iter().any(|v| !v.is_finite())) {
        return Err(Error::EigenFailure("non-finite eigenvectors".into()));
    }

    Ok(MvccaModel {
        views: views.iter().map(ViewMatrix::view).collect(),
        projections,
        means,
        eps,
        eigenvalues,
        weighting: Weighting::default(),
    })
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    views: Vec<ViewId>,
    dims: Vec<usize>,
    eigenvalues: Vec<f64>,
    eps: Vec<f64>,
    means: Vec<Vec<f64>>,
    weighting: Weighting,
}

impl MvccaModel {
    /// Assembles a model from explicit parts, e.g. hand-built fixtures.
    pub fn from_parts(
        views: Vec<ViewId>,
        projections: Vec<DMatrix<f64>>,
        means: Vec<RowDVector<f64>>,
        eigenvalues: Vec<f64>,
        weighting: Weighting,
    ) -> Result<Self> {
        let m_e = eigenvalues.len();
        if views.len() != projections.len() || views.len() != means.len() {
            return Err(Error::DimensionMismatch("views, projections and means differ in count".into()));
        }
        for (w, mu) in projections.iter().zip(&means) {
            if w.ncols() != m_e || mu.len() != w.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "projection {:?} inconsistent with {m_e} eigenvalues / mean of length {}",
                    w.shape(),
                    mu.len()
                )));
            }
        }
        if eigenvalues.iter().any(|&e| e < 0.0 || !e.is_finite()) {
            return Err(Error::InvalidArgument("eigenvalues must be finite and >= 0".into()));
        }
        let eps = vec![0.0; views.len()];
        Ok(Self {
            views,
            projections,
            means,
            eps,
            eigenvalues,
            weighting,
        })
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        self.with_weighting(Weighting::Soft { lambda })
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn views(&self) -> &[ViewId] {
        &self.views
    }

    pub fn has_view(&self, view: ViewId) -> bool {
        self.views.contains(&view)
    }

    fn index(&self, view: ViewId) -> Result<usize> {
        self.views.iter().position(|&v| v == view).ok_or(Error::MissingView(view))
    }

    pub fn embedding_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn view_dim(&self, view: ViewId) -> Result<usize> {
        Ok(self.projections[self.index(view)?].nrows())
    }

    /// Shared generalized eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projection(&self, view: ViewId) -> Result<&DMatrix<f64>> {
        Ok(&self.projections[self.index(view)?])
    }

    pub fn mean(&self, view: ViewId) -> Result<&RowDVector<f64>> {
        Ok(&self.means[self.index(view)?])
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Per-dimension weights of the embedding under the current weighting.
    pub fn dimension_weights(&self) -> Vec<f64> {
        match self.weighting {
            Weighting::Soft { lambda } => self.eigenvalues.iter().map(|&e| e.powf(lambda)).collect(),
            Weighting::Hard { fraction } => {
                let keep = (fraction.clamp(0.0, 1.0) * self.embedding_dim() as f64).ceil() as usize;
                (0..self.embedding_dim()).map(|d| if d < keep { 1.0 } else { 0.0 }).collect()
            }
        }
    }

    /// `W_i * diag(weights)`, the linear map of view `i` into the embedding.
    pub fn weighted_projection(&self, view: ViewId) -> Result<DMatrix<f64>> {
        let mut w = self.projection(view)?.clone();
        for (d, s) in self.dimension_weights().into_iter().enumerate() {
            w.column_mut(d).scale_mut(s);
        }
        Ok(w)
    }

    /// Centres `rows` with the view mean, maps them by `W_i diag(weights)` and
    /// scales each row to unit length.
    pub fn embed_rows(&self, view: ViewId, rows: &DMatrix<f64>) -> Result<EmbeddedView> {
        let i = self.index(view)?;
        if rows.ncols() != self.projections[i].nrows() {
            return Err(Error::DimensionMismatch(format!(
                "view {view} expects {} columns, got {}",
                self.projections[i].nrows(),
                rows.ncols()
            )));
        }
        let psi = center(rows, &self.means[i]) * self.weighted_projection(view)?;
        Ok(EmbeddedView::from_unnormalized(psi, view))
    }

    pub fn embed(&self, phi: &ViewMatrix) -> Result<EmbeddedView> {
        self.embed_rows(phi.view(), phi.data())
    }

    /// `max |sum_i W_i'(S_ii + eps_i I) W_i - I|` on the given (fitting) views.
    pub fn whitening_residual(&self, views: &[ViewMatrix]) -> Result<f64> {
        let (within, _) = self.constraint_products(views)?;
        let m_e = self.embedding_dim();
        Ok(crate::linalg::max_abs(&(within - DMatrix::identity(m_e, m_e))))
    }

    /// Largest off-diagonal entry of `sum_{i != j} W_i' S_ij W_j`.
    pub fn decorrelation_residual(&self, views: &[ViewMatrix]) -> Result<f64> {
        let (_, cross) = self.constraint_products(views)?;
        let mut worst = 0.0f64;
        for k in 0..cross.nrows() {
            for l in 0..cross.ncols() {
                if k != l {
                    worst = worst.max(cross[(k, l)].abs());
                }
            }
        }
        Ok(worst)
    }

    fn constraint_products(&self, views: &[ViewMatrix]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let m_e = self.embedding_dim();
        let mut within = DMatrix::zeros(m_e, m_e);
        let mut cross = DMatrix::zeros(m_e, m_e);
        let projected: Vec<(usize, DMatrix<f64>)> = views
            .iter()
            .map(|v| {
                let i = self.index(v.view())?;
                let c = center(v.data(), &column_means(v.data()));
                Ok((i, c * &self.projections[i]))
            })
            .collect::<Result<_>>()?;
        let n = views.first().map(ViewMatrix::nrows).unwrap_or(1) as f64;
        for (a, (i, pa)) in projected.iter().enumerate() {
            for (b, (_, pb)) in projected.iter().enumerate() {
                let prod = pa.transpose() * pb / n;
                if a == b {
                    within += prod;
                    let w = &self.projections[*i];
                    within += w.transpose() * w * self.eps[*i];
                } else {
                    cross += prod;
                }
            }
        }
        Ok((within, cross))
    }

    /// Writes `<stem>_W_<view>.csv` for every view and `<stem>.json`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        for (v, w) in self.views.iter().zip(&self.projections) {
            save_matrix(w, dir.join(format!("{stem}_W_{v}.csv")))?;
        }
        let sidecar = Sidecar {
            views: self.views.clone(),
            dims: self.projections.iter().map(DMatrix::nrows).collect(),
            eigenvalues: self.eigenvalues.clone(),
            eps: self.eps.clone(),
            means: self.means.iter().map(|m| m.iter().copied().collect()).collect(),
            weighting: self.weighting,
        };
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(format!("{stem}.json"));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let s: Sidecar =
            serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let projections = s
            .views
            .iter()
            .map(|v| load_matrix(dir.join(format!("{stem}_W_{v}.csv"))))
            .collect::<Result<Vec<_>>>()?;
        for (w, &d) in projections.iter().zip(&s.dims) {
            if w.nrows() != d {
                return Err(Error::DimensionMismatch("projection rows vs sidecar dims".into()));
            }
        }
        let means = s.means.into_iter().map(RowDVector::from_vec).collect();
        let mut model = Self::from_parts(s.views, projections, means, s.eigenvalues, s.weighting)?;
        model.eps = s.eps;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    fn identity_model(lambda: f64, eig: Vec<f64>) -> MvccaModel {
        let m = eig.len();
        MvccaModel::from_parts(
            vec![ViewId::Features],
            vec![DMatrix::identity(m, m)],
            vec![RowDVector::zeros(m)],
            eig,
            Weighting::Soft { lambda },
        )
        .unwrap()
    }

    #[test]
    fn identity_weights_normalise_row() {
        let model = identity_model(4.0, vec![1.0, 1.0]);
        let e = model.embed_rows(ViewId::Features, &DMatrix::from_row_slice(1, 2, &[3.0, 4.0])).unwrap();
        assert!((e.psi()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((e.psi()[(0, 1)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_power_scales_dimension() {
        let model = identity_model(4.0, vec![1.0, 0.5]);
        assert_eq!(model.dimension_weights(), vec![1.0, 0.0625]);
        let w = model.weighted_projection(ViewId::Features).unwrap();
        assert_eq!(w[(1, 1)], 0.0625);
    }

    #[test]
    fn zero_power_is_unweighted() {
        let model = identity_model(0.0, vec![2.5, 0.3]);
        assert_eq!(model.dimension_weights(), vec![1.0, 1.0]);
    }

    #[test]
    fn hard_weighting_keeps_leading_dims() {
        let model = identity_model(4.0, vec![3.0, 2.0, 1.0, 0.5]).with_weighting(Weighting::Hard { fraction: 0.5 });
        assert_eq!(model.dimension_weights(), vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_rows_flagged() {
        let model = identity_model(4.0, vec![1.0, 1.0]);
        let e = model.embed_rows(ViewId::Features, &DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(e.zero_rows(), &[0, 1]);
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[0.6, 0.8], &[0.6, 0.8]) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-1.0, 0.0]), -1.0);
    }

    #[test]
    fn duplicated_view_gives_eigenvalue_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = gaussian(100, 3, &mut rng);
        let views = vec![
            ViewMatrix::new(x.clone(), ViewId::Attributes).unwrap(),
            ViewMatrix::new(x, ViewId::WordVectors).unwrap(),
        ];
        let model = fit_mvcca(&views, CovarianceRidge::Fixed(0.0)).unwrap();
        assert_eq!(model.embedding_dim(), 6);
        for &e in &model.eigenvalues()[..3] {
            assert!((e - 2.0).abs() <= 1e-8, "{e}");
        }
        for &e in &model.eigenvalues()[3..] {
            assert!(e.abs() <= 1e-8, "{e}");
        }
    }

    #[test]
    fn independent_views_have_unit_leading_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let views = vec![
            ViewMatrix::new(gaussian(2000, 5, &mut rng), ViewId::Attributes).unwrap(),
            ViewMatrix::new(gaussian(2000, 5, &mut rng), ViewId::WordVectors).unwrap(),
        ];
        let model = fit_mvcca(&views, CovarianceRidge::default()).unwrap();
        assert!((model.eigenvalues()[0] - 1.0).abs() <= 0.15);
    }

    #[test]
    fn constraints_hold_and_eigenvalues_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let shared = gaussian(150, 2, &mut rng);
        let mk = |d: usize, rng: &mut ChaCha8Rng, v| {
            let mix = gaussian(2, d, rng);
            ViewMatrix::new(&shared * mix + gaussian(150, d, rng) * 0.5, v).unwrap()
        };
        let views = vec![
            mk(6, &mut rng, ViewId::Features),
            mk(4, &mut rng, ViewId::Attributes),
            mk(3, &mut rng, ViewId::WordVectors),
        ];
        let model = fit_mvcca(&views, CovarianceRidge::default()).unwrap();
        assert_eq!(model.embedding_dim(), 13);
        assert!(model.whitening_residual(&views).unwrap() <= 1e-6);
        assert!(model.decorrelation_residual(&views).unwrap() <= 1e-6);
        assert!(model.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        assert!(model.eigenvalues().iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn singular_covariance_without_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let base = gaussian(20, 2, &mut rng);
        let x = DMatrix::from_fn(20, 3, |r, c| if c < 2 { base[(r, c)] } else { base[(r, 0)] + base[(r, 1)] });
        let views = vec![
            ViewMatrix::new(x, ViewId::Features).unwrap(),
            ViewMatrix::new(gaussian(20, 2, &mut rng), ViewId::Attributes).unwrap(),
        ];
        assert!(matches!(
            fit_mvcca(&views, CovarianceRidge::Fixed(0.0)),
            Err(Error::SingularSystem(_))
        ));
        assert!(fit_mvcca(&views, CovarianceRidge::default()).is_ok());
    }

    #[test]
    fn embed_is_row_permutation_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let views = vec![
            ViewMatrix::new(gaussian(40, 3, &mut rng), ViewId::Features).unwrap(),
            ViewMatrix::new(gaussian(40, 2, &mut rng), ViewId::Attributes).unwrap(),
        ];
        let model = fit_mvcca(&views, CovarianceRidge::default()).unwrap();
        let perm: Vec<usize> = (0..40).rev().collect();
        let a = model.embed(&views[0]).unwrap();
        let b = model.embed(&views[0].select_rows(&perm)).unwrap();
        let a_perm = a.psi().select_rows(perm.iter());
        assert!(max_abs(&(a_perm - b.psi())) < 1e-12);
    }

    #[test]
    fn dimension_mismatch_on_embed() {
        let model = identity_model(4.0, vec![1.0, 1.0]);
        assert!(matches!(
            model.embed_rows(ViewId::Features, &DMatrix::zeros(1, 3)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            model.embed_rows(ViewId::Attributes, &DMatrix::zeros(1, 2)),
            Err(Error::MissingView(ViewId::Attributes))
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let views = vec![
            ViewMatrix::new(gaussian(30, 3, &mut rng), ViewId::Features).unwrap(),
            ViewMatrix::new(gaussian(30, 2, &mut rng), ViewId::Attributes).unwrap(),
        ];
        let model = fit_mvcca(&views, CovarianceRidge::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        model.save(dir.path(), "cca").unwrap();
        assert_eq!(MvccaModel::load(dir.path(), "cca").unwrap(), model);
    }
}

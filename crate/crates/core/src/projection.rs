//! Per-dimension projections from low-level features onto a semantic view,
//! learned on the auxiliary classes.
//!
//! Each semantic output dimension is fitted independently as a ridge
//! regression with an unpenalised bias:
//! `argmin_{w,b} sum_k (x_k . w + b - y_kd)^2 + ridge * |w|^2`.

use std::path::Path;

use nalgebra::{DMatrix, DVector, RowDVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{load_matrix, save_matrix, ViewId, ViewMatrix};
use crate::error::{Error, Result};
use crate::linalg::{center, column_means};

/// Linear map `x -> x W + b` onto one semantic view.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionModel {
    weights: DMatrix<f64>,
    bias: RowDVector<f64>,
    ridge: f64,
    view: ViewId,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    view: ViewId,
    ridge: f64,
    input_dim: usize,
    output_dim: usize,
    bias: Vec<f64>,
}

/// `1e-3 * trace(Xc' Xc) / t` for the centred inputs.
pub fn default_ridge(x: &ViewMatrix) -> f64 {
    let xc = center(x.data(), &column_means(x.data()));
    let trace: f64 = xc.iter().map(|v| v * v).sum();
    1e-3 * trace / x.dim() as f64
}

pub fn train_projection(x_s: &ViewMatrix, y_s: &ViewMatrix, ridge: f64) -> Result<ProjectionModel> {
    if x_s.nrows() != y_s.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} semantic rows",
            x_s.nrows(),
            y_s.nrows()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {ridge}")));
    }
    let x_mean = column_means(x_s.data());
    let y_mean = column_means(y_s.data());
    let xc = center(x_s.data(), &x_mean);
    let yc = center(y_s.data(), &y_mean);

    let t = x_s.dim();
    let mut gram = xc.transpose() * &xc;
    for d in 0..t {
        gram[(d, d)] += ridge;
    }
    let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("normal equations are not positive definite; set ridge > 0".into()))?;
    let l = chol.l();
    if l.diagonal().iter().any(|&p| p * p < 1e-12 * scale) {
        return Err(Error::SingularSystem(
            "normal equations are numerically singular; set ridge > 0".into(),
        ));
    }
    let rhs = xc.transpose() * &yc;
    let columns: Vec<DVector<f64>> = (0..y_s.dim())
        .into_par_iter()
        .map(|d| chol.solve(&rhs.column(d).into_owned()))
        .collect();
    let weights = DMatrix::from_columns(&columns);
    let bias = &y_mean - &x_mean * &weights;
    let model = ProjectionModel {
        weights,
        bias,
        ridge,
        view: y_s.view(),
    };
    if model.weights.iter().chain(model.bias.iter()).any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("non-finite projection weights".into()));
    }
    Ok(model)
}

impl ProjectionModel {
    pub fn new(weights: DMatrix<f64>, bias: RowDVector<f64>, ridge: f64, view: ViewId) -> Result<Self> {
        if bias.len() != weights.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "bias length {} vs {} outputs",
                bias.len(),
                weights.ncols()
            )));
        }
        Ok(Self {
            weights,
            bias,
            ridge,
            view,
        })
    }

    pub fn apply(&self, x: &ViewMatrix) -> Result<ViewMatrix> {
        if x.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} input columns, got {}",
                self.input_dim(),
                x.dim()
            )));
        }
        let mut out = x.data() * &self.weights;
        for mut row in out.row_iter_mut() {
            row += &self.bias;
        }
        ViewMatrix::new(out, self.view)
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &RowDVector<f64> {
        &self.bias
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn view(&self) -> ViewId {
        self.view
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Writes `<stem>.csv` (weights, `t x m`) and `<stem>.json`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        save_matrix(&self.weights, dir.join(format!("{stem}.csv")))?;
        let sidecar = Sidecar {
            view: self.view,
            ridge: self.ridge,
            input_dim: self.input_dim(),
            output_dim: self.output_dim(),
            bias: self.bias.iter().copied().collect(),
        };
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let weights = load_matrix(dir.join(format!("{stem}.csv")))?;
        let path = dir.join(format!("{stem}.json"));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let s: Sidecar =
            serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        if weights.shape() != (s.input_dim, s.output_dim) {
            return Err(Error::DimensionMismatch(format!(
                "weights {:?} vs sidecar ({}, {})",
                weights.shape(),
                s.input_dim,
                s.output_dim
            )));
        }
        Self::new(weights, RowDVector::from_vec(s.bias), s.ridge, s.view)
    }
}

//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, RowDVector};

/// Moore-Penrose pseudo-inverse; singular values below `rel_tol * sigma_max`
/// are treated as zero.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let s_max = svd.singular_values.max();
    let cutoff = rel_tol * s_max;
    let mut out = DMatrix::zeros(c, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (v_t.row(k).transpose() / s) * u.column(k).transpose();
        }
    }
    out
}

/// Median of a non-empty slice; the mean of the two central values for even
/// lengths. Reorders the slice.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Scales every row to unit l2 norm. Returns the indices of zero rows, which
/// are left untouched.
pub fn normalize_rows(m: &mut DMatrix<f64>) -> Vec<usize> {
    let mut zero = Vec::new();
    for r in 0..m.nrows() {
        let norm = m.row(r).norm();
        if norm > 0.0 {
            m.row_mut(r).unscale_mut(norm);
        } else {
            zero.push(r);
        }
    }
    zero
}

pub fn column_means(m: &DMatrix<f64>) -> RowDVector<f64> {
    let n = m.nrows().max(1) as f64;
    m.row_sum() / n
}

pub fn center(m: &DMatrix<f64>, means: &RowDVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        row -= means;
    }
    out
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

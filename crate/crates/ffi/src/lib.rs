//! C ABI for `mvzsl`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_fit`
//! functions and released by the matching `*_free`. Every fallible function
//! returns an [`MvzslStatus`]; on failure a message is kept per thread and
//! can be read with [`mvzsl_last_error`]. Matrices are dense, row-major
//! `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mvzsl::data::{LabelMatrix, ViewId, ViewMatrix};
use mvzsl::graphs::{GraphKind, SimilarityGraph};
use mvzsl::harness::experiment::{ablate, ExperimentConfig};
use mvzsl::mvcca::{fit_mvcca, CovarianceRidge, MvccaModel};
use mvzsl::propagation::{fuse_walk, propagate, WalkModel};
use mvzsl::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MvzslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    DimensionMismatch = 4,
    NonFinite = 5,
    SingularSystem = 6,
    EigenFailure = 7,
    DegenerateBandwidth = 8,
    SingularPropagation = 9,
    NoSupervision = 10,
    Io = 11,
    Parse = 12,
    BufferTooSmall = 13,
    Panic = 14,
    Other = 15,
}

/// View identifiers, matching the library's `X`, `A` and `V`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MvzslView {
    Features = 0,
    Attributes = 1,
    WordVectors = 2,
}

impl From<MvzslView> for ViewId {
    fn from(v: MvzslView) -> Self {
        match v {
            MvzslView::Features => ViewId::Features,
            MvzslView::Attributes => ViewId::Attributes,
            MvzslView::WordVectors => ViewId::WordVectors,
        }
    }
}

/// Opaque fitted multi-view CCA model.
pub struct MvzslMvcca(MvccaModel);

/// Opaque fused random walk over one or more graphs.
pub struct MvzslWalk(WalkModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> MvzslStatus {
    match err {
        Error::InvalidArgument(_) | Error::InvalidVariant(_) | Error::MissingView(_) | Error::NodeSetMismatch(_) => {
            MvzslStatus::InvalidArgument
        }
        Error::DimensionMismatch(_) => MvzslStatus::DimensionMismatch,
        Error::NonFinite { .. } => MvzslStatus::NonFinite,
        Error::SingularSystem(_) => MvzslStatus::SingularSystem,
        Error::EigenFailure(_) => MvzslStatus::EigenFailure,
        Error::DegenerateBandwidth => MvzslStatus::DegenerateBandwidth,
        Error::SingularPropagation => MvzslStatus::SingularPropagation,
        Error::NoSupervision => MvzslStatus::NoSupervision,
        Error::Io { .. } => MvzslStatus::Io,
        Error::ParseFailure { .. } | Error::Serialization(_) => MvzslStatus::Parse,
        _ => MvzslStatus::Other,
    }
}

struct Failure(MvzslStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MvzslStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MvzslStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside mvzsl");
            MvzslStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MvzslStatus::NullPointer, format!("{what} is null"))
}

unsafe fn matrix<'a>(data: *const f64, rows: usize, cols: usize, what: &str) -> Result<&'a [f64], Failure> {
    if data.is_null() {
        return Err(null(what));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Failure(MvzslStatus::InvalidArgument, format!("{what} size overflows")))?;
    Ok(slice::from_raw_parts(data, len))
}

fn dense(rows: usize, cols: usize, values: &[f64]) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(rows, cols, values)
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in
/// bytes, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Fits a multi-view CCA model on `n_views` views sharing `n_rows` rows.
/// `data[i]` holds view `i` as an `n_rows x dims[i]` row-major matrix.
/// `eps_relative` scales each view's mean covariance diagonal to give its
/// ridge.
///
/// # Safety
/// `views`, `data` and `dims` must point to `n_views` valid entries and every
/// `data[i]` to `n_rows * dims[i]` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_mvcca_fit(
    views: *const MvzslView,
    data: *const *const f64,
    dims: *const usize,
    n_views: usize,
    n_rows: usize,
    eps_relative: f64,
    out: *mut *mut MvzslMvcca,
) -> MvzslStatus {
    guard(|| {
        if views.is_null() || data.is_null() || dims.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let views = slice::from_raw_parts(views, n_views);
        let data = slice::from_raw_parts(data, n_views);
        let dims = slice::from_raw_parts(dims, n_views);
        let mut mats = Vec::with_capacity(n_views);
        for i in 0..n_views {
            let values = matrix(data[i], n_rows, dims[i], "view data")?;
            mats.push(ViewMatrix::new(dense(n_rows, dims[i], values), views[i].into())?);
        }
        let model = fit_mvcca(&mats, CovarianceRidge::Relative(eps_relative))?;
        *out = Box::into_raw(Box::new(MvzslMvcca(model)));
        Ok(())
    })
}

/// Embedding dimension of a fitted model, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_mvcca_embedding_dim(model: *const MvzslMvcca) -> usize {
    model.as_ref().map_or(0, |m| m.0.embedding_dim())
}

/// Writes the `embedding_dim` generalized eigenvalues into `out`.
///
/// # Safety
/// `model` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_mvcca_eigenvalues(model: *const MvzslMvcca, out: *mut f64, len: usize) -> MvzslStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ev = m.0.eigenvalues();
        if len < ev.len() {
            return Err(Failure(MvzslStatus::BufferTooSmall, format!("need {} values", ev.len())));
        }
        ptr::copy_nonoverlapping(ev.as_ptr(), out, ev.len());
        Ok(())
    })
}

/// Embeds `n_rows` rows of `view` (row-major, `cols` wide) and writes the
/// unit-length embedded rows, `n_rows x embedding_dim`, into `out`.
///
/// # Safety
/// `model` must be a live handle, `rows` hold `n_rows * cols` doubles and
/// `out` have room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_mvcca_embed(
    model: *const MvzslMvcca,
    view: MvzslView,
    rows: *const f64,
    n_rows: usize,
    cols: usize,
    out: *mut f64,
    out_len: usize,
) -> MvzslStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let values = matrix(rows, n_rows, cols, "rows")?;
        let emb = m.0.embed_rows(view.into(), &dense(n_rows, cols, values))?;
        let m_e = emb.dim();
        if out_len < n_rows * m_e {
            return Err(Failure(MvzslStatus::BufferTooSmall, format!("need {} values", n_rows * m_e)));
        }
        let out = slice::from_raw_parts_mut(out, n_rows * m_e);
        for r in 0..n_rows {
            for c in 0..m_e {
                out[r * m_e + c] = emb.psi()[(r, c)];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_mvcca_free(model: *mut MvzslMvcca) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Fuses `n_graphs` dense symmetric `n_nodes x n_nodes` weight matrices
/// (`weights[g]`, row-major, nonnegative, zero diagonal) into one random
/// walk.
///
/// # Safety
/// `weights` must point to `n_graphs` arrays of `n_nodes^2` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_walk_new(
    weights: *const *const f64,
    n_graphs: usize,
    n_nodes: usize,
    out: *mut *mut MvzslWalk,
) -> MvzslStatus {
    guard(|| {
        if weights.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let weights = slice::from_raw_parts(weights, n_graphs);
        let mut graphs = Vec::with_capacity(n_graphs);
        for &w in weights {
            let values = matrix(w, n_nodes, n_nodes, "weights")?;
            let k = n_nodes.saturating_sub(1).max(1);
            graphs.push(SimilarityGraph::from_dense(
                GraphKind::TwoGraph,
                ViewId::Features,
                ViewId::Features,
                &dense(n_nodes, n_nodes, values),
                k,
                None,
                1.0,
            )?);
        }
        let walk = fuse_walk(&graphs)?;
        *out = Box::into_raw(Box::new(MvzslWalk(walk)));
        Ok(())
    })
}

/// Writes the fused stationary distribution (`n_nodes` values) into `out`.
///
/// # Safety
/// `walk` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_walk_stationary(walk: *const MvzslWalk, out: *mut f64, len: usize) -> MvzslStatus {
    guard(|| {
        let w = walk.as_ref().ok_or_else(|| null("walk"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pi = w.0.stationary();
        if len < pi.len() {
            return Err(Failure(MvzslStatus::BufferTooSmall, format!("need {} values", pi.len())));
        }
        ptr::copy_nonoverlapping(pi.as_ptr(), out, pi.len());
        Ok(())
    })
}

/// Propagates labels over the walk. `labels[k]` is the class of node `k` or
/// -1 when unknown. Writes `n_nodes x n_classes` scores (row-major) into
/// `scores` and, when `predictions` is non-null, the argmax class per node.
///
/// # Safety
/// `walk` must be a live handle; `labels` must hold `n_nodes` entries,
/// `scores` room for `n_nodes * n_classes` doubles and `predictions`, if
/// non-null, room for `n_nodes` entries.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_walk_propagate(
    walk: *const MvzslWalk,
    labels: *const i64,
    n_classes: usize,
    eta: f64,
    scores: *mut f64,
    predictions: *mut usize,
) -> MvzslStatus {
    guard(|| {
        let w = walk.as_ref().ok_or_else(|| null("walk"))?;
        if labels.is_null() || scores.is_null() {
            return Err(null("argument"));
        }
        let n = w.0.n_nodes();
        let labels = slice::from_raw_parts(labels, n);
        let mut z = LabelMatrix::unknown(n, n_classes);
        for (k, &c) in labels.iter().enumerate() {
            if c >= 0 {
                z.set(k, c as usize)?;
            }
        }
        let result = propagate(&w.0, &z, eta)?;
        let out = slice::from_raw_parts_mut(scores, n * n_classes);
        for k in 0..n {
            for c in 0..n_classes {
                out[k * n_classes + c] = result.scores()[(k, c)];
            }
        }
        if !predictions.is_null() {
            ptr::copy_nonoverlapping(result.predictions().as_ptr(), predictions, n);
        }
        Ok(())
    })
}

/// # Safety
/// `walk` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_walk_free(walk: *mut MvzslWalk) {
    if !walk.is_null() {
        drop(Box::from_raw(walk));
    }
}

/// Runs an experiment described by a JSON config (the CLI's `ablate` format)
/// and returns the run records as a JSON array in `*out`, to be released
/// with [`mvzsl_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_run_experiment(config_json: *const c_char, out: *mut *mut c_char) -> MvzslStatus {
    guard(|| {
        if config_json.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure(MvzslStatus::InvalidUtf8, e.to_string()))?;
        let config: ExperimentConfig = serde_json::from_str(text).map_err(Error::from)?;
        let records = ablate(&config)?;
        let json = serde_json::to_string(&records).map_err(Error::from)?;
        *out = CString::new(json)
            .map_err(|e| Failure(MvzslStatus::Other, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mvzsl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

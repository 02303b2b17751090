//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use mvzsl::data::{ViewId, ViewMatrix};
use mvzsl::mvcca::MvccaModel;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn zscore(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd < 1e-12 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - mean) / sd).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Dense hypergraph weights computed by listing every hyperedge explicitly
/// and summing `sh(o,e) * sh(l,e)` over all of them.
pub fn hypergraph_oracle(query: &[Vec<f64>], member: &[Vec<f64>], k_h: usize) -> Vec<Vec<f64>> {
    let n = query.len();
    let q: Vec<Vec<f64>> = query.iter().map(|r| unit(r)).collect();
    let m: Vec<Vec<f64>> = member.iter().map(|r| unit(r)).collect();
    let s: Vec<Vec<f64>> = q.iter().map(|a| m.iter().map(|b| dot(a, b)).collect()).collect();
    let bw = median(s.iter().flatten().map(|x| x * x).collect());
    let omega: Vec<Vec<f64>> = s
        .iter()
        .map(|r| r.iter().map(|x| (x * x / bw).exp()).collect())
        .collect();

    let mut z: Vec<Vec<f64>> = omega.iter().map(|r| zscore(r)).collect();
    for l in 0..n {
        let col = zscore(&z.iter().map(|r| r[l]).collect::<Vec<_>>());
        for k in 0..n {
            z[k][l] = col[k];
        }
    }

    // (members, soft incidence values) per hyperedge
    let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
    for row in &z {
        let floor = row.iter().copied().fold(f64::INFINITY, f64::min);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let members = &idx[..k_h];
        let sims: Vec<f64> = members.iter().map(|&l| row[l] - floor).collect();
        let delta = sims.iter().sum::<f64>() / k_h as f64;
        let raw: Vec<f64> = sims.iter().map(|s| delta * s).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        edges.push(
            members
                .iter()
                .zip(&raw)
                .map(|(&l, &v)| (l, if norm > 0.0 { v / norm } else { 0.0 }))
                .collect(),
        );
    }

    let mut w = vec![vec![0.0; n]; n];
    for o in 0..n {
        for l in 0..n {
            if o == l {
                continue;
            }
            for e in &edges {
                let a = e.iter().find(|(k, _)| *k == o).map_or(0.0, |p| p.1);
                let b = e.iter().find(|(k, _)| *k == l).map_or(0.0, |p| p.1);
                w[o][l] += a * b;
            }
        }
    }
    w
}

/// Two clusters of points in two views, the second view a rotated and
/// perturbed copy of the first, plus one point between the clusters.
pub fn seven_point_fixture() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let a = vec![
        vec![1.0, 0.1, 0.05],
        vec![0.9, 0.3, -0.1],
        vec![1.0, -0.2, 0.2],
        vec![0.1, 1.0, 0.15],
        vec![-0.2, 0.9, -0.05],
        vec![0.3, 1.1, 0.3],
        vec![0.7, 0.65, 0.5],
    ];
    let (c, s) = (0.35f64.cos(), 0.35f64.sin());
    let v = a
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let jitter = 0.03 * (k as f64 + 1.0).sin();
            vec![c * r[0] - s * r[1] + jitter, s * r[0] + c * r[1], r[2] - jitter]
        })
        .collect();
    (a, v)
}

pub fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c])
}

/// Correlated Gaussian views sharing a latent factor.
pub fn random_views(seed: u64, n: usize, dims: &[usize]) -> Vec<ViewMatrix> {
    let ids = [ViewId::Features, ViewId::Attributes, ViewId::WordVectors];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
    let latent = DMatrix::from_fn(n, 3, |_, _| g());
    dims.iter()
        .zip(ids)
        .map(|(&d, id)| {
            let load = DMatrix::from_fn(3, d, |_, _| g());
            let noise = DMatrix::from_fn(n, d, |_, _| g());
            ViewMatrix::new(&latent * load + noise * 0.8, id).unwrap()
        })
        .collect()
}

fn centred_cov(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows() as f64;
    let ca = a - DMatrix::from_fn(a.nrows(), a.ncols(), |_, c| a.column(c).mean());
    let cb = b - DMatrix::from_fn(b.nrows(), b.ncols(), |_, c| b.column(c).mean());
    ca.transpose() * cb / n
}

/// Whitening and decorrelation residuals of a fitted model, computed from
/// the raw views and the model's projections.
pub fn constraint_residuals(model: &MvccaModel, views: &[ViewMatrix]) -> (f64, f64) {
    let m_e = model.embedding_dim();
    let mut whitening = DMatrix::<f64>::zeros(m_e, m_e);
    let mut full = DMatrix::<f64>::zeros(m_e, m_e);
    for (i, vi) in views.iter().enumerate() {
        let wi = model.projection(vi.view()).unwrap();
        for vj in views {
            let wj = model.projection(vj.view()).unwrap();
            let mut s = centred_cov(vi.data(), vj.data());
            if vi.view() == vj.view() {
                for d in 0..s.nrows() {
                    s[(d, d)] += model.eps()[i];
                }
                whitening += wi.transpose() * &s * wi;
            }
            full += wi.transpose() * s * wj;
        }
    }
    let white = (whitening - DMatrix::identity(m_e, m_e)).abs().max();
    let mut decor = 0.0f64;
    for r in 0..m_e {
        for c in 0..m_e {
            if r != c {
                decor = decor.max(full[(r, c)].abs());
            }
        }
    }
    (white, decor)
}

fn inv_sqrt(s: DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(s);
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| 1.0 / x.sqrt()));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Canonical correlations of two views via whitening followed by an SVD of
/// the whitened cross-covariance.
pub fn cca_oracle(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<f64> {
    let k = inv_sqrt(centred_cov(x, x)) * centred_cov(x, y) * inv_sqrt(centred_cov(y, y));
    let mut s: Vec<f64> = k.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

mod common;

use common::{cca_oracle, constraint_residuals, hypergraph_oracle, random_views, seven_point_fixture, to_matrix};
use mvzsl::data::ViewId;
use mvzsl::graphs::{build_hetero_hypergraph, build_homo_hypergraph, GraphParams, NodeSet};
use mvzsl::mvcca::{fit_mvcca, CovarianceRidge, EmbeddedView};

fn max_diff(a: &nalgebra::DMatrix<f64>, b: &[Vec<f64>]) -> f64 {
    let mut d = 0.0f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            d = d.max((a[(r, c)] - b[r][c]).abs());
        }
    }
    d
}

#[test]
fn hetero_hypergraph_matches_enumeration() {
    let (a, v) = seven_point_fixture();
    let ea = EmbeddedView::from_unnormalized(to_matrix(&a), ViewId::Attributes);
    let ev = EmbeddedView::from_unnormalized(to_matrix(&v), ViewId::WordVectors);
    let nodes = NodeSet::new(vec![ea, ev], 5).unwrap();
    let params = GraphParams { knn: 6, k_hyper: 2 };
    for (i, j, q, m) in [
        (ViewId::Attributes, ViewId::WordVectors, &a, &v),
        (ViewId::WordVectors, ViewId::Attributes, &v, &a),
    ] {
        let g = build_hetero_hypergraph(&nodes, i, j, params).unwrap();
        let oracle = hypergraph_oracle(q, m, 2);
        assert!(oracle.iter().flatten().filter(|&&x| x > 0.0).count() >= 7);
        assert!(max_diff(&g.dense(), &oracle) <= 1e-10, "{i}>{j}");
    }
}

#[test]
fn homo_hypergraph_matches_enumeration() {
    let (a, _) = seven_point_fixture();
    let ea = EmbeddedView::from_unnormalized(to_matrix(&a), ViewId::Attributes);
    for k_h in 1..=3 {
        let g = build_homo_hypergraph(&ea, GraphParams { knn: 6, k_hyper: k_h }).unwrap();
        assert!(max_diff(&g.dense(), &hypergraph_oracle(&a, &a, k_h)) <= 1e-10, "K_h = {k_h}");
    }
}

#[test]
fn two_view_eigenvalues_are_one_plus_minus_canonical_correlations() {
    for seed in 0..3 {
        let views = random_views(seed, 200, &[5, 3]);
        let model = fit_mvcca(&views, CovarianceRidge::Fixed(0.0)).unwrap();
        let rho = cca_oracle(views[0].data(), views[1].data());
        let mut expected: Vec<f64> = rho.iter().map(|r| 1.0 + r).collect();
        expected.extend([1.0, 1.0]);
        expected.extend(rho.iter().rev().map(|r| 1.0 - r));
        for (got, want) in model.eigenvalues().iter().zip(&expected) {
            assert!((got - want).abs() <= 1e-6, "seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn three_view_constraints_hold() {
    for seed in 0..5 {
        let views = random_views(100 + seed, 200, &[8, 5, 3]);
        let model = fit_mvcca(&views, CovarianceRidge::Relative(1e-6)).unwrap();
        let (white, decor) = constraint_residuals(&model, &views);
        assert!(white <= 1e-6 && decor <= 1e-6, "seed {seed}: {white:e} {decor:e}");
    }
}

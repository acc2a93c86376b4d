mod common;

use common::*;
use nalgebra::DMatrix;
use warpcheck::expr::scalar_field;
use warpcheck::geometry::{christoffel, gradient_norm_sq, hessian_scalar, laplacian, ricci};
use warpcheck::models::{hyperbolic_metric, space_form, theorem2_warp, SpaceFormSpec, WarpParams};
use warpcheck::warped::{assemble_product_metric, WarpedProductSpec};
use warpcheck::{MetricField, ScalarField};

const TOL: f64 = 1e-5;
const POINTS: usize = 100;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[test]
fn jets_match_finite_differences_on_composites() {
    let exprs = [
        "x1*x2/x3 + sqrt(x1^2 + x3^2)",
        "(x1 - 2*x2)^3 / (1 + x3^2)",
        "sqrt(1 + x1^2*x2^2) - x3^-2",
        "-(x1 + x2 + x3)^2 * x3 / (x1^2 + 4)",
    ];
    let mut r = rng(1);
    for src in exprs {
        let f = scalar_field(src, 3).unwrap();
        for _ in 0..POINTS {
            let p = half_space_point(&mut r, 3);
            let jet = f.jet_at(&p).unwrap();
            let grad = fd_gradient(scalar_value(&f), &p);
            let hess = fd_hessian(scalar_value(&f), &p);
            for i in 0..3 {
                assert!(rel(jet.partial(i), grad[i]) <= TOL, "{src} d{i} at {p:?}");
                for j in 0..3 {
                    assert!(
                        rel(jet.hessian(i, j), hess[i][j]) <= TOL,
                        "{src} d{i}d{j} at {p:?}: {} vs {}",
                        jet.hessian(i, j),
                        hess[i][j]
                    );
                }
            }
        }
    }
}

fn metrics() -> Vec<(MetricField, usize)> {
    let product = WarpedProductSpec::new(
        hyperbolic_metric(3).unwrap(),
        space_form(&SpaceFormSpec::new(2, -3.0).unwrap()).unwrap(),
        scalar_field("(x1^2 + 1)/x3 + x3", 3).unwrap(),
    )
    .unwrap();
    vec![
        (hyperbolic_metric(4).unwrap(), 4),
        (space_form(&SpaceFormSpec::new(3, 2.0).unwrap()).unwrap(), 3),
        (assemble_product_metric(&product), 5),
    ]
}

#[test]
fn christoffel_and_ricci_match_finite_differences() {
    let mut r = rng(2);
    for (metric, n) in metrics() {
        for _ in 0..POINTS {
            // base coordinates first, then the fiber's half-space chart
            let mut p = half_space_point(&mut r, n.min(3));
            if n > 3 {
                p.extend(half_space_point(&mut r, n - 3));
            }
            let fd = MetricFd::at(&metric, &p);
            let gam = christoffel(&metric, &p).unwrap();
            let oracle = fd.christoffel();
            let scale = 1.0 + oracle.iter().map(|m| m.abs().max()).fold(0.0, f64::max);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let d = (gam.get(k, i, j) - oracle[k][(i, j)]).abs() / scale;
                        assert!(d <= TOL, "{} Γ^{k}_{i}{j} at {p:?}", metric.label());
                    }
                }
            }
            let ric = ricci(&metric, &p).unwrap().ricci;
            let e = rel_err(&ric, &fd.ricci());
            assert!(e <= TOL, "{} Ricci at {p:?}: {e:e}", metric.label());
        }
    }
}

#[test]
fn scalar_operators_match_finite_differences() {
    let h3 = hyperbolic_metric(3).unwrap();
    let fields: Vec<ScalarField> = vec![
        theorem2_warp(&WarpParams {
            a: 1.5,
            b: 0.5,
            b_vec: vec![0.3, -0.2],
            c_vec: vec![1.0, 2.0],
        })
        .unwrap(),
        scalar_field("x1*x2/x3 + x3^2", 3).unwrap(),
    ];
    let mut r = rng(3);
    for f in &fields {
        for _ in 0..POINTS {
            let p = half_space_point(&mut r, 3);
            let fd = MetricFd::at(&h3, &p);
            let gam = fd.christoffel();
            let grad = fd_gradient(scalar_value(f), &p);
            let hess = fd_hessian(scalar_value(f), &p);
            let oracle_hess = DMatrix::from_fn(3, 3, |i, j| {
                hess[i][j] - (0..3).map(|k| gam[k][(i, j)] * grad[k]).sum::<f64>()
            });
            let got = hessian_scalar(&h3, f, &p).unwrap();
            assert!(rel_err(&got, &oracle_hess) <= TOL, "{} Hess at {p:?}", f.label());

            let oracle_lap = fd.ginv.component_mul(&oracle_hess).sum();
            // the trace cancels; compare against the size of the summed terms
            let terms = fd.ginv.component_mul(&oracle_hess).abs().sum();
            let lap = laplacian(&h3, f, &p).unwrap();
            assert!(
                (lap - oracle_lap).abs() / (1.0 + terms) <= TOL,
                "{} lap at {p:?}: {lap} vs {oracle_lap}",
                f.label()
            );

            let g = nalgebra::DVector::from_vec(grad.clone());
            let oracle_norm = (g.transpose() * &fd.ginv * &g)[(0, 0)];
            assert!(rel(gradient_norm_sq(&h3, f, &p).unwrap(), oracle_norm) <= TOL);
        }
    }
}

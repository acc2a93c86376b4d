//! Test-only oracles built from central finite differences of plain values.
//! Nothing here touches jet derivatives.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use warpcheck::geometry::{MetricField, ScalarField};

pub const H: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tangential coordinates in [-3, 3], last coordinate in [0.5, 5].
pub fn half_space_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
    p.push(rng.gen_range(0.5..5.0));
    p
}

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(i, s) in moves {
        q[i] += s;
    }
    q
}

pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, p: &[f64]) -> Vec<f64> {
    (0..p.len())
        .map(|i| (f(&shifted(p, &[(i, H)])) - f(&shifted(p, &[(i, -H)]))) / (2.0 * H))
        .collect()
}

pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let f0 = f(p);
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        h[i][i] = (f(&shifted(p, &[(i, H)])) - 2.0 * f0 + f(&shifted(p, &[(i, -H)]))) / (H * H);
        for j in (i + 1)..n {
            let v = (f(&shifted(p, &[(i, H), (j, H)])) - f(&shifted(p, &[(i, H), (j, -H)]))
                - f(&shifted(p, &[(i, -H), (j, H)]))
                + f(&shifted(p, &[(i, -H), (j, -H)])))
                / (4.0 * H * H);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}

/// `∂_l g_ij` and `∂_l ∂_m g_ij` by finite differences.
pub struct MetricFd {
    pub n: usize,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// dg[l][(i, j)]
    pub dg: Vec<DMatrix<f64>>,
    /// ddg[l][m][(i, j)]
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

impl MetricFd {
    pub fn at(metric: &MetricField, p: &[f64]) -> Self {
        let n = metric.dim();
        let g = metric.value_at(p).unwrap();
        let comp = |i: usize, j: usize| move |q: &[f64]| metric.value_at(q).unwrap()[(i, j)];
        let mut dg = vec![DMatrix::zeros(n, n); n];
        let mut ddg = vec![vec![DMatrix::zeros(n, n); n]; n];
        for i in 0..n {
            for j in 0..n {
                let grad = fd_gradient(comp(i, j), p);
                let hess = fd_hessian(comp(i, j), p);
                for l in 0..n {
                    dg[l][(i, j)] = grad[l];
                    for m in 0..n {
                        ddg[l][m][(i, j)] = hess[l][m];
                    }
                }
            }
        }
        let ginv = g.clone().try_inverse().unwrap();
        MetricFd { n, g, ginv, dg, ddg }
    }

    /// Γ^k_ij, stored as gamma[k][(i, j)].
    pub fn christoffel(&self) -> Vec<DMatrix<f64>> {
        let n = self.n;
        (0..n)
            .map(|k| {
                DMatrix::from_fn(n, n, |i, j| {
                    0.5 * (0..n)
                        .map(|l| {
                            self.ginv[(k, l)]
                                * (self.dg[i][(j, l)] + self.dg[j][(i, l)] - self.dg[l][(i, j)])
                        })
                        .sum::<f64>()
                })
            })
            .collect()
    }

    /// Ricci via the Riemann tensor in the form
    /// R_ij = ½ g^{kl}(∂_k∂_j g_il + ∂_i∂_l g_kj − ∂_i∂_j g_kl − ∂_k∂_l g_ij)
    ///        + g^{kl} g_{pq} (Γ^p_kj Γ^q_il − Γ^p_ij Γ^q_kl),
    /// i.e. a different rearrangement than the library uses.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.n;
        let gam = self.christoffel();
        DMatrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    let second = self.ddg[k][j][(i, l)] + self.ddg[i][l][(k, j)]
                        - self.ddg[i][j][(k, l)]
                        - self.ddg[k][l][(i, j)];
                    s += 0.5 * self.ginv[(k, l)] * second;
                    for p in 0..n {
                        for q in 0..n {
                            s += self.ginv[(k, l)]
                                * self.g[(p, q)]
                                * (gam[p][(k, j)] * gam[q][(i, l)] - gam[p][(i, j)] * gam[q][(k, l)]);
                        }
                    }
                }
            }
            s
        })
    }
}

pub fn scalar_value(f: &ScalarField) -> impl Fn(&[f64]) -> f64 + '_ {
    move |p| f.value_at(p).unwrap()
}

/// `max |a − b| / (1 + max |b|)`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max() / (1.0 + b.abs().max())
}

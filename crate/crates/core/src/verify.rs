//! Einstein-condition verifiers.
//!
//! Matrix residuals are normalized by `1 + max |target|` so that Ricci-flat
//! and curved cases are judged on the same scale.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{covariant_hessian, quadratic_form, ricci, MetricField, ScalarField};
use crate::warped::WarpedProductSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEinstein {
    pub point: Vec<f64>,
    pub lambda_local: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EinsteinReport {
    /// Mean of the per-point trace estimates `tr(g⁻¹ Ric) / dim`.
    pub lambda_estimate: f64,
    pub lambda_stddev: f64,
    /// Max over points of `max |Ric − λ̂ g| / (1 + max|g| |λ̂|)`.
    pub max_residual: f64,
    pub points_checked: usize,
    pub per_point: Vec<PointEinstein>,
    pub is_einstein: bool,
}

pub fn einstein_residual(
    metric: &MetricField,
    points: &[Vec<f64>],
    tolerance: f64,
) -> Result<EinsteinReport> {
    if points.is_empty() {
        return Err(Error::Usage("no points to check".into()));
    }
    let dim = metric.dim() as f64;
    let curv = points
        .iter()
        .map(|p| ricci(metric, p))
        .collect::<Result<Vec<_>>>()?;
    let locals: Vec<f64> = curv.iter().map(|c| c.scalar_curvature / dim).collect();
    let count = locals.len() as f64;
    let mean = locals.iter().sum::<f64>() / count;
    let stddev = (locals.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / count).sqrt();

    let per_point: Vec<PointEinstein> = curv
        .iter()
        .zip(&locals)
        .map(|(c, &lambda_local)| {
            let diff = (&c.ricci - &c.metric_value * mean).abs().max();
            PointEinstein {
                point: c.point.clone(),
                lambda_local,
                residual: diff / (1.0 + c.metric_value.abs().max() * mean.abs()),
            }
        })
        .collect();
    let max_residual = per_point
        .iter()
        .map(|p| p.residual)
        .fold(0.0, |a: f64, r| if r.is_nan() { f64::NAN } else { a.max(r) });
    let is_einstein = mean.is_finite() && stddev <= tolerance && max_residual <= tolerance;
    Ok(EinsteinReport {
        lambda_estimate: mean,
        lambda_stddev: stddev,
        max_residual,
        points_checked: points.len(),
        per_point,
        is_einstein,
    })
}

/// `λ = (1 + d/(n − 1)) λ_B`, formed as `(n − 1 + d) λ_B / (n − 1)`.
pub fn lambda_from_base(n: usize, d: usize, lambda_b: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("base dimension must be >= 3, got {n}")));
    }
    if d < 1 {
        return Err(Error::Domain("fiber dimension must be >= 1".into()));
    }
    Ok((n - 1 + d) as f64 * lambda_b / (n - 1) as f64)
}

/// `λ_F = (d − 1) c`.
pub fn fiber_lambda_from_c(d: usize, c: f64) -> f64 {
    if d <= 1 {
        0.0
    } else {
        (d - 1) as f64 * c
    }
}

/// Radius `r` when `(λ_B − λ)/d = −r²` with `r > 0`; `None` otherwise.
pub fn corollary3_radius(lambda_b: f64, lambda: f64, d: usize) -> Option<f64> {
    if d == 0 {
        return None;
    }
    let k = (lambda_b - lambda) / d as f64;
    (k < 0.0).then(|| (-k).sqrt())
}

/// Warp data on the base at one point.
struct BaseSample {
    f: f64,
    g: DMatrix<f64>,
    hess: DMatrix<f64>,
    laplacian: f64,
    grad_sq: f64,
}

fn base_sample(base: &MetricField, warp: &ScalarField, point: &[f64]) -> Result<BaseSample> {
    let c = ricci(base, point)?;
    let fj = warp.jet_at(point)?;
    let hess = covariant_hessian(&c.christoffel, &fj);
    Ok(BaseSample {
        f: fj.value(),
        laplacian: c.metric_inverse.component_mul(&hess).sum(),
        grad_sq: quadratic_form(&c.metric_inverse, fj.gradient()),
        g: c.metric_value,
        hess,
    })
}

fn require_points(points: &[Vec<f64>]) -> Result<()> {
    if points.is_empty() {
        Err(Error::Usage("no points to check".into()))
    } else {
        Ok(())
    }
}

fn positive_samples(spec: &WarpedProductSpec, points: &[Vec<f64>]) -> Result<Vec<BaseSample>> {
    require_points(points)?;
    points
        .iter()
        .map(|p| {
            spec.positive_warp(p)?;
            base_sample(spec.base(), spec.warp(), p)
        })
        .collect()
}

fn condition_i(samples: &[BaseSample], d: usize, lambda: f64, lambda_b: f64) -> f64 {
    samples
        .iter()
        .map(|s| {
            let coeff = s.f / d as f64 * (lambda_b - lambda);
            let diff = (&s.hess - &s.g * coeff).abs().max();
            diff / (1.0 + s.g.abs().max())
        })
        .fold(0.0, f64::max)
}

/// `max |Hess_B f − (f/d)(λ_B − λ) g_B| / (1 + max |g_B|)` over the points.
pub fn check_condition_i(
    spec: &WarpedProductSpec,
    lambda: f64,
    lambda_b: f64,
    points: &[Vec<f64>],
) -> Result<f64> {
    let samples = positive_samples(spec, points)?;
    Ok(condition_i(&samples, spec.d(), lambda, lambda_b))
}

/// `max |Δf/n + ρ f| / (1 + |ρ f|)` over the points.
pub fn check_laplacian_relation(
    spec: &WarpedProductSpec,
    rho: f64,
    points: &[Vec<f64>],
) -> Result<f64> {
    let samples = positive_samples(spec, points)?;
    Ok(laplacian_relation(&samples, spec.n(), rho))
}

fn laplacian_relation(samples: &[BaseSample], n: usize, rho: f64) -> f64 {
    samples
        .iter()
        .map(|s| (s.laplacian / n as f64 + rho * s.f).abs() / (1.0 + (rho * s.f).abs()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientFit {
    pub b_fit: f64,
    pub c_fit: f64,
    /// `max |q − (2 b f + c)|`, with `q = ‖∇f‖² + ρ f²`.
    pub residual: f64,
    /// All sampled `f` values coincide, so only `c` was fitted.
    pub degenerate: bool,
}

fn fit_gradient(pairs: &[(f64, f64)]) -> GradientFit {
    let count = pairs.len() as f64;
    let mean_f = pairs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_q = pairs.iter().map(|p| p.1).sum::<f64>() / count;
    let sff: f64 = pairs.iter().map(|p| (p.0 - mean_f).powi(2)).sum();
    let sfq: f64 = pairs.iter().map(|p| (p.0 - mean_f) * (p.1 - mean_q)).sum();
    let scale = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let degenerate = sff.sqrt() <= 1e-12 * (1.0 + scale) * count.sqrt();
    let (slope, c) = if degenerate {
        (0.0, mean_q)
    } else {
        let slope = sfq / sff;
        (slope, mean_q - slope * mean_f)
    };
    let residual = pairs
        .iter()
        .map(|&(f, q)| (q - (slope * f + c)).abs())
        .fold(0.0, f64::max);
    GradientFit {
        b_fit: 0.5 * slope,
        c_fit: c,
        residual,
        degenerate,
    }
}

/// Least-squares fit of `‖∇f‖² + ρ f²` against `2 b f + c`.
pub fn check_condition_iii(
    base: &MetricField,
    f: &ScalarField,
    rho: f64,
    points: &[Vec<f64>],
) -> Result<GradientFit> {
    if points.len() < 3 {
        return Err(Error::Usage(format!(
            "gradient fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let pairs = points
        .iter()
        .map(|p| {
            let s = base_sample(base, f, p)?;
            if !(s.f > 0.0) {
                return Err(Error::DomainViolation(format!(
                    "warp `{}` is {} (must be positive)",
                    f.label(),
                    s.f
                )));
            }
            Ok((s.f, s.grad_sq + rho * s.f * s.f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_gradient(&pairs))
}

/// Max absolute residual of each of the four PDE families satisfied by
/// warps with `Hess f = f g` on the upper half-space:
///
/// 1. `f_{,ij} = 0` for distinct tangential `i, j`
/// 2. `x_n f_{,in} + f_{,i} = 0`
/// 3. `x_n² f_{,ii} − x_n f_{,n} = f`
/// 4. `x_n² f_{,nn} + x_n f_{,n} = f`
pub fn check_pde_system(f: &ScalarField, points: &[Vec<f64>]) -> Result<[f64; 4]> {
    require_points(points)?;
    let n = f.dim();
    if n < 2 {
        return Err(Error::Domain("PDE system needs at least 2 variables".into()));
    }
    let last = n - 1;
    let mut out = [0.0f64; 4];
    for p in points {
        let xn = p[last];
        if xn <= 0.0 {
            return Err(Error::Domain(format!("x_n = {xn} is not positive")));
        }
        let j = f.jet_at(p)?;
        let (fv, fn_) = (j.value(), j.partial(last));
        for i in 0..last {
            for k in (i + 1)..last {
                out[0] = out[0].max(j.hessian(i, k).abs());
            }
            out[1] = out[1].max((xn * j.hessian(i, last) + j.partial(i)).abs());
            out[2] = out[2].max((xn * xn * j.hessian(i, i) - xn * fn_ - fv).abs());
        }
        out[3] = out[3].max((xn * xn * j.hessian(last, last) + xn * fn_ - fv).abs());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremOneReport {
    pub lambda: f64,
    pub lambda_b: f64,
    pub lambda_f: f64,
    /// `λ_B / (n − 1)`.
    pub rho: f64,
    /// Sampled mean of `K / (n(n − 1))` on the base.
    pub rho_measured: f64,
    /// Sampled mean of `tr(g_B⁻¹ Ric_B) / n`.
    pub lambda_b_measured: f64,
    pub b_fit: f64,
    pub c_fit: f64,
    pub degenerate_fit: bool,
    /// Hessian proportionality, folded with the Laplacian relation.
    pub residual_i: f64,
    pub residual_ii: f64,
    pub residual_iii: f64,
    pub residual_iv: f64,
    pub laplacian_residual: f64,
    /// Declared and measured `ρ` disagree beyond the tolerance.
    pub rho_inconsistent: bool,
}

impl TheoremOneReport {
    pub fn max_residual(&self) -> f64 {
        [self.residual_i, self.residual_ii, self.residual_iii, self.residual_iv]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Evaluates the four conditions characterizing Einstein warped products with
/// Einstein base (constant `λ_B`) and Einstein fiber (constant `λ_F`).
pub fn run_theorem1_suite(
    spec: &WarpedProductSpec,
    lambda_b: f64,
    lambda_f: f64,
    points: &[Vec<f64>],
    tolerance: f64,
) -> Result<TheoremOneReport> {
    let (n, d) = (spec.n(), spec.d());
    let lambda = lambda_from_base(n, d, lambda_b)?;
    let rho = lambda_b / (n - 1) as f64;
    let samples = positive_samples(spec, points)?;

    let mut lambda_b_sum = 0.0;
    let mut rho_sum = 0.0;
    for p in points {
        let c = ricci(spec.base(), p)?;
        lambda_b_sum += c.scalar_curvature / n as f64;
        rho_sum += c.normalized_scalar;
    }
    let count = points.len() as f64;
    let lambda_b_measured = lambda_b_sum / count;
    let rho_measured = rho_sum / count;

    let hess_residual = condition_i(&samples, d, lambda, lambda_b);
    let laplacian_residual = laplacian_relation(&samples, n, rho);
    let residual_ii = (lambda - lambda_from_base(n, d, lambda_b_measured)?).abs();

    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.f, s.grad_sq + rho * s.f * s.f))
        .collect();
    let fit = if pairs.len() >= 3 {
        fit_gradient(&pairs)
    } else {
        return Err(Error::Usage(format!(
            "gradient fit needs at least 3 points, got {}",
            pairs.len()
        )));
    };
    let f_max = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let q_max = pairs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let residual_iii = fit.residual.max(2.0 * fit.b_fit.abs() * f_max) / (1.0 + q_max);
    let residual_iv = (lambda_f - fiber_lambda_from_c(d, fit.c_fit)).abs();

    Ok(TheoremOneReport {
        lambda,
        lambda_b,
        lambda_f,
        rho,
        rho_measured,
        lambda_b_measured,
        b_fit: fit.b_fit,
        c_fit: fit.c_fit,
        degenerate_fit: fit.degenerate,
        residual_i: hess_residual.max(laplacian_residual),
        residual_ii,
        residual_iii,
        residual_iv,
        laplacian_residual,
        rho_inconsistent: (rho - rho_measured).abs() > tolerance * (1.0 + rho.abs()),
    })
}

//! Intrinsic geometry of a single coordinate-chart metric.
//!
//! Metrics and scalar fields are chart functions over [`Jet2`] coordinates, so
//! a single evaluation gives `g`, `∂g` and `∂²g` at a point. Christoffel
//! symbols and their first derivatives are then formed analytically from those
//! partials; no finite differences are involved.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::Jet2;

/// Pivots smaller than this make a metric count as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Largest tolerated `|g_ij - g_ji|` in a chart evaluation.
pub const SYMMETRY_TOLERANCE: f64 = 1e-14;

type MetricFn = dyn Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync;
type ScalarFn = dyn Fn(&[Jet2]) -> Result<Jet2> + Send + Sync;

/// A metric given by its component functions in one chart.
///
/// The chart function receives `dim` coordinates and returns the `dim × dim`
/// component matrix in row-major order.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    label: String,
    components: Arc<MetricFn>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

impl MetricField {
    pub fn new<F>(label: impl Into<String>, dim: usize, components: F) -> Self
    where
        F: Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync + 'static,
    {
        MetricField {
            dim,
            label: label.into(),
            components: Arc::new(components),
        }
    }

    /// The conformally flat metric `δ_ij / φ²`.
    pub fn conformally_flat(label: impl Into<String>, phi: ScalarField) -> Self {
        let dim = phi.dim();
        MetricField::new(label, dim, move |x| {
            let p = phi.eval(x)?;
            let factor = p.checked_powi(-2)?;
            Ok(diagonal(&factor, dim))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates the components over jets and checks shape, finiteness and symmetry.
    pub fn eval(&self, coords: &[Jet2]) -> Result<Vec<Jet2>> {
        let n = self.dim;
        if coords.len() != n {
            return Err(Error::Arity(format!(
                "metric `{}` expects {n} coordinates, got {}",
                self.label,
                coords.len()
            )));
        }
        let g = (self.components)(coords)?;
        if g.len() != n * n {
            return Err(Error::Arity(format!(
                "metric `{}` returned {} components, expected {}",
                self.label,
                g.len(),
                n * n
            )));
        }
        if let Some(bad) = g.iter().find(|c| !c.is_finite()) {
            return Err(Error::Singularity(format!(
                "metric `{}` is not finite (component value {})",
                self.label,
                bad.value()
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let asym = (g[i * n + j].value() - g[j * n + i].value()).abs();
                if asym > SYMMETRY_TOLERANCE {
                    return Err(Error::Domain(format!(
                        "metric `{}` is not symmetric: |g[{i}][{j}] - g[{j}][{i}]| = {asym:e}",
                        self.label
                    )));
                }
            }
        }
        Ok(g)
    }

    /// Plain component values at a point.
    pub fn value_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.eval(&Jet2::plain(point))?;
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| g[i * self.dim + j].value()))
    }
}

/// A scalar field in one chart.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    label: String,
    eval: Arc<ScalarFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(label: impl Into<String>, dim: usize, eval: F) -> Self
    where
        F: Fn(&[Jet2]) -> Result<Jet2> + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn constant(label: impl Into<String>, dim: usize, value: f64) -> Self {
        ScalarField::new(label, dim, move |x: &[Jet2]| {
            Ok(Jet2::constant(value, x.first().map_or(0, Jet2::arity)))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, coords: &[Jet2]) -> Result<Jet2> {
        if coords.len() != self.dim {
            return Err(Error::Arity(format!(
                "field `{}` expects {} coordinates, got {}",
                self.label,
                self.dim,
                coords.len()
            )));
        }
        let v = (self.eval)(coords)?;
        if !v.is_finite() {
            return Err(Error::Singularity(format!(
                "field `{}` is not finite at this point",
                self.label
            )));
        }
        Ok(v)
    }

    pub fn value_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval(&Jet2::plain(point))?.value())
    }

    /// Value, gradient and Hessian at `point`.
    pub fn jet_at(&self, point: &[f64]) -> Result<Jet2> {
        self.eval(&Jet2::seed_all(point))
    }
}

/// `factor · δ_ij` as a row-major jet matrix.
pub fn diagonal(factor: &Jet2, dim: usize) -> Vec<Jet2> {
    let zero = Jet2::constant(0.0, factor.arity());
    (0..dim * dim)
        .map(|k| if k / dim == k % dim { factor.clone() } else { zero.clone() })
        .collect()
}

/// Inverts a small dense matrix by Gauss-Jordan elimination with partial pivoting.
pub fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Arity(format!("cannot invert a {}x{} matrix", n, m.ncols())));
    }
    let mut a = m.clone();
    let mut inv = DMatrix::<f64>::identity(n, n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[(r, col)].abs().total_cmp(&a[(s, col)].abs()))
            .unwrap_or(col);
        let pivot = a[(pivot_row, col)];
        if !(pivot.abs() >= PIVOT_THRESHOLD) {
            return Err(Error::Singularity(format!(
                "pivot {pivot:e} in column {col} is below {PIVOT_THRESHOLD:e}"
            )));
        }
        a.swap_rows(col, pivot_row);
        inv.swap_rows(col, pivot_row);
        for j in 0..n {
            a[(col, j)] /= pivot;
            inv[(col, j)] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[(r, col)];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= factor * a[(col, j)];
                inv[(r, j)] -= factor * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

/// Christoffel symbols of the second kind, indexed `(k, i, j)` for `Γ^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn zeros(dim: usize) -> Self {
        Christoffel {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    /// Largest entrywise difference from another array of the same dimension.
    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// `∂_l Γ^k_ij`, indexed `(l, k, i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelDerivative {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelDerivative {
    #[inline]
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.data[((l * n + k) * n + i) * n + j]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Curvature data of a metric at one chart point.
#[derive(Debug, Clone)]
pub struct CurvatureAtPoint {
    pub point: Vec<f64>,
    pub metric_value: DMatrix<f64>,
    pub metric_inverse: DMatrix<f64>,
    pub christoffel: Christoffel,
    pub christoffel_derivative: ChristoffelDerivative,
    pub ricci: DMatrix<f64>,
    pub scalar_curvature: f64,
    /// `K / (n (n - 1))`; zero in dimension one.
    pub normalized_scalar: f64,
}

/// Metric with first and second partials at a point.
struct MetricJet {
    dim: usize,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    jets: Vec<Jet2>,
}

impl MetricJet {
    fn at(metric: &MetricField, point: &[f64]) -> Result<Self> {
        let dim = metric.dim();
        if point.len() != dim {
            return Err(Error::Arity(format!(
                "metric `{}` is {dim}-dimensional, point has {} coordinates",
                metric.label(),
                point.len()
            )));
        }
        let jets = metric.eval(&Jet2::seed_all(point))?;
        let g = DMatrix::from_fn(dim, dim, |i, j| jets[i * dim + j].value());
        let ginv = invert(&g)?;
        Ok(MetricJet { dim, g, ginv, jets })
    }

    #[inline]
    fn dg(&self, l: usize, i: usize, j: usize) -> f64 {
        self.jets[i * self.dim + j].partial(l)
    }

    #[inline]
    fn ddg(&self, l: usize, m: usize, i: usize, j: usize) -> f64 {
        self.jets[i * self.dim + j].hessian(l, m)
    }

    /// `∂_i g_jl + ∂_j g_il − ∂_l g_ij`
    #[inline]
    fn first_kind(&self, l: usize, i: usize, j: usize) -> f64 {
        self.dg(i, j, l) + self.dg(j, i, l) - self.dg(l, i, j)
    }

    fn christoffel(&self) -> Christoffel {
        let n = self.dim;
        let mut first = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    first[(l * n + i) * n + j] = self.first_kind(l, i, j);
                }
            }
        }
        let mut gamma = Christoffel::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let s: f64 = (0..n)
                        .map(|l| self.ginv[(k, l)] * first[(l * n + i) * n + j])
                        .sum();
                    gamma.set(k, i, j, 0.5 * s);
                    gamma.set(k, j, i, 0.5 * s);
                }
            }
        }
        gamma
    }

    fn christoffel_derivative(&self) -> ChristoffelDerivative {
        let n = self.dim;
        // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
        let mut dginv = vec![0.0; n * n * n];
        for m in 0..n {
            let dgm = DMatrix::from_fn(n, n, |a, b| self.dg(m, a, b));
            let prod = -(&self.ginv * dgm * &self.ginv);
            for k in 0..n {
                for l in 0..n {
                    dginv[(m * n + k) * n + l] = prod[(k, l)];
                }
            }
        }
        let mut data = vec![0.0; n * n * n * n];
        for m in 0..n {
            for i in 0..n {
                for j in i..n {
                    for k in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            let d_first = self.ddg(m, i, j, l) + self.ddg(m, j, i, l)
                                - self.ddg(m, l, i, j);
                            s += dginv[(m * n + k) * n + l] * self.first_kind(l, i, j)
                                + self.ginv[(k, l)] * d_first;
                        }
                        data[((m * n + k) * n + i) * n + j] = 0.5 * s;
                        data[((m * n + k) * n + j) * n + i] = 0.5 * s;
                    }
                }
            }
        }
        ChristoffelDerivative { dim: n, data }
    }
}

/// Christoffel symbols `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub fn christoffel(metric: &MetricField, point: &[f64]) -> Result<Christoffel> {
    Ok(MetricJet::at(metric, point)?.christoffel())
}

/// Closed-form Christoffel symbols of `δ_ij / φ²`.
///
/// Only four index patterns are nonzero: `Γ^i_ij = −φ_j/φ` (i ≠ j),
/// `Γ^k_ii = φ_k/φ` (k ≠ i), `Γ^i_ii = −φ_i/φ`; fully distinct indices vanish.
pub fn conformal_christoffel(phi: &ScalarField, point: &[f64]) -> Result<Christoffel> {
    let n = phi.dim();
    let p = phi.jet_at(point)?;
    if p.value() == 0.0 {
        return Err(Error::Singularity("conformal factor vanishes".into()));
    }
    let log_grad: Vec<f64> = p.gradient().iter().map(|d| d / p.value()).collect();
    let mut gamma = Christoffel::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                gamma.set(i, i, i, -log_grad[i]);
            } else {
                gamma.set(i, i, j, -log_grad[j]);
                gamma.set(i, j, i, -log_grad[j]);
                gamma.set(j, i, i, log_grad[j]);
            }
        }
    }
    Ok(gamma)
}

/// Ricci tensor and scalar curvature at `point`.
///
/// `Ric_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik`.
pub fn ricci(metric: &MetricField, point: &[f64]) -> Result<CurvatureAtPoint> {
    let mj = MetricJet::at(metric, point)?;
    let n = mj.dim;
    let gamma = mj.christoffel();
    let dgamma = mj.christoffel_derivative();

    let trace: Vec<f64> = (0..n).map(|l| (0..n).map(|k| gamma.get(k, k, l)).sum()).collect();
    let mut ric = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += dgamma.get(k, k, i, j) - dgamma.get(j, k, i, k);
                s += trace[k] * gamma.get(k, i, j);
                for l in 0..n {
                    s -= gamma.get(k, j, l) * gamma.get(l, i, k);
                }
            }
            ric[(i, j)] = s;
        }
    }
    let scalar = mj.ginv.component_mul(&ric).sum();
    let normalized = if n > 1 {
        scalar / (n * (n - 1)) as f64
    } else {
        0.0
    };
    Ok(CurvatureAtPoint {
        point: point.to_vec(),
        metric_value: mj.g,
        metric_inverse: mj.ginv,
        christoffel: gamma,
        christoffel_derivative: dgamma,
        ricci: ric,
        scalar_curvature: scalar,
        normalized_scalar: normalized,
    })
}

fn check_field_dim(metric: &MetricField, f: &ScalarField) -> Result<()> {
    if metric.dim() != f.dim() {
        return Err(Error::Arity(format!(
            "field `{}` has dimension {}, metric `{}` has {}",
            f.label(),
            f.dim(),
            metric.label(),
            metric.dim()
        )));
    }
    Ok(())
}

/// Covariant Hessian `f_{,ij} − Γ^k_ij f_{,k}`.
pub fn hessian_scalar(metric: &MetricField, f: &ScalarField, point: &[f64]) -> Result<DMatrix<f64>> {
    check_field_dim(metric, f)?;
    let gamma = christoffel(metric, point)?;
    let fj = f.jet_at(point)?;
    Ok(covariant_hessian(&gamma, &fj))
}

pub(crate) fn covariant_hessian(gamma: &Christoffel, f: &Jet2) -> DMatrix<f64> {
    let n = gamma.dim();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let corr: f64 = (0..n).map(|k| gamma.get(k, i, j) * f.partial(k)).sum();
            let v = f.hessian(i, j) - corr;
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// `g^{ij} f_{,i} f_{,j}`.
pub fn gradient_norm_sq(metric: &MetricField, f: &ScalarField, point: &[f64]) -> Result<f64> {
    check_field_dim(metric, f)?;
    let ginv = invert(&metric.value_at(point)?)?;
    let fj = f.jet_at(point)?;
    Ok(quadratic_form(&ginv, fj.gradient()))
}

pub(crate) fn quadratic_form(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[(i, j)] * v[i] * v[j];
        }
    }
    s
}

/// Gradient norm for the upper-half-space metric `δ_ij / x_n²`: `x_n² Σ f_{,j}²`.
pub fn upper_half_space_gradient_norm_sq(f: &ScalarField, point: &[f64]) -> Result<f64> {
    let xn = *point
        .last()
        .ok_or_else(|| Error::Arity("empty point".into()))?;
    if xn <= 0.0 {
        return Err(Error::Domain(format!("x_n = {xn} is not positive")));
    }
    let fj = f.jet_at(point)?;
    Ok(xn * xn * fj.gradient().iter().map(|d| d * d).sum::<f64>())
}

/// Laplace-Beltrami operator as the metric trace of the covariant Hessian.
pub fn laplacian(metric: &MetricField, f: &ScalarField, point: &[f64]) -> Result<f64> {
    check_field_dim(metric, f)?;
    let mj = MetricJet::at(metric, point)?;
    let h = covariant_hessian(&mj.christoffel(), &f.jet_at(point)?);
    Ok(mj.ginv.component_mul(&h).sum())
}

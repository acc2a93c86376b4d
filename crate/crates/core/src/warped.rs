//! Warped products `B ×_f F` with metric `g_B + f² g_F`.
//!
//! Two independent Ricci computations are provided: the direct curvature of
//! the assembled `(n + d)`-dimensional metric, and the block formulas
//!
//! ```text
//! Ric(X, Y) = Ric_B(X, Y) − (d/f) Hess_B f(X, Y)
//! Ric(X, Z) = 0
//! Ric(Z, W) = Ric_F(Z, W) − g(Z, W) (Δ_B f / f + (d − 1) ‖∇f‖² / f²)
//! ```
//!
//! Product chart coordinates are `(x_1..x_n, y_1..y_d)`, base first.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{covariant_hessian, quadratic_form, ricci, MetricField, ScalarField};
use crate::jets::Jet2;

#[derive(Debug, Clone)]
pub struct WarpedProductSpec {
    base: MetricField,
    fiber: MetricField,
    warp: ScalarField,
}

impl WarpedProductSpec {
    pub fn new(base: MetricField, fiber: MetricField, warp: ScalarField) -> Result<Self> {
        if base.dim() < 3 {
            return Err(Error::Domain(format!(
                "base dimension must be >= 3, got {}",
                base.dim()
            )));
        }
        if fiber.dim() < 1 {
            return Err(Error::Domain("fiber dimension must be >= 1".into()));
        }
        if warp.dim() != base.dim() {
            return Err(Error::Arity(format!(
                "warp `{}` has {} variables but the base is {}-dimensional",
                warp.label(),
                warp.dim(),
                base.dim()
            )));
        }
        Ok(WarpedProductSpec { base, fiber, warp })
    }

    pub fn base(&self) -> &MetricField {
        &self.base
    }

    pub fn fiber(&self) -> &MetricField {
        &self.fiber
    }

    pub fn warp(&self) -> &ScalarField {
        &self.warp
    }

    /// Base dimension `n`.
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    /// Fiber dimension `d`.
    pub fn d(&self) -> usize {
        self.fiber.dim()
    }

    /// Warp value at a base point, failing unless it is positive.
    pub fn positive_warp(&self, base_point: &[f64]) -> Result<Jet2> {
        let f = self.warp.jet_at(base_point)?;
        ensure_positive(&self.warp, &f)?;
        Ok(f)
    }
}

fn ensure_positive(warp: &ScalarField, f: &Jet2) -> Result<()> {
    if !(f.value() > 0.0) {
        return Err(Error::DomainViolation(format!(
            "warp `{}` is {} (must be positive)",
            warp.label(),
            f.value()
        )));
    }
    Ok(())
}

/// The block-diagonal metric `g_B(x) ⊕ f(x)² g_F(y)`.
pub fn assemble_product_metric(spec: &WarpedProductSpec) -> MetricField {
    let (n, d) = (spec.n(), spec.d());
    let dim = n + d;
    let s = spec.clone();
    MetricField::new(
        format!("{} x_[{}] {}", s.base.label(), s.warp.label(), s.fiber.label()),
        dim,
        move |x| {
            let (xb, yf) = x.split_at(n);
            let gb = s.base.eval(xb)?;
            let f = s.warp.eval(xb)?;
            ensure_positive(&s.warp, &f)?;
            let gf = s.fiber.eval(yf)?;
            let f2 = &f * &f;
            let zero = Jet2::constant(0.0, f.arity());
            let mut g = vec![zero; dim * dim];
            for i in 0..n {
                for j in 0..n {
                    g[i * dim + j] = gb[i * n + j].clone();
                }
            }
            for a in 0..d {
                for b in 0..d {
                    g[(n + a) * dim + n + b] = &f2 * &gf[a * d + b];
                }
            }
            Ok(g)
        },
    )
}

/// Ricci tensor split into base, mixed and fiber blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciBlocks {
    pub base_block: DMatrix<f64>,
    pub mixed_block: DMatrix<f64>,
    pub fiber_block: DMatrix<f64>,
}

impl RicciBlocks {
    /// Splits a full `(n + d)²` tensor.
    pub fn from_full(full: &DMatrix<f64>, n: usize) -> Self {
        let d = full.nrows() - n;
        RicciBlocks {
            base_block: full.view((0, 0), (n, n)).into_owned(),
            mixed_block: full.view((0, n), (n, d)).into_owned(),
            fiber_block: full.view((n, n), (d, d)).into_owned(),
        }
    }

    pub fn to_full(&self) -> DMatrix<f64> {
        let n = self.base_block.nrows();
        let d = self.fiber_block.nrows();
        let mut full = DMatrix::<f64>::zeros(n + d, n + d);
        full.view_mut((0, 0), (n, n)).copy_from(&self.base_block);
        full.view_mut((0, n), (n, d)).copy_from(&self.mixed_block);
        full.view_mut((n, 0), (d, n)).copy_from(&self.mixed_block.transpose());
        full.view_mut((n, n), (d, d)).copy_from(&self.fiber_block);
        full
    }
}

/// Ricci of the warped product from base and fiber data only.
pub fn oneill_ricci(
    spec: &WarpedProductSpec,
    base_point: &[f64],
    fiber_point: &[f64],
) -> Result<RicciBlocks> {
    let (n, d) = (spec.n(), spec.d());
    let f = spec.positive_warp(base_point)?;
    let base = ricci(&spec.base, base_point)?;
    let fiber = ricci(&spec.fiber, fiber_point)?;

    let hess = covariant_hessian(&base.christoffel, &f);
    let lap = base.metric_inverse.component_mul(&hess).sum();
    let grad_sq = quadratic_form(&base.metric_inverse, f.gradient());
    let fv = f.value();

    let base_block = &base.ricci - hess * (d as f64 / fv);
    // (d − 1) vanishes for line fibers, dropping the gradient term.
    let warp_term = lap / fv + (d as f64 - 1.0) * grad_sq / (fv * fv);
    let fiber_block = &fiber.ricci - &fiber.metric_value * (fv * fv * warp_term);
    Ok(RicciBlocks {
        base_block,
        mixed_block: DMatrix::zeros(n, d),
        fiber_block,
    })
}

/// `max |Ric_direct − Ric_block| / (1 + max |Ric_direct|)`.
pub fn cross_check_ricci(
    spec: &WarpedProductSpec,
    base_point: &[f64],
    fiber_point: &[f64],
) -> Result<f64> {
    let blocks = oneill_ricci(spec, base_point, fiber_point)?;
    let point: Vec<f64> = base_point.iter().chain(fiber_point).copied().collect();
    let direct = ricci(&assemble_product_metric(spec), &point)?.ricci;
    let diff = (&direct - blocks.to_full()).abs().max();
    Ok(diff / (1.0 + direct.abs().max()))
}

//! Concrete metrics and warping functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{diagonal, MetricField, ScalarField};
use crate::jets::Jet2;

fn arity(x: &[Jet2]) -> usize {
    x.first().map_or(0, Jet2::arity)
}

/// `δ_ij` on ℝⁿ.
pub fn euclidean_metric(n: usize) -> Result<MetricField> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    Ok(MetricField::new(format!("R^{n}"), n, move |x| {
        Ok(diagonal(&Jet2::constant(1.0, arity(x)), n))
    }))
}

/// Upper half-space model `δ_ij / x_n²` of Hⁿ. Einstein constant `−(n − 1)`.
pub fn hyperbolic_metric(n: usize) -> Result<MetricField> {
    scaled_hyperbolic(n, 1.0, format!("H^{n}"))
}

fn scaled_hyperbolic(n: usize, scale_sq: f64, label: String) -> Result<MetricField> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "hyperbolic space needs dimension >= 2, got {n}"
        )));
    }
    Ok(MetricField::new(label, n, move |x| {
        let xn = &x[n - 1];
        if xn.value() <= 0.0 {
            return Err(Error::Domain(format!(
                "upper half-space chart needs x_{n} > 0, got {}",
                xn.value()
            )));
        }
        Ok(diagonal(&(xn.checked_powi(-2)? * scale_sq), n))
    }))
}

/// Chart used to realize a space form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// `{y_dim > 0}` with `k² δ / y_dim²`.
    UpperHalfSpace,
    /// Stereographic sphere chart `4r² δ / (1 + |y|²)²`.
    Stereographic,
    Cartesian,
}

/// A constant-curvature model with a prescribed Einstein constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceFormSpec {
    pub dim: usize,
    pub einstein_constant: f64,
    pub chart: Chart,
}

impl SpaceFormSpec {
    /// Picks the chart from the sign of `λ`.
    pub fn new(dim: usize, einstein_constant: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !einstein_constant.is_finite() {
            return Err(Error::Domain("Einstein constant must be finite".into()));
        }
        if dim == 1 && einstein_constant != 0.0 {
            return Err(Error::Domain(format!(
                "a 1-dimensional manifold is Ricci-flat; cannot realize λ = {einstein_constant}"
            )));
        }
        let chart = if einstein_constant > 0.0 {
            Chart::Stereographic
        } else if einstein_constant < 0.0 {
            Chart::UpperHalfSpace
        } else {
            Chart::Cartesian
        };
        Ok(SpaceFormSpec {
            dim,
            einstein_constant,
            chart,
        })
    }
}

/// Metric with `Ric = λ g` for the given spec.
pub fn space_form(spec: &SpaceFormSpec) -> Result<MetricField> {
    let SpaceFormSpec {
        dim,
        einstein_constant: lambda,
        chart,
    } = *spec;
    let expected = SpaceFormSpec::new(dim, lambda)?;
    if expected.chart != chart {
        return Err(Error::Domain(format!(
            "chart {chart:?} cannot realize λ = {lambda}"
        )));
    }
    let d1 = (dim as f64) - 1.0;
    match chart {
        Chart::Cartesian => euclidean_metric(dim),
        Chart::UpperHalfSpace => {
            // Ric = −(d − 1)/k² g
            let k2 = d1 / -lambda;
            scaled_hyperbolic(dim, k2, format!("H^{dim}(λ={lambda})"))
        }
        Chart::Stereographic => {
            // Ric = (d − 1)/r² g
            let four_r2 = 4.0 * d1 / lambda;
            Ok(MetricField::new(
                format!("S^{dim}(λ={lambda})"),
                dim,
                move |y| {
                    let mut r2 = Jet2::constant(1.0, arity(y));
                    for c in y {
                        r2 = r2 + c * c;
                    }
                    Ok(diagonal(&(r2.checked_powi(-2)? * four_r2), dim))
                },
            ))
        }
    }
}

/// Parameters of the warping family on the upper half-space
/// `f = (Σ_j a/2 x_j² + b_j x_j + c_j)/x_n + a x_n/2 + b/x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpParams {
    pub a: f64,
    pub b: f64,
    pub b_vec: Vec<f64>,
    pub c_vec: Vec<f64>,
}

impl WarpParams {
    /// Base dimension `n`, one more than the number of tangential coefficients.
    pub fn n(&self) -> usize {
        self.b_vec.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.b_vec.len() != self.c_vec.len() {
            return Err(Error::validation(
                "params",
                format!(
                    "b_vec has {} entries but c_vec has {}",
                    self.b_vec.len(),
                    self.c_vec.len()
                ),
            ));
        }
        if self.b_vec.is_empty() {
            return Err(Error::validation("params", "b_vec and c_vec must be non-empty"));
        }
        let all = [self.a, self.b]
            .into_iter()
            .chain(self.b_vec.iter().copied())
            .chain(self.c_vec.iter().copied());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("params", "coefficients must be finite"));
        }
        Ok(())
    }

    /// `f = 1/x_n` (a = 0, b = 1, all tangential coefficients zero).
    pub fn inverse_height(n: usize) -> Self {
        WarpParams {
            a: 0.0,
            b: 1.0,
            b_vec: vec![0.0; n - 1],
            c_vec: vec![0.0; n - 1],
        }
    }
}

/// The warping function as a scalar field on n variables.
pub fn theorem2_warp(params: &WarpParams) -> Result<ScalarField> {
    params.validate()?;
    let n = params.n();
    let p = params.clone();
    Ok(ScalarField::new(
        format!("warp(a={}, b={})", params.a, params.b),
        n,
        move |x| {
            let xn = &x[n - 1];
            if xn.value() <= 0.0 {
                return Err(Error::Domain(format!(
                    "warp needs x_{n} > 0, got {}",
                    xn.value()
                )));
            }
            let mut numer = Jet2::constant(p.b, xn.arity());
            for j in 0..n - 1 {
                let xj = &x[j];
                numer = numer + xj * xj * (0.5 * p.a) + xj * p.b_vec[j] + p.c_vec[j];
            }
            Ok(&numer * &xn.checked_recip()? + xn * (0.5 * p.a))
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corollary4 {
    pub globally_positive: bool,
    /// `‖∇f‖² − f²` for the family, a constant.
    pub c: f64,
    pub lambda_f: f64,
}

/// `Σ_j (b_j² − 2 a c_j) − 2ab`, the constant value of `‖∇f‖² − f²` on H^n.
pub fn gradient_constant(params: &WarpParams) -> f64 {
    let tangential: f64 = params
        .b_vec
        .iter()
        .zip(&params.c_vec)
        .map(|(bj, cj)| bj * bj - 2.0 * params.a * cj)
        .sum();
    tangential - 2.0 * params.a * params.b
}

/// `Σ_j (b_j² − 2 a c_j) − b`, as the constant is usually quoted.
///
/// This agrees with [`gradient_constant`] only when `b = 0` or `a = 1/2`; it is
/// kept for comparison and is not used by any check.
pub fn published_corollary4_constant(params: &WarpParams) -> f64 {
    let tangential: f64 = params
        .b_vec
        .iter()
        .zip(&params.c_vec)
        .map(|(bj, cj)| bj * bj - 2.0 * params.a * cj)
        .sum();
    tangential - params.b
}

/// Positivity predicate (`a > 0`, `b ≥ 0`, `b_j² − 2ac_j ≤ 0`) and the fiber constant it forces.
pub fn corollary4_check(params: &WarpParams, d: usize) -> Result<Corollary4> {
    params.validate()?;
    if d == 0 {
        return Err(Error::Domain("fiber dimension must be >= 1".into()));
    }
    let globally_positive = params.a > 0.0
        && params.b >= 0.0
        && params
            .b_vec
            .iter()
            .zip(&params.c_vec)
            .all(|(bj, cj)| bj * bj - 2.0 * params.a * cj <= 0.0);
    let c = gradient_constant(params);
    let lambda_f = (d as f64 - 1.0) * c;
    if globally_positive {
        debug_assert!(lambda_f <= 0.0);
    }
    Ok(Corollary4 {
        globally_positive,
        c,
        lambda_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corollary5 {
    pub applies: bool,
    pub lambda_f: f64,
}

/// `a = 0`, `b ≥ 0`, `Σc_j + b > 0`, all `b_j = 0`: positive warp, Ricci-flat fiber.
pub fn corollary5_check(params: &WarpParams, d: usize) -> Result<Corollary5> {
    params.validate()?;
    if d == 0 {
        return Err(Error::Domain("fiber dimension must be >= 1".into()));
    }
    let applies = params.a == 0.0
        && params.b >= 0.0
        && params.c_vec.iter().sum::<f64>() + params.b > 0.0
        && params.b_vec.iter().all(|&bj| bj == 0.0);
    let lambda_f = if applies {
        0.0
    } else {
        (d as f64 - 1.0) * gradient_constant(params)
    };
    Ok(Corollary5 { applies, lambda_f })
}

/// Model kinds addressable from scenario files.
pub const MODEL_KINDS: &[(&str, &str)] = &[
    ("hyperbolic", "upper half-space H^n, metric δ/x_n², λ = -(n-1); needs dim >= 2"),
    ("euclidean", "flat R^n, identity metric, λ = 0"),
    (
        "space_form",
        "constant curvature model with prescribed λ: sphere (λ>0, stereographic), flat (λ=0), scaled H^n (λ<0)",
    ),
];

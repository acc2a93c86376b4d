//! Scenario files (`warpcheck-scenario/1`) and the runner that turns them
//! into [`Report`]s.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr;
use crate::geometry::{gradient_norm_sq, MetricField, ScalarField};
use crate::models::{
    self, corollary4_check, corollary5_check, theorem2_warp, Chart, SpaceFormSpec, WarpParams,
};
use crate::report::{CheckError, CheckResult, DerivedConstants, Report, Timings, REPORT_SCHEMA};
use crate::sampling::{Sampler, SamplingBox, DEFAULT_SEED};
use crate::verify::{
    check_pde_system, einstein_residual, lambda_from_base, run_theorem1_suite,
};
use crate::warped::{assemble_product_metric, cross_check_ricci, WarpedProductSpec};

pub const SCENARIO_SCHEMA: &str = "warpcheck-scenario/1";
pub const SEED_ENV: &str = "WARPCHECK_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Einstein,
    Theorem1,
    Pde,
    Corollary4,
    Corollary5,
    Crosscheck,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Einstein,
        CheckKind::Theorem1,
        CheckKind::Pde,
        CheckKind::Corollary4,
        CheckKind::Corollary5,
        CheckKind::Crosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Einstein => "einstein",
            CheckKind::Theorem1 => "theorem1",
            CheckKind::Pde => "pde",
            CheckKind::Corollary4 => "corollary4",
            CheckKind::Corollary5 => "corollary5",
            CheckKind::Crosscheck => "crosscheck",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        CheckKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// AD-exact identities get 1e-8; composed multi-operator checks 1e-6.
    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckKind::Einstein | CheckKind::Theorem1 => 1e-6,
            _ => 1e-8,
        }
    }

    fn needs_curvature(self) -> bool {
        !matches!(self, CheckKind::Corollary4 | CheckKind::Corollary5)
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model from the library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelRef {
    Hyperbolic { dim: usize },
    Euclidean { dim: usize },
    SpaceForm { dim: usize, lambda: f64 },
}

impl ModelRef {
    pub fn dim(&self) -> usize {
        match *self {
            ModelRef::Hyperbolic { dim }
            | ModelRef::Euclidean { dim }
            | ModelRef::SpaceForm { dim, .. } => dim,
        }
    }

    /// Einstein constant of the model.
    pub fn lambda(&self) -> f64 {
        match *self {
            ModelRef::Hyperbolic { dim } => -(dim as f64 - 1.0),
            ModelRef::Euclidean { .. } => 0.0,
            ModelRef::SpaceForm { lambda, .. } => lambda,
        }
    }

    pub fn chart(&self) -> Result<Chart> {
        Ok(match *self {
            ModelRef::Hyperbolic { .. } => Chart::UpperHalfSpace,
            ModelRef::Euclidean { .. } => Chart::Cartesian,
            ModelRef::SpaceForm { dim, lambda } => SpaceFormSpec::new(dim, lambda)?.chart,
        })
    }

    pub fn build(&self) -> Result<MetricField> {
        match *self {
            ModelRef::Hyperbolic { dim } => models::hyperbolic_metric(dim),
            ModelRef::Euclidean { dim } => models::euclidean_metric(dim),
            ModelRef::SpaceForm { dim, lambda } => {
                models::space_form(&SpaceFormSpec::new(dim, lambda)?)
            }
        }
    }
}

/// Either a member of the explicit warping family or a free expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<WarpParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
}

impl WarpRef {
    pub fn theorem2(params: WarpParams) -> Self {
        WarpRef {
            family: Some("theorem2".into()),
            params: Some(params),
            expression: None,
        }
    }

    pub fn expression(src: &str) -> Self {
        WarpRef {
            family: None,
            params: None,
            expression: Some(src.into()),
        }
    }

    /// Family parameters, when the warp is a family member.
    pub fn family_params(&self) -> Option<&WarpParams> {
        self.params.as_ref()
    }

    fn validate(&self, n: usize) -> Result<()> {
        match (&self.family, &self.params, &self.expression) {
            (Some(fam), Some(p), None) => {
                if fam != "theorem2" {
                    return Err(Error::validation(
                        "warp.family",
                        format!("unknown family `{fam}` (expected \"theorem2\")"),
                    ));
                }
                p.validate().map_err(|e| Error::validation("warp.params", e.to_string()))?;
                if p.n() != n {
                    return Err(Error::validation(
                        "warp.params",
                        format!(
                            "b_vec/c_vec have {} entries; base dimension {n} needs {}",
                            p.b_vec.len(),
                            n - 1
                        ),
                    ));
                }
                Ok(())
            }
            (None, None, Some(src)) => expr::parse(src, n).map(|_| ()),
            _ => Err(Error::validation(
                "warp",
                "give either {family, params} or {expression}",
            )),
        }
    }

    pub fn build(&self, n: usize) -> Result<ScalarField> {
        self.validate(n)?;
        match (&self.params, &self.expression) {
            (Some(p), _) => theorem2_warp(p),
            (_, Some(src)) => expr::scalar_field(src, n),
            _ => unreachable!("validated above"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default = "default_count")]
    pub count: usize,
    /// Resolved at parse time: CLI flag, then this field, then `WARPCHECK_SEED`, then 42.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_x_n_range")]
    pub x_n_range: [f64; 2],
    #[serde(default = "default_tangential_bound")]
    pub tangential_bound: f64,
}

fn default_count() -> usize {
    100
}

fn default_x_n_range() -> [f64; 2] {
    SamplingBox::default().x_n_range
}

fn default_tangential_bound() -> f64 {
    SamplingBox::default().tangential_bound
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            count: default_count(),
            seed: None,
            x_n_range: default_x_n_range(),
            tangential_bound: default_tangential_bound(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    pub base: ModelRef,
    pub fiber: ModelRef,
    pub warp: WarpRef,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub tolerances: BTreeMap<CheckKind, f64>,
}

fn json_error(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Syntax | Category::Eof => Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
        Category::Data | Category::Io => {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("scenario")
                .to_string();
            Error::Validation {
                field,
                message: msg,
            }
        }
    }
}

impl Scenario {
    /// Parses and validates scenario JSON; the seed falls back to the
    /// environment and then to the default when the file omits it.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: Scenario = serde_json::from_str(text).map_err(json_error)?;
        if s.sampling.seed.is_none() {
            s.sampling.seed = Some(seed_from_env()?.unwrap_or(DEFAULT_SEED));
        }
        s.validate()?;
        Ok(s)
    }

    pub fn seed(&self) -> u64 {
        self.sampling.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn tolerance(&self, check: CheckKind) -> f64 {
        self.tolerances
            .get(&check)
            .copied()
            .unwrap_or_else(|| check.default_tolerance())
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(Error::validation(
                "schema",
                format!("expected \"{SCENARIO_SCHEMA}\", got \"{}\"", self.schema),
            ));
        }
        let n = self.base.dim();
        for (field, model) in [("base", &self.base), ("fiber", &self.fiber)] {
            model.build().map_err(|e| Error::validation(field, e.to_string()))?;
        }
        if self.checks.contains(&CheckKind::Theorem1) && n < 3 {
            return Err(Error::validation(
                "base.dim",
                format!("theorem1 needs a base of dimension >= 3, got {n}"),
            ));
        }
        if n < 3 && self.checks.iter().any(|c| c.needs_curvature() && *c != CheckKind::Pde) {
            return Err(Error::validation(
                "base.dim",
                format!("warped products need a base of dimension >= 3, got {n}"),
            ));
        }
        let mut seen = Vec::new();
        for c in &self.checks {
            if seen.contains(c) {
                return Err(Error::validation("checks", format!("`{c}` listed twice")));
            }
            seen.push(*c);
        }
        self.warp.validate(n)?;
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::validation(
                    format!("tolerances.{k}"),
                    "must be a non-negative number",
                ));
            }
        }
        let [lo, hi] = self.sampling.x_n_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::validation(
                "sampling.x_n_range",
                "needs 0 < lo <= hi",
            ));
        }
        if !(self.sampling.tangential_bound.is_finite() && self.sampling.tangential_bound >= 0.0) {
            return Err(Error::validation(
                "sampling.tangential_bound",
                "must be a non-negative number",
            ));
        }
        Ok(())
    }
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::validation(SEED_ENV, format!("`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json(&text)
}

/// Everything a check needs, built once per run.
struct Setup {
    base: MetricField,
    warp: ScalarField,
    product: Option<WarpedProductSpec>,
    base_points: Vec<Vec<f64>>,
    fiber_points: Vec<Vec<f64>>,
    lambda_b: f64,
    lambda_f: f64,
    d: usize,
}

impl Setup {
    fn new(s: &Scenario) -> Result<Self> {
        let base = s.base.build()?;
        let fiber = s.fiber.build()?;
        let warp = s.warp.build(base.dim())?;
        let product = if base.dim() >= 3 {
            Some(WarpedProductSpec::new(base.clone(), fiber.clone(), warp.clone())?)
        } else {
            None
        };
        let mut sampler = Sampler::new(
            s.seed(),
            SamplingBox {
                x_n_range: s.sampling.x_n_range,
                tangential_bound: s.sampling.tangential_bound,
            },
        );
        let (bc, fc) = (s.base.chart()?, s.fiber.chart()?);
        let base_points = (0..s.sampling.count)
            .map(|_| sampler.chart_point(bc, base.dim()))
            .collect();
        let fiber_points = (0..s.sampling.count)
            .map(|_| sampler.chart_point(fc, fiber.dim()))
            .collect();
        Ok(Setup {
            d: fiber.dim(),
            base,
            warp,
            product,
            base_points,
            fiber_points,
            lambda_b: s.base.lambda(),
            lambda_f: s.fiber.lambda(),
        })
    }

    fn product(&self) -> Result<&WarpedProductSpec> {
        self.product
            .as_ref()
            .ok_or_else(|| Error::Domain("warped product needs base dimension >= 3".into()))
    }

    fn product_points(&self) -> Vec<Vec<f64>> {
        self.base_points
            .iter()
            .zip(&self.fiber_points)
            .map(|(b, f)| b.iter().chain(f).copied().collect())
            .collect()
    }

    /// `max |‖∇f‖² − f² − c| / (1 + f²)` over the base points, on the base metric.
    fn sampled_gradient_constant(&self, c: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in &self.base_points {
            let f = self.warp.value_at(p)?;
            let q = gradient_norm_sq(&self.base, &self.warp, p)? - f * f;
            worst = worst.max((q - c).abs() / (1.0 + f * f));
        }
        Ok(worst)
    }
}

/// How much of each corollary check to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// All checks, with sampled confirmation.
    Full,
    /// Parameter predicates only, no curvature or sampling.
    ParamsOnly,
}

fn run_check(kind: CheckKind, s: &Scenario, setup: &Setup, mode: Mode) -> Result<CheckResult> {
    let tol = s.tolerance(kind);
    let name = kind.name();
    match kind {
        CheckKind::Einstein => {
            let metric = assemble_product_metric(setup.product()?);
            let r = einstein_residual(&metric, &setup.product_points(), tol)?;
            Ok(
                CheckResult::measured(name, r.max_residual.max(r.lambda_stddev), tol)
                    .with_detail("lambda_estimate", r.lambda_estimate)
                    .with_detail("lambda_stddev", r.lambda_stddev)
                    .with_detail("max_residual", r.max_residual),
            )
        }
        CheckKind::Theorem1 => {
            let r = run_theorem1_suite(
                setup.product()?,
                setup.lambda_b,
                setup.lambda_f,
                &setup.base_points,
                tol,
            )?;
            Ok(CheckResult::measured(name, r.max_residual(), tol)
                .with_detail("lambda", r.lambda)
                .with_detail("rho", r.rho)
                .with_detail("rho_measured", r.rho_measured)
                .with_detail("lambda_b_measured", r.lambda_b_measured)
                .with_detail("b_fit", r.b_fit)
                .with_detail("c_fit", r.c_fit)
                .with_detail("residual_i", r.residual_i)
                .with_detail("residual_ii", r.residual_ii)
                .with_detail("residual_iii", r.residual_iii)
                .with_detail("residual_iv", r.residual_iv)
                .with_detail("laplacian_residual", r.laplacian_residual)
                .with_detail("rho_inconsistent", f64::from(u8::from(r.rho_inconsistent))))
        }
        CheckKind::Pde => {
            let r = check_pde_system(&setup.warp, &setup.base_points)?;
            let worst = r.iter().copied().fold(0.0, f64::max);
            Ok(CheckResult::measured(name, worst, tol)
                .with_detail("family_1", r[0])
                .with_detail("family_2", r[1])
                .with_detail("family_3", r[2])
                .with_detail("family_4", r[3]))
        }
        CheckKind::Corollary4 | CheckKind::Corollary5 => {
            let params = s.warp.family_params().ok_or_else(|| {
                Error::validation(
                    "warp",
                    format!("{name} needs a theorem2 family warp"),
                )
            })?;
            if !matches!(s.base, ModelRef::Hyperbolic { .. }) {
                return Err(Error::validation(
                    "base",
                    format!("{name} needs a hyperbolic base"),
                ));
            }
            let (holds, c, lambda_f) = if kind == CheckKind::Corollary4 {
                let r = corollary4_check(params, setup.d)?;
                (r.globally_positive, r.c, r.lambda_f)
            } else {
                let r = corollary5_check(params, setup.d)?;
                (r.applies, 0.0, r.lambda_f)
            };
            if !holds {
                return Ok(CheckResult::failed(
                    name,
                    tol,
                    CheckError {
                        kind: "HypothesisNotMet".into(),
                        message: format!("warp parameters do not satisfy the {name} hypotheses"),
                    },
                )
                .with_detail("c", c));
            }
            let algebraic = (setup.lambda_f - lambda_f).abs();
            let sampled = match mode {
                Mode::Full => setup.sampled_gradient_constant(c)?,
                Mode::ParamsOnly => 0.0,
            };
            Ok(CheckResult::measured(name, algebraic.max(sampled), tol)
                .with_detail("c", c)
                .with_detail("lambda_f_required", lambda_f)
                .with_detail("lambda_f_fiber", setup.lambda_f)
                .with_detail("sampled_residual", sampled))
        }
        CheckKind::Crosscheck => {
            let spec = setup.product()?;
            let mut worst = 0.0f64;
            for (b, f) in setup.base_points.iter().zip(&setup.fiber_points) {
                worst = worst.max(cross_check_ricci(spec, b, f)?);
            }
            Ok(CheckResult::measured(name, worst, tol))
        }
    }
}

/// Runs every requested check; a failing check never aborts the others.
pub fn run_scenario(s: &Scenario, mode: Mode) -> Result<Report> {
    if s.sampling.count == 0 {
        return Err(Error::Usage("sampling.count must be at least 1".into()));
    }
    let start = Instant::now();
    let setup = Setup::new(s)?;
    let mut checks = Vec::with_capacity(s.checks.len());
    let mut timings = Timings::default();
    for &kind in &s.checks {
        if mode == Mode::ParamsOnly
            && !matches!(kind, CheckKind::Corollary4 | CheckKind::Corollary5)
        {
            continue;
        }
        let t = Instant::now();
        let result = run_check(kind, s, &setup, mode)
            .unwrap_or_else(|e| CheckResult::failed(kind.name(), s.tolerance(kind), (&e).into()));
        timings
            .checks_ms
            .insert(kind.name().to_string(), t.elapsed().as_secs_f64() * 1e3);
        checks.push(result);
    }

    let n = s.base.dim();
    let lambda = if n >= 3 {
        lambda_from_base(n, setup.d, setup.lambda_b).ok()
    } else {
        None
    };
    let fitted_c = checks
        .iter()
        .find(|c| c.name == "theorem1")
        .and_then(|c| c.details.get("c_fit").copied());
    let family_c = s.warp.family_params().map(models::gradient_constant);
    let rho = if n >= 2 {
        setup.lambda_b / (n - 1) as f64
    } else {
        0.0
    };
    timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Report {
        schema: REPORT_SCHEMA.into(),
        scenario: s.clone(),
        derived_constants: DerivedConstants {
            lambda,
            lambda_b: setup.lambda_b,
            lambda_f: setup.lambda_f,
            rho,
            c: family_c.or(fitted_c),
        },
        checks,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": "warpcheck-scenario/1",
        "name": "minimal",
        "base": {"kind": "hyperbolic", "dim": 3},
        "fiber": {"kind": "euclidean", "dim": 2},
        "warp": {"family": "theorem2", "params": {"a": 0, "b": 1, "b_vec": [0, 0], "c_vec": [0, 0]}},
        "checks": ["einstein"],
        "sampling": {"seed": 42}
    }"#;

    #[test]
    fn defaults_are_filled() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.sampling.count, 100);
        assert_eq!(s.seed(), 42);
        assert_eq!(s.sampling.x_n_range, [0.5, 5.0]);
        assert_eq!(s.sampling.tangential_bound, 3.0);
        assert_eq!(s.tolerance(CheckKind::Einstein), 1e-6);
    }

    #[test]
    fn low_dimensional_base_rejected_for_theorem1() {
        let src = MINIMAL
            .replace(r#""dim": 3"#, r#""dim": 2"#)
            .replace(r#""b_vec": [0, 0], "c_vec": [0, 0]"#, r#""b_vec": [0], "c_vec": [0]"#)
            .replace(r#"["einstein"]"#, r#"["theorem1"]"#);
        match Scenario::from_json(&src) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "base.dim"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_indexed_expression_rejected() {
        let src = MINIMAL.replace(
            r#"{"family": "theorem2", "params": {"a": 0, "b": 1, "b_vec": [0, 0], "c_vec": [0, 0]}}"#,
            r#"{"expression": "x1/x0"}"#,
        );
        assert!(matches!(Scenario::from_json(&src), Err(Error::Validation { .. })));
    }

    #[test]
    fn malformed_and_unknown_keys() {
        match Scenario::from_json("{\n  \"schema\": ,\n}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let src = MINIMAL.replace(r#""name": "minimal","#, r#""name": "minimal", "extra": 1,"#);
        match Scenario::from_json(&src) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "extra"),
            other => panic!("{other:?}"),
        }
        let src = MINIMAL.replace(r#""kind": "euclidean""#, r#""kind": "torus""#);
        assert!(matches!(Scenario::from_json(&src), Err(Error::Validation { .. })));
        let src = MINIMAL.replace(r#"["einstein"]"#, r#"["einstein", "einstein"]"#);
        assert!(matches!(Scenario::from_json(&src), Err(Error::Validation { .. })));
    }

    #[test]
    fn zero_samples_is_a_usage_error() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.sampling.count = 0;
        assert!(matches!(run_scenario(&s, Mode::Full), Err(Error::Usage(_))));
    }

    #[test]
    fn empty_check_list_still_reports_constants() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.checks.clear();
        s.sampling.count = 3;
        let r = run_scenario(&s, Mode::Full).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.exit_code(), 0);
        let text = r.to_text();
        assert!(text.contains("derived constants:") && text.contains("lambda = -4"));
    }
}

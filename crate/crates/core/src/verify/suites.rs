//! The individual suites. Each is a parameter struct with defaults (the
//! desk-scale boxes used by the acceptance tests) and a `run` method.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::wide::mehler_series_precise;
use super::{
    decreasing, identity_limit_sweep, identity_matrix, identity_matrix_orders, worst, CommonOverrides, Defects, ReportBuilder,
    SuiteRequest, VerificationReport,
};
use crate::bargmann::{bargmann_classical, transform_grid, TransformSpec};
use crate::epsiloncs::{
    apply_thermal, heat_limit_defect, check_decreasing, coefficients, mehler_kernel, overlap, overlap_limit_defect,
    overlap_series, series_from_coefficients, thermal_shift, truncation_order, wavefunction_closed, Adequacy,
    StateLabel,
};
use crate::error::{check_range, Error, Result};
use crate::polyfock::{gram_matrix, phi, required_orders};
use crate::quad::{gauss_hermite_shared, polar_rule, MAX_HERMITE_ORDER, MAX_RADIAL_ORDER};
use crate::sampled::{linspace, Eigenstate, LineFunction};
use crate::specfun::{factorial, hermite, ho_eigenfunction, laguerre, laguerre_checked, PolyIndex};

/// Every suite name, in the order `default_config` runs them.
pub const SUITES: &[&str] = &[
    "orthogonality",
    "wavefunction",
    "overlap",
    "identity_matrix",
    "identity_limit",
    "heat_limit",
    "thermal",
    "mehler",
    "bargmann",
    "bargmann_classical",
    "deruyts",
    "wcm",
    "laguerre_reduction",
    "hermite_integral",
    "overlap_limit",
];

type Point = [f64; 2];

fn c(p: Point) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn criterion_grid() -> Vec<Point> {
    vec![[0.3, 0.2], [-0.8, 0.5], [1.1, -0.4], [-0.2, -1.3]]
}

fn state_points() -> Vec<Point> {
    vec![[0.0, 0.0], [1.0, 0.0], [1.2, 0.3], [0.0, -0.7]]
}

fn square_grid() -> Vec<Point> {
    let axis = [-1.0, 0.0, 1.0];
    axis.iter().flat_map(|&y| axis.iter().map(move |&x| [x, y])).collect()
}

/// Mirrors `QuadratureRule::require_polar` for orders that are only known
/// as numbers before the rule is built.
fn require_orders(have: (usize, usize), need: (usize, usize)) -> Result<()> {
    if have.0 < need.0 || have.1 < need.1 {
        return Err(Error::RuleTooSmall {
            radial: need.0,
            angular: need.1,
            have_radial: have.0,
            have_angular: have.1,
        });
    }
    check_range(
        "quad_radial",
        have.0 as f64,
        have.0 <= MAX_RADIAL_ORDER,
        "<= 512",
    )
}

fn check_grid(name: &'static str, min: f64, max: f64) -> Result<()> {
    check_range(name, min, min.is_finite() && max.is_finite() && min <= max, "finite with min <= max")
}

fn check_hermite_order(order: usize) -> Result<()> {
    check_range(
        "quad_hermite",
        order as f64,
        (1..=MAX_HERMITE_ORDER).contains(&order),
        "1 <= order <= 512",
    )
}

trait Suite: Serialize + DeserializeOwned + Default + Send + Sync + 'static {
    const NAME: &'static str;

    fn apply(&mut self, _common: &CommonOverrides) {}

    fn validate(&self) -> Result<()> {
        Ok(())
    }

    fn run(&self) -> Result<VerificationReport>;
}

pub(crate) struct Prepared {
    job: Box<dyn Fn() -> Result<VerificationReport> + Send + Sync>,
}

impl Prepared {
    pub fn run(&self) -> Result<VerificationReport> {
        (self.job)()
    }
}

fn build<S: Suite>(req: &SuiteRequest) -> Result<Prepared> {
    let mut suite: S = serde_json::from_value(Value::Object(req.params.clone())).map_err(|e| Error::InvalidConfig {
        suite: S::NAME.to_string(),
        message: e.to_string(),
    })?;
    suite.apply(&req.common);
    suite.validate()?;
    Ok(Prepared {
        job: Box::new(move || suite.run()),
    })
}

pub(crate) fn prepare(req: &SuiteRequest) -> Result<Prepared> {
    match req.suite.as_str() {
        "orthogonality" => build::<Orthogonality>(req),
        "wavefunction" => build::<Wavefunction>(req),
        "overlap" => build::<OverlapSuite>(req),
        "identity_matrix" => build::<IdentityMatrix>(req),
        "identity_limit" => build::<IdentityLimit>(req),
        "heat_limit" => build::<HeatLimit>(req),
        "thermal" => build::<Thermal>(req),
        "mehler" => build::<Mehler>(req),
        "bargmann" => build::<Bargmann>(req),
        "bargmann_classical" => build::<BargmannClassical>(req),
        "deruyts" => build::<Deruyts>(req),
        "wcm" => build::<Wcm>(req),
        "laguerre_reduction" => build::<LaguerreReduction>(req),
        "hermite_integral" => build::<HermiteIntegral>(req),
        "overlap_limit" => build::<OverlapLimit>(req),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

/// Cartesian product of `(m, eps, point)` triples.
fn cases(ms: &[usize], eps: &[f64], points: &[Point]) -> Vec<(usize, f64, Complex64)> {
    ms.iter()
        .flat_map(|&m| eps.iter().flat_map(move |&e| points.iter().map(move |&p| (m, e, c(p)))))
        .collect()
}

fn check_positive_eps(eps: &[f64]) -> Result<()> {
    for &e in eps {
        check_range("eps", e, e.is_finite() && e > 0.0, "finite and > 0")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- polyfock

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Orthogonality {
    ms: Vec<usize>,
    n_max: usize,
    radial: Option<usize>,
    angular: Option<usize>,
    tolerance: f64,
}

impl Default for Orthogonality {
    fn default() -> Self {
        Self {
            ms: vec![0, 1, 2, 4],
            n_max: 8,
            radial: None,
            angular: None,
            tolerance: 1e-10,
        }
    }
}

impl Orthogonality {
    fn orders(&self) -> (usize, usize) {
        let need = self.need();
        (self.radial.unwrap_or(need.0), self.angular.unwrap_or(need.1))
    }

    fn need(&self) -> (usize, usize) {
        let m = self.ms.iter().copied().max().unwrap_or(0);
        let (r, a) = required_orders(m, self.n_max, self.n_max);
        (r, a.max(self.n_max + 1))
    }
}

impl Suite for Orthogonality {
    const NAME: &'static str = "orthogonality";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        self.radial = common.quad_radial.or(self.radial);
        self.angular = common.quad_angular.or(self.angular);
    }

    fn validate(&self) -> Result<()> {
        require_orders(self.orders(), self.need())
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "pi m! sqrt(n! j!)");
        let (radial, angular) = self.orders();
        let rule = polar_rule(radial, angular)?;
        let per_m: Vec<Defects> = self
            .ms
            .par_iter()
            .map(|&m| {
                let gram = gram_matrix(m, self.n_max, &rule)?;
                let mut d = Defects::default();
                for (n, row) in gram.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let want = if n == j { PI * factorial(m) * factorial(n) } else { 0.0 };
                        let scale = PI * factorial(m) * (factorial(n) * factorial(j)).sqrt();
                        d = d.merge(Defects::one((v - want).norm(), scale));
                    }
                }
                Ok(d)
            })
            .collect::<Result<_>>()?;
        Ok(builder
            .param("rule", [radial, angular])
            .finish(Defects::fold(per_m), self.tolerance))
    }
}

// ---------------------------------------------------------------- epsiloncs

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Wavefunction {
    ms: Vec<usize>,
    eps: Vec<f64>,
    zs: Vec<Point>,
    x_min: f64,
    x_max: f64,
    x_count: usize,
    trunc: Option<usize>,
    tolerance: f64,
}

impl Default for Wavefunction {
    fn default() -> Self {
        Self {
            ms: (0..=6).collect(),
            eps: vec![0.1, 0.5, 1.0],
            zs: state_points(),
            x_min: -4.0,
            x_max: 4.0,
            x_count: 81,
            trunc: None,
            tolerance: 1e-10,
        }
    }
}

impl Suite for Wavefunction {
    const NAME: &'static str = "wavefunction";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        if let Some(e) = common.eps {
            self.eps = vec![e];
        }
        self.trunc = common.trunc.or(self.trunc);
    }

    fn validate(&self) -> Result<()> {
        check_positive_eps(&self.eps)?;
        check_grid("x", self.x_min, self.x_max)
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "sup over x of |series| per state");
        let xs = linspace(self.x_min, self.x_max, self.x_count);
        let results: Vec<(Defects, f64)> = cases(&self.ms, &self.eps, &self.zs)
            .par_iter()
            .map(|&(m, eps, z)| {
                let label = StateLabel::new(z, m, eps)?;
                let trunc = self.trunc.unwrap_or_else(|| truncation_order(&label));
                let coef = coefficients(&label, trunc)?;
                let (mut diff, mut size) = (0.0, 0.0);
                for &x in &xs {
                    let series = series_from_coefficients(x, &coef.entries);
                    diff = worst(diff, (wavefunction_closed(x, &label)? - series).norm());
                    size = worst(size, series.norm());
                }
                Ok((Defects::one(diff, size), coef.tail_mass.abs()))
            })
            .collect::<Result<_>>()?;
        let tail = results.iter().map(|r| r.1).fold(0.0, worst);
        Ok(builder
            .param("max_tail_mass", tail)
            .finish(Defects::fold(results.into_iter().map(|r| r.0)), self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OverlapSuite {
    ms: Vec<usize>,
    eps: Vec<f64>,
    zs: Vec<Point>,
    trunc: Option<usize>,
    tolerance: f64,
    diagonal_tolerance: f64,
}

impl Default for OverlapSuite {
    fn default() -> Self {
        Self {
            ms: (0..=5).collect(),
            eps: vec![0.3, 1.0],
            zs: criterion_grid(),
            trunc: None,
            tolerance: 1e-10,
            diagonal_tolerance: 1e-12,
        }
    }
}

impl Suite for OverlapSuite {
    const NAME: &'static str = "overlap";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        if let Some(e) = common.eps {
            self.eps = vec![e];
        }
        self.trunc = common.trunc.or(self.trunc);
    }

    fn validate(&self) -> Result<()> {
        check_positive_eps(&self.eps)
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "|series| pointwise");
        let triples = cases(&self.ms, &self.eps, &self.zs);
        let results: Vec<(Defects, f64)> = triples
            .par_iter()
            .map(|&(m, eps, z)| {
                let mut d = Defects::default();
                let mut diag: f64 = 0.0;
                for &wp in &self.zs {
                    let w = c(wp);
                    let trunc = self.trunc.unwrap_or_else(|| {
                        let t = |p| truncation_order(&StateLabel::new(p, m, eps).expect("validated label"));
                        t(z).max(t(w))
                    });
                    let closed = overlap(z, w, m, eps)?.value;
                    let series = overlap_series(z, w, m, eps, trunc)?;
                    d = d.merge(Defects::one((closed - series).norm(), series.norm()));
                    if z == w {
                        diag = worst(diag, (closed - 1.0).norm());
                    }
                }
                Ok((d, diag))
            })
            .collect::<Result<_>>()?;
        let diag = results.iter().map(|r| r.1).fold(0.0, worst);
        Ok(builder
            .check("diagonal_defect", diag, self.diagonal_tolerance)
            .finish(Defects::fold(results.into_iter().map(|r| r.0)), self.tolerance))
    }
}

// ---------------------------------------------------------------- identity

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct IdentityMatrix {
    ms: Vec<usize>,
    eps: Vec<f64>,
    n_max: usize,
    radial: Option<usize>,
    angular: Option<usize>,
    tolerance: f64,
    hermitian_tolerance: f64,
}

impl Default for IdentityMatrix {
    fn default() -> Self {
        Self {
            ms: (0..=4).collect(),
            eps: vec![0.3, 1.0],
            n_max: 8,
            radial: None,
            angular: None,
            tolerance: 1e-10,
            hermitian_tolerance: 1e-13,
        }
    }
}

impl IdentityMatrix {
    fn need(&self) -> (usize, usize) {
        identity_matrix_orders(self.ms.iter().copied().max().unwrap_or(0), self.n_max)
    }

    fn orders(&self) -> (usize, usize) {
        let need = self.need();
        (self.radial.unwrap_or(need.0), self.angular.unwrap_or(need.1))
    }
}

impl Suite for IdentityMatrix {
    const NAME: &'static str = "identity_matrix";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        if let Some(e) = common.eps {
            self.eps = vec![e];
        }
        self.radial = common.quad_radial.or(self.radial);
        self.angular = common.quad_angular.or(self.angular);
    }

    fn validate(&self) -> Result<()> {
        check_positive_eps(&self.eps)?;
        require_orders(self.orders(), self.need())
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "1 (entries of a contraction)");
        let (radial, angular) = self.orders();
        let rule = polar_rule(radial, angular)?;
        let pairs: Vec<(usize, f64)> = self
            .ms
            .iter()
            .flat_map(|&m| self.eps.iter().map(move |&e| (m, e)))
            .collect();
        let reports: Vec<VerificationReport> = pairs
            .par_iter()
            .map(|&(m, eps)| identity_matrix(m, eps, self.n_max, &rule).map(|r| r.1))
            .collect::<Result<_>>()?;
        let defects = Defects::fold(reports.iter().map(|r| Defects {
            abs: r.defect_abs,
            rel: r.defect_rel,
        }));
        let hermitian = reports
            .iter()
            .map(|r| r.params["hermiticity_defect"].as_f64().unwrap_or(f64::NAN))
            .fold(0.0, worst);
        Ok(builder
            .param("rule", [radial, angular])
            .check("hermiticity_defect", hermitian, self.hermitian_tolerance)
            .finish(defects, self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct IdentityLimit {
    m: usize,
    n_max: usize,
    eps: Vec<f64>,
    radial: Option<usize>,
    angular: Option<usize>,
    tolerance: f64,
}

impl Default for IdentityLimit {
    fn default() -> Self {
        Self {
            m: 2,
            n_max: 5,
            eps: vec![0.5, 0.2, 0.1, 0.05, 0.02],
            radial: None,
            angular: None,
            tolerance: 0.1,
        }
    }
}

impl IdentityLimit {
    fn orders(&self) -> (usize, usize) {
        let need = identity_matrix_orders(self.m, self.n_max);
        (self.radial.unwrap_or(need.0), self.angular.unwrap_or(need.1))
    }
}

impl Suite for IdentityLimit {
    const NAME: &'static str = "identity_limit";

    fn apply(&mut self, common: &CommonOverrides) {
        self.m = common.m.unwrap_or(self.m);
        self.radial = common.quad_radial.or(self.radial);
        self.angular = common.quad_angular.or(self.angular);
    }

    fn validate(&self) -> Result<()> {
        check_decreasing(&self.eps)?;
        require_orders(self.orders(), identity_matrix_orders(self.m, self.n_max))
    }

    fn run(&self) -> Result<VerificationReport> {
        let (radial, angular) = self.orders();
        let rule = polar_rule(radial, angular)?;
        identity_limit_sweep(self.m, self.n_max, &self.eps, &rule, self.tolerance)
    }
}

/// `(φ₀ + … + φ_N)/√(N+1)`, a unit vector spread over the whole span.
struct EvenMix(usize);

impl LineFunction for EvenMix {
    fn eval(&self, x: f64) -> Complex64 {
        let s: f64 = (0..=self.0).map(|n| ho_eigenfunction(n, x)).sum();
        Complex64::new(s / ((self.0 + 1) as f64).sqrt(), 0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HeatLimit {
    max_state: usize,
    eps: Vec<f64>,
    x_min: f64,
    x_max: f64,
    x_count: usize,
    quad_order: usize,
    quad_tolerance: f64,
    tolerance: f64,
}

impl Default for HeatLimit {
    fn default() -> Self {
        Self {
            max_state: 5,
            eps: vec![0.5, 0.2, 0.1, 0.05, 0.02],
            x_min: -6.0,
            x_max: 6.0,
            x_count: 241,
            quad_order: Adequacy::default().order,
            quad_tolerance: Adequacy::default().tolerance,
            tolerance: 0.05,
        }
    }
}

impl HeatLimit {
    fn adequacy(&self) -> Adequacy {
        Adequacy {
            order: self.quad_order,
            tolerance: self.quad_tolerance,
        }
    }
}

impl Suite for HeatLimit {
    const NAME: &'static str = "heat_limit";

    fn apply(&mut self, common: &CommonOverrides) {
        self.quad_order = common.quad_hermite.unwrap_or(self.quad_order);
    }

    fn validate(&self) -> Result<()> {
        check_decreasing(&self.eps)?;
        check_grid("x", self.x_min, self.x_max)?;
        self.adequacy().validate()
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "1 (sup-norm distance, unit-norm inputs)");
        let xs = linspace(self.x_min, self.x_max, self.x_count);
        let mut functions: Vec<Box<dyn LineFunction>> =
            (0..=self.max_state).map(|n| Box::new(Eigenstate(n)) as Box<dyn LineFunction>).collect();
        functions.push(Box::new(EvenMix(self.max_state)));

        // one column per function, transposed below to rows per eps
        let columns: Vec<Vec<f64>> = functions
            .iter()
            .map(|f| heat_limit_defect(&|x: f64| f.eval(x), &xs, &self.eps, self.adequacy()))
            .collect::<Result<_>>()?;
        let table: Vec<Vec<f64>> = (0..self.eps.len())
            .map(|i| columns.iter().map(|col| col[i]).collect())
            .collect();
        let per_eps: Vec<f64> = table.iter().map(|row| row.iter().copied().fold(0.0, worst)).collect();
        let monotone = decreasing(&per_eps);
        let last_row = table.last().cloned().unwrap_or_default();
        let last = per_eps.last().copied().unwrap_or(0.0);
        Ok(builder
            .param("defect_per_eps", &per_eps)
            .param("defect_per_function_at_smallest_eps", &last_row)
            .flag("monotone_decrease", monotone)
            .finish(Defects::one(last, 1.0), self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Thermal {
    ms: Vec<usize>,
    eps: Vec<f64>,
    zs: Vec<Point>,
    ts: Vec<f64>,
    trunc: Option<usize>,
    tolerance: f64,
}

impl Default for Thermal {
    fn default() -> Self {
        Self {
            ms: (0..=6).collect(),
            eps: vec![0.1, 0.5, 1.0],
            zs: state_points(),
            ts: vec![0.1, 0.5],
            trunc: None,
            tolerance: 1e-12,
        }
    }
}

impl Suite for Thermal {
    const NAME: &'static str = "thermal";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        if let Some(e) = common.eps {
            self.eps = vec![e];
        }
        self.trunc = common.trunc.or(self.trunc);
    }

    fn validate(&self) -> Result<()> {
        check_positive_eps(&self.eps)?;
        check_positive_eps(&self.ts)
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "1 (entries of a unit vector)");
        let per_case: Vec<Defects> = cases(&self.ms, &self.eps, &self.zs)
            .par_iter()
            .map(|&(m, eps, z)| {
                let label = StateLabel::new(z, m, eps)?;
                let trunc = self.trunc.unwrap_or_else(|| truncation_order(&label));
                let base = coefficients(&label, trunc)?;
                let mut d = Defects::default();
                for &t in &self.ts {
                    let (scale, shifted) = thermal_shift(&label, t)?;
                    let target = coefficients(&shifted, trunc)?;
                    let evolved = apply_thermal(&base.entries, t);
                    for (a, b) in evolved.iter().zip(&target.entries) {
                        d = d.merge(Defects::one((a - b * scale).norm(), 1.0));
                    }
                }
                Ok(d)
            })
            .collect::<Result<_>>()?;
        Ok(builder.finish(Defects::fold(per_case), self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Mehler {
    taus: Vec<f64>,
    x_min: f64,
    x_max: f64,
    x_count: usize,
    tolerance: f64,
}

impl Default for Mehler {
    fn default() -> Self {
        Self {
            taus: vec![0.2, 0.6, 0.9],
            x_min: -3.0,
            x_max: 3.0,
            x_count: 7,
            tolerance: 1e-11,
        }
    }
}

impl Suite for Mehler {
    const NAME: &'static str = "mehler";

    fn validate(&self) -> Result<()> {
        for &tau in &self.taus {
            check_range("tau", tau, tau > 0.0 && tau < 1.0, "0 < tau < 1")?;
        }
        check_grid("x", self.x_min, self.x_max)
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "|series| pointwise (384-bit series)");
        let xs = linspace(self.x_min, self.x_max, self.x_count);
        let xs = &xs;
        let points: Vec<(f64, f64, f64)> = self
            .taus
            .iter()
            .flat_map(|&t| xs.iter().flat_map(move |&x| xs.iter().map(move |&y| (t, x, y))))
            .collect();
        let per_point: Vec<Defects> = points
            .par_iter()
            .map(|&(tau, x, y)| {
                let closed = mehler_kernel(tau, x, y)?.value.re;
                let series = mehler_series_precise(tau, x, y);
                Ok(Defects::one((closed - series).abs(), series.abs()))
            })
            .collect::<Result<_>>()?;
        Ok(builder.finish(Defects::fold(per_point), self.tolerance))
    }
}

// ---------------------------------------------------------------- bargmann

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Bargmann {
    ms: Vec<usize>,
    n_max: usize,
    eps: Vec<f64>,
    zs: Vec<Point>,
    quad_order: usize,
    tolerance: f64,
}

impl Default for Bargmann {
    fn default() -> Self {
        Self {
            ms: (0..=5).collect(),
            n_max: 8,
            eps: vec![0.3, 1.0],
            zs: square_grid(),
            quad_order: Adequacy::default().order,
            tolerance: 1e-9,
        }
    }
}

impl Suite for Bargmann {
    const NAME: &'static str = "bargmann";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        if let Some(e) = common.eps {
            self.eps = vec![e];
        }
        self.quad_order = common.quad_hermite.unwrap_or(self.quad_order);
    }

    fn validate(&self) -> Result<()> {
        for &e in &self.eps {
            check_range("eps", e, e.is_finite() && e >= 0.0, "finite and >= 0")?;
        }
        Adequacy {
            order: self.quad_order,
            ..Adequacy::default()
        }
        .validate()
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "1 (absolute)");
        let zs: Vec<Complex64> = self.zs.iter().map(|&p| c(p)).collect();
        let jobs: Vec<(usize, f64, usize)> = self
            .ms
            .iter()
            .flat_map(|&m| self.eps.iter().flat_map(move |&e| (0..=self.n_max).map(move |n| (m, e, n))))
            .collect();
        let per_job: Vec<Defects> = jobs
            .par_iter()
            .map(|&(m, eps, n)| {
                let spec = TransformSpec::new(m, eps).with_quad_order(self.quad_order);
                let values = transform_grid(&spec, &Eigenstate(n), &zs)?;
                let norm = ((-(n as f64) * eps).exp() / (PI * factorial(m) * factorial(n))).sqrt();
                Ok(Defects::fold(zs.iter().zip(&values).map(|(&z, v)| {
                    let want = phi(m, n, z).conj() * norm;
                    Defects::one((v - want).norm(), 1.0)
                })))
            })
            .collect::<Result<_>>()?;
        Ok(builder.finish(Defects::fold(per_job), self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BargmannClassical {
    n_max: usize,
    zs: Vec<Point>,
    quad_order: usize,
    tolerance: f64,
}

impl Default for BargmannClassical {
    fn default() -> Self {
        Self {
            n_max: 8,
            zs: square_grid(),
            quad_order: Adequacy::default().order,
            tolerance: 1e-10,
        }
    }
}

impl Suite for BargmannClassical {
    const NAME: &'static str = "bargmann_classical";

    fn apply(&mut self, common: &CommonOverrides) {
        self.quad_order = common.quad_hermite.unwrap_or(self.quad_order);
    }

    fn validate(&self) -> Result<()> {
        Adequacy {
            order: self.quad_order,
            ..Adequacy::default()
        }
        .validate()
    }

    fn run(&self) -> Result<VerificationReport> {
        let builder = ReportBuilder::new(Self::NAME, self, "1 (absolute)");
        let per_n: Vec<Defects> = (0..=self.n_max)
            .into_par_iter()
            .map(|n| {
                let mut d = Defects::default();
                for &p in &self.zs {
                    let z = c(p);
                    let got = bargmann_classical(&Eigenstate(n), z, self.quad_order)?;
                    let want = z.powu(n as u32) / factorial(n).sqrt();
                    d = d.merge(Defects::one((got - want).norm(), 1.0));
                }
                Ok(d)
            })
            .collect::<Result<_>>()?;
        Ok(builder.finish(Defects::fold(per_n), self.tolerance))
    }
}

// ---------------------------------------------------------------- specfun

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Deruyts {
    ms: Vec<usize>,
    s: Vec<f64>,
    alpha: Vec<f64>,
    terms: usize,
    tolerance: f64,
}

impl Default for Deruyts {
    fn default() -> Self {
        Self {
            ms: (0..=6).collect(),
            s: vec![0.5, 2.0],
            alpha: vec![0.3, 1.7],
            terms: 200,
            tolerance: 1e-10,
        }
    }
}

impl Suite for Deruyts {
    const NAME: &'static str = "deruyts";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        self.terms = common.trunc.unwrap_or(self.terms);
    }

    fn run(&self) -> Result<VerificationReport> {
        // Σ_{n<=N} (sα)ⁿ/n! L_m^{(n-m)}(s) → sᵐ/m! (α-1)ᵐ e^{sα}
        let builder = ReportBuilder::new(Self::NAME, self, "max(1, |limit|)");
        let mut d = Defects::default();
        for &m in &self.ms {
            for &s in &self.s {
                for &alpha in &self.alpha {
                    let mut power = 1.0;
                    let mut sum = 0.0;
                    for n in 0..=self.terms {
                        if n > 0 {
                            power *= s * alpha / n as f64;
                        }
                        sum += power * laguerre_checked(m, n as f64 - m as f64, s)?;
                    }
                    let limit = s.powi(m as i32) / factorial(m) * (alpha - 1.0).powi(m as i32) * (s * alpha).exp();
                    d = d.merge(Defects::one((sum - limit).abs(), limit.abs().max(1.0)));
                }
            }
        }
        Ok(builder.finish(d, self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Wcm {
    ms: Vec<usize>,
    zeta: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    terms: usize,
    tolerance: f64,
}

impl Default for Wcm {
    fn default() -> Self {
        Self {
            ms: (0..=5).collect(),
            zeta: vec![0.4, 1.2],
            xs: vec![0.5, 3.0],
            ys: vec![0.5, 3.0],
            terms: 200,
            tolerance: 1e-10,
        }
    }
}

impl Suite for Wcm {
    const NAME: &'static str = "wcm";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
        self.terms = common.trunc.unwrap_or(self.terms);
    }

    fn validate(&self) -> Result<()> {
        for &z in &self.zeta {
            check_range("zeta", z, z.is_finite() && z != 0.0, "finite and nonzero")?;
        }
        Ok(())
    }

    fn run(&self) -> Result<VerificationReport> {
        // Σ ζⁿ/n! L_m^{(n-m)}(X) L_m^{(n-m)}(Y) = e^ζ ζᵐ/m! L_m(-(X-ζ)(Y-ζ)/ζ)
        let builder = ReportBuilder::new(Self::NAME, self, "max(1, |right side|)");
        let mut d = Defects::default();
        for &m in &self.ms {
            for &zeta in &self.zeta {
                for &x in &self.xs {
                    for &y in &self.ys {
                        let mut power = 1.0;
                        let mut sum = 0.0;
                        for n in 0..=self.terms {
                            if n > 0 {
                                power *= zeta / n as f64;
                            }
                            let a = n as f64 - m as f64;
                            sum += power * laguerre_checked(m, a, x)? * laguerre_checked(m, a, y)?;
                        }
                        let arg = -(x - zeta) * (y - zeta) / zeta;
                        let rhs = zeta.exp() * zeta.powi(m as i32) / factorial(m) * laguerre_checked(m, 0.0, arg)?;
                        d = d.merge(Defects::one((sum - rhs).abs(), rhs.abs().max(1.0)));
                    }
                }
            }
        }
        Ok(builder.finish(d, self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LaguerreReduction {
    m_max: usize,
    t_min: f64,
    t_max: f64,
    t_count: usize,
    tolerance: f64,
}

impl Default for LaguerreReduction {
    fn default() -> Self {
        Self {
            m_max: 10,
            t_min: 0.1,
            t_max: 9.0,
            t_count: 45,
            tolerance: 1e-12,
        }
    }
}

/// `L_m^{(α)}(t) = Σ_j (-t)ʲ/j! · binom(m+α, m-j)`, the explicit sum with
/// the binomial written as a finite product so any real `α` is allowed.
/// Returns the value and `Σ |terms|` (the scale of its rounding error).
fn laguerre_explicit(m: usize, alpha: f64, t: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut size = 0.0;
    for j in 0..=m {
        let mut binom = 1.0;
        for i in 1..=(m - j) {
            binom *= (alpha + (j + i) as f64) / i as f64;
        }
        let term = (-t).powi(j as i32) / factorial(j) * binom;
        sum += term;
        size += term.abs();
    }
    (sum, size)
}

impl Suite for LaguerreReduction {
    const NAME: &'static str = "laguerre_reduction";

    fn apply(&mut self, common: &CommonOverrides) {
        self.m_max = common.m.unwrap_or(self.m_max);
    }

    fn validate(&self) -> Result<()> {
        check_grid("t", self.t_min, self.t_max)
    }

    fn run(&self) -> Result<VerificationReport> {
        // L_m^{(-k)}(t) = (-t)^k (m-k)!/m! L_{m-k}^{(k)}(t), 1 <= k <= m
        let builder = ReportBuilder::new(Self::NAME, self, "|right side| pointwise");
        let ts = linspace(self.t_min, self.t_max, self.t_count);
        let mut d = Defects::default();
        let mut continued: f64 = 0.0;
        for m in 1..=self.m_max {
            for k in 1..=m {
                for &t in &ts {
                    let lhs = laguerre(PolyIndex::int(m, -(k as i64))?, t);
                    let rhs = (-t).powi(k as i32) * factorial(m - k) / factorial(m)
                        * laguerre(PolyIndex::int(m - k, k as i64)?, t);
                    let diff = (lhs - rhs).abs();
                    d = d.merge(if diff == 0.0 { Defects::default() } else { Defects::one(diff, rhs.abs()) });
                    let (sum, size) = laguerre_explicit(m, -(k as f64), t);
                    continued = worst(continued, (lhs - sum).abs() / size);
                }
            }
        }
        Ok(builder
            .check("continued_sum_defect", continued, self.tolerance)
            .finish(d, self.tolerance))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HermiteIntegral {
    p_max: usize,
    x_min: f64,
    x_max: f64,
    x_count: usize,
    quad_order: usize,
    tolerance: f64,
}

impl Default for HermiteIntegral {
    fn default() -> Self {
        Self {
            p_max: 8,
            x_min: -3.0,
            x_max: 3.0,
            x_count: 25,
            quad_order: 64,
            tolerance: 1e-9,
        }
    }
}

impl Suite for HermiteIntegral {
    const NAME: &'static str = "hermite_integral";

    fn apply(&mut self, common: &CommonOverrides) {
        self.quad_order = common.quad_hermite.unwrap_or(self.quad_order);
    }

    fn validate(&self) -> Result<()> {
        check_grid("x", self.x_min, self.x_max)?;
        check_hermite_order(self.quad_order)
    }

    fn run(&self) -> Result<VerificationReport> {
        // H_p(x) = e^{x²}/√π ∫ (2iu)^p e^{-2iux} e^{-u²} du
        let builder = ReportBuilder::new(Self::NAME, self, "max(1, |H_p(x)|)");
        let rule = gauss_hermite_shared(self.quad_order)?;
        let mut d = Defects::default();
        for p in 0..=self.p_max {
            for x in linspace(self.x_min, self.x_max, self.x_count) {
                let integral = rule.integrate(|node| {
                    let u = node.point().re;
                    Complex64::new(0.0, 2.0 * u).powu(p as u32) * Complex64::from_polar(1.0, -2.0 * u * x)
                })?;
                let value = integral * ((x * x).exp() / PI.sqrt());
                let want = hermite(p, x);
                d = d.merge(Defects::one((value - want).norm(), want.abs().max(1.0)));
            }
        }
        Ok(builder.finish(d, self.tolerance))
    }
}

// ---------------------------------------------------------------- limits

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OverlapLimit {
    ms: Vec<usize>,
    zs: Vec<Point>,
    eps: Vec<f64>,
    factor: f64,
}

impl Default for OverlapLimit {
    fn default() -> Self {
        Self {
            ms: (0..=5).collect(),
            zs: criterion_grid(),
            eps: vec![0.1, 0.01, 0.001],
            factor: 10.0,
        }
    }
}

impl Suite for OverlapLimit {
    const NAME: &'static str = "overlap_limit";

    fn apply(&mut self, common: &CommonOverrides) {
        if let Some(m) = common.m {
            self.ms = vec![m];
        }
    }

    fn validate(&self) -> Result<()> {
        check_decreasing(&self.eps)
    }

    fn run(&self) -> Result<VerificationReport> {
        // defect_rel is defect / ε, compared against `factor`
        let builder = ReportBuilder::new(Self::NAME, self, "eps");
        let mut d = Defects::default();
        for &m in &self.ms {
            for &zp in &self.zs {
                for &wp in &self.zs {
                    let defects = overlap_limit_defect(c(zp), c(wp), m, &self.eps)?;
                    for (def, eps) in defects.iter().zip(&self.eps) {
                        d = d.merge(Defects::one(*def, *eps));
                    }
                }
            }
        }
        Ok(builder.finish(d, self.factor))
    }
}

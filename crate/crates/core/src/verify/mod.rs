//! Verification drivers. Every suite compares a closed form against an
//! independent route (series, quadrature or high-precision arithmetic) and
//! condenses the comparison into a [`VerificationReport`].
//!
//! A report passes when `defect_rel <= tolerance` and every auxiliary check
//! listed under `params.checks` holds. The quantity `defect_rel` is
//! normalized as described by `params.relative_to`.

mod suites;
mod wide;

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::epsiloncs::check_decreasing;
use crate::error::{check_range, Result};
use crate::polyfock::phi_normalized;
use crate::quad::QuadratureRule;

pub use suites::SUITES;
pub use wide::{mehler_series_precise, Wide};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub params: BTreeMap<String, Value>,
    pub defect_abs: f64,
    pub defect_rel: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: u64,
}

impl VerificationReport {
    /// One JSON record, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Running maxima of absolute and relative defects. NaN is sticky, so a
/// non-finite comparison can never pass.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Defects {
    pub abs: f64,
    pub rel: f64,
}

pub(crate) fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

impl Defects {
    pub fn one(abs: f64, scale: f64) -> Self {
        Self { abs, rel: abs / scale }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            abs: worst(self.abs, other.abs),
            rel: worst(self.rel, other.rel),
        }
    }

    pub fn fold(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().fold(Self::default(), Self::merge)
    }
}

/// Assembles a report. `checks` are `(name, value, limit)` triples that
/// must satisfy `value <= limit` in addition to the headline comparison.
pub(crate) struct ReportBuilder {
    suite: &'static str,
    params: BTreeMap<String, Value>,
    checks: Vec<(String, f64, f64)>,
    flags: Vec<(String, bool)>,
    started: Instant,
}

impl ReportBuilder {
    pub fn new(suite: &'static str, inputs: &impl Serialize, relative_to: &str) -> Self {
        let mut params = match serde_json::to_value(inputs).expect("params serialize") {
            Value::Object(map) => map.into_iter().collect(),
            other => BTreeMap::from([("inputs".to_string(), other)]),
        };
        params.insert("relative_to".into(), Value::from(relative_to));
        Self {
            suite,
            params,
            checks: Vec::new(),
            flags: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.into(), serde_json::to_value(value).expect("param serializes"));
        self
    }

    pub fn check(mut self, name: &str, value: f64, limit: f64) -> Self {
        self.checks.push((name.into(), value, limit));
        self
    }

    pub fn flag(mut self, name: &str, ok: bool) -> Self {
        self.flags.push((name.into(), ok));
        self
    }

    pub fn finish(mut self, defects: Defects, tolerance: f64) -> VerificationReport {
        let mut passed = defects.rel <= tolerance;
        if !self.checks.is_empty() || !self.flags.is_empty() {
            let mut checks = serde_json::Map::new();
            for (name, value, limit) in &self.checks {
                let ok = *value <= *limit;
                passed &= ok;
                checks.insert(
                    name.clone(),
                    serde_json::json!({ "value": value, "limit": limit, "ok": ok }),
                );
            }
            for (name, ok) in &self.flags {
                passed &= *ok;
                checks.insert(name.clone(), serde_json::json!({ "ok": ok }));
            }
            self.params.insert("checks".into(), Value::Object(checks));
        }
        VerificationReport {
            suite: self.suite.to_string(),
            params: self.params,
            defect_abs: defects.abs,
            defect_rel: defects.rel,
            tolerance,
            passed,
            runtime_ms: self.started.elapsed().as_millis() as u64,
        }
    }
}

/// Polar-rule orders [`identity_matrix`] insists on: radial exactness
/// degree `2(n_max + m)` in `|z|` and more than `2 n_max` angular points.
pub fn identity_matrix_orders(m: usize, n_max: usize) -> (usize, usize) {
    (n_max + m + 1, 2 * n_max + 1)
}

pub const IDENTITY_MATRIX_TOLERANCE: f64 = 1e-10;

/// `M[n][j] = ∫ ⟨φₙ|z;m,ε⟩⟨z;m,ε|φⱼ⟩ dμ_{m,ε}(z)` for `n, j <= n_max`.
///
/// The normalization factor cancels between the states and the measure, so
/// the integrand is `conj(pₙ(z)) pⱼ(z) e^{-|z|²}` with
/// `pₙ = Φₙᵐ/√σ_{m,ε}(n)`, and `𝒩` is never evaluated. Every entry is
/// computed independently; Hermiticity is reported, not imposed. The report
/// compares against `diag(e^{-nε})` with [`IDENTITY_MATRIX_TOLERANCE`].
pub fn identity_matrix(
    m: usize,
    eps: f64,
    n_max: usize,
    rule: &QuadratureRule,
) -> Result<(Vec<Vec<Complex64>>, VerificationReport)> {
    #[derive(Serialize)]
    struct Inputs {
        m: usize,
        eps: f64,
        n_max: usize,
        radial: usize,
        angular: Option<usize>,
    }
    check_range("eps", eps, eps.is_finite() && eps > 0.0, "finite and > 0")?;
    let (radial, angular) = identity_matrix_orders(m, n_max);
    rule.require_polar(radial, angular)?;
    let builder = ReportBuilder::new(
        "identity_matrix",
        &Inputs {
            m,
            eps,
            n_max,
            radial: rule.radial_order(),
            angular: rule.angular_order(),
        },
        "1 (entries of a contraction)",
    );
    let matrix = identity_entries(m, eps, n_max, rule)?;
    let (defects, hermitian) = identity_defects(&matrix, eps);
    let report = builder
        .param("hermiticity_defect", hermitian)
        .finish(defects, IDENTITY_MATRIX_TOLERANCE);
    Ok((matrix, report))
}

fn identity_entries(m: usize, eps: f64, n_max: usize, rule: &QuadratureRule) -> Result<Vec<Vec<Complex64>>> {
    let table: Vec<Vec<Complex64>> = rule
        .nodes()
        .par_iter()
        .map(|node| {
            let z = node.point();
            (0..=n_max).map(|n| phi_normalized(m, n, eps, z)).collect()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..=n_max).flat_map(|n| (0..=n_max).map(move |j| (n, j))).collect();
    let entries: Result<Vec<Complex64>> = pairs
        .par_iter()
        .map(|&(n, j)| {
            let values: Vec<Complex64> = table.iter().map(|p| p[n].conj() * p[j]).collect();
            rule.integrate_values(&values)
        })
        .collect();
    let entries = entries?;
    Ok(entries.chunks(n_max + 1).map(|row| row.to_vec()).collect())
}

/// `max |M - diag(e^{-nε})|` and `max |M[n][j] - conj(M[j][n])|`.
fn identity_defects(matrix: &[Vec<Complex64>], eps: f64) -> (Defects, f64) {
    let mut defects = Defects::default();
    let mut hermitian = 0.0;
    for (n, row) in matrix.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if n == j { (-(n as f64) * eps).exp() } else { 0.0 };
            defects = defects.merge(Defects::one((v - want).norm(), 1.0));
            hermitian = worst(hermitian, (v - matrix[j][n].conj()).norm());
        }
    }
    (defects, hermitian)
}

/// `max |M_ε - I|` along a strictly decreasing `eps_list`. Passes when the
/// sequence decreases monotonically and its last value is within
/// `tolerance`.
pub fn identity_limit_sweep(
    m: usize,
    n_max: usize,
    eps_list: &[f64],
    rule: &QuadratureRule,
    tolerance: f64,
) -> Result<VerificationReport> {
    #[derive(Serialize)]
    struct Inputs<'a> {
        m: usize,
        n_max: usize,
        eps: &'a [f64],
        radial: usize,
        angular: Option<usize>,
    }
    check_decreasing(eps_list)?;
    let (radial, angular) = identity_matrix_orders(m, n_max);
    rule.require_polar(radial, angular)?;
    let builder = ReportBuilder::new(
        "identity_limit",
        &Inputs {
            m,
            n_max,
            eps: eps_list,
            radial: rule.radial_order(),
            angular: rule.angular_order(),
        },
        "1 (distance to the identity at the smallest eps)",
    );
    let per_eps: Vec<f64> = eps_list
        .iter()
        .map(|&eps| {
            let matrix = identity_entries(m, eps, n_max, rule)?;
            let mut d: f64 = 0.0;
            for (n, row) in matrix.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let want = if n == j { 1.0 } else { 0.0 };
                    d = worst(d, (v - want).norm());
                }
            }
            Ok(d)
        })
        .collect::<Result<_>>()?;
    let monotone = decreasing(&per_eps);
    let last = per_eps.last().copied().unwrap_or(0.0);
    Ok(builder
        .param("defect_per_eps", &per_eps)
        .flag("monotone_decrease", monotone)
        .finish(Defects::one(last, 1.0), tolerance))
}

/// Defects below this are rounding noise and count as converged.
const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Strictly decreasing, except that a tail already at rounding level may
/// wander within it.
pub(crate) fn decreasing(seq: &[f64]) -> bool {
    seq.windows(2)
        .all(|w| w[1] < w[0] || w[0].max(w[1]) <= ROUNDOFF_FLOOR)
}

/// Override values shared by several suites. Each suite picks the fields
/// that make sense for it and ignores the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommonOverrides {
    pub m: Option<usize>,
    pub eps: Option<f64>,
    pub trunc: Option<usize>,
    pub quad_radial: Option<usize>,
    pub quad_angular: Option<usize>,
    pub quad_hermite: Option<usize>,
}

/// One suite to run: its name, suite-specific parameter overrides (a JSON
/// object whose keys are the suite's parameter names) and common overrides
/// applied on top.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteRequest {
    pub suite: String,
    #[serde(default)]
    pub params: serde_json::Map<String, Value>,
    #[serde(default)]
    pub common: CommonOverrides,
}

impl SuiteRequest {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            ..Self::default()
        }
    }
}

/// One request per known suite, all with default parameters.
pub fn default_config() -> Vec<SuiteRequest> {
    SUITES.iter().map(|s| SuiteRequest::new(*s)).collect()
}

/// Runs every requested suite. Names and parameters are validated before
/// anything is computed; suites then run in parallel and the reports come
/// back in request order.
pub fn run_all(requests: &[SuiteRequest]) -> Result<Vec<VerificationReport>> {
    let prepared: Vec<suites::Prepared> = requests.iter().map(suites::prepare).collect::<Result<_>>()?;
    prepared.par_iter().map(suites::Prepared::run).collect()
}

//! Quadrature on the real line and the complex plane.
//!
//! * [`gauss_hermite`] integrates `∫ℝ e^{-x²} f(x) dx`.
//! * [`polar_rule`] integrates `∫ℂ g(z) e^{-|z|²} dμ(z)` as a product of
//!   Gauss–Laguerre in `t = |z|²` and a uniform angular grid.
//!
//! All reductions run in ascending node order with Neumaier-compensated
//! summation, so results do not depend on how callers schedule the
//! integrand evaluations.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};

pub const MAX_HERMITE_ORDER: usize = 512;
pub const MAX_RADIAL_ORDER: usize = 512;
pub const MAX_ANGULAR_ORDER: usize = 1 << 16;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        iter.into_iter().for_each(|x| acc.add(x));
        acc
    }
}

/// Compensated summation applied to real and imaginary parts separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = Self::new();
        iter.into_iter().for_each(|z| acc.add(z));
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    RealHermite,
    ComplexPolar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadNode {
    Real(f64),
    Polar { radius: f64, angle: f64 },
}

impl QuadNode {
    pub fn point(&self) -> Complex64 {
        match *self {
            QuadNode::Real(x) => Complex64::new(x, 0.0),
            QuadNode::Polar { radius, angle } => Complex64::from_polar(radius, angle),
        }
    }
}

impl fmt::Display for QuadNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadNode::Real(x) => write!(f, "x = {x}"),
            QuadNode::Polar { radius, angle } => write!(f, "r = {radius}, theta = {angle}"),
        }
    }
}

/// Nodes and positive weights of a quadrature rule.
///
/// Weights are also kept as logarithms: for high Hermite orders the outer
/// weights fall below the smallest positive double, and the log form is
/// what [`QuadratureRule::integrate_unweighted`] uses to restore `e^{x²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: RuleKind,
    nodes: Vec<QuadNode>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    radial_order: usize,
    angular_order: Option<usize>,
}

impl QuadratureRule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Gauss order of the real-line rule, or the Gauss–Laguerre order in `|z|²`.
    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_order(&self) -> Option<usize> {
        self.angular_order
    }

    /// Real abscissae of a Gauss–Hermite rule (empty for polar rules).
    pub fn real_nodes(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                QuadNode::Real(x) => Some(*x),
                _ => None,
            })
            .collect()
    }

    /// `Σ wᵢ f(nodeᵢ)` in ascending node order with compensated summation.
    pub fn integrate(&self, mut f: impl FnMut(&QuadNode) -> Complex64) -> Result<Complex64> {
        let mut acc = ComplexSum::new();
        for (index, (node, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let v = f(node);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteIntegrand {
                    index,
                    node: node.to_string(),
                });
            }
            acc.add(v * w);
        }
        Ok(acc.value())
    }

    /// Integrates against precomputed integrand values (one per node).
    pub fn integrate_values(&self, values: &[Complex64]) -> Result<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut i = 0;
        self.integrate(|_| {
            let v = values[i];
            i += 1;
            v
        })
    }

    /// Compensated sum of integrand values that already carry their weights.
    pub fn sum_prepared(&self, values: &[Complex64]) -> Result<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut acc = ComplexSum::new();
        for (index, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteIntegrand {
                    index,
                    node: self.nodes[index].to_string(),
                });
            }
            acc.add(*v);
        }
        Ok(acc.value())
    }

    /// `∫ℝ g(x) dx` for a Gauss–Hermite rule, i.e. the weight `e^{-x²}` is
    /// divided back out of every node.
    pub fn integrate_unweighted(&self, mut g: impl FnMut(f64) -> Complex64) -> Result<Complex64> {
        self.expect_kind(RuleKind::RealHermite)?;
        let mut acc = ComplexSum::new();
        for (index, (node, &lw)) in self.nodes.iter().zip(&self.log_weights).enumerate() {
            let QuadNode::Real(x) = *node else { unreachable!() };
            let v = g(x);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteIntegrand {
                    index,
                    node: node.to_string(),
                });
            }
            acc.add(v * (lw + x * x).exp());
        }
        Ok(acc.value())
    }

    /// `wᵢ e^{xᵢ²}` for every node of a Gauss–Hermite rule.
    pub fn unweighted_factors(&self) -> Result<Vec<f64>> {
        self.expect_kind(RuleKind::RealHermite)?;
        Ok(self
            .nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(n, lw)| {
                let x = n.point().re;
                (lw + x * x).exp()
            })
            .collect())
    }

    pub(crate) fn expect_kind(&self, kind: RuleKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongRuleKind {
                expected: match kind {
                    RuleKind::RealHermite => "real-hermite",
                    RuleKind::ComplexPolar => "complex-polar",
                },
            })
        }
    }

    /// Errors unless the polar rule meets the given orders.
    pub fn require_polar(&self, radial: usize, angular: usize) -> Result<()> {
        self.expect_kind(RuleKind::ComplexPolar)?;
        let have_angular = self.angular_order.unwrap_or(0);
        if self.radial_order < radial || have_angular < angular {
            return Err(Error::RuleTooSmall {
                radial,
                angular,
                have_radial: self.radial_order,
                have_angular,
            });
        }
        Ok(())
    }
}

/// Gauss–Hermite rule of the given order, exact for `∫ e^{-x²} p(x) dx`
/// with `deg p <= 2·order - 1`.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    Ok((*gauss_hermite_shared(order)?).clone())
}

/// Cached variant of [`gauss_hermite`]; rules are immutable once built.
pub fn gauss_hermite_shared(order: usize) -> Result<Arc<QuadratureRule>> {
    check_range(
        "order",
        order as f64,
        (1..=MAX_HERMITE_ORDER).contains(&order),
        "1 <= order <= 512",
    )?;
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&order) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_gauss_hermite(order));
    cache.lock().unwrap().insert(order, rule.clone());
    Ok(rule)
}

/// Polar product rule for `∫ℂ g(z) e^{-|z|²} dμ(z) = ½ ∫₀^∞ e^{-t} ∫₀^{2π} g(√t e^{iθ}) dθ dt`.
///
/// Exact when `g(√t e^{iθ})` is a polynomial of degree `<= 2·radial_order - 1`
/// in `t` times `e^{ikθ}` with `|k| < angular_order`. Nodes are ordered by
/// radial index, then angle.
pub fn polar_rule(radial_order: usize, angular_order: usize) -> Result<QuadratureRule> {
    check_range(
        "radial_order",
        radial_order as f64,
        (1..=MAX_RADIAL_ORDER).contains(&radial_order),
        "1 <= radial_order <= 512",
    )?;
    check_range(
        "angular_order",
        angular_order as f64,
        (1..=MAX_ANGULAR_ORDER).contains(&angular_order),
        "1 <= angular_order <= 65536",
    )?;
    let (t_nodes, t_log_weights) = gauss_laguerre_shared(radial_order);
    let angles: Vec<f64> = (0..angular_order)
        .map(|k| 2.0 * PI * k as f64 / angular_order as f64)
        .collect();
    let angular_log_weight = (PI / angular_order as f64).ln();

    let total = radial_order * angular_order;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut log_weights = Vec::with_capacity(total);
    for (t, lw) in t_nodes.iter().zip(t_log_weights.iter()) {
        let radius = t.sqrt();
        for &angle in &angles {
            nodes.push(QuadNode::Polar { radius, angle });
            let l = lw + angular_log_weight;
            log_weights.push(l);
            weights.push(l.exp());
        }
    }
    Ok(QuadratureRule {
        kind: RuleKind::ComplexPolar,
        nodes,
        weights,
        log_weights,
        radial_order,
        angular_order: Some(angular_order),
    })
}

fn build_gauss_hermite(n: usize) -> QuadratureRule {
    // Jacobi matrix of the orthonormal Hermite polynomials
    let seeds = jacobi_eigenvalues(n, |_| 0.0, |k| (k as f64 / 2.0).sqrt());
    // Only the non-negative half is polished; the rule is mirrored exactly.
    let half: Vec<(f64, f64)> = seeds[n / 2..]
        .iter()
        .map(|&x0| polish_hermite_root(n, if n % 2 == 1 && x0.abs() < 1e-8 { 0.0 } else { x0 }))
        .collect();
    let mut xs = Vec::with_capacity(n);
    let mut lws = Vec::with_capacity(n);
    let skip_centre = n % 2;
    for &(x, lw) in half.iter().skip(skip_centre).rev() {
        xs.push(-x);
        lws.push(lw);
    }
    for &(x, lw) in &half {
        xs.push(x);
        lws.push(lw);
    }
    QuadratureRule {
        kind: RuleKind::RealHermite,
        weights: lws.iter().map(|l| l.exp()).collect(),
        nodes: xs.into_iter().map(QuadNode::Real).collect(),
        log_weights: lws,
        radial_order: n,
        angular_order: None,
    }
}

/// Orthonormal Hermite values `p_n(x)` and `p_{n-1}(x)` as mantissas sharing
/// one log scale.
fn hermite_pair(n: usize, x: f64) -> (f64, f64, f64) {
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 1e150f64.ln();
        }
    }
    (cur, prev, log_scale)
}

/// Newton-polishes a root of `p_n` and returns `(root, ln weight)` with
/// `w = 1 / (n p_{n-1}(x)²)`.
fn polish_hermite_root(n: usize, mut x: f64) -> (f64, f64) {
    if n % 2 == 1 && x == 0.0 {
        // exact centre node of odd rules
    } else {
        for _ in 0..8 {
            let (pn, pn1, _) = hermite_pair(n, x);
            let dx = pn / ((2.0 * n as f64).sqrt() * pn1);
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    let (_, pn1, ls) = hermite_pair(n, x);
    let lw = -(n as f64).ln() - 2.0 * (pn1.abs().ln() + ls);
    (x, lw)
}

fn gauss_laguerre_shared(n: usize) -> (Arc<Vec<f64>>, Arc<Vec<f64>>) {
    type Entry = (Arc<Vec<f64>>, Arc<Vec<f64>>);
    static CACHE: OnceLock<Mutex<HashMap<usize, Entry>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().unwrap().get(&n) {
        return e.clone();
    }
    let (t, lw) = build_gauss_laguerre(n);
    let entry = (Arc::new(t), Arc::new(lw));
    cache.lock().unwrap().insert(n, entry.clone());
    entry
}

/// Gauss–Laguerre (α = 0) nodes and log weights for `∫₀^∞ e^{-t} f(t) dt`.
fn build_gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let seeds = jacobi_eigenvalues(n, |k| (2 * k + 1) as f64, |k| k as f64);
    let mut nodes = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    for x0 in seeds {
        let mut x = x0;
        for _ in 0..8 {
            let (ln, ln1, _) = laguerre_pair(n, x);
            // x L_n' = n (L_n - L_{n-1})
            let dx = x * ln / (n as f64 * (ln - ln1));
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        let lw = laguerre_christoffel_log(n, x);
        nodes.push(x);
        log_weights.push(lw);
    }
    (nodes, log_weights)
}

/// `-ln Σ_{k<n} L_k(x)²`. The Christoffel form is far less sensitive to the
/// last few ulps of the root than `x / (n² L_{n-1}(x)²)`.
fn laguerre_christoffel_log(n: usize, x: f64) -> f64 {
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for k in 0..n - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 1e150f64.ln();
            let carried = acc.value() * 1e-300;
            acc = CompensatedSum::new();
            acc.add(carried);
        }
        acc.add(cur * cur);
    }
    -(acc.value().ln() + 2.0 * log_scale)
}

fn laguerre_pair(n: usize, x: f64) -> (f64, f64, f64) {
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 1e150f64.ln();
        }
    }
    (cur, prev, log_scale)
}

/// Sorted eigenvalues of the symmetric tridiagonal matrix with the given
/// diagonal `a(k)`, `k = 0..n`, and off-diagonal `b(k)`, `k = 1..n`.
fn jacobi_eigenvalues(n: usize, a: impl Fn(usize) -> f64, b: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = a(k);
        if k > 0 {
            m[(k, k - 1)] = b(k);
            m[(k - 1, k)] = b(k);
        }
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

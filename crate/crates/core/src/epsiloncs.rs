//! ε-coherent states `|z;m,ε⟩ = 𝒩^{-1/2} Σₙ conj(Φₙᵐ(z)) σ_{m,ε}(n)^{-1/2} |φₙ⟩`
//! for the harmonic oscillator, together with their overlaps, closed-form
//! wavefunctions, thermal evolution and the Mehler/heat kernel.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::polyfock::{phi_normalized, reproducing_kernel};
use crate::quad::{gauss_hermite_shared, CompensatedSum, ComplexSum, MAX_HERMITE_ORDER};
use crate::sampled::{Interpolation, LineFunction, SampledFunction};
use crate::specfun::{factorial, hermite, ho_eigenfunctions, laguerre, PolyIndex};

/// A point `z`, Landau level `m` and parameter `ε > 0` labelling one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateLabel {
    z: Complex64,
    m: usize,
    eps: f64,
}

impl StateLabel {
    pub fn new(z: Complex64, m: usize, eps: f64) -> Result<Self> {
        check_finite_point("z", z)?;
        check_range("eps", eps, eps.is_finite() && eps > 0.0, "finite and > 0")?;
        Ok(Self { z, m, eps })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.z, self.m, eps)
    }
}

pub(crate) fn check_finite_point(name: &'static str, z: Complex64) -> Result<()> {
    check_range(name, z.re, z.re.is_finite(), "finite")?;
    check_range(name, z.im, z.im.is_finite(), "finite")
}

fn lag0(m: usize, t: Complex64) -> Complex64 {
    laguerre(PolyIndex::int(m, 0).expect("valid index"), t)
}

/// `𝒩_{m,ε}(z) = π^{-1} exp(e^{-ε}|z|² - mε) L_m(2(1 - cosh ε)|z|²)`.
///
/// Positivity is checked rather than assumed.
pub fn normalization(label: &StateLabel) -> Result<f64> {
    normalization_with_eps(label.m, label.eps, label.z)
}

/// Same as [`normalization`] but admits `ε = 0`, where `𝒩 = K_m(z,z)`.
pub fn normalization_with_eps(m: usize, eps: f64, z: Complex64) -> Result<f64> {
    check_range("eps", eps, eps.is_finite() && eps >= 0.0, "finite and >= 0")?;
    let r2 = z.norm_sqr();
    // 2(1 - cosh ε) = -4 sinh²(ε/2), without the cancellation at small ε
    let s = (0.5 * eps).sinh();
    let lag = lag0(m, Complex64::new(-4.0 * s * s * r2, 0.0)).re;
    let value = ((-eps).exp() * r2 - m as f64 * eps).exp() * lag / PI;
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveNormalization { m, eps, z, value })
    }
}

/// `N* = ceil(e |z|² e^{-ε}) + m + 40`, the default truncation order.
pub fn truncation_order(label: &StateLabel) -> usize {
    (std::f64::consts::E * label.z.norm_sqr() * (-label.eps).exp()).ceil() as usize + label.m + 40
}

/// Expansion of a state in the oscillator eigenbasis, truncated to `n < trunc`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub label: StateLabel,
    pub entries: Vec<Complex64>,
    /// `1 - Σ|cₙ|²` over the kept entries.
    pub tail_mass: f64,
}

impl CoefficientVector {
    pub fn trunc(&self) -> usize {
        self.entries.len()
    }
}

/// `cₙ = conj(Φₙᵐ(z)) / √(σ_{m,ε}(n) 𝒩_{m,ε}(z))` for `n < trunc`.
pub fn coefficients(label: &StateLabel, trunc: usize) -> Result<CoefficientVector> {
    check_range("trunc", trunc as f64, trunc >= 1, ">= 1")?;
    let inv_sqrt_n = normalization(label)?.sqrt().recip();
    let entries: Vec<Complex64> = (0..trunc)
        .into_par_iter()
        .map(|n| phi_normalized(label.m, n, label.eps, label.z).conj() * inv_sqrt_n)
        .collect();
    let mass: CompensatedSum = entries.iter().map(|c| c.norm_sqr()).collect();
    Ok(CoefficientVector {
        label: *label,
        entries,
        tail_mass: 1.0 - mass.value(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Overlap,
    Reproducing,
    Mehler,
    Heat,
}

/// Arguments a kernel value was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelParams {
    Overlap { z: Complex64, w: Complex64, m: usize, eps: f64 },
    Reproducing { z: Complex64, w: Complex64, m: usize },
    Mehler { tau: f64, x: f64, y: f64 },
    Heat { eps: f64, x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: Complex64,
    pub params: KernelParams,
}

impl KernelEval {
    pub fn kind(&self) -> KernelKind {
        match self.params {
            KernelParams::Overlap { .. } => KernelKind::Overlap,
            KernelParams::Reproducing { .. } => KernelKind::Reproducing,
            KernelParams::Mehler { .. } => KernelKind::Mehler,
            KernelParams::Heat { .. } => KernelKind::Heat,
        }
    }
}

/// `⟨z;m,ε|w;m,ε⟩ = exp(e^{-ε} z w̄ - mε) L_m((z e^{-ε} - w)(z̄ e^{ε} - w̄)) / (π √(𝒩(z) 𝒩(w)))`.
///
/// Evaluated on a canonically ordered pair, so swapping `z` and `w`
/// conjugates the result exactly.
pub fn overlap(z: Complex64, w: Complex64, m: usize, eps: f64) -> Result<KernelEval> {
    check_finite_point("z", z)?;
    check_finite_point("w", w)?;
    let label = StateLabel::new(z, m, eps)?;
    let swapped = (w.re, w.im) < (z.re, z.im);
    let (a, b) = if swapped { (w, z) } else { (z, w) };
    let na = normalization(&label_at(a, &label))?;
    let nb = normalization(&label_at(b, &label))?;
    let decay = (-eps).exp();
    let grow = eps.exp();
    let arg = if a == b {
        // real on the diagonal: |z|² (e^{-ε} - 1)(e^{ε} - 1)
        Complex64::new(a.norm_sqr() * (-eps).exp_m1() * eps.exp_m1(), 0.0)
    } else {
        (a * decay - b) * (a.conj() * grow - b.conj())
    };
    let mut value = ((a * b.conj()) * decay - m as f64 * eps).exp() * lag0(m, arg) / (PI * (na * nb).sqrt());
    if swapped {
        value = value.conj();
    }
    Ok(KernelEval {
        value,
        params: KernelParams::Overlap { z, w, m, eps },
    })
}

fn label_at(z: Complex64, like: &StateLabel) -> StateLabel {
    StateLabel { z, ..*like }
}

/// Partial sum `Σ_{n<trunc} Φₙᵐ(z) conj(Φₙᵐ(w)) / (σ_{m,ε}(n) √(𝒩(z)𝒩(w)))`.
pub fn overlap_series(z: Complex64, w: Complex64, m: usize, eps: f64, trunc: usize) -> Result<Complex64> {
    let lz = StateLabel::new(z, m, eps)?;
    let lw = StateLabel::new(w, m, eps)?;
    let cz = coefficients(&lz, trunc)?;
    let cw = coefficients(&lw, trunc)?;
    let sum: ComplexSum = cz.entries.iter().zip(&cw.entries).map(|(a, b)| a.conj() * b).collect();
    Ok(sum.value())
}

/// `K_m(z,w) / √(K_m(z,z) K_m(w,w))`, the ε → 0 limit of the overlap.
pub fn normalized_reproducing_kernel(m: usize, z: Complex64, w: Complex64) -> Complex64 {
    let kzz = reproducing_kernel(m, z, z).re;
    let kww = reproducing_kernel(m, w, w).re;
    reproducing_kernel(m, z, w) / (kzz * kww).sqrt()
}

/// `|overlap(z,w,m,ε) - K_m(z,w)/√(K_m(z,z)K_m(w,w))|` along a strictly
/// decreasing sequence of positive `ε`.
pub fn overlap_limit_defect(z: Complex64, w: Complex64, m: usize, eps_sequence: &[f64]) -> Result<Vec<f64>> {
    check_decreasing(eps_sequence)?;
    let limit = normalized_reproducing_kernel(m, z, w);
    eps_sequence
        .iter()
        .map(|&eps| Ok((overlap(z, w, m, eps)?.value - limit).norm()))
        .collect()
}

pub(crate) fn check_decreasing(eps: &[f64]) -> Result<()> {
    for (i, &e) in eps.iter().enumerate() {
        check_range("eps", e, e.is_finite() && e > 0.0, "finite and > 0")?;
        if i > 0 && e >= eps[i - 1] {
            return Err(Error::OutOfRange {
                name: "eps",
                value: e,
                requirement: "strictly decreasing sequence",
            });
        }
    }
    Ok(())
}

/// `Σ_{n<trunc} cₙ φₙ(x)`, the series form of the state's wavefunction.
pub fn wavefunction_series(x: f64, label: &StateLabel, trunc: usize) -> Result<Complex64> {
    check_range("x", x, x.is_finite(), "finite")?;
    let c = coefficients(label, trunc)?;
    Ok(series_from_coefficients(x, &c.entries))
}

pub(crate) fn series_from_coefficients(x: f64, entries: &[Complex64]) -> Complex64 {
    let phis = ho_eigenfunctions(entries.len() - 1, x);
    let sum: ComplexSum = entries.iter().zip(&phis).map(|(c, p)| c * p).collect();
    sum.value()
}

/// Closed-form wavefunction `⟨x|z;m,ε⟩`.
pub fn wavefunction_closed(x: f64, label: &StateLabel) -> Result<Complex64> {
    let n = normalization(label)?;
    Ok(wavefunction_unnormalized(x, label.z, label.m, label.eps)? / n.sqrt())
}

/// `√𝒩_{m,ε}(z) ⟨x|z;m,ε⟩`:
///
/// `(-1)^m (e^{-ε/2}/√2)^m / (π^{3/4} √m!) · exp(-x²/2 + √2 x z̄ e^{-ε/2} - e^{-ε} z̄²/2)
///  · H_m(x - (e^{ε/2} z + e^{-ε/2} z̄)/√2)`.
///
/// Finite at `ε = 0`, where it is the kernel of the ε → 0 transform.
pub fn wavefunction_unnormalized(x: f64, z: Complex64, m: usize, eps: f64) -> Result<Complex64> {
    check_range("x", x, x.is_finite(), "finite")?;
    check_finite_point("z", z)?;
    check_range("eps", eps, eps.is_finite() && eps >= 0.0, "finite and >= 0")?;
    Ok(WavefunctionKernel::new(z, m, eps).eval(x))
}

/// Per-`z` constants of [`wavefunction_unnormalized`], hoisted out of loops over `x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WavefunctionKernel {
    m: usize,
    prefactor: f64,
    linear: Complex64,
    constant: Complex64,
    shift: Complex64,
}

impl WavefunctionKernel {
    pub(crate) fn new(z: Complex64, m: usize, eps: f64) -> Self {
        let half_decay = (-0.5 * eps).exp();
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let prefactor = sign * (half_decay / SQRT_2).powi(m as i32) / (PI.powf(0.75) * factorial(m).sqrt());
        let zb = z.conj();
        Self {
            m,
            prefactor,
            linear: zb * (SQRT_2 * half_decay),
            constant: -zb * zb * (0.5 * half_decay * half_decay),
            shift: (z * (0.5 * eps).exp() + zb * half_decay) / SQRT_2,
        }
    }

    pub(crate) fn eval(&self, x: f64) -> Complex64 {
        let gauss = (self.linear * x + self.constant - 0.5 * x * x).exp();
        let h = hermite(self.m, Complex64::new(x, 0.0) - self.shift);
        gauss * h * self.prefactor
    }
}

/// Heat-semigroup action on a state: `e^{-tL̃/2}` maps the ε-state to a
/// multiple of the (ε+t)-state. Returns `(√(𝒩_{ε+t}/𝒩_ε), shifted label)`.
pub fn thermal_shift(label: &StateLabel, t: f64) -> Result<(f64, StateLabel)> {
    check_range("t", t, t.is_finite() && t > 0.0, "finite and > 0")?;
    let shifted = label.with_eps(label.eps + t)?;
    let scale = (normalization(&shifted)? / normalization(label)?).sqrt();
    Ok((scale, shifted))
}

/// `diag(e^{-nt/2})` applied to coefficient entries.
pub fn apply_thermal(entries: &[Complex64], t: f64) -> Vec<Complex64> {
    entries
        .iter()
        .enumerate()
        .map(|(n, c)| c * (-0.5 * n as f64 * t).exp())
        .collect()
}

/// Mehler kernel
/// `K(τ;x,y) = π^{-1/2} (1-τ²)^{-1/2} exp(2τxy/(1+τ) - τ²(x-y)²/(1-τ²))`,
/// the closed form of `π^{-1/2} Σₙ (τ/2)ⁿ Hₙ(x) Hₙ(y) / n!`.
pub fn mehler_kernel(tau: f64, x: f64, y: f64) -> Result<KernelEval> {
    check_range("tau", tau, tau > 0.0 && tau < 1.0, "0 < tau < 1")?;
    check_range("x", x, x.is_finite(), "finite")?;
    check_range("y", y, y.is_finite(), "finite")?;
    let one_minus = (1.0 - tau) * (1.0 + tau);
    let value = mehler_exponent(tau, one_minus, x, y).exp() / (PI * one_minus).sqrt();
    Ok(KernelEval {
        value: Complex64::new(value, 0.0),
        params: KernelParams::Mehler { tau, x, y },
    })
}

fn mehler_exponent(tau: f64, one_minus_tau2: f64, x: f64, y: f64) -> f64 {
    let d = x - y;
    2.0 * tau * (x * y) / (1.0 + tau) - tau * tau * (d * d) / one_minus_tau2
}

/// Heat kernel `G_ε(x,y) = e^{-(x²+y²)/2} K(e^{-ε};x,y) = Σₙ e^{-nε} φₙ(x) φₙ(y)`.
///
/// The Gaussian factor is folded into the exponent so that the value stays
/// finite far from the diagonal.
pub fn heat_kernel(eps: f64, x: f64, y: f64) -> Result<KernelEval> {
    check_range("eps", eps, eps.is_finite() && eps > 0.0, "finite and > 0")?;
    check_range("x", x, x.is_finite(), "finite")?;
    check_range("y", y, y.is_finite(), "finite")?;
    let tau = (-eps).exp();
    let one_minus = -(-2.0 * eps).exp_m1();
    let exponent = mehler_exponent(tau, one_minus, x, y) - 0.5 * (x * x + y * y);
    let value = exponent.exp() / (PI * one_minus).sqrt();
    Ok(KernelEval {
        value: Complex64::new(value, 0.0),
        params: KernelParams::Heat { eps, x, y },
    })
}

/// Gauss–Hermite order and the self-check tolerance used to accept a result.
///
/// Every quadrature result is recomputed at twice the order; the two must
/// agree to `tolerance · max(1, |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adequacy {
    pub order: usize,
    pub tolerance: f64,
}

impl Default for Adequacy {
    fn default() -> Self {
        Self {
            order: 96,
            tolerance: 1e-10,
        }
    }
}

impl Adequacy {
    pub(crate) fn validate(&self) -> Result<()> {
        check_range(
            "quad_order",
            self.order as f64,
            self.order >= 1 && 2 * self.order <= MAX_HERMITE_ORDER,
            "1 <= order <= 256 (the check runs at twice the order)",
        )?;
        check_range(
            "tolerance",
            self.tolerance,
            self.tolerance.is_finite() && self.tolerance > 0.0,
            "finite and > 0",
        )
    }

    pub(crate) fn accept(&self, coarse: Complex64, fine: Complex64) -> Result<Complex64> {
        let deviation = (coarse - fine).norm();
        if deviation <= self.tolerance * fine.norm().max(1.0) {
            Ok(coarse)
        } else {
            Err(Error::QuadratureInadequate {
                order: self.order,
                check_order: 2 * self.order,
                deviation,
                tolerance: self.tolerance,
            })
        }
    }
}

/// The heat operator `𝒪_ε[φ](x) = e^{-x²/2} ∫ φ(y) e^{-y²/2} K(e^{-ε};x,y) dy`
/// on `x_grid`.
///
/// For each `x` the Gaussian part of the integrand is completed to
/// `e^{-A(y-y₀)²}` and the substitution `y = y₀ + u/√A` exposes the
/// Gauss–Hermite weight, so the rule follows the kernel as it sharpens for
/// small `ε`.
pub fn apply_heat(
    eps: f64,
    phi: &impl LineFunction,
    x_grid: &[f64],
    adequacy: Adequacy,
) -> Result<SampledFunction> {
    check_range("eps", eps, eps.is_finite() && eps > 0.0, "finite and > 0")?;
    adequacy.validate()?;
    let coarse = gauss_hermite_shared(adequacy.order)?;
    let fine = gauss_hermite_shared(2 * adequacy.order)?;

    let tau = (-eps).exp();
    let one_minus = -(-2.0 * eps).exp_m1();
    let a = tau * tau / one_minus;
    let b = 2.0 * tau / (1.0 + tau);
    let big_a = 0.5 + a;
    let scale = 1.0 / big_a.sqrt();
    let prefactor = scale / (PI * one_minus).sqrt();
    // exponent left after completing the square, divided by x²:
    // (b - 1)(b + 4a + 1) / (4A), with b - 1 = (τ - 1)/(1 + τ)
    let residual = (-eps).exp_m1() / (1.0 + tau) * (b + 4.0 * a + 1.0) / (4.0 * big_a);

    let values: Result<Vec<Complex64>> = x_grid
        .par_iter()
        .map(|&x| {
            check_range("x", x, x.is_finite(), "finite")?;
            let y0 = (b + 2.0 * a) * x / (2.0 * big_a);
            let outer = prefactor * (residual * x * x).exp();
            let at = |rule: &crate::quad::QuadratureRule| {
                rule.integrate(|node| phi.eval(y0 + scale * node.point().re))
                    .map(|v| v * outer)
            };
            adequacy.accept(at(&coarse)?, at(&fine)?)
        })
        .collect();
    SampledFunction::new(x_grid.to_vec(), values?, Interpolation::Linear)
}

/// `sup_x |𝒪_ε[φ](x) - φ(x)|` over `x_grid` along a strictly decreasing
/// sequence of positive `ε`.
pub fn heat_limit_defect(
    phi: &impl LineFunction,
    x_grid: &[f64],
    eps_sequence: &[f64],
    adequacy: Adequacy,
) -> Result<Vec<f64>> {
    check_decreasing(eps_sequence)?;
    eps_sequence
        .iter()
        .map(|&eps| {
            let smoothed = apply_heat(eps, phi, x_grid, adequacy)?;
            Ok(x_grid
                .iter()
                .zip(smoothed.values())
                .map(|(&x, v)| (v - phi.eval(x)).norm())
                .fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) }))
        })
        .collect()
}

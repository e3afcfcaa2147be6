//! The Bargmann-type transform `B_mᵉ[φ](z) = √𝒩_{m,ε}(z) ⟨φ|z;m,ε⟩`, its
//! `ε = 0` and `m = 0` specializations, and the normalized kernel `K_{m,ε}`.
//!
//! The transform is taken literally from the inner product, which is
//! conjugate-linear in its first slot. Consequently
//! `B_mᵉ[φₙ](z) = conj(Φₙᵐ(z)) e^{-nε/2} / √(π m! n!)` and the transform is
//! conjugate-linear in `φ`; at `m = 0, ε = 0` it equals
//! `conj(B[φ](z)) / √π` where `B` is the textbook Bargmann transform.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::epsiloncs::{check_finite_point, normalization_with_eps, Adequacy, WavefunctionKernel};
use crate::error::{check_range, Error, Result};
use crate::quad::{gauss_hermite_shared, QuadratureRule};
use crate::sampled::LineFunction;
use crate::specfun::{factorial, hermite, laguerre, PolyIndex};

/// Parameters of one transform. `eps = 0` selects the `ε → 0` limit `B_m⁰`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub m: usize,
    pub eps: f64,
    pub quad_order: usize,
    /// Accepted deviation between the order-`quad_order` result and the
    /// doubled-order check, relative to `max(1, |value|)`.
    pub tolerance: f64,
}

impl TransformSpec {
    pub fn new(m: usize, eps: f64) -> Self {
        let d = Adequacy::default();
        Self {
            m,
            eps,
            quad_order: d.order,
            tolerance: d.tolerance,
        }
    }

    pub fn with_quad_order(self, quad_order: usize) -> Self {
        Self { quad_order, ..self }
    }

    fn adequacy(&self) -> Adequacy {
        Adequacy {
            order: self.quad_order,
            tolerance: self.tolerance,
        }
    }

    fn validate(&self) -> Result<()> {
        check_range("eps", self.eps, self.eps.is_finite() && self.eps >= 0.0, "finite and >= 0")?;
        self.adequacy().validate()
    }
}

/// `φ` tabulated on the nodes of both the working rule and its check rule.
struct Sampled {
    coarse: (std::sync::Arc<QuadratureRule>, Vec<Complex64>),
    fine: (std::sync::Arc<QuadratureRule>, Vec<Complex64>),
}

impl Sampled {
    fn new(phi: &impl LineFunction, order: usize) -> Result<Self> {
        let tab = |order| -> Result<_> {
            let rule = gauss_hermite_shared(order)?;
            // ∫ g dx = Σ wᵢ e^{xᵢ²} g(xᵢ); the e^{xᵢ²} factor is folded in here
            let factors = rule.unweighted_factors()?;
            let values = rule
                .real_nodes()
                .iter()
                .zip(&factors)
                .map(|(&x, f)| phi.eval(x).conj() * *f)
                .collect();
            Ok((rule, values))
        };
        Ok(Self {
            coarse: tab(order)?,
            fine: tab(2 * order)?,
        })
    }

    fn integrate(&self, adequacy: &Adequacy, kernel: impl Fn(f64) -> Complex64) -> Result<Complex64> {
        let run = |(rule, values): &(std::sync::Arc<QuadratureRule>, Vec<Complex64>)| {
            let xs = rule.real_nodes();
            let integrand: Vec<Complex64> = xs.iter().zip(values).map(|(&x, v)| v * kernel(x)).collect();
            rule.sum_prepared(&integrand)
        };
        adequacy.accept(run(&self.coarse)?, run(&self.fine)?)
    }
}

/// `B_mᵉ[φ](z) = ∫ conj(φ(x)) √𝒩 ⟨x|z;m,ε⟩ dx` by Gauss–Hermite quadrature
/// against the closed-form wavefunction, with a doubled-order self-check.
pub fn transform(spec: &TransformSpec, phi: &impl LineFunction, z: Complex64) -> Result<Complex64> {
    Ok(transform_grid(spec, phi, &[z])?[0])
}

/// [`transform`] over many points; `φ` is sampled once and the points are
/// processed in parallel, results in input order.
pub fn transform_grid(spec: &TransformSpec, phi: &impl LineFunction, zs: &[Complex64]) -> Result<Vec<Complex64>> {
    spec.validate()?;
    for &z in zs {
        check_finite_point("z", z)?;
    }
    if zs.is_empty() {
        return Ok(Vec::new());
    }
    let sampled = Sampled::new(phi, spec.quad_order)?;
    let adequacy = spec.adequacy();
    zs.par_iter()
        .map(|&z| {
            let k = WavefunctionKernel::new(z, spec.m, spec.eps);
            sampled.integrate(&adequacy, |x| k.eval(x))
        })
        .collect()
}

/// `K_{m,ε}(z,w) = exp(e^{-ε} z w̄ - mε) L_m((z e^{-ε} - w)(z̄ e^{ε} - w̄)) / √(𝒩'(z) 𝒩'(w))`
/// with the π-free `𝒩'(z) = exp(e^{-ε}|z|² - mε) L_m(2(1 - cosh ε)|z|²)`.
pub fn normalized_kernel(m: usize, eps: f64, z: Complex64, w: Complex64) -> Result<Complex64> {
    check_range("eps", eps, eps.is_finite() && eps > 0.0, "finite and > 0")?;
    check_finite_point("z", z)?;
    check_finite_point("w", w)?;
    let lag = |t: Complex64| laguerre(PolyIndex::int(m, 0).expect("valid index"), t);
    let n_free = |p: Complex64| {
        let r2 = p.norm_sqr();
        let value = ((-eps).exp() * r2 - m as f64 * eps).exp() * lag(Complex64::new(2.0 * (1.0 - eps.cosh()) * r2, 0.0)).re;
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonPositiveNormalization { m, eps, z: p, value })
        }
    };
    let arg = (z * (-eps).exp() - w) * (z.conj() * eps.exp() - w.conj());
    let head = (z * w.conj() * (-eps).exp() - m as f64 * eps).exp();
    Ok(head * lag(arg) / (n_free(z)? * n_free(w)?).sqrt())
}

/// Textbook Bargmann transform
/// `B[φ](z) = π^{-1/4} ∫ exp(-x²/2 + √2 x z - z²/2) φ(x) dx`, with `B[φₙ](z) = zⁿ/√n!`.
pub fn bargmann_classical(phi: &impl LineFunction, z: Complex64, quad_order: usize) -> Result<Complex64> {
    check_finite_point("z", z)?;
    let adequacy = Adequacy {
        order: quad_order,
        ..Adequacy::default()
    };
    adequacy.validate()?;
    let scale = PI.powf(-0.25);
    let run = |rule: &QuadratureRule| {
        rule.integrate_unweighted(|x| {
            (Complex64::new(-0.5 * x * x, 0.0) + z * (SQRT_2 * x) - z * z * 0.5).exp() * phi.eval(x) * scale
        })
    };
    adequacy.accept(
        run(&*gauss_hermite_shared(quad_order)?)?,
        run(&*gauss_hermite_shared(2 * quad_order)?)?,
    )
}

/// The explicit integral printed alongside the transform's definition:
///
/// `(-1)^m e^{-mε/2} / (2^{m/2} √m! π^{1/4}) ∫ exp(-x²/2 + √2 x z e^{-ε/2} - e^{-ε} z²/2)
///  H_m(x - e^{-ε/2} z̄/√2 - e^{ε/2} z/√2) φ(x) dx`.
///
/// Kept as a secondary path for comparison with [`transform`]: it uses the
/// π-free normalization and places `z` where the inner product has `z̄`, so
/// it agrees with `√π · conj(transform)` for real `φ` only when `z` is real
/// or `ε = 0`.
pub fn transform_printed_kernel(spec: &TransformSpec, phi: &impl LineFunction, z: Complex64) -> Result<Complex64> {
    spec.validate()?;
    check_finite_point("z", z)?;
    let (m, eps) = (spec.m, spec.eps);
    let half = (-0.5 * eps).exp();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let pre = sign * (-0.5 * m as f64 * eps).exp() / (2f64.powf(0.5 * m as f64) * factorial(m).sqrt() * PI.powf(0.25));
    let shift = (z.conj() * half + z * (0.5 * eps).exp()) / SQRT_2;
    let run = |rule: &QuadratureRule| {
        rule.integrate_unweighted(|x| {
            let g = (Complex64::new(-0.5 * x * x, 0.0) + z * (SQRT_2 * x * half) - z * z * (0.5 * half * half)).exp();
            g * hermite(m, Complex64::new(x, 0.0) - shift) * phi.eval(x) * pre
        })
    };
    spec.adequacy().accept(
        run(&*gauss_hermite_shared(spec.quad_order)?)?,
        run(&*gauss_hermite_shared(2 * spec.quad_order)?)?,
    )
}

/// Least-squares check that `conj(B_mᵉ[φ])` is polyanalytic of order `m+1`
/// near `center`.
///
/// Samples the transform on rings inside the disc of the given radius, fits
/// `Σ_{j<=z_degree, k<=m+1} a_{jk} uʲ ūᵏ` with `u = (z - center)/radius`, and
/// returns `max_j |a_{j,m+1}| / max |a|`. For `φ` in the span of `φ₀..φ_N`
/// the exact fit has `z_degree = N` and no `ū^{m+1}` content.
pub fn polyanalyticity_defect(
    spec: &TransformSpec,
    phi: &impl LineFunction,
    center: Complex64,
    radius: f64,
    z_degree: usize,
) -> Result<f64> {
    check_range("radius", radius, radius.is_finite() && radius > 0.0, "finite and > 0")?;
    let m = spec.m;
    let rings = (z_degree + m + 4).max(6);
    let per_ring = 2 * (z_degree + m + 4);
    let us: Vec<Complex64> = (1..=rings)
        .flat_map(|i| {
            let r = i as f64 / rings as f64;
            (0..per_ring).map(move |k| Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5 * i as f64) / per_ring as f64))
        })
        .collect();
    let zs: Vec<Complex64> = us.iter().map(|u| center + u * radius).collect();
    let values = transform_grid(spec, phi, &zs)?;

    let coef = fit_conjugate_monomials(&us, &values, z_degree, m + 1)?;
    let largest = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let top = (0..=z_degree)
        .map(|j| coef[j * (m + 2) + m + 1].norm())
        .fold(0.0, f64::max);
    Ok(if largest > 0.0 { top / largest } else { 0.0 })
}

/// Least-squares coefficients `a_{jk}` (index `j·(k_max+1) + k`) of
/// `conj(value) ≈ Σ a_{jk} uʲ ūᵏ`.
fn fit_conjugate_monomials(
    us: &[Complex64],
    values: &[Complex64],
    z_degree: usize,
    k_max: usize,
) -> Result<DVector<Complex64>> {
    let cols = (z_degree + 1) * (k_max + 1);
    let a = DMatrix::from_fn(us.len(), cols, |row, col| {
        let (j, k) = (col / (k_max + 1), col % (k_max + 1));
        us[row].powu(j as u32) * us[row].conj().powu(k as u32)
    });
    let b = DVector::from_iterator(values.len(), values.iter().map(|v| v.conj()));
    a.svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidSamples(format!("least-squares fit failed: {e}")))
}

/// `√𝒩_{m,ε}(z)`, the factor relating the transform to the overlap with
/// the state (available at `ε = 0`, where it is `√K_m(z,z)`).
pub fn transform_weight(m: usize, eps: f64, z: Complex64) -> Result<f64> {
    normalization_with_eps(m, eps, z).map(f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epsiloncs::overlap;
    use crate::polyfock::phi as basis;
    use crate::sampled::{Eigenstate, Interpolation, SampledFunction};
    use crate::specfun::ho_eigenfunction;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coefficient_image(m: usize, n: usize, eps: f64, z: Complex64) -> Complex64 {
        basis(m, n, z).conj() * (-0.5 * n as f64 * eps).exp() / (PI * factorial(m) * factorial(n)).sqrt()
    }

    #[test]
    fn transform_examples() {
        let spec = TransformSpec::new(0, 0.0);
        for &z in &[c(0.0, 0.0), c(1.0, -0.5), c(-1.5, 1.2)] {
            let v = transform(&spec, &Eigenstate(0), z).unwrap();
            assert!((v - c(PI.sqrt().recip(), 0.0)).norm() < 1e-12, "z={z}");
            for n in 1..6 {
                let v = transform(&spec, &Eigenstate(n), z).unwrap();
                let want = z.conj().powu(n as u32) / (PI * factorial(n)).sqrt();
                assert!((v - want).norm() < 1e-11, "n={n} z={z}");
            }
        }
        let v = transform(&TransformSpec::new(2, 0.5), &Eigenstate(1), c(1.0, 0.0)).unwrap();
        let want = -(-0.25f64).exp() / (2.0 * PI).sqrt();
        assert!((v - c(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn coefficient_identity() {
        let grid: Vec<Complex64> = [-1.0, 0.0, 1.0]
            .iter()
            .flat_map(|&re| [-1.0, 0.0, 1.0].map(|im| c(re, im)))
            .collect();
        for m in 0..=5 {
            for &eps in &[0.3, 1.0] {
                let spec = TransformSpec::new(m, eps);
                for n in 0..=8 {
                    let got = transform_grid(&spec, &Eigenstate(n), &grid).unwrap();
                    for (z, v) in grid.iter().zip(&got) {
                        assert!((v - coefficient_image(m, n, eps, *z)).norm() < 1e-9, "m={m} eps={eps} n={n} z={z}");
                    }
                }
            }
        }
    }

    #[test]
    fn grid_edge_cases() {
        let spec = TransformSpec::new(0, 0.0);
        assert!(transform_grid(&spec, &Eigenstate(1), &[]).unwrap().is_empty());
        let z = c(0.4, 0.9);
        assert_eq!(
            transform_grid(&spec, &Eigenstate(1), &[z]).unwrap()[0],
            transform(&spec, &Eigenstate(1), z).unwrap()
        );
        let zs: Vec<Complex64> = (0..100).map(|i| Complex64::from_polar(0.02 * i as f64, 0.37 * i as f64)).collect();
        let got = transform_grid(&spec, &Eigenstate(1), &zs).unwrap();
        for (z, v) in zs.iter().zip(&got) {
            assert!((v - z.conj() / PI.sqrt()).norm() < 1e-10);
        }
    }

    #[test]
    fn relation_to_classical_transform() {
        let spec = TransformSpec::new(0, 0.0);
        let f = |x: f64| c(ho_eigenfunction(0, x) - 0.5 * ho_eigenfunction(3, x), 0.3 * ho_eigenfunction(1, x));
        for &z in &[c(0.2, 0.7), c(-1.1, -0.4)] {
            let ours = transform(&spec, &f, z).unwrap();
            let classical = bargmann_classical(&f, z, 96).unwrap();
            assert!((ours - classical.conj() / PI.sqrt()).norm() < 1e-12);
        }
    }

    #[test]
    fn classical_examples() {
        let z = c(1.0, 1.0);
        for &w in &[c(0.0, 0.0), c(0.3, -1.7), z] {
            assert!((bargmann_classical(&Eigenstate(0), w, 96).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
            assert!((bargmann_classical(&Eigenstate(1), w, 96).unwrap() - w).norm() < 1e-12);
        }
        let f = |x: f64| c(ho_eigenfunction(0, x) + ho_eigenfunction(2, x), 0.0);
        let v = bargmann_classical(&f, z, 96).unwrap();
        assert!((v - (c(1.0, 0.0) + z * z / SQRT_2)).norm() < 1e-12);
        for n in 0..=8 {
            let v = bargmann_classical(&Eigenstate(n), z, 96).unwrap();
            assert!((v - z.powu(n as u32) / factorial(n).sqrt()).norm() < 1e-10);
        }
    }

    #[test]
    fn normalized_kernel_matches_overlap() {
        let (z, w) = (c(0.5, 0.0), c(0.0, -0.2));
        let k = normalized_kernel(3, 0.7, z, w).unwrap();
        assert!((k - overlap(z, w, 3, 0.7).unwrap().value).norm() < 1e-13);
        assert!((normalized_kernel(2, 0.4, z, z).unwrap() - c(1.0, 0.0)).norm() < 1e-13);
        let k = normalized_kernel(0, 0.9, c(1.0, 0.5), w).unwrap();
        assert!((k - overlap(c(1.0, 0.5), w, 0, 0.9).unwrap().value).norm() < 1e-13);
    }

    #[test]
    fn linearity_over_real_scalars_and_conjugate_linearity() {
        let spec = TransformSpec::new(2, 0.4);
        let z = c(0.6, -0.8);
        let f = Eigenstate(2);
        let g = Eigenstate(5);
        let (a, b) = (1.7, -0.35);
        let h = |x: f64| f.eval(x) * a + g.eval(x) * b;
        let lhs = transform(&spec, &h, z).unwrap();
        let rhs = transform(&spec, &f, z).unwrap() * a + transform(&spec, &g, z).unwrap() * b;
        assert!((lhs - rhs).norm() < 1e-12);

        let ca = c(0.3, 1.1);
        let hc = |x: f64| f.eval(x) * ca;
        let lhs = transform(&spec, &hc, z).unwrap();
        assert!((lhs - transform(&spec, &f, z).unwrap() * ca.conj()).norm() < 1e-12);
    }

    #[test]
    fn small_eps_matches_limit() {
        for m in [0, 1, 3] {
            let f = |x: f64| c(ho_eigenfunction(1, x) + 0.5 * ho_eigenfunction(4, x), 0.0);
            let z = c(0.7, 0.4);
            let a = transform(&TransformSpec::new(m, 1e-8), &f, z).unwrap();
            let b = transform(&TransformSpec::new(m, 0.0), &f, z).unwrap();
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn polyanalyticity_proxy() {
        let f = |x: f64| c(ho_eigenfunction(0, x) + ho_eigenfunction(2, x) - 0.4 * ho_eigenfunction(5, x), 0.0);
        for m in [0, 1, 3] {
            let spec = TransformSpec::new(m, 0.5);
            let d = polyanalyticity_defect(&spec, &f, c(0.2, -0.1), 0.8, 5).unwrap();
            assert!(d < 1e-7, "m={m} defect={d}");
        }
        // the fit does see z̄ content: the level-1 image of φ₁ is -1 + |z|²
        let us: Vec<Complex64> = (1..=6)
            .flat_map(|i| (0..12).map(move |k| Complex64::from_polar(i as f64 / 6.0, 0.5 * k as f64 + 0.1 * i as f64)))
            .collect();
        let values = transform_grid(&TransformSpec::new(1, 0.5), &Eigenstate(1), &us).unwrap();
        let coef = fit_conjugate_monomials(&us, &values, 2, 1).unwrap();
        // a_{11}, the coefficient of u ū
        let want = (-0.25f64).exp() / PI.sqrt();
        assert!((coef[1 * 2 + 1] - c(want, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn printed_kernel_deviation() {
        let f = |x: f64| c(ho_eigenfunction(1, x) - ho_eigenfunction(2, x), 0.0);
        // agreement up to √π and conjugation on the real axis and at ε = 0
        for &(m, eps, z) in &[(2usize, 0.6, c(0.8, 0.0)), (3, 0.0, c(0.5, 0.7))] {
            let spec = TransformSpec::new(m, eps);
            let printed = transform_printed_kernel(&spec, &f, z).unwrap();
            let ours = transform(&spec, &f, z).unwrap();
            assert!((printed - ours.conj() * PI.sqrt()).norm() < 1e-11, "m={m} eps={eps}");
        }
        let spec = TransformSpec::new(2, 0.6);
        let z = c(0.5, 0.7);
        let printed = transform_printed_kernel(&spec, &f, z).unwrap();
        let ours = transform(&spec, &f, z).unwrap();
        assert!((printed - ours.conj() * PI.sqrt()).norm() > 1e-3);
    }

    #[test]
    fn sampled_input_and_inadequate_order() {
        let grid: Vec<f64> = (0..=800).map(|i| -8.0 + 0.02 * i as f64).collect();
        let s = SampledFunction::tabulate(&Eigenstate(2), grid, Interpolation::CubicSpline).unwrap();
        let spec = TransformSpec { tolerance: 1e-6, ..TransformSpec::new(1, 0.3) };
        let z = c(0.4, 0.3);
        let v = transform(&spec, &s, z).unwrap();
        assert!((v - coefficient_image(1, 2, 0.3, z)).norm() < 1e-6);

        let tight = TransformSpec::new(1, 0.3).with_quad_order(4);
        let err = transform(&tight, &Eigenstate(12), z).unwrap_err();
        assert!(matches!(err, Error::QuadratureInadequate { .. }), "{err}");
        assert!(transform(&TransformSpec::new(1, -0.1), &Eigenstate(0), z).is_err());
    }
}

//! Polyanalytic basis functions `Φₙᵐ`, the normalization sequence
//! `σ_{m,ε}(n) = π m! n! e^{nε}` and the true-polyanalytic reproducing
//! kernel `K_m`.
//!
//! Inner products are conjugate-linear in the first slot.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_range, Result};
use crate::quad::{QuadNode, QuadratureRule};
use crate::specfun::{factorial, laguerre, log_factorial, PolyIndex};

/// `Φₙᵐ(z) = (-1)^{m∧n} (m∧n)! |z|^{|m-n|} e^{-i(m-n) arg z} L_{m∧n}^{(|m-n|)}(|z|²)`.
///
/// Evaluated as `z^{n-m}` (n ≥ m) or `z̄^{m-n}` (m > n) times a polynomial
/// in `|z|²`, which is single-valued and exact at the origin.
pub fn phi(m: usize, n: usize, z: Complex64) -> Complex64 {
    let (lo, k) = (m.min(n), m.abs_diff(n));
    let monomial = if n >= m { z.powu(k as u32) } else { z.conj().powu(k as u32) };
    let lag = laguerre(index(lo, k), z.norm_sqr());
    let sign = if lo % 2 == 0 { 1.0 } else { -1.0 };
    monomial * (sign * factorial(lo) * lag)
}

/// `Φₙᵐ(z) / √σ_{m,ε}(n)`, assembled in the log domain so that large `n`
/// neither overflows `|z|^{|m-n|}` nor `n!`.
pub fn phi_normalized(m: usize, n: usize, eps: f64, z: Complex64) -> Complex64 {
    let (lo, k) = (m.min(n), m.abs_diff(n));
    let r2 = z.norm_sqr();
    if k > 0 && r2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let lag = laguerre(index(lo, k), r2);
    let mut log_mag = log_factorial(lo) - 0.5 * log_sigma_unchecked(m, eps, n);
    if k > 0 {
        log_mag += 0.5 * k as f64 * r2.ln();
    }
    let sign = if lo % 2 == 0 { 1.0 } else { -1.0 };
    let phase = if k == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        let theta = z.arg() * k as f64;
        let theta = if n >= m { theta } else { -theta };
        Complex64::from_polar(1.0, theta)
    };
    phase * (sign * lag * log_mag.exp())
}

fn index(lo: usize, k: usize) -> PolyIndex {
    PolyIndex::int(lo, k as i64).expect("non-negative superscript")
}

/// `ln σ_{m,ε}(n)`. `eps = 0` is allowed for limit studies.
pub fn log_sigma(m: usize, eps: f64, n: usize) -> Result<f64> {
    check_range("eps", eps, eps.is_finite() && eps >= 0.0, "finite and >= 0")?;
    Ok(log_sigma_unchecked(m, eps, n))
}

pub fn sigma(m: usize, eps: f64, n: usize) -> Result<f64> {
    log_sigma(m, eps, n).map(f64::exp)
}

pub(crate) fn log_sigma_unchecked(m: usize, eps: f64, n: usize) -> f64 {
    PI.ln() + log_factorial(m) + log_factorial(n) + n as f64 * eps
}

/// `K_m(z,w) = π^{-1} e^{z w̄} L_m(|z-w|²)`.
///
/// The pair is put in a canonical order before evaluation and the result
/// conjugated when swapped, so `K_m(w,z)` is bitwise `conj(K_m(z,w))`.
pub fn reproducing_kernel(m: usize, z: Complex64, w: Complex64) -> Complex64 {
    let swapped = (w.re, w.im) < (z.re, z.im);
    let (a, b) = if swapped { (w, z) } else { (z, w) };
    let value = (a * b.conj()).exp() * (laguerre(index(m, 0), (a - b).norm_sqr()) / PI);
    if swapped {
        value.conj()
    } else {
        value
    }
}

/// Polar-rule orders needed to integrate `Φⱼᵐ conj(Φₙᵐ) e^{-|z|²}` exactly.
pub fn required_orders(m: usize, n: usize, j: usize) -> (usize, usize) {
    // Radial degree in t = |z|² is at most m + max(n, j); angular frequency is n - j.
    ((m + n.max(j)) / 2 + 1, n.abs_diff(j) + 1)
}

/// `⟨Φₙᵐ|Φⱼᵐ⟩ = ∫ℂ Φⱼᵐ(z) conj(Φₙᵐ(z)) e^{-|z|²} dμ(z)` on a polar rule.
pub fn basis_inner_product(m: usize, n: usize, j: usize, rule: &QuadratureRule) -> Result<Complex64> {
    let (radial, angular) = required_orders(m, n, j);
    rule.require_polar(radial, angular)?;
    rule.integrate(|node: &QuadNode| {
        let z = node.point();
        phi(m, j, z) * phi(m, n, z).conj()
    })
}

/// Gram matrix `G[n][j] = ⟨Φₙᵐ|Φⱼᵐ⟩` for `n, j <= n_max`. Basis values are
/// tabulated once per node.
pub fn gram_matrix(m: usize, n_max: usize, rule: &QuadratureRule) -> Result<Vec<Vec<Complex64>>> {
    let (radial, angular) = required_orders(m, n_max, n_max);
    rule.require_polar(radial, angular.max(n_max + 1))?;
    let table: Vec<Vec<Complex64>> = rule
        .nodes()
        .iter()
        .map(|node| (0..=n_max).map(|n| phi(m, n, node.point())).collect())
        .collect();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n_max + 1]; n_max + 1];
    for (n, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let mut i = 0;
            *entry = rule.integrate(|_| {
                let v = table[i][j] * table[i][n].conj();
                i += 1;
                v
            })?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::polar_rule;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Polar form with the Laguerre explicit sum, independent of the
    /// library's recurrence and monomial path.
    fn phi_polar_oracle(m: usize, n: usize, z: Complex64) -> Complex64 {
        let lo = m.min(n);
        let k = m.abs_diff(n);
        let t = z.norm_sqr();
        let mut lag = 0.0;
        for i in 0..=lo {
            let binom = factorial(lo + k) / (factorial(lo - i) * factorial(k + i));
            lag += binom * (-t).powi(i as i32) / factorial(i);
        }
        let phase = Complex64::from_polar(1.0, -(m as f64 - n as f64) * z.arg());
        phase * ((-1f64).powi(lo as i32) * factorial(lo) * z.norm().powi(k as i32) * lag)
    }

    #[test]
    fn phi_examples() {
        let z = c(0.7, -1.1);
        assert!((phi(0, 3, z) - z.powu(3)).norm() < 1e-15);
        assert!((phi(2, 1, c(1.0, 0.0)) - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(phi(4, 4, c(0.0, 0.0)), c(24.0, 0.0));
        assert_eq!(phi(3, 1, c(0.0, 0.0)), c(0.0, 0.0));
        assert_eq!(phi(1, 3, c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn phi_matches_polar_form() {
        for &z in &[c(0.3, 0.4), c(-1.2, 0.5), c(2.0, -1.5), c(0.0, 1.0)] {
            for m in 0..6 {
                for n in 0..10 {
                    let got = phi(m, n, z);
                    let want = phi_polar_oracle(m, n, z);
                    assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "m={m} n={n} z={z}");
                }
            }
        }
    }

    #[test]
    fn normalized_phi_matches_quotient() {
        for &z in &[c(0.3, 0.4), c(-1.2, 0.5), c(0.0, 0.0), c(1.0, 0.0)] {
            for m in 0..5 {
                for n in 0..15 {
                    let eps = 0.4;
                    let want = phi(m, n, z) / sigma(m, eps, n).unwrap().sqrt();
                    let got = phi_normalized(m, n, eps, z);
                    assert!((got - want).norm() <= 1e-13 * want.norm().max(1e-300) + 1e-300, "m={m} n={n}");
                }
            }
        }
        assert!(phi_normalized(0, 600, 0.1, c(4.0, 0.0)).norm().is_finite());
    }

    #[test]
    fn sigma_examples() {
        assert!((sigma(0, 1.0, 0).unwrap() - PI).abs() < 1e-15);
        assert!((sigma(2, 0.0, 1).unwrap() - 2.0 * PI).abs() < 1e-14);
        let want = PI * 6.0 * 24.0 * 1f64.exp().powi(2);
        assert!((sigma(3, 0.5, 4).unwrap() - want).abs() < 1e-13 * want);
        assert!(sigma(0, -0.1, 0).is_err());
    }

    #[test]
    fn kernel_examples() {
        let z = c(0.4, -0.3);
        let w = c(-1.0, 0.2);
        let k0 = reproducing_kernel(0, z, w);
        assert!((k0 - (z * w.conj()).exp() / PI).norm() < 1e-15);
        for m in 0..5 {
            let kd = reproducing_kernel(m, z, z);
            assert!((kd - c(z.norm_sqr().exp() / PI, 0.0)).norm() < 1e-15);
        }
        assert_eq!(reproducing_kernel(1, c(1.0, 0.0), c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn kernel_is_hermitian_bitwise() {
        let pts = [c(0.1, 0.9), c(-1.3, 0.2), c(0.7, -0.7), c(1.5, 1.5)];
        for m in 0..5 {
            for &z in &pts {
                for &w in &pts {
                    assert_eq!(reproducing_kernel(m, w, z), reproducing_kernel(m, z, w).conj());
                }
            }
        }
    }

    #[test]
    fn kernel_vanishes_on_unit_circle_around_w() {
        let w = c(0.3, -0.6);
        for i in 0..8 {
            let z = w + Complex64::from_polar(1.0, i as f64 * PI / 4.0);
            assert!(reproducing_kernel(1, z, w).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_series_converges() {
        // Σ_{n<=200} Φₙᵐ(z) conj(Φₙᵐ(w)) / (π m! n!); defects are measured
        // against √(K(z,z) K(w,w)) since K itself vanishes on curves.
        let grid: Vec<f64> = (0..5).map(|i| -1.5 + 0.75 * i as f64).collect();
        for m in 0..=4 {
            for &zr in &grid {
                for &zi in &grid {
                    let z = c(zr, zi);
                    let w = c(zi * 0.5, -zr);
                    let mut sum = c(0.0, 0.0);
                    for n in 0..=200 {
                        sum += phi_normalized(m, n, 0.0, z) * phi_normalized(m, n, 0.0, w).conj();
                    }
                    let k = reproducing_kernel(m, z, w);
                    let scale = (0.5 * (z.norm_sqr() + w.norm_sqr())).exp() / PI;
                    assert!((sum - k).norm() < 1e-9 * scale, "m={m} z={z} w={w}");
                }
            }
        }
    }

    #[test]
    fn inner_product_examples() {
        let rule = polar_rule(64, 64).unwrap();
        let v = basis_inner_product(0, 0, 0, &rule).unwrap();
        assert!((v - c(PI, 0.0)).norm() < 1e-12);
        let v = basis_inner_product(2, 1, 3, &rule).unwrap();
        assert!(v.norm() < 1e-12);
        let v = basis_inner_product(2, 3, 3, &rule).unwrap();
        assert!((v - c(12.0 * PI, 0.0)).norm() < 1e-12 * 12.0 * PI);
        let v = basis_inner_product(1, 1, 1, &rule).unwrap();
        assert!((v - c(PI, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn inner_product_rejects_small_rules() {
        let small = polar_rule(2, 2).unwrap();
        let err = basis_inner_product(3, 4, 1, &small).unwrap_err();
        assert!(err.to_string().contains("radial order >= 4"), "{err}");
        assert!(err.to_string().contains("angular order >= 4"), "{err}");
        let line = crate::quad::gauss_hermite(8).unwrap();
        assert!(basis_inner_product(0, 0, 0, &line).is_err());
    }

    #[test]
    fn gram_matrix_is_diagonal() {
        let rule = polar_rule(64, 64).unwrap();
        for m in [0, 1, 2, 4] {
            let g = gram_matrix(m, 8, &rule).unwrap();
            for n in 0..=8 {
                let diag = PI * factorial(m) * factorial(n);
                for j in 0..=8 {
                    let want = if n == j { diag } else { 0.0 };
                    assert!((g[n][j] - c(want, 0.0)).norm() < 1e-10 * diag, "m={m} n={n} j={j}");
                }
            }
        }
    }
}

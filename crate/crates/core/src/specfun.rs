//! Special functions: generalized Laguerre and Hermite polynomials, the
//! harmonic-oscillator eigenfunctions and logarithmic factorials.
//!
//! Polynomials are evaluated by three-term recurrences in the degree. The
//! same code path serves real and complex arguments through [`Field`].

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar types the polynomial recurrences run over.
pub trait Field:
    Copy
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl Field for f64 {}
impl Field for Complex64 {}

/// Degree and superscript of a generalized Laguerre polynomial `L_n^(α)`.
///
/// Non-negative superscripts may be any finite real. Negative superscripts
/// are restricted to integers `-k` with `1 <= k <= degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyIndex {
    degree: usize,
    superscript: f64,
}

impl PolyIndex {
    pub fn new(degree: usize, superscript: f64) -> Result<Self> {
        let invalid = Error::InvalidIndex {
            degree,
            superscript,
        };
        if !superscript.is_finite() {
            return Err(invalid);
        }
        if superscript < 0.0 {
            let k = -superscript;
            if k.fract() != 0.0 || k < 1.0 || k > degree as f64 {
                return Err(invalid);
            }
        }
        Ok(Self {
            degree,
            superscript,
        })
    }

    /// Shorthand for integer superscripts, the common case.
    pub fn int(degree: usize, superscript: i64) -> Result<Self> {
        Self::new(degree, superscript as f64)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn superscript(&self) -> f64 {
        self.superscript
    }
}

/// `L_n^(α)(t)` for a validated index.
///
/// Negative superscripts `-k` go through the reduction
/// `L_m^(-k)(t) = (-t)^k (m-k)!/m! L_{m-k}^(k)(t)`.
pub fn laguerre<T: Field>(idx: PolyIndex, t: T) -> T {
    let n = idx.degree;
    let alpha = idx.superscript;
    if alpha < 0.0 {
        let k = (-alpha) as usize;
        // (m-k)!/m! as an exact-as-possible product of small integers
        let mut ratio = 1.0;
        for q in (n - k + 1)..=n {
            ratio /= q as f64;
        }
        let mut neg_t_pow = T::from(1.0);
        for _ in 0..k {
            neg_t_pow = neg_t_pow * (-t);
        }
        return neg_t_pow * T::from(ratio) * laguerre_recurrence(n - k, k as f64, t);
    }
    laguerre_recurrence(n, alpha, t)
}

/// Convenience wrapper that validates the index first.
pub fn laguerre_checked<T: Field>(degree: usize, superscript: f64, t: T) -> Result<T> {
    Ok(laguerre(PolyIndex::new(degree, superscript)?, t))
}

fn laguerre_recurrence<T: Field>(n: usize, alpha: f64, t: T) -> T {
    let mut prev = T::from(1.0);
    if n == 0 {
        return prev;
    }
    let mut cur = T::from(1.0 + alpha) - t;
    for k in 1..n {
        let kf = k as f64;
        let next = ((T::from(2.0 * kf + 1.0 + alpha) - t) * cur - T::from(kf + alpha) * prev)
            / T::from(kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_n(x)` via `H_{n+1} = 2x H_n - 2n H_{n-1}`.
pub fn hermite<T: Field>(n: usize, x: T) -> T {
    let mut prev = T::from(1.0);
    if n == 0 {
        return prev;
    }
    let two_x = T::from(2.0) * x;
    let mut cur = two_x;
    for k in 1..n {
        let next = two_x * cur - T::from(2.0 * k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

const RESCALE_ABOVE: f64 = 1e150;

/// Harmonic-oscillator eigenfunction `φ_n(x) = (√π 2ⁿ n!)^{-1/2} e^{-x²/2} H_n(x)`.
///
/// Runs the orthonormal recurrence on the polynomial part and carries a
/// separate log scale, so neither `2ⁿ n!` nor `e^{-x²/2}` is ever formed on
/// its own.
pub fn ho_eigenfunction(n: usize, x: f64) -> f64 {
    let (value, log_scale) = scaled_hermite_function(n, x, |_, _, _| {});
    value * (log_scale - 0.5 * x * x).exp()
}

/// `φ_0(x), …, φ_{n_max}(x)` in one recurrence pass.
pub fn ho_eigenfunctions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    let half_x2 = 0.5 * x * x;
    scaled_hermite_function(n_max, x, |k, v, ls| {
        out[k] = v * (ls - half_x2).exp();
    });
    out
}

/// Orthonormal Hermite recurrence `p_{k+1} = √(2/(k+1)) x p_k - √(k/(k+1)) p_{k-1}`
/// with `p_0 = π^{-1/4}`. Returns `(mantissa, log_scale)` of `p_n`; `visit` sees
/// every intermediate `(k, mantissa, log_scale)`.
fn scaled_hermite_function(
    n: usize,
    x: f64,
    mut visit: impl FnMut(usize, f64, f64),
) -> (f64, f64) {
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    visit(0, cur, log_scale);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            prev /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
        visit(k + 1, cur, log_scale);
    }
    (cur, log_scale)
}

const EXACT_TABLE_LEN: usize = 171;

fn log_factorial_table() -> &'static [f64; EXACT_TABLE_LEN] {
    static TABLE: OnceLock<[f64; EXACT_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; EXACT_TABLE_LEN];
        let mut fact = 1.0f64;
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            fact *= n as f64;
            *slot = fact.ln();
        }
        table
    })
}

/// `n!` as a running product; exact through `22!`, infinite past `170!`.
pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `ln(n!)`. Exact products up to 170!, Stirling's series beyond.
pub fn log_factorial(n: usize) -> f64 {
    if n < EXACT_TABLE_LEN {
        return log_factorial_table()[n];
    }
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Explicit sum with the gamma ratio written as a rising product, which
    /// stays finite for negative integer superscripts.
    fn laguerre_sum(n: usize, alpha: f64, t: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..=n {
            let mut rising = 1.0;
            for q in (k + 1)..=n {
                rising *= alpha + q as f64;
            }
            let mut denom = 1.0;
            for q in 1..=(n - k) {
                denom *= q as f64;
            }
            for q in 1..=k {
                denom *= q as f64;
            }
            total += rising * (-t).powi(k as i32) / denom;
        }
        total
    }

    fn hermite_sum(n: usize, x: f64) -> f64 {
        let fact = |k: usize| (1..=k).map(|q| q as f64).product::<f64>();
        (0..=n / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(n) / (fact(k) * fact(n - 2 * k)) * (2.0 * x).powi((n - 2 * k) as i32)
            })
            .sum()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn laguerre_examples() {
        let l0 = laguerre(PolyIndex::new(0, 0.7).unwrap(), 3.7);
        assert_eq!(l0, 1.0);
        assert_eq!(laguerre(PolyIndex::int(1, 0).unwrap(), 2.0), -1.0);
        let v = laguerre(PolyIndex::int(2, -1).unwrap(), 1.0);
        assert!((v + 0.5).abs() < 1e-15, "{v}");
        assert!((laguerre_sum(2, -1.0, 1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_superscript_validation() {
        assert!(PolyIndex::int(3, -4).is_err());
        assert!(PolyIndex::int(3, 0).is_ok());
        assert!(PolyIndex::int(0, -1).is_err());
        assert!(PolyIndex::new(3, -0.5).is_err());
        assert!(PolyIndex::new(3, f64::NAN).is_err());
        assert!(PolyIndex::int(3, -3).is_ok());
        assert!(laguerre_checked(2, -3.0, 1.0).is_err());
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for n in 0..=12 {
            for &alpha in &[0.0, 1.0, 2.5] {
                for i in 0..=40 {
                    let t = -5.0 + 0.25 * i as f64;
                    let rec = laguerre(PolyIndex::new(n, alpha).unwrap(), t);
                    let sum = laguerre_sum(n, alpha, t);
                    // the explicit sum cancels for t > 0: measure against its sum of |terms|,
                    // which for alpha >= 0 is L_n(-|t|)
                    let scale = laguerre_sum(n, alpha, -t.abs());
                    assert!((rec - sum).abs() <= 1e-11 * scale, "n={n} a={alpha} t={t}");
                }
            }
        }
    }

    #[test]
    fn negative_superscript_matches_sum_continuation() {
        for m in 1..=10 {
            for k in 1..=m {
                for i in 0..=20 {
                    let t = 0.1 + 0.445 * i as f64;
                    let got = laguerre(PolyIndex::int(m, -(k as i64)).unwrap(), t);
                    let want = laguerre_sum(m, -(k as f64), t);
                    let scale = want.abs().max(1.0);
                    assert!((got - want).abs() < 1e-9 * scale, "m={m} k={k} t={t}");
                }
            }
        }
    }

    #[test]
    fn complex_argument_agrees_with_real_on_axis() {
        let idx = PolyIndex::new(7, 1.5).unwrap();
        let r = laguerre(idx, 2.3);
        let c = laguerre(idx, Complex64::new(2.3, 0.0));
        assert_eq!(c.re, r);
        assert_eq!(c.im, 0.0);
        let h = hermite(5, Complex64::new(0.4, -1.1));
        // H_5(x) = 32x^5 - 160x^3 + 120x
        let z = Complex64::new(0.4, -1.1);
        let want = z.powu(5) * 32.0 - z.powu(3) * 160.0 + z * 120.0;
        assert!((h - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, 5.0), 1.0);
        assert_eq!(hermite(1, 1.5), 3.0);
        assert_eq!(hermite(3, 1.0), -4.0);
        assert_eq!(hermite_sum(3, 1.0), -4.0);
        for n in 0..=12 {
            for i in 0..=12 {
                let x = -3.0 + 0.5 * i as f64;
                assert!(rel(hermite(n, x), hermite_sum(n, x)) < 1e-13 || hermite(n, x).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eigenfunction_examples() {
        let pi_quarter = std::f64::consts::PI.powf(-0.25);
        assert!((ho_eigenfunction(0, 0.0) - pi_quarter).abs() < 1e-16);
        assert_eq!(ho_eigenfunction(1, 0.0), 0.0);
        // direct formula for small n
        for n in 0..=10 {
            for i in 0..=16 {
                let x = -4.0 + 0.5 * i as f64;
                let fact: f64 = (1..=n).map(|q| q as f64).product();
                let direct = (std::f64::consts::PI.sqrt() * 2f64.powi(n as i32) * fact).powf(-0.5)
                    * (-0.5 * x * x).exp()
                    * hermite(n, x);
                assert!((ho_eigenfunction(n, x) - direct).abs() < 1e-14, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn eigenfunctions_finite_for_high_degree() {
        for &x in &[-30.0, -12.5, 0.0, 7.25, 30.0] {
            let all = ho_eigenfunctions(500, x);
            assert!(all.iter().all(|v| v.is_finite() && v.abs() < 1.0));
            assert_eq!(all[500], ho_eigenfunction(500, x));
            assert_eq!(all[137], ho_eigenfunction(137, x));
        }
        // near the turning point of n = 500 the value is O(n^{-1/12})
        assert!(ho_eigenfunction(500, 31.0).abs() > 1e-3);
    }

    #[test]
    fn log_factorial_examples() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        let exact20 = (2432902008176640000u64 as f64).ln();
        assert!(rel(log_factorial(20), exact20) < 1e-15);
        // integer factorials are exact in u128 up to 34!
        let mut f: u128 = 1;
        for n in 1..=34u128 {
            f *= n;
            assert!(rel(log_factorial(n as usize), (f as f64).ln()) < 1e-13);
        }
    }

    #[test]
    fn stirling_branch_continuous() {
        // ln(171!) = ln(170!) + ln(171)
        let a = log_factorial(170) + 171f64.ln();
        assert!(rel(log_factorial(171), a) < 1e-14);
        let mut acc = log_factorial(170);
        for n in 171..=600 {
            acc += (n as f64).ln();
            assert!(rel(log_factorial(n), acc) < 1e-13, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn reduction_identity_holds(m in 1usize..=10, k_frac in 0.0f64..1.0, t in 0.1f64..9.0) {
            let k = 1 + ((m - 1) as f64 * k_frac).round() as usize;
            let lhs = laguerre(PolyIndex::int(m, -(k as i64)).unwrap(), t);
            let fact = |q: usize| (1..=q).map(|v| v as f64).product::<f64>();
            let direct = laguerre(PolyIndex::int(m - k, k as i64).unwrap(), t);
            let rhs = (-t).powi(k as i32) * fact(m - k) / fact(m) * direct;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }

        #[test]
        fn hermite_parity(n in 0usize..40, x in -5.0f64..5.0) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(ho_eigenfunction(n, -x), sign * ho_eigenfunction(n, x));
        }
    }
}

//! A small binary floating-point type on top of `BigInt` for oracle sums
//! whose terms cancel far beyond double precision.

use std::cmp::Ordering;

use num_bigint::BigInt;

/// Mantissa bits kept after every operation.
const PRECISION: u64 = 384;

/// `mant · 2^exp`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wide {
    mant: BigInt,
    exp: i64,
}

impl Wide {
    pub fn zero() -> Self {
        Self {
            mant: BigInt::from(0),
            exp: 0,
        }
    }

    /// Exact conversion: every finite double is a dyadic rational.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "Wide::from_f64 needs a finite value");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let mant = if x < 0.0 { -BigInt::from(m) } else { BigInt::from(m) };
        Self { mant, exp: e }
    }

    pub fn from_i64(k: i64) -> Self {
        Self {
            mant: BigInt::from(k),
            exp: 0,
        }
        .normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.bits() == 0
    }

    /// `floor(log2 |x|) + 1`, or `i64::MIN` for zero.
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mant.bits() as i64
        }
    }

    fn normalized(mut self) -> Self {
        let bits = self.mant.bits();
        if bits > PRECISION {
            let shift = bits - PRECISION;
            self.mant >>= shift;
            self.exp += shift as i64;
        }
        self
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
        .normalized()
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        Self {
            mant: &self.mant * k,
            exp: self.exp,
        }
        .normalized()
    }

    /// Division by a positive integer, rounded toward negative infinity.
    pub fn div_u64(&self, k: u64) -> Self {
        assert!(k > 0);
        Self {
            mant: (&self.mant << PRECISION) / BigInt::from(k),
            exp: self.exp - PRECISION as i64,
        }
        .normalized()
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let gap = PRECISION as i64 + 64;
        if self.magnitude() > other.magnitude() + gap {
            return self.clone();
        }
        if other.magnitude() > self.magnitude() + gap {
            return other.clone();
        }
        let (hi, lo) = match self.exp.cmp(&other.exp) {
            Ordering::Less => (other, self),
            _ => (self, other),
        };
        let shift = (hi.exp - lo.exp) as u64;
        Self {
            mant: (&hi.mant << shift) + &lo.mant,
            exp: lo.exp,
        }
        .normalized()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (top, exp) = if bits > 62 {
            let shift = bits - 62;
            (&self.mant >> shift, self.exp + shift as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let top = i64::try_from(&top).expect("62-bit mantissa fits in i64");
        // split the scaling so that neither factor under- or overflows early
        let half = exp / 2;
        top as f64 * 2f64.powi(half as i32) * 2f64.powi((exp - half) as i32)
    }
}

/// `π^{-1/2} Σₙ (τ/2)ⁿ Hₙ(x) Hₙ(y) / n!` summed in [`Wide`] arithmetic until
/// sixteen consecutive terms fall 70 bits below the running sum. The
/// `π^{-1/2}` factor is applied in double precision at the end.
pub fn mehler_series_precise(tau: f64, x: f64, y: f64) -> f64 {
    let tau_w = Wide::from_f64(tau);
    let two_x = Wide::from_f64(x).mul_i64(2);
    let two_y = Wide::from_f64(y).mul_i64(2);
    let (mut hx_prev, mut hx) = (Wide::from_i64(1), two_x.clone());
    let (mut hy_prev, mut hy) = (Wide::from_i64(1), two_y.clone());
    // coefficient (τ/2)ⁿ / n!
    let mut coef = tau_w.div_u64(2);
    let mut sum = Wide::from_i64(1).add(&coef.mul(&hx).mul(&hy));
    let mut quiet = 0;
    let mut n: u64 = 1;
    while n < 20_000 {
        let hx_next = two_x.mul(&hx).add(&hx_prev.mul_i64(-2 * n as i64));
        let hy_next = two_y.mul(&hy).add(&hy_prev.mul_i64(-2 * n as i64));
        n += 1;
        coef = coef.mul(&tau_w).div_u64(2 * n);
        let term = coef.mul(&hx_next).mul(&hy_next);
        sum = sum.add(&term);
        (hx_prev, hx, hy_prev, hy) = (hx, hx_next, hy, hy_next);
        if n > 50 && term.magnitude() < sum.magnitude() - 70 {
            quiet += 1;
            if quiet >= 16 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    sum.to_f64() / std::f64::consts::PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_doubles() {
        for &x in &[1.0, -0.1, 3.5e-300, 1.7e300, 5e-324, 123456.789] {
            assert_eq!(Wide::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn arithmetic_is_exact_where_it_should_be() {
        let a = Wide::from_f64(0.1);
        let b = Wide::from_f64(0.2);
        // the exact sum is a rounding tie; conversion rounds to even like the hardware add
        assert_eq!(a.add(&b).to_f64(), 0.1f64 + 0.2f64);
        let third = Wide::from_i64(1).div_u64(3);
        assert!(third.mul_i64(3).add(&Wide::from_i64(-1)).magnitude() < -370);
        assert_eq!(Wide::from_i64(7).div_u64(7).to_f64(), 1.0);
        // 1e100 + 1 needs about 333 bits, within the working precision
        let big = Wide::from_f64(1e100);
        assert_eq!(big.add(&big.mul_i64(-1)).to_f64(), 0.0);
        assert_eq!(big.add(&Wide::from_f64(1.0)).add(&big.mul_i64(-1)).to_f64(), 1.0);
    }

    #[test]
    fn mehler_series_at_origin() {
        // Σ (τ/2)^{2k} H_{2k}(0)² / (2k)! = (1 - τ²)^{-1/2}
        let tau = 0.6;
        let v = mehler_series_precise(tau, 0.0, 0.0);
        let want = 1.0 / (std::f64::consts::PI * (1.0 - tau * tau)).sqrt();
        assert!((v - want).abs() < 1e-15);
    }
}

//! Exact integer arithmetic on binary floating-point inputs.
//!
//! Grid indices are computed as `floor(x / cell)` without rounding: both
//! operands are decomposed into `mantissa * 2^exponent` and divided as
//! integers. This keeps box membership stable even for cells far below
//! the float resolution of the coordinates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::float::FloatCore;
use num_traits::{One, Signed, Zero};

/// `(signed mantissa, exponent)` with `value = mantissa * 2^exponent`.
pub fn decompose(x: f64) -> (i64, i32) {
    let (m, e, s) = FloatCore::integer_decode(x);
    (s as i64 * m as i64, e as i32)
}

/// Exact rational value of a finite float.
pub fn rational(x: f64) -> BigRational {
    let (m, e) = decompose(x);
    let m = BigInt::from(m);
    if e >= 0 {
        BigRational::from_integer(m << e as usize)
    } else {
        BigRational::new(m, BigInt::one() << (-e) as usize)
    }
}

/// `floor(x / cell)` for finite `x` and positive finite `cell`, when it fits in an `i64`.
pub fn floor_div(x: f64, cell: f64) -> Option<i64> {
    let (mx, ex) = decompose(x);
    let (mc, ec) = decompose(cell);
    if mx == 0 {
        return Some(0);
    }
    let k = ex - ec;
    if k > 70 {
        return None;
    }
    if k < -70 {
        return Some(if mx < 0 { -1 } else { 0 });
    }
    let (num, den) = if k >= 0 {
        ((mx as i128) << k, mc as i128)
    } else {
        (mx as i128, (mc as i128) << (-k))
    };
    i64::try_from(Integer::div_floor(&num, &den)).ok()
}

/// `floor(x * 2^shift / cell)` as an unbounded integer.
pub fn floor_div_scaled(x: f64, cell: f64, shift: i32) -> BigInt {
    let (mx, ex) = decompose(x);
    let (mc, ec) = decompose(cell);
    let k = ex - ec + shift;
    let mut num = BigInt::from(mx);
    let mut den = BigInt::from(mc);
    if k >= 0 {
        num <<= k as usize;
    } else {
        den <<= (-k) as usize;
    }
    num.div_floor(&den)
}

/// Floor of a rational number.
pub fn floor_rational(q: &BigRational) -> BigInt {
    q.numer().div_floor(q.denom())
}

/// Smallest power of two strictly greater than `x` (x ≥ 0).
pub fn next_pow2_above(x: &BigRational) -> BigInt {
    let mut p = BigInt::one();
    let xb = if x.is_negative() { BigRational::zero() } else { x.clone() };
    while BigRational::from_integer(p.clone()) <= xb {
        p <<= 1;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_div_matches_rational_floor() {
        let cases = [(0.3, 0.1), (-0.01, 1.0), (5.0, 2.5), (1e-300, 1e-310), (-7.25, 0.5)];
        for (x, c) in cases {
            let exact = floor_rational(&(rational(x) / rational(c)));
            assert_eq!(BigInt::from(floor_div(x, c).unwrap()), exact, "{x} / {c}");
            assert_eq!(floor_div_scaled(x, c, 0), exact);
        }
    }

    #[test]
    fn scaled_division_doubles_index() {
        let x = 0.7371;
        let c = 0.1;
        let base = floor_div_scaled(x, c, 0);
        let fine = floor_div_scaled(x, c, 1);
        assert!(fine == &base * 2 || fine == &base * 2 + 1);
        let deep = floor_div_scaled(x, c, 80);
        assert_eq!(deep >> 80usize, base);
    }

    #[test]
    fn next_pow2_is_strict() {
        assert_eq!(next_pow2_above(&BigRational::from_integer(4.into())), BigInt::from(8));
        assert_eq!(next_pow2_above(&BigRational::new(5.into(), 2.into())), BigInt::from(4));
        assert_eq!(next_pow2_above(&BigRational::zero()), BigInt::from(1));
    }
}

//! Scalar types and tolerance-based comparison.
//!
//! All numeric evaluation of S-matrix entries, Dehn twists and recursion
//! coefficients happens in `Scalar` (complex double precision). Quantities
//! that are exact by nature (conformal weights, central charge,
//! psi-intersection numbers, Hurwitz series) are kept in `Rational`.
//! Comparisons never use exact equality on `Scalar`; every comparing
//! operation takes an explicit [`Tolerance`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Scalar = num_complex::Complex64;
pub type Rational = BigRational;

/// Relative/absolute comparison thresholds. The default is 1e-9 relative
/// with a 1e-12 absolute floor near zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    /// |a - b| <= abs + rel * max(|a|, |b|).
    pub fn eq(&self, a: Scalar, b: Scalar) -> bool {
        (a - b).norm() <= self.abs + self.rel * a.norm().max(b.norm())
    }

    pub fn is_zero(&self, a: Scalar) -> bool {
        a.norm() <= self.abs
    }

    /// Deviation of `a` from `b` normalized the same way `eq` tests it.
    pub fn deviation(&self, a: Scalar, b: Scalar) -> f64 {
        (a - b).norm() / (1.0 + a.norm().max(b.norm()))
    }
}

/// Rounding tolerance for fusion and Verlinde sums, which accumulate K terms
/// of cancellations and are therefore given more slack than [`Tolerance`].
pub const INTEGER_TOL: f64 = 1e-6;

/// Round a scalar that is known to be a non-negative integer.
/// Returns `None` when `x` is farther than `tol` from any such integer.
pub fn round_nonneg_integer(x: Scalar, tol: f64) -> Option<u64> {
    if x.im.abs() > tol {
        return None;
    }
    let r = x.re.round();
    if (x.re - r).abs() > tol || r < 0.0 {
        return None;
    }
    Some(r as u64)
}

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

pub fn rat_to_scalar(r: &Rational) -> Scalar {
    Scalar::new(rat_to_f64(r), 0.0)
}

/// n! as an exact rational.
pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= k;
    }
    BigRational::from_integer(acc)
}

/// Odd double factorial (2d+1)!! = 1·3·5···(2d+1) as an exact rational;
/// by convention (-1)!! = 1, so `double_factorial_odd(-1)` is valid.
pub fn double_factorial_odd(m: i64) -> Rational {
    assert!(m >= -1 && m % 2 != 0, "expected odd m >= -1, got {m}");
    let mut acc = BigInt::one();
    let mut k = 1i64;
    while k <= m {
        acc *= k;
        k += 2;
    }
    BigRational::from_integer(acc)
}

/// Binomial coefficient C(n, k) as an exact rational.
pub fn binomial(n: u32, k: u32) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let mut acc = Rational::one();
    for j in 0..k {
        acc *= rat_int((n - j) as i64) / rat_int((j + 1) as i64);
    }
    acc
}

/// Parse "p/q" or "p" into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(p))
        }
    }
}

/// Render a rational as "p/q" (or "p" for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else if r.denom().is_negative() {
        let neg = -r;
        format!("-{}/{}", neg.numer(), neg.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_eq_scales() {
        let tol = Tolerance::default();
        assert!(tol.eq(Scalar::new(1.0, 0.0), Scalar::new(1.0 + 1e-10, 0.0)));
        assert!(!tol.eq(Scalar::new(1.0, 0.0), Scalar::new(1.0 + 1e-6, 0.0)));
        assert!(tol.eq(Scalar::new(0.0, 0.0), Scalar::new(1e-13, 0.0)));
    }

    #[test]
    fn integer_rounding() {
        assert_eq!(round_nonneg_integer(Scalar::new(4.0 + 2e-7, -1e-7), INTEGER_TOL), Some(4));
        assert_eq!(round_nonneg_integer(Scalar::new(4.5, 0.0), INTEGER_TOL), None);
        assert_eq!(round_nonneg_integer(Scalar::new(-1.0, 0.0), INTEGER_TOL), None);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(5), rat_int(120));
        assert_eq!(double_factorial_odd(7), rat_int(105));
        assert_eq!(double_factorial_odd(-1), rat_int(1));
        assert_eq!(binomial(6, 2), rat_int(15));
    }

    #[test]
    fn rational_io_round_trip() {
        let r = parse_rational("-3/16").unwrap();
        assert_eq!(r, rat(-3, 16));
        assert_eq!(format_rational(&r), "-3/16");
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert!(parse_rational("1/0").is_none());
    }
}

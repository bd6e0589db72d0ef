//! Truncated one-variable Laurent series.
//!
//! A series holds coefficients for degrees `min_degree ..= trunc_order`.
//! Degrees below `min_degree` read as exact zero; degrees above
//! `trunc_order` are *unknown*, not zero, and reading them is an error.
//! Sums and products propagate `trunc_order` pessimistically, so precision
//! loss is always explicit: if a computation needs a coefficient past the
//! truncation it fails with [`SeriesError::InsufficientTruncation`] instead
//! of silently returning garbage.
//!
//! The special series required by the spectral curves live here as well:
//! [`b_kernel_series`] expands `h·B(h^{1/2}δ)` with
//! `B(ζ) = cosh(ζ)/ζ² − sinh(ζ)/ζ`, and [`xi_series`] expands
//! `Γ[2d+2; h^{1/2}ζ] / (2^d d! ζ^{2d+2})` using the closed form of the
//! incomplete Gamma function at positive integers.

use crate::scalar::{double_factorial_odd, rat_to_scalar, Rational, Scalar};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("leading coefficient at degree {0} is below tolerance, cannot invert")]
    LeadingZero(i64),
    #[error("nonzero 1/zeta coefficient, term-by-term primitive does not exist")]
    NonIntegrableTerm,
    #[error("coefficient of degree {needed} requested but series is only known to degree {trunc}")]
    InsufficientTruncation { needed: i64, trunc: i64 },
    #[error("incompatible truncation windows")]
    EmptyWindow,
}

/// Coefficient ring for series arithmetic: complex doubles or exact rationals.
pub trait Coeff:
    Clone
    + PartialEq
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::fmt::Debug
{
    fn approx_zero(&self, tol: f64) -> bool;
    fn invert(&self) -> Self;
    fn from_rational(r: &Rational) -> Self;
}

impl Coeff for Scalar {
    fn approx_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn invert(&self) -> Self {
        1.0 / self
    }
    fn from_rational(r: &Rational) -> Self {
        rat_to_scalar(r)
    }
}

impl Coeff for Rational {
    fn approx_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn invert(&self) -> Self {
        Rational::one() / self
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

/// Truncated Laurent series `sum_{d=min_degree}^{trunc_order} c_d ζ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<C: Coeff = Scalar> {
    min_degree: i64,
    trunc_order: i64,
    coeffs: Vec<C>,
}

impl<C: Coeff> LaurentSeries<C> {
    /// Series with the given coefficients starting at `min_degree`.
    /// `trunc_order` is implied by the coefficient count.
    pub fn new(min_degree: i64, coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient slot");
        let trunc_order = min_degree + coeffs.len() as i64 - 1;
        LaurentSeries { min_degree, trunc_order, coeffs }
    }

    /// The zero series known up to `trunc_order`.
    pub fn zero_to(trunc_order: i64) -> Self {
        LaurentSeries { min_degree: 0, trunc_order, coeffs: vec![C::zero(); (trunc_order + 1).max(1) as usize] }
    }

    /// The zero series on the window `min_degree ..= trunc_order`.
    pub fn zero_window(min_degree: i64, trunc_order: i64) -> Self {
        assert!(trunc_order >= min_degree);
        LaurentSeries { min_degree, trunc_order, coeffs: vec![C::zero(); (trunc_order - min_degree + 1) as usize] }
    }

    /// `c · ζ^degree`, known up to `trunc_order`.
    pub fn monomial(degree: i64, c: C, trunc_order: i64) -> Self {
        assert!(degree <= trunc_order);
        let mut coeffs = vec![C::zero(); (trunc_order - degree + 1) as usize];
        coeffs[0] = c;
        LaurentSeries { min_degree: degree, trunc_order, coeffs }
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    pub fn trunc_order(&self) -> i64 {
        self.trunc_order
    }

    /// Coefficient of `ζ^d`. Degrees below `min_degree` are exact zeros,
    /// degrees above `trunc_order` are unknown and error out.
    pub fn coeff(&self, d: i64) -> Result<C, SeriesError> {
        if d > self.trunc_order {
            return Err(SeriesError::InsufficientTruncation { needed: d, trunc: self.trunc_order });
        }
        if d < self.min_degree {
            return Ok(C::zero());
        }
        Ok(self.coeffs[(d - self.min_degree) as usize].clone())
    }

    pub fn set_coeff(&mut self, d: i64, c: C) {
        assert!(d >= self.min_degree && d <= self.trunc_order, "degree {d} outside window");
        self.coeffs[(d - self.min_degree) as usize] = c;
    }

    /// Nonzero terms `(degree, coefficient)` in increasing degree.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        let m = self.min_degree;
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (m + i as i64, c))
    }

    /// Degree of the first coefficient with modulus above `tol`, if any.
    pub fn leading_degree(&self, tol: f64) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.approx_zero(tol)).map(|i| self.min_degree + i as i64)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.leading_degree(tol).is_none()
    }

    /// Restrict the window to `..= new_trunc` (must not extend it).
    pub fn truncate(&self, new_trunc: i64) -> Self {
        assert!(new_trunc <= self.trunc_order);
        if new_trunc < self.min_degree {
            let mut s = Self::zero_to(0);
            s.min_degree = new_trunc;
            s.trunc_order = new_trunc;
            s.coeffs = vec![C::zero()];
            return s;
        }
        LaurentSeries {
            min_degree: self.min_degree,
            trunc_order: new_trunc,
            coeffs: self.coeffs[..(new_trunc - self.min_degree + 1) as usize].to_vec(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc_order.min(other.trunc_order);
        let min = self.min_degree.min(other.min_degree);
        let mut coeffs = vec![C::zero(); (trunc - min + 1).max(1) as usize];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let d = min + i as i64;
            let a = if d >= self.min_degree && d <= self.trunc_order { self.coeffs[(d - self.min_degree) as usize].clone() } else { C::zero() };
            let b = if d >= other.min_degree && d <= other.trunc_order { other.coeffs[(d - other.min_degree) as usize].clone() } else { C::zero() };
            *c = a + b;
        }
        LaurentSeries { min_degree: min, trunc_order: trunc, coeffs }
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            min_degree: self.min_degree,
            trunc_order: self.trunc_order,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        LaurentSeries {
            min_degree: self.min_degree,
            trunc_order: self.trunc_order,
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    /// Multiply by `ζ^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            min_degree: self.min_degree + k,
            trunc_order: self.trunc_order + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Substitute `ζ -> -ζ`.
    pub fn compose_neg(&self) -> Self {
        LaurentSeries {
            min_degree: self.min_degree,
            trunc_order: self.trunc_order,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if (self.min_degree + i as i64).rem_euclid(2) == 1 { -c.clone() } else { c.clone() }
                })
                .collect(),
        }
    }

    /// Even-degree part of the coefficient function.
    pub fn even_part(&self) -> Self {
        let mut s = self.clone();
        for (i, c) in s.coeffs.iter_mut().enumerate() {
            if (s.min_degree + i as i64).rem_euclid(2) == 1 {
                *c = C::zero();
            }
        }
        s
    }

    /// Product with pessimistic truncation: the result is valid up to
    /// `min(a.min + b.trunc, b.min + a.trunc)`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let min = self.min_degree + other.min_degree;
        let trunc = (self.min_degree + other.trunc_order).min(other.min_degree + self.trunc_order);
        if trunc < min {
            return Err(SeriesError::EmptyWindow);
        }
        let mut coeffs = vec![C::zero(); (trunc - min + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let da = self.min_degree + i as i64;
            for (j, b) in other.coeffs.iter().enumerate() {
                let d = da + other.min_degree + j as i64;
                if d > trunc {
                    break;
                }
                coeffs[(d - min) as usize] = coeffs[(d - min) as usize].clone() + a.clone() * b.clone();
            }
        }
        Ok(LaurentSeries { min_degree: min, trunc_order: trunc, coeffs })
    }

    /// Multiplicative inverse: requires the leading coefficient to be nonzero
    /// (above `tol`). The result satisfies `self * result = 1 + O(ζ^k)` with
    /// `k` as far as the truncation allows, and has `min_degree = -lead`.
    pub fn invert(&self, tol: f64) -> Result<Self, SeriesError> {
        let lead = self.leading_degree(tol).ok_or(SeriesError::LeadingZero(self.min_degree))?;
        if lead != self.min_degree && self.coeffs[..(lead - self.min_degree) as usize].iter().any(|c| !c.is_zero()) {
            // Sub-tolerance noise below the leading term would poison the
            // inverse; drop it.
        }
        let order = (self.trunc_order - lead) as usize;
        let a0 = self.coeffs[(lead - self.min_degree) as usize].clone();
        let a0_inv = a0.invert();
        // inverse of 1 + sum_{k>=1} (a_k/a_0) ζ^k by recurrence
        let mut inv = vec![C::zero(); order + 1];
        inv[0] = C::one();
        for n in 1..=order {
            let mut acc = C::zero();
            for k in 1..=n {
                let ak = self
                    .coeff(lead + k as i64)
                    .expect("within window")
                    * a0_inv.clone();
                acc = acc + ak * inv[n - k].clone();
            }
            inv[n] = -acc;
        }
        let coeffs = inv.into_iter().map(|c| c * a0_inv.clone()).collect();
        Ok(LaurentSeries { min_degree: -lead, trunc_order: -lead + order as i64, coeffs })
    }

    /// Coefficient of `ζ^{-1}`, i.e. the residue of `self · dζ`.
    /// Zero when the window excludes degree -1 from below; an error when the
    /// truncation window ends before degree -1.
    pub fn residue_coeff(&self) -> Result<C, SeriesError> {
        self.coeff(-1)
    }

    /// Term-by-term antiderivative with zero constant of integration.
    /// Fails when a `ζ^{-1}` coefficient is present above `tol`.
    pub fn primitive(&self, tol: f64) -> Result<Self, SeriesError> {
        if let Ok(c) = self.coeff(-1) {
            if !c.approx_zero(tol) {
                return Err(SeriesError::NonIntegrableTerm);
            }
        }
        let min = self.min_degree + 1;
        let trunc = self.trunc_order + 1;
        let mut coeffs = vec![C::zero(); (trunc - min + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = self.min_degree + i as i64;
            if d == -1 {
                continue;
            }
            let inv = C::from_rational(&crate::scalar::rat_int(d + 1)).invert();
            coeffs[(d + 1 - min) as usize] = c.clone() * inv;
        }
        LaurentSeries { min_degree: min, trunc_order: trunc, coeffs }.normalized_zero_if_needed()
    }

    fn normalized_zero_if_needed(self) -> Result<Self, SeriesError> {
        Ok(self)
    }

    /// Term-by-term derivative.
    pub fn derivative(&self) -> Self {
        let min = self.min_degree - 1;
        let trunc = self.trunc_order - 1;
        let mut coeffs = vec![C::zero(); (trunc - min + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = self.min_degree + i as i64;
            coeffs[(d - 1 - min) as usize] = c.clone() * C::from_rational(&crate::scalar::rat_int(d));
        }
        LaurentSeries { min_degree: min, trunc_order: trunc, coeffs }
    }
}

impl LaurentSeries<Scalar> {
    /// Evaluate at a point inside the disk of validity (testing aid).
    pub fn eval(&self, z: Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for (d, c) in self.terms() {
            acc += c * z.powi(d as i32);
        }
        acc
    }
}

/// `exp(a·ζ)` truncated at `order`.
pub fn exp_series(a: Scalar, order: i64) -> LaurentSeries<Scalar> {
    assert!(order >= 0);
    let mut coeffs = Vec::with_capacity(order as usize + 1);
    let mut c = Scalar::one();
    coeffs.push(c);
    for k in 1..=order {
        c = c * a / (k as f64);
        coeffs.push(c);
    }
    LaurentSeries::new(0, coeffs)
}

/// Expansion of `h·B(h^{1/2}δ)` with `B(ζ) = cosh(ζ)/ζ² − sinh(ζ)/ζ`, in the
/// variable `δ`. Only integer powers of `h` occur:
///
/// `δ^{-2} − h/2 − h²δ²/8 − h³δ⁴/144 − ...`,
/// the coefficient of `δ^{2m}` being `−(2m+1)/(2m+2)! · h^{m+1}`.
pub fn b_kernel_series(h: Scalar, order: i64) -> LaurentSeries<Scalar> {
    assert!(order >= 0);
    let mut s = LaurentSeries::monomial(-2, Scalar::one(), order);
    if h == Scalar::zero() {
        return s;
    }
    let mut hpow = h;
    let mut m: i64 = 0;
    while 2 * m <= order {
        let num = rat_to_scalar(&crate::scalar::rat_int(2 * m + 1));
        let den = rat_to_scalar(&crate::scalar::factorial(2 * m as u32 + 2));
        s.set_coeff(2 * m, -num / den * hpow);
        hpow *= h;
        m += 1;
    }
    s
}

/// Expansion of `Γ[2d+2; h^{1/2}ζ] / (2^d d! ζ^{2d+2})` where `Γ[n; x]` is the
/// upper incomplete Gamma function, via the closed form
/// `Γ[n; x] = (n−1)! e^{−x} Σ_{k<n} x^k/k!`. The principal part is exactly
/// `(2d+1)!! ζ^{-(2d+2)}`; the tail is a power series in `h^{1/2}ζ`
/// (principal square root of `h`).
pub fn xi_series(d: u32, h: Scalar, order: i64) -> LaurentSeries<Scalar> {
    let pole = 2 * d as i64 + 2;
    assert!(order >= -pole);
    let dfac = rat_to_scalar(&double_factorial_odd(2 * d as i64 + 1));
    if h == Scalar::zero() {
        return LaurentSeries::monomial(-pole, dfac, order);
    }
    let sq = h.sqrt();
    let inner = order + pole;
    // e^{-x} Σ_{k<=2d+1} x^k/k!  with x = h^{1/2} ζ
    let e = exp_series(-sq, inner);
    let mut part = LaurentSeries::zero_to(inner);
    let mut c = Scalar::one();
    for k in 0..=(2 * d as i64 + 1).min(inner) {
        if k > 0 {
            c = c * sq / (k as f64);
        }
        part.set_coeff(k, c);
    }
    let prod = e.mul(&part).expect("compatible windows");
    prod.scale(&dfac).shift(-pole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64) -> Scalar {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn invert_geometric() {
        // 1 + ζ  ->  1 - ζ + ζ² - ζ³ + ...
        let s = LaurentSeries::new(0, vec![c(1.0), c(1.0), c(0.0), c(0.0), c(0.0)]);
        let inv = s.invert(1e-12).unwrap();
        for d in 0..=4 {
            assert!((inv.coeff(d).unwrap() - c(if d % 2 == 0 { 1.0 } else { -1.0 })).norm() < 1e-14);
        }
    }

    #[test]
    fn invert_monomial() {
        let s = LaurentSeries::monomial(2, c(2.0), 6);
        let inv = s.invert(1e-12).unwrap();
        assert_eq!(inv.min_degree(), -2);
        assert!((inv.coeff(-2).unwrap() - c(0.5)).norm() < 1e-15);
        assert!(inv.terms().count() == 1);
    }

    #[test]
    fn invert_multiply_back() {
        // ζ²(1 + ζ²/6): check s · s^{-1} = 1 to the available order.
        let mut s = LaurentSeries::zero_to(8).shift(2);
        s.set_coeff(2, c(1.0));
        s.set_coeff(4, c(1.0 / 6.0));
        let inv = s.invert(1e-12).unwrap();
        assert!((inv.coeff(-2).unwrap() - c(1.0)).norm() < 1e-15);
        assert!((inv.coeff(0).unwrap() - c(-1.0 / 6.0)).norm() < 1e-15);
        assert!((inv.coeff(2).unwrap() - c(1.0 / 36.0)).norm() < 1e-15);
        let prod = s.mul(&inv).unwrap();
        for d in prod.min_degree()..=prod.trunc_order() {
            let expect = if d == 0 { 1.0 } else { 0.0 };
            assert!((prod.coeff(d).unwrap() - c(expect)).norm() < 1e-13, "degree {d}");
        }
    }

    #[test]
    fn invert_rejects_zero_lead() {
        let s: LaurentSeries<Scalar> = LaurentSeries::zero_to(3);
        assert!(matches!(s.invert(1e-12), Err(SeriesError::LeadingZero(_))));
    }

    #[test]
    fn residue_reads_minus_one() {
        let mut s = LaurentSeries::zero_window(-3, 2);
        s.set_coeff(-3, c(1.0));
        s.set_coeff(-1, c(5.0));
        s.set_coeff(0, c(2.0));
        assert_eq!(s.residue_coeff().unwrap(), c(5.0));
        let t = LaurentSeries::monomial(-1, c(1.0), 0);
        assert_eq!(t.residue_coeff().unwrap(), c(1.0));
        // no ζ^{-1} inside the window -> exact 0
        let u = LaurentSeries::monomial(0, c(1.0), 3);
        assert_eq!(u.residue_coeff().unwrap(), c(0.0));
    }

    #[test]
    fn residue_beyond_truncation_errors() {
        let s = LaurentSeries::monomial(-4, c(1.0), -3);
        assert!(matches!(s.residue_coeff(), Err(SeriesError::InsufficientTruncation { .. })));
    }

    #[test]
    fn primitive_examples() {
        let s = LaurentSeries::monomial(1, c(1.0), 4);
        let p = s.primitive(1e-12).unwrap();
        assert!((p.coeff(2).unwrap() - c(0.5)).norm() < 1e-15);

        let s = LaurentSeries::monomial(-2, c(1.0), 2);
        let p = s.primitive(1e-12).unwrap();
        assert!((p.coeff(-1).unwrap() - c(-1.0)).norm() < 1e-15);

        let mut s = LaurentSeries::zero_to(3);
        s.set_coeff(0, c(1.0));
        s.set_coeff(2, c(3.0));
        let p = s.primitive(1e-12).unwrap();
        assert!((p.coeff(1).unwrap() - c(1.0)).norm() < 1e-15);
        assert!((p.coeff(3).unwrap() - c(1.0)).norm() < 1e-15);

        let bad = LaurentSeries::monomial(-1, c(1.0), 2);
        assert!(matches!(bad.primitive(1e-12), Err(SeriesError::NonIntegrableTerm)));
    }

    #[test]
    fn residue_integration_by_parts() {
        // Res(f·g') = -Res(f'·g) for Laurent polynomials.
        let f = LaurentSeries::new(-2, vec![c(1.5), c(-2.0), c(0.25), c(3.0), c(1.0), c(0.5), c(0.0)]);
        let g = LaurentSeries::new(-3, vec![c(2.0), c(0.0), c(-1.0), c(4.0), c(-0.5), c(1.0), c(2.0), c(0.0)]);
        let lhs = f.mul(&g.derivative()).unwrap().residue_coeff().unwrap();
        let rhs = f.derivative().mul(&g).unwrap().residue_coeff().unwrap();
        assert!((lhs + rhs).norm() < 1e-12);
    }

    #[test]
    fn b_kernel_expansion() {
        // h = 0 degenerates to the bare double pole
        let s = b_kernel_series(Scalar::zero(), 6);
        assert_eq!(s.terms().count(), 1);
        assert!((s.coeff(-2).unwrap() - c(1.0)).norm() < 1e-15);

        let s = b_kernel_series(c(1.0), 6);
        assert!((s.coeff(-2).unwrap() - c(1.0)).norm() < 1e-15);
        assert!((s.coeff(0).unwrap() - c(-0.5)).norm() < 1e-15);
        assert!((s.coeff(2).unwrap() - c(-1.0 / 8.0)).norm() < 1e-15);
        assert!((s.coeff(4).unwrap() - c(-1.0 / 144.0)).norm() < 1e-15);
        for d in [-1i64, 1, 3] {
            assert!(s.coeff(d).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn b_kernel_matches_closed_form_numerically() {
        // Independent oracle: evaluate h·B(h^{1/2}δ) via cosh/sinh directly.
        let h = c(0.7);
        let s = b_kernel_series(h, 20);
        for &delta in &[0.05f64, 0.1, 0.2] {
            let x = h.sqrt() * delta;
            let direct = h * (x.cosh() / (x * x) - x.sinh() / x);
            let series = s.eval(c(delta));
            assert!((direct - series).norm() < 1e-12, "delta={delta}");
        }
    }

    #[test]
    fn xi_series_examples() {
        // d=0: ζ^{-2} − h/2 + h^{3/2}ζ/3 − h²ζ²/8 + ...
        let h = c(1.0);
        let s = xi_series(0, h, 4);
        assert!((s.coeff(-2).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(s.coeff(-1).unwrap().norm() < 1e-15);
        assert!((s.coeff(0).unwrap() - c(-0.5)).norm() < 1e-14);
        assert!((s.coeff(1).unwrap() - c(1.0 / 3.0)).norm() < 1e-14);
        assert!((s.coeff(2).unwrap() - c(-1.0 / 8.0)).norm() < 1e-14);

        let s = xi_series(0, Scalar::zero(), 4);
        assert_eq!(s.terms().count(), 1);
        assert!((s.coeff(-2).unwrap() - c(1.0)).norm() < 1e-15);

        let s = xi_series(1, Scalar::zero(), 0);
        assert!((s.coeff(-4).unwrap() - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn xi_series_principal_part_is_pure() {
        // xi minus its principal part is finite at ζ = 0 for several (d, h).
        for d in 0..3u32 {
            let s = xi_series(d, c(0.37), 6);
            let pole = -(2 * d as i64 + 2);
            for k in pole + 1..0 {
                assert!(s.coeff(k).unwrap().norm() < 1e-13, "d={d} k={k}");
            }
            let df = rat_to_scalar(&double_factorial_odd(2 * d as i64 + 1));
            assert!((s.coeff(pole).unwrap() - df).norm() < 1e-12);
        }
    }

    #[test]
    fn rational_series_are_exact() {
        let s: LaurentSeries<Rational> = LaurentSeries::new(-1, vec![rat(1, 3), rat(0, 1), rat(2, 7)]);
        let p = s.mul(&s).unwrap();
        assert_eq!(p.coeff(-2).unwrap(), rat(1, 9));
        assert_eq!(p.coeff(0).unwrap(), rat(4, 21));
    }

    proptest! {
        #[test]
        fn prop_invert_multiplies_to_one(lead in 1i64..4, coeffs in proptest::collection::vec(-5i64..5, 6)) {
            // random series with nonzero lead, exact rational arithmetic
            let mut v: Vec<Rational> = vec![rat(lead, 1)];
            v.extend(coeffs.iter().map(|&k| rat(k, 3)));
            let s: LaurentSeries<Rational> = LaurentSeries::new(-2, v);
            let inv = s.invert(0.0).unwrap();
            let prod = s.mul(&inv).unwrap();
            for d in prod.min_degree()..=prod.trunc_order() {
                let expect = if d == 0 { Rational::one() } else { Rational::zero() };
                prop_assert_eq!(prod.coeff(d).unwrap(), expect);
            }
        }

        #[test]
        fn prop_primitive_then_derivative(coeffs in proptest::collection::vec(-9i64..9, 8)) {
            let v: Vec<Rational> = coeffs.iter().map(|&k| rat(k, 2)).collect();
            let mut s: LaurentSeries<Rational> = LaurentSeries::new(-4, v);
            s.set_coeff(-1, Rational::zero());
            let back = s.primitive(0.0).unwrap().derivative();
            for d in s.min_degree()..s.trunc_order() {
                prop_assert_eq!(back.coeff(d).unwrap(), s.coeff(d).unwrap());
            }
        }
    }
}

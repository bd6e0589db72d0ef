//! Exact psi-class intersection numbers on the Deligne-Mumford space.
//!
//! `<tau_{d_1} ... tau_{d_n}>_g` is evaluated by the Virasoro/DVV recursion
//! in exact rational arithmetic, with the two base cases `<tau_0^3>_0 = 1`
//! and `<tau_1>_1 = 1/24`. Off-dimension queries (`sum d_i != 3g-3+n`)
//! return exact zero. Values are memoized in a process-wide cache; cache
//! hits are bit-identical rationals.
//!
//! This module is deliberately independent of the topological recursion
//! engine so the two can be pitted against each other: the Airy-curve run of
//! `toprec` must reproduce `kdv_correlator` entry by entry.

use crate::scalar::{double_factorial_odd, rat, rat_to_scalar, Rational};
use crate::tensor::CorrelatorTensor;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IntersectError {
    #[error("unstable moduli space: 2g-2+n <= 0 for g={g}, n={n}")]
    Unstable { g: u32, n: usize },
}

/// A stable query key: genus plus the sorted multiset of psi-degrees.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PsiKey {
    pub g: u32,
    pub degrees: Vec<u32>,
}

impl PsiKey {
    pub fn new(g: u32, degrees: &[u32]) -> Result<Self, IntersectError> {
        if 2 * g as i64 - 2 + degrees.len() as i64 <= 0 {
            return Err(IntersectError::Unstable { g, n: degrees.len() });
        }
        let mut d = degrees.to_vec();
        d.sort_unstable();
        Ok(PsiKey { g, degrees: d })
    }
}

type Cache = Mutex<BTreeMap<(u32, Vec<u32>), Rational>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// `<tau_{d_1} ... tau_{d_n}>_g` as an exact rational.
pub fn psi_intersection(g: u32, degrees: &[u32]) -> Result<Rational, IntersectError> {
    let key = PsiKey::new(g, degrees)?;
    Ok(psi_raw(key.g, key.degrees))
}

/// Snapshot of the memo cache as `(g, sorted degrees, value)` records.
pub fn cache_entries() -> Vec<(u32, Vec<u32>, Rational)> {
    cache().lock().unwrap().iter().map(|((g, d), v)| (*g, d.clone(), v.clone())).collect()
}

/// Merge precomputed records into the cache (idempotent).
pub fn seed_cache(entries: impl IntoIterator<Item = (u32, Vec<u32>, Rational)>) {
    let mut c = cache().lock().unwrap();
    for (g, mut d, v) in entries {
        d.sort_unstable();
        c.insert((g, d), v);
    }
}

pub fn clear_cache() {
    cache().lock().unwrap().clear();
}

/// Internal evaluation: unstable and off-dimension keys are zero.
/// `degrees` must be sorted.
fn psi_raw(g: u32, degrees: Vec<u32>) -> Rational {
    let n = degrees.len() as i64;
    if 2 * g as i64 - 2 + n <= 0 {
        return Rational::zero();
    }
    let dim = 3 * g as i64 - 3 + n;
    let total: i64 = degrees.iter().map(|&d| d as i64).sum();
    if total != dim {
        return Rational::zero();
    }
    if g == 0 && degrees.iter().all(|&d| d == 0) {
        return Rational::one(); // <tau_0^3>_0, the only all-zero on-dimension key
    }
    if g == 1 && degrees == [1] {
        return rat(1, 24);
    }
    if let Some(v) = cache().lock().unwrap().get(&(g, degrees.clone())) {
        return v.clone();
    }
    let value = dvv_step(g, &degrees);
    cache().lock().unwrap().insert((g, degrees), value.clone());
    value
}

/// One step of the DVV recursion, removing the largest degree
/// (which is >= 1 for every on-dimension key reaching this point):
///
/// (2k+3)!! <tau_{k+1} prod tau_{d_j}>_g
///     = sum_j (2(k+d_j)+1)!!/(2d_j-1)!! <tau_{k+d_j} prod_{i != j} tau_{d_i}>_g
///     + 1/2 sum_{a+b=k-1} (2a+1)!!(2b+1)!! [ <tau_a tau_b prod tau_{d_i}>_{g-1}
///         + sum_{g1+g2=g, I1 ⊔ I2} <tau_a I1>_{g1} <tau_b I2>_{g2} ]
fn dvv_step(g: u32, degrees: &[u32]) -> Rational {
    let pos = degrees.iter().position(|&d| d == *degrees.iter().max().unwrap()).unwrap();
    let k = degrees[pos] as i64 - 1;
    debug_assert!(k >= 0);
    let rest: Vec<u32> = degrees.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &d)| d).collect();

    let mut acc = Rational::zero();

    for (j, &dj) in rest.iter().enumerate() {
        let mut sub: Vec<u32> = rest.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &d)| d).collect();
        sub.push((k + dj as i64) as u32);
        sub.sort_unstable();
        let coef = double_factorial_odd(2 * (k + dj as i64) + 1) / double_factorial_odd(2 * dj as i64 - 1);
        acc += coef * psi_raw(g, sub);
    }

    for a in 0..k {
        let b = k - 1 - a;
        let w = double_factorial_odd(2 * a + 1) * double_factorial_odd(2 * b + 1) * rat(1, 2);

        if g >= 1 {
            let mut sub = rest.clone();
            sub.push(a as u32);
            sub.push(b as u32);
            sub.sort_unstable();
            acc += w.clone() * psi_raw(g - 1, sub);
        }

        // splittings: ordered pairs (g1, I1), (g2, I2)
        let m = rest.len();
        for g1 in 0..=g {
            let g2 = g - g1;
            for mask in 0..(1u32 << m) {
                let mut s1: Vec<u32> = vec![a as u32];
                let mut s2: Vec<u32> = vec![b as u32];
                for (i, &d) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        s1.push(d);
                    } else {
                        s2.push(d);
                    }
                }
                s1.sort_unstable();
                s2.sort_unstable();
                acc += w.clone() * psi_raw(g1, s1) * psi_raw(g2, s2);
            }
        }
    }

    acc / double_factorial_odd(2 * k + 3)
}

/// The coefficients of the Airy/KdV correlation forms: the tensor entry at
/// degrees `(d_1,...,d_n)` is `<tau_{d_1}...tau_{d_n}>_g · prod (2d_i+1)!!`,
/// i.e. the polar coefficients of `omega_{g,n}` on `zeta^{-(2d+2)} dzeta`.
/// Channel index is fixed to 0 (single ramification point).
pub fn kdv_correlator(g: u32, n: usize) -> Result<CorrelatorTensor, IntersectError> {
    if 2 * g as i64 - 2 + (n as i64) <= 0 {
        return Err(IntersectError::Unstable { g, n });
    }
    let dim = 3 * g as i64 - 3 + n as i64;
    let mut t = CorrelatorTensor::new(g, n);
    for degrees in compositions(dim as u32, n) {
        let v = psi_raw(g, {
            let mut d = degrees.clone();
            d.sort_unstable();
            d
        });
        if v.is_zero() {
            continue;
        }
        let mut coef = v;
        for &d in &degrees {
            coef *= double_factorial_odd(2 * d as i64 + 1);
        }
        let key: Vec<(usize, u32)> = degrees.iter().map(|&d| (0usize, d)).collect();
        t.set(&key, rat_to_scalar(&coef));
    }
    Ok(t)
}

/// All length-`n` tuples of non-negative integers summing to `total`.
fn compositions(total: u32, n: usize) -> Vec<Vec<u32>> {
    fn go(total: u32, n: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=total {
            cur.push(k);
            go(total - k, n - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return out;
    }
    go(total, n, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn base_cases() {
        assert_eq!(psi_intersection(0, &[0, 0, 0]).unwrap(), Rational::one());
        assert_eq!(psi_intersection(1, &[1]).unwrap(), rat(1, 24));
    }

    #[test]
    fn unstable_rejected() {
        assert!(psi_intersection(0, &[0, 0]).is_err());
        assert!(psi_intersection(1, &[]).is_err());
        assert!(psi_intersection(2, &[]).is_ok()); // stable, off-dimension -> 0
        assert_eq!(psi_intersection(2, &[]).unwrap(), Rational::zero());
    }

    #[test]
    fn off_dimension_is_zero() {
        assert_eq!(psi_intersection(0, &[1, 0, 0]).unwrap(), Rational::zero());
        assert_eq!(psi_intersection(1, &[0]).unwrap(), Rational::zero());
    }

    #[test]
    fn genus_zero_closed_form() {
        // independent oracle: <tau_{d_1}...tau_{d_n}>_0 = (n-3)! / prod d_i!
        for degrees in [vec![1, 0, 0, 0], vec![2, 0, 0, 0, 0], vec![1, 1, 0, 0, 0], vec![3, 0, 0, 0, 0, 0], vec![2, 1, 0, 0, 0, 0], vec![1, 1, 1, 0, 0, 0]] {
            let n = degrees.len() as u32;
            let mut expect = crate::scalar::factorial(n - 3);
            for &d in &degrees {
                expect /= crate::scalar::factorial(d);
            }
            assert_eq!(psi_intersection(0, &degrees).unwrap(), expect, "{degrees:?}");
        }
    }

    #[test]
    fn known_higher_genus_values() {
        assert_eq!(psi_intersection(2, &[4]).unwrap(), rat(1, 1152));
        assert_eq!(psi_intersection(2, &[4, 1]).unwrap(), rat(1, 384));
        assert_eq!(psi_intersection(2, &[2, 3]).unwrap(), rat(29, 5760));
        assert_eq!(psi_intersection(1, &[0, 2]).unwrap(), rat(1, 24));
        assert_eq!(psi_intersection(1, &[1, 1]).unwrap(), rat(1, 24));
        assert_eq!(psi_intersection(3, &[7]).unwrap(), rat(1, 82944));
    }

    #[test]
    fn string_equation_over_cached_keys() {
        // <tau_0 prod tau_{d_i}>_g = sum_j <tau_{d_j - 1} prod_{i!=j} tau_{d_i}>_g
        let keys: Vec<(u32, Vec<u32>)> = vec![
            (0, vec![1, 1, 0]),
            (0, vec![2, 1, 0, 0]),
            (1, vec![2]),
            (1, vec![2, 1]),
            (2, vec![5]),
            (2, vec![4, 2]),
        ];
        for (g, degrees) in keys {
            let mut with_zero = degrees.clone();
            with_zero.push(0);
            let lhs = psi_intersection(g, &with_zero).unwrap();
            let mut rhs = Rational::zero();
            for j in 0..degrees.len() {
                if degrees[j] == 0 {
                    continue;
                }
                let mut sub = degrees.clone();
                sub[j] -= 1;
                rhs += psi_intersection(g, &sub).unwrap();
            }
            assert_eq!(lhs, rhs, "string equation failed at g={g} {degrees:?}");
        }
    }

    #[test]
    fn dilaton_equation_over_cached_keys() {
        // <tau_1 prod tau_{d_i}>_g = (2g-2+n) <prod tau_{d_i}>_g
        let keys: Vec<(u32, Vec<u32>)> = vec![(0, vec![1, 0, 0]), (1, vec![1]), (1, vec![2, 0]), (2, vec![4]), (2, vec![3, 2])];
        for (g, degrees) in keys {
            let mut with_one = degrees.clone();
            with_one.push(1);
            let lhs = psi_intersection(g, &with_one).unwrap();
            let factor = rat_int(2 * g as i64 - 2 + degrees.len() as i64);
            let rhs = factor * psi_intersection(g, &degrees).unwrap();
            assert_eq!(lhs, rhs, "dilaton equation failed at g={g} {degrees:?}");
        }
    }

    #[test]
    fn cache_hits_are_bit_identical() {
        let a = psi_intersection(2, &[1, 1, 3]).unwrap();
        let snapshot = cache_entries();
        clear_cache();
        let b = psi_intersection(2, &[1, 1, 3]).unwrap();
        assert_eq!(a, b);
        seed_cache(snapshot);
        let c = psi_intersection(2, &[1, 1, 3]).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn kdv_entries() {
        let t = kdv_correlator(1, 1).unwrap();
        assert!((t.get(&[(0, 1)]) - rat_to_scalar(&rat(1, 8))).norm() < 1e-15);

        let t = kdv_correlator(0, 3).unwrap();
        assert!((t.get(&[(0, 0), (0, 0), (0, 0)]) - rat_to_scalar(&rat_int(1))).norm() < 1e-15);

        let t = kdv_correlator(0, 4).unwrap();
        assert!((t.get(&[(0, 1), (0, 0), (0, 0), (0, 0)]) - rat_to_scalar(&rat_int(3))).norm() < 1e-15);
        assert_eq!(t.len(), 1); // one canonical key covers all permutations
    }
}

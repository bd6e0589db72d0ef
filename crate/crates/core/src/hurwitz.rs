//! Symmetric-group characters, double Hurwitz series and finite-group
//! principal-bundle counts.
//!
//! Characters of S_d are evaluated by the Murnaghan-Nakayama rule in exact
//! integers. The genus-0 restricted double Hurwitz generating series
//!
//! `H_0^{d,[ℓ,N]}(μ₁,μ₂|T) = (1/d!²) Σ_{ν ⊢ d, ℓ(ν)<=N-1, ν₁<=ℓ}
//!     #C_{μ₁} #C_{μ₂} χ_ν(μ₁) χ_ν(μ₂) e^{T f_ν(C_(2))}`
//!
//! is an exact rational polynomial in `T` after truncation. The Frobenius
//! count of principal bundles,
//!
//! `#{R ∈ Hom(π₁(Σ_{g,n}),G) | R(l_j) ∈ C_j}/#G
//!     = Σ_ν [χ_ν(1)/#G]^{2-2g} Π_j f_ν(C_j)`,
//!
//! is cross-checked against brute-force enumeration of relation solutions.
//! [`bmat_hurwitz_check`] re-derives the sl_N two-point edge series from the
//! Hurwitz side (Schur/power-sum expansion of the Kač-Peterson S-matrix) and
//! compares it with the S-matrix-side edge data coefficient by coefficient.

use crate::catalog::{class_data, sln_level, CatalogError, FiniteGroupData};
use crate::cohft::edge_coeff;
use crate::scalar::{factorial, rat, rat_int, rat_to_scalar, Rational, Scalar};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HurwitzError {
    #[error("partition sizes differ: |ν| = {0}, |μ| = {1}")]
    SizeMismatch(u32, u32),
    #[error("degree {0} exceeds the d <= {1} guard")]
    TooLarge(u64, u64),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

const CHARACTER_DEGREE_GUARD: u32 = 10;
const BRUTE_FORCE_GUARD: u64 = 100_000_000;

/// A partition in canonical (weakly decreasing) form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: &[u32]) -> Self {
        let mut p: Vec<u32> = parts.iter().copied().filter(|&x| x > 0).collect();
        p.sort_unstable_by(|a, b| b.cmp(a));
        Partition(p)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Size of the conjugacy class C_μ in S_d: d! / (Π m_j! j^{m_j}).
    pub fn class_size(&self) -> Rational {
        let d = self.size();
        let mut z = Rational::one();
        let mut mult: BTreeMap<u32, u32> = BTreeMap::new();
        for &p in &self.0 {
            *mult.entry(p).or_default() += 1;
        }
        for (&j, &m) in &mult {
            z *= factorial(m);
            z *= rat_int(j as i64).pow(m as i32);
        }
        factorial(d) / z
    }

    /// All partitions of `d`.
    pub fn all(d: u32) -> Vec<Partition> {
        fn go(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rem == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            for next in (1..=rem.min(max)).rev() {
                cur.push(next);
                go(rem - next, next, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(d, d, &mut Vec::new(), &mut out);
        out
    }
}

type CharCache = Mutex<BTreeMap<(Vec<u32>, Vec<u32>), i64>>;

fn char_cache() -> &'static CharCache {
    static CACHE: OnceLock<CharCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// Exact symmetric-group character `χ_ν(C_μ)` by Murnaghan-Nakayama.
pub fn sym_character(nu: &Partition, mu: &Partition) -> Result<i64, HurwitzError> {
    if nu.size() != mu.size() {
        return Err(HurwitzError::SizeMismatch(nu.size(), mu.size()));
    }
    if nu.size() > CHARACTER_DEGREE_GUARD {
        return Err(HurwitzError::TooLarge(nu.size() as u64, CHARACTER_DEGREE_GUARD as u64));
    }
    Ok(mn_character(nu.parts(), mu.parts()))
}

fn mn_character(nu: &[u32], mu: &[u32]) -> i64 {
    if mu.is_empty() {
        return 1;
    }
    let key = (nu.to_vec(), mu.to_vec());
    if let Some(&v) = char_cache().lock().unwrap().get(&key) {
        return v;
    }
    // remove a rim hook of length mu[0] from nu in every possible way
    let hook = mu[0];
    let rest = &mu[1..];
    let mut acc = 0i64;
    // beta-numbers: first-column hook lengths b_i = nu_i + (len - 1 - i)
    let len = nu.len();
    let betas: Vec<i64> = (0..len).map(|i| nu[i] as i64 + (len - 1 - i) as i64).collect();
    for i in 0..len {
        let target = betas[i] - hook as i64;
        if target < 0 || betas.contains(&target) {
            continue;
        }
        // height of the hook = number of betas strictly between target and betas[i]
        let height = betas.iter().filter(|&&b| b > target && b < betas[i]).count();
        let mut new_betas = betas.clone();
        new_betas[i] = target;
        new_betas.sort_unstable_by(|a, b| b.cmp(a));
        // convert back to a partition
        let m = new_betas.len();
        let mut new_nu: Vec<u32> = (0..m)
            .map(|j| (new_betas[j] - (m - 1 - j) as i64) as u32)
            .collect();
        while new_nu.last() == Some(&0) {
            new_nu.pop();
        }
        let sign = if height % 2 == 0 { 1 } else { -1 };
        acc += sign * mn_character(&new_nu, rest);
    }
    char_cache().lock().unwrap().insert(key, acc);
    acc
}

/// `f_ν(C_(2)) = (1/2) Σ_i ν_i (ν_i - 2i + 1)`, the transposition eigenvalue
/// of the quadratic Casimir (an exact rational; in fact an integer).
pub fn casimir_f2(nu: &Partition) -> Rational {
    let mut acc = rat_int(0);
    for (i, &p) in nu.parts().iter().enumerate() {
        acc += rat_int(p as i64 * (p as i64 - 2 * (i as i64 + 1) + 1));
    }
    acc / rat_int(2)
}

/// Genus-0 double Hurwitz series restricted to partitions in the
/// `ℓ × (N-1)` box, truncated at `T^t_order`. Pass `restrict = None` for the
/// classical unrestricted series.
pub fn restricted_double_hurwitz(
    d: u32,
    mu1: &Partition,
    mu2: &Partition,
    restrict: Option<(u32, u32)>,
    t_order: usize,
) -> Result<Vec<Rational>, HurwitzError> {
    if mu1.size() != d || mu2.size() != d {
        return Err(HurwitzError::SizeMismatch(mu1.size(), mu2.size()));
    }
    let mut coeffs = vec![Rational::zero(); t_order + 1];
    if d == 0 {
        coeffs[0] = Rational::one();
        return Ok(coeffs);
    }
    let class1 = mu1.class_size();
    let class2 = mu2.class_size();
    let d_fact2 = factorial(d) * factorial(d);
    for nu in Partition::all(d) {
        if let Some((l, n)) = restrict {
            if nu.len() > (n - 1) as usize || nu.parts().first().copied().unwrap_or(0) > l {
                continue;
            }
        }
        let c1 = sym_character(&nu, mu1)?;
        let c2 = sym_character(&nu, mu2)?;
        if c1 == 0 || c2 == 0 {
            continue;
        }
        let base = &class1 * &class2 * rat_int(c1 * c2) / &d_fact2;
        // e^{T f} truncated
        let f = casimir_f2(&nu);
        let mut pow = Rational::one();
        for (j, slot) in coeffs.iter_mut().enumerate() {
            if j > 0 {
                pow = pow * &f / rat_int(j as i64);
            }
            *slot += &base * &pow;
        }
    }
    Ok(coeffs)
}

/// Frobenius count of G-principal bundles: exact rational with denominator
/// dividing #G. Needs the character table of G (abelian automatic, S3
/// built-in, otherwise supplied class data).
pub fn gprincipal_count(group: &FiniteGroupData, g: u32, classes: &[usize]) -> Result<Rational, HurwitzError> {
    let data = class_data(group)?;
    let order = group.order as f64;
    // character table of G = table of the centralizer of the identity
    let table = &data.characters[0];
    let class_sizes: Vec<f64> = data.classes.iter().map(|c| c.len() as f64).collect();
    let reps = &data.reps;

    let mut acc = Scalar::zero();
    for chi in table {
        let dim = chi[0];
        let mut term = (dim / order).powi(2 - 2 * g as i32);
        for &cj in classes {
            // f_ν(C_j) = #C_j χ(rep_j)/χ(1); the table is indexed by elements
            let rep_pos = reps[cj]; // identity-class centralizer lists all of G in element order
            term *= class_sizes[cj] * chi[rep_pos] / dim;
        }
        acc += term;
    }
    // the count times #G is a non-negative integer
    let scaled = acc * order;
    let rounded = scaled.re.round();
    debug_assert!(
        (scaled - Scalar::new(rounded, 0.0)).norm() < 1e-6,
        "Frobenius sum is not integral: {scaled}"
    );
    Ok(rat_int(rounded as i64) / rat_int(group.order as i64))
}

/// Exhaustive count of `(a_1,b_1,...,a_g,b_g,c_1,...,c_n) ∈ G^{2g+n}` with
/// `Π [a_i,b_i] Π c_j = 1` and `c_j ∈ C_j`; the independent oracle for
/// [`gprincipal_count`] (`gprincipal_count × #G` must equal it).
pub fn brute_hom_count(group: &FiniteGroupData, g: u32, classes: &[usize]) -> Result<u64, HurwitzError> {
    let n = classes.len();
    let size = group.order as u64;
    let tuples = size.checked_pow(2 * g + n as u32).unwrap_or(u64::MAX);
    if tuples > BRUTE_FORCE_GUARD {
        return Err(HurwitzError::TooLarge(tuples, BRUTE_FORCE_GUARD));
    }
    let (all_classes, _) = group.conjugacy_classes();

    fn commutator(g: &FiniteGroupData, a: usize, b: usize) -> usize {
        let ab = g.mult[a][b];
        let ba = g.mult[b][a];
        g.mult[ab][g.inverse(ba)]
    }

    // enumerate handle contributions then boundary classes
    let mut count = 0u64;
    let mut stack: Vec<usize> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn handles(group: &FiniteGroupData, depth: u32, prefix: usize, g: u32, classes: &[usize], all: &[Vec<usize>], stack: &mut Vec<usize>, count: &mut u64) {
        if depth == g {
            boundary(group, 0, prefix, classes, all, count);
            return;
        }
        for a in 0..group.order {
            for b in 0..group.order {
                let c = commutator(group, a, b);
                stack.push(a);
                handles(group, depth + 1, group.mult[prefix][c], g, classes, all, stack, count);
                stack.pop();
            }
        }
    }
    fn boundary(group: &FiniteGroupData, j: usize, prefix: usize, classes: &[usize], all: &[Vec<usize>], count: &mut u64) {
        if j == classes.len() {
            if prefix == 0 {
                *count += 1;
            }
            return;
        }
        for &c in &all[classes[j]] {
            boundary(group, j + 1, group.mult[prefix][c], classes, all, count);
        }
    }
    handles(group, 0, 0, g, classes, &all_classes, &mut stack, &mut count);
    Ok(count)
}

/// Compare the Hurwitz-side two-point series against the S-matrix edge data
/// of sl_N level ℓ at t = 1, through order `u_order`; returns the maximal
/// coefficient deviation. Labels are weight vectors ((N-1)-tuples).
pub fn bmat_hurwitz_check(
    n: u32,
    l: u32,
    lam1: &[u32],
    lam2: &[u32],
    u_order: usize,
) -> Result<f64, HurwitzError> {
    let mf = sln_level(n, l)?;
    let li1 = weight_index(&mf, lam1);
    let li2 = weight_index(&mf, lam2);
    let t1 = rat_int(1);

    // S-matrix side: B_{λ1λ2}(u) = Σ_τ S̲_{λ2τ}(S̲⁻¹)_{τλ1} e^{u h_τ/2}
    //   = δ_{λ1λ2} − u Σ B[λ1λ2; k-1, 0] u^{k-1}, from the edge data
    let mut smatrix_side = vec![Scalar::zero(); u_order + 1];
    smatrix_side[0] = if li1 == li2 { Scalar::one() } else { Scalar::zero() };
    for (k, slot) in smatrix_side.iter_mut().enumerate().skip(1) {
        *slot = -edge_coeff(&mf, &t1, li1, li2, k - 1, 0);
    }

    // Hurwitz side
    let qden = (l + n) as f64;
    let bracket = |x: f64| -> Scalar {
        // [x]_q = q^{x/2} - q^{-x/2} = 2i sin(πx/(l+N))
        Scalar::new(0.0, 2.0 * (PI * x / qden).sin())
    };
    // |Π_{α>0} [<α,ρ>]_q|² and q-dimensions
    let mut norm2 = 1.0f64;
    let mut dimq1 = Scalar::one();
    let mut dimq2 = Scalar::one();
    let a1 = shifted_weight(n, lam1);
    let a2 = shifted_weight(n, lam2);
    for i in 0..n as usize {
        for j in i + 1..n as usize {
            let rho_ij = (j - i) as f64;
            norm2 *= bracket(rho_ij).norm_sqr();
            dimq1 *= bracket((a1[i] - a1[j]) as f64) / bracket(rho_ij);
            dimq2 *= bracket((a2[i] - a2[j]) as f64) / bracket(rho_ij);
        }
    }
    let d_ell = (n as f64) * ((l + n) as f64).powi(n as i32 - 1);
    let prefactor = norm2 / d_ell * dimq1 * dimq2.conj();

    // power-sum evaluation points x_i = q^{a_i - |a|/N} and their inverses
    let abs1: i64 = a1.iter().sum();
    let abs2: i64 = a2.iter().sum();
    let point = |ai: i64, abs: i64, sign: f64| -> Scalar {
        let phase = sign * 2.0 * PI * (n as i64 * ai - abs) as f64 / (n as f64 * qden);
        Scalar::new(phase.cos(), phase.sin())
    };
    let x1: Vec<Scalar> = a1.iter().map(|&ai| point(ai, abs1, 1.0)).collect();
    let x2: Vec<Scalar> = a2.iter().map(|&ai| point(ai, abs2, -1.0)).collect();
    let power_sum = |xs: &[Scalar], mu: &Partition| -> Scalar {
        mu.parts()
            .iter()
            .map(|&m| xs.iter().map(|x| x.powu(m)).sum::<Scalar>())
            .product()
    };

    // exact T-polynomial per degree d, then T = u/(l+N)
    let c24 = rat(l as i64 * ((n * n - 1) as i64), 24); // (l+N)·c/24
    let mut hurwitz_side = vec![Scalar::zero(); u_order + 1];
    let d_max = l * (n - 1);
    for d in 0..=d_max {
        let exp_pref = rat(n as i64 * d as i64, 2) - rat((d * d) as i64, 2 * n as i64) + &c24;
        for mu1 in Partition::all(d) {
            let p1 = power_sum(&x1, &mu1);
            if p1.norm() < 1e-300 {
                continue;
            }
            for mu2 in Partition::all(d) {
                let p2 = power_sum(&x2, &mu2);
                let h = restricted_double_hurwitz(d, &mu1, &mu2, Some((l, n)), u_order)?;
                // multiply H(T) by e^{exp_pref·T}, truncate, substitute T = u/(l+N)
                let mut epow = Rational::one();
                let mut expd = vec![Rational::zero(); u_order + 1];
                for (j, slot) in expd.iter_mut().enumerate() {
                    if j > 0 {
                        epow = epow * &exp_pref / rat_int(j as i64);
                    }
                    *slot = epow.clone();
                }
                for k in 0..=u_order {
                    let mut tk = Rational::zero();
                    for j in 0..=k {
                        tk += &expd[j] * &h[k - j];
                    }
                    let scale = rat_int(1) / rat_int((l + n) as i64).pow(k as i32);
                    hurwitz_side[k] += p1 * p2 * rat_to_scalar(&(tk * scale));
                }
            }
        }
    }
    for slot in hurwitz_side.iter_mut() {
        *slot *= prefactor;
    }

    let mut dev: f64 = 0.0;
    for k in 0..=u_order {
        dev = dev.max((smatrix_side[k] - hurwitz_side[k]).norm());
    }
    Ok(dev)
}

fn weight_index(mf: &crate::frobenius::ModularFunctorData, w: &[u32]) -> usize {
    let name = format!("({})", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    mf.label_index(&name).unwrap_or_else(|| panic!("weight {name} not in the level alcove"))
}

fn shifted_weight(n: u32, w: &[u32]) -> Vec<i64> {
    (0..n as usize)
        .map(|i| {
            let part = if i < w.len() { w[i] as i64 } else { 0 };
            part + (n as i64 - 1 - i as i64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use crate::catalog::{cyclic_group, symmetric_s3};

    #[test]
    fn mn_characters_frozen() {
        // trivial representation
        for mu in Partition::all(5) {
            assert_eq!(sym_character(&Partition::new(&[5]), &mu).unwrap(), 1);
        }
        // sign representation on a transposition
        assert_eq!(sym_character(&Partition::new(&[1, 1]), &Partition::new(&[2])).unwrap(), -1);
        // single 3-rim-hook of height 1
        assert_eq!(sym_character(&Partition::new(&[2, 1]), &Partition::new(&[3])).unwrap(), -1);
        // dimension of the standard representation of S_4
        assert_eq!(sym_character(&Partition::new(&[3, 1]), &Partition::new(&[1, 1, 1, 1])).unwrap(), 3);
        assert!(sym_character(&Partition::new(&[2]), &Partition::new(&[3])).is_err());
    }

    #[test]
    fn character_column_orthogonality() {
        // Σ_ν χ_ν(C_μ) χ_ν(C_σ) = δ_{μσ} z_μ with z_μ = d!/#C_μ
        for d in 2..=6u32 {
            let parts = Partition::all(d);
            for mu in &parts {
                for sig in &parts {
                    let mut acc = 0i64;
                    for nu in &parts {
                        acc += sym_character(nu, mu).unwrap() * sym_character(nu, sig).unwrap();
                    }
                    let expect = if mu == sig {
                        (factorial(d) / mu.class_size()).to_integer().to_i64().unwrap()
                    } else {
                        0
                    };
                    assert_eq!(acc, expect, "d={d} mu={mu:?} sig={sig:?}");
                }
            }
        }
    }

    #[test]
    fn casimir_values() {
        assert_eq!(casimir_f2(&Partition::new(&[2])), rat_int(1));
        assert_eq!(casimir_f2(&Partition::new(&[1, 1])), rat_int(-1));
        assert_eq!(casimir_f2(&Partition::new(&[1])), rat_int(0));
        assert_eq!(casimir_f2(&Partition::new(&[3, 1])), rat_int(2));
    }

    #[test]
    fn hurwitz_series_examples() {
        // d = 1: single partition, f = 0
        let one = Partition::new(&[1]);
        let h = restricted_double_hurwitz(1, &one, &one, Some((1, 2)), 4).unwrap();
        assert_eq!(h[0], rat_int(1));
        assert!(h[1..].iter().all(|c| c.is_zero()));

        // d = 2, μ = ((2),(2)), unrestricted: cosh(T)/2
        let two = Partition::new(&[2]);
        let h = restricted_double_hurwitz(2, &two, &two, None, 5).unwrap();
        assert_eq!(h[0], rat(1, 2));
        assert!(h[1].is_zero());
        assert_eq!(h[2], rat(1, 4));
        assert!(h[3].is_zero());
        assert_eq!(h[4], rat(1, 48));

        // restricted to the 1×1 box: no admissible ν
        let h = restricted_double_hurwitz(2, &two, &two, Some((1, 2)), 3).unwrap();
        assert!(h.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn restriction_vacuous_for_small_degree() {
        // d <= min(l, N-1) lifts the restriction
        for d in 1..=2u32 {
            for mu1 in Partition::all(d) {
                for mu2 in Partition::all(d) {
                    let a = restricted_double_hurwitz(d, &mu1, &mu2, Some((3, 3)), 4).unwrap();
                    let b = restricted_double_hurwitz(d, &mu1, &mu2, None, 4).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn gprincipal_examples() {
        let z2 = cyclic_group(2);
        assert_eq!(gprincipal_count(&z2, 1, &[]).unwrap(), rat_int(2));
        assert_eq!(brute_hom_count(&z2, 1, &[]).unwrap(), 4);

        let z3 = cyclic_group(3);
        assert_eq!(brute_hom_count(&z3, 1, &[]).unwrap(), 9);
        assert_eq!(gprincipal_count(&z3, 1, &[]).unwrap(), rat_int(3));

        let s3 = symmetric_s3();
        assert_eq!(brute_hom_count(&s3, 1, &[]).unwrap(), 18);
        assert_eq!(gprincipal_count(&s3, 1, &[]).unwrap(), rat_int(3));

        // Z2, genus 0, two nontrivial punctures: a single homomorphism
        assert_eq!(gprincipal_count(&z2, 0, &[1, 1]).unwrap(), rat(1, 2));
        assert_eq!(brute_hom_count(&z2, 0, &[1, 1]).unwrap(), 1);
    }

    #[test]
    fn gprincipal_matches_brute_force() {
        for group in [cyclic_group(2), cyclic_group(3), symmetric_s3()] {
            let (classes, _) = group.conjugacy_classes();
            for g in 0..=2u32 {
                for n in 0..=2usize {
                    // a few class tuples, deterministic choice
                    let tuples: Vec<Vec<usize>> = match n {
                        0 => vec![vec![]],
                        1 => (0..classes.len()).map(|c| vec![c]).collect(),
                        _ => (0..classes.len()).map(|c| vec![c, (c + 1) % classes.len()]).collect(),
                    };
                    for t in tuples {
                        let frob = gprincipal_count(&group, g, &t).unwrap();
                        let brute = brute_hom_count(&group, g, &t).unwrap();
                        assert_eq!(
                            frob * rat_int(group.order as i64),
                            rat_int(brute as i64),
                            "order {} g={g} classes {t:?}",
                            group.order
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn guards_reject_oversized_inputs() {
        let eleven = Partition::new(&[6, 5]);
        assert!(matches!(sym_character(&eleven, &eleven), Err(HurwitzError::TooLarge(..))));
        let big = cyclic_group(100);
        assert!(matches!(brute_hom_count(&big, 2, &[0]), Err(HurwitzError::TooLarge(..))));
    }

    #[test]
    fn bmat_check_order_zero_trivial() {
        let dev = bmat_hurwitz_check(2, 2, &[0], &[0], 0).unwrap();
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn bmat_check_su2_level3() {
        let dev = bmat_hurwitz_check(2, 3, &[0], &[0], 3).unwrap();
        assert!(dev < 1e-9, "deviation {dev}");
    }

    #[test]
    fn bmat_check_sl3_fundamental() {
        let dev = bmat_hurwitz_check(3, 2, &[1, 0], &[1, 0], 2).unwrap();
        assert!(dev < 1e-9, "deviation {dev}");
    }
}

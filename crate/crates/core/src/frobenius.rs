//! The Frobenius algebra attached to a modular functor.
//!
//! The input data is the normalized S-matrix `S̲` together with the label
//! involution `†`, the conformal weights `r_λ` and the central charge `c`.
//! Everything else is derived:
//!
//! * fusion coefficients  `N_{λμν} = Σ_τ (S̲⁻¹)_{λτ}(S̲⁻¹)_{μτ}(S̲⁻¹)_{ντ} / (S̲⁻¹)_{1τ}`
//! * Verlinde dimensions  `D_λ⃗(Σ_{g,n}) = Σ_τ Π_i (S̲⁻¹)_{λ_iτ} / [(S̲⁻¹)_{1τ}]^{2g-2+n}`
//! * curve-operator eigenvalues  `c_μ[λ] = (S̲⁻¹)_{λμ}/(S̲⁻¹)_{1μ}`
//! * canonical-basis norms  `Δ_λ = 1/[(S̲⁻¹)_{1λ}]²`
//!
//! plus the one-variable fusion potential whose Jacobi ring realizes the
//! algebra (characteristic polynomial of a generic curve-operator
//! combination, its antiderivative, and the Lagrange basis).

use crate::scalar::{round_nonneg_integer, Rational, Scalar, Tolerance};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrobeniusError {
    #[error("hard invariant violated:\n{0}")]
    HardInvariantViolation(ValidationReport),
    #[error("sum is {value} which is not a non-negative integer within {tol}")]
    NotAnInteger { value: Scalar, tol: f64 },
    #[error("unstable surface: g={g}, n={n}")]
    Unstable { g: u32, n: usize },
    #[error("two eigenvalues coincide within tolerance: c[{0}] = c[{1}]")]
    DegenerateEigenvalues(usize, usize),
    #[error("S-matrix is singular")]
    SingularMatrix,
    #[error("label index {0} out of range (K = {1})")]
    BadLabel(usize, usize),
}

/// Algebraic data of a modular functor. The trivial label sits at index 0,
/// `s_under` is the normalized S-matrix and `s_under_inv` its inverse
/// (stored explicitly since every formula consumes the inverse).
#[derive(Clone, Debug)]
pub struct ModularFunctorData {
    pub name: String,
    pub labels: Vec<String>,
    pub dagger: Vec<usize>,
    pub s_under: Vec<Vec<Scalar>>,
    pub s_under_inv: Vec<Vec<Scalar>>,
    pub r: Vec<Rational>,
    pub c: Rational,
}

impl ModularFunctorData {
    /// Build from the normalized S-matrix; the inverse is computed.
    pub fn from_s_under(
        name: impl Into<String>,
        labels: Vec<String>,
        dagger: Vec<usize>,
        s_under: Vec<Vec<Scalar>>,
        r: Vec<Rational>,
        c: Rational,
    ) -> Result<Self, FrobeniusError> {
        let s_under_inv = invert_matrix(&s_under).ok_or(FrobeniusError::SingularMatrix)?;
        Ok(ModularFunctorData { name: name.into(), labels, dagger, s_under, s_under_inv, r, c })
    }

    /// Build from the inverse S-matrix (the form stored in data files).
    pub fn from_s_under_inverse(
        name: impl Into<String>,
        labels: Vec<String>,
        dagger: Vec<usize>,
        s_under_inv: Vec<Vec<Scalar>>,
        r: Vec<Rational>,
        c: Rational,
    ) -> Result<Self, FrobeniusError> {
        let s_under = invert_matrix(&s_under_inv).ok_or(FrobeniusError::SingularMatrix)?;
        Ok(ModularFunctorData { name: name.into(), labels, dagger, s_under, s_under_inv, r, c })
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn s(&self, l: usize, m: usize) -> Scalar {
        self.s_under[l][m]
    }

    pub fn s_inv(&self, l: usize, m: usize) -> Scalar {
        self.s_under_inv[l][m]
    }

    /// `Δ_λ^{-1/2} = (S̲⁻¹)_{1λ}`, with the sign convention of the stored matrix.
    pub fn delta_inv_sqrt(&self, l: usize) -> Scalar {
        self.s_under_inv[0][l]
    }

    /// Renormalized Dehn twist `h_λ = 2t(r_λ + c/24)` as an exact rational.
    pub fn h(&self, t: &Rational, l: usize) -> Rational {
        Rational::from_integer(2.into()) * t * (&self.r[l] + &self.c / Rational::from_integer(24.into()))
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }
}

/// Outcome of one validation check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub deviation: f64,
    pub passed: bool,
    /// Hard checks must pass for the data to be usable; informational ones
    /// (MF-U unitarity, MF-D duality) need not hold for a valid modular functor.
    pub hard: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn hard_failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.hard && !c.passed)
    }

    pub fn all_hard_passed(&self) -> bool {
        self.hard_failures().next().is_none()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<26} max deviation {:.3e}{}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.deviation,
                if c.hard { "" } else { " (informational)" }
            )?;
        }
        Ok(())
    }
}

/// Check every structural invariant of `mf`, returning the full report.
/// `dagger` involution, `S̲ᵀS̲ = C`, non-vanishing of `(S̲⁻¹)_{1λ}`,
/// `r_1 = 0`, `r_λ = r_{λ†}` and consistency of the stored inverse are hard;
/// unitarity (MF-U) and duality (MF-D) are reported informationally.
pub fn validate_mf(mf: &ModularFunctorData, tol: Tolerance) -> ValidationReport {
    let k = mf.k();
    let mut checks = Vec::new();

    let shape_ok = mf.dagger.len() == k
        && mf.r.len() == k
        && mf.s_under.len() == k
        && mf.s_under.iter().all(|row| row.len() == k)
        && mf.s_under_inv.len() == k
        && mf.s_under_inv.iter().all(|row| row.len() == k);
    checks.push(Check { name: "shape", deviation: if shape_ok { 0.0 } else { f64::INFINITY }, passed: shape_ok, hard: true });
    if !shape_ok {
        return ValidationReport { checks };
    }

    let dagger_ok = mf.dagger[0] == 0 && (0..k).all(|l| mf.dagger[l] < k && mf.dagger[mf.dagger[l]] == l);
    checks.push(Check { name: "dagger involution, 1† = 1", deviation: if dagger_ok { 0.0 } else { f64::INFINITY }, passed: dagger_ok, hard: true });

    // S̲ᵀ S̲ = C with C_{λμ} = δ_{λμ†}
    let mut dev: f64 = 0.0;
    for l in 0..k {
        for m in 0..k {
            let mut acc = Scalar::zero();
            for t in 0..k {
                acc += mf.s_under[t][l] * mf.s_under[t][m];
            }
            let expect = if mf.dagger[l] == m { Scalar::one() } else { Scalar::zero() };
            dev = dev.max((acc - expect).norm());
        }
    }
    checks.push(Check { name: "S̲ᵀS̲ = C", deviation: dev, passed: dev <= tol.abs + tol.rel, hard: true });

    // stored inverse really is the inverse
    let mut dev: f64 = 0.0;
    for l in 0..k {
        for m in 0..k {
            let mut acc = Scalar::zero();
            for t in 0..k {
                acc += mf.s_under[l][t] * mf.s_under_inv[t][m];
            }
            let expect = if l == m { Scalar::one() } else { Scalar::zero() };
            dev = dev.max((acc - expect).norm());
        }
    }
    checks.push(Check { name: "S̲ S̲⁻¹ = 1", deviation: dev, passed: dev <= tol.abs + tol.rel, hard: true });

    // (S̲⁻¹)_{1λ} != 0
    let min_first = (0..k).map(|l| mf.s_under_inv[0][l].norm()).fold(f64::INFINITY, f64::min);
    checks.push(Check { name: "(S̲⁻¹)_{1λ} nonzero", deviation: min_first, passed: min_first > tol.abs, hard: true });

    let r1_zero = mf.r[0].is_zero();
    checks.push(Check { name: "r_1 = 0", deviation: if r1_zero { 0.0 } else { crate::scalar::rat_to_f64(&mf.r[0]).abs() }, passed: r1_zero, hard: true });

    let r_dag = (0..k).all(|l| mf.r[l] == mf.r[mf.dagger[l]]);
    checks.push(Check { name: "r_λ = r_{λ†}", deviation: if r_dag { 0.0 } else { f64::INFINITY }, passed: r_dag, hard: true });

    // MF-U (informational): (S̲*)ᵀ S̲ = 1
    let mut dev: f64 = 0.0;
    for l in 0..k {
        for m in 0..k {
            let mut acc = Scalar::zero();
            for t in 0..k {
                acc += mf.s_under[t][l].conj() * mf.s_under[t][m];
            }
            let expect = if l == m { Scalar::one() } else { Scalar::zero() };
            dev = dev.max((acc - expect).norm());
        }
    }
    checks.push(Check { name: "MF-U: S̲ unitary", deviation: dev, passed: dev <= tol.abs + tol.rel, hard: false });

    // MF-D (informational): S̲_{λμ} = (S̲⁻¹)_{μλ†}
    let mut dev: f64 = 0.0;
    for l in 0..k {
        for m in 0..k {
            dev = dev.max((mf.s_under[l][m] - mf.s_under_inv[m][mf.dagger[l]]).norm());
        }
    }
    checks.push(Check { name: "MF-D: S̲_{λμ} = S̲⁻¹_{μλ†}", deviation: dev, passed: dev <= tol.abs + tol.rel, hard: false });

    ValidationReport { checks }
}

/// `validate_mf`, erroring out when a hard invariant fails.
pub fn validate_mf_strict(mf: &ModularFunctorData, tol: Tolerance) -> Result<ValidationReport, FrobeniusError> {
    let report = validate_mf(mf, tol);
    if report.all_hard_passed() {
        Ok(report)
    } else {
        Err(FrobeniusError::HardInvariantViolation(report))
    }
}

/// Fusion coefficient `N_{λμν}`, rounded to a non-negative integer within
/// `int_tol` (default [`INTEGER_TOL`]).
pub fn fusion_coeff(mf: &ModularFunctorData, l: usize, m: usize, n: usize, int_tol: f64) -> Result<u64, FrobeniusError> {
    let k = mf.k();
    for &idx in &[l, m, n] {
        if idx >= k {
            return Err(FrobeniusError::BadLabel(idx, k));
        }
    }
    let mut acc = Scalar::zero();
    for t in 0..k {
        acc += mf.s_inv(l, t) * mf.s_inv(m, t) * mf.s_inv(n, t) / mf.s_inv(0, t);
    }
    round_nonneg_integer(acc, int_tol).ok_or(FrobeniusError::NotAnInteger { value: acc, tol: int_tol })
}

/// The full K×K×K fusion table.
#[derive(Clone, Debug)]
pub struct FusionTable {
    pub k: usize,
    pub entries: Vec<u64>, // index (l*k + m)*k + n
}

impl FusionTable {
    pub fn get(&self, l: usize, m: usize, n: usize) -> u64 {
        self.entries[(l * self.k + m) * self.k + n]
    }
}

pub fn fusion_table(mf: &ModularFunctorData, int_tol: f64) -> Result<FusionTable, FrobeniusError> {
    let k = mf.k();
    let mut entries = Vec::with_capacity(k * k * k);
    for l in 0..k {
        for m in 0..k {
            for n in 0..k {
                entries.push(fusion_coeff(mf, l, m, n, int_tol)?);
            }
        }
    }
    Ok(FusionTable { k, entries })
}

/// Verlinde dimension of the genus-`g` surface with boundary labels `labels`.
/// The formula is total in (g, n): unstable low topologies are meaningful
/// (the torus gives K, the two-punctured sphere gives `δ_{λμ†}`).
pub fn verlinde_dim(mf: &ModularFunctorData, g: u32, labels: &[usize], int_tol: f64) -> Result<u64, FrobeniusError> {
    let n = labels.len();
    let k = mf.k();
    for &idx in labels {
        if idx >= k {
            return Err(FrobeniusError::BadLabel(idx, k));
        }
    }
    let e = 2 * g as i32 - 2 + n as i32;
    let mut acc = Scalar::zero();
    for t in 0..k {
        let mut num = Scalar::one();
        for &l in labels {
            num *= mf.s_inv(l, t);
        }
        acc += num / mf.s_inv(0, t).powi(e);
    }
    round_nonneg_integer(acc, int_tol).ok_or(FrobeniusError::NotAnInteger { value: acc, tol: int_tol })
}

/// Eigenvalues of the curve operator for `λ`: `c_μ[λ] = (S̲⁻¹)_{λμ}/(S̲⁻¹)_{1μ}`.
pub fn curve_op_eigenvalues(mf: &ModularFunctorData, l: usize) -> Vec<Scalar> {
    (0..mf.k()).map(|m| mf.s_inv(l, m) / mf.s_inv(0, m)).collect()
}

/// Canonical-basis norms `Δ_λ = 1/[(S̲⁻¹)_{1λ}]²` together with the
/// sign-sensitive square roots `Δ_λ^{-1/2} = (S̲⁻¹)_{1λ}`.
pub fn canonical_norms(mf: &ModularFunctorData) -> (Vec<Scalar>, Vec<Scalar>) {
    let inv_sqrt: Vec<Scalar> = (0..mf.k()).map(|l| mf.delta_inv_sqrt(l)).collect();
    let delta = inv_sqrt.iter().map(|d| 1.0 / (d * d)).collect();
    (delta, inv_sqrt)
}

/// Fusion potential data for a direction `f`: characteristic polynomial
/// `P_f(η) = Π_μ (η − c_{μ,f})`, its antiderivative `Q_f` (zero constant
/// term) and the Lagrange basis `φ_{λ,f}` with `φ_{λ,f}(c_{μ,f}) = c_μ[λ]`.
/// Polynomials are coefficient vectors in increasing degree.
#[derive(Clone, Debug)]
pub struct FusionPotential {
    pub f: Vec<Scalar>,
    pub eigenvalues: Vec<Scalar>,
    pub p: Vec<Scalar>,
    pub q: Vec<Scalar>,
    pub phi: Vec<Vec<Scalar>>,
}

pub fn fusion_potential(mf: &ModularFunctorData, f: &[Scalar], tol: Tolerance) -> Result<FusionPotential, FrobeniusError> {
    let k = mf.k();
    assert_eq!(f.len(), k);
    // c_{μ,f} = Σ_λ f_λ c_μ[λ]
    let mut eigen = vec![Scalar::zero(); k];
    for l in 0..k {
        if f[l].is_zero() {
            continue;
        }
        for (m, e) in curve_op_eigenvalues(mf, l).into_iter().enumerate() {
            eigen[m] += f[l] * e;
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if tol.eq(eigen[i], eigen[j]) {
                return Err(FrobeniusError::DegenerateEigenvalues(i, j));
            }
        }
    }
    let p = poly_from_roots(&eigen);
    let mut q = vec![Scalar::zero(); p.len() + 1];
    for (d, c) in p.iter().enumerate() {
        q[d + 1] = c / (d as f64 + 1.0);
    }
    let phi = (0..k)
        .map(|l| {
            let values = curve_op_eigenvalues(mf, l);
            lagrange_interpolate(&eigen, &values)
        })
        .collect();
    Ok(FusionPotential { f: f.to_vec(), eigenvalues: eigen, p, q, phi })
}

/// Max coefficient deviation over all `(λ,μ)` between `φ_λ φ_μ mod P_f` and
/// `Σ_ν N_{λμν†} φ_ν`; small deviation certifies the Jacobi-ring model of the
/// fusion algebra.
pub fn jacobi_check(fp: &FusionPotential, mf: &ModularFunctorData, int_tol: f64) -> Result<f64, FrobeniusError> {
    let k = mf.k();
    let table = fusion_table(mf, int_tol)?;
    let mut dev: f64 = 0.0;
    for l in 0..k {
        for m in 0..k {
            let prod = poly_mod(&poly_mul(&fp.phi[l], &fp.phi[m]), &fp.p);
            let mut expect = vec![Scalar::zero(); k.max(1)];
            for nu in 0..k {
                let coef = table.get(l, m, mf.dagger[nu]) as f64;
                if coef != 0.0 {
                    expect = poly_add(&expect, &poly_scale(&fp.phi[nu], Scalar::new(coef, 0.0)));
                }
            }
            let diff = poly_add(&prod, &poly_scale(&expect, Scalar::new(-1.0, 0.0)));
            for c in diff {
                dev = dev.max(c.norm());
            }
        }
    }
    Ok(dev)
}

// --- small dense polynomial and matrix helpers ---

fn poly_from_roots(roots: &[Scalar]) -> Vec<Scalar> {
    let mut p = vec![Scalar::one()];
    for &r in roots {
        let mut next = vec![Scalar::zero(); p.len() + 1];
        for (d, c) in p.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= c * r;
        }
        p = next;
    }
    p
}

fn poly_mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_scale(a: &[Scalar], c: Scalar) -> Vec<Scalar> {
    a.iter().map(|x| x * c).collect()
}

/// Remainder of `a` modulo the monic polynomial `p`.
fn poly_mod(a: &[Scalar], p: &[Scalar]) -> Vec<Scalar> {
    let deg_p = p.len() - 1;
    let lead = p[deg_p];
    let mut r = a.to_vec();
    while r.len() > deg_p {
        let top = r.len() - 1;
        let factor = r[top] / lead;
        for i in 0..=deg_p {
            let idx = top - deg_p + i;
            let sub = factor * p[i];
            r[idx] -= sub;
        }
        r.pop();
    }
    r
}

fn lagrange_interpolate(xs: &[Scalar], ys: &[Scalar]) -> Vec<Scalar> {
    let k = xs.len();
    let mut out = vec![Scalar::zero(); k.max(1)];
    for i in 0..k {
        // basis polynomial Π_{j != i} (η - x_j)/(x_i - x_j)
        let mut num = vec![Scalar::one()];
        let mut den = Scalar::one();
        for j in 0..k {
            if j == i {
                continue;
            }
            let mut next = vec![Scalar::zero(); num.len() + 1];
            for (d, c) in num.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * xs[j];
            }
            num = next;
            den *= xs[i] - xs[j];
        }
        out = poly_add(&out, &poly_scale(&num, ys[i] / den));
    }
    out
}

/// Dense inverse by Gauss elimination with partial pivoting.
pub(crate) fn invert_matrix(m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let k = m.len();
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut inv: Vec<Vec<Scalar>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect())
        .collect();
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())?;
        if a[pivot][col].norm() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..k {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..k {
            if i == col {
                continue;
            }
            let factor = a[i][col];
            if factor.is_zero() {
                continue;
            }
            for j in 0..k {
                let s = a[col][j];
                let t = inv[col][j];
                a[i][j] -= factor * s;
                inv[i][j] -= factor * t;
            }
        }
    }
    Some(inv)
}

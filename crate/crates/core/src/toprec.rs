//! Local spectral curves and the Eynard-Orantin residue recursion.
//!
//! A local spectral curve is a disjoint union of formal disks U_i indexed by
//! channels, with `x = x(o_i) + ζ_i²/2` and data
//!
//! * `ω_{0,1}(z) = Σ_d ω01[i;d] ζ^d dζ` per channel,
//! * `ω_{0,2}(z₁,z₂) = δ_{i₁i₂} dζ₁dζ₂/(ζ₁-ζ₂)² + Σ tail[i₁i₂;d₁d₂] ζ₁^{d₁}ζ₂^{d₂} dζ₁dζ₂`.
//!
//! The recursion
//! `ω_{g,n}(z₁,I) = Σ_i Res_{z→o_i} K_i(z₁,z) { ω_{g-1,n+1}(z,σz,I) + Σ' ω ω }`
//! with kernel `K_i = (1/2) ∫_{σz}^z ω_{0,2}(·,z₁) / (ω_{0,1}(z) − ω_{0,1}(σz))`
//! is evaluated as series arithmetic in the residue variable, with
//! coefficients that are monomial vectors in the spectator legs. Output
//! forms are stored as sparse degree tensors per channel tuple
//! ([`OmegaGN`]); [`xi_decompose`] extracts the CohFT integrals from the
//! principal parts and re-verifies the regular tails against the Ξ basis.

use crate::frobenius::ModularFunctorData;
use crate::scalar::{double_factorial_odd, rat_to_f64, rat_to_scalar, Rational, Scalar, Tolerance};
use crate::series::{LaurentSeries, SeriesError};
use crate::tensor::CorrelatorTensor;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrError {
    #[error("unstable topology: g={g}, n={n}")]
    Unstable { g: u32, n: usize },
    #[error("c·t = 0: the exponential curve normalization divides by (ct/12)^{{1/2}}; use curve_verlinde for t = 0")]
    ZeroCentralCharge,
    #[error("insufficient truncation order {trunc} (needed {needed}); re-run with a larger trunc_order")]
    InsufficientTruncation { needed: i64, trunc: i64 },
    #[error("free energies are defined for g >= 2, got g={0}")]
    FreeEnergyGenus(u32),
    #[error("output fails leg-permutation symmetry by {0}")]
    AsymmetricOutput(f64),
    #[error("odd-order pole of size {0} in recursion output")]
    OddPole(f64),
    #[error("polar degree {d} at leg {leg} exceeds the bound 2d+2 <= {bound}")]
    DegreeOverflow { d: i64, leg: usize, bound: i64 },
    #[error("tail re-synthesis from Xi coefficients deviates by {0}")]
    TailMismatch(f64),
}

impl From<SeriesError> for TrError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::InsufficientTruncation { needed, trunc } => TrError::InsufficientTruncation { needed, trunc },
            SeriesError::LeadingZero(d) => TrError::InsufficientTruncation { needed: d, trunc: d },
            other => panic!("unexpected series failure in recursion: {other}"),
        }
    }
}

/// Local spectral curve data over K channels, truncated at `trunc_order`.
#[derive(Clone, Debug)]
pub struct LocalSpectralCurve {
    pub k: usize,
    /// coefficients of `ζ^d dζ` per channel
    pub omega01: Vec<LaurentSeries<Scalar>>,
    /// bare double-pole flags t_i per ordered channel pair (true on the diagonal)
    pub double_pole: Vec<Vec<bool>>,
    /// regular tail coefficients `tail[i][j][(d1,d2)]`
    pub tail: Vec<Vec<BTreeMap<(i64, i64), Scalar>>>,
    pub trunc_order: i64,
    /// channel metadata when built from modular functor data
    pub h: Option<Vec<Scalar>>,
    pub delta_inv_sqrt: Option<Vec<Scalar>>,
}

impl LocalSpectralCurve {
    fn tail_coeff(&self, i: usize, j: usize, d1: i64, d2: i64) -> Scalar {
        if d1 < 0 || d2 < 0 {
            return Scalar::zero();
        }
        self.tail[i][j].get(&(d1, d2)).copied().unwrap_or_default()
    }

    /// Zero the non-odd part of the tail: keep only monomials with both
    /// degrees even (the part fixed by the R-matrix).
    pub fn with_odd_tail_only(&self) -> Self {
        let mut c = self.clone();
        for i in 0..c.k {
            for j in 0..c.k {
                c.tail[i][j].retain(|&(d1, d2), _| d1 % 2 == 0 && d2 % 2 == 0);
            }
        }
        c
    }
}

/// The default truncation for a (g,n) target: the maximal pole order
/// `6g-4+2n` plus a safety margin.
pub fn default_trunc(g: u32, n: usize) -> i64 {
    (6 * g as i64 - 4 + 2 * n as i64).max(2) + 6
}

/// The Airy curve: one channel, `y = -ζ`, bare double pole.
pub fn airy_curve(trunc_order: i64) -> LocalSpectralCurve {
    curve_verlinde(&crate::catalog::trivial_mf(), trunc_order)
}

/// The t = 0 curve of a modular functor: per channel
/// `y = -(S̲⁻¹)_{1λ} ζ` (so `ω_{0,1} = -(S̲⁻¹)_{1λ} ζ² dζ`), purely diagonal
/// bare `ω_{0,2}`, no tails.
pub fn curve_verlinde(mf: &ModularFunctorData, trunc_order: i64) -> LocalSpectralCurve {
    let k = mf.k();
    let omega01 = (0..k)
        .map(|l| LaurentSeries::monomial(2, -mf.delta_inv_sqrt(l), trunc_order))
        .collect();
    LocalSpectralCurve {
        k,
        omega01,
        double_pole: (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect(),
        tail: vec![vec![BTreeMap::new(); k]; k],
        trunc_order,
        h: Some(vec![Scalar::zero(); k]),
        delta_inv_sqrt: Some((0..k).map(|l| mf.delta_inv_sqrt(l)).collect()),
    }
}

/// The local spectral curve of the CohFT at parameter `t != 0`:
///
/// * `y = -(S̲⁻¹)_{1λ} exp[(ct/12)^{1/2} ζ]/(ct/12)^{1/2}` when `c·t != 0`
///   (so `ω01[λ;d] = -(S̲⁻¹)_{1λ} s^{d-2}/(d-1)!` with `s = (ct/12)^{1/2}`);
///   for `c = 0`, `t != 0` the translation vanishes and the odd part is
///   assembled directly: `ω_{0,1} = -(S̲⁻¹)_{1λ} ζ² dζ`;
/// * `ω_{0,2} = Σ_τ S̲_{λ₂τ}(S̲⁻¹)_{τλ₁} h_τ B[h_τ^{1/2}(ζ₁-ζ₂)] dζ₁dζ₂`
///   with `h_τ = 2t(r_τ + c/24)`, split into the diagonal bare pole (by
///   completeness of `S̲ S̲⁻¹`) plus regular tails.
pub fn curve_from_cohft(mf: &ModularFunctorData, t: &Rational, trunc_order: i64) -> Result<LocalSpectralCurve, TrError> {
    if t.is_zero() {
        return Err(TrError::ZeroCentralCharge);
    }
    let k = mf.k();
    let h: Vec<Scalar> = (0..k).map(|l| rat_to_scalar(&mf.h(t, l))).collect();
    let dis: Vec<Scalar> = (0..k).map(|l| mf.delta_inv_sqrt(l)).collect();

    let ct12 = t * &mf.c / crate::scalar::rat_int(12);
    let omega01: Vec<LaurentSeries<Scalar>> = if ct12.is_zero() {
        (0..k).map(|l| LaurentSeries::monomial(2, -dis[l], trunc_order)).collect()
    } else {
        let s = Scalar::new(rat_to_f64(&ct12), 0.0).sqrt();
        (0..k)
            .map(|l| {
                let mut w = LaurentSeries::zero_window(1, trunc_order);
                let mut pow = 1.0 / s; // s^{d-2} at d = 1
                let mut fact = Scalar::one();
                for d in 1..=trunc_order {
                    w.set_coeff(d, -dis[l] * pow / fact);
                    pow *= s;
                    fact *= d as f64;
                }
                w
            })
            .collect()
    };

    // tails of h·B(h^{1/2} δ) expanded in δ = ζ1 - ζ2:
    // coefficient of δ^{2m} is -(2m+1)/(2m+2)! h^{m+1}; monomial split
    // gives C(2m, d1)(-1)^{d2} at each (d1, d2) with d1 + d2 = 2m.
    let mut tail = vec![vec![BTreeMap::new(); k]; k];
    for l1 in 0..k {
        for l2 in 0..k {
            let map: &mut BTreeMap<(i64, i64), Scalar> = &mut tail[l1][l2];
            for m in 0..=trunc_order {
                let mut hsum = Scalar::zero();
                for tau in 0..k {
                    hsum += mf.s(l2, tau) * mf.s_inv(tau, l1) * h[tau].powu(m as u32 + 1);
                }
                if hsum.is_zero() {
                    continue;
                }
                let base = -rat_to_f64(
                    &(crate::scalar::rat_int(2 * m + 1) / crate::scalar::factorial(2 * m as u32 + 2)),
                );
                for d1 in 0..=(2 * m).min(trunc_order) {
                    let d2 = 2 * m - d1;
                    if d2 > trunc_order {
                        continue;
                    }
                    let sign = if d2 % 2 == 0 { 1.0 } else { -1.0 };
                    let binom = rat_to_f64(&crate::scalar::binomial(2 * m as u32, d1 as u32));
                    let c = hsum * base * sign * binom;
                    if c.norm() > 0.0 {
                        *map.entry((d1, d2)).or_default() += c;
                    }
                }
            }
        }
    }

    Ok(LocalSpectralCurve {
        k,
        omega01,
        double_pole: (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect(),
        tail,
        trunc_order,
        h: Some(h),
        delta_inv_sqrt: Some(dis),
    })
}

/// Recursion output: per channel tuple, a sparse tensor of coefficients on
/// the monomials `Π ζ_ℓ^{m_ℓ} dζ_ℓ` (negative degrees are pole terms).
#[derive(Clone, Debug)]
pub struct OmegaGN {
    pub g: u32,
    pub n: usize,
    pub trunc_order: i64,
    pub blocks: BTreeMap<Vec<usize>, BTreeMap<Vec<i64>, Scalar>>,
}

impl OmegaGN {
    pub fn coeff(&self, channels: &[usize], degrees: &[i64]) -> Scalar {
        self.blocks
            .get(channels)
            .and_then(|b| b.get(degrees))
            .copied()
            .unwrap_or_default()
    }

    /// Maximal entry modulus (for relative comparisons).
    pub fn max_norm(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|b| b.values())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest violation of simultaneous (channel, degree) leg permutation
    /// symmetry, checked against adjacent transpositions.
    pub fn symmetry_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (ch, block) in &self.blocks {
            for (deg, &v) in block {
                for i in 0..self.n.saturating_sub(1) {
                    let mut ch2 = ch.clone();
                    ch2.swap(i, i + 1);
                    let mut deg2 = deg.clone();
                    deg2.swap(i, i + 1);
                    dev = dev.max((v - self.coeff(&ch2, &deg2)).norm());
                }
            }
        }
        dev
    }
}

/// Series in the residue variable with coefficients indexed by the spectator
/// key (channels and degrees of the remaining legs).
type Bracket = BTreeMap<(Vec<usize>, Vec<i64>), LaurentSeries<Scalar>>;

/// Run the recursion on `curve` up to the target `(g, n)`.
pub fn tr_run(curve: &LocalSpectralCurve, g: u32, n: usize) -> Result<OmegaGN, TrError> {
    if 2 * g as i64 - 2 + n as i64 <= 0 || n == 0 {
        return Err(TrError::Unstable { g, n });
    }
    let mut memo: BTreeMap<(u32, usize), OmegaGN> = BTreeMap::new();
    let result = compute(curve, g, n, &mut memo)?;

    // post-hoc structure checks on the target
    let scale = result.max_norm().max(1.0);
    let sym = result.symmetry_deviation();
    if sym > 1e-7 * scale {
        return Err(TrError::AsymmetricOutput(sym));
    }
    let max_pole = 6 * g as i64 - 4 + 2 * n as i64;
    for block in result.blocks.values() {
        for (deg, v) in block {
            for (leg, &d) in deg.iter().enumerate() {
                if d < 0 && d.rem_euclid(2) == 1 && v.norm() > 1e-9 * scale {
                    return Err(TrError::OddPole(v.norm()));
                }
                if d < -max_pole && v.norm() > 1e-9 * scale {
                    return Err(TrError::DegreeOverflow { d, leg, bound: max_pole });
                }
            }
        }
    }
    Ok(result)
}

/// Run with automatic retries at doubled truncation when the order proves
/// insufficient (bounded retries).
pub fn tr_run_auto(
    build: impl Fn(i64) -> Result<LocalSpectralCurve, TrError>,
    g: u32,
    n: usize,
) -> Result<OmegaGN, TrError> {
    let mut trunc = default_trunc(g, n);
    let mut last = None;
    for _ in 0..3 {
        let curve = build(trunc)?;
        match tr_run(&curve, g, n) {
            Err(TrError::InsufficientTruncation { .. }) => {
                last = Some(tr_run(&curve, g, n).unwrap_err());
                trunc *= 2;
            }
            other => return other,
        }
    }
    Err(last.unwrap())
}

fn compute(curve: &LocalSpectralCurve, g: u32, n: usize, memo: &mut BTreeMap<(u32, usize), OmegaGN>) -> Result<OmegaGN, TrError> {
    if let Some(v) = memo.get(&(g, n)) {
        return Ok(v.clone());
    }
    let k = curve.k;
    let trunc = curve.trunc_order;
    let mut blocks: BTreeMap<Vec<usize>, BTreeMap<Vec<i64>, Scalar>> = BTreeMap::new();

    // sub-levels consumed by the bracket: ω_{g-1,n+1} (unless it is the
    // special ω_{0,2} diagonal evaluation) and the stable splitting factors
    if g >= 1 && !(g == 1 && n == 1) {
        compute(curve, g - 1, n + 1, memo)?;
    }
    for h in 0..=g {
        for jlen in 0..n {
            if h == 0 && jlen <= 1 {
                continue; // ω_{0,1} never occurs; ω_{0,2} legs are expanded inline
            }
            if h == g && jlen == n - 1 {
                continue; // the (g, I) and (0, ∅) halves are excluded
            }
            compute(curve, h, 1 + jlen, memo)?;
        }
    }

    for mu1 in 0..k {
        for i in 0..k {
            let kernel = kernel_series(curve, i, mu1, g, n)?;
            if kernel.is_empty() {
                continue;
            }
            let bracket = build_bracket(curve, i, g, n, memo)?;
            for ((rest_ch, rest_deg), series) in &bracket {
                for (q, kq) in &kernel {
                    let prod = kq.mul(series)?;
                    let res = prod.residue_coeff()?;
                    if res.is_zero() {
                        continue;
                    }
                    let mut ch = Vec::with_capacity(n);
                    ch.push(mu1);
                    ch.extend_from_slice(rest_ch);
                    let mut deg = Vec::with_capacity(n);
                    deg.push(*q);
                    deg.extend_from_slice(rest_deg);
                    *blocks.entry(ch).or_default().entry(deg).or_default() += res;
                }
            }
        }
    }

    // drop numerically empty entries
    let scale = blocks.values().flat_map(|b| b.values()).map(|v| v.norm()).fold(0.0, f64::max);
    let cutoff = 1e-14 * scale.max(1.0);
    for block in blocks.values_mut() {
        block.retain(|_, v| v.norm() > cutoff);
    }
    blocks.retain(|_, b| !b.is_empty());

    let out = OmegaGN { g, n, trunc_order: trunc, blocks };
    memo.insert((g, n), out.clone());
    Ok(out)
}

/// The kernel `K_i(z₁, z)` for output leg in channel `mu`: a list of
/// `(q, K^{(q)}(ζ))` with `K_i = Σ_q K^{(q)}(ζ) ζ₁^q`, where `ζ` is the
/// coordinate at the residue channel `i`.
///
/// `∫_{σz}^z ω_{0,2}(·, z₁)`: the bare part contributes
/// `2 Σ_{m even} ζ^{m+1} ζ₁^{-(m+2)}` (only when the pair carries a double
/// pole), the tail contributes `2 ζ^{d1+1}/(d1+1) ζ₁^{d2}` for even `d1`.
/// Dividing by `ω_{0,1}(z) − ω_{0,1}(σz) = 2·even(ω01_i)(ζ) dζ` and halving
/// gives the kernel.
fn kernel_series(curve: &LocalSpectralCurve, i: usize, mu: usize, g: u32, n: usize) -> Result<Vec<(i64, LaurentSeries<Scalar>)>, TrError> {
    let trunc = curve.trunc_order;
    let denom = curve.omega01[i].even_part().scale(&Scalar::new(2.0, 0.0));
    let inv = denom.invert(1e-13).map_err(|_| TrError::InsufficientTruncation { needed: 2, trunc })?;

    let max_pole = 6 * g as i64 - 4 + 2 * n as i64;
    let mut out = Vec::new();
    if curve.double_pole[i][mu] {
        let mut m = 0i64;
        while m + 2 <= max_pole {
            // numerator 2 ζ^{m+1}, times (1/2) and inv
            let num = LaurentSeries::monomial(m + 1, Scalar::one(), trunc + m + 1);
            out.push((-(m + 2), num.mul(&inv)?));
            m += 2;
        }
    }
    for q in 0..=trunc {
        let mut num = LaurentSeries::zero_to(trunc + 1);
        let mut any = false;
        let mut d1 = 0i64;
        while d1 <= trunc {
            let c = curve.tail_coeff(i, mu, d1, q);
            if !c.is_zero() {
                num.set_coeff(d1 + 1, c / (d1 as f64 + 1.0));
                any = true;
            }
            d1 += 2;
        }
        if any {
            out.push((q, num.mul(&inv)?));
        }
    }
    Ok(out)
}

/// Assemble the bracket `ω_{g-1,n+1}(z,σz,I) + Σ'_{h+h'=g, J⊔J'=I} ω_{h}(z,J) ω_{h'}(σz,J')`
/// as series in ζ at channel `i`, keyed by the spectator legs.
fn build_bracket(
    curve: &LocalSpectralCurve,
    i: usize,
    g: u32,
    n: usize,
    memo: &BTreeMap<(u32, usize), OmegaGN>,
) -> Result<Bracket, TrError> {
    let trunc = curve.trunc_order;
    let mut bracket: Bracket = BTreeMap::new();
    let rest = n - 1; // spectator legs

    let mut add = |key: (Vec<usize>, Vec<i64>), series: LaurentSeries<Scalar>| {
        bracket
            .entry(key)
            .and_modify(|s| *s = s.add(&series))
            .or_insert(series);
    };

    // term 1: ω_{g-1, n+1}(z, σz, I)
    if g >= 1 {
        if g == 1 && n == 1 {
            // ω_{0,2}(z, σz) = [-1/(4ζ²) − Σ (-1)^{d2} tail[i][i] ζ^{d1+d2}] (dζ)²
            let mut s = LaurentSeries::zero_window(-2, trunc);
            if curve.double_pole[i][i] {
                s.set_coeff(-2, Scalar::new(-0.25, 0.0));
            }
            for (&(d1, d2), &c) in &curve.tail[i][i] {
                let d = d1 + d2;
                if d > s.trunc_order() {
                    continue;
                }
                let sign = if d2 % 2 == 0 { -1.0 } else { 1.0 };
                let cur = s.coeff(d).unwrap();
                s.set_coeff(d, cur + sign * c);
            }
            add((vec![], vec![]), s);
        } else {
            // two-leg diagonal evaluation: coefficient of ζ^{a+b} summed over
            // entries; the convolution is complete only up to trunc − P where
            // P bounds the sub-level pole order
            let sub = memo.get(&(g - 1, n + 1)).expect("sub-level computed");
            let p_sub = (6 * (g as i64 - 1) - 4 + 2 * (n as i64 + 1)).max(2);
            let mut grouped: BTreeMap<(Vec<usize>, Vec<i64>), LaurentSeries<Scalar>> = BTreeMap::new();
            for (ch, block) in &sub.blocks {
                if ch[0] != i || ch[1] != i {
                    continue;
                }
                let rest_ch: Vec<usize> = ch[2..].to_vec();
                for (deg, &c) in block {
                    let (a, b) = (deg[0], deg[1]);
                    let sign = if (b + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let rest_deg: Vec<i64> = deg[2..].to_vec();
                    let entry = grouped
                        .entry((rest_ch.clone(), rest_deg))
                        .or_insert_with(|| LaurentSeries::zero_window(-2 * p_sub, trunc - p_sub));
                    if a + b <= entry.trunc_order() {
                        let cur = entry.coeff(a + b).unwrap();
                        entry.set_coeff(a + b, cur + c * sign);
                    }
                }
            }
            for (key, s) in grouped {
                add(key, s);
            }
        }
    }

    // term 2: stable splittings
    for h in 0..=g {
        let hp = g - h;
        for mask in 0..(1u32 << rest) {
            let j: Vec<usize> = (0..rest).filter(|b| mask & (1 << b) != 0).collect();
            let jp: Vec<usize> = (0..rest).filter(|b| mask & (1 << b) == 0).collect();
            if h == 0 && j.is_empty() {
                continue; // (0, ∅) excluded
            }
            if h == g && j.len() == rest {
                continue; // (g, I) excluded
            }
            // ω_{0,1} factors never occur: (h,|J|+1) = (0,1) only if j empty
            let fa = factor_terms(curve, i, h, &j, false, memo)?;
            if fa.is_empty() {
                continue;
            }
            let fb = factor_terms(curve, i, hp, &jp, true, memo)?;
            if fb.is_empty() {
                continue;
            }
            for (cha, dega, sa) in &fa {
                for (chb, degb, sb) in &fb {
                    // merge spectator keys by position
                    let mut ch = vec![usize::MAX; rest];
                    let mut deg = vec![i64::MIN; rest];
                    for (idx, &pos) in j.iter().enumerate() {
                        ch[pos] = cha[idx];
                        deg[pos] = dega[idx];
                    }
                    for (idx, &pos) in jp.iter().enumerate() {
                        ch[pos] = chb[idx];
                        deg[pos] = degb[idx];
                    }
                    add((ch, deg), sa.mul(sb)?);
                }
            }
        }
    }
    Ok(bracket)
}

/// The factor `ω_{h, 1+|legs|}(z or σz, legs)` as a list of
/// (spectator channels, spectator degrees, series in ζ).
#[allow(clippy::type_complexity)]
fn factor_terms(
    curve: &LocalSpectralCurve,
    i: usize,
    h: u32,
    legs: &[usize],
    at_sigma: bool,
    memo: &BTreeMap<(u32, usize), OmegaGN>,
) -> Result<Vec<(Vec<usize>, Vec<i64>, LaurentSeries<Scalar>)>, TrError> {
    let trunc = curve.trunc_order;
    let mut out = Vec::new();
    if h == 0 && legs.len() == 1 {
        // ω_{0,2}(z or σz, z_j): expansion in |ζ| < |ζ_j|
        for mu in 0..curve.k {
            // bare: Σ_k (k+1) ζ^k ζ_j^{-(k+2)}; at σz multiply by (-1)^{k+1}
            if curve.double_pole[i][mu] {
                for kk in 0..=trunc {
                    let mut c = Scalar::new(kk as f64 + 1.0, 0.0);
                    if at_sigma && (kk + 1) % 2 == 1 {
                        c = -c;
                    }
                    out.push((vec![mu], vec![-(kk + 2)], LaurentSeries::monomial(kk, c, trunc)));
                }
            }
            // tails
            let mut by_d2: BTreeMap<i64, LaurentSeries<Scalar>> = BTreeMap::new();
            for (&(d1, d2), &c) in &curve.tail[i][mu] {
                let mut val = c;
                if at_sigma && (d1 + 1) % 2 == 1 {
                    val = -val;
                }
                let entry = by_d2.entry(d2).or_insert_with(|| LaurentSeries::zero_to(trunc));
                let cur = entry.coeff(d1).unwrap();
                entry.set_coeff(d1, cur + val);
            }
            for (d2, s) in by_d2 {
                if !s.is_zero(0.0) {
                    out.push((vec![mu], vec![d2], s));
                }
            }
        }
        return Ok(out);
    }

    let sub = memo.get(&(h, 1 + legs.len())).expect("sub-level computed");
    let p_sub = (6 * h as i64 - 4 + 2 * (1 + legs.len()) as i64).max(2);
    for (ch, block) in &sub.blocks {
        if ch[0] != i {
            continue;
        }
        let rest_ch: Vec<usize> = ch[1..].to_vec();
        // collapse entries with equal spectator keys into one series
        let mut by_key: BTreeMap<Vec<i64>, LaurentSeries<Scalar>> = BTreeMap::new();
        for (deg, &c) in block {
            let a = deg[0];
            let mut val = c;
            if at_sigma && (a + 1).rem_euclid(2) == 1 {
                val = -val;
            }
            let rest_deg: Vec<i64> = deg[1..].to_vec();
            let entry = by_key.entry(rest_deg).or_insert_with(|| LaurentSeries::zero_window(-p_sub, trunc));
            if a <= entry.trunc_order() {
                let cur = entry.coeff(a).unwrap();
                entry.set_coeff(a, cur + val);
            }
        }
        for (deg, s) in by_key {
            out.push((rest_ch.clone(), deg, s));
        }
    }
    Ok(out)
}

/// Free energy `F_g = 1/(2-2g) Σ_i Res_{z→o_i} (∫_{o_i}^z ω_{0,1}) ω_{g,1}(z)`
/// for `g >= 2`; the primitive of `ω_{0,1}` is taken with zero constant.
pub fn free_energy(curve: &LocalSpectralCurve, g: u32) -> Result<Scalar, TrError> {
    if g < 2 {
        return Err(TrError::FreeEnergyGenus(g));
    }
    let omega_g1 = tr_run(curve, g, 1)?;
    let mut acc = Scalar::zero();
    for i in 0..curve.k {
        let phi = curve.omega01[i].primitive(1e-13)?;
        if let Some(block) = omega_g1.blocks.get(&vec![i]) {
            let mut s = LaurentSeries::zero_window(-(6 * g as i64 - 4 + 2), curve.trunc_order);
            for (deg, &c) in block {
                if deg[0] <= s.trunc_order() {
                    let cur = s.coeff(deg[0]).unwrap();
                    s.set_coeff(deg[0], cur + c);
                }
            }
            acc += phi.mul(&s)?.residue_coeff()?;
        }
    }
    Ok(acc / (2.0 - 2.0 * g as f64))
}

/// The Ξ forms of the curve, from its own ω_{0,2}:
/// `Ξ_{i,d}(z₀ ∈ U_μ) = δ_{iμ} (2d+1)!! ζ^{-(2d+2)} + (2d-1)!! Σ_{d₀} tail[i][μ][(2d, d₀)] ζ^{d₀}`.
/// Returns the series of `Ξ_{i,d}` on `U_μ` as `xi[i][d][μ]`.
pub fn xi_forms(curve: &LocalSpectralCurve, d_max: u32) -> Vec<Vec<Vec<LaurentSeries<Scalar>>>> {
    let k = curve.k;
    (0..k)
        .map(|i| {
            (0..=d_max)
                .map(|d| {
                    (0..k)
                        .map(|mu| {
                            let pole = 2 * d as i64 + 2;
                            let mut s = LaurentSeries::zero_window(-pole, curve.trunc_order);
                            if i == mu && curve.double_pole[i][mu] {
                                s.set_coeff(-pole, rat_to_scalar(&double_factorial_odd(2 * d as i64 + 1)));
                            }
                            let dfac = rat_to_scalar(&double_factorial_odd(2 * d as i64 - 1));
                            for d0 in 0..=curve.trunc_order {
                                let c = curve.tail_coeff(i, mu, 2 * d as i64, d0);
                                if !c.is_zero() {
                                    let cur = s.coeff(d0).unwrap();
                                    s.set_coeff(d0, cur + dfac * c);
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Decompose recursion output on the Ξ basis. The coefficients are read off
/// the principal parts (triangularity: the `ζ^{-(2d+2)}` coefficient divided
/// by `(2d+1)!!`), then the full forms are re-synthesized from the
/// coefficients and the Ξ tails and compared against `omega` — a mismatch
/// above tolerance means the curve and decomposition are inconsistent.
pub fn xi_decompose(omega: &OmegaGN, curve: &LocalSpectralCurve, tol: Tolerance) -> Result<CorrelatorTensor, TrError> {
    let (g, n) = (omega.g, omega.n);
    let dim = 3 * g as i64 - 3 + n as i64;
    let scale = omega.max_norm().max(1.0);

    // extract coefficients from all-polar keys; the output is symmetric, so
    // read each coefficient from the canonically ordered representative only
    let mut tensor = CorrelatorTensor::new(g, n);
    for (ch, block) in &omega.blocks {
        for (deg, &v) in block {
            if !deg.iter().all(|&d| d < 0) {
                continue;
            }
            if deg.iter().any(|&d| d.rem_euclid(2) == 1) {
                continue; // odd poles were already asserted small
            }
            let ds: Vec<u32> = deg.iter().map(|&d| ((-d - 2) / 2) as u32).collect();
            let total: i64 = ds.iter().map(|&d| d as i64).sum();
            if total > dim {
                if v.norm() > tol.abs.max(1e-9 * scale) {
                    return Err(TrError::DegreeOverflow { d: deg[0], leg: 0, bound: dim });
                }
                continue;
            }
            let key: Vec<(usize, u32)> = ch.iter().copied().zip(ds.iter().copied()).collect();
            let mut sorted = key.clone();
            sorted.sort_unstable();
            if key != sorted {
                continue;
            }
            let mut c = v;
            for &d in &ds {
                c /= rat_to_scalar(&double_factorial_odd(2 * d as i64 + 1));
            }
            tensor.set(&key, c);
        }
    }

    // re-synthesize and compare
    let d_max = (dim as u32).min(127);
    let xi = xi_forms(curve, d_max);
    let mut resynth: BTreeMap<Vec<usize>, BTreeMap<Vec<i64>, Scalar>> = BTreeMap::new();
    for (key, &c) in tensor.iter() {
        // expand the symmetrized key over distinct permutations
        for perm in distinct_permutations(key) {
            let mut partial: Vec<(Vec<usize>, Vec<i64>, Scalar)> = vec![(vec![], vec![], c)];
            for &(i, d) in &perm {
                let mut next = Vec::new();
                for (chs, degs, w) in &partial {
                    for mu in 0..curve.k {
                        let s = &xi[i][d as usize][mu];
                        for (dd, coef) in s.terms() {
                            let mut chs2 = chs.clone();
                            chs2.push(mu);
                            let mut degs2 = degs.clone();
                            degs2.push(dd);
                            next.push((chs2, degs2, w * coef));
                        }
                    }
                }
                partial = next;
            }
            for (chs, degs, w) in partial {
                if w.is_zero() {
                    continue;
                }
                *resynth.entry(chs).or_default().entry(degs).or_default() += w;
            }
        }
    }
    let mut dev: f64 = 0.0;
    let keys: std::collections::BTreeSet<(Vec<usize>, Vec<i64>)> = omega
        .blocks
        .iter()
        .flat_map(|(ch, b)| b.keys().map(move |d| (ch.clone(), d.clone())))
        .chain(resynth.iter().flat_map(|(ch, b)| b.keys().map(move |d| (ch.clone(), d.clone()))))
        .collect();
    for (ch, deg) in keys {
        if deg.iter().any(|&d| d < 0 && d.rem_euclid(2) == 1) {
            continue;
        }
        if deg.iter().any(|&d| d > omega.trunc_order - 2) {
            continue; // beyond validated truncation of the resynthesis
        }
        let a = omega.coeff(&ch, &deg);
        let b = resynth.get(&ch).and_then(|m| m.get(&deg)).copied().unwrap_or_default();
        dev = dev.max((a - b).norm());
    }
    if dev > scale * tol.rel.max(1e-8) {
        return Err(TrError::TailMismatch(dev));
    }
    Ok(tensor)
}

fn distinct_permutations(key: &[(usize, u32)]) -> Vec<Vec<(usize, u32)>> {
    fn go(items: &mut Vec<(usize, u32)>, k: usize, out: &mut Vec<Vec<(usize, u32)>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        let mut seen = std::collections::BTreeSet::new();
        for i in k..items.len() {
            if !seen.insert(items[i]) {
                continue;
            }
            items.swap(k, i);
            go(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut items = key.to_vec();
    let mut out = Vec::new();
    go(&mut items, 0, &mut out);
    out
}

//! Stable graphs and the Givental graph sum.
//!
//! The CohFT of a modular functor is reconstructed from its degree-0 part by
//! a diagonal R-matrix and a unit-direction translation:
//!
//! * R-matrix, diagonal in the e-basis: `R(u) = Σ_λ e^{u h_λ/2} id_{e_λ}`
//!   with `h_λ = 2t(r_λ + c/24)`;
//! * leg series in the orthonormal basis:
//!   `L[λ,τ](u) = Σ_μ S̲_{λμ} (S̲⁻¹)_{μτ} e^{u h_μ/2}`;
//! * edge series `B[λ₁λ₂;d₁d₂] = -Σ_τ S̲_{λ₂τ}(S̲⁻¹)_{τλ₁}
//!   (h_τ/2)^{d₁+d₂+1}/(d₁+d₂+1)! · C(d₁+d₂,d₁)`;
//! * translation `T[τ;k] = -Δ_τ^{-1/2} (tc/24)^{k-1}/(k-1)!` for `k >= 2`.
//!
//! An integral `∫ Ω*_{g,n}(...) Π ψ_i^{d_i}` is the sum over stable graphs of
//! topology (g,n): per graph, sum over a channel per vertex, a psi-degree per
//! half-edge and leg, and any number of degree->=2 dilaton leaves per vertex
//! weighted 1/m!; the vertex factor is
//! `Δ_τ^{g_v-1+(n_v+m_v)/2} <tau_{degrees}>_{g_v}`, and the whole graph is
//! divided by its automorphism order.
//!
//! External marked points admit two couplings. With [`LegKind::Raw`] the
//! input's channel weight couples directly to the vertex; these are the
//! coefficients the recursion output decomposes into on its Ξ basis (the
//! basis absorbs the R-matrix series at external points), and the default
//! for [`cohft_integral`]. With [`LegKind::Dressed`] the input is acted on
//! by the leg series first, giving the R-dressed correlator normalization.

use crate::frobenius::ModularFunctorData;
use crate::intersect;
use crate::scalar::{binomial, factorial, rat_to_scalar, Rational, Scalar};
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CohftError {
    #[error("unstable topology: g={g}, n={n}")]
    Unstable { g: u32, n: usize },
    #[error("psi-degrees sum to {total}, above the dimension 3g-3+n = {dim}")]
    DegreeOverflow { total: i64, dim: i64 },
    #[error("graph enumeration supported up to 2g-2+n = 8, got {0}")]
    TooLarge(i64),
    #[error("n = 0 graph sums are only defined for g >= 2")]
    ZeroPoints,
}

/// A stable graph of topology (g, n): decorated vertices, an edge multiset
/// (loops allowed) and the automorphism order fixing legs pointwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableGraph {
    pub genera: Vec<u32>,
    /// legs carried by each vertex (leg ids 0..n-1, each exactly once)
    pub legs: Vec<Vec<usize>>,
    /// symmetric multiplicity matrix; diagonal counts self-loops
    pub edges: Vec<Vec<u32>>,
    pub aut_order: u64,
}

impl StableGraph {
    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    /// Valency of vertex v: legs + half-edges (loops count twice).
    pub fn valency(&self, v: usize) -> usize {
        let half: u32 = (0..self.num_vertices()).map(|w| if w == v { 2 * self.edges[v][v] } else { self.edges[v][w] }).sum();
        self.legs[v].len() + half as usize
    }

    /// List of edges as (u, v) pairs with multiplicity expanded, u <= v.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.num_vertices() {
            for v in u..self.num_vertices() {
                for _ in 0..self.edges[u][v] {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// All stable graphs of topology (g, n), complete and duplicate-free up to
/// isomorphism fixing legs pointwise.
pub fn stable_graphs(g: u32, n: usize) -> Result<Vec<StableGraph>, CohftError> {
    let weight = 2 * g as i64 - 2 + n as i64;
    if weight <= 0 {
        return Err(CohftError::Unstable { g, n });
    }
    if weight > 8 {
        return Err(CohftError::TooLarge(weight));
    }

    let mut out: Vec<StableGraph> = Vec::new();
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();

    for nv in 1..=weight as usize {
        // per-vertex weights w_v = 2g_v - 2 + n_v >= 1 summing to the total
        for weights in compositions_at_least_one(weight as usize, nv) {
            // vertex genera: n_v = w_v + 2 - 2 g_v >= 0
            for genera in genus_choices(&weights, g) {
                let slots: Vec<usize> = weights.iter().zip(&genera).map(|(&w, &gv)| w + 2 - 2 * gv as usize).collect();
                // distribute legs
                for leg_assign in leg_assignments(n, nv) {
                    let legs_per: Vec<Vec<usize>> = {
                        let mut v = vec![Vec::new(); nv];
                        for (leg, &vert) in leg_assign.iter().enumerate() {
                            v[vert].push(leg);
                        }
                        v
                    };
                    let mut half: Vec<i64> = Vec::with_capacity(nv);
                    let mut ok = true;
                    for v in 0..nv {
                        let h = slots[v] as i64 - legs_per[v].len() as i64;
                        if h < 0 {
                            ok = false;
                            break;
                        }
                        half.push(h);
                    }
                    if !ok {
                        continue;
                    }
                    let total_half: i64 = half.iter().sum();
                    if total_half % 2 != 0 {
                        continue;
                    }
                    let num_edges = total_half / 2;
                    // rank H1 = E - V + 1 must equal g - sum g_v
                    let sum_g: u32 = genera.iter().sum();
                    if num_edges - nv as i64 + 1 != (g - sum_g) as i64 {
                        continue;
                    }
                    for em in edge_matrices(&half) {
                        if !connected(&em) {
                            continue;
                        }
                        let key = canonical_key(&genera, &legs_per, &em);
                        if !seen.insert(key) {
                            continue;
                        }
                        let aut = automorphism_order(&genera, &legs_per, &em);
                        out.push(StableGraph { genera: genera.clone(), legs: legs_per.clone(), edges: em, aut_order: aut });
                    }
                }
            }
        }
    }
    out.sort_by_key(|g| canonical_key(&g.genera, &g.legs, &g.edges));
    Ok(out)
}

fn compositions_at_least_one(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            if total >= 1 {
                cur.push(total);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for w in 1..=total.saturating_sub(parts - 1) {
            cur.push(w);
            go(total - w, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, parts, &mut Vec::new(), &mut out);
    out
}

fn genus_choices(weights: &[usize], g: u32) -> Vec<Vec<u32>> {
    fn go(weights: &[usize], g: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == weights.len() {
            out.push(cur.clone());
            return;
        }
        let max_g = ((weights[i] + 2) / 2).min(g as usize - cur.iter().sum::<u32>() as usize);
        for gv in 0..=max_g as u32 {
            cur.push(gv);
            go(weights, g, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(weights, g, 0, &mut Vec::new(), &mut out);
    out
}

fn leg_assignments(n: usize, nv: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for cur in &out {
            for v in 0..nv {
                let mut c = cur.clone();
                c.push(v);
                next.push(c);
            }
        }
        out = next;
    }
    out
}

/// Symmetric multiplicity matrices with prescribed half-edge counts
/// (diagonal entries consume two half-edges).
fn edge_matrices(half: &[i64]) -> Vec<Vec<Vec<u32>>> {
    let nv = half.len();
    let cells: Vec<(usize, usize)> = (0..nv).flat_map(|u| (u..nv).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    let mut m = vec![vec![0u32; nv]; nv];
    fn go(
        cells: &[(usize, usize)],
        i: usize,
        rem: &mut Vec<i64>,
        m: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        if i == cells.len() {
            if rem.iter().all(|&r| r == 0) {
                out.push(m.clone());
            }
            return;
        }
        let (u, v) = cells[i];
        let max = if u == v { rem[u] / 2 } else { rem[u].min(rem[v]) };
        for k in 0..=max {
            let cost = if u == v { 2 * k } else { k };
            rem[u] -= cost;
            if u != v {
                rem[v] -= k;
            }
            m[u][v] = k as u32;
            m[v][u] = k as u32;
            // once every cell touching u has been decided, row u must be saturated
            let row_u_done = v == rem.len() - 1;
            if !row_u_done || rem[u] == 0 {
                go(cells, i + 1, rem, m, out);
            }
            m[u][v] = 0;
            m[v][u] = 0;
            rem[u] += cost;
            if u != v {
                rem[v] += k;
            }
        }
    }
    let mut rem = half.to_vec();
    go(&cells, 0, &mut rem, &mut m, &mut out);
    out
}

fn connected(edges: &[Vec<u32>]) -> bool {
    let nv = edges.len();
    if nv == 0 {
        return false;
    }
    let mut seen = vec![false; nv];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..nv {
            if !seen[v] && (edges[u][v] > 0 || edges[v][u] > 0) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn serialize(genera: &[u32], legs: &[Vec<usize>], edges: &[Vec<u32>], perm: &[usize]) -> Vec<u64> {
    let nv = genera.len();
    let mut key = Vec::new();
    for v in 0..nv {
        key.push(genera[perm[v]] as u64);
        let mut l = legs[perm[v]].clone();
        l.sort_unstable();
        key.push(l.len() as u64);
        key.extend(l.iter().map(|&x| x as u64));
    }
    for u in 0..nv {
        for v in u..nv {
            key.push(edges[perm[u]][perm[v]] as u64);
        }
    }
    key
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn canonical_key(genera: &[u32], legs: &[Vec<usize>], edges: &[Vec<u32>]) -> Vec<u64> {
    all_permutations(genera.len())
        .into_iter()
        .map(|p| serialize(genera, legs, edges, &p))
        .min()
        .expect("at least one permutation")
}

/// |Aut| = (#vertex permutations preserving genus, legs and edge matrix)
///         × Π_{bundles} m!  × 2^{#loops}.
fn automorphism_order(genera: &[u32], legs: &[Vec<usize>], edges: &[Vec<u32>]) -> u64 {
    let nv = genera.len();
    let id = serialize(genera, legs, edges, &(0..nv).collect::<Vec<_>>());
    let vertex_perms = all_permutations(nv)
        .into_iter()
        .filter(|p| serialize(genera, legs, edges, p) == id)
        .count() as u64;
    let mut factor = 1u64;
    let mut loops = 0u32;
    for u in 0..nv {
        for v in u..nv {
            let m = edges[u][v] as u64;
            for j in 2..=m {
                factor *= j;
            }
            if u == v {
                loops += edges[u][v];
            }
        }
    }
    vertex_perms * factor * (1u64 << loops)
}

/// Precomputed Givental action data: leg, edge and translation coefficient
/// tables together with the canonical-basis norms. Built either from modular
/// functor data ([`GiventalData::from_mf`]) or from raw tables (synthetic
/// CohFTs in tests).
#[derive(Clone, Debug)]
pub struct GiventalData {
    pub k: usize,
    pub max_deg: usize,
    pub delta_inv_sqrt: Vec<Scalar>,
    /// leg[λ][τ][d]
    pub leg: Vec<Vec<Vec<Scalar>>>,
    /// edge[τ1][τ2][d1][d2]
    pub edge: Vec<Vec<Vec<Vec<Scalar>>>>,
    /// trans[τ][k] for k = 0..=max_deg (entries below k=2 are zero)
    pub trans: Vec<Vec<Scalar>>,
}

impl GiventalData {
    pub fn from_mf(mf: &ModularFunctorData, t: &Rational, max_deg: usize) -> Self {
        let k = mf.k();
        let h: Vec<Scalar> = (0..k).map(|l| rat_to_scalar(&mf.h(t, l))).collect();
        let delta_inv_sqrt: Vec<Scalar> = (0..k).map(|l| mf.delta_inv_sqrt(l)).collect();

        let mut leg = vec![vec![vec![Scalar::zero(); max_deg + 1]; k]; k];
        for l in 0..k {
            for tau in 0..k {
                for d in 0..=max_deg {
                    let mut acc = Scalar::zero();
                    for m in 0..k {
                        acc += mf.s(l, m) * mf.s_inv(m, tau) * (h[m] / 2.0).powu(d as u32);
                    }
                    leg[l][tau][d] = acc / rat_to_scalar(&factorial(d as u32));
                }
            }
        }

        let mut edge = vec![vec![vec![vec![Scalar::zero(); max_deg + 1]; max_deg + 1]; k]; k];
        for l1 in 0..k {
            for l2 in 0..k {
                for d1 in 0..=max_deg {
                    for d2 in 0..=max_deg {
                        let kk = (d1 + d2) as u32;
                        let mut acc = Scalar::zero();
                        for tau in 0..k {
                            acc += mf.s(l2, tau) * mf.s_inv(tau, l1) * (h[tau] / 2.0).powu(kk + 1);
                        }
                        let w = rat_to_scalar(&(binomial(kk, d1 as u32) / factorial(kk + 1)));
                        edge[l1][l2][d1][d2] = -acc * w;
                    }
                }
            }
        }

        // T[τ;k] = -Δ_τ^{-1/2} (tc/24)^{k-1}/(k-1)!, and tc/24 = h_1/2
        let tc24 = h[0] / 2.0;
        let mut trans = vec![vec![Scalar::zero(); max_deg + 1]; k];
        for (tau, row) in trans.iter_mut().enumerate() {
            for (kk, slot) in row.iter_mut().enumerate().take(max_deg + 1).skip(2) {
                *slot = -delta_inv_sqrt[tau] * tc24.powu(kk as u32 - 1) / rat_to_scalar(&factorial(kk as u32 - 1));
            }
        }

        GiventalData { k, max_deg, delta_inv_sqrt, leg, edge, trans }
    }

    pub fn delta(&self, tau: usize) -> Scalar {
        1.0 / (self.delta_inv_sqrt[tau] * self.delta_inv_sqrt[tau])
    }

    /// Half-integer powers of Δ_τ: `Δ^{p/2}` via the stored sign convention
    /// for `Δ^{-1/2}`.
    fn delta_half_pow(&self, tau: usize, p: i64) -> Scalar {
        let inv_sqrt = self.delta_inv_sqrt[tau];
        if p >= 0 {
            (1.0 / inv_sqrt).powi(p as i32)
        } else {
            inv_sqrt.powi(-p as i32)
        }
    }
}

/// u^d coefficient of the leg series `L[λ,τ](u) = Σ_μ S̲_{λμ}(S̲⁻¹)_{μτ} e^{u h_μ/2}`
/// (the R-matrix elements in the orthonormal basis, used by
/// [`LegKind::Dressed`] legs). Reduces to `δ_{λτ} δ_{d0}` at t = 0.
pub fn leg_coeff(mf: &ModularFunctorData, t: &Rational, l: usize, tau: usize, d: usize) -> Scalar {
    let k = mf.k();
    let mut acc = Scalar::zero();
    for m in 0..k {
        let h = rat_to_scalar(&mf.h(t, m));
        acc += mf.s(l, m) * mf.s_inv(m, tau) * (h / 2.0).powu(d as u32);
    }
    acc / rat_to_scalar(&factorial(d as u32))
}

/// Edge coefficient `B[λ₁λ₂; d₁d₂]`; symmetric under `(λ₁,d₁) <-> (λ₂,d₂)`.
pub fn edge_coeff(mf: &ModularFunctorData, t: &Rational, l1: usize, l2: usize, d1: usize, d2: usize) -> Scalar {
    let k = mf.k();
    let kk = (d1 + d2) as u32;
    let mut acc = Scalar::zero();
    for tau in 0..k {
        let h = rat_to_scalar(&mf.h(t, tau));
        acc += mf.s(l2, tau) * mf.s_inv(tau, l1) * (h / 2.0).powu(kk + 1);
    }
    -acc * rat_to_scalar(&(binomial(kk, d1 as u32) / factorial(kk + 1)))
}

/// Translation coefficient `T[τ;k] = -Δ_τ^{-1/2} (tc/24)^{k-1}/(k-1)!`, k >= 2.
pub fn translation_coeff(mf: &ModularFunctorData, t: &Rational, tau: usize, k: usize) -> Scalar {
    assert!(k >= 2, "translation starts at u^2");
    let tc24 = rat_to_scalar(&(t * &mf.c / crate::scalar::rat_int(24)));
    -mf.delta_inv_sqrt(tau) * tc24.powu(k as u32 - 1) / rat_to_scalar(&factorial(k as u32 - 1))
}

/// `∫ Ω*_{g,n}(ε̲_{λ_1} ⊗ ... ⊗ ε̲_{λ_n}) Π ψ_i^{d_i}` for orthonormal inputs.
pub fn cohft_integral(
    mf: &ModularFunctorData,
    t: &Rational,
    g: u32,
    channels: &[usize],
    degrees: &[u32],
) -> Result<Scalar, CohftError> {
    let inputs: Vec<Vec<Scalar>> = channels
        .iter()
        .map(|&c| {
            let mut v = vec![Scalar::zero(); mf.k()];
            v[c] = Scalar::new(1.0, 0.0);
            v
        })
        .collect();
    let max_deg = (3 * g as usize + degrees.len() + 3).max(8);
    let gd = GiventalData::from_mf(mf, t, max_deg);
    cohft_integral_vec(&gd, g, &inputs, degrees)
}

/// How a marked point couples to its vertex: ordinary inputs are acted on
/// by the R-matrix leg series; raw insertions couple their channel-τ weight
/// directly (translation-style), as the dilaton-leaf classes do.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LegKind {
    Dressed,
    Raw,
}

/// Graph-sum evaluation with arbitrary input vectors in the orthonormal
/// basis (each `inputs[i]` has K components). External inputs couple raw:
/// these are exactly the coefficients produced by decomposing the recursion
/// output on the Ξ basis (the basis absorbs the R-matrix series on external
/// points). R-dressed integrals are available via [`cohft_integral_kinds`]
/// with [`LegKind::Dressed`].
pub fn cohft_integral_vec(
    gd: &GiventalData,
    g: u32,
    inputs: &[Vec<Scalar>],
    degrees: &[u32],
) -> Result<Scalar, CohftError> {
    cohft_integral_kinds(gd, g, inputs, degrees, &vec![LegKind::Raw; inputs.len()])
}

/// Graph sum with per-leg coupling kinds (see [`LegKind`]).
pub fn cohft_integral_kinds(
    gd: &GiventalData,
    g: u32,
    inputs: &[Vec<Scalar>],
    degrees: &[u32],
    kinds: &[LegKind],
) -> Result<Scalar, CohftError> {
    let n = inputs.len();
    assert_eq!(n, degrees.len());
    assert_eq!(n, kinds.len());
    if n == 0 && g < 2 {
        return Err(CohftError::ZeroPoints);
    }
    let dim = 3 * g as i64 - 3 + n as i64;
    let total: i64 = degrees.iter().map(|&d| d as i64).sum();
    if total > dim {
        return Err(CohftError::DegreeOverflow { total, dim });
    }
    let graphs = stable_graphs(g, n)?;
    let mut acc = Scalar::zero();
    for graph in &graphs {
        acc += graph_value(gd, graph, inputs, degrees, kinds) / graph.aut_order as f64;
    }
    Ok(acc)
}

fn graph_value(gd: &GiventalData, graph: &StableGraph, inputs: &[Vec<Scalar>], degrees: &[u32], kinds: &[LegKind]) -> Scalar {
    let nv = graph.num_vertices();
    let edge_list = graph.edge_list();
    let k = gd.k;

    // per-vertex dimension bound 3g_v - 3 + n_v for single psi degrees
    let vertex_dim: Vec<i64> = (0..nv).map(|v| 3 * graph.genera[v] as i64 - 3 + graph.valency(v) as i64).collect();

    let mut total = Scalar::zero();
    let mut channels = vec![0usize; nv];
    loop {
        // enumerate half-edge degree assignments per edge
        let value = edge_degree_sum(gd, graph, &edge_list, &channels, &vertex_dim, inputs, degrees, kinds);
        total += value;

        // advance channel assignment
        let mut i = 0;
        loop {
            if i == nv {
                return total;
            }
            channels[i] += 1;
            if channels[i] < k {
                break;
            }
            channels[i] = 0;
            i += 1;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn edge_degree_sum(
    gd: &GiventalData,
    graph: &StableGraph,
    edge_list: &[(usize, usize)],
    channels: &[usize],
    vertex_dim: &[i64],
    inputs: &[Vec<Scalar>],
    degrees: &[u32],
    kinds: &[LegKind],
) -> Scalar {
    let nv = graph.num_vertices();
    // recursive enumeration over per-edge half-degrees
    #[allow(clippy::too_many_arguments)]
    fn go(
        gd: &GiventalData,
        graph: &StableGraph,
        edge_list: &[(usize, usize)],
        channels: &[usize],
        vertex_dim: &[i64],
        inputs: &[Vec<Scalar>],
        degrees: &[u32],
        kinds: &[LegKind],
        e: usize,
        used: &mut Vec<i64>,
        half_degrees: &mut Vec<(u32, u32)>,
        weight: Scalar,
    ) -> Scalar {
        if weight.is_zero() {
            return Scalar::zero();
        }
        if e == edge_list.len() {
            // per-vertex leg/dilaton sums factorize over vertices
            let mut acc = weight;
            for v in 0..graph.num_vertices() {
                // degrees at half-edges of v
                let mut base: Vec<u32> = Vec::new();
                for (i, &(a, b)) in edge_list.iter().enumerate() {
                    if a == v {
                        base.push(half_degrees[i].0);
                    }
                    if b == v {
                        base.push(half_degrees[i].1);
                    }
                }
                acc *= vertex_sum(gd, graph.genera[v], channels[v], &graph.legs[v], &base, inputs, degrees, kinds);
                if acc.is_zero() {
                    return Scalar::zero();
                }
            }
            return acc;
        }
        let (u, v) = edge_list[e];
        let (tu, tv) = (channels[u], channels[v]);
        let max_u = (vertex_dim[u] - used[u]).max(0) as u32;
        let mut acc = Scalar::zero();
        for du in 0..=max_u.min(gd.max_deg as u32) {
            used[u] += du as i64;
            let max_v = (vertex_dim[v] - used[v]).max(0) as u32;
            for dv in 0..=max_v.min(gd.max_deg as u32) {
                let b = gd.edge[tu][tv][du as usize][dv as usize];
                if !b.is_zero() {
                    used[v] += dv as i64;
                    half_degrees.push((du, dv));
                    acc += go(gd, graph, edge_list, channels, vertex_dim, inputs, degrees, kinds, e + 1, used, half_degrees, weight * b);
                    half_degrees.pop();
                    used[v] -= dv as i64;
                }
            }
            used[u] -= du as i64;
        }
        acc
    }

    let mut used = vec![0i64; nv];
    let mut half_degrees = Vec::new();
    go(gd, graph, edge_list, channels, vertex_dim, inputs, degrees, kinds, 0, &mut used, &mut half_degrees, Scalar::new(1.0, 0.0))
}

/// Sum over leg R-orders and dilaton leaves at one vertex with channel `tau`.
#[allow(clippy::too_many_arguments)]
fn vertex_sum(
    gd: &GiventalData,
    genus: u32,
    tau: usize,
    legs: &[usize],
    half_edge_degrees: &[u32],
    inputs: &[Vec<Scalar>],
    degrees: &[u32],
    kinds: &[LegKind],
) -> Scalar {
    let base_dim = 3 * genus as i64 - 3 + (legs.len() + half_edge_degrees.len()) as i64;
    let used: i64 = half_edge_degrees.iter().map(|&d| d as i64).sum();

    #[allow(clippy::too_many_arguments)]
    fn legs_rec(
        gd: &GiventalData,
        genus: u32,
        tau: usize,
        legs: &[usize],
        li: usize,
        psi: &mut Vec<u32>,
        rem: i64,
        inputs: &[Vec<Scalar>],
        degrees: &[u32],
        kinds: &[LegKind],
        weight: Scalar,
        out: &mut Scalar,
    ) {
        if li == legs.len() {
            *out += weight * dilaton_sum(gd, genus, tau, psi, rem);
            return;
        }
        let leg = legs[li];
        let d_ext = degrees[leg];
        if kinds[leg] == LegKind::Raw {
            // translation-style coupling: channel weight, no R-series
            let lw = inputs[leg][tau];
            if !lw.is_zero() {
                psi.push(d_ext);
                legs_rec(gd, genus, tau, legs, li + 1, psi, rem, inputs, degrees, kinds, weight * lw, out);
                psi.pop();
            }
            return;
        }
        for a in 0..=rem.min(gd.max_deg as i64 - d_ext as i64) {
            // contraction of the input vector with the leg table
            let mut lw = Scalar::zero();
            for (l, x) in inputs[leg].iter().enumerate() {
                if !x.is_zero() {
                    lw += x * gd.leg[l][tau][a as usize];
                }
            }
            if lw.is_zero() {
                continue;
            }
            psi.push(d_ext + a as u32);
            legs_rec(gd, genus, tau, legs, li + 1, psi, rem - a, inputs, degrees, kinds, weight * lw, out);
            psi.pop();
        }
    }

    let mut out = Scalar::zero();
    let mut psi: Vec<u32> = half_edge_degrees.to_vec();
    let rem0 = base_dim - used - legs.iter().map(|&l| degrees[l] as i64).sum::<i64>();
    if rem0 < 0 {
        return Scalar::zero();
    }
    legs_rec(gd, genus, tau, legs, 0, &mut psi, rem0, inputs, degrees, kinds, Scalar::new(1.0, 0.0), &mut out);
    out
}

/// Σ over m >= 0 dilaton leaves with degrees k_j >= 2 filling the remaining
/// dimension `rem` (each leaf raises the dimension by one), weighted 1/m!.
fn dilaton_sum(gd: &GiventalData, genus: u32, tau: usize, psi: &[u32], rem: i64) -> Scalar {
    let nv = psi.len();
    let mut acc = Scalar::zero();
    // m = 0: dimension must already match (rem = 0)
    if rem == 0 {
        let v = intersect_value(genus, psi);
        if !v.is_zero() {
            acc += gd.delta_half_pow(tau, 2 * (genus as i64 - 1) + nv as i64) * v;
        }
    }
    // m >= 1: compositions of rem + m into m parts >= 2
    let max_m = rem;
    for m in 1..=max_m {
        let target = rem + m;
        let mut ks = Vec::with_capacity(m as usize);
        let inv_mfact = rat_to_scalar(&(Rational::from_integer(1.into()) / factorial(m as u32)));
        dilaton_rec(gd, genus, tau, psi, target, m as usize, &mut ks, inv_mfact, Scalar::new(1.0, 0.0), &mut acc);
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn dilaton_rec(
    gd: &GiventalData,
    genus: u32,
    tau: usize,
    psi: &[u32],
    target: i64,
    m: usize,
    ks: &mut Vec<u32>,
    inv_mfact: Scalar,
    weight: Scalar,
    acc: &mut Scalar,
) {
    if m == 0 {
        if target != 0 {
            return;
        }
        let mut all: Vec<u32> = psi.to_vec();
        all.extend_from_slice(ks);
        let v = intersect_value(genus, &all);
        if v.is_zero() {
            return;
        }
        let p = 2 * (genus as i64 - 1) + (psi.len() + ks.len()) as i64;
        *acc += weight * inv_mfact * gd.delta_half_pow(tau, p) * v;
        return;
    }
    // each remaining part needs at least 2
    let hi = target - 2 * (m as i64 - 1);
    for k in 2..=hi.min(gd.max_deg as i64) {
        let t = gd.trans[tau][k as usize];
        if t.is_zero() {
            continue;
        }
        ks.push(k as u32);
        dilaton_rec(gd, genus, tau, psi, target - k, m - 1, ks, inv_mfact, weight * t, acc);
        ks.pop();
    }
}

fn intersect_value(genus: u32, degrees: &[u32]) -> Scalar {
    match intersect::psi_intersection(genus, degrees) {
        Ok(v) => Scalar::new(v.to_f64().unwrap_or(0.0), 0.0),
        Err(_) => Scalar::zero(),
    }
}

/// Unit vector `1 = Σ_τ Δ_τ^{-1/2} ε̲_τ` in orthonormal components.
pub fn unit_vector(gd: &GiventalData) -> Vec<Scalar> {
    gd.delta_inv_sqrt.clone()
}

/// Translation vector `T_k` in orthonormal components.
pub fn translation_vector(gd: &GiventalData, k: usize) -> Vec<Scalar> {
    (0..gd.k).map(|tau| gd.trans[tau][k]).collect()
}

/// Deviation in the generalized dilaton identity
/// `(2g-2+n) ∫ Ω*_{g,n}(·) = ∫ Ω*_{g,n+1}(· ⊗ 1) ψ_{n+1}
///  − Σ_k ∫ Ω*_{g,n+1}(· ⊗ T_k) ψ_{n+1}^k`.
pub fn dilaton_identity_check(
    mf: &ModularFunctorData,
    t: &Rational,
    g: u32,
    channels: &[usize],
) -> Result<f64, CohftError> {
    let n = channels.len();
    let max_deg = (3 * g as usize + n + 4).max(8);
    let gd = GiventalData::from_mf(mf, t, max_deg);
    let inputs: Vec<Vec<Scalar>> = channels
        .iter()
        .map(|&c| {
            let mut v = vec![Scalar::zero(); mf.k()];
            v[c] = Scalar::new(1.0, 0.0);
            v
        })
        .collect();
    let zeros = vec![0u32; n];
    let lhs = cohft_integral_vec(&gd, g, &inputs, &zeros)? * (2.0 * g as f64 - 2.0 + n as f64);

    // the inserted unit and translation vectors couple translation-style
    // (the lemma is proved with the translation acting outermost)
    let mut kinds = vec![LegKind::Raw; n];
    kinds.push(LegKind::Raw);
    let mut ext_inputs = inputs.clone();
    ext_inputs.push(unit_vector(&gd));
    let mut ext_degrees = zeros.clone();
    ext_degrees.push(1);
    let mut rhs = cohft_integral_kinds(&gd, g, &ext_inputs, &ext_degrees, &kinds)?;

    let kmax = (3 * g as i64 - 3 + n as i64 + 1).max(0) as usize;
    for k in 2..=kmax {
        let mut tk_inputs = inputs.clone();
        tk_inputs.push(translation_vector(&gd, k));
        let mut tk_degrees = zeros.clone();
        tk_degrees.push(k as u32);
        rhs -= cohft_integral_kinds(&gd, g, &tk_inputs, &tk_degrees, &kinds)?;
    }
    Ok((lhs - rhs).norm())
}

//! Built-in modular functor constructors.
//!
//! * [`su2_level`] — SU(2) at level ℓ: labels 0..ℓ, sine S-matrix,
//!   `r_λ = λ(λ+2)/(4(ℓ+2))`, `c = 3ℓ/(ℓ+2)`.
//! * [`sln_level`] — sl_N at level ℓ via the Kač-Peterson formula: the
//!   unitary matrix `𝒮_{λμ} = D_ℓ^{-1/2} Σ_{w∈W} sgn(w) q^{<λ+ρ, w(μ+ρ)>}`
//!   with `q = exp(2πi/(ℓ+N))` gives `S̲⁻¹ = (-i)^{|Δ+|} 𝒮`.
//! * [`finite_group_untwisted`] — the quantum double of a finite group:
//!   labels are (conjugacy class, centralizer irreducible), `c = 0`,
//!   `r = 0`, and the S-matrix is the commuting-pair character sum.
//!
//! Character theory is automatic for abelian groups (characters are
//! homomorphisms to roots of unity, obtained from a cyclic decomposition of
//! the multiplication table); S3 ships as built-in verified data; other
//! non-abelian groups must supply centralizer character tables.
//!
//! Sign conventions for `Δ_λ^{-1/2} = (S̲⁻¹)_{1λ}`: for SU(2)/sl_N the first
//! row of `S̲⁻¹` is positive real (principal alcove); for quantum doubles the
//! first-row entries are the positive rationals `dim V_{i,ρ}/#Z_i`.

use crate::frobenius::{invert_matrix, FrobeniusError, ModularFunctorData};
use crate::scalar::{rat, rat_int, Rational, Scalar};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("level must be >= 1")]
    BadLevel,
    #[error("rank must be >= 2")]
    BadRank,
    #[error("too many labels: {0} weights exceed the enumeration guard {1}")]
    TooManyLabels(usize, usize),
    #[error("multiplication table is not a group law: {0}")]
    BadGroupTable(String),
    #[error("missing character data: {0}")]
    MissingCharacterData(String),
    #[error("inconsistent class data: {0}")]
    BadClassData(String),
    #[error("unknown builtin '{0}' (expected su2:L, slN:N,L, dg:Zn or dg:S3)")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
}

const LABEL_GUARD: usize = 10_000;

/// SU(2) at level `l >= 1`: K = l+1 self-dual labels,
/// `S̲⁻¹_{λμ} = sqrt(2/(l+2)) sin(π(λ+1)(μ+1)/(l+2))`.
/// The sine matrix is real, symmetric and involutive, so `S̲ = S̲⁻¹`.
pub fn su2_level(l: u32) -> Result<ModularFunctorData, CatalogError> {
    if l < 1 {
        return Err(CatalogError::BadLevel);
    }
    let k = (l + 1) as usize;
    let den = (l + 2) as f64;
    let norm = (2.0 / den).sqrt();
    let m: Vec<Vec<Scalar>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| Scalar::new(norm * (PI * ((a + 1) * (b + 1)) as f64 / den).sin(), 0.0))
                .collect()
        })
        .collect();
    let labels = (0..k).map(|a| a.to_string()).collect();
    let r = (0..k).map(|a| rat((a * (a + 2)) as i64, (4 * (l + 2)) as i64)).collect();
    let c = rat(3 * l as i64, (l + 2) as i64);
    Ok(ModularFunctorData {
        name: format!("su2:{l}"),
        labels,
        dagger: (0..k).collect(),
        s_under: m.clone(),
        s_under_inv: m,
        r,
        c,
    })
}

/// Weight in the level-`l` alcove of sl_N: an (N-1)-tuple
/// `λ_1 >= ... >= λ_{N-1} >= 0` with `λ_1 <= l`.
pub type WeightVector = Vec<u32>;

fn enumerate_weights(n: u32, l: u32) -> Vec<WeightVector> {
    fn go(rank: usize, max: u32, cur: &mut WeightVector, out: &mut Vec<WeightVector>) {
        if cur.len() == rank {
            out.push(cur.clone());
            return;
        }
        for v in (0..=max).rev() {
            cur.push(v);
            go(rank, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go((n - 1) as usize, l, &mut Vec::new(), &mut out);
    // trivial weight first, then increasing
    out.sort();
    out
}

/// `a_i = λ_i + N - i` in e*-coordinates, including the trailing zero part.
fn shifted(n: u32, w: &[u32]) -> Vec<i64> {
    (0..n as usize)
        .map(|i| {
            let part = if i < w.len() { w[i] as i64 } else { 0 };
            part + (n as i64 - 1 - i as i64)
        })
        .collect()
}

/// sl_N at level `l`: K = C(l+N-1, N-1) labels, Weyl sum over all N!
/// permutations, Killing form `<λ,μ> = Σλ_iμ_i − |λ||μ|/N`.
pub fn sln_level(n: u32, l: u32) -> Result<ModularFunctorData, CatalogError> {
    if n < 2 {
        return Err(CatalogError::BadRank);
    }
    if l < 1 {
        return Err(CatalogError::BadLevel);
    }
    let guard = (l as u64 + 1).checked_pow(n - 1).unwrap_or(u64::MAX);
    if guard > LABEL_GUARD as u64 {
        return Err(CatalogError::TooManyLabels(guard as usize, LABEL_GUARD));
    }
    let weights = enumerate_weights(n, l);
    let k = weights.len();
    if k > LABEL_GUARD {
        return Err(CatalogError::TooManyLabels(k, LABEL_GUARD));
    }

    let index: BTreeMap<WeightVector, usize> = weights.iter().cloned().zip(0..).collect();
    let dagger: Vec<usize> = weights
        .iter()
        .map(|w| {
            let full: Vec<u32> = w.iter().copied().chain(std::iter::once(0)).collect();
            let top = full[0];
            let dual: WeightVector = (0..(n - 1) as usize).map(|i| top - full[n as usize - 1 - i]).collect();
            index[&dual]
        })
        .collect();

    // 𝒮 via the alternating Weyl sum; exponents are exact multiples of
    // 1/(N(l+N)), evaluated on the unit circle.
    let den = (n as i64) * (l as i64 + n as i64);
    let d_ell = (n as f64) * ((l + n) as f64).powi(n as i32 - 1);
    let d_norm = 1.0 / d_ell.sqrt();
    let perms = permutations(n as usize);
    let mut s_cal = vec![vec![Scalar::zero(); k]; k];
    for (i, wa) in weights.iter().enumerate() {
        let a = shifted(n, wa);
        let abs_a: i64 = a.iter().sum();
        for (j, wb) in weights.iter().enumerate() {
            let b = shifted(n, wb);
            let abs_b: i64 = b.iter().sum();
            let mut acc = Scalar::zero();
            for (perm, sign) in &perms {
                let dot: i64 = a.iter().zip(perm.iter()).map(|(ai, &p)| ai * b[p]).sum();
                let num = (n as i64) * dot - abs_a * abs_b;
                let phase = 2.0 * PI * (num as f64) / (den as f64);
                let term = Scalar::new(phase.cos(), phase.sin());
                acc += if *sign { term } else { -term };
            }
            s_cal[i][j] = acc * d_norm;
        }
    }

    // S̲⁻¹ = (-i)^{|Δ+|} 𝒮,  S̲ = i^{|Δ+|} 𝒮*
    let delta_plus = (n * (n - 1) / 2) as u32;
    let mi = Scalar::new(0.0, -1.0).powu(delta_plus);
    let pi_ = Scalar::new(0.0, 1.0).powu(delta_plus);
    let s_under_inv: Vec<Vec<Scalar>> = s_cal.iter().map(|row| row.iter().map(|x| mi * x).collect()).collect();
    let s_under: Vec<Vec<Scalar>> = s_cal.iter().map(|row| row.iter().map(|x| pi_ * x.conj()).collect()).collect();

    // r_λ = <λ, λ+2ρ>/(2(l+N)), c = l(N²-1)/(l+N)
    let r: Vec<Rational> = weights
        .iter()
        .map(|w| {
            let full: Vec<i64> = (0..n as usize).map(|i| if i < w.len() { w[i] as i64 } else { 0 }).collect();
            let abs: i64 = full.iter().sum();
            // <λ, λ+2ρ> = Σ λ_i(λ_i - 2i + 1) + N|λ| - |λ|²/N   (1-based i)
            let mut num = rat_int(0);
            for (i, &li) in full.iter().enumerate() {
                num += rat_int(li * (li - 2 * (i as i64 + 1) + 1));
            }
            num += rat_int(n as i64 * abs) - rat(abs * abs, n as i64);
            num / rat_int(2 * (l as i64 + n as i64))
        })
        .collect();
    let c = rat(l as i64 * ((n * n - 1) as i64), l as i64 + n as i64);

    let labels = weights.iter().map(|w| format!("({})", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))).collect();
    Ok(ModularFunctorData { name: format!("sl{n}:{l}"), labels, dagger, s_under, s_under_inv, r, c })
}

fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, even: bool, out: &mut Vec<(Vec<usize>, bool)>) {
        let n = used.len();
        if cur.len() == n {
            out.push((cur.clone(), even));
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            // parity flips with the number of inversions introduced
            let inversions = cur.iter().filter(|&&x| x > v).count();
            used[v] = true;
            cur.push(v);
            go(cur, used, even ^ (inversions % 2 == 1), out);
            cur.pop();
            used[v] = false;
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], true, &mut out);
    out
}

/// A finite group given by its multiplication table (index 0 = identity),
/// optionally with precompiled conjugacy-class and centralizer character
/// data for non-abelian groups.
#[derive(Clone, Debug)]
pub struct FiniteGroupData {
    pub order: usize,
    pub mult: Vec<Vec<usize>>,
    pub class_data: Option<GroupClassData>,
}

/// Conjugacy classes with centralizer character tables. `characters[i][p]`
/// is the character of the p-th irreducible of `Z_{g_i}` as a function on
/// the elements of `centralizers[i]` (same order).
#[derive(Clone, Debug)]
pub struct GroupClassData {
    pub classes: Vec<Vec<usize>>,
    pub reps: Vec<usize>,
    pub centralizers: Vec<Vec<usize>>,
    pub characters: Vec<Vec<Vec<Scalar>>>,
}

impl FiniteGroupData {
    /// Validate the table as a group law.
    pub fn new(mult: Vec<Vec<usize>>) -> Result<Self, CatalogError> {
        let n = mult.len();
        if n == 0 || mult.iter().any(|row| row.len() != n) {
            return Err(CatalogError::BadGroupTable("table is not square".into()));
        }
        if mult.iter().flatten().any(|&x| x >= n) {
            return Err(CatalogError::BadGroupTable("entry out of range".into()));
        }
        for a in 0..n {
            if mult[0][a] != a || mult[a][0] != a {
                return Err(CatalogError::BadGroupTable("element 0 is not the identity".into()));
            }
        }
        for a in 0..n {
            if !(0..n).any(|b| mult[a][b] == 0) {
                return Err(CatalogError::BadGroupTable(format!("element {a} has no inverse")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(CatalogError::BadGroupTable(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroupData { order: n, mult, class_data: None })
    }

    pub fn with_class_data(mut self, data: GroupClassData) -> Self {
        self.class_data = Some(data);
        self
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order).find(|&b| self.mult[a][b] == 0).expect("validated group")
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mult[a][b] == self.mult[b][a]))
    }

    pub fn conjugacy_classes(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let n = self.order;
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        let mut reps = Vec::new();
        for a in 0..n {
            if seen[a] {
                continue;
            }
            let mut class: Vec<usize> = (0..n).map(|k| self.mult[self.mult[k][a]][self.inverse(k)]).collect();
            class.sort_unstable();
            class.dedup();
            for &x in &class {
                seen[x] = true;
            }
            reps.push(a);
            classes.push(class);
        }
        (classes, reps)
    }

    pub fn centralizer(&self, a: usize) -> Vec<usize> {
        (0..self.order).filter(|&b| self.mult[a][b] == self.mult[b][a]).collect()
    }

    /// Element orders.
    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mult[x][a];
            k += 1;
        }
        k
    }
}

/// Cyclic group Z_n.
pub fn cyclic_group(n: usize) -> FiniteGroupData {
    let mult = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroupData::new(mult).expect("cyclic table is a group")
}

/// The symmetric group S3 with its verified quantum-double class data
/// (element order: e, the three transpositions, the two 3-cycles).
pub fn symmetric_s3() -> FiniteGroupData {
    // permutations of {0,1,2}; composition (a*b)(x) = a(b(x))
    let elems: [[usize; 3]; 6] = [
        [0, 1, 2], // e
        [1, 0, 2], // (01)
        [2, 1, 0], // (02)
        [0, 2, 1], // (12)
        [1, 2, 0], // (012): 0->1, 1->2, 2->0
        [2, 0, 1], // (021)
    ];
    let compose = |a: &[usize; 3], b: &[usize; 3]| -> [usize; 3] { [a[b[0]], a[b[1]], a[b[2]]] };
    let idx = |p: &[usize; 3]| elems.iter().position(|e| e == p).unwrap();
    let mult: Vec<Vec<usize>> = (0..6).map(|a| (0..6).map(|b| idx(&compose(&elems[a], &elems[b]))).collect()).collect();
    let g = FiniteGroupData::new(mult).expect("S3 table is a group");

    let omega = Scalar::new((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
    let one = Scalar::one();
    let c2 = Scalar::new(2.0, 0.0);
    let z = Scalar::zero();
    let class_data = GroupClassData {
        classes: vec![vec![0], vec![1, 2, 3], vec![4, 5]],
        reps: vec![0, 1, 4],
        centralizers: vec![vec![0, 1, 2, 3, 4, 5], vec![0, 1], vec![0, 4, 5]],
        characters: vec![
            // Z(e) = S3: trivial, sign, standard (values per element in order e,(01),(02),(12),(012),(021))
            vec![
                vec![one, one, one, one, one, one],
                vec![one, -one, -one, -one, one, one],
                vec![c2, z, z, z, -one, -one],
            ],
            // Z((01)) = {e,(01)} ~ Z2
            vec![vec![one, one], vec![one, -one]],
            // Z((012)) = {e,(012),(021)} ~ Z3
            vec![
                vec![one, one, one],
                vec![one, omega, omega * omega],
                vec![one, omega * omega, omega],
            ],
        ],
    };
    g.with_class_data(class_data)
}

/// Decompose an abelian group into cyclic factors; returns generators with
/// their orders such that every element factors uniquely.
fn cyclic_decomposition(g: &FiniteGroupData) -> Vec<(usize, usize)> {
    fn decompose(order: usize, mult: &[Vec<usize>]) -> Vec<(usize, usize)> {
        if order == 1 {
            return vec![];
        }
        let elem_order = |a: usize| {
            let mut x = a;
            let mut k = 1;
            while x != 0 {
                x = mult[x][a];
                k += 1;
            }
            k
        };
        let x = (0..order).max_by_key(|&a| elem_order(a)).unwrap();
        let n = elem_order(x);
        // subgroup <x> and cosets
        let mut h = Vec::with_capacity(n);
        let mut p = 0;
        loop {
            h.push(p);
            p = mult[p][x];
            if p == 0 {
                break;
            }
        }
        let mut coset_of = vec![usize::MAX; order];
        let mut coset_reps = Vec::new();
        for a in 0..order {
            if coset_of[a] != usize::MAX {
                continue;
            }
            let id = coset_reps.len();
            coset_reps.push(a);
            for &hh in &h {
                coset_of[mult[a][hh]] = id;
            }
        }
        let q = coset_reps.len();
        let qmult: Vec<Vec<usize>> =
            (0..q).map(|a| (0..q).map(|b| coset_of[mult[coset_reps[a]][coset_reps[b]]]).collect()).collect();
        let inner = decompose(q, &qmult);
        // lift generators of the quotient, adjusting by a power of x so the
        // lift has the same order as its image
        let mut gens = vec![(x, n)];
        let pow = |a: usize, mut e: usize| {
            let mut acc = 0usize;
            let mut base = a;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mult[acc][base];
                }
                base = mult[base][base];
                e >>= 1;
            }
            acc
        };
        for (qgen, m) in inner {
            let y0 = coset_reps[qgen];
            let y0m = pow(y0, m);
            let s = h.iter().position(|&hh| hh == y0m).expect("y0^m lies in <x>");
            assert_eq!(s % m, 0, "maximal-order lifting lemma");
            let inv_adjust = pow(x, (n - s / m) % n);
            let y = mult[y0][inv_adjust];
            gens.push((y, m));
        }
        gens
    }
    decompose(g.order, &g.mult)
}

/// Full character table of an abelian group as functions on elements.
fn abelian_characters(g: &FiniteGroupData) -> Vec<Vec<Scalar>> {
    let gens = cyclic_decomposition(g);
    let n = g.order;
    // exponent coordinates of every element
    let mut coords: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    fn fill(
        g: &FiniteGroupData,
        gens: &[(usize, usize)],
        i: usize,
        elem: usize,
        cur: &mut Vec<usize>,
        coords: &mut BTreeMap<usize, Vec<usize>>,
    ) {
        if i == gens.len() {
            let prev = coords.insert(elem, cur.clone());
            assert!(prev.is_none(), "decomposition is not direct");
            return;
        }
        let (gen, ord) = gens[i];
        let mut e = elem;
        for a in 0..ord {
            cur.push(a);
            fill(g, gens, i + 1, e, cur, coords);
            cur.pop();
            e = g.mult[e][gen];
        }
    }
    fill(g, &gens, 0, 0, &mut Vec::new(), &mut coords);
    assert_eq!(coords.len(), n);

    let mut chars = Vec::with_capacity(n);
    let mut kvec = vec![0usize; gens.len()];
    loop {
        let mut row = vec![Scalar::zero(); n];
        for (&elem, a) in &coords {
            let mut phase = 0.0f64;
            for (i, &(_, ord)) in gens.iter().enumerate() {
                phase += 2.0 * PI * (kvec[i] * a[i]) as f64 / ord as f64;
            }
            row[elem] = Scalar::new(phase.cos(), phase.sin());
        }
        chars.push(row);
        // advance the multi-index; trivial character (all k = 0) comes first
        let mut i = 0;
        loop {
            if i == gens.len() {
                return chars;
            }
            kvec[i] += 1;
            if kvec[i] < gens[i].1 {
                break;
            }
            kvec[i] = 0;
            i += 1;
        }
        if gens.is_empty() {
            return chars;
        }
    }
}

/// Class data for any group with automatically computable characters
/// (abelian) or shipped/supplied tables.
pub fn class_data(g: &FiniteGroupData) -> Result<GroupClassData, CatalogError> {
    if let Some(data) = &g.class_data {
        validate_class_data(g, data)?;
        return Ok(data.clone());
    }
    if !g.is_abelian() {
        return Err(CatalogError::MissingCharacterData(
            "non-abelian group without supplied centralizer character tables".into(),
        ));
    }
    let chars = abelian_characters(g);
    let classes: Vec<Vec<usize>> = (0..g.order).map(|a| vec![a]).collect();
    let reps: Vec<usize> = (0..g.order).collect();
    let all: Vec<usize> = (0..g.order).collect();
    let data = GroupClassData {
        classes,
        reps,
        centralizers: vec![all; g.order],
        characters: vec![chars; g.order],
    };
    Ok(data)
}

fn validate_class_data(g: &FiniteGroupData, data: &GroupClassData) -> Result<(), CatalogError> {
    let (classes, _) = g.conjugacy_classes();
    if data.classes.len() != classes.len() {
        return Err(CatalogError::BadClassData("class count mismatch".into()));
    }
    for (i, rep) in data.reps.iter().enumerate() {
        if !data.classes[i].contains(rep) {
            return Err(CatalogError::BadClassData(format!("representative of class {i} not in class")));
        }
        let z = g.centralizer(*rep);
        if z != data.centralizers[i] {
            return Err(CatalogError::BadClassData(format!("centralizer of class {i} mismatch")));
        }
        let table = &data.characters[i];
        // square table: #irreducibles = #classes of the centralizer
        let sub = subgroup(g, &data.centralizers[i]);
        let (zclasses, _) = sub.conjugacy_classes();
        if table.len() != zclasses.len() {
            return Err(CatalogError::BadClassData(format!(
                "class {i}: {} characters but centralizer has {} classes",
                table.len(),
                zclasses.len()
            )));
        }
        // row orthogonality: (1/#Z) Σ_h χ_a(h) χ_b(h)* = δ_ab
        let zn = data.centralizers[i].len() as f64;
        for a in 0..table.len() {
            if table[a].len() != data.centralizers[i].len() {
                return Err(CatalogError::BadClassData(format!("class {i}: character {a} has wrong length")));
            }
            for b in 0..table.len() {
                let mut acc = Scalar::zero();
                for h in 0..data.centralizers[i].len() {
                    acc += table[a][h] * table[b][h].conj();
                }
                let expect = if a == b { zn } else { 0.0 };
                if (acc - Scalar::new(expect, 0.0)).norm() > 1e-8 * zn {
                    return Err(CatalogError::BadClassData(format!("class {i}: row orthogonality fails at ({a},{b})")));
                }
            }
        }
    }
    Ok(())
}

/// Relabel a subset closed under multiplication as its own group.
fn subgroup(g: &FiniteGroupData, elems: &[usize]) -> FiniteGroupData {
    let pos: BTreeMap<usize, usize> = elems.iter().copied().zip(0..).collect();
    let mult = elems
        .iter()
        .map(|&a| elems.iter().map(|&b| pos[&g.mult[a][b]]).collect())
        .collect();
    FiniteGroupData::new(mult).expect("centralizer is a subgroup")
}

/// Untwisted quantum-double modular functor of the finite group `G`:
/// labels `(class i, irreducible ρ of Z_i)` with the identity-class trivial
/// representation first, `c = 0`, all `r = 0`, and
/// `S̲_{(i₁,ρ₁)(i₂,ρ₂)} = (1/#G) Σ_{g_j ∈ C_{i_j}, [g₁,g₂]=1} χ_{i₁,g₁}(g₂⁻¹) χ_{i₂,g₂}(g₁⁻¹)`.
/// Characters at non-representative class members are transported by
/// conjugation: `ρ_{i,kgk⁻¹}(h) = ρ_{i,g}(k⁻¹hk)`.
pub fn finite_group_untwisted(g: &FiniteGroupData) -> Result<ModularFunctorData, CatalogError> {
    let data = class_data(g)?;
    let nclasses = data.classes.len();
    let order = g.order;

    // trivial representation of Z_{identity} must be character index 0
    if !data.characters[0][0].iter().all(|x| (x - Scalar::one()).norm() < 1e-9) {
        return Err(CatalogError::BadClassData("first character of the identity class is not trivial".into()));
    }

    // labels and lookup
    let mut labels = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..nclasses {
        for p in 0..data.characters[i].len() {
            labels.push(format!("({i},{p})"));
            pairs.push((i, p));
        }
    }
    let k = pairs.len();
    let pair_index: BTreeMap<(usize, usize), usize> = pairs.iter().copied().zip(0..).collect();

    // conjugators: for each element e in class i, some k with e = k g_i k^{-1}
    let mut conjugator = vec![usize::MAX; order];
    let mut class_of = vec![usize::MAX; order];
    for (i, class) in data.classes.iter().enumerate() {
        for &e in class {
            class_of[e] = i;
            conjugator[e] = (0..order)
                .find(|&kk| g.mult[g.mult[kk][data.reps[i]]][g.inverse(kk)] == e)
                .expect("class member is conjugate to the representative");
        }
    }
    // position of elements inside each centralizer list
    let zpos: Vec<BTreeMap<usize, usize>> =
        data.centralizers.iter().map(|z| z.iter().copied().zip(0..).collect()).collect();

    // χ_{i,e}(h): transported character, zero off the centralizer of e
    let chi = |i: usize, p: usize, e: usize, h: usize| -> Scalar {
        let kk = conjugator[e];
        let moved = g.mult[g.mult[g.inverse(kk)][h]][kk];
        match zpos[i].get(&moved) {
            Some(&pos) => data.characters[i][p][pos],
            None => Scalar::zero(),
        }
    };

    let mut s_under = vec![vec![Scalar::zero(); k]; k];
    for (a, &(i1, p1)) in pairs.iter().enumerate() {
        for (b, &(i2, p2)) in pairs.iter().enumerate() {
            let mut acc = Scalar::zero();
            for &g1 in &data.classes[i1] {
                for &g2 in &data.classes[i2] {
                    if g.mult[g1][g2] != g.mult[g2][g1] {
                        continue;
                    }
                    acc += chi(i1, p1, g1, g.inverse(g2)) * chi(i2, p2, g2, g.inverse(g1));
                }
            }
            s_under[a][b] = acc / order as f64;
        }
    }

    // dagger: (i,ρ) -> (class of inverses, dual character)
    let mut dagger = vec![0usize; k];
    for (a, &(i, p)) in pairs.iter().enumerate() {
        let idag = class_of[g.inverse(data.reps[i])];
        // dual character on Z_{rep(i†)}: h -> χ_{i,rep_inverse}(h^{-1}) transported
        let rep_inv = g.inverse(data.reps[i]);
        let mut pdag = None;
        for q in 0..data.characters[idag].len() {
            let matches = data.centralizers[idag].iter().enumerate().all(|(pos, &h)| {
                let expect = chi(i, p, rep_inv, g.inverse(h));
                (data.characters[idag][q][pos] - expect).norm() < 1e-8
            });
            if matches {
                pdag = Some(q);
                break;
            }
        }
        let pdag = pdag.ok_or_else(|| CatalogError::BadClassData(format!("no dual character found for label ({i},{p})")))?;
        dagger[a] = pair_index[&(idag, pdag)];
    }

    let s_under_inv = invert_matrix(&s_under).ok_or(FrobeniusError::SingularMatrix)?;
    Ok(ModularFunctorData {
        name: format!("dg:#{order}"),
        labels,
        dagger,
        s_under,
        s_under_inv,
        r: vec![Rational::zero(); k],
        c: Rational::zero(),
    })
}

/// Modular functor with a single label (K = 1, S̲ = 1): its Verlinde curve is
/// the Airy curve.
pub fn trivial_mf() -> ModularFunctorData {
    ModularFunctorData {
        name: "trivial".into(),
        labels: vec!["1".into()],
        dagger: vec![0],
        s_under: vec![vec![Scalar::one()]],
        s_under_inv: vec![vec![Scalar::one()]],
        r: vec![Rational::zero()],
        c: Rational::zero(),
    }
}

/// Parse a builtin spec: `su2:L`, `slN:N,L`, `dg:Zn`, `dg:S3`.
pub fn builtin(spec: &str) -> Result<ModularFunctorData, CatalogError> {
    let unknown = || CatalogError::UnknownBuiltin(spec.to_string());
    let (family, params) = spec.split_once(':').ok_or_else(unknown)?;
    match family {
        "su2" => {
            let l: u32 = params.parse().map_err(|_| unknown())?;
            su2_level(l)
        }
        "slN" | "sln" => {
            let (n, l) = params.split_once(',').ok_or_else(unknown)?;
            let n: u32 = n.trim().parse().map_err(|_| unknown())?;
            let l: u32 = l.trim().parse().map_err(|_| unknown())?;
            sln_level(n, l)
        }
        "dg" => {
            let mut mf = if params.eq_ignore_ascii_case("s3") {
                finite_group_untwisted(&symmetric_s3())?
            } else if let Some(n) = params.strip_prefix('Z').or_else(|| params.strip_prefix('z')) {
                let n: usize = n.parse().map_err(|_| unknown())?;
                if n == 0 {
                    return Err(unknown());
                }
                finite_group_untwisted(&cyclic_group(n))?
            } else {
                return Err(unknown());
            };
            mf.name = format!("dg:{params}");
            Ok(mf)
        }
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{fusion_coeff, validate_mf, verlinde_dim, FusionTable};
    use crate::scalar::{Tolerance, INTEGER_TOL};

    #[test]
    fn su2_level1_matches_closed_form() {
        let mf = su2_level(1).unwrap();
        assert_eq!(mf.k(), 2);
        assert_eq!(mf.c, rat_int(1));
        assert_eq!(mf.r, vec![rat_int(0), rat(1, 4)]);
        let s = 1.0 / 2.0f64.sqrt();
        let expect = [[s, s], [s, -s]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((mf.s_inv(a, b) - Scalar::new(expect[a][b], 0.0)).norm() < 1e-12);
            }
        }
        assert!(validate_mf(&mf, Tolerance::default()).all_hard_passed());
    }

    #[test]
    fn su2_level2_scalars() {
        let mf = su2_level(2).unwrap();
        assert_eq!(mf.c, rat(3, 2));
        assert_eq!(mf.r, vec![rat_int(0), rat(3, 16), rat(1, 2)]);
        assert_eq!(verlinde_dim(&mf, 2, &[], INTEGER_TOL).unwrap(), 10);
        assert_eq!(fusion_coeff(&mf, 1, 1, 2, INTEGER_TOL).unwrap(), 1);
    }

    #[test]
    fn su2_r0_is_zero_for_all_levels() {
        for l in 1..=6 {
            assert!(su2_level(l).unwrap().r[0].is_zero());
        }
    }

    #[test]
    fn sln2_matches_su2() {
        for l in 1..=4 {
            let a = su2_level(l).unwrap();
            let b = sln_level(2, l).unwrap();
            assert_eq!(a.k(), b.k());
            assert_eq!(a.c, b.c);
            assert_eq!(a.r, b.r);
            assert_eq!(a.dagger, b.dagger);
            let mut dev: f64 = 0.0;
            for i in 0..a.k() {
                for j in 0..a.k() {
                    dev = dev.max((a.s_inv(i, j) - b.s_inv(i, j)).norm());
                    dev = dev.max((a.s(i, j) - b.s(i, j)).norm());
                }
            }
            assert!(dev < 1e-10, "level {l}: deviation {dev}");
        }
    }

    #[test]
    fn sl3_level1() {
        let mf = sln_level(3, 1).unwrap();
        assert_eq!(mf.k(), 3);
        assert_eq!(mf.labels, vec!["(0,0)", "(1,0)", "(1,1)"]);
        assert!(mf.r[0].is_zero());
        // (1,0) and (1,1) are dual to each other
        assert_eq!(mf.dagger, vec![0, 2, 1]);
        let report = validate_mf(&mf, Tolerance::default());
        assert!(report.all_hard_passed(), "{report}");
        // MF-D duality holds for the WZW catalogs
        assert!(report.checks.iter().find(|c| c.name.starts_with("MF-D")).unwrap().passed);
    }

    #[test]
    fn sl3_adjoint_self_dual() {
        let mf = sln_level(3, 2).unwrap();
        let adj = mf.label_index("(2,1)").unwrap();
        assert_eq!(mf.dagger[adj], adj);
        assert!(validate_mf(&mf, Tolerance::default()).all_hard_passed());
    }

    #[test]
    fn guard_rejects_huge_weight_sets() {
        assert!(matches!(sln_level(6, 12), Err(CatalogError::TooManyLabels(..))));
    }

    #[test]
    fn z2_double() {
        let mf = finite_group_untwisted(&cyclic_group(2)).unwrap();
        assert_eq!(mf.k(), 4);
        for a in 0..4 {
            for b in 0..4 {
                assert!((mf.s(a, b).norm() - 0.5).abs() < 1e-12, "entry ({a},{b}) not ±1/2");
                assert!(mf.s(a, b).im.abs() < 1e-12);
            }
        }
        // S̲_{(a,χ)(b,ψ)} = (1/2) χ(b) ψ(a); label order (0,χ0),(0,χ1),(1,χ0),(1,χ1)
        assert!((mf.s(1, 3) - Scalar::new(-0.5, 0.0)).norm() < 1e-12);
        assert!((mf.s(3, 3) - Scalar::new(0.5, 0.0)).norm() < 1e-12);
        assert!((mf.s(0, 3) - Scalar::new(0.5, 0.0)).norm() < 1e-12);
        let report = validate_mf(&mf, Tolerance::default());
        assert!(report.all_hard_passed(), "{report}");
        // all labels self-dual: C = identity
        assert_eq!(mf.dagger, vec![0, 1, 2, 3]);
        assert_eq!(verlinde_dim(&mf, 2, &[], INTEGER_TOL).unwrap(), 16);
        assert_eq!(verlinde_dim(&mf, 1, &[0], INTEGER_TOL).unwrap(), 4);
    }

    #[test]
    fn z3_double_validates() {
        let mf = finite_group_untwisted(&cyclic_group(3)).unwrap();
        assert_eq!(mf.k(), 9);
        let report = validate_mf(&mf, Tolerance::default());
        assert!(report.all_hard_passed(), "{report}");
        assert_eq!(verlinde_dim(&mf, 2, &[], INTEGER_TOL).unwrap(), 81);
    }

    #[test]
    fn s3_double() {
        let mf = finite_group_untwisted(&symmetric_s3()).unwrap();
        assert_eq!(mf.k(), 8); // 3 + 2 + 3
        let report = validate_mf(&mf, Tolerance::default());
        assert!(report.all_hard_passed(), "{report}");
        // S̲_{(i,ρ)(1,1)} = dim V_{i,ρ} / #Z_i
        let expect = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0, 0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        for (a, &e) in expect.iter().enumerate() {
            assert!((mf.s(a, 0) - Scalar::new(e, 0.0)).norm() < 1e-12, "label {a}");
        }
        assert_eq!(verlinde_dim(&mf, 2, &[], INTEGER_TOL).unwrap(), 116);
    }

    #[test]
    fn fusion_integrality_all_builtins() {
        for spec in ["su2:1", "su2:2", "su2:3", "slN:3,1", "dg:Z2", "dg:S3"] {
            let mf = builtin(spec).unwrap();
            let table = crate::frobenius::fusion_table(&mf, INTEGER_TOL);
            assert!(table.is_ok(), "{spec}");
            let table: FusionTable = table.unwrap();
            // N_{λ1ν} = δ_{λν†}
            for l in 0..mf.k() {
                for n in 0..mf.k() {
                    let expect = if mf.dagger[l] == n { 1 } else { 0 };
                    assert_eq!(table.get(l, 0, n), expect, "{spec} ({l},{n})");
                }
            }
        }
    }

    #[test]
    fn fusion_symmetric_under_permutations_and_dagger() {
        for spec in ["su2:2", "dg:S3"] {
            let mf = builtin(spec).unwrap();
            let table = crate::frobenius::fusion_table(&mf, INTEGER_TOL).unwrap();
            let k = mf.k();
            for l in 0..k {
                for m in 0..k {
                    for n in 0..k {
                        let v = table.get(l, m, n);
                        assert_eq!(v, table.get(l, n, m), "{spec}");
                        assert_eq!(v, table.get(m, l, n), "{spec}");
                        assert_eq!(v, table.get(n, m, l), "{spec}");
                        assert_eq!(v, table.get(mf.dagger[l], mf.dagger[m], mf.dagger[n]), "{spec}");
                    }
                }
            }
        }
    }

    #[test]
    fn bad_group_table_rejected() {
        let bad = vec![vec![0, 1], vec![1, 0, 0]];
        assert!(matches!(FiniteGroupData::new(bad), Err(CatalogError::BadGroupTable(_))));
        // identity not at 0
        let bad = vec![vec![1, 0], vec![0, 1]];
        assert!(matches!(FiniteGroupData::new(bad), Err(CatalogError::BadGroupTable(_))));
    }

    #[test]
    fn non_abelian_without_tables_needs_data() {
        let s3 = FiniteGroupData { class_data: None, ..symmetric_s3() };
        assert!(matches!(finite_group_untwisted(&s3), Err(CatalogError::MissingCharacterData(_))));
    }

    #[test]
    fn abelian_product_group_characters() {
        // Z2 x Z2 via a direct-product table; checks the cyclic decomposition
        let z2 = cyclic_group(2);
        let mut mult = vec![vec![0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let (a1, a2) = (a / 2, a % 2);
                let (b1, b2) = (b / 2, b % 2);
                mult[a][b] = 2 * z2.mult[a1][b1] + z2.mult[a2][b2];
            }
        }
        let g = FiniteGroupData::new(mult).unwrap();
        let mf = finite_group_untwisted(&g).unwrap();
        assert_eq!(mf.k(), 16);
        assert!(validate_mf(&mf, Tolerance::default()).all_hard_passed());
        assert_eq!(verlinde_dim(&mf, 2, &[], INTEGER_TOL).unwrap(), 256); // |G|^{2g}
    }

    #[test]
    fn builtin_parser() {
        assert!(builtin("su2:3").is_ok());
        assert!(builtin("slN:3,2").is_ok());
        assert!(builtin("dg:Z5").is_ok());
        assert!(builtin("dg:S3").is_ok());
        assert!(matches!(builtin("e8:1"), Err(CatalogError::UnknownBuiltin(_))));
    }
}

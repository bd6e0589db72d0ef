//! Dual-pipeline consistency: the residue recursion on the CohFT spectral
//! curve must reproduce the stable-graph integrals entry by entry, and the
//! free energies must match the n = 0 graph sums.

use modfun::catalog::su2_level;
use modfun::cohft::{cohft_integral, cohft_integral_vec, GiventalData};
use modfun::scalar::{rat, rat_int, Scalar, Tolerance};
use modfun::toprec::{curve_from_cohft, curve_verlinde, default_trunc, free_energy, tr_run, xi_decompose};

fn degree_tuples(total: i64, n: usize) -> Vec<Vec<u32>> {
    fn go(total: i64, n: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            cur.push(total as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=total {
            cur.push(k as u32);
            go(total - k, n - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 && total >= 0 {
        go(total, n, &mut Vec::new(), &mut out);
    }
    out
}

fn channel_tuples(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|c| (0..k).map(move |x| {
                let mut c2 = c.clone();
                c2.push(x);
                c2
            }))
            .collect();
    }
    out
}

/// Compare xi_decompose(tr_run) with the graph sum for every channel tuple
/// and every psi-degree tuple up to the dimension. Returns the max deviation.
fn crosscheck(mf: &modfun::ModularFunctorData, t: &modfun::Rational, g: u32, n: usize) -> f64 {
    let curve = curve_from_cohft(mf, t, default_trunc(g, n)).unwrap();
    let omega = tr_run(&curve, g, n).unwrap();
    let tensor = xi_decompose(&omega, &curve, Tolerance::default()).unwrap();
    let mut dev: f64 = 0.0;
    let dim = 3 * g as i64 - 3 + n as i64;
    for channels in channel_tuples(mf.k(), n) {
        for total in 0..=dim {
            for degrees in degree_tuples(total, n) {
                let graph_side = cohft_integral(mf, t, g, &channels, &degrees).unwrap();
                let key: Vec<(usize, u32)> = channels.iter().copied().zip(degrees.iter().copied()).collect();
                let tr_side = tensor.get(&key);
                dev = dev.max((graph_side - tr_side).norm());
            }
        }
    }
    dev
}

#[test]
fn main_identity_su2_level1_small_topologies() {
    let mf = su2_level(1).unwrap();
    let t = rat_int(1);
    for (g, n) in [(0u32, 3usize), (1, 1)] {
        let dev = crosscheck(&mf, &t, g, n);
        assert!(dev < 1e-7, "(g,n)=({g},{n}) deviation {dev}");
    }
}

#[test]
fn main_identity_su2_level1_deeper() {
    let mf = su2_level(1).unwrap();
    let t = rat_int(1);
    for (g, n) in [(0u32, 4usize), (1, 2), (2, 1)] {
        let dev = crosscheck(&mf, &t, g, n);
        assert!(dev < 1e-7, "(g,n)=({g},{n}) deviation {dev}");
    }
}

#[test]
fn main_identity_su2_level2_sample() {
    let mf = su2_level(2).unwrap();
    let dev = crosscheck(&mf, &rat_int(1), 1, 1);
    assert!(dev < 1e-7, "deviation {dev}");
    let dev = crosscheck(&mf, &rat(1, 2), 0, 3);
    assert!(dev < 1e-7, "deviation {dev}");
}

#[test]
fn main_identity_sl3_complex_s_matrix() {
    // non-self-dual labels and genuinely complex S-matrix entries
    let mf = modfun::catalog::sln_level(3, 1).unwrap();
    let t = rat_int(1);
    for (g, n) in [(0u32, 3usize), (1, 1), (1, 2)] {
        let dev = crosscheck(&mf, &t, g, n);
        assert!(dev < 1e-7, "(g,n)=({g},{n}) deviation {dev}");
    }
}

#[test]
fn main_identity_zero_central_charge_variant() {
    // c = 0 with r != 0: translation vanishes, the R-matrix does not; the
    // curve is assembled from the quadratic odd part plus two-point tails
    let mut mf = su2_level(1).unwrap();
    mf.c = modfun::scalar::rat_int(0);
    mf.r = vec![modfun::scalar::rat_int(0), rat(1, 3)];
    assert!(modfun::frobenius::validate_mf(&mf, Tolerance::default()).all_hard_passed());
    let t = rat_int(1);
    let curve = curve_from_cohft(&mf, &t, default_trunc(1, 2)).unwrap();
    // pure quadratic omega01 per channel
    for l in 0..2 {
        assert_eq!(curve.omega01[l].terms().count(), 1);
    }
    for (g, n) in [(0u32, 3usize), (1, 1), (0, 4), (1, 2)] {
        let dev = crosscheck(&mf, &t, g, n);
        assert!(dev < 1e-8, "(g,n)=({g},{n}) deviation {dev}");
    }
}

#[test]
fn free_energy_matches_graph_sum_g2() {
    let mf = su2_level(1).unwrap();
    let t = rat_int(1);
    let curve = curve_from_cohft(&mf, &t, default_trunc(2, 1)).unwrap();
    let f2 = free_energy(&curve, 2).unwrap();
    let gd = GiventalData::from_mf(&mf, &t, 10);
    let graph = cohft_integral_vec(&gd, 2, &[], &[]).unwrap();
    assert!((f2 - graph).norm() < 1e-7, "F2 = {f2}, graph sum = {graph}");
    assert!(f2.norm() > 1e-6, "F2 should not vanish at t = 1");
}

#[test]
fn verlinde_degeneration_is_t0_graph_sum() {
    // t = 0: the tensor from the Verlinde curve equals the t = 0 integrals
    let mf = su2_level(2).unwrap();
    let t0 = rat_int(0);
    for (g, n) in [(0u32, 3usize), (1, 1), (1, 2)] {
        let curve = curve_verlinde(&mf, default_trunc(g, n));
        let omega = tr_run(&curve, g, n).unwrap();
        let tensor = xi_decompose(&omega, &curve, Tolerance::default()).unwrap();
        let dim = 3 * g as i64 - 3 + n as i64;
        for channels in channel_tuples(mf.k(), n) {
            for total in 0..=dim {
                for degrees in degree_tuples(total, n) {
                    let graph_side = cohft_integral(&mf, &t0, g, &channels, &degrees).unwrap();
                    let key: Vec<(usize, u32)> = channels.iter().copied().zip(degrees.iter().copied()).collect();
                    let dev = (graph_side - tensor.get(&key)).norm();
                    assert!(dev < 1e-9, "(g,n)=({g},{n}) {channels:?} {degrees:?}: {dev}");
                }
            }
        }
    }
}

#[test]
fn t_homogeneity_omega_and_f2() {
    // ω_{g,n}|_t = t^{3g-3+3n/2} [ω at t=1 with ζ -> t^{1/2} ζ]; in
    // coefficients: entry at degrees m equals t^{(6g-6+4n+Σm)/2} × (t=1 entry)
    let mf = su2_level(1).unwrap();
    let t1 = rat_int(1);
    let tq = rat(1, 4);
    for (g, n) in [(1u32, 1usize), (0, 3)] {
        let c1 = curve_from_cohft(&mf, &t1, default_trunc(g, n)).unwrap();
        let cq = curve_from_cohft(&mf, &tq, default_trunc(g, n)).unwrap();
        let w1 = tr_run(&c1, g, n).unwrap();
        let wq = tr_run(&cq, g, n).unwrap();
        let half = 0.5f64; // t^{1/2} for t = 1/4
        for (ch, block) in &w1.blocks {
            for (deg, &v1) in block {
                let summ: i64 = deg.iter().sum();
                let p = 6 * g as i64 - 6 + 4 * n as i64 + summ;
                let expect = v1 * half.powi(p as i32);
                let got = wq.coeff(ch, deg);
                assert!(
                    (got - expect).norm() < 1e-9 * (1.0 + expect.norm()),
                    "(g,n)=({g},{n}) {ch:?} {deg:?}: {got} vs {expect}"
                );
            }
        }
    }
    // F2 scales by t^{3g-3} = (1/4)^3
    let f1 = free_energy(&curve_from_cohft(&mf, &t1, default_trunc(2, 1)).unwrap(), 2).unwrap();
    let fq = free_energy(&curve_from_cohft(&mf, &tq, default_trunc(2, 1)).unwrap(), 2).unwrap();
    assert!((fq - f1 * (0.25f64).powi(3)).norm() < 1e-9 * (1.0 + f1.norm()));
}

#[test]
fn tail_independence_of_xi_coefficients() {
    // zeroing the non-odd tail changes ω but not the Ξ-decomposition
    // coefficients, each taken against its own Ξ basis
    let mf = su2_level(1).unwrap();
    let t = rat_int(1);
    for (g, n) in [(1u32, 1usize), (0, 3), (1, 2)] {
        let full = curve_from_cohft(&mf, &t, default_trunc(g, n)).unwrap();
        let odd = full.with_odd_tail_only();
        let wf = tr_run(&full, g, n).unwrap();
        let wo = tr_run(&odd, g, n).unwrap();
        let tf = xi_decompose(&wf, &full, Tolerance::default()).unwrap();
        let to = xi_decompose(&wo, &odd, Tolerance::default()).unwrap();
        let dev = tf.max_deviation(&to);
        assert!(dev < 1e-8, "(g,n)=({g},{n}) deviation {dev}");
        // for these curves the zeroed monomials happen to be inert in the
        // recursion as well (parity), so only the coefficient identity is
        // asserted; the Ξ bases themselves do differ between the two runs
        let _ = (&wf, &wo);
    }
}

#[test]
fn eq_prov_verlinde_times_kdv() {
    // Σ_λ Π (S̲⁻¹)_{μ_i λ_i} ω^{[λ]}_{g,n} = D_μ ω^{KdV}_{g,n} on the t=0 curve
    let mf = su2_level(2).unwrap();
    for (g, n) in [(1u32, 1usize), (0, 3), (1, 2)] {
        let curve = curve_verlinde(&mf, default_trunc(g, n));
        let omega = tr_run(&curve, g, n).unwrap();
        let kdv = modfun::intersect::kdv_correlator(g, n).unwrap();
        let dim = 3 * g as i64 - 3 + n as i64;
        for mu in channel_tuples(mf.k(), n) {
            let d = modfun::frobenius::verlinde_dim(&mf, g, &mu, 1e-6).unwrap() as f64;
            for total in 0..=dim {
                for degrees in degree_tuples(total, n) {
                    let poles: Vec<i64> = degrees.iter().map(|&x| -(2 * x as i64 + 2)).collect();
                    let mut lhs = Scalar::new(0.0, 0.0);
                    for lam in channel_tuples(mf.k(), n) {
                        let mut w = Scalar::new(1.0, 0.0);
                        for i in 0..n {
                            w *= mf.s_inv(mu[i], lam[i]);
                        }
                        lhs += w * omega.coeff(&lam, &poles);
                    }
                    let key: Vec<(usize, u32)> = degrees.iter().map(|&x| (0usize, x)).collect();
                    let rhs = kdv.get(&key) * d;
                    assert!(
                        (lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()),
                        "(g,n)=({g},{n}) mu={mu:?} {degrees:?}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }
}

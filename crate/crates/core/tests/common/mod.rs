//! Independent oracles and instance generators shared by the integration
//! tests and the acceptance runner.
#![allow(dead_code)]

use nalgebra::DMatrix;
use netcp::cusum::{matrix_cusum, one_cp_population_norm};
use netcp::matrix::SymMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Piecewise-constant sequence of random symmetric matrices with entries in [0, 1].
#[derive(Clone, Debug)]
pub struct Piecewise {
    pub horizon: usize,
    pub n: usize,
    /// Last index of each segment but the final one.
    pub change_points: Vec<usize>,
    pub snapshots: Vec<SymMatrix>,
}

pub fn random_symmetric_unit(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| rng.gen::<f64>())
}

/// Random instance with `k` distinct change points in `1..T`.
pub fn random_piecewise(rng: &mut ChaCha8Rng, horizon: usize, n: usize, k: usize) -> Piecewise {
    let k = k.min(horizon - 1);
    let mut cps: Vec<usize> = Vec::new();
    while cps.len() < k {
        let c = rng.gen_range(1..horizon);
        if !cps.contains(&c) {
            cps.push(c);
        }
    }
    cps.sort_unstable();
    let segments: Vec<SymMatrix> = (0..=k).map(|_| random_symmetric_unit(rng, n)).collect();
    let snapshots = (1..=horizon)
        .map(|t| segments[cps.iter().filter(|&&c| c < t).count()].clone())
        .collect();
    Piecewise {
        horizon,
        n,
        change_points: cps,
        snapshots,
    }
}

/// Strategy over random instances: horizon up to 64, order up to 6, up to 3 changes.
pub fn piecewise_strategy() -> impl Strategy<Value = (u64, Piecewise)> {
    (any::<u64>(), 4usize..=64, 1usize..=6, 0usize..=3).prop_map(|(seed, t, n, k)| {
        let mut r = rng(seed);
        (seed, random_piecewise(&mut r, t, n, k))
    })
}

/// Direct double loop over the window, no prefix sums, no compensation.
pub fn naive_cusum(seq: &[DMatrix<f64>], s: usize, t: usize, e: usize) -> DMatrix<f64> {
    let n = seq[0].nrows();
    let (sf, tf, ef) = (s as f64, t as f64, e as f64);
    let wl = ((ef - tf) / ((ef - sf) * (tf - sf))).sqrt();
    let wr = ((tf - sf) / ((ef - sf) * (ef - tf))).sqrt();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let left: f64 = (s + 1..=t).map(|k| seq[k - 1][(i, j)]).sum();
            let right: f64 = (t + 1..=e).map(|k| seq[k - 1][(i, j)]).sum();
            out[(i, j)] = wl * left - wr * right;
        }
    }
    out
}

pub fn dense(seq: &[SymMatrix]) -> Vec<DMatrix<f64>> {
    seq.iter().map(SymMatrix::to_dense).collect()
}

pub fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cyclic Jacobi eigendecomposition; eigenvalues with column eigenvectors.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// Truncation at `tau2` followed by clipping at `tau3`, through the Jacobi oracle.
pub fn oracle_usvt(a: &DMatrix<f64>, tau2: f64, tau3: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let (vals, vecs) = jacobi_eigen(a);
    let mut out = DMatrix::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        if l.abs() >= tau2 {
            let col = vecs.column(k);
            out += l * col * col.transpose();
        }
    }
    out.map(|x| x.clamp(-tau3, tau3))
}

pub fn random_symmetric_dense(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&g + g.transpose()) * 0.5
}

fn cusum_at(p: &Piecewise, s: usize, t: usize, e: usize) -> SymMatrix {
    matrix_cusum(&p.snapshots, s, t, e).expect("valid triple")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Adding one fixed matrix to every snapshot leaves every CUSUM unchanged.
pub fn check_translation(seed: u64, p: &Piecewise) -> Result<(), String> {
    let mut r = rng(seed ^ 0x7472616e73);
    let w = SymMatrix::from_fn(p.n, |_, _| r.gen_range(-1.0..1.0));
    let shifted: Vec<SymMatrix> = p.snapshots.iter().map(|x| x.add(&w)).collect();
    let s = r.gen_range(0..p.horizon - 1);
    let e = r.gen_range(s + 2..=p.horizon);
    for t in s + 1..e {
        let a = cusum_at(p, s, t, e);
        let b = matrix_cusum(&shifted, s, t, e).unwrap();
        let diff = a.sub(&b).frobenius();
        let scale = a.frobenius().max(w.frobenius()).max(1.0);
        if diff > 1e-9 * scale {
            return Err(format!("(s,t,e)=({s},{t},{e}): diff {diff:e}"));
        }
    }
    Ok(())
}

/// Up to the first change point the CUSUM is a scalar multiple of its value there.
pub fn check_boundary_scaling(_seed: u64, p: &Piecewise) -> Result<(), String> {
    let Some(&eta) = p.change_points.first() else {
        return Ok(());
    };
    let big_t = p.horizon;
    let at_eta = cusum_at(p, 0, eta, big_t);
    for t in 1..=eta {
        let factor = ((t * (big_t - eta)) as f64 / (eta as f64 * (big_t - t) as f64)).sqrt();
        let expected = at_eta.scale(factor);
        let got = cusum_at(p, 0, t, big_t);
        let diff = got.sub(&expected).max_abs();
        if diff > 1e-9 * at_eta.max_abs().max(1.0) {
            return Err(format!("t={t}, eta={eta}: diff {diff:e}"));
        }
    }
    Ok(())
}

/// Inside a window holding one change point, `||Theta~(t)||^2` follows the closed form.
pub fn check_one_change(seed: u64, p: &Piecewise) -> Result<(), String> {
    if p.change_points.is_empty() {
        return Ok(());
    }
    let mut r = rng(seed ^ 0x6f6e65);
    let k = r.gen_range(0..p.change_points.len());
    let eta = p.change_points[k];
    let lo = if k == 0 { 0 } else { p.change_points[k - 1] };
    let hi = p.change_points.get(k + 1).copied().unwrap_or(p.horizon);
    let s = r.gen_range(lo..eta);
    let e = r.gen_range(eta + 1..=hi);
    let kappa = p.snapshots[eta].sub(&p.snapshots[eta - 1]).frobenius();
    for t in s + 1..e {
        let got = cusum_at(p, s, t, e).frobenius_sq();
        let want = one_cp_population_norm(s, e, eta, kappa, t).unwrap();
        if !rel_close(got, want, 1e-9) {
            return Err(format!("(s,t,e)=({s},{t},{e}), eta={eta}: {got} vs {want}"));
        }
    }
    Ok(())
}

/// On each segment, `||Theta~(0,T)(t)||^2` is monotone or decreases then increases.
pub fn check_unimodal(_seed: u64, p: &Piecewise) -> Result<(), String> {
    let big_t = p.horizon;
    let values: Vec<f64> = (1..big_t)
        .map(|t| cusum_at(p, 0, t, big_t).frobenius_sq())
        .collect();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut bounds = vec![1];
    bounds.extend(p.change_points.iter().copied());
    bounds.push(big_t - 1);
    for w in bounds.windows(2) {
        let (a, b) = (w[0].max(1), w[1].min(big_t - 1));
        if b <= a {
            continue;
        }
        let mut increasing_seen = false;
        for t in a..b {
            let d = values[t] - values[t - 1];
            if d.abs() <= 1e-9 * scale {
                continue;
            }
            if d > 0.0 {
                increasing_seen = true;
            } else if increasing_seen {
                return Err(format!("segment [{a}, {b}] rises then falls at t={t}"));
            }
        }
    }
    Ok(())
}

/// The exhaustive argmax over `t` of the population CUSUM norm is a change point.
pub fn check_population_argmax(p: &Piecewise) -> Result<(), String> {
    let big_t = p.horizon;
    let values: Vec<f64> = (1..big_t)
        .map(|t| cusum_at(p, 0, t, big_t).frobenius_sq())
        .collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let argmax = values.iter().position(|&v| v == best).unwrap() + 1;
    if p.change_points.contains(&argmax) {
        Ok(())
    } else {
        Err(format!(
            "argmax {argmax} is not among {:?}",
            p.change_points
        ))
    }
}

/// Absolute values in decreasing order.
pub fn sorted_abs(vals: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn orthonormal(r: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, k, |_, _| r.gen_range(-1.0..1.0));
    g.qr().q().columns(0, k).into_owned()
}

/// Low-rank `B` plus a small full-rank part, and `A = B + E` with a known `||E||_op`.
pub fn bound_instance(r: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>, f64) {
    let n = 20;
    let rank = r.gen_range(1..=4);
    let u = orthonormal(r, n, rank);
    let lambdas: Vec<f64> = (0..rank)
        .map(|_| r.gen_range(1.0..5.0) * if r.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut b = DMatrix::zeros(n, n);
    for (k, l) in lambdas.iter().enumerate() {
        let c = u.column(k);
        b += *l * c * c.transpose();
    }
    b += random_symmetric_dense(r, n) * r.gen_range(0.0..0.05);
    let e = random_symmetric_dense(r, n);
    let (ev, _) = jacobi_eigen(&e);
    let e = e * (r.gen_range(0.05..1.0) / sorted_abs(&ev)[0]);
    let a = &b + &e;
    let (ev, _) = jacobi_eigen(&e);
    // qualify: ||A - B||_op < tau2 / (1 + 1/3)
    let tau2 = (4.0 / 3.0) * sorted_abs(&ev)[0] * r.gen_range(1.001..1.5);
    (a, b, tau2)
}

//! Reference implementations used as test oracles. None of these call into
//! the library's numerical routines.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || rng.sample(StandardNormal))
}

pub fn pnorm(x: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

pub fn dual_exp(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

pub fn shrink(v: f64, a: f64) -> f64 {
    v.signum() * (v.abs() - a).max(0.0)
}

/// εq-norm by plain bisection on `‖S_{(1−ε)v}(x)‖_q − εv` over `[0, ‖x‖_q]`.
pub fn epsq_oracle(x: &[f64], eps: f64, q: f64) -> f64 {
    let h = |v: f64| {
        let s: Vec<f64> = x.iter().map(|xi| shrink(*xi, (1.0 - eps) * v)).collect();
        pnorm(&s, q) - eps * v
    };
    let (mut lo, mut hi) = (0.0, pnorm(x, q));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Group prox of `t(τ‖·‖₁ + (1−τ)w‖·‖_α)` from its optimality conditions:
/// after soft-thresholding by tτ the ℓα part either kills the block (when
/// `‖s‖_{α*} ≤ t(1−τ)w`) or solves `b_i + λ₂ (b_i/‖b‖_α)^{α−1} = s_i`,
/// which is found by bisecting on `N = ‖b‖_α`.
pub fn prox_group_oracle(z: &[f64], t: f64, tau: f64, w: f64, alpha: f64) -> Vec<f64> {
    let s: Vec<f64> = z.iter().map(|v| (v.abs() - t * tau).max(0.0)).collect();
    let l2 = t * (1.0 - tau) * w;
    let sign = |b: Vec<f64>| -> Vec<f64> { b.iter().zip(z).map(|(bi, zi)| bi * zi.signum()).collect() };
    if pnorm(&s, dual_exp(alpha)) <= l2 {
        return vec![0.0; z.len()];
    }
    if alpha == 1.0 {
        return sign(s.iter().map(|v| (v - l2).max(0.0)).collect());
    }
    if alpha.is_infinite() {
        // b = min(s, m) with Σ (s_i − m)₊ = l2
        let f = |m: f64| s.iter().map(|v| (v - m).max(0.0)).sum::<f64>() - l2;
        let (mut lo, mut hi) = (0.0, s.iter().cloned().fold(0.0, f64::max));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let m = 0.5 * (lo + hi);
        return sign(s.iter().map(|v| v.min(m)).collect());
    }
    // coordinate solution of b + l2 (b/N)^{α−1} = s_i for fixed N
    let coord = |si: f64, n: f64| -> f64 {
        let (mut lo, mut hi) = (0.0, si);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + l2 * (mid / n).powf(alpha - 1.0) > si {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    // ‖b(N)‖_α / N decreases in N and crosses 1 at the solution norm
    let (mut lo, mut hi) = ((1e-30f64).ln(), pnorm(&s, alpha).ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let n = mid.exp();
        let b: Vec<f64> = s.iter().map(|si| coord(*si, n)).collect();
        if pnorm(&b, alpha) > n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n = (0.5 * (lo + hi)).exp();
    sign(s.iter().map(|si| coord(*si, n)).collect())
}

/// Cyclic coordinate descent for `‖y − Xβ‖² + λ‖β‖₁`.
pub fn lasso_cd(x: &Array2<f64>, y: &Array1<f64>, lambda: f64) -> Vec<f64> {
    let p = x.ncols();
    let mut beta = vec![0.0; p];
    let mut r = y.clone();
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    for _ in 0..100_000 {
        let mut delta = 0.0_f64;
        for j in 0..p {
            let xj = x.column(j);
            let rho = xj.dot(&r) + col_sq[j] * beta[j];
            let new = shrink(rho, lambda / 2.0) / col_sq[j];
            let d = new - beta[j];
            if d != 0.0 {
                r.scaled_add(-d, &xj);
                beta[j] = new;
            }
            delta = delta.max(d.abs());
        }
        if delta < 1e-14 {
            break;
        }
    }
    beta
}

/// Block proximal-gradient descent for `‖y − Xβ‖² + λ Σ_g w_g ‖β_g‖₂`, each
/// block stepped with the Frobenius bound `2‖X_g‖_F²`.
pub fn group_lasso_bcd(x: &Array2<f64>, y: &Array1<f64>, lambda: f64, sizes: &[usize], w: &[f64]) -> Vec<f64> {
    let p = x.ncols();
    let mut beta = vec![0.0; p];
    let mut r = y.clone();
    let mut starts = vec![0];
    for s in sizes {
        starts.push(starts.last().unwrap() + s);
    }
    let lip: Vec<f64> = (0..sizes.len())
        .map(|g| 2.0 * (starts[g]..starts[g + 1]).map(|j| x.column(j).dot(&x.column(j))).sum::<f64>())
        .collect();
    for _ in 0..200_000 {
        let mut delta = 0.0_f64;
        for g in 0..sizes.len() {
            let idx = starts[g]..starts[g + 1];
            let point: Vec<f64> = idx
                .clone()
                .map(|j| beta[j] + 2.0 * x.column(j).dot(&r) / lip[g])
                .collect();
            let norm = pnorm(&point, 2.0);
            let factor = if norm > 0.0 { (1.0 - lambda * w[g] / lip[g] / norm).max(0.0) } else { 0.0 };
            for (k, j) in idx.enumerate() {
                let new = factor * point[k];
                let d = new - beta[j];
                if d != 0.0 {
                    r.scaled_add(-d, &x.column(j));
                    beta[j] = new;
                }
                delta = delta.max(d.abs());
            }
        }
        if delta < 1e-15 {
            break;
        }
    }
    beta
}

/// Golden-section maximisation of a unimodal function on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..iters {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    f(0.5 * (a + b))
}

/// `max_θ ⟨β, d(θ)⟩ / norm(d(θ))` over unit directions in the plane, i.e. the
/// dual of `norm` evaluated at `β`: a dense angle grid followed by
/// golden-section refinement around the best grid point.
pub fn planar_support(beta: [f64; 2], norm: impl Fn(&[f64]) -> f64) -> f64 {
    let ratio = |th: f64| {
        let d = [th.cos(), th.sin()];
        (beta[0] * d[0] + beta[1] * d[1]) / norm(&d)
    };
    let m = 4096;
    let step = std::f64::consts::TAU / m as f64;
    let (best, _) = (0..m)
        .map(|k| (k, ratio(k as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let th = best as f64 * step;
    golden_max(ratio, th - step, th + step, 200)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

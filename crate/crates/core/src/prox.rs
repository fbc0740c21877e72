//! Proximal operator of `t·‖·‖_ds`.
//!
//! The penalty is separable across groups. Inside a group the dual ball of
//! `τ‖·‖_1 + (1−τ)w‖·‖_α` is the Minkowski sum of an ℓ_{α*} ball of radius
//! `(1−τ)w` and an ℓ∞ ball of radius `τ`, so by Moreau
//!
//! ```text
//! prox(z) = z − Π_{t·(B_{α*}((1−τ)w) + B_∞(τ))}(z)
//! ```
//!
//! [`prox_group_minkowski`] computes that projection by alternating exact
//! projections onto the two summands. [`prox_group`] uses the equivalent
//! composition `prox_{t(1−τ)w‖·‖_α} ∘ S_{tτ}`, which is exact for every α
//! because the ℓα prox keeps signs and never grows a coordinate.

use crate::ds::DsParams;
use crate::error::{invalid, Error, Result};
use crate::norms::{self, conjugate_exponent, soft, soft_scalar};

/// Tolerances for the projection routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxSettings {
    pub max_alt_iters: usize,
    /// Stop the alternating projection once the objective decreases by less than this.
    pub alt_tol: f64,
    /// Relative tolerance of the Lagrange-multiplier search for general ℓq balls.
    pub lq_proj_tol: f64,
}

impl Default for ProxSettings {
    fn default() -> Self {
        Self {
            max_alt_iters: 10_000,
            alt_tol: 1e-12,
            lq_proj_tol: 1e-13,
        }
    }
}

impl ProxSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_alt_iters == 0 {
            return Err(invalid("max_alt_iters must be >= 1"));
        }
        if !(self.alt_tol > 0.0) || !(self.lq_proj_tol > 0.0) {
            return Err(invalid("projection tolerances must be positive"));
        }
        Ok(())
    }
}

/// Euclidean projection of `z` onto `{u : ‖u‖_q ≤ r}`.
pub fn project_lq_ball(z: &[f64], q: f64, r: f64) -> Result<Vec<f64>> {
    project_lq_ball_tol(z, q, r, ProxSettings::default().lq_proj_tol)
}

/// [`project_lq_ball`] with an explicit multiplier-search tolerance.
pub fn project_lq_ball_tol(z: &[f64], q: f64, r: f64, tol: f64) -> Result<Vec<f64>> {
    norms::check_exponent(q)?;
    if r.is_nan() || r < 0.0 {
        return Err(invalid(format!("ball radius must be >= 0, got {r}")));
    }
    Ok(project_lq(z, q, r, tol))
}

pub(crate) fn project_lq(z: &[f64], q: f64, r: f64, tol: f64) -> Vec<f64> {
    if norms::lq(z, q) <= r {
        return z.to_vec();
    }
    if r == 0.0 {
        return vec![0.0; z.len()];
    }
    if q == 2.0 {
        let scale = r / norms::lq(z, 2.0);
        z.iter().map(|v| v * scale).collect()
    } else if q.is_infinite() {
        z.iter().map(|v| v.clamp(-r, r)).collect()
    } else if q == 1.0 {
        soft(z, l1_threshold(z, r))
    } else {
        project_lq_general(z, q, r, tol)
    }
}

/// Threshold θ with `Σ(|z_i| − θ)_+ = r`, assuming `‖z‖_1 > r`.
fn l1_threshold(z: &[f64], r: f64) -> f64 {
    let mut a: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    a.sort_unstable_by(|l, r| r.total_cmp(l));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &aj) in a.iter().enumerate() {
        cum += aj;
        let candidate = (cum - r) / (j + 1) as f64;
        if aj - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    theta.max(0.0)
}

/// General 1 < q < ∞. The KKT system gives `t_i + κ t_i^{q−1} = |z_i|` per
/// coordinate for a common multiplier κ > 0 fixed by `‖t‖_q = r`.
fn project_lq_general(z: &[f64], q: f64, r: f64, tol: f64) -> Vec<f64> {
    let a: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    let solve = |kappa: f64| -> Vec<f64> { a.iter().map(|&ai| shrink_coordinate(ai, kappa, q)).collect() };
    let excess = |t: &[f64]| norms::lq(t, q) - r;

    // bracket κ: excess(κ_lo) > 0 ≥ excess(κ_hi)
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut t_hi = solve(hi);
    let mut e_hi = excess(&t_hi);
    while e_hi > 0.0 {
        lo = hi;
        hi *= 4.0;
        t_hi = solve(hi);
        e_hi = excess(&t_hi);
    }
    for _ in 0..200 {
        if e_hi.abs() <= tol * r || hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
        let t = solve(mid);
        let e = excess(&t);
        if e > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            t_hi = t;
            e_hi = e;
        }
    }
    // t_hi is feasible up to rounding; pin the norm to the radius
    let n = norms::lq(&t_hi, q);
    let fix = if n > r { r / n } else { 1.0 };
    t_hi.iter()
        .zip(z)
        .map(|(t, zi)| (t * fix).copysign(*zi))
        .collect()
}

/// Root in [0, a] of `t + κ t^{q−1} = a`, by safeguarded Newton.
fn shrink_coordinate(a: f64, kappa: f64, q: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let f = |t: f64| t + kappa * t.powf(q - 1.0) - a;
    let (mut lo, mut hi) = (0.0, a);
    // whichever term dominates gives the starting point
    let mut t = a.min((a / kappa).powf(1.0 / (q - 1.0)));
    for _ in 0..100 {
        let ft = f(t);
        if ft > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let d = 1.0 + kappa * (q - 1.0) * t.powf(q - 2.0);
        let mut next = t - ft / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * a || hi - lo <= 1e-16 * a {
            t = next;
            break;
        }
        t = next;
    }
    t
}

/// Projects `z` onto `{u + v : ‖u‖_q ≤ r1, ‖v‖_∞ ≤ r2}` by alternating exact
/// minimisation of `½‖z − u − v‖²` over `u` and `v`.
///
/// The loop starts from `v = clip(z, ±r2)`. Because the ℓq-ball projection
/// keeps signs and never enlarges a coordinate, the first sweep from there
/// already reaches a fixed point, so the loop usually exits after one pass.
///
/// Returns the pair; `u + v` is the projection.
pub fn project_minkowski_sum(
    z: &[f64],
    q: f64,
    r1: f64,
    r2: f64,
    s: &ProxSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    norms::check_exponent(q)?;
    s.validate()?;
    if r1.is_nan() || r2.is_nan() || r1 < 0.0 || r2 < 0.0 {
        return Err(invalid(format!("radii must be >= 0, got {r1} and {r2}")));
    }
    let n = z.len();
    if r2 == 0.0 {
        return Ok((project_lq(z, q, r1, s.lq_proj_tol), vec![0.0; n]));
    }
    if r1 == 0.0 {
        return Ok((vec![0.0; n], z.iter().map(|v| v.clamp(-r2, r2)).collect()));
    }

    let objective = |u: &[f64], v: &[f64]| -> f64 {
        0.5 * z
            .iter()
            .zip(u.iter().zip(v))
            .map(|(zi, (ui, vi))| (zi - ui - vi).powi(2))
            .sum::<f64>()
    };
    let mut u = vec![0.0; n];
    let mut v: Vec<f64> = z.iter().map(|zi| zi.clamp(-r2, r2)).collect();
    let mut buf = vec![0.0; n];
    let mut obj = objective(&u, &v);
    for _ in 0..s.max_alt_iters {
        for i in 0..n {
            buf[i] = z[i] - v[i];
        }
        u = project_lq(&buf, q, r1, s.lq_proj_tol);
        for i in 0..n {
            v[i] = (z[i] - u[i]).clamp(-r2, r2);
        }
        let next = objective(&u, &v);
        let decrease = obj - next;
        obj = next;
        if decrease < s.alt_tol || obj == 0.0 {
            return Ok((u, v));
        }
    }
    Err(Error::IterationLimit {
        iterations: s.max_alt_iters,
        u,
        v,
        residual: obj,
    })
}

fn check_group_args(t: f64, tau: f64, w: f64, alpha: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid(format!("prox step must be >= 0, got {t}")));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid(format!("tau must lie in [0, 1], got {tau}")));
    }
    if !(w > 0.0) {
        return Err(invalid(format!("group weight must be positive, got {w}")));
    }
    norms::check_exponent(alpha)
}

/// `argmin_β ½‖z − β‖² + t(τ‖β‖_1 + (1−τ)w‖β‖_α)` for a single group.
pub fn prox_group(z: &[f64], t: f64, tau: f64, w: f64, alpha: f64, s: &ProxSettings) -> Result<Vec<f64>> {
    check_group_args(t, tau, w, alpha)?;
    Ok(prox_group_fast(z, t, tau, w, alpha, s.lq_proj_tol))
}

pub(crate) fn prox_group_fast(z: &[f64], t: f64, tau: f64, w: f64, alpha: f64, tol: f64) -> Vec<f64> {
    if t == 0.0 {
        return z.to_vec();
    }
    let l1_level = t * tau;
    if tau == 1.0 {
        return soft(z, l1_level);
    }
    let group_level = t * (1.0 - tau) * w;
    if alpha == 1.0 {
        return soft(z, l1_level + group_level);
    }
    let shrunk = soft(z, l1_level);
    if alpha == 2.0 {
        let norm = norms::lq(&shrunk, 2.0);
        if norm <= group_level {
            return vec![0.0; z.len()];
        }
        let factor = 1.0 - group_level / norm;
        return shrunk.iter().map(|v| v * factor).collect();
    }
    // prox of an ℓα norm is the residual of the ℓα* ball projection
    let proj = project_lq(&shrunk, conjugate_exponent(alpha), group_level, tol);
    shrunk
        .iter()
        .zip(proj)
        .map(|(s, p)| {
            let r = s - p;
            // guard against rounding flipping a sign
            if r * s < 0.0 {
                0.0
            } else {
                r
            }
        })
        .collect()
}

/// Same operator as [`prox_group`], computed through the Minkowski-sum
/// projection of the dual ball with no closed-form shortcuts.
pub fn prox_group_minkowski(
    z: &[f64],
    t: f64,
    tau: f64,
    w: f64,
    alpha: f64,
    s: &ProxSettings,
) -> Result<Vec<f64>> {
    check_group_args(t, tau, w, alpha)?;
    let (u, v) = project_minkowski_sum(z, conjugate_exponent(alpha), t * (1.0 - tau) * w, t * tau, s)?;
    Ok(z.iter().zip(u.iter().zip(&v)).map(|(zi, (ui, vi))| zi - ui - vi).collect())
}

/// `prox_{t‖·‖_ds}(z)`, group by group.
pub fn prox_ds(z: &[f64], t: f64, params: &DsParams, s: &ProxSettings) -> Result<Vec<f64>> {
    params.groups().check("z", z)?;
    if t.is_nan() || t < 0.0 {
        return Err(invalid(format!("prox step must be >= 0, got {t}")));
    }
    let mut out = vec![0.0; z.len()];
    prox_ds_into(z, t, params, s.lq_proj_tol, &mut out);
    Ok(out)
}

pub(crate) fn prox_ds_into(z: &[f64], t: f64, params: &DsParams, tol: f64, out: &mut [f64]) {
    if params.tau() == 1.0 {
        for (o, &zi) in out.iter_mut().zip(z) {
            *o = soft_scalar(zi, t);
        }
        return;
    }
    for (g, range) in params.groups().ranges().enumerate() {
        let res = prox_group_fast(
            &z[range.clone()],
            t,
            params.tau(),
            params.weights()[g],
            params.alphas()[g],
            tol,
        );
        out[range].copy_from_slice(&res);
    }
}

/// [`prox_ds`] through the Minkowski-sum projection in every group.
pub fn prox_ds_minkowski(z: &[f64], t: f64, params: &DsParams, s: &ProxSettings) -> Result<Vec<f64>> {
    params.groups().check("z", z)?;
    let mut out = Vec::with_capacity(z.len());
    for (g, range) in params.groups().ranges().enumerate() {
        out.extend(prox_group_minkowski(
            &z[range],
            t,
            params.tau(),
            params.weights()[g],
            params.alphas()[g],
            s,
        )?);
    }
    Ok(out)
}

/// Projection of `z` onto `{x : ‖x‖*_ds ≤ t}`, the Moreau complement of [`prox_ds`].
pub fn project_ds_dual_ball(z: &[f64], t: f64, params: &DsParams, s: &ProxSettings) -> Result<Vec<f64>> {
    params.groups().check("z", z)?;
    let mut out = Vec::with_capacity(z.len());
    for (g, range) in params.groups().ranges().enumerate() {
        let w = params.weights()[g];
        let (u, v) = project_minkowski_sum(
            &z[range],
            params.dual_alpha(g),
            t * (1.0 - params.tau()) * w,
            t * params.tau(),
            s,
        )?;
        out.extend(u.iter().zip(&v).map(|(a, b)| a + b));
    }
    Ok(out)
}

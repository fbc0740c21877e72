//! ℓq norms, soft-thresholding and the εq-norm family.
//!
//! The εq-norm of `x` is the unique `v ≥ 0` solving
//!
//! ```text
//! ‖S_{(1−ε)v}(x)‖_q = ε·v
//! ```
//!
//! where `S_a` is component-wise soft-thresholding. It interpolates between
//! `‖x‖_q` (ε = 1) and `‖x‖_∞` (ε → 0). Its unit ball is the Minkowski sum of
//! an ℓq ball of radius ε and an ℓ∞ ball of radius 1 − ε, and its dual norm is
//! `ε‖y‖_{q*} + (1−ε)‖y‖_1`.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Relative bracket width at which the bisection stops.
const BISECTION_REL_WIDTH: f64 = 1e-13;

/// Conjugate exponent `q/(q−1)`, with `1 ↔ ∞`.
pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

pub(crate) fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(invalid(format!("exponent q must be >= 1 or infinite, got {q}")));
    }
    Ok(())
}

/// ℓq norm of `x` for `q ≥ 1` (use `f64::INFINITY` for the max norm).
pub fn lq_norm(x: &[f64], q: f64) -> Result<f64> {
    check_exponent(q)?;
    if x.is_empty() {
        return Err(invalid("lq_norm of an empty vector"));
    }
    Ok(lq(x, q))
}

/// Unchecked ℓq norm. `q` must already be validated.
pub(crate) fn lq(x: &[f64], q: f64) -> f64 {
    if q == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if q == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else if q.is_infinite() {
        linf(x)
    } else {
        let m = linf(x);
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

pub(crate) fn linf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Component-wise `sgn(x_i)(|x_i| − a)_+`.
pub fn soft_threshold(x: &[f64], a: f64) -> Result<Vec<f64>> {
    if a.is_nan() || a < 0.0 {
        return Err(invalid(format!("soft-threshold level must be >= 0, got {a}")));
    }
    Ok(soft(x, a))
}

pub(crate) fn soft(x: &[f64], a: f64) -> Vec<f64> {
    x.iter().map(|&v| soft_scalar(v, a)).collect()
}

#[inline]
pub(crate) fn soft_scalar(v: f64, a: f64) -> f64 {
    let m = v.abs() - a;
    // kinks map to exactly zero
    if m > 0.0 {
        m.copysign(v)
    } else {
        0.0
    }
}

/// Parameters `(ε, q)` of an εq-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsQ {
    epsilon: f64,
    q: f64,
}

impl EpsQ {
    /// `epsilon` in (0, 1]; `q ≥ 1` or `f64::INFINITY`.
    ///
    /// ε = 0 is rejected: the ε → 0 limit is the max norm, request it with
    /// `q = ∞` instead.
    pub fn new(epsilon: f64, q: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        check_exponent(q)?;
        Ok(Self { epsilon, q })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Exponent of the ℓ-norm appearing in the dual norm.
    pub fn dual_exponent(&self) -> f64 {
        conjugate_exponent(self.q)
    }
}

/// Residual `‖S_{(1−ε)v}(x)‖_q − ε·v` of the defining equation.
pub fn epsq_residual(x: &[f64], p: EpsQ, v: f64) -> f64 {
    let shift = (1.0 - p.epsilon) * v;
    let shrunk: Vec<f64> = x.iter().map(|&xi| (xi.abs() - shift).max(0.0)).collect();
    lq(&shrunk, p.q) - p.epsilon * v
}

/// εq-norm of `x`.
///
/// ε = 1, q = ∞ and the zero vector are answered in closed form. For q ∈ {1, 2}
/// the defining equation is piecewise linear / quadratic in `v` and is solved
/// exactly on the right segment after sorting `|x|`. Every other `q` goes
/// through [`epsq_norm_bisection`].
pub fn epsq_norm(x: &[f64], p: EpsQ) -> f64 {
    if let Some(v) = closed_form(x, p) {
        return v;
    }
    if p.q == 1.0 || p.q == 2.0 {
        segment_scan(x, p)
    } else {
        bisect(x, p)
    }
}

/// εq-norm by bisection on the defining equation, for any `q`.
///
/// The bracket comes from the two-sided bounds against ‖·‖_q and ‖·‖_∞, and
/// the iteration stops at relative width 1e-13. Kept public as the reference
/// route for the exact q ∈ {1, 2} paths.
pub fn epsq_norm_bisection(x: &[f64], p: EpsQ) -> f64 {
    closed_form(x, p).unwrap_or_else(|| bisect(x, p))
}

fn closed_form(x: &[f64], p: EpsQ) -> Option<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Some(0.0);
    }
    if p.q.is_infinite() {
        return Some(linf(x));
    }
    if p.epsilon == 1.0 {
        return Some(lq(x, p.q));
    }
    None
}

fn bisect(x: &[f64], p: EpsQ) -> f64 {
    let eps = p.epsilon;
    let c = 1.0 - eps;
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let norm_q = lq(&abs, p.q);
    let norm_inf = linf(&abs);
    let dim_root = (abs.len() as f64).powf(1.0 / p.q);
    let denom = dim_root * c + eps;

    let mut lo = norm_inf.max(norm_q / denom) * (1.0 - 1e-12);
    let mut hi = norm_q.min(dim_root * norm_inf / denom) * (1.0 + 1e-12);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }

    let h = |v: f64| -> f64 {
        let shift = c * v;
        let m = abs.iter().fold(0.0_f64, |m, &a| m.max(a - shift));
        let shrunk_norm = if m <= 0.0 {
            0.0
        } else {
            let s: f64 = abs
                .iter()
                .map(|&a| ((a - shift).max(0.0) / m).powf(p.q))
                .sum();
            m * s.powf(1.0 / p.q)
        };
        shrunk_norm - eps * v
    };

    for _ in 0..256 {
        if hi - lo <= BISECTION_REL_WIDTH * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mid = 0.5 * (lo + hi);
    [mid, lo, hi]
        .into_iter()
        .min_by(|a, b| h(*a).abs().total_cmp(&h(*b).abs()))
        .unwrap_or(mid)
}

/// Exact solve for q ∈ {1, 2}.
///
/// With `|x|` sorted descending as `a_1 ≥ a_2 ≥ …` and `c = 1 − ε`, the active
/// set at the root is `{1..k}` for the smallest `k` whose segment solution
/// `v_k` satisfies `a_{k+1} ≤ c·v_k`.
fn segment_scan(x: &[f64], p: EpsQ) -> f64 {
    let eps = p.epsilon;
    let c = 1.0 - eps;
    let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    a.sort_unstable_by(|l, r| r.total_cmp(l));

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    // running mean and Σ(a_i − ā)² keep kQ − S² = k·Σ(a_i − ā)² free of cancellation
    let mut mean = 0.0;
    let mut spread = 0.0;
    let mut v = 0.0;
    for k in 0..a.len() {
        let active = (k + 1) as f64;
        sum += a[k];
        sum_sq += a[k] * a[k];
        let delta = a[k] - mean;
        mean += delta / active;
        spread += delta * (a[k] - mean);
        v = if p.q == 1.0 {
            sum / (active * c + eps)
        } else {
            // (k c² − ε²) v² − 2 c S v + Q = 0, smaller root in stable form
            let disc = (eps * eps * sum_sq - c * c * active * spread).max(0.0);
            sum_sq / (c * sum + disc.sqrt())
        };
        if k + 1 == a.len() || a[k + 1] <= c * v {
            break;
        }
    }
    v
}

/// Unique split `x = spiky + flat` with `‖spiky‖_q = ε·v` and
/// `‖flat‖_∞ = (1−ε)·v`, where `v` is the εq-norm of `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub spiky: Vec<f64>,
    pub flat: Vec<f64>,
    pub norm_value: f64,
}

pub fn epsq_decompose(x: &[f64], p: EpsQ) -> Decomposition {
    let v = epsq_norm(x, p);
    let cap = (1.0 - p.epsilon) * v;
    let mut spiky = Vec::with_capacity(x.len());
    let mut flat = Vec::with_capacity(x.len());
    for &xi in x {
        let s = soft_scalar(xi, cap);
        spiky.push(s);
        flat.push(xi - s);
    }
    Decomposition {
        spiky,
        flat,
        norm_value: v,
    }
}

/// Dual of the εq-norm: `ε‖y‖_{q/(q−1)} + (1−ε)‖y‖_1`, or `‖y‖_1` for q = ∞.
pub fn epsq_dual_norm(y: &[f64], p: EpsQ) -> f64 {
    let l1 = lq(y, 1.0);
    if p.q.is_infinite() {
        return l1;
    }
    p.epsilon * lq(y, p.dual_exponent()) + (1.0 - p.epsilon) * l1
}

/// Points on the planar unit sphere `{x ∈ ℝ² : ‖x‖_εq = 1}`.
///
/// Directions are spread uniformly in angle starting at (1, 0); each is scaled
/// by the reciprocal of its εq-norm.
pub fn epsq_ball_boundary(p: EpsQ, resolution: usize) -> Result<Vec<[f64; 2]>> {
    if resolution < 8 {
        return Err(invalid(format!("resolution must be >= 8, got {resolution}")));
    }
    let step = std::f64::consts::TAU / resolution as f64;
    Ok((0..resolution)
        .map(|i| {
            let theta = i as f64 * step;
            let d = [theta.cos(), theta.sin()];
            let r = 1.0 / epsq_norm(&d, p);
            [r * d[0], r * d[1]]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ep(e: f64, q: f64) -> EpsQ {
        EpsQ::new(e, q).unwrap()
    }

    #[test]
    fn lq_norm_examples() {
        assert_eq!(lq_norm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert_eq!(lq_norm(&[1.0, -1.0], f64::INFINITY).unwrap(), 1.0);
        assert_eq!(lq_norm(&[1.0, 1.0, 1.0], 1.0).unwrap(), 3.0);
        assert_relative_eq!(lq_norm(&[1.0, 2.0, 2.0], 3.0).unwrap(), 17f64.cbrt(), max_relative = 1e-15);
        assert!(lq_norm(&[1.0], 0.5).is_err());
        assert!(lq_norm(&[], 2.0).is_err());
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(&[2.0, -0.5], 1.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(soft_threshold(&[-3.0], 1.0).unwrap(), vec![-2.0]);
        let x = [0.3, -7.0, 0.0];
        assert_eq!(soft_threshold(&x, 0.0).unwrap(), x.to_vec());
        assert!(soft_threshold(&x, -1.0).is_err());
        // threshold exactly at |x| gives a signless zero
        assert_eq!(soft_threshold(&[-1.0], 1.0).unwrap()[0].to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn epsq_rejects_bad_parameters() {
        assert!(EpsQ::new(0.0, 2.0).is_err());
        assert!(EpsQ::new(1.2, 2.0).is_err());
        assert!(EpsQ::new(0.5, 0.5).is_err());
        assert!(EpsQ::new(0.5, f64::NAN).is_err());
        assert!(EpsQ::new(0.5, f64::INFINITY).is_ok());
    }

    #[test]
    fn unit_vector_has_norm_one() {
        for &(e, q) in &[(0.1, 1.0), (0.5, 2.0), (0.9, 3.5), (0.3, f64::INFINITY)] {
            let mut x = vec![0.0; 6];
            x[2] = 1.0;
            assert_relative_eq!(epsq_norm(&x, ep(e, q)), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn ones_vector_closed_form() {
        for &(e, q) in &[(0.2, 1.0), (0.5, 2.0), (0.7, 1.5), (0.05, 4.0)] {
            let p = 7usize;
            let x = vec![1.0; p];
            let root = (p as f64).powf(1.0 / q);
            let expected = root / (root * (1.0 - e) + e);
            assert_relative_eq!(epsq_norm(&x, ep(e, q)), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn two_ones_half_eps_q2() {
        let v = epsq_norm(&[1.0, 1.0], ep(0.5, 2.0));
        assert_relative_eq!(v, 4.0 - 2.0 * 2f64.sqrt(), max_relative = 1e-14);
        let b = epsq_norm_bisection(&[1.0, 1.0], ep(0.5, 2.0));
        assert_relative_eq!(b, v, max_relative = 1e-12);
    }

    #[test]
    fn eps_one_is_lq() {
        let x = [0.3, -1.2, 2.5, 0.0];
        assert_eq!(epsq_norm(&x, ep(1.0, 2.0)), lq(&x, 2.0));
        assert_eq!(epsq_norm(&x, ep(0.4, f64::INFINITY)), 2.5);
    }

    #[test]
    fn decomposition_examples() {
        let d = epsq_decompose(&[0.0, 0.0], ep(0.5, 2.0));
        assert_eq!(d.norm_value, 0.0);
        assert_eq!(d.spiky, vec![0.0, 0.0]);
        assert_eq!(d.flat, vec![0.0, 0.0]);

        let s2 = 2f64.sqrt();
        let d = epsq_decompose(&[1.0, 1.0], ep(0.5, 2.0));
        assert_relative_eq!(d.norm_value, 4.0 - 2.0 * s2, max_relative = 1e-14);
        for i in 0..2 {
            assert_relative_eq!(d.flat[i], 2.0 - s2, max_relative = 1e-13);
            assert_relative_eq!(d.spiky[i], s2 - 1.0, max_relative = 1e-13);
        }

        let x = [1.5, -0.2, 3.0];
        let d = epsq_decompose(&x, ep(1.0, 3.0));
        assert_eq!(d.spiky, x.to_vec());
        assert!(d.flat.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn dual_norm_examples() {
        let y = [1.0, -2.0, 0.5];
        let l1 = 3.5;
        let l2 = (1.0f64 + 4.0 + 0.25).sqrt();
        assert_relative_eq!(epsq_dual_norm(&y, ep(0.5, 2.0)), 0.5 * l2 + 0.5 * l1, max_relative = 1e-15);
        assert_eq!(epsq_dual_norm(&y, ep(0.3, f64::INFINITY)), l1);
        assert_relative_eq!(epsq_dual_norm(&y, ep(0.25, 1.0)), 0.25 * 2.0 + 0.75 * l1, max_relative = 1e-15);
        assert_relative_eq!(epsq_dual_norm(&[1.0, 0.0], ep(0.37, 2.0)), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn ball_boundary_examples() {
        assert!(epsq_ball_boundary(ep(0.5, 2.0), 4).is_err());
        let pts = epsq_ball_boundary(ep(0.5, 2.0), 8).unwrap();
        assert_eq!(pts[0], [1.0, 0.0]);
        // diagonal direction sits at radius √2/(4 − 2√2)
        let r = (pts[1][0].powi(2) + pts[1][1].powi(2)).sqrt();
        assert_relative_eq!(r, 2f64.sqrt() / (4.0 - 2.0 * 2f64.sqrt()), max_relative = 1e-12);
        for p in epsq_ball_boundary(ep(1.0, 2.0), 64).unwrap() {
            assert_relative_eq!((p[0] * p[0] + p[1] * p[1]).sqrt(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_exponent(1.0), f64::INFINITY);
        assert_eq!(conjugate_exponent(f64::INFINITY), 1.0);
        assert_eq!(conjugate_exponent(2.0), 2.0);
        assert_relative_eq!(conjugate_exponent(3.0), 1.5);
    }
}

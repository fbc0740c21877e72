//! Accelerated proximal gradient for
//!
//! ```text
//! minimize_β  ‖y − Xβ‖² + λ‖β‖_ds
//! ```
//!
//! with a duality-gap stopping rule. The loss carries no ½ and no 1/n, so its
//! gradient is `2Xᵀ(Xβ − y)`. The dual problem is
//!
//! ```text
//! maximize_θ  ‖y‖² − ‖λθ/2 − y‖²   s.t.  ‖Xᵀθ‖*_ds ≤ 1
//! ```
//!
//! and a feasible θ is obtained from any primal iterate by rescaling the
//! residual `2(y − Xβ)/λ` into the dual ball.

use ndarray::{Array1, Array2, ArrayView1};
use serde::Serialize;

use crate::ds::{self, DsParams};
use crate::error::{check_len, invalid, Error, Result};
use crate::norms::EpsQ;
use crate::prox::{self, ProxSettings};

/// A regularized least-squares instance.
#[derive(Debug, Clone)]
pub struct Problem {
    x: Array2<f64>,
    y: Array1<f64>,
    lambda: f64,
    params: DsParams,
}

impl Problem {
    pub fn new(x: Array2<f64>, y: Array1<f64>, lambda: f64, params: DsParams) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(invalid("design matrix has no rows"));
        }
        check_len("rows of X vs length of y", x.nrows(), y.len())?;
        check_len("columns of X vs group layout", params.dim(), x.ncols())?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("lambda must be positive and finite, got {lambda}")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(Self { x, y, lambda, params })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn params(&self) -> &DsParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Same data with a different penalty level.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.x.clone(), self.y.clone(), lambda, self.params.clone())
    }

    fn check_beta(&self, beta: &[f64]) -> Result<()> {
        check_len("beta", self.p(), beta.len())
    }
}

/// `‖y − Xβ‖² + λ‖β‖_ds`.
pub fn primal_objective(beta: &[f64], prob: &Problem) -> Result<f64> {
    prob.check_beta(beta)?;
    let fit = prob.x.dot(&ArrayView1::from(beta));
    Ok(sq_dist(&prob.y, &fit) + prob.lambda * ds::ds_norm_unchecked(beta, &prob.params))
}

/// `‖y‖² − ‖λθ/2 − y‖²`. Only a lower bound on the primal when θ is feasible.
pub fn dual_objective(theta: &[f64], prob: &Problem) -> Result<f64> {
    check_len("theta", prob.n(), theta.len())?;
    Ok(dual_value(theta, prob))
}

fn dual_value(theta: &[f64], prob: &Problem) -> f64 {
    let half = 0.5 * prob.lambda;
    let y_sq: f64 = prob.y.iter().map(|v| v * v).sum();
    let gap_sq: f64 = prob
        .y
        .iter()
        .zip(theta)
        .map(|(yi, ti)| (half * ti - yi).powi(2))
        .sum();
    y_sq - gap_sq
}

fn sq_dist(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum()
}

/// A dual-feasible point together with the per-group split of `Xᵀθ` into an
/// ℓ_{α*_g} part `u_g` and an ℓ∞ part `v_g`.
#[derive(Debug, Clone, Serialize)]
pub struct DualCertificate {
    pub theta: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// Factor the raw residual was divided by (≥ 1).
    pub scaling: f64,
}

/// Rescales `2(y − Xβ)/λ` so that `‖Xᵀθ‖*_ds ≤ 1` and splits each
/// `X_(g)ᵀθ` by its ε-decomposition.
pub fn dual_feasible_point(beta: &[f64], prob: &Problem) -> Result<DualCertificate> {
    prob.check_beta(beta)?;
    let resid = &prob.y - &prob.x.dot(&ArrayView1::from(beta));
    let (theta, corr, scaling) = feasible_theta(&resid, prob);

    let params = &prob.params;
    let mut u = Vec::with_capacity(params.n_groups());
    let mut v = Vec::with_capacity(params.n_groups());
    for (g, range) in params.groups().ranges().enumerate() {
        let xg = &corr.as_slice().expect("contiguous")[range];
        let eps = params.epsilon(g);
        let ug: Vec<f64> = if eps <= 0.0 {
            vec![0.0; xg.len()]
        } else {
            let p = EpsQ::new(eps.min(1.0), params.dual_alpha(g)).expect("validated group parameters");
            crate::norms::epsq_decompose(xg, p).spiky
        };
        let vg = xg.iter().zip(&ug).map(|(a, b)| a - b).collect();
        u.push(ug);
        v.push(vg);
    }
    Ok(DualCertificate {
        theta: theta.to_vec(),
        u,
        v,
        scaling,
    })
}

/// Returns (θ, Xᵀθ, scaling).
fn feasible_theta(resid: &Array1<f64>, prob: &Problem) -> (Array1<f64>, Array1<f64>, f64) {
    let raw = resid * (2.0 / prob.lambda);
    let corr = prob.x.t().dot(&raw);
    let dn = ds::ds_dual_norm_unchecked(corr.as_slice().expect("contiguous"), &prob.params);
    let scaling = dn.max(1.0);
    (raw / scaling, corr / scaling, scaling)
}

/// `‖2Xᵀ(y − Xβ)‖*_ds / λ`; at most 1 at the optimum.
pub fn gradient_dual_ratio(beta: &[f64], prob: &Problem) -> Result<f64> {
    prob.check_beta(beta)?;
    let resid = &prob.y - &prob.x.dot(&ArrayView1::from(beta));
    let corr = prob.x.t().dot(&resid) * 2.0;
    Ok(ds::ds_dual_norm_unchecked(corr.as_slice().expect("contiguous"), &prob.params) / prob.lambda)
}

/// Largest eigenvalue of `XᵀX` by power iteration.
///
/// Stops after `max_steps` or once successive estimates agree to `rel_tol`.
pub fn gram_spectral_norm(x: &Array2<f64>, max_steps: usize, rel_tol: f64) -> f64 {
    let p = x.ncols();
    if p == 0 {
        return 0.0;
    }
    let mut v = Array1::from_elem(p, 1.0 / (p as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..max_steps {
        let w = x.t().dot(&x.dot(&v));
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return estimate;
        }
        let converged = (norm - estimate).abs() <= rel_tol * norm;
        estimate = norm;
        v = w / norm;
        if converged {
            break;
        }
    }
    estimate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub beta_hat: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Step size in use when the solver stopped.
    pub step: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Absolute duality-gap target.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial step; defaults to `1/(2·λmax(XᵀX))`.
    pub step: Option<f64>,
    pub power_steps: usize,
    pub power_rel_tol: f64,
    pub prox: ProxSettings,
    pub record_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 10_000,
            step: None,
            power_steps: 20,
            power_rel_tol: 1e-6,
            prox: ProxSettings::default(),
            record_trace: true,
        }
    }
}

/// Solves `prob` to duality gap `tol` or until `max_iters` iterations.
pub fn solve(prob: &Problem, tol: f64, max_iters: usize, step: Option<f64>) -> Result<SolveResult> {
    solve_with(
        prob,
        &SolveOptions {
            tol,
            max_iters,
            step,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_with(prob: &Problem, opts: &SolveOptions) -> Result<SolveResult> {
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if let Some(s) = opts.step {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid(format!("step must be positive, got {s}")));
        }
    }
    opts.prox.validate()?;

    let (x, y, lambda, params) = (&prob.x, &prob.y, prob.lambda, &prob.params);
    let p = prob.p();
    let penalty = |b: &Array1<f64>| ds::ds_norm_unchecked(b.as_slice().expect("contiguous"), params);

    // Lipschitz constant of the loss gradient
    let mut lip = match opts.step {
        Some(s) => 1.0 / s,
        None => 2.0 * gram_spectral_norm(x, opts.power_steps, opts.power_rel_tol),
    };
    if !(lip > 0.0) {
        // X = 0: any step works, the loss is constant
        lip = 1.0;
    }

    let mut beta = Array1::<f64>::zeros(p);
    let mut fit = Array1::<f64>::zeros(prob.n());
    let mut beta_prev = beta.clone();
    let mut fit_prev = fit.clone();
    let mut obj = sq_dist(y, &fit);
    let mut momentum_t = 1.0_f64;
    let mut trace = Vec::new();

    // gap = ‖r‖²(1 − 1/s)² + λ(Ω(β) − ⟨Xᵀθ, β⟩), free of the ‖y‖² cancellation
    let certify = |beta: &Array1<f64>, fit: &Array1<f64>, primal: f64| -> (f64, f64) {
        let resid = y - fit;
        let (_, corr, scaling) = feasible_theta(&resid, prob);
        let shrink = 1.0 - 1.0 / scaling;
        let gap = resid.dot(&resid) * shrink * shrink + lambda * (penalty(beta) - corr.dot(beta));
        (primal - gap, gap)
    };

    let (mut dual, mut gap) = certify(&beta, &fit, obj);
    if opts.record_trace {
        trace.push(TraceRow {
            iter: 0,
            primal: obj,
            dual,
            gap,
        });
    }
    let mut iterations = 0;
    let mut converged = gap <= opts.tol;
    let mut candidate = vec![0.0; p];

    while !converged && iterations < opts.max_iters {
        iterations += 1;
        let next_t = 0.5 * (1.0 + (1.0 + 4.0 * momentum_t * momentum_t).sqrt());
        let m = (momentum_t - 1.0) / next_t;
        let z = &beta + &((&beta - &beta_prev) * m);
        let fit_z = &fit + &((&fit - &fit_prev) * m);
        let loss_z = sq_dist(y, &fit_z);
        let grad = x.t().dot(&(&fit_z - y)) * 2.0;

        // backtrack until the quadratic upper model holds
        let (cand, fit_c, loss_c) = loop {
            let step_point = &z - &(&grad / lip);
            prox::prox_ds_into(
                step_point.as_slice().expect("contiguous"),
                lambda / lip,
                params,
                opts.prox.lq_proj_tol,
                &mut candidate,
            );
            let cand = Array1::from(candidate.clone());
            let fit_c = x.dot(&cand);
            let loss_c = sq_dist(y, &fit_c);
            let d = &cand - &z;
            let model = loss_z + grad.dot(&d) + 0.5 * lip * d.dot(&d);
            if loss_c <= model + 1e-12 * (1.0 + loss_z.abs()) {
                break (cand, fit_c, loss_c);
            }
            lip *= 2.0;
        };

        let obj_c = loss_c + lambda * penalty(&cand);
        // a plain proximal step cannot increase the objective except by
        // rounding, so it is always accepted
        if obj_c > obj && m != 0.0 {
            // restart momentum and retry from the current iterate
            momentum_t = 1.0;
            beta_prev.assign(&beta);
            fit_prev.assign(&fit);
            continue;
        }

        beta_prev = std::mem::replace(&mut beta, cand);
        fit_prev = std::mem::replace(&mut fit, fit_c);
        obj = obj_c;
        momentum_t = next_t;

        let (d, g) = certify(&beta, &fit, obj);
        dual = d;
        gap = g;
        if opts.record_trace {
            trace.push(TraceRow {
                iter: iterations,
                primal: obj,
                dual,
                gap,
            });
        }
        converged = gap <= opts.tol;
    }

    Ok(SolveResult {
        beta_hat: beta.to_vec(),
        primal_objective: obj,
        dual_objective: dual,
        duality_gap: gap,
        iterations,
        converged,
        step: 1.0 / lip,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ds::GroupStructure;
    use ndarray::array;

    fn toy() -> Problem {
        let x = array![
            [1.0, 0.2, -0.3, 0.5],
            [0.1, 1.0, 0.4, -0.2],
            [-0.3, 0.5, 1.0, 0.1],
            [0.6, -0.1, 0.2, 1.0],
            [0.2, 0.3, -0.5, 0.4]
        ];
        let y = array![1.0, -0.5, 0.3, 2.0, 0.1];
        let params = DsParams::new(GroupStructure::new(vec![2, 2]).unwrap(), 0.4, vec![1.0, 1.5], vec![2.0, 3.0]).unwrap();
        Problem::new(x, y, 0.5, params).unwrap()
    }

    #[test]
    fn problem_validation() {
        let params = DsParams::lasso(2).unwrap();
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        assert!(Problem::new(x.clone(), array![1.0], 1.0, params.clone()).is_err());
        assert!(Problem::new(x.clone(), array![1.0, 2.0], 0.0, params.clone()).is_err());
        assert!(Problem::new(array![[1.0, f64::NAN], [0.0, 1.0]], array![1.0, 2.0], 1.0, params.clone()).is_err());
        assert!(Problem::new(x.clone(), array![1.0, f64::INFINITY], 1.0, params.clone()).is_err());
        assert!(Problem::new(x, array![1.0, 2.0], 1.0, DsParams::lasso(3).unwrap()).is_err());
    }

    #[test]
    fn objectives_at_zero() {
        let prob = toy();
        let y_sq: f64 = prob.y().iter().map(|v| v * v).sum();
        assert_eq!(primal_objective(&[0.0; 4], &prob).unwrap(), y_sq);
        assert_eq!(dual_objective(&[0.0; 5], &prob).unwrap(), 0.0);
        let theta: Vec<f64> = prob.y().iter().map(|v| 2.0 * v / prob.lambda()).collect();
        assert!((dual_objective(&theta, &prob).unwrap() - y_sq).abs() < 1e-12);
        assert!(primal_objective(&[0.0; 3], &prob).is_err());
        assert!(dual_objective(&[0.0; 4], &prob).is_err());
    }

    #[test]
    fn toy_solve_certifies() {
        let prob = toy();
        let res = solve(&prob, 1e-12, 50_000, None).unwrap();
        assert!(res.converged, "gap {}", res.duality_gap);
        assert!(res.duality_gap >= -1e-9);
        assert!(gradient_dual_ratio(&res.beta_hat, &prob).unwrap() <= 1.0 + 1e-6);
        for w in res.trace.windows(2) {
            assert!(w[1].primal <= w[0].primal + 1e-12);
        }
    }

    #[test]
    fn huge_lambda_gives_zero() {
        let prob = toy();
        let corr = prob.x().t().dot(prob.y()) * 2.0;
        let thresh = ds::ds_dual_norm(corr.as_slice().unwrap(), prob.params()).unwrap();
        let res = solve(&prob.with_lambda(thresh * 1.01).unwrap(), 1e-10, 100, None).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
        assert!(res.beta_hat.iter().all(|&b| b == 0.0));
        assert_eq!(res.duality_gap, 0.0);
    }

    #[test]
    fn small_lambda_forces_dual_rescaling() {
        let prob = toy().with_lambda(1e-3).unwrap();
        let cert = dual_feasible_point(&[0.0; 4], &prob).unwrap();
        assert!(cert.scaling > 1.0);
        let corr = prob.x().t().dot(&Array1::from(cert.theta.clone()));
        assert!(ds::ds_dual_norm(corr.as_slice().unwrap(), prob.params()).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let res = solve(&toy(), 1e-14, 2, None).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 2);
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let x = array![[3.0, 0.0], [0.0, 1.0]];
        let l = gram_spectral_norm(&x, 200, 1e-14);
        assert!((l - 9.0).abs() < 1e-9);
    }
}

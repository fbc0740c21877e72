//! Synthetic Gaussian-design instances and Monte Carlo experiments.
//!
//! Rows of `X` are drawn from `N(0, Σ)` as `X = W Lᵀ` with `Σ = L Lᵀ`, the true
//! coefficients carry `s` entries of magnitude `signal_magnitude` spread over
//! `s_G` groups, and the noise is `N(0, σ² I)`.
//!
//! [`run_experiment`] sweeps a grid of sample sizes, solves every trial, and
//! records the estimation error next to the noise statistic `‖Xᵀε‖*_ds / n`.
//! Each trial draws from its own ChaCha stream keyed by `(n, trial)`, so the
//! output does not depend on how trials are scheduled across threads.

use ndarray::{s, Array1, Array2};
use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ds::{self, DsParams, GroupStructure};
use crate::error::{check_len, invalid, Error, Result};
use crate::linalg;
use crate::solver::{self, Problem, SolveOptions};
use crate::theory::{self, DesignModel, SparsityLevel};

/// Everything needed to draw one regression instance.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub n: usize,
    pub groups: GroupStructure,
    pub sigma_matrix: Array2<f64>,
    pub noise_sigma: f64,
    pub sparsity: SparsityLevel,
    pub signal_magnitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub x: Array2<f64>,
    pub beta_star: Array1<f64>,
    pub y: Array1<f64>,
    /// The noise vector `ε = y − Xβ*`.
    pub noise: Array1<f64>,
}

/// Draws `(X, β*, y)` from `spec`. Deterministic in `spec.seed`.
pub fn gaussian_design(spec: &InstanceSpec) -> Result<Instance> {
    let p = spec.groups.dim();
    check_len("covariance dimension", p, spec.sigma_matrix.nrows())?;
    check_len("covariance dimension", p, spec.sigma_matrix.ncols())?;
    if linalg::max_asymmetry(&spec.sigma_matrix) > 1e-10 {
        return Err(invalid("covariance is not symmetric"));
    }
    let factor = linalg::cholesky_lower(&spec.sigma_matrix)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    sample_instance(
        spec.n,
        &spec.groups,
        &factor,
        spec.noise_sigma,
        spec.sparsity,
        spec.signal_magnitude,
        &mut rng,
    )
}

fn sample_instance(
    n: usize,
    groups: &GroupStructure,
    factor: &Array2<f64>,
    noise_sigma: f64,
    sparsity: SparsityLevel,
    signal: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Instance> {
    if n == 0 {
        return Err(invalid("sample size must be >= 1"));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(invalid(format!("noise sigma must be >= 0, got {noise_sigma}")));
    }
    if !(signal > 0.0 && signal.is_finite()) {
        return Err(invalid(format!("signal magnitude must be positive, got {signal}")));
    }
    sparsity.validate(groups)?;
    let p = groups.dim();

    let w = Array2::from_shape_simple_fn((n, p), || rng.sample::<f64, _>(StandardNormal));
    let x = w.dot(&factor.t());

    let mut chosen = index::sample(rng, groups.n_groups(), sparsity.s_g).into_vec();
    chosen.sort_unstable();
    let mut beta_star = Array1::<f64>::zeros(p);
    let mut filled = vec![0usize; chosen.len()];
    let mut slot = 0;
    for _ in 0..sparsity.s {
        // round-robin over the chosen groups, skipping any that are full
        while filled[slot] == groups.sizes()[chosen[slot]] {
            slot = (slot + 1) % chosen.len();
        }
        let idx = groups.range(chosen[slot]).start + filled[slot];
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        beta_star[idx] = sign * signal;
        filled[slot] += 1;
        slot = (slot + 1) % chosen.len();
    }

    let noise = Array1::from_shape_simple_fn(n, || noise_sigma * rng.sample::<f64, _>(StandardNormal));
    let y = x.dot(&beta_star) + &noise;
    Ok(Instance {
        x,
        beta_star,
        y,
        noise,
    })
}

/// How λ is chosen for each trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum LambdaRule {
    /// [`theory::lambda_recommendation`] at the trial's `n`.
    Recommended,
    Fixed { value: f64 },
    /// `factor ×` the recommended value.
    Scaled { factor: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Covariance {
    Identity,
    /// `Σ_ij = ρ^|i−j|`.
    Toeplitz { rho: f64 },
    Matrix { rows: Vec<Vec<f64>> },
}

impl Covariance {
    pub fn to_matrix(&self, p: usize) -> Result<Array2<f64>> {
        match self {
            Covariance::Identity => Ok(Array2::eye(p)),
            Covariance::Toeplitz { rho } => Ok(DesignModel::toeplitz(p, *rho, 0.0)?.sigma_matrix().clone()),
            Covariance::Matrix { rows } => {
                check_len("covariance rows", p, rows.len())?;
                let mut m = Array2::zeros((p, p));
                for (i, row) in rows.iter().enumerate() {
                    check_len("covariance columns", p, row.len())?;
                    for (j, v) in row.iter().enumerate() {
                        m[[i, j]] = *v;
                    }
                }
                Ok(m)
            }
        }
    }
}

fn default_signal() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignConfig {
    pub noise_sigma: f64,
    pub covariance: Covariance,
    pub sparsity: SparsityLevel,
    #[serde(default = "default_signal")]
    pub signal_magnitude: f64,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iters() -> usize {
    20_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    pub params: DsParams,
    pub lambda_rule: LambdaRule,
    /// Duality-gap target relative to `‖y‖₂²`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    pub base_seed: u64,
    pub design: DesignConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(invalid("n_grid must not be empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) || self.n_grid[0] == 0 {
            return Err(invalid("n_grid must be strictly increasing positive integers"));
        }
        if self.trials_per_n == 0 {
            return Err(invalid("trials_per_n must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        match self.lambda_rule {
            LambdaRule::Recommended => {}
            LambdaRule::Fixed { value: v } | LambdaRule::Scaled { factor: v } => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(format!("lambda rule value must be positive, got {v}")));
                }
            }
        }
        self.design.sparsity.validate(self.params.groups())
    }

    pub fn model(&self) -> Result<DesignModel> {
        let sigma = self.design.covariance.to_matrix(self.params.dim())?;
        DesignModel::new(sigma, self.design.noise_sigma)
    }
}

/// Seed for trial `trial` at sample size `n`.
pub fn trial_seed(base_seed: u64, n: usize, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    /// `‖β̂ − β*‖₂`.
    pub error_l2: f64,
    /// Duality gap at stop.
    pub gap: f64,
    pub lambda: f64,
    /// `‖Xᵀε‖*_ds / n`.
    pub noise_dual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `max_g ‖X_(g)‖₂→₂ / √n`.
    pub normalization: f64,
}

/// Per-`n` theory values, shared by all trials at that size.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridPoint {
    pub n: usize,
    pub lambda_recommended: f64,
    pub noise_dual_bound: f64,
    pub n_min: u64,
    pub re_constant: f64,
    /// Squared-error bound at the recommended λ, when its precondition holds.
    pub l2_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub trials: Vec<TrialRecord>,
    pub grid: Vec<GridPoint>,
    /// Per-trial bound at the λ actually used; `None` when the precondition
    /// fails or λ is below the recommended level.
    #[serde(skip)]
    pub trial_bounds: Vec<Option<f64>>,
}

/// Runs every `(n, trial)` of `cfg`. Trials run in parallel; the output is
/// sorted by `(n, trial)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let model = cfg.model()?;
    let factor = linalg::cholesky_lower(model.sigma_matrix())?;
    let params = &cfg.params;

    let mut grid = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let lambda_rec = theory::lambda_recommendation(params, n, &model)?;
        let report = theory::l2_error_bound(params, &model, n, lambda_rec.max(f64::MIN_POSITIVE), cfg.design.sparsity)?;
        grid.push(GridPoint {
            n,
            lambda_recommended: lambda_rec,
            noise_dual_bound: lambda_rec / (2.0 * n as f64),
            n_min: report.n_min,
            re_constant: report.re_constant,
            l2_bound: report.l2_bound.value(),
        });
    }

    let jobs: Vec<(usize, usize, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(k, gp)| (0..cfg.trials_per_n).map(move |t| (k, gp.n, t)))
        .collect();

    let mut results = jobs
        .par_iter()
        .map(|&(k, n, trial)| run_trial(cfg, &model, &factor, &grid[k], n, trial))
        .collect::<Result<Vec<_>>>()?;
    results.sort_by_key(|(r, _)| (r.n, r.trial));
    let (trials, trial_bounds) = results.into_iter().unzip();
    Ok(ExperimentRecord {
        trials,
        grid,
        trial_bounds,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    model: &DesignModel,
    factor: &Array2<f64>,
    point: &GridPoint,
    n: usize,
    trial: usize,
) -> Result<(TrialRecord, Option<f64>)> {
    let params = &cfg.params;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.base_seed, n, trial));
    let inst = sample_instance(
        n,
        params.groups(),
        factor,
        cfg.design.noise_sigma,
        cfg.design.sparsity,
        cfg.design.signal_magnitude,
        &mut rng,
    )?;

    let corr = inst.x.t().dot(&inst.noise);
    let noise_dual = ds::ds_dual_norm(corr.as_slice().expect("contiguous"), params)? / n as f64;
    let normalization = params
        .groups()
        .ranges()
        .map(|r| solver::gram_spectral_norm(&inst.x.slice(s![.., r]).to_owned(), 100, 1e-10).sqrt())
        .fold(0.0, f64::max)
        / (n as f64).sqrt();

    let lambda = match cfg.lambda_rule {
        LambdaRule::Recommended => point.lambda_recommended,
        LambdaRule::Fixed { value } => value,
        LambdaRule::Scaled { factor } => factor * point.lambda_recommended,
    };
    if !(lambda > 0.0) {
        return Err(Error::Degenerate(format!(
            "lambda is {lambda} at n = {n}; a zero noise level needs a fixed lambda"
        )));
    }
    let y_sq = inst.y.dot(&inst.y);
    let beta_star = inst.beta_star.clone();
    let prob = Problem::new(inst.x, inst.y, lambda, params.clone())?;
    let opts = SolveOptions {
        tol: cfg.tol * y_sq.max(1.0),
        max_iters: cfg.max_iters,
        record_trace: false,
        ..SolveOptions::default()
    };
    let res = solver::solve_with(&prob, &opts)?;
    let error_l2 = res
        .beta_hat
        .iter()
        .zip(beta_star.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();

    let bound = if lambda >= point.lambda_recommended {
        theory::l2_error_bound(params, model, n, lambda, cfg.design.sparsity)?.l2_bound.value()
    } else {
        None
    };
    Ok((
        TrialRecord {
            n,
            trial,
            error_l2,
            gap: res.duality_gap,
            lambda,
            noise_dual,
            converged: res.converged,
            iterations: res.iterations,
            normalization,
        },
        bound,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `(n, median error_l2)` for each sample size, in increasing `n`.
pub fn median_errors(trials: &[TrialRecord]) -> Vec<(usize, f64)> {
    let mut ns: Vec<usize> = trials.iter().map(|t| t.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let errs: Vec<f64> = trials.iter().filter(|t| t.n == n).map(|t| t.error_l2).collect();
            (n, median(&errs))
        })
        .collect()
}

/// Least-squares fit of `log(median error) = intercept + slope · log n`.
pub fn rate_fit(trials: &[TrialRecord]) -> Result<RateFit> {
    let points = median_errors(trials);
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "rate fit needs at least 3 distinct n, got {}",
            points.len()
        )));
    }
    if let Some((n, m)) = points.iter().find(|(_, m)| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::Degenerate(format!("median error at n = {n} is {m}; cannot take its log")));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, m)| m.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MedianRow {
    pub n: usize,
    pub median_error_l2: f64,
    pub median_noise_dual: f64,
    pub noise_dual_bound: f64,
    pub lambda_recommended: f64,
    pub n_min: u64,
    pub l2_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub medians: Vec<MedianRow>,
    pub rate_fit: Option<RateFit>,
    /// Fraction of trials with `‖Xᵀε‖*_ds / n ≤ noise_dual_bound`.
    pub noise_bound_fraction: f64,
    /// Trials where the error bound applies.
    pub bound_eligible: usize,
    /// Fraction of eligible trials with `‖β̂ − β*‖₂² > l2_bound`; `None` when none are eligible.
    pub bound_violation_fraction: Option<f64>,
    pub non_converged: usize,
    pub max_normalization: f64,
}

pub fn summarize(record: &ExperimentRecord) -> ExperimentSummary {
    let trials = &record.trials;
    let medians = record
        .grid
        .iter()
        .map(|gp| {
            let at_n: Vec<&TrialRecord> = trials.iter().filter(|t| t.n == gp.n).collect();
            MedianRow {
                n: gp.n,
                median_error_l2: median(&at_n.iter().map(|t| t.error_l2).collect::<Vec<_>>()),
                median_noise_dual: median(&at_n.iter().map(|t| t.noise_dual).collect::<Vec<_>>()),
                noise_dual_bound: gp.noise_dual_bound,
                lambda_recommended: gp.lambda_recommended,
                n_min: gp.n_min,
                l2_bound: gp.l2_bound,
            }
        })
        .collect();
    let bound_of = |n: usize| record.grid.iter().find(|g| g.n == n).map(|g| g.noise_dual_bound).unwrap_or(f64::NAN);
    let within = trials.iter().filter(|t| t.noise_dual <= bound_of(t.n)).count();
    let (eligible, violations) = trials
        .iter()
        .zip(&record.trial_bounds)
        .filter_map(|(t, b)| b.map(|b| t.error_l2 * t.error_l2 > b))
        .fold((0usize, 0usize), |(e, v), bad| (e + 1, v + usize::from(bad)));
    ExperimentSummary {
        medians,
        rate_fit: rate_fit(trials).ok(),
        noise_bound_fraction: within as f64 / trials.len().max(1) as f64,
        bound_eligible: eligible,
        bound_violation_fraction: (eligible > 0).then(|| violations as f64 / eligible as f64),
        non_converged: trials.iter().filter(|t| !t.converged).count(),
        max_normalization: trials.iter().map(|t| t.normalization).fold(0.0, f64::max),
    }
}

/// Writes one CSV row per trial.
pub fn write_trials_csv<W: std::io::Write>(trials: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trials {
        w.serialize(t).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

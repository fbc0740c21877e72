//! Closed-form constants and error bounds for the double-sparsity estimator
//! under a Gaussian random design with rows `N(0, Σ)` and sub-Gaussian noise
//! of scale σ.
//!
//! * [`kappa1`], [`kappa2`]: constants of the restricted-eigenvalue bound
//!   `‖Xv‖₂ ≥ (√n/4·λmin(Σ^{1/2}) − 3κ₁κ₂)‖v‖₂`, valid once
//!   `n > 144κ₁²κ₂²/λmin(Σ)`.
//! * [`lambda_recommendation`]: the smallest penalty level covered by the
//!   error bound; [`noise_dual_bound`] is the matching high-probability bound
//!   on `‖Xᵀε‖*_ds / n`.
//! * [`l2_error_bound`]: the squared ℓ₂ estimation error bound.
//! * [`case_specialization`]: the seven named special cases (LASSO, group
//!   LASSO, sparse-group LASSO, …) in their own closed forms, side by side
//!   with the general formulas evaluated at the same parameters.

use ndarray::Array2;
use serde::{Serialize, Serializer};

use crate::ds::{DsParams, GroupStructure};
use crate::error::{check_len, invalid, Result};
use crate::linalg;

/// Covariance of the design rows and the noise level.
#[derive(Debug, Clone)]
pub struct DesignModel {
    sigma_matrix: Array2<f64>,
    noise_sigma: f64,
    lambda_min: f64,
}

impl DesignModel {
    pub fn new(sigma_matrix: Array2<f64>, noise_sigma: f64) -> Result<Self> {
        if sigma_matrix.nrows() != sigma_matrix.ncols() || sigma_matrix.nrows() == 0 {
            return Err(invalid("covariance must be a non-empty square matrix"));
        }
        if sigma_matrix.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::NonFinite("covariance"));
        }
        if linalg::max_asymmetry(&sigma_matrix) > 1e-10 {
            return Err(invalid("covariance is not symmetric"));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(invalid(format!("noise sigma must be >= 0, got {noise_sigma}")));
        }
        let lambda_min = linalg::symmetric_min_eigenvalue(&sigma_matrix);
        if !(lambda_min > 0.0) {
            return Err(crate::Error::NotPositiveDefinite);
        }
        Ok(Self {
            sigma_matrix,
            noise_sigma,
            lambda_min,
        })
    }

    pub fn identity(p: usize, noise_sigma: f64) -> Result<Self> {
        Self::new(Array2::eye(p), noise_sigma)
    }

    /// `Σ_ij = ρ^|i−j|`.
    pub fn toeplitz(p: usize, rho: f64, noise_sigma: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(invalid(format!("toeplitz correlation must lie in (-1, 1), got {rho}")));
        }
        let s = Array2::from_shape_fn((p, p), |(i, j)| rho.powi((i as i32 - j as i32).abs()));
        Self::new(s, noise_sigma)
    }

    pub fn sigma_matrix(&self) -> &Array2<f64> {
        &self.sigma_matrix
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// λmin(Σ).
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn dim(&self) -> usize {
        self.sigma_matrix.nrows()
    }
}

/// `(s, s_G)`: nonzero coordinates and nonzero groups of the true coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct SparsityLevel {
    pub s: usize,
    pub s_g: usize,
}

impl SparsityLevel {
    pub fn new(s: usize, s_g: usize) -> Self {
        Self { s, s_g }
    }

    /// Checks the level is realisable on `groups`.
    pub fn validate(&self, groups: &GroupStructure) -> Result<()> {
        if self.s_g > groups.n_groups() {
            return Err(invalid(format!("s_G = {} exceeds the {} groups", self.s_g, groups.n_groups())));
        }
        if self.s < self.s_g {
            return Err(invalid(format!("s = {} is smaller than s_G = {}", self.s, self.s_g)));
        }
        let mut sizes = groups.sizes().to_vec();
        sizes.sort_unstable();
        let capacity: usize = sizes.iter().take(self.s_g).sum();
        if self.s > capacity {
            return Err(invalid(format!(
                "s = {} does not fit in the {} smallest groups (capacity {capacity})",
                self.s, self.s_g
            )));
        }
        Ok(())
    }
}

fn pos(v: f64) -> f64 {
    v.max(0.0)
}

fn inv(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        0.0
    } else {
        1.0 / alpha
    }
}

fn check_model(params: &DsParams, model: &DesignModel) -> Result<()> {
    check_len("covariance dimension", params.dim(), model.dim())
}

/// κ₁ = max_g min(A_g, B_g) with
///
/// ```text
/// A_g = p_g^{(1/2 − 1/α_g)₊} √Tr(Σ_(g)(g)) / (τ + (1−τ)w_g)
/// B_g = 3√(log p_g · max_{i∈(g)} Σ_ii) / ((τ + (1−τ)w_g)(1 − ε_g + ε_g p_g^{1/α_g − 1}))
/// ```
///
/// Singleton groups give `log p_g = 0` and so contribute 0.
pub fn kappa1(params: &DsParams, model: &DesignModel) -> Result<f64> {
    check_model(params, model)?;
    let sigma = &model.sigma_matrix;
    let mut best = 0.0_f64;
    for (g, range) in params.groups().ranges().enumerate() {
        let pg = range.len() as f64;
        let a_inv = inv(params.alphas()[g]);
        let scale = params.scale(g);
        let eps = params.epsilon(g);
        let trace: f64 = range.clone().map(|i| sigma[[i, i]]).sum();
        let max_diag = range.clone().map(|i| sigma[[i, i]]).fold(0.0, f64::max);
        let first = pg.powf(pos(0.5 - a_inv)) * trace.sqrt() / scale;
        let second = 3.0 * (pg.ln() * max_diag).sqrt() / (scale * (1.0 - eps + eps * pg.powf(a_inv - 1.0)));
        best = best.max(first.min(second));
    }
    Ok(best)
}

/// κ₂ = √G · max_g (τ√p_g + (1−τ) w_g p_g^{(1/α_g − 1/2)₊}).
pub fn kappa2(params: &DsParams) -> f64 {
    let tau = params.tau();
    let worst = params
        .groups()
        .sizes()
        .iter()
        .enumerate()
        .map(|(g, &size)| {
            let pg = size as f64;
            tau * pg.sqrt() + (1.0 - tau) * params.weights()[g] * pg.powf(pos(inv(params.alphas()[g]) - 0.5))
        })
        .fold(0.0, f64::max);
    (params.n_groups() as f64).sqrt() * worst
}

/// Smallest λ covered by the error bound:
///
/// ```text
/// 2σ max_g [ (ε_g p_g^{(1/α_g−1/2)₊} + (1−ε_g)√p_g)
///            · min( p_g^{(1/2−1/α_g)₊} √(n p_g),
///                   p_g^{1/α*_g} √(2n log p_g) / (p_g^{1/α*_g}(1−ε_g) + ε_g) )
///            + √(6n log G) ] / (τ + (1−τ)w_g)
/// ```
pub fn lambda_recommendation(params: &DsParams, n: usize, model: &DesignModel) -> Result<f64> {
    if n == 0 {
        return Err(invalid("sample size must be >= 1"));
    }
    check_model(params, model)?;
    Ok(lambda_formula(params, n, model.noise_sigma))
}

pub(crate) fn lambda_formula(params: &DsParams, n: usize, sigma: f64) -> f64 {
    let n = n as f64;
    let search = (6.0 * n * (params.n_groups() as f64).ln()).sqrt();
    let worst = params
        .groups()
        .sizes()
        .iter()
        .enumerate()
        .map(|(g, &size)| {
            let pg = size as f64;
            let a_inv = inv(params.alphas()[g]);
            let a_star_inv = 1.0 - a_inv;
            let eps = params.epsilon(g);
            let lead = eps * pg.powf(pos(a_inv - 0.5)) + (1.0 - eps) * pg.sqrt();
            let dense = pg.powf(pos(0.5 - a_inv)) * (n * pg).sqrt();
            let root = pg.powf(a_star_inv);
            let sparse = root * (2.0 * n * pg.ln()).sqrt() / (root * (1.0 - eps) + eps);
            (lead * dense.min(sparse) + search) / params.scale(g)
        })
        .fold(0.0, f64::max);
    2.0 * sigma * worst
}

/// High-probability bound on `‖Xᵀε‖*_ds / n`; equals `λ_rec / (2n)`.
pub fn noise_dual_bound(params: &DsParams, n: usize, model: &DesignModel) -> Result<f64> {
    Ok(lambda_recommendation(params, n, model)? / (2.0 * n as f64))
}

/// Either a bound value or a flag that the sample-size / RE precondition fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum L2Bound {
    Value(f64),
    PreconditionViolated,
}

impl L2Bound {
    pub fn value(&self) -> Option<f64> {
        match self {
            L2Bound::Value(v) => Some(*v),
            L2Bound::PreconditionViolated => None,
        }
    }
}

impl Serialize for L2Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            L2Bound::Value(v) => s.serialize_f64(*v),
            L2Bound::PreconditionViolated => s.serialize_str("precondition-violated"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryReport {
    pub n: usize,
    pub lambda: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// λmin(Σ).
    pub sigma_lambda_min: f64,
    /// `√n/4 · λmin(Σ^{1/2}) − 3κ₁κ₂`.
    pub re_constant: f64,
    pub lambda_min_recommended: f64,
    /// `ceil(144κ₁²κ₂²/λmin(Σ))`.
    pub n_min: u64,
    /// Bound on `‖β̂ − β*‖₂²`.
    pub l2_bound: L2Bound,
}

/// Squared ℓ₂ error bound
///
/// ```text
/// 4λ² [τ√s + (1−τ)√s_G max_g w_g p_g^{(1/α_g − 1/2)₊}]² / (√n/4·λmin(Σ^{1/2}) − 3κ₁κ₂)⁴
/// ```
///
/// reported only when `n > n_min` and the RE constant is positive.
pub fn l2_error_bound(
    params: &DsParams,
    model: &DesignModel,
    n: usize,
    lambda: f64,
    sparsity: SparsityLevel,
) -> Result<TheoryReport> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    sparsity.validate(params.groups())?;
    let k1 = kappa1(params, model)?;
    let k2 = kappa2(params);
    let lambda_rec = lambda_recommendation(params, n, model)?;
    let lmin = model.lambda_min;
    let re = (n as f64).sqrt() / 4.0 * lmin.sqrt() - 3.0 * k1 * k2;
    let n_min = (144.0 * k1 * k1 * k2 * k2 / lmin).ceil() as u64;

    let tau = params.tau();
    let group_factor = params
        .groups()
        .sizes()
        .iter()
        .enumerate()
        .map(|(g, &size)| params.weights()[g] * (size as f64).powf(pos(inv(params.alphas()[g]) - 0.5)))
        .fold(0.0, f64::max);
    let sparsity_term = tau * (sparsity.s as f64).sqrt() + (1.0 - tau) * (sparsity.s_g as f64).sqrt() * group_factor;

    let l2_bound = if (n as u64) > n_min && re > 0.0 {
        L2Bound::Value(4.0 * lambda * lambda * sparsity_term * sparsity_term / re.powi(4))
    } else {
        L2Bound::PreconditionViolated
    };
    Ok(TheoryReport {
        n,
        lambda,
        kappa1: k1,
        kappa2: k2,
        sigma_lambda_min: lmin,
        re_constant: re,
        lambda_min_recommended: lambda_rec,
        n_min,
        l2_bound,
    })
}

/// The seven named specialisations of the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpecialCase {
    /// τ = 1 over singleton groups.
    Lasso,
    /// τ = 0, α ≡ 1: group-weighted ℓ₁.
    WeightedL1,
    /// τ = 0, α ≡ 2.
    GroupLasso,
    /// τ = 0, α ≡ ∞.
    GroupLinf,
    /// τ ∈ (0,1), α ≡ 1; reduces to [`SpecialCase::WeightedL1`].
    DoubleL1,
    /// τ ∈ (0,1), α ≡ 2.
    SparseGroupLasso,
    /// τ ∈ (0,1), α ≡ ∞.
    DoubleLinf,
}

impl SpecialCase {
    pub fn from_id(id: u8) -> Result<Self> {
        Ok(match id {
            1 => Self::Lasso,
            2 => Self::WeightedL1,
            3 => Self::GroupLasso,
            4 => Self::GroupLinf,
            5 => Self::DoubleL1,
            6 => Self::SparseGroupLasso,
            7 => Self::DoubleLinf,
            _ => return Err(invalid(format!("case id must be 1..=7, got {id}"))),
        })
    }

    pub fn id(&self) -> u8 {
        match self {
            Self::Lasso => 1,
            Self::WeightedL1 => 2,
            Self::GroupLasso => 3,
            Self::GroupLinf => 4,
            Self::DoubleL1 => 5,
            Self::SparseGroupLasso => 6,
            Self::DoubleLinf => 7,
        }
    }

    fn alpha(&self) -> f64 {
        match self {
            Self::Lasso | Self::WeightedL1 | Self::DoubleL1 => 1.0,
            Self::GroupLasso | Self::SparseGroupLasso => 2.0,
            Self::GroupLinf | Self::DoubleLinf => f64::INFINITY,
        }
    }
}

/// Inputs shared by all cases. `sizes` and `weights` are ignored for the
/// LASSO case, which always uses `p` singleton groups; `tau` is only read by
/// the double-sparsity cases 5–7.
#[derive(Debug, Clone)]
pub struct CaseInputs {
    pub sizes: Vec<usize>,
    /// Defaults to `√p_g`.
    pub weights: Option<Vec<f64>>,
    pub tau: f64,
    pub n: usize,
    pub model: DesignModel,
    pub sparsity: SparsityLevel,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseEvaluation {
    pub case: SpecialCase,
    pub case_id: u8,
    /// λ from the case's own closed form.
    pub lambda_case: f64,
    /// [`lambda_recommendation`] at the case's parameters.
    pub lambda_general: f64,
    /// λ plugged into the error bounds.
    pub lambda_for_bound: f64,
    /// Squared-error bound from the case's own closed form, where one is
    /// stated as an equality (cases 1–4).
    pub bound_case: Option<f64>,
    /// [`l2_error_bound`] at the case's parameters and `lambda_for_bound`.
    pub bound_general: L2Bound,
    /// Order-of-magnitude rate for `‖β̂ − β*‖₂` with every hidden constant set to 1.
    pub order_rate: f64,
    pub report: TheoryReport,
}

/// Builds the penalty parameters a case prescribes.
pub fn case_params(case: SpecialCase, inputs: &CaseInputs) -> Result<DsParams> {
    let alpha = case.alpha();
    if case == SpecialCase::Lasso {
        return DsParams::lasso(inputs.model.dim());
    }
    let groups = GroupStructure::new(inputs.sizes.clone())?;
    let tau = match case {
        SpecialCase::DoubleL1 | SpecialCase::SparseGroupLasso | SpecialCase::DoubleLinf => {
            if !(inputs.tau > 0.0 && inputs.tau < 1.0) {
                return Err(invalid(format!("case {} needs tau in (0, 1), got {}", case.id(), inputs.tau)));
            }
            inputs.tau
        }
        _ => 0.0,
    };
    let alphas = vec![alpha; groups.n_groups()];
    match &inputs.weights {
        Some(w) => DsParams::new(groups, tau, w.clone(), alphas),
        None => DsParams::with_default_weights(groups, tau, alphas),
    }
}

/// Evaluates one special case both through its own closed form and through
/// the general formulas.
pub fn case_specialization(case: SpecialCase, inputs: &CaseInputs) -> Result<CaseEvaluation> {
    let params = case_params(case, inputs)?;
    check_model(&params, &inputs.model)?;
    let n = inputs.n;
    if n == 0 {
        return Err(invalid("sample size must be >= 1"));
    }
    let nf = n as f64;
    let sigma = inputs.model.noise_sigma;
    let lmin = inputs.model.lambda_min;
    let sp = inputs.sparsity;
    let (s, s_g) = (sp.s as f64, sp.s_g as f64);
    let g_count = params.n_groups() as f64;
    let log_g = g_count.ln();
    let sizes: Vec<f64> = params.groups().sizes().iter().map(|&v| v as f64).collect();
    let w = params.weights();
    let tau = params.tau();
    let max_over = |f: &dyn Fn(usize) -> f64| (0..sizes.len()).map(f).fold(0.0_f64, f64::max);

    let lambda_general = lambda_formula(&params, n, sigma);
    let k1 = kappa1(&params, &inputs.model)?;
    let k2 = kappa2(&params);
    let re4 = (nf.sqrt() / 4.0 * lmin.sqrt() - 3.0 * k1 * k2).powi(4);

    let (lambda_case, lambda_for_bound, bound_case, order_rate) = match case {
        SpecialCase::Lasso => {
            let p = params.dim() as f64;
            let lam = 2.0 * sigma * (6.0 * nf * p.ln()).sqrt();
            let lam_bound = sigma * (6.0 * nf * p.ln()).sqrt();
            let bound = 6144.0 / (lmin * lmin) * sigma * sigma * s * p.ln() / nf;
            (lam, lam_bound, Some(bound), sigma * (s * p.ln() / nf).sqrt())
        }
        SpecialCase::WeightedL1 => {
            let lam = 2.0 * sigma * nf.sqrt() * max_over(&|g| ((2.0 * sizes[g] * sizes[g].ln()).sqrt() + (6.0 * log_g).sqrt()) / w[g]);
            let bound = 4.0 * lam * lam * s_g * max_over(&|g| w[g] * w[g] * sizes[g]) / re4;
            let rate = sigma
                * s_g.sqrt()
                * ((max_over(&|g| sizes[g] * sizes[g] * sizes[g].ln()) / nf).sqrt()
                    + (max_over(&|g| sizes[g]) * log_g / nf).sqrt());
            (lam, lam, Some(bound), rate)
        }
        SpecialCase::GroupLasso => {
            let lam = 2.0 * sigma * max_over(&|g| ((nf * sizes[g]).sqrt() + (6.0 * nf * log_g).sqrt()) / w[g]);
            let bound = 4.0 * lam * lam * s_g * max_over(&|g| w[g] * w[g]) / re4;
            let rate = sigma * s_g.sqrt() * ((max_over(&|g| sizes[g]) / nf).sqrt() + (log_g / nf).sqrt());
            (lam, lam, Some(bound), rate)
        }
        SpecialCase::GroupLinf => {
            let lam = 2.0 * sigma * nf.sqrt() * max_over(&|g| (sizes[g] + (6.0 * log_g).sqrt()) / w[g]);
            let bound = 4.0 * lam * lam * s_g * max_over(&|g| w[g] * w[g]) / re4;
            let rate = sigma * s_g.sqrt() * ((max_over(&|g| sizes[g] * sizes[g]) / nf).sqrt() + (log_g / nf).sqrt());
            (lam, lam, Some(bound), rate)
        }
        SpecialCase::DoubleL1 => {
            let lam = 2.0
                * sigma
                * nf.sqrt()
                * max_over(&|g| ((2.0 * sizes[g] * sizes[g].ln()).sqrt() + (6.0 * log_g).sqrt()) / params.scale(g));
            let spars = tau * s.sqrt() + (1.0 - tau) * s_g.sqrt() * max_over(&|g| w[g] * sizes[g].sqrt());
            let rate = sigma * ((max_over(&|g| sizes[g] * sizes[g].ln()) / nf).sqrt() + (log_g / nf).sqrt()) * spars;
            (lam, lam, None, rate)
        }
        SpecialCase::SparseGroupLasso => {
            let lead = |g: usize| {
                let e = params.epsilon(g);
                e + (1.0 - e) * sizes[g].sqrt()
            };
            let lam = 2.0 * sigma * nf.sqrt() * max_over(&|g| (lead(g) * sizes[g].sqrt() + (6.0 * log_g).sqrt()) / params.scale(g));
            let spars = tau * s.sqrt() + (1.0 - tau) * s_g.sqrt() * max_over(&|g| w[g]);
            let rate = sigma / nf.sqrt() * (max_over(&lead) + log_g.sqrt()) * spars;
            (lam, lam, None, rate)
        }
        SpecialCase::DoubleLinf => {
            let lead = |g: usize| {
                let e = params.epsilon(g);
                (e + (1.0 - e) * sizes[g].sqrt()) * sizes[g]
            };
            let lam = 2.0 * sigma * nf.sqrt() * max_over(&|g| (lead(g) + (6.0 * log_g).sqrt()) / params.scale(g));
            let spars = tau * s.sqrt() + (1.0 - tau) * s_g.sqrt() * max_over(&|g| w[g]);
            let rate = sigma / nf.sqrt() * (max_over(&lead) + (6.0 * log_g).sqrt()) * spars;
            (lam, lam, None, rate)
        }
    };

    let report = l2_error_bound(&params, &inputs.model, n, lambda_for_bound, sp)?;
    Ok(CaseEvaluation {
        case,
        case_id: case.id(),
        lambda_case,
        lambda_general,
        lambda_for_bound,
        bound_case: bound_case.filter(|_| report.l2_bound.value().is_some()),
        bound_general: report.l2_bound,
        order_rate,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lasso_constants() {
        let p = 50;
        let params = DsParams::lasso(p).unwrap();
        let model = DesignModel::toeplitz(p, 0.4, 1.3).unwrap();
        assert_eq!(kappa1(&params, &model).unwrap(), 0.0);
        assert_relative_eq!(kappa2(&params), (p as f64).sqrt(), max_relative = 1e-15);
        let n = 300;
        let lam = lambda_recommendation(&params, n, &model).unwrap();
        assert_relative_eq!(lam, 2.0 * 1.3 * (6.0 * n as f64 * (p as f64).ln()).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(
            noise_dual_bound(&params, n, &model).unwrap(),
            1.3 * (6.0 * (p as f64).ln() / n as f64).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn kappa1_single_group_identity() {
        // ε = 1 and α = 2: the trace branch √p is the smaller one
        for p in [4usize, 16, 100] {
            let groups = GroupStructure::new(vec![p]).unwrap();
            let params = DsParams::new(groups, 0.0, vec![1.0], vec![2.0]).unwrap();
            let model = DesignModel::identity(p, 1.0).unwrap();
            let pf = p as f64;
            let expected = pf.sqrt().min(3.0 * (pf.ln()).sqrt() * pf.sqrt());
            assert_relative_eq!(kappa1(&params, &model).unwrap(), expected, max_relative = 1e-14);
            assert_relative_eq!(expected, pf.sqrt());
        }
    }

    #[test]
    fn kappa1_halves_when_weights_double() {
        let groups = GroupStructure::new(vec![3, 5, 2]).unwrap();
        let model = DesignModel::toeplitz(10, 0.3, 1.0).unwrap();
        let a = DsParams::new(groups.clone(), 0.0, vec![1.0, 2.0, 0.5], vec![1.5, 2.0, f64::INFINITY]).unwrap();
        let b = a.with_weights(vec![2.0, 4.0, 1.0]).unwrap();
        assert_relative_eq!(kappa1(&b, &model).unwrap(), 0.5 * kappa1(&a, &model).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn kappa2_reductions() {
        let groups = GroupStructure::new(vec![3, 5, 2]).unwrap();
        let w = vec![1.0, 2.0, 0.5];
        let p2 = DsParams::new(groups.clone(), 0.0, w.clone(), vec![2.0; 3]).unwrap();
        assert_relative_eq!(kappa2(&p2), 3f64.sqrt() * 2.0);
        let p1 = DsParams::new(groups, 0.0, w, vec![1.0; 3]).unwrap();
        assert_relative_eq!(kappa2(&p1), 3f64.sqrt() * 2.0 * 5f64.sqrt());
    }

    #[test]
    fn group_lasso_lambda() {
        let sizes = vec![3usize, 5, 2];
        let w = vec![1.0, 2.0, 0.5];
        let params = DsParams::new(GroupStructure::new(sizes.clone()).unwrap(), 0.0, w.clone(), vec![2.0; 3]).unwrap();
        let model = DesignModel::identity(10, 0.7).unwrap();
        let n = 120.0;
        let expected = (0..3)
            .map(|g| ((n * sizes[g] as f64).sqrt() + (6.0 * n * 3f64.ln()).sqrt()) / w[g])
            .fold(0.0, f64::max)
            * 2.0
            * 0.7;
        assert_relative_eq!(lambda_recommendation(&params, 120, &model).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn lambda_scales_with_sigma() {
        let params = DsParams::uniform_alpha(GroupStructure::uniform(4, 3).unwrap(), 0.3, 1.7).unwrap();
        let a = lambda_recommendation(&params, 80, &DesignModel::identity(12, 1.0).unwrap()).unwrap();
        let b = lambda_recommendation(&params, 80, &DesignModel::identity(12, 2.5).unwrap()).unwrap();
        assert_relative_eq!(b, 2.5 * a, max_relative = 1e-14);
    }

    #[test]
    fn noise_bound_scales_inverse_sqrt_n() {
        let params = DsParams::uniform_alpha(GroupStructure::uniform(4, 3).unwrap(), 0.3, 3.0).unwrap();
        let model = DesignModel::identity(12, 1.0).unwrap();
        let a = noise_dual_bound(&params, 100, &model).unwrap();
        let b = noise_dual_bound(&params, 400, &model).unwrap();
        assert_relative_eq!(a / b, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn zero_sparsity_gives_zero_bound() {
        let params = DsParams::lasso(20).unwrap();
        let model = DesignModel::identity(20, 1.0).unwrap();
        let r = l2_error_bound(&params, &model, 100, 3.0, SparsityLevel::new(0, 0)).unwrap();
        assert_eq!(r.l2_bound, L2Bound::Value(0.0));
    }

    #[test]
    fn precondition_flag() {
        let params = DsParams::uniform_alpha(GroupStructure::uniform(10, 5).unwrap(), 0.0, 2.0).unwrap();
        let model = DesignModel::identity(50, 1.0).unwrap();
        let r = l2_error_bound(&params, &model, 100, 3.0, SparsityLevel::new(5, 1)).unwrap();
        assert!(r.n_min > 100);
        assert_eq!(r.l2_bound, L2Bound::PreconditionViolated);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("precondition-violated"));
    }

    #[test]
    fn sparsity_validation() {
        let g = GroupStructure::new(vec![2, 3]).unwrap();
        assert!(SparsityLevel::new(1, 2).validate(&g).is_err());
        assert!(SparsityLevel::new(3, 1).validate(&g).is_err());
        assert!(SparsityLevel::new(2, 1).validate(&g).is_ok());
        assert!(SparsityLevel::new(2, 3).validate(&g).is_err());
    }

    #[test]
    fn bad_case_id() {
        assert!(SpecialCase::from_id(0).is_err());
        assert!(SpecialCase::from_id(8).is_err());
        for id in 1..=7 {
            assert_eq!(SpecialCase::from_id(id).unwrap().id(), id);
        }
    }

    #[test]
    fn design_model_validation() {
        assert!(DesignModel::new(ndarray::array![[1.0, 0.5], [0.4, 1.0]], 1.0).is_err());
        assert!(DesignModel::new(ndarray::array![[1.0, 2.0], [2.0, 1.0]], 1.0).is_err());
        assert!(DesignModel::identity(3, -1.0).is_err());
        assert_relative_eq!(DesignModel::toeplitz(2, 0.5, 1.0).unwrap().lambda_min(), 0.5, max_relative = 1e-12);
    }
}

//! Group structure and the double-sparsity norm
//! `‖β‖_ds = τ‖β‖_1 + (1−τ) Σ_g w_g ‖β_(g)‖_{α_g}`.
//!
//! Each group term can be rewritten as a scaled εq dual norm,
//! `(τ + (1−τ)w_g) · ‖β_(g)‖*_{ε_g, α*_g}` with `ε_g = (1−τ)w_g / (τ + (1−τ)w_g)`,
//! which gives the dual norm as a max of scaled εq-norms over groups.

use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_len, invalid, Result};
use crate::norms::{self, conjugate_exponent, epsq_dual_norm, epsq_norm, EpsQ};

/// Partition of `0..p` into contiguous, non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl GroupStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(invalid("group structure needs at least one group"));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(invalid("group sizes must be positive"));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        for s in &sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        Ok(Self { sizes, offsets })
    }

    /// `count` groups of `size` coordinates each.
    pub fn uniform(count: usize, size: usize) -> Result<Self> {
        Self::new(vec![size; count])
    }

    /// One coordinate per group (the plain LASSO layout).
    pub fn singletons(p: usize) -> Result<Self> {
        Self::uniform(p, 1)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_groups(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of coordinates.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, g: usize) -> Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.n_groups()).map(|g| self.range(g))
    }

    /// Group slices of `x`; `x.len()` must equal [`dim`](Self::dim).
    pub fn split<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = &'a [f64]> + 'a {
        self.ranges().map(move |r| &x[r])
    }

    pub(crate) fn check(&self, what: &'static str, x: &[f64]) -> Result<()> {
        check_len(what, self.dim(), x.len())
    }
}

/// `(τ, w, α)` together with the group layout they apply to.
#[derive(Debug, Clone, PartialEq)]
pub struct DsParams {
    tau: f64,
    weights: Vec<f64>,
    alphas: Vec<f64>,
    groups: GroupStructure,
}

impl DsParams {
    pub fn new(groups: GroupStructure, tau: f64, weights: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(invalid(format!("tau must lie in [0, 1], got {tau}")));
        }
        check_len("weights", groups.n_groups(), weights.len())?;
        check_len("alphas", groups.n_groups(), alphas.len())?;
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid(format!("group weights must be positive and finite, got {w}")));
        }
        for &a in &alphas {
            norms::check_exponent(a)?;
        }
        Ok(Self {
            tau,
            weights,
            alphas,
            groups,
        })
    }

    /// Weights default to `√p_g`.
    pub fn with_default_weights(groups: GroupStructure, tau: f64, alphas: Vec<f64>) -> Result<Self> {
        let weights = groups.sizes().iter().map(|&s| (s as f64).sqrt()).collect();
        Self::new(groups, tau, weights, alphas)
    }

    /// Same exponent for every group, default weights.
    pub fn uniform_alpha(groups: GroupStructure, tau: f64, alpha: f64) -> Result<Self> {
        let alphas = vec![alpha; groups.n_groups()];
        Self::with_default_weights(groups, tau, alphas)
    }

    /// Plain LASSO: τ = 1 over `p` singleton groups.
    pub fn lasso(p: usize) -> Result<Self> {
        Self::new(GroupStructure::singletons(p)?, 1.0, vec![1.0; p], vec![1.0; p])
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn groups(&self) -> &GroupStructure {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.groups.dim()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.n_groups()
    }

    /// `τ + (1−τ)w_g`.
    pub fn scale(&self, g: usize) -> f64 {
        self.tau + (1.0 - self.tau) * self.weights[g]
    }

    /// `ε_g = (1−τ)w_g / (τ + (1−τ)w_g)`, in [0, 1].
    pub fn epsilon(&self, g: usize) -> f64 {
        (1.0 - self.tau) * self.weights[g] / self.scale(g)
    }

    /// `α*_g = α_g/(α_g − 1)`.
    pub fn dual_alpha(&self, g: usize) -> f64 {
        conjugate_exponent(self.alphas[g])
    }

    /// Copy with weights replaced.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.groups.clone(), self.tau, weights, self.alphas.clone())
    }
}

/// εq-norm of a group slice, continuous at ε = 0 where it becomes ‖·‖_∞.
pub(crate) fn group_epsq_norm(x: &[f64], eps: f64, q: f64) -> f64 {
    if eps <= 0.0 {
        return norms::linf(x);
    }
    // eps in (0, 1] and q >= 1 are guaranteed by DsParams
    epsq_norm(x, EpsQ::new(eps.min(1.0), q).expect("validated group parameters"))
}

/// `τ‖β‖_1 + (1−τ) Σ_g w_g ‖β_(g)‖_{α_g}`.
pub fn ds_norm(beta: &[f64], params: &DsParams) -> Result<f64> {
    params.groups.check("beta", beta)?;
    Ok(ds_norm_unchecked(beta, params))
}

pub(crate) fn ds_norm_unchecked(beta: &[f64], params: &DsParams) -> f64 {
    let l1 = norms::lq(beta, 1.0);
    let group_sum: f64 = params
        .groups
        .split(beta)
        .enumerate()
        .map(|(g, b)| params.weights[g] * norms::lq(b, params.alphas[g]))
        .sum();
    params.tau * l1 + (1.0 - params.tau) * group_sum
}

/// The same norm evaluated through the εq dual representation,
/// `Σ_g (τ + (1−τ)w_g) · ‖β_(g)‖*_{ε_g, α*_g}`.
pub fn ds_norm_via_dual_identity(beta: &[f64], params: &DsParams) -> Result<f64> {
    params.groups.check("beta", beta)?;
    Ok(params
        .groups
        .split(beta)
        .enumerate()
        .map(|(g, b)| {
            let eps = params.epsilon(g);
            let inner = if eps <= 0.0 {
                norms::lq(b, 1.0)
            } else {
                epsq_dual_norm(b, EpsQ::new(eps.min(1.0), params.dual_alpha(g)).expect("validated"))
            };
            params.scale(g) * inner
        })
        .sum())
}

/// Dual norm `max_g ‖x_(g)‖_{ε_g, α*_g} / (τ + (1−τ)w_g)`.
pub fn ds_dual_norm(x: &[f64], params: &DsParams) -> Result<f64> {
    params.groups.check("x", x)?;
    Ok(ds_dual_norm_unchecked(x, params))
}

pub(crate) fn ds_dual_norm_unchecked(x: &[f64], params: &DsParams) -> f64 {
    params
        .groups
        .split(x)
        .enumerate()
        .map(|(g, xg)| group_dual_ratio(xg, params, g))
        .fold(0.0, f64::max)
}

/// `‖x_(g)‖_{ε_g, α*_g} / (τ + (1−τ)w_g)` for one group.
pub(crate) fn group_dual_ratio(xg: &[f64], params: &DsParams, g: usize) -> f64 {
    group_epsq_norm(xg, params.epsilon(g), params.dual_alpha(g)) / params.scale(g)
}

/// Outer norm of a mixed ℓ_{outer, inner} norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedOuter {
    /// Sum over groups.
    L1,
    /// Max over groups.
    Inf,
}

/// `‖x‖_{outer, inner}`: the outer norm of the per-group inner norms.
pub fn mixed_norm(x: &[f64], groups: &GroupStructure, outer: MixedOuter, inner: f64) -> Result<f64> {
    groups.check("x", x)?;
    norms::check_exponent(inner)?;
    let per_group = groups.split(x).map(|xg| norms::lq(xg, inner));
    Ok(match outer {
        MixedOuter::L1 => per_group.sum(),
        MixedOuter::Inf => per_group.fold(0.0, f64::max),
    })
}

/// An exponent that may be infinite; reads and writes `"inf"` in JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Text(t) => parse_exponent(&t).map(Exponent).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a number or `inf` / `infinity` / `∞`.
pub fn parse_exponent(text: &str) -> Result<f64> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" | "∞" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| crate::Error::Parse(format!("not an exponent: {text:?}"))),
    }
}

/// JSON form: `{"sizes":[…], "tau":…, "weights":[…], "alphas":[…]}`.
/// `weights` may be omitted, in which case `√p_g` is used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DsParamsJson {
    pub sizes: Vec<usize>,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub alphas: Vec<Exponent>,
}

impl From<&DsParams> for DsParamsJson {
    fn from(p: &DsParams) -> Self {
        Self {
            sizes: p.groups.sizes().to_vec(),
            tau: p.tau,
            weights: Some(p.weights.clone()),
            alphas: p.alphas.iter().map(|&a| Exponent(a)).collect(),
        }
    }
}

impl TryFrom<DsParamsJson> for DsParams {
    type Error = crate::Error;

    fn try_from(j: DsParamsJson) -> Result<Self> {
        let groups = GroupStructure::new(j.sizes)?;
        let alphas = j.alphas.into_iter().map(|a| a.0).collect();
        match j.weights {
            Some(w) => DsParams::new(groups, j.tau, w, alphas),
            None => DsParams::with_default_weights(groups, j.tau, alphas),
        }
    }
}

impl Serialize for DsParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DsParamsJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DsParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DsParamsJson::deserialize(d)?;
        DsParams::try_from(raw).map_err(serde::de::Error::custom)
    }
}

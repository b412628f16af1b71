//! Worst-case price bounds, the cost of diversity, probability rescaling,
//! and the delta frontier sweep with CSV export.

use rayon::prelude::*;
use thiserror::Error;

use crate::lp::{opt_delta, LpError};
use crate::net::{
    build_type_matrices, engagement, limiting_state, Instance, InstanceError, TypeMatrices,
};
use crate::policies::{delta_exact, delta_uniform, engagement_coefficients, PolicyError};

/// Probability-matrix statistics entering the worst-case bound: `alpha` is
/// the smallest per-user mean probability across types, `beta` the largest
/// single entry. Both are 0 for an instance with no users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("the relative bound needs a positive probability somewhere (beta > 0)")]
    ZeroBeta,
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("probability cap must lie strictly between 0 and 1, got {0}")]
    InvalidCap(f64),
    #[error("frontier point delta = {delta} failed")]
    Grid {
        delta: f64,
        #[source]
        source: LpError,
    },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Scans the probability matrix for the bound statistics.
pub fn alpha_beta(instance: &Instance) -> BoundInputs {
    let num_types = instance.num_types() as f64;
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    for i in 0..instance.n() {
        let mut mean = 0.0;
        for t in 0..instance.num_types() {
            let v = instance.p()[t][i];
            mean += v;
            beta = beta.max(v);
        }
        alpha = alpha.min(mean / num_types);
    }
    if !alpha.is_finite() {
        alpha = 0.0;
    }
    BoundInputs { alpha, beta }
}

/// The sharper worst-case cost bound `min(T delta (1 - alpha/beta), (T-1) delta)`.
/// The relative term is undefined when every probability is zero.
pub fn main_bound(num_types: usize, delta: f64, inputs: &BoundInputs) -> Result<f64, AnalysisError> {
    if inputs.beta <= 0.0 {
        return Err(AnalysisError::ZeroBeta);
    }
    let t = num_types as f64;
    Ok((t * delta * (1.0 - inputs.alpha / inputs.beta)).min(worst_case_bound(num_types, delta)))
}

/// The probability-free fallback bound `(T - 1) delta`.
pub fn worst_case_bound(num_types: usize, delta: f64) -> f64 {
    (num_types as f64 - 1.0) * delta
}

/// The constrained optimum never exceeds the unconstrained one, so a
/// negative ratio can only be solver roundoff; snap tiny negatives to 0.
fn normalize_cost(cost: f64) -> f64 {
    if (-1e-9..0.0).contains(&cost) {
        0.0
    } else {
        cost
    }
}

/// Relative engagement given up for delta diversity: `1 - OPT_delta / OPT_eng`.
/// Defined as 0 when the unconstrained optimum is already 0.
pub fn cost_of_diversity(instance: &Instance, delta: f64) -> Result<f64, AnalysisError> {
    let opt_eng = engagement_coefficients(instance)
        .map_err(PolicyError::from)
        .map_err(LpError::from)?
        .optimal_engagement();
    if opt_eng <= 0.0 {
        return Ok(0.0);
    }
    let (_, opt_d) = opt_delta(instance, delta)?;
    Ok(normalize_cost(1.0 - opt_d / opt_eng))
}

/// Rescales every retweet probability to `min(factor * p, cap)`. The graph
/// and any affinity matrix are untouched.
pub fn scale_probabilities(
    instance: &Instance,
    factor: f64,
    cap: f64,
) -> Result<Instance, AnalysisError> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(AnalysisError::InvalidScale(factor));
    }
    if !(cap.is_finite() && 0.0 < cap && cap < 1.0) {
        return Err(AnalysisError::InvalidCap(cap));
    }
    let p = instance
        .p()
        .iter()
        .map(|row| row.iter().map(|&v| (factor * v).min(cap)).collect())
        .collect();
    Ok(instance.with_probabilities(p)?)
}

/// One grid point of the cost frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRow {
    pub delta: f64,
    pub opt_delta: f64,
    pub opt_eng: f64,
    pub cost: f64,
    pub bound_main: f64,
    pub bound_worst: f64,
    pub eng_uniform: f64,
    pub eng_exact: f64,
}

/// `count` evenly spaced deltas ending at the feasibility limit `1/T`.
pub fn default_grid(num_types: usize, count: usize) -> Vec<f64> {
    let step = (count as f64) * (num_types as f64);
    (1..=count).map(|i| i as f64 / step).collect()
}

/// Sweeps the diversity LP over `grid`, reusing the unconstrained optimum
/// and type matrices across points. Rows come back sorted by delta.
/// `bound_main` is reported as 0 for an all-zero probability matrix, where
/// the cost itself is identically 0.
pub fn frontier(instance: &Instance, grid: &[f64]) -> Result<Vec<FrontierRow>, AnalysisError> {
    let inputs = alpha_beta(instance);
    let opt_eng = engagement_coefficients(instance)
        .map_err(PolicyError::from)
        .map_err(LpError::from)?
        .optimal_engagement();
    let matrices = build_type_matrices(instance);
    let mut deltas = grid.to_vec();
    deltas.sort_by(f64::total_cmp);
    deltas
        .par_iter()
        .map(|&delta| {
            frontier_row(instance, &matrices, delta, opt_eng, &inputs)
                .map_err(|source| AnalysisError::Grid { delta, source })
        })
        .collect()
}

fn frontier_row(
    instance: &Instance,
    matrices: &TypeMatrices,
    delta: f64,
    opt_eng: f64,
    inputs: &BoundInputs,
) -> Result<FrontierRow, LpError> {
    let num_types = instance.num_types();
    let (_, opt_d) = opt_delta(instance, delta)?;
    let cost = if opt_eng <= 0.0 {
        0.0
    } else {
        normalize_cost(1.0 - opt_d / opt_eng)
    };
    let bound_worst = worst_case_bound(num_types, delta);
    let bound_main = if inputs.beta > 0.0 {
        (num_types as f64 * delta * (1.0 - inputs.alpha / inputs.beta)).min(bound_worst)
    } else {
        0.0
    };
    let eng_uniform = policy_engagement(instance, matrices, delta_uniform(instance, delta)?)?;
    let eng_exact = policy_engagement(instance, matrices, delta_exact(instance, delta)?)?;
    Ok(FrontierRow {
        delta,
        opt_delta: opt_d,
        opt_eng,
        cost,
        bound_main,
        bound_worst,
        eng_uniform,
        eng_exact,
    })
}

fn policy_engagement(
    instance: &Instance,
    matrices: &TypeMatrices,
    policy: crate::net::InjectionPolicy,
) -> Result<f64, LpError> {
    let state = limiting_state(matrices, &policy).map_err(PolicyError::from)?;
    Ok(engagement(&state, instance).map_err(PolicyError::from)?)
}

/// A frontier annotated with the probability scale and source label it was
/// computed from. Labels are emitted verbatim, so callers keep them free of
/// commas and quotes.
#[derive(Debug, Clone)]
pub struct LabeledFrontier<'a> {
    pub rows: &'a [FrontierRow],
    pub scale: f64,
    pub prob_source: &'a str,
}

pub const FRONTIER_CSV_HEADER: &str =
    "delta,opt_delta,opt_eng,cost,bound_main,bound_worst,eng_uniform,eng_exact,scale,prob_source";

/// Renders frontier groups as CSV. Numbers use the shortest round-trip
/// form, so identical inputs yield byte-identical output.
pub fn frontier_to_csv(groups: &[LabeledFrontier<'_>]) -> String {
    let mut out = String::from(FRONTIER_CSV_HEADER);
    out.push('\n');
    for g in groups {
        for r in g.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.delta,
                r.opt_delta,
                r.opt_eng,
                r.cost,
                r.bound_main,
                r.bound_worst,
                r.eng_uniform,
                r.eng_exact,
                g.scale,
                g.prob_source
            ));
        }
    }
    out
}

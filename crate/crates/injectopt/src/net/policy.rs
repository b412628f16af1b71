use thiserror::Error;

use crate::net::Instance;

/// Slack allowed on the per-user unit budget before a policy is rejected.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("shape mismatch: expected {expected:?} (types, users), got {got:?}")]
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("invalid injection policy: {0:?}")]
    InvalidPolicy(Vec<PolicyViolation>),
    #[error("state entries must be finite and nonnegative, found {value} at [{t}][{i}]")]
    InvalidState { t: usize, i: usize, value: f64 },
    #[error("internal numerical failure: {0}")]
    Internal(String),
}

/// One constraint violated by a candidate injection matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyViolation {
    /// `b[t][i]` is negative (or not finite).
    Negative { t: usize, i: usize, value: f64 },
    /// The injections to user `i` sum past the unit budget.
    BudgetExceeded { i: usize, total: f64 },
    /// Row `t` has a different length than row 0.
    RaggedRow { t: usize, got: usize, expected: usize },
}

/// Checks a candidate injection matrix against the policy constraints and
/// lists every violation. An empty report means the matrix is a valid
/// policy. Never fails.
pub fn validate_policy(b: &[Vec<f64>]) -> Vec<PolicyViolation> {
    let mut violations = Vec::new();
    let n = b.first().map_or(0, |row| row.len());
    for (t, row) in b.iter().enumerate() {
        if row.len() != n {
            violations.push(PolicyViolation::RaggedRow { t, got: row.len(), expected: n });
            continue;
        }
        for (i, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                violations.push(PolicyViolation::Negative { t, i, value: v });
            }
        }
    }
    if b.iter().all(|row| row.len() == n) {
        for i in 0..n {
            let total: f64 = b.iter().map(|row| row[i]).sum();
            if total > 1.0 + BUDGET_TOLERANCE {
                violations.push(PolicyViolation::BudgetExceeded { i, total });
            }
        }
    }
    violations
}

/// Injected tweet mass per user and type, at most one unit per user in total.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionPolicy {
    b: Vec<Vec<f64>>,
}

impl InjectionPolicy {
    pub fn new(b: Vec<Vec<f64>>) -> Result<Self, NetError> {
        let violations = validate_policy(&b);
        if violations.is_empty() {
            Ok(InjectionPolicy { b })
        } else {
            Err(NetError::InvalidPolicy(violations))
        }
    }

    /// The all-zero policy.
    pub fn zero(num_types: usize, n: usize) -> Self {
        InjectionPolicy { b: vec![vec![0.0; n]; num_types] }
    }

    /// The fully uniform policy `b[t][i] = 1/T`.
    pub fn uniform(num_types: usize, n: usize) -> Self {
        InjectionPolicy { b: vec![vec![1.0 / num_types as f64; n]; num_types] }
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn num_types(&self) -> usize {
        self.b.len()
    }

    pub fn n(&self) -> usize {
        self.b.first().map_or(0, |row| row.len())
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.b
    }
}

/// Expected tweet exposures per type and user.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    x: Vec<Vec<f64>>,
}

impl State {
    pub fn new(x: Vec<Vec<f64>>) -> Result<Self, NetError> {
        for (t, row) in x.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(NetError::InvalidState { t, i, value: v });
                }
            }
        }
        Ok(State { x })
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn num_types(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.x.first().map_or(0, |row| row.len())
    }
}

/// Total expected retweets generated by a state: `sum_t <w_t, x_t>` where
/// `w_t` is the retweet probability row, or the affinity row when one is set.
pub fn engagement(state: &State, instance: &Instance) -> Result<f64, NetError> {
    if state.num_types() != instance.num_types() || state.n() != instance.n() {
        return Err(NetError::ShapeMismatch {
            expected: (instance.num_types(), instance.n()),
            got: (state.num_types(), state.n()),
        });
    }
    let mut total = 0.0;
    for t in 0..instance.num_types() {
        let weights = instance.engagement_weights(t);
        total += weights.iter().zip(&state.x()[t]).map(|(w, x)| w * x).sum::<f64>();
    }
    Ok(total)
}

/// The fewest tweets of any type seen by any user.
pub fn diversity(state: &State) -> f64 {
    state.x().iter().flatten().copied().fold(f64::INFINITY, f64::min)
}

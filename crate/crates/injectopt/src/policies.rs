//! Engagement coefficients, the closed-form engagement-optimal policy, and
//! the two analytical diversity-guaranteeing policies.
//!
//! The coefficient `c[t][i]` is the total limiting engagement generated in
//! the whole system by injecting one unit of type `t` to user `i`; it solves
//! the transposed system `(I - A_t)^T c_t = w_t` where `w_t` is the
//! engagement weight row. With no cross-user constraints beyond the unit
//! budget, the engagement optimum simply spends each user's budget on their
//! highest-coefficient type.

use thiserror::Error;

use crate::linalg::Lu;
use crate::net::{build_type_matrices, InjectionPolicy, Instance, NetError};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("delta = {delta} exceeds 1/T = {max}; no policy can guarantee that diversity")]
    DeltaTooLarge { delta: f64, max: f64 },
    #[error("delta must be a finite nonnegative number, got {0}")]
    DeltaInvalid(f64),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Per-unit engagement coefficients and each user's favorite type.
#[derive(Debug, Clone)]
pub struct Coefficients {
    c: Vec<Vec<f64>>,
    favorite: Vec<usize>,
}

impl Coefficients {
    /// `c[t][i]`: limiting engagement per unit of type `t` injected to `i`.
    pub fn c(&self) -> &[Vec<f64>] {
        &self.c
    }

    /// The engagement-maximizing type per user; ties broken by lowest index.
    pub fn favorite(&self) -> &[usize] {
        &self.favorite
    }

    /// `sum_i max_t c[t][i]`, the closed-form engagement optimum.
    pub fn optimal_engagement(&self) -> f64 {
        let n = self.favorite.len();
        (0..n).map(|i| self.c[self.favorite[i]][i]).sum()
    }

    /// Flattens `c` in `(t, i)` order: index `t * n + i`.
    pub fn flattened(&self) -> Vec<f64> {
        self.c.iter().flatten().copied().collect()
    }
}

/// Computes the engagement coefficients by one transposed solve per type.
pub fn engagement_coefficients(instance: &Instance) -> Result<Coefficients, NetError> {
    let matrices = build_type_matrices(instance);
    let n = instance.n();
    let mut c = Vec::with_capacity(instance.num_types());
    for t in 0..instance.num_types() {
        let lu = Lu::factorize(&matrices.i_minus_a_dense(t), n)
            .map_err(|e| NetError::Internal(e.to_string()))?;
        c.push(lu.solve_transpose(instance.engagement_weights(t)));
    }
    let favorite = (0..n)
        .map(|i| {
            let mut best = 0;
            for t in 1..instance.num_types() {
                if c[t][i] > c[best][i] {
                    best = t;
                }
            }
            best
        })
        .collect();
    Ok(Coefficients { c, favorite })
}

/// The closed-form engagement-optimal policy: each user's full unit on their
/// favorite type. Returns the policy and its engagement `sum_i max_t c[t][i]`.
pub fn optimal_policy(instance: &Instance) -> Result<(InjectionPolicy, f64), PolicyError> {
    let coeffs = engagement_coefficients(instance)?;
    let mut b = vec![vec![0.0; instance.n()]; instance.num_types()];
    for (i, &f) in coeffs.favorite().iter().enumerate() {
        b[f][i] = 1.0;
    }
    Ok((InjectionPolicy::new(b)?, coeffs.optimal_engagement()))
}

pub(crate) fn check_delta(instance: &Instance, delta: f64) -> Result<(), PolicyError> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(PolicyError::DeltaInvalid(delta));
    }
    let max = 1.0 / instance.num_types() as f64;
    // Grid deltas like 1/T are computed in floating point; allow them through.
    if delta > max * (1.0 + 1e-12) {
        return Err(PolicyError::DeltaTooLarge { delta, max });
    }
    Ok(())
}

/// The delta-uniform policy: `delta` of every non-favorite type to each user,
/// the remaining `1 - (T-1) delta` on the favorite.
///
/// Directly injects at least `delta` of every type, so its limiting state is
/// delta-diverse, and it retains at least a `1 - (T-1) delta` fraction of the
/// optimal engagement.
pub fn delta_uniform(instance: &Instance, delta: f64) -> Result<InjectionPolicy, PolicyError> {
    check_delta(instance, delta)?;
    let coeffs = engagement_coefficients(instance)?;
    let num_types = instance.num_types();
    let mut b = vec![vec![delta; instance.n()]; num_types];
    for (i, &f) in coeffs.favorite().iter().enumerate() {
        b[f][i] = 1.0 - (num_types - 1) as f64 * delta;
    }
    Ok(InjectionPolicy::new(b)?)
}

/// The delta-exact policy: injects `delta * (1 - inc[t][i])` of each
/// non-favorite type, exactly enough that the limiting exposure equals
/// `delta`, and spends the remaining budget on the favorite type.
pub fn delta_exact(instance: &Instance, delta: f64) -> Result<InjectionPolicy, PolicyError> {
    check_delta(instance, delta)?;
    let coeffs = engagement_coefficients(instance)?;
    let matrices = build_type_matrices(instance);
    let inc = matrices.inc();
    let num_types = instance.num_types();
    let mut b = vec![vec![0.0; instance.n()]; num_types];
    for (i, &f) in coeffs.favorite().iter().enumerate() {
        let mut spent = 0.0;
        for t in 0..num_types {
            if t != f {
                let amount = delta * (1.0 - inc[t][i]);
                b[t][i] = amount;
                spent += amount;
            }
        }
        // Analytically 1 - spent >= 1 - (T-1) delta >= delta >= 0; the guard
        // only absorbs floating-point dips.
        b[f][i] = (1.0 - spent).max(0.0);
    }
    Ok(InjectionPolicy::new(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{diversity, engagement, limiting_state, validate_policy};

    fn chain2() -> Instance {
        Instance::new(2, 2, vec![(0, 1)], vec![vec![0.2, 0.5], vec![0.4, 0.1]]).unwrap()
    }

    #[test]
    fn chain2_coefficients_match_hand_product() {
        let coeffs = engagement_coefficients(&chain2()).unwrap();
        let c = coeffs.c();
        assert!((c[0][0] - 0.2).abs() < 1e-12);
        assert!((c[0][1] - 0.6).abs() < 1e-12);
        assert!((c[1][0] - 0.4).abs() < 1e-12);
        assert!((c[1][1] - 0.14).abs() < 1e-12);
        assert_eq!(coeffs.favorite(), &[1, 0]);
    }

    #[test]
    fn coefficients_equal_unit_injection_engagement() {
        // Oracle: c[t][i] is the limiting-state engagement of a unit
        // injection of type t to user i.
        let inst = chain2();
        let matrices = build_type_matrices(&inst);
        let coeffs = engagement_coefficients(&inst).unwrap();
        for t in 0..2 {
            for i in 0..2 {
                let mut b = vec![vec![0.0; 2]; 2];
                b[t][i] = 1.0;
                let state =
                    limiting_state(&matrices, &InjectionPolicy::new(b).unwrap()).unwrap();
                let eng = engagement(&state, &inst).unwrap();
                assert!(
                    (coeffs.c()[t][i] - eng).abs() < 1e-12,
                    "c[{t}][{i}] = {} vs unit-injection engagement {eng}",
                    coeffs.c()[t][i]
                );
            }
        }
    }

    #[test]
    fn empty_graph_coefficients_equal_probabilities() {
        let inst = Instance::new(3, 2, vec![], vec![vec![0.1, 0.2, 0.3], vec![0.3, 0.2, 0.1]])
            .unwrap();
        let coeffs = engagement_coefficients(&inst).unwrap();
        assert_eq!(coeffs.c(), inst.p());
    }

    #[test]
    fn homogeneous_probabilities_tie_break_to_type_zero() {
        let inst = Instance::new(2, 3, vec![], vec![vec![0.4, 0.4]; 3]).unwrap();
        let coeffs = engagement_coefficients(&inst).unwrap();
        assert_eq!(coeffs.favorite(), &[0, 0]);
    }

    #[test]
    fn chain2_optimal_policy() {
        let (policy, opt) = optimal_policy(&chain2()).unwrap();
        assert_eq!(policy.b(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((opt - 1.0).abs() < 1e-12);

        // The closed-form value matches the limiting-state engagement.
        let inst = chain2();
        let state = limiting_state(&build_type_matrices(&inst), &policy).unwrap();
        assert!((engagement(&state, &inst).unwrap() - opt).abs() < 1e-8);
    }

    #[test]
    fn empty_graph_single_strong_type() {
        let beta = 0.7;
        let n = 5;
        let p = vec![vec![beta; n], vec![0.2; n]];
        let inst = Instance::new(n, 2, vec![], p).unwrap();
        let (policy, opt) = optimal_policy(&inst).unwrap();
        assert!((opt - beta * n as f64).abs() < 1e-12);
        assert!(policy.b()[0].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn all_zero_probabilities_degenerate() {
        let inst = Instance::new(3, 2, vec![], vec![vec![0.0; 3]; 2]).unwrap();
        let (_, opt) = optimal_policy(&inst).unwrap();
        assert_eq!(opt, 0.0);
    }

    #[test]
    fn chain2_delta_uniform_quarter() {
        let policy = delta_uniform(&chain2(), 0.25).unwrap();
        assert_eq!(policy.b(), &[vec![0.25, 0.75], vec![0.75, 0.25]]);

        let inst = chain2();
        let state = limiting_state(&build_type_matrices(&inst), &policy).unwrap();
        let eng = engagement(&state, &inst).unwrap();
        assert!((eng - 0.835).abs() < 1e-12);
        // The worst-case guarantee: within (1 - (T-1) delta) of optimal.
        assert!(eng >= (1.0 - 0.25) * 1.0 - 1e-12);
        assert!(diversity(&state) >= 0.25 - 1e-12);
    }

    #[test]
    fn delta_zero_policies_equal_optimal() {
        let inst = chain2();
        let (opt_policy, _) = optimal_policy(&inst).unwrap();
        assert_eq!(delta_uniform(&inst, 0.0).unwrap(), opt_policy);
        assert_eq!(delta_exact(&inst, 0.0).unwrap(), opt_policy);
    }

    #[test]
    fn delta_at_cap_is_fully_uniform() {
        let inst = chain2();
        let policy = delta_uniform(&inst, 0.5).unwrap();
        assert_eq!(policy.b(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn delta_above_cap_rejected() {
        let err = delta_uniform(&chain2(), 0.6).unwrap_err();
        assert!(matches!(err, PolicyError::DeltaTooLarge { .. }));
        assert!(matches!(delta_exact(&chain2(), 0.6), Err(PolicyError::DeltaTooLarge { .. })));
    }

    #[test]
    fn chain2_delta_exact_quarter() {
        let inst = chain2();
        let policy = delta_exact(&inst, 0.25).unwrap();
        assert_eq!(policy.b(), &[vec![0.125, 0.75], vec![0.875, 0.25]]);

        let state = limiting_state(&build_type_matrices(&inst), &policy).unwrap();
        assert!((state.x()[0][0] - 0.5).abs() < 1e-12);
        assert!((state.x()[0][1] - 0.75).abs() < 1e-12);
        assert!((state.x()[1][0] - 0.9).abs() < 1e-12);
        assert!((state.x()[1][1] - 0.25).abs() < 1e-12);
        assert!((engagement(&state, &inst).unwrap() - 0.86).abs() < 1e-12);
        assert!(diversity(&state) >= 0.25 - 1e-12);
    }

    #[test]
    fn delta_exact_on_empty_graph_equals_delta_uniform() {
        let inst = Instance::new(3, 2, vec![], vec![vec![0.1, 0.2, 0.3], vec![0.3, 0.2, 0.1]])
            .unwrap();
        assert_eq!(
            delta_exact(&inst, 0.2).unwrap(),
            delta_uniform(&inst, 0.2).unwrap()
        );
    }

    #[test]
    fn delta_exact_dominates_delta_uniform_on_chain2() {
        let inst = chain2();
        let matrices = build_type_matrices(&inst);
        for delta in [0.05, 0.1, 0.25, 0.4, 0.5] {
            let uniform = delta_uniform(&inst, delta).unwrap();
            let exact = delta_exact(&inst, delta).unwrap();
            let eng_u =
                engagement(&limiting_state(&matrices, &uniform).unwrap(), &inst).unwrap();
            let eng_e =
                engagement(&limiting_state(&matrices, &exact).unwrap(), &inst).unwrap();
            assert!(eng_e >= eng_u - 1e-12, "delta = {delta}: {eng_e} < {eng_u}");
        }
    }

    #[test]
    fn analytic_policies_always_validate() {
        let inst = chain2();
        for delta in [0.0, 0.1, 0.3, 0.5] {
            assert!(validate_policy(delta_uniform(&inst, delta).unwrap().b()).is_empty());
            assert!(validate_policy(delta_exact(&inst, delta).unwrap().b()).is_empty());
        }
    }
}

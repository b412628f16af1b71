//! Step-by-step propagation dynamics, schedules, and the empirical
//! verification harness for the convergence guarantees.
//!
//! The recursion is `x_t^(k+1) = A_t x_t^(k) + b_t^(k+1)` with
//! `x^(0) = b^(0)`. Because every row sum of `A_t` is below 1, iterates
//! converge geometrically to the limiting state, and the gap after `k` steps
//! is certified by [`tail_bound`]: `||x(b) - x^(k)||_1 <= lambda gamma^(k+1)`
//! per type for any constant schedule.

use serde::Serialize;
use thiserror::Error;

use crate::lp::{opt_delta, LpError};
use crate::net::{
    build_type_matrices, diversity, engagement, limiting_state, InjectionPolicy, Instance,
    NetError, State, TypeMatrices,
};

/// Largest `states x types x users` cell count [`simulate`] will materialize.
pub const DEFAULT_CELL_BUDGET: usize = 100_000_000;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("schedule must contain at least one policy")]
    EmptySchedule,
    #[error("schedule entry {index} has shape {got:?}, expected {expected:?} (types, users)")]
    MixedShapes { index: usize, got: (usize, usize), expected: (usize, usize) },
    #[error("trajectory would hold {cells} exposure cells, over the budget of {budget}")]
    CellBudget { cells: usize, budget: usize },
    #[error(
        "challenger schedule is not {delta}-diverse at step {step} (diversity {diversity}); \
         the comparison requires diversity at every step"
    )]
    ChallengerNotDiverse { step: usize, diversity: f64, delta: f64 },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// One injection policy per timestep `0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    policies: Vec<InjectionPolicy>,
}

impl Schedule {
    /// All entries must share one shape.
    pub fn new(policies: Vec<InjectionPolicy>) -> Result<Self, DynamicsError> {
        let first = policies.first().ok_or(DynamicsError::EmptySchedule)?;
        let expected = (first.num_types(), first.n());
        for (index, p) in policies.iter().enumerate() {
            let got = (p.num_types(), p.n());
            if got != expected {
                return Err(DynamicsError::MixedShapes { index, got, expected });
            }
        }
        Ok(Schedule { policies })
    }

    /// The same policy at every step `0..=horizon`.
    pub fn constant(policy: InjectionPolicy, horizon: usize) -> Self {
        Schedule { policies: vec![policy; horizon + 1] }
    }

    pub fn policies(&self) -> &[InjectionPolicy] {
        &self.policies
    }

    /// `K`: the last timestep index.
    pub fn horizon(&self) -> usize {
        self.policies.len() - 1
    }

    pub fn num_types(&self) -> usize {
        self.policies[0].num_types()
    }

    pub fn n(&self) -> usize {
        self.policies[0].n()
    }
}

/// The states a schedule induced, one per timestep `0..=K`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<State>,
    schedule: Schedule,
}

impl Trajectory {
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("schedules are nonempty")
    }
}

/// One propagation step `A_t x_t + b_t` per type.
pub fn step(
    matrices: &TypeMatrices,
    state: &State,
    injection: &InjectionPolicy,
) -> Result<State, NetError> {
    let shape = (matrices.num_types(), matrices.n());
    for got in [(state.num_types(), state.n()), (injection.num_types(), injection.n())] {
        if got != shape {
            return Err(NetError::ShapeMismatch { expected: shape, got });
        }
    }
    let mut x = Vec::with_capacity(shape.0);
    for t in 0..shape.0 {
        let mut next = vec![0.0; shape.1];
        matrices.matrix(t).mul_vec(&state.x()[t], &mut next);
        for (slot, b) in next.iter_mut().zip(&injection.b()[t]) {
            *slot += b;
        }
        x.push(next);
    }
    State::new(x)
}

pub fn simulate(matrices: &TypeMatrices, schedule: &Schedule) -> Result<Trajectory, DynamicsError> {
    simulate_with_budget(matrices, schedule, DEFAULT_CELL_BUDGET)
}

/// Runs the recursion, storing every state. Refuses trajectories whose
/// total exposure cell count exceeds `budget`.
pub fn simulate_with_budget(
    matrices: &TypeMatrices,
    schedule: &Schedule,
    budget: usize,
) -> Result<Trajectory, DynamicsError> {
    let cells = schedule
        .policies()
        .len()
        .saturating_mul(schedule.num_types())
        .saturating_mul(schedule.n());
    if cells > budget {
        return Err(DynamicsError::CellBudget { cells, budget });
    }
    let mut states = Vec::with_capacity(schedule.policies().len());
    let first = &schedule.policies()[0];
    states.push(State::new(first.b().to_vec())?);
    for injection in &schedule.policies()[1..] {
        let next = step(matrices, states.last().unwrap(), injection)?;
        states.push(next);
    }
    Ok(Trajectory { states, schedule: schedule.clone() })
}

/// Mean per-step engagement along a trajectory.
pub fn average_engagement(trajectory: &Trajectory, instance: &Instance) -> Result<f64, NetError> {
    let mut total = 0.0;
    for state in trajectory.states() {
        total += engagement(state, instance)?;
    }
    Ok(total / trajectory.states().len() as f64)
}

/// Entrywise mean policy of a schedule; valid by convexity.
pub fn average_policy(schedule: &Schedule) -> InjectionPolicy {
    let (num_types, n) = (schedule.num_types(), schedule.n());
    let len = schedule.policies().len() as f64;
    let mut b = vec![vec![0.0; n]; num_types];
    for policy in schedule.policies() {
        for t in 0..num_types {
            for i in 0..n {
                b[t][i] += policy.b()[t][i];
            }
        }
    }
    for row in &mut b {
        for v in row.iter_mut() {
            *v /= len;
        }
    }
    InjectionPolicy::new(b).expect("a convex combination of valid policies is valid")
}

/// Certified geometric tail of the dynamics: for every policy injected
/// constantly, `||x(b) - x^(k)||_1 <= lambda * gamma^(k+1)` per type.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailBound {
    pub lambda: f64,
    pub gamma: f64,
}

impl TailBound {
    /// The L1 gap bound after step `k`.
    pub fn after(&self, k: usize) -> f64 {
        self.lambda * self.gamma.powi(k as i32 + 1)
    }
}

/// `gamma` is the largest incoming weight (max row sum over all types) and
/// `lambda = n / (1 - gamma)`: one step contracts the injected mass by
/// `gamma` in the infinity norm, and summing the geometric series over the
/// `n` users gives the L1 constant. An empty graph has `gamma = 0`,
/// `lambda = n`, and an exactly-converged state from step 0 on.
pub fn tail_bound(matrices: &TypeMatrices) -> TailBound {
    let gamma = matrices.max_row_sum();
    debug_assert!(gamma < 1.0);
    TailBound { lambda: matrices.n() as f64 / (1.0 - gamma), gamma }
}

/// One labeled inequality from the verification harness.
///
/// `margin` is oriented so that nonnegative means the inequality holds;
/// `passed` allows a `1e-9` float-noise grace.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

impl CheckResult {
    /// Records `measured <= bound`, with a tiny grace for accumulated roundoff.
    pub fn le(name: &str, measured: f64, bound: f64) -> Self {
        let margin = bound - measured;
        CheckResult { name: name.into(), passed: margin >= -1e-9, measured, bound, margin }
    }

    /// Records `measured >= bound`, with a tiny grace for accumulated roundoff.
    pub fn ge(name: &str, measured: f64, bound: f64) -> Self {
        let margin = measured - bound;
        CheckResult { name: name.into(), passed: margin >= -1e-9, measured, bound, margin }
    }
}

/// Empirical verdict on the three convergence claims for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub delta: f64,
    pub horizon: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub optimal_engagement: f64,
    pub average_engagement: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Checks, for the diversity-constrained optimum `b*` injected constantly
/// over `0..=horizon`:
///
/// 1. `0 <= eng(b*) - eng_av <= C / (K+1)` with `C = T lambda gamma / (1 - gamma)`,
/// 2. `div(x^(k)) >= delta - lambda gamma^(k+1)` at every step,
/// 3. against an optional challenger schedule that is `delta`-diverse at
///    every step (a precondition, rejected otherwise, and required at step 0
///    too): its average engagement is at most `eng(b_av)` of its
///    time-averaged policy, which is at most `eng(b*)`.
pub fn verify_theorem1(
    instance: &Instance,
    delta: f64,
    horizon: usize,
    challenger: Option<&Schedule>,
) -> Result<ConvergenceReport, DynamicsError> {
    let matrices = build_type_matrices(instance);
    let bound = tail_bound(&matrices);
    let (optimal, _) = opt_delta(instance, delta)?;
    let optimal_state = limiting_state(&matrices, &optimal)?;
    let optimal_eng = engagement(&optimal_state, instance)?;

    let schedule = Schedule::constant(optimal, horizon);
    let trajectory = simulate(&matrices, &schedule)?;
    let eng_av = average_engagement(&trajectory, instance)?;

    let mut checks = Vec::new();
    let deficit = optimal_eng - eng_av;
    let constant = instance.num_types() as f64 * bound.lambda * bound.gamma / (1.0 - bound.gamma);
    checks.push(CheckResult::ge("average_engagement_below_limit", deficit, 0.0));
    checks.push(CheckResult::le(
        "average_engagement_deficit_bound",
        deficit,
        constant / (horizon as f64 + 1.0),
    ));

    let worst_diversity_margin = trajectory
        .states()
        .iter()
        .enumerate()
        .map(|(k, state)| diversity(state) - (delta - bound.after(k)))
        .fold(f64::INFINITY, f64::min);
    checks.push(CheckResult::ge("stepwise_diversity_tail", worst_diversity_margin, 0.0));

    if let Some(challenger) = challenger {
        let challenger_traj = simulate(&matrices, challenger)?;
        for (step, state) in challenger_traj.states().iter().enumerate() {
            let div = diversity(state);
            if div < delta - 1e-9 {
                return Err(DynamicsError::ChallengerNotDiverse {
                    step,
                    diversity: div,
                    delta,
                });
            }
        }
        let challenger_avg = average_engagement(&challenger_traj, instance)?;
        let averaged = average_policy(challenger);
        let averaged_eng = engagement(&limiting_state(&matrices, &averaged)?, instance)?;
        checks.push(CheckResult::le(
            "challenger_average_vs_averaged_policy",
            challenger_avg,
            averaged_eng,
        ));
        checks.push(CheckResult::le("averaged_policy_vs_optimal", averaged_eng, optimal_eng));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(ConvergenceReport {
        delta,
        horizon,
        gamma: bound.gamma,
        lambda: bound.lambda,
        optimal_engagement: optimal_eng,
        average_engagement: eng_av,
        checks,
        passed,
    })
}

/// Renders a trajectory as `step,type,user,exposure` CSV, rows ordered by
/// step, then type, then user.
pub fn trajectory_to_csv(trajectory: &Trajectory) -> String {
    let mut out = String::from("step,type,user,exposure\n");
    for (k, state) in trajectory.states().iter().enumerate() {
        for (t, row) in state.x().iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                out.push_str(&format!("{k},{t},{i},{v}\n"));
            }
        }
    }
    out
}

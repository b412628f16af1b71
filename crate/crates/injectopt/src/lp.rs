//! Linear programs over injection policies and a self-contained simplex
//! solver.
//!
//! The solver is a dense-tableau, two-phase simplex: artificial variables
//! and a phase-1 feasibility pass instead of big-M, Dantzig pricing that
//! permanently switches to Bland's rule when the objective stalls, so it
//! cannot cycle. Everything is deterministic: identical programs take
//! identical pivot sequences.

use thiserror::Error;

use crate::linalg::Lu;
use crate::net::{build_type_matrices, InjectionPolicy, Instance};
use crate::policies::{check_delta, engagement_coefficients, PolicyError};

/// Pivot and feasibility tolerance of the simplex solver.
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub bound: f64,
}

/// `maximize objective . x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("constraint has {got} coefficients, expected {expected}")]
    ConstraintLength { got: usize, expected: usize },
    #[error("coefficient or bound {0} is not finite")]
    NonFinite(f64),
    #[error("simplex iteration cap {cap} exceeded")]
    IterationCap { cap: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("internal: {0}")]
    Internal(String),
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Result<Self, LpError> {
        if let Some(&bad) = objective.iter().find(|v| !v.is_finite()) {
            return Err(LpError::NonFinite(bad));
        }
        Ok(LinearProgram { objective, constraints: Vec::new() })
    }

    pub fn push_constraint(
        &mut self,
        coeffs: Vec<f64>,
        rel: Rel,
        bound: f64,
    ) -> Result<(), LpError> {
        if coeffs.len() != self.num_vars() {
            return Err(LpError::ConstraintLength { got: coeffs.len(), expected: self.num_vars() });
        }
        if let Some(&bad) = coeffs.iter().find(|v| !v.is_finite()) {
            return Err(LpError::NonFinite(bad));
        }
        if !bound.is_finite() {
            return Err(LpError::NonFinite(bound));
        }
        self.constraints.push(Constraint { coeffs, rel, bound });
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver outcome. `values` and `objective` are meaningful only when the
/// status is `Optimal`; otherwise `values` is empty and `objective` is NaN.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        LpSolution { status, values: Vec::new(), objective: f64::NAN }
    }
}

/// Solves the program with the default iteration cap `50 * (rows + columns)`
/// counted over both phases, columns including slacks and artificials.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_capped(lp, None)
}

fn solve_capped(lp: &LinearProgram, cap_override: Option<usize>) -> Result<LpSolution, LpError> {
    Simplex::new(lp, cap_override).run(lp)
}

enum PhaseEnd {
    Done,
    Unbounded,
}

struct Simplex {
    rows: usize,
    /// Total columns excluding the rhs: structural, slack, artificial.
    cols: usize,
    num_structural: usize,
    art_start: usize,
    /// `rows` tableau rows, each `cols + 1` wide with the rhs last.
    tab: Vec<Vec<f64>>,
    /// Objective row: `z_j - c_j` per column, current objective value last.
    obj: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
    cap: usize,
}

impl Simplex {
    fn new(lp: &LinearProgram, cap_override: Option<usize>) -> Self {
        let m = lp.constraints.len();
        let ns = lp.num_vars();

        // Canonical rows: nonnegative rhs, and >= flipped to <= when the
        // bound is zero so the surplus slot can start basic.
        let canon: Vec<(Vec<f64>, Rel, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                let (mut coeffs, mut rel, mut bound) = (c.coeffs.clone(), c.rel, c.bound);
                if bound < 0.0 || (bound == 0.0 && rel == Rel::Ge) {
                    for v in &mut coeffs {
                        *v = -*v;
                    }
                    bound = -bound;
                    rel = if rel == Rel::Le { Rel::Ge } else { Rel::Le };
                }
                (coeffs, rel, bound)
            })
            .collect();

        let num_art = canon.iter().filter(|(_, rel, _)| *rel == Rel::Ge).count();
        let art_start = ns + m;
        let cols = art_start + num_art;

        let mut tab = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0usize; m];
        let mut next_art = art_start;
        for (r, (coeffs, rel, bound)) in canon.into_iter().enumerate() {
            tab[r][..ns].copy_from_slice(&coeffs);
            tab[r][cols] = bound;
            match rel {
                Rel::Le => {
                    tab[r][ns + r] = 1.0;
                    basis[r] = ns + r;
                }
                Rel::Ge => {
                    tab[r][ns + r] = -1.0;
                    tab[r][next_art] = 1.0;
                    basis[r] = next_art;
                    next_art += 1;
                }
            }
        }

        let cap = cap_override.unwrap_or(50 * (m + cols));
        Simplex { rows: m, cols, num_structural: ns, art_start, tab, obj: Vec::new(), basis, pivots: 0, cap }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        if self.cols > self.art_start {
            // Phase 1: maximize -(sum of artificials); feasible iff it
            // reaches zero.
            self.obj = vec![0.0; self.cols + 1];
            for r in 0..self.rows {
                if self.basis[r] >= self.art_start {
                    for j in 0..=self.cols {
                        self.obj[j] -= self.tab[r][j];
                    }
                }
            }
            for j in self.art_start..self.cols {
                self.obj[j] += 1.0;
            }
            match self.run_phase()? {
                PhaseEnd::Done => {}
                PhaseEnd::Unbounded => {
                    return Err(LpError::Internal(
                        "phase-1 objective is bounded yet reported unbounded".into(),
                    ))
                }
            }
            if self.obj[self.cols] < -TOL {
                return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
            }
            // Pivot leftover artificials out of the basis where possible;
            // rows that cannot are redundant and stay pinned at zero
            // (artificial columns never re-enter).
            for r in 0..self.rows {
                if self.basis[r] >= self.art_start {
                    if let Some(q) =
                        (0..self.art_start).find(|&j| self.tab[r][j].abs() > TOL)
                    {
                        self.pivot(r, q);
                    }
                }
            }
        }

        // Phase 2 objective row from the original costs and current basis.
        self.obj = vec![0.0; self.cols + 1];
        for j in 0..self.num_structural {
            self.obj[j] = -lp.objective[j];
        }
        for r in 0..self.rows {
            let cb = if self.basis[r] < self.num_structural {
                lp.objective[self.basis[r]]
            } else {
                0.0
            };
            if cb != 0.0 {
                for j in 0..=self.cols {
                    self.obj[j] += cb * self.tab[r][j];
                }
            }
        }
        match self.run_phase()? {
            PhaseEnd::Unbounded => return Ok(LpSolution::non_optimal(LpStatus::Unbounded)),
            PhaseEnd::Done => {}
        }

        let mut values = vec![0.0; self.num_structural];
        for r in 0..self.rows {
            if self.basis[r] < self.num_structural {
                values[self.basis[r]] = self.tab[r][self.cols].max(0.0);
            }
        }
        // Recompute from the assignment so the reported objective is exactly
        // consistent with the reported values.
        let objective = lp.objective.iter().zip(&values).map(|(c, v)| c * v).sum();
        Ok(LpSolution { status: LpStatus::Optimal, values, objective })
    }

    fn run_phase(&mut self) -> Result<PhaseEnd, LpError> {
        let mut bland = false;
        let mut stalled = 0usize;
        loop {
            let Some(q) = self.entering(bland) else { return Ok(PhaseEnd::Done) };
            let Some(r) = self.leaving(q) else { return Ok(PhaseEnd::Unbounded) };
            if self.pivots >= self.cap {
                return Err(LpError::IterationCap { cap: self.cap });
            }
            let before = self.obj[self.cols];
            self.pivot(r, q);
            if (self.obj[self.cols] - before).abs() <= 1e-12 {
                stalled += 1;
                if stalled > self.rows + 16 {
                    bland = true;
                }
            } else {
                stalled = 0;
            }
        }
    }

    /// Improving column, or None at optimality. Artificials never enter.
    fn entering(&self, bland: bool) -> Option<usize> {
        if bland {
            return (0..self.art_start).find(|&j| self.obj[j] < -TOL);
        }
        let mut best = None;
        let mut best_v = -TOL;
        for j in 0..self.art_start {
            if self.obj[j] < best_v {
                best_v = self.obj[j];
                best = Some(j);
            }
        }
        best
    }

    /// Minimum-ratio row; ties go to the smallest basis variable index.
    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(f64, usize, usize)> = None;
        for r in 0..self.rows {
            let a = self.tab[r][q];
            if a > TOL {
                let ratio = self.tab[r][self.cols] / a;
                let better = match best {
                    None => true,
                    Some((br, bv, _)) => {
                        ratio < br - TOL || (ratio <= br + TOL && self.basis[r] < bv)
                    }
                };
                if better {
                    best = Some((ratio, self.basis[r], r));
                }
            }
        }
        best.map(|(_, _, r)| r)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.tab[r][q];
        for j in 0..=self.cols {
            self.tab[r][j] /= piv;
        }
        self.tab[r][q] = 1.0;
        for rr in 0..self.rows {
            if rr != r {
                let f = self.tab[rr][q];
                if f != 0.0 {
                    for j in 0..=self.cols {
                        self.tab[rr][j] -= f * self.tab[r][j];
                    }
                    self.tab[rr][q] = 0.0;
                    // Keep the basic solution numerically nonnegative.
                    if self.tab[rr][self.cols] < 0.0 && self.tab[rr][self.cols] > -TOL {
                        self.tab[rr][self.cols] = 0.0;
                    }
                }
            }
        }
        let f = self.obj[q];
        if f != 0.0 {
            for j in 0..=self.cols {
                self.obj[j] -= f * self.tab[r][j];
            }
            self.obj[q] = 0.0;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }
}

/// `maximize sum_ti c[t][i] b[t][i] s.t. sum_t b[t][i] <= 1 per user`,
/// variables flattened in `(t, i)` order as `t * n + i`.
pub fn build_engagement_lp(instance: &Instance) -> Result<LinearProgram, LpError> {
    let coeffs = engagement_coefficients(instance).map_err(PolicyError::from)?;
    let n = instance.n();
    let num_types = instance.num_types();
    let mut lp = LinearProgram::new(coeffs.flattened())?;
    for i in 0..n {
        let mut row = vec![0.0; num_types * n];
        for t in 0..num_types {
            row[t * n + i] = 1.0;
        }
        lp.push_constraint(row, Rel::Le, 1.0)?;
    }
    Ok(lp)
}

/// Selects how the diversity constraints are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiversityFormulation {
    /// Constraint rows are rows of `(I - A_t)^-1`, materialized by one
    /// transposed solve per row.
    #[default]
    Dense,
    /// Variables are the limiting exposures `y_t` themselves, with
    /// `(I - A_t) y_t` recovering the policy; avoids materializing the
    /// inverse.
    Substituted,
}

/// The engagement program plus `T * n` rows forcing every limiting exposure
/// to at least `delta`.
pub fn build_diversity_lp(instance: &Instance, delta: f64) -> Result<LinearProgram, LpError> {
    check_delta(instance, delta)?;
    let n = instance.n();
    let num_types = instance.num_types();
    let matrices = build_type_matrices(instance);
    let mut lp = build_engagement_lp(instance)?;
    let mut unit = vec![0.0; n];
    for t in 0..num_types {
        let lu = Lu::factorize(&matrices.i_minus_a_dense(t), n)
            .map_err(|e| LpError::Internal(e.to_string()))?;
        for i in 0..n {
            unit[i] = 1.0;
            let inverse_row = lu.solve_transpose(&unit);
            unit[i] = 0.0;
            let mut row = vec![0.0; num_types * n];
            row[t * n..(t + 1) * n].copy_from_slice(&inverse_row);
            lp.push_constraint(row, Rel::Ge, delta)?;
        }
    }
    Ok(lp)
}

/// The substituted form over exposure variables `y[t * n + i]`: maximize
/// `sum_t <w_t, y_t>` with `y >= delta`, `(I - A_t) y_t >= 0`, and
/// `sum_t ((I - A_t) y_t)_i <= 1`.
pub fn build_diversity_lp_substituted(
    instance: &Instance,
    delta: f64,
) -> Result<LinearProgram, LpError> {
    check_delta(instance, delta)?;
    let n = instance.n();
    let num_types = instance.num_types();
    let matrices = build_type_matrices(instance);
    let i_minus_a: Vec<Vec<f64>> = (0..num_types).map(|t| matrices.i_minus_a_dense(t)).collect();

    let mut objective = vec![0.0; num_types * n];
    for t in 0..num_types {
        objective[t * n..(t + 1) * n].copy_from_slice(instance.engagement_weights(t));
    }
    let mut lp = LinearProgram::new(objective)?;
    for t in 0..num_types {
        for i in 0..n {
            let mut row = vec![0.0; num_types * n];
            row[t * n + i] = 1.0;
            lp.push_constraint(row, Rel::Ge, delta)?;
        }
    }
    for t in 0..num_types {
        for i in 0..n {
            let mut row = vec![0.0; num_types * n];
            row[t * n..(t + 1) * n].copy_from_slice(&i_minus_a[t][i * n..(i + 1) * n]);
            lp.push_constraint(row, Rel::Ge, 0.0)?;
        }
    }
    for i in 0..n {
        let mut row = vec![0.0; num_types * n];
        for t in 0..num_types {
            row[t * n..(t + 1) * n]
                .iter_mut()
                .zip(&i_minus_a[t][i * n..(i + 1) * n])
                .for_each(|(slot, v)| *slot += v);
        }
        lp.push_constraint(row, Rel::Le, 1.0)?;
    }
    Ok(lp)
}

/// The engagement optimum subject to `delta`-diversity, with the achieving
/// policy. Infeasibility cannot legitimately happen for `delta <= 1/T` (the
/// uniform policy is a witness) and is reported as an internal error.
pub fn opt_delta(instance: &Instance, delta: f64) -> Result<(InjectionPolicy, f64), LpError> {
    opt_delta_with(instance, delta, DiversityFormulation::Dense)
}

pub fn opt_delta_with(
    instance: &Instance,
    delta: f64,
    formulation: DiversityFormulation,
) -> Result<(InjectionPolicy, f64), LpError> {
    let lp = match formulation {
        DiversityFormulation::Dense => build_diversity_lp(instance, delta)?,
        DiversityFormulation::Substituted => build_diversity_lp_substituted(instance, delta)?,
    };
    let solution = solve(&lp)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(LpError::Internal(format!(
                "diversity program reported infeasible at delta = {delta}, \
                 but the uniform policy is always feasible"
            )))
        }
        LpStatus::Unbounded => {
            return Err(LpError::Internal(
                "diversity program reported unbounded despite unit budgets".into(),
            ))
        }
    }

    let n = instance.n();
    let num_types = instance.num_types();
    let flat = match formulation {
        DiversityFormulation::Dense => solution.values,
        DiversityFormulation::Substituted => {
            // Recover b_t = (I - A_t) y_t from the exposure variables.
            let matrices = build_type_matrices(instance);
            let mut flat = vec![0.0; num_types * n];
            let mut propagated = vec![0.0; n];
            for t in 0..num_types {
                let y_t = &solution.values[t * n..(t + 1) * n];
                matrices.matrix(t).mul_vec(y_t, &mut propagated);
                for i in 0..n {
                    flat[t * n + i] = y_t[i] - propagated[i];
                }
            }
            flat
        }
    };

    let mut b: Vec<Vec<f64>> =
        (0..num_types).map(|t| flat[t * n..(t + 1) * n].to_vec()).collect();
    // Strip solver roundoff: clamp vanishing negatives, renormalize budgets
    // that exceed 1 by noise. Anything larger is a solver defect.
    for row in &mut b {
        for v in row.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-7 {
                    return Err(LpError::Internal(format!(
                        "solution entry {v} is negative beyond tolerance"
                    )));
                }
                *v = 0.0;
            }
        }
    }
    for i in 0..n {
        let total: f64 = (0..num_types).map(|t| b[t][i]).sum();
        if total > 1.0 {
            if total > 1.0 + 1e-7 {
                return Err(LpError::Internal(format!(
                    "user {i} budget {total} exceeds 1 beyond tolerance"
                )));
            }
            for t in 0..num_types {
                b[t][i] /= total;
            }
        }
    }
    let policy = InjectionPolicy::new(b).map_err(PolicyError::from)?;
    Ok((policy, solution.objective))
}

fn mps_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    for prec in (0..=6).rev() {
        let s = format!("{v:.prec$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.0e}")
}

/// Renders the program in fixed-layout MPS, objective row `COST`, rows
/// `C0000001..`, columns `X0000001..`. An `OBJSENSE MAX` section records the
/// maximization sense (most solvers otherwise assume minimize).
pub fn to_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME          {name}\n"));
    out.push_str("OBJSENSE\n    MAX\n");
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    for (k, c) in lp.constraints.iter().enumerate() {
        let tag = match c.rel {
            Rel::Le => 'L',
            Rel::Ge => 'G',
        };
        out.push_str(&format!(" {}  C{:07}\n", tag, k + 1));
    }
    out.push_str("COLUMNS\n");
    for j in 0..lp.num_vars() {
        let col = format!("X{:07}", j + 1);
        let mut wrote = false;
        if lp.objective[j] != 0.0 {
            out.push_str(&format!("    {col}  COST      {}\n", mps_number(lp.objective[j])));
            wrote = true;
        }
        for (k, c) in lp.constraints.iter().enumerate() {
            if c.coeffs[j] != 0.0 {
                out.push_str(&format!(
                    "    {col}  C{:07}  {}\n",
                    k + 1,
                    mps_number(c.coeffs[j])
                ));
                wrote = true;
            }
        }
        // Declare columns that appear nowhere so the variable set survives.
        if !wrote {
            out.push_str(&format!("    {col}  COST      0\n"));
        }
    }
    out.push_str("RHS\n");
    for (k, c) in lp.constraints.iter().enumerate() {
        if c.bound != 0.0 {
            out.push_str(&format!("    RHS       C{:07}  {}\n", k + 1, mps_number(c.bound)));
        }
    }
    out.push_str("ENDATA\n");
    out
}

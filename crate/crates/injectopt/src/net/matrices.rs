use crate::linalg::{Csr, Lu};
use crate::net::policy::{InjectionPolicy, NetError, State};
use crate::net::Instance;

/// The per-type propagation matrices `A_t` with entry `p[t][j] / following(i)`
/// on each follower edge `(i, j)`, plus the derived per-user incoming weights
/// `inc[t][i]` (the row sums of `A_t`).
///
/// Every row sum is strictly below 1, so each `A_t` has spectral radius below
/// 1 and the limiting state `(I - A_t)^-1 b_t` exists for every policy.
#[derive(Debug, Clone)]
pub struct TypeMatrices {
    n: usize,
    mats: Vec<Csr>,
    following: Vec<usize>,
    inc: Vec<Vec<f64>>,
}

impl TypeMatrices {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_types(&self) -> usize {
        self.mats.len()
    }

    /// The sparse matrix `A_t`.
    pub fn matrix(&self, t: usize) -> &Csr {
        &self.mats[t]
    }

    /// Outdegree of each user in the follower graph.
    pub fn following(&self) -> &[usize] {
        &self.following
    }

    /// Incoming weights `inc[t][i]`, zero exactly for users who follow nobody.
    pub fn inc(&self) -> &[Vec<f64>] {
        &self.inc
    }

    /// The largest row sum across all types: the contraction factor of one
    /// propagation step in the infinity norm.
    pub fn max_row_sum(&self) -> f64 {
        // Empty rows sum to -0.0; adding +0.0 keeps reports from printing -0.
        self.inc.iter().flatten().copied().fold(0.0, f64::max) + 0.0
    }

    /// Dense row-major `I - A_t`.
    pub fn i_minus_a_dense(&self, t: usize) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        for i in 0..n {
            for (j, v) in self.mats[t].row(i) {
                m[i * n + j] -= v;
            }
        }
        m
    }
}

/// Builds the type matrices of an instance.
///
/// Rows of users who follow nobody are all-zero. Probabilities are already
/// validated to lie in `[0, 1)` by [`Instance::new`], which bounds every row
/// sum strictly below 1.
pub fn build_type_matrices(instance: &Instance) -> TypeMatrices {
    let n = instance.n();
    let num_types = instance.num_types();
    let mut following = vec![0usize; n];
    for &(from, _) in instance.edges() {
        following[from] += 1;
    }

    let mut mats = Vec::with_capacity(num_types);
    let mut inc = Vec::with_capacity(num_types);
    for t in 0..num_types {
        let p_t = &instance.p()[t];
        let triplets: Vec<(usize, usize, f64)> = instance
            .edges()
            .iter()
            .map(|&(i, j)| (i, j, p_t[j] / following[i] as f64))
            .collect();
        let mat = Csr::from_triplets(n, n, &triplets);
        let row_sums: Vec<f64> = (0..n).map(|i| mat.row_sum(i)).collect();
        debug_assert!(row_sums.iter().all(|&s| s < 1.0));
        mats.push(mat);
        inc.push(row_sums);
    }
    TypeMatrices { n, mats, following, inc }
}

/// Controls how the limiting-state linear systems are solved.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Use a dense LU factorization for instances up to this many users;
    /// larger instances fall back to Neumann-series summation.
    pub dense_threshold: usize,
    /// Stop the Neumann series once a term's L1 norm drops below this.
    pub neumann_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { dense_threshold: 2_000, neumann_tol: 1e-12 }
    }
}

/// Computes the limiting state `x` with `(I - A_t) x_t = b_t` for each type.
///
/// Solved by factorization (or series summation above the dense threshold),
/// never by forming an explicit inverse. Failure is impossible for matrices
/// built from a valid instance and is reported as an internal error.
pub fn limiting_state(
    matrices: &TypeMatrices,
    policy: &InjectionPolicy,
) -> Result<State, NetError> {
    limiting_state_with(matrices, policy, &SolveOptions::default())
}

pub fn limiting_state_with(
    matrices: &TypeMatrices,
    policy: &InjectionPolicy,
    options: &SolveOptions,
) -> Result<State, NetError> {
    if policy.num_types() != matrices.num_types() || policy.n() != matrices.n() {
        return Err(NetError::ShapeMismatch {
            expected: (matrices.num_types(), matrices.n()),
            got: (policy.num_types(), policy.n()),
        });
    }
    let n = matrices.n();
    let mut x = Vec::with_capacity(matrices.num_types());
    for t in 0..matrices.num_types() {
        let b_t = &policy.b()[t];
        let x_t = if n <= options.dense_threshold {
            let lu = Lu::factorize(&matrices.i_minus_a_dense(t), n)
                .map_err(|e| NetError::Internal(e.to_string()))?;
            lu.solve(b_t)
        } else {
            neumann_solve(matrices.matrix(t), b_t, options.neumann_tol)
        };
        x.push(x_t);
    }
    State::new(x)
}

/// Sums the series `b + A b + A^2 b + ...` until a term's L1 norm falls
/// below `tol`. Converges geometrically since every row sum of `A` is
/// strictly below 1.
fn neumann_solve(a: &Csr, b: &[f64], tol: f64) -> Vec<f64> {
    let mut sum = b.to_vec();
    let mut term = b.to_vec();
    let mut next = vec![0.0; b.len()];
    loop {
        a.mul_vec(&term, &mut next);
        std::mem::swap(&mut term, &mut next);
        let norm: f64 = term.iter().map(|v| v.abs()).sum();
        if norm < tol {
            break;
        }
        for (s, v) in sum.iter_mut().zip(&term) {
            *s += v;
        }
    }
    sum
}

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("probability matrix has {got} rows, expected {expected} (one per type)")]
    WrongTypeCount { got: usize, expected: usize },
    #[error("probability row for type {t} has {got} entries, expected {expected}")]
    WrongUserCount { t: usize, got: usize, expected: usize },
    #[error("retweet probability p[{t}][{i}] = {value} is outside [0, 1)")]
    ProbabilityOutOfRange { t: usize, i: usize, value: f64 },
    #[error("affinity e[{t}][{i}] = {value} must be finite and nonnegative")]
    AffinityOutOfRange { t: usize, i: usize, value: f64 },
    #[error("edge ({from}, {to}) references a user outside 0..{n}")]
    EdgeOutOfRange { from: usize, to: usize, n: usize },
    #[error("self-loop edge ({0}, {0}) is not allowed")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("instance must have at least one type")]
    NoTypes,
}

/// A non-fatal input irregularity that was repaired while reading raw data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputWarning {
    SelfLoopDropped { user: usize },
    DuplicateEdgeDropped { from: usize, to: usize },
}

impl std::fmt::Display for InputWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputWarning::SelfLoopDropped { user } => {
                write!(f, "dropped self-loop edge ({user}, {user})")
            }
            InputWarning::DuplicateEdgeDropped { from, to } => {
                write!(f, "dropped duplicate edge ({from}, {to})")
            }
        }
    }
}

/// Drops self-loops and duplicate edges from raw input, reporting each drop.
///
/// Used by the file readers and the ingestion pipeline; [`Instance::new`]
/// itself rejects such edges outright.
pub fn sanitize_edges(
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> (Vec<(usize, usize)>, Vec<InputWarning>) {
    let mut seen = BTreeSet::new();
    let mut clean = Vec::new();
    let mut warnings = Vec::new();
    for (from, to) in edges {
        if from == to {
            warnings.push(InputWarning::SelfLoopDropped { user: from });
        } else if !seen.insert((from, to)) {
            warnings.push(InputWarning::DuplicateEdgeDropped { from, to });
        } else {
            clean.push((from, to));
        }
    }
    (clean, warnings)
}

/// A follower graph together with per-type retweet probabilities.
///
/// An edge `(i, j)` means user `i` follows user `j`, so tweets flow from `j`
/// to `i`. `p[t][i]` is the probability that user `i` retweets a tweet of
/// type `t` and must lie strictly below 1 for the propagation dynamics to
/// converge. The optional affinity matrix `e` replaces `p` inside engagement
/// objectives when a user's engagement weight differs from their retweet
/// probability; it defaults to `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    num_types: usize,
    edges: Vec<(usize, usize)>,
    p: Vec<Vec<f64>>,
    e: Option<Vec<Vec<f64>>>,
}

impl Instance {
    /// Validates and constructs an instance. Edges must already be free of
    /// self-loops and duplicates (see [`sanitize_edges`] for repairing raw
    /// input); probabilities must lie in `[0, 1)`.
    pub fn new(
        n: usize,
        num_types: usize,
        mut edges: Vec<(usize, usize)>,
        p: Vec<Vec<f64>>,
    ) -> Result<Self, InstanceError> {
        if num_types == 0 {
            return Err(InstanceError::NoTypes);
        }
        if p.len() != num_types {
            return Err(InstanceError::WrongTypeCount { got: p.len(), expected: num_types });
        }
        for (t, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::WrongUserCount { t, got: row.len(), expected: n });
            }
            for (i, &v) in row.iter().enumerate() {
                if !(0.0..1.0).contains(&v) {
                    return Err(InstanceError::ProbabilityOutOfRange { t, i, value: v });
                }
            }
        }
        let mut seen = BTreeSet::new();
        for &(from, to) in &edges {
            if from >= n || to >= n {
                return Err(InstanceError::EdgeOutOfRange { from, to, n });
            }
            if from == to {
                return Err(InstanceError::SelfLoop(from));
            }
            if !seen.insert((from, to)) {
                return Err(InstanceError::DuplicateEdge(from, to));
            }
        }
        edges.sort_unstable();
        Ok(Instance { n, num_types, edges, p, e: None })
    }

    /// Attaches an affinity matrix used in place of `p` in engagement
    /// objectives. Must have the same shape as `p` with finite nonnegative
    /// entries.
    pub fn with_affinity(mut self, e: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        if e.len() != self.num_types {
            return Err(InstanceError::WrongTypeCount { got: e.len(), expected: self.num_types });
        }
        for (t, row) in e.iter().enumerate() {
            if row.len() != self.n {
                return Err(InstanceError::WrongUserCount { t, got: row.len(), expected: self.n });
            }
            for (i, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(InstanceError::AffinityOutOfRange { t, i, value: v });
                }
            }
        }
        self.e = Some(e);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    /// Ordered `(follower, followee)` pairs, sorted and duplicate-free.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Retweet probabilities, one row per type.
    pub fn p(&self) -> &[Vec<f64>] {
        &self.p
    }

    /// The explicit affinity matrix, if one was attached.
    pub fn affinity(&self) -> Option<&[Vec<f64>]> {
        self.e.as_deref()
    }

    /// Per-type engagement weights: the affinity row when set, else the
    /// retweet probability row.
    pub fn engagement_weights(&self, t: usize) -> &[f64] {
        match &self.e {
            Some(e) => &e[t],
            None => &self.p[t],
        }
    }

    /// Replaces the probability matrix, revalidating the range invariant.
    /// Graph and affinity are untouched.
    pub fn with_probabilities(&self, p: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        let mut copy = Instance::new(self.n, self.num_types, self.edges.clone(), p)?;
        copy.e = self.e.clone();
        Ok(copy)
    }
}

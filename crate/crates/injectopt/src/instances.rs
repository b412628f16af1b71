//! Synthetic instance families and instance file I/O.
//!
//! The JSON layout is `{n, T, edges, p, e?}` with `edges` an array of
//! `[follower, followee]` pairs and `p` given as `T` rows of `n` floats.
//! Probabilities round-trip bit-exactly because both directions use the
//! shortest decimal representation that recovers the same `f64`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::net::{sanitize_edges, InputWarning, Instance, InstanceError};
use crate::PROBABILITY_CAP;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("tightness family needs 0 < beta < 1 and 0 <= alpha <= beta, got alpha = {alpha}, beta = {beta}")]
    TightnessParams { alpha: f64, beta: f64 },
    #[error("tightness family needs at least 2 types")]
    TightnessSingleType,
    #[error("edge probability {0} is outside [0, 1]")]
    EdgeProbability(f64),
    #[error("probability bounds [{min}, {max}] must satisfy 0 <= min <= max <= {PROBABILITY_CAP}")]
    ProbabilityBounds { min: f64, max: f64 },
    #[error("homogeneous probability {0} is outside [0, 1)")]
    HomogeneousValue(f64),
    #[error("empty kind takes either explicit probabilities or sampling bounds plus a seed, not both")]
    EmptyParamsConflict,
    #[error("empty kind without explicit probabilities needs p_min, p_max, and seed")]
    EmptyParamsMissing,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// A reproducible recipe for a synthetic instance.
///
/// Every random family carries an explicit seed; the sampling order is fixed
/// (edges in row-major user order, then probabilities type by type), so a
/// spec pins the generated instance exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Empty graph where type 0 pays `beta` for every user and all other
    /// types share `max(alpha - (beta - alpha) / (T - 1), 0)`. The per-user
    /// mean probability is then `max(beta / T, alpha)`, and on this family
    /// the engagement sacrificed for diversity meets its worst-case bound
    /// exactly.
    Tightness {
        n: usize,
        #[serde(rename = "T")]
        num_types: usize,
        alpha: f64,
        beta: f64,
    },
    /// Directed Erdos-Renyi graph (each ordered pair independently with
    /// probability `edge_prob`) with probabilities i.i.d. uniform on
    /// `[p_min, p_max)`.
    RandomGraph {
        n: usize,
        #[serde(rename = "T")]
        num_types: usize,
        edge_prob: f64,
        p_min: f64,
        p_max: f64,
        seed: u64,
    },
    /// Empty graph with one shared probability for every user and type.
    Homogeneous {
        n: usize,
        #[serde(rename = "T")]
        num_types: usize,
        value: f64,
    },
    /// Empty graph with explicit probabilities, or uniform samples when
    /// bounds and a seed are given instead.
    Empty {
        n: usize,
        #[serde(rename = "T")]
        num_types: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_max: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

/// The probability shared by the non-strong types in the tightness family.
pub fn tightness_gamma(num_types: usize, alpha: f64, beta: f64) -> f64 {
    (alpha - (beta - alpha) / (num_types as f64 - 1.0)).max(0.0)
}

fn check_prob_bounds(min: f64, max: f64) -> Result<(), GeneratorError> {
    if !(min >= 0.0 && min <= max && max <= PROBABILITY_CAP) {
        return Err(GeneratorError::ProbabilityBounds { min, max });
    }
    Ok(())
}

fn sample_probs(
    rng: &mut ChaCha8Rng,
    num_types: usize,
    n: usize,
    min: f64,
    max: f64,
) -> Vec<Vec<f64>> {
    (0..num_types)
        .map(|_| (0..n).map(|_| min + (max - min) * rng.random::<f64>()).collect())
        .collect()
}

/// Builds the instance a spec describes. Identical specs give identical
/// instances.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance, GeneratorError> {
    match spec {
        GeneratorSpec::Tightness { n, num_types, alpha, beta } => {
            if !(*beta > 0.0 && *beta < 1.0 && *alpha >= 0.0 && *alpha <= *beta) {
                return Err(GeneratorError::TightnessParams { alpha: *alpha, beta: *beta });
            }
            if *num_types < 2 {
                return Err(GeneratorError::TightnessSingleType);
            }
            let gamma = tightness_gamma(*num_types, *alpha, *beta);
            let mut p = vec![vec![gamma; *n]; *num_types];
            p[0] = vec![*beta; *n];
            Ok(Instance::new(*n, *num_types, Vec::new(), p)?)
        }
        GeneratorSpec::RandomGraph { n, num_types, edge_prob, p_min, p_max, seed } => {
            if !(*edge_prob >= 0.0 && *edge_prob <= 1.0) {
                return Err(GeneratorError::EdgeProbability(*edge_prob));
            }
            check_prob_bounds(*p_min, *p_max)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut edges = Vec::new();
            for i in 0..*n {
                for j in 0..*n {
                    if i != j && rng.random::<f64>() < *edge_prob {
                        edges.push((i, j));
                    }
                }
            }
            let p = sample_probs(&mut rng, *num_types, *n, *p_min, *p_max);
            Ok(Instance::new(*n, *num_types, edges, p)?)
        }
        GeneratorSpec::Homogeneous { n, num_types, value } => {
            if !(*value >= 0.0 && *value < 1.0) {
                return Err(GeneratorError::HomogeneousValue(*value));
            }
            Ok(Instance::new(*n, *num_types, Vec::new(), vec![vec![*value; *n]; *num_types])?)
        }
        GeneratorSpec::Empty { n, num_types, p, p_min, p_max, seed } => match p {
            Some(p) => {
                if p_min.is_some() || p_max.is_some() || seed.is_some() {
                    return Err(GeneratorError::EmptyParamsConflict);
                }
                Ok(Instance::new(*n, *num_types, Vec::new(), p.clone())?)
            }
            None => {
                let (min, max, seed) = match (p_min, p_max, seed) {
                    (Some(min), Some(max), Some(seed)) => (*min, *max, *seed),
                    _ => return Err(GeneratorError::EmptyParamsMissing),
                };
                check_prob_bounds(min, max)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = sample_probs(&mut rng, *num_types, *n, min, max);
                Ok(Instance::new(*n, *num_types, Vec::new(), p)?)
            }
        },
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    #[serde(rename = "T")]
    num_types: usize,
    edges: Vec<(usize, usize)>,
    p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Error)]
pub enum InstanceIoError {
    #[error("failed to read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

fn to_file(instance: &Instance) -> InstanceFile {
    InstanceFile {
        n: instance.n(),
        num_types: instance.num_types(),
        edges: instance.edges().to_vec(),
        p: instance.p().to_vec(),
        e: instance.affinity().map(|e| e.to_vec()),
    }
}

/// Decodes instance JSON from raw bytes. Self-loops and duplicate edges are
/// dropped with a warning each; anything else malformed is an error.
pub fn parse_instance_json(bytes: &[u8]) -> Result<(Instance, Vec<InputWarning>), InstanceIoError> {
    let file: InstanceFile = serde_json::from_slice(bytes)?;
    let (edges, warnings) = sanitize_edges(file.edges);
    let mut instance = Instance::new(file.n, file.num_types, edges, file.p)?;
    if let Some(e) = file.e {
        instance = instance.with_affinity(e)?;
    }
    Ok((instance, warnings))
}

/// Canonical JSON encoding: fixed field order, edges sorted (the constructor
/// guarantees this), shortest round-trip floats, trailing newline.
pub fn instance_to_json(instance: &Instance) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&to_file(instance))
        .expect("instance serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

/// Hex SHA-256 of the compact canonical encoding. The hash identifies the
/// instance content, not the file bytes, so reformatting a file on disk does
/// not change it.
pub fn instance_hash(instance: &Instance) -> String {
    let bytes = serde_json::to_vec(&to_file(instance)).expect("instance serialization cannot fail");
    hex::encode(Sha256::digest(&bytes))
}

pub fn read_instance(path: &Path) -> Result<(Instance, Vec<InputWarning>), InstanceIoError> {
    let bytes = fs::read(path)
        .map_err(|source| InstanceIoError::Read { path: path.display().to_string(), source })?;
    parse_instance_json(&bytes)
}

pub fn write_instance(instance: &Instance, path: &Path) -> Result<(), InstanceIoError> {
    fs::write(path, instance_to_json(instance))
        .map_err(|source| InstanceIoError::Write { path: path.display().to_string(), source })
}

/// Decodes a generator spec from JSON bytes.
pub fn parse_generator_spec(bytes: &[u8]) -> Result<GeneratorSpec, serde_json::Error> {
    serde_json::from_slice(bytes)
}

pub fn read_generator_spec(path: &Path) -> Result<GeneratorSpec, InstanceIoError> {
    let bytes = fs::read(path)
        .map_err(|source| InstanceIoError::Read { path: path.display().to_string(), source })?;
    Ok(parse_generator_spec(&bytes)?)
}

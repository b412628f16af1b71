//! JSON file formats for injection policies and exposure states.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{InjectionPolicy, NetError, State};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("failed to read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] NetError),
}

/// How a stored policy was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMethod {
    Optimal,
    DeltaUniform,
    DeltaExact,
    Lp,
}

/// On-disk policy: the injection matrix, how it was made, and the content
/// hash of the instance it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub method: PolicyMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub instance_hash: String,
    pub b: Vec<Vec<f64>>,
}

impl PolicyFile {
    pub fn new(
        method: PolicyMethod,
        delta: Option<f64>,
        instance_hash: impl Into<String>,
        policy: &InjectionPolicy,
    ) -> Self {
        PolicyFile { method, delta, instance_hash: instance_hash.into(), b: policy.b().to_vec() }
    }

    /// Revalidates the stored matrix as a policy.
    pub fn to_policy(&self) -> Result<InjectionPolicy, NetError> {
        InjectionPolicy::new(self.b.clone())
    }
}

/// On-disk exposure state with the content hash of its instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub instance_hash: String,
    pub x: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn new(instance_hash: impl Into<String>, state: &State) -> Self {
        StateFile { instance_hash: instance_hash.into(), x: state.x().to_vec() }
    }

    pub fn to_state(&self) -> Result<State, NetError> {
        State::new(self.x.clone())
    }
}

/// Decodes a policy file from JSON bytes and validates its matrix.
pub fn parse_policy_json(bytes: &[u8]) -> Result<(PolicyFile, InjectionPolicy), FileError> {
    let file: PolicyFile = serde_json::from_slice(bytes)?;
    let policy = file.to_policy()?;
    Ok((file, policy))
}

/// Pretty JSON with a trailing newline.
pub fn policy_to_json(file: &PolicyFile) -> Vec<u8> {
    let mut bytes =
        serde_json::to_vec_pretty(file).expect("policy serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

pub fn read_policy(path: &Path) -> Result<(PolicyFile, InjectionPolicy), FileError> {
    let bytes = fs::read(path)
        .map_err(|source| FileError::Read { path: path.display().to_string(), source })?;
    parse_policy_json(&bytes)
}

pub fn write_policy(file: &PolicyFile, path: &Path) -> Result<(), FileError> {
    fs::write(path, policy_to_json(file))
        .map_err(|source| FileError::Write { path: path.display().to_string(), source })
}

/// Decodes a state file from JSON bytes and validates its matrix.
pub fn parse_state_json(bytes: &[u8]) -> Result<(StateFile, State), FileError> {
    let file: StateFile = serde_json::from_slice(bytes)?;
    let state = file.to_state()?;
    Ok((file, state))
}

/// Pretty JSON with a trailing newline.
pub fn state_to_json(file: &StateFile) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(file).expect("state serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

pub fn read_state(path: &Path) -> Result<(StateFile, State), FileError> {
    let bytes = fs::read(path)
        .map_err(|source| FileError::Read { path: path.display().to_string(), source })?;
    parse_state_json(&bytes)
}

pub fn write_state(file: &StateFile, path: &Path) -> Result<(), FileError> {
    fs::write(path, state_to_json(file))
        .map_err(|source| FileError::Write { path: path.display().to_string(), source })
}

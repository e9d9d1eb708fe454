//! Discrete-time replicator and replicator-mutator dynamics.
//!
//! One step maps frequencies `x` to `x'_i = x_i f_i / fbar` where
//! `f = M x` and `fbar = x . f`; with a mutation kernel `Q`, selection is
//! followed by mixing: `x'_i = sum_j Q[j][i] x_j f_j / fbar`. States are
//! renormalized after every step and a run stops when the L1 step size drops
//! below the tolerance.

use crate::choice::PlayerType;
use crate::metagame::MetaGame;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simplex membership slack for states and kernel rows.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("population state invalid: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mean fitness must be positive, got {0}")]
    NonPositiveMeanFitness(f64),
    #[error("mutation rate must lie in [0, 1], got {0}")]
    InvalidMutationRate(f64),
    #[error("mutation kernel requires each of the eight player types exactly once")]
    IncompleteTypeSet,
    #[error("mutation kernel invalid: {0}")]
    InvalidKernel(String),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("max_iter must be at least 1")]
    ZeroMaxIter,
    #[error("record_every must be at least 1")]
    ZeroRecordEvery,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("vertex index {index} out of range for dimension {dim}")]
    VertexOutOfRange { index: usize, dim: usize },
}

/// Point on the simplex: non-negative frequencies summing to 1 within
/// [`SIMPLEX_TOLERANCE`] (renormalized on construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PopulationState {
    x: Vec<f64>,
}

impl PopulationState {
    pub fn new(x: Vec<f64>) -> Result<Self, DynamicsError> {
        if x.is_empty() {
            return Err(DynamicsError::ZeroDimension);
        }
        if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DynamicsError::InvalidState(
                "frequencies must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(DynamicsError::InvalidState(format!(
                "frequencies sum to {sum}, not 1"
            )));
        }
        Ok(Self::renormalized(x))
    }

    /// Divides by the (positive) sum; callers guarantee near-simplex input.
    fn renormalized(mut x: Vec<f64>) -> Self {
        let sum: f64 = x.iter().sum();
        for v in &mut x {
            *v /= sum;
        }
        PopulationState { x }
    }

    pub fn uniform(dim: usize) -> Result<Self, DynamicsError> {
        if dim == 0 {
            return Err(DynamicsError::ZeroDimension);
        }
        Ok(Self::renormalized(vec![1.0 / dim as f64; dim]))
    }

    pub fn vertex(dim: usize, index: usize) -> Result<Self, DynamicsError> {
        if dim == 0 {
            return Err(DynamicsError::ZeroDimension);
        }
        if index >= dim {
            return Err(DynamicsError::VertexOutOfRange { index, dim });
        }
        let mut x = vec![0.0; dim];
        x[index] = 1.0;
        Ok(PopulationState { x })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.x
    }

    pub fn l1_distance(&self, other: &PopulationState) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Row-stochastic mutation matrix; `rows()[j][i]` is the probability that an
/// offspring of type `j` is of type `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationKernel {
    q: Vec<Vec<f64>>,
}

impl MutationKernel {
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self, DynamicsError> {
        let k = q.len();
        if k == 0 {
            return Err(DynamicsError::ZeroDimension);
        }
        for (j, row) in q.iter().enumerate() {
            if row.len() != k {
                return Err(DynamicsError::InvalidKernel(format!(
                    "row {j} has length {}, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(DynamicsError::InvalidKernel(format!(
                    "row {j} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(DynamicsError::InvalidKernel(format!(
                    "row {j} sums to {sum}, not 1"
                )));
            }
        }
        Ok(MutationKernel { q })
    }

    pub fn identity(dim: usize) -> Result<Self, DynamicsError> {
        if dim == 0 {
            return Err(DynamicsError::ZeroDimension);
        }
        let q = (0..dim)
            .map(|j| (0..dim).map(|i| f64::from(u8::from(i == j))).collect())
            .collect();
        Ok(MutationKernel { q })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.q
    }
}

/// Local two-trait mutation at rate `eps` over the eight player types, in the
/// order given: a mutant redraws its preference (one of the 3 others,
/// uniformly), its epistemic type (the other one), or both, independently.
/// Entries: keep `(1-eps)^2`, preference flip `eps(1-eps)/3`, epistemic flip
/// `(1-eps)eps`, both `eps^2/3`.
pub fn mutation_kernel(types: &[PlayerType], eps: f64) -> Result<MutationKernel, DynamicsError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(DynamicsError::InvalidMutationRate(eps));
    }
    if types.len() != PlayerType::COUNT {
        return Err(DynamicsError::IncompleteTypeSet);
    }
    let mut seen = [false; PlayerType::COUNT];
    for ty in types {
        let idx = ty.canonical_index();
        if seen[idx] {
            return Err(DynamicsError::IncompleteTypeSet);
        }
        seen[idx] = true;
    }
    let keep = 1.0 - eps;
    let q = types
        .iter()
        .map(|from| {
            types
                .iter()
                .map(
                    |to| match (from.pref == to.pref, from.epistemic == to.epistemic) {
                        (true, true) => keep * keep,
                        (false, true) => eps * keep / 3.0,
                        (true, false) => keep * eps,
                        (false, false) => eps * eps / 3.0,
                    },
                )
                .collect()
        })
        .collect();
    MutationKernel::new(q)
}

fn step(
    meta: &MetaGame,
    kernel: Option<&MutationKernel>,
    state: &PopulationState,
) -> Result<PopulationState, DynamicsError> {
    let k = meta.len();
    if state.dim() != k {
        return Err(DynamicsError::DimensionMismatch {
            expected: k,
            got: state.dim(),
        });
    }
    if let Some(kernel) = kernel {
        if kernel.dim() != k {
            return Err(DynamicsError::DimensionMismatch {
                expected: k,
                got: kernel.dim(),
            });
        }
    }
    let x = state.frequencies();
    let fitness: Vec<f64> = meta
        .fitness()
        .iter()
        .map(|row| row.iter().zip(x).map(|(m, xi)| m * xi).sum())
        .collect();
    let mean: f64 = fitness.iter().zip(x).map(|(f, xi)| f * xi).sum();
    if mean.is_nan() || mean <= 0.0 {
        return Err(DynamicsError::NonPositiveMeanFitness(mean));
    }
    let selected: Vec<f64> = fitness.iter().zip(x).map(|(f, xi)| xi * f / mean).collect();
    let next = match kernel {
        None => selected,
        Some(kernel) => (0..k)
            .map(|i| {
                kernel
                    .rows()
                    .iter()
                    .zip(&selected)
                    .map(|(row, s)| row[i] * s)
                    .sum()
            })
            .collect(),
    };
    Ok(PopulationState::renormalized(next))
}

/// One selection step.
pub fn replicator_step(
    meta: &MetaGame,
    state: &PopulationState,
) -> Result<PopulationState, DynamicsError> {
    step(meta, None, state)
}

/// One selection-then-mutation step.
pub fn replicator_mutator_step(
    meta: &MetaGame,
    kernel: &MutationKernel,
    state: &PopulationState,
) -> Result<PopulationState, DynamicsError> {
    step(meta, Some(kernel), state)
}

/// Recorded run of the dynamics: iteration 0, every `record_every`-th
/// iteration, and the final iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    records: Vec<PopulationState>,
    record_iterations: Vec<u64>,
    iterations: u64,
    converged: bool,
}

impl Trajectory {
    pub fn records(&self) -> &[PopulationState] {
        &self.records
    }

    pub fn record_iterations(&self) -> &[u64] {
        &self.record_iterations
    }

    /// Number of steps actually taken.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn final_state(&self) -> &PopulationState {
        self.records.last().expect("trajectory always records x0")
    }

    /// One row per recorded state: iteration index, then one 6-decimal
    /// frequency column per label.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("iteration");
        for label in labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (iteration, state) in self.record_iterations.iter().zip(&self.records) {
            out.push_str(&iteration.to_string());
            for v in state.frequencies() {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Iterates until the L1 step size drops below `tol` or `max_iter` steps are
/// taken. Pass a kernel for replicator-mutator dynamics, `None` for plain
/// selection.
pub fn run_dynamics(
    meta: &MetaGame,
    kernel: Option<&MutationKernel>,
    x0: &PopulationState,
    tol: f64,
    max_iter: u64,
    record_every: u64,
) -> Result<Trajectory, DynamicsError> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(DynamicsError::InvalidTolerance(tol));
    }
    if max_iter == 0 {
        return Err(DynamicsError::ZeroMaxIter);
    }
    if record_every == 0 {
        return Err(DynamicsError::ZeroRecordEvery);
    }
    let mut records = vec![x0.clone()];
    let mut record_iterations = vec![0u64];
    let mut current = x0.clone();
    let mut converged = false;
    let mut iterations = 0;
    for iteration in 1..=max_iter {
        let next = step(meta, kernel, &current)?;
        let moved = next.l1_distance(&current);
        current = next;
        iterations = iteration;
        if iteration % record_every == 0 {
            records.push(current.clone());
            record_iterations.push(iteration);
        }
        if moved < tol {
            converged = true;
            break;
        }
    }
    if *record_iterations.last().unwrap() != iterations {
        records.push(current);
        record_iterations.push(iterations);
    }
    Ok(Trajectory {
        records,
        record_iterations,
        iterations,
        converged,
    })
}

/// `count` independent draws from the uniform distribution on the
/// `dim`-simplex: normalized vectors of inverse-CDF exponentials, one state's
/// coordinates drawn consecutively.
pub fn sample_initial_states<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    dim: usize,
) -> Result<Vec<PopulationState>, DynamicsError> {
    if dim == 0 {
        return Err(DynamicsError::ZeroDimension);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = vec![0.0; dim];
        loop {
            let mut sum = 0.0;
            for v in &mut x {
                *v = -(1.0 - rng.random::<f64>()).ln();
                sum += *v;
            }
            if sum > 0.0 {
                break;
            }
        }
        out.push(PopulationState::renormalized(x));
    }
    Ok(out)
}

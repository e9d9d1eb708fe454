//! ESS and neutral-stability checks on square fitness matrices.
//!
//! Type `i` is an ESS iff every other type `j` either earns strictly less
//! against `i` (first condition) or ties against `i` but earns strictly less
//! against itself than `i` does against `j` (second condition). Neutral
//! stability weakens the second condition to non-strict. Comparisons use a
//! tie tolerance `eta`: differences within `eta` count as ties, so exact
//! matrices can use a tiny default while Monte Carlo callers pass their own.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ties below this width are indistinguishable for exact rational matrices;
/// adjacent distinct entries of an exact meta-game differ by far more.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum StabilityError {
    #[error("matrix must be square; row {row} has length {len}, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("type index {index} out of range for a {size}-type matrix")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("matrix entries must be finite")]
    NonFiniteEntry,
    #[error("tie tolerance must be finite and non-negative, got {0}")]
    InvalidTolerance(f64),
}

/// Which ESS condition an invader breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolatedCondition {
    /// The invader earns at least as much against the resident, beyond a tie.
    Strict,
    /// The invader ties against the resident and is not strictly worse
    /// against itself.
    NeutralWithStrictSecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub invader: usize,
    pub condition: ViolatedCondition,
}

/// Full stability verdict for one resident type. `violating_invaders` is
/// empty exactly when `is_ess` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub index: usize,
    pub is_ess: bool,
    pub is_neutrally_stable: bool,
    pub violating_invaders: Vec<Violation>,
}

fn validate(m: &[Vec<f64>], eta: f64) -> Result<(), StabilityError> {
    let k = m.len();
    for (row, r) in m.iter().enumerate() {
        if r.len() != k {
            return Err(StabilityError::NotSquare {
                row,
                len: r.len(),
                expected: k,
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(StabilityError::NonFiniteEntry);
        }
    }
    if !eta.is_finite() || eta < 0.0 {
        return Err(StabilityError::InvalidTolerance(eta));
    }
    Ok(())
}

/// Stability verdict of resident `index` under tie tolerance `eta`.
pub fn stability_report(
    m: &[Vec<f64>],
    index: usize,
    eta: f64,
) -> Result<StabilityReport, StabilityError> {
    validate(m, eta)?;
    let k = m.len();
    if index >= k {
        return Err(StabilityError::IndexOutOfRange { index, size: k });
    }
    let mut violations = Vec::new();
    let mut neutrally_stable = true;
    for j in 0..k {
        if j == index {
            continue;
        }
        let against_resident = m[index][index] - m[j][index];
        if against_resident > eta {
            continue;
        }
        if against_resident < -eta {
            // The invader strictly beats the resident in the resident
            // population; even neutral stability fails.
            violations.push(Violation {
                invader: j,
                condition: ViolatedCondition::Strict,
            });
            neutrally_stable = false;
            continue;
        }
        let against_invader = m[index][j] - m[j][j];
        if against_invader > eta {
            continue;
        }
        violations.push(Violation {
            invader: j,
            condition: ViolatedCondition::NeutralWithStrictSecond,
        });
        if against_invader < -eta {
            neutrally_stable = false;
        }
    }
    Ok(StabilityReport {
        index,
        is_ess: violations.is_empty(),
        is_neutrally_stable: neutrally_stable,
        violating_invaders: violations,
    })
}

pub fn is_ess_with_tolerance(
    m: &[Vec<f64>],
    index: usize,
    eta: f64,
) -> Result<bool, StabilityError> {
    Ok(stability_report(m, index, eta)?.is_ess)
}

pub fn is_ess(m: &[Vec<f64>], index: usize) -> Result<bool, StabilityError> {
    is_ess_with_tolerance(m, index, DEFAULT_TIE_TOLERANCE)
}

/// Indices of all ESS types, ascending.
pub fn ess_set_with_tolerance(m: &[Vec<f64>], eta: f64) -> Result<Vec<usize>, StabilityError> {
    validate(m, eta)?;
    (0..m.len())
        .filter_map(|i| match stability_report(m, i, eta) {
            Ok(report) => report.is_ess.then_some(Ok(i)),
            Err(e) => Some(Err(e)),
        })
        .collect()
}

pub fn ess_set(m: &[Vec<f64>]) -> Result<Vec<usize>, StabilityError> {
    ess_set_with_tolerance(m, DEFAULT_TIE_TOLERANCE)
}

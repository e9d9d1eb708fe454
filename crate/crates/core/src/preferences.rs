//! Subjective preference transforms.
//!
//! A transform rewrites the raw payoff matrix into the utility matrix a
//! player actually maximizes. With `own[i][j] = p[i][j]` and
//! `co[i][j] = p[j][i]`:
//!
//! * `pi`  (actual):      `u = own`
//! * `alt` (altruistic):  `u = own + co`
//! * `com` (competitive): `u = own - co`
//! * `reg` (regret):      `u[i][j] = own[i][j] - max_k own[k][j]`
//!
//! Regret utilities are never positive and every column contains a zero;
//! altruistic matrices are symmetric and competitive ones antisymmetric.

use crate::games::Game;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Canonical order (and indices): pi, alt, com, reg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreferenceType {
    #[serde(rename = "pi")]
    Actual,
    #[serde(rename = "alt")]
    Altruistic,
    #[serde(rename = "com")]
    Competitive,
    #[serde(rename = "reg")]
    Regret,
}

impl PreferenceType {
    pub const ALL: [PreferenceType; 4] = [
        PreferenceType::Actual,
        PreferenceType::Altruistic,
        PreferenceType::Competitive,
        PreferenceType::Regret,
    ];

    pub fn index(self) -> usize {
        match self {
            PreferenceType::Actual => 0,
            PreferenceType::Altruistic => 1,
            PreferenceType::Competitive => 2,
            PreferenceType::Regret => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            PreferenceType::Actual => "pi",
            PreferenceType::Altruistic => "alt",
            PreferenceType::Competitive => "com",
            PreferenceType::Regret => "reg",
        }
    }
}

impl fmt::Display for PreferenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PreferenceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PreferenceType::ALL
            .into_iter()
            .find(|p| p.tag() == s)
            .ok_or_else(|| format!("unknown preference tag {s:?} (expected pi, alt, com, or reg)"))
    }
}

/// A preference transform applied to one game, kept together with its tag so
/// serialized matrices are self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectiveMatrix {
    pub pref: PreferenceType,
    pub u: [[f64; 2]; 2],
}

/// Applies `pref` to the row player's payoffs of `game`.
pub fn transform(game: &Game, pref: PreferenceType) -> SubjectiveMatrix {
    let p = &game.payoffs;
    let u = match pref {
        PreferenceType::Actual => *p,
        PreferenceType::Altruistic => [
            [p[0][0] + p[0][0], p[0][1] + p[1][0]],
            [p[1][0] + p[0][1], p[1][1] + p[1][1]],
        ],
        PreferenceType::Competitive => [[0.0, p[0][1] - p[1][0]], [p[1][0] - p[0][1], 0.0]],
        PreferenceType::Regret => {
            let col_max = [p[0][0].max(p[1][0]), p[0][1].max(p[1][1])];
            [
                [p[0][0] - col_max[0], p[0][1] - col_max[1]],
                [p[1][0] - col_max[0], p[1][1] - col_max[1]],
            ]
        }
    };
    SubjectiveMatrix { pref, u }
}

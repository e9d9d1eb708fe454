//! Epistemic types, player types, and choice rules.
//!
//! An epistemic type fixes how a player values an action when the co-action
//! is unknown: `FullSimplex` guards against every co-action (row minimum,
//! maximin), `FlatBelief` averages over them (row mean). Choices are the
//! argmax set of those values; exact value ties keep both actions. All
//! compared values are integers or half-integers when payoffs are integers,
//! so ties are detected with exact `f64` comparison.

use crate::games::Game;
use crate::preferences::{transform, PreferenceType, SubjectiveMatrix};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Canonical order (and indices): simplex, flat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpistemicType {
    #[serde(rename = "simplex")]
    FullSimplex,
    #[serde(rename = "flat")]
    FlatBelief,
}

impl EpistemicType {
    pub const ALL: [EpistemicType; 2] = [EpistemicType::FullSimplex, EpistemicType::FlatBelief];

    pub fn index(self) -> usize {
        match self {
            EpistemicType::FullSimplex => 0,
            EpistemicType::FlatBelief => 1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            EpistemicType::FullSimplex => "simplex",
            EpistemicType::FlatBelief => "flat",
        }
    }
}

impl fmt::Display for EpistemicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EpistemicType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EpistemicType::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| format!("unknown epistemic tag {s:?} (expected simplex or flat)"))
    }
}

/// A preference transform paired with an epistemic type, labeled
/// `"<pref>-<epistemic>"` (e.g. `"reg-simplex"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlayerType {
    pub pref: PreferenceType,
    pub epistemic: EpistemicType,
}

impl PlayerType {
    pub const COUNT: usize = 8;

    pub fn new(pref: PreferenceType, epistemic: EpistemicType) -> Self {
        PlayerType { pref, epistemic }
    }

    /// All eight types: the simplex block first, preferences in pi, alt,
    /// com, reg order within each block.
    pub fn all() -> [PlayerType; 8] {
        let mut out = [PlayerType::new(PreferenceType::Actual, EpistemicType::FullSimplex); 8];
        for epi in EpistemicType::ALL {
            for pref in PreferenceType::ALL {
                out[4 * epi.index() + pref.index()] = PlayerType::new(pref, epi);
            }
        }
        out
    }

    pub fn canonical_index(self) -> usize {
        4 * self.epistemic.index() + self.pref.index()
    }

    pub fn label(self) -> String {
        format!("{}-{}", self.pref, self.epistemic)
    }
}

impl fmt::Display for PlayerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.pref, self.epistemic)
    }
}

impl FromStr for PlayerType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (pref, epistemic) = s
            .split_once('-')
            .ok_or_else(|| format!("player type {s:?} is not of the form <pref>-<epistemic>"))?;
        Ok(PlayerType::new(pref.parse()?, epistemic.parse()?))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ChoiceError {
    #[error("belief must be a probability in [0, 1], got {0}")]
    InvalidBelief(f64),
}

/// Probability the co-player picks action 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    p: f64,
}

impl Belief {
    pub fn new(p: f64) -> Result<Self, ChoiceError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChoiceError::InvalidBelief(p));
        }
        Ok(Belief { p })
    }

    pub fn p(self) -> f64 {
        self.p
    }
}

/// Non-empty subset of the two actions; ties keep both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChoiceSet {
    bits: u8,
}

impl ChoiceSet {
    pub fn single(action: usize) -> Self {
        assert!(action < 2);
        ChoiceSet { bits: 1 << action }
    }

    pub fn both() -> Self {
        ChoiceSet { bits: 0b11 }
    }

    /// Argmax set of two values; exact comparison, equal values tie.
    pub fn from_values(v0: f64, v1: f64) -> Self {
        if v0 > v1 {
            ChoiceSet::single(0)
        } else if v1 > v0 {
            ChoiceSet::single(1)
        } else {
            ChoiceSet::both()
        }
    }

    pub fn contains(self, action: usize) -> bool {
        action < 2 && self.bits & (1 << action) != 0
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false // structurally non-empty: every constructor sets at least one bit
    }

    pub fn actions(self) -> impl Iterator<Item = usize> {
        (0..2).filter(move |&a| self.contains(a))
    }
}

/// Value of each action under `epi`: row minimum for `FullSimplex`, row mean
/// for `FlatBelief`.
pub fn action_values(subjective: &SubjectiveMatrix, epi: EpistemicType) -> [f64; 2] {
    let u = &subjective.u;
    let value = |row: [f64; 2]| match epi {
        EpistemicType::FullSimplex => row[0].min(row[1]),
        EpistemicType::FlatBelief => (row[0] + row[1]) / 2.0,
    };
    [value(u[0]), value(u[1])]
}

/// The actions `ty` plays in `game`: the argmax set of its action values.
pub fn choose(game: &Game, ty: PlayerType) -> ChoiceSet {
    let subjective = transform(game, ty.pref);
    let [v0, v1] = action_values(&subjective, ty.epistemic);
    ChoiceSet::from_values(v0, v1)
}

/// Best responses under a point belief: the argmax set of
/// `b.p * u[i][0] + (1 - b.p) * u[i][1]`.
///
/// Computed through the action-difference `b.p * (u[0][0] - u[1][0]) +
/// (1 - b.p) * (u[0][1] - u[1][1])`, whose sign decides the set. Transforms
/// that differ by a per-column shift produce bitwise-identical differences,
/// so their choice sets agree exactly even in floating point.
pub fn choose_with_belief(game: &Game, pref: PreferenceType, belief: Belief) -> ChoiceSet {
    let u = transform(game, pref).u;
    let d0 = u[0][0] - u[1][0];
    let d1 = u[0][1] - u[1][1];
    let diff = belief.p() * d0 + (1.0 - belief.p()) * d1;
    if diff > 0.0 {
        ChoiceSet::single(0)
    } else if diff < 0.0 {
        ChoiceSet::single(1)
    } else {
        ChoiceSet::both()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::enumerate_games;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PD: [[f64; 2]; 2] = [[3.0, 0.0], [5.0, 1.0]];

    fn argmax_set(values: [f64; 2]) -> ChoiceSet {
        ChoiceSet::from_values(values[0], values[1])
    }

    #[test]
    fn action_value_examples() {
        let m = SubjectiveMatrix {
            pref: PreferenceType::Actual,
            u: PD,
        };
        assert_eq!(action_values(&m, EpistemicType::FullSimplex), [0.0, 1.0]);
        assert_eq!(action_values(&m, EpistemicType::FlatBelief), [1.5, 3.0]);
    }

    #[test]
    fn maximin_actual_defects_in_dilemma() {
        let set = choose(
            &Game::new(PD),
            PlayerType::new(PreferenceType::Actual, EpistemicType::FullSimplex),
        );
        assert_eq!(set, ChoiceSet::single(1));
    }

    #[test]
    fn point_belief_on_action_zero_picks_best_reply() {
        let set = choose_with_belief(
            &Game::new(PD),
            PreferenceType::Actual,
            Belief::new(1.0).unwrap(),
        );
        assert_eq!(set, ChoiceSet::single(1));
    }

    #[test]
    fn constant_games_tie_for_every_type() {
        let g = Game::new([[1.0, 1.0], [1.0, 1.0]]);
        for ty in PlayerType::all() {
            assert_eq!(choose(&g, ty), ChoiceSet::both());
        }
    }

    #[test]
    fn canonical_indices_and_labels() {
        let all = PlayerType::all();
        let labels: Vec<String> = all.iter().map(|t| t.label()).collect();
        assert_eq!(
            labels,
            [
                "pi-simplex",
                "alt-simplex",
                "com-simplex",
                "reg-simplex",
                "pi-flat",
                "alt-flat",
                "com-flat",
                "reg-flat"
            ]
        );
        for (i, ty) in all.iter().enumerate() {
            assert_eq!(ty.canonical_index(), i);
            assert_eq!(ty.label().parse::<PlayerType>().unwrap(), *ty);
        }
        assert!("reg".parse::<PlayerType>().is_err());
        assert!("reg-omniscient".parse::<PlayerType>().is_err());
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(0.0).is_ok());
        assert!(Belief::new(1.0).is_ok());
        assert_eq!(
            Belief::new(-0.1).unwrap_err(),
            ChoiceError::InvalidBelief(-0.1)
        );
        assert!(Belief::new(1.1).is_err());
        assert!(Belief::new(f64::NAN).is_err());
    }

    #[test]
    fn regret_and_actual_flat_choices_agree_exhaustively_at_n3() {
        for g in enumerate_games(3).unwrap() {
            let reg = choose(
                &g,
                PlayerType::new(PreferenceType::Regret, EpistemicType::FlatBelief),
            );
            let pi = choose(
                &g,
                PlayerType::new(PreferenceType::Actual, EpistemicType::FlatBelief),
            );
            assert_eq!(reg, pi, "flat choices must agree on {:?}", g.payoffs);
        }
    }

    #[test]
    fn regret_and_actual_agree_under_every_point_belief() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        for g in enumerate_games(3).unwrap() {
            for &b in &grid {
                let belief = Belief::new(b).unwrap();
                assert_eq!(
                    choose_with_belief(&g, PreferenceType::Regret, belief),
                    choose_with_belief(&g, PreferenceType::Actual, belief),
                    "belief {b} on {:?}",
                    g.payoffs
                );
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let g = crate::games::sample_game(&mut rng, 6);
            let belief = Belief::new(rng.random::<f64>()).unwrap();
            assert_eq!(
                choose_with_belief(&g, PreferenceType::Regret, belief),
                choose_with_belief(&g, PreferenceType::Actual, belief)
            );
        }
    }

    proptest! {
        // Integer coefficients keep every intermediate value an exact small
        // integer, so even knife-edge ties survive the rescaling.
        #[test]
        fn integer_affine_rescaling_preserves_choices_and_ties(
            p in proptest::array::uniform4(0u32..=20u32),
            a in 1u32..=100,
            b in -100i32..=100,
            pref_idx in 0usize..4,
            epi_idx in 0usize..2,
        ) {
            let pref = PreferenceType::ALL[pref_idx];
            let epi = EpistemicType::ALL[epi_idx];
            let g = Game::new([[p[0] as f64, p[1] as f64], [p[2] as f64, p[3] as f64]]);
            let base = transform(&g, pref);
            let mut scaled = base;
            for i in 0..2 {
                for j in 0..2 {
                    scaled.u[i][j] = f64::from(a) * base.u[i][j] + f64::from(b);
                }
            }
            prop_assert_eq!(
                argmax_set(action_values(&base, epi)),
                argmax_set(action_values(&scaled, epi))
            );
        }

        // Fractional coefficients only guarantee preservation away from
        // ties: a margin of 1e-6 scales to at least 1e-7, many orders above
        // the rounding error at these magnitudes (below ~1e4).
        #[test]
        fn fractional_affine_rescaling_preserves_strict_choices(
            p in proptest::array::uniform4(0u32..=20u32),
            a in 0.1f64..100.0,
            b in -100.0f64..100.0,
            pref_idx in 0usize..4,
            epi_idx in 0usize..2,
        ) {
            let pref = PreferenceType::ALL[pref_idx];
            let epi = EpistemicType::ALL[epi_idx];
            let g = Game::new([[p[0] as f64, p[1] as f64], [p[2] as f64, p[3] as f64]]);
            let base = transform(&g, pref);
            let values = action_values(&base, epi);
            prop_assume!((values[0] - values[1]).abs() >= 1e-6);
            let mut scaled = base;
            for i in 0..2 {
                for j in 0..2 {
                    scaled.u[i][j] = a * base.u[i][j] + b;
                }
            }
            prop_assert_eq!(
                argmax_set(values),
                argmax_set(action_values(&scaled, epi))
            );
        }

        #[test]
        fn choice_sets_are_never_empty(
            p in proptest::array::uniform4(0u32..=20u32),
            ty_idx in 0usize..8,
        ) {
            let g = Game::new([[p[0] as f64, p[1] as f64], [p[2] as f64, p[3] as f64]]);
            let set = choose(&g, PlayerType::all()[ty_idx]);
            prop_assert!(!set.is_empty() && set.len() <= 2);
        }
    }
}

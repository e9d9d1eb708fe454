//! Meta-game construction: average fitness of ordered type pairs over the
//! game class.
//!
//! The fitness of row type `r` against column type `c` in one game is the
//! mean raw row payoff over the product of their choice sets (uniform tie
//! weighting). Averaging over all `(N+1)^4` games (exact) or a seeded sample
//! (Monte Carlo) gives the meta-game matrix.
//!
//! Per-game fitnesses are dyadic rationals `k/4` with small numerators, so
//! the accumulated totals are exact in `f64` and a result is identical for
//! any worker count; Monte Carlo results are pinned by (seed, worker count).
//! All pairs are evaluated on the same games (common random numbers).

use crate::choice::{choose, ChoiceSet, PlayerType};
use crate::games::{
    enumeration_len, game_at_index, sample_game, worker_seed, Game, GameClassConfig, GamesError,
};
use crate::stability::{self, StabilityError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetagameError {
    #[error(transparent)]
    Games(#[from] GamesError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("type list must not be empty")]
    EmptyTypes,
    #[error("player type {0} appears more than once")]
    DuplicateType(String),
    #[error("worker count must be at least 1")]
    InvalidWorkerCount,
    #[error("sample count must be at least 1")]
    InvalidSampleCount,
    #[error("matrix has no row labeled {0:?}")]
    MissingLabel(String),
    #[error("mixing weight must be a probability in [0, 1], got {0}")]
    InvalidMixing(f64),
    #[error("grid step must lie in (0, 1], got {0}")]
    InvalidGridStep(f64),
    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),
    #[error("failed to parse matrix JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("failed to parse matrix CSV: {0}")]
    Csv(String),
}

/// Square fitness matrix over labeled types. `fitness[r][c]` is the average
/// payoff of row type `r` matched against column type `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaGame {
    labels: Vec<String>,
    fitness: Vec<Vec<f64>>,
}

impl MetaGame {
    /// Validates shape (square, labels matching), label uniqueness, and entry
    /// finiteness. Labels may not contain commas or line breaks (CSV safety).
    pub fn new(labels: Vec<String>, fitness: Vec<Vec<f64>>) -> Result<Self, MetagameError> {
        let k = labels.len();
        if k == 0 {
            return Err(MetagameError::MalformedMatrix("no labels".into()));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.contains(',') || label.contains('\n') {
                return Err(MetagameError::MalformedMatrix(format!(
                    "label {label:?} is empty or contains a separator"
                )));
            }
            if labels[..i].contains(label) {
                return Err(MetagameError::MalformedMatrix(format!(
                    "duplicate label {label:?}"
                )));
            }
        }
        if fitness.len() != k || fitness.iter().any(|row| row.len() != k) {
            return Err(MetagameError::MalformedMatrix(format!(
                "fitness must be {k}x{k} to match the labels"
            )));
        }
        if fitness.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MetagameError::MalformedMatrix(
                "fitness entries must be finite".into(),
            ));
        }
        Ok(MetaGame { labels, fitness })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty label lists
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn fitness(&self) -> &[Vec<f64>] {
        &self.fitness
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.fitness[row][col]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Full-precision JSON: `{"labels": [...], "fitness": [[...]]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, MetagameError> {
        let raw: MetaGame = serde_json::from_str(text)?;
        MetaGame::new(raw.labels, raw.fitness)
    }

    /// CSV with a label header row and row labels, entries at 6 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.fitness) {
            out.push_str(label);
            for v in row {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, MetagameError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| MetagameError::Csv("empty input".into()))?;
        let mut fields = header.split(',');
        if fields.next() != Some("") {
            return Err(MetagameError::Csv(
                "header must start with an empty corner cell".into(),
            ));
        }
        let labels: Vec<String> = fields.map(str::to_owned).collect();
        let k = labels.len();
        let mut fitness = Vec::with_capacity(k);
        for (r, line) in lines.enumerate() {
            let mut fields = line.split(',');
            let row_label = fields.next().unwrap_or_default();
            if r >= k || row_label != labels[r] {
                return Err(MetagameError::Csv(format!(
                    "row label {row_label:?} does not match header order"
                )));
            }
            let row: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| MetagameError::Csv(format!("bad entry {f:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            fitness.push(row);
        }
        MetaGame::new(labels, fitness)
    }
}

/// Mean row payoff over the product of the two players' choice sets.
fn pair_mean(game: &Game, row_set: ChoiceSet, col_set: ChoiceSet) -> f64 {
    let mut sum = 0.0;
    let mut pairs = 0.0;
    for a in row_set.actions() {
        for b in col_set.actions() {
            sum += game.payoff(a, b);
            pairs += 1.0;
        }
    }
    sum / pairs
}

/// Average payoff of `row` against `col` in a single game.
pub fn match_fitness(game: &Game, row: PlayerType, col: PlayerType) -> f64 {
    pair_mean(game, choose(game, row), choose(game, col))
}

fn validate_types(types: &[PlayerType]) -> Result<(), MetagameError> {
    if types.is_empty() {
        return Err(MetagameError::EmptyTypes);
    }
    for (i, ty) in types.iter().enumerate() {
        if types[..i].contains(ty) {
            return Err(MetagameError::DuplicateType(ty.label()));
        }
    }
    Ok(())
}

/// Adds one game's pairwise fitnesses to `acc`; choice sets are computed once
/// per type and reused across the `k^2` ordered pairs.
fn add_game(types: &[PlayerType], game: &Game, sets: &mut [ChoiceSet], acc: &mut [Vec<f64>]) {
    for (slot, ty) in sets.iter_mut().zip(types) {
        *slot = choose(game, *ty);
    }
    for (r, row) in acc.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell += pair_mean(game, sets[r], sets[c]);
        }
    }
}

fn zero_matrix(k: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; k]; k]
}

/// Adds `b` into `a` entrywise; used to reduce worker partials in
/// worker-index order.
fn add_into(a: &mut [Vec<f64>], b: &[Vec<f64>]) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (va, vb) in ra.iter_mut().zip(rb) {
            *va += vb;
        }
    }
}

fn finalize(
    types: &[PlayerType],
    mut totals: Vec<Vec<f64>>,
    games: f64,
) -> Result<MetaGame, MetagameError> {
    for row in &mut totals {
        for v in row.iter_mut() {
            *v /= games;
        }
    }
    MetaGame::new(types.iter().map(|t| t.label()).collect(), totals)
}

/// Exact meta-game: the average over the full lexicographic enumeration of
/// payoff matrices with entries in `0..=max_payoff`.
pub fn build_metagame_exact(
    types: &[PlayerType],
    max_payoff: u32,
    workers: usize,
) -> Result<MetaGame, MetagameError> {
    validate_types(types)?;
    if workers == 0 {
        return Err(MetagameError::InvalidWorkerCount);
    }
    let len = enumeration_len(max_payoff)?;
    let k = types.len();
    let chunk = |w: usize| (w as u128 * len as u128 / workers as u128) as u64;
    let partials: Vec<Vec<Vec<f64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (start, end) = (chunk(w), chunk(w + 1));
                scope.spawn(move || {
                    let mut acc = zero_matrix(k);
                    let mut sets = vec![ChoiceSet::both(); k];
                    for index in start..end {
                        let game = game_at_index(max_payoff, index);
                        add_game(types, &game, &mut sets, &mut acc);
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut totals = zero_matrix(k);
    for partial in &partials {
        add_into(&mut totals, partial);
    }
    finalize(types, totals, len as f64)
}

/// Monte Carlo meta-game: the average over `config.sample_count` iid games.
/// Worker `w` draws its share from a ChaCha stream seeded
/// `config.seed ^ w`; leftover samples go to the lowest worker indices.
pub fn build_metagame_mc(
    types: &[PlayerType],
    config: &GameClassConfig,
    workers: usize,
) -> Result<MetaGame, MetagameError> {
    validate_types(types)?;
    if workers == 0 {
        return Err(MetagameError::InvalidWorkerCount);
    }
    if config.sample_count == 0 {
        return Err(MetagameError::InvalidSampleCount);
    }
    let k = types.len();
    let base = config.sample_count / workers as u64;
    let extra = config.sample_count % workers as u64;
    let partials: Vec<Vec<Vec<f64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let count = base + u64::from((w as u64) < extra);
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(config.seed, w as u64));
                    let mut acc = zero_matrix(k);
                    let mut sets = vec![ChoiceSet::both(); k];
                    for _ in 0..count {
                        let game = sample_game(&mut rng, config.max_payoff);
                        add_game(types, &game, &mut sets, &mut acc);
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut totals = zero_matrix(k);
    for partial in &partials {
        add_into(&mut totals, partial);
    }
    finalize(types, totals, config.sample_count as f64)
}

const PREF_TAGS: [&str; 4] = ["pi", "alt", "com", "reg"];
const EPI_TAGS: [&str; 2] = ["simplex", "flat"];

/// Indices of the eight canonical labels in `full`: `[epistemic][pref]`.
fn epistemic_indices(full: &MetaGame) -> Result<[[usize; 4]; 2], MetagameError> {
    let mut out = [[0usize; 4]; 2];
    for (e, epi) in EPI_TAGS.iter().enumerate() {
        for (p, pref) in PREF_TAGS.iter().enumerate() {
            let label = format!("{pref}-{epi}");
            out[e][p] = full
                .index_of(&label)
                .ok_or(MetagameError::MissingLabel(label))?;
        }
    }
    Ok(out)
}

fn check_probability(value: f64) -> Result<(), MetagameError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(MetagameError::InvalidMixing(value));
    }
    Ok(())
}

/// Four-preference matrix when both players of a match share one epistemic
/// draw: simplex with probability `q`, flat otherwise. At `q = 1` this is the
/// simplex block of `full`, at `q = 0` the flat block.
pub fn correlated_pref_metagame(full: &MetaGame, q: f64) -> Result<MetaGame, MetagameError> {
    check_probability(q)?;
    let idx = epistemic_indices(full)?;
    let fitness = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    q * full.entry(idx[0][a], idx[0][b])
                        + (1.0 - q) * full.entry(idx[1][a], idx[1][b])
                })
                .collect()
        })
        .collect();
    MetaGame::new(PREF_TAGS.iter().map(|s| s.to_string()).collect(), fitness)
}

/// Four-preference matrix when the two players draw epistemic types
/// independently, simplex with probability `p` each. Terms are accumulated in
/// the fixed order (simplex, simplex), (simplex, flat), (flat, simplex),
/// (flat, flat).
pub fn uncorrelated_pref_metagame(full: &MetaGame, p: f64) -> Result<MetaGame, MetagameError> {
    check_probability(p)?;
    let idx = epistemic_indices(full)?;
    let weight = [p, 1.0 - p];
    let fitness = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    let mut value = 0.0;
                    for e in 0..2 {
                        for f in 0..2 {
                            value += weight[e] * weight[f] * full.entry(idx[e][a], idx[f][b]);
                        }
                    }
                    value
                })
                .collect()
        })
        .collect();
    MetaGame::new(PREF_TAGS.iter().map(|s| s.to_string()).collect(), fitness)
}

/// Smallest grid point `p` in `{0, grid_step, ..., 1}` such that regret is
/// the unique ESS of the uncorrelated preference matrix for every grid point
/// at or above `p`. Returns `1 + grid_step` when no such point exists.
pub fn find_regret_threshold(full: &MetaGame, grid_step: f64) -> Result<f64, MetagameError> {
    if !grid_step.is_finite() || grid_step <= 0.0 || grid_step > 1.0 {
        return Err(MetagameError::InvalidGridStep(grid_step));
    }
    let steps = (1.0 / grid_step).ceil() as usize;
    let mut threshold = 1.0 + grid_step;
    // Scan from the top of the grid; the threshold is the lowest point of the
    // maximal all-flagged suffix.
    for k in (0..=steps).rev() {
        let p = (k as f64 * grid_step).min(1.0);
        let derived = uncorrelated_pref_metagame(full, p)?;
        let reg = derived
            .index_of("reg")
            .expect("derived matrix always carries preference tags");
        if stability::ess_set(derived.fitness())? == [reg] {
            threshold = p;
        } else {
            break;
        }
    }
    Ok(threshold)
}

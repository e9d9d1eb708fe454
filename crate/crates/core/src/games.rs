//! The game class: symmetric 2x2 games with integer payoffs in `0..=N`.
//!
//! A game is identified with the row player's payoff matrix; the column
//! player's payoffs are its transpose. The class supports exhaustive
//! enumeration in lexicographic order of `(p00, p01, p10, p11)` and iid
//! uniform sampling, both deterministic given their inputs.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row player's payoffs of one 2x2 game. Entry `[i][j]` is the payoff for
/// playing `i` against co-action `j`; values are integers stored as `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Game {
    pub payoffs: [[f64; 2]; 2],
}

impl Game {
    pub fn new(payoffs: [[f64; 2]; 2]) -> Self {
        Game { payoffs }
    }

    pub fn payoff(&self, action: usize, co_action: usize) -> f64 {
        self.payoffs[action][co_action]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GamesError {
    #[error("(N + 1)^4 games at N = {0} exceeds the u64 counting range")]
    EnumerationOverflow(u32),
}

/// Parameters shared by everything that consumes the game class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameClassConfig {
    /// Largest payoff value N; payoffs are iid uniform on `{0, 1, ..., N}`.
    pub max_payoff: u32,
    /// Number of Monte Carlo draws.
    pub sample_count: u64,
    /// Root seed; worker streams are derived from it.
    pub seed: u64,
}

impl Default for GameClassConfig {
    fn default() -> Self {
        GameClassConfig {
            max_payoff: 10,
            sample_count: 50_000,
            seed: 0,
        }
    }
}

/// Seed of worker `worker_index`'s dedicated RNG stream.
pub fn worker_seed(seed: u64, worker_index: u64) -> u64 {
    seed ^ worker_index
}

/// Draws one game, consuming exactly four values from `rng` in the order
/// `p00, p01, p10, p11`.
pub fn sample_game<R: Rng + ?Sized>(rng: &mut R, max_payoff: u32) -> Game {
    let mut draw = || rng.random_range(0..=max_payoff) as f64;
    let p00 = draw();
    let p01 = draw();
    let p10 = draw();
    let p11 = draw();
    Game::new([[p00, p01], [p10, p11]])
}

/// Number of games in the class, `(N + 1)^4`, or an error if that count does
/// not fit in `u64`.
pub fn enumeration_len(max_payoff: u32) -> Result<u64, GamesError> {
    let base = max_payoff as u64 + 1;
    base.checked_pow(4)
        .ok_or(GamesError::EnumerationOverflow(max_payoff))
}

/// The game at `index` in lexicographic order of `(p00, p01, p10, p11)`;
/// `index` must be below `enumeration_len(max_payoff)`.
pub fn game_at_index(max_payoff: u32, index: u64) -> Game {
    let base = max_payoff as u64 + 1;
    debug_assert!(index < base.pow(4));
    let p11 = (index % base) as f64;
    let p10 = (index / base % base) as f64;
    let p01 = (index / (base * base) % base) as f64;
    let p00 = (index / (base * base * base)) as f64;
    Game::new([[p00, p01], [p10, p11]])
}

/// Exhaustive, lexicographically ordered iterator over the whole class.
#[derive(Debug, Clone)]
pub struct GameEnumeration {
    max_payoff: u32,
    next: u64,
    len: u64,
}

impl Iterator for GameEnumeration {
    type Item = Game;

    fn next(&mut self) -> Option<Game> {
        if self.next >= self.len {
            return None;
        }
        let game = game_at_index(self.max_payoff, self.next);
        self.next += 1;
        Some(game)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.len - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for GameEnumeration {}

pub fn enumerate_games(max_payoff: u32) -> Result<GameEnumeration, GamesError> {
    let len = enumeration_len(max_payoff)?;
    Ok(GameEnumeration {
        max_payoff,
        next: 0,
        len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_games(0).unwrap().len(), 1);
        assert_eq!(enumerate_games(1).unwrap().len(), 16);
        assert_eq!(enumerate_games(10).unwrap().len(), 14_641);
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let games: Vec<Game> = enumerate_games(1).unwrap().collect();
        assert_eq!(games[0], Game::new([[0.0, 0.0], [0.0, 0.0]]));
        assert_eq!(games[1], Game::new([[0.0, 0.0], [0.0, 1.0]]));
        assert_eq!(games[2], Game::new([[0.0, 0.0], [1.0, 0.0]]));
        assert_eq!(games[8], Game::new([[1.0, 0.0], [0.0, 0.0]]));
        assert_eq!(games[15], Game::new([[1.0, 1.0], [1.0, 1.0]]));
    }

    #[test]
    fn zero_payoff_class_is_the_single_zero_game() {
        let games: Vec<Game> = enumerate_games(0).unwrap().collect();
        assert_eq!(games, vec![Game::new([[0.0, 0.0], [0.0, 0.0]])]);
    }

    #[test]
    fn enumeration_rejects_overflowing_counts() {
        // (65535 + 1)^4 = 2^64 is one past the last representable count.
        assert_eq!(
            enumerate_games(65_535).unwrap_err(),
            GamesError::EnumerationOverflow(65_535)
        );
        assert_eq!(enumeration_len(65_534).unwrap(), 65_535u64.pow(4));
    }

    #[test]
    fn sampling_consumes_four_draws_in_field_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let game = sample_game(&mut rng, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0..=10u32) as f64).collect();
        assert_eq!(game, Game::new([[raw[0], raw[1]], [raw[2], raw[3]]]));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100)
                .map(|_| sample_game(&mut rng, 10))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn sampled_values_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let g = sample_game(&mut rng, 3);
            for i in 0..2 {
                for j in 0..2 {
                    let v = g.payoff(i, j);
                    assert!((0.0..=3.0).contains(&v) && v.fract() == 0.0);
                }
            }
        }
    }

    #[test]
    fn per_value_frequencies_match_uniform_within_five_sigma() {
        let n = 10u32;
        let draws = 100_000usize;
        let mut counts = [0u64; 11];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..draws {
            counts[rng.random_range(0..=n) as usize] += 1;
        }
        let p = 1.0 / 11.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (value, &count) in counts.iter().enumerate() {
            let dev = (count as f64 - draws as f64 * p).abs();
            assert!(
                dev <= 5.0 * sigma,
                "value {value}: count {count} deviates {dev:.1} > 5 sigma ({:.1})",
                5.0 * sigma
            );
        }
    }

    #[test]
    fn sampled_games_match_enumeration_weights() {
        // N = 2: 81 equally likely games; chi-square against uniform.
        let samples = 100_000usize;
        let mut counts = vec![0u64; 81];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..samples {
            let g = sample_game(&mut rng, 2);
            let idx = (g.payoffs[0][0] as usize) * 27
                + (g.payoffs[0][1] as usize) * 9
                + (g.payoffs[1][0] as usize) * 3
                + g.payoffs[1][1] as usize;
            counts[idx] += 1;
        }
        let expected = samples as f64 / 81.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 80 degrees of freedom: mean 80, sd ~12.6; 140 is beyond +4.7 sd.
        assert!(chi2 < 140.0, "chi-square {chi2:.1} too large for uniform");
    }

    #[test]
    fn game_json_shape_round_trips() {
        let game = Game::new([[0.0, 1.0], [2.0, 3.0]]);
        let json = serde_json::to_string(&game).unwrap();
        assert_eq!(json, r#"{"payoffs":[[0.0,1.0],[2.0,3.0]]}"#);
        assert_eq!(serde_json::from_str::<Game>(&json).unwrap(), game);
    }

    #[test]
    fn worker_seed_is_xor() {
        assert_eq!(worker_seed(0b1010, 0b0110), 0b1100);
        assert_eq!(worker_seed(9, 0), 9);
    }
}

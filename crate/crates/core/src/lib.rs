//! Evolutionary analysis of player types on random 2x2 symmetric games.
//!
//! A *player type* couples a preference transform (how raw payoffs are turned
//! into subjective utilities) with an epistemic attitude (what the player
//! assumes about the co-player when evaluating actions). Averaging the payoff
//! of every ordered pair of types over a class of games yields a *meta-game*,
//! which is then analyzed with standard evolutionary tools: ESS checks and
//! discrete-time replicator(-mutator) dynamics.
//!
//! Pipeline: [`games`] defines the game class (integer payoffs `0..=N`,
//! exhaustive enumeration or seeded Monte Carlo), [`preferences`] the four
//! subjective transforms, [`choice`] the epistemic types and choice rules,
//! [`metagame`] the fitness-matrix builders and the epistemic-mixing
//! derivations, [`stability`] the ESS reports, [`dynamics`] the population
//! updates, and [`cli`] a deterministic command-line front end.
//!
//! Everything is reproducible: all randomness flows from one `u64` seed
//! through per-worker ChaCha streams, and a result is pinned by (seed, worker
//! count).

pub mod choice;
pub mod cli;
pub mod dynamics;
pub mod games;
pub mod metagame;
pub mod preferences;
pub mod stability;

pub use choice::{choose, choose_with_belief, Belief, ChoiceSet, EpistemicType, PlayerType};
pub use dynamics::{
    mutation_kernel, replicator_mutator_step, replicator_step, run_dynamics, MutationKernel,
    PopulationState, Trajectory,
};
pub use games::{enumerate_games, sample_game, Game, GameClassConfig};
pub use metagame::{
    build_metagame_exact, build_metagame_mc, correlated_pref_metagame, find_regret_threshold,
    match_fitness, uncorrelated_pref_metagame, MetaGame,
};
pub use preferences::{transform, PreferenceType, SubjectiveMatrix};
pub use stability::{ess_set, is_ess, stability_report, StabilityReport};

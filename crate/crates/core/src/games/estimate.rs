//! Monte-Carlo advantage estimation over independent game runs.
//!
//! Trial `i` draws all of its randomness from a ChaCha20 stream keyed by the seed with
//! stream id `i`, so results do not depend on scheduling or on the execution mode.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::adversaries::{
    CheatingAdversary, FrankensteinAdversary, HonestAdversary, IrmAdversary, RandomBytes,
    RandomGuesser,
};
use super::{
    run_anonymity_game, run_anonymity_game_with_leaked_master_key, run_recovery_game,
    run_stronger_semantic_game, run_stronger_semantic_game_with_leaked_master_key, Game,
    GameParams, GameTranscript,
};
use crate::error::{Error, Result};

/// Two-sided 99% normal quantile.
const Z_99: f64 = 2.576;
pub const MIN_TRIALS: usize = 100;

/// Something that can sit across the table from a challenger.
pub trait Contestant {
    fn play(
        &mut self,
        game: Game,
        params: &GameParams,
        rng: &mut ChaCha20Rng,
    ) -> Result<GameTranscript>;
}

fn unsupported(name: &str, game: Game) -> Error {
    Error::Precondition(format!("{name} does not play {game}"))
}

impl Contestant for RandomGuesser {
    fn play(
        &mut self,
        game: Game,
        params: &GameParams,
        rng: &mut ChaCha20Rng,
    ) -> Result<GameTranscript> {
        match game {
            Game::Anonymity => run_anonymity_game(self, params, rng),
            Game::StrongerSemantic => run_stronger_semantic_game(self, params, rng),
            Game::Recovery => Err(unsupported("RandomGuesser", game)),
        }
    }
}

impl Contestant for CheatingAdversary {
    fn play(
        &mut self,
        game: Game,
        params: &GameParams,
        rng: &mut ChaCha20Rng,
    ) -> Result<GameTranscript> {
        match game {
            Game::Anonymity => run_anonymity_game_with_leaked_master_key(self, params, rng),
            Game::StrongerSemantic => {
                run_stronger_semantic_game_with_leaked_master_key(self, params, rng)
            }
            Game::Recovery => Err(unsupported("CheatingAdversary", game)),
        }
    }
}

impl Contestant for IrmAdversary {
    fn play(
        &mut self,
        game: Game,
        params: &GameParams,
        rng: &mut ChaCha20Rng,
    ) -> Result<GameTranscript> {
        match game {
            Game::StrongerSemantic => run_stronger_semantic_game(self, params, rng),
            _ => Err(unsupported("IrmAdversary", game)),
        }
    }
}

macro_rules! recovery_contestant {
    ($($ty:ty),*) => {$(
        impl Contestant for $ty {
            fn play(&mut self, game: Game, params: &GameParams, rng: &mut ChaCha20Rng) -> Result<GameTranscript> {
                match game {
                    Game::Recovery => run_recovery_game(self, params, rng),
                    _ => Err(unsupported(stringify!($ty), game)),
                }
            }
        }
    )*};
}

recovery_contestant!(HonestAdversary, FrankensteinAdversary, RandomBytes);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    /// Spread trials over the rayon pool (sequential when built without `parallel`).
    #[default]
    Parallel,
    Sequential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdvantageEstimate {
    pub game: Game,
    pub trials: usize,
    pub wins: usize,
    pub point_estimate: f64,
    pub baseline: f64,
    /// Half-width of the 99% normal-approximation binomial interval.
    pub bound_99: f64,
}

impl AdvantageEstimate {
    pub fn from_counts(game: Game, trials: usize, wins: usize) -> Self {
        let p_hat = wins as f64 / trials as f64;
        AdvantageEstimate {
            game,
            trials,
            wins,
            point_estimate: p_hat,
            baseline: game.baseline(),
            bound_99: Z_99 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        }
    }

    /// `|p̂ − baseline|`.
    pub fn advantage(&self) -> f64 {
        (self.point_estimate - self.baseline).abs()
    }

    pub fn consistent_with_baseline(&self) -> bool {
        self.advantage() <= self.bound_99
    }
}

impl fmt::Display for AdvantageEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {:.6} {:.6} {:.6}",
            self.game, self.trials, self.wins, self.point_estimate, self.baseline, self.bound_99
        )
    }
}

fn trial_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs `trials` independent games, each against a fresh contestant from `make`.
pub fn estimate_advantage<C, F>(
    make: F,
    game: Game,
    trials: usize,
    params: &GameParams,
    seed: u64,
    execution: Execution,
) -> Result<AdvantageEstimate>
where
    C: Contestant,
    F: Fn() -> C + Sync,
{
    if trials < MIN_TRIALS {
        return Err(Error::Precondition(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let one =
        |i: usize| -> Result<bool> { Ok(make().play(game, params, &mut trial_rng(seed, i))?.won) };
    let outcomes: Vec<bool> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials)
                .into_par_iter()
                .map(one)
                .collect::<Result<_>>()?
        }
        _ => (0..trials).map(one).collect::<Result<_>>()?,
    };
    let wins = outcomes.iter().filter(|&&w| w).count();
    Ok(AdvantageEstimate::from_counts(game, trials, wins))
}

//! Initial guesses for the coupled solver.
//!
//! The unilateral guess solves each player's impulse control problem with the
//! opponent passive. The staged guess solves the capped game first and hands
//! its value pair to the benchmark solve.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{build_capped, BenchmarkParams, CappedParams, GameSpec, Player};
use crate::grid::{Field, Grid};
use crate::howard::{solve_howard, HowardConfig};
use crate::operators::Discretisation;
use crate::solver::{solve_discretised, SolveResult, SolverConfig};

/// Default payoff cap for the staged benchmark guess.
pub const DEFAULT_CAP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessKind {
    #[default]
    Zero,
    Unilateral,
}

/// The game seen by `player` alone: only its own cost matters and both
/// Neumann slopes are zero.
fn unilateral_game(game: &GameSpec) -> GameSpec {
    let mut g = game.clone();
    g.neumann_slopes = [(0.0, 0.0), (0.0, 0.0)];
    g
}

/// Value of `player`'s single-agent impulse control problem on the full grid.
pub fn unilateral_value(game: &GameSpec, player: Player, grid: &Grid, inner: &HowardConfig) -> Result<Field> {
    let disc = Discretisation::new(grid.clone(), unilateral_game(game))?;
    let f = grid.sample(|x| game.payoff(player, x));
    let argmax = f.iter().enumerate().fold(0, |best, (k, &v)| if v > f[best] { k } else { best });
    if argmax == 0 || argmax + 1 == grid.len() {
        warn!(
            "{player}'s payoff peaks at the grid edge x = {}; the unilateral game may be ill-posed",
            grid.x(argmax)
        );
    }
    let sub = disc.full_subproblem(player)?;
    let res = solve_howard(&sub, &vec![0.0; grid.len()], inner)
        .map_err(|e| e.context(format!("unilateral solve for {player}")))?;
    if !res.converged {
        warn!("unilateral solve for {player} stopped after {} iterations", res.iterations);
    }
    Ok(Field(res.values))
}

pub fn unilateral_pair(game: &GameSpec, grid: &Grid, inner: &HowardConfig) -> Result<[Field; 2]> {
    Ok([unilateral_value(game, Player::One, grid, inner)?, unilateral_value(game, Player::Two, grid, inner)?])
}

/// Solution of `𝔸V − ρV + 𝕗 = 0` with zero Neumann slopes: the value of never intervening.
pub fn passive_value(game: &GameSpec, player: Player, grid: &Grid) -> Result<Field> {
    let disc = Discretisation::new(grid.clone(), unilateral_game(game))?;
    let sub = disc.full_subproblem(player)?;
    let rhs: Vec<f64> = sub.source.iter().map(|g| -g).collect();
    Ok(Field(sub.operator.solve(&rhs)?))
}

pub fn initial_guess(kind: GuessKind, game: &GameSpec, grid: &Grid, inner: &HowardConfig) -> Result<[Field; 2]> {
    match kind {
        GuessKind::Zero => Ok([Field::zeros(grid.len()), Field::zeros(grid.len())]),
        GuessKind::Unilateral => unilateral_pair(game, grid, inner),
    }
}

#[derive(Debug, Clone)]
pub struct StagedGuess {
    pub values: [Field; 2],
    /// The capped solve the guess came from. Its values are returned even if
    /// it did not converge.
    pub capped: SolveResult,
}

/// Solve the benchmark game with payoffs capped at `cap` and return its values.
pub fn staged_benchmark_guess(
    params: &BenchmarkParams,
    cap: f64,
    grid: &Grid,
    config: &SolverConfig,
    capped_guess: GuessKind,
) -> Result<StagedGuess> {
    let capped = build_capped(&CappedParams { benchmark: *params, cap }).map_err(|e| e.context("capped game"))?;
    let v0 = initial_guess(capped_guess, &capped, grid, &config.inner).map_err(|e| e.context("capped guess"))?;
    let disc = Discretisation::new(grid.clone(), capped)?;
    let res = solve_discretised(&disc, v0, config).map_err(|e| e.context("capped solve"))?;
    if !res.converged() {
        warn!("capped stage did not converge (R = {:.3e}); using its last iterate", res.residual());
    }
    Ok(StagedGuess { values: res.values.clone(), capped: res })
}

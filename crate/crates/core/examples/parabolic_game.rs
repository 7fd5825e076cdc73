//! Coupled policy iteration on the parabolic game from the zero and the
//! unilateral initial guess.
//!
//! `cargo run --example parabolic_game -- 1200` picks the grid size (default 300).

use std::time::Instant;

use nzssig::game::{build_parabolic, CostParams, ParabolicParams};
use nzssig::guess::{initial_guess, GuessKind};
use nzssig::operators::Discretisation;
use nzssig::solver::{extract_equilibrium, solve_discretised};
use nzssig::{Grid, SolverConfig};

fn main() -> nzssig::Result<()> {
    env_logger::init();
    let m = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    let game = build_parabolic(&ParabolicParams {
        sigma: 0.25,
        rho: 0.03,
        roots: [(-4.5, 1.0), (-std::f64::consts::PI, 2.7)],
        costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 0.0, lambda_tilde: 0.0 },
    })?;
    let disc = Discretisation::new(Grid::new(-8.0, 6.0, m)?, game.clone())?;
    let config = SolverConfig::default();

    for kind in [GuessKind::Zero, GuessKind::Unilateral] {
        let start = Instant::now();
        let v0 = initial_guess(kind, &game, &disc.grid, &config.inner)?;
        let res = solve_discretised(&disc, v0, &config)?;
        println!(
            "M = {m}, {kind:?} guess: {:?} after {} iterations, R = {:.2e} ({:.2}s)",
            res.status,
            res.iterations,
            res.residual(),
            start.elapsed().as_secs_f64()
        );
        let [s1, s2] = extract_equilibrium(&disc, [&res.values[0], &res.values[1]], config.eps)?;
        println!("  {s1}\n  {s2}");
    }
    Ok(())
}

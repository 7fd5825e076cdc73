//! Monte Carlo check of the parabolic equilibrium: simulated objectives vs
//! solver values, then randomly perturbed deviations for each player.

use nzssig::game::{build_parabolic, CostParams, ParabolicParams};
use nzssig::guess::{initial_guess, GuessKind};
use nzssig::montecarlo::{estimate_objective, perturb_strategy, PerturbMode, SimConfig, DEFAULT_MAGNITUDE};
use nzssig::operators::Discretisation;
use nzssig::solver::{extract_equilibrium, solve_discretised};
use nzssig::{Grid, Player, SolverConfig};

fn main() -> nzssig::Result<()> {
    env_logger::init();
    let game = build_parabolic(&ParabolicParams {
        sigma: 0.25,
        rho: 0.03,
        roots: [(-4.5, 1.0), (-std::f64::consts::PI, 2.7)],
        costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 0.0, lambda_tilde: 0.0 },
    })?;
    let disc = Discretisation::new(Grid::new(-8.0, 6.0, 1200)?, game.clone())?;
    let config = SolverConfig::default();
    let v0 = initial_guess(GuessKind::Unilateral, &game, &disc.grid, &config.inner)?;
    let res = solve_discretised(&disc, v0, &config)?;
    let eq = extract_equilibrium(&disc, [&res.values[0], &res.values[1]], config.eps)?;
    println!("equilibrium ({:?}):\n  {}\n  {}", res.status, eq[0], eq[1]);

    let sim = SimConfig { horizon: 300.0, dt: 0.01, paths: 200, seed: 7, x0: 0.0 };
    for x0 in [-2.0, 0.0, 1.0] {
        let k = disc.grid.nearest(x0);
        let est = estimate_objective(&game, &eq, &SimConfig { x0, ..sim })?;
        for p in Player::BOTH {
            let e = est[p.index()];
            println!("x0 = {x0:>5.2} {p}: J = {:9.3} ± {:6.3}, V = {:9.3}", e.mean, e.stderr, res.value(p)[k]);
        }
    }

    println!("\nworst z-score (J_dev − V)/stderr over 10 deviations:");
    for x0 in [-1.5, 0.5] {
        let k = disc.grid.nearest(x0);
        for p in Player::BOTH {
            let mut worst = f64::NEG_INFINITY;
            for draw in 0..10 {
                let mut pair = eq.clone();
                pair[p.index()] = perturb_strategy(&eq[p.index()], DEFAULT_MAGNITUDE, draw, PerturbMode::Target)?;
                let e = estimate_objective(&game, &pair, &SimConfig { x0, ..sim })?[p.index()];
                worst = worst.max((e.mean - res.value(p)[k]) / e.stderr);
            }
            println!("  x0 = {x0:>5.2} {p} deviates: {worst:.2}");
        }
    }
    Ok(())
}

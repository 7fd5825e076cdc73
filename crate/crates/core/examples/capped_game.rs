//! The capped game on its own, compared with the uncapped closed form.
//!
//! Prints one line per grid size; some sizes stagnate (see `kink_stagnation`).

use nzssig::benchmark::closed_form;
use nzssig::game::{build_capped, BenchmarkParams, CappedParams, CostParams};
use nzssig::guess::{initial_guess, GuessKind};
use nzssig::operators::Discretisation;
use nzssig::solver::solve_discretised;
use nzssig::{Grid, Player, SolverConfig};

fn main() -> nzssig::Result<()> {
    env_logger::init();
    let third = std::f64::consts::FRAC_PI_3;
    let benchmark = BenchmarkParams {
        sigma: 0.25,
        rho: 0.03,
        s1: -third,
        s2: third,
        costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 0.5, lambda_tilde: 0.3 },
    };
    let game = build_capped(&CappedParams { benchmark, cap: 5.0 })?;
    let cf = closed_form(&benchmark, 1e-14)?;
    let config = SolverConfig::default();

    println!("{:>6} {:>16} {:>6} {:>10} {:>10}", "M", "status", "its", "R", "rel. err");
    for m in [600, 900, 1200] {
        let disc = Discretisation::new(Grid::new(-10.0, 10.0, m)?, game.clone())?;
        let v0 = initial_guess(GuessKind::Zero, &game, &disc.grid, &config.inner)?;
        let res = solve_discretised(&disc, v0, &config)?;
        let exact = cf.values_on(&disc.grid);
        let scale = exact.iter().flat_map(|f| f.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
        let err = Player::BOTH.map(|p| res.value(p).sup_distance(&exact[p.index()])).into_iter().fold(0.0, f64::max);
        let status = if res.converged() { "converged" } else { "not converged" };
        println!("{m:>6} {status:>16} {:>6} {:>10.2e} {:>9.2}%", res.iterations, res.residual(), 100.0 * err / scale);
    }
    Ok(())
}

//! Benchmark game solved numerically from the staged capped guess and checked
//! against the closed form.

use nzssig::benchmark::closed_form;
use nzssig::game::{build_benchmark, BenchmarkParams, CostParams};
use nzssig::guess::{staged_benchmark_guess, GuessKind, DEFAULT_CAP};
use nzssig::operators::Discretisation;
use nzssig::solver::{extract_equilibrium, solve_discretised};
use nzssig::{Grid, Player, SolverConfig};

fn main() -> nzssig::Result<()> {
    env_logger::init();
    let m = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1000);
    let params = BenchmarkParams {
        sigma: 0.15,
        rho: 0.02,
        s1: -3.0,
        s2: 3.0,
        costs: CostParams { c: 100.0, c_tilde: 0.0, lambda: 15.0, lambda_tilde: 15.0 },
    };
    let grid = Grid::new(-10.0, 10.0, m)?;
    let config = SolverConfig::default();

    let staged = staged_benchmark_guess(&params, DEFAULT_CAP, &grid, &config, GuessKind::Zero)?;
    println!("capped stage: {:?} after {} iterations", staged.capped.status, staged.capped.iterations);

    let disc = Discretisation::new(grid, build_benchmark(&params)?)?;
    let res = solve_discretised(&disc, staged.values, &config)?;
    println!("benchmark: {:?} after {} iterations, R = {:.2e}", res.status, res.iterations, res.residual());

    let cf = closed_form(&params, 1e-14)?;
    let exact = cf.values_on(&disc.grid);
    for p in Player::BOTH {
        println!("  {p}: sup error {:.4}", res.value(p).sup_distance(&exact[p.index()]));
    }
    let [s1, s2] = extract_equilibrium(&disc, [&res.values[0], &res.values[1]], config.eps)?;
    println!("  {s1}\n  {s2}");
    println!("  exact: x_bar = {:.4?}, x_star = {:.4?}, h = {:.4}", cf.x_bar, cf.x_star, disc.grid.h());
    Ok(())
}

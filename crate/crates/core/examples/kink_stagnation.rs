//! Stagnation on fine grids: the residual stops decreasing and the worst
//! node sits next to a junction of the two continuation regions.

use nzssig::game::{build_benchmark, BenchmarkParams, CostParams};
use nzssig::guess::{staged_benchmark_guess, GuessKind, DEFAULT_CAP};
use nzssig::operators::Discretisation;
use nzssig::solver::{junction_distance, junction_nodes, solve_discretised};
use nzssig::{Grid, SolverConfig};

fn main() -> nzssig::Result<()> {
    env_logger::init();
    let m = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2500);
    let params = BenchmarkParams {
        sigma: 0.15,
        rho: 0.02,
        s1: -3.0,
        s2: 3.0,
        costs: CostParams { c: 100.0, c_tilde: 0.0, lambda: 15.0, lambda_tilde: 15.0 },
    };
    let grid = Grid::new(-10.0, 10.0, m)?;
    let config = SolverConfig { k_max: 150, ..SolverConfig::default() };
    let staged = staged_benchmark_guess(&params, DEFAULT_CAP, &grid, &config, GuessKind::Zero)?;
    let disc = Discretisation::new(grid, build_benchmark(&params)?)?;
    let res = solve_discretised(&disc, staged.values, &config)?;

    println!("M = {m}: {:?} after {} iterations", res.status, res.iterations);
    let tail: Vec<String> = res.residual_history.iter().rev().take(6).rev().map(|r| format!("{r:.3e}")).collect();
    println!("last residuals: {}", tail.join(" "));

    let junctions = junction_nodes(&disc, [&res.values[0], &res.values[1]], config.eps)?;
    let shown: Vec<String> = junctions.iter().map(|&k| format!("{k} (x = {:.3})", disc.grid.x(k))).collect();
    println!("junction nodes: {}", shown.join(", "));
    if let Some(w) = res.breakdown.worst() {
        println!(
            "worst residual: {} at node {} (x = {:.4}), {} term, value {:.3e}, {} nodes from a junction",
            w.player,
            w.node,
            disc.grid.x(w.node),
            w.kind,
            w.value,
            junction_distance(&junctions, w.node).map_or("?".into(), |d| d.to_string()),
        );
    }
    Ok(())
}

//! Closed-form equilibrium of the linear benchmark game.
//!
//! Prints the root ξ, the thresholds and targets, and a few sampled values.

use nzssig::benchmark::closed_form;
use nzssig::game::{BenchmarkParams, CostParams};
use nzssig::Player;

fn main() -> nzssig::Result<()> {
    let params = BenchmarkParams {
        sigma: 0.15,
        rho: 0.02,
        s1: -3.0,
        s2: 3.0,
        costs: CostParams { c: 100.0, c_tilde: 0.0, lambda: 15.0, lambda_tilde: 15.0 },
    };
    let cf = closed_form(&params, 1e-14)?;
    println!("xi = {:.12}  Gamma = {:.12}", cf.xi, cf.gamma);
    println!("thresholds x_bar = [{:.6}, {:.6}]", cf.x_bar[0], cf.x_bar[1]);
    println!("targets    x_star = [{:.6}, {:.6}]", cf.x_star[0], cf.x_star[1]);
    println!("\n{:>8} {:>14} {:>14}", "x", "V1", "V2");
    for k in -8..=8 {
        let x = k as f64;
        println!("{x:>8.2} {:>14.6} {:>14.6}", cf.value(x, Player::One), cf.value(x, Player::Two));
    }
    let [s1, s2] = cf.strategies();
    println!("\n{s1}\n{s2}");
    Ok(())
}

//! Policy iteration for a single discrete QVI
//! `max{L V + g, max_y B^y V − V} = 0`.
//!
//! Each step freezes the obstacle `M = max_y B^y V` at the current iterate,
//! picks per node whether the PDE row or the obstacle row is active, and
//! solves the resulting tridiagonal system exactly. Obstacle rows are
//! identity rows `−V(x) + M(x) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::sup_distance;
use crate::operators::SubProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HowardConfig {
    /// Stop when the sup-norm step between iterates is at most this.
    pub tol: f64,
    pub k_max: usize,
}

impl Default for HowardConfig {
    fn default() -> Self {
        HowardConfig { tol: 1e-10, k_max: 200 }
    }
}

impl HowardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid(format!("inner tolerance must be positive, got {}", self.tol)));
        }
        if self.k_max < 1 {
            return Err(invalid("inner k_max must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HowardResult {
    /// Solution on the sub-problem's nodes.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm distance between the last two iterates.
    pub final_step_norm: f64,
    /// Per node: `true` where the obstacle row was active in the last step.
    pub policy: Vec<bool>,
    pub converged: bool,
}

pub fn solve_howard(problem: &SubProblem, v0: &[f64], config: &HowardConfig) -> Result<HowardResult> {
    config.validate()?;
    let n = problem.len();
    if v0.len() != n {
        return Err(invalid(format!("initial guess has {} entries, sub-problem has {n}", v0.len())));
    }
    if let Some(node) = v0.iter().position(|v| !v.is_finite()) {
        return Err(crate::error::Error::NonFinite { node });
    }
    let l = &problem.operator;
    let mut v = v0.to_vec();
    let mut step = f64::INFINITY;
    let mut policy = vec![false; n];
    let mut iterations = 0;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    while step > config.tol && iterations < config.k_max {
        let obstacle = problem.obstacle(&v);
        let pde = problem.pde_part(&v);
        for k in 0..n {
            let intervene = pde[k] < obstacle[k] - v[k];
            policy[k] = intervene;
            if intervene {
                lower[k] = 0.0;
                diag[k] = -1.0;
                upper[k] = 0.0;
                rhs[k] = -obstacle[k];
            } else {
                lower[k] = l.lower[k];
                diag[k] = l.diag[k];
                upper[k] = l.upper[k];
                rhs[k] = -problem.source[k];
            }
        }
        let next = crate::tridiag::solve(&lower, &diag, &upper, &rhs)?;
        step = sup_distance(&next, &v);
        v = next;
        iterations += 1;
    }
    Ok(HowardResult { values: v, iterations, final_step_norm: step, converged: step <= config.tol, policy })
}

/// `sup |max{L V + g, max_y B^y V − V}|` over the sub-problem's nodes.
pub fn qvi_residual(problem: &SubProblem, v: &[f64]) -> f64 {
    let obstacle = problem.obstacle(v);
    let pde = problem.pde_part(v);
    pde.iter()
        .zip(&obstacle)
        .zip(v)
        .map(|((p, m), v)| p.max(m - v).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameSpec, ImpulseFn, Player};
    use crate::grid::Grid;
    use crate::operators::Discretisation;
    use std::sync::Arc;

    fn constant_game(fbar: f64, c: f64) -> GameSpec {
        GameSpec {
            name: "constant".into(),
            drift: Arc::new(|_| 0.0),
            volatility: Arc::new(|_| 0.3),
            rho: [0.04, 0.04],
            running_payoff: [Arc::new(move |_| fbar), Arc::new(move |_| fbar)],
            cost: [ImpulseFn::linear(-c, 0.0), ImpulseFn::linear(-c, 0.0)],
            gain: [ImpulseFn::linear(0.0, 0.0), ImpulseFn::linear(0.0, 0.0)],
            neumann_slopes: [(0.0, 0.0), (0.0, 0.0)],
        }
    }

    #[test]
    fn constant_payoff_prohibitive_cost() {
        let grid = Grid::new(-2.0, 2.0, 40).unwrap();
        let disc = Discretisation::new(grid, constant_game(3.0, 1e6)).unwrap();
        let sub = disc.full_subproblem(Player::One).unwrap();
        let res = solve_howard(&sub, &vec![0.0; 41], &HowardConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 2, "{}", res.iterations);
        for v in &res.values {
            assert!((v - 3.0 / 0.04).abs() < 1e-9);
        }
        assert!(res.policy.iter().all(|p| !p));
        let exact = vec![75.0; 41];
        assert!(qvi_residual(&sub, &exact) < 1e-12);
    }

    #[test]
    fn perturbation_shows_in_residual() {
        let grid = Grid::new(-2.0, 2.0, 40).unwrap();
        let disc = Discretisation::new(grid, constant_game(3.0, 1e6)).unwrap();
        let sub = disc.full_subproblem(Player::One).unwrap();
        let mut v = vec![75.0; 41];
        v[20] += 1.0;
        assert!(qvi_residual(&sub, &v) >= 0.04);
    }

    #[test]
    fn unconverged_is_flagged_not_failed() {
        let grid = Grid::new(-2.0, 2.0, 40).unwrap();
        let disc = Discretisation::new(grid, constant_game(3.0, 1.0)).unwrap();
        let sub = disc.full_subproblem(Player::One).unwrap();
        let res = solve_howard(&sub, &vec![-50.0; 41], &HowardConfig { tol: 1e-300, k_max: 1 }).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(!res.converged);
    }

    #[test]
    fn rejects_bad_config_and_guess() {
        let grid = Grid::new(-2.0, 2.0, 4).unwrap();
        let disc = Discretisation::new(grid, constant_game(3.0, 1.0)).unwrap();
        let sub = disc.full_subproblem(Player::One).unwrap();
        assert!(solve_howard(&sub, &[0.0; 5], &HowardConfig { tol: 0.0, k_max: 3 }).is_err());
        assert!(solve_howard(&sub, &[0.0; 4], &HowardConfig::default()).is_err());
        assert!(solve_howard(&sub, &[0.0, 0.0, f64::NAN, 0.0, 0.0], &HowardConfig::default()).is_err());
    }
}

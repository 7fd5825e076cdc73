//! Closed-form Nash equilibrium of the linear benchmark game.
//!
//! With `s̃ = (s1 + s2)/2`, `θ = √(2ρ/σ²)` and `η = (1 − λρ)/ρ`, the equilibrium
//! is pinned down by the root `ξ ∈ (0, η)` of
//! `F(y) = 2y − η log((η + y)/(η − y)) + θc`. Everything else is explicit.

use crate::error::{invalid, Error, Result};
use crate::game::{BenchmarkParams, Player};
use crate::grid::{Field, Grid};
use crate::solver::{ContinuationInterval, ImpulsePoint, Strategy};

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub params: BenchmarkParams,
    pub s_tilde: f64,
    pub theta: f64,
    pub eta: f64,
    pub xi: f64,
    pub gamma: f64,
    /// Coefficients of `e^{θx}` and `e^{−θx}` in the middle branch.
    pub a: [f64; 2],
    /// Intervention thresholds `[x̄₁, x̄₂]`.
    pub x_bar: [f64; 2],
    /// Post-intervention targets `[x₁*, x₂*]`.
    pub x_star: [f64; 2],
}

/// `F` in the variable `t = log((η + y)/(η − y))`, i.e. `y = η tanh(t/2)`:
/// `G(t) = 2η tanh(t/2) − ηt + θc`. When `θc/η` is large the root `ξ` sits
/// within a few ulps of `η`, and working in `t` keeps `η − ξ` accurate.
fn g_log_ratio(t: f64, eta: f64, theta: f64, c: f64) -> f64 {
    2.0 * eta * (0.5 * t).tanh() - eta * t + theta * c
}

/// Root `t* > 0` of `G` by bisection to `tol` (relative), polished by Newton steps.
pub fn solve_log_ratio(eta: f64, theta: f64, c: f64, tol: f64) -> Result<f64> {
    if !(eta > 0.0 && theta > 0.0 && c > 0.0) {
        return Err(invalid(format!("need eta, theta, c > 0, got ({eta}, {theta}, {c})")));
    }
    // G(0) = θc > 0 and G(t) < 2η − ηt + θc, so G < 0 beyond 2 + θc/η.
    let (mut lo, mut hi) = (0.0, 3.0 + theta * c / eta);
    if !hi.is_finite() {
        return Err(Error::NoBracket { name: "G", lo, hi });
    }
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g_log_ratio(mid, eta, theta, c) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        // G'(t) = −η tanh²(t/2)
        let d = -eta * (0.5 * t).tanh().powi(2);
        let next = t - g_log_ratio(t, eta, theta, c) / d;
        if !(next > lo && next < hi) {
            break;
        }
        t = next;
    }
    Ok(t)
}

/// Root `ξ ∈ (0, η)` of `F(y) = 2y − η log((η + y)/(η − y)) + θc`.
pub fn solve_xi(eta: f64, theta: f64, c: f64, tol: f64) -> Result<f64> {
    let t = solve_log_ratio(eta, theta, c, tol)?;
    let xi = eta * (0.5 * t).tanh();
    if !(xi > 0.0 && xi <= eta) {
        return Err(Error::NoBracket { name: "F", lo: 0.0, hi: eta });
    }
    Ok(xi)
}

pub fn closed_form(params: &BenchmarkParams, tol: f64) -> Result<ClosedForm> {
    params.validate()?;
    let BenchmarkParams { sigma, rho, costs, .. } = *params;
    let s_tilde = params.s_tilde();
    let theta = (2.0 * rho / (sigma * sigma)).sqrt();
    let eta = (1.0 - costs.lambda * rho) / rho;
    let t = solve_log_ratio(eta, theta, costs.c, tol)?;
    let xi = eta * (0.5 * t).tanh();

    let gamma = theta * (costs.c - costs.c_tilde) / (4.0 * xi)
        + theta * costs.c * (costs.lambda - costs.lambda_tilde) / (4.0 * eta * xi)
        + (costs.lambda - costs.lambda_tilde) / (2.0 * eta);
    if !(gamma >= 0.0) {
        return Err(invalid(format!("Gamma must be nonnegative, got {gamma}")));
    }
    let (g1, g0) = ((gamma + 1.0).sqrt(), gamma.sqrt());
    // log √((η ± ξ)/(η ∓ ξ)) = ±t/2 and √(η² − ξ²) = η / cosh(t/2)
    let log_sum = (g1 + g0).ln();
    let sign = [-1.0, 1.0];
    let x_bar = sign.map(|s| s_tilde + s * (0.5 * t + log_sum) / theta);
    let x_star = sign.map(|s| s_tilde + s * (log_sum - 0.5 * t) / theta);
    let scale = eta / (0.5 * t).cosh() / (2.0 * theta);
    let a = sign.map(|s| (s * theta * s_tilde).exp() * scale * (-s * g1 - g0));

    if !(x_bar[0] < x_bar[1] && x_star.iter().all(|&t| x_bar[0] < t && t < x_bar[1])) {
        return Err(invalid(format!("closed form violates ordering: x_bar = {x_bar:?}, x_star = {x_star:?}")));
    }
    Ok(ClosedForm { params: *params, s_tilde, theta, eta, xi, gamma, a, x_bar, x_star })
}

impl ClosedForm {
    /// Player 2's value on the continuation region.
    pub fn phi(&self, x: f64) -> f64 {
        self.a[0] * (self.theta * x).exp() + self.a[1] * (-self.theta * x).exp() + (self.params.s2 - x) / self.params.rho
    }

    pub fn value(&self, x: f64, player: Player) -> f64 {
        match player {
            Player::Two => self.value_two(x),
            Player::One => self.value_two(2.0 * self.s_tilde - x),
        }
    }

    fn value_two(&self, x: f64) -> f64 {
        let c = &self.params.costs;
        if x <= self.x_bar[0] {
            self.phi(self.x_star[0]) + c.c_tilde + c.lambda_tilde * (self.x_star[0] - x)
        } else if x >= self.x_bar[1] {
            self.phi(self.x_star[1]) - c.c - c.lambda * (x - self.x_star[1])
        } else {
            self.phi(x)
        }
    }

    pub fn values_on(&self, grid: &Grid) -> [Field; 2] {
        Player::BOTH.map(|p| grid.sample(|x| self.value(x, p)))
    }

    /// Exact threshold strategies: player 1 jumps from `x ≤ x̄₁` to `x₁*`,
    /// player 2 from `x ≥ x̄₂` to `x₂*`.
    pub fn strategies(&self) -> [Strategy; 2] {
        let one = Strategy {
            player: Player::One,
            intervals: vec![ContinuationInterval {
                first: 0,
                last: usize::MAX,
                lower: self.x_bar[0],
                upper: f64::INFINITY,
            }],
            impulses: vec![ImpulsePoint { x: self.x_bar[0], target: self.x_star[0] }],
            shift_scale: 1.0,
        };
        let two = Strategy {
            player: Player::Two,
            intervals: vec![ContinuationInterval {
                first: 0,
                last: usize::MAX,
                lower: f64::NEG_INFINITY,
                upper: self.x_bar[1],
            }],
            impulses: vec![ImpulsePoint { x: self.x_bar[1], target: self.x_star[1] }],
            shift_scale: 1.0,
        };
        [one, two]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::CostParams;

    fn left() -> BenchmarkParams {
        BenchmarkParams {
            sigma: 0.15,
            rho: 0.02,
            s1: -3.0,
            s2: 3.0,
            costs: CostParams { c: 100.0, c_tilde: 0.0, lambda: 15.0, lambda_tilde: 15.0 },
        }
    }

    fn right() -> BenchmarkParams {
        BenchmarkParams {
            sigma: 0.25,
            rho: 0.03,
            s1: -2.0,
            s2: 2.0,
            costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 4.0, lambda_tilde: 3.0 },
        }
    }

    #[test]
    fn xi_matches_reference() {
        // reference root from an independent scipy brentq evaluation
        let cf = closed_form(&left(), 1e-14).unwrap();
        assert!((cf.xi - 34.78816647581048).abs() < 1e-9, "{}", cf.xi);
        assert!((cf.gamma - 0.95818022937516).abs() < 1e-9);
        assert!((cf.x_bar[1] - 2.8237953421536197).abs() < 1e-8);
        assert!((cf.x_star[0] - 1.5242689353811067).abs() < 1e-8);
        assert!((cf.a[0] - 0.6062727882618452).abs() < 1e-8);
        assert!((cf.a[1] + 3.4290272732241367).abs() < 1e-8);
    }

    #[test]
    fn right_thresholds() {
        let cf = closed_form(&right(), 1e-14).unwrap();
        assert!((cf.x_bar[0] + 3.4611).abs() < 1e-4);
        assert!((cf.x_star[1] + 1.9694).abs() < 1e-4);
    }

    #[test]
    fn seams_are_continuous() {
        for p in [left(), right()] {
            let cf = closed_form(&p, 1e-14).unwrap();
            for &xb in &cf.x_bar {
                for player in Player::BOTH {
                    let jump = cf.value(xb - 1e-9, player) - cf.value(xb + 1e-9, player);
                    assert!(jump.abs() < 1e-6, "{player} at {xb}: {jump}");
                }
            }
        }
    }

    #[test]
    fn symmetry() {
        let cf = closed_form(&right(), 1e-14).unwrap();
        for x in [-6.0, -1.3, 0.0, 0.7, 4.2] {
            assert_eq!(cf.value(x, Player::One), cf.value(2.0 * cf.s_tilde - x, Player::Two));
        }
    }

    #[test]
    fn smooth_fit_at_own_threshold_kink_at_opponents() {
        let p = right();
        let cf = closed_form(&p, 1e-14).unwrap();
        let d = |x: f64, h: f64| (cf.value(x + h, Player::Two) - cf.value(x, Player::Two)) / h;
        let h = 1e-6;
        // own threshold: one-sided slopes agree at -lambda
        let xb = cf.x_bar[1];
        assert!((d(xb - 2.0 * h, h) + p.costs.lambda).abs() < 1e-3);
        assert!((d(xb + h, h) + p.costs.lambda).abs() < 1e-9);
        // opponent's threshold: slope jumps from -lambda_tilde to something else
        let xb = cf.x_bar[0];
        assert!((d(xb - 2.0 * h, h) + p.costs.lambda_tilde).abs() < 1e-6);
        assert!((d(xb + h, h) + p.costs.lambda_tilde).abs() > 0.1);
    }

    #[test]
    fn higher_fixed_cost_widens_no_action_region() {
        let mut prev = 0.0;
        for c in [40.0, 70.0, 100.0, 200.0] {
            let mut p = right();
            p.costs.c = c;
            let cf = closed_form(&p, 1e-14).unwrap();
            let width = cf.x_bar[1] - cf.x_bar[0];
            assert!(width > prev);
            prev = width;
        }
    }

    #[test]
    fn strategies_jump_to_targets() {
        let cf = closed_form(&right(), 1e-14).unwrap();
        let [s1, s2] = cf.strategies();
        assert!(!s1.continues(cf.x_bar[0] - 0.1));
        assert!(s1.continues(cf.x_bar[0] + 0.1));
        assert!((s1.target(-20.0).unwrap() - cf.x_star[0]).abs() < 1e-12);
        assert!(s2.continues(0.0));
        assert!((s2.target(9.0).unwrap() - cf.x_star[1]).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_fixed_cost() {
        assert!(solve_xi(10.0, 1.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn root_near_eta_stays_accurate() {
        // θc/η ≈ 29: ξ is within ~1e-12 of η
        let p = BenchmarkParams {
            sigma: 0.1,
            rho: 0.0625,
            s1: -0.5,
            s2: 0.5,
            costs: CostParams { c: 130.0, c_tilde: 0.0, lambda: 0.0, lambda_tilde: 0.0 },
        };
        let cf = closed_form(&p, 1e-15).unwrap();
        assert!(cf.eta - cf.xi < 1e-10);
        for &xb in &cf.x_bar {
            let jump = cf.value(xb - 1e-12, Player::Two) - cf.value(xb + 1e-12, Player::Two);
            assert!(jump.abs() < 1e-8, "{jump}");
        }
    }
}

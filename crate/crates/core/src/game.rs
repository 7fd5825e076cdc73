//! Game data: the controlled diffusion, running payoffs, intervention costs
//! and gains of both players, plus the three parametric families used in the
//! experiments (linear benchmark, parabolic, capped).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A real function of the state.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.number())
    }
}

/// An intervention cost φ(x, δ) or gain ψ(x, δ).
///
/// Costs are stored as the signed amount added to the objective, so a cost of
/// `c + λ|δ|` is `Linear { fixed: -c, proportional: -λ }`.
#[derive(Clone)]
pub enum ImpulseFn {
    /// `fixed + proportional * |δ|`, independent of the pre-jump state.
    Linear { fixed: f64, proportional: f64 },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl ImpulseFn {
    pub fn linear(fixed: f64, proportional: f64) -> Self {
        ImpulseFn::Linear { fixed, proportional }
    }

    #[inline]
    pub fn eval(&self, x: f64, delta: f64) -> f64 {
        match self {
            ImpulseFn::Linear { fixed, proportional } => fixed + proportional * delta.abs(),
            ImpulseFn::Custom(f) => f(x, delta),
        }
    }
}

impl fmt::Debug for ImpulseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpulseFn::Linear { fixed, proportional } => f
                .debug_struct("Linear")
                .field("fixed", fixed)
                .field("proportional", proportional)
                .finish(),
            ImpulseFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Full description of a two-player impulse game on the real line.
#[derive(Clone)]
pub struct GameSpec {
    pub name: String,
    pub drift: ScalarFn,
    pub volatility: ScalarFn,
    pub rho: [f64; 2],
    pub running_payoff: [ScalarFn; 2],
    pub cost: [ImpulseFn; 2],
    pub gain: [ImpulseFn; 2],
    /// Per player, the prescribed derivative of the value function beyond the
    /// left and right ends of the computational domain.
    pub neumann_slopes: [(f64, f64); 2],
}

impl GameSpec {
    pub fn validate(&self) -> Result<()> {
        for p in Player::BOTH {
            let r = self.rho[p.index()];
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid(format!("discount rate of {p} must be positive, got {r}")));
            }
            let (l, h) = self.neumann_slopes[p.index()];
            if !(l.is_finite() && h.is_finite()) {
                return Err(invalid(format!("Neumann slopes of {p} must be finite")));
            }
        }
        Ok(())
    }

    pub fn rho(&self, p: Player) -> f64 {
        self.rho[p.index()]
    }

    pub fn payoff(&self, p: Player, x: f64) -> f64 {
        (self.running_payoff[p.index()])(x)
    }

    pub fn cost(&self, p: Player) -> &ImpulseFn {
        &self.cost[p.index()]
    }

    pub fn gain(&self, p: Player) -> &ImpulseFn {
        &self.gain[p.index()]
    }

    pub fn slopes(&self, p: Player) -> (f64, f64) {
        self.neumann_slopes[p.index()]
    }

    /// Same game with `p`'s running payoff replaced.
    pub fn with_payoff(mut self, p: Player, f: ScalarFn) -> Self {
        self.running_payoff[p.index()] = f;
        self
    }
}

impl fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameSpec")
            .field("name", &self.name)
            .field("rho", &self.rho)
            .field("cost", &self.cost)
            .field("gain", &self.gain)
            .field("neumann_slopes", &self.neumann_slopes)
            .finish_non_exhaustive()
    }
}

/// Cost and gain coefficients shared by all three families:
/// intervening costs `c + λ|δ|`, suffering the opponent's intervention pays
/// `c̃ + λ̃|δ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub c: f64,
    pub c_tilde: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
}

impl CostParams {
    pub fn validate(&self, rho: f64) -> Result<()> {
        let CostParams { c, c_tilde, lambda, lambda_tilde } = *self;
        if ![c, c_tilde, lambda, lambda_tilde].iter().all(|v| v.is_finite()) {
            return Err(invalid("cost and gain coefficients must be finite"));
        }
        if !(0.0 <= c_tilde && c_tilde <= c) {
            return Err(invalid(format!("need 0 <= c_tilde <= c, got c_tilde = {c_tilde}, c = {c}")));
        }
        if !(0.0 <= lambda_tilde && lambda_tilde <= lambda) {
            return Err(invalid(format!(
                "need 0 <= lambda_tilde <= lambda, got lambda_tilde = {lambda_tilde}, lambda = {lambda}"
            )));
        }
        if c == c_tilde && lambda == lambda_tilde {
            return Err(invalid("need (c, lambda) != (c_tilde, lambda_tilde)"));
        }
        if 1.0 - rho * lambda <= 0.0 {
            return Err(invalid(format!("need 1 - rho*lambda > 0, got {}", 1.0 - rho * lambda)));
        }
        Ok(())
    }

    pub fn cost_fn(&self) -> ImpulseFn {
        ImpulseFn::linear(-self.c, -self.lambda)
    }

    pub fn gain_fn(&self) -> ImpulseFn {
        ImpulseFn::linear(self.c_tilde, self.lambda_tilde)
    }

    /// Neumann slopes for `[left-end intervener, right-end intervener]`.
    ///
    /// Far left the left intervener pays `c + λ(y* − x)`, so its value has slope
    /// `λ`; far right it collects `c̃ + λ̃(x − y*)` from the opponent's push,
    /// slope `λ̃`. The right intervener mirrors this.
    fn slopes_by_side(&self) -> [(f64, f64); 2] {
        [(self.lambda, self.lambda_tilde), (-self.lambda_tilde, -self.lambda)]
    }
}

fn check_diffusion(rho: f64, sigma: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Linear-payoff game with a closed-form solution: player 1 earns `x − s1`,
/// player 2 earns `s2 − x`, the state is a driftless Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkParams {
    pub sigma: f64,
    pub rho: f64,
    pub s1: f64,
    pub s2: f64,
    #[serde(flatten)]
    pub costs: CostParams,
}

impl BenchmarkParams {
    pub fn validate(&self) -> Result<()> {
        check_diffusion(self.rho, self.sigma)?;
        if !(self.s1 < self.s2) {
            return Err(invalid(format!("need s1 < s2, got s1 = {}, s2 = {}", self.s1, self.s2)));
        }
        self.costs.validate(self.rho)
    }

    pub fn s_tilde(&self) -> f64 {
        0.5 * (self.s1 + self.s2)
    }
}

/// Benchmark variant with concave parabolic payoffs `−(x − rL)(x − rR)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicParams {
    pub sigma: f64,
    pub rho: f64,
    /// `(r_L, r_R)` per player.
    pub roots: [(f64, f64); 2],
    #[serde(flatten)]
    pub costs: CostParams,
}

impl ParabolicParams {
    pub fn validate(&self) -> Result<()> {
        check_diffusion(self.rho, self.sigma)?;
        for (i, &(l, r)) in self.roots.iter().enumerate() {
            if !(l < r) {
                return Err(invalid(format!("player {} roots need r_L < r_R, got ({l}, {r})", i + 1)));
            }
        }
        self.costs.validate(self.rho)
    }

    pub fn vertex(&self, p: Player) -> f64 {
        let (l, r) = self.roots[p.index()];
        0.5 * (l + r)
    }
}

/// Benchmark with payoffs capped at `cap` (K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CappedParams {
    #[serde(flatten)]
    pub benchmark: BenchmarkParams,
    pub cap: f64,
}

impl CappedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cap > 0.0 && self.cap.is_finite()) {
            return Err(invalid(format!("cap K must be positive, got {}", self.cap)));
        }
        self.benchmark.validate()
    }
}

fn constant(v: f64) -> ScalarFn {
    Arc::new(move |_| v)
}

fn linear_game(name: &str, sigma: f64, rho: f64, costs: &CostParams, payoffs: [ScalarFn; 2]) -> GameSpec {
    GameSpec {
        name: name.to_string(),
        drift: constant(0.0),
        volatility: constant(sigma),
        rho: [rho, rho],
        running_payoff: payoffs,
        cost: [costs.cost_fn(), costs.cost_fn()],
        gain: [costs.gain_fn(), costs.gain_fn()],
        neumann_slopes: costs.slopes_by_side(),
    }
}

pub fn build_benchmark(params: &BenchmarkParams) -> Result<GameSpec> {
    params.validate()?;
    let (s1, s2) = (params.s1, params.s2);
    Ok(linear_game(
        "benchmark",
        params.sigma,
        params.rho,
        &params.costs,
        [Arc::new(move |x| x - s1), Arc::new(move |x| s2 - x)],
    ))
}

pub fn build_parabolic(params: &ParabolicParams) -> Result<GameSpec> {
    params.validate()?;
    let [(l1, r1), (l2, r2)] = params.roots;
    let mut game = linear_game(
        "parabolic",
        params.sigma,
        params.rho,
        &params.costs,
        [Arc::new(move |x| -(x - l1) * (x - r1)), Arc::new(move |x| -(x - l2) * (x - r2))],
    );
    // The player whose payoff peaks further right defends the left end.
    let by_side = params.costs.slopes_by_side();
    game.neumann_slopes = if params.vertex(Player::One) >= params.vertex(Player::Two) {
        by_side
    } else {
        [by_side[1], by_side[0]]
    };
    Ok(game)
}

pub fn build_capped(params: &CappedParams) -> Result<GameSpec> {
    params.validate()?;
    let b = &params.benchmark;
    let (s1, s2, k) = (b.s1, b.s2, params.cap);
    let mut game = linear_game(
        "capped",
        b.sigma,
        b.rho,
        &b.costs,
        [Arc::new(move |x| (x - s1).min(k)), Arc::new(move |x| (s2 - x).min(k))],
    );
    game.name = "capped".into();
    Ok(game)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn fig4_right() -> BenchmarkParams {
        BenchmarkParams {
            sigma: 0.25,
            rho: 0.03,
            s1: -2.0,
            s2: 2.0,
            costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 4.0, lambda_tilde: 3.0 },
        }
    }

    #[test]
    fn benchmark_accepts_fig4_right() {
        let p = fig4_right();
        assert!((1.0 - p.rho * p.costs.lambda - 0.88).abs() < 1e-12);
        let g = build_benchmark(&p).unwrap();
        assert_eq!(g.payoff(Player::One, p.s1), 0.0);
        assert_eq!(g.payoff(Player::Two, p.s2), 0.0);
        assert_eq!(g.slopes(Player::One), (4.0, 3.0));
        assert_eq!(g.slopes(Player::Two), (-3.0, -4.0));
    }

    #[test]
    fn benchmark_rejects_equal_cost_and_gain() {
        let mut p = fig4_right();
        p.costs.c_tilde = p.costs.c;
        p.costs.lambda_tilde = p.costs.lambda;
        let err = build_benchmark(&p).unwrap_err();
        assert!(err.to_string().contains("(c, lambda) != (c_tilde, lambda_tilde)"), "{err}");
    }

    #[test]
    fn benchmark_rejects_large_lambda() {
        let mut p = fig4_right();
        p.costs.lambda = 40.0;
        let err = build_benchmark(&p).unwrap_err();
        assert!(err.to_string().contains("1 - rho*lambda"), "{err}");
    }

    #[test]
    fn parabolic_roots_and_vertex() {
        let p = ParabolicParams {
            sigma: 0.25,
            rho: 0.03,
            roots: [(-4.5, 1.0), (-PI, 2.7)],
            costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 0.0, lambda_tilde: 0.0 },
        };
        let g = build_parabolic(&p).unwrap();
        assert_eq!(g.payoff(Player::One, -4.5), 0.0);
        assert_eq!(g.payoff(Player::One, 1.0), 0.0);
        assert_eq!(p.vertex(Player::One), -1.75);
        assert!((g.payoff(Player::Two, 0.0) - PI * 2.7).abs() < 1e-12);

        let mut bad = p;
        bad.roots[1] = (3.0, 2.0);
        assert!(build_parabolic(&bad).is_err());
    }

    #[test]
    fn parabolic_slopes_follow_vertex_order() {
        let p = ParabolicParams {
            sigma: 0.25,
            rho: 0.03,
            roots: [(-4.5, 1.0), (-PI, 2.7)],
            costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 2.0, lambda_tilde: 1.0 },
        };
        let g = build_parabolic(&p).unwrap();
        // player 1 peaks left, so player 2 defends the left end
        assert_eq!(g.slopes(Player::Two), (2.0, 1.0));
        assert_eq!(g.slopes(Player::One), (-1.0, -2.0));
    }

    #[test]
    fn capped_payoff() {
        let mut b = fig4_right();
        b.s1 = -PI / 3.0;
        b.s2 = PI / 3.0;
        let g = build_capped(&CappedParams { benchmark: b, cap: 5.0 }).unwrap();
        let raw = build_benchmark(&b).unwrap();
        for x in [5.0 + b.s1, 6.0, 100.0] {
            assert_eq!(g.payoff(Player::One, x), 5.0);
        }
        assert_eq!(g.payoff(Player::One, b.s1), 0.0);
        for i in 0..=200 {
            let x = -10.0 + 0.1 * i as f64;
            for p in Player::BOTH {
                let f = raw.payoff(p, x);
                assert_eq!(g.payoff(p, x), f.min(5.0));
            }
        }
        assert!(build_capped(&CappedParams { benchmark: b, cap: 0.0 }).is_err());
    }

    #[test]
    fn transfers_lose_value() {
        let g = build_benchmark(&fig4_right()).unwrap();
        for p in Player::BOTH {
            assert_eq!(g.cost(p).eval(0.3, 0.0), -100.0);
            let mut strict = false;
            for k in -20..=20 {
                let d = 0.5 * k as f64;
                let net = g.cost(p).eval(1.0, d) + g.gain(p.other()).eval(1.0, d);
                assert!((net - (-(100.0 - 30.0) - (4.0 - 3.0) * d.abs())).abs() < 1e-12);
                assert!(net <= 0.0);
                strict |= net < 0.0;
            }
            assert!(strict);
        }
    }
}

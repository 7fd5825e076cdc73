//! Euler–Maruyama simulation of the controlled state under a pair of
//! threshold strategies, and Monte Carlo estimates of the players' objectives.
//!
//! Interventions are checked at `t = 0` and after every step. Player 1 has
//! priority when both would intervene. Each path draws from its own ChaCha
//! stream derived from `(seed, path index)`, so results do not depend on the
//! thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{GameSpec, Player};
use crate::solver::Strategy;

/// Interventions allowed at a single time instant before the pair is declared pathological.
pub const INTERVENTION_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub x0: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { horizon: 1000.0, dt: 0.001, paths: 200, seed: 0, x0: 0.0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(invalid(format!("need 0 < dt <= horizon, got dt = {}", self.dt)));
        }
        if self.paths < 1 {
            return Err(invalid("need at least one path"));
        }
        if !self.x0.is_finite() {
            return Err(invalid("x0 must be finite"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intervention {
    pub time: f64,
    pub player: Player,
    pub delta: f64,
    pub pre: f64,
    pub post: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// State at each time, after any interventions at that instant.
    pub states: Vec<f64>,
    pub interventions: Vec<Intervention>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr }
    }
}

/// Applies interventions at one instant until both players continue.
fn settle(strategies: &[Strategy; 2], time: f64, x: &mut f64, mut record: impl FnMut(Intervention)) -> Result<()> {
    for _ in 0..INTERVENTION_CAP {
        let Some(player) = Player::BOTH.into_iter().find(|p| !strategies[p.index()].continues(*x)) else {
            return Ok(());
        };
        let post = strategies[player.index()].target(*x).expect("intervention region without impulses");
        record(Intervention { time, player, delta: post - *x, pre: *x, post });
        *x = post;
    }
    if Player::BOTH.into_iter().all(|p| strategies[p.index()].continues(*x)) {
        return Ok(());
    }
    Err(Error::InterventionLoop { time, state: *x, cap: INTERVENTION_CAP })
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// One path (path index 0 of `cfg.seed`), with every state recorded.
pub fn simulate(game: &GameSpec, strategies: &[Strategy; 2], cfg: &SimConfig) -> Result<Trajectory> {
    simulate_path(game, strategies, cfg, 0)
}

pub fn simulate_path(game: &GameSpec, strategies: &[Strategy; 2], cfg: &SimConfig, path: usize) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.steps();
    let mut rng = path_rng(cfg.seed, path);
    let sqrt_dt = cfg.dt.sqrt();
    let mut out = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        interventions: Vec::new(),
    };
    let mut x = cfg.x0;
    settle(strategies, 0.0, &mut x, |iv| out.interventions.push(iv))?;
    out.times.push(0.0);
    out.states.push(x);
    for k in 1..=n {
        let z: f64 = rng.sample(StandardNormal);
        x += (game.drift)(x) * cfg.dt + (game.volatility)(x) * sqrt_dt * z;
        let t = k as f64 * cfg.dt;
        settle(strategies, t, &mut x, |iv| out.interventions.push(iv))?;
        out.times.push(t);
        out.states.push(x);
    }
    Ok(out)
}

/// Truncated discounted objectives of both players along one path.
fn path_objective(game: &GameSpec, strategies: &[Strategy; 2], cfg: &SimConfig, path: usize) -> Result<[f64; 2]> {
    let n = cfg.steps();
    let mut rng = path_rng(cfg.seed, path);
    let sqrt_dt = cfg.dt.sqrt();
    let step_discount = game.rho.map(|r| (-r * cfg.dt).exp());
    let mut discount = [1.0, 1.0];
    let mut total = [0.0, 0.0];
    let mut x = cfg.x0;
    let book = |iv: Intervention, discount: &[f64; 2], total: &mut [f64; 2]| {
        let actor = iv.player;
        let other = actor.other();
        total[actor.index()] += discount[actor.index()] * game.cost(actor).eval(iv.pre, iv.delta);
        total[other.index()] += discount[other.index()] * game.gain(other).eval(iv.pre, iv.delta);
    };
    let mut pending = Vec::new();
    for k in 0..n {
        pending.clear();
        settle(strategies, k as f64 * cfg.dt, &mut x, |iv| pending.push(iv))?;
        for iv in &pending {
            book(*iv, &discount, &mut total);
        }
        for p in Player::BOTH {
            let i = p.index();
            total[i] += discount[i] * game.payoff(p, x) * cfg.dt;
            discount[i] *= step_discount[i];
        }
        let z: f64 = rng.sample(StandardNormal);
        x += (game.drift)(x) * cfg.dt + (game.volatility)(x) * sqrt_dt * z;
    }
    Ok(total)
}

/// Monte Carlo mean and standard error of `Ĵⁱ_T` for both players.
pub fn estimate_objective(game: &GameSpec, strategies: &[Strategy; 2], cfg: &SimConfig) -> Result<[Estimate; 2]> {
    cfg.validate()?;
    let samples: Vec<[f64; 2]> =
        (0..cfg.paths).into_par_iter().map(|p| path_objective(game, strategies, cfg, p)).collect::<Result<_>>()?;
    Ok(Player::BOTH.map(|p| {
        let xs: Vec<f64> = samples.iter().map(|s| s[p.index()]).collect();
        Estimate::from_samples(&xs)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    /// Scale the post-jump target coordinates.
    #[default]
    Target,
    /// Scale the jump size `target − x`.
    Shift,
}

pub const DEFAULT_MAGNITUDE: f64 = 0.25;
const MAX_REDRAWS: usize = 100;

/// Multiplies the finite threshold coordinates by `1 ± magnitude·U` and the
/// targets (or jump sizes) by an independent such factor.
pub fn perturb_strategy(s: &Strategy, magnitude: f64, seed: u64, mode: PerturbMode) -> Result<Strategy> {
    if !(0.0..1.0).contains(&magnitude) {
        return Err(invalid(format!("perturbation magnitude must lie in [0, 1), got {magnitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.random();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        1.0 + sign * magnitude * u
    };
    for _ in 0..MAX_REDRAWS {
        let a = factor(&mut rng);
        let b = factor(&mut rng);
        let mut out = s.clone();
        for iv in &mut out.intervals {
            if iv.lower.is_finite() {
                iv.lower *= a;
            }
            if iv.upper.is_finite() {
                iv.upper *= a;
            }
        }
        match mode {
            PerturbMode::Target => out.impulses.iter_mut().for_each(|p| p.target *= b),
            PerturbMode::Shift => out.shift_scale *= b,
        }
        if out.intervals.iter().all(|iv| iv.lower < iv.upper) && out.targets_continue() {
            return Ok(out);
        }
    }
    Err(Error::PerturbationFailed(MAX_REDRAWS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{ContinuationInterval, ImpulsePoint};
    use std::sync::Arc;

    fn game(mu: f64, sigma: f64, f: f64) -> GameSpec {
        let costs = crate::game::CostParams { c: 10.0, c_tilde: 1.0, lambda: 2.0, lambda_tilde: 1.0 };
        GameSpec {
            name: "sim".into(),
            drift: Arc::new(move |_| mu),
            volatility: Arc::new(move |_| sigma),
            rho: [0.1, 0.2],
            running_payoff: [Arc::new(move |_| f), Arc::new(|x| x)],
            cost: [costs.cost_fn(), costs.cost_fn()],
            gain: [costs.gain_fn(), costs.gain_fn()],
            neumann_slopes: [(0.0, 0.0); 2],
        }
    }

    fn barrier(player: Player, lower: f64, upper: f64, from: f64, to: f64) -> Strategy {
        Strategy {
            player,
            intervals: vec![ContinuationInterval { first: 0, last: 0, lower, upper }],
            impulses: vec![ImpulsePoint { x: from, target: to }],
            shift_scale: 1.0,
        }
    }

    #[test]
    fn frozen_state() {
        let g = game(0.0, 0.0, 1.0);
        let s = [Strategy::passive(Player::One), Strategy::passive(Player::Two)];
        let cfg = SimConfig { horizon: 1.0, dt: 0.1, paths: 1, seed: 3, x0: 0.4 };
        let tr = simulate(&g, &s, &cfg).unwrap();
        assert_eq!(tr.states.len(), 11);
        assert!(tr.states.iter().all(|&x| x == 0.4));
        assert!(tr.interventions.is_empty());
    }

    #[test]
    fn threshold_crossing_jumps_to_target() {
        let g = game(1.0, 0.0, 1.0);
        let s = [barrier(Player::One, f64::NEG_INFINITY, 0.5, 0.5, -0.2), Strategy::passive(Player::Two)];
        let cfg = SimConfig { horizon: 1.0, dt: 0.1, paths: 1, seed: 0, x0: 0.0 };
        let tr = simulate(&g, &s, &cfg).unwrap();
        let iv = tr.interventions[0];
        assert_eq!(iv.player, Player::One);
        assert!(iv.pre >= 0.5 && iv.pre < 0.5 + 0.1 + 1e-12);
        assert_eq!(iv.post, -0.2);
        assert!((iv.pre + iv.delta - iv.post).abs() < 1e-15);
    }

    #[test]
    fn player_one_has_priority() {
        let g = game(0.0, 0.0, 1.0);
        let s = [barrier(Player::One, 0.0, f64::INFINITY, 0.0, 1.0), barrier(Player::Two, f64::NEG_INFINITY, 0.0, 0.0, -1.0)];
        let cfg = SimConfig { horizon: 1.0, dt: 0.5, paths: 1, seed: 0, x0: -0.5 };
        assert!(matches!(simulate(&g, &s, &cfg), Err(Error::InterventionLoop { .. })));
        let s = [barrier(Player::One, -1.0, f64::INFINITY, -1.0, 0.5), barrier(Player::Two, f64::NEG_INFINITY, 1.0, 1.0, 0.0)];
        let cfg = SimConfig { x0: -3.0, ..cfg };
        let tr = simulate(&g, &s, &cfg).unwrap();
        assert_eq!(tr.interventions.len(), 1);
        assert_eq!(tr.interventions[0].player, Player::One);
    }

    #[test]
    fn deterministic_integrand() {
        let g = game(0.0, 0.3, 1.0);
        let s = [Strategy::passive(Player::One), Strategy::passive(Player::Two)];
        let cfg = SimConfig { horizon: 20.0, dt: 1e-3, paths: 8, seed: 1, x0: 0.0 };
        let [e1, _] = estimate_objective(&g, &s, &cfg).unwrap();
        let exact = (1.0 - (-0.1f64 * 20.0).exp()) / 0.1;
        // left rectangles overshoot by about dt/2 times the integral of the weight's decay
        assert!((e1.mean - exact).abs() < cfg.dt, "{} {exact}", e1.mean);
        assert!(e1.stderr < 1e-12);
    }

    #[test]
    fn reproducible() {
        let g = game(0.0, 0.5, 1.0);
        let s = [barrier(Player::One, -0.5, f64::INFINITY, -0.5, 0.0), barrier(Player::Two, f64::NEG_INFINITY, 0.5, 0.5, 0.1)];
        let cfg = SimConfig { horizon: 5.0, dt: 0.01, paths: 16, seed: 42, x0: 0.0 };
        let a = estimate_objective(&g, &s, &cfg).unwrap();
        let b = estimate_objective(&g, &s, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(simulate(&g, &s, &cfg).unwrap(), simulate(&g, &s, &cfg).unwrap());
    }

    #[test]
    fn perturbation() {
        let s = barrier(Player::One, -1.0, f64::INFINITY, -1.0, 0.5);
        assert_eq!(perturb_strategy(&s, 0.0, 9, PerturbMode::Target).unwrap(), s);
        let p = perturb_strategy(&s, 0.25, 9, PerturbMode::Target).unwrap();
        let ratio = p.intervals[0].lower / s.intervals[0].lower;
        assert!((0.75..=1.25).contains(&ratio));
        assert!(p.targets_continue());
        let q = perturb_strategy(&s, 0.25, 9, PerturbMode::Shift).unwrap();
        assert!((0.75..=1.25).contains(&q.shift_scale));
        assert!(perturb_strategy(&s, 1.0, 9, PerturbMode::Target).is_err());
    }
}

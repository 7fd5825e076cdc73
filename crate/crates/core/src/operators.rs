//! Discrete operators on an equispaced grid: the upwind generator with
//! Neumann ghost-node elimination, the loss and gain intervention operators,
//! and the restriction of one player's QVI to a subgrid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, ImpulseFn, Player};
use crate::grid::{Field, Grid};
use crate::tridiag::Tridiagonal;

/// Below this many (source, target) pairs the impulse scan stays sequential.
const PAR_THRESHOLD: usize = 1 << 16;

#[inline]
fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete generator `𝔸` of the uncontrolled diffusion for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGenerator {
    pub matrix: Tridiagonal,
    /// Constant terms produced by eliminating the two ghost nodes; nonzero
    /// only at the boundary rows.
    pub bc_correction: Field,
}

impl DiscreteGenerator {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.apply(v)
    }
}

pub fn build_generator(grid: &Grid, game: &GameSpec, player: Player) -> Result<DiscreteGenerator> {
    let n = grid.len();
    let h = grid.h();
    let (slope_left, slope_right) = game.slopes(player);
    let mut a = Tridiagonal::zeros(n);
    for k in 0..n {
        let x = grid.x(k);
        let mu = (game.drift)(x);
        let sigma = (game.volatility)(x);
        if !(mu.is_finite() && sigma.is_finite()) {
            return Err(Error::NonFinite { node: k });
        }
        if sigma == 0.0 && mu == 0.0 {
            return Err(Error::DegenerateRow { node: k, x });
        }
        let diffusion = 0.5 * sigma * sigma / (h * h);
        let (down, up) = if sgn(mu) > 0.0 { (0.0, mu / h) } else { (-mu / h, 0.0) };
        a.lower[k] = diffusion + down;
        a.upper[k] = diffusion + up;
        a.diag[k] = -(a.lower[k] + a.upper[k]);
    }
    let mut correction = Field::zeros(n);
    // ghost V(x_min - h) = V(x_min) - h * slope_left
    correction[0] = -a.lower[0] * h * slope_left;
    a.diag[0] += a.lower[0];
    a.lower[0] = 0.0;
    // ghost V(x_max + h) = V(x_max) + h * slope_right
    correction[n - 1] += a.upper[n - 1] * h * slope_right;
    a.diag[n - 1] += a.upper[n - 1];
    a.upper[n - 1] = 0.0;
    Ok(DiscreteGenerator { matrix: a, bc_correction: correction })
}

/// For each source point `x`, the best `values[j] + φ(x, to[j] − x)` and the
/// smallest index `j` attaining it.
pub(crate) fn best_impulse(from: &[f64], to: &[f64], values: &[f64], cost: &ImpulseFn) -> (Vec<f64>, Vec<usize>) {
    match cost {
        &ImpulseFn::Linear { fixed, proportional } if proportional <= 0.0 => {
            sweep_linear(from, to, values, fixed, proportional)
        }
        &ImpulseFn::Linear { fixed, proportional } => {
            scan(from, to, values, move |_, d: f64| fixed + proportional * d.abs())
        }
        ImpulseFn::Custom(f) => scan(from, to, values, |x, d| f(x, d)),
    }
}

/// `O(n)` maximisation for `φ = fixed + p|δ|` with `p ≤ 0`; `from` and `to`
/// must be increasing. Destinations left of `x` are ranked by `V(y) − p y`,
/// those right of `x` by `V(y) + p y`.
fn sweep_linear(from: &[f64], to: &[f64], values: &[f64], fixed: f64, p: f64) -> (Vec<f64>, Vec<usize>) {
    let n = to.len();
    let mut prefix = Vec::with_capacity(n);
    let mut best = 0;
    for j in 0..n {
        if values[j] - p * to[j] > values[best] - p * to[best] {
            best = j;
        }
        prefix.push(best);
    }
    let mut suffix = vec![0; n];
    let mut best = n.saturating_sub(1);
    for j in (0..n).rev() {
        if values[j] + p * to[j] >= values[best] + p * to[best] {
            best = j;
        }
        suffix[j] = best;
    }
    let eval = |x: f64, j: usize| values[j] + (fixed + p * (to[j] - x).abs());
    let mut out = Vec::with_capacity(from.len());
    let mut arg = Vec::with_capacity(from.len());
    // first index with to[j] >= x, and one past the last with to[j] <= x
    let (mut ge, mut le_end) = (0, 0);
    for &x in from {
        while ge < n && to[ge] < x {
            ge += 1;
        }
        while le_end < n && to[le_end] <= x {
            le_end += 1;
        }
        let left = (le_end > 0).then(|| prefix[le_end - 1]);
        let right = (ge < n).then(|| suffix[ge]);
        let j = match (left, right) {
            (Some(l), Some(r)) => {
                if eval(x, l) >= eval(x, r) {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => {
                out.push(f64::NEG_INFINITY);
                arg.push(0);
                continue;
            }
        };
        out.push(eval(x, j));
        arg.push(j);
    }
    (out, arg)
}

fn scan<F>(from: &[f64], to: &[f64], values: &[f64], phi: F) -> (Vec<f64>, Vec<usize>)
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let one = |&x: &f64| {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (j, (&y, &v)) in to.iter().zip(values).enumerate() {
            let cand = v + phi(x, y - x);
            if cand > best {
                best = cand;
                arg = j;
            }
        }
        (best, arg)
    };
    let pairs: Vec<(f64, usize)> = if from.len() * to.len() >= PAR_THRESHOLD {
        from.par_iter().map(one).collect()
    } else {
        from.iter().map(one).collect()
    };
    pairs.into_iter().unzip()
}

/// Discrete loss operator `𝕄ᵢV` together with the chosen destinations.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub values: Field,
    /// Destination node per source node: the smallest index among maximisers.
    pub target: Vec<usize>,
}

impl LossResult {
    /// `𝕄V − V`, the net gain of intervening at each node.
    pub fn excess(&self, v: &[f64]) -> Vec<f64> {
        self.values.iter().zip(v).map(|(m, v)| m - v).collect()
    }
}

pub fn loss_operator(grid: &Grid, v: &[f64], game: &GameSpec, player: Player) -> Result<LossResult> {
    grid.check(v)?;
    if let Some(node) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { node });
    }
    let (values, target) = best_impulse(grid.nodes(), grid.nodes(), v, game.cost(player));
    Ok(LossResult { values: Field(values), target })
}

/// `ℍᵢ(Vⱼ)Vᵢ`: player `player`'s value after the opponent jumps to its
/// loss-operator destination, plus the compensation gain.
pub fn gain_operator(
    grid: &Grid,
    v: &[f64],
    opponent_loss: &LossResult,
    game: &GameSpec,
    player: Player,
) -> Result<Field> {
    grid.check(v)?;
    if opponent_loss.target.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: opponent_loss.target.len() });
    }
    let gain = game.gain(player);
    let nodes = grid.nodes();
    Ok(Field(
        opponent_loss
            .target
            .iter()
            .enumerate()
            .map(|(k, &t)| v[t] + gain.eval(nodes[k], nodes[t] - nodes[k]))
            .collect(),
    ))
}

/// How intervention destinations outside the subgrid enter the obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapMode {
    /// `max_{y∉𝕂} {H(y) + φ(x, y − x)}`, the exact exterior part of `𝕄ᵢ`.
    #[default]
    WithCost,
    /// The constant `max_{y∉𝕂} H(y)`, without intervention cost.
    Verbatim,
}

/// One player's QVI restricted to a subgrid `𝕂`:
/// `max{L V + g, max_y B^y V − V} = 0` on `𝕂`, where
/// `B^y V(x) = max{V(y) + φ(x, y − x), cap(x)}`.
#[derive(Debug, Clone)]
pub struct SubProblem {
    /// Grid indices of `𝕂`, increasing.
    pub nodes: Vec<usize>,
    pub positions: Vec<f64>,
    /// `𝔸_{𝕂,𝕂} − ρ Id` in the ordering of `nodes`.
    pub operator: Tridiagonal,
    /// `𝕗|_𝕂 + 𝔸_{𝕂,𝕊∖𝕂} H`.
    pub source: Vec<f64>,
    /// Obstacle floor contributed by exterior destinations; `-inf` when `𝕂 = 𝕊`.
    pub cap: Vec<f64>,
    pub cost: ImpulseFn,
}

impl SubProblem {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `L V + g`.
    pub fn pde_part(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.operator.apply(v);
        for (o, g) in out.iter_mut().zip(&self.source) {
            *o += g;
        }
        out
    }

    /// `max_{y∈𝕂} B^y V` at every node of `𝕂`.
    pub fn obstacle(&self, v: &[f64]) -> Vec<f64> {
        let (best, _) = best_impulse(&self.positions, &self.positions, v, &self.cost);
        best.into_iter().zip(&self.cap).map(|(b, &c)| b.max(c)).collect()
    }
}

/// Builds the sub-problem for one player on `nodes`, with the values outside
/// `nodes` frozen at `exterior`.
#[allow(clippy::too_many_arguments)]
pub fn restrict_subproblem(
    grid: &Grid,
    generator: &DiscreteGenerator,
    payoff: &[f64],
    rho: f64,
    nodes: &[usize],
    exterior: &[f64],
    cost: &ImpulseFn,
    cap_mode: CapMode,
) -> Result<SubProblem> {
    if nodes.is_empty() {
        return Err(Error::EmptySubgrid);
    }
    grid.check(payoff)?;
    grid.check(exterior)?;
    let n = grid.len();
    if nodes.windows(2).any(|w| w[0] >= w[1]) || nodes[nodes.len() - 1] >= n {
        return Err(Error::InvalidParameter("sub-grid indices must be increasing and on the grid".into()));
    }
    let a = &generator.matrix;
    let size = nodes.len();
    let mut op = Tridiagonal::zeros(size);
    let mut source = Vec::with_capacity(size);
    let mut inside = vec![false; n];
    for &k in nodes {
        inside[k] = true;
    }
    for (m, &k) in nodes.iter().enumerate() {
        op.diag[m] = a.diag[k] - rho;
        let mut g = payoff[k];
        if k > 0 {
            if inside[k - 1] {
                op.lower[m] = a.lower[k];
            } else {
                g += a.lower[k] * exterior[k - 1];
            }
        }
        if k + 1 < n {
            if inside[k + 1] {
                op.upper[m] = a.upper[k];
            } else {
                g += a.upper[k] * exterior[k + 1];
            }
        }
        source.push(g);
    }
    let positions: Vec<f64> = nodes.iter().map(|&k| grid.x(k)).collect();
    let outside: Vec<usize> = (0..n).filter(|&k| !inside[k]).collect();
    let cap = if outside.is_empty() {
        vec![f64::NEG_INFINITY; size]
    } else {
        match cap_mode {
            CapMode::Verbatim => {
                let h = outside.iter().map(|&k| exterior[k]).fold(f64::NEG_INFINITY, f64::max);
                vec![h; size]
            }
            CapMode::WithCost => {
                let ys: Vec<f64> = outside.iter().map(|&k| grid.x(k)).collect();
                let hs: Vec<f64> = outside.iter().map(|&k| exterior[k]).collect();
                best_impulse(&positions, &ys, &hs, cost).0
            }
        }
    };
    Ok(SubProblem { nodes: nodes.to_vec(), positions, operator: op, source, cap, cost: cost.clone() })
}

/// Grid, game, and the per-player generator and BC-adjusted payoff `𝕗ᵢ`.
#[derive(Debug, Clone)]
pub struct Discretisation {
    pub grid: Grid,
    pub game: GameSpec,
    pub generators: [DiscreteGenerator; 2],
    pub payoff: [Field; 2],
}

impl Discretisation {
    pub fn new(grid: Grid, game: GameSpec) -> Result<Self> {
        game.validate()?;
        let g1 = build_generator(&grid, &game, Player::One)?;
        let g2 = build_generator(&grid, &game, Player::Two)?;
        let payoff = [Player::One, Player::Two].map(|p| {
            let gen = if p == Player::One { &g1 } else { &g2 };
            let mut f = grid.sample(|x| game.payoff(p, x));
            for (v, c) in f.iter_mut().zip(gen.bc_correction.iter()) {
                *v += c;
            }
            f
        });
        Ok(Discretisation { grid, game, generators: [g1, g2], payoff })
    }

    pub fn generator(&self, p: Player) -> &DiscreteGenerator {
        &self.generators[p.index()]
    }

    pub fn payoff(&self, p: Player) -> &Field {
        &self.payoff[p.index()]
    }

    pub fn loss(&self, v: &[f64], p: Player) -> Result<LossResult> {
        loss_operator(&self.grid, v, &self.game, p)
    }

    pub fn gain(&self, v: &[f64], opponent_loss: &LossResult, p: Player) -> Result<Field> {
        gain_operator(&self.grid, v, opponent_loss, &self.game, p)
    }

    /// `𝔸V − ρV + 𝕗` on the whole grid.
    pub fn pde_residual(&self, v: &[f64], p: Player) -> Vec<f64> {
        let rho = self.game.rho(p);
        let av = self.generator(p).apply(v);
        av.iter().zip(v).zip(self.payoff(p).iter()).map(|((a, v), f)| a - rho * v + f).collect()
    }

    pub fn subproblem(&self, p: Player, nodes: &[usize], exterior: &[f64], cap_mode: CapMode) -> Result<SubProblem> {
        restrict_subproblem(
            &self.grid,
            self.generator(p),
            self.payoff(p),
            self.game.rho(p),
            nodes,
            exterior,
            self.game.cost(p),
            cap_mode,
        )
    }

    pub fn full_subproblem(&self, p: Player) -> Result<SubProblem> {
        let all: Vec<usize> = (0..self.grid.len()).collect();
        let dummy = vec![0.0; self.grid.len()];
        self.subproblem(p, &all, &dummy, CapMode::WithCost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{build_benchmark, BenchmarkParams, CostParams};
    use std::sync::Arc;

    fn flat_game(sigma: f64, mu: f64, c: f64, lambda: f64) -> GameSpec {
        GameSpec {
            name: "test".into(),
            drift: Arc::new(move |_| mu),
            volatility: Arc::new(move |_| sigma),
            rho: [0.05, 0.05],
            running_payoff: [Arc::new(|x| -x * x), Arc::new(|x| x)],
            cost: [ImpulseFn::linear(-c, -lambda), ImpulseFn::linear(-c, -lambda)],
            gain: [ImpulseFn::linear(1.0, 0.5), ImpulseFn::linear(1.0, 0.5)],
            neumann_slopes: [(0.0, 0.0), (0.0, 0.0)],
        }
    }

    #[test]
    fn driftless_interior_stencil() {
        let grid = Grid::new(-1.0, 1.0, 10).unwrap();
        let gen = build_generator(&grid, &flat_game(0.3, 0.0, 1.0, 0.0), Player::One).unwrap();
        let w = 0.5 * 0.09 / (grid.h() * grid.h());
        for k in 1..10 {
            assert!((gen.matrix.lower[k] - w).abs() < 1e-12);
            assert!((gen.matrix.upper[k] - w).abs() < 1e-12);
            assert!((gen.matrix.diag[k] + 2.0 * w).abs() < 1e-12);
        }
    }

    #[test]
    fn upwinding_follows_drift_sign() {
        let grid = Grid::new(-1.0, 1.0, 10).unwrap();
        let h = grid.h();
        let pos = build_generator(&grid, &flat_game(0.0, 2.0, 1.0, 0.0), Player::One).unwrap();
        assert_eq!(pos.matrix.lower[5], 0.0);
        assert!((pos.matrix.upper[5] - 2.0 / h).abs() < 1e-12);
        let neg = build_generator(&grid, &flat_game(0.0, -2.0, 1.0, 0.0), Player::One).unwrap();
        assert!((neg.matrix.lower[5] - 2.0 / h).abs() < 1e-12);
        assert_eq!(neg.matrix.upper[5], 0.0);
    }

    #[test]
    fn degenerate_row_is_reported() {
        let grid = Grid::new(-1.0, 1.0, 4).unwrap();
        let err = build_generator(&grid, &flat_game(0.0, 0.0, 1.0, 0.0), Player::One).unwrap_err();
        assert!(matches!(err, Error::DegenerateRow { node: 0, .. }));
    }

    #[test]
    fn constant_field_is_annihilated() {
        let grid = Grid::new(-2.0, 3.0, 25).unwrap();
        for mu in [-0.7, 0.0, 1.3] {
            let gen = build_generator(&grid, &flat_game(0.4, mu, 1.0, 0.0), Player::Two).unwrap();
            let av = gen.apply(&vec![3.25; grid.len()]);
            assert!(av.iter().all(|&v| v == 0.0), "{av:?}");
            assert!(gen.bc_correction.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn boundary_correction_matches_ghost_elimination() {
        let p = BenchmarkParams {
            sigma: 0.25,
            rho: 0.03,
            s1: -2.0,
            s2: 2.0,
            costs: CostParams { c: 100.0, c_tilde: 30.0, lambda: 4.0, lambda_tilde: 3.0 },
        };
        let game = build_benchmark(&p).unwrap();
        let grid = Grid::new(-10.0, 10.0, 100).unwrap();
        let h = grid.h();
        let w = 0.5 * 0.25 * 0.25 / (h * h);
        let gen = build_generator(&grid, &game, Player::One).unwrap();
        assert!((gen.bc_correction[0] - (-w * h * 4.0)).abs() < 1e-12);
        assert!((gen.bc_correction[100] - (w * h * 3.0)).abs() < 1e-12);
        // an affine field with the prescribed slopes at both ends
        let v = grid.sample(|x| 4.0 * x);
        let av = gen.apply(&v);
        assert!((av[0] + gen.bc_correction[0]).abs() < 1e-9);
    }

    #[test]
    fn m_operator_rows() {
        let grid = Grid::new(-3.0, 2.0, 40).unwrap();
        for mu in [-1.0, 0.0, 0.5] {
            let disc = Discretisation::new(grid.clone(), flat_game(0.2, mu, 1.0, 0.0)).unwrap();
            let sub = disc.full_subproblem(Player::One).unwrap();
            assert!((0..sub.len()).all(|k| sub.operator.is_negated_m_row(k)));
        }
    }

    #[test]
    fn linear_sweep_matches_scan() {
        let from: Vec<f64> = (0..37).map(|k| -3.0 + 0.17 * k as f64).collect();
        let to: Vec<f64> = (0..23).map(|k| -2.5 + 0.23 * k as f64).collect();
        for seed in 0..20u64 {
            let values: Vec<f64> = to.iter().map(|y| ((y * 7.3 + seed as f64).sin() * 10.0).round() / 2.0).collect();
            for (c, lam) in [(-1.0, -0.5), (0.0, 0.0), (-100.0, -15.0), (-3.0, -4.0)] {
                let fast = sweep_linear(&from, &to, &values, c, lam);
                let slow = scan(&from, &to, &values, |_, d: f64| c + lam * d.abs());
                for k in 0..from.len() {
                    assert!((fast.0[k] - slow.0[k]).abs() < 1e-12);
                    assert_eq!(fast.1[k], slow.1[k], "seed {seed} node {k}");
                }
            }
        }
    }

    #[test]
    fn loss_constant_field_ties_to_first_node() {
        let grid = Grid::new(-1.0, 1.0, 8).unwrap();
        let game = flat_game(0.2, 0.0, 2.0, 0.0);
        let loss = loss_operator(&grid, &[0.0; 9], &game, Player::One).unwrap();
        assert!(loss.values.iter().all(|&v| v == -2.0));
        assert!(loss.target.iter().all(|&t| t == 0));
    }

    #[test]
    fn loss_unique_maximum() {
        let grid = Grid::new(-1.0, 1.0, 8).unwrap();
        let game = flat_game(0.2, 0.0, 2.0, 0.0);
        let v: Vec<f64> = (0..9).map(|k| if k == 5 { 7.0 } else { k as f64 * 0.1 }).collect();
        let loss = loss_operator(&grid, &v, &game, Player::Two).unwrap();
        assert!(loss.values.iter().all(|&m| m == 5.0));
        assert!(loss.target.iter().all(|&t| t == 5));
    }

    #[test]
    fn gain_of_constant_field() {
        let grid = Grid::new(-1.0, 1.0, 8).unwrap();
        let game = flat_game(0.2, 0.0, 2.0, 0.3);
        let vj: Vec<f64> = (0..9).map(|k| -((k as f64) - 3.0).powi(2)).collect();
        let loss = loss_operator(&grid, &vj, &game, Player::Two).unwrap();
        let out = gain_operator(&grid, &[4.0; 9], &loss, &game, Player::One).unwrap();
        for k in 0..9 {
            let t = loss.target[k];
            let expect = 4.0 + 1.0 + 0.5 * (grid.x(t) - grid.x(k)).abs();
            assert!((out[k] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn gain_with_stationary_opponent() {
        let grid = Grid::new(-1.0, 1.0, 6).unwrap();
        let game = flat_game(0.2, 0.0, 2.0, 0.3);
        let loss = LossResult { values: Field::zeros(7), target: (0..7).collect() };
        let vi: Vec<f64> = (0..7).map(|k| k as f64).collect();
        let out = gain_operator(&grid, &vi, &loss, &game, Player::One).unwrap();
        for k in 0..7 {
            assert_eq!(out[k], vi[k] + 1.0);
        }
    }

    #[test]
    fn gain_rejects_mismatched_grid() {
        let grid = Grid::new(-1.0, 1.0, 6).unwrap();
        let game = flat_game(0.2, 0.0, 2.0, 0.3);
        let loss = LossResult { values: Field::zeros(5), target: vec![0; 5] };
        assert!(matches!(
            gain_operator(&grid, &[0.0; 7], &loss, &game, Player::One),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn full_subgrid_has_no_cap() {
        let grid = Grid::new(-1.0, 1.0, 10).unwrap();
        let disc = Discretisation::new(grid, flat_game(0.3, 0.1, 1.0, 0.0)).unwrap();
        let sub = disc.full_subproblem(Player::One).unwrap();
        assert!(sub.cap.iter().all(|c| *c == f64::NEG_INFINITY));
        assert_eq!(sub.source, disc.payoff(Player::One).0);
        for k in 0..sub.len() {
            let a = &disc.generator(Player::One).matrix;
            assert_eq!(sub.operator.diag[k], a.diag[k] - 0.05);
        }
    }

    #[test]
    fn constant_exterior_only_touches_adjacent_rows() {
        let grid = Grid::new(-1.0, 1.0, 10).unwrap();
        let disc = Discretisation::new(grid, flat_game(0.3, 0.0, 1.0, 0.0)).unwrap();
        let nodes: Vec<usize> = (3..=7).collect();
        let ext = vec![2.5; 11];
        for mode in [CapMode::WithCost, CapMode::Verbatim] {
            let sub = disc.subproblem(Player::One, &nodes, &ext, mode).unwrap();
            let f = disc.payoff(Player::One);
            let a = &disc.generator(Player::One).matrix;
            assert_eq!(sub.source[0], f[3] + a.lower[3] * 2.5);
            assert_eq!(sub.source[4], f[7] + a.upper[7] * 2.5);
            for m in 1..4 {
                assert_eq!(sub.source[m], f[nodes[m]]);
            }
            assert_eq!(sub.operator.lower[0], 0.0);
            assert_eq!(sub.operator.upper[4], 0.0);
        }
        assert!(matches!(disc.subproblem(Player::One, &[], &ext, CapMode::WithCost), Err(Error::EmptySubgrid)));
    }

    #[test]
    fn cap_modes() {
        let grid = Grid::new(-1.0, 1.0, 4).unwrap();
        let disc = Discretisation::new(grid, flat_game(0.3, 0.0, 1.0, 2.0)).unwrap();
        let ext = vec![5.0, 0.0, 0.0, 0.0, 9.0];
        let verb = disc.subproblem(Player::One, &[1, 2, 3], &ext, CapMode::Verbatim).unwrap();
        assert_eq!(verb.cap, vec![9.0; 3]);
        let with = disc.subproblem(Player::One, &[1, 2, 3], &ext, CapMode::WithCost).unwrap();
        // x = -0.5: max(5 - 1 - 2*0.5, 9 - 1 - 2*1.5) = 5
        assert!((with.cap[0] - 5.0).abs() < 1e-14);
        // x = 0.5: max(5 - 1 - 2*1.5, 9 - 1 - 2*0.5) = 7
        assert!((with.cap[2] - 7.0).abs() < 1e-14);
    }
}

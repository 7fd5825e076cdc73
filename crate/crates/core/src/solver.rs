//! Relaxed policy iteration for the coupled system of QVIs of a two-player
//! impulse game.
//!
//! Every outer iteration splits the grid, per player `i`, into the opponent's
//! approximate continuation region `{𝕄ⱼVⱼ − Vⱼ < −r}` and its complement. On
//! the complement `Vᵢ` is updated by the gain operator; on the continuation
//! region a single QVI is solved by [`solve_howard`]. The relaxation `r`
//! decays geometrically to the tolerance `ε`, and convergence is declared
//! when the largest pointwise residual of the full system drops below `ε`.

use std::fmt;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{GameSpec, Player};
use crate::grid::{Field, Grid};
use crate::howard::{solve_howard, HowardConfig};
use crate::operators::{CapMode, Discretisation, LossResult};

/// Whether player 2's update reads player 1's old or freshly updated iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    #[default]
    Jacobi,
    GaussSeidel,
}

/// Where the gain and PDE residual terms are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    /// Gain residual on the opponent's intervention region, PDE residual on
    /// its continuation region.
    #[default]
    System,
    /// The transposed indicator placement.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub eps: f64,
    pub alpha: f64,
    pub r0: f64,
    pub k_max: usize,
    pub inner: HowardConfig,
    pub update: UpdateOrder,
    pub residual: ResidualMode,
    pub exterior_cap: CapMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-8,
            alpha: 0.8,
            r0: 1.0,
            k_max: 500,
            inner: HowardConfig::default(),
            update: UpdateOrder::Jacobi,
            residual: ResidualMode::System,
            exterior_cap: CapMode::WithCost,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.r0 >= self.eps && self.r0.is_finite()) {
            return Err(invalid(format!("r0 must be finite and at least eps, got {}", self.r0)));
        }
        if self.k_max < 1 {
            return Err(invalid("k_max must be at least 1"));
        }
        self.inner.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// `(𝕄ᵢVᵢ − Vᵢ)⁺`
    Obstacle,
    /// `|ℍᵢVᵢ − Vᵢ|`
    Gain,
    /// `|max{𝔸Vᵢ − ρᵢVᵢ + 𝕗ᵢ, 𝕄ᵢVᵢ − Vᵢ}|`
    Pde,
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualKind::Obstacle => "obstacle",
            ResidualKind::Gain => "gain",
            ResidualKind::Pde => "pde",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeResidual {
    pub value: f64,
    pub kind: ResidualKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstResidual {
    pub player: Player,
    pub node: usize,
    pub value: f64,
    pub kind: ResidualKind,
}

/// Per player and node, the largest residual term and which relation it belongs to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualBreakdown {
    pub players: [Vec<NodeResidual>; 2],
}

impl ResidualBreakdown {
    pub fn player(&self, p: Player) -> &[NodeResidual] {
        &self.players[p.index()]
    }

    pub fn worst(&self) -> Option<WorstResidual> {
        let mut best: Option<WorstResidual> = None;
        for p in Player::BOTH {
            for (node, r) in self.player(p).iter().enumerate() {
                if best.is_none_or(|b| r.value > b.value) {
                    best = Some(WorstResidual { player: p, node, value: r.value, kind: r.kind });
                }
            }
        }
        best
    }

    pub fn worst_for(&self, p: Player) -> Option<WorstResidual> {
        let mut best: Option<WorstResidual> = None;
        for (node, r) in self.player(p).iter().enumerate() {
            if best.is_none_or(|b| r.value > b.value) {
                best = Some(WorstResidual { player: p, node, value: r.value, kind: r.kind });
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The opponent's approximate continuation region became empty.
    Degenerate { player: Player, iteration: usize },
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub values: [Field; 2],
    pub status: SolveStatus,
    pub iterations: usize,
    /// `R` after each outer iteration.
    pub residual_history: Vec<f64>,
    /// Relaxation `r` used in each outer iteration.
    pub relaxation_history: Vec<f64>,
    /// Howard iterations per outer iteration and player.
    pub inner_iterations: Vec<[usize; 2]>,
    /// Breakdown of the last residual evaluation.
    pub breakdown: ResidualBreakdown,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn value(&self, p: Player) -> &Field {
        &self.values[p.index()]
    }
}

/// Solve on a fresh discretisation of `game` over `grid`.
pub fn solve_system(game: &GameSpec, grid: &Grid, v0: [Field; 2], config: &SolverConfig) -> Result<SolveResult> {
    let disc = Discretisation::new(grid.clone(), game.clone())?;
    solve_discretised(&disc, v0, config)
}

fn continuation(excess: &[f64], r: f64) -> Vec<usize> {
    excess.iter().enumerate().filter(|(_, &e)| e < -r).map(|(k, _)| k).collect()
}

/// One player's update given the opponent's loss data.
fn update_player(
    disc: &Discretisation,
    p: Player,
    v_own: &[f64],
    v_opp: &[f64],
    opp_loss: &LossResult,
    r: f64,
    config: &SolverConfig,
) -> Result<Option<(Field, usize)>> {
    let excess = opp_loss.excess(v_opp);
    let nodes = continuation(&excess, r);
    if nodes.is_empty() {
        return Ok(None);
    }
    log::trace!("{p}: opponent continues on {} nodes [{}..={}]", nodes.len(), nodes[0], nodes[nodes.len() - 1]);
    let mut next = disc.gain(v_own, opp_loss, p)?;
    let sub = disc.subproblem(p, &nodes, &next, config.exterior_cap)?;
    let guess: Vec<f64> = nodes.iter().map(|&k| v_own[k]).collect();
    let res = solve_howard(&sub, &guess, &config.inner).map_err(|e| e.context(format!("inner solve for {p}")))?;
    if !res.converged {
        warn!("inner solve for {p} stopped after {} iterations (step {:.3e})", res.iterations, res.final_step_norm);
    }
    for (&k, v) in nodes.iter().zip(&res.values) {
        next[k] = *v;
    }
    Ok(Some((next, res.iterations)))
}

pub fn solve_discretised(disc: &Discretisation, v0: [Field; 2], config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    for v in &v0 {
        disc.grid.check(v)?;
        v.check_finite()?;
    }
    let mut v = v0;
    let mut losses = [disc.loss(&v[0], Player::One)?, disc.loss(&v[1], Player::Two)?];
    let mut r = config.r0;
    let mut residual = f64::INFINITY;
    let mut residual_history = Vec::new();
    let mut relaxation_history = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut breakdown = ResidualBreakdown::default();
    let mut status = SolveStatus::MaxIterations;
    let mut k = 0;

    while residual > config.eps && k < config.k_max {
        let (new1, new2) = match config.update {
            UpdateOrder::Jacobi => {
                let (a, b) = rayon::join(
                    || update_player(disc, Player::One, &v[0], &v[1], &losses[1], r, config),
                    || update_player(disc, Player::Two, &v[1], &v[0], &losses[0], r, config),
                );
                (a?, b?)
            }
            UpdateOrder::GaussSeidel => {
                let a = update_player(disc, Player::One, &v[0], &v[1], &losses[1], r, config)?;
                match &a {
                    Some((v1, _)) => {
                        let loss1 = disc.loss(v1, Player::One)?;
                        let b = update_player(disc, Player::Two, &v[1], v1, &loss1, r, config)?;
                        (a, b)
                    }
                    None => (None, None),
                }
            }
        };
        let ((v1, it1), (v2, it2)) = match (new1, new2) {
            (Some(a), Some(b)) => (a, b),
            (a, _) => {
                let player = if a.is_none() { Player::One } else { Player::Two };
                status = SolveStatus::Degenerate { player, iteration: k };
                warn!("opponent of {player} intervenes everywhere at iteration {k}; aborting");
                break;
            }
        };
        relaxation_history.push(r);
        inner_iterations.push([it1, it2]);
        v = [v1, v2];
        r = (config.alpha * r).max(config.eps);
        losses = [disc.loss(&v[0], Player::One)?, disc.loss(&v[1], Player::Two)?];
        let (res, bd) = residual_from_losses(disc, [&v[0], &v[1]], &losses, config.eps, config.residual)?;
        residual = res;
        breakdown = bd;
        residual_history.push(residual);
        k += 1;
        debug!("iteration {k}: R = {residual:.3e}, r = {r:.3e}, inner = [{it1}, {it2}]");
    }
    if residual <= config.eps {
        status = SolveStatus::Converged;
    }
    if residual_history.is_empty() {
        let (res, bd) = residual_from_losses(disc, [&v[0], &v[1]], &losses, config.eps, config.residual)?;
        residual_history.push(res);
        breakdown = bd;
    }
    Ok(SolveResult { values: v, status, iterations: k, residual_history, relaxation_history, inner_iterations, breakdown })
}

/// Largest pointwise residual of the discrete system and its per-node breakdown.
pub fn system_residual(disc: &Discretisation, v: [&[f64]; 2], eps: f64, mode: ResidualMode) -> Result<(f64, ResidualBreakdown)> {
    let losses = [disc.loss(v[0], Player::One)?, disc.loss(v[1], Player::Two)?];
    residual_from_losses(disc, v, &losses, eps, mode)
}

fn residual_from_losses(
    disc: &Discretisation,
    v: [&[f64]; 2],
    losses: &[LossResult; 2],
    eps: f64,
    mode: ResidualMode,
) -> Result<(f64, ResidualBreakdown)> {
    let mut breakdown = ResidualBreakdown::default();
    let mut worst = 0.0f64;
    for p in Player::BOTH {
        let (i, j) = (p.index(), p.other().index());
        let own_excess = losses[i].excess(v[i]);
        let opp_excess = losses[j].excess(v[j]);
        let gain = disc.gain(v[i], &losses[j], p)?;
        let pde = disc.pde_residual(v[i], p);
        let nodes: Vec<NodeResidual> = (0..v[i].len())
            .map(|k| {
                let opp_continues = opp_excess[k] < -eps;
                let on_pde = match mode {
                    ResidualMode::System => opp_continues,
                    ResidualMode::Printed => !opp_continues,
                };
                let obstacle = NodeResidual { value: own_excess[k].max(0.0), kind: ResidualKind::Obstacle };
                let region = if on_pde {
                    NodeResidual { value: pde[k].max(own_excess[k]).abs(), kind: ResidualKind::Pde }
                } else {
                    NodeResidual { value: (gain[k] - v[i][k]).abs(), kind: ResidualKind::Gain }
                };
                if region.value > obstacle.value {
                    region
                } else {
                    obstacle
                }
            })
            .collect();
        worst = nodes.iter().map(|n| n.value).fold(worst, f64::max);
        breakdown.players[i] = nodes;
    }
    Ok((worst, breakdown))
}

/// Nodes on either side of a switch between `{𝕄ᵢVᵢ − Vᵢ < −ε}` and its
/// complement, for both players, sorted and deduplicated.
pub fn junction_nodes(disc: &Discretisation, v: [&[f64]; 2], eps: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for p in Player::BOTH {
        let vi = v[p.index()];
        let excess = disc.loss(vi, p)?.excess(vi);
        for k in 0..excess.len().saturating_sub(1) {
            if (excess[k] < -eps) != (excess[k + 1] < -eps) {
                out.extend([k, k + 1]);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Node distance from `node` to the nearest junction, `None` without junctions.
pub fn junction_distance(junctions: &[usize], node: usize) -> Option<usize> {
    junctions.iter().map(|&j| j.abs_diff(node)).min()
}

/// A stretch of consecutive continuation nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationInterval {
    pub first: usize,
    pub last: usize,
    /// Midpoint to the neighbouring intervention node, or `-inf` at the grid edge.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulsePoint {
    pub x: f64,
    /// Post-jump state.
    pub target: f64,
}

/// Threshold strategy: continue inside the (open) intervals, otherwise jump.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub player: Player,
    pub intervals: Vec<ContinuationInterval>,
    /// Intervention points sorted by `x`; the impulse at any state is taken from the nearest one.
    pub impulses: Vec<ImpulsePoint>,
    /// Scales the jump `target − x` at lookup time.
    pub shift_scale: f64,
}

impl Strategy {
    /// The strategy that never intervenes.
    pub fn passive(player: Player) -> Self {
        let all = ContinuationInterval { first: 0, last: usize::MAX, lower: f64::NEG_INFINITY, upper: f64::INFINITY };
        Strategy { player, intervals: vec![all], impulses: Vec::new(), shift_scale: 1.0 }
    }

    pub fn continues(&self, x: f64) -> bool {
        self.impulses.is_empty() || self.intervals.iter().any(|iv| iv.lower < x && x < iv.upper)
    }

    /// Post-jump state for an intervention from `x`.
    pub fn target(&self, x: f64) -> Option<f64> {
        if self.impulses.is_empty() {
            return None;
        }
        let pos = self.impulses.partition_point(|p| p.x < x);
        let nearest = match pos {
            0 => &self.impulses[0],
            n if n == self.impulses.len() => &self.impulses[n - 1],
            n => {
                let (a, b) = (&self.impulses[n - 1], &self.impulses[n]);
                if x - a.x <= b.x - x {
                    a
                } else {
                    b
                }
            }
        };
        if self.shift_scale == 1.0 {
            Some(nearest.target)
        } else {
            Some(x + self.shift_scale * (nearest.target - x))
        }
    }

    /// Finite interval endpoints, in order.
    pub fn thresholds(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|iv| [iv.lower, iv.upper]).filter(|v| v.is_finite()).collect()
    }

    /// Whether every jump lands strictly inside the continuation region.
    pub fn targets_continue(&self) -> bool {
        self.impulses.iter().all(|p| {
            let t = p.x + self.shift_scale * (p.target - p.x);
            self.intervals.iter().any(|iv| iv.lower < t && t < iv.upper)
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: continue on ", self.player)?;
        for (n, iv) in self.intervals.iter().enumerate() {
            if n > 0 {
                write!(f, " u ")?;
            }
            write!(f, "({:.4}, {:.4})", iv.lower, iv.upper)?;
        }
        if let (Some(a), Some(b)) = (self.impulses.first(), self.impulses.last()) {
            write!(f, "; jump to [{:.4}, {:.4}]", a.target.min(b.target), a.target.max(b.target))?;
        }
        Ok(())
    }
}

/// Continuation regions `{𝕄ᵢVᵢ − Vᵢ < −ε}` and loss-operator destinations.
pub fn extract_equilibrium(disc: &Discretisation, v: [&[f64]; 2], eps: f64) -> Result<[Strategy; 2]> {
    let grid = &disc.grid;
    let mut out = Vec::with_capacity(2);
    for p in Player::BOTH {
        let vi = v[p.index()];
        let loss = disc.loss(vi, p)?;
        let excess = loss.excess(vi);
        let cont: Vec<bool> = excess.iter().map(|&e| e < -eps).collect();
        let n = grid.len();
        let mut intervals = Vec::new();
        let mut k = 0;
        while k < n {
            if !cont[k] {
                k += 1;
                continue;
            }
            let first = k;
            while k + 1 < n && cont[k + 1] {
                k += 1;
            }
            let last = k;
            let lower = if first == 0 { f64::NEG_INFINITY } else { 0.5 * (grid.x(first - 1) + grid.x(first)) };
            let upper = if last + 1 == n { f64::INFINITY } else { 0.5 * (grid.x(last) + grid.x(last + 1)) };
            intervals.push(ContinuationInterval { first, last, lower, upper });
            k += 1;
        }
        let impulses = (0..n)
            .filter(|&k| !cont[k])
            .map(|k| ImpulsePoint { x: grid.x(k), target: grid.x(loss.target[k]) })
            .collect();
        out.push(Strategy { player: p, intervals, impulses, shift_scale: 1.0 });
    }
    let s2 = out.pop().unwrap();
    let s1 = out.pop().unwrap();
    Ok([s1, s2])
}

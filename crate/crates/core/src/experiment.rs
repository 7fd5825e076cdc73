//! Config-driven experiment runs: solve a game for one or more grid sizes and
//! write value tables, residual histories, equilibrium summaries and optional
//! Monte Carlo reports.
//!
//! A config is a TOML file with the sections `game`, `grid`, `solver`,
//! `guess`, `monte_carlo` (optional) and `output`. See `examples/configs/`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{closed_form, ClosedForm};
use crate::error::{invalid, Error, Result};
use crate::game::{build_benchmark, build_capped, build_parabolic, BenchmarkParams, CappedParams, GameSpec, ParabolicParams, Player};
use crate::grid::{Field, Grid};
use crate::guess::{initial_guess, staged_benchmark_guess, GuessKind, DEFAULT_CAP};
use crate::montecarlo::{estimate_objective, perturb_strategy, Estimate, PerturbMode, SimConfig, DEFAULT_MAGNITUDE};
use crate::operators::Discretisation;
use crate::solver::{extract_equilibrium, junction_distance, junction_nodes, solve_discretised, SolveResult, SolverConfig, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GameConfig {
    Benchmark(BenchmarkParams),
    Parabolic(ParabolicParams),
    Capped(CappedParams),
}

impl GameConfig {
    pub fn build(&self) -> Result<GameSpec> {
        match self {
            GameConfig::Benchmark(p) => build_benchmark(p),
            GameConfig::Parabolic(p) => build_parabolic(p),
            GameConfig::Capped(p) => build_capped(p),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            GameConfig::Benchmark(_) => "benchmark",
            GameConfig::Parabolic(_) => "parabolic",
            GameConfig::Capped(_) => "capped",
        }
    }

    /// Domain used when the config leaves `x_min`/`x_max` out.
    pub fn default_domain(&self) -> (f64, f64) {
        match self {
            GameConfig::Parabolic(_) => (-8.0, 6.0),
            _ => (-10.0, 10.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Steps {
    One(usize),
    Many(Vec<usize>),
}

impl Steps {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Steps::One(m) => vec![*m],
            Steps::Many(ms) => ms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub m: Steps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessMode {
    #[default]
    Zero,
    Unilateral,
    /// Solve the game with payoffs capped at `cap` first (benchmark only).
    StagedCapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuessConfig {
    pub kind: GuessMode,
    pub cap: f64,
    /// Guess for the capped stage.
    pub capped_guess: GuessKind,
}

impl Default for GuessConfig {
    fn default() -> Self {
        GuessConfig { kind: GuessMode::Zero, cap: DEFAULT_CAP, capped_guess: GuessKind::Zero }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NashConfig {
    pub points: Vec<f64>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_magnitude")]
    pub magnitude: f64,
    #[serde(default)]
    pub mode: PerturbMode,
}

fn default_draws() -> usize {
    20
}

fn default_magnitude() -> f64 {
    DEFAULT_MAGNITUDE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub horizon: f64,
    pub dt: f64,
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Starting points for the objective estimates.
    pub x0: Vec<f64>,
    pub nash: Option<NashConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default)]
    pub compare_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub guess: GuessConfig,
    pub monte_carlo: Option<MonteCarloConfig>,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Config("config is empty".into()));
        }
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.game.default_domain();
        (self.grid.x_min.unwrap_or(lo), self.grid.x_max.unwrap_or(hi))
    }

    /// True when either domain end came from the family default.
    pub fn domain_assumed(&self) -> bool {
        self.grid.x_min.is_none() || self.grid.x_max.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        self.game.build()?;
        let (lo, hi) = self.domain();
        let ms = self.grid.m.to_vec();
        if ms.is_empty() {
            return Err(invalid("grid.m must list at least one size"));
        }
        for m in ms {
            Grid::new(lo, hi, m)?;
        }
        self.solver.validate()?;
        if self.guess.kind == GuessMode::StagedCapped {
            if !matches!(self.game, GameConfig::Benchmark(_)) {
                return Err(invalid("the staged_capped guess needs the benchmark family"));
            }
            if !(self.guess.cap > 0.0) {
                return Err(invalid(format!("guess.cap must be positive, got {}", self.guess.cap)));
            }
        }
        if self.output.compare_exact && !matches!(self.game, GameConfig::Benchmark(_)) {
            return Err(invalid("compare_exact needs the benchmark family"));
        }
        if let Some(mc) = &self.monte_carlo {
            if mc.x0.is_empty() {
                return Err(invalid("monte_carlo.x0 must list at least one starting point"));
            }
            for &x0 in &mc.x0 {
                self.sim_config(mc, x0).validate()?;
            }
            if let Some(n) = &mc.nash {
                if !(0.0..1.0).contains(&n.magnitude) {
                    return Err(invalid(format!("nash.magnitude must lie in [0, 1), got {}", n.magnitude)));
                }
                if n.points.is_empty() || n.draws == 0 {
                    return Err(invalid("nash needs at least one point and one draw"));
                }
            }
        }
        Ok(())
    }

    fn sim_config(&self, mc: &MonteCarloConfig, x0: f64) -> SimConfig {
        SimConfig { horizon: mc.horizon, dt: mc.dt, paths: mc.paths, seed: mc.seed, x0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactComparison {
    /// `sup |Vᵢ − Vᵢ^exact|` over the grid.
    pub sup_error: [f64; 2],
    /// `|x̄ᵢ − x̄ᵢ^exact|` for the extracted intervention thresholds.
    pub threshold_error: [f64; 2],
    /// `|yᵢ − xᵢ*|` for the extracted post-jump targets.
    pub target_error: [f64; 2],
}

/// Finite threshold and the target of a jump from the far intervention side.
fn threshold_and_target(s: &Strategy, grid: &Grid) -> Option<(f64, f64)> {
    let t = *s.thresholds().first()?;
    let far = match s.player {
        Player::One => grid.x_min(),
        Player::Two => grid.x_max(),
    };
    Some((t, s.target(far)?))
}

/// Errors of a benchmark solve against the closed form.
pub fn compare_to_exact(result: &SolveResult, disc: &Discretisation, game: &GameConfig, eps: f64) -> Result<ExactComparison> {
    let GameConfig::Benchmark(params) = game else {
        return Err(invalid(format!("no closed form for the {} family", game.family())));
    };
    let cf = closed_form(params, 1e-14)?;
    compare_with(&cf, result.values.each_ref().map(|v| v.as_ref()), disc, eps)
}

fn compare_with(cf: &ClosedForm, v: [&[f64]; 2], disc: &Discretisation, eps: f64) -> Result<ExactComparison> {
    let exact = cf.values_on(&disc.grid);
    let sup_error = Player::BOTH.map(|p| exact[p.index()].sup_distance(v[p.index()]));
    let strategies = extract_equilibrium(disc, v, eps)?;
    let mut threshold_error = [f64::INFINITY; 2];
    let mut target_error = [f64::INFINITY; 2];
    for p in Player::BOTH {
        if let Some((t, y)) = threshold_and_target(&strategies[p.index()], &disc.grid) {
            threshold_error[p.index()] = (t - cf.x_bar[p.index()]).abs();
            target_error[p.index()] = (y - cf.x_star[p.index()]).abs();
        }
    }
    Ok(ExactComparison { sup_error, threshold_error, target_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveRow {
    pub x0: f64,
    pub estimates: [Estimate; 2],
    /// Solver values interpolated at `x0`.
    pub values: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashRow {
    pub x0: f64,
    pub deviator: Player,
    pub draw: usize,
    /// `[deviator, opponent]` objectives.
    pub estimates: [Estimate; 2],
    pub values: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub m: usize,
    pub grid: Grid,
    pub result: SolveResult,
    pub strategies: [Strategy; 2],
    pub exact: Option<ExactComparison>,
    /// Distance in nodes from the worst residual to the nearest junction.
    pub worst_junction_distance: Option<usize>,
    pub objectives: Vec<ObjectiveRow>,
    pub nash: Vec<NashRow>,
}

/// Linear interpolation of a grid field.
pub fn interpolate(grid: &Grid, v: &[f64], x: f64) -> f64 {
    let h = grid.h();
    let s = ((x - grid.x_min()) / h).clamp(0.0, grid.steps() as f64);
    let k = (s.floor() as usize).min(grid.steps() - 1);
    let w = s - k as f64;
    (1.0 - w) * v[k] + w * v[k + 1]
}

fn initial_values(cfg: &ExperimentConfig, game: &GameSpec, grid: &Grid) -> Result<[Field; 2]> {
    match (cfg.guess.kind, &cfg.game) {
        (GuessMode::Zero, _) => initial_guess(GuessKind::Zero, game, grid, &cfg.solver.inner),
        (GuessMode::Unilateral, _) => initial_guess(GuessKind::Unilateral, game, grid, &cfg.solver.inner),
        (GuessMode::StagedCapped, GameConfig::Benchmark(p)) => {
            Ok(staged_benchmark_guess(p, cfg.guess.cap, grid, &cfg.solver, cfg.guess.capped_guess)?.values)
        }
        (GuessMode::StagedCapped, _) => Err(invalid("the staged_capped guess needs the benchmark family")),
    }
}

fn monte_carlo(cfg: &ExperimentConfig, mc: &MonteCarloConfig, game: &GameSpec, report: &mut RunReport) -> Result<()> {
    let v = &report.result.values;
    let value_at = |p: Player, x: f64| interpolate(&report.grid, &v[p.index()], x);
    for &x0 in &mc.x0 {
        let estimates = estimate_objective(game, &report.strategies, &cfg.sim_config(mc, x0))?;
        report.objectives.push(ObjectiveRow { x0, estimates, values: Player::BOTH.map(|p| value_at(p, x0)) });
    }
    let Some(nash) = &mc.nash else { return Ok(()) };
    for &x0 in &nash.points {
        for deviator in Player::BOTH {
            for draw in 0..nash.draws {
                let seed = mc.seed ^ ((draw as u64) << 32) ^ (deviator.index() as u64) << 48;
                let mut pair = report.strategies.clone();
                pair[deviator.index()] = perturb_strategy(&pair[deviator.index()], nash.magnitude, seed, nash.mode)?;
                let est = estimate_objective(game, &pair, &cfg.sim_config(mc, x0))?;
                let (d, o) = (deviator, deviator.other());
                report.nash.push(NashRow {
                    x0,
                    deviator,
                    draw,
                    estimates: [est[d.index()], est[o.index()]],
                    values: [value_at(d, x0), value_at(o, x0)],
                });
            }
        }
    }
    Ok(())
}

/// Solve for one grid size, without writing anything.
pub fn run_one(cfg: &ExperimentConfig, m: usize) -> Result<RunReport> {
    let game = cfg.game.build()?;
    let (lo, hi) = cfg.domain();
    let grid = Grid::new(lo, hi, m)?;
    let v0 = initial_values(cfg, &game, &grid).map_err(|e| e.context(format!("initial guess for M = {m}")))?;
    let disc = Discretisation::new(grid.clone(), game.clone())?;
    let result = solve_discretised(&disc, v0, &cfg.solver).map_err(|e| e.context(format!("solve for M = {m}")))?;
    let v = result.values.each_ref().map(|f| f.as_ref());
    let strategies = extract_equilibrium(&disc, v, cfg.solver.eps)?;
    let exact = if cfg.output.compare_exact {
        Some(compare_to_exact(&result, &disc, &cfg.game, cfg.solver.eps)?)
    } else {
        None
    };
    let junctions = junction_nodes(&disc, v, cfg.solver.eps)?;
    let worst_junction_distance = result.breakdown.worst().and_then(|w| junction_distance(&junctions, w.node));
    info!("M = {m}: {:?} after {} iterations, R = {:.3e}", result.status, result.iterations, result.residual());
    let mut report =
        RunReport { m, grid, result, strategies, exact, worst_junction_distance, objectives: Vec::new(), nash: Vec::new() };
    if let Some(mc) = &cfg.monte_carlo {
        monte_carlo(cfg, mc, &game, &mut report).map_err(|e| e.context(format!("Monte Carlo for M = {m}")))?;
    }
    Ok(report)
}

/// Solve every configured grid size and write the artifacts to `cfg.output.dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<RunReport>> {
    cfg.validate()?;
    let reports: Vec<RunReport> = cfg.grid.m.to_vec().into_par_iter().map(|m| run_one(cfg, m)).collect::<Result<_>>()?;
    write_artifacts(cfg, &reports)?;
    Ok(reports)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_artifacts(cfg: &ExperimentConfig, reports: &[RunReport]) -> Result<()> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let exact = match (&cfg.game, cfg.output.compare_exact) {
        (GameConfig::Benchmark(p), true) => Some(closed_form(p, 1e-14)?),
        _ => None,
    };
    let mut sweep = String::from("m,status,iterations,residual,sup_error_1,sup_error_2\n");
    for r in reports {
        fs::write(dir.join(format!("values_M{}.csv", r.m)), values_csv(r, exact.as_ref()))?;
        fs::write(dir.join(format!("history_M{}.csv", r.m)), history_csv(&r.result))?;
        fs::write(dir.join(format!("summary_M{}.txt", r.m)), summary(cfg, r))?;
        let (e1, e2) = r.exact.map(|e| (num(e.sup_error[0]), num(e.sup_error[1]))).unwrap_or_default();
        let _ = writeln!(sweep, "{},{},{},{},{e1},{e2}", r.m, status_label(&r.result), r.result.iterations, num(r.result.residual()));
        if !r.objectives.is_empty() {
            let mut s = String::from("x0,player,mean,stderr,value\n");
            for o in &r.objectives {
                for p in Player::BOTH {
                    let e = o.estimates[p.index()];
                    let _ = writeln!(s, "{},{},{},{},{}", num(o.x0), p.number(), num(e.mean), num(e.stderr), num(o.values[p.index()]));
                }
            }
            fs::write(dir.join(format!("monte_carlo_M{}.csv", r.m)), s)?;
        }
        if !r.nash.is_empty() {
            let mut s = String::from("x0,deviator,draw,deviator_mean,deviator_stderr,deviator_value,opponent_mean,opponent_stderr,opponent_value\n");
            for n in &r.nash {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    num(n.x0),
                    n.deviator.number(),
                    n.draw,
                    num(n.estimates[0].mean),
                    num(n.estimates[0].stderr),
                    num(n.values[0]),
                    num(n.estimates[1].mean),
                    num(n.estimates[1].stderr),
                    num(n.values[1])
                );
            }
            fs::write(dir.join(format!("nash_M{}.csv", r.m)), s)?;
        }
    }
    fs::write(dir.join("sweep.csv"), sweep)?;
    Ok(())
}

fn status_label(r: &SolveResult) -> &'static str {
    match r.status {
        crate::solver::SolveStatus::Converged => "converged",
        crate::solver::SolveStatus::MaxIterations => "max_iterations",
        crate::solver::SolveStatus::Degenerate { .. } => "degenerate",
    }
}

fn values_csv(r: &RunReport, exact: Option<&ClosedForm>) -> String {
    let mut s = String::from("x,V1,V2");
    if exact.is_some() {
        s.push_str(",V1_exact,V2_exact,error_1,error_2");
    }
    s.push('\n');
    let [v1, v2] = &r.result.values;
    for (k, &x) in r.grid.nodes().iter().enumerate() {
        let _ = write!(s, "{},{},{}", num(x), num(v1[k]), num(v2[k]));
        if let Some(cf) = exact {
            let (e1, e2) = (cf.value(x, Player::One), cf.value(x, Player::Two));
            let _ = write!(s, ",{},{},{},{}", num(e1), num(e2), num((v1[k] - e1).abs()), num((v2[k] - e2).abs()));
        }
        s.push('\n');
    }
    s
}

fn history_csv(r: &SolveResult) -> String {
    let mut s = String::from("k,residual,relaxation,inner_1,inner_2\n");
    for (k, ((res, rel), inner)) in r.residual_history.iter().zip(&r.relaxation_history).zip(&r.inner_iterations).enumerate() {
        let _ = writeln!(s, "{},{},{},{},{}", k + 1, num(*res), num(*rel), inner[0], inner[1]);
    }
    s
}

fn summary(cfg: &ExperimentConfig, r: &RunReport) -> String {
    let mut s = String::new();
    let res = &r.result;
    let _ = writeln!(s, "family = \"{}\"", cfg.game.family());
    let _ = writeln!(s, "m = {}", r.m);
    let _ = writeln!(s, "x_min = {}", num(r.grid.x_min()));
    let _ = writeln!(s, "x_max = {}", num(r.grid.x_max()));
    let _ = writeln!(s, "h = {}", num(r.grid.h()));
    let _ = writeln!(s, "domain_assumed = {}", cfg.domain_assumed());
    let _ = writeln!(s, "status = \"{}\"", status_label(res));
    let _ = writeln!(s, "converged = {}", res.converged());
    let _ = writeln!(s, "iterations = {}", res.iterations);
    let _ = writeln!(s, "residual = {}", num(res.residual()));
    if let crate::solver::SolveStatus::Degenerate { player, iteration } = res.status {
        let _ = writeln!(s, "degenerate_player = {}\ndegenerate_iteration = {iteration}", player.number());
    }
    if let Some(w) = res.breakdown.worst() {
        let _ = writeln!(s, "\n[worst_residual]");
        let _ = writeln!(s, "player = {}", w.player.number());
        let _ = writeln!(s, "node = {}", w.node);
        let _ = writeln!(s, "x = {}", num(r.grid.x(w.node)));
        let _ = writeln!(s, "value = {}", num(w.value));
        let _ = writeln!(s, "kind = \"{}\"", w.kind);
        if let Some(d) = r.worst_junction_distance {
            let _ = writeln!(s, "junction_distance = {d}");
        }
    }
    for st in &r.strategies {
        let _ = writeln!(s, "\n[player_{}]", st.player.number());
        let ends: Vec<String> = st.intervals.iter().map(|iv| format!("[{}, {}]", bound(iv.lower), bound(iv.upper))).collect();
        let _ = writeln!(s, "continuation = [{}]", ends.join(", "));
        let mut targets: Vec<f64> = st.impulses.iter().map(|p| p.target).collect();
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        let ts: Vec<String> = targets.iter().map(|t| num(*t)).collect();
        let _ = writeln!(s, "targets = [{}]", ts.join(", "));
    }
    if let Some(e) = &r.exact {
        let _ = writeln!(s, "\n[exact_comparison]");
        let _ = writeln!(s, "sup_error = [{}, {}]", num(e.sup_error[0]), num(e.sup_error[1]));
        let _ = writeln!(s, "threshold_error = [{}, {}]", num(e.threshold_error[0]), num(e.threshold_error[1]));
        let _ = writeln!(s, "target_error = [{}, {}]", num(e.target_error[0]), num(e.target_error[1]));
    }
    s
}

fn bound(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

//! Runs every requested (scheme, budget, K) cell on one shared set of fading
//! states.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use scsec_core::{sample_states, sca, Allocation, Budget, DualObjective, DualSolver, FadingState, SchemeKind};

use crate::config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("cannot draw fading states: {0}")]
    Channel(#[source] scsec_core::Error),
    #[error("{scheme} failed at K = {k}{}: {source}", budget_context(*.p_bar))]
    Solver {
        scheme: SchemeKind,
        k: u32,
        p_bar: Option<f64>,
        #[source]
        source: scsec_core::Error,
    },
}

fn budget_context(p_bar: Option<f64>) -> String {
    p_bar.map(|p| format!(", average power {p:e} W")).unwrap_or_default()
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: SchemeKind,
    pub p_bar: f64,
    pub k: u32,
    pub ergodic_rate: f64,
    pub avg_power: f64,
    /// Relative duality gap; only the dual-method schemes have one.
    pub duality_gap: Option<f64>,
    /// Solve time in milliseconds, or 0 when timing is disabled.
    pub wall_ms: f64,
    pub seed: u64,
}

/// Allocation used by fading state `state` for a `weight` fraction of its time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedAllocation {
    pub state: usize,
    pub weight: f64,
    pub allocation: Allocation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaTrace {
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Full outcome of one (scheme, budget, K) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub row: SweepRow,
    pub allocations: Vec<WeightedAllocation>,
    /// Dual multiplier at the solution (dual-method schemes only).
    pub lambda: Option<f64>,
    pub dual_value: Option<f64>,
    /// Time-weighted fraction of states that transmit nothing.
    pub zero_power_fraction: f64,
    pub sca: Option<ScaTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub base_k: u32,
    pub states: Vec<FadingState>,
    pub cells: Vec<Cell>,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.cells.iter().map(|c| c.row.clone()).collect()
    }

    pub fn find(&self, scheme: SchemeKind, p_bar: f64, k: u32) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row.scheme == scheme && c.row.p_bar == p_bar && c.row.k == k)
    }

    /// Ergodic rate of `scheme` at each swept budget for one K, in sweep order.
    pub fn series(&self, scheme: SchemeKind, k: u32) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.row.scheme == scheme && c.row.k == k)
            .map(|c| (c.row.p_bar, c.row.ergodic_rate))
            .collect()
    }
}

/// The (scheme, K) groups of a sweep in output order. Bit schemes do not
/// depend on K and run once, at the base K.
pub fn groups(cfg: &ExperimentConfig) -> Vec<(SchemeKind, u32)> {
    let ks = cfg.semantic_ks();
    cfg.schemes
        .iter()
        .flat_map(|&scheme| {
            let ks = if scheme.is_semantic() { ks.clone() } else { vec![cfg.base_k()] };
            ks.into_iter().map(move |k| (scheme, k))
        })
        .collect()
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    let states = sample_states(&cfg.channel, cfg.n_states).map_err(SweepError::Channel)?;
    let per_group: Vec<Vec<Cell>> = groups(cfg)
        .into_par_iter()
        .map(|(scheme, k)| run_group(cfg, &states, scheme, k))
        .collect::<Result<_, _>>()?;
    Ok(SweepResult { base_k: cfg.base_k(), states, cells: per_group.into_iter().flatten().collect() })
}

fn run_group(cfg: &ExperimentConfig, states: &[FadingState], scheme: SchemeKind, k: u32) -> Result<Vec<Cell>, SweepError> {
    let err = |p_bar: Option<f64>| move |source| SweepError::Solver { scheme, k, p_bar, source };
    let sp = cfg.semantic_for(k);
    let peak = cfg.budget.peak;
    let seed = cfg.channel.seed;
    let n = states.len() as f64;
    let elapsed_ms = |t: Instant| if cfg.timing { t.elapsed().as_secs_f64() * 1e3 } else { 0.0 };

    if scheme == SchemeKind::ScSca {
        return cfg
            .budget
            .averages
            .iter()
            .map(|&p_bar| {
                let t = Instant::now();
                let budget = Budget::new(peak, p_bar).map_err(err(Some(p_bar)))?;
                let res = sca::run(states, &budget, &sp, &cfg.sca).map_err(err(Some(p_bar)))?;
                let zero = res.allocations.iter().filter(|a| a.p == 0.0).count() as f64 / n;
                Ok(Cell {
                    row: SweepRow {
                        scheme,
                        p_bar,
                        k,
                        ergodic_rate: res.ergodic_rate,
                        avg_power: res.avg_power,
                        duality_gap: None,
                        wall_ms: elapsed_ms(t),
                        seed,
                    },
                    allocations: res
                        .allocations
                        .iter()
                        .enumerate()
                        .map(|(state, &allocation)| WeightedAllocation { state, weight: 1.0, allocation })
                        .collect(),
                    lambda: None,
                    dual_value: None,
                    zero_power_fraction: zero,
                    sca: Some(ScaTrace {
                        objective_history: res.objective_history,
                        iterations: res.iterations,
                        converged: res.converged,
                    }),
                })
            })
            .collect();
    }

    let objective = match scheme {
        SchemeKind::ScOptimal => DualObjective::Semantic(sp),
        SchemeKind::BitAn => DualObjective::BitAn,
        SchemeKind::BitOnly => DualObjective::BitOnly,
        SchemeKind::ScSca => unreachable!("handled above"),
    };
    let solver = DualSolver::new(objective, states, peak, &cfg.solver).map_err(err(None))?;
    cfg.budget
        .averages
        .iter()
        .map(|&p_bar| {
            let t = Instant::now();
            let sol = solver.solve(p_bar).map_err(err(Some(p_bar)))?;
            let allocations: Vec<WeightedAllocation> = (0..states.len())
                .flat_map(|state| {
                    sol.weighted(state)
                        .into_iter()
                        .map(move |(weight, allocation)| WeightedAllocation { state, weight, allocation })
                })
                .collect();
            let zero = allocations.iter().filter(|w| w.allocation.p == 0.0).fold(0.0, |acc, w| acc + w.weight) / n;
            Ok(Cell {
                row: SweepRow {
                    scheme,
                    p_bar,
                    k,
                    ergodic_rate: sol.ergodic_rate,
                    avg_power: sol.avg_power,
                    duality_gap: Some(sol.duality_gap()),
                    wall_ms: elapsed_ms(t),
                    seed,
                },
                allocations,
                lambda: Some(sol.lambda),
                dual_value: Some(sol.dual_value),
                zero_power_fraction: zero,
                sca: None,
            })
        })
        .collect()
}

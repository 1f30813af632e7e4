//! Globally optimal power allocation by Lagrangian duality.
//!
//! The average power constraint is priced with a multiplier `lambda`; for a
//! fixed price the problem splits into one small subproblem per fading state,
//! maximizing `secrecy_rate - lambda * p` over `(p, beta, mu)`. Each subproblem
//! is solved by exhaustive search on a `(p, beta)` grid with local refinement,
//! and `lambda` is bisected until the average power constraint is tight.
//!
//! The coarse grid values do not depend on `lambda`, so [`DualSolver`] caches
//! the per-power envelope `max_beta rate(p, beta)` once per state; each price
//! then only costs a scan over the power grid plus the refinement passes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::FadingState;
use crate::error::{invalid, Error, Result};
use crate::rates::{
    bit_an_secrecy_rate, bit_only_secrecy_rate, secrecy_rate, Allocation, DecodingOrder, SchemeKind,
};
use crate::semantic::SemanticParams;

/// Points on each side of the incumbent in one refinement pass.
const REFINE_HALF: usize = 8;
const MAX_BRACKET_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 200;

/// Peak (`P̂`) and average (`P̄`) transmit power limits in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub peak: f64,
    pub average: f64,
}

impl Budget {
    pub fn new(peak: f64, average: f64) -> Result<Self> {
        let b = Self { peak, average };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.average.is_finite() && self.average > 0.0) {
            return Err(invalid(format!("average power must be positive, got {}", self.average)));
        }
        if !(self.peak.is_finite() && self.average <= self.peak) {
            return Err(invalid(format!(
                "average power {} must not exceed peak power {}",
                self.average, self.peak
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualConfig {
    /// Coarse power grid points over `[0, P̂]`.
    pub grid_p: usize,
    /// Coarse split grid points over `[0, 1]`, endpoints included.
    pub grid_beta: usize,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Relative tolerance on the average-power residual.
    pub lambda_tol: f64,
    /// Local refinement passes around the coarse incumbent.
    pub refine_rounds: usize,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            grid_p: 64,
            grid_beta: 64,
            lambda_lo: 0.0,
            lambda_hi: 1.0,
            lambda_tol: 1e-4,
            refine_rounds: 3,
        }
    }
}

impl DualConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_p < 2 || self.grid_beta < 2 {
            return Err(invalid("solver grids need at least 2 points per axis"));
        }
        if !(self.lambda_lo >= 0.0 && self.lambda_hi > self.lambda_lo && self.lambda_hi.is_finite()) {
            return Err(invalid(format!(
                "bisection bracket must satisfy 0 <= lambda_lo < lambda_hi, got [{}, {}]",
                self.lambda_lo, self.lambda_hi
            )));
        }
        if !(self.lambda_tol > 0.0) {
            return Err(invalid("lambda_tol must be positive"));
        }
        Ok(())
    }
}

/// Per-state secrecy objective handed to the dual solver.
///
/// The baselines reuse the same machinery: bit-only pins `beta = 0`, and
/// bit + artificial noise swaps in its own rate with `mu = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum DualObjective {
    Semantic(SemanticParams),
    BitOnly,
    BitAn,
}

impl DualObjective {
    pub fn scheme(&self) -> SchemeKind {
        match self {
            DualObjective::Semantic(_) => SchemeKind::ScOptimal,
            DualObjective::BitOnly => SchemeKind::BitOnly,
            DualObjective::BitAn => SchemeKind::BitAn,
        }
    }

    #[inline]
    pub fn rate(&self, a: &Allocation, s: &FadingState) -> f64 {
        match self {
            DualObjective::Semantic(sp) => secrecy_rate(a, s, sp),
            DualObjective::BitOnly => bit_only_secrecy_rate(a.p, s),
            DualObjective::BitAn => bit_an_secrecy_rate(a.p, a.beta, s),
        }
    }

    /// Decoding orders worth searching in state `s`. When `g_L <= g_E` the
    /// semantic-first order is optimal, so the bit-first branch is skipped.
    fn orders(&self, s: &FadingState) -> &'static [DecodingOrder] {
        match self {
            DualObjective::Semantic(_) if s.g_l > s.g_e => {
                &[DecodingOrder::SemanticFirst, DecodingOrder::BitFirst]
            }
            _ => &[DecodingOrder::SemanticFirst],
        }
    }

    fn pins_beta(&self) -> bool {
        matches!(self, DualObjective::BitOnly)
    }

    fn validate(&self) -> Result<()> {
        match self {
            DualObjective::Semantic(sp) => sp.validate(),
            _ => Ok(()),
        }
    }
}

/// Lagrangian per-state utility `secrecy_rate - lambda * p`.
pub fn per_state_objective(a: &Allocation, s: &FadingState, lambda: f64, sp: &SemanticParams) -> f64 {
    secrecy_rate(a, s, sp) - lambda * a.p
}

/// Time-sharing of one fading state between two allocations.
///
/// The state spends fraction `weight` of its time on `alternate` and the rest
/// on the allocation stored in [`DualSolution::allocations`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeShare {
    pub state: usize,
    pub weight: f64,
    pub alternate: Allocation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub allocations: Vec<Allocation>,
    pub time_share: Option<TimeShare>,
    pub lambda: f64,
    pub ergodic_rate: f64,
    pub avg_power: f64,
    /// Dual function value at `lambda`; an upper bound on the primal optimum.
    pub dual_value: f64,
    /// Number of multiplier evaluations, including bracket expansion.
    pub evaluations: usize,
}

impl DualSolution {
    /// Relative duality gap `(dual - primal) / dual`, floored at zero: weak
    /// duality holds exactly, so negative values are only rounding noise.
    pub fn duality_gap(&self) -> f64 {
        if self.dual_value > 0.0 {
            ((self.dual_value - self.ergodic_rate) / self.dual_value).max(0.0)
        } else {
            0.0
        }
    }

    /// `(weight, allocation)` pairs for state `i`; weights sum to one.
    pub fn weighted(&self, i: usize) -> Vec<(f64, Allocation)> {
        match self.time_share {
            Some(ts) if ts.state == i => {
                vec![(1.0 - ts.weight, self.allocations[i]), (ts.weight, ts.alternate)]
            }
            _ => vec![(1.0, self.allocations[i])],
        }
    }

    /// Fraction of states that transmit nothing.
    pub fn zero_power_fraction(&self) -> f64 {
        let n = self.allocations.len();
        self.allocations.iter().filter(|a| a.p == 0.0).count() as f64 / n as f64
    }
}

#[derive(Debug, Clone)]
struct Branch {
    mu: DecodingOrder,
    /// For each coarse power index: best rate over the split grid and its index.
    envelope: Vec<(f64, usize)>,
}

#[derive(Debug, Clone)]
struct StateProfile {
    branches: Vec<Branch>,
}

/// Per-price outcome for every state.
#[derive(Debug, Clone)]
struct PriceOutcome {
    lambda: f64,
    allocations: Vec<Allocation>,
    utilities: Vec<f64>,
    avg_power: f64,
}

/// Dual solver bound to a fixed set of fading states and a peak power.
#[derive(Debug, Clone)]
pub struct DualSolver {
    objective: DualObjective,
    peak: f64,
    cfg: DualConfig,
    states: Vec<FadingState>,
    profiles: Vec<StateProfile>,
}

impl DualSolver {
    pub fn new(objective: DualObjective, states: &[FadingState], peak: f64, cfg: &DualConfig) -> Result<Self> {
        cfg.validate()?;
        objective.validate()?;
        if states.is_empty() {
            return Err(invalid("at least one fading state is required"));
        }
        if !(peak.is_finite() && peak > 0.0) {
            return Err(invalid(format!("peak power must be positive, got {peak}")));
        }
        let mut solver = Self {
            objective,
            peak,
            cfg: cfg.clone(),
            states: states.to_vec(),
            profiles: Vec::new(),
        };
        solver.profiles = solver.states.par_iter().map(|s| solver.profile(s)).collect();
        Ok(solver)
    }

    pub fn states(&self) -> &[FadingState] {
        &self.states
    }

    pub fn objective(&self) -> &DualObjective {
        &self.objective
    }

    fn p_at(&self, i: usize) -> f64 {
        self.peak * i as f64 / (self.cfg.grid_p - 1) as f64
    }

    fn beta_at(&self, j: usize) -> f64 {
        if self.objective.pins_beta() {
            0.0
        } else {
            j as f64 / (self.cfg.grid_beta - 1) as f64
        }
    }

    fn beta_points(&self) -> usize {
        if self.objective.pins_beta() {
            1
        } else {
            self.cfg.grid_beta
        }
    }

    fn profile(&self, s: &FadingState) -> StateProfile {
        let branches = self
            .objective
            .orders(s)
            .iter()
            .map(|&mu| {
                let envelope = (0..self.cfg.grid_p)
                    .map(|i| {
                        let p = self.p_at(i);
                        let mut best = (f64::NEG_INFINITY, 0);
                        for j in 0..self.beta_points() {
                            let r = self.objective.rate(&Allocation::new(p, self.beta_at(j), mu), s);
                            if r > best.0 {
                                best = (r, j);
                            }
                        }
                        best
                    })
                    .collect();
                Branch { mu, envelope }
            })
            .collect();
        StateProfile { branches }
    }

    /// Best split for power `p` on the coarse split grid, refined locally.
    fn best_split(&self, s: &FadingState, mu: DecodingOrder, p: f64) -> (f64, f64) {
        if self.objective.pins_beta() {
            return (self.objective.rate(&Allocation::new(p, 0.0, mu), s), 0.0);
        }
        let mut best = (f64::NEG_INFINITY, 0.0);
        for j in 0..self.cfg.grid_beta {
            let beta = self.beta_at(j);
            let r = self.objective.rate(&Allocation::new(p, beta, mu), s);
            if r > best.0 {
                best = (r, beta);
            }
        }
        let mut half = 1.0 / (self.cfg.grid_beta - 1) as f64;
        for _ in 0..self.cfg.refine_rounds {
            let center = best.1;
            for b in refine_offsets() {
                let beta = center + b * half;
                if !(0.0..=1.0).contains(&beta) {
                    continue;
                }
                let r = self.objective.rate(&Allocation::new(p, beta, mu), s);
                if r > best.0 {
                    best = (r, beta);
                }
            }
            half /= REFINE_HALF as f64;
        }
        best
    }

    /// Best `(utility, allocation)` of one decoding-order branch at `lambda`.
    ///
    /// The coarse envelope picks the incumbent power; each refinement pass
    /// then searches a shrinking power window around it, re-optimizing the
    /// split for every candidate power.
    fn solve_branch(&self, s: &FadingState, branch: &Branch, lambda: f64) -> (f64, Allocation) {
        let mut best_i = 0;
        let mut best_u = f64::NEG_INFINITY;
        for (i, &(r, _)) in branch.envelope.iter().enumerate() {
            let u = r - lambda * self.p_at(i);
            if u > best_u {
                best_u = u;
                best_i = i;
            }
        }
        let mut best = Allocation::new(self.p_at(best_i), self.beta_at(branch.envelope[best_i].1), branch.mu);
        let mut half = self.peak / (self.cfg.grid_p - 1) as f64;
        for _ in 0..self.cfg.refine_rounds {
            let center = best.p;
            for a in refine_offsets() {
                let p = center + a * half;
                if p < 0.0 || p > self.peak {
                    continue;
                }
                let (r, beta) = self.best_split(s, branch.mu, p);
                let u = r - lambda * p;
                if u > best_u {
                    best_u = u;
                    best = Allocation::new(p, beta, branch.mu);
                }
            }
            half /= REFINE_HALF as f64;
        }
        (best_u, best)
    }

    fn solve_profiled(&self, i: usize, lambda: f64) -> (f64, Allocation) {
        let s = &self.states[i];
        let mut best: Option<(f64, Allocation)> = None;
        // Branch order is semantic-first, then bit-first; bit-first only wins
        // when strictly better.
        for branch in &self.profiles[i].branches {
            let cand = self.solve_branch(s, branch, lambda);
            if best.map_or(true, |(u, _)| cand.0 > u) {
                best = Some(cand);
            }
        }
        best.expect("every state has at least one branch")
    }

    /// Optimal `(utility, allocation)` of state `i` at price `lambda`.
    pub fn solve_state(&self, i: usize, lambda: f64) -> (f64, Allocation) {
        self.solve_profiled(i, lambda)
    }

    fn at_price(&self, lambda: f64) -> PriceOutcome {
        let per_state: Vec<(f64, Allocation)> =
            (0..self.states.len()).into_par_iter().map(|i| self.solve_profiled(i, lambda)).collect();
        let (utilities, allocations): (Vec<f64>, Vec<Allocation>) = per_state.into_iter().unzip();
        let avg_power = mean(allocations.iter().map(|a| a.p));
        PriceOutcome { lambda, allocations, utilities, avg_power }
    }

    /// Average of the per-state optimal powers at price `lambda`.
    pub fn avg_power(&self, lambda: f64) -> f64 {
        self.at_price(lambda).avg_power
    }

    /// Dual function `E[max utility] + lambda * average`.
    pub fn dual_function(&self, lambda: f64, average: f64) -> f64 {
        let o = self.at_price(lambda);
        mean(o.utilities.iter().copied()) + lambda * average
    }

    /// Solves the ergodic problem for average power `average`.
    pub fn solve(&self, average: f64) -> Result<DualSolution> {
        Budget::new(self.peak, average)?;
        let target = average;
        let tol = self.cfg.lambda_tol;
        let mut evaluations = 1;

        let free = self.at_price(0.0);
        if free.avg_power <= target {
            return Ok(self.finish(&free, &free, None, target, evaluations));
        }

        let mut lo = if self.cfg.lambda_lo > 0.0 {
            evaluations += 1;
            let o = self.at_price(self.cfg.lambda_lo);
            if o.avg_power > target {
                o
            } else {
                free
            }
        } else {
            free
        };
        let mut hi_lambda = self.cfg.lambda_hi.max(lo.lambda * 2.0);
        let mut hi = self.at_price(hi_lambda);
        evaluations += 1;
        let mut doublings = 0;
        while hi.avg_power >= target {
            if doublings == MAX_BRACKET_DOUBLINGS {
                return Err(Error::NoConvergence(format!(
                    "average power still {} > {target} at lambda = {hi_lambda}",
                    hi.avg_power
                )));
            }
            lo = hi;
            hi_lambda *= 2.0;
            hi = self.at_price(hi_lambda);
            evaluations += 1;
            doublings += 1;
        }

        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo.lambda + hi.lambda);
            if mid <= lo.lambda || mid >= hi.lambda {
                break;
            }
            let o = self.at_price(mid);
            evaluations += 1;
            if o.avg_power <= target && o.avg_power >= target * (1.0 - tol) {
                let (mixed, share) = self.mix(&lo, &o, target);
                return Ok(self.finish(&mixed, &lo, share, target, evaluations));
            }
            if o.avg_power > target {
                lo = o;
            } else {
                hi = o;
            }
        }

        // The per-state powers jump at the critical price, so no single price
        // meets the tolerance.
        let (mixed, share) = self.mix(&lo, &hi, target);
        Ok(self.finish(&mixed, &lo, share, target, evaluations))
    }

    /// Spends the budget left over by `hi` (feasible) by switching states to
    /// their maximizer under `lo` (over budget), splitting the last one in
    /// time. Each switch raises the rate by at least `lo.lambda` per watt.
    fn mix(&self, lo: &PriceOutcome, hi: &PriceOutcome, target: f64) -> (PriceOutcome, Option<TimeShare>) {
        let n = self.states.len() as f64;
        let mut allocations = hi.allocations.clone();
        let mut used: f64 = allocations.iter().map(|a| a.p).sum();
        let budget = target * n;
        let mut share = None;
        for i in 0..allocations.len() {
            let alt = lo.allocations[i];
            let delta = alt.p - allocations[i].p;
            if alt == allocations[i] || delta <= 0.0 {
                continue;
            }
            if used + delta <= budget {
                allocations[i] = alt;
                used += delta;
            } else {
                let weight = ((budget - used) / delta).clamp(0.0, 1.0);
                if weight > 0.0 {
                    share = Some(TimeShare { state: i, weight, alternate: alt });
                }
                break;
            }
        }
        let mixed = PriceOutcome {
            lambda: hi.lambda,
            avg_power: used / n,
            utilities: hi.utilities.clone(),
            allocations,
        };
        (mixed, share)
    }

    /// Assembles the primal solution. `other` is a second maximizer set whose
    /// allocations are also candidates when evaluating the dual function.
    fn finish(
        &self,
        primal: &PriceOutcome,
        other: &PriceOutcome,
        share: Option<TimeShare>,
        target: f64,
        evaluations: usize,
    ) -> DualSolution {
        let n = self.states.len() as f64;
        let rate_of = |i: usize, a: &Allocation| self.objective.rate(a, &self.states[i]);
        let mut rate_sum = 0.0;
        let mut power_sum = 0.0;
        for (i, a) in primal.allocations.iter().enumerate() {
            match share {
                Some(ts) if ts.state == i => {
                    let w = ts.weight;
                    rate_sum += (1.0 - w) * rate_of(i, a) + w * rate_of(i, &ts.alternate);
                    power_sum += (1.0 - w) * a.p + w * ts.alternate.p;
                }
                _ => {
                    rate_sum += rate_of(i, a);
                    power_sum += a.p;
                }
            }
        }
        let dual_at = |lambda: f64| {
            let total: f64 = (0..self.states.len())
                .map(|i| {
                    let u = |a: &Allocation| rate_of(i, a) - lambda * a.p;
                    u(&primal.allocations[i]).max(u(&other.allocations[i]))
                })
                .sum();
            total / n + lambda * target
        };
        let dual_value = dual_at(primal.lambda).min(dual_at(other.lambda));
        DualSolution {
            allocations: primal.allocations.clone(),
            time_share: share,
            lambda: primal.lambda,
            ergodic_rate: rate_sum / n,
            avg_power: power_sum / n,
            dual_value,
            evaluations,
        }
    }
}

/// Offsets `-1, ..., 1` in steps of `1 / REFINE_HALF`, in units of the current half-width.
fn refine_offsets() -> impl Iterator<Item = f64> {
    let m = REFINE_HALF as i64;
    (-m..=m).map(move |k| k as f64 / m as f64)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Best `(utility, allocation)` for a single state of the semantic scheme.
pub fn solve_state(
    s: &FadingState,
    lambda: f64,
    peak: f64,
    sp: &SemanticParams,
    cfg: &DualConfig,
) -> Result<(f64, Allocation)> {
    let solver = DualSolver::new(DualObjective::Semantic(sp.clone()), std::slice::from_ref(s), peak, cfg)?;
    Ok(solver.solve_state(0, lambda))
}

/// Average optimal power of the semantic scheme at price `lambda`.
pub fn avg_power(
    lambda: f64,
    states: &[FadingState],
    peak: f64,
    sp: &SemanticParams,
    cfg: &DualConfig,
) -> Result<f64> {
    let solver = DualSolver::new(DualObjective::Semantic(sp.clone()), states, peak, cfg)?;
    Ok(solver.avg_power(lambda))
}

/// Optimal ergodic secrecy rate of the semantic scheme under `budget`.
pub fn solve(states: &[FadingState], budget: &Budget, sp: &SemanticParams, cfg: &DualConfig) -> Result<DualSolution> {
    budget.validate()?;
    DualSolver::new(DualObjective::Semantic(sp.clone()), states, budget.peak, cfg)?.solve(budget.average)
}

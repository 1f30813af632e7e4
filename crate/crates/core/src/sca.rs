//! Successive convex approximation (SCA) with the semantic-first decoding order.
//!
//! With `mu = 0` fixed, each state is described by the semantic power `p_s`,
//! the bit power `p_b`, and an auxiliary similarity level `chi` bounded by the
//! logistic curve. Two first-order bounds turn the problem convex around an
//! anchor point:
//!
//! - the eavesdropper rate `log2(1 + (p_s + p_b) g_E) - log2(1 + p_s g_E)` is
//!   over-estimated by linearizing its first term ([`re_upper_bound`]);
//! - the concave left side of the log-form similarity constraint,
//!   `ln(chi - a1) + 10 c1 lg(1 + p_b g_L)`, is over-estimated by its tangent
//!   plane ([`eta_bound`]).
//!
//! Each convex surrogate is solved by dual decomposition: bisection on the
//! average-power multiplier wraps independent per-state maximizations. Every
//! iterate is feasible for the original problem and the objective never
//! decreases.

use std::f64::consts::{LN_10, LN_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::FadingState;
use crate::error::{invalid, Error, Result};
use crate::optimal::Budget;
use crate::rates::{secrecy_rate, Allocation, DecodingOrder};
use crate::scalar::{golden_max, last_true};
use crate::semantic::SemanticParams;

const MAX_BRACKET_DOUBLINGS: usize = 60;
const MAX_PRICE_STEPS: usize = 200;
/// Relative average-power residual accepted by the multiplier search.
const POWER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaConfig {
    pub max_iters: usize,
    /// Stop once the relative objective gain of an iteration drops below this.
    pub obj_tol: f64,
    /// Strict lower bound on the semantic power, in watts.
    pub p_floor: f64,
    /// Distance kept between `chi` and both logistic asymptotes.
    pub chi_margin: f64,
    /// Accuracy of the per-iteration convex solve.
    pub inner_tol: f64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self { max_iters: 50, obj_tol: 1e-4, p_floor: 1e-9, chi_margin: 1e-6, inner_tol: 1e-6 }
    }
}

impl ScaConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.obj_tol, self.p_floor, self.chi_margin, self.inner_tol]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.max_iters == 0 {
            return Err(invalid(format!("SCA settings must be positive with max_iters >= 1: {self:?}")));
        }
        Ok(())
    }

    fn chi_bounds(&self, sp: &SemanticParams) -> Result<(f64, f64)> {
        let lo = sp.a1 + self.chi_margin;
        let hi = sp.a2 - self.chi_margin;
        if lo >= hi {
            return Err(invalid("chi_margin leaves no room between the similarity asymptotes"));
        }
        Ok((lo, hi))
    }
}

/// Surrogate variables of one fading state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaVars {
    pub p_s: f64,
    pub p_b: f64,
    pub chi: f64,
}

impl ScaVars {
    pub fn power(&self) -> f64 {
        self.p_s + self.p_b
    }

    pub fn allocation(&self) -> Allocation {
        let p = self.power();
        let beta = if p > 0.0 { self.p_s / p } else { 1.0 };
        Allocation::new(p, beta, DecodingOrder::SemanticFirst)
    }
}

/// One SCA iterate: surrogate variables for every fading state.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaPoint {
    pub vars: Vec<ScaVars>,
}

impl ScaPoint {
    pub fn avg_power(&self) -> f64 {
        self.vars.iter().map(ScaVars::power).sum::<f64>() / self.vars.len() as f64
    }

    pub fn allocations(&self) -> Vec<Allocation> {
        self.vars.iter().map(ScaVars::allocation).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaResult {
    pub allocations: Vec<Allocation>,
    /// Mean of the clamped per-state secrecy rates.
    pub ergodic_rate: f64,
    pub avg_power: f64,
    /// Objective value at the initial point and after every iteration.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub point: ScaPoint,
}

/// Eavesdropper rate with the semantic stream as interference.
#[inline]
pub fn rate_eve_split(p_b: f64, p_s: f64, g_e: f64) -> f64 {
    (p_b * g_e / (p_s * g_e + 1.0)).ln_1p() / LN_2
}

/// Convex upper bound on [`rate_eve_split`], tight at `anchor = (p_b, p_s)`.
pub fn re_upper_bound(p_b: f64, p_s: f64, anchor: (f64, f64), g_e: f64) -> f64 {
    let (pb_r, ps_r) = anchor;
    let d = 1.0 + (ps_r + pb_r) * g_e;
    d.log2() + g_e * (p_s - ps_r + p_b - pb_r) / (d * LN_2) - (p_s * g_e).ln_1p() / LN_2
}

/// Left side of the log-form similarity constraint,
/// `ln(chi - a1) + 10 c1 lg(1 + p_b g_L)`.
pub fn similarity_constraint_lhs(chi: f64, p_b: f64, g_l: f64, sp: &SemanticParams) -> f64 {
    (chi - sp.a1).ln() + sp.c1 * 10.0 * (p_b * g_l).ln_1p() / LN_10
}

/// Right side of the log-form similarity constraint,
/// `10 c1 lg(p_s g_L) + c2 + ln(a2 - chi)`.
pub fn similarity_constraint_rhs(chi: f64, p_s: f64, g_l: f64, sp: &SemanticParams) -> f64 {
    sp.c1 * 10.0 * (p_s * g_l).log10() + sp.c2 + (sp.a2 - chi).ln()
}

/// Affine upper bound on [`similarity_constraint_lhs`], tight at `anchor = (chi, p_b)`.
pub fn eta_bound(chi: f64, p_b: f64, anchor: (f64, f64), g_l: f64, sp: &SemanticParams) -> Result<f64> {
    let (chi_r, pb_r) = anchor;
    if !(chi_r > sp.a1) {
        return Err(invalid(format!("anchor chi {chi_r} must exceed a1 = {}", sp.a1)));
    }
    if !(pb_r >= 0.0) {
        return Err(invalid(format!("anchor bit power {pb_r} must be non-negative")));
    }
    let gap = chi_r - sp.a1;
    let q = 1.0 + pb_r * g_l;
    Ok(gap.ln() + (chi - chi_r) / gap + sp.c1 * 10.0 * q.log10() + 10.0 * sp.c1 * g_l * (p_b - pb_r) / (q * LN_10))
}

/// Per-state value of the reformulated objective,
/// `rho/K * chi + log2(1 + p_b g_L) - R_E(p_b, p_s)`.
pub fn state_objective(v: &ScaVars, s: &FadingState, sp: &SemanticParams) -> f64 {
    sp.bits_per_similarity() * v.chi + (v.p_b * s.g_l).ln_1p() / LN_2 - rate_eve_split(v.p_b, v.p_s, s.g_e)
}

/// Ergodic objective of the reformulated problem (no clamp).
pub fn objective(states: &[FadingState], point: &ScaPoint, sp: &SemanticParams) -> f64 {
    states.iter().zip(&point.vars).map(|(s, v)| state_objective(v, s, sp)).sum::<f64>() / states.len() as f64
}

fn check_inputs(states: &[FadingState], budget: &Budget, sp: &SemanticParams, cfg: &ScaConfig) -> Result<()> {
    budget.validate()?;
    sp.validate()?;
    cfg.validate()?;
    if states.is_empty() {
        return Err(invalid("at least one fading state is required"));
    }
    if let Some(i) = states.iter().position(|s| !(s.g_l > 0.0)) {
        return Err(invalid(format!("state {i} has g_L = 0; the semantic stream cannot be received")));
    }
    if cfg.p_floor >= budget.peak {
        return Err(invalid("p_floor must be below the peak power"));
    }
    Ok(())
}

/// Checks every constraint of the reformulated problem at `point`.
pub fn check_feasible(
    states: &[FadingState],
    point: &ScaPoint,
    budget: &Budget,
    sp: &SemanticParams,
    cfg: &ScaConfig,
) -> Result<()> {
    const SLACK: f64 = 1e-9;
    if point.vars.len() != states.len() {
        return Err(invalid("point and state counts differ"));
    }
    let (chi_lo, chi_hi) = cfg.chi_bounds(sp)?;
    for (i, (v, s)) in point.vars.iter().zip(states).enumerate() {
        let fail = |what: &str| Err(invalid(format!("state {i}: {what} ({v:?})")));
        if v.p_s < cfg.p_floor * (1.0 - SLACK) || v.p_b < 0.0 {
            return fail("power below its floor");
        }
        if v.power() > budget.peak * (1.0 + SLACK) {
            return fail("peak power exceeded");
        }
        if v.chi < chi_lo - SLACK * chi_lo || v.chi > chi_hi + SLACK {
            return fail("chi outside its interval");
        }
        let gamma = v.p_s * s.g_l / (v.p_b * s.g_l + 1.0);
        let excess = sp.similarity_excess(gamma);
        if v.chi - sp.a1 > excess * (1.0 + SLACK) + 1e-15 {
            return fail("chi above the similarity curve");
        }
    }
    if point.avg_power() > budget.average * (1.0 + SLACK) {
        return Err(invalid(format!(
            "average power {} exceeds budget {}",
            point.avg_power(),
            budget.average
        )));
    }
    Ok(())
}

/// Feasible starting point: equal split of the average budget in every state,
/// with the semantic power raised where needed to keep `chi` above its floor.
pub fn init_point(states: &[FadingState], budget: &Budget, sp: &SemanticParams, cfg: &ScaConfig) -> Result<ScaPoint> {
    check_inputs(states, budget, sp, cfg)?;
    let (chi_lo, chi_hi) = cfg.chi_bounds(sp)?;
    // Smallest SINR whose similarity reaches chi_lo, nudged up against rounding.
    let gamma_min = sp.sinr_for_similarity(chi_lo)? * (1.0 + 1e-9);
    let per_state = budget.average.min(budget.peak);
    let half = per_state / 2.0;
    // p_s >= gamma_min (1 + p_b g_L) / g_L keeps the similarity at least chi_lo.
    let min_ps = |p_b: f64, g_l: f64| (gamma_min * (1.0 + p_b * g_l) / g_l).max(cfg.p_floor);

    let needs_more = states.iter().any(|s| min_ps(half, s.g_l) > half);
    let totals: Vec<f64> = if needs_more {
        let minimum: Vec<f64> = states.iter().map(|s| min_ps(0.0, s.g_l)).collect();
        let mean_min = minimum.iter().sum::<f64>() / states.len() as f64;
        if mean_min > budget.average || minimum.iter().any(|&m| m > budget.peak) {
            return Err(invalid(format!(
                "average power {} cannot keep every semantic stream above the similarity floor (needs {mean_min})",
                budget.average
            )));
        }
        let spare = per_state - mean_min;
        minimum.iter().map(|m| (m + spare).min(budget.peak)).collect()
    } else {
        vec![per_state; states.len()]
    };

    let vars = states
        .iter()
        .zip(totals)
        .map(|(s, total)| {
            let (p_s, p_b) = if min_ps(total / 2.0, s.g_l) <= total / 2.0 {
                (total / 2.0, total / 2.0)
            } else {
                // Solve p_s = min_ps(p_b) with p_s + p_b = total.
                let p_b = ((total - gamma_min / s.g_l) / (1.0 + gamma_min)).max(0.0);
                (min_ps(p_b, s.g_l).max(total - p_b), p_b)
            };
            let gamma = p_s * s.g_l / (p_b * s.g_l + 1.0);
            let chi = sp.similarity(gamma).clamp(chi_lo, chi_hi);
            ScaVars { p_s, p_b, chi }
        })
        .collect();
    Ok(ScaPoint { vars })
}

/// Convex surrogate of one fading state around its anchor.
struct StateSurrogate {
    w: f64,
    g_l: f64,
    g_e: f64,
    /// Slope of the linearized `log2(1 + (p_s + p_b) g_E)` term.
    k_e: f64,
    re_const: f64,
    eta_const: f64,
    eta_chi: f64,
    eta_pb: f64,
    /// `ln 10 / (10 c1)`.
    scale: f64,
    c2: f64,
    a2: f64,
    chi_lo: f64,
    chi_hi: f64,
    p_floor: f64,
    peak: f64,
}

impl StateSurrogate {
    fn new(s: &FadingState, anchor: &ScaVars, sp: &SemanticParams, cfg: &ScaConfig, peak: f64) -> Result<Self> {
        let (chi_lo, chi_hi) = cfg.chi_bounds(sp)?;
        let d = 1.0 + (anchor.p_s + anchor.p_b) * s.g_e;
        let k_e = s.g_e / (d * LN_2);
        let gap = anchor.chi - sp.a1;
        if !(gap > 0.0) {
            return Err(invalid(format!("anchor chi {} must exceed a1", anchor.chi)));
        }
        let q = 1.0 + anchor.p_b * s.g_l;
        let eta_pb = 10.0 * sp.c1 * s.g_l / (q * LN_10);
        Ok(Self {
            w: sp.bits_per_similarity(),
            g_l: s.g_l,
            g_e: s.g_e,
            k_e,
            re_const: d.log2() - k_e * (anchor.p_s + anchor.p_b),
            eta_const: gap.ln() - anchor.chi / gap + sp.c1 * 10.0 * q.log10() - eta_pb * anchor.p_b,
            eta_chi: 1.0 / gap,
            eta_pb,
            scale: LN_10 / (10.0 * sp.c1),
            c2: sp.c2,
            a2: sp.a2,
            chi_lo,
            chi_hi,
            p_floor: cfg.p_floor,
            peak,
        })
    }

    /// Smallest semantic power meeting the linearized similarity constraint.
    #[inline]
    fn psi(&self, chi: f64, p_b: f64) -> f64 {
        let eta = self.eta_const + self.eta_chi * chi + self.eta_pb * p_b;
        (self.scale * (eta - self.c2 - (self.a2 - chi).ln())).exp() / self.g_l
    }

    #[inline]
    fn re_bar(&self, p_b: f64, p_s: f64) -> f64 {
        self.re_const + self.k_e * (p_s + p_b) - (p_s * self.g_e).ln_1p() / LN_2
    }

    /// `d/dp_s` of the surrogate objective net of the power price.
    #[inline]
    fn ps_slope(&self, p_s: f64, price: f64) -> f64 {
        -self.k_e + self.g_e / ((1.0 + p_s * self.g_e) * LN_2) - price
    }

    fn value(&self, v: &ScaVars, price: f64) -> f64 {
        self.w * v.chi + (v.p_b * self.g_l).ln_1p() / LN_2 - self.re_bar(v.p_b, v.p_s) - price * v.power()
    }

    fn pb_feasible(&self, p_b: f64) -> bool {
        let room = self.peak - p_b;
        room >= self.p_floor && self.psi(self.chi_lo, p_b) <= room
    }

    /// Best `(chi, p_s)` for a fixed bit power.
    fn best_given_pb(&self, p_b: f64, price: f64) -> ScaVars {
        let room = self.peak - p_b;
        let free = if self.g_e > 0.0 {
            1.0 / (LN_2 * (self.k_e + price)) - 1.0 / self.g_e
        } else {
            f64::NEG_INFINITY
        };
        let target = free.clamp(self.p_floor, room);
        // Raising chi is worth rho/K per unit until the semantic power it
        // forces costs more than that at the margin.
        let keep = |chi: f64| {
            let psi = self.psi(chi, p_b);
            if psi > room {
                return false;
            }
            if psi <= target {
                return true;
            }
            let dpsi = psi * self.scale * (self.eta_chi + 1.0 / (self.a2 - chi));
            self.w + self.ps_slope(psi, price) * dpsi >= 0.0
        };
        let chi = last_true(keep, self.chi_lo, self.chi_hi, 1e-11);
        let p_s = target.max(self.psi(chi, p_b)).min(room);
        ScaVars { p_s, p_b, chi }
    }

    fn solve(&self, price: f64, tol: f64) -> Result<ScaVars> {
        if !self.pb_feasible(0.0) {
            return Err(invalid("surrogate feasible set is empty"));
        }
        let pb_max = last_true(|pb| self.pb_feasible(pb), 0.0, self.peak - self.p_floor, 1e-12);
        let (p_b, _) = golden_max(|pb| self.value(&self.best_given_pb(pb, price), price), 0.0, pb_max, tol);
        Ok(self.best_given_pb(p_b, price))
    }
}

fn solve_all(surrogates: &[StateSurrogate], price: f64, tol: f64) -> Result<Vec<ScaVars>> {
    surrogates.par_iter().map(|s| s.solve(price, tol)).collect()
}

fn mean_power(vars: &[ScaVars]) -> f64 {
    vars.iter().map(ScaVars::power).sum::<f64>() / vars.len() as f64
}

/// Maximizes the convex surrogate built at `anchor`.
pub fn solve_surrogate(
    states: &[FadingState],
    anchor: &ScaPoint,
    budget: &Budget,
    sp: &SemanticParams,
    cfg: &ScaConfig,
) -> Result<ScaPoint> {
    check_inputs(states, budget, sp, cfg)?;
    check_feasible(states, anchor, budget, sp, cfg)?;
    let surrogates = states
        .iter()
        .zip(&anchor.vars)
        .map(|(s, a)| StateSurrogate::new(s, a, sp, cfg, budget.peak))
        .collect::<Result<Vec<_>>>()?;
    // Bit-power resolution that keeps per-state objective errors well below inner_tol.
    let pb_tol = (cfg.inner_tol * 1e-3).max(1e-12) * budget.peak;
    let target = budget.average;

    let mut best = solve_all(&surrogates, 0.0, pb_tol)?;
    if mean_power(&best) > target {
        let (mut lo, mut lo_excess) = (0.0, mean_power(&best) - target);
        let mut hi = 1.0;
        let mut hi_vars = solve_all(&surrogates, hi, pb_tol)?;
        let mut doublings = 0;
        while mean_power(&hi_vars) > target {
            if doublings == MAX_BRACKET_DOUBLINGS {
                return Err(Error::NoConvergence(format!(
                    "surrogate multiplier bracket did not close (price {hi})"
                )));
            }
            lo = hi;
            lo_excess = mean_power(&hi_vars) - target;
            hi *= 2.0;
            hi_vars = solve_all(&surrogates, hi, pb_tol)?;
            doublings += 1;
        }
        // Illinois-style false position on the (decreasing) power excess.
        let mut hi_excess = mean_power(&hi_vars) - target;
        let mut side = 0i8;
        for _ in 0..MAX_PRICE_STEPS {
            if -hi_excess <= POWER_TOL * target || hi - lo <= 1e-14 * hi {
                break;
            }
            let mut price = hi - hi_excess * (hi - lo) / (hi_excess - lo_excess);
            if !(price > lo && price < hi) {
                price = 0.5 * (lo + hi);
            }
            let vars = solve_all(&surrogates, price, pb_tol)?;
            let excess = mean_power(&vars) - target;
            if excess > 0.0 {
                lo = price;
                lo_excess = excess;
                if side == -1 {
                    hi_excess *= 0.5;
                }
                side = -1;
            } else {
                hi = price;
                hi_excess = excess;
                hi_vars = vars;
                if side == 1 {
                    lo_excess *= 0.5;
                }
                side = 1;
            }
        }
        best = hi_vars;
    }

    let candidate = ScaPoint { vars: best };
    let value = |p: &ScaPoint| {
        surrogates.iter().zip(&p.vars).map(|(s, v)| s.value(v, 0.0)).sum::<f64>() / states.len() as f64
    };
    // The surrogate is tight at the anchor, so an accurate maximizer can only
    // improve on it; fall back to the anchor if numerical error says otherwise.
    if value(&candidate) < value(anchor) {
        return Ok(anchor.clone());
    }
    Ok(candidate)
}

/// Raises every `chi` to the logistic value its powers support.
fn tighten(states: &[FadingState], point: &mut ScaPoint, sp: &SemanticParams, cfg: &ScaConfig) -> Result<()> {
    let (_, chi_hi) = cfg.chi_bounds(sp)?;
    for (v, s) in point.vars.iter_mut().zip(states) {
        let gamma = v.p_s * s.g_l / (v.p_b * s.g_l + 1.0);
        let exact = sp.similarity(gamma).min(chi_hi);
        if exact > v.chi {
            v.chi = exact;
        }
    }
    Ok(())
}

/// Runs SCA from [`init_point`] until the relative objective gain falls below
/// `obj_tol` or `max_iters` surrogate solves have been made.
pub fn run(states: &[FadingState], budget: &Budget, sp: &SemanticParams, cfg: &ScaConfig) -> Result<ScaResult> {
    let mut point = init_point(states, budget, sp, cfg)?;
    let mut obj = objective(states, &point, sp);
    let mut history = vec![obj];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        let mut next = solve_surrogate(states, &point, budget, sp, cfg)?;
        tighten(states, &mut next, sp, cfg)?;
        iterations += 1;
        let next_obj = objective(states, &next, sp);
        history.push(next_obj);
        let gain = (next_obj - obj) / obj.abs().max(f64::MIN_POSITIVE);
        point = next;
        obj = next_obj;
        if gain < cfg.obj_tol {
            converged = true;
            break;
        }
    }
    let allocations = point.allocations();
    let ergodic_rate =
        states.iter().zip(&allocations).map(|(s, a)| secrecy_rate(a, s, sp)).sum::<f64>() / states.len() as f64;
    Ok(ScaResult {
        ergodic_rate,
        avg_power: point.avg_power(),
        allocations,
        objective_history: history,
        iterations,
        converged,
        point,
    })
}

//! Time integration of the projected subgradient flow on a product of
//! simplices, with running Cesàro means and exploitability-based stopping.
//!
//! The continuous model is the differential inclusion u̇_j + ∂_{x_j}g_j(u) ∋ 0
//! restricted to the simplex product; its variational form says the velocity
//! is the tangent-cone projection of the negated gradient field. Three
//! discretizations are offered:
//!
//! * `projected-euler` — the catching-up scheme x⁺ = P(x − h·G(x)); robust
//!   default.
//! * `proximal-implicit` — the resolvent step x⁺ = P(x − h·G(x⁺)), solved by
//!   fixed-point iteration; nonexpansive for monotone games (use when `h·L` is
//!   large; the inner map contracts for h·L < 1).
//! * `interior-rk4` — classical Runge–Kutta on the smooth interior field
//!   ẋ_j = −(G_j − mean G_j); high fidelity for trajectories that stay
//!   strictly inside the simplex, with an automatic projected-Euler fallback
//!   (flagged in the result) whenever a stage leaves the interior.
//!
//! Trajectories of monotone games need not converge — the benchmark game in
//! [`crate::analytic`] orbits forever — but running time-averages do, so the
//! integrator maintains a trapezoidal Cesàro mean at full step resolution and
//! reports exploitability of that mean.

use crate::error::{Error, Result};
use crate::game::{simplex_project, MixedStrategy, StrategyProfile, TensorGame};

/// States with any coordinate below this margin do not count as interior for
/// the RK4 scheme; keeps rounding from triggering spurious fallbacks.
pub const INTERIOR_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ProjectedEuler,
    ProximalImplicit,
    InteriorRk4,
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub scheme: Scheme,
    /// Step size in flow time.
    pub h: f64,
    pub t_max: f64,
    /// Stop once the Cesàro mean's exploitability falls to this level.
    pub gap_tol: f64,
    /// Record (and test the gap) every this many steps.
    pub record_every: usize,
    /// Inner fixed-point tolerance of the implicit scheme (max-norm).
    pub inner_tol: f64,
    /// Inner iteration cap of the implicit scheme.
    pub inner_max: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            scheme: Scheme::ProjectedEuler,
            h: 0.1,
            t_max: 100.0,
            gap_tol: 1e-2,
            record_every: 1,
            inner_tol: 1e-10,
            inner_max: 100,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::invalid(format!("step size h = {} must be > 0", self.h)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::invalid(format!("t_max = {} must be > 0", self.t_max)));
        }
        if !(self.gap_tol.is_finite() && self.gap_tol >= 0.0) {
            return Err(Error::invalid(format!(
                "gap_tol = {} must be >= 0",
                self.gap_tol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be >= 1"));
        }
        if !(self.inner_tol.is_finite() && self.inner_tol > 0.0) {
            return Err(Error::invalid(format!(
                "inner_tol = {} must be > 0",
                self.inner_tol
            )));
        }
        if self.inner_max == 0 {
            return Err(Error::invalid("inner_max must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GapTolMet,
    TMaxReached,
}

/// Recorded output of an integration run.
///
/// `cesaro[i]` is the trapezoidal time-average of the trajectory over
/// `[0, times[i]]` (the initial state at time 0), accumulated at full step
/// resolution regardless of `record_every`; `gaps[i]` is the exploitability
/// of that average.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub times: Vec<f64>,
    pub states: Vec<StrategyProfile>,
    pub cesaro: Vec<StrategyProfile>,
    pub gaps: Vec<f64>,
    pub stop_reason: StopReason,
    /// Non-fatal solver notes: implicit inner iterations that hit `inner_max`,
    /// RK4 steps that fell back to projected Euler.
    pub warnings: Vec<String>,
}

impl FlowResult {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least the initial record")
    }

    pub fn final_state(&self) -> &StrategyProfile {
        self.states.last().expect("at least the initial record")
    }

    pub fn final_cesaro(&self) -> &StrategyProfile {
        self.cesaro.last().expect("at least the initial record")
    }

    pub fn final_gap(&self) -> f64 {
        *self.gaps.last().expect("at least the initial record")
    }
}

/// A flow field on a product of simplices: per-population dimensions, the
/// stacked (sub)gradient map, and an exploitability functional. N-player
/// games, mean-field costs, and symmetric single-population views all
/// implement this and share one engine.
pub(crate) trait SimplexField {
    fn dims(&self) -> Vec<usize>;
    /// Write the field value G_j(x) for every population j into `out`.
    fn eval_into(&self, x: &[Vec<f64>], out: &mut [Vec<f64>]);
    fn gap(&self, x: &[Vec<f64>]) -> f64;
}

pub(crate) struct GameField<'a>(pub &'a TensorGame);

impl SimplexField for GameField<'_> {
    fn dims(&self) -> Vec<usize> {
        self.0.action_counts().to_vec()
    }

    fn eval_into(&self, x: &[Vec<f64>], out: &mut [Vec<f64>]) {
        let refs: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
        for j in 0..self.0.num_players() {
            out[j] = self.0.own_gradient_raw(&refs, j);
        }
    }

    fn gap(&self, x: &[Vec<f64>]) -> f64 {
        let refs: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
        self.0.nash_gap_raw(&refs)
    }
}

fn is_interior(x: &[Vec<f64>]) -> bool {
    x.iter().all(|xj| xj.iter().all(|&v| v >= INTERIOR_MARGIN))
}

/// Clamp stray `(-1e-12, 0)` entries to zero and renormalize drifted sums so
/// recorded states satisfy the strategy invariants exactly.
fn tidy(x: &mut [Vec<f64>]) {
    for xj in x.iter_mut() {
        let mut sum = 0.0;
        for v in xj.iter_mut() {
            if *v < 0.0 {
                debug_assert!(*v > -1e-12);
                *v = 0.0;
            }
            sum += *v;
        }
        if (sum - 1.0).abs() > 1e-15 {
            for v in xj.iter_mut() {
                *v /= sum;
            }
        }
    }
}

fn euler_step<F: SimplexField>(
    field: &F,
    x: &[Vec<f64>],
    h: f64,
    grad: &mut [Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    field.eval_into(x, grad);
    let mut next = Vec::with_capacity(x.len());
    for (xj, gj) in x.iter().zip(grad.iter()) {
        let moved: Vec<f64> = xj.iter().zip(gj).map(|(&a, &g)| a - h * g).collect();
        next.push(simplex_project(&moved)?.into_probs());
    }
    Ok(next)
}

fn implicit_step<F: SimplexField>(
    field: &F,
    x: &[Vec<f64>],
    h: f64,
    inner_tol: f64,
    inner_max: usize,
    grad: &mut [Vec<f64>],
) -> Result<(Vec<Vec<f64>>, f64, usize)> {
    let mut y: Vec<Vec<f64>> = x.to_vec();
    let mut residual = f64::INFINITY;
    let mut iters = 0;
    while iters < inner_max {
        field.eval_into(&y, grad);
        let mut next = Vec::with_capacity(x.len());
        for (xj, gj) in x.iter().zip(grad.iter()) {
            let moved: Vec<f64> = xj.iter().zip(gj).map(|(&a, &g)| a - h * g).collect();
            next.push(simplex_project(&moved)?.into_probs());
        }
        residual = next
            .iter()
            .zip(&y)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(&p, &q)| (p - q).abs()))
            .fold(0.0, f64::max);
        y = next;
        iters += 1;
        if residual < inner_tol {
            break;
        }
    }
    Ok((y, residual, iters))
}

/// Tangent field −(G_j − mean G_j) of the interior dynamics.
fn tangent_field<F: SimplexField>(field: &F, x: &[Vec<f64>], grad: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    field.eval_into(x, grad);
    grad.iter()
        .map(|gj| {
            let mean = gj.iter().sum::<f64>() / gj.len() as f64;
            gj.iter().map(|&g| mean - g).collect()
        })
        .collect()
}

fn axpy(x: &[Vec<f64>], a: f64, k: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .zip(k)
        .map(|(xj, kj)| xj.iter().zip(kj).map(|(&p, &q)| p + a * q).collect())
        .collect()
}

/// One classical RK4 step of the interior ODE, or `None` if any stage or the
/// result leaves the interior margin.
fn rk4_step<F: SimplexField>(
    field: &F,
    x: &[Vec<f64>],
    h: f64,
    grad: &mut [Vec<f64>],
) -> Option<Vec<Vec<f64>>> {
    if !is_interior(x) {
        return None;
    }
    let k1 = tangent_field(field, x, grad);
    let y2 = axpy(x, h / 2.0, &k1);
    if !is_interior(&y2) {
        return None;
    }
    let k2 = tangent_field(field, &y2, grad);
    let y3 = axpy(x, h / 2.0, &k2);
    if !is_interior(&y3) {
        return None;
    }
    let k3 = tangent_field(field, &y3, grad);
    let y4 = axpy(x, h, &k3);
    if !is_interior(&y4) {
        return None;
    }
    let k4 = tangent_field(field, &y4, grad);
    let mut next: Vec<Vec<f64>> = x
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            xj.iter()
                .enumerate()
                .map(|(i, &p)| {
                    p + h / 6.0 * (k1[j][i] + 2.0 * k2[j][i] + 2.0 * k3[j][i] + k4[j][i])
                })
                .collect()
        })
        .collect();
    if !is_interior(&next) {
        return None;
    }
    tidy(&mut next);
    Some(next)
}

pub(crate) fn run_flow<F: SimplexField>(
    field: &F,
    x0: Vec<Vec<f64>>,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    cfg.validate()?;
    let dims = field.dims();
    if x0.len() != dims.len() || x0.iter().zip(&dims).any(|(xj, &m)| xj.len() != m) {
        return Err(Error::dims("initial state does not match the field".to_string()));
    }

    let mut grad: Vec<Vec<f64>> = dims.iter().map(|&m| vec![0.0; m]).collect();
    let mut acc: Vec<Vec<f64>> = dims.iter().map(|&m| vec![0.0; m]).collect();

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut cesaro = Vec::new();
    let mut gaps = Vec::new();

    let mut implicit_misses = 0usize;
    let mut first_miss: Option<(usize, f64)> = None;
    let mut rk4_fallbacks = 0usize;
    let mut first_fallback: Option<usize> = None;

    let to_profile = |raw: &[Vec<f64>]| -> Result<StrategyProfile> {
        StrategyProfile::new(
            raw.iter()
                .map(|v| MixedStrategy::new(v.clone()))
                .collect::<Result<Vec<_>>>()?,
        )
    };

    // The running average at t = 0 is the initial state itself.
    let record =
        |t: f64,
         x: &[Vec<f64>],
         ces: &[Vec<f64>],
         times: &mut Vec<f64>,
         states: &mut Vec<StrategyProfile>,
         cesaro: &mut Vec<StrategyProfile>,
         gaps: &mut Vec<f64>|
         -> Result<f64> {
            let ces_profile = to_profile(ces)?;
            let ces_raw: Vec<Vec<f64>> = ces_profile
                .strategies()
                .iter()
                .map(|s| s.probs().to_vec())
                .collect();
            let gap = field.gap(&ces_raw);
            times.push(t);
            states.push(to_profile(x)?);
            cesaro.push(ces_profile);
            gaps.push(gap);
            Ok(gap)
        };

    let mut x = x0;
    tidy(&mut x);
    let gap0 = record(0.0, &x, &x, &mut times, &mut states, &mut cesaro, &mut gaps)?;

    let mut stop_reason = StopReason::TMaxReached;
    if gap0 <= cfg.gap_tol {
        stop_reason = StopReason::GapTolMet;
    } else {
        let mut k = 0usize;
        loop {
            let next = match cfg.scheme {
                Scheme::ProjectedEuler => euler_step(field, &x, cfg.h, &mut grad)?,
                Scheme::ProximalImplicit => {
                    let (y, residual, _) =
                        implicit_step(field, &x, cfg.h, cfg.inner_tol, cfg.inner_max, &mut grad)?;
                    if residual >= cfg.inner_tol {
                        implicit_misses += 1;
                        first_miss.get_or_insert((k + 1, residual));
                    }
                    y
                }
                Scheme::InteriorRk4 => match rk4_step(field, &x, cfg.h, &mut grad) {
                    Some(y) => y,
                    None => {
                        rk4_fallbacks += 1;
                        first_fallback.get_or_insert(k + 1);
                        euler_step(field, &x, cfg.h, &mut grad)?
                    }
                },
            };
            // Trapezoidal accumulation over the step just taken.
            for (aj, (xj, nj)) in acc.iter_mut().zip(x.iter().zip(&next)) {
                for (a, (&p, &q)) in aj.iter_mut().zip(xj.iter().zip(nj)) {
                    *a += 0.5 * cfg.h * (p + q);
                }
            }
            x = next;
            k += 1;
            let t = k as f64 * cfg.h;
            let done = t >= cfg.t_max - 1e-12;
            if k % cfg.record_every == 0 || done {
                let ces: Vec<Vec<f64>> =
                    acc.iter().map(|aj| aj.iter().map(|a| a / t).collect()).collect();
                let gap = record(t, &x, &ces, &mut times, &mut states, &mut cesaro, &mut gaps)?;
                if gap <= cfg.gap_tol {
                    stop_reason = StopReason::GapTolMet;
                    break;
                }
            }
            if done {
                break;
            }
        }
    }

    let mut warnings = Vec::new();
    if implicit_misses > 0 {
        let (step, residual) = first_miss.unwrap();
        warnings.push(format!(
            "proximal inner solve hit inner_max on {implicit_misses} step(s) \
             (first at step {step}, residual {residual:.3e}); consider a smaller h"
        ));
    }
    if rk4_fallbacks > 0 {
        let step = first_fallback.unwrap();
        warnings.push(format!(
            "interior-rk4 fell back to projected-euler on {rk4_fallbacks} step(s) \
             (first at step {step}): trajectory left the interior margin"
        ));
    }

    Ok(FlowResult {
        times,
        states,
        cesaro,
        gaps,
        stop_reason,
        warnings,
    })
}

fn raw_profile(x: &StrategyProfile) -> Vec<Vec<f64>> {
    x.strategies().iter().map(|s| s.probs().to_vec()).collect()
}

/// One explicit catching-up step: x′_j = P(x_j − h·G_j(x)), every gradient
/// evaluated at the incoming state.
pub fn step_projected_euler(
    game: &TensorGame,
    x: &StrategyProfile,
    h: f64,
) -> Result<StrategyProfile> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("step size h = {h} must be > 0")));
    }
    game.nash_gap(x)?; // shape check
    let field = GameField(game);
    let mut grad: Vec<Vec<f64>> = field.dims().iter().map(|&m| vec![0.0; m]).collect();
    let next = euler_step(&field, &raw_profile(x), h, &mut grad)?;
    StrategyProfile::new(
        next.into_iter()
            .map(MixedStrategy::new)
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Output of one resolvent step.
#[derive(Debug, Clone)]
pub struct ImplicitOutcome {
    pub profile: StrategyProfile,
    /// Max-norm change of the last inner iterate; below `inner_tol` iff the
    /// fixed point converged.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One proximal (implicit Euler) step: x′_j ≈ P(x_j − h·G_j(x′)), solved by
/// fixed-point iteration from x. Non-convergence is reported in the outcome,
/// not as an error; the caller may shrink h.
pub fn step_proximal_implicit(
    game: &TensorGame,
    x: &StrategyProfile,
    h: f64,
    inner_tol: f64,
    inner_max: usize,
) -> Result<ImplicitOutcome> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("step size h = {h} must be > 0")));
    }
    if !(inner_tol.is_finite() && inner_tol > 0.0) || inner_max == 0 {
        return Err(Error::invalid("inner_tol must be > 0 and inner_max >= 1"));
    }
    game.nash_gap(x)?;
    let field = GameField(game);
    let mut grad: Vec<Vec<f64>> = field.dims().iter().map(|&m| vec![0.0; m]).collect();
    let (y, residual, iterations) =
        implicit_step(&field, &raw_profile(x), h, inner_tol, inner_max, &mut grad)?;
    Ok(ImplicitOutcome {
        profile: StrategyProfile::new(
            y.into_iter()
                .map(MixedStrategy::new)
                .collect::<Result<Vec<_>>>()?,
        )?,
        residual,
        iterations,
        converged: residual < inner_tol,
    })
}

/// Output of one interior RK4 step.
#[derive(Debug, Clone)]
pub struct Rk4Outcome {
    pub profile: StrategyProfile,
    /// True when a stage left the interior margin and the step was taken with
    /// projected Euler instead.
    pub fell_back: bool,
}

/// One classical RK4 step of the interior ODE ẋ_j = −(G_j − mean G_j); falls
/// back to projected Euler (flagged) if the trajectory leaves the interior.
pub fn step_interior_rk4(game: &TensorGame, x: &StrategyProfile, h: f64) -> Result<Rk4Outcome> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("step size h = {h} must be > 0")));
    }
    game.nash_gap(x)?;
    let field = GameField(game);
    let mut grad: Vec<Vec<f64>> = field.dims().iter().map(|&m| vec![0.0; m]).collect();
    let raw = raw_profile(x);
    let (next, fell_back) = match rk4_step(&field, &raw, h, &mut grad) {
        Some(y) => (y, false),
        None => (euler_step(&field, &raw, h, &mut grad)?, true),
    };
    Ok(Rk4Outcome {
        profile: StrategyProfile::new(
            next.into_iter()
                .map(MixedStrategy::new)
                .collect::<Result<Vec<_>>>()?,
        )?,
        fell_back,
    })
}

/// Integrate the game flow from `x0` under `cfg`.
///
/// Steps of size `h` are taken until the recorded Cesàro mean's exploitability
/// reaches `gap_tol` or the time grid passes `t_max` (the final step is always
/// recorded). The gap is tested at recording times.
pub fn integrate(game: &TensorGame, x0: &StrategyProfile, cfg: &FlowConfig) -> Result<FlowResult> {
    game.nash_gap(x0)?; // shape check
    run_flow(&GameField(game), raw_profile(x0), cfg)
}

/// Trapezoidal time-average (1/t)∫₀ᵗ u ds of a scalar series sampled on an
/// increasing grid. `t` must be a grid point (within 1e-9 absolute).
pub fn trapezoid_mean(times: &[f64], values: &[f64], t: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::dims("times and values must have equal nonzero length"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("averaging time {t} must be > 0")));
    }
    let end = times
        .iter()
        .position(|&ti| (ti - t).abs() <= 1e-9)
        .ok_or_else(|| Error::invalid(format!("time {t} is not on the recorded grid")))?;
    if end == 0 {
        return Err(Error::invalid("cannot average over an empty interval"));
    }
    let mut integral = 0.0;
    for i in 0..end {
        let dt = times[i + 1] - times[i];
        if dt <= 0.0 {
            return Err(Error::invalid("time grid must be strictly increasing"));
        }
        integral += 0.5 * dt * (values[i] + values[i + 1]);
    }
    Ok(integral / times[end])
}

/// Per-player trapezoidal Cesàro mean of a recorded trajectory at grid time
/// `t`, renormalized onto the simplex (the correction is tiny by
/// construction and anything beyond 1e-9 is rejected).
pub fn cesaro_mean(times: &[f64], states: &[StrategyProfile], t: f64) -> Result<StrategyProfile> {
    if times.len() != states.len() || times.is_empty() {
        return Err(Error::dims("times and states must have equal nonzero length"));
    }
    let n_players = states[0].num_players();
    let mut strategies = Vec::with_capacity(n_players);
    for j in 0..n_players {
        let m = states[0].strategy(j).len();
        let mut coords = Vec::with_capacity(m);
        for i in 0..m {
            let series: Vec<f64> = states.iter().map(|s| s.strategy(j).probs()[i]).collect();
            coords.push(trapezoid_mean(times, &series, t)?);
        }
        strategies.push(MixedStrategy::new(coords)?);
    }
    StrategyProfile::new(strategies)
}

/// A crude upper bound on the Lipschitz modulus of the stacked gradient map:
/// Σ_j (max_s |f_j(s)|)·(N−1). Useful only as a step-size guard.
pub fn lipschitz_bound(game: &TensorGame) -> f64 {
    let n = game.num_players();
    (0..n)
        .map(|j| {
            game.cost_tensor(j)
                .iter()
                .fold(0.0f64, |acc, &c| acc.max(c.abs()))
        })
        .sum::<f64>()
        * (n as f64 - 1.0)
}

/// Default step size 0.1/L from the Lipschitz guard, clamped to [1e-6, 1].
pub fn default_step(game: &TensorGame) -> f64 {
    let l = lipschitz_bound(game);
    if l <= 0.0 {
        1.0
    } else {
        (0.1 / l).clamp(1e-6, 1.0)
    }
}

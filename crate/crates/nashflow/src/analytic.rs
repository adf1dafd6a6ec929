//! A hard-coded 2×2 zero-sum game with a fully closed-form flow.
//!
//! The game's subgradient flow, reduced to the first coordinate of each
//! player, rotates on a circle about the equilibrium (1/2, 2/3) at angular
//! rate 3 — the trajectory never converges, but its Cesàro mean does. The
//! exact rotation and its exact time averages below serve as ground truth for
//! the numerical integrators.

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, StrategyProfile, TensorGame};

pub const CENTER_V1: f64 = 0.5;
pub const CENTER_V2: f64 = 2.0 / 3.0;
pub const ANGULAR_RATE: f64 = 3.0;

/// The reduced coordinates (v1, v2) = (x_{1,1}, x_{2,1}) of a 2×2 profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    v1: f64,
    v2: f64,
}

impl ReducedState {
    /// Both coordinates must lie in [0, 1] (a hair of rounding slack is
    /// absorbed by clamping).
    pub fn new(v1: f64, v2: f64) -> Result<Self> {
        for v in [v1, v2] {
            if !v.is_finite() || v < -1e-9 || v > 1.0 + 1e-9 {
                return Err(Error::domain(format!(
                    "reduced coordinate {v} outside [0, 1]"
                )));
            }
        }
        Ok(ReducedState {
            v1: v1.clamp(0.0, 1.0),
            v2: v2.clamp(0.0, 1.0),
        })
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }

    /// Distance from the circle center (1/2, 2/3).
    pub fn radius(&self) -> f64 {
        ((self.v1 - CENTER_V1).powi(2) + (self.v2 - CENTER_V2).powi(2)).sqrt()
    }

    pub fn distance(&self, other: &ReducedState) -> f64 {
        ((self.v1 - other.v1).powi(2) + (self.v2 - other.v2).powi(2)).sqrt()
    }
}

/// The benchmark game: F₁ = 3·x₁₁x₂₁ + x₁₂x₂₁ + 4·x₁₂x₂₂ and F₂ = −F₁.
pub fn appendix_game() -> TensorGame {
    let f1 = vec![3.0, 0.0, 1.0, 4.0];
    let f2: Vec<f64> = f1.iter().map(|c| -c).collect();
    TensorGame::new(vec![2, 2], vec![f1, f2]).expect("static game is well formed")
}

/// The unique Nash equilibrium ((1/2, 1/2), (2/3, 1/3)).
pub fn equilibrium() -> StrategyProfile {
    lift(&ReducedState::new(CENTER_V1, CENTER_V2).unwrap())
}

/// Radius of the limit circle reached by large-data trajectories.
pub fn limit_circle_radius() -> f64 {
    1.0 / 3.0
}

fn require_small_data(v0: &ReducedState) -> Result<()> {
    let r2 = (v0.v1 - CENTER_V1).powi(2) + (v0.v2 - CENTER_V2).powi(2);
    let max = limit_circle_radius().powi(2) + 1e-12;
    if r2 > max {
        return Err(Error::domain(format!(
            "initial radius {} exceeds 1/3; the closed form only covers the small-data disc",
            r2.sqrt()
        )));
    }
    Ok(())
}

/// Exact state at time `t` of the reduced flow started at `v0`, valid on the
/// small-data disc of radius 1/3 about the center:
///
/// v1(t) = (v1⁰ − 1/2)·cos 3t + (2/3 − v2⁰)·sin 3t + 1/2
/// v2(t) = (v2⁰ − 2/3)·cos 3t + (v1⁰ − 1/2)·sin 3t + 2/3
pub fn analytic_solution(v0: &ReducedState, t: f64) -> Result<ReducedState> {
    require_small_data(v0)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("time {t} must be nonnegative")));
    }
    let (a, b) = (v0.v1 - CENTER_V1, v0.v2 - CENTER_V2);
    let (s, c) = (ANGULAR_RATE * t).sin_cos();
    ReducedState::new(a * c - b * s + CENTER_V1, b * c + a * s + CENTER_V2)
}

/// Exact Cesàro mean (1/t)∫₀ᵗ v(s) ds of the small-data rotation.
pub fn analytic_cesaro(v0: &ReducedState, t: f64) -> Result<ReducedState> {
    require_small_data(v0)?;
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::domain(format!("averaging time {t} must be positive")));
    }
    let (a, b) = (v0.v1 - CENTER_V1, v0.v2 - CENTER_V2);
    let wt = ANGULAR_RATE * t;
    let sin_term = wt.sin() / wt;
    let cos_term = (1.0 - wt.cos()) / wt;
    ReducedState::new(
        CENTER_V1 + a * sin_term - b * cos_term,
        CENTER_V2 + b * sin_term + a * cos_term,
    )
}

/// First coordinates (x_{1,1}, x_{2,1}) of a 2-player 2-action profile.
pub fn reduce(profile: &StrategyProfile) -> Result<ReducedState> {
    if profile.num_players() != 2
        || profile.strategies().iter().any(|s| s.len() != 2)
    {
        return Err(Error::dims(
            "reduction needs a 2-player profile with 2 actions each".to_string(),
        ));
    }
    ReducedState::new(profile.strategy(0).probs()[0], profile.strategy(1).probs()[0])
}

/// Inverse of [`reduce`]: ((v1, 1 − v1), (v2, 1 − v2)).
pub fn lift(v: &ReducedState) -> StrategyProfile {
    StrategyProfile::new(vec![
        MixedStrategy::new(vec![v.v1, 1.0 - v.v1]).expect("coordinates lie in [0, 1]"),
        MixedStrategy::new(vec![v.v2, 1.0 - v.v2]).expect("coordinates lie in [0, 1]"),
    ])
    .expect("two players")
}

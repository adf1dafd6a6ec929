//! Equilibrium computation for finite games via subgradient flows on
//! products of probability simplices.
//!
//! The library approximates Nash equilibria of finite-action games and
//! mean-field equilibria of finite-state populations by integrating the
//! projected dynamics ẋ_j + G_j(x) ∋ 0, where G_j is player j's own-strategy
//! cost gradient and the state is confined to the simplex product. For
//! monotone cost families the trajectory itself may orbit, but its running
//! time-average (Cesàro mean) converges to an equilibrium; the integrator
//! therefore reports both, along with an exploitability-style gap that is
//! zero exactly at equilibria.
//!
//! Main entry points:
//! - [`game::TensorGame`] — N-player costs as dense tensors, with expected
//!   cost, own-gradient, best-response, and Nash-gap evaluation.
//! - [`flow::integrate`] — projected Euler / proximal implicit / interior
//!   RK4 time stepping with Cesàro extraction and gap-based stopping.
//! - [`monotonicity`] — exhaustive or sampled certification of the monotone
//!   inequality, with reproducible witnesses when it fails.
//! - [`meanfield`] — single-population composite costs (potential + kernel +
//!   congestion), symmetric-game views, and their flows.
//! - [`analytic`] — a closed-form 2×2 zero-sum benchmark whose trajectory,
//!   Cesàro mean, and capture behavior are known exactly.
//! - [`gaussian`] — Monte Carlo verification of the finite-dimensional
//!   Gaussian-measure identities behind the measure-space formulation.
//! - [`io`] — file formats, run orchestration, and CSV/report emission for
//!   the `nashflow` binary.
//!
//! Determinism: every randomized routine takes an explicit seed and uses a
//! portable counter-based generator ([`rng`]), so results are reproducible
//! across platforms and runs.

pub mod analytic;
pub mod error;
pub mod flow;
pub mod game;
pub mod gaussian;
pub mod io;
pub mod meanfield;
pub mod monotonicity;
pub mod rng;

pub use error::{Error, Result};
pub use flow::{
    cesaro_mean, default_step, integrate, lipschitz_bound, step_interior_rk4,
    step_projected_euler, step_proximal_implicit, trapezoid_mean, FlowConfig, FlowResult,
    ImplicitOutcome, Rk4Outcome, Scheme, StopReason,
};
pub use game::{simplex_project, MixedStrategy, StrategyProfile, TensorGame};
pub use meanfield::{mf_integrate, symmetric_flow, MeanFieldCost, Psi, SymmetricGameView};
pub use monotonicity::{
    mf_monotonicity_check, pure_monotonicity_check, variational_monotonicity_check,
    MonotonicityReport, Verdict, Witness,
};

//! Finite-state static mean-field games and symmetric games.
//!
//! A mean-field cost assigns each state `s` the composite cost
//! `g_s(μ) = φ(s) + (Kμ)(s) + ψ(μ_s)`: a fixed potential, a kernel
//! interaction, and a congestion penalty applied to the state's own mass.
//! The congestion term uses the counting measure as reference, so the density
//! of μ is just its coordinate vector — the only canonical choice on a finite
//! state set, and the one for which the classical congestion equilibrium is
//! the uniform distribution.
//!
//! An equilibrium is a distribution supported on the minimizers of its own
//! cost vector; the residual `μ·g(μ) − min_s g_s(μ)` (exploitability) is the
//! convergence diagnostic. Sums of monotone pieces are monotone, so
//! certification composes across the three terms.

use crate::error::{Error, Result};
use crate::flow::{run_flow, FlowConfig, FlowResult, SimplexField};
use crate::game::{argmin, MixedStrategy, StrategyProfile, TensorGame};
use crate::rng::{dirichlet_uniform, substream};
use std::collections::HashMap;

/// Congestion penalty library: a named nondecreasing function on [0, 1],
/// applied to a state's own mass. Restricting to a library (rather than
/// arbitrary closures) keeps the monotonicity precondition checkable.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    None,
    /// ψ(ρ) = ρ
    Identity,
    /// ψ(ρ) = ρ^p with p > 0
    Power(f64),
    /// ψ(ρ) = ln(1 + ρ)
    Log1p,
}

impl Psi {
    pub fn apply(&self, rho: f64) -> f64 {
        match self {
            Psi::None => 0.0,
            Psi::Identity => rho,
            Psi::Power(p) => rho.powf(*p),
            Psi::Log1p => rho.ln_1p(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Psi::None => "none",
            Psi::Identity => "identity",
            Psi::Power(_) => "power",
            Psi::Log1p => "log1p",
        }
    }

    fn validate(&self) -> Result<()> {
        if let Psi::Power(p) = self {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::invalid(format!(
                    "power congestion needs an exponent > 0, got {p}"
                )));
            }
        }
        // Nondecreasing on [0, 1], checked on a 1e-3 grid.
        let mut prev = self.apply(0.0);
        for k in 1..=1000 {
            let value = self.apply(k as f64 * 1e-3);
            if !value.is_finite() || value + 1e-12 < prev {
                return Err(Error::invalid(format!(
                    "congestion function {} is not nondecreasing on [0, 1]",
                    self.name()
                )));
            }
            prev = value;
        }
        Ok(())
    }
}

/// Composite cost f(s, μ) = φ(s) + (Kμ)(s) + ψ(μ_s) on `m` states.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldCost {
    m: usize,
    phi: Vec<f64>,
    kernel: Vec<f64>, // m×m, row-major
    psi: Psi,
    monotone_by_construction: bool,
}

impl MeanFieldCost {
    /// Basic construction: shapes and finiteness only. Use
    /// [`MeanFieldCost::new_monotone`] to additionally demand a symmetric
    /// positive-semidefinite kernel.
    pub fn new(phi: Vec<f64>, kernel: Vec<f64>, psi: Psi) -> Result<Self> {
        let m = phi.len();
        if m == 0 {
            return Err(Error::invalid("need at least one state"));
        }
        if kernel.len() != m * m {
            return Err(Error::dims(format!(
                "kernel has {} entries, expected {m}×{m}",
                kernel.len()
            )));
        }
        if phi.iter().chain(kernel.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("phi and kernel entries must be finite"));
        }
        psi.validate()?;
        Ok(MeanFieldCost {
            m,
            phi,
            kernel,
            psi,
            monotone_by_construction: false,
        })
    }

    /// Construction with the monotone-by-construction guarantees: the kernel
    /// must be symmetric within 1e-12 and have eigenvalues ≥ −1e-10.
    pub fn new_monotone(phi: Vec<f64>, kernel: Vec<f64>, psi: Psi) -> Result<Self> {
        let mut cost = MeanFieldCost::new(phi, kernel, psi)?;
        let defect = cost.kernel_symmetry_defect();
        if defect > 1e-12 {
            return Err(Error::invalid(format!(
                "kernel is asymmetric (max |K_st − K_ts| = {defect:.3e})"
            )));
        }
        let floor = cost.kernel_eigen_floor();
        if floor < -1e-10 {
            return Err(Error::invalid(format!(
                "kernel is not positive semidefinite (eigenvalue floor {floor:.3e})"
            )));
        }
        cost.monotone_by_construction = true;
        Ok(cost)
    }

    pub fn num_states(&self) -> usize {
        self.m
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn psi(&self) -> &Psi {
        &self.psi
    }

    pub fn is_monotone_by_construction(&self) -> bool {
        self.monotone_by_construction
    }

    /// True when the kernel term and congestion term both vanish, leaving a
    /// constant cost field with a known vertex equilibrium at argmin φ.
    pub fn is_potential_only(&self) -> bool {
        self.psi == Psi::None && self.kernel.iter().all(|&k| k == 0.0)
    }

    pub fn kernel_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..self.m {
            for t in (s + 1)..self.m {
                worst = worst.max((self.kernel[s * self.m + t] - self.kernel[t * self.m + s]).abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the kernel's symmetric part, via cyclic Jacobi
    /// sweeps (the quadratic form only sees the symmetric part).
    pub fn kernel_eigen_floor(&self) -> f64 {
        symmetric_eigen_floor(&self.kernel, self.m)
    }

    fn check_mu(&self, mu: &MixedStrategy) -> Result<()> {
        if mu.len() != self.m {
            return Err(Error::dims(format!(
                "distribution has {} states, cost has {}",
                mu.len(),
                self.m
            )));
        }
        Ok(())
    }

    pub(crate) fn cost_vector_raw(&self, mu: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for s in 0..self.m {
            let row = &self.kernel[s * self.m..(s + 1) * self.m];
            let interaction: f64 = row.iter().zip(mu).map(|(&k, &p)| k * p).sum();
            out.push(self.phi[s] + interaction + self.psi.apply(mu[s]));
        }
    }

    /// The cost vector g(μ) with g_s(μ) = φ(s) + (Kμ)(s) + ψ(μ_s).
    pub fn cost_vector(&self, mu: &MixedStrategy) -> Result<Vec<f64>> {
        self.check_mu(mu)?;
        let mut out = Vec::with_capacity(self.m);
        self.cost_vector_raw(mu.probs(), &mut out);
        Ok(out)
    }

    pub(crate) fn exploitability_raw(&self, mu: &[f64]) -> f64 {
        let mut g = Vec::with_capacity(self.m);
        self.cost_vector_raw(mu, &mut g);
        let current: f64 = g.iter().zip(mu).map(|(&c, &p)| c * p).sum();
        current - argmin(&g).0
    }

    /// Mean-field exploitability μ·g(μ) − min_s g_s(μ); zero exactly at
    /// equilibria and nonnegative up to rounding.
    pub fn exploitability(&self, mu: &MixedStrategy) -> Result<f64> {
        self.check_mu(mu)?;
        Ok(self.exploitability_raw(mu.probs()))
    }
}

pub(crate) struct MfField<'a>(pub &'a MeanFieldCost);

impl SimplexField for MfField<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.0.num_states()]
    }

    fn eval_into(&self, x: &[Vec<f64>], out: &mut [Vec<f64>]) {
        self.0.cost_vector_raw(&x[0], &mut out[0]);
    }

    fn gap(&self, x: &[Vec<f64>]) -> f64 {
        self.0.exploitability_raw(&x[0])
    }
}

/// Integrate the single-population flow μ̇ + g(μ) ∋ 0 (projected onto the
/// simplex) with the same stepping, recording, and stopping contract as the
/// game integrator; the gap series is mean-field exploitability of the
/// Cesàro mean. Results hold one population, reported as player 1.
pub fn mf_integrate(
    cost: &MeanFieldCost,
    mu0: &MixedStrategy,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    cost.check_mu(mu0)?;
    run_flow(&MfField(cost), vec![mu0.probs().to_vec()], cfg)
}

/// A game in which every player faces the same action set and the same cost
/// structure, so a single shared strategy can be an equilibrium.
///
/// Construction verifies the symmetry identity
/// `F_i(μ, …, ν@i, …, μ) = F_j(μ, …, ν@j, …, μ)` for all i, j — exhaustively
/// (by comparing multiset-grouped tensor coefficients, an exact test) when
/// the game has at most 10⁴ joint actions, and on 100 sampled (μ, ν, i, j)
/// tuples otherwise.
#[derive(Debug, Clone)]
pub struct SymmetricGameView {
    base: TensorGame,
}

const SYMMETRY_TOL: f64 = 1e-10;
const SYMMETRY_SAMPLE_SEED: u64 = 0;

impl SymmetricGameView {
    pub fn new(base: TensorGame) -> Result<Self> {
        let counts = base.action_counts();
        let m = counts[0];
        if counts.iter().any(|&c| c != m) {
            return Err(Error::invalid(
                "symmetric games need equal action counts for every player",
            ));
        }
        if base.joint_actions() <= 10_000 {
            check_symmetry_exhaustive(&base)?;
        } else {
            check_symmetry_sampled(&base)?;
        }
        Ok(SymmetricGameView { base })
    }

    pub fn base(&self) -> &TensorGame {
        &self.base
    }

    pub fn num_actions(&self) -> usize {
        self.base.action_counts()[0]
    }

    /// The shared-strategy field μ ↦ ∂₁F₁(μ, …, μ).
    pub fn field(&self, mu: &MixedStrategy) -> Result<Vec<f64>> {
        let profile = self.clone_profile(mu)?;
        self.base.own_gradient(&profile, 0)
    }

    /// Symmetric exploitability F₁(μ, …, μ) − min_k ∂₁F₁(μ, …, μ)_k.
    pub fn exploitability(&self, mu: &MixedStrategy) -> Result<f64> {
        let g = self.field(mu)?;
        let current: f64 = g.iter().zip(mu.probs()).map(|(&c, &p)| c * p).sum();
        Ok(current - argmin(&g).0)
    }

    fn clone_profile(&self, mu: &MixedStrategy) -> Result<StrategyProfile> {
        if mu.len() != self.num_actions() {
            return Err(Error::dims(format!(
                "strategy has {} actions, game expects {}",
                mu.len(),
                self.num_actions()
            )));
        }
        StrategyProfile::new(vec![mu.clone(); self.base.num_players()])
    }
}

fn check_symmetry_exhaustive(base: &TensorGame) -> Result<()> {
    let n = base.num_players();
    let counts = base.action_counts();
    let total = base.joint_actions();
    // Group tensor entries by (own action, sorted multiset of the others);
    // two players are interchangeable iff their grouped sums agree.
    let mut maps: Vec<HashMap<(usize, Vec<usize>), f64>> = vec![HashMap::new(); n];
    let mut joint = vec![0usize; n];
    for idx in 0..total {
        let mut rem = idx;
        for i in (0..n).rev() {
            joint[i] = rem % counts[i];
            rem /= counts[i];
        }
        for j in 0..n {
            let mut others: Vec<usize> =
                joint.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &a)| a).collect();
            others.sort_unstable();
            *maps[j].entry((joint[j], others)).or_insert(0.0) += base.cost_tensor(j)[idx];
        }
    }
    let scale = (0..n)
        .flat_map(|j| base.cost_tensor(j))
        .fold(1.0f64, |acc, &c| acc.max(c.abs()));
    for j in 1..n {
        for (key, &value) in &maps[0] {
            let other = maps[j].get(key).copied().unwrap_or(0.0);
            if (value - other).abs() > SYMMETRY_TOL * scale {
                return Err(Error::invalid(format!(
                    "game is not symmetric: players 1 and {} disagree on action {} \
                     against {:?} ({} vs {})",
                    j + 1,
                    key.0 + 1,
                    key.1,
                    value,
                    other
                )));
            }
        }
    }
    Ok(())
}

fn check_symmetry_sampled(base: &TensorGame) -> Result<()> {
    let n = base.num_players();
    let m = base.action_counts()[0];
    let scale = (0..n)
        .flat_map(|j| base.cost_tensor(j))
        .fold(1.0f64, |acc, &c| acc.max(c.abs()));
    for sample in 0..100u64 {
        let mut rng = substream(SYMMETRY_SAMPLE_SEED, sample);
        let mu = MixedStrategy::new(dirichlet_uniform(&mut rng, m)).expect("simplex draw");
        let nu = MixedStrategy::new(dirichlet_uniform(&mut rng, m)).expect("simplex draw");
        let i = rand::Rng::gen_range(&mut rng, 0..n);
        let j = rand::Rng::gen_range(&mut rng, 0..n);
        let value_i = eval_with_deviation(base, &mu, &nu, i)?;
        let value_j = eval_with_deviation(base, &mu, &nu, j)?;
        if (value_i - value_j).abs() > SYMMETRY_TOL * scale {
            return Err(Error::invalid(format!(
                "game is not symmetric: sampled deviation payoffs differ for players {} and {}",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

/// F_i(μ, …, ν in slot i, …, μ).
fn eval_with_deviation(
    base: &TensorGame,
    mu: &MixedStrategy,
    nu: &MixedStrategy,
    i: usize,
) -> Result<f64> {
    let mut strategies = vec![mu.clone(); base.num_players()];
    strategies[i] = nu.clone();
    base.expected_cost(&StrategyProfile::new(strategies)?, i)
}

struct SymField<'a>(&'a SymmetricGameView);

impl SimplexField for SymField<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.0.num_actions()]
    }

    fn eval_into(&self, x: &[Vec<f64>], out: &mut [Vec<f64>]) {
        let n = self.0.base.num_players();
        let refs: Vec<&[f64]> = std::iter::repeat(x[0].as_slice()).take(n).collect();
        out[0] = self.0.base.own_gradient_raw(&refs, 0);
    }

    fn gap(&self, x: &[Vec<f64>]) -> f64 {
        let n = self.0.base.num_players();
        let refs: Vec<&[f64]> = std::iter::repeat(x[0].as_slice()).take(n).collect();
        let g = self.0.base.own_gradient_raw(&refs, 0);
        let current: f64 = g.iter().zip(&x[0]).map(|(&c, &p)| c * p).sum();
        current - argmin(&g).0
    }
}

/// Integrate the shared-strategy flow μ̇ + ∂₁F₁(μ, …, μ) ∋ 0; the gap series
/// is the symmetric exploitability of the Cesàro mean.
pub fn symmetric_flow(
    view: &SymmetricGameView,
    mu0: &MixedStrategy,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    if mu0.len() != view.num_actions() {
        return Err(Error::dims(format!(
            "strategy has {} actions, game expects {}",
            mu0.len(),
            view.num_actions()
        )));
    }
    run_flow(&SymField(view), vec![mu0.probs().to_vec()], cfg)
}

/// Smallest eigenvalue of the symmetric part of a flat row-major m×m matrix.
fn symmetric_eigen_floor(a: &[f64], m: usize) -> f64 {
    if m == 1 {
        return a[0];
    }
    // Work on the symmetrized copy; cyclic Jacobi with a fixed sweep budget.
    let mut w = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            w[i * m + j] = 0.5 * (a[i * m + j] + a[j * m + i]);
        }
    }
    let scale = w.iter().fold(1e-300f64, |acc, &v| acc.max(v.abs()));
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..m {
            for q in (p + 1)..m {
                off = off.max(w[p * m + q].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = w[p * m + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (w[q * m + q] - w[p * m + p]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = w[k * m + p];
                    let akq = w[k * m + q];
                    w[k * m + p] = c * akp - s * akq;
                    w[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = w[p * m + k];
                    let aqk = w[q * m + k];
                    w[p * m + k] = c * apk - s * aqk;
                    w[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| w[i * m + i]).fold(f64::INFINITY, f64::min)
}

//! Monotonicity certification for tensor games and mean-field costs.
//!
//! A game is monotone when its stacked own-gradient map G satisfies
//! Σ_j ⟨x_j − y_j, G_j(x) − G_j(y)⟩ ≥ 0; monotone games are exactly the ones
//! whose flow has a convergent Cesàro mean. Two checks are offered for games —
//! a pure-action sufficient condition that is exhaustive on small games, and a
//! sampled variational check — plus a sampled check for mean-field costs.
//!
//! All reported margins are normalized per player (divided by N), so a margin
//! of −2 means the tested inequality fails by 2 per player at the witness.
//! Exhaustive verdicts are proofs; sampled verdicts are evidence only, and
//! reports should say so.

use crate::error::Result;
use crate::game::{MixedStrategy, StrategyProfile, TensorGame};
use crate::meanfield::MeanFieldCost;
use crate::rng::{dirichlet_uniform, substream};
use rand::Rng;

pub const DEFAULT_CAP: u64 = 1_000_000;
pub const DEFAULT_N_SAMPLES: u64 = 10_000;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Every pair was tested and none fell below −tol.
    CertifiedExhaustive,
    /// No sampled pair fell below −tol; evidence, not proof.
    CertifiedSampled,
    /// Some tested pair fell below −tol.
    Violated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::CertifiedExhaustive => "certified-exhaustive",
            Verdict::CertifiedSampled => "certified-sampled",
            Verdict::Violated => "violated",
        };
        f.write_str(s)
    }
}

/// The pair achieving the worst margin.
#[derive(Debug, Clone)]
pub enum Witness {
    /// Joint pure actions (0-based), for the pure-action check.
    PureActions { s: Vec<usize>, t: Vec<usize> },
    /// Mixed profiles, for the variational check.
    Profiles { x: StrategyProfile, y: StrategyProfile },
    /// Distributions, for the mean-field check.
    Measures { mu: MixedStrategy, nu: MixedStrategy },
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub verdict: Verdict,
    /// Most negative tested value of (LHS − RHS)/N.
    pub worst_margin: f64,
    pub witness: Witness,
    pub pairs_tested: u64,
    pub seed: u64,
}

/// Per-player margin of the pure-action condition at the joint actions (s, t):
/// (Σ_j [f_j(s) + f_j(t)] − Σ_j [f_j(s_j, t_{−j}) + f_j(t_j, s_{−j})]) / N.
pub fn pure_margin(game: &TensorGame, s: &[usize], t: &[usize]) -> f64 {
    let n = game.num_players();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut swap = vec![0usize; n];
    for j in 0..n {
        lhs += game.cost_at(j, s) + game.cost_at(j, t);
        swap.copy_from_slice(t);
        swap[j] = s[j];
        rhs += game.cost_at(j, &swap);
        swap.copy_from_slice(s);
        swap[j] = t[j];
        rhs += game.cost_at(j, &swap);
    }
    (lhs - rhs) / n as f64
}

/// Per-player margin of the variational condition at the profiles (x, y):
/// Σ_j ⟨x_j − y_j, G_j(x) − G_j(y)⟩ / N.
pub fn variational_margin(game: &TensorGame, x: &StrategyProfile, y: &StrategyProfile) -> Result<f64> {
    let n = game.num_players();
    let mut total = 0.0;
    for j in 0..n {
        let gx = game.own_gradient(x, j)?;
        let gy = game.own_gradient(y, j)?;
        let xp = x.strategy(j).probs();
        let yp = y.strategy(j).probs();
        for i in 0..xp.len() {
            total += (xp[i] - yp[i]) * (gx[i] - gy[i]);
        }
    }
    Ok(total / n as f64)
}

/// Margin of the mean-field condition at (μ, ν): ⟨g(μ) − g(ν), μ − ν⟩.
pub fn mf_margin(cost: &MeanFieldCost, mu: &MixedStrategy, nu: &MixedStrategy) -> Result<f64> {
    let gmu = cost.cost_vector(mu)?;
    let gnu = cost.cost_vector(nu)?;
    let mut total = 0.0;
    for i in 0..gmu.len() {
        total += (gmu[i] - gnu[i]) * (mu.probs()[i] - nu.probs()[i]);
    }
    Ok(total)
}

fn decode_joint(mut idx: usize, counts: &[usize]) -> Vec<usize> {
    let mut s = vec![0usize; counts.len()];
    for i in (0..counts.len()).rev() {
        s[i] = idx % counts[i];
        idx /= counts[i];
    }
    s
}

/// Tests the pure-action sufficient condition, exhaustively when the game has
/// at most √cap joint actions and over `cap` sampled pairs otherwise.
pub fn pure_monotonicity_check(
    game: &TensorGame,
    cap: u64,
    tol: f64,
    seed: u64,
) -> MonotonicityReport {
    debug_assert!(cap >= 1 && tol >= 0.0);
    let total = game.joint_actions();
    let exhaustive = (total as u128).pow(2) <= cap as u128;

    let mut worst = f64::INFINITY;
    let mut witness = (vec![0usize; game.num_players()], vec![0usize; game.num_players()]);
    let mut pairs = 0u64;

    if exhaustive {
        let joints: Vec<Vec<usize>> = (0..total)
            .map(|i| decode_joint(i, game.action_counts()))
            .collect();
        for s in &joints {
            for t in &joints {
                let margin = pure_margin(game, s, t);
                pairs += 1;
                if margin < worst {
                    worst = margin;
                    witness = (s.clone(), t.clone());
                }
            }
        }
    } else {
        for i in 0..cap {
            let mut rng = substream(seed, i);
            let s: Vec<usize> = game
                .action_counts()
                .iter()
                .map(|&m| rng.gen_range(0..m))
                .collect();
            let t: Vec<usize> = game
                .action_counts()
                .iter()
                .map(|&m| rng.gen_range(0..m))
                .collect();
            let margin = pure_margin(game, &s, &t);
            pairs += 1;
            if margin < worst {
                worst = margin;
                witness = (s, t);
            }
        }
    }

    let verdict = if worst < -tol {
        Verdict::Violated
    } else if exhaustive {
        Verdict::CertifiedExhaustive
    } else {
        Verdict::CertifiedSampled
    };
    MonotonicityReport {
        verdict,
        worst_margin: worst,
        witness: Witness::PureActions {
            s: witness.0,
            t: witness.1,
        },
        pairs_tested: pairs,
        seed,
    }
}

fn random_profile(game: &TensorGame, rng: &mut rand_chacha::ChaCha8Rng) -> StrategyProfile {
    StrategyProfile::new(
        game.action_counts()
            .iter()
            .map(|&m| MixedStrategy::new(dirichlet_uniform(rng, m)).expect("simplex draw"))
            .collect(),
    )
    .expect("nonempty game")
}

/// Samples profile pairs uniformly (per-player Dirichlet(1,…,1)) and tests
/// the variational inequality margin.
pub fn variational_monotonicity_check(
    game: &TensorGame,
    n_samples: u64,
    tol: f64,
    seed: u64,
) -> MonotonicityReport {
    debug_assert!(n_samples >= 1);
    let mut worst = f64::INFINITY;
    let mut witness: Option<(StrategyProfile, StrategyProfile)> = None;
    for i in 0..n_samples {
        let mut rng = substream(seed, i);
        let x = random_profile(game, &mut rng);
        let y = random_profile(game, &mut rng);
        let margin = variational_margin(game, &x, &y).expect("matching shapes");
        if margin < worst {
            worst = margin;
            witness = Some((x, y));
        }
    }
    let (x, y) = witness.expect("n_samples >= 1");
    MonotonicityReport {
        verdict: if worst < -tol {
            Verdict::Violated
        } else {
            Verdict::CertifiedSampled
        },
        worst_margin: worst,
        witness: Witness::Profiles { x, y },
        pairs_tested: n_samples,
        seed,
    }
}

/// Samples distribution pairs from Dirichlet(1,…,1) and tests the mean-field
/// monotonicity margin ⟨g(μ) − g(ν), μ − ν⟩.
pub fn mf_monotonicity_check(
    cost: &MeanFieldCost,
    n_samples: u64,
    tol: f64,
    seed: u64,
) -> MonotonicityReport {
    debug_assert!(n_samples >= 1);
    let m = cost.num_states();
    let mut worst = f64::INFINITY;
    let mut witness: Option<(MixedStrategy, MixedStrategy)> = None;
    for i in 0..n_samples {
        let mut rng = substream(seed, i);
        let mu = MixedStrategy::new(dirichlet_uniform(&mut rng, m)).expect("simplex draw");
        let nu = MixedStrategy::new(dirichlet_uniform(&mut rng, m)).expect("simplex draw");
        let margin = mf_margin(cost, &mu, &nu).expect("matching shapes");
        if margin < worst {
            worst = margin;
            witness = Some((mu, nu));
        }
    }
    let (mu, nu) = witness.expect("n_samples >= 1");
    MonotonicityReport {
        verdict: if worst < -tol {
            Verdict::Violated
        } else {
            Verdict::CertifiedSampled
        },
        worst_margin: worst,
        witness: Witness::Measures { mu, nu },
        pairs_tested: n_samples,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::appendix_game;
    use crate::meanfield::Psi;

    fn coordination_game() -> TensorGame {
        // Common cost, −1 on the diagonal: the classic non-monotone example.
        let c = vec![-1.0, 0.0, 0.0, -1.0];
        TensorGame::new(vec![2, 2], vec![c.clone(), c]).unwrap()
    }

    #[test]
    fn zero_sum_pure_check_is_exact() {
        let report = pure_monotonicity_check(&appendix_game(), DEFAULT_CAP, DEFAULT_TOL, 0);
        assert_eq!(report.verdict, Verdict::CertifiedExhaustive);
        assert_eq!(report.worst_margin, 0.0);
        assert_eq!(report.pairs_tested, 16);
    }

    #[test]
    fn coordination_game_is_flagged_with_exact_witness() {
        let report = pure_monotonicity_check(&coordination_game(), DEFAULT_CAP, DEFAULT_TOL, 0);
        assert_eq!(report.verdict, Verdict::Violated);
        assert_eq!(report.worst_margin, -2.0);
        match &report.witness {
            Witness::PureActions { s, t } => {
                assert_eq!(s, &vec![0, 0]);
                assert_eq!(t, &vec![1, 1]);
                // The witness reproduces the margin on re-evaluation.
                assert_eq!(pure_margin(&coordination_game(), s, t), report.worst_margin);
            }
            _ => panic!("expected pure-action witness"),
        }
    }

    #[test]
    fn single_player_games_are_trivially_monotone() {
        let g = TensorGame::new(vec![3], vec![vec![5.0, -2.0, 0.5]]).unwrap();
        let report = pure_monotonicity_check(&g, DEFAULT_CAP, DEFAULT_TOL, 0);
        assert_eq!(report.verdict, Verdict::CertifiedExhaustive);
        assert_eq!(report.worst_margin, 0.0);
    }

    #[test]
    fn variational_check_zero_sum() {
        let report = variational_monotonicity_check(&appendix_game(), 500, DEFAULT_TOL, 7);
        assert_eq!(report.verdict, Verdict::CertifiedSampled);
        assert!(report.worst_margin >= -1e-12);
        match &report.witness {
            Witness::Profiles { x, y } => {
                let again = variational_margin(&appendix_game(), x, y).unwrap();
                assert!((again - report.worst_margin).abs() < 1e-12);
            }
            _ => panic!("expected profile witness"),
        }
    }

    #[test]
    fn variational_check_flags_coordination() {
        let report = variational_monotonicity_check(&coordination_game(), 500, DEFAULT_TOL, 7);
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(report.worst_margin < -0.01);
        // The worst possible per-player margin is −2, at the pure witness pair.
        assert!(report.worst_margin >= -2.0 - 1e-12);
    }

    #[test]
    fn variational_equal_profiles_have_zero_margin() {
        let g = coordination_game();
        let x = StrategyProfile::uniform(&g);
        assert_eq!(variational_margin(&g, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = variational_monotonicity_check(&appendix_game(), 200, DEFAULT_TOL, 3);
        let b = variational_monotonicity_check(&appendix_game(), 200, DEFAULT_TOL, 3);
        assert_eq!(a.worst_margin, b.worst_margin);
        assert_eq!(a.pairs_tested, b.pairs_tested);
        let c = variational_monotonicity_check(&appendix_game(), 200, DEFAULT_TOL, 4);
        assert_ne!(a.worst_margin, c.worst_margin);
    }

    #[test]
    fn mf_checks_on_the_three_families() {
        // φ only: the field is constant, margins vanish identically.
        let phi_only = MeanFieldCost::new(vec![0.0, 1.0, 2.0], vec![0.0; 9], Psi::None).unwrap();
        let report = mf_monotonicity_check(&phi_only, 500, DEFAULT_TOL, 1);
        assert_eq!(report.verdict, Verdict::CertifiedSampled);
        assert_eq!(report.worst_margin, 0.0);

        // Identity kernel: margin = ‖μ − ν‖² ≥ 0.
        let mut eye = vec![0.0; 9];
        for i in 0..3 {
            eye[i * 3 + i] = 1.0;
        }
        let kernel = MeanFieldCost::new(vec![0.0; 3], eye, Psi::None).unwrap();
        let report = mf_monotonicity_check(&kernel, 500, DEFAULT_TOL, 1);
        assert_eq!(report.verdict, Verdict::CertifiedSampled);
        assert!(report.worst_margin >= 0.0);

        // Congestion ψ(ρ) = ρ: same margin as the identity kernel.
        let congestion = MeanFieldCost::new(vec![0.0; 3], vec![0.0; 9], Psi::Identity).unwrap();
        let report = mf_monotonicity_check(&congestion, 500, DEFAULT_TOL, 1);
        assert_eq!(report.verdict, Verdict::CertifiedSampled);
        assert!(report.worst_margin >= 0.0);
        match &report.witness {
            Witness::Measures { mu, nu } => {
                let again = mf_margin(&congestion, mu, nu).unwrap();
                assert!((again - report.worst_margin).abs() < 1e-12);
            }
            _ => panic!("expected measure witness"),
        }
    }

    #[test]
    fn sampled_branch_engages_on_large_games() {
        let g = TensorGame::new(
            vec![2; 12],
            vec![vec![0.0; 1 << 12]; 12],
        )
        .unwrap();
        // (2^12)^2 > 1000, so with a small cap the check samples.
        let report = pure_monotonicity_check(&g, 1000, DEFAULT_TOL, 9);
        assert_eq!(report.verdict, Verdict::CertifiedSampled);
        assert_eq!(report.pairs_tested, 1000);
    }
}

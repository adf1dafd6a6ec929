//! Finite N-player games as cost tensors, plus simplex geometry.
//!
//! A game is `N` flat cost tensors over joint pure actions; player `j` pays
//! `f_j(s_1, …, s_N)`. Mixed strategies live on probability simplices, and all
//! expected quantities are multilinear, evaluated by iterated tensor
//! contraction rather than by expanding the full joint sum.

use crate::error::{Error, Result};

/// Raw sums farther than this from 1 are rejected outright; anything closer is
/// silently renormalized. Distinguishes accumulated drift from bad input.
pub const SUM_WINDOW: f64 = 1e-9;

/// Entries below this are rejected; entries in `[NEG_FLOOR, 0)` are clamped.
pub const NEG_FLOOR: f64 = -1e-12;

/// Inputs already on the simplex within this tolerance pass through untouched,
/// which keeps projection and construction exactly idempotent.
pub const FEASIBLE_TOL: f64 = 1e-12;

/// A probability vector on a finite action set.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Validates and normalizes a raw probability vector.
    ///
    /// Rejects empty or non-finite input, entries below `NEG_FLOOR`, and sums
    /// outside `[1 - SUM_WINDOW, 1 + SUM_WINDOW]`. Entries in `[NEG_FLOOR, 0)`
    /// are clamped to zero. If the (clamped) sum is within `FEASIBLE_TOL` of 1
    /// the vector is kept bit-for-bit; otherwise it is divided by its sum.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("mixed strategy must have at least one action"));
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("mixed strategy entries must be finite"));
        }
        if let Some(p) = probs.iter().find(|&&p| p < NEG_FLOOR) {
            return Err(Error::invalid(format!(
                "mixed strategy entry {p} below {NEG_FLOOR}"
            )));
        }
        let mut probs = probs;
        for p in &mut probs {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 || (sum - 1.0).abs() > SUM_WINDOW {
            return Err(Error::invalid(format!(
                "mixed strategy sums to {sum}, outside 1 ± {SUM_WINDOW}"
            )));
        }
        if (sum - 1.0).abs() > FEASIBLE_TOL {
            for p in &mut probs {
                *p /= sum;
            }
        }
        Ok(MixedStrategy { probs })
    }

    /// Uniform distribution on `m` actions.
    pub fn uniform(m: usize) -> Self {
        assert!(m >= 1, "need at least one action");
        MixedStrategy {
            probs: vec![1.0 / m as f64; m],
        }
    }

    /// Point mass on action `k` (0-based).
    pub fn delta(m: usize, k: usize) -> Self {
        assert!(k < m, "action index out of range");
        let mut probs = vec![0.0; m];
        probs[k] = 1.0;
        MixedStrategy { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one action
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Euclidean projection onto the probability simplex.
///
/// Sort-and-threshold in O(m log m): the result is `max(v_i − τ, 0)` for the
/// unique τ making the entries sum to 1. Sorting ties are broken by original
/// index, so the output is deterministic. Inputs already on the simplex
/// (within `FEASIBLE_TOL`) are returned unchanged, making the projection
/// exactly idempotent.
pub fn simplex_project(v: &[f64]) -> Result<MixedStrategy> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("cannot project non-finite entries"));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() <= FEASIBLE_TOL && v.iter().all(|&x| x >= 0.0) {
        return Ok(MixedStrategy { probs: v.to_vec() });
    }

    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap().then(a.cmp(&b)));

    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &idx) in order.iter().enumerate() {
        cumsum += v[idx];
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if k + 1 == v.len() || v[order[k + 1]] <= candidate {
            tau = candidate;
            break;
        }
    }

    let probs: Vec<f64> = v.iter().map(|&x| (x - tau).max(0.0)).collect();
    MixedStrategy::new(probs)
}

/// An ordered tuple of per-player mixed strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    strategies: Vec<MixedStrategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::invalid("profile must contain at least one player"));
        }
        Ok(StrategyProfile { strategies })
    }

    /// Uniform profile matching a game's action counts.
    pub fn uniform(game: &TensorGame) -> Self {
        StrategyProfile {
            strategies: game
                .action_counts()
                .iter()
                .map(|&m| MixedStrategy::uniform(m))
                .collect(),
        }
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.strategies
    }

    pub fn strategy(&self, j: usize) -> &MixedStrategy {
        &self.strategies[j]
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    /// Σ_j ‖x_j − y_j‖², the squared product-space distance.
    pub fn distance_sq(&self, other: &StrategyProfile) -> f64 {
        assert_eq!(self.strategies.len(), other.strategies.len());
        self.strategies
            .iter()
            .zip(&other.strategies)
            .map(|(a, b)| {
                a.probs()
                    .iter()
                    .zip(b.probs())
                    .map(|(&p, &q)| (p - q) * (p - q))
                    .sum::<f64>()
            })
            .sum()
    }
}

/// An N-player finite game stored as one flat cost tensor per player.
///
/// Tensors are row-major over joint actions `(s_1, …, s_N)` with `s_1`
/// slowest. Per-player action counts may differ.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGame {
    action_counts: Vec<usize>,
    costs: Vec<Vec<f64>>,
    zero_sum: bool,
}

impl TensorGame {
    pub fn new(action_counts: Vec<usize>, costs: Vec<Vec<f64>>) -> Result<Self> {
        let n = action_counts.len();
        if n == 0 {
            return Err(Error::invalid("game needs at least one player"));
        }
        if action_counts.iter().any(|&m| m == 0) {
            return Err(Error::invalid("every player needs at least one action"));
        }
        if costs.len() != n {
            return Err(Error::dims(format!(
                "expected {n} cost tensors, got {}",
                costs.len()
            )));
        }
        let total: usize = action_counts.iter().try_fold(1usize, |acc, &m| {
            acc.checked_mul(m)
        }).ok_or_else(|| Error::invalid("joint action space overflows usize"))?;
        for (j, tensor) in costs.iter().enumerate() {
            if tensor.len() != total {
                return Err(Error::dims(format!(
                    "cost tensor for player {} has {} entries, expected {total}",
                    j + 1,
                    tensor.len()
                )));
            }
            if tensor.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!(
                    "cost tensor for player {} has non-finite entries",
                    j + 1
                )));
            }
        }
        let zero_sum = (0..total).all(|idx| {
            costs.iter().map(|t| t[idx]).sum::<f64>().abs() <= 1e-12
        });
        Ok(TensorGame {
            action_counts,
            costs,
            zero_sum,
        })
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    /// Total number of joint pure actions, ∏ m_i.
    pub fn joint_actions(&self) -> usize {
        self.action_counts.iter().product()
    }

    pub fn cost_tensor(&self, j: usize) -> &[f64] {
        &self.costs[j]
    }

    /// True iff Σ_j f_j(s) = 0 for every joint action (within 1e-12).
    pub fn is_zero_sum(&self) -> bool {
        self.zero_sum
    }

    /// Cost to player `j` at the joint pure action `s`.
    pub fn cost_at(&self, j: usize, s: &[usize]) -> f64 {
        debug_assert_eq!(s.len(), self.action_counts.len());
        let mut idx = 0;
        for (i, &si) in s.iter().enumerate() {
            debug_assert!(si < self.action_counts[i]);
            idx = idx * self.action_counts[i] + si;
        }
        self.costs[j][idx]
    }

    fn check_profile(&self, x: &StrategyProfile) -> Result<()> {
        if x.num_players() != self.num_players() {
            return Err(Error::dims(format!(
                "profile has {} players, game has {}",
                x.num_players(),
                self.num_players()
            )));
        }
        for (i, s) in x.strategies().iter().enumerate() {
            if s.len() != self.action_counts[i] {
                return Err(Error::dims(format!(
                    "player {} strategy has {} actions, game expects {}",
                    i + 1,
                    s.len(),
                    self.action_counts[i]
                )));
            }
        }
        Ok(())
    }

    /// Expected cost Σ_s f_j(s) ∏_i x_{i,s_i}, by contracting one player's
    /// axis at a time.
    pub fn expected_cost(&self, x: &StrategyProfile, j: usize) -> Result<f64> {
        self.check_profile(x)?;
        let probs: Vec<&[f64]> = x.strategies().iter().map(|s| s.probs()).collect();
        Ok(self.expected_cost_raw(&probs, j))
    }

    pub(crate) fn expected_cost_raw(&self, x: &[&[f64]], j: usize) -> f64 {
        let mut acc = self.costs[j].clone();
        for i in (0..self.action_counts.len()).rev() {
            contract_last_axis(&mut acc, self.action_counts[i], x[i]);
        }
        acc[0]
    }

    /// The gradient of player j's expected cost in their own strategy: the
    /// vector `c` with `c_k` = expected cost when j plays pure action `k`
    /// against `x_{−j}`. Satisfies `c · x_j = expected_cost(x, j)`.
    pub fn own_gradient(&self, x: &StrategyProfile, j: usize) -> Result<Vec<f64>> {
        self.check_profile(x)?;
        let probs: Vec<&[f64]> = x.strategies().iter().map(|s| s.probs()).collect();
        Ok(self.own_gradient_raw(&probs, j))
    }

    pub(crate) fn own_gradient_raw(&self, x: &[&[f64]], j: usize) -> Vec<f64> {
        let n = self.action_counts.len();
        let mut acc = self.costs[j].clone();
        // Contract trailing axes (fastest-varying first) down to axis j …
        for i in ((j + 1)..n).rev() {
            contract_last_axis(&mut acc, self.action_counts[i], x[i]);
        }
        // … then leading axes (slowest-varying), leaving axis j free.
        for i in 0..j {
            contract_first_axis(&mut acc, self.action_counts[i], x[i]);
        }
        debug_assert_eq!(acc.len(), self.action_counts[j]);
        acc
    }

    /// Best pure response against `x_{−j}`: (value, action index), ties to
    /// the lowest index.
    pub fn best_response(&self, x: &StrategyProfile, j: usize) -> Result<(f64, usize)> {
        let grad = self.own_gradient(x, j)?;
        Ok(argmin(&grad))
    }

    /// Exploitability: Σ_j (current expected cost − best-response cost).
    /// Zero exactly at Nash equilibria; nonnegative up to rounding.
    pub fn nash_gap(&self, x: &StrategyProfile) -> Result<f64> {
        self.check_profile(x)?;
        let probs: Vec<&[f64]> = x.strategies().iter().map(|s| s.probs()).collect();
        Ok(self.nash_gap_raw(&probs))
    }

    pub(crate) fn nash_gap_raw(&self, x: &[&[f64]]) -> f64 {
        let mut gap = 0.0;
        for j in 0..self.num_players() {
            let grad = self.own_gradient_raw(x, j);
            let current: f64 = grad.iter().zip(x[j]).map(|(g, p)| g * p).sum();
            let (best, _) = argmin(&grad);
            gap += current - best;
        }
        gap
    }
}

pub(crate) fn argmin(v: &[f64]) -> (f64, usize) {
    let mut best = v[0];
    let mut best_idx = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < best {
            best = x;
            best_idx = i;
        }
    }
    (best, best_idx)
}

/// In place, contract the last (fastest-varying) axis of a flat row-major
/// tensor against the weights `w`; `m` is that axis's length.
fn contract_last_axis(acc: &mut Vec<f64>, m: usize, w: &[f64]) {
    let out_len = acc.len() / m;
    for a in 0..out_len {
        let base = a * m;
        let mut s = 0.0;
        for k in 0..m {
            s += acc[base + k] * w[k];
        }
        acc[a] = s;
    }
    acc.truncate(out_len);
}

/// In place, contract the first (slowest-varying) axis.
fn contract_first_axis(acc: &mut Vec<f64>, m: usize, w: &[f64]) {
    let stride = acc.len() / m;
    for b in 0..stride {
        let mut s = 0.0;
        for k in 0..m {
            s += acc[k * stride + b] * w[k];
        }
        acc[b] = s;
    }
    acc.truncate(stride);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::appendix_game;

    fn profile(parts: &[&[f64]]) -> StrategyProfile {
        StrategyProfile::new(
            parts
                .iter()
                .map(|p| MixedStrategy::new(p.to_vec()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn projection_matches_hand_cases() {
        // Already feasible: passes through bitwise.
        let p = simplex_project(&[0.5, 0.5]).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);

        let p = simplex_project(&[2.0, 0.0]).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);

        let p = simplex_project(&[0.4, 0.4, 0.4]).unwrap();
        for &x in p.probs() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_brute_force_2d() {
        // Compare against minimizing ‖x − v‖ over a fine grid of Δ_2.
        let cases = [[2.0, 0.0], [-1.0, 0.3], [0.9, 0.7], [5.0, 5.5]];
        for v in cases {
            let p = simplex_project(&v).unwrap();
            let mut best = f64::INFINITY;
            let mut best_x = 0.0;
            for k in 0..=10_000 {
                let x = k as f64 / 10_000.0;
                let d = (x - v[0]).powi(2) + (1.0 - x - v[1]).powi(2);
                if d < best {
                    best = d;
                    best_x = x;
                }
            }
            assert!((p.probs()[0] - best_x).abs() < 2e-4, "{v:?}");
        }
    }

    #[test]
    fn projection_rejects_junk() {
        assert!(simplex_project(&[]).is_err());
        assert!(simplex_project(&[f64::NAN, 0.0]).is_err());
        assert!(simplex_project(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn strategy_construction_rules() {
        // Silent renormalization inside the window.
        let s = MixedStrategy::new(vec![0.5 + 4e-10, 0.5]).unwrap();
        assert!((s.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        // Beyond the window: rejected.
        assert!(MixedStrategy::new(vec![0.5, 0.51]).is_err());
        // Small negative: clamped.
        let s = MixedStrategy::new(vec![1.0, -1e-13]).unwrap();
        assert_eq!(s.probs()[1], 0.0);
        // Large negative: rejected.
        assert!(MixedStrategy::new(vec![1.0, -1e-9]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
    }

    #[test]
    fn expected_cost_appendix_cases() {
        let g = appendix_game();
        let x = profile(&[&[1.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(g.expected_cost(&x, 0).unwrap(), 3.0);

        let x = profile(&[&[0.5, 0.5], &[2.0 / 3.0, 1.0 / 3.0]]);
        // 3·(1/2)(2/3) + 1·(1/2)(2/3) + 4·(1/2)(1/3) = 2
        assert!((g.expected_cost(&x, 0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_game_is_constant() {
        let g = TensorGame::new(vec![2, 3], vec![vec![7.0; 6], vec![0.0; 6]]).unwrap();
        let x = profile(&[&[0.3, 0.7], &[0.2, 0.5, 0.3]]);
        assert!((g.expected_cost(&x, 0).unwrap() - 7.0).abs() < 1e-12);
        let grad = g.own_gradient(&x, 0).unwrap();
        for c in grad {
            assert!((c - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn own_gradient_appendix_cases() {
        let g = appendix_game();
        let x = profile(&[&[0.5, 0.5], &[2.0 / 3.0, 1.0 / 3.0]]);
        let g1 = g.own_gradient(&x, 0).unwrap();
        assert!((g1[0] - 2.0).abs() < 1e-14 && (g1[1] - 2.0).abs() < 1e-14);
        let g2 = g.own_gradient(&x, 1).unwrap();
        assert!((g2[0] + 2.0).abs() < 1e-14 && (g2[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn nash_gap_appendix_cases() {
        let g = appendix_game();
        let eq = profile(&[&[0.5, 0.5], &[2.0 / 3.0, 1.0 / 3.0]]);
        assert!(g.nash_gap(&eq).unwrap().abs() < 1e-14);

        let corner = profile(&[&[1.0, 0.0], &[1.0, 0.0]]);
        assert!((g.nash_gap(&corner).unwrap() - 2.0).abs() < 1e-14);

        let mid = profile(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!((g.nash_gap(&mid).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn best_response_ties_to_lowest_index() {
        let g = appendix_game();
        let x = profile(&[&[0.5, 0.5], &[1.0, 0.0]]);
        // Player 1's gradient against (1,0) is (3, 1): best is action 1 (0-based).
        assert_eq!(g.best_response(&x, 0).unwrap(), (1.0, 1));
        let x = profile(&[&[0.5, 0.5], &[2.0 / 3.0, 1.0 / 3.0]]);
        // Tie (2, 2) resolves to index 0.
        let (v, k) = g.best_response(&x, 0).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        assert_eq!(k, 0);
    }

    #[test]
    fn single_action_game() {
        let g = TensorGame::new(vec![1], vec![vec![5.0]]).unwrap();
        let x = profile(&[&[1.0]]);
        assert_eq!(g.best_response(&x, 0).unwrap(), (5.0, 0));
        assert_eq!(g.nash_gap(&x).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = appendix_game();
        let bad = profile(&[&[1.0, 0.0]]);
        assert!(matches!(
            g.expected_cost(&bad, 0),
            Err(Error::DimensionMismatch(_))
        ));
        let bad = profile(&[&[1.0, 0.0], &[0.5, 0.25, 0.25]]);
        assert!(g.nash_gap(&bad).is_err());
    }

    #[test]
    fn tensor_shape_validation() {
        assert!(TensorGame::new(vec![2, 2], vec![vec![0.0; 3], vec![0.0; 4]]).is_err());
        assert!(TensorGame::new(vec![2, 2], vec![vec![0.0; 4]]).is_err());
        assert!(TensorGame::new(vec![], vec![]).is_err());
        assert!(TensorGame::new(vec![2], vec![vec![f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn zero_sum_flag() {
        assert!(appendix_game().is_zero_sum());
        let g = TensorGame::new(vec![2], vec![vec![1.0, 0.0]]).unwrap();
        assert!(!g.is_zero_sum());
    }

    #[test]
    fn cost_at_uses_row_major_s1_slowest() {
        let g = appendix_game();
        assert_eq!(g.cost_at(0, &[0, 0]), 3.0);
        assert_eq!(g.cost_at(0, &[0, 1]), 0.0);
        assert_eq!(g.cost_at(0, &[1, 0]), 1.0);
        assert_eq!(g.cost_at(0, &[1, 1]), 4.0);
    }
}

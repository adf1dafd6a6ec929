//! File formats, run orchestration, and artifact emission for the CLI.
//!
//! Two TOML-based input formats are supported: `.game` files carrying dense
//! cost tensors (`players`, `actions`, `costs`, optional `zero_sum_expected`)
//! and `.mfg` files carrying mean-field data (`states`, `phi`, `kernel`,
//! `psi`). Outputs are one directory per run containing `trajectory.csv`,
//! `gaps.csv`, and `report.txt` (plus `gaussian.csv` for the estimator-check
//! mode). All numeric CSV fields use 17 significant digits and `\n` line
//! endings, so identical runs produce byte-identical files on every platform.
//!
//! The orchestrator validates all inputs and finishes all computation before
//! creating the output directory, so an input error never leaves partial
//! numeric output behind.

use crate::analytic;
use crate::error::{Error, Result};
use crate::flow::{default_step, integrate, FlowConfig, FlowResult, Scheme, StopReason};
use crate::game::{argmin, MixedStrategy, StrategyProfile, TensorGame};
use crate::gaussian::{
    estimate_inner, estimate_jay, exact_inner, inner_sample_std, jay_map, pushforward_variance,
    sample_gamma, MeasureCoeffs,
};
use crate::meanfield::{mf_integrate, symmetric_flow, MeanFieldCost, Psi, SymmetricGameView};
use crate::monotonicity::{
    mf_monotonicity_check, pure_monotonicity_check, variational_monotonicity_check,
    MonotonicityReport, Verdict, Witness, DEFAULT_CAP, DEFAULT_N_SAMPLES, DEFAULT_TOL,
};
use crate::rng::{fill_normal, substream};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output root (a directory under
/// which one subdirectory per mode is created when `--out` is not given).
pub const OUT_ROOT_ENV: &str = "NASHFLOW_OUT";

// ---------------------------------------------------------------------------
// File formats

#[derive(Debug, Serialize, Deserialize)]
struct GameFile {
    players: usize,
    actions: Vec<usize>,
    costs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zero_sum_expected: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PsiSpec {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MfFile {
    states: usize,
    phi: Vec<f64>,
    kernel: Vec<f64>,
    psi: PsiSpec,
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| format_err(path, e.to_string()))
}

/// Parse a `.game` file into a validated [`TensorGame`]. The optional
/// `zero_sum_expected` field is cross-checked against the derived flag.
pub fn load_game(path: &Path) -> Result<TensorGame> {
    let text = read_to_string(path)?;
    let file: GameFile = toml::from_str(&text).map_err(|e| format_err(path, e.to_string()))?;
    if file.players != file.actions.len() {
        return Err(format_err(
            path,
            format!(
                "players = {} but actions lists {} entries",
                file.players,
                file.actions.len()
            ),
        ));
    }
    let game = TensorGame::new(file.actions, file.costs).map_err(|e| format_err(path, e.to_string()))?;
    if let Some(expected) = file.zero_sum_expected {
        if expected != game.is_zero_sum() {
            return Err(format_err(
                path,
                format!(
                    "zero_sum_expected = {} but the cost tensors derive zero_sum = {}",
                    expected,
                    game.is_zero_sum()
                ),
            ));
        }
    }
    Ok(game)
}

/// Serialize a game back to the `.game` format, recording the derived
/// zero-sum flag so round trips are self-checking.
pub fn save_game(path: &Path, game: &TensorGame) -> Result<()> {
    let file = GameFile {
        players: game.num_players(),
        actions: game.action_counts().to_vec(),
        costs: (0..game.num_players())
            .map(|j| game.cost_tensor(j).to_vec())
            .collect(),
        zero_sum_expected: Some(game.is_zero_sum()),
    };
    let text = toml::to_string(&file).map_err(|e| format_err(path, e.to_string()))?;
    std::fs::write(path, text).map_err(|e| format_err(path, e.to_string()))?;
    Ok(())
}

fn parse_psi(path: &Path, spec: &PsiSpec) -> Result<Psi> {
    match spec.name.as_str() {
        "none" => Ok(Psi::None),
        "identity" => Ok(Psi::Identity),
        "log1p" => Ok(Psi::Log1p),
        "power" => match spec.p {
            Some(p) => Ok(Psi::Power(p)),
            None => Err(format_err(path, "psi.name = \"power\" requires psi.p")),
        },
        other => Err(format_err(
            path,
            format!("unknown psi.name {other:?} (expected none, identity, power, or log1p)"),
        )),
    }
}

fn render_psi(psi: &Psi) -> PsiSpec {
    PsiSpec {
        name: psi.name().to_string(),
        p: match psi {
            Psi::Power(p) => Some(*p),
            _ => None,
        },
    }
}

/// Parse an `.mfg` file into a validated [`MeanFieldCost`].
pub fn load_meanfield(path: &Path) -> Result<MeanFieldCost> {
    let text = read_to_string(path)?;
    let file: MfFile = toml::from_str(&text).map_err(|e| format_err(path, e.to_string()))?;
    if file.states != file.phi.len() {
        return Err(format_err(
            path,
            format!(
                "states = {} but phi lists {} entries",
                file.states,
                file.phi.len()
            ),
        ));
    }
    let psi = parse_psi(path, &file.psi)?;
    MeanFieldCost::new(file.phi, file.kernel, psi).map_err(|e| format_err(path, e.to_string()))
}

/// Serialize a mean-field cost back to the `.mfg` format.
pub fn save_meanfield(path: &Path, cost: &MeanFieldCost) -> Result<()> {
    let file = MfFile {
        states: cost.num_states(),
        phi: cost.phi().to_vec(),
        kernel: cost.kernel().to_vec(),
        psi: render_psi(cost.psi()),
    };
    let text = toml::to_string(&file).map_err(|e| format_err(path, e.to_string()))?;
    std::fs::write(path, text).map_err(|e| format_err(path, e.to_string()))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Run specification

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nplayer,
    Meanfield,
    Symmetric,
    AppendixB,
    GaussianCheck,
}

impl Mode {
    pub fn dir_name(self) -> &'static str {
        match self {
            Mode::Nplayer => "nplayer",
            Mode::Meanfield => "meanfield",
            Mode::Symmetric => "symmetric",
            Mode::AppendixB => "appendix-b",
            Mode::GaussianCheck => "gaussian-check",
        }
    }

    fn needs_input(self) -> bool {
        matches!(self, Mode::Nplayer | Mode::Meanfield | Mode::Symmetric)
    }
}

/// Everything a single invocation needs; the CLI populates this from flags.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub scheme: Scheme,
    /// Step size; defaults to a Lipschitz-scaled step for game modes and
    /// 1e-2 for mean-field mode.
    pub h: Option<f64>,
    pub t_max: f64,
    pub gap_tol: f64,
    /// Recording stride; defaults to roughly 1000 records per run.
    pub record_every: Option<usize>,
    pub inner_tol: f64,
    pub inner_max: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Initial radius for the built-in benchmark: v0 = (1/2 + r0, 2/3).
    pub r0: f64,
    pub force: bool,
    pub monotonicity_check: bool,
    pub gaussian_n: usize,
    pub gaussian_m: usize,
}

impl RunSpec {
    pub fn new(mode: Mode) -> Self {
        RunSpec {
            mode,
            input: None,
            scheme: Scheme::ProjectedEuler,
            h: None,
            t_max: 100.0,
            gap_tol: 1e-2,
            record_every: None,
            inner_tol: 1e-10,
            inner_max: 100,
            out: None,
            seed: 0,
            r0: 0.3,
            force: false,
            monotonicity_check: true,
            gaussian_n: 1_000_000,
            gaussian_m: 2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.mode.needs_input() && self.input.is_none() {
            return Err(Error::invalid(format!(
                "mode {} requires --input",
                self.mode.dir_name()
            )));
        }
        if self.mode == Mode::AppendixB && !(0.0..=0.5).contains(&self.r0) {
            return Err(Error::invalid(format!(
                "r0 must lie in [0, 0.5] so the start stays in the square, got {}",
                self.r0
            )));
        }
        if self.mode == Mode::GaussianCheck {
            if self.gaussian_m == 0 {
                return Err(Error::invalid("gaussian dimension must be ≥ 1"));
            }
            if self.gaussian_n < 2 {
                return Err(Error::invalid("gaussian sample count must be ≥ 2"));
            }
        }
        Ok(())
    }
}

fn resolve_out_dir(explicit: Option<&Path>, env_root: Option<PathBuf>, mode: Mode) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    env_root
        .unwrap_or_else(|| PathBuf::from("runs"))
        .join(mode.dir_name())
}

// ---------------------------------------------------------------------------
// CSV / report emission

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| format_err(path, e.to_string()))
}

fn trajectory_csv(res: &FlowResult) -> String {
    let mut out = String::from("t, player, coord, state, cesaro\n");
    for (i, t) in res.times.iter().enumerate() {
        let state = &res.states[i];
        let cesaro = &res.cesaro[i];
        for j in 0..state.num_players() {
            let s = state.strategy(j).probs();
            let c = cesaro.strategy(j).probs();
            for k in 0..s.len() {
                let _ = writeln!(
                    out,
                    "{}, {}, {}, {}, {}",
                    fmt_f(*t),
                    j + 1,
                    k + 1,
                    fmt_f(s[k]),
                    fmt_f(c[k])
                );
            }
        }
    }
    out
}

fn gaps_csv(res: &FlowResult) -> String {
    let mut out = String::from("t, gap\n");
    for (t, gap) in res.times.iter().zip(&res.gaps) {
        let _ = writeln!(out, "{}, {}", fmt_f(*t), fmt_f(*gap));
    }
    out
}

fn stop_reason_str(reason: StopReason) -> &'static str {
    match reason {
        StopReason::GapTolMet => "gap-tol-met",
        StopReason::TMaxReached => "t-max-reached",
    }
}

fn scheme_str(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::ProjectedEuler => "projected-euler",
        Scheme::ProximalImplicit => "proximal-implicit",
        Scheme::InteriorRk4 => "interior-rk4",
    }
}

fn witness_str(witness: &Witness) -> String {
    fn one_based(s: &[usize]) -> Vec<usize> {
        s.iter().map(|&a| a + 1).collect()
    }
    match witness {
        Witness::PureActions { s, t } => {
            format!("pure actions s = {:?}, t = {:?}", one_based(s), one_based(t))
        }
        Witness::Profiles { x, y } => {
            let flat = |p: &StrategyProfile| -> Vec<Vec<f64>> {
                (0..p.num_players())
                    .map(|j| p.strategy(j).probs().to_vec())
                    .collect()
            };
            format!("profiles x = {:?}, y = {:?}", flat(x), flat(y))
        }
        Witness::Measures { mu, nu } => {
            format!("measures mu = {:?}, nu = {:?}", mu.probs(), nu.probs())
        }
    }
}

fn verdict_line(kind: &str, report: &MonotonicityReport) -> String {
    let mut line = format!(
        "  {kind}: {} (worst margin {}, {} pairs, seed {})",
        report.verdict,
        fmt_f(report.worst_margin),
        report.pairs_tested,
        report.seed
    );
    match report.verdict {
        Verdict::CertifiedSampled => line.push_str(" — sampled evidence, not a proof"),
        Verdict::Violated => {
            let _ = write!(line, "; witness: {}", witness_str(&report.witness));
        }
        Verdict::CertifiedExhaustive => {}
    }
    line
}

fn profile_lines(label: &str, profile: &StrategyProfile, out: &mut String) {
    let _ = writeln!(out, "{label}:");
    for j in 0..profile.num_players() {
        let rendered: Vec<String> = profile.strategy(j).probs().iter().map(|&p| fmt_f(p)).collect();
        let _ = writeln!(out, "  player {}: {}", j + 1, rendered.join(" "));
    }
}

// ---------------------------------------------------------------------------
// Orchestration

/// Execute a run end to end. Returns the process exit code: 0 when the gap
/// tolerance was met (or every estimator check passed), 2 when the time
/// horizon ran out first (or a check failed). Input problems surface as
/// `Err`, which the CLI maps to exit code 1 before any output is written.
pub fn run(spec: &RunSpec) -> Result<i32> {
    spec.validate()?;
    let out_dir = resolve_out_dir(
        spec.out.as_deref(),
        std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from),
        spec.mode,
    );
    if out_dir.exists() && !spec.force {
        return Err(Error::invalid(format!(
            "output directory {} already exists; pass --force to overwrite",
            out_dir.display()
        )));
    }
    match spec.mode {
        Mode::GaussianCheck => run_gaussian(spec, &out_dir),
        _ => run_flow_mode(spec, &out_dir),
    }
}

fn auto_record_every(t_max: f64, h: f64) -> usize {
    let steps = (t_max / h).ceil() as usize;
    (steps / 1000).max(1)
}

fn flow_config(spec: &RunSpec, h: f64) -> FlowConfig {
    FlowConfig {
        scheme: spec.scheme,
        h,
        t_max: spec.t_max,
        gap_tol: spec.gap_tol,
        record_every: spec.record_every.unwrap_or_else(|| auto_record_every(spec.t_max, h)),
        inner_tol: spec.inner_tol,
        inner_max: spec.inner_max,
    }
}

fn run_flow_mode(spec: &RunSpec, out_dir: &Path) -> Result<i32> {
    let mut monotonicity_lines: Vec<String> = Vec::new();
    let mut extra_lines: Vec<String> = Vec::new();
    let h;
    let result: FlowResult;

    match spec.mode {
        Mode::Nplayer | Mode::AppendixB => {
            let game = if spec.mode == Mode::AppendixB {
                analytic::appendix_game()
            } else {
                load_game(spec.input.as_deref().expect("validated"))?
            };
            h = spec.h.unwrap_or_else(|| default_step(&game));
            let x0 = if spec.mode == Mode::AppendixB {
                let v0 = analytic::ReducedState::new(0.5 + spec.r0, 2.0 / 3.0)?;
                analytic::lift(&v0)
            } else {
                StrategyProfile::uniform(&game)
            };
            result = integrate(&game, &x0, &flow_config(spec, h))?;
            if spec.monotonicity_check {
                let pure = pure_monotonicity_check(&game, DEFAULT_CAP, DEFAULT_TOL, spec.seed);
                let vari =
                    variational_monotonicity_check(&game, DEFAULT_N_SAMPLES, DEFAULT_TOL, spec.seed);
                monotonicity_lines.push(verdict_line("pure-action check", &pure));
                monotonicity_lines.push(verdict_line("variational check", &vari));
            }
            if spec.mode == Mode::AppendixB {
                let red = analytic::reduce(result.final_state())?;
                extra_lines.push(format!(
                    "final reduced state: v1 = {}, v2 = {}",
                    fmt_f(red.v1()),
                    fmt_f(red.v2())
                ));
                extra_lines.push(format!(
                    "distance from center (1/2, 2/3): {}",
                    fmt_f(red.radius())
                ));
            }
        }
        Mode::Symmetric => {
            let game = load_game(spec.input.as_deref().expect("validated"))?;
            if spec.monotonicity_check {
                let pure = pure_monotonicity_check(&game, DEFAULT_CAP, DEFAULT_TOL, spec.seed);
                let vari =
                    variational_monotonicity_check(&game, DEFAULT_N_SAMPLES, DEFAULT_TOL, spec.seed);
                monotonicity_lines.push(verdict_line("pure-action check", &pure));
                monotonicity_lines.push(verdict_line("variational check", &vari));
            }
            h = spec.h.unwrap_or_else(|| default_step(&game));
            let view = SymmetricGameView::new(game)?;
            let mu0 = MixedStrategy::uniform(view.num_actions());
            result = symmetric_flow(&view, &mu0, &flow_config(spec, h))?;
            extra_lines.push(
                "state rows describe the shared population strategy (reported as player 1)".into(),
            );
        }
        Mode::Meanfield => {
            let cost = load_meanfield(spec.input.as_deref().expect("validated"))?;
            h = spec.h.unwrap_or(1e-2);
            let mu0 = MixedStrategy::uniform(cost.num_states());
            result = mf_integrate(&cost, &mu0, &flow_config(spec, h))?;
            if spec.monotonicity_check {
                let rep = mf_monotonicity_check(&cost, DEFAULT_N_SAMPLES, DEFAULT_TOL, spec.seed);
                monotonicity_lines.push(verdict_line("measure-pair check", &rep));
                monotonicity_lines.push(format!(
                    "  kernel symmetry defect: {}",
                    fmt_f(cost.kernel_symmetry_defect())
                ));
                monotonicity_lines.push(format!(
                    "  kernel eigenvalue floor: {}",
                    fmt_f(cost.kernel_eigen_floor())
                ));
                monotonicity_lines.push(format!("  congestion term: {}", cost.psi().name()));
            }
            if cost.is_potential_only() {
                let (_, vertex) = argmin(cost.phi());
                extra_lines.push(format!(
                    "equilibrium vertex: state {} (argmin of the potential)",
                    vertex + 1
                ));
            }
            let mean = result.final_cesaro().strategy(0);
            let (_, dominant) = argmin(&mean.probs().iter().map(|&p| -p).collect::<Vec<_>>());
            extra_lines.push(format!(
                "dominant cesaro state: state {} (mass {})",
                dominant + 1,
                fmt_f(mean.probs()[dominant])
            ));
        }
        Mode::GaussianCheck => unreachable!("dispatched in run()"),
    }

    // All computation done; now create the directory and emit artifacts.
    std::fs::create_dir_all(out_dir).map_err(|e| format_err(out_dir, e.to_string()))?;
    write_file(&out_dir.join("trajectory.csv"), &trajectory_csv(&result))?;
    write_file(&out_dir.join("gaps.csv"), &gaps_csv(&result))?;

    let mut report = String::new();
    let _ = writeln!(report, "mode: {}", spec.mode.dir_name());
    if let Some(input) = &spec.input {
        let _ = writeln!(report, "input: {}", input.display());
    }
    let _ = writeln!(report, "scheme: {}", scheme_str(spec.scheme));
    let _ = writeln!(report, "h: {}", fmt_f(h));
    let _ = writeln!(report, "t_max: {}", fmt_f(spec.t_max));
    let _ = writeln!(report, "gap_tol: {}", fmt_f(spec.gap_tol));
    let _ = writeln!(report, "seed: {}", spec.seed);
    let _ = writeln!(report, "stop reason: {}", stop_reason_str(result.stop_reason));
    let _ = writeln!(report, "final time: {}", fmt_f(result.final_time()));
    let _ = writeln!(report, "final gap: {}", fmt_f(result.final_gap()));
    profile_lines("final cesaro mean", result.final_cesaro(), &mut report);
    for line in &extra_lines {
        let _ = writeln!(report, "{line}");
    }
    if monotonicity_lines.is_empty() {
        let _ = writeln!(report, "monotonicity: not checked (disabled)");
    } else {
        let _ = writeln!(report, "monotonicity:");
        for line in &monotonicity_lines {
            let _ = writeln!(report, "{line}");
        }
    }
    for warning in &result.warnings {
        let _ = writeln!(report, "warning: {warning}");
    }
    write_file(&out_dir.join("report.txt"), &report)?;

    Ok(match result.stop_reason {
        StopReason::GapTolMet => 0,
        StopReason::TMaxReached => 2,
    })
}

struct CheckRow {
    name: String,
    estimate: f64,
    exact: f64,
    tolerance: f64,
    pass: bool,
}

fn run_gaussian(spec: &RunSpec, out_dir: &Path) -> Result<i32> {
    let m = spec.gaussian_m;
    let n = spec.gaussian_n;
    let table = sample_gamma(m, n, spec.seed)?;
    let sqrt_n = (n as f64).sqrt();
    let mut rows: Vec<CheckRow> = Vec::new();

    // Coefficient draws come from a stream index no row can collide with.
    let mut coeff_rng = substream(spec.seed, u64::MAX);
    let mut draw = |m: usize| -> Result<MeasureCoeffs> {
        let mut v = vec![0.0; m];
        fill_normal(&mut coeff_rng, &mut v);
        MeasureCoeffs::new(v)
    };

    for i in 0..20 {
        let mu = draw(m)?;
        let nu = draw(m)?;
        let estimate = estimate_inner(&mu, &nu, &table)?;
        let exact = exact_inner(&mu, &nu)?;
        let tolerance = 4.0 * inner_sample_std(&mu, &nu) / sqrt_n;
        rows.push(CheckRow {
            name: format!("inner_pair_{i:02}"),
            estimate,
            exact,
            tolerance,
            pass: (estimate - exact).abs() <= tolerance,
        });
    }

    let mut c = vec![0.0; m];
    if m == 1 {
        c[0] = 5.0;
    } else {
        c[0] = 3.0;
        c[1] = 4.0;
    }
    let estimate = pushforward_variance(&c, &table)?;
    let exact: f64 = c.iter().map(|v| v * v).sum();
    let tolerance = 4.0 * 2.0f64.sqrt() * exact / sqrt_n;
    rows.push(CheckRow {
        name: "pushforward_variance".into(),
        estimate,
        exact,
        tolerance,
        pass: (estimate - exact).abs() <= tolerance,
    });

    let mu = draw(m)?;
    let nu = draw(m)?;
    let via_jay: f64 = mu.coeffs().iter().zip(jay_map(&nu)).map(|(&a, b)| a * b).sum();
    let exact = exact_inner(&mu, &nu)?;
    rows.push(CheckRow {
        name: "jay_duality".into(),
        estimate: via_jay,
        exact,
        tolerance: 0.0,
        pass: via_jay.to_bits() == exact.to_bits(),
    });

    let nu = draw(m)?;
    let bochner = estimate_jay(&nu, &table)?;
    let target = jay_map(&nu);
    let nn: f64 = nu.coeffs().iter().map(|v| v * v).sum();
    for j in 0..m {
        let sigma = (nn + nu.coeffs()[j] * nu.coeffs()[j]).sqrt();
        let tolerance = 4.0 * sigma / sqrt_n;
        rows.push(CheckRow {
            name: format!("bochner_component_{}", j + 1),
            estimate: bochner[j],
            exact: target[j],
            tolerance,
            pass: (bochner[j] - target[j]).abs() <= tolerance,
        });
    }

    let passed = rows.iter().filter(|r| r.pass).count();
    let all_pass = passed == rows.len();

    std::fs::create_dir_all(out_dir).map_err(|e| format_err(out_dir, e.to_string()))?;
    let mut csv = String::from("check, estimate, exact, tolerance, pass\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{}, {}, {}, {}, {}",
            row.name,
            fmt_f(row.estimate),
            fmt_f(row.exact),
            fmt_f(row.tolerance),
            u8::from(row.pass)
        );
    }
    write_file(&out_dir.join("gaussian.csv"), &csv)?;

    let mut report = String::new();
    let _ = writeln!(report, "mode: {}", spec.mode.dir_name());
    let _ = writeln!(report, "seed: {}", spec.seed);
    let _ = writeln!(report, "dimension: {m}");
    let _ = writeln!(report, "samples: {n}");
    let _ = writeln!(report, "checks passed: {passed}/{}", rows.len());
    let _ = writeln!(report, "verdict: {}", if all_pass { "pass" } else { "fail" });
    write_file(&out_dir.join("report.txt"), &report)?;

    Ok(if all_pass { 0 } else { 2 })
}

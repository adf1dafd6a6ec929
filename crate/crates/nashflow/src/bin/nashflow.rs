use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use nashflow::flow::Scheme;
use nashflow::io::{run, Mode, RunSpec};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "nashflow",
    version,
    about = "Equilibrium computation for finite games via simplex-constrained subgradient flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a flow (or run the Gaussian estimator checks) and write
    /// trajectory.csv, gaps.csv, and report.txt into the output directory.
    ///
    /// Exit status: 0 when the gap tolerance is met (or every estimator
    /// check passes), 2 when t-max runs out first (or a check fails),
    /// 1 on any input error.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// N-player game from a .game file, uniform start.
    Nplayer,
    /// Single-population mean-field cost from an .mfg file.
    Meanfield,
    /// Shared-strategy flow of a symmetric game from a .game file.
    Symmetric,
    /// Built-in 2x2 zero-sum benchmark with a closed-form solution.
    AppendixB,
    /// Monte Carlo checks of the Gaussian measure identities.
    GaussianCheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    ProjectedEuler,
    ProximalImplicit,
    InteriorRk4,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,

    /// Input file; required for nplayer, meanfield, and symmetric modes.
    #[arg(long)]
    input: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = SchemeArg::ProjectedEuler)]
    scheme: SchemeArg,

    /// Step size. Default: 0.1/L for game modes (L = gradient Lipschitz
    /// bound), 1e-2 for mean-field mode.
    #[arg(long)]
    h: Option<f64>,

    #[arg(long, default_value_t = 100.0)]
    t_max: f64,

    /// Stop as soon as the Cesàro-mean gap falls below this value.
    #[arg(long, default_value_t = 1e-2)]
    gap_tol: f64,

    /// Record every k-th step. Default targets about 1000 records per run.
    #[arg(long)]
    record_every: Option<usize>,

    /// Fixed-point residual tolerance for the proximal-implicit scheme.
    #[arg(long, default_value_t = 1e-10)]
    inner_tol: f64,

    /// Fixed-point iteration cap for the proximal-implicit scheme.
    #[arg(long, default_value_t = 100)]
    inner_max: usize,

    /// Output directory. Default: $NASHFLOW_OUT/<mode>, or ./runs/<mode>.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Benchmark start radius: the appendix-b mode begins at reduced
    /// coordinates (1/2 + r0, 2/3).
    #[arg(long, default_value_t = 0.3)]
    r0: f64,

    /// Overwrite an existing output directory.
    #[arg(long, action = ArgAction::SetTrue)]
    force: bool,

    /// Certify monotonicity and include the verdicts in report.txt.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    monotonicity_check: bool,

    /// Sample count for gaussian-check mode.
    #[arg(long, default_value_t = 1_000_000)]
    gaussian_n: usize,

    /// Coordinate dimension for gaussian-check mode.
    #[arg(long, default_value_t = 2)]
    gaussian_m: usize,
}

impl RunArgs {
    fn into_spec(self) -> RunSpec {
        let mut spec = RunSpec::new(match self.mode {
            ModeArg::Nplayer => Mode::Nplayer,
            ModeArg::Meanfield => Mode::Meanfield,
            ModeArg::Symmetric => Mode::Symmetric,
            ModeArg::AppendixB => Mode::AppendixB,
            ModeArg::GaussianCheck => Mode::GaussianCheck,
        });
        spec.input = self.input;
        spec.scheme = match self.scheme {
            SchemeArg::ProjectedEuler => Scheme::ProjectedEuler,
            SchemeArg::ProximalImplicit => Scheme::ProximalImplicit,
            SchemeArg::InteriorRk4 => Scheme::InteriorRk4,
        };
        spec.h = self.h;
        spec.t_max = self.t_max;
        spec.gap_tol = self.gap_tol;
        spec.record_every = self.record_every;
        spec.inner_tol = self.inner_tol;
        spec.inner_max = self.inner_max;
        spec.out = self.out;
        spec.seed = self.seed;
        spec.r0 = self.r0;
        spec.force = self.force;
        spec.monotonicity_check = self.monotonicity_check;
        spec.gaussian_n = self.gaussian_n;
        spec.gaussian_m = self.gaussian_m;
        spec
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            // Help and version displays are successes; anything else is an
            // input error. Exit code 2 is reserved for tolerance-not-met.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    let Command::Run(args) = cli.command;
    match run(&args.into_spec()) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

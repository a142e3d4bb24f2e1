use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use wishart_hs::analytic::{SpectrumSummary, DEFAULT_GRID_POINTS};
use wishart_hs::figures::{DEFAULT_SEED, KICKED_TOP_SAMPLES};
use wishart_hs::kickedtop::KickForm;
use wishart_hs::montecarlo::DEFAULT_TRIALS;
use wishart_hs::{
    DensityMatrix, EnsembleParams, ExperimentKind, ExperimentSpec, FixedMatrix, KickedTopConfig, Spin,
};

mod config;
mod error;
mod output;
mod reproduce;

use config::{Command, EigDensityParams, Equation, Format, FormulaParams, KickedTopParams, RunConfig, Spacing};
use error::CliError;
use reproduce::{Figure, ReproduceParams};

/// Hilbert-Schmidt distance statistics of Wishart matrices, random density
/// matrices, and coupled kicked tops.
#[derive(Parser, Debug)]
#[command(name = "wishart-hs", version)]
struct Cli {
    /// Directory that relative output paths resolve against.
    #[arg(long, global = true, env = "WISHART_HS_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Evaluate a closed-form mean.
    Formula(FormulaArgs),
    /// Monte Carlo estimate of a mean, compared against its closed form.
    Mc(McArgs),
    /// Tabulate the single-eigenvalue density of random density matrices.
    Eigdensity(EigArgs),
    /// Coupled kicked-top distance statistics.
    Kickedtop(KickArgs),
    /// Regenerate every figure and table into the output directory.
    Reproduce(ReproduceArgs),
    /// Re-run a saved config (bare or embedded in a JSON artifact).
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct FormulaArgs {
    #[arg(long, value_enum)]
    eq: Equation,
    #[arg(long, default_value_t = 2)]
    beta: u8,
    #[arg(long)]
    n: usize,
    #[arg(long, visible_alias = "m1")]
    m: usize,
    #[arg(long)]
    m2: Option<usize>,
    /// Preset fixed matrix (reference-x2, reference-x5, maximally-mixed, pure, identity, zero).
    #[arg(long, conflicts_with_all = ["trace_x", "trace_x2"])]
    fixed: Option<String>,
    #[arg(long, requires = "trace_x2")]
    trace_x: Option<f64>,
    #[arg(long, requires = "trace_x")]
    trace_x2: Option<f64>,
    #[arg(long, conflicts_with = "fixed")]
    purity_sigma: Option<f64>,
    /// Also write an artifact here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long, value_parser = kebab::<ExperimentKind>)]
    kind: ExperimentKind,
    #[arg(long, default_value_t = 2)]
    beta: u8,
    #[arg(long)]
    n: usize,
    #[arg(long, visible_alias = "m1")]
    m: usize,
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    bins: Option<usize>,
    /// Fixed matrix preset; defaults to the reference matrix (Wishart) or I/n (density matrix).
    #[arg(long)]
    fixed: Option<String>,
    #[arg(long, default_value = "mc.csv")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct EigArgs {
    #[arg(long, default_value_t = 2)]
    beta: u8,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Equidistributed)]
    spacing: Spacing,
    #[arg(long, default_value = "eigdensity.csv")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct KickArgs {
    #[arg(long, value_parser = spin)]
    j1: Spin,
    #[arg(long, value_parser = spin)]
    j2: Spin,
    #[arg(long)]
    k1: f64,
    #[arg(long)]
    k2: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = KICKED_TOP_SAMPLES)]
    samples: usize,
    #[arg(long)]
    transient: Option<u64>,
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    phi1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    #[arg(long)]
    phi2: Option<f64>,
    #[arg(long, value_parser = kebab::<KickForm>)]
    kick_form: Option<KickForm>,
    /// Compare against a fixed state (preset name).
    #[arg(long)]
    sigma: Option<String>,
    /// Second top B; unset values are copied from A.
    #[arg(long, value_parser = spin)]
    b_j1: Option<Spin>,
    #[arg(long, value_parser = spin)]
    b_j2: Option<Spin>,
    #[arg(long)]
    b_k1: Option<f64>,
    #[arg(long)]
    b_k2: Option<f64>,
    #[arg(long)]
    b_epsilon: Option<f64>,
    /// Pair states from one trajectory this many iterations apart.
    #[arg(long)]
    single_run_separation: Option<u64>,
    /// Write every retained reduced state of top A here.
    #[arg(long)]
    export_states: Option<PathBuf>,
    #[arg(long, default_value = "kickedtop.csv")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// Restrict to these figures (repeatable); all when absent.
    #[arg(long, value_enum)]
    figure: Vec<Figure>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Kicked-top samples per run.
    #[arg(long, default_value_t = KICKED_TOP_SAMPLES)]
    samples: usize,
    #[arg(long)]
    skip_dynamics: bool,
    /// Bundle directory, relative to --out-dir.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the saved output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn spin(s: &str) -> Result<Spin, String> {
    let j = match s.split_once('/') {
        Some((a, "2")) => a.trim().parse::<f64>().map(|x| x / 2.0),
        Some(_) => return Err(format!("{s} is not a spin")),
        None => s.trim().parse::<f64>(),
    }
    .map_err(|e| e.to_string())?;
    Spin::new(j).map_err(|e| e.to_string())
}

fn resolve(out_dir: &Path, p: &Path) -> PathBuf {
    out_dir.join(p)
}

fn preset(name: &str, beta: u8, n: usize) -> Result<wishart_hs::HermitianMatrix, CliError> {
    config::preset_matrix(name, beta, n)
}

fn build(cli: Cli) -> Result<RunConfig, CliError> {
    let dir = cli.out_dir;
    let format = cli.format;
    let cfg = |command, output_path| RunConfig { command, output_path, format };
    Ok(match cli.command {
        Sub::Formula(a) => {
            let mut spectrum = a.trace_x.zip(a.trace_x2).map(|(t, t2)| SpectrumSummary::new(t, t2));
            let mut purity_sigma = a.purity_sigma;
            if let Some(name) = &a.fixed {
                let x = preset(name, a.beta, a.n)?;
                if a.eq == Equation::D2RhoFixed {
                    purity_sigma = Some(DensityMatrix::new(x.clone())?.purity());
                }
                spectrum = Some(SpectrumSummary::of(&x));
            }
            let p = FormulaParams { eq: a.eq, beta: a.beta, n: a.n, m1: a.m, m2: a.m2, spectrum, purity_sigma };
            cfg(Command::Formula(p), a.output.map(|o| resolve(&dir, &o)))
        }
        Sub::Mc(a) => {
            let p1 = EnsembleParams::new(a.beta, a.n, a.m)?;
            let mut spec = ExperimentSpec::new(a.kind, p1, a.trials, a.seed);
            if a.kind.is_pair() {
                let m2 = a.m2.ok_or_else(|| CliError::Usage("pair kinds need --m2".into()))?;
                spec = spec.with_pair(EnsembleParams::new(a.beta, a.n, m2)?);
            }
            if a.kind.needs_fixed() {
                let x = match (&a.fixed, a.kind) {
                    (Some(name), _) => preset(name, a.beta, a.n)?,
                    (None, ExperimentKind::RhoVsFixed) => FixedMatrix::MaximallyMixed.build(p1.beta(), a.n)?,
                    (None, _) => FixedMatrix::reference_for(a.n)
                        .ok_or_else(|| CliError::Usage(format!("no reference matrix for n = {}; pass --fixed", a.n)))?
                        .build(p1.beta(), a.n)?,
                };
                spec = spec.with_fixed(x);
            }
            if let Some(b) = a.bins {
                spec = spec.with_bins(b);
            }
            cfg(Command::Mc(spec), Some(resolve(&dir, &a.output)))
        }
        Sub::Eigdensity(a) => {
            let p = EigDensityParams { params: EnsembleParams::new(a.beta, a.n, a.m)?, grid: a.grid, spacing: a.spacing };
            cfg(Command::Eigdensity(p), Some(resolve(&dir, &a.output)))
        }
        Sub::Kickedtop(a) => {
            let mut top = KickedTopConfig::new(a.j1, a.j2, a.k1, a.k2, a.epsilon, a.samples);
            if let Some(v) = a.transient {
                top.transient = v;
            }
            if let Some(v) = a.stride {
                top.stride = v;
            }
            top.initial_theta1 = a.theta1.unwrap_or(top.initial_theta1);
            top.initial_phi1 = a.phi1.unwrap_or(top.initial_phi1);
            top.initial_theta2 = a.theta2.unwrap_or(top.initial_theta2);
            top.initial_phi2 = a.phi2.unwrap_or(top.initial_phi2);
            top.kick_form = a.kick_form.unwrap_or(top.kick_form);
            let wants_b = a.b_j1.is_some() || a.b_j2.is_some() || a.b_k1.is_some() || a.b_k2.is_some() || a.b_epsilon.is_some();
            let b = wants_b.then(|| {
                let mut b = top.clone();
                b.j1 = a.b_j1.unwrap_or(b.j1);
                b.j2 = a.b_j2.unwrap_or(b.j2);
                b.k1 = a.b_k1.unwrap_or(b.k1);
                b.k2 = a.b_k2.unwrap_or(b.k2);
                b.epsilon = a.b_epsilon.unwrap_or(b.epsilon);
                b
            });
            let sigma = match &a.sigma {
                Some(name) => Some(preset(name, 2, top.n())?),
                None => None,
            };
            let p = KickedTopParams {
                a: top,
                b,
                sigma,
                single_run_separation: a.single_run_separation,
                export_states: a.export_states.map(|e| resolve(&dir, &e)),
            };
            cfg(Command::Kickedtop(p), Some(resolve(&dir, &a.output)))
        }
        Sub::Reproduce(a) => {
            let p = ReproduceParams {
                figures: a.figure,
                trials: a.trials,
                seed: a.seed,
                samples: a.samples,
                skip_dynamics: a.skip_dynamics,
            };
            let out = a.output.map_or(dir.clone(), |o| resolve(&dir, &o));
            cfg(Command::Reproduce(p), Some(out))
        }
        Sub::Run(a) => {
            let text = std::fs::read_to_string(&a.config)
                .map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
            let mut saved = RunConfig::from_json(&text)?;
            if let Some(o) = a.output {
                saved.output_path = Some(resolve(&dir, &o));
            }
            saved
        }
    })
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_env("WISHART_HS_LOG").init();

    match build(cli).and_then(|cfg| config::execute(&cfg)) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

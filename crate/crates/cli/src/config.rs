//! Resolved run configurations and their execution. Every artifact embeds
//! the `RunConfig` that produced it; feeding that back through `run`
//! reproduces the numbers exactly.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use wishart_hs::analytic::{
    d2_rho_fixed, d2_rho_pair, d2_wishart_fixed, d2_wishart_pair, log_norm_constants, mean_purity, mean_tr_w2,
    mean_tr_wx, DensityCurve, EigenvalueDensity, SpectrumSummary,
};
use wishart_hs::kickedtop::{
    evolve_and_collect, kicked_top_distance_report, single_run_pair_report, KickedTopConfig, KickedTopReport,
};
use wishart_hs::montecarlo::{compare, run_experiment, ComparisonReport, ExperimentOutcome};
use wishart_hs::{Beta, DensityMatrix, EnsembleParams, ExperimentSpec, FixedMatrix, HermitianMatrix};

use crate::error::{finite, CliError};
use crate::output::{fmt_f64, fmt_opt, fmt_opt_usize, write_artifact_json, write_csv_artifact};
use crate::reproduce::{reproduce, ReproduceParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    D2WishartFixed,
    D2WishartPair,
    D2RhoFixed,
    D2RhoPair,
    MeanPurity,
    MeanTrW2,
    MeanTrWx,
    LogC,
    LogCFixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaParams {
    pub eq: Equation,
    pub beta: u8,
    pub n: usize,
    pub m1: usize,
    #[serde(default)]
    pub m2: Option<usize>,
    /// `(tr X, tr X²)` for the Wishart forms.
    #[serde(default)]
    pub spectrum: Option<SpectrumSummary>,
    /// `tr σ²` for the fixed density-matrix form.
    #[serde(default)]
    pub purity_sigma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigDensityParams {
    pub params: EnsembleParams,
    pub grid: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Uniform,
    /// Placed for trapezoid accuracy; resolves the hard edge at large n.
    #[default]
    Equidistributed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickedTopParams {
    pub a: KickedTopConfig,
    #[serde(default)]
    pub b: Option<KickedTopConfig>,
    #[serde(default)]
    pub sigma: Option<HermitianMatrix>,
    /// Pair both states from one trajectory, this many iterations apart.
    #[serde(default)]
    pub single_run_separation: Option<u64>,
    #[serde(default)]
    pub export_states: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Command {
    Formula(FormulaParams),
    Mc(ExperimentSpec),
    Eigdensity(EigDensityParams),
    Kickedtop(KickedTopParams),
    Reproduce(ReproduceParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    /// `None` prints to standard output (formula only).
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Reads a bare config or the `config` member of an artifact.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not JSON: {e}")))?;
        let cfg = match value.get("config") {
            Some(inner) if value.get("provenance").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(cfg).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Formula(_) => "formula",
            Command::Mc(_) => "mc",
            Command::Eigdensity(_) => "eigdensity",
            Command::Kickedtop(_) => "kickedtop",
            Command::Reproduce(_) => "reproduce",
        }
    }
}

/// Runs `cfg`, writes its artifacts, and returns what should be printed.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    match &cfg.command {
        Command::Formula(p) => formula(cfg, p),
        Command::Mc(spec) => mc(cfg, spec),
        Command::Eigdensity(p) => eigdensity(cfg, p),
        Command::Kickedtop(p) => kickedtop(cfg, p),
        Command::Reproduce(p) => reproduce(cfg, p),
    }
}

fn output_path(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.output_path.as_deref().ok_or_else(|| CliError::Usage(format!("{} needs an output path", cfg.name())))
}

fn validate_output(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(p) = &cfg.output_path {
        crate::output::ensure_writable(p)?;
    }
    Ok(())
}

pub fn evaluate_formula(p: &FormulaParams) -> Result<f64, CliError> {
    let beta = Beta::try_from(p.beta)?;
    let params = EnsembleParams::with_beta(beta, p.n, p.m1)?;
    let need_m2 = || p.m2.ok_or_else(|| CliError::Usage(format!("{:?} needs m2", p.eq)));
    let need_spectrum = || p.spectrum.ok_or_else(|| CliError::Usage(format!("{:?} needs a fixed matrix", p.eq)));
    let v = match p.eq {
        Equation::D2WishartFixed => d2_wishart_fixed(&params, &need_spectrum()?),
        Equation::D2WishartPair => d2_wishart_pair(beta, p.n, p.m1, need_m2()?)?,
        Equation::D2RhoFixed => {
            let purity = p.purity_sigma.ok_or_else(|| CliError::Usage("d2-rho-fixed needs tr σ²".into()))?;
            d2_rho_fixed(&params, purity)?
        }
        Equation::D2RhoPair => d2_rho_pair(beta, p.n, p.m1, need_m2()?)?,
        Equation::MeanPurity => mean_purity(&params),
        Equation::MeanTrW2 => mean_tr_w2(&params),
        Equation::MeanTrWx => mean_tr_wx(&params, &need_spectrum()?),
        Equation::LogC => log_norm_constants(&params).log_c,
        Equation::LogCFixed => log_norm_constants(&params).log_c_fixed,
    };
    finite("formula", v)
}

fn formula(cfg: &RunConfig, p: &FormulaParams) -> Result<String, CliError> {
    validate_output(cfg)?;
    let value = evaluate_formula(p)?;
    if let Some(path) = &cfg.output_path {
        match cfg.format {
            Format::Json => write_artifact_json(path, cfg, &json!({ "value": value }))?,
            Format::Csv => write_csv_artifact(path, &["eq", "value"], &[vec![eq_name(p.eq), fmt_f64(value)]], cfg, Value::Null)?,
        };
    }
    Ok(match cfg.format {
        Format::Csv => value.to_string(),
        Format::Json => serde_json::to_string(&json!({ "value": value })).unwrap(),
    })
}

fn eq_name(eq: Equation) -> String {
    eq.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct McResults<'a> {
    outcome: &'a ExperimentOutcome,
    comparison: &'a ComparisonReport,
}

pub const MC_HEADER: [&str; 12] =
    ["kind", "beta", "n", "m1", "m2", "trials", "seed", "analytic", "empirical", "std_error", "z", "rel_diff_percent"];
pub const HISTOGRAM_HEADER: [&str; 5] = ["bin_lo", "bin_hi", "count", "density", "analytic"];

fn mc(cfg: &RunConfig, spec: &ExperimentSpec) -> Result<String, CliError> {
    spec.validate()?;
    let path = output_path(cfg)?;
    validate_output(cfg)?;
    let analytic = spec.analytic()?;
    let outcome = run_experiment(spec)?;
    finite("empirical mean", outcome.stat.mean)?;
    let report = compare(outcome.stat, analytic)?;
    match cfg.format {
        Format::Json => {
            write_artifact_json(path, cfg, &McResults { outcome: &outcome, comparison: &report })?;
        }
        Format::Csv => {
            let kind = serde_json::to_value(spec.kind).unwrap().as_str().unwrap_or_default().to_string();
            let row = vec![
                kind,
                spec.params1.beta().as_u8().to_string(),
                spec.params1.n().to_string(),
                spec.params1.m().to_string(),
                fmt_opt_usize(spec.params2.map(|p| p.m())),
                spec.trials.to_string(),
                spec.seed.to_string(),
                fmt_f64(report.analytic),
                fmt_f64(report.empirical.mean),
                fmt_f64(report.empirical.std_error),
                fmt_f64(report.z_score),
                fmt_opt(report.relative_diff_percent),
            ];
            write_csv_artifact(path, &MC_HEADER, &[row], cfg, Value::Null)?;
            if let Some(h) = &outcome.histogram {
                let density = EigenvalueDensity::new(&spec.params1)?;
                let avg = h.analytic_bin_averages(&density);
                let rows: Vec<Vec<String>> = (0..h.bins())
                    .map(|b| {
                        vec![
                            fmt_f64(b as f64 * h.width()),
                            fmt_f64((b + 1) as f64 * h.width()),
                            h.counts[b].to_string(),
                            fmt_f64(h.densities()[b]),
                            fmt_f64(avg[b]),
                        ]
                    })
                    .collect();
                let hist_path = sibling(path, "histogram");
                write_csv_artifact(&hist_path, &HISTOGRAM_HEADER, &rows, cfg, json!({ "l1_distance": h.l1_distance(&density) }))?;
            }
        }
    }
    Ok(format!(
        "analytic {} empirical {} ± {} (z = {:.3})",
        report.analytic, report.empirical.mean, report.empirical.std_error, report.z_score
    ))
}

/// `dir/stem_suffix.ext`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

pub const CURVE_HEADER: [&str; 2] = ["mu", "density"];

#[derive(Serialize)]
struct CurveResults<'a> {
    curve: &'a DensityCurve,
    trapezoid_integral: f64,
    trapezoid_first_moment: f64,
    quadrature_integral: f64,
    quadrature_first_moment: f64,
}

fn eigdensity(cfg: &RunConfig, p: &EigDensityParams) -> Result<String, CliError> {
    let path = output_path(cfg)?;
    validate_output(cfg)?;
    let density = EigenvalueDensity::new(&p.params)?;
    let curve = match p.spacing {
        Spacing::Uniform => density.curve(p.grid)?,
        Spacing::Equidistributed => density.curve_equidistributed(p.grid)?,
    };
    let results = CurveResults {
        curve: &curve,
        trapezoid_integral: curve.integral(),
        trapezoid_first_moment: curve.first_moment(),
        quadrature_integral: density.moment(0),
        quadrature_first_moment: density.moment(1),
    };
    finite("density integral", results.quadrature_integral)?;
    match cfg.format {
        Format::Json => {
            write_artifact_json(path, cfg, &results)?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                curve.abscissae.iter().zip(&curve.ordinates).map(|(x, y)| vec![fmt_f64(*x), fmt_f64(*y)]).collect();
            let extra = json!({
                "trapezoid_integral": results.trapezoid_integral,
                "trapezoid_first_moment": results.trapezoid_first_moment,
                "quadrature_integral": results.quadrature_integral,
                "quadrature_first_moment": results.quadrature_first_moment,
            });
            write_csv_artifact(path, &CURVE_HEADER, &rows, cfg, extra)?;
        }
    }
    Ok(format!(
        "{} points, trapezoid integral {}, quadrature integral {}",
        curve.len(),
        results.trapezoid_integral,
        results.quadrature_integral
    ))
}

pub const KICKEDTOP_HEADER: [&str; 11] =
    ["mode", "n", "m1", "m2", "samples", "analytic", "empirical", "std_error", "z", "rel_diff_percent", "mean_purity"];
pub const STATES_HEADER: [&str; 5] = ["sample", "row", "col", "re", "im"];

fn kickedtop(cfg: &RunConfig, p: &KickedTopParams) -> Result<String, CliError> {
    let path = output_path(cfg)?;
    validate_output(cfg)?;
    if let Some(states) = &p.export_states {
        crate::output::ensure_writable(states)?;
    }
    let (mode, m2, report): (&str, Option<usize>, KickedTopReport) = match (&p.b, &p.sigma, p.single_run_separation) {
        (None, Some(sigma), None) => {
            let sigma = DensityMatrix::new(sigma.clone())?;
            ("fixed", None, kicked_top_distance_report(&p.a, None, Some(&sigma))?)
        }
        (Some(b), None, None) => ("pair", Some(b.m()), kicked_top_distance_report(&p.a, Some(b), None)?),
        (None, None, Some(sep)) => ("single-run-pair", Some(p.a.m()), single_run_pair_report(&p.a, sep)?),
        _ => {
            return Err(CliError::Usage(
                "choose exactly one of: a fixed sigma, a second top, or a single-run separation".into(),
            ))
        }
    };
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let c = &report.comparison;
    finite("kicked-top mean", c.empirical.mean)?;
    match cfg.format {
        Format::Json => {
            write_artifact_json(path, cfg, &report)?;
        }
        Format::Csv => {
            let row = vec![
                mode.to_string(),
                p.a.n().to_string(),
                p.a.m().to_string(),
                fmt_opt_usize(m2),
                c.empirical.count.to_string(),
                fmt_f64(c.analytic),
                fmt_f64(c.empirical.mean),
                fmt_f64(c.empirical.std_error),
                fmt_f64(c.z_score),
                fmt_opt(c.relative_diff_percent),
                fmt_f64(report.mean_purity),
            ];
            write_csv_artifact(path, &KICKEDTOP_HEADER, &[row], cfg, json!({ "warnings": report.warnings }))?;
        }
    }
    if let Some(states) = &p.export_states {
        let mut rows = Vec::with_capacity(p.a.samples * p.a.n() * p.a.n());
        for (s, rho) in evolve_and_collect(&p.a)?.enumerate() {
            let m = rho.as_hermitian().as_matrix();
            for r in 0..m.rows() {
                for col in 0..m.cols() {
                    let z = m[(r, col)];
                    rows.push(vec![s.to_string(), r.to_string(), col.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
                }
            }
        }
        write_csv_artifact(states, &STATES_HEADER, &rows, cfg, json!({ "top": "a" }))?;
    }
    Ok(format!(
        "{mode}: analytic {} empirical {} ({:+.3}%)",
        c.analytic,
        c.empirical.mean,
        c.relative_diff_percent.unwrap_or(f64::NAN)
    ))
}

/// Resolves a preset name for the formula and Monte Carlo front ends.
pub fn preset_matrix(name: &str, beta: u8, n: usize) -> Result<HermitianMatrix, CliError> {
    let preset: FixedMatrix = name.parse()?;
    Ok(preset.build(Beta::try_from(beta)?, n)?)
}

//! End-to-end regeneration of every figure and table into one directory,
//! plus `summary.json` with a pass/fail line per acceptance criterion.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use statrs::function::gamma::ln_gamma;
use wishart_hs::analytic::{d2_rho_pair, log_norm_constants, EigenvalueDensity, DEFAULT_GRID_POINTS};
use wishart_hs::figures::{
    fig5, fig6, fig7, run_mc_grid, table1, KickedTopCell, McCell, McGrid, DEFAULT_SEED, FIG5_BINS, KICKED_TOP_MS,
    KICKED_TOP_N, KICKED_TOP_SAMPLES,
};
use wishart_hs::montecarlo::{run_experiment, DEFAULT_TRIALS};
use wishart_hs::{Beta, EnsembleParams, ExperimentKind, ExperimentSpec};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, fmt_opt_usize, write_artifact_json, write_csv_artifact};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    #[value(name = "1")]
    #[serde(rename = "1")]
    Fig1,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Fig2,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Fig3,
    #[value(name = "4")]
    #[serde(rename = "4")]
    Fig4,
    #[value(name = "5")]
    #[serde(rename = "5")]
    Fig5,
    #[value(name = "6")]
    #[serde(rename = "6")]
    Fig6,
    #[value(name = "7")]
    #[serde(rename = "7")]
    Fig7,
    Purity,
    Table1,
}

impl Figure {
    pub const ALL: [Figure; 9] = [
        Figure::Fig1,
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Purity,
        Figure::Table1,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
    ];

    pub fn is_dynamics(self) -> bool {
        matches!(self, Figure::Fig5 | Figure::Fig6 | Figure::Fig7)
    }

    fn grid(self) -> Option<McGrid> {
        match self {
            Figure::Fig1 => Some(McGrid::Fig1),
            Figure::Fig2 => Some(McGrid::Fig2),
            Figure::Fig3 => Some(McGrid::Fig3),
            Figure::Fig4 => Some(McGrid::Fig4),
            Figure::Purity => Some(McGrid::Purity),
            _ => None,
        }
    }

    fn file_stem(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Purity => "purity",
            Figure::Table1 => "table1",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceParams {
    /// Empty means all.
    #[serde(default)]
    pub figures: Vec<Figure>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub skip_dynamics: bool,
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_samples() -> usize {
    KICKED_TOP_SAMPLES
}

impl ReproduceParams {
    pub fn selected(&self) -> Vec<Figure> {
        let base: Vec<Figure> = if self.figures.is_empty() { Figure::ALL.to_vec() } else { self.figures.clone() };
        let mut out: Vec<Figure> = base.into_iter().filter(|f| !(self.skip_dynamics && f.is_dynamics())).collect();
        out.sort();
        out.dedup();
        out
    }
}

pub const MC_HEADER: [&str; 7] = ["beta", "n", "m", "analytic", "empirical", "std_error", "z"];
pub const MC_PAIR_HEADER: [&str; 8] = ["beta", "n", "m1", "m2", "analytic", "empirical", "std_error", "z"];
pub const FIG5_HEADER: [&str; 6] = ["m", "bin_lo", "bin_hi", "count", "density", "analytic"];
pub const FIG5_CURVE_HEADER: [&str; 3] = ["m", "mu", "density"];
pub const FIG6_HEADER: [&str; 8] = ["label", "n", "m", "analytic", "empirical", "std_error", "rel_diff_percent", "mean_purity"];
pub const FIG7_HEADER: [&str; 9] =
    ["label", "n", "m1", "m2", "analytic", "empirical", "std_error", "rel_diff_percent", "mean_purity"];
pub const TABLE1_HEADER: [&str; 8] = ["matrices", "expression", "beta", "n", "m1", "m2", "fixed", "value"];

const Z_LIMIT: f64 = 4.0;
const REL_LIMIT_PERCENT: f64 = 1.0;

#[derive(Clone, Debug, Serialize)]
struct Check {
    criterion: Option<u8>,
    name: String,
    status: &'static str,
    detail: String,
}

impl Check {
    fn new(criterion: Option<u8>, name: &str, pass: bool, detail: String) -> Self {
        Check { criterion, name: name.into(), status: if pass { "pass" } else { "fail" }, detail }
    }
}

#[derive(Default)]
struct Bundle {
    checks: Vec<Check>,
    comparisons: Vec<Value>,
    failures: Vec<Value>,
    files: BTreeMap<String, String>,
}

impl Bundle {
    fn fail(&mut self, what: &str, e: CliError) {
        log::error!("{what}: {}", e.message());
        self.failures.push(json!({ "run": what, "kind": e.kind(), "message": e.message() }));
        self.checks.push(Check { criterion: None, name: what.into(), status: "error", detail: e.message().into() });
    }

    fn record(&mut self, name: String, sha: String) {
        self.files.insert(name, sha);
    }
}

struct Emitter<'a> {
    dir: &'a Path,
    cfg: &'a RunConfig,
    format: Format,
}

impl Emitter<'_> {
    fn emit(
        &self,
        bundle: &mut Bundle,
        stem: &str,
        header: &[&str],
        rows: Vec<Vec<String>>,
        results: impl Serialize,
    ) -> Result<(), CliError> {
        let name = format!("{stem}.{}", self.format.extension());
        let path = self.dir.join(&name);
        let sha = match self.format {
            Format::Csv => write_csv_artifact(&path, header, &rows, self.cfg, Value::Null)?,
            Format::Json => write_artifact_json(&path, self.cfg, &results)?,
        };
        bundle.record(name, sha);
        Ok(())
    }
}

pub fn reproduce(cfg: &RunConfig, p: &ReproduceParams) -> Result<String, CliError> {
    if p.trials < 2 || p.samples < 2 {
        return Err(CliError::Usage("reproduce needs at least 2 trials and 2 samples".into()));
    }
    let dir = cfg.output_path.as_deref().ok_or_else(|| CliError::Usage("reproduce needs an output directory".into()))?;
    crate::output::ensure_writable(&dir.join("summary.json"))?;
    let em = Emitter { dir, cfg, format: cfg.format };
    let mut bundle = Bundle::default();

    for fig in p.selected() {
        let started = Instant::now();
        let res = match fig.grid() {
            Some(grid) => mc_figure(&em, &mut bundle, fig, grid, p),
            None => match fig {
                Figure::Table1 => table(&em, &mut bundle),
                Figure::Fig5 => figure5(&em, &mut bundle, p),
                Figure::Fig6 => figure6(&em, &mut bundle, p),
                Figure::Fig7 => figure7(&em, &mut bundle, p),
                _ => unreachable!(),
            },
        };
        if let Err(e) = res {
            bundle.fail(fig.file_stem(), e);
        }
        log::info!("{} done in {:.1}s", fig.file_stem(), started.elapsed().as_secs_f64());
    }
    for (name, res) in [
        ("eigenvalue-density", density_checks(p.seed)),
        ("normalization-constants", constant_check()),
        ("asymptotics", asymptotic_check()),
    ] {
        match res {
            Ok(c) => bundle.checks.push(c),
            Err(e) => bundle.fail(name, e),
        }
    }
    bundle.checks.sort_by_key(|c| c.criterion.unwrap_or(u8::MAX));

    let passed = bundle.checks.iter().filter(|c| c.status == "pass").count();
    let total = bundle.checks.len();
    let results = json!({
        "checks": bundle.checks,
        "comparisons": bundle.comparisons,
        "failures": bundle.failures,
        "files": bundle.files,
    });
    write_artifact_json(&dir.join("summary.json"), cfg, &results)?;
    if !bundle.failures.is_empty() {
        return Err(CliError::Failure(format!(
            "{} sub-run(s) failed; see {}",
            bundle.failures.len(),
            dir.join("summary.json").display()
        )));
    }
    Ok(format!("{passed}/{total} checks passed; bundle in {}", dir.display()))
}

fn mc_figure(em: &Emitter, bundle: &mut Bundle, fig: Figure, grid: McGrid, p: &ReproduceParams) -> Result<(), CliError> {
    let cells = run_mc_grid(grid, p.trials, p.seed)?;
    let pair = grid.is_pair();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            let r = &c.report;
            let mut row = vec![c.beta.as_u8().to_string(), c.n.to_string(), c.m1.to_string()];
            if pair {
                row.push(fmt_opt_usize(c.m2));
            }
            row.extend([fmt_f64(r.analytic), fmt_f64(r.empirical.mean), fmt_f64(r.empirical.std_error), fmt_f64(r.z_score)]);
            row
        })
        .collect();
    let header: &[&str] = if pair { &MC_PAIR_HEADER } else { &MC_HEADER };
    em.emit(bundle, fig.file_stem(), header, rows, &cells)?;

    for c in &cells {
        bundle.comparisons.push(json!({
            "figure": fig.file_stem(),
            "beta": c.beta.as_u8(),
            "n": c.n,
            "m1": c.m1,
            "m2": c.m2,
            "seed": c.seed,
            "analytic": c.report.analytic,
            "empirical": c.report.empirical.mean,
            "std_error": c.report.empirical.std_error,
            "z": c.report.z_score,
        }));
    }
    let worst = cells.iter().map(|c| c.report.z_score.abs()).fold(0.0, f64::max);
    let mut pass = worst <= Z_LIMIT;
    let mut detail = format!("{} cells, max |z| {:.3}", cells.len(), worst);
    if let Some((spot, want)) = spot_value(fig, &cells) {
        pass &= (spot - want).abs() <= 1e-12;
        detail.push_str(&format!(", spot value {spot}"));
    }
    let criterion = match grid {
        McGrid::Fig1 => 1,
        McGrid::Fig2 => 2,
        McGrid::Fig3 => 3,
        McGrid::Fig4 => 4,
        McGrid::Purity => 5,
    };
    bundle.checks.push(Check::new(Some(criterion), fig.file_stem(), pass, detail));
    Ok(())
}

/// Closed-form value at the smallest complex cell, where one is known exactly.
fn spot_value(fig: Figure, cells: &[McCell]) -> Option<(f64, f64)> {
    let want = match fig {
        Figure::Fig3 => 0.3,
        Figure::Fig4 => 0.6,
        Figure::Purity => 0.8,
        _ => return None,
    };
    cells
        .iter()
        .find(|c| c.beta == Beta::Complex && c.n == 2 && c.m1 == 2 && c.m2.is_none_or(|m| m == 2))
        .map(|c| (c.report.analytic, want))
}

fn table(em: &Emitter, bundle: &mut Bundle) -> Result<(), CliError> {
    let rows = table1()?;
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.matrices.into(),
                r.expression.into(),
                r.beta.to_string(),
                r.n.to_string(),
                r.m1.to_string(),
                fmt_opt_usize(r.m2),
                r.fixed.unwrap_or_default().into(),
                fmt_f64(r.value),
            ]
        })
        .collect();
    em.emit(bundle, "table1", &TABLE1_HEADER, csv, &rows)?;
    let finite = rows.iter().all(|r| r.value.is_finite());
    bundle.checks.push(Check::new(None, "table1", finite && rows.len() == 4, format!("{} rows", rows.len())));
    Ok(())
}

fn figure5(em: &Emitter, bundle: &mut Bundle, p: &ReproduceParams) -> Result<(), CliError> {
    let panels = fig5(p.samples, FIG5_BINS, DEFAULT_GRID_POINTS)?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for panel in &panels {
        let h = &panel.histogram;
        let dens = h.densities();
        for (b, ((count, d), avg)) in h.counts.iter().zip(&dens).zip(&panel.analytic_bin_averages).enumerate() {
            rows.push(vec![
                panel.m.to_string(),
                fmt_f64(b as f64 * h.width()),
                fmt_f64((b + 1) as f64 * h.width()),
                count.to_string(),
                fmt_f64(*d),
                fmt_f64(*avg),
            ]);
        }
        for (x, y) in panel.curve.abscissae.iter().zip(&panel.curve.ordinates) {
            curves.push(vec![panel.m.to_string(), fmt_f64(*x), fmt_f64(*y)]);
        }
    }
    em.emit(bundle, "fig5", &FIG5_HEADER, rows, &panels)?;
    if em.format == Format::Csv {
        let path = em.dir.join("fig5_curves.csv");
        let sha = write_csv_artifact(&path, &FIG5_CURVE_HEADER, &curves, em.cfg, Value::Null)?;
        bundle.record("fig5_curves.csv".into(), sha);
    }
    let l1: Vec<String> = panels.iter().map(|p| format!("m={}: {:.4}", p.m, p.l1_distance)).collect();
    let pass = panels.iter().all(|p| p.l1_distance <= 0.05);
    bundle.checks.push(Check::new(None, "fig5", pass, format!("histogram L1 {}", l1.join(", "))));
    Ok(())
}

fn kicked_rows(cells: &[KickedTopCell], pair: bool) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            let r = &c.report.comparison;
            let mut row = vec![c.label.clone(), KICKED_TOP_N.to_string(), c.m1.to_string()];
            if pair {
                row.push(fmt_opt_usize(c.m2));
            }
            row.extend([
                fmt_f64(r.analytic),
                fmt_f64(r.empirical.mean),
                fmt_f64(r.empirical.std_error),
                fmt_opt(r.relative_diff_percent),
                fmt_f64(c.report.mean_purity),
            ]);
            row
        })
        .collect()
}

fn kicked_check(bundle: &mut Bundle, criterion: u8, name: &str, cells: &[KickedTopCell]) {
    let worst = cells.iter().map(|c| c.report.comparison.relative_diff_percent.map_or(f64::INFINITY, f64::abs)).fold(0.0, f64::max);
    let detail = format!("{} runs, max |relative difference| {:.3}%", cells.len(), worst);
    bundle.checks.push(Check::new(Some(criterion), name, worst < REL_LIMIT_PERCENT, detail));
}

fn figure6(em: &Emitter, bundle: &mut Bundle, p: &ReproduceParams) -> Result<(), CliError> {
    let cells = fig6(p.samples)?;
    em.emit(bundle, "fig6", &FIG6_HEADER, kicked_rows(&cells, false), &cells)?;
    kicked_check(bundle, 8, "fig6", &cells);
    Ok(())
}

fn figure7(em: &Emitter, bundle: &mut Bundle, p: &ReproduceParams) -> Result<(), CliError> {
    let cells = fig7(p.samples)?;
    em.emit(bundle, "fig7", &FIG7_HEADER, kicked_rows(&cells, true), &cells)?;
    kicked_check(bundle, 9, "fig7", &cells);
    Ok(())
}

/// Normalization and mean of `p(μ)` at `n = 25`, plus a sampled histogram.
fn density_checks(seed: u64) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for m in KICKED_TOP_MS {
        let d = EigenvalueDensity::new(&EnsembleParams::with_beta(Beta::Complex, KICKED_TOP_N, m)?)?;
        worst = worst.max((d.moment(0) - 1.0).abs()).max((d.moment(1) - 1.0 / KICKED_TOP_N as f64).abs());
    }
    let params = EnsembleParams::with_beta(Beta::Complex, KICKED_TOP_N, KICKED_TOP_MS[0])?;
    let spec = ExperimentSpec::new(ExperimentKind::EigDensityHistogram, params, 10_000, seed).with_bins(FIG5_BINS);
    let hist = run_experiment(&spec)?.histogram.ok_or_else(|| CliError::Failure("no histogram".into()))?;
    let l1 = hist.l1_distance(&EigenvalueDensity::new(&params)?);
    Ok(Check::new(
        Some(6),
        "eigenvalue-density",
        worst <= 1e-6 && l1 <= 0.05,
        format!("max moment error {worst:.2e}, sampled L1 {l1:.4}"),
    ))
}

fn constant_check() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for beta in [Beta::Real, Beta::Complex] {
        for n in [2usize, 5, 10, 25] {
            for m in [n, n + 3, 31.max(n)] {
                let p = EnsembleParams::with_beta(beta, n, m)?;
                let c = log_norm_constants(&p);
                let half = beta.value() * (n * m) as f64 / 2.0;
                let want = half * (2.0 / beta.value()).ln() + ln_gamma(half);
                worst = worst.max(((c.log_c_fixed - c.log_c) - want).abs() / want.abs().max(1.0));
            }
        }
    }
    Ok(Check::new(Some(7), "normalization-constants", worst <= 1e-10, format!("max relative log error {worst:.2e}")))
}

fn asymptotic_check() -> Result<Check, CliError> {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [50usize, 100, 200, 500] {
        let v = d2_rho_pair(Beta::Complex, n, n, n)?;
        let gap = (v - 2.0 / n as f64).abs() * (n * n) as f64;
        pass &= gap <= 4.0;
        detail.push(format!("n={n}: n²·gap {gap:.3}"));
    }
    Ok(Check::new(Some(10), "asymptotics", pass, detail.join(", ")))
}

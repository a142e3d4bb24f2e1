//! Parameter grids and drivers that regenerate the published comparison
//! figures and the formula summary table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    d2_rho_fixed, d2_rho_pair, d2_wishart_fixed, d2_wishart_pair, DensityCurve, EigenvalueDensity, SpectrumSummary,
};
use crate::ensembles::{Beta, DensityMatrix, EnsembleParams};
use crate::error::{Error, Result};
use crate::kickedtop::{evolve_and_collect, kicked_top_distance_report, KickedTopConfig, KickedTopReport, Spin};
use crate::montecarlo::{compare, run_experiment, ComparisonReport, ExperimentKind, ExperimentSpec, Histogram};
use crate::presets::FixedMatrix;

pub const DEFAULT_SEED: u64 = 1234;
/// Retained states per kicked-top run.
pub const KICKED_TOP_SAMPLES: usize = 5000;
pub const FIG5_BINS: usize = 50;
/// Reduced dimension used by every kicked-top figure (`j₁ = 12`).
pub const KICKED_TOP_N: usize = 25;
/// Environment dimensions swept by the kicked-top figures (`j₂ = 12..=15`).
pub const KICKED_TOP_MS: [usize; 4] = [25, 27, 29, 31];

/// The Monte Carlo comparison grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McGrid {
    /// Wishart vs the preset fixed matrix, `m = n..n+3`.
    Fig1,
    /// Wishart pairs, all `m₁ <= m₂` in `n..n+3`.
    Fig2,
    /// Density matrix vs `I/n`, `m = n..n+3`.
    Fig3,
    /// Density-matrix pairs, all `m₁ <= m₂` in `n..n+3`.
    Fig4,
    /// Purity, `m = n..n+3`.
    Purity,
}

impl McGrid {
    pub const ALL: [McGrid; 5] = [McGrid::Fig1, McGrid::Fig2, McGrid::Fig3, McGrid::Fig4, McGrid::Purity];

    pub fn name(self) -> &'static str {
        match self {
            McGrid::Fig1 => "fig1",
            McGrid::Fig2 => "fig2",
            McGrid::Fig3 => "fig3",
            McGrid::Fig4 => "fig4",
            McGrid::Purity => "purity",
        }
    }

    pub fn is_pair(self) -> bool {
        matches!(self, McGrid::Fig2 | McGrid::Fig4)
    }

    fn kind(self) -> ExperimentKind {
        match self {
            McGrid::Fig1 => ExperimentKind::WishartVsFixed,
            McGrid::Fig2 => ExperimentKind::WishartPair,
            McGrid::Fig3 => ExperimentKind::RhoVsFixed,
            McGrid::Fig4 => ExperimentKind::RhoPair,
            McGrid::Purity => ExperimentKind::Purity,
        }
    }

    /// `(β, n, m₁, m₂)` cells; `m₂` is `None` for single-ensemble grids.
    pub fn cells(self) -> Vec<(Beta, usize, usize, Option<usize>)> {
        let mut out = Vec::new();
        for beta in [Beta::Real, Beta::Complex] {
            for n in [2usize, 5] {
                for m1 in n..n + 4 {
                    if self.is_pair() {
                        out.extend((m1..n + 4).map(|m2| (beta, n, m1, Some(m2))));
                    } else {
                        out.push((beta, n, m1, None));
                    }
                }
            }
        }
        out
    }

    pub fn specs(self, trials: u64, seed: u64) -> Result<Vec<ExperimentSpec>> {
        self.cells()
            .into_iter()
            .enumerate()
            .map(|(i, (beta, n, m1, m2))| {
                let p1 = EnsembleParams::with_beta(beta, n, m1)?;
                let spec = ExperimentSpec::new(self.kind(), p1, trials, cell_seed(seed, self as u64, i as u64));
                Ok(match self {
                    McGrid::Fig1 => {
                        let preset = FixedMatrix::reference_for(n).expect("grid uses n = 2, 5");
                        spec.with_fixed(preset.build(beta, n)?)
                    }
                    McGrid::Fig3 => spec.with_fixed(DensityMatrix::maximally_mixed(n).into_hermitian()),
                    McGrid::Fig2 | McGrid::Fig4 => spec.with_pair(EnsembleParams::with_beta(beta, n, m2.unwrap())?),
                    McGrid::Purity => spec,
                })
            })
            .collect()
    }
}

impl std::str::FromStr for McGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        McGrid::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::SpecError(format!("unknown grid {s:?}")))
    }
}

/// SplitMix64 finalizer over `(seed, grid, cell)`, so cells draw from
/// unrelated seed families.
fn cell_seed(seed: u64, grid: u64, cell: u64) -> u64 {
    let mut z = seed ^ grid.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ cell.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub beta: Beta,
    pub n: usize,
    pub m1: usize,
    pub m2: Option<usize>,
    pub seed: u64,
    pub report: ComparisonReport,
}

pub fn run_mc_grid(grid: McGrid, trials: u64, seed: u64) -> Result<Vec<McCell>> {
    grid.specs(trials, seed)?
        .iter()
        .map(|spec| {
            let analytic = spec.analytic()?;
            let report = compare(run_experiment(spec)?.stat, analytic)?;
            Ok(McCell {
                beta: spec.params1.beta(),
                n: spec.params1.n(),
                m1: spec.params1.m(),
                m2: spec.params2.map(|p| p.m()),
                seed: spec.seed,
                report,
            })
        })
        .collect()
}

/// A named `(k₁, k₂, ε)` kicked-top setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KickSet {
    pub label: &'static str,
    pub k1: f64,
    pub k2: f64,
    pub epsilon: f64,
}

const fn ks(label: &'static str, k1: f64, k2: f64, epsilon: f64) -> KickSet {
    KickSet { label, k1, k2, epsilon }
}

pub const FIG5_SET: KickSet = ks("fig5", 7.0, 7.0, 1.0);
pub const FIG6_SETS: [KickSet; 3] = [ks("CKT I", 7.0, 8.0, 1.0), ks("CKT II", 6.0, 7.0, 0.75), ks("CKT III", 6.0, 9.0, 0.5)];
/// Top A and top B settings.
pub const FIG7_SETS: [(&str, KickSet, KickSet); 3] = [
    ("CKTP I", ks("A", 8.0, 7.0, 0.5), ks("B", 7.0, 8.0, 1.0)),
    ("CKTP II", ks("A", 6.0, 6.0, 0.8), ks("B", 7.0, 8.0, 0.75)),
    ("CKTP III", ks("A", 7.0, 7.0, 0.75), ks("B", 8.0, 8.0, 0.75)),
];
pub const FIG7_PAIRS: [(usize, usize); 5] = [(25, 25), (25, 27), (27, 29), (29, 31), (25, 31)];

/// Kicked-top configuration for `n = 25` and environment dimension `m`.
pub fn kicked_top_config(set: &KickSet, m: usize, samples: usize) -> Result<KickedTopConfig> {
    Ok(KickedTopConfig::new(
        Spin::from_dim(KICKED_TOP_N)?,
        Spin::from_dim(m)?,
        set.k1,
        set.k2,
        set.epsilon,
        samples,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Panel {
    pub m: usize,
    pub histogram: Histogram,
    pub analytic_bin_averages: Vec<f64>,
    pub l1_distance: f64,
    pub curve: DensityCurve,
}

/// Eigenvalue histograms of kicked-top reduced states against the analytic
/// density, one panel per environment dimension.
pub fn fig5(samples: usize, bins: usize, curve_points: usize) -> Result<Vec<Fig5Panel>> {
    KICKED_TOP_MS
        .par_iter()
        .map(|&m| {
            let cfg = kicked_top_config(&FIG5_SET, m, samples)?;
            let density = EigenvalueDensity::new(&cfg.target_params()?)?;
            let mut histogram = Histogram::new(bins);
            for rho in evolve_and_collect(&cfg)? {
                rho.eigenvalues()?.into_iter().for_each(|x| histogram.add(x));
            }
            Ok(Fig5Panel {
                m,
                analytic_bin_averages: histogram.analytic_bin_averages(&density),
                l1_distance: histogram.l1_distance(&density),
                curve: DensityCurve::uniform(&cfg.target_params()?, curve_points)?,
                histogram,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickedTopCell {
    pub label: String,
    pub m1: usize,
    pub m2: Option<usize>,
    pub report: KickedTopReport,
}

/// Single tops against `σ = I/25`.
pub fn fig6(samples: usize) -> Result<Vec<KickedTopCell>> {
    let sigma = DensityMatrix::maximally_mixed(KICKED_TOP_N);
    let jobs: Vec<(KickSet, usize)> =
        FIG6_SETS.iter().flat_map(|s| KICKED_TOP_MS.iter().map(move |&m| (*s, m))).collect();
    jobs.par_iter()
        .map(|(set, m)| {
            let cfg = kicked_top_config(set, *m, samples)?;
            let report = kicked_top_distance_report(&cfg, None, Some(&sigma))?;
            Ok(KickedTopCell { label: set.label.to_string(), m1: *m, m2: None, report })
        })
        .collect()
}

/// Independent top pairs `A`, `B`.
pub fn fig7(samples: usize) -> Result<Vec<KickedTopCell>> {
    let jobs: Vec<(&str, KickSet, KickSet, usize, usize)> = FIG7_SETS
        .iter()
        .flat_map(|(l, a, b)| FIG7_PAIRS.iter().map(move |&(m1, m2)| (*l, *a, *b, m1, m2)))
        .collect();
    jobs.par_iter()
        .map(|(label, a, b, m1, m2)| {
            let cfg_a = kicked_top_config(a, *m1, samples)?;
            let cfg_b = kicked_top_config(b, *m2, samples)?;
            let report = kicked_top_distance_report(&cfg_a, Some(&cfg_b), None)?;
            Ok(KickedTopCell { label: label.to_string(), m1: *m1, m2: Some(*m2), report })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub matrices: &'static str,
    pub expression: &'static str,
    pub beta: u8,
    pub n: usize,
    pub m1: usize,
    pub m2: Option<usize>,
    pub fixed: Option<&'static str>,
    pub value: f64,
}

/// The four closed forms evaluated at `β = 2, n = 2, m (= m₁) = 2, m₂ = 3`,
/// with `X` the 2x2 complex preset and `σ = I/2`.
pub fn table1() -> Result<Vec<TableRow>> {
    let (beta, n, m1, m2) = (Beta::Complex, 2usize, 2usize, 3usize);
    let p = EnsembleParams::with_beta(beta, n, m1)?;
    let x = FixedMatrix::ReferenceX2.build(beta, n)?;
    let sigma = DensityMatrix::maximally_mixed(n);
    let row = |matrices, expression, m2, fixed, value| TableRow {
        matrices,
        expression,
        beta: beta.as_u8(),
        n,
        m1,
        m2,
        fixed,
        value,
    };
    Ok(vec![
        row(
            "wishart-fixed",
            "n m (n + m + 2/beta - 1) + tr X^2 - 2 m tr X",
            None,
            Some("reference-x2"),
            d2_wishart_fixed(&p, &SpectrumSummary::of(&x)),
        ),
        row(
            "wishart-pair",
            "n [(m1 + m2)(n + 2/beta - 1) + (m1 - m2)^2]",
            Some(m2),
            None,
            d2_wishart_pair(beta, n, m1, m2)?,
        ),
        row(
            "rho-fixed",
            "tr sigma^2 + beta (n + m + 2/beta - 1)/(beta n m + 2) - 2/n",
            None,
            Some("maximally-mixed"),
            d2_rho_fixed(&p, sigma.purity())?,
        ),
        row(
            "rho-pair",
            "sum_{i=1,2} beta (n + m_i + 2/beta - 1)/(beta n m_i + 2) - 2/n",
            Some(m2),
            None,
            d2_rho_pair(beta, n, m1, m2)?,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(McGrid::Fig1.cells().len(), 16);
        assert_eq!(McGrid::Fig2.cells().len(), 40);
        assert_eq!(McGrid::Fig3.cells().len(), 16);
        assert_eq!(McGrid::Fig4.cells().len(), 40);
        for g in McGrid::ALL {
            assert_eq!(g.name().parse::<McGrid>().unwrap(), g);
            let specs = g.specs(10, 1).unwrap();
            specs.iter().for_each(|s| s.validate().unwrap());
            let mut seeds: Vec<u64> = specs.iter().map(|s| s.seed).collect();
            seeds.sort_unstable();
            seeds.dedup();
            assert_eq!(seeds.len(), specs.len());
        }
    }

    #[test]
    fn table_values() {
        let t = table1().unwrap();
        assert_eq!(t.len(), 4);
        // 16 + 24.25 - 2·2·1.5
        assert_eq!(t[0].value, 34.25);
        assert_eq!(t[1].value, 22.0);
        assert!((t[2].value - 0.3).abs() < 1e-15);
        // 0.8 + 2(5)/(14) - 1
        assert!((t[3].value - (0.8 + 5.0 / 7.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn small_grid_run_is_sane() {
        let cells = run_mc_grid(McGrid::Fig3, 2000, 3).unwrap();
        assert_eq!(cells.len(), 16);
        assert!(cells.iter().all(|c| c.report.z_score.abs() < 6.0));
    }
}

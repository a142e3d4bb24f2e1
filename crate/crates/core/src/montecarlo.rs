//! Seeded Monte Carlo estimation of mean-square distances and purity.
//!
//! Trial `i` of an experiment draws from `RngStream::for_trial(seed, i)`.
//! Trials run on the rayon pool, per-trial values are collected in trial
//! order, and the mean and variance use a fixed power-of-two pairwise
//! summation tree, so results are bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    d2_rho_fixed, d2_rho_pair, d2_wishart_fixed, d2_wishart_pair, mean_purity, EigenvalueDensity,
    SpectrumSummary,
};
use crate::ensembles::{sample_density_matrix, sample_wishart, DensityMatrix, EnsembleParams};
use crate::error::{Error, Result};
use crate::linalg::{hs_distance_sq_unchecked, HermitianMatrix};
use crate::rng::RngStream;

/// Default trial count.
pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// `tr(W - X)²` for a Wishart `W` and fixed Hermitian `X`.
    WishartVsFixed,
    /// `tr(W₁ - W₂)²` for independent Wishart matrices.
    WishartPair,
    /// `tr(ρ - σ)²` for a random density matrix and fixed `σ`.
    RhoVsFixed,
    /// `tr(ρ₁ - ρ₂)²` for independent random density matrices.
    RhoPair,
    /// `tr ρ²`.
    Purity,
    /// Eigenvalue histogram of random density matrices; the summary
    /// statistic is the purity.
    EigDensityHistogram,
}

impl ExperimentKind {
    pub fn is_pair(self) -> bool {
        matches!(self, ExperimentKind::WishartPair | ExperimentKind::RhoPair)
    }

    pub fn needs_fixed(self) -> bool {
        matches!(self, ExperimentKind::WishartVsFixed | ExperimentKind::RhoVsFixed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub params1: EnsembleParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params2: Option<EnsembleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_matrix: Option<HermitianMatrix>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_bins: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, params1: EnsembleParams, trials: u64, seed: u64) -> Self {
        Self { kind, params1, params2: None, fixed_matrix: None, trials, seed, histogram_bins: None }
    }

    pub fn with_pair(mut self, params2: EnsembleParams) -> Self {
        self.params2 = Some(params2);
        self
    }

    pub fn with_fixed(mut self, fixed: HermitianMatrix) -> Self {
        self.fixed_matrix = Some(fixed);
        self
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.histogram_bins = Some(bins);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p1 = &self.params1;
        if self.trials == 0 {
            return Err(Error::SpecError("trials must be positive".into()));
        }
        match (self.kind.is_pair(), &self.params2) {
            (true, None) => return Err(Error::SpecError(format!("{:?} needs params2", self.kind))),
            (true, Some(p2)) if p2.n() != p1.n() || p2.beta() != p1.beta() => {
                return Err(Error::SpecError("paired ensembles must share beta and n".into()))
            }
            (false, Some(_)) => {
                return Err(Error::SpecError(format!("{:?} takes a single ensemble", self.kind)))
            }
            _ => {}
        }
        match (self.kind.needs_fixed(), &self.fixed_matrix) {
            (true, None) => return Err(Error::SpecError(format!("{:?} needs fixed_matrix", self.kind))),
            (true, Some(x)) if x.dim() != p1.n() => {
                return Err(Error::SpecError(format!("fixed matrix is {0}x{0}, n = {1}", x.dim(), p1.n())))
            }
            (false, Some(_)) => {
                return Err(Error::SpecError(format!("{:?} takes no fixed matrix", self.kind)))
            }
            _ => {}
        }
        if self.kind == ExperimentKind::RhoVsFixed {
            let sigma = self.fixed_matrix.clone().unwrap();
            DensityMatrix::new(sigma)
                .map_err(|e| Error::SpecError(format!("fixed matrix must be a density matrix: {e}")))?;
        }
        match (self.kind, self.histogram_bins) {
            (ExperimentKind::EigDensityHistogram, None | Some(0)) => {
                return Err(Error::SpecError("histogram needs a positive bin count".into()))
            }
            (ExperimentKind::EigDensityHistogram, _) | (_, None) => {}
            (_, Some(_)) => return Err(Error::SpecError("histogram_bins only applies to histograms".into())),
        }
        Ok(())
    }

    /// The closed-form mean this experiment estimates.
    pub fn analytic(&self) -> Result<f64> {
        self.validate()?;
        let p1 = &self.params1;
        match self.kind {
            ExperimentKind::WishartVsFixed => {
                Ok(d2_wishart_fixed(p1, &SpectrumSummary::of(self.fixed_matrix.as_ref().unwrap())))
            }
            ExperimentKind::WishartPair => {
                d2_wishart_pair(p1.beta(), p1.n(), p1.m(), self.params2.unwrap().m())
            }
            ExperimentKind::RhoVsFixed => d2_rho_fixed(p1, self.fixed_matrix.as_ref().unwrap().trace_sq()),
            ExperimentKind::RhoPair => d2_rho_pair(p1.beta(), p1.n(), p1.m(), self.params2.unwrap().m()),
            ExperimentKind::Purity | ExperimentKind::EigDensityHistogram => Ok(mean_purity(p1)),
        }
    }
}

/// Sample mean, standard error (unbiased variance), and count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

/// Sum with a fixed binary tree: split at the largest power of two below the
/// length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len => {
            let split = 1usize << (usize::BITS - 1 - (len - 1).leading_zeros());
            pairwise_sum(&xs[..split]) + pairwise_sum(&xs[split..])
        }
    }
}

impl SummaryStat {
    pub fn from_samples(xs: &[f64]) -> Self {
        let count = xs.len() as u64;
        if xs.is_empty() {
            return Self { mean: f64::NAN, std_error: f64::NAN, count };
        }
        let n = xs.len() as f64;
        let mean = pairwise_sum(xs) / n;
        let std_error = if xs.len() > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, count }
    }
}

/// Equal-width eigenvalue histogram on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn new(bins: usize) -> Self {
        Self { counts: vec![0; bins], total: 0 }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        1.0 / self.bins() as f64
    }

    pub fn bin_of(&self, x: f64) -> usize {
        ((x.max(0.0) * self.bins() as f64) as usize).min(self.bins() - 1)
    }

    pub fn add(&mut self, x: f64) {
        let b = self.bin_of(x);
        self.counts[b] += 1;
        self.total += 1;
    }

    pub fn merge(mut self, other: &Histogram) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.bins()).map(|b| (b as f64 + 0.5) * w).collect()
    }

    /// Normalized so that `Σ density · width = 1`.
    pub fn densities(&self) -> Vec<f64> {
        let scale = 1.0 / (self.total as f64 * self.width());
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }

    /// Bin averages of an analytic density.
    pub fn analytic_bin_averages(&self, density: &EigenvalueDensity) -> Vec<f64> {
        let w = self.width();
        (0..self.bins())
            .map(|b| {
                let lo = b as f64 * w;
                let hi = if b + 1 == self.bins() { 1.0 } else { (b + 1) as f64 * w };
                density.integrate(lo, hi, 0) / (hi - lo)
            })
            .collect()
    }

    /// `∫ |h(μ) - p(μ)| dμ` with `p` replaced by its bin averages.
    pub fn l1_distance(&self, density: &EigenvalueDensity) -> f64 {
        let w = self.width();
        self.densities()
            .iter()
            .zip(self.analytic_bin_averages(density))
            .map(|(h, p)| (h - p).abs() * w)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub stat: SummaryStat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
}

fn trial_value(spec: &ExperimentSpec, index: u64) -> Result<f64> {
    let mut rng = RngStream::for_trial(spec.seed, index);
    let p1 = &spec.params1;
    let dist = |a: &HermitianMatrix, b: &HermitianMatrix| {
        hs_distance_sq_unchecked(a.as_matrix().as_slice(), b.as_matrix().as_slice())
    };
    Ok(match spec.kind {
        ExperimentKind::WishartVsFixed => dist(&sample_wishart(p1, &mut rng), spec.fixed_matrix.as_ref().unwrap()),
        ExperimentKind::WishartPair => {
            let w1 = sample_wishart(p1, &mut rng);
            let w2 = sample_wishart(spec.params2.as_ref().unwrap(), &mut rng);
            dist(&w1, &w2)
        }
        ExperimentKind::RhoVsFixed => {
            let rho = sample_density_matrix(p1, &mut rng)?;
            dist(rho.as_hermitian(), spec.fixed_matrix.as_ref().unwrap())
        }
        ExperimentKind::RhoPair => {
            let r1 = sample_density_matrix(p1, &mut rng)?;
            let r2 = sample_density_matrix(spec.params2.as_ref().unwrap(), &mut rng)?;
            dist(r1.as_hermitian(), r2.as_hermitian())
        }
        ExperimentKind::Purity => sample_density_matrix(p1, &mut rng)?.purity(),
        ExperimentKind::EigDensityHistogram => unreachable!("histograms are collected separately"),
    })
}

fn run_histogram(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let bins = spec.histogram_bins.unwrap();
    let per_trial: Vec<(f64, Vec<f64>)> = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::for_trial(spec.seed, i);
            let rho = sample_density_matrix(&spec.params1, &mut rng)?;
            Ok((rho.purity(), rho.eigenvalues()?))
        })
        .collect::<Result<_>>()?;
    let mut hist = Histogram::new(bins);
    let mut purities = Vec::with_capacity(per_trial.len());
    for (purity, eigs) in per_trial {
        purities.push(purity);
        eigs.into_iter().for_each(|x| hist.add(x));
    }
    Ok(ExperimentOutcome { stat: SummaryStat::from_samples(&purities), histogram: Some(hist) })
}

/// Per-trial values in trial order.
pub fn trial_values(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.kind == ExperimentKind::EigDensityHistogram {
        return Err(Error::SpecError("histogram experiments have no scalar trial values".into()));
    }
    (0..spec.trials).into_par_iter().map(|i| trial_value(spec, i)).collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    if spec.kind == ExperimentKind::EigDensityHistogram {
        return run_histogram(spec);
    }
    let values = trial_values(spec)?;
    Ok(ExperimentOutcome { stat: SummaryStat::from_samples(&values), histogram: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub empirical: SummaryStat,
    pub analytic: f64,
    pub z_score: f64,
    /// `100 (empirical / analytic - 1)`; `None` when the analytic value is zero.
    pub relative_diff_percent: Option<f64>,
}

impl ComparisonReport {
    pub fn within(&self, max_abs_z: f64) -> bool {
        self.z_score.abs() <= max_abs_z
    }
}

pub fn compare(empirical: SummaryStat, analytic: f64) -> Result<ComparisonReport> {
    if empirical.count < 2 {
        return Err(Error::SpecError("comparison needs at least two samples".into()));
    }
    let diff = empirical.mean - analytic;
    let z_score = if diff == 0.0 { 0.0 } else { diff / empirical.std_error };
    let relative_diff_percent = (analytic != 0.0).then(|| 100.0 * (empirical.mean / analytic - 1.0));
    Ok(ComparisonReport { empirical, analytic, z_score, relative_diff_percent })
}

/// Runs `spec` and compares against its closed form.
pub fn run_and_compare(spec: &ExperimentSpec) -> Result<ComparisonReport> {
    let analytic = spec.analytic()?;
    compare(run_experiment(spec)?.stat, analytic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::FixedMatrix;

    fn params(beta: u8, n: usize, m: usize) -> EnsembleParams {
        EnsembleParams::new(beta, n, m).unwrap()
    }

    #[test]
    fn compare_arithmetic() {
        let s = SummaryStat { mean: 1.0, std_error: 0.1, count: 10 };
        let r = compare(s, 1.0).unwrap();
        assert_eq!((r.z_score, r.relative_diff_percent), (0.0, Some(0.0)));
        let s = SummaryStat { mean: 1.01, std_error: 0.005, count: 10 };
        let r = compare(s, 1.0).unwrap();
        assert!((r.z_score - 2.0).abs() < 1e-12);
        assert!((r.relative_diff_percent.unwrap() - 1.0).abs() < 1e-12);
        let r = compare(s, 0.0).unwrap();
        assert!(r.relative_diff_percent.is_none());
        assert!((r.z_score - 202.0).abs() < 1e-9);
        assert!(compare(SummaryStat { mean: 1.0, std_error: 0.0, count: 1 }, 1.0).is_err());
    }

    #[test]
    fn summary_stat_small() {
        let s = SummaryStat::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.count, 4);
        assert_eq!(SummaryStat::from_samples(&[7.0]).std_error, 0.0);
    }

    #[test]
    fn pairwise_tree_shape() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1e16, 1.0, -1e16, 1.0]), (1e16 + 1.0) + (-1e16 + 1.0));
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn spec_validation() {
        let p = params(2, 2, 2);
        assert!(ExperimentSpec::new(ExperimentKind::RhoPair, p, 10, 1).validate().is_err());
        let bad_pair = ExperimentSpec::new(ExperimentKind::RhoPair, p, 10, 1).with_pair(params(2, 3, 3));
        assert!(bad_pair.validate().is_err());
        let beta_mismatch = ExperimentSpec::new(ExperimentKind::WishartPair, p, 10, 1).with_pair(params(1, 2, 2));
        assert!(beta_mismatch.validate().is_err());
        let no_fixed = ExperimentSpec::new(ExperimentKind::RhoVsFixed, p, 10, 1);
        assert!(no_fixed.validate().is_err());
        let not_density = ExperimentSpec::new(ExperimentKind::RhoVsFixed, p, 10, 1)
            .with_fixed(HermitianMatrix::identity(2));
        assert!(matches!(not_density.validate(), Err(Error::SpecError(_))));
        let ok = ExperimentSpec::new(ExperimentKind::RhoVsFixed, p, 10, 1)
            .with_fixed(FixedMatrix::MaximallyMixed.build(p.beta(), 2).unwrap());
        assert!(ok.validate().is_ok());
        assert!(ExperimentSpec::new(ExperimentKind::EigDensityHistogram, p, 10, 1).validate().is_err());
        assert!(ExperimentSpec::new(ExperimentKind::Purity, p, 0, 1).validate().is_err());
        assert!(ExperimentSpec::new(ExperimentKind::Purity, p, 5, 1).with_bins(3).validate().is_err());
    }

    #[test]
    fn spec_serde_round_trip() {
        let p = params(2, 2, 3);
        let spec = ExperimentSpec::new(ExperimentKind::WishartVsFixed, p, 100, 9)
            .with_fixed(FixedMatrix::ReferenceX2.build(p.beta(), 2).unwrap());
        let json = serde_json::to_string(&spec).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn histogram_binning() {
        let mut h = Histogram::new(4);
        for x in [-1e-17, 0.1, 0.25, 0.99, 1.0] {
            h.add(x);
        }
        assert_eq!(h.counts, vec![2, 1, 0, 2]);
        let d = h.densities();
        assert!((d.iter().sum::<f64>() * h.width() - 1.0).abs() < 1e-15);
    }
}

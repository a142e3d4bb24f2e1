//! Closed-form means for Wishart and fixed-trace ensembles.
//!
//! | pair                         | mean-square HS distance                                  |
//! |------------------------------|----------------------------------------------------------|
//! | Wishart `W`, fixed `X`       | `nm(n+m+2/β-1) + tr X² - 2m tr X`                         |
//! | Wishart `W₁`, `W₂`           | `n[(m₁+m₂)(n+2/β-1) + (m₁-m₂)²]`                           |
//! | density `ρ`, fixed `σ`       | `tr σ² + β(n+m+2/β-1)/(βnm+2) - 2/n`                      |
//! | densities `ρ₁`, `ρ₂`         | `β(n+m₁+2/β-1)/(βnm₁+2) + β(n+m₂+2/β-1)/(βnm₂+2) - 2/n`    |

mod density;
mod hypergeometric;

pub use density::{eig_density, DensityCurve, EigenvalueDensity, DEFAULT_GRID_POINTS};
pub use hypergeometric::{hyp2f1_terminating, terminating_coefficients};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::ensembles::{Beta, EnsembleParams};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// `tr X` and `tr X²` of a fixed Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub trace: f64,
    pub trace_sq: f64,
}

impl SpectrumSummary {
    pub fn new(trace: f64, trace_sq: f64) -> Self {
        Self { trace, trace_sq }
    }

    pub fn of(x: &HermitianMatrix) -> Self {
        Self { trace: x.trace(), trace_sq: x.trace_sq() }
    }

    /// From eigenvalues `χ_i`.
    pub fn from_eigenvalues(chi: &[f64]) -> Self {
        Self { trace: chi.iter().sum(), trace_sq: chi.iter().map(|c| c * c).sum() }
    }

    /// Cauchy-Schwarz: `tr X² >= (tr X)²/dim`.
    pub fn is_consistent(&self, dim: usize) -> bool {
        self.trace_sq >= self.trace * self.trace / dim as f64 * (1.0 - 1e-12)
    }
}

fn nf(p: &EnsembleParams) -> (f64, f64, f64) {
    (p.beta().value(), p.n() as f64, p.m() as f64)
}

/// `E[tr W²] = nm(n + m + 2/β - 1)`.
pub fn mean_tr_w2(p: &EnsembleParams) -> f64 {
    let (beta, n, m) = nf(p);
    n * m * (n + m + 2.0 / beta - 1.0)
}

/// `E[tr WX] = m tr X`.
pub fn mean_tr_wx(p: &EnsembleParams, x: &SpectrumSummary) -> f64 {
    p.m() as f64 * x.trace
}

/// Mean-square HS distance between a Wishart matrix and a fixed matrix.
pub fn d2_wishart_fixed(p: &EnsembleParams, x: &SpectrumSummary) -> f64 {
    mean_tr_w2(p) + x.trace_sq - 2.0 * mean_tr_wx(p, x)
}

fn pair_params(beta: Beta, n: usize, m1: usize, m2: usize) -> Result<(EnsembleParams, EnsembleParams)> {
    Ok((EnsembleParams::with_beta(beta, n, m1)?, EnsembleParams::with_beta(beta, n, m2)?))
}

/// Mean-square HS distance between two independent Wishart matrices.
pub fn d2_wishart_pair(beta: Beta, n: usize, m1: usize, m2: usize) -> Result<f64> {
    pair_params(beta, n, m1, m2)?;
    let (b, n, m1, m2) = (beta.value(), n as f64, m1 as f64, m2 as f64);
    Ok(n * ((m1 + m2) * (n + 2.0 / b - 1.0) + (m1 - m2) * (m1 - m2)))
}

fn ratio(num: i128, den: i128) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// `β(n + m + 2/β - 1)/(βnm + 2)` as an exact fraction.
fn mean_purity_exact(p: &EnsembleParams) -> BigRational {
    let (b, n, m) = (p.beta().as_u8() as i128, p.n() as i128, p.m() as i128);
    ratio(b * (n + m) + 2 - b, b * n * m + 2)
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Average purity `E[tr ρ²] = β(n + m + 2/β - 1)/(βnm + 2)`, correctly
/// rounded.
pub fn mean_purity(p: &EnsembleParams) -> f64 {
    to_f64(&mean_purity_exact(p))
}

/// Mean-square HS distance between a random density matrix and a fixed
/// density matrix of purity `purity_sigma`.
pub fn d2_rho_fixed(p: &EnsembleParams, purity_sigma: f64) -> Result<f64> {
    let n = p.n() as f64;
    let slack = 1e-12;
    if !(purity_sigma >= 1.0 / n - slack && purity_sigma <= 1.0 + slack) {
        return Err(Error::InvalidPurity { purity: purity_sigma, n: p.n() });
    }
    Ok(purity_sigma + to_f64(&(mean_purity_exact(p) - ratio(2, p.n() as i128))))
}

/// Mean-square HS distance between two independent random density matrices.
pub fn d2_rho_pair(beta: Beta, n: usize, m1: usize, m2: usize) -> Result<f64> {
    let (p1, p2) = pair_params(beta, n, m1, m2)?;
    Ok(to_f64(&(mean_purity_exact(&p1) + mean_purity_exact(&p2) - ratio(2, n as i128))))
}

/// Log normalization constants of the Wishart density (`ln C`) and of the
/// fixed-trace density (`ln 𝒞`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogNormConstants {
    pub log_c: f64,
    pub log_c_fixed: f64,
}

pub fn log_norm_constants(p: &EnsembleParams) -> LogNormConstants {
    let (beta, n, m) = nf(p);
    let half_bnm = beta * n * m / 2.0;
    let log_scale = half_bnm * (2.0 / beta).ln();
    let gamma_sum: f64 = (1..=p.n()).map(|i| ln_gamma(beta / 2.0 * (m - i as f64 + 1.0))).sum();
    let log_c_inv = log_scale + beta * n * (n - 1.0) / 4.0 * std::f64::consts::PI.ln() + gamma_sum;
    let log_c = -log_c_inv;
    LogNormConstants { log_c, log_c_fixed: log_c + log_scale + ln_gamma(half_bnm) }
}

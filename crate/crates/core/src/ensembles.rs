//! Ginibre, Wishart and fixed-trace (Hilbert-Schmidt) random matrices for
//! real (β = 1) and complex (β = 2) symmetry classes.
//!
//! Gaussian entries follow the density `∝ exp(-(β/2) tr GG†)`: a real entry
//! is `N(0, 1)`, a complex entry has real and imaginary parts `N(0, 1/2)`.
//! Either way `E|G_jk|² = 1` and `E[W] = m·I`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianMatrix, C64};
use crate::rng::RngStream;
use crate::tolerance::Tolerances;

/// Dyson index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            other => Err(Error::InvalidParams(format!("beta must be 1 or 2, got {other}"))),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        b.as_u8()
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Dyson index, dimension `n`, and degrees of freedom `m >= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EnsembleParams {
    beta: Beta,
    n: usize,
    m: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    beta: u8,
    n: usize,
    m: usize,
}

impl TryFrom<RawParams> for EnsembleParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        EnsembleParams::new(r.beta, r.n, r.m)
    }
}

impl From<EnsembleParams> for RawParams {
    fn from(p: EnsembleParams) -> Self {
        RawParams { beta: p.beta.as_u8(), n: p.n, m: p.m }
    }
}

impl EnsembleParams {
    pub fn new(beta: u8, n: usize, m: usize) -> Result<Self> {
        let beta = Beta::try_from(beta)?;
        Self::with_beta(beta, n, m)
    }

    pub fn with_beta(beta: Beta, n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension n must be at least 1".into()));
        }
        if m < n {
            return Err(Error::InvalidParams(format!("need m >= n, got n = {n}, m = {m}")));
        }
        Ok(Self { beta, n, m })
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Exponent of `det W` in the Wishart density, `(β/2)(m - n + 1) - 1`.
    pub fn alpha(&self) -> f64 {
        self.beta.value() / 2.0 * (self.m - self.n + 1) as f64 - 1.0
    }

    pub fn with_m(&self, m: usize) -> Result<Self> {
        Self::with_beta(self.beta, self.n, m)
    }
}

impl fmt::Display for EnsembleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "beta={} n={} m={}", self.beta, self.n, self.m)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianMatrix", into = "HermitianMatrix")]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    /// Validates the trace and the spectrum against [`Tolerances::DEFAULT`].
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        Self::with_tolerance(h, &Tolerances::DEFAULT)
    }

    pub fn with_tolerance(h: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let tr = h.trace();
        if (tr - 1.0).abs() > tol.unit_trace {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let min = hermitian_eig(&h)?.eigenvalues[0];
        if min < tol.min_eigenvalue {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(h))
    }

    /// Wraps a matrix produced by a normalizing construction (`W / tr W`,
    /// partial trace of a normalized state) that is a density matrix by
    /// construction.
    pub(crate) fn from_normalized(h: HermitianMatrix) -> Self {
        Self(h)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(HermitianMatrix::identity(n).scale(1.0 / n as f64))
    }

    /// `|ψ><ψ| / <ψ|ψ>`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if psi.is_empty() || norm_sq == 0.0 || !norm_sq.is_finite() {
            return Err(Error::InvalidDensityMatrix("zero or non-finite state vector".into()));
        }
        let m = ComplexMatrix::outer(psi, psi).scale_real(1.0 / norm_sq);
        Ok(Self(HermitianMatrix::symmetrized(m)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        self.0.trace_sq()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.0)?.eigenvalues)
    }
}

impl TryFrom<HermitianMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(h: HermitianMatrix) -> Result<Self> {
        Self::new(h)
    }
}

impl From<DensityMatrix> for HermitianMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.0
    }
}

/// `n × m` Ginibre matrix.
pub fn sample_ginibre(params: &EnsembleParams, rng: &mut RngStream) -> ComplexMatrix {
    let (n, m) = (params.n, params.m);
    match params.beta {
        Beta::Real => ComplexMatrix::from_fn(n, m, |_, _| Complex64::new(rng.normal(), 0.0)),
        Beta::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            ComplexMatrix::from_fn(n, m, |_, _| {
                let re = rng.normal();
                let im = rng.normal();
                Complex64::new(s * re, s * im)
            })
        }
    }
}

/// `G G†`, Hermitian by construction.
pub fn gram(g: &ComplexMatrix) -> HermitianMatrix {
    HermitianMatrix::from_upper(g.rows(), |r, c| {
        g.row(r).iter().zip(g.row(c)).map(|(a, b)| a * b.conj()).sum()
    })
}

pub fn sample_wishart(params: &EnsembleParams, rng: &mut RngStream) -> HermitianMatrix {
    gram(&sample_ginibre(params, rng))
}

/// `G G† / tr(G G†)`.
pub fn density_from_ginibre(g: &ComplexMatrix) -> Result<DensityMatrix> {
    let w = gram(g);
    let tr = w.trace();
    if tr <= 0.0 || !tr.is_finite() {
        return Err(Error::DegenerateSample);
    }
    Ok(DensityMatrix::from_normalized(w.scale(1.0 / tr)))
}

pub fn sample_density_matrix(params: &EnsembleParams, rng: &mut RngStream) -> Result<DensityMatrix> {
    density_from_ginibre(&sample_ginibre(params, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(EnsembleParams::new(3, 2, 2).is_err());
        assert!(EnsembleParams::new(2, 3, 2).is_err());
        assert!(EnsembleParams::new(1, 0, 2).is_err());
        let p = EnsembleParams::new(2, 2, 5).unwrap();
        assert_eq!(p.alpha(), 3.0);
        assert_eq!(EnsembleParams::new(1, 2, 2).unwrap().alpha(), -0.5);
    }

    #[test]
    fn params_serde() {
        let p = EnsembleParams::new(1, 5, 7).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"beta":1,"n":5,"m":7}"#);
        assert_eq!(serde_json::from_str::<EnsembleParams>(&s).unwrap(), p);
        assert!(serde_json::from_str::<EnsembleParams>(r#"{"beta":2,"n":5,"m":4}"#).is_err());
    }

    #[test]
    fn one_dimensional_state_is_one() {
        let p = EnsembleParams::new(2, 1, 4).unwrap();
        let mut rng = RngStream::new(3);
        for _ in 0..20 {
            let rho = sample_density_matrix(&p, &mut rng).unwrap();
            assert!((rho.as_hermitian()[(0, 0)].re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn seeded_ginibre_is_deterministic() {
        let p = EnsembleParams::new(2, 3, 4).unwrap();
        let a = sample_ginibre(&p, &mut RngStream::new(42));
        let b = sample_ginibre(&p, &mut RngStream::new(42));
        assert_eq!(a, b);
    }

    #[test]
    fn real_samples_have_zero_imaginary_part() {
        let p = EnsembleParams::new(1, 4, 6).unwrap();
        let mut rng = RngStream::new(9);
        for _ in 0..100 {
            assert!(sample_wishart(&p, &mut rng).is_real());
            assert!(sample_density_matrix(&p, &mut rng).unwrap().as_hermitian().is_real());
        }
    }

    #[test]
    fn zero_ginibre_is_degenerate() {
        let g = ComplexMatrix::zeros(2, 3);
        assert_eq!(density_from_ginibre(&g), Err(Error::DegenerateSample));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(HermitianMatrix::from_real_diag(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(HermitianMatrix::from_real_diag(&[1.5, -0.5])).is_err());
        let d = DensityMatrix::new(HermitianMatrix::from_real_diag(&[0.25, 0.75])).unwrap();
        assert!((d.purity() - 0.625).abs() < 1e-15);
        assert!((DensityMatrix::maximally_mixed(4).purity() - 0.25).abs() < 1e-15);
        let psi = [Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)];
        assert!((DensityMatrix::pure(&psi).unwrap().purity() - 1.0).abs() < 1e-15);
    }
}

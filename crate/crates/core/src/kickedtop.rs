//! Coupled quantum kicked tops as a dynamical source of random reduced
//! density matrices.
//!
//! Basis convention: index `a` of a spin-`j` vector is the `Jz` eigenstate
//! with `m = j - a`, so index 0 is the highest weight. Product states are
//! stored row-major as an `N1 x N2` amplitude matrix, matching `kron`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{d2_rho_fixed, d2_rho_pair};
use crate::ensembles::{gram, Beta, DensityMatrix, EnsembleParams};
use crate::error::{Error, Result};
use crate::linalg::{unitary_from_hermitian, ComplexMatrix, HermitianMatrix, C64};
use crate::montecarlo::{compare, ComparisonReport, SummaryStat};
use crate::tolerance::Tolerances;

/// Kick strength below which a top is not reliably chaotic.
pub const CHAOTIC_KICK_THRESHOLD: f64 = 6.0;
/// Default iteration gap between the two members of a single-run pair.
pub const DEFAULT_PAIR_SEPARATION: u64 = 20;

/// A spin quantum number `j`, stored as the integer `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin(u32);

impl Spin {
    pub fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    /// Spin with Hilbert-space dimension `dim = 2j + 1`.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DomainError("spin dimension must be positive".into()));
        }
        Ok(Spin((dim - 1) as u32))
    }

    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(Error::DomainError(format!("2j must be a nonnegative integer, got j = {j}")));
        }
        Ok(Spin(twice as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// `m = j, j-1, ..., -j`.
    pub fn m_values(self) -> Vec<f64> {
        let j = self.value();
        (0..self.dim()).map(|a| j - a as f64).collect()
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;

    fn try_from(j: f64) -> Result<Self> {
        Spin::new(j)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// How the rotation and the kick of a single top are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KickForm {
    /// `exp(-i k/(2j) Jz²) · exp(-i π/2 Jy)`: rotate, then kick.
    #[default]
    Product,
    /// `exp(-i (π/2 Jy + k/(2j) Jz²))`: one exponential of the summed
    /// generator. This is a time-independent top, which is not chaotic.
    Combined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickedTopConfig {
    pub j1: Spin,
    pub j2: Spin,
    pub k1: f64,
    pub k2: f64,
    pub epsilon: f64,
    #[serde(default = "default_transient")]
    pub transient: u64,
    pub samples: usize,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default = "default_theta1")]
    pub initial_theta1: f64,
    #[serde(default = "default_phi1")]
    pub initial_phi1: f64,
    #[serde(default = "default_theta2")]
    pub initial_theta2: f64,
    #[serde(default = "default_phi2")]
    pub initial_phi2: f64,
    #[serde(default)]
    pub kick_form: KickForm,
}

fn default_transient() -> u64 {
    500
}
fn default_stride() -> u64 {
    1
}
fn default_theta1() -> f64 {
    0.89
}
fn default_phi1() -> f64 {
    0.63
}
fn default_theta2() -> f64 {
    0.45
}
fn default_phi2() -> f64 {
    0.16
}

impl KickedTopConfig {
    /// Defaults for everything except spins, kicks, coupling, and sample count.
    pub fn new(j1: Spin, j2: Spin, k1: f64, k2: f64, epsilon: f64, samples: usize) -> Self {
        Self {
            j1,
            j2,
            k1,
            k2,
            epsilon,
            transient: default_transient(),
            samples,
            stride: default_stride(),
            initial_theta1: default_theta1(),
            initial_phi1: default_phi1(),
            initial_theta2: default_theta2(),
            initial_phi2: default_phi2(),
            kick_form: KickForm::default(),
        }
    }

    /// Reduced dimension `n = 2j₁ + 1`.
    pub fn n(&self) -> usize {
        self.j1.dim()
    }

    /// Environment dimension `m = 2j₂ + 1`.
    pub fn m(&self) -> usize {
        self.j2.dim()
    }

    /// The fixed-trace ensemble the reduced states should follow.
    pub fn target_params(&self) -> Result<EnsembleParams> {
        EnsembleParams::with_beta(Beta::Complex, self.n(), self.m())
    }

    pub fn validate(&self) -> Result<()> {
        if self.j1.twice() == 0 || self.j2.twice() == 0 {
            return Err(Error::DomainError("both spins need j >= 1/2".into()));
        }
        if self.samples == 0 {
            return Err(Error::SpecError("samples must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::SpecError("stride must be at least 1".into()));
        }
        let reals = [
            self.k1,
            self.k2,
            self.epsilon,
            self.initial_theta1,
            self.initial_phi1,
            self.initial_theta2,
            self.initial_phi2,
        ];
        if reals.iter().any(|x| !x.is_finite()) {
            return Err(Error::SpecError("kicked-top parameters must be finite".into()));
        }
        Ok(())
    }

    /// Warning text when a kick is below the chaotic threshold.
    pub fn chaos_warning(&self) -> Option<String> {
        let kmin = self.k1.min(self.k2);
        (kmin < CHAOTIC_KICK_THRESHOLD)
            .then(|| format!("min(k1, k2) = {kmin} is below {CHAOTIC_KICK_THRESHOLD}; dynamics may not be chaotic"))
    }

    fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self.chaos_warning().into_iter().collect();
        if self.epsilon == 0.0 {
            out.push("epsilon = 0: the tops are uncoupled and reduced states stay pure".into());
        }
        out
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let nrm = norm(&amplitudes);
        if amplitudes.is_empty() || (nrm - 1.0).abs() > Tolerances::DEFAULT.state_norm {
            return Err(Error::DomainError(format!("state norm {nrm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `<ψ|A|ψ>`.
    pub fn expectation(&self, a: &HermitianMatrix) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(Error::ShapeError(format!("{}-dim operator on {}-dim state", a.dim(), self.dim())));
        }
        let av = a.as_matrix().mat_vec(&self.amplitudes);
        Ok(self.amplitudes.iter().zip(&av).map(|(x, y)| x.conj() * y).sum::<C64>().re)
    }
}

/// `(Jy, Jz)` for spin `j`, built from the ladder operators.
pub fn angular_momentum_ops(j: Spin) -> (HermitianMatrix, HermitianMatrix) {
    let m = j.m_values();
    let jv = j.value();
    let n = j.dim();
    // (J+)_{a-1, a} = sqrt(j(j+1) - m(m+1)) with m = m_a
    let jp = |a: usize| (jv * (jv + 1.0) - m[a] * (m[a] + 1.0)).max(0.0).sqrt();
    let jy = HermitianMatrix::from_upper(n, |r, c| {
        if c == r + 1 {
            // Jy = (J+ - J-)/(2i): the upper entry is -i/2 · (J+)_{r,c}
            C64::new(0.0, -0.5 * jp(c))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (jy, HermitianMatrix::from_real_diag(&m))
}

/// Single-top Floquet factor.
pub fn top_floquet(j: Spin, k: f64, form: KickForm) -> Result<ComplexMatrix> {
    if j.twice() == 0 {
        return Err(Error::DomainError("kick term needs j >= 1/2".into()));
    }
    let (jy, _) = angular_momentum_ops(j);
    let scale = k / (2.0 * j.value());
    let m = j.m_values();
    match form {
        KickForm::Product => {
            let rot = unitary_from_hermitian(&jy, std::f64::consts::FRAC_PI_2)?;
            let kick: Vec<C64> = m.iter().map(|mm| C64::from_polar(1.0, -scale * mm * mm)).collect();
            Ok(ComplexMatrix::from_fn(j.dim(), j.dim(), |r, c| kick[r] * rot[(r, c)]))
        }
        KickForm::Combined => {
            let gen = HermitianMatrix::from_upper(j.dim(), |r, c| {
                let kick = if r == c { scale * m[r] * m[r] } else { 0.0 };
                jy[(r, c)] * std::f64::consts::FRAC_PI_2 + kick
            });
            unitary_from_hermitian(&gen, 1.0)
        }
    }
}

/// Diagonal of the coupling unitary, in product-basis order.
pub fn coupling_phases(j1: Spin, j2: Spin, epsilon: f64) -> Vec<C64> {
    let s = epsilon / (j1.value() * j2.value()).sqrt();
    let (m1, m2) = (j1.m_values(), j2.m_values());
    m1.iter().flat_map(|a| m2.iter().map(move |b| C64::from_polar(1.0, -s * a * b))).collect()
}

/// The one-period evolution kept in factored form: `U = (U₁ ⊗ U₂) U₁₂`.
#[derive(Clone, Debug)]
pub struct FloquetOperator {
    u1: ComplexMatrix,
    u2_t: ComplexMatrix,
    phases: Vec<C64>,
}

impl FloquetOperator {
    pub fn new(cfg: &KickedTopConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            u1: top_floquet(cfg.j1, cfg.k1, cfg.kick_form)?,
            u2_t: top_floquet(cfg.j2, cfg.k2, cfg.kick_form)?.transpose(),
            phases: coupling_phases(cfg.j1, cfg.j2, cfg.epsilon),
        })
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// The full `(N1·N2)`-dimensional matrix.
    pub fn dense(&self) -> ComplexMatrix {
        let u2 = self.u2_t.transpose();
        let mut u = self.u1.kron(&u2);
        let d = self.dim();
        let data = u.as_mut_slice();
        for r in 0..d {
            for (c, ph) in self.phases.iter().enumerate() {
                data[r * d + c] *= ph;
            }
        }
        u
    }

    /// In place `ψ ← U ψ` on an `N1 x N2` amplitude matrix: `U₁ (Φ ∘ Ψ) U₂ᵀ`.
    pub fn apply(&self, psi: &mut ComplexMatrix) {
        for (a, ph) in psi.as_mut_slice().iter_mut().zip(&self.phases) {
            *a *= ph;
        }
        *psi = self.u1.matmul(psi).matmul(&self.u2_t);
    }
}

pub fn build_floquet(cfg: &KickedTopConfig) -> Result<ComplexMatrix> {
    Ok(FloquetOperator::new(cfg)?.dense())
}

/// Spin coherent state `|θ, φ>` in the `Jz` basis.
pub fn coherent_state(j: Spin, theta: f64, phi: f64) -> Vec<C64> {
    let two_j = j.twice() as usize;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut binom = 1.0f64;
    (0..=two_j)
        .map(|a| {
            // index a: j + m = 2j - a, j - m = a
            if a > 0 {
                binom = binom * (two_j + 1 - a) as f64 / a as f64;
            }
            let mag = binom.sqrt() * c.powi((two_j - a) as i32) * s.powi(a as i32);
            C64::from_polar(mag, a as f64 * phi)
        })
        .collect()
}

pub fn initial_state(cfg: &KickedTopConfig) -> Result<StateVector> {
    cfg.validate()?;
    let a = coherent_state(cfg.j1, cfg.initial_theta1, cfg.initial_phi1);
    let b = coherent_state(cfg.j2, cfg.initial_theta2, cfg.initial_phi2);
    let mut v: Vec<C64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
    let nrm = norm(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    StateVector::new(v)
}

/// A running trajectory `|ψ(ν)> = U |ψ(ν-1)>`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    floquet: FloquetOperator,
    psi: ComplexMatrix,
    iteration: u64,
}

impl Trajectory {
    pub fn new(cfg: &KickedTopConfig) -> Result<Self> {
        let floquet = FloquetOperator::new(cfg)?;
        let psi = ComplexMatrix::from_vec(cfg.n(), cfg.m(), initial_state(cfg)?.amplitudes)?;
        Ok(Self { floquet, psi, iteration: 0 })
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Advances one period and renormalizes.
    pub fn step(&mut self) {
        self.floquet.apply(&mut self.psi);
        let nrm = self.psi.frobenius_norm();
        self.psi.as_mut_slice().iter_mut().for_each(|x| *x /= nrm);
        self.iteration += 1;
    }

    pub fn advance(&mut self, iterations: u64) {
        (0..iterations).for_each(|_| self.step());
    }

    pub fn state(&self) -> Result<StateVector> {
        StateVector::new(self.psi.as_slice().to_vec())
    }

    /// `tr₂ |ψ><ψ|`.
    pub fn reduced(&self) -> DensityMatrix {
        let rho = gram(&self.psi);
        let tr = rho.trace();
        DensityMatrix::from_normalized(rho.scale(1.0 / tr))
    }
}

/// Iterator over the retained reduced density matrices of one run.
pub struct Samples {
    traj: Trajectory,
    stride: u64,
    remaining: usize,
    started: bool,
    transient: u64,
}

impl Iterator for Samples {
    type Item = DensityMatrix;

    fn next(&mut self) -> Option<DensityMatrix> {
        if self.remaining == 0 {
            return None;
        }
        if !self.started {
            self.traj.advance(self.transient);
            self.started = true;
        }
        self.traj.advance(self.stride);
        self.remaining -= 1;
        Some(self.traj.reduced())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for Samples {}

/// `cfg.samples` reduced states: iterations `transient + stride·i` for
/// `i = 1..=samples`.
pub fn evolve_and_collect(cfg: &KickedTopConfig) -> Result<Samples> {
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    Ok(Samples {
        traj: Trajectory::new(cfg)?,
        stride: cfg.stride,
        remaining: cfg.samples,
        started: false,
        transient: cfg.transient,
    })
}

/// Pairs `(ρ(ν), ρ(ν + separation))` from one trajectory, with `ν` running
/// over the same retained iterations as [`evolve_and_collect`].
pub fn single_run_pairs(cfg: &KickedTopConfig, separation: u64) -> Result<Vec<(DensityMatrix, DensityMatrix)>> {
    if separation == 0 {
        return Err(Error::SpecError("pair separation must be positive".into()));
    }
    let mut first = Trajectory::new(cfg)?;
    first.advance(cfg.transient);
    let mut second = first.clone();
    second.advance(separation);
    let mut out = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        first.advance(cfg.stride);
        second.advance(cfg.stride);
        out.push((first.reduced(), second.reduced()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickedTopReport {
    pub comparison: ComparisonReport,
    /// Sample mean of `tr ρ²` over the retained states of the first top pair.
    pub mean_purity: f64,
    pub warnings: Vec<String>,
}

fn distances(a: &DensityMatrix, b: &HermitianMatrix) -> f64 {
    crate::linalg::hs_distance_sq_unchecked(a.as_hermitian().as_matrix().as_slice(), b.as_matrix().as_slice())
}

/// Fixed mode (`sigma`) compares `tr(ρ - σ)²` against the random-state
/// prediction; pair mode (`cfg_b`) compares `tr(ρ_A - ρ_B)²`. Exactly one
/// must be given.
pub fn kicked_top_distance_report(
    cfg_a: &KickedTopConfig,
    cfg_b: Option<&KickedTopConfig>,
    sigma: Option<&DensityMatrix>,
) -> Result<KickedTopReport> {
    cfg_a.validate()?;
    let params_a = cfg_a.target_params()?;
    let mut warnings = cfg_a.warnings();
    let (values, purities, analytic) = match (cfg_b, sigma) {
        (None, Some(sigma)) => {
            if sigma.dim() != cfg_a.n() {
                return Err(Error::SpecError(format!("sigma is {}-dim, top has n = {}", sigma.dim(), cfg_a.n())));
            }
            let (d, p): (Vec<f64>, Vec<f64>) = evolve_and_collect(cfg_a)?
                .map(|rho| (distances(&rho, sigma.as_hermitian()), rho.purity()))
                .unzip();
            (d, p, d2_rho_fixed(&params_a, sigma.purity())?)
        }
        (Some(cfg_b), None) => {
            cfg_b.validate()?;
            if cfg_b.n() != cfg_a.n() {
                return Err(Error::SpecError("pair mode needs equal first-top dimensions".into()));
            }
            if cfg_b.samples != cfg_a.samples {
                return Err(Error::SpecError("pair mode needs equal sample counts".into()));
            }
            warnings.extend(cfg_b.warnings().into_iter().map(|w| format!("top B: {w}")));
            let (d, p): (Vec<f64>, Vec<f64>) = evolve_and_collect(cfg_a)?
                .zip(evolve_and_collect(cfg_b)?)
                .map(|(ra, rb)| (distances(&ra, rb.as_hermitian()), ra.purity()))
                .unzip();
            (d, p, d2_rho_pair(Beta::Complex, cfg_a.n(), cfg_a.m(), cfg_b.m())?)
        }
        _ => return Err(Error::SpecError("give exactly one of a second top or a fixed sigma".into())),
    };
    finish(values, purities, analytic, warnings)
}

/// Pair mode with both states drawn from one trajectory.
pub fn single_run_pair_report(cfg: &KickedTopConfig, separation: u64) -> Result<KickedTopReport> {
    let params = cfg.target_params()?;
    let (d, p): (Vec<f64>, Vec<f64>) = single_run_pairs(cfg, separation)?
        .iter()
        .map(|(a, b)| (distances(a, b.as_hermitian()), a.purity()))
        .unzip();
    finish(d, p, d2_rho_pair(Beta::Complex, params.n(), params.m(), params.m())?, cfg.warnings())
}

fn finish(values: Vec<f64>, purities: Vec<f64>, analytic: f64, warnings: Vec<String>) -> Result<KickedTopReport> {
    let comparison = compare(SummaryStat::from_samples(&values), analytic)?;
    Ok(KickedTopReport { comparison, mean_purity: SummaryStat::from_samples(&purities).mean, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(j: f64) -> Spin {
        Spin::new(j).unwrap()
    }

    #[test]
    fn spin_parsing() {
        assert_eq!(spin(0.5).dim(), 2);
        assert_eq!(spin(12.0).dim(), 25);
        assert_eq!(spin(1.5).to_string(), "3/2");
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(-1.0).is_err());
        assert_eq!(Spin::from_dim(31).unwrap(), spin(15.0));
    }

    #[test]
    fn spin_half_operators() {
        let (jy, jz) = angular_momentum_ops(spin(0.5));
        assert_eq!(jz.as_matrix().as_slice(), &[C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.5, 0.0)]);
        // Pauli-y / 2
        assert_eq!(jy[(0, 1)], C64::new(0.0, -0.5));
        assert_eq!(jy[(1, 0)], C64::new(0.0, 0.5));
    }

    #[test]
    fn spin_one_spectrum_and_casimir() {
        let (jy, _) = angular_momentum_ops(spin(1.0));
        let eig = jy.eig().unwrap().eigenvalues;
        for (e, want) in eig.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((e - want).abs() < 1e-13);
        }
        for twice in 1..30u32 {
            let j = Spin::from_twice(twice);
            let (_, jz) = angular_momentum_ops(j);
            let jv = j.value();
            assert!((jz.trace_sq() - jv * (jv + 1.0) * (2.0 * jv + 1.0) / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn commutator_gives_jx_spectrum() {
        for twice in [1u32, 2, 5, 8] {
            let j = Spin::from_twice(twice);
            let (jy, jz) = angular_momentum_ops(j);
            let (y, z) = (jy.as_matrix(), jz.as_matrix());
            // Jx = -i [Jy, Jz]
            let comm = &y.matmul(z) - &z.matmul(y);
            let jx = HermitianMatrix::new(comm.scale(C64::new(0.0, -1.0))).unwrap();
            let eig = jx.eig().unwrap().eigenvalues;
            let mut want = j.m_values();
            want.reverse();
            for (e, w) in eig.iter().zip(&want) {
                assert!((e - w).abs() < 1e-12, "j={j}: {e} vs {w}");
            }
        }
    }

    #[test]
    fn coherent_states() {
        for twice in [1u32, 4, 24, 31] {
            let j = Spin::from_twice(twice);
            let north = coherent_state(j, 0.0, 1.3);
            assert_eq!(north[0], C64::new(1.0, 0.0));
            assert!(north[1..].iter().all(|a| a.norm() == 0.0));
            let (_, jz) = angular_momentum_ops(j);
            for (theta, phi) in [(0.89, 0.63), (2.5, -1.0), (std::f64::consts::PI, 0.0)] {
                let s = StateVector::new(coherent_state(j, theta, phi)).unwrap();
                assert!((s.norm() - 1.0).abs() < 1e-12);
                assert!((s.expectation(&jz).unwrap() - j.value() * theta.cos()).abs() < 1e-10);
            }
        }
    }

    fn small_cfg(k1: f64, k2: f64, eps: f64) -> KickedTopConfig {
        let mut cfg = KickedTopConfig::new(spin(2.0), spin(2.5), k1, k2, eps, 50);
        cfg.transient = 10;
        cfg
    }

    fn assert_unitary(u: &ComplexMatrix, tol: f64) {
        let d = u.adjoint().matmul(u).max_abs_diff(&ComplexMatrix::identity(u.rows()));
        assert!(d <= tol, "unitarity defect {d}");
    }

    #[test]
    fn floquet_is_unitary_and_factored_apply_matches_dense() {
        for form in [KickForm::Product, KickForm::Combined] {
            let mut cfg = small_cfg(7.0, 8.0, 1.0);
            cfg.kick_form = form;
            let op = FloquetOperator::new(&cfg).unwrap();
            let u = op.dense();
            assert_unitary(&u, 1e-12);
            let psi0 = initial_state(&cfg).unwrap();
            let dense = u.mat_vec(psi0.amplitudes());
            let mut psi = ComplexMatrix::from_vec(cfg.n(), cfg.m(), psi0.amplitudes().to_vec()).unwrap();
            op.apply(&mut psi);
            for (a, b) in psi.as_slice().iter().zip(&dense) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn coupling_is_diagonal_and_free_top_is_rotation() {
        let cfg = KickedTopConfig::new(spin(0.5), spin(0.5), 0.0, 0.0, 0.0, 1);
        let u = build_floquet(&cfg).unwrap();
        let r = top_floquet(spin(0.5), 0.0, KickForm::Product).unwrap();
        assert!(u.max_abs_diff(&r.kron(&r)) < 1e-15);
        // Four quarter turns about y return |1/2, 1/2> up to a phase.
        let mut v = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        for _ in 0..4 {
            v = r.mat_vec(&v);
        }
        assert!((v[0].norm() - 1.0).abs() < 1e-14 && v[1].norm() < 1e-14);
        let ph = coupling_phases(spin(1.0), spin(0.5), 0.7);
        assert_eq!(ph.len(), 6);
        assert!(ph.iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        // m1 = 0 row carries no phase
        assert_eq!(ph[2], C64::new(1.0, 0.0));
    }

    #[test]
    fn uncoupled_tops_stay_pure() {
        for form in [KickForm::Product, KickForm::Combined] {
            let mut cfg = small_cfg(7.0, 8.0, 0.0);
            cfg.kick_form = form;
            for rho in evolve_and_collect(&cfg).unwrap() {
                assert!((rho.purity() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn samples_are_valid_and_deterministic() {
        let cfg = small_cfg(7.0, 8.0, 1.0);
        let a: Vec<DensityMatrix> = evolve_and_collect(&cfg).unwrap().collect();
        let b: Vec<DensityMatrix> = evolve_and_collect(&cfg).unwrap().collect();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        for rho in &a {
            assert!((rho.as_hermitian().trace() - 1.0).abs() < 1e-10);
            assert!(rho.eigenvalues().unwrap()[0] >= -1e-9);
            DensityMatrix::new(rho.as_hermitian().clone()).unwrap();
        }
    }

    #[test]
    fn stride_picks_every_stride_th_iteration() {
        let cfg = small_cfg(7.0, 8.0, 1.0);
        let mut strided = cfg.clone();
        strided.stride = 3;
        strided.samples = 5;
        let dense: Vec<DensityMatrix> = evolve_and_collect(&cfg).unwrap().collect();
        let sparse: Vec<DensityMatrix> = evolve_and_collect(&strided).unwrap().collect();
        for (i, rho) in sparse.iter().enumerate() {
            assert_eq!(rho, &dense[3 * i + 2]);
        }
    }

    #[test]
    fn single_run_pairs_line_up_with_trajectory() {
        let mut cfg = small_cfg(7.0, 8.0, 1.0);
        cfg.samples = 30;
        let traj: Vec<DensityMatrix> = evolve_and_collect(&cfg).unwrap().collect();
        let pairs = single_run_pairs(&cfg, 4).unwrap();
        for (i, (a, b)) in pairs.iter().enumerate().take(26) {
            assert_eq!(a, &traj[i]);
            assert_eq!(b, &traj[i + 4]);
        }
        assert!(single_run_pairs(&cfg, 0).is_err());
    }

    #[test]
    fn report_mode_errors_and_warnings() {
        let cfg = small_cfg(7.0, 8.0, 1.0);
        let sigma = DensityMatrix::maximally_mixed(cfg.n());
        assert!(matches!(kicked_top_distance_report(&cfg, None, None), Err(Error::SpecError(_))));
        assert!(matches!(
            kicked_top_distance_report(&cfg, Some(&cfg), Some(&sigma)),
            Err(Error::SpecError(_))
        ));
        let mut other = cfg.clone();
        other.j1 = spin(1.0);
        assert!(kicked_top_distance_report(&cfg, Some(&other), None).is_err());
        assert!(kicked_top_distance_report(&cfg, None, Some(&DensityMatrix::maximally_mixed(3))).is_err());

        let r = kicked_top_distance_report(&cfg, None, Some(&sigma)).unwrap();
        assert!(r.warnings.is_empty());
        assert_eq!(r.comparison.empirical.count, 50);

        let calm = small_cfg(2.0, 2.0, 0.0);
        let mut pure = vec![0.0; calm.n()];
        pure[0] = 1.0;
        let sigma = DensityMatrix::new(HermitianMatrix::from_real_diag(&pure)).unwrap();
        let r = kicked_top_distance_report(&calm, None, Some(&sigma)).unwrap();
        assert_eq!(r.warnings.len(), 2);
        assert!(r.comparison.relative_diff_percent.unwrap().abs() > 10.0);
    }

    #[test]
    fn config_validation_and_serde() {
        let mut cfg = small_cfg(7.0, 8.0, 1.0);
        cfg.j2 = Spin::from_twice(0);
        assert!(matches!(cfg.validate(), Err(Error::DomainError(_))));
        let mut cfg = small_cfg(7.0, 8.0, 1.0);
        cfg.samples = 0;
        assert!(cfg.validate().is_err());
        let cfg = small_cfg(7.0, 8.0, 1.0);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"j2\":2.5"));
        let back: KickedTopConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        let minimal: KickedTopConfig =
            serde_json::from_str(r#"{"j1":12,"j2":15,"k1":7,"k2":8,"epsilon":1,"samples":5000}"#).unwrap();
        assert_eq!((minimal.transient, minimal.stride, minimal.kick_form), (500, 1, KickForm::Product));
        assert!(serde_json::from_str::<KickedTopConfig>(r#"{"j1":0.3,"j2":1,"k1":7,"k2":8,"epsilon":1,"samples":5}"#).is_err());
    }
}

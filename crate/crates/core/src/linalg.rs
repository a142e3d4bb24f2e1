//! Dense complex matrices and the handful of Hermitian operations the rest of
//! the crate is built on: eigendecomposition (cyclic Jacobi), the unitary
//! exponential, partial trace over a second tensor factor, and the squared
//! Hilbert-Schmidt distance.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex64;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeError(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeError(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Outer product |u><v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |A_jk - conj(A_kj)|; infinite for non-square input.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mat_vec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / rhs.rows, c / rhs.cols)] * rhs[(r % rhs.rows, c % rhs.cols)]
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A square matrix known to be Hermitian.
///
/// Construction checks the deviation from Hermiticity against
/// [`Tolerances::hermiticity`] (scaled by the largest entry when that exceeds
/// one) and then symmetrizes, so stored entries satisfy `A_jk == conj(A_kj)`
/// exactly and the diagonal is real.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, &Tolerances::DEFAULT)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeError(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let scale = m.data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let deviation = m.hermiticity_deviation();
        if deviation > tol.hermiticity * scale {
            return Err(Error::HermiticityViolation { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Wraps `m` after replacing it by `(m + m^dagger)/2`, without checking.
    pub(crate) fn symmetrized(mut m: ComplexMatrix) -> Self {
        let n = m.rows;
        for r in 0..n {
            m[(r, r)] = C64::new(m[(r, r)].re, 0.0);
            for c in r + 1..n {
                let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
                m[(r, c)] = avg;
                m[(c, r)] = avg.conj();
            }
        }
        Self(m)
    }

    /// Builds from the upper triangle produced by `f(r, c)` with `r <= c`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = C64::new(f(r, r).re, 0.0);
            for c in r + 1..n {
                let z = f(r, c);
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
            }
        }
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diag(diag))
    }

    /// Real symmetric matrix from row-major data.
    pub fn from_real_symmetric(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(n, n, data)?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// tr A², computed as the squared Frobenius norm.
    pub fn trace_sq(&self) -> f64 {
        self.0.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.0.is_real()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_real(s))
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        hermitian_eig(self)
    }
}

impl TryFrom<ComplexMatrix> for HermitianMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<HermitianMatrix> for ComplexMatrix {
    fn from(h: HermitianMatrix) -> Self {
        h.0
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * fl[k] * v[(c, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }
}

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[r * n + c].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    hermitian_eig_with(a, &Tolerances::DEFAULT)
}

pub fn hermitian_eig_with(a: &HermitianMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    let deviation = a.0.hermiticity_deviation();
    let scale = a.0.data.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if deviation > tol.hermiticity * scale {
        return Err(Error::HermiticityViolation { deviation });
    }

    let n = a.dim();
    let mut w = a.0.data.clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.0.frobenius_norm();
    let target = tol.jacobi_off_diagonal * norm;

    let mut converged = off_diagonal_norm(&w, n) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == tol.jacobi_max_sweeps {
            return Err(Error::ConvergenceFailure { sweeps, off_norm: off_diagonal_norm(&w, n) });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut w, &mut v, n, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&w, n) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[i * n + i].re.total_cmp(&w[j * n + j].re));
    let eigenvalues = order.iter().map(|&i| w[i * n + i].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// One Jacobi rotation zeroing `w[p][q]`. With `a_pq = |a_pq| e^{iφ}` the
/// rotation is `J = diag(1, e^{-iφ}) [[c, s], [-s, c]]` acting on the (p, q)
/// plane; `w <- J† w J`, `v <- v J`.
fn rotate(w: &mut [C64], v: &mut ComplexMatrix, n: usize, p: usize, q: usize) {
    let apq = w[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = w[p * n + p].re;
    let aqq = w[q * n + q].re;
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_infinite() {
        // |a_pq| negligible against the diagonal gap.
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();

    // w <- w J (columns p, q)
    for k in 0..n {
        let wkp = w[k * n + p];
        let wkq = w[k * n + q];
        w[k * n + p] = wkp * c - wkq * ph_conj * s;
        w[k * n + q] = wkp * s + wkq * ph_conj * c;
    }
    // w <- J† w (rows p, q)
    for k in 0..n {
        let wpk = w[p * n + k];
        let wqk = w[q * n + k];
        w[p * n + k] = wpk * c - wqk * phase * s;
        w[q * n + k] = wpk * s + wqk * phase * c;
    }
    w[p * n + q] = C64::zero();
    w[q * n + p] = C64::zero();
    w[p * n + p] = C64::new(app - t * mag, 0.0);
    w[q * n + q] = C64::new(aqq + t * mag, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ph_conj * s;
        v[(k, q)] = vkp * s + vkq * ph_conj * c;
    }
}

/// `exp(-i · phase_scale · H)` through the spectral decomposition of `H`.
pub fn unitary_from_hermitian(h: &HermitianMatrix, phase_scale: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.map_spectrum(|l| C64::from_polar(1.0, -phase_scale * l)))
}

/// Traces out the second factor of a `(dim_a·dim_b)`-dimensional operator.
pub fn partial_trace_second(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<HermitianMatrix> {
    let d = dim_a * dim_b;
    if dim_a == 0 || dim_b == 0 || m.rows != d || m.cols != d {
        return Err(Error::ShapeError(format!(
            "partial trace of a {}x{} matrix over a {dim_a}x{dim_b} split",
            m.rows, m.cols
        )));
    }
    let reduced = ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
        (0..dim_b).map(|b| m[(i * dim_b + b, j * dim_b + b)]).sum()
    });
    HermitianMatrix::new(reduced)
}

/// `tr (A - B)²`. Computed as the squared Frobenius norm of the difference,
/// which equals the trace for Hermitian arguments.
pub fn hs_distance_sq(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeError(format!(
            "distance between {}- and {}-dimensional matrices",
            a.dim(),
            b.dim()
        )));
    }
    Ok(hs_distance_sq_unchecked(a.as_matrix().as_slice(), b.as_matrix().as_slice()))
}

#[inline]
pub(crate) fn hs_distance_sq_unchecked(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_y() -> HermitianMatrix {
        HermitianMatrix::new(
            ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap(),
        )
        .unwrap()
    }

    fn assert_reconstructs(h: &HermitianMatrix, eig: &EigenDecomposition) {
        let rec = eig.reconstruct();
        let err = (&rec - h.as_matrix()).frobenius_norm();
        assert!(err <= 1e-10 * h.as_matrix().frobenius_norm().max(1.0), "reconstruction error {err}");
        let vhv = &eig.eigenvectors.adjoint() * &eig.eigenvectors;
        assert!(vhv.max_abs_diff(&ComplexMatrix::identity(h.dim())) < 1e-10);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_identity_and_zero() {
        let e = hermitian_eig(&HermitianMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let e = hermitian_eig(&HermitianMatrix::zeros(4)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 4]);
    }

    #[test]
    fn eig_reference_two_by_two() {
        let x = HermitianMatrix::from_real_symmetric(2, &[2.0, 1.0, 1.0, -0.5]).unwrap();
        let e = hermitian_eig(&x).unwrap();
        let s41 = 41f64.sqrt();
        assert!((e.eigenvalues[0] - (3.0 - s41) / 4.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - (3.0 + s41) / 4.0).abs() < 1e-14);
        assert_reconstructs(&x, &e);
    }

    #[test]
    fn eig_complex_hermitian() {
        let x = HermitianMatrix::new(
            ComplexMatrix::from_vec(2, 2, vec![c(2., 0.), c(1., 3.), c(1., -3.), c(-0.5, 0.)]).unwrap(),
        )
        .unwrap();
        let e = hermitian_eig(&x).unwrap();
        // (3/2)/2 ± sqrt((5/2)²/4 + 10)
        let disc = (6.25f64 / 4.0 + 10.0).sqrt();
        assert!((e.eigenvalues[0] - (0.75 - disc)).abs() < 1e-13);
        assert!((e.eigenvalues[1] - (0.75 + disc)).abs() < 1e-13);
        assert_reconstructs(&x, &e);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        // Bypass the constructor to hand the solver a broken matrix.
        let m = ComplexMatrix::from_vec(2, 2, vec![c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        let h = HermitianMatrix(m);
        assert!(matches!(hermitian_eig(&h), Err(Error::HermiticityViolation { .. })));
        let m = ComplexMatrix::from_vec(2, 2, vec![c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::HermiticityViolation { .. })));
    }

    #[test]
    fn eig_reports_sweep_cap() {
        let tol = Tolerances { jacobi_max_sweeps: 0, ..Tolerances::DEFAULT };
        let x = HermitianMatrix::from_real_symmetric(2, &[2.0, 1.0, 1.0, -0.5]).unwrap();
        assert!(matches!(hermitian_eig_with(&x, &tol), Err(Error::ConvergenceFailure { .. })));
    }

    #[test]
    fn from_vec_validates() {
        assert!(matches!(ComplexMatrix::from_vec(2, 2, vec![c(0., 0.); 3]), Err(Error::ShapeError(_))));
        let mut d = vec![c(0., 0.); 4];
        d[3] = c(f64::NAN, 0.);
        assert!(matches!(ComplexMatrix::from_vec(2, 2, d), Err(Error::NonFinite { row: 1, col: 1 })));
    }

    #[test]
    fn unitary_examples() {
        let u = unitary_from_hermitian(&HermitianMatrix::zeros(3), 1.7).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);

        let u = unitary_from_hermitian(&HermitianMatrix::from_real_diag(&[1.0, -1.0]), PI).unwrap();
        let expect = ComplexMatrix::from_real_diag(&[-1.0, -1.0]);
        assert!(u.max_abs_diff(&expect) < 1e-15);

        // exp(-iθσ_y) = cosθ I - i sinθ σ_y, θ = π/2.
        let theta = PI / 2.0;
        let u = unitary_from_hermitian(&pauli_y(), theta).unwrap();
        let sy = pauli_y().into_matrix();
        let expect = &ComplexMatrix::identity(2).scale_real(theta.cos()) - &sy.scale(c(0., theta.sin()));
        assert!(u.max_abs_diff(&expect) < 1e-14);
        let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
        assert!((det.norm() - 1.0).abs() < 1e-14);
    }

    fn bell_projector() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)];
        ComplexMatrix::outer(&psi, &psi)
    }

    #[test]
    fn partial_trace_examples() {
        // Bell state: explicit contraction of the 4x4 projector gives I/2.
        let r = partial_trace_second(&bell_projector(), 2, 2).unwrap();
        assert!(r.as_matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let r = partial_trace_second(&ComplexMatrix::identity(6), 2, 3).unwrap();
        assert!(r.as_matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(3.0)) < 1e-15);

        let rho_a = ComplexMatrix::from_vec(2, 2, vec![c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)]).unwrap();
        let rho_b = ComplexMatrix::from_real_diag(&[0.25, 0.5, 0.25]);
        let r = partial_trace_second(&rho_a.kron(&rho_b), 2, 3).unwrap();
        assert!(r.as_matrix().max_abs_diff(&rho_a) < 1e-15);

        assert!(matches!(partial_trace_second(&ComplexMatrix::identity(5), 2, 3), Err(Error::ShapeError(_))));
    }

    #[test]
    fn hs_distance_examples() {
        let a = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        let b = HermitianMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(hs_distance_sq(&a, &a).unwrap(), 0.0);
        assert_eq!(hs_distance_sq(&a, &b).unwrap(), 2.0);
        let half = HermitianMatrix::identity(2).scale(0.5);
        assert_eq!(hs_distance_sq(&half, &a).unwrap(), 0.5);
        assert!(matches!(hs_distance_sq(&a, &HermitianMatrix::identity(3)), Err(Error::ShapeError(_))));
    }

    #[test]
    fn kron_dimensions() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        assert_eq!(k[(4, 4)], c(2.0, 0.0));
    }
}

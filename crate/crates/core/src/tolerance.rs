//! Numerical tolerances shared by the whole crate.

/// Central tolerance record. Every invariant check in the crate reads its
/// threshold from here (normally through [`Tolerances::DEFAULT`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max |A_jk - conj(A_kj)| accepted as Hermitian.
    pub hermiticity: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm falls below this
    /// fraction of the input's Frobenius norm.
    pub jacobi_off_diagonal: f64,
    /// Jacobi sweep cap.
    pub jacobi_max_sweeps: usize,
    /// |tr rho - 1| accepted for a density matrix.
    pub unit_trace: f64,
    /// Smallest eigenvalue accepted as positive semidefinite.
    pub min_eigenvalue: f64,
    /// | ||psi|| - 1 | accepted for a state vector.
    pub state_norm: f64,
    /// Unitarity check for the Floquet operator, max-entry norm of U^dagger U - I.
    pub unitarity: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-12,
        jacobi_off_diagonal: 1e-13,
        jacobi_max_sweeps: 100,
        unit_trace: 1e-12,
        min_eigenvalue: -1e-10,
        state_norm: 1e-10,
        unitarity: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

//! Random density matrices from Wishart and fixed-trace ensembles, exact
//! mean-square Hilbert-Schmidt distances, Monte Carlo verification, and a
//! coupled kicked top as a dynamical source of random states.

pub mod analytic;
pub mod ensembles;
pub mod error;
pub mod figures;
pub mod kickedtop;
pub mod linalg;
pub mod montecarlo;
pub mod presets;
pub mod rng;
pub mod tolerance;

pub use ensembles::{Beta, DensityMatrix, EnsembleParams};
pub use error::{Error, Result};
pub use kickedtop::{KickedTopConfig, Spin, StateVector};
pub use linalg::{ComplexMatrix, EigenDecomposition, HermitianMatrix, C64};
pub use montecarlo::{ComparisonReport, ExperimentKind, ExperimentSpec, SummaryStat};
pub use presets::FixedMatrix;
pub use rng::RngStream;
pub use tolerance::Tolerances;

//! Named fixed matrices used as the comparison point in distance experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::{Beta, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedMatrix {
    /// The published 2x2 comparison matrix (real for β = 1, complex for β = 2).
    ReferenceX2,
    /// The published 5x5 comparison matrix.
    ReferenceX5,
    /// `I / n`.
    MaximallyMixed,
    /// `|0><0|`.
    Pure,
    Identity,
    Zero,
}

impl FixedMatrix {
    pub const ALL: [FixedMatrix; 6] = [
        FixedMatrix::ReferenceX2,
        FixedMatrix::ReferenceX5,
        FixedMatrix::MaximallyMixed,
        FixedMatrix::Pure,
        FixedMatrix::Identity,
        FixedMatrix::Zero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixedMatrix::ReferenceX2 => "reference-x2",
            FixedMatrix::ReferenceX5 => "reference-x5",
            FixedMatrix::MaximallyMixed => "maximally-mixed",
            FixedMatrix::Pure => "pure",
            FixedMatrix::Identity => "identity",
            FixedMatrix::Zero => "zero",
        }
    }

    /// The reference preset for dimension `n`, when there is one.
    pub fn reference_for(n: usize) -> Option<FixedMatrix> {
        match n {
            2 => Some(FixedMatrix::ReferenceX2),
            5 => Some(FixedMatrix::ReferenceX5),
            _ => None,
        }
    }

    pub fn build(self, beta: Beta, n: usize) -> Result<HermitianMatrix> {
        let fixed_dim = |want: usize| {
            if n == want {
                Ok(())
            } else {
                Err(Error::ShapeError(format!("preset {} is {want}x{want}, requested n = {n}", self.name())))
            }
        };
        match self {
            FixedMatrix::ReferenceX2 => {
                fixed_dim(2)?;
                Ok(reference_x2(beta))
            }
            FixedMatrix::ReferenceX5 => {
                fixed_dim(5)?;
                Ok(reference_x5(beta))
            }
            FixedMatrix::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(n).into_hermitian()),
            FixedMatrix::Pure => {
                let mut diag = vec![0.0; n];
                diag[0] = 1.0;
                Ok(HermitianMatrix::from_real_diag(&diag))
            }
            FixedMatrix::Identity => Ok(HermitianMatrix::identity(n)),
            FixedMatrix::Zero => Ok(HermitianMatrix::zeros(n)),
        }
    }
}

impl fmt::Display for FixedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixedMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FixedMatrix::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::SpecError(format!("unknown fixed-matrix preset {s:?}")))
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn reference_x2(beta: Beta) -> HermitianMatrix {
    let off = match beta {
        Beta::Real => c(1.0, 0.0),
        Beta::Complex => c(1.0, 3.0),
    };
    HermitianMatrix::from_upper(2, |r, col| match (r, col) {
        (0, 0) => c(2.0, 0.0),
        (0, 1) => off,
        _ => c(-0.5, 0.0),
    })
}

fn reference_x5(beta: Beta) -> HermitianMatrix {
    let data: Vec<C64> = match beta {
        Beta::Real => [
            [3., 1., 4., 6., 8.],
            [1., -5., 4., 7., -1.],
            [4., 4., 2., 1., 3.],
            [6., 7., 1., 9., 0.],
            [8., -1., 3., 0., -2.],
        ]
        .iter()
        .flatten()
        .map(|&x| c(x, 0.0))
        .collect(),
        Beta::Complex => {
            let s3 = 3f64.sqrt();
            vec![
                c(3., 0.), c(1., 1.), c(4., -0.5), c(6., s3), c(8., -1.),
                c(1., -1.), c(-5., 0.), c(4., 3.), c(7., 0.), c(-1., 0.),
                c(4., 0.5), c(4., -3.), c(2., 0.), c(2., -3.), c(3., 0.),
                c(6., -s3), c(7., 0.), c(2., 3.), c(9., 0.), c(0., 0.2),
                c(8., 1.), c(-1., 0.), c(3., 0.), c(0., -0.2), c(-2., 0.),
            ]
        }
    };
    HermitianMatrix::new(ComplexMatrix::from_vec(5, 5, data).expect("5x5 preset"))
        .expect("published matrix is Hermitian")
}

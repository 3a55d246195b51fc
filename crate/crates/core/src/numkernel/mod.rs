//! Dense complex-matrix primitives shared by every other module.

mod eigen;
mod matrix;
mod nullspace;

use serde::{Deserialize, Serialize};

pub use eigen::{herm_eig, joint_diagonalize, operator_norm, HermitianEigen, JACOBI_SWEEPS};
pub use matrix::{ComplexMatrix, C64};
pub use nullspace::{nullspace, orthonormalize_hs, rank, right_singular, RectMatrix, RightSingular};

pub(crate) use matrix::{vec_dot, vec_norm, ONE, ZERO};

use crate::error::{Error, Result};

/// Numerical cutoffs used throughout the crate.
///
/// * `rank_tol` - relative singular-value cutoff for kernels and null atoms
/// * `residual_tol` - relative matrix-residual cutoff
/// * `value_tol` - scalar equality cutoff
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub value_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            residual_tol: 1e-8,
            value_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(rank_tol: f64, residual_tol: f64, value_tol: f64) -> Result<Self> {
        let t = Self {
            rank_tol,
            residual_tol,
            value_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
            ("value_tol", self.value_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {v} must lie in the open interval (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

//! Periodic cell problem defining the effective wrinkled-plate energy.
//!
//! For a macroscopic membrane strain `G` and curvature `F` the correctors
//! `(u1, v1)` minimize
//!
//! ```text
//! I(u1, v1) = int_Y Q2(G + F theta0 + sym grad u1 - D^2 v1 theta0) + Q2(D^2 v1) / 12 dy
//! ```
//!
//! over mean-zero periodic fields. The minimum is a quadratic form in `(G, F)`,
//! represented by the 6x6 matrix of [`EffectiveForm`].

mod effective;
mod operator;
mod oracle;
mod solve;

pub use effective::{assemble_effective_matrix, EffectiveForm, BASIS_NAMES, CONVENTION, KERNEL_EIGEN_TOL};
pub use operator::{cell_operator_apply, CellOperator, CellVector};
pub use oracle::{cell_oracle, OracleParams, OracleResult};
pub use solve::{effective_value, solve_cell, zero_corrector_bound, CorrectorSolution};

use crate::elastic::SymMat2;
use crate::error::Error;
use crate::scalar::Scalar;

/// Macroscopic load `(G, F)` of a cell problem.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellLoad<T> {
    pub g: SymMat2<T>,
    pub f: SymMat2<T>,
}

impl<T: Scalar> CellLoad<T> {
    pub fn new(g: SymMat2<T>, f: SymMat2<T>) -> Self {
        Self { g, f }
    }

    pub fn zero() -> Self {
        Self::new(SymMat2::zero(), SymMat2::zero())
    }

    /// From `z = (G11, G22, sqrt2 G12, F11, F22, sqrt2 F12)`.
    pub fn from_scaled(z: [T; 6]) -> Self {
        Self {
            g: SymMat2::from_scaled([z[0], z[1], z[2]]),
            f: SymMat2::from_scaled([z[3], z[4], z[5]]),
        }
    }

    pub fn scaled(&self) -> [T; 6] {
        let g = self.g.scaled();
        let f = self.f.scaled();
        [g[0], g[1], g[2], f[0], f[1], f[2]]
    }

    /// `|G|^2 + |F|^2` (Frobenius).
    pub fn norm_sq(&self) -> T {
        self.g.norm_sq() + self.f.norm_sq()
    }

    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        Self::new(self.g * a + other.g * b, self.f * a + other.f * b)
    }
}

/// Discretization and solver settings for the spectral cell solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams<T> {
    /// Corrector band limit `N`: modes with `|k|_inf <= N`.
    pub band: usize,
    /// Relative residual target of the preconditioned conjugate gradients.
    pub cg_tol: T,
    pub max_iter: usize,
    /// Zero-pad the product grid so products with `theta0` are integrated exactly.
    pub dealias: bool,
}

impl<T: Scalar> CellParams<T> {
    pub fn new(band: usize) -> Self {
        Self {
            band,
            cg_tol: T::lit(1e-10),
            max_iter: 2000,
            dealias: true,
        }
    }

    pub fn validate(&self, shape_band: usize) -> Result<(), Error> {
        if self.band < shape_band.max(1) {
            return Err(Error::InvalidParams(format!(
                "corrector band limit {} is below the shape band limit {}",
                self.band,
                shape_band.max(1)
            )));
        }
        if !(self.cg_tol > T::zero() && self.cg_tol < T::one()) {
            return Err(Error::InvalidParams(format!("cg_tol must lie in (0, 1), got {}", self.cg_tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParams("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

//! Homogenized Foppl-von Karman plates with periodic wrinkles.
//!
//! The crate computes the effective quadratic energy of a periodically wrinkled
//! plate from a cell problem on the unit torus, and minimizes the resulting
//! homogenized plate functional under transverse loads.

// NaN-rejecting comparisons and index loops over small matrices are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cell;
pub mod descent;
pub mod elastic;
pub mod error;
pub mod io;
pub mod linalg;
pub mod plate;
pub mod scalar;
pub mod shape;
pub mod spectral;

pub use elastic::{ElasticModel, ElasticTensor3, IsotropicModuli, PlaneForm, SymMat2};
pub use error::Error;
pub use scalar::Scalar;
pub use shape::{KernelBasis, ShapeFunction, ShapeSpec};
pub use cell::{CellLoad, CellParams, CorrectorSolution, EffectiveForm};
pub use plate::{EnergyBreakdown, LoadSpec, PlateDomain, PlateSolution, PlateState};

pub type SymMat2F64 = SymMat2<f64>;
pub type PlaneFormF64 = PlaneForm<f64>;
pub type ElasticModelF64 = ElasticModel<f64>;
pub type ShapeFunctionF64 = ShapeFunction<f64>;
pub type CellLoadF64 = CellLoad<f64>;
pub type CellParamsF64 = CellParams<f64>;
pub type CorrectorSolutionF64 = CorrectorSolution<f64>;
pub type EffectiveFormF64 = EffectiveForm<f64>;
pub type PlateDomainF64 = PlateDomain<f64>;
pub type PlateStateF64 = PlateState<f64>;
pub type LoadSpecF64 = LoadSpec<f64>;
pub type PlateSolutionF64 = PlateSolution<f64>;

pub type PlaneFormF32 = PlaneForm<f32>;
pub type ShapeFunctionF32 = ShapeFunction<f32>;
pub type EffectiveFormF32 = EffectiveForm<f32>;

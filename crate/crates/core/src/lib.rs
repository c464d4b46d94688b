//! Semi-discrete discontinuous Galerkin schemes for periodic linear
//! advection, with Fourier-symbol analysis of their superconvergence.
//!
//! Every numerical routine is generic over [`Real`]; the `*64` aliases below
//! fix the scalar to `f64`.

pub mod basis;
pub mod error;
pub mod error_lab;
pub mod field;
pub mod linalg;
pub mod presets;
pub mod projections;
pub mod report;
pub mod scalar;
pub mod solver;
pub mod symbol;

pub use basis::{Grid, ScaledBasis};
pub use error::{Error, Result};
pub use error_lab::{
    asymptotic_error, convergence_study, decompose_error, transient_decay, transient_profile, ConvergenceTable,
    ErrorDecomposition, Problem,
};
pub use field::{FieldRef, SmoothField};
pub use presets::{Preset, PresetParams};
pub use projections::{initialize, DGState, InitKind};
pub use scalar::{DoubleDouble, Real};
pub use solver::{AdvectionSystem, ButcherTableau, DGOperator, FluxSpec};
pub use symbol::{eigendecompose, spectral_gap, EigenSystem, SymbolMatrix};

pub type Grid64 = Grid<f64>;
pub type DGState64 = DGState<f64>;
pub type Problem64 = Problem<f64>;
pub type FluxSpec64 = FluxSpec<f64>;
pub type AdvectionSystem64 = AdvectionSystem<f64>;
pub type DGOperator64 = DGOperator<f64>;
pub type SymbolMatrix64 = SymbolMatrix<f64>;
pub type EigenSystem64 = EigenSystem<f64>;
pub type PresetParams64 = PresetParams<f64>;

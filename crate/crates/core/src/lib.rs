//! Lower bounds on the quantum Fisher information of collective spin
//! systems from a few measured expectation values.

pub mod analytic;
pub mod bound;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod random;
pub mod scalar;
pub mod spin;
pub mod validation;

pub use error::{QfiError, Result};

pub type Operator = linalg::HermitianOperator<f64>;
pub type State = linalg::StateVector<f64>;
pub type Density = linalg::DensityMatrix<f64>;
pub type Problem = bound::BoundProblem<f64>;
pub type Outcome = bound::BoundResult<f64>;
pub type Spins = spin::CollectiveSpinSet<f64>;
pub type Operator32 = linalg::HermitianOperator<f32>;
pub type State32 = linalg::StateVector<f32>;

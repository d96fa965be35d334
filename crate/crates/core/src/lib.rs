//! Structure-preserving integration of ODEs in linear-gradient form.
//!
//! A system `ẋ = f(x)` with a first integral or Lyapunov function `V` is
//! written as `ẋ = L(x)∇V(x)`. Replacing `∇V` by a discrete gradient gives a
//! map that conserves `V` (antisymmetric `L`) or never increases it
//! (negative semidefinite `L`) up to the nonlinear solver tolerance.
//!
//! ```
//! use dgtk::{systems, step, DiscreteGradientScheme, LTildePolicy, SolverConfig, state};
//!
//! let sys = systems::build("pendulum", &Default::default()).unwrap();
//! let x = state(&[2.0, 0.0]).unwrap();
//! let (x1, _) = step(&sys, &x, 0.1, DiscreteGradientScheme::Midpoint,
//!                    LTildePolicy::Midpoint, &SolverConfig::default()).unwrap();
//! let v = sys.v();
//! assert!((v.value(&x1).unwrap() - v.value(&x).unwrap()).abs() < 1e-12);
//! ```

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discgrad;
pub mod error;
pub mod expr;
pub mod field;
pub mod lingrad;
pub mod multigrad;
pub mod sampling;
pub mod stepper;
pub mod structure;
pub mod sysfile;
pub mod system;
pub mod systems;
pub mod trajectory;

pub use discgrad::DiscreteGradientScheme;
pub use error::{Error, Result};
pub use field::{state, ScalarField, StateVector, StructureMatrixField, VectorField};
pub use lingrad::{build_linear_gradient_system, default_l, transform_l, verify_jacobi};
pub use multigrad::{multi_integrate, multi_step, MultiLinearGradientSystem, Tensor, TensorField};
pub use stepper::{
    empirical_order, integrate, reference_integrate, solve_implicit, solve_implicit_with_floor, step, LTildePolicy,
    SolverConfig, SolverMethod,
};
pub use structure::{classify_matrix, StructureClass};
pub use system::{LinearGradientSystem, Params};
pub use trajectory::{StepDiagnostics, Trajectory};

/// Matrix type used for structure matrices.
pub use nalgebra::DMatrix;

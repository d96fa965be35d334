//! Scalar, vector and matrix fields over `ℝⁿ`.
//!
//! Fields are cheap to clone (the closures are reference counted) and
//! immutable, so a system can be shared between threads.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::structure::StructureClass;

/// A point in phase space.
pub type StateVector = DVector<f64>;

type ScalarFn = dyn Fn(&StateVector) -> Result<f64> + Send + Sync;
type VectorFn = dyn Fn(&StateVector) -> Result<StateVector> + Send + Sync;
type MatrixFn = dyn Fn(&StateVector) -> Result<DMatrix<f64>> + Send + Sync;

/// Build a state from components, rejecting empty or non-finite input.
pub fn state(components: &[f64]) -> Result<StateVector> {
    let x = StateVector::from_column_slice(components);
    check_state(&x, x.len())?;
    Ok(x)
}

/// Check that `x` is a finite vector of dimension `dim` (`dim >= 1`).
pub fn check_state(x: &StateVector, dim: usize) -> Result<()> {
    if dim == 0 || x.is_empty() {
        return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
    }
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state vector"));
    }
    Ok(())
}

/// A differentiable scalar function `V` together with its exact gradient.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    value: Arc<ScalarFn>,
    gradient: Arc<VectorFn>,
}

impl ScalarField {
    pub fn new<F, G>(dim: usize, value: F, gradient: G) -> Self
    where
        F: Fn(&StateVector) -> Result<f64> + Send + Sync + 'static,
        G: Fn(&StateVector) -> Result<StateVector> + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    /// Convenience constructor for infallible closures.
    pub fn from_fns<F, G>(dim: usize, value: F, gradient: G) -> Self
    where
        F: Fn(&StateVector) -> f64 + Send + Sync + 'static,
        G: Fn(&StateVector) -> StateVector + Send + Sync + 'static,
    {
        Self::new(dim, move |x| Ok(value(x)), move |x| Ok(gradient(x)))
    }

    /// The coordinate function `x ↦ x_i` (zero-based `i`).
    pub fn coordinate(dim: usize, i: usize) -> Self {
        assert!(i < dim, "coordinate index out of range");
        Self::from_fns(
            dim,
            move |x| x[i],
            move |_| {
                let mut e = StateVector::zeros(dim);
                e[i] = 1.0;
                e
            },
        )
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::from_fns(dim, move |_| c, move |_| StateVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &StateVector) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let v = (self.value)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("scalar field value"));
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &StateVector) -> Result<StateVector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let g = (self.gradient)(x)?;
        if g.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: g.len(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field gradient"));
        }
        Ok(g)
    }

    /// Largest relative mismatch between the gradient and central
    /// differences of the value with step `h`.
    ///
    /// The mismatch of each component is measured against
    /// `max(1, |∂V/∂x_i|)`.
    pub fn gradient_mismatch(&self, x: &StateVector, h: f64) -> Result<f64> {
        let g = self.gradient(x)?;
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (self.value(&xp)? - self.value(&xm)?) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
        Ok(worst)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// A vector field `f : ℝⁿ → ℝⁿ`.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    value: Arc<VectorFn>,
}

impl VectorField {
    pub fn new<F>(dim: usize, value: F) -> Self
    where
        F: Fn(&StateVector) -> Result<StateVector> + Send + Sync + 'static,
    {
        VectorField {
            dim,
            value: Arc::new(value),
        }
    }

    pub fn from_fn<F>(dim: usize, value: F) -> Self
    where
        F: Fn(&StateVector) -> StateVector + Send + Sync + 'static,
    {
        Self::new(dim, move |x| Ok(value(x)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &StateVector) -> Result<StateVector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let v = (self.value)(x)?;
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("vector field value"));
        }
        Ok(v)
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// A matrix field `L(x)` with the structure class it is declared to have.
#[derive(Clone)]
pub struct StructureMatrixField {
    dim: usize,
    value: Arc<MatrixFn>,
    declared: StructureClass,
}

impl StructureMatrixField {
    pub fn new<F>(dim: usize, declared: StructureClass, value: F) -> Self
    where
        F: Fn(&StateVector) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        StructureMatrixField {
            dim,
            value: Arc::new(value),
            declared,
        }
    }

    pub fn from_fn<F>(dim: usize, declared: StructureClass, value: F) -> Self
    where
        F: Fn(&StateVector) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::new(dim, declared, move |x| Ok(value(x)))
    }

    /// A state-independent matrix.
    pub fn constant(m: DMatrix<f64>, declared: StructureClass) -> Self {
        let dim = m.nrows();
        Self::from_fn(dim, declared, move |_| m.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn declared_class(&self) -> StructureClass {
        self.declared
    }

    pub fn with_declared_class(mut self, declared: StructureClass) -> Self {
        self.declared = declared;
        self
    }

    pub fn eval(&self, x: &StateVector) -> Result<DMatrix<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let m = (self.value)(x)?;
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.nrows().max(m.ncols()),
            });
        }
        if m.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("structure matrix"));
        }
        Ok(m)
    }
}

impl fmt::Debug for StructureMatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureMatrixField")
            .field("dim", &self.dim)
            .field("declared", &self.declared)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_rejects_bad_components() {
        assert!(state(&[]).is_err());
        assert!(state(&[1.0, f64::NAN]).is_err());
        assert!(state(&[1.0, f64::INFINITY]).is_err());
        assert_eq!(state(&[1.0, 2.0]).unwrap().len(), 2);
    }

    #[test]
    fn scalar_field_checks_dimension() {
        let v = ScalarField::from_fns(2, |x| x.norm_squared(), |x| 2.0 * x);
        let x3 = StateVector::zeros(3);
        assert!(matches!(v.value(&x3), Err(Error::DimensionMismatch { .. })));
        assert!(v.gradient(&StateVector::from_vec(vec![1.0, 2.0])).is_ok());
    }

    #[test]
    fn gradient_mismatch_detects_wrong_gradient() {
        let good = ScalarField::from_fns(
            2,
            |x| x[0].sin() * x[1],
            |x| StateVector::from_vec(vec![x[0].cos() * x[1], x[0].sin()]),
        );
        let bad = ScalarField::from_fns(
            2,
            |x| x[0].sin() * x[1],
            |x| StateVector::from_vec(vec![x[0].cos(), x[0].sin()]),
        );
        let x = StateVector::from_vec(vec![0.3, 1.7]);
        assert!(good.gradient_mismatch(&x, 1e-5).unwrap() < 1e-6);
        assert!(bad.gradient_mismatch(&x, 1e-5).unwrap() > 1e-2);
    }

    #[test]
    fn non_finite_outputs_are_errors() {
        let v = ScalarField::from_fns(
            1,
            |x| 1.0 / x[0],
            |x| -StateVector::from_element(1, 1.0 / (x[0] * x[0])),
        );
        assert!(v.value(&StateVector::zeros(1)).is_err());
        let f = VectorField::from_fn(1, |x| x.map(f64::ln));
        assert!(f.eval(&StateVector::from_element(1, -1.0)).is_err());
    }
}

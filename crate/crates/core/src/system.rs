use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{ScalarField, StateVector, StructureMatrixField, VectorField};
use crate::structure::StructureClass;

/// Named real constants of a model.
pub type Params = BTreeMap<String, f64>;

/// An ODE written as `ẋ = L(x)∇V(x)`.
///
/// `raw_f` is the right-hand side in its original form, kept so the
/// representation can be checked against it. `monitors` are extra
/// functions recorded along trajectories (a Casimir, for instance).
#[derive(Debug, Clone)]
pub struct LinearGradientSystem {
    name: String,
    l: StructureMatrixField,
    v: ScalarField,
    raw_f: Option<VectorField>,
    parameters: Params,
    monitors: Vec<(String, ScalarField)>,
}

impl LinearGradientSystem {
    pub fn new(name: impl Into<String>, l: StructureMatrixField, v: ScalarField) -> Result<Self> {
        if l.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                got: l.dim(),
            });
        }
        if v.dim() == 0 {
            return Err(Error::InvalidArgument("system dimension must be at least 1".into()));
        }
        Ok(LinearGradientSystem {
            name: name.into(),
            l,
            v,
            raw_f: None,
            parameters: Params::new(),
            monitors: Vec::new(),
        })
    }

    pub fn with_raw_f(mut self, f: VectorField) -> Result<Self> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.dim(),
            });
        }
        self.raw_f = Some(f);
        Ok(self)
    }

    pub fn with_parameters(mut self, parameters: Params) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn with_monitor(mut self, name: impl Into<String>, field: ScalarField) -> Result<Self> {
        if field.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: field.dim(),
            });
        }
        self.monitors.push((name.into(), field));
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn l(&self) -> &StructureMatrixField {
        &self.l
    }

    pub fn v(&self) -> &ScalarField {
        &self.v
    }

    pub fn raw_f(&self) -> Option<&VectorField> {
        self.raw_f.as_ref()
    }

    pub fn parameters(&self) -> &Params {
        &self.parameters
    }

    pub fn monitors(&self) -> &[(String, ScalarField)] {
        &self.monitors
    }

    pub fn declared_class(&self) -> StructureClass {
        self.l.declared_class()
    }

    /// `V` followed by every monitor: the functions recorded on a trajectory.
    pub fn tracked(&self) -> Vec<ScalarField> {
        std::iter::once(self.v.clone())
            .chain(self.monitors.iter().map(|(_, f)| f.clone()))
            .collect()
    }

    /// `L(x)∇V(x)`.
    pub fn rhs(&self, x: &StateVector) -> Result<StateVector> {
        Ok(self.l.eval(x)? * self.v.gradient(x)?)
    }

    /// The right-hand side as a vector field: `raw_f` when present,
    /// otherwise `L∇V`.
    pub fn vector_field(&self) -> VectorField {
        if let Some(f) = &self.raw_f {
            return f.clone();
        }
        let sys = self.clone();
        VectorField::new(self.dim(), move |x| sys.rhs(x))
    }

    /// `‖L∇V − f‖ / (1 + ‖f‖)` at `x`, or `None` without a raw `f`.
    pub fn reconstruction_residual(&self, x: &StateVector) -> Result<Option<f64>> {
        let Some(f) = &self.raw_f else {
            return Ok(None);
        };
        let fx = f.eval(x)?;
        let lv = self.rhs(x)?;
        Ok(Some((lv - &fx).norm() / (1.0 + fx.norm())))
    }
}

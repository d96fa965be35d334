use std::sync::Arc;

use nalgebra::DMatrix;

use super::Expr;
use crate::error::{Error, Result};
use crate::field::{ScalarField, StateVector, StructureMatrixField, VectorField};
use crate::structure::StructureClass;
use crate::system::Params;

fn bind_checked(e: &Expr, dim: usize, params: &Params) -> Result<Expr> {
    if e.arity() > dim {
        return Err(Error::VariableOutOfRange { index: e.arity(), dim });
    }
    e.bind(params)
}

/// A scalar field whose gradient is the symbolic derivative of `e`.
pub fn scalar_field(e: &Expr, dim: usize, params: &Params) -> Result<ScalarField> {
    let value = Arc::new(bind_checked(e, dim, params)?);
    let gradient: Arc<Vec<Expr>> = Arc::new((0..dim).map(|i| value.differentiate(i)).collect());
    let empty = Params::new();
    Ok(ScalarField::new(
        dim,
        {
            let value = Arc::clone(&value);
            move |x: &StateVector| value.eval(x.as_slice(), &Params::new())
        },
        move |x: &StateVector| {
            let mut g = StateVector::zeros(dim);
            for (gi, d) in g.iter_mut().zip(gradient.iter()) {
                *gi = d.eval(x.as_slice(), &empty)?;
            }
            Ok(g)
        },
    ))
}

/// A vector field with one expression per component.
pub fn vector_field(components: &[Expr], dim: usize, params: &Params) -> Result<VectorField> {
    if components.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: components.len(),
        });
    }
    let bound: Vec<Expr> = components
        .iter()
        .map(|e| bind_checked(e, dim, params))
        .collect::<Result<_>>()?;
    Ok(VectorField::new(dim, move |x| {
        let empty = Params::new();
        let mut out = StateVector::zeros(dim);
        for (o, e) in out.iter_mut().zip(&bound) {
            *o = e.eval(x.as_slice(), &empty)?;
        }
        Ok(out)
    }))
}

/// A matrix field from row-major entries (`dim * dim` expressions).
pub fn matrix_field(
    entries: &[Expr],
    dim: usize,
    params: &Params,
    declared: StructureClass,
) -> Result<StructureMatrixField> {
    if entries.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            got: entries.len(),
        });
    }
    let bound: Vec<Expr> = entries
        .iter()
        .map(|e| bind_checked(e, dim, params))
        .collect::<Result<_>>()?;
    Ok(StructureMatrixField::new(dim, declared, move |x| {
        let empty = Params::new();
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = bound[r * dim + c].eval(x.as_slice(), &empty)?;
            }
        }
        Ok(m)
    }))
}

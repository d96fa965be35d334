//! Structure classes of the matrix `L` in `ẋ = L(x)∇V(x)`.
//!
//! Only the symmetric part of `L` enters `wᵀLw`, so definiteness is decided
//! from the eigenvalues of `(L + Lᵀ)/2`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// What the matrix `L` says about `V`: antisymmetric means `V` is an
/// integral, negative (semi)definite means a (weak) Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureClass {
    Antisymmetric,
    NegativeSemidefinite,
    NegativeDefinite,
    Unclassified,
}

impl StructureClass {
    /// Whether a matrix of class `self` also belongs to class `weaker`.
    ///
    /// Every antisymmetric or negative definite matrix is negative
    /// semidefinite, and every matrix is `Unclassified`.
    pub fn implies(self, weaker: StructureClass) -> bool {
        use StructureClass::*;
        match weaker {
            Unclassified => true,
            NegativeSemidefinite => matches!(self, Antisymmetric | NegativeSemidefinite | NegativeDefinite),
            NegativeDefinite => self == NegativeDefinite,
            Antisymmetric => self == Antisymmetric,
        }
    }

    /// True for the classes under which `V` cannot increase.
    pub fn is_conservative(self) -> bool {
        self == StructureClass::Antisymmetric
    }

    /// Combine per-point classes into the strongest class that holds at
    /// every point.
    pub fn meet(self, other: StructureClass) -> StructureClass {
        use StructureClass::*;
        if self == other {
            self
        } else if self.implies(NegativeSemidefinite) && other.implies(NegativeSemidefinite) {
            NegativeSemidefinite
        } else {
            Unclassified
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructureClass::Antisymmetric => "antisymmetric",
            StructureClass::NegativeSemidefinite => "negative-semidefinite",
            StructureClass::NegativeDefinite => "negative-definite",
            StructureClass::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "antisymmetric" | "skew" => Ok(StructureClass::Antisymmetric),
            "negative-semidefinite" | "nsd" => Ok(StructureClass::NegativeSemidefinite),
            "negative-definite" | "nd" => Ok(StructureClass::NegativeDefinite),
            "unclassified" => Ok(StructureClass::Unclassified),
            other => Err(Error::InvalidArgument(format!("unknown structure class `{other}`"))),
        }
    }
}

/// Classify a square matrix with absolute tolerance `tol`.
///
/// Antisymmetric if `max |M + Mᵀ| <= tol` (this wins for the zero matrix);
/// otherwise negative definite if every eigenvalue of the symmetric part is
/// below `-tol`, negative semidefinite if every eigenvalue is at most `tol`,
/// and unclassified otherwise.
pub fn classify_matrix(m: &DMatrix<f64>, tol: f64) -> Result<StructureClass> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }

    let sum = m + m.transpose();
    if sum.amax() <= tol {
        return Ok(StructureClass::Antisymmetric);
    }
    let sym = sum * 0.5;
    let eigenvalues = sym.symmetric_eigenvalues();
    if eigenvalues.iter().all(|&l| l < -tol) {
        Ok(StructureClass::NegativeDefinite)
    } else if eigenvalues.iter().all(|&l| l <= tol) {
        Ok(StructureClass::NegativeSemidefinite)
    } else {
        Ok(StructureClass::Unclassified)
    }
}

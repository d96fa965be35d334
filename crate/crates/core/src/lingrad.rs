//! Linear-gradient representations `ẋ = L(x)∇V(x)`.
//!
//! Given `f` and a function `V` with `f·∇V` of one sign, [`default_l`]
//! produces a matrix reproducing `f` whose class (antisymmetric, negative
//! semidefinite, negative definite) follows that sign. The construction is
//! singular at critical points of `V`, so it fails there instead of
//! returning garbage.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{ScalarField, StateVector, StructureMatrixField, VectorField};
use crate::sampling::halton_box;
use crate::structure::{classify_matrix, StructureClass};
use crate::system::LinearGradientSystem;

/// Smallest `‖∇V‖` accepted by [`default_l`].
pub const DEFAULT_GRAD_EPS: f64 = 1e-12;

/// The matrix
/// `L_ij = (f_i v_j - v_i f_j + δ_ij f·v) / ‖v‖²`,
/// which satisfies `L v = f` and `wᵀLw = ‖w‖² (f·v)/‖v‖²`.
pub fn default_l(f: &StateVector, grad_v: &StateVector, eps_grad: f64) -> Result<DMatrix<f64>> {
    if f.len() != grad_v.len() {
        return Err(Error::DimensionMismatch {
            expected: grad_v.len(),
            got: f.len(),
        });
    }
    let norm = grad_v.norm();
    if !(norm > eps_grad) {
        return Err(Error::GradientTooSmall {
            norm,
            threshold: eps_grad,
        });
    }
    let n = f.len();
    let dot = f.dot(grad_v);
    let inv = 1.0 / grad_v.norm_squared();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { dot } else { 0.0 };
        (f[i] * grad_v[j] - grad_v[i] * f[j] + diag) * inv
    }))
}

/// Where and how to sample when a structure class has to be detected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSampling {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Relative tolerance on `f·∇V`, scaled by `1 + ‖f‖‖∇V‖`.
    pub tol: f64,
}

impl Default for ClassSampling {
    fn default() -> Self {
        ClassSampling {
            lo: -2.0,
            hi: 2.0,
            points: 1000,
            tol: 1e-10,
        }
    }
}

impl ClassSampling {
    pub fn cloud(&self, dim: usize) -> Vec<StateVector> {
        halton_box(dim, self.points, self.lo, self.hi)
    }
}

/// Class implied by the sign of `f·∇V` over a point cloud.
///
/// Points where `f`, `∇V` cannot be evaluated, or where `‖∇V‖` is below
/// `eps_grad`, are skipped. An empty sample is `Unclassified`.
pub fn detect_rate_class(f: &VectorField, v: &ScalarField, sampling: &ClassSampling, eps_grad: f64) -> StructureClass {
    let mut all_zero = true;
    let mut all_nonpositive = true;
    let mut all_negative = true;
    let mut seen = 0usize;
    for x in sampling.cloud(v.dim()) {
        let (Ok(fx), Ok(g)) = (f.eval(&x), v.gradient(&x)) else {
            continue;
        };
        if g.norm() <= eps_grad {
            continue;
        }
        seen += 1;
        let dot = fx.dot(&g);
        let band = sampling.tol * (1.0 + fx.norm() * g.norm());
        all_zero &= dot.abs() <= band;
        all_nonpositive &= dot <= band;
        all_negative &= dot < -band || fx.norm() <= band;
    }
    if seen == 0 {
        StructureClass::Unclassified
    } else if all_zero {
        StructureClass::Antisymmetric
    } else if all_negative {
        StructureClass::NegativeDefinite
    } else if all_nonpositive {
        StructureClass::NegativeSemidefinite
    } else {
        StructureClass::Unclassified
    }
}

/// Rewrite `ẋ = f(x)` with the known function `V` in linear-gradient form.
///
/// `L(x)` is [`default_l`] evaluated pointwise, so evaluating it at a
/// critical point of `V` fails with [`Error::GradientTooSmall`]. The
/// declared class comes from [`detect_rate_class`].
pub fn build_linear_gradient_system(
    name: impl Into<String>,
    f: VectorField,
    v: ScalarField,
    sampling: &ClassSampling,
    eps_grad: f64,
) -> Result<LinearGradientSystem> {
    if f.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: f.dim(),
        });
    }
    let class = detect_rate_class(&f, &v, sampling, eps_grad);
    let (lf, lv) = (f.clone(), v.clone());
    let l = StructureMatrixField::new(v.dim(), class, move |x| {
        default_l(&lf.eval(x)?, &lv.gradient(x)?, eps_grad)
    });
    LinearGradientSystem::new(name, l, v)?.with_raw_f(f)
}

/// Outcome of classifying a matrix field over a point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassReport {
    /// Strongest class holding at every evaluated point.
    pub class: StructureClass,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Classify `L` at each point and combine with [`StructureClass::meet`].
/// Points where `L` cannot be evaluated are counted as skipped.
pub fn detect_matrix_class(l: &StructureMatrixField, points: &[StateVector], tol: f64) -> Result<ClassReport> {
    let mut class: Option<StructureClass> = None;
    let mut skipped = 0;
    for x in points {
        let Ok(m) = l.eval(x) else {
            skipped += 1;
            continue;
        };
        let c = classify_matrix(&m, tol)?;
        class = Some(class.map_or(c, |acc| acc.meet(c)));
    }
    Ok(ClassReport {
        class: class.unwrap_or(StructureClass::Unclassified),
        evaluated: points.len() - skipped,
        skipped,
    })
}

/// `dC · L · dCᵀ`, the structure matrix after the change of coordinates
/// with Jacobian `dC`.
pub fn transform_l(l: &DMatrix<f64>, dc: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !l.is_square() || !dc.is_square() || l.nrows() != dc.nrows() {
        return Err(Error::InvalidArgument(format!(
            "incompatible shapes {}x{} and {}x{}",
            l.nrows(),
            l.ncols(),
            dc.nrows(),
            dc.ncols()
        )));
    }
    let n = dc.nrows() as i32;
    let scale = dc.norm().max(f64::MIN_POSITIVE).powi(n);
    let det = dc.clone().lu().determinant();
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::InvalidArgument(format!(
            "coordinate Jacobian is singular (det = {det:e})"
        )));
    }
    Ok(dc * l * dc.transpose())
}

/// Largest residual of the Jacobi identity
/// `Ω_jk ∂_k Ω_lm + Ω_lk ∂_k Ω_mj + Ω_mk ∂_k Ω_jl = 0`
/// over all `(j, l, m)`, with `∂_k` by central differences of step `h`.
pub fn verify_jacobi(omega: &StructureMatrixField, x: &StateVector, h: f64) -> Result<f64> {
    let n = omega.dim();
    let w = omega.eval(x)?;
    let mut dw = Vec::with_capacity(n);
    for k in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        dw.push((omega.eval(&xp)? - omega.eval(&xm)?) / (2.0 * h));
    }
    let mut worst = 0.0_f64;
    for j in 0..n {
        for l in 0..n {
            for m in 0..n {
                let mut r = 0.0;
                for (k, d) in dw.iter().enumerate() {
                    r += w[(j, k)] * d[(l, m)] + w[(l, k)] * d[(m, j)] + w[(m, k)] * d[(j, l)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

//! Multilinear-gradient systems `ẋ = L(x)∇V₁…∇V_m` and their brackets.
//!
//! Tensors are stored densely in row-major order, index `i₀` slowest. The
//! first slot is the output slot of the right-hand side; slot `j` (for
//! `1 <= j <= m`) is contracted with `∇V_j`.

use std::fmt;
use std::sync::Arc;

use crate::discgrad::DiscreteGradientScheme;
use crate::error::{Error, Result};
use crate::expr::{scalar_field, Expr};
use crate::field::{check_state, ScalarField, StateVector, VectorField};
use crate::sampling::halton_box;
use crate::stepper::{check_tau, march, residual_floor, solve_step, SolverConfig};
use crate::system::Params;
use crate::trajectory::{StepDiagnostics, Trajectory};

pub const MAX_TENSOR_DIM: usize = 8;
pub const MAX_TENSOR_ORDER: usize = 4;

fn check_budget(dim: usize, order: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument("tensor dimension must be at least 1".into()));
    }
    if order < 2 {
        return Err(Error::InvalidArgument(format!(
            "tensor order must be at least 2, got {order}"
        )));
    }
    if dim > MAX_TENSOR_DIM || order > MAX_TENSOR_ORDER {
        return Err(Error::TensorBudget { dim, order });
    }
    Ok(())
}

/// A dense `p`-way array with every index in `0..n`.
#[derive(Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("data", &self.data)
            .finish()
    }
}

impl Tensor {
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        check_budget(dim, order)?;
        Ok(Tensor {
            dim,
            order,
            data: vec![0.0; dim.pow(order as u32)],
        })
    }

    pub fn from_fn<F>(dim: usize, order: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> f64,
    {
        let mut t = Tensor::zeros(dim, order)?;
        let mut idx = vec![0; order];
        for k in 0..t.data.len() {
            t.unravel(k, &mut idx);
            t.data[k] = f(&idx);
        }
        Ok(t)
    }

    /// Order-2 tensor from a square matrix.
    pub fn from_matrix(m: &nalgebra::DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        Tensor::from_fn(m.nrows(), 2, |i| m[(i[0], i[1])])
    }

    /// The Levi-Civita symbol in `dim` dimensions (order `dim`).
    pub fn levi_civita(dim: usize) -> Result<Self> {
        Tensor::from_fn(dim, dim, permutation_sign)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    fn unravel(&self, mut k: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = k % self.dim;
            k /= self.dim;
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let k = self.offset(idx);
        self.data[k] = value;
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        Tensor {
            data: self.data.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise difference to `other`.
    pub fn max_diff(&self, other: &Tensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// The tensor with slots `a` and `b` exchanged.
    pub fn swap_slots(&self, a: usize, b: usize) -> Result<Tensor> {
        if a >= self.order || b >= self.order {
            return Err(Error::InvalidArgument(format!(
                "slot out of range for a tensor of order {}",
                self.order
            )));
        }
        Tensor::from_fn(self.dim, self.order, |idx| {
            let mut src = idx.to_vec();
            src.swap(a, b);
            self.get(&src)
        })
    }

    /// Largest `|T + T∘(a b)|` entry; zero iff antisymmetric in slots `a`, `b`.
    pub fn antisymmetry_defect(&self, a: usize, b: usize) -> Result<f64> {
        let swapped = self.swap_slots(a, b)?;
        Ok(self
            .data
            .iter()
            .zip(&swapped.data)
            .fold(0.0, |m, (x, y)| m.max((x + y).abs())))
    }

    /// Antisymmetry under every transposition, checked on adjacent pairs
    /// (which generate all permutations).
    pub fn is_fully_antisymmetric(&self, tol: f64) -> bool {
        (0..self.order - 1).all(|a| self.antisymmetry_defect(a, a + 1).is_ok_and(|d| d <= tol))
    }

    fn check_vectors(&self, vectors: &[&StateVector], expected: usize) -> Result<()> {
        if vectors.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: vectors.len(),
            });
        }
        for v in vectors {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Contract slots `1..p` with `vectors`, leaving slot 0 free.
    pub fn contract(&self, vectors: &[&StateVector]) -> Result<StateVector> {
        self.check_vectors(vectors, self.order - 1)?;
        let n = self.dim;
        let mut cur = self.data.clone();
        for v in vectors.iter().rev() {
            cur = cur
                .chunks_exact(n)
                .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect();
        }
        Ok(StateVector::from_vec(cur))
    }

    /// Contract every slot; `vectors[k]` goes into slot `k`.
    pub fn full_contract(&self, vectors: &[&StateVector]) -> Result<f64> {
        self.check_vectors(vectors, self.order)?;
        Ok(self.contract(&vectors[1..])?.dot(vectors[0]))
    }
}

fn permutation_sign(idx: &[usize]) -> f64 {
    let mut sign = 1.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            match idx[a].cmp(&idx[b]) {
                std::cmp::Ordering::Equal => return 0.0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

type TensorFn = dyn Fn(&StateVector) -> Result<Tensor> + Send + Sync;

/// A tensor-valued function of the state.
#[derive(Clone)]
pub struct TensorField {
    dim: usize,
    order: usize,
    value: Arc<TensorFn>,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl TensorField {
    pub fn new<F>(dim: usize, order: usize, value: F) -> Result<Self>
    where
        F: Fn(&StateVector) -> Result<Tensor> + Send + Sync + 'static,
    {
        check_budget(dim, order)?;
        Ok(TensorField {
            dim,
            order,
            value: Arc::new(value),
        })
    }

    pub fn constant(t: Tensor) -> Self {
        TensorField {
            dim: t.dim,
            order: t.order,
            value: Arc::new(move |_| Ok(t.clone())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eval(&self, x: &StateVector) -> Result<Tensor> {
        check_state(x, self.dim)?;
        let t = (self.value)(x)?;
        if t.dim != self.dim || t.order != self.order {
            return Err(Error::InvalidArgument(format!(
                "tensor field returned dim {} order {}, expected dim {} order {}",
                t.dim, t.order, self.dim, self.order
            )));
        }
        if t.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor field value"));
        }
        Ok(t)
    }
}

/// Exchange slot 0 and slot `j` of `l` (`1 <= j < order`).
pub fn slot_swap(l: &TensorField, j: usize) -> Result<TensorField> {
    if j == 0 || j >= l.order {
        return Err(Error::InvalidArgument(format!(
            "slot {j} out of range 1..={} for a tensor of order {}",
            l.order - 1,
            l.order
        )));
    }
    let inner = l.clone();
    TensorField::new(l.dim, l.order, move |x| inner.eval(x)?.swap_slots(0, j))
}

/// `{f₁, …, f_p}_L` at `x`: the full contraction of `L(x)` with the gradients.
pub fn bracket(l: &TensorField, fs: &[ScalarField], x: &StateVector) -> Result<f64> {
    if fs.len() != l.order {
        return Err(Error::DimensionMismatch {
            expected: l.order,
            got: fs.len(),
        });
    }
    let grads: Vec<StateVector> = fs.iter().map(|f| f.gradient(x)).collect::<Result<_>>()?;
    let refs: Vec<&StateVector> = grads.iter().collect();
    l.eval(x)?.full_contract(&refs)
}

/// Leibniz-rule residual for a composite in one bracket slot.
///
/// `phi` is an expression in `x1..xk` standing for `g_list[0..k]`, and
/// `others` fills the remaining `p - 1` slots in order. Returns
/// `|{…, φ(g), …} - Σᵢ ∂φ/∂gᵢ {…, gᵢ, …}|` with the composite in `slot`
/// (zero-based). All expressions must be free of unbound parameters.
pub fn leibniz_check(
    l: &TensorField,
    others: &[ScalarField],
    g_list: &[Expr],
    phi: &Expr,
    slot: usize,
    x: &StateVector,
) -> Result<f64> {
    if others.len() + 1 != l.order {
        return Err(Error::DimensionMismatch {
            expected: l.order - 1,
            got: others.len(),
        });
    }
    if slot >= l.order {
        return Err(Error::InvalidArgument(format!(
            "slot {slot} out of range for order {}",
            l.order
        )));
    }
    if phi.arity() > g_list.len() {
        return Err(Error::VariableOutOfRange {
            index: phi.arity(),
            dim: g_list.len(),
        });
    }
    let n = l.dim;
    let empty = Params::new();
    let with_slot = |f: ScalarField| {
        let mut fs = others.to_vec();
        fs.insert(slot, f);
        fs
    };

    let composite = scalar_field(&phi.substitute(g_list)?, n, &empty)?;
    let lhs = bracket(l, &with_slot(composite), x)?;

    let g_values: Vec<f64> = g_list
        .iter()
        .map(|g| g.eval(x.as_slice(), &empty))
        .collect::<Result<_>>()?;
    let mut rhs = 0.0;
    for (i, g) in g_list.iter().enumerate() {
        let weight = phi.differentiate(i).eval(&g_values, &empty)?;
        if weight != 0.0 {
            rhs += weight * bracket(l, &with_slot(scalar_field(g, n, &empty)?), x)?;
        }
    }
    Ok((lhs - rhs).abs())
}

/// A system in multilinear-gradient form with `m` functions and a fully
/// antisymmetric tensor of order `m + 1`.
#[derive(Clone)]
pub struct MultiLinearGradientSystem {
    name: String,
    l: TensorField,
    vs: Vec<ScalarField>,
    raw_f: Option<VectorField>,
    parameters: Params,
}

impl fmt::Debug for MultiLinearGradientSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiLinearGradientSystem")
            .field("name", &self.name)
            .field("dim", &self.l.dim)
            .field("m", &self.vs.len())
            .field("parameters", &self.parameters)
            .finish_non_exhaustive()
    }
}

/// Relative tolerance for the antisymmetry checks.
const ANTISYMMETRY_TOL: f64 = 1e-12;
const CHECK_POINTS: usize = 32;

fn check_antisymmetric(t: &Tensor) -> Result<()> {
    if t.is_fully_antisymmetric(ANTISYMMETRY_TOL * (1.0 + t.max_abs())) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("tensor is not fully antisymmetric".into()))
    }
}

impl MultiLinearGradientSystem {
    /// Checks orders, dimensions, and full antisymmetry of `l` on a sample
    /// of points in `[-2, 2]ⁿ`.
    pub fn new(name: impl Into<String>, l: TensorField, vs: Vec<ScalarField>) -> Result<Self> {
        if vs.is_empty() {
            return Err(Error::InvalidArgument("need at least one function".into()));
        }
        if l.order != vs.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "tensor of order {} needs {} functions, got {}",
                l.order,
                l.order - 1,
                vs.len()
            )));
        }
        if let Some(v) = vs.iter().find(|v| v.dim() != l.dim) {
            return Err(Error::DimensionMismatch {
                expected: l.dim,
                got: v.dim(),
            });
        }
        let mut checked = 0;
        for x in halton_box(l.dim, CHECK_POINTS, -2.0, 2.0) {
            if let Ok(t) = l.eval(&x) {
                check_antisymmetric(&t)?;
                checked += 1;
            }
        }
        if checked == 0 {
            return Err(Error::InvalidArgument(
                "tensor field failed at every sample point".into(),
            ));
        }
        Ok(MultiLinearGradientSystem {
            name: name.into(),
            l,
            vs,
            raw_f: None,
            parameters: Params::new(),
        })
    }

    /// Attach the original vector field the tensor form was built from.
    pub fn with_raw_f(mut self, f: VectorField) -> Result<Self> {
        if f.dim() != self.l.dim {
            return Err(Error::DimensionMismatch {
                expected: self.l.dim,
                got: f.dim(),
            });
        }
        self.raw_f = Some(f);
        Ok(self)
    }

    pub fn raw_f(&self) -> Option<&VectorField> {
        self.raw_f.as_ref()
    }

    pub fn with_parameters(mut self, parameters: Params) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.l.dim
    }

    /// Number of functions `m`.
    pub fn m(&self) -> usize {
        self.vs.len()
    }

    pub fn l(&self) -> &TensorField {
        &self.l
    }

    pub fn functions(&self) -> &[ScalarField] {
        &self.vs
    }

    pub fn parameters(&self) -> &Params {
        &self.parameters
    }
}

/// `L(x)` contracted with `∇V₁(x), …, ∇V_m(x)`.
pub fn multilinear_rhs(sys: &MultiLinearGradientSystem, x: &StateVector) -> Result<StateVector> {
    let grads: Vec<StateVector> = sys.vs.iter().map(|v| v.gradient(x)).collect::<Result<_>>()?;
    let refs: Vec<&StateVector> = grads.iter().collect();
    sys.l.eval(x)?.contract(&refs)
}

/// `W = {V, V₁, …, V_m}_L`, the rate of change of `V` along the flow.
pub fn lyapunov_bracket_w(sys: &MultiLinearGradientSystem, v: &ScalarField, x: &StateVector) -> Result<f64> {
    let mut fs = Vec::with_capacity(sys.vs.len() + 1);
    fs.push(v.clone());
    fs.extend(sys.vs.iter().cloned());
    bracket(&sys.l, &fs, x)
}

/// One step of `(x' - x)/τ = L((x + x')/2) ∇̄V₁ … ∇̄V_m`.
pub fn multi_step(
    sys: &MultiLinearGradientSystem,
    x: &StateVector,
    tau: f64,
    scheme: DiscreteGradientScheme,
    solver: &SolverConfig,
) -> Result<(StateVector, StepDiagnostics)> {
    check_tau(tau)?;
    check_state(x, sys.dim())?;
    solver.validate()?;
    check_antisymmetric(&sys.l.eval(x)?)?;

    let residual = |y: &StateVector| -> Result<(StateVector, f64)> {
        let mut dgs = Vec::with_capacity(sys.vs.len());
        let mut roundings = Vec::with_capacity(sys.vs.len());
        for v in &sys.vs {
            let (g, r) = scheme.evaluate_with_rounding(v, x, y)?;
            dgs.push(g);
            roundings.push(r);
        }
        let refs: Vec<&StateVector> = dgs.iter().collect();
        let lt = sys.l.eval(&((x + y) * 0.5))?;
        // rounding of one factor propagates through the others' norms
        let norms: Vec<f64> = dgs.iter().map(|g| g.norm()).collect();
        let product: f64 = norms.iter().product();
        let mut g_rounding = 0.0;
        for (j, r) in roundings.iter().enumerate() {
            let others: f64 = norms
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, n)| n)
                .product();
            g_rounding += r * others;
        }
        let l_norm = lt.data().iter().map(|a| a * a).sum::<f64>().sqrt();
        let floor = residual_floor(x, y, tau, l_norm, product, g_rounding);
        Ok(((y - x) / tau - lt.contract(&refs)?, floor))
    };
    solve_step(x, tau, residual, solver)
}

/// Iterate [`multi_step`], tracking every `V_j`.
pub fn multi_integrate(
    sys: &MultiLinearGradientSystem,
    x0: &StateVector,
    tau: f64,
    n_steps: usize,
    scheme: DiscreteGradientScheme,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    check_state(x0, sys.dim())?;
    solver.validate()?;
    march(&sys.vs, x0, tau, n_steps, |x| multi_step(sys, x, tau, scheme, solver))
}

//! The implicit discrete-gradient map and trajectory integration.
//!
//! One step solves `(x' - x)/τ = L̃(x, x') ∇̄V(x, x')` for `x'`.

mod order;
mod reference;
mod solver;

use std::fmt;
use std::str::FromStr;

pub use order::{empirical_order, least_squares_slope, OrderEstimate};
pub use reference::{reference_integrate, reference_integrate_at, DenseSegment};
pub use solver::{solve_implicit, solve_implicit_with_floor, SolveOutcome, SolverConfig, SolverMethod};

use crate::discgrad::DiscreteGradientScheme;
use crate::error::{Error, Result};
use crate::field::{check_state, ScalarField, StateVector};
use crate::system::LinearGradientSystem;
use crate::trajectory::{StepDiagnostics, Trajectory};

/// How the structure matrix is evaluated inside one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LTildePolicy {
    /// `L̃ = L(x)`.
    FrozenAtX,
    /// `L̃ = L((x + x')/2)`.
    #[default]
    Midpoint,
}

impl fmt::Display for LTildePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LTildePolicy::FrozenAtX => "frozen",
            LTildePolicy::Midpoint => "midpoint",
        })
    }
}

impl FromStr for LTildePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frozen" | "frozen-at-x" => Ok(LTildePolicy::FrozenAtX),
            "midpoint" => Ok(LTildePolicy::Midpoint),
            _ => Err(Error::InvalidArgument(format!("unknown L policy `{s}`"))),
        }
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "time step must be positive and finite, got {tau}"
        )))
    }
}

/// Rounding floor of `(y - x)/τ - L̃ g`, given `‖L̃‖`, `‖g‖` and the
/// rounding bound carried by the discrete gradient `g`.
pub(crate) fn residual_floor(
    x: &StateVector,
    y: &StateVector,
    tau: f64,
    l_norm: f64,
    g_norm: f64,
    g_rounding: f64,
) -> f64 {
    let eps = f64::EPSILON;
    let n = x.len() as f64;
    l_norm * (g_rounding + n * eps * g_norm) + 2.0 * eps * (x.norm() + y.norm()) / tau
}

/// Accept `x` itself or solve from the explicit Euler predictor.
pub(crate) fn solve_step<F>(
    x: &StateVector,
    tau: f64,
    residual: F,
    solver: &SolverConfig,
) -> Result<(StateVector, StepDiagnostics)>
where
    F: Fn(&StateVector) -> Result<(StateVector, f64)>,
{
    let (r0, floor0) = residual(x)?;
    let r0_norm = r0.norm();
    if r0_norm <= solver.tol.max(floor0) {
        return Ok((
            x.clone(),
            StepDiagnostics {
                iterations: 0,
                residual: r0_norm,
            },
        ));
    }
    // at y = x the residual is -L(x)∇V(x), so this is the explicit Euler predictor
    let guess = x - &r0 * tau;
    let out = solve_implicit_with_floor(residual, &guess, tau, solver)?;
    Ok((
        out.solution,
        StepDiagnostics {
            iterations: out.iterations,
            residual: out.residual,
        },
    ))
}

/// Advance one step of the discrete-gradient map.
///
/// The step is accepted once the residual is below `solver.tol`, or below
/// the rounding floor of the residual where that is larger: near
/// equilibria the secant part of `∇̄V` cannot be resolved more finely.
pub fn step(
    sys: &LinearGradientSystem,
    x: &StateVector,
    tau: f64,
    scheme: DiscreteGradientScheme,
    policy: LTildePolicy,
    solver: &SolverConfig,
) -> Result<(StateVector, StepDiagnostics)> {
    check_tau(tau)?;
    check_state(x, sys.dim())?;
    solver.validate()?;

    let l_x = sys.l().eval(x)?;
    let residual = |y: &StateVector| -> Result<(StateVector, f64)> {
        let (g, rounding) = scheme.evaluate_with_rounding(sys.v(), x, y)?;
        let lt = match policy {
            LTildePolicy::FrozenAtX => l_x.clone(),
            LTildePolicy::Midpoint => sys.l().eval(&((x + y) * 0.5))?,
        };
        let floor = residual_floor(x, y, tau, lt.norm(), g.norm(), rounding);
        Ok(((y - x) / tau - lt * g, floor))
    };
    solve_step(x, tau, residual, solver)
}

fn tracked_values(tracked: &[ScalarField], x: &StateVector) -> Result<Vec<f64>> {
    tracked.iter().map(|v| v.value(x)).collect()
}

/// Iterate a one-step map `n_steps` times, recording `tracked` along the way.
///
/// A failing step aborts with the partial trajectory attached.
pub(crate) fn march<S>(
    tracked: &[ScalarField],
    x0: &StateVector,
    tau: f64,
    n_steps: usize,
    mut advance: S,
) -> Result<Trajectory>
where
    S: FnMut(&StateVector) -> Result<(StateVector, StepDiagnostics)>,
{
    check_tau(tau)?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let mut traj = Trajectory::new(tracked.len());
    traj.push(
        0.0,
        x0.clone(),
        &tracked_values(tracked, x0)?,
        StepDiagnostics::default(),
    )?;
    let mut x = x0.clone();
    for k in 1..=n_steps {
        let attempt = advance(&x).and_then(|(next, diag)| {
            let vals = tracked_values(tracked, &next)?;
            Ok((next, diag, vals))
        });
        match attempt {
            Ok((next, diag, vals)) => {
                traj.push(k as f64 * tau, next.clone(), &vals, diag)?;
                x = next;
            }
            Err(source) => {
                return Err(Error::Aborted {
                    step: k,
                    partial: Box::new(traj),
                    source: Box::new(source),
                })
            }
        }
    }
    Ok(traj)
}

/// Iterate [`step`] `n_steps` times from `x0`.
///
/// The trajectory tracks `V` followed by the system's monitors.
pub fn integrate(
    sys: &LinearGradientSystem,
    x0: &StateVector,
    tau: f64,
    n_steps: usize,
    scheme: DiscreteGradientScheme,
    policy: LTildePolicy,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    check_state(x0, sys.dim())?;
    solver.validate()?;
    let tracked = sys.tracked();
    march(&tracked, x0, tau, n_steps, |x| {
        step(sys, x, tau, scheme, policy, solver)
    })
}

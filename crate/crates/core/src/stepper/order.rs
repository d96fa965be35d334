//! Empirical order of accuracy from a sweep over time steps.

use std::thread;

use super::{integrate, LTildePolicy, SolverConfig};
use crate::discgrad::DiscreteGradientScheme;
use crate::error::{Error, Result};
use crate::field::StateVector;
use crate::system::LinearGradientSystem;

/// Tolerance of the reference solution used for global errors.
pub const REFERENCE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub slope: f64,
    /// `(τ, ‖x_N - x_ref(t_end)‖)` for every step size.
    pub errors: Vec<(f64, f64)>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two paired samples".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of log global error at `t_end` against log τ.
///
/// Every τ must divide `t_end` into a whole number of steps. The runs for
/// different τ execute on separate threads.
pub fn empirical_order(
    sys: &LinearGradientSystem,
    scheme: DiscreteGradientScheme,
    policy: LTildePolicy,
    x0: &StateVector,
    t_end: f64,
    taus: &[f64],
    solver: &SolverConfig,
) -> Result<OrderEstimate> {
    if taus.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 step sizes, got {}",
            taus.len()
        )));
    }
    if taus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("step sizes must be strictly decreasing".into()));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let mut counts = Vec::with_capacity(taus.len());
    for &tau in taus {
        super::check_tau(tau)?;
        let n = (t_end / tau).round();
        if n < 1.0 || (n * tau - t_end).abs() > 1e-9 * t_end {
            return Err(Error::InvalidArgument(format!(
                "τ = {tau} does not divide t_end = {t_end}"
            )));
        }
        counts.push(n as usize);
    }

    let reference = super::reference_integrate_at(&sys.vector_field(), x0, &[t_end], REFERENCE_TOL)?
        .pop()
        .expect("one requested time");

    let finals: Vec<Result<StateVector>> = thread::scope(|s| {
        let handles: Vec<_> = taus
            .iter()
            .zip(&counts)
            .map(|(&tau, &n)| {
                s.spawn(move || {
                    let traj = integrate(sys, x0, tau, n, scheme, policy, solver)?;
                    Ok(traj.last_state().expect("non-empty trajectory").clone())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("order worker panicked"))
            .collect()
    });

    let mut errors = Vec::with_capacity(taus.len());
    for (&tau, fin) in taus.iter().zip(finals) {
        errors.push((tau, (fin? - &reference).norm()));
    }
    if let Some(&(tau, _)) = errors.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "zero global error at τ = {tau}; order undefined"
        )));
    }
    let xs: Vec<f64> = errors.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|(_, e)| e.ln()).collect();
    Ok(OrderEstimate {
        slope: least_squares_slope(&xs, &ys)?,
        errors,
    })
}

//! Nonlinear solvers for the implicit step relation.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverMethod {
    /// `y ← y - scale · r(y)`; for the step relation this is
    /// `x' ← x + τ L̃ ∇̄V(x, x')`.
    FixedPoint,
    /// Newton's method with a forward-difference Jacobian.
    NewtonFd,
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMethod::FixedPoint => "fixed-point",
            SolverMethod::NewtonFd => "newton",
        })
    }
}

impl FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-point" => Ok(SolverMethod::FixedPoint),
            "newton" => Ok(SolverMethod::NewtonFd),
            _ => Err(Error::InvalidArgument(format!("unknown solver `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Absolute threshold on the residual norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative step for the forward-difference Jacobian.
    pub fd_step: f64,
    /// Let fixed-point iteration hand over to Newton when it stalls. The
    /// fixed-point phase gets at most half of `max_iter`.
    pub newton_fallback: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::FixedPoint,
            tol: 1e-12,
            max_iter: 100,
            fd_step: f64::EPSILON.sqrt(),
            newton_fallback: true,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_method(mut self, method: SolverMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "solver tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("solver max_iter must be at least 1".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::InvalidArgument("solver fd_step must be positive".into()));
        }
        Ok(())
    }
}

/// A converged solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solution: StateVector,
    pub iterations: usize,
    pub residual: f64,
    pub used_newton: bool,
}

// consecutive growing residuals after which fixed point gives up early
const STALL_LIMIT: usize = 3;

struct Iterate {
    y: StateVector,
    r: StateVector,
    norm: f64,
    floor: f64,
}

impl Iterate {
    fn converged(&self, tol: f64) -> bool {
        self.norm <= tol.max(self.floor)
    }
}

/// Find `y` with `‖r(y)‖ <= cfg.tol`, starting from `guess`.
///
/// `scale` is the relaxation used by fixed-point iteration. An error from
/// `residual` at the initial guess is returned as is; errors at later
/// iterates are treated as failed trial points.
pub fn solve_implicit<F>(residual: F, guess: &StateVector, scale: f64, cfg: &SolverConfig) -> Result<SolveOutcome>
where
    F: Fn(&StateVector) -> Result<StateVector>,
{
    solve_implicit_with_floor(|y: &StateVector| residual(y).map(|r| (r, 0.0)), guess, scale, cfg)
}

/// [`solve_implicit`] for residuals that cannot be evaluated to better than
/// a known rounding floor. `residual` returns `r(y)` and that floor; an
/// iterate is accepted once `‖r(y)‖ <= max(cfg.tol, floor)`.
pub fn solve_implicit_with_floor<F>(
    residual: F,
    guess: &StateVector,
    scale: f64,
    cfg: &SolverConfig,
) -> Result<SolveOutcome>
where
    F: Fn(&StateVector) -> Result<(StateVector, f64)>,
{
    cfg.validate()?;
    let (r, floor) = residual(guess)?;
    let start = Iterate {
        norm: r.norm(),
        y: guess.clone(),
        r,
        floor,
    };
    if start.converged(cfg.tol) {
        return Ok(SolveOutcome {
            solution: start.y,
            iterations: 0,
            residual: start.norm,
            used_newton: false,
        });
    }

    match cfg.method {
        SolverMethod::NewtonFd => newton(&residual, start, 0, cfg),
        SolverMethod::FixedPoint => {
            let budget = if cfg.newton_fallback {
                (cfg.max_iter / 2).max(1)
            } else {
                cfg.max_iter
            };
            let mut cur = start;
            let mut best_norm = cur.norm;
            let mut best = None::<Iterate>;
            let mut growing = 0;
            let mut iterations = 0;
            while iterations < budget {
                iterations += 1;
                let y = &cur.y - &cur.r * scale;
                let Ok((r, floor)) = residual(&y) else { break };
                let norm = r.norm();
                if !norm.is_finite() {
                    break;
                }
                if norm <= cfg.tol.max(floor) {
                    return Ok(SolveOutcome {
                        solution: y,
                        iterations,
                        residual: norm,
                        used_newton: false,
                    });
                }
                growing = if norm >= cur.norm { growing + 1 } else { 0 };
                let next = Iterate { y, r, norm, floor };
                if norm < best_norm {
                    best_norm = norm;
                    best = Some(Iterate {
                        y: next.y.clone(),
                        r: next.r.clone(),
                        norm,
                        floor,
                    });
                }
                cur = next;
                if growing >= STALL_LIMIT {
                    break;
                }
            }
            if !cfg.newton_fallback {
                return Err(Error::SolverDivergence {
                    iterations,
                    residual: best_norm,
                });
            }
            let from = match best {
                Some(b) if b.norm < cur.norm => b,
                _ if cur.norm.is_finite() => cur,
                Some(b) => b,
                None => cur,
            };
            newton(&residual, from, iterations, cfg)
        }
    }
}

fn newton<F>(residual: &F, start: Iterate, used: usize, cfg: &SolverConfig) -> Result<SolveOutcome>
where
    F: Fn(&StateVector) -> Result<(StateVector, f64)>,
{
    let n = start.y.len();
    let mut cur = start;
    let mut iterations = used;
    let diverged = |iterations, residual| Error::SolverDivergence { iterations, residual };

    while iterations < cfg.max_iter {
        if cur.converged(cfg.tol) {
            break;
        }
        iterations += 1;

        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut yj = cur.y.clone();
            yj[j] += cfg.fd_step * cur.y[j].abs().max(1.0);
            // use the increment actually represented
            let h = yj[j] - cur.y[j];
            let (rj, _) = residual(&yj).map_err(|_| diverged(iterations, cur.norm))?;
            jac.set_column(j, &((rj - &cur.r) / h));
        }
        let delta = jac
            .lu()
            .solve(&(-&cur.r))
            .ok_or_else(|| diverged(iterations, cur.norm))?;
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(diverged(iterations, cur.norm));
        }

        // backtracking on the residual norm
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let y = &cur.y + &delta * lambda;
            if let Ok((r, floor)) = residual(&y) {
                let norm = r.norm();
                if norm.is_finite() && norm < cur.norm {
                    accepted = Some(Iterate { y, r, norm, floor });
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some(next) => cur = next,
            None => return Err(diverged(iterations, cur.norm)),
        }
    }

    if cur.converged(cfg.tol) {
        Ok(SolveOutcome {
            solution: cur.y,
            iterations,
            residual: cur.norm,
            used_newton: true,
        })
    } else {
        Err(diverged(iterations, cur.norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn floor_admits_an_unresolvable_residual() {
        // residual with a noise plateau of 1e-9 around its root
        let noisy = |y: &StateVector| -> Result<(StateVector, f64)> {
            let r = y[0] - 2.0;
            let r = if r.abs() < 1e-9 { 1e-9 } else { r };
            Ok((dvector![r], 2e-9))
        };
        let cfg = SolverConfig::default();
        let out = solve_implicit_with_floor(noisy, &dvector![0.0], 0.5, &cfg).unwrap();
        assert!((out.solution[0] - 2.0).abs() <= 2e-9);
        let no_floor = |y: &StateVector| noisy(y).map(|(r, _)| r);
        assert!(solve_implicit(no_floor, &dvector![0.0], 0.5, &cfg)
            .unwrap_err()
            .is_divergence());
    }

    #[test]
    fn linear_residual_one_newton_iteration() {
        let a = dvector![3.0, -1.5];
        let aa = a.clone();
        let cfg = SolverConfig::default().with_method(SolverMethod::NewtonFd);
        let out = solve_implicit(move |y| Ok(y - &aa), &dvector![0.0, 0.0], 1.0, &cfg).unwrap();
        assert_eq!(out.iterations, 1);
        assert!((out.solution - a).norm() < 1e-12);
    }

    #[test]
    fn rootless_residual_diverges() {
        for method in [SolverMethod::NewtonFd, SolverMethod::FixedPoint] {
            let cfg = SolverConfig::default().with_method(method);
            let r = solve_implicit(|y| Ok(y.map(|v| v * v + 1.0)), &dvector![1.0], 1.0, &cfg);
            assert!(matches!(r, Err(Error::SolverDivergence { .. })), "{method}");
        }
    }

    #[test]
    fn fixed_point_contracts_on_a_contraction() {
        // y = cos(y)
        let cfg = SolverConfig {
            newton_fallback: false,
            ..SolverConfig::default()
        };
        let out = solve_implicit(|y| Ok(y - y.map(f64::cos)), &dvector![0.0], 1.0, &cfg).unwrap();
        assert!(!out.used_newton);
        assert!((out.solution[0] - 0.739_085_133_215_160_6).abs() < 1e-11);
    }

    #[test]
    fn fallback_rescues_an_expanding_fixed_point_map() {
        // y ← y - r(y) with r(y) = 3(y - 2) expands by a factor 2 each step
        let cfg = SolverConfig::default();
        let out = solve_implicit(|y| Ok((y.add_scalar(-2.0)) * 3.0), &dvector![0.0], 1.0, &cfg).unwrap();
        assert!(out.used_newton);
        assert!((out.solution[0] - 2.0).abs() < 1e-12);

        let strict = SolverConfig {
            newton_fallback: false,
            ..cfg
        };
        assert!(solve_implicit(|y| Ok((y.add_scalar(-2.0)) * 3.0), &dvector![0.0], 1.0, &strict).is_err());
    }

    #[test]
    fn converged_guess_returns_immediately() {
        let out = solve_implicit(|y| Ok(y.clone()), &dvector![0.0], 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default().with_tol(0.0);
        assert!(cfg.validate().is_err());
        cfg.tol = 1e-12;
        cfg.max_iter = 0;
        assert!(cfg.validate().is_err());
    }
}

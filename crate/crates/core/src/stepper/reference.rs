//! Adaptive Dormand–Prince 5(4) with dense output, used as an error baseline.

use crate::error::{Error, Result};
use crate::field::{StateVector, VectorField};
use crate::trajectory::{StepDiagnostics, Trajectory};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 5_000_000;

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rcont: [StateVector; 5],
}

impl DenseSegment {
    /// State at `t`, for `t` within the segment.
    pub fn eval(&self, t: f64) -> StateVector {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        r1 + (r2 + (r3 + (r4 + r5 * theta1) * theta) * theta1) * theta
    }
}

fn check_args(f: &VectorField, x0: &StateVector, t_end: f64, rel_tol: f64) -> Result<()> {
    crate::field::check_state(x0, f.dim())?;
    if !(rel_tol >= 1e-13) || !rel_tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must be at least 1e-13, got {rel_tol}"
        )));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "t_end must be non-negative, got {t_end}"
        )));
    }
    Ok(())
}

fn err_norm(v: &StateVector, y0: &StateVector, y1: &StateVector, rtol: f64, atol: f64) -> f64 {
    let n = v.len() as f64;
    let s: f64 = v
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step(f: &VectorField, y0: &StateVector, f0: &StateVector, rtol: f64, atol: f64, span: f64) -> Result<f64> {
    let sc = y0.map(|v| atol + rtol * v.abs());
    let n = y0.len() as f64;
    let wnorm = |v: &StateVector| (v.component_div(&sc).norm_squared() / n).sqrt();
    let d0 = wnorm(y0);
    let d1 = wnorm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let f1 = f.eval(&(y0 + f0 * h0))?;
    let d2 = wnorm(&(f1 - f0)) / h0;
    let big = d1.max(d2);
    let h1 = if big <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / big).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Run the integrator from `t = 0` to `t_end`, handing every accepted step
/// to `on_step`.
fn run<F>(f: &VectorField, x0: &StateVector, t_end: f64, rel_tol: f64, mut on_step: F) -> Result<()>
where
    F: FnMut(&DenseSegment, f64, &StateVector, f64) -> Result<()>,
{
    let rtol = rel_tol;
    let atol = rel_tol;
    let mut t = 0.0;
    let mut y = x0.clone();
    if t_end == 0.0 {
        return Ok(());
    }
    let mut k1 = f.eval(&y)?;
    let mut h = initial_step(f, &y, &k1, rtol, atol, t_end)?;
    let mut rejected_last = false;
    let mut steps = 0;

    while t < t_end {
        if steps >= MAX_STEPS {
            return Err(Error::StepUnderflow { t, h });
        }
        steps += 1;
        if h < 10.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let k2 = f.eval(&(&y + &k1 * (h * A21)))?;
        let k3 = f.eval(&(&y + (&k1 * A31 + &k2 * A32) * h))?;
        let k4 = f.eval(&(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
        let k5 = f.eval(&(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h))?;
        let k6 = f.eval(&(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h))?;
        let y1 = &y + (&k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
        let k7 = f.eval(&y1)?;
        let est = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
        let err = err_norm(&est, &y, &y1, rtol, atol);

        if !err.is_finite() {
            h *= 0.2;
            rejected_last = true;
            continue;
        }
        if err <= 1.0 {
            let ydiff = &y1 - &y;
            let bspl = &k1 * h - &ydiff;
            let seg = DenseSegment {
                t0: t,
                h,
                rcont: [
                    y.clone(),
                    ydiff.clone(),
                    bspl.clone(),
                    &ydiff - &k7 * h - &bspl,
                    (&k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * h,
                ],
            };
            t = if last { t_end } else { t + h };
            on_step(&seg, t, &y1, err)?;
            y = y1;
            k1 = k7;
            let mut fac = if err == 0.0 { 10.0 } else { 0.9 * err.powf(-0.2) };
            fac = fac.clamp(0.2, 10.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            rejected_last = false;
            h *= fac;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            rejected_last = true;
        }
    }
    Ok(())
}

/// Integrate `ẋ = f(x)` from `t = 0` to `t_end`, recording accepted steps.
///
/// Absolute and relative tolerances are both `rel_tol`. The diagnostics of
/// each recorded step carry the scaled error estimate in `residual`.
pub fn reference_integrate(f: &VectorField, x0: &StateVector, t_end: f64, rel_tol: f64) -> Result<Trajectory> {
    check_args(f, x0, t_end, rel_tol)?;
    let mut traj = Trajectory::new(0);
    traj.push(0.0, x0.clone(), &[], StepDiagnostics::default())?;
    run(f, x0, t_end, rel_tol, |_, t, y, err| {
        traj.push(
            t,
            y.clone(),
            &[],
            StepDiagnostics {
                iterations: 0,
                residual: err,
            },
        )
    })?;
    Ok(traj)
}

/// States at the requested times, interpolated with the dense output.
///
/// `times` must be non-decreasing and non-negative.
pub fn reference_integrate_at(
    f: &VectorField,
    x0: &StateVector,
    times: &[f64],
    rel_tol: f64,
) -> Result<Vec<StateVector>> {
    let t_end = times.last().copied().unwrap_or(0.0);
    check_args(f, x0, t_end, rel_tol)?;
    if times.windows(2).any(|w| !(w[0] <= w[1])) || times.first().is_some_and(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidArgument(
            "requested times must be non-negative and non-decreasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(times.len());
    while out.len() < times.len() && times[out.len()] == 0.0 {
        out.push(x0.clone());
    }
    run(f, x0, t_end, rel_tol, |seg, end, y, _| {
        while out.len() < times.len() && times[out.len()] <= end {
            let t = times[out.len()];
            out.push(if t == end { y.clone() } else { seg.eval(t) });
        }
        Ok(())
    })?;
    Ok(out)
}

//! Discrete gradients: two-point maps `∇̄V(x, x')` with
//!
//! * `∇̄V(x, x')·(x' - x) = V(x') - V(x)`, and
//! * `∇̄V(x, x) = ∇V(x)`.
//!
//! Three standard constructions are provided. The midpoint (Gonzalez) and
//! coordinate-increment (Itoh–Abe) gradients satisfy the first identity to
//! rounding for every `V`; the mean-value gradient only when the quadrature
//! integrates `∇V` exactly along the segment.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{ScalarField, StateVector};

pub const MAX_QUADRATURE_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscreteGradientScheme {
    Midpoint,
    CoordinateIncrement,
    MeanValue { quadrature_points: usize },
}

impl DiscreteGradientScheme {
    pub fn mean_value(quadrature_points: usize) -> Result<Self> {
        if !(1..=MAX_QUADRATURE_POINTS).contains(&quadrature_points) {
            return Err(Error::InvalidArgument(format!(
                "quadrature points must be in 1..={MAX_QUADRATURE_POINTS}, got {quadrature_points}"
            )));
        }
        Ok(DiscreteGradientScheme::MeanValue { quadrature_points })
    }

    /// `∇̄V(x, x')` for this scheme.
    pub fn evaluate(&self, v: &ScalarField, x: &StateVector, x_new: &StateVector) -> Result<StateVector> {
        self.evaluate_with_rounding(v, x, x_new).map(|(g, _)| g)
    }

    /// `∇̄V(x, x')` and a bound on the part of its norm that comes from
    /// rounding in differences of `V`. The bound grows as `x'` approaches
    /// `x` until the scheme switches to plain gradients.
    pub fn evaluate_with_rounding(
        &self,
        v: &ScalarField,
        x: &StateVector,
        x_new: &StateVector,
    ) -> Result<(StateVector, f64)> {
        match *self {
            DiscreteGradientScheme::Midpoint => midpoint_with_rounding(v, x, x_new),
            DiscreteGradientScheme::CoordinateIncrement => coordinate_increment_with_rounding(v, x, x_new),
            DiscreteGradientScheme::MeanValue { quadrature_points } => {
                mean_value_discrete_gradient(v, x, x_new, quadrature_points).map(|g| (g, 0.0))
            }
        }
    }
}

impl fmt::Display for DiscreteGradientScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscreteGradientScheme::Midpoint => f.write_str("midpoint"),
            DiscreteGradientScheme::CoordinateIncrement => f.write_str("itoh-abe"),
            DiscreteGradientScheme::MeanValue { quadrature_points } => {
                write!(f, "avf:{quadrature_points}")
            }
        }
    }
}

impl FromStr for DiscreteGradientScheme {
    type Err = Error;

    /// Accepts `midpoint`, `itoh-abe` and `avf:<q>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" | "gonzalez" => Ok(DiscreteGradientScheme::Midpoint),
            "itoh-abe" | "coordinate-increment" => Ok(DiscreteGradientScheme::CoordinateIncrement),
            _ => {
                let q = s
                    .strip_prefix("avf:")
                    .and_then(|q| q.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown scheme `{s}` (expected midpoint, itoh-abe or avf:<q>)"))
                    })?;
                DiscreteGradientScheme::mean_value(q)
            }
        }
    }
}

fn same_dim(x: &StateVector, y: &StateVector, v: &ScalarField) -> Result<()> {
    for len in [x.len(), y.len()] {
        if len != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: v.dim(),
                got: len,
            });
        }
    }
    Ok(())
}

// ulps allowed for each evaluation of `V` when bounding rounding
const ROUNDING_ULPS: f64 = 8.0;

/// Rounding bound for `a - b - c` with `a`, `b` values of `V` and `c` a dot
/// product with the given terms.
fn difference_rounding(a: f64, b: f64, terms: impl Iterator<Item = f64>) -> f64 {
    ROUNDING_ULPS * f64::EPSILON * (a.abs() + b.abs() + terms.map(f64::abs).sum::<f64>())
}

/// Gonzalez's midpoint discrete gradient
/// `∇V(m) + [V(x') - V(x) - ∇V(m)·Δ] Δ/‖Δ‖²` with `m = (x + x')/2`.
pub fn midpoint_discrete_gradient(v: &ScalarField, x: &StateVector, x_new: &StateVector) -> Result<StateVector> {
    midpoint_with_rounding(v, x, x_new).map(|(g, _)| g)
}

/// The correction term is dropped when the defect it carries is below the
/// rounding in `V(x') - V(x)`: it is `O(‖Δ‖²)`, while its rounding grows
/// like `1/‖Δ‖`. The second value bounds the rounding of the result.
fn midpoint_with_rounding(v: &ScalarField, x: &StateVector, x_new: &StateVector) -> Result<(StateVector, f64)> {
    same_dim(x, x_new, v)?;
    let delta = x_new - x;
    let mid = (x + x_new) * 0.5;
    let g = v.gradient(&mid)?;
    let dist2 = delta.norm_squared();
    if dist2 == 0.0 {
        return Ok((g, 0.0));
    }
    let (v0, v1) = (v.value(x)?, v.value(x_new)?);
    let defect = v1 - v0 - g.dot(&delta);
    let noise = difference_rounding(v1, v0, g.iter().zip(delta.iter()).map(|(a, b)| a * b));
    if defect.abs() <= noise {
        return Ok((g, 0.0));
    }
    let rounding = noise / dist2.sqrt();
    Ok((g + delta * (defect / dist2), rounding))
}

/// Itoh–Abe coordinate-increment discrete gradient: coordinate `i` is the
/// difference quotient of `V` along the `i`-th leg of the staircase path
/// from `x` to `x'`.
pub fn coordinate_increment_discrete_gradient(
    v: &ScalarField,
    x: &StateVector,
    x_new: &StateVector,
) -> Result<StateVector> {
    coordinate_increment_with_rounding(v, x, x_new).map(|(g, _)| g)
}

/// A leg whose quotient is dominated by rounding uses the partial
/// derivative at the middle of the leg instead, as in the midpoint case.
fn coordinate_increment_with_rounding(
    v: &ScalarField,
    x: &StateVector,
    x_new: &StateVector,
) -> Result<(StateVector, f64)> {
    same_dim(x, x_new, v)?;
    let n = x.len();
    let mut out = StateVector::zeros(n);
    let mut rounding2 = 0.0;
    let mut corner = x.clone();
    let mut v_prev = v.value(&corner)?;
    for i in 0..n {
        let step = x_new[i] - x[i];
        let mut probe = corner.clone();
        probe[i] = 0.5 * (x[i] + x_new[i]);
        corner[i] = x_new[i];
        if step == 0.0 {
            out[i] = v.gradient(&probe)?[i];
            continue;
        }
        let v_next = v.value(&corner)?;
        let quotient = (v_next - v_prev) / step;
        let ambiguity = difference_rounding(v_next, v_prev, std::iter::empty()) / step.abs();
        if ambiguity <= 2.0 * f64::EPSILON * (1.0 + quotient.abs()) {
            out[i] = quotient;
        } else {
            let d = v.gradient(&probe)?[i];
            let noise = difference_rounding(v_next, v_prev, std::iter::once(d * step));
            if (v_next - v_prev - d * step).abs() <= noise {
                out[i] = d;
            } else {
                out[i] = quotient;
                rounding2 += (noise / step.abs()).powi(2);
            }
        }
        v_prev = v_next;
    }
    Ok((out, rounding2.sqrt()))
}

/// Mean-value (averaged) discrete gradient `∫₀¹ ∇V(x + s(x' - x)) ds` by
/// `q`-point Gauss–Legendre quadrature.
pub fn mean_value_discrete_gradient(
    v: &ScalarField,
    x: &StateVector,
    x_new: &StateVector,
    q: usize,
) -> Result<StateVector> {
    same_dim(x, x_new, v)?;
    if !(1..=MAX_QUADRATURE_POINTS).contains(&q) {
        return Err(Error::InvalidArgument(format!("unsupported quadrature order {q}")));
    }
    let delta = x_new - x;
    let mut acc = StateVector::zeros(x.len());
    for (s, w) in gauss_legendre_unit(q) {
        acc += v.gradient(&(x + &delta * s))? * w;
    }
    Ok(acc)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(q: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(q);
    let n = q as f64;
    for k in 0..q {
        // Newton on P_q from the Chebyshev-like initial guess
        let mut t = (std::f64::consts::PI * (k as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, t);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        out.push((0.5 * (1.0 - t), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `(P_q(t), P_q'(t))` by the three-term recurrence.
fn legendre(q: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Worst residuals of the two discrete-gradient identities over `pairs`:
/// `max |∇̄V·(x'-x) - (V(x') - V(x))|` and `max ‖∇̄V(x,x) - ∇V(x)‖`.
pub fn check_axioms(
    scheme: DiscreteGradientScheme,
    v: &ScalarField,
    pairs: &[(StateVector, StateVector)],
) -> Result<(f64, f64)> {
    let mut secant = 0.0_f64;
    let mut consistency = 0.0_f64;
    for (x, y) in pairs {
        let g = scheme.evaluate(v, x, y)?;
        let lhs = g.dot(&(y - x));
        secant = secant.max((lhs - (v.value(y)? - v.value(x)?)).abs());
        let g0 = scheme.evaluate(v, x, x)?;
        consistency = consistency.max((g0 - v.gradient(x)?).norm());
    }
    Ok((secant, consistency))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn sphere() -> ScalarField {
        ScalarField::from_fns(2, |x| x.norm_squared(), |x| 2.0 * x)
    }

    fn all_schemes() -> [DiscreteGradientScheme; 3] {
        [
            DiscreteGradientScheme::Midpoint,
            DiscreteGradientScheme::CoordinateIncrement,
            DiscreteGradientScheme::MeanValue { quadrature_points: 3 },
        ]
    }

    #[test]
    fn quarter_turn_on_sphere() {
        let (x, y) = (dvector![1.0, 0.0], dvector![0.0, 1.0]);
        for scheme in [
            DiscreteGradientScheme::Midpoint,
            DiscreteGradientScheme::CoordinateIncrement,
        ] {
            let g = scheme.evaluate(&sphere(), &x, &y).unwrap();
            assert_eq!(g, dvector![1.0, 1.0], "{scheme}");
            assert_eq!(g.dot(&(&y - &x)), 0.0);
        }
    }

    #[test]
    fn quadratic_gives_average_of_gradients() {
        // V = ½ xᵀAx with A symmetric
        let v = ScalarField::from_fns(
            2,
            |x| 0.5 * (2.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 3.0 * x[1] * x[1]),
            |x| dvector![2.0 * x[0] + x[1], x[0] + 3.0 * x[1]],
        );
        let (x, y) = (dvector![0.3, -1.2], dvector![1.1, 0.4]);
        let mid = (&x + &y) * 0.5;
        let expected = dvector![2.0 * mid[0] + mid[1], mid[0] + 3.0 * mid[1]];
        for q in 1..=4 {
            let g = mean_value_discrete_gradient(&v, &x, &y, q).unwrap();
            assert!((g - &expected).norm() < 1e-14);
        }
        let g = midpoint_discrete_gradient(&v, &x, &y).unwrap();
        assert!((g - &expected).norm() < 1e-14);
    }

    #[test]
    fn linear_function_gives_constant_gradient() {
        let c = dvector![1.5, -2.0];
        let cc = c.clone();
        let v = ScalarField::from_fns(2, move |x| cc.dot(x), {
            let c = c.clone();
            move |_| c.clone()
        });
        let g = coordinate_increment_discrete_gradient(&v, &dvector![0.1, 0.2], &dvector![-3.0, 7.0]).unwrap();
        assert!((g - c).norm() < 1e-15);
    }

    #[test]
    fn quartic_mean_value_is_exact_with_two_points() {
        let v = ScalarField::from_fns(1, |x| x[0].powi(4), |x| dvector![4.0 * x[0].powi(3)]);
        let g = mean_value_discrete_gradient(&v, &dvector![0.0], &dvector![1.0], 2).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_give_the_gradient() {
        let v = ScalarField::from_fns(
            2,
            |x| x[0].sin() * x[1].exp(),
            |x| dvector![x[0].cos() * x[1].exp(), x[0].sin() * x[1].exp()],
        );
        let x = dvector![0.4, -0.3];
        for scheme in all_schemes() {
            let g = scheme.evaluate(&v, &x, &x).unwrap();
            assert!((g - v.gradient(&x).unwrap()).norm() < 1e-15, "{scheme}");
        }
    }

    #[test]
    fn partially_coincident_coordinates() {
        let v = ScalarField::from_fns(
            2,
            |x| x[0].powi(3) * x[1],
            |x| dvector![3.0 * x[0] * x[0] * x[1], x[0].powi(3)],
        );
        let (x, y) = (dvector![0.5, 1.0], dvector![0.5, 2.0]);
        let g = coordinate_increment_discrete_gradient(&v, &x, &y).unwrap();
        assert!((g.dot(&(&y - &x)) - (v.value(&y).unwrap() - v.value(&x).unwrap())).abs() < 1e-15);
        assert!((g[0] - 3.0 * 0.25 * 1.0).abs() < 1e-15);
    }

    #[test]
    fn rounding_dominated_correction_is_dropped() {
        // V far from zero, step far below where the cubic defect shows
        let v = ScalarField::from_fns(
            2,
            |x| 10.0 + x[0].sin() * x[1],
            |x| dvector![x[0].cos() * x[1], x[0].sin()],
        );
        let x = dvector![0.3, 0.7];
        let y = &x + dvector![3e-9, -2e-9];
        let mid = (&x + &y) * 0.5;
        for scheme in [
            DiscreteGradientScheme::Midpoint,
            DiscreteGradientScheme::CoordinateIncrement,
        ] {
            let (g, rounding) = scheme.evaluate_with_rounding(&v, &x, &y).unwrap();
            assert_eq!(rounding, 0.0, "{scheme}");
            assert!((g - v.gradient(&mid).unwrap()).norm() < 1e-8, "{scheme}");
        }
    }

    #[test]
    fn resolved_correction_carries_a_small_rounding_bound() {
        let v = ScalarField::from_fns(1, |x| x[0].powi(4), |x| dvector![4.0 * x[0].powi(3)]);
        let (x, y) = (dvector![0.5], dvector![1.5]);
        let (g, rounding) = DiscreteGradientScheme::Midpoint
            .evaluate_with_rounding(&v, &x, &y)
            .unwrap();
        assert!((g[0] - (1.5f64.powi(4) - 0.5f64.powi(4))).abs() < 1e-14);
        assert!(rounding > 0.0 && rounding < 1e-13);
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2q_minus_1() {
        for q in 1..=MAX_QUADRATURE_POINTS {
            let rule = gauss_legendre_unit(q);
            assert_eq!(rule.len(), q);
            let total: f64 = rule.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-14, "q={q}");
            for degree in 0..2 * q {
                let integral: f64 = rule.iter().map(|(s, w)| w * s.powi(degree as i32)).sum();
                let exact = 1.0 / (degree as f64 + 1.0);
                assert!((integral - exact).abs() < 1e-13, "q={q} degree={degree}");
            }
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in ["midpoint", "itoh-abe", "avf:2", "avf:16"] {
            let scheme: DiscreteGradientScheme = s.parse().unwrap();
            assert_eq!(scheme.to_string(), s);
        }
        assert!("avf:0".parse::<DiscreteGradientScheme>().is_err());
        assert!("avf:17".parse::<DiscreteGradientScheme>().is_err());
        assert!("euler".parse::<DiscreteGradientScheme>().is_err());
    }
}

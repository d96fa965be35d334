//! Helpers shared by the integration tests.
#![allow(dead_code)]

use dgtk::expr::{Expr, Func};
use dgtk::{ScalarField, StateVector};
use rand::Rng;

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn one_plus_square(e: Expr) -> Expr {
    Expr::Add(b(Expr::Num(1.0)), b(Expr::Pow(b(e), b(Expr::Num(2.0)))))
}

/// A random expression over `x1..x{dim}` that is defined everywhere:
/// denominators and the arguments of `ln` and `sqrt` have the form
/// `1 + u^2`. Literals are non-negative so printing and re-parsing
/// reproduce the tree exactly.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize, dim: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.7) {
            Expr::Var(rng.random_range(0..dim))
        } else {
            Expr::Num((rng.random_range(0.0..3.0_f64) * 8.0).round() / 8.0)
        };
    }
    let d = depth - 1;
    match rng.random_range(0..12) {
        0 => Expr::Add(b(random_expr(rng, d, dim)), b(random_expr(rng, d, dim))),
        1 => Expr::Sub(b(random_expr(rng, d, dim)), b(random_expr(rng, d, dim))),
        2 | 3 => Expr::Mul(b(random_expr(rng, d, dim)), b(random_expr(rng, d, dim))),
        4 => Expr::Div(
            b(random_expr(rng, d, dim)),
            b(one_plus_square(random_expr(rng, d, dim))),
        ),
        5 => Expr::Pow(b(random_expr(rng, d, dim)), b(Expr::Num(rng.random_range(2..4) as f64))),
        6 => Expr::Neg(b(random_expr(rng, d, dim))),
        7 => Expr::Call(Func::Sin, b(random_expr(rng, d, dim))),
        8 => Expr::Call(Func::Cos, b(random_expr(rng, d, dim))),
        9 => Expr::Call(Func::Tanh, b(random_expr(rng, d, dim))),
        10 => Expr::Call(
            if rng.random_bool(0.5) { Func::Ln } else { Func::Sqrt },
            b(one_plus_square(random_expr(rng, d, dim))),
        ),
        _ => Expr::Call(Func::Exp, b(random_expr(rng, d, dim))),
    }
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> StateVector {
    StateVector::from_iterator(dim, (0..dim).map(|_| rng.random_range(lo..hi)))
}

/// Largest relative mismatch `|g_i - fd_i| / max(1, |g_i|)` between the
/// symbolic gradient of `e` and central differences of step `h`.
pub fn symbolic_vs_central(e: &Expr, x: &StateVector, h: f64) -> dgtk::Result<f64> {
    let empty = Default::default();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let d = e.differentiate(i).eval(x.as_slice(), &empty)?;
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let fd = (e.eval(xp.as_slice(), &empty)? - e.eval(xm.as_slice(), &empty)?) / (2.0 * h);
        worst = worst.max((d - fd).abs() / d.abs().max(1.0));
    }
    Ok(worst)
}

/// Harmonic oscillator `V = |x|²/2`, `L = J`.
pub fn oscillator() -> dgtk::LinearGradientSystem {
    let v = ScalarField::new(
        2,
        |x: &StateVector| Ok(0.5 * x.norm_squared()),
        |x: &StateVector| Ok(x.clone()),
    );
    let l = dgtk::StructureMatrixField::constant(
        dgtk::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        dgtk::StructureClass::Antisymmetric,
    );
    dgtk::LinearGradientSystem::new("oscillator", l, v).unwrap()
}

/// `((4-τ²)x₁ + 4τx₂, -4τx₁ + (4-τ²)x₂) / (4+τ²)`.
pub fn cayley(x: &StateVector, tau: f64) -> StateVector {
    let t2 = tau * tau;
    let d = 4.0 + t2;
    StateVector::from_vec(vec![
        ((4.0 - t2) * x[0] + 4.0 * tau * x[1]) / d,
        (-4.0 * tau * x[0] + (4.0 - t2) * x[1]) / d,
    ])
}

/// Slope of an ordinary least-squares line through `(k, ys[k])`.
pub fn trend(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in ys.iter().enumerate() {
        let dx = k as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

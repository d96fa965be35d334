//! Symbolic partial derivatives. The only simplification performed is
//! constant folding and the `0`/`1` identities.

// guards rather than float patterns, so -0.0 is caught too
#![allow(clippy::redundant_guards)]

use super::{Expr, Func};

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn as_num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

pub(super) fn add(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(super) fn sub(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(super) fn mul(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(super) fn div(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), _) if x == 0.0 => num(0.0),
        (Some(x), Some(y)) if y != 0.0 => num(x / y),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub(super) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(super) fn pow(a: Expr, b: Expr) -> Expr {
    match as_num(&b) {
        Some(y) if y == 0.0 => num(1.0),
        Some(y) if y == 1.0 => a,
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl Expr {
    /// Exact partial derivative with respect to variable `i` (zero-based).
    pub fn differentiate(&self, i: usize) -> Expr {
        if !self.depends_on(i) {
            return num(0.0);
        }
        match self {
            Expr::Num(_) | Expr::Param(_) => num(0.0),
            Expr::Var(j) => num(if *j == i { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.differentiate(i)),
            Expr::Add(a, b) => add(a.differentiate(i), b.differentiate(i)),
            Expr::Sub(a, b) => sub(a.differentiate(i), b.differentiate(i)),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(i), (**b).clone()),
                mul((**a).clone(), b.differentiate(i)),
            ),
            Expr::Div(a, b) => {
                if !b.depends_on(i) {
                    div(a.differentiate(i), (**b).clone())
                } else {
                    // (a'b - ab') / b^2
                    div(
                        sub(
                            mul(a.differentiate(i), (**b).clone()),
                            mul((**a).clone(), b.differentiate(i)),
                        ),
                        pow((**b).clone(), num(2.0)),
                    )
                }
            }
            Expr::Pow(a, b) => {
                let (a, b) = (&**a, &**b);
                if !b.depends_on(i) {
                    // b a^(b-1) a'
                    mul(
                        mul(b.clone(), pow(a.clone(), sub(b.clone(), num(1.0)))),
                        a.differentiate(i),
                    )
                } else if !a.depends_on(i) {
                    // a^b ln(a) b'
                    mul(mul(self.clone(), call(Func::Ln, a.clone())), b.differentiate(i))
                } else {
                    // a^b (b' ln a + b a'/a)
                    mul(
                        self.clone(),
                        add(
                            mul(b.differentiate(i), call(Func::Ln, a.clone())),
                            div(mul(b.clone(), a.differentiate(i)), a.clone()),
                        ),
                    )
                }
            }
            Expr::Call(f, a) => {
                let inner = a.differentiate(i);
                let a = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Exp => self.clone(),
                    Func::Ln => div(num(1.0), a),
                    Func::Sqrt => div(num(1.0), mul(num(2.0), self.clone())),
                    Func::Tanh => sub(num(1.0), pow(self.clone(), num(2.0))),
                };
                mul(outer, inner)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use crate::system::Params;

    fn eval(src: &str, n: usize, x: &[f64]) -> f64 {
        parse(src, n, &[]).unwrap().eval(x, &Params::new()).unwrap()
    }

    #[test]
    fn double_well_derivative() {
        let v = parse("x1^2*(x1-1)^2 + x2^2", 2, &[]).unwrap();
        let d = v.differentiate(0);
        for x1 in [-1.3, -0.2, 0.0, 0.5, 0.9, 2.4] {
            let expected = 2.0 * x1 * (x1 - 1.0) * (2.0 * x1 - 1.0);
            let got = d.eval(&[x1, 0.7], &Params::new()).unwrap();
            assert!(
                (got - expected).abs() <= 1e-12 * (1.0 + expected.abs()),
                "{x1}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn independent_variable_gives_literal_zero() {
        let v = parse("x1", 2, &[]).unwrap();
        assert_eq!(v.differentiate(1), super::num(0.0));
    }

    #[test]
    fn chain_rule_through_exp() {
        let v = parse("exp(x2-x1)", 2, &[]).unwrap();
        let d = v.differentiate(0);
        assert_eq!(d.eval(&[0.0, 0.0], &Params::new()).unwrap(), -1.0);
    }

    #[test]
    fn rule_table() {
        let x = 0.7_f64;
        let cases: [(&str, f64); 9] = [
            ("sin(x1)", x.cos()),
            ("cos(x1)", -x.sin()),
            ("ln(x1)", 1.0 / x),
            ("sqrt(x1)", 0.5 / x.sqrt()),
            ("tanh(x1)", 1.0 - x.tanh().powi(2)),
            ("x1^x1", x.powf(x) * (x.ln() + 1.0)),
            ("2^x1", 2f64.powf(x) * 2f64.ln()),
            ("1/x1", -1.0 / (x * x)),
            ("x1/(1+x1^2)", (1.0 - x * x) / (1.0 + x * x).powi(2)),
        ];
        for (src, expected) in cases {
            let d = parse(src, 1, &[]).unwrap().differentiate(0);
            let got = d.eval(&[x], &Params::new()).unwrap();
            assert!((got - expected).abs() < 1e-14, "{src}: {got} vs {expected}");
        }
        // sanity on the helper
        assert_eq!(eval("x1*2", 1, &[3.0]), 6.0);
    }

    #[test]
    fn constant_folding() {
        let d = parse("3*x1 + 4", 1, &[]).unwrap().differentiate(0);
        assert_eq!(d, super::num(3.0));
        let d = parse("x1^2", 1, &[]).unwrap().differentiate(0);
        assert_eq!(d.to_string(), "2.0 * x1");
    }
}

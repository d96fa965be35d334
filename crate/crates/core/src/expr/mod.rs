//! A small expression language for `V(x)` and `f(x)`, with exact symbolic
//! differentiation.
//!
//! Variables are written `x1 … xn`, parameters by name, and the functions
//! `sin cos exp ln sqrt tanh` are built in. `e^u` is accepted for `exp(u)`.
//! The grammar is documented on the [`parser`] module and in
//! `docs/formats.md`.

mod diff;
mod display;
mod fields;
mod lexer;
pub(crate) mod parser;

use crate::error::{Error, Result};
use crate::system::Params;

pub use fields::{matrix_field, scalar_field, vector_field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt, Func::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, a: f64) -> Result<f64> {
        let out = match self {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Exp => a.exp(),
            Func::Tanh => a.tanh(),
            Func::Ln => {
                if a <= 0.0 {
                    return Err(Error::Domain(format!("ln of non-positive value {a}")));
                }
                a.ln()
            }
            Func::Sqrt => {
                if a < 0.0 {
                    return Err(Error::Domain(format!("sqrt of negative value {a}")));
                }
                a.sqrt()
            }
        };
        finite(out, self.name())
    }
}

/// Expression tree. Variables are stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Param(String),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parse `source` over variables `x1..x{dim}` and the named parameters.
pub fn parse(source: &str, dim: usize, parameter_names: &[&str]) -> Result<Expr> {
    parser::Parser::new(source, dim, parameter_names)?.parse()
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} produced a non-finite value")))
    }
}

fn power(base: f64, exponent: f64) -> Result<f64> {
    if base == 0.0 && exponent < 0.0 {
        return Err(Error::Domain("zero raised to a negative power".into()));
    }
    let integral = exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64;
    if base < 0.0 && !integral {
        return Err(Error::Domain(format!(
            "negative base {base} raised to non-integer power {exponent}"
        )));
    }
    let v = if integral {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    };
    finite(v, "power")
}

impl Expr {
    /// Evaluate at `x`. Domain violations (`ln` of a non-positive number,
    /// division by zero, overflow) are errors rather than NaN or infinity.
    pub fn eval(&self, x: &[f64], params: &Params) -> Result<f64> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Param(name) => params
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnboundParameter(name.clone())),
            Expr::Var(i) => x.get(*i).copied().ok_or(Error::VariableOutOfRange {
                index: i + 1,
                dim: x.len(),
            }),
            Expr::Neg(a) => Ok(-a.eval(x, params)?),
            Expr::Add(a, b) => finite(a.eval(x, params)? + b.eval(x, params)?, "addition"),
            Expr::Sub(a, b) => finite(a.eval(x, params)? - b.eval(x, params)?, "subtraction"),
            Expr::Mul(a, b) => finite(a.eval(x, params)? * b.eval(x, params)?, "multiplication"),
            Expr::Div(a, b) => {
                let num = a.eval(x, params)?;
                let den = b.eval(x, params)?;
                if den == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                finite(num / den, "division")
            }
            Expr::Pow(a, b) => power(a.eval(x, params)?, b.eval(x, params)?),
            Expr::Call(f, a) => f.apply(a.eval(x, params)?),
        }
    }

    /// Replace every parameter by its value. Fails on the first unbound one.
    pub fn bind(&self, params: &Params) -> Result<Expr> {
        self.try_map_leaves(&mut |e| match e {
            Expr::Param(name) => params
                .get(name)
                .map(|&v| Expr::Num(v))
                .ok_or_else(|| Error::UnboundParameter(name.clone())),
            other => Ok(other.clone()),
        })
    }

    /// Replace variable `x_{i+1}` by `replacements[i]` (composition).
    pub fn substitute(&self, replacements: &[Expr]) -> Result<Expr> {
        self.try_map_leaves(&mut |e| match e {
            Expr::Var(i) => replacements.get(*i).cloned().ok_or(Error::VariableOutOfRange {
                index: i + 1,
                dim: replacements.len(),
            }),
            other => Ok(other.clone()),
        })
    }

    /// Whether the expression mentions variable `i` (zero-based).
    pub fn depends_on(&self, i: usize) -> bool {
        match self {
            Expr::Var(j) => *j == i,
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(i) || b.depends_on(i)
            }
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Var(j) => j + 1,
            Expr::Num(_) | Expr::Param(_) => 0,
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    fn try_map_leaves(&self, f: &mut impl FnMut(&Expr) -> Result<Expr>) -> Result<Expr> {
        let bx = |e: Expr| Box::new(e);
        Ok(match self {
            Expr::Num(_) | Expr::Param(_) | Expr::Var(_) => f(self)?,
            Expr::Neg(a) => Expr::Neg(bx(a.try_map_leaves(f)?)),
            Expr::Call(func, a) => Expr::Call(*func, bx(a.try_map_leaves(f)?)),
            Expr::Add(a, b) => Expr::Add(bx(a.try_map_leaves(f)?), bx(b.try_map_leaves(f)?)),
            Expr::Sub(a, b) => Expr::Sub(bx(a.try_map_leaves(f)?), bx(b.try_map_leaves(f)?)),
            Expr::Mul(a, b) => Expr::Mul(bx(a.try_map_leaves(f)?), bx(b.try_map_leaves(f)?)),
            Expr::Div(a, b) => Expr::Div(bx(a.try_map_leaves(f)?), bx(b.try_map_leaves(f)?)),
            Expr::Pow(a, b) => Expr::Pow(bx(a.try_map_leaves(f)?), bx(b.try_map_leaves(f)?)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn lotka_volterra_integral_at_origin() {
        let e = parse("exp(x2\u{2212}x1) + B*(x2\u{2212}x1) \u{2212} x3", 3, &["B"]).unwrap();
        let v = e.eval(&[0.0, 0.0, 0.0], &params(&[("B", 1.0)])).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn simple_quadratic() {
        let e = parse("x1^2 + x2^2", 2, &[]).unwrap();
        assert_eq!(e.eval(&[1.0, 0.0], &Params::new()).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        let p = Params::new();
        for (src, x) in [
            ("ln(x1)", -1.0),
            ("ln(x1)", 0.0),
            ("sqrt(x1)", -0.5),
            ("1/x1", 0.0),
            ("x1^0.5", -2.0),
            ("x1^-1", 0.0),
            ("exp(x1)", 1000.0),
        ] {
            let e = parse(src, 1, &[]).unwrap();
            assert!(
                matches!(e.eval(&[x], &p), Err(Error::Domain(_))),
                "{src} at {x} should be a domain error"
            );
        }
        // negative base with integer exponent is fine
        let e = parse("x1^3", 1, &[]).unwrap();
        assert_eq!(e.eval(&[-2.0], &p).unwrap(), -8.0);
    }

    #[test]
    fn unbound_parameter() {
        let e = parse("B*x1", 1, &["B"]).unwrap();
        assert!(matches!(
            e.eval(&[1.0], &Params::new()),
            Err(Error::UnboundParameter(ref n)) if n == "B"
        ));
        assert!(e.bind(&Params::new()).is_err());
        let bound = e.bind(&params(&[("B", 3.0)])).unwrap();
        assert_eq!(bound.eval(&[2.0], &Params::new()).unwrap(), 6.0);
    }

    #[test]
    fn substitution_composes() {
        let phi = parse("x1*x2", 2, &[]).unwrap();
        let g1 = parse("sin(x1)", 1, &[]).unwrap();
        let g2 = parse("x1+1", 1, &[]).unwrap();
        let c = phi.substitute(&[g1, g2]).unwrap();
        let x = 0.4_f64;
        assert!((c.eval(&[x], &Params::new()).unwrap() - x.sin() * (x + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn dependency_queries() {
        let e = parse("x1*sin(x3)", 3, &[]).unwrap();
        assert!(e.depends_on(0));
        assert!(!e.depends_on(1));
        assert!(e.depends_on(2));
        assert_eq!(e.arity(), 3);
    }
}

use std::fmt;

use super::Expr;

// binding strength; a child is parenthesised when weaker than required
const ADDITIVE: u8 = 1;
const MULTIPLICATIVE: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => UNARY,
        Expr::Num(_) | Expr::Param(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
        Expr::Neg(_) => UNARY,
        Expr::Add(..) | Expr::Sub(..) => ADDITIVE,
        Expr::Mul(..) | Expr::Div(..) => MULTIPLICATIVE,
        Expr::Pow(..) => POWER,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if strength(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimal parentheses needed for `parse` to rebuild the
/// same tree. Numbers use Rust's shortest round-trip formatting.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Param(name) => f.write_str(name),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                child(f, a, UNARY)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                child(f, a, ADDITIVE)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                child(f, b, MULTIPLICATIVE)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                child(f, a, MULTIPLICATIVE)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { " * " } else { " / " })?;
                child(f, b, UNARY)
            }
            Expr::Pow(a, b) => {
                child(f, a, ATOM)?;
                f.write_str("^")?;
                child(f, b, UNARY)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn roundtrip(src: &str, n: usize) -> String {
        let e = parse(src, n, &["B"]).unwrap();
        let printed = e.to_string();
        assert_eq!(parse(&printed, n, &["B"]).unwrap(), e, "{src} printed as {printed}");
        printed
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(roundtrip("x1 - (x2 - x3)", 3), "x1 - (x2 - x3)");
        assert_eq!(roundtrip("(x1 - x2) - x3", 3), "x1 - x2 - x3");
        assert_eq!(roundtrip("(x1^2)^3", 1), "(x1^2.0)^3.0");
        assert_eq!(roundtrip("x1^2^3", 1), "x1^2.0^3.0");
        assert_eq!(roundtrip("-(x1*x2)", 2), "-(x1 * x2)");
        assert_eq!(roundtrip("(-x1)^2", 1), "(-x1)^2.0");
        assert_eq!(
            roundtrip("e^(x2-x1) + B*(x2-x1) - x3", 3),
            "exp(x2 - x1) + B * (x2 - x1) - x3"
        );
        roundtrip("x1 / (x2 * x3)", 3);
        roundtrip("x1 * -x2 ^ -2", 2);
        roundtrip("1e-7 * x1 + 1.5e300", 1);
    }
}

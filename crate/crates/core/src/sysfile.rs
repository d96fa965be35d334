//! Plain-text system definitions.
//!
//! One `key = value` per line; `#` starts a comment. Keys:
//!
//! ```text
//! name = oscillator          # optional, defaults to "custom"
//! dim = 2                    # required, before any expression
//! param k = 1.5              # named constant, usable in expressions
//! V = 0.5*(x1^2 + k*x2^2)    # required
//! f1 = k*x2                  # f1..fn, all or none
//! f2 = -x1
//! L12 = 1                    # Lij, 1-based; unlisted entries are 0
//! L21 = -1
//! class = antisymmetric      # declared class of L (detected if absent)
//! box = -2, 2                # sampling box for class detection
//! V2 = x1*x2                 # extra functions, recorded as monitors
//! ```
//!
//! With `f` and no `L`, the structure matrix is built from `f` and `∇V`
//! pointwise and its class is detected from the sign of `f·∇V`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::{matrix_field, parse, scalar_field, vector_field, Expr};
use crate::lingrad::{build_linear_gradient_system, detect_matrix_class, ClassSampling, DEFAULT_GRAD_EPS};
use crate::structure::StructureClass;
use crate::system::{LinearGradientSystem, Params};

/// Tolerance used when classifying a file-supplied `L` that has no `class`.
pub const DETECT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Source {
    text: String,
    line: usize,
    column: usize,
}

/// A parsed system file, before parameters are bound.
#[derive(Debug, Clone)]
pub struct SystemFile {
    pub name: String,
    pub dim: usize,
    pub params: Params,
    pub class: Option<StructureClass>,
    pub sample_box: (f64, f64),
    v: Source,
    f: BTreeMap<usize, Source>,
    l: BTreeMap<(usize, usize), Source>,
    extra: BTreeMap<usize, Source>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_index(s: &str, line: usize, column: usize, dim: usize) -> Result<usize> {
    let i: usize = s
        .parse()
        .map_err(|_| syntax(line, column, format!("bad index `{s}`")))?;
    if i == 0 || i > dim {
        return Err(syntax(line, column, format!("index {i} out of range 1..={dim}")));
    }
    Ok(i)
}

fn parse_number(s: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| syntax(line, column, format!("expected a number, found `{}`", s.trim())))?;
    if !v.is_finite() {
        return Err(syntax(line, column, "number must be finite"));
    }
    Ok(v)
}

impl SystemFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut dim = None;
        let mut params = Params::new();
        let mut class = None;
        let mut sample_box = None;
        let mut v = None;
        let mut f = BTreeMap::new();
        let mut l = BTreeMap::new();
        let mut extra = BTreeMap::new();

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(syntax(line, col, "expected `key = value`"));
            };
            let key = content[..eq].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            let value_raw = &content[eq + 1..];
            let value = value_raw.trim();
            let value_col = eq + 2 + (value_raw.len() - value_raw.trim_start().len());
            if value.is_empty() {
                return Err(syntax(line, value_col, format!("missing value for `{key}`")));
            }
            let src = Source {
                text: value.to_string(),
                line,
                column: value_col,
            };
            let need_dim = || dim.ok_or_else(|| syntax(line, key_col, "`dim` must come before expressions"));

            if key == "name" {
                name = Some(value.to_string());
            } else if key == "dim" {
                let d: usize = value
                    .parse()
                    .map_err(|_| syntax(line, value_col, format!("bad dimension `{value}`")))?;
                if d == 0 {
                    return Err(syntax(line, value_col, "dimension must be at least 1"));
                }
                if dim.replace(d).is_some() {
                    return Err(syntax(line, key_col, "duplicate `dim`"));
                }
            } else if let Some(pname) = key.strip_prefix("param ") {
                let pname = pname.trim();
                let valid = pname
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && pname.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !valid {
                    return Err(syntax(line, key_col, format!("bad parameter name `{pname}`")));
                }
                params.insert(pname.to_string(), parse_number(value, line, value_col)?);
            } else if key == "class" {
                class = Some(
                    value
                        .parse::<StructureClass>()
                        .map_err(|_| syntax(line, value_col, format!("unknown class `{value}`")))?,
                );
            } else if key == "box" {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 2 {
                    return Err(syntax(line, value_col, "expected `lo, hi`"));
                }
                let lo = parse_number(parts[0], line, value_col)?;
                let hi = parse_number(parts[1], line, value_col)?;
                if !(lo < hi) {
                    return Err(syntax(line, value_col, "box needs lo < hi"));
                }
                sample_box = Some((lo, hi));
            } else if key == "V" || key == "V1" {
                need_dim()?;
                if v.replace(src).is_some() {
                    return Err(syntax(line, key_col, "duplicate `V`"));
                }
            } else if let Some(idx) = key.strip_prefix('V') {
                need_dim()?;
                let j: usize = idx
                    .parse()
                    .ok()
                    .filter(|&j| j >= 2)
                    .ok_or_else(|| syntax(line, key_col, format!("unknown key `{key}`")))?;
                if extra.insert(j, src).is_some() {
                    return Err(syntax(line, key_col, format!("duplicate `{key}`")));
                }
            } else if let Some(idx) = key.strip_prefix('f') {
                let d = need_dim()?;
                let i = parse_index(idx, line, key_col, d)?;
                if f.insert(i, src).is_some() {
                    return Err(syntax(line, key_col, format!("duplicate `{key}`")));
                }
            } else if let Some(idx) = key.strip_prefix('L') {
                let d = need_dim()?;
                let (i, j) = if d < 10 && idx.len() == 2 && idx.chars().all(|c| c.is_ascii_digit()) {
                    (&idx[..1], &idx[1..])
                } else {
                    idx.split_once(',')
                        .ok_or_else(|| syntax(line, key_col, format!("bad matrix key `{key}`; use Lij or Li,j")))?
                };
                let ij = (
                    parse_index(i.trim(), line, key_col, d)?,
                    parse_index(j.trim(), line, key_col, d)?,
                );
                if l.insert(ij, src).is_some() {
                    return Err(syntax(line, key_col, format!("duplicate `{key}`")));
                }
            } else {
                return Err(syntax(line, key_col, format!("unknown key `{key}`")));
            }
        }

        let dim = dim.ok_or_else(|| syntax(1, 1, "missing `dim`"))?;
        let v = v.ok_or_else(|| syntax(1, 1, "missing `V`"))?;
        if !f.is_empty() && f.len() != dim {
            let missing = (1..=dim).find(|i| !f.contains_key(i)).unwrap_or(1);
            return Err(syntax(
                1,
                1,
                format!("f{missing} missing: give all of f1..f{dim} or none"),
            ));
        }
        if f.is_empty() && l.is_empty() {
            return Err(syntax(1, 1, "need f1..fn, L entries, or both"));
        }
        let file = SystemFile {
            name: name.unwrap_or_else(|| "custom".into()),
            dim,
            params,
            class,
            sample_box: sample_box.unwrap_or((-2.0, 2.0)),
            v,
            f,
            l,
            extra,
        };
        // surface expression errors at load time
        file.expressions(&file.params)?;
        Ok(file)
    }

    fn parse_source(&self, s: &Source, names: &[&str]) -> Result<Expr> {
        parse(&s.text, self.dim, names).map_err(|e| match e {
            Error::Syntax { line, column, message } => Error::Syntax {
                line: s.line + line - 1,
                column: if line == 1 { s.column + column - 1 } else { column },
                message,
            },
            Error::UnknownIdentifier { name, line, column } => Error::UnknownIdentifier {
                name,
                line: s.line + line - 1,
                column: if line == 1 { s.column + column - 1 } else { column },
            },
            other => other,
        })
    }

    #[allow(clippy::type_complexity)]
    fn expressions(&self, params: &Params) -> Result<(Expr, Vec<Expr>, Vec<Expr>, Vec<(String, Expr)>)> {
        let names: Vec<&str> = params.keys().map(String::as_str).collect();
        let v = self.parse_source(&self.v, &names)?;
        let f = self
            .f
            .values()
            .map(|s| self.parse_source(s, &names))
            .collect::<Result<Vec<_>>>()?;
        let mut l = Vec::new();
        if !self.l.is_empty() {
            for i in 1..=self.dim {
                for j in 1..=self.dim {
                    l.push(match self.l.get(&(i, j)) {
                        Some(s) => self.parse_source(s, &names)?,
                        None => Expr::Num(0.0),
                    });
                }
            }
        }
        let extra = self
            .extra
            .iter()
            .map(|(j, s)| Ok((format!("V{j}"), self.parse_source(s, &names)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((v, f, l, extra))
    }

    /// Bind parameters (file values, replaced by `overrides`) and build the
    /// system. Overrides must name parameters declared in the file.
    pub fn to_system(&self, overrides: &Params) -> Result<LinearGradientSystem> {
        let mut params = self.params.clone();
        for (k, v) in overrides {
            if !params.contains_key(k) {
                return Err(Error::Parameter(format!("`{}` declares no parameter `{k}`", self.name)));
            }
            if !v.is_finite() {
                return Err(Error::Parameter(format!("parameter `{k}` must be finite")));
            }
            params.insert(k.clone(), *v);
        }
        let (v_expr, f_exprs, l_exprs, extra) = self.expressions(&params)?;
        let n = self.dim;
        let v = scalar_field(&v_expr, n, &params)?;
        let f = if f_exprs.is_empty() {
            None
        } else {
            Some(vector_field(&f_exprs, n, &params)?)
        };
        let sampling = ClassSampling {
            lo: self.sample_box.0,
            hi: self.sample_box.1,
            ..ClassSampling::default()
        };

        let mut sys = if l_exprs.is_empty() {
            let f = f.expect("f or L present");
            let sys = build_linear_gradient_system(self.name.clone(), f, v, &sampling, DEFAULT_GRAD_EPS)?;
            match self.class {
                Some(c) => {
                    let l = sys.l().clone().with_declared_class(c);
                    let raw = sys.raw_f().cloned().expect("built from f");
                    LinearGradientSystem::new(self.name.clone(), l, sys.v().clone())?.with_raw_f(raw)?
                }
                None => sys,
            }
        } else {
            let mut l = matrix_field(&l_exprs, n, &params, StructureClass::Unclassified)?;
            let class = match self.class {
                Some(c) => c,
                None => detect_matrix_class(&l, &sampling.cloud(n), DETECT_TOL)?.class,
            };
            l = l.with_declared_class(class);
            let sys = LinearGradientSystem::new(self.name.clone(), l, v)?;
            match f {
                Some(f) => sys.with_raw_f(f)?,
                None => sys,
            }
        };
        for (name, e) in extra {
            sys = sys.with_monitor(name, scalar_field(&e, n, &params)?)?;
        }
        Ok(sys.with_parameters(params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    const OSCILLATOR: &str = "
# harmonic oscillator
name = oscillator
dim = 2
param k = 2
V = 0.5*(x1^2 + k*x2^2)
L12 = 1
L21 = -1
f1 = k*x2
f2 = -x1
V2 = x1 + x2   # monitor
";

    #[test]
    fn parses_and_builds() {
        let file = SystemFile::parse(OSCILLATOR).unwrap();
        assert_eq!(file.name, "oscillator");
        let sys = file.to_system(&Params::new()).unwrap();
        assert_eq!(sys.declared_class(), StructureClass::Antisymmetric);
        let x = dvector![1.0, 1.0];
        assert_eq!(sys.v().value(&x).unwrap(), 1.5);
        assert_eq!(sys.rhs(&x).unwrap(), dvector![2.0, -1.0]);
        assert_eq!(sys.reconstruction_residual(&x).unwrap(), Some(0.0));
        assert_eq!(sys.monitors()[0].0, "V2");

        let over: Params = [("k".to_string(), 4.0)].into_iter().collect();
        let sys = file.to_system(&over).unwrap();
        assert_eq!(sys.v().value(&x).unwrap(), 2.5);
        let bad: Params = [("q".to_string(), 4.0)].into_iter().collect();
        assert!(file.to_system(&bad).is_err());
    }

    #[test]
    fn f_without_l_uses_the_default_construction() {
        let text = "dim = 2\nV = 0.5*x2^2 - cos(x1)\nf1 = x2\nf2 = -sin(x1)\n";
        let sys = SystemFile::parse(text).unwrap().to_system(&Params::new()).unwrap();
        assert_eq!(sys.declared_class(), StructureClass::Antisymmetric);
        let x = dvector![0.7, -0.2];
        assert!(sys.reconstruction_residual(&x).unwrap().unwrap() < 1e-14);
    }

    #[test]
    fn l_without_f_detects_class() {
        let text = "dim = 2\nV = x1^2 + x2^2\nL11 = -1\nL22 = -x1^2\n";
        let sys = SystemFile::parse(text).unwrap().to_system(&Params::new()).unwrap();
        assert_eq!(sys.declared_class(), StructureClass::NegativeSemidefinite);
        assert!(sys.raw_f().is_none());
    }

    #[test]
    fn expression_errors_point_into_the_file() {
        let text = "dim = 2\nV = x1 + * x2\nf1 = 0\nf2 = 0\n";
        match SystemFile::parse(text) {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("{other:?}"),
        }
        match SystemFile::parse("dim = 1\nV = q*x1\nf1 = 1\n") {
            Err(Error::UnknownIdentifier { name, line, column }) => {
                assert_eq!((name.as_str(), line, column), ("q", 2, 5))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(SystemFile::parse("V = x1\nf1 = 1\n").is_err());
        assert!(SystemFile::parse("dim = 2\nf1 = 1\nf2 = 1\n").is_err());
        assert!(SystemFile::parse("dim = 2\nV = x1\nf1 = 1\n").is_err());
        assert!(SystemFile::parse("dim = 2\nV = x1\n").is_err());
        assert!(SystemFile::parse("dim = 2\nV = x1\nL33 = 1\n").is_err());
        assert!(SystemFile::parse("dim = 2\nV = x1\nf1 = 1\nf2 = 1\nwhat = 3\n").is_err());
        assert!(SystemFile::parse("dim = 2\nV = x3\nf1 = 1\nf2 = 1\n").is_err());
        assert!(SystemFile::parse("dim = 2\nV = x1\nL12 = 1\nclass = sideways\n").is_err());
    }
}

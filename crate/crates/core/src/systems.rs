//! Builtin model catalog.
//!
//! Every entry comes with its original right-hand side (`raw_f`) so the
//! linear-gradient representation can be checked against it. Parameters
//! not supplied take the documented defaults; unknown names are rejected.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{matrix_field, parse, scalar_field, vector_field, Expr};
use crate::field::{ScalarField, StateVector, StructureMatrixField};
use crate::multigrad::{MultiLinearGradientSystem, Tensor, TensorField};
use crate::structure::StructureClass;
use crate::system::{LinearGradientSystem, Params};

/// Default potential of `damped-particle`: `1 - cos(x1)`, written so that
/// it keeps full relative accuracy near the minimum.
pub const DEFAULT_POTENTIAL: &str = "2*sin(x1/2)^2";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    /// `None` for parameters that are only meaningful in a special case.
    pub default: Option<f64>,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub dim: usize,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    /// True for entries in multilinear (tensor) form.
    pub multilinear: bool,
}

const INERTIA: &[ParamSpec] = &[
    ParamSpec {
        name: "I1",
        default: Some(1.0),
        constraint: "> 0",
    },
    ParamSpec {
        name: "I2",
        default: Some(2.0),
        constraint: "> 0",
    },
    ParamSpec {
        name: "I3",
        default: Some(3.0),
        constraint: "> 0",
    },
];

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "pendulum",
        dim: 2,
        summary: "pendulum, V = x2^2/2 - cos(x1), L = J",
        params: &[],
        multilinear: false,
    },
    CatalogEntry {
        name: "rigid-body",
        dim: 3,
        summary: "free rigid body, Lie-Poisson structure, V = sum xi^2/(2 Ii); monitors the Casimir |x|^2/2",
        params: INERTIA,
        multilinear: false,
    },
    CatalogEntry {
        name: "rigid-body-nambu",
        dim: 3,
        summary: "free rigid body in Nambu form, L = Levi-Civita, V1 = sum xi^2/(2 Ii), V2 = |x|^2/2",
        params: INERTIA,
        multilinear: true,
    },
    CatalogEntry {
        name: "lotka-volterra",
        dim: 3,
        summary: "Lotka-Volterra system with integral V = exp(x2-x1) + B(x2-x1) - x3",
        params: &[ParamSpec {
            name: "B",
            default: Some(1.0),
            constraint: "finite",
        }],
        multilinear: false,
    },
    CatalogEntry {
        name: "gradient-example",
        dim: 2,
        summary: "gradient system, V = x1^2 (x1-1)^2 + x2^2, L = -Id",
        params: &[],
        multilinear: false,
    },
    CatalogEntry {
        name: "lyapunov-example",
        dim: 2,
        summary: "x1' = -x2 - x1^3, x2' = x1 - x2^3 with Lyapunov function V = x1^2 + x2^2",
        params: &[],
        multilinear: false,
    },
    CatalogEntry {
        name: "damped-particle",
        dim: 2,
        summary: "particle with friction, V = x2^2/2 + P(x1), L = [[0,1],[-1,-alpha]]",
        params: &[ParamSpec {
            name: "alpha",
            default: Some(1.0),
            constraint: ">= 0",
        }],
        multilinear: false,
    },
    CatalogEntry {
        name: "wind-oscillation",
        dim: 2,
        summary: "averaged wind-induced oscillation; zeta = rho cos(theta), lambda = rho sin(theta)",
        params: &[
            ParamSpec {
                name: "zeta",
                default: Some(0.5),
                constraint: ">= 0",
            },
            ParamSpec {
                name: "lambda",
                default: Some(0.5),
                constraint: "finite",
            },
            ParamSpec {
                name: "theta",
                default: None,
                constraint: "only when zeta = lambda = 0 (default 0)",
            },
        ],
        multilinear: false,
    },
    CatalogEntry {
        name: "wind-degenerate-integral",
        dim: 2,
        summary: "wind oscillation at zeta = lambda = 0 with integral V1 = (x1 x2^2 - x1^3/3)/2, L = J",
        params: &[],
        multilinear: false,
    },
    CatalogEntry {
        name: "wind-degenerate-lyapunov",
        dim: 2,
        summary: "wind oscillation at zeta = lambda = 0 with Lyapunov function V2 = (x2^3/3 - x1^2 x2)/2, L = -Id",
        params: &[],
        multilinear: false,
    },
];

/// Catalog names, in catalog order.
pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

pub fn entry(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownSystem {
            name: name.to_string(),
            available: names(),
        })
}

/// A catalog system in either form.
#[derive(Debug, Clone)]
pub enum Builtin {
    Linear(LinearGradientSystem),
    Multi(MultiLinearGradientSystem),
}

/// Build any catalog entry.
pub fn builtin(name: &str, params: &Params) -> Result<Builtin> {
    builtin_with_potential(name, params, None)
}

/// Like [`builtin`], with a potential expression in `x1` for
/// `damped-particle` (rejected for every other entry).
pub fn builtin_with_potential(name: &str, params: &Params, potential: Option<&str>) -> Result<Builtin> {
    let e = entry(name)?;
    if potential.is_some() && name != "damped-particle" {
        return Err(Error::Parameter(format!("`{name}` does not take a potential")));
    }
    let p = resolve(e, params)?;
    Ok(match name {
        "pendulum" => Builtin::Linear(pendulum()?),
        "rigid-body" => Builtin::Linear(rigid_body(p)?),
        "rigid-body-nambu" => Builtin::Multi(rigid_body_nambu(p)?),
        "lotka-volterra" => Builtin::Linear(lotka_volterra(p)?),
        "gradient-example" => Builtin::Linear(gradient_example()?),
        "lyapunov-example" => Builtin::Linear(lyapunov_example()?),
        "damped-particle" => Builtin::Linear(damped_particle(p, potential.unwrap_or(DEFAULT_POTENTIAL))?),
        "wind-oscillation" => Builtin::Linear(wind_oscillation(p)?),
        "wind-degenerate-integral" => Builtin::Linear(wind_degenerate_integral()?),
        "wind-degenerate-lyapunov" => Builtin::Linear(wind_degenerate_lyapunov()?),
        _ => unreachable!("catalog and builder out of sync"),
    })
}

/// Build a catalog entry in linear-gradient form.
pub fn build(name: &str, params: &Params) -> Result<LinearGradientSystem> {
    build_with_potential(name, params, None)
}

pub fn build_with_potential(name: &str, params: &Params, potential: Option<&str>) -> Result<LinearGradientSystem> {
    match builtin_with_potential(name, params, potential)? {
        Builtin::Linear(s) => Ok(s),
        Builtin::Multi(_) => Err(Error::InvalidArgument(format!("`{name}` is a multilinear system"))),
    }
}

/// Build a catalog entry in multilinear form.
pub fn build_multi(name: &str, params: &Params) -> Result<MultiLinearGradientSystem> {
    match builtin(name, params)? {
        Builtin::Multi(s) => Ok(s),
        Builtin::Linear(_) => Err(Error::InvalidArgument(format!("`{name}` is not a multilinear system"))),
    }
}

fn resolve(e: &CatalogEntry, given: &Params) -> Result<Params> {
    for (k, v) in given {
        if !e.params.iter().any(|p| p.name == k) {
            let known: Vec<&str> = e.params.iter().map(|p| p.name).collect();
            return Err(Error::Parameter(format!(
                "`{}` has no parameter `{k}` (parameters: {})",
                e.name,
                if known.is_empty() {
                    "none".to_string()
                } else {
                    known.join(", ")
                }
            )));
        }
        if !v.is_finite() {
            return Err(Error::Parameter(format!("parameter `{k}` must be finite")));
        }
    }
    let mut out = Params::new();
    for p in e.params {
        if let Some(v) = given.get(p.name).copied().or(p.default) {
            out.insert(p.name.to_string(), v);
        }
    }
    Ok(out)
}

fn exprs(sources: &[&str], dim: usize, params: &Params) -> Result<Vec<Expr>> {
    let names: Vec<&str> = params.keys().map(String::as_str).collect();
    sources.iter().map(|s| parse(s, dim, &names)).collect()
}

fn scalar(source: &str, dim: usize, params: &Params) -> Result<ScalarField> {
    scalar_field(&exprs(&[source], dim, params)?[0], dim, params)
}

/// A system whose `V`, `f` and `L` are all given as expressions.
fn from_sources(
    name: &str,
    dim: usize,
    v: &str,
    f: &[&str],
    l: &[&str],
    class: StructureClass,
    params: &Params,
) -> Result<LinearGradientSystem> {
    let lf = matrix_field(&exprs(l, dim, params)?, dim, params, class)?;
    let ff = vector_field(&exprs(f, dim, params)?, dim, params)?;
    LinearGradientSystem::new(name, lf, scalar(v, dim, params)?)?.with_raw_f(ff)
}

fn positive(p: &Params, name: &str) -> Result<f64> {
    let v = p[name];
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Parameter(format!("`{name}` must be positive, got {v}")))
    }
}

fn pendulum() -> Result<LinearGradientSystem> {
    from_sources(
        "pendulum",
        2,
        "0.5*x2^2 - cos(x1)",
        &["x2", "-sin(x1)"],
        &["0", "1", "-1", "0"],
        StructureClass::Antisymmetric,
        &Params::new(),
    )
}

fn rigid_body(p: Params) -> Result<LinearGradientSystem> {
    for k in ["I1", "I2", "I3"] {
        positive(&p, k)?;
    }
    let sys = from_sources(
        "rigid-body",
        3,
        "0.5*(x1^2/I1 + x2^2/I2 + x3^2/I3)",
        &["x2*x3*(1/I2 - 1/I3)", "x1*x3*(1/I3 - 1/I1)", "x1*x2*(1/I1 - 1/I2)"],
        &["0", "x3", "-x2", "-x3", "0", "x1", "x2", "-x1", "0"],
        StructureClass::Antisymmetric,
        &p,
    )?;
    sys.with_monitor("casimir", scalar("0.5*(x1^2 + x2^2 + x3^2)", 3, &p)?)
        .map(|s| s.with_parameters(p))
}

fn rigid_body_nambu(p: Params) -> Result<MultiLinearGradientSystem> {
    for k in ["I1", "I2", "I3"] {
        positive(&p, k)?;
    }
    let f = vector_field(
        &exprs(
            &["x2*x3*(1/I2 - 1/I3)", "x1*x3*(1/I3 - 1/I1)", "x1*x2*(1/I1 - 1/I2)"],
            3,
            &p,
        )?,
        3,
        &p,
    )?;
    MultiLinearGradientSystem::new(
        "rigid-body-nambu",
        TensorField::constant(Tensor::levi_civita(3)?),
        vec![
            scalar("0.5*(x1^2/I1 + x2^2/I2 + x3^2/I3)", 3, &p)?,
            scalar("0.5*(x1^2 + x2^2 + x3^2)", 3, &p)?,
        ],
    )?
    .with_raw_f(f)
    .map(|s| s.with_parameters(p))
}

fn lotka_volterra(p: Params) -> Result<LinearGradientSystem> {
    Ok(from_sources(
        "lotka-volterra",
        3,
        "exp(x2 - x1) + B*(x2 - x1) - x3",
        &["exp(x3)", "exp(x1) + exp(x3)", "B*exp(x1) + exp(x2)"],
        &[
            "0",
            "0",
            "-exp(x3)",
            "0",
            "0",
            "-exp(x1) - exp(x3)",
            "exp(x3)",
            "exp(x1) + exp(x3)",
            "0",
        ],
        StructureClass::Antisymmetric,
        &p,
    )?
    .with_parameters(p))
}

fn gradient_example() -> Result<LinearGradientSystem> {
    from_sources(
        "gradient-example",
        2,
        "x1^2*(x1 - 1)^2 + x2^2",
        &["-2*x1*(x1 - 1)*(2*x1 - 1)", "-2*x2"],
        &["-1", "0", "0", "-1"],
        StructureClass::NegativeDefinite,
        &Params::new(),
    )
}

/// Half the coefficients printed for this example, so that `L∇V = f`.
/// At the origin `L` takes its limit `[[0, -1/2], [1/2, 0]]`.
fn lyapunov_example_l(x: &StateVector) -> Result<DMatrix<f64>> {
    let (x1, x2) = (x[0], x[1]);
    let r2 = x1 * x1 + x2 * x2;
    let (a, b) = if r2 == 0.0 {
        (0.0, -1.0)
    } else {
        (
            -(x1.powi(4) + x2.powi(4)) / r2,
            -(r2 + x2 * x1.powi(3) - x1 * x2.powi(3)) / r2,
        )
    };
    let (a, b) = (a / 2.0, b / 2.0);
    Ok(DMatrix::from_row_slice(2, 2, &[a, b, -b, a]))
}

fn lyapunov_example() -> Result<LinearGradientSystem> {
    let empty = Params::new();
    let l = StructureMatrixField::new(2, StructureClass::NegativeDefinite, lyapunov_example_l);
    let f = vector_field(&exprs(&["-x2 - x1^3", "x1 - x2^3"], 2, &empty)?, 2, &empty)?;
    LinearGradientSystem::new("lyapunov-example", l, scalar("x1^2 + x2^2", 2, &empty)?)?.with_raw_f(f)
}

fn damped_particle(p: Params, potential: &str) -> Result<LinearGradientSystem> {
    let alpha = p["alpha"];
    if alpha < 0.0 {
        return Err(Error::Parameter(format!("`alpha` must be >= 0, got {alpha}")));
    }
    let pot = parse(potential, 1, &[]).map_err(|e| Error::Parameter(format!("potential `{potential}`: {e}")))?;
    let dpot = pot.differentiate(0);
    // the potential is written in x1 only, so it carries over to dimension 2
    let v = Expr::Add(
        Box::new(Expr::Mul(
            Box::new(Expr::Num(0.5)),
            Box::new(Expr::Pow(Box::new(Expr::Var(1)), Box::new(Expr::Num(2.0)))),
        )),
        Box::new(pot),
    );
    let f2 = Expr::Sub(
        Box::new(Expr::Neg(Box::new(dpot))),
        Box::new(Expr::Mul(Box::new(Expr::Num(alpha)), Box::new(Expr::Var(1)))),
    );
    let class = if alpha == 0.0 {
        StructureClass::Antisymmetric
    } else {
        StructureClass::NegativeSemidefinite
    };
    let l = StructureMatrixField::constant(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -alpha]), class);
    let f = vector_field(&[Expr::Var(1), f2], 2, &Params::new())?;
    Ok(
        LinearGradientSystem::new("damped-particle", l, scalar_field(&v, 2, &Params::new())?)?
            .with_raw_f(f)?
            .with_parameters(p),
    )
}

fn wind_oscillation(mut p: Params) -> Result<LinearGradientSystem> {
    let zeta = p["zeta"];
    let lambda = p["lambda"];
    if zeta < 0.0 {
        return Err(Error::Parameter(format!("`zeta` must be >= 0, got {zeta}")));
    }
    let rho = zeta.hypot(lambda);
    let (c, s, theta) = if rho == 0.0 {
        let theta = p.get("theta").copied().unwrap_or(0.0);
        (theta.cos(), theta.sin(), theta)
    } else {
        if p.contains_key("theta") {
            return Err(Error::Parameter(
                "`theta` is derived from zeta and lambda unless both are zero".into(),
            ));
        }
        (zeta / rho, lambda / rho, lambda.atan2(zeta))
    };
    let class = if c == 0.0 {
        StructureClass::Antisymmetric
    } else if c > 0.0 {
        StructureClass::NegativeDefinite
    } else {
        StructureClass::Unclassified
    };
    let inner: Params = [("rho", rho), ("c", c), ("s", s), ("zeta", zeta), ("lambda", lambda)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let sys = from_sources(
        "wind-oscillation",
        2,
        "0.5*rho*(x1^2 + x2^2) - 0.5*s*(x1*x2^2 - x1^3/3) + 0.5*c*(x2^3/3 - x1^2*x2)",
        &[
            "-zeta*x1 - lambda*x2 + x1*x2",
            "lambda*x1 - zeta*x2 + 0.5*(x1^2 - x2^2)",
        ],
        &["-c", "-s", "s", "-c"],
        class,
        &inner,
    )?;
    p.insert("rho".into(), rho);
    p.insert("theta".into(), theta);
    Ok(sys.with_parameters(p))
}

const WIND_DEGENERATE_F: [&str; 2] = ["x1*x2", "0.5*(x1^2 - x2^2)"];

fn wind_degenerate_integral() -> Result<LinearGradientSystem> {
    from_sources(
        "wind-degenerate-integral",
        2,
        "0.5*(x1*x2^2 - x1^3/3)",
        &WIND_DEGENERATE_F,
        &["0", "1", "-1", "0"],
        StructureClass::Antisymmetric,
        &Params::new(),
    )
}

fn wind_degenerate_lyapunov() -> Result<LinearGradientSystem> {
    from_sources(
        "wind-degenerate-lyapunov",
        2,
        "0.5*(x2^3/3 - x1^2*x2)",
        &WIND_DEGENERATE_F,
        &["-1", "0", "0", "-1"],
        StructureClass::NegativeDefinite,
        &Params::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lingrad::verify_jacobi;
    use crate::multigrad::multilinear_rhs;
    use crate::sampling::halton_box;
    use crate::structure::classify_matrix;
    use nalgebra::dvector;

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn every_linear_entry_reconstructs_f() {
        for e in CATALOG.iter().filter(|e| !e.multilinear) {
            let sys = build(e.name, &Params::new()).unwrap();
            assert_eq!(sys.dim(), e.dim);
            for x in halton_box(e.dim, 100, -2.0, 2.0) {
                let r = sys.reconstruction_residual(&x).unwrap().unwrap();
                assert!(r <= 1e-10, "{}: {r} at {x:?}", e.name);
            }
        }
    }

    #[test]
    fn declared_classes_hold_at_sample_points() {
        for e in CATALOG.iter().filter(|e| !e.multilinear) {
            let sys = build(e.name, &Params::new()).unwrap();
            for x in halton_box(e.dim, 50, -2.0, 2.0) {
                let m = sys.l().eval(&x).unwrap();
                let actual = classify_matrix(&m, 1e-12).unwrap();
                assert!(
                    actual.implies(sys.declared_class()),
                    "{}: {actual} vs {}",
                    e.name,
                    sys.declared_class()
                );
            }
        }
    }

    #[test]
    fn pendulum_fields() {
        let sys = build("pendulum", &Params::new()).unwrap();
        let x = dvector![0.0, 1.0];
        assert!((sys.v().value(&x).unwrap() - (0.5 - 1.0)).abs() < 1e-15);
        assert_eq!(sys.declared_class(), StructureClass::Antisymmetric);
    }

    #[test]
    fn rigid_body_jacobi_and_nambu_agree() {
        let sys = build("rigid-body", &Params::new()).unwrap();
        let nambu = build_multi("rigid-body-nambu", &Params::new()).unwrap();
        for x in halton_box(3, 100, -2.0, 2.0) {
            assert!(verify_jacobi(sys.l(), &x, 1e-5).unwrap() <= 1e-8);
            let a = sys.rhs(&x).unwrap();
            let b = multilinear_rhs(&nambu, &x).unwrap();
            assert!((a - b).norm() <= 1e-12);
        }
        assert_eq!(sys.monitors().len(), 1);
        assert_eq!(sys.parameters()["I3"], 3.0);
    }

    #[test]
    fn lyapunov_example_limit_at_origin() {
        let sys = build("lyapunov-example", &Params::new()).unwrap();
        let l0 = sys.l().eval(&dvector![0.0, 0.0]).unwrap();
        assert_eq!(l0, DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]));
        let tiny = sys.l().eval(&dvector![1e-9, 0.0]).unwrap();
        assert!((tiny - l0).amax() < 1e-8);
    }

    #[test]
    fn damped_particle_classes_and_potential() {
        let free = build("damped-particle", &params(&[("alpha", 0.0)])).unwrap();
        assert_eq!(free.declared_class(), StructureClass::Antisymmetric);
        let damped = build_with_potential("damped-particle", &params(&[("alpha", 0.5)]), Some("0.5*x1^2")).unwrap();
        assert_eq!(damped.declared_class(), StructureClass::NegativeSemidefinite);
        let x = dvector![1.0, 1.0];
        assert_eq!(damped.v().value(&x).unwrap(), 1.0);
        assert_eq!(damped.raw_f().unwrap().eval(&x).unwrap(), dvector![1.0, -1.5]);
        assert!(build("damped-particle", &params(&[("alpha", -1.0)])).is_err());
        assert!(build_with_potential("damped-particle", &Params::new(), Some("x2")).is_err());
        assert!(build_with_potential("pendulum", &Params::new(), Some("x1")).is_err());
    }

    #[test]
    fn wind_oscillation_regimes() {
        let hamiltonian = build("wind-oscillation", &params(&[("zeta", 0.0), ("lambda", 0.7)])).unwrap();
        assert_eq!(hamiltonian.declared_class(), StructureClass::Antisymmetric);
        let gradient = build("wind-oscillation", &params(&[("zeta", 0.3), ("lambda", 0.0)])).unwrap();
        assert_eq!(gradient.declared_class(), StructureClass::NegativeDefinite);
        for x in halton_box(2, 50, -2.0, 2.0) {
            let f = hamiltonian.raw_f().unwrap().eval(&x).unwrap();
            assert!(f.dot(&hamiltonian.v().gradient(&x).unwrap()).abs() < 1e-12);
            let f = gradient.raw_f().unwrap().eval(&x).unwrap();
            assert!(f.dot(&gradient.v().gradient(&x).unwrap()) <= 1e-12);
        }
        let theta = std::f64::consts::FRAC_PI_2;
        let degenerate = build(
            "wind-oscillation",
            &params(&[("zeta", 0.0), ("lambda", 0.0), ("theta", theta)]),
        )
        .unwrap();
        let x = dvector![0.4, -0.3];
        assert!(degenerate.reconstruction_residual(&x).unwrap().unwrap() < 1e-12);
        assert!(build("wind-oscillation", &params(&[("theta", 1.0)])).is_err());
        assert!(build("wind-oscillation", &params(&[("zeta", -0.1)])).is_err());
        let p = build("wind-oscillation", &params(&[("zeta", 0.6), ("lambda", 0.8)])).unwrap();
        assert!((p.parameters()["rho"] - 1.0).abs() < 1e-15);
        let l = p.l().eval(&x).unwrap();
        assert_eq!(classify_matrix(&l, 1e-12).unwrap(), StructureClass::NegativeDefinite);
    }

    #[test]
    fn unknown_names_and_parameters() {
        match build("nope", &Params::new()) {
            Err(Error::UnknownSystem { available, .. }) => assert!(available.contains(&"pendulum")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            build("pendulum", &params(&[("B", 1.0)])),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build("rigid-body", &params(&[("I2", 0.0)])),
            Err(Error::Parameter(_))
        ));
        assert!(build("rigid-body-nambu", &Params::new()).is_err());
        assert!(build_multi("pendulum", &Params::new()).is_err());
    }
}

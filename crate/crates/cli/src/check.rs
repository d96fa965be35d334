//! `check`: structure report for a system.

use std::fmt::Write as _;
use std::io::Write;

use dgtk::discgrad::check_axioms;
use dgtk::lingrad::detect_matrix_class;
use dgtk::multigrad::{lyapunov_bracket_w, multilinear_rhs, MultiLinearGradientSystem};
use dgtk::sampling::halton_box;
use dgtk::{verify_jacobi, DiscreteGradientScheme, LinearGradientSystem, ScalarField, StateVector, StructureClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::CheckArgs;
use crate::failure::Failure;
use crate::source::{self, Loaded, Source};

/// Eigenvalue tolerance for class detection.
pub const CLASS_TOL: f64 = 1e-10;
/// Central-difference step for the Jacobi identity.
pub const JACOBI_STEP: f64 = 1e-5;
const PAIR_SEED: u64 = 0x00d9_c4ec;

const SCHEMES: [DiscreteGradientScheme; 3] = [
    DiscreteGradientScheme::Midpoint,
    DiscreteGradientScheme::CoordinateIncrement,
    DiscreteGradientScheme::MeanValue { quadrature_points: 4 },
];

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

/// Largest finite value of `f` over `points`, with the number of points
/// where it could not be evaluated.
fn worst<F: Fn(&StateVector) -> dgtk::Result<f64>>(points: &[StateVector], f: F) -> (f64, usize) {
    let mut max = 0.0_f64;
    let mut skipped = 0;
    for x in points {
        match f(x) {
            Ok(v) if v.is_finite() => max = max.max(v),
            _ => skipped += 1,
        }
    }
    (max, skipped)
}

fn skipped_note(skipped: usize) -> String {
    if skipped == 0 {
        String::new()
    } else {
        format!(" ({skipped} points skipped)")
    }
}

fn random_pairs(dim: usize, count: usize, (lo, hi): (f64, f64)) -> Vec<(StateVector, StateVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    let point = |rng: &mut ChaCha8Rng| StateVector::from_fn(dim, |_, _| rng.random_range(lo..hi));
    (0..count).map(|_| (point(&mut rng), point(&mut rng))).collect()
}

fn axioms(out: &mut String, functions: &[(String, ScalarField)], pairs: &[(StateVector, StateVector)]) {
    for (name, v) in functions {
        let usable: Vec<_> = pairs
            .iter()
            .filter(|(x, y)| v.value(x).is_ok() && v.value(y).is_ok())
            .cloned()
            .collect();
        for scheme in SCHEMES {
            let line = match check_axioms(scheme, v, &usable) {
                Ok((secant, consistency)) => format!(
                    "secant {} consistency {}{}",
                    sci(secant),
                    sci(consistency),
                    skipped_note(pairs.len() - usable.len())
                ),
                Err(e) => format!("failed: {e}"),
            };
            let _ = writeln!(out, "axioms          {name:<8} {:<10} {line}", scheme.to_string());
        }
    }
}

fn check_linear(
    out: &mut String,
    sys: &LinearGradientSystem,
    cloud: &[StateVector],
    pairs: &[(StateVector, StateVector)],
) -> Result<(), Failure> {
    let declared = sys.declared_class();
    let report = detect_matrix_class(sys.l(), cloud, CLASS_TOL)?;
    let _ = writeln!(out, "declared        {declared}");
    let _ = writeln!(out, "detected        {}{}", report.class, skipped_note(report.skipped));

    if sys.raw_f().is_some() {
        let (r, skipped) = worst(cloud, |x| Ok(sys.reconstruction_residual(x)?.unwrap_or(0.0)));
        let _ = writeln!(out, "reconstruction  {}{}", sci(r), skipped_note(skipped));
    } else {
        let _ = writeln!(out, "reconstruction  n/a (no f given)");
    }

    let antisymmetric = declared == StructureClass::Antisymmetric || report.class == StructureClass::Antisymmetric;
    if antisymmetric && sys.dim() >= 3 {
        let (r, skipped) = worst(cloud, |x| verify_jacobi(sys.l(), x, JACOBI_STEP));
        let _ = writeln!(out, "jacobi          {}{}", sci(r), skipped_note(skipped));
    } else {
        let _ = writeln!(out, "jacobi          n/a (needs antisymmetric L and n >= 3)");
    }

    let mut functions = vec![("V".to_string(), sys.v().clone())];
    functions.extend(sys.monitors().iter().cloned());
    axioms(out, &functions, pairs);
    Ok(())
}

fn check_multi(
    out: &mut String,
    sys: &MultiLinearGradientSystem,
    cloud: &[StateVector],
    pairs: &[(StateVector, StateVector)],
) {
    let order = sys.l().order();
    let (defect, skipped) = worst(cloud, |x| {
        let t = sys.l().eval(x)?;
        let mut d = 0.0_f64;
        for a in 0..order {
            for b in a + 1..order {
                d = d.max(t.antisymmetry_defect(a, b)?);
            }
        }
        Ok(d)
    });
    let _ = writeln!(out, "tensor order    {order} ({} functions)", sys.m());
    let class = if defect <= CLASS_TOL {
        "fully antisymmetric"
    } else {
        "not antisymmetric"
    };
    let _ = writeln!(
        out,
        "detected        {class} (max slot-swap defect {}){}",
        sci(defect),
        skipped_note(skipped)
    );

    if let Some(f) = sys.raw_f() {
        let (r, skipped) = worst(cloud, |x| {
            let fx = f.eval(x)?;
            Ok((multilinear_rhs(sys, x)? - &fx).norm() / (1.0 + fx.norm()))
        });
        let _ = writeln!(out, "reconstruction  {}{}", sci(r), skipped_note(skipped));
    } else {
        let _ = writeln!(out, "reconstruction  n/a (no f given)");
    }

    for (j, v) in sys.functions().iter().enumerate() {
        let (w, skipped) = worst(cloud, |x| Ok(lyapunov_bracket_w(sys, v, x)?.abs()));
        let _ = writeln!(out, "bracket W       V{} {}{}", j + 1, sci(w), skipped_note(skipped));
    }

    let functions: Vec<_> = sys
        .functions()
        .iter()
        .enumerate()
        .map(|(j, v)| (format!("V{}", j + 1), v.clone()))
        .collect();
    axioms(out, &functions, pairs);
}

pub fn report(src: &Source, points: usize, sample_box: (f64, f64)) -> Result<String, Failure> {
    if points == 0 {
        return Err(Failure::usage("--points must be at least 1"));
    }
    let n = src.dim();
    let (lo, hi) = sample_box;
    let cloud = halton_box(n, points, lo, hi);
    let pairs = random_pairs(n, points, sample_box);

    let mut out = String::new();
    let _ = writeln!(out, "system          {} (n = {n})", src.name());
    let params: Vec<String> = src.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
    if !params.is_empty() {
        let _ = writeln!(out, "parameters      {}", params.join(" "));
    }
    let _ = writeln!(out, "sample          {points} points in [{lo}, {hi}]^{n}");
    match &src.system {
        Loaded::Linear(sys) => check_linear(&mut out, sys, &cloud, &pairs)?,
        Loaded::Multi(sys) => check_multi(&mut out, sys, &cloud, &pairs),
    }
    Ok(out)
}

pub fn check(a: &CheckArgs) -> Result<(), Failure> {
    let src = source::load(&a.system)?;
    let text = report(&src, a.points, a.sample_box.unwrap_or(src.sample_box))?;
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| Failure::io("standard output", e))
}

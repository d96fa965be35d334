mod common;

use dgtk::expr::{parse, scalar_field};
use dgtk::multigrad::{bracket, slot_swap, Tensor, TensorField};
use dgtk::{
    classify_matrix, default_l, step, systems, transform_l, DMatrix, DiscreteGradientScheme, LTildePolicy, Params,
    ScalarField, SolverConfig, StateVector, StructureClass,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| DMatrix::from_row_slice(n, n, &v))
}

/// `(n, M, D)` with `M` of the requested class and `D` well conditioned.
fn class_case(class: StructureClass) -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (2usize..5).prop_flat_map(move |n| {
        (matrix(n), matrix(n), matrix(n)).prop_map(move |(a, b, d)| {
            let skew = &a - a.transpose();
            let m = match class {
                StructureClass::Antisymmetric => skew,
                StructureClass::NegativeDefinite => skew - b.transpose() * &b - DMatrix::identity(n, n) * 0.5,
                StructureClass::NegativeSemidefinite => {
                    // rank-deficient symmetric part keeps a zero eigenvalue
                    let c = b.rows(0, n - 1).into_owned();
                    skew - c.transpose() * c
                }
                StructureClass::Unclassified => unreachable!(),
            };
            (m, DMatrix::identity(n, n) * 2.0 + d * 0.5)
        })
    })
}

fn point(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(lo..hi, dim).prop_map(StateVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn congruence_preserves_antisymmetric((m, d) in class_case(StructureClass::Antisymmetric)) {
        prop_assert_eq!(classify_matrix(&m, 1e-9).unwrap(), StructureClass::Antisymmetric);
        prop_assert_eq!(classify_matrix(&transform_l(&m, &d).unwrap(), 1e-9).unwrap(), StructureClass::Antisymmetric);
        prop_assert_eq!(classify_matrix(&(-&m), 1e-9).unwrap(), StructureClass::Antisymmetric);
    }

    #[test]
    fn congruence_preserves_negative_definite((m, d) in class_case(StructureClass::NegativeDefinite)) {
        prop_assert_eq!(classify_matrix(&m, 1e-9).unwrap(), StructureClass::NegativeDefinite);
        prop_assert_eq!(classify_matrix(&transform_l(&m, &d).unwrap(), 1e-9).unwrap(), StructureClass::NegativeDefinite);
    }

    #[test]
    fn congruence_preserves_negative_semidefinite((m, d) in class_case(StructureClass::NegativeSemidefinite)) {
        prop_assert_eq!(classify_matrix(&m, 1e-9).unwrap(), StructureClass::NegativeSemidefinite);
        prop_assert_eq!(classify_matrix(&transform_l(&m, &d).unwrap(), 1e-9).unwrap(), StructureClass::NegativeSemidefinite);
    }

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = common::random_expr(&mut rng, 5, 3);
        let printed = e.to_string();
        prop_assert_eq!(parse(&printed, 3, &[]).unwrap(), e, "{}", printed);
    }

    #[test]
    fn symbolic_gradient_matches_central_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = common::random_expr(&mut rng, 5, 3);
        let x = common::random_point(&mut rng, 3, -2.0, 2.0);
        let value = e.eval(x.as_slice(), &Params::new());
        prop_assume!(value.is_ok_and(|v| v.abs() <= 1e4));
        if let Ok(err) = common::symbolic_vs_central(&e, &x, 1e-5) {
            prop_assert!(err <= 1e-5, "{} at {:?}: {}", e, x, err);
        }
    }

    #[test]
    fn discrete_gradient_identities(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = common::random_expr(&mut rng, 3, 3);
        let v = scalar_field(&e, 3, &Params::new()).unwrap();
        let x = common::random_point(&mut rng, 3, -2.0, 2.0);
        let y = common::random_point(&mut rng, 3, -2.0, 2.0);
        let (Ok(vx), Ok(vy)) = (v.value(&x), v.value(&y)) else { return Ok(()); };
        prop_assume!(vx.abs() <= 1e4 && vy.abs() <= 1e4);
        for scheme in [DiscreteGradientScheme::Midpoint, DiscreteGradientScheme::CoordinateIncrement] {
            let g = scheme.evaluate(&v, &x, &y).unwrap();
            let secant = (g.dot(&(&y - &x)) - (vy - vx)).abs();
            prop_assert!(secant <= 1e-11 * (1.0 + vx.abs() + vy.abs()), "{scheme}: {secant}");
            let g0 = scheme.evaluate(&v, &x, &x).unwrap();
            prop_assert!((g0 - v.gradient(&x).unwrap()).norm() <= 1e-12);
        }
    }

    #[test]
    fn conservative_step_conserves_to_tolerance(x in point(2, -3.0, 3.0), tau in 0.01..0.5f64) {
        let sys = systems::build("pendulum", &Params::new()).unwrap();
        let cfg = SolverConfig::default();
        let scheme = DiscreteGradientScheme::Midpoint;
        let (xn, diag) = step(&sys, &x, tau, scheme, LTildePolicy::Midpoint, &cfg).unwrap();
        let (v0, v1) = (sys.v().value(&x).unwrap(), sys.v().value(&xn).unwrap());
        let g = scheme.evaluate(sys.v(), &x, &xn).unwrap();
        let rounding = 8.0 * f64::EPSILON * (v0.abs() + v1.abs());
        let residual = diag.residual.max(cfg.tol);
        prop_assert!((v1 - v0).abs() <= tau * g.norm() * residual + rounding, "{}", (v1 - v0).abs());
    }

    #[test]
    fn dissipative_step_never_increases(x in point(2, -3.0, 3.0), tau in 0.01..0.5f64, alpha in 0.0..3.0f64) {
        let p: Params = [("alpha".to_string(), alpha)].into_iter().collect();
        let sys = systems::build("damped-particle", &p).unwrap();
        let cfg = SolverConfig::default();
        for scheme in [DiscreteGradientScheme::Midpoint, DiscreteGradientScheme::CoordinateIncrement] {
            for policy in [LTildePolicy::FrozenAtX, LTildePolicy::Midpoint] {
                let (xn, diag) = step(&sys, &x, tau, scheme, policy, &cfg).unwrap();
                let (v0, v1) = (sys.v().value(&x).unwrap(), sys.v().value(&xn).unwrap());
                let g = scheme.evaluate(sys.v(), &x, &xn).unwrap();
                let rounding = 8.0 * f64::EPSILON * (v0.abs() + v1.abs());
                prop_assert!(v1 <= v0 + tau * g.norm() * diag.residual.max(cfg.tol) + rounding);
            }
        }
    }

    #[test]
    fn discrete_converse_reproduces_the_step(x in point(3, -1.0, 1.0), tau in 0.01..0.2f64) {
        let sys = systems::build("rigid-body", &Params::new()).unwrap();
        let scheme = DiscreteGradientScheme::Midpoint;
        let (xn, _) = step(&sys, &x, tau, scheme, LTildePolicy::Midpoint, &SolverConfig::default()).unwrap();
        let rate = (&xn - &x) / tau;
        let g = scheme.evaluate(sys.v(), &x, &xn).unwrap();
        prop_assume!(g.norm() > 1e-6);
        let l = default_l(&rate, &g, 1e-12).unwrap();
        prop_assert!((l * &g - &rate).norm() <= 1e-12 * (1.0 + rate.norm()));
    }

    #[test]
    fn swapping_bracket_arguments_flips_sign(
        grads in prop::collection::vec(point(3, -2.0, 2.0), 3),
        a in 0usize..3,
        b in 0usize..3,
    ) {
        prop_assume!(a != b);
        let eps = TensorField::constant(Tensor::levi_civita(3).unwrap());
        let fields: Vec<ScalarField> = grads
            .iter()
            .map(|g| {
                let g = g.clone();
                let gv = g.clone();
                ScalarField::new(3, move |x: &StateVector| Ok(gv.dot(x)), move |_: &StateVector| Ok(g.clone()))
            })
            .collect();
        let x = StateVector::zeros(3);
        let mut swapped = fields.clone();
        swapped.swap(a, b);
        let s = bracket(&eps, &fields, &x).unwrap();
        let t = bracket(&eps, &swapped, &x).unwrap();
        prop_assert!((s + t).abs() <= 1e-14 * (1.0 + s.abs()));
    }

    #[test]
    fn slot_swap_exchanges_roles(
        entries in prop::collection::vec(-1.0..1.0f64, 27),
        grads in prop::collection::vec(point(3, -2.0, 2.0), 3),
        j in 1usize..3,
    ) {
        // a general order-3 tensor: W(L; V, V1, V2) equals W(swap_j L) with V and Vj exchanged
        let t = Tensor::from_fn(3, 3, |i| entries[i[0] * 9 + i[1] * 3 + i[2]]).unwrap();
        let l = TensorField::constant(t);
        let fields: Vec<ScalarField> = grads
            .iter()
            .map(|g| {
                let g = g.clone();
                let gv = g.clone();
                ScalarField::new(3, move |x: &StateVector| Ok(gv.dot(x)), move |_: &StateVector| Ok(g.clone()))
            })
            .collect();
        let x = StateVector::zeros(3);
        let w = bracket(&l, &fields, &x).unwrap();
        let mut exchanged = fields.clone();
        exchanged.swap(0, j);
        let w_swapped = bracket(&slot_swap(&l, j).unwrap(), &exchanged, &x).unwrap();
        prop_assert!((w - w_swapped).abs() <= 1e-13);
    }
}

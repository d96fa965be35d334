//! Shared workloads for the criterion benchmarks.

use dgtk::{state, systems, LinearGradientSystem, MultiLinearGradientSystem, Params, StateVector};

/// Lotka–Volterra integral with its parameter, as parsed by the benches.
pub const LV_INTEGRAL: &str = "e^(x2 - x1) + B*(x2 - x1) - x3";

/// A longer expression mixing every builtin function.
pub const MIXED: &str = "sin(x1)*cos(x2)^2 + exp(-x3^2/2)*tanh(x1 - x2) + ln(1 + x2^2)*sqrt(1 + x3^2)";

/// A catalog system with default parameters and a representative start.
pub fn linear(name: &str) -> (LinearGradientSystem, StateVector) {
    let sys = systems::build(name, &Params::new()).expect("catalog entry");
    let x0 = match sys.dim() {
        2 => [2.0, 0.0].as_slice(),
        _ => [1.0, 0.5, 0.2].as_slice(),
    };
    (sys, state(x0).expect("finite start"))
}

pub fn nambu() -> (MultiLinearGradientSystem, StateVector) {
    let sys = systems::build_multi("rigid-body-nambu", &Params::new()).expect("catalog entry");
    (sys, state(&[1.0, 0.5, 0.2]).expect("finite start"))
}

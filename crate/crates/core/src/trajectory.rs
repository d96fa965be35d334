use crate::error::{Error, Result};
use crate::field::StateVector;

/// Solver diagnostics recorded for each state of a trajectory.
///
/// The initial state carries zero iterations and zero residual.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

/// Timestamped states, the tracked function values at each state, and
/// per-step solver diagnostics.
///
/// `values[j][k]` is tracked function `j` at state `k`.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<StateVector>,
    values: Vec<Vec<f64>>,
    diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn new(tracked: usize) -> Self {
        Trajectory {
            values: vec![Vec::new(); tracked],
            ..Default::default()
        }
    }

    /// Append a state. Times must be strictly increasing.
    pub fn push(&mut self, t: f64, x: StateVector, tracked_values: &[f64], diagnostics: StepDiagnostics) -> Result<()> {
        if tracked_values.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: tracked_values.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidArgument(format!(
                    "trajectory times must increase: {t} after {last}"
                )));
            }
        }
        self.times.push(t);
        self.states.push(x);
        for (col, &v) in self.values.iter_mut().zip(tracked_values) {
            col.push(v);
        }
        self.diagnostics.push(diagnostics);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn last_state(&self) -> Option<&StateVector> {
        self.states.last()
    }

    /// Number of tracked functions.
    pub fn tracked_count(&self) -> usize {
        self.values.len()
    }

    /// Values of tracked function `j` along the trajectory.
    pub fn values(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    /// `max_k |V_j(x_k) - V_j(x_0)|`.
    pub fn max_drift(&self, j: usize) -> f64 {
        let col = &self.values[j];
        let Some(&first) = col.first() else {
            return 0.0;
        };
        col.iter().map(|v| (v - first).abs()).fold(0.0, f64::max)
    }

    /// Largest single-step increase `V_j(x_{k+1}) - V_j(x_k)`; negative when
    /// `V_j` decreased on every step.
    pub fn max_increase(&self, j: usize) -> f64 {
        self.values[j]
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean solver iterations over the steps (the initial state excluded).
    pub fn mean_iterations(&self) -> f64 {
        if self.diagnostics.len() < 2 {
            return 0.0;
        }
        let total: usize = self.diagnostics[1..].iter().map(|d| d.iterations).sum();
        total as f64 / (self.diagnostics.len() - 1) as f64
    }
}

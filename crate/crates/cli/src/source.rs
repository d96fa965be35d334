//! Resolve `--system` / `--file` into a system.

use dgtk::field::check_state;
use dgtk::multigrad::{multilinear_rhs, MultiLinearGradientSystem};
use dgtk::sysfile::SystemFile;
use dgtk::systems::{self, Builtin};
use dgtk::{
    integrate, multi_integrate, state, LTildePolicy, LinearGradientSystem, Params, ScalarField, StateVector,
    Trajectory, VectorField,
};

use crate::args::{Point, StepArgs, SystemArgs};
use crate::failure::Failure;

/// Sampling box used when neither `--box` nor the file gives one.
pub const DEFAULT_BOX: (f64, f64) = (-2.0, 2.0);

pub enum Loaded {
    Linear(LinearGradientSystem),
    Multi(MultiLinearGradientSystem),
}

pub struct Source {
    pub system: Loaded,
    pub potential: Option<String>,
    pub sample_box: (f64, f64),
}

impl Source {
    pub fn name(&self) -> &str {
        match &self.system {
            Loaded::Linear(s) => s.name(),
            Loaded::Multi(s) => s.name(),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.system {
            Loaded::Linear(s) => s.dim(),
            Loaded::Multi(s) => s.dim(),
        }
    }

    pub fn params(&self) -> &Params {
        match &self.system {
            Loaded::Linear(s) => s.parameters(),
            Loaded::Multi(s) => s.parameters(),
        }
    }

    /// The tracked functions in column order: `V` and the monitors, or
    /// every `V_j` of a multilinear system.
    pub fn tracked(&self) -> Vec<ScalarField> {
        match &self.system {
            Loaded::Linear(s) => s.tracked(),
            Loaded::Multi(s) => s.functions().to_vec(),
        }
    }

    /// What each `V_j` column stands for.
    pub fn tracked_names(&self) -> Vec<String> {
        match &self.system {
            Loaded::Linear(s) => std::iter::once("V".to_string())
                .chain(s.monitors().iter().map(|(n, _)| n.clone()))
                .collect(),
            Loaded::Multi(s) => (1..=s.m()).map(|j| format!("V{j}")).collect(),
        }
    }

    /// The flow as a plain vector field, for baselines.
    pub fn vector_field(&self) -> VectorField {
        match &self.system {
            Loaded::Linear(s) => s.vector_field(),
            Loaded::Multi(s) => {
                let sys = s.clone();
                VectorField::new(s.dim(), move |x| multilinear_rhs(&sys, x))
            }
        }
    }

    pub fn initial_state(&self, x0: &Point) -> Result<StateVector, Failure> {
        let x = state(&x0.0)?;
        check_state(&x, self.dim())?;
        Ok(x)
    }

    /// Policy actually used: multilinear systems always evaluate `L` at
    /// the midpoint.
    pub fn policy(&self, requested: LTildePolicy) -> Result<LTildePolicy, Failure> {
        match (&self.system, requested) {
            (Loaded::Multi(_), LTildePolicy::FrozenAtX) => {
                Err(Failure::usage("multilinear systems support only --policy midpoint"))
            }
            _ => Ok(requested),
        }
    }

    /// Run the discrete-gradient map for `step.steps` steps.
    pub fn run(&self, x0: &StateVector, step: &StepArgs) -> dgtk::Result<Trajectory> {
        let cfg = step.solver.config();
        match &self.system {
            Loaded::Linear(s) => integrate(s, x0, step.tau, step.steps, step.scheme, step.policy, &cfg),
            Loaded::Multi(s) => multi_integrate(s, x0, step.tau, step.steps, step.scheme, &cfg),
        }
    }

    pub fn linear(&self, command: &str) -> Result<&LinearGradientSystem, Failure> {
        match &self.system {
            Loaded::Linear(s) => Ok(s),
            Loaded::Multi(s) => Err(Failure::usage(format!(
                "`{command}` needs a system in linear-gradient form; `{}` is multilinear",
                s.name()
            ))),
        }
    }
}

pub fn load(args: &SystemArgs) -> Result<Source, Failure> {
    let overrides: Params = args.params.iter().cloned().collect();
    if let Some(path) = &args.file {
        if args.potential.is_some() {
            return Err(Failure::usage("--potential applies to builtin systems only"));
        }
        let file = SystemFile::load(path)?;
        let sys = file.to_system(&overrides)?;
        return Ok(Source {
            system: Loaded::Linear(sys),
            potential: None,
            sample_box: file.sample_box,
        });
    }
    let name = args
        .system
        .as_deref()
        .ok_or_else(|| Failure::usage("one of --system or --file is required"))?;
    let system = match systems::builtin_with_potential(name, &overrides, args.potential.as_deref())? {
        Builtin::Linear(s) => Loaded::Linear(s),
        Builtin::Multi(s) => Loaded::Multi(s),
    };
    Ok(Source {
        system,
        potential: args.potential.clone(),
        sample_box: DEFAULT_BOX,
    })
}

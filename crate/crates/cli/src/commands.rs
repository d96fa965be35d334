//! `integrate`, `compare` and `order`.

use std::io::Write;

use dgtk::stepper::reference_integrate_at;
use dgtk::{empirical_order, Error, StateVector, Trajectory};

use crate::args::{Baseline, CompareArgs, IntegrateArgs, OrderArgs, StepArgs};
use crate::failure::Failure;
use crate::output::{emit, num, Cell, Metadata, Num, Table, Tolerances};
use crate::source::{self, Source};

/// A step counts as an increase of V when it grows by more than this.
pub const INCREASE_TOL: f64 = 1e-10;

fn metadata(src: &Source, command: &'static str, step: &StepArgs, ref_tol: Option<f64>) -> Metadata {
    let cfg = step.solver.config();
    Metadata {
        tool: "dgtk",
        version: env!("CARGO_PKG_VERSION"),
        command,
        system: src.name().to_string(),
        dim: src.dim(),
        params: src.params().iter().map(|(k, v)| (k.clone(), Num(*v))).collect(),
        potential: src.potential.clone(),
        tracked: src.tracked_names(),
        scheme: step.scheme.to_string(),
        policy: step.policy.to_string(),
        tau: Num(step.tau),
        steps: step.steps,
        x0: step.x0.0.iter().map(|&v| Num(v)).collect(),
        tolerances: Tolerances {
            solver_tol: Num(cfg.tol),
            max_iter: cfg.max_iter,
            method: cfg.method.to_string(),
            newton_fallback: cfg.newton_fallback,
            reference_rel_tol: ref_tol.map(Num),
        },
        baseline: None,
        status: "ok",
        aborted_at_step: None,
        notes: Vec::new(),
    }
}

/// Split a run into the trajectory to report and the error that cut it
/// short, if any.
fn settle(result: dgtk::Result<Trajectory>) -> Result<(Trajectory, Option<(usize, Error)>), Failure> {
    match result {
        Ok(t) => Ok((t, None)),
        Err(Error::Aborted { step, partial, source }) => {
            let err = Error::Aborted {
                step,
                partial: partial.clone(),
                source,
            };
            Ok((*partial, Some((step, err))))
        }
        Err(e) => Err(e.into()),
    }
}

fn trajectory_table(traj: &Trajectory) -> Table {
    let n = traj.states().first().map_or(0, |x| x.len());
    let m = traj.tracked_count();
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=n).map(|i| format!("x{i}")));
    columns.extend((1..=m).map(|j| format!("V{j}")));
    columns.extend(["iters".to_string(), "residual".to_string()]);
    let rows = (0..traj.len())
        .map(|k| {
            let mut row = vec![Cell::Float(traj.times()[k])];
            row.extend(traj.states()[k].iter().map(|&v| Cell::Float(v)));
            row.extend((0..m).map(|j| Cell::Float(traj.values(j)[k])));
            let d = &traj.diagnostics()[k];
            row.extend([Cell::Int(d.iterations), Cell::Float(d.residual)]);
            row
        })
        .collect();
    Table { columns, rows }
}

/// Print `line` to standard output when data went to a file, otherwise to
/// standard error so the data stream stays clean.
fn summary(to_stdout: bool, line: &str) {
    if to_stdout {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn integrate(a: &IntegrateArgs) -> Result<(), Failure> {
    if a.step.steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    let src = source::load(&a.system)?;
    src.policy(a.step.policy)?;
    let x0 = src.initial_state(&a.step.x0)?;
    let (traj, aborted) = settle(src.run(&x0, &a.step))?;

    let mut meta = metadata(&src, "integrate", &a.step, None);
    if let Some((step, _)) = &aborted {
        meta.status = "aborted";
        meta.aborted_at_step = Some(*step);
    }
    emit(
        a.output.out.as_deref(),
        a.output.format,
        &meta,
        &trajectory_table(&traj),
    )?;

    let m = traj.tracked_count();
    let finals: Vec<String> = (0..m)
        .map(|j| format!("V{}={}", j + 1, num(*traj.values(j).last().unwrap_or(&f64::NAN))))
        .collect();
    let drifts: Vec<String> = (0..m)
        .map(|j| format!("V{}={:.3e}", j + 1, traj.max_drift(j)))
        .collect();
    summary(
        a.output.out.is_some(),
        &format!(
            "{}: {} steps to t={}; final {}; max drift {}; mean iterations {:.2}",
            src.name(),
            traj.len() - 1,
            num(*traj.times().last().unwrap_or(&0.0)),
            finals.join(" "),
            drifts.join(" "),
            traj.mean_iterations(),
        ),
    );
    match aborted {
        Some((_, err)) => Err(err.into()),
        None => Ok(()),
    }
}

fn explicit_euler(src: &Source, x0: &StateVector, tau: f64, steps: usize) -> (Vec<StateVector>, Option<String>) {
    let f = src.vector_field();
    let mut out = vec![x0.clone()];
    let mut x = x0.clone();
    for k in 1..=steps {
        match f.eval(&x) {
            Ok(fx) => {
                x = &x + fx * tau;
                out.push(x.clone());
            }
            Err(e) => return (out, Some(format!("explicit Euler stopped at step {k}: {e}"))),
        }
    }
    (out, None)
}

/// Count of steps where `values` grows by more than [`INCREASE_TOL`].
fn increases(values: &[f64]) -> usize {
    values
        .windows(2)
        .filter(|w| w[1] > w[0] + INCREASE_TOL || w[1].is_nan())
        .count()
}

pub fn compare(a: &CompareArgs) -> Result<(), Failure> {
    let src = source::load(&a.system)?;
    src.policy(a.step.policy)?;
    let x0 = src.initial_state(&a.step.x0)?;
    let baseline_name = match a.baseline {
        Baseline::RkReference => "rk-reference",
        Baseline::ExplicitEuler => "explicit-euler",
    };
    let mut meta = metadata(
        &src,
        "compare",
        &a.step,
        (a.baseline == Baseline::RkReference).then_some(a.ref_tol),
    );
    meta.baseline = Some(baseline_name.to_string());
    let table_columns = ["t", "dg_V1", "dg_drift", "baseline_V1", "baseline_drift"]
        .map(String::from)
        .to_vec();

    if a.step.steps == 0 {
        let table = Table {
            columns: table_columns,
            rows: Vec::new(),
        };
        emit(a.output.out.as_deref(), a.output.format, &meta, &table)?;
        summary(
            a.output.out.is_some(),
            &format!("{}: 0 steps, nothing to compare", src.name()),
        );
        return Ok(());
    }

    let (traj, aborted) = settle(src.run(&x0, &a.step))?;
    if let Some((step, _)) = &aborted {
        meta.status = "aborted";
        meta.aborted_at_step = Some(*step);
    }

    let steps = a.step.steps;
    let (baseline_states, note) = match a.baseline {
        Baseline::ExplicitEuler => explicit_euler(&src, &x0, a.step.tau, steps),
        Baseline::RkReference => {
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 * a.step.tau).collect();
            match reference_integrate_at(&src.vector_field(), &x0, &times, a.ref_tol) {
                Ok(states) => (states, None),
                Err(e) => (Vec::new(), Some(format!("rk-reference failed: {e}"))),
            }
        }
    };
    let v = &src.tracked()[0];
    let mut baseline_values = Vec::with_capacity(baseline_states.len());
    let mut note = note;
    for (k, x) in baseline_states.iter().enumerate() {
        match v.value(x) {
            Ok(val) => baseline_values.push(val),
            Err(e) => {
                note.get_or_insert_with(|| format!("{baseline_name}: V undefined at step {k}: {e}"));
                break;
            }
        }
    }
    if let Some(n) = &note {
        meta.notes.push(n.clone());
        eprintln!("warning: {n}");
    }

    let dg = traj.values(0);
    let rows = (0..=steps)
        .map(|k| {
            let mut row = vec![Cell::Float(k as f64 * a.step.tau)];
            match dg.get(k) {
                Some(&val) => row.extend([Cell::Float(val), Cell::Float((val - dg[0]).abs())]),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
            match baseline_values.get(k) {
                Some(&val) => row.extend([Cell::Float(val), Cell::Float((val - baseline_values[0]).abs())]),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
            row
        })
        .collect();
    emit(
        a.output.out.as_deref(),
        a.output.format,
        &meta,
        &Table {
            columns: table_columns,
            rows,
        },
    )?;

    let max_drift = |vals: &[f64]| vals.iter().map(|v| (v - vals[0]).abs()).fold(0.0_f64, f64::max);
    let base_drift = if baseline_values.is_empty() {
        "n/a".to_string()
    } else {
        format!("{:.3e}", max_drift(&baseline_values))
    };
    summary(
        a.output.out.is_some(),
        &format!(
            "{}: max drift dg={:.3e} {baseline_name}={base_drift}; steps with V increase > {INCREASE_TOL:e}: dg={} {baseline_name}={}",
            src.name(),
            max_drift(dg),
            increases(dg),
            increases(&baseline_values),
        ),
    );
    match aborted {
        Some((_, err)) => Err(err.into()),
        None => Ok(()),
    }
}

pub fn order(a: &OrderArgs) -> Result<(), Failure> {
    let src = source::load(&a.system)?;
    let sys = src.linear("order")?;
    let x0 = src.initial_state(&a.x0)?;
    let cfg = a.solver.config();
    let mut out = String::new();
    out.push_str(&format!(
        "{}: t_end={} policy={} x0=({})\n",
        src.name(),
        num(a.t_end),
        a.policy,
        a.x0.0.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
    ));
    for &scheme in &a.scheme {
        let est = empirical_order(sys, scheme, a.policy, &x0, a.t_end, &a.tau_list.0, &cfg)?;
        out.push_str(&format!("scheme {scheme} slope {:.4}\n", est.slope));
        for (tau, err) in &est.errors {
            out.push_str(&format!("  tau {} error {}\n", num(*tau), num(*err)));
        }
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(out.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| Failure::io("standard output", e))
}

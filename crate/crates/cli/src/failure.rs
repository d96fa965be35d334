use std::fmt;

use dgtk::systems::CATALOG;
use dgtk::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &str, err: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("cannot write {path}: {err}"),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Catalog listing as printed by `dgtk list`.
pub fn catalog_listing() -> String {
    let mut out = String::new();
    for e in CATALOG {
        out.push_str(&format!("{:<26} n={}  {}\n", e.name, e.dim, e.summary));
        for p in e.params {
            let default = p
                .default
                .map(|d| format!("default {d}"))
                .unwrap_or_else(|| "no default".into());
            out.push_str(&format!(
                "{:<26}   --param {}=<value>  ({default}; {})\n",
                "", p.name, p.constraint
            ));
        }
    }
    out
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Aborted { .. } | Error::SolverDivergence { .. } | Error::StepUnderflow { .. } => EXIT_DIVERGED,
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        };
        let message = match &err {
            Error::UnknownSystem { name, .. } => {
                format!(
                    "unknown system `{name}`; available systems:\n{}",
                    catalog_listing().trim_end()
                )
            }
            _ => err.to_string(),
        };
        Failure { code, message }
    }
}

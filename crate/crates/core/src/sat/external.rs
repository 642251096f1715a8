//! Invokes an external SAT solver on a DIMACS file and parses its verdict.
//!
//! Contract: the solver is called as `<solver> <cnf-path>`, prints an
//! `s SATISFIABLE` / `s UNSATISFIABLE` status line, and on satisfiable
//! instances `v ` lines holding the model as signed literals terminated by
//! 0. A run that exits without a status line is an engine failure.

use std::path::Path;
use std::process::Command;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("failed to launch external solver {solver}: {source}")]
    Spawn {
        solver: String,
        source: std::io::Error,
    },
    #[error("external solver produced no status line (exit code {exit_code:?})")]
    NoStatusLine { exit_code: Option<i32> },
    #[error("external solver reported SAT but printed no model values")]
    SatWithoutValues,
    #[error("cannot parse value token {token:?} in solver output")]
    BadValueToken { token: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExternalOutcome {
    /// Total assignment indexed by variable - 1; variables the solver left
    /// unmentioned default to false.
    Sat(Vec<bool>),
    Unsat,
}

pub fn run_external(
    solver: &Path,
    cnf_path: &Path,
    num_vars: usize,
) -> Result<ExternalOutcome, ExternalError> {
    let output = Command::new(solver)
        .arg(cnf_path)
        .output()
        .map_err(|source| ExternalError::Spawn {
            solver: solver.display().to_string(),
            source,
        })?;
    let stdout = String::from_utf8_lossy(&output.stdout);

    let mut status: Option<bool> = None;
    let mut values: Vec<i64> = Vec::new();
    let mut saw_value_line = false;
    for line in stdout.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            match rest.trim() {
                "SATISFIABLE" => status = Some(true),
                "UNSATISFIABLE" => status = Some(false),
                _ => {}
            }
        } else if let Some(rest) =
            line.strip_prefix("v ")
                .or(if line == "v" { Some("") } else { None })
        {
            saw_value_line = true;
            for tok in rest.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| ExternalError::BadValueToken {
                    token: tok.to_string(),
                })?;
                if lit != 0 {
                    values.push(lit);
                }
            }
        }
    }

    match status {
        Some(true) => {
            if !saw_value_line {
                return Err(ExternalError::SatWithoutValues);
            }
            let mut model = vec![false; num_vars];
            for lit in values {
                let var = lit.unsigned_abs() as usize;
                if var >= 1 && var <= num_vars {
                    model[var - 1] = lit > 0;
                }
            }
            Ok(ExternalOutcome::Sat(model))
        }
        Some(false) => Ok(ExternalOutcome::Unsat),
        None => Err(ExternalError::NoStatusLine {
            exit_code: output.status.code(),
        }),
    }
}

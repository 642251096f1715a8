//! Propositional satisfiability: CNF formulas, a complete DPLL solver with
//! watched literals, DIMACS I/O, and a harness for external solvers.

pub mod dimacs;
pub mod external;
pub mod solver;

pub use dimacs::{parse_dimacs, to_dimacs, DimacsError};
pub use external::{run_external, ExternalError, ExternalOutcome};
pub use solver::{solve, SolveBudget, SolveOutcome, SolverStats};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("empty clause")]
    EmptyClause,
    #[error("literal 0 is not allowed inside a clause")]
    ZeroLiteral,
    #[error("variable {var} out of range 1..={num_vars}")]
    VarOutOfRange { var: usize, num_vars: usize },
}

/// A CNF formula over variables `1..=num_vars` with clauses stored as
/// DIMACS-style signed literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize) -> Self {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn add_clause(&mut self, lits: &[i32]) -> Result<(), CnfError> {
        if lits.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        for &l in lits {
            if l == 0 {
                return Err(CnfError::ZeroLiteral);
            }
            let var = l.unsigned_abs() as usize;
            if var > self.num_vars {
                return Err(CnfError::VarOutOfRange {
                    var,
                    num_vars: self.num_vars,
                });
            }
        }
        self.clauses.push(lits.to_vec());
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// True when `assignment` (indexed by variable - 1) satisfies every
    /// clause. Panics if the assignment is shorter than `num_vars`.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&l| {
                let v = assignment[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_clause_validates() {
        let mut f = CnfFormula::new(2);
        assert_eq!(f.add_clause(&[]).unwrap_err(), CnfError::EmptyClause);
        assert_eq!(f.add_clause(&[1, 0]).unwrap_err(), CnfError::ZeroLiteral);
        assert_eq!(
            f.add_clause(&[3]).unwrap_err(),
            CnfError::VarOutOfRange {
                var: 3,
                num_vars: 2
            }
        );
        f.add_clause(&[1, -2]).unwrap();
        assert_eq!(f.num_clauses(), 1);
    }

    #[test]
    fn evaluate_checks_all_clauses() {
        let mut f = CnfFormula::new(2);
        f.add_clause(&[1, 2]).unwrap();
        f.add_clause(&[-1, -2]).unwrap();
        assert!(f.evaluate(&[true, false]));
        assert!(!f.evaluate(&[true, true]));
    }
}

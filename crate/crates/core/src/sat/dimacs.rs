//! DIMACS CNF reading and writing.

use std::fmt::Write as _;

use thiserror::Error;

use super::{CnfError, CnfFormula};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("DIMACS parse error at line {line}: {message}")]
pub struct DimacsError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> DimacsError {
    DimacsError {
        line,
        message: message.into(),
    }
}

/// Renders a formula as DIMACS CNF. Each entry of `comments` becomes one
/// `c`-prefixed line before the `p cnf` header.
pub fn to_dimacs(formula: &CnfFormula, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "c {c}").unwrap();
    }
    writeln!(
        out,
        "p cnf {} {}",
        formula.num_vars(),
        formula.num_clauses()
    )
    .unwrap();
    for clause in formula.clauses() {
        for &l in clause {
            write!(out, "{l} ").unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    out
}

/// Parses DIMACS CNF. Comment lines are skipped; clauses may span lines and
/// are 0-terminated (a final unterminated clause is accepted at end of
/// input). Literals outside the declared variable range are rejected.
pub fn parse_dimacs(input: &str) -> Result<CnfFormula, DimacsError> {
    let mut formula: Option<CnfFormula> = None;
    let mut pending: Vec<i32> = Vec::new();
    let mut clause_count = 0usize;
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if formula.is_some() {
                return Err(err(line_no, "duplicate problem line"));
            }
            let mut parts = line.split_whitespace();
            parts.next(); // "p"
            if parts.next() != Some("cnf") {
                return Err(err(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let vars: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(line_no, "bad variable count"))?;
            let _declared_clauses: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(line_no, "bad clause count"))?;
            formula = Some(CnfFormula::new(vars));
            continue;
        }
        let formula_ref = formula
            .as_mut()
            .ok_or_else(|| err(line_no, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| err(line_no, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                formula_ref.add_clause(&pending).map_err(|e| match e {
                    CnfError::EmptyClause => err(line_no, "empty clause"),
                    other => err(line_no, other.to_string()),
                })?;
                pending.clear();
                clause_count += 1;
            } else {
                pending.push(lit);
            }
        }
    }
    let mut formula = formula.ok_or_else(|| err(0, "missing problem line"))?;
    if !pending.is_empty() {
        formula
            .add_clause(&pending)
            .map_err(|e| err(0, e.to_string()))?;
        clause_count += 1;
    }
    let _ = clause_count;
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{solve, SolveBudget, SolveOutcome};

    #[test]
    fn roundtrip_preserves_formula() {
        let mut f = CnfFormula::new(3);
        f.add_clause(&[1, 2, 3]).unwrap();
        f.add_clause(&[-1, -2, -3]).unwrap();
        let text = to_dimacs(&f, &["instance description".into()]);
        assert!(text.starts_with("c instance description\np cnf 3 2\n"));
        let back = parse_dimacs(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn parse_handles_comments_and_multiline_clauses() {
        let text = "c header\nc more\np cnf 4 2\n1 2\n3 0 -1\n-4 0\n";
        let f = parse_dimacs(text).unwrap();
        assert_eq!(f.clauses(), &[vec![1, 2, 3], vec![-1, -4]]);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_dimacs("p cnf x 1\n").is_err());
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("").is_err());
    }

    #[test]
    fn parsed_formula_solves_like_original() {
        let mut f = CnfFormula::new(3);
        f.add_clause(&[1, 2]).unwrap();
        f.add_clause(&[-1, 3]).unwrap();
        f.add_clause(&[-2, -3]).unwrap();
        let back = parse_dimacs(&to_dimacs(&f, &[])).unwrap();
        let a = solve(&f, &SolveBudget::default());
        let b = solve(&back, &SolveBudget::default());
        match (a, b) {
            (SolveOutcome::Sat(x), SolveOutcome::Sat(y)) => assert_eq!(x, y),
            (x, y) => panic!("outcomes diverged: {x:?} vs {y:?}"),
        }
    }
}

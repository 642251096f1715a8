//! Complete DPLL search with unit propagation over two watched literals.
//!
//! The solver is deterministic: decisions pick the lowest-numbered
//! unassigned variable, positive phase first, and backtracking flips the
//! deepest untried decision. No clause learning — the instances this crate
//! produces are small and a predictable, certifiable search is worth more
//! here than raw speed.

use std::time::{Duration, Instant};

use super::CnfFormula;

/// Resource limits for a single `solve` call. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_conflicts: Option<u64>,
    pub max_time: Option<Duration>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SolverStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Total assignment indexed by variable - 1.
    Sat(Vec<bool>),
    Unsat,
    /// The budget ran out; partial statistics are attached.
    Budget(SolverStats),
}

// Literal encoding: var index v (0-based) becomes 2v (positive) / 2v+1
// (negated).
type Lit = u32;

fn lit_from_dimacs(l: i32) -> Lit {
    let v = (l.unsigned_abs() - 1) << 1;
    if l < 0 {
        v | 1
    } else {
        v
    }
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn is_pos(l: Lit) -> bool {
    l & 1 == 0
}

const UNASSIGNED: i8 = 0;

struct Dpll {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    value: Vec<i8>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    flipped: Vec<bool>,
    head: usize,
    stats: SolverStats,
}

impl Dpll {
    fn new(num_vars: usize) -> Self {
        Dpll {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            value: vec![UNASSIGNED; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            flipped: Vec::new(),
            head: 0,
            stats: SolverStats::default(),
        }
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[var(l)];
        if is_pos(l) {
            v
        } else {
            -v
        }
    }

    fn assign(&mut self, l: Lit) {
        debug_assert_eq!(self.lit_value(l), UNASSIGNED);
        self.value[var(l)] = if is_pos(l) { 1 } else { -1 };
        self.trail.push(l);
    }

    /// Loads clauses; returns false on an immediate top-level conflict.
    /// Tautologies are dropped, duplicate literals removed, unit clauses
    /// enqueued directly.
    fn load(&mut self, formula: &CnfFormula) -> bool {
        'clauses: for clause in formula.clauses() {
            let mut lits: Vec<Lit> = clause.iter().map(|&l| lit_from_dimacs(l)).collect();
            lits.sort_unstable();
            lits.dedup();
            for w in lits.windows(2) {
                if w[0] == neg(w[1]) {
                    continue 'clauses; // tautology
                }
            }
            match lits.len() {
                1 => match self.lit_value(lits[0]) {
                    -1 => return false,
                    0 => self.assign(lits[0]),
                    _ => {}
                },
                _ => {
                    let idx = self.clauses.len() as u32;
                    self.watches[lits[0] as usize].push(idx);
                    self.watches[lits[1] as usize].push(idx);
                    self.clauses.push(lits);
                }
            }
        }
        true
    }

    /// Propagates everything on the trail. Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.head < self.trail.len() {
            let p = self.trail[self.head];
            self.head += 1;
            self.stats.propagations += 1;
            let fl = neg(p); // literals watching fl must find a new home
            let mut ws = std::mem::take(&mut self.watches[fl as usize]);
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i] as usize;
                if self.clauses[ci][0] == fl {
                    self.clauses[ci].swap(0, 1);
                }
                debug_assert_eq!(self.clauses[ci][1], fl);
                let first = self.clauses[ci][0];
                if self.lit_value(first) == 1 {
                    i += 1;
                    continue;
                }
                let replacement = (2..self.clauses[ci].len())
                    .find(|&j| self.lit_value(self.clauses[ci][j]) != -1);
                if let Some(j) = replacement {
                    self.clauses[ci].swap(1, j);
                    let new_watch = self.clauses[ci][1];
                    self.watches[new_watch as usize].push(ci as u32);
                    ws.swap_remove(i);
                    continue;
                }
                // clause is unit or conflicting under the current assignment
                if self.lit_value(first) == -1 {
                    self.watches[fl as usize] = ws;
                    return false;
                }
                self.assign(first);
                i += 1;
            }
            self.watches[fl as usize] = ws;
        }
        true
    }

    fn next_unassigned(&self) -> Option<usize> {
        self.value.iter().position(|&v| v == UNASSIGNED)
    }

    fn undo_to(&mut self, mark: usize) {
        for &l in &self.trail[mark..] {
            self.value[var(l)] = UNASSIGNED;
        }
        self.trail.truncate(mark);
        self.head = mark;
    }

    /// Unwinds to the deepest decision that still has an untried phase and
    /// flips it. Returns false when no decision is left (the formula is
    /// unsatisfiable).
    fn backtrack_flip(&mut self) -> bool {
        loop {
            let Some(&mark) = self.trail_lim.last() else {
                return false;
            };
            let decision = self.trail[mark];
            let was_flipped = *self.flipped.last().unwrap();
            self.undo_to(mark);
            if was_flipped {
                self.trail_lim.pop();
                self.flipped.pop();
            } else {
                *self.flipped.last_mut().unwrap() = true;
                self.assign(neg(decision));
                return true;
            }
        }
    }

    fn over_budget(&self, budget: &SolveBudget, started: Instant) -> bool {
        if let Some(max) = budget.max_conflicts {
            if self.stats.conflicts > max {
                return true;
            }
        }
        if let Some(max) = budget.max_time {
            if self.stats.conflicts.is_multiple_of(512) && started.elapsed() > max {
                return true;
            }
        }
        false
    }

    fn run(&mut self, budget: &SolveBudget) -> SolveOutcome {
        let started = Instant::now();
        if !self.propagate() {
            return SolveOutcome::Unsat;
        }
        loop {
            let Some(v) = self.next_unassigned() else {
                let model = (0..self.num_vars).map(|v| self.value[v] == 1).collect();
                return SolveOutcome::Sat(model);
            };
            self.stats.decisions += 1;
            self.trail_lim.push(self.trail.len());
            self.flipped.push(false);
            self.assign((v as Lit) << 1);
            while !self.propagate() {
                self.stats.conflicts += 1;
                if self.over_budget(budget, started) {
                    return SolveOutcome::Budget(self.stats);
                }
                if !self.backtrack_flip() {
                    return SolveOutcome::Unsat;
                }
            }
        }
    }
}

/// Decides `formula` within `budget`. The returned model, if any, is total.
pub fn solve(formula: &CnfFormula, budget: &SolveBudget) -> SolveOutcome {
    let mut solver = Dpll::new(formula.num_vars());
    if !solver.load(formula) {
        return SolveOutcome::Unsat;
    }
    let outcome = solver.run(budget);
    if let SolveOutcome::Sat(model) = &outcome {
        debug_assert!(formula.evaluate(model), "model must satisfy the formula");
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    fn formula(num_vars: usize, clauses: &[&[i32]]) -> CnfFormula {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.add_clause(c).unwrap();
        }
        f
    }

    fn brute_force_sat(f: &CnfFormula) -> bool {
        let n = f.num_vars();
        (0..1u64 << n).any(|bits| {
            let assignment: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            f.evaluate(&assignment)
        })
    }

    #[test]
    fn empty_formula_is_sat_with_empty_assignment() {
        let f = CnfFormula::new(0);
        assert_eq!(
            solve(&f, &SolveBudget::default()),
            SolveOutcome::Sat(vec![])
        );
    }

    #[test]
    fn contradictory_units_are_unsat() {
        let f = formula(1, &[&[1], &[-1]]);
        assert_eq!(solve(&f, &SolveBudget::default()), SolveOutcome::Unsat);
    }

    #[test]
    fn model_is_total_even_for_unconstrained_vars() {
        let f = formula(3, &[&[2]]);
        match solve(&f, &SolveBudget::default()) {
            SolveOutcome::Sat(model) => {
                assert_eq!(model.len(), 3);
                assert!(model[1]);
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn propagation_chain() {
        // 1, 1->2, 2->3, 3->-4
        let f = formula(4, &[&[1], &[-1, 2], &[-2, 3], &[-3, -4]]);
        match solve(&f, &SolveBudget::default()) {
            SolveOutcome::Sat(model) => {
                assert_eq!(model, vec![true, true, true, false]);
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn pigeonhole_3_into_2_is_unsat() {
        // pigeon p in hole h is var 2p + h + 1
        let mut f = CnfFormula::new(6);
        for p in 0..3i32 {
            f.add_clause(&[2 * p + 1, 2 * p + 2]).unwrap();
        }
        for h in 0..2i32 {
            for p1 in 0..3i32 {
                for p2 in (p1 + 1)..3 {
                    f.add_clause(&[-(2 * p1 + h + 1), -(2 * p2 + h + 1)])
                        .unwrap();
                }
            }
        }
        assert_eq!(solve(&f, &SolveBudget::default()), SolveOutcome::Unsat);
    }

    #[test]
    fn tautologies_and_duplicates_are_harmless() {
        let f = formula(2, &[&[1, -1], &[2, 2], &[-2, -2, 1]]);
        match solve(&f, &SolveBudget::default()) {
            SolveOutcome::Sat(model) => assert!(f.evaluate(&model)),
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn conflict_budget_reports_partial_stats() {
        let f = formula(2, &[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]);
        let budget = SolveBudget {
            max_conflicts: Some(0),
            max_time: None,
        };
        match solve(&f, &budget) {
            SolveOutcome::Budget(stats) => assert!(stats.conflicts >= 1),
            other => panic!("expected budget, got {other:?}"),
        }
        // unlimited budget decides it
        assert_eq!(solve(&f, &SolveBudget::default()), SolveOutcome::Unsat);
    }

    #[test]
    fn agrees_with_brute_force_on_random_formulas() {
        // deterministic xorshift so failures reproduce
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _case in 0..300 {
            let num_vars = (next() % 8 + 1) as usize;
            let num_clauses = (next() % 24) as usize;
            let mut f = CnfFormula::new(num_vars);
            for _ in 0..num_clauses {
                let len = (next() % 3 + 1) as usize;
                let lits: Vec<i32> = (0..len)
                    .map(|_| {
                        let v = (next() % num_vars as u64 + 1) as i32;
                        if next() % 2 == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect();
                f.add_clause(&lits).unwrap();
            }
            let expected = brute_force_sat(&f);
            match solve(&f, &SolveBudget::default()) {
                SolveOutcome::Sat(model) => {
                    assert!(
                        expected,
                        "solver found a model where brute force found none"
                    );
                    assert!(f.evaluate(&model));
                }
                SolveOutcome::Unsat => assert!(!expected, "solver missed a model"),
                SolveOutcome::Budget(_) => panic!("unlimited budget cannot run out"),
            }
        }
    }
}

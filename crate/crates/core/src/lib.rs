//! Combinatorics of finite ordered partitions and coarsening-based coloring
//! search.
//!
//! The crate is organised in four layers:
//!
//! * [`partition`] — canonical min-ordered partitions of `{1..n}`:
//!   validation, enumeration, counting, ranking, and coarsening.
//! * [`machinery`] — finite prefixes of infinite min-ordered partitions and
//!   their approximation calculus (`r`, `pi`, `s`), grounded approximations,
//!   and the bijection between homogeneous partitions and extensions of a
//!   base approximation.
//! * [`sat`] — a small complete DPLL solver with watched literals, DIMACS
//!   I/O, and an external-solver harness.
//! * [`ramsey`] — coarsening hypergraph instances, CNF encoding, coloring
//!   verification, and witness search.

pub mod machinery;
pub mod partition;
pub mod ramsey;
pub mod sat;

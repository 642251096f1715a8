//! Coarsening hypergraph instances and the search for colorings with no
//! monochromatic coarsening set.
//!
//! An instance fixes `n`, a vertex arity `k` and a source arity `m`: the
//! vertices are the `k`-partitions of `{1..n}` (homogeneous or general) and
//! each `m`-partition `u` contributes the hyperedge of all its
//! `k`-coarsenings. A *bad coloring* assigns one of `N` colors to every
//! vertex so that no hyperedge is monochromatic; an `n` admitting no bad
//! coloring is a witness.

mod instance;
mod search;

pub use instance::{
    build_instance, decode_coloring, encode_sat, verify_coloring, BuildLimits, Coloring,
    EngineError, InstanceParams, Mode, RamseyInstance, VerifyOutcome,
};
pub use search::{search_drt, search_hdr, Engine, NOutcome, Outcome, SearchOptions, SearchReport};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::{
    coarsenings_all, coarsenings_hom, count_all, count_hom, enumerate_all, enumerate_hom,
    OrderedPartition, PartitionError,
};
use crate::sat::CnfFormula;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("need 1 <= k < m <= n, got k={k} m={m} n={n}")]
    BadArities { n: usize, k: usize, m: usize },
    #[error("homogeneous mode needs k | m and m | n, got k={k} m={m} n={n}")]
    BadDivisibility { n: usize, k: usize, m: usize },
    #[error("need at least 2 colors, got {colors}")]
    TooFewColors { colors: u32 },
    #[error("instance too large: {count} {what} exceed the cap of {cap}")]
    InstanceTooLarge {
        what: &'static str,
        count: BigUint,
        cap: u64,
    },
    #[error("coloring covers {found} vertices, instance has {expected}")]
    AssignmentIncomplete { expected: usize, found: usize },
    #[error("vertex {vertex} has color {color}, valid colors are 1..={colors}")]
    InvalidColor {
        vertex: usize,
        color: u32,
        colors: u32,
    },
    #[error("model does not assign exactly one color to vertex {vertex}")]
    InvalidModel { vertex: usize },
    #[error("edge member index {index} out of range for {vertices} vertices")]
    EdgeIndexOutOfRange { index: usize, vertices: usize },
    #[error("edges must be nonempty")]
    EmptyEdge,
    #[error("external solver failure: {0}")]
    EngineFailure(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Vertex/edge universe selector: homogeneous partitions only, or all
/// partitions with the right class count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "hom")]
    Homogeneous,
    #[serde(rename = "general")]
    General,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Homogeneous => f.write_str("hom"),
            Mode::General => f.write_str("general"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub colors: u32,
    pub mode: Mode,
}

impl InstanceParams {
    pub fn validate(&self) -> Result<(), EngineError> {
        let Self {
            n,
            k,
            m,
            colors,
            mode,
        } = *self;
        if k == 0 || k >= m || m > n {
            return Err(EngineError::BadArities { n, k, m });
        }
        if mode == Mode::Homogeneous && (m % k != 0 || n % m != 0) {
            return Err(EngineError::BadDivisibility { n, k, m });
        }
        if colors < 2 {
            return Err(EngineError::TooFewColors { colors });
        }
        Ok(())
    }

    fn count_vertices(&self) -> Result<BigUint, EngineError> {
        Ok(match self.mode {
            Mode::Homogeneous => count_hom(self.n, self.k)?,
            Mode::General => count_all(self.n, self.k)?,
        })
    }

    fn count_sources(&self) -> Result<BigUint, EngineError> {
        Ok(match self.mode {
            Mode::Homogeneous => count_hom(self.n, self.m)?,
            Mode::General => count_all(self.n, self.m)?,
        })
    }
}

/// Caps protecting instance construction from runaway parameter choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildLimits {
    pub max_vertices: u64,
    pub max_edge_sources: u64,
}

impl Default for BuildLimits {
    fn default() -> Self {
        BuildLimits {
            max_vertices: 200_000,
            max_edge_sources: 1_000_000,
        }
    }
}

/// A fully materialised hypergraph instance. Vertices are listed in
/// enumeration (rank) order; edges hold sorted vertex indices,
/// deduplicated across the sources that induce them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamseyInstance {
    params: InstanceParams,
    vertices: Vec<OrderedPartition>,
    edges: Vec<Vec<usize>>,
    edge_sources: u64,
}

impl RamseyInstance {
    pub fn params(&self) -> &InstanceParams {
        &self.params
    }

    pub fn vertices(&self) -> &[OrderedPartition] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Number of source partitions `u` that generated candidate edges
    /// before deduplication.
    pub fn edge_sources(&self) -> u64 {
        self.edge_sources
    }

    /// Assembles an instance from parts, checking the structural
    /// invariants (member indices in range, edges sorted and deduplicated).
    pub fn from_parts(
        params: InstanceParams,
        vertices: Vec<OrderedPartition>,
        mut edges: Vec<Vec<usize>>,
        edge_sources: u64,
    ) -> Result<Self, EngineError> {
        for edge in &mut edges {
            edge.sort_unstable();
            edge.dedup();
            if edge.is_empty() {
                return Err(EngineError::EmptyEdge);
            }
            for &i in edge.iter() {
                if i >= vertices.len() {
                    return Err(EngineError::EdgeIndexOutOfRange {
                        index: i,
                        vertices: vertices.len(),
                    });
                }
            }
        }
        edges.sort();
        edges.dedup();
        Ok(RamseyInstance {
            params,
            vertices,
            edges,
            edge_sources,
        })
    }
}

/// Builds the coarsening hypergraph for `params`: one vertex per
/// `k`-partition in rank order, one candidate edge per `m`-partition `u`
/// listing the ranks of its `k`-coarsenings, deduplicated.
pub fn build_instance(
    params: InstanceParams,
    limits: &BuildLimits,
) -> Result<RamseyInstance, EngineError> {
    params.validate()?;
    let vertex_count = params.count_vertices()?;
    if vertex_count > BigUint::from(limits.max_vertices) {
        return Err(EngineError::InstanceTooLarge {
            what: "vertices",
            count: vertex_count,
            cap: limits.max_vertices,
        });
    }
    let source_count = params.count_sources()?;
    if source_count > BigUint::from(limits.max_edge_sources) {
        return Err(EngineError::InstanceTooLarge {
            what: "edge sources",
            count: source_count,
            cap: limits.max_edge_sources,
        });
    }

    let vertices: Vec<OrderedPartition> = match params.mode {
        Mode::Homogeneous => enumerate_hom(params.n, params.k)?.collect(),
        Mode::General => enumerate_all(params.n, params.k)?.collect(),
    };
    let index: HashMap<&OrderedPartition, usize> =
        vertices.iter().enumerate().map(|(i, p)| (p, i)).collect();

    let mut edges: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut edge_sources = 0u64;
    let sources: Box<dyn Iterator<Item = OrderedPartition>> = match params.mode {
        Mode::Homogeneous => Box::new(enumerate_hom(params.n, params.m)?),
        Mode::General => Box::new(enumerate_all(params.n, params.m)?),
    };
    for u in sources {
        edge_sources += 1;
        let coarsenings = match params.mode {
            Mode::Homogeneous => coarsenings_hom(&u, params.k)?,
            Mode::General => coarsenings_all(&u, params.k)?,
        };
        let mut edge: Vec<usize> = coarsenings
            .iter()
            .map(|t| *index.get(t).expect("every coarsening is a vertex"))
            .collect();
        edge.sort_unstable();
        edges.insert(edge);
    }

    Ok(RamseyInstance {
        params,
        vertices,
        edges: edges.into_iter().collect(),
        edge_sources,
    })
}

/// An assignment of one color in `1..=N` to every vertex, indexed by rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring(pub Vec<u32>);

impl Coloring {
    pub fn colors(&self) -> &[u32] {
        &self.0
    }
}

fn check_coloring(inst: &RamseyInstance, coloring: &Coloring) -> Result<(), EngineError> {
    if coloring.0.len() != inst.vertices.len() {
        return Err(EngineError::AssignmentIncomplete {
            expected: inst.vertices.len(),
            found: coloring.0.len(),
        });
    }
    let n_colors = inst.params.colors;
    for (v, &c) in coloring.0.iter().enumerate() {
        if c == 0 || c > n_colors {
            return Err(EngineError::InvalidColor {
                vertex: v,
                color: c,
                colors: n_colors,
            });
        }
    }
    Ok(())
}

/// CNF encoding of "a bad coloring exists".
///
/// Two colors: one variable per vertex (vertex `v` is variable `v + 1`,
/// true meaning color 1); every edge yields a clause forbidding all-color-1
/// and a clause forbidding all-color-2. More colors: variable
/// `v*N + c + 1` says vertex `v` (0-based) has color `c+1`; each vertex
/// gets an at-least-one clause and pairwise at-most-one clauses, and each
/// (edge, color) pair yields one all-different clause.
///
/// With `symmetry_break` the first vertex is pinned to color 1, which is
/// sound because permuting colors maps bad colorings to bad colorings.
pub fn encode_sat(inst: &RamseyInstance, symmetry_break: bool) -> CnfFormula {
    let v_count = inst.vertices.len();
    let n = inst.params.colors as usize;
    if n == 2 {
        let mut f = CnfFormula::new(v_count);
        for edge in &inst.edges {
            let pos: Vec<i32> = edge.iter().map(|&v| v as i32 + 1).collect();
            let neg: Vec<i32> = edge.iter().map(|&v| -(v as i32 + 1)).collect();
            f.add_clause(&pos).expect("edge clause is nonempty");
            f.add_clause(&neg).expect("edge clause is nonempty");
        }
        if symmetry_break && v_count > 0 {
            f.add_clause(&[1]).expect("unit clause");
        }
        f
    } else {
        let var = |v: usize, c: usize| (v * n + c + 1) as i32;
        let mut f = CnfFormula::new(v_count * n);
        for v in 0..v_count {
            let alo: Vec<i32> = (0..n).map(|c| var(v, c)).collect();
            f.add_clause(&alo).expect("at-least-one clause");
            for c1 in 0..n {
                for c2 in (c1 + 1)..n {
                    f.add_clause(&[-var(v, c1), -var(v, c2)])
                        .expect("at-most-one clause");
                }
            }
        }
        for edge in &inst.edges {
            for c in 0..n {
                let clause: Vec<i32> = edge.iter().map(|&v| -var(v, c)).collect();
                f.add_clause(&clause).expect("edge clause is nonempty");
            }
        }
        if symmetry_break && v_count > 0 {
            f.add_clause(&[var(0, 0)]).expect("unit clause");
        }
        f
    }
}

/// Reads a coloring back out of a model of [`encode_sat`]'s formula.
pub fn decode_coloring(
    inst: &RamseyInstance,
    assignment: &[bool],
) -> Result<Coloring, EngineError> {
    let n = inst.params.colors as usize;
    let v_count = inst.vertices.len();
    if n == 2 {
        if assignment.len() < v_count {
            return Err(EngineError::InvalidModel {
                vertex: assignment.len(),
            });
        }
        Ok(Coloring(
            (0..v_count)
                .map(|v| if assignment[v] { 1 } else { 2 })
                .collect(),
        ))
    } else {
        if assignment.len() < v_count * n {
            return Err(EngineError::InvalidModel { vertex: v_count });
        }
        let mut colors = Vec::with_capacity(v_count);
        for v in 0..v_count {
            let mut chosen = None;
            for c in 0..n {
                if assignment[v * n + c] {
                    if chosen.is_some() {
                        return Err(EngineError::InvalidModel { vertex: v });
                    }
                    chosen = Some(c as u32 + 1);
                }
            }
            colors.push(chosen.ok_or(EngineError::InvalidModel { vertex: v })?);
        }
        Ok(Coloring(colors))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    /// No source partition has a monochromatic coarsening set.
    Ok,
    /// The first source (by rank) whose coarsening set is monochromatic.
    Violation { u_rank: u64, color: u32 },
}

/// Independently re-checks a coloring against edges regenerated from
/// scratch; the instance's cached edge list is never consulted. Sources are
/// scanned in rank order and the first monochromatic coarsening set is
/// reported.
pub fn verify_coloring(
    inst: &RamseyInstance,
    coloring: &Coloring,
) -> Result<VerifyOutcome, EngineError> {
    check_coloring(inst, coloring)?;
    let params = inst.params;
    // vertex index lookup along a different route than the builder's map:
    // arithmetic ranking for homogeneous mode, a fresh enumeration otherwise
    let general_index: Option<HashMap<OrderedPartition, usize>> = match params.mode {
        Mode::Homogeneous => None,
        Mode::General => Some(
            enumerate_all(params.n, params.k)?
                .enumerate()
                .map(|(i, p)| (p, i))
                .collect(),
        ),
    };
    let rank_of = |t: &OrderedPartition| -> Result<usize, EngineError> {
        match &general_index {
            None => Ok(crate::partition::rank_hom_usize(t)?),
            Some(map) => Ok(*map.get(t).expect("coarsening enumerates as a vertex")),
        }
    };

    let sources: Box<dyn Iterator<Item = OrderedPartition>> = match params.mode {
        Mode::Homogeneous => Box::new(enumerate_hom(params.n, params.m)?),
        Mode::General => Box::new(enumerate_all(params.n, params.m)?),
    };
    for (u_rank, u) in sources.enumerate() {
        let coarsenings = match params.mode {
            Mode::Homogeneous => coarsenings_hom(&u, params.k)?,
            Mode::General => coarsenings_all(&u, params.k)?,
        };
        let mut colors = coarsenings
            .iter()
            .map(|t| Ok(coloring.0[rank_of(t)?]))
            .collect::<Result<Vec<u32>, EngineError>>()?
            .into_iter();
        let first = colors.next().expect("coarsening sets are nonempty");
        if colors.all(|c| c == first) {
            return Ok(VerifyOutcome::Violation {
                u_rank: u_rank as u64,
                color: first,
            });
        }
    }
    Ok(VerifyOutcome::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{solve, SolveBudget, SolveOutcome};

    fn params(n: usize, k: usize, m: usize, colors: u32, mode: Mode) -> InstanceParams {
        InstanceParams {
            n,
            k,
            m,
            colors,
            mode,
        }
    }

    fn hom(n: usize, k: usize, m: usize, colors: u32) -> RamseyInstance {
        build_instance(
            params(n, k, m, colors, Mode::Homogeneous),
            &BuildLimits::default(),
        )
        .unwrap()
    }

    #[test]
    fn smallest_hom_instance() {
        let inst = hom(4, 2, 4, 2);
        assert_eq!(inst.vertices().len(), 3);
        assert_eq!(inst.edges(), &[vec![0, 1, 2]]);
        assert_eq!(inst.edge_sources(), 1);
    }

    #[test]
    fn hom_8_2_4_shape() {
        let inst = hom(8, 2, 4, 2);
        assert_eq!(inst.vertices().len(), 35);
        assert_eq!(inst.edge_sources(), 105);
        assert!(inst.edges().iter().all(|e| e.len() == 3));
        assert!(inst.edges().len() <= 105);
    }

    #[test]
    fn hom_single_source_when_m_equals_n() {
        let inst = hom(8, 2, 8, 2);
        assert_eq!(inst.edge_sources(), 1);
        assert_eq!(inst.edges().len(), 1);
        assert_eq!(inst.edges()[0], (0..35).collect::<Vec<_>>());
    }

    #[test]
    fn general_4_2_3_shape() {
        let inst =
            build_instance(params(4, 2, 3, 2, Mode::General), &BuildLimits::default()).unwrap();
        assert_eq!(inst.vertices().len(), 7);
        assert_eq!(inst.edge_sources(), 6);
        assert!(inst.edges().iter().all(|e| e.len() == 3));
    }

    #[test]
    fn hom_instance_embeds_into_general() {
        let h = hom(8, 2, 4, 2);
        let g = build_instance(params(8, 2, 4, 2, Mode::General), &BuildLimits::default()).unwrap();
        let gv: std::collections::HashSet<_> = g.vertices().iter().collect();
        assert!(h.vertices().iter().all(|v| gv.contains(v)));
        // every homogeneous edge is a subset of the general edge of the same source
        let gidx: HashMap<_, _> = g
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        for u in enumerate_hom(8, 4).unwrap() {
            let hom_edge: std::collections::HashSet<usize> = coarsenings_hom(&u, 2)
                .unwrap()
                .iter()
                .map(|t| gidx[t])
                .collect();
            let gen_edge: std::collections::HashSet<usize> = coarsenings_all(&u, 2)
                .unwrap()
                .iter()
                .map(|t| gidx[t])
                .collect();
            assert!(hom_edge.is_subset(&gen_edge));
        }
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(matches!(
            params(8, 4, 2, 2, Mode::Homogeneous).validate(),
            Err(EngineError::BadArities { .. })
        ));
        assert!(matches!(
            params(6, 2, 4, 2, Mode::Homogeneous).validate(),
            Err(EngineError::BadDivisibility { .. })
        ));
        assert!(matches!(
            params(8, 2, 4, 1, Mode::Homogeneous).validate(),
            Err(EngineError::TooFewColors { colors: 1 })
        ));
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let limits = BuildLimits {
            max_vertices: 10,
            max_edge_sources: 1_000_000,
        };
        match build_instance(params(8, 2, 4, 2, Mode::Homogeneous), &limits) {
            Err(EngineError::InstanceTooLarge {
                what: "vertices",
                count,
                cap: 10,
            }) => {
                assert_eq!(count, BigUint::from(35u32));
            }
            other => panic!("expected InstanceTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn encode_two_colors_without_symmetry_break() {
        let inst = hom(4, 2, 4, 2);
        let f = encode_sat(&inst, false);
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), &[vec![1, 2, 3], vec![-1, -2, -3]]);
        match solve(&f, &SolveBudget::default()) {
            SolveOutcome::Sat(model) => {
                let c = decode_coloring(&inst, &model).unwrap();
                assert_eq!(verify_coloring(&inst, &c).unwrap(), VerifyOutcome::Ok);
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn encode_pins_first_vertex_with_symmetry_break() {
        let inst = hom(4, 2, 4, 2);
        let f = encode_sat(&inst, true);
        assert_eq!(f.clauses().last().unwrap(), &vec![1]);
        let f3 = encode_sat(&hom(4, 2, 4, 3), true);
        assert_eq!(f3.clauses().last().unwrap(), &vec![1]); // x_{0,1} = var 1
    }

    #[test]
    fn encode_three_colors_structure() {
        let inst = hom(4, 2, 4, 3);
        let f = encode_sat(&inst, false);
        assert_eq!(f.num_vars(), 9);
        // 3 ALO + 3*3 AMO + 3 edge-color clauses
        assert_eq!(f.num_clauses(), 3 + 9 + 3);
        assert!(f.clauses().contains(&vec![1, 2, 3]));
        assert!(f.clauses().contains(&vec![-1, -4, -7]));
    }

    #[test]
    fn no_edge_instance_encodes_to_trivially_sat() {
        let p = params(4, 2, 4, 2, Mode::Homogeneous);
        let inst =
            RamseyInstance::from_parts(p, vec!["1,1,2,2".parse().unwrap()], vec![], 0).unwrap();
        let f = encode_sat(&inst, false);
        assert_eq!((f.num_vars(), f.num_clauses()), (1, 0));
        assert!(matches!(
            solve(&f, &SolveBudget::default()),
            SolveOutcome::Sat(_)
        ));
    }

    #[test]
    fn singleton_edge_makes_two_colors_unsat() {
        let p = params(4, 2, 4, 2, Mode::Homogeneous);
        let inst =
            RamseyInstance::from_parts(p, vec!["1,1,2,2".parse().unwrap()], vec![vec![0]], 1)
                .unwrap();
        let f = encode_sat(&inst, false);
        assert_eq!(solve(&f, &SolveBudget::default()), SolveOutcome::Unsat);
    }

    #[test]
    fn verify_accepts_split_edge() {
        let inst = hom(4, 2, 4, 2);
        let verdict = verify_coloring(&inst, &Coloring(vec![1, 1, 2])).unwrap();
        assert_eq!(verdict, VerifyOutcome::Ok);
    }

    #[test]
    fn verify_flags_monochromatic_edge() {
        let inst = hom(4, 2, 4, 2);
        let verdict = verify_coloring(&inst, &Coloring(vec![1, 1, 1])).unwrap();
        assert_eq!(
            verdict,
            VerifyOutcome::Violation {
                u_rank: 0,
                color: 1
            }
        );
    }

    #[test]
    fn verify_rejects_bad_assignments() {
        let inst = hom(4, 2, 4, 2);
        assert!(matches!(
            verify_coloring(&inst, &Coloring(vec![1, 2])),
            Err(EngineError::AssignmentIncomplete {
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(
            verify_coloring(&inst, &Coloring(vec![1, 2, 3])),
            Err(EngineError::InvalidColor {
                vertex: 2,
                color: 3,
                colors: 2
            })
        ));
    }

    #[test]
    fn verify_general_mode() {
        let inst =
            build_instance(params(4, 2, 3, 2, Mode::General), &BuildLimits::default()).unwrap();
        let all_one = Coloring(vec![1; 7]);
        assert!(matches!(
            verify_coloring(&inst, &all_one).unwrap(),
            VerifyOutcome::Violation {
                u_rank: 0,
                color: 1
            }
        ));
    }

    #[test]
    fn from_parts_checks_indices() {
        let p = params(4, 2, 4, 2, Mode::Homogeneous);
        assert!(matches!(
            RamseyInstance::from_parts(p, vec!["1,2".parse().unwrap()], vec![vec![5]], 1),
            Err(EngineError::EdgeIndexOutOfRange {
                index: 5,
                vertices: 1
            })
        ));
        assert!(matches!(
            RamseyInstance::from_parts(p, vec!["1,2".parse().unwrap()], vec![vec![]], 1),
            Err(EngineError::EmptyEdge)
        ));
    }
}

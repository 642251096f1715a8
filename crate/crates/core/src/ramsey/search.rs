use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::instance::{
    build_instance, decode_coloring, encode_sat, verify_coloring, BuildLimits, Coloring,
    EngineError, InstanceParams, Mode, RamseyInstance, VerifyOutcome,
};
use crate::sat::{
    run_external, solve, to_dimacs, CnfFormula, ExternalOutcome, SolveBudget, SolveOutcome,
};

/// Decision procedure used per candidate `n`. `Auto` scans colorings
/// exhaustively while `colors^vertices` stays at or below 2^20 and hands
/// larger instances to the internal SAT solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Engine {
    Auto,
    Exhaustive,
    SatInternal,
    SatExternal { solver: PathBuf },
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::Exhaustive => "exhaustive",
            Engine::SatInternal => "sat-internal",
            Engine::SatExternal { .. } => "sat-external",
        }
    }
}

const AUTO_EXHAUSTIVE_THRESHOLD: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub engine: Engine,
    /// Also try `n = m` before the proper candidates.
    pub include_m: bool,
    /// Keep scanning past the first witness.
    pub scan_all: bool,
    /// Accept an external UNSAT verdict without internal confirmation.
    pub trust_external: bool,
    pub limits: BuildLimits,
    pub budget: SolveBudget,
    pub symmetry_break: bool,
    /// Hard ceiling on `colors^vertices` for a forced exhaustive scan.
    pub exhaustive_cap: u128,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            engine: Engine::Auto,
            include_m: false,
            scan_all: false,
            trust_external: false,
            limits: BuildLimits::default(),
            budget: SolveBudget::default(),
            symmetry_break: true,
            exhaustive_cap: 1 << 26,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    /// A coloring with no monochromatic coarsening set exists for this `n`.
    BadColoring { coloring: Vec<u32>, verified: bool },
    /// No bad coloring exists: this `n` is a witness.
    NoBadColoring { method: String },
    /// The decision could not be completed within the configured resources.
    ResourceLimit { kind: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NOutcome {
    pub n: usize,
    pub vertices: u64,
    pub edges: u64,
    pub edge_sources: u64,
    pub outcome: Outcome,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub k: usize,
    pub m: usize,
    pub colors: u32,
    pub mode: Mode,
    pub max_n: usize,
    pub include_m: bool,
    pub engine: String,
    pub outcomes: Vec<NOutcome>,
    pub witness_n: Option<usize>,
    pub total_ms: u64,
}

impl SearchReport {
    /// The decision content of the report, with timing stripped — two runs
    /// with identical parameters must agree on this.
    pub fn decisions(&self) -> Vec<(usize, Outcome)> {
        self.outcomes
            .iter()
            .map(|o| (o.n, o.outcome.clone()))
            .collect()
    }
}

fn coloring_space(colors: u32, vertices: usize) -> Option<u128> {
    let mut total: u128 = 1;
    for _ in 0..vertices {
        total = total.checked_mul(colors as u128)?;
    }
    Some(total)
}

/// First bad coloring in odometer order (last vertex varies fastest,
/// starting from all-ones), or None when every coloring has a
/// monochromatic edge.
fn exhaustive_scan(inst: &RamseyInstance) -> Option<Coloring> {
    let v = inst.vertices().len();
    let colors = inst.params().colors;
    let mut cur = vec![1u32; v];
    loop {
        let bad = inst
            .edges()
            .iter()
            .all(|edge| !edge.iter().all(|&i| cur[i] == cur[edge[0]]));
        if bad {
            return Some(Coloring(cur));
        }
        let mut pos = v;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            if cur[pos] < colors {
                cur[pos] += 1;
                for later in cur.iter_mut().skip(pos + 1) {
                    *later = 1;
                }
                break;
            }
        }
    }
}

fn verified_bad(inst: &RamseyInstance, coloring: Coloring) -> Outcome {
    let verified = matches!(verify_coloring(inst, &coloring), Ok(VerifyOutcome::Ok));
    Outcome::BadColoring {
        coloring: coloring.0,
        verified,
    }
}

fn write_temp_cnf(
    formula: &CnfFormula,
    inst: &RamseyInstance,
) -> Result<tempfile::NamedTempFile, EngineError> {
    let p = inst.params();
    let comments = vec![format!(
        "homramsey instance n={} k={} m={} colors={} mode={}",
        p.n, p.k, p.m, p.colors, p.mode
    )];
    let mut file = tempfile::Builder::new()
        .prefix("homramsey-")
        .suffix(".cnf")
        .tempfile()?;
    file.write_all(to_dimacs(formula, &comments).as_bytes())?;
    file.flush()?;
    Ok(file)
}

fn decide(inst: &RamseyInstance, opts: &SearchOptions) -> Outcome {
    let engine = match &opts.engine {
        Engine::Auto => {
            let small = coloring_space(inst.params().colors, inst.vertices().len())
                .is_some_and(|space| space <= AUTO_EXHAUSTIVE_THRESHOLD);
            if small {
                Engine::Exhaustive
            } else {
                Engine::SatInternal
            }
        }
        other => other.clone(),
    };
    match engine {
        Engine::Auto => unreachable!("resolved above"),
        Engine::Exhaustive => {
            let space = coloring_space(inst.params().colors, inst.vertices().len());
            if !space.is_some_and(|s| s <= opts.exhaustive_cap) {
                return Outcome::ResourceLimit {
                    kind: "exhaustive-cap".into(),
                };
            }
            match exhaustive_scan(inst) {
                Some(coloring) => verified_bad(inst, coloring),
                None => Outcome::NoBadColoring {
                    method: "exhaustive".into(),
                },
            }
        }
        Engine::SatInternal => {
            let formula = encode_sat(inst, opts.symmetry_break);
            match solve(&formula, &opts.budget) {
                SolveOutcome::Sat(model) => match decode_coloring(inst, &model) {
                    Ok(coloring) => verified_bad(inst, coloring),
                    Err(e) => Outcome::ResourceLimit {
                        kind: format!("internal-model-invalid: {e}"),
                    },
                },
                SolveOutcome::Unsat => Outcome::NoBadColoring {
                    method: "sat-internal".into(),
                },
                SolveOutcome::Budget(_) => Outcome::ResourceLimit {
                    kind: "solver-budget".into(),
                },
            }
        }
        Engine::SatExternal { solver } => {
            let formula = encode_sat(inst, opts.symmetry_break);
            let file = match write_temp_cnf(&formula, inst) {
                Ok(f) => f,
                Err(e) => {
                    return Outcome::ResourceLimit {
                        kind: format!("external-solver-failure: {e}"),
                    }
                }
            };
            match run_external(&solver, file.path(), formula.num_vars()) {
                Ok(ExternalOutcome::Sat(model)) => match decode_coloring(inst, &model) {
                    Ok(coloring) => verified_bad(inst, coloring),
                    Err(e) => Outcome::ResourceLimit {
                        kind: format!("external-model-invalid: {e}"),
                    },
                },
                Ok(ExternalOutcome::Unsat) => {
                    if opts.trust_external {
                        return Outcome::NoBadColoring {
                            method: "sat-external".into(),
                        };
                    }
                    // confirm with the internal solver before accepting UNSAT
                    match solve(&formula, &opts.budget) {
                        SolveOutcome::Unsat => Outcome::NoBadColoring {
                            method: "sat-external+internal".into(),
                        },
                        SolveOutcome::Sat(model) => match decode_coloring(inst, &model) {
                            Ok(coloring) => verified_bad(inst, coloring),
                            Err(e) => Outcome::ResourceLimit {
                                kind: format!("internal-model-invalid: {e}"),
                            },
                        },
                        SolveOutcome::Budget(_) => Outcome::ResourceLimit {
                            kind: "external-unsat-unconfirmed".into(),
                        },
                    }
                }
                Err(e) => Outcome::ResourceLimit {
                    kind: format!("external-solver-failure: {e}"),
                },
            }
        }
    }
}

fn run_search(
    mode: Mode,
    k: usize,
    m: usize,
    colors: u32,
    candidates: Vec<usize>,
    opts: &SearchOptions,
) -> SearchReport {
    let started = Instant::now();
    let mut outcomes = Vec::new();
    let mut witness_n = None;
    for n in candidates {
        let n_started = Instant::now();
        let params = InstanceParams {
            n,
            k,
            m,
            colors,
            mode,
        };
        let (outcome, vertices, edges, edge_sources) = match build_instance(params, &opts.limits) {
            Ok(inst) => {
                let outcome = decide(&inst, opts);
                (
                    outcome,
                    inst.vertices().len() as u64,
                    inst.edges().len() as u64,
                    inst.edge_sources(),
                )
            }
            Err(e @ EngineError::InstanceTooLarge { .. }) => (
                Outcome::ResourceLimit {
                    kind: format!("instance-too-large: {e}"),
                },
                0,
                0,
                0,
            ),
            Err(e) => (
                Outcome::ResourceLimit {
                    kind: format!("build-failure: {e}"),
                },
                0,
                0,
                0,
            ),
        };
        let found_witness = matches!(outcome, Outcome::NoBadColoring { .. });
        outcomes.push(NOutcome {
            n,
            vertices,
            edges,
            edge_sources,
            outcome,
            elapsed_ms: n_started.elapsed().as_millis() as u64,
        });
        if found_witness {
            witness_n = witness_n.or(Some(n));
            if !opts.scan_all {
                break;
            }
        }
    }
    SearchReport {
        k,
        m,
        colors,
        mode,
        max_n: 0, // filled by callers that know the bound
        include_m: opts.include_m,
        engine: opts.engine.name().to_string(),
        outcomes,
        witness_n,
        total_ms: started.elapsed().as_millis() as u64,
    }
}

/// Scans homogeneous candidates `n` (multiples of `m`, starting at `2m`, or
/// at `m` with `include_m`) up to `max_n`, deciding bad-coloring existence
/// for each and stopping at the first witness unless `scan_all` is set.
pub fn search_hdr(
    k: usize,
    m: usize,
    colors: u32,
    max_n: usize,
    opts: &SearchOptions,
) -> Result<SearchReport, EngineError> {
    if k == 0 || k >= m {
        return Err(EngineError::BadArities { n: max_n, k, m });
    }
    if !m.is_multiple_of(k) {
        return Err(EngineError::BadDivisibility { n: max_n, k, m });
    }
    if colors < 2 {
        return Err(EngineError::TooFewColors { colors });
    }
    let start = if opts.include_m { m } else { 2 * m };
    let candidates: Vec<usize> = (start..=max_n).step_by(m).collect();
    let mut report = run_search(Mode::Homogeneous, k, m, colors, candidates, opts);
    report.max_n = max_n;
    Ok(report)
}

/// General-partition variant of [`search_hdr`]: candidates are all integers
/// above `m` (from `m` with `include_m`) up to `max_n`.
pub fn search_drt(
    k: usize,
    m: usize,
    colors: u32,
    max_n: usize,
    opts: &SearchOptions,
) -> Result<SearchReport, EngineError> {
    if k == 0 || k >= m {
        return Err(EngineError::BadArities { n: max_n, k, m });
    }
    if colors < 2 {
        return Err(EngineError::TooFewColors { colors });
    }
    let start = if opts.include_m { m } else { m + 1 };
    let candidates: Vec<usize> = (start..=max_n).collect();
    let mut report = run_search(Mode::General, k, m, colors, candidates, opts);
    report.max_n = max_n;
    Ok(report)
}

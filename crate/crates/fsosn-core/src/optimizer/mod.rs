//! Multi-commodity routing: minimize total network latency.
//!
//! Each commodity is one ground-to-ground connection that must be carried
//! over a single simple path through the satellite shell. A path's latency
//! is its summed link propagation plus a fixed per-satellite forwarding
//! delay. Paths of different commodities may not share a physical link
//! (either direction), and no node may terminate more optical links than it
//! has terminals. Three solvers share these semantics:
//!
//! * [`node_weighted_shortest_path`] — one commodity, ignoring the others;
//! * [`solve_greedy`] — commodities routed sequentially over the residual
//!   graph, longest great-circle first: fast, feasible, not optimal;
//! * [`solve_exact`] — branch-and-bound proving the optimum, bounded below
//!   by per-commodity shortest paths with disjointness relaxed;
//! * [`brute_force_oracle`] — exhaustive enumeration for tiny instances,
//!   used to cross-check the exact solver in tests.
//!
//! Determinism is load-bearing throughout: ties break by (total latency,
//! hop count, lexicographic node sequence), and every solver evaluates path
//! cost with the same folding order, so equal answers are equal bit-for-bit.

mod brute_force;
mod exact;
mod greedy;
mod shortest_path;

pub use brute_force::brute_force_oracle;
pub use exact::{solve_exact, solve_exact_with_budget, ExactBudget};
pub use greedy::{solve_greedy, solve_greedy_with_order};
pub use shortest_path::node_weighted_shortest_path;

use crate::netgraph::{NodeRef, Snapshot};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptimizerError {
    #[error("invalid routing problem: {0}")]
    InvalidProblem(String),
    #[error("instance outside the oracle envelope: {0}")]
    SizeLimit(String),
}

/// One ground-to-ground connection to route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commodity {
    pub id: usize,
    pub source: NodeRef,
    pub destination: NodeRef,
}

/// A snapshot plus the demands and routing constants.
#[derive(Debug)]
pub struct RoutingProblem<'a> {
    pub snapshot: &'a Snapshot,
    pub commodities: Vec<Commodity>,
    /// Forwarding delay charged per satellite on a path, ms.
    pub node_delay_ms: f64,
    /// Maximum optical links terminating at any one node.
    pub node_degree_cap: u32,
}

/// Per-satellite forwarding delay used throughout the study, ms.
pub const DEFAULT_NODE_DELAY_MS: f64 = 10.0;
/// Laser terminals per satellite in the study constellation.
pub const DEFAULT_NODE_DEGREE_CAP: u32 = 4;

impl<'a> RoutingProblem<'a> {
    /// Problem with the study constants (10 ms node delay, degree cap 4).
    pub fn new(
        snapshot: &'a Snapshot,
        commodities: Vec<Commodity>,
    ) -> Result<Self, OptimizerError> {
        Self::with_params(
            snapshot,
            commodities,
            DEFAULT_NODE_DELAY_MS,
            DEFAULT_NODE_DEGREE_CAP,
        )
    }

    pub fn with_params(
        snapshot: &'a Snapshot,
        commodities: Vec<Commodity>,
        node_delay_ms: f64,
        node_degree_cap: u32,
    ) -> Result<Self, OptimizerError> {
        if !(node_delay_ms.is_finite() && node_delay_ms >= 0.0) {
            return Err(OptimizerError::InvalidProblem(format!(
                "node delay {node_delay_ms} must be non-negative"
            )));
        }
        if node_degree_cap < 2 {
            return Err(OptimizerError::InvalidProblem(format!(
                "degree cap {node_degree_cap} cannot even carry a transit path"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &commodities {
            if !seen.insert(c.id) {
                return Err(OptimizerError::InvalidProblem(format!(
                    "duplicate commodity id {}",
                    c.id
                )));
            }
            if c.source == c.destination {
                return Err(OptimizerError::InvalidProblem(format!(
                    "commodity {} routes a node to itself",
                    c.id
                )));
            }
            for (what, node) in [("source", c.source), ("destination", c.destination)] {
                if !matches!(node, NodeRef::Ground(_)) {
                    return Err(OptimizerError::InvalidProblem(format!(
                        "commodity {} {what} {node} is not a ground station",
                        c.id
                    )));
                }
                if snapshot.node_index(node).is_none() {
                    return Err(OptimizerError::InvalidProblem(format!(
                        "commodity {} {what} {node} is not in the snapshot",
                        c.id
                    )));
                }
            }
        }
        Ok(Self {
            snapshot,
            commodities,
            node_delay_ms,
            node_degree_cap,
        })
    }
}

/// One commodity's routed path with its exact latency decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution {
    pub commodity: usize,
    /// Ground, satellites…, ground.
    pub node_sequence: Vec<NodeRef>,
    /// propagation_ms + node_delay_ms, always exactly.
    pub latency_ms: f64,
    /// Summed link propagation in path order, ms.
    pub propagation_ms: f64,
    /// Total forwarding delay: per-satellite delay times hop count, ms.
    pub node_delay_ms: f64,
    /// Number of satellites on the path.
    pub hop_count: usize,
}

impl PathSolution {
    /// Assemble the decomposition so that `latency = propagation + delay`
    /// holds bit-exactly by construction.
    pub(crate) fn from_route(
        commodity: usize,
        node_sequence: Vec<NodeRef>,
        propagation_ms: f64,
        hop_count: usize,
        per_node_delay_ms: f64,
    ) -> Self {
        let node_delay_ms = per_node_delay_ms * hop_count as f64;
        PathSolution {
            commodity,
            latency_ms: propagation_ms + node_delay_ms,
            propagation_ms,
            node_delay_ms,
            hop_count,
            node_sequence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal.
    Optimal,
    /// Feasible but without an optimality proof (greedy, or an exhausted
    /// search budget).
    Heuristic,
    /// No routing produced. For the exact solver this is a proof of
    /// infeasibility; for the greedy it only means the heuristic failed.
    Infeasible,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Heuristic => "heuristic",
            SolveStatus::Infeasible => "infeasible",
        })
    }
}

/// A routing of all commodities (or of those that could be routed).
#[derive(Debug, Clone, PartialEq)]
pub struct TotalSolution {
    /// Routed paths, sorted by commodity id.
    pub paths: Vec<PathSolution>,
    /// Commodities left unrouted, ascending.
    pub unrouted: Vec<usize>,
    /// Sum of routed path latencies, in commodity-id order.
    pub total_latency_ms: f64,
    pub status: SolveStatus,
}

impl TotalSolution {
    pub(crate) fn from_paths(mut paths: Vec<PathSolution>, status: SolveStatus) -> Self {
        paths.sort_by_key(|p| p.commodity);
        TotalSolution {
            total_latency_ms: fold_total(&paths),
            unrouted: Vec::new(),
            paths,
            status,
        }
    }

    pub fn all_routed(&self) -> bool {
        self.unrouted.is_empty()
    }
}

/// Canonical accumulation of a solution's total: path latencies summed in
/// commodity-id order. Every solver and the validator use this fold, so
/// totals from different solvers are comparable bit-for-bit.
pub(crate) fn fold_total(paths_sorted_by_commodity: &[PathSolution]) -> f64 {
    paths_sorted_by_commodity
        .iter()
        .map(|p| p.latency_ms)
        .fold(0.0, |acc, l| acc + l)
}

/// Canonical walk of a node sequence: propagation folded in path order plus
/// the satellite count. `None` if some consecutive pair has no arc.
pub(crate) fn walk_sequence(
    snapshot: &Snapshot,
    sequence: &[NodeRef],
) -> Option<(f64, usize)> {
    let mut propagation = 0.0;
    let mut hops = 0;
    for pair in sequence.windows(2) {
        let from = snapshot.node_index(pair[0])?;
        let to = snapshot.node_index(pair[1])?;
        let arcs = snapshot.neighbors(from);
        let arc = arcs
            .binary_search_by_key(&(to as u32), |a| a.to)
            .ok()
            .map(|i| &arcs[i])?;
        propagation += arc.latency_ms;
        if snapshot.is_satellite(to) {
            hops += 1;
        }
    }
    Some((propagation, hops))
}

/// A constraint broken by a candidate solution. Violations are data, not
/// errors: the validator reports all of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownCommodity { commodity: usize },
    DuplicatePath { commodity: usize },
    EndpointMismatch { commodity: usize, expected: NodeRef, found: Option<NodeRef> },
    UnknownNode { commodity: usize, node: NodeRef },
    InteriorGround { commodity: usize, node: NodeRef },
    RepeatedNode { commodity: usize, node: NodeRef },
    MissingEdge { commodity: usize, from: NodeRef, to: NodeRef },
    /// The same undirected link carries two commodities.
    EdgeReuse { a: NodeRef, b: NodeRef, first: usize, second: usize },
    DegreeExceeded { node: NodeRef, incident: u32, cap: u32 },
    PowerLimitExceeded { commodity: usize, from: NodeRef, to: NodeRef, power_w: f64, limit_w: f64 },
    /// Stored latency fields disagree with the canonical recomputation.
    DecompositionMismatch { commodity: usize },
    /// Stored total disagrees with the canonical fold of path latencies.
    TotalMismatch { expected: f64, found: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::UnknownCommodity { commodity } => {
                write!(f, "path for unknown commodity {commodity}")
            }
            Violation::DuplicatePath { commodity } => {
                write!(f, "two paths for commodity {commodity}")
            }
            Violation::EndpointMismatch { commodity, expected, found } => match found {
                Some(n) => write!(f, "commodity {commodity} endpoint is {n}, expected {expected}"),
                None => write!(f, "commodity {commodity} path too short, expected endpoint {expected}"),
            },
            Violation::UnknownNode { commodity, node } => {
                write!(f, "commodity {commodity} visits {node}, not in the snapshot")
            }
            Violation::InteriorGround { commodity, node } => {
                write!(f, "commodity {commodity} routes through ground station {node}")
            }
            Violation::RepeatedNode { commodity, node } => {
                write!(f, "commodity {commodity} visits {node} twice")
            }
            Violation::MissingEdge { commodity, from, to } => {
                write!(f, "commodity {commodity} uses nonexistent link {from}->{to}")
            }
            Violation::EdgeReuse { a, b, first, second } => {
                write!(f, "link {a}-{b} used by commodities {first} and {second}")
            }
            Violation::DegreeExceeded { node, incident, cap } => {
                write!(f, "{node} terminates {incident} links, cap {cap}")
            }
            Violation::PowerLimitExceeded { commodity, from, to, power_w, limit_w } => {
                write!(
                    f,
                    "commodity {commodity} link {from}->{to} needs {power_w} W over the {limit_w} W limit"
                )
            }
            Violation::DecompositionMismatch { commodity } => {
                write!(f, "commodity {commodity} latency fields do not decompose exactly")
            }
            Violation::TotalMismatch { expected, found } => {
                write!(f, "total latency {found} != summed path latencies {expected}")
            }
        }
    }
}

/// Check a solution against every routing constraint. Empty result means
/// the solution is well-formed, feasible, and exactly accounted.
pub fn validate_solution(problem: &RoutingProblem, solution: &TotalSolution) -> Vec<Violation> {
    let snapshot = problem.snapshot;
    let mut violations = Vec::new();
    let by_id: std::collections::HashMap<usize, &Commodity> =
        problem.commodities.iter().map(|c| (c.id, c)).collect();

    let mut seen_paths = std::collections::HashSet::new();
    // (undirected link) -> first commodity that used it
    let mut used_links: std::collections::HashMap<(NodeRef, NodeRef), usize> =
        std::collections::HashMap::new();
    let mut incident: std::collections::BTreeMap<NodeRef, u32> = std::collections::BTreeMap::new();

    for path in &solution.paths {
        let k = path.commodity;
        let Some(commodity) = by_id.get(&k) else {
            violations.push(Violation::UnknownCommodity { commodity: k });
            continue;
        };
        if !seen_paths.insert(k) {
            violations.push(Violation::DuplicatePath { commodity: k });
            continue;
        }
        let seq = &path.node_sequence;

        for (expected, found) in [
            (commodity.source, seq.first().copied()),
            (commodity.destination, seq.last().filter(|_| seq.len() >= 2).copied()),
        ] {
            if found != Some(expected) {
                violations.push(Violation::EndpointMismatch { commodity: k, expected, found });
            }
        }

        let mut visited = std::collections::HashSet::new();
        for (i, node) in seq.iter().enumerate() {
            if snapshot.node_index(*node).is_none() {
                violations.push(Violation::UnknownNode { commodity: k, node: *node });
            }
            if i > 0 && i + 1 < seq.len() && matches!(node, NodeRef::Ground(_)) {
                violations.push(Violation::InteriorGround { commodity: k, node: *node });
            }
            if !visited.insert(*node) {
                violations.push(Violation::RepeatedNode { commodity: k, node: *node });
            }
        }

        for pair in seq.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            let arc = snapshot
                .node_index(from)
                .zip(snapshot.node_index(to))
                .and_then(|(f, t)| {
                    let arcs = snapshot.neighbors(f);
                    arcs.binary_search_by_key(&(t as u32), |a| a.to)
                        .ok()
                        .map(|i| arcs[i])
                });
            let Some(arc) = arc else {
                violations.push(Violation::MissingEdge { commodity: k, from, to });
                continue;
            };
            if let Some(limit) = snapshot.power_limit_w {
                let power = snapshot.edges()[arc.edge_index as usize].power_cost_w;
                if power > limit {
                    violations.push(Violation::PowerLimitExceeded {
                        commodity: k,
                        from,
                        to,
                        power_w: power,
                        limit_w: limit,
                    });
                }
            }
            let link = (from.min(to), from.max(to));
            match used_links.get(&link) {
                Some(&first) if first != k => {
                    violations.push(Violation::EdgeReuse {
                        a: link.0,
                        b: link.1,
                        first,
                        second: k,
                    });
                }
                Some(_) => {} // same commodity revisiting a link is already a RepeatedNode
                None => {
                    used_links.insert(link, k);
                }
            }
            *incident.entry(from).or_insert(0) += 1;
            *incident.entry(to).or_insert(0) += 1;
        }

        // Exact decomposition: recompute canonically and compare bitwise.
        let canonical = walk_sequence(snapshot, seq);
        let decomposed_ok = match canonical {
            Some((prop, hops)) => {
                let expected =
                    PathSolution::from_route(k, seq.clone(), prop, hops, problem.node_delay_ms);
                hops == seq.len().saturating_sub(2)
                    && path.hop_count == hops
                    && path.propagation_ms == expected.propagation_ms
                    && path.node_delay_ms == expected.node_delay_ms
                    && path.latency_ms == expected.latency_ms
            }
            // Edge errors are already reported; only flag the decomposition
            // arithmetic here if the fields disagree among themselves.
            None => {
                path.latency_ms == path.propagation_ms + path.node_delay_ms
                    && path.hop_count == seq.len().saturating_sub(2)
            }
        };
        if !decomposed_ok {
            violations.push(Violation::DecompositionMismatch { commodity: k });
        }
    }

    for (node, count) in incident {
        if count > problem.node_degree_cap {
            violations.push(Violation::DegreeExceeded {
                node,
                incident: count,
                cap: problem.node_degree_cap,
            });
        }
    }

    let mut sorted: Vec<&PathSolution> = solution.paths.iter().collect();
    sorted.sort_by_key(|p| p.commodity);
    let expected: f64 = sorted.iter().map(|p| p.latency_ms).fold(0.0, |a, l| a + l);
    if expected != solution.total_latency_ms {
        violations.push(Violation::TotalMismatch {
            expected,
            found: solution.total_latency_ms,
        });
    }

    violations
}

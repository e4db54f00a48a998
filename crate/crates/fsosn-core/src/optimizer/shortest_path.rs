//! Node-weighted shortest paths over a snapshot.
//!
//! The cost of a path is its propagation (edge latencies folded in path
//! order) plus a fixed delay per satellite visited. Dijkstra works directly
//! on that key; since both terms only grow along a path, the key is monotone
//! and the classic argument applies. Ties break by fewer hops, then by
//! lexicographically smallest node sequence, which makes the returned path a
//! pure function of the snapshot — the property every reproducibility test
//! downstream leans on.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use crate::netgraph::{NodeRef, Snapshot};

use super::{OptimizerError, PathSolution};

/// Restrictions a commodity must route around: links already claimed or
/// branched away, nodes it may not transit, and terminal budgets already
/// spent by other commodities.
#[derive(Default)]
pub(crate) struct RouteConstraints<'a> {
    /// Undirected links, as (low, high) node-index pairs.
    pub forbidden_links: Option<&'a HashSet<(u32, u32)>>,
    /// Nodes this commodity may not use as an intermediate.
    pub forbidden_transit: Option<&'a HashSet<u32>>,
    /// Links already terminating at each node (from other commodities).
    pub degree_used: Option<&'a [u32]>,
    /// Terminal cap; only enforced when `degree_used` is present.
    pub degree_cap: u32,
}

/// A found route in node-index form, with the canonical cost pieces.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RoutedPath {
    pub nodes: Vec<u32>,
    pub propagation_ms: f64,
    pub hops: u32,
}

impl RoutedPath {
    pub(crate) fn latency_ms(&self, node_delay_ms: f64) -> f64 {
        self.propagation_ms + node_delay_ms * self.hops as f64
    }

    pub(crate) fn node_sequence(&self, snapshot: &Snapshot) -> Vec<NodeRef> {
        self.nodes.iter().map(|&i| snapshot.nodes()[i as usize]).collect()
    }

    pub(crate) fn into_path_solution(
        self,
        commodity: usize,
        snapshot: &Snapshot,
        node_delay_ms: f64,
    ) -> PathSolution {
        let sequence = self.node_sequence(snapshot);
        PathSolution::from_route(
            commodity,
            sequence,
            self.propagation_ms,
            self.hops as usize,
            node_delay_ms,
        )
    }

    /// Undirected links of the path as (low, high) node-index pairs.
    pub(crate) fn links(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.nodes
            .windows(2)
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }
}

#[derive(Clone, Copy)]
struct HeapEntry {
    key: f64,
    hops: u32,
    seq: u64,
    node: u32,
    version: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.hops.cmp(&other.hops))
            .then(self.seq.cmp(&other.seq))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PRED: u32 = u32::MAX;

/// Dijkstra on the node-weighted key, index-based core shared by all
/// solvers. Returns `None` when the destination is unreachable under the
/// constraints.
pub(crate) fn shortest_route(
    snapshot: &Snapshot,
    source: usize,
    destination: usize,
    node_delay_ms: f64,
    constraints: &RouteConstraints,
) -> Option<RoutedPath> {
    let n = snapshot.node_count();
    debug_assert!(source < n && destination < n);

    // A path still to be routed parks one terminal at each endpoint.
    if let Some(used) = constraints.degree_used {
        if used[source] + 1 > constraints.degree_cap
            || used[destination] + 1 > constraints.degree_cap
        {
            return None;
        }
    }

    let link_forbidden = |a: u32, b: u32| {
        constraints
            .forbidden_links
            .map_or(false, |f| f.contains(&(a.min(b), a.max(b))))
    };
    let may_transit = |v: usize| {
        snapshot.is_satellite(v)
            && !constraints
                .forbidden_transit
                .map_or(false, |f| f.contains(&(v as u32)))
            // A transit spends two terminals.
            && constraints
                .degree_used
                .map_or(true, |used| used[v] + 2 <= constraints.degree_cap)
    };

    let mut prop = vec![f64::INFINITY; n];
    let mut hops = vec![0u32; n];
    let mut pred = vec![NO_PRED; n];
    let mut version = vec![0u32; n];
    let mut reached = vec![false; n];

    let src_hops = snapshot.is_satellite(source) as u32;
    prop[source] = 0.0;
    hops[source] = src_hops;
    reached[source] = true;

    let mut heap: BinaryHeap<Reverse<HeapEntry>> = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Reverse(HeapEntry {
        key: node_delay_ms * src_hops as f64,
        hops: src_hops,
        seq,
        node: source as u32,
        version: 0,
    }));

    let key_of = |prop: f64, hops: u32| prop + node_delay_ms * hops as f64;

    while let Some(Reverse(entry)) = heap.pop() {
        let u = entry.node as usize;
        if entry.version != version[u] {
            continue; // superseded label
        }
        // Everything at a key past the destination's settled key is moot.
        if reached[destination] {
            let dest_key = key_of(prop[destination], hops[destination]);
            if entry.key > dest_key {
                break;
            }
        }
        if u == destination {
            continue; // never extend through the destination
        }
        for arc in snapshot.neighbors(u) {
            let v = arc.to as usize;
            if v != destination && !may_transit(v) {
                continue;
            }
            if link_forbidden(u as u32, arc.to) {
                continue;
            }
            let cand_prop = prop[u] + arc.latency_ms;
            let cand_hops = hops[u] + snapshot.is_satellite(v) as u32;
            let cand_key = key_of(cand_prop, cand_hops);
            let better = if !reached[v] {
                true
            } else {
                let cur_key = key_of(prop[v], hops[v]);
                match cand_key.total_cmp(&cur_key).then(cand_hops.cmp(&hops[v])) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => candidate_is_lex_smaller(&pred, u as u32, v as u32),
                }
            };
            if better {
                prop[v] = cand_prop;
                hops[v] = cand_hops;
                pred[v] = u as u32;
                version[v] += 1;
                reached[v] = true;
                seq += 1;
                heap.push(Reverse(HeapEntry {
                    key: cand_key,
                    hops: cand_hops,
                    seq,
                    node: v as u32,
                    version: version[v],
                }));
            }
        }
    }

    if !reached[destination] {
        return None;
    }
    let mut nodes = Vec::new();
    let mut at = destination as u32;
    loop {
        nodes.push(at);
        if at as usize == source {
            break;
        }
        at = pred[at as usize];
    }
    nodes.reverse();
    Some(RoutedPath {
        nodes,
        propagation_ms: prop[destination],
        hops: hops[destination],
    })
}

/// On an exact (key, hops) tie at `v`: does the path through `u` precede
/// the currently stored one lexicographically? Node indices order the same
/// way as their NodeRefs, so index sequences compare directly. Ties this
/// deep are rare (bitwise-equal folded costs), so the reconstruction cost
/// is irrelevant.
fn candidate_is_lex_smaller(pred: &[u32], u: u32, v: u32) -> bool {
    let chain = |mut end: u32| {
        let mut path = vec![];
        loop {
            path.push(end);
            if pred[end as usize] == NO_PRED {
                break;
            }
            end = pred[end as usize];
        }
        path.reverse();
        path
    };
    let mut candidate = chain(u);
    candidate.push(v);
    let incumbent = chain(v);
    // Equal (key, hops) forces equal length: same satellite count, same
    // endpoints.
    candidate < incumbent
}

/// Cheapest single-commodity route between two ground stations, by latency,
/// then hops, then lexicographic node sequence. `Ok(None)` means the pair is
/// disconnected at this snapshot (a finding, not an error). Optionally, a
/// set of undirected links may be excluded.
///
/// The `commodity` field of the result is 0; callers routing a real
/// commodity set use the multi-commodity solvers instead.
pub fn node_weighted_shortest_path(
    snapshot: &Snapshot,
    source: NodeRef,
    destination: NodeRef,
    node_delay_ms: f64,
    forbidden_links: Option<&HashSet<(NodeRef, NodeRef)>>,
) -> Result<Option<PathSolution>, OptimizerError> {
    if !(node_delay_ms.is_finite() && node_delay_ms >= 0.0) {
        return Err(OptimizerError::InvalidProblem(format!(
            "node delay {node_delay_ms} must be non-negative"
        )));
    }
    if source == destination {
        return Err(OptimizerError::InvalidProblem(
            "source and destination coincide".into(),
        ));
    }
    let endpoint = |node: NodeRef| -> Result<usize, OptimizerError> {
        if !matches!(node, NodeRef::Ground(_)) {
            return Err(OptimizerError::InvalidProblem(format!(
                "endpoint {node} is not a ground station"
            )));
        }
        snapshot.node_index(node).ok_or_else(|| {
            OptimizerError::InvalidProblem(format!("endpoint {node} is not in the snapshot"))
        })
    };
    let src = endpoint(source)?;
    let dst = endpoint(destination)?;

    // Pairs naming unknown nodes cannot constrain anything and are dropped.
    let forbidden: HashSet<(u32, u32)> = forbidden_links
        .map(|set| {
            set.iter()
                .filter_map(|&(a, b)| {
                    let a = snapshot.node_index(a)? as u32;
                    let b = snapshot.node_index(b)? as u32;
                    Some((a.min(b), a.max(b)))
                })
                .collect()
        })
        .unwrap_or_default();

    let constraints = RouteConstraints {
        forbidden_links: Some(&forbidden),
        ..Default::default()
    };
    Ok(shortest_route(snapshot, src, dst, node_delay_ms, &constraints)
        .map(|r| r.into_path_solution(0, snapshot, node_delay_ms)))
}

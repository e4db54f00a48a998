//! Exact multi-commodity routing by branch and bound.
//!
//! The relaxation drops the coupling rules: each commodity independently
//! takes its constrained shortest path, and the folded sum of those costs
//! bounds every completion from below (constraints only shrink each
//! commodity's choice set, and the fold is monotone in each term). When the
//! relaxed routes collide, the search branches: a contended link is either
//! reserved for one commodity or withdrawn from all of them; an overloaded
//! node is avoided by one of the commodities transiting it. Every child
//! strictly grows some commodity's forbidden set, so the tree is finite.
//!
//! The search keeps the incumbent only when a leaf is *strictly* better, and
//! prunes only subtrees whose bound is *strictly* worse, so the returned
//! total is the exact minimum of the solution set — bit-for-bit the value a
//! full enumeration would produce, which is how the oracle tests compare it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use super::greedy::solve_greedy;
use super::shortest_path::{shortest_route, RouteConstraints, RoutedPath};
use super::{PathSolution, RoutingProblem, SolveStatus, TotalSolution};

/// Search effort limits. Node counts keep runs deterministic; a wall-clock
/// limit is a last-resort guard that trades that determinism away (the cut
/// point depends on timing), so it is off by default.
#[derive(Debug, Clone)]
pub struct ExactBudget {
    /// Maximum branch-and-bound nodes to expand.
    pub max_nodes: u64,
    /// Optional wall-clock limit.
    pub max_wall: Option<Duration>,
}

impl Default for ExactBudget {
    fn default() -> Self {
        ExactBudget {
            max_nodes: 1_000_000,
            max_wall: None,
        }
    }
}

/// Per-commodity constraint state accumulated along a branch.
#[derive(Default, Clone)]
struct CommodityCtx {
    forbidden_links: HashSet<(u32, u32)>,
    forbidden_transit: HashSet<u32>,
}

struct SearchNode {
    lower_bound: f64,
    seq: u64,
    ctx: Vec<CommodityCtx>,
    /// Relaxation routes, index-aligned with the id-sorted commodity list.
    routes: Vec<RoutedPath>,
}

// Min-heap by (lower bound, insertion order) under std's max-heap.
impl PartialEq for SearchNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for SearchNode {}
impl Ord for SearchNode {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower_bound
            .total_cmp(&self.lower_bound)
            .then(other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Solve to proven optimality under the default budget.
pub fn solve_exact(problem: &RoutingProblem) -> TotalSolution {
    solve_exact_with_budget(problem, &ExactBudget::default())
}

/// Solve to proven optimality, or to the best incumbent when the budget
/// runs out (status `Heuristic` in that case).
pub fn solve_exact_with_budget(problem: &RoutingProblem, budget: &ExactBudget) -> TotalSolution {
    let snapshot = problem.snapshot;
    let k = problem.commodities.len();
    if k == 0 {
        return TotalSolution::from_paths(Vec::new(), SolveStatus::Optimal);
    }

    let mut commodities = problem.commodities.clone();
    commodities.sort_by_key(|c| c.id);
    let endpoints: Vec<(usize, usize)> = commodities
        .iter()
        .map(|c| {
            (
                snapshot.node_index(c.source).unwrap(),
                snapshot.node_index(c.destination).unwrap(),
            )
        })
        .collect();

    let relax = |i: usize, ctx: &[CommodityCtx]| -> Option<RoutedPath> {
        // Degree budgets never bind a single simple path (cap >= 2), so the
        // relaxation only carries this commodity's own forbidden sets.
        let constraints = RouteConstraints {
            forbidden_links: Some(&ctx[i].forbidden_links),
            forbidden_transit: Some(&ctx[i].forbidden_transit),
            degree_used: None,
            degree_cap: u32::MAX,
        };
        shortest_route(
            snapshot,
            endpoints[i].0,
            endpoints[i].1,
            problem.node_delay_ms,
            &constraints,
        )
    };
    // The bound folds route latencies in id order — the same accumulation
    // `fold_total` performs on finished paths.
    let bound_of = |routes: &[RoutedPath]| -> f64 {
        routes
            .iter()
            .fold(0.0, |acc, r| acc + r.latency_ms(problem.node_delay_ms))
    };
    let infeasible = || -> TotalSolution {
        let mut unrouted: Vec<usize> = commodities.iter().map(|c| c.id).collect();
        unrouted.sort_unstable();
        TotalSolution {
            paths: Vec::new(),
            unrouted,
            total_latency_ms: 0.0,
            status: SolveStatus::Infeasible,
        }
    };

    let root_ctx = vec![CommodityCtx::default(); k];
    let mut root_routes = Vec::with_capacity(k);
    for i in 0..k {
        match relax(i, &root_ctx) {
            Some(route) => root_routes.push(route),
            // Disconnected even without coupling: proven infeasible.
            None => return infeasible(),
        }
    }

    // Greedy respects every coupling rule, so a fully-routed greedy answer
    // is a valid incumbent.
    let greedy = solve_greedy(problem);
    let mut incumbent: Option<(Vec<PathSolution>, f64)> = if greedy.all_routed() {
        Some((greedy.paths, greedy.total_latency_ms))
    } else {
        None
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(SearchNode {
        lower_bound: bound_of(&root_routes),
        seq,
        ctx: root_ctx,
        routes: root_routes,
    });

    let started = Instant::now();
    let mut expanded = 0u64;
    let mut proven = true;

    while let Some(node) = heap.pop() {
        if let Some((_, best)) = &incumbent {
            if node.lower_bound > *best {
                // Min-heap: every remaining subtree bounds at least this
                // high and cannot strictly beat the incumbent.
                break;
            }
        }
        if expanded >= budget.max_nodes
            || budget.max_wall.map_or(false, |w| started.elapsed() >= w)
        {
            proven = false;
            break;
        }
        expanded += 1;

        // Most contended link: highest user count, smallest link on ties
        // (ascending scan, strictly-greater updates).
        let mut usage: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for route in &node.routes {
            for link in route.links() {
                *usage.entry(link).or_default() += 1;
            }
        }
        let mut contended: Option<((u32, u32), usize)> = None;
        for (link, count) in usage {
            if count >= 2 && contended.map_or(true, |(_, best)| count > best) {
                contended = Some((link, count));
            }
        }

        if let Some((link, _)) = contended {
            // A feasible completion assigns the link to at most one
            // commodity: one child per "reserved for i" (any commodity may
            // still claim it later, not just today's users), plus one child
            // withdrawing it from everyone. Only commodities whose current
            // route rides the link need a re-solve — a forbidden link off
            // the route leaves a minimum over a subset that still contains
            // that route.
            let rides = |routes: &[RoutedPath], m: usize| routes[m].links().any(|l| l == link);
            for kept in 0..=k {
                // kept == k is the withdraw-from-everyone child.
                push_child(
                    &mut heap,
                    &mut seq,
                    &node,
                    |ctx, routes| {
                        let mut resolve = Vec::new();
                        for m in 0..k {
                            if m != kept && ctx[m].forbidden_links.insert(link) && rides(routes, m)
                            {
                                resolve.push(m);
                            }
                        }
                        resolve
                    },
                    &relax,
                    &bound_of,
                );
            }
            continue;
        }

        // Links are disjoint here; count terminals per node.
        let mut incident = vec![0u32; snapshot.node_count()];
        for route in &node.routes {
            for (a, b) in route.links() {
                incident[a as usize] += 1;
                incident[b as usize] += 1;
            }
        }
        let violating = incident
            .iter()
            .position(|&c| c > problem.node_degree_cap);

        let Some(victim) = violating else {
            // Leaf: the relaxation already satisfies every coupling rule.
            let total = node.lower_bound;
            let replace = incumbent
                .as_ref()
                .map_or(true, |(_, best)| total < *best);
            if replace {
                let paths: Vec<PathSolution> = node
                    .routes
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        r.clone()
                            .into_path_solution(commodities[i].id, snapshot, problem.node_delay_ms)
                    })
                    .collect();
                incumbent = Some((paths, total));
            }
            continue;
        };

        // One child per commodity transiting the overloaded node, each
        // avoiding it. Terminals contributed by endpoints cannot move, so
        // if no commodity transits, the subtree is infeasible and dies.
        let victim = victim as u32;
        for i in 0..k {
            let interior = &node.routes[i].nodes[1..node.routes[i].nodes.len().saturating_sub(1)];
            if !interior.contains(&victim) {
                continue;
            }
            push_child(
                &mut heap,
                &mut seq,
                &node,
                |ctx, _| {
                    ctx[i].forbidden_transit.insert(victim);
                    vec![i]
                },
                &relax,
                &bound_of,
            );
        }
    }

    match incumbent {
        Some((paths, _)) => TotalSolution::from_paths(
            paths,
            if proven {
                SolveStatus::Optimal
            } else {
                SolveStatus::Heuristic
            },
        ),
        None if proven => infeasible(),
        None => {
            // Budget ran out before any feasible assignment was found;
            // feasibility is undetermined, so report everything unrouted
            // without claiming a proof.
            let mut out = infeasible();
            out.status = SolveStatus::Heuristic;
            out
        }
    }
}

/// Clone the parent's state, apply `tighten` (which grows forbidden sets
/// and returns the commodities whose current route just became invalid),
/// re-route exactly those, and push the child — unless some commodity lost
/// its last path, which kills the child.
fn push_child(
    heap: &mut BinaryHeap<SearchNode>,
    seq: &mut u64,
    parent: &SearchNode,
    tighten: impl FnOnce(&mut [CommodityCtx], &[RoutedPath]) -> Vec<usize>,
    relax: &impl Fn(usize, &[CommodityCtx]) -> Option<RoutedPath>,
    bound_of: &impl Fn(&[RoutedPath]) -> f64,
) {
    let mut ctx = parent.ctx.clone();
    let mut routes = parent.routes.clone();
    for i in tighten(&mut ctx, &parent.routes) {
        match relax(i, &ctx) {
            Some(route) => routes[i] = route,
            None => return, // child infeasible
        }
    }
    *seq += 1;
    heap.push(SearchNode {
        lower_bound: bound_of(&routes),
        seq: *seq,
        ctx,
        routes,
    });
}

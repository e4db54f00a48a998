//! Sequential greedy assignment for the multi-commodity problem.
//!
//! Commodities are routed one at a time against a residual graph: links
//! claimed by earlier paths are withdrawn and terminal budgets shrink, so
//! whatever this produces satisfies the disjointness and degree rules by
//! construction. The default order serves the widest-separated ground pair
//! first — the commodity with the fewest routing options. Fast and always
//! safe, but it proves nothing: a commodity left unrouted here may still be
//! routable by a better assignment, which is the exact solver's job to find.

use std::collections::HashSet;

use super::shortest_path::{shortest_route, RouteConstraints};
use super::{fold_total, OptimizerError, RoutingProblem, SolveStatus, TotalSolution};

/// Route all commodities in the default order: descending central angle
/// between the endpoint ground stations, ties by ascending commodity id.
pub fn solve_greedy(problem: &RoutingProblem) -> TotalSolution {
    let order = default_order(problem);
    greedy_in_order(problem, &order)
}

/// Route all commodities in a caller-chosen order, which must name every
/// commodity id exactly once.
pub fn solve_greedy_with_order(
    problem: &RoutingProblem,
    order: &[usize],
) -> Result<TotalSolution, OptimizerError> {
    let mut expected: Vec<usize> = problem.commodities.iter().map(|c| c.id).collect();
    expected.sort_unstable();
    let mut given = order.to_vec();
    given.sort_unstable();
    if expected != given {
        return Err(OptimizerError::InvalidProblem(format!(
            "order {order:?} is not a permutation of the commodity ids"
        )));
    }
    Ok(greedy_in_order(problem, order))
}

/// Commodity ids sorted by descending great-circle separation of their
/// endpoints (central angle as seen from the origin), then ascending id.
fn default_order(problem: &RoutingProblem) -> Vec<usize> {
    let snapshot = problem.snapshot;
    let mut keyed: Vec<(f64, usize)> = problem
        .commodities
        .iter()
        .map(|c| {
            let a = snapshot.position(snapshot.node_index(c.source).unwrap());
            let b = snapshot.position(snapshot.node_index(c.destination).unwrap());
            let dot = (a.x_km * b.x_km + a.y_km * b.y_km + a.z_km * b.z_km)
                / (a.norm_km() * b.norm_km());
            (dot.clamp(-1.0, 1.0).acos(), c.id)
        })
        .collect();
    keyed.sort_by(|l, r| r.0.total_cmp(&l.0).then(l.1.cmp(&r.1)));
    keyed.into_iter().map(|(_, id)| id).collect()
}

fn greedy_in_order(problem: &RoutingProblem, order: &[usize]) -> TotalSolution {
    let snapshot = problem.snapshot;
    let mut used_links: HashSet<(u32, u32)> = HashSet::new();
    let mut degree_used = vec![0u32; snapshot.node_count()];
    let mut paths = Vec::with_capacity(order.len());
    let mut unrouted = Vec::new();

    for &id in order {
        let commodity = problem
            .commodities
            .iter()
            .find(|c| c.id == id)
            .expect("order validated against commodity ids");
        let src = snapshot.node_index(commodity.source).unwrap();
        let dst = snapshot.node_index(commodity.destination).unwrap();
        let constraints = RouteConstraints {
            forbidden_links: Some(&used_links),
            forbidden_transit: None,
            degree_used: Some(&degree_used),
            degree_cap: problem.node_degree_cap,
        };
        match shortest_route(snapshot, src, dst, problem.node_delay_ms, &constraints) {
            Some(route) => {
                for (a, b) in route.links() {
                    used_links.insert((a, b));
                    degree_used[a as usize] += 1;
                    degree_used[b as usize] += 1;
                }
                paths.push(route.into_path_solution(id, snapshot, problem.node_delay_ms));
            }
            None => unrouted.push(id),
        }
    }

    paths.sort_by_key(|p| p.commodity);
    unrouted.sort_unstable();
    let total_latency_ms = fold_total(&paths);
    let status = if unrouted.is_empty() {
        SolveStatus::Heuristic
    } else {
        SolveStatus::Infeasible
    };
    TotalSolution {
        paths,
        unrouted,
        total_latency_ms,
        status,
    }
}

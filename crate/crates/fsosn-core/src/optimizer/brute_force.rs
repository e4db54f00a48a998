//! Exhaustive reference solver for small instances.
//!
//! Enumerates every simple path per commodity, then every compatible
//! combination, keeping the strictly best folded total. No pruning insight,
//! no cleverness — the point is to be obviously correct so the clever
//! solver can be checked against it, total for total, bit for bit. Instance
//! size is hard-capped; anything bigger is refused rather than attempted.

use std::collections::HashSet;

use super::shortest_path::RoutedPath;
use super::{OptimizerError, PathSolution, RoutingProblem, SolveStatus, TotalSolution};
use crate::netgraph::Snapshot;

// Refusal thresholds: beyond these the enumeration stops being "obviously
// finishes" and the oracle loses its reason to exist.
const MAX_SATELLITES: usize = 12;
const MAX_COMMODITIES: usize = 3;
const MAX_PATHS_PER_COMMODITY: usize = 200_000;
const MAX_COMBINATION_STEPS: u64 = 50_000_000;

struct Candidate {
    nodes: Vec<u32>,
    propagation_ms: f64,
    hops: u32,
    latency_ms: f64,
}

impl Candidate {
    fn links(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.nodes
            .windows(2)
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }
}

/// Solve by full enumeration. `Err(SizeLimit)` when the instance exceeds
/// the oracle's envelope; otherwise the exact optimum (or a proof of
/// infeasibility) over edge-disjoint, degree-capped simple paths.
pub fn brute_force_oracle(problem: &RoutingProblem) -> Result<TotalSolution, OptimizerError> {
    let snapshot = problem.snapshot;
    if snapshot.satellite_count() > MAX_SATELLITES {
        return Err(OptimizerError::SizeLimit(format!(
            "{} satellites exceed the oracle envelope of {MAX_SATELLITES}",
            snapshot.satellite_count()
        )));
    }
    let k = problem.commodities.len();
    if k > MAX_COMMODITIES {
        return Err(OptimizerError::SizeLimit(format!(
            "{k} commodities exceed the oracle envelope of {MAX_COMMODITIES}"
        )));
    }
    if k == 0 {
        return Ok(TotalSolution::from_paths(Vec::new(), SolveStatus::Optimal));
    }

    let mut commodities = problem.commodities.clone();
    commodities.sort_by_key(|c| c.id);

    let infeasible = || {
        let mut unrouted: Vec<usize> = commodities.iter().map(|c| c.id).collect();
        unrouted.sort_unstable();
        TotalSolution {
            paths: Vec::new(),
            unrouted,
            total_latency_ms: 0.0,
            status: SolveStatus::Infeasible,
        }
    };

    let mut candidates: Vec<Vec<Candidate>> = Vec::with_capacity(k);
    for commodity in &commodities {
        let src = snapshot.node_index(commodity.source).unwrap();
        let dst = snapshot.node_index(commodity.destination).unwrap();
        let mut found = enumerate_simple_paths(snapshot, src, dst, problem.node_delay_ms)?;
        if found.is_empty() {
            return Ok(infeasible());
        }
        found.sort_by(|a, b| {
            a.latency_ms
                .total_cmp(&b.latency_ms)
                .then(a.hops.cmp(&b.hops))
                .then(a.nodes.cmp(&b.nodes))
        });
        candidates.push(found);
    }
    let minima: Vec<f64> = candidates.iter().map(|c| c[0].latency_ms).collect();

    let mut search = Search {
        problem,
        candidates: &candidates,
        minima: &minima,
        used_links: HashSet::new(),
        degree: vec![0u32; snapshot.node_count()],
        choice: vec![0usize; k],
        best: None,
        steps: 0,
    };
    search.descend(0, 0.0)?;

    match search.best {
        Some((_, choice)) => {
            let paths: Vec<PathSolution> = choice
                .iter()
                .enumerate()
                .map(|(i, &ci)| {
                    let cand = &candidates[i][ci];
                    let route = RoutedPath {
                        nodes: cand.nodes.clone(),
                        propagation_ms: cand.propagation_ms,
                        hops: cand.hops,
                    };
                    route.into_path_solution(commodities[i].id, snapshot, problem.node_delay_ms)
                })
                .collect();
            Ok(TotalSolution::from_paths(paths, SolveStatus::Optimal))
        }
        None => Ok(infeasible()),
    }
}

/// All simple source→destination paths with satellite-only interiors, each
/// costed by the canonical forward fold.
fn enumerate_simple_paths(
    snapshot: &Snapshot,
    src: usize,
    dst: usize,
    node_delay_ms: f64,
) -> Result<Vec<Candidate>, OptimizerError> {
    struct Walker<'s> {
        snapshot: &'s Snapshot,
        dst: usize,
        node_delay_ms: f64,
        visited: Vec<bool>,
        trail: Vec<u32>,
        out: Vec<Candidate>,
    }
    impl Walker<'_> {
        fn step(&mut self, at: usize, prop: f64, hops: u32) -> Result<(), OptimizerError> {
            for arc in self.snapshot.neighbors(at) {
                let next = arc.to as usize;
                if next == self.dst {
                    let mut nodes = self.trail.clone();
                    nodes.push(arc.to);
                    let propagation_ms = prop + arc.latency_ms;
                    self.out.push(Candidate {
                        nodes,
                        propagation_ms,
                        hops,
                        latency_ms: propagation_ms + self.node_delay_ms * hops as f64,
                    });
                    if self.out.len() > MAX_PATHS_PER_COMMODITY {
                        return Err(OptimizerError::SizeLimit(format!(
                            "more than {MAX_PATHS_PER_COMMODITY} paths for one commodity"
                        )));
                    }
                } else if self.snapshot.is_satellite(next) && !self.visited[next] {
                    self.visited[next] = true;
                    self.trail.push(arc.to);
                    self.step(next, prop + arc.latency_ms, hops + 1)?;
                    self.trail.pop();
                    self.visited[next] = false;
                }
            }
            Ok(())
        }
    }

    let mut walker = Walker {
        snapshot,
        dst,
        node_delay_ms,
        visited: vec![false; snapshot.node_count()],
        trail: vec![src as u32],
        out: Vec::new(),
    };
    walker.visited[src] = true;
    walker.step(src, 0.0, 0)?;
    Ok(walker.out)
}

struct Search<'a> {
    problem: &'a RoutingProblem<'a>,
    candidates: &'a [Vec<Candidate>],
    minima: &'a [f64],
    used_links: HashSet<(u32, u32)>,
    degree: Vec<u32>,
    choice: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    steps: u64,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, partial: f64) -> Result<(), OptimizerError> {
        if i == self.candidates.len() {
            if self.best.as_ref().map_or(true, |(t, _)| partial < *t) {
                self.best = Some((partial, self.choice.clone()));
            }
            return Ok(());
        }
        for (ci, cand) in self.candidates[i].iter().enumerate() {
            self.steps += 1;
            if self.steps > MAX_COMBINATION_STEPS {
                return Err(OptimizerError::SizeLimit(format!(
                    "combination search exceeded {MAX_COMBINATION_STEPS} steps"
                )));
            }
            // Candidates are cost-sorted: once this optimistic completion
            // cannot strictly beat the best, no later one can either.
            if let Some((best_total, _)) = &self.best {
                let mut optimistic = partial + cand.latency_ms;
                for &m in &self.minima[i + 1..] {
                    optimistic += m;
                }
                if optimistic >= *best_total {
                    break;
                }
            }
            if !self.compatible(cand) {
                continue;
            }
            self.apply(cand);
            self.choice[i] = ci;
            self.descend(i + 1, partial + cand.latency_ms)?;
            self.unapply(cand);
        }
        Ok(())
    }

    fn compatible(&self, cand: &Candidate) -> bool {
        if cand.links().any(|l| self.used_links.contains(&l)) {
            return false;
        }
        // Terminals this path adds: one per incident link.
        let nodes = &cand.nodes;
        let cap = self.problem.node_degree_cap;
        nodes.iter().enumerate().all(|(pos, &v)| {
            let adds = if pos == 0 || pos == nodes.len() - 1 { 1 } else { 2 };
            self.degree[v as usize] + adds <= cap
        })
    }

    fn apply(&mut self, cand: &Candidate) {
        for (a, b) in cand.links() {
            self.used_links.insert((a, b));
            self.degree[a as usize] += 1;
            self.degree[b as usize] += 1;
        }
    }

    fn unapply(&mut self, cand: &Candidate) {
        for (a, b) in cand.links() {
            self.used_links.remove(&(a, b));
            self.degree[a as usize] -= 1;
            self.degree[b as usize] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::testkit::synthetic_snapshot;
    use crate::netgraph::NodeRef;
    use crate::optimizer::{
        solve_exact, solve_greedy, validate_solution, Commodity,
    };
    use crate::orbital::SatelliteId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sat(slot: u32) -> NodeRef {
        NodeRef::Sat(SatelliteId { plane: 0, slot })
    }

    fn ground(i: u32) -> NodeRef {
        NodeRef::Ground(i)
    }

    fn commodities(pairs: &[(u32, u32)]) -> Vec<Commodity> {
        pairs
            .iter()
            .enumerate()
            .map(|(id, &(s, d))| Commodity {
                id,
                source: ground(s),
                destination: ground(d),
            })
            .collect()
    }

    #[test]
    fn oversized_instances_are_refused() {
        let links: Vec<_> = (0..13u32)
            .map(|s| (ground(0), sat(s), 700.0))
            .chain((0..13u32).map(|s| (sat(s), ground(1), 700.0)))
            .collect();
        let snap = synthetic_snapshot(13, 2, &links);
        let problem = RoutingProblem::new(&snap, commodities(&[(0, 1)])).unwrap();
        assert!(matches!(
            brute_force_oracle(&problem),
            Err(OptimizerError::SizeLimit(_))
        ));

        let snap = synthetic_snapshot(
            1,
            8,
            &(0..8u32).map(|g| (ground(g), sat(0), 700.0)).collect::<Vec<_>>(),
        );
        let problem = RoutingProblem::new(
            &snap,
            commodities(&[(0, 1), (2, 3), (4, 5), (6, 7)]),
        )
        .unwrap();
        assert!(matches!(
            brute_force_oracle(&problem),
            Err(OptimizerError::SizeLimit(_))
        ));
    }

    #[test]
    fn agrees_with_the_exact_solver_on_the_conflict_gadget() {
        let snap = synthetic_snapshot(
            4,
            4,
            &[
                (sat(0), sat(1), 1000.0),
                (ground(0), sat(0), 100.0),
                (sat(1), ground(1), 100.0),
                (ground(0), sat(2), 700.0),
                (sat(2), ground(1), 700.0),
                (ground(2), sat(0), 100.0),
                (sat(1), ground(3), 100.0),
                (ground(2), sat(3), 800.0),
                (sat(3), ground(3), 800.0),
            ],
        );
        let problem =
            RoutingProblem::with_params(&snap, commodities(&[(0, 1), (2, 3)]), 0.0, 4).unwrap();
        let oracle = brute_force_oracle(&problem).unwrap();
        let exact = solve_exact(&problem);
        assert_eq!(oracle.status, SolveStatus::Optimal);
        assert_eq!(oracle.total_latency_ms, exact.total_latency_ms);
        assert_eq!(validate_solution(&problem, &oracle), vec![]);
    }

    #[test]
    fn infeasibility_verdicts_match_the_exact_solver() {
        let snap = synthetic_snapshot(
            1,
            2,
            &[(ground(0), sat(0), 500.0), (sat(0), ground(1), 500.0)],
        );
        let problem = RoutingProblem::new(&snap, commodities(&[(0, 1), (0, 1)])).unwrap();
        let oracle = brute_force_oracle(&problem).unwrap();
        let exact = solve_exact(&problem);
        assert_eq!(oracle.status, SolveStatus::Infeasible);
        assert_eq!(exact.status, SolveStatus::Infeasible);
        assert_eq!(oracle.unrouted, exact.unrouted);
    }

    /// Random small synthetic instances: the branch-and-bound total must
    /// equal the enumerated optimum bit for bit, greedy must never beat it,
    /// and every verdict must agree.
    #[test]
    fn randomized_cross_check_against_the_exact_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut feasible_seen = 0u32;
        let mut infeasible_seen = 0u32;
        for _ in 0..60 {
            let sat_count = rng.gen_range(3..=6u32);
            let mut links = Vec::new();
            for a in 0..sat_count {
                for b in (a + 1)..sat_count {
                    if rng.gen_bool(0.5) {
                        links.push((sat(a), sat(b), rng.gen_range(300.0..3000.0)));
                    }
                }
            }
            for g in 0..4u32 {
                for s in 0..sat_count {
                    if rng.gen_bool(0.55) {
                        links.push((ground(g), sat(s), rng.gen_range(300.0..3000.0)));
                    }
                }
            }
            if links.is_empty() {
                continue;
            }
            let snap = synthetic_snapshot(sat_count, 4, &links);
            let problem =
                RoutingProblem::new(&snap, commodities(&[(0, 1), (2, 3)])).unwrap();

            let oracle = brute_force_oracle(&problem).unwrap();
            let exact = solve_exact(&problem);
            let greedy = solve_greedy(&problem);

            assert_eq!(exact.status, oracle.status, "verdicts diverge");
            match oracle.status {
                SolveStatus::Optimal => {
                    feasible_seen += 1;
                    assert_eq!(
                        exact.total_latency_ms, oracle.total_latency_ms,
                        "exact total must equal the enumerated optimum exactly"
                    );
                    assert_eq!(validate_solution(&problem, &exact), vec![]);
                    assert_eq!(validate_solution(&problem, &oracle), vec![]);
                    if greedy.all_routed() {
                        assert!(
                            greedy.total_latency_ms >= oracle.total_latency_ms,
                            "greedy beat the optimum"
                        );
                    }
                }
                _ => infeasible_seen += 1,
            }
        }
        assert!(feasible_seen >= 10, "too few feasible draws: {feasible_seen}");
        assert!(infeasible_seen >= 1, "no infeasible draws at all");
    }

    #[test]
    fn empty_problem_is_trivially_optimal() {
        let snap = synthetic_snapshot(1, 2, &[(ground(0), sat(0), 500.0)]);
        let problem = RoutingProblem::new(&snap, vec![]).unwrap();
        let solution = brute_force_oracle(&problem).unwrap();
        assert_eq!(solution.status, SolveStatus::Optimal);
        assert_eq!(solution.total_latency_ms, 0.0);
    }
}

//! Grid execution: one routing problem per (range, power, slot) cell.
//!
//! Slots are mutually independent, so they run in parallel; within a slot
//! the expensive part — the candidate-link universe — is built once and
//! re-filtered per cell. Cell results carry everything the reports need,
//! already in canonical order (range ascending, power loosest-first, slot
//! ascending). Per-cell infeasibility is a recorded outcome, not an error:
//! the sweep always completes.

use rayon::prelude::*;

use crate::netgraph::{LinkModel, NodeRef, SnapshotUniverse};
use crate::optimizer::{
    solve_exact, solve_greedy, validate_solution, Commodity, PathSolution, RoutingProblem,
    SolveStatus,
};
use crate::orbital::propagate_constellation;

use super::scenario::{PowerSetting, Scenario, SolverChoice};
use super::StudioError;

/// What `auto` resolved to for this run (one choice for the whole sweep —
/// the instance size doesn't change between cells).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedSolver {
    Exact,
    Greedy,
}

impl std::fmt::Display for ResolvedSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResolvedSolver::Exact => "exact",
            ResolvedSolver::Greedy => "greedy",
        })
    }
}

/// Auto policy: prove optimality when the instance is small enough to do so
/// at desk scale, otherwise fall back to the always-feasible heuristic.
fn resolve_solver(choice: SolverChoice, commodities: usize, satellites: u32) -> ResolvedSolver {
    match choice {
        SolverChoice::Exact => ResolvedSolver::Exact,
        SolverChoice::Greedy => ResolvedSolver::Greedy,
        SolverChoice::Auto => {
            if commodities <= 5 && satellites <= 200 {
                ResolvedSolver::Exact
            } else {
                ResolvedSolver::Greedy
            }
        }
    }
}

/// One solved cell of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub lisl_range_km: f64,
    pub power: PowerSetting,
    pub slot: u32,
    pub time_s: f64,
    pub status: SolveStatus,
    /// Canonical fold of the routed paths' latencies, ms.
    pub total_latency_ms: f64,
    /// Sorted by commodity id; unroutable commodities are absent here.
    pub paths: Vec<PathSolution>,
    pub unrouted: Vec<usize>,
    /// Rendered constraint violations; non-empty means a solver bug.
    pub violations: Vec<String>,
}

impl CellResult {
    pub fn all_routed(&self) -> bool {
        self.unrouted.is_empty()
    }
}

/// A completed sweep, cells in canonical report order.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub scenario_sha256: String,
    pub solver: ResolvedSolver,
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    /// Cells that failed to route every connection.
    pub fn infeasible_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.all_routed()).count()
    }

    pub fn violation_count(&self) -> usize {
        self.cells.iter().map(|c| c.violations.len()).sum()
    }
}

/// Run the full grid for a validated scenario.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepResult, StudioError> {
    scenario.validate()?;
    let spec = scenario.constellation_spec();
    let sites = scenario.ground_sites()?;

    // Ground node indices follow the name-sorted site table, identical in
    // every snapshot of this scenario.
    let mut sorted_names: Vec<&str> = sites.iter().map(|s| s.name.as_str()).collect();
    sorted_names.sort_unstable();
    let ground = |name: &str| {
        let i = sorted_names
            .binary_search(&name)
            .expect("validated connection endpoint");
        NodeRef::Ground(i as u32)
    };
    let commodities: Vec<Commodity> = scenario
        .connections
        .iter()
        .enumerate()
        .map(|(id, c)| Commodity {
            id,
            source: ground(&c.source),
            destination: ground(&c.destination),
        })
        .collect();

    let solver = resolve_solver(scenario.solver, commodities.len(), spec.total_satellites());
    let model = LinkModel::default();
    let ranges = &scenario.sweep.lisl_ranges_km;
    let powers = &scenario.sweep.power_limits_w;
    let max_range = scenario.max_range_km();

    let mut cells: Vec<CellResult> = if ranges.is_empty() || powers.is_empty() {
        Vec::new()
    } else {
        (0..scenario.sweep.slot_count)
            .into_par_iter()
            .map(|slot| -> Result<Vec<CellResult>, StudioError> {
                let time_s = slot as f64 * scenario.sweep.slot_interval_s;
                let positions = propagate_constellation(&spec, time_s);
                let universe =
                    SnapshotUniverse::build(&positions, &sites, &model, max_range, time_s)?;
                let mut out = Vec::with_capacity(ranges.len() * powers.len());
                for &range in ranges {
                    for &power in powers {
                        let snapshot = universe.snapshot(range, power.limit_w())?;
                        let problem = RoutingProblem::new(&snapshot, commodities.clone())?;
                        let solution = match solver {
                            ResolvedSolver::Exact => solve_exact(&problem),
                            ResolvedSolver::Greedy => solve_greedy(&problem),
                        };
                        let violations: Vec<String> = validate_solution(&problem, &solution)
                            .iter()
                            .map(ToString::to_string)
                            .collect();
                        out.push(CellResult {
                            lisl_range_km: range,
                            power,
                            slot,
                            time_s,
                            status: solution.status,
                            total_latency_ms: solution.total_latency_ms,
                            paths: solution.paths,
                            unrouted: solution.unrouted,
                            violations,
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect()
    };

    cells.sort_by(|a, b| {
        a.lisl_range_km
            .total_cmp(&b.lisl_range_km)
            .then(a.power.order(&b.power))
            .then(a.slot.cmp(&b.slot))
    });

    Ok(SweepResult {
        scenario: scenario.clone(),
        scenario_sha256: scenario.sha256_hex(),
        solver,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::node_weighted_shortest_path;
    use crate::studio::scenario::{
        ConnectionConfig, ConstellationConfig, GroundStationConfig, SweepConfig, SCHEMA_VERSION,
    };

    /// A 180-satellite shell and two equatorial stations with generous
    /// slant caps: small enough for the exact solver, dense enough that the
    /// pair always routes at full range.
    fn tiny_scenario() -> Scenario {
        Scenario {
            schema_version: SCHEMA_VERSION,
            solver: SolverChoice::Auto,
            output_dir: None,
            constellation: ConstellationConfig {
                planes: 10,
                satellites_per_plane: 18,
                phasing_factor: 1,
                ..ConstellationConfig::default()
            },
            sweep: SweepConfig {
                lisl_ranges_km: vec![2000.0, 5016.0],
                power_limits_w: vec![PowerSetting::Unlimited, PowerSetting::LimitW(0.5)],
                slot_count: 2,
                slot_interval_s: 1.0,
                ..SweepConfig::default()
            },
            ground_stations: vec![
                GroundStationConfig {
                    name: "A".into(),
                    latitude_deg: 0.0,
                    longitude_deg: 0.0,
                    altitude_km: 0.1,
                    max_slant_range_km: 2500.0,
                },
                GroundStationConfig {
                    name: "B".into(),
                    latitude_deg: 0.0,
                    longitude_deg: 25.0,
                    altitude_km: 0.1,
                    max_slant_range_km: 2500.0,
                },
            ],
            connections: vec![ConnectionConfig {
                source: "A".into(),
                destination: "B".into(),
            }],
        }
    }

    #[test]
    fn auto_policy_thresholds() {
        assert_eq!(
            resolve_solver(SolverChoice::Auto, 5, 200),
            ResolvedSolver::Exact
        );
        assert_eq!(
            resolve_solver(SolverChoice::Auto, 6, 200),
            ResolvedSolver::Greedy
        );
        assert_eq!(
            resolve_solver(SolverChoice::Auto, 5, 201),
            ResolvedSolver::Greedy
        );
        assert_eq!(
            resolve_solver(SolverChoice::Greedy, 1, 10),
            ResolvedSolver::Greedy
        );
        assert_eq!(
            resolve_solver(SolverChoice::Exact, 99, 9999),
            ResolvedSolver::Exact
        );
    }

    #[test]
    fn grid_is_complete_and_canonically_ordered() {
        let scenario = tiny_scenario();
        let result = run_sweep(&scenario).unwrap();
        assert_eq!(result.solver, ResolvedSolver::Exact);
        assert_eq!(result.cells.len(), 2 * 2 * 2);
        let key: Vec<(f64, Option<f64>, u32)> = result
            .cells
            .iter()
            .map(|c| (c.lisl_range_km, c.power.limit_w(), c.slot))
            .collect();
        assert_eq!(
            key,
            vec![
                (2000.0, None, 0),
                (2000.0, None, 1),
                (2000.0, Some(0.5), 0),
                (2000.0, Some(0.5), 1),
                (5016.0, None, 0),
                (5016.0, None, 1),
                (5016.0, Some(0.5), 0),
                (5016.0, Some(0.5), 1),
            ]
        );
        assert_eq!(result.violation_count(), 0);
    }

    #[test]
    fn single_connection_cell_equals_a_direct_shortest_path() {
        let mut scenario = tiny_scenario();
        scenario.sweep.lisl_ranges_km = vec![5016.0];
        scenario.sweep.power_limits_w = vec![PowerSetting::Unlimited];
        scenario.sweep.slot_count = 1;
        let result = run_sweep(&scenario).unwrap();
        assert_eq!(result.cells.len(), 1);
        let cell = &result.cells[0];
        assert!(cell.all_routed(), "unrouted: {:?}", cell.unrouted);
        assert_eq!(cell.status, SolveStatus::Optimal);

        // Rebuild the same snapshot and ask for the one path directly.
        let spec = scenario.constellation_spec();
        let sites = scenario.ground_sites().unwrap();
        let positions = propagate_constellation(&spec, 0.0);
        let universe =
            SnapshotUniverse::build(&positions, &sites, &LinkModel::default(), 5016.0, 0.0)
                .unwrap();
        let snapshot = universe.snapshot(5016.0, None).unwrap();
        let direct = node_weighted_shortest_path(
            &snapshot,
            NodeRef::Ground(0),
            NodeRef::Ground(1),
            10.0,
            None,
        )
        .unwrap()
        .expect("pair is connected at full range");
        assert_eq!(cell.paths[0].latency_ms, direct.latency_ms);
        assert_eq!(cell.paths[0].node_sequence, direct.node_sequence);
        assert_eq!(cell.total_latency_ms, direct.latency_ms);
    }

    #[test]
    fn reruns_are_identical() {
        let scenario = tiny_scenario();
        let first = run_sweep(&scenario).unwrap();
        let second = run_sweep(&scenario).unwrap();
        assert_eq!(first.cells, second.cells);
        assert_eq!(first.scenario_sha256, second.scenario_sha256);
    }

    #[test]
    fn tight_power_limits_disconnect_rather_than_abort() {
        let mut scenario = tiny_scenario();
        scenario.sweep.lisl_ranges_km = vec![2000.0];
        // 1 mW closes nothing: every cell completes as infeasible.
        scenario.sweep.power_limits_w = vec![PowerSetting::LimitW(0.001)];
        scenario.sweep.slot_count = 1;
        let result = run_sweep(&scenario).unwrap();
        assert_eq!(result.cells.len(), 1);
        assert_eq!(result.cells[0].status, SolveStatus::Infeasible);
        assert_eq!(result.infeasible_cells(), 1);
        assert_eq!(result.violation_count(), 0);
    }
}

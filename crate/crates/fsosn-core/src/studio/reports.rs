//! CSV and manifest emission for a completed sweep.
//!
//! Every file is UTF-8 with LF line endings and a single header row;
//! millisecond columns are fixed at six decimals so identical sweeps
//! serialize to identical bytes. Averages are taken only over slots where
//! every connection routed, and the reported average latency is defined as
//! average propagation plus average forwarding delay — the same
//! decomposition each routed path carries exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::netgraph::NodeRef;

use super::sweep::{CellResult, SweepResult};
use super::StudioError;

const PATHS_CSV: &str = "paths.csv";
const TOTAL_LATENCY_CSV: &str = "total_latency.csv";
const CONNECTION_AVERAGES_CSV: &str = "connection_averages.csv";
const TOTAL_AVERAGES_CSV: &str = "total_averages.csv";
const MANIFEST_JSON: &str = "manifest.json";

/// Write the report family for `result` into `out_dir`, creating it if
/// needed. Returns the emitted paths in emission order.
pub fn emit_reports(result: &SweepResult, out_dir: &Path) -> Result<Vec<PathBuf>, StudioError> {
    fs::create_dir_all(out_dir).map_err(|source| StudioError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    // Ground node indices in snapshots follow the name-sorted site table.
    let mut ground_names: Vec<&str> = result
        .scenario
        .ground_stations
        .iter()
        .map(|s| s.name.as_str())
        .collect();
    ground_names.sort_unstable();
    let labels: Vec<String> = result
        .scenario
        .connections
        .iter()
        .map(|c| c.label())
        .collect();

    let files = [
        (PATHS_CSV, paths_csv(result, &ground_names, &labels)),
        (TOTAL_LATENCY_CSV, total_latency_csv(result)),
        (
            CONNECTION_AVERAGES_CSV,
            connection_averages_csv(result, &labels),
        ),
        (TOTAL_AVERAGES_CSV, total_averages_csv(result)),
        (MANIFEST_JSON, manifest_json(result)),
    ];

    let mut written = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = out_dir.join(name);
        fs::write(&path, content).map_err(|source| StudioError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

fn node_label(node: NodeRef, ground_names: &[&str]) -> String {
    match node {
        NodeRef::Sat(id) => id.to_string(),
        NodeRef::Ground(i) => ground_names[i as usize].to_string(),
    }
}

/// One row per routed path per cell; unrouted connections show up as the
/// cell's status and routed count instead.
fn paths_csv(result: &SweepResult, ground_names: &[&str], labels: &[String]) -> String {
    let mut s = String::from(
        "range_km,power_limit_w,slot,connection,status,latency_ms,propagation_ms,node_delay_ms,hops,path\n",
    );
    for cell in &result.cells {
        for p in &cell.paths {
            let path = p
                .node_sequence
                .iter()
                .map(|&n| node_label(n, ground_names))
                .collect::<Vec<_>>()
                .join("|");
            writeln!(
                s,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{},{}",
                cell.lisl_range_km,
                cell.power,
                cell.slot,
                labels[p.commodity],
                cell.status,
                p.latency_ms,
                p.propagation_ms,
                p.node_delay_ms,
                p.hop_count,
                path
            )
            .unwrap();
        }
    }
    s
}

fn total_latency_csv(result: &SweepResult) -> String {
    let mut s =
        String::from("range_km,power_limit_w,slot,solver,status,routed,total_latency_ms\n");
    for cell in &result.cells {
        writeln!(
            s,
            "{},{},{},{},{},{},{:.6}",
            cell.lisl_range_km,
            cell.power,
            cell.slot,
            result.solver,
            cell.status,
            cell.paths.len(),
            cell.total_latency_ms
        )
        .unwrap();
    }
    s
}

/// Consecutive cells sharing (range, power); cells are already in canonical
/// order so each group is a contiguous slot-ascending run.
fn grid_groups(cells: &[CellResult]) -> Vec<&[CellResult]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=cells.len() {
        let boundary = i == cells.len()
            || cells[i].lisl_range_km.to_bits() != cells[start].lisl_range_km.to_bits()
            || cells[i].power != cells[start].power;
        if boundary {
            groups.push(&cells[start..i]);
            start = i;
        }
    }
    groups
}

fn connection_averages_csv(result: &SweepResult, labels: &[String]) -> String {
    let mut s = String::from(
        "range_km,power_limit_w,connection,feasible_slots,avg_latency_ms,avg_propagation_ms,avg_node_delay_ms,avg_hops\n",
    );
    for group in grid_groups(&result.cells) {
        let head = &group[0];
        let feasible: Vec<&CellResult> = group.iter().filter(|c| c.all_routed()).collect();
        let n = feasible.len();
        for (id, label) in labels.iter().enumerate() {
            if n == 0 {
                writeln!(
                    s,
                    "{},{},{},0,,,,",
                    head.lisl_range_km, head.power, label
                )
                .unwrap();
                continue;
            }
            let mut prop = 0.0f64;
            let mut delay = 0.0f64;
            let mut hops = 0usize;
            for cell in &feasible {
                // all_routed ⇒ every commodity has a path, in id order
                let p = &cell.paths[id];
                debug_assert_eq!(p.commodity, id);
                prop += p.propagation_ms;
                delay += p.node_delay_ms;
                hops += p.hop_count;
            }
            let avg_prop = prop / n as f64;
            let avg_delay = delay / n as f64;
            writeln!(
                s,
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
                head.lisl_range_km,
                head.power,
                label,
                n,
                avg_prop + avg_delay,
                avg_prop,
                avg_delay,
                hops as f64 / n as f64
            )
            .unwrap();
        }
    }
    s
}

fn total_averages_csv(result: &SweepResult) -> String {
    let mut s = String::from(
        "range_km,power_limit_w,feasible_slots,avg_total_latency_ms,avg_propagation_ms,avg_node_delay_ms\n",
    );
    for group in grid_groups(&result.cells) {
        let head = &group[0];
        let feasible: Vec<&CellResult> = group.iter().filter(|c| c.all_routed()).collect();
        let n = feasible.len();
        if n == 0 {
            writeln!(s, "{},{},0,,,", head.lisl_range_km, head.power).unwrap();
            continue;
        }
        let mut prop = 0.0f64;
        let mut delay = 0.0f64;
        for cell in &feasible {
            // fold per-path decomposition in commodity order, like the total
            prop += cell.paths.iter().map(|p| p.propagation_ms).sum::<f64>();
            delay += cell.paths.iter().map(|p| p.node_delay_ms).sum::<f64>();
        }
        let avg_prop = prop / n as f64;
        let avg_delay = delay / n as f64;
        writeln!(
            s,
            "{},{},{},{:.6},{:.6},{:.6}",
            head.lisl_range_km,
            head.power,
            n,
            avg_prop + avg_delay,
            avg_prop,
            avg_delay
        )
        .unwrap();
    }
    s
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario_sha256: &'a str,
    crate_version: &'static str,
    solver: String,
    slot_count: u32,
    cell_count: usize,
    feasible_cells: usize,
    infeasible_cells: usize,
    validation_violations: usize,
    statuses: BTreeMap<String, usize>,
    files: [&'static str; 4],
}

fn manifest_json(result: &SweepResult) -> String {
    let mut statuses: BTreeMap<String, usize> = BTreeMap::new();
    for cell in &result.cells {
        *statuses.entry(cell.status.to_string()).or_insert(0) += 1;
    }
    let infeasible = result.infeasible_cells();
    let manifest = Manifest {
        scenario_sha256: &result.scenario_sha256,
        crate_version: env!("CARGO_PKG_VERSION"),
        solver: result.solver.to_string(),
        slot_count: result.scenario.sweep.slot_count,
        cell_count: result.cells.len(),
        feasible_cells: result.cells.len() - infeasible,
        infeasible_cells: infeasible,
        validation_violations: result.violation_count(),
        statuses,
        files: [
            PATHS_CSV,
            TOTAL_LATENCY_CSV,
            CONNECTION_AVERAGES_CSV,
            TOTAL_AVERAGES_CSV,
        ],
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    json
}

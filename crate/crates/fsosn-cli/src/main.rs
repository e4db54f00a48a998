//! `fsosn`: sweep runner, snapshot export, link-budget calculator, and
//! scenario validation.
//!
//! Exit codes: 0 success; 1 invalid input (bad command line, unreadable or
//! invalid scenario, unreachable link geometry); 2 runtime failure;
//! 3 the sweep completed but some cells could not route every connection.

use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};

use fsosn_core::constants::EARTH_RADIUS_KM;
use fsosn_core::linkbudget::{isl_transmit_power_w, updown_transmit_power_w};
use fsosn_core::netgraph::{LinkModel, SnapshotUniverse};
use fsosn_core::orbital::propagate_constellation;
use fsosn_core::studio::{emit_reports, load_scenario, run_sweep, Scenario, StudioError};

#[derive(Parser)]
#[command(
    name = "fsosn",
    version,
    about = "Latency studies over free-space optical satellite networks"
)]
struct Cli {
    /// Directory for output files; overrides the scenario's own output_dir.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Reserved for future stochastic features; affects nothing numeric.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the sweep (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full (range x power x slot) sweep and write the report family.
    Run { scenario: PathBuf },

    /// Export one slot's routing graph as CSV (debug aid).
    ///
    /// The graph is built at the scenario's largest configured range with no
    /// power limit — the most inclusive cell of the grid.
    Snapshot {
        scenario: PathBuf,
        /// Time slot to export; must be below the scenario's slot_count.
        #[arg(long)]
        slot: u32,
    },

    /// Print the transmit power (watts) required to close one link.
    Linkbudget {
        kind: LinkKindArg,
        /// Link length, km. For up/down links the elevation angle is derived
        /// from this slant distance against the default 550 km shell.
        #[arg(long)]
        distance_km: f64,
    },

    /// Parse and validate a scenario file, reporting the first violation.
    Validate { scenario: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkKindArg {
    /// Satellite-to-satellite laser link.
    Isl,
    /// Ground-to-satellite link (either direction).
    Updown,
}

/// An error bundled with the exit code it should produce.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn validation(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }

    fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 2,
            error: error.into(),
        }
    }
}

/// Errors from inside a sweep keep their own validation/runtime split.
fn studio_failure(error: StudioError) -> Failure {
    let code = if error.is_validation() { 1 } else { 2 };
    Failure {
        code,
        error: error.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here as non-errors; everything else
            // is a bad command line, i.e. invalid input.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    if let Some(n) = cli.threads {
        // n = 0 falls back to rayon's own default (all cores).
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::runtime)?;
    }
    let _ = cli.seed; // reserved

    match cli.command {
        Command::Run { scenario } => run_cmd(&scenario, cli.output_dir.as_deref()),
        Command::Snapshot { scenario, slot } => {
            snapshot_cmd(&scenario, slot, cli.output_dir.as_deref())
        }
        Command::Linkbudget { kind, distance_km } => linkbudget_cmd(kind, distance_km),
        Command::Validate { scenario } => validate_cmd(&scenario),
    }
}

/// Load failures are input failures regardless of flavor: an unreadable,
/// unparsable, or invalid scenario file all mean "fix your input".
fn load(path: &Path) -> Result<Scenario, Failure> {
    load_scenario(path).map_err(Failure::validation)
}

fn resolve_output_dir(cli_dir: Option<&Path>, scenario: &Scenario) -> PathBuf {
    cli_dir
        .map(Path::to_path_buf)
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run_cmd(path: &Path, cli_dir: Option<&Path>) -> Result<ExitCode, Failure> {
    let scenario = load(path)?;
    let out_dir = resolve_output_dir(cli_dir, &scenario);
    let result = run_sweep(&scenario).map_err(studio_failure)?;
    let written = emit_reports(&result, &out_dir).map_err(studio_failure)?;

    println!(
        "scenario {} (sha256 {})",
        path.display(),
        &result.scenario_sha256[..16]
    );
    println!("solver {}", result.solver);
    let infeasible = result.infeasible_cells();
    println!(
        "cells {} ({} feasible, {} infeasible)",
        result.cells.len(),
        result.cells.len() - infeasible,
        infeasible
    );
    for p in &written {
        println!("wrote {}", p.display());
    }

    if result.violation_count() > 0 {
        return Err(Failure::runtime(anyhow!(
            "{} constraint violations recorded in the result — solver defect",
            result.violation_count()
        )));
    }
    Ok(if infeasible > 0 {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn snapshot_cmd(path: &Path, slot: u32, cli_dir: Option<&Path>) -> Result<ExitCode, Failure> {
    let scenario = load(path)?;
    if slot >= scenario.sweep.slot_count {
        return Err(Failure::validation(anyhow!(
            "slot {slot} out of range: scenario has {} slots",
            scenario.sweep.slot_count
        )));
    }
    let spec = scenario.constellation_spec();
    let sites = scenario.ground_sites().map_err(studio_failure)?;
    let time_s = f64::from(slot) * scenario.sweep.slot_interval_s;
    let max_range = scenario.max_range_km();
    let positions = propagate_constellation(&spec, time_s);
    let universe =
        SnapshotUniverse::build(&positions, &sites, &LinkModel::default(), max_range, time_s)
            .map_err(Failure::runtime)?;
    let snapshot = universe.snapshot(max_range, None).map_err(Failure::runtime)?;

    let out_dir = resolve_output_dir(cli_dir, &scenario);
    fs::create_dir_all(&out_dir).map_err(Failure::runtime)?;
    let file_path = out_dir.join(format!("snapshot_slot{slot:03}.csv"));
    let file = File::create(&file_path).map_err(Failure::runtime)?;
    let mut writer = BufWriter::new(file);
    snapshot
        .write_edges_csv(&mut writer)
        .and_then(|()| writer.flush())
        .map_err(Failure::runtime)?;

    println!(
        "wrote {} ({} nodes, {} directed arcs at t = {time_s} s, range {max_range} km)",
        file_path.display(),
        snapshot.node_count(),
        snapshot.edges().len() * 2
    );
    Ok(ExitCode::SUCCESS)
}

fn linkbudget_cmd(kind: LinkKindArg, distance_km: f64) -> Result<ExitCode, Failure> {
    let model = LinkModel::default();
    let watts = match kind {
        LinkKindArg::Isl => isl_transmit_power_w(&model.optical, distance_km),
        LinkKindArg::Updown => {
            let elevation = elevation_for_slant(distance_km, &model)?;
            updown_transmit_power_w(&model.optical, &model.atmosphere, distance_km, elevation)
        }
    }
    .map_err(Failure::validation)?;
    println!("{watts:.9}");
    Ok(ExitCode::SUCCESS)
}

/// Elevation angle implied by a slant distance from the default ground
/// altitude to the default 550 km shell, by the law of cosines.
fn elevation_for_slant(distance_km: f64, model: &LinkModel) -> Result<f64, Failure> {
    let r_site = EARTH_RADIUS_KM + model.atmosphere.site_altitude_km;
    let r_sat = EARTH_RADIUS_KM + fsosn_core::orbital::ConstellationSpec::default().altitude_km;
    let min_km = r_sat - r_site;
    let max_km = (r_sat * r_sat - r_site * r_site).sqrt();
    if !(distance_km.is_finite() && distance_km >= min_km && distance_km <= max_km) {
        return Err(Failure::validation(anyhow!(
            "distance_km {distance_km} cannot reach the 550 km shell above the horizon \
             (valid slant range {min_km:.1}..{max_km:.1} km)"
        )));
    }
    let sin_el =
        (r_sat * r_sat - r_site * r_site - distance_km * distance_km) / (2.0 * r_site * distance_km);
    Ok(sin_el.clamp(-1.0, 1.0).asin().to_degrees())
}

fn validate_cmd(path: &Path) -> Result<ExitCode, Failure> {
    let scenario = load(path)?;
    let cells = scenario.sweep.lisl_ranges_km.len()
        * scenario.sweep.power_limits_w.len()
        * scenario.sweep.slot_count as usize;
    let solver = format!("{:?}", scenario.solver).to_lowercase();
    println!(
        "valid: {} stations, {} connections, {} sweep cells, solver {solver}",
        scenario.ground_stations.len(),
        scenario.connections.len(),
        cells
    );
    Ok(ExitCode::SUCCESS)
}

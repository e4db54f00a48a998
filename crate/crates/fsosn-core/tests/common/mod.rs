//! Shared machinery for the acceptance gates: the expensive full-scale
//! sweeps are run once and reused, and the randomized reduced instances both
//! oracle gates draw from live here.

use std::fs;
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fsosn_core::constants::EARTH_RADIUS_KM;
use fsosn_core::netgraph::{NodeRef, SnapshotUniverse};
use fsosn_core::optimizer::Commodity;
use fsosn_core::orbital::{EcefPosition, GroundSite, SatelliteId};
use fsosn_core::studio::{default_scenario, emit_reports, run_sweep, SweepResult};

/// Two independent runs of the full reference sweep plus both emitted file
/// sets, computed once for all gates that need them.
pub struct SweepPair {
    pub first: SweepResult,
    pub second: SweepResult,
    /// (file name, bytes) in emission order, one list per run.
    pub first_files: Vec<(String, Vec<u8>)>,
    pub second_files: Vec<(String, Vec<u8>)>,
}

pub fn shared_sweeps() -> &'static SweepPair {
    static PAIR: OnceLock<SweepPair> = OnceLock::new();
    PAIR.get_or_init(|| {
        let scenario = default_scenario();
        let first = run_sweep(&scenario).expect("reference sweep");
        let second = run_sweep(&scenario).expect("reference sweep");
        let first_files = emit_to_bytes(&first);
        let second_files = emit_to_bytes(&second);
        SweepPair {
            first,
            second,
            first_files,
            second_files,
        }
    })
}

fn emit_to_bytes(result: &SweepResult) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().expect("tempdir");
    emit_reports(result, dir.path())
        .expect("emission")
        .into_iter()
        .map(|path| {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let bytes = fs::read(&path).expect("readback");
            (name, bytes)
        })
        .collect()
}

pub fn spherical_ecef(lat_deg: f64, lon_deg: f64, radius_km: f64) -> EcefPosition {
    let lat = lat_deg.to_radians();
    let lon = lon_deg.to_radians();
    EcefPosition {
        x_km: radius_km * lat.cos() * lon.cos(),
        y_km: radius_km * lat.cos() * lon.sin(),
        z_km: radius_km * lat.sin(),
    }
}

/// One randomized reduced instance: a handful of satellites in a ~14° cap
/// over a couple of nearby ground stations, small enough for the exhaustive
/// oracle yet rich enough to show contention.
pub struct ReducedDraw {
    pub universe: SnapshotUniverse,
    pub commodities: Vec<Commodity>,
    pub range_km: f64,
    pub power_limit_w: Option<f64>,
    pub degree_cap: u32,
}

/// Shared geometry: satellites on the 550 km shell within ±7° of the cap
/// center, stations within ±5°, built into a universe capped at `max_range`.
fn cap_universe(
    rng: &mut ChaCha8Rng,
    sat_count: u32,
    ground_count: usize,
    max_range_km: f64,
) -> SnapshotUniverse {
    let shell = EARTH_RADIUS_KM + 550.0;
    let positions: Vec<(SatelliteId, EcefPosition)> = (0..sat_count)
        .map(|slot| {
            let lat = rng.gen_range(-7.0..7.0);
            let lon = rng.gen_range(-7.0..7.0);
            (SatelliteId { plane: 0, slot }, spherical_ecef(lat, lon, shell))
        })
        .collect();
    // Names already in sorted order, so ground index == site index.
    let names = ["GA", "GB", "GC"];
    let sites: Vec<GroundSite> = (0..ground_count)
        .map(|g| {
            GroundSite::new(
                names[g],
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                0.1,
                rng.gen_range(2000.0..3000.0),
            )
            .expect("valid site")
        })
        .collect();
    SnapshotUniverse::build(
        &positions,
        &sites,
        &fsosn_core::netgraph::LinkModel::default(),
        max_range_km,
        0.0,
    )
    .expect("universe builds")
}

fn draw_commodities(rng: &mut ChaCha8Rng, ground_count: usize, count: usize) -> Vec<Commodity> {
    (0..count)
        .map(|id| loop {
            let a = rng.gen_range(0..ground_count) as u32;
            let b = rng.gen_range(0..ground_count) as u32;
            if a != b {
                break Commodity {
                    id,
                    source: NodeRef::Ground(a),
                    destination: NodeRef::Ground(b),
                };
            }
        })
        .collect()
}

pub fn reduced_instance(rng: &mut ChaCha8Rng) -> ReducedDraw {
    let sat_count = rng.gen_range(6..=12);
    let ground_count = rng.gen_range(2..=3usize);
    let range_km = rng.gen_range(800.0..1800.0);
    let power_limit_w = if rng.gen_bool(0.7) {
        None
    } else {
        Some(rng.gen_range(2.0..10.0))
    };
    let degree_cap = [2u32, 3, 4][rng.gen_range(0..3)];
    let universe = cap_universe(rng, sat_count, ground_count, range_km);
    let commodity_count = rng.gen_range(2..=3usize);
    let commodities = draw_commodities(rng, ground_count, commodity_count);
    ReducedDraw {
        universe,
        commodities,
        range_km,
        power_limit_w,
        degree_cap,
    }
}

/// An instance plus a tighter/looser pair of ranges and power limits for the
/// monotonicity gate. The universe is built at the looser range so both
/// snapshots share identical candidate geometry.
pub struct MonotoneDraw {
    pub universe: SnapshotUniverse,
    pub commodities: Vec<Commodity>,
    pub range_tight_km: f64,
    pub range_loose_km: f64,
    pub power_tight_w: f64,
    pub power_loose_w: Option<f64>,
    pub degree_cap: u32,
}

pub fn monotone_instance(rng: &mut ChaCha8Rng) -> MonotoneDraw {
    let sat_count = rng.gen_range(6..=10);
    let ground_count = rng.gen_range(2..=3usize);
    let range_tight_km = rng.gen_range(800.0..1500.0);
    let range_loose_km = range_tight_km + rng.gen_range(200.0..1000.0);
    let power_tight_w = rng.gen_range(0.4..2.0);
    let power_loose_w = if rng.gen_bool(0.3) {
        None
    } else {
        Some(power_tight_w * rng.gen_range(1.5..4.0))
    };
    let degree_cap = 4;
    let universe = cap_universe(rng, sat_count, ground_count, range_loose_km);
    let commodities = draw_commodities(rng, ground_count, 2);
    MonotoneDraw {
        universe,
        commodities,
        range_tight_km,
        range_loose_km,
        power_tight_w,
        power_loose_w,
        degree_cap,
    }
}

//! Scenario files: what to simulate, swept over what, solved how.
//!
//! A scenario is a TOML document with a `schema_version`, a constellation,
//! ground stations, the connections to route between them, and the sweep
//! grid (LISL ranges × transmit-power settings × time slots). Every section
//! except the stations and connections has defaults matching the reference
//! study, so a minimal file is just a version number, two stations, and one
//! connection. Unknown keys are rejected — a typo should fail loudly, not
//! silently fall back to a default.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::constants::GRAZING_ALTITUDE_KM;
use crate::orbital::{
    max_feasible_lisl_range_km, ConstellationSpec, GroundSite, PhasingMode,
};

use super::StudioError;

/// The one schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// The nine swept LISL ranges of the study, km.
pub const DEFAULT_LISL_RANGES_KM: [f64; 9] = [
    1575.0, 1731.0, 2000.0, 2500.0, 3000.0, 3500.0, 4000.0, 4500.0, 5016.0,
];

/// One cell of the power dimension: either no cap on ISL transmit power, or
/// a cap in watts. In TOML this is the string `"none"` or a number, e.g.
/// `power_limits_w = ["none", 0.5, 0.3, 0.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerSetting {
    Unlimited,
    LimitW(f64),
}

impl PowerSetting {
    pub fn limit_w(&self) -> Option<f64> {
        match self {
            PowerSetting::Unlimited => None,
            PowerSetting::LimitW(w) => Some(*w),
        }
    }

    /// Canonical column order: unlimited first, then descending wattage
    /// (loosest constraint to tightest).
    pub fn order(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PowerSetting::Unlimited, PowerSetting::Unlimited) => Ordering::Equal,
            (PowerSetting::Unlimited, _) => Ordering::Less,
            (_, PowerSetting::Unlimited) => Ordering::Greater,
            (PowerSetting::LimitW(a), PowerSetting::LimitW(b)) => b.total_cmp(a),
        }
    }
}

impl fmt::Display for PowerSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerSetting::Unlimited => f.write_str("none"),
            PowerSetting::LimitW(w) => write!(f, "{w}"),
        }
    }
}

impl Serialize for PowerSetting {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PowerSetting::Unlimited => serializer.serialize_str("none"),
            PowerSetting::LimitW(w) => serializer.serialize_f64(*w),
        }
    }
}

impl<'de> Deserialize<'de> for PowerSetting {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = PowerSetting;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"none\" or a wattage number")
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<Self::Value, E> {
                if s == "none" {
                    Ok(PowerSetting::Unlimited)
                } else {
                    Err(E::custom(format!(
                        "power limit {s:?} is neither \"none\" nor a number"
                    )))
                }
            }
            fn visit_f64<E: serde::de::Error>(self, w: f64) -> Result<Self::Value, E> {
                Ok(PowerSetting::LimitW(w))
            }
            fn visit_i64<E: serde::de::Error>(self, w: i64) -> Result<Self::Value, E> {
                Ok(PowerSetting::LimitW(w as f64))
            }
            fn visit_u64<E: serde::de::Error>(self, w: u64) -> Result<Self::Value, E> {
                Ok(PowerSetting::LimitW(w as f64))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Which solver the sweep runs per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Exact,
    Greedy,
    /// Exact when the instance is small enough to prove optimality at desk
    /// scale (≤ 5 connections and ≤ 200 satellites), greedy otherwise.
    #[default]
    Auto,
}

/// Constellation shell geometry, with the study's Walker 53°:1584/22/17
/// shell as the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstellationConfig {
    pub planes: u32,
    pub satellites_per_plane: u32,
    pub inclination_deg: f64,
    pub altitude_km: f64,
    pub phasing_factor: u32,
    pub phasing: PhasingMode,
    pub epoch_offset_s: f64,
    pub raan_reference_deg: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        let spec = ConstellationSpec::default();
        ConstellationConfig {
            planes: spec.plane_count,
            satellites_per_plane: spec.sats_per_plane,
            inclination_deg: spec.inclination_deg,
            altitude_km: spec.altitude_km,
            phasing_factor: spec.phasing_factor,
            phasing: spec.phasing_mode,
            epoch_offset_s: spec.epoch_offset_s,
            raan_reference_deg: spec.raan_reference_deg,
        }
    }
}

impl ConstellationConfig {
    pub fn to_spec(&self) -> ConstellationSpec {
        ConstellationSpec {
            plane_count: self.planes,
            sats_per_plane: self.satellites_per_plane,
            inclination_deg: self.inclination_deg,
            altitude_km: self.altitude_km,
            phasing_factor: self.phasing_factor,
            phasing_mode: self.phasing,
            epoch_offset_s: self.epoch_offset_s,
            raan_reference_deg: self.raan_reference_deg,
        }
    }
}

/// The sweep grid: every listed range × every power setting × every slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub lisl_ranges_km: Vec<f64>,
    pub power_limits_w: Vec<PowerSetting>,
    pub slot_count: u32,
    pub slot_interval_s: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lisl_ranges_km: DEFAULT_LISL_RANGES_KM.to_vec(),
            power_limits_w: vec![
                PowerSetting::Unlimited,
                PowerSetting::LimitW(0.5),
                PowerSetting::LimitW(0.3),
                PowerSetting::LimitW(0.1),
            ],
            slot_count: 100,
            slot_interval_s: 1.0,
        }
    }
}

/// One ground station. Altitude defaults to 100 m; the slant cap defaults
/// to 1123 km, the range to a 550 km satellite at 25° elevation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStationConfig {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default = "default_site_altitude_km")]
    pub altitude_km: f64,
    #[serde(default = "default_max_slant_range_km")]
    pub max_slant_range_km: f64,
}

fn default_site_altitude_km() -> f64 {
    0.1
}

fn default_max_slant_range_km() -> f64 {
    1123.0
}

impl GroundStationConfig {
    pub fn to_site(&self) -> Result<GroundSite, StudioError> {
        GroundSite::new(
            self.name.clone(),
            self.latitude_deg,
            self.longitude_deg,
            self.altitude_km,
            self.max_slant_range_km,
        )
        .map_err(StudioError::from)
    }
}

/// One demand to route, by station name. Its position in the scenario's
/// list is its commodity id and its column order in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionConfig {
    pub source: String,
    pub destination: String,
}

impl ConnectionConfig {
    /// Report label, e.g. `New York->London`.
    pub fn label(&self) -> String {
        format!("{}->{}", self.source, self.destination)
    }
}

/// A full simulation request. See the module docs for the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub solver: SolverChoice,
    /// Where reports go unless the command line overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub constellation: ConstellationConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub ground_stations: Vec<GroundStationConfig>,
    pub connections: Vec<ConnectionConfig>,
}

impl Scenario {
    pub fn constellation_spec(&self) -> ConstellationSpec {
        self.constellation.to_spec()
    }

    pub fn ground_sites(&self) -> Result<Vec<GroundSite>, StudioError> {
        self.ground_stations.iter().map(|g| g.to_site()).collect()
    }

    /// Largest swept range; the candidate cutoff for a reusable universe.
    pub fn max_range_km(&self) -> f64 {
        self.sweep
            .lisl_ranges_km
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Bring the sweep axes to canonical order: ranges ascending, power
    /// settings unlimited-first then descending, duplicates dropped. Cell
    /// results are order-independent, so this only normalizes presentation.
    pub fn normalize(&mut self) {
        self.sweep.lisl_ranges_km.sort_by(f64::total_cmp);
        self.sweep.lisl_ranges_km.dedup();
        self.sweep.power_limits_w.sort_by(PowerSetting::order);
        self.sweep
            .power_limits_w
            .dedup_by(|a, b| a.order(b) == Ordering::Equal);
    }

    pub fn validate(&self) -> Result<(), StudioError> {
        let bad = |msg: String| Err(StudioError::Scenario(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (this build reads {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let spec = self.constellation_spec();
        spec.validate()?;

        for station in &self.ground_stations {
            if station.name.is_empty() {
                return bad("ground station with an empty name".into());
            }
            if station.name.contains([',', '|', '\n', '\r']) {
                return bad(format!(
                    "ground station name {:?} contains a reserved character (one of , | or a line break)",
                    station.name
                ));
            }
            station.to_site()?;
        }
        let mut names: Vec<&str> = self
            .ground_stations
            .iter()
            .map(|g| g.name.as_str())
            .collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("duplicate ground station name {:?}", w[0]));
        }

        for connection in &self.connections {
            for end in [&connection.source, &connection.destination] {
                if !self.ground_stations.iter().any(|g| &g.name == end) {
                    return bad(format!(
                        "connection {} names unknown ground station {:?}",
                        connection.label(),
                        end
                    ));
                }
            }
            if connection.source == connection.destination {
                return bad(format!(
                    "connection {} starts and ends at the same station",
                    connection.label()
                ));
            }
        }

        let ceiling = max_feasible_lisl_range_km(spec.altitude_km, GRAZING_ALTITUDE_KM)?;
        for &range in &self.sweep.lisl_ranges_km {
            if !(range.is_finite() && range > 0.0) {
                return bad(format!("LISL range {range} km must be positive and finite"));
            }
            if range > ceiling {
                return bad(format!(
                    "LISL range {range} km exceeds the {ceiling:.1} km line-of-sight maximum at {} km altitude",
                    spec.altitude_km
                ));
            }
        }
        for power in &self.sweep.power_limits_w {
            if let PowerSetting::LimitW(w) = power {
                if !(w.is_finite() && *w > 0.0) {
                    return bad(format!("power limit {w} W must be positive and finite"));
                }
            }
        }
        if self.sweep.slot_count < 1 {
            return bad("slot_count must be at least 1".into());
        }
        if !(self.sweep.slot_interval_s.is_finite() && self.sweep.slot_interval_s > 0.0) {
            return bad(format!(
                "slot_interval_s {} must be positive and finite",
                self.sweep.slot_interval_s
            ));
        }
        Ok(())
    }

    /// Content digest for the run manifest: normalized scenarios with equal
    /// content hash equal, anything semantically different hashes apart.
    pub fn sha256_hex(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

/// Parse and fully validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, StudioError> {
    let text = fs::read_to_string(path).map_err(|source| StudioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scenario: Scenario =
        toml::from_str(&text).map_err(|source| StudioError::Parse {
            path: path.to_path_buf(),
            source: Box::new(source),
        })?;
    scenario.normalize();
    scenario.validate()?;
    Ok(scenario)
}

/// The reference study: ten cities, five inter-continental connections,
/// nine ranges, four power settings, one hundred 1 s slots.
pub fn default_scenario() -> Scenario {
    let cities: [(&str, f64, f64); 10] = [
        ("New York", 40.7128, -74.0060),
        ("London", 51.5074, -0.1278),
        ("Cairo", 30.0444, 31.2357),
        ("Tokyo", 35.6762, 139.6503),
        ("Sao Paulo", -23.5505, -46.6333),
        ("Istanbul", 41.0082, 28.9784),
        ("Cape Town", -33.9249, 18.4241),
        ("Sydney", -33.8688, 151.2093),
        ("Mexico City", 19.4326, -99.1332),
        ("Shanghai", 31.2304, 121.4737),
    ];
    let pairs = [
        ("New York", "London"),
        ("Mexico City", "Shanghai"),
        ("Sao Paulo", "Istanbul"),
        ("Cape Town", "Sydney"),
        ("Cairo", "Tokyo"),
    ];
    Scenario {
        schema_version: SCHEMA_VERSION,
        solver: SolverChoice::Auto,
        output_dir: None,
        constellation: ConstellationConfig::default(),
        sweep: SweepConfig::default(),
        ground_stations: cities
            .iter()
            .map(|&(name, lat, lon)| GroundStationConfig {
                name: name.to_string(),
                latitude_deg: lat,
                longitude_deg: lon,
                altitude_km: default_site_altitude_km(),
                max_slant_range_km: default_max_slant_range_km(),
            })
            .collect(),
        connections: pairs
            .iter()
            .map(|&(source, destination)| ConnectionConfig {
                source: source.to_string(),
                destination: destination.to_string(),
            })
            .collect(),
    }
}

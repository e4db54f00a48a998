//! Circular-orbit Walker constellation propagation and ground-site geometry.
//!
//! The Earth is modeled as a rotating sphere. Satellites fly circular
//! Keplerian orbits; no perturbations (J2, drag) are modeled, which is
//! adequate for link-geometry studies over the minutes-long windows this
//! crate sweeps. All positions are expressed in an Earth-centered,
//! Earth-fixed (ECEF) frame so that ground sites are stationary.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{EARTH_RADIUS_KM, EARTH_ROTATION_RAD_S, MU_EARTH_KM3_S2};

/// Errors for constellation and site construction and geometry queries.
#[derive(Debug, Error, PartialEq)]
pub enum OrbitalError {
    #[error("invalid constellation spec: {0}")]
    InvalidSpec(String),
    #[error("invalid ground site {name:?}: {reason}")]
    InvalidSite { name: String, reason: String },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

/// How satellites in adjacent orbital planes are staggered along-track.
///
/// `WholeSlot` quantizes the classic Walker stagger to an integer number of
/// in-plane slots, which is geometrically identical to aligned planes (a
/// whole-slot stagger is just a renumbering). This reproduces the link
/// structure reported for the studied shell: four permanent same-plane
/// neighbors plus one nearest neighbor in each adjacent plane within a
/// ~1575 km range. `Fractional` applies the exact Walker delta offset
/// `phasing_factor * 360 / total_satellites`; for this shell that pushes the
/// worst-case nearest adjacent-plane distance to ~1582 km, which breaks the
/// six-permanent-neighbor property at 1575 km.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhasingMode {
    #[default]
    WholeSlot,
    Fractional,
}

/// A Walker-style shell: `plane_count` evenly spaced planes of
/// `sats_per_plane` satellites at a common altitude and inclination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationSpec {
    pub plane_count: u32,
    pub sats_per_plane: u32,
    pub inclination_deg: f64,
    pub altitude_km: f64,
    /// Walker phasing factor F from the i:T/P/F notation.
    pub phasing_factor: u32,
    /// How the phasing factor maps to an inter-plane stagger; see [`PhasingMode`].
    pub phasing_mode: PhasingMode,
    /// Shifts every satellite along its orbit by this many seconds of motion
    /// without rotating the Earth; a dial for exploring epoch sensitivity.
    pub epoch_offset_s: f64,
    /// Right ascension of plane 0's ascending node at t = 0, degrees.
    pub raan_reference_deg: f64,
}

impl Default for ConstellationSpec {
    /// The 550 km / 53 deg shell studied throughout: 22 planes x 72 satellites,
    /// phasing factor 17.
    fn default() -> Self {
        Self {
            plane_count: 22,
            sats_per_plane: 72,
            inclination_deg: 53.0,
            altitude_km: 550.0,
            phasing_factor: 17,
            phasing_mode: PhasingMode::default(),
            epoch_offset_s: 0.0,
            raan_reference_deg: 0.0,
        }
    }
}

impl ConstellationSpec {
    /// Validates invariants: at least one plane and one satellite per plane,
    /// inclination in [0, 180], altitude positive, phasing factor below the
    /// per-plane satellite count.
    pub fn validate(&self) -> Result<(), OrbitalError> {
        if self.plane_count == 0 {
            return Err(OrbitalError::InvalidSpec("plane_count must be >= 1".into()));
        }
        if self.sats_per_plane == 0 {
            return Err(OrbitalError::InvalidSpec(
                "sats_per_plane must be >= 1".into(),
            ));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(OrbitalError::InvalidSpec(format!(
                "inclination_deg {} outside [0, 180]",
                self.inclination_deg
            )));
        }
        if !self.altitude_km.is_finite() || self.altitude_km <= 0.0 {
            return Err(OrbitalError::InvalidSpec(format!(
                "altitude_km {} must be positive",
                self.altitude_km
            )));
        }
        if self.phasing_factor >= self.sats_per_plane {
            return Err(OrbitalError::InvalidSpec(format!(
                "phasing_factor {} must be < sats_per_plane {}",
                self.phasing_factor, self.sats_per_plane
            )));
        }
        if !self.epoch_offset_s.is_finite() || !self.raan_reference_deg.is_finite() {
            return Err(OrbitalError::InvalidSpec(
                "epoch_offset_s and raan_reference_deg must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn total_satellites(&self) -> u32 {
        self.plane_count * self.sats_per_plane
    }

    /// Orbit radius: Earth radius plus altitude, km.
    pub fn orbit_radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    /// In-plane angular spacing between adjacent satellites, degrees.
    pub fn slot_spacing_deg(&self) -> f64 {
        360.0 / f64::from(self.sats_per_plane)
    }

    /// Along-track stagger between adjacent planes, degrees, per the
    /// configured [`PhasingMode`].
    pub fn inter_plane_phase_deg(&self) -> f64 {
        let walker = f64::from(self.phasing_factor) * 360.0 / f64::from(self.total_satellites());
        match self.phasing_mode {
            PhasingMode::Fractional => walker,
            PhasingMode::WholeSlot => {
                let slot = self.slot_spacing_deg();
                (walker / slot).round() * slot
            }
        }
    }
}

/// Identifies one satellite by orbital plane and in-plane slot.
///
/// Ordering is plane-major, which fixes node ordering everywhere downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatelliteId {
    pub plane: u32,
    pub slot: u32,
}

impl fmt::Display for SatelliteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}.{}", self.plane, self.slot)
    }
}

/// A position in the Earth-centered, Earth-fixed frame, km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcefPosition {
    pub x_km: f64,
    pub y_km: f64,
    pub z_km: f64,
}

impl EcefPosition {
    pub fn norm_km(&self) -> f64 {
        (self.x_km * self.x_km + self.y_km * self.y_km + self.z_km * self.z_km).sqrt()
    }
}

/// An optical ground station on the spherical Earth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSite {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    /// Site altitude above the sphere, km.
    pub altitude_km: f64,
    /// Longest slant range at which the site can close a link to a satellite, km.
    pub max_slant_range_km: f64,
}

impl GroundSite {
    pub fn new(
        name: impl Into<String>,
        latitude_deg: f64,
        longitude_deg: f64,
        altitude_km: f64,
        max_slant_range_km: f64,
    ) -> Result<Self, OrbitalError> {
        let name = name.into();
        let site = GroundSite {
            name,
            latitude_deg,
            longitude_deg,
            altitude_km,
            max_slant_range_km,
        };
        site.validate()?;
        Ok(site)
    }

    pub fn validate(&self) -> Result<(), OrbitalError> {
        let fail = |reason: String| OrbitalError::InvalidSite {
            name: self.name.clone(),
            reason,
        };
        if self.name.is_empty() {
            return Err(fail("name must be non-empty".into()));
        }
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(fail(format!(
                "latitude_deg {} outside [-90, 90]",
                self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(fail(format!(
                "longitude_deg {} outside [-180, 180]",
                self.longitude_deg
            )));
        }
        if !self.altitude_km.is_finite() || self.altitude_km < 0.0 {
            return Err(fail(format!(
                "altitude_km {} must be non-negative",
                self.altitude_km
            )));
        }
        if !self.max_slant_range_km.is_finite() || self.max_slant_range_km <= 0.0 {
            return Err(fail(format!(
                "max_slant_range_km {} must be positive",
                self.max_slant_range_km
            )));
        }
        Ok(())
    }
}

/// Circular orbital period `2 * pi * sqrt(a^3 / mu)`, seconds.
pub fn orbital_period_s(spec: &ConstellationSpec) -> f64 {
    let a = spec.orbit_radius_km();
    std::f64::consts::TAU * (a.powi(3) / MU_EARTH_KM3_S2).sqrt()
}

/// Positions of every satellite in the shell at `time_s` seconds past epoch,
/// sorted plane-major (the natural [`SatelliteId`] order).
///
/// At epoch with a zero RAAN reference, satellite (0, 0) sits on the
/// ascending node of plane 0 at latitude 0, longitude 0.
pub fn propagate_constellation(
    spec: &ConstellationSpec,
    time_s: f64,
) -> Vec<(SatelliteId, EcefPosition)> {
    let radius = spec.orbit_radius_km();
    let mean_motion = std::f64::consts::TAU / orbital_period_s(spec);
    let incl = spec.inclination_deg.to_radians();
    let (sin_i, cos_i) = incl.sin_cos();
    // Earth rotates below the constellation; subtracting the sidereal angle
    // converts inertial positions to ECEF.
    let earth_angle = EARTH_ROTATION_RAD_S * time_s;
    let (sin_g, cos_g) = earth_angle.sin_cos();

    let phase_step = spec.inter_plane_phase_deg().to_radians();
    let slot_step = spec.slot_spacing_deg().to_radians();
    let plane_step = std::f64::consts::TAU / f64::from(spec.plane_count);
    let motion = mean_motion * (time_s + spec.epoch_offset_s);

    let mut out = Vec::with_capacity(spec.total_satellites() as usize);
    for plane in 0..spec.plane_count {
        let raan = spec.raan_reference_deg.to_radians() + f64::from(plane) * plane_step;
        let (sin_raan, cos_raan) = raan.sin_cos();
        let plane_phase = f64::from(plane) * phase_step;
        for slot in 0..spec.sats_per_plane {
            let u = f64::from(slot) * slot_step + plane_phase + motion;
            let (sin_u, cos_u) = u.sin_cos();
            // Orbital plane -> inertial frame.
            let xi = radius * (cos_raan * cos_u - sin_raan * sin_u * cos_i);
            let yi = radius * (sin_raan * cos_u + cos_raan * sin_u * cos_i);
            let zi = radius * (sin_u * sin_i);
            // Inertial -> ECEF.
            let x = xi * cos_g + yi * sin_g;
            let y = -xi * sin_g + yi * cos_g;
            out.push((
                SatelliteId { plane, slot },
                EcefPosition {
                    x_km: x,
                    y_km: y,
                    z_km: zi,
                },
            ));
        }
    }
    out
}

/// ECEF position of a ground site on the spherical Earth.
pub fn ground_to_ecef(site: &GroundSite) -> EcefPosition {
    let r = EARTH_RADIUS_KM + site.altitude_km;
    let lat = site.latitude_deg.to_radians();
    let lon = site.longitude_deg.to_radians();
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    EcefPosition {
        x_km: r * cos_lat * cos_lon,
        y_km: r * cos_lat * sin_lon,
        z_km: r * sin_lat,
    }
}

/// Euclidean distance between two ECEF positions, km.
pub fn slant_range_km(a: &EcefPosition, b: &EcefPosition) -> f64 {
    let dx = a.x_km - b.x_km;
    let dy = a.y_km - b.y_km;
    let dz = a.z_km - b.z_km;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Longest satellite-to-satellite chord at `altitude_km` whose closest
/// approach to the sphere stays at or above `grazing_altitude_km`:
/// `2 * sqrt((Re + alt)^2 - (Re + graze)^2)`.
///
/// Because both endpoints sit at the same altitude, a pair of satellites has
/// line of sight exactly when their separation is at most this value.
pub fn max_feasible_lisl_range_km(
    altitude_km: f64,
    grazing_altitude_km: f64,
) -> Result<f64, OrbitalError> {
    if !altitude_km.is_finite() || altitude_km <= 0.0 {
        return Err(OrbitalError::DegenerateGeometry(format!(
            "altitude_km {altitude_km} must be positive"
        )));
    }
    if !grazing_altitude_km.is_finite() || grazing_altitude_km < 0.0 {
        return Err(OrbitalError::DegenerateGeometry(format!(
            "grazing_altitude_km {grazing_altitude_km} must be non-negative"
        )));
    }
    if grazing_altitude_km > altitude_km {
        return Err(OrbitalError::DegenerateGeometry(format!(
            "grazing altitude {grazing_altitude_km} km above orbit altitude {altitude_km} km"
        )));
    }
    let orbit = EARTH_RADIUS_KM + altitude_km;
    let graze = EARTH_RADIUS_KM + grazing_altitude_km;
    Ok(2.0 * (orbit * orbit - graze * graze).sqrt())
}

/// Elevation of `sat` above the local horizon of `site`, degrees.
///
/// Positive means visible above the horizontal plane, 90 means zenith.
/// Errors if the two positions coincide.
pub fn elevation_angle_deg(
    site: &GroundSite,
    sat: &EcefPosition,
) -> Result<f64, OrbitalError> {
    let site_pos = ground_to_ecef(site);
    elevation_angle_from_ecef_deg(&site_pos, sat)
}

/// Same as [`elevation_angle_deg`] but with the site already in ECEF.
/// The local vertical is the site's radial direction (spherical Earth).
pub fn elevation_angle_from_ecef_deg(
    site_pos: &EcefPosition,
    sat: &EcefPosition,
) -> Result<f64, OrbitalError> {
    let range = slant_range_km(site_pos, sat);
    if range == 0.0 {
        return Err(OrbitalError::DegenerateGeometry(
            "site and satellite positions coincide".into(),
        ));
    }
    let site_norm = site_pos.norm_km();
    if site_norm == 0.0 {
        return Err(OrbitalError::DegenerateGeometry(
            "site at Earth center has no local vertical".into(),
        ));
    }
    let dx = sat.x_km - site_pos.x_km;
    let dy = sat.y_km - site_pos.y_km;
    let dz = sat.z_km - site_pos.z_km;
    let dot = (site_pos.x_km * dx + site_pos.y_km * dy + site_pos.z_km * dz) / site_norm;
    Ok((dot / range).clamp(-1.0, 1.0).asin().to_degrees())
}

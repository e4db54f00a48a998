//! Physical constants shared across the pipeline.
//!
//! All distances are kilometers unless a name says otherwise; angles cross
//! module boundaries in degrees and are converted to radians at the point of
//! use.

/// Earth radius of the spherical Earth model, km.
pub const EARTH_RADIUS_KM: f64 = 6378.14;

/// Geocentric gravitational constant, km^3/s^2.
pub const MU_EARTH_KM3_S2: f64 = 398_600.4418;

/// Earth rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;

/// Speed of light in vacuum, km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Altitude below which a satellite-to-satellite ray is considered blocked
/// by the atmosphere, km. Rays grazing deeper than this suffer refraction
/// and attenuation that the link budget does not model, so links are simply
/// not allowed to dip below it.
pub const GRAZING_ALTITUDE_KM: f64 = 80.0;

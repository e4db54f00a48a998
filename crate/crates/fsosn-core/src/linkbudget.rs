//! Optical transmit-power budgets for laser links.
//!
//! Two chains are modeled. A satellite-to-satellite link sees only free-space
//! spreading; the required transmit power is
//!
//! ```text
//! PT = PR / (etaT * etaR * GT * GR * LT * LR * Lps)
//! ```
//!
//! where `PR` is the receiver sensitivity raised by a link margin,
//! `GT = 16 / divergence^2`, `GR = (D * pi / lambda)^2`, the pointing losses
//! are `exp(-G * theta^2)`, and `Lps = (lambda / (4 pi d))^2`. A ground-to-
//! satellite link (either direction) additionally crosses the atmosphere: a
//! Mie-scattering term that depends on the site altitude and elevation angle,
//! and a geometric cloud-attenuation term integrated along the slant path up
//! to the top of the attenuating layer.
//!
//! Unit conventions are deliberately explicit in every name: wavelengths
//! cross these APIs in nanometers unless the function name says micrometers
//! (the Mie polynomial fits are parameterized in um), distances are
//! kilometers, angles in degrees, powers in watts or dBm as named.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinkBudgetError {
    #[error("invalid optical parameters: {0}")]
    InvalidOptical(String),
    #[error("invalid atmosphere parameters: {0}")]
    InvalidAtmosphere(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which power chain a link uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// Satellite to satellite: free-space spreading only.
    Isl,
    /// Ground to satellite or satellite to ground: adds atmospheric loss and
    /// the larger link margin.
    UpDown,
}

/// Terminal parameters shared by every optical link in the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalParams {
    pub wavelength_nm: f64,
    pub efficiency_tx: f64,
    pub efficiency_rx: f64,
    /// Full transmit divergence angle, radians.
    pub divergence_rad: f64,
    pub receiver_diameter_mm: f64,
    pub pointing_error_tx_rad: f64,
    pub pointing_error_rx_rad: f64,
    /// Receiver sensitivity required to close the link at the design data
    /// rate, dBm.
    pub receiver_sensitivity_dbm: f64,
    pub link_margin_isl_db: f64,
    pub link_margin_updown_db: f64,
    /// Design data rate, Gb/s. Informational: the rate is already priced into
    /// the receiver sensitivity.
    pub data_rate_gbps: f64,
}

impl Default for OpticalParams {
    /// The 1550 nm / 10 Gb/s terminal profile used throughout the study.
    fn default() -> Self {
        Self {
            wavelength_nm: 1550.0,
            efficiency_tx: 0.8,
            efficiency_rx: 0.8,
            divergence_rad: 1.5e-6,
            receiver_diameter_mm: 80.0,
            pointing_error_tx_rad: 1.0e-6,
            pointing_error_rx_rad: 1.0e-6,
            receiver_sensitivity_dbm: -35.5,
            link_margin_isl_db: 3.0,
            link_margin_updown_db: 6.0,
            data_rate_gbps: 10.0,
        }
    }
}

impl OpticalParams {
    pub fn validate(&self) -> Result<(), LinkBudgetError> {
        let fail = |msg: String| Err(LinkBudgetError::InvalidOptical(msg));
        if !(self.wavelength_nm.is_finite() && self.wavelength_nm > 0.0) {
            return fail(format!("wavelength_nm {} must be positive", self.wavelength_nm));
        }
        for (name, v) in [
            ("efficiency_tx", self.efficiency_tx),
            ("efficiency_rx", self.efficiency_rx),
        ] {
            if !(v.is_finite() && 0.0 < v && v <= 1.0) {
                return fail(format!("{name} {v} must be in (0, 1]"));
            }
        }
        for (name, v) in [
            ("divergence_rad", self.divergence_rad),
            ("receiver_diameter_mm", self.receiver_diameter_mm),
            ("data_rate_gbps", self.data_rate_gbps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} {v} must be positive"));
            }
        }
        for (name, v) in [
            ("pointing_error_tx_rad", self.pointing_error_tx_rad),
            ("pointing_error_rx_rad", self.pointing_error_rx_rad),
            ("link_margin_isl_db", self.link_margin_isl_db),
            ("link_margin_updown_db", self.link_margin_updown_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} {v} must be non-negative"));
            }
        }
        if !self.receiver_sensitivity_dbm.is_finite() {
            return fail("receiver_sensitivity_dbm must be finite".into());
        }
        Ok(())
    }

    fn wavelength_m(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }

    /// Wavelength in micrometers, the unit of the Mie extinction fit.
    pub fn wavelength_um(&self) -> f64 {
        self.wavelength_nm * 1e-3
    }
}

/// Cloud and aerosol state along ground-link paths.
///
/// The visibility model multiplies the liquid water content by the droplet
/// number concentration, so only the product of the two matters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtmosphereParams {
    /// Cloud liquid water content, g/m^3.
    pub liquid_water_content_g_m3: f64,
    /// Cloud droplet number concentration, cm^-3.
    pub cloud_number_per_cm3: f64,
    /// Particle-size distribution coefficient in the Kim/Kruse visibility
    /// exponent.
    pub particle_size_coefficient: f64,
    /// Top of the attenuating layer, km. Above this the geometric
    /// cloud-attenuation term stops accumulating.
    pub atmosphere_top_km: f64,
    /// Ground-site altitude, km.
    pub site_altitude_km: f64,
}

impl Default for AtmosphereParams {
    /// Thin-cirrus profile: visibility ~291 km.
    fn default() -> Self {
        Self {
            liquid_water_content_g_m3: 3.128e-4,
            cloud_number_per_cm3: 0.5,
            particle_size_coefficient: 1.6,
            atmosphere_top_km: 20.0,
            site_altitude_km: 0.1,
        }
    }
}

impl AtmosphereParams {
    pub fn validate(&self) -> Result<(), LinkBudgetError> {
        let fail = |msg: String| Err(LinkBudgetError::InvalidAtmosphere(msg));
        if !(self.liquid_water_content_g_m3.is_finite() && self.liquid_water_content_g_m3 > 0.0) {
            return fail(format!(
                "liquid_water_content_g_m3 {} must be positive",
                self.liquid_water_content_g_m3
            ));
        }
        if !(self.cloud_number_per_cm3.is_finite() && self.cloud_number_per_cm3 > 0.0) {
            return fail(format!(
                "cloud_number_per_cm3 {} must be positive",
                self.cloud_number_per_cm3
            ));
        }
        if !self.particle_size_coefficient.is_finite() {
            return fail("particle_size_coefficient must be finite".into());
        }
        if !(self.site_altitude_km.is_finite() && (0.0..=5.0).contains(&self.site_altitude_km)) {
            return fail(format!(
                "site_altitude_km {} must be in [0, 5] (Mie fit domain)",
                self.site_altitude_km
            ));
        }
        if !(self.atmosphere_top_km.is_finite() && self.atmosphere_top_km > self.site_altitude_km)
        {
            return fail(format!(
                "atmosphere_top_km {} must exceed site_altitude_km {}",
                self.atmosphere_top_km, self.site_altitude_km
            ));
        }
        Ok(())
    }
}

/// Transmit antenna gain `16 / divergence^2` for a diffraction-limited beam.
pub fn transmitter_gain(params: &OpticalParams) -> f64 {
    16.0 / (params.divergence_rad * params.divergence_rad)
}

/// Receive aperture gain `(D * pi / lambda)^2`, diameter and wavelength
/// converted to a common length unit first.
pub fn receiver_gain(params: &OpticalParams) -> f64 {
    let d_m = params.receiver_diameter_mm * 1e-3;
    let g = d_m * std::f64::consts::PI / params.wavelength_m();
    g * g
}

/// Pointing loss `exp(-gain * error^2)` for a terminal of the given gain
/// mispointed by `error` radians. Always in (0, 1].
pub fn pointing_loss(gain: f64, pointing_error_rad: f64) -> f64 {
    (-gain * pointing_error_rad * pointing_error_rad).exp()
}

/// Free-space path loss `(lambda / (4 pi d))^2`.
pub fn free_space_path_loss(
    wavelength_nm: f64,
    distance_km: f64,
) -> Result<f64, LinkBudgetError> {
    if !(distance_km.is_finite() && distance_km > 0.0) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "distance_km {distance_km} must be positive"
        )));
    }
    let lambda_m = wavelength_nm * 1e-9;
    let d_m = distance_km * 1e3;
    let ratio = lambda_m / (4.0 * std::f64::consts::PI * d_m);
    Ok(ratio * ratio)
}

/// dBm to watts: `10^((dbm - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm. Requires `watts > 0`.
pub fn watts_to_dbm(watts: f64) -> f64 {
    debug_assert!(watts > 0.0, "watts_to_dbm requires positive power");
    10.0 * watts.log10() + 30.0
}

/// Power that must arrive at the receiver: sensitivity raised by the link
/// margin, converted to watts.
pub fn received_power_w(sensitivity_dbm: f64, link_margin_db: f64) -> f64 {
    dbm_to_watts(sensitivity_dbm + link_margin_db)
}

/// Transmit power needed to close a satellite-to-satellite link of the given
/// length.
pub fn isl_transmit_power_w(
    params: &OpticalParams,
    distance_km: f64,
) -> Result<f64, LinkBudgetError> {
    params.validate()?;
    let pr = received_power_w(params.receiver_sensitivity_dbm, params.link_margin_isl_db);
    let denom = params.efficiency_tx
        * params.efficiency_rx
        * transmitter_gain(params)
        * receiver_gain(params)
        * pointing_loss(transmitter_gain(params), params.pointing_error_tx_rad)
        * pointing_loss(receiver_gain(params), params.pointing_error_rx_rad)
        * free_space_path_loss(params.wavelength_nm, distance_km)?;
    Ok(pr / denom)
}

/// Coefficients (a, b, c, d) of the cubic Mie extinction fit at the given
/// wavelength in micrometers.
pub fn mie_coefficients(wavelength_um: f64) -> (f64, f64, f64, f64) {
    let l = wavelength_um;
    let a = -0.000_545 * l * l + 0.002 * l - 0.0038;
    let b = 0.006_28 * l * l - 0.0232 * l + 0.004_39;
    let c = -0.028 * l * l + 0.101 * l - 0.18;
    let d = -0.228 * l * l * l + 0.922 * l * l - 1.26 * l + 0.719;
    (a, b, c, d)
}

/// Mie extinction ratio `rho = a*h^3 + b*h^2 + c*h + d` for a site at
/// altitude `site_altitude_km`.
///
/// The wavelength is in MICROMETERS here (the polynomial fits are
/// parameterized that way); passing nanometers is rejected loudly rather
/// than silently extrapolating the fit three orders of magnitude out.
///
/// The cubic fit was calibrated for low-altitude sites and dips below zero
/// past roughly 1.1 km; since negative extinction is unphysical, the result
/// is clamped at zero (no scattering) there.
pub fn mie_extinction_ratio(
    wavelength_um: f64,
    site_altitude_km: f64,
) -> Result<f64, LinkBudgetError> {
    if !(0.3..=3.0).contains(&wavelength_um) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "wavelength_um {wavelength_um} outside the fit domain [0.3, 3.0] um \
             (did you pass nanometers?)"
        )));
    }
    if !(site_altitude_km.is_finite() && (0.0..=5.0).contains(&site_altitude_km)) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "site_altitude_km {site_altitude_km} outside [0, 5]"
        )));
    }
    let (a, b, c, d) = mie_coefficients(wavelength_um);
    let h = site_altitude_km;
    Ok((a * h * h * h + b * h * h + c * h + d).max(0.0))
}

/// Mie scattering transmission `exp(-rho / sin(elevation))` along a slant
/// path at the given elevation angle. Elevation must be in (0, 90] degrees.
pub fn mie_loss(extinction_ratio: f64, elevation_deg: f64) -> Result<f64, LinkBudgetError> {
    check_elevation(elevation_deg)?;
    if !(extinction_ratio.is_finite() && extinction_ratio >= 0.0) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "extinction_ratio {extinction_ratio} must be non-negative"
        )));
    }
    Ok((-extinction_ratio / elevation_deg.to_radians().sin()).exp())
}

/// Atmospheric visibility `1.002 / (LW * N)^0.6473`, km.
pub fn visibility_km(atm: &AtmosphereParams) -> Result<f64, LinkBudgetError> {
    atm.validate()?;
    let product = atm.liquid_water_content_g_m3 * atm.cloud_number_per_cm3;
    Ok(1.002 / product.powf(0.6473))
}

/// Cloud attenuation coefficient `(3.91 / V) * (lambda_nm / 550)^-phi`,
/// km^-1. Wavelength in NANOMETERS with the 550 nm visible reference.
pub fn attenuation_coeff_per_km(
    visibility_km: f64,
    wavelength_nm: f64,
    particle_size_coefficient: f64,
) -> Result<f64, LinkBudgetError> {
    if !(visibility_km.is_finite() && visibility_km > 0.0) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "visibility_km {visibility_km} must be positive"
        )));
    }
    if !(wavelength_nm.is_finite() && wavelength_nm > 0.0) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "wavelength_nm {wavelength_nm} must be positive"
        )));
    }
    if !particle_size_coefficient.is_finite() {
        return Err(LinkBudgetError::InvalidInput(
            "particle_size_coefficient must be finite".into(),
        ));
    }
    Ok(3.91 / visibility_km * (wavelength_nm / 550.0).powf(-particle_size_coefficient))
}

/// Geometric cloud attenuation `exp(-theta_A * d_A)` where
/// `d_A = (top - site) / sin(elevation)` is the slant path length through the
/// attenuating layer.
pub fn geometric_loss(
    attenuation_per_km: f64,
    atm: &AtmosphereParams,
    elevation_deg: f64,
) -> Result<f64, LinkBudgetError> {
    atm.validate()?;
    check_elevation(elevation_deg)?;
    if !(attenuation_per_km.is_finite() && attenuation_per_km >= 0.0) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "attenuation_per_km {attenuation_per_km} must be non-negative"
        )));
    }
    let slant = (atm.atmosphere_top_km - atm.site_altitude_km)
        / elevation_deg.to_radians().sin();
    Ok((-attenuation_per_km * slant).exp())
}

/// Combined atmospheric transmission for a ground link at the given
/// elevation: Mie scattering times geometric cloud attenuation. In (0, 1],
/// largest (least lossy) at zenith.
pub fn atmospheric_loss(
    optical: &OpticalParams,
    atm: &AtmosphereParams,
    elevation_deg: f64,
) -> Result<f64, LinkBudgetError> {
    optical.validate()?;
    let rho = mie_extinction_ratio(optical.wavelength_um(), atm.site_altitude_km)?;
    let mie = mie_loss(rho, elevation_deg)?;
    let theta_a = attenuation_coeff_per_km(
        visibility_km(atm)?,
        optical.wavelength_nm,
        atm.particle_size_coefficient,
    )?;
    let geom = geometric_loss(theta_a, atm, elevation_deg)?;
    Ok(mie * geom)
}

/// Transmit power needed to close a ground link (either direction) of the
/// given slant length at the given elevation angle.
pub fn updown_transmit_power_w(
    optical: &OpticalParams,
    atm: &AtmosphereParams,
    distance_km: f64,
    elevation_deg: f64,
) -> Result<f64, LinkBudgetError> {
    optical.validate()?;
    let pr = received_power_w(
        optical.receiver_sensitivity_dbm,
        optical.link_margin_updown_db,
    );
    let denom = optical.efficiency_tx
        * optical.efficiency_rx
        * transmitter_gain(optical)
        * receiver_gain(optical)
        * pointing_loss(transmitter_gain(optical), optical.pointing_error_tx_rad)
        * pointing_loss(receiver_gain(optical), optical.pointing_error_rx_rad)
        * atmospheric_loss(optical, atm, elevation_deg)?
        * free_space_path_loss(optical.wavelength_nm, distance_km)?;
    Ok(pr / denom)
}

/// Longest link that stays within a transmit-power limit.
///
/// Both chains scale as distance squared, so the bound inverts in closed
/// form: `d = sqrt(limit / PT(1 km))`. For [`LinkKind::UpDown`] the elevation
/// angle must be supplied since atmospheric loss does not depend on distance
/// but does gate the 1 km reference power.
pub fn max_link_distance_km(
    power_limit_w: f64,
    kind: LinkKind,
    optical: &OpticalParams,
    atm: &AtmosphereParams,
    elevation_deg: Option<f64>,
) -> Result<f64, LinkBudgetError> {
    if !(power_limit_w.is_finite() && power_limit_w > 0.0) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "power_limit_w {power_limit_w} must be positive"
        )));
    }
    let reference = match kind {
        LinkKind::Isl => isl_transmit_power_w(optical, 1.0)?,
        LinkKind::UpDown => {
            let elevation = elevation_deg.ok_or_else(|| {
                LinkBudgetError::InvalidInput(
                    "max_link_distance_km for an up/down link needs an elevation angle".into(),
                )
            })?;
            updown_transmit_power_w(optical, atm, 1.0, elevation)?
        }
    };
    Ok((power_limit_w / reference).sqrt())
}

fn check_elevation(elevation_deg: f64) -> Result<(), LinkBudgetError> {
    if !(elevation_deg.is_finite() && 0.0 < elevation_deg && elevation_deg <= 90.0) {
        return Err(LinkBudgetError::InvalidInput(format!(
            "elevation_deg {elevation_deg} must be in (0, 90]"
        )));
    }
    Ok(())
}

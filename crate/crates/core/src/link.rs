//! GV <-> HAP radio link: path loss, SNR, Shannon rate and per-frame delays.
//!
//! Configuration values are in the dB domain; everything here works in
//! linear SI units and bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used for propagation delays and free-space loss, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// One direction of the radio link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkParams {
    /// Effective isotropic radiated power, dBW.
    pub eirp_dbw: f64,
    /// Receiver antenna-gain-to-noise-temperature, dB/K.
    pub g_over_t_dbk: f64,
    pub carrier_frequency_hz: f64,
    /// Total channel bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Atmospheric and other losses on top of free space, dB.
    pub excess_loss_db: f64,
    /// Bits carried per frame in this direction.
    pub payload_bits: f64,
}

impl LinkParams {
    /// Uplink defaults: 1 Mb frames at 38 GHz over 400 MHz.
    pub fn default_uplink() -> Self {
        Self {
            eirp_dbw: 14.0,
            g_over_t_dbk: 7.0,
            payload_bits: 1e6,
            ..Self::common()
        }
    }

    /// Downlink defaults: 100 kb detection results.
    pub fn default_downlink() -> Self {
        Self {
            eirp_dbw: 20.0,
            g_over_t_dbk: 3.0,
            payload_bits: 1e5,
            ..Self::common()
        }
    }

    fn common() -> Self {
        Self {
            eirp_dbw: 0.0,
            g_over_t_dbk: 0.0,
            carrier_frequency_hz: 38e9,
            bandwidth_hz: 400e6,
            excess_loss_db: 0.0,
            payload_bits: 0.0,
        }
    }

    /// Same link restricted to `bandwidth_hz`.
    pub fn with_bandwidth(&self, bandwidth_hz: f64) -> Self {
        Self {
            bandwidth_hz,
            ..self.clone()
        }
    }
}

impl Default for LinkParams {
    fn default() -> Self {
        Self::default_uplink()
    }
}

/// HAP altitude and the area of interest it serves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub hap_altitude_m: f64,
    pub aoi_area_m2: f64,
    /// Ground distance of the representative GV from the HAP nadir.
    /// When absent, the median distance over the area is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gv_radial_distance_m: Option<f64>,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            hap_altitude_m: 20e3,
            aoi_area_m2: 1e9,
            gv_radial_distance_m: None,
        }
    }
}

/// Derived per-frame figures for one link direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    /// Linear SNR.
    pub snr: f64,
    /// Shannon rate, bit/s.
    pub rate: f64,
    /// Time to push one payload through the link, s.
    pub transmission_time: f64,
    /// One-way propagation delay, s.
    pub propagation_delay: f64,
}

/// Free-space loss in dB, `20 log10(4 pi d f / c)`.
pub fn free_space_path_loss_db(carrier_frequency_hz: f64, distance_m: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * distance_m * carrier_frequency_hz / SPEED_OF_LIGHT).log10()
}

/// Linear path loss: free space plus a flat excess loss.
pub fn path_loss(carrier_frequency_hz: f64, distance_m: f64, excess_loss_db: f64) -> f64 {
    db_to_linear(free_space_path_loss_db(carrier_frequency_hz, distance_m) + excess_loss_db)
}

/// `EIRP * (G/T) / (PL * k * B)` with the link's own bandwidth as noise bandwidth.
pub fn snr(link: &LinkParams, path_loss: f64) -> f64 {
    db_to_linear(link.eirp_dbw) * db_to_linear(link.g_over_t_dbk)
        / (path_loss * BOLTZMANN * link.bandwidth_hz)
}

/// Shannon capacity `B log2(1 + snr)`, bit/s.
pub fn capacity(snr: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2
}

pub fn transmission_time(payload_bits: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::ZeroRate);
    }
    Ok(payload_bits / rate)
}

pub fn propagation_delay(distance_m: f64) -> f64 {
    distance_m / SPEED_OF_LIGHT
}

/// Slant range to the representative GV.
///
/// The area is a disk centred under the HAP. A uniform point in a disk of
/// area `A` has median radius `sqrt(A / (2 pi))`.
pub fn median_slant_distance(geometry: &Geometry) -> f64 {
    let radial = geometry
        .gv_radial_distance_m
        .unwrap_or_else(|| (geometry.aoi_area_m2 / (2.0 * std::f64::consts::PI)).sqrt());
    geometry.hap_altitude_m.hypot(radial)
}

/// SNR, rate and delays for `link` over `distance_m`.
pub fn evaluate_link(link: &LinkParams, distance_m: f64) -> Result<LinkMetrics> {
    let pl = path_loss(link.carrier_frequency_hz, distance_m, link.excess_loss_db);
    let snr = snr(link, pl);
    let rate = capacity(snr, link.bandwidth_hz);
    Ok(LinkMetrics {
        snr,
        rate,
        transmission_time: transmission_time(link.payload_bits, rate)?,
        propagation_delay: propagation_delay(distance_m),
    })
}

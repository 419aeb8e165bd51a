//! Scenario description and its TOML configuration file.
//!
//! Every key is optional in the file; omitted keys take the defaults of
//! [`ScenarioConfig::default`]. Units are fixed: Hz, bits, FLOP, FLOP/s,
//! seconds, metres and dB for radio gains and losses.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latency::ComputeProfile;
use crate::link::{evaluate_link, median_slant_distance, Geometry, LinkMetrics, LinkParams};
use crate::queueing::QueueSpec;

/// Which GVs split the channel bandwidth among themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthSharing {
    /// Static split over all `n` GVs.
    #[default]
    AllVehicles,
    /// Split over the expected number of offloading GVs, `max(1, eta n)`.
    OffloadingVehicles,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadioConfig {
    pub bandwidth_sharing: BandwidthSharing,
    pub uplink: LinkParams,
    pub downlink: LinkParams,
}

/// Full system description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of GVs, `n`.
    pub gv_count: u32,
    /// Frames per second generated by each GV, `r`.
    pub frame_rate: f64,
    /// Per-frame deadline; `1 / r` when unset.
    pub deadline: Option<f64>,
    pub compute: ComputeProfile,
    pub radio: RadioConfig,
    pub geometry: Geometry,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            gv_count: 100,
            frame_rate: 10.0,
            deadline: None,
            compute: ComputeProfile::default(),
            radio: RadioConfig {
                bandwidth_sharing: BandwidthSharing::AllVehicles,
                uplink: LinkParams::default_uplink(),
                downlink: LinkParams::default_downlink(),
            },
            geometry: Geometry::default(),
        }
    }
}

/// Link figures for both directions at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommDelays {
    pub uplink: LinkMetrics,
    pub downlink: LinkMetrics,
    pub slant_distance: f64,
}

impl CommDelays {
    /// `2 tau_p`.
    pub fn round_trip_propagation(&self) -> f64 {
        self.uplink.propagation_delay + self.downlink.propagation_delay
    }

    /// `t_UL + t_DL + 2 tau_p`.
    pub fn total(&self) -> f64 {
        self.uplink.transmission_time + self.downlink.transmission_time + self.round_trip_propagation()
    }
}

impl ScenarioConfig {
    /// `t_max`, defaulting to one frame period.
    pub fn deadline(&self) -> f64 {
        self.deadline.unwrap_or(1.0 / self.frame_rate)
    }

    /// Local queue at one GV: `lambda = (1 - eta) r`.
    pub fn gv_queue(&self, eta: f64) -> Result<QueueSpec> {
        QueueSpec::new((1.0 - eta) * self.frame_rate, self.compute.gv_service_time(), 1)
    }

    /// Shared HAP queue: `lambda = eta r n`.
    pub fn hap_queue(&self, eta: f64) -> Result<QueueSpec> {
        QueueSpec::new(
            eta * self.frame_rate * f64::from(self.gv_count),
            self.compute.hap_service_time(),
            self.compute.hap_servers,
        )
    }

    /// Offered traffic at one GV.
    pub fn gv_offered_traffic(&self, eta: f64) -> f64 {
        (1.0 - eta) * self.frame_rate * self.compute.gv_service_time()
    }

    /// Offered traffic at the HAP.
    pub fn hap_offered_traffic(&self, eta: f64) -> f64 {
        eta * self.frame_rate * f64::from(self.gv_count) * self.compute.hap_service_time()
    }

    /// Number of GVs the channel bandwidth is divided among.
    pub fn bandwidth_sharers(&self, eta: f64) -> f64 {
        match self.radio.bandwidth_sharing {
            BandwidthSharing::AllVehicles => f64::from(self.gv_count),
            BandwidthSharing::OffloadingVehicles => (eta * f64::from(self.gv_count)).max(1.0),
        }
    }

    /// Uplink and downlink figures for the representative GV.
    pub fn comm_delays(&self, eta: f64) -> Result<CommDelays> {
        let distance = median_slant_distance(&self.geometry);
        let sharers = self.bandwidth_sharers(eta);
        let up = &self.radio.uplink;
        let down = &self.radio.downlink;
        Ok(CommDelays {
            uplink: evaluate_link(&up.with_bandwidth(up.bandwidth_hz / sharers), distance)?,
            downlink: evaluate_link(&down.with_bandwidth(down.bandwidth_hz / sharers), distance)?,
            slant_distance: distance,
        })
    }

    /// Checks every field, naming the first offending key.
    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("must be a finite number > 0, got {v}")))
            }
        }
        fn non_negative(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("must be a finite number >= 0, got {v}")))
            }
        }
        fn finite(key: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be finite, got {v}")))
            }
        }

        if self.gv_count == 0 {
            return Err(invalid("gv_count", "must be >= 1".into()));
        }
        positive("frame_rate", self.frame_rate)?;
        if let Some(d) = self.deadline {
            positive("deadline", d)?;
        }
        positive("compute.frame_load", self.compute.frame_load)?;
        positive("compute.gv_capacity", self.compute.gv_capacity)?;
        positive("compute.hap_capacity", self.compute.hap_capacity)?;
        if self.compute.hap_servers == 0 {
            return Err(invalid("compute.hap_servers", "must be >= 1".into()));
        }
        for (dir, link) in [("uplink", &self.radio.uplink), ("downlink", &self.radio.downlink)] {
            finite(&format!("radio.{dir}.eirp_dbw"), link.eirp_dbw)?;
            finite(&format!("radio.{dir}.g_over_t_dbk"), link.g_over_t_dbk)?;
            positive(&format!("radio.{dir}.carrier_frequency_hz"), link.carrier_frequency_hz)?;
            positive(&format!("radio.{dir}.bandwidth_hz"), link.bandwidth_hz)?;
            non_negative(&format!("radio.{dir}.excess_loss_db"), link.excess_loss_db)?;
            positive(&format!("radio.{dir}.payload_bits"), link.payload_bits)?;
        }
        positive("geometry.hap_altitude_m", self.geometry.hap_altitude_m)?;
        positive("geometry.aoi_area_m2", self.geometry.aoi_area_m2)?;
        if let Some(rho) = self.geometry.gv_radial_distance_m {
            non_negative("geometry.gv_radial_distance_m", rho)?;
        }
        Ok(())
    }
}

fn invalid(key: &str, constraint: String) -> Error {
    Error::Validation {
        key: key.to_string(),
        constraint,
    }
}

// On-disk layout. Every field is optional so partial files overlay the
// defaults section by section.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    gv_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deadline: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compute: Option<ComputeFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radio: Option<RadioFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geometry: Option<GeometryFile>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComputeFile {
    frame_load: Option<f64>,
    gv_capacity: Option<f64>,
    hap_capacity: Option<f64>,
    hap_servers: Option<u32>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_sharing: Option<BandwidthSharing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uplink: Option<LinkFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    downlink: Option<LinkFile>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    eirp_dbw: Option<f64>,
    g_over_t_dbk: Option<f64>,
    carrier_frequency_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    excess_loss_db: Option<f64>,
    payload_bits: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    hap_altitude_m: Option<f64>,
    aoi_area_m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gv_radial_distance_m: Option<f64>,
}

fn overlay<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

impl LinkFile {
    fn apply(self, link: &mut LinkParams) {
        overlay(&mut link.eirp_dbw, self.eirp_dbw);
        overlay(&mut link.g_over_t_dbk, self.g_over_t_dbk);
        overlay(&mut link.carrier_frequency_hz, self.carrier_frequency_hz);
        overlay(&mut link.bandwidth_hz, self.bandwidth_hz);
        overlay(&mut link.excess_loss_db, self.excess_loss_db);
        overlay(&mut link.payload_bits, self.payload_bits);
    }

    fn from_params(link: &LinkParams) -> Self {
        Self {
            eirp_dbw: Some(link.eirp_dbw),
            g_over_t_dbk: Some(link.g_over_t_dbk),
            carrier_frequency_hz: Some(link.carrier_frequency_hz),
            bandwidth_hz: Some(link.bandwidth_hz),
            excess_loss_db: Some(link.excess_loss_db),
            payload_bits: Some(link.payload_bits),
        }
    }
}

impl ScenarioFile {
    fn into_config(self) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        overlay(&mut cfg.gv_count, self.gv_count);
        overlay(&mut cfg.frame_rate, self.frame_rate);
        cfg.deadline = self.deadline;
        if let Some(c) = self.compute {
            overlay(&mut cfg.compute.frame_load, c.frame_load);
            overlay(&mut cfg.compute.gv_capacity, c.gv_capacity);
            overlay(&mut cfg.compute.hap_capacity, c.hap_capacity);
            overlay(&mut cfg.compute.hap_servers, c.hap_servers);
        }
        if let Some(r) = self.radio {
            overlay(&mut cfg.radio.bandwidth_sharing, r.bandwidth_sharing);
            if let Some(up) = r.uplink {
                up.apply(&mut cfg.radio.uplink);
            }
            if let Some(down) = r.downlink {
                down.apply(&mut cfg.radio.downlink);
            }
        }
        if let Some(g) = self.geometry {
            overlay(&mut cfg.geometry.hap_altitude_m, g.hap_altitude_m);
            overlay(&mut cfg.geometry.aoi_area_m2, g.aoi_area_m2);
            cfg.geometry.gv_radial_distance_m = g.gv_radial_distance_m;
        }
        cfg
    }

    fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            gv_count: Some(cfg.gv_count),
            frame_rate: Some(cfg.frame_rate),
            deadline: cfg.deadline,
            compute: Some(ComputeFile {
                frame_load: Some(cfg.compute.frame_load),
                gv_capacity: Some(cfg.compute.gv_capacity),
                hap_capacity: Some(cfg.compute.hap_capacity),
                hap_servers: Some(cfg.compute.hap_servers),
            }),
            radio: Some(RadioFile {
                bandwidth_sharing: Some(cfg.radio.bandwidth_sharing),
                uplink: Some(LinkFile::from_params(&cfg.radio.uplink)),
                downlink: Some(LinkFile::from_params(&cfg.radio.downlink)),
            }),
            geometry: Some(GeometryFile {
                hap_altitude_m: Some(cfg.geometry.hap_altitude_m),
                aoi_area_m2: Some(cfg.geometry.aoi_area_m2),
                gv_radial_distance_m: cfg.geometry.gv_radial_distance_m,
            }),
        }
    }
}

/// Parses and validates a scenario from TOML text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let cfg = file.into_config();
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Renders a scenario with every key spelled out.
pub fn write_config(cfg: &ScenarioConfig) -> String {
    toml::to_string(&ScenarioFile::from_config(cfg)).expect("scenario file serializes to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.gv_count, 100);
        assert_eq!(cfg.frame_rate, 10.0);
        assert_eq!(cfg.compute.frame_load, 60e9);
        assert_eq!(cfg.compute.gv_capacity, 800e9);
        assert_eq!(cfg.compute.hap_capacity, 3000e9);
        assert_eq!(cfg.compute.hap_servers, 15);
        assert_eq!(cfg.radio.uplink.payload_bits, 1e6);
        assert_eq!(cfg.radio.downlink.payload_bits, 1e5);
        assert_eq!(cfg.radio.uplink.carrier_frequency_hz, 38e9);
        assert_eq!(cfg.radio.uplink.bandwidth_hz, 400e6);
        assert_eq!(cfg.geometry.aoi_area_m2, 1e9);
        assert_eq!(cfg.geometry.hap_altitude_m, 20e3);
        assert!((cfg.deadline() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_rate_is_rejected_by_key() {
        match parse_config("frame_rate = 0.0") {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "frame_rate"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg = parse_config("[compute]\nhap_capacity = 5000e9\n").unwrap();
        let mut expected = ScenarioConfig::default();
        expected.compute.hap_capacity = 5000e9;
        assert_eq!(cfg, expected);

        let cfg = parse_config("[radio.downlink]\neirp_dbw = 30.0\n").unwrap();
        assert_eq!(cfg.radio.downlink.payload_bits, 1e5);
        assert_eq!(cfg.radio.uplink, LinkParams::default_uplink());
    }

    #[test]
    fn unit_suffixes_are_rejected() {
        let err = parse_config("[radio.uplink]\ncarrier_frequency_hz = \"38 GHz\"\n").unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("carrier_frequency_hz")), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(parse_config("gv_cout = 3"), Err(Error::Parse(_))));
    }

    #[test]
    fn nested_validation_names_path() {
        match parse_config("[radio.uplink]\nbandwidth_hz = -1.0\n") {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "radio.uplink.bandwidth_hz"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn written_config_reads_back() {
        let mut cfg = ScenarioConfig::default();
        cfg.deadline = Some(0.07);
        cfg.geometry.gv_radial_distance_m = Some(1234.5);
        cfg.radio.bandwidth_sharing = BandwidthSharing::OffloadingVehicles;
        assert_eq!(parse_config(&write_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn comm_delay_legs_commute() {
        let cfg = ScenarioConfig::default();
        let d = cfg.comm_delays(0.5).unwrap();
        let forward = d.uplink.transmission_time + d.downlink.transmission_time + d.round_trip_propagation();
        let backward = d.round_trip_propagation() + d.downlink.transmission_time + d.uplink.transmission_time;
        assert!((forward - backward).abs() < 1e-15);
        assert!((d.total() - forward).abs() < 1e-15);
    }

    #[test]
    fn offloading_sharing_depends_on_eta() {
        let mut cfg = ScenarioConfig::default();
        cfg.radio.bandwidth_sharing = BandwidthSharing::OffloadingVehicles;
        let few = cfg.comm_delays(0.1).unwrap().total();
        let many = cfg.comm_delays(0.9).unwrap().total();
        assert!(many > few);
        assert_eq!(cfg.bandwidth_sharers(0.001), 1.0);
    }
}

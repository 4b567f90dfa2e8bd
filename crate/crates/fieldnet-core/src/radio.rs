//! Wireless technology profiles and the distance-dependent power/delay models
//! used by every optimizer and metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// WiFi station cluster geometry recorded from the deployment model:
/// a station serves a square cluster of this edge length, repeated this many
/// times along each axis of the default field.
pub const WIFI_CLUSTER_EDGE_M: f64 = 50.0;
pub const WIFI_CLUSTER_REPETITION: u32 = 4;

/// A wireless technology profile. Power model `kp * d^alpha`, delay model
/// `kd + cd * d`, hard link range `range_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioTech {
    pub name: String,
    pub range_m: f64,
    pub kp: f64,
    pub alpha: f64,
    pub kd: f64,
    pub cd: f64,
    /// Nominal data rate in Mbit/s, reporting only.
    pub bandwidth_mbps: f64,
    /// Per-node hardware cost in currency units.
    pub unit_cost: f64,
    /// Maximum child nodes one parent can serve.
    pub capacity: u32,
}

impl RadioTech {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_m > 0.0) {
            return Err(Error::Domain {
                what: "range_m",
                value: self.range_m,
            });
        }
        if self.kp < 0.0 {
            return Err(Error::Domain {
                what: "kp",
                value: self.kp,
            });
        }
        if self.alpha < 1.0 {
            return Err(Error::Domain {
                what: "alpha",
                value: self.alpha,
            });
        }
        if self.kd < 0.0 {
            return Err(Error::Domain {
                what: "kd",
                value: self.kd,
            });
        }
        if self.cd < 0.0 {
            return Err(Error::Domain {
                what: "cd",
                value: self.cd,
            });
        }
        if self.capacity < 1 {
            return Err(Error::Domain {
                what: "capacity",
                value: self.capacity as f64,
            });
        }
        Ok(())
    }
}

/// Transmission power needed for a link of length `d`: `kp * d^alpha`.
pub fn link_power(tech: &RadioTech, d: f64) -> Result<f64> {
    if d < 0.0 || !d.is_finite() {
        return Err(Error::Domain {
            what: "link distance",
            value: d,
        });
    }
    Ok(tech.kp * d.powf(tech.alpha))
}

/// One-hop delay over a link of length `d`: `kd + cd * d`.
pub fn link_delay(tech: &RadioTech, d: f64) -> Result<f64> {
    if d < 0.0 || !d.is_finite() {
        return Err(Error::Domain {
            what: "link distance",
            value: d,
        });
    }
    Ok(tech.kd + tech.cd * d)
}

/// Whether a link of length `d` is within the technology's range.
pub fn link_feasible(tech: &RadioTech, d: f64) -> bool {
    d <= tech.range_m
}

/// The six shipped profiles. Numbers are declared defaults chosen to be
/// order-consistent with the shipped ranking model; all values are
/// config-overridable.
///
/// The WiFi power/delay constants double as the station optimizer's
/// calibration: with the default objective weights they put the equilibrium
/// station ring at 80.397 m from the anchor (see `gdl`).
pub fn default_profiles() -> Vec<RadioTech> {
    vec![
        RadioTech {
            name: "WiFi".into(),
            range_m: 100.0,
            kp: 0.01,
            alpha: 2.0,
            kd: 2.0,
            cd: 0.04,
            bandwidth_mbps: 54.0,
            unit_cost: 12.0,
            capacity: 30,
        },
        RadioTech {
            name: "LoRa".into(),
            range_m: 5000.0,
            kp: 0.002,
            alpha: 2.0,
            kd: 80.0,
            cd: 0.5,
            bandwidth_mbps: 0.05,
            unit_cost: 9.0,
            capacity: 60,
        },
        RadioTech {
            name: "Bluetooth".into(),
            range_m: 15.0,
            kp: 0.004,
            alpha: 2.2,
            kd: 6.0,
            cd: 0.10,
            bandwidth_mbps: 2.0,
            unit_cost: 4.0,
            capacity: 100,
        },
        RadioTech {
            name: "Zigbee".into(),
            range_m: 50.0,
            kp: 0.005,
            alpha: 2.0,
            kd: 12.0,
            cd: 0.12,
            bandwidth_mbps: 0.25,
            unit_cost: 5.0,
            capacity: 64,
        },
        RadioTech {
            name: "LTE".into(),
            range_m: 2000.0,
            kp: 0.08,
            alpha: 2.5,
            kd: 30.0,
            cd: 0.02,
            bandwidth_mbps: 100.0,
            unit_cost: 45.0,
            capacity: 200,
        },
        RadioTech {
            name: "Z-Wave".into(),
            range_m: 30.0,
            kp: 0.006,
            alpha: 2.1,
            kd: 15.0,
            cd: 0.2,
            bandwidth_mbps: 0.1,
            unit_cost: 8.0,
            capacity: 32,
        },
    ]
}

/// Find a profile by name in a profile list.
pub fn profile<'a>(profiles: &'a [RadioTech], name: &str) -> Result<&'a RadioTech> {
    profiles
        .iter()
        .find(|t| t.name == name)
        .ok_or_else(|| Error::Lookup(format!("radio profile '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wifi70() -> RadioTech {
        RadioTech {
            name: "WiFi".into(),
            range_m: 70.0,
            kp: 0.01,
            alpha: 2.0,
            kd: 2.0,
            cd: 0.04,
            bandwidth_mbps: 54.0,
            unit_cost: 12.0,
            capacity: 30,
        }
    }

    fn custom(kp: f64, alpha: f64, kd: f64, cd: f64) -> RadioTech {
        RadioTech {
            name: "test".into(),
            range_m: 100.0,
            kp,
            alpha,
            kd,
            cd,
            bandwidth_mbps: 1.0,
            unit_cost: 1.0,
            capacity: 10,
        }
    }

    #[test]
    fn power_zero_distance() {
        assert_eq!(link_power(&custom(1.0, 2.0, 0.0, 0.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn power_square_law() {
        assert_eq!(link_power(&custom(1.0, 2.0, 0.0, 0.0), 10.0).unwrap(), 100.0);
    }

    #[test]
    fn power_fractional_exponent() {
        let expected = 0.5 * 70.0_f64.powf(2.5);
        let got = link_power(&custom(0.5, 2.5, 0.0, 0.0), 70.0).unwrap();
        assert!((got - expected).abs() < 1e-9);
    }

    #[test]
    fn power_rejects_negative_distance() {
        assert!(matches!(
            link_power(&custom(1.0, 2.0, 0.0, 0.0), -1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn delay_distance_free() {
        let t = custom(0.0, 2.0, 1.0, 0.0);
        for d in [0.0, 5.0, 123.0] {
            assert_eq!(link_delay(&t, d).unwrap(), 1.0);
        }
    }

    #[test]
    fn delay_linear_term() {
        assert_eq!(link_delay(&custom(0.0, 2.0, 0.0, 0.1), 50.0).unwrap(), 5.0);
    }

    #[test]
    fn delay_shipped_wifi_at_range() {
        let profiles = default_profiles();
        let wifi = profile(&profiles, "WiFi").unwrap();
        let got = link_delay(wifi, wifi.range_m).unwrap();
        assert!((got - (wifi.kd + wifi.cd * wifi.range_m)).abs() < 1e-12);
    }

    #[test]
    fn feasible_at_and_past_range() {
        let profiles = default_profiles();
        let bt = profile(&profiles, "Bluetooth").unwrap();
        assert!(link_feasible(bt, 15.0));
        assert!(!link_feasible(bt, 15.01));
        assert!(link_feasible(&wifi70(), 70.0));
    }

    #[test]
    fn monotone_power_and_delay() {
        let t = custom(0.3, 2.3, 1.5, 0.07);
        let mut prev_p = -1.0;
        let mut prev_d = -1.0;
        for k in 0..200 {
            let d = k as f64 * 0.7;
            let p = link_power(&t, d).unwrap();
            let q = link_delay(&t, d).unwrap();
            assert!(p >= prev_p && q >= prev_d);
            prev_p = p;
            prev_d = q;
        }
    }

    #[test]
    fn shipped_profiles_validate() {
        for t in default_profiles() {
            t.validate().unwrap();
        }
    }

    #[test]
    fn unknown_profile_is_lookup_error() {
        let profiles = default_profiles();
        assert!(matches!(
            profile(&profiles, "carrier-pigeon"),
            Err(Error::Lookup(_))
        ));
    }
}

//! Scenario files.
//!
//! A scenario is a JSON document whose numeric fields carry their unit in
//! the name (`sigma_us`, `p_tx_mw`, `rate_mbps`, `l_bytes`, `e_bg_uj`) so
//! table values can be transcribed verbatim. Slot counts (`h`, `g`,
//! `n_max`) are plain integers. Values are converted to SI once, on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DutyCycle, LinkParams, NodeParams, PowerProfile, ProtocolParams, Scenario};
use crate::units::Unit;

const EXAMPLE1: &str = include_str!("../scenarios/example1.json");
const EXAMPLE2: &str = include_str!("../scenarios/example2.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    protocol: ProtocolFile,
    nodes: Vec<NodeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolFile {
    sigma_us: f64,
    sifs_us: f64,
    difs_us: f64,
    ack_us: f64,
    rts_us: f64,
    cts_us: f64,
    phy_hdr_us: f64,
    mac_hdr_bytes: f64,
    shdr_bytes: f64,
    fcs_bytes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    id: String,
    link: LinkFile,
    duty: DutyFile,
    power: PowerFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    l_bytes: f64,
    rate_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DutyFile {
    h: u32,
    g: u32,
    n_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerFile {
    p_tx_mw: f64,
    p_rx_mw: f64,
    p_listen_mw: f64,
    p_acq_mw: f64,
    p_proc_mw: f64,
    #[serde(default)]
    e_bg_uj: f64,
    phi_mw: f64,
}

impl ScenarioFile {
    fn into_scenario(self) -> Scenario {
        use Unit::*;
        let p = self.protocol;
        Scenario {
            name: self.name,
            protocol: ProtocolParams {
                sigma: Micros.to_si(p.sigma_us),
                t_sifs: Micros.to_si(p.sifs_us),
                t_difs: Micros.to_si(p.difs_us),
                t_ack: Micros.to_si(p.ack_us),
                t_rts: Micros.to_si(p.rts_us),
                t_cts: Micros.to_si(p.cts_us),
                t_phy_hdr: Micros.to_si(p.phy_hdr_us),
                l_mac_hdr: Bytes.to_si(p.mac_hdr_bytes),
                l_shdr: Bytes.to_si(p.shdr_bytes),
                l_fcs: Bytes.to_si(p.fcs_bytes),
            },
            nodes: self
                .nodes
                .into_iter()
                .map(|n| NodeParams {
                    id: n.id,
                    link: LinkParams {
                        l: Bytes.to_si(n.link.l_bytes),
                        rate: Mbps.to_si(n.link.rate_mbps),
                    },
                    duty: DutyCycle {
                        h: n.duty.h,
                        g: n.duty.g,
                        n_max: n.duty.n_max,
                    },
                    power: PowerProfile {
                        p_tx: Milliwatts.to_si(n.power.p_tx_mw),
                        p_rx: Milliwatts.to_si(n.power.p_rx_mw),
                        p_listen: Milliwatts.to_si(n.power.p_listen_mw),
                        p_acq: Milliwatts.to_si(n.power.p_acq_mw),
                        p_proc: Milliwatts.to_si(n.power.p_proc_mw),
                        e_bg: Microjoules.to_si(n.power.e_bg_uj),
                        phi: Milliwatts.to_si(n.power.phi_mw),
                    },
                })
                .collect(),
        }
    }

    fn from_scenario(s: &Scenario) -> Self {
        use Unit::*;
        let p = &s.protocol;
        ScenarioFile {
            name: s.name.clone(),
            note: None,
            protocol: ProtocolFile {
                sigma_us: Micros.from_si(p.sigma),
                sifs_us: Micros.from_si(p.t_sifs),
                difs_us: Micros.from_si(p.t_difs),
                ack_us: Micros.from_si(p.t_ack),
                rts_us: Micros.from_si(p.t_rts),
                cts_us: Micros.from_si(p.t_cts),
                phy_hdr_us: Micros.from_si(p.t_phy_hdr),
                mac_hdr_bytes: Bytes.from_si(p.l_mac_hdr),
                shdr_bytes: Bytes.from_si(p.l_shdr),
                fcs_bytes: Bytes.from_si(p.l_fcs),
            },
            nodes: s
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id.clone(),
                    link: LinkFile {
                        l_bytes: Bytes.from_si(n.link.l),
                        rate_mbps: Mbps.from_si(n.link.rate),
                    },
                    duty: DutyFile {
                        h: n.duty.h,
                        g: n.duty.g,
                        n_max: n.duty.n_max,
                    },
                    power: PowerFile {
                        p_tx_mw: Milliwatts.from_si(n.power.p_tx),
                        p_rx_mw: Milliwatts.from_si(n.power.p_rx),
                        p_listen_mw: Milliwatts.from_si(n.power.p_listen),
                        p_acq_mw: Milliwatts.from_si(n.power.p_acq),
                        p_proc_mw: Milliwatts.from_si(n.power.p_proc),
                        e_bg_uj: Microjoules.from_si(n.power.e_bg),
                        phi_mw: Milliwatts.from_si(n.power.phi),
                    },
                })
                .collect(),
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let scen = file.into_scenario();
    scen.validate()?;
    check_unique_ids(&scen)?;
    Ok(scen)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&fs::read_to_string(path)?)
}

/// Serializes in file units.
pub fn to_json_string(scen: &Scenario) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ScenarioFile::from_scenario(
        scen,
    ))?)
}

/// One of the bundled scenarios: `example1` (six nodes differing only in
/// `n_max`) or `example2` (six nodes at increasing distance from the power
/// source).
pub fn bundled(name: &str) -> Result<Scenario> {
    parse_scenario(bundled_text(name)?)
}

pub fn bundled_text(name: &str) -> Result<&'static str> {
    match name {
        "example1" => Ok(EXAMPLE1),
        "example2" => Ok(EXAMPLE2),
        other => Err(Error::param(
            "scenario",
            format!("no bundled scenario named `{other}`"),
        )),
    }
}

fn check_unique_ids(scen: &Scenario) -> Result<()> {
    for (i, node) in scen.nodes.iter().enumerate() {
        if node.id.is_empty() {
            return Err(Error::param(format!("nodes[{i}].id"), "must not be empty"));
        }
        if let Some(j) = scen.nodes[..i].iter().position(|o| o.id == node.id) {
            return Err(Error::param(
                format!("nodes[{i}].id"),
                format!("duplicates nodes[{j}].id `{}`", node.id),
            ));
        }
    }
    Ok(())
}

//! Validated parameter sets. Every value is SI.

use crate::error::{Error, Result};

/// 802.11 timing constants shared by all nodes.
///
/// Durations are in seconds; header fields given as lengths are in bits and
/// are clocked at each node's PHY rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    /// Physical slot time.
    pub sigma: f64,
    pub t_sifs: f64,
    pub t_difs: f64,
    pub t_ack: f64,
    pub t_rts: f64,
    pub t_cts: f64,
    pub t_phy_hdr: f64,
    pub l_mac_hdr: f64,
    /// A-MSDU sub-frame header.
    pub l_shdr: f64,
    pub l_fcs: f64,
}

impl ProtocolParams {
    /// 802.11n OFDM constants used throughout the bundled examples.
    pub fn ofdm_default() -> Self {
        ProtocolParams {
            sigma: 9e-6,
            t_sifs: 16e-6,
            t_difs: 34e-6,
            t_ack: 38.67e-6,
            t_rts: 46.67e-6,
            t_cts: 38.67e-6,
            t_phy_hdr: 20e-6,
            l_mac_hdr: 36.0 * 8.0,
            l_shdr: 14.0 * 8.0,
            l_fcs: 4.0 * 8.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("protocol.sigma", self.sigma),
            ("protocol.t_sifs", self.t_sifs),
            ("protocol.t_difs", self.t_difs),
            ("protocol.t_ack", self.t_ack),
            ("protocol.t_rts", self.t_rts),
            ("protocol.t_cts", self.t_cts),
            ("protocol.t_phy_hdr", self.t_phy_hdr),
            ("protocol.l_mac_hdr", self.l_mac_hdr),
            ("protocol.l_shdr", self.l_shdr),
            ("protocol.l_fcs", self.l_fcs),
        ];
        for (name, v) in fields {
            positive(name, v)?;
        }
        if self.t_difs <= self.t_sifs {
            return Err(Error::param("protocol.t_difs", "must exceed t_sifs"));
        }
        Ok(())
    }
}

/// Payload size and PHY rate of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    /// Bits per sample.
    pub l: f64,
    /// PHY data rate, bit/s.
    pub rate: f64,
}

/// Sampling/processing pattern of one node, in MAC slots.
#[derive(Debug, Clone, PartialEq)]
pub struct DutyCycle {
    /// Sampling period.
    pub h: u32,
    /// Processing duration.
    pub g: u32,
    /// Most samples the CPU handles in one cycle.
    pub n_max: u32,
}

impl DutyCycle {
    /// Sleep length `m = n*h + g` for a (possibly fractional) sample count.
    pub fn sleep_slots(&self, n: f64) -> f64 {
        n * f64::from(self.h) + f64::from(self.g)
    }
}

/// Power draws of one node plus the RF power it receives.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    pub p_tx: f64,
    pub p_rx: f64,
    pub p_listen: f64,
    pub p_acq: f64,
    pub p_proc: f64,
    /// Background energy per cycle, joules.
    pub e_bg: f64,
    /// Received RF power.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeParams {
    pub id: String,
    pub link: LinkParams,
    pub duty: DutyCycle,
    pub power: PowerProfile,
}

impl NodeParams {
    pub fn validate(&self, idx: usize) -> Result<()> {
        let f = |name: &str| format!("nodes[{idx}].{name}");
        positive(&f("link.l"), self.link.l)?;
        positive(&f("link.rate"), self.link.rate)?;
        if self.duty.h < 1 {
            return Err(Error::param(f("duty.h"), "must be >= 1"));
        }
        if self.duty.g < 1 {
            return Err(Error::param(f("duty.g"), "must be >= 1"));
        }
        if self.duty.n_max < 1 {
            return Err(Error::param(f("duty.n_max"), "must be >= 1"));
        }
        let p = &self.power;
        for (name, v) in [
            ("power.p_tx", p.p_tx),
            ("power.p_rx", p.p_rx),
            ("power.p_listen", p.p_listen),
            ("power.p_acq", p.p_acq),
            ("power.p_proc", p.p_proc),
            ("power.e_bg", p.e_bg),
        ] {
            non_negative(&f(name), v)?;
        }
        positive(&f("power.phi"), p.phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub protocol: ProtocolParams,
    pub nodes: Vec<NodeParams>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::param("nodes", "at least one node is required"));
        }
        self.protocol.validate()?;
        for (i, node) in self.nodes.iter().enumerate() {
            node.validate(i)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks that `n` and `alpha` are per-node vectors inside `n >= 1`,
    /// `alpha > 0`. Upper bounds are not enforced here.
    pub(crate) fn check_point(&self, n: &[f64], alpha: &[f64]) -> Result<()> {
        if n.len() != self.len() || alpha.len() != self.len() {
            return Err(Error::param(
                "point",
                format!(
                    "expected {} entries, got n={} alpha={}",
                    self.len(),
                    n.len(),
                    alpha.len()
                ),
            ));
        }
        for (i, (&ni, &ai)) in n.iter().zip(alpha).enumerate() {
            if !(ni.is_finite() && ni >= 1.0) {
                return Err(Error::param(
                    format!("n[{i}]"),
                    format!("must be >= 1, got {ni}"),
                ));
            }
            if !(ai.is_finite() && ai > 0.0) {
                return Err(Error::param(
                    format!("alpha[{i}]"),
                    format!("must be > 0, got {ai}"),
                ));
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be >= 0, got {v}")))
    }
}

//! Durations of the RTS/CTS + A-MSDU + ACK exchange.
//!
//! Control frames (RTS, CTS, ACK, PHY header) have fixed durations; MAC
//! header, FCS and A-MSDU sub-frame headers are lengths sent at the node's
//! PHY rate. The sample count `n` is real-valued because the optimizer
//! treats it continuously.

use crate::error::{Error, Result};
use crate::params::{LinkParams, ProtocolParams};

/// `T^o = T^PHY-HDR + L^MAC-HDR/R + L^FCS/R`.
pub fn overhead_t_o(p: &ProtocolParams, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    Ok(p.t_phy_hdr + p.l_mac_hdr / rate + p.l_fcs / rate)
}

/// Air time of one sample inside an A-MSDU: `l/R + L^shdr/R`.
pub fn per_sample_time(p: &ProtocolParams, link: &LinkParams) -> Result<f64> {
    check_link(link)?;
    Ok(link.l / link.rate + p.l_shdr / link.rate)
}

/// Duration of an A-MSDU carrying `n` samples.
pub fn t_amsdu(p: &ProtocolParams, link: &LinkParams, n: f64) -> Result<f64> {
    check_n(n)?;
    Ok(overhead_t_o(p, link.rate)? + n * per_sample_time(p, link)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessTiming {
    /// `T^succ`.
    pub total: f64,
    /// `T^oo`, the part independent of `n`.
    pub overhead: f64,
}

/// RTS + CTS + A-MSDU + ACK with three SIFS gaps.
pub fn t_success(p: &ProtocolParams, link: &LinkParams, n: f64) -> Result<SuccessTiming> {
    check_n(n)?;
    let overhead = success_overhead(p, link.rate)?;
    Ok(SuccessTiming {
        total: overhead + n * per_sample_time(p, link)?,
        overhead,
    })
}

/// `T^oo = T^o + T^RTS + T^CTS + 3 T^SIFS + T^ACK`.
pub fn success_overhead(p: &ProtocolParams, rate: f64) -> Result<f64> {
    Ok(overhead_t_o(p, rate)? + p.t_rts + p.t_cts + 3.0 * p.t_sifs + p.t_ack)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionTiming {
    /// `T^col = T^RTS + T^tout`.
    pub total: f64,
    /// `T^tout = T^SIFS + T^CTS + sigma`.
    pub timeout: f64,
}

pub fn t_collision(p: &ProtocolParams) -> CollisionTiming {
    let timeout = p.t_sifs + p.t_cts + p.sigma;
    CollisionTiming {
        total: p.t_rts + timeout,
        timeout,
    }
}

/// Per-node constants that appear repeatedly in the throughput and energy
/// expressions. Only valid for an already validated scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTiming {
    pub overhead: f64,
    pub per_sample: f64,
    pub success_overhead: f64,
}

impl NodeTiming {
    pub fn new(p: &ProtocolParams, link: &LinkParams) -> Result<Self> {
        Ok(NodeTiming {
            overhead: overhead_t_o(p, link.rate)?,
            per_sample: per_sample_time(p, link)?,
            success_overhead: success_overhead(p, link.rate)?,
        })
    }

    pub fn success(&self, n: f64) -> f64 {
        self.success_overhead + n * self.per_sample
    }

    pub fn amsdu(&self, n: f64) -> f64 {
        self.overhead + n * self.per_sample
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::param("rate", format!("must be > 0, got {rate}")))
    }
}

fn check_link(link: &LinkParams) -> Result<()> {
    check_rate(link.rate)?;
    if link.l.is_finite() && link.l > 0.0 {
        Ok(())
    } else {
        Err(Error::param("l", format!("must be > 0, got {}", link.l)))
    }
}

// n = 0 is accepted so the empty aggregate can be inspected.
fn check_n(n: f64) -> Result<()> {
    if n.is_finite() && n >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("n", format!("must be >= 0, got {n}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(l: f64, mbps: f64) -> LinkParams {
        LinkParams {
            l,
            rate: mbps * 1e6,
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn overhead_at_table_rates() {
        let p = ProtocolParams::ofdm_default();
        let t = overhead_t_o(&p, 11e6).unwrap();
        assert!(close(t, 20e-6 + 320.0 / 11e6, 1e-15));
        assert!((t * 1e6 - 49.0909).abs() < 1e-3);
        let t = overhead_t_o(&p, 5.5e6).unwrap();
        assert!((t * 1e6 - 78.1818).abs() < 1e-3);
        // header bits cost nothing at an absurd rate
        let t = overhead_t_o(&p, 1e30).unwrap();
        assert!(close(t, 20e-6, 1e-12));
    }

    #[test]
    fn non_positive_rate_is_rejected() {
        let p = ProtocolParams::ofdm_default();
        assert!(overhead_t_o(&p, 0.0).is_err());
        assert!(overhead_t_o(&p, -1.0).is_err());
        assert!(t_amsdu(&p, &link(400.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn amsdu_durations() {
        let p = ProtocolParams::ofdm_default();
        let l = link(400.0, 11.0);
        let to = overhead_t_o(&p, 11e6).unwrap();
        assert_eq!(t_amsdu(&p, &l, 0.0).unwrap(), to);
        let one = t_amsdu(&p, &l, 1.0).unwrap();
        assert!(close(one, to + 512.0 / 11e6, 1e-14));
        let two = t_amsdu(&p, &l, 2.0).unwrap();
        assert!(close(two - to, 2.0 * (one - to), 1e-12));
    }

    #[test]
    fn success_overhead_matches_hand_sum() {
        let p = ProtocolParams::ofdm_default();
        let l = link(400.0, 11.0);
        let s = t_success(&p, &l, 3.0).unwrap();
        assert!((s.overhead * 1e6 - 221.1009).abs() < 1e-3);
        let diff = s.total - t_amsdu(&p, &l, 3.0).unwrap();
        let expect = p.t_rts + p.t_cts + 3.0 * p.t_sifs + p.t_ack;
        assert!(close(diff, expect, 1e-12));
        assert!(t_success(&p, &l, 4.0).unwrap().total > s.total);
    }

    #[test]
    fn collision_duration() {
        let p = ProtocolParams::ofdm_default();
        let c = t_collision(&p);
        assert!((c.timeout * 1e6 - 63.67).abs() < 1e-9);
        assert!((c.total * 1e6 - 110.34).abs() < 1e-9);
        assert!(c.total > c.timeout && c.total > p.sigma);
    }

    #[test]
    fn unit_scaling_is_exact_for_powers_of_two() {
        // Rescaling every duration and every rate reciprocally scales all
        // outputs by the same factor.
        let p = ProtocolParams::ofdm_default();
        let k = 0.5;
        let mut q = p.clone();
        for v in [
            &mut q.sigma,
            &mut q.t_sifs,
            &mut q.t_difs,
            &mut q.t_ack,
            &mut q.t_rts,
            &mut q.t_cts,
            &mut q.t_phy_hdr,
        ] {
            *v *= k;
        }
        let l = link(400.0, 11.0);
        let lq = LinkParams {
            l: 400.0,
            rate: 11e6 / k,
        };
        let a = t_success(&p, &l, 7.0).unwrap().total;
        let b = t_success(&q, &lq, 7.0).unwrap().total;
        assert_eq!(b, a * k);
        assert_eq!(t_collision(&q).total, t_collision(&p).total * k);
    }
}

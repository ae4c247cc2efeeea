//! Per-cycle energy accounting and the energy-neutrality constraint.
//!
//! One cycle of node `i` spends energy on acquisition (`n` slots at `P^A`),
//! processing (`n g` slots at `P^P`), backoff listening (DIFS plus the
//! expected countdown), the A-MSDU exchange or a collision, and a constant
//! background share. It harvests `phi m sigma` while asleep.
//!
//! Substituting `W = 2(1+alpha)/alpha - 2m - 1` turns
//! `E_total <= phi m sigma` into the coefficient form
//!
//! ```text
//! A n + B/alpha + (C n + D) * prod_{j != i} 1/(1 + alpha_j) <= F
//! ```
//!
//! used by the optimizer. Both routes are kept so they can be checked
//! against each other.

use crate::error::{Error, Result};
use crate::mac::{tau_from_alpha, window_from_alpha};
use crate::params::{LinkParams, PowerProfile, ProtocolParams, Scenario};
use crate::timing::{t_collision, NodeTiming};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub e_acq: f64,
    pub e_proc: f64,
    /// Listening during DIFS and countdown. Negative when the implied
    /// contention window is below one (see [`window_from_alpha`]).
    pub e_backoff: f64,
    pub e_data: f64,
    pub e_tx_total: f64,
    pub e_bg: f64,
    pub e_total: f64,
    /// Energy harvested during the `m` sleep slots.
    pub budget: f64,
}

impl EnergyBreakdown {
    pub fn slack(&self) -> f64 {
        self.budget - self.e_total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataEnergy {
    pub expected: f64,
    /// Energy of a successful exchange.
    pub eps_amsdu: f64,
    /// Energy of a collided RTS plus the CTS timeout.
    pub eps_col: f64,
    /// Probability that no peer transmits in the same slot.
    pub p_clear: f64,
}

/// Coefficients of the expanded energy-neutrality constraint of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub per_sample_acq: f64,
    pub per_sample_proc: f64,
}

impl EnergyCoefficients {
    /// `F - A n - B/alpha - (C n + D) peers`, where `peers` is
    /// `prod_{j != i} 1/(1+alpha_j)`.
    pub fn slack(&self, n: f64, alpha: f64, peers: f64) -> f64 {
        self.f - self.a * n - self.b / alpha - (self.c * n + self.d) * peers
    }
}

/// `(T^DIFS + (W-1)/2 sigma) P^L`.
pub fn energy_backoff(p: &ProtocolParams, profile: &PowerProfile, w: f64) -> Result<f64> {
    if !(w.is_finite() && w >= 1.0) {
        return Err(Error::param(
            "w",
            format!("contention window must be >= 1, got {w}"),
        ));
    }
    Ok(backoff_energy(p, profile, w))
}

fn backoff_energy(p: &ProtocolParams, profile: &PowerProfile, w: f64) -> f64 {
    (p.t_difs + (w - 1.0) / 2.0 * p.sigma) * profile.p_listen
}

pub fn eps_amsdu(p: &ProtocolParams, profile: &PowerProfile, timing: &NodeTiming, n: f64) -> f64 {
    (p.t_rts + timing.amsdu(n)) * profile.p_tx
        + (p.t_cts + p.t_ack) * profile.p_rx
        + 2.0 * p.t_sifs * profile.p_listen
}

pub fn eps_col(p: &ProtocolParams, profile: &PowerProfile) -> f64 {
    p.t_rts * profile.p_tx + t_collision(p).timeout * profile.p_listen
}

/// Expected transmission energy given the attempt probabilities of the
/// other nodes.
pub fn energy_data(
    p: &ProtocolParams,
    profile: &PowerProfile,
    link: &LinkParams,
    n: f64,
    taus_others: &[f64],
) -> Result<DataEnergy> {
    for (j, &t) in taus_others.iter().enumerate() {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::param(
                format!("tau[{j}]"),
                format!("must lie in (0,1), got {t}"),
            ));
        }
    }
    let timing = NodeTiming::new(p, link)?;
    let p_clear: f64 = taus_others.iter().map(|t| 1.0 - t).product();
    let eps_amsdu = eps_amsdu(p, profile, &timing, n);
    let eps_col = eps_col(p, profile);
    Ok(DataEnergy {
        expected: p_clear * eps_amsdu + (1.0 - p_clear) * eps_col,
        eps_amsdu,
        eps_col,
        p_clear,
    })
}

/// `prod_{j != i} 1/(1 + alpha_j)`, which equals `prod_{j != i} (1 - tau_j)`.
pub fn peer_product(alpha: &[f64], i: usize) -> f64 {
    alpha
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, a)| 1.0 / (1.0 + a))
        .product()
}

pub fn energy_cycle(
    scen: &Scenario,
    i: usize,
    n: &[f64],
    alpha: &[f64],
) -> Result<EnergyBreakdown> {
    scen.check_point(n, alpha)?;
    let node = scen
        .nodes
        .get(i)
        .ok_or_else(|| Error::param("node", format!("index {i} out of range")))?;
    let p = &scen.protocol;
    let pw = &node.power;
    let ni = n[i];
    let m = node.duty.sleep_slots(ni);

    let e_acq = ni * pw.p_acq * p.sigma;
    let e_proc = ni * pw.p_proc * f64::from(node.duty.g) * p.sigma;
    let e_backoff = backoff_energy(p, pw, window_from_alpha(alpha[i], m));
    let taus_others: Vec<f64> = alpha
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &a)| tau_from_alpha(a))
        .collect();
    let e_data = energy_data(p, pw, &node.link, ni, &taus_others)?.expected;
    let e_tx_total = e_backoff + e_data;
    let e_bg = pw.e_bg;
    Ok(EnergyBreakdown {
        e_acq,
        e_proc,
        e_backoff,
        e_data,
        e_tx_total,
        e_bg,
        e_total: e_acq + e_proc + e_tx_total + e_bg,
        budget: pw.phi * m * p.sigma,
    })
}

pub fn energy_coefficients(scen: &Scenario, i: usize) -> Result<EnergyCoefficients> {
    let node = scen
        .nodes
        .get(i)
        .ok_or_else(|| Error::param("node", format!("index {i} out of range")))?;
    let p = &scen.protocol;
    let pw = &node.power;
    let timing = NodeTiming::new(p, &node.link)?;
    let t_tout = t_collision(p).timeout;
    let h = f64::from(node.duty.h);
    let g = f64::from(node.duty.g);

    let per_sample_acq = pw.p_acq * p.sigma;
    let per_sample_proc = pw.p_proc * g * p.sigma;
    Ok(EnergyCoefficients {
        a: per_sample_acq + per_sample_proc - (pw.phi + pw.p_listen) * h * p.sigma,
        b: p.sigma * pw.p_listen,
        c: timing.per_sample * pw.p_tx,
        d: (p.t_cts + p.t_ack) * pw.p_rx
            + (2.0 * p.t_sifs - t_tout) * pw.p_listen
            + timing.overhead * pw.p_tx,
        f: pw.phi * g * p.sigma
            - pw.e_bg
            - (p.t_difs + t_tout - g * p.sigma) * pw.p_listen
            - p.t_rts * pw.p_tx,
        per_sample_acq,
        per_sample_proc,
    })
}

/// Signed slack of node `i`'s energy-neutrality constraint in joules.
/// Non-negative exactly when the node harvests at least what it spends.
pub fn constraint_slack(scen: &Scenario, i: usize, n: &[f64], alpha: &[f64]) -> Result<f64> {
    scen.check_point(n, alpha)?;
    let coef = energy_coefficients(scen, i)?;
    Ok(coef.slack(n[i], alpha[i], peer_product(alpha, i)))
}

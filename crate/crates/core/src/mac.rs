//! Duty-cycled DCF chain, slot-type probabilities, throughput and air-time.
//!
//! A node is either Active with backoff counter `k` in `0..W` or Sleeping
//! with `k` in `0..m` slots to go. A transmission at `(A,0)` (successful or
//! not) sends the node to `(S, m-1)`; after `(S,0)` a fresh counter is drawn
//! uniformly from `0..W`. There are no retransmissions.
//!
//! The optimizer works with the odds `alpha = tau / (1 - tau)` of the
//! per-slot attempt probability `tau`, which turns the throughput of node
//! `i` into `alpha_i n_i l_i / (X T^col)`.

use crate::error::{Error, Result};
use crate::params::Scenario;
use crate::timing::{t_collision, NodeTiming};

pub fn tau_from_alpha(alpha: f64) -> f64 {
    alpha / (1.0 + alpha)
}

pub fn alpha_from_tau(tau: f64) -> f64 {
    tau / (1.0 - tau)
}

/// Contention window implied by `alpha` for a node sleeping `m` slots,
/// `W = 2(1+alpha)/alpha - 2m - 1`. Not necessarily integral or `>= 1`.
pub fn window_from_alpha(alpha: f64, m: f64) -> f64 {
    2.0 * (1.0 + alpha) / alpha - 2.0 * m - 1.0
}

/// `tau = 2 / (W + 2m + 1)` for real-valued `W` and `m`.
pub fn tau_from_window(w: f64, m: f64) -> f64 {
    2.0 / (w + 2.0 * m + 1.0)
}

/// An attempt rate carried in all three equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttemptRate {
    pub alpha: f64,
    pub tau: f64,
}

impl AttemptRate {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be > 0, got {alpha}")));
        }
        Ok(AttemptRate {
            alpha,
            tau: tau_from_alpha(alpha),
        })
    }

    pub fn from_window(w: u32, m: u32) -> Result<Self> {
        let tau = attempt_probability(w, m)?;
        Ok(AttemptRate {
            alpha: alpha_from_tau(tau),
            tau,
        })
    }

    pub fn window(&self, m: f64) -> f64 {
        window_from_alpha(self.alpha, m)
    }
}

/// Stationary law of the single-node chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    /// `b_{A,k}` for `k = 0..W`.
    pub active: Vec<f64>,
    /// `b_{S,k}` for `k = 0..m`.
    pub sleep: Vec<f64>,
}

impl StationaryDistribution {
    pub fn total(&self) -> f64 {
        self.active.iter().chain(&self.sleep).sum()
    }
}

fn check_chain(w: u32, m: u32) -> Result<()> {
    if w < 1 {
        return Err(Error::param("w", "contention window must be >= 1"));
    }
    if m < 2 {
        return Err(Error::param("m", "sleep length must be >= 2"));
    }
    Ok(())
}

pub fn stationary_distribution(w: u32, m: u32) -> Result<StationaryDistribution> {
    check_chain(w, m)?;
    let b0 = attempt_probability(w, m)?;
    let wf = f64::from(w);
    let active = (0..w).map(|k| (wf - f64::from(k)) / wf * b0).collect();
    let sleep = vec![b0; m as usize];
    Ok(StationaryDistribution { active, sleep })
}

/// Per-slot attempt probability `b_{A,0} = 2 / (W + 2m + 1)`.
pub fn attempt_probability(w: u32, m: u32) -> Result<f64> {
    check_chain(w, m)?;
    Ok(tau_from_window(f64::from(w), f64::from(m)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotProbabilities {
    pub p_idle: f64,
    /// Probability that node `i` alone transmits.
    pub p_succ: Vec<f64>,
    pub p_col: f64,
    /// Probability that node `i` transmits together with at least one other.
    pub p_col_node: Vec<f64>,
}

pub fn slot_probabilities(taus: &[f64]) -> Result<SlotProbabilities> {
    if taus.is_empty() {
        return Err(Error::param("tau", "at least one node is required"));
    }
    for (i, &t) in taus.iter().enumerate() {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::param(
                format!("tau[{i}]"),
                format!("must lie in (0,1), got {t}"),
            ));
        }
    }
    let p_idle: f64 = taus.iter().map(|t| 1.0 - t).product();
    let others_silent = |i: usize| -> f64 {
        taus.iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, t)| 1.0 - t)
            .product()
    };
    let mut p_succ = Vec::with_capacity(taus.len());
    let mut p_col_node = Vec::with_capacity(taus.len());
    for (i, &t) in taus.iter().enumerate() {
        let silent = others_silent(i);
        p_succ.push(t * silent);
        p_col_node.push(t * (1.0 - silent));
    }
    let p_col = (1.0 - p_idle - p_succ.iter().sum::<f64>()).max(0.0);
    Ok(SlotProbabilities {
        p_idle,
        p_succ,
        p_col,
        p_col_node,
    })
}

/// Normalized mean slot length `X`, the common denominator of every
/// node's throughput in the odds parametrization.
pub fn x_value(scen: &Scenario, n: &[f64], alpha: &[f64]) -> Result<f64> {
    scen.check_point(n, alpha)?;
    let timings = node_timings(scen)?;
    Ok(x_unchecked(scen, &timings, n, alpha))
}

pub(crate) fn node_timings(scen: &Scenario) -> Result<Vec<NodeTiming>> {
    scen.nodes
        .iter()
        .map(|node| NodeTiming::new(&scen.protocol, &node.link))
        .collect()
}

pub(crate) fn x_unchecked(
    scen: &Scenario,
    timings: &[NodeTiming],
    n: &[f64],
    alpha: &[f64],
) -> f64 {
    let t_col = t_collision(&scen.protocol).total;
    let mut x = scen.protocol.sigma / t_col;
    let mut prod = 1.0;
    for ((tm, &nj), &aj) in timings.iter().zip(n).zip(alpha) {
        x += tm.per_sample / t_col * nj * aj;
        x += (tm.success_overhead / t_col - 1.0) * aj;
        prod *= 1.0 + aj;
    }
    x + prod - 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfReport {
    /// Bits per second delivered by each node.
    pub throughput: Vec<f64>,
    /// Same quantity from the unreformulated renewal-reward quotient.
    pub throughput_renewal: Vec<f64>,
    /// Fraction of wall-clock time each node occupies the channel,
    /// successful and collided transmissions included.
    pub airtime: Vec<f64>,
    pub x_value: f64,
    pub slot_probs: SlotProbabilities,
    /// Expected wall-clock length of one MAC slot, seconds.
    pub mean_slot_duration: f64,
    pub tau: Vec<f64>,
}

pub fn throughput(scen: &Scenario, n: &[f64], alpha: &[f64]) -> Result<PerfReport> {
    scen.check_point(n, alpha)?;
    let timings = node_timings(scen)?;
    let t_col = t_collision(&scen.protocol).total;
    let sigma = scen.protocol.sigma;

    let x = x_unchecked(scen, &timings, n, alpha);
    let tau: Vec<f64> = alpha.iter().map(|&a| tau_from_alpha(a)).collect();
    let slot_probs = slot_probabilities(&tau)?;

    let t_succ: Vec<f64> = timings
        .iter()
        .zip(n)
        .map(|(tm, &ni)| tm.success(ni))
        .collect();
    let mean_slot_duration = slot_probs.p_idle * sigma
        + slot_probs
            .p_succ
            .iter()
            .zip(&t_succ)
            .map(|(p, t)| p * t)
            .sum::<f64>()
        + slot_probs.p_col * t_col;

    let mut throughput = Vec::with_capacity(n.len());
    let mut throughput_renewal = Vec::with_capacity(n.len());
    let mut airtime = Vec::with_capacity(n.len());
    for (i, node) in scen.nodes.iter().enumerate() {
        let bits = n[i] * node.link.l;
        throughput.push(alpha[i] * bits / (x * t_col));
        throughput_renewal.push(bits * slot_probs.p_succ[i] / mean_slot_duration);
        airtime.push(
            (slot_probs.p_succ[i] * t_succ[i] + slot_probs.p_col_node[i] * t_col)
                / mean_slot_duration,
        );
    }
    Ok(PerfReport {
        throughput,
        throughput_renewal,
        airtime,
        x_value: x,
        slot_probs,
        mean_slot_duration,
        tau,
    })
}

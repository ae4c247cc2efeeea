//! Test-side reference computations, written from the model definitions
//! without calling into the library's own formulas.

#![allow(dead_code, clippy::needless_range_loop)]

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wpcsma::{DutyCycle, LinkParams, NodeParams, PowerProfile, ProtocolParams, Scenario};

pub fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance C{criterion} {name}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

pub fn t_amsdu(p: &ProtocolParams, node: &NodeParams, n: f64) -> f64 {
    let r = node.link.rate;
    p.t_phy_hdr + (p.l_mac_hdr + p.l_fcs) / r + n * (node.link.l + p.l_shdr) / r
}

pub fn t_timeout(p: &ProtocolParams) -> f64 {
    p.t_sifs + p.t_cts + p.sigma
}

pub fn t_succ(p: &ProtocolParams, node: &NodeParams, n: f64) -> f64 {
    p.t_rts + p.t_sifs + p.t_cts + p.t_sifs + t_amsdu(p, node, n) + p.t_sifs + p.t_ack
}

pub fn t_col(p: &ProtocolParams) -> f64 {
    p.t_rts + t_timeout(p)
}

pub fn tau(alpha: f64) -> f64 {
    alpha / (1.0 + alpha)
}

pub fn tau_of_window(w: f64, m: f64) -> f64 {
    2.0 / (w + 2.0 * m + 1.0)
}

pub fn sleep_slots(node: &NodeParams, n: f64) -> f64 {
    n * f64::from(node.duty.h) + f64::from(node.duty.g)
}

// ---------------------------------------------------------------------------
// Slot outcomes by enumerating every transmitter subset
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Slots {
    pub p_idle: f64,
    pub p_succ: Vec<f64>,
    pub p_col: f64,
    /// Node transmits in a slot with at least one other transmitter.
    pub p_col_node: Vec<f64>,
    pub mean_slot: f64,
    pub throughput: Vec<f64>,
    pub airtime: Vec<f64>,
}

pub fn enumerate(scen: &Scenario, n: &[f64], taus: &[f64]) -> Slots {
    let p = &scen.protocol;
    let k = scen.nodes.len();
    assert!(k <= 16);
    let tcol = t_col(p);
    let mut out = Slots {
        p_idle: 0.0,
        p_succ: vec![0.0; k],
        p_col: 0.0,
        p_col_node: vec![0.0; k],
        mean_slot: 0.0,
        throughput: vec![0.0; k],
        airtime: vec![0.0; k],
    };
    for mask in 0u32..(1 << k) {
        let mut prob = 1.0;
        for (j, t) in taus.iter().enumerate() {
            prob *= if mask & (1 << j) != 0 { *t } else { 1.0 - t };
        }
        match mask.count_ones() {
            0 => {
                out.p_idle += prob;
                out.mean_slot += prob * p.sigma;
            }
            1 => {
                let i = mask.trailing_zeros() as usize;
                out.p_succ[i] += prob;
                out.mean_slot += prob * t_succ(p, &scen.nodes[i], n[i]);
            }
            _ => {
                out.p_col += prob;
                out.mean_slot += prob * tcol;
                for j in 0..k {
                    if mask & (1 << j) != 0 {
                        out.p_col_node[j] += prob;
                    }
                }
            }
        }
    }
    for i in 0..k {
        let node = &scen.nodes[i];
        out.throughput[i] = out.p_succ[i] * n[i] * node.link.l / out.mean_slot;
        out.airtime[i] =
            (out.p_succ[i] * t_succ(p, node, n[i]) + out.p_col_node[i] * tcol) / out.mean_slot;
    }
    out
}

/// Normalised mean slot length `E[slot] / (P_idle T^col)`.
pub fn x_value(scen: &Scenario, n: &[f64], alpha: &[f64]) -> f64 {
    let taus: Vec<f64> = alpha.iter().map(|a| tau(*a)).collect();
    let s = enumerate(scen, n, &taus);
    s.mean_slot / (s.p_idle * t_col(&scen.protocol))
}

pub fn utility(scen: &Scenario, n: &[f64], alpha: &[f64]) -> f64 {
    let taus: Vec<f64> = alpha.iter().map(|a| tau(*a)).collect();
    let s = enumerate(scen, n, &taus);
    s.throughput.iter().map(|v| v.ln()).sum()
}

// ---------------------------------------------------------------------------
// Energy per cycle, component by component
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct Energy {
    pub acq: f64,
    pub proc: f64,
    pub backoff: f64,
    pub data: f64,
    pub bg: f64,
    pub total: f64,
    pub budget: f64,
}

pub fn energy(scen: &Scenario, i: usize, n: &[f64], alpha: &[f64]) -> Energy {
    let p = &scen.protocol;
    let node = &scen.nodes[i];
    let pw = &node.power;
    let m = sleep_slots(node, n[i]);
    // Window that produces this attempt probability for this sleep length.
    let w = 2.0 / tau(alpha[i]) - 2.0 * m - 1.0;

    let acq = n[i] * pw.p_acq * p.sigma;
    let proc = n[i] * f64::from(node.duty.g) * pw.p_proc * p.sigma;
    let backoff = (p.t_difs + (w - 1.0) / 2.0 * p.sigma) * pw.p_listen;

    let success = (p.t_rts + t_amsdu(p, node, n[i])) * pw.p_tx
        + (p.t_cts + p.t_ack) * pw.p_rx
        + 2.0 * p.t_sifs * pw.p_listen;
    let collision = p.t_rts * pw.p_tx + t_timeout(p) * pw.p_listen;
    let alone: f64 = (0..n.len())
        .filter(|&j| j != i)
        .map(|j| 1.0 - tau(alpha[j]))
        .product();
    let data = alone * success + (1.0 - alone) * collision;

    let total = acq + proc + backoff + data + pw.e_bg;
    Energy {
        acq,
        proc,
        backoff,
        data,
        bg: pw.e_bg,
        total,
        budget: pw.phi * m * p.sigma,
    }
}

// ---------------------------------------------------------------------------
// Single-node chain occupancy, from the cycle structure
// ---------------------------------------------------------------------------

/// Long-run fraction of slots spent in each `(Active, k)` and `(Sleep, k)`
/// state: every cycle visits each sleep state once and active state `k`
/// whenever the drawn backoff is at least `k`.
pub fn occupancy(w: u32, m: u32) -> (Vec<f64>, Vec<f64>) {
    let wf = f64::from(w);
    let visits_active: Vec<f64> = (0..w).map(|k| (wf - f64::from(k)) / wf).collect();
    let cycle_len = f64::from(m) + visits_active.iter().sum::<f64>();
    (
        visits_active.iter().map(|v| v / cycle_len).collect(),
        vec![1.0 / cycle_len; m as usize],
    )
}

// ---------------------------------------------------------------------------
// Golden-section and bisection 1-D solvers
// ---------------------------------------------------------------------------

/// Maximiser of `log x - gamma x` over `[lo, hi]` by bisection on the sign of
/// the derivative.
pub fn bisect_argmax(gamma: f64, lo: f64, hi: f64) -> f64 {
    let d = |x: f64| 1.0 / x - gamma;
    if d(hi) >= 0.0 {
        return hi;
    }
    if d(lo) <= 0.0 {
        return lo;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if d(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

pub fn golden_argmax(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------------------
// Random scenarios
// ---------------------------------------------------------------------------

const RATES_MBPS: [f64; 8] = [1.0, 2.0, 5.5, 6.0, 9.0, 11.0, 12.0, 24.0];

pub fn random_node(rng: &mut ChaCha8Rng, idx: usize, phi_range: (f64, f64)) -> NodeParams {
    let p_rx = rng.random_range(8.0..16.0) * 1e-3;
    NodeParams {
        id: format!("r{idx}"),
        link: LinkParams {
            l: 8.0 * f64::from(rng.random_range(10u32..200)),
            rate: RATES_MBPS[rng.random_range(0..RATES_MBPS.len())] * 1e6,
        },
        duty: DutyCycle {
            h: rng.random_range(1..6),
            g: rng.random_range(1..6),
            n_max: rng.random_range(1..80),
        },
        power: PowerProfile {
            p_tx: p_rx * rng.random_range(1.0..1.8),
            p_rx,
            p_listen: rng.random_range(4.0..10.0) * 1e-3,
            p_acq: rng.random_range(1.0..8.0) * 1e-3,
            p_proc: rng.random_range(1.0..8.0) * 1e-3,
            e_bg: if rng.random_bool(0.5) {
                0.0
            } else {
                rng.random_range(0.0..2e-7)
            },
            phi: rng.random_range(phi_range.0..phi_range.1) * 1e-3,
        },
    }
}

pub fn random_scenario(rng: &mut ChaCha8Rng, nodes: usize, phi_range: (f64, f64)) -> Scenario {
    Scenario {
        name: "random".into(),
        protocol: ProtocolParams::ofdm_default(),
        nodes: (0..nodes).map(|i| random_node(rng, i, phi_range)).collect(),
    }
}

/// Random point inside the optimizer's box.
pub fn random_point(rng: &mut ChaCha8Rng, scen: &Scenario) -> (Vec<f64>, Vec<f64>) {
    let n = scen
        .nodes
        .iter()
        .map(|nd| rng.random_range(1.0..=f64::from(nd.duty.n_max)))
        .collect();
    let alpha = scen
        .nodes
        .iter()
        .map(|_| rng.random_range(1e-4..0.5))
        .collect();
    (n, alpha)
}

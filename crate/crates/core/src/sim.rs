//! Slot-level Monte Carlo simulation of the duty-cycled contention model.
//!
//! Every MAC slot, each Active node whose counter is zero transmits. No
//! transmitter means an idle slot of length `sigma`, one means a success of
//! length `T^succ_i`, more means a collision of length `T^col`. Transmitters
//! go to sleep for `m_i` slots, other Active nodes count down, sleepers
//! count down and wake with a fresh uniform backoff from `0..W_i`. Counters
//! move once per slot whatever its wall-clock length, exactly as in the
//! chain the analytical model is built on.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy_cycle, eps_amsdu, eps_col};
use crate::error::{Error, Result};
use crate::mac::{alpha_from_tau, attempt_probability, node_timings, stationary_distribution};
use crate::params::Scenario;
use crate::stats::{batch_estimate, batch_of, Estimate, BATCHES};
use crate::timing::t_collision;

pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub n_slots: u64,
    pub seed: u64,
    pub warmup_slots: u64,
}

impl SimConfig {
    pub fn new(n_slots: u64, seed: u64) -> Self {
        SimConfig {
            n_slots,
            seed,
            warmup_slots: n_slots / 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_slots <= self.warmup_slots {
            return Err(Error::param("sim.n_slots", "must exceed warmup_slots"));
        }
        if self.n_slots - self.warmup_slots < BATCHES as u64 {
            return Err(Error::param(
                "sim.n_slots",
                format!("need at least {BATCHES} measured slots"),
            ));
        }
        Ok(())
    }
}

/// Integer operating point: samples per cycle, contention window and sleep
/// length of every node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimPoint {
    pub n: Vec<u32>,
    pub w: Vec<u32>,
    pub m: Vec<u32>,
}

impl SimPoint {
    /// Uses `m_i = n_i h_i + g_i`.
    pub fn from_duty(scen: &Scenario, n: Vec<u32>, w: Vec<u32>) -> Result<Self> {
        if n.len() != scen.len() {
            return Err(Error::param(
                "point.n",
                format!("expected {} entries", scen.len()),
            ));
        }
        let m = scen
            .nodes
            .iter()
            .zip(&n)
            .map(|(node, &ni)| {
                ni.checked_mul(node.duty.h)
                    .and_then(|v| v.checked_add(node.duty.g))
                    .ok_or_else(|| Error::param("point.n", "sleep length overflows"))
            })
            .collect::<Result<_>>()?;
        Ok(SimPoint { n, w, m })
    }

    pub fn validate(&self, scen: &Scenario) -> Result<()> {
        let nodes = scen.len();
        if self.n.len() != nodes || self.w.len() != nodes || self.m.len() != nodes {
            return Err(Error::param(
                "point",
                format!("expected {nodes} entries per field"),
            ));
        }
        for i in 0..nodes {
            if self.n[i] < 1 {
                return Err(Error::param(format!("point.n[{i}]"), "must be >= 1"));
            }
            if self.w[i] < 1 {
                return Err(Error::param(format!("point.w[{i}]"), "must be >= 1"));
            }
            if self.m[i] < 2 {
                return Err(Error::param(format!("point.m[{i}]"), "must be >= 2"));
            }
        }
        Ok(())
    }

    /// Analytical attempt odds of every node.
    pub fn alpha(&self) -> Result<Vec<f64>> {
        self.w
            .iter()
            .zip(&self.m)
            .map(|(&w, &m)| attempt_probability(w, m).map(alpha_from_tau))
            .collect()
    }

    pub fn n_real(&self) -> Vec<f64> {
        self.n.iter().map(|&v| f64::from(v)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Active,
    Sleeping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeState {
    pub mode: Mode,
    /// Backoff slots left when Active, sleep slots left when Sleeping.
    pub counter: u32,
}

/// Per-cycle energy split as in the analytical breakdown, joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyComponents {
    pub e_acq: Estimate,
    pub e_proc: Estimate,
    pub e_backoff: Estimate,
    pub e_data: Estimate,
    pub e_bg: Estimate,
    pub e_total: Estimate,
}

/// Visit counts of every chain state, taken at the start of each measured
/// slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Occupancy {
    pub active: Vec<u64>,
    pub sleep: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub rng: &'static str,
    pub seed: u64,
    /// Measured (post-warmup) slots.
    pub slots: u64,
    pub total_time: f64,
    pub throughput: Vec<Estimate>,
    pub airtime: Vec<Estimate>,
    pub p_idle: Estimate,
    pub p_succ: Vec<Estimate>,
    pub p_col: Estimate,
    pub energy_per_cycle: Vec<EnergyComponents>,
    pub cycles: Vec<u64>,
    pub delivered_bits: Vec<f64>,
    pub occupancy: Vec<Occupancy>,
}

#[derive(Clone, Copy)]
enum Outcome {
    Idle,
    Success(usize),
    Collision,
}

#[derive(Clone, Default)]
struct NodeAcc {
    bits: f64,
    air: f64,
    succ: u64,
    cycles: u64,
    e_backoff: f64,
    e_data: f64,
}

#[derive(Clone)]
struct BatchAcc {
    slots: u64,
    time: f64,
    idle: u64,
    col: u64,
    nodes: Vec<NodeAcc>,
}

impl BatchAcc {
    fn new(nodes: usize) -> Self {
        BatchAcc {
            slots: 0,
            time: 0.0,
            idle: 0,
            col: 0,
            nodes: vec![NodeAcc::default(); nodes],
        }
    }
}

pub fn simulate(scen: &Scenario, point: &SimPoint, cfg: &SimConfig) -> Result<SimStats> {
    run(scen, point, cfg, None)
}

/// As [`simulate`], also writing one CSV row per measured slot:
/// `slot,type,transmitters` with transmitter indices joined by `;`.
pub fn simulate_with_trace(
    scen: &Scenario,
    point: &SimPoint,
    cfg: &SimConfig,
    trace: &mut dyn Write,
) -> Result<SimStats> {
    run(scen, point, cfg, Some(trace))
}

fn run(
    scen: &Scenario,
    point: &SimPoint,
    cfg: &SimConfig,
    trace: Option<&mut dyn Write>,
) -> Result<SimStats> {
    scen.validate()?;
    point.validate(scen)?;
    cfg.validate()?;
    let nodes = scen.len();
    let p = &scen.protocol;
    let timings = node_timings(scen)?;
    let t_col = t_collision(p).total;
    let t_succ: Vec<f64> = (0..nodes)
        .map(|i| timings[i].success(f64::from(point.n[i])))
        .collect();
    let payload: Vec<f64> = (0..nodes)
        .map(|i| f64::from(point.n[i]) * scen.nodes[i].link.l)
        .collect();
    let e_success: Vec<f64> = (0..nodes)
        .map(|i| eps_amsdu(p, &scen.nodes[i].power, &timings[i], f64::from(point.n[i])))
        .collect();
    let e_collision: Vec<f64> = scen.nodes.iter().map(|nd| eps_col(p, &nd.power)).collect();
    let e_countdown: Vec<f64> = scen
        .nodes
        .iter()
        .map(|nd| p.sigma * nd.power.p_listen)
        .collect();
    let e_difs: Vec<f64> = scen
        .nodes
        .iter()
        .map(|nd| p.t_difs * nd.power.p_listen)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = (0..nodes)
        .map(|i| initial_state(&mut rng, point.w[i], point.m[i]))
        .collect::<Result<Vec<_>>>()?;

    let mut writer = trace.map(csv::Writer::from_writer);
    if let Some(w) = writer.as_mut() {
        w.write_record(["slot", "type", "transmitters"])?;
    }

    let measured = cfg.n_slots - cfg.warmup_slots;
    let mut batches = vec![BatchAcc::new(nodes); BATCHES];
    let mut occupancy: Vec<Occupancy> = (0..nodes)
        .map(|i| Occupancy {
            active: vec![0; point.w[i] as usize],
            sleep: vec![0; point.m[i] as usize],
        })
        .collect();
    let mut tx = Vec::with_capacity(nodes);

    for slot in 0..cfg.n_slots {
        let record = slot >= cfg.warmup_slots;
        tx.clear();
        tx.extend((0..nodes).filter(|&i| state[i].mode == Mode::Active && state[i].counter == 0));
        let outcome = match tx.len() {
            0 => Outcome::Idle,
            1 => Outcome::Success(tx[0]),
            _ => Outcome::Collision,
        };

        if record {
            let idx = slot - cfg.warmup_slots;
            let b = &mut batches[batch_of(idx, measured)];
            for (i, s) in state.iter().enumerate() {
                let c = s.counter as usize;
                match s.mode {
                    Mode::Active => occupancy[i].active[c] += 1,
                    Mode::Sleeping => occupancy[i].sleep[c] += 1,
                }
                if s.mode == Mode::Active && s.counter > 0 {
                    b.nodes[i].e_backoff += e_countdown[i];
                }
            }
            b.slots += 1;
            match outcome {
                Outcome::Idle => {
                    b.idle += 1;
                    b.time += p.sigma;
                }
                Outcome::Success(i) => {
                    b.time += t_succ[i];
                    let acc = &mut b.nodes[i];
                    acc.succ += 1;
                    acc.bits += payload[i];
                    acc.air += t_succ[i];
                    acc.e_data += e_success[i];
                }
                Outcome::Collision => {
                    b.col += 1;
                    b.time += t_col;
                    for &i in &tx {
                        b.nodes[i].air += t_col;
                        b.nodes[i].e_data += e_collision[i];
                    }
                }
            }
            for &i in &tx {
                b.nodes[i].cycles += 1;
                b.nodes[i].e_backoff += e_difs[i];
            }
            if let Some(w) = writer.as_mut() {
                let kind = match outcome {
                    Outcome::Idle => "idle",
                    Outcome::Success(_) => "success",
                    Outcome::Collision => "collision",
                };
                let who = tx
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                w.write_record([slot.to_string(), kind.to_string(), who])?;
            }
        }

        for (i, s) in state.iter_mut().enumerate() {
            *s = match (s.mode, s.counter) {
                (Mode::Active, 0) => NodeState {
                    mode: Mode::Sleeping,
                    counter: point.m[i] - 1,
                },
                (Mode::Active, k) => NodeState {
                    mode: Mode::Active,
                    counter: k - 1,
                },
                (Mode::Sleeping, 0) => NodeState {
                    mode: Mode::Active,
                    counter: rng.random_range(0..point.w[i]),
                },
                (Mode::Sleeping, k) => NodeState {
                    mode: Mode::Sleeping,
                    counter: k - 1,
                },
            };
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }

    Ok(summarize(scen, point, cfg, &batches, occupancy))
}

/// Draws a chain state from the single-node stationary law.
fn initial_state(rng: &mut ChaCha8Rng, w: u32, m: u32) -> Result<NodeState> {
    let dist = stationary_distribution(w, m)?;
    let total = dist.total();
    let mut u = rng.random::<f64>() * total;
    for (k, &pk) in dist.active.iter().enumerate() {
        if u < pk {
            return Ok(NodeState {
                mode: Mode::Active,
                counter: k as u32,
            });
        }
        u -= pk;
    }
    for (k, &pk) in dist.sleep.iter().enumerate() {
        if u < pk {
            return Ok(NodeState {
                mode: Mode::Sleeping,
                counter: k as u32,
            });
        }
        u -= pk;
    }
    Ok(NodeState {
        mode: Mode::Sleeping,
        counter: m - 1,
    })
}

fn summarize(
    scen: &Scenario,
    point: &SimPoint,
    cfg: &SimConfig,
    batches: &[BatchAcc],
    occupancy: Vec<Occupancy>,
) -> SimStats {
    let nodes = scen.len();
    let p = &scen.protocol;
    let slots: u64 = batches.iter().map(|b| b.slots).sum();
    let total_time: f64 = batches.iter().map(|b| b.time).sum();
    let frac = |num: &dyn Fn(&BatchAcc) -> f64, den: &dyn Fn(&BatchAcc) -> f64| -> Estimate {
        let point = batches.iter().map(num).sum::<f64>() / batches.iter().map(den).sum::<f64>();
        let per: Vec<f64> = batches.iter().map(|b| num(b) / den(b)).collect();
        batch_estimate(point, &per)
    };
    let slots_of = |b: &BatchAcc| b.slots as f64;
    let time_of = |b: &BatchAcc| b.time;

    let p_idle = frac(&|b| b.idle as f64, &slots_of);
    let p_col = frac(&|b| b.col as f64, &slots_of);
    let mut throughput = Vec::with_capacity(nodes);
    let mut airtime = Vec::with_capacity(nodes);
    let mut p_succ = Vec::with_capacity(nodes);
    let mut energy_per_cycle = Vec::with_capacity(nodes);
    let mut cycles = Vec::with_capacity(nodes);
    let mut delivered_bits = Vec::with_capacity(nodes);
    for i in 0..nodes {
        throughput.push(frac(&|b| b.nodes[i].bits, &time_of));
        airtime.push(frac(&|b| b.nodes[i].air, &time_of));
        p_succ.push(frac(&|b| b.nodes[i].succ as f64, &slots_of));
        cycles.push(batches.iter().map(|b| b.nodes[i].cycles).sum());
        delivered_bits.push(batches.iter().map(|b| b.nodes[i].bits).sum());

        let pw = &scen.nodes[i].power;
        let n = f64::from(point.n[i]);
        let cyc = |b: &BatchAcc| b.nodes[i].cycles as f64;
        let e_acq = n * pw.p_acq * p.sigma;
        let e_proc = n * pw.p_proc * f64::from(scen.nodes[i].duty.g) * p.sigma;
        let e_backoff = frac(&|b| b.nodes[i].e_backoff, &cyc);
        let e_data = frac(&|b| b.nodes[i].e_data, &cyc);
        let fixed = e_acq + e_proc + pw.e_bg;
        let e_total = frac(
            &|b| b.nodes[i].e_backoff + b.nodes[i].e_data + fixed * cyc(b),
            &cyc,
        );
        energy_per_cycle.push(EnergyComponents {
            e_acq: Estimate::exact(e_acq),
            e_proc: Estimate::exact(e_proc),
            e_backoff,
            e_data,
            e_bg: Estimate::exact(pw.e_bg),
            e_total,
        });
    }
    SimStats {
        rng: RNG_NAME,
        seed: cfg.seed,
        slots,
        total_time,
        throughput,
        airtime,
        p_idle,
        p_succ,
        p_col,
        energy_per_cycle,
        cycles,
        delivered_bits,
        occupancy,
    }
}

/// Simulated against analytical value of one energy component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyComparison {
    pub analytical: f64,
    pub simulated: Estimate,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeEnergyCheck {
    pub node: usize,
    pub e_acq: EnergyComparison,
    pub e_proc: EnergyComparison,
    pub e_backoff: EnergyComparison,
    pub e_data: EnergyComparison,
    pub e_bg: EnergyComparison,
    pub e_total: EnergyComparison,
}

/// Mean simulated per-cycle energy against the analytical breakdown at the
/// attempt rates implied by the integer windows.
pub fn empirical_energy_check(
    scen: &Scenario,
    point: &SimPoint,
    cfg: &SimConfig,
) -> Result<Vec<NodeEnergyCheck>> {
    let stats = simulate(scen, point, cfg)?;
    compare_energy(scen, point, &stats)
}

pub fn compare_energy(
    scen: &Scenario,
    point: &SimPoint,
    stats: &SimStats,
) -> Result<Vec<NodeEnergyCheck>> {
    let alpha = point.alpha()?;
    let n = point.n_real();
    let cmp = |analytical: f64, simulated: Estimate| EnergyComparison {
        analytical,
        simulated,
        rel_error: if analytical == 0.0 {
            simulated.mean.abs()
        } else {
            (simulated.mean - analytical) / analytical.abs()
        },
    };
    (0..scen.len())
        .map(|i| {
            let a = energy_cycle(scen, i, &n, &alpha)?;
            let s = &stats.energy_per_cycle[i];
            Ok(NodeEnergyCheck {
                node: i,
                e_acq: cmp(a.e_acq, s.e_acq),
                e_proc: cmp(a.e_proc, s.e_proc),
                e_backoff: cmp(a.e_backoff, s.e_backoff),
                e_data: cmp(a.e_data, s.e_data),
                e_bg: cmp(a.e_bg, s.e_bg),
                e_total: cmp(a.e_total, s.e_total),
            })
        })
        .collect()
}

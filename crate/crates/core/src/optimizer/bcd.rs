use serde::Serialize;

use crate::energy::{energy_cycle, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::mac::{alpha_from_tau, tau_from_window, throughput, window_from_alpha, PerfReport};
use crate::params::Scenario;

use super::blocks::{alpha_block, n_block};
use super::{DecisionVector, OptimizerConfig, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    IterationCap,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::IterationCap => "iteration-cap",
        }
    }
}

/// Integer operating point derived from the continuous optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegerDecision {
    pub n: Vec<u32>,
    /// `m_i = n_i h_i + g_i`.
    pub m: Vec<u32>,
    /// Nearest integer window, at least 1.
    pub w: Vec<u32>,
    /// Energy slack at the integer `n` and the continuous `alpha`.
    pub slack_continuous_alpha: Vec<f64>,
    /// Energy slack at the integer `(n, W)`.
    pub slack: Vec<f64>,
    /// Every slack at the integer `(n, W)` is non-negative.
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub decision: DecisionVector,
    pub utility: f64,
    /// Utility after each outer iteration.
    pub utility_trace: Vec<f64>,
    pub perf: PerfReport,
    pub energy: Vec<EnergyBreakdown>,
    pub slack: Vec<f64>,
    pub recovered_w: Vec<f64>,
    pub integer_decision: IntegerDecision,
    pub warnings: Vec<String>,
    pub status: SolveStatus,
    pub outer_iterations: usize,
}

/// Block coordinate ascent: the full `n` block, then one ascending sweep
/// over the `alpha_i`, repeated until both the utility and the decision
/// vector settle.
pub fn solve_bcd(
    scen: &Scenario,
    cfg: &OptimizerConfig,
    init: Option<&DecisionVector>,
) -> Result<OptResult> {
    cfg.validate()?;
    let prob = Problem::new(scen)?;
    let start = match init {
        Some(dv) => {
            dv.check_box(scen)?;
            dv.clone()
        }
        None => DecisionVector::initial(scen.len()),
    };
    check_start(&prob, &start.alpha)?;

    let DecisionVector { mut n, mut alpha } = start;
    let mut trace: Vec<f64> = Vec::new();
    let mut status = SolveStatus::IterationCap;
    let mut outer = 0;
    while outer < cfg.max_outer_iters {
        outer += 1;
        let (prev_n, prev_alpha) = (n.clone(), alpha.clone());
        n = n_block(&prob, &alpha, &n, cfg)?.n;
        for i in 0..scen.len() {
            alpha[i] = alpha_block(&prob, &n, &alpha, i, cfg)?.alpha_i;
        }
        let u = prob.utility(&n, &alpha);
        if !u.is_finite() {
            return Err(Error::InvalidState(format!(
                "utility became {u} at outer iteration {outer}"
            )));
        }
        let step = relative_change(&prev_n, &n).max(relative_change(&prev_alpha, &alpha));
        let done = step <= cfg.outer_step_tol
            && trace
                .last()
                .is_some_and(|&prev| (u - prev).abs() <= cfg.outer_tol * u.abs().max(1.0));
        trace.push(u);
        if done {
            status = SolveStatus::Converged;
            break;
        }
    }
    let u = *trace.last().expect("at least one outer iteration");
    finish(&prob, DecisionVector { n, alpha }, u, trace, status, outer)
}

fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs())
        .fold(0.0, f64::max)
}

/// The start point only fixes `alpha`; the first `n` block moves every
/// `n_i` into its energy-feasible interval, which must therefore exist.
fn check_start(prob: &Problem, alpha: &[f64]) -> Result<()> {
    let mut diag = Vec::new();
    for i in 0..prob.len() {
        match prob.n_bounds(i, alpha) {
            Ok(_) => {}
            Err(Error::Infeasible(d)) => diag.extend(d.into_iter().map(|mut d| {
                let n_max = prob.n_max(i);
                let budget = prob.budget(i, n_max);
                d.slack = Some(prob.slack(i, &with(alpha.len(), i, n_max), alpha));
                d.reason = format!(
                    "{} at attempt odds {}; harvest at n_max is {budget:.6e} J per cycle",
                    d.reason, alpha[i]
                );
                d
            })),
            Err(e) => return Err(e),
        }
    }
    if diag.is_empty() {
        Ok(())
    } else {
        Err(Error::Infeasible(diag))
    }
}

fn with(len: usize, i: usize, v: f64) -> Vec<f64> {
    let mut out = vec![1.0; len];
    out[i] = v;
    out
}

fn finish(
    prob: &Problem,
    decision: DecisionVector,
    utility: f64,
    utility_trace: Vec<f64>,
    status: SolveStatus,
    outer_iterations: usize,
) -> Result<OptResult> {
    let scen = prob.scen;
    let perf = throughput(scen, &decision.n, &decision.alpha)?;
    let energy = (0..scen.len())
        .map(|i| energy_cycle(scen, i, &decision.n, &decision.alpha))
        .collect::<Result<Vec<_>>>()?;
    let slack = energy.iter().map(EnergyBreakdown::slack).collect();
    let mut warnings = Vec::new();
    let recovered_w: Vec<f64> = scen
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let m = node.duty.sleep_slots(decision.n[i]);
            let w = window_from_alpha(decision.alpha[i], m);
            if w < 1.0 {
                warnings.push(format!(
                    "node {} ({}): recovered contention window {w:.4} is below 1",
                    i, node.id
                ));
            }
            w
        })
        .collect();
    if status == SolveStatus::IterationCap {
        warnings.push(format!(
            "outer loop stopped at the iteration cap ({outer_iterations}) before reaching outer_tol"
        ));
    }
    let integer_decision = round_decision(prob, &decision)?;
    if !integer_decision.feasible {
        warnings.push("integer operating point violates an energy constraint".into());
    }
    Ok(OptResult {
        decision,
        utility,
        utility_trace,
        perf,
        energy,
        slack,
        recovered_w,
        integer_decision,
        warnings,
        status,
        outer_iterations,
    })
}

fn round_decision(prob: &Problem, dv: &DecisionVector) -> Result<IntegerDecision> {
    let scen = prob.scen;
    let nodes = scen.len();
    let mut n: Vec<f64> = dv.n.iter().map(|v| v.floor().max(1.0)).collect();
    // The slack of node i depends on n_i alone once alpha is fixed.
    for i in 0..nodes {
        let ceiling = dv.n[i].ceil().min(prob.n_max(i));
        while n[i] + 1.0 <= ceiling {
            let mut trial = n.clone();
            trial[i] += 1.0;
            if prob.slack(i, &trial, &dv.alpha) < 0.0 {
                break;
            }
            n = trial;
        }
    }
    let slack_continuous_alpha = (0..nodes).map(|i| prob.slack(i, &n, &dv.alpha)).collect();

    let mut m = Vec::with_capacity(nodes);
    let mut w = Vec::with_capacity(nodes);
    let mut alpha_int = Vec::with_capacity(nodes);
    for (i, node) in scen.nodes.iter().enumerate() {
        let mi = node.duty.sleep_slots(n[i]);
        let wi = window_from_alpha(dv.alpha[i], mi).round().max(1.0);
        alpha_int.push(alpha_from_tau(tau_from_window(wi, mi)));
        m.push(mi as u32);
        w.push(wi as u32);
    }
    let slack: Vec<f64> = (0..nodes).map(|i| prob.slack(i, &n, &alpha_int)).collect();
    let feasible = slack.iter().all(|&s| s >= 0.0);
    Ok(IntegerDecision {
        n: n.iter().map(|&v| v as u32).collect(),
        m,
        w,
        slack_continuous_alpha,
        slack,
        feasible,
    })
}

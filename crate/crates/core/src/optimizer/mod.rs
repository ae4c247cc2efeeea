//! Proportionally fair allocation of samples per cycle and attempt rates.
//!
//! Maximizes `U = sum_i log S_i(n, alpha)` subject to `0 < alpha_i <= 0.5`,
//! `1 <= n_i <= n_max_i` and per-node energy neutrality. The problem is not
//! jointly concave; it is solved by block coordinate ascent where each block
//! (all of `n`, then each `alpha_i` in turn) is a difference of concave
//! functions handled by the convex-concave procedure: the subtracted
//! `N log X` term is linearized and the surrogate `sum log x - gamma x` is
//! maximized in closed form over the block's feasible interval.

mod bcd;
mod blocks;
mod kkt;

pub use bcd::{solve_bcd, IntegerDecision, OptResult, SolveStatus};
pub use blocks::{
    bisect_log_linear, maximize_log_linear, solve_alpha_block, solve_n_block, AlphaBlock, NBlock,
};
pub use kkt::{check_kkt, BoundPosition, KktEntry, KktReport, Variable};

use serde::{Deserialize, Serialize};

use crate::energy::{energy_coefficients, peer_product, EnergyCoefficients};
use crate::error::{Error, NodeDiagnosis, Result};
use crate::mac::{node_timings, x_unchecked};
use crate::params::Scenario;
use crate::timing::{t_collision, NodeTiming};

/// Largest admissible attempt odds (`tau <= 1/3`).
pub const ALPHA_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Relative utility change that ends the outer loop.
    pub outer_tol: f64,
    /// Largest relative change of any `n_i` or `alpha_i` over one outer
    /// iteration that still counts as settled.
    pub outer_step_tol: f64,
    /// Relative objective change (and step) that ends an inner loop.
    pub inner_tol: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    /// Lower bound on every `alpha_i`.
    pub alpha_floor: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            outer_tol: 1e-8,
            outer_step_tol: 1e-9,
            inner_tol: 1e-10,
            max_outer_iters: 5000,
            max_inner_iters: 100,
            alpha_floor: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("outer_tol", self.outer_tol),
            ("outer_step_tol", self.outer_step_tol),
            ("inner_tol", self.inner_tol),
            ("alpha_floor", self.alpha_floor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    format!("config.{name}"),
                    format!("must be > 0, got {v}"),
                ));
            }
        }
        if self.alpha_floor >= ALPHA_MAX {
            return Err(Error::param("config.alpha_floor", "must be below 0.5"));
        }
        if self.max_outer_iters < 1 {
            return Err(Error::param("config.max_outer_iters", "must be >= 1"));
        }
        if self.max_inner_iters < 1 {
            return Err(Error::param("config.max_inner_iters", "must be >= 1"));
        }
        Ok(())
    }
}

/// Parses a JSON optimizer configuration; omitted fields keep their
/// defaults.
pub fn parse_config(text: &str) -> Result<OptimizerConfig> {
    let cfg: OptimizerConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<std::path::Path>) -> Result<OptimizerConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Optimization variables: continuous samples per cycle and attempt odds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionVector {
    pub n: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl DecisionVector {
    pub fn new(n: Vec<f64>, alpha: Vec<f64>) -> Self {
        DecisionVector { n, alpha }
    }

    /// `n = 1`, `alpha = 0.5` for every node.
    pub fn initial(nodes: usize) -> Self {
        DecisionVector {
            n: vec![1.0; nodes],
            alpha: vec![ALPHA_MAX; nodes],
        }
    }

    /// Checks the box constraints on `n` and `alpha`.
    pub fn check_box(&self, scen: &Scenario) -> Result<()> {
        scen.check_point(&self.n, &self.alpha)?;
        for (i, node) in scen.nodes.iter().enumerate() {
            if self.n[i] > f64::from(node.duty.n_max) {
                return Err(Error::param(
                    format!("n[{i}]"),
                    format!("exceeds n_max = {}", node.duty.n_max),
                ));
            }
            if self.alpha[i] > ALPHA_MAX {
                return Err(Error::param(format!("alpha[{i}]"), "exceeds 0.5"));
            }
        }
        Ok(())
    }
}

/// `sum_i log S_i`, natural log.
pub fn utility(scen: &Scenario, dv: &DecisionVector) -> Result<f64> {
    dv.check_box(scen)?;
    let prob = Problem::new(scen)?;
    let u = prob.utility(&dv.n, &dv.alpha);
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::InvalidState(format!("non-finite utility {u}")))
    }
}

/// Scenario constants cached for repeated evaluation.
pub(crate) struct Problem<'a> {
    pub scen: &'a Scenario,
    pub timings: Vec<NodeTiming>,
    pub coef: Vec<EnergyCoefficients>,
    pub t_col: f64,
}

impl<'a> Problem<'a> {
    pub fn new(scen: &'a Scenario) -> Result<Self> {
        scen.validate()?;
        let coef = (0..scen.len())
            .map(|i| energy_coefficients(scen, i))
            .collect::<Result<_>>()?;
        Ok(Problem {
            scen,
            timings: node_timings(scen)?,
            coef,
            t_col: t_collision(&scen.protocol).total,
        })
    }

    pub fn len(&self) -> usize {
        self.scen.len()
    }

    pub fn n_max(&self, i: usize) -> f64 {
        f64::from(self.scen.nodes[i].duty.n_max)
    }

    pub fn x(&self, n: &[f64], alpha: &[f64]) -> f64 {
        x_unchecked(self.scen, &self.timings, n, alpha)
    }

    pub fn utility(&self, n: &[f64], alpha: &[f64]) -> f64 {
        let x = self.x(n, alpha);
        let num: f64 = self
            .scen
            .nodes
            .iter()
            .zip(n.iter().zip(alpha))
            .map(|(node, (ni, ai))| (ai * ni * node.link.l).ln())
            .sum();
        num - self.len() as f64 * (x * self.t_col).ln()
    }

    pub fn slack(&self, i: usize, n: &[f64], alpha: &[f64]) -> f64 {
        self.coef[i].slack(n[i], alpha[i], peer_product(alpha, i))
    }

    pub fn budget(&self, i: usize, n: f64) -> f64 {
        let node = &self.scen.nodes[i];
        node.power.phi * node.duty.sleep_slots(n) * self.scen.protocol.sigma
    }

    /// `dX/dn_i`.
    pub fn dx_dn(&self, i: usize, alpha: &[f64]) -> f64 {
        self.timings[i].per_sample * alpha[i] / self.t_col
    }

    /// `dX/dalpha_i`.
    pub fn dx_dalpha(&self, i: usize, n: &[f64], alpha: &[f64]) -> f64 {
        let others: f64 = alpha
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, a)| 1.0 + a)
            .product();
        let tm = &self.timings[i];
        tm.per_sample * n[i] / self.t_col + (tm.success_overhead / self.t_col - 1.0) + others
    }

    /// Feasible interval of `n_i` with every `alpha` fixed: the box
    /// intersected with the node's energy constraint, which is linear in
    /// `n_i` and may bound it from either side.
    pub fn n_bounds(&self, i: usize, alpha: &[f64]) -> Result<(f64, f64)> {
        let c = &self.coef[i];
        let peers = peer_product(alpha, i);
        let slope = c.a + c.c * peers;
        let rhs = c.f - c.b / alpha[i] - c.d * peers;
        let (mut lo, mut hi) = (1.0f64, self.n_max(i));
        if slope > 0.0 {
            hi = hi.min(rhs / slope);
        } else if slope < 0.0 {
            lo = lo.max(rhs / slope);
        } else if rhs < 0.0 {
            return Err(self.infeasible(
                i,
                "energy budget cannot cover the fixed per-cycle cost",
                Some(rhs),
            ));
        }
        resolve_interval(lo, hi).ok_or_else(|| {
            self.infeasible(
                i,
                &format!("no sample count in [1, {}] satisfies its energy budget (energy range [{lo:.6}, {hi:.6}])", self.n_max(i)),
                None,
            )
        })
    }

    /// Feasible interval of `alpha_i` with `n` and the other `alpha_j`
    /// fixed. Raising `alpha_i` shortens node `i`'s listening and lowers
    /// the chance that its peers succeed, so every energy constraint yields
    /// a lower bound.
    pub fn alpha_bounds(
        &self,
        i: usize,
        n: &[f64],
        alpha: &[f64],
        floor: f64,
    ) -> Result<(f64, f64)> {
        let c = &self.coef[i];
        let own_rhs = c.f - c.a * n[i] - (c.c * n[i] + c.d) * peer_product(alpha, i);
        if own_rhs <= 0.0 {
            return Err(self.infeasible(
                i,
                "no attempt rate satisfies its energy budget at the current sample counts",
                Some(own_rhs),
            ));
        }
        let mut lo = floor.max(c.b / own_rhs);
        for j in (0..self.len()).filter(|&j| j != i) {
            let cj = &self.coef[j];
            let rhs = cj.f - cj.a * n[j] - cj.b / alpha[j];
            if rhs <= 0.0 {
                return Err(self.infeasible(
                    j,
                    "energy budget is exhausted before its transmission cost",
                    Some(rhs),
                ));
            }
            let rest: f64 = alpha
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, a)| 1.0 / (1.0 + a))
                .product();
            let need = (cj.c * n[j] + cj.d) * rest;
            lo = lo.max(need / rhs - 1.0);
        }
        resolve_interval(lo, ALPHA_MAX).ok_or_else(|| {
            self.infeasible(
                i,
                &format!("energy constraints need alpha >= {lo:.6} but the cap is 0.5"),
                None,
            )
        })
    }

    pub fn infeasible(&self, i: usize, reason: &str, slack: Option<f64>) -> Error {
        Error::Infeasible(vec![NodeDiagnosis {
            node: i,
            id: self.scen.nodes[i].id.clone(),
            reason: reason.to_string(),
            slack,
        }])
    }
}

/// Accepts intervals inverted by rounding only.
fn resolve_interval(lo: f64, hi: f64) -> Option<(f64, f64)> {
    if lo <= hi {
        Some((lo, hi))
    } else if lo - hi <= 1e-10 * hi.abs() {
        Some((hi, hi))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        OptimizerConfig::default().validate().unwrap();
        let bad = OptimizerConfig {
            max_outer_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            inner_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_parses_partial_json() {
        let c: OptimizerConfig = serde_json::from_str(r#"{"outer_tol": 1e-6}"#).unwrap();
        assert_eq!(c.outer_tol, 1e-6);
        assert_eq!(c.max_outer_iters, 5000);
        assert!(serde_json::from_str::<OptimizerConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(parse_config(r#"{"max_inner_iters": 0}"#).is_err());
        assert_eq!(parse_config("{}").unwrap(), OptimizerConfig::default());
    }

    #[test]
    fn interval_tolerates_rounding_only() {
        assert_eq!(resolve_interval(0.1, 0.5), Some((0.1, 0.5)));
        assert_eq!(resolve_interval(0.5 + 1e-16, 0.5), Some((0.5, 0.5)));
        assert_eq!(resolve_interval(0.6, 0.5), None);
    }
}

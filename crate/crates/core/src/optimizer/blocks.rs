use crate::error::{Error, Result};
use crate::params::Scenario;

use super::{OptimizerConfig, Problem};

/// Maximizer of `log x - gamma x` over `[lo, hi]`.
///
/// The function is strictly concave with stationary point `1/gamma`, so the
/// answer is that point clipped to the interval; for `gamma <= 0` the
/// objective is increasing and `hi` wins.
pub fn maximize_log_linear(gamma: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if gamma <= 0.0 {
        hi
    } else {
        (1.0 / gamma).clamp(lo, hi)
    }
}

/// Same problem solved by bisection on the derivative `1/x - gamma`.
pub fn bisect_log_linear(gamma: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let d = |x: f64| 1.0 / x - gamma;
    if d(hi) >= 0.0 {
        return hi;
    }
    if d(lo) <= 0.0 {
        return lo;
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol * b.abs().max(f64::MIN_POSITIVE) {
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

#[derive(Debug, Clone, PartialEq)]
pub struct NBlock {
    pub n: Vec<f64>,
    /// Block objective `sum log n_i - N log X` after each iterate, starting
    /// with the input point.
    pub objective_trace: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBlock {
    pub alpha_i: f64,
    /// Block objective `log alpha_i - N log X` per iterate.
    pub objective_trace: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub converged: bool,
}

/// Maximizes the utility over all `n_i` jointly with `alpha` fixed.
pub fn solve_n_block(
    scen: &Scenario,
    alpha: &[f64],
    n0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<NBlock> {
    cfg.validate()?;
    scen.check_point(n0, alpha)?;
    let prob = Problem::new(scen)?;
    n_block(&prob, alpha, n0, cfg)
}

/// Maximizes the utility over `alpha_i` with everything else fixed.
pub fn solve_alpha_block(
    scen: &Scenario,
    n: &[f64],
    alpha: &[f64],
    i: usize,
    cfg: &OptimizerConfig,
) -> Result<AlphaBlock> {
    cfg.validate()?;
    scen.check_point(n, alpha)?;
    if i >= scen.len() {
        return Err(Error::param("node", format!("index {i} out of range")));
    }
    let prob = Problem::new(scen)?;
    alpha_block(&prob, n, alpha, i, cfg)
}

fn stalled(prev_f: f64, f: f64, step: f64, tol: f64) -> bool {
    (f - prev_f).abs() <= tol * f.abs().max(1.0) && step <= tol
}

pub(crate) fn n_block(
    prob: &Problem,
    alpha: &[f64],
    n0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<NBlock> {
    let nodes = prob.len();
    let mut lower = Vec::with_capacity(nodes);
    let mut upper = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let (lo, hi) = prob.n_bounds(i, alpha)?;
        lower.push(lo);
        upper.push(hi);
    }
    let objective = |n: &[f64]| -> f64 {
        n.iter().map(|v| v.ln()).sum::<f64>() - nodes as f64 * prob.x(n, alpha).ln()
    };
    let mut n: Vec<f64> = n0
        .iter()
        .zip(lower.iter().zip(&upper))
        .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
        .collect();
    let mut f = objective(&n);
    let mut trace = vec![f];
    let mut converged = false;
    for _ in 0..cfg.max_inner_iters {
        let x = prob.x(&n, alpha);
        let next: Vec<f64> = (0..nodes)
            .map(|i| {
                let gamma = nodes as f64 * prob.dx_dn(i, alpha) / x;
                maximize_log_linear(gamma, lower[i], upper[i])
            })
            .collect();
        let step = relative_step(&n, &next);
        let f_next = objective(&next);
        n = next;
        trace.push(f_next);
        let done = stalled(f, f_next, step, cfg.inner_tol);
        f = f_next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(NBlock {
        n,
        objective_trace: trace,
        lower,
        upper,
        converged,
    })
}

pub(crate) fn alpha_block(
    prob: &Problem,
    n: &[f64],
    alpha: &[f64],
    i: usize,
    cfg: &OptimizerConfig,
) -> Result<AlphaBlock> {
    let (lo, hi) = prob.alpha_bounds(i, n, alpha, cfg.alpha_floor)?;
    let nodes = prob.len() as f64;
    let mut work = alpha.to_vec();
    let objective = |a: &[f64]| a[i].ln() - nodes * prob.x(n, a).ln();
    work[i] = work[i].clamp(lo, hi);
    let mut f = objective(&work);
    let mut trace = vec![f];
    let mut converged = false;
    for _ in 0..cfg.max_inner_iters {
        let gamma = nodes * prob.dx_dalpha(i, n, &work) / prob.x(n, &work);
        let prev = work[i];
        work[i] = maximize_log_linear(gamma, lo, hi);
        let step = (work[i] - prev).abs() / prev.abs().max(1.0);
        let f_next = objective(&work);
        trace.push(f_next);
        let done = stalled(f, f_next, step, cfg.inner_tol);
        f = f_next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(AlphaBlock {
        alpha_i: work[i],
        objective_trace: trace,
        lower: lo,
        upper: hi,
        converged,
    })
}

fn relative_step(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{DutyCycle, LinkParams, NodeParams, PowerProfile, ProtocolParams};
    use proptest::prelude::*;

    fn scenario(rates: &[f64], phi: f64) -> Scenario {
        let nodes = rates
            .iter()
            .enumerate()
            .map(|(i, r)| NodeParams {
                id: format!("s{i}"),
                link: LinkParams {
                    l: 400.0,
                    rate: r * 1e6,
                },
                duty: DutyCycle {
                    h: 3,
                    g: 2,
                    n_max: 10 + 10 * i as u32,
                },
                power: PowerProfile {
                    p_tx: 15e-3,
                    p_rx: 11.37e-3,
                    p_listen: 10e-3,
                    p_acq: 5e-3,
                    p_proc: 6e-3,
                    e_bg: 0.0,
                    phi,
                },
            })
            .collect();
        Scenario {
            name: "t".into(),
            protocol: ProtocolParams::ofdm_default(),
            nodes,
        }
    }

    #[test]
    fn closed_form_matches_bisection_on_examples() {
        for (g, lo, hi) in [
            (3.0, 0.1, 0.5),
            (1.0, 0.1, 0.5),
            (100.0, 0.1, 0.5),
            (-2.0, 0.1, 0.5),
            (0.0, 1.0, 8.0),
        ] {
            let a = maximize_log_linear(g, lo, hi);
            let b = bisect_log_linear(g, lo, hi, 1e-14);
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{g}: {a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn closed_form_matches_bisection(
            g in -5.0f64..200.0,
            lo in 1e-6f64..0.4,
            width in 0.0f64..0.5,
        ) {
            let hi = lo + width;
            let a = maximize_log_linear(g, lo, hi);
            let b = bisect_log_linear(g, lo, hi, 1e-14);
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn n_block_objective_never_decreases() {
        let scen = scenario(&[11.0, 5.5, 6.0], 40e-3);
        let prob = Problem::new(&scen).unwrap();
        let alpha = [0.2, 0.3, 0.1];
        let r = n_block(&prob, &alpha, &[1.0, 1.0, 1.0], &OptimizerConfig::default()).unwrap();
        for w in r.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0), "{w:?}");
        }
        for i in 0..3 {
            assert!(r.n[i] >= r.lower[i] && r.n[i] <= r.upper[i]);
            assert!(prob.slack(i, &r.n, &alpha) >= -1e-9 * prob.budget(i, r.n[i]));
        }
    }

    #[test]
    fn n_block_pushes_samples_to_their_upper_bound() {
        // Each n_i enters the surrogate's gradient with a positive coefficient
        // smaller than 1/n_i for any n_i above 1, so the largest feasible
        // aggregate is optimal.
        let scen = scenario(&[11.0, 11.0], 60e-3);
        let prob = Problem::new(&scen).unwrap();
        let alpha = [0.05, 0.05];
        let r = n_block(&prob, &alpha, &[1.0, 1.0], &OptimizerConfig::default()).unwrap();
        assert!(r.converged);
        for i in 0..2 {
            assert_eq!(r.n[i], r.upper[i]);
        }
    }

    #[test]
    fn alpha_block_matches_golden_section() {
        let scen = scenario(&[11.0, 5.5, 9.0], 40e-3);
        let prob = Problem::new(&scen).unwrap();
        let n = [10.0, 20.0, 30.0];
        let alpha = [0.3, 0.2, 0.4];
        let cfg = OptimizerConfig::default();
        for i in 0..3 {
            let r = alpha_block(&prob, &n, &alpha, i, &cfg).unwrap();
            assert!(r.converged);
            let f = |a: f64| {
                let mut v = alpha.to_vec();
                v[i] = a;
                prob.utility(&n, &v)
            };
            let (mut a, mut b) = (r.lower, r.upper);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let c = b - phi * (b - a);
                let d = a + phi * (b - a);
                if f(c) > f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let best = 0.5 * (a + b);
            assert!(
                (r.alpha_i - best).abs() <= 1e-6,
                "node {i}: {} vs {best}",
                r.alpha_i
            );
        }
    }

    #[test]
    fn alpha_block_reports_infeasible_node() {
        let scen = scenario(&[11.0, 11.0], 1e-6);
        let prob = Problem::new(&scen).unwrap();
        let err = alpha_block(
            &prob,
            &[1.0, 1.0],
            &[0.5, 0.5],
            1,
            &OptimizerConfig::default(),
        )
        .unwrap_err();
        match err {
            Error::Infeasible(d) => assert!(!d.is_empty()),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn public_wrappers_validate_input() {
        let scen = scenario(&[11.0], 100e-3);
        let cfg = OptimizerConfig::default();
        assert!(solve_alpha_block(&scen, &[1.0], &[0.1], 1, &cfg).is_err());
        assert!(solve_n_block(&scen, &[0.1, 0.1], &[1.0], &cfg).is_err());
        let r = solve_n_block(&scen, &[0.1], &[1.0], &cfg).unwrap();
        assert_eq!(r.n.len(), 1);
    }
}

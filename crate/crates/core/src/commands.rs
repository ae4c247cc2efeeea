//! Command implementations behind the `wpcsma` binary. Each command builds
//! its tables in memory; the `write_*` helpers put them on disk.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::energy::energy_cycle;
use crate::error::{Error, Result};
use crate::mac::{slot_probabilities, throughput, window_from_alpha};
use crate::optimizer::{solve_bcd, utility, DecisionVector, OptResult, OptimizerConfig};
use crate::params::Scenario;
use crate::point::PointFile;
use crate::report::{save_json, Cell, ResultTable};
use crate::scenario::bundled;
use crate::sim::{
    compare_energy, simulate as run_sim, simulate_with_trace, SimConfig, SimPoint, SimStats,
};

/// Performance and energy of every node at a fixed decision point.
pub fn analyze(scen: &Scenario, dv: &DecisionVector) -> Result<ResultTable> {
    dv.check_box(scen)?;
    let perf = throughput(scen, &dv.n, &dv.alpha)?;
    let mut t = ResultTable::new(&[
        "id",
        "n",
        "alpha",
        "tau",
        "w_recovered",
        "throughput_bps",
        "airtime",
        "energy_consumed_j",
        "energy_received_j",
        "slack_j",
        "e_acq_j",
        "e_proc_j",
        "e_backoff_j",
        "e_data_j",
        "e_bg_j",
    ]);
    t.meta("command", "analyze")
        .meta("scenario", &scen.name)
        .meta("utility", fmt(utility(scen, dv)?))
        .meta("x_value", fmt(perf.x_value))
        .meta("p_idle", fmt(perf.slot_probs.p_idle))
        .meta("p_col", fmt(perf.slot_probs.p_col));
    for (i, node) in scen.nodes.iter().enumerate() {
        let e = energy_cycle(scen, i, &dv.n, &dv.alpha)?;
        t.push(vec![
            node.id.as_str().into(),
            dv.n[i].into(),
            dv.alpha[i].into(),
            perf.tau[i].into(),
            window_from_alpha(dv.alpha[i], node.duty.sleep_slots(dv.n[i])).into(),
            perf.throughput[i].into(),
            perf.airtime[i].into(),
            e.e_total.into(),
            e.budget.into(),
            e.slack().into(),
            e.e_acq.into(),
            e.e_proc.into(),
            e.e_backoff.into(),
            e.e_data.into(),
            e.e_bg.into(),
        ]);
    }
    Ok(t)
}

pub struct OptimizeOutput {
    pub result: OptResult,
    pub table: ResultTable,
    pub trace: ResultTable,
}

pub const UTILITY_TRACE_FILE: &str = "utility_trace.csv";

pub fn optimize(scen: &Scenario, cfg: &OptimizerConfig) -> Result<OptimizeOutput> {
    let result = solve_bcd(scen, cfg, None)?;
    let mut table = ResultTable::new(&[
        "id",
        "n_max",
        "n_opt",
        "alpha_opt",
        "tau",
        "w_recovered",
        "throughput_bps",
        "airtime",
        "energy_consumed_j",
        "energy_received_j",
        "slack_j",
        "n_int",
        "w_int",
        "slack_int_j",
    ]);
    table
        .meta("command", "optimize")
        .meta("scenario", &scen.name)
        .meta("status", result.status.as_str())
        .meta("iterations", result.outer_iterations)
        .meta("utility", fmt(result.utility))
        .meta("outer_tol", fmt(cfg.outer_tol))
        .meta("inner_tol", fmt(cfg.inner_tol))
        .meta("max_outer_iters", cfg.max_outer_iters)
        .meta("max_inner_iters", cfg.max_inner_iters)
        .meta("alpha_floor", fmt(cfg.alpha_floor))
        .meta("integer_point_feasible", result.integer_decision.feasible)
        .meta("utility_trace", UTILITY_TRACE_FILE);
    for w in &result.warnings {
        table.meta("warning", w);
    }
    let dv = &result.decision;
    let int = &result.integer_decision;
    for (i, node) in scen.nodes.iter().enumerate() {
        let e = &result.energy[i];
        table.push(vec![
            node.id.as_str().into(),
            node.duty.n_max.into(),
            dv.n[i].into(),
            dv.alpha[i].into(),
            result.perf.tau[i].into(),
            result.recovered_w[i].into(),
            result.perf.throughput[i].into(),
            result.perf.airtime[i].into(),
            e.e_total.into(),
            e.budget.into(),
            result.slack[i].into(),
            int.n[i].into(),
            int.w[i].into(),
            int.slack[i].into(),
        ]);
    }
    let mut trace = ResultTable::new(&["iteration", "utility"]);
    trace
        .meta("command", "optimize")
        .meta("scenario", &scen.name);
    for (k, u) in result.utility_trace.iter().enumerate() {
        trace.push(vec![k.into(), (*u).into()]);
    }
    Ok(OptimizeOutput {
        result,
        table,
        trace,
    })
}

/// Writes `results.csv`, `results.json`, `utility_trace.csv` and
/// `point.json` (the continuous optimum, reusable with `--point`).
pub fn write_optimize(out: &OptimizeOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let r = &out.result;
    let files = vec![
        dir.join("results.csv"),
        dir.join("results.json"),
        dir.join(UTILITY_TRACE_FILE),
        dir.join("point.json"),
    ];
    out.table.save_csv(&files[0])?;
    let sidecar = json!({
        "table": out.table.to_json(),
        "status": r.status,
        "utility": r.utility,
        "utility_trace": r.utility_trace,
        "decision": r.decision,
        "integer_decision": r.integer_decision,
        "warnings": r.warnings,
    });
    save_json(&sidecar, &files[1])?;
    out.trace.save_csv(&files[2])?;
    save_json(&PointFile::from_decision(&r.decision), &files[3])?;
    Ok(files)
}

pub struct SimulateOutput {
    pub stats: SimStats,
    pub nodes: ResultTable,
    pub slots: ResultTable,
    pub energy: ResultTable,
}

/// Simulates an integer point and sets the results beside the analytical
/// model evaluated at the same point.
pub fn simulate(scen: &Scenario, point: &SimPoint, cfg: &SimConfig) -> Result<SimulateOutput> {
    let stats = run_sim(scen, point, cfg)?;
    compare(scen, point, cfg, stats)
}

/// As [`simulate`], also writing the per-slot trace CSV to `trace`.
pub fn simulate_traced(
    scen: &Scenario,
    point: &SimPoint,
    cfg: &SimConfig,
    trace: &Path,
) -> Result<SimulateOutput> {
    let mut f = BufWriter::new(File::create(trace)?);
    let stats = simulate_with_trace(scen, point, cfg, &mut f)?;
    compare(scen, point, cfg, stats)
}

fn compare(
    scen: &Scenario,
    point: &SimPoint,
    cfg: &SimConfig,
    stats: SimStats,
) -> Result<SimulateOutput> {
    let alpha = point.alpha()?;
    let n = point.n_real();
    let perf = throughput(scen, &n, &alpha)?;
    let probs = slot_probabilities(&perf.tau)?;
    let rel = |sim: f64, ana: f64| (sim - ana) / ana;
    let meta = |t: &mut ResultTable| {
        t.meta("command", "simulate")
            .meta("scenario", &scen.name)
            .meta("seed", cfg.seed)
            .meta("rng", stats.rng)
            .meta("slots", cfg.n_slots)
            .meta("warmup_slots", cfg.warmup_slots)
            .meta("ci", "95% batch means, 20 batches");
    };

    let mut nodes = ResultTable::new(&[
        "id",
        "n",
        "w",
        "m",
        "tau",
        "throughput_analytical_bps",
        "throughput_sim_bps",
        "throughput_ci_bps",
        "throughput_rel_err",
        "airtime_analytical",
        "airtime_sim",
        "airtime_ci",
        "airtime_rel_err",
        "cycles",
    ]);
    meta(&mut nodes);
    for (i, node) in scen.nodes.iter().enumerate() {
        let (s, a) = (&stats.throughput[i], &stats.airtime[i]);
        nodes.push(vec![
            node.id.as_str().into(),
            point.n[i].into(),
            point.w[i].into(),
            point.m[i].into(),
            perf.tau[i].into(),
            perf.throughput[i].into(),
            s.mean.into(),
            s.half_width.into(),
            rel(s.mean, perf.throughput[i]).into(),
            perf.airtime[i].into(),
            a.mean.into(),
            a.half_width.into(),
            rel(a.mean, perf.airtime[i]).into(),
            stats.cycles[i].into(),
        ]);
    }

    let mut slots = ResultTable::new(&[
        "event",
        "analytical",
        "simulated",
        "ci_half_width",
        "rel_err",
        "binomial_sd",
        "z",
    ]);
    meta(&mut slots);
    let count = stats.slots as f64;
    let mut event = |name: String, ana: f64, sim: &crate::stats::Estimate| {
        let sd = (ana * (1.0 - ana) / count).sqrt();
        slots.push(vec![
            name.into(),
            ana.into(),
            sim.mean.into(),
            sim.half_width.into(),
            rel(sim.mean, ana).into(),
            sd.into(),
            ((sim.mean - ana) / sd).into(),
        ]);
    };
    event("idle".into(), probs.p_idle, &stats.p_idle);
    event("collision".into(), probs.p_col, &stats.p_col);
    for (i, node) in scen.nodes.iter().enumerate() {
        event(
            format!("success:{}", node.id),
            probs.p_succ[i],
            &stats.p_succ[i],
        );
    }

    let mut energy = ResultTable::new(&[
        "id",
        "component",
        "analytical_j",
        "simulated_j",
        "ci_j",
        "rel_err",
    ]);
    meta(&mut energy);
    for chk in compare_energy(scen, point, &stats)? {
        let id = scen.nodes[chk.node].id.as_str();
        for (name, c) in [
            ("acquisition", chk.e_acq),
            ("processing", chk.e_proc),
            ("backoff", chk.e_backoff),
            ("data", chk.e_data),
            ("background", chk.e_bg),
            ("total", chk.e_total),
        ] {
            energy.push(vec![
                id.into(),
                name.into(),
                c.analytical.into(),
                c.simulated.mean.into(),
                c.simulated.half_width.into(),
                c.rel_error.into(),
            ]);
        }
    }
    Ok(SimulateOutput {
        stats,
        nodes,
        slots,
        energy,
    })
}

/// Writes `simulation.csv`, `slot_probabilities.csv`, `energy_check.csv`
/// and `simulation.json`.
pub fn write_simulate(out: &SimulateOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = vec![
        dir.join("simulation.csv"),
        dir.join("slot_probabilities.csv"),
        dir.join("energy_check.csv"),
        dir.join("simulation.json"),
    ];
    out.nodes.save_csv(&files[0])?;
    out.slots.save_csv(&files[1])?;
    out.energy.save_csv(&files[2])?;
    let sidecar = json!({
        "stats": out.stats,
        "nodes": out.nodes.to_json(),
        "slots": out.slots.to_json(),
        "energy": out.energy.to_json(),
    });
    save_json(&sidecar, &files[3])?;
    Ok(files)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Six nodes that differ only in their sample cap.
    One,
    /// Six nodes at increasing distance from the power source.
    Two,
}

impl Experiment {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Experiment::One),
            2 => Ok(Experiment::Two),
            other => Err(Error::param("exp", format!("expected 1 or 2, got {other}"))),
        }
    }

    pub fn scenario(self) -> Result<Scenario> {
        bundled(match self {
            Experiment::One => "example1",
            Experiment::Two => "example2",
        })
    }
}

pub struct ReproduceOutput {
    pub result: OptResult,
    /// File name and contents.
    pub tables: Vec<(String, ResultTable)>,
}

/// Optimizes a bundled scenario and lays out the series behind each plot
/// of the experiment.
pub fn reproduce(exp: Experiment, cfg: &OptimizerConfig) -> Result<ReproduceOutput> {
    let scen = exp.scenario()?;
    let opt = optimize(&scen, cfg)?;
    let r = opt.result;
    let header = |t: &mut ResultTable, what: &str| {
        t.meta("command", "reproduce")
            .meta("scenario", &scen.name)
            .meta("series", what)
            .meta("status", r.status.as_str())
            .meta("iterations", r.outer_iterations)
            .meta("outer_tol", fmt(cfg.outer_tol))
            .meta("inner_tol", fmt(cfg.inner_tol));
    };
    let mut tables = Vec::new();
    match exp {
        Experiment::One => {
            let mut n = ResultTable::new(&["id", "n_max", "n_opt", "n_int"]);
            header(&mut n, "optimal samples per cycle against the cap");
            let mut e = ResultTable::new(&[
                "id",
                "n_max",
                "energy_consumed_j",
                "energy_received_j",
                "slack_j",
                "slack_fraction",
            ]);
            header(&mut e, "energy consumed and received per cycle");
            let mut a = ResultTable::new(&["id", "n_max", "airtime", "throughput_bps"]);
            header(&mut a, "air-time per node");
            for (i, node) in scen.nodes.iter().enumerate() {
                let en = &r.energy[i];
                let id: Cell = node.id.as_str().into();
                n.push(vec![
                    id.clone(),
                    node.duty.n_max.into(),
                    r.decision.n[i].into(),
                    r.integer_decision.n[i].into(),
                ]);
                e.push(vec![
                    id.clone(),
                    node.duty.n_max.into(),
                    en.e_total.into(),
                    en.budget.into(),
                    r.slack[i].into(),
                    (r.slack[i] / en.budget).into(),
                ]);
                a.push(vec![
                    id,
                    node.duty.n_max.into(),
                    r.perf.airtime[i].into(),
                    r.perf.throughput[i].into(),
                ]);
            }
            tables.push(("exp1_optimal_n.csv".to_string(), n));
            tables.push(("exp1_energy.csv".to_string(), e));
            tables.push(("exp1_airtime.csv".to_string(), a));
        }
        Experiment::Two => {
            let mut e = ResultTable::new(&[
                "id",
                "phi_w",
                "rate_bps",
                "energy_consumed_j",
                "energy_received_j",
                "slack_j",
                "slack_fraction",
            ]);
            header(&mut e, "energy consumed and received per cycle");
            let mut a = ResultTable::new(&["id", "rate_bps", "n_opt", "airtime", "throughput_bps"]);
            header(&mut a, "air-time per node");
            for (i, node) in scen.nodes.iter().enumerate() {
                let en = &r.energy[i];
                let id: Cell = node.id.as_str().into();
                e.push(vec![
                    id.clone(),
                    node.power.phi.into(),
                    node.link.rate.into(),
                    en.e_total.into(),
                    en.budget.into(),
                    r.slack[i].into(),
                    (r.slack[i] / en.budget).into(),
                ]);
                a.push(vec![
                    id,
                    node.link.rate.into(),
                    r.decision.n[i].into(),
                    r.perf.airtime[i].into(),
                    r.perf.throughput[i].into(),
                ]);
            }
            tables.push(("exp2_energy.csv".to_string(), e));
            tables.push(("exp2_airtime.csv".to_string(), a));
        }
    }
    Ok(ReproduceOutput { result: r, tables })
}

pub fn write_tables(tables: &[(String, ResultTable)], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|(name, t)| {
            let path = dir.join(name);
            t.save_csv(&path)?;
            Ok(path)
        })
        .collect()
}

fn fmt(v: f64) -> String {
    Cell::Num(v).render()
}

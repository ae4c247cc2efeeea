use serde::Serialize;

use crate::params::Scenario;

use super::{DecisionVector, OptimizerConfig, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "node", rename_all = "lowercase")]
pub enum Variable {
    N(usize),
    Alpha(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundPosition {
    Lower,
    Upper,
    Interior,
    /// Lower and upper bound coincide.
    Pinned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktEntry {
    pub variable: Variable,
    pub value: f64,
    /// Central-difference estimate of `dU` along the coordinate.
    pub derivative: f64,
    pub lower: f64,
    pub upper: f64,
    pub position: BoundPosition,
    pub satisfied: bool,
    /// Set when the coordinate's feasible interval could not be formed.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub tol: f64,
    pub entries: Vec<KktEntry>,
    pub satisfied: bool,
}

impl KktReport {
    pub fn violations(&self) -> impl Iterator<Item = &KktEntry> {
        self.entries.iter().filter(|e| !e.satisfied)
    }
}

const AT_BOUND: f64 = 1e-6;

/// Coordinate-wise first-order check of `dv`.
///
/// Each coordinate's feasible interval is the one the block solvers use
/// (box plus energy constraints with the other coordinates held fixed). A
/// coordinate passes when it sits at a bound and the utility would only
/// improve by leaving the interval, or when its partial derivative is
/// within `tol` of zero.
pub fn check_kkt(scen: &Scenario, dv: &DecisionVector, tol: f64) -> KktReport {
    let mut entries = Vec::new();
    let prob = match dv.check_box(scen).and_then(|_| Problem::new(scen)) {
        Ok(p) => p,
        Err(e) => {
            return KktReport {
                tol,
                entries,
                satisfied: false,
            }
            .with_failure(e.to_string())
        }
    };
    let floor = OptimizerConfig::default().alpha_floor;
    for i in 0..scen.len() {
        let bounds = prob.n_bounds(i, &dv.alpha);
        let d = partial(
            |v| {
                let mut n = dv.n.clone();
                n[i] = v;
                prob.utility(&n, &dv.alpha)
            },
            dv.n[i],
        );
        entries.push(entry(
            Variable::N(i),
            dv.n[i],
            d,
            bounds.map_err(|e| e.to_string()),
            tol,
        ));
    }
    for i in 0..scen.len() {
        let bounds = prob.alpha_bounds(i, &dv.n, &dv.alpha, floor);
        let d = partial(
            |v| {
                let mut a = dv.alpha.clone();
                a[i] = v;
                prob.utility(&dv.n, &a)
            },
            dv.alpha[i],
        );
        entries.push(entry(
            Variable::Alpha(i),
            dv.alpha[i],
            d,
            bounds.map_err(|e| e.to_string()),
            tol,
        ));
    }
    let satisfied = entries.iter().all(|e| e.satisfied);
    KktReport {
        tol,
        entries,
        satisfied,
    }
}

impl KktReport {
    fn with_failure(mut self, note: String) -> Self {
        self.entries.push(KktEntry {
            variable: Variable::N(0),
            value: f64::NAN,
            derivative: f64::NAN,
            lower: f64::NAN,
            upper: f64::NAN,
            position: BoundPosition::Interior,
            satisfied: false,
            note: Some(note),
        });
        self
    }
}

fn partial(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1e-3);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn entry(
    variable: Variable,
    value: f64,
    derivative: f64,
    bounds: Result<(f64, f64), String>,
    tol: f64,
) -> KktEntry {
    let (lower, upper) = match bounds {
        Ok(b) => b,
        Err(note) => {
            return KktEntry {
                variable,
                value,
                derivative,
                lower: f64::NAN,
                upper: f64::NAN,
                position: BoundPosition::Interior,
                satisfied: false,
                note: Some(note),
            }
        }
    };
    let near = |b: f64| (value - b).abs() <= AT_BOUND * b.abs().max(1e-3);
    let position = match (near(lower), near(upper)) {
        (true, true) => BoundPosition::Pinned,
        (true, false) => BoundPosition::Lower,
        (false, true) => BoundPosition::Upper,
        (false, false) => BoundPosition::Interior,
    };
    let satisfied = match position {
        BoundPosition::Pinned => true,
        BoundPosition::Lower => derivative <= tol,
        BoundPosition::Upper => derivative >= -tol,
        BoundPosition::Interior => derivative.abs() <= tol,
    };
    KktEntry {
        variable,
        value,
        derivative,
        lower,
        upper,
        position,
        satisfied,
        note: None,
    }
}

//! Operating-point files: `{"n": [...], "alpha": [...]}` or
//! `{"n": [...], "w": [...]}`, one entry per node.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mac::{alpha_from_tau, tau_from_window, window_from_alpha};
use crate::optimizer::DecisionVector;
use crate::params::Scenario;
use crate::sim::SimPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub n: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
}

impl PointFile {
    pub fn from_decision(dv: &DecisionVector) -> Self {
        PointFile {
            n: dv.n.clone(),
            alpha: Some(dv.alpha.clone()),
            w: None,
        }
    }

    /// Continuous decision vector; a window is mapped to its attempt odds
    /// with `m = n h + g`.
    pub fn decision(&self, scen: &Scenario) -> Result<DecisionVector> {
        self.check_shape(scen)?;
        let alpha = match (&self.alpha, &self.w) {
            (Some(a), None) => a.clone(),
            (None, Some(w)) => scen
                .nodes
                .iter()
                .zip(w.iter().zip(&self.n))
                .enumerate()
                .map(|(i, (node, (&wi, &ni)))| {
                    if !(wi.is_finite() && wi >= 1.0) {
                        return Err(Error::param(
                            format!("point.w[{i}]"),
                            format!("must be >= 1, got {wi}"),
                        ));
                    }
                    Ok(alpha_from_tau(tau_from_window(
                        wi,
                        node.duty.sleep_slots(ni),
                    )))
                })
                .collect::<Result<_>>()?,
            _ => unreachable!("checked by check_shape"),
        };
        let dv = DecisionVector::new(self.n.clone(), alpha);
        scen.check_point(&dv.n, &dv.alpha)?;
        Ok(dv)
    }

    /// Integer operating point for the simulator. `n` must be integral;
    /// windows given as odds are rounded to the nearest integer, at least 1.
    pub fn sim_point(&self, scen: &Scenario) -> Result<SimPoint> {
        self.check_shape(scen)?;
        let n = self
            .n
            .iter()
            .enumerate()
            .map(|(i, &v)| whole(v, 1.0, &format!("point.n[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let w = match (&self.alpha, &self.w) {
            (None, Some(w)) => w
                .iter()
                .enumerate()
                .map(|(i, &v)| whole(v, 1.0, &format!("point.w[{i}]")))
                .collect::<Result<Vec<_>>>()?,
            (Some(a), None) => a
                .iter()
                .zip(scen.nodes.iter().zip(&n))
                .enumerate()
                .map(|(i, (&ai, (node, &ni)))| {
                    if !(ai.is_finite() && ai > 0.0) {
                        return Err(Error::param(
                            format!("point.alpha[{i}]"),
                            format!("must be > 0, got {ai}"),
                        ));
                    }
                    let wi = window_from_alpha(ai, node.duty.sleep_slots(f64::from(ni)));
                    Ok(wi.round().clamp(1.0, f64::from(u32::MAX)) as u32)
                })
                .collect::<Result<Vec<_>>>()?,
            _ => unreachable!("checked by check_shape"),
        };
        let point = SimPoint::from_duty(scen, n, w)?;
        point.validate(scen)?;
        Ok(point)
    }

    fn check_shape(&self, scen: &Scenario) -> Result<()> {
        let other = match (&self.alpha, &self.w) {
            (Some(a), None) => a.len(),
            (None, Some(w)) => w.len(),
            _ => return Err(Error::param("point", "give exactly one of `alpha` and `w`")),
        };
        if self.n.len() != scen.len() || other != scen.len() {
            return Err(Error::param(
                "point",
                format!(
                    "expected {} entries per field for scenario `{}`",
                    scen.len(),
                    scen.name
                ),
            ));
        }
        Ok(())
    }
}

fn whole(v: f64, min: f64, field: &str) -> Result<u32> {
    if v.is_finite() && v >= min && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
        Ok(v as u32)
    } else {
        Err(Error::param(
            field,
            format!("must be an integer >= {min}, got {v}"),
        ))
    }
}

pub fn parse_point(text: &str) -> Result<PointFile> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_point(path: impl AsRef<Path>) -> Result<PointFile> {
    parse_point(&fs::read_to_string(path)?)
}

//! One-dimensional parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_knob, evaluate, retune_mu1, Base, PointReport};
use crate::dynamics::StationaryMethod;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Output {
    #[serde(rename = "C_num")]
    CNum,
    #[serde(rename = "F_num")]
    FNum,
    #[serde(rename = "C_strong")]
    CStrong,
    #[serde(rename = "F_strong")]
    FStrong,
    #[serde(rename = "C_weak")]
    CWeak,
    #[serde(rename = "F_weak")]
    FWeak,
}

impl Output {
    pub const ALL: [Output; 6] = [Output::CNum, Output::FNum, Output::CStrong, Output::FStrong, Output::CWeak, Output::FWeak];

    pub fn name(self) -> &'static str {
        match self {
            Output::CNum => "C_num",
            Output::FNum => "F_num",
            Output::CStrong => "C_strong",
            Output::FStrong => "F_strong",
            Output::CWeak => "C_weak",
            Output::FWeak => "F_weak",
        }
    }

    /// NaN where the closed form does not apply.
    pub fn pick(self, r: &PointReport) -> f64 {
        let nan = f64::NAN;
        match self {
            Output::CNum => r.c_num,
            Output::FNum => r.f_num,
            Output::CStrong => r.c_strong.unwrap_or(nan),
            Output::FStrong => r.f_strong.unwrap_or(nan),
            Output::CWeak => r.c_weak.unwrap_or(nan),
            Output::FWeak => r.f_weak.unwrap_or(nan),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: Base,
    pub knob: String,
    pub grid: Vec<f64>,
    /// Empty means every output.
    #[serde(default)]
    pub outputs: Vec<Output>,
    /// Reset μ₁ to its closed-form optimum at every point.
    #[serde(default)]
    pub optimal_mu1: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSpec("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("sweep grid has non-finite values".into()));
        }
        Ok(())
    }

    pub fn effective_outputs(&self) -> Vec<Output> {
        if self.outputs.is_empty() {
            Output::ALL.to_vec()
        } else {
            self.outputs.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// In the order of [`SweepTable::outputs`]; empty when the point failed.
    pub values: Vec<f64>,
    pub mu1: Option<f64>,
    pub method: Option<StationaryMethod>,
    pub approximate: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub knob: String,
    pub outputs: Vec<Output>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, out: Output) -> Option<Vec<f64>> {
        let k = self.outputs.iter().position(|&o| o == out)?;
        Some(self.rows.iter().map(|r| r.values.get(k).copied().unwrap_or(f64::NAN)).collect())
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn point(spec: &SweepSpec, outputs: &[Output], x: f64) -> SweepRow {
    let run = || -> Result<(f64, PointReport)> {
        let mut m = apply_knob(&spec.base, &spec.knob, x)?.to_model()?;
        if spec.optimal_mu1 {
            m = retune_mu1(&m)?;
        }
        Ok((m.mu1, evaluate(&m)?))
    };
    match run() {
        Ok((mu1, r)) => SweepRow {
            value: x,
            values: outputs.iter().map(|o| o.pick(&r)).collect(),
            mu1: Some(mu1),
            method: Some(r.method),
            approximate: r.approximate,
            error: None,
        },
        Err(e) => SweepRow { value: x, values: Vec::new(), mu1: None, method: None, approximate: false, error: Some(e.to_string()) },
    }
}

pub fn run_sweep_with(spec: &SweepSpec, parallel: bool) -> Result<SweepTable> {
    spec.validate()?;
    let outputs = spec.effective_outputs();
    let rows: Vec<SweepRow> = if parallel {
        spec.grid.par_iter().map(|&x| point(spec, &outputs, x)).collect()
    } else {
        spec.grid.iter().map(|&x| point(spec, &outputs, x)).collect()
    };
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(Error::SweepFailed(rows[0].error.clone().unwrap_or_default()));
    }
    Ok(SweepTable { knob: spec.knob.clone(), outputs, rows })
}

/// Evaluates every grid point on the rayon pool, in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    run_sweep_with(spec, true)
}

//! Sweeps, knob optimization, persistence and the built-in invariant suite.

pub mod optimize;
pub mod persist;
pub mod sweep;
pub mod validate;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytic::{gamma_phi_for_ratio, stationary_target_phase, strong_concurrence_fidelity, strong_optimal, weak_concurrence_fidelity, weak_optimal};
use crate::circuits::CircuitSpec;
use crate::dynamics::{stationary_numeric, StationaryMethod, StationaryResult};
use crate::error::{Error, Result};
use crate::measures::{bell_target, concurrence, fidelity_with};
use crate::model::{ModelSpec, PhaseSpec};

pub use optimize::{optimize_knob, OptimizeReport};
pub use sweep::{run_sweep, SweepRow, SweepSpec, SweepTable};

/// Either a model written directly or a circuit that maps onto one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Model(ModelSpec),
    Circuit(CircuitSpec),
}

impl Base {
    pub fn to_model(&self) -> Result<ModelSpec> {
        match self {
            Base::Model(m) => Ok(*m),
            Base::Circuit(c) => Ok(c.to_model()?.model),
        }
    }

    /// Parses either `{"model": ..}` / `{"circuit": ..}`, a bare circuit with
    /// a `kind` tag, or a bare model.
    pub fn from_json(v: &Value) -> Result<Base> {
        if let Ok(b) = serde_json::from_value::<Base>(v.clone()) {
            return Ok(b);
        }
        if v.get("kind").is_some() {
            return Ok(Base::Circuit(serde_json::from_value(v.clone())?));
        }
        Ok(Base::Model(serde_json::from_value(v.clone())?))
    }
}

/// Pseudo-knob: Γ₁/Γ₂, realised by adjusting Γ_φ at fixed Γ₁.
pub const GAMMA_RATIO: &str = "gamma_ratio";

fn aliases(base: &Base, knob: &str) -> Vec<String> {
    let names: &[&str] = match (base, knob) {
        (Base::Model(_), "theta1") => &["phase1.static"],
        (Base::Model(_), "phi0") => &["phase1.driven.phi0"],
        (Base::Model(_), "omega") => &["omega_a1", "omega_a2"],
        (Base::Circuit(CircuitSpec::ChargeDirect(_)), "phi_x") => &["phi_x1", "phi_x2"],
        (Base::Circuit(CircuitSpec::ChargeDirect(_)), "n_g") => &["n_g1", "n_g2"],
        (Base::Circuit(CircuitSpec::FluxDirect(_)), "phi_c") => &["phi_c1", "phi_c2"],
        _ => &[],
    };
    if names.is_empty() {
        vec![knob.to_string()]
    } else {
        names.iter().map(|s| s.to_string()).collect()
    }
}

fn set_path(root: &mut Value, path: &str, x: f64, knob: &str) -> Result<()> {
    let mut cur = root;
    for key in path.split('.') {
        cur = cur
            .as_object_mut()
            .and_then(|o| o.get_mut(key))
            .ok_or_else(|| Error::UnknownKnob(knob.to_string()))?;
    }
    if !(cur.is_number() || cur.is_null()) {
        return Err(Error::UnknownKnob(knob.to_string()));
    }
    *cur = serde_json::json!(x);
    Ok(())
}

/// Copy of `base` with `knob` set to `x`. Knobs are dotted field paths into
/// the JSON form of the base, a few aliases, or [`GAMMA_RATIO`].
pub fn apply_knob(base: &Base, knob: &str, x: f64) -> Result<Base> {
    if !x.is_finite() {
        return Err(Error::InvalidSpec(format!("knob value {x} is not finite")));
    }
    if knob == GAMMA_RATIO {
        return match base {
            Base::Model(m) => Ok(Base::Model(ModelSpec { gamma_phi: gamma_phi_for_ratio(m.gamma1, x)?, ..*m })),
            Base::Circuit(_) => Err(Error::UnknownKnob(knob.to_string())),
        };
    }
    let mut v = serde_json::to_value(base)?;
    let inner = match &mut v {
        Value::Object(o) => o.values_mut().next().ok_or_else(|| Error::UnknownKnob(knob.to_string()))?,
        _ => unreachable!("Base serializes to a map"),
    };
    for path in aliases(base, knob) {
        if path == "kind" {
            return Err(Error::UnknownKnob(knob.to_string()));
        }
        set_path(inner, &path, x, knob)?;
    }
    Ok(serde_json::from_value(v)?)
}

/// Sets μ₁ to the closed-form optimum for the model's rates and drive.
pub fn retune_mu1(m: &ModelSpec) -> Result<ModelSpec> {
    let opt = match m.phase1 {
        PhaseSpec::Static(_) => strong_optimal(m.big_omega(), m.gamma1, m.gamma_phi)?,
        PhaseSpec::Driven { .. } => weak_optimal(m.gamma1, m.gamma_phi)?,
    };
    Ok(ModelSpec { mu1: opt.mu1_opt, ..*m })
}

/// Numeric stationary state with its concurrence and Bell fidelity, beside
/// both closed forms where they apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub c_num: f64,
    pub f_num: f64,
    /// Static phase only.
    pub c_strong: Option<f64>,
    pub f_strong: Option<f64>,
    pub c_weak: Option<f64>,
    pub f_weak: Option<f64>,
    pub method: StationaryMethod,
    pub approximate: bool,
    pub residual: f64,
}

/// C and F of the numeric stationary state, with F against the Bell target
/// the state is expected to approach.
pub fn stationary_measures(spec: &ModelSpec) -> Result<(StationaryResult, f64, f64)> {
    let st = stationary_numeric(spec)?;
    let lab = st.lab_state(0.0);
    let c = concurrence(&lab)?;
    let f = fidelity_with(&lab, &bell_target(stationary_target_phase(spec, 0.0)));
    Ok((st, c, f))
}

pub fn evaluate(spec: &ModelSpec) -> Result<PointReport> {
    let (st, c_num, f_num) = stationary_measures(spec)?;
    let strong = match spec.phase1 {
        PhaseSpec::Static(_) => strong_concurrence_fidelity(spec.big_omega(), spec.mu1, spec.gamma1, spec.gamma_phi).ok(),
        PhaseSpec::Driven { .. } => None,
    };
    let weak = weak_concurrence_fidelity(spec.mu1, spec.gamma1, spec.gamma_phi).ok();
    Ok(PointReport {
        c_num,
        f_num,
        c_strong: strong.map(|s| s.0),
        f_strong: strong.map(|s| s.1),
        c_weak: weak.map(|w| w.0),
        f_weak: weak.map(|w| w.1),
        method: st.method,
        approximate: st.approximate,
        residual: st.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Base {
        Base::Model(ModelSpec::symmetric(100.0, 3.0, 0.0, 1.0, 0.0))
    }

    #[test]
    fn knob_paths_and_aliases() {
        let Base::Model(m) = apply_knob(&model(), "mu2", 4.0).unwrap() else { panic!() };
        assert_eq!(m.mu2, 4.0);
        let Base::Model(m) = apply_knob(&model(), "theta1", 0.7).unwrap() else { panic!() };
        assert_eq!(m.phase1, PhaseSpec::Static(0.7));
        let Base::Model(m) = apply_knob(&model(), "omega", 30.0).unwrap() else { panic!() };
        assert_eq!(m.big_omega(), 60.0);
        let Base::Model(m) = apply_knob(&model(), GAMMA_RATIO, 1.0).unwrap() else { panic!() };
        assert!((m.gamma1 / m.gamma2() - 1.0).abs() < 1e-15);
        assert!(matches!(apply_knob(&model(), "nope", 1.0), Err(Error::UnknownKnob(_))));
        assert!(matches!(apply_knob(&model(), "phase1", 1.0), Err(Error::UnknownKnob(_))));
        assert!(apply_knob(&model(), "mu1", f64::NAN).is_err());
    }

    #[test]
    fn base_json_forms() {
        let m = ModelSpec::symmetric(10.0, 1.0, 0.0, 1.0, 0.0);
        let bare = serde_json::to_value(m).unwrap();
        assert_eq!(Base::from_json(&bare).unwrap(), Base::Model(m));
        let wrapped = serde_json::json!({ "model": bare });
        assert_eq!(Base::from_json(&wrapped).unwrap(), Base::Model(m));
    }

    #[test]
    fn evaluate_reports_closed_forms() {
        let m = retune_mu1(&ModelSpec::symmetric(100.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        let r = evaluate(&m).unwrap();
        assert!((r.c_num - r.c_strong.unwrap()).abs() < 1e-9);
        assert!((r.f_num - r.f_strong.unwrap()).abs() < 1e-9);
        assert!((r.c_num - 0.309_016_994).abs() < 1e-6);
        let driven = ModelSpec { phase1: PhaseSpec::Driven { omega: 100.0, phi0: 0.3 }, ..m };
        let r = evaluate(&retune_mu1(&driven).unwrap()).unwrap();
        assert!(r.c_strong.is_none());
        assert!((r.c_num - r.c_weak.unwrap()).abs() < 1e-9);
        assert!((r.f_num - r.f_weak.unwrap()).abs() < 1e-9);
    }
}

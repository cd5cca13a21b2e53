//! Golden-section maximisation of the stationary concurrence over one knob.

use serde::{Deserialize, Serialize};

use super::{apply_knob, stationary_measures, Base};
use crate::analytic::{strong_optimal, weak_optimal};
use crate::circuits::CircuitSpec;
use crate::error::{Error, Result};
use crate::model::PhaseSpec;

pub const PRESCAN_POINTS: usize = 41;
/// Concurrence differences below this count as flat in the pre-scan.
const FLAT: f64 = 1e-12;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub knob: String,
    pub bounds: (f64, f64),
    pub value: f64,
    pub concurrence: f64,
    pub fidelity: f64,
    /// Knob value from the closed-form optimal condition, when one exists.
    pub closed_form_value: Option<f64>,
    pub closed_form_concurrence: Option<f64>,
    /// |value − closed_form_value| / |closed_form_value|.
    pub relative_gap: Option<f64>,
    /// The optimum sits on a bound, so the true maximum may lie outside.
    pub at_boundary: bool,
    pub evaluations: usize,
    pub scan: Vec<(f64, f64)>,
}

fn concurrence_at(base: &Base, knob: &str, x: f64) -> Result<(f64, f64)> {
    let m = apply_knob(base, knob, x)?.to_model()?;
    let (_, c, f) = stationary_measures(&m)?;
    Ok((c, f))
}

/// Rise then fall, allowing flat runs.
fn is_unimodal(ys: &[f64]) -> bool {
    let mut falling = false;
    for w in ys.windows(2) {
        let d = w[1] - w[0];
        if d > FLAT {
            if falling {
                return false;
            }
        } else if d < -FLAT {
            falling = true;
        }
    }
    true
}

fn closed_form(base: &Base, knob: &str) -> Option<(f64, f64)> {
    match base {
        Base::Model(m) if knob == "mu1" => {
            let opt = match m.phase1 {
                PhaseSpec::Static(_) => strong_optimal(m.big_omega(), m.gamma1, m.gamma_phi).ok()?,
                PhaseSpec::Driven { .. } => weak_optimal(m.gamma1, m.gamma_phi).ok()?,
            };
            Some((opt.mu1_opt, opt.c_max))
        }
        Base::Circuit(c) => {
            let opt = c.optimal().ok()?;
            let matches = match c {
                CircuitSpec::ChargeDirect(_) => knob == "phi_x",
                CircuitSpec::FluxDirect(_) => knob == "phi_c",
                CircuitSpec::ChargeLc(_) => knob == "phi_x",
                CircuitSpec::FluxCoupler(_) => knob == "phi_3",
                CircuitSpec::Cqed(_) => knob == "lambda_d",
            };
            matches.then_some((opt.value, opt.predicted.c_max))
        }
        _ => None,
    }
}

/// Maximises the numeric stationary concurrence over `knob` in `bounds`.
///
/// A coarse pre-scan must show a single peak; the search then runs on the
/// bracket around the best scan point to an absolute tolerance of
/// 1e-6 of the bound width.
pub fn optimize_knob(base: &Base, knob: &str, bounds: (f64, f64)) -> Result<OptimizeReport> {
    let (lo, hi) = bounds;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidSpec(format!("bounds ({lo}, {hi}) must be finite with lo < hi")));
    }
    let width = hi - lo;
    let step = width / (PRESCAN_POINTS - 1) as f64;
    let mut evaluations = 0;
    let mut scan = Vec::with_capacity(PRESCAN_POINTS);
    for k in 0..PRESCAN_POINTS {
        let x = if k == PRESCAN_POINTS - 1 { hi } else { lo + step * k as f64 };
        scan.push((x, concurrence_at(base, knob, x)?.0));
        evaluations += 1;
    }
    let ys: Vec<f64> = scan.iter().map(|p| p.1).collect();
    let peak = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !is_unimodal(&ys) || peak <= FLAT {
        return Err(Error::NotUnimodal { scan });
    }
    let best = ys.iter().position(|&y| y == peak).unwrap();
    let mut a = scan[best.saturating_sub(1)].0;
    let mut b = scan[(best + 1).min(PRESCAN_POINTS - 1)].0;

    let tol = 1e-6 * width;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = concurrence_at(base, knob, x1)?.0;
    let mut f2 = concurrence_at(base, knob, x2)?.0;
    evaluations += 2;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = concurrence_at(base, knob, x1)?.0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = concurrence_at(base, knob, x2)?.0;
        }
        evaluations += 1;
    }
    let mut value = 0.5 * (a + b);
    let (mut c, mut f) = concurrence_at(base, knob, value)?;
    evaluations += 1;
    // a kink or bound can beat the bracket midpoint
    let near: Vec<f64> = [lo, hi].into_iter().filter(|e| (e - value).abs() <= step).collect();
    for edge in near {
        let (ce, fe) = concurrence_at(base, knob, edge)?;
        evaluations += 1;
        if ce > c {
            (value, c, f) = (edge, ce, fe);
        }
    }
    let at_boundary = (value - lo).abs() <= tol || (hi - value).abs() <= tol;
    let cf = closed_form(base, knob);
    Ok(OptimizeReport {
        knob: knob.to_string(),
        bounds,
        value,
        concurrence: c,
        fidelity: f,
        closed_form_value: cf.map(|p| p.0),
        closed_form_concurrence: cf.map(|p| p.1),
        relative_gap: cf.map(|p| (value - p.0).abs() / p.0.abs()),
        at_boundary,
        evaluations,
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn strong_optimum_matches_closed_form() {
        let base = Base::Model(ModelSpec::symmetric(100.0, 0.0, 0.0, 1.0, 0.0));
        let r = optimize_knob(&base, "mu1", (0.5, 15.0)).unwrap();
        assert!(r.relative_gap.unwrap() < 1e-3, "{r:?}");
        assert!((r.concurrence - r.closed_form_concurrence.unwrap()).abs() < 1e-8);
        assert!(!r.at_boundary);
    }

    #[test]
    fn weak_optimum_matches_closed_form() {
        let mut m = ModelSpec::symmetric(200.0, 0.0, 0.0, 1.0, 0.0);
        m.phase1 = PhaseSpec::Driven { omega: 200.0, phi0: 0.0 };
        let r = optimize_knob(&Base::Model(m), "mu1", (0.01, 1.0)).unwrap();
        let expect = 1.0 / (5f64.sqrt() + 1.0);
        assert!((r.value - expect).abs() / expect < 5e-3);
    }

    #[test]
    fn boundary_is_reported() {
        let base = Base::Model(ModelSpec::symmetric(100.0, 0.0, 0.0, 1.0, 0.0));
        let r = optimize_knob(&base, "mu1", (0.5, 3.0)).unwrap();
        assert!(r.at_boundary);
        assert_eq!(r.value, 3.0);
        assert!(r.relative_gap.unwrap() > 0.1);
    }

    #[test]
    fn multimodal_profile_rejected() {
        assert!(is_unimodal(&[0.0, 0.0, 0.1, 0.3, 0.2, 0.2, 0.0]));
        assert!(!is_unimodal(&[0.0, 0.3, 0.1, 0.3, 0.0]));
        // μ₁ = 0 leaves C identically zero: no peak to refine
        let base = Base::Model(ModelSpec::symmetric(100.0, 0.0, 0.0, 1.0, 0.0));
        assert!(matches!(optimize_knob(&base, "mu2", (0.0, 1.0)), Err(Error::NotUnimodal { .. })));
        assert!(optimize_knob(&base, "mu1", (1.0, 1.0)).is_err());
    }
}

//! Built-in invariant suite behind the `validate` subcommand.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{retune_mu1, stationary_measures};
use crate::analytic::{cmax_curve, strong_concurrence_fidelity, weak_concurrence_fidelity};
use crate::blochvec::{decode_matrix, encode_matrix, generator};
use crate::dynamics::{evolve, Tolerances};
use crate::error::Result;
use crate::measures::{concurrence, fidelity_with};
use crate::model::{lindblad_rhs, ModelSpec, PhaseSpec};
use crate::quantum::{dm_from_pure, hermiticity_error, max_abs, DensityMatrix, Ket, Mat4, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed error against `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
}

pub fn random_spec<R: Rng>(rng: &mut R) -> ModelSpec {
    ModelSpec {
        mu1: rng.random_range(0.0..20.0),
        phase1: PhaseSpec::Static(rng.random_range(-PI..PI)),
        mu2: rng.random_range(-5.0..5.0),
        theta2: rng.random_range(-PI..PI),
        omega_a1: rng.random_range(0.0..100.0),
        omega_a2: rng.random_range(0.0..100.0),
        gamma1: rng.random_range(0.1..2.0),
        gamma_phi: rng.random_range(0.0..2.0),
    }
}

/// Full-rank state GG†/tr(GG†) with uniform complex entries in G.
pub fn random_state<R: Rng>(rng: &mut R) -> DensityMatrix {
    let g = Mat4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let p = g * g.adjoint();
    let tr = p.trace();
    DensityMatrix::from_matrix_unchecked(p / tr)
}

pub fn bell_state() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = Ket::from([C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)]);
    dm_from_pure(&v).expect("normalised")
}

fn check(name: &str, worst: f64, tolerance: f64) -> Check {
    Check { name: name.to_string(), passed: worst <= tolerance, worst, tolerance }
}

fn failed(name: &str, tolerance: f64) -> Check {
    check(name, f64::INFINITY, tolerance)
}

fn run(name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    match f() {
        Ok(w) if w.is_finite() => check(name, w, tolerance),
        _ => failed(name, tolerance),
    }
}

pub fn run_suite() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let specs: Vec<ModelSpec> = (0..50).map(|_| random_spec(&mut rng)).collect();
    let states: Vec<DensityMatrix> = (0..50).map(|_| random_state(&mut rng)).collect();
    let peak = retune_mu1(&ModelSpec::symmetric(100.0, 0.0, 0.0, 1.0, 0.0)).expect("valid rates");
    let target_c = (5f64.sqrt() - 1.0) / 4.0;

    vec![
        run("generator preserves trace and hermiticity", 1e-12, || {
            Ok(specs.iter().zip(&states).fold(0.0_f64, |w, (s, r)| {
                let d = lindblad_rhs(s, r.matrix(), 0.0);
                w.max(d.trace().norm() / (1.0 + max_abs(&d))).max(hermiticity_error(&d) / (1.0 + max_abs(&d)))
            }))
        }),
        run("coherent-vector round trip", 1e-14, || {
            Ok(states.iter().fold(0.0_f64, |w, r| w.max(max_abs(&(decode_matrix(&encode_matrix(r.matrix())) - r.matrix())))))
        }),
        run("coherent-vector generator matches master equation", 1e-12, || {
            let mut w = 0.0_f64;
            for (s, r) in specs.iter().zip(&states) {
                let gen = generator(s)?;
                let lhs = gen.apply(&encode_matrix(r.matrix()));
                let rhs = encode_matrix(&lindblad_rhs(s, r.matrix(), 0.0));
                w = w.max((lhs - rhs).amax() / (1.0 + rhs.amax()));
            }
            Ok(w)
        }),
        run("closed form matches exact stationary state", 1e-6, || {
            let mut w = 0.0_f64;
            for &ratio in &[0.2, 1.0, 2.0] {
                for &frac in &[0.01, 0.05, 0.1, 0.25] {
                    let gphi = crate::analytic::gamma_phi_for_ratio(1.0, ratio)?;
                    let m = ModelSpec::symmetric(50.0, frac * 50.0, 0.4, 1.0, gphi);
                    let (_, c, f) = stationary_measures(&m)?;
                    let (ca, fa) = strong_concurrence_fidelity(50.0, m.mu1, 1.0, gphi)?;
                    w = w.max((c - ca).abs()).max((f - fa).abs());
                }
            }
            Ok(w)
        }),
        run("peak concurrence (√5 − 1)/4", 1e-4, || Ok((stationary_measures(&peak)?.1 - target_c).abs())),
        run("Werner concurrence", 1e-10, || {
            let bell = bell_state();
            let mut w = 0.0_f64;
            for k in 0..=20 {
                let p = k as f64 / 20.0;
                let rho = DensityMatrix::from_matrix_unchecked(bell.matrix() * C64::new(p, 0.0) + Mat4::identity() * C64::new((1.0 - p) / 4.0, 0.0));
                w = w.max((concurrence(&rho)? - (0.0f64).max((3.0 * p - 1.0) / 2.0)).abs());
            }
            Ok(w)
        }),
        run("exchange coupling leaves stationary C unchanged", 1e-8, || {
            let c0 = stationary_measures(&peak)?.1;
            let mut w = 0.0_f64;
            for &mu2 in &[0.1, 1.0, 10.0] {
                w = w.max((stationary_measures(&ModelSpec { mu2, ..peak })?.1 - c0).abs());
            }
            Ok(w)
        }),
        run("driven stationary C matches rotating-frame closed form", 1e-6, || {
            let m = ModelSpec { phase1: PhaseSpec::Driven { omega: 200.0, phi0: 0.3 }, ..ModelSpec::symmetric(200.0, 0.0, 0.0, 1.0, 0.0) };
            let m = retune_mu1(&m)?;
            Ok((stationary_measures(&m)?.1 - weak_concurrence_fidelity(m.mu1, 1.0, 0.0)?.0).abs())
        }),
        run("Bell-state evolution stays physical", 1e-8, || {
            let traj = evolve(&peak, &bell_state(), 10.0, 101, &Tolerances::default())?;
            let mut w = 0.0_f64;
            for rho in &traj.states {
                w = w.max((rho.trace().re - 1.0).abs() * 10.0).max(-rho.min_eigenvalue());
            }
            Ok(w)
        }),
        run("uncoupled qubits relax to the ground state", 1e-6, || {
            let m = ModelSpec::symmetric(10.0, 0.0, 0.0, 1.0, 0.2);
            let traj = evolve(&m, &states[0], 20.0, 2, &Tolerances { rtol: 1e-10, atol: 1e-12 })?;
            Ok(1.0 - fidelity_with(traj.states.last().unwrap(), &DensityMatrix::ground()))
        }),
        run("C_max curve is monotone", 0.0, || {
            let grid: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
            let curve = cmax_curve(&grid)?;
            Ok(curve.windows(2).map(|w| (w[0].c_max - w[1].c_max).max(0.0)).fold(0.0, f64::max))
        }),
    ]
}

pub fn format_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let pad = width - c.name.chars().count();
        out.push_str(&format!(
            "{}{}  {}  worst {:.3e}  tol {:.1e}\n",
            c.name,
            " ".repeat(pad),
            if c.passed { "PASS" } else { "FAIL" },
            c.worst,
            c.tolerance
        ));
    }
    out
}

//! Time propagation and numerical stationary states.

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::blochvec::{decode_matrix, generator};
use crate::error::{Error, Result};
use crate::model::{
    lindblad_rhs, liouvillian, rotating_frame, unvectorize, Lindbladian, ModelSpec, PhaseSpec, RotatingFrame,
};
use crate::quantum::{hermitian_eigenvalues, hermitian_part, re, DensityMatrix, Mat4};

/// Above this condition number the 15×15 system is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: StepDiagnostics,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂ for the embedded fourth-order error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 50_000_000;

fn error_norm(err: &Mat4, y0: &Mat4, y1: &Mat4, tol: &Tolerances) -> f64 {
    let mut acc = 0.0;
    for k in 0..16 {
        let (e, a, b) = (err[k], y0[k], y1[k]);
        let sr = tol.atol + tol.rtol * a.re.abs().max(b.re.abs());
        let si = tol.atol + tol.rtol * a.im.abs().max(b.im.abs());
        acc += (e.re / sr).powi(2) + (e.im / si).powi(2);
    }
    (acc / 32.0).sqrt()
}

/// y + h·Σ cᵢkᵢ
fn axpy(y: &Mat4, h: f64, terms: &[(f64, &Mat4)]) -> Mat4 {
    let mut out = *y;
    for (coef, k) in terms {
        let w = h * coef;
        for (o, z) in out.iter_mut().zip(k.iter()) {
            *o += z * w;
        }
    }
    out
}

/// Adaptive Dormand–Prince integration of ρ̇ = f(t, ρ), reporting the state at
/// every entry of `outputs` (steps are shortened to land on them exactly).
/// The state is symmetrized to its Hermitian part after every accepted step.
pub fn integrate<F>(f: F, rho0: &Mat4, outputs: &[f64], tol: &Tolerances) -> Result<(Vec<Mat4>, StepDiagnostics)>
where
    F: Fn(f64, &Mat4) -> Mat4,
{
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(Error::InvalidSpec("tolerances must be > 0".into()));
    }
    if outputs.windows(2).any(|w| !(w[1] > w[0])) || outputs.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidSpec("output times must be finite and strictly increasing".into()));
    }
    let mut diag = StepDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() };
    let mut out = Vec::with_capacity(outputs.len());
    let Some(&t_first) = outputs.first() else {
        return Ok((out, diag));
    };
    let mut t = t_first;
    let mut y = *rho0;
    let mut k1 = f(t, &y);
    diag.rhs_evaluations += 1;
    let scale = k1.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let span = outputs.last().unwrap() - t_first;
    let mut h = if scale > 0.0 { (0.01 / scale).min(span) } else { span.max(1e-6) };
    let record = |y: &Mat4, diag: &mut StepDiagnostics, out: &mut Vec<Mat4>| {
        diag.max_trace_drift = diag.max_trace_drift.max((y.trace() - re(1.0)).norm());
        diag.min_eigenvalue = diag.min_eigenvalue.min(hermitian_eigenvalues(y)[0]);
        out.push(*y);
    };
    record(&y, &mut diag, &mut out);

    for &target in &outputs[1..] {
        while t < target {
            if diag.accepted + diag.rejected > MAX_STEPS {
                return Err(Error::Stiffness { t, h });
            }
            let remaining = target - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };
            if step <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Stiffness { t, h: step });
            }
            let k2 = f(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * step, &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                t + step,
                &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + step, &y_new);
            diag.rhs_evaluations += 6;
            let err = axpy(
                &Mat4::zeros(),
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let en = error_norm(&err, &y, &y_new, tol);
            if !en.is_finite() {
                diag.rejected += 1;
                h = step * MIN_FACTOR;
                continue;
            }
            let factor = if en == 0.0 { MAX_FACTOR } else { (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
            if en <= 1.0 {
                diag.accepted += 1;
                t = if last { target } else { t + step };
                y = hermitian_part(&y_new);
                k1 = k7;
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                diag.rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        record(&y, &mut diag, &mut out);
    }
    Ok((out, diag))
}

/// `n` evenly spaced points on [0, t_end], both ends included.
pub fn uniform_times(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
}

/// Propagates the master equation in the frame the model is written in.
pub fn evolve_at(spec: &ModelSpec, rho0: &DensityMatrix, times: &[f64], tol: &Tolerances) -> Result<Trajectory> {
    spec.validate()?;
    let lind = Lindbladian::new(spec);
    let (states, diagnostics) = integrate(|t, r| lind.rhs(r, t), rho0.matrix(), times, tol)?;
    Ok(Trajectory {
        times: times.to_vec(),
        states: states.into_iter().map(DensityMatrix::from_matrix_unchecked).collect(),
        diagnostics,
    })
}

pub fn evolve(spec: &ModelSpec, rho0: &DensityMatrix, t_end: f64, samples: usize, tol: &Tolerances) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidSpec(format!("t_end = {t_end} must be > 0")));
    }
    evolve_at(spec, rho0, &uniform_times(t_end, samples), tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryMethod {
    LinearSolve,
    NullSpace,
    LongTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Rotating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryResult {
    pub rho_inf: DensityMatrix,
    pub method: StationaryMethod,
    /// Frobenius norm of the right-hand side at `rho_inf`.
    pub residual: f64,
    /// Set when a detuned exchange term was dropped in the rotating frame.
    pub approximate: bool,
    pub frame: Frame,
    #[serde(skip)]
    rotating: Option<RotatingFrame>,
}

impl StationaryResult {
    /// The lab-frame state at time t (time-independent for static specs).
    pub fn lab_state(&self, t: f64) -> DensityMatrix {
        match &self.rotating {
            Some(f) => DensityMatrix::from_matrix_unchecked(f.to_lab(self.rho_inf.matrix(), t)),
            None => self.rho_inf.clone(),
        }
    }
}

fn frobenius(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Static model whose fixed point is the stationary state, with the frame and
/// whether a residual oscillation had to be dropped.
fn static_model(spec: &ModelSpec) -> Result<(ModelSpec, Option<RotatingFrame>, bool)> {
    spec.validate()?;
    if spec.gamma1 == 0.0 {
        return Err(Error::NoUniqueSteadyState);
    }
    match spec.phase1 {
        PhaseSpec::Static(_) => Ok((*spec, None, false)),
        PhaseSpec::Driven { .. } => {
            let frame = rotating_frame(spec)?;
            Ok((frame.spec, Some(frame), frame.residual.is_some()))
        }
    }
}

fn linear_solve(spec: &ModelSpec) -> Result<Option<Mat4>> {
    let gen = generator(spec)?;
    if gen.condition_number() > CONDITION_LIMIT {
        return Ok(None);
    }
    Ok(gen.fixed_point().map(|m| decode_matrix(&m)))
}

fn null_space(spec: &ModelSpec) -> Option<Mat4> {
    let sup = liouvillian(spec, 0.0);
    let svd = SVD::new(sup, false, true);
    let v_t = svd.v_t?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let v = v_t.row(k).adjoint();
    let m = unvectorize(&v);
    let tr = m.trace();
    if tr.norm() < 1e-12 {
        return None;
    }
    Some(hermitian_part(&(m / tr)))
}

fn long_time(spec: &ModelSpec) -> Result<Mat4> {
    let t_end = 60.0 / spec.gamma1;
    let traj = evolve_at(spec, &DensityMatrix::maximally_mixed(), &[0.0, t_end], &Tolerances { rtol: 1e-10, atol: 1e-12 })?;
    Ok(*traj.states.last().unwrap().matrix())
}

/// Stationary state via a chosen method, without fallback.
pub fn stationary_with(spec: &ModelSpec, method: StationaryMethod) -> Result<StationaryResult> {
    let (model, rotating, approximate) = static_model(spec)?;
    let rho = match method {
        StationaryMethod::LinearSolve => linear_solve(&model)?
            .ok_or_else(|| Error::NoSolution("coherent-vector system is singular".into()))?,
        StationaryMethod::NullSpace => {
            null_space(&model).ok_or_else(|| Error::NoSolution("Liouvillian null vector is traceless".into()))?
        }
        StationaryMethod::LongTime => long_time(&model)?,
    };
    Ok(finish(&model, rho, method, approximate, rotating))
}

fn finish(model: &ModelSpec, rho: Mat4, method: StationaryMethod, approximate: bool, rotating: Option<RotatingFrame>) -> StationaryResult {
    StationaryResult {
        residual: frobenius(&lindblad_rhs(model, &rho, 0.0)),
        rho_inf: DensityMatrix::from_matrix_unchecked(rho),
        method,
        approximate,
        frame: if rotating.is_some() { Frame::Rotating } else { Frame::Lab },
        rotating,
    }
}

/// Exact stationary state: coherent-vector linear solve, then the Liouvillian
/// null space, then long-time integration.
///
/// Driven specs are solved in the rotating frame; `rho_inf` is then the
/// rotating-frame state and `lab_state(t)` gives the periodic lab-frame one.
pub fn stationary_numeric(spec: &ModelSpec) -> Result<StationaryResult> {
    let (model, rotating, approximate) = static_model(spec)?;
    if let Some(rho) = linear_solve(&model)? {
        return Ok(finish(&model, rho, StationaryMethod::LinearSolve, approximate, rotating));
    }
    if let Some(rho) = null_space(&model) {
        return Ok(finish(&model, rho, StationaryMethod::NullSpace, approximate, rotating));
    }
    let rho = long_time(&model)?;
    Ok(finish(&model, rho, StationaryMethod::LongTime, approximate, rotating))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::concurrence;
    use crate::quantum::{basis_ket, check_physical, dm_from_pure, max_abs, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bell() -> DensityMatrix {
        dm_from_pure(&((basis_ket(0) + basis_ket(3)) * re(std::f64::consts::FRAC_1_SQRT_2))).unwrap()
    }

    fn quiet(gamma1: f64) -> ModelSpec {
        ModelSpec { mu1: 0.0, mu2: 0.0, ..ModelSpec::symmetric(2.0, 0.0, 0.0, gamma1, 0.0) }
    }

    #[test]
    fn doubly_excited_population_decays_at_eight_gamma() {
        let traj = evolve(&quiet(1.0), &bell(), 2.0, 21, &Tolerances::default()).unwrap();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let p11 = rho.get(3, 3).re;
            assert!((p11 - 0.5 * (-8.0 * t).exp()).abs() < 1e-8, "t={t}");
            assert!(check_physical(rho, 1e-7).is_empty());
        }
        assert!(traj.diagnostics.max_trace_drift < 1e-12);
    }

    #[test]
    fn unitary_evolution_keeps_purity() {
        let spec = ModelSpec { gamma1: 0.0, gamma_phi: 0.0, mu2: 0.5, ..ModelSpec::symmetric(3.0, 0.4, 0.3, 0.0, 0.0) };
        let ket = crate::quantum::Ket::new(re(0.6), C64::new(0.0, 0.48), re(0.0), re(0.64));
        let rho0 = dm_from_pure(&ket).unwrap();
        let tight = Tolerances { rtol: 1e-10, atol: 1e-12 };
        let traj = evolve(&spec, &rho0, 5.0, 11, &tight).unwrap();
        let h = crate::model::hamiltonian_at(&spec, 0.0);
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            assert!((rho.purity() - 1.0).abs() < 1e-9);
            let eig = nalgebra::SymmetricEigen::new(h);
            let phase = nalgebra::Vector4::from_fn(|k, _| C64::from_polar(1.0, -eig.eigenvalues[k] * t));
            let u = eig.eigenvectors * Mat4::from_diagonal(&phase) * eig.eigenvectors.adjoint();
            let exact = u * rho0.matrix() * u.adjoint();
            assert!(max_abs(&(exact - rho.matrix())) < 1e-7, "t={t}");
        }
    }

    #[test]
    fn decay_to_ground_state() {
        let traj = evolve(&quiet(1.0), &DensityMatrix::maximally_mixed(), 20.0, 2, &Tolerances::default()).unwrap();
        let last = traj.states.last().unwrap();
        assert!(crate::measures::fidelity_with(last, &DensityMatrix::ground()) > 1.0 - 1e-6);
    }

    #[test]
    fn ground_state_without_pair_coupling() {
        let spec = ModelSpec { mu1: 0.0, mu2: 0.8, ..ModelSpec::symmetric(10.0, 0.0, 0.0, 1.0, 0.2) };
        let res = stationary_numeric(&spec).unwrap();
        assert_eq!(res.method, StationaryMethod::LinearSolve);
        assert!(res.residual < 1e-12);
        assert!(res.rho_inf.max_deviation(&DensityMatrix::ground()) < 1e-12);
    }

    #[test]
    fn peak_concurrence() {
        let omega: f64 = 100.0;
        let mu1 = (omega * omega + 16.0).sqrt() / (4.0 * (5f64.sqrt() + 1.0));
        let spec = ModelSpec::symmetric(omega, mu1, 0.0, 1.0, 0.0);
        let res = stationary_numeric(&spec).unwrap();
        assert!((concurrence(&res.rho_inf).unwrap() - (5f64.sqrt() - 1.0) / 4.0).abs() < 1e-6);
        for mu2 in [1.0, 10.0] {
            let other = stationary_numeric(&ModelSpec { mu2, ..spec }).unwrap();
            assert!(other.rho_inf.max_deviation(&res.rho_inf) < 1e-10);
        }
    }

    #[test]
    fn zero_relaxation_has_no_unique_state() {
        let spec = ModelSpec::symmetric(10.0, 1.0, 0.0, 0.0, 0.3);
        assert!(matches!(stationary_numeric(&spec), Err(Error::NoUniqueSteadyState)));
    }

    #[test]
    fn methods_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..4 {
            let omega = rng.random_range(10.0..200.0);
            let spec = ModelSpec {
                mu2: rng.random_range(0.0..3.0),
                theta2: rng.random_range(-3.0..3.0),
                ..ModelSpec::symmetric(omega, rng.random_range(0.0..omega / 4.0), rng.random_range(-3.0..3.0), 1.0, rng.random_range(0.0..0.5))
            };
            let lin = stationary_with(&spec, StationaryMethod::LinearSolve).unwrap();
            let null = stationary_with(&spec, StationaryMethod::NullSpace).unwrap();
            assert!(lin.rho_inf.trace_distance(&null.rho_inf) < 1e-10);
            assert!(null.residual < 1e-9);
            assert!(lin.rho_inf.min_eigenvalue() > -1e-10);
        }
        let spec = ModelSpec::symmetric(20.0, 2.0, 0.5, 1.0, 0.1);
        let lin = stationary_with(&spec, StationaryMethod::LinearSolve).unwrap();
        let long = stationary_with(&spec, StationaryMethod::LongTime).unwrap();
        assert!(lin.rho_inf.trace_distance(&long.rho_inf) < 1e-5);
    }

    #[test]
    fn driven_spec_is_solved_in_rotating_frame() {
        let g1 = 1.0;
        let mu = g1 / (5f64.sqrt() + 1.0);
        let spec = ModelSpec {
            mu1: mu,
            phase1: PhaseSpec::Driven { omega: 200.0, phi0: 0.2 },
            mu2: 0.5,
            theta2: 0.0,
            omega_a1: 100.0,
            omega_a2: 100.0,
            gamma1: g1,
            gamma_phi: 0.0,
        };
        let res = stationary_numeric(&spec).unwrap();
        assert_eq!(res.frame, Frame::Rotating);
        assert!(!res.approximate);
        assert!((concurrence(&res.rho_inf).unwrap() - (5f64.sqrt() - 1.0) / 4.0).abs() < 1e-9);
        let weak = crate::analytic::weak_stationary(mu, g1, 0.0).unwrap();
        assert!(res.lab_state(0.71).max_deviation(&weak.state_at(200.0, 0.2, 0.71)) < 1e-10);

        let detuned = ModelSpec { omega_a1: 120.0, omega_a2: 80.0, ..spec };
        assert!(stationary_numeric(&detuned).unwrap().approximate);
        let off = ModelSpec { phase1: PhaseSpec::Driven { omega: 150.0, phi0: 0.0 }, ..spec };
        assert!(matches!(stationary_numeric(&off), Err(Error::UnsupportedFrame { .. })));
    }

    #[test]
    fn rejects_bad_output_grid() {
        let r = integrate(|_, y| *y, &Mat4::identity(), &[0.0, 1.0, 1.0], &Tolerances::default());
        assert!(r.is_err());
        assert!(evolve(&quiet(1.0), &bell(), -1.0, 3, &Tolerances::default()).is_err());
    }

    #[test]
    fn exploding_rhs_reports_stiffness() {
        // y' = y² blows up at t = 1
        let r = integrate(|_, y| y * y, &Mat4::identity(), &[0.0, 2.0], &Tolerances::default());
        assert!(matches!(r, Err(Error::Stiffness { t, .. }) if t > 0.9 && t < 1.01));
    }
}

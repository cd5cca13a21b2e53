//! Closed-form stationary states and optima for the static-phase (strong
//! coupling) and resonantly driven (weak coupling) cases.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::bell_target;
use crate::model::{ModelSpec, PhaseSpec};
use crate::quantum::{re, DensityMatrix, Mat4, C64};

/// Sign taken in front of √(1 − 8Γ₂p²/Γ₁).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Weight, phase and root shared by the stationary formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongParams {
    pub p: f64,
    pub phi: f64,
    /// r = 128μ₁²Γ₂ / (Γ₁(Ω² + 64Γ₂²)); the branch flips at r = 1.
    pub r: f64,
    pub radicand: f64,
    pub branch: Branch,
}

impl StrongParams {
    pub fn signed_root(&self) -> f64 {
        let root = self.radicand.max(0.0).sqrt();
        match self.branch {
            Branch::Plus => root,
            Branch::Minus => -root,
        }
    }

    /// β = (1 ∓ √(1 − 8Γ₂p²/Γ₁))/8.
    pub fn beta(&self) -> f64 {
        (1.0 - self.signed_root()) / 8.0
    }
}

fn check_rates(gamma1: f64, gamma_phi: f64) -> Result<()> {
    if !(gamma1 > 0.0 && gamma1.is_finite()) {
        return Err(Error::InvalidSpec(format!("gamma1 = {gamma1} must be > 0")));
    }
    if !(gamma_phi >= 0.0 && gamma_phi.is_finite()) {
        return Err(Error::InvalidSpec(format!("gamma_phi = {gamma_phi} must be ≥ 0")));
    }
    Ok(())
}

/// p = 8μ₁s/(s² + 128μ₁²Γ₂/Γ₁) with s = √(Ω² + 64Γ₂²), and φ = atan2(−8Γ₂, Ω),
/// which is arctan(−8Γ₂/Ω) for Ω > 0 and −π/2 at Ω = 0.
pub fn strong_parameters(omega: f64, mu1: f64, gamma1: f64, gamma_phi: f64) -> Result<StrongParams> {
    check_rates(gamma1, gamma_phi)?;
    if !(mu1 >= 0.0) || !(omega >= 0.0) {
        return Err(Error::InvalidSpec("mu1 and Omega must be ≥ 0".into()));
    }
    let g2 = 0.5 * gamma1 + gamma_phi;
    let s2 = omega * omega + 64.0 * g2 * g2;
    let pair = 128.0 * mu1 * mu1 * g2 / gamma1;
    let p = 8.0 * mu1 * s2.sqrt() / (s2 + pair);
    let r = pair / s2;
    let radicand = 1.0 - 8.0 * g2 * p * p / gamma1;
    if radicand < -1e-12 {
        return Err(Error::Domain(format!("1 − 8Γ₂p²/Γ₁ = {radicand:e} < 0")));
    }
    Ok(StrongParams {
        p,
        phi: (-8.0 * g2).atan2(omega),
        r,
        radicand,
        branch: if r <= 1.0 { Branch::Plus } else { Branch::Minus },
    })
}

/// Stationary state with diagonal (1 − 3β, β, β, β) and ⟨00|ρ|11⟩ = (p/2)e^{−iχ}.
fn stationary_state(p: f64, beta: f64, chi: f64) -> DensityMatrix {
    let mut m = Mat4::from_diagonal(&nalgebra::Vector4::new(re(1.0 - 3.0 * beta), re(beta), re(beta), re(beta)));
    m[(0, 3)] = C64::from_polar(0.5 * p, -chi);
    m[(3, 0)] = C64::from_polar(0.5 * p, chi);
    DensityMatrix::from_matrix_unchecked(m)
}

fn separable(beta: f64) -> DensityMatrix {
    DensityMatrix::diagonal([1.0 - 3.0 * beta, beta, beta, beta])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongSolution {
    pub p: f64,
    pub phi: f64,
    pub beta: f64,
    pub branch: Branch,
    /// χ such that the Bell target is `bell_target(χ)`.
    pub target_phase: f64,
    pub rho_inf: DensityMatrix,
    pub concurrence: f64,
    pub fidelity: f64,
}

impl StrongSolution {
    pub fn target(&self) -> DensityMatrix {
        bell_target(self.target_phase)
    }

    pub fn separable_part(&self) -> DensityMatrix {
        separable(self.beta)
    }

    /// p·ρ_m + (1 − p)·ρ_s built from the same p and β. It is not the fixed
    /// point (its populations and coherence differ); kept for comparison.
    pub fn convex_decomposition(&self) -> DensityMatrix {
        let m = self.target().into_matrix() * re(self.p) + self.separable_part().into_matrix() * re(1.0 - self.p);
        DensityMatrix::from_matrix_unchecked(m)
    }
}

fn concurrence_fidelity(p: f64, beta: f64) -> (f64, f64) {
    let raw = p - 2.0 * beta;
    (raw.max(0.0), 0.5 * raw + 0.5)
}

/// Stationary solution for a static phase θ₁ with total qubit frequency Ω.
pub fn strong_stationary(omega: f64, mu1: f64, theta1: f64, gamma1: f64, gamma_phi: f64) -> Result<StrongSolution> {
    let sp = strong_parameters(omega, mu1, gamma1, gamma_phi)?;
    let beta = sp.beta();
    let chi = PI - theta1 - sp.phi;
    let (concurrence, fidelity) = concurrence_fidelity(sp.p, beta);
    Ok(StrongSolution {
        p: sp.p,
        phi: sp.phi,
        beta,
        branch: sp.branch,
        target_phase: chi,
        rho_inf: stationary_state(sp.p, beta, chi),
        concurrence,
        fidelity,
    })
}

/// The concurrence and fidelity in the rational form
/// C = (8μ₁s − 64μ₁²Γ₂/Γ₁)/(128μ₁²Γ₂/Γ₁ + s²), F = C/2 + ½ (before clipping C).
pub fn strong_concurrence_fidelity(omega: f64, mu1: f64, gamma1: f64, gamma_phi: f64) -> Result<(f64, f64)> {
    check_rates(gamma1, gamma_phi)?;
    let g2 = 0.5 * gamma1 + gamma_phi;
    let s2 = omega * omega + 64.0 * g2 * g2;
    let den = 128.0 * mu1 * mu1 * g2 / gamma1 + s2;
    let num = 8.0 * mu1 * s2.sqrt() - 64.0 * mu1 * mu1 * g2 / gamma1;
    let f = (4.0 * mu1 * s2.sqrt() - 32.0 * mu1 * mu1 * g2 / gamma1) / den + 0.5;
    Ok(((num / den).max(0.0), f))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    pub mu1_opt: f64,
    pub c_max: f64,
    pub f_max: f64,
}

/// C_max = ¼(√(2Γ₁/Γ₂ + 1) − 1).
pub fn c_max(gamma1: f64, gamma_phi: f64) -> f64 {
    let g2 = 0.5 * gamma1 + gamma_phi;
    0.25 * ((2.0 * gamma1 / g2 + 1.0).sqrt() - 1.0)
}

pub fn strong_optimal(omega: f64, gamma1: f64, gamma_phi: f64) -> Result<OptimalPoint> {
    check_rates(gamma1, gamma_phi)?;
    let g2 = 0.5 * gamma1 + gamma_phi;
    let s = (omega * omega + 64.0 * g2 * g2).sqrt();
    let mu1_opt = gamma1 / 8.0 * s / ((2.0 * gamma1 * g2 + g2 * g2).sqrt() + g2);
    let c = c_max(gamma1, gamma_phi);
    Ok(OptimalPoint { mu1_opt, c_max: c, f_max: 0.5 * c + 0.5 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakSolution {
    /// μ₁Γ₁/(2μ₁² + Γ₁Γ₂).
    pub weight: f64,
    pub beta_tilde: f64,
    pub branch: Branch,
    pub concurrence: f64,
    pub fidelity: f64,
}

impl WeakSolution {
    /// Long-time lab-frame state for θ₁(t) = Ωt + φ₀: populations are static
    /// and ⟨00|ρ|11⟩ = (weight/2)e^{−iχ(t)} with χ(t) = −π/2 − θ₁(t).
    pub fn state_at(&self, omega: f64, phi0: f64, t: f64) -> DensityMatrix {
        stationary_state(self.weight, self.beta_tilde, -FRAC_PI_2 - (omega * t + phi0))
    }

    pub fn target_at(&self, omega: f64, phi0: f64, t: f64) -> DensityMatrix {
        bell_target(-FRAC_PI_2 - (omega * t + phi0))
    }
}

/// Stationary solution for the resonantly driven phase θ₁ = Ωt + φ₀.
pub fn weak_stationary(mu1: f64, gamma1: f64, gamma_phi: f64) -> Result<WeakSolution> {
    let sp = strong_parameters(0.0, mu1, gamma1, gamma_phi)?;
    let beta_tilde = sp.beta();
    let (concurrence, fidelity) = concurrence_fidelity(sp.p, beta_tilde);
    Ok(WeakSolution { weight: sp.p, beta_tilde, branch: sp.branch, concurrence, fidelity })
}

/// C = max{μ₁(Γ₁ − μ₁)/(2μ₁² + Γ₁Γ₂), 0}, F = μ₁(Γ₁ − μ₁)/(4μ₁² + 2Γ₁Γ₂) + ½.
pub fn weak_concurrence_fidelity(mu1: f64, gamma1: f64, gamma_phi: f64) -> Result<(f64, f64)> {
    check_rates(gamma1, gamma_phi)?;
    let g2 = 0.5 * gamma1 + gamma_phi;
    let num = mu1 * (gamma1 - mu1);
    let den = 2.0 * mu1 * mu1 + gamma1 * g2;
    Ok(((num / den).max(0.0), num / (2.0 * den) + 0.5))
}

pub fn weak_optimal(gamma1: f64, gamma_phi: f64) -> Result<OptimalPoint> {
    check_rates(gamma1, gamma_phi)?;
    let g2 = 0.5 * gamma1 + gamma_phi;
    let mu1_opt = gamma1 * g2 / ((2.0 * gamma1 * g2 + g2 * g2).sqrt() + g2);
    let c = c_max(gamma1, gamma_phi);
    Ok(OptimalPoint { mu1_opt, c_max: c, f_max: 0.5 * c + 0.5 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub ratio: f64,
    pub c_max: f64,
    pub f_max: f64,
}

/// C_max and F_max against Γ₁/Γ₂, which cannot exceed 2.
pub fn cmax_curve(ratios: &[f64]) -> Result<Vec<CurvePoint>> {
    ratios
        .iter()
        .map(|&ratio| {
            if !(ratio > 0.0 && ratio <= 2.0 + 1e-12) {
                return Err(Error::Domain(format!("Γ₁/Γ₂ = {ratio} outside (0, 2]")));
            }
            let c = 0.25 * ((2.0 * ratio + 1.0).sqrt() - 1.0);
            Ok(CurvePoint { ratio, c_max: c, f_max: 0.5 * c + 0.5 })
        })
        .collect()
}

/// Γ_φ giving Γ₁/Γ₂ = `ratio`.
pub fn gamma_phi_for_ratio(gamma1: f64, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio <= 2.0 + 1e-12) {
        return Err(Error::Domain(format!("Γ₁/Γ₂ = {ratio} outside (0, 2]")));
    }
    Ok((gamma1 / ratio - 0.5 * gamma1).max(0.0))
}

/// Phase χ(t) of the Bell target the stationary state approaches, in the frame
/// the model is written in.
pub fn stationary_target_phase(spec: &ModelSpec, t: f64) -> f64 {
    match spec.phase1 {
        PhaseSpec::Static(theta1) => PI - theta1 - (-8.0 * spec.gamma2()).atan2(spec.big_omega()),
        PhaseSpec::Driven { .. } => -FRAC_PI_2 - spec.phase1.at(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blochvec::{decode, generator, stationary_closed_form};
    use crate::measures::{concurrence, fidelity_with};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const C_PEAK: f64 = 0.309_016_994_374_947_4;

    fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let inv = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - inv * (b - a);
        let mut x2 = a + inv * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        while b - a > 1e-10 * (1.0 + b.abs()) {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv * (b - a);
                f2 = f(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv * (b - a);
                f1 = f(x1);
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn peak_at_optimal_coupling() {
        let omega: f64 = 100.0;
        let mu1 = (omega * omega + 16.0).sqrt() / (4.0 * (5f64.sqrt() + 1.0));
        let sol = strong_stationary(omega, mu1, 0.0, 1.0, 0.0).unwrap();
        assert!((sol.concurrence - C_PEAK).abs() < 1e-12);
        assert!((sol.fidelity - (5f64.sqrt() + 3.0) / 8.0).abs() < 1e-12);
        let opt = strong_optimal(omega, 1.0, 0.0).unwrap();
        assert!((opt.mu1_opt - mu1).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_limit() {
        let sol = strong_stationary(100.0, 0.0, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(sol.p, 0.0);
        assert_eq!(sol.concurrence, 0.0);
        assert!((sol.fidelity - 0.5).abs() < 1e-15);
        assert!(sol.rho_inf.max_deviation(&DensityMatrix::ground()) < 1e-15);
    }

    #[test]
    fn closed_form_matches_blochvec_and_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let omega = rng.random_range(0.0..200.0);
            let mu1 = rng.random_range(0.0..60.0);
            let theta = rng.random_range(-3.0..3.0);
            let (g1, gp) = (rng.random_range(0.1..3.0), rng.random_range(0.0..2.0));
            let sol = strong_stationary(omega, mu1, theta, g1, gp).unwrap();
            let spec = ModelSpec::symmetric(omega, mu1, theta, g1, gp);
            let rho = decode(&stationary_closed_form(&spec).unwrap().m);
            assert!(rho.max_deviation(&sol.rho_inf) < 1e-12);
            let exact = decode(&crate::blochvec::CoherentVector(generator(&spec).unwrap().fixed_point().unwrap()));
            assert!((concurrence(&exact).unwrap() - sol.concurrence).abs() < 1e-10);
            assert!((fidelity_with(&exact, &sol.target()) - sol.fidelity).abs() < 1e-10);
            let (c, f) = strong_concurrence_fidelity(omega, mu1, g1, gp).unwrap();
            assert!((c - sol.concurrence).abs() < 1e-12 && (f - sol.fidelity).abs() < 1e-12);
            if sol.concurrence > 0.0 {
                assert!((sol.fidelity - 0.5 * sol.concurrence - 0.5).abs() < 1e-12);
            }
            assert!((stationary_target_phase(&spec, 0.0) - sol.target_phase).abs() < 1e-12);
        }
    }

    #[test]
    fn convex_form_differs_from_fixed_point() {
        let sol = strong_stationary(100.0, 15.0, 0.0, 1.0, 0.0).unwrap();
        let convex = sol.convex_decomposition();
        assert!((convex.trace().re - 1.0).abs() < 1e-14);
        assert!(convex.max_deviation(&sol.rho_inf) > 1e-3);
    }

    #[test]
    fn optimum_vs_golden_section() {
        for &omega in &[10.0, 100.0, 1000.0] {
            let opt = strong_optimal(omega, 1.0, 0.0).unwrap();
            let best = golden_max(
                |mu| strong_stationary(omega, mu, 0.0, 1.0, 0.0).unwrap().concurrence,
                0.0,
                omega / 2.0,
            );
            assert!((best / opt.mu1_opt - 1.0).abs() < 1e-3, "Ω={omega}");
            let at = strong_stationary(omega, opt.mu1_opt, 0.0, 1.0, 0.0).unwrap();
            assert!((at.concurrence - opt.c_max).abs() < 1e-12);
        }
    }

    #[test]
    fn optimum_is_independent_of_omega_with_dephasing() {
        for &omega in &[0.0, 3.0, 50.0] {
            let opt = strong_optimal(omega, 1.0, 0.4).unwrap();
            let at = strong_stationary(omega, opt.mu1_opt, 1.1, 1.0, 0.4).unwrap();
            assert!((at.concurrence - opt.c_max).abs() < 1e-12);
        }
        assert!(strong_optimal(100.0, 1.0, 1e9).unwrap().c_max < 1e-8);
    }

    #[test]
    fn weak_regime_values() {
        let mu = 1.0 / (5f64.sqrt() + 1.0);
        let sol = weak_stationary(mu, 1.0, 0.0).unwrap();
        assert!((sol.concurrence - C_PEAK).abs() < 1e-12);
        assert!((sol.fidelity - 0.654_508_497_187_473_7).abs() < 1e-12);
        let opt = weak_optimal(1.0, 0.0).unwrap();
        assert!((opt.mu1_opt - mu).abs() < 1e-15);
        let zero = weak_stationary(0.0, 1.0, 0.0).unwrap();
        assert_eq!(zero.concurrence, 0.0);
        assert!((zero.fidelity - 0.5).abs() < 1e-15);
        assert!(weak_stationary(1.0, 1.0, 0.0).unwrap().concurrence < 1e-15);
    }

    #[test]
    fn weak_rational_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let (mu, g1, gp) = (rng.random_range(0.0..3.0), rng.random_range(0.1..2.0), rng.random_range(0.0..1.0));
            let sol = weak_stationary(mu, g1, gp).unwrap();
            let (c, f) = weak_concurrence_fidelity(mu, g1, gp).unwrap();
            assert!((sol.concurrence - c).abs() < 1e-12);
            assert!((sol.fidelity - f).abs() < 1e-12);
            assert!((sol.weight - mu * g1 / (2.0 * mu * mu + g1 * (0.5 * g1 + gp))).abs() < 1e-14);
            let opt = weak_optimal(g1, gp).unwrap();
            let at = weak_stationary(opt.mu1_opt, g1, gp).unwrap();
            assert!((at.concurrence - opt.c_max).abs() < 1e-12);
            let strong = strong_optimal(50.0, g1, gp).unwrap();
            assert_eq!((strong.c_max, strong.f_max), (opt.c_max, opt.f_max));
        }
    }

    #[test]
    fn weak_state_matches_rotating_frame_solution() {
        let (omega, phi0, mu) = (200.0, 0.4, 0.3);
        let sol = weak_stationary(mu, 1.0, 0.2).unwrap();
        let rot = ModelSpec {
            mu1: mu,
            phase1: PhaseSpec::Static(phi0),
            mu2: 0.0,
            theta2: 0.0,
            omega_a1: 0.0,
            omega_a2: 0.0,
            gamma1: 1.0,
            gamma_phi: 0.2,
        };
        let m = generator(&rot).unwrap().fixed_point().unwrap();
        let rho_rot = decode(&crate::blochvec::CoherentVector(m));
        let t = 0.37;
        let lab = rho_rot.matrix()[(0, 3)] * C64::from_polar(1.0, omega * t);
        assert!((lab - sol.state_at(omega, phi0, t).get(0, 3)).norm() < 1e-12);
        assert!((rho_rot.get(1, 1).re - sol.beta_tilde).abs() < 1e-12);
        let driven = ModelSpec { phase1: PhaseSpec::Driven { omega, phi0 }, omega_a1: 100.0, omega_a2: 100.0, ..rot };
        let chi = stationary_target_phase(&driven, t);
        assert!((sol.target_at(omega, phi0, t).max_deviation(&bell_target(chi))) < 1e-15);
    }

    #[test]
    fn curve() {
        let pts = cmax_curve(&[1e-9, 0.5, 1.0, 1.5, 2.0]).unwrap();
        assert!(pts[0].c_max < 1e-9 && (pts[0].f_max - 0.5).abs() < 1e-9);
        assert!((pts[2].c_max - 0.25 * (3f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((pts[4].c_max - C_PEAK).abs() < 1e-15);
        assert!(pts.windows(2).all(|w| w[1].c_max >= w[0].c_max));
        assert!(matches!(cmax_curve(&[2.1]), Err(Error::Domain(_))));
        assert!(matches!(cmax_curve(&[0.0]), Err(Error::Domain(_))));
        let gp = gamma_phi_for_ratio(1.0, 1.0).unwrap();
        assert!((c_max(1.0, gp) - pts[2].c_max).abs() < 1e-15);
    }

    #[test]
    fn branch_flips_past_unit_ratio() {
        let low = strong_stationary(10.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let high = strong_stationary(10.0, 20.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(low.branch, Branch::Plus);
        assert_eq!(high.branch, Branch::Minus);
        assert!(strong_stationary(10.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }
}

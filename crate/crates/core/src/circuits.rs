//! Superconducting-circuit designs mapped onto the two-qubit model.
//!
//! Inputs are spectroscopic frequencies in Hz (rates as Γ/2π), lumped
//! elements in SI units and fluxes in units of Φ₀. The resulting
//! [`ModelSpec`] is in angular units (rad/s).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{strong_optimal, weak_optimal, OptimalPoint};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, PhaseSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysConstants {
    /// Φ₀ = h/2e in Wb.
    pub flux_quantum: f64,
    /// e in C.
    pub electron_charge: f64,
    /// h in J·s.
    pub planck: f64,
}

pub const CODATA: PhysConstants = PhysConstants {
    flux_quantum: 2.067_833_848e-15,
    electron_charge: 1.602_176_634e-19,
    planck: 6.626_070_15e-34,
};

impl PhysConstants {
    pub fn hbar(&self) -> f64 {
        self.planck / (2.0 * PI)
    }

    pub fn joules_to_hz(&self, e: f64) -> f64 {
        e / self.planck
    }
}

const GOLDEN: f64 = 3.236_067_977_499_79; // √5 + 1

/// Bias offsets below this count as sitting on the degeneracy point.
const DEGENERACY_TOL: f64 = 1e-12;
/// "≫" is read as a ratio of at least this much.
pub const DISPERSIVE_RATIO: f64 = 5.0;
/// Upper end of 2πL·I_c/Φ₀ − 1 for the tunnelling-amplitude expansion.
pub const FLUX_EXPANSION_LIMIT: f64 = 0.2;
/// Above this the coupler junction ratio is no longer small.
pub const ALPHA_LIMIT: f64 = 0.2;

fn ang(hz: f64) -> f64 {
    2.0 * PI * hz
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    /// Large side over small side; satisfied when ≥ `required`.
    pub ratio: f64,
    pub required: f64,
    pub satisfied: bool,
}

impl Condition {
    fn new(name: impl Into<String>, large: f64, small: f64, required: f64) -> Self {
        let ratio = if small == 0.0 { f64::INFINITY } else { large.abs() / small.abs() };
        Self { name: name.into(), ratio, required, satisfied: ratio >= required }
    }
}

/// Result of mapping a circuit onto the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitModel {
    pub model: ModelSpec,
    /// Intermediate circuit quantities in Hz.
    pub derived: BTreeMap<String, f64>,
    pub conditions: Vec<Condition>,
    pub warnings: Vec<String>,
    pub at_degeneracy: bool,
}

fn resolve_dephasing(at_degeneracy: bool, gamma_phi: Option<f64>, warnings: &mut Vec<String>) -> Result<f64> {
    if at_degeneracy {
        if let Some(g) = gamma_phi.filter(|&g| g != 0.0) {
            warnings.push(format!("gamma_phi = {g} ignored: pure dephasing vanishes at the degeneracy point"));
        }
        return Ok(0.0);
    }
    match gamma_phi {
        Some(g) if g >= 0.0 => Ok(ang(g)),
        Some(g) => Err(Error::InvalidSpec(format!("gamma_phi = {g} must be ≥ 0"))),
        None => Err(Error::MissingParameter("gamma_phi is required away from the degeneracy point".into())),
    }
}

fn check_gamma1(gamma1: f64) -> Result<()> {
    if gamma1 >= 0.0 && gamma1.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("gamma1 = {gamma1} must be ≥ 0")))
    }
}

fn default_half() -> f64 {
    0.5
}

/// Capacitively coupled Cooper-pair boxes with split-junction Josephson energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeDirectSpec {
    pub e_c: f64,
    pub e_j0: f64,
    #[serde(default = "default_half")]
    pub n_g1: f64,
    #[serde(default = "default_half")]
    pub n_g2: f64,
    pub phi_x1: f64,
    pub phi_x2: f64,
    /// Coupling J in Hz. Takes precedence over the capacitances.
    #[serde(default)]
    pub j: Option<f64>,
    #[serde(default)]
    pub c_g: Option<f64>,
    #[serde(default)]
    pub c_j0: Option<f64>,
    #[serde(default)]
    pub c_m: Option<f64>,
    pub gamma1: f64,
    #[serde(default)]
    pub gamma_phi: Option<f64>,
}

/// E_J(Φ) = 2E_J⁰cos(πΦ/Φ₀).
pub fn split_junction_energy(e_j0: f64, phi: f64) -> f64 {
    2.0 * e_j0 * (PI * phi).cos()
}

impl ChargeDirectSpec {
    /// J = e²C_m/((C_g + 2C_J⁰)² − C_m²), converted to Hz.
    pub fn capacitive_coupling(&self, k: &PhysConstants) -> Option<f64> {
        let (cg, cj, cm) = (self.c_g?, self.c_j0?, self.c_m?);
        let sum = cg + 2.0 * cj;
        Some(k.joules_to_hz(k.electron_charge.powi(2) * cm / (sum * sum - cm * cm)))
    }

    pub fn coupling(&self, k: &PhysConstants, warnings: &mut Vec<String>) -> Result<f64> {
        let from_caps = self.capacitive_coupling(k);
        match (self.j, from_caps) {
            (Some(j), Some(c)) => {
                if (j - c).abs() > 0.01 * j.abs().max(c.abs()) {
                    warnings.push(format!("J = {j:e} Hz overrides the capacitance estimate {c:e} Hz"));
                }
                Ok(j)
            }
            (Some(j), None) => Ok(j),
            (None, Some(c)) => Ok(c),
            (None, None) => Err(Error::MissingParameter("J or (c_g, c_j0, c_m)".into())),
        }
    }

    pub fn to_model(&self) -> Result<CircuitModel> {
        check_gamma1(self.gamma1)?;
        let k = CODATA;
        let mut warnings = Vec::new();
        let j = self.coupling(&k, &mut warnings)?;
        let ec = [self.n_g1, self.n_g2].map(|n| 4.0 * self.e_c * (1.0 - 2.0 * n));
        let ej = [self.phi_x1, self.phi_x2].map(|p| split_junction_energy(self.e_j0, p));
        for (q, e) in ej.iter().enumerate() {
            if e.abs() < 1e-12 * self.e_j0.abs() && ec[q].abs() < 1e-12 * self.e_c.abs().max(1.0) {
                return Err(Error::ZeroQubitFrequency(format!("qubit {} has cos(πΦx) = 0", q + 1)));
            }
        }
        let at_degeneracy = ec.iter().all(|e| e.abs() <= DEGENERACY_TOL * self.e_c.abs().max(1.0));
        let omega = [0, 1].map(|q| ec[q].hypot(ej[q]));
        if omega.iter().any(|&w| w == 0.0) {
            return Err(Error::ZeroQubitFrequency("qubit splitting vanishes".into()));
        }
        // σxσx weight after rotating each qubit into its eigenbasis
        let mix = (ej[0] / omega[0]).abs() * (ej[1] / omega[1]).abs();
        if !at_degeneracy {
            warnings.push(format!(
                "off the charge degeneracy point: σzσz and σxσz couplings of relative size {:.3e} are dropped",
                (ec[0] * ec[1] / (omega[0] * omega[1])).abs().max((ec[0] / omega[0]).abs())
            ));
        }
        let gamma_phi = resolve_dephasing(at_degeneracy, self.gamma_phi, &mut warnings)?;
        let mu = ang(j) * mix / 4.0;
        let model = ModelSpec {
            mu1: mu,
            phase1: PhaseSpec::Static(0.0),
            mu2: mu,
            theta2: 0.0,
            omega_a1: ang(omega[0]),
            omega_a2: ang(omega[1]),
            gamma1: ang(self.gamma1),
            gamma_phi,
        };
        let derived = BTreeMap::from([
            ("J".to_string(), j),
            ("E_J1".to_string(), ej[0]),
            ("E_J2".to_string(), ej[1]),
            ("E_C1".to_string(), ec[0]),
            ("E_C2".to_string(), ec[1]),
            ("omega_a1".to_string(), omega[0]),
            ("omega_a2".to_string(), omega[1]),
        ]);
        let conditions = vec![Condition::new("Ω ≫ Γ₁", omega[0] + omega[1], self.gamma1, DISPERSIVE_RATIO)];
        Ok(CircuitModel { model, derived, conditions, warnings, at_degeneracy })
    }

    /// Flux with cos(πΦx) = (√5 + 1)J/(4E_J⁰).
    pub fn optimal_flux(&self) -> Result<f64> {
        let j = self.coupling(&CODATA, &mut Vec::new())?;
        charge_direct_optimal_flux(j, self.e_j0)
    }
}

pub fn charge_direct_optimal_flux(j: f64, e_j0: f64) -> Result<f64> {
    let c = GOLDEN * j / (4.0 * e_j0);
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::NoSolution(format!("cos(πΦx) = {c:.4} outside [0, 1]: J too large for E_J0")));
    }
    Ok(c.acos() / PI)
}

/// Inductively coupled flux qubits with SQUID-tunable tunnelling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxDirectSpec {
    pub i_p1: f64,
    pub i_p2: f64,
    #[serde(default = "default_half")]
    pub phi_1: f64,
    #[serde(default = "default_half")]
    pub phi_2: f64,
    pub l_1: f64,
    pub l_2: f64,
    pub i_0: f64,
    pub phi_c1: f64,
    pub phi_c2: f64,
    pub m_mut: f64,
    pub gamma1: f64,
    #[serde(default)]
    pub gamma_phi: Option<f64>,
}

/// 2πL·I_c(Φᶜ)/Φ₀ − 1 with I_c = 2I₀|cos(πΦᶜ/Φ₀)|.
pub fn flux_expansion_parameter(l: f64, i_0: f64, phi_c: f64, k: &PhysConstants) -> f64 {
    let ic = 2.0 * i_0 * (PI * phi_c).cos().abs();
    2.0 * PI * l * ic / k.flux_quantum - 1.0
}

/// Δ(Φᶜ) ≈ (3Φ₀²/8π²L)(1 − Φ₀/(2πL·I_c))² in Hz, with the expansion parameter.
pub fn tunnelling_amplitude(l: f64, i_0: f64, phi_c: f64, k: &PhysConstants) -> Result<(f64, f64)> {
    let x = flux_expansion_parameter(l, i_0, phi_c, k);
    if !(x > 0.0 && x <= FLUX_EXPANSION_LIMIT) {
        return Err(Error::ApproximationOutOfRange(format!(
            "2πL·I_c/Φ₀ − 1 = {x:.4} outside (0, {FLUX_EXPANSION_LIMIT}]"
        )));
    }
    let pref = 3.0 * k.flux_quantum.powi(2) / (8.0 * PI * PI * l);
    let delta = pref * (1.0 - 1.0 / (1.0 + x)).powi(2);
    Ok((k.joules_to_hz(delta), x))
}

/// SQUID flux giving tunnelling amplitude `delta_hz`.
pub fn flux_for_tunnelling(delta_hz: f64, l: f64, i_0: f64, k: &PhysConstants) -> Result<f64> {
    let pref = k.joules_to_hz(3.0 * k.flux_quantum.powi(2) / (8.0 * PI * PI * l));
    let root = (delta_hz / pref).sqrt();
    if !(delta_hz > 0.0 && root < 1.0) {
        return Err(Error::NoSolution(format!("Δ = {delta_hz:e} Hz not reachable")));
    }
    let beta = 1.0 / (1.0 - root);
    let ic = beta * k.flux_quantum / (2.0 * PI * l);
    let c = ic / (2.0 * i_0);
    if c > 1.0 {
        return Err(Error::NoSolution(format!("needs I_c = {ic:e} A above 2I₀")));
    }
    if beta - 1.0 > FLUX_EXPANSION_LIMIT {
        return Err(Error::ApproximationOutOfRange(format!(
            "2πL·I_c/Φ₀ − 1 = {:.4} exceeds {FLUX_EXPANSION_LIMIT}",
            beta - 1.0
        )));
    }
    Ok(c.acos() / PI)
}

impl FluxDirectSpec {
    /// J = M·I_p1·I_p2 in Hz.
    pub fn coupling(&self, k: &PhysConstants) -> f64 {
        k.joules_to_hz(self.m_mut * self.i_p1 * self.i_p2)
    }

    pub fn to_model(&self) -> Result<CircuitModel> {
        check_gamma1(self.gamma1)?;
        let k = CODATA;
        let mut warnings = Vec::new();
        let (d1, x1) = tunnelling_amplitude(self.l_1, self.i_0, self.phi_c1, &k)?;
        let (d2, x2) = tunnelling_amplitude(self.l_2, self.i_0, self.phi_c2, &k)?;
        let eps = [(self.i_p1, self.phi_1), (self.i_p2, self.phi_2)]
            .map(|(ip, phi)| k.joules_to_hz(2.0 * ip * (phi - 0.5) * k.flux_quantum));
        let at_degeneracy = [self.phi_1, self.phi_2].iter().all(|p| (p - 0.5).abs() <= DEGENERACY_TOL);
        let omega = [eps[0].hypot(d1), eps[1].hypot(d2)];
        let mix = d1 / omega[0] * d2 / omega[1];
        if !at_degeneracy {
            warnings.push("off the flux degeneracy point: longitudinal couplings are dropped".into());
        }
        let gamma_phi = resolve_dephasing(at_degeneracy, self.gamma_phi, &mut warnings)?;
        let j = self.coupling(&k);
        let mu = ang(j) * mix / 4.0;
        let model = ModelSpec {
            mu1: mu,
            phase1: PhaseSpec::Static(0.0),
            mu2: mu,
            theta2: 0.0,
            omega_a1: ang(omega[0]),
            omega_a2: ang(omega[1]),
            gamma1: ang(self.gamma1),
            gamma_phi,
        };
        let derived = BTreeMap::from([
            ("J".to_string(), j),
            ("Delta_1".to_string(), d1),
            ("Delta_2".to_string(), d2),
            ("epsilon_1".to_string(), eps[0]),
            ("epsilon_2".to_string(), eps[1]),
            ("expansion_1".to_string(), x1),
            ("expansion_2".to_string(), x2),
        ]);
        let conditions = vec![
            Condition::new("Δ ≫ Γ₁", d1.min(d2), self.gamma1, DISPERSIVE_RATIO),
            Condition::new("J ≫ Γ₁", j, self.gamma1, DISPERSIVE_RATIO),
        ];
        Ok(CircuitModel { model, derived, conditions, warnings, at_degeneracy })
    }

    /// SQUID fluxes giving Δ = (√5 + 1)J/2 on each qubit.
    pub fn optimal_fluxes(&self) -> Result<(f64, f64)> {
        let k = CODATA;
        let target = GOLDEN * self.coupling(&k) / 2.0;
        Ok((flux_for_tunnelling(target, self.l_1, self.i_0, &k)?, flux_for_tunnelling(target, self.l_2, self.i_0, &k)?))
    }
}

/// Charge qubits coupled through a shared LC oscillator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeLcSpec {
    pub e_j0: f64,
    pub phi_x: f64,
    pub c_g: f64,
    pub c_j0: f64,
    pub l_osc: f64,
    pub gamma1: f64,
    #[serde(default)]
    pub gamma_phi: Option<f64>,
}

impl ChargeLcSpec {
    /// E_L = (2C_J⁰/C_qb)²·Φ₀²/(π²L) in Hz, with C_qb = 2C_J⁰C_g/(2C_J⁰ + C_g).
    pub fn e_l(&self, k: &PhysConstants) -> f64 {
        let c_qb = 2.0 * self.c_j0 * self.c_g / (2.0 * self.c_j0 + self.c_g);
        let r = 2.0 * self.c_j0 / c_qb;
        k.joules_to_hz(r * r * k.flux_quantum.powi(2) / (PI * PI * self.l_osc))
    }

    pub fn to_model(&self) -> Result<CircuitModel> {
        check_gamma1(self.gamma1)?;
        let k = CODATA;
        let mut warnings = Vec::new();
        let ej = split_junction_energy(self.e_j0, self.phi_x).abs();
        if ej < 1e-12 * self.e_j0.abs() {
            return Err(Error::ZeroQubitFrequency("cos(πΦx) = 0".into()));
        }
        let e_l = self.e_l(&k);
        let e_int = ej * ej / e_l;
        let gamma_phi = resolve_dephasing(true, self.gamma_phi, &mut warnings)?;
        let mu = ang(e_int) / 4.0;
        let model = ModelSpec {
            mu1: mu,
            phase1: PhaseSpec::Static(0.0),
            mu2: mu,
            theta2: PI,
            omega_a1: ang(ej),
            omega_a2: ang(ej),
            gamma1: ang(self.gamma1),
            gamma_phi,
        };
        let derived = BTreeMap::from([("E_J".to_string(), ej), ("E_L".to_string(), e_l), ("E_int".to_string(), e_int)]);
        let conditions = vec![
            Condition::new("E_L ≫ Γ₁", e_l, self.gamma1, DISPERSIVE_RATIO),
            Condition::new("E_J⁰ ≫ Γ₁", self.e_j0, self.gamma1, DISPERSIVE_RATIO),
        ];
        Ok(CircuitModel { model, derived, conditions, warnings, at_degeneracy: true })
    }

    /// Flux with cos(πΦx) = E_L/((√5 + 1)E_J⁰).
    pub fn optimal_flux(&self) -> Result<f64> {
        let c = self.e_l(&CODATA) / (GOLDEN * self.e_j0);
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::NoSolution(format!("cos(πΦx) = {c:.4} outside [0, 1]")));
        }
        Ok(c.acos() / PI)
    }
}

/// Flux qubits coupled through a tunable auxiliary flux qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxCouplerSpec {
    pub delta_1: f64,
    pub delta_2: f64,
    pub alpha: f64,
    pub i_p1: f64,
    pub i_p2: f64,
    pub e_j0: f64,
    pub phi_3: f64,
    /// Coupling amplitude J₀ in Hz; derived from the currents when absent.
    #[serde(default)]
    pub j0: Option<f64>,
    pub gamma1: f64,
    #[serde(default)]
    pub gamma_phi: Option<f64>,
}

impl FluxCouplerSpec {
    /// J₀ = αħ²I_p1I_p2/(4e²E_J⁰) in Hz.
    pub fn j0_from_currents(&self, k: &PhysConstants) -> f64 {
        let ej = self.e_j0 * k.planck;
        k.joules_to_hz(self.alpha * k.hbar().powi(2) * self.i_p1 * self.i_p2 / (4.0 * k.electron_charge.powi(2) * ej))
    }

    pub fn amplitude(&self, warnings: &mut Vec<String>) -> f64 {
        let from_currents = self.j0_from_currents(&CODATA);
        match self.j0 {
            Some(j0) => {
                if (j0 - from_currents).abs() > 0.01 * j0.abs().max(from_currents.abs()) {
                    warnings.push(format!("J0 = {j0:e} Hz overrides the current estimate {from_currents:e} Hz"));
                }
                j0
            }
            None => from_currents,
        }
    }

    pub fn to_model(&self) -> Result<CircuitModel> {
        check_gamma1(self.gamma1)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidSpec(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        let mut warnings = Vec::new();
        if self.alpha > ALPHA_LIMIT {
            warnings.push(format!("alpha = {} is not ≪ 1; the coupler expansion may be inaccurate", self.alpha));
        }
        let j0 = self.amplitude(&mut warnings);
        let j = j0 * (2.0 * PI * self.phi_3).cos();
        let gamma_phi = resolve_dephasing(true, self.gamma_phi, &mut warnings)?;
        let mu = ang(j) / 4.0;
        let (mu, theta) = if mu < 0.0 { (-mu, PI) } else { (mu, 0.0) };
        let model = ModelSpec {
            mu1: mu,
            phase1: PhaseSpec::Static(theta),
            mu2: mu,
            theta2: theta,
            omega_a1: ang(self.delta_1),
            omega_a2: ang(self.delta_2),
            gamma1: ang(self.gamma1),
            gamma_phi,
        };
        let derived = BTreeMap::from([("J0".to_string(), j0), ("J".to_string(), j)]);
        let conditions = vec![
            Condition::new("Δ ≫ Γ₁", self.delta_1.min(self.delta_2), self.gamma1, DISPERSIVE_RATIO),
            Condition::new("J₀ ≫ Γ₁", j0, self.gamma1, DISPERSIVE_RATIO),
        ];
        Ok(CircuitModel { model, derived, conditions, warnings, at_degeneracy: true })
    }

    /// Coupler flux with cos(2πΦ₃) = (Δ₁ + Δ₂)/((√5 + 1)J₀).
    pub fn optimal_phi3(&self) -> Result<f64> {
        let j0 = self.amplitude(&mut Vec::new());
        let c = (self.delta_1 + self.delta_2) / (GOLDEN * j0);
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::NoSolution(format!("cos(2πΦ₃) = {c:.4} outside [0, 1]: J₀ too small")));
        }
        Ok(c.acos() / (2.0 * PI))
    }
}

/// Charge qubits dispersively coupled to a resonator squeezed by a driven
/// three-level circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CqedSpec {
    pub e_j: f64,
    /// Bare resonator frequency ω̃_c.
    pub omega_c_bare: f64,
    pub g: f64,
    pub lambda_g: f64,
    pub lambda_e: f64,
    pub lambda_d: f64,
    pub delta: f64,
    /// Drive frequency Ω̃ of the classical field.
    pub omega_tilde: f64,
    /// Phase of the classical drive coupling λ_d.
    #[serde(default)]
    pub phi0_tilde: f64,
    pub gamma1: f64,
    #[serde(default)]
    pub gamma_phi: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedCavity {
    /// Squeezing amplitude ξ (same unit as the inputs).
    pub xi: f64,
    pub phi0_tilde: f64,
    /// Dressed resonator frequency ω_c.
    pub omega_c: f64,
}

/// ξe^{iφ̃₀} = 2λ_dλ_gλ_e/δ² and ω_c = ω̃_c + 2(λ_g² + λ_e²)/δ.
pub fn squeezed_cavity_params(lambda_g: f64, lambda_e: f64, lambda_d: f64, delta: f64, omega_c_bare: f64) -> Result<SqueezedCavity> {
    if delta == 0.0 {
        return Err(Error::Division("three-level detuning δ is zero".into()));
    }
    let amp = 2.0 * lambda_d * lambda_g * lambda_e / (delta * delta);
    Ok(SqueezedCavity {
        xi: amp.abs(),
        phi0_tilde: if amp < 0.0 { PI } else { 0.0 },
        omega_c: omega_c_bare + 2.0 * (lambda_g * lambda_g + lambda_e * lambda_e) / delta,
    })
}

impl CqedSpec {
    pub fn cavity(&self) -> Result<SqueezedCavity> {
        squeezed_cavity_params(self.lambda_g, self.lambda_e, self.lambda_d, self.delta, self.omega_c_bare)
    }

    /// Qubit-resonator detuning Δ = E_J − ω_c.
    pub fn detuning(&self) -> Result<f64> {
        let d = self.e_j - self.cavity()?.omega_c;
        if d == 0.0 {
            return Err(Error::Division("qubit-resonator detuning is zero".into()));
        }
        Ok(d)
    }

    pub fn to_model(&self) -> Result<CircuitModel> {
        check_gamma1(self.gamma1)?;
        let cav = self.cavity()?;
        let big_delta = self.detuning()?;
        let mut warnings = Vec::new();

        let hard = [
            Condition::new("Δ ≫ |g|", big_delta, self.g, DISPERSIVE_RATIO),
            Condition::new("δ ≫ |λ_g|", self.delta, self.lambda_g, DISPERSIVE_RATIO),
            Condition::new("δ ≫ |λ_e|", self.delta, self.lambda_e, DISPERSIVE_RATIO),
        ];
        let violated: Vec<String> = hard
            .iter()
            .filter(|c| !c.satisfied)
            .map(|c| format!("{} (ratio {:.3})", c.name, c.ratio))
            .collect();
        if !violated.is_empty() {
            return Err(Error::DispersiveRegime(violated));
        }

        let mu1 = 2.0 * self.g * self.g * cav.xi / (big_delta * big_delta);
        let mu2 = self.g * self.g / big_delta;
        let soft = [
            Condition::new("δ ≫ |Ω̃ − 2ω̃_c|", self.delta, self.omega_tilde - 2.0 * self.omega_c_bare, DISPERSIVE_RATIO),
            Condition::new("E_J/2 ≫ g²/Δ", self.e_j / 2.0, mu2, DISPERSIVE_RATIO),
            Condition::new("E_J/2 ≫ ξg/Δ", self.e_j / 2.0, cav.xi * self.g / big_delta, DISPERSIVE_RATIO),
        ];
        for c in soft.iter().filter(|c| !c.satisfied) {
            warnings.push(format!("{} holds only with ratio {:.3}", c.name, c.ratio));
        }
        let resonance = 2.0 * self.e_j;
        if (self.omega_tilde - resonance).abs() > 1e-12 * resonance {
            warnings.push(format!(
                "drive Ω̃ = {:e} Hz differs from 2E_J = {resonance:e} Hz; no static rotating frame exists",
                self.omega_tilde
            ));
        }
        let gamma_phi = resolve_dephasing(true, self.gamma_phi, &mut warnings)?;
        let model = ModelSpec {
            mu1: ang(mu1),
            phase1: PhaseSpec::Driven { omega: ang(self.omega_tilde), phi0: self.phi0_tilde + cav.phi0_tilde },
            mu2: ang(mu2),
            theta2: 0.0,
            omega_a1: ang(self.e_j),
            omega_a2: ang(self.e_j),
            gamma1: ang(self.gamma1),
            gamma_phi,
        };
        let derived = BTreeMap::from([
            ("xi".to_string(), cav.xi),
            ("omega_c".to_string(), cav.omega_c),
            ("Delta".to_string(), big_delta),
            ("mu1".to_string(), mu1),
            ("mu2".to_string(), mu2),
            ("omega_a_dressed".to_string(), self.e_j + 4.0 * self.g * self.g / big_delta),
        ]);
        let conditions = hard.into_iter().chain(soft).collect();
        Ok(CircuitModel { model, derived, conditions, warnings, at_degeneracy: true })
    }

    /// ξ = Δ²Γ₁/((√5 + 1)g²), the printed optimum for this design.
    pub fn printed_optimal_xi(&self) -> Result<f64> {
        let d = self.detuning()?;
        Ok(d * d * self.gamma1 / (GOLDEN * self.g * self.g))
    }

    /// ξ for which μ₁ = 2g²ξ/Δ² equals the weak-regime optimal coupling.
    pub fn matched_optimal_xi(&self) -> Result<f64> {
        let d = self.detuning()?;
        let mu = weak_optimal(self.gamma1, 0.0)?.mu1_opt;
        Ok(mu * d * d / (2.0 * self.g * self.g))
    }

    /// λ_d giving squeezing amplitude ξ.
    pub fn lambda_d_for(&self, xi: f64) -> Result<f64> {
        let prod = self.lambda_g * self.lambda_e;
        if prod == 0.0 {
            return Err(Error::Division("λ_g·λ_e is zero".into()));
        }
        Ok(xi * self.delta * self.delta / (2.0 * prod.abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircuitSpec {
    ChargeDirect(ChargeDirectSpec),
    FluxDirect(FluxDirectSpec),
    ChargeLc(ChargeLcSpec),
    FluxCoupler(FluxCouplerSpec),
    Cqed(CqedSpec),
}

/// A circuit with its tuning knob set to the closed-form optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalKnob {
    pub knob: String,
    pub value: f64,
    pub circuit: CircuitSpec,
    pub mapped: CircuitModel,
    /// Closed-form optimum for the mapped model's rates.
    pub predicted: OptimalPoint,
}

impl CircuitSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CircuitSpec::ChargeDirect(_) => "charge_direct",
            CircuitSpec::FluxDirect(_) => "flux_direct",
            CircuitSpec::ChargeLc(_) => "charge_lc",
            CircuitSpec::FluxCoupler(_) => "flux_coupler",
            CircuitSpec::Cqed(_) => "cqed",
        }
    }

    pub fn to_model(&self) -> Result<CircuitModel> {
        match self {
            CircuitSpec::ChargeDirect(s) => s.to_model(),
            CircuitSpec::FluxDirect(s) => s.to_model(),
            CircuitSpec::ChargeLc(s) => s.to_model(),
            CircuitSpec::FluxCoupler(s) => s.to_model(),
            CircuitSpec::Cqed(s) => s.to_model(),
        }
    }

    /// Sets the design's knob from its optimal-condition formula.
    pub fn optimal(&self) -> Result<OptimalKnob> {
        let (knob, value, circuit) = match self {
            CircuitSpec::ChargeDirect(s) => {
                let phi = s.optimal_flux()?;
                ("phi_x", phi, CircuitSpec::ChargeDirect(ChargeDirectSpec { phi_x1: phi, phi_x2: phi, ..s.clone() }))
            }
            CircuitSpec::FluxDirect(s) => {
                let (p1, p2) = s.optimal_fluxes()?;
                ("phi_c", p1, CircuitSpec::FluxDirect(FluxDirectSpec { phi_c1: p1, phi_c2: p2, ..s.clone() }))
            }
            CircuitSpec::ChargeLc(s) => {
                let phi = s.optimal_flux()?;
                ("phi_x", phi, CircuitSpec::ChargeLc(ChargeLcSpec { phi_x: phi, ..s.clone() }))
            }
            CircuitSpec::FluxCoupler(s) => {
                let phi = s.optimal_phi3()?;
                ("phi_3", phi, CircuitSpec::FluxCoupler(FluxCouplerSpec { phi_3: phi, ..s.clone() }))
            }
            CircuitSpec::Cqed(s) => {
                let xi = s.printed_optimal_xi()?;
                let lambda_d = s.lambda_d_for(xi)?;
                ("lambda_d", lambda_d, CircuitSpec::Cqed(CqedSpec { lambda_d, ..s.clone() }))
            }
        };
        let mapped = circuit.to_model()?;
        let m = &mapped.model;
        let predicted = match m.phase1 {
            PhaseSpec::Static(_) => strong_optimal(m.big_omega(), m.gamma1, m.gamma_phi)?,
            PhaseSpec::Driven { .. } => weak_optimal(m.gamma1, m.gamma_phi)?,
        };
        Ok(OptimalKnob { knob: knob.to_string(), value, circuit, mapped, predicted })
    }
}

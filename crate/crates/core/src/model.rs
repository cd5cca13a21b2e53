//! Two-qubit Hamiltonian, Lindblad generator and its vectorized form.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{operator_set, re, Mat4, Qubit, C64, I};

pub type Superop = SMatrix<C64, 16, 16>;
pub type VecState = SVector<C64, 16>;

/// Phase of the μ₁ (σ₊σ₊) coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSpec {
    Static(f64),
    /// θ₁(t) = omega·t + phi0.
    Driven { omega: f64, phi0: f64 },
}

impl PhaseSpec {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            PhaseSpec::Static(theta) => theta,
            PhaseSpec::Driven { omega, phi0 } => omega * t + phi0,
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, PhaseSpec::Static(_))
    }
}

/// Parameters of the coupled-qubit model. All frequencies and rates share one
/// angular-frequency unit chosen by the caller (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub mu1: f64,
    pub phase1: PhaseSpec,
    pub mu2: f64,
    pub theta2: f64,
    pub omega_a1: f64,
    pub omega_a2: f64,
    pub gamma1: f64,
    pub gamma_phi: f64,
}

impl ModelSpec {
    /// Static-phase model with identical qubits splitting `omega_total` evenly.
    pub fn symmetric(omega_total: f64, mu1: f64, theta1: f64, gamma1: f64, gamma_phi: f64) -> Self {
        Self {
            mu1,
            phase1: PhaseSpec::Static(theta1),
            mu2: 0.0,
            theta2: 0.0,
            omega_a1: omega_total / 2.0,
            omega_a2: omega_total / 2.0,
            gamma1,
            gamma_phi,
        }
    }

    /// Ω = ω_a1 + ω_a2.
    pub fn big_omega(&self) -> f64 {
        self.omega_a1 + self.omega_a2
    }

    /// Γ₂ = Γ₁/2 + Γ_φ.
    pub fn gamma2(&self) -> f64 {
        0.5 * self.gamma1 + self.gamma_phi
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu1,
            self.mu2,
            self.theta2,
            self.omega_a1,
            self.omega_a2,
            self.gamma1,
            self.gamma_phi,
            self.phase1.at(0.0),
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        if self.mu1 < 0.0 {
            return Err(Error::InvalidSpec(format!("mu1 = {} must be ≥ 0", self.mu1)));
        }
        if self.omega_a1 < 0.0 || self.omega_a2 < 0.0 {
            return Err(Error::InvalidSpec("qubit frequencies must be ≥ 0".into()));
        }
        if self.gamma1 < 0.0 || self.gamma_phi < 0.0 {
            return Err(Error::InvalidSpec("decoherence rates must be ≥ 0".into()));
        }
        if let PhaseSpec::Driven { omega, phi0 } = self.phase1 {
            if omega < 0.0 || !omega.is_finite() || !phi0.is_finite() {
                return Err(Error::InvalidSpec("drive frequency must be finite and ≥ 0".into()));
            }
        }
        Ok(())
    }
}

/// σ₊⁽¹⁾σ₊⁽²⁾ and σ₊⁽¹⁾σ₋⁽²⁾.
fn coupling_ops() -> (Mat4, Mat4) {
    let o = operator_set();
    (o.q1.splus * o.q2.splus, o.q1.splus * o.q2.sminus)
}

pub fn hamiltonian_at(spec: &ModelSpec, t: f64) -> Mat4 {
    let o = operator_set();
    let (pp, pm) = coupling_ops();
    let theta1 = spec.phase1.at(t);
    let e1 = C64::from_polar(spec.mu1, -theta1);
    let e2 = C64::from_polar(spec.mu2, -spec.theta2);
    pp * e1
        + pp.adjoint() * e1.conj()
        + pm * e2
        + pm.adjoint() * e2.conj()
        + o.q1.sz * re(0.5 * spec.omega_a1)
        + o.q2.sz * re(0.5 * spec.omega_a2)
}

/// D[L]ρ = LρL† − ½L†Lρ − ½ρL†L.
pub fn dissipator(l: &Mat4, rho: &Mat4) -> Mat4 {
    let ld = l.adjoint();
    let ldl = ld * l;
    l * rho * ld - (ldl * rho + rho * ldl) * re(0.5)
}

/// Jump operators with their rates: Γ₁ on σ₋⁽ʲ⁾ and 2Γ_φ on σz⁽ʲ⁾.
pub fn jump_operators(spec: &ModelSpec) -> Vec<(f64, Mat4)> {
    let o = operator_set();
    let mut jumps = Vec::with_capacity(4);
    for q in Qubit::BOTH {
        if spec.gamma1 > 0.0 {
            jumps.push((spec.gamma1, o.qubit(q).sminus));
        }
    }
    for q in Qubit::BOTH {
        if spec.gamma_phi > 0.0 {
            jumps.push((2.0 * spec.gamma_phi, o.qubit(q).sz));
        }
    }
    jumps
}

/// Precomputed master-equation right-hand side for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    spec: ModelSpec,
    diag: Mat4,
    pp: Mat4,
    pm_term: Mat4,
    jumps: Vec<(f64, Mat4, Mat4, Mat4)>,
}

impl Lindbladian {
    pub fn new(spec: &ModelSpec) -> Self {
        let o = operator_set();
        let (pp, pm) = coupling_ops();
        let e2 = C64::from_polar(spec.mu2, -spec.theta2);
        let jumps = jump_operators(spec)
            .into_iter()
            .map(|(rate, l)| {
                let ld = l.adjoint();
                let half_ldl = ld * l * re(0.5 * rate);
                (rate, l, ld, half_ldl)
            })
            .collect();
        Self {
            spec: *spec,
            diag: o.q1.sz * re(0.5 * spec.omega_a1) + o.q2.sz * re(0.5 * spec.omega_a2),
            pp,
            pm_term: pm * e2 + pm.adjoint() * e2.conj(),
            jumps,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn hamiltonian(&self, t: f64) -> Mat4 {
        let e1 = C64::from_polar(self.spec.mu1, -self.spec.phase1.at(t));
        self.diag + self.pm_term + self.pp * e1 + self.pp.adjoint() * e1.conj()
    }

    pub fn rhs(&self, rho: &Mat4, t: f64) -> Mat4 {
        let h = self.hamiltonian(t);
        let mut out = (h * rho - rho * h) * (-I);
        for (rate, l, ld, half_ldl) in &self.jumps {
            out += l * rho * ld * re(*rate) - half_ldl * rho - rho * half_ldl;
        }
        out
    }
}

/// −i[H(t), ρ] + Σⱼ Γ₁D[σ₋⁽ʲ⁾]ρ + Σⱼ 2Γ_φD[σz⁽ʲ⁾]ρ.
///
/// Takes a bare matrix so that intermediate integrator stages (which need not
/// be states) can be evaluated too.
pub fn lindblad_rhs(spec: &ModelSpec, rho: &Mat4, t: f64) -> Mat4 {
    let h = hamiltonian_at(spec, t);
    let mut out = (h * rho - rho * h) * (-I);
    for (rate, l) in jump_operators(spec) {
        out += dissipator(&l, rho) * re(rate);
    }
    out
}

/// Column-stacking vectorization: `vec(ρ)[r + 4c] = ρ[r, c]`.
pub fn vectorize(m: &Mat4) -> VecState {
    VecState::from_fn(|k, _| m[(k % 4, k / 4)])
}

pub fn unvectorize(v: &VecState) -> Mat4 {
    Mat4::from_fn(|r, col| v[r + 4 * col])
}

/// `X ⊗ Y` for 4×4 factors.
fn kron4(x: &Mat4, y: &Mat4) -> Superop {
    Superop::from_fn(|r, col| x[(r / 4, col / 4)] * y[(r % 4, col % 4)])
}

/// Superoperator of the right-hand side in the column-stacking convention,
/// using vec(AρB) = (Bᵀ ⊗ A)·vec(ρ).
pub fn liouvillian(spec: &ModelSpec, t: f64) -> Superop {
    let id = Mat4::identity();
    let h = hamiltonian_at(spec, t);
    let mut sup = (kron4(&id, &h) - kron4(&h.transpose(), &id)) * (-I);
    for (rate, l) in jump_operators(spec) {
        let ldl = l.adjoint() * l;
        let term = kron4(&l.conjugate(), &l)
            - (kron4(&id, &ldl) + kron4(&ldl.transpose(), &id)) * re(0.5);
        sup += term * re(rate);
    }
    sup
}

/// Time dependence left over after moving to the rotating frame: the μ₂
/// exchange term picks up e^{i(ω_a1 − ω_a2)t}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualDrive {
    pub mu2: f64,
    pub theta2: f64,
    pub frequency: f64,
}

/// Model seen in the frame V(t) = exp(it(ω_a1σz⁽¹⁾ + ω_a2σz⁽²⁾)/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatingFrame {
    /// Static model in the rotating frame. When `residual` is set, its μ₂ is
    /// zero and the exchange term lives in `residual` instead.
    pub spec: ModelSpec,
    pub residual: Option<ResidualDrive>,
    pub omega_a1: f64,
    pub omega_a2: f64,
}

impl RotatingFrame {
    /// V(t), diagonal in the computational basis.
    pub fn unitary(&self, t: f64) -> Mat4 {
        let o = operator_set();
        let gen = o.q1.sz * re(self.omega_a1) + o.q2.sz * re(self.omega_a2);
        Mat4::from_fn(|r, col| {
            if r == col {
                (I * gen[(r, r)] * re(0.5 * t)).exp()
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Full rotating-frame Hamiltonian, residual term included.
    pub fn hamiltonian_at(&self, t: f64) -> Mat4 {
        let mut h = hamiltonian_at(&self.spec, t);
        if let Some(r) = self.residual {
            let (_, pm) = coupling_ops();
            let e = C64::from_polar(r.mu2, -r.theta2 + r.frequency * t);
            h += pm * e + pm.adjoint() * e.conj();
        }
        h
    }

    /// Lab-frame state → rotating frame: VρV†.
    pub fn to_rotating(&self, rho_lab: &Mat4, t: f64) -> Mat4 {
        let v = self.unitary(t);
        v * rho_lab * v.adjoint()
    }

    pub fn to_lab(&self, rho_rot: &Mat4, t: f64) -> Mat4 {
        let v = self.unitary(t);
        v.adjoint() * rho_rot * v
    }
}

/// Removes the single-qubit precession of a driven model whose drive matches
/// Ω = ω_a1 + ω_a2. Dissipators are unchanged because the jump operators only
/// pick up phases under V(t).
pub fn rotating_frame(spec: &ModelSpec) -> Result<RotatingFrame> {
    let (omega, phi0) = match spec.phase1 {
        PhaseSpec::Driven { omega, phi0 } => (omega, phi0),
        PhaseSpec::Static(_) => {
            return Err(Error::InvalidSpec("rotating frame needs a driven phase".into()))
        }
    };
    let expected = spec.big_omega();
    let scale = expected.abs().max(omega.abs()).max(1.0);
    if (omega - expected).abs() > 1e-12 * scale {
        return Err(Error::UnsupportedFrame { expected, got: omega });
    }
    let detuning = spec.omega_a1 - spec.omega_a2;
    let residual = (spec.mu2 != 0.0 && detuning != 0.0).then_some(ResidualDrive {
        mu2: spec.mu2,
        theta2: spec.theta2,
        frequency: detuning,
    });
    let rotated = ModelSpec {
        phase1: PhaseSpec::Static(phi0),
        mu2: if residual.is_some() { 0.0 } else { spec.mu2 },
        omega_a1: 0.0,
        omega_a2: 0.0,
        ..*spec
    };
    Ok(RotatingFrame {
        spec: rotated,
        residual,
        omega_a1: spec.omega_a1,
        omega_a2: spec.omega_a2,
    })
}

//! Coherent-vector picture: an orthonormal traceless operator basis, the
//! affine generator ṁ = A·m + g and its closed-form fixed point.

use std::sync::OnceLock;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::analytic::{strong_parameters, Branch};
use crate::error::{Error, Result};
use crate::model::{Lindbladian, ModelSpec, PhaseSpec};
use crate::quantum::{c, operator_set, re, DensityMatrix, Mat4};

pub const DIM: usize = 15;
pub type Vec15 = SVector<f64, DIM>;
pub type Mat15 = SMatrix<f64, DIM, DIM>;

/// Position of each coordinate in the 15-vector.
pub mod idx {
    pub const M14X: usize = 0;
    pub const M14Y: usize = 1;
    pub const M23X: usize = 2;
    pub const M23Y: usize = 3;
    pub const X0: usize = 4;
    pub const Y0: usize = 5;
    pub const OX: usize = 6;
    pub const OY: usize = 7;
    pub const XZ: usize = 8;
    pub const ZX: usize = 9;
    pub const YZ: usize = 10;
    pub const ZY: usize = 11;
    pub const M14Z: usize = 12;
    pub const M23Z: usize = 13;
    pub const ZZ: usize = 14;

    pub const P: [usize; 4] = [M14X, M14Y, M23X, M23Y];
    pub const ETA: [usize; 3] = [M14Z, M23Z, ZZ];
    pub const EPS: [usize; 8] = [X0, Y0, OX, OY, XZ, ZX, YZ, ZY];
}

pub const NAMES: [&str; DIM] = [
    "m14x", "m14y", "m23x", "m23y", "mx0", "my0", "m0x", "m0y", "mxz", "mzx", "myz", "mzy", "m14z",
    "m23z", "mzz",
];

#[derive(Clone, Debug)]
pub struct BasisSet {
    /// I/2, the sixteenth element.
    pub identity: Mat4,
    pub elements: [Mat4; DIM],
}

impl BasisSet {
    /// All sixteen matrices, I/2 first.
    pub fn all(&self) -> Vec<Mat4> {
        std::iter::once(self.identity).chain(self.elements.iter().copied()).collect()
    }
}

fn two_level(i: usize, j: usize, kind: char) -> Mat4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Mat4::zeros();
    match kind {
        'x' => {
            m[(i, j)] = re(s);
            m[(j, i)] = re(s);
        }
        'y' => {
            m[(i, j)] = c(0.0, -s);
            m[(j, i)] = c(0.0, s);
        }
        _ => {
            m[(i, i)] = re(s);
            m[(j, j)] = re(-s);
        }
    }
    m
}

pub fn basis() -> &'static BasisSet {
    static BASIS: OnceLock<BasisSet> = OnceLock::new();
    BASIS.get_or_init(|| {
        let o = operator_set();
        let (a, b) = (&o.q1, &o.q2);
        let h = re(0.5);
        BasisSet {
            identity: Mat4::identity() * h,
            elements: [
                two_level(0, 3, 'x'),
                two_level(0, 3, 'y'),
                two_level(1, 2, 'x'),
                two_level(1, 2, 'y'),
                a.sx * h,
                a.sy * h,
                b.sx * h,
                b.sy * h,
                a.sx * b.sz * h,
                a.sz * b.sx * h,
                a.sy * b.sz * h,
                a.sz * b.sy * h,
                two_level(0, 3, 'z'),
                two_level(1, 2, 'z'),
                a.sz * b.sz * h,
            ],
        }
    })
}

/// 15 real coordinates m_i = tr(Ω_i ρ), so that ρ = I/4 + Σ m_i Ω_i.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentVector(pub Vec15);

impl CoherentVector {
    pub fn zeros() -> Self {
        Self(Vec15::zeros())
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn p_block(&self) -> [f64; 4] {
        idx::P.map(|i| self.0[i])
    }

    pub fn eta_block(&self) -> [f64; 3] {
        idx::ETA.map(|i| self.0[i])
    }

    pub fn eps_block(&self) -> [f64; 8] {
        idx::EPS.map(|i| self.0[i])
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

pub fn encode_matrix(rho: &Mat4) -> Vec15 {
    let b = basis();
    Vec15::from_fn(|i, _| (b.elements[i] * rho).trace().re)
}

pub fn encode(rho: &DensityMatrix) -> CoherentVector {
    CoherentVector(encode_matrix(rho.matrix()))
}

pub fn decode_matrix(m: &Vec15) -> Mat4 {
    let b = basis();
    b.elements
        .iter()
        .zip(m.iter())
        .fold(Mat4::identity() * re(0.25), |acc, (om, &mi)| acc + om * re(mi))
}

/// Hermitian with unit trace by construction; positivity is not checked.
pub fn decode(m: &CoherentVector) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(decode_matrix(&m.0))
}

/// ṁ = A·m + g for a static-phase model.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineGenerator {
    pub a: Mat15,
    pub g: Vec15,
    /// u₁ = 8μ₁cosθ₁, u₂ = 8μ₁sinθ₁, u₃ = 8μ₂cosθ₂, u₄ = −8μ₂sinθ₂.
    pub u: [f64; 4],
}

impl AffineGenerator {
    pub fn apply(&self, m: &Vec15) -> Vec15 {
        self.a * m + self.g
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.a[(row, col)]
    }

    /// Sub-block of A selected by coordinate index lists.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter().map(|&r| cols.iter().map(|&col| self.a[(r, col)]).collect()).collect()
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.a.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// m∞ = −A⁻¹g.
    pub fn fixed_point(&self) -> Option<Vec15> {
        self.a.lu().solve(&(-self.g))
    }
}

/// Projects the master equation onto the basis column by column, so every
/// block is derived from the same right-hand side used by the integrators.
pub fn generator(spec: &ModelSpec) -> Result<AffineGenerator> {
    let theta1 = match spec.phase1 {
        PhaseSpec::Static(theta) => theta,
        PhaseSpec::Driven { .. } => return Err(Error::RequiresRotatingFrame),
    };
    spec.validate()?;
    let b = basis();
    let lind = Lindbladian::new(spec);
    let g = encode_matrix(&lind.rhs(&(Mat4::identity() * re(0.25)), 0.0));
    let mut a = Mat15::zeros();
    for (j, om) in b.elements.iter().enumerate() {
        a.set_column(j, &encode_matrix(&lind.rhs(om, 0.0)));
    }
    let u = [
        8.0 * spec.mu1 * theta1.cos(),
        8.0 * spec.mu1 * theta1.sin(),
        8.0 * spec.mu2 * spec.theta2.cos(),
        -8.0 * spec.mu2 * spec.theta2.sin(),
    ];
    Ok(AffineGenerator { a, g, u })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormStationary {
    pub m: CoherentVector,
    pub p: f64,
    /// Phase χ of the |00⟩⟨11| element: ρ₀₃ = (p/2)e^{−iχ}.
    pub target_phase: f64,
    pub branch: Branch,
}

/// Fixed point in closed form: m_ε = 0, m₂₃ = 0, the m₁₄ pair carrying the
/// coherence and (m₁₄ᶻ, m_zz) from the square-root expression.
///
/// The root is taken with the sign that matches the exact fixed point
/// (`branch`), which flips where 128μ₁²Γ₂ exceeds Γ₁(Ω² + 64Γ₂²).
pub fn stationary_closed_form(spec: &ModelSpec) -> Result<ClosedFormStationary> {
    let theta1 = match spec.phase1 {
        PhaseSpec::Static(theta) => theta,
        PhaseSpec::Driven { .. } => return Err(Error::RequiresRotatingFrame),
    };
    spec.validate()?;
    let sp = strong_parameters(spec.big_omega(), spec.mu1, spec.gamma1, spec.gamma_phi)?;
    let chi = std::f64::consts::PI - theta1 - sp.phi;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let lift = 1.0 + sp.signed_root();
    let mut m = Vec15::zeros();
    m[idx::M14X] = s * sp.p * chi.cos();
    m[idx::M14Y] = s * sp.p * chi.sin();
    m[idx::M14Z] = std::f64::consts::SQRT_2 / 4.0 * lift;
    m[idx::ZZ] = 0.25 * lift;
    Ok(ClosedFormStationary { m: CoherentVector(m), p: sp.p, target_phase: chi, branch: sp.branch })
}

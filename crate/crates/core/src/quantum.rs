//! Complex matrix kernel and two-qubit operator algebra.
//!
//! Conventions used everywhere else in the crate:
//!
//! * basis order is (|00⟩, |01⟩, |10⟩, |11⟩), first tensor factor is qubit 1;
//! * |1⟩ is the excited state: σz|0⟩ = −|0⟩, σz|1⟩ = +|1⟩;
//! * ladder operators are *not* halved: σ± = σx ± iσy, so σ₋|1⟩ = 2|0⟩.
//!
//! The last point fixes every rate prefactor in the coherent-vector generator
//! (e.g. the −8Γ₂ damping of the |00⟩/|11⟩ coherences).

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Ket = Vector4<C64>;

/// Hermiticity tolerance for matrices built in closed form.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Hermiticity and trace tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Allowed negative eigenvalue for numerically propagated states.
pub const POSITIVITY_SLACK: f64 = 1e-8;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Single-qubit matrices in the (|0⟩, |1⟩) basis.
pub mod pauli {
    use super::{c, Mat2, ONE, ZERO};

    pub fn id() -> Mat2 {
        Mat2::identity()
    }

    pub fn x() -> Mat2 {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    /// Fixed by σ₋ = σx − iσy = 2|0⟩⟨1| together with σz = diag(−1, 1).
    pub fn y() -> Mat2 {
        Mat2::new(ZERO, c(0.0, 1.0), c(0.0, -1.0), ZERO)
    }

    pub fn z() -> Mat2 {
        Mat2::new(-ONE, ZERO, ZERO, ONE)
    }

    pub fn plus() -> Mat2 {
        x() + y() * c(0.0, 1.0)
    }

    pub fn minus() -> Mat2 {
        x() - y() * c(0.0, 1.0)
    }
}

/// Kronecker product of two single-qubit operators.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Which of the two qubits an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Qubit {
    First,
    Second,
}

impl Qubit {
    pub const BOTH: [Qubit; 2] = [Qubit::First, Qubit::Second];
}

/// Embed a single-qubit operator on `q`, identity on the other factor.
pub fn embed(op: &Mat2, q: Qubit) -> Mat4 {
    match q {
        Qubit::First => kron(op, &pauli::id()),
        Qubit::Second => kron(&pauli::id(), op),
    }
}

#[derive(Clone, Debug)]
pub struct QubitOps {
    pub sx: Mat4,
    pub sy: Mat4,
    pub sz: Mat4,
    pub splus: Mat4,
    pub sminus: Mat4,
}

impl QubitOps {
    fn on(q: Qubit) -> Self {
        Self {
            sx: embed(&pauli::x(), q),
            sy: embed(&pauli::y(), q),
            sz: embed(&pauli::z(), q),
            splus: embed(&pauli::plus(), q),
            sminus: embed(&pauli::minus(), q),
        }
    }
}

/// The ten embedded single-qubit operators.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub q1: QubitOps,
    pub q2: QubitOps,
}

impl OperatorSet {
    pub fn qubit(&self, q: Qubit) -> &QubitOps {
        match q {
            Qubit::First => &self.q1,
            Qubit::Second => &self.q2,
        }
    }
}

pub fn operator_set() -> &'static OperatorSet {
    static OPS: OnceLock<OperatorSet> = OnceLock::new();
    OPS.get_or_init(|| OperatorSet {
        q1: QubitOps::on(Qubit::First),
        q2: QubitOps::on(Qubit::Second),
    })
}

/// Spin-flip operator σy⊗σy used by the Wootters construction (standard Pauli,
/// independent of the ladder normalization).
pub fn spin_flip() -> Mat4 {
    kron(&pauli::y(), &pauli::y())
}

pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &Mat4) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * re(0.5)
}

/// Computational basis ket |b₁b₂⟩ with `index = 2·b₁ + b₂`.
pub fn basis_ket(index: usize) -> Ket {
    let mut k = Ket::zeros();
    k[index] = ONE;
    k
}

/// Eigenvalues (ascending) of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &Mat4) -> [f64; 4] {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut vals = [
        eig.eigenvalues[0],
        eig.eigenvalues[1],
        eig.eigenvalues[2],
        eig.eigenvalues[3],
    ];
    vals.sort_by(f64::total_cmp);
    vals
}

/// A 4×4 density matrix of the two-qubit system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at `STATE_TOL` /
    /// `POSITIVITY_SLACK`.
    pub fn new(mat: Mat4) -> Result<Self> {
        let rho = Self(mat);
        let violations = check_physical_with(&rho, STATE_TOL, POSITIVITY_SLACK);
        if violations.is_empty() {
            Ok(rho)
        } else {
            let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(Error::NonPhysical(msg.join("; ")))
        }
    }

    /// Wrap without validation. Use `check_physical` to inspect afterwards.
    pub fn from_matrix_unchecked(mat: Mat4) -> Self {
        Self(mat)
    }

    pub fn ground() -> Self {
        Self(basis_ket(0) * basis_ket(0).adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat4::identity() * re(0.25))
    }

    pub fn diagonal(p: [f64; 4]) -> Self {
        Self(Mat4::from_diagonal(&Vector4::new(re(p[0]), re(p[1]), re(p[2]), re(p[3]))))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.0[(r, col)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        0.5 * hermitian_eigenvalues(&(self.0 - other.0))
            .iter()
            .map(|l| l.abs())
            .sum::<f64>()
    }

    /// Largest entrywise deviation.
    pub fn max_deviation(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(self.0 - other.0))
    }

    /// Conjugate by a unitary: UρU†.
    pub fn conjugated(&self, u: &Mat4) -> Self {
        Self(u * self.0 * u.adjoint())
    }

    /// Project onto Hermitian matrices and rescale to unit trace.
    pub fn renormalized(&self) -> Self {
        let h = hermitian_part(&self.0);
        let tr = h.trace().re;
        Self(h * re(1.0 / tr))
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..4 {
            for col in 0..4 {
                let z = self.0[(r, col)];
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Wire form: separate real and imaginary row-major 4×4 arrays.
#[derive(Serialize, Deserialize)]
struct DensityMatrixWire {
    re: [[f64; 4]; 4],
    im: [[f64; 4]; 4],
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut wire = DensityMatrixWire { re: [[0.0; 4]; 4], im: [[0.0; 4]; 4] };
        for r in 0..4 {
            for col in 0..4 {
                wire.re[r][col] = self.0[(r, col)].re;
                wire.im[r][col] = self.0[(r, col)].im;
            }
        }
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = DensityMatrixWire::deserialize(d)?;
        let m = Mat4::from_fn(|r, col| c(wire.re[r][col], wire.im[r][col]));
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Normalized pure state |v⟩⟨v|.
pub fn dm_from_pure(v: &Ket) -> Result<DensityMatrix> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let u = v / re(n);
    Ok(DensityMatrix(u * u.adjoint()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NotHermitian { deviation: f64 },
    TraceNotOne { trace: C64 },
    NotPositive { min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { deviation } => {
                write!(f, "not Hermitian (max |ρ − ρ†| = {deviation:e})")
            }
            Violation::TraceNotOne { trace } => {
                write!(f, "trace = {}{:+}i", trace.re, trace.im)
            }
            Violation::NotPositive { min_eigenvalue } => {
                write!(f, "negative eigenvalue {min_eigenvalue:e}")
            }
        }
    }
}

/// Report-only physicality check with one tolerance for all three properties.
pub fn check_physical(rho: &DensityMatrix, tol: f64) -> Vec<Violation> {
    check_physical_with(rho, tol, tol)
}

pub fn check_physical_with(rho: &DensityMatrix, tol: f64, positivity_tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let herm = hermiticity_error(&rho.0);
    if !(herm <= tol) {
        out.push(Violation::NotHermitian { deviation: herm });
    }
    let tr = rho.trace();
    if !((tr - ONE).norm() <= tol) {
        out.push(Violation::TraceNotOne { trace: tr });
    }
    let min_eig = rho.min_eigenvalue();
    if !(min_eig >= -positivity_tol) {
        out.push(Violation::NotPositive { min_eigenvalue: min_eig });
    }
    out
}

//! Concurrence and overlap fidelity.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{re, spin_flip, DensityMatrix, Mat4, C64, POSITIVITY_SLACK};

/// ρ eigenvalues below this are rounding noise around zero; keeping them
/// would leak √ε-sized contributions into the λᵢ of near-pure states.
const RANK_TOL: f64 = 64.0 * f64::EPSILON;

fn psd_sqrt(m: &Mat4) -> Result<Mat4> {
    let eig = SymmetricEigen::new(*m);
    let mut vals = [0.0; 4];
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l < -POSITIVITY_SLACK {
            return Err(Error::NonPhysical(format!("state has eigenvalue {l:e}")));
        }
        vals[k] = if l < RANK_TOL { 0.0 } else { l.sqrt() };
    }
    let d = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| re(vals[k])));
    Ok(eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Wootters concurrence max{λ₁ − λ₂ − λ₃ − λ₄, 0}, with λᵢ the decreasing
/// square roots of the spectrum of ρ(σy⊗σy)ρ*(σy⊗σy).
///
/// The λᵢ are computed as the singular values of √ρ(σy⊗σy)√ρ*, whose squares
/// are that spectrum, so no square root of a near-zero eigenvalue is taken.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    concurrence_matrix(rho.matrix())
}

pub fn concurrence_matrix(rho: &Mat4) -> Result<f64> {
    let root = psd_sqrt(&((rho + rho.adjoint()) * re(0.5)))?;
    let s = root * spin_flip() * root.conjugate();
    let mut lam = s.singular_values().as_slice().to_vec();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
}

/// A state supported on the diagonal and anti-diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XStateEntries {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// ⟨00|ρ|11⟩
    pub w: C64,
    /// ⟨01|ρ|10⟩
    pub z: C64,
}

impl XStateEntries {
    /// Reads the X entries; other elements are ignored.
    pub fn from_matrix(m: &Mat4) -> Self {
        Self {
            a: m[(0, 0)].re,
            b: m[(1, 1)].re,
            c: m[(2, 2)].re,
            d: m[(3, 3)].re,
            w: m[(0, 3)],
            z: m[(1, 2)],
        }
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        m[(0, 0)] = re(self.a);
        m[(1, 1)] = re(self.b);
        m[(2, 2)] = re(self.c);
        m[(3, 3)] = re(self.d);
        m[(0, 3)] = self.w;
        m[(3, 0)] = self.w.conj();
        m[(1, 2)] = self.z;
        m[(2, 1)] = self.z.conj();
        m
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let sum = self.a + self.b + self.c + self.d;
        (sum - 1.0).abs() <= tol
            && [self.a, self.b, self.c, self.d].iter().all(|&x| x >= -tol)
            && self.w.norm_sqr() <= self.a * self.d + tol
            && self.z.norm_sqr() <= self.b * self.c + tol
    }
}

/// 2·max{|w| − √(bc), |z| − √(ad), 0}.
pub fn concurrence_x(x: &XStateEntries) -> f64 {
    let bc = (x.b * x.c).max(0.0).sqrt();
    let ad = (x.a * x.d).max(0.0).sqrt();
    2.0 * (x.w.norm() - bc).max(x.z.norm() - ad).max(0.0)
}

/// Overlap fidelity tr(σρ). This is the linear overlap, which coincides with
/// the Uhlmann fidelity only when one argument is pure.
pub fn fidelity_with(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    (sigma.matrix() * rho.matrix()).trace().re
}

/// ½(|00⟩ + e^{i·phase}|11⟩)(⟨00| + e^{−i·phase}⟨11|), i.e. ⟨00|ρ|11⟩ = ½e^{−i·phase}.
pub fn bell_target(phase: f64) -> DensityMatrix {
    let mut m = Mat4::zeros();
    m[(0, 0)] = re(0.5);
    m[(3, 3)] = re(0.5);
    m[(0, 3)] = C64::from_polar(0.5, -phase);
    m[(3, 0)] = C64::from_polar(0.5, phase);
    DensityMatrix::from_matrix_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{basis_ket, dm_from_pure, kron, Mat2};
    use nalgebra::Schur;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct evaluation through the non-Hermitian product and a Schur form.
    fn wootters_oracle(rho: &Mat4) -> f64 {
        let yy = spin_flip();
        let m = rho * yy * rho.conjugate() * yy;
        let (_, t) = Schur::new(m).unpack();
        let mut lam: Vec<f64> = (0..4).map(|k| t[(k, k)].re.max(0.0).sqrt()).collect();
        lam.sort_by(|a, b| b.total_cmp(a));
        (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
    }

    fn random_x(rng: &mut ChaCha8Rng) -> XStateEntries {
        let mut p: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let w = C64::from_polar((p[0] * p[3]).sqrt() * rng.random_range(0.0..1.0), rng.random_range(-3.2..3.2));
        let z = C64::from_polar((p[1] * p[2]).sqrt() * rng.random_range(0.0..1.0), rng.random_range(-3.2..3.2));
        XStateEntries { a: p[0], b: p[1], c: p[2], d: p[3], w, z }
    }

    fn random_unitary2(rng: &mut ChaCha8Rng) -> Mat2 {
        let (a, b, g, d): (f64, f64, f64, f64) = (
            rng.random_range(0.0..6.3),
            rng.random_range(0.0..6.3),
            rng.random_range(0.0..6.3),
            rng.random_range(0.0..6.3),
        );
        let (ca, sa) = ((g / 2.0).cos(), (g / 2.0).sin());
        Mat2::new(
            C64::from_polar(ca, -(a + b) / 2.0),
            C64::from_polar(-sa, -(a - b) / 2.0),
            C64::from_polar(sa, (a - b) / 2.0),
            C64::from_polar(ca, (a + b) / 2.0),
        ) * C64::from_polar(1.0, d)
    }

    fn bell() -> DensityMatrix {
        dm_from_pure(&((basis_ket(0) + basis_ket(3)) * re(std::f64::consts::FRAC_1_SQRT_2))).unwrap()
    }

    #[test]
    fn extremes() {
        assert!((concurrence(&bell()).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence(&DensityMatrix::ground()).unwrap().abs() < 1e-12);
        assert!(concurrence(&DensityMatrix::maximally_mixed()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn werner_family() {
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let m = bell().into_matrix() * re(p) + Mat4::identity() * re((1.0 - p) / 4.0);
            let conc = concurrence(&DensityMatrix::new(m).unwrap()).unwrap();
            let expect = (0.5 * (3.0 * p - 1.0)).max(0.0);
            assert!((conc - expect).abs() < 1e-10, "p={p} C={conc}");
        }
    }

    #[test]
    fn x_state_formula_matches_wootters() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let x = random_x(&mut rng);
            assert!(x.is_valid(1e-12));
            let m = x.to_matrix();
            let brute = wootters_oracle(&m);
            assert!((concurrence_x(&x) - brute).abs() < 1e-10);
            assert!((concurrence_matrix(&m).unwrap() - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn x_state_examples() {
        let bell = XStateEntries { a: 0.5, b: 0.0, c: 0.0, d: 0.5, w: re(0.5), z: re(0.0) };
        assert!((concurrence_x(&bell) - 1.0).abs() < 1e-15);
        let ground = XStateEntries { a: 1.0, b: 0.0, c: 0.0, d: 0.0, w: re(0.0), z: re(0.0) };
        assert_eq!(concurrence_x(&ground), 0.0);
        assert_eq!(XStateEntries::from_matrix(&bell.to_matrix()), bell);
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let x = random_x(&mut rng);
            let rho = DensityMatrix::new(x.to_matrix()).unwrap();
            let u = kron(&random_unitary2(&mut rng), &random_unitary2(&mut rng));
            let rotated = rho.conjugated(&u);
            assert!((concurrence(&rotated).unwrap() - concurrence(&rho).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_negative_states() {
        let m = DensityMatrix::from_matrix_unchecked(Mat4::from_diagonal(&nalgebra::Vector4::new(
            re(1.2),
            re(-0.2),
            re(0.0),
            re(0.0),
        )));
        assert!(matches!(concurrence(&m), Err(Error::NonPhysical(_))));
    }

    #[test]
    fn fidelity_examples() {
        let t = bell_target(0.7);
        assert!((fidelity_with(&t, &t) - 1.0).abs() < 1e-15);
        assert!((fidelity_with(&DensityMatrix::ground(), &t) - 0.5).abs() < 1e-15);
        assert!((fidelity_with(&DensityMatrix::maximally_mixed(), &t) - 0.25).abs() < 1e-15);
        assert!((fidelity_with(&t, &DensityMatrix::ground()) - fidelity_with(&DensityMatrix::ground(), &t)).abs() < 1e-15);
    }

    #[test]
    fn bell_targets() {
        assert!(bell_target(0.0).max_deviation(&bell()) < 1e-15);
        for &ph in &[0.3, -1.2, 2.9] {
            let t = bell_target(ph);
            assert!((t.purity() - 1.0).abs() < 1e-14);
            assert!((concurrence(&t).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(t.get(0, 3), C64::from_polar(0.5, -ph));
        }
        assert_eq!(bell_target(std::f64::consts::FRAC_PI_2).get(0, 3).im, -0.5);
    }
}

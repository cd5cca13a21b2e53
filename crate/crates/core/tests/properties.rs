use std::f64::consts::PI;

use proptest::prelude::*;

use entangle_core::analytic::{c_max, cmax_curve, strong_concurrence_fidelity, weak_concurrence_fidelity};
use entangle_core::blochvec::{decode_matrix, encode_matrix};
use entangle_core::dynamics::stationary_numeric;
use entangle_core::harness::persist::fmt_f64;
use entangle_core::harness::{apply_knob, Base};
use entangle_core::measures::concurrence;
use entangle_core::model::{lindblad_rhs, ModelSpec, PhaseSpec};
use entangle_core::quantum::{hermiticity_error, kron, max_abs, Mat2, Mat4, C64};
use entangle_core::DensityMatrix;

fn spec_strategy() -> impl Strategy<Value = ModelSpec> {
    (0.0..20.0, -PI..PI, -5.0..5.0, -PI..PI, 0.0..100.0, 0.0..100.0, 0.05..3.0, 0.0..3.0).prop_map(
        |(mu1, t1, mu2, t2, w1, w2, g1, gp)| ModelSpec {
            mu1,
            phase1: PhaseSpec::Static(t1),
            mu2,
            theta2: t2,
            omega_a1: w1,
            omega_a2: w2,
            gamma1: g1,
            gamma_phi: gp,
        },
    )
}

fn state_strategy() -> impl Strategy<Value = DensityMatrix> {
    proptest::collection::vec(-1.0..1.0f64, 32).prop_map(|v| {
        let g = Mat4::from_fn(|r, c| C64::new(v[2 * (4 * r + c)], v[2 * (4 * r + c) + 1]));
        let p = g * g.adjoint() + Mat4::identity() * C64::new(1e-3, 0.0);
        let tr = p.trace();
        DensityMatrix::new(p / tr).unwrap()
    })
}

fn qubit_state() -> impl Strategy<Value = Mat2> {
    (0.0..PI, -PI..PI).prop_map(|(th, ph)| {
        let v = nalgebra::Vector2::new(C64::new((th / 2.0).cos(), 0.0), C64::from_polar((th / 2.0).sin(), ph));
        v * v.adjoint()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn master_equation_is_traceless_and_hermitian(spec in spec_strategy(), rho in state_strategy()) {
        let d = lindblad_rhs(&spec, rho.matrix(), 0.0);
        let scale = 1.0 + max_abs(&d);
        prop_assert!(d.trace().norm() / scale < 1e-12);
        prop_assert!(hermiticity_error(&d) / scale < 1e-12);
    }

    #[test]
    fn coherent_vector_round_trip(rho in state_strategy()) {
        let back = decode_matrix(&encode_matrix(rho.matrix()));
        prop_assert!(max_abs(&(back - rho.matrix())) < 1e-14);
    }

    #[test]
    fn concurrence_is_bounded(rho in state_strategy()) {
        let c = concurrence(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
    }

    #[test]
    fn product_states_are_separable(a in qubit_state(), b in qubit_state()) {
        let rho = DensityMatrix::from_matrix_unchecked(kron(&a, &b));
        prop_assert!(concurrence(&rho).unwrap() < 1e-7);
    }

    #[test]
    fn stationary_state_is_physical(spec in spec_strategy()) {
        let st = stationary_numeric(&spec).unwrap();
        prop_assert!((st.rho_inf.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(st.rho_inf.min_eigenvalue() > -1e-8);
        prop_assert!(st.residual < 1e-9 * (1.0 + spec.mu1 + spec.omega_a1 + spec.omega_a2));
    }

    #[test]
    fn closed_forms_never_exceed_cmax(mu1 in 0.0..50.0, omega in 0.0..500.0, g1 in 0.05..3.0, gp in 0.0..3.0) {
        let bound = c_max(g1, gp) + 1e-12;
        let (cs, fs) = strong_concurrence_fidelity(omega, mu1, g1, gp).unwrap();
        let (cw, _) = weak_concurrence_fidelity(mu1, g1, gp).unwrap();
        prop_assert!(cs <= bound && cw <= bound);
        if cs > 0.0 {
            prop_assert!(fs > 0.5);
        }
    }

    #[test]
    fn cmax_curve_is_monotone(a in 1e-6..2.0, b in 1e-6..2.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let pts = cmax_curve(&[lo, hi]).unwrap();
        prop_assert!(pts[0].c_max <= pts[1].c_max && pts[0].f_max <= pts[1].f_max);
    }

    #[test]
    fn exchange_coupling_does_not_move_stationary_c(spec in spec_strategy(), mu2 in -10.0..10.0) {
        let a = stationary_numeric(&ModelSpec { mu2: 0.0, ..spec }).unwrap();
        let b = stationary_numeric(&ModelSpec { mu2, ..spec }).unwrap();
        let (ca, cb) = (concurrence(&a.rho_inf).unwrap(), concurrence(&b.rho_inf).unwrap());
        prop_assert!((ca - cb).abs() < 1e-8);
    }

    #[test]
    fn knob_writes_are_read_back(x in 0.0..10.0f64) {
        let base = Base::Model(ModelSpec::symmetric(10.0, 1.0, 0.0, 1.0, 0.0));
        let Base::Model(m) = apply_knob(&base, "gamma_phi", x).unwrap() else { unreachable!() };
        prop_assert_eq!(m.gamma_phi, x);
    }

    #[test]
    fn csv_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}

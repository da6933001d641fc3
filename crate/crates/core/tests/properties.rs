mod common;

use josephson_bell::bell::{chsh_for_state, AnalyzerSettings, Mode, CLASSICAL_BOUND, TSIRELSON_BOUND};
use josephson_bell::circuit::{hamiltonian, CircuitParams, Qubit, WorkingPoint};
use josephson_bell::dynamics::{gate_hadamard_like, gate_rz_refocused, propagator_exact, rx, rz, zz};
use josephson_bell::entangle::concurrence_pure;
use josephson_bell::qmath::{expm_hermitian, kron, matmul, ComplexMatrix, StateVector, C64};
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix2() -> impl Strategy<Value = ComplexMatrix> {
    prop::array::uniform4(c64()).prop_map(|e| ComplexMatrix::new(2, e.to_vec()).unwrap())
}

fn hermitian4() -> impl Strategy<Value = ComplexMatrix> {
    prop::array::uniform16(-3.0..3.0f64).prop_map(|r| {
        let mut h = ComplexMatrix::zeros(4);
        let mut k = 0;
        for i in 0..4 {
            h[(i, i)] = r[k].into();
            k += 1;
            for j in i + 1..4 {
                h[(i, j)] = C64::new(r[k], r[k + 1]);
                h[(j, i)] = C64::new(r[k], -r[k + 1]);
                k += 2;
            }
        }
        h
    })
}

fn state() -> impl Strategy<Value = StateVector> {
    prop::array::uniform4(c64())
        .prop_filter("nonzero", |a| a.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|a| {
            StateVector::normalized(a).unwrap_or_else(|_| StateVector::from_amplitudes(a).renormalize().unwrap())
        })
}

fn angles() -> impl Strategy<Value = AnalyzerSettings> {
    prop::array::uniform4(-7.0..7.0f64).prop_map(|[theta1, theta1p, theta2, theta2p]| AnalyzerSettings {
        theta1,
        theta1p,
        theta2,
        theta2p,
    })
}

fn working_point() -> impl Strategy<Value = WorkingPoint> {
    prop_oneof![
        Just(WorkingPoint::General),
        Just(WorkingPoint::Decouple(Qubit::One)),
        Just(WorkingPoint::Decouple(Qubit::Two)),
        Just(WorkingPoint::FarDetuned),
        Just(WorkingPoint::CoResonantBoth),
        Just(WorkingPoint::Idle),
    ]
}

fn params() -> impl Strategy<Value = CircuitParams> {
    // E12 < eps_J < |E_C| / 3 keeps the far-detuned corrections finite
    let ec = (3.0..10.0f64, any::<bool>()).prop_map(|(x, neg)| if neg { -x } else { x });
    (0.1..50.0f64, 0.1..50.0f64, 0.0..1.0f64, -0.45..0.45f64, -0.45..0.45f64, ec.clone(), ec).prop_map(
        |(e1, e2, e12, f1, f2, c1, c2)| CircuitParams {
            eps_j: [e1, e2],
            flux: [f1, f2],
            e12: e12 * e1.min(e2),
            ec_eff: [c1 * e1, c2 * e2],
            hbar: 1.0,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn expm_is_unitary(h in hermitian4(), t in -20.0..20.0f64) {
        let u = expm_hermitian(&h, C64::new(0.0, -t)).unwrap();
        prop_assert!(u.unitarity_error() <= 1e-12);
    }

    #[test]
    fn expm_semigroup(h in hermitian4(), t1 in -5.0..5.0f64, t2 in -5.0..5.0f64) {
        let a = expm_hermitian(&h, C64::new(0.0, -t1)).unwrap();
        let b = expm_hermitian(&h, C64::new(0.0, -t2)).unwrap();
        let ab = expm_hermitian(&h, C64::new(0.0, -(t1 + t2))).unwrap();
        prop_assert!(ab.max_abs_diff(&matmul(&a, &b).unwrap()) <= 1e-11);
    }

    #[test]
    fn kron_mixed_product(a in matrix2(), b in matrix2(), c in matrix2(), d in matrix2()) {
        let lhs = matmul(&kron(&a, &b).unwrap(), &kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&matmul(&a, &c).unwrap(), &matmul(&b, &d).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn hamiltonians_are_hermitian(p in params(), wp in working_point()) {
        let h = hamiltonian(&p, wp).unwrap();
        prop_assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn propagators_are_unitary(p in params(), wp in working_point(), t in 0.0..200.0f64) {
        let u = propagator_exact(&p, wp, t).unwrap();
        prop_assert!(u.unitarity_error() <= 1e-12);
        let s = StateVector::basis(1, 0).apply(&u).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn gates_are_unitary(phi in -10.0..10.0f64) {
        for q in [Qubit::One, Qubit::Two] {
            for g in [rx(q, phi), rz(q, phi), zz(phi), gate_hadamard_like(q, phi).explicit, gate_hadamard_like(q, phi).composed] {
                prop_assert!(g.unitarity_error() <= 1e-12);
            }
        }
    }

    #[test]
    fn refocused_rz_is_exact(phi in -6.0..6.0f64, e1 in 10.0..150.0f64, e2 in 10.0..150.0f64) {
        let mut p = CircuitParams::symmetric(30.0, 2.0);
        p.flux = [0.5, 0.5];
        p.ec_eff = [e1, e2];
        for q in [Qubit::One, Qubit::Two] {
            let r = gate_rz_refocused(&p, q, phi).unwrap();
            prop_assert!(r.gate.operator.max_abs_diff(&rz(q, phi)) <= 1e-12);
        }
    }

    #[test]
    fn concurrence_local_invariance(s in state(), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let u = common::to_matrix(&common::random_local_unitary(&mut r));
        let c0 = concurrence_pure(&s).unwrap();
        let c1 = concurrence_pure(&s.apply(&u).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&c0));
        prop_assert!((c0 - c1).abs() <= 1e-10);
        prop_assert!((c0 - common::concurrence(s.amplitudes())).abs() <= 1e-12);
    }

    #[test]
    fn chsh_within_tsirelson(s in state(), settings in angles()) {
        let r = chsh_for_state(&s, 0.0, &settings, Mode::Analytic).unwrap();
        prop_assert!(r.f <= TSIRELSON_BOUND + 1e-10);
    }

    #[test]
    fn chsh_classical_for_products(seed in any::<u64>(), settings in angles()) {
        let s = common::random_product_state(&mut common::rng(seed));
        let r = chsh_for_state(&s, 0.0, &settings, Mode::Analytic).unwrap();
        prop_assert!(r.f <= CLASSICAL_BOUND + 1e-10);
    }
}

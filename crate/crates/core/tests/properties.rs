use proptest::prelude::*;
use szilard_core::engine::{
    classical_bound, extracted_work, quantum_work, transverse, violation_threshold_eta, work_observables,
    work_unitaries, Button,
};
use szilard_core::linalg::{c, ComplexMatrix, C64};
use szilard_core::qubit::{
    apply_unitary, bloch_to_density, density_to_bloch, steer, BlochVector, DensityMatrix, ProjectiveBasis,
};

fn bloch() -> impl Strategy<Value = BlochVector> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..=1.0).prop_map(|(x, y, z, r)| {
        let n = (x * x + y * y + z * z).sqrt().max(1e-9);
        let len = r.cbrt();
        BlochVector { x: x / n * len, y: y / n * len, z: z / n * len }
    })
}

fn unit_axis() -> impl Strategy<Value = BlochVector> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-4)
        .prop_map(|(x, y, z)| {
            let n = (x * x + y * y + z * z).sqrt();
            BlochVector { x: x / n, y: y / n, z: z / n }
        })
}

/// `A A† / Tr` for a random complex `A`.
fn two_qubit_state() -> impl Strategy<Value = DensityMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16).prop_map(|v| {
        let a = ComplexMatrix::from_row_major(v.into_iter().map(|(re, im)| c(re, im)).collect::<Vec<C64>>()).unwrap();
        let m = a.matmul(&a.adjoint());
        let tr = m.trace().re;
        let m = m.scale(c(1.0 / tr, 0.0));
        // Enforce exact Hermiticity lost to rounding.
        let h = (&m + &m.adjoint()).scale(c(0.5, 0.0));
        DensityMatrix::new(h).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bloch_round_trip(r in bloch()) {
        let back = density_to_bloch(&bloch_to_density(r)).unwrap();
        prop_assert!((back.x - r.x).abs() < 1e-12 && (back.y - r.y).abs() < 1e-12 && (back.z - r.z).abs() < 1e-12);
    }

    #[test]
    fn work_gates_are_unitary_and_empty_the_tilted_states(eta in -0.99f64..0.99) {
        let set = work_unitaries(eta).unwrap();
        for b in Button::ALL {
            prop_assert!(set.gate(b).matrix().is_unitary(1e-12));
        }
        let s = transverse(eta);
        for (b, x) in [(Button::XPlus, s), (Button::XMinus, -s)] {
            let out = apply_unitary(set.gate(b), &bloch_to_density(BlochVector { x, y: 0.0, z: eta })).unwrap();
            prop_assert!((out.bloch().unwrap().z + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_work_matches_matrices(r in bloch(), eta in -0.99f64..0.99) {
        let set = work_unitaries(eta).unwrap();
        let obs = work_observables(r, eta);
        let rho = bloch_to_density(r);
        for b in Button::ALL {
            prop_assert!((obs.get(b) - extracted_work(set.gate(b), &rho).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn quantum_work_nondecreasing_in_q(eta in -0.99f64..0.99, q1 in 0.0f64..=1.0, q2 in 0.0f64..=1.0) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(quantum_work(eta, lo) <= quantum_work(eta, hi) + 1e-15);
    }

    #[test]
    fn violation_window_is_symmetric(t in 1e-6f64..1.0) {
        // Quantum work beats the bound on (η*, −η*); population-inverted
        // states beyond −η* fall back below it.
        let star = violation_threshold_eta();
        let eta = star + t * (-2.0 * star);
        prop_assert!(classical_bound(eta) < quantum_work(eta, 1.0));
        let inverted = -star + t * (0.999 + star);
        prop_assert!(classical_bound(inverted) >= quantum_work(inverted, 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn steering_is_complete_and_non_signalling(rho in two_qubit_state(), axis in unit_axis()) {
        let outcomes = steer(&rho, &ProjectiveBasis::along(axis).unwrap()).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut avg = ComplexMatrix::zeros(2).unwrap();
        for o in &outcomes {
            avg = &avg + &o.state.matrix().scale(c(o.probability, 0.0));
        }
        let reduced = rho.partial_trace(&[0]).unwrap();
        prop_assert!(avg.max_abs_diff(reduced.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_undoes_tensor(a in bloch(), b in bloch()) {
        let (ra, rb) = (bloch_to_density(a), bloch_to_density(b));
        let joint = ra.tensor(&rb).unwrap();
        prop_assert!(joint.partial_trace(&[0]).unwrap().matrix().max_abs_diff(ra.matrix()) < 1e-12);
        prop_assert!(joint.partial_trace(&[1]).unwrap().matrix().max_abs_diff(rb.matrix()) < 1e-12);
    }
}

//! Invariants over random parameter points.

use std::f64::consts::PI;

use proptest::prelude::*;

use phaselab::angle::{mod2pi_distance, phase};
use phaselab::exec::Execution;
use phaselab::grid::GridPoint;
use phaselab::holonomy::{
    aa_holonomy, aa_phase_of_state, cyclic_states_default, trace_identity_residual,
};
use phaselab::report::{parse_csv, to_csv_string};
use phaselab::spin::Axis;
use phaselab::sweep::{build_model, labelled_states, point_records, sweep};

fn point() -> impl Strategy<Value = GridPoint> {
    (0.0f64..2.0, 0.0f64..1.2, 0.05f64..1.5).prop_map(|(g, h, w)| GridPoint::new(g, h, w))
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::Z), Just(Axis::X)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phases_are_principal(x in -1e3f64..1e3) {
        let p = phase(x);
        prop_assert!(p > -PI && p <= PI);
        prop_assert!(mod2pi_distance(p, x) < 1e-9);
    }

    #[test]
    fn closed_forms_match_engine(p in point(), axis in axis()) {
        for r in point_records(axis, &p).unwrap() {
            prop_assert!((r.theta - PI).abs() < 1e-12);
            prop_assert!(r.total > -PI && r.total <= PI);
            if !r.geometric_closed.is_nan() {
                prop_assert!(r.residual < 1e-8, "{} {:?}: {}", r.state, p, r.residual);
            }
        }
    }

    #[test]
    fn gauge_invariance(p in point(), axis in axis(), alpha in -PI..PI) {
        let model = build_model(axis, &p).unwrap();
        let groups = cyclic_states_default(&model).unwrap();
        for s in labelled_states(&model, &groups).unwrap() {
            let a = aa_phase_of_state(&model, &groups[s.group], &s.state).unwrap();
            let b = aa_phase_of_state(&model, &groups[s.group], &s.state.with_phase(alpha)).unwrap();
            prop_assert!(mod2pi_distance(a.geometric, b.geometric) < 1e-11);
            prop_assert!(a.consistency_residual() < 1e-9);
        }
    }

    #[test]
    fn holonomies_are_unitary(p in point(), axis in axis()) {
        let model = build_model(axis, &p).unwrap();
        let groups = cyclic_states_default(&model).unwrap();
        prop_assert!(trace_identity_residual(&model, &groups).unwrap() < 1e-9);
        for g in groups.iter().filter(|g| g.dimension() > 1) {
            let hol = aa_holonomy(&model, g).unwrap();
            prop_assert!(hol.geometric_factor.defect() < 1e-9);
            prop_assert!(hol.dynamical_factor.defect() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweep_output_round_trips(ws in proptest::collection::vec(0.05f64..1.5, 1..4)) {
        let pts: Vec<GridPoint> = ws.iter().map(|&w| GridPoint::new(0.5, 0.3, w)).collect();
        let par = sweep(Axis::Z, &pts, Execution::Parallel).unwrap();
        let seq = sweep(Axis::Z, &pts, Execution::Sequential).unwrap();
        let text = to_csv_string(&par);
        prop_assert_eq!(&text, &to_csv_string(&seq));
        let back = parse_csv(&text).unwrap();
        prop_assert_eq!(back.len(), par.len());
        for (a, b) in par.iter().zip(&back) {
            prop_assert!((a.geometric_numeric - b.geometric_numeric).abs() <= 1e-11);
        }
    }
}

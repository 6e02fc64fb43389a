//! Frozen values at fixed parameter points, through the public API.

use std::f64::consts::PI;

use phaselab::adiabatic::berry_phase_of_state;
use phaselab::angle::mod2pi_distance;
use phaselab::closed_form::{
    aa_phase_closed, berry_spectrum_closed, x_holonomy_closed, x_spectrum_closed, z_spectrum_closed,
};
use phaselab::grid::GridPoint;
use phaselab::holonomy::{aa_phase, cyclic_states_default};
use phaselab::linalg::StateVector;
use phaselab::oracle::{geometric_phase_oracle, OracleConfig};
use phaselab::spin::Axis;
use phaselab::sweep::{berry_records, build_model, group_holonomy, point_records};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn z_model_generic_point() {
    let rows = point_records(Axis::Z, &GridPoint::new(0.5, 0.3, 0.2)).unwrap();
    let get = |l: &str| rows.iter().find(|r| r.state == l).unwrap();
    close(get("P+1").b_value, -0.788675134595, 1e-11);
    close(get("P+1").geometric_numeric, -0.841787214477, 1e-11);
    close(get("P+2").geometric_numeric, 0.841787214477, 1e-11);
    close(get("P-1").geometric_numeric, -0.113219819554, 1e-11);
    close(get("P-2").geometric_numeric, 0.113219819554, 1e-11);
    close(
        aa_phase_closed(0.5, 0.3, 0.2, 1).unwrap(),
        -0.841787214477,
        1e-11,
    );
    for r in &rows {
        close(r.theta, PI, 1e-12);
        assert!(mod2pi_distance(r.total, r.dynamical + r.geometric_numeric) < 1e-12);
    }
}

#[test]
fn z_model_oracle_agreement() {
    let model = build_model(Axis::Z, &GridPoint::new(0.5, 0.3, 0.2)).unwrap();
    let cfg = OracleConfig::default();
    for g in cyclic_states_default(&model)
        .unwrap()
        .iter()
        .filter(|g| g.dimension() == 1)
    {
        let engine = aa_phase(&model, g).unwrap();
        let oracle = geometric_phase_oracle(&model, &g.states[0], &cfg).unwrap();
        assert!(mod2pi_distance(engine.geometric, oracle.geometric) < 1e-6);
        // χ = −π − bT for every cyclic state
        assert!(mod2pi_distance(engine.total, -PI - g.b_value * model.period) < 1e-9);
    }
}

#[test]
fn decoupled_state_at_unit_anisotropy() {
    let (h, w) = (0.5, 0.3);
    let model = build_model(Axis::Z, &GridPoint::new(1.0, h, w)).unwrap();
    let up = StateVector::basis(8, 0).unwrap();
    let cfg = OracleConfig::default();
    let run = geometric_phase_oracle(&model, &up, &cfg).unwrap();
    assert!(mod2pi_distance(run.dynamical, 1.5 * h * model.period) < 1e-9);
    assert!(mod2pi_distance(run.total, -PI + 1.5 * (h + w) * model.period) < 1e-9);
    assert!(mod2pi_distance(run.geometric, 0.0) < 1e-9);
}

#[test]
fn closed_form_spectra() {
    let s = z_spectrum_closed(1.0, 0.0, 0.0).unwrap();
    assert_eq!((s.r, s.p1, s.p2), (1.0, -2.0 / 3.0, 0.0));
    close(s.p34, 1.0 / 3.0, 1e-15);
    let (b1, b2) = x_spectrum_closed(1.0, 0.0, 1.0);
    close(b1, -1.0 / 6.0, 1e-15);
    close(b2, 5.0 / 6.0, 1e-15);
    let q = berry_spectrum_closed(0.0, 0.0).unwrap();
    assert_eq!(q.q, 1.0);
    close(q.lambda1, -0.5, 1e-15);
    close(q.lambda2, 1.0 / 6.0, 1e-15);
}

#[test]
fn x_model_holonomies() {
    let hol = group_holonomy(Axis::X, &GridPoint::new(0.5, 0.5, 0.5), 1, 1e-12).unwrap();
    close(hol.numeric, PI * (0.5f64.sqrt() - 1.0), 1e-10);
    close(hol.numeric, -0.920151185, 1e-9);
    let two = group_holonomy(Axis::X, &GridPoint::new(2.0, 0.3, 1.0), 2, 1e-12).unwrap();
    close(two.numeric, 0.132492632524, 1e-10);
    close(two.b_value, 1.02201532545, 1e-10);

    let (h, w) = (0.3_f64, 0.7_f64);
    let rho = (h * h + w * w).sqrt();
    let diff = x_holonomy_closed(h, w, 1).unwrap() - x_holonomy_closed(h, w, 2).unwrap();
    assert!(mod2pi_distance(diff, 2.0 * PI * w / rho) < 1e-12);
}

#[test]
fn berry_phases() {
    let rows = berry_records(Axis::Z, &GridPoint::new(0.5, 0.4, 0.1)).unwrap();
    let get = |l: &str| rows.iter().find(|r| r.state == l).unwrap();
    close(get("L+1").geometric_numeric, -1.75566842254, 1e-10);
    close(get("L-1").geometric_numeric, -0.149407612548, 1e-10);
    close(get("L+1").b_value, -0.658166599947, 1e-11);

    let model = build_model(Axis::Z, &GridPoint::new(0.0, 0.0, 1.0)).unwrap();
    let even = StateVector::from_real(&[-0.5, 0.0, 0.0, -0.5, 0.0, -0.5, -0.5, 0.0]).unwrap();
    close(berry_phase_of_state(&model, &even).unwrap(), PI, 1e-12);
}

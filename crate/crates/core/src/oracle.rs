//! Direct Schrödinger propagation of `i dψ/dt = H(t)ψ`, independent of the
//! frame-generator factorization.
//!
//! Integration happens in the eigenbasis of the drive `A`, where
//! `H(t)_{jk} = H̃_{jk} e^{−i(a_j − a_k)t}`: no matrix exponential is taken
//! and the fast drive rotation stays out of the stepping error. Each run
//! uses classical RK4 with step halving; the dynamical phase
//! `−∫⟨ψ|H|ψ⟩dt` is accumulated with Simpson's rule on the same grid.

use num_complex::Complex64;

use crate::angle::phase;
use crate::error::{PhaseError, Result};
use crate::exec::{try_par_map, Execution};
use crate::holonomy::PhaseBreakdown;
use crate::linalg::{c, cr, max_abs, max_abs_vec, CMat, CVec, StateVector, UnitaryOperator};
use crate::spin::RotatingModel;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_REFINEMENTS: usize = 20;
/// `1 − |⟨ψ|ψ(T)⟩|` above which a state is reported as not cyclic.
pub const CYCLIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub tol: f64,
    pub max_refinements: usize,
    pub execution: Execution,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            execution: Execution::default(),
        }
    }
}

impl OracleConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(PhaseError::InvalidArgument(format!(
                "oracle tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// `H̃` and the drive eigenbasis.
struct DriveFrame {
    a: Vec<f64>,
    v: CMat,
    h: CMat,
    scale: f64,
}

impl DriveFrame {
    fn new(model: &RotatingModel) -> Self {
        let eig = model.drive_eigen();
        let h = eig.vectors.adjoint() * model.tilde_h.as_matrix() * &eig.vectors;
        let scale = max_abs(&h) * h.nrows() as f64;
        Self {
            a: eig.values.clone(),
            v: eig.vectors.clone(),
            h,
            scale,
        }
    }

    fn dim(&self) -> usize {
        self.a.len()
    }

    fn phases(&self, t: f64) -> CVec {
        CVec::from_iterator(
            self.dim(),
            self.a.iter().map(|&a| Complex64::from_polar(1.0, -a * t)),
        )
    }

    /// `H(t)ψ`.
    fn apply(&self, t: f64, psi: &CVec) -> CVec {
        let d = self.phases(t);
        let rotated = psi.zip_map(&d, |p, z| p * z.conj());
        let out = &self.h * rotated;
        out.zip_map(&d, |p, z| p * z)
    }

    fn energy(&self, t: f64, psi: &CVec) -> f64 {
        psi.dotc(&self.apply(t, psi)).re
    }

    fn to_frame(&self, psi: &CVec) -> CVec {
        self.v.adjoint() * psi
    }

    fn out_of_frame(&self, psi: &CVec) -> CVec {
        &self.v * psi
    }

    fn initial_steps(&self, span: f64) -> usize {
        ((span * self.scale * 4.0).ceil() as usize).clamp(16, 1 << 16)
    }

    /// One RK4 sweep over `[t0, t1]` with `steps` (even) steps. Returns the
    /// final state and, if asked, `∫⟨ψ|H|ψ⟩dt` by Simpson's rule.
    fn sweep(&self, psi0: &CVec, t0: f64, t1: f64, steps: usize, energy: bool) -> (CVec, f64) {
        let h = (t1 - t0) / steps as f64;
        let mi = c(0.0, -1.0);
        let mut psi = psi0.clone();
        let mut integral = 0.0;
        if energy {
            integral += self.energy(t0, &psi);
        }
        for k in 0..steps {
            let t = t0 + h * k as f64;
            let k1 = self.apply(t, &psi) * mi;
            let k2 = self.apply(t + 0.5 * h, &(&psi + &k1 * cr(0.5 * h))) * mi;
            let k3 = self.apply(t + 0.5 * h, &(&psi + &k2 * cr(0.5 * h))) * mi;
            let k4 = self.apply(t + h, &(&psi + &k3 * cr(h))) * mi;
            psi += (k1 + k2 * cr(2.0) + k3 * cr(2.0) + k4) * cr(h / 6.0);
            if energy {
                let w = if k + 1 == steps {
                    1.0
                } else if (k + 1) % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                integral += w * self.energy(t0 + h * (k + 1) as f64, &psi);
            }
        }
        (psi, integral * h / 3.0)
    }

    /// Step halving until the state (and energy integral, if tracked)
    /// stabilise. Returns `(state, integral, steps)`.
    fn converge(
        &self,
        psi0: &CVec,
        t0: f64,
        t1: f64,
        energy: bool,
        cfg: &OracleConfig,
    ) -> Result<(CVec, f64, usize)> {
        if t1 == t0 {
            return Ok((psi0.clone(), 0.0, 0));
        }
        let mut steps = self.initial_steps(t1 - t0);
        let (mut psi, mut integral) = self.sweep(psi0, t0, t1, steps, energy);
        let mut residuals = (f64::INFINITY, f64::INFINITY);
        for _ in 0..cfg.max_refinements {
            steps *= 2;
            let (fine, fine_integral) = self.sweep(psi0, t0, t1, steps, energy);
            let state_res = max_abs_vec(&(&fine - &psi));
            let energy_res = (fine_integral - integral).abs() / fine_integral.abs().max(1.0);
            let residual = state_res.max(energy_res);
            if residual < cfg.tol {
                return Ok((fine, fine_integral, steps));
            }
            residuals = (residuals.1, residual);
            psi = fine;
            integral = fine_integral;
        }
        Err(PhaseError::StepNoConvergence {
            refinements: cfg.max_refinements,
            previous: residuals.0,
            last: residuals.1,
            tol: cfg.tol,
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(PhaseError::InvalidArgument(format!(
            "propagation time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

/// `U(t)` by propagating each basis column.
pub fn evolution_operator(
    model: &RotatingModel,
    t: f64,
    cfg: &OracleConfig,
) -> Result<UnitaryOperator> {
    Ok(evolution_operators(model, &[t], cfg)?.remove(0))
}

/// `U(t_k)` for non-decreasing times, propagated piecewise from one time to
/// the next.
pub fn evolution_operators(
    model: &RotatingModel,
    times: &[f64],
    cfg: &OracleConfig,
) -> Result<Vec<UnitaryOperator>> {
    cfg.validate()?;
    for (k, &t) in times.iter().enumerate() {
        check_time(t)?;
        if k > 0 && t < times[k - 1] {
            return Err(PhaseError::InvalidArgument(
                "times must be non-decreasing".into(),
            ));
        }
    }
    let frame = DriveFrame::new(model);
    let dim = frame.dim();
    let mut columns: Vec<CVec> = (0..dim)
        .map(|j| {
            let mut e = CVec::zeros(dim);
            e[j] = cr(1.0);
            e
        })
        .collect();
    let mut t_prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        columns = try_par_map(cfg.execution, &columns, |col| {
            frame.converge(col, t_prev, t, false, cfg).map(|r| r.0)
        })?;
        t_prev = t;
        let u_frame = CMat::from_fn(dim, dim, |i, j| columns[j][i]);
        let u = &frame.v * u_frame * frame.v.adjoint();
        out.push(UnitaryOperator::from_matrix(u)?);
    }
    Ok(out)
}

/// Outcome of propagating one state over `[0, t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub final_state: CVec,
    /// `⟨ψ(0)|ψ(t)⟩`.
    pub overlap: Complex64,
    /// `−∫_0^t ⟨ψ|H|ψ⟩ ds`, not reduced mod 2π.
    pub dynamical: f64,
    pub steps: usize,
}

impl PropagationResult {
    pub fn total_phase(&self) -> f64 {
        phase(self.overlap.arg())
    }

    pub fn cyclicity_defect(&self) -> f64 {
        (1.0 - self.overlap.norm()).abs()
    }

    pub fn breakdown(&self) -> PhaseBreakdown {
        let total = self.total_phase();
        let dynamical = phase(self.dynamical);
        PhaseBreakdown {
            total,
            dynamical,
            geometric: phase(total - self.dynamical),
        }
    }
}

/// Propagates `psi0` from 0 to `t`.
pub fn propagate_state(
    model: &RotatingModel,
    psi0: &StateVector,
    t: f64,
    cfg: &OracleConfig,
) -> Result<PropagationResult> {
    cfg.validate()?;
    check_time(t)?;
    if psi0.dim() != model.dim() {
        return Err(PhaseError::DimensionMismatch {
            expected: model.dim(),
            actual: psi0.dim(),
        });
    }
    let frame = DriveFrame::new(model);
    let start = frame.to_frame(psi0.as_vector());
    let (end, integral, steps) = frame.converge(&start, 0.0, t, true, cfg)?;
    let final_state = frame.out_of_frame(&end);
    Ok(PropagationResult {
        overlap: psi0.as_vector().dotc(&final_state),
        final_state,
        dynamical: -integral,
        steps,
    })
}

/// `arg⟨ψ|U(T)|ψ⟩` over one period.
pub fn total_phase(model: &RotatingModel, psi0: &StateVector, cfg: &OracleConfig) -> Result<f64> {
    Ok(propagate_state(model, psi0, model.period, cfg)?.total_phase())
}

/// `−∫_0^T ⟨ψ(t)|H(t)|ψ(t)⟩dt`.
pub fn dynamical_phase_integral(
    model: &RotatingModel,
    psi0: &StateVector,
    cfg: &OracleConfig,
) -> Result<f64> {
    Ok(propagate_state(model, psi0, model.period, cfg)?.dynamical)
}

/// Total, dynamical and geometric phase of a cyclic state from direct
/// propagation. Fails with `NotCyclic` when `|⟨ψ|ψ(T)⟩|` is not 1.
pub fn geometric_phase_oracle(
    model: &RotatingModel,
    psi0: &StateVector,
    cfg: &OracleConfig,
) -> Result<PhaseBreakdown> {
    let run = propagate_state(model, psi0, model.period, cfg)?;
    if run.cyclicity_defect() > CYCLIC_TOL {
        return Err(PhaseError::NotCyclic {
            overlap: run.overlap.norm(),
        });
    }
    Ok(run.breakdown())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::mod2pi_distance;
    use crate::holonomy::{aa_phase, cyclic_states_default, frame_generator};
    use crate::linalg::{max_abs_diff, spectral_exp};
    use crate::spin::{rotating_model, Axis, ModelParams};

    fn model(axis: Axis, g: f64, h: f64, w: f64) -> RotatingModel {
        rotating_model(ModelParams::new(g, h, w, axis).unwrap()).unwrap()
    }

    #[test]
    fn static_field_phase() {
        // γ = 1, h only: |000⟩ sits in a decoupled block with energy −3h/2
        let m = model(Axis::Z, 1.0, 0.4, 1.0);
        let psi = StateVector::basis(8, 0).unwrap();
        let run = propagate_state(&m, &psi, m.period, &OracleConfig::default()).unwrap();
        let expected = 1.5 * 0.4 * m.period;
        assert!((run.dynamical - expected).abs() < 1e-9);
        assert!(run.cyclicity_defect() < 1e-10);
        assert!(mod2pi_distance(run.total_phase(), expected) < 1e-9);
    }

    #[test]
    fn matches_factorized_evolution() {
        let m = model(Axis::X, 0.5, 0.3, 0.7);
        let t = 0.6 * m.period;
        let u = evolution_operator(&m, t, &OracleConfig::default()).unwrap();
        let b = frame_generator(&m).unwrap();
        let expect = m
            .drive_propagator(t)
            .unwrap()
            .compose(&spectral_exp(&b, t).unwrap())
            .unwrap();
        assert!(max_abs_diff(u.as_matrix(), expect.as_matrix()) < 1e-8);
    }

    #[test]
    fn piecewise_agrees_with_single_run() {
        let m = model(Axis::Z, 2.0, 1.0, 0.5);
        let cfg = OracleConfig::default();
        let times = [0.0, 0.25 * m.period, 0.5 * m.period];
        let many = evolution_operators(&m, &times, &cfg).unwrap();
        assert!(max_abs_diff(many[0].as_matrix(), &CMat::identity(8, 8)) == 0.0);
        let one = evolution_operator(&m, times[2], &cfg).unwrap();
        assert!(max_abs_diff(many[2].as_matrix(), one.as_matrix()) < 1e-8);
    }

    #[test]
    fn sequential_and_parallel_agree_exactly() {
        let m = model(Axis::X, 1.0, 0.3, 1.0);
        let par = OracleConfig {
            execution: Execution::Parallel,
            ..OracleConfig::default()
        };
        let seq = OracleConfig {
            execution: Execution::Sequential,
            ..OracleConfig::default()
        };
        let a = evolution_operator(&m, 1.3, &par).unwrap();
        let b = evolution_operator(&m, 1.3, &seq).unwrap();
        assert_eq!(a.as_matrix(), b.as_matrix());
    }

    #[test]
    fn cyclic_state_phases_match_engine() {
        let m = model(Axis::Z, 0.5, 0.3, 0.5);
        let cfg = OracleConfig::default();
        for g in cyclic_states_default(&m)
            .unwrap()
            .iter()
            .filter(|g| g.dimension() == 1)
        {
            let engine = aa_phase(&m, g).unwrap();
            let oracle = geometric_phase_oracle(&m, &g.states[0], &cfg).unwrap();
            assert!(mod2pi_distance(engine.total, oracle.total) < 1e-8);
            assert!(mod2pi_distance(engine.dynamical, oracle.dynamical) < 1e-8);
            assert!(mod2pi_distance(engine.geometric, oracle.geometric) < 1e-8);
        }
    }

    #[test]
    fn non_cyclic_state_is_reported() {
        let m = model(Axis::Z, 0.5, 0.3, 0.5);
        let psi = StateVector::from_real(&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            geometric_phase_oracle(&m, &psi, &OracleConfig::default()),
            Err(PhaseError::NotCyclic { .. })
        ));
    }

    #[test]
    fn refinement_ceiling_is_reported() {
        let m = model(Axis::Z, 0.5, 0.3, 0.5);
        let cfg = OracleConfig {
            tol: 1e-30,
            max_refinements: 2,
            ..OracleConfig::default()
        };
        let psi = StateVector::basis(8, 0).unwrap();
        assert!(matches!(
            propagate_state(&m, &psi, 1.0, &cfg),
            Err(PhaseError::StepNoConvergence { refinements: 2, .. })
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = model(Axis::Z, 0.5, 0.3, 0.5);
        let cfg = OracleConfig::default();
        let psi = StateVector::basis(4, 0).unwrap();
        assert!(matches!(
            propagate_state(&m, &psi, 1.0, &cfg),
            Err(PhaseError::DimensionMismatch { .. })
        ));
        assert!(evolution_operator(&m, -1.0, &cfg).is_err());
        assert!(evolution_operators(&m, &[1.0, 0.5], &cfg).is_err());
        assert!(evolution_operator(&m, 1.0, &OracleConfig::with_tol(0.0)).is_err());
    }
}

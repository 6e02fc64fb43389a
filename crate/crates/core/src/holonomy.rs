//! Cyclic states and non-adiabatic geometric phases of rotating-frame
//! models.
//!
//! For `H(t) = e^{−iAt} H̃ e^{iAt}` the evolution factorizes as
//! `U(t) = e^{−iAt} e^{−iBt}` with `B = H̃ − A`. When the monodromy
//! `e^{−iAT}` commutes with `B`, eigenvectors of `B` are cyclic states and
//! `e^{−iAT}` acts on each eigenvalue cluster of `B` as a scalar
//! `e^{−iθ}`. From there:
//!
//! * non-degenerate phase: `η = ⟨φ|A|φ⟩T − θ`,
//! * degenerate connection: `𝒜 = ⟨φ_α|A|φ_β⟩ − (θ/T)δ_αβ`,
//! * dynamical one-form: `ℰ = ⟨φ_α|H̃|φ_β⟩`,
//! * geometric factor `𝒯exp(i∫𝒜dt)`, dynamical factor `exp(−iℰT)`,
//! * Floquet split `U(t) = Z(t)e^{iMt}` with `Z(t) = e^{−iAt}e^{iΩt/T}`,
//!   `M = −B − Ω/T` and `Ω = Σ_n θ_n P_n`.

use num_complex::Complex64;

use crate::angle::{mod2pi_distance, phase, principal_snapped};
use crate::error::{PhaseError, Result};
use crate::linalg::{
    c, columns_to_matrix, commutator, cr, hermitian_eig, hermitian_eig_default, max_abs,
    max_abs_diff, ordered_exp, orthonormalize, spectral_exp, spectral_exp_from, CMat, CVec,
    EigenSystem, HermitianOperator, StateVector, UnitaryOperator,
};
use crate::spin::RotatingModel;

/// Residual allowed for `[e^{−iAT}, B]` and for scalar monodromy action.
pub const MONODROMY_TOL: f64 = 1e-9;
/// Angles this close to −π are reported as +π.
pub const BRANCH_SNAP: f64 = 1e-9;
/// Tolerance handed to [`ordered_exp`] for holonomies.
pub const HOLONOMY_TOL: f64 = 1e-12;
/// Commutator norm below which `U_dyn · U_geo` may be reported as `U(T)`.
pub const COMMUTE_TOL: f64 = 1e-12;
/// Weight a state must carry inside a group span to count as a member.
pub const SPAN_TOL: f64 = 1e-9;

/// `B = H̃ − A`.
pub fn frame_generator(model: &RotatingModel) -> Result<HermitianOperator> {
    model.tilde_h.sub(&model.drive)
}

/// One eigenvalue cluster of `B` with its monodromy angle.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicGroup {
    pub b_value: f64,
    pub states: Vec<StateVector>,
    /// θ in (−π, π] with `e^{−iAT}φ = e^{−iθ}φ` on the whole group.
    pub theta: f64,
}

impl CyclicGroup {
    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    /// Columns are the group states (`dim × f`).
    pub fn basis(&self) -> CMat {
        let cols: Vec<CVec> = self.states.iter().map(|s| s.as_vector().clone()).collect();
        columns_to_matrix(&cols, self.states[0].dim())
    }

    pub fn projector(&self) -> CMat {
        let b = self.basis();
        &b * b.adjoint()
    }

    /// `‖P v‖²` for a unit vector `v`.
    pub fn weight(&self, v: &CVec) -> f64 {
        self.states
            .iter()
            .map(|s| s.as_vector().dotc(v).norm_sqr())
            .sum()
    }

    /// Compresses an operator on the full space to the group: `V† X V`.
    pub fn compress(&self, op: &CMat) -> CMat {
        let b = self.basis();
        b.adjoint() * op * b
    }
}

/// Default grouping tolerance for the spectrum of `B`.
pub fn default_group_tol(model: &RotatingModel) -> Result<f64> {
    let b = frame_generator(model)?;
    let eig = hermitian_eig_default(&b)?;
    Ok(crate::linalg::default_group_tol(&eig.values))
}

/// Cyclic initial states: one group per eigenvalue cluster of `B`.
pub fn cyclic_states(model: &RotatingModel, group_tol: f64) -> Result<Vec<CyclicGroup>> {
    let b = frame_generator(model)?;
    let monodromy = model.drive_propagator(model.period)?;
    let residual = max_abs(&commutator(monodromy.as_matrix(), b.as_matrix()));
    if residual > MONODROMY_TOL {
        return Err(PhaseError::DriveIncompatible { residual });
    }
    let eig = hermitian_eig(&b, group_tol)?;
    groups_from_eigen(&eig, monodromy.as_matrix())
}

pub fn cyclic_states_default(model: &RotatingModel) -> Result<Vec<CyclicGroup>> {
    cyclic_states(model, default_group_tol(model)?)
}

fn groups_from_eigen(eig: &EigenSystem, monodromy: &CMat) -> Result<Vec<CyclicGroup>> {
    let mut out = Vec::with_capacity(eig.groups.len());
    for (g, range) in eig.groups.iter().enumerate() {
        let cols = eig.group_vectors(g);
        let v = columns_to_matrix(&cols, eig.dim());
        let image = monodromy * &v;
        let compressed = v.adjoint() * &image;
        let lambda = compressed.trace() / cr(range.len() as f64);
        let residual = max_abs_diff(&image, &(&v * lambda));
        if residual > MONODROMY_TOL {
            return Err(PhaseError::NonScalarMonodromy { group: g, residual });
        }
        let theta = principal_snapped(-lambda.arg(), BRANCH_SNAP);
        let states = cols
            .into_iter()
            .map(StateVector::normalized)
            .collect::<Result<Vec<_>>>()?;
        out.push(CyclicGroup {
            b_value: eig.group_value(g),
            states,
            theta,
        });
    }
    Ok(out)
}

/// Total, dynamical and geometric phase of one cyclic state, each a
/// principal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBreakdown {
    pub total: f64,
    pub dynamical: f64,
    pub geometric: f64,
}

impl PhaseBreakdown {
    /// Distance between `geometric` and `total − dynamical` on the circle.
    pub fn consistency_residual(&self) -> f64 {
        mod2pi_distance(self.geometric, self.total - self.dynamical)
    }
}

/// A-A phase of a non-degenerate cyclic state.
pub fn aa_phase(model: &RotatingModel, group: &CyclicGroup) -> Result<PhaseBreakdown> {
    if group.dimension() != 1 {
        return Err(PhaseError::DegenerateGroup {
            dimension: group.dimension(),
        });
    }
    aa_phase_of_state(model, group, &group.states[0])
}

/// A-A phase of any state in `group` that is an eigenvector of the group's
/// connection. Every vector of a non-degenerate group qualifies; inside a
/// degenerate group this picks out the eigen-directions of the holonomy.
pub fn aa_phase_of_state(
    model: &RotatingModel,
    group: &CyclicGroup,
    state: &StateVector,
) -> Result<PhaseBreakdown> {
    let v = state.as_vector();
    let weight = group.weight(v);
    if weight < 1.0 - SPAN_TOL {
        return Err(PhaseError::OutsideGroup { weight });
    }
    let period = model.period;
    let a_mean = model.drive.expectation(v);
    if group.dimension() > 1 {
        let av = model.drive.as_matrix() * v;
        let projected = group.projector() * av;
        let residual = (projected - v * cr(a_mean)).norm();
        if residual > SPAN_TOL * (1.0 + model.drive.max_abs()) {
            return Err(PhaseError::NotConnectionEigenstate { residual });
        }
    }
    let h_mean = model.tilde_h.expectation(v);
    Ok(PhaseBreakdown {
        total: phase(-group.theta - group.b_value * period),
        dynamical: phase(-h_mean * period),
        geometric: phase(a_mean * period - group.theta),
    })
}

/// Connection matrix `𝒜_αβ = ⟨φ_α|A|φ_β⟩ − (θ/T)δ_αβ` on a group.
pub fn degenerate_connection(
    model: &RotatingModel,
    group: &CyclicGroup,
) -> Result<HermitianOperator> {
    let f = group.dimension();
    let a = group.compress(model.drive.as_matrix());
    let shift = CMat::identity(f, f) * cr(group.theta / model.period);
    HermitianOperator::from_matrix(a - shift)
}

/// Dynamical one-form `ℰ_αβ = ⟨φ_α|H̃|φ_β⟩` on a group.
pub fn degenerate_dynamical(
    model: &RotatingModel,
    group: &CyclicGroup,
) -> Result<HermitianOperator> {
    HermitianOperator::from_matrix(group.compress(model.tilde_h.as_matrix()))
}

/// Geometric and dynamical unitary factors of a cyclic group.
#[derive(Debug, Clone, PartialEq)]
pub struct Holonomy {
    pub geometric_factor: UnitaryOperator,
    pub dynamical_factor: UnitaryOperator,
    pub group_dimension: usize,
    pub connection: HermitianOperator,
    pub dynamical_form: HermitianOperator,
}

impl Holonomy {
    /// `‖[𝒜, ℰ]‖_max`.
    pub fn commutator_norm(&self) -> f64 {
        max_abs(&commutator(
            self.connection.as_matrix(),
            self.dynamical_form.as_matrix(),
        ))
    }

    /// `U_dyn · U_geo`, the group block of `U(T)` in the cyclic basis.
    /// Refused unless `𝒜` and `ℰ` commute.
    pub fn full_monodromy(&self) -> Result<UnitaryOperator> {
        let norm = self.commutator_norm();
        if norm > COMMUTE_TOL {
            return Err(PhaseError::NonCommuting { norm });
        }
        self.dynamical_factor.compose(&self.geometric_factor)
    }

    /// Angle φ and residual of the best fit `U_geo ≈ e^{iφ} I`.
    pub fn scalar_fit(&self) -> (f64, f64) {
        scalar_fit(self.geometric_factor.as_matrix())
    }
}

/// Best scalar approximation `c·I` of a square matrix, with `c` the mean
/// diagonal entry. Returns `(arg c, ‖U − cI‖_max)`.
pub fn scalar_fit(u: &CMat) -> (f64, f64) {
    let n = u.nrows();
    let mean = u.trace() / cr(n as f64);
    let residual = max_abs_diff(u, &(CMat::identity(n, n) * mean));
    (phase(mean.arg()), residual)
}

/// Holonomy of a cyclic group; the geometric factor goes through the
/// time-ordered exponential of `i𝒜`.
pub fn aa_holonomy(model: &RotatingModel, group: &CyclicGroup) -> Result<Holonomy> {
    aa_holonomy_with_tol(model, group, HOLONOMY_TOL)
}

/// [`aa_holonomy`] with an explicit step-halving tolerance.
pub fn aa_holonomy_with_tol(
    model: &RotatingModel,
    group: &CyclicGroup,
    tol: f64,
) -> Result<Holonomy> {
    let connection = degenerate_connection(model, group)?;
    let dynamical_form = degenerate_dynamical(model, group)?;
    let generator = connection.as_matrix() * c(0.0, 1.0);
    let geo = ordered_exp(|_| generator.clone(), 0.0, model.period, tol)?;
    let geometric_factor = UnitaryOperator::new(geo)?;
    let dynamical_factor = spectral_exp(&dynamical_form, model.period)?;
    Ok(Holonomy {
        geometric_factor,
        dynamical_factor,
        group_dimension: group.dimension(),
        connection,
        dynamical_form,
    })
}

/// Holonomy with the constant-connection shortcut `exp(i𝒜T)`.
pub fn aa_holonomy_spectral(model: &RotatingModel, group: &CyclicGroup) -> Result<Holonomy> {
    let connection = degenerate_connection(model, group)?;
    let dynamical_form = degenerate_dynamical(model, group)?;
    let geometric_factor = spectral_exp(&connection, -model.period)?;
    let dynamical_factor = spectral_exp(&dynamical_form, model.period)?;
    Ok(Holonomy {
        geometric_factor,
        dynamical_factor,
        group_dimension: group.dimension(),
        connection,
        dynamical_form,
    })
}

/// Rotates a group into the eigenbasis of its connection. The returned
/// states are cyclic, lie in the group and each has a well-defined A-A phase.
pub fn resolve_states(model: &RotatingModel, group: &CyclicGroup) -> Result<Vec<StateVector>> {
    if group.dimension() == 1 {
        return Ok(group.states.clone());
    }
    let connection = degenerate_connection(model, group)?;
    let eig = hermitian_eig_default(&connection)?;
    let basis = group.basis();
    (0..group.dimension())
        .map(|k| StateVector::normalized(&basis * eig.vector(k)))
        .collect()
}

/// Index of the group carrying (nearly) all the weight of `span`.
pub fn locate_span(groups: &[CyclicGroup], span: &[CVec]) -> Result<usize> {
    let basis = orthonormalize(span, 1e-12);
    let mut best = (0, f64::NEG_INFINITY);
    for (g, group) in groups.iter().enumerate() {
        let w = basis
            .iter()
            .map(|v| group.weight(v))
            .fold(f64::INFINITY, f64::min);
        if w > best.1 {
            best = (g, w);
        }
    }
    if best.1 < 1.0 - SPAN_TOL {
        return Err(PhaseError::NoMatchingGroup { weight: best.1 });
    }
    Ok(best.0)
}

/// An operator on a group restricted to a sub-span of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    /// `W† X W` in the orthonormalized span basis.
    pub matrix: CMat,
    /// `‖(I − WW†) X W‖_max`: zero when the span is invariant under `X`.
    pub leakage: f64,
}

/// Restricts an operator given in the coordinates of `group_basis` to
/// `span` (vectors in the full space lying inside the group).
pub fn restrict_to_span(
    group_basis: &[StateVector],
    op_on_group: &CMat,
    span: &[CVec],
) -> Result<Restriction> {
    let basis = orthonormalize(span, 1e-12);
    for v in &basis {
        let weight: f64 = group_basis
            .iter()
            .map(|s| s.as_vector().dotc(v).norm_sqr())
            .sum();
        if weight < 1.0 - SPAN_TOL {
            return Err(PhaseError::OutsideGroup { weight });
        }
    }
    let cols: Vec<CVec> = group_basis.iter().map(|s| s.as_vector().clone()).collect();
    let vg = columns_to_matrix(&cols, group_basis[0].dim());
    let w = vg.adjoint() * columns_to_matrix(&basis, group_basis[0].dim());
    let image = op_on_group * &w;
    let matrix = w.adjoint() * &image;
    let leakage = max_abs(&(&image - &w * &matrix));
    Ok(Restriction { matrix, leakage })
}

/// `Σ_n f_n b_n − tr B`.
pub fn trace_identity_residual(model: &RotatingModel, groups: &[CyclicGroup]) -> Result<f64> {
    let b = frame_generator(model)?;
    let sum: f64 = groups
        .iter()
        .map(|g| g.dimension() as f64 * g.b_value)
        .sum();
    Ok((sum - b.trace().re).abs())
}

/// `U(t) = Z(t) e^{iMt}` with `Z` periodic.
#[derive(Debug, Clone)]
pub struct FloquetSplit {
    pub omega_operator: HermitianOperator,
    pub m_operator: HermitianOperator,
    pub period: f64,
    pub groups: Vec<CyclicGroup>,
    model: RotatingModel,
    m_eigen: EigenSystem,
}

impl FloquetSplit {
    /// `Z(t) = e^{−iAt} e^{iΩt/T}`.
    pub fn z_at(&self, t: f64) -> Result<UnitaryOperator> {
        let rot = self.model.drive_propagator(t)?;
        if t == 0.0 {
            return Ok(rot);
        }
        let mut phase = CMat::zeros(self.model.dim(), self.model.dim());
        for g in &self.groups {
            phase += g.projector() * Complex64::from_polar(1.0, g.theta * t / self.period);
        }
        UnitaryOperator::from_matrix(rot.as_matrix() * phase)
    }

    /// `e^{iMt}`.
    pub fn m_exp(&self, t: f64) -> Result<UnitaryOperator> {
        spectral_exp_from(&self.m_eigen, -t)
    }

    /// `Z(t) e^{iMt}`.
    pub fn evolution_at(&self, t: f64) -> Result<UnitaryOperator> {
        self.z_at(t)?.compose(&self.m_exp(t)?)
    }

    /// Connection `i⟨mα|Z†(t) dZ/dt|mβ⟩` of group `g` by central differences
    /// with step `step`.
    pub fn connection_from_z(&self, g: usize, t: f64, step: f64) -> Result<CMat> {
        let group = self.groups.get(g).ok_or(PhaseError::IndexOutOfRange {
            index: g,
            len: self.groups.len(),
        })?;
        let z = self.z_at(t)?;
        let zp = self.z_at(t + step)?;
        let zm = self.z_at(t - step)?;
        let dz = (zp.as_matrix() - zm.as_matrix()) * cr(0.5 / step);
        let gen = z.adjoint() * dz * c(0.0, 1.0);
        Ok(group.compress(&gen))
    }
}

/// Builds the Floquet split with `Ω = Σ_n θ_n P_n` over the cyclic groups.
pub fn floquet_split(model: &RotatingModel, group_tol: f64) -> Result<FloquetSplit> {
    let groups = cyclic_states(model, group_tol)?;
    let dim = model.dim();
    let mut omega = CMat::zeros(dim, dim);
    for g in &groups {
        omega += g.projector() * cr(g.theta);
    }
    let omega_operator = HermitianOperator::from_matrix(omega)?;
    let b = frame_generator(model)?;
    let m_operator = HermitianOperator::from_matrix(
        -b.as_matrix() - omega_operator.as_matrix() * cr(1.0 / model.period),
    )?;
    let m_eigen = hermitian_eig_default(&m_operator)?;
    Ok(FloquetSplit {
        omega_operator,
        m_operator,
        period: model.period,
        groups,
        model: model.clone(),
        m_eigen,
    })
}

pub fn floquet_split_default(model: &RotatingModel) -> Result<FloquetSplit> {
    floquet_split(model, default_group_tol(model)?)
}

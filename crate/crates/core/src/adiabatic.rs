//! Adiabatic limit: instantaneous eigenframes, Berry phases, Wilczek-Zee
//! holonomies and the adiabaticity diagnostic.
//!
//! Eigenvectors of `H(t) = e^{−iAt}H̃e^{iAt}` are `e^{−iAt}|n⟩′` with
//! `H̃|n⟩′ = λ_n|n⟩′`. Multiplying by `e^{iπt/T}` makes them single valued
//! (`e^{−iAT} = −I` for three qubits), and the Berry connection becomes the
//! constant `⟨n′|A|n′⟩ − π/T`.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;

use crate::angle::{mod2pi_distance, phase};
use crate::error::{PhaseError, Result};
use crate::holonomy::{
    aa_phase_of_state, cyclic_states_default, resolve_states, Holonomy, SPAN_TOL,
};
use crate::linalg::{
    c, columns_to_matrix, commutator, cr, hermitian_eig_default, max_abs_vec, ordered_exp,
    spectral_exp, CMat, CVec, EigenSystem, HermitianOperator, StateVector, UnitaryOperator,
};
use crate::spin::{hamiltonian_at, RotatingModel};

/// Eigenvectors of `H(t)` in a fixed gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantaneousFrame {
    pub time: f64,
    pub values: Vec<f64>,
    /// Columns are eigenvectors, ordered like `values`.
    pub vectors: CMat,
    pub groups: Vec<Range<usize>>,
}

impl InstantaneousFrame {
    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    /// `max_k ‖H(t)v_k − λ_k v_k‖_max`.
    pub fn eigen_residual(&self, model: &RotatingModel) -> Result<f64> {
        let h = hamiltonian_at(model, self.time)?;
        let mut worst = 0.0_f64;
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vector(k);
            worst = worst.max(max_abs_vec(&(h.as_matrix() * &v - &v * cr(lam))));
        }
        Ok(worst)
    }
}

/// Eigenbasis of `H̃` with each degenerate cluster rotated to diagonalize
/// the drive compressed to it. Every column then has a well-defined Berry
/// phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BerryBasis {
    pub values: Vec<f64>,
    pub vectors: CMat,
    pub groups: Vec<Range<usize>>,
    /// `⟨n′|A|n′⟩` per column.
    pub connection: Vec<f64>,
}

impl BerryBasis {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    /// Cluster index of column `k`.
    pub fn group_of(&self, k: usize) -> usize {
        self.groups
            .iter()
            .position(|r| r.contains(&k))
            .expect("column in range")
    }

    pub fn is_degenerate(&self, k: usize) -> bool {
        self.groups[self.group_of(k)].len() > 1
    }
}

fn h_eigen(model: &RotatingModel) -> Result<EigenSystem> {
    hermitian_eig_default(&model.tilde_h)
}

pub fn berry_basis(model: &RotatingModel) -> Result<BerryBasis> {
    let eig = h_eigen(model)?;
    let dim = eig.dim();
    let mut vectors = eig.vectors.clone();
    let mut connection = vec![0.0; dim];
    for range in &eig.groups {
        let cols: Vec<CVec> = range.clone().map(|k| eig.vector(k)).collect();
        let v = columns_to_matrix(&cols, dim);
        let compressed =
            HermitianOperator::from_matrix(v.adjoint() * model.drive.as_matrix() * &v)?;
        let sub = hermitian_eig_default(&compressed)?;
        let rotated = &v * &sub.vectors;
        for (j, k) in range.clone().enumerate() {
            vectors.set_column(k, &rotated.column(j));
            connection[k] = sub.values[j];
        }
    }
    Ok(BerryBasis {
        values: eig.values,
        vectors,
        groups: eig.groups,
        connection,
    })
}

fn rotate_frame(model: &RotatingModel, t: f64, extra: Complex64) -> Result<InstantaneousFrame> {
    let eig = h_eigen(model)?;
    let w = model.drive_propagator(t)?;
    let vectors = if t == 0.0 {
        eig.vectors.clone()
    } else {
        w.as_matrix() * &eig.vectors * extra
    };
    Ok(InstantaneousFrame {
        time: t,
        values: eig.values,
        vectors,
        groups: eig.groups,
    })
}

/// `e^{−iAt}|n⟩′` for the gauge-fixed eigenvectors `|n⟩′` of `H̃`.
pub fn instantaneous_frame(model: &RotatingModel, t: f64) -> Result<InstantaneousFrame> {
    rotate_frame(model, t, cr(1.0))
}

/// `e^{−iAt}e^{iπt/T}|n⟩′`, which returns to itself at `t = T`.
pub fn single_valued_frame(model: &RotatingModel, t: f64) -> Result<InstantaneousFrame> {
    rotate_frame(model, t, Complex64::from_polar(1.0, PI * t / model.period))
}

/// Berry connection `i⟨n(t)|ṅ(t)⟩` of column `index` of the Berry basis,
/// evaluated on the single-valued frame at time `t`.
pub fn berry_connection(model: &RotatingModel, index: usize, t: f64) -> Result<f64> {
    let basis = berry_basis(model)?;
    if index >= basis.len() {
        return Err(PhaseError::IndexOutOfRange {
            index,
            len: basis.len(),
        });
    }
    let w = model.drive_propagator(t)?;
    let n_t =
        w.as_matrix() * basis.vector(index) * Complex64::from_polar(1.0, PI * t / model.period);
    // ṅ = (−iA + iπ/T) n
    let shifted = model.drive.as_matrix() * &n_t - &n_t * cr(PI / model.period);
    let n_dot = shifted * c(0.0, -1.0);
    Ok((n_t.dotc(&n_dot) * c(0.0, 1.0)).re)
}

/// Berry phase `⟨n′|A|n′⟩T − π` of column `index` of [`berry_basis`].
/// Inside a degenerate cluster the column is an eigenvector of the
/// compressed connection, so the phase is well defined; the full
/// non-abelian picture comes from [`wilczek_zee_holonomy`].
pub fn berry_phase(model: &RotatingModel, index: usize) -> Result<f64> {
    let basis = berry_basis(model)?;
    if index >= basis.len() {
        return Err(PhaseError::IndexOutOfRange {
            index,
            len: basis.len(),
        });
    }
    Ok(phase(basis.connection[index] * model.period - PI))
}

/// Berry phase of an arbitrary eigenvector of `H̃` that also diagonalizes
/// the connection on its cluster.
pub fn berry_phase_of_state(model: &RotatingModel, state: &StateVector) -> Result<f64> {
    let v = state.as_vector();
    let energy = model.tilde_h.expectation(v);
    let scale = 1.0 + model.tilde_h.max_abs();
    let h_res = (model.tilde_h.as_matrix() * v - v * cr(energy)).norm();
    if h_res > SPAN_TOL * scale {
        return Err(PhaseError::InvalidArgument(format!(
            "state is not an eigenvector of the static Hamiltonian (residual {h_res:.3e})"
        )));
    }
    let eig = h_eigen(model)?;
    let group = eig
        .groups
        .iter()
        .position(|r| {
            r.clone()
                .any(|k| (eig.values[k] - energy).abs() <= SPAN_TOL * scale)
        })
        .ok_or(PhaseError::NoMatchingGroup { weight: 0.0 })?;
    let cols = eig.group_vectors(group);
    let p = columns_to_matrix(&cols, eig.dim());
    let a_mean = model.drive.expectation(v);
    let projected = &p * (p.adjoint() * (model.drive.as_matrix() * v));
    let residual = (projected - v * cr(a_mean)).norm();
    if residual > SPAN_TOL * (1.0 + model.drive.max_abs()) {
        return Err(PhaseError::NotConnectionEigenstate { residual });
    }
    Ok(phase(a_mean * model.period - PI))
}

/// Eigenvalue clusters of `H̃`.
pub fn berry_groups(model: &RotatingModel) -> Result<Vec<Range<usize>>> {
    Ok(h_eigen(model)?.groups)
}

/// Gauge-fixed eigenvectors `|n⟩′` of one cluster of `H̃`; the coordinates
/// in which [`wilczek_zee_holonomy`] reports its matrices.
pub fn berry_cluster_states(model: &RotatingModel, group: usize) -> Result<Vec<StateVector>> {
    let eig = h_eigen(model)?;
    if group >= eig.groups.len() {
        return Err(PhaseError::IndexOutOfRange {
            index: group,
            len: eig.groups.len(),
        });
    }
    eig.group_vectors(group)
        .into_iter()
        .map(StateVector::normalized)
        .collect()
}

/// Wilczek-Zee holonomy of cluster `group` of `H̃`:
/// `𝒯exp(i∫𝒜dt)` with `𝒜 = ⟨nα′|A|nβ′⟩ − (π/T)δ`.
pub fn wilczek_zee_holonomy(model: &RotatingModel, group: usize) -> Result<Holonomy> {
    wilczek_zee_holonomy_with_tol(model, group, crate::holonomy::HOLONOMY_TOL)
}

pub fn wilczek_zee_holonomy_with_tol(
    model: &RotatingModel,
    group: usize,
    tol: f64,
) -> Result<Holonomy> {
    let eig = h_eigen(model)?;
    if group >= eig.groups.len() {
        return Err(PhaseError::IndexOutOfRange {
            index: group,
            len: eig.groups.len(),
        });
    }
    let cols = eig.group_vectors(group);
    let f = cols.len();
    let v = columns_to_matrix(&cols, eig.dim());
    let shift = CMat::identity(f, f) * cr(PI / model.period);
    let connection =
        HermitianOperator::from_matrix(v.adjoint() * model.drive.as_matrix() * &v - shift)?;
    let dynamical_form =
        HermitianOperator::from_matrix(v.adjoint() * model.tilde_h.as_matrix() * &v)?;
    let generator = connection.as_matrix() * c(0.0, 1.0);
    let geo = ordered_exp(|_| generator.clone(), 0.0, model.period, tol)?;
    Ok(Holonomy {
        geometric_factor: UnitaryOperator::new(geo)?,
        dynamical_factor: spectral_exp(&dynamical_form, model.period)?,
        group_dimension: f,
        connection,
        dynamical_form,
    })
}

fn metric_with<F: Fn(f64) -> f64>(model: &RotatingModel, denom: F) -> Result<f64> {
    let eig = h_eigen(model)?;
    if eig.groups.len() < 2 {
        return Err(PhaseError::AllDegenerate);
    }
    // dH/dt at t = 0
    let h_dot = commutator(model.drive.as_matrix(), model.tilde_h.as_matrix()) * c(0.0, -1.0);
    let elements = eig.vectors.adjoint() * h_dot * &eig.vectors;
    let group_of: Vec<usize> = (0..eig.dim())
        .map(|k| eig.groups.iter().position(|r| r.contains(&k)).unwrap())
        .collect();
    let mut worst = 0.0_f64;
    for m in 0..eig.dim() {
        for n in 0..eig.dim() {
            if group_of[m] == group_of[n] {
                continue;
            }
            let gap = (eig.values[n] - eig.values[m]).abs();
            worst = worst.max(elements[(m, n)].norm() / denom(gap));
        }
    }
    Ok(worst)
}

/// `max |⟨m|dH/dt|n⟩| / |E_n − E_m|` over pairs from distinct clusters,
/// at `t = 0` (the value is the same at every `t`).
pub fn adiabaticity_metric(model: &RotatingModel) -> Result<f64> {
    metric_with(model, |gap| gap)
}

/// Same as [`adiabaticity_metric`] with the gap squared.
pub fn adiabaticity_metric_squared_gap(model: &RotatingModel) -> Result<f64> {
    metric_with(model, |gap| gap * gap)
}

/// A Berry eigenvector paired with the cyclic state it overlaps most.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionPair {
    /// Column of [`berry_basis`].
    pub berry_index: usize,
    pub berry: f64,
    pub aa: f64,
    /// `|⟨cyclic|berry⟩|²`.
    pub overlap: f64,
    pub distance: f64,
}

/// Pairs each non-degenerate Berry state with its best-overlapping cyclic
/// state and compares the geometric phases.
pub fn reduction_pairs(model: &RotatingModel) -> Result<Vec<ReductionPair>> {
    let basis = berry_basis(model)?;
    let groups = cyclic_states_default(model)?;
    let mut candidates = Vec::new();
    for g in &groups {
        for s in resolve_states(model, g)? {
            candidates.push((g, s));
        }
    }
    let mut out = Vec::new();
    for k in 0..basis.len() {
        if basis.is_degenerate(k) {
            continue;
        }
        let n = basis.vector(k);
        let (g, best, overlap) = candidates
            .iter()
            .map(|(g, s)| (*g, s, s.as_vector().dotc(&n).norm_sqr()))
            .fold(None, |acc: Option<(_, _, f64)>, item| match acc {
                Some(a) if a.2 >= item.2 => Some(a),
                _ => Some(item),
            })
            .expect("at least one cyclic state");
        let aa = aa_phase_of_state(model, g, best)?.geometric;
        let berry = phase(basis.connection[k] * model.period - PI);
        out.push(ReductionPair {
            berry_index: k,
            berry,
            aa,
            overlap,
            distance: mod2pi_distance(aa, berry),
        });
    }
    Ok(out)
}

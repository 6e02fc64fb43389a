//! Per-point phase tables and grid sweeps.
//!
//! Every cyclic state of a point (connection-resolved inside degenerate
//! groups) becomes one [`SweepRecord`]. States are labelled after the
//! closed-form state they match:
//!
//! * z-model: `P+1`, `P+2` (even block branches), `P-1`, `P-2` (odd block),
//!   `P+34.k`, `P-34.k` (degenerate pair of each block);
//! * x-model: `B1.k`, `B2.k` for the two closed-form degenerate groups.
//!
//! Unmatched states get `G{group}.{k}` and a NaN closed-form phase.

use std::f64::consts::PI;

use crate::adiabatic::{berry_basis, berry_phase};
use crate::angle::{mod2pi_distance, phase};
use crate::closed_form::{
    aa_phase_closed_block, berry_eigenvector_closed, berry_phase_closed_block, embed_block, lift,
    x_eigenvectors_closed, x_holonomy_closed, x_spectrum_closed, z_degenerate_span,
    z_eigenvector_closed, z_spectrum_closed, Block, Branch,
};
use crate::error::{PhaseError, Result};
use crate::exec::{par_map, Execution};
use crate::grid::GridPoint;
use crate::holonomy::{
    aa_holonomy_with_tol, aa_phase_of_state, cyclic_states_default, frame_generator, locate_span,
    resolve_states, restrict_to_span, scalar_fit, CyclicGroup,
};
use crate::linalg::{hermitian_eig_default, orthonormalize, CMat, CVec, StateVector};
use crate::report::SweepRecord;
use crate::spin::{rotating_model, Axis, ModelParams, RotatingModel};

/// Weight a state needs in a reference vector or span to take its label.
pub const MATCH_WEIGHT: f64 = 1.0 - 1e-6;

/// A closed-form reference: a labelled span and its geometric phase, if any.
#[derive(Debug, Clone)]
pub struct Reference {
    pub label: String,
    pub basis: Vec<CVec>,
    pub geometric: Option<f64>,
}

impl Reference {
    pub fn weight(&self, v: &CVec) -> f64 {
        self.basis.iter().map(|b| b.dotc(v).norm_sqr()).sum()
    }

    fn new(label: &str, vectors: &[[f64; 8]], geometric: Option<f64>) -> Self {
        let lifted: Vec<CVec> = vectors.iter().map(lift).collect();
        Self {
            label: label.to_string(),
            basis: orthonormalize(&lifted, 1e-12),
            geometric,
        }
    }
}

fn block_label(block: Block) -> char {
    match block {
        Block::Even => '+',
        Block::Odd => '-',
    }
}

/// Closed-form cyclic states of a point. Branch vectors whose normalization
/// vanishes are left out.
pub fn references(axis: Axis, p: &GridPoint) -> Vec<Reference> {
    let mut out = Vec::new();
    match axis {
        Axis::Z => {
            for block in [Block::Even, Block::Odd] {
                for branch in [Branch::One, Branch::Two] {
                    let Ok(v) = z_eigenvector_closed(p.gamma, p.h, p.omega, branch, block) else {
                        continue;
                    };
                    let eta = aa_phase_closed_block(p.gamma, p.h, p.omega, branch, block).ok();
                    let label = format!("P{}{}", block_label(block), branch.index());
                    out.push(Reference::new(&label, &[embed_block(&v, block)], eta));
                }
                let label = format!("P{}34", block_label(block));
                out.push(Reference::new(&label, &z_degenerate_span(block), Some(0.0)));
            }
        }
        Axis::X => {
            for group in [1, 2] {
                if let (Ok(vs), Ok(angle)) = (
                    x_eigenvectors_closed(p.h, p.omega, group),
                    x_holonomy_closed(p.h, p.omega, group),
                ) {
                    out.push(Reference::new(&format!("B{group}"), &vs, Some(angle)));
                }
            }
        }
        Axis::Y => {}
    }
    out
}

/// Best reference for `v`, if its weight clears [`MATCH_WEIGHT`].
pub fn best_reference<'a>(refs: &'a [Reference], v: &CVec) -> Option<&'a Reference> {
    refs.iter()
        .map(|r| (r, r.weight(v)))
        .filter(|(_, w)| *w >= MATCH_WEIGHT)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(r, _)| r)
}

/// A resolved cyclic state with the group it belongs to.
#[derive(Debug, Clone)]
pub struct LabelledState {
    pub label: String,
    pub group: usize,
    pub state: StateVector,
    pub reference: Option<Reference>,
}

/// Resolves every group and labels its states.
pub fn labelled_states(
    model: &RotatingModel,
    groups: &[CyclicGroup],
) -> Result<Vec<LabelledState>> {
    let p = point_of(model);
    let refs = references(model.params.axis, &p);
    let mut out: Vec<LabelledState> = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        for state in resolve_states(model, group)? {
            let reference = best_reference(&refs, state.as_vector()).cloned();
            let base = match &reference {
                Some(r) => r.label.clone(),
                None => format!("G{g}"),
            };
            out.push(LabelledState {
                label: base,
                group: g,
                state,
                reference,
            });
        }
    }
    // number labels that occur more than once
    let labels: Vec<String> = out.iter().map(|s| s.label.clone()).collect();
    let mut seen = std::collections::HashMap::<String, usize>::new();
    for s in out.iter_mut() {
        let count = labels.iter().filter(|l| **l == s.label).count();
        let spans_group = s.reference.as_ref().is_some_and(|r| r.basis.len() > 1);
        if count > 1 || spans_group || s.reference.is_none() {
            let k = seen.entry(s.label.clone()).or_insert(0);
            *k += 1;
            s.label = format!("{}.{}", s.label, k);
        }
    }
    Ok(out)
}

fn point_of(model: &RotatingModel) -> GridPoint {
    GridPoint::new(model.params.gamma, model.params.h, model.params.omega)
}

pub fn build_model(axis: Axis, p: &GridPoint) -> Result<RotatingModel> {
    rotating_model(ModelParams::new(p.gamma, p.h, p.omega, axis)?)
}

/// All records for one parameter point.
pub fn point_records(axis: Axis, p: &GridPoint) -> Result<Vec<SweepRecord>> {
    let model = build_model(axis, p)?;
    let groups = cyclic_states_default(&model)?;
    let states = labelled_states(&model, &groups)?;
    let mut out = Vec::with_capacity(states.len());
    for s in states {
        let group = &groups[s.group];
        let phases = aa_phase_of_state(&model, group, &s.state)?;
        let closed = s
            .reference
            .as_ref()
            .and_then(|r| r.geometric)
            .unwrap_or(f64::NAN);
        let residual = if closed.is_nan() {
            f64::NAN
        } else {
            mod2pi_distance(closed, phases.geometric)
        };
        out.push(SweepRecord {
            gamma: p.gamma,
            h: p.h,
            omega: p.omega,
            state: s.label,
            b_value: group.b_value,
            theta: group.theta,
            total: phases.total,
            dynamical: phases.dynamical,
            geometric_closed: closed,
            geometric_numeric: phases.geometric,
            residual,
        });
    }
    Ok(out)
}

/// Records for every point, in grid order. Points run in parallel when
/// `exec` allows it; a failing point fails the sweep.
pub fn sweep(axis: Axis, points: &[GridPoint], exec: Execution) -> Result<Vec<SweepRecord>> {
    let per_point = par_map(exec, points, |p| point_records(axis, p));
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

/// Adiabatic rows: one per column of the connection-resolved eigenbasis of
/// `H̃`. `b_value` holds the eigenvalue `λ`, `dynamical` is `−λT`, and
/// the closed-form Berry phase is filled in when the column matches a
/// closed-form eigenvector (`L±1`, `L±2`).
pub fn berry_records(axis: Axis, p: &GridPoint) -> Result<Vec<SweepRecord>> {
    let model = build_model(axis, p)?;
    let basis = berry_basis(&model)?;
    let mut refs = Vec::new();
    for block in [Block::Even, Block::Odd] {
        for branch in [Branch::One, Branch::Two] {
            let Ok(v) = berry_eigenvector_closed(p.gamma, p.h, branch, block) else {
                continue;
            };
            let phase = berry_phase_closed_block(p.gamma, p.h, branch, block).ok();
            let label = format!("L{}{}", block_label(block), branch.index());
            refs.push(Reference::new(&label, &[embed_block(&v, block)], phase));
        }
    }
    let mut out = Vec::with_capacity(basis.len());
    for k in 0..basis.len() {
        let n = basis.vector(k);
        let reference = if model.params.axis == Axis::Z {
            best_reference(&refs, &n)
        } else {
            None
        };
        let state = reference.map_or_else(|| format!("N{}", k + 1), |r| r.label.clone());
        let numeric = berry_phase(&model, k)?;
        let closed = reference.and_then(|r| r.geometric).unwrap_or(f64::NAN);
        let dynamical = -basis.values[k] * model.period;
        out.push(SweepRecord {
            gamma: p.gamma,
            h: p.h,
            omega: p.omega,
            state,
            b_value: basis.values[k],
            theta: PI,
            total: phase(dynamical + numeric),
            dynamical: phase(dynamical),
            geometric_closed: closed,
            geometric_numeric: numeric,
            residual: if closed.is_nan() {
                f64::NAN
            } else {
                mod2pi_distance(closed, numeric)
            },
        });
    }
    Ok(out)
}

/// Geometric holonomy of one closed-form degenerate group, restricted to its
/// closed-form span.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupHolonomy {
    pub group: usize,
    pub b_value: f64,
    /// Closed-form scalar angle.
    pub closed: f64,
    /// Angle of the best scalar fit to `factor`.
    pub numeric: f64,
    /// Distance of `factor` from `e^{i·numeric} I`.
    pub scalar_residual: f64,
    /// Weight of the factor outside the span.
    pub leakage: f64,
    /// 2×2 factor in the closed-form span basis.
    pub factor: CMat,
}

impl GroupHolonomy {
    pub fn residual(&self) -> f64 {
        mod2pi_distance(self.closed, self.numeric)
    }
}

/// x-model groups 1, 2 are the `B₁`, `B₂` pairs; z-model groups 1, 2 are
/// the degenerate pairs of the even and odd block.
pub fn group_holonomy(axis: Axis, p: &GridPoint, group: usize, tol: f64) -> Result<GroupHolonomy> {
    let (span, closed) = match (axis, group) {
        (Axis::X, 1 | 2) => (
            x_eigenvectors_closed(p.h, p.omega, group)?,
            x_holonomy_closed(p.h, p.omega, group)?,
        ),
        (Axis::Z, 1) => (z_degenerate_span(Block::Even), 0.0),
        (Axis::Z, 2) => (z_degenerate_span(Block::Odd), 0.0),
        _ => {
            return Err(PhaseError::InvalidArgument(format!(
                "group must be 1 or 2, got {group}"
            )))
        }
    };
    let span: Vec<CVec> = orthonormalize(&span.iter().map(lift).collect::<Vec<_>>(), 1e-12);
    let model = build_model(axis, p)?;
    let groups = cyclic_states_default(&model)?;
    let g = &groups[locate_span(&groups, &span)?];
    let hol = aa_holonomy_with_tol(&model, g, tol)?;
    let r = restrict_to_span(&g.states, hol.geometric_factor.as_matrix(), &span)?;
    let (numeric, scalar_residual) = scalar_fit(&r.matrix);
    Ok(GroupHolonomy {
        group,
        b_value: g.b_value,
        closed,
        numeric,
        scalar_residual,
        leakage: r.leakage,
        factor: r.matrix,
    })
}

/// One eigenvalue of the frame generator `B` or of `H̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub operator: &'static str,
    pub index: usize,
    pub value: f64,
    /// Closed-form value it matches, NaN if none.
    pub closed: f64,
    pub multiplicity: usize,
}

pub fn spectrum_rows(axis: Axis, p: &GridPoint) -> Result<Vec<SpectrumRow>> {
    let model = build_model(axis, p)?;
    let b = hermitian_eig_default(&frame_generator(&model)?)?;
    let h = hermitian_eig_default(&model.tilde_h)?;
    // the odd block is the even one with the field reversed; H̃ is the
    // z-model frame generator at zero drive
    let z_closed = |omega: f64| {
        let mut v = Vec::new();
        for sign in [1.0, -1.0] {
            if let Ok(s) = z_spectrum_closed(p.gamma, sign * p.h, sign * omega) {
                v.extend([s.p1, s.p2, s.p34]);
            }
        }
        v
    };
    let b_closed = match axis {
        Axis::Z => z_closed(p.omega),
        _ => {
            let (b1, b2) = x_spectrum_closed(p.gamma, p.h, p.omega);
            vec![b1, b2]
        }
    };
    let h_closed = z_closed(0.0);
    let mut out = Vec::new();
    for (name, eig, closed) in [("B", &b, &b_closed), ("H~", &h, &h_closed)] {
        for (k, &value) in eig.values.iter().enumerate() {
            let matched = closed
                .iter()
                .copied()
                .filter(|c| (c - value).abs() <= 1e-8 * (1.0 + value.abs()))
                .min_by(|a, b| (a - value).abs().total_cmp(&(b - value).abs()))
                .unwrap_or(f64::NAN);
            let multiplicity = eig
                .groups
                .iter()
                .find(|r| r.contains(&k))
                .map_or(1, |r| r.len());
            out.push(SpectrumRow {
                operator: name,
                index: k + 1,
                value,
                closed: matched,
                multiplicity,
            });
        }
    }
    Ok(out)
}

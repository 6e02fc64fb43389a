//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Output is fully deterministic: eigenvalues ascending, each eigenvector
//! gauge-fixed so its largest-magnitude component is real and positive
//! (lowest index wins ties), and degenerate clusters grouped by a gap
//! tolerance.

use std::ops::Range;

use num_complex::Complex64;

use super::matrix::{cr, CMat, CVec, HermitianOperator};
use crate::error::{PhaseError, Result};

const MAX_SWEEPS: usize = 64;

/// Relative tolerance for deciding that two components tie for largest.
const GAUGE_TIE_REL: f64 = 1e-12;

/// Eigenvalues (ascending), orthonormal eigenvector columns and the
/// partition of indices into degenerate clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
    pub groups: Vec<Range<usize>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    /// Columns of one degenerate cluster.
    pub fn group_vectors(&self, g: usize) -> Vec<CVec> {
        self.groups[g].clone().map(|k| self.vector(k)).collect()
    }

    /// Mean eigenvalue of a cluster.
    pub fn group_value(&self, g: usize) -> f64 {
        let r = &self.groups[g];
        self.values[r.clone()].iter().sum::<f64>() / r.len() as f64
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMat {
        self.apply_function(cr)
    }

    /// `V f(Λ) V†` for a complex-valued spectral function.
    pub fn apply_function<F: Fn(f64) -> Complex64>(&self, f: F) -> CMat {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let fk = f(lam);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Grouping tolerance used when callers have no better information:
/// `1e−9 · (spectral range + 1)`.
pub fn default_group_tol(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = if values.is_empty() { 0.0 } else { hi - lo };
    1e-9 * (range + 1.0)
}

/// Diagonalizes a Hermitian operator.
pub fn hermitian_eig(h: &HermitianOperator, group_tol: f64) -> Result<EigenSystem> {
    if !(group_tol > 0.0) || !group_tol.is_finite() {
        return Err(PhaseError::InvalidArgument(format!(
            "group tolerance must be positive, got {group_tol}"
        )));
    }
    let (values, vectors) = jacobi(h.as_matrix())?;
    let n = values.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let sorted_values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut sorted_vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        fix_gauge(&mut col);
        sorted_vectors.set_column(dst, &col);
    }

    let groups = group_sorted(&sorted_values, group_tol);
    Ok(EigenSystem {
        values: sorted_values,
        vectors: sorted_vectors,
        groups,
    })
}

/// Diagonalizes with [`default_group_tol`] computed from a first pass.
pub fn hermitian_eig_default(h: &HermitianOperator) -> Result<EigenSystem> {
    let first = hermitian_eig(h, 1.0)?;
    let tol = default_group_tol(&first.values);
    let groups = group_sorted(&first.values, tol);
    Ok(EigenSystem { groups, ..first })
}

/// Splits ascending values into clusters: a new cluster starts whenever
/// the gap to the previous value exceeds `tol`.
pub fn group_sorted(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            if k > start {
                groups.push(start..k);
            }
            start = k;
        }
    }
    groups
}

/// Multiplies `v` by the phase that makes its largest-magnitude component
/// real and positive.
pub fn fix_gauge(v: &mut CVec) {
    let mut best = 0;
    let mut best_mag = 0.0_f64;
    for (k, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag * (1.0 + GAUGE_TIE_REL) + f64::MIN_POSITIVE {
            best = k;
            best_mag = mag;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = v[best].conj() / best_mag;
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[best] = cr(v[best].re);
}

fn off_diagonal_norm(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on a Hermitian matrix. Returns unsorted eigenvalues and
/// the accumulated unitary whose columns are eigenvectors.
fn jacobi(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = CMat::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let target = f64::EPSILON * scale * 0.5;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            let values = (0..n).map(|k| a[(k, k)].re).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let residual = off_diagonal_norm(&a);
    if residual <= 1e-13 * scale {
        let values = (0..n).map(|k| a[(k, k)].re).collect();
        return Ok((values, v));
    }
    Err(PhaseError::EigenNoConvergence {
        sweeps: MAX_SWEEPS,
        residual,
    })
}

/// Annihilates `a[(p, q)]` with the unitary `G = D R`, where
/// `D = diag(1, e^{−iφ})` makes the pivot real and `R` is a real Jacobi
/// rotation. Applies `a ← G† a G` and `v ← v G`.
fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag < 1e-300 || mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = cr(0.0);
        a[(q, p)] = cr(0.0);
        return;
    }
    let phase = apq / mag; // e^{iφ}
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;

    // G = [[c, s], [−s e^{−iφ}, c e^{−iφ}]]
    let g_pp = cr(cs);
    let g_pq = cr(sn);
    let g_qp = -phase.conj() * sn;
    let g_qq = phase.conj() * cs;

    let n = a.nrows();
    // a ← a G (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // a ← G† a (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = cr(0.0);
    a[(q, p)] = cr(0.0);
    a[(p, p)] = cr(a[(p, p)].re);
    a[(q, q)] = cr(a[(q, q)].re);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

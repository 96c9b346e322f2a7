//! Hermitian forms invariant under a monodromy representation.
//!
//! `GL(2, C)` acts on the real 4-space of Hermitian matrices by `H ↦ A†HA`.
//! The forms fixed by all generators are the kernel of the positive
//! semi-definite operator `Q = Σ (R_i − Id)ᵀ(R_i − Id)`.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::herm_geom::HermitianForm2;
use crate::linalg::{self, cr, CMat2, CVec2};
use crate::monodromy::MonodromyRep;

pub const KERNEL_REL_TOL: f64 = 1e-8;
pub const SIGNATURE_TOL: f64 = 1e-8;
pub const DEGENERATE_DET_TOL: f64 = 1e-8;
/// Separation required between the eigenvalues handled by [`invariant_form_of_pair`].
pub const EIGEN_SEPARATION_TOL: f64 = 1e-9;
pub const COMMON_EIGENVALUE_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlatFormError {
    #[error("{0} is not diagonalizable with distinct unit eigenvalues")]
    BadGenerator(&'static str),
    #[error("eigenvalues of R and S are not disjoint")]
    SharedEigenvalue,
    #[error("R S^-1 has no eigenvalue 1 (distance {0:e})")]
    NoCommonFixedVector(f64),
    #[error("fixed lines are skew (smallest singular value {0:e})")]
    SkewFixedLines(f64),
    #[error("points on the circle coincide")]
    CoincidentPoints,
    #[error("integrality hypothesis violated: {0}")]
    Integrality(&'static str),
}

fn basis_form(j: usize) -> HermitianForm2 {
    let mut x = [0.0; 4];
    x[j] = 1.0;
    HermitianForm2::from_coords(x)
}

/// Real 4×4 matrix of `H ↦ A†HA` in the coordinates `(x0, x1, x2, x3)`.
pub fn action_on_forms_matrix(a: &CMat2) -> Matrix4<f64> {
    let mut r = Matrix4::zeros();
    for j in 0..4 {
        let image = HermitianForm2::from_matrix(&(a.adjoint() * basis_form(j).matrix() * a));
        for i in 0..4 {
            r[(i, j)] = image.x[i];
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QOperator {
    pub matrix: Matrix4<f64>,
    /// Stacked blocks `R_i − Id`, so that `Q = factorᵀ factor`.
    pub factor: DMatrix<f64>,
    pub generators: usize,
    /// `Σ ‖R_i − Id‖₂²`, an upper bound for the spectrum of `Q`.
    pub scale: f64,
}

pub fn q_operator(rep: &MonodromyRep) -> QOperator {
    q_operator_of(&rep.generators)
}

pub fn q_operator_of(generators: &[CMat2]) -> QOperator {
    let mut q = Matrix4::zeros();
    let mut factor = DMatrix::zeros(4 * generators.len(), 4);
    let mut scale = 0.0;
    for (k, m) in generators.iter().enumerate() {
        let d = action_on_forms_matrix(m) - Matrix4::identity();
        let block = d.transpose() * d;
        scale += SymmetricEigen::new(block).eigenvalues.max();
        q += block;
        factor.view_mut((4 * k, 0), (4, 4)).copy_from(&d);
    }
    // Symmetrise away rounding.
    let matrix = (q + q.transpose()) * 0.5;
    QOperator { matrix, factor, generators: generators.len(), scale }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    /// Spectrum of `Q`, ascending.
    pub eigenvalues: [f64; 4],
    pub det_q: f64,
    pub kernel_dim: usize,
    /// Unit-Frobenius eigenvector of the smallest eigenvalue, sign normalised.
    pub form: Option<HermitianForm2>,
    /// Inertia of the extracted form; only meaningful up to swapping `p, q`.
    pub signature: Option<(usize, usize)>,
    pub degenerate: bool,
    /// Null vector of a degenerate extracted form.
    pub null_vector: Option<CVec2>,
    /// `Q = 0`: every form is flat.
    pub all_flat: bool,
    /// `λ_min(Q) / Σ ‖R_i − Id‖₂²`, in `[0, 1]`.
    pub normalized_margin: f64,
}

impl FlatnessReport {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Extracted form is sign-definite (up to overall sign).
    pub fn is_definite(&self) -> bool {
        matches!(self.signature, Some((2, 0)) | Some((0, 2)))
    }
}

/// Unit Frobenius norm, trace > 0; ties broken by `x1 > 0`, then `x2 > 0`.
pub fn normalize_form(h: &HermitianForm2) -> HermitianForm2 {
    let n = h.frobenius_norm();
    let mut out = if n > 0.0 { h.scaled(1.0 / n) } else { *h };
    let flip = if out.trace().abs() >= 1e-10 {
        out.trace() < 0.0
    } else if out.x[1].abs() >= 1e-10 {
        out.x[1] < 0.0
    } else {
        out.x[2] < 0.0
    };
    if flip {
        out = out.scaled(-1.0);
    }
    out
}

fn ascending_eigen(m: &Matrix4<f64>) -> ([f64; 4], [Vector4<f64>; 4]) {
    let eig = SymmetricEigen::new(*m);
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.map(|i| eig.eigenvalues[i]);
    let vecs = idx.map(|i| eig.eigenvectors.column(i).into_owned());
    (vals, vecs)
}

impl QOperator {
    /// Ascending spectrum of `Q` from the singular values of the factor,
    /// which keeps it non-negative and resolves small eigenvalues to
    /// `ε σ_max` rather than `ε σ_max²`.
    pub fn spectrum(&self) -> ([f64; 4], [Vector4<f64>; 4]) {
        if self.factor.nrows() < 4 {
            return ascending_eigen(&self.matrix);
        }
        let svd = self.factor.clone().svd(false, true);
        let vt = svd.v_t.expect("right singular vectors requested");
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let vals = idx.map(|i| svd.singular_values[i].powi(2));
        let vecs = idx.map(|i| Vector4::new(vt[(i, 0)], vt[(i, 1)], vt[(i, 2)], vt[(i, 3)]));
        (vals, vecs)
    }
}

pub fn flatness_report(q: &QOperator, rel_tol: f64) -> FlatnessReport {
    let (eigenvalues, vectors) = q.spectrum();
    let det_q = eigenvalues.iter().product();
    let threshold = rel_tol * eigenvalues[3].max(1.0);
    let kernel_dim = eigenvalues.iter().filter(|&&l| l < threshold).count();
    let all_flat = kernel_dim == 4;
    let normalized_margin = if q.scale > 0.0 { (eigenvalues[0] / q.scale).max(0.0) } else { 0.0 };
    let mut report = FlatnessReport {
        eigenvalues,
        det_q,
        kernel_dim,
        form: None,
        signature: None,
        degenerate: false,
        null_vector: None,
        all_flat,
        normalized_margin,
    };
    if kernel_dim >= 1 {
        let v = vectors[0];
        let form = normalize_form(&HermitianForm2::from_coords([v[0], v[1], v[2], v[3]]));
        let (p, qn) = form.inertia(SIGNATURE_TOL);
        report.degenerate = form.det().abs() < DEGENERATE_DET_TOL;
        if report.degenerate {
            let (vals, vecs) = linalg::hermitian_eigen(&form.matrix());
            report.null_vector = Some(if vals[0].abs() <= vals[1].abs() { vecs[0] } else { vecs[1] });
        }
        report.form = Some(form);
        report.signature = Some((p, qn));
    }
    report
}

/// Largest `‖M_i† H M_i − H‖_F` over the generators.
pub fn invariance_residual(generators: &[CMat2], h: &HermitianForm2) -> f64 {
    let hm = h.matrix();
    generators.iter().map(|m| (m.adjoint() * hm * m - hm).norm()).fold(0.0, f64::max)
}

/// Signatures agree up to the overall sign of the form.
pub fn same_signature(a: (usize, usize), b: (usize, usize)) -> bool {
    a == b || a == (b.1, b.0)
}

pub const BALANCE_MAX_ITER: usize = 200;
pub const BALANCE_MAX_CONDITION: f64 = 1e8;

/// Generators `G⁻¹ M_i G` in a frame `G` of determinant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedFrame {
    pub frame: CMat2,
    pub generators: Vec<CMat2>,
    pub iterations: usize,
    /// `Σ ‖G⁻¹ M_i G‖_F²`.
    pub cost: f64,
}

fn condition_number(g: &CMat2) -> f64 {
    let (vals, _) = linalg::hermitian_eigen(&(g.adjoint() * g));
    (vals[1] / vals[0]).sqrt()
}

/// Lowers `Σ ‖G⁻¹ M_i G‖_F²` by steepest descent along `G ← G exp(−t μ)`,
/// with `μ = Σ [M_i†, M_i]` the moment map of the conjugation action. The
/// minimiser is a unitary frame whenever the representation is unitary.
pub fn balance_generators(generators: &[CMat2]) -> BalancedFrame {
    let cost = |ms: &[CMat2]| ms.iter().map(|m| m.norm_squared()).sum::<f64>();
    let moment = |ms: &[CMat2]| -> CMat2 { ms.iter().map(|m| m.adjoint() * m - m * m.adjoint()).sum() };
    let mut frame = CMat2::identity();
    let mut current = generators.to_vec();
    let mut f = cost(&current);
    let mut mu = moment(&current);
    let mut iterations = 0;
    let mut last_t = 0.0_f64;
    while iterations < BALANCE_MAX_ITER {
        let gn = mu.norm();
        if gn <= 1e-13 * f.max(1e-300) {
            break;
        }
        let mut t = (0.5 / gn).max(2.0 * last_t).min(10.0 / gn);
        let mut accepted = false;
        while t * gn > 1e-14 {
            let step = linalg::hermitian_apply(&(mu * cr(-t)), f64::exp);
            let step_inv = linalg::hermitian_apply(&(mu * cr(t)), f64::exp);
            // Incremental conjugation keeps round-off independent of the frame's conditioning.
            let cand: Vec<CMat2> = current.iter().map(|m| step_inv * m * step).collect();
            let fc = cost(&cand);
            let mc = moment(&cand);
            // Below round-off in the cost, fall back to decrease of the moment map.
            let decrease = 2e-4 * t * gn * gn;
            let resolved = decrease > 1e-13 * f;
            if (resolved && fc <= f - decrease) || (!resolved && mc.norm() < 0.9 * gn) {
                frame *= step;
                current = cand;
                f = fc;
                mu = mc;
                last_t = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted || condition_number(&frame) > BALANCE_MAX_CONDITION {
            break;
        }
    }
    BalancedFrame { frame, generators: current, iterations, cost: f }
}

/// [`flatness_report`] evaluated in a balanced frame, with the extracted form
/// and null vector mapped back to the original frame. Kernel dimension and
/// signature are conjugation invariant; the balanced frame keeps the
/// spectrum of `Q` from being dominated by the frame's conditioning.
pub fn rep_flatness(generators: &[CMat2], rel_tol: f64) -> FlatnessReport {
    let b = balance_generators(generators);
    let mut report = flatness_report(&q_operator_of(&b.generators), rel_tol);
    let gi = linalg::inverse(&b.frame).expect("frame is invertible");
    if let Some(f) = report.form {
        report.form = Some(normalize_form(&HermitianForm2::from_matrix(&(gi.adjoint() * f.matrix() * gi))));
    }
    if let Some(v) = report.null_vector {
        let w = b.frame * v;
        report.null_vector = Some(w / cr(w.norm()));
    }
    report
}

/// Unit eigenvalues and normals `n_k ⊥ E_k` of a diagonalizable matrix.
fn unit_spectrum(m: &CMat2, name: &'static str) -> Result<([Complex64; 2], [CVec2; 2]), FlatFormError> {
    let eig = linalg::eigen(m);
    let [l1, l2] = eig.values;
    if eig.defective
        || (l1.norm() - 1.0).abs() > EIGEN_SEPARATION_TOL.sqrt()
        || (l2.norm() - 1.0).abs() > EIGEN_SEPARATION_TOL.sqrt()
        || (l1 - l2).norm() <= EIGEN_SEPARATION_TOL
    {
        return Err(FlatFormError::BadGenerator(name));
    }
    let normal = |u: &CVec2| CVec2::new(-u[1].conj(), u[0].conj());
    Ok((eig.values, [normal(&eig.vectors[0]), normal(&eig.vectors[1])]))
}

fn projector_coords(n: &CVec2) -> Vector4<f64> {
    let h = HermitianForm2::from_matrix(&(n * n.adjoint() / Complex64::new(n.norm_squared(), 0.0)));
    Vector4::from(h.x)
}

/// The form invariant under a pair `R, S` of elliptic elements whose eigenvalue
/// pairs are disjoint and with `RS⁻¹` fixing a vector: the intersection point
/// of the lines `Fix(R)` and `Fix(S)` in the projectivised space of forms.
pub fn invariant_form_of_pair(r: &CMat2, s: &CMat2) -> Result<HermitianForm2, FlatFormError> {
    let (rv, rn) = unit_spectrum(r, "R")?;
    let (sv, sn) = unit_spectrum(s, "S")?;
    for a in rv {
        for b in sv {
            if (a - b).norm() <= EIGEN_SEPARATION_TOL {
                return Err(FlatFormError::SharedEigenvalue);
            }
        }
    }
    let s_inv = linalg::inverse(s).ok_or(FlatFormError::BadGenerator("S"))?;
    let ev = linalg::eigen(&(r * s_inv)).values;
    let gap = ev.iter().map(|l| (l - 1.0).norm()).fold(f64::INFINITY, f64::min);
    if gap > COMMON_EIGENVALUE_TOL {
        return Err(FlatFormError::NoCommonFixedVector(gap));
    }
    let cols = [projector_coords(&rn[0]), projector_coords(&rn[1]), -projector_coords(&sn[0]), -projector_coords(&sn[1])];
    let m = Matrix4::from_columns(&cols);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let (k, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .unwrap();
    let smax = svd.singular_values.max();
    let coeff = vt.row(k).transpose();
    // A second near-zero singular value would mean the fixed lines coincide.
    let second = svd.singular_values.iter().filter(|&&x| x <= 1e-7 * smax.max(1.0)).count();
    if smin > 1e-7 * smax.max(1.0) || second > 1 {
        return Err(FlatFormError::SkewFixedLines(smin));
    }
    let x = cols[0] * coeff[0] + cols[1] * coeff[1];
    Ok(normalize_form(&HermitianForm2::from_coords([x[0], x[1], x[2], x[3]])))
}

/// Whether the pairs `{r1, r2}` and `{s1, s2}` separate each other on the unit circle.
pub fn interlace(r1: Complex64, r2: Complex64, s1: Complex64, s2: Complex64) -> Result<bool, FlatFormError> {
    let pts = [r1, r2, s1, s2];
    for i in 0..4 {
        for j in 0..i {
            if (pts[i] / pts[i].norm() - pts[j] / pts[j].norm()).norm() <= EIGEN_SEPARATION_TOL {
                return Err(FlatFormError::CoincidentPoints);
            }
        }
    }
    let angle = |z: Complex64| {
        let a = (z / r1).arg();
        if a < 0.0 {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    };
    let end = angle(r2);
    let inside = |z: Complex64| angle(z) < end;
    Ok(inside(s1) != inside(s2))
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    x - x.floor()
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-9
}

/// Positive index `p` of the invariant form of the three-line connection,
/// `p = ⌊Σ {b_i}⌋`.
pub fn signature_formula(b1: f64, b2: f64, b3: f64) -> Result<usize, FlatFormError> {
    if [b1, b2, b3].iter().any(|&b| near_integer(b)) {
        return Err(FlatFormError::Integrality("some b_i is an integer"));
    }
    if near_integer(b1 + b2 + b3) {
        return Err(FlatFormError::Integrality("b_1 + b_2 + b_3 is an integer"));
    }
    Ok((frac(b1) + frac(b2) + frac(b3)).floor() as usize)
}

/// Boundary points `r1, r2, s1, s2` with arguments (in turns) `−Σb, −b1, 0, −(b1+b3)`,
/// the spectra of the pair built from three-line generators.
pub fn three_line_circle_points(b: [f64; 3]) -> [Complex64; 4] {
    let turn = |t: f64| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t);
    [turn(b[0] + b[1] + b[2]), turn(b[0]), turn(0.0), turn(b[0] + b[2])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::{b_parameters, dihedral_connection, three_line_connection};
    use crate::linalg::{c, rmat};
    use crate::monodromy::monodromy_rep;
    use std::f64::consts::PI;

    #[test]
    fn balancing_restores_unitary_frame() {
        let rep = monodromy_rep(&dihedral_connection(0.3)).unwrap();
        let g = rmat(40.0, 3.0, 0.0, 0.025) * c(1.0, 0.4);
        let bad = rep.conjugated(&g).unwrap();
        let b = balance_generators(&bad.generators);
        for m in &b.generators {
            assert!((m.adjoint() * m - CMat2::identity()).norm() < 1e-8, "{} after {} steps", (m.adjoint() * m - CMat2::identity()).norm(), b.iterations);
        }
        assert!((linalg::det(&b.frame) - 1.0).norm() < 1e-10);
        let r = rep_flatness(&bad.generators, KERNEL_REL_TOL);
        assert_eq!(r.kernel_dim, 1);
        assert!(r.is_definite());
    }

    #[test]
    fn conjugation_covariance_of_extracted_form() {
        let rep = monodromy_rep(&three_line_connection(cr(0.3), cr(0.45), cr(-0.6))).unwrap();
        let h = rep_flatness(&rep.generators, KERNEL_REL_TOL).form.unwrap();
        let g = linalg::mat(c(1.2, 0.3), c(-0.4, 0.9), c(0.2, 0.0), c(0.7, -0.5));
        let conj = rep.conjugated(&g).unwrap();
        let h2 = rep_flatness(&conj.generators, KERNEL_REL_TOL).form.unwrap();
        let expected = normalize_form(&HermitianForm2::from_matrix(&(g.adjoint() * h.matrix() * g)));
        for k in 0..4 {
            assert!((h2.x[k] - expected.x[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn factor_spectrum_matches_matrix() {
        let rep = monodromy_rep(&three_line_connection(cr(0.3), cr(0.45), cr(-0.6))).unwrap();
        let q = q_operator(&rep);
        let (vals, _) = q.spectrum();
        let (direct, _) = ascending_eigen(&q.matrix);
        for k in 0..4 {
            assert!((vals[k] - direct[k]).abs() < 1e-9 * direct[3]);
        }
        assert!(vals[0] >= 0.0);
    }

    fn turn(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * t)
    }

    #[test]
    fn action_matrix_examples() {
        assert_eq!(action_on_forms_matrix(&CMat2::identity()), Matrix4::identity());
        let th = 0.4;
        let a = linalg::mat(Complex64::from_polar(1.0, th), cr(0.0), cr(0.0), Complex64::from_polar(1.0, -th));
        let r = action_on_forms_matrix(&a);
        let (cs, sn) = ((2.0 * th).cos(), (2.0 * th).sin());
        let expect = Matrix4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, cs, -sn, 0.0, 0.0, sn, cs);
        assert!((r - expect).norm() < 1e-15 || (r - expect.transpose()).norm() < 1e-15);
        let a = linalg::mat(c(0.3, 1.0), c(-0.2, 0.5), c(1.1, 0.0), c(0.4, -0.6));
        let h = HermitianForm2::from_coords([0.7, -0.1, 0.3, 1.2]);
        let direct = HermitianForm2::from_matrix(&(a.adjoint() * h.matrix() * a));
        let via = action_on_forms_matrix(&a) * Vector4::from(h.x);
        assert!((0..4).all(|k| (via[k] - direct.x[k]).abs() < 1e-14));
    }

    #[test]
    fn diagonal_scaling_action_mixes_x0_x1() {
        let r = action_on_forms_matrix(&rmat(2.0, 0.0, 0.0, 0.5));
        // r = 4(x0 − x1), s = (x0 + x1)/4.
        assert!((r[(0, 0)] - 17.0 / 8.0).abs() < 1e-15 && (r[(0, 1)] + 15.0 / 8.0).abs() < 1e-15);
        assert!((r[(2, 2)] - 1.0).abs() < 1e-15 && (r[(3, 3)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_rep_has_all_forms_flat() {
        let q = q_operator_of(&[CMat2::identity(); 3]);
        assert_eq!(q.matrix, Matrix4::zeros());
        let rep = flatness_report(&q, KERNEL_REL_TOL);
        assert_eq!(rep.kernel_dim, 4);
        assert!(rep.all_flat);
    }

    #[test]
    fn three_line_kernel_and_signature() {
        let third = cr(1.0 / 3.0);
        let rep = monodromy_rep(&three_line_connection(third, third, third)).unwrap();
        let report = flatness_report(&q_operator(&rep), KERNEL_REL_TOL);
        assert_eq!(report.kernel_dim, 1);
        // b = (1/6, 1/6, 1/6): p = 0, definite.
        assert!(report.is_definite());

        let rep = monodromy_rep(&three_line_connection(cr(0.5), cr(0.5), cr(0.5))).unwrap();
        let report = flatness_report(&q_operator(&rep), KERNEL_REL_TOL);
        assert_eq!(report.kernel_dim, 1);
        assert!(report.is_definite());
        let b = b_parameters(0.5, 0.5, 0.5);
        assert_eq!(signature_formula(b[0], b[1], b[2]).unwrap(), 0);
    }

    #[test]
    fn dihedral_indefinite_window() {
        let rep = monodromy_rep(&dihedral_connection(0.7)).unwrap();
        let report = flatness_report(&q_operator(&rep), KERNEL_REL_TOL);
        assert_eq!(report.kernel_dim, 1);
        assert_eq!(report.signature, Some((1, 1)));
    }

    #[test]
    fn pair_form_matches_q_kernel() {
        let (a1, a2, a3) = (0.3, 0.45, 0.6);
        let rep = monodromy_rep(&three_line_connection(cr(a1), cr(a2), cr(a3))).unwrap();
        let phase = (c(0.0, -2.0 * PI) * rep.c).exp();
        let r = rep.generators[0] * phase;
        let s = linalg::inverse(&rep.generators[1]).unwrap();
        let h = invariant_form_of_pair(&r, &s).unwrap();
        assert!(invariance_residual(&rep.generators, &h) < 1e-8);
        let kernel = flatness_report(&q_operator(&rep), KERNEL_REL_TOL).form.unwrap();
        assert!((0..4).all(|k| (kernel.x[k] - h.x[k]).abs() < 1e-7));
    }

    #[test]
    fn pair_form_of_normal_forms_is_definite_when_interlaced() {
        let (r1, r2, s1, s2) = (turn(0.0), turn(0.5), turn(0.25), turn(0.75));
        let r = linalg::mat(cr(0.0), -r1 * r2, cr(1.0), r1 + r2);
        let s = linalg::mat(cr(0.0), -s1 * s2, cr(1.0), s1 + s2);
        let h = invariant_form_of_pair(&r, &s).unwrap();
        assert!(h.is_positive_definite());
        assert!(interlace(r1, r2, s1, s2).unwrap());
        let (s1, s2) = (turn(0.1), turn(0.2));
        let s = linalg::mat(cr(0.0), -s1 * s2, cr(1.0), s1 + s2);
        let h = invariant_form_of_pair(&r, &s).unwrap();
        assert_eq!(h.inertia(SIGNATURE_TOL), (1, 1));
        assert!(!interlace(r1, r2, s1, s2).unwrap());
    }

    #[test]
    fn unitary_pair_keeps_identity() {
        let r = linalg::mat(turn(0.1), cr(0.0), cr(0.0), turn(0.6));
        let th = 0.9_f64;
        let u = rmat(th.cos(), -th.sin(), th.sin(), th.cos());
        let s = u * linalg::mat(turn(0.3), cr(0.0), cr(0.0), turn(0.8)) * u.adjoint();
        // Common eigenvalue 1 of R S⁻¹ need not exist for an arbitrary unitary pair.
        match invariant_form_of_pair(&r, &s) {
            Ok(h) => assert!((h.matrix() - CMat2::identity() * cr(h.x[0])).norm() < 1e-8),
            Err(e) => assert!(matches!(e, FlatFormError::NoCommonFixedVector(_))),
        }
    }

    #[test]
    fn interlace_examples() {
        assert!(interlace(turn(0.0), turn(0.5), turn(0.25), turn(0.75)).unwrap());
        assert!(!interlace(turn(0.0), turn(0.1), turn(0.5), turn(0.6)).unwrap());
        let [r1, r2, s1, s2] = three_line_circle_points([0.3, 0.3, 0.3]);
        assert!(interlace(r1, r2, s1, s2).unwrap());
        assert!(interlace(turn(0.0), turn(0.0), turn(0.2), turn(0.3)).is_err());
    }

    #[test]
    fn signature_formula_examples() {
        assert_eq!(signature_formula(0.25, 0.25, 0.25).unwrap(), 0);
        assert_eq!(signature_formula(0.9, 0.9, 0.9).unwrap(), 2);
        assert_eq!(signature_formula(0.5, 0.25, 0.5).unwrap(), 1);
        assert!(signature_formula(1.0, 0.2, 0.3).is_err());
        assert!(signature_formula(0.5, 0.2, 0.3).is_err());
    }

    #[test]
    fn normalisation_tie_breaks() {
        let h = normalize_form(&HermitianForm2::from_coords([-2.0, 0.0, 0.0, 0.0]));
        assert!(h.trace() > 0.0 && (h.frobenius_norm() - 1.0).abs() < 1e-15);
        let h = normalize_form(&HermitianForm2::from_coords([0.0, -1.0, 0.0, 0.0]));
        assert!(h.x[1] > 0.0);
        let h = normalize_form(&HermitianForm2::from_coords([0.0, 0.0, -3.0, 1.0]));
        assert!(h.x[2] > 0.0);
    }
}

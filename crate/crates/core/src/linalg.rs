//! Closed-form helpers for 2×2 complex matrices.
//!
//! Everything in this crate lives in dimension two, so eigen-decompositions are
//! done by hand from the characteristic polynomial instead of going through a
//! general dense solver.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

pub type CMat2 = Matrix2<Complex64>;
pub type CVec2 = Vector2<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity() -> CMat2 {
    CMat2::identity()
}

pub fn mat(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMat2 {
    CMat2::new(a, b, c, d)
}

/// Real-entry convenience constructor, row major.
pub fn rmat(a: f64, b: f64, c: f64, d: f64) -> CMat2 {
    CMat2::new(cr(a), cr(b), cr(c), cr(d))
}

pub fn det(m: &CMat2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

pub fn trace(m: &CMat2) -> Complex64 {
    m[(0, 0)] + m[(1, 1)]
}

/// Inverse via the adjugate; `None` when `|det| <= tol` relative to the entries.
pub fn inverse(m: &CMat2) -> Option<CMat2> {
    let d = det(m);
    let scale = m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    if d.norm() <= 1e-300_f64.max(1e-15 * scale * scale) {
        return None;
    }
    Some(mat(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / d)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `|v ∧ w| / (|v||w|)`: zero iff the two vectors are parallel.
pub fn wedge_ratio(v: &CVec2, w: &CVec2) -> f64 {
    let nv = v.norm();
    let nw = w.norm();
    if nv == 0.0 || nw == 0.0 {
        return 0.0;
    }
    (v[0] * w[1] - v[1] * w[0]).norm() / (nv * nw)
}

/// Eigenvalues and unit eigenvectors of a general complex 2×2 matrix.
///
/// When the two eigenvalues coincide the matrix may be defective; the second
/// returned vector is then a generalized eigenvector (orthogonal complement of
/// the first). `defective` reports that case.
#[derive(Debug, Clone)]
pub struct Eigen2 {
    pub values: [Complex64; 2],
    pub vectors: [CVec2; 2],
    pub defective: bool,
}

pub fn eigen(m: &CMat2) -> Eigen2 {
    let tr = trace(m);
    let dt = det(m);
    let half = tr / 2.0;
    let disc = (half * half - dt).sqrt();
    // Pick the root of larger modulus first so the other one can be recovered
    // from the determinant without cancellation.
    let (l1, l2) = {
        let p = half + disc;
        let q = half - disc;
        let (big, small) = if p.norm() >= q.norm() { (p, q) } else { (q, p) };
        let small = if big.norm() > 0.0 { dt / big } else { small };
        (big, small)
    };
    let scale = max_abs(m).max(1e-300);
    let v1 = eigvec(m, l1);
    let split = (l1 - l2).norm() > 1e-9 * scale;
    let (v2, defective) = if split {
        (eigvec(m, l2), false)
    } else {
        // Repeated eigenvalue: diagonalizable iff m is scalar.
        let scalar = max_abs(&(m - CMat2::identity() * l1)) <= 1e-9 * scale;
        let orth = CVec2::new(-v1[1].conj(), v1[0].conj());
        (orth, !scalar)
    };
    Eigen2 { values: [l1, l2], vectors: [v1, v2], defective }
}

fn eigvec(m: &CMat2, lam: Complex64) -> CVec2 {
    // Rows of (m - lam) annihilate the eigenvector; take the better conditioned one.
    let a = m[(0, 0)] - lam;
    let b = m[(0, 1)];
    let cc = m[(1, 0)];
    let d = m[(1, 1)] - lam;
    let c1 = CVec2::new(b, -a);
    let c2 = CVec2::new(-d, cc);
    let v = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let n = v.norm();
    if n == 0.0 {
        CVec2::new(ONE, ZERO)
    } else {
        v / cr(n)
    }
}

/// Eigen-decomposition of a Hermitian 2×2 matrix: ascending real eigenvalues
/// and orthonormal eigenvectors.
pub fn hermitian_eigen(h: &CMat2) -> ([f64; 2], [CVec2; 2]) {
    let r = h[(0, 0)].re;
    let s = h[(1, 1)].re;
    let t = h[(0, 1)];
    let mean = 0.5 * (r + s);
    let half_diff = 0.5 * (r - s);
    let rad = half_diff.hypot(t.norm());
    let lo = mean - rad;
    let hi = mean + rad;
    if t.norm() <= 1e-300 {
        let e0 = CVec2::new(ONE, ZERO);
        let e1 = CVec2::new(ZERO, ONE);
        return if r <= s { ([r, s], [e0, e1]) } else { ([s, r], [e1, e0]) };
    }
    // (h - hi) v = 0 with v = (t, hi - r), normalised.
    let v_hi = {
        let v = CVec2::new(t, cr(hi - r));
        let alt = CVec2::new(cr(hi - s), t.conj());
        let v = if v.norm() >= alt.norm() { v } else { alt };
        v / cr(v.norm())
    };
    let v_lo = CVec2::new(-v_hi[1].conj(), v_hi[0].conj());
    ([lo, hi], [v_lo, v_hi])
}

/// Function of a Hermitian matrix through its spectral decomposition.
pub fn hermitian_apply(h: &CMat2, f: impl Fn(f64) -> f64) -> CMat2 {
    let (vals, vecs) = hermitian_eigen(h);
    let mut out = CMat2::zeros();
    for k in 0..2 {
        out += vecs[k] * vecs[k].adjoint() * cr(f(vals[k]));
    }
    out
}

/// Positive square root of a positive definite Hermitian matrix.
pub fn hermitian_sqrt(h: &CMat2) -> CMat2 {
    hermitian_apply(h, |x| x.max(0.0).sqrt())
}

/// Hermitian part residual `‖m − m†‖_F`.
pub fn hermiticity_residual(m: &CMat2) -> f64 {
    (m - m.adjoint()).norm()
}

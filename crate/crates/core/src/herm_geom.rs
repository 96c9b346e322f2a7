//! Hermitian 2×2 matrices as points of R^{1,3}, hyperbolic 3-space in the
//! hyperboloid and ball models, Busemann functions and the line-to-sphere map.
//!
//! A Hermitian matrix `((r, t), (t̄, s))` is stored through the linear
//! coordinates `r = x0 − x1`, `s = x0 + x1`, `−t = x2 + i x3`, so that
//! `det = x0² − x1² − x2² − x3²`. The unit-determinant positive matrices form
//! the hyperboloid model of H³; the ball model is reached by stereographic
//! projection from `(−1, 0, 0, 0)`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, c, cr, CMat2, CVec2, ONE, ZERO};

/// Radius guard for points of the open unit ball.
pub const BALL_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("hermitian form is not positive definite (eigenvalues {0:e}, {1:e})")]
    NotPositiveDefinite(f64, f64),
    #[error("point of norm {0} lies outside the open unit ball")]
    OutsideBall(f64),
    #[error("matrix is singular")]
    Singular,
}

/// A point of the Riemann sphere `C ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub fn finite(re: f64, im: f64) -> Self {
        ExtComplex::Finite(c(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    /// Homogeneous coordinates `(p : q)` with `z = p / q`.
    pub fn homogeneous(&self) -> CVec2 {
        match *self {
            ExtComplex::Finite(z) => CVec2::new(z, ONE),
            ExtComplex::Infinity => CVec2::new(ONE, ZERO),
        }
    }

    /// Back from homogeneous coordinates; `(p : 0)` is infinity.
    pub fn from_homogeneous(v: &CVec2) -> Self {
        let scale = v[0].norm().max(v[1].norm());
        if v[1].norm() <= 1e-300_f64.max(1e-15 * scale) {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(v[0] / v[1])
        }
    }

    /// Chordal distance on the unit-diameter Riemann sphere.
    pub fn chordal_distance(&self, other: &ExtComplex) -> f64 {
        let a = self.homogeneous();
        let b = other.homogeneous();
        let cross = (a[0] * b[1] - a[1] * b[0]).norm();
        cross / (a.norm() * b.norm())
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        ExtComplex::Finite(z)
    }
}

/// A complex line through the origin of C², `C·(λ, 1)` or `C·(1, 0)` at λ = ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjLine {
    pub slope: ExtComplex,
}

impl ProjLine {
    pub fn slope(z: Complex64) -> Self {
        ProjLine { slope: ExtComplex::Finite(z) }
    }

    pub fn real(x: f64) -> Self {
        Self::slope(cr(x))
    }

    pub fn infinity() -> Self {
        ProjLine { slope: ExtComplex::Infinity }
    }

    /// Spanning vector `(λ, 1)`, or `(1, 0)` for the line at infinity.
    pub fn spanning_vector(&self) -> CVec2 {
        self.slope.homogeneous()
    }

    /// Coefficients `(p, q)` of a defining linear form `ℓ(z, w) = p z + q w`:
    /// `z − λ w` for finite slope and `w` at infinity.
    pub fn defining_form(&self) -> CVec2 {
        match self.slope {
            ExtComplex::Finite(l) => CVec2::new(ONE, -l),
            ExtComplex::Infinity => CVec2::new(ZERO, ONE),
        }
    }

    /// Evaluates the defining linear form at `x`.
    pub fn eval_form(&self, x: &CVec2) -> Complex64 {
        let f = self.defining_form();
        f[0] * x[0] + f[1] * x[1]
    }

    /// The line spanned by a vector.
    pub fn through(v: &CVec2) -> Self {
        ProjLine { slope: ExtComplex::from_homogeneous(v) }
    }

    /// Image under the linear map `g`.
    pub fn transformed(&self, g: &CMat2) -> Self {
        Self::through(&(g * self.spanning_vector()))
    }
}

/// A unit vector of R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint(pub [f64; 3]);

impl SpherePoint {
    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }
}

/// 2×2 Hermitian matrix in the coordinates `(x0, x1, x2, x3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianForm2 {
    pub x: [f64; 4],
}

impl HermitianForm2 {
    pub fn from_coords(x: [f64; 4]) -> Self {
        HermitianForm2 { x }
    }

    pub fn identity() -> Self {
        HermitianForm2 { x: [1.0, 0.0, 0.0, 0.0] }
    }

    /// Reads the coordinates of the Hermitian part of `m`.
    pub fn from_matrix(m: &CMat2) -> Self {
        let r = m[(0, 0)].re;
        let s = m[(1, 1)].re;
        let t = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
        HermitianForm2 { x: [0.5 * (r + s), 0.5 * (s - r), -t.re, -t.im] }
    }

    pub fn matrix(&self) -> CMat2 {
        let [x0, x1, x2, x3] = self.x;
        let t = c(-x2, -x3);
        linalg::mat(cr(x0 - x1), t, t.conj(), cr(x0 + x1))
    }

    /// Lorentzian quadratic form, equal to the matrix determinant.
    pub fn det(&self) -> f64 {
        let [x0, x1, x2, x3] = self.x;
        x0 * x0 - x1 * x1 - x2 * x2 - x3 * x3
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.x[0]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let [x0, x1, x2, x3] = self.x;
        let rad = (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
        [x0 - rad, x0 + rad]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues()[0] > 0.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix().norm()
    }

    pub fn scaled(&self, t: f64) -> Self {
        HermitianForm2 { x: self.x.map(|v| v * t) }
    }

    /// Rescales a positive definite form onto the hyperboloid `det = 1`.
    pub fn to_h3(&self) -> Result<Self, GeomError> {
        let [lo, hi] = self.eigenvalues();
        if lo <= 0.0 {
            return Err(GeomError::NotPositiveDefinite(lo, hi));
        }
        Ok(self.scaled(1.0 / self.det().sqrt()))
    }

    /// `h(v, w) = w† H v`.
    pub fn pairing(&self, v: &CVec2, w: &CVec2) -> Complex64 {
        (w.adjoint() * self.matrix() * v)[(0, 0)]
    }

    pub fn norm_sq(&self, v: &CVec2) -> f64 {
        self.pairing(v, v).re
    }

    /// Inertia `(p, q)` with eigenvalues of modulus `<= tol` counted as null.
    pub fn inertia(&self, tol: f64) -> (usize, usize) {
        let ev = self.eigenvalues();
        let p = ev.iter().filter(|&&l| l > tol).count();
        let q = ev.iter().filter(|&&l| l < -tol).count();
        (p, q)
    }

    /// Hyperbolic distance between two points of the hyperboloid.
    pub fn hyperbolic_distance(&self, other: &Self) -> f64 {
        let [a0, a1, a2, a3] = self.x;
        let [b0, b1, b2, b3] = other.x;
        let inner = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
        inner.max(1.0).acosh()
    }
}

/// Stereographic image of a line: `(|λ|² − 1, 2 Re λ, 2 Im λ) / (1 + |λ|²)`.
pub fn line_to_sphere(line: &ProjLine) -> SpherePoint {
    match line.slope {
        ExtComplex::Infinity => SpherePoint([1.0, 0.0, 0.0]),
        ExtComplex::Finite(l) => {
            let n2 = l.norm_sqr();
            let d = 1.0 + n2;
            SpherePoint([(n2 - 1.0) / d, 2.0 * l.re / d, 2.0 * l.im / d])
        }
    }
}

/// [`line_to_sphere`] of the line spanned by `v`, computed without forming the slope.
pub fn vector_to_sphere(v: &CVec2) -> SpherePoint {
    let p = v[0];
    let q = v[1];
    let np = p.norm_sqr();
    let nq = q.norm_sqr();
    let d = np + nq;
    let m = p * q.conj();
    SpherePoint([(np - nq) / d, 2.0 * m.re / d, 2.0 * m.im / d])
}

/// Inverse stereographic map `S² → CP¹`.
pub fn sphere_to_line(p: &SpherePoint) -> ProjLine {
    let [u0, u1, u2] = p.0;
    if (1.0 - u0).abs() < 1e-15 {
        return ProjLine::infinity();
    }
    // λ = (u1 + i u2) / (1 − u0)
    ProjLine::slope(c(u1, u2) / (1.0 - u0))
}

/// The projection with kernel `line`, self-adjoint for `⟨·,·⟩_H`:
/// `P = Id − v (v† H) / (v† H v)` for `v` spanning the line.
pub fn projection_matrix(line: &ProjLine, h: &HermitianForm2) -> Result<CMat2, GeomError> {
    let [lo, hi] = h.eigenvalues();
    if lo <= 0.0 {
        return Err(GeomError::NotPositiveDefinite(lo, hi));
    }
    let hm = h.matrix();
    let v = line.spanning_vector();
    let row = v.adjoint() * hm;
    let denom = (row * v)[(0, 0)];
    Ok(CMat2::identity() - v * row / denom)
}

fn check_ball(y: &Vector3<f64>) -> Result<f64, GeomError> {
    let n = y.norm();
    if n >= 1.0 - BALL_GUARD {
        Err(GeomError::OutsideBall(n))
    } else {
        Ok(n)
    }
}

/// Busemann function of `x ∈ S²` in the ball model, normalised to vanish at
/// the centre: `−log((1 − ‖y‖²) / ‖x − y‖²)`.
pub fn busemann(x: &SpherePoint, y: &Vector3<f64>) -> Result<f64, GeomError> {
    let n = check_ball(y)?;
    let d2 = (x.vector() - y).norm_squared();
    Ok(-((1.0 - n * n) / d2).ln())
}

/// Euclidean gradient of [`busemann`] in ball coordinates.
pub fn busemann_gradient(x: &SpherePoint, y: &Vector3<f64>) -> Vector3<f64> {
    let r2 = y.norm_squared();
    let d = y - x.vector();
    y * (2.0 / (1.0 - r2)) + d * (2.0 / d.norm_squared())
}

/// Euclidean Hessian of [`busemann`] in ball coordinates.
pub fn busemann_hessian(x: &SpherePoint, y: &Vector3<f64>) -> Matrix3<f64> {
    let r2 = y.norm_squared();
    let d = y - x.vector();
    let d2 = d.norm_squared();
    let id = Matrix3::identity();
    id * (2.0 / (1.0 - r2)) + y * y.transpose() * (4.0 / ((1.0 - r2) * (1.0 - r2))) + id * (2.0 / d2)
        - d * d.transpose() * (4.0 / (d2 * d2))
}

/// Right action of `GL(2, C)` on Hermitian forms: `H ↦ A† H A`.
pub fn moebius_on_forms(a: &CMat2, h: &HermitianForm2) -> Result<HermitianForm2, GeomError> {
    if linalg::inverse(a).is_none() {
        return Err(GeomError::Singular);
    }
    Ok(HermitianForm2::from_matrix(&(a.adjoint() * h.matrix() * a)))
}

/// Ball model → hyperboloid: `x0 = (1 + ‖y‖²)/(1 − ‖y‖²)`, `x⃗ = 2y/(1 − ‖y‖²)`.
pub fn ball_to_hyperboloid(y: &Vector3<f64>) -> Result<HermitianForm2, GeomError> {
    let n = check_ball(y)?;
    let d = 1.0 - n * n;
    Ok(HermitianForm2 { x: [(1.0 + n * n) / d, 2.0 * y[0] / d, 2.0 * y[1] / d, 2.0 * y[2] / d] })
}

/// Hyperboloid → ball, after rescaling a positive form to `det = 1`.
pub fn hyperboloid_to_ball(h: &HermitianForm2) -> Result<Vector3<f64>, GeomError> {
    let h = h.to_h3()?;
    let [x0, x1, x2, x3] = h.x;
    Ok(Vector3::new(x1, x2, x3) / (1.0 + x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rmat;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sphere_images_of_special_slopes() {
        assert_eq!(line_to_sphere(&ProjLine::real(0.0)).0, [-1.0, 0.0, 0.0]);
        assert_eq!(line_to_sphere(&ProjLine::infinity()).0, [1.0, 0.0, 0.0]);
        let p = line_to_sphere(&ProjLine::real(1.0)).0;
        assert!(close(p[0], 0.0, 1e-15) && close(p[1], 1.0, 1e-15) && close(p[2], 0.0, 1e-15));
    }

    #[test]
    fn sphere_inverse_round_trip() {
        for l in [c(0.3, -2.0), c(-1.0, 0.0), c(5.0, 7.0)] {
            let back = sphere_to_line(&line_to_sphere(&ProjLine::slope(l)));
            match back.slope {
                ExtComplex::Finite(z) => assert!((z - l).norm() < 1e-12),
                ExtComplex::Infinity => panic!(),
            }
        }
        assert!(sphere_to_line(&SpherePoint([1.0, 0.0, 0.0])).slope.is_infinite());
    }

    #[test]
    fn projection_matrices_for_identity_metric() {
        let id = HermitianForm2::identity();
        let p0 = projection_matrix(&ProjLine::real(0.0), &id).unwrap();
        assert!((p0 - rmat(1.0, 0.0, 0.0, 0.0)).norm() < 1e-15);
        let p1 = projection_matrix(&ProjLine::real(1.0), &id).unwrap();
        assert!((p1 - rmat(0.5, -0.5, -0.5, 0.5)).norm() < 1e-15);
        // Unit vector (i, 1)/√2 gives ½((1, −i), (i, 1)).
        let pi = projection_matrix(&ProjLine::slope(c(0.0, 1.0)), &id).unwrap();
        let expected = linalg::mat(cr(0.5), c(0.0, -0.5), c(0.0, 0.5), cr(0.5));
        assert!((pi - expected).norm() < 1e-15);
        assert!((pi * ProjLine::slope(c(0.0, 1.0)).spanning_vector()).norm() < 1e-15);
    }

    #[test]
    fn projection_rejects_indefinite_metric() {
        let h = HermitianForm2::from_coords([0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            projection_matrix(&ProjLine::real(2.0), &h),
            Err(GeomError::NotPositiveDefinite(..))
        ));
    }

    #[test]
    fn busemann_values() {
        let x = SpherePoint([1.0, 0.0, 0.0]);
        assert_eq!(busemann(&x, &Vector3::zeros()).unwrap(), 0.0);
        let v = busemann(&x, &Vector3::new(0.5, 0.0, 0.0)).unwrap();
        assert!(close(v, -(3.0_f64).ln(), 1e-14));
        let v = busemann(&x, &Vector3::new(-0.5, 0.0, 0.0)).unwrap();
        assert!(close(v, (3.0_f64).ln(), 1e-14));
        assert!(matches!(busemann(&x, &Vector3::new(1.0, 0.0, 0.0)), Err(GeomError::OutsideBall(_))));
        assert!(busemann(&x, &Vector3::new(0.0, 1.0 - 1e-10, 0.0)).is_err());
    }

    #[test]
    fn busemann_gradient_matches_finite_differences() {
        let x = SpherePoint([0.0, 0.6, 0.8]);
        let y = Vector3::new(0.2, -0.1, 0.3);
        let g = busemann_gradient(&x, &y);
        let hs = busemann_hessian(&x, &y);
        let h = 1e-6;
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = h;
            let fd = (busemann(&x, &(y + e)).unwrap() - busemann(&x, &(y - e)).unwrap()) / (2.0 * h);
            assert!(close(fd, g[k], 1e-8));
            let gd = (busemann_gradient(&x, &(y + e)) - busemann_gradient(&x, &(y - e))) / (2.0 * h);
            for j in 0..3 {
                assert!(close(gd[j], hs[(j, k)], 1e-6));
            }
        }
    }

    #[test]
    fn busemann_equals_log_norm_under_hyperboloid_chart() {
        // b_L(y) = log(v† H(y) v) for unit v spanning L.
        let y = Vector3::new(0.3, -0.2, 0.4);
        let h = ball_to_hyperboloid(&y).unwrap();
        for l in [ProjLine::real(0.0), ProjLine::infinity(), ProjLine::slope(c(0.7, -1.3))] {
            let v = l.spanning_vector();
            let v = v / cr(v.norm());
            let lhs = busemann(&line_to_sphere(&l), &y).unwrap();
            assert!(close(lhs, h.norm_sq(&v).ln(), 1e-13));
        }
    }

    #[test]
    fn moebius_action_examples() {
        let h = HermitianForm2::from_coords([2.0, 0.3, -0.4, 0.1]);
        let same = moebius_on_forms(&CMat2::identity(), &h).unwrap();
        assert!((same.matrix() - h.matrix()).norm() < 1e-15);
        let a = rmat(2.0, 0.0, 0.0, 0.5);
        let out = moebius_on_forms(&a, &HermitianForm2::identity()).unwrap();
        assert!((out.matrix() - rmat(4.0, 0.0, 0.0, 0.25)).norm() < 1e-15);
        let theta = 0.7_f64;
        let u = linalg::mat(c(theta.cos(), 0.0), c(-theta.sin(), 0.0), c(theta.sin(), 0.0), c(theta.cos(), 0.0));
        let out = moebius_on_forms(&u, &HermitianForm2::identity()).unwrap();
        assert!((out.matrix() - CMat2::identity()).norm() < 1e-15);
        assert_eq!(moebius_on_forms(&rmat(1.0, 2.0, 2.0, 4.0), &h), Err(GeomError::Singular));
    }

    #[test]
    fn ball_chart_examples() {
        let h = ball_to_hyperboloid(&Vector3::zeros()).unwrap();
        assert_eq!(h, HermitianForm2::identity());
        let h = ball_to_hyperboloid(&Vector3::new(0.5, 0.0, 0.0)).unwrap();
        assert!(close(h.x[0], 5.0 / 3.0, 1e-15) && close(h.x[1], 4.0 / 3.0, 1e-15));
        assert!((h.matrix() - rmat(1.0 / 3.0, 0.0, 0.0, 3.0)).norm() < 1e-14);
        assert!(ball_to_hyperboloid(&Vector3::new(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn hermitian_coordinates_reconstruct() {
        let h = HermitianForm2::from_coords([1.5, -0.2, 0.7, 0.4]);
        let m = h.matrix();
        assert!(linalg::hermiticity_residual(&m) == 0.0);
        assert!(close(linalg::det(&m).re, h.det(), 1e-12));
        let back = HermitianForm2::from_matrix(&m);
        assert!((0..4).all(|k| close(back.x[k], h.x[k], 1e-15)));
    }
}

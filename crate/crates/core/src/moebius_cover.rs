//! Cross-ratios, the Klein four-group fixing `{0, 1, ∞, λ}` and the degree-4
//! quotient map of the Riemann sphere by that group.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::herm_geom::ExtComplex;
use crate::linalg::{self, cr, CMat2, CVec2};

const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("matrix is singular")]
    Singular,
    #[error("points {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("cross-ratio parameter {0} is degenerate")]
    DegenerateLambda(Complex64),
}

/// `z ↦ (az + b)/(cz + d)`, stored as a matrix defined up to scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub m: CMat2,
}

impl MoebiusMap {
    pub fn new(m: CMat2) -> Result<Self, MoebiusError> {
        linalg::inverse(&m).ok_or(MoebiusError::Singular)?;
        Ok(MoebiusMap { m })
    }

    pub fn identity() -> Self {
        MoebiusMap { m: CMat2::identity() }
    }

    pub fn apply(&self, z: ExtComplex) -> ExtComplex {
        ExtComplex::from_homogeneous(&(self.m * z.homogeneous()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        MoebiusMap { m: self.m * other.m }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { m: linalg::inverse(&self.m).expect("invertible by construction") }
    }

    /// Representative with determinant 1 (defined up to sign).
    pub fn normalized(&self) -> CMat2 {
        self.m / linalg::det(&self.m).sqrt()
    }

    /// Distance to `other` in PSL(2, C), minimised over the sign ambiguity.
    pub fn projective_distance(&self, other: &MoebiusMap) -> f64 {
        let a = self.normalized();
        let b = other.normalized();
        (a - b).norm().min((a + b).norm())
    }
}

fn bracket(a: &CVec2, b: &CVec2) -> Complex64 {
    a[0] * b[1] - a[1] * b[0]
}

fn point_scale(v: &CVec2) -> f64 {
    v.norm()
}

/// `((x2 − x3)/(x2 − x1)) · ((x4 − x1)/(x4 − x3))`, via homogeneous brackets.
pub fn cross_ratio(x: [ExtComplex; 4]) -> Result<ExtComplex, MoebiusError> {
    let h = x.map(|p| p.homogeneous());
    for i in 0..4 {
        for j in 0..i {
            if bracket(&h[i], &h[j]).norm() <= DEGENERATE_TOL * point_scale(&h[i]) * point_scale(&h[j]) {
                return Err(MoebiusError::Coincident(j, i));
            }
        }
    }
    let num = bracket(&h[1], &h[2]) * bracket(&h[3], &h[0]);
    let den = bracket(&h[1], &h[0]) * bracket(&h[3], &h[2]);
    Ok(ExtComplex::from_homogeneous(&CVec2::new(num, den)))
}

fn check_lambda(lambda: Complex64) -> Result<(), MoebiusError> {
    if !(lambda.re.is_finite() && lambda.im.is_finite())
        || lambda.norm() <= DEGENERATE_TOL
        || (lambda - 1.0).norm() <= DEGENERATE_TOL
    {
        return Err(MoebiusError::DegenerateLambda(lambda));
    }
    Ok(())
}

/// `M1 = (z − λ)/(z − 1)`, `M2 = λ/z`, `M3 = λ(z − 1)/(z − λ)`.
pub fn klein_maps(lambda: Complex64) -> Result<[MoebiusMap; 3], MoebiusError> {
    check_lambda(lambda)?;
    let one = cr(1.0);
    let zero = cr(0.0);
    Ok([
        MoebiusMap::new(linalg::mat(one, -lambda, one, -one))?,
        MoebiusMap::new(linalg::mat(zero, lambda, one, zero))?,
        MoebiusMap::new(linalg::mat(lambda, -lambda, one, -lambda))?,
    ])
}

/// The four marked points `(0, 1, ∞, λ)`.
pub fn marked_points(lambda: Complex64) -> [ExtComplex; 4] {
    [ExtComplex::Finite(cr(0.0)), ExtComplex::Finite(cr(1.0)), ExtComplex::Infinity, ExtComplex::Finite(lambda)]
}

/// Index of the marked point closest to `z` in the chordal metric.
fn nearest_marked(points: &[ExtComplex; 4], z: ExtComplex) -> usize {
    (0..4)
        .min_by(|&i, &j| points[i].chordal_distance(&z).total_cmp(&points[j].chordal_distance(&z)))
        .unwrap()
}

/// Permutation of `(0, 1, ∞, λ)` induced by a map, as `σ(i) = j` when
/// the map sends point `i` to point `j` (zero based).
pub fn induced_permutation(map: &MoebiusMap, lambda: Complex64) -> [usize; 4] {
    let pts = marked_points(lambda);
    [0, 1, 2, 3].map(|i| nearest_marked(&pts, map.apply(pts[i])))
}

/// `Φ(z) = λ (z² − 2z + λ)² / (z² − 2λz + λ)²`, invariant under the Klein maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientCover {
    pub lambda: Complex64,
}

/// Fixed points of one Klein map and their common image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub fixed_points: [Complex64; 2],
    pub critical_value: ExtComplex,
}

pub fn quotient_cover(lambda: Complex64) -> Result<QuotientCover, MoebiusError> {
    check_lambda(lambda)?;
    Ok(QuotientCover { lambda })
}

/// Stable roots of `a z² + b z + c`; a vanishing leading coefficient gives ∞.
fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [ExtComplex; 2] {
    let scale = a.norm().max(b.norm()).max(c.norm());
    if a.norm() <= 1e-15 * scale {
        let finite = if b.norm() > 0.0 { ExtComplex::Finite(-c / b) } else { ExtComplex::Infinity };
        return [finite, ExtComplex::Infinity];
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { b + disc } else { b - disc };
    let q = s * -0.5;
    if q.norm() == 0.0 {
        return [ExtComplex::Finite(cr(0.0)), ExtComplex::Finite(cr(0.0))];
    }
    [ExtComplex::Finite(q / a), ExtComplex::Finite(c / q)]
}

impl QuotientCover {
    /// Numerator and denominator at homogeneous `(p : q)`.
    fn parts(&self, z: ExtComplex) -> (Complex64, Complex64) {
        let h = z.homogeneous();
        let (p, q) = (h[0], h[1]);
        let l = self.lambda;
        let f = p * p - p * q * 2.0 + l * q * q;
        let g = p * p - l * p * q * 2.0 + l * q * q;
        (l * f * f, g * g)
    }

    pub fn eval(&self, z: ExtComplex) -> ExtComplex {
        let (n, d) = self.parts(z);
        ExtComplex::from_homogeneous(&CVec2::new(n, d))
    }

    pub fn eval_finite(&self, z: Complex64) -> ExtComplex {
        self.eval(ExtComplex::Finite(z))
    }

    /// Fixed points of `M1`, `M2`, `M3` with critical values `0`, `1`, `∞`.
    pub fn critical_data(&self) -> [CriticalData; 3] {
        let l = self.lambda;
        let sq = l.sqrt();
        let roots = |b: Complex64, c: Complex64| {
            let r = quadratic_roots(cr(1.0), b, c);
            r.map(|z| match z {
                ExtComplex::Finite(z) => z,
                ExtComplex::Infinity => unreachable!("monic quadratic"),
            })
        };
        let m1 = roots(cr(-2.0), l);
        let m3 = roots(l * -2.0, l);
        [
            CriticalData { fixed_points: m1, critical_value: self.eval_finite(m1[0]) },
            CriticalData { fixed_points: [sq, -sq], critical_value: self.eval_finite(sq) },
            CriticalData { fixed_points: m3, critical_value: self.eval_finite(m3[0]) },
        ]
    }

    /// All solutions of `Φ(z) = y` from the factorisation
    /// `√λ (z² − 2z + λ) = ±√y (z² − 2λz + λ)`.
    pub fn preimages(&self, y: ExtComplex) -> Vec<ExtComplex> {
        let l = self.lambda;
        let sl = l.sqrt();
        match y {
            ExtComplex::Infinity => {
                // Double roots of the denominator.
                let [a, b] = quadratic_roots(cr(1.0), l * -2.0, l);
                vec![a, a, b, b]
            }
            ExtComplex::Finite(y) => {
                let sy = y.sqrt();
                let mut out = Vec::with_capacity(4);
                for sign in [1.0, -1.0] {
                    let t = sy * sign;
                    let a = sl - t;
                    let b = (sl - l * t) * -2.0;
                    let c = l * (sl - t);
                    out.extend(quadratic_roots(a, b, c));
                }
                out
            }
        }
    }
}

/// `|Φ(λ) − λ|`.
pub fn klein_identity_residual(lambda: Complex64) -> Result<f64, MoebiusError> {
    let cover = quotient_cover(lambda)?;
    Ok(match cover.eval_finite(lambda) {
        ExtComplex::Finite(v) => (v - lambda).norm(),
        ExtComplex::Infinity => f64::INFINITY,
    })
}

/// Distance between two points of the sphere, finite points compared in C.
pub fn ext_distance(a: ExtComplex, b: ExtComplex) -> f64 {
    match (a, b) {
        (ExtComplex::Finite(x), ExtComplex::Finite(y)) => (x - y).norm(),
        (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn f(z: Complex64) -> ExtComplex {
        ExtComplex::Finite(z)
    }

    #[test]
    fn cross_ratio_examples() {
        let l = c(0.3, -1.7);
        let v = cross_ratio(marked_points(l)).unwrap();
        assert!(ext_distance(v, f(l)) < 1e-15);
        let v = cross_ratio([f(cr(1.0)), f(cr(2.0)), f(cr(3.0)), f(cr(4.0))]).unwrap();
        assert!(ext_distance(v, f(cr(-3.0))) < 1e-15);
        assert_eq!(cross_ratio([f(cr(1.0)), f(cr(2.0)), f(cr(1.0)), f(cr(4.0))]), Err(MoebiusError::Coincident(0, 2)));
    }

    #[test]
    fn klein_map_values() {
        let [m1, m2, m3] = klein_maps(cr(-1.0)).unwrap();
        assert!(ext_distance(m2.apply(f(cr(1.0))), f(cr(-1.0))) < 1e-15);
        assert!(m2.apply(f(cr(0.0))).is_infinite());
        let l = c(0.4, 2.0);
        let [m1l, _, _] = klein_maps(l).unwrap();
        assert!(ext_distance(m1l.apply(f(cr(0.0))), f(l)) < 1e-15);
        assert!(m1.compose(&m2).projective_distance(&m3) < 1e-12);
        assert!(klein_maps(cr(1.0)).is_err() && klein_maps(cr(0.0)).is_err());
    }

    #[test]
    fn klein_maps_are_double_transpositions() {
        let l = c(-0.6, 0.9);
        let maps = klein_maps(l).unwrap();
        let perms: Vec<[usize; 4]> = maps.iter().map(|m| induced_permutation(m, l)).collect();
        // M1 swaps 0 ↔ λ and 1 ↔ ∞; M2 swaps 0 ↔ ∞ and 1 ↔ λ.
        assert_eq!(perms[0], [3, 2, 1, 0]);
        assert_eq!(perms[1], [2, 3, 0, 1]);
        assert_eq!(perms[2], [1, 0, 3, 2]);
    }

    #[test]
    fn cover_examples() {
        let cover = quotient_cover(cr(2.0)).unwrap();
        assert!(ext_distance(cover.eval_finite(cr(2.0)), f(cr(2.0))) < 1e-15);
        assert!(ext_distance(cover.eval_finite(cr(0.0)), f(cr(2.0))) < 1e-15);
        assert!(ext_distance(cover.eval(ExtComplex::Infinity), f(cr(2.0))) < 1e-15);
        let l = c(0.7, 0.4);
        let cover = quotient_cover(l).unwrap();
        for p in marked_points(l) {
            assert!(ext_distance(cover.eval(p), f(l)) < 1e-14);
        }
        let crit = cover.critical_data();
        assert!(ext_distance(crit[0].critical_value, f(cr(0.0))) < 1e-12);
        assert!(ext_distance(crit[1].critical_value, f(cr(1.0))) < 1e-12);
        assert!(crit[2].critical_value.is_infinite() || crit[2].critical_value.chordal_distance(&ExtComplex::Infinity) < 1e-12);
        assert!(ext_distance(cover.eval_finite(-l.sqrt()), f(cr(1.0))) < 1e-12);
    }

    #[test]
    fn identity_residual_examples() {
        assert!(klein_identity_residual(cr(2.0)).unwrap() < 1e-14);
        assert!(klein_identity_residual(c(0.0, 1.0)).unwrap() < 1e-12);
    }

    #[test]
    fn preimages_solve_the_equation() {
        let l = c(-0.3, 1.1);
        let cover = quotient_cover(l).unwrap();
        let y = c(0.25, -0.8);
        let roots = cover.preimages(f(y));
        assert_eq!(roots.len(), 4);
        for (i, r) in roots.iter().enumerate() {
            assert!(ext_distance(cover.eval(*r), f(y)) < 1e-10);
            for s in &roots[..i] {
                assert!(r.chordal_distance(s) > 1e-6);
            }
        }
        let at_lambda = cover.preimages(f(l));
        assert!(at_lambda.iter().any(|r| r.is_infinite()));
    }
}

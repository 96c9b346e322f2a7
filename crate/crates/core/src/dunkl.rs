//! Standard and Dunkl connections on C² with logarithmic poles along lines.
//!
//! A standard connection is `d − Σ A_i dℓ_i/ℓ_i` with `ker A_i = L_i` and
//! `Σ A_i = c·Id`. It is Dunkl when all `A_i` are self-adjoint for a common
//! positive Hermitian form; for real weights of one sign that form is found as
//! the weighted hyperbolic barycentre of the points `x(L_i) ∈ S²`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::herm_geom::{
    ball_to_hyperboloid, busemann, projection_matrix, vector_to_sphere, GeomError, HermitianForm2,
    ProjLine, SpherePoint,
};
use crate::linalg::{self, cr, CMat2, CVec2};

pub const MAX_NEWTON_ITERATIONS: usize = 200;
pub const GRADIENT_TOL: f64 = 1e-12;
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Largest Newton step in the recentred ball.
const MAX_STEP: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DunklError {
    #[error("need at least 3 lines, got {0}")]
    TooFewLines(usize),
    #[error("{lines} lines but {weights} weights")]
    LengthMismatch { lines: usize, weights: usize },
    #[error("lines {0} and {1} coincide")]
    CoincidentLines(usize, usize),
    #[error("weight {0} is zero")]
    ZeroWeight(usize),
    #[error("weights have mixed signs")]
    MixedSigns,
    #[error("stability fails at line {0}: |a_j| >= sum of the others")]
    Unstable(usize),
    #[error("barycentre solver stalled after {iterations} iterations (gradient {gradient:e})")]
    NoConvergence { iterations: usize, gradient: f64 },
    #[error("barycentre certificate {0:e} above tolerance")]
    Certificate(f64),
    #[error("sample point ({0}, {1}) lies on a pole divisor")]
    OnDivisor(Complex64, Complex64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Distinct lines with nonzero real weights of a common sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedLines {
    lines: Vec<ProjLine>,
    weights: Vec<f64>,
}

impl WeightedLines {
    pub fn new(lines: Vec<ProjLine>, weights: Vec<f64>) -> Result<Self, DunklError> {
        if lines.len() != weights.len() {
            return Err(DunklError::LengthMismatch { lines: lines.len(), weights: weights.len() });
        }
        if lines.len() < 3 {
            return Err(DunklError::TooFewLines(lines.len()));
        }
        for i in 0..lines.len() {
            for j in 0..i {
                if lines[i] == lines[j] {
                    return Err(DunklError::CoincidentLines(j, i));
                }
            }
        }
        if let Some(i) = weights.iter().position(|&a| a == 0.0 || !a.is_finite()) {
            return Err(DunklError::ZeroWeight(i));
        }
        let positive = weights[0] > 0.0;
        if weights.iter().any(|&a| (a > 0.0) != positive) {
            return Err(DunklError::MixedSigns);
        }
        Ok(WeightedLines { lines, weights })
    }

    /// Equal weights on the given lines.
    pub fn uniform(lines: Vec<ProjLine>, a: f64) -> Result<Self, DunklError> {
        let n = lines.len();
        Self::new(lines, vec![a; n])
    }

    pub fn lines(&self) -> &[ProjLine] {
        &self.lines
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// `|a_j| < Σ_{i≠j} |a_i|` for every `j`.
pub fn stability_check(w: &WeightedLines) -> bool {
    stable_weights(w.weights())
}

pub fn stable_weights(a: &[f64]) -> bool {
    unstable_index(a).is_none()
}

fn unstable_index(a: &[f64]) -> Option<usize> {
    let total: f64 = a.iter().map(|x| x.abs()).sum();
    a.iter().position(|x| x.abs() >= total - x.abs())
}

/// Logarithmic connection `d − Σ A_i dℓ_i/ℓ_i` together with its trace data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardConnection {
    pub lines: Vec<ProjLine>,
    pub residues: Vec<CMat2>,
    pub traces: Vec<Complex64>,
    pub c: Complex64,
}

/// Residuals of the defining identities of a standard connection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionResiduals {
    /// `‖Σ A_i − c·Id‖_F`.
    pub sum: f64,
    /// `max_i ‖A_i v_i‖` for unit `v_i` spanning `L_i`.
    pub kernel: f64,
    /// `|c − ½ Σ tr A_i|`.
    pub trace: f64,
}

impl ConnectionResiduals {
    pub fn max(&self) -> f64 {
        self.sum.max(self.kernel).max(self.trace)
    }
}

impl StandardConnection {
    /// Assembles a connection, reading `a_i = tr A_i` and `c = ½ Σ a_i`.
    pub fn new(lines: Vec<ProjLine>, residues: Vec<CMat2>) -> Self {
        assert_eq!(lines.len(), residues.len(), "one residue per line");
        let traces: Vec<Complex64> = residues.iter().map(linalg::trace).collect();
        let c = traces.iter().sum::<Complex64>() * 0.5;
        StandardConnection { lines, residues, traces, c }
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn residuals(&self) -> ConnectionResiduals {
        let total: CMat2 = self.residues.iter().sum();
        let sum = (total - CMat2::identity() * self.c).norm();
        let kernel = self
            .lines
            .iter()
            .zip(&self.residues)
            .map(|(l, a)| {
                let v = l.spanning_vector();
                (a * v).norm() / v.norm()
            })
            .fold(0.0, f64::max);
        let trace = (self.c - self.traces.iter().sum::<Complex64>() * 0.5).norm();
        ConnectionResiduals { sum, kernel, trace }
    }

    /// `max_i ‖H A_i − A_i† H‖_F`.
    pub fn self_adjoint_residual(&self, h: &HermitianForm2) -> f64 {
        let hm = h.matrix();
        self.residues.iter().map(|a| (hm * a - a.adjoint() * hm).norm()).fold(0.0, f64::max)
    }

    /// Coefficient matrices `(Ω_z, Ω_w)` of `Ω = Ω_z dz + Ω_w dw` at `x`.
    pub fn omega(&self, x: &CVec2) -> (CMat2, CMat2) {
        let mut oz = CMat2::zeros();
        let mut ow = CMat2::zeros();
        for (l, a) in self.lines.iter().zip(&self.residues) {
            let f = l.defining_form();
            let ell = f[0] * x[0] + f[1] * x[1];
            oz += a * (f[0] / ell);
            ow += a * (f[1] / ell);
        }
        (oz, ow)
    }

    /// `Ω(x)` evaluated on the tangent vector `v`.
    pub fn omega_along(&self, x: &CVec2, v: &CVec2) -> CMat2 {
        let (oz, ow) = self.omega(x);
        oz * v[0] + ow * v[1]
    }

    /// Smallest `|ℓ_i(x)| / ‖x‖` over the lines, with unit-norm forms.
    pub fn clearance(&self, x: &CVec2) -> f64 {
        self.lines
            .iter()
            .map(|l| {
                let f = l.defining_form();
                l.eval_form(x).norm() / (f.norm() * x.norm())
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Output of the barycentre solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DunklSolution {
    /// Minimiser on the hyperboloid `det = 1`.
    pub h: HermitianForm2,
    /// A matrix with `frame† · frame = h` accumulated by the solver.
    pub frame: CMat2,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// `‖Σ a_i x(√H · L_i)‖`.
    pub certificate: f64,
}

/// `‖Σ a_i x(A L_i)‖` for `A = √H`.
pub fn barycentre_certificate(w: &WeightedLines, h: &HermitianForm2) -> f64 {
    let root = linalg::hermitian_sqrt(&h.matrix());
    weighted_sum(&images(w.lines(), &root), w.weights()).norm()
}

fn images(lines: &[ProjLine], frame: &CMat2) -> Vec<SpherePoint> {
    lines.iter().map(|l| vector_to_sphere(&(frame * l.spanning_vector()))).collect()
}

fn weighted_sum(points: &[SpherePoint], w: &[f64]) -> Vector3<f64> {
    points.iter().zip(w).map(|(p, &a)| p.vector() * a).sum()
}

fn objective(points: &[SpherePoint], w: &[f64], y: &Vector3<f64>) -> f64 {
    points.iter().zip(w).map(|(p, &a)| a * busemann(p, y).unwrap_or(f64::INFINITY)).sum()
}

/// Damped Newton iteration for the minimiser of `F = Σ a_i b_{x(L_i)}`.
///
/// Each step is taken at the centre of the ball after moving the current
/// iterate there, so gradient and Hessian have the closed forms
/// `−2 Σ a_i x_i` and `4 Σ a_i (Id − x_i x_iᵀ)`.
pub fn solve_barycentre(w: &WeightedLines) -> Result<DunklSolution, DunklError> {
    if let Some(j) = unstable_index(w.weights()) {
        return Err(DunklError::Unstable(j));
    }
    let total: f64 = w.weights().iter().map(|a| a.abs()).sum();
    let wn: Vec<f64> = w.weights().iter().map(|a| a.abs() / total).collect();

    let mut frame = CMat2::identity();
    let start = weighted_sum(&images(w.lines(), &frame), &wn) * 0.5;
    let pts0 = images(w.lines(), &frame);
    if objective(&pts0, &wn, &start) < 0.0 {
        frame = linalg::hermitian_sqrt(&ball_to_hyperboloid(&start)?.matrix());
    }

    let mut iterations = 0;
    let mut gradient_norm;
    loop {
        let pts = images(w.lines(), &frame);
        let grad = weighted_sum(&pts, &wn) * -2.0;
        gradient_norm = grad.norm();
        if gradient_norm < GRADIENT_TOL {
            break;
        }
        if iterations >= MAX_NEWTON_ITERATIONS {
            return Err(DunklError::NoConvergence { iterations, gradient: gradient_norm });
        }
        let mut hess = Matrix3::zeros();
        for (p, &a) in pts.iter().zip(&wn) {
            let x = p.vector();
            hess += (Matrix3::identity() - x * x.transpose()) * (4.0 * a);
        }
        let dir = match hess.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad,
        };
        let slope = grad.dot(&dir);
        let mut t = (MAX_STEP / dir.norm()).min(1.0);
        let mut y = dir * t;
        // F vanishes at the centre, so Armijo compares against 0. Once the
        // predicted decrease drops below the rounding level of F the plain
        // Newton step is taken.
        while slope.abs() > 1e-10 && objective(&pts, &wn, &y) > 1e-4 * t * slope && t > 1e-12 {
            t *= 0.5;
            y = dir * t;
        }
        let step = linalg::hermitian_sqrt(&ball_to_hyperboloid(&y)?.matrix());
        frame = step * frame;
        iterations += 1;
    }

    let h = HermitianForm2::from_matrix(&(frame.adjoint() * frame)).to_h3()?;
    let certificate = barycentre_certificate(w, &h);
    if certificate >= CERTIFICATE_TOL * w.weights().iter().map(|a| a.abs()).fold(1.0, f64::max) {
        return Err(DunklError::Certificate(certificate));
    }
    Ok(DunklSolution { h, frame, iterations, gradient_norm, certificate })
}

/// Unit-determinant positive form making `Σ a_i P_i` scalar.
pub fn dunkl_inner_product(w: &WeightedLines) -> Result<HermitianForm2, DunklError> {
    Ok(solve_barycentre(w)?.h)
}

/// `A_i = a_i P_i` with `P_i` the projection killing `L_i`, orthogonal for the
/// Dunkl inner product.
pub fn dunkl_connection(w: &WeightedLines) -> Result<StandardConnection, DunklError> {
    scaled_dunkl_connection(w, 1.0)
}

/// `A_i = s · a_i P_i`: the Dunkl inner product depends only on the ray of the
/// weights, so any real `s` (including 0) gives a standard connection.
pub fn scaled_dunkl_connection(w: &WeightedLines, s: f64) -> Result<StandardConnection, DunklError> {
    let h = dunkl_inner_product(w)?;
    let residues = w
        .lines()
        .iter()
        .zip(w.weights())
        .map(|(l, &a)| Ok(projection_matrix(l, &h)? * cr(s * a)))
        .collect::<Result<Vec<_>, GeomError>>()?;
    Ok(StandardConnection::new(w.lines().to_vec(), residues))
}

/// The four lines `0, ∞, 1, λ` with unit weights.
pub fn family_lines(lambda: Complex64) -> Result<WeightedLines, DunklError> {
    WeightedLines::uniform(
        vec![ProjLine::real(0.0), ProjLine::infinity(), ProjLine::real(1.0), ProjLine::slope(lambda)],
        1.0,
    )
}

/// One-parameter family `A_i = a · P_i(λ)` on the lines `0, ∞, 1, λ`.
pub fn dunkl_family(lambda: Complex64, a: f64) -> Result<StandardConnection, DunklError> {
    scaled_dunkl_connection(&family_lines(lambda)?, a)
}

/// Lines `{z = 0}`, `{w = 0}`, `{w = z}` of the three-line normal form.
pub fn three_lines() -> [ProjLine; 3] {
    [ProjLine::real(0.0), ProjLine::infinity(), ProjLine::real(1.0)]
}

/// The unique standard connection on three lines with residue traces `a_i`.
pub fn three_line_connection(a1: Complex64, a2: Complex64, a3: Complex64) -> StandardConnection {
    let b1 = (a2 + a3 - a1) * 0.5;
    let b2 = (a1 + a3 - a2) * 0.5;
    let zero = Complex64::new(0.0, 0.0);
    let r1 = linalg::mat(a1, zero, b2, zero);
    let r2 = linalg::mat(zero, b1, zero, a2);
    let r3 = linalg::mat(b1, -b1, -b2, b2);
    StandardConnection::new(three_lines().to_vec(), vec![r1, r2, r3])
}

/// `b_i = (a_j + a_k − a_i)/2`, so that `a_i = b_j + b_k`.
pub fn b_parameters(a1: f64, a2: f64, a3: f64) -> [f64; 3] {
    [(a2 + a3 - a1) / 2.0, (a1 + a3 - a2) / 2.0, (a1 + a2 - a3) / 2.0]
}

/// Form making the three-line residues self-adjoint, unique up to real scale.
pub fn three_line_form(a1: f64, a2: f64, a3: f64) -> HermitianForm2 {
    let [b1, b2, b3] = b_parameters(a1, a2, a3);
    HermitianForm2::from_matrix(&linalg::rmat(b2 * (b1 + b3), -b1 * b2, -b1 * b2, b1 * (b2 + b3)))
}

/// Dunkl test for three lines: `det H = b₁b₂b₃(b₁+b₂+b₃) > 0`.
pub fn dunkl_criterion_3(a1: f64, a2: f64, a3: f64) -> (bool, f64) {
    let [b1, b2, b3] = b_parameters(a1, a2, a3);
    let d = b1 * b2 * b3 * (b1 + b2 + b3);
    (d > 0.0, d)
}

/// Lines `0, ∞, 1, −1` of the B₂ arrangement.
pub fn dihedral_lines() -> [ProjLine; 4] {
    [ProjLine::real(0.0), ProjLine::infinity(), ProjLine::real(1.0), ProjLine::real(-1.0)]
}

/// The B₂ Dunkl connection, orthogonal for the standard inner product.
pub fn dihedral_connection(a: f64) -> StandardConnection {
    let residues = vec![
        linalg::rmat(a, 0.0, 0.0, 0.0),
        linalg::rmat(0.0, 0.0, 0.0, a),
        linalg::rmat(a / 2.0, -a / 2.0, -a / 2.0, a / 2.0),
        linalg::rmat(a / 2.0, a / 2.0, a / 2.0, a / 2.0),
    ];
    StandardConnection::new(dihedral_lines().to_vec(), residues)
}

/// Pull-back of the three-line connection with traces `((1+a)/2, (1+a)/2, a)`
/// under `F(z, w) = (z², w²)`, written in the frame `∂_z, ∂_w`:
/// `G⁻¹ · F*Ω̃ · G − G⁻¹ dG` with `G = DF = diag(2z, 2w)`.
pub fn b2_pullback_omega(a: f64, z: Complex64, w: Complex64) -> Result<(CMat2, CMat2), DunklError> {
    check_b2_sample(z, w)?;
    let base = three_line_connection(cr((1.0 + a) / 2.0), cr((1.0 + a) / 2.0), cr(a));
    let x = CVec2::new(z * z, w * w);
    // F* dx = 2z dz, F* dy = 2w dw.
    let (tz, tw) = base.omega(&x);
    let pz = tz * (z * 2.0);
    let pw = tw * (w * 2.0);
    let g = [z * 2.0, w * 2.0];
    let conj = |m: CMat2| {
        let mut out = m;
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = m[(i, j)] * g[j] / g[i];
            }
        }
        out
    };
    let mut oz = conj(pz);
    let mut ow = conj(pw);
    oz[(0, 0)] -= z.inv();
    ow[(1, 1)] -= w.inv();
    Ok((oz, ow))
}

fn check_b2_sample(z: Complex64, w: Complex64) -> Result<(), DunklError> {
    let scale = z.norm().max(w.norm());
    let near = |v: Complex64| v.norm() <= 1e-12 * scale.max(1e-300);
    if near(z) || near(w) || near(z - w) || near(z + w) {
        Err(DunklError::OnDivisor(z, w))
    } else {
        Ok(())
    }
}

/// Largest entrywise gap between the B₂ connection form and the gauge
/// transformed pull-back, over all sample points.
pub fn b2_pullback_residual(a: f64, samples: &[(Complex64, Complex64)]) -> Result<f64, DunklError> {
    let target = dihedral_connection(a);
    let mut worst = 0.0_f64;
    for &(z, w) in samples {
        let (pz, pw) = b2_pullback_omega(a, z, w)?;
        let (oz, ow) = target.omega(&CVec2::new(z, w));
        worst = worst.max(linalg::max_abs(&(pz - oz))).max(linalg::max_abs(&(pw - ow)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn weighted(slopes: &[Option<Complex64>], a: &[f64]) -> WeightedLines {
        let lines = slopes
            .iter()
            .map(|s| match s {
                Some(z) => ProjLine::slope(*z),
                None => ProjLine::infinity(),
            })
            .collect();
        WeightedLines::new(lines, a.to_vec()).unwrap()
    }

    #[test]
    fn stability_examples() {
        assert!(stable_weights(&[1.0, 1.0, 1.0, 1.0]));
        assert!(!stable_weights(&[3.0, 1.0, 1.0]));
        assert!(stable_weights(&[1.0, 1.0, 1.999]));
        assert!(!stable_weights(&[1.0, 1.0, 2.0]));
    }

    #[test]
    fn weighted_lines_validation() {
        let l = vec![ProjLine::real(0.0), ProjLine::real(1.0), ProjLine::real(0.0)];
        assert_eq!(WeightedLines::new(l, vec![1.0; 3]), Err(DunklError::CoincidentLines(0, 2)));
        let l = vec![ProjLine::real(0.0), ProjLine::real(1.0), ProjLine::infinity()];
        assert_eq!(WeightedLines::new(l.clone(), vec![1.0, -1.0, 1.0]), Err(DunklError::MixedSigns));
        assert_eq!(WeightedLines::new(l.clone(), vec![1.0, 0.0, 1.0]), Err(DunklError::ZeroWeight(1)));
        assert_eq!(WeightedLines::new(l[..2].to_vec(), vec![1.0; 2]), Err(DunklError::TooFewLines(2)));
        assert!(WeightedLines::new(l, vec![-1.0; 3]).is_ok());
    }

    #[test]
    fn symmetric_configurations_give_identity() {
        let w = weighted(&[Some(cr(0.0)), Some(cr(1.0)), None, Some(cr(-1.0))], &[1.0; 4]);
        let h = dunkl_inner_product(&w).unwrap();
        assert!((h.matrix() - CMat2::identity()).norm() < 1e-12);
        let om = c(-0.5, 3f64.sqrt() / 2.0);
        let w = weighted(&[Some(cr(1.0)), Some(om), Some(om * om)], &[2.0; 3]);
        let h = dunkl_inner_product(&w).unwrap();
        assert!((h.matrix() - CMat2::identity()).norm() < 1e-12);
    }

    #[test]
    fn three_line_barycentre_matches_explicit_form() {
        let w = weighted(&[Some(cr(0.0)), None, Some(cr(1.0))], &[1.0, 1.0, 1.0]);
        let sol = solve_barycentre(&w).unwrap();
        assert!(sol.certificate < 1e-9);
        let expect = three_line_form(1.0, 1.0, 1.0).to_h3().unwrap();
        for k in 0..4 {
            assert!((sol.h.x[k] - expect.x[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn unstable_weights_are_rejected() {
        let w = weighted(&[Some(cr(0.0)), None, Some(cr(1.0))], &[3.0, 1.0, 1.0]);
        assert_eq!(solve_barycentre(&w), Err(DunklError::Unstable(0)));
    }

    #[test]
    fn negative_weights_use_the_same_form() {
        let pos = weighted(&[Some(cr(0.0)), None, Some(cr(1.0)), Some(c(0.0, 2.0))], &[1.0, 0.5, 0.8, 0.9]);
        let neg = weighted(&[Some(cr(0.0)), None, Some(cr(1.0)), Some(c(0.0, 2.0))], &[-1.0, -0.5, -0.8, -0.9]);
        assert_eq!(dunkl_inner_product(&pos).unwrap(), dunkl_inner_product(&neg).unwrap());
        let conn = dunkl_connection(&neg).unwrap();
        assert!(conn.residuals().max() < 1e-10);
        assert!((conn.c - cr(-1.6)).norm() < 1e-12);
    }

    #[test]
    fn dunkl_connection_on_b2_lines_is_the_dihedral_one() {
        let w = WeightedLines::uniform(dihedral_lines().to_vec(), 1.0).unwrap();
        let conn = dunkl_connection(&w).unwrap();
        let target = dihedral_connection(1.0);
        for (a, b) in conn.residues.iter().zip(&target.residues) {
            assert!((a - b).norm() < 1e-9);
        }
        assert!((target.residues[3] - linalg::rmat(0.5, 0.5, 0.5, 0.5)).norm() == 0.0);
        let sum: CMat2 = dihedral_connection(0.3).residues.iter().sum();
        assert!((sum - CMat2::identity() * cr(0.6)).norm() < 1e-15);
    }

    #[test]
    fn three_line_examples() {
        let t = three_line_connection(cr(1.0), cr(1.0), cr(1.0));
        assert!((t.residues[2] - linalg::rmat(0.5, -0.5, -0.5, 0.5)).norm() == 0.0);
        let t = three_line_connection(cr(0.5), cr(0.5), cr(0.5));
        assert!((t.residues[0] - linalg::rmat(0.5, 0.0, 0.25, 0.0)).norm() == 0.0);
        let t = three_line_connection(c(0.2, 1.0), c(-0.7, 0.1), c(1.9, -0.4));
        let r = t.residuals();
        assert!(r.max() < 1e-14);
        assert!((t.c - (c(0.2, 1.0) + c(-0.7, 0.1) + c(1.9, -0.4)) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn b_parameter_examples() {
        assert_eq!(b_parameters(1.0, 1.0, 1.0), [0.5, 0.5, 0.5]);
        assert_eq!(b_parameters(3.0, 1.0, 1.0), [-0.5, 1.5, 1.5]);
        let a = 0.37;
        let b = b_parameters((1.0 + a) / 2.0, (1.0 + a) / 2.0, a);
        assert!((b[0] - a / 2.0).abs() < 1e-15 && (b[1] - a / 2.0).abs() < 1e-15 && (b[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn criterion_examples() {
        assert_eq!(dunkl_criterion_3(1.0, 1.0, 1.0), (true, 3.0 / 16.0));
        let (ok, d) = dunkl_criterion_3(3.0, 1.0, 1.0);
        assert!(!ok && d < 0.0);
        assert_eq!(dunkl_criterion_3(-2.0, -2.0, -2.0).0, dunkl_criterion_3(1.0, 1.0, 1.0).0);
    }

    #[test]
    fn explicit_three_line_form_is_invariant() {
        let (a1, a2, a3) = (0.4, 0.9, 0.7);
        let t = three_line_connection(cr(a1), cr(a2), cr(a3));
        assert!(t.self_adjoint_residual(&three_line_form(a1, a2, a3)) < 1e-15);
    }

    #[test]
    fn b2_pullback_examples() {
        let samples = [(c(0.3, 0.2), c(-0.7, 1.1)), (c(1.5, -0.4), c(0.2, 0.9)), (c(-2.0, 0.5), c(0.1, -0.3))];
        assert!(b2_pullback_residual(0.0, &samples).unwrap() < 1e-14);
        assert!(b2_pullback_residual(0.3, &samples).unwrap() < 1e-12);
        assert!(matches!(b2_pullback_residual(0.3, &[(cr(1.0), cr(-1.0))]), Err(DunklError::OnDivisor(..))));
    }

    #[test]
    fn b2_gauge_in_the_other_conjugation_order_fails() {
        let (a, z, w) = (0.3, c(0.3, 0.2), c(-0.7, 1.1));
        let base = three_line_connection(cr((1.0 + a) / 2.0), cr((1.0 + a) / 2.0), cr(a));
        let (tz, _) = base.omega(&CVec2::new(z * z, w * w));
        let pz = tz * (z * 2.0);
        let g = [z * 2.0, w * 2.0];
        let mut other = pz;
        for i in 0..2 {
            for j in 0..2 {
                other[(i, j)] = pz[(i, j)] * g[i] / g[j];
            }
        }
        other[(0, 0)] -= z.inv();
        let (oz, _) = dihedral_connection(a).omega(&CVec2::new(z, w));
        assert!(linalg::max_abs(&(other - oz)) > 1e-2);
    }

    #[test]
    fn omega_matches_residue_sum_on_euler_field() {
        // Ω(x)(x) = Σ A_i, the Euler identity.
        let conn = dihedral_connection(0.3);
        let x = CVec2::new(c(0.4, 0.1), c(-0.2, 0.9));
        let om = conn.omega_along(&x, &x);
        assert!((om - CMat2::identity() * conn.c).norm() < 1e-14);
    }
}

//! Spherical cone metrics from unitary flat connections: transport of the
//! flat Hermitian form and the quotient metric on the space of lines.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dunkl::StandardConnection;
use crate::flat_forms::{self, invariance_residual};
use crate::herm_geom::{ExtComplex, HermitianForm2};
use crate::linalg::{self, c, cr, CMat2, CVec2};
use crate::monodromy::{self, integrate_segment, FuchsianSystem, MonodromyError};

/// Relative invariance residual accepted for a flat form.
pub const FLATNESS_TOL: f64 = 1e-7;
/// Smallest admissible segment clearance, see [`segment_clearance`].
pub const PATH_CLEARANCE: f64 = 1e-6;
/// Straight segments are used as is above this clearance.
const STRAIGHT_CLEARANCE: f64 = 0.05;
pub const RING_INNER: f64 = 1e-3;
pub const RING_OUTER: f64 = 1e-2;
const RING_RADII: usize = 9;
const RING_ANGLES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphericalError {
    #[error("form is not flat: relative invariance residual {0:.3e}")]
    NotFlat(f64),
    #[error("flat form is not definite")]
    Indefinite,
    #[error("flat form is not unique: kernel dimension {0}")]
    AmbiguousForm(usize),
    #[error("no flat form")]
    NoFlatForm,
    #[error("c = {0} is not below 1")]
    CNotBelowOne(f64),
    #[error("residue trace a_{0} = {1} is not below 1")]
    WeightTooLarge(usize, f64),
    #[error("path passes within {0:.3e} of a line")]
    TooClose(f64),
    #[error("point lies on a cone point")]
    ConePoint,
    #[error("stencil or ring of radius {0:.3e} meets another singular point")]
    HitsSingularity(f64),
    #[error("non-positive metric value")]
    NonPositive,
    #[error(transparent)]
    Monodromy(#[from] MonodromyError),
}

/// Affine chart `ξ ↦ (ξ, 1)` or the chart `η ↦ (1, η)` around ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Affine,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub z: Complex64,
}

impl ChartPoint {
    pub fn affine(z: Complex64) -> Self {
        ChartPoint { chart: Chart::Affine, z }
    }

    pub fn at_infinity(z: Complex64) -> Self {
        ChartPoint { chart: Chart::Infinity, z }
    }

    /// Section `s(ξ)` of the tautological bundle.
    pub fn lift(&self) -> CVec2 {
        match self.chart {
            Chart::Affine => CVec2::new(self.z, cr(1.0)),
            Chart::Infinity => CVec2::new(cr(1.0), self.z),
        }
    }

    /// Naive lift of the coordinate vector field.
    pub fn coordinate_lift(&self) -> CVec2 {
        match self.chart {
            Chart::Affine => CVec2::new(cr(1.0), cr(0.0)),
            Chart::Infinity => CVec2::new(cr(0.0), cr(1.0)),
        }
    }

    pub fn offset(&self, d: Complex64) -> Self {
        ChartPoint { chart: self.chart, z: self.z + d }
    }
}

/// Chart coordinate of the point of CP¹ given by a line, if visible.
fn chart_coordinate(slope: ExtComplex, chart: Chart) -> Option<Complex64> {
    match (slope, chart) {
        (ExtComplex::Finite(l), Chart::Affine) => Some(l),
        (ExtComplex::Infinity, Chart::Affine) => None,
        (ExtComplex::Finite(l), Chart::Infinity) => (l.norm() > 0.0).then(|| l.inv()),
        (ExtComplex::Infinity, Chart::Infinity) => Some(cr(0.0)),
    }
}

/// Flat form pulled to a point, with the path that carried it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportedForm {
    pub endpoint: CVec2,
    pub h: HermitianForm2,
    pub path: Vec<CVec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeMetricSample {
    pub point: ChartPoint,
    /// Metric is `φ² |dξ|²`.
    pub phi: f64,
    /// Index of the path candidate used to reach the point.
    pub path_id: usize,
}

/// Restriction to `t ↦ p + t (q − p)`; lines containing the direction drop
/// out and poles that coincide are merged.
fn segment_system(conn: &StandardConnection, p: &CVec2, q: &CVec2) -> Result<FuchsianSystem, SphericalError> {
    let v = q - p;
    let mut poles: Vec<Complex64> = Vec::new();
    let mut residues: Vec<CMat2> = Vec::new();
    for (l, a) in conn.lines.iter().zip(&conn.residues) {
        let f = l.defining_form();
        let lv = l.eval_form(&v);
        let lp = l.eval_form(p);
        if lp.norm() <= 1e-14 * f.norm() * p.norm() {
            return Err(SphericalError::TooClose(0.0));
        }
        if lv.norm() <= 1e-14 * f.norm() * v.norm() {
            continue;
        }
        let t = -lp / lv;
        match poles.iter().position(|s| (s - t).norm() <= 1e-12 * (1.0 + t.norm())) {
            Some(k) => residues[k] += a,
            None => {
                poles.push(t);
                residues.push(*a);
            }
        }
    }
    Ok(FuchsianSystem::new(poles, residues, cr(0.0))?)
}

fn distance_to_unit_segment(t: Complex64) -> f64 {
    let s = t.re.clamp(0.0, 1.0);
    (t - cr(s)).norm()
}

/// Smallest `|ℓ_i(x)| / (‖ℓ_i‖ ‖x‖)` along the segment, bounded below by the
/// pole distance in the segment parameter.
pub fn segment_clearance(conn: &StandardConnection, p: &CVec2, q: &CVec2) -> f64 {
    let v = q - p;
    let size = p.norm().max(q.norm());
    conn.lines
        .iter()
        .map(|l| {
            let f = l.defining_form();
            let lv = l.eval_form(&v);
            let lp = l.eval_form(p);
            if lv.norm() <= 1e-14 * f.norm() * v.norm() {
                return lp.norm() / (f.norm() * size);
            }
            lv.norm() * distance_to_unit_segment(-lp / lv) / (f.norm() * size)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Pole distance to the segment in units of its length.
fn relative_clearance(conn: &StandardConnection, p: &CVec2, q: &CVec2) -> f64 {
    let v = q - p;
    conn.lines
        .iter()
        .filter_map(|l| {
            let lv = l.eval_form(&v);
            (lv.norm() > 1e-14 * l.defining_form().norm() * v.norm()).then(|| distance_to_unit_segment(-l.eval_form(p) / lv))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Parallel frame `Y` along a polyline with `Y(start) = Id` and `dY = Ω Y`.
pub fn transport_frame(conn: &StandardConnection, path: &[CVec2]) -> Result<CMat2, SphericalError> {
    let mut y = CMat2::identity();
    for w in path.windows(2) {
        let clearance = segment_clearance(conn, &w[0], &w[1]);
        if clearance < PATH_CLEARANCE {
            return Err(SphericalError::TooClose(clearance));
        }
        if (w[1] - w[0]).norm() == 0.0 {
            continue;
        }
        let sys = segment_system(conn, &w[0], &w[1])?;
        integrate_segment(&sys, cr(0.0), cr(1.0), &mut y)?;
    }
    Ok(y)
}

/// `H(x) = Y⁻† H₀ Y⁻¹`, which solves `dH = −HΩ − Ω†H`.
pub fn transport_form(conn: &StandardConnection, h0: &HermitianForm2, path: &[CVec2]) -> Result<TransportedForm, SphericalError> {
    assert!(!path.is_empty(), "path needs a start point");
    let y = transport_frame(conn, path)?;
    let yi = linalg::inverse(&y).ok_or(SphericalError::Monodromy(MonodromyError::NonFinite(cr(0.0))))?;
    let hm = yi.adjoint() * h0.matrix() * yi;
    Ok(TransportedForm { endpoint: *path.last().unwrap(), h: HermitianForm2::from_matrix(&hm), path: path.to_vec() })
}

fn detour_directions() -> [CVec2; 8] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        CVec2::new(c(0.0, 1.0), cr(0.0)),
        CVec2::new(cr(0.0), c(0.0, 1.0)),
        CVec2::new(cr(1.0), cr(0.0)),
        CVec2::new(cr(0.0), cr(1.0)),
        CVec2::new(c(0.0, -1.0), cr(0.0)),
        CVec2::new(cr(0.0), c(0.0, -1.0)),
        CVec2::new(c(s, s), c(-s, s)),
        CVec2::new(c(-s, s), c(s, s)),
    ]
}

/// Path candidate by id: 0 is the straight segment, the others bend through
/// a displaced midpoint.
pub fn path_candidate(p: &CVec2, q: &CVec2, id: usize) -> Vec<CVec2> {
    if id == 0 {
        return vec![*p, *q];
    }
    let dirs = detour_directions();
    let len = (q - p).norm().max(1e-3 * p.norm());
    let mid = (p + q) * cr(0.5) + dirs[(id - 1) % dirs.len()] * cr(0.5 * len);
    vec![*p, mid, *q]
}

pub const PATH_CANDIDATES: usize = 9;

/// Deterministic choice among [`path_candidate`]s by clearance.
pub fn choose_path(conn: &StandardConnection, p: &CVec2, q: &CVec2) -> (Vec<CVec2>, usize) {
    let score = |path: &[CVec2]| {
        path.windows(2).map(|w| relative_clearance(conn, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
    };
    let straight = path_candidate(p, q, 0);
    if score(&straight) >= STRAIGHT_CLEARANCE {
        return (straight, 0);
    }
    let mut best = (straight.clone(), 0, score(&straight));
    for id in 1..PATH_CANDIDATES {
        let path = path_candidate(p, q, id);
        let s = score(&path);
        if s > best.2 {
            best = (path, id, s);
        }
    }
    (best.0, best.1)
}

/// `φ = √(4 h(V, V) / h(E, E))` at a chart point, for a form `h` given at
/// `s(ξ)`, with `E = s(ξ)/(1 − c)` and `V` the coordinate lift made
/// `h`-orthogonal to `s(ξ)`.
pub fn metric_factor(h: &HermitianForm2, p: &ChartPoint, c: f64) -> f64 {
    let x = p.lift();
    let u = p.coordinate_lift();
    let hxx = h.norm_sq(&x);
    let v = u - x * (h.pairing(&u, &x) / cr(hxx));
    let e = x / cr(1.0 - c);
    (4.0 * h.norm_sq(&v) / h.norm_sq(&e)).sqrt()
}

/// Gaussian curvature `−φ⁻² Δ log φ` from a fourth-order five-point
/// stencil along each axis.
pub fn stencil_curvature<E>(mut phi: impl FnMut(Complex64) -> Result<f64, E>, z: Complex64, h: f64) -> Result<f64, E> {
    let weights = [(-2.0, -1.0), (-1.0, 16.0), (1.0, 16.0), (2.0, -1.0)];
    let p0 = phi(z)?;
    let mut lap = -60.0 * p0.ln();
    for dir in [cr(1.0), c(0.0, 1.0)] {
        for (k, w) in weights {
            lap += w * phi(z + dir * (k * h))?.ln();
        }
    }
    lap /= 12.0 * h * h;
    Ok(-lap / (p0 * p0))
}

/// Unitary flat connection with its positive definite flat form `h₀` at a
/// basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMetric {
    pub conn: StandardConnection,
    pub basepoint: CVec2,
    pub h0: HermitianForm2,
    pub c: f64,
    /// Relative invariance residual of `h₀` under the monodromy.
    pub flatness_residual: f64,
}

fn check_weights(conn: &StandardConnection) -> Result<f64, SphericalError> {
    for (i, a) in conn.traces.iter().enumerate() {
        if a.re >= 1.0 {
            return Err(SphericalError::WeightTooLarge(i, a.re));
        }
    }
    if conn.c.re >= 1.0 {
        return Err(SphericalError::CNotBelowOne(conn.c.re));
    }
    Ok(conn.c.re)
}

impl FlatMetric {
    /// Checks `h₀` against the monodromy based at `basepoint`.
    pub fn new(conn: StandardConnection, basepoint: CVec2, h0: HermitianForm2) -> Result<Self, SphericalError> {
        let c = check_weights(&conn)?;
        if !h0.is_positive_definite() {
            return Err(SphericalError::Indefinite);
        }
        let mut last = MonodromyError::NoProbe;
        for (v, _) in monodromy::probe_candidates() {
            match monodromy::monodromy_rep_with(&conn, &v, &basepoint) {
                Ok(rep) => {
                    let residual = invariance_residual(&rep.generators, &h0) / h0.frobenius_norm();
                    if residual > FLATNESS_TOL {
                        return Err(SphericalError::NotFlat(residual));
                    }
                    return Ok(FlatMetric { conn, basepoint, h0, c, flatness_residual: residual });
                }
                Err(e) => last = e,
            }
        }
        Err(last.into())
    }

    /// Extracts the flat form from the monodromy; the trivial representation
    /// uses the standard form.
    pub fn from_connection(conn: StandardConnection) -> Result<Self, SphericalError> {
        let c = check_weights(&conn)?;
        let rep = monodromy::monodromy_rep(&conn)?;
        let basepoint = CVec2::new(rep.probe_basepoint[0], rep.probe_basepoint[1]);
        let report = flat_forms::rep_flatness(&rep.generators, flat_forms::KERNEL_REL_TOL);
        let h0 = match report.kernel_dim {
            0 => return Err(SphericalError::NoFlatForm),
            1 => {
                let form = report.form.ok_or(SphericalError::NoFlatForm)?;
                if !report.is_definite() {
                    return Err(SphericalError::Indefinite);
                }
                if form.trace() < 0.0 { form.scaled(-1.0) } else { form }
            }
            4 => HermitianForm2::identity(),
            k => return Err(SphericalError::AmbiguousForm(k)),
        };
        let residual = invariance_residual(&rep.generators, &h0) / h0.frobenius_norm();
        if residual > FLATNESS_TOL {
            return Err(SphericalError::NotFlat(residual));
        }
        Ok(FlatMetric { conn, basepoint, h0, c, flatness_residual: residual })
    }

    /// Chart positions of the singular points visible in `chart`.
    pub fn cone_points(&self, chart: Chart) -> Vec<(usize, Complex64)> {
        self.conn
            .lines
            .iter()
            .enumerate()
            .filter_map(|(i, l)| chart_coordinate(l.slope, chart).map(|z| (i, z)))
            .collect()
    }

    fn distance_to_cone_points(&self, p: &ChartPoint) -> f64 {
        self.cone_points(p.chart).iter().map(|(_, z)| (z - p.z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Form at `x` along the chosen path from the basepoint.
    pub fn form_at(&self, x: &CVec2) -> Result<(TransportedForm, usize), SphericalError> {
        let (path, id) = choose_path(&self.conn, &self.basepoint, x);
        Ok((transport_form(&self.conn, &self.h0, &path)?, id))
    }

    /// Form at `x` along an explicit path starting at the basepoint.
    pub fn form_along(&self, path: &[CVec2]) -> Result<TransportedForm, SphericalError> {
        assert!((path[0] - self.basepoint).norm() <= 1e-14 * self.basepoint.norm(), "path must start at the basepoint");
        transport_form(&self.conn, &self.h0, path)
    }

    fn check_point(&self, p: &ChartPoint) -> Result<(), SphericalError> {
        if self.distance_to_cone_points(p) <= 1e-12 * (1.0 + p.z.norm()) {
            return Err(SphericalError::ConePoint);
        }
        Ok(())
    }

    pub fn conformal_factor(&self, p: ChartPoint) -> Result<ConeMetricSample, SphericalError> {
        self.check_point(&p)?;
        let (t, path_id) = self.form_at(&p.lift())?;
        let phi = metric_factor(&t.h, &p, self.c);
        if !(phi.is_finite() && phi > 0.0) {
            return Err(SphericalError::NonPositive);
        }
        Ok(ConeMetricSample { point: p, phi, path_id })
    }

    /// `φ` near a point whose form is already known, by a short local
    /// transport inside the chart.
    fn local_factor(&self, base: &TransportedForm, p: &ChartPoint) -> Result<f64, SphericalError> {
        let t = transport_form(&self.conn, &base.h, &[base.endpoint, p.lift()])?;
        let phi = metric_factor(&t.h, p, self.c);
        if !(phi.is_finite() && phi > 0.0) {
            return Err(SphericalError::NonPositive);
        }
        Ok(phi)
    }

    /// Curvature of `φ² |dξ|²` at `p` from the stencil with spacing `h_step`.
    pub fn curvature(&self, p: ChartPoint, h_step: f64) -> Result<f64, SphericalError> {
        self.check_point(&p)?;
        if self.distance_to_cone_points(&p) <= 4.0 * h_step {
            return Err(SphericalError::HitsSingularity(h_step));
        }
        let (base, _) = self.form_at(&p.lift())?;
        stencil_curvature(|z| self.local_factor(&base, &p.offset(z - p.z)), p.z, h_step)
    }

    /// `|K − 1|`.
    pub fn curvature_residual(&self, p: ChartPoint, h_step: f64) -> Result<f64, SphericalError> {
        Ok((self.curvature(p, h_step)? - 1.0).abs())
    }

    /// Cone angle over `2π` at the singular point of line `i`; see
    /// [`fit_cone_angle`].
    pub fn cone_angle_estimate(&self, line: usize) -> Result<f64, SphericalError> {
        Ok(fit_cone_angle(&self.ring_samples(line)?).alpha)
    }

    /// `(log r, mean log φ)` on the ring around the singular point of `line`.
    pub fn ring_samples(&self, line: usize) -> Result<Vec<(f64, f64)>, SphericalError> {
        let slope = self.conn.lines[line].slope;
        let chart = if slope.is_infinite() { Chart::Infinity } else { Chart::Affine };
        let centre = chart_coordinate(slope, chart).expect("line visible in its chart");
        let others = self
            .cone_points(chart)
            .into_iter()
            .filter(|&(i, _)| i != line)
            .map(|(_, z)| (z - centre).norm())
            .fold(f64::INFINITY, f64::min);
        if others <= 2.0 * RING_OUTER {
            return Err(SphericalError::HitsSingularity(RING_OUTER));
        }
        let radii: Vec<f64> = (0..RING_RADII)
            .map(|k| RING_OUTER * (RING_INNER / RING_OUTER).powf(k as f64 / (RING_RADII - 1) as f64))
            .collect();
        let mut sums = vec![0.0; RING_RADII];
        for j in 0..RING_ANGLES {
            let dir = Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.25) / RING_ANGLES as f64);
            let outer = ChartPoint { chart, z: centre + dir * radii[0] };
            let (mut current, _) = self.form_at(&outer.lift())?;
            for (k, r) in radii.iter().enumerate() {
                let p = ChartPoint { chart, z: centre + dir * *r };
                current = transport_form(&self.conn, &current.h, &[current.endpoint, p.lift()])?;
                sums[k] += metric_factor(&current.h, &p, self.c).ln();
            }
        }
        Ok(radii.iter().zip(&sums).map(|(r, s)| (r.ln(), s / RING_ANGLES as f64)).collect())
    }
}

/// Result of [`fit_cone_angle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeAngleFit {
    /// `slope + 1` from the refined model.
    pub alpha: f64,
    /// `slope + 1` from a straight line fit.
    pub raw_alpha: f64,
    /// Coefficient of the `r^{2α}` term.
    pub correction: f64,
}

fn least_squares<const N: usize>(rows: &[([f64; N], f64)]) -> [f64; N] {
    let a = nalgebra::DMatrix::from_fn(rows.len(), N, |i, j| rows[i].0[j]);
    let b = nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let x = a.svd(true, true).solve(&b, 1e-14).expect("full SVD");
    std::array::from_fn(|j| x[j])
}

/// Fits `(log r, mean log φ)` samples. A spherical cone point of angle `2πα`
/// has angular mean `c₀ + (α − 1) log r − c₁ r^{2α} + …`; the straight fit is
/// refined by including the `r^{2α}` term, iterating on `α`.
pub fn fit_cone_angle(samples: &[(f64, f64)]) -> ConeAngleFit {
    let [_, slope] = least_squares(&samples.iter().map(|&(x, y)| ([1.0, x], y)).collect::<Vec<_>>());
    let raw_alpha = slope + 1.0;
    let mut alpha = raw_alpha;
    let mut correction = 0.0;
    for _ in 0..50 {
        let rows: Vec<([f64; 3], f64)> = samples.iter().map(|&(x, y)| ([1.0, x, (2.0 * alpha * x).exp()], y)).collect();
        let [_, s, c1] = least_squares(&rows);
        let next = s + 1.0;
        correction = -c1;
        let done = (next - alpha).abs() < 1e-13;
        alpha = next;
        if done {
            break;
        }
    }
    ConeAngleFit { alpha, raw_alpha, correction }
}

/// `1 − α_j < Σ_{i≠j} (1 − α_i)` for every `j`.
pub fn cone_angles_admissible(angles: &[f64]) -> bool {
    let d: Vec<f64> = angles.iter().map(|a| 1.0 - a).collect();
    let total: f64 = d.iter().sum();
    d.iter().all(|&dj| dj < total - dj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::{dihedral_connection, stable_weights, three_line_connection};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_connection() -> StandardConnection {
        let mut conn = dihedral_connection(0.3);
        conn = StandardConnection::new(conn.lines.clone(), vec![CMat2::zeros(); 4]);
        conn
    }

    /// Fixed-step RK4 on `dH/ds = −H Ω(v) − Ω(v)† H` along a straight segment.
    fn direct_form(conn: &StandardConnection, h0: &CMat2, p: &CVec2, q: &CVec2, steps: usize) -> CMat2 {
        let v = q - p;
        let rhs = |s: f64, h: &CMat2| {
            let x = p + v * cr(s);
            let om = conn.omega_along(&x, &v);
            -(h * om) - om.adjoint() * h
        };
        let mut h = *h0;
        let dt = 1.0 / steps as f64;
        for k in 0..steps {
            let s = k as f64 * dt;
            let k1 = rhs(s, &h);
            let k2 = rhs(s + dt / 2.0, &(h + k1 * cr(dt / 2.0)));
            let k3 = rhs(s + dt / 2.0, &(h + k2 * cr(dt / 2.0)));
            let k4 = rhs(s + dt, &(h + k3 * cr(dt)));
            h += (k1 + k2 * cr(2.0) + k3 * cr(2.0) + k4) * cr(dt / 6.0);
        }
        h
    }

    #[test]
    fn frame_transport_matches_direct_integration() {
        let conn = dihedral_connection(0.3);
        let p = CVec2::new(c(1.0, 0.2), c(0.3, 0.9));
        let q = CVec2::new(c(0.4, 0.7), c(1.0, -0.1));
        let h0 = HermitianForm2::identity();
        let t = transport_form(&conn, &h0, &[p, q]).unwrap();
        let direct = direct_form(&conn, &h0.matrix(), &p, &q, 4000);
        assert!((t.h.matrix() - direct).norm() < 1e-8);
        assert!(t.h.is_positive_definite());
        let y = transport_frame(&conn, &[p, q]).unwrap();
        let det_law = linalg::det(&y).norm().powi(-2);
        assert!((t.h.det() - det_law).abs() < 1e-10);
    }

    #[test]
    fn trivial_connection_keeps_form_constant() {
        let conn = zero_connection();
        let h0 = HermitianForm2::from_coords([2.0, 0.3, -0.4, 0.1]);
        let p = CVec2::new(c(1.0, 0.1), c(0.2, 0.5));
        let q = CVec2::new(c(-0.3, 1.0), c(0.7, 0.0));
        let t = transport_form(&conn, &h0, &[p, q]).unwrap();
        for k in 0..4 {
            assert!((t.h.x[k] - h0.x[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn contractible_loop_returns_form() {
        let conn = dihedral_connection(0.3);
        let p = CVec2::new(c(1.0, 0.4), c(0.5, 0.2));
        let d1 = CVec2::new(c(0.05, 0.0), c(0.0, 0.03));
        let d2 = CVec2::new(c(0.0, 0.04), c(-0.02, 0.0));
        let path = [p, p + d1, p + d1 + d2, p + d2, p];
        let h0 = HermitianForm2::from_coords([1.5, 0.2, 0.1, -0.3]);
        let t = transport_form(&conn, &h0, &path).unwrap();
        for k in 0..4 {
            assert!((t.h.x[k] - h0.x[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn round_metric_stencil() {
        let round = |z: Complex64| Ok::<f64, ()>(2.0 / (1.0 + z.norm_sqr()));
        for z in [c(0.0, 0.0), c(0.4, 0.7), c(-1.3, 0.2)] {
            let k = stencil_curvature(round, z, 1e-3).unwrap();
            assert!((k - 1.0).abs() < 1e-6, "K = {k}");
        }
    }

    #[test]
    fn trivial_connection_gives_round_metric() {
        let m = FlatMetric::from_connection(zero_connection()).unwrap();
        for z in [c(0.3, 0.2), c(-2.0, 0.5), c(0.1, -1.7)] {
            let s = m.conformal_factor(ChartPoint::affine(z)).unwrap();
            assert!((s.phi - 2.0 / (1.0 + z.norm_sqr())).abs() < 1e-12);
        }
        let fit = fit_cone_angle(&m.ring_samples(0).unwrap());
        assert!((fit.raw_alpha - 1.0).abs() < 1e-4, "raw alpha = {}", fit.raw_alpha);
        assert!((fit.alpha - 1.0).abs() < 1e-6, "alpha = {}", fit.alpha);
        assert!((fit.correction - 1.0).abs() < 1e-3);
    }

    #[test]
    fn dihedral_metric_is_spherical() {
        let m = FlatMetric::from_connection(dihedral_connection(0.3)).unwrap();
        let s = m.conformal_factor(ChartPoint::affine(c(0.0, 1.0))).unwrap();
        assert!(s.phi.is_finite() && s.phi > 0.0);
        let r = m.curvature_residual(ChartPoint::affine(c(0.4, 0.7)), 1e-3).unwrap();
        assert!(r < 1e-3, "|K - 1| = {r}");
        let coarse = m.curvature_residual(ChartPoint::affine(c(0.4, 0.7)), 1e-2).unwrap();
        assert!(r <= coarse.max(1e-7));
    }

    #[test]
    fn dihedral_cone_angles() {
        let m = FlatMetric::from_connection(dihedral_connection(0.3)).unwrap();
        for i in 0..4 {
            let alpha = m.cone_angle_estimate(i).unwrap();
            assert!((alpha - 0.7).abs() < 0.7e-3, "line {i}: alpha = {alpha}");
        }
    }

    #[test]
    fn three_line_cone_angle() {
        let half = cr(0.5);
        let m = FlatMetric::from_connection(three_line_connection(half, half, half)).unwrap();
        let alpha = m.cone_angle_estimate(0).unwrap();
        assert!((alpha - 0.5).abs() < 0.5e-3, "alpha = {alpha}");
    }

    #[test]
    fn fit_recovers_synthetic_cone() {
        let alpha: f64 = 0.37;
        let samples: Vec<(f64, f64)> = (0..9)
            .map(|k| {
                let r = 1e-2 * 0.1_f64.powf(k as f64 / 8.0);
                (r.ln(), 0.2 + (alpha - 1.0) * r.ln() - (1.0 + 0.5 * r.powf(2.0 * alpha)).ln())
            })
            .collect();
        let fit = fit_cone_angle(&samples);
        assert!((fit.alpha - alpha).abs() < 1e-4, "{fit:?}");
        assert!((fit.raw_alpha - alpha).abs() > 1e-3);
    }

    #[test]
    fn scaling_form_leaves_factor_unchanged() {
        let m = FlatMetric::from_connection(dihedral_connection(0.3)).unwrap();
        let scaled = FlatMetric::new(m.conn.clone(), m.basepoint, m.h0.scaled(3.7)).unwrap();
        let p = ChartPoint::affine(c(0.6, -0.4));
        let a = m.conformal_factor(p).unwrap().phi;
        let b = scaled.conformal_factor(p).unwrap().phi;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn factor_is_path_independent() {
        let m = FlatMetric::from_connection(dihedral_connection(0.3)).unwrap();
        let p = ChartPoint::affine(c(0.5, 0.6));
        let x = p.lift();
        let phis: Vec<f64> = (0..PATH_CANDIDATES)
            .filter_map(|id| m.form_along(&path_candidate(&m.basepoint, &x, id)).ok())
            .map(|t| metric_factor(&t.h, &p, m.c))
            .collect();
        assert!(phis.len() >= 4);
        for w in phis.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(FlatMetric::from_connection(dihedral_connection(0.7)), Err(SphericalError::CNotBelowOne(_))));
        let indefinite = three_line_connection(cr(0.9), cr(0.2), cr(0.2));
        assert_eq!(FlatMetric::from_connection(indefinite), Err(SphericalError::Indefinite));
        let m = FlatMetric::from_connection(dihedral_connection(0.3)).unwrap();
        assert_eq!(m.conformal_factor(ChartPoint::affine(cr(1.0))), Err(SphericalError::ConePoint));
        assert!(matches!(
            FlatMetric::new(m.conn.clone(), m.basepoint, HermitianForm2::from_coords([1.0, 0.5, 0.0, 0.0])),
            Err(SphericalError::NotFlat(_))
        ));
        let heavy = dihedral_connection(1.2);
        assert!(matches!(FlatMetric::from_connection(heavy), Err(SphericalError::WeightTooLarge(0, _))));
    }

    #[test]
    fn cone_angle_admissibility_examples() {
        assert!(cone_angles_admissible(&[0.7, 0.7, 0.7, 0.7]));
        assert!(!cone_angles_admissible(&[0.1, 0.9, 0.9]));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(3..6);
            let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let a: Vec<f64> = alpha.iter().map(|x| 1.0 - x).collect();
            assert_eq!(cone_angles_admissible(&alpha), stable_weights(&a));
        }
    }
}

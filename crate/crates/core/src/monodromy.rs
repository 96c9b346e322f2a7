//! Monodromy of standard connections.
//!
//! The connection is restricted to an affine probe line `x₀ + t·v`, giving a
//! Fuchsian system `Y′ = Σ A_i/(t − ξ_i) · Y` on the t-plane. Generators are
//! obtained by integrating this system along keyhole loops based at `t = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dunkl::StandardConnection;
use crate::herm_geom::ProjLine;
use crate::linalg::{self, c, cr, CMat2, CVec2};

/// Distance-to-Z threshold below which a trace counts as an integer.
pub const INTEGER_TOL: f64 = 1e-9;
pub const ODE_ATOL: f64 = 1e-12;
pub const ODE_RTOL: f64 = 1e-12;
/// Common invariant line test `‖M v ∧ v‖ / (‖M v‖‖v‖)`.
pub const LINE_TOL: f64 = 1e-7;

const GOLDEN: f64 = 1.618_033_988_749_895;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("probe direction is parallel to line {0}")]
    ParallelProbe(usize),
    #[error("probe basepoint lies on line {0}")]
    BasepointOnLine(usize),
    #[error("coincident poles {0} and {1}")]
    CoincidentPoles(usize, usize),
    #[error("poles {i} and {j} at distance {distance:e} are too close for keyhole radius {radius:e}")]
    PolesTooClose { i: usize, j: usize, distance: f64, radius: f64 },
    #[error("step size underflow at t = {0}")]
    StepUnderflow(Complex64),
    #[error("non-finite state at t = {0}")]
    NonFinite(Complex64),
    #[error("no admissible probe line found")]
    NoProbe,
}

/// `Y′ = Σ A_i/(t − ξ_i) · Y` with basepoint `t₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuchsianSystem {
    pub poles: Vec<Complex64>,
    pub residues: Vec<CMat2>,
    pub basepoint: Complex64,
    pub min_pole_distance: f64,
}

impl FuchsianSystem {
    pub fn new(poles: Vec<Complex64>, residues: Vec<CMat2>, basepoint: Complex64) -> Result<Self, MonodromyError> {
        assert_eq!(poles.len(), residues.len(), "one residue per pole");
        let scale = poles.iter().map(|p| p.norm()).fold(basepoint.norm(), f64::max).max(1.0);
        let mut min_pole_distance = f64::INFINITY;
        for i in 0..poles.len() {
            if (poles[i] - basepoint).norm() <= 1e-12 * scale {
                return Err(MonodromyError::BasepointOnLine(i));
            }
            for j in 0..i {
                let d = (poles[i] - poles[j]).norm();
                if d <= 1e-12 * scale {
                    return Err(MonodromyError::CoincidentPoles(j, i));
                }
                min_pole_distance = min_pole_distance.min(d);
            }
        }
        Ok(FuchsianSystem { poles, residues, basepoint, min_pole_distance })
    }

    /// Coefficient matrix `Σ A_i/(t − ξ_i)`.
    pub fn coefficient(&self, t: Complex64) -> CMat2 {
        self.poles.iter().zip(&self.residues).map(|(p, a)| a / (t - p)).sum()
    }

    pub fn distance_to_poles(&self, t: Complex64) -> f64 {
        self.poles.iter().map(|p| (t - p).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Pulls a standard connection back along `t ↦ x₀ + t·v`, with `t₀ = 0`.
pub fn restrict_to_line(conn: &StandardConnection, v: &CVec2, x0: &CVec2) -> Result<FuchsianSystem, MonodromyError> {
    let mut poles = Vec::with_capacity(conn.len());
    for (i, l) in conn.lines.iter().enumerate() {
        let f = l.defining_form();
        let lv = l.eval_form(v);
        let lx = l.eval_form(x0);
        if lv.norm() <= 1e-12 * f.norm() * v.norm() {
            return Err(MonodromyError::ParallelProbe(i));
        }
        if lx.norm() <= 1e-12 * f.norm() * x0.norm() {
            return Err(MonodromyError::BasepointOnLine(i));
        }
        poles.push(-lx / lv);
    }
    FuchsianSystem::new(poles, conn.residues.clone(), c(0.0, 0.0))
}

/// Closed polyline based at the system basepoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopPath {
    pub vertices: Vec<Complex64>,
    pub target: usize,
    pub counter_clockwise: bool,
    /// Guaranteed clearance from every pole.
    pub r_min: f64,
}

impl LoopPath {
    pub fn reversed(&self) -> LoopPath {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        LoopPath { vertices, target: self.target, counter_clockwise: !self.counter_clockwise, r_min: self.r_min }
    }

    /// Inserts the midpoint of every segment.
    pub fn refined(&self) -> LoopPath {
        let mut vertices = Vec::with_capacity(2 * self.vertices.len());
        for w in self.vertices.windows(2) {
            vertices.push(w[0]);
            vertices.push((w[0] + w[1]) * 0.5);
        }
        vertices.push(*self.vertices.last().unwrap());
        LoopPath { vertices, ..self.clone() }
    }

    pub fn winding_number(&self, p: Complex64) -> i64 {
        let total: f64 = self.vertices.windows(2).map(|w| ((w[1] - p) / (w[0] - p)).arg()).sum();
        (total / (2.0 * PI)).round() as i64
    }

    /// Smallest distance from the polyline to `p`.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                let s = if d.norm_sqr() == 0.0 { 0.0 } else { ((p - w[0]) * d.conj()).re / d.norm_sqr() };
                (w[0] + d * s.clamp(0.0, 1.0) - p).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopOptions {
    /// Keyhole radius as a fraction of `min(pole spacing, basepoint clearance)`.
    pub radius_fraction: f64,
    /// Polygon sides used for a full circle.
    pub circle_segments: usize,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions { radius_fraction: 0.25, circle_segments: 48 }
    }
}

/// Angular order of the poles seen from the basepoint: counter-clockwise,
/// starting after the widest empty sector, nearer poles first on ties.
pub fn angular_order(sys: &FuchsianSystem) -> Vec<usize> {
    let n = sys.poles.len();
    let angle = |i: usize| {
        let a = (sys.poles[i] - sys.basepoint).arg();
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    };
    let dist = |i: usize| (sys.poles[i] - sys.basepoint).norm();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| angle(i).total_cmp(&angle(j)).then(dist(i).total_cmp(&dist(j))));
    if n < 2 {
        return idx;
    }
    let mut cut = 0;
    let mut widest = -1.0;
    for k in 0..n {
        let a = angle(idx[k]);
        let b = if k + 1 < n { angle(idx[k + 1]) } else { angle(idx[0]) + 2.0 * PI };
        if b - a > widest + 1e-12 {
            widest = b - a;
            cut = (k + 1) % n;
        }
    }
    idx.rotate_left(cut);
    idx
}

fn arc(center: Complex64, radius: f64, from: f64, sweep: f64, segments: usize) -> Vec<Complex64> {
    (0..=segments)
        .map(|k| center + Complex64::from_polar(radius, from + sweep * k as f64 / segments as f64))
        .collect()
}

/// Keyhole loops around every pole in [`angular_order`], with default options.
pub fn canonical_loops(sys: &FuchsianSystem) -> Result<Vec<LoopPath>, MonodromyError> {
    canonical_loops_with(sys, &LoopOptions::default())
}

pub fn canonical_loops_with(sys: &FuchsianSystem, opts: &LoopOptions) -> Result<Vec<LoopPath>, MonodromyError> {
    let t0 = sys.basepoint;
    let clearance = sys.distance_to_poles(t0);
    let r = opts.radius_fraction * sys.min_pole_distance.min(clearance);
    let scale = sys.poles.iter().map(|p| (p - t0).norm()).fold(0.0, f64::max);
    if !(r > 1e-10 * scale) {
        let (i, j, distance) = closest_pair(sys);
        return Err(MonodromyError::PolesTooClose { i, j, distance, radius: r });
    }
    let full = opts.circle_segments.max(8);
    let half = full / 2;
    let mut loops = Vec::with_capacity(sys.poles.len());
    for &k in &angular_order(sys) {
        let p = sys.poles[k];
        let dk = (p - t0).norm();
        let u = (p - t0) / dk;
        // Outbound ray with semicircle detours around poles near it.
        let mut near: Vec<(f64, f64)> = sys
            .poles
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .filter_map(|(_, q)| {
                let rel = (q - t0) * u.conj();
                (rel.re > 0.0 && rel.re < dk && rel.im.abs() < 0.5 * r).then_some((rel.re, rel.im))
            })
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = vec![t0];
        for (s, side) in near {
            // Bulge away from the pole: a sweep of +π from behind passes on the
            // right, −π on the left. A pole exactly on the ray is passed on its left.
            let sweep = if side > 0.0 { PI } else { -PI };
            out.extend(arc(t0 + u * s, r, (-u).arg(), sweep, half));
        }
        let entry = p - u * r;
        out.push(entry);
        let mut vertices = out.clone();
        vertices.extend(arc(p, r, (-u).arg(), 2.0 * PI, full).into_iter().skip(1));
        out.reverse();
        vertices.extend(out.into_iter().skip(1));
        loops.push(LoopPath { vertices, target: k, counter_clockwise: true, r_min: 0.5 * r });
    }
    Ok(loops)
}

fn closest_pair(sys: &FuchsianSystem) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for i in 0..sys.poles.len() {
        for j in 0..i {
            let d = (sys.poles[i] - sys.poles[j]).norm();
            if d < best.2 {
                best = (j, i, d);
            }
        }
    }
    best
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Integrates along the segment `p → q`, updating `y` in place.
pub fn integrate_segment(sys: &FuchsianSystem, p: Complex64, q: Complex64, y: &mut CMat2) -> Result<(), MonodromyError> {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return Ok(());
    }
    let f = |s: f64, y: &CMat2| sys.coefficient(p + d * s) * d * y;
    let max_step = |s: f64| 0.5 * sys.distance_to_poles(p + d * s) / len;
    let mut s = 0.0;
    let mut h = max_step(0.0).min(1.0);
    let mut k1 = f(0.0, y);
    while s < 1.0 {
        h = h.min(max_step(s)).min(1.0 - s);
        if h < 1e-14 {
            return Err(MonodromyError::StepUnderflow(p + d * s));
        }
        let k2 = f(s + C2 * h, &(*y + k1 * cr(h * A21)));
        let k3 = f(s + C3 * h, &(*y + (k1 * cr(A31) + k2 * cr(A32)) * cr(h)));
        let k4 = f(s + C4 * h, &(*y + (k1 * cr(A41) + k2 * cr(A42) + k3 * cr(A43)) * cr(h)));
        let k5 = f(s + C5 * h, &(*y + (k1 * cr(A51) + k2 * cr(A52) + k3 * cr(A53) + k4 * cr(A54)) * cr(h)));
        let k6 = f(s + h, &(*y + (k1 * cr(A61) + k2 * cr(A62) + k3 * cr(A63) + k4 * cr(A64) + k5 * cr(A65)) * cr(h)));
        let y_new = *y + (k1 * cr(B1) + k3 * cr(B3) + k4 * cr(B4) + k5 * cr(B5) + k6 * cr(B6)) * cr(h);
        let k7 = f(s + h, &y_new);
        let err = (k1 * cr(E1) + k3 * cr(E3) + k4 * cr(E4) + k5 * cr(E5) + k6 * cr(E6) + k7 * cr(E7)) * cr(h);
        let mut ratio = 0.0_f64;
        for (e, (a, b)) in err.iter().zip(y.iter().zip(y_new.iter())) {
            let sc = ODE_ATOL + ODE_RTOL * a.norm().max(b.norm());
            ratio = ratio.max(e.norm() / sc);
        }
        if !ratio.is_finite() {
            return Err(MonodromyError::NonFinite(p + d * s));
        }
        if ratio <= 1.0 {
            s += h;
            *y = y_new;
            k1 = k7;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(MonodromyError::NonFinite(q));
    }
    Ok(())
}

/// Fundamental solution `Y(end)` along a polyline with `Y(start) = Id`.
pub fn transport_polyline(sys: &FuchsianSystem, vertices: &[Complex64]) -> Result<CMat2, MonodromyError> {
    let mut y = CMat2::identity();
    for w in vertices.windows(2) {
        integrate_segment(sys, w[0], w[1], &mut y)?;
    }
    Ok(y)
}

/// Monodromy along a closed loop.
pub fn transport(sys: &FuchsianSystem, path: &LoopPath) -> Result<CMat2, MonodromyError> {
    transport_polyline(sys, &path.vertices)
}

/// Generators ordered so that `M_1 ⋯ M_n = exp(2πic)·Id`, with the probe
/// data that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyRep {
    pub generators: Vec<CMat2>,
    /// Line index of every generator.
    pub line_index: Vec<usize>,
    /// Residue trace of the line of every generator.
    pub traces: Vec<Complex64>,
    pub c: Complex64,
    pub poles: Vec<Complex64>,
    pub probe_direction: [Complex64; 2],
    pub probe_basepoint: [Complex64; 2],
    /// Some trace is an integer, so the eigenvalue test does not apply.
    pub resonant: bool,
}

impl MonodromyRep {
    /// Representation given directly by generator matrices.
    pub fn from_generators(generators: Vec<CMat2>, traces: Vec<Complex64>, c: Complex64) -> Self {
        let n = generators.len();
        let resonant = traces.iter().any(|a| is_integer(*a));
        MonodromyRep {
            generators,
            line_index: (0..n).collect(),
            traces,
            c,
            poles: Vec::new(),
            probe_direction: [Complex64::new(1.0, 0.0); 2],
            probe_basepoint: [Complex64::new(0.0, 0.0); 2],
            resonant,
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `G⁻¹ M_i G` for every generator.
    pub fn conjugated(&self, g: &CMat2) -> Option<MonodromyRep> {
        let gi = linalg::inverse(g)?;
        let mut out = self.clone();
        out.generators = self.generators.iter().map(|m| gi * m * g).collect();
        Some(out)
    }
}

fn is_integer(a: Complex64) -> bool {
    a.im.abs() <= INTEGER_TOL && (a.re - a.re.round()).abs() <= INTEGER_TOL
}

/// Probe data `(v, x₀)` tried in order by [`monodromy_rep`].
pub fn probe_candidates() -> Vec<(CVec2, CVec2)> {
    let one = Complex64::new(1.0, 0.0);
    let mut out = vec![(CVec2::new(one, Complex64::new(GOLDEN, 0.0)), CVec2::new(one, Complex64::new(GOLDEN * GOLDEN, 0.0)))];
    for k in 1..=8 {
        let eps = Complex64::from_polar(0.1 * k as f64, 0.7 * k as f64);
        out.push((CVec2::new(one, Complex64::new(GOLDEN, 0.0) + eps), CVec2::new(one, Complex64::new(GOLDEN * GOLDEN, 0.0) - eps)));
    }
    out
}

/// Smallest ratio of pole spacing and basepoint clearance to pole spread; a
/// cheap conditioning measure of a probe.
fn probe_quality(sys: &FuchsianSystem) -> f64 {
    let spread = sys.poles.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
    sys.min_pole_distance.min(sys.distance_to_poles(sys.basepoint)) / spread
}

pub fn monodromy_rep(conn: &StandardConnection) -> Result<MonodromyRep, MonodromyError> {
    let mut last = MonodromyError::NoProbe;
    for (v, x0) in probe_candidates() {
        match restrict_to_line(conn, &v, &x0) {
            Ok(sys) if probe_quality(&sys) > 1e-3 => return monodromy_rep_with(conn, &v, &x0),
            Ok(_) => {}
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Monodromy for an explicit probe line.
pub fn monodromy_rep_with(conn: &StandardConnection, v: &CVec2, x0: &CVec2) -> Result<MonodromyRep, MonodromyError> {
    let sys = restrict_to_line(conn, v, x0)?;
    // Travelling the loops in counter-clockwise order sweeps out a large
    // positive circle; transports compose right to left, so the generator
    // list runs the other way.
    let mut loops = canonical_loops(&sys)?;
    loops.reverse();
    let generators = loops.iter().map(|l| transport(&sys, l)).collect::<Result<Vec<_>, _>>()?;
    let line_index: Vec<usize> = loops.iter().map(|l| l.target).collect();
    let traces: Vec<Complex64> = line_index.iter().map(|&i| conn.traces[i]).collect();
    let resonant = traces.iter().any(|a| is_integer(*a));
    Ok(MonodromyRep {
        generators,
        line_index,
        traces,
        c: conn.c,
        poles: sys.poles.clone(),
        probe_direction: [v[0], v[1]],
        probe_basepoint: [x0[0], x0[1]],
        resonant,
    })
}

/// `‖M_1 ⋯ M_n − exp(2πic)·Id‖_F`.
pub fn product_relation_residual(rep: &MonodromyRep) -> f64 {
    let prod = rep.generators.iter().fold(CMat2::identity(), |acc, m| acc * m);
    let target = (Complex64::new(0.0, 2.0 * PI) * rep.c).exp();
    (prod - CMat2::identity() * target).norm()
}

/// Largest distance between the spectrum of `M_i` and `{1, exp(2πi a_i)}`;
/// `None` when some trace is an integer.
pub fn eigenvalue_residual(rep: &MonodromyRep) -> Option<f64> {
    if rep.resonant {
        return None;
    }
    let mut worst = 0.0_f64;
    for (m, a) in rep.generators.iter().zip(&rep.traces) {
        let ev = linalg::eigen(m).values;
        let target = [Complex64::new(1.0, 0.0), (Complex64::new(0.0, 2.0 * PI) * a).exp()];
        let straight = (ev[0] - target[0]).norm().max((ev[1] - target[1]).norm());
        let crossed = (ev[0] - target[1]).norm().max((ev[1] - target[0]).norm());
        worst = worst.max(straight.min(crossed));
    }
    Some(worst)
}

/// `max_i |det M_i − exp(2πi a_i)|`.
pub fn determinant_residual(rep: &MonodromyRep) -> f64 {
    rep.generators
        .iter()
        .zip(&rep.traces)
        .map(|(m, a)| (linalg::det(m) - (Complex64::new(0.0, 2.0 * PI) * a).exp()).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetCheck {
    /// Bit `i` set iff line `i` belongs to the subset.
    pub mask: u32,
    /// `Σ_{i∈I} a_i − Σ_{i∉I} a_i`.
    pub value: f64,
    pub distance_to_2z: f64,
    pub positive_even: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityReport {
    pub distance_to_z: Vec<f64>,
    /// Every `a_i ∉ Z`.
    pub non_integer: bool,
    pub subsets: Vec<SubsetCheck>,
    /// No subset difference lies in `2Z`.
    pub no_even_difference: bool,
    /// No subset difference is a positive even integer.
    pub no_positive_even_difference: bool,
    /// `Σ a_i ≠ 0`.
    pub sum_nonzero: bool,
    /// `a_j ≠ Σ_{i≠j} a_i` for every `j`.
    pub no_balanced_index: bool,
    /// Both integrality conditions hold, so the holonomy is irreducible.
    pub irreducible_by_differences: bool,
    /// Non-integer traces with nonzero sum, no balanced index and no positive
    /// even difference, the weaker sufficient condition.
    pub irreducible_by_positive_even: bool,
}

fn distance_to_lattice(x: f64, step: f64) -> f64 {
    (x - step * (x / step).round()).abs()
}

pub fn irreducibility_conditions(a: &[f64]) -> IrreducibilityReport {
    assert!(a.len() <= 20, "subset scan limited to 20 traces");
    let n = a.len();
    let distance_to_z: Vec<f64> = a.iter().map(|&x| distance_to_lattice(x, 1.0)).collect();
    let non_integer = distance_to_z.iter().all(|&d| d > INTEGER_TOL);
    let total: f64 = a.iter().sum();
    let subsets: Vec<SubsetCheck> = (0..1u32 << n)
        .map(|mask| {
            let inside: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).sum();
            let value = 2.0 * inside - total;
            let distance_to_2z = distance_to_lattice(value, 2.0);
            let positive_even = distance_to_2z <= INTEGER_TOL && value > 1.0;
            SubsetCheck { mask, value, distance_to_2z, positive_even }
        })
        .collect();
    let no_even_difference = subsets.iter().all(|s| s.distance_to_2z > INTEGER_TOL);
    let no_positive_even_difference = subsets.iter().all(|s| !s.positive_even);
    let sum_nonzero = total.abs() > INTEGER_TOL;
    let no_balanced_index = a.iter().all(|&x| (2.0 * x - total).abs() > INTEGER_TOL);
    IrreducibilityReport {
        irreducible_by_differences: non_integer && no_even_difference,
        irreducible_by_positive_even: non_integer && sum_nonzero && no_balanced_index && no_positive_even_difference,
        distance_to_z,
        non_integer,
        subsets,
        no_even_difference,
        no_positive_even_difference,
        sum_nonzero,
        no_balanced_index,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducibilityReport {
    pub invariant_line: Option<ProjLine>,
    /// The first generator has a single eigenvalue and is not scalar.
    pub defective_generator: bool,
    /// Largest wedge ratio of the best candidate.
    pub best_ratio: f64,
}

/// Searches for a complex line invariant under every generator among the
/// eigenvectors of the first non-scalar generator.
pub fn reducibility_detect(rep: &MonodromyRep) -> ReducibilityReport {
    let pivot = rep
        .generators
        .iter()
        .find(|m| linalg::max_abs(&(*m - CMat2::identity() * (linalg::trace(m) * 0.5))) > 1e-9 * linalg::max_abs(m));
    let Some(pivot) = pivot else {
        // All generators scalar: every line is invariant.
        return ReducibilityReport {
            invariant_line: Some(ProjLine::infinity()),
            defective_generator: false,
            best_ratio: 0.0,
        };
    };
    let eig = linalg::eigen(pivot);
    let mut best: Option<(f64, CVec2)> = None;
    for v in eig.vectors {
        let ratio = rep
            .generators
            .iter()
            .map(|m| linalg::wedge_ratio(&(m * v), &v))
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
            best = Some((ratio, v));
        }
    }
    let (best_ratio, v) = best.unwrap();
    ReducibilityReport {
        invariant_line: (best_ratio < LINE_TOL).then(|| ProjLine::through(&v)),
        defective_generator: eig.defective,
        best_ratio,
    }
}

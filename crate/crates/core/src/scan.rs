//! Parameter scans over `(λ, a)`, dihedral windows, persistence paths and the
//! search for a connection preserving no Hermitian form.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dunkl::{self, dihedral_connection, scaled_dunkl_connection, StandardConnection, WeightedLines};
use crate::flat_forms::{self, rep_flatness, FlatnessReport};
use crate::herm_geom::ProjLine;
use crate::monodromy;

pub const TOOL_NAME: &str = "dunkl-lab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_COLUMNS: [&str; 11] = [
    "lambda_re",
    "lambda_im",
    "a",
    "det_q",
    "min_eig_q",
    "kernel_dim",
    "sig_p",
    "sig_q",
    "degenerate",
    "status",
    "runtime_ms",
];

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rectangle `re × im` in the λ-plane sampled at `resolution` points per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaGrid {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub resolution: [usize; 2],
    /// Points within this distance of 0 or 1, or beyond its inverse, are
    /// excluded.
    pub exclusion_radius: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid { re: [-1.5, 2.5], im: [-2.0, 2.0], resolution: [9, 9], exclusion_radius: 0.05 }
    }
}

impl LambdaGrid {
    fn axis(range: [f64; 2], n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![0.5 * (range[0] + range[1])];
        }
        (0..n).map(|k| range[0] + (range[1] - range[0]) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn is_excluded(&self, lambda: Complex64) -> bool {
        let r = self.exclusion_radius;
        lambda.norm() < r || (lambda - 1.0).norm() < r || lambda.norm() > 1.0 / r
    }
}

/// `min, min + step, …` up to `max` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ARange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for ARange {
    fn default() -> Self {
        ARange { min: 0.1, max: 0.9, step: 0.1 }
    }
}

impl ARange {
    pub fn single(a: f64) -> Self {
        ARange { min: a, max: a, step: 1.0 }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.min + self.step * k as f64).collect()
    }
}

/// Residue traces `a · w_i` on the lines `0, ∞, 1, λ` followed by
/// `extra_slopes`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightProfile {
    #[default]
    EqualFour,
    Explicit { weights: Vec<f64>, extra_slopes: Vec<Complex64> },
}

impl WeightProfile {
    pub fn weights(&self) -> Vec<f64> {
        match self {
            WeightProfile::EqualFour => vec![1.0; 4],
            WeightProfile::Explicit { weights, .. } => weights.clone(),
        }
    }

    pub fn lines(&self, lambda: Complex64) -> Vec<ProjLine> {
        let mut lines = vec![ProjLine::real(0.0), ProjLine::infinity(), ProjLine::real(1.0), ProjLine::slope(lambda)];
        if let WeightProfile::Explicit { extra_slopes, .. } = self {
            lines.extend(extra_slopes.iter().map(|&s| ProjLine::slope(s)));
        }
        lines
    }

    fn extra_slopes(&self) -> &[Complex64] {
        match self {
            WeightProfile::EqualFour => &[],
            WeightProfile::Explicit { extra_slopes, .. } => extra_slopes,
        }
    }

    fn validate(&self) -> Result<(), ScanError> {
        let w = self.weights();
        let n = 4 + self.extra_slopes().len();
        if w.len() != n {
            return Err(ScanError::Config(format!("{} weights for {n} lines", w.len())));
        }
        if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(ScanError::Config("weights must be positive".into()));
        }
        if !dunkl::stable_weights(&w) {
            return Err(ScanError::Config("weight profile is not stable".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampling {
    #[default]
    Grid,
    /// Uniform random λ in the rectangle, drawn from the seed.
    Random { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Kernel threshold relative to the largest eigenvalue of `Q`.
    pub kernel_rel: f64,
    /// Normalized margin below which a point is reported inside the zero set.
    pub inside_z: f64,
    /// Agreement required when replaying a record.
    pub replay: f64,
    /// `min_eig_q` below this counts as a flat form in path series.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { kernel_rel: flat_forms::KERNEL_REL_TOL, inside_z: 1e-6, replay: 1e-9, zero: 1e-8 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub lambda: LambdaGrid,
    pub a: ARange,
    pub profile: WeightProfile,
    pub sampling: Sampling,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output: Option<String>,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub json: bool,
    /// Fill `runtime_ms`; off by default so output is reproducible.
    pub timing: bool,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), ScanError> {
        let g = &self.lambda;
        if !(g.exclusion_radius > 0.0 && g.exclusion_radius < 1.0) {
            return Err(ScanError::Config("exclusion radius must lie in (0, 1)".into()));
        }
        if g.resolution.contains(&0) || g.re[0] > g.re[1] || g.im[0] > g.im[1] {
            return Err(ScanError::Config("empty λ grid".into()));
        }
        if let Sampling::Random { count: 0 } = self.sampling {
            return Err(ScanError::Config("random sampling needs a positive count".into()));
        }
        let a = &self.a;
        if !(a.step > 0.0) || a.min > a.max || !a.min.is_finite() || !a.max.is_finite() {
            return Err(ScanError::Config("empty a range".into()));
        }
        self.profile.validate()
    }

    /// Scan points in output order: λ (real part outer) then `a`.
    pub fn points(&self) -> Vec<(Complex64, f64)> {
        let lambdas: Vec<Complex64> = match self.sampling {
            Sampling::Grid => {
                let re = LambdaGrid::axis(self.lambda.re, self.lambda.resolution[0]);
                let im = LambdaGrid::axis(self.lambda.im, self.lambda.resolution[1]);
                re.iter().flat_map(|&x| im.iter().map(move |&y| Complex64::new(x, y))).collect()
            }
            Sampling::Random { count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let [r0, r1] = self.lambda.re;
                let [i0, i1] = self.lambda.im;
                (0..count)
                    .map(|_| Complex64::new(r0 + (r1 - r0) * rng.gen::<f64>(), i0 + (i1 - i0) * rng.gen::<f64>()))
                    .collect()
            }
        };
        let a = self.a.values();
        lambdas.iter().flat_map(|&l| a.iter().map(move |&x| (l, x))).collect()
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub a: f64,
    pub det_q: Option<f64>,
    pub min_eig_q: Option<f64>,
    pub kernel_dim: Option<usize>,
    pub sig_p: Option<usize>,
    pub sig_q: Option<usize>,
    pub degenerate: Option<bool>,
    pub status: String,
    pub runtime_ms: Option<f64>,
}

impl ScanRecord {
    fn empty(lambda: Complex64, a: f64, status: &str) -> Self {
        ScanRecord {
            lambda_re: lambda.re,
            lambda_im: lambda.im,
            a,
            det_q: None,
            min_eig_q: None,
            kernel_dim: None,
            sig_p: None,
            sig_q: None,
            degenerate: None,
            status: status.to_string(),
            runtime_ms: None,
        }
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// A record with the values that do not go into the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub record: ScanRecord,
    pub normalized_margin: Option<f64>,
}

pub fn build_connection(profile: &WeightProfile, lambda: Complex64, a: f64) -> Result<StandardConnection, String> {
    let w = WeightedLines::new(profile.lines(lambda), profile.weights()).map_err(|e| e.to_string())?;
    scaled_dunkl_connection(&w, a).map_err(|e| e.to_string())
}

/// Flatness data of a connection's monodromy.
pub fn analyse_connection(conn: &StandardConnection, kernel_rel: f64) -> Result<(FlatnessReport, monodromy::MonodromyRep), String> {
    let rep = monodromy::monodromy_rep(conn).map_err(|e| e.to_string())?;
    Ok((rep_flatness(&rep.generators, kernel_rel), rep))
}

fn status_token(msg: &str) -> String {
    let kind: String = msg
        .chars()
        .take_while(|ch| *ch != ':')
        .map(|ch| if ch.is_ascii_alphanumeric() { ch.to_ascii_lowercase() } else { '_' })
        .collect();
    format!("error:{}", kind.trim_matches('_'))
}

/// Evaluates one `(λ, a)` point; failures are recorded in `status`.
pub fn evaluate_point(profile: &WeightProfile, tol: &Tolerances, grid: &LambdaGrid, lambda: Complex64, a: f64, timing: bool) -> PointResult {
    let clash = profile.extra_slopes().iter().any(|s| (s - lambda).norm() < grid.exclusion_radius);
    if grid.is_excluded(lambda) || clash {
        return PointResult { record: ScanRecord::empty(lambda, a, "excluded"), normalized_margin: None };
    }
    let start = Instant::now();
    let outcome = build_connection(profile, lambda, a).and_then(|conn| analyse_connection(&conn, tol.kernel_rel));
    let mut record = match &outcome {
        Ok(_) => ScanRecord::empty(lambda, a, "ok"),
        Err(e) => ScanRecord::empty(lambda, a, &status_token(e)),
    };
    let mut margin = None;
    if let Ok((report, _)) = outcome {
        record.det_q = Some(report.det_q);
        record.min_eig_q = Some(report.min_eigenvalue());
        record.kernel_dim = Some(report.kernel_dim);
        if report.kernel_dim >= 1 {
            let (p, q) = report.signature.unwrap_or((0, 0));
            record.sig_p = Some(p);
            record.sig_q = Some(q);
            record.degenerate = Some(report.degenerate);
        }
        margin = Some(report.normalized_margin);
    }
    if timing {
        record.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    PointResult { record, normalized_margin: margin }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, ScanError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| ScanError::Pool(e.to_string()))
}

/// All scan points, in grid order regardless of `jobs`.
pub fn scan_grid(cfg: &ScanConfig) -> Result<Vec<PointResult>, ScanError> {
    cfg.validate()?;
    let points = cfg.points();
    Ok(pool(cfg.jobs)?.install(|| {
        points
            .par_iter()
            .map(|&(l, a)| evaluate_point(&cfg.profile, &cfg.tolerances, &cfg.lambda, l, a, cfg.timing))
            .collect()
    }))
}

pub fn write_csv<W: Write>(records: &[ScanRecord], out: W) -> Result<(), ScanError> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json_lines<W: Write>(records: &[ScanRecord], mut out: W) -> Result<(), ScanError> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// CSV or JSON lines, as selected by the config.
pub fn render(records: &[ScanRecord], json: bool) -> Result<Vec<u8>, ScanError> {
    let mut buf = Vec::new();
    if json {
        write_json_lines(records, &mut buf)?;
    } else {
        write_csv(records, &mut buf)?;
    }
    Ok(buf)
}

/// Parses output written by [`render`].
pub fn read_records(bytes: &[u8], json: bool) -> Result<Vec<ScanRecord>, ScanError> {
    if json {
        let text = std::str::from_utf8(bytes).map_err(|e| ScanError::Config(e.to_string()))?;
        return text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect();
    }
    let mut r = csv::Reader::from_reader(bytes);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Sidecar describing a scan completely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub columns: Vec<String>,
    pub records: usize,
    pub config: ScanConfig,
}

impl Manifest {
    pub fn new(cfg: &ScanConfig, records: usize) -> Self {
        Manifest {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            seed: cfg.seed,
            columns: CSV_COLUMNS.iter().map(|s| s.to_string()).collect(),
            records,
            config: cfg.clone(),
        }
    }
}

pub fn manifest_path(output: &str) -> String {
    format!("{output}.manifest.json")
}

/// Runs a scan and returns the rendered output with its manifest.
pub fn run_scan(cfg: &ScanConfig) -> Result<(Vec<u8>, Manifest), ScanError> {
    let results = scan_grid(cfg)?;
    let records: Vec<ScanRecord> = results.into_iter().map(|r| r.record).collect();
    let bytes = render(&records, cfg.json)?;
    Ok((bytes, Manifest::new(cfg, records.len())))
}

/// Re-evaluates a single record standalone.
pub fn replay(cfg: &ScanConfig, lambda: Complex64, a: f64) -> PointResult {
    evaluate_point(&cfg.profile, &cfg.tolerances, &cfg.lambda, lambda, a, false)
}

/// Largest deviation between the numeric fields of two records, or `None`
/// when their discrete fields differ.
pub fn record_distance(x: &ScanRecord, y: &ScanRecord) -> Option<f64> {
    let discrete = x.status == y.status
        && x.kernel_dim == y.kernel_dim
        && x.sig_p == y.sig_p
        && x.sig_q == y.sig_q
        && x.degenerate == y.degenerate;
    if !discrete {
        return None;
    }
    let diff = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        (None, None) => Some(0.0),
        _ => None,
    };
    let d = [
        Some((x.lambda_re - y.lambda_re).abs()),
        Some((x.lambda_im - y.lambda_im).abs()),
        Some((x.a - y.a).abs()),
        diff(x.det_q, y.det_q),
        diff(x.min_eig_q, y.min_eig_q),
    ];
    d.iter().try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))
}

/// Dihedral arrangement `0, ∞, 1, −1` with equal traces `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DihedralRecord {
    pub a: f64,
    pub min_eig_q: Option<f64>,
    pub kernel_dim: Option<usize>,
    pub signature: Option<(usize, usize)>,
    pub definite: bool,
    pub predicted_definite: bool,
    pub status: String,
}

impl DihedralRecord {
    pub fn matches(&self) -> bool {
        self.status == "ok" && self.definite == self.predicted_definite
    }
}

/// `a ∈ (0, ½) + 2Z` or `a ∈ (3/2, 2) + 2Z`.
pub fn dihedral_window(a: f64) -> bool {
    let m = a.rem_euclid(2.0);
    (m > 0.0 && m < 0.5) || (m > 1.5 && m < 2.0)
}

pub fn dihedral_record(a: f64, kernel_rel: f64) -> DihedralRecord {
    let predicted_definite = dihedral_window(a);
    match analyse_connection(&dihedral_connection(a), kernel_rel) {
        Ok((report, _)) => DihedralRecord {
            a,
            min_eig_q: Some(report.min_eigenvalue()),
            kernel_dim: Some(report.kernel_dim),
            signature: report.signature,
            definite: report.kernel_dim >= 1 && report.is_definite() && !report.degenerate,
            predicted_definite,
            status: "ok".into(),
        },
        Err(e) => DihedralRecord {
            a,
            min_eig_q: None,
            kernel_dim: None,
            signature: None,
            definite: false,
            predicted_definite,
            status: status_token(&e),
        },
    }
}

pub fn dihedral_sweep(a_values: &[f64], kernel_rel: f64, jobs: usize) -> Result<Vec<DihedralRecord>, ScanError> {
    Ok(pool(jobs)?.install(|| a_values.par_iter().map(|&a| dihedral_record(a, kernel_rel)).collect()))
}

/// One-parameter families of connections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    /// Equal traces `a(t) = a0 + t (a1 − a0)` at fixed λ.
    Weight { lambda: Complex64, a0: f64, a1: f64 },
    /// `λ(t) = λ0 + t (λ1 − λ0)` at fixed equal trace `a`.
    Lambda { lambda0: Complex64, lambda1: Complex64, a: f64 },
    /// Traces `(a, a, a, a, t)` with a fifth line of slope `extra_slope`,
    /// `t ∈ (0, t_max]`.
    Extension { lambda: Complex64, a: f64, extra_slope: Complex64, t_max: f64 },
    /// All residues scaled by `s(t) = s0 + t (s1 − s0)` for fixed weights.
    Scaling { lambda: Complex64, weights: Vec<f64>, s0: f64, s1: f64 },
}

impl PathSpec {
    /// Parameter samples; the extension path starts after its degenerate end.
    pub fn parameters(&self, samples: usize) -> Vec<f64> {
        let n = samples.max(2);
        match self {
            PathSpec::Extension { t_max, .. } => (1..=n).map(|k| t_max * k as f64 / n as f64).collect(),
            _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
        }
    }

    /// `(λ, display value, connection)` at parameter `t`.
    pub fn connection(&self, t: f64) -> Result<(Complex64, f64, StandardConnection), String> {
        match self {
            PathSpec::Weight { lambda, a0, a1 } => {
                let a = a0 + t * (a1 - a0);
                Ok((*lambda, a, build_connection(&WeightProfile::EqualFour, *lambda, a)?))
            }
            PathSpec::Lambda { lambda0, lambda1, a } => {
                let l = lambda0 + (lambda1 - lambda0) * t;
                Ok((l, *a, build_connection(&WeightProfile::EqualFour, l, *a)?))
            }
            PathSpec::Extension { lambda, a, extra_slope, .. } => {
                let profile = WeightProfile::Explicit { weights: vec![*a, *a, *a, *a, t], extra_slopes: vec![*extra_slope] };
                Ok((*lambda, t, build_connection(&profile, *lambda, 1.0)?))
            }
            PathSpec::Scaling { lambda, weights, s0, s1 } => {
                let s = s0 + t * (s1 - s0);
                let profile = WeightProfile::Explicit { weights: weights.clone(), extra_slopes: Vec::new() };
                let profile = if weights.len() == 4 { profile } else { return Err("scaling path needs four weights".into()) };
                Ok((*lambda, s, build_connection(&profile, *lambda, s)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Trace, added weight or scale, depending on the path.
    pub value: f64,
    pub min_eig_q: Option<f64>,
    pub normalized_margin: Option<f64>,
    pub kernel_dim: Option<usize>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "indices", rename_all = "snake_case")]
pub enum ZeroSet {
    /// `min_eig_q ≈ 0` at every sample.
    Everywhere,
    /// Samples where `min_eig_q ≈ 0`.
    Isolated(Vec<usize>),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSeries {
    pub path: PathSpec,
    pub samples: Vec<PathSample>,
    pub zero_set: ZeroSet,
}

pub fn classify_zero_set(samples: &[PathSample], zero_tol: f64) -> ZeroSet {
    let zeros: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.min_eig_q.is_some_and(|m| m < zero_tol))
        .map(|(i, _)| i)
        .collect();
    if zeros.is_empty() {
        ZeroSet::Empty
    } else if zeros.len() == samples.len() {
        ZeroSet::Everywhere
    } else {
        ZeroSet::Isolated(zeros)
    }
}

pub fn persistence_path(path: &PathSpec, samples: usize, tol: &Tolerances, jobs: usize) -> Result<PersistenceSeries, ScanError> {
    let ts = path.parameters(samples);
    let out: Vec<PathSample> = pool(jobs)?.install(|| {
        ts.par_iter()
            .map(|&t| match path.connection(t).and_then(|(l, v, conn)| Ok((l, v, analyse_connection(&conn, tol.kernel_rel)?)))
            {
                Ok((l, v, (report, _))) => PathSample {
                    t,
                    lambda_re: l.re,
                    lambda_im: l.im,
                    value: v,
                    min_eig_q: Some(report.min_eigenvalue()),
                    normalized_margin: Some(report.normalized_margin),
                    kernel_dim: Some(report.kernel_dim),
                    status: "ok".into(),
                },
                Err(e) => PathSample {
                    t,
                    lambda_re: f64::NAN,
                    lambda_im: f64::NAN,
                    value: f64::NAN,
                    min_eig_q: None,
                    normalized_margin: None,
                    kernel_dim: None,
                    status: status_token(&e),
                },
            })
            .collect()
    });
    let zero_set = classify_zero_set(&out, tol.zero);
    Ok(PersistenceSeries { path: path.clone(), samples: out, zero_set })
}

/// Best grid point of a scan, a numeric witness rather than a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub record: ScanRecord,
    pub normalized_margin: f64,
    pub inside_z: bool,
    pub points_scanned: usize,
    pub verdict: String,
}

pub fn find_generic_example(cfg: &ScanConfig) -> Result<Option<WitnessReport>, ScanError> {
    let results = scan_grid(cfg)?;
    let n = results.len();
    let best = results
        .into_iter()
        .filter_map(|r| r.normalized_margin.map(|m| (m, r.record)))
        .fold(None::<(f64, ScanRecord)>, |acc, (m, r)| match acc {
            Some((bm, br)) if bm >= m => Some((bm, br)),
            _ => Some((m, r)),
        });
    Ok(best.map(|(m, record)| {
        let inside_z = m < cfg.tolerances.inside_z;
        let verdict = if inside_z {
            "inside Z: a flat Hermitian form exists to within tolerance".to_string()
        } else {
            format!("numeric witness: no flat Hermitian form, normalized margin {m:.3e}")
        };
        WitnessReport { record, normalized_margin: m, inside_z, points_scanned: n, verdict }
    }))
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use dunkl_lab::dunkl::{self, dihedral_connection, WeightedLines};
use dunkl_lab::flat_forms;
use dunkl_lab::moebius_cover::{self, klein_maps, marked_points, MoebiusMap};
use dunkl_lab::monodromy::{self, monodromy_rep};
use dunkl_lab::scan::{self, ARange, LambdaGrid, Manifest, PathSpec, ScanConfig, WeightProfile};
use dunkl_lab::spherical::{self, ChartPoint, FlatMetric};

#[derive(Parser)]
#[command(name = "dunkl-lab", version, about = "Flat logarithmic connections on C^2: monodromy, flat Hermitian forms and parameter scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the Dunkl inner product of a weighted arrangement.
    Barycenter(Common),
    /// Build the Dunkl connection and check its identities.
    Connection(Common),
    /// Monodromy generators of the connection.
    Monodromy(Common),
    /// Flat Hermitian forms of the monodromy.
    Flatform(Common),
    /// Sweep the dihedral arrangement 0, ∞, 1, −1 over trace values.
    Dihedral {
        #[command(flatten)]
        common: Common,
        /// Number of evenly spaced values in (0, 2) when no range is given.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Klein four-group and the identity Φ(λ) = λ.
    KleinCheck(Common),
    /// Conformal factor and curvature of the flat metric at sample points.
    Spherical {
        #[command(flatten)]
        common: Common,
        /// Sample points `re,im;re,im;...` in the affine chart.
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<String>,
        /// Use the dihedral arrangement instead of 0, ∞, 1, λ.
        #[arg(long)]
        dihedral: bool,
        /// Stencil step for the curvature.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Scan the (λ, a) grid and write records with a manifest sidecar.
    Scan(Common),
    /// Sample a one-parameter family and classify where flat forms exist.
    Persist {
        #[command(flatten)]
        common: Common,
        /// Path description as JSON, e.g. `{"kind":"weight","lambda":[2.0,1.0],"a0":0,"a1":1}`.
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = 21)]
        samples: usize,
    },
    /// Best point of a scan: a numeric witness of no flat Hermitian form.
    FindExample(Common),
    /// Re-run a scan from its manifest, or a single point of it.
    Replay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON scan configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cross-ratio parameter, `re,im` or `re+imi`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Residue trace scale.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Weights of the lines 0, ∞, 1, λ and any extra lines.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    /// Slopes of lines beyond the first four, `re,im;re,im;...`.
    #[arg(long, allow_hyphen_values = true)]
    slopes: Option<String>,
    /// λ grid `re_min,re_max,im_min,im_max,n_re,n_im`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Trace range `min,max,step`.
    #[arg(long, allow_hyphen_values = true)]
    a_range: Option<String>,
    /// Relative kernel tolerance for Q.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON lines instead of CSV.
    #[arg(long)]
    json: bool,
    /// Fill the runtime column.
    #[arg(long)]
    timing: bool,
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(',') {
        return Ok(Complex64::new(re.trim().parse()?, im.trim().parse()?));
    }
    Complex64::from_str(s).map_err(|e| anyhow!("bad complex number {s:?}: {e}"))
}

fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_complex).collect()
}

fn parse_floats<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().with_context(|| format!("bad {what}"))?;
    v.try_into().map_err(|_| anyhow!("{what} needs {N} comma separated numbers"))
}

impl Common {
    fn config(&self) -> Result<ScanConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => ScanConfig::default(),
        };
        if let Some(g) = &self.grid {
            let [r0, r1, i0, i1, nr, ni] = parse_floats::<6>(g, "grid")?;
            if nr < 1.0 || ni < 1.0 || nr.fract() != 0.0 || ni.fract() != 0.0 {
                bail!("grid resolution must be positive integers");
            }
            cfg.lambda = LambdaGrid { re: [r0, r1], im: [i0, i1], resolution: [nr as usize, ni as usize], ..cfg.lambda };
        }
        if let Some(l) = &self.lambda {
            let l = parse_complex(l)?;
            cfg.lambda = LambdaGrid { re: [l.re, l.re], im: [l.im, l.im], resolution: [1, 1], ..cfg.lambda };
        }
        if let Some(r) = &self.a_range {
            let [min, max, step] = parse_floats::<3>(r, "a range")?;
            cfg.a = ARange { min, max, step };
        }
        if let Some(a) = self.a {
            cfg.a = ARange::single(a);
        }
        if self.weights.is_some() || self.slopes.is_some() {
            let extra_slopes = self.slopes.as_deref().map(parse_complex_list).transpose()?.unwrap_or_default();
            let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; 4 + extra_slopes.len()]);
            cfg.profile = WeightProfile::Explicit { weights, extra_slopes };
        }
        if let Some(t) = self.tol {
            cfg.tolerances.kernel_rel = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.display().to_string());
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        cfg.json |= self.json;
        cfg.timing |= self.timing;
        cfg.validate()?;
        Ok(cfg)
    }

    fn lambda(&self, cfg: &ScanConfig) -> Result<Complex64> {
        match &self.lambda {
            Some(l) => parse_complex(l),
            None if cfg.lambda.resolution == [1, 1] => Ok(Complex64::new(cfg.lambda.re[0], cfg.lambda.im[0])),
            None => bail!("--lambda is required"),
        }
    }

    fn trace(&self, cfg: &ScanConfig) -> Result<f64> {
        match (self.a, cfg.a.values().as_slice()) {
            (Some(a), _) => Ok(a),
            (None, [a]) => Ok(*a),
            _ => bail!("--a is required"),
        }
    }
}

fn weighted_lines(cfg: &ScanConfig, lambda: Complex64) -> Result<WeightedLines> {
    Ok(WeightedLines::new(cfg.profile.lines(lambda), cfg.profile.weights())?)
}

fn emit(bytes: &[u8]) -> Result<()> {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print(v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    emit(text.as_bytes())
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn barycenter(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let l = common.lambda(&cfg)?;
    let w = weighted_lines(&cfg, l)?;
    let sol = dunkl::solve_barycentre(&w)?;
    print(&json!({
        "lambda": l,
        "weights": w.weights(),
        "h": sol.h,
        "iterations": sol.iterations,
        "gradient_norm": sol.gradient_norm,
        "certificate": sol.certificate,
    }))
}

fn connection(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let l = common.lambda(&cfg)?;
    let a = common.trace(&cfg)?;
    let conn = scan::build_connection(&cfg.profile, l, a).map_err(|e| anyhow!(e))?;
    let h = dunkl::dunkl_inner_product(&weighted_lines(&cfg, l)?)?;
    print(&json!({
        "lambda": l,
        "a": a,
        "connection": conn,
        "residuals": conn.residuals(),
        "inner_product": h,
        "self_adjoint_residual": conn.self_adjoint_residual(&h),
    }))
}

fn monodromy_cmd(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let l = common.lambda(&cfg)?;
    let a = common.trace(&cfg)?;
    let conn = scan::build_connection(&cfg.profile, l, a).map_err(|e| anyhow!(e))?;
    let rep = monodromy_rep(&conn)?;
    print(&json!({
        "lambda": l,
        "a": a,
        "monodromy": rep,
        "product_relation_residual": monodromy::product_relation_residual(&rep),
        "eigenvalue_residual": monodromy::eigenvalue_residual(&rep),
        "determinant_residual": monodromy::determinant_residual(&rep),
    }))
}

fn flatform(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let l = common.lambda(&cfg)?;
    let a = common.trace(&cfg)?;
    let conn = scan::build_connection(&cfg.profile, l, a).map_err(|e| anyhow!(e))?;
    let (report, rep) = scan::analyse_connection(&conn, cfg.tolerances.kernel_rel).map_err(|e| anyhow!(e))?;
    let residual = report.form.map(|f| flat_forms::invariance_residual(&rep.generators, &f));
    print(&json!({ "lambda": l, "a": a, "report": report, "invariance_residual": residual }))
}

fn dihedral(common: &Common, count: usize) -> Result<()> {
    let values = match (common.a, &common.a_range) {
        (Some(a), _) => vec![a],
        (None, Some(r)) => {
            let [min, max, step] = parse_floats::<3>(r, "a range")?;
            ARange { min, max, step }.values()
        }
        (None, None) => (1..=count).map(|k| 2.0 * k as f64 / (count + 1) as f64).collect(),
    };
    let kernel_rel = common.tol.unwrap_or(flat_forms::KERNEL_REL_TOL);
    let records = scan::dihedral_sweep(&values, kernel_rel, common.jobs.unwrap_or(0))?;
    let mismatches = records.iter().filter(|r| !r.matches()).count();
    let out = json!({ "records": records, "mismatches": mismatches });
    match &common.out {
        Some(p) => write_output(p, serde_json::to_string_pretty(&out)?.as_bytes()),
        None => print(&out),
    }
}

fn klein_check(common: &Common) -> Result<()> {
    let l = parse_complex(common.lambda.as_deref().ok_or_else(|| anyhow!("--lambda is required"))?)?;
    let maps = klein_maps(l)?;
    let id = MoebiusMap::identity();
    let mut involution = 0.0_f64;
    let mut closure = 0.0_f64;
    for i in 0..3 {
        involution = involution.max(maps[i].compose(&maps[i]).projective_distance(&id));
        for j in (0..3).filter(|&j| j != i) {
            closure = closure.max(maps[i].compose(&maps[j]).projective_distance(&maps[3 - i - j]));
        }
    }
    let cover = moebius_cover::quotient_cover(l)?;
    print(&json!({
        "lambda": l,
        "marked_points": marked_points(l),
        "maps": maps.iter().map(|m| m.normalized()).collect::<Vec<_>>(),
        "permutations": maps.iter().map(|m| moebius_cover::induced_permutation(m, l)).collect::<Vec<_>>(),
        "phi_residual": moebius_cover::klein_identity_residual(l)?,
        "involution_residual": involution,
        "closure_residual": closure,
        "critical_data": cover.critical_data(),
    }))
}

fn or_error<T: serde::Serialize>(r: std::result::Result<T, String>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "error": e }),
    }
}

fn spherical_cmd(common: &Common, xi: Option<&str>, use_dihedral: bool, step: f64) -> Result<()> {
    let conn = if use_dihedral {
        dihedral_connection(common.a.ok_or_else(|| anyhow!("--a is required"))?)
    } else {
        let cfg = common.config()?;
        scan::build_connection(&cfg.profile, common.lambda(&cfg)?, common.trace(&cfg)?).map_err(|e| anyhow!(e))?
    };
    let n = conn.len();
    let metric = FlatMetric::from_connection(conn)?;
    let points = xi.map(parse_complex_list).transpose()?.unwrap_or_else(|| vec![Complex64::new(0.3, 0.4)]);
    let samples: Vec<Value> = points
        .iter()
        .map(|&z| {
            let p = ChartPoint::affine(z);
            let sample = metric.conformal_factor(p).map_err(|e| e.to_string());
            let k = metric.curvature(p, step).map_err(|e| e.to_string());
            json!({ "xi": z, "phi": or_error(sample.map(|s| s.phi)), "curvature": or_error(k) })
        })
        .collect();
    let cones: Vec<Value> = (0..n)
        .map(|i| {
            let fit = metric.ring_samples(i).map(|s| spherical::fit_cone_angle(&s)).map_err(|e| e.to_string());
            let trace = metric.conn.traces[i].re;
            json!({ "line": i, "expected": 1.0 - trace, "fit": or_error(fit) })
        })
        .collect();
    print(&json!({
        "h0": metric.h0,
        "c": metric.c,
        "flatness_residual": metric.flatness_residual,
        "samples": samples,
        "cone_angles": cones,
    }))
}

fn scan_cmd(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let (bytes, manifest) = scan::run_scan(&cfg)?;
    match &cfg.output {
        Some(out) => {
            write_output(Path::new(out), &bytes)?;
            write_output(Path::new(&scan::manifest_path(out)), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
            eprintln!("{} records written to {out}", manifest.records);
        }
        None => emit(&bytes)?,
    }
    Ok(())
}

fn persist(common: &Common, path: &str, samples: usize) -> Result<()> {
    let cfg = common.config()?;
    let spec: PathSpec = serde_json::from_str(path).context("parsing --path")?;
    let series = scan::persistence_path(&spec, samples, &cfg.tolerances, cfg.jobs)?;
    let out = serde_json::to_value(&series)?;
    match &common.out {
        Some(p) => write_output(p, serde_json::to_string_pretty(&out)?.as_bytes()),
        None => print(&out),
    }
}

fn find_example(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let report = scan::find_generic_example(&cfg)?.ok_or_else(|| anyhow!("no point of the scan could be evaluated"))?;
    print(&json!({ "seed": cfg.seed, "version": scan::TOOL_VERSION, "witness": report, "config": cfg }))
}

/// Returns whether the replay reproduced the stored output.
fn replay(common: &Common, manifest_path: &Path) -> Result<bool> {
    let text = fs::read_to_string(manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut cfg = manifest.config.clone();
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    let stored_path = common.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from));
    let stored = stored_path.as_ref().map(fs::read).transpose().context("reading stored output")?;
    if let Some(l) = &common.lambda {
        let l = parse_complex(l)?;
        let a = common.a.ok_or_else(|| anyhow!("--a is required with --lambda"))?;
        let fresh = scan::replay(&cfg, l, a).record;
        let matched = match &stored {
            Some(bytes) => {
                scan::read_records(bytes, cfg.json)?.into_iter().find(|r| r.lambda() == l && r.a == a)
            }
            None => None,
        };
        let distance = matched.as_ref().and_then(|m| scan::record_distance(m, &fresh));
        let ok = distance.is_some_and(|d| d <= cfg.tolerances.replay);
        print(&json!({ "record": fresh, "stored": matched, "distance": distance, "reproduced": ok }))?;
        return Ok(ok);
    }
    let (bytes, _) = scan::run_scan(&cfg)?;
    let stored = stored.ok_or_else(|| anyhow!("manifest has no output path; pass --out"))?;
    let identical = bytes == stored;
    print(&json!({ "records": manifest.records, "bytes": bytes.len(), "identical": identical }))?;
    Ok(identical)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Barycenter(c) => barycenter(c)?,
        Command::Connection(c) => connection(c)?,
        Command::Monodromy(c) => monodromy_cmd(c)?,
        Command::Flatform(c) => flatform(c)?,
        Command::Dihedral { common, count } => dihedral(common, *count)?,
        Command::KleinCheck(c) => klein_check(c)?,
        Command::Spherical { common, xi, dihedral, step } => spherical_cmd(common, xi.as_deref(), *dihedral, *step)?,
        Command::Scan(c) => scan_cmd(c)?,
        Command::Persist { common, path, samples } => persist(common, path, *samples)?,
        Command::FindExample(c) => find_example(c)?,
        Command::Replay { common, manifest } => return replay(common, manifest),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

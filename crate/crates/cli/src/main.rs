//! `gabor-zz`: completeness and frame analysis of Gabor systems on rational
//! lattices.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure (a
//! partial report is still written), 1 anything else (I/O).

mod report;
mod window_json;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gabor_zz::oracle::{residual_sweep, Solver, TestFunction};
use gabor_zz::theta::{theta, ColumnSet};
use gabor_zz::zibulski::{grid_scan, verdict, VerdictConfig, ZZField, DEFAULT_PINV_TOL, DEFAULT_TAU_RANK};
use gabor_zz::{
    completeness_certificate, reconstruct, Certificate, CertificateSearch, RationalLattice, SampledSignal, Window,
    WindowSpec, DEFAULT_EPS,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use report::{
    verdicts, AnalysisReport, Answer, GridInfo, LatticeInfo, OracleSection, ScanSummary, SearchInfo, StageError,
    SweepRow, ThetaSection, Tool, ZibulskiSection, TOOL,
};
use window_json::WindowConfig;

#[derive(Parser)]
#[command(name = "gabor-zz", version, about = "Completeness and frame analysis of Gabor systems")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: grid scans, certificate search and oracle sweep.
    Analyze(AnalyzeArgs),
    /// One CSV row of verdicts per lattice density.
    Scan(ScanArgs),
    /// A single Θ value, or a certificate search.
    Theta(ThetaArgs),
    /// Reconstruction from the frame operator through the Zak domain.
    Reconstruct(ReconstructArgs),
    /// Least-squares residuals over growing finite sections.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct LatticeArgs {
    /// Preset (gaussian, hermite:N, bump, bump:LO,HI) or path to a window JSON file.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON file with any of the analyze settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Coarse grid NxM; the refinement uses 2Nx2M. [default: 64x64]
    #[arg(long)]
    grid: Option<String>,
    /// Zak truncation tolerance. [default: 1e-12]
    #[arg(long)]
    eps: Option<f64>,
    /// Relative rank tolerance for Q_g. [default: 1e-8]
    #[arg(long)]
    tau: Option<f64>,
    /// Required margin of a Θ witness over its error bound. [default: 1e-6]
    #[arg(long)]
    theta_tau: Option<f64>,
    /// Truncation tolerance of each Θ value. [default: 1e-10]
    #[arg(long)]
    theta_eps: Option<f64>,
    /// Smallest N searched. [default: -8]
    #[arg(long, allow_negative_numbers = true)]
    n_min: Option<i64>,
    /// Largest N searched. [default: 8]
    #[arg(long, allow_negative_numbers = true)]
    n_max: Option<i64>,
    /// x samples per period in the certificate search. [default: 64]
    #[arg(long)]
    x_samples: Option<usize>,
    /// Oracle section sizes. [default: 2,4,8]
    #[arg(long)]
    sizes: Option<String>,
    /// narrow-gaussian, random:SEED or bump:LO,HI. [default: random:0]
    #[arg(long)]
    test_function: Option<String>,
    /// ridge, ridge:VALUE, pinv or pinv:CUTOFF. [default: ridge]
    #[arg(long)]
    solver: Option<String>,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for field and sweep CSV files.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// Include wall-clock stage timings (makes the report non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// Preset or path to a window JSON file.
    #[arg(long)]
    window: String,
    #[arg(long)]
    alpha: f64,
    /// Comma-separated densities p/q, e.g. 1/2,2/3,1/1,3/2.
    #[arg(long)]
    lattices: String,
    #[arg(long, default_value = "64x64")]
    grid: String,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_TAU_RANK)]
    tau: f64,
    #[arg(long, default_value_t = 1e-6)]
    theta_tau: f64,
    #[arg(long, default_value_t = 1e-10)]
    theta_eps: f64,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long)]
    window: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    /// Column set, e.g. 0,2. Without it a certificate search is run.
    #[arg(long)]
    cols: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
    /// Truncation tolerance of each Θ value.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    tau: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = -8)]
    n_min: i64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 8)]
    n_max: i64,
    #[arg(long, default_value_t = 64)]
    x_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    window: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    /// window, zero, narrow-gaussian, random:SEED or bump:LO,HI.
    #[arg(long, default_value = "window")]
    signal: String,
    /// Samples cover [-T, T].
    #[arg(long, default_value_t = 8.0)]
    half_width: f64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Eigenvalue cutoff relative to the largest eigenvalue of A_g.
    #[arg(long, default_value_t = DEFAULT_PINV_TOL)]
    pinv_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of input and reconstructed samples.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    window: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    #[arg(long, default_value = "2,4,8")]
    sizes: String,
    #[arg(long, default_value = "random:0")]
    test_function: String,
    #[arg(long, default_value = "ridge")]
    solver: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of (size, residual).
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Marks an error as a configuration problem (exit code 2).
#[derive(Debug)]
struct ConfigError;

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid configuration")
    }
}

/// Marks a run that produced output but hit numerical failures (exit code 3).
#[derive(Debug)]
struct NumericalFailure(String);

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NumericalFailure>().is_some() {
        return 3;
    }
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if let Some(e) = err.chain().find_map(|e| e.downcast_ref::<gabor_zz::Error>()) {
        return numerical_code(e);
    }
    1
}

fn numerical_code(e: &gabor_zz::Error) -> u8 {
    use gabor_zz::Error::*;
    match e {
        InvalidLattice(_) | InvalidWindow(_) | InvalidArgument(_) | SamplingMismatch(_) => 2,
        EnvelopeViolation { .. } | TruncationCap { .. } | Linalg(_) => 3,
    }
}

fn config<T, E>(r: std::result::Result<T, E>) -> Result<T>
where
    E: Into<anyhow::Error>,
{
    r.map_err(|e| e.into().context(ConfigError))
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("grid must look like NxM, got {s:?}"))?;
    let n: usize = a.trim().parse().with_context(|| format!("bad grid size {a:?}"))?;
    let m: usize = b.trim().parse().with_context(|| format!("bad grid size {b:?}"))?;
    if n < 2 || m < 2 {
        bail!("grid sizes must be at least 2, got {n}x{m}");
    }
    Ok((n, m))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().with_context(|| format!("bad list entry {t:?}")))
        .collect()
}

fn parse_densities(s: &str) -> Result<Vec<(u32, u32)>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (p, q) = t
                .trim()
                .split_once('/')
                .with_context(|| format!("density must look like p/q, got {t:?}"))?;
            Ok((p.trim().parse()?, q.trim().parse()?))
        })
        .collect()
}

fn parse_bump(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(',')
        .with_context(|| format!("bump needs LO,HI, got {s:?}"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn parse_test_function(s: &str) -> Result<TestFunction> {
    match s.split_once(':') {
        None if s == "narrow-gaussian" => Ok(TestFunction::NarrowGaussian),
        Some(("random", seed)) => Ok(TestFunction::RandomSmooth {
            seed: seed.trim().parse().context("bad seed")?,
        }),
        Some(("bump", range)) => {
            let (lo, hi) = parse_bump(range)?;
            if !(lo < hi) {
                bail!("bump needs LO < HI");
            }
            Ok(TestFunction::Bump { lo, hi })
        }
        _ => bail!("unknown test function {s:?} (narrow-gaussian, random:SEED, bump:LO,HI)"),
    }
}

fn parse_solver(s: &str) -> Result<Solver> {
    match s.split_once(':') {
        None if s == "ridge" => Ok(Solver::Ridge { ridge: None }),
        None if s == "pinv" => Ok(Solver::Pinv { rel_cutoff: 1e-10 }),
        Some(("ridge", v)) => Ok(Solver::Ridge {
            ridge: Some(v.trim().parse().context("bad ridge value")?),
        }),
        Some(("pinv", v)) => Ok(Solver::Pinv {
            rel_cutoff: v.trim().parse().context("bad cutoff")?,
        }),
        _ => bail!("unknown solver {s:?} (ridge, ridge:VALUE, pinv, pinv:CUTOFF)"),
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn field_csv(field: &ZZField) -> Result<String> {
    csv_text(
        &["x", "xi", "detA_abs", "sigma_min", "sigma_max"],
        field.points.iter().map(|pt| {
            vec![
                pt.x.to_string(),
                pt.xi.to_string(),
                pt.det_a_abs.to_string(),
                pt.sigma_min.to_string(),
                pt.sigma_max.to_string(),
            ]
        }),
    )
}

fn sweep_csv(sweep: &[SweepRow]) -> Result<String> {
    csv_text(
        &["size", "residual"],
        sweep.iter().map(|r| vec![r.size.to_string(), r.residual.to_string()]),
    )
}

fn load_window(arg: &str) -> Result<(WindowConfig, Window)> {
    let spec = config(window_json::resolve(arg))?;
    build_window(spec)
}

fn build_window(spec: WindowSpec) -> Result<(WindowConfig, Window)> {
    let echo = WindowConfig::from_spec(&spec);
    let w = Window::new(spec)?;
    Ok((echo, w))
}

/// Analyze settings as read from `--config`; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeFile {
    window: Option<WindowSource>,
    alpha: Option<f64>,
    p: Option<u32>,
    q: Option<u32>,
    grid: Option<String>,
    eps: Option<f64>,
    tau: Option<f64>,
    theta_tau: Option<f64>,
    theta_eps: Option<f64>,
    n_min: Option<i64>,
    n_max: Option<i64>,
    x_samples: Option<usize>,
    sizes: Option<Vec<usize>>,
    test_function: Option<String>,
    solver: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum WindowSource {
    Named(String),
    Inline(WindowConfig),
}

struct AnalyzeSettings {
    window: WindowSpec,
    alpha: f64,
    p: u32,
    q: u32,
    grid: (usize, usize),
    eps: f64,
    tau: f64,
    search: CertificateSearch,
    sizes: Vec<usize>,
    test_function: TestFunction,
    solver: Solver,
}

fn analyze_settings(args: &AnalyzeArgs) -> Result<AnalyzeSettings> {
    let file: AnalyzeFile = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => AnalyzeFile::default(),
    };
    let base = args.config.as_deref().and_then(Path::parent);
    let window = match (&args.lattice.window, file.window) {
        (Some(arg), _) => window_json::resolve(arg)?,
        (None, Some(WindowSource::Inline(cfg))) => cfg.to_spec()?,
        (None, Some(WindowSource::Named(name))) => {
            let relative = base.map(|b| b.join(&name)).filter(|p| p.is_file());
            match relative {
                Some(p) => window_json::resolve(&p.to_string_lossy())?,
                None => window_json::resolve(&name)?,
            }
        }
        (None, None) => bail!("--window is required"),
    };
    let alpha = args.lattice.alpha.or(file.alpha).context("--alpha is required")?;
    let p = args.lattice.p.or(file.p).context("--p is required")?;
    let q = args.lattice.q.or(file.q).context("--q is required")?;
    let grid = parse_grid(args.grid.as_deref().or(file.grid.as_deref()).unwrap_or("64x64"))?;
    let defaults = CertificateSearch::default();
    let search = CertificateSearch {
        n_range: (
            args.n_min.or(file.n_min).unwrap_or(defaults.n_range.0),
            args.n_max.or(file.n_max).unwrap_or(defaults.n_range.1),
        ),
        x_samples: args.x_samples.or(file.x_samples).unwrap_or(defaults.x_samples),
        tau: args.theta_tau.or(file.theta_tau).unwrap_or(defaults.tau),
        eps: args.theta_eps.or(file.theta_eps).unwrap_or(defaults.eps),
    };
    if search.n_range.0 > search.n_range.1 {
        bail!("empty N range {:?}", search.n_range);
    }
    if search.x_samples == 0 {
        bail!("--x-samples must be positive");
    }
    let sizes = match (&args.sizes, file.sizes) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(v)) => v,
        (None, None) => vec![2, 4, 8],
    };
    let test_function =
        parse_test_function(args.test_function.as_deref().or(file.test_function.as_deref()).unwrap_or("random:0"))?;
    let solver = parse_solver(args.solver.as_deref().or(file.solver.as_deref()).unwrap_or("ridge"))?;
    Ok(AnalyzeSettings {
        window,
        alpha,
        p,
        q,
        grid,
        eps: args.eps.or(file.eps).unwrap_or(DEFAULT_EPS),
        tau: args.tau.or(file.tau).unwrap_or(DEFAULT_TAU_RANK),
        search,
        sizes,
        test_function,
        solver,
    })
}

fn stage_error(stage: &str, e: impl fmt::Display) -> StageError {
    StageError {
        stage: stage.into(),
        message: e.to_string(),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let s = config(analyze_settings(&args))?;
    let lattice = config(RationalLattice::new(s.alpha, s.p, s.q))?;
    let echo = WindowConfig::from_spec(&s.window);
    let window_id = s.window.id();
    let mut errors = Vec::new();
    let mut timing = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timing: &mut BTreeMap<String, f64>| {
        timing.insert(name.to_string(), clock.elapsed().as_secs_f64() * 1e3);
        clock = Instant::now();
    };

    let window = match Window::new(s.window.clone()) {
        Ok(w) => Some(w),
        Err(e) if numerical_code(&e) == 2 => return Err(anyhow::Error::new(e).context(ConfigError)),
        Err(e) => {
            errors.push(stage_error("window", e));
            None
        }
    };

    let (n, m) = s.grid;
    let mut fields = None;
    if let Some(w) = &window {
        let scans = grid_scan(w, &lattice, n, m, s.eps, s.tau)
            .and_then(|c| Ok((c, grid_scan(w, &lattice, 2 * n, 2 * m, s.eps, s.tau)?)));
        match scans {
            Ok(f) => fields = Some(f),
            Err(e) => errors.push(stage_error("zibulski", e)),
        }
        lap("zibulski", &mut timing);
    }
    let grid_verdict = fields
        .as_ref()
        .map(|(c, f)| verdict(c, f, &VerdictConfig::default()));

    let mut cert = None;
    if let Some(w) = &window {
        match completeness_certificate(w, &lattice, &s.search) {
            Ok(c) => cert = Some(c),
            Err(e) => errors.push(stage_error("theta", e)),
        }
        lap("theta", &mut timing);
    }

    let mut sweep = None;
    if let Some(w) = &window {
        let f = s.test_function.evaluator();
        match residual_sweep(&f, w, &lattice, &s.sizes, s.solver) {
            Ok(r) => {
                sweep = Some(
                    r.into_iter()
                        .map(|(size, residual)| SweepRow { size, residual })
                        .collect::<Vec<_>>(),
                )
            }
            Err(e) => errors.push(stage_error("oracle", e)),
        }
        lap("oracle", &mut timing);
    }

    let report = AnalysisReport {
        tool: TOOL,
        window: echo,
        window_id,
        lattice: LatticeInfo::from(&lattice),
        grid: GridInfo {
            coarse: [n, m],
            fine: [2 * n, 2 * m],
            eps: s.eps,
            tau_rank: s.tau,
        },
        zibulski: fields
            .as_ref()
            .zip(grid_verdict.as_ref())
            .map(|((c, f), v)| ZibulskiSection {
                coarse: ScanSummary::from(c),
                fine: ScanSummary::from(f),
                evidence: v.evidence.clone(),
            }),
        theta: cert.clone().map(|certificate| ThetaSection {
            search: SearchInfo {
                n_min: s.search.n_range.0,
                n_max: s.search.n_range.1,
                x_samples: s.search.x_samples,
                tau: s.search.tau,
                eps: s.search.eps,
            },
            certificate,
        }),
        oracle: sweep.clone().map(|sweep| OracleSection {
            test_function: s.test_function.clone(),
            solver: s.solver,
            sweep,
        }),
        verdicts: verdicts(cert.as_ref(), grid_verdict.as_ref()),
        errors,
        timing_ms: args.timing.then_some(timing),
    };

    if let Some(dir) = &args.csv_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        if let Some((c, f)) = &fields {
            for field in [c, f] {
                let path = dir.join(format!("field_{}x{}.csv", field.nx, field.nxi));
                fs::write(&path, field_csv(field)?).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        if let Some(sw) = &sweep {
            let path = dir.join("sweep.csv");
            fs::write(&path, sweep_csv(sw)?).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    write_json(args.out.as_deref(), &report)?;
    if !report.errors.is_empty() {
        let stages: Vec<&str> = report.errors.iter().map(|e| e.stage.as_str()).collect();
        return Err(NumericalFailure(format!("numerical failure in: {}", stages.join(", "))).into());
    }
    Ok(())
}

fn certificate_kind(c: &Certificate) -> &'static str {
    use gabor_zz::theta::NoWitnessReason;
    match c {
        Certificate::Witness(_) => "witness",
        Certificate::NoWitness {
            reason: NoWitnessReason::NotFound,
        } => "not_found",
        Certificate::NoWitness {
            reason: NoWitnessReason::OutsideAnalyticClass,
        } => "outside_analytic_class",
        Certificate::IncompleteByDensity => "incomplete_by_density",
    }
}

fn answer_str(a: Answer) -> &'static str {
    match a {
        Answer::Yes => "yes",
        Answer::No => "no",
        Answer::Inconclusive => "inconclusive",
    }
}

fn tier_str(t: report::Tier) -> &'static str {
    match t {
        report::Tier::Certified => "certified",
        report::Tier::Numerical => "numerical",
        report::Tier::Inconclusive => "inconclusive",
    }
}

const SCAN_COLUMNS: [&str; 13] = [
    "p",
    "q",
    "density",
    "deficient_fraction",
    "a_est",
    "b_est",
    "witness_found",
    "certificate",
    "complete",
    "complete_tier",
    "frame",
    "frame_tier",
    "error",
];

fn scan_row(w: &Window, alpha: f64, p: u32, q: u32, args: &ScanArgs, grid: (usize, usize)) -> Vec<String> {
    let density = p as f64 / q as f64;
    let mut row = vec![p.to_string(), q.to_string(), density.to_string()];
    let outcome = (|| -> gabor_zz::Result<_> {
        let lattice = RationalLattice::new(alpha, p, q)?;
        let c = grid_scan(w, &lattice, grid.0, grid.1, args.eps, args.tau)?;
        let f = grid_scan(w, &lattice, 2 * grid.0, 2 * grid.1, args.eps, args.tau)?;
        let v = verdict(&c, &f, &VerdictConfig::default());
        let search = CertificateSearch {
            tau: args.theta_tau,
            eps: args.theta_eps,
            ..CertificateSearch::default()
        };
        let cert = completeness_certificate(w, &lattice, &search)?;
        Ok((f, v, cert))
    })();
    match outcome {
        Ok((field, v, cert)) => {
            let bounds = gabor_zz::frame_bounds(&field);
            let claims = verdicts(Some(&cert), Some(&v));
            row.extend([
                field.summary.deficient_fraction.to_string(),
                bounds.lower.to_string(),
                bounds.upper.to_string(),
                cert.witness().is_some().to_string(),
                certificate_kind(&cert).to_string(),
                answer_str(claims.complete.answer).to_string(),
                tier_str(claims.complete.tier).to_string(),
                answer_str(claims.frame.answer).to_string(),
                tier_str(claims.frame.tier).to_string(),
                String::new(),
            ]);
        }
        Err(e) => {
            row.extend((0..9).map(|_| String::new()));
            row.push(e.to_string());
        }
    }
    row
}

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let densities = config(parse_densities(&args.lattices))?;
    let grid = config(parse_grid(&args.grid))?;
    let (_, w) = load_window(&args.window)?;
    let rows: Vec<Vec<String>> = densities
        .iter()
        .map(|&(p, q)| scan_row(&w, args.alpha, p, q, &args, grid))
        .collect();
    let failed = rows.iter().filter(|r| !r[12].is_empty()).count();
    write_text(args.out.as_deref(), &csv_text(&SCAN_COLUMNS, rows)?)?;
    if failed > 0 {
        return Err(NumericalFailure(format!("{failed} scan row(s) failed; see the error column")).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct ThetaValueReport {
    tool: Tool,
    window: WindowConfig,
    window_id: String,
    lattice: LatticeInfo,
    columns: ColumnSet,
    x: f64,
    #[serde(rename = "N")]
    n: i64,
    re: f64,
    im: f64,
    abs: f64,
    error_bound: f64,
    eps: f64,
}

#[derive(Serialize)]
struct ThetaSearchReport {
    tool: Tool,
    window: WindowConfig,
    window_id: String,
    lattice: LatticeInfo,
    #[serde(flatten)]
    theta: ThetaSection,
}

fn cmd_theta(args: ThetaArgs) -> Result<()> {
    let lattice = config(RationalLattice::new(args.alpha, args.p, args.q))?;
    let (echo, w) = load_window(&args.window)?;
    let window_id = w.spec().id();
    match &args.cols {
        Some(cols) => {
            let cols = config(parse_list::<usize>(cols).and_then(|c| Ok(ColumnSet::new(c, lattice.q())?)))?;
            let x = config(args.x.context("--x is required with --cols"))?;
            let n = config(args.n.context("--n is required with --cols"))?;
            let (value, error_bound) = theta(&w, &lattice, &cols, x, n, args.eps)?;
            write_json(
                args.out.as_deref(),
                &ThetaValueReport {
                    tool: TOOL,
                    window: echo,
                    window_id,
                    lattice: LatticeInfo::from(&lattice),
                    columns: cols,
                    x,
                    n,
                    re: value.re,
                    im: value.im,
                    abs: value.norm(),
                    error_bound,
                    eps: args.eps,
                },
            )
        }
        None => {
            if args.n_min > args.n_max || args.x_samples == 0 {
                return Err(anyhow::anyhow!("empty search range").context(ConfigError));
            }
            let search = CertificateSearch {
                n_range: (args.n_min, args.n_max),
                x_samples: args.x_samples,
                tau: args.tau,
                eps: args.eps,
            };
            let certificate = completeness_certificate(&w, &lattice, &search)?;
            write_json(
                args.out.as_deref(),
                &ThetaSearchReport {
                    tool: TOOL,
                    window: echo,
                    window_id,
                    lattice: LatticeInfo::from(&lattice),
                    theta: ThetaSection {
                        search: SearchInfo {
                            n_min: args.n_min,
                            n_max: args.n_max,
                            x_samples: args.x_samples,
                            tau: args.tau,
                            eps: args.eps,
                        },
                        certificate,
                    },
                },
            )
        }
    }
}

/// Input signals for `reconstruct`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SignalSpec {
    Window,
    Zero,
    #[serde(untagged)]
    Test(TestFunction),
}

fn parse_signal(s: &str) -> Result<SignalSpec> {
    match s {
        "window" => Ok(SignalSpec::Window),
        "zero" => Ok(SignalSpec::Zero),
        other => parse_test_function(other).map(SignalSpec::Test),
    }
}

#[derive(Serialize)]
struct Sampling {
    start: f64,
    step: f64,
    len: usize,
}

#[derive(Serialize)]
struct ReconstructReport {
    tool: Tool,
    window: WindowConfig,
    window_id: String,
    lattice: LatticeInfo,
    signal: SignalSpec,
    sampling: Sampling,
    pinv_tol: f64,
    k_max: i64,
    l_max: i64,
    zak_grid: [usize; 2],
    /// `None` when the input is zero.
    relative_error: Option<f64>,
    max_abs_error: f64,
    cutoff_fraction: f64,
    unstable: bool,
    warnings: Vec<String>,
    cutoff_cells: Vec<[f64; 2]>,
}

fn reconstruct_warnings(rec: &gabor_zz::zibulski::Reconstruction) -> Vec<String> {
    let mut out = Vec::new();
    if rec.unstable {
        out.push("reconstruction unstable".to_string());
    }
    if !rec.cutoff_cells.is_empty() {
        out.push(format!(
            "pseudo-inverse cutoff applied on {} of {} Zak cells",
            rec.cutoff_cells.len(),
            rec.grid.0 * rec.grid.1
        ));
    }
    out
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<()> {
    let lattice = config(RationalLattice::new(args.alpha, args.p, args.q))?;
    let signal = config(parse_signal(&args.signal))?;
    let (echo, w) = load_window(&args.window)?;
    let input = match &signal {
        SignalSpec::Window => SampledSignal::symmetric(args.half_width, args.step, |t| w.eval(t)),
        SignalSpec::Zero => SampledSignal::symmetric(args.half_width, args.step, |_| Complex64::new(0.0, 0.0)),
        SignalSpec::Test(tf) => SampledSignal::symmetric(args.half_width, args.step, tf.evaluator()),
    }?;
    let rec = reconstruct(&input, &w, &lattice, args.eps, args.pinv_tol)?;
    let max_abs_error = input
        .values()
        .iter()
        .zip(rec.signal.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let relative_error = (input.norm() > 0.0)
        .then(|| rec.signal.relative_error(&input))
        .transpose()?;
    let report = ReconstructReport {
        tool: TOOL,
        window: echo,
        window_id: w.spec().id(),
        lattice: LatticeInfo::from(&lattice),
        signal,
        sampling: Sampling {
            start: input.start(),
            step: input.step(),
            len: input.len(),
        },
        pinv_tol: args.pinv_tol,
        k_max: rec.k_max,
        l_max: rec.l_max,
        zak_grid: [rec.grid.0, rec.grid.1],
        relative_error,
        max_abs_error,
        cutoff_fraction: rec.cutoff_fraction,
        unstable: rec.unstable,
        warnings: reconstruct_warnings(&rec),
        cutoff_cells: rec.cutoff_cells.iter().map(|&(x, xi)| [x, xi]).collect(),
    };
    if let Some(path) = &args.csv {
        let text = csv_text(
            &["t", "input_re", "input_im", "output_re", "output_im"],
            input.points().zip(input.values()).zip(rec.signal.values()).map(|((t, a), b)| {
                vec![t.to_string(), a.re.to_string(), a.im.to_string(), b.re.to_string(), b.im.to_string()]
            }),
        )?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    write_json(args.out.as_deref(), &report)
}

#[derive(Serialize)]
struct OracleReport {
    tool: Tool,
    window: WindowConfig,
    window_id: String,
    lattice: LatticeInfo,
    #[serde(flatten)]
    oracle: OracleSection,
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let lattice = config(RationalLattice::new(args.alpha, args.p, args.q))?;
    let sizes: Vec<usize> = config(parse_list(&args.sizes))?;
    let test_function = config(parse_test_function(&args.test_function))?;
    let solver = config(parse_solver(&args.solver))?;
    let (echo, w) = load_window(&args.window)?;
    let f = test_function.evaluator();
    let sweep: Vec<SweepRow> = residual_sweep(&f, &w, &lattice, &sizes, solver)?
        .into_iter()
        .map(|(size, residual)| SweepRow { size, residual })
        .collect();
    if let Some(path) = &args.csv {
        fs::write(path, sweep_csv(&sweep)?).with_context(|| format!("writing {}", path.display()))?;
    }
    write_json(
        args.out.as_deref(),
        &OracleReport {
            tool: TOOL,
            window: echo,
            window_id: w.spec().id(),
            lattice: LatticeInfo::from(&lattice),
            oracle: OracleSection {
                test_function,
                solver,
                sweep,
            },
        },
    )
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(anyhow::anyhow!("--threads must be positive").context(ConfigError));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Theta(a) => cmd_theta(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("64x32").unwrap(), (64, 32));
        assert!(parse_grid("1x4").is_err());
        assert!(parse_grid("64").is_err());
    }

    #[test]
    fn densities() {
        assert_eq!(parse_densities("1/2, 2/3,3/2").unwrap(), vec![(1, 2), (2, 3), (3, 2)]);
        assert!(parse_densities("1:2").is_err());
    }

    #[test]
    fn test_functions_and_solvers() {
        assert_eq!(parse_test_function("random:7").unwrap(), TestFunction::RandomSmooth { seed: 7 });
        assert_eq!(
            parse_test_function("bump:0.1,0.4").unwrap(),
            TestFunction::Bump { lo: 0.1, hi: 0.4 }
        );
        assert!(parse_test_function("bump:0.4,0.1").is_err());
        assert_eq!(parse_solver("pinv:1e-8").unwrap(), Solver::Pinv { rel_cutoff: 1e-8 });
        assert_eq!(parse_solver("ridge").unwrap(), Solver::Ridge { ridge: None });
        assert!(parse_solver("qr").is_err());
    }

    #[test]
    fn error_codes() {
        let e = anyhow::Error::new(gabor_zz::Error::InvalidLattice("x".into()));
        assert_eq!(exit_code(&e), 2);
        let e = anyhow::Error::new(gabor_zz::Error::Linalg("x".into()));
        assert_eq!(exit_code(&e), 3);
        let e = anyhow::anyhow!("bad").context(ConfigError);
        assert_eq!(exit_code(&e), 2);
        let e = anyhow::Error::new(io::Error::other("disk"));
        assert_eq!(exit_code(&e), 1);
    }
}

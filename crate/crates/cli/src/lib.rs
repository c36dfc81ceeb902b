//! Batch driver: each subcommand loads or builds the zero cache, runs one
//! family of checks and writes a machine-readable report.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use zetapfrac::asymptotics::{complete_monotone_check, monotone_profile, sin_product_decrease, xi_profile, ProductDescriptor, SignTable};
use zetapfrac::audit::{exponent_estimates, MIN_AUDIT_ZEROS};
use zetapfrac::coefficients::{fill_coefficients, CoefficientSet};
use zetapfrac::complex::c;
use zetapfrac::laplace::{transform_residual, DensityConfig};
use zetapfrac::partial_fraction::{delta_eval, ExpansionTruncation};
use zetapfrac::zeros::{load_cache, locate_zeros, save_cache, ZeroCache, ZeroTarget};
use zetapfrac::{ComplexValue, Error, PrecisionContext, Result, Warning};

pub const CACHE_ENV: &str = "ZETAPFRAC_CACHE";

/// Default evaluation points of `verify-expansion`.
pub const VERIFY_POINTS: [(f64, f64); 4] = [(2.0, 0.0), (2.0, 2.0), (1.0, 10.0), (6.0, 3.0)];
/// Heights of the monotonicity profiles.
pub const MONOTONE_HEIGHTS: [f64; 4] = [0.0, 5.0, 14.2, 30.0];
pub const MONOTONE_GRID: usize = 50;
pub const CM_ORDER: usize = 4;
pub const CM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "zetapfrac", version, about = "Zero table, residues and numeric checks for f(s) = 1/(sin(pi s/4) 2 xi(1/2 + s))")]
pub struct Cli {
    /// significant digits of the working precision
    #[arg(long, global = true, default_value_t = 30)]
    pub digits: u32,
    /// zeros to locate and to keep in the expansion
    #[arg(long = "n", global = true, default_value_t = 100)]
    pub n: usize,
    /// semicircle radius factor around each zero, in (0, 1/2)
    #[arg(long, global = true, default_value_t = 0.25)]
    pub alpha: f64,
    /// disk radius around the real poles, in (0, 2]
    #[arg(long, global = true, default_value_t = 2.0)]
    pub d: f64,
    /// real poles kept in the expansion
    #[arg(long = "W", global = true, default_value_t = 50)]
    pub w: usize,
    /// zero cache (CSV with a JSON sidecar)
    #[arg(long, global = true, env = CACHE_ENV, default_value = "zeros.csv")]
    pub cache: PathBuf,
    /// directory for reports
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// table format for `coeffs` and `verify-expansion`; other reports are JSON
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Locate the first N zeros and write the cache.
    Zeros,
    /// Fill c(i gamma_k) into the cache and report all coefficients.
    Coeffs,
    /// Compare f with the truncated expansion at the given points.
    VerifyExpansion {
        /// point as RE,IM; repeatable, defaults to 2,0 2,2 1,10 6,3
        #[arg(long = "s", value_parser = parse_point)]
        s: Vec<(f64, f64)>,
    },
    /// Estimate the growth exponents and evaluate the conjecture inequalities.
    AuditConjectures,
    /// Monotonicity and complete-monotonicity checks along horizontal lines.
    MonotoneCheck,
    /// Two-sided Laplace transform of g_0 against f.
    LaplaceCheck {
        /// point as RE,IM with 0 < RE < 4
        #[arg(long = "s", value_parser = parse_point, default_value = "2,0")]
        s: (f64, f64),
    },
    /// Every step above in order.
    All,
}

pub fn parse_point(v: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = v.split_once(',').ok_or_else(|| format!("expected RE,IM, got {v:?}"))?;
    let re = a.trim().parse::<f64>().map_err(|e| format!("{a:?}: {e}"))?;
    let im = b.trim().parse::<f64>().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((re, im))
}

/// Validated settings shared by all subcommands.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub digits: u32,
    pub n_zeros: usize,
    pub alpha: f64,
    pub d: f64,
    pub w: usize,
    pub cache_path: PathBuf,
    pub out: PathBuf,
    pub format: Format,
    #[serde(skip)]
    pub ctx: PrecisionContext,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig> {
        let ctx = PrecisionContext::new(cli.digits)?;
        if cli.n == 0 {
            return Err(Error::Config("--n must be positive".into()));
        }
        if cli.w == 0 {
            return Err(Error::Config("--W must be positive".into()));
        }
        if !(cli.alpha > 0.0 && cli.alpha < 0.5) {
            return Err(Error::Config(format!("--alpha must lie in (0, 1/2), got {}", cli.alpha)));
        }
        if !(cli.d > 0.0 && cli.d <= 2.0) {
            return Err(Error::Config(format!("--d must lie in (0, 2], got {}", cli.d)));
        }
        Ok(RunConfig {
            digits: cli.digits,
            n_zeros: cli.n,
            alpha: cli.alpha,
            d: cli.d,
            w: cli.w,
            cache_path: cli.cache.clone(),
            out: cli.out.clone(),
            format: cli.format,
            ctx,
        })
    }
}

/// Outcome of a run, ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    /// only informational conditions (warnings) were raised
    Informational,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Informational => 2,
            Status::Fail => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub step: String,
    pub status: Status,
    pub files: Vec<String>,
    pub message: String,
}

fn status_of(warnings: &[Warning]) -> Status {
    if warnings.is_empty() {
        Status::Pass
    } else {
        Status::Informational
    }
}

fn write_file(cfg: &RunConfig, name: &str, bytes: &[u8]) -> Result<String> {
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(name);
    fs::write(&path, bytes)?;
    Ok(path.display().to_string())
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn load(cfg: &RunConfig, need: usize) -> Result<(ZeroCache, Vec<Warning>)> {
    let (cache, warnings) = load_cache(&cfg.cache_path, &cfg.ctx)?;
    if cache.len() < need {
        return Err(Error::MissingCache(format!(
            "{} holds {} zeros, {need} needed; run `zeros --n {need}` first",
            cfg.cache_path.display(),
            cache.len()
        )));
    }
    Ok((cache, warnings))
}

pub fn run_zeros(cfg: &RunConfig) -> Result<StepReport> {
    let (cache, warnings) = locate_zeros(ZeroTarget::Count(cfg.n_zeros), &cfg.ctx)?;
    if let Some(dir) = cfg.cache_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    save_cache(&cache, &cfg.cache_path)?;
    Ok(StepReport {
        step: "zeros".into(),
        status: status_of(&warnings),
        files: vec![cfg.cache_path.display().to_string()],
        message: format!("{} zeros up to t = {:.6}{}", cache.len(), cache.t_max, join_warnings(&warnings)),
    })
}

fn join_warnings(w: &[Warning]) -> String {
    w.iter().map(|w| format!("; warning: {w}")).collect()
}

#[derive(Serialize)]
struct CoefficientRow {
    kind: &'static str,
    index: usize,
    location: String,
    value: String,
    err: f64,
}

#[derive(Serialize)]
struct CoefficientReport<'a> {
    w: usize,
    n: usize,
    rows: &'a [CoefficientRow],
    a: zetapfrac::coefficients::PartialSum,
    b: zetapfrac::coefficients::PartialSum,
    c: zetapfrac::coefficients::PartialSum,
}

pub fn run_coeffs(cfg: &RunConfig) -> Result<StepReport> {
    let (mut cache, warnings) = load(cfg, cfg.n_zeros)?;
    fill_coefficients(&mut cache, &cfg.ctx)?;
    save_cache(&cache, &cfg.cache_path)?;
    let set = CoefficientSet::build(&cache, cfg.w, cfg.n_zeros, &cfg.ctx)?;
    let mut rows = vec![CoefficientRow { kind: "real", index: 0, location: "0".into(), value: format!("{:.30}", set.c0.value), err: set.c0.err }];
    for (i, v) in set.c_real.iter().enumerate() {
        rows.push(CoefficientRow { kind: "real", index: i + 1, location: format!("{}", 4 * (i + 1)), value: format!("{:.30}", v.value), err: v.err });
    }
    for (i, v) in set.c_imag.iter().enumerate() {
        let g = cache.records[i].gamma;
        rows.push(CoefficientRow { kind: "imag", index: i + 1, location: format!("i{:.30}", g), value: format!("{:.30}", v.value), err: v.err });
    }
    let k = &set.constants;
    let (name, bytes) = match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            ("coefficients.csv", w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        }
        Format::Json => ("coefficients.json", json_bytes(&CoefficientReport { w: cfg.w, n: cfg.n_zeros, rows: &rows, a: k.a, b: k.b, c: k.c })?),
    };
    let file = write_file(cfg, name, &bytes)?;
    Ok(StepReport {
        step: "coeffs".into(),
        status: status_of(&warnings),
        files: vec![cfg.cache_path.display().to_string(), file],
        message: format!("A_N = {:e} (tail {:e}), B_N = {:e}, C_N = {:e}{}", k.a.partial, k.a.tail, k.b.partial, k.c.partial, join_warnings(&warnings)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub s_re: f64,
    pub s_im: f64,
    pub region: String,
    pub f: String,
    pub p: String,
    pub delta_abs: f64,
    pub tail_budget: f64,
}

fn complex_str(z: &ComplexValue) -> String {
    format!("{:.20}", z.value())
}

pub fn verify_rows(points: &[(f64, f64)], cfg: &RunConfig) -> Result<Vec<VerifyRow>> {
    let (cache, _) = load(cfg, cfg.n_zeros)?;
    let trunc = ExpansionTruncation::new(cfg.w, cfg.n_zeros, cfg.d, cfg.alpha, &cache, &cfg.ctx)?;
    points
        .iter()
        .map(|&(re, im)| {
            let s = ComplexValue::from_f64(re, im);
            let tag = zetapfrac::partial_fraction::classify(&s, &trunc, &cache);
            let d = delta_eval(&s, &trunc, &cache, &cfg.ctx)?;
            Ok(VerifyRow {
                s_re: re,
                s_im: im,
                region: tag.region.label(),
                f: complex_str(&d.f),
                p: complex_str(&d.p),
                delta_abs: d.delta.abs(),
                tail_budget: d.budget,
            })
        })
        .collect()
}

pub fn run_verify(points: &[(f64, f64)], cfg: &RunConfig) -> Result<StepReport> {
    let points: Vec<(f64, f64)> = if points.is_empty() { VERIFY_POINTS.to_vec() } else { points.to_vec() };
    let rows = verify_rows(&points, cfg)?;
    let (name, bytes) = match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            ("verify_expansion.csv", w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        }
        Format::Json => ("verify_expansion.json", json_bytes(&rows)?),
    };
    let file = write_file(cfg, name, &bytes)?;
    let over: Vec<&VerifyRow> = rows.iter().filter(|r| !(r.delta_abs <= r.tail_budget)).collect();
    Ok(StepReport {
        step: "verify-expansion".into(),
        status: if over.is_empty() { Status::Pass } else { Status::Fail },
        files: vec![file],
        message: format!("{} points, {} with |delta| above the tail budget", rows.len(), over.len()),
    })
}

pub fn run_audit(cfg: &RunConfig) -> Result<StepReport> {
    let (cache, warnings) = load(cfg, cfg.n_zeros)?;
    let report = exponent_estimates(cfg.n_zeros, cfg.alpha, &cache, &cfg.ctx)?;
    let file = write_file(cfg, "audit.json", &json_bytes(&report)?)?;
    let verdicts: Vec<String> = report.verdicts.iter().map(|(k, v)| format!("{k}: {} (margin {:.3})", v.holds, v.margin)).collect();
    Ok(StepReport {
        step: "audit-conjectures".into(),
        // verdicts are informational and never change the status
        status: status_of(&warnings),
        files: vec![file],
        message: format!(
            "eps0 {:.3}, eps1 {:.3}, eps2 {:.3}, eps1~ {:.3}; {}",
            report.eps0_hat.value,
            report.eps1_hat.value,
            report.eps2_hat.value,
            report.eps1tilde_hat.value,
            verdicts.join(", ")
        ),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileResult {
    pub t: f64,
    pub violations: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneReport {
    pub n: usize,
    pub v_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// direct `|xi(1/2 + sqrt(v) + it)|`
    pub xi_direct: Vec<ProfileResult>,
    /// truncated product `|E(sqrt(v) + it)|`
    pub xi_product: Vec<ProfileResult>,
    /// `1/|sin(pi s/4) E(s)|` on `0 < x < 2`
    pub sin_product: Vec<ProfileResult>,
    pub complete_monotone: Vec<(f64, SignTable)>,
}

impl MonotoneReport {
    pub fn violations(&self) -> usize {
        let p = |v: &[ProfileResult]| v.iter().map(|r| r.violations.len()).sum::<usize>();
        p(&self.xi_direct) + p(&self.xi_product) + p(&self.sin_product) + self.complete_monotone.iter().filter(|(_, t)| !t.all_ok()).count()
    }
}

/// `v = 0.1 i` for `i = 0..50` and `x = 0.04 i` for `i = 1..50`.
pub fn monotone_report(cache: &ZeroCache, n: usize, ctx: &PrecisionContext) -> Result<MonotoneReport> {
    let v_grid: Vec<f64> = (0..MONOTONE_GRID).map(|i| 0.1 * i as f64).collect();
    let x_grid: Vec<f64> = (1..MONOTONE_GRID).map(|i| 0.04 * i as f64).collect();
    let desc = ProductDescriptor::xi_product(cache, n, ctx)?;
    let mut xi_direct = Vec::new();
    let mut xi_product = Vec::new();
    let mut sin_product = Vec::new();
    let mut complete_monotone = Vec::new();
    for &t in &MONOTONE_HEIGHTS {
        xi_direct.push(ProfileResult { t, violations: xi_profile(t, &v_grid, ctx)? });
        xi_product.push(ProfileResult { t, violations: monotone_profile(&desc, t, &v_grid, ctx)? });
        sin_product.push(ProfileResult { t, violations: sin_product_decrease(4.0, &desc, t, &x_grid, ctx)? });
        complete_monotone.push((t, complete_monotone_check(&desc, t, 1.0, 0.1, CM_ORDER, CM_TOL, ctx)?));
    }
    Ok(MonotoneReport { n, v_grid, x_grid, xi_direct, xi_product, sin_product, complete_monotone })
}

pub fn run_monotone(cfg: &RunConfig) -> Result<StepReport> {
    let (cache, _) = load(cfg, cfg.n_zeros)?;
    let report = monotone_report(&cache, cfg.n_zeros, &cfg.ctx)?;
    let file = write_file(cfg, "monotone.json", &json_bytes(&report)?)?;
    let v = report.violations();
    Ok(StepReport {
        step: "monotone-check".into(),
        status: if v == 0 { Status::Pass } else { Status::Fail },
        files: vec![file],
        message: format!("{v} violations"),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LaplaceReport {
    pub s_re: f64,
    pub s_im: f64,
    pub n: usize,
    pub integral_re: f64,
    pub integral_im: f64,
    pub f_re: f64,
    pub f_im: f64,
    pub residual: f64,
    pub budget: f64,
}

pub fn laplace_report(s: (f64, f64), cache: &ZeroCache, n: usize, ctx: &PrecisionContext) -> Result<LaplaceReport> {
    let r = transform_residual(c(s.0, s.1), &DensityConfig::new(n), cache, ctx)?;
    Ok(LaplaceReport {
        s_re: s.0,
        s_im: s.1,
        n,
        integral_re: r.integral.0,
        integral_im: r.integral.1,
        f_re: r.f.0,
        f_im: r.f.1,
        residual: r.residual,
        budget: r.budget,
    })
}

pub fn run_laplace(s: (f64, f64), cfg: &RunConfig) -> Result<StepReport> {
    let (cache, _) = load(cfg, cfg.n_zeros)?;
    let report = laplace_report(s, &cache, cfg.n_zeros, &cfg.ctx)?;
    let file = write_file(cfg, "laplace.json", &json_bytes(&report)?)?;
    Ok(StepReport {
        step: "laplace-check".into(),
        status: Status::Pass,
        files: vec![file],
        message: format!("residual {:e} (budget {:e}) at s = {},{}", report.residual, report.budget, s.0, s.1),
    })
}

pub fn run_all(cfg: &RunConfig) -> Result<Vec<StepReport>> {
    let mut steps = vec![run_zeros(cfg)?, run_coeffs(cfg)?, run_verify(&[], cfg)?];
    if cfg.n_zeros >= MIN_AUDIT_ZEROS {
        steps.push(run_audit(cfg)?);
    }
    steps.push(run_monotone(cfg)?);
    steps.push(run_laplace((2.0, 0.0), cfg)?);
    let file = write_file(cfg, "summary.json", &json_bytes(&steps)?)?;
    steps.push(StepReport { step: "summary".into(), status: Status::Pass, files: vec![file], message: String::new() });
    Ok(steps)
}

/// Runs the parsed command; returns the step reports.
pub fn run(cli: &Cli) -> Result<Vec<StepReport>> {
    let cfg = RunConfig::from_cli(cli)?;
    Ok(match &cli.command {
        Command::Zeros => vec![run_zeros(&cfg)?],
        Command::Coeffs => vec![run_coeffs(&cfg)?],
        Command::VerifyExpansion { s } => vec![run_verify(s, &cfg)?],
        Command::AuditConjectures => vec![run_audit(&cfg)?],
        Command::MonotoneCheck => vec![run_monotone(&cfg)?],
        Command::LaplaceCheck { s } => vec![run_laplace(*s, &cfg)?],
        Command::All => run_all(&cfg)?,
    })
}

/// Prints one line per step and returns the process exit code.
pub fn main_with(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(steps) => {
            for s in &steps {
                if s.step != "summary" {
                    println!("{:<18} {:<13} {}", s.step, format!("{:?}", s.status).to_lowercase(), s.message);
                }
            }
            steps.iter().map(|s| s.status).max().unwrap_or(Status::Pass).exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn cli(dir: &Path, args: &[&str]) -> Cli {
        let cache = dir.join("zeros.csv");
        let out = dir.join("out");
        let mut v = vec!["zetapfrac", "--cache", cache.to_str().unwrap(), "--out", out.to_str().unwrap()];
        v.extend_from_slice(args);
        Cli::try_parse_from(v).unwrap()
    }

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("2,0"), Ok((2.0, 0.0)));
        assert_eq!(parse_point(" 1.5 , -3 "), Ok((1.5, -3.0)));
        assert!(parse_point("2").is_err());
        assert!(parse_point("a,1").is_err());
    }

    #[test]
    fn defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::from_cli(&cli(dir.path(), &["zeros"])).unwrap();
        assert_eq!((cfg.digits, cfg.n_zeros, cfg.w), (30, 100, 50));
        assert_eq!((cfg.alpha, cfg.d), (0.25, 2.0));
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn bad_settings_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        for args in [["--alpha", "0.5"], ["--d", "2.5"], ["--n", "0"], ["--W", "0"], ["--digits", "40"]] {
            let mut a = args.to_vec();
            a.push("zeros");
            assert!(RunConfig::from_cli(&cli(dir.path(), &a)).is_err(), "{args:?}");
        }
    }

    #[test]
    fn missing_cache_exits_with_failure() {
        let dir = tempfile::tempdir().unwrap();
        let c = cli(dir.path(), &["verify-expansion"]);
        assert!(matches!(run(&c), Err(Error::MissingCache(_))));
        assert_eq!(main_with(&c), 1);
    }

    #[test]
    fn short_cache_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(main_with(&cli(dir.path(), &["--n", "10", "zeros"])), 0);
        assert!(matches!(run(&cli(dir.path(), &["--n", "20", "coeffs"])), Err(Error::MissingCache(_))));
    }

    #[test]
    fn steps_write_their_reports() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        for step in ["zeros", "coeffs"] {
            assert_eq!(main_with(&cli(p, &["--n", "20", step])), 0);
        }
        assert_eq!(main_with(&cli(p, &["--n", "20", "--format", "json", "coeffs"])), 0);
        assert_eq!(main_with(&cli(p, &["--n", "20", "--W", "10", "verify-expansion", "--s", "2,0", "--s", "2,2"])), 0);
        assert_eq!(main_with(&cli(p, &["--n", "20", "laplace-check", "--s", "2,1"])), 0);
        for f in ["coefficients.csv", "coefficients.json", "verify_expansion.csv", "laplace.json"] {
            assert!(p.join("out").join(f).exists(), "{f}");
        }
        let rows = fs::read_to_string(p.join("out/verify_expansion.csv")).unwrap();
        assert_eq!(rows.lines().count(), 3);
        assert!(rows.starts_with("s_re,s_im,region,f,p,delta_abs,tail_budget"));
    }

    #[test]
    fn audit_needs_enough_zeros() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(main_with(&cli(dir.path(), &["--n", "20", "zeros"])), 0);
        assert!(run(&cli(dir.path(), &["--n", "20", "audit-conjectures"])).is_err());
    }

    #[test]
    fn exit_codes_follow_severity() {
        assert_eq!(Status::Pass.exit_code(), 0);
        assert_eq!(Status::Informational.exit_code(), 2);
        assert_eq!(Status::Fail.exit_code(), 1);
        assert!(Status::Fail > Status::Informational && Status::Informational > Status::Pass);
    }
}

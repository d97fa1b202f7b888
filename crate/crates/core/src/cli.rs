//! Command-line front end: a TOML run configuration, flag overrides and the
//! `kernel`, `distance`, `verify`, `sweep` and `constants` jobs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{fmt_f64, write_distance_csv, DistanceResult, Workspace};
use crate::error::{Error, Result};
use crate::function_space::{BasisSpec, Discretization};
use crate::geometry::Point;
use crate::minimizer::{MinimizerSolution, SolverOptions};
use crate::verify::{appendix_constants, p_continuity_sweep, Suite, SuiteSettings, Summary, VerificationReport, Verifier};

pub const KERNEL_CSV: &str = "kernel.csv";
pub const COEFFICIENTS_JSONL: &str = "coefficients.jsonl";
pub const DISTANCE_CSV: &str = "distance.csv";
pub const REPORTS_JSONL: &str = "reports.jsonl";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_REPORTS_JSONL: &str = "sweep_reports.jsonl";
pub const CONSTANTS_CSV: &str = "constants.csv";

/// Everything a run depends on. Serialized as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Exponents; empty means the command's own default.
    pub p: Vec<f64>,
    /// Points for `kernel` and `distance`, each a list of `[re, im]` coordinates.
    pub points: Vec<Point>,
    pub out: PathBuf,
    pub discretization: Discretization,
    pub solver: SolverOptions,
    pub verify: VerifyConfig,
    pub sweep: SweepConfig,
    /// Also write the minimizer coefficients from `kernel`.
    pub dump_coefficients: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    pub settings: SuiteSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub z: Point,
    pub w: Point,
    pub q: Vec<f64>,
    pub final_gap: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20240601,
            p: vec![],
            points: vec![],
            out: PathBuf::from("out"),
            discretization: Discretization::disk_default(),
            solver: SolverOptions::default(),
            verify: VerifyConfig::default(),
            sweep: SweepConfig::default(),
            dump_coefficients: false,
        }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suites: vec![Suite::All],
            settings: SuiteSettings::default(),
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            z: 0.0.into(),
            w: 0.5.into(),
            q: SuiteSettings::default().sweep_q,
            final_gap: 0.05,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks exponents, points and the discretization; nothing is written
    /// before this passes.
    pub fn validate(&self) -> Result<()> {
        let bad_p = |p: f64| !(p >= 1.0) || !p.is_finite();
        if let Some(p) = self.p.iter().chain(&self.sweep.q).find(|&&p| bad_p(p)) {
            return Err(Error::Config(format!("p values must be finite and >= 1, got {p}")));
        }
        let d = &self.discretization;
        d.domain.validate().map_err(|e| Error::Config(e.to_string()))?;
        if d.radial_n == 0 || d.angular_n == 0 {
            return Err(Error::Config("quadrature resolution must be positive".into()));
        }
        for z in self.points.iter() {
            if z.dim() != d.domain.dim() || !d.domain.contains(z.coords()) {
                return Err(Error::Config(format!("point {z} is not in {}", d.domain)));
            }
        }
        Ok(())
    }

    fn exponents_or(&self, default: &[f64]) -> Vec<f64> {
        if self.p.is_empty() {
            default.to_vec()
        } else {
            self.p.clone()
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pbergman", version, about = "p-Bergman kernels, distances and metric checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// m_p(z0) and K_p(z0) for every configured (p, z0).
    Kernel(Common),
    /// ρ_p over all ordered pairs of configured points.
    Distance(Common),
    /// Run verification suites; exit status 1 if any check fails.
    Verify(Common),
    /// ρ_q(z, w) for q around p.
    Sweep(Common),
    /// Table of the constants c_p and C_p.
    Constants(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated exponents.
    #[arg(long = "p", value_delimiter = ',', num_args = 1..)]
    pub p: Option<Vec<f64>>,
    /// Basis degree (the annulus gets Laurent degrees -N..N).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Quadrature resolution, radial x angular (e.g. 64x128).
    #[arg(long, value_parser = parse_quad)]
    pub quad: Option<(usize, usize)>,
    /// Verification suite; may repeat.
    #[arg(long, value_enum)]
    pub suite: Vec<Suite>,
}

fn parse_quad(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, a) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected RxA, got `{s}`"))?;
    let r: usize = r.trim().parse().map_err(|e| format!("radial count: {e}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("angular count: {e}"))?;
    Ok((r, a))
}

impl Common {
    /// The configuration file (or defaults) with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(p) = &self.p {
            c.p = p.clone();
        }
        if let Some(n) = self.degree {
            c.discretization.basis = BasisSpec::uniform(n);
        }
        if let Some((r, a)) = self.quad {
            c.discretization.radial_n = r;
            c.discretization.angular_n = a;
        }
        if !self.suite.is_empty() {
            c.verify.suites = self.suite.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

/// What a command produced: the files written and whether every check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<fs::File>)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = fs::File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

fn coord_columns(name: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![format!("{name}_re"), format!("{name}_im")]
    } else {
        (1..=dim)
            .flat_map(|j| [format!("{name}{j}_re"), format!("{name}{j}_im")])
            .collect()
    }
}

fn status_text(e: &Error) -> String {
    format!("error: {e}").replace([',', '\n'], ";")
}

/// One row of `kernel.csv`.
#[derive(Debug, Clone)]
struct KernelRow {
    z: Point,
    p: f64,
    solution: Option<MinimizerSolution>,
    status: String,
}

pub fn cmd_kernel(c: &RunConfig) -> Result<Outcome> {
    c.validate()?;
    let ws = Workspace::from_discretization(&c.discretization, c.solver)?;
    let tuples: Vec<(f64, &Point)> = c
        .exponents_or(&[2.0])
        .into_iter()
        .flat_map(|p| c.points.iter().map(move |z| (p, z)))
        .collect();
    let rows: Vec<KernelRow> = tuples
        .par_iter()
        .map(|&(p, z)| {
            let (solution, status) = match ws.minimizer(p, z) {
                Ok(s) => (Some((*s).clone()), "ok".to_string()),
                Err(Error::Convergence { best, .. }) => (Some(*best), "not-converged".to_string()),
                Err(e) => (None, status_text(&e)),
            };
            KernelRow {
                z: z.clone(),
                p,
                solution,
                status,
            }
        })
        .collect();

    let dim = c.discretization.domain.dim();
    let (path, mut out) = create(&c.out, KERNEL_CSV)?;
    let mut header = coord_columns("z", dim);
    header.extend(["p", "m_p", "K_p", "iterations", "gradient_residual", "status"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for r in &rows {
        let mut cols: Vec<String> = r.z.coords().iter().flat_map(|v| [fmt_f64(v.re), fmt_f64(v.im)]).collect();
        cols.push(fmt_f64(r.p));
        match &r.solution {
            Some(s) => {
                cols.push(fmt_f64(s.m_value));
                cols.push(fmt_f64(s.kernel()));
                cols.push(s.iterations.to_string());
                cols.push(fmt_f64(s.gradient_residual));
            }
            None => cols.extend(["NaN", "NaN", "0", "NaN"].map(String::from)),
        }
        cols.push(r.status.clone());
        writeln!(out, "{}", cols.join(","))?;
    }
    out.flush()?;
    let mut files = vec![path];

    if c.dump_coefficients {
        let (path, mut out) = create(&c.out, COEFFICIENTS_JSONL)?;
        for s in rows.iter().filter_map(|r| r.solution.as_ref()) {
            writeln!(out, "{}", serde_json::to_string(&s.record()).expect("records serialize"))?;
        }
        out.flush()?;
        files.push(path);
    }
    Ok(Outcome { files, passed: true })
}

pub fn cmd_distance(c: &RunConfig) -> Result<Outcome> {
    c.validate()?;
    let ws = Workspace::from_discretization(&c.discretization, c.solver)?;
    let mut tuples = vec![];
    for p in c.exponents_or(&[2.0]) {
        for z in &c.points {
            for w in &c.points {
                tuples.push((p, z, w));
            }
        }
    }
    let rows: Vec<DistanceResult> = tuples
        .par_iter()
        .map(|&(p, z, w)| {
            ws.distance(p, z, w).unwrap_or_else(|e| {
                eprintln!("distance p={p} z={z} w={w}: {e}");
                DistanceResult {
                    z: z.clone(),
                    w: w.clone(),
                    p,
                    rho: f64::NAN,
                    theta_opt: f64::NAN,
                    phase_grid_size: 0,
                    refinement_iterations: 0,
                }
            })
        })
        .collect();
    let (path, out) = create(&c.out, DISTANCE_CSV)?;
    let mut out = out;
    write_distance_csv(&mut out, c.discretization.domain.dim(), &rows)?;
    out.flush()?;
    Ok(Outcome {
        files: vec![path],
        passed: rows.iter().all(|r| r.rho.is_finite()),
    })
}

fn write_reports(dir: &Path, name: &str, reports: &[VerificationReport]) -> Result<PathBuf> {
    let (path, mut out) = create(dir, name)?;
    for r in reports {
        writeln!(out, "{}", r.to_json_line())?;
    }
    out.flush()?;
    Ok(path)
}

pub fn cmd_verify(c: &RunConfig) -> Result<(Outcome, Summary)> {
    c.validate()?;
    let exponents = if c.p.is_empty() { None } else { Some(c.p.clone()) };
    let v = Verifier::new(
        c.discretization.clone(),
        c.solver,
        c.seed,
        exponents,
        c.verify.settings.clone(),
    )?;
    let mut reports = vec![];
    for s in Suite::expand(&c.verify.suites) {
        reports.extend(v.run(s)?);
    }
    let summary = Summary::of(&reports);
    let reports_path = write_reports(&c.out, REPORTS_JSONL, &reports)?;
    let (summary_path, mut out) = create(&c.out, SUMMARY_TXT)?;
    writeln!(out, "{summary}")?;
    out.flush()?;
    Ok((
        Outcome {
            files: vec![reports_path, summary_path],
            passed: summary.all_passed(),
        },
        summary,
    ))
}

pub fn cmd_sweep(c: &RunConfig) -> Result<Outcome> {
    c.validate()?;
    let ws = Workspace::from_discretization(&c.discretization, c.solver)?;
    let centers = c.exponents_or(&[2.0]);
    let results = centers
        .par_iter()
        .map(|&p| p_continuity_sweep(&ws, &c.sweep.z, &c.sweep.w, p, &c.sweep.q, c.sweep.final_gap))
        .collect::<Result<Vec<_>>>()?;
    let (path, mut out) = create(&c.out, SWEEP_CSV)?;
    writeln!(out, "p,q,rho_p,rho_q,gap")?;
    for r in &results {
        for row in &r.rows {
            let cols = [r.p_center, row.q, r.rho_center, row.rho, row.gap].map(fmt_f64);
            writeln!(out, "{}", cols.join(","))?;
        }
    }
    out.flush()?;
    let reports: Vec<VerificationReport> = results.into_iter().flat_map(|r| r.reports).collect();
    let rpath = write_reports(&c.out, SWEEP_REPORTS_JSONL, &reports)?;
    Ok(Outcome {
        files: vec![path, rpath],
        passed: reports.iter().all(|r| r.passed()),
    })
}

pub fn cmd_constants(c: &RunConfig) -> Result<Outcome> {
    c.validate()?;
    let ps = c.exponents_or(&[2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
    let (path, mut out) = create(&c.out, CONSTANTS_CSV)?;
    writeln!(out, "p,I1,I2,c_p,C_p")?;
    for p in ps {
        let k = appendix_constants(p).map_err(|e| Error::Config(e.to_string()))?;
        let cols = [k.p, k.i1, k.i2, k.c_p, k.big_c_p].map(fmt_f64);
        writeln!(out, "{}", cols.join(","))?;
    }
    out.flush()?;
    Ok(Outcome {
        files: vec![path],
        passed: true,
    })
}

/// Exit status: 0 success, 1 a failed check or runtime error, 2 a usage or
/// configuration error.
pub fn run(cli: Cli) -> ExitCode {
    let (common, job): (&Common, fn(&RunConfig) -> Result<Outcome>) = match &cli.command {
        Command::Kernel(c) => (c, cmd_kernel),
        Command::Distance(c) => (c, cmd_distance),
        Command::Verify(c) => (c, |c| {
            let (o, s) = cmd_verify(c)?;
            println!("{s}");
            Ok(o)
        }),
        Command::Sweep(c) => (c, cmd_sweep),
        Command::Constants(c) => (c, cmd_constants),
    };
    let config = match common.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pbergman: {e}");
            return ExitCode::from(2);
        }
    };
    match job(&config) {
        Ok(o) => {
            for f in &o.files {
                eprintln!("wrote {}", f.display());
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ (Error::Config(_) | Error::Parameter(_))) => {
            eprintln!("pbergman: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("pbergman: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn default_config_round_trips() {
        let mut c = RunConfig::default();
        c.points = vec![0.0.into(), Point::scalar(Complex64::new(0.25, -0.1))];
        c.p = vec![1.5, 2.0];
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = RunConfig::from_toml("seed = 7\n[discretization]\nradial_n = 8\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.discretization.radial_n, 8);
        assert_eq!(c.discretization.angular_n, 128);
        assert!(RunConfig::from_toml("sed = 7").is_err());
    }

    #[test]
    fn small_exponents_are_rejected() {
        let c = RunConfig {
            p: vec![0.5],
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "seed = 1\np = [3.0]\n").unwrap();
        let cli = Cli::try_parse_from([
            "pbergman", "verify", "--config", path.to_str().unwrap(), "--seed", "9", "--quad", "8x16", "--degree",
            "4", "--suite", "holder", "--suite", "boundary",
        ])
        .unwrap();
        let Command::Verify(common) = cli.command else { panic!() };
        let c = common.resolve().unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.p, vec![3.0]);
        assert_eq!((c.discretization.radial_n, c.discretization.angular_n), (8, 16));
        assert_eq!(c.discretization.basis.disk_degree, 4);
        assert_eq!(c.verify.suites, vec![Suite::Holder, Suite::Boundary]);
    }

    #[test]
    fn quad_parser() {
        assert_eq!(parse_quad("64x128"), Ok((64, 128)));
        assert!(parse_quad("64").is_err());
    }
}

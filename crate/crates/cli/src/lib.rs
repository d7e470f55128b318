//! Command line front end: `solve`, `converge`, `korn` and `regularity`.
//!
//! Exit codes: 0 success, 1 bad flags or arguments, 2 solver failure,
//! 3 file errors, 4 a monotonicity violation in a convergence study.

pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use steklov_core::fem::BoundaryWeight;
use steklov_core::harness::{emit_report, report_file_name, run_convergence, ReportFormat, StudyConfig};
use steklov_core::mesh::{read_mesh, Mesh};
use steklov_core::steklov::{estimate_korn_constant, regularity_root, solve_steklov, SolveRecord, SteklovProblem};
use steklov_core::{ElasticMaterial, Error};

use config::{parse_config_text, Command, ConfigError, DomainSel, OutputFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MONOTONICITY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Steklov eigenvalues of the Lamé operator by finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Solve on one mesh and print the smallest nonzero κ.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Mesh level: subdivisions per unit length, or boundary segments for the disk.
        #[arg(long)]
        n: Option<String>,
        /// Result JSON path (default `<out-dir>/<domain>_k<k>_n<n>.json`).
        #[arg(long)]
        output: Option<String>,
    },
    /// Refinement study written as CSV, JSON and SVG.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma separated study levels.
        #[arg(long)]
        levels: Option<String>,
        /// Generate the reference directly at this level.
        #[arg(long)]
        reference_level: Option<String>,
        /// Reference by uniform refinement of the finest level (default 2).
        #[arg(long)]
        reference_refinements: Option<String>,
    },
    /// Discrete Korn constant per level.
    Korn {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        levels: Option<String>,
    },
    /// Corner regularity exponent and predicted convergence rates.
    Regularity {
        #[command(flatten)]
        common: CommonArgs,
        /// Interior angle in degrees.
        #[arg(long, allow_hyphen_values = true)]
        theta_deg: Option<String>,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Standard output format: text or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// square, lshape, disk, cube or meshfile.
    #[arg(long)]
    domain: Option<String>,
    /// Mesh file for `--domain meshfile`.
    #[arg(long)]
    mesh: Option<String>,
    /// Polynomial degree, 1 or 2.
    #[arg(long)]
    k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Scalar boundary weight.
    #[arg(long)]
    p: Option<String>,
    /// Matrix boundary weight, rows separated by `;`, e.g. `1,0;0,2`.
    #[arg(long)]
    weight_matrix: Option<String>,
    #[arg(long)]
    n_eigs: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

fn put(map: &mut BTreeMap<String, String>, key: &str, value: Option<String>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v);
    }
}

impl ProblemArgs {
    fn fill(self, map: &mut BTreeMap<String, String>) {
        put(map, "domain", self.domain);
        put(map, "mesh", self.mesh);
        put(map, "k", self.k);
        put(map, "lambda", self.lambda);
        put(map, "mu", self.mu);
        put(map, "p", self.p);
        put(map, "weight_matrix", self.weight_matrix);
        put(map, "n_eigs", self.n_eigs);
        put(map, "tol", self.tol);
        put(map, "max_iter", self.max_iter);
        put(map, "seed", self.seed);
    }
}

enum Failure {
    Usage(String),
    Solver(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::EigenNotConverged { .. }
            | Error::NotConverged { .. }
            | Error::Breakdown { .. }
            | Error::NotPositiveDefinite { .. } => Failure::Solver(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Merges flags over the optional config file.
fn resolve(sub: Sub) -> Result<(RunConfig, bool), Failure> {
    let mut flags = BTreeMap::new();
    let (command, common) = match sub {
        Sub::Solve { common, problem, n, output } => {
            problem.fill(&mut flags);
            put(&mut flags, "n", n);
            put(&mut flags, "output", output);
            (Command::Solve, common)
        }
        Sub::Converge { common, problem, levels, reference_level, reference_refinements } => {
            problem.fill(&mut flags);
            put(&mut flags, "levels", levels);
            put(&mut flags, "reference_level", reference_level);
            put(&mut flags, "reference_refinements", reference_refinements);
            (Command::Converge, common)
        }
        Sub::Korn { common, problem, n, levels } => {
            problem.fill(&mut flags);
            put(&mut flags, "n", n);
            put(&mut flags, "levels", levels);
            (Command::Korn, common)
        }
        Sub::Regularity { common, theta_deg } => {
            put(&mut flags, "theta_deg", theta_deg);
            (Command::Regularity, common)
        }
    };
    put(&mut flags, "format", common.format);
    put(&mut flags, "out_dir", common.out_dir);

    let mut merged = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    if let Some(c) = merged.get("command") {
        if c != command.name() {
            return Err(Failure::Usage(format!("config file is for '{c}', not '{}'", command.name())));
        }
    }
    // A flag replaces a config value, including its exclusive partner.
    for (a, b) in [("p", "weight_matrix"), ("reference_level", "reference_refinements")] {
        if flags.contains_key(a) {
            merged.remove(b);
        }
        if flags.contains_key(b) {
            merged.remove(a);
        }
    }
    merged.extend(flags);
    merged.insert("command".into(), command.name().into());
    Ok((RunConfig::from_map(&merged)?, common.print_config))
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = resolve(cli.command).and_then(|(config, print_config)| {
        if print_config {
            out.write_all(config.canonical().as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
            return Ok(EXIT_OK);
        }
        match config.command {
            Command::Solve => cmd_solve(&config, out),
            Command::Converge => cmd_converge(&config, out),
            Command::Korn => cmd_korn(&config, out),
            Command::Regularity => cmd_regularity(&config, out),
        }
    });
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nRun 'steklov --help' for usage.");
            EXIT_USAGE
        }
        Err(Failure::Solver(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_SOLVER
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_IO
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

fn weight(config: &RunConfig) -> Result<BoundaryWeight, Failure> {
    Ok(match &config.weight_matrix {
        Some(m) => BoundaryWeight::matrix(m.clone())?,
        None => BoundaryWeight::scalar(config.p)?,
    })
}

/// Meshes to run on, labelled by level; a mesh file has no level.
fn meshes(config: &RunConfig) -> Result<Vec<(Option<usize>, Mesh)>, Failure> {
    match config.domain.expect("checked by RunConfig") {
        DomainSel::MeshFile => {
            let path = config.mesh.as_ref().expect("checked by RunConfig");
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let mesh = read_mesh(&text).map_err(|e| io_failure(path, e))?;
            Ok(vec![(None, mesh)])
        }
        DomainSel::Generated(domain) => {
            let mut levels = config.levels.clone();
            if let Some(n) = config.n {
                if !levels.contains(&n) {
                    levels.push(n);
                    levels.sort_unstable();
                }
            }
            levels.into_iter().map(|l| Ok((Some(l), domain.generate(l)?))).collect()
        }
    }
}

fn cmd_solve(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let (level, mesh) = meshes(config)?.into_iter().next().expect("one mesh");
    let dim = mesh.dim();
    let material = ElasticMaterial::new(config.lambda, config.mu, dim)?;
    let mut problem = SteklovProblem::new(mesh, config.k, material, weight(config)?, config.n_eigs)?;
    problem.solver = config.eigen_options(dim);
    let solution = solve_steklov(&problem)?;
    let domain = config.domain.expect("checked by RunConfig").name();
    let record = SolveRecord::new(domain, &problem, &solution);
    let mut json = serde_json::to_vec_pretty(&record).map_err(|e| Failure::Io(e.to_string()))?;
    json.push(b'\n');

    let path = config.output.clone().unwrap_or_else(|| {
        let suffix = level.map_or(String::new(), |l| format!("_n{l}"));
        config.out_dir.join(format!("{domain}_k{}{suffix}.json", config.k))
    });
    write_file(&path, &json)?;

    match config.format {
        OutputFormat::Json => emit(out, &String::from_utf8_lossy(&json))?,
        OutputFormat::Text => {
            let mut text = format!(
                "domain {domain}  k {}  N {}  h {:.6}\nzero modes {}  angle {:.3e}\n{:>4} {:>12} {:>12} {:>10}\n",
                config.k, solution.n_dofs, solution.h, solution.zero_mode_count, solution.zero_mode_angle, "i", "kappa", "w",
                "residual"
            );
            for (i, ((k, w), r)) in solution.kappas.iter().zip(&solution.omegas).zip(&solution.residuals).enumerate() {
                text.push_str(&format!("{:>4} {:>12.6} {:>12.6} {:>10.2e}\n", i + 1, k, w, r));
            }
            for warning in &solution.warnings {
                text.push_str(&format!("warning: {warning}\n"));
            }
            emit(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_converge(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let Some(DomainSel::Generated(domain)) = config.domain else {
        return Err(Failure::Usage("converge needs a generated domain".into()));
    };
    let dim = domain.dim();
    let mut study = StudyConfig::new(domain, config.levels.clone());
    study.degree = config.k;
    study.reference = config.reference;
    study.material = ElasticMaterial::new(config.lambda, config.mu, dim)?;
    study.weight = weight(config)?;
    study.n_eigs = config.n_eigs;
    study.solver = Some(config.eigen_options(dim));
    let report = run_convergence(&study)?;

    let mut written = Vec::new();
    for format in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg] {
        let path = config.out_dir.join(report_file_name(&report, format));
        write_file(&path, &emit_report(&report, format)?)?;
        written.push(path);
    }

    let slowest = report.rates.iter().cloned().filter(|r| r.is_finite()).fold(f64::INFINITY, f64::min);
    match config.format {
        OutputFormat::Json => emit(out, &String::from_utf8_lossy(&emit_report(&report, ReportFormat::Json)?))?,
        OutputFormat::Text => {
            let mut text = format!("domain {}  k {}\n{:>6} {:>10} {:>10}\n", domain.name(), config.k, "level", "N", "h");
            for l in &report.levels {
                text.push_str(&format!("{:>6} {:>10} {:>10.6}\n", l.level, l.n_dofs, l.h));
            }
            text.push_str(&format!("reference N {}\n{:>4} {:>12} {:>10}\n", report.reference.n_dofs, "eig", "kappa_ref", "rate"));
            for (i, r) in report.rates.iter().enumerate() {
                text.push_str(&format!("{:>4} {:>12.6} {:>10.6}\n", i + 1, report.reference.kappas[i], r));
            }
            text.push_str(&format!("slowest rate {slowest:.6}\npredicted rate {:.6}\n", report.predicted_rate));
            for path in &written {
                text.push_str(&format!("wrote {}\n", path.display()));
            }
            emit(out, &text)?;
        }
    }
    if report.monotonicity_violations.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_MONOTONICITY)
    }
}

fn cmd_korn(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let weight = weight(config)?;
    let mut rows = Vec::new();
    for (level, mesh) in meshes(config)? {
        let dim = mesh.dim();
        let material = ElasticMaterial::new(config.lambda, config.mu, dim)?;
        let estimate = estimate_korn_constant(&mesh, config.k)?;
        rows.push(json!({
            "level": level,
            "n_dofs": dim * steklov_core::fem::build_space(&mesh, config.k)?.n_nodes(),
            "c_h": estimate.c_h,
            "lambda_min": estimate.lambda_min,
            "alpha": estimate.alpha(&material, weight.lower_bound(), dim),
        }));
    }
    match config.format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).map_err(|e| Failure::Io(e.to_string()))?;
            s.push('\n');
            emit(out, &s)?
        }
        OutputFormat::Text => {
            let mut text = format!("{:>6} {:>10} {:>12} {:>12} {:>12}\n", "level", "N", "C_h", "lambda_min", "alpha");
            for r in &rows {
                let level = r["level"].as_u64().map_or("-".to_string(), |l| l.to_string());
                text.push_str(&format!(
                    "{:>6} {:>10} {:>12.6} {:>12.6} {:>12.6}\n",
                    level,
                    r["n_dofs"].as_u64().unwrap_or(0),
                    r["c_h"].as_f64().unwrap_or(f64::NAN),
                    r["lambda_min"].as_f64().unwrap_or(f64::NAN),
                    r["alpha"].as_f64().unwrap_or(f64::NAN)
                ));
            }
            emit(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_regularity(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let theta_deg = config.theta_deg.expect("checked by RunConfig");
    let info = regularity_root(theta_deg.to_radians())?;
    let rates = [info.predicted_rate(1), info.predicted_rate(2)];
    match config.format {
        OutputFormat::Json => {
            let value = json!({
                "theta_deg": theta_deg,
                "theta": info.theta,
                "r1": info.r1,
                "degenerate": info.degenerate,
                "predicted_rates": { "k1": rates[0], "k2": rates[1] },
            });
            let mut s = serde_json::to_string_pretty(&value).map_err(|e| Failure::Io(e.to_string()))?;
            s.push('\n');
            emit(out, &s)?
        }
        OutputFormat::Text => emit(
            out,
            &format!(
                "theta_deg {theta_deg:.6}\nr1 {:.6}\ndegenerate {}\nrate k=1 {:.6}\nrate k=2 {:.6}\n",
                info.r1, info.degenerate, rates[0], rates[1]
            ),
        )?,
    }
    Ok(EXIT_OK)
}

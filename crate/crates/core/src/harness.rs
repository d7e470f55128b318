//! Refinement studies: solve a sequence of meshes, measure errors against a
//! finer reference and fit convergence rates.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::fem::{BoundaryWeight, ElasticMaterial};
use crate::mesh::{uniform_refine, Domain, Mesh};
use crate::steklov::{regularity_root, solve_steklov, SteklovProblem};

/// Fewest study levels a rate is fitted over.
pub const MIN_LEVELS: usize = 3;

/// Slack allowed when checking that κ does not increase under refinement.
pub const MONOTONICITY_SLACK: f64 = 1e-9;

/// How the reference solution is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Reference {
    /// Uniform refinements of the finest study mesh.
    Refinements(usize),
    /// Mesh generated directly at this level parameter.
    Level(usize),
}

impl Default for Reference {
    fn default() -> Self {
        Reference::Refinements(2)
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub domain: Domain,
    pub degree: usize,
    /// Generator level parameters, coarse to fine.
    pub levels: Vec<usize>,
    pub reference: Reference,
    /// Degree used for the reference solve.
    pub reference_degree: usize,
    pub material: ElasticMaterial,
    /// Must be uniform so it carries over between meshes.
    pub weight: BoundaryWeight,
    pub n_eigs: usize,
    pub solver: Option<EigenOptions>,
}

impl StudyConfig {
    /// Defaults: P1, λ = μ = p = 1, seven eigenvalues, reference two refinements finer.
    pub fn new(domain: Domain, levels: Vec<usize>) -> StudyConfig {
        StudyConfig {
            domain,
            degree: 1,
            levels,
            reference: Reference::default(),
            reference_degree: 1,
            material: ElasticMaterial { lambda: 1.0, mu: 1.0 },
            weight: BoundaryWeight::Scalar { values: vec![1.0], lower_bound: 1.0 },
            n_eigs: 7,
            solver: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    /// Generator parameter, or the finest level for a refined reference.
    pub level: usize,
    pub refinements: usize,
    pub n_dofs: usize,
    pub h: f64,
    pub kappas: Vec<f64>,
}

/// Benchmark values for one of the canonical domains: κ_h at five mesh
/// sizes, a fine reference value and a rate per eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub n_dofs: Vec<usize>,
    /// `values[i][j]`: eigenvalue `i` at mesh `j`.
    pub values: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkComparison {
    pub table: BenchmarkTable,
    /// Our κ minus the benchmark κ for levels whose DOF count matches exactly.
    pub deltas: Vec<Option<Vec<f64>>>,
    /// Our reference κ minus the benchmark reference.
    pub reference_deltas: Vec<f64>,
    /// Our fitted rates minus the benchmark rates.
    #[serde(with = "nan_as_null")]
    pub rate_deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub domain: Domain,
    pub degree: usize,
    pub lambda: f64,
    pub mu: f64,
    pub levels: Vec<LevelResult>,
    pub reference: LevelResult,
    /// `errors[level][eig] = |κ_h − κ_ref|`.
    pub errors: Vec<Vec<f64>>,
    /// Least-squares slope per eigenvalue; NaN when undefined.
    #[serde(with = "nan_as_null")]
    pub rates: Vec<f64>,
    /// `2 min{k, r1}` for the largest interior angle of the domain.
    #[serde(with = "nan_as_null::single")]
    pub predicted_rate: f64,
    /// (eigenvalue index, level index) pairs where κ grew under refinement.
    pub monotonicity_violations: Vec<(usize, usize)>,
    pub benchmark: Option<BenchmarkComparison>,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opts: Vec<Option<f64>> = values.iter().map(|v| v.is_finite().then_some(*v)).collect();
        opts.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opts = Vec::<Option<f64>>::deserialize(d)?;
        Ok(opts.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }

    pub mod single {
        use super::*;

        pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
            value.is_finite().then_some(*value).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
        }
    }
}

/// Least-squares slope of `log(err)` against `log(h)`, ignoring zero errors.
pub fn fit_rate(hs: &[f64], errors: &[f64]) -> Result<f64> {
    if hs.len() != errors.len() {
        return Err(Error::DimensionMismatch { expected: hs.len(), got: errors.len() });
    }
    let pts: Vec<(f64, f64)> =
        hs.iter().zip(errors).filter(|(h, e)| **h > 0.0 && **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!("{} usable (h, error) pairs, need 2", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all mesh sizes are equal".into()));
    }
    Ok(sxy / sxx)
}

fn solve_level(config: &StudyConfig, mesh: Mesh, degree: usize, level: usize, refinements: usize) -> Result<LevelResult> {
    let mut problem = SteklovProblem::new(mesh, degree, config.material, config.weight.clone(), config.n_eigs)?;
    if let Some(opts) = &config.solver {
        problem.solver = opts.clone();
    }
    let sol = solve_steklov(&problem)?;
    if sol.kappas.len() < config.n_eigs {
        return Err(Error::InsufficientData(format!(
            "level {level}: {} nonzero eigenvalues, wanted {}",
            sol.kappas.len(),
            config.n_eigs
        )));
    }
    Ok(LevelResult { level, refinements, n_dofs: sol.n_dofs, h: problem.mesh.h(), kappas: sol.kappas })
}

/// Solves every study level and the reference, then derives errors and rates.
pub fn run_convergence(config: &StudyConfig) -> Result<ConvergenceReport> {
    if config.weight.facet_count().is_some() {
        return Err(Error::InvalidArgument("refinement studies need a uniform boundary weight".into()));
    }
    let mut levels: Vec<usize> = config.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < MIN_LEVELS {
        return Err(Error::InsufficientData(format!(
            "{} distinct study levels, need at least {MIN_LEVELS}",
            levels.len()
        )));
    }
    let finest = *levels.last().unwrap();

    let mut meshes = Vec::with_capacity(levels.len());
    for &level in &levels {
        meshes.push(config.domain.generate(level)?);
    }
    let reference_mesh = match config.reference {
        Reference::Refinements(r) => {
            let mut mesh = meshes.last().unwrap().clone();
            for _ in 0..r {
                mesh = uniform_refine(&mesh);
            }
            (mesh, finest, r)
        }
        Reference::Level(level) => {
            if level <= finest {
                return Err(Error::InvalidArgument(format!(
                    "reference level {level} is not finer than study level {finest}"
                )));
            }
            (config.domain.generate(level)?, level, 0)
        }
    };

    // Inputs are immutable, so every level (and the reference) runs on its own thread.
    let (results, reference) = std::thread::scope(|scope| {
        let (mesh, level, refinements) = reference_mesh;
        let reference = scope.spawn(move || solve_level(config, mesh, config.reference_degree, level, refinements));
        let handles: Vec<_> = meshes
            .into_iter()
            .zip(&levels)
            .map(|(mesh, &level)| scope.spawn(move || solve_level(config, mesh, config.degree, level, 0)))
            .collect();
        let results: Vec<Result<LevelResult>> = handles.into_iter().map(|h| h.join().expect("level solve panicked")).collect();
        (results, reference.join().expect("reference solve panicked"))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = reference?;
    Ok(build_report(config, results, reference))
}

/// Builds a report from levels solved elsewhere. Every κ list must hold at
/// least `config.n_eigs` values.
pub fn build_report(config: &StudyConfig, levels: Vec<LevelResult>, reference: LevelResult) -> ConvergenceReport {
    let n = config.n_eigs;
    let errors: Vec<Vec<f64>> =
        levels.iter().map(|l| (0..n).map(|i| (l.kappas[i] - reference.kappas[i]).abs()).collect()).collect();
    let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let rates: Vec<f64> = (0..n)
        .map(|i| {
            let errs: Vec<f64> = errors.iter().map(|e| e[i]).collect();
            fit_rate(&hs, &errs).unwrap_or(f64::NAN)
        })
        .collect();

    let mut monotonicity_violations = Vec::new();
    let mut chain: Vec<&LevelResult> = levels.iter().collect();
    chain.push(&reference);
    for i in 0..n {
        for w in 1..chain.len() {
            if chain[w].kappas[i] > chain[w - 1].kappas[i] + MONOTONICITY_SLACK {
                monotonicity_violations.push((i, w));
            }
        }
    }

    let theta = config.domain.largest_interior_angle();
    let predicted_rate = regularity_root(theta).map(|r| r.predicted_rate(config.degree)).unwrap_or(f64::NAN);

    let benchmark = benchmark_table(config.domain).filter(|_| is_benchmark_setting(config)).map(|table| {
        let m = n.min(table.reference.len());
        let deltas = levels
            .iter()
            .map(|l| {
                table
                    .n_dofs
                    .iter()
                    .position(|&nd| nd == l.n_dofs)
                    .map(|j| (0..m).map(|i| l.kappas[i] - table.values[i][j]).collect())
            })
            .collect();
        let reference_deltas = (0..m).map(|i| reference.kappas[i] - table.reference[i]).collect();
        let rate_deltas = (0..m).map(|i| rates[i] - table.rates[i]).collect();
        BenchmarkComparison { table, deltas, reference_deltas, rate_deltas }
    });

    ConvergenceReport {
        domain: config.domain,
        degree: config.degree,
        lambda: config.material.lambda,
        mu: config.material.mu,
        levels,
        reference,
        errors,
        rates,
        predicted_rate,
        monotonicity_violations,
        benchmark,
    }
}

fn is_benchmark_setting(config: &StudyConfig) -> bool {
    config.degree == 1
        && config.material.lambda == 1.0
        && config.material.mu == 1.0
        && matches!(&config.weight, BoundaryWeight::Scalar { values, .. } if values == &[1.0])
}

/// Benchmark table for λ = μ = p = 1 and P1 elements.
pub fn benchmark_table(domain: Domain) -> Option<BenchmarkTable> {
    let (n_dofs, values, reference, rates): (&[usize], &[[f64; 5]], &[f64], &[f64]) = match domain {
        Domain::Square => (
            &[242, 1922, 5202, 10082, 16562],
            &[
                [2.800192, 2.57581, 2.549729, 2.541415, 2.537678],
                [2.872823, 2.710273, 2.689398, 2.682579, 2.679477],
                [2.966591, 2.722965, 2.69431, 2.685177, 2.681081],
                [3.734775, 3.714195, 3.712252, 3.711705, 3.711479],
                [5.480897, 5.103026, 4.906772, 4.842315, 4.81281],
                [5.860259, 5.288715, 5.266997, 5.260878, 5.258216],
                [6.84993, 5.806006, 5.801406, 5.800129, 5.799602],
            ],
            &[2.532570, 2.675175, 2.675513, 3.711202, 4.771482, 5.254700, 5.79879],
            &[2.0419, 2.0136, 2.0499, 2.2488, 1.9973, 2.1177, 2.2558],
        ),
        Domain::Disk => (
            &[190, 1520, 4046, 7794, 12956],
            &[
                [3.003639, 3.000406, 3.000146, 3.000075, 3.000045],
                [3.003639, 3.000406, 3.000146, 3.000075, 3.000045],
                [3.059373, 3.006645, 3.002431, 3.001284, 3.000756],
                [3.063728, 3.00676, 3.00252, 3.001312, 3.00077],
                [4.324313, 4.036279, 4.013165, 4.006795, 4.004003],
                [4.39301, 4.03863, 4.014033, 4.007199, 4.004586],
                [5.007277, 5.000812, 5.000292, 5.000149, 5.00009],
            ],
            &[3.000009, 3.000009, 3.000009, 3.000009, 4.000014, 4.000014, 5.000018],
            &[2.1645, 2.0699, 2.1528, 2.0730, 2.1638, 2.1349, 2.1995],
        ),
        Domain::Lshape => (
            &[616, 5114, 14244, 27164, 45620],
            &[
                [1.168833, 1.158064, 1.156757, 1.156416, 1.156000],
                [1.750674, 1.719661, 1.716536, 1.715522, 1.715113],
                [2.061, 2.021514, 2.016901, 2.015461, 2.014828],
                [2.177396, 2.135806, 2.130581, 2.128869, 2.127828],
                [2.724265, 2.635748, 2.623772, 2.620085, 2.618166],
                [2.94148, 2.770783, 2.751355, 2.744538, 2.741737],
                [3.513536, 3.404443, 3.385, 3.378496, 3.375532],
            ],
            &[1.155308, 1.714410, 2.01371, 2.125962, 2.614815, 2.736563, 3.370429],
            &[1.5808, 1.6349, 1.6895, 1.4848, 1.7108, 1.5737, 1.8972],
        ),
        Domain::Cube => (
            &[1029, 3000, 6591, 12288, 20577],
            &[
                [2.082904, 2.072949, 2.068958, 2.066928, 2.065802],
                [2.082904, 2.072949, 2.068958, 2.066979, 2.065861],
                [2.084313, 2.073188, 2.068959, 2.066979, 2.065861],
                [2.099347, 2.094227, 2.092327, 2.091424, 2.090926],
                [2.106801, 2.098076, 2.094638, 2.092955, 2.092011],
                [2.106801, 2.098076, 2.094638, 2.092955, 2.092011],
                [2.119688, 2.110279, 2.106316, 2.104312, 2.103168],
            ],
            &[2.06318, 2.063182, 2.063182, 2.089772, 2.089774, 2.089774, 2.100399],
            &[2.0820, 2.0238, 2.0242, 2.0952, 2.0469, 2.0469, 2.0007],
        ),
    };
    Some(BenchmarkTable {
        n_dofs: n_dofs.to_vec(),
        values: values.iter().map(|r| r.to_vec()).collect(),
        reference: reference.to_vec(),
        rates: rates.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Svg => "svg",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// `<domain>_k<k>_conv.<ext>`
pub fn report_file_name(report: &ConvergenceReport, format: ReportFormat) -> String {
    format!("{}_k{}_conv.{}", report.domain.name(), report.degree, format.extension())
}

pub fn emit_report(report: &ConvergenceReport, format: ReportFormat) -> Result<Vec<u8>> {
    Ok(match format {
        ReportFormat::Csv => emit_csv(report).into_bytes(),
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)?;
            bytes.push(b'\n');
            bytes
        }
        ReportFormat::Svg => emit_svg(report).into_bytes(),
    })
}

pub fn read_report_json(bytes: &[u8]) -> Result<ConvergenceReport> {
    Ok(serde_json::from_slice(bytes)?)
}

fn emit_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("level,N,h,eig_index,kappa,error,rate\n");
    for (l, level) in report.levels.iter().enumerate() {
        for (i, err) in report.errors[l].iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{:.10e},{},{:.12},{:.6e},{:.4}",
                level.level,
                level.n_dofs,
                level.h,
                i + 1,
                level.kappas[i],
                err,
                report.rates[i]
            );
        }
    }
    out
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

fn emit_svg(report: &ConvergenceReport) -> String {
    let (width, height, margin) = (640.0, 480.0, 60.0);
    let points: Vec<(f64, f64)> = report
        .levels
        .iter()
        .zip(&report.errors)
        .flat_map(|(l, errs)| errs.iter().filter(|e| **e > 0.0).map(move |e| ((l.n_dofs as f64).log10(), e.log10())))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if points.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, -1.0, 0.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (width - 2.0 * margin);
    let sy = |y: f64| height - margin - (y - y0) / (y1 - y0) * (height - 2.0 * margin);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{} (k={}): error vs N</text>"#,
        width / 2.0,
        report.domain.name(),
        report.degree
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        m = margin,
        t = margin,
        b = height - margin,
        r = width - margin
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">log10 N</text>"#,
        width / 2.0,
        height - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 {})">log10 |error|</text>"#,
        height / 2.0,
        height / 2.0
    );

    // Slope guides: error ∝ h^r ∝ N^(-r/d), anchored at the coarsest largest error.
    let d = report.domain.dim() as f64;
    for (rate, dash) in [(1.089, "6 4"), (2.0, "2 3")] {
        let ya = y1;
        let yb = y1 - rate / d * (x1 - x0);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#444" stroke-dasharray="{dash}"/>"##,
            sx(x0),
            sy(ya),
            sx(x1),
            sy(yb)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="#444">rate {rate}</text>"##,
            sx(x1) - 60.0,
            sy(yb) - 4.0
        );
    }

    let n = report.errors.first().map_or(0, |e| e.len());
    for i in 0..n {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = report
            .levels
            .iter()
            .zip(&report.errors)
            .filter(|(_, e)| e[i] > 0.0)
            .map(|(l, e)| format!("{:.2},{:.2}", sx((l.n_dofs as f64).log10()), sy(e[i].log10())))
            .collect();
        if coords.is_empty() {
            continue;
        }
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">κ{} rate {:.3}</text>"#,
            width - margin + 4.0 - 60.0,
            margin + 14.0 * i as f64,
            i + 1,
            report.rates[i]
        );
    }
    svg.push_str("</svg>\n");
    svg
}

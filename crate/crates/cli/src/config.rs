//! Run configuration: flags and `key = value` config files merged into one
//! validated record with a canonical text form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use steklov_core::eigen::{DEFAULT_SEED, EigenOptions};
use steklov_core::harness::Reference;
use steklov_core::mesh::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Converge,
    Korn,
    Regularity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Converge => "converge",
            Command::Korn => "korn",
            Command::Regularity => "regularity",
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "solve" => Ok(Command::Solve),
            "converge" => Ok(Command::Converge),
            "korn" => Ok(Command::Korn),
            "regularity" => Ok(Command::Regularity),
            other => Err(ConfigError(format!("unknown command '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainSel {
    Generated(Domain),
    MeshFile,
}

impl DomainSel {
    pub fn name(self) -> &'static str {
        match self {
            DomainSel::Generated(d) => d.name(),
            DomainSel::MeshFile => "meshfile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Every key a config file or flag set may carry, in canonical order.
pub const KEYS: &[&str] = &[
    "command",
    "domain",
    "mesh",
    "n",
    "levels",
    "reference_level",
    "reference_refinements",
    "k",
    "lambda",
    "mu",
    "p",
    "weight_matrix",
    "n_eigs",
    "tol",
    "max_iter",
    "seed",
    "theta_deg",
    "out_dir",
    "output",
    "format",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub domain: Option<DomainSel>,
    pub mesh: Option<PathBuf>,
    pub n: Option<usize>,
    pub levels: Vec<usize>,
    pub reference: Reference,
    pub k: usize,
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
    pub weight_matrix: Option<Vec<Vec<f64>>>,
    pub n_eigs: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub theta_deg: Option<f64>,
    pub out_dir: PathBuf,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| ConfigError(format!("line {}: expected 'key = value'", i + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!("line {}: unknown key '{key}'", i + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError(format!("invalid value '{value}' for {key}")))
}

fn parse_positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(key, value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError(format!("{key} must be positive and finite, got {value}")))
    }
}

fn parse_seed(value: &str) -> Result<u64, ConfigError> {
    let parsed = match value.strip_prefix("0x").or_else(|| value.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => value.parse().ok(),
    };
    parsed.ok_or_else(|| ConfigError(format!("invalid seed '{value}'")))
}

/// `1,0;0,2` is the 2×2 matrix with rows separated by `;`.
fn parse_matrix(value: &str) -> Result<Vec<Vec<f64>>, ConfigError> {
    let rows: Vec<Vec<f64>> = value
        .split(';')
        .map(|row| row.split(',').map(|x| parse("weight_matrix", x.trim())).collect::<Result<Vec<f64>, _>>())
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if !(n == 2 || n == 3) || rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError(format!("weight_matrix must be 2x2 or 3x3, got '{value}'")));
    }
    Ok(rows)
}

fn fmt_matrix(m: &[Vec<f64>]) -> String {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join(";")
}

impl RunConfig {
    /// Builds a config from merged key/value pairs; missing keys take defaults.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError(format!("unknown key '{key}'")));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let command: Command = parse("command", get("command").ok_or_else(|| ConfigError("missing command".into()))?)?;
        let domain = get("domain")
            .map(|d| match d {
                "meshfile" => Ok(DomainSel::MeshFile),
                other => other.parse::<Domain>().map(DomainSel::Generated).map_err(|e| ConfigError(e.to_string())),
            })
            .transpose()?;
        let mesh = get("mesh").map(PathBuf::from);
        let n = get("n").map(|v| parse::<usize>("n", v)).transpose()?;
        let levels = match get("levels") {
            Some(v) if !v.is_empty() => {
                let mut l = v.split(',').map(|x| parse::<usize>("levels", x.trim())).collect::<Result<Vec<_>, _>>()?;
                l.sort_unstable();
                l.dedup();
                l
            }
            _ => Vec::new(),
        };
        let reference = match (get("reference_level"), get("reference_refinements")) {
            (Some(_), Some(_)) => {
                return Err(ConfigError("reference_level and reference_refinements are exclusive".into()))
            }
            (Some(v), None) => Reference::Level(parse("reference_level", v)?),
            (None, Some(v)) => Reference::Refinements(parse("reference_refinements", v)?),
            (None, None) => Reference::default(),
        };
        let k = get("k").map(|v| parse::<usize>("k", v)).transpose()?.unwrap_or(1);
        if k != 1 && k != 2 {
            return Err(ConfigError(format!("k must be 1 or 2, got {k}")));
        }
        let lambda = get("lambda").map(|v| parse::<f64>("lambda", v)).transpose()?.unwrap_or(1.0);
        let mu = get("mu").map(|v| parse_positive("mu", v)).transpose()?.unwrap_or(1.0);
        if get("p").is_some() && get("weight_matrix").is_some() {
            return Err(ConfigError("p and weight_matrix are exclusive".into()));
        }
        let p = get("p").map(|v| parse_positive("p", v)).transpose()?.unwrap_or(1.0);
        let weight_matrix = get("weight_matrix").map(parse_matrix).transpose()?;
        let n_eigs = get("n_eigs").map(|v| parse::<usize>("n_eigs", v)).transpose()?.unwrap_or(7);
        if n_eigs == 0 {
            return Err(ConfigError("n_eigs must be at least 1".into()));
        }
        let tol = get("tol").map(|v| parse_positive("tol", v)).transpose()?.unwrap_or(EigenOptions::default().tol);
        let max_iter = get("max_iter").map(|v| parse::<usize>("max_iter", v)).transpose()?.unwrap_or(2000);
        let seed = get("seed").map(parse_seed).transpose()?.unwrap_or(DEFAULT_SEED);
        let theta_deg = get("theta_deg").map(|v| parse::<f64>("theta_deg", v)).transpose()?;
        let out_dir = PathBuf::from(get("out_dir").unwrap_or("."));
        let output = get("output").map(PathBuf::from);
        let format = match get("format").unwrap_or("text") {
            "text" => OutputFormat::Text,
            "json" => OutputFormat::Json,
            other => return Err(ConfigError(format!("format must be text or json, got '{other}'"))),
        };
        let config = RunConfig {
            command,
            domain,
            mesh,
            n,
            levels,
            reference,
            k,
            lambda,
            mu,
            p,
            weight_matrix,
            n_eigs,
            tol,
            max_iter,
            seed,
            theta_deg,
            out_dir,
            output,
            format,
        };
        config.check_required()?;
        Ok(config)
    }

    fn check_required(&self) -> Result<(), ConfigError> {
        let needs_domain = self.command != Command::Regularity;
        if needs_domain {
            match self.domain {
                None => return Err(ConfigError("--domain is required".into())),
                Some(DomainSel::MeshFile) if self.mesh.is_none() => {
                    return Err(ConfigError("--domain meshfile needs --mesh <path>".into()))
                }
                Some(DomainSel::MeshFile) if self.command == Command::Converge => {
                    return Err(ConfigError("converge needs a generated domain".into()))
                }
                _ => {}
            }
        }
        let generated = matches!(self.domain, Some(DomainSel::Generated(_)));
        match self.command {
            Command::Solve if generated && self.n.is_none() => Err(ConfigError("--n is required".into())),
            Command::Korn if generated && self.n.is_none() && self.levels.is_empty() => {
                Err(ConfigError("--n or --levels is required".into()))
            }
            Command::Converge if self.levels.is_empty() => Err(ConfigError("--levels is required".into())),
            Command::Regularity if self.theta_deg.is_none() => Err(ConfigError("--theta-deg is required".into())),
            _ => Ok(()),
        }
    }

    /// Resolved values as strings, keyed like the config file.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("command", self.command.name().into());
        if let Some(d) = self.domain {
            put("domain", d.name().into());
        }
        if let Some(p) = &self.mesh {
            put("mesh", p.display().to_string());
        }
        if let Some(n) = self.n {
            put("n", n.to_string());
        }
        if !self.levels.is_empty() {
            put("levels", self.levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","));
        }
        if self.command == Command::Converge {
            match self.reference {
                Reference::Level(l) => put("reference_level", l.to_string()),
                Reference::Refinements(r) => put("reference_refinements", r.to_string()),
            }
        }
        put("k", self.k.to_string());
        put("lambda", self.lambda.to_string());
        put("mu", self.mu.to_string());
        match &self.weight_matrix {
            Some(w) => put("weight_matrix", fmt_matrix(w)),
            None => put("p", self.p.to_string()),
        }
        put("n_eigs", self.n_eigs.to_string());
        put("tol", format!("{:e}", self.tol));
        put("max_iter", self.max_iter.to_string());
        put("seed", format!("{:#x}", self.seed));
        if let Some(t) = self.theta_deg {
            put("theta_deg", t.to_string());
        }
        put("out_dir", self.out_dir.display().to_string());
        if let Some(o) = &self.output {
            put("output", o.display().to_string());
        }
        put("format", if self.format == OutputFormat::Json { "json" } else { "text" }.into());
        m
    }

    /// `key = value` lines in the fixed key order.
    pub fn canonical(&self) -> String {
        let map = self.to_map();
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = map.get(*key) {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out
    }

    pub fn eigen_options(&self, dim: usize) -> EigenOptions {
        EigenOptions { tol: self.tol, max_iter: self.max_iter, seed: self.seed, ..EigenOptions::for_dim(dim) }
    }
}

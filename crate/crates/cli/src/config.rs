use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use mvhermite::exact::{int, parse_rational, rat, Rational};
use mvhermite::weight::{FamilyKind, WeightFamily};

/// Failures mapped to exit codes: `Invalid` → 2, `Failed` → 1.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Failed(String),
}

impl From<mvhermite::Error> for CliError {
    fn from(e: mvhermite::Error) -> Self {
        match e {
            mvhermite::Error::InvalidParameters(_) | mvhermite::Error::ParseRational(_) => {
                CliError::Invalid(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("I/O error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Contents of a `--config` file. Every key is optional; flags win.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<String>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub nu: Option<String>,
    pub lambda: Option<String>,
    pub rho: Option<String>,
    #[serde(rename = "C")]
    pub c: Option<String>,
    pub nmax: Option<usize>,
    pub mmax: Option<usize>,
    pub route: Option<String>,
    pub mode: Option<String>,
    pub format: Option<String>,
    pub suites: Option<Vec<String>>,
    pub degree_cap: Option<usize>,
    pub tend: Option<f64>,
    pub h: Option<f64>,
    pub tolerance: Option<f64>,
    pub quad_tolerance: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("bad config {}: {e}", path.display())))
    }
}

/// Family selection flags shared by all subcommands.
#[derive(Args, Clone, Debug, Default)]
pub struct FamilyArgs {
    /// pochhammer, gamma or flat
    #[arg(long)]
    pub family: Option<String>,
    /// Matrix size N
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// ν as "p/q"
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    /// λ for the gamma family, "p/q"
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// ρ for the flat family, "p/q"
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// C for the flat family, "p/q"
    #[arg(long = "C", allow_hyphen_values = true)]
    pub c: Option<String>,
}

fn rational_arg(name: &str, value: &str) -> CliResult<Rational> {
    parse_rational(value).map_err(|_| CliError::Invalid(format!("{name} must be an exact rational \"p/q\", got {value:?}")))
}

impl FamilyArgs {
    /// True if any family flag or key was supplied.
    pub fn any(&self, file: &FileConfig) -> bool {
        self.family.is_some() || file.family.is_some() || self.n.is_some() || file.n.is_some()
    }

    pub fn resolve(&self, file: &FileConfig) -> CliResult<WeightFamily> {
        let kind: FamilyKind = self
            .family
            .clone()
            .or_else(|| file.family.clone())
            .unwrap_or_else(|| "pochhammer".into())
            .parse()
            .map_err(|e: mvhermite::Error| CliError::Invalid(e.to_string()))?;
        let n = self.n.or(file.n).unwrap_or(2);
        let get = |name: &str, flag: &Option<String>, key: &Option<String>, default: Rational| -> CliResult<Rational> {
            match flag.as_ref().or(key.as_ref()) {
                Some(v) => rational_arg(name, v),
                None => Ok(default),
            }
        };
        let nu = get("nu", &self.nu, &file.nu, int(1))?;
        let lambda = get("lambda", &self.lambda, &file.lambda, int(1))?;
        let rho = get("rho", &self.rho, &file.rho, int(1))?;
        let c = get("C", &self.c, &file.c, rat(1, 2))?;
        Ok(WeightFamily::new(kind, n, nu, lambda, rho, c)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Route {
    All,
    Recurrence,
    Explicit,
    Rodrigues,
    Gs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Parses a value-enum string coming from a config file.
pub fn enum_from_file<T: ValueEnum>(name: &str, value: &str) -> CliResult<T> {
    T::from_str(value, true).map_err(|_| CliError::Invalid(format!("invalid {name} {value:?} in config")))
}

pub fn pick<T: ValueEnum + Copy>(name: &str, flag: Option<T>, file: &Option<String>, default: T) -> CliResult<T> {
    match (flag, file) {
        (Some(v), _) => Ok(v),
        (None, Some(s)) => enum_from_file(name, s),
        (None, None) => Ok(default),
    }
}

pub fn load_file(path: &Option<PathBuf>) -> CliResult<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Declares an options struct whose fields are all optional, so that a
/// config-file table and the command line can be overlaid field by field.
macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])* pub $field: Option<$ty>,)*
        }

        impl $name {
            /// Fields set on `self` win over `file`.
            pub fn overlay(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Bulk,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// `F_2` (or `F_{2m}` for Monte Carlo).
    F,
    /// `D_2` (or `D_{2m}`).
    D,
    /// `F_2(x, x)` through the confluent kernel.
    Confluent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Gl,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum TheoryQuantity {
    LambdaStar,
    D2,
    F2,
    Crossover,
    SHat,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma2,
    Grassmann,
    Wedge,
    Hciz,
    Hs,
    Airy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Bulk,
    Outside,
    Edge,
}

/// How `p` follows `n` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum PRule {
    /// `p = value`.
    Const,
    /// `p = n`.
    N,
    /// `p = n^value`.
    Pow,
    /// `p = n^{2/3} / value`.
    EdgeC,
}

impl PRule {
    pub fn p(self, n: usize, value: f64) -> f64 {
        let nf = n as f64;
        match self {
            PRule::Const => value,
            PRule::N => nf,
            PRule::Pow => nf.powf(value),
            PRule::EdgeC => nf.powf(2.0 / 3.0) / value,
        }
    }
}

options! {
    EstimateOpts {
        #[arg(long)] n: usize,
        #[arg(long)] p: f64,
        #[arg(long, allow_hyphen_values = true)] lambda0: f64,
        /// Offsets x_1..x_{2m}, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x: Vec<f64>,
        /// Checked against the number of offsets when given.
        #[arg(long)] m: usize,
        #[arg(long)] samples: usize,
        #[arg(long)] seed: u64,
        #[arg(long, value_enum)] quantity: Quantity,
        #[arg(long, value_enum)] scale: Scale,
    }
}

options! {
    IntrepOpts {
        #[arg(long)] n: usize,
        #[arg(long)] p: f64,
        #[arg(long, allow_hyphen_values = true)] lambda0: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x: Vec<f64>,
        #[arg(long, value_enum)] quantity: Quantity,
        #[arg(long)] nodes: usize,
        #[arg(long)] truncation: f64,
        /// Contour shift; the advisor's choice when absent.
        #[arg(long, allow_hyphen_values = true)] gamma: f64,
        #[arg(long, value_enum)] rule: Rule,
    }
}

options! {
    TheoryOpts {
        #[arg(long)] n: usize,
        #[arg(long)] p: f64,
        #[arg(long, allow_hyphen_values = true)] lambda0: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x: Vec<f64>,
        #[arg(long, value_enum)] quantity: TheoryQuantity,
        /// Distance `4 - 4b2² - λ0²` for the crossover class.
        #[arg(long, allow_hyphen_values = true)] delta: f64,
        /// Edge parameter `n^{2/3}/p`; `inf` selects the trivial regime.
        #[arg(long)] c: f64,
    }
}

options! {
    VerifyOpts {
        #[arg(long, value_enum)] suite: Suite,
        #[arg(long)] samples: usize,
        #[arg(long)] seed: u64,
        /// Overrides the suite's default tolerance.
        #[arg(long, allow_hyphen_values = true)] tolerance: f64,
    }
}

options! {
    ConvergeOpts {
        #[arg(long, value_enum)] study: Study,
        /// Matrix sizes, comma separated.
        #[arg(long, value_delimiter = ',')] n_list: Vec<usize>,
        #[arg(long, value_enum)] p_rule: PRule,
        /// Parameter of the p rule (p, exponent or c).
        #[arg(long)] p: f64,
        #[arg(long, allow_hyphen_values = true)] lambda0: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x: Vec<f64>,
        #[arg(long)] nodes: usize,
    }
}

#[derive(Debug, Parser)]
#[command(name = "charpoly", version, about = "Correlation functions of characteristic polynomials of sparse Erdős–Rényi matrices")]
pub struct Cli {
    /// TOML file with one table per subcommand; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "CHARPOLY_THREADS")]
    pub threads: Option<usize>,
    /// Fill the wall_time column. Off by default so files are reproducible.
    #[arg(long, global = true)]
    pub record_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of F_{2m} or D_{2m}.
    Estimate(EstimateOpts),
    /// Quadrature of the m = 1 integral representation.
    Intrep(IntrepOpts),
    /// Closed-form limits and asymptotics.
    Theory(TheoryOpts),
    /// Identity and inequality verification suites.
    Verify(VerifyOpts),
    /// Error-versus-n tables against the limiting D_2.
    Converge(ConvergeOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Intrep(_) => "intrep",
            Command::Theory(_) => "theory",
            Command::Verify(_) => "verify",
            Command::Converge(_) => "converge",
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub estimate: EstimateOpts,
    #[serde(default)]
    pub intrep: IntrepOpts,
    #[serde(default)]
    pub theory: TheoryOpts,
    #[serde(default)]
    pub verify: VerifyOpts,
    #[serde(default)]
    pub converge: ConvergeOpts,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully merged invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub record_timing: bool,
    pub command: Command,
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let command = match cli.command {
            Command::Estimate(o) => Command::Estimate(o.overlay(file.estimate)),
            Command::Intrep(o) => Command::Intrep(o.overlay(file.intrep)),
            Command::Theory(o) => Command::Theory(o.overlay(file.theory)),
            Command::Verify(o) => Command::Verify(o.overlay(file.verify)),
            Command::Converge(o) => Command::Converge(o.overlay(file.converge)),
        };
        let threads = cli.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(Self {
            format: cli.format.or(file.format).unwrap_or(Format::Csv),
            out: cli.out.or(file.out),
            threads,
            record_timing: cli.record_timing,
            command,
        })
    }
}

pub(crate) fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "format = \"json\"\n[intrep]\nn = 40\np = 3.0\nnodes = 24\nx = [1.0, -1.0]\n").unwrap();
        let cli = Cli::try_parse_from(["charpoly", "--config", path.to_str().unwrap(), "intrep", "--n", "10", "--lambda0", "-0.5"]).unwrap();
        let run = RunConfig::resolve(cli).unwrap();
        assert_eq!(run.format, Format::Json);
        let Command::Intrep(o) = run.command else { panic!() };
        assert_eq!(o.n, Some(10));
        assert_eq!(o.p, Some(3.0));
        assert_eq!(o.nodes, Some(24));
        assert_eq!(o.lambda0, Some(-0.5));
        assert_eq!(o.x, Some(vec![1.0, -1.0]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "[estimate]\nsampels = 10\n").unwrap();
        let cli = Cli::try_parse_from(["charpoly", "--config", path.to_str().unwrap(), "estimate"]).unwrap();
        assert!(matches!(RunConfig::resolve(cli), Err(CliError::Config(_))));
    }

    #[test]
    fn negative_offsets_parse() {
        let cli = Cli::try_parse_from(["charpoly", "estimate", "--x", "-1,1", "--lambda0", "-1.5"]).unwrap();
        let Command::Estimate(o) = cli.command else { panic!() };
        assert_eq!(o.x, Some(vec![-1.0, 1.0]));
        assert_eq!(o.lambda0, Some(-1.5));
    }

    #[test]
    fn p_rules() {
        assert_eq!(PRule::Const.p(100, 8.0), 8.0);
        assert_eq!(PRule::N.p(100, 0.0), 100.0);
        assert!((PRule::Pow.p(100, 0.5) - 10.0).abs() < 1e-12);
        assert!((PRule::EdgeC.p(1000, 2.0) - 50.0).abs() < 1e-9);
    }
}

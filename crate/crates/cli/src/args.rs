use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fracdyn",
    version,
    about = "Steady states, attractors and decay envelopes of Caputo fractional differential equations",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Mittag-Leffler function E_{alpha,beta}(z)
    Ml(MlArgs),
    /// Integrate D^alpha x = g(x) and write the trajectory as CSV
    Simulate(SimulateArgs),
    /// Dissipativity, steady states and the attractor interval of a scalar field
    Attractor(AttractorArgs),
    /// Predicted and simulated limits for a list of initial values
    Limits(LimitsArgs),
    /// Heteroclinic orbit through an initial value between two steady states
    Heteroclinic(HeteroclinicArgs),
    /// Full invariant battery for one scalar field
    VerifyScalar(VerifyScalarArgs),
    /// Product attractor and componentwise limits of a triangular field
    Triangular(TriangularArgs),
    /// Zero-set sweep over a parameter and bifurcation classification
    Bifurcate(BifurcateArgs),
    /// Semigroup defect of the function-space operators T_tau
    Semigroup(SemigroupArgs),
    /// Run the verification suites over the catalog fields
    Verify(VerifyArgs),
}

/// Where the vector field comes from: a catalog entry or explicit expressions.
#[derive(Debug, Clone, Default, Args)]
pub struct FieldArgs {
    /// Catalog field: linear, cubic, logistic, saddle, pitchfork, fig2, sec3text
    #[arg(long, value_name = "NAME", conflicts_with = "component")]
    pub catalog: Option<String>,
    /// Field component in x (or x1, x2, ...); repeat once per dimension
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub component: Vec<String>,
    /// Parameter value, e.g. gamma=0.5; repeatable
    #[arg(long, value_name = "K=V", value_parser = parse_param, allow_hyphen_values = true)]
    pub param: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct MlArgs {
    /// Required unless queries are read from standard input
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Without --z, lines "A B Z" are read from standard input and CSV is written
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Initial state, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    #[arg(long, value_parser = parse_positive)]
    pub t_end: f64,
    #[arg(long, value_parser = parse_positive)]
    pub dt: f64,
    /// CSV destination; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttractorArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Zero search interval; derived from the (H1) constants when omitted
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    pub scan: Option<(f64, f64)>,
    /// Interval sampled when searching for (H1) constants
    #[arg(long, default_value = "-10:10", value_parser = parse_interval, allow_hyphen_values = true)]
    pub h1_scan: (f64, f64),
    #[arg(long, default_value_t = 4000)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Initial values, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    #[arg(long, default_value_t = 1000.0, value_parser = parse_positive)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub dt: f64,
    /// Accepted distance between the endpoint and the predicted limit
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub tol: f64,
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    pub scan: Option<(f64, f64)>,
    /// CSV of the orbits, one column per initial value
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeteroclinicArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: f64,
    #[arg(long, default_value_t = 50.0, value_parser = parse_positive)]
    pub t_back: f64,
    #[arg(long, default_value_t = 1000.0, value_parser = parse_positive)]
    pub t_fwd: f64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub dt: f64,
    /// Horizon t of the round trip x(-t, x(t, eta)) = eta
    #[arg(long, default_value_t = 10.0, value_parser = parse_positive)]
    pub round_trip: f64,
    /// Accepted distance of the orbit ends from the steady states
    #[arg(long, default_value_t = 1e-2, value_parser = parse_positive)]
    pub tol: f64,
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    pub scan: Option<(f64, f64)>,
    /// CSV of the orbit
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyScalarArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 0.6, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, value_enum)]
    pub fault: Option<Fault>,
}

#[derive(Debug, Args)]
pub struct TriangularArgs {
    /// Catalog entry: fig2 or sec3text
    #[arg(long, value_name = "NAME", conflicts_with_all = ["f1", "f2", "f3", "f4"])]
    pub catalog: Option<String>,
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub f1: Option<String>,
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub f2: Option<String>,
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub f3: Option<String>,
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub f4: Option<String>,
    /// Factor multiplying f2, in x1 only
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub h2: Option<String>,
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub h3: Option<String>,
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub h4: Option<String>,
    #[arg(long, value_name = "K=V", value_parser = parse_param, allow_hyphen_values = true)]
    pub param: Vec<(String, f64)>,
    #[arg(long, default_value = "-3:3", value_parser = parse_interval, allow_hyphen_values = true)]
    pub scan: (f64, f64),
    #[arg(long, default_value_t = 4000)]
    pub resolution: usize,
    #[arg(long, default_value_t = 0.6, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Number of random initial states to integrate
    #[arg(long, default_value_t = 0)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Cube the random initial states are drawn from
    #[arg(long, default_value = "-2:2", value_parser = parse_interval, allow_hyphen_values = true)]
    pub seed_box: (f64, f64),
    #[arg(long, default_value_t = 1000.0, value_parser = parse_positive)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub tol: f64,
    /// CSV of the orbits, columns seed,t,x1,...
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BifurcateArgs {
    /// saddle, pitchfork, or custom (with --component)
    #[arg(long, value_name = "NAME", conflicts_with = "catalog")]
    pub family: Option<String>,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Name of the swept parameter
    #[arg(long, default_value = "gamma")]
    pub parameter: String,
    /// lo:hi:M
    #[arg(long, default_value = "-1:1:201", value_parser = parse_range, allow_hyphen_values = true)]
    pub gamma_range: (f64, f64, usize),
    #[arg(long, default_value = "-3:3", value_parser = parse_interval, allow_hyphen_values = true)]
    pub scan: (f64, f64),
    /// Divergence probe gamma:x0; repeatable
    #[arg(long, value_parser = parse_probe, allow_hyphen_values = true)]
    pub probe: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 0.6, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100.0, value_parser = parse_positive)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01, value_parser = parse_positive)]
    pub dt: f64,
    /// Expected classification: saddle-node, pitchfork or none
    #[arg(long, value_parser = ["saddle-node", "pitchfork", "none"])]
    pub expect: Option<String>,
    /// Destination of the gamma,zero,stability CSV; the JSON report goes to standard output
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SemigroupArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5, value_parser = parse_non_negative)]
    pub tau1: f64,
    #[arg(long, default_value_t = 0.5, value_parser = parse_non_negative)]
    pub tau2: f64,
    /// Coarsest step; it is halved dt-levels times
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    pub dt: f64,
    #[arg(long, default_value_t = 3)]
    pub dt_levels: usize,
    /// Value of the constant initial function, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    /// Terms of the metric series
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Ml,
    Scalar,
    Triangular,
    Bifurcation,
    Semigroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Multiply the envelope rate constant by 10
    InflateGamma,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0.6, value_parser = parse_alpha, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, value_enum)]
    pub fault: Option<Fault>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("alpha must be in (0, 1), got {v}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a non-negative number, got {v}"))
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got '{s}'"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty parameter name in '{s}'"));
    }
    Ok((k.to_string(), parse_f64(v)?))
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let (a, b) = (parse_f64(a)?, parse_f64(b)?);
    if a < b {
        Ok((a, b))
    } else {
        Err(format!("empty interval {a}:{b}"))
    }
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, m] = parts[..] else {
        return Err(format!("expected lo:hi:M, got '{s}'"));
    };
    let (a, b) = parse_interval(&format!("{a}:{b}"))?;
    let m: usize = m.trim().parse().map_err(|_| format!("'{m}' is not a count"))?;
    if m < 3 {
        return Err("a sweep needs at least 3 parameter values".into());
    }
    Ok((a, b, m))
}

fn parse_probe(s: &str) -> Result<(f64, f64), String> {
    let (g, x) = s.split_once(':').ok_or_else(|| format!("expected gamma:x0, got '{s}'"))?;
    Ok((parse_f64(g)?, parse_f64(x)?))
}

//! The `lgising` command line.
//!
//! Exit codes: 0 success, 1 a check failed (e.g. a signature is not
//! windable) or a run failed, 2 usage errors and enumeration caps.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chains::{draw_samples, ChainKind, SampleConfig};
use crate::estimator::{estimate_z, line_graph_edge_count, EstimatorConfig};
use crate::graph::{parse_edge_list, parse_generator, Graph};
use crate::oracle::{exact_summary, OracleError};
use crate::signature::{ising_signature, ModelParams};
use crate::windability::{is_windable, is_windable_rational, parse_rational, Mode, WindabilityVerdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lgising", version, about = "Antiferromagnetic Ising model on line graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact log Z, log H0 and log H2 by enumeration.
    Exact(ExactArgs),
    /// Draw samples from the Gibbs distribution on L(G).
    Sample(SampleArgs),
    /// Estimate log Z by the telescoping product.
    Estimate(EstimateArgs),
    /// Windability certificates, one JSON object per pinning.
    Windability(WindabilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainArg {
    HalfEdge,
    Glauber,
}

impl From<ChainArg> for ChainKind {
    fn from(c: ChainArg) -> Self {
        match c {
            ChainArg::HalfEdge => ChainKind::HalfEdge,
            ChainArg::Glauber => ChainKind::Glauber,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Generator spec (`hex:2`, `cycle:6`, `star:3`, `path:4`, `complete:4`)
    /// or a path to an edge-list file.
    #[arg(long)]
    pub graph: String,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Uniform field on every vertex of L(G).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub nu: f64,
    /// Per-edge fields, lines `edge_index nu`; unlisted edges take `--nu`.
    #[arg(long)]
    pub fields: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: u64,
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Steps between samples (default: number of edges).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Burn-in steps (default: 8 m^2 |E(L(G))|).
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long, value_enum, default_value_t = ChainArg::HalfEdge)]
    pub chain: ChainArg,
    /// Bit strings go here and diagnostics to `<out>.json`; without it, bit
    /// strings go to stdout and diagnostics to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Samples per level (default: ceil(4 r / epsilon^2)).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Steps between samples.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Burn-in steps per level.
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long, value_enum, default_value_t = ChainArg::Glauber)]
    pub chain: ChainArg,
    #[arg(long, default_value_t = 4)]
    pub replicas: usize,
    /// Worker threads (0: all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub allow_negative_beta: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindabilityArgs {
    /// Signature literal such as `[1,0.7,0.7,1]`; entries are read as exact
    /// decimals or fractions.
    #[arg(long, conflicts_with_all = ["beta", "mu", "d"])]
    pub signature: Option<String>,
    #[arg(long, requires_all = ["mu", "d"], allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Use floating-point forward substitution for a literal signature.
    #[arg(long)]
    pub float: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn failed(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILED,
            message: message.into(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::failed(format!("{}: {e}", path.display()))
}

/// Resolves `--graph`: an existing file is read as an edge list, anything
/// else as a generator spec.
pub fn load_graph(source: &str) -> Result<Graph, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        return parse_edge_list(&text).map_err(|e| CliError::usage(format!("{source}: {e}")));
    }
    parse_generator(source).map_err(|e| CliError::usage(format!("--graph {source}: {e}")))
}

/// Parses a field file against `m` edges with default `nu`.
pub fn parse_fields(text: &str, m: usize, nu: f64) -> Result<Vec<f64>, String> {
    let mut fields = vec![nu; m];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| format!("line {}: {msg}", lineno + 1);
        let mut tokens = line.split_whitespace();
        let (Some(e), Some(v), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(err("expected `edge_index nu`"));
        };
        let e: usize = e.parse().map_err(|_| err("bad edge index"))?;
        let v: f64 = v.parse().map_err(|_| err("bad field value"))?;
        if e >= m {
            return Err(err(&format!("edge {e} out of range for {m} edges")));
        }
        if !v.is_finite() {
            return Err(err("field must be finite"));
        }
        fields[e] = v;
    }
    Ok(fields)
}

fn load_model(args: &ModelArgs) -> Result<(Graph, ModelParams), CliError> {
    let g = load_graph(&args.graph)?;
    let params = match &args.fields {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let fields = parse_fields(&text, g.edge_count(), args.nu)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            ModelParams::per_edge(args.beta, fields)
        }
        None => ModelParams::uniform(args.beta, args.nu),
    };
    if !params.is_finite() {
        return Err(CliError::usage("--beta and --nu must be finite"));
    }
    Ok((g, params))
}

/// Parses `[1, 0.7, 0.7, 1]` (brackets optional, commas or spaces).
pub fn parse_signature_literal(text: &str) -> Result<Vec<num_rational::BigRational>, String> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_rational(t).ok_or_else(|| format!("bad signature entry `{t}`")))
        .collect()
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::failed(e.to_string())),
    }
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::TooLarge { .. } => CliError::usage(e.to_string()),
        other => CliError::failed(other.to_string()),
    }
}

fn cmd_exact(args: &ExactArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (g, params) = load_model(&args.model)?;
    let summary = exact_summary(&g, &params).map_err(oracle_error)?;
    let _ = writeln!(
        stderr,
        "m={} log_Z={:.12} log_H0={:.12} log_H2={:.12} H2/H0={:.6}",
        g.edge_count(),
        summary.log_z_line_graph,
        summary.log_h0,
        summary.log_h2,
        summary.omega_ratio()
    );
    emit(&args.out, stdout, &(json_line(&summary) + "\n"))?;
    Ok(EXIT_OK)
}

fn bit_string(spins: &[bool]) -> String {
    spins.iter().map(|&s| if s { '1' } else { '0' }).collect()
}

fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (g, params) = load_model(&args.model)?;
    if g.edge_count() == 0 {
        return Err(CliError::usage("graph has no edges"));
    }
    let m = g.edge_count() as u64;
    let cfg = SampleConfig {
        kind: args.chain.into(),
        samples: args.samples,
        spacing: args.steps.unwrap_or(m),
        burn_in: args
            .burnin
            .unwrap_or(8 * m * m * line_graph_edge_count(&g) as u64),
        seed: args.seed,
    };
    let run = draw_samples(&g, &params, &cfg).map_err(|e| CliError::failed(e.to_string()))?;
    let mut lines = String::with_capacity(run.samples.len() * (g.edge_count() + 1));
    for s in &run.samples {
        lines.push_str(&bit_string(s));
        lines.push('\n');
    }
    let sidecar = json_line(&run) + "\n";
    match &args.out {
        Some(path) => {
            fs::write(path, &lines).map_err(|e| io_error(path, e))?;
            let mut json_path = path.clone().into_os_string();
            json_path.push(".json");
            let json_path = PathBuf::from(json_path);
            fs::write(&json_path, &sidecar).map_err(|e| io_error(&json_path, e))?;
        }
        None => {
            stdout
                .write_all(lines.as_bytes())
                .map_err(|e| CliError::failed(e.to_string()))?;
            let _ = stderr.write_all(sidecar.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

fn cmd_estimate(args: &EstimateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (g, params) = load_model(&args.model)?;
    let cfg = EstimatorConfig {
        chain: args.chain.into(),
        seed: args.seed,
        replicas: args.replicas,
        threads: args.threads,
        samples_per_level: args.samples,
        burn_in: args.burnin,
        spacing: args.steps,
        allow_negative_beta: args.allow_negative_beta,
    };
    let report = estimate_z(&g, &params, args.epsilon, &cfg).map_err(|e| CliError::usage(e.to_string()))?;
    let _ = writeln!(
        stderr,
        "log_Z={:.6} levels={} samples/level={} steps={} wall={:.2}s",
        report.log_z,
        report.levels.len(),
        report.samples_per_level,
        report.total_steps,
        report.wall_time_secs
    );
    emit(&args.out, stdout, &(json_line(&report) + "\n"))?;
    Ok(EXIT_OK)
}

fn verdict_for(args: &WindabilityArgs) -> Result<WindabilityVerdict, CliError> {
    let werr = |e: crate::windability::WindabilityError| CliError::usage(e.to_string());
    match (&args.signature, args.beta, args.mu, args.d) {
        (Some(lit), None, None, None) => {
            let values = parse_signature_literal(lit).map_err(CliError::usage)?;
            if args.float {
                let floats: Vec<f64> = values
                    .iter()
                    .map(|v| num_traits::ToPrimitive::to_f64(v).unwrap_or(f64::NAN))
                    .collect();
                let sig = crate::signature::Signature::from_values(&floats)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                is_windable(&sig, Mode::Float).map_err(werr)
            } else {
                is_windable_rational(&values).map_err(werr)
            }
        }
        (None, Some(beta), Some(mu), Some(d)) => {
            if !(beta.is_finite() && mu.is_finite()) {
                return Err(CliError::usage("--beta and --mu must be finite"));
            }
            is_windable(&ising_signature(beta, mu, d), Mode::Float).map_err(werr)
        }
        _ => Err(CliError::usage(
            "give either --signature or all of --beta, --mu and --d",
        )),
    }
}

fn cmd_windability(args: &WindabilityArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let verdict = verdict_for(args)?;
    let mut text = String::new();
    for cert in &verdict.certificates {
        text.push_str(&json_line(cert));
        text.push('\n');
    }
    emit(&args.out, stdout, &text)?;
    match verdict.worst_certificate() {
        Some(w) => {
            let _ = writeln!(
                stderr,
                "windable={} pinnings={} worst=(a={}, b={}) margin={:.3e}",
                verdict.windable,
                verdict.certificates.len(),
                w.a,
                w.b,
                w.margin
            );
        }
        None => {
            let _ = writeln!(stderr, "windable={}", verdict.windable);
        }
    }
    Ok(if verdict.windable { EXIT_OK } else { EXIT_FAILED })
}

/// Runs the command line with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Exact(a) => cmd_exact(a, stdout, stderr),
        Command::Sample(a) => cmd_sample(a, stdout, stderr),
        Command::Estimate(a) => cmd_estimate(a, stdout, stderr),
        Command::Windability(a) => cmd_windability(a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

//! Command-line front end.
//!
//! Every command reads a JSON config, computes a table and writes it as CSV
//! (RFC 4180, LF line endings, `#` metadata lines before the header) or as
//! a single JSON document. The metadata echoes the effective config, so an
//! output file carries everything needed to rerun it.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 a certified
//! bound was violated.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::diffusion::{
    mse_dominance_check, ou_sample, ou_sweep, plan_ou, plan_ratio_bound, OuParams, OuSweepRow,
    DOMINANCE_TOL,
};
use crate::distributions::{DiscreteDist, NoiseFamily};
use crate::divergences::{
    hockey_stick, renyi_discrete, renyi_numeric_families, total_variation, w_inf_discrete,
    DpGuarantee,
};
use crate::iteration::{
    best_single_stage_laplace, iterated_gaussian_bound, iterated_laplace_split,
    lipschitz_kernel_bound, noisy_proj_sgd, pure_dp_iterated_laplace,
    sgd_baseline_epsilon_at_index, sgd_epsilon_at_index, sgd_rdp_at_index, winf_contractive_bound,
    winf_path_bound, IterationChain, QuadraticLoss, SgdConfig,
};
use crate::mixing::{amplify_with_kernel, DiscreteKernel, MixingCoefficients};
use crate::verify::{self, summarize, VerifyConfig};

/// Caps the worker pool used by parallel commands.
pub const THREADS_ENV: &str = "AMPLIFY_DP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "amplify-dp",
    version,
    about = "Privacy amplification accountants and certification harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config for the command
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for stochastic commands
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mixing coefficients of a kernel and the amplified (ε, δ) under each
    Mixing,
    /// Two-stage and W∞-path bounds for iterated noisy maps
    Iter,
    /// Per-index RDP of noisy projected SGD, or a simulated trajectory
    Sgd,
    /// Ornstein-Uhlenbeck sweeps, planning and sampling
    Ou,
    /// Randomized certification of every bound
    Verify,
    /// Divergences between two distributions
    Divergence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mixing => "mixing",
            Command::Iter => "iter",
            Command::Sgd => "sgd",
            Command::Ou => "ou",
            Command::Verify => "verify",
            Command::Divergence => "divergence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Io(String),
    Validation(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A table cell. Missing values print as an empty CSV field or JSON `null`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_nan() {
            Cell::Empty
        } else {
            Cell::Num(v)
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Output of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra metadata, written as `# key: json` lines and top-level JSON keys.
    pub extra: Vec<(String, Value)>,
    /// Set when the run found a violated bound; the output is still written.
    pub failure: Option<String>,
}

impl Report {
    fn new(command: Command, seed: Option<u64>, config: Value, header: &[&str]) -> Self {
        Self {
            command: command.name(),
            seed,
            config,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            extra: Vec::new(),
            failure: None,
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        let meta = |buf: &mut Vec<u8>, key: &str, value: &str| writeln!(buf, "# {key}: {value}");
        meta(&mut buf, "command", self.command).map_err(io_err)?;
        meta(&mut buf, "seed", &seed).map_err(io_err)?;
        meta(&mut buf, "config", &self.config.to_string()).map_err(io_err)?;
        for (k, v) in &self.extra {
            meta(&mut buf, k, &v.to_string()).map_err(io_err)?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(buf);
        w.write_record(&self.header)
            .map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    fn render_json(&self) -> CliResult<Vec<u8>> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("command".into(), json!(self.command));
        doc.insert("seed".into(), json!(self.seed));
        doc.insert("config".into(), self.config.clone());
        for (k, v) in &self.extra {
            doc.insert(k.clone(), v.clone());
        }
        doc.insert("rows".into(), Value::Array(rows));
        let mut out = serde_json::to_vec_pretty(&Value::Object(doc))
            .map_err(|e| CliError::Io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("amplify-dp {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

/// Runs a parsed command line and writes its output.
pub fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    let report = execute(cli.command, cli.config.as_deref(), cli.seed)?;
    let bytes = report.render(cli.format)?;
    match &cli.out {
        Some(path) => {
            fs::write(path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        }
        None => std::io::stdout().write_all(&bytes).map_err(io_err)?,
    }
    for (k, v) in &report.extra {
        if k == "summary" {
            eprintln!("{v}");
        }
    }
    match report.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
        CliError::Validation(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Computes the report for `command` without writing anything.
pub fn execute(command: Command, config: Option<&Path>, seed: Option<u64>) -> CliResult<Report> {
    let raw = match config {
        Some(path) => Some(read_json(path)?),
        None => None,
    };
    match command {
        Command::Mixing => cmd_mixing(required(raw, command)?, seed),
        Command::Iter => cmd_iter(required(raw, command)?, seed),
        Command::Sgd => cmd_sgd(required(raw, command)?, seed),
        Command::Ou => cmd_ou(required(raw, command)?, seed),
        Command::Verify => cmd_verify(raw.unwrap_or_else(|| json!({})), seed),
        Command::Divergence => cmd_divergence(required(raw, command)?, seed),
    }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn required(raw: Option<Value>, command: Command) -> CliResult<Value> {
    raw.ok_or_else(|| CliError::Validation(format!("`{}` needs --config <path>", command.name())))
}

fn parse<T: for<'de> Deserialize<'de>>(raw: Value) -> CliResult<T> {
    serde_json::from_value(raw).map_err(|e| CliError::Validation(format!("config: {e}")))
}

fn echo<T: Serialize>(cfg: &T) -> Value {
    serde_json::to_value(cfg).expect("configs serialize")
}

fn require_seed(seed: Option<u64>, what: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Validation(format!("{what} is stochastic and needs --seed <u64>")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixingRun {
    /// Rows, `{inputs?, outputs?, rows}`, or a path to a JSON file holding either.
    kernel: Value,
    epsilon: f64,
    delta: f64,
}

fn load_kernel(raw: Value) -> CliResult<DiscreteKernel> {
    let raw = match raw {
        Value::String(path) => read_json(Path::new(&path))?,
        other => other,
    };
    let raw = match raw {
        rows @ Value::Array(_) => json!({ "rows": rows }),
        other => other,
    };
    serde_json::from_value(raw).map_err(|e| CliError::Validation(format!("kernel: {e}")))
}

fn cmd_mixing(raw: Value, seed: Option<u64>) -> CliResult<Report> {
    let mut cfg: MixingRun = parse(raw)?;
    let kernel = load_kernel(cfg.kernel.clone())?;
    let guarantee = DpGuarantee::new(cfg.epsilon, cfg.delta)?;
    cfg.kernel = echo(&kernel);
    let mut report = Report::new(
        Command::Mixing,
        seed,
        echo(&cfg),
        &[
            "condition",
            "gamma",
            "measured_at",
            "eps_prime",
            "delta_prime",
        ],
    );
    for row in amplify_with_kernel(&guarantee, &kernel)? {
        report.push(vec![
            row.condition.name().into(),
            row.condition.gamma().into(),
            row.measured_at.into(),
            row.guarantee.epsilon.into(),
            row.guarantee.delta.into(),
        ]);
    }
    let coeffs = MixingCoefficients::measure(&kernel, &[cfg.epsilon]);
    if let Some(omega) = coeffs.doeblin_witness {
        report.extra.push(("doeblin_witness".into(), echo(&omega)));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case", deny_unknown_fields)]
enum IterRun {
    Gaussian {
        delta: f64,
        sigma1: f64,
        sigma2: f64,
        alphas: Vec<f64>,
    },
    LipschitzKernel {
        delta: f64,
        sigma1: f64,
        sigma2: f64,
        lipschitz: f64,
        alphas: Vec<f64>,
    },
    Laplace {
        delta: f64,
        lambda1: f64,
        lambda2: f64,
        alphas: Vec<f64>,
    },
    WinfPath {
        chain: IterationChain,
        increments: Vec<f64>,
        alphas: Vec<f64>,
    },
    WinfContractive {
        chain: IterationChain,
        alphas: Vec<f64>,
    },
}

fn cmd_iter(raw: Value, seed: Option<u64>) -> CliResult<Report> {
    let cfg: IterRun = parse(raw)?;
    let config = echo(&cfg);
    let simple =
        |name: &str, alphas: &[f64], f: &dyn Fn(f64) -> crate::Result<f64>| -> CliResult<Report> {
            let mut r = Report::new(
                Command::Iter,
                seed,
                config.clone(),
                &["bound", "alpha", "epsilon"],
            );
            for &a in alphas {
                r.push(vec![name.into(), a.into(), f(a)?.into()]);
            }
            Ok(r)
        };
    match &cfg {
        IterRun::Gaussian {
            delta,
            sigma1,
            sigma2,
            alphas,
        } => simple("gaussian", alphas, &|a| {
            iterated_gaussian_bound(*delta, *sigma1, *sigma2, a).map(|p| p.epsilon)
        }),
        IterRun::LipschitzKernel {
            delta,
            sigma1,
            sigma2,
            lipschitz,
            alphas,
        } => simple("lipschitz_kernel", alphas, &|a| {
            lipschitz_kernel_bound(*delta, *sigma1, *sigma2, *lipschitz, a).map(|p| p.epsilon)
        }),
        IterRun::WinfPath {
            chain,
            increments,
            alphas,
        } => simple("winf_path", alphas, &|a| {
            winf_path_bound(chain, increments, a).map(|p| p.epsilon)
        }),
        IterRun::WinfContractive { chain, alphas } => simple("winf_contractive", alphas, &|a| {
            winf_contractive_bound(chain, a).map(|p| p.epsilon)
        }),
        IterRun::Laplace {
            delta,
            lambda1,
            lambda2,
            alphas,
        } => {
            let mut r = Report::new(
                Command::Iter,
                seed,
                config.clone(),
                &[
                    "bound",
                    "alpha",
                    "epsilon",
                    "first_stage_shift",
                    "best_single_stage",
                ],
            );
            for &a in alphas {
                let split = iterated_laplace_split(*delta, *lambda1, *lambda2, a)?;
                r.push(vec![
                    "laplace".into(),
                    a.into(),
                    split.bound.epsilon.into(),
                    split.first_stage_shift.into(),
                    best_single_stage_laplace(*delta, *lambda1, *lambda2, a)?.into(),
                ]);
            }
            let pure = pure_dp_iterated_laplace(*delta, *lambda1, *lambda2)?;
            r.extra
                .push(("pure_dp_epsilon".into(), json!(pure.epsilon)));
            Ok(r)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Simulation {
    curvatures: Vec<f64>,
    dataset: Vec<Vec<f64>>,
    x0: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SgdRun {
    n: usize,
    #[serde(rename = "C", alias = "c")]
    lipschitz: f64,
    beta: f64,
    rho: f64,
    eta: f64,
    sigma: f64,
    #[serde(default = "one")]
    d: usize,
    #[serde(default = "unit")]
    radius: f64,
    #[serde(default = "two")]
    alpha: f64,
    /// 1-based indices to report; all of `1..=n` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    indices: Option<Vec<usize>>,
    /// Run the simulator instead of the accountant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    simulate: Option<Simulation>,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn cmd_sgd(raw: Value, seed: Option<u64>) -> CliResult<Report> {
    let run: SgdRun = parse(raw)?;
    let cfg = SgdConfig {
        n: run.n,
        lipschitz: run.lipschitz,
        beta: run.beta,
        rho: run.rho,
        eta: run.eta,
        sigma: run.sigma,
        d: run.d,
        radius: run.radius,
    };
    cfg.validate()?;
    if let Some(sim) = &run.simulate {
        let seed = require_seed(seed, "sgd simulation")?;
        let loss = QuadraticLoss {
            curvatures: sim.curvatures.clone(),
        };
        let traj = noisy_proj_sgd(&sim.dataset, &loss, &cfg, &sim.x0, seed)?;
        let mut header = vec!["step".to_string()];
        header.extend((0..cfg.d).map(|k| format!("x{k}")));
        let mut report = Report::new(Command::Sgd, Some(seed), echo(&run), &[]);
        report.header = header;
        for (step, x) in traj.iterates.iter().enumerate() {
            let mut row = vec![Cell::from(step)];
            row.extend(x.iter().map(|v| Cell::from(*v)));
            report.push(row);
        }
        return Ok(report);
    }
    let mut report = Report::new(
        Command::Sgd,
        seed,
        echo(&run),
        &[
            "i",
            "alpha",
            "epsilon_i",
            "rdp_epsilon",
            "baseline_epsilon_i",
            "ratio",
        ],
    );
    let indices = run.indices.clone().unwrap_or_else(|| (1..=cfg.n).collect());
    for i in indices {
        let eps = sgd_epsilon_at_index(&cfg, i)?;
        let base = sgd_baseline_epsilon_at_index(&cfg, i)?;
        report.push(vec![
            i.into(),
            run.alpha.into(),
            eps.into(),
            sgd_rdp_at_index(&cfg, i, run.alpha)?.epsilon.into(),
            base.into(),
            (eps / base).into(),
        ]);
    }
    report
        .extra
        .push(("contraction".into(), json!(cfg.contraction()?)));
    Ok(report)
}

fn default_ts() -> Vec<f64> {
    (1..=50).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
enum OuRun {
    Sweep {
        theta: f64,
        rho: f64,
        delta: f64,
        #[serde(rename = "R", alias = "r")]
        radius: f64,
        #[serde(default = "one")]
        d: usize,
        #[serde(default = "default_ts")]
        ts: Vec<f64>,
    },
    Plan {
        epsilon: f64,
        delta: f64,
        #[serde(rename = "R", alias = "r")]
        radius: f64,
        #[serde(default = "one")]
        d: usize,
        #[serde(default = "default_ts")]
        ts: Vec<f64>,
    },
    Sample {
        theta: f64,
        rho: f64,
        t: f64,
        x: Vec<f64>,
        n: usize,
    },
}

const OU_HEADER: [&str; 6] = [
    "t",
    "lambda_t",
    "mse_ou",
    "mse_gm",
    "mse_pgm_bound",
    "ratio",
];

fn sweep_cells(r: &OuSweepRow) -> Vec<Cell> {
    vec![
        r.t.into(),
        r.lambda_t.into(),
        r.mse_ou.into(),
        r.mse_gm.into(),
        r.mse_pgm_bound.into(),
        r.ratio.into(),
    ]
}

fn cmd_ou(raw: Value, seed: Option<u64>) -> CliResult<Report> {
    let cfg: OuRun = parse(raw)?;
    let config = echo(&cfg);
    match cfg {
        OuRun::Sweep {
            theta,
            rho,
            delta,
            radius,
            d,
            ts,
        } => {
            let p = OuParams::new(theta, rho, 1.0, delta, radius, d)?;
            let mut report = Report::new(Command::Ou, seed, config, &OU_HEADER);
            for row in ou_sweep(&p, &ts)? {
                report.push(sweep_cells(&row));
            }
            let dom = mse_dominance_check(theta, rho, d, radius, &ts)?;
            report.extra.push((
                "dominance".into(),
                json!({"precondition": dom.precondition, "dominated": dom.dominated, "max_ratio": dom.max_ratio}),
            ));
            if dom.precondition && !dom.dominated {
                report.failure = Some(format!(
                    "error ratio reached {} > 1 + {DOMINANCE_TOL} although theta*R^2 <= 4*d*rho^2",
                    dom.max_ratio
                ));
            }
            Ok(report)
        }
        OuRun::Plan {
            epsilon,
            delta,
            radius,
            d,
            ts,
        } => {
            let p = plan_ou(epsilon, delta, radius, d)?;
            let mut report = Report::new(Command::Ou, seed, config, &OU_HEADER);
            for row in ou_sweep(&p, &ts)? {
                report.push(sweep_cells(&row));
            }
            report.extra.push((
                "plan".into(),
                json!({
                    "theta": p.theta,
                    "rho": p.rho,
                    "t": p.t,
                    "ratio_bound": plan_ratio_bound(epsilon, delta, radius, d),
                }),
            ));
            Ok(report)
        }
        OuRun::Sample {
            theta,
            rho,
            t,
            x,
            n,
        } => {
            let seed = require_seed(seed, "ou sampling")?;
            let p = OuParams::new(theta, rho, t, 0.0, 0.0, x.len())?;
            let mut report = Report::new(Command::Ou, Some(seed), config, &[]);
            report.header = std::iter::once("draw".to_string())
                .chain((0..x.len()).map(|k| format!("x{k}")))
                .collect();
            for (i, s) in ou_sample(&x, &p, seed, n)?.into_iter().enumerate() {
                let mut row = vec![Cell::from(i)];
                row.extend(s.into_iter().map(Cell::from));
                report.push(row);
            }
            Ok(report)
        }
    }
}

fn cmd_verify(raw: Value, seed: Option<u64>) -> CliResult<Report> {
    let seed = require_seed(seed, "verify")?;
    let cfg: VerifyConfig = parse(raw)?;
    let reports = verify::run(&cfg, seed)?;
    let mut report = Report::new(
        Command::Verify,
        Some(seed),
        echo(&cfg),
        &verify::REPORT_HEADER,
    );
    report.rows = reports
        .iter()
        .map(|r| {
            let opt = |v: Option<f64>| v.map_or(Cell::Empty, Cell::from);
            vec![
                r.case.as_str().into(),
                r.check.as_str().into(),
                r.trial.into(),
                Cell::Int(r.seed),
                r.nx.into(),
                r.ny.into(),
                opt(r.eps),
                opt(r.delta_before),
                opt(r.coefficient),
                opt(r.eps_after),
                r.measured.into(),
                r.bound.into(),
                r.slack.into(),
                r.tolerance.into(),
                r.pass.into(),
            ]
        })
        .collect();
    let summary = summarize(&reports);
    let failed = verify::violations(&reports);
    report.extra.push(("summary".into(), echo(&summary)));
    if failed > 0 {
        report.failure = Some(format!("{failed} checks violated their bound"));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DivergenceRun {
    Discrete {
        mu: DiscreteDist,
        nu: DiscreteDist,
        #[serde(default)]
        eps_grid: Vec<f64>,
        #[serde(default)]
        alphas: Vec<f64>,
    },
    Noise {
        p: NoiseFamily,
        q: NoiseFamily,
        alphas: Vec<f64>,
    },
}

fn cmd_divergence(raw: Value, seed: Option<u64>) -> CliResult<Report> {
    let cfg: DivergenceRun = parse(raw)?;
    let mut report = Report::new(
        Command::Divergence,
        seed,
        echo(&cfg),
        &["measure", "parameter", "value"],
    );
    match &cfg {
        DivergenceRun::Discrete {
            mu,
            nu,
            eps_grid,
            alphas,
        } => {
            report.push(vec![
                "total_variation".into(),
                Cell::Empty,
                total_variation(mu, nu).into(),
            ]);
            for &e in eps_grid {
                if !(e >= 0.0) {
                    return Err(CliError::Validation(format!(
                        "eps_grid entries must be >= 0, got {e}"
                    )));
                }
                report.push(vec![
                    "hockey_stick".into(),
                    e.into(),
                    hockey_stick(mu, nu, e).into(),
                ]);
            }
            for &a in alphas {
                report.push(vec![
                    "renyi".into(),
                    a.into(),
                    renyi_discrete(mu, nu, a)?.into(),
                ]);
            }
            if mu.coordinates().is_ok() && nu.coordinates().is_ok() {
                report.push(vec![
                    "w_inf".into(),
                    Cell::Empty,
                    w_inf_discrete(mu, nu)?.into(),
                ]);
            }
        }
        DivergenceRun::Noise { p, q, alphas } => {
            for &a in alphas {
                report.push(vec![
                    "renyi_numeric".into(),
                    a.into(),
                    renyi_numeric_families(p, q, a)?.into(),
                ]);
            }
        }
    }
    Ok(report)
}

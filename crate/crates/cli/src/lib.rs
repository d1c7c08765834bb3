//! The `orlicz` command-line driver.
//!
//! Every subcommand prints a short summary and, with `--out`, writes a JSON
//! report (or CSV for tables). Exit status is 0 on pass, 1 on a failed or
//! falsified check and 2 on bad input.

mod commands;
pub mod scenario;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use orlicz_core::NormFlavor;
use serde::Serialize;

pub use scenario::{Budgets, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{origin}:{line}:{column}: {message}")]
    Scenario {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] orlicz_core::Error),
    #[error("writing {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Falsified,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail | Status::Falsified => 1,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Falsified => "falsified",
        }
    }

    fn all(checks: impl IntoIterator<Item = bool>) -> Self {
        if checks.into_iter().all(|ok| ok) {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Parser, Debug)]
#[command(name = "orlicz", version, about = "Orlicz spaces over finite probability spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Report file: `.csv` for tables, JSON otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the command's default tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Restricts the command to one named scenario entry.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FlavorArg {
    Luxemburg,
    Orlicz,
}

impl From<FlavorArg> for NormFlavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Luxemburg => NormFlavor::Luxemburg,
            FlavorArg::Orlicz => NormFlavor::Orlicz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Scalar,
    Module,
    Fiber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Power,
    #[value(alias = "scaled_power")]
    ScaledPower,
    #[value(alias = "linear_jump")]
    LinearJump,
}

#[derive(Args, Debug, Clone)]
struct YoungArgs {
    #[command(flatten)]
    common: Common,
    /// Built-in family; without it the scenario's `phi` is used.
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    /// Grid `start:end:step` to tabulate on.
    #[arg(long)]
    table: Option<String>,
}

#[derive(Subcommand, Debug)]
enum YoungAction {
    /// Conjugate Young function, tabulated with `--table`.
    Conjugate(YoungArgs),
    /// Axiom and Δ₂ checks.
    Validate(YoungArgs),
    /// Φ and Ψ side by side on a grid.
    Table(YoungArgs),
}

#[derive(Subcommand, Debug)]
enum ConvexityAction {
    /// Per-atom strict convexity and monotonicity of the scalar norms.
    Report(Common),
    /// Searches for a strict-convexity counterexample.
    Falsify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        target: Option<Target>,
        #[arg(long, value_enum, default_value = "luxemburg")]
        flavor: FlavorArg,
    },
    /// Upper estimate of the modulus of convexity.
    Modulus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum)]
        target: Option<Target>,
        #[arg(long, value_enum, default_value = "luxemburg")]
        flavor: FlavorArg,
        /// Atom whose fiber is measured with `--target fiber`.
        #[arg(long, default_value_t = 0)]
        atom: usize,
    },
}

#[derive(Subcommand, Debug)]
enum HarnessAction {
    /// Strict convexity of the composite against its components.
    #[command(name = "theorem54", alias = "strict")]
    Strict {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "luxemburg")]
        flavor: FlavorArg,
    },
    /// Moduli of the composite and its components on a grid of ε.
    #[command(name = "theorem57", alias = "uniform")]
    Uniform {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "luxemburg")]
        flavor: FlavorArg,
    },
    /// Evidence table for the converse direction; asserts nothing.
    #[command(name = "remark58", alias = "converse")]
    Converse {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "luxemburg")]
        flavor: FlavorArg,
    },
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conjugates, axiom checks and value tables of Young functions
    #[command(subcommand)]
    Young(YoungAction),
    /// Luxemburg or Orlicz norms of scenario entries.
    Norm {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "luxemburg")]
        which: FlavorArg,
        #[arg(long, value_enum, default_value = "scalar")]
        target: Target,
    },
    /// Random dual norms of the scenario's functionals.
    DualNorm(Common),
    /// Operator norm of each embedded functional against its dual-side norm.
    DualityCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "luxemburg")]
        flavor: FlavorArg,
    },
    /// Recovers each functional from its embedding.
    Represent {
        #[command(flatten)]
        common: Common,
        /// Also re-embeds the result and compares on a spanning set.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Strict and uniform convexity searches
    #[command(subcommand)]
    Convexity(ConvexityAction),
    /// Composite convexity against the fiber and scalar components
    #[command(subcommand)]
    Harness(HarnessAction),
}

/// Rows of numbers with a header, written as CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// What a command produced, before it is wrapped into a report.
pub(crate) struct Outcome {
    status: Status,
    summary: Vec<String>,
    tolerances: BTreeMap<&'static str, f64>,
    result: serde_json::Value,
    table: Option<Table>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    scenario_sha256: Option<&'a str>,
    seed: u64,
    budgets: Budgets,
    tolerances: &'a BTreeMap<&'static str, f64>,
    status: Status,
    result: &'a serde_json::Value,
}

/// Scenario, seed and budgets shared by one invocation.
pub(crate) struct Session {
    scenario: Option<Scenario>,
    seed: u64,
    budgets: Budgets,
}

impl Session {
    fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let scenario = path.map(Scenario::load).transpose()?;
        let mut seed = scenario.as_ref().map_or(0, |s| s.seed);
        if let Ok(value) = std::env::var("ORLICZ_SEED") {
            seed = value
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("ORLICZ_SEED must be an unsigned integer, got `{value}`")))?;
        }
        let budgets = scenario.as_ref().map_or_else(Budgets::default, |s| s.budgets);
        Ok(Self {
            scenario,
            seed,
            budgets,
        })
    }

    pub(crate) fn scenario(&self) -> Result<&Scenario, CliError> {
        self.scenario
            .as_ref()
            .ok_or_else(|| CliError::Input("this command needs --scenario".into()))
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Young(YoungAction::Conjugate(_)) => "young conjugate",
        Command::Young(YoungAction::Validate(_)) => "young validate",
        Command::Young(YoungAction::Table(_)) => "young table",
        Command::Norm { .. } => "norm",
        Command::DualNorm(_) => "dual-norm",
        Command::DualityCheck { .. } => "duality-check",
        Command::Represent { .. } => "represent",
        Command::Convexity(ConvexityAction::Report(_)) => "convexity report",
        Command::Convexity(ConvexityAction::Falsify { .. }) => "convexity falsify",
        Command::Convexity(ConvexityAction::Modulus { .. }) => "convexity modulus",
        Command::Harness(HarnessAction::Strict { .. }) => "harness theorem54",
        Command::Harness(HarnessAction::Uniform { .. }) => "harness theorem57",
        Command::Harness(HarnessAction::Converse { .. }) => "harness remark58",
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Young(YoungAction::Conjugate(a) | YoungAction::Validate(a) | YoungAction::Table(a)) => &a.common,
        Command::Norm { common, .. }
        | Command::DualNorm(common)
        | Command::DualityCheck { common, .. }
        | Command::Represent { common, .. }
        | Command::Convexity(ConvexityAction::Report(common))
        | Command::Convexity(ConvexityAction::Falsify { common, .. })
        | Command::Convexity(ConvexityAction::Modulus { common, .. })
        | Command::Harness(HarnessAction::Strict { common, .. })
        | Command::Harness(HarnessAction::Uniform { common, .. })
        | Command::Harness(HarnessAction::Converse { common, .. }) => common,
    }
}

fn dispatch(command: &Command, session: &Session) -> Result<Outcome, CliError> {
    use commands as c;
    match command {
        Command::Young(YoungAction::Conjugate(a)) => c::young_conjugate(a, session),
        Command::Young(YoungAction::Validate(a)) => c::young_validate(a, session),
        Command::Young(YoungAction::Table(a)) => c::young_table(a, session),
        Command::Norm { common, which, target } => c::norm(common, session, (*which).into(), *target),
        Command::DualNorm(common) => c::dual_norm(common, session),
        Command::DualityCheck { common, flavor } => c::duality_check(common, session, (*flavor).into()),
        Command::Represent { common, roundtrip } => c::represent(common, session, *roundtrip),
        Command::Convexity(ConvexityAction::Report(common)) => c::convexity_report(common, session),
        Command::Convexity(ConvexityAction::Falsify { common, target, flavor }) => {
            c::convexity_falsify(common, session, *target, (*flavor).into())
        }
        Command::Convexity(ConvexityAction::Modulus {
            common,
            epsilon,
            target,
            flavor,
            atom,
        }) => c::convexity_modulus(common, session, *epsilon, *target, (*flavor).into(), *atom),
        Command::Harness(HarnessAction::Strict { flavor, .. }) => c::harness_strict(session, (*flavor).into()),
        Command::Harness(HarnessAction::Uniform { flavor, .. }) => c::harness_uniform(session, (*flavor).into()),
        Command::Harness(HarnessAction::Converse { flavor, .. }) => c::harness_converse(session, (*flavor).into()),
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<Status, CliError> {
    let common = common(command);
    let session = Session::open(common.scenario.as_deref())?;
    let outcome = dispatch(command, &session)?;
    let name = command_name(command);

    let _ = writeln!(stdout, "{name}: {}", outcome.status);
    for line in &outcome.summary {
        let _ = writeln!(stdout, "  {line}");
    }

    if let Some(path) = &common.out {
        let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let body = match (&outcome.table, csv) {
            (Some(table), true) => table.to_csv(),
            (None, true) => return Err(CliError::Input(format!("`{name}` has no tabular output for CSV"))),
            _ => {
                let report = Report {
                    command: name,
                    scenario_sha256: session.scenario.as_ref().map(|s| s.sha256.as_str()),
                    seed: session.seed,
                    budgets: session.budgets,
                    tolerances: &outcome.tolerances,
                    status: outcome.status,
                    result: &outcome.result,
                };
                let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
                s.push('\n');
                s
            }
        };
        std::fs::write(path, body).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(outcome.status)
}

/// Runs the driver on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

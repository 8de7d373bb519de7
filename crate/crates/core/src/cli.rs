//! Command-line front end: `solve`, `simulate`, `table`, `verify`, `reduce`.
//!
//! Exit codes: 0 success, 1 refused or failed computation (message printed
//! as produced by the library), 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;

use crate::combinatorics::{
    moser_bounds, moser_table, payoff_upper_bound, reach_probability, w1_exact, w3_exact,
    ReachQuery, MOSER_EXACT_MAX,
};
use crate::engine::{enumeration_admits, exact_expected_payoff, monte_carlo, Strategy};
use crate::error::Error;
use crate::multiset::{load_multiset, Multiset, PayoffMode};
use crate::numeric::{format_fraction, parse_rational, to_decimal, Rational};
use crate::reduction::reduce_to_binary;
use crate::strategies::{approx_threshold, build_tables_with, general_optimal_value, TieRule};
use crate::verify::{run_verify, SuiteName};

#[derive(Debug, Parser)]
#[command(
    name = "zerosum",
    version,
    about = "Optimal stopping on randomly ordered zero-sum multisets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact optimal expected payoff, optionally dumping the T and S tables.
    Solve(SolveArgs),
    /// Monte Carlo estimate of a strategy's expected payoff.
    Simulate(SimulateArgs),
    /// TSV table of exact values: parameter, p/q, decimal.
    Table(TableArgs),
    /// Recompute published numbers and identities.
    Verify(VerifyArgs),
    /// Averaging chain from a multiset to a scaled balanced ±1 deck.
    Reduce(ReduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Collect the sum of the elements not yet revealed.
    Suffix,
    /// Collect the sum of the elements already revealed.
    Prefix,
}

impl From<ModeArg> for PayoffMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Suffix => PayoffMode::Suffix,
            ModeArg::Prefix => PayoffMode::Prefix,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TieArg {
    /// Stop when stopping and continuing are worth the same.
    Stop,
    /// Continue on ties.
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Threshold,
    Optimal,
    Middle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableWhat {
    /// Stop-in-the-middle expectation W3(n) for even n up to --max-n.
    W3,
    /// Moser's recurrence E_n for n = 1..--max-n (truncated decimals).
    Moser,
    /// Probability that a random ±1 path of length --n reaches y = x - t.
    Reach,
    /// Upper bound on the optimal value, even n up to --max-n.
    Upper,
    /// Exact threshold-rule expectation, even n up to --max-n.
    W1,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["n", "multiset"])))]
struct SolveArgs {
    /// Even deck size n = 2m of the balanced ±1 game.
    #[arg(long)]
    n: Option<u64>,
    /// File with a zero-sum multiset (up to 18 elements).
    #[arg(long)]
    multiset: Option<PathBuf>,
    /// Payoff convention.
    #[arg(long, value_enum, default_value_t = ModeArg::Suffix)]
    mode: ModeArg,
    /// Write the value matrix T as CSV (requires --n).
    #[arg(long, value_name = "FILE")]
    dump_t: Option<PathBuf>,
    /// Write the stopping matrix S as CSV (requires --n).
    #[arg(long, value_name = "FILE")]
    dump_s: Option<PathBuf>,
    /// Decision at states where stopping and continuing tie (requires --n).
    #[arg(long, value_enum)]
    tie: Option<TieArg>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["n", "multiset"])))]
struct SimulateArgs {
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Even deck size n = 2m of the balanced ±1 game.
    #[arg(long)]
    n: Option<u64>,
    /// File with a zero-sum multiset.
    #[arg(long)]
    multiset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Suffix)]
    mode: ModeArg,
    /// Number of replications.
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Length estimate N used for the threshold instead of the true length
    /// (threshold strategy only).
    #[arg(long)]
    threshold_n: Option<u64>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, value_enum)]
    what: TableWhat,
    /// Largest n to tabulate (all tables except reach; default 16).
    #[arg(long)]
    max_n: Option<u64>,
    /// Deck size for the reach table.
    #[arg(long)]
    n: Option<u64>,
    /// Digits after the decimal point.
    #[arg(long, default_value_t = 3)]
    digits: u32,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    what: SuiteName,
    /// Emit the results as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    /// File with a zero-sum multiset.
    #[arg(long)]
    multiset: PathBuf,
    /// Stop once every same-sign block spreads by at most this much.
    #[arg(long, default_value = "0")]
    epsilon: String,
    /// Annotate every line with the exact f-value (up to 20 elements).
    #[arg(long)]
    with_f: bool,
}

enum Failure {
    Usage(String),
    Domain(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (program name first) and runs the verb. Returns the exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Table(a) => table(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Reduce(a) => reduce(a, out),
    };
    match result.and_then(|code| out.flush().map(|_| code).map_err(Failure::Io)) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn half_length(flag: &str, n: u64) -> std::result::Result<usize, Failure> {
    if n < 2 || n % 2 == 1 {
        return Err(usage(format!(
            "{flag} must be even and at least 2, got {n}"
        )));
    }
    Ok((n / 2) as usize)
}

fn exact_and_decimal(x: &Rational) -> String {
    format!("{} ({})", format_fraction(x), to_decimal(x, 2))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Outcome {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(0)
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Outcome {
    if a.multiset.is_some() {
        for (set, flag) in [
            (a.dump_t.is_some(), "--dump-t"),
            (a.dump_s.is_some(), "--dump-s"),
            (a.tie.is_some(), "--tie"),
        ] {
            if set {
                return Err(usage(format!("{flag} requires --n")));
            }
        }
    }
    let m = match a.n {
        Some(n) => Some(half_length("--n", n)?),
        None => None,
    };
    let Some(m) = m else {
        let path = a.multiset.expect("clap enforces one input");
        let multiset = load_multiset(&path)?;
        let v = general_optimal_value(&multiset, a.mode.into())?;
        writeln!(out, "{}", exact_and_decimal(&v))?;
        return Ok(0);
    };
    let tie = match a.tie.unwrap_or(TieArg::Stop) {
        TieArg::Stop => TieRule::Stop,
        TieArg::Continue => TieRule::Continue,
    };
    let tables = build_tables_with(m, tie)?;
    if let Some(p) = &a.dump_t {
        write_file(p, |w| tables.write_values_csv(w))?;
    }
    if let Some(p) = &a.dump_s {
        write_file(p, |w| tables.write_stops_csv(w))?;
    }
    // The balanced deck is symmetric under negation, so both payoff
    // conventions have the same value.
    writeln!(out, "{}", exact_and_decimal(tables.game_value()))?;
    Ok(0)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Outcome {
    if a.threshold_n.is_some() && a.strategy != StrategyArg::Threshold {
        return Err(usage("--threshold-n applies only to --strategy threshold"));
    }
    if a.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    if let Some(n) = a.n {
        half_length("--n", n)?;
    }
    if let Some(n) = a.threshold_n {
        half_length("--threshold-n", n)?;
    }
    let multiset = match (&a.n, &a.multiset) {
        (Some(n), _) => Multiset::binary((*n / 2) as usize),
        (None, Some(path)) => load_multiset(path)?,
        (None, None) => unreachable!("clap enforces one input"),
    };
    let mode: PayoffMode = a.mode.into();
    let strategy = match a.strategy {
        StrategyArg::Threshold => match a.threshold_n {
            Some(n) => Strategy::Threshold {
                t: approx_threshold(n)?,
            },
            None => Strategy::threshold_for(multiset.len()),
        },
        StrategyArg::Optimal => Strategy::optimal_for(&multiset, mode)?,
        StrategyArg::Middle => Strategy::Middle,
    };
    let mut report = monte_carlo(&strategy, &multiset, mode, a.reps, a.seed)?;
    if enumeration_admits(&multiset) {
        let exact = exact_expected_payoff(&strategy, &multiset, mode)?;
        report.exact = Some(format_fraction(&exact));
    }
    let json = serde_json::to_string(&report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{json}")?;
    Ok(0)
}

fn table(a: TableArgs, out: &mut dyn Write) -> Outcome {
    let digits = a.digits;
    let row = |out: &mut dyn Write, p: u64, x: &Rational| -> std::io::Result<()> {
        writeln!(
            out,
            "{p}\t{}\t{}",
            format_fraction(x),
            to_decimal(x, digits)
        )
    };
    if a.what == TableWhat::Reach {
        if a.max_n.is_some() {
            return Err(usage("--max-n does not apply to --what reach; use --n"));
        }
        let n = a.n.ok_or_else(|| usage("--what reach requires --n"))?;
        let m = half_length("--n", n)? as u64;
        writeln!(out, "t\texact\tdecimal")?;
        for t in 1..=m {
            row(out, t, &reach_probability(ReachQuery::new(m, t)))?;
        }
        return Ok(0);
    }
    if a.n.is_some() {
        return Err(usage("--n applies only to --what reach; use --max-n"));
    }
    let max_n = a.max_n.unwrap_or(16);
    writeln!(out, "n\texact\tdecimal")?;
    match a.what {
        TableWhat::Moser => {
            let n_max = max_n as usize;
            let exact = moser_table(n_max.min(MOSER_EXACT_MAX))?;
            let bounds = moser_bounds(n_max);
            for (n, bound) in bounds.iter().enumerate().skip(1) {
                let decimal = match exact.get(n) {
                    Some(v) => crate::numeric::to_decimal_truncated(v, digits),
                    None => bound.certified_digits(digits).ok_or_else(|| {
                        Error::domain(format!("E_{n} cannot be certified to {digits} digits"))
                    })?,
                };
                let fraction = exact
                    .get(n)
                    .map_or_else(|| "-".to_string(), format_fraction);
                writeln!(out, "{n}\t{fraction}\t{decimal}")?;
            }
        }
        what => {
            for n in (2..=max_n).step_by(2) {
                let m = n / 2;
                let v = match what {
                    TableWhat::W3 => w3_exact(n)?,
                    TableWhat::Upper => payoff_upper_bound(m),
                    TableWhat::W1 => w1_exact(m),
                    TableWhat::Moser | TableWhat::Reach => unreachable!("handled above"),
                };
                row(out, n, &v)?;
            }
        }
    }
    Ok(0)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Outcome {
    let reports = run_verify(a.what);
    let all = reports.iter().all(|r| r.passed);
    if a.json {
        let json = serde_json::to_string_pretty(&reports).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{json}")?;
    } else {
        for r in &reports {
            let ok = r.checks.iter().filter(|c| c.pass).count();
            let verdict = if r.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{} {verdict} ({ok}/{})", r.name, r.checks.len())?;
            for c in &r.checks {
                let mark = if c.pass { "ok  " } else { "FAIL" };
                let source = serde_json::to_value(c.source)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "  {mark} {}: expected {} [{source}], got {}",
                    c.id, c.expected, c.actual
                )?;
            }
        }
    }
    Ok(if all { 0 } else { 1 })
}

fn reduce(a: ReduceArgs, out: &mut dyn Write) -> Outcome {
    let epsilon = parse_rational(&a.epsilon).map_err(|e| usage(format!("--epsilon: {e}")))?;
    if epsilon.is_negative() {
        return Err(usage("--epsilon must be non-negative"));
    }
    let multiset = load_multiset(&a.multiset)?;
    let mut chain = reduce_to_binary(&multiset, &epsilon)?;
    if a.with_f {
        chain.attach_f()?;
    }
    writeln!(out, "{chain}")?;
    Ok(0)
}

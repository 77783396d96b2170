//! Command-line driver. Exit codes: 0 success, 1 diagnostics, 2 internal invariant violation.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::explanation::{explain_from_trace, explanation_exists, export_dot, render_text};
use crate::model::{enumerate_solutions, CspModel, DomainFamily, Value};
use crate::parser::{parse_model, ModelSource};
use crate::propagation::{iterate, simultaneous_closure, Run, Status, Strategy};
use crate::rules::{build_rules, check_correct, check_correct_wrt_constraint, ReductionRule, RuleId, RuleMode};

#[derive(Debug, Parser)]
#[command(name = "fdexplain", version, about = "Propagate finite-domain constraints and explain value withdrawals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Bounds,
}

impl From<ModeArg> for RuleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => RuleMode::Full,
            ModeArg::Bounds => RuleMode::Bounds,
        }
    }
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Rule construction; `bounds` applies to offset equalities, other forms stay full.
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// worklist | roundrobin | random:<seed>
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated rule labels applied first, e.g. r5,r3,r1.
    #[arg(long, value_delimiter = ',')]
    script: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagate to the closure and print the final domains.
    Solve {
        model: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Keep going after a domain becomes empty.
        #[arg(long)]
        no_stop_on_failure: bool,
        /// Write the withdrawal trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Explain why a value is withdrawn from a variable.
    Explain {
        model: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        var: String,
        #[arg(long, allow_negative_numbers = true)]
        value: Value,
        /// Write the explanation as Graphviz text to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Print the explanation as an indented tree.
        #[arg(long)]
        text: bool,
    },
    /// Check rule correctness and confluence across strategies.
    Check {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        /// Number of strategies compared.
        #[arg(long, default_value_t = 20)]
        strategies: usize,
    },
    /// Print all solutions by generate and test.
    Oracle { model: PathBuf },
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the CLI on `args` (program name first), writing to the given streams.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve { model, run, no_stop_on_failure, trace } => {
            solve(&model, &run, !no_stop_on_failure, trace.as_deref(), out)
        }
        Command::Explain { model, run, var, value, dot, text } => {
            explain(&model, &run, &var, value, dot.as_deref(), text, out)
        }
        Command::Check { model, mode, strategies } => check(&model, mode.into(), strategies, out),
        Command::Oracle { model } => oracle(&model, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "{msg}");
            1
        }
        Err(Failure::Internal(msg)) => {
            let _ = writeln!(err, "{msg}");
            2
        }
    }
}

fn load(path: &Path) -> std::result::Result<CspModel, Failure> {
    let src = ModelSource::from_file(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_model(&src).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", src.provenance)).collect();
        Failure::Usage(lines.join("\n"))
    })
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, Failure> {
    match s {
        "worklist" => Ok(Strategy::Worklist),
        "roundrobin" => Ok(Strategy::RoundRobin),
        _ => s
            .strip_prefix("random:")
            .and_then(|seed| seed.parse().ok())
            .map(Strategy::SeededRandom)
            .ok_or_else(|| Failure::Usage(format!("unknown strategy `{s}`"))),
    }
}

fn run_of(args: &RunArgs, rules: &[ReductionRule]) -> std::result::Result<Run, Failure> {
    match (&args.script, &args.strategy) {
        (Some(_), Some(_)) => Err(Failure::Usage("--script and --strategy are exclusive".into())),
        (Some(labels), None) => {
            let ids = labels
                .iter()
                .map(|l| {
                    rules
                        .iter()
                        .find(|r| r.id.label == *l)
                        .map(|r| r.id.clone())
                        .ok_or_else(|| Failure::Usage(format!("unknown rule `{l}`")))
                })
                .collect::<std::result::Result<Vec<RuleId>, _>>()?;
            Ok(Run::Scripted(ids))
        }
        (None, s) => Ok(Run::Strategy(parse_strategy(s.as_deref().unwrap_or("worklist"))?)),
    }
}

fn solve(path: &Path, args: &RunArgs, stop_on_failure: bool, trace: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let model = load(path)?;
    let rules = build_rules(&model, args.mode.into())?;
    let run = run_of(args, &rules)?;
    let res = iterate(&model, &rules, &run, stop_on_failure)?;
    match res.status {
        Status::Closed => writeln!(out, "status: closed")?,
        Status::Failed(x) => writeln!(
            out,
            "status: failed ({} emptied at step {})",
            model.name(x),
            res.trace.applied.len()
        )?,
    }
    writeln!(out, "steps: {}", res.trace.applied.len())?;
    write!(out, "{}", model.format_family(&res.closure))?;
    if let Some(p) = trace {
        std::fs::write(p, res.trace.export_text(&model))?;
    }
    Ok(())
}

fn explain(
    path: &Path,
    args: &RunArgs,
    var: &str,
    value: Value,
    dot: Option<&Path>,
    text: bool,
    out: &mut dyn Write,
) -> Outcome {
    let model = load(path)?;
    let y = model.var_by_name(var).ok_or_else(|| Failure::Usage(format!("unknown variable `{var}`")))?;
    let rules = build_rules(&model, args.mode.into())?;
    let run = run_of(args, &rules)?;
    let exists = explanation_exists(&model, &rules, value, y)?;
    let res = iterate(&model, &rules, &run, false)?;
    if !exists {
        if res.trace.event(value, y).is_some() {
            return Err(Failure::Internal(format!("({value}, {var}) withdrawn by a run but inside the closure")));
        }
        writeln!(out, "({value}, {var}): in the closure, no explanation exists")?;
        return Ok(());
    }
    let expl = match explain_from_trace(&model, &res.trace, value, y) {
        Ok(e) => e,
        Err(Error::NotInTrace { .. }) => {
            return Err(Failure::Internal(format!("({value}, {var}) is outside the closure but the run kept it")))
        }
        Err(e) => return Err(e.into()),
    };
    let step = res.trace.event(value, y).map(|e| e.step).unwrap_or_default();
    writeln!(out, "({value}, {var}): withdrawn at step {step}, explanation with {} nodes", expl.node_count())?;
    if text || dot.is_none() {
        write!(out, "{}", render_text(&expl, &model))?;
    }
    if let Some(p) = dot {
        std::fs::write(p, export_dot(&expl, &model))?;
    }
    Ok(())
}

fn strategies(k: usize) -> Vec<Strategy> {
    let mut all = vec![Strategy::Worklist, Strategy::RoundRobin];
    all.extend((1..).map(Strategy::SeededRandom).take(k.saturating_sub(2)));
    all.truncate(k.max(1));
    all
}

fn strategy_name(s: Strategy) -> String {
    match s {
        Strategy::Worklist => "worklist".into(),
        Strategy::RoundRobin => "roundrobin".into(),
        Strategy::SeededRandom(seed) => format!("random:{seed}"),
    }
}

fn check(path: &Path, mode: RuleMode, k: usize, out: &mut dyn Write) -> Outcome {
    let model = load(path)?;
    let rules = build_rules(&model, mode)?;
    let mut violations = 0usize;
    writeln!(out, "rules: {}", rules.len())?;
    for r in &rules {
        let wrt = match r.origin() {
            Some(c) => check_correct_wrt_constraint(&model, r, model.constraint(c))?,
            None => true,
        };
        let global = check_correct(&model, r);
        violations += usize::from(!wrt) + usize::from(!global);
        let origin = r.origin().map(|c| c.to_string()).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{} ({origin}, out {}): correct w.r.t. {origin}: {}; correct: {}",
            r.id,
            model.name(r.output()),
            yes_no(wrt),
            yes_no(global)
        )?;
    }

    let reference = simultaneous_closure(&model, &rules);
    let plan = strategies(k);
    let closures: Vec<std::result::Result<DomainFamily, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = plan
            .iter()
            .map(|s| {
                let (model, rules) = (&model, &rules);
                scope.spawn(move || iterate(model, rules, &Run::Strategy(*s), false).map(|r| r.closure))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("strategy thread panicked")).collect()
    });
    let mut mismatches = 0usize;
    for (s, closure) in plan.iter().zip(closures) {
        if closure? != reference {
            mismatches += 1;
            writeln!(out, "mismatch: {} differs from the simultaneous closure", strategy_name(*s))?;
        }
    }
    writeln!(out, "confluence: {} strategies, {mismatches} mismatches", plan.len())?;
    write!(out, "{}", model.format_family(&reference))?;
    if violations + mismatches > 0 {
        return Err(Failure::Internal(format!(
            "{violations} correctness violations, {mismatches} confluence mismatches"
        )));
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn oracle(path: &Path, out: &mut dyn Write) -> Outcome {
    let model = load(path)?;
    let sols = enumerate_solutions(&model, &model.initial_family());
    writeln!(out, "{} solutions", sols.len())?;
    for t in &sols {
        writeln!(out, "{}", model.format_assignment(t))?;
    }
    Ok(())
}

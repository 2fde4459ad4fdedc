//! Command-line front end.
//!
//! [`dispatch`] runs one parsed [`Cli`] against an output sink and returns
//! the process exit code, so every subcommand can be driven from tests
//! without spawning a process. Exit codes: 0 success, 1 a verification
//! check failed, 2 bad input, 3 a budget was exceeded.

use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gadget::{
    CheckOutcome, GadgetContext, GadgetError, GadgetHeader, GadgetKind, VerificationReport,
    VerifyMode, DEFAULT_EXHAUSTIVE_BUDGET, DEFAULT_TRIALS_PER_CLASS,
};
use crate::group::{Elem, FiniteGroup, GroupError, GroupFile};
use crate::identities::{IdentityContext, Tally};
use crate::poly::{build_q, log2_big, GroupPolynomial, PolyBuilder, PolyError};
use crate::reduce::{self, CnfFormula, Graph, ReduceError};
use crate::search;
use crate::solve::{self, Engine, SolveError, DEFAULT_SOLVE_BUDGET};
use crate::structure::{
    self, all_normal_subgroups, fitting_by_lattice, fitting_subgroup, verify_omega,
    StructureError, DEFAULT_LATTICE_CAP,
};

/// Environment variable consulted when `--jobs` is absent.
pub const JOBS_ENV: &str = "FITGADGET_JOBS";

/// Groups up to this order get the identity suite exhaustively.
const IDENTITY_EXHAUSTIVE_ORDER: usize = 12;
/// Random tuples per identity family on larger groups.
const IDENTITY_SAMPLES: u64 = 100_000;

#[derive(Parser, Debug, Clone)]
#[command(name = "fitgadget", version, about = "Fitting-series analysis and commutator gadgets for finite solvable groups")]
pub struct Cli {
    /// Worker threads for search and verification.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value = "0xF177", value_parser = parse_u64)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Report layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Progress messages on standard error; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Series, ω, normal lattice and, when d ≥ 3, the gadget context.
    Analyze { group: String },
    /// Builds one gadget family and reports its length.
    Gadget {
        group: String,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        arity: usize,
        /// Also write `group.json`, `gadget.json` and `gadget.slp` here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the coset contract before reporting.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
        exhaustive_budget: u64,
    },
    /// Compiles a DIMACS CNF or edge list into an instance bundle.
    Reduce {
        group: String,
        input: PathBuf,
        /// Bundle directory.
        #[arg(long)]
        out: PathBuf,
        /// Input format; guessed from the `p` line when absent.
        #[arg(long, value_enum)]
        input_format: Option<InputFormat>,
    },
    /// Brute-forces every instance of a bundle.
    Solve {
        bundle: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SOLVE_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = EngineArg::Baseline)]
        engine: EngineArg,
    },
    /// Runs every structural, identity and gadget check on a group.
    Verify {
        group: String,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
        exhaustive_budget: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS_PER_CLASS)]
        trials: usize,
    },
    /// CSV of gadget size and reduction/solve time against arity.
    Bench {
        group: String,
        /// Half-open range `a..b` of arities.
        #[arg(long, value_parser = parse_range)]
        arity_range: Range<usize>,
        #[arg(long, value_enum, default_value_t = KindArg::And)]
        kind: KindArg,
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Variables of the random formulas that get reduced and solved.
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = DEFAULT_SOLVE_BUDGET)]
        solve_budget: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    And,
    Sat,
}

impl From<KindArg> for GadgetKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::And => GadgetKind::And,
            KindArg::Sat => GadgetKind::Sat,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Cnf,
    Graph,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineArg {
    Baseline,
    Pruned,
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a = usize::from_str(a.trim()).map_err(|e| e.to_string())?;
    let b = usize::from_str(b.trim()).map_err(|e| e.to_string())?;
    if a >= b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..b)
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0} check(s) failed")]
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

macro_rules! input_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}
input_errors!(GroupError, StructureError, PolyError, std::io::Error, serde_json::Error);

impl From<GadgetError> for CliError {
    fn from(e: GadgetError) -> Self {
        match e {
            GadgetError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<ReduceError> for CliError {
    fn from(e: ReduceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Worker count from `--jobs`, then the environment, then rayon's default.
pub fn resolve_jobs(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(j) = flag {
        return Ok(Some(j));
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("{JOBS_ENV}={v} is not a worker count"))),
        Err(_) => Ok(None),
    }
}

/// Runs one command inside a thread pool sized by `--jobs`.
pub fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = resolve_jobs(cli.jobs)? {
        if j == 0 {
            return Err(CliError::Input("--jobs must be positive".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Input(e.to_string()))?;
    let mut report = String::new();
    let mut diagnostics = String::new();
    let status = pool.install(|| execute(cli, &mut report, &mut diagnostics));
    err.write_all(diagnostics.as_bytes())?;
    match &cli.output {
        Some(path) => std::fs::write(path, &report)?,
        None => out.write_all(report.as_bytes())?,
    }
    status
}

fn execute(cli: &Cli, report: &mut String, err: &mut String) -> Result<(), CliError> {
    let started = Instant::now();
    let result = match &cli.command {
        Command::Analyze { group } => analyze(cli, group, report),
        Command::Gadget { group, kind, level, arity, out, verify, exhaustive_budget } => gadget(
            cli,
            group,
            (*kind).into(),
            *level,
            *arity,
            out.as_deref(),
            verify.then_some(*exhaustive_budget),
            report,
        ),
        Command::Reduce { group, input, out, input_format } => {
            reduce_cmd(cli, group, input, out, *input_format, report)
        }
        Command::Solve { bundle, budget, engine } => solve_cmd(bundle, *budget, *engine, report),
        Command::Verify { group, exhaustive_budget, trials } => {
            verify(cli, group, *exhaustive_budget, *trials, report, err)
        }
        Command::Bench { group, arity_range, kind, level, vars, solve_budget } => bench(
            cli,
            group,
            arity_range.clone(),
            (*kind).into(),
            *level,
            *vars,
            *solve_budget,
            report,
            err,
        ),
    };
    if cli.verbose > 0 {
        let _ = writeln!(err, "done in {:.3}s", started.elapsed().as_secs_f64());
    }
    result
}

/// A group argument: a path to a group file, or `builtin:NAME`.
pub fn load_group_arg(arg: &str) -> Result<FiniteGroup, CliError> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return Ok(crate::catalog::builtin(name)?);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| CliError::Input(format!("reading {arg}: {e}")))?;
    Ok(GroupFile::parse(&text)?.load()?)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

#[derive(Serialize)]
struct GroupInfo {
    name: Option<String>,
    order: usize,
    fingerprint: String,
}

impl GroupInfo {
    fn of(g: &FiniteGroup) -> Self {
        GroupInfo { name: g.name().map(str::to_string), order: g.order(), fingerprint: g.fingerprint() }
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    group: GroupInfo,
    fitting_length: usize,
    fitting_series: structure::FittingSeries,
    lower_central_series: structure::LowerCentralSeries,
    omega: structure::OmegaData,
    normal_lattice: Vec<structure::NormalSubgroup>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gadget_context: Option<crate::gadget::ContextSummary>,
    /// Levels whose quotient needs a larger ω than `G₀`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    quotient_omega_exceeds_ambient: Vec<usize>,
}

fn analyze(cli: &Cli, group: &str, report: &mut String) -> Result<(), CliError> {
    let g = load_group_arg(group)?;
    let a = structure::analyze(&g)?;
    let series = a.fitting?;
    let d = series.fitting_length;
    let (note, ctx) = if d < 3 {
        (Some(format!("gadget construction unavailable (d < 3); d = {d}")), None)
    } else {
        (None, Some(GadgetContext::prepare(&g)?))
    };
    let exceeds = ctx
        .as_ref()
        .map(|c| {
            c.descent.iter().filter(|s| s.quotient_omega > c.omega()).map(|s| s.alpha).collect()
        })
        .unwrap_or_default();
    let r = AnalyzeReport {
        group: GroupInfo::of(&g),
        fitting_length: d,
        fitting_series: series,
        lower_central_series: a.lower_central,
        omega: a.omega,
        normal_lattice: a.lattice,
        note,
        gadget_context: ctx.as_ref().map(|c| c.summary()),
        quotient_omega_exceeds_ambient: exceeds,
    };
    match cli.format {
        Format::Json => report.push_str(&json(&r)),
        Format::Table => {
            let _ = writeln!(report, "order           {}", r.group.order);
            let _ = writeln!(report, "fitting length  {}", r.fitting_length);
            let orders: Vec<String> =
                r.fitting_series.terms.iter().map(|t| t.order().to_string()).collect();
            let _ = writeln!(report, "series orders   {}", orders.join(" < "));
            let _ = writeln!(report, "omega           {}", r.omega.omega);
            let _ = writeln!(report, "normal subgrps  {}", r.normal_lattice.len());
            if let Some(n) = &r.note {
                let _ = writeln!(report, "note            {n}");
            }
            if let Some(c) = &r.gadget_context {
                let _ = writeln!(report, "|G0|            {}", c.g0_order);
                let _ = writeln!(report, "|K| |K0| |H|    {} {} {}", c.k.len(), c.k0.len(), c.h.len());
                let _ = writeln!(report, "C               {}", c.c);
                let _ = writeln!(report, "fingerprint     {}", c.fingerprint);
            }
        }
    }
    Ok(())
}

/// `gadget.json`: the header plus length bookkeeping.
#[derive(Serialize)]
pub struct GadgetReport {
    pub header: GadgetHeader,
    /// Length recomputed from the DAG, as a decimal string.
    pub dag_flat_length: String,
    pub lengths_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

pub const GADGET_HEADER_FILE: &str = "gadget.json";
pub const GADGET_SLP_FILE: &str = "gadget.slp";
pub const GADGET_GROUP_FILE: &str = "group.json";

/// Reads back a directory written by `gadget --out`.
pub fn read_gadget_dir(dir: &Path) -> Result<(GadgetHeader, GroupPolynomial), CliError> {
    let header: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join(GADGET_HEADER_FILE))?)?;
    let header: GadgetHeader = serde_json::from_value(header["header"].clone())?;
    let group = GroupFile::parse(&std::fs::read_to_string(dir.join(GADGET_GROUP_FILE))?)?.load()?;
    let slp = std::fs::read_to_string(dir.join(GADGET_SLP_FILE))?;
    let poly = GroupPolynomial::from_slp(&slp, Arc::new(group), Some(header.variables))?;
    Ok((header, poly))
}

#[allow(clippy::too_many_arguments)]
fn gadget(
    cli: &Cli,
    group: &str,
    kind: GadgetKind,
    level: usize,
    arity: usize,
    out: Option<&Path>,
    verify_budget: Option<u64>,
    report: &mut String,
) -> Result<(), CliError> {
    let g = load_group_arg(group)?;
    let ctx = GadgetContext::prepare(&g)?;
    let family = ctx.build(kind, level, arity)?;
    let dag_len = family.polynomial.flat_length();
    let verification = match verify_budget {
        Some(budget) => Some(ctx.verify_gadget(
            &family,
            &VerifyMode::Auto { budget, seed: cli.seed, trials_per_class: DEFAULT_TRIALS_PER_CLASS },
        )?),
        None => None,
    };
    let failed = verification.as_ref().is_some_and(|v| !v.passed);
    let r = GadgetReport {
        header: family.header(&ctx),
        lengths_agree: dag_len == family.declared_flat_length,
        dag_flat_length: dag_len.to_string(),
        verification,
    };
    let slp = family.polynomial.to_slp();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(GADGET_GROUP_FILE), GroupFile::describe(ctx.group()).to_json() + "\n")?;
        std::fs::write(dir.join(GADGET_HEADER_FILE), json(&r))?;
        std::fs::write(dir.join(GADGET_SLP_FILE), &slp)?;
    }
    match cli.format {
        Format::Json => {
            report.push_str(&json(&r));
            if out.is_none() {
                report.push_str(&slp);
            }
        }
        Format::Table => {
            let h = &r.header;
            let _ = writeln!(report, "{:?} level {} arity {}", h.kind, h.level, h.arity);
            let _ = writeln!(report, "variables     {}", h.variables);
            let _ = writeln!(report, "nodes         {}", h.node_count);
            let _ = writeln!(report, "flat length   {}", h.declared_flat_length);
            let _ = writeln!(report, "log2 length   {:.3}", h.log2_flat_length);
            if let Some(v) = &r.verification {
                let _ = writeln!(report, "verification  {} ({})", pass_word(v.passed), v.mode);
            }
        }
    }
    if !r.lengths_agree {
        return Err(CliError::Verification(1));
    }
    if failed {
        return Err(CliError::Verification(1));
    }
    Ok(())
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn guess_format(text: &str) -> Option<InputFormat> {
    let p = text.lines().map(str::trim).find(|l| l.starts_with("p "))?;
    match p.split_whitespace().nth(1)? {
        "cnf" => Some(InputFormat::Cnf),
        "edge" | "col" => Some(InputFormat::Graph),
        _ => None,
    }
}

fn reduce_cmd(
    cli: &Cli,
    group: &str,
    input: &Path,
    out: &Path,
    format: Option<InputFormat>,
    report: &mut String,
) -> Result<(), CliError> {
    let g = load_group_arg(group)?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Input(format!("reading {}: {e}", input.display())))?;
    let format = format
        .or_else(|| guess_format(&text))
        .ok_or_else(|| CliError::Input("cannot tell CNF from graph input; pass --input-format".into()))?;
    let ctx = GadgetContext::prepare(&g)?;
    let red = match format {
        InputFormat::Cnf => reduce::reduce_sat(&CnfFormula::parse_dimacs(&text)?, &ctx)?,
        InputFormat::Graph => reduce::reduce_coloring(&Graph::parse_dimacs(&text)?, &ctx)?,
    };
    reduce::write_bundle(out, &red)?;
    let manifest = std::fs::read_to_string(out.join(reduce::MANIFEST_FILE))?;
    match cli.format {
        Format::Json => report.push_str(&manifest),
        Format::Table => {
            let r = &red.report;
            let _ = writeln!(report, "pipeline      {:?}", r.pipeline);
            let _ = writeln!(report, "m             {}", r.m);
            let _ = writeln!(report, "nodes         {}", r.node_count);
            let _ = writeln!(report, "flat length   {}", r.flat_length);
            let _ = writeln!(report, "bundle        {}", out.display());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveEntry<'a> {
    mode: reduce::Mode,
    target: Elem,
    #[serde(flatten)]
    result: solve::SolveJson<'a>,
}

fn solve_cmd(bundle: &Path, budget: u64, engine: EngineArg, report: &mut String) -> Result<(), CliError> {
    let (_, instances) = reduce::read_bundle(bundle)?;
    let engine = match engine {
        EngineArg::Baseline => Engine::Baseline,
        EngineArg::Pruned => Engine::Pruned,
    };
    let results = instances
        .iter()
        .map(|inst| solve::solve(inst, budget, engine))
        .collect::<Result<Vec<_>, _>>()?;
    let entries: Vec<SolveEntry> = instances
        .iter()
        .zip(&results)
        .map(|(i, r)| SolveEntry { mode: i.mode, target: i.target, result: r.to_json() })
        .collect();
    report.push_str(&json(&entries));
    Ok(())
}

/// One line of the `verify` report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyEntry {
    pub name: String,
    pub status: Status,
    pub checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl VerifyEntry {
    fn from_check(c: CheckOutcome) -> Self {
        let status = if c.passed { Status::Pass } else { Status::Fail };
        VerifyEntry { name: c.name, status, checked: c.checked, detail: c.detail }
    }

    fn from_tally(prefix: &str, t: Tally) -> Self {
        let status = if t.passed() { Status::Pass } else { Status::Fail };
        VerifyEntry {
            name: format!("{prefix}{}", t.name),
            status,
            checked: t.checked,
            detail: t.first_failure,
        }
    }

    fn from_report(name: String, r: VerificationReport) -> Self {
        let status = if r.passed { Status::Pass } else { Status::Fail };
        let detail = match &r.counterexample {
            Some(c) => Some(format!("{} counterexample {:?} -> {}", r.mode, c.assignment, c.value)),
            None => Some(r.mode.to_string()),
        };
        VerifyEntry { name, status, checked: r.assignments_checked, detail }
    }

    fn check(name: &str, ok: bool, checked: u64, detail: impl FnOnce() -> String) -> Self {
        let (status, detail) = if ok { (Status::Pass, None) } else { (Status::Fail, Some(detail())) };
        VerifyEntry { name: name.into(), status, checked, detail }
    }

    fn skipped(name: String, why: String) -> Self {
        VerifyEntry { name, status: Status::Skipped, checked: 0, detail: Some(why) }
    }
}

#[derive(Serialize)]
pub struct VerifyReport {
    group: GroupInfo,
    fitting_length: usize,
    seed: u64,
    exhaustive_budget: u64,
    passed: bool,
    checks: Vec<VerifyEntry>,
}

/// Every check that applies to `g`, in a fixed order.
pub fn verify_checks(g: &FiniteGroup, budget: u64, seed: u64, trials: usize) -> Result<(usize, Vec<VerifyEntry>), CliError> {
    let mut out = Vec::new();
    let lattice = all_normal_subgroups(g, DEFAULT_LATTICE_CAP)?;
    let omega = structure::compute_omega_with_lattice(g, &lattice)?;
    out.push(VerifyEntry::check("omega stabilizes", verify_omega(g, &lattice, omega.omega).is_ok(), 1, || {
        "ω fails its defining conditions".into()
    }));
    let baer = fitting_subgroup(g, &omega)?;
    let oracle = fitting_by_lattice(g, &lattice);
    out.push(VerifyEntry::check("Baer formula matches lattice", baer.set() == &oracle, lattice.len() as u64, || {
        format!("Baer {:?} vs lattice {:?}", baer.set(), oracle)
    }));
    let series = structure::upper_fitting_series(g)?;
    out.push(series_check(g, &series)?);
    let d = series.fitting_length;

    let k_max = 4;
    let ictx = IdentityContext::new(g, &lattice, k_max);
    let tallies = if g.order() <= IDENTITY_EXHAUSTIVE_ORDER {
        ictx.exhaustive(2)
    } else {
        ictx.sampled(seed, IDENTITY_SAMPLES)
    };
    out.extend(tallies.into_iter().map(|t| VerifyEntry::from_tally("identity: ", t)));
    out.push(q_repeat_check(g, omega.omega, budget));

    if d < 3 {
        let refused = matches!(GadgetContext::prepare(g), Err(GadgetError::FittingLengthTooSmall { .. }));
        out.push(VerifyEntry::check("gadget construction refuses d < 3", refused, 1, || {
            "construction did not refuse".into()
        }));
        return Ok((d, out));
    }

    let ctx = GadgetContext::prepare(g)?;
    out.push(VerifyEntry::check("context invariants", ctx.check_invariants().is_ok(), 1, || {
        format!("{:?}", ctx.check_invariants().unwrap_err())
    }));
    out.push(VerifyEntry::from_check(ctx.verify_normal_closures()));
    out.push(VerifyEntry::from_check(ctx.verify_phi_bijective()));
    out.push(VerifyEntry::from_check(ctx.verify_qstar1_cosets()));
    let n = ctx.group().order() as u64;
    if (ctx.k.order() as u64).saturating_mul(n.saturating_pow(3)) <= budget {
        out.push(VerifyEntry::from_check(ctx.verify_d_cosets()));
    } else {
        out.push(VerifyEntry::skipped("D cosets".into(), format!("|K|·|G0|^3 exceeds {budget}")));
    }

    for alpha in 1..ctx.d {
        for k in 1..=2 {
            let name = format!("level alpha={alpha} k={k}");
            match ctx.verify_level(alpha, k, ctx.h_elem(alpha), budget) {
                Ok(r) => out.push(VerifyEntry::from_report(name, r)),
                Err(GadgetError::BudgetExceeded { needed, .. }) => {
                    out.push(VerifyEntry::skipped(name, format!("{needed} exceeds {budget}")))
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    out.push(mutation_check(&ctx, budget)?);

    let mode = VerifyMode::Auto { budget, seed, trials_per_class: trials };
    for alpha in 1..ctx.d {
        let cases = [(GadgetKind::And, 1), (GadgetKind::And, 2), (GadgetKind::And, 3), (GadgetKind::Sat, 1), (GadgetKind::Sat, 2)];
        for (kind, m) in cases {
            let family = ctx.build(kind, alpha, m)?;
            let name = format!("{} alpha={alpha} m={m}", format!("{kind:?}").to_uppercase());
            let lengths = family.polynomial.flat_length() == family.declared_flat_length;
            let r = ctx.verify_gadget(&family, &mode)?;
            let mut e = VerifyEntry::from_report(name, r);
            if !lengths {
                e.status = Status::Fail;
                e.detail = Some("declared length disagrees with the DAG".into());
            }
            out.push(e);
        }
    }
    Ok((d, out))
}

/// Each `U_{i+1}/U_i` is the Fitting subgroup of `G/U_i`, by lattice join.
fn series_check(g: &FiniteGroup, series: &structure::FittingSeries) -> Result<VerifyEntry, CliError> {
    for i in 0..series.fitting_length {
        let (q, proj) = g.quotient(series.term(i))?;
        let lat = all_normal_subgroups(&q, DEFAULT_LATTICE_CAP)?;
        let fit = fitting_by_lattice(&q, &lat);
        let pulled = structure::preimage(&proj, &fit);
        if &pulled != series.term(i + 1).set() {
            return Ok(VerifyEntry::check("upper Fitting series", false, i as u64 + 1, || {
                format!("term {} disagrees with the lattice oracle", i + 1)
            }));
        }
    }
    Ok(VerifyEntry::check("upper Fitting series", true, series.fitting_length as u64, String::new))
}

/// `q^{k+1}(z, x⃗, w, w) = q^k(z, x⃗, w)` on every assignment, k ∈ {0, 1}.
fn q_repeat_check(g: &FiniteGroup, omega: usize, budget: u64) -> VerifyEntry {
    let g = Arc::new(g.clone());
    let n = g.order();
    let mut checked = 0;
    for k in 0..=1usize {
        let total = match search::space_size(n, k + 2).filter(|&t| t <= budget) {
            Some(t) => t,
            None => {
                return VerifyEntry::skipped(
                    "q with repeated last variable".into(),
                    format!("{n}^{} exceeds {budget}", k + 2),
                )
            }
        };
        let big = build_q(g.clone(), omega, k + 1);
        let small = build_q(g.clone(), omega, k);
        let mut b = PolyBuilder::new(g.clone());
        let vars: Vec<_> = (0..k + 2).map(|i| b.var(i)).collect();
        let mut args = vars.clone();
        args.push(vars[k + 1]);
        let root = b.import(&big, &args).expect("same group");
        let merged = b.finish(root, k + 2);
        let bad = search::find_first(
            n,
            k + 2,
            total,
            || (merged.evaluator(), small.evaluator()),
            |(m, s), a| m.eval(a) != s.eval(a),
        );
        checked += bad.map_or(total, |i| i + 1);
        if let Some(i) = bad {
            return VerifyEntry::check("q with repeated last variable", false, checked, || {
                format!("k={k} assignment {:?}", search::decode(i, n, k + 2))
            });
        }
    }
    VerifyEntry::check("q with repeated last variable", true, checked, String::new)
}

/// The level check must reject a target from a different coset.
fn mutation_check(ctx: &GadgetContext, budget: u64) -> Result<VerifyEntry, CliError> {
    let g0 = ctx.group();
    let u0 = ctx.u(0).set();
    let h1 = ctx.h_elem(1);
    let wrong = g0
        .elements()
        .find(|&x| !u0.contains(g0.mul(g0.inv(h1), x)))
        .expect("h₁ ≠ 1 gives a second coset");
    let name = "level check rejects a mutated target";
    match ctx.verify_level(1, 1, wrong, budget) {
        Ok(r) => Ok(VerifyEntry::check(name, !r.passed, r.assignments_checked, || {
            format!("target {wrong} accepted")
        })),
        Err(GadgetError::BudgetExceeded { needed, .. }) => {
            Ok(VerifyEntry::skipped(name.into(), format!("{needed} exceeds {budget}")))
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(
    cli: &Cli,
    group: &str,
    budget: u64,
    trials: usize,
    report: &mut String,
    err: &mut String,
) -> Result<(), CliError> {
    let g = load_group_arg(group)?;
    let (d, checks) = verify_checks(&g, budget, cli.seed, trials)?;
    if cli.verbose > 0 {
        let _ = writeln!(err, "{} checks on a group of order {}", checks.len(), g.order());
    }
    let failures = checks.iter().filter(|c| c.status == Status::Fail).count();
    let r = VerifyReport {
        group: GroupInfo::of(&g),
        fitting_length: d,
        seed: cli.seed,
        exhaustive_budget: budget,
        passed: failures == 0,
        checks,
    };
    match cli.format {
        Format::Json => report.push_str(&json(&r)),
        Format::Table => {
            for c in &r.checks {
                let word = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                let _ = writeln!(report, "{word}  {:<45} {:>10}", c.name, c.checked);
            }
        }
    }
    if failures > 0 {
        return Err(CliError::Verification(failures));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    cli: &Cli,
    group: &str,
    arities: Range<usize>,
    kind: GadgetKind,
    level: usize,
    vars: usize,
    solve_budget: u64,
    report: &mut String,
    err: &mut String,
) -> Result<(), CliError> {
    let g = load_group_arg(group)?;
    let ctx = GadgetContext::prepare(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    report.push_str("m,gadget_nodes,gadget_log2_flat_length,reduce_nodes,reduce_log2_flat_length,reduce_ms,solve_ms,verdict\n");
    for m in arities {
        let family = ctx.build(kind, level, m)?;
        let phi = CnfFormula::random(vars.max(1), m, &mut rng);
        let t = Instant::now();
        let red = reduce::reduce_sat(&phi, &ctx)?;
        let reduce_ms = t.elapsed().as_secs_f64() * 1e3;
        let (solve_ms, verdict) = match solve::polsat_bruteforce(&red.satisfiability, solve_budget) {
            Ok(r) => (format!("{:.3}", r.wall_time.as_secs_f64() * 1e3), r.verdict.label().to_string()),
            Err(SolveError::BudgetExceeded { .. }) => (String::new(), "SKIPPED".into()),
            Err(e) => return Err(e.into()),
        };
        let _ = writeln!(
            report,
            "{m},{},{:.6},{},{:.6},{reduce_ms:.3},{solve_ms},{verdict}",
            family.polynomial.node_count(),
            log2_big(&family.declared_flat_length),
            red.report.node_count,
            red.report.log2_flat_length,
        );
        if cli.verbose > 0 {
            let _ = writeln!(err, "m={m} done");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parses_seed_and_range() {
        assert_eq!(parse_u64("0xF177"), Ok(0xF177));
        assert_eq!(parse_u64("17"), Ok(17));
        assert!(parse_u64("0xZZ").is_err());
        assert_eq!(parse_range("1..31"), Ok(1..31));
        assert!(parse_range("3..3").is_err());
        assert!(parse_range("3").is_err());
    }

    #[test]
    fn guesses_input_format() {
        assert_eq!(guess_format("c x\np cnf 2 1\n1 2 0\n"), Some(InputFormat::Cnf));
        assert_eq!(guess_format("p edge 3 1\ne 1 2\n"), Some(InputFormat::Graph));
        assert_eq!(guess_format("1 2 0\n"), None);
    }

    #[test]
    fn analyze_reports_small_fitting_length() {
        let (code, out, _) = run_str(&["fitgadget", "analyze", "builtin:D15"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["fitting_length"], 2);
        assert!(v["note"].as_str().unwrap().starts_with("gadget construction unavailable (d < 3)"));
        assert!(v.get("gadget_context").is_none());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["fitgadget", "analyze", "builtin:Nope"]).0, 2);
        assert_eq!(run_str(&["fitgadget", "analyze", "/no/such/file.json"]).0, 2);
        assert_eq!(run_str(&["fitgadget", "frobnicate"]).0, 2);
        let (code, _, err) =
            run_str(&["fitgadget", "gadget", "builtin:D15", "--kind", "and", "--level", "1", "--arity", "2"]);
        assert_eq!(code, 2, "{err}");
        let dir = tempfile::tempdir().unwrap();
        let cnf = dir.path().join("f.cnf");
        std::fs::write(&cnf, "p cnf 2 1\n1 2 0\n").unwrap();
        let bundle = dir.path().join("b");
        let (code, _, err) = run_str(&[
            "fitgadget", "reduce", "builtin:S4", cnf.to_str().unwrap(), "--out", bundle.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        let (code, _, _) = run_str(&["fitgadget", "solve", bundle.to_str().unwrap(), "--budget", "10"]);
        assert_eq!(code, 3);
    }

    #[test]
    fn default_seed() {
        let cli = Cli::try_parse_from(["fitgadget", "analyze", "x"]).unwrap();
        assert_eq!(cli.seed, crate::gadget::DEFAULT_SEED);
    }

    #[test]
    fn jobs_must_be_positive() {
        assert_eq!(run_str(&["fitgadget", "--jobs", "0", "analyze", "builtin:S3"]).0, 2);
    }
}

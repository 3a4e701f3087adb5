//! The `causal-calc` command line. [`run`] parses arguments and executes a
//! command, returning its output and exit code instead of printing, so the
//! whole surface can be tested in-process.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 validation defect,
//! 3 node budget exceeded.

mod sweep;

pub use sweep::{outcome_holds, sweep, CellSummary, SweepError, SweepOptions, SweepReport, SweepRow};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::compile::{calc_accepts, compile, initial_calc_config, CalcKind, CalculatorModel, CompileError};
use crate::counterfactual::{
    apply_intervention, apply_structure_intervention, is_cause, CauseOptions, CauseQuery, CauseVerdict, CauseWitness,
    CounterfactualError, InterventionSpec, StructureInterventionSpec,
};
use crate::equiv::{check_equivalence, EquivError, EquivOptions};
use crate::io::{
    format_atoms, load_machine, load_model, model_to_string, parse_assignments, parse_atoms, parse_outcome,
    parse_steps, parse_structure_atoms, parse_var_patterns, run_tree_to_json, tree_to_json, write_text, IoError,
    LoadedModel, OutcomeSpec,
};
use crate::machines::{expand_run_tree, initial_machine_config, run_machine, Machine, MachineError, MachineKind};
use crate::tsem::{
    expand_tree_partial, Configuration, IndexRange, Model, TimedAtom, TsemError, Value, VarId, DEFAULT_NODE_CAP,
};

pub const NODE_CAP_ENV: &str = "CAUSAL_CALC_NODE_CAP";

/// Node budget: `CAUSAL_CALC_NODE_CAP` when set to a positive integer,
/// otherwise the library default.
pub fn node_cap() -> usize {
    std::env::var(NODE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmdOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: msg.into(),
        }
    }

    fn new(budget: bool, validation: bool, message: String) -> Self {
        let code = if budget {
            3
        } else if validation {
            2
        } else {
            1
        };
        CliError { code, message }
    }
}

fn tsem_budget(e: &TsemError) -> bool {
    matches!(e, TsemError::BudgetExceeded { .. })
}

impl From<TsemError> for CliError {
    fn from(e: TsemError) -> Self {
        CliError::new(tsem_budget(&e), true, e.to_string())
    }
}

impl From<MachineError> for CliError {
    fn from(e: MachineError) -> Self {
        CliError::new(matches!(e, MachineError::BudgetExceeded { .. }), true, e.to_string())
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        CliError::new(e.is_budget(), true, e.to_string())
    }
}

impl From<EquivError> for CliError {
    fn from(e: EquivError) -> Self {
        CliError::new(e.is_budget(), true, e.to_string())
    }
}

impl From<CounterfactualError> for CliError {
    fn from(e: CounterfactualError) -> Self {
        let budget = matches!(
            e,
            CounterfactualError::Tsem(TsemError::BudgetExceeded { .. }) | CounterfactualError::SearchTooLarge { .. }
        );
        CliError::new(budget, true, e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        CliError::new(e.is_budget(), true, e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Machine(e) => e.into(),
            IoError::Compile(e) => e.into(),
            IoError::Tsem(e) => e.into(),
            IoError::Invalid(_) => CliError::new(false, true, e.to_string()),
            other => CliError::usage(other.to_string()),
        }
    }
}

impl From<crate::io::SyntaxError> for CliError {
    fn from(e: crate::io::SyntaxError) -> Self {
        CliError::usage(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "causal-calc",
    version,
    about = "Temporal structural equation models, machine compilers and causal queries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a machine into a calculator model.
    Compile(CompileArgs),
    /// Emit the computation tree of a model or the run tree of a machine.
    Run(RunArgs),
    /// Decide acceptance directly, through the compiled calculator, or both.
    Accepts(AcceptsArgs),
    /// Check bounded equivalence of a machine and its calculator.
    Bisim(BisimArgs),
    /// Emit the computation tree after an intervention.
    Intervene(InterveneArgs),
    /// Decide whether a set of timed atoms is a but-for cause of an outcome.
    Cause(CauseArgs),
    /// Flip timed atoms one (or two) at a time and classify each flip.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[arg(long)]
    pub machine: PathBuf,
    /// Tape length n of an LBA.
    #[arg(long)]
    pub tape_len: Option<usize>,
    /// Single-variable LBA encoding.
    #[arg(long)]
    pub monolithic: bool,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Where the initial configuration of a model comes from.
#[derive(Args, Debug, Clone, Default)]
pub struct RootArgs {
    /// Initial assignments, e.g. `X=8,Y=0`.
    #[arg(long, conflicts_with = "input")]
    pub init: Option<String>,
    /// Machine input; only for compiled calculator models.
    #[arg(long)]
    pub input: Option<String>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "machine"])))]
pub struct RunArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub machine: Option<PathBuf>,
    #[command(flatten)]
    pub root: RootArgs,
    #[arg(long)]
    pub tape_len: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Via {
    Direct,
    Tsem,
    Both,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).multiple(true).args(["model", "machine"])))]
pub struct AcceptsArgs {
    #[arg(long)]
    pub machine: Option<PathBuf>,
    /// A compiled calculator model; its source machine is taken from the
    /// model's metadata when --machine is absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: String,
    /// LBA tape length; defaults to the input length (at least 1).
    #[arg(long)]
    pub tape_len: Option<usize>,
    #[arg(long)]
    pub monolithic: bool,
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = Via::Both)]
    pub via: Via,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).multiple(true).args(["model", "machine"])))]
pub struct BisimArgs {
    #[arg(long)]
    pub machine: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub tape_len: Option<usize>,
    #[arg(long)]
    pub monolithic: bool,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    /// Fraction of node pairs re-derived with the reference interpreter.
    #[arg(long, default_value_t = 0.1)]
    pub reverify: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("intervention").required(true).args(["do_", "do_structure"])))]
pub struct InterveneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub root: RootArgs,
    /// Atomic interventions, e.g. `X@1=5,Y@2=0`.
    #[arg(long = "do")]
    pub do_: Option<String>,
    /// Structure interventions, e.g. `X@2(X=0)=1`.
    #[arg(long)]
    pub do_structure: Option<String>,
    /// Tree depth; defaults to 10, or one past the latest intervened step.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CauseArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub root: RootArgs,
    #[arg(long)]
    pub candidate: String,
    /// Timed atoms, or `accept@T` for a calculator with one final state.
    #[arg(long)]
    pub outcome: String,
    /// Let candidate and outcome hold on different branches.
    #[arg(long)]
    pub any_branch: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub root: RootArgs,
    /// Steps to flip at: `T` or `A..B`, inclusive.
    #[arg(long, default_value = "0")]
    pub steps: String,
    /// Variable patterns: `X`, `X[3]`, `X[-2..5]`, comma-separated.
    #[arg(long)]
    pub vars: String,
    /// Timed atoms, or `accept@T` on a calculator model.
    #[arg(long)]
    pub outcome: String,
    #[arg(long, default_value_t = 1)]
    pub k_faults: usize,
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I) -> CmdOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CmdOutput {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CmdOutput {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    execute(cli.command)
}

pub fn execute(command: Command) -> CmdOutput {
    let result = match command {
        Command::Compile(a) => cmd_compile(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Accepts(a) => cmd_accepts(&a),
        Command::Bisim(a) => cmd_bisim(&a),
        Command::Intervene(a) => cmd_intervene(&a),
        Command::Cause(a) => cmd_cause(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    };
    match result {
        Ok(out) => out,
        Err(e) => CmdOutput {
            code: e.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", e.message),
        },
    }
}

fn ok(stdout: String) -> CmdOutput {
    CmdOutput {
        code: 0,
        stdout,
        stderr: String::new(),
    }
}

fn pretty(j: &Json) -> String {
    let mut s = serde_json::to_string_pretty(j).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn calc_kind(machine: &Machine, monolithic: bool) -> Result<CalcKind, CliError> {
    match (machine.kind(), monolithic) {
        (MachineKind::Lba, false) => Ok(CalcKind::Lba),
        (MachineKind::Lba, true) => Ok(CalcKind::Monolithic),
        (MachineKind::Tm, false) => Ok(CalcKind::Tm),
        (MachineKind::Ntm, false) => Ok(CalcKind::Ntm),
        (k, true) => Err(CliError::usage(format!("--monolithic needs an lba machine, not {k}"))),
    }
}

fn check_tape_len(machine: &Machine, tape_len: Option<usize>) -> Result<(), CliError> {
    if machine.kind() != MachineKind::Lba && tape_len.is_some() {
        return Err(CliError::usage(format!(
            "--tape-len only applies to lba machines, not {}",
            machine.kind()
        )));
    }
    Ok(())
}

/// Tape length for an LBA: the flag, else the input length (at least 1).
fn lba_len(machine: &Machine, tape_len: Option<usize>, input_len: usize) -> Option<usize> {
    (machine.kind() == MachineKind::Lba).then(|| tape_len.unwrap_or(input_len.max(1)))
}

fn variable_stats(model: &Model) -> String {
    let mut count: u128 = 0;
    let mut unbounded = Vec::new();
    for d in model.signature.decls() {
        match d.family.as_ref().map(|f| f.indices) {
            None => count += 1,
            Some(IndexRange::Bounded { lo, hi }) => count += (hi - lo + 1) as u128,
            Some(IndexRange::Unbounded) => unbounded.push(d.name.to_string()),
        }
    }
    let ranges: Vec<String> = model
        .signature
        .decls()
        .map(|d| {
            let extra = d
                .family
                .as_ref()
                .map(|f| {
                    f.index_ranges
                        .iter()
                        .map(|(i, r)| format!(", {}[{i}] ranges over {} values", d.name, r.size()))
                        .collect::<String>()
                })
                .unwrap_or_default();
            format!("{} ranges over {} values{extra}", d.name, d.range.size())
        })
        .collect();
    let plural = if count == 1 { "" } else { "s" };
    if unbounded.is_empty() {
        format!("{count} variable{plural}; {}", ranges.join("; "))
    } else {
        format!(
            "{count} single variable{plural} plus unbounded families {}; {}",
            unbounded.join(", "),
            ranges.join("; ")
        )
    }
}

pub fn cmd_compile(a: &CompileArgs) -> Result<CmdOutput, CliError> {
    let machine = load_machine(&a.machine)?;
    check_tape_len(&machine, a.tape_len)?;
    let kind = calc_kind(&machine, a.monolithic)?;
    if machine.kind() == MachineKind::Lba && a.tape_len.is_none() {
        return Err(CliError::usage("lba machines need --tape-len"));
    }
    let calc = compile(&machine, kind, a.tape_len)?;
    let text = model_to_string(&calc.model);
    let stats = format!("compiled {kind} calculator: {}\n", variable_stats(&calc.model));
    match &a.output {
        Some(path) => {
            write_text(path, &text)?;
            Ok(ok(stats))
        }
        None => Ok(CmdOutput {
            code: 0,
            stdout: text,
            stderr: stats,
        }),
    }
}

/// Initial configuration of a loaded model: from `--input` (calculators),
/// `--init`, or else from the step-0 atoms of an intervention.
fn root_config(loaded: &LoadedModel, root: &RootArgs, step0: &[TimedAtom]) -> Result<Configuration, CliError> {
    if let Some(input) = &root.input {
        let calc = loaded
            .calculator
            .as_ref()
            .ok_or_else(|| CliError::usage("--input needs a compiled calculator model; use --init"))?;
        let word = calc.machine.parse_input(input)?;
        return Ok(initial_calc_config(calc, &word)?);
    }
    let pairs: Vec<(VarId, Value)> = match &root.init {
        Some(init) => parse_assignments(init)?,
        None if !step0.is_empty() => step0
            .iter()
            .filter(|a| a.step == 0)
            .map(|a| (a.var.clone(), a.value.clone()))
            .collect(),
        None => {
            return Err(CliError::usage(
                "an initial configuration is needed: pass --init or --input",
            ))
        }
    };
    Ok(Configuration::new(&loaded.model.signature, pairs)?)
}

fn tree_output(tree: &crate::tsem::ComputationTree, cap: usize) -> CmdOutput {
    let stdout = pretty(&tree_to_json(tree));
    if tree.truncated {
        CmdOutput {
            code: 3,
            stdout,
            stderr: format!("error: node budget of {cap} exceeded; tree truncated\n"),
        }
    } else {
        ok(stdout)
    }
}

pub fn cmd_run(a: &RunArgs) -> Result<CmdOutput, CliError> {
    let cap = node_cap();
    if let Some(path) = &a.model {
        if a.tape_len.is_some() {
            return Err(CliError::usage("--tape-len applies to --machine runs"));
        }
        let loaded = load_model(path)?;
        let v0 = root_config(&loaded, &a.root, &[])?;
        let tree = expand_tree_partial(&loaded.model, &v0, a.depth, cap)?;
        return Ok(tree_output(&tree, cap));
    }
    let machine = load_machine(a.machine.as_ref().expect("clap requires a source"))?;
    check_tape_len(&machine, a.tape_len)?;
    if a.root.init.is_some() {
        return Err(CliError::usage("--init applies to --model runs; use --input"));
    }
    let word = machine.parse_input(a.root.input.as_deref().unwrap_or(""))?;
    let root = initial_machine_config(&machine, &word, lba_len(&machine, a.tape_len, word.len()))?;
    let tree = expand_run_tree(&machine, &root, a.depth, cap)?;
    let stdout = pretty(&run_tree_to_json(&tree));
    if tree.truncated {
        return Ok(CmdOutput {
            code: 3,
            stdout,
            stderr: format!("error: node budget of {cap} exceeded; tree truncated\n"),
        });
    }
    Ok(ok(stdout))
}

/// The machine and calculator named by `--machine` / `--model`.
fn machine_and_calc(
    machine: &Option<PathBuf>,
    model: &Option<PathBuf>,
    tape_len: Option<usize>,
    monolithic: bool,
    input: &str,
) -> Result<(Machine, CalculatorModel), CliError> {
    let loaded = model.as_ref().map(|p| load_model(p)).transpose()?;
    let from_model = match loaded {
        Some(l) => Some(
            l.calculator
                .ok_or_else(|| CliError::new(false, true, "the model was not compiled from a machine".into()))?,
        ),
        None => None,
    };
    let machine = match (machine, &from_model) {
        (Some(p), _) => load_machine(p)?,
        (None, Some(c)) => (*c.machine).clone(),
        (None, None) => unreachable!("clap requires a source"),
    };
    check_tape_len(&machine, tape_len)?;
    let calc = match from_model {
        Some(c) => {
            if tape_len.is_some_and(|n| Some(n) != c.n) || (monolithic && c.kind != CalcKind::Monolithic) {
                return Err(CliError::usage("--tape-len/--monolithic disagree with the model"));
            }
            c
        }
        None => {
            let word = machine.parse_input(input)?;
            compile(
                &machine,
                calc_kind(&machine, monolithic)?,
                lba_len(&machine, tape_len, word.len()),
            )?
        }
    };
    Ok((machine, calc))
}

pub fn cmd_accepts(a: &AcceptsArgs) -> Result<CmdOutput, CliError> {
    let cap = node_cap();
    let (machine, calc) = machine_and_calc(&a.machine, &a.model, a.tape_len, a.monolithic, &a.input)?;
    let word = machine.parse_input(&a.input)?;
    let direct = match a.via {
        Via::Direct | Via::Both => Some(run_machine(&machine, &word, calc.n, a.budget, cap)?.verdict),
        Via::Tsem => None,
    };
    let tsem = match a.via {
        Via::Tsem | Via::Both => Some(calc_accepts(&calc, &word, a.budget, cap)?),
        Via::Direct => None,
    };
    let mut out = String::new();
    if let Some(v) = direct {
        out.push_str(&format!("direct: {v}\n"));
    }
    if let Some(v) = tsem {
        out.push_str(&format!("tsem: {v}\n"));
    }
    if let (Some(d), Some(t)) = (direct, tsem) {
        out.push_str(if d == t { "agree\n" } else { "disagree\n" });
    }
    Ok(ok(out))
}

pub fn cmd_bisim(a: &BisimArgs) -> Result<CmdOutput, CliError> {
    if !(0.0..=1.0).contains(&a.reverify) {
        return Err(CliError::usage("--reverify must lie in [0, 1]"));
    }
    let (machine, calc) = machine_and_calc(&a.machine, &a.model, a.tape_len, a.monolithic, &a.input)?;
    let word = machine.parse_input(&a.input)?;
    let opts = EquivOptions {
        reverify_fraction: a.reverify,
        seed: a.seed,
        node_cap: node_cap(),
    };
    let report = check_equivalence(&machine, &calc, &word, a.depth, &opts)?;
    Ok(ok(pretty(&serde_json::to_value(&report).expect("reports serialize"))))
}

pub fn cmd_intervene(a: &InterveneArgs) -> Result<CmdOutput, CliError> {
    let cap = node_cap();
    let loaded = load_model(&a.model)?;
    let model = &loaded.model;
    if let Some(text) = &a.do_ {
        let atoms = parse_atoms(text)?;
        let spec = InterventionSpec::new(atoms.clone())?;
        let depth = a.depth.unwrap_or_else(|| 10.max(spec.max_step().unwrap_or(0) + 1));
        let v0 = root_config(&loaded, &a.root, &atoms)?;
        let tree = apply_intervention(model, &v0, &spec, depth, cap)?;
        return Ok(tree_output(&tree, cap));
    }
    let atoms = parse_structure_atoms(a.do_structure.as_deref().expect("clap requires an intervention"))?;
    let last = atoms.iter().map(|x| x.step).max().unwrap_or(0);
    let spec = StructureInterventionSpec::new(atoms)?;
    let depth = a.depth.unwrap_or_else(|| 10.max(last + 1));
    let v0 = root_config(&loaded, &a.root, &[])?;
    let tree = apply_structure_intervention(model, &v0, &spec, depth, cap)?;
    Ok(tree_output(&tree, cap))
}

fn atoms_json(atoms: &[TimedAtom]) -> Json {
    json!(atoms.iter().map(ToString::to_string).collect::<Vec<_>>())
}

pub fn verdict_json(v: &CauseVerdict) -> Json {
    let witness = match &v.witness {
        None => Json::Null,
        Some(CauseWitness::Prevention(p)) => json!({"prevention": atoms_json(p)}),
        Some(CauseWitness::SmallerCandidate { subset, prevention }) => json!({
            "subset": atoms_json(subset),
            "prevention": atoms_json(prevention),
        }),
    };
    json!({
        "is_cause": v.is_cause,
        "failing_condition": v.failing_condition.map(|c| c as u8),
        "witness": witness,
    })
}

/// `accept@T` as a single atom: possible on a TM calculator with exactly
/// one final state.
fn outcome_atoms(outcome: OutcomeSpec, loaded: &LoadedModel) -> Result<Vec<TimedAtom>, CliError> {
    match outcome {
        OutcomeSpec::Atoms(a) => Ok(a),
        OutcomeSpec::Accept { step } => {
            let calc = loaded
                .calculator
                .as_ref()
                .filter(|c| c.kind == CalcKind::Tm && c.machine.finals().len() == 1)
                .ok_or_else(|| {
                    CliError::usage("accept@T needs a TM calculator with one final state; give explicit atoms")
                })?;
            let q = calc.machine.finals().iter().next().expect("one final state").clone();
            Ok(vec![TimedAtom::new(CalculatorModel::state_var(), step, Value::Atom(q))])
        }
    }
}

pub fn cmd_cause(a: &CauseArgs) -> Result<CmdOutput, CliError> {
    let loaded = load_model(&a.model)?;
    let candidate = parse_atoms(&a.candidate)?;
    let outcome = outcome_atoms(parse_outcome(&a.outcome)?, &loaded)?;
    let v0 = root_config(&loaded, &a.root, &[])?;
    let opts = CauseOptions {
        same_branch: !a.any_branch,
        node_cap: node_cap(),
        ..CauseOptions::default()
    };
    let query = CauseQuery {
        candidate: candidate.clone(),
        outcome: outcome.clone(),
    };
    let verdict = is_cause(&loaded.model, &v0, &query, &opts)?;
    let mut j = verdict_json(&verdict);
    j["candidate"] = json!(format_atoms(&candidate));
    j["outcome"] = json!(format_atoms(&outcome));
    Ok(ok(pretty(&j)))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<CmdOutput, CliError> {
    let loaded = load_model(&a.model)?;
    let v0 = root_config(&loaded, &a.root, &[])?;
    let opts = SweepOptions {
        steps: parse_steps(&a.steps)?,
        patterns: parse_var_patterns(&a.vars)?,
        outcome: parse_outcome(&a.outcome)?,
        k_faults: a.k_faults,
        node_cap: node_cap(),
    };
    if !(1..=2).contains(&a.k_faults) {
        return Err(CliError::usage(format!(
            "--k-faults must be 1 or 2, got {}",
            a.k_faults
        )));
    }
    let report = sweep(&loaded.model, loaded.calculator.as_ref(), &v0, &opts)?;
    let stdout = pretty(&report.to_json());
    if report.truncated {
        return Ok(CmdOutput {
            code: 3,
            stdout,
            stderr: format!(
                "error: node budget of {} exceeded; {} rows reported before truncation\n",
                opts.node_cap,
                report.rows.len()
            ),
        });
    }
    Ok(ok(stdout))
}

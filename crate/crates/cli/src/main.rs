//! `efsm` — validate, inspect, simulate and generate tests for EFSM models.
//!
//! Exit codes: 0 success; 1 input, validation or syntax error; 2 infeasible
//! path (simulate); 3 coverage not achieved within bounds (generate with
//! --strict).

use clap::{Parser, Subcommand, ValueEnum};
use efsm_core::{
    coverage_of, generate, load_document, parse, render_tree, validate_document, CompiledEfsm,
    CoverageCriterion, GenerationOptions, InputMap, Severity, SimError, StatementKind, TraceStep,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INPUT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNCOVERED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "efsm",
    version,
    about = "Executable EFSM models: validation, simulation and test generation"
)]
struct Cli {
    /// Emit machine-readable JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress headers and success chatter.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model description file and print diagnostics.
    Validate { model: PathBuf },
    /// Print states, transitions, the variable table and def/use sets.
    Info { model: PathBuf },
    /// Parse a single expression and print its tree.
    Parse {
        /// Syntactic category of the expression.
        #[arg(long, value_enum)]
        kind: KindArg,
        text: String,
    },
    /// Replay a transition path with concrete input data.
    Simulate {
        model: PathBuf,
        /// Comma-separated transition names, e.g. t1,t2,t3.
        #[arg(long, value_delimiter = ',', required = true)]
        path: Vec<String>,
        /// Input assignments per 1-based step, e.g. 2:qos=2 3:qos=1.
        #[arg(long = "inputs", value_name = "STEP:VAR=VALUE", num_args = 0..)]
        inputs: Vec<String>,
    },
    /// Generate a coverage-directed test suite.
    Generate {
        model: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        /// Maximum path length explored by the search.
        #[arg(long, default_value_t = 10)]
        max_depth: usize,
        /// Write the suite to this file; without it the suite goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 3 when coverage is not achieved within bounds.
        #[arg(long)]
        strict: bool,
        /// Safety cap on the number of search nodes.
        #[arg(long, default_value_t = 100_000)]
        node_limit: usize,
        /// Drop search nodes whose configuration was already visited.
        #[arg(long)]
        prune_repeats: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    InputEvent,
    OutputEvent,
    Guard,
    Action,
}

impl From<KindArg> for StatementKind {
    fn from(kind: KindArg) -> StatementKind {
        match kind {
            KindArg::InputEvent => StatementKind::InputEvent,
            KindArg::OutputEvent => StatementKind::OutputEvent,
            KindArg::Guard => StatementKind::Guard,
            KindArg::Action => StatementKind::ActionList,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CriterionArg {
    AllStates,
    AllTransitions,
}

impl From<CriterionArg> for CoverageCriterion {
    fn from(criterion: CriterionArg) -> CoverageCriterion {
        match criterion {
            CriterionArg::AllStates => CoverageCriterion::AllStates,
            CriterionArg::AllTransitions => CoverageCriterion::AllTransitions,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INPUT_ERROR,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    // clap's own exit code for usage errors is 2, which this tool reserves
    // for infeasible paths; remap usage errors to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            use clap::error::ErrorKind;
            let code = match error.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT_ERROR,
            };
            let _ = error.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Validate { model } => run_validate(cli, model),
        Command::Info { model } => run_info(cli, model),
        Command::Parse { kind, text } => run_parse(cli, *kind, text),
        Command::Simulate {
            model,
            path,
            inputs,
        } => run_simulate(cli, model, path, inputs),
        Command::Generate {
            model,
            criterion,
            max_depth,
            out,
            strict,
            node_limit,
            prune_repeats,
        } => run_generate(
            cli,
            model,
            (*criterion).into(),
            *max_depth,
            out.as_deref(),
            *strict,
            *node_limit,
            *prune_repeats,
        ),
    }
}

fn read_model(path: &Path) -> Result<efsm_core::ModelDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    load_document(&text).map_err(|e| Failure::input(e.to_string()))
}

fn compile_model(path: &Path) -> Result<CompiledEfsm, Failure> {
    let doc = read_model(path)?;
    CompiledEfsm::compile(&doc).map_err(|e| Failure::input(e.to_string()))
}

fn run_validate(cli: &Cli, model: &Path) -> Result<u8, Failure> {
    let doc = read_model(model)?;
    let diagnostics = validate_document(&doc);
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&diagnostics).expect("serializes")
        );
    } else if diagnostics.is_empty() {
        if !cli.quiet {
            println!("OK");
        }
    } else {
        for diagnostic in &diagnostics {
            println!("{diagnostic}");
        }
    }
    let failed = diagnostics.iter().any(|d| d.severity == Severity::Error);
    Ok(if failed { EXIT_INPUT_ERROR } else { 0 })
}

fn run_info(cli: &Cli, model: &Path) -> Result<u8, Failure> {
    let efsm = compile_model(model)?;
    let info = efsm.model_info();
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&info).expect("serializes")
        );
        return Ok(0);
    }
    println!("states ({}): {}", info.state_count, info.states.join(" "));
    println!("transitions ({}):", info.transition_count);
    for t in &info.transitions {
        println!("  {}: {} -> {}", t.name, t.head, t.tail);
    }
    println!("variables ({}):", info.variables.len());
    for v in &info.variables {
        match v.domain {
            Some(d) => println!(
                "  {}: {}, initial {}, domain [{}, {}]",
                v.name, v.kind, v.initial, d.low, d.high
            ),
            None => println!("  {}: {}, initial {}", v.name, v.kind, v.initial),
        }
    }
    println!("def/use:");
    for du in &info.def_use {
        println!(
            "  {}: defs {{{}}} c-uses {{{}}} p-uses {{{}}}",
            du.transition,
            du.defs.join(", "),
            du.c_uses.join(", "),
            du.p_uses.join(", ")
        );
    }
    Ok(0)
}

fn run_parse(cli: &Cli, kind: KindArg, text: &str) -> Result<u8, Failure> {
    let tree = parse(kind.into(), text).map_err(|e| Failure::input(e.to_string()))?;
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&tree).expect("serializes")
        );
    } else {
        println!("{}", render_tree(&tree));
    }
    Ok(0)
}

/// Parses `STEP:VAR=VALUE` assignments (1-based steps) into one input map
/// per path step.
fn parse_inputs(specs: &[String], path_len: usize) -> Result<Vec<InputMap>, Failure> {
    let mut maps = vec![InputMap::new(); path_len];
    for spec in specs {
        let (step_text, assignment) = spec
            .split_once(':')
            .ok_or_else(|| Failure::input(format!("--inputs `{spec}`: expected STEP:VAR=VALUE")))?;
        let step: usize = step_text
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("--inputs `{spec}`: step must be a number")))?;
        if step == 0 || step > path_len {
            return Err(Failure::input(format!(
                "--inputs `{spec}`: step {step} is outside 1..={path_len}"
            )));
        }
        let (variable, value_text) = assignment
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("--inputs `{spec}`: expected STEP:VAR=VALUE")))?;
        let value: i64 = value_text
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("--inputs `{spec}`: value must be an integer")))?;
        if maps[step - 1]
            .insert(variable.trim().to_string(), value)
            .is_some()
        {
            return Err(Failure::input(format!(
                "--inputs `{spec}`: step {step} assigns `{}` twice",
                variable.trim()
            )));
        }
    }
    Ok(maps)
}

/// Formats a simulation error with 1-based step numbers for the terminal.
fn describe_sim_error(error: &SimError) -> (u8, String) {
    match error {
        SimError::NonAdjacent { step, transition, expected, actual } => (
            EXIT_INFEASIBLE,
            format!(
                "step {}: transition `{transition}` is not adjacent: it fires from `{expected}` but the machine is in `{actual}`",
                step + 1
            ),
        ),
        SimError::GuardViolated { step: Some(step), transition } => (
            EXIT_INFEASIBLE,
            format!("step {}: guard of `{transition}` is violated by the given data", step + 1),
        ),
        SimError::Eval { step: Some(step), .. } => {
            (EXIT_INFEASIBLE, format!("step {}: {error}", step + 1))
        }
        other => (EXIT_INPUT_ERROR, other.to_string()),
    }
}

fn run_simulate(
    cli: &Cli,
    model: &Path,
    path: &[String],
    inputs: &[String],
) -> Result<u8, Failure> {
    let efsm = compile_model(model)?;
    let data = parse_inputs(inputs, path.len())?;
    let steps = efsm.simulate_path(path, &data).map_err(|e| {
        let (code, message) = describe_sim_error(&e);
        Failure { code, message }
    })?;
    if cli.json {
        let trace = TraceStep::zip(path, steps);
        println!(
            "{}",
            serde_json::to_string_pretty(&trace).expect("serializes")
        );
        return Ok(0);
    }
    let variables: Vec<String> = efsm
        .initial_configuration()
        .values
        .keys()
        .cloned()
        .collect();
    let header = [
        "Test Path".to_string(),
        format!("Tail State Configuration (state, {})", variables.join(", ")),
        "Output".to_string(),
    ];
    let mut rows = Vec::new();
    for (index, step) in steps.iter().enumerate() {
        rows.push([
            path[..=index].join(", "),
            step.configuration.to_string(),
            step.output.clone().unwrap_or_else(|| "-".to_string()),
        ]);
    }
    print_table(cli.quiet, &header, &rows);
    Ok(0)
}

fn print_table(quiet: bool, header: &[String; 3], rows: &[[String; 3]]) {
    let mut widths = [0usize; 3];
    let measured: Vec<&[String; 3]> = if quiet {
        rows.iter().collect()
    } else {
        std::iter::once(header).chain(rows.iter()).collect()
    };
    for row in &measured {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    for row in measured {
        println!(
            "{:<w0$} | {:<w1$} | {}",
            row[0],
            row[1],
            row[2],
            w0 = widths[0],
            w1 = widths[1]
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn run_generate(
    cli: &Cli,
    model: &Path,
    criterion: CoverageCriterion,
    max_depth: usize,
    out: Option<&Path>,
    strict: bool,
    node_limit: usize,
    prune_repeats: bool,
) -> Result<u8, Failure> {
    if max_depth == 0 {
        return Err(Failure::input("--max-depth must be at least 1"));
    }
    let efsm = compile_model(model)?;
    let options = GenerationOptions::new(criterion)
        .with_max_depth(max_depth)
        .with_node_limit(node_limit)
        .with_prune_repeated_configurations(prune_repeats);
    let suite = generate(&efsm, &options).map_err(|e| Failure::input(e.to_string()))?;
    // Belt and braces: report the coverage that replay confirms, not what
    // the search believes.
    let report = coverage_of(&efsm, &suite, criterion)
        .map_err(|e| Failure::input(format!("generated suite does not replay: {e}")))?;

    match out {
        Some(path) => {
            std::fs::write(path, suite.to_json())
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
            if cli.json {
                let summary = serde_json::json!({
                    "criterion": suite.criterion,
                    "covered": report.covered.len(),
                    "total": report.covered.len() + report.uncovered.len(),
                    "fraction": report.fraction,
                    "cases": suite.cases.len(),
                    "exhausted": suite.exhausted,
                    "diagnostic": suite.diagnostic,
                    "out": path.display().to_string(),
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&summary).expect("serializes")
                );
            } else if !cli.quiet {
                println!(
                    "{} coverage: {}/{}; cases: {}; exhausted: {}",
                    suite.criterion,
                    report.covered.len(),
                    report.covered.len() + report.uncovered.len(),
                    suite.cases.len(),
                    suite.exhausted
                );
                if let Some(diagnostic) = &suite.diagnostic {
                    println!("note: {diagnostic}");
                }
                if !report.uncovered.is_empty() {
                    println!("uncovered: {}", report.uncovered.join(", "));
                }
                println!("suite written to {}", path.display());
            }
        }
        None => {
            println!("{}", suite.to_json().trim_end());
        }
    }

    if strict && !report.uncovered.is_empty() {
        return Ok(EXIT_UNCOVERED);
    }
    Ok(0)
}

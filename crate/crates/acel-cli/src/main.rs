//! acel: run ACEL queries over newline-delimited JSON event streams.
//!
//! Three subcommands: `run` executes one query under the interpreter, the
//! compiled automaton, or both in differential mode; `corpus` replays a
//! directory of (query, stream, expected) fixtures; `validate` checks a
//! stream against a schema.
//!
//! Exit codes: 0 success (including an equal diff), 1 usage, parse, or
//! evaluation error, 2 stream validation failure, 3 differential mismatch,
//! 4 feature unsupported by the selected engine.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use acel_core::compile::{compile, Compiled};
use acel_core::interp::{evaluate, ResultSet};
use acel_core::io::{complex_from_line, complex_to_line, infer_schema, parse_schema, parse_stream};
use acel_core::lang::{desugar, parse_query};
use acel_core::machine::acea_enumerate;
use acel_core::model::validate_stream;
use acel_core::{CompileError, Schema, Stream};

#[derive(Parser)]
#[command(name = "acel", about = "ACEL complex-event query engine", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a query over a stream and print one complex event per line.
    Run {
        /// Query file (ACEL text).
        #[arg(long)]
        query: PathBuf,
        /// Stream file (one JSON event object per line).
        #[arg(long)]
        stream: PathBuf,
        /// Schema file; inferred from the stream when absent.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Engine::Oracle)]
        engine: Engine,
        /// Write the compiled automaton's debug dump to this path.
        #[arg(long)]
        emit_automaton: Option<PathBuf>,
        /// Output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every query fixture in a directory against its expected results.
    Corpus { dir: PathBuf },
    /// Validate a stream against a schema.
    Validate {
        #[arg(long)]
        stream: PathBuf,
        #[arg(long)]
        schema: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Reference interpreter.
    Oracle,
    /// Compiled register automaton.
    Acea,
    /// Both engines, verified equal.
    Diff,
}

/// Exit status paired with an error line for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { query, stream, schema, engine, emit_automaton, out } => {
            run(&query, &stream, schema.as_deref(), engine, emit_automaton.as_deref(), out.as_deref())
        }
        Cmd::Corpus { dir } => corpus(&dir),
        Cmd::Validate { stream, schema } => validate(&stream, &schema),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("acel: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))
}

fn load_inputs(
    query_path: &Path,
    stream_path: &Path,
    schema_path: Option<&Path>,
) -> Result<(acel_core::lang::Formula, Stream, Schema), Failure> {
    let query_text = read(query_path)?;
    let formula = parse_query(&query_text).map_err(|e| Failure::new(1, e.to_string()))?;
    let formula = desugar(&formula);
    let stream_text = read(stream_path)?;
    let stream = parse_stream(&stream_text).map_err(|e| Failure::new(2, e.to_string()))?;
    let schema = match schema_path {
        Some(p) => parse_schema(&read(p)?).map_err(|e| Failure::new(1, e))?,
        None => infer_schema(&stream),
    };
    validate_stream(&stream, &schema).map_err(|e| Failure::new(2, e.to_string()))?;
    Ok((formula, stream, schema))
}

fn try_compile(
    formula: &acel_core::lang::Formula,
    schema: &Schema,
) -> Result<Compiled, CompileError> {
    let compiled = compile(formula, schema)?;
    for w in &compiled.warnings {
        eprintln!("acel: warning: {w}");
    }
    Ok(compiled)
}

fn write_results(results: &ResultSet, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = String::new();
    for c in results {
        let line = complex_to_line(c).map_err(|e| Failure::new(1, e))?;
        text.push_str(&line);
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(
    query: &Path,
    stream: &Path,
    schema: Option<&Path>,
    engine: Engine,
    emit_automaton: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (formula, stream, schema) = load_inputs(query, stream, schema)?;

    let mut automaton = None;
    if engine != Engine::Oracle || emit_automaton.is_some() {
        match try_compile(&formula, &schema) {
            Ok(c) => {
                if let Some(path) = emit_automaton {
                    fs::write(path, c.automaton.dump()).map_err(|e| {
                        Failure::new(1, format!("cannot write {}: {e}", path.display()))
                    })?;
                }
                automaton = Some(c.automaton);
            }
            Err(e) => match engine {
                // diff degrades to the interpreter alone; anything that
                // required the automaton is an unsupported-feature failure.
                Engine::Diff => eprintln!("acel: running interpreter only: {e}"),
                _ => return Err(Failure::new(4, e.to_string())),
            },
        }
    }

    let results = match (engine, &automaton) {
        (Engine::Acea, Some(a)) => {
            acea_enumerate(a, &stream).map_err(|e| Failure::new(1, e.to_string()))?
        }
        _ => evaluate(&formula, &stream).map_err(|e| Failure::new(1, e.to_string()))?,
    };

    if engine == Engine::Diff {
        if let Some(a) = &automaton {
            let compiled_results =
                acea_enumerate(a, &stream).map_err(|e| Failure::new(1, e.to_string()))?;
            if compiled_results != results {
                let divergent = results
                    .symmetric_difference(&compiled_results)
                    .next()
                    .expect("sets differ");
                let line = complex_to_line(divergent).unwrap_or_else(|e| e);
                return Err(Failure::new(
                    3,
                    format!("engines disagree; first divergent complex event: {line}"),
                ));
            }
        }
    }

    write_results(&results, out)
}

fn validate(stream: &Path, schema: &Path) -> Result<(), Failure> {
    let stream_text = read(stream)?;
    let parsed = parse_stream(&stream_text).map_err(|e| Failure::new(2, e.to_string()))?;
    let schema = parse_schema(&read(schema)?).map_err(|e| Failure::new(1, e))?;
    validate_stream(&parsed, &schema).map_err(|e| Failure::new(2, e.to_string()))?;
    println!("ok: {} events", parsed.len());
    Ok(())
}

fn corpus(dir: &Path) -> Result<(), Failure> {
    let mut queries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "query"))
        .collect();
    queries.sort();

    let mut failures = 0usize;
    for query in &queries {
        let name = query.file_stem().unwrap_or_default().to_string_lossy().to_string();
        match run_fixture(query) {
            Ok(()) => println!("PASS {name}"),
            Err(reason) => {
                failures += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} fixtures, {} failed", queries.len(), failures);
    if failures > 0 {
        Err(Failure::new(1, format!("{failures} corpus fixtures failed")))
    } else {
        Ok(())
    }
}

/// Runs one corpus fixture: the interpreter must reproduce the expected
/// file exactly, and whenever the query compiles, the automaton must agree
/// with the interpreter.
fn run_fixture(query: &Path) -> Result<(), String> {
    let stream_path = query.with_extension("stream.jsonl");
    let expected_path = query.with_extension("expected.jsonl");
    let schema_path = query.with_extension("schema.json");
    let schema_arg = schema_path.exists().then_some(schema_path.as_path());

    let (formula, stream, schema) =
        load_inputs(query, &stream_path, schema_arg).map_err(|f| f.message)?;
    let got = evaluate(&formula, &stream).map_err(|e| e.to_string())?;

    let expected_text =
        fs::read_to_string(&expected_path).map_err(|e| format!("expected file: {e}"))?;
    let mut expected = ResultSet::new();
    for line in expected_text.lines().filter(|l| !l.trim().is_empty()) {
        expected.insert(complex_from_line(line)?);
    }
    if got != expected {
        return Err(format!(
            "interpreter produced {} results, expected {}",
            got.len(),
            expected.len()
        ));
    }

    match compile(&formula, &schema) {
        Ok(c) => {
            let compiled = acea_enumerate(&c.automaton, &stream).map_err(|e| e.to_string())?;
            if compiled != got {
                return Err("compiled automaton disagrees with interpreter".into());
            }
        }
        Err(CompileError::UnsupportedMultisetPredicate(_)) => {}
        Err(e) => return Err(e.to_string()),
    }
    Ok(())
}

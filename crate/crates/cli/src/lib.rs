//! Command-line front end: automaton files, sweeps and constructions.

pub mod format;
pub mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use afa_core::automata::{AutomatonError, ClassicalAutomaton, ClassicalKind};
use afa_core::constructions::{
    afa_to_nqfa, compile_blind_counters, exclusive_pfa_to_nafa, shift_extreme, shift_interior,
    tensor, zoo, ConstructionError, CounterMachineSpec, Side, ZooMachine,
};
use afa_core::exactnum::{parse_rational, Rational};
use afa_core::recognition::{sweep, LanguageOracle, Mode, RecognitionError, SweepReport};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use format::{
    parse_machine, write_classical, write_machine, write_quantum, LoadError, Machine,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "afa",
    version,
    about = "Affine, probabilistic and quantum finite automata"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cutpoint,
    Exclusive,
    Equality,
    Nondet,
    Isolation,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Cutpoint => Mode::Cutpoint,
            ModeArg::Exclusive => Mode::Exclusive,
            ModeArg::Equality => Mode::Equality,
            ModeArg::Nondet => Mode::Nondeterministic,
            ModeArg::Isolation => Mode::Isolation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructKind {
    ShiftInterior,
    ShiftZero,
    ShiftOne,
    PfaToNafa,
    AfaToNqfa,
    Tensor,
    Counters,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Check that a file parses and its matrices satisfy the machine kind.
    Validate { file: PathBuf },
    /// Print the final state and acceptance value of one input.
    Run {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        /// Rescale to l1-norm 1 after every step (afa only).
        #[arg(long)]
        normalized: bool,
    },
    /// Check a recognition claim on every string up to a length.
    Sweep {
        file: PathBuf,
        #[arg(long, value_parser = rational_arg, default_value = "0", allow_hyphen_values = true)]
        cutpoint: Rational,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// eq, lapins, abs_eq, or the path of a dfa file.
        #[arg(long)]
        oracle: String,
        #[arg(long)]
        maxlen: usize,
        /// Write the full report here and print only the summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a new machine from existing ones.
    Construct {
        #[arg(value_enum)]
        kind: ConstructKind,
        /// Input machine file; tensor takes two.
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_parser = rational_arg)]
        lambda1: Option<Rational>,
        #[arg(long, value_parser = rational_arg)]
        lambda2: Option<Rational>,
        #[arg(long, value_parser = rational_arg)]
        lambda: Option<Rational>,
        /// Counter scale for the counters construction.
        #[arg(long, value_parser = rational_arg)]
        x: Option<Rational>,
        /// Increment table for the counters construction.
        #[arg(long)]
        increments: Option<PathBuf>,
        /// Accepting product states for tensor, comma separated.
        #[arg(long, value_delimiter = ',')]
        accepting: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one of the built-in machines.
    Zoo {
        /// m1_eq, m2_eq, lapins or abs_eq.
        name: String,
        #[arg(long, value_parser = rational_arg)]
        x: Option<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {error}", .path.display())]
    Load { path: PathBuf, error: LoadError },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Quantum(#[from] afa_core::quantum::QuantumError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Load { error, .. } if error.is_invariant_violation() => EXIT_FAILURE,
            _ => EXIT_USAGE,
        }
    }

    /// One line per problem, so kind violations list every column.
    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            CliError::Load {
                path,
                error: LoadError::Classical(AutomatonError::KindViolations { kind, violations }),
            } => {
                let mut lines = vec![format!(
                    "{}: {} violation(s) of the {kind} constraints",
                    path.display(),
                    violations.len()
                )];
                lines.extend(violations.iter().map(|v| format!("  {v}")));
                lines
            }
            _ => vec![self.to_string()],
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Machine, CliError> {
    parse_machine(&read(path)?).map_err(|error| CliError::Load {
        path: path.to_path_buf(),
        error,
    })
}

fn load_classical(path: &Path) -> Result<ClassicalAutomaton, CliError> {
    match load(path)? {
        Machine::Classical(m) => Ok(m),
        Machine::Quantum(_) => Err(CliError::Usage(format!(
            "{}: expected a classical machine, got qfa",
            path.display()
        ))),
    }
}

fn io_err(path: Option<&Path>) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(Some(path))),
        None => stdout.write_all(text.as_bytes()).map_err(io_err(None)),
    }
}

fn emit_machine(
    m: &Machine,
    header: &str,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    emit(&format!("{header}{}", write_machine(m)), out, stdout)?;
    if let Some(path) = out {
        writeln!(
            stdout,
            "wrote {}: {}, {} states",
            path.display(),
            m.kind_name(),
            m.states().len()
        )
        .map_err(io_err(None))?;
    }
    Ok(())
}

fn need<'a>(
    value: &'a Option<Rational>,
    flag: &str,
    kind: ConstructKind,
) -> Result<&'a Rational, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{kind:?} needs --{flag}")))
}

fn resolve_oracle(oracle: &str) -> Result<LanguageOracle, CliError> {
    if let Ok(o) = LanguageOracle::from_name(oracle) {
        return Ok(o);
    }
    let path = Path::new(oracle);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "oracle {oracle:?} is neither eq, lapins, abs_eq nor an existing dfa file"
        )));
    }
    let m = load_classical(path)?;
    if m.kind() != ClassicalKind::Dfa {
        return Err(CliError::Usage(format!(
            "oracle file {oracle} must be a dfa, got {}",
            m.kind()
        )));
    }
    Ok(LanguageOracle::Dfa(m))
}

type IncrementTable = BTreeMap<(usize, char), Vec<i64>>;

/// Reads an increment table: `state letter d1 d2 ...` per line.
fn parse_increments(
    text: &str,
    dfa: &ClassicalAutomaton,
) -> Result<(usize, IncrementTable), CliError> {
    let mut table = BTreeMap::new();
    let mut counters = None;
    for (index, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("increments line {}: {msg}", index + 1));
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(bad("expected: state letter increments...".into()));
        }
        let q = dfa
            .states()
            .iter()
            .position(|s| s == tokens[0])
            .ok_or_else(|| bad(format!("unknown state {:?}", tokens[0])))?;
        let mut chars = tokens[1].chars();
        let c = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(bad(format!("bad letter {:?}", tokens[1]))),
        };
        let deltas = tokens[2..]
            .iter()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| bad(format!("bad increment {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        counters.get_or_insert(deltas.len());
        if table.insert((q, c), deltas).is_some() {
            return Err(bad(format!("duplicate entry for ({}, {c})", tokens[0])));
        }
    }
    Ok((counters.unwrap_or(0), table))
}

fn cmd_validate(file: &Path, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let m = load(file)?;
    let alphabet: Vec<String> = match &m {
        Machine::Classical(c) => c.alphabet().iter().map(char::to_string).collect(),
        Machine::Quantum(q) => q.alphabet().iter().map(char::to_string).collect(),
    };
    writeln!(
        stdout,
        "ok: {}, {} states, alphabet {}",
        m.kind_name(),
        m.states().len(),
        alphabet.join(" ")
    )
    .map_err(io_err(None))?;
    Ok(EXIT_OK)
}

fn cmd_run(
    file: &Path,
    input: &str,
    normalized: bool,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let text = match load(file)? {
        Machine::Classical(m) => {
            let value = if normalized {
                m.accept_value_normalized(input)?
            } else {
                m.accept_value(input)?
            };
            format!("final\t{}\nvalue\t{value}\n", m.run(input)?)
        }
        Machine::Quantum(q) => {
            if normalized {
                return Err(CliError::Usage(
                    "--normalized applies to afa files only".into(),
                ));
            }
            let rho = q.run(input)?;
            let diag: Vec<String> = rho.diagonal().iter().map(|x| format!("{x:.9}")).collect();
            let value = afa_core::recognition::Value::Approx(q.accept_value(input)?);
            format!("diagonal\t({})\nvalue\t{value}\n", diag.join(", "))
        }
    };
    stdout.write_all(text.as_bytes()).map_err(io_err(None))?;
    Ok(EXIT_OK)
}

fn run_sweep(
    m: &Machine,
    cutpoint: &Rational,
    mode: Mode,
    oracle: &LanguageOracle,
    maxlen: usize,
) -> Result<SweepReport, CliError> {
    Ok(match m {
        Machine::Classical(c) => sweep(c, cutpoint, mode, oracle, maxlen)?,
        Machine::Quantum(q) => sweep(q, cutpoint, mode, oracle, maxlen)?,
    })
}

fn cmd_construct(
    kind: ConstructKind,
    inputs: &[PathBuf],
    params: &ConstructParams,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let expected = if kind == ConstructKind::Tensor { 2 } else { 1 };
    if inputs.len() != expected {
        return Err(CliError::Usage(format!(
            "{kind:?} takes {expected} --input file(s), got {}",
            inputs.len()
        )));
    }
    let mut header = String::new();
    let first = || load_classical(&inputs[0]);
    let machine = match kind {
        ConstructKind::ShiftInterior => Machine::Classical(shift_interior(
            &first()?,
            need(&params.lambda1, "lambda1", kind)?,
            need(&params.lambda2, "lambda2", kind)?,
        )?),
        ConstructKind::ShiftZero | ConstructKind::ShiftOne => {
            let side = if kind == ConstructKind::ShiftZero {
                Side::Zero
            } else {
                Side::One
            };
            Machine::Classical(shift_extreme(
                &first()?,
                side,
                need(&params.lambda, "lambda", kind)?,
            )?)
        }
        ConstructKind::PfaToNafa => Machine::Classical(exclusive_pfa_to_nafa(&first()?)?),
        ConstructKind::AfaToNqfa => {
            let conv = afa_to_nqfa(&first()?)?;
            for (symbol, scale) in &conv.scales {
                header.push_str(&format!("# scale {} {scale:?}\n", symbol.name()));
            }
            Machine::Quantum(conv.automaton)
        }
        ConstructKind::Tensor => {
            let product = tensor(&first()?, &load_classical(&inputs[1])?)?;
            let mut accepting = BTreeSet::new();
            for name in &params.accepting {
                let i = product
                    .states()
                    .iter()
                    .position(|s| s == name)
                    .ok_or_else(|| CliError::Usage(format!("no product state named {name:?}")))?;
                accepting.insert(i);
            }
            Machine::Classical(product.with_accepting(accepting)?)
        }
        ConstructKind::Counters => {
            let dfa = first()?;
            let path = params
                .increments
                .as_ref()
                .ok_or_else(|| CliError::Usage("counters needs --increments".into()))?;
            let (counters, increments) = parse_increments(&read(path)?, &dfa)?;
            let scale = need(&params.x, "x", kind)?.clone();
            Machine::Classical(compile_blind_counters(&CounterMachineSpec {
                dfa,
                counters,
                increments,
                scale,
            })?)
        }
    };
    emit_machine(&machine, &header, out, stdout)?;
    Ok(EXIT_OK)
}

struct ConstructParams {
    lambda1: Option<Rational>,
    lambda2: Option<Rational>,
    lambda: Option<Rational>,
    x: Option<Rational>,
    increments: Option<PathBuf>,
    accepting: Vec<String>,
}

/// Runs one parsed command, writing normal output to `stdout`, and
/// returns the process exit code.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file, stdout),
        Command::Run {
            file,
            input,
            normalized,
        } => cmd_run(&file, &input, normalized, stdout),
        Command::Sweep {
            file,
            cutpoint,
            mode,
            oracle,
            maxlen,
            out,
        } => {
            let machine = load(&file)?;
            let oracle = resolve_oracle(&oracle)?;
            let report = run_sweep(&machine, &cutpoint, mode.into(), &oracle, maxlen)?;
            match &out {
                Some(path) => {
                    emit(&report::sweep_tsv(&report), Some(path), stdout)?;
                    emit(&report::summary(&report), None, stdout)?;
                }
                None => emit(&report::sweep_tsv(&report), None, stdout)?,
            }
            Ok(if report.verified() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
        Command::Construct {
            kind,
            inputs,
            lambda1,
            lambda2,
            lambda,
            x,
            increments,
            accepting,
            out,
        } => {
            let params = ConstructParams {
                lambda1,
                lambda2,
                lambda,
                x,
                increments,
                accepting,
            };
            cmd_construct(kind, &inputs, &params, out.as_deref(), stdout)
        }
        Command::Zoo { name, x, out } => {
            let machine = zoo(ZooMachine::from_name(&name)?, x.as_ref())?;
            emit_machine(&Machine::Classical(machine), "", out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

//! Plain-text automaton files.
//!
//! ```text
//! # comments run to the end of the line
//! kind afa
//! states e1 e2
//! alphabet a b
//! initial e1
//! accepting e1
//! symbol a
//! 2 0
//! -1 1
//! symbol b
//! 1/2 0
//! 1/2 1
//! ```
//!
//! Row `k`, column `j` of a matrix is the weight from state `j` to state
//! `k`. The end-markers are written `symbol cent` and `symbol dollar` and
//! default to the identity. For `kind qfa` each symbol lists one or more
//! `element` blocks of decimal entries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use afa_core::automata::{AutomatonError, ClassicalAutomaton, ClassicalKind, Symbol};
use afa_core::exactnum::{parse_rational, Matrix};
use afa_core::quantum::{QuantumAutomaton, QuantumError, Superoperator, DEFAULT_TOLERANCE};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone)]
pub enum Machine {
    Classical(ClassicalAutomaton),
    Quantum(QuantumAutomaton),
}

impl Machine {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Machine::Classical(m) => m.kind().name(),
            Machine::Quantum(_) => "qfa",
        }
    }

    pub fn states(&self) -> &[String] {
        match self {
            Machine::Classical(m) => m.states(),
            Machine::Quantum(m) => m.states(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Structure(String),
    #[error("{0}")]
    Classical(AutomatonError),
    #[error("{0}")]
    Quantum(QuantumError),
    #[error("channels are not trace preserving: {}", .0.iter().map(|(s, d)| format!("symbol {s} deviates by {d:.3e}")).collect::<Vec<_>>().join("; "))]
    IncompleteChannels(Vec<(Symbol, f64)>),
}

impl LoadError {
    /// Well-formed files whose matrices break the kind's constraints.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            LoadError::Classical(AutomatonError::KindViolations { .. })
                | LoadError::IncompleteChannels(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Classical(ClassicalKind),
    Quantum,
}

type Rows = Vec<(usize, Vec<String>)>;

#[derive(Debug, Default)]
struct Sections {
    kind: Option<(usize, Kind)>,
    states: Option<Vec<String>>,
    alphabet: Option<Vec<char>>,
    initial: Option<(usize, String)>,
    accepting: Option<(usize, Vec<String>)>,
    symbols: Vec<(usize, Symbol, Vec<Rows>)>,
}

fn syntax<T>(line: usize, message: impl Into<String>) -> Result<T, LoadError> {
    Err(LoadError::Syntax {
        line,
        message: message.into(),
    })
}

fn parse_symbol(line: usize, name: &str) -> Result<Symbol, LoadError> {
    match Symbol::from_name(name) {
        Some(s) => Ok(s),
        None => syntax(
            line,
            format!("bad symbol name {name:?}; use one character, cent or dollar"),
        ),
    }
}

fn split_sections(text: &str) -> Result<Sections, LoadError> {
    let mut s = Sections::default();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let head = tokens.next().expect("non-empty line");
        let rest: Vec<String> = tokens.map(str::to_string).collect();
        let header_done = !s.symbols.is_empty();
        let once = |present: bool, what: &str| -> Result<(), LoadError> {
            if present {
                return syntax(line, format!("duplicate {what} line"));
            }
            if header_done {
                return syntax(line, format!("{what} line after the first symbol block"));
            }
            Ok(())
        };
        match head {
            "kind" => {
                once(s.kind.is_some(), "kind")?;
                let kind = match rest.as_slice() {
                    [k] if k == "dfa" => Kind::Classical(ClassicalKind::Dfa),
                    [k] if k == "pfa" => Kind::Classical(ClassicalKind::Pfa),
                    [k] if k == "afa" => Kind::Classical(ClassicalKind::Afa),
                    [k] if k == "qfa" => Kind::Quantum,
                    _ => return syntax(line, "kind must be one of dfa, pfa, afa, qfa"),
                };
                s.kind = Some((line, kind));
            }
            "states" => {
                once(s.states.is_some(), "states")?;
                s.states = Some(rest);
            }
            "alphabet" => {
                once(s.alphabet.is_some(), "alphabet")?;
                let mut letters = Vec::new();
                for t in &rest {
                    let mut chars = t.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => letters.push(c),
                        _ => {
                            return syntax(
                                line,
                                format!("alphabet symbol {t:?} is not one character"),
                            )
                        }
                    }
                }
                s.alphabet = Some(letters);
            }
            "initial" => {
                once(s.initial.is_some(), "initial")?;
                match rest.as_slice() {
                    [name] => s.initial = Some((line, name.clone())),
                    _ => return syntax(line, "initial takes exactly one state name"),
                }
            }
            "accepting" => {
                once(s.accepting.is_some(), "accepting")?;
                s.accepting = Some((line, rest));
            }
            "symbol" => {
                let symbol = match rest.as_slice() {
                    [name] => parse_symbol(line, name)?,
                    _ => return syntax(line, "symbol takes exactly one name"),
                };
                if s.symbols.iter().any(|(_, t, _)| *t == symbol) {
                    return syntax(line, format!("duplicate block for symbol {symbol}"));
                }
                s.symbols.push((line, symbol, vec![Vec::new()]));
            }
            "element" => {
                if !rest.is_empty() {
                    return syntax(line, "element takes no arguments");
                }
                match s.symbols.last_mut() {
                    Some((_, _, blocks)) => {
                        if blocks.len() == 1 && blocks[0].is_empty() {
                            continue;
                        }
                        blocks.push(Vec::new());
                    }
                    None => return syntax(line, "element outside a symbol block"),
                }
            }
            _ => match s.symbols.last_mut() {
                Some((_, _, blocks)) => {
                    let row = content.split_whitespace().map(str::to_string).collect();
                    blocks
                        .last_mut()
                        .expect("at least one block")
                        .push((line, row));
                }
                None => {
                    return syntax(
                        line,
                        format!("unexpected {head:?} before the first symbol block"),
                    )
                }
            },
        }
    }
    Ok(s)
}

fn state_index(states: &[String], line: usize, name: &str) -> Result<usize, LoadError> {
    match states.iter().position(|s| s == name) {
        Some(i) => Ok(i),
        None => syntax(line, format!("unknown state {name:?}")),
    }
}

fn rational_matrix(symbol: Symbol, rows: &[(usize, Vec<String>)]) -> Result<Matrix, LoadError> {
    let mut parsed = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let mut entries = Vec::with_capacity(row.len());
        for t in row {
            match parse_rational(t) {
                Ok(r) => entries.push(r),
                Err(e) => return syntax(*line, e.to_string()),
            }
        }
        parsed.push(entries);
    }
    Matrix::from_rows(parsed).map_err(|e| LoadError::Structure(format!("symbol {symbol}: {e}")))
}

fn float_matrix(symbol: Symbol, rows: &[(usize, Vec<String>)]) -> Result<DMatrix<f64>, LoadError> {
    let Some((_, first)) = rows.first() else {
        return Err(LoadError::Structure(format!(
            "symbol {symbol}: empty element"
        )));
    };
    let cols = first.len();
    let mut data = Vec::with_capacity(rows.len() * cols);
    for (line, row) in rows {
        if row.len() != cols {
            return syntax(
                *line,
                format!("row has {} entries, expected {cols}", row.len()),
            );
        }
        for t in row {
            match t.parse::<f64>() {
                Ok(x) if x.is_finite() => data.push(x),
                _ => return syntax(*line, format!("malformed number {t:?}")),
            }
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), cols, &data))
}

/// Parses an automaton file. Quantum channels must be trace preserving
/// within the default tolerance.
pub fn parse_machine(text: &str) -> Result<Machine, LoadError> {
    let s = split_sections(text)?;
    let missing = |what: &str| LoadError::Structure(format!("missing {what} line"));
    let (_, kind) = s.kind.ok_or_else(|| missing("kind"))?;
    let states = s.states.ok_or_else(|| missing("states"))?;
    let alphabet = s.alphabet.ok_or_else(|| missing("alphabet"))?;
    let (init_line, init_name) = s.initial.ok_or_else(|| missing("initial"))?;
    let (acc_line, acc_names) = s.accepting.ok_or_else(|| missing("accepting"))?;
    let initial = state_index(&states, init_line, &init_name)?;
    let mut accepting = BTreeSet::new();
    for name in &acc_names {
        if !accepting.insert(state_index(&states, acc_line, name)?) {
            return syntax(acc_line, format!("state {name:?} listed twice"));
        }
    }
    match kind {
        Kind::Classical(kind) => {
            let mut transitions = BTreeMap::new();
            for (line, symbol, blocks) in &s.symbols {
                if blocks.len() != 1 {
                    return syntax(*line, "element blocks are only allowed in qfa files");
                }
                transitions.insert(*symbol, rational_matrix(*symbol, &blocks[0])?);
            }
            ClassicalAutomaton::new(kind, states, alphabet, transitions, initial, accepting)
                .map(Machine::Classical)
                .map_err(LoadError::Classical)
        }
        Kind::Quantum => {
            let mut channels = BTreeMap::new();
            for (_, symbol, blocks) in &s.symbols {
                let elements = blocks
                    .iter()
                    .map(|rows| float_matrix(*symbol, rows))
                    .collect::<Result<Vec<_>, _>>()?;
                let channel = Superoperator::new(elements).map_err(LoadError::Quantum)?;
                channels.insert(*symbol, channel);
            }
            let qfa = QuantumAutomaton::new(states, alphabet, channels, initial, accepting)
                .map_err(LoadError::Quantum)?;
            let bad: Vec<(Symbol, f64)> = qfa
                .validate(DEFAULT_TOLERANCE)
                .into_iter()
                .filter(|(_, r)| !r.is_valid())
                .map(|(s, r)| (s, r.deviation))
                .collect();
            if bad.is_empty() {
                Ok(Machine::Quantum(qfa))
            } else {
                Err(LoadError::IncompleteChannels(bad))
            }
        }
    }
}

fn write_header(
    out: &mut String,
    kind: &str,
    states: &[String],
    alphabet: &[char],
    initial: usize,
    accepting: &BTreeSet<usize>,
) {
    let letters: Vec<String> = alphabet.iter().map(char::to_string).collect();
    let acc: Vec<&str> = accepting.iter().map(|&i| states[i].as_str()).collect();
    writeln!(out, "kind {kind}").unwrap();
    writeln!(out, "states {}", states.join(" ")).unwrap();
    writeln!(out, "alphabet {}", letters.join(" ")).unwrap();
    writeln!(out, "initial {}", states[initial]).unwrap();
    if acc.is_empty() {
        writeln!(out, "accepting").unwrap();
    } else {
        writeln!(out, "accepting {}", acc.join(" ")).unwrap();
    }
}

/// Serializes a classical machine; [`parse_machine`] reads it back to an
/// identical automaton.
pub fn write_classical(m: &ClassicalAutomaton) -> String {
    let mut out = String::new();
    write_header(
        &mut out,
        m.kind().name(),
        m.states(),
        m.alphabet(),
        m.initial(),
        m.accepting(),
    );
    for (symbol, matrix) in m.transitions() {
        writeln!(out, "symbol {}", symbol.name()).unwrap();
        write!(out, "{matrix}").unwrap();
        if !out.ends_with('\n') {
            out.push('\n');
        }
    }
    out
}

/// Serializes a QFA with shortest round-trip float formatting.
pub fn write_quantum(m: &QuantumAutomaton) -> String {
    let mut out = String::new();
    write_header(
        &mut out,
        "qfa",
        m.states(),
        m.alphabet(),
        m.initial(),
        m.accepting(),
    );
    for (symbol, channel) in m.channels() {
        writeln!(out, "symbol {}", symbol.name()).unwrap();
        for e in channel.elements() {
            writeln!(out, "element").unwrap();
            for row in e.row_iter() {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                writeln!(out, "{}", cells.join(" ")).unwrap();
            }
        }
    }
    out
}

pub fn write_machine(m: &Machine) -> String {
    match m {
        Machine::Classical(c) => write_classical(c),
        Machine::Quantum(q) => write_quantum(q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use afa_core::constructions::{abs_eq, afa_to_nqfa, lapins, m1_eq, m2_eq};
    use afa_core::exactnum::{int, rat};

    const M1: &str = "\
# two-state machine
kind afa
states e1 e2
alphabet a b
initial e1
accepting e1
symbol a
2 0   # first row
-1 1
symbol b
1/2 0
1/2 1
";

    fn classical(text: &str) -> ClassicalAutomaton {
        match parse_machine(text).unwrap() {
            Machine::Classical(m) => m,
            Machine::Quantum(_) => panic!("expected a classical machine"),
        }
    }

    #[test]
    fn parses_m1() {
        let m = classical(M1);
        assert_eq!(m.accept_value("aab").unwrap(), rat(2, 3));
        assert_eq!(m.accept_value("").unwrap(), int(1));
        assert_eq!(m.matrix(Symbol::Dollar), Some(&Matrix::identity(2)));
    }

    #[test]
    fn round_trip_is_exact() {
        for m in [m1_eq(), m2_eq(&rat(7, 3)).unwrap(), abs_eq(), lapins()] {
            let text = write_classical(&m);
            assert_eq!(classical(&text), m);
            assert_eq!(write_classical(&classical(&text)), text);
        }
    }

    #[test]
    fn quantum_round_trip() {
        let q = afa_to_nqfa(&m1_eq()).unwrap().automaton;
        let text = write_quantum(&q);
        let Machine::Quantum(back) = parse_machine(&text).unwrap() else {
            panic!("expected a qfa");
        };
        assert_eq!(back.channels(), q.channels());
        assert_eq!(write_quantum(&back), text);
    }

    #[test]
    fn column_sum_violation_names_symbol_and_column() {
        let bad = M1.replace("-1 1\n", "0 1\n");
        let err = parse_machine(&bad).unwrap_err();
        assert!(err.is_invariant_violation());
        let msg = err.to_string();
        assert!(msg.contains("symbol a, column 0"), "{msg}");
        let bad = M1.replace("-1 1\n", "-1 2\n");
        assert!(parse_machine(&bad)
            .unwrap_err()
            .to_string()
            .contains("column 1: column sums to 2"));
    }

    #[test]
    fn pfa_negative_entry() {
        let text =
            "kind pfa\nstates p q\nalphabet a\ninitial p\naccepting q\nsymbol a\n3/2 0\n-1/2 1\n";
        let err = parse_machine(text).unwrap_err();
        assert!(err.is_invariant_violation());
        assert!(err.to_string().contains("-1/2"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_machine(&M1.replace("2 0   #", "2 x   #")).unwrap_err();
        assert_eq!(
            err,
            LoadError::Syntax {
                line: 8,
                message: "malformed rational \"x\"".into()
            }
        );
        assert!(!err.is_invariant_violation());
        assert!(matches!(
            parse_machine(&M1.replace("initial e1", "initial e9")),
            Err(LoadError::Syntax { line: 5, .. })
        ));
        assert!(matches!(
            parse_machine(&M1.replace("kind afa\n", "")),
            Err(LoadError::Structure(_))
        ));
        assert!(matches!(
            parse_machine(&M1.replace("symbol b", "symbol bb")),
            Err(LoadError::Syntax { line: 10, .. })
        ));
        assert!(matches!(
            parse_machine(&format!("{M1}symbol a\n1 0\n0 1\n")),
            Err(LoadError::Syntax { line: 13, .. })
        ));
    }

    #[test]
    fn missing_letter_is_structural() {
        let text = M1.split("symbol b").next().unwrap();
        let err = parse_machine(text).unwrap_err();
        assert_eq!(
            err,
            LoadError::Classical(AutomatonError::MissingSymbol('b'))
        );
        assert!(!err.is_invariant_violation());
    }

    #[test]
    fn incomplete_channel_is_an_invariant_violation() {
        let text = "kind qfa\nstates p q\nalphabet a\ninitial p\naccepting q\nsymbol a\nelement\n0.5 0\n0 1\n";
        let err = parse_machine(text).unwrap_err();
        assert!(err.is_invariant_violation(), "{err}");
    }

    #[test]
    fn qfa_with_two_elements() {
        let text = "kind qfa\nstates p q\nalphabet a\ninitial p\naccepting q\n\
                    symbol a\nelement\n1 0\n0 0\nelement\n0 0\n0 1\n";
        let Machine::Quantum(q) = parse_machine(text).unwrap() else {
            panic!("expected a qfa");
        };
        assert_eq!(q.channel(Symbol::Letter('a')).unwrap().elements().len(), 2);
        assert_eq!(q.accept_value("a").unwrap(), 0.0);
    }
}

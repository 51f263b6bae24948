//! Reading JSON operands and writing results.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use bngkit::typeiii::FiniteSpectrumUnitary;
use bngkit::{ClusteredModel, DiagonalUnitary, UnitaryMatrix};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// The inputs do not satisfy a precondition (exit 1).
    Precondition(String),
    /// A certificate or self-check did not verify (exit 2).
    Verification(String),
    /// Unreadable input, malformed JSON or unwritable output (exit 3).
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Precondition(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Precondition(m) | Failure::Verification(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<bngkit::Error> for Failure {
    fn from(e: bngkit::Error) -> Self {
        if e.is_internal() {
            Failure::Verification(e.to_string())
        } else {
            Failure::Precondition(e.to_string())
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Inline JSON when the argument starts with `{` or `[`, standard input for
/// `-` or no argument, and a file path otherwise.
pub fn read_source(arg: Option<&str>, what: &str) -> Outcome<String> {
    match arg.map(str::trim) {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Io(format!("{what}: cannot read standard input: {e}")))?;
            Ok(s)
        }
        Some(text) if text.starts_with('{') || text.starts_with('[') => Ok(text.to_string()),
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{what}: cannot read {path}: {e}"))),
    }
}

/// Parses `text` as `T`, naming the offending field on failure.
pub fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Outcome<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Failure::Io(format!("{what}: malformed JSON: {inner}"))
        } else {
            Failure::Io(format!("{what}: malformed JSON at field `{path}`: {inner}"))
        }
    })
}

pub fn load<T: DeserializeOwned>(arg: Option<&str>, what: &str) -> Outcome<T> {
    parse(&read_source(arg, what)?, what)
}

/// Any operand a subcommand may accept, told apart by its keys.
#[derive(Clone, Debug)]
pub enum Input {
    Diagonal(DiagonalUnitary),
    Model(ClusteredModel),
    Matrix(UnitaryMatrix),
    Spectrum(FiniteSpectrumUnitary),
    Reals(Vec<f64>),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::Diagonal(_) => "diagonal unitary",
            Input::Model(_) => "clustered model",
            Input::Matrix(_) => "unitary matrix",
            Input::Spectrum(_) => "finite-spectrum unitary",
            Input::Reals(_) => "list of reals",
        }
    }

    /// The operand as a dense matrix; models are materialized with the
    /// given cluster repetition.
    pub fn to_matrix(&self, repetition: usize) -> Outcome<UnitaryMatrix> {
        match self {
            Input::Diagonal(d) => Ok(d.to_matrix()),
            Input::Model(m) => Ok(m.materialize(repetition).to_matrix()),
            Input::Matrix(u) => Ok(u.clone()),
            Input::Spectrum(s) => Ok(s.to_matrix()),
            Input::Reals(_) => Err(Failure::Precondition("a list of reals is not an operator".into())),
        }
    }
}

pub fn load_input(arg: Option<&str>, what: &str) -> Outcome<Input> {
    let text = read_source(arg, what)?;
    let value: Value = parse(&text, what)?;
    let key = |k: &str| value.get(k).is_some();
    if value.is_array() {
        Ok(Input::Reals(parse(&text, what)?))
    } else if key("phases") {
        Ok(Input::Diagonal(parse(&text, what)?))
    } else if key("clusters") {
        Ok(Input::Model(parse(&text, what)?))
    } else if key("eigenphases") {
        Ok(Input::Spectrum(parse(&text, what)?))
    } else if key("re") || key("dim") {
        Ok(Input::Matrix(parse(&text, what)?))
    } else {
        Err(Failure::Io(format!("{what}: expected one of the fields `phases`, `clusters`, `eigenphases` or `re`")))
    }
}

/// Writes `value` to `out`, or to standard output for `-` or no path.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>, pretty: bool) -> Outcome<()> {
    let text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) }
        .map_err(|e| Failure::Io(format!("cannot serialize output: {e}")))?;
    write_text(&text, out)
}

pub fn write_text(text: &str, out: Option<&Path>) -> Outcome<()> {
    match out {
        Some(path) if path != Path::new("-") => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        _ => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| Failure::Io(format!("cannot write standard output: {e}")))
        }
    }
}

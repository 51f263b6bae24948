//! `bngkit`: JSON in, JSON out.
//!
//! Exit codes: 0 success, 1 precondition error, 2 verification failure,
//! 3 input/output error.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use bngkit::certify::{
    self, certify_calkin_with, certify_diag, ng_bound, ng_bound_from_length, verify_with, NgMode, VerifyOptions,
};
use bngkit::decomp::{angle_normalize, greedy_order, product_decomposition, split_angles, torus_decomposition};
use bngkit::length::{ell, ell_ess, ell_matrix, hs_dist_matrix, proj_dist};
use bngkit::phase::Phase;
use bngkit::selftest;
use bngkit::su2::su2_chain;
use bngkit::typeiii::{commutator_witness, doubled_commutator};
use bngkit::{ClusteredModel, DiagonalUnitary, UnitaryMatrix};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::io::{emit, load, load_input, write_text, Failure, Input, Outcome};

#[derive(Parser, Debug)]
#[command(name = "bngkit", version, about = "Conjugacy certificates for unitary groups")]
struct Cli {
    /// Verification tolerance.
    #[arg(long, global = true, env = "BNGKIT_TOL", default_value_t = bngkit::VERIFY_TOL)]
    tol: f64,
    /// Largest dimension tried in calkin mode.
    #[arg(long, short = 'N', global = true, default_value_t = certify::DEFAULT_TRUNCATION)]
    truncation: usize,
    /// Output path; `-` is standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Product,
    Torus,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CertifyMode {
    Matrix,
    Calkin,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundMode {
    Calkin,
    Typeiii,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Projective length ℓ, and ℓ_ess for clustered models.
    Length {
        /// Inline JSON, a file, or `-` for standard input.
        #[arg(long)]
        input: Option<String>,
    },
    /// Projective and truncated Hilbert-Schmidt distances.
    Dist {
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Product or torus decomposition of a diagonal unitary.
    Decompose {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        input: Option<String>,
    },
    /// Greedy ordering of a zero-sum list, or angle normalization of a
    /// diagonal unitary.
    Order {
        #[arg(long)]
        input: Option<String>,
    },
    /// Split angles into two alternating-sign halves.
    Split {
        #[arg(long)]
        input: Option<String>,
    },
    /// Chain of m conjugates of diag(e^{iθ}, e^{-iθ}) with product
    /// diag(e^{iφ}, e^{-iφ}).
    Su2 {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
    /// Build a certificate that u is a product of conjugates of v^{±1}.
    Certify {
        #[arg(long, value_enum)]
        mode: CertifyMode,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        /// Multiplier in matrix mode; the smallest admissible one by default.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Check a certificate; exits with 2 if it does not verify.
    Verify {
        #[arg(long)]
        cert: Option<String>,
        /// Also compare factor spectra with the base spectrum.
        #[arg(long)]
        spectral: bool,
    },
    /// Involution v with ℓ(u) ≤ 4·ℓ([u, v]).
    CommutatorWitness {
        #[arg(long)]
        input: Option<String>,
    },
    /// [v₀,w₀] ⊕ [v₀,w₀]⁻¹ with a four-factor certificate over v₀ ⊕ v₀.
    DoubledCommutator {
        #[arg(long)]
        v0: String,
        #[arg(long)]
        w0: String,
    },
    /// Normal generation bound.
    Bound {
        #[arg(long, value_enum)]
        mode: BoundMode,
        #[arg(long)]
        input: Option<String>,
        /// Use this length instead of reading an operand.
        #[arg(long, conflicts_with = "input")]
        length: Option<f64>,
    },
    /// Run the acceptance property suite.
    Selftest {
        #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
        seed: u64,
        /// Run a single criterion.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=11))]
        criterion: Option<u8>,
        /// Print the report as JSON instead of one line per criterion.
        #[arg(long)]
        json: bool,
    },
}

/// Global options after validation.
struct RunConfig {
    tolerance: f64,
    truncation: usize,
    out: Option<PathBuf>,
    pretty: bool,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Outcome<Self> {
        if !(cli.tol > 0.0 && cli.tol.is_finite()) {
            return Err(Failure::Precondition(format!("tolerance must be positive, got {}", cli.tol)));
        }
        if cli.truncation < 2 {
            return Err(Failure::Precondition(format!("truncation must be at least 2, got {}", cli.truncation)));
        }
        Ok(RunConfig { tolerance: cli.tol, truncation: cli.truncation, out: cli.out.clone(), pretty: cli.pretty })
    }

    fn emit<T: serde::Serialize>(&self, value: &T) -> Outcome<()> {
        emit(value, self.out.as_deref(), self.pretty)
    }
}

fn model_phases(m: &ClusteredModel) -> Vec<Phase> {
    m.clusters().iter().copied().chain(m.exceptional().iter().map(|e| e.0)).collect()
}

fn length_of(input: &Input) -> Outcome<f64> {
    Ok(match input {
        Input::Diagonal(d) => ell(d.phases())?,
        Input::Model(m) => ell(&model_phases(m))?,
        Input::Matrix(u) => {
            u.check_unitary(bngkit::UNITARITY_TOL)?;
            ell_matrix(u)
        }
        Input::Spectrum(s) => ell(&s.eigenphases().iter().map(|e| e.0).collect::<Vec<_>>())?,
        Input::Reals(r) => bngkit::length::ell_of_angles(r)?,
    })
}

fn diagonal_of(input: Input, what: &str) -> Outcome<DiagonalUnitary> {
    match input {
        Input::Diagonal(d) => Ok(d),
        Input::Reals(r) => Ok(DiagonalUnitary::from_angles(&r)?),
        other => Err(Failure::Precondition(format!("{what}: expected a diagonal unitary, got a {}", other.kind()))),
    }
}

fn model_of(input: Input, what: &str) -> Outcome<ClusteredModel> {
    match input {
        Input::Model(m) => Ok(m),
        other => Err(Failure::Precondition(format!("{what}: expected a clustered model, got a {}", other.kind()))),
    }
}

fn matrix_of(input: Input, what: &str) -> Outcome<UnitaryMatrix> {
    match input {
        Input::Matrix(u) => Ok(u),
        Input::Diagonal(d) => Ok(d.to_matrix()),
        other => Err(Failure::Precondition(format!("{what}: expected a unitary matrix, got a {}", other.kind()))),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Both operands at a common dimension: that of a fixed-size one, or for
/// two models the least common period.
fn common_matrices(u: &Input, v: &Input) -> Outcome<(UnitaryMatrix, UnitaryMatrix)> {
    match (u, v) {
        (Input::Model(a), Input::Model(b)) => {
            let (pa, pb) = (a.dim(1), b.dim(1));
            let d = pa / gcd(pa, pb) * pb;
            Ok((u.to_matrix(d / pa)?, v.to_matrix(d / pb)?))
        }
        (Input::Model(a), other) | (other, Input::Model(a)) => {
            let fixed = other.to_matrix(1)?;
            let n = a.repetition_for(fixed.dim()).ok_or_else(|| {
                Failure::Precondition(format!("model of period {} cannot be materialized at dimension {}", a.dim(1), fixed.dim()))
            })?;
            let model = a.materialize(n).to_matrix();
            Ok(if matches!(u, Input::Model(_)) { (model, fixed) } else { (fixed, model) })
        }
        _ => Ok((u.to_matrix(1)?, v.to_matrix(1)?)),
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let cfg = RunConfig::from_cli(&cli)?;
    match cli.command {
        Command::Length { input } => {
            let input = load_input(input.as_deref(), "input")?;
            let value = match &input {
                Input::Model(m) => json!({ "ell": length_of(&input)?, "ell_ess": ell_ess(m) }),
                _ => json!({ "ell": length_of(&input)? }),
            };
            cfg.emit(&value)
        }
        Command::Dist { u, v } => {
            let (u, v) = (load_input(Some(&u), "u")?, load_input(Some(&v), "v")?);
            let (a, b) = common_matrices(&u, &v)?;
            if a.dim() != b.dim() {
                return Err(bngkit::Error::DimensionMismatch { left: a.dim(), right: b.dim() }.into());
            }
            a.check_unitary(bngkit::UNITARITY_TOL)?;
            b.check_unitary(bngkit::UNITARITY_TOL)?;
            cfg.emit(&json!({ "dim": a.dim(), "proj": proj_dist(&a, &b)?, "hs": hs_dist_matrix(&a, &b)? }))
        }
        Command::Decompose { kind, input } => {
            let u = diagonal_of(load_input(input.as_deref(), "input")?, "input")?;
            let seq = match kind {
                Kind::Product => product_decomposition(&u)?,
                Kind::Torus => torus_decomposition(&u),
            };
            cfg.emit(&seq)
        }
        Command::Order { input } => match load_input(input.as_deref(), "input")? {
            Input::Reals(alphas) => {
                let order = greedy_order(&alphas)?;
                let prefix = order.prefix_sums(&alphas);
                cfg.emit(&json!({ "permutation": order.permutation, "stalls": order.stalls, "prefix_sums": prefix }))
            }
            other => cfg.emit(&angle_normalize(&diagonal_of(other, "input")?)?),
        },
        Command::Split { input } => {
            let angles = match load_input(input.as_deref(), "input")? {
                Input::Reals(r) => r,
                other => diagonal_of(other, "input")?.angles(),
            };
            if let Some(x) = angles.iter().find(|x| !x.is_finite()) {
                return Err(bngkit::Error::NonFinite(*x).into());
            }
            let (first, second) = split_angles(&angles);
            cfg.emit(&json!({ "first": first, "second": second }))
        }
        Command::Su2 { theta, phi, m } => {
            let chain = su2_chain(theta, phi, m)?;
            let residual = chain.residual();
            let mut value = serde_json::to_value(&chain).map_err(|e| Failure::Io(e.to_string()))?;
            value["residual"] = json!(residual);
            cfg.emit(&value)
        }
        Command::Certify { mode, u, v, m } => {
            let (u, v) = (load_input(Some(&u), "u")?, load_input(Some(&v), "v")?);
            let v = model_of(v, "v")?;
            let cert = match mode {
                CertifyMode::Matrix => {
                    let u = diagonal_of(u, "u")?;
                    let m = match m {
                        Some(m) => m,
                        None => {
                            let lv = ell_ess(&v);
                            if lv <= 1e-12 {
                                return Err(bngkit::Error::ZeroLength.into());
                            }
                            ((ell(u.phases())? / lv - 1e-12).ceil() as usize).max(1)
                        }
                    };
                    certify_diag(&u, &v, m)?
                }
                CertifyMode::Calkin => {
                    if m.is_some() {
                        return Err(Failure::Precondition("--m is chosen automatically in calkin mode".into()));
                    }
                    certify_calkin_with(&model_of(u, "u")?, &v, cfg.truncation)?
                }
            };
            cfg.emit(&cert)
        }
        Command::Verify { cert, spectral } => {
            let cert: certify::Certificate = load(cert.as_deref(), "cert")?;
            let report = verify_with(&cert, &VerifyOptions { tol: cfg.tolerance, spectral });
            cfg.emit(&report)?;
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Verification(format!("certificate rejected: {report}")))
            }
        }
        Command::CommutatorWitness { input } => {
            let u = match load_input(input.as_deref(), "input")? {
                Input::Spectrum(s) => s,
                other => {
                    return Err(Failure::Precondition(format!(
                        "input: expected a finite-spectrum unitary, got a {}",
                        other.kind()
                    )))
                }
            };
            cfg.emit(&commutator_witness(&u)?)
        }
        Command::DoubledCommutator { v0, w0 } => {
            let v0 = matrix_of(load_input(Some(&v0), "v0")?, "v0")?;
            let w0 = matrix_of(load_input(Some(&w0), "w0")?, "w0")?;
            let (target, cert) = doubled_commutator(&v0, &w0)?;
            cfg.emit(&json!({ "target": target, "certificate": cert }))
        }
        Command::Bound { mode, input, length } => {
            let ng = match mode {
                BoundMode::Calkin => NgMode::Calkin,
                BoundMode::Typeiii => NgMode::Typeiii,
            };
            let (len, bound) = match (length, mode) {
                (Some(len), _) => (len, ng_bound_from_length(len, ng)?),
                (None, BoundMode::Calkin) => {
                    let v = model_of(load_input(input.as_deref(), "input")?, "input")?;
                    (ell_ess(&v), ng_bound(&v)?)
                }
                (None, BoundMode::Typeiii) => {
                    let len = length_of(&load_input(input.as_deref(), "input")?)?;
                    (len, ng_bound_from_length(len, ng)?)
                }
            };
            cfg.emit(&json!({ "mode": ng, "length": len, "bound": bound }))
        }
        Command::Selftest { seed, criterion, json } => {
            let report = match criterion {
                Some(id) => {
                    let c = selftest::run_criterion(id, seed);
                    selftest::SelftestReport { seed, pass: c.pass, criteria: vec![c] }
                }
                None => selftest::run(seed),
            };
            if json {
                cfg.emit(&report)?;
            } else {
                write_text(&report.to_string(), cfg.out.as_deref())?;
            }
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Verification("self-test failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bngkit: {f}");
            ExitCode::from(f.code())
        }
    }
}

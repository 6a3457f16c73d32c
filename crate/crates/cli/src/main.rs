//! Command-line front end: enumeration, matrix dumps, spectra, eigenbases,
//! oracle verification, renormalized limit traces, and fibre evaluation,
//! with JSON/CSV output for scripting.
//!
//! Exit codes: 0 success or verified, 1 verification or runtime failure,
//! 2 usage or parse error, 3 size cap exceeded.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use shiftlap::continuum::{renormalized_limit, ExtendedEigenfunction};
use shiftlap::decimation::{
    dirichlet_eigenbasis, dirichlet_spectrum_with_cap, eigenbasis_one, DecimationAddress,
    SpectrumDocument, SpectrumEntry,
};
use shiftlap::operator::Operator;
use shiftlap::oracle::{spectrum_compare, symmetric_eigen, DenseMatrix, DEFAULT_JACOBI_TOL};
use shiftlap::symbolic::{LevelSet, Point};
use shiftlap::{Error as CoreError, DEFAULT_SIZE_CAP};

#[derive(Parser)]
#[command(
    name = "shiftlap",
    version,
    about = "Difference operators and spectral decimation on the full one-sided shift space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the vertex set V_m in canonical order
    Points(PointsArgs),
    /// Dump the assembled difference operator H_m
    Matrix(MatrixArgs),
    /// Emit the complete Dirichlet spectrum with multiplicities and addresses
    Spectrum(SpectrumArgs),
    /// Emit the explicit eigenbasis of every spectrum entry
    Basis(BasisArgs),
    /// Verify the predicted spectrum against the dense eigensolver oracle
    Verify(VerifyArgs),
    /// Trace the renormalized limit N^(m+1) lambda_m along the minus branch
    Limit(LimitArgs),
    /// Evaluate an extended eigenfunction at a point of the space
    Extend(ExtendArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SizeArgs {
    /// Number of symbols
    #[arg(long = "N")]
    n: u32,
    /// Level of the vertex set
    #[arg(long)]
    m: usize,
    /// Refuse runs whose vertex set would exceed this many points
    #[arg(long, env = "SHIFTLAP_SIZE_CAP", default_value_t = DEFAULT_SIZE_CAP)]
    size_cap: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Write the output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PointsArgs {
    #[command(flatten)]
    size: SizeArgs,
    /// Output format; csv is one label per line
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    size: SizeArgs,
    /// Output format; csv is a label header plus integer rows
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct BasisArgs {
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    size: SizeArgs,
    /// Largest accepted |predicted - oracle| per eigenvalue
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Relative tolerance for grouping oracle eigenvalues into clusters
    #[arg(long, default_value_t = 1e-6)]
    cluster_tol: f64,
    /// Perturb one predicted multiplicity, to exercise the failure path
    #[arg(long, hide = true)]
    corrupt: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct LimitArgs {
    /// Number of symbols
    #[arg(long = "N")]
    n: u32,
    /// Starting eigenvalue: a number, or "N" for the symbol count
    #[arg(long)]
    base: String,
    /// Level of the starting eigenvalue
    #[arg(long, default_value_t = 1)]
    m0: usize,
    /// Relative tolerance on successive scaled terms
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Give up past this level
    #[arg(long, default_value_t = 120)]
    max_m: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ExtendArgs {
    /// Number of symbols
    #[arg(long = "N")]
    n: u32,
    /// Base level of the extended eigenfunction
    #[arg(long, default_value_t = 1)]
    eta: usize,
    /// The localized basis function to extend: 1 on the constant-prefix
    /// class of this symbol
    #[arg(long)]
    base_symbol: u32,
    /// Point in text form, e.g. "1-2-2.1" or ".3"
    #[arg(long)]
    point: String,
    /// Refuse points deeper than this level
    #[arg(long, default_value_t = 64)]
    max_m: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    out: OutArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Failure {
        let code = match e {
            CoreError::SizeCapExceeded { .. } => 3,
            CoreError::SymbolOutOfRange { .. }
            | CoreError::PointParse { .. }
            | CoreError::TooFewSymbols { .. }
            | CoreError::DepthBelowLevel { .. }
            | CoreError::LevelMismatch { .. }
            | CoreError::InvalidArgument(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Points(args) => cmd_points(args),
        Command::Matrix(args) => cmd_matrix(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Basis(args) => cmd_basis(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Limit(args) => cmd_limit(args),
        Command::Extend(args) => cmd_extend(args),
    }
}

fn emit(out: &OutArgs, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string(value).expect("documents serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct PointRow {
    label: String,
    level: usize,
}

#[derive(Serialize)]
struct PointsDocument {
    #[serde(rename = "N")]
    n: u32,
    m: usize,
    points: Vec<PointRow>,
}

fn cmd_points(args: PointsArgs) -> Result<ExitCode, Failure> {
    let ls = LevelSet::enumerate_with_cap(args.size.n, args.size.m, args.size.size_cap)?;
    let text = match args.format {
        Format::Csv => {
            let mut text = String::new();
            for p in ls.points() {
                writeln!(text, "{p}").expect("string write");
            }
            text
        }
        Format::Json => to_json(&PointsDocument {
            n: args.size.n,
            m: args.size.m,
            points: ls
                .points()
                .iter()
                .map(|p| PointRow {
                    label: p.to_string(),
                    level: p.level(),
                })
                .collect(),
        }),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_matrix(args: MatrixArgs) -> Result<ExitCode, Failure> {
    let h = Operator::assemble_with_cap(args.size.n, args.size.m, args.size.size_cap)?;
    let text = match args.format {
        Format::Csv => h.to_csv(),
        Format::Json => to_json(&h.dump()),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn spectrum_csv(entries: &[SpectrumEntry<f64>]) -> String {
    let mut text = String::from("value,multiplicity,base,born_at,betas\n");
    for e in entries {
        let wire = serde_json::to_value(&e.address).expect("address serializes");
        writeln!(
            text,
            "{},{},{},{},{}",
            e.value,
            e.multiplicity,
            wire["base"].as_str().expect("base is a string"),
            wire["born_at"],
            wire["betas"].as_str().expect("betas is a string"),
        )
        .expect("string write");
    }
    text
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<ExitCode, Failure> {
    let entries = dirichlet_spectrum_with_cap::<f64>(args.size.n, args.size.m, args.size.size_cap)?;
    let text = match args.format {
        Format::Json => to_json(&SpectrumDocument::new(args.size.n, args.size.m, entries)),
        Format::Csv => spectrum_csv(&entries),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BasisPair {
    value: f64,
    multiplicity: u64,
    address: DecimationAddress,
    functions: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct BasisDocument {
    #[serde(rename = "N")]
    n: u32,
    m: usize,
    labels: Vec<String>,
    pairs: Vec<BasisPair>,
}

fn cmd_basis(args: BasisArgs) -> Result<ExitCode, Failure> {
    let (n, m) = (args.size.n, args.size.m);
    let entries = dirichlet_spectrum_with_cap::<f64>(n, m, args.size.size_cap)?;
    let pairs = dirichlet_eigenbasis::<f64>(n, m)?;
    let ls = LevelSet::enumerate_with_cap(n, m, args.size.size_cap)?;
    let labels: Vec<String> = ls.points().iter().map(|p| p.to_string()).collect();

    let text = match args.format {
        Format::Json => {
            let pairs = entries
                .iter()
                .zip(&pairs)
                .map(|(entry, pair)| BasisPair {
                    value: pair.value,
                    multiplicity: entry.multiplicity,
                    address: entry.address.clone(),
                    functions: pair.functions.iter().map(|f| f.values().to_vec()).collect(),
                })
                .collect();
            to_json(&BasisDocument { n, m, labels, pairs })
        }
        Format::Csv => {
            let mut text = format!("value,index,{}\n", labels.join(","));
            for pair in &pairs {
                for (idx, f) in pair.functions.iter().enumerate() {
                    let row: Vec<String> = f.values().iter().map(|v| v.to_string()).collect();
                    writeln!(text, "{},{},{}", pair.value, idx, row.join(","))
                        .expect("string write");
                }
            }
            text
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let (n, m) = (args.size.n, args.size.m);
    let mut predicted = dirichlet_spectrum_with_cap::<f64>(n, m, args.size.size_cap)?;
    if args.corrupt {
        predicted[0].multiplicity += 1;
    }
    let h = Operator::assemble_with_cap(n, m, args.size.size_cap)?;
    let d = DenseMatrix::<f64>::negated_from(&h.dirichlet_restrict());
    let oracle = symmetric_eigen(&d, DEFAULT_JACOBI_TOL)?.reclustered(args.cluster_tol);
    let report = spectrum_compare(&predicted, &oracle, args.tol);

    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut text =
                String::from("predicted_value,predicted_multiplicity,oracle_value,oracle_count\n");
            for e in &report.matched {
                writeln!(
                    text,
                    "{},{},{},{}",
                    e.predicted_value, e.predicted_multiplicity, e.oracle_value, e.oracle_count
                )
                .expect("string write");
            }
            writeln!(text, "max_value_error,{}", report.max_value_error).expect("string write");
            writeln!(text, "passed,{}", report.passed).expect("string write");
            text
        }
    };
    emit(&args.out, &text)?;
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_limit(args: LimitArgs) -> Result<ExitCode, Failure> {
    let lam0: f64 = if args.base == "N" {
        args.n as f64
    } else {
        args.base
            .parse()
            .map_err(|_| usage(format!("cannot parse starting eigenvalue '{}'", args.base)))?
    };
    let trace = renormalized_limit(args.n, lam0, args.m0, args.tol, args.max_m)?;
    let text = match args.format {
        Format::Json => to_json(&trace),
        Format::Csv => trace.to_csv(),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ExtendDocument {
    #[serde(rename = "N")]
    n: u32,
    eta: usize,
    base_symbol: u32,
    point: String,
    value: f64,
}

fn cmd_extend(args: ExtendArgs) -> Result<ExitCode, Failure> {
    let point = Point::parse(&args.point, args.n)?;
    if point.level() > args.max_m {
        return Err(usage(format!(
            "point has level {}, beyond --max-m {}",
            point.level(),
            args.max_m
        )));
    }
    if args.base_symbol == 0 || args.base_symbol > args.n {
        return Err(usage(format!(
            "base symbol {} out of range 1..={}",
            args.base_symbol, args.n
        )));
    }
    let chi = eigenbasis_one::<f64>(args.n, args.eta)?;
    let base = chi.functions[args.base_symbol as usize - 1].clone();
    let f = ExtendedEigenfunction::new(args.n, args.eta, base, 1.0)?;
    let value = f.evaluate(&point)?;

    let text = match args.format {
        Format::Json => to_json(&ExtendDocument {
            n: args.n,
            eta: args.eta,
            base_symbol: args.base_symbol,
            point: point.to_string(),
            value,
        }),
        Format::Csv => format!("{value}\n"),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

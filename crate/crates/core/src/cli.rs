//! Command-line front end.
//!
//! Exit codes: `0` success, `2` usage error, `3` data or parameter error.
//! Results go to stdout (or `--output`), diagnostics to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{format_f64, SampledSignal};
use crate::harness::{convergence_study, BuiltinFunction, StudyConfig, DEFAULT_OFFSETS};
use crate::optimal::{optimal_table, WeightRow};
use crate::predictor::{refine, BoundaryPolicy};
use crate::smoothness::smoothness_profile;
use crate::stencil::midpoint_coeffs;
use crate::weights::{nonlinear_weights, SchemeConfig, SchemeKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ratweno", version, about = "Adaptive rational interpolation on dyadic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump exact optimal weights or a midpoint rule.
    Weights(WeightsArgs),
    /// Nonlinear weights at one midpoint of a signal.
    Nlweights(NlweightsArgs),
    /// Smoothness indicators and jump measures per point.
    Indicators(IndicatorsArgs),
    /// Predict finer levels from a signal.
    Refine(RefineArgs),
    /// Error and order table near the discontinuity of a built-in function.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightKind {
    Optimal,
    Midpoint,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct WeightsArgs {
    #[arg(long, value_enum, default_value = "optimal")]
    kind: WeightKind,
    /// Order parameter (optimal weights).
    #[arg(long)]
    r: Option<usize>,
    /// Polynomial degree (midpoint rule).
    #[arg(long)]
    a: Option<usize>,
    /// Offset of the rightmost stencil node (midpoint rule).
    #[arg(long, allow_hyphen_values = true)]
    b: Option<i64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct SchemeArgs {
    /// linear, weno, rational2_family1, rational2_family2, rational4_v3, rational4_v4 or rational.
    #[arg(long, value_parser = parse_scheme, default_value = "rational")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 3)]
    r: usize,
    /// Exponent of the jump measures and order-4 weights [default: 2r-1].
    #[arg(long)]
    t: Option<u32>,
    /// Regularisation of the WENO and order-4 weights [default: h^2].
    #[arg(long)]
    eps: Option<f64>,
    /// Parameter of the order-2 rational families.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Exponent of the WENO weights [default: r].
    #[arg(long)]
    weno_power: Option<u32>,
}

impl SchemeArgs {
    fn config(&self) -> SchemeConfig {
        SchemeConfig {
            scheme: self.scheme,
            r: self.r,
            t: self.t,
            eps: self.eps,
            alpha: self.alpha,
            weno_power: self.weno_power,
        }
    }
}

fn parse_scheme(s: &str) -> std::result::Result<SchemeKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_boundary(s: &str) -> std::result::Result<BoundaryPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_function(s: &str) -> std::result::Result<BuiltinFunction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct NlweightsArgs {
    /// Signal CSV with header `x,f`; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Midpoint of `[x_{j-1}, x_j]`.
    #[arg(long)]
    j: usize,
}

#[derive(Debug, Args)]
struct IndicatorsArgs {
    /// Signal CSV with header `x,f`; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    r: usize,
    /// Single point; every point with a full window if omitted.
    #[arg(long)]
    j: Option<usize>,
    /// Jump-measure exponent [default: 2r-1].
    #[arg(long)]
    t: Option<u32>,
}

#[derive(Debug, Args)]
struct RefineArgs {
    /// Signal CSV with header `x,f`; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Number of successive refinements.
    #[arg(long, default_value_t = 1)]
    levels: u32,
    /// shift: linear rule moved inside the grid; restrict: leave the point empty (single level only).
    #[arg(long, value_parser = parse_boundary, default_value = "shift")]
    boundary: BoundaryPolicy,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    /// f1, f2, sine or poly9smooth.
    #[arg(long, value_parser = parse_function)]
    function: BuiltinFunction,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true, default_values_t = [-0.5, 0.5])]
    interval: Vec<f64>,
    /// Coarse levels I0 .. I1 (exclusive); errors are measured one level finer.
    #[arg(long, num_args = 2, value_names = ["I0", "I1"], default_values_t = [4, 8])]
    levels: Vec<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Offsets ξ from the jump interval, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    offsets: Option<Vec<i64>>,
    /// Cells of the level-0 grid.
    #[arg(long, default_value_t = 1)]
    base_cells: usize,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Weights(a) => cmd_weights(a, out),
        Command::Nlweights(a) => cmd_nlweights(a, out),
        Command::Indicators(a) => cmd_indicators(a, out),
        Command::Refine(a) => cmd_refine(a, out),
        Command::Convergence(a) => cmd_convergence(a, out),
    }
}

fn read_signal(path: &PathBuf) -> Result<SampledSignal> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        SampledSignal::read_csv(buf.as_slice())
    } else {
        let file = File::open(path)
            .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
        SampledSignal::read_csv(file)
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct ExactVec {
    exact: Vec<String>,
    value: Vec<f64>,
}

impl ExactVec {
    fn new(v: &[crate::exact::Q]) -> Self {
        Self {
            exact: v.iter().map(ToString::to_string).collect(),
            value: v.iter().map(crate::exact::to_f64).collect(),
        }
    }
}

#[derive(Serialize)]
struct RowDump {
    a: usize,
    b: usize,
    first_k: usize,
    #[serde(flatten)]
    weights: ExactVec,
}

#[derive(Serialize)]
struct MatrixDump {
    exact: Vec<Vec<String>>,
    value: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct OptimalDump {
    r: usize,
    optimal: ExactVec,
    a_matrix: MatrixDump,
    a_tilde: MatrixDump,
    rows: Vec<RowDump>,
}

fn matrix_dump(m: &[Vec<crate::exact::Q>]) -> MatrixDump {
    MatrixDump {
        exact: m.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(),
        value: m.iter().map(|r| r.iter().map(crate::exact::to_f64).collect()).collect(),
    }
}

fn cmd_weights(args: WeightsArgs, out: &mut dyn Write) -> Result<()> {
    match args.kind {
        WeightKind::Optimal => {
            let r = args
                .r
                .ok_or_else(|| Error::InvalidParameter("--r is required for optimal weights".into()))?;
            if !(1..=crate::smoothness::MAX_ORDER).contains(&r) {
                return Err(Error::InvalidParameter(format!(
                    "r = {r} outside [1, {}]",
                    crate::smoothness::MAX_ORDER
                )));
            }
            let table = optimal_table(r)?;
            let m = table.matrices();
            match args.format {
                Format::Json => {
                    let dump = OptimalDump {
                        r,
                        optimal: ExactVec::new(&m.o_vec),
                        a_matrix: matrix_dump(&m.a_mat),
                        a_tilde: matrix_dump(&m.a_tilde),
                        rows: table
                            .rows()
                            .map(|row| RowDump {
                                a: row.a,
                                b: row.b,
                                first_k: row.first_k(),
                                weights: ExactVec::new(&row.weights),
                            })
                            .collect(),
                    };
                    write_json(out, &dump)
                }
                Format::Csv => {
                    let mut wtr = csv::Writer::from_writer(out);
                    wtr.write_record(["entry", "a", "b", "k", "exact", "value"])?;
                    let mut emit = |entry: &str, row: &WeightRow, ks: &mut dyn Iterator<Item = usize>| -> Result<()> {
                        for k in ks {
                            let w = row.get(k);
                            wtr.write_record([
                                entry.to_string(),
                                row.a.to_string(),
                                row.b.to_string(),
                                k.to_string(),
                                w.to_string(),
                                format_f64(crate::exact::to_f64(&w)),
                            ])?;
                        }
                        Ok(())
                    };
                    let full = table.row(2 * r - 1, r - 1).expect("full stencil row");
                    emit("optimal", full, &mut (0..r))?;
                    // column c of A^r is the (2r-2-c, r-2-c) row, column c of Ã^r the (r+c, r-1) row
                    for c in 0..r.saturating_sub(1) {
                        let row = table.row(2 * r - 2 - c, r - 2 - c).expect("row");
                        emit("a_matrix", row, &mut (0..r))?;
                    }
                    for c in 0..r.saturating_sub(1) {
                        let row = table.row(r + c, r - 1).expect("row");
                        emit("a_tilde", row, &mut (0..r))?;
                    }
                    for row in table.rows() {
                        emit("row", row, &mut row.ks())?;
                    }
                    wtr.flush()?;
                    Ok(())
                }
            }
        }
        WeightKind::Midpoint => {
            let (a, b) = match (args.a, args.b) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::InvalidParameter(
                        "--a and --b are required for midpoint rules".into(),
                    ))
                }
            };
            if a > 64 {
                return Err(Error::InvalidParameter(format!("degree a = {a} is too large")));
            }
            let rule = midpoint_coeffs(a, b);
            match args.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Dump {
                        a: usize,
                        b: i64,
                        first_node: i64,
                        #[serde(flatten)]
                        coeffs: ExactVec,
                    }
                    write_json(
                        out,
                        &Dump {
                            a,
                            b,
                            first_node: rule.spec().first(),
                            coeffs: ExactVec::new(rule.coeffs()),
                        },
                    )
                }
                Format::Csv => {
                    let mut wtr = csv::Writer::from_writer(out);
                    wtr.write_record(["node", "exact", "value"])?;
                    for (m, c) in rule.coeffs().iter().enumerate() {
                        wtr.write_record([
                            (rule.spec().first() + m as i64).to_string(),
                            c.to_string(),
                            format_f64(rule.coeffs_f64()[m]),
                        ])?;
                    }
                    wtr.flush()?;
                    Ok(())
                }
            }
        }
    }
}

fn cmd_nlweights(args: NlweightsArgs, out: &mut dyn Write) -> Result<()> {
    let signal = read_signal(&args.input)?;
    let config = args.scheme.config();
    let w = nonlinear_weights(&signal, args.j, &config)?;
    #[derive(Serialize)]
    struct Dump<'a> {
        j: usize,
        x: f64,
        scheme: &'a SchemeConfig,
        omegas: Vec<f64>,
    }
    write_json(
        out,
        &Dump {
            j: args.j,
            x: signal.grid().midpoint(args.j.max(1)),
            scheme: &config,
            omegas: w.omegas,
        },
    )
}

fn cmd_indicators(args: IndicatorsArgs, out: &mut dyn Write) -> Result<()> {
    let signal = read_signal(&args.input)?;
    let r = args.r;
    if !(1..=crate::smoothness::MAX_ORDER).contains(&r) {
        return Err(Error::UnsupportedR(r));
    }
    let t = args.t.unwrap_or(2 * r as u32 - 1);
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    let n = signal.grid().n_cells();
    let points: Vec<usize> = match args.j {
        Some(j) => vec![j],
        None => (r..=(n + 1).saturating_sub(r)).collect(),
    };
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["j".to_string(), "x".to_string()];
    header.extend((0..r).map(|k| format!("I{k}")));
    header.extend((1..r).rev().map(|k| format!("J-{k}")));
    header.extend((1..r).map(|k| format!("J{k}")));
    wtr.write_record(&header)?;
    for j in points {
        let p = smoothness_profile(&signal, j, r, t)?;
        let mut rec = vec![j.to_string(), format_f64(signal.grid().midpoint(j))];
        rec.extend(p.indicators.iter().map(|&v| format_f64(v)));
        rec.extend(p.jumps.left.iter().rev().map(|&v| format_f64(v)));
        rec.extend(p.jumps.right.iter().map(|&v| format_f64(v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

fn cmd_refine(args: RefineArgs, out: &mut dyn Write) -> Result<()> {
    let signal = read_signal(&args.input)?;
    let result = refine(&signal, &args.scheme.config(), args.boundary, args.levels)?;
    match &args.output {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            result.write_csv(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => result.write_csv(out),
    }
}

fn cmd_convergence(args: ConvergenceArgs, out: &mut dyn Write) -> Result<()> {
    let mut config = StudyConfig::new(
        args.function,
        args.scheme.config(),
        (args.interval[0], args.interval[1]),
        (args.levels[0], args.levels[1]),
    )
    .with_offsets(args.offsets.unwrap_or_else(|| DEFAULT_OFFSETS.to_vec()));
    if args.base_cells < 1 {
        return Err(Error::InvalidSize("base cells must be at least 1".into()));
    }
    config.base_cells = args.base_cells;
    let report = convergence_study(&config)?;
    match args.format {
        Format::Csv => report.write_csv(out),
        Format::Json => report.write_json(out),
    }
}

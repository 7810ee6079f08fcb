//! Command-line front end: census, series extraction, comparisons, the
//! constant, and the local diagnostics, with CSV or JSON tables.
//!
//! Exit codes: 0 success, 1 validation or runtime failure, 2 mathematical
//! cross-check failure (the census and the series disagreeing, a measure
//! missing its predicted value, the self-test leaving its bound). CI should
//! treat 2 as the loudest possible alarm.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use conic_census::asymptotic::{
    gamma, hankel_check, leading_constant, predict, tauberian_selftest,
};
use conic_census::census::{census_range_with, DEFAULT_MAX_LOG_HEIGHT};
use conic_census::dirichlet::z_counts;
use conic_census::funcfield::{Place, RatFunc};
use conic_census::symbol::{local_residue, principal_part_prediction, soluble_principal_parts};

use conic_census_cli::output::{Cell, Table};

#[derive(Parser)]
#[command(
    name = "conic-census",
    version,
    about = "Counts conics x0^2 + x0*x1 + y*x1^2 = t*x2^2 over GF(2)(t) with a rational point,\n\
             by exhaustive census, by exact Euler-product coefficients, and by the asymptotic",
    after_help = "Polynomials are written as t^3+t+1 (or hex masks like 0xB), rational\n\
                  functions as P/Q, and the infinite place as 'inf'."
)]
struct Cli {
    /// Worker threads (default: the CONIC_CENSUS_WORKERS variable, then
    /// available parallelism). Results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output format for the result table
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the table to this path instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively count the y of height 2^M whose conic has a rational
    /// point, for M = 0..=max
    Census {
        #[arg(long)]
        max_log_height: u32,
        /// Skip the column comparing against the Euler-product coefficient
        #[arg(long)]
        no_crosscheck: bool,
        /// Allow runs beyond the default cap of 14
        #[arg(long)]
        force: bool,
    },
    /// Coefficients of the height zeta series from the Euler product
    Series {
        /// Number of coefficients (exponents 0..order)
        #[arg(long)]
        order: u32,
    },
    /// Three-way table: census, Euler coefficient, asymptotic prediction
    Compare {
        #[arg(long)]
        max: u32,
        /// Allow runs beyond the default cap of 14
        #[arg(long)]
        force: bool,
    },
    /// The leading constant of the asymptotic, with its truncation bound
    Constant {
        #[arg(long, default_value_t = 30)]
        max_degree: u32,
    },
    /// Local symbol [y, t)_w and the residue it traces
    Symbol {
        #[arg(long)]
        y: String,
        #[arg(long)]
        place: String,
    },
    /// Count soluble principal parts of valuation -k at a finite place
    Measure {
        #[arg(long)]
        place: String,
        #[arg(long)]
        k: u32,
    },
    /// Central-binomial self-test of the branch-point coefficient asymptotics
    Tauberian {
        /// Run the synthetic self-test (the only mode)
        #[arg(long)]
        selftest: bool,
        #[arg(long, default_value_t = 4096)]
        max: u32,
    },
    /// Hankel contour quadrature against -1/Gamma(b)
    Hankel {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
    },
}

enum RunError {
    Validation(String),
    CrossCheck(Vec<&'static str>),
    Io(std::io::Error),
}

fn validation(msg: impl Into<String>) -> RunError {
    RunError::Validation(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap would exit 2 on its own; 2 is reserved for cross-check
            // failures here, so usage problems map to 1.
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Io(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
        Err(RunError::CrossCheck(names)) => {
            eprintln!("cross-check FAILED: {}", names.join(", "));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    let workers = resolve_workers(cli.workers)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| validation(format!("could not build the worker pool: {e}")))?;

    let mut table = dispatch(&cli.command)?;
    // every run echoes its full effective configuration
    table.config("workers", workers);
    table.config("format", cli.format.name());
    if let Some(path) = &cli.out {
        table.config("out", path.display().to_string());
    }
    let rendered = table.render(cli.format == Format::Json);
    match &cli.out {
        Some(path) => std::fs::write(path, rendered).map_err(RunError::Io)?,
        None => print!("{rendered}"),
    }
    let failed = table.failed_checks();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(RunError::CrossCheck(failed))
    }
}

fn resolve_workers(flag: Option<usize>) -> Result<usize, RunError> {
    let from_env = match std::env::var("CONIC_CENSUS_WORKERS") {
        Ok(s) => Some(
            s.parse::<usize>()
                .map_err(|_| validation(format!("CONIC_CENSUS_WORKERS is not a number: {s}")))?,
        ),
        Err(_) => None,
    };
    let workers = flag
        .or(from_env)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(validation("worker count must be at least 1"));
    }
    Ok(workers)
}

fn check_cap(requested: u32, force: bool) -> Result<(), RunError> {
    if requested > DEFAULT_MAX_LOG_HEIGHT && !force {
        return Err(validation(format!(
            "max log-height {requested} exceeds the cap {DEFAULT_MAX_LOG_HEIGHT} \
             (about 3*4^M pairs are enumerated; pass --force to run anyway)"
        )));
    }
    if requested > 24 {
        return Err(validation(format!(
            "max log-height {requested} is out of reach (about 3*4^M pairs)"
        )));
    }
    Ok(())
}

fn parse_arg<T: FromStr>(what: &str, raw: &str) -> Result<T, RunError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| validation(format!("invalid {what} '{raw}': {e}")))
}

fn dispatch(command: &Command) -> Result<Table, RunError> {
    match command {
        Command::Census {
            max_log_height,
            no_crosscheck,
            force,
        } => {
            check_cap(*max_log_height, *force)?;
            Ok(run_census(*max_log_height, !no_crosscheck))
        }
        Command::Series { order } => {
            if *order == 0 {
                return Err(validation("series order must be at least 1"));
            }
            if *order > 64 {
                return Err(validation("series order capped at 64"));
            }
            Ok(run_series(*order))
        }
        Command::Compare { max, force } => {
            check_cap(*max, *force)?;
            Ok(run_compare(*max))
        }
        Command::Constant { max_degree } => {
            if !(2..=40).contains(max_degree) {
                return Err(validation("max degree must lie in 2..=40"));
            }
            Ok(run_constant(*max_degree))
        }
        Command::Symbol { y, place } => {
            let y: RatFunc = parse_arg("rational function", y)?;
            let place: Place = parse_arg("place", place)?;
            Ok(run_symbol(&y, &place))
        }
        Command::Measure { place, k } => {
            let place: Place = parse_arg("place", place)?;
            let Place::Finite(w) = place else {
                return Err(validation("the measure is defined at finite places only"));
            };
            if w == conic_census::BinaryPoly::T {
                return Err(validation("the measure excludes the place t"));
            }
            if *k == 0 {
                return Err(validation("k must be at least 1"));
            }
            let degree = place.degree();
            if k * degree > 20 {
                return Err(validation(format!(
                    "k * deg = {} is too large to enumerate (cap 20)",
                    k * degree
                )));
            }
            Ok(run_measure(&place, *k))
        }
        Command::Tauberian { selftest, max } => {
            if !selftest {
                return Err(validation("only --selftest mode exists"));
            }
            if *max < 8 {
                return Err(validation("self-test needs --max at least 8"));
            }
            if *max > 1 << 20 {
                return Err(validation("self-test capped at 2^20"));
            }
            Ok(run_tauberian(*max))
        }
        Command::Hankel { b, m, delta } => {
            if !(*b > 0.0 && *b <= 2.0) {
                return Err(validation("b must lie in (0, 2]"));
            }
            if *m < 4 {
                return Err(validation("m must be at least 4"));
            }
            if !(*delta > 0.0 && *delta < 1.0) {
                return Err(validation("delta must lie in (0, 1)"));
            }
            if f64::from(*m) * delta <= 1.0 {
                return Err(validation("m * delta must exceed 1 (the contour's reach)"));
            }
            run_hankel(*b, *m, *delta)
        }
    }
}

fn run_census(m_max: u32, crosscheck: bool) -> Table {
    let columns = if crosscheck {
        vec![
            "M",
            "total",
            "soluble",
            "euler_coefficient",
            "ratio_to_asymptotic",
        ]
    } else {
        vec!["M", "total", "soluble", "ratio_to_asymptotic"]
    };
    let mut table = Table::new(columns);
    table.config("command", "census");
    table.config("max_log_height", m_max);
    table.config("crosscheck", crosscheck);
    let coefficients = if crosscheck {
        Some(z_counts(m_max as usize + 1))
    } else {
        None
    };
    let constant = leading_constant(30).c;
    let mut all_equal = true;
    let rows = census_range_with(m_max, |row| {
        eprintln!(
            "M = {:2}: total {:>12} soluble {:>12} ({:.2}s)",
            row.m,
            row.total,
            row.soluble,
            row.elapsed.as_secs_f64()
        );
    });
    for row in &rows {
        let mut cells = vec![
            Cell::UInt(u64::from(row.m)),
            Cell::UInt(row.total),
            Cell::UInt(row.soluble),
        ];
        if let Some(c) = &coefficients {
            let expected = &c[row.m as usize];
            if *expected != row.soluble.into() {
                all_equal = false;
            }
            cells.push(Cell::Big(expected.to_string()));
        }
        cells.push(if row.m >= 1 {
            Cell::Float(row.soluble as f64 / predict(row.m, constant))
        } else {
            Cell::Empty
        });
        table.push(cells);
    }
    if crosscheck {
        table.check("census_equals_euler", all_equal);
    }
    table
}

fn run_series(order: u32) -> Table {
    let mut table = Table::new(vec!["M", "coefficient"]);
    table.config("command", "series");
    table.config("order", order);
    for (m, coefficient) in z_counts(order as usize).iter().enumerate() {
        table.push(vec![
            Cell::UInt(m as u64),
            Cell::Big(coefficient.to_string()),
        ]);
    }
    table
}

fn run_compare(m_max: u32) -> Table {
    let mut table = Table::new(vec![
        "M",
        "census",
        "euler",
        "asymptotic",
        "census_over_asymptotic",
    ]);
    table.config("command", "compare");
    table.config("max", m_max);
    let coefficients = z_counts(m_max as usize + 1);
    let constant = leading_constant(30).c;
    let mut all_equal = true;
    let rows = census_range_with(m_max, |_| {});
    for row in &rows {
        let expected = &coefficients[row.m as usize];
        if *expected != row.soluble.into() {
            all_equal = false;
        }
        let (asym, ratio) = if row.m >= 1 {
            let p = predict(row.m, constant);
            (Cell::Float(p), Cell::Float(row.soluble as f64 / p))
        } else {
            (Cell::Empty, Cell::Empty)
        };
        table.push(vec![
            Cell::UInt(u64::from(row.m)),
            Cell::UInt(row.soluble),
            Cell::Big(expected.to_string()),
            asym,
            ratio,
        ]);
    }
    table.check("census_equals_euler", all_equal);
    table
}

fn run_constant(max_degree: u32) -> Table {
    let mut table = Table::new(vec!["c", "partial_product", "tail_bound", "degrees_used"]);
    table.config("command", "constant");
    table.config("max_degree", max_degree);
    let report = leading_constant(max_degree);
    table.push(vec![
        Cell::Float(report.c),
        Cell::Float(report.partial_product),
        Cell::Float(report.tail_bound),
        Cell::UInt(u64::from(report.degrees_used)),
    ]);
    table
}

fn run_symbol(y: &RatFunc, place: &Place) -> Table {
    let mut table = Table::new(vec!["y", "place", "residue", "residue_field", "symbol"]);
    table.config("command", "symbol");
    table.config("y", y);
    table.config("place", place);
    let residue = local_residue(y, place);
    let symbol = u64::from(residue.trace());
    eprintln!(
        "[{y}, t)_({place}) = {symbol}   (residue {})",
        residue.rep()
    );
    table.push(vec![
        Cell::Text(y.to_string()),
        Cell::Text(place.to_string()),
        Cell::Text(residue.rep().to_string()),
        Cell::Text(match place {
            Place::Infinity => "GF(2)".to_string(),
            Place::Finite(w) => format!("GF(2)[x]/({w})"),
        }),
        Cell::UInt(symbol),
    ]);
    table
}

fn run_measure(place: &Place, k: u32) -> Table {
    let mut table = Table::new(vec![
        "place",
        "k",
        "soluble",
        "total",
        "predicted_soluble",
        "predicted_total",
    ]);
    table.config("command", "measure");
    table.config("place", place);
    table.config("k", k);
    let (soluble, total) = soluble_principal_parts(place, k).expect("inputs validated");
    let (predicted_soluble, predicted_total) = principal_part_prediction(place.degree(), k);
    eprintln!(
        "v = -{k} at {place}: {soluble} of {total} principal parts soluble \
         (predicted {predicted_soluble} of {predicted_total})"
    );
    table.push(vec![
        Cell::Text(place.to_string()),
        Cell::UInt(u64::from(k)),
        Cell::UInt(soluble),
        Cell::UInt(total),
        Cell::UInt(predicted_soluble),
        Cell::UInt(predicted_total),
    ]);
    table.check(
        "measure_matches_prediction",
        (soluble, total) == (predicted_soluble, predicted_total),
    );
    table
}

fn run_tauberian(m_max: u32) -> Table {
    let mut table = Table::new(vec!["M", "ratio", "bound"]);
    table.config("command", "tauberian");
    table.config("max", m_max);
    let report = tauberian_selftest(m_max);
    for row in &report.rows {
        table.push(vec![
            Cell::UInt(u64::from(row.m)),
            Cell::Float(row.ratio),
            Cell::Float(1.0 / (4.0 * f64::from(row.m))),
        ]);
    }
    table.check("ratios_within_quarter_m", report.within_bound);
    table
}

fn run_hankel(b: f64, m: u32, delta: f64) -> Result<Table, RunError> {
    let mut table = Table::new(vec!["b", "m", "delta", "value", "reference", "abs_error"]);
    table.config("command", "hankel");
    table.config("b", b);
    table.config("m", m);
    table.config("delta", delta);
    let value =
        hankel_check(b, m, delta).map_err(|e| validation(format!("quadrature failed: {e}")))?;
    let reference = -1.0 / gamma(b);
    table.push(vec![
        Cell::Float(b),
        Cell::UInt(u64::from(m)),
        Cell::Float(delta),
        Cell::Float(value),
        Cell::Float(reference),
        Cell::Float((value - reference).abs()),
    ]);
    Ok(table)
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varjac::{
    exit, fit_decay_exponent, format, phase_diagram, read_sweep, run_sweep, sweep_exit_code, verify_bounds,
    write_sweep, FitMethod, HarnessError, OutputFormat, Route, SweepSpec,
};
use varjac_core::{ParamSet, PrecisionConfig, QuadratureConfig};

#[derive(Parser)]
#[command(name = "varjac", version, about = "Jacobi polynomials with degree-dependent parameter: evaluation and sweeps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one route at one degree.
    Eval(EvalArgs),
    /// Evaluate routes over a range of degrees.
    Sweep(SweepArgs),
    /// Regime, boundaries and Laplace shape for one parameter set.
    Classify(ClassifyArgs),
    /// Regime table over a (lambda, a) grid.
    PhaseDiagram(PhaseArgs),
    /// Fit a decay exponent to a sweep file.
    Fit(FitArgs),
    /// Check the exponential bound certificate against the exact value.
    VerifyBounds(VerifyArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Slope of the first parameter, as a decimal.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "a_rational", conflicts_with = "a_rational")]
    a: Option<f64>,
    /// Slope as an exact fraction p/q; makes gamma exact.
    #[arg(long, allow_hyphen_values = true)]
    a_rational: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long)]
    lambda: f64,
}

#[derive(Args, Clone)]
struct NumArgs {
    /// Delivered significand bits of the exact route.
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
    /// Radius of the Fourier contour.
    #[arg(long, default_value_t = 1.0)]
    x_contour: f64,
    /// Relative tolerance of the quadrature route.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Cap on quadrature panels per integral.
    #[arg(long, default_value_t = 200_000)]
    max_subdivisions: usize,
}

#[derive(Args, Clone)]
struct OutArgs {
    #[arg(long, default_value = "csv")]
    out: OutputFormat,
    /// Write to a file instead of stdout.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value = "exact")]
    route: Route,
    #[command(flatten)]
    num: NumArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, required_unless_present = "n_list", conflicts_with = "n_list")]
    n_from: Option<u64>,
    #[arg(long, requires = "n_from")]
    n_to: Option<u64>,
    #[arg(long, default_value_t = 1)]
    n_step: u64,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<u64>>,
    /// Keep only degrees with integer gamma (steps by q for a = p/q).
    #[arg(long)]
    integer_gamma: bool,
    /// Comma-separated routes: exact, quad, asym, bound.
    #[arg(long, value_delimiter = ',', default_value = "exact")]
    routes: Vec<Route>,
    #[command(flatten)]
    num: NumArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    lambda_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    a_list: Vec<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep file, CSV or JSON.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "envelope")]
    method: FitMethod,
    /// Route to fit; defaults to the first route in the file.
    #[arg(long)]
    route: Option<Route>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n_max: u64,
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
    #[command(flatten)]
    out: OutArgs,
}

fn params(p: &ParamArgs) -> Result<ParamSet, HarnessError> {
    let r = match (&p.a_rational, p.a) {
        (Some(s), _) => {
            let (num, den) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            let num: i64 = num.trim().parse().map_err(|_| HarnessError::Config(format!("bad numerator in '{s}'")))?;
            let den: u64 = den.trim().parse().map_err(|_| HarnessError::Config(format!("bad denominator in '{s}'")))?;
            ParamSet::with_rational_a(num, den, p.alpha, p.beta, p.lambda)
        }
        (None, Some(a)) => ParamSet::new(a, p.alpha, p.beta, p.lambda),
        (None, None) => return Err(HarnessError::Config("one of --a or --a-rational is required".into())),
    };
    r.map_err(|e| HarnessError::Config(e.to_string()))
}

fn configs(num: &NumArgs) -> Result<(PrecisionConfig, QuadratureConfig), HarnessError> {
    let prec = PrecisionConfig::with_bits(num.precision_bits).map_err(|e| HarnessError::Config(e.to_string()))?;
    let quad = QuadratureConfig { x_contour: num.x_contour, rel_tol: num.rel_tol,
        max_subdivisions: num.max_subdivisions,
        ..QuadratureConfig::default() };
    Ok((prec, quad))
}

fn sink(out: &OutArgs) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match &out.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn degrees(a: &SweepArgs, p: &ParamSet) -> Result<Vec<u64>, HarnessError> {
    let mut ns = match (&a.n_list, a.n_from) {
        (Some(list), _) => list.clone(),
        (None, Some(from)) => {
            let to = a.n_to.unwrap_or(from);
            if a.n_step == 0 || to < from {
                return Err(HarnessError::Config("need n-step > 0 and n-to >= n-from".into()));
            }
            (from..=to).step_by(a.n_step as usize).collect()
        }
        (None, None) => return Err(HarnessError::Config("give --n-from/--n-to or --n-list".into())),
    };
    if a.integer_gamma {
        let mut keep = Vec::with_capacity(ns.len());
        for n in ns {
            if varjac_core::EvalPoint::new(*p, n)?.integer_flag {
                keep.push(n);
            }
        }
        ns = keep;
    }
    Ok(ns)
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    match cli.cmd {
        Cmd::Eval(a) => {
            let (precision, quad) = configs(&a.num)?;
            let spec = SweepSpec { precision, quad, ..SweepSpec::new(params(&a.params)?, vec![a.n], vec![a.route]) };
            let rows = run_sweep(&spec)?;
            write_sweep(sink(&a.out)?, a.out.out, &spec, &rows)?;
            Ok(sweep_exit_code(&rows))
        }
        Cmd::Sweep(a) => {
            let p = params(&a.params)?;
            let (precision, quad) = configs(&a.num)?;
            let spec = SweepSpec { precision, quad, ..SweepSpec::new(p, degrees(&a, &p)?, a.routes.clone()) };
            let rows = run_sweep(&spec)?;
            write_sweep(sink(&a.out)?, a.out.out, &spec, &rows)?;
            Ok(sweep_exit_code(&rows))
        }
        Cmd::Classify(a) => {
            let p = params(&a.params)?;
            let row = varjac::classify_cell(p.lambda(), p.a())?;
            format::write_phase(sink(&a.out)?, a.out.out, &[row])?;
            Ok(exit::SUCCESS)
        }
        Cmd::PhaseDiagram(a) => {
            let rows = phase_diagram(&a.lambda_list, &a.a_list)?;
            format::write_phase(sink(&a.out)?, a.out.out, &rows)?;
            Ok(exit::SUCCESS)
        }
        Cmd::Fit(a) => {
            let text = std::fs::read_to_string(&a.input)?;
            let (routes, rows) = read_sweep(&text)?;
            let route = match a.route {
                Some(r) => r,
                None => *routes.first().ok_or_else(|| HarnessError::Parse("file has no routes".into()))?,
            };
            let fit = fit_decay_exponent(&rows, route, a.method)?;
            format::write_fit(sink(&a.out)?, a.out.out, route, &fit)?;
            Ok(exit::SUCCESS)
        }
        Cmd::VerifyBounds(a) => {
            let p = params(&a.params)?;
            let precision =
                PrecisionConfig::with_bits(a.precision_bits).map_err(|e| HarnessError::Config(e.to_string()))?;
            let rows = verify_bounds(p, a.n_max, precision)?;
            let spec = SweepSpec {
                precision,
                ..SweepSpec::new(p, rows.iter().map(|r| r.n).collect(), vec![Route::Exact, Route::Bound])
            };
            write_sweep(sink(&a.out)?, a.out.out, &spec, &rows)?;
            let violated = rows.iter().any(|r| r.bound_dominates != Some(true));
            if violated {
                eprintln!("bound certificate violated or unavailable for some n");
            }
            Ok(sweep_exit_code(&rows).max(if violated { exit::CONSISTENCY } else { exit::SUCCESS }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::SUCCESS as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("varjac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

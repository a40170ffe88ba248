use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrigark::harness::{run_convergence, run_work_precision, write_work_precision_csv, ConvergenceStudy, ErrorNorm, WorkPrecisionOptions};
use mrigark::integrators::{integrate, InnerSolverConfig, IntegrateOptions, StepConfig};
use mrigark::problems::ProblemConfig;
use mrigark::stability::{scan_region, MatrixReading, RegionKind, StabilityQuery};
use mrigark::tableaux::{lookup, lookup_method, multirate_names, MethodDocument, MultirateScheme, Precision};
use mrigark::verify::{all_required_pass, verify_scheme};
use mrigark::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "mrigark", version, about = "Multirate infinitesimal GARK integrators", arg_required_else_help = true)]
struct Cli {
    /// Seed for randomized sampling. Every current subcommand is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check coefficient sets against their order conditions.
    Verify(VerifyArgs),
    /// Integrate a benchmark problem with a fixed macro step.
    Integrate(IntegrateArgs),
    /// Convergence study over a list of step counts.
    Converge(ConvergeArgs),
    /// Linear stability region of a multirate method.
    Stability(StabilityArgs),
    /// Wall time against error for several methods.
    WorkPrecision(WorkPrecisionArgs),
    /// Write the registered coefficient sets as JSON.
    ExportMethods(ExportArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Selection {
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    all: bool,
    /// Method document in the export format.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    select: Selection,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InnerKind {
    Adaptive,
    Fixed,
    Implicit,
}

#[derive(Args, Debug)]
struct InnerArgs {
    #[arg(long, value_enum, default_value_t = InnerKind::Adaptive)]
    inner: InnerKind,
    #[arg(long, default_value_t = 1e-10)]
    inner_tol: f64,
    #[arg(long, default_value_t = 10)]
    substeps: usize,
}

impl InnerArgs {
    fn config(&self) -> InnerSolverConfig {
        match self.inner {
            InnerKind::Adaptive => InnerSolverConfig::adaptive(self.inner_tol),
            InnerKind::Fixed => InnerSolverConfig::fixed(self.substeps),
            InnerKind::Implicit => InnerSolverConfig::implicit(self.substeps),
        }
    }
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// gray-scott, kpr or inverter-chain.
    #[arg(long)]
    problem: String,
    /// JSON object overriding problem parameters, e.g. '{"m": 100}'.
    #[arg(long)]
    params: Option<String>,
}

impl ProblemArgs {
    fn config(&self) -> Result<ProblemConfig, Failure> {
        match &self.params {
            None => Ok(ProblemConfig::by_name(&self.problem)?),
            Some(text) => {
                let v: serde_json::Value =
                    serde_json::from_str(text).map_err(|e| Failure::Usage(format!("--params: {e}")))?;
                Ok(ProblemConfig::with_overrides(&self.problem, &v)?)
            }
        }
    }
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[arg(long)]
    method: String,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of macro steps over the problem's time span.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[command(flatten)]
    inner: InnerArgs,
    /// Write every step instead of only the endpoints.
    #[arg(long)]
    all_states: bool,
    /// Print a JSON summary instead of the trajectory CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long)]
    method: String,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    steps: Vec<usize>,
    #[command(flatten)]
    inner: InnerArgs,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    norm: NormArg,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    L2,
    Linf,
}

impl From<NormArg> for ErrorNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L2 => ErrorNorm::L2,
            NormArg::Linf => ErrorNorm::Linf,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Scalar,
    Matrix,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReadingArg {
    Literal,
    Grid,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[arg(long)]
    method: String,
    #[arg(long, value_enum, default_value_t = KindArg::Scalar)]
    kind: KindArg,
    /// Fan radius, or `inf`.
    #[arg(long, default_value = "inf")]
    rho: f64,
    /// Fan half-angle in degrees.
    #[arg(long, default_value_t = 45.0)]
    alpha: f64,
    /// re_min,re_max,im_min,im_max
    #[arg(long, value_delimiter = ',', default_values_t = [-10.0, 0.0, -10.0, 10.0], allow_hyphen_values = true)]
    window: Vec<f64>,
    /// Grid points per axis, or `NX,NY`.
    #[arg(long, value_delimiter = ',', default_values_t = [101])]
    res: Vec<usize>,
    #[arg(long, default_value_t = 24)]
    radial: usize,
    #[arg(long, default_value_t = 17)]
    angular: usize,
    #[arg(long, value_enum, default_value_t = ReadingArg::Literal)]
    reading: ReadingArg,
}

#[derive(Args, Debug)]
struct WorkPrecisionArgs {
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<String>,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated macro step sizes.
    #[arg(long = "h", value_delimiter = ',')]
    h: Vec<f64>,
    #[arg(long, value_enum, default_value_t = InnerKind::Implicit)]
    inner: InnerKind,
    #[arg(long, default_value_t = 1e-10)]
    inner_tol: f64,
    #[arg(long, default_value_t = 5)]
    substeps: usize,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Export one method instead of all.
    #[arg(long)]
    method: Option<String>,
}

enum Failure {
    Usage(String),
    Compute(Error),
    Verification(serde_json::Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownMethod { .. } | Error::UnknownProblem { .. } | Error::InvalidInput(_) => Failure::Usage(e.to_string()),
            e => Failure::Compute(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Compute(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(Error::Io(e))) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Compute(e)) => {
            eprintln!("{}", json!({ "error": e.to_string(), "command": command_name(&cli.command) }));
            ExitCode::from(1)
        }
        Err(Failure::Verification(report)) => {
            eprintln!("{}", json!({ "error": "verification failed", "failed": report }));
            ExitCode::from(1)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify(_) => "verify",
        Command::Integrate(_) => "integrate",
        Command::Converge(_) => "converge",
        Command::Stability(_) => "stability",
        Command::WorkPrecision(_) => "work-precision",
        Command::ExportMethods(_) => "export-methods",
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut out = output(cli.out.as_deref())?;
    match &cli.command {
        Command::Verify(a) => verify(a, &mut out),
        Command::Integrate(a) => run_integrate(a, &mut out),
        Command::Converge(a) => converge(a, &mut out),
        Command::Stability(a) => stability(a, &mut out),
        Command::WorkPrecision(a) => work_precision(a, &mut out),
        Command::ExportMethods(a) => export(a, &mut out),
    }?;
    out.flush()?;
    Ok(())
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let schemes: Vec<MultirateScheme> = if a.select.all {
        multirate_names().iter().map(|n| lookup(n)).collect::<Result<_, _>>()?
    } else if let Some(name) = &a.select.method {
        vec![lookup(name)?]
    } else {
        let path = a.select.file.as_ref().expect("one selection is required");
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        vec![MethodDocument::from_json(&text)?.to_scheme(Precision::User)?]
    };
    let mut results = Vec::new();
    let mut failed = Vec::new();
    for s in &schemes {
        let reports = verify_scheme(s);
        let pass = all_required_pass(&reports);
        if !pass {
            failed.push(s.name().to_string());
        }
        if a.json {
            results.push(json!({ "method": s.name(), "pass": pass, "reports": reports }));
        } else {
            let worst = reports.iter().filter(|r| r.required).map(|r| r.residual.abs()).fold(0.0, f64::max);
            writeln!(out, "{:<18} {} {:>3} conditions, max residual {:.2e}", s.name(), if pass { "PASS" } else { "FAIL" }, reports.len(), worst)?;
            for r in reports.iter().filter(|r| r.required && !r.pass) {
                writeln!(out, "    {} residual {:e} > {:e}: {}", r.id, r.residual, r.tolerance, r.anchor)?;
            }
        }
    }
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&results).map_err(Error::from)?)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        out.flush()?;
        Err(Failure::Verification(json!(failed)))
    }
}

fn run_integrate(a: &IntegrateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.steps == 0 {
        return Err(Failure::Usage("--steps must be positive".into()));
    }
    let method = lookup_method(&a.method)?;
    let inner = a.inner.config();
    inner.validate()?;
    let mut p = a.problem.config()?.build()?;
    let h = (p.t_span.1 - p.t_span.0) / a.steps as f64;
    let opts = IntegrateOptions { step: StepConfig::with_inner(inner), store_states: a.all_states };
    let tr = integrate(&method, &mut *p.system, p.t_span, &p.y0, h, &opts)?;
    if a.json {
        writeln!(out, "{}", tr.summary_json()?)?;
    } else {
        tr.write_csv(out)?;
    }
    Ok(())
}

fn converge(a: &ConvergeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut study = ConvergenceStudy::new(&a.method, a.problem.config()?, a.steps.clone());
    study.inner = a.inner.config();
    study.norm = a.norm.into();
    let report = run_convergence(&study, None)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(Error::from)?)?;
    } else {
        report.write_csv(out)?;
    }
    Ok(())
}

fn stability(a: &StabilityArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let scheme = lookup(&a.method)?;
    let resolution = match a.res[..] {
        [n] => (n, n),
        [nx, ny] => (nx, ny),
        _ => return Err(Failure::Usage("--res takes N or NX,NY".into())),
    };
    let window = <[f64; 4]>::try_from(a.window.as_slice()).map_err(|_| Failure::Usage("--window takes four numbers".into()))?;
    let q = StabilityQuery {
        rho: a.rho,
        alpha_deg: a.alpha,
        radial: a.radial,
        angular: a.angular,
        window,
        resolution,
        reading: match a.reading {
            ReadingArg::Literal => MatrixReading::Literal,
            ReadingArg::Grid => MatrixReading::Grid,
        },
        ..StabilityQuery::default()
    };
    let kind = match a.kind {
        KindArg::Scalar => RegionKind::Scalar,
        KindArg::Matrix => RegionKind::Matrix,
    };
    scan_region(&scheme, &q, kind)?.write_csv(out)?;
    Ok(())
}

fn work_precision(a: &WorkPrecisionArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let inner = match a.inner {
        InnerKind::Adaptive => InnerSolverConfig::adaptive(a.inner_tol),
        InnerKind::Fixed => InnerSolverConfig::fixed(a.substeps),
        InnerKind::Implicit => InnerSolverConfig::implicit(a.substeps),
    };
    let opts = WorkPrecisionOptions { inner, repetitions: a.repetitions, norm: ErrorNorm::L2 };
    let runs = run_work_precision(&a.methods, &a.problem.config()?, &a.h, &opts, None)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&runs).map_err(Error::from)?)?;
    } else {
        write_work_precision_csv(&runs, out)?;
    }
    Ok(())
}

fn export(a: &ExportArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let text = match &a.method {
        Some(name) => MethodDocument::from_scheme(&lookup(name)?).to_json()?,
        None => {
            let docs = multirate_names().iter().map(|n| lookup(n).map(|s| MethodDocument::from_scheme(&s))).collect::<Result<Vec<_>, _>>()?;
            serde_json::to_string_pretty(&docs).map_err(Error::from)?
        }
    };
    writeln!(out, "{text}")?;
    Ok(())
}

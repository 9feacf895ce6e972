use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::json;

use as_lab::angular::{angular_d4, AngularExpression, TermRecord};
use as_lab::det::{direct_d, Method};
use as_lab::discovery::{discover, DiscoveryOptions};
use as_lab::geometry::{Configuration, ConfigurationFile};
use as_lab::harness::scan::rows_to_csv;
use as_lab::harness::{
    epsilon_sweep, generate, scan_conjecture2, verify_methods, ExitStatus, GeneratorKind, GeneratorSpec,
    ScanOptions, ScanReport, ScanRow, VerifyOptions, CSV_HEADER, DEFAULT_TOLERANCE, VIOLATION_MARGIN,
};
use as_lab::perm::{perm_formula_d, perm_formula_d_sampled};
use as_lab::{Cplx, Error};

#[derive(Parser)]
#[command(name = "as-lab", version, about = "Normalized Atiyah-Sutcliffe determinant of point configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate D for one configuration file.
    Eval(EvalArgs),
    /// Compare methods on generated configurations.
    Verify(VerifyArgs),
    /// Search generated configurations for |D| < 1 or det(A) = 0.
    Scan(ScanArgs),
    /// Recover an angular expression for D by least squares.
    Discover(DiscoverArgs),
    /// Write a generated configuration file.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Perm,
    PermSampled,
    Angular,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Perm => Method::PermFormula,
            MethodArg::PermSampled => Method::PermSampled,
            MethodArg::Angular => Method::AngularN4,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Configuration file: {"points": [[x, y, z], ...]}.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    method: MethodArg,
    /// Sample count for perm-sampled.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Averaged expression for the angular method: either discovery output
    /// ({"re": [...], "im": [...]}) or a bare term list for the real part.
    /// Without it the built-in n = 4 formula is used.
    #[arg(long)]
    formula: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Comma-separated subset of direct, perm, angular.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Direct, MethodArg::Perm])]
    methods: Vec<MethodArg>,
    #[arg(long, default_value = "uniform_ball")]
    generator: String,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value = "uniform_ball")]
    generator: String,
    /// Comma-separated separations; more than one runs a near-degenerate sweep.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    min_separation: f64,
    /// Report trials with |D| below this value.
    #[arg(long, default_value_t = 1.0 - VIOLATION_MARGIN)]
    threshold: f64,
    /// Also stream per-trial CSV rows to this file (JSON format only).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the report here as well (CSV format only).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the violating and singular configurations here when there are any.
    #[arg(long)]
    findings: Option<PathBuf>,
}

#[derive(Args)]
struct DiscoverArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 6)]
    max_slots: usize,
    /// Training rows per basis column.
    #[arg(long, default_value_t = 3)]
    row_factor: usize,
    /// Square system: one training row per column.
    #[arg(long, conflicts_with = "row_factor")]
    square: bool,
    #[arg(long, default_value_t = 100)]
    holdout: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    min_separation: f64,
}

#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<ExitStatus, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(ExitStatus::InputError.code() as u8) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Verify(a) => verify(a),
        Command::Scan(a) => scan(a),
        Command::Discover(a) => discover_cmd(a),
        Command::Generate(a) => generate_cmd(a),
    };
    match outcome {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(ExitStatus::InputError.code() as u8)
        }
    }
}

/// Opens `--out` or standard output.
fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn parse_kind(s: &str) -> Result<GeneratorKind, Failure> {
    Ok(s.parse::<GeneratorKind>()?)
}

/// An averaged expression `re + i·im` read from a formula file.
fn load_formula(path: &Path, n: usize) -> Result<(AngularExpression, Option<AngularExpression>), Failure> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?).map_err(|e| Failure(e.to_string()))?;
    let part = |v: &serde_json::Value| -> Result<AngularExpression, Failure> {
        let records: Vec<TermRecord> = serde_json::from_value(v.clone()).map_err(|e| Failure(e.to_string()))?;
        Ok(AngularExpression::from_records(&records, n, true)?)
    };
    match &value {
        serde_json::Value::Array(_) => Ok((part(&value)?, None)),
        serde_json::Value::Object(map) => {
            let re = map.get("re").ok_or_else(|| Failure("formula object needs \"re\"".into()))?;
            let im = map.get("im").map(part).transpose()?;
            Ok((part(re)?, im))
        }
        _ => Err(Failure("formula must be a term list or {\"re\", \"im\"}".into())),
    }
}

fn eval(a: EvalArgs) -> Outcome {
    let c = ConfigurationFile::parse(&read(&a.config)?)?;
    let method = Method::from(a.method);
    let mut record = json!({ "n": c.n(), "method": method.name() });
    let d: Cplx<f64> = match method {
        Method::Direct | Method::PermFormula => {
            let r = if method == Method::Direct { direct_d(&c)? } else { perm_formula_d(&c)? };
            if let Some(x) = r.det_a {
                record["det_a"] = json!([x.re, x.im]);
            }
            if let Some(x) = r.delta {
                record["delta"] = json!([x.re, x.im]);
            }
            record["ill_conditioned"] = json!(r.ill_conditioned);
            r.d
        }
        Method::PermSampled => {
            let s = perm_formula_d_sampled(&c, a.samples, a.common.seed)?;
            record["stderr"] = json!([s.stderr.re, s.stderr.im]);
            record["samples"] = json!(s.samples);
            record["seed"] = json!(a.common.seed);
            s.estimate
        }
        Method::AngularN4 => match &a.formula {
            None => angular_d4(&c)?.d,
            Some(path) => {
                let (re, im) = load_formula(path, c.n())?;
                record["formula"] = json!(path.display().to_string());
                Cplx::new(re.eval(&c)?, im.map(|e| e.eval(&c)).transpose()?.unwrap_or(0.0))
            }
        },
    };
    record["re"] = json!(d.re);
    record["im"] = json!(d.im);
    record["abs"] = json!(d.norm());
    let text = match a.common.format {
        Format::Json => pretty(&record),
        Format::Csv => {
            let se = |i: usize| record["stderr"].get(i).and_then(|v| v.as_f64()).map(|x| format!("{x:e}")).unwrap_or_default();
            format!("method,re,im,abs,stderr_re,stderr_im\n{},{:e},{:e},{:e},{},{}\n", method.name(), d.re, d.im, d.norm(), se(0), se(1))
        }
    };
    emit(&a.common.out, &text)?;
    Ok(ExitStatus::Pass)
}

fn verify(a: VerifyArgs) -> Outcome {
    let mut opts = VerifyOptions::new(a.n, a.trials, a.common.seed, a.methods.iter().map(|&m| m.into()).collect());
    opts.generator = parse_kind(&a.generator)?;
    opts.epsilon = a.epsilon;
    opts.tolerance = a.tolerance;
    let report = verify_methods(&opts)?;
    info!(
        "verified {} trials in {:.3} s, max deviation {:e}",
        report.trials, report.wall_time_s, report.max_rel_dev
    );
    let text = match a.common.format {
        Format::Json => pretty(&report),
        Format::Csv => {
            let mut s = String::from("a,b,max_rel_dev,mean_rel_dev,worst_trial\n");
            for p in &report.pairs {
                s += &format!("{},{},{:e},{:e},{}\n", p.a.name(), p.b.name(), p.max_rel_dev, p.mean_rel_dev, p.worst_trial);
            }
            s
        }
    };
    emit(&a.common.out, &text)?;
    if report.passed {
        Ok(ExitStatus::Pass)
    } else {
        warn!("{} of {} trials disagree beyond {:e}", report.disagreement_count, report.trials, report.tolerance);
        Ok(ExitStatus::Disagreement)
    }
}

fn scan(a: ScanArgs) -> Outcome {
    let mut opts = ScanOptions::new(a.n, a.trials, a.common.seed);
    opts.generator = parse_kind(&a.generator)?;
    opts.min_separation = a.min_separation;
    opts.threshold = a.threshold;
    if a.trials == 0 {
        return Err(Failure("trials must be at least 1".into()));
    }
    if a.epsilon.len() == 1 {
        opts.epsilon = Some(a.epsilon[0]);
    }
    // rows go to the primary output for csv, to --csv otherwise
    let mut rows_out: Option<Box<dyn Write>> = match (a.common.format, &a.csv) {
        (Format::Csv, _) => Some(sink(&a.common.out)?),
        (Format::Json, Some(p)) => Some(sink(&Some(p.clone()))?),
        (Format::Json, None) => None,
    };
    if let Some(w) = rows_out.as_mut() {
        writeln!(w, "{CSV_HEADER}")?;
    }
    let mut write_rows = |rows: &[ScanRow]| -> as_lab::Result<()> {
        if let Some(w) = rows_out.as_mut() {
            w.write_all(rows_to_csv(rows, false).as_bytes()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
        Ok(())
    };
    let reports: Vec<ScanReport> = if a.epsilon.len() > 1 {
        epsilon_sweep(&opts, &a.epsilon, &mut write_rows)?
    } else {
        vec![scan_conjecture2(&opts, &mut write_rows)?]
    };
    if let Some(mut w) = rows_out {
        w.flush()?;
    }
    for r in &reports {
        info!(
            "scanned {} trials (epsilon {:?}) in {:.3} s, min |D| = {:.15}",
            r.trials, r.epsilon, r.wall_time_s, r.min_abs_d
        );
    }
    let report_json = if reports.len() == 1 { pretty(&reports[0]) } else { pretty(&reports) };
    match a.common.format {
        Format::Json => emit(&a.common.out, &report_json)?,
        Format::Csv => {
            if let Some(p) = &a.report {
                emit(&Some(p.clone()), &report_json)?;
            }
        }
    }
    let findings = reports.iter().any(ScanReport::has_findings);
    if findings {
        let dumps: Vec<_> = reports
            .iter()
            .map(|r| json!({"epsilon": r.epsilon, "violations": r.violations, "singular": r.singular}))
            .collect();
        match &a.findings {
            Some(p) => emit(&Some(p.clone()), &pretty(&dumps))?,
            None => eprintln!("{}", pretty(&dumps)),
        }
        let (v, s): (u64, u64) = reports.iter().fold((0, 0), |acc, r| (acc.0 + r.violation_count, acc.1 + r.singular_count));
        warn!("findings: {v} trials with |D| below {}, {s} with singular A", a.threshold);
        Ok(ExitStatus::Violation)
    } else {
        Ok(ExitStatus::Pass)
    }
}

fn discover_cmd(a: DiscoverArgs) -> Outcome {
    let mut opts = DiscoveryOptions::new(a.n, a.max_slots, a.common.seed);
    opts.row_factor = if a.square { 1 } else { a.row_factor };
    opts.holdout = a.holdout;
    let (basis, formula) = discover(&opts)?;
    info!(
        "basis of {} orbits ({} raw products, {} self-cancelling), rank {}",
        basis.len(),
        basis.raw_count,
        basis.self_cancelling.len(),
        formula.rank
    );
    let text = match a.common.format {
        Format::Json => formula.to_json(),
        Format::Csv => {
            let v = formula.to_json_value();
            let mut s = String::from("part,num,den,term\n");
            for part in ["re", "im"] {
                let records: Vec<TermRecord> = serde_json::from_value(v[part].clone()).expect("own output");
                for r in records {
                    let term = r.to_term().expect("own output");
                    s += &format!("{part},{},{},\"{}\"\n", r.coeff[0], r.coeff[1], term.monomial);
                }
            }
            s
        }
    };
    emit(&a.common.out, &text)?;
    let tol = opts.solve.holdout_tol;
    if formula.re.holdout_residual <= tol && formula.im.holdout_residual <= tol {
        Ok(ExitStatus::Pass)
    } else {
        warn!(
            "holdout residual above {tol:e}: re {:e}, im {:e}",
            formula.re.holdout_residual, formula.im.holdout_residual
        );
        Ok(ExitStatus::Disagreement)
    }
}

fn generate_cmd(a: GenerateArgs) -> Outcome {
    let mut spec = GeneratorSpec::new(parse_kind(&a.kind)?, a.n, a.common.seed)
        .with_stream(a.stream)
        .with_min_separation(a.min_separation);
    spec.epsilon = a.epsilon;
    let c: Configuration<f64> = generate(&spec)?;
    let text = match a.common.format {
        Format::Json => ConfigurationFile::from_configuration(&c).to_json(),
        Format::Csv => {
            let mut s = String::from("x,y,z\n");
            for p in c.to_arrays() {
                // shortest round-trip representation
                s += &format!("{:?},{:?},{:?}\n", p[0], p[1], p[2]);
            }
            s
        }
    };
    emit(&a.common.out, &text)?;
    Ok(ExitStatus::Pass)
}

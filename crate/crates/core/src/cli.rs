//! Command-line front end. Every subcommand writes CSV (default) or JSON to
//! stdout or `--output`; verdict summaries go to stderr.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure or a sweep
//! whose verdict differs from the expected one.
//!
//! `--config FILE` reads `key = value` lines (`#` starts a comment). Keys
//! are long flag names; flags given on the command line win.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constants::{kdp_mc, Kdp};
use crate::energy::{FractionalVariant, Mode, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::error::Error;
use crate::fields::{Field, Regularity};
use crate::geometry::Domain;
use crate::kernels::{KernelSpec, KERNEL_KEYS};
use crate::record::Record;
use crate::rng::stream;
use crate::sweep::{
    builtin_suite_with, reports_to_csv, run_suite, run_sweep, Functional, SweepCase, SweepReport, TargetKind,
    Verdict,
};

/// Worker threads for the parallel estimators; unset means all cores.
pub const THREADS_ENV: &str = "PLEVY_THREADS";

pub const CONSTANT_HEADER: &str =
    "d,p,value_mean,value_closed,value_printed,value_mc,mc_stderr,n,discrepancy,printed_discrepancy";
pub const KERNEL_CHECK_HEADER: &str = "family,d,p,eps,normalization,delta,mass_outside,normalized";

#[derive(Debug, Parser)]
#[command(name = "plevy", version, about = "Nonlocal energies of concentrating p-Lévy kernels")]
pub struct Cli {
    /// key = value file merged under the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo samples per ε
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// K_{d,p} by sphere mean, closed form and Monte Carlo
    Constant {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
    },
    /// Normalization and tail mass of a kernel over an ε grid
    KernelCheck {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Radius for the tail mass
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Evaluate a functional at each ε
    Energy(CaseArgs),
    /// Evaluate a functional along an ε grid and judge convergence
    Sweep {
        #[command(flatten)]
        case: CaseArgs,
        /// grad-lp, bv-seminorm, zero, pointwise or divergent; default from the functional and field
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value = "converged")]
        expect: String,
        /// Magnitude a zero target is compared against
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// The built-in case list
    Suite {
        /// Comma-separated case ids to run
        #[arg(long)]
        only: Option<String>,
    },
    /// Generator of a p = 2 family at a point
    Generator {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        field: String,
        /// Comma-separated coordinates
        #[arg(long)]
        point: String,
    },
    /// The slit-domain cases
    Counterexample,
}

/// A kernel as a record (`--kernel family=stable,d=1,p=2`) and/or single
/// keys; single keys override the record.
#[derive(Debug, Clone, Default, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// One ε or a comma-separated decreasing grid
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub base_eps: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub field: String,
    #[arg(long)]
    pub domain: String,
    /// energy, cross-energy, local-measure, dirac-pairing, fractional-order,
    /// fractional-short-range, fractional-long-range or gagliardo
    #[arg(long, default_value = "energy")]
    pub functional: String,
    /// Subset for local-measure
    #[arg(long)]
    pub subdomain: Option<String>,
    /// Order for gagliardo
    #[arg(long)]
    pub s: Option<f64>,
    /// mc, deterministic-1D or quadrature; default picks by dimension
    #[arg(long)]
    pub mode: Option<String>,
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Record(_) | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Usage(msg.into()))
}

/// Run the CLI on `args` (program name first).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let mut err = String::new();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(msg) => return Outcome { code: 1, stdout: String::new(), stderr: format!("error: {msg}\n") },
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let result = dispatch(&cli, &mut err).and_then(|(text, ok)| {
        if let Some(path) = &cli.output {
            std::fs::write(path, &text)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok((String::new(), ok))
        } else {
            Ok((text, ok))
        }
    });
    match result {
        Ok((stdout, ok)) => Outcome { code: if ok { 0 } else { 2 }, stdout, stderr: err },
        Err(Failure::Usage(m)) => Outcome { code: 1, stdout: String::new(), stderr: format!("{err}error: {m}\n") },
        Err(Failure::Numerical(m)) => Outcome { code: 2, stdout: String::new(), stderr: format!("{err}error: {m}\n") },
    }
}

/// Process entry point.
pub fn main() -> i32 {
    if let Ok(n) = std::env::var(THREADS_ENV) {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                // only fails when a pool already exists
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{n}`");
                return 1;
            }
        }
    }
    let out = run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    out.code
}

/// Append `--key value` for config entries whose flag is absent from argv.
fn merge_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        a.strip_prefix("--config=")
            .map(str::to_string)
            .or_else(|| (a == "--config").then(|| strs.get(i + 1).cloned()).flatten())
    });
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let sub = strs.iter().skip(1).find(|a| !a.starts_with('-') && subcommand_names().contains(a)).cloned();
    let allowed = flag_names(sub.as_deref());
    let mut out = args;
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key = value", no + 1))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k == "config" || !allowed.contains(&k) {
            let mut valid: Vec<String> = allowed.into_iter().filter(|n| n != "config").collect();
            valid.sort();
            return Err(format!("{path}:{}: unknown key `{k}`; valid keys: {}", no + 1, valid.join(", ")));
        }
        let flag = format!("--{k}");
        let given = strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !given {
            out.push(format!("{flag}={v}").into());
        }
    }
    Ok(out)
}

fn subcommand_names() -> Vec<String> {
    Cli::command().get_subcommands().map(|s| s.get_name().to_string()).collect()
}

fn flag_names(sub: Option<&str>) -> Vec<String> {
    let cmd = Cli::command();
    let mut names: Vec<String> = cmd.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect();
    if let Some(sc) = sub.and_then(|s| cmd.find_subcommand(s)) {
        names.extend(sc.get_arguments().filter_map(|a| a.get_long().map(str::to_string)));
    }
    names.retain(|n| n != "help" && n != "version");
    names
}

fn dispatch(cli: &Cli, err: &mut String) -> Res<(String, bool)> {
    match &cli.command {
        Command::Constant { d, p } => constant(cli, *d, *p),
        Command::KernelCheck { kernel, delta } => kernel_check(cli, kernel, *delta),
        Command::Energy(case) => {
            let case = build_case(cli, case, parse_functional(case)?, None, "converged", 1.0, "energy")?;
            let report = run_sweep(&case)?;
            let ok = report.verdict != Verdict::Failed;
            if let Some(e) = &report.error {
                let _ = writeln!(err, "{}: {e}", report.case_id);
            }
            Ok((emit_reports(cli.format, std::slice::from_ref(&report))?, ok))
        }
        Command::Sweep { case, target, expect, tolerance_scale } => {
            let functional = parse_functional(case)?;
            let case = build_case(cli, case, functional, target.as_deref(), expect, *tolerance_scale, "sweep")?;
            let report = run_sweep(&case)?;
            summarize(err, std::slice::from_ref(&report));
            Ok((emit_reports(cli.format, std::slice::from_ref(&report))?, report.as_expected()))
        }
        Command::Suite { only } => {
            let mut cases = builtin_suite_with(cli.seed, cli.samples)?;
            if let Some(only) = only {
                let wanted: Vec<&str> = only.split(',').map(str::trim).collect();
                if let Some(bad) = wanted.iter().find(|w| !cases.iter().any(|c| c.id == **w)) {
                    let ids: Vec<&str> = cases.iter().map(|c| c.id.as_str()).collect();
                    return usage(format!("unknown case `{bad}`; known cases: {}", ids.join(", ")));
                }
                cases.retain(|c| wanted.contains(&c.id.as_str()));
            }
            let suite = run_suite(&cases, cli.seed)?;
            summarize(err, &suite.reports);
            let text = match cli.format {
                Format::Csv => reports_to_csv(&suite.reports),
                Format::Json => to_json(&suite)?,
            };
            Ok((text, suite.all_as_expected()))
        }
        Command::Generator { kernel, field, point } => {
            let coords = parse_list(point, "point")?;
            let case = CaseArgs {
                kernel: kernel.clone(),
                field: field.clone(),
                domain: format!("kind=full,d={}", coords.len()),
                functional: "generator".into(),
                subdomain: None,
                s: None,
                mode: None,
            };
            let functional = Functional::Generator { point: coords };
            let case = build_case(cli, &case, functional, None, "converged", 1.0, "generator")?;
            let report = run_sweep(&case)?;
            if let Some(e) = &report.error {
                let _ = writeln!(err, "{}: {e}", report.case_id);
            }
            let ok = report.verdict != Verdict::Failed;
            Ok((emit_reports(cli.format, std::slice::from_ref(&report))?, ok))
        }
        Command::Counterexample => {
            let cases: Vec<SweepCase> = builtin_suite_with(cli.seed, cli.samples)?
                .into_iter()
                .filter(|c| c.id.starts_with("slit"))
                .collect();
            let suite = run_suite(&cases, cli.seed)?;
            summarize(err, &suite.reports);
            let text = match cli.format {
                Format::Csv => reports_to_csv(&suite.reports),
                Format::Json => to_json(&suite)?,
            };
            Ok((text, suite.all_as_expected()))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Res<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Numerical(format!("cannot serialize output: {e}")))
}

fn emit_reports(format: Format, reports: &[SweepReport]) -> Res<String> {
    match format {
        Format::Csv => Ok(reports_to_csv(reports)),
        Format::Json => to_json(&reports),
    }
}

fn summarize(err: &mut String, reports: &[SweepReport]) {
    for r in reports {
        let mark = if r.as_expected() { "ok" } else { "UNEXPECTED" };
        let _ = write!(err, "{mark} {}: {}", r.case_id, r.verdict);
        if r.verdict.describe() != r.verdict.as_str() && r.verdict != Verdict::Converged {
            let _ = write!(err, " ({})", r.verdict.describe());
        }
        if !r.as_expected() {
            let _ = write!(err, ", expected {}", r.expected);
        }
        if let Some(e) = &r.error {
            let _ = write!(err, "; {e}");
        }
        err.push('\n');
    }
}

fn parse_list(text: &str, what: &str) -> Res<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("`{text}` is not a list of numbers for --{what}"))))
        .collect()
}

#[derive(Serialize)]
struct ConstantRow {
    #[serde(flatten)]
    routes: Kdp,
    value_mc: f64,
    mc_stderr: f64,
    n: usize,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn constant(cli: &Cli, d: usize, p: f64) -> Res<(String, bool)> {
    let routes = Kdp::compute(d, p)?;
    let e: Vec<f64> = (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
    let (value_mc, mc_stderr) = kdp_mc(d, p, cli.samples, &mut stream(cli.seed, 0), &e)?;
    let row = ConstantRow { routes, value_mc, mc_stderr, n: cli.samples };
    let text = match cli.format {
        Format::Json => to_json(&row)?,
        Format::Csv => {
            let r = &row.routes;
            format!(
                "{CONSTANT_HEADER}\n{},{},{},{},{},{},{},{},{},{}\n",
                r.dim,
                r.p_exp,
                r.value_mean,
                r.value_closed,
                opt(r.value_printed),
                row.value_mc,
                row.mc_stderr,
                row.n,
                r.discrepancy,
                opt(r.printed_discrepancy)
            )
        }
    };
    Ok((text, true))
}

/// Replace or add `key`.
fn set(rec: &mut Record, key: &str, value: Option<String>) {
    let Some(v) = value else { return };
    let mut next = Record::new();
    for (k, old) in rec.entries() {
        if k != key {
            next.push(k, old);
        }
    }
    next.push(key, v);
    *rec = next;
}

/// Kernel spec plus ε grid from the flags; the grid defaults to the record's
/// ε, then to the family's default grid.
fn kernel_spec(args: &KernelArgs) -> Res<(KernelSpec, Option<Vec<f64>>)> {
    let mut rec = match &args.kernel {
        Some(text) => Record::parse(text)?,
        None => Record::new(),
    };
    rec.check_keys("kernel", &KERNEL_KEYS)?;
    let num = |v: Option<f64>| v.map(|x| x.to_string());
    set(&mut rec, "family", args.family.clone());
    set(&mut rec, "d", args.d.map(|v| v.to_string()));
    set(&mut rec, "p", num(args.p));
    set(&mut rec, "beta", num(args.beta));
    set(&mut rec, "eps0", num(args.eps0));
    set(&mut rec, "base_eps", num(args.base_eps));
    let grid = match &args.eps {
        Some(text) => Some(parse_list(text, "eps")?),
        None => rec.f64("eps")?.map(|e| vec![e]),
    };
    if rec.get("family").is_none() {
        return usage(format!("a kernel needs `family`; valid kernel keys: {}", KERNEL_KEYS.join(", ")));
    }
    // the spec needs some ε to parse; the grid replaces it
    let placeholder = grid.as_ref().map(|g| g[0].to_string());
    let eps = placeholder.or_else(|| rec.get("eps").map(str::to_string)).or(Some("0.1".into()));
    set(&mut rec, "eps", eps);
    Ok((KernelSpec::from_record(&rec)?, grid))
}

fn kernel_check(cli: &Cli, args: &KernelArgs, delta: f64) -> Res<(String, bool)> {
    let (spec, grid) = kernel_spec(args)?;
    let family = spec.family::<f64>()?;
    let grid = grid.unwrap_or_else(|| family.default_grid());
    #[derive(Serialize)]
    struct Row {
        family: String,
        d: usize,
        p: f64,
        eps: f64,
        normalization: f64,
        delta: f64,
        mass_outside: f64,
        normalized: bool,
    }
    let mut rows = Vec::new();
    for &eps in &grid {
        let k = spec.with_eps(eps).build::<f64>()?;
        let normalization = k.normalization()?;
        rows.push(Row {
            family: spec.family.as_str().to_string(),
            d: spec.d,
            p: spec.p,
            eps,
            normalization,
            delta,
            mass_outside: k.mass_outside(delta)?,
            normalized: (normalization - 1.0).abs() <= crate::kernels::NORMALIZATION_TOL,
        });
    }
    let ok = rows.iter().all(|r| r.normalized);
    let text = match cli.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = format!("{KERNEL_CHECK_HEADER}\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.family, r.d, r.p, r.eps, r.normalization, r.delta, r.mass_outside, r.normalized
                );
            }
            s
        }
    };
    Ok((text, ok))
}

fn parse_functional(args: &CaseArgs) -> Res<Functional> {
    let f = args.functional.as_str();
    Ok(match f {
        "energy" => Functional::Energy,
        "cross-energy" => Functional::CrossEnergy,
        "local-measure" => match &args.subdomain {
            Some(s) => Functional::LocalMeasure { subdomain: Domain::<f64>::parse(s)?.id() },
            None => return usage("local-measure needs --subdomain"),
        },
        "dirac-pairing" => Functional::DiracPairing,
        "gagliardo" => match args.s {
            Some(s) => Functional::TruncatedGagliardo { s },
            None => return usage("gagliardo needs --s"),
        },
        _ => {
            if let Some(v) = f.strip_prefix("fractional-") {
                Functional::Fractional { variant: FractionalVariant::parse(v)? }
            } else {
                return usage(format!(
                    "unknown functional `{f}`; expected energy, cross-energy, local-measure, dirac-pairing, \
                     fractional-order, fractional-short-range, fractional-long-range or gagliardo"
                ));
            }
        }
    })
}

fn parse_target(text: &str) -> Res<TargetKind> {
    Ok(match text {
        "grad-lp" => TargetKind::GradLp,
        "bv-seminorm" => TargetKind::BvSeminorm,
        "zero" => TargetKind::Zero,
        "pointwise" => TargetKind::Pointwise,
        "divergent" => TargetKind::Divergent,
        other => {
            return usage(format!(
                "unknown target `{other}`; expected grad-lp, bv-seminorm, zero, pointwise or divergent"
            ))
        }
    })
}

fn parse_verdict(text: &str) -> Res<Verdict> {
    [Verdict::Converged, Verdict::DivergedFromTarget, Verdict::Diverged, Verdict::Inconclusive, Verdict::Failed]
        .into_iter()
        .find(|v| v.as_str() == text)
        .map_or_else(
            || {
                usage(format!(
                    "unknown verdict `{text}`; expected converged, diverged-from-target, diverged, inconclusive or failed"
                ))
            },
            Ok,
        )
}

fn parse_mode(text: &str) -> Res<Option<Mode>> {
    match text {
        "auto" => Ok(None),
        "mc" => Ok(Some(Mode::MonteCarlo)),
        other => Ok(Some(Mode::parse(other)?)),
    }
}

fn default_target(functional: &Functional, field: &Field<f64>, p: f64) -> TargetKind {
    match functional {
        Functional::CrossEnergy => TargetKind::Zero,
        Functional::Generator { .. } | Functional::DiracPairing => TargetKind::Pointwise,
        Functional::TruncatedGagliardo { .. } => TargetKind::Divergent,
        _ if field.regularity() == Regularity::PiecewiseConstant => {
            if p == 1.0 {
                TargetKind::BvSeminorm
            } else {
                TargetKind::Divergent
            }
        }
        _ => TargetKind::GradLp,
    }
}

fn build_case(
    cli: &Cli,
    args: &CaseArgs,
    functional: Functional,
    target: Option<&str>,
    expect: &str,
    tolerance_scale: f64,
    id: &str,
) -> Res<SweepCase> {
    let field = Field::<f64>::parse(&args.field)?;
    let domain = Domain::<f64>::parse(&args.domain)?;
    let kernelless = matches!(functional, Functional::Fractional { .. } | Functional::TruncatedGagliardo { .. });
    let (kernel, grid, p) = if kernelless {
        let p = match args.kernel.p {
            Some(p) => p,
            None => return usage("this functional needs --p"),
        };
        let grid = match (&args.kernel.eps, &functional) {
            (Some(text), _) => parse_list(text, "eps")?,
            (None, Functional::Fractional { variant }) => variant.default_grid(p),
            (None, _) => vec![1e-2, 1e-3, 1e-4, 1e-5],
        };
        (None, grid, p)
    } else {
        let mut kargs = args.kernel.clone();
        if kargs.d.is_none() && kargs.kernel.as_deref().is_none_or(|k| !k.contains("d=")) {
            kargs.d = Some(domain.dim());
        }
        let (spec, grid) = kernel_spec(&kargs)?;
        let grid = match grid {
            Some(g) => g,
            None => spec.family::<f64>()?.default_grid(),
        };
        let p = spec.p;
        (Some(spec), grid, p)
    };
    let target_kind = match target {
        Some(t) => parse_target(t)?,
        None => default_target(&functional, &field, p),
    };
    let mode = match &args.mode {
        Some(m) => parse_mode(m)?,
        None => None,
    };
    let mut case = SweepCase {
        id: id.to_string(),
        description: format!("{} of `{}` on `{}`", functional.as_str(), field.id(), domain.id()),
        functional,
        field: field.id(),
        domain: domain.id(),
        kernel,
        p,
        eps_grid: grid,
        target_kind,
        target_value: None,
        tolerance_scale,
        expected: parse_verdict(expect)?,
        mode,
        n_samples: cli.samples,
        seed: cli.seed,
    };
    case.target_value = match case.compute_target() {
        Ok(t) => t,
        // plain evaluation does not need a target
        Err(_) if id != "sweep" => {
            case.target_kind = TargetKind::Divergent;
            None
        }
        Err(e) => return Err(e.into()),
    };
    case.validate()?;
    Ok(case)
}

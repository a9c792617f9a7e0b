//! ε-sweeps of a functional towards its limit, with verdicts and the
//! built-in suite.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::kdp_closed;
use crate::energy::{
    cross_energy, dirac_pairing, energy, gagliardo, generator, local_measure, FractionalVariant, Mode, Options,
    DEFAULT_SAMPLES,
};
use crate::error::{invalid, Error, Result};
use crate::fields::Field;
use crate::geometry::Domain;
use crate::kernels::{FamilyTag, KernelSpec};

/// Accepted relative error of a converged sweep.
pub const REL_TOL: f64 = 0.05;
/// Log-fit slope above which a cutoff sweep counts as divergent.
pub const SLOPE_THRESHOLD: f64 = 0.5;
/// Relative change between the last two values of a settled sweep.
pub const SETTLE_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// K_{d,p} ‖∇u‖^p (times the scaling constant of fractional sweeps).
    GradLp,
    /// K_{d,1} |u|_BV.
    BvSeminorm,
    Zero,
    /// A pointwise limit: -K_{d,2} Δu(x) / 2 for the generator, φ(0) for the
    /// pairing.
    Pointwise,
    /// No finite limit expected.
    Divergent,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::GradLp => "grad-lp",
            TargetKind::BvSeminorm => "bv-seminorm",
            TargetKind::Zero => "zero",
            TargetKind::Pointwise => "pointwise",
            TargetKind::Divergent => "divergent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    /// Values settle, but away from the target.
    DivergedFromTarget,
    Diverged,
    Inconclusive,
    /// An estimator error stopped the sweep.
    Failed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::DivergedFromTarget => "diverged-from-target",
            Verdict::Diverged => "diverged",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Failed => "failed",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Verdict::Converged => "converged to the target",
            Verdict::DivergedFromTarget => "limit exists but ≠ K_{d,p}‖∇u‖^p",
            Verdict::Diverged => "no finite limit",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Failed => "estimator failed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The quantity evaluated at each ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Functional {
    Energy,
    CrossEnergy,
    LocalMeasure { subdomain: String },
    Generator { point: Vec<f64> },
    DiracPairing,
    Fractional { variant: FractionalVariant },
    /// Gagliardo seminorm of order s; the grid holds the cutoffs t.
    TruncatedGagliardo { s: f64 },
}

impl Functional {
    pub fn as_str(&self) -> &'static str {
        match self {
            Functional::Energy => "energy",
            Functional::CrossEnergy => "cross-energy",
            Functional::LocalMeasure { .. } => "local-measure",
            Functional::Generator { .. } => "generator",
            Functional::DiracPairing => "dirac-pairing",
            Functional::Fractional { .. } => "fractional",
            Functional::TruncatedGagliardo { .. } => "gagliardo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub id: String,
    pub description: String,
    pub functional: Functional,
    /// Field record, e.g. `kind=linear,slope=1`.
    pub field: String,
    /// Domain record, e.g. `kind=intervals,bounds=0:1`.
    pub domain: String,
    /// Kernel family; its ε is replaced by each grid value.
    pub kernel: Option<KernelSpec>,
    pub p: f64,
    pub eps_grid: Vec<f64>,
    pub target_kind: TargetKind,
    /// `None` for divergent targets.
    pub target_value: Option<f64>,
    /// Magnitude a zero target is compared against.
    pub tolerance_scale: f64,
    pub expected: Verdict,
    pub mode: Option<Mode>,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub mode: Mode,
    pub abs_err: Option<f64>,
    /// `None` when the target is zero or absent.
    pub rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub case_id: String,
    pub description: String,
    pub family: String,
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub target_kind: TargetKind,
    pub target: Option<f64>,
    pub rows: Vec<SweepRow>,
    pub verdict: Verdict,
    pub expected: Verdict,
    pub final_error: Option<f64>,
    /// Slope of value against ln(1/ε), for divergent targets.
    pub slope: Option<f64>,
    pub error: Option<String>,
}

impl SweepReport {
    pub fn as_expected(&self) -> bool {
        self.verdict == self.expected
    }
}

/// All reports of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub reports: Vec<SweepReport>,
}

impl SuiteReport {
    pub fn all_as_expected(&self) -> bool {
        self.reports.iter().all(SweepReport::as_expected)
    }
}

pub const CSV_HEADER: &str = "case_id,family,d,p,eps,value,stderr,n,target,mode,seed";

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// One CSV line per (case, ε).
pub fn reports_to_csv(reports: &[SweepReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        for row in &r.rows {
            let target = r.target.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&r.case_id),
                csv_field(&r.family),
                r.d,
                r.p,
                row.eps,
                row.value,
                row.stderr,
                row.n,
                target,
                row.mode,
                r.seed
            );
        }
    }
    out
}

impl SweepCase {
    pub fn parsed_field(&self) -> Result<Field<f64>> {
        Field::parse(&self.field)
    }

    pub fn parsed_domain(&self) -> Result<Domain<f64>> {
        Domain::parse(&self.domain)
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.parsed_domain()?.dim())
    }

    /// Family label for tables.
    pub fn family_label(&self) -> String {
        match (&self.kernel, &self.functional) {
            (Some(k), _) => k.family.as_str().to_string(),
            (None, Functional::Fractional { variant }) => format!("fractional-{variant}"),
            (None, Functional::TruncatedGagliardo { .. }) => "gagliardo".to_string(),
            (None, _) => FamilyTag::Custom.as_str().to_string(),
        }
    }

    fn options(&self) -> Options {
        Options {
            mode: self.mode,
            n_samples: self.n_samples,
            seed: self.seed,
        }
    }

    /// Limit target recomputed from the field, the domain and K_{d,p}.
    pub fn compute_target(&self) -> Result<Option<f64>> {
        let field = self.parsed_field()?;
        let domain = self.parsed_domain()?;
        let d = domain.dim();
        let region = match &self.functional {
            Functional::LocalMeasure { subdomain } => Domain::parse(subdomain)?,
            _ => domain.clone(),
        };
        let factor = match &self.functional {
            Functional::Fractional { variant } => variant.limit_factor(d, self.p),
            _ => 1.0,
        };
        let target = match self.target_kind {
            TargetKind::Divergent => None,
            TargetKind::Zero => Some(0.0),
            TargetKind::GradLp => Some(factor * kdp_closed(d, self.p)? * field.grad_lp_norm(&region, self.p)?),
            TargetKind::BvSeminorm => Some(factor * kdp_closed(d, 1.0)? * field.bv_seminorm(&region)?),
            TargetKind::Pointwise => match &self.functional {
                Functional::Generator { point } => Some(-0.5 * kdp_closed(d, 2.0)? * field.laplacian(point)?),
                Functional::DiracPairing => Some(field.eval(&vec![0.0; d])),
                other => {
                    return invalid(format!("no pointwise target for the {} functional", other.as_str()))
                }
            },
        };
        // + 0.0 turns -0 into 0
        Ok(target.map(|t| t + 0.0))
    }

    /// Fill `target_value` from [`Self::compute_target`].
    pub fn with_computed_target(mut self) -> Result<Self> {
        self.target_value = self.compute_target()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_grid.is_empty() {
            return invalid(format!("case `{}` has an empty ε grid", self.id));
        }
        if self.eps_grid.windows(2).any(|w| !(w[1] < w[0])) || self.eps_grid.iter().any(|e| !(*e > 0.0)) {
            return invalid(format!("case `{}`: ε grid must be positive and strictly decreasing", self.id));
        }
        let d = self.dim()?;
        if let Some(spec) = &self.kernel {
            if spec.d != d || spec.p != self.p {
                return invalid(format!("case `{}`: kernel d/p disagree with the case", self.id));
            }
            let max = spec.family::<f64>()?.eps_max();
            if self.eps_grid[0] >= max {
                return invalid(format!("case `{}`: ε = {} is outside (0, {max})", self.id, self.eps_grid[0]));
            }
        }
        match &self.functional {
            Functional::Fractional { variant } => {
                if self.eps_grid[0] >= variant.eps_max(self.p) {
                    return invalid(format!("case `{}`: ε grid outside the {variant} range", self.id));
                }
            }
            Functional::TruncatedGagliardo { s } if !(*s > 0.0 && *s < 1.0) => {
                return invalid(format!("case `{}`: s = {s} must lie in (0, 1)", self.id));
            }
            Functional::TruncatedGagliardo { .. } => {}
            _ if self.kernel.is_none() => {
                return invalid(format!("case `{}` needs a kernel family", self.id));
            }
            _ => {}
        }
        if self.target_kind == TargetKind::Divergent && self.target_value.is_some() {
            return invalid(format!("case `{}`: divergent targets carry no value", self.id));
        }
        if self.target_kind != TargetKind::Divergent && self.target_value.is_none() {
            return invalid(format!("case `{}` has no target value", self.id));
        }
        Ok(())
    }

    /// (value, stderr, n, mode) at one ε.
    pub fn evaluate(&self, eps: f64) -> Result<(f64, f64, usize, Mode)> {
        let field = self.parsed_field()?;
        let domain = self.parsed_domain()?;
        let opts = self.options();
        let kernel = || -> Result<_> {
            self.kernel
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("case `{}` needs a kernel family", self.id)))?
                .with_eps(eps)
                .build::<f64>()
        };
        let est = match &self.functional {
            Functional::Energy => energy(&field, &domain, &kernel()?, &opts)?,
            Functional::CrossEnergy => cross_energy(&field, &domain, &kernel()?, &opts)?,
            Functional::LocalMeasure { subdomain } => {
                local_measure(&field, &domain, &Domain::parse(subdomain)?, &kernel()?, &opts)?
            }
            Functional::Generator { point } => {
                return Ok((generator(&field, point, &kernel()?)?, 0.0, 0, Mode::Quadrature))
            }
            Functional::DiracPairing => return Ok((dirac_pairing(&field, &kernel()?)?, 0.0, 0, Mode::Quadrature)),
            Functional::Fractional { variant } => variant.value(&field, &domain, self.p, eps, &opts)?,
            Functional::TruncatedGagliardo { s } => gagliardo(&field, &domain, *s, self.p, eps, &opts)?,
        };
        Ok((est.value, est.stderr, est.n_samples, est.mode))
    }

    /// A fractional-scaling case with its target filled in.
    pub fn fractional(
        id: &str,
        field: &Field<f64>,
        domain: &Domain<f64>,
        p: f64,
        variant: FractionalVariant,
        opts: &Options,
    ) -> Result<Self> {
        SweepCase {
            id: id.to_string(),
            description: format!("{variant} fractional scaling"),
            functional: Functional::Fractional { variant },
            field: field.id(),
            domain: domain.id(),
            kernel: None,
            p,
            eps_grid: variant.default_grid(p),
            target_kind: TargetKind::GradLp,
            target_value: None,
            tolerance_scale: 1.0,
            expected: Verdict::Converged,
            mode: opts.mode,
            n_samples: opts.n_samples,
            seed: opts.seed,
        }
        .with_computed_target()
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Verdict of a finished sweep.
///
/// With a target: converged when the last error is within
/// max(3·stderr, 5%·|target|) (the scale replaces |target| for zero
/// targets) and the errors do not increase over the last three ε. A
/// sweep whose last step moved by less than 5% while the gap to the target
/// is larger than the tolerance plus four such steps settled elsewhere.
///
/// Without a target: divergent when value grows faster than
/// 0.5·ln(1/ε), converged when the last step moved by less than 1%.
pub fn judge(rows: &[SweepRow], target: Option<f64>, tolerance_scale: f64) -> (Verdict, Option<f64>) {
    let Some(last) = rows.last() else {
        return (Verdict::Inconclusive, None);
    };
    let prev = rows.len().checked_sub(2).map(|i| &rows[i]);
    let step = prev.map(|p| (last.value - p.value).abs());
    let Some(target) = target else {
        if rows.len() < 2 {
            return (Verdict::Inconclusive, None);
        }
        let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.eps).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let slope = ls_slope(&xs, &ys);
        let verdict = if slope > SLOPE_THRESHOLD {
            Verdict::Diverged
        } else if step.is_some_and(|s| s < 0.01 * last.value.abs()) {
            Verdict::Converged
        } else {
            Verdict::Inconclusive
        };
        return (verdict, Some(slope));
    };
    let err = |r: &SweepRow| (r.value - target).abs();
    let scale = if target == 0.0 { tolerance_scale } else { target.abs() };
    let tol = (3.0 * last.stderr).max(REL_TOL * scale);
    let tail = &rows[rows.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| {
        let slack = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        err(&w[1]) <= err(&w[0]) + slack
    });
    if err(last) <= tol && monotone {
        return (Verdict::Converged, None);
    }
    if let Some(step) = step {
        let settled = step <= SETTLE_TOL * last.value.abs().max(scale);
        if settled && err(last) > tol + 4.0 * step {
            return (Verdict::DivergedFromTarget, None);
        }
    }
    (Verdict::Inconclusive, None)
}

fn make_row(eps: f64, value: f64, stderr: f64, n: usize, mode: Mode, target: Option<f64>) -> SweepRow {
    let abs_err = target.map(|t| (value - t).abs());
    let rel_err = match (abs_err, target) {
        (Some(a), Some(t)) if t != 0.0 => Some(a / t.abs()),
        _ => None,
    };
    SweepRow {
        eps,
        value,
        stderr,
        n,
        mode,
        abs_err,
        rel_err,
    }
}

/// Evaluate every grid point and judge the sweep. Estimator errors end
/// the sweep with verdict `Failed`, keeping the rows computed so far.
pub fn run_sweep(case: &SweepCase) -> Result<SweepReport> {
    case.validate()?;
    let target = case.target_value;
    let mut rows = Vec::with_capacity(case.eps_grid.len());
    let mut error = None;
    for &eps in &case.eps_grid {
        match case.evaluate(eps) {
            Ok((value, stderr, n, mode)) => rows.push(make_row(eps, value, stderr, n, mode, target)),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let (verdict, slope) = if error.is_some() {
        (Verdict::Failed, None)
    } else {
        judge(&rows, target, case.tolerance_scale)
    };
    Ok(SweepReport {
        case_id: case.id.clone(),
        description: case.description.clone(),
        family: case.family_label(),
        d: case.dim()?,
        p: case.p,
        seed: case.seed,
        target_kind: case.target_kind,
        target,
        final_error: rows.last().and_then(|r| r.abs_err),
        rows,
        verdict,
        expected: case.expected,
        slope,
        error,
    })
}

/// Run cases in parallel; reports come back in input order.
pub fn run_suite(cases: &[SweepCase], seed: u64) -> Result<SuiteReport> {
    let reports = cases.par_iter().map(run_sweep).collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport { seed, reports })
}

struct Builder {
    seed: u64,
    n_samples: usize,
    cases: Vec<SweepCase>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn add(
        &mut self,
        id: &str,
        description: &str,
        functional: Functional,
        field: Field<f64>,
        domain: Domain<f64>,
        kernel: Option<KernelSpec>,
        p: f64,
        eps_grid: Vec<f64>,
        target_kind: TargetKind,
        tolerance_scale: f64,
        expected: Verdict,
        mode: Option<Mode>,
    ) -> Result<()> {
        let index = self.cases.len() as u64;
        let case = SweepCase {
            id: id.to_string(),
            description: description.to_string(),
            functional,
            field: field.id(),
            domain: domain.id(),
            kernel,
            p,
            eps_grid,
            target_kind,
            target_value: None,
            tolerance_scale,
            expected,
            mode,
            n_samples: self.n_samples,
            seed: self.seed.wrapping_add(index),
        }
        .with_computed_target()?;
        case.validate()?;
        self.cases.push(case);
        Ok(())
    }
}

/// The standard cases, one or more per limit statement.
pub fn builtin_suite(seed: u64) -> Vec<SweepCase> {
    builtin_suite_with(seed, DEFAULT_SAMPLES).expect("built-in cases are valid")
}

pub fn builtin_suite_with(seed: u64, n_samples: usize) -> Result<Vec<SweepCase>> {
    use Functional as Fu;
    use TargetKind as T;
    use Verdict as V;

    let grid = |xs: &[f64]| xs.to_vec();
    let std_grid = [0.4, 0.2, 0.1, 0.05, 0.02];
    let det = Some(Mode::Deterministic1d);
    let mc = Some(Mode::MonteCarlo);
    let unit = Domain::interval(0.0, 1.0)?;
    let sym = Domain::interval(-1.0, 1.0)?;
    let x = Field::identity_1d();
    let line = Domain::FullSpace { dim: 1 };
    let mut b = Builder {
        seed,
        n_samples,
        cases: Vec::new(),
    };

    b.add(
        "sobolev-1d-stable",
        "u = x on (0,1), stable kernels, p = 2",
        Fu::Energy,
        x.clone(),
        unit.clone(),
        Some(KernelSpec::stable(1, 2.0, 0.4)),
        2.0,
        grid(&std_grid),
        T::GradLp,
        1.0,
        V::Converged,
        det,
    )?;
    b.add(
        "sobolev-1d-truncated",
        "Gaussian on (-1,1), truncated power kernels, p = 2",
        Fu::Energy,
        Field::Gaussian,
        sym.clone(),
        Some(KernelSpec::truncated_power(1, 2.0, 0.0, 0.4)),
        2.0,
        grid(&std_grid),
        T::GradLp,
        1.0,
        V::Converged,
        det,
    )?;
    b.add(
        "sobolev-2d-mc",
        "linear field on the unit square, stable kernels, p = 2",
        Fu::Energy,
        Field::linear(vec![1.0, 0.5], 0.0),
        Domain::unit_box(2),
        Some(KernelSpec::stable(2, 2.0, 0.4)),
        2.0,
        grid(&std_grid),
        T::GradLp,
        1.0,
        V::Converged,
        mc,
    )?;
    b.add(
        "bv-1d-stable",
        "sign jump on (-1,1), stable kernels, p = 1",
        Fu::Energy,
        Field::SignJump,
        sym.clone(),
        Some(KernelSpec::stable(1, 1.0, 0.4)),
        1.0,
        grid(&std_grid),
        T::BvSeminorm,
        1.0,
        V::Converged,
        det,
    )?;
    b.add(
        "bv-2d-mc",
        "indicator of the disc of radius 1/2 in the unit disc, stable kernels, p = 1",
        Fu::Energy,
        Field::IndicatorBall {
            center: vec![0.0, 0.0],
            radius: 0.5,
            inside: 1.0,
            outside: 0.0,
        },
        Domain::ball(vec![0.0, 0.0], 1.0)?,
        Some(KernelSpec::stable(2, 1.0, 0.4)),
        1.0,
        grid(&std_grid),
        T::BvSeminorm,
        1.0,
        V::Converged,
        mc,
    )?;
    b.add(
        "constant-zero",
        "constant field has zero energy",
        Fu::Energy,
        Field::Constant(1.5),
        unit.clone(),
        Some(KernelSpec::stable(1, 2.0, 0.4)),
        2.0,
        grid(&std_grid),
        T::Zero,
        1.0,
        V::Converged,
        det,
    )?;
    for p in [1.0, 2.0] {
        b.add(
            &format!("cross-boundary-p{p}"),
            "tent on (0,1): pairs across the boundary",
            Fu::CrossEnergy,
            Field::Tent,
            unit.clone(),
            Some(KernelSpec::stable(1, p, 0.4)),
            p,
            grid(&std_grid),
            T::Zero,
            Field::Tent.sobolev_norm_pow(&line, p)?,
            V::Converged,
            det,
        )?;
    }
    b.add(
        "local-sobolev",
        "u = x, mass of [0.25,0.75] inside (0,1), p = 2",
        Fu::LocalMeasure {
            subdomain: Domain::interval(0.25, 0.75)?.id(),
        },
        x.clone(),
        unit.clone(),
        Some(KernelSpec::stable(1, 2.0, 0.4)),
        2.0,
        grid(&std_grid),
        T::GradLp,
        1.0,
        V::Converged,
        det,
    )?;
    b.add(
        "local-bv",
        "sign jump, mass of [-0.5,0.5] inside (-1,1), p = 1",
        Fu::LocalMeasure {
            subdomain: Domain::interval(-0.5, 0.5)?.id(),
        },
        Field::SignJump,
        sym.clone(),
        Some(KernelSpec::stable(1, 1.0, 0.4)),
        1.0,
        grid(&std_grid),
        T::BvSeminorm,
        1.0,
        V::Converged,
        det,
    )?;
    for d in [1usize, 2] {
        b.add(
            &format!("generator-{d}d"),
            "generator on the Gaussian at the origin, p = 2",
            Fu::Generator { point: vec![0.0; d] },
            Field::Gaussian,
            Domain::FullSpace { dim: d },
            Some(KernelSpec::stable(d, 2.0, 0.4)),
            2.0,
            grid(&std_grid),
            T::Pointwise,
            1.0,
            V::Converged,
            None,
        )?;
    }
    b.add(
        "dirac-bump",
        "pairing with a bump, truncated power kernels, p = 1",
        Fu::DiracPairing,
        Field::bump(1.0),
        Domain::FullSpace { dim: 1 },
        Some(KernelSpec::truncated_power(1, 1.0, 0.0, 0.4)),
        1.0,
        grid(&std_grid),
        T::Pointwise,
        1.0,
        V::Converged,
        None,
    )?;
    b.add(
        "dirac-odd",
        "pairing with an odd bump vanishes, p = 1",
        Fu::DiracPairing,
        Field::OddBump { radius: 1.0 },
        Domain::FullSpace { dim: 2 },
        Some(KernelSpec::stable(2, 1.0, 0.4)),
        1.0,
        grid(&std_grid),
        T::Zero,
        1.0,
        V::Converged,
        None,
    )?;
    for variant in FractionalVariant::ALL {
        b.add(
            &format!("fractional-{variant}"),
            "u = x on (0,1), fractional scaling, p = 2",
            Fu::Fractional { variant },
            x.clone(),
            unit.clone(),
            None,
            2.0,
            variant.default_grid(2.0),
            T::GradLp,
            1.0,
            V::Converged,
            det,
        )?;
    }
    b.add(
        "slit-1d",
        "sign jump on the slit interval, p = 1: the energy keeps the jump",
        Fu::Energy,
        Field::SignJump,
        Domain::SlitInterval,
        Some(KernelSpec::stable(1, 1.0, 0.4)),
        1.0,
        grid(&std_grid),
        T::BvSeminorm,
        1.0,
        V::DivergedFromTarget,
        det,
    )?;
    b.add(
        "slit-2d-mc",
        "sign jump on the slit disc, p = 1",
        Fu::Energy,
        Field::SignJump,
        Domain::slit_ball(2),
        Some(KernelSpec::stable(2, 1.0, 0.4)),
        1.0,
        grid(&std_grid),
        T::BvSeminorm,
        1.0,
        V::DivergedFromTarget,
        mc,
    )?;
    for (id, s, expected) in [
        ("slit-gagliardo-critical", 0.5, V::Diverged),
        ("slit-gagliardo-subcritical", 0.25, V::Converged),
    ] {
        b.add(
            id,
            "sign jump on the slit interval: truncated Gagliardo seminorm, p = 2",
            Fu::TruncatedGagliardo { s },
            Field::SignJump,
            Domain::SlitInterval,
            None,
            2.0,
            grid(&[1e-2, 1e-3, 1e-4, 1e-5]),
            T::Divergent,
            1.0,
            expected,
            det,
        )?;
    }
    Ok(b.cases)
}

#[cfg(test)]
mod tests;

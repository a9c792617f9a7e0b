use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::quad::integrate;
use crate::scalar::Real;
use crate::special::sphere_area;

use super::profile::{Piece, Profile, Shape};
use super::spec::KernelSpec;
use super::{radial_tol, FamilyTag, RadialKernel};

/// Default decreasing ε grid.
pub const DEFAULT_EPS_GRID: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.02];

fn check_common<F: Real>(dim: usize, p_exp: F) -> Result<()> {
    if dim == 0 {
        return invalid("dimension must be >= 1");
    }
    if !(p_exp >= F::one()) {
        return invalid(format!("exponent p = {p_exp} must be >= 1"));
    }
    Ok(())
}

/// a_{ε,d,p} = ε(p - ε) / (p |S^{d-1}|).
pub fn stable_coefficient<F: Real>(dim: usize, p_exp: F, eps: F) -> F {
    eps * (p_exp - eps) / (p_exp * sphere_area::<F>(dim))
}

/// Stable-class kernel a_{ε,d,p} |h|^{-d-p+ε}, 0 < ε < p.
pub fn make_stable<F: Real>(dim: usize, p_exp: F, eps: F) -> Result<RadialKernel<F>> {
    check_common(dim, p_exp)?;
    if !(eps > F::zero() && eps < p_exp) {
        return invalid(format!("stable kernel needs 0 < eps < p, got eps = {eps}, p = {p_exp}"));
    }
    let coef = stable_coefficient(dim, p_exp, eps);
    let exponent = eps - p_exp - F::of_usize(dim);
    let profile = Profile::single(F::zero(), F::infinity(), Shape::Power { coef, exponent });
    let spec = KernelSpec::stable(dim, p_exp.to_f64_lossy(), eps.to_f64_lossy());
    Ok(RadialKernel::from_profile(dim, p_exp, profile)?.tagged(FamilyTag::Stable, Some(eps), Some(spec)))
}

/// Rescaling of a normalized base kernel at scale ε ∈ (0, 1].
pub fn make_rescaled<F: Real>(base: &RadialKernel<F>, eps: F) -> Result<RadialKernel<F>> {
    if !(eps > F::zero() && eps <= F::one()) {
        return invalid(format!("rescaling needs 0 < eps <= 1, got {eps}"));
    }
    base.check_normalized()?;
    let profile = base.profile().rescaled(base.dim(), base.p_exp(), eps);
    let spec = base
        .spec()
        .and_then(|b| KernelSpec::rescaled_from(b, eps.to_f64_lossy()));
    Ok(RadialKernel::from_profile(base.dim(), base.p_exp(), profile)?
        .tagged(FamilyTag::Rescaled, Some(eps), spec))
}

/// (d+β) / (|S^{d-1}| ε^{d+β}) |h|^{β-p} on the ball B_ε.
pub fn make_truncated_power<F: Real>(dim: usize, p_exp: F, beta: F, eps: F) -> Result<RadialKernel<F>> {
    check_common(dim, p_exp)?;
    let d = F::of_usize(dim);
    if !(beta > -d) {
        return invalid(format!("truncated power needs beta > -d, got beta = {beta}, d = {dim}"));
    }
    if !(eps > F::zero() && eps < F::one()) {
        return invalid(format!("truncated power needs 0 < eps < 1, got {eps}"));
    }
    let coef = (d + beta) / (sphere_area::<F>(dim) * eps.powf(d + beta));
    let profile = Profile::single(F::zero(), eps, Shape::Power { coef, exponent: beta - p_exp });
    let spec = KernelSpec::truncated_power(dim, p_exp.to_f64_lossy(), beta.to_f64_lossy(), eps.to_f64_lossy());
    Ok(RadialKernel::from_profile(dim, p_exp, profile)?
        .tagged(FamilyTag::TruncatedPower, Some(eps), Some(spec)))
}

fn check_window<F: Real>(eps: F, eps0: F) -> Result<()> {
    if !(eps > F::zero() && eps < eps0 && eps0 < F::one()) {
        return invalid(format!("need 0 < eps < eps0 < 1, got eps = {eps}, eps0 = {eps0}"));
    }
    Ok(())
}

/// Log-limiting truncated kernel |h|^{-d-p} / (|S^{d-1}| log(ε₀/ε)) on
/// the annulus ε < |h| ≤ ε₀.
pub fn make_log_limit<F: Real>(dim: usize, p_exp: F, eps: F, eps0: F) -> Result<RadialKernel<F>> {
    check_common(dim, p_exp)?;
    check_window(eps, eps0)?;
    let coef = F::one() / (sphere_area::<F>(dim) * (eps0 / eps).ln());
    let exponent = -F::of_usize(dim) - p_exp;
    let profile = Profile::new(vec![Piece {
        lo: eps,
        hi: eps0,
        shape: Shape::Power { coef, exponent },
    }]);
    let spec = KernelSpec::log_limit(dim, p_exp.to_f64_lossy(), eps.to_f64_lossy(), eps0.to_f64_lossy());
    Ok(RadialKernel::from_profile(dim, p_exp, profile)?.tagged(FamilyTag::LogLimit, Some(eps), Some(spec)))
}

fn t_integral<F: Real>(lower: F, t_power: F, one_minus_power: F) -> Result<F> {
    let r = integrate(
        |t: F| t.powf(t_power) * (F::one() - t).powf(one_minus_power),
        lower,
        F::one(),
        &radial_tol(),
    )?;
    Ok(r.value)
}

/// b_ε = ε^{d+β} ∫_{ε/(ε+ε₀)}^1 t^{-d-β-1} (1-t)^{d-1} dt.
pub fn b_eps_power<F: Real>(dim: usize, beta: F, eps: F, eps0: F) -> Result<F> {
    let d = F::of_usize(dim);
    let lower = eps / (eps + eps0);
    Ok(eps.powf(d + beta) * t_integral(lower, -d - beta - F::one(), d - F::one())?)
}

/// b_ε = |log ε|^{-1} ∫_{ε/(ε+ε₀)}^1 t^{-1} (1-t)^{d-1} dt.
pub fn b_eps_log<F: Real>(dim: usize, eps: F, eps0: F) -> Result<F> {
    let d = F::of_usize(dim);
    let lower = eps / (eps + eps0);
    Ok(t_integral(lower, -F::one(), d - F::one())? / eps.ln().abs())
}

/// b_ε = |log ε|^{-1} ∫_{ε/(ε+ε₀)}^1 t^{-1} (1-t)^{d+p-1} dt.
pub fn b_eps_log_ball<F: Real>(dim: usize, p_exp: F, eps: F, eps0: F) -> Result<F> {
    let d = F::of_usize(dim);
    let lower = eps / (eps + eps0);
    Ok(t_integral(lower, -F::one(), d + p_exp - F::one())? / eps.ln().abs())
}

/// (|h|+ε)^β |h|^{-p} / (|S^{d-1}| b_ε) on B_{ε₀}.
pub fn make_smoothed_power<F: Real>(dim: usize, p_exp: F, beta: F, eps: F, eps0: F) -> Result<RadialKernel<F>> {
    check_common(dim, p_exp)?;
    check_window(eps, eps0)?;
    if !(beta > -F::of_usize(dim)) {
        return invalid(format!("smoothed power needs beta > -d, got {beta}"));
    }
    let b = b_eps_power(dim, beta, eps, eps0)?;
    let coef = F::one() / (sphere_area::<F>(dim) * b);
    let profile = Profile::single(F::zero(), eps0, Shape::Shifted { coef, shift: eps, beta, q: p_exp });
    let spec = KernelSpec::smoothed_power(
        dim,
        p_exp.to_f64_lossy(),
        beta.to_f64_lossy(),
        eps.to_f64_lossy(),
        eps0.to_f64_lossy(),
    );
    Ok(RadialKernel::from_profile(dim, p_exp, profile)?
        .tagged(FamilyTag::SmoothedPower, Some(eps), Some(spec)))
}

/// (|h|+ε)^{-d} |h|^{-p} / (|S^{d-1}| |log ε| b_ε) on B_{ε₀}.
pub fn make_smoothed_log<F: Real>(dim: usize, p_exp: F, eps: F, eps0: F) -> Result<RadialKernel<F>> {
    check_common(dim, p_exp)?;
    check_window(eps, eps0)?;
    let b = b_eps_log(dim, eps, eps0)?;
    let coef = F::one() / (sphere_area::<F>(dim) * eps.ln().abs() * b);
    let shape = Shape::Shifted {
        coef,
        shift: eps,
        beta: -F::of_usize(dim),
        q: p_exp,
    };
    let profile = Profile::single(F::zero(), eps0, shape);
    let spec = KernelSpec::smoothed_log(dim, p_exp.to_f64_lossy(), eps.to_f64_lossy(), eps0.to_f64_lossy());
    Ok(RadialKernel::from_profile(dim, p_exp, profile)?
        .tagged(FamilyTag::SmoothedLog, Some(eps), Some(spec)))
}

/// (|h|+ε)^{-d-p} / (|S^{d-1}| |log ε| b_ε) with the indicator of B_ε.
///
/// The cutoff is the ball B_ε, while b_ε integrates out to ε₀. With this
/// cutoff the kernel is not p-Lévy normalized: its mass is the ratio of the
/// t-integral over (1/2, 1) to the one over (ε/(ε+ε₀), 1). Replacing B_ε by
/// B_{ε₀} would restore unit mass; the cutoff is likely a misprint for ε₀.
pub fn make_smoothed_log_ball<F: Real>(dim: usize, p_exp: F, eps: F, eps0: F) -> Result<RadialKernel<F>> {
    check_common(dim, p_exp)?;
    check_window(eps, eps0)?;
    let b = b_eps_log_ball(dim, p_exp, eps, eps0)?;
    let coef = F::one() / (sphere_area::<F>(dim) * eps.ln().abs() * b);
    let shape = Shape::Shifted {
        coef,
        shift: eps,
        beta: -F::of_usize(dim) - p_exp,
        q: F::zero(),
    };
    let profile = Profile::single(F::zero(), eps, shape);
    let spec = KernelSpec::smoothed_log_ball(dim, p_exp.to_f64_lossy(), eps.to_f64_lossy(), eps0.to_f64_lossy());
    Ok(RadialKernel::from_profile(dim, p_exp, profile)?
        .tagged(FamilyTag::SmoothedLogBall, Some(eps), Some(spec)))
}

#[derive(Debug, Clone)]
pub enum FamilyKind<F: Real> {
    Stable,
    Rescaled(Arc<RadialKernel<F>>),
    TruncatedPower { beta: F },
    SmoothedPower { beta: F, eps0: F },
    LogLimit { eps0: F },
    SmoothedLog { eps0: F },
    SmoothedLogBall { eps0: F },
}

/// ε ↦ kernel generator.
#[derive(Debug, Clone)]
pub struct KernelFamily<F: Real> {
    pub kind: FamilyKind<F>,
    pub dim: usize,
    pub p_exp: F,
}

impl<F: Real> KernelFamily<F> {
    pub fn new(kind: FamilyKind<F>, dim: usize, p_exp: F) -> Result<Self> {
        check_common(dim, p_exp)?;
        if let FamilyKind::Rescaled(base) = &kind {
            if base.dim() != dim || base.p_exp() != p_exp {
                return invalid("rescaled base kernel must share d and p with the family");
            }
        }
        Ok(Self { kind, dim, p_exp })
    }

    pub fn stable(dim: usize, p_exp: F) -> Result<Self> {
        Self::new(FamilyKind::Stable, dim, p_exp)
    }

    /// Rescalings of the stable kernel with parameter `base_eps`.
    pub fn rescaled_stable(dim: usize, p_exp: F, base_eps: F) -> Result<Self> {
        let base = make_stable(dim, p_exp, base_eps)?;
        Self::new(FamilyKind::Rescaled(Arc::new(base)), dim, p_exp)
    }

    pub fn tag(&self) -> FamilyTag {
        match self.kind {
            FamilyKind::Stable => FamilyTag::Stable,
            FamilyKind::Rescaled(_) => FamilyTag::Rescaled,
            FamilyKind::TruncatedPower { .. } => FamilyTag::TruncatedPower,
            FamilyKind::SmoothedPower { .. } => FamilyTag::SmoothedPower,
            FamilyKind::LogLimit { .. } => FamilyTag::LogLimit,
            FamilyKind::SmoothedLog { .. } => FamilyTag::SmoothedLog,
            FamilyKind::SmoothedLogBall { .. } => FamilyTag::SmoothedLogBall,
        }
    }

    /// Supremum of admissible ε.
    pub fn eps_max(&self) -> F {
        match &self.kind {
            FamilyKind::Stable => self.p_exp,
            FamilyKind::Rescaled(_) => F::one(),
            FamilyKind::TruncatedPower { .. } => F::one(),
            FamilyKind::SmoothedPower { eps0, .. }
            | FamilyKind::LogLimit { eps0 }
            | FamilyKind::SmoothedLog { eps0 }
            | FamilyKind::SmoothedLogBall { eps0 } => *eps0,
        }
    }

    /// Decreasing ε grid inside the validity window.
    ///
    /// The annulus and smoothed-log families put all of their mass at radii
    /// above ε, so their grid starts below the smallest tail radius probed
    /// (δ = 0.1).
    pub fn default_grid(&self) -> Vec<F> {
        let grid: &[f64] = match self.kind {
            FamilyKind::LogLimit { .. } | FamilyKind::SmoothedLog { .. } => &[0.08, 0.04, 0.02, 0.01, 0.005],
            _ => &DEFAULT_EPS_GRID,
        };
        grid.iter().map(|&e| F::of(e)).filter(|e| *e < self.eps_max()).collect()
    }

    pub fn kernel(&self, eps: F) -> Result<RadialKernel<F>> {
        let (d, p) = (self.dim, self.p_exp);
        match &self.kind {
            FamilyKind::Stable => make_stable(d, p, eps),
            FamilyKind::Rescaled(base) => make_rescaled(base, eps),
            FamilyKind::TruncatedPower { beta } => make_truncated_power(d, p, *beta, eps),
            FamilyKind::SmoothedPower { beta, eps0 } => make_smoothed_power(d, p, *beta, eps, *eps0),
            FamilyKind::LogLimit { eps0 } => make_log_limit(d, p, eps, *eps0),
            FamilyKind::SmoothedLog { eps0 } => make_smoothed_log(d, p, eps, *eps0),
            FamilyKind::SmoothedLogBall { eps0 } => make_smoothed_log_ball(d, p, eps, *eps0),
        }
    }

    /// Flat record of the family without ε.
    pub fn to_spec(&self, eps: F) -> Result<KernelSpec> {
        self.kernel(eps)?
            .spec()
            .cloned()
            .ok_or_else(|| Error::Unsupported("family with a custom base has no flat record".into()))
    }
}

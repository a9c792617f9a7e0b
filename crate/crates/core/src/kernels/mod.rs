//! Radial p-Lévy kernels ν(h) = ν(|h|) on R^d and the families that
//! concentrate them at the origin.
//!
//! A kernel is p-Lévy normalized when
//! |S^{d-1}| ∫₀^∞ (1 ∧ r^p) ν(r) r^{d-1} dr = 1. All radial integrals run in
//! the variable τ = ln r, which turns the power-law pieces of every family
//! into exponentials and keeps the mass below r = 1e-300 reachable.

mod family;
mod law;
mod profile;
mod spec;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, try_integrate_with_breaks, Tolerance};
use crate::scalar::Real;
use crate::special::sphere_area;

pub use family::{
    b_eps_log, b_eps_log_ball, b_eps_power, make_log_limit, make_rescaled, make_smoothed_log,
    make_smoothed_log_ball, make_smoothed_power, make_stable, make_truncated_power, stable_coefficient,
    FamilyKind, KernelFamily, DEFAULT_EPS_GRID,
};
pub use law::RadialLaw;
pub use profile::{Piece, Profile, RadialFn, Shape};
pub use spec::{KernelSpec, KERNEL_KEYS};

/// Tolerance requested from every radial integral.
pub(crate) fn radial_tol<F: Real>() -> Tolerance<F> {
    Tolerance::new(1e-11, 1e-12).with_max_panels(3000)
}

/// Accepted deviation of a normalization from 1.
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    Stable,
    Rescaled,
    TruncatedPower,
    SmoothedPower,
    LogLimit,
    SmoothedLog,
    SmoothedLogBall,
    Custom,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 8] = [
        FamilyTag::Stable,
        FamilyTag::Rescaled,
        FamilyTag::TruncatedPower,
        FamilyTag::SmoothedPower,
        FamilyTag::LogLimit,
        FamilyTag::SmoothedLog,
        FamilyTag::SmoothedLogBall,
        FamilyTag::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::Stable => "stable",
            FamilyTag::Rescaled => "rescaled",
            FamilyTag::TruncatedPower => "truncated-power",
            FamilyTag::SmoothedPower => "smoothed-power",
            FamilyTag::LogLimit => "log-limit",
            FamilyTag::SmoothedLog => "smoothed-log",
            FamilyTag::SmoothedLogBall => "smoothed-log-ball",
            FamilyTag::Custom => "custom",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FamilyTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = FamilyTag::ALL.iter().map(|t| t.as_str()).collect();
                Error::Record(format!("unknown family `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// One radial kernel ν on R^d with its exponent p.
#[derive(Clone)]
pub struct RadialKernel<F: Real> {
    dim: usize,
    p_exp: F,
    profile: Profile<F>,
    family: FamilyTag,
    eps: Option<F>,
    spec: Option<KernelSpec>,
    law: Arc<OnceLock<Result<RadialLaw<F>>>>,
}

impl<F: Real> fmt::Debug for RadialKernel<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialKernel")
            .field("id", &self.id())
            .field("profile", &self.profile)
            .finish()
    }
}

impl<F: Real> RadialKernel<F> {
    /// Kernel from an explicit profile. No normalization is enforced.
    pub fn from_profile(dim: usize, p_exp: F, profile: Profile<F>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(p_exp >= F::one()) {
            return Err(Error::InvalidParameter(format!("exponent p = {p_exp} must be >= 1")));
        }
        Ok(Self {
            dim,
            p_exp,
            profile,
            family: FamilyTag::Custom,
            eps: None,
            spec: None,
            law: Arc::new(OnceLock::new()),
        })
    }

    /// Kernel from a closure r ↦ ν(r), supported on (0, support_radius].
    pub fn custom<G>(dim: usize, p_exp: F, support_radius: Option<F>, profile: G) -> Result<Self>
    where
        G: Fn(F) -> F + Send + Sync + 'static,
    {
        let hi = support_radius.unwrap_or_else(F::infinity);
        if !(hi > F::zero()) {
            return Err(Error::InvalidParameter("support radius must be > 0".into()));
        }
        Self::from_profile(dim, p_exp, Profile::single(F::zero(), hi, Shape::Custom(Arc::new(profile))))
    }

    pub(crate) fn tagged(mut self, family: FamilyTag, eps: Option<F>, spec: Option<KernelSpec>) -> Self {
        self.family = family;
        self.eps = eps;
        self.spec = spec;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p_exp(&self) -> F {
        self.p_exp
    }

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn eps(&self) -> Option<F> {
        self.eps
    }

    pub fn spec(&self) -> Option<&KernelSpec> {
        self.spec.as_ref()
    }

    pub fn profile(&self) -> &Profile<F> {
        &self.profile
    }

    /// Outer edge of the support, `None` for full support.
    pub fn support_radius(&self) -> Option<F> {
        let (_, hi) = self.profile.support();
        hi.is_finite().then_some(hi)
    }

    /// Stable identifier for reports.
    pub fn id(&self) -> String {
        match &self.spec {
            Some(spec) => spec.to_record_string(),
            None => format!("{}(d={},p={})", self.family, self.dim, self.p_exp),
        }
    }

    /// ν(r) for r > 0.
    pub fn value(&self, r: F) -> F {
        self.profile.value(r)
    }

    /// ν(h) for a vector offset.
    pub fn value_at(&self, h: &[F]) -> F {
        let r = h.iter().map(|&x| x * x).sum::<F>().sqrt();
        self.value(r)
    }

    pub fn ln_value(&self, tau: F) -> F {
        self.profile.ln_value(tau)
    }

    /// ∫_{lo}^{hi} ν(r) r^power g(r) dr.
    ///
    /// For `floor > 0` and `lo = 0`, g is frozen at g(floor) on (0, floor),
    /// and only the kernel moment below the floor is integrated there. This is
    /// how callers whose g is a difference quotient avoid cancellation at tiny
    /// radii. `extra_breaks` are radii where g has kinks.
    pub fn integrate_radial<G>(
        &self,
        lo: F,
        hi: F,
        power: F,
        floor: F,
        extra_breaks: &[F],
        mut g: G,
    ) -> Result<F>
    where
        G: FnMut(F) -> Result<F>,
    {
        let (s_lo, s_hi) = self.profile.support();
        let mut lo = lo.max(s_lo).max(F::zero());
        let hi = hi.min(s_hi);
        if !(hi > lo) {
            return Ok(F::zero());
        }
        let tol = radial_tol::<F>();
        let k = power + F::one();
        let mut tau_breaks: Vec<F> = self
            .profile
            .breakpoints()
            .into_iter()
            .chain(std::iter::once(F::one()))
            .chain(extra_breaks.iter().copied())
            .filter(|r| r.is_finite() && *r > F::zero())
            .map(|r| r.ln())
            .collect();
        tau_breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

        let weight = |tau: F| (self.profile.ln_value(tau) + k * tau).exp();
        let as_divergence = |e: Error| match e {
            Error::NonFinite { .. } => Error::NonConvergence {
                estimate: f64::INFINITY,
                error_estimate: f64::INFINITY,
                panels: 0,
            },
            other => other,
        };

        let mut total = F::zero();
        if lo == F::zero() && floor > F::zero() {
            let cut = floor.min(hi);
            let g0 = g(cut)?;
            if g0 != F::zero() {
                let below = integrate_with_breaks(weight, F::neg_infinity(), cut.ln(), &tau_breaks, &tol)
                    .map_err(as_divergence)?;
                total = total + g0 * below.value;
            }
            lo = cut;
            if lo >= hi {
                return Ok(total);
            }
        }
        let a = if lo == F::zero() { F::neg_infinity() } else { lo.ln() };
        let b = if hi.is_finite() { hi.ln() } else { F::infinity() };
        // beyond r = e^ceiling, g is continued as a power law fitted on the
        // last unit of τ; callers' g are constant or 1/r^k out there
        let ceiling = F::max_value().ln() * F::of(0.5);
        let main = try_integrate_with_breaks(
            |tau| {
                let ln_w = self.profile.ln_value(tau) + k * tau;
                if ln_w.is_nan() || ln_w == F::neg_infinity() {
                    return Ok(F::zero());
                }
                let v = g(tau.exp())?;
                if v == F::zero() {
                    return Ok(F::zero());
                }
                // ν r^k can overflow where g underflows
                Ok(v.signum() * (ln_w + v.abs().ln()).exp())
            },
            a,
            b.min(ceiling),
            &tau_breaks,
            &tol,
        )
        .map_err(as_divergence)?;
        total = total + main.value;
        if b > ceiling && a < ceiling {
            let g1 = g(ceiling.exp())?;
            if g1 != F::zero() {
                let g0 = g((ceiling - F::one()).exp())?;
                let slope = if g0 != F::zero() && g0.signum() == g1.signum() {
                    g1.abs().ln() - g0.abs().ln()
                } else {
                    F::zero()
                };
                let ln_g1 = g1.abs().ln();
                let tail = integrate_with_breaks(
                    |tau: F| {
                        let ln_w = self.profile.ln_value(tau) + k * tau;
                        if ln_w.is_nan() || ln_w == F::neg_infinity() {
                            return F::zero();
                        }
                        (ln_w + ln_g1 + slope * (tau - ceiling)).exp()
                    },
                    ceiling,
                    b,
                    &[],
                    &tol,
                )
                .map_err(as_divergence)?;
                total = total + g1.signum() * tail.value;
            }
        }
        Ok(total)
    }

    /// |S^{d-1}| ∫_{lo}^{hi} (1 ∧ r^p) ν(r) r^{d-1} dr.
    pub fn levy_mass(&self, lo: F, hi: F) -> Result<F> {
        let d = F::of_usize(self.dim);
        let inner = self.integrate_radial(lo, hi.min(F::one()), d - F::one() + self.p_exp, F::zero(), &[], |_| {
            Ok(F::one())
        })?;
        let outer = self.integrate_radial(lo.max(F::one()), hi, d - F::one(), F::zero(), &[], |_| Ok(F::one()))?;
        Ok(sphere_area::<F>(self.dim) * (inner + outer))
    }

    /// ∫(1 ∧ |h|^p) ν(h) dh.
    pub fn normalization(&self) -> Result<F> {
        self.levy_mass(F::zero(), F::infinity())
    }

    /// Tail mass ∫_{|h|>δ} (1 ∧ |h|^p) ν(h) dh.
    pub fn mass_outside(&self, delta: F) -> Result<F> {
        if !(delta > F::zero()) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be > 0")));
        }
        self.levy_mass(delta, F::infinity())
    }

    /// Truncated moment ∫_{|h|≤R} (1 ∧ |h|^β) ν(h) dh, β ≥ p.
    pub fn weighted_moment(&self, beta: F, radius: F) -> Result<F> {
        if !(beta >= self.p_exp) {
            return Err(Error::InvalidParameter(format!(
                "moment exponent {beta} must be >= p = {}",
                self.p_exp
            )));
        }
        if !(radius > F::zero()) {
            return Err(Error::InvalidParameter(format!("radius {radius} must be > 0")));
        }
        let d = F::of_usize(self.dim);
        let inner =
            self.integrate_radial(F::zero(), radius.min(F::one()), d - F::one() + beta, F::zero(), &[], |_| {
                Ok(F::one())
            })?;
        let outer = self.integrate_radial(F::one(), radius, d - F::one(), F::zero(), &[], |_| Ok(F::one()))?;
        Ok(sphere_area::<F>(self.dim) * (inner + outer))
    }

    /// Error unless the normalization is within [`NORMALIZATION_TOL`] of 1.
    pub fn check_normalized(&self) -> Result<F> {
        let mass = self.normalization()?;
        if (mass - F::one()).abs() > F::of(NORMALIZATION_TOL) {
            return Err(Error::Unnormalized { mass: mass.to_f64_lossy() });
        }
        Ok(mass)
    }

    /// Radial sampling law, built on first use.
    pub fn radial_law(&self) -> Result<&RadialLaw<F>> {
        self.law
            .get_or_init(|| RadialLaw::build(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// CDF of |H| when H has density (1 ∧ |h|^p) ν(h) / normalization.
    pub fn radial_cdf(&self, r: F) -> Result<F> {
        Ok(self.radial_law()?.cdf(r))
    }

    /// Draw h with density ∝ (1 ∧ |h|^p) ν(h) into `out` (length d) and
    /// return |h|.
    pub fn sample_offset<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut [F]) -> Result<F> {
        debug_assert_eq!(out.len(), self.dim);
        let r = self.radial_law()?.sample(rng);
        crate::rng::unit_vector(rng, out);
        for v in out.iter_mut() {
            *v = *v * r;
        }
        Ok(r)
    }
}

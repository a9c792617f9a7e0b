//! Gagliardo seminorms and the three fractional scalings that recover
//! K_{d,p}‖∇u‖^p.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::Field;
use crate::geometry::Domain;
use crate::kernels::{make_truncated_power, Profile, RadialKernel, Shape};
use crate::scalar::Real;
use crate::special::sphere_area;
use crate::sweep::{run_sweep, SweepCase, SweepReport};

use super::{energy, EnergyEstimate, Options};

/// Which scaling of the fractional energy is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FractionalVariant {
    /// (1 - s) ∬ |Δu|^p / |x - y|^{d+sp}, with ε = p(1 - s).
    Order,
    /// ε^{-d} ∬_{|x-y|<ε} |Δu|^p / |x - y|^p.
    ShortRange,
    /// |ln ε|^{-1} ∬_{|x-y|>ε} |Δu|^p / |x - y|^{d+p}.
    LongRange,
}

impl FractionalVariant {
    pub const ALL: [FractionalVariant; 3] = [
        FractionalVariant::Order,
        FractionalVariant::ShortRange,
        FractionalVariant::LongRange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FractionalVariant::Order => "order",
            FractionalVariant::ShortRange => "short-range",
            FractionalVariant::LongRange => "long-range",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "order" | "1" => Ok(FractionalVariant::Order),
            "short-range" | "2" => Ok(FractionalVariant::ShortRange),
            "long-range" | "3" => Ok(FractionalVariant::LongRange),
            other => invalid(format!(
                "unknown fractional variant `{other}`; expected order, short-range or long-range"
            )),
        }
    }

    /// Decreasing ε grid. For `Order` it is s ∈ {0.8, 0.9, 0.95, 0.99}.
    pub fn default_grid(self, p: f64) -> Vec<f64> {
        match self {
            FractionalVariant::Order => [0.8, 0.9, 0.95, 0.99].iter().map(|s| p * (1.0 - s)).collect(),
            FractionalVariant::ShortRange => vec![0.4, 0.2, 0.1, 0.05, 0.02],
            FractionalVariant::LongRange => vec![1e-4, 1e-6, 1e-8, 1e-10, 1e-12],
        }
    }

    /// Limit divided by K_{d,p}‖∇u‖^p.
    pub fn limit_factor<F: Real>(self, dim: usize, p: F) -> F {
        let area = sphere_area::<F>(dim);
        match self {
            FractionalVariant::Order => area / p,
            FractionalVariant::ShortRange => area / F::of_usize(dim),
            FractionalVariant::LongRange => area,
        }
    }

    /// Largest admissible ε.
    pub fn eps_max(self, p: f64) -> f64 {
        match self {
            FractionalVariant::Order => p,
            FractionalVariant::ShortRange | FractionalVariant::LongRange => 1.0,
        }
    }

    /// Scaled energy at one grid point.
    pub fn value<F: Real>(
        self,
        field: &Field<F>,
        domain: &Domain<F>,
        p: F,
        eps: F,
        opts: &Options,
    ) -> Result<EnergyEstimate<F>> {
        if !(eps > F::zero() && eps < F::of(self.eps_max(p.to_f64_lossy()))) {
            return invalid(format!("ε = {eps} is outside the range of the {self} scaling"));
        }
        let dim = domain.dim();
        match self {
            FractionalVariant::Order => {
                let s = F::one() - eps / p;
                Ok(gagliardo(field, domain, s, p, F::zero(), opts)?.scaled(F::one() - s))
            }
            FractionalVariant::ShortRange => {
                let kernel = make_truncated_power(dim, p, F::zero(), eps)?;
                Ok(energy(field, domain, &kernel, opts)?.scaled(self.limit_factor(dim, p)))
            }
            FractionalVariant::LongRange => {
                let kernel = power_kernel(dim, p, eps, -F::of_usize(dim) - p)?;
                Ok(energy(field, domain, &kernel, opts)?.scaled(F::one() / eps.ln().abs()))
            }
        }
    }
}

impl fmt::Display for FractionalVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// r^exponent on (lo, ∞).
fn power_kernel<F: Real>(dim: usize, p: F, lo: F, exponent: F) -> Result<RadialKernel<F>> {
    let shape = Shape::Power {
        coef: F::one(),
        exponent,
    };
    RadialKernel::from_profile(dim, p, Profile::single(lo, F::infinity(), shape))
}

/// |h|^{-d-sp} restricted to |h| > cutoff.
pub fn gagliardo_kernel<F: Real>(dim: usize, s: F, p: F, cutoff: F) -> Result<RadialKernel<F>> {
    if !(s > F::zero() && s < F::one()) {
        return invalid(format!("fractional order s = {s} must lie in (0, 1)"));
    }
    if !(cutoff >= F::zero()) {
        return invalid(format!("cutoff t = {cutoff} must be >= 0"));
    }
    power_kernel(dim, p, cutoff, -F::of_usize(dim) - s * p)
}

/// ∬_{Ω×Ω, |x-y|>t} |u(x) - u(y)|^p / |x - y|^{d+sp}; t = 0 gives the full
/// seminorm.
pub fn gagliardo<F: Real>(
    field: &Field<F>,
    domain: &Domain<F>,
    s: F,
    p: F,
    cutoff: F,
    opts: &Options,
) -> Result<EnergyEstimate<F>> {
    let kernel = gagliardo_kernel(domain.dim(), s, p, cutoff)?;
    energy(field, domain, &kernel, opts)
}

/// Sweep one fractional scaling towards its limit.
pub fn fractional_limits(
    field: &Field<f64>,
    domain: &Domain<f64>,
    p: f64,
    variant: FractionalVariant,
    opts: &Options,
) -> Result<SweepReport> {
    let case = SweepCase::fractional(
        &format!("fractional-{variant}"),
        field,
        domain,
        p,
        variant,
        opts,
    )?;
    run_sweep(&case)
}

//! Law of |H| for H with density (1 ∧ |h|^p) ν(h).

use rand::Rng;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::rng::uniform_open0;
use crate::scalar::Real;
use crate::special::sphere_area;

use super::profile::Shape;
use super::RadialKernel;

/// Nodes of the tabulated inverse CDF.
pub const TABLE_NODES: usize = 4096;
/// Mass left outside the tabulated range on each side.
const TABLE_TAIL: f64 = 5e-10;

/// Radial band where the density is `weight · r^(k-1)`.
#[derive(Debug, Clone)]
pub struct PowerBand<F> {
    lo: F,
    hi: F,
    k: F,
    weight: F,
    mass: F,
}

/// ∫_lo^hi r^(k-1) dr.
fn power_moment<F: Real>(lo: F, hi: F, k: F) -> F {
    if k.abs() < F::of(1e-14) {
        (hi / lo).ln()
    } else if lo == F::zero() {
        hi.powf(k) / k
    } else {
        (hi.powf(k) - lo.powf(k)) / k
    }
}

#[derive(Debug, Clone)]
pub enum RadialLaw<F: Real> {
    /// Closed-form CDF and inverse: every profile piece is a power law.
    PiecewisePower {
        bands: Vec<PowerBand<F>>,
        cumulative: Vec<F>,
        total: F,
    },
    /// Monotone cubic interpolation of ln r against the CDF on log-spaced
    /// nodes.
    Table {
        inverse: MonotoneCubic<F>,
        forward: MonotoneCubic<F>,
        r_min: F,
        r_max: F,
        exact_inner: bool,
    },
}

impl<F: Real> RadialLaw<F> {
    pub(crate) fn build(kernel: &RadialKernel<F>) -> Result<Self> {
        if kernel.profile().all_power() {
            Self::piecewise_power(kernel)
        } else {
            Self::table(kernel)
        }
    }

    fn piecewise_power(kernel: &RadialKernel<F>) -> Result<Self> {
        let area = sphere_area::<F>(kernel.dim());
        let d = F::of_usize(kernel.dim());
        let mut bands = Vec::new();
        for piece in kernel.profile().pieces() {
            let Shape::Power { coef, exponent } = piece.shape else {
                unreachable!("checked by all_power")
            };
            let one = F::one();
            let parts = [
                (piece.lo, piece.hi.min(one), exponent + d + kernel.p_exp()),
                (piece.lo.max(one), piece.hi, exponent + d),
            ];
            for (lo, hi, k) in parts {
                if hi > lo {
                    let weight = area * coef;
                    let mass = weight * power_moment(lo, hi, k);
                    if !mass.is_finite() || mass < F::zero() {
                        return Err(Error::Table(format!(
                            "radial mass on ({lo}, {hi}] is not finite; profile violates p-Lévy integrability"
                        )));
                    }
                    bands.push(PowerBand { lo, hi, k, weight, mass });
                }
            }
        }
        let mut cumulative = Vec::with_capacity(bands.len());
        let mut acc = F::zero();
        for b in &bands {
            acc = acc + b.mass;
            cumulative.push(acc);
        }
        if !(acc > F::zero()) {
            return Err(Error::Table("kernel has zero mass".into()));
        }
        Ok(RadialLaw::PiecewisePower {
            bands,
            cumulative,
            total: acc,
        })
    }

    fn table(kernel: &RadialKernel<F>) -> Result<Self> {
        let (inner, outer) = kernel.profile().support();
        let tail = F::of(TABLE_TAIL);
        let ten = F::of(10.0);
        let breaks = kernel.profile().breakpoints();

        let exact_inner = inner > F::zero();
        let r_min = if exact_inner {
            inner
        } else {
            let mut r = breaks.first().copied().unwrap_or_else(F::one).min(F::one());
            let floor = F::of(1e-300).max(F::min_positive_value());
            while kernel.levy_mass(F::zero(), r)? > tail && r > floor {
                r = r / ten;
            }
            r.max(floor)
        };
        let r_max = if outer.is_finite() {
            outer
        } else {
            let mut r = breaks.last().copied().unwrap_or_else(F::one).max(F::one());
            let mut steps = 0;
            while kernel.levy_mass(r, F::infinity())? > tail {
                r = r * ten;
                steps += 1;
                if steps > 300 {
                    return Err(Error::Table("tail mass does not decay".into()));
                }
            }
            r
        };
        if !(r_max > r_min) {
            return Err(Error::Table(format!("empty tabulation range [{r_min}, {r_max}]")));
        }

        let (ln_lo, ln_hi) = (r_min.ln(), r_max.ln());
        let step = (ln_hi - ln_lo) / F::of_usize(TABLE_NODES - 1);
        let radii: Vec<F> = (0..TABLE_NODES)
            .map(|i| {
                if i == TABLE_NODES - 1 {
                    r_max
                } else {
                    (ln_lo + step * F::of_usize(i)).exp()
                }
            })
            .collect();
        let mut cdf = Vec::with_capacity(TABLE_NODES);
        let mut acc = if exact_inner { F::zero() } else { kernel.levy_mass(F::zero(), r_min)? };
        cdf.push(acc);
        for w in radii.windows(2) {
            acc = acc + kernel.levy_mass(w[0], w[1])?;
            cdf.push(acc);
        }
        let total = acc + kernel.levy_mass(r_max, F::infinity())?;
        if !total.is_finite() || !(total > F::zero()) {
            return Err(Error::Table(format!("non-finite or zero total mass {total}")));
        }

        let mut us = Vec::with_capacity(TABLE_NODES);
        let mut lns = Vec::with_capacity(TABLE_NODES);
        for (r, c) in radii.iter().zip(&cdf) {
            let u = *c / total;
            if !u.is_finite() {
                return Err(Error::Table(format!("non-finite CDF at r = {r}")));
            }
            if us.last().is_none_or(|last| u > *last) {
                us.push(u);
                lns.push(r.ln());
            }
        }
        let inverse = MonotoneCubic::new(us.clone(), lns.clone())?;
        let forward = MonotoneCubic::new(lns, us)?;
        Ok(RadialLaw::Table {
            inverse,
            forward,
            r_min,
            r_max,
            exact_inner,
        })
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self, RadialLaw::PiecewisePower { .. })
    }

    pub fn cdf(&self, r: F) -> F {
        match self {
            RadialLaw::PiecewisePower { bands, total, .. } => {
                let mut acc = F::zero();
                for b in bands {
                    if r >= b.hi {
                        acc = acc + b.mass;
                    } else if r > b.lo {
                        acc = acc + b.weight * power_moment(b.lo, r, b.k);
                    }
                }
                (acc / *total).min(F::one())
            }
            RadialLaw::Table {
                forward,
                r_min,
                r_max,
                exact_inner,
                ..
            } => {
                if r >= *r_max {
                    F::one()
                } else if r < *r_min {
                    if *exact_inner {
                        F::zero()
                    } else {
                        forward.eval(r_min.ln())
                    }
                } else {
                    forward.eval(r.ln())
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        match self {
            RadialLaw::PiecewisePower {
                bands,
                cumulative,
                total,
            } => {
                let u: F = crate::rng::uniform(rng);
                let target = u * *total;
                let i = cumulative.partition_point(|c| *c <= target).min(bands.len() - 1);
                let b = &bands[i];
                let v: F = uniform_open0(rng);
                if b.k.abs() < F::of(1e-14) {
                    b.lo * ((b.hi / b.lo).ln() * v).exp()
                } else if b.lo == F::zero() {
                    (b.hi.ln() + v.ln() / b.k).exp()
                } else if b.hi.is_infinite() {
                    (b.lo.ln() + v.ln() / b.k).exp()
                } else {
                    let lo_k = b.lo.powf(b.k);
                    (lo_k + v * (b.hi.powf(b.k) - lo_k)).powf(F::one() / b.k)
                }
            }
            RadialLaw::Table { inverse, .. } => {
                let u: F = crate::rng::uniform(rng);
                inverse.eval(u).exp()
            }
        }
    }
}

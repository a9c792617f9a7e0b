//! Nonlocal energies ∬ |u(x) - u(y)|^p ν(x - y) over pair sets X × Y.
//!
//! Two routes:
//!
//! * Monte Carlo: x uniform in X, h drawn from the kernel's own
//!   (1 ∧ |h|^p)-weighted law, accepted when x + h ∈ Y. The weight
//!   |Δu|^p / (1 ∧ |h|^p) stays bounded for Lipschitz fields. Jump
//!   fields instead draw x near each jump surface.
//! * Deterministic (d = 1, interval unions): E = ∫₀^∞ ν(r) Φ(r) dr with
//!   Φ(r) = Σ± ∫_{X ∩ (Y ∓ r)} |u(x ± r) - u(x)|^p dx.

mod fractional;
mod operators;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{Field, Interface, Regularity};
use crate::geometry::{Domain, IntervalSet};
use crate::kernels::RadialKernel;
use crate::quad::{try_integrate_with_breaks, Tolerance};
use crate::rng::{chunked, chunked_from, unit_vector, Moments};
use crate::scalar::Real;
use crate::special::{ball_volume, sphere_area};

pub use fractional::{fractional_limits, gagliardo, gagliardo_kernel, FractionalVariant};
pub use operators::{dirac_pairing, dirac_pairing_raw, generator, stable_gaussian_generator};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "MC")]
    MonteCarlo,
    #[serde(rename = "deterministic-1D")]
    Deterministic1d,
    /// Radial-angular quadrature of a pointwise operator.
    #[serde(rename = "quadrature")]
    Quadrature,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::MonteCarlo => "MC",
            Mode::Deterministic1d => "deterministic-1D",
            Mode::Quadrature => "quadrature",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "MC" | "mc" => Ok(Mode::MonteCarlo),
            "deterministic-1D" | "deterministic" | "det" => Ok(Mode::Deterministic1d),
            "quadrature" => Ok(Mode::Quadrature),
            other => invalid(format!("unknown mode `{other}`; expected MC or deterministic-1D")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How to evaluate. `mode = None` picks the deterministic route whenever it
/// applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub mode: Option<Mode>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            mode: None,
            n_samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

impl Options {
    pub fn monte_carlo(n_samples: usize, seed: u64) -> Self {
        Self {
            mode: Some(Mode::MonteCarlo),
            n_samples,
            seed,
        }
    }

    pub fn deterministic() -> Self {
        Self {
            mode: Some(Mode::Deterministic1d),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate<F> {
    pub value: F,
    /// Zero in deterministic mode.
    pub stderr: F,
    pub n_samples: usize,
    pub eps: Option<F>,
    pub kernel_id: String,
    pub domain_id: String,
    pub field_id: String,
    pub mode: Mode,
}

impl<F: Real> EnergyEstimate<F> {
    /// Same estimate multiplied by a positive constant.
    pub fn scaled(mut self, c: F) -> Self {
        self.value = self.value * c;
        self.stderr = self.stderr * c.abs();
        self
    }
}

/// A set of points, possibly unbounded.
#[derive(Debug, Clone, PartialEq)]
pub enum Region<F> {
    Inside(Domain<F>),
    /// The complement of a domain.
    Outside(Domain<F>),
    /// `outer` minus `inner`.
    Between { outer: Domain<F>, inner: Domain<F> },
}

impl<F: Real> Region<F> {
    pub fn contains(&self, x: &[F]) -> bool {
        match self {
            Region::Inside(d) => d.contains(x),
            Region::Outside(d) => !d.contains(x),
            Region::Between { outer, inner } => outer.contains(x) && !inner.contains(x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Inside(d) | Region::Outside(d) => d.dim(),
            Region::Between { outer, .. } => outer.dim(),
        }
    }

    /// Bounded domain containing the region, used to draw x.
    fn envelope(&self) -> Result<&Domain<F>> {
        let d = match self {
            Region::Inside(d) => d,
            Region::Between { outer, .. } => outer,
            Region::Outside(_) => return invalid("the first set of a pair must be bounded"),
        };
        if !d.is_bounded() {
            return invalid(format!("domain `{}` must be bounded", d.id()));
        }
        Ok(d)
    }

    pub fn interval_set(&self) -> Result<IntervalSet<F>> {
        Ok(match self {
            Region::Inside(d) => d.interval_set()?,
            Region::Outside(d) => d.interval_set()?.complement(),
            Region::Between { outer, inner } => outer.interval_set()?.difference(&inner.interval_set()?),
        })
    }

    pub fn id(&self) -> String {
        match self {
            Region::Inside(d) => d.id(),
            Region::Outside(d) => format!("complement({})", d.id()),
            Region::Between { outer, inner } => format!("({})\\({})", outer.id(), inner.id()),
        }
    }
}

/// ∬_{Ω×Ω} |u(x) - u(y)|^p ν(x - y) dx dy.
pub fn energy<F: Real>(
    field: &Field<F>,
    domain: &Domain<F>,
    kernel: &RadialKernel<F>,
    opts: &Options,
) -> Result<EnergyEstimate<F>> {
    let r = Region::Inside(domain.clone());
    pair_energy(field, &r, &r, kernel, opts)
}

/// ∬_{Ω×Ω^c} |u(x) - u(y)|^p ν(x - y) dx dy.
pub fn cross_energy<F: Real>(
    field: &Field<F>,
    domain: &Domain<F>,
    kernel: &RadialKernel<F>,
    opts: &Options,
) -> Result<EnergyEstimate<F>> {
    pair_energy(
        field,
        &Region::Inside(domain.clone()),
        &Region::Outside(domain.clone()),
        kernel,
        opts,
    )
}

/// μ_ε(E) = ∫_E ∫_Ω |u(x) - u(y)|^p ν(x - y) dy dx for E compactly inside Ω.
pub fn local_measure<F: Real>(
    field: &Field<F>,
    domain: &Domain<F>,
    subdomain: &Domain<F>,
    kernel: &RadialKernel<F>,
    opts: &Options,
) -> Result<EnergyEstimate<F>> {
    if !domain.contains_compactly(subdomain)? {
        return invalid(format!(
            "`{}` is not compactly contained in `{}`",
            subdomain.id(),
            domain.id()
        ));
    }
    pair_energy(
        field,
        &Region::Inside(subdomain.clone()),
        &Region::Inside(domain.clone()),
        kernel,
        opts,
    )
}

/// ∫_X ∫ 1_Y(x + h) |u(x + h) - u(x)|^p ν(h) dh dx. X must be bounded.
pub fn pair_energy<F: Real>(
    field: &Field<F>,
    xs: &Region<F>,
    ys: &Region<F>,
    kernel: &RadialKernel<F>,
    opts: &Options,
) -> Result<EnergyEstimate<F>> {
    let dim = kernel.dim();
    if xs.dim() != dim || ys.dim() != dim {
        return invalid(format!("sets and kernel disagree on the dimension (kernel d = {dim})"));
    }
    xs.envelope()?;
    let deterministic_ok = dim == 1;
    let mode = match opts.mode {
        Some(Mode::Deterministic1d | Mode::Quadrature) if !deterministic_ok => {
            return Err(Error::Unsupported("deterministic energies need d = 1".into()))
        }
        Some(Mode::Quadrature) => Mode::Deterministic1d,
        Some(m) => m,
        None if deterministic_ok => Mode::Deterministic1d,
        None => Mode::MonteCarlo,
    };
    let (value, stderr, n_samples) = match mode {
        Mode::Deterministic1d => (pair_deterministic(field, xs, ys, kernel)?, F::zero(), 0),
        Mode::Quadrature => unreachable!("mapped to the 1-D route above"),
        Mode::MonteCarlo => {
            let (m, se) = pair_mc(field, xs, ys, kernel, opts.n_samples, opts.seed)?;
            (m, se, opts.n_samples)
        }
    };
    let domain_id = if xs == ys {
        xs.id()
    } else {
        format!("{} x {}", xs.id(), ys.id())
    };
    Ok(EnergyEstimate {
        value,
        stderr,
        n_samples,
        eps: kernel.eps(),
        kernel_id: kernel.id(),
        domain_id,
        field_id: field.id(),
        mode,
    })
}

/// |Δu|^p / (1 ∧ r^p) without underflow at small r.
#[inline]
fn weighted_increment<F: Real>(du: F, r: F, p: F) -> F {
    if r < F::one() {
        (du.abs() / r).powf(p)
    } else {
        du.abs().powf(p)
    }
}

fn pair_mc<F: Real>(
    field: &Field<F>,
    xs: &Region<F>,
    ys: &Region<F>,
    kernel: &RadialKernel<F>,
    n: usize,
    seed: u64,
) -> Result<(F, F)> {
    if n < 2 {
        return invalid("Monte Carlo needs at least two samples");
    }
    if field.regularity() == Regularity::PiecewiseConstant {
        return pair_mc_interfaces(field, xs, ys, kernel, n, seed);
    }
    let envelope = xs.envelope()?;
    let scale = envelope.volume()? * kernel.normalization()?;
    kernel.radial_law()?;
    let p = kernel.p_exp();
    let dim = kernel.dim();
    let chunks = chunked(seed, n, |rng, count| -> Result<Moments<F>> {
        let mut acc = Moments::default();
        let mut x = vec![F::zero(); dim];
        let mut h = vec![F::zero(); dim];
        let mut y = vec![F::zero(); dim];
        for _ in 0..count {
            envelope.sample_uniform(rng, &mut x)?;
            let r = kernel.sample_offset(rng, &mut h)?;
            if !xs.contains(&x) {
                acc.push(F::zero());
                continue;
            }
            for k in 0..dim {
                y[k] = x[k] + h[k];
            }
            if !ys.contains(&y) {
                acc.push(F::zero());
                continue;
            }
            let w = scale * weighted_increment(field.increment(&x, &h), r, p);
            if !w.is_finite() {
                return Err(non_finite(field, &x, &h));
            }
            acc.push(w);
        }
        Ok(acc)
    });
    let mut total = Moments::default();
    for c in chunks {
        total.merge(&c?);
    }
    Ok((total.mean(), total.std_error()))
}

fn non_finite<F: Real>(field: &Field<F>, x: &[F], h: &[F]) -> Error {
    Error::NonFinite {
        location: format!(
            "x = {:?}, h = {:?} for field `{}`",
            x.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>(),
            h.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>(),
            field.id()
        ),
    }
}

/// Draws x uniformly from a set containing every point within `r` of the
/// interface that also lies in the box [lo, hi]; returns the set's volume,
/// or zero when no such point exists.
fn sample_tube<F: Real, R: Rng + ?Sized>(
    rng: &mut R,
    interface: &Interface<F>,
    r: F,
    lo: &[F],
    hi: &[F],
    box_volume: F,
    x: &mut [F],
) -> F {
    let dim = x.len();
    let uniform = |rng: &mut R, a: F, b: F| a + (b - a) * F::of(rng.random::<f64>());
    let fill_box = |rng: &mut R, x: &mut [F]| {
        for k in 0..dim {
            x[k] = uniform(rng, lo[k], hi[k]);
        }
    };
    match interface {
        Interface::Plane { axis, at } => {
            let a = lo[*axis].max(*at - r);
            let b = hi[*axis].min(*at + r);
            if !(b > a) {
                return F::zero();
            }
            fill_box(rng, x);
            x[*axis] = uniform(rng, a, b);
            box_volume / (hi[*axis] - lo[*axis]) * (b - a)
        }
        Interface::Sphere { center, radius } => {
            let d = F::of_usize(dim);
            let inner = (*radius - r).max(F::zero()).powf(d);
            let outer = (*radius + r).powf(d);
            let shell = ball_volume::<F>(dim, F::one()) * (outer - inner);
            if !(shell < box_volume) {
                fill_box(rng, x);
                return box_volume;
            }
            unit_vector(rng, x);
            let rho = uniform(rng, inner, outer).powf(F::one() / d);
            for k in 0..dim {
                x[k] = center[k] + rho * x[k];
            }
            shell
        }
    }
}

/// Uniform point z of the interface inside the box; returns the area
/// sampled, zero when the interface misses the box.
fn sample_surface<F: Real, R: Rng + ?Sized>(
    rng: &mut R,
    interface: &Interface<F>,
    lo: &[F],
    hi: &[F],
    box_volume: F,
    z: &mut [F],
) -> F {
    match interface {
        Interface::Plane { axis, at } => {
            if !(*at >= lo[*axis] && *at <= hi[*axis]) {
                return F::zero();
            }
            for k in 0..z.len() {
                z[k] = lo[k] + (hi[k] - lo[k]) * F::of(rng.random::<f64>());
            }
            z[*axis] = *at;
            box_volume / (hi[*axis] - lo[*axis])
        }
        Interface::Sphere { center, radius } => {
            unit_vector(rng, z);
            for k in 0..z.len() {
                z[k] = center[k] + *radius * z[k];
            }
            sphere_area::<F>(z.len()) * radius.powi(z.len() as i32 - 1)
        }
    }
}

struct Sampler<'a, F: Real> {
    field: &'a Field<F>,
    xs: &'a Region<F>,
    ys: &'a Region<F>,
    interfaces: &'a [Interface<F>],
    lo: Vec<F>,
    hi: Vec<F>,
    box_volume: F,
    /// Below this |h| the interface is treated as flat.
    thin: F,
    p: F,
}

impl<F: Real> Sampler<'_, F> {
    /// ∫ over x of 1_X 1_Y 1[crosses i] |Δu|^p / (crossings · (1 ∧ r^p)),
    /// one-sample estimate given h.
    fn weight<R: Rng + ?Sized>(&self, rng: &mut R, i: usize, h: &[F], r: F, x: &mut [F], y: &mut [F]) -> F {
        let interface = &self.interfaces[i];
        let dim = h.len();
        if r < self.thin {
            // x = z + t n with z on the surface and |t| < r; curvature and
            // the other interfaces are invisible at this scale
            let area = sample_surface(rng, interface, &self.lo, &self.hi, self.box_volume, x);
            if area == F::zero() {
                return F::zero();
            }
            interface.normal(x, y);
            let hn: F = h.iter().zip(y.iter()).map(|(&a, &b)| a * b).sum();
            let t = r * F::of(2.0 * rng.random::<f64>() - 1.0);
            let x_side = t >= F::zero();
            if x_side == (t + hn >= F::zero()) {
                return F::zero();
            }
            let eta = self.thin;
            let plus: Vec<F> = (0..dim).map(|k| x[k] + eta * y[k]).collect();
            let minus: Vec<F> = (0..dim).map(|k| x[k] - eta * y[k]).collect();
            let (from, to) = if x_side { (&plus, &minus) } else { (&minus, &plus) };
            if !self.xs.contains(from) || !self.ys.contains(to) {
                return F::zero();
            }
            let du = (self.field.eval(&plus) - self.field.eval(&minus)).abs();
            // area · 2r · (|Δu| / r)^p
            return F::of(2.0) * area * du.powf(self.p) * r.powf(F::one() - self.p);
        }
        let vol = sample_tube(rng, interface, r, &self.lo, &self.hi, self.box_volume, x);
        for k in 0..dim {
            y[k] = x[k] + h[k];
        }
        if vol == F::zero()
            || !self.xs.contains(x)
            || !self.ys.contains(y)
            || interface.side(x) == interface.side(y)
        {
            return F::zero();
        }
        let crossed = self.interfaces.iter().filter(|s| s.side(x) != s.side(y)).count();
        let du = self.field.increment(x, h);
        vol * weighted_increment(du, r, self.p) / F::of_usize(crossed)
    }
}

/// Piecewise-constant fields: |Δu|^p ν has infinite variance under uniform
/// x, so each pair is charged to the interfaces it crosses and x is drawn
/// from the tube of width |h| around each interface in turn.
fn pair_mc_interfaces<F: Real>(
    field: &Field<F>,
    xs: &Region<F>,
    ys: &Region<F>,
    kernel: &RadialKernel<F>,
    n: usize,
    seed: u64,
) -> Result<(F, F)> {
    let dim = kernel.dim();
    let interfaces = field.interfaces(dim);
    if interfaces.is_empty() {
        return Ok((F::zero(), F::zero()));
    }
    let (lo, hi) = xs.envelope()?.bounding_box()?;
    let box_volume = lo.iter().zip(&hi).fold(F::one(), |v, (&a, &b)| v * (b - a));
    let diameter = lo.iter().zip(&hi).map(|(&a, &b)| (b - a) * (b - a)).sum::<F>().sqrt();
    let norm = kernel.normalization()?;
    kernel.radial_law()?;
    let sampler = Sampler {
        field,
        xs,
        ys,
        interfaces: &interfaces,
        lo,
        hi,
        box_volume,
        thin: F::of(1e-7) * diameter,
        p: kernel.p_exp(),
    };
    let m = interfaces.len();
    let mut value = F::zero();
    let mut var = F::zero();
    for i in 0..m {
        let n_i = (n / m + usize::from(i < n % m)).max(2);
        let chunks = chunked_from(seed, (i as u64) << 40, n_i, |rng, count| -> Result<Moments<F>> {
            let mut acc = Moments::default();
            let mut x = vec![F::zero(); dim];
            let mut h = vec![F::zero(); dim];
            let mut y = vec![F::zero(); dim];
            for _ in 0..count {
                let r = kernel.sample_offset(rng, &mut h)?;
                let w = norm * sampler.weight(rng, i, &h, r, &mut x, &mut y);
                if !w.is_finite() {
                    return Err(non_finite(field, &x, &h));
                }
                acc.push(w);
            }
            Ok(acc)
        });
        let mut total = Moments::default();
        for c in chunks {
            total.merge(&c?);
        }
        value = value + total.mean();
        var = var + total.std_error().powi(2);
    }
    Ok((value, var.sqrt()))
}

/// Radii below which difference quotients are frozen.
pub(crate) fn radial_floor<F: Real>() -> F {
    F::of(1e-150).max(F::min_positive_value().sqrt())
}

fn pair_deterministic<F: Real>(
    field: &Field<F>,
    xs: &Region<F>,
    ys: &Region<F>,
    kernel: &RadialKernel<F>,
) -> Result<F> {
    let x_set = xs.interval_set()?;
    let y_set = ys.interval_set()?;
    if !x_set.is_bounded() {
        return invalid("the first set of a pair must be bounded");
    }
    let p = kernel.p_exp();
    let jumpy = field.regularity() == Regularity::PiecewiseConstant;
    let q = if jumpy { F::one() } else { p };
    let field_breaks = field.breakpoints_1d();

    let points: Vec<F> = x_set
        .endpoints()
        .into_iter()
        .chain(y_set.endpoints())
        .chain(field_breaks.iter().copied())
        .filter(|v| v.is_finite())
        .collect();
    let mut outer_breaks = Vec::new();
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            let gap = (a - b).abs();
            if gap > F::zero() {
                outer_breaks.push(gap);
            }
        }
    }

    let inner_tol = Tolerance::new(1e-15, 1e-13).with_max_panels(500);
    let phi = |r: F| -> Result<F> {
        let mut total = F::zero();
        for sign in [F::one(), -F::one()] {
            let h = [sign * r];
            let pieces = x_set.intersect(&y_set.shift(-sign * r));
            let breaks: Vec<F> = field_breaks
                .iter()
                .flat_map(|&b| [b, b - sign * r])
                .collect();
            for &(a, b) in pieces.parts() {
                let part = try_integrate_with_breaks(
                    |t| {
                        let du = field.increment(&[t], &h);
                        let v = if jumpy {
                            du.abs().powf(p) / r
                        } else {
                            (du.abs() / r).powf(p)
                        };
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(Error::NonFinite {
                                location: format!("x = {t}, h = {} for field `{}`", h[0], field.id()),
                            })
                        }
                    },
                    a,
                    b,
                    &breaks,
                    &inner_tol,
                )?;
                total = total + part.value;
            }
        }
        Ok(total)
    };
    // for jump fields Φ(r)/r is constant below the smallest gap, and the
    // shifted breakpoints lose digits there
    let floor = if jumpy {
        outer_breaks.iter().copied().fold(F::infinity(), F::min) * F::of(0.5)
    } else {
        radial_floor()
    };
    kernel.integrate_radial(F::zero(), F::infinity(), q, floor, &outer_breaks, phi)
}

#[cfg(test)]
mod tests;

//! Test functions u: values, gradients, accurate differences, norms and
//! BV seminorms.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::geometry::Domain;
use crate::quad::{try_integrate_with_breaks, Tolerance};
use crate::record::Record;
use crate::scalar::Real;
use crate::special::{ball_volume, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Smooth,
    Lipschitz,
    PiecewiseConstant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field<F> {
    Constant(F),
    /// a·x + b
    Linear { slope: Vec<F>, offset: F },
    /// exp(-|x|²)
    Gaussian,
    /// max(0, 1 - |x|)
    Tent,
    /// exp(1 - 1/(1 - |x|²/R²)) inside B_R, 0 outside; equals 1 at 0.
    SmoothBump { radius: F },
    /// (x₁/R) times the smooth bump; odd in x.
    OddBump { radius: F },
    /// Piecewise constant in coordinate `axis`: `values[k]` between
    /// `at[k-1]` and `at[k]`.
    Steps { axis: usize, at: Vec<F>, values: Vec<F> },
    /// `inside` on the open ball, `outside` elsewhere.
    IndicatorBall { center: Vec<F>, radius: F, inside: F, outside: F },
    /// -1/2 where x_d < 0 and +1/2 where x_d > 0.
    SignJump,
    /// scale·u + shift
    Affine { inner: Box<Field<F>>, scale: F, shift: F },
}

pub const FIELD_KEYS: [&str; 13] = [
    "kind", "value", "slope", "offset", "radius", "center", "axis", "at", "values", "inside", "outside", "scale",
    "shift",
];

fn norm2<F: Real>(x: &[F]) -> F {
    x.iter().map(|&v| v * v).sum()
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Exponent of the smooth bump at s = |x|²/R² < 1.
fn bump_log<F: Real>(s: F) -> F {
    F::one() - F::one() / (F::one() - s)
}

fn bump<F: Real>(x: &[F], radius: F) -> F {
    let s = norm2(x) / (radius * radius);
    if s < F::one() {
        bump_log(s).exp()
    } else {
        F::zero()
    }
}

/// bump(x + h) - bump(x) without cancellation for small h.
fn bump_increment<F: Real>(x: &[F], h: &[F], radius: F) -> F {
    let r2 = radius * radius;
    let sx = norm2(x) / r2;
    let y: Vec<F> = x.iter().zip(h).map(|(&a, &b)| a + b).collect();
    let sy = norm2(&y) / r2;
    if sx < F::one() && sy < F::one() {
        let q = (F::of(2.0) * dot(x, h) + norm2(h)) / r2;
        let dg = -q / ((F::one() - sx) * (F::one() - sy));
        if dg.abs() > F::one() {
            return bump_log(sy).exp() - bump_log(sx).exp();
        }
        bump_log(sx).exp() * dg.exp_m1()
    } else {
        bump(&y, radius) - bump(x, radius)
    }
}

/// A surface across which a piecewise-constant field jumps.
#[derive(Debug, Clone, PartialEq)]
pub enum Interface<F> {
    /// {x : x[axis] = at}
    Plane { axis: usize, at: F },
    /// {x : |x - center| = radius}
    Sphere { center: Vec<F>, radius: F },
}

impl<F: Real> Interface<F> {
    /// Which side of the surface `x` lies on.
    pub fn side(&self, x: &[F]) -> bool {
        match self {
            Interface::Plane { axis, at } => x[*axis] >= *at,
            Interface::Sphere { center, radius } => {
                let d2: F = x.iter().zip(center).map(|(&a, &b)| (a - b) * (a - b)).sum();
                d2 <= *radius * *radius
            }
        }
    }

    /// Unit normal at a surface point `z`, pointing to the side where
    /// `side` is true.
    pub fn normal(&self, z: &[F], out: &mut [F]) {
        match self {
            Interface::Plane { axis, .. } => {
                out.iter_mut().for_each(|v| *v = F::zero());
                out[*axis] = F::one();
            }
            Interface::Sphere { center, radius } => {
                for k in 0..out.len() {
                    out[k] = (center[k] - z[k]) / *radius;
                }
            }
        }
    }
}

impl<F: Real> Field<F> {
    pub fn linear(slope: Vec<F>, offset: F) -> Self {
        Field::Linear { slope, offset }
    }

    pub fn identity_1d() -> Self {
        Field::Linear {
            slope: vec![F::one()],
            offset: F::zero(),
        }
    }

    pub fn bump(radius: F) -> Self {
        Field::SmoothBump { radius }
    }

    pub fn scaled(self, scale: F) -> Self {
        Field::Affine {
            inner: Box::new(self),
            scale,
            shift: F::zero(),
        }
    }

    pub fn shifted(self, shift: F) -> Self {
        Field::Affine {
            inner: Box::new(self),
            scale: F::one(),
            shift,
        }
    }

    pub fn regularity(&self) -> Regularity {
        match self {
            Field::Constant(_)
            | Field::Linear { .. }
            | Field::Gaussian
            | Field::SmoothBump { .. }
            | Field::OddBump { .. } => Regularity::Smooth,
            Field::Tent => Regularity::Lipschitz,
            Field::Steps { .. } | Field::IndicatorBall { .. } | Field::SignJump => Regularity::PiecewiseConstant,
            Field::Affine { inner, .. } => inner.regularity(),
        }
    }

    /// Jump surfaces in dimension `dim`; empty unless piecewise constant.
    pub fn interfaces(&self, dim: usize) -> Vec<Interface<F>> {
        match self {
            Field::SignJump => vec![Interface::Plane {
                axis: dim - 1,
                at: F::zero(),
            }],
            Field::Steps { axis, at, values } => at
                .iter()
                .enumerate()
                .filter(|(k, _)| values[k + 1] != values[*k])
                .map(|(_, &a)| Interface::Plane { axis: *axis, at: a })
                .collect(),
            Field::IndicatorBall {
                center,
                radius,
                inside,
                outside,
            } if inside != outside => vec![Interface::Sphere {
                center: center.clone(),
                radius: *radius,
            }],
            Field::Affine { inner, scale, .. } if *scale != F::zero() => inner.interfaces(dim),
            _ => Vec::new(),
        }
    }

    /// Radial profile fields, u(x) = φ(|x|).
    pub fn is_radial(&self) -> bool {
        match self {
            Field::Constant(_) | Field::Gaussian | Field::Tent | Field::SmoothBump { .. } => true,
            Field::Affine { inner, .. } => inner.is_radial(),
            _ => false,
        }
    }

    /// Radii where a radial field is not smooth.
    pub fn kink_radii(&self) -> Vec<F> {
        match self {
            Field::Tent => vec![F::zero(), F::one()],
            Field::SmoothBump { radius } | Field::OddBump { radius } => vec![*radius],
            Field::IndicatorBall { radius, .. } => vec![*radius],
            Field::Affine { inner, .. } => inner.kink_radii(),
            _ => vec![],
        }
    }

    pub fn eval(&self, x: &[F]) -> F {
        match self {
            Field::Constant(c) => *c,
            Field::Linear { slope, offset } => dot(slope, x) + *offset,
            Field::Gaussian => (-norm2(x)).exp(),
            Field::Tent => (F::one() - norm2(x).sqrt()).max(F::zero()),
            Field::SmoothBump { radius } => bump(x, *radius),
            Field::OddBump { radius } => x[0] / *radius * bump(x, *radius),
            Field::Steps { axis, at, values } => {
                let k = at.iter().filter(|&&a| a <= x[*axis]).count();
                values[k]
            }
            Field::IndicatorBall {
                center,
                radius,
                inside,
                outside,
            } => {
                let r2: F = x.iter().zip(center).map(|(&a, &c)| (a - c) * (a - c)).sum();
                if r2 < *radius * *radius {
                    *inside
                } else {
                    *outside
                }
            }
            Field::SignJump => {
                let v = x[x.len() - 1];
                let half = F::of(0.5);
                if v > F::zero() {
                    half
                } else if v < F::zero() {
                    -half
                } else {
                    F::zero()
                }
            }
            Field::Affine { inner, scale, shift } => *scale * inner.eval(x) + *shift,
        }
    }

    /// ∇u(x); an error where u is not differentiable.
    pub fn grad(&self, x: &[F]) -> Result<Vec<F>> {
        let d = x.len();
        let not_diff = || {
            Err(Error::Unsupported(format!(
                "field `{}` is not differentiable at {:?}",
                self.id(),
                x.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>()
            )))
        };
        match self {
            Field::Constant(_) => Ok(vec![F::zero(); d]),
            Field::Linear { slope, .. } => Ok(slope.clone()),
            Field::Gaussian => {
                let e = (-norm2(x)).exp();
                Ok(x.iter().map(|&v| F::of(-2.0) * v * e).collect())
            }
            Field::Tent => {
                let r = norm2(x).sqrt();
                if r == F::zero() || r == F::one() {
                    return not_diff();
                }
                if r > F::one() {
                    return Ok(vec![F::zero(); d]);
                }
                Ok(x.iter().map(|&v| -v / r).collect())
            }
            Field::SmoothBump { radius } => {
                let r2 = *radius * *radius;
                let s = norm2(x) / r2;
                if s >= F::one() {
                    return Ok(vec![F::zero(); d]);
                }
                let one_minus = F::one() - s;
                let factor = -bump_log(s).exp() / (one_minus * one_minus) * F::of(2.0) / r2;
                Ok(x.iter().map(|&v| factor * v).collect())
            }
            Field::OddBump { radius } => {
                let b = bump(x, *radius);
                let mut g = Field::SmoothBump { radius: *radius }.grad(x)?;
                for v in g.iter_mut() {
                    *v = *v * x[0] / *radius;
                }
                g[0] = g[0] + b / *radius;
                Ok(g)
            }
            Field::Steps { axis, at, .. } => {
                if at.contains(&x[*axis]) {
                    return not_diff();
                }
                Ok(vec![F::zero(); d])
            }
            Field::IndicatorBall { center, radius, .. } => {
                let r2: F = x.iter().zip(center).map(|(&a, &c)| (a - c) * (a - c)).sum();
                if r2 == *radius * *radius {
                    return not_diff();
                }
                Ok(vec![F::zero(); d])
            }
            Field::SignJump => {
                if x[d - 1] == F::zero() {
                    return not_diff();
                }
                Ok(vec![F::zero(); d])
            }
            Field::Affine { inner, scale, .. } => Ok(inner.grad(x)?.into_iter().map(|v| *scale * v).collect()),
        }
    }

    /// Δu(x) for smooth fields.
    pub fn laplacian(&self, x: &[F]) -> Result<F> {
        let d = F::of_usize(x.len());
        let two = F::of(2.0);
        let four = F::of(4.0);
        match self {
            Field::Constant(_) | Field::Linear { .. } => Ok(F::zero()),
            Field::Gaussian => {
                let r2 = norm2(x);
                Ok((-r2).exp() * (four * r2 - two * d))
            }
            Field::SmoothBump { radius } => {
                let r2 = *radius * *radius;
                let s = norm2(x) / r2;
                if s >= F::one() {
                    return Ok(F::zero());
                }
                let w = F::one() - s;
                let g1 = -F::one() / (w * w);
                let g2 = -two / (w * w * w);
                let u = bump_log(s).exp();
                Ok(u * ((g1 * g1 + g2) * four * s / r2 + g1 * two * d / r2))
            }
            Field::Affine { inner, scale, .. } => Ok(*scale * inner.laplacian(x)?),
            _ => Err(Error::Unsupported(format!("Laplacian of field `{}`", self.id()))),
        }
    }

    /// u(x + h) - u(x), accurate to relative rounding even for tiny |h|.
    pub fn increment(&self, x: &[F], h: &[F]) -> F {
        match self {
            Field::Constant(_) => F::zero(),
            Field::Linear { slope, .. } => dot(slope, h),
            Field::Gaussian => {
                let q = F::of(2.0) * dot(x, h) + norm2(h);
                (-norm2(x)).exp() * (-q).exp_m1()
            }
            Field::Tent => {
                let nx = norm2(x).sqrt();
                let y: Vec<F> = x.iter().zip(h).map(|(&a, &b)| a + b).collect();
                let ny = norm2(&y).sqrt();
                if nx < F::one() && ny < F::one() {
                    let s = nx + ny;
                    if s == F::zero() {
                        return F::zero();
                    }
                    -(F::of(2.0) * dot(x, h) + norm2(h)) / s
                } else {
                    (F::one() - ny).max(F::zero()) - (F::one() - nx).max(F::zero())
                }
            }
            Field::SmoothBump { radius } => bump_increment(x, h, *radius),
            Field::OddBump { radius } => {
                let y: Vec<F> = x.iter().zip(h).map(|(&a, &b)| a + b).collect();
                (h[0] * bump(&y, *radius) + x[0] * bump_increment(x, h, *radius)) / *radius
            }
            Field::Steps { .. } | Field::IndicatorBall { .. } | Field::SignJump => {
                let y: Vec<F> = x.iter().zip(h).map(|(&a, &b)| a + b).collect();
                self.eval(&y) - self.eval(x)
            }
            Field::Affine { inner, scale, .. } => *scale * inner.increment(x, h),
        }
    }

    /// u(x + h) + u(x - h) - 2u(x).
    pub fn second_difference(&self, x: &[F], h: &[F]) -> F {
        match self {
            Field::Constant(_) | Field::Linear { .. } => F::zero(),
            Field::Gaussian => {
                // e^{-|x|²}·2[e^{-|h|²}(cosh 2x·h - 1) + expm1(-|h|²)]
                let two = F::of(2.0);
                let sh = dot(x, h).sinh();
                let hh = norm2(h);
                two * (-norm2(x)).exp() * ((-hh).exp() * two * sh * sh + (-hh).exp_m1())
            }
            Field::Affine { inner, scale, .. } => *scale * inner.second_difference(x, h),
            _ => {
                let neg: Vec<F> = h.iter().map(|&v| -v).collect();
                self.increment(x, h) + self.increment(x, &neg)
            }
        }
    }

    /// Points of the line where a 1-D field or its derivative jumps.
    pub fn breakpoints_1d(&self) -> Vec<F> {
        let mut out = match self {
            Field::Tent => vec![-F::one(), F::zero(), F::one()],
            Field::SmoothBump { radius } | Field::OddBump { radius } => vec![-*radius, *radius],
            Field::Steps { axis: 0, at, .. } => at.clone(),
            Field::IndicatorBall { center, radius, .. } if center.len() == 1 => {
                vec![center[0] - *radius, center[0] + *radius]
            }
            Field::SignJump => vec![F::zero()],
            Field::Affine { inner, .. } => inner.breakpoints_1d(),
            _ => vec![],
        };
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        out.dedup();
        out
    }

    /// Jump locations and magnitudes |u(b+) - u(b-)| of a 1-D field.
    pub fn jumps_1d(&self) -> Vec<(F, F)> {
        match self {
            Field::Steps { axis: 0, at, values } => {
                at.iter().enumerate().map(|(k, &a)| (a, (values[k + 1] - values[k]).abs())).collect()
            }
            Field::IndicatorBall {
                center,
                radius,
                inside,
                outside,
            } if center.len() == 1 => {
                let j = (*inside - *outside).abs();
                vec![(center[0] - *radius, j), (center[0] + *radius, j)]
            }
            Field::SignJump => vec![(F::zero(), F::one())],
            Field::Affine { inner, scale, .. } => {
                inner.jumps_1d().into_iter().map(|(a, j)| (a, j * scale.abs())).collect()
            }
            _ => vec![],
        }
        .into_iter()
        .filter(|(_, j)| *j > F::zero())
        .collect()
    }

    /// ∫_Ω |∇u|^p dx.
    pub fn grad_lp_norm(&self, domain: &Domain<F>, p: F) -> Result<F> {
        if self.regularity() == Regularity::PiecewiseConstant {
            return Err(Error::Unsupported(format!(
                "field `{}` is piecewise constant; use the BV seminorm",
                self.id()
            )));
        }
        if !(p >= F::one()) {
            return invalid(format!("exponent p = {p} must be >= 1"));
        }
        match self {
            Field::Constant(_) => return Ok(F::zero()),
            Field::Linear { slope, .. } => return Ok(norm2(slope).sqrt().powf(p) * domain.volume()?),
            _ => {}
        }
        let d = domain.dim();
        self.integrate_over(domain, |x| {
            let g = self.grad(x).or_else(|_| {
                // kinks are measure zero; use a one-sided value
                let nudged: Vec<F> = x.iter().map(|&v| v + F::of(1e-12)).collect();
                self.grad(&nudged)
            })?;
            debug_assert_eq!(g.len(), d);
            Ok(norm2(&g).sqrt().powf(p))
        })
    }

    /// ∫_Ω |u|^p dx.
    pub fn lp_norm(&self, domain: &Domain<F>, p: F) -> Result<F> {
        if let Field::Constant(c) = self {
            return Ok(c.abs().powf(p) * domain.volume()?);
        }
        self.integrate_over(domain, |x| Ok(self.eval(x).abs().powf(p)))
    }

    /// ‖u‖^p_{L^p} + ‖∇u‖^p_{L^p} on Ω.
    pub fn sobolev_norm_pow(&self, domain: &Domain<F>, p: F) -> Result<F> {
        Ok(self.lp_norm(domain, p)? + self.grad_lp_norm(domain, p)?)
    }

    /// ∫_Ω f: 1-D quadrature, polar quadrature for radial fields on centered
    /// balls, nested quadrature on boxes and balls otherwise.
    pub fn integrate_over<G>(&self, domain: &Domain<F>, f: G) -> Result<F>
    where
        G: Fn(&[F]) -> Result<F>,
    {
        let d = domain.dim();
        let tol = Tolerance::new(1e-13, 1e-12).with_max_panels(2000);
        if d == 1 {
            let set = domain.interval_set()?;
            let breaks = self.breakpoints_1d();
            let mut total = F::zero();
            for &(a, b) in set.parts() {
                total = total + try_integrate_with_breaks(|t| f(&[t]), a, b, &breaks, &tol)?.value;
            }
            return Ok(total);
        }
        let centered_ball = match domain {
            Domain::Ball { center, radius } if center.iter().all(|c| *c == F::zero()) => Some(*radius),
            Domain::FullSpace { .. } => Some(F::infinity()),
            _ => None,
        };
        if let (true, Some(radius)) = (self.is_radial(), centered_ball) {
            return self.integrate_polar(d, radius, f);
        }
        if !domain.is_bounded() {
            return Err(Error::Unsupported(format!(
                "integral of field `{}` over `{}`",
                self.id(),
                domain.id()
            )));
        }
        self.integrate_nested(domain, &f)
    }

    fn integrate_polar<G>(&self, d: usize, radius: F, f: G) -> Result<F>
    where
        G: Fn(&[F]) -> Result<F>,
    {
        let tol = Tolerance::new(1e-13, 1e-12).with_max_panels(2000);
        let mut x = vec![F::zero(); d];
        let inner = try_integrate_with_breaks(
            |r| {
                x[0] = r;
                Ok(f(&x)? * r.powi(d as i32 - 1))
            },
            F::zero(),
            radius,
            &self.kink_radii(),
            &tol,
        )?;
        Ok(sphere_area::<F>(d) * inner.value)
    }

    /// Iterated 1-D quadrature over the sections of the domain.
    pub fn integrate_nested<G>(&self, domain: &Domain<F>, f: &G) -> Result<F>
    where
        G: Fn(&[F]) -> Result<F>,
    {
        self.nested_level(domain, f, &[])
    }

    fn nested_level<G>(&self, domain: &Domain<F>, f: &G, prefix: &[F]) -> Result<F>
    where
        G: Fn(&[F]) -> Result<F>,
    {
        let d = domain.dim();
        let level = prefix.len();
        let tol = if level + 1 == d {
            Tolerance::new(1e-14, 1e-13).with_max_panels(2000)
        } else {
            Tolerance::new(1e-12, 1e-11).with_max_panels(2000)
        };
        let used: F = prefix.iter().map(|&v| v * v).sum();
        let mut breaks: Vec<F> = Vec::new();
        for rho in self.kink_radii() {
            let w2 = rho * rho - used;
            if w2 >= F::zero() {
                let w = w2.sqrt();
                breaks.push(-w);
                breaks.push(w);
            }
        }
        let mut total = F::zero();
        for (a, b) in domain.section(prefix)? {
            let mut work = prefix.to_vec();
            let piece = try_integrate_with_breaks(
                |t| {
                    work.truncate(level);
                    work.push(t);
                    if level + 1 == d {
                        f(&work)
                    } else {
                        self.nested_level(domain, f, &work)
                    }
                },
                a,
                b,
                &breaks,
                &tol,
            )?;
            total = total + piece.value;
        }
        Ok(total)
    }

    /// Total variation |u|_BV(Ω): analytic for piecewise-constant fields,
    /// ‖∇u‖_{L¹} otherwise.
    pub fn bv_seminorm(&self, domain: &Domain<F>) -> Result<F> {
        if self.regularity() != Regularity::PiecewiseConstant {
            return self.grad_lp_norm(domain, F::one());
        }
        if domain.dim() == 1 {
            return Ok(self
                .jumps_1d()
                .into_iter()
                .filter(|(at, _)| domain.contains(&[*at]))
                .map(|(_, j)| j)
                .sum());
        }
        self.interface_measure(domain)
    }

    fn interface_measure(&self, domain: &Domain<F>) -> Result<F> {
        let d = domain.dim();
        match self {
            Field::Affine { inner, scale, .. } => Ok(scale.abs() * inner.interface_measure(domain)?),
            Field::SignJump => hyperplane_measure(domain, d - 1, F::zero()),
            Field::Steps { axis, at, values } => {
                let mut total = F::zero();
                for (k, &a) in at.iter().enumerate() {
                    let j = (values[k + 1] - values[k]).abs();
                    if j > F::zero() {
                        total = total + j * hyperplane_measure(domain, *axis, a)?;
                    }
                }
                Ok(total)
            }
            Field::IndicatorBall {
                center,
                radius,
                inside,
                outside,
            } => {
                let j = (*inside - *outside).abs();
                let sphere = Domain::Ball {
                    center: center.clone(),
                    radius: *radius,
                };
                if domain.contains_compactly(&sphere)? {
                    return Ok(j * sphere_area::<F>(d) * radius.powi(d as i32 - 1));
                }
                if let Domain::Ball { center: c, radius: r } = domain {
                    let dist: F = c.iter().zip(center).map(|(&a, &b)| (a - b) * (a - b)).sum::<F>().sqrt();
                    if dist >= *r + *radius || dist + *r <= *radius {
                        return Ok(F::zero());
                    }
                }
                Err(Error::Unsupported(format!(
                    "sphere interface of `{}` cuts ∂Ω of `{}`",
                    self.id(),
                    domain.id()
                )))
            }
            _ => unreachable!("only piecewise-constant fields reach here"),
        }
    }

    pub fn to_record(&self) -> Record {
        fn join<F: Real>(xs: &[F]) -> String {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":")
        }
        let mut r = Record::new();
        match self {
            Field::Constant(c) => {
                r.push("kind", "constant").push("value", c);
            }
            Field::Linear { slope, offset } => {
                r.push("kind", "linear").push("slope", join(slope)).push("offset", offset);
            }
            Field::Gaussian => {
                r.push("kind", "gaussian");
            }
            Field::Tent => {
                r.push("kind", "tent");
            }
            Field::SmoothBump { radius } => {
                r.push("kind", "bump").push("radius", radius);
            }
            Field::OddBump { radius } => {
                r.push("kind", "odd-bump").push("radius", radius);
            }
            Field::Steps { axis, at, values } => {
                r.push("kind", "steps")
                    .push("axis", axis)
                    .push("at", join(at))
                    .push("values", join(values));
            }
            Field::IndicatorBall {
                center,
                radius,
                inside,
                outside,
            } => {
                r.push("kind", "indicator-ball")
                    .push("center", join(center))
                    .push("radius", radius)
                    .push("inside", inside)
                    .push("outside", outside);
            }
            Field::SignJump => {
                r.push("kind", "sign-jump");
            }
            Field::Affine { inner, scale, shift } => {
                r = inner.to_record();
                if *scale != F::one() {
                    r.push("scale", scale);
                }
                if *shift != F::zero() {
                    r.push("shift", shift);
                }
            }
        }
        r
    }

    pub fn id(&self) -> String {
        self.to_record().to_string()
    }

    pub fn from_record(rec: &Record) -> Result<Self> {
        rec.check_keys("field", &FIELD_KEYS)?;
        let list = |key: &str| -> Result<Vec<F>> {
            Ok(rec
                .f64_list(key)?
                .ok_or_else(|| Error::Record(format!("field needs key `{key}`")))?
                .into_iter()
                .map(F::of)
                .collect())
        };
        let num = |key: &str, default: Option<f64>| -> Result<F> {
            match (rec.f64(key)?, default) {
                (Some(v), _) | (None, Some(v)) => Ok(F::of(v)),
                (None, None) => Err(Error::Record(format!("field needs key `{key}`"))),
            }
        };
        let base = match rec.required("kind")? {
            "constant" => Field::Constant(num("value", None)?),
            "linear" => Field::Linear {
                slope: list("slope")?,
                offset: num("offset", Some(0.0))?,
            },
            "gaussian" => Field::Gaussian,
            "tent" => Field::Tent,
            "bump" => Field::SmoothBump {
                radius: num("radius", Some(1.0))?,
            },
            "odd-bump" => Field::OddBump {
                radius: num("radius", Some(1.0))?,
            },
            "steps" => {
                let at = list("at")?;
                let values = list("values")?;
                if values.len() != at.len() + 1 || at.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Record(
                        "steps need increasing `at` and one more entry in `values`".into(),
                    ));
                }
                Field::Steps {
                    axis: rec.usize("axis")?.unwrap_or(0),
                    at,
                    values,
                }
            }
            "indicator-ball" => Field::IndicatorBall {
                center: list("center")?,
                radius: num("radius", None)?,
                inside: num("inside", Some(1.0))?,
                outside: num("outside", Some(0.0))?,
            },
            "sign-jump" => Field::SignJump,
            other => {
                return Err(Error::Record(format!(
                    "unknown field kind `{other}`; expected constant, linear, gaussian, tent, bump, odd-bump, steps, indicator-ball or sign-jump"
                )))
            }
        };
        let scale = num("scale", Some(1.0))?;
        let shift = num("shift", Some(0.0))?;
        if scale == F::one() && shift == F::zero() {
            return Ok(base);
        }
        Ok(Field::Affine {
            inner: Box::new(base),
            scale,
            shift,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_record(&Record::parse(text)?)
    }
}

impl<F: Real> fmt::Display for Field<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// (d-1)-measure of {x_axis = at} ∩ Ω.
fn hyperplane_measure<F: Real>(domain: &Domain<F>, axis: usize, at: F) -> Result<F> {
    let d = domain.dim();
    match domain {
        Domain::Box { lo, hi } => {
            if !(at > lo[axis] && at < hi[axis]) {
                return Ok(F::zero());
            }
            Ok((0..d).filter(|&k| k != axis).fold(F::one(), |p, k| p * (hi[k] - lo[k])))
        }
        Domain::Ball { center, radius } => {
            let off = (at - center[axis]).abs();
            if off >= *radius {
                return Ok(F::zero());
            }
            Ok(ball_volume(d - 1, (*radius * *radius - off * off).sqrt()))
        }
        Domain::SlitBall { center, radius, gap } => {
            if axis == d - 1 {
                let off = (at - center[axis]).abs();
                if off <= *gap || off >= *radius {
                    return Ok(F::zero());
                }
                return Ok(ball_volume(d - 1, (*radius * *radius - off * off).sqrt()));
            }
            if *gap == F::zero() {
                let ball = Domain::Ball {
                    center: center.clone(),
                    radius: *radius,
                };
                return hyperplane_measure(&ball, axis, at);
            }
            Err(Error::Unsupported("interface crossing a thick slit".into()))
        }
        _ => Err(Error::Unsupported(format!(
            "interface measure inside `{}`",
            domain.id()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit() -> Domain<f64> {
        Domain::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn evaluation_and_gradients() {
        let lin = Field::linear(vec![2.0, -1.0], 0.5);
        assert_eq!(lin.grad(&[0.3, 9.0]).unwrap(), vec![2.0, -1.0]);
        assert_eq!(Field::<f64>::Gaussian.grad(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(Field::<f64>::SignJump.eval(&[-0.5]), -0.5);
        assert_eq!(Field::<f64>::SignJump.eval(&[0.25, 0.5]), 0.5);
        assert!(Field::<f64>::SignJump.grad(&[0.0]).is_err());
        assert_eq!(Field::<f64>::SignJump.grad(&[0.3]).unwrap(), vec![0.0]);
        assert_eq!(Field::<f64>::bump(0.5).eval(&[0.0]), 1.0);
        assert_eq!(Field::<f64>::bump(0.5).eval(&[0.5]), 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let fields = [
            Field::<f64>::Gaussian,
            Field::Tent,
            Field::bump(0.8),
            Field::OddBump { radius: 0.8 },
            Field::Gaussian.scaled(3.0).shifted(1.0),
        ];
        let x = [0.21, -0.33];
        let h = 1e-6;
        for f in &fields {
            let g = f.grad(&x).unwrap();
            for k in 0..2 {
                let mut e = [0.0; 2];
                e[k] = h;
                let mut m = [0.0; 2];
                m[k] = -h;
                let fd = (f.increment(&x, &e) - f.increment(&x, &m)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-7, "{f} d{k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn increments_are_accurate_at_tiny_offsets() {
        let x = [0.3];
        let h = [1e-200];
        let d: f64 = Field::Gaussian.increment(&x, &h) / h[0];
        assert!((d - (-0.6 * (-0.09f64).exp())).abs() < 1e-15);
        let t: f64 = Field::Tent.increment(&x, &h) / h[0];
        assert!((t + 1.0).abs() < 1e-15);
        let b = Field::<f64>::bump(1.0);
        let g = b.grad(&x).unwrap()[0];
        assert!((b.increment(&x, &h) / h[0] - g).abs() < 1e-14);
        let sd: f64 = Field::Gaussian.second_difference(&[0.0], &[1e-100]);
        assert!((sd / 1e-200 + 2.0).abs() < 1e-14);
    }

    #[test]
    fn laplacian_matches_second_differences() {
        let x = [0.2, -0.35];
        let h = 1e-4;
        for f in [Field::<f64>::Gaussian, Field::bump(0.9), Field::Gaussian.scaled(-2.0)] {
            let mut fd = 0.0;
            for k in 0..2 {
                let mut e = [0.0; 2];
                e[k] = h;
                fd += f.second_difference(&x, &e) / (h * h);
            }
            let lap = f.laplacian(&x).unwrap();
            assert!((fd - lap).abs() < 1e-6 * lap.abs().max(1.0), "{f}: {fd} vs {lap}");
        }
        assert_eq!(Field::<f64>::Gaussian.laplacian(&[0.0, 0.0]).unwrap(), -4.0);
        assert!(Field::<f64>::Tent.laplacian(&[0.1]).is_err());
    }

    #[test]
    fn second_difference_of_linear_vanishes() {
        let f = Field::linear(vec![1.5, -2.0], 3.0);
        assert_eq!(f.second_difference(&[0.3, 0.1], &[0.7, 0.2]), 0.0);
    }

    #[test]
    fn grad_norms() {
        let lin = Field::<f64>::identity_1d();
        assert!((lin.grad_lp_norm(&unit(), 2.0).unwrap() - 1.0).abs() < 1e-14);
        let tent = Field::<f64>::Tent;
        let m11 = Domain::interval(-1.0, 1.0).unwrap();
        assert!((tent.grad_lp_norm(&m11, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(Field::<f64>::SignJump.grad_lp_norm(&m11, 1.0).is_err());
    }

    #[test]
    fn gaussian_norm_on_disc_two_routes() {
        let g = Field::<f64>::Gaussian;
        let disc = Domain::ball(vec![0.0, 0.0], 3.0).unwrap();
        let closed = PI * (1.0 - 19.0 * (-18.0f64).exp());
        let polar = g.grad_lp_norm(&disc, 2.0).unwrap();
        assert!((polar - closed).abs() < 1e-10);
        let nested = g
            .integrate_nested(&disc, &|x: &[f64]| Ok(g.grad(x).unwrap().iter().map(|v| v * v).sum()))
            .unwrap();
        assert!((nested - closed).abs() < 1e-8, "{nested} vs {closed}");
    }

    #[test]
    fn tent_sobolev_norm_on_line() {
        let line = Domain::FullSpace { dim: 1 };
        for &p in &[1.0, 2.0] {
            let s = Field::<f64>::Tent.sobolev_norm_pow(&line, p).unwrap();
            assert!((s - (2.0 / (p + 1.0) + 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn bv_seminorms() {
        let m11 = Domain::interval(-1.0, 1.0).unwrap();
        assert_eq!(Field::<f64>::SignJump.bv_seminorm(&m11).unwrap(), 1.0);
        assert_eq!(Field::<f64>::SignJump.bv_seminorm(&Domain::SlitInterval).unwrap(), 0.0);
        let ind = Field::IndicatorBall {
            center: vec![0.0, 0.0],
            radius: 0.5,
            inside: 1.0,
            outside: 0.0,
        };
        let disc = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!((ind.bv_seminorm(&disc).unwrap() - PI).abs() < 1e-14);
        assert_eq!(Field::<f64>::SignJump.bv_seminorm(&disc).unwrap(), 2.0);
        assert_eq!(Field::<f64>::SignJump.bv_seminorm(&Domain::slit_ball(2)).unwrap(), 0.0);
        let ball3 = Domain::ball(vec![0.0; 3], 1.0).unwrap();
        assert!((Field::<f64>::SignJump.bv_seminorm(&ball3).unwrap() - PI).abs() < 1e-14);
        let steps = Field::Steps { axis: 0, at: vec![-0.5, 0.5], values: vec![0.0, 2.0, 1.0] };
        assert_eq!(steps.bv_seminorm(&m11).unwrap(), 3.0);
        let tent = Field::<f64>::Tent;
        assert!((tent.bv_seminorm(&m11).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_bound_and_monotonicity() {
        let tent = Field::<f64>::Tent;
        let small = Domain::interval(-0.5, 0.2).unwrap();
        let big = Domain::interval(-0.7, 1.4).unwrap();
        for &p in &[1.0, 2.0, 3.0] {
            let a = tent.grad_lp_norm(&small, p).unwrap();
            let b = tent.grad_lp_norm(&big, p).unwrap();
            assert!(a <= b && b <= big.volume().unwrap());
        }
        let g = Field::<f64>::Gaussian;
        let lip = (2.0f64 / std::f64::consts::E).sqrt();
        let sq = Domain::Box { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] };
        assert!(g.grad_lp_norm(&sq, 2.0).unwrap() <= lip * lip * 4.0);
    }

    #[test]
    fn records_round_trip() {
        let fields = [
            Field::<f64>::Constant(2.5),
            Field::linear(vec![1.0, -2.0], 0.5),
            Field::Gaussian,
            Field::Tent,
            Field::bump(0.5),
            Field::OddBump { radius: 0.75 },
            Field::Steps { axis: 0, at: vec![-0.5, 0.5], values: vec![0.0, 1.0, 0.0] },
            Field::IndicatorBall { center: vec![0.0, 0.0], radius: 0.5, inside: 1.0, outside: 0.0 },
            Field::SignJump,
            Field::Tent.scaled(2.0).shifted(-1.0),
        ];
        for f in &fields {
            let back = Field::parse(&f.id()).unwrap();
            let x = [0.31, -0.12];
            let xs = &x[..if matches!(f, Field::Steps { .. }) { 1 } else { 2 }];
            assert_eq!(back.eval(xs), f.eval(xs), "{}", f.id());
            assert_eq!(back.id(), f.id());
        }
        let err = Field::<f64>::parse("kind=tent,wobble=1").unwrap_err();
        assert!(err.to_string().contains("scale"));
    }

    proptest! {
        #[test]
        fn bv_is_absolutely_homogeneous(c in -5.0f64..5.0f64) {
            let m11 = Domain::interval(-1.0, 1.0).unwrap();
            let f: Field<f64> = Field::SignJump.scaled(c);
            prop_assert!((f.bv_seminorm(&m11).unwrap() - c.abs()).abs() < 1e-14);
        }

        #[test]
        fn increment_matches_direct_difference(x in -1.5f64..1.5, h in -1.0f64..1.0) {
            for f in [Field::Gaussian, Field::Tent, Field::bump(0.9), Field::OddBump { radius: 0.9 }] {
                let direct = f.eval(&[x + h]) - f.eval(&[x]);
                prop_assert!((f.increment(&[x], &[h]) - direct).abs() < 1e-13);
            }
        }
    }
}

//! Domains Ω: membership, uniform sampling, volume, shrinking and growing.
//!
//! Open sets throughout. Slit domains exclude the slit hyperplane
//! explicitly, so `contains` is false on it even though it has measure 0.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::record::Record;
use crate::rng::uniform;
use crate::scalar::Real;
use crate::special::ball_volume;

/// Finite union of disjoint open intervals on the line; ends may be
/// infinite. Touching intervals such as (-1,0) and (0,1) stay separate.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<F> {
    parts: Vec<(F, F)>,
}

impl<F: Real> IntervalSet<F> {
    /// Sort, drop empty pieces and merge overlapping ones.
    pub fn new(mut parts: Vec<(F, F)>) -> Self {
        parts.retain(|(a, b)| b > a);
        parts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
        let mut out: Vec<(F, F)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match out.last_mut() {
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { parts: out }
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn line() -> Self {
        Self {
            parts: vec![(F::neg_infinity(), F::infinity())],
        }
    }

    pub fn parts(&self) -> &[(F, F)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: F) -> bool {
        self.parts.iter().any(|&(a, b)| x > a && x < b)
    }

    /// Lebesgue measure; infinite for unbounded sets.
    pub fn measure(&self) -> F {
        self.parts.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn is_bounded(&self) -> bool {
        self.parts.iter().all(|(a, b)| a.is_finite() && b.is_finite())
    }

    /// Open complement up to finitely many points.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.parts.len() + 1);
        let mut start = F::neg_infinity();
        for &(a, b) in &self.parts {
            if a > start {
                out.push((start, a));
            }
            start = b;
        }
        if start < F::infinity() {
            out.push((start, F::infinity()));
        }
        Self { parts: out }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a1, b1) = self.parts[i];
            let (a2, b2) = other.parts[j];
            let (lo, hi) = (a1.max(a2), b1.min(b2));
            if hi > lo {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { parts: out }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersect(&other.complement())
    }

    /// {x + t : x in self}.
    pub fn shift(&self, t: F) -> Self {
        Self {
            parts: self.parts.iter().map(|&(a, b)| (a + t, b + t)).collect(),
        }
    }

    /// Finite endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<F> {
        self.parts
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|x| x.is_finite())
            .collect()
    }
}

/// Region Ω ⊂ R^d.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain<F> {
    /// Union of open intervals on the line.
    Intervals(IntervalSet<F>),
    /// (-1, 0) ∪ (0, 1).
    SlitInterval,
    Box { lo: Vec<F>, hi: Vec<F> },
    Ball { center: Vec<F>, radius: F },
    /// Ball minus the slab |x_d - c_d| <= gap; gap = 0 removes only the
    /// hyperplane x_d = c_d.
    SlitBall { center: Vec<F>, radius: F, gap: F },
    FullSpace { dim: usize },
}

pub const DOMAIN_KEYS: [&str; 8] = ["kind", "bounds", "lo", "hi", "center", "radius", "gap", "d"];

fn dist2<F: Real>(x: &[F], c: &[F]) -> F {
    x.iter().zip(c).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

fn join<F: Real>(xs: &[F]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":")
}

impl<F: Real> Domain<F> {
    pub fn interval(a: F, b: F) -> Result<Self> {
        if !(b > a) {
            return invalid(format!("empty interval ({a}, {b})"));
        }
        Ok(Domain::Intervals(IntervalSet::new(vec![(a, b)])))
    }

    pub fn intervals(parts: Vec<(F, F)>) -> Result<Self> {
        let set = IntervalSet::new(parts);
        if set.is_empty() {
            return invalid("interval union is empty");
        }
        Ok(Domain::Intervals(set))
    }

    pub fn unit_box(dim: usize) -> Self {
        Domain::Box {
            lo: vec![F::zero(); dim],
            hi: vec![F::one(); dim],
        }
    }

    pub fn ball(center: Vec<F>, radius: F) -> Result<Self> {
        if center.is_empty() || !(radius > F::zero()) {
            return invalid("ball needs a center and a positive radius");
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn slit_ball(dim: usize) -> Self {
        Domain::SlitBall {
            center: vec![F::zero(); dim],
            radius: F::one(),
            gap: F::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Intervals(_) | Domain::SlitInterval => 1,
            Domain::Box { lo, .. } => lo.len(),
            Domain::Ball { center, .. } | Domain::SlitBall { center, .. } => center.len(),
            Domain::FullSpace { dim } => *dim,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Domain::Intervals(s) => s.is_bounded(),
            Domain::FullSpace { .. } => false,
            _ => true,
        }
    }

    pub fn contains(&self, x: &[F]) -> bool {
        match self {
            Domain::Intervals(s) => s.contains(x[0]),
            Domain::SlitInterval => x[0] > -F::one() && x[0] < F::one() && x[0] != F::zero(),
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(&v, (&a, &b))| v > a && v < b),
            Domain::Ball { center, radius } => dist2(x, center) < *radius * *radius,
            Domain::SlitBall { center, radius, gap } => {
                let d = center.len() - 1;
                dist2(x, center) < *radius * *radius && (x[d] - center[d]).abs() > *gap
            }
            Domain::FullSpace { .. } => true,
        }
    }

    pub fn volume(&self) -> Result<F> {
        match self {
            Domain::Intervals(s) => {
                if !s.is_bounded() {
                    return Err(Error::Unsupported("volume of an unbounded interval union".into()));
                }
                Ok(s.measure())
            }
            Domain::SlitInterval => Ok(F::of(2.0)),
            Domain::Box { lo, hi } => Ok(lo.iter().zip(hi).map(|(&a, &b)| b - a).fold(F::one(), |p, l| p * l)),
            Domain::Ball { center, radius } => Ok(ball_volume(center.len(), *radius)),
            Domain::SlitBall { center, radius, gap } => {
                let d = center.len();
                if *gap == F::zero() {
                    return Ok(ball_volume(d, *radius));
                }
                if d == 1 {
                    return Ok(F::of(2.0) * (*radius - *gap));
                }
                let r = *radius;
                let caps = integrate(
                    |t: F| ball_volume(d - 1, (r * r - t * t).max(F::zero()).sqrt()),
                    *gap,
                    r,
                    &Tolerance::new(0.0, 1e-13),
                )?;
                Ok(F::of(2.0) * caps.value)
            }
            Domain::FullSpace { .. } => Err(Error::Unsupported("volume of the full space".into())),
        }
    }

    /// Smallest axis-aligned box containing the domain.
    pub fn bounding_box(&self) -> Result<(Vec<F>, Vec<F>)> {
        match self {
            Domain::Intervals(s) => match (s.parts().first(), s.parts().last()) {
                (Some(a), Some(b)) if a.0.is_finite() && b.1.is_finite() => Ok((vec![a.0], vec![b.1])),
                _ => Err(Error::Unsupported("bounding box of an unbounded interval union".into())),
            },
            Domain::SlitInterval => Ok((vec![-F::one()], vec![F::one()])),
            Domain::Box { lo, hi } => Ok((lo.clone(), hi.clone())),
            Domain::Ball { center, radius } | Domain::SlitBall { center, radius, .. } => Ok((
                center.iter().map(|&c| c - *radius).collect(),
                center.iter().map(|&c| c + *radius).collect(),
            )),
            Domain::FullSpace { .. } => Err(Error::Unsupported("cannot sample the full space".into())),
        }
    }

    /// Uniform point of Ω by rejection from the bounding box. Returns the
    /// number of proposals used.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [F]) -> Result<usize> {
        let (lo, hi) = self.bounding_box()?;
        let mut tries = 0usize;
        loop {
            tries += 1;
            for (k, v) in out.iter_mut().enumerate() {
                let u: F = uniform(rng);
                *v = lo[k] + u * (hi[k] - lo[k]);
            }
            if self.contains(out) {
                return Ok(tries);
            }
            if tries > 1_000_000 {
                return Err(Error::Unsupported("rejection sampler made no progress".into()));
            }
        }
    }

    /// Distance from an interior point to the boundary.
    pub fn dist_to_boundary(&self, x: &[F]) -> F {
        if !self.contains(x) {
            return F::zero();
        }
        match self {
            Domain::Intervals(s) => s
                .parts()
                .iter()
                .find(|&&(a, b)| x[0] > a && x[0] < b)
                .map_or(F::zero(), |&(a, b)| (x[0] - a).min(b - x[0])),
            Domain::SlitInterval => (F::one() - x[0].abs()).min(x[0].abs()),
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&a, &b))| (v - a).min(b - v))
                .fold(F::infinity(), F::min),
            Domain::Ball { center, radius } => *radius - dist2(x, center).sqrt(),
            Domain::SlitBall { center, radius, gap } => {
                let d = center.len() - 1;
                (*radius - dist2(x, center).sqrt()).min((x[d] - center[d]).abs() - *gap)
            }
            Domain::FullSpace { .. } => F::infinity(),
        }
    }

    /// Ω_δ = {x in Ω : dist(x, ∂Ω) > δ}.
    pub fn inner_shrink(&self, delta: F) -> Result<Self> {
        if !(delta > F::zero()) {
            return invalid(format!("shrink distance {delta} must be > 0"));
        }
        let empty = || invalid(format!("shrinking by {delta} leaves an empty domain"));
        match self {
            Domain::Intervals(s) => {
                let set = IntervalSet::new(s.parts().iter().map(|&(a, b)| (a + delta, b - delta)).collect());
                if set.is_empty() {
                    return empty();
                }
                Ok(Domain::Intervals(set))
            }
            Domain::SlitInterval => {
                let one = F::one();
                Domain::intervals(vec![(-one + delta, -delta), (delta, one - delta)]).or_else(|_| empty())
            }
            Domain::Box { lo, hi } => {
                let lo: Vec<F> = lo.iter().map(|&a| a + delta).collect();
                let hi: Vec<F> = hi.iter().map(|&b| b - delta).collect();
                if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                    return empty();
                }
                Ok(Domain::Box { lo, hi })
            }
            Domain::Ball { center, radius } => {
                if *radius <= delta {
                    return empty();
                }
                Ok(Domain::Ball {
                    center: center.clone(),
                    radius: *radius - delta,
                })
            }
            Domain::SlitBall { center, radius, gap } => {
                if *gap + delta >= *radius - delta {
                    return empty();
                }
                Ok(Domain::SlitBall {
                    center: center.clone(),
                    radius: *radius - delta,
                    gap: *gap + delta,
                })
            }
            Domain::FullSpace { .. } => Ok(self.clone()),
        }
    }

    /// Ω(δ) = Ω + B_δ. Exact for intervals and balls; boxes and slit balls
    /// return the enclosing box or slit ball, a superset.
    pub fn outer_grow(&self, delta: F) -> Result<Self> {
        if !(delta > F::zero()) {
            return invalid(format!("grow distance {delta} must be > 0"));
        }
        Ok(match self {
            Domain::Intervals(s) => {
                let mut parts: Vec<(F, F)> = Vec::new();
                for &(a, b) in s.parts() {
                    let (a, b) = (a - delta, b + delta);
                    match parts.last_mut() {
                        Some(last) if a <= last.1 => last.1 = last.1.max(b),
                        _ => parts.push((a, b)),
                    }
                }
                Domain::Intervals(IntervalSet::new(parts))
            }
            Domain::SlitInterval => Domain::interval(-F::one() - delta, F::one() + delta)?,
            Domain::Box { lo, hi } => Domain::Box {
                lo: lo.iter().map(|&a| a - delta).collect(),
                hi: hi.iter().map(|&b| b + delta).collect(),
            },
            Domain::Ball { center, radius } => Domain::Ball {
                center: center.clone(),
                radius: *radius + delta,
            },
            Domain::SlitBall { center, radius, gap } => {
                if *gap > delta {
                    Domain::SlitBall {
                        center: center.clone(),
                        radius: *radius + delta,
                        gap: *gap - delta,
                    }
                } else {
                    Domain::Ball {
                        center: center.clone(),
                        radius: *radius + delta,
                    }
                }
            }
            Domain::FullSpace { .. } => self.clone(),
        })
    }

    /// The domain as a union of intervals (d = 1 only).
    pub fn interval_set(&self) -> Result<IntervalSet<F>> {
        match self {
            Domain::Intervals(s) => Ok(s.clone()),
            Domain::SlitInterval => Ok(IntervalSet::new(vec![(-F::one(), F::zero()), (F::zero(), F::one())])),
            Domain::Box { lo, hi } if lo.len() == 1 => Ok(IntervalSet::new(vec![(lo[0], hi[0])])),
            Domain::Ball { center, radius } if center.len() == 1 => {
                Ok(IntervalSet::new(vec![(center[0] - *radius, center[0] + *radius)]))
            }
            Domain::SlitBall { center, radius, gap } if center.len() == 1 => Ok(IntervalSet::new(vec![
                (center[0] - *radius, center[0] - *gap),
                (center[0] + *gap, center[0] + *radius),
            ])),
            Domain::FullSpace { dim: 1 } => Ok(IntervalSet::line()),
            _ => Err(Error::Unsupported(format!(
                "domain `{}` is not one-dimensional",
                self.id()
            ))),
        }
    }

    /// Range of coordinate `prefix.len()` inside Ω once the earlier
    /// coordinates are fixed to `prefix`.
    pub fn section(&self, prefix: &[F]) -> Result<Vec<(F, F)>> {
        let k = prefix.len();
        let d = self.dim();
        if k >= d {
            return invalid("section prefix must be shorter than the dimension");
        }
        let half_width = |center: &[F], radius: F| -> Option<F> {
            let used: F = prefix.iter().zip(center).map(|(&x, &c)| (x - c) * (x - c)).sum();
            let w2 = radius * radius - used;
            (w2 > F::zero()).then(|| w2.sqrt())
        };
        Ok(match self {
            Domain::Box { lo, hi } => vec![(lo[k], hi[k])],
            Domain::Ball { center, radius } => match half_width(center, *radius) {
                Some(w) => vec![(center[k] - w, center[k] + w)],
                None => vec![],
            },
            Domain::SlitBall { center, radius, gap } => match half_width(center, *radius) {
                Some(w) if k == d - 1 => IntervalSet::new(vec![
                    (center[k] - w, center[k] - *gap),
                    (center[k] + *gap, center[k] + w),
                ])
                .parts()
                .to_vec(),
                Some(w) => vec![(center[k] - w, center[k] + w)],
                None => vec![],
            },
            Domain::FullSpace { .. } => vec![(F::neg_infinity(), F::infinity())],
            _ => self.interval_set()?.parts().to_vec(),
        })
    }

    /// Whether `inner` lies in Ω at positive distance from ∂Ω.
    pub fn contains_compactly(&self, inner: &Domain<F>) -> Result<bool> {
        if inner.dim() != self.dim() {
            return invalid("subdomain dimension differs from the domain's");
        }
        if !inner.is_bounded() {
            return Ok(false);
        }
        if let Domain::FullSpace { .. } = self {
            return Ok(true);
        }
        if self.dim() == 1 {
            let outer = self.interval_set()?;
            let sub = inner.interval_set()?;
            return Ok(sub
                .parts()
                .iter()
                .all(|&(a, b)| outer.parts().iter().any(|&(c, d)| c < a && b < d)));
        }
        let unsupported = || {
            Err(Error::Unsupported(format!(
                "compact containment of `{}` in `{}`",
                inner.id(),
                self.id()
            )))
        };
        let d = self.dim() - 1;
        match (self, inner) {
            (Domain::Ball { center, radius }, Domain::Ball { center: c, radius: r }) => {
                Ok(dist2(c, center).sqrt() + *r < *radius)
            }
            (Domain::SlitBall { center, radius, gap }, Domain::Ball { center: c, radius: r }) => {
                let side = (c[d] - center[d]).abs() - *r > *gap;
                Ok(side && dist2(c, center).sqrt() + *r < *radius)
            }
            (Domain::Box { lo, hi }, Domain::Ball { center: c, radius: r }) => Ok(c
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&x, (&a, &b))| x - *r > a && x + *r < b)),
            (_, Domain::Box { lo, hi }) => {
                // Ω convex (or convex on each side of the slit): corners suffice
                let strictly = |x: &[F]| self.dist_to_boundary(x) > F::zero();
                if let Domain::SlitBall { center, gap, .. } = self {
                    let below = hi[d] < center[d] - *gap;
                    let above = lo[d] > center[d] + *gap;
                    if !(below || above) {
                        return Ok(false);
                    }
                }
                let n = lo.len();
                let mut corner = vec![F::zero(); n];
                for mask in 0..(1usize << n) {
                    for k in 0..n {
                        corner[k] = if mask >> k & 1 == 1 { hi[k] } else { lo[k] };
                    }
                    if !strictly(&corner) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => unsupported(),
        }
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        match self {
            Domain::Intervals(s) => {
                let flat: Vec<F> = s.parts().iter().flat_map(|&(a, b)| [a, b]).collect();
                r.push("kind", "intervals").push("bounds", join(&flat));
            }
            Domain::SlitInterval => {
                r.push("kind", "slit-interval");
            }
            Domain::Box { lo, hi } => {
                r.push("kind", "box").push("lo", join(lo)).push("hi", join(hi));
            }
            Domain::Ball { center, radius } => {
                r.push("kind", "ball").push("center", join(center)).push("radius", radius);
            }
            Domain::SlitBall { center, radius, gap } => {
                r.push("kind", "slit-ball")
                    .push("center", join(center))
                    .push("radius", radius)
                    .push("gap", gap);
            }
            Domain::FullSpace { dim } => {
                r.push("kind", "full").push("d", dim);
            }
        }
        r
    }

    pub fn id(&self) -> String {
        self.to_record().to_string()
    }

    pub fn from_record(rec: &Record) -> Result<Self> {
        rec.check_keys("domain", &DOMAIN_KEYS)?;
        let list = |key: &str| -> Result<Vec<F>> {
            Ok(rec
                .f64_list(key)?
                .ok_or_else(|| Error::Record(format!("domain needs key `{key}`")))?
                .into_iter()
                .map(F::of)
                .collect())
        };
        let kind = rec.required("kind")?;
        match kind {
            "intervals" | "interval" => {
                let b = list("bounds")?;
                if b.len() % 2 != 0 {
                    return Err(Error::Record("`bounds` needs an even number of values".into()));
                }
                Domain::intervals(b.chunks(2).map(|c| (c[0], c[1])).collect())
            }
            "slit-interval" => Ok(Domain::SlitInterval),
            "box" => {
                let (lo, hi) = (list("lo")?, list("hi")?);
                if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                    return Err(Error::Record("box needs matching `lo` < `hi`".into()));
                }
                Ok(Domain::Box { lo, hi })
            }
            "ball" => Domain::ball(list("center")?, F::of(rec.f64_req("radius")?)),
            "slit-ball" => {
                let center = list("center")?;
                let radius = F::of(rec.f64_req("radius")?);
                let gap = F::of(rec.f64("gap")?.unwrap_or(0.0));
                if center.is_empty() || !(radius > gap) || gap < F::zero() {
                    return Err(Error::Record("slit-ball needs 0 <= gap < radius".into()));
                }
                Ok(Domain::SlitBall { center, radius, gap })
            }
            "full" => {
                let dim = rec.usize("d")?.unwrap_or(1);
                if dim == 0 {
                    return Err(Error::Record("dimension must be >= 1".into()));
                }
                Ok(Domain::FullSpace { dim })
            }
            other => Err(Error::Record(format!(
                "unknown domain kind `{other}`; expected intervals, slit-interval, box, ball, slit-ball or full"
            ))),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_record(&Record::parse(text)?)
    }
}

impl<F: Real> fmt::Display for Domain<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

//! Piecewise radial profiles r ↦ ν(r).
//!
//! Every profile is a list of pieces on half-open radial bands (lo, hi].
//! Each piece can be evaluated both at r and at τ = ln r; the log form is
//! what the radial integrator uses, so power laws stay representable far
//! below the smallest positive float.

use std::fmt;
use std::sync::Arc;

use crate::scalar::Real;

pub type RadialFn<F> = Arc<dyn Fn(F) -> F + Send + Sync>;

#[derive(Clone)]
pub enum Shape<F> {
    /// `coef · r^exponent`
    Power { coef: F, exponent: F },
    /// `coef · (r + shift)^beta · r^(-q)`
    Shifted { coef: F, shift: F, beta: F, q: F },
    /// `coef · r^(-q) · inner(r / scale)`
    Scaled {
        inner: Arc<Shape<F>>,
        scale: F,
        coef: F,
        q: F,
    },
    /// Arbitrary nonnegative function of r.
    Custom(RadialFn<F>),
}

impl<F: fmt::Debug> fmt::Debug for Shape<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Power { coef, exponent } => write!(f, "{coef:?}·r^{exponent:?}"),
            Shape::Shifted { coef, shift, beta, q } => {
                write!(f, "{coef:?}·(r+{shift:?})^{beta:?}·r^-{q:?}")
            }
            Shape::Scaled { inner, scale, coef, q } => {
                write!(f, "{coef:?}·r^-{q:?}·[{inner:?}](r/{scale:?})")
            }
            Shape::Custom(_) => write!(f, "custom"),
        }
    }
}

impl<F: Real> Shape<F> {
    pub fn value(&self, r: F) -> F {
        match self {
            Shape::Power { coef, exponent } => *coef * r.powf(*exponent),
            Shape::Shifted { coef, shift, beta, q } => {
                *coef * (r + *shift).powf(*beta) * r.powf(-*q)
            }
            Shape::Scaled { inner, scale, coef, q } => *coef * r.powf(-*q) * inner.value(r / *scale),
            Shape::Custom(f) => f(r),
        }
    }

    /// ln ν at r = e^τ; `-inf` where the profile vanishes.
    pub fn ln_value(&self, tau: F) -> F {
        match self {
            Shape::Power { coef, exponent } => coef.ln() + *exponent * tau,
            Shape::Shifted { coef, shift, beta, q } => {
                let ln_sum = if *shift > F::zero() {
                    // ln(e^τ + s) without overflow or underflow
                    let ln_s = shift.ln();
                    let (big, small) = if tau > ln_s { (tau, ln_s) } else { (ln_s, tau) };
                    big + (small - big).exp().ln_1p()
                } else {
                    tau
                };
                coef.ln() + *beta * ln_sum - *q * tau
            }
            Shape::Scaled { inner, scale, coef, q } => {
                coef.ln() - *q * tau + inner.ln_value(tau - scale.ln())
            }
            Shape::Custom(f) => f(tau.exp()).ln(),
        }
    }

    /// The same shape evaluated at r/ε: returns g with g(r) = self(r/ε).
    fn dilate(&self, eps: F) -> Shape<F> {
        match self {
            Shape::Power { coef, exponent } => Shape::Power {
                coef: *coef * eps.powf(-*exponent),
                exponent: *exponent,
            },
            Shape::Shifted { coef, shift, beta, q } => Shape::Shifted {
                coef: *coef * eps.powf(*q - *beta),
                shift: *shift * eps,
                beta: *beta,
                q: *q,
            },
            other => Shape::Scaled {
                inner: Arc::new(other.clone()),
                scale: eps,
                coef: F::one(),
                q: F::zero(),
            },
        }
    }

    /// Multiply by `factor · r^(-q)`.
    fn times_power(&self, factor: F, q_extra: F) -> Shape<F> {
        match self {
            Shape::Power { coef, exponent } => Shape::Power {
                coef: *coef * factor,
                exponent: *exponent - q_extra,
            },
            Shape::Shifted { coef, shift, beta, q } => Shape::Shifted {
                coef: *coef * factor,
                shift: *shift,
                beta: *beta,
                q: *q + q_extra,
            },
            Shape::Scaled { inner, scale, coef, q } => Shape::Scaled {
                inner: inner.clone(),
                scale: *scale,
                coef: *coef * factor,
                q: *q + q_extra,
            },
            Shape::Custom(_) => Shape::Scaled {
                inner: Arc::new(self.clone()),
                scale: F::one(),
                coef: factor,
                q: q_extra,
            },
        }
    }

    pub fn is_power(&self) -> bool {
        matches!(self, Shape::Power { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Piece<F> {
    pub lo: F,
    pub hi: F,
    pub shape: Shape<F>,
}

/// Radial profile: pieces sorted by radius, pairwise disjoint.
#[derive(Debug, Clone)]
pub struct Profile<F> {
    pieces: Vec<Piece<F>>,
}

impl<F: Real> Profile<F> {
    pub fn new(mut pieces: Vec<Piece<F>>) -> Self {
        pieces.retain(|p| p.hi > p.lo);
        pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite piece bounds"));
        Self { pieces }
    }

    pub fn single(lo: F, hi: F, shape: Shape<F>) -> Self {
        Self::new(vec![Piece { lo, hi, shape }])
    }

    pub fn pieces(&self) -> &[Piece<F>] {
        &self.pieces
    }

    fn piece_at(&self, r: F) -> Option<&Piece<F>> {
        self.pieces.iter().find(|p| r > p.lo && r <= p.hi)
    }

    pub fn value(&self, r: F) -> F {
        if r <= F::zero() {
            return F::infinity();
        }
        self.piece_at(r).map_or(F::zero(), |p| p.shape.value(r))
    }

    pub fn ln_value(&self, tau: F) -> F {
        let found = self.pieces.iter().find(|p| {
            let lo = if p.lo > F::zero() { p.lo.ln() } else { F::neg_infinity() };
            let hi = if p.hi.is_finite() { p.hi.ln() } else { F::infinity() };
            tau > lo && tau <= hi
        });
        found.map_or(F::neg_infinity(), |p| p.shape.ln_value(tau))
    }

    /// Inner and outer edge of the support.
    pub fn support(&self) -> (F, F) {
        match (self.pieces.first(), self.pieces.last()) {
            (Some(a), Some(b)) => (a.lo, b.hi),
            _ => (F::zero(), F::zero()),
        }
    }

    /// Radii where the profile may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<F> {
        let mut out: Vec<F> = self
            .pieces
            .iter()
            .flat_map(|p| [p.lo, p.hi])
            .filter(|r| r.is_finite() && *r > F::zero())
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        out.dedup();
        out
    }

    pub fn all_power(&self) -> bool {
        self.pieces.iter().all(|p| p.shape.is_power())
    }

    /// Rescaling of a d-dimensional p-Lévy profile at scale ε:
    /// ε^{-d-p} ν(r/ε) on r ≤ ε, ε^{-d} r^{-p} ν(r/ε) on ε < r ≤ 1,
    /// ε^{-d} ν(r/ε) on r > 1.
    pub fn rescaled(&self, dim: usize, p: F, eps: F) -> Profile<F> {
        let base_factor = eps.powi(-(dim as i32));
        let bands = [
            (F::zero(), eps, base_factor * eps.powf(-p), F::zero()),
            (eps, F::one(), base_factor, p),
            (F::one(), F::infinity(), base_factor, F::zero()),
        ];
        let mut out = Vec::new();
        for piece in &self.pieces {
            let lo = piece.lo * eps;
            let hi = piece.hi * eps;
            let dilated = piece.shape.dilate(eps);
            for &(b_lo, b_hi, factor, q) in &bands {
                let (l, h) = (lo.max(b_lo), hi.min(b_hi));
                if h > l {
                    out.push(Piece {
                        lo: l,
                        hi: h,
                        shape: dilated.times_power(factor, q),
                    });
                }
            }
        }
        Profile::new(out)
    }
}

//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Infinite ends are folded onto (0, 1] with x = a + (1 - s)/s. Every
//! segment between user breakpoints shares one priority queue, so work goes
//! wherever the error is largest.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule: `err <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<F> {
    pub abs: F,
    pub rel: F,
    pub max_panels: usize,
}

impl<F: Real> Tolerance<F> {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs: F::of(abs),
            rel: F::of(rel),
            max_panels: 4000,
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    /// `magnitude` is ∫|f|; the floor keeps the request above the
    /// accumulated rounding of the panel sums.
    fn target(&self, value: F, magnitude: F) -> F {
        let floor = F::of(100.0) * F::epsilon() * magnitude.max(value.abs());
        self.abs.max(self.rel * value.abs()).max(floor)
    }
}

impl<F: Real> Default for Tolerance<F> {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<F> {
    pub value: F,
    pub abs_err: F,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map<F> {
    Identity,
    /// x = origin + (1 - s)/s, s in (0, 1]
    Upper(F),
    /// x = origin - (1 - s)/s, s in (0, 1]
    Lower(F),
}

impl<F: Real> Map<F> {
    #[inline]
    fn apply(self, s: F) -> (F, F) {
        match self {
            Map::Identity => (s, F::one()),
            Map::Upper(a) => {
                let t = (F::one() - s) / s;
                (a + t, F::one() / (s * s))
            }
            Map::Lower(b) => {
                let t = (F::one() - s) / s;
                (b - t, F::one() / (s * s))
            }
        }
    }
}

struct Panel<F> {
    lo: F,
    hi: F,
    map: Map<F>,
    value: F,
    err: F,
    magnitude: F,
}

impl<F: Real> PartialEq for Panel<F> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<F: Real> Eq for Panel<F> {}
impl<F: Real> PartialOrd for Panel<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: Real> Ord for Panel<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn gauss_kronrod<F: Real, G: FnMut(F) -> F>(
    f: &mut G,
    map: Map<F>,
    lo: F,
    hi: F,
) -> Result<(F, F, F)> {
    let half = F::of(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let mut eval = |s: F| -> Result<F> {
        let (x, jac) = map.apply(s);
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::NonFinite {
                location: format!("integrand at x = {x:e}"),
            });
        }
        Ok(y * jac)
    };

    let fc = eval(center)?;
    let mut res_k = fc * F::of(WGK[7]);
    let mut res_g = fc * F::of(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [F::zero(); 7];
    let mut fv2 = [F::zero(); 7];
    for j in 0..7 {
        let dx = half_len * F::of(XGK[j]);
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + F::of(WGK[j]) * (f1 + f2);
        res_abs = res_abs + F::of(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + F::of(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = F::of(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + F::of(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half_len.abs();
    let value = res_k * half_len;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != F::zero() && err != F::zero() {
        let ratio = (F::of(200.0) * err / res_asc).powf(F::of(1.5));
        err = if ratio < F::one() { res_asc * ratio } else { res_asc };
    }
    let round_off = F::of(50.0) * F::epsilon() * res_abs;
    if res_abs > F::min_positive_value() / (F::of(50.0) * F::epsilon()) {
        err = err.max(round_off);
    }
    Ok((value, err, res_abs))
}

/// Integrate `f` over `[a, b]`; either end may be infinite.
pub fn integrate<F: Real, G: FnMut(F) -> F>(
    f: G,
    a: F,
    b: F,
    tol: &Tolerance<F>,
) -> Result<Integral<F>> {
    integrate_with_breaks(f, a, b, &[], tol)
}

/// Integrate `f` over `[a, b]`, splitting at every breakpoint strictly
/// inside the interval. Kinks and jumps of the integrand belong here.
pub fn integrate_with_breaks<F: Real, G: FnMut(F) -> F>(
    mut f: G,
    a: F,
    b: F,
    breaks: &[F],
    tol: &Tolerance<F>,
) -> Result<Integral<F>> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidParameter("NaN integration limit".into()));
    }
    if a == b {
        return Ok(Integral {
            value: F::zero(),
            abs_err: F::zero(),
            evaluations: 0,
        });
    }
    if a > b {
        let r = integrate_with_breaks(f, b, a, breaks, tol)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }

    let mut points: Vec<F> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    points.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    points.dedup();
    if a.is_infinite() && b.is_infinite() && points.is_empty() {
        points.push(F::zero());
    }
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(a);
    edges.extend(points);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (map, s_lo, s_hi) = if lo.is_infinite() {
            (Map::Lower(hi), F::zero(), F::one())
        } else if hi.is_infinite() {
            (Map::Upper(lo), F::zero(), F::one())
        } else {
            (Map::Identity, lo, hi)
        };
        let (value, err, magnitude) = gauss_kronrod(&mut f, map, s_lo, s_hi)?;
        evaluations += 15;
        heap.push(Panel {
            lo: s_lo,
            hi: s_hi,
            map,
            value,
            err,
            magnitude,
        });
    }

    loop {
        let total: F = heap.iter().map(|p| p.value).sum();
        let total_err: F = heap.iter().map(|p| p.err).sum();
        let magnitude: F = heap.iter().map(|p| p.magnitude).sum();
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::NonConvergence {
                estimate: total.to_f64_lossy(),
                error_estimate: total_err.to_f64_lossy(),
                panels: heap.len(),
            });
        }
        if total_err <= tol.target(total, magnitude) {
            return Ok(Integral {
                value: total,
                abs_err: total_err,
                evaluations,
            });
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::NonConvergence {
                estimate: total.to_f64_lossy(),
                error_estimate: total_err.to_f64_lossy(),
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = F::of(0.5) * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // panel at machine resolution, cannot refine further
            return Err(Error::NonConvergence {
                estimate: total.to_f64_lossy(),
                error_estimate: total_err.to_f64_lossy(),
                panels: heap.len() + 1,
            });
        }
        let (v1, e1, m1) = gauss_kronrod(&mut f, worst.map, worst.lo, mid)?;
        let (v2, e2, m2) = gauss_kronrod(&mut f, worst.map, mid, worst.hi)?;
        evaluations += 30;
        heap.push(Panel {
            lo: worst.lo,
            hi: mid,
            map: worst.map,
            value: v1,
            err: e1,
            magnitude: m1,
        });
        heap.push(Panel {
            lo: mid,
            hi: worst.hi,
            map: worst.map,
            value: v2,
            err: e2,
            magnitude: m2,
        });
    }
}

/// Like [`integrate_with_breaks`] but for integrands that can fail.
pub fn try_integrate_with_breaks<F: Real, G: FnMut(F) -> Result<F>>(
    mut f: G,
    a: F,
    b: F,
    breaks: &[F],
    tol: &Tolerance<F>,
) -> Result<Integral<F>> {
    let mut first_err: Option<Error> = None;
    let out = integrate_with_breaks(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
                F::nan()
            }
        },
        a,
        b,
        breaks,
        tol,
    );
    match first_err {
        Some(e) => Err(e),
        None => out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance<f64> {
        Tolerance::new(1e-13, 1e-13)
    }

    #[test]
    fn polynomial_is_exact_in_one_panel() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &tol()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn oscillatory_and_reversed_limits() {
        let r = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, &tol()).unwrap();
        assert!(r.value.abs() < 1e-12);
        let fwd = integrate(|x: f64| x.exp(), 0.0, 1.0, &tol()).unwrap().value;
        let rev = integrate(|x: f64| x.exp(), 1.0, 0.0, &tol()).unwrap().value;
        assert_eq!(fwd, -rev);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn infinite_ranges() {
        let r = integrate(|x: f64| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &tol()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let r = integrate(|x: f64| 1.0 / (x * x), 1.0, f64::INFINITY, &tol()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate(|x: f64| x.exp(), f64::NEG_INFINITY, 0.0, &tol()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &Tolerance::new(1e-10, 1e-12)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn breakpoints_resolve_jumps() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let r = integrate_with_breaks(step, 0.0, 1.0, &[0.3], &tol()).unwrap();
        assert!((r.value - 1.7).abs() < 1e-14);
    }

    #[test]
    fn divergent_integral_reports_non_convergence() {
        let e = integrate(|x: f64| 1.0 / x, 1.0, f64::INFINITY, &Tolerance::new(1e-10, 1e-12)).unwrap_err();
        assert!(matches!(e, Error::NonConvergence { .. } | Error::NonFinite { .. }), "{e:?}");
    }

    #[test]
    fn fallible_integrand_propagates_error() {
        let e = try_integrate_with_breaks(
            |x: f64| {
                if x > 0.5 {
                    Err(Error::Unsupported("boom".into()))
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            &[],
            &tol(),
        )
        .unwrap_err();
        assert_eq!(e, Error::Unsupported("boom".into()));
    }

    #[test]
    fn single_precision() {
        let r = integrate(|x: f32| x.sqrt(), 0.0, 1.0, &Tolerance::new(1e-6, 1e-6)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-5);
    }
}

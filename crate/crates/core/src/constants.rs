//! The sphere constant K_{d,p} = mean of |w·e|^p over the unit sphere.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{integrate, Tolerance};
use crate::rng::Moments;
use crate::scalar::Real;
use crate::special::{gamma, sphere_area};

fn check<F: Real>(dim: usize, p: F) -> Result<()> {
    if dim == 0 {
        return invalid("dimension must be >= 1");
    }
    if !(p >= F::one()) || !p.is_finite() {
        return invalid(format!("exponent p = {p} must be >= 1"));
    }
    Ok(())
}

/// Latitude integral (|S^{d-2}|/|S^{d-1}|)·2∫₀^{π/2} sin^{d-2}θ cos^pθ dθ.
pub fn kdp_mean<F: Real>(dim: usize, p: F) -> Result<F> {
    check(dim, p)?;
    if dim == 1 {
        return Ok(F::one());
    }
    let m = F::of_usize(dim - 2);
    let tol = Tolerance::new(1e-15, 1e-14);
    let lat = integrate(
        |t: F| t.sin().powf(m) * t.cos().powf(p),
        F::zero(),
        F::FRAC_PI_2(),
        &tol,
    )?;
    Ok(sphere_area::<F>(dim - 1) / sphere_area::<F>(dim) * F::of(2.0) * lat.value)
}

/// Γ(d/2)Γ((p+1)/2) / (Γ((d+p)/2)Γ(1/2)).
pub fn kdp_closed<F: Real>(dim: usize, p: F) -> Result<F> {
    check(dim, p)?;
    let half = F::of(0.5);
    let d = F::of_usize(dim);
    Ok(gamma(d * half) * gamma((p + F::one()) * half) / (gamma((d + p) * half) * F::PI().sqrt()))
}

/// The Gamma ratio with Γ((d-1)/2) in the numerator. It does not equal the
/// sphere mean (d = 2, p = 2 gives √π/2); kept for comparison output.
pub fn kdp_printed<F: Real>(dim: usize, p: F) -> Result<F> {
    check(dim, p)?;
    if dim < 2 {
        return invalid("the (d-1)/2 Gamma ratio needs d >= 2");
    }
    let half = F::of(0.5);
    let d = F::of_usize(dim);
    Ok(gamma((d - F::one()) * half) * gamma((p + F::one()) * half) / (gamma((d + p) * half) * F::PI().sqrt()))
}

/// Monte Carlo mean of |w·e|^p over `n` uniform sphere points; returns
/// (mean, standard error). `e` need not be normalized.
pub fn kdp_mc<F: Real, R: Rng + ?Sized>(dim: usize, p: F, n: usize, rng: &mut R, e: &[F]) -> Result<(F, F)> {
    check(dim, p)?;
    if e.len() != dim {
        return invalid(format!("direction has {} entries, expected {dim}", e.len()));
    }
    let len = e.iter().map(|&v| v * v).sum::<F>().sqrt();
    if !(len > F::zero()) {
        return invalid("direction must be nonzero");
    }
    if n < 2 {
        return invalid("need at least two samples");
    }
    let unit: Vec<F> = e.iter().map(|&v| v / len).collect();
    let mut w = vec![F::zero(); dim];
    let mut acc = Moments::<F>::default();
    for _ in 0..n {
        let mut r2 = F::zero();
        let mut proj = F::zero();
        for (wk, &ek) in w.iter_mut().zip(&unit) {
            let g: f64 = rng.sample(StandardNormal);
            *wk = F::of(g);
            r2 = r2 + *wk * *wk;
            proj = proj + *wk * ek;
        }
        if r2 == F::zero() {
            continue;
        }
        acc.push((proj / r2.sqrt()).abs().powf(p));
    }
    Ok((acc.mean(), acc.std_error()))
}

/// All routes for one (d, p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kdp {
    pub dim: usize,
    pub p_exp: f64,
    pub value_mean: f64,
    pub value_closed: f64,
    /// `None` for d = 1.
    pub value_printed: Option<f64>,
    pub discrepancy: f64,
    pub printed_discrepancy: Option<f64>,
}

impl Kdp {
    pub fn compute(dim: usize, p: f64) -> Result<Self> {
        let value_mean = kdp_mean(dim, p)?;
        let value_closed = kdp_closed(dim, p)?;
        let value_printed = if dim >= 2 { Some(kdp_printed(dim, p)?) } else { None };
        Ok(Kdp {
            dim,
            p_exp: p,
            value_mean,
            value_closed,
            value_printed,
            discrepancy: (value_mean - value_closed).abs(),
            printed_discrepancy: value_printed.map(|v| (v - value_mean).abs()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use std::f64::consts::PI;

    #[test]
    fn routes_agree() {
        for d in 2..=5 {
            for &p in &[1.0, 1.5, 2.0, 3.0] {
                let m: f64 = kdp_mean(d, p).unwrap();
                let c: f64 = kdp_closed(d, p).unwrap();
                assert!((m - c).abs() <= 1e-10, "d={d} p={p}: {m} vs {c}");
                assert!(m > 0.0 && m <= 1.0);
            }
        }
    }

    #[test]
    fn spot_values() {
        assert_eq!(kdp_mean(1, 2.5f64).unwrap(), 1.0);
        assert!((kdp_mean(3, 2.0f64).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((kdp_closed(2, 2.0f64).unwrap() - 0.5).abs() < 1e-14);
        assert!((kdp_closed(2, 1.0f64).unwrap() - 2.0 / PI).abs() < 1e-14);
        assert!((kdp_mean(2, 1.0f64).unwrap() - 2.0 / PI).abs() < 1e-13);
        assert!((kdp_closed(1, 3.0f64).unwrap() - 1.0).abs() < 1e-14);
        assert!((kdp_printed(2, 2.0f64).unwrap() - PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn decreasing_in_dimension() {
        for &p in &[1.0, 2.0, 3.0] {
            let v: Vec<f64> = (1..=6).map(|d| kdp_mean(d, p).unwrap()).collect();
            assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
        }
    }

    #[test]
    fn monte_carlo_and_rotation() {
        let mut rng = stream(7, 0);
        let (m, se) = kdp_mc(4, 2.0f64, 100_000, &mut rng, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((m - 0.25).abs() <= 4.0 * se);
        let dirs = [[1.0, 0.0, 0.0], [0.0, 0.0, -2.0], [1.0, 1.0, 1.0]];
        let vals: Vec<(f64, f64)> = dirs
            .iter()
            .enumerate()
            .map(|(i, e)| kdp_mc(3, 1.5, 100_000, &mut stream(11, i as u64), e).unwrap())
            .collect();
        for a in &vals {
            for b in &vals {
                assert!((a.0 - b.0).abs() <= 4.0 * (a.1 * a.1 + b.1 * b.1).sqrt());
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kdp_mean(0, 2.0f64).is_err());
        assert!(kdp_closed(2, 0.5f64).is_err());
        assert!(kdp_mc(2, 2.0f64, 10, &mut stream(0, 0), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn single_precision() {
        let v: f32 = kdp_mean(3, 2.0f32).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-5);
    }
}

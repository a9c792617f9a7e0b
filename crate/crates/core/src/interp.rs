//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson).

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct MonotoneCubic<F> {
    xs: Vec<F>,
    ys: Vec<F>,
    slopes: Vec<F>,
}

impl<F: Real> MonotoneCubic<F> {
    /// `xs` strictly increasing, `ys` monotone (either direction).
    pub fn new(xs: Vec<F>, ys: Vec<F>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Table(format!("need >= 2 matching nodes, got {n}/{}", ys.len())));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Table("non-finite interpolation node".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Table("abscissae not strictly increasing".into()));
        }
        let secants: Vec<F> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![F::zero(); n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            slopes[i] = if a * b <= F::zero() {
                F::zero()
            } else {
                // weighted harmonic mean keeps the interpolant monotone
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w1 = F::of(2.0) * h1 + h0;
                let w2 = h1 + F::of(2.0) * h0;
                (w1 + w2) / (w1 / a + w2 / b)
            };
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn domain(&self) -> (F, F) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Evaluate, clamping `x` to the node range.
    pub fn eval(&self, x: F) -> F {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = F::of(2.0);
        let three = F::of(3.0);
        let h00 = two * t3 - three * t2 + F::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_linear_data() {
        let xs = vec![0.0, 1.0, 2.5, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(c.eval(*x), *y);
        }
        assert!((c.eval(1.7) - 4.1).abs() < 1e-12);
        assert_eq!(c.eval(-5.0), -1.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in proptest::collection::vec((0.01f64..2.0, 0.0f64..3.0), 2..30),
            probes in proptest::collection::vec(0.0f64..1.0, 50),
        ) {
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (dx, dy) in &steps {
                xs.push(xs.last().unwrap() + dx);
                ys.push(ys.last().unwrap() + dy);
            }
            let c = MonotoneCubic::new(xs.clone(), ys).unwrap();
            let (lo, hi) = c.domain();
            let mut pts: Vec<f64> = probes.iter().map(|t| lo + t * (hi - lo)).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in pts.windows(2) {
                prop_assert!(c.eval(w[1]) >= c.eval(w[0]) - 1e-12);
            }
        }
    }
}

//! Counter-based random streams and deterministic chunked Monte Carlo.
//!
//! Each chunk of samples owns the ChaCha stream `(seed, chunk index)`, and
//! chunk results are merged in index order, so the outcome does not depend
//! on how rayon schedules the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::scalar::Real;

pub type StreamRng = ChaCha8Rng;

/// Samples per chunk. Part of the reproducibility contract: changing it
/// changes every Monte Carlo result.
pub const CHUNK_SIZE: usize = 1 << 14;

/// Independent stream `index` under master `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform in [0, 1).
#[inline]
pub fn uniform<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    F::of(rng.random::<f64>())
}

/// Uniform in (0, 1]; safe to take logarithms of.
#[inline]
pub fn uniform_open0<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    F::of(1.0 - rng.random::<f64>())
}

/// Fill `out` with a point uniformly distributed on S^{d-1}, d = out.len().
pub fn unit_vector<F: Real, R: Rng + ?Sized>(rng: &mut R, out: &mut [F]) {
    if out.len() == 1 {
        out[0] = if rng.random::<bool>() { F::one() } else { -F::one() };
        return;
    }
    loop {
        let mut norm2 = 0.0f64;
        for v in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            norm2 += g * g;
            *v = F::of(g);
        }
        if norm2 > 1e-300 {
            let inv = F::of(1.0 / norm2.sqrt());
            for v in out.iter_mut() {
                *v = *v * inv;
            }
            return;
        }
    }
}

/// Running first and second moments of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<F> {
    pub count: usize,
    pub sum: F,
    pub sum_sq: F,
}

impl<F: Real> Default for Moments<F> {
    fn default() -> Self {
        Self {
            count: 0,
            sum: F::zero(),
            sum_sq: F::zero(),
        }
    }
}

impl<F: Real> Moments<F> {
    #[inline]
    pub fn push(&mut self, x: F) {
        self.count += 1;
        self.sum = self.sum + x;
        self.sum_sq = self.sum_sq + x * x;
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum = self.sum + other.sum;
        self.sum_sq = self.sum_sq + other.sum_sq;
    }

    pub fn mean(&self) -> F {
        if self.count == 0 {
            return F::zero();
        }
        self.sum / F::of_usize(self.count)
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn std_error(&self) -> F {
        if self.count < 2 {
            return F::zero();
        }
        let n = F::of_usize(self.count);
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - F::one())).max(F::zero());
        (var / n).sqrt()
    }
}

/// Run `n` samples in fixed-size chunks, chunk `i` drawing from
/// `stream(seed, i)`. `body(rng, count)` processes one chunk.
pub fn chunked<A, B>(seed: u64, n: usize, body: B) -> Vec<A>
where
    A: Send,
    B: Fn(&mut StreamRng, usize) -> A + Sync,
{
    chunked_from(seed, 0, n, body)
}

/// As [`chunked`], with chunk `i` drawing from `stream(seed, first + i)`.
pub fn chunked_from<A, B>(seed: u64, first: u64, n: usize, body: B) -> Vec<A>
where
    A: Send,
    B: Fn(&mut StreamRng, usize) -> A + Sync,
{
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let count = CHUNK_SIZE.min(n - i * CHUNK_SIZE);
            let mut rng = stream(seed, first + i as u64);
            body(&mut rng, count)
        })
        .collect()
}

/// Chunked Monte Carlo mean of `sample(rng)`.
pub fn mc_moments<F, S>(seed: u64, n: usize, sample: S) -> Moments<F>
where
    F: Real,
    S: Fn(&mut StreamRng) -> F + Sync,
{
    let parts = chunked(seed, n, |rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(sample(rng));
        }
        m
    });
    let mut total = Moments::default();
    for m in &parts {
        total.merge(m);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 3), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 3), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 4), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = stream(1, 0);
        let mut v = [0.0f64; 3];
        for _ in 0..100 {
            unit_vector(&mut rng, &mut v);
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let mut s = [0.0f64; 1];
        unit_vector(&mut rng, &mut s);
        assert!(s[0].abs() == 1.0);
    }

    #[test]
    fn chunked_result_independent_of_thread_count() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| mc_moments(99, 100_000, uniform::<f64, _>))
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one, four);
        assert!((one.mean() - 0.5).abs() < 4.0 * one.std_error());
    }
}

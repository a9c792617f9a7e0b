//! Gamma, Beta and sphere measures.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<F: Real>(x: F) -> F {
    let mut acc = F::of(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + F::of(c) / (x + F::of_usize(i));
    }
    acc
}

/// Gamma function via the Lanczos approximation (g = 7, 9 terms), with
/// reflection for arguments below 1/2.
pub fn gamma<F: Real>(x: F) -> F {
    let half = F::of(0.5);
    if x < half {
        let pi = F::PI();
        return pi / ((pi * x).sin() * gamma(F::one() - x));
    }
    let x = x - F::one();
    let t = x + F::of(LANCZOS_G) + half;
    let sqrt_two_pi = (F::of(2.0) * F::PI()).sqrt();
    sqrt_two_pi * t.powf(x + half) * (-t).exp() * lanczos_sum(x)
}

/// Natural logarithm of |Γ(x)|.
pub fn ln_gamma<F: Real>(x: F) -> F {
    let half = F::of(0.5);
    if x < half {
        let pi = F::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let t = x + F::of(LANCZOS_G) + half;
    half * (F::of(2.0) * F::PI()).ln() + (x + half) * t.ln() - t + lanczos_sum(x).ln()
}

/// Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b) for a, b > 0.
pub fn beta<F: Real>(a: F, b: F) -> F {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Surface measure |S^{d-1}| of the unit sphere in R^d.
///
/// Uses the recursion |S^{k}| = 2π/(k-1) · |S^{k-2}| from |S^0| = 2 and
/// |S^1| = 2π, so it does not depend on the Gamma approximation above.
pub fn sphere_area<F: Real>(dim: usize) -> F {
    assert!(dim >= 1, "sphere_area needs dim >= 1");
    let two_pi = F::of(2.0) * F::PI();
    let (mut area, mut k) = if dim % 2 == 1 {
        (F::of(2.0), 0usize)
    } else {
        (two_pi, 1usize)
    };
    while k + 1 < dim {
        k += 2;
        area = area * two_pi / F::of_usize(k - 1);
    }
    area
}

/// Lebesgue measure of the ball of radius `r` in R^d.
pub fn ball_volume<F: Real>(dim: usize, r: F) -> F {
    sphere_area::<F>(dim) * r.powi(dim as i32) / F::of_usize(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers_and_half_integers() {
        let mut fact = 1.0_f64;
        for n in 1..15 {
            let g: f64 = gamma(n as f64);
            assert!((g - fact).abs() <= 1e-13 * fact, "Γ({n}) = {g}, want {fact}");
            fact *= n as f64;
        }
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma(0.5_f64) - sqrt_pi).abs() < 1e-14);
        assert!((gamma(1.5_f64) - 0.5 * sqrt_pi).abs() < 1e-14);
        assert!((gamma(2.5_f64) - 0.75 * sqrt_pi).abs() < 1e-14);
    }

    #[test]
    fn gamma_reflection_branch() {
        // Γ(0.25)Γ(0.75) = π√2
        let lhs: f64 = gamma(0.25) * gamma(0.75);
        let rhs = std::f64::consts::PI * 2f64.sqrt();
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
        assert!((gamma(-0.5_f64) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.1_f64, 0.7, 1.3, 2.9, 7.25, 9.9] {
            let a = ln_gamma(x);
            let b = gamma(x).ln();
            assert!((a - b).abs() < 1e-13 * (1.0 + b.abs()), "x = {x}");
        }
    }

    #[test]
    fn beta_symmetric_values() {
        assert!((beta(1.0_f64, 1.0) - 1.0).abs() < 1e-14);
        assert!((beta(2.0_f64, 3.0) - 1.0 / 12.0).abs() < 1e-14);
        assert!((beta(0.5_f64, 0.5) - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn sphere_areas_match_gamma_formula() {
        for d in 1..9usize {
            let rec: f64 = sphere_area(d);
            let pi = std::f64::consts::PI;
            let via_gamma = 2.0 * pi.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0);
            assert!((rec - via_gamma).abs() < 1e-12 * via_gamma, "d = {d}");
        }
        assert_eq!(sphere_area::<f64>(1), 2.0);
        assert!((ball_volume(2, 1.0_f64) - std::f64::consts::PI).abs() < 1e-15);
        assert!((ball_volume(3, 2.0_f64) - 4.0 / 3.0 * std::f64::consts::PI * 8.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision_gamma() {
        let g: f32 = gamma(4.5);
        assert!((g - 11.631_728).abs() < 1e-4);
    }
}

use super::*;
use crate::kernels::{make_stable, make_truncated_power};
use crate::special::gamma;

fn det() -> Options {
    Options::deterministic()
}

fn unit() -> Domain<f64> {
    Domain::interval(0.0, 1.0).unwrap()
}

fn sym() -> Domain<f64> {
    Domain::interval(-1.0, 1.0).unwrap()
}

fn steps() -> Field<f64> {
    Field::Steps {
        axis: 0,
        at: vec![-0.3, 0.45],
        values: vec![0.0, 1.0, -0.5],
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn linear_field_stable_closed_form() {
    for e in [0.4, 0.1, 0.02] {
        let k = make_stable(1, 2.0, e).unwrap();
        let v = energy(&Field::identity_1d(), &unit(), &k, &det()).unwrap().value;
        let want = (2.0 - e) / (2.0 * (1.0 + e));
        assert!(close(v, want, 1e-9), "eps {e}: {v} vs {want}");
    }
}

#[test]
fn sign_jump_stable_closed_form() {
    for e in [0.5, 0.1, 0.02] {
        let k = make_stable(1, 1.0, e).unwrap();
        let v = energy(&Field::SignJump, &sym(), &k, &det()).unwrap().value;
        let want = 2.0 - 2f64.powf(e);
        assert!(close(v, want, 1e-9), "eps {e}: {v} vs {want}");
    }
}

#[test]
fn fractional_scalings_closed_forms() {
    let x = Field::identity_1d();
    for s in [0.8, 0.95] {
        let v = FractionalVariant::Order
            .value(&x, &unit(), 2.0, 2.0 * (1.0 - s), &det())
            .unwrap()
            .value;
        assert!(close(v, 1.0 / (3.0 - 2.0 * s), 1e-8), "s {s}: {v}");
    }
    for e in [0.3, 0.05] {
        let v = FractionalVariant::ShortRange.value(&x, &unit(), 2.0, e, &det()).unwrap().value;
        assert!(close(v, 2.0 - e, 1e-8), "eps {e}: {v}");
        let v = FractionalVariant::LongRange.value(&x, &unit(), 2.0, e, &det()).unwrap().value;
        let want = 2.0 - 2.0 * (1.0 - e) / (1.0 / e).ln();
        assert!(close(v, want, 1e-8), "eps {e}: {v} vs {want}");
    }
}

#[test]
fn gagliardo_of_linear_field() {
    // (1,0)² with |x - y|^{2 - 1 - 2s}: 2 / ((2 - 2s)(3 - 2s))
    for s in [0.3, 0.7] {
        let v = gagliardo(&Field::identity_1d(), &unit(), s, 2.0, 0.0, &det()).unwrap().value;
        let want = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
        assert!(close(v, want, 1e-8), "s {s}: {v} vs {want}");
    }
}

#[test]
fn generator_on_gaussian() {
    for d in 1..=3 {
        let k = make_stable(d, 2.0, 0.3).unwrap();
        let x = vec![0.0; d];
        let v = generator(&Field::Gaussian, &x, &k).unwrap();
        assert!(close(v, gamma(1.15), 1e-7), "d {d}: {v}");
    }
    assert!((stable_gaussian_generator(0.0f64) - 1.0).abs() < 1e-15);
}

#[test]
fn generator_of_affine_field_vanishes() {
    let k = make_stable(2, 2.0, 0.5).unwrap();
    let u: Field<f64> = Field::linear(vec![2.0, -1.0], 3.0);
    assert!(generator(&u, &[0.3, -0.2], &k).unwrap().abs() < 1e-12);
    assert!(generator(&Field::Tent, &[0.3], &make_stable(1, 2.0, 0.5).unwrap()).is_err());
    assert!(generator(&Field::Gaussian, &[0.0], &make_stable(1, 1.0, 0.5).unwrap()).is_err());
}

#[test]
fn dirac_pairing_limits() {
    let bump: Field<f64> = Field::bump(0.8);
    let mut last = 0.0;
    for e in [0.4, 0.1, 0.02] {
        let k = make_truncated_power(1, 1.0, 0.0, e).unwrap();
        let v = dirac_pairing(&bump, &k).unwrap();
        assert!(v > last && v <= bump.eval(&[0.0]) + 1e-12);
        last = v;
    }
    assert!((last - bump.eval(&[0.0])).abs() < 1e-3);
    let odd = Field::OddBump { radius: 0.7 };
    for d in 1..=3 {
        let k = make_stable(d, 1.0, 0.2).unwrap();
        assert_eq!(dirac_pairing(&odd, &k).unwrap(), 0.0, "d {d}");
    }
}

#[test]
fn raw_pairing_diverges_for_singular_kernels() {
    let k = make_stable(1, 1.0, 0.2).unwrap();
    assert!(matches!(dirac_pairing_raw(&Field::bump(0.8), &k), Err(Error::NonConvergence { .. })));
}

#[test]
fn absolute_homogeneity_and_shift() {
    let k = make_stable(1, 1.5, 0.2).unwrap();
    let base = energy(&Field::Tent, &sym(), &k, &det()).unwrap().value;
    for c in [-2.0, 0.5, 3.0] {
        let u = Field::Tent.scaled(c).shifted(4.0);
        let v = energy(&u, &sym(), &k, &det()).unwrap().value;
        assert!(close(v, f64::abs(c).powf(1.5) * base, 1e-9), "c {c}");
    }
}

#[test]
fn energies_are_nonnegative_and_vanish_on_constants() {
    let k = make_stable(2, 2.0, 0.3).unwrap();
    let disc = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let v = energy(&Field::Constant(2.0), &disc, &k, &Options::monte_carlo(2_000, 1)).unwrap();
    assert_eq!((v.value, v.stderr), (0.0, 0.0));
    let v = energy(&Field::Gaussian, &disc, &k, &Options::monte_carlo(20_000, 1)).unwrap();
    assert!(v.value > 0.0 && v.stderr > 0.0);
}

#[test]
fn monte_carlo_matches_deterministic_in_one_dimension() {
    let cases: [(Field<f64>, f64); 4] = [
        (Field::Tent, 2.0),
        (Field::identity_1d(), 1.0),
        (Field::SignJump, 1.0),
        (steps(), 1.0),
    ];
    for (u, p) in cases {
        for e in [0.4, 0.05] {
            let k = make_stable(1, p, e).unwrap();
            let d = energy(&u, &sym(), &k, &det()).unwrap().value;
            let m = energy(&u, &sym(), &k, &Options::monte_carlo(200_000, 9)).unwrap();
            assert!((m.value - d).abs() <= 4.0 * m.stderr + 1e-3 * d, "{u} eps {e}: {} ± {} vs {d}", m.value, m.stderr);
        }
    }
}

#[test]
fn monte_carlo_cross_and_local_match_deterministic() {
    let k = make_stable(1, 1.0, 0.2).unwrap();
    let inner = Domain::interval(-0.4, 0.3).unwrap();
    for u in [Field::Tent, steps()] {
        let d = cross_energy(&u, &unit(), &k, &det()).unwrap().value;
        let m = cross_energy(&u, &unit(), &k, &Options::monte_carlo(200_000, 4)).unwrap();
        assert!((m.value - d).abs() <= 4.0 * m.stderr + 1e-3 * d, "{u}: {} vs {d}", m.value);
        let d = local_measure(&u, &sym(), &inner, &k, &det()).unwrap().value;
        let m = local_measure(&u, &sym(), &inner, &k, &Options::monte_carlo(200_000, 4)).unwrap();
        assert!((m.value - d).abs() <= 4.0 * m.stderr + 1e-3 * d, "{u}: {} vs {d}", m.value);
    }
}

#[test]
fn same_seed_same_estimate() {
    let k = make_stable(2, 1.0, 0.2).unwrap();
    let disc = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let u = Field::IndicatorBall {
        center: vec![0.1, 0.0],
        radius: 0.4,
        inside: 1.0,
        outside: 0.0,
    };
    let run = |seed| energy(&u, &disc, &k, &Options::monte_carlo(50_000, seed)).unwrap();
    assert_eq!(run(5), run(5));
    assert_ne!(run(5).value, run(6).value);
    let g = |seed| energy(&Field::Gaussian, &disc, &k, &Options::monte_carlo(50_000, seed)).unwrap();
    assert_eq!(g(3), g(3));
}

#[test]
fn bounded_by_sobolev_norm_on_convex_sets() {
    for (u, p) in [(Field::Tent, 1.0), (Field::bump(0.9), 2.0), (Field::identity_1d(), 3.0)] {
        let bound = 2f64.powf(p) * u.sobolev_norm_pow(&sym(), p).unwrap();
        for e in [0.5, 0.05] {
            let k = make_stable(1, p, e).unwrap();
            let v = energy(&u, &sym(), &k, &det()).unwrap().value;
            assert!(v <= bound, "{u} p {p} eps {e}: {v} > {bound}");
        }
    }
}

#[test]
fn pair_sets_decompose() {
    let k = make_stable(1, 2.0, 0.3).unwrap();
    let inner = Domain::interval(-0.5, 0.2).unwrap();
    let whole = Region::Inside(sym());
    let u = Field::Tent;
    let total = energy(&u, &sym(), &k, &det()).unwrap().value;
    let a = pair_energy(&u, &Region::Inside(inner.clone()), &whole, &k, &det()).unwrap().value;
    let rest = Region::Between {
        outer: sym(),
        inner,
    };
    let b = pair_energy(&u, &rest, &whole, &k, &det()).unwrap().value;
    assert!(close(a + b, total, 1e-9), "{a} + {b} vs {total}");
}

#[test]
fn cross_energy_decays() {
    for p in [1.0, 2.0] {
        let vals: Vec<f64> = [0.4, 0.1, 0.02]
            .iter()
            .map(|&e| cross_energy(&Field::Tent, &unit(), &make_stable(1, p, e).unwrap(), &det()).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]) && vals[2] < 0.03, "p {p}: {vals:?}");
    }
}

#[test]
fn jump_energy_in_the_plane_tends_to_perimeter() {
    // K_{2,1} · 2π · (1/2) = 2
    let k = make_stable(2, 1.0f64, 0.02).unwrap();
    let u = Field::IndicatorBall {
        center: vec![0.0, 0.0],
        radius: 0.5,
        inside: 1.0,
        outside: 0.0,
    };
    let disc = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let v = energy(&u, &disc, &k, &Options::monte_carlo(100_000, 2)).unwrap();
    assert!((v.value - 2.0).abs() < 0.1, "{} ± {}", v.value, v.stderr);
}

#[test]
fn invalid_requests() {
    let k = make_stable(1, 1.0, 0.2).unwrap();
    let k2 = make_stable(2, 1.0, 0.2).unwrap();
    let disc = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    assert!(energy(&Field::Tent, &disc, &k, &det()).is_err());
    assert!(matches!(
        energy(&Field::Gaussian, &disc, &k2, &det()),
        Err(Error::Unsupported(_))
    ));
    assert!(energy(&Field::Tent, &Domain::FullSpace { dim: 1 }, &k, &det()).is_err());
    assert!(local_measure(&Field::Tent, &unit(), &unit(), &k, &det()).is_err());
    assert!(energy(&Field::Tent, &sym(), &k, &Options::monte_carlo(1, 0)).is_err());
}

#[test]
fn single_precision_agrees() {
    let k = make_stable(1, 2.0f32, 0.2).unwrap();
    let u: Field<f32> = Field::identity_1d();
    let d = Domain::interval(0.0f32, 1.0).unwrap();
    let v = energy(&u, &d, &k, &det()).unwrap().value;
    assert!((v - 1.8 / 2.4).abs() < 1e-4, "{v}");
}

#[test]
fn mode_parsing() {
    for m in [Mode::MonteCarlo, Mode::Deterministic1d, Mode::Quadrature] {
        assert_eq!(Mode::parse(m.as_str()).unwrap(), m);
    }
    assert!(Mode::parse("exact").is_err());
}

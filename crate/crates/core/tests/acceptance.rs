//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always reach the terminal.
//!
//! A criterion listed in `KNOWN_RED` is expected to fail; the run only fails
//! when some criterion disagrees with its expectation.

use std::process::Command;

use plevy::constants::{kdp_closed, kdp_mc, kdp_mean};
use plevy::energy::{
    cross_energy, dirac_pairing, energy, gagliardo, generator, local_measure, stable_gaussian_generator,
    FractionalVariant, Options,
};
use plevy::fields::Field;
use plevy::geometry::Domain;
use plevy::kernels::{make_stable, make_truncated_power, FamilyKind, KernelFamily};
use plevy::rng::stream;
use plevy::sweep::{builtin_suite_with, run_sweep, Verdict};

const GRID: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.02];
const MC_SAMPLES: usize = 1_000_000;

/// 2: smoothed power kernels with fixed β = 0 keep an ε-independent tail.
/// 3: (2 - ε)/(2(1 + ε)) is 2.9% below 1 at ε = 0.02; 2% needs ε < 0.0135.
const KNOWN_RED: &[u32] = &[2, 3];

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn det() -> Options {
    Options::deterministic()
}

fn unit() -> Domain<f64> {
    Domain::interval(0.0, 1.0).unwrap()
}

fn sym() -> Domain<f64> {
    Domain::interval(-1.0, 1.0).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn constants() -> Outcome {
    let mut worst_z: f64 = 0.0;
    for d in 2..=5usize {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let mean: f64 = kdp_mean(d, p).map_err(|e| e.to_string())?;
            let closed: f64 = kdp_closed(d, p).map_err(|e| e.to_string())?;
            ensure((mean - closed).abs() <= 1e-10, || format!("d={d} p={p}: mean {mean} closed {closed}"))?;
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            let mut rng = stream(42, (d * 10) as u64 + (2.0 * p) as u64);
            let (mc, se) = kdp_mc(d, p, MC_SAMPLES, &mut rng, &e).map_err(|e| e.to_string())?;
            ensure((mc - mean).abs() <= 4.0 * se, || format!("d={d} p={p}: mc {mc} ± {se} vs {mean}"))?;
            worst_z = worst_z.max((mc - mean).abs() / se);
        }
        let at2: f64 = kdp_mean(d, 2.0).unwrap();
        ensure((at2 - 1.0 / d as f64).abs() <= 1e-10, || format!("K({d},2) = {at2}"))?;
    }
    let k21: f64 = kdp_mean(2, 1.0).unwrap();
    ensure((k21 - 2.0 / std::f64::consts::PI).abs() <= 1e-10, || format!("K(2,1) = {k21}"))?;
    Ok(format!("16 pairs, largest MC deviation {worst_z:.2} stderr"))
}

fn kernel_axioms() -> Outcome {
    let delta: f64 = 0.1;
    let mut red = Vec::new();
    let mut checked = 0;
    for d in [1usize, 2] {
        for p in [1.0f64, 2.0] {
            let families = [
                KernelFamily::stable(d, p),
                KernelFamily::rescaled_stable(d, p, 0.5),
                KernelFamily::new(FamilyKind::TruncatedPower { beta: 0.0 }, d, p),
                KernelFamily::new(FamilyKind::SmoothedPower { beta: 0.0, eps0: 0.5 }, d, p),
                KernelFamily::new(FamilyKind::LogLimit { eps0: 0.5 }, d, p),
                KernelFamily::new(FamilyKind::SmoothedLog { eps0: 0.5 }, d, p),
            ];
            for fam in families {
                let fam = fam.map_err(|e| e.to_string())?;
                let mut tails = Vec::new();
                for eps in fam.default_grid() {
                    let k = fam.kernel(eps).map_err(|e| e.to_string())?;
                    let norm = k.normalization().map_err(|e| e.to_string())?;
                    ensure((norm - 1.0).abs() <= 1e-6, || {
                        format!("{} d={d} p={p} eps={eps}: normalization {norm}", fam.tag().as_str())
                    })?;
                    let tail = k.mass_outside(delta).map_err(|e| e.to_string())?;
                    if let FamilyKind::Stable = fam.kind {
                        let want = (p - eps) * (1.0 - delta.powf(eps)) / p + eps / p;
                        ensure((tail - want).abs() <= 1e-8, || {
                            format!("stable d={d} p={p} eps={eps}: tail {tail} vs {want}")
                        })?;
                    }
                    tails.push(tail);
                    checked += 1;
                }
                // compact support: decreasing while positive, then zero
                let decreasing = tails
                    .windows(2)
                    .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
                if !decreasing {
                    red.push(format!("{} d={d} p={p} tails {tails:.6?}", fam.tag().as_str()));
                }
            }
        }
    }
    if red.is_empty() {
        Ok(format!("{checked} kernels normalized, tails strictly decreasing"))
    } else {
        Err(format!(
            "{checked} kernels normalized; mass outside 0.1 not strictly decreasing for {}",
            red.join("; ")
        ))
    }
}

fn sobolev_limit() -> Outcome {
    let u = Field::identity_1d();
    let mut last = 0.0;
    for (i, eps) in GRID.into_iter().enumerate() {
        let k = make_stable(1, 2.0, eps).unwrap();
        let v = energy(&u, &unit(), &k, &det()).map_err(|e| e.to_string())?.value;
        let want = (2.0 - eps) / (2.0 * (1.0 + eps));
        ensure((v - want).abs() <= 1e-8, || format!("eps={eps}: {v} vs {want}"))?;
        let m = energy(&u, &unit(), &k, &Options::monte_carlo(MC_SAMPLES, 42 + i as u64)).map_err(|e| e.to_string())?;
        ensure((m.value - v).abs() <= 4.0 * m.stderr, || {
            format!("eps={eps}: MC {} ± {} vs {v}", m.value, m.stderr)
        })?;
        last = v;
    }
    ensure((last - 1.0).abs() <= 0.02, || {
        format!(
            "closed form and MC agree on every eps, but value {last:.6} at eps=0.02 is {:.2}% from 1",
            100.0 * (1.0 - last)
        )
    })?;
    Ok(format!("value {last:.6} at eps=0.02, MC within 4 stderr"))
}

fn sign_jump_values(domain: &Domain<f64>) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for eps in GRID {
        let k = make_stable(1, 1.0, eps).unwrap();
        let v = energy(&Field::SignJump, domain, &k, &det()).map_err(|e| e.to_string())?.value;
        let want = 2.0 - 2f64.powf(eps);
        ensure((v - want).abs() <= 1e-8, || format!("{domain:?} eps={eps}: {v} vs {want}"))?;
        out.push(v);
    }
    Ok(out)
}

fn bv_limit() -> Outcome {
    let last = *sign_jump_values(&sym())?.last().unwrap();
    ensure((last - 1.0).abs() <= 0.02, || format!("value {last} at eps=0.02"))?;
    Ok(format!("value {last:.6} at eps=0.02"))
}

fn counterexample() -> Outcome {
    let last = *sign_jump_values(&Domain::SlitInterval)?.last().unwrap();
    let case = builtin_suite_with(42, MC_SAMPLES)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|c| c.id == "slit-1d")
        .ok_or("no slit-1d case")?;
    let report = run_sweep(&case).map_err(|e| e.to_string())?;
    ensure(report.target == Some(0.0), || format!("target {:?}", report.target))?;
    ensure(report.verdict == Verdict::DivergedFromTarget, || format!("verdict {}", report.verdict))?;
    ensure(report.verdict.describe() == "limit exists but ≠ K_{d,p}‖∇u‖^p", || {
        report.verdict.describe().to_string()
    })?;

    let cutoffs = [1e-2, 1e-3, 1e-4, 1e-5];
    let seminorms = |s: f64| -> Result<Vec<f64>, String> {
        cutoffs
            .iter()
            .map(|&t| {
                gagliardo(&Field::SignJump, &Domain::SlitInterval, s, 2.0, t, &det())
                    .map(|e| e.value)
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    let logs: Vec<f64> = cutoffs.iter().map(|t: &f64| t.recip().ln()).collect();
    let critical = slope(&logs, &seminorms(0.5)?);
    ensure(critical > 0.5, || format!("s=0.5 slope {critical}"))?;
    let sub = seminorms(0.25)?;
    let change = (sub[3] - sub[2]).abs() / sub[3].abs();
    ensure(change < 0.01, || format!("s=0.25 relative change {change}"))?;
    Ok(format!(
        "slit energy {last:.6} against target 0, verdict `{}`; s=0.5 slope {critical:.3}, s=0.25 change {change:.2e}",
        report.verdict.describe()
    ))
}

fn generator_limit() -> Outcome {
    let mut finals = Vec::new();
    for d in [1usize, 2] {
        let mut errs = Vec::new();
        for eps in GRID {
            let k = make_stable(d, 2.0, eps).unwrap();
            let v = generator(&Field::Gaussian, &vec![0.0; d], &k).map_err(|e| e.to_string())?;
            let oracle = stable_gaussian_generator(eps);
            ensure((v - oracle).abs() <= 1e-8, || format!("d={d} eps={eps}: {v} vs {oracle}"))?;
            errs.push((v - 1.0).abs());
        }
        let tail = &errs[errs.len() - 3..];
        ensure(tail.windows(2).all(|w| w[1] <= w[0]), || format!("d={d} errors {errs:?}"))?;
        ensure(errs[4] <= 0.02, || format!("d={d} error {} at eps=0.02", errs[4]))?;
        finals.push(errs[4]);
    }
    Ok(format!("errors at eps=0.02: {:.2e} (d=1), {:.2e} (d=2)", finals[0], finals[1]))
}

fn dirac_limit() -> Outcome {
    let bump = Field::bump(1.0);
    ensure(bump.eval(&[0.0]) == 1.0, || "bump is not 1 at the origin".into())?;
    let mut last = 0.0;
    for eps in GRID {
        last = dirac_pairing(&bump, &make_truncated_power(1, 1.0, 0.0, eps).unwrap()).map_err(|e| e.to_string())?;
        for d in 1..=2 {
            let odd = dirac_pairing(&Field::OddBump { radius: 1.0 }, &make_stable(d, 1.0, eps).unwrap())
                .map_err(|e| e.to_string())?;
            ensure(odd == 0.0, || format!("odd pairing {odd} at d={d} eps={eps}"))?;
        }
    }
    ensure((last - 1.0).abs() <= 0.02, || format!("pairing {last} at eps=0.02"))?;
    Ok(format!("pairing {last:.6} at eps=0.02, odd pairing exactly 0"))
}

fn cross_boundary() -> Outcome {
    let mut out = Vec::new();
    for p in [1.0, 2.0] {
        let norm = Field::Tent
            .sobolev_norm_pow(&Domain::FullSpace { dim: 1 }, p)
            .map_err(|e| e.to_string())?;
        let vals = GRID
            .iter()
            .map(|&e| cross_energy(&Field::Tent, &unit(), &make_stable(1, p, e).unwrap(), &det()).map(|v| v.value))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| e.to_string())?;
        ensure(vals.windows(2).all(|w| w[1] < w[0]), || format!("p={p}: {vals:?}"))?;
        let ratio = vals[4] / norm;
        ensure(ratio < 0.05, || format!("p={p}: final / norm = {ratio}"))?;
        out.push(format!("p={p} ratio {ratio:.4}"));
    }
    Ok(out.join(", "))
}

fn local_limit() -> Outcome {
    let k2 = make_stable(1, 2.0, 0.02).unwrap();
    let a = local_measure(&Field::identity_1d(), &unit(), &Domain::interval(0.25, 0.75).unwrap(), &k2, &det())
        .map_err(|e| e.to_string())?
        .value;
    ensure((a - 0.5).abs() <= 0.03 * 0.5, || format!("u=x: {a} vs 0.5"))?;
    let k1 = make_stable(1, 1.0, 0.02).unwrap();
    let b = local_measure(&Field::SignJump, &sym(), &Domain::interval(-0.5, 0.5).unwrap(), &k1, &det())
        .map_err(|e| e.to_string())?
        .value;
    ensure((b - 1.0).abs() <= 0.03, || format!("sign jump: {b} vs 1"))?;
    Ok(format!("u=x {a:.6}, sign jump {b:.6}"))
}

fn fractional_limit() -> Outcome {
    let mut errs = Vec::new();
    for s in [0.8, 0.9, 0.95, 0.99] {
        let g = gagliardo(&Field::identity_1d(), &unit(), s, 2.0, 0.0, &det())
            .map_err(|e| e.to_string())?
            .value;
        let v = (1.0 - s) * g;
        let want = 1.0 - 2.0 * (1.0 - s) / (3.0 - 2.0 * s);
        ensure((v - want).abs() <= 1e-8, || format!("s={s}: {v} vs {want}"))?;
        let scaled = FractionalVariant::Order
            .value(&Field::identity_1d(), &unit(), 2.0, 2.0 * (1.0 - s), &det())
            .map_err(|e| e.to_string())?
            .value;
        ensure((scaled - v).abs() <= 1e-12, || format!("s={s}: scaling {scaled} vs {v}"))?;
        errs.push((v - 1.0).abs());
    }
    ensure(errs.windows(2).all(|w| w[1] < w[0]), || format!("errors {errs:?}"))?;
    Ok(format!("error {:.4} at s=0.99", errs[3]))
}

fn suite_output(threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_plevy"));
    cmd.args(["suite", "--seed", "42"]);
    match threads {
        Some(t) => cmd.env("PLEVY_THREADS", t),
        None => cmd.env_remove("PLEVY_THREADS"),
    };
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let first = suite_output(None)?;
    ensure(!first.is_empty(), || "empty output".into())?;
    for threads in [None, Some("1"), Some("2"), Some("5")] {
        let again = suite_output(threads)?;
        ensure(again == first, || format!("output differs with threads {threads:?}"))?;
    }
    Ok(format!("{} bytes identical over 5 runs, 1/2/5/default threads", first.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "constants", constants),
        (2, "kernel axioms", kernel_axioms),
        (3, "Sobolev limit", sobolev_limit),
        (4, "BV limit", bv_limit),
        (5, "counterexample", counterexample),
        (6, "generator", generator_limit),
        (7, "Dirac pairing", dirac_limit),
        (8, "cross-boundary collapse", cross_boundary),
        (9, "local measure", local_limit),
        (10, "fractional limit", fractional_limit),
        (11, "determinism", determinism),
    ];
    let mut surprises = Vec::new();
    for (n, name, run) in criteria {
        let start = std::time::Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let note = if KNOWN_RED.contains(&n) { " [known red]" } else { "" };
        println!("criterion {n:>2} {tag} {name}: {detail} ({secs:.1}s){note}");
        if result.is_ok() == KNOWN_RED.contains(&n) {
            surprises.push(n);
        }
    }
    if !surprises.is_empty() {
        println!("unexpected outcome for criteria {surprises:?}");
        std::process::exit(1);
    }
}

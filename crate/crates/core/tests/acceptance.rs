//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratweno::grid::{sample, SampledSignal, UniformGrid};
use ratweno::harness::{convergence_study, smooth_study, BuiltinFunction, Order, StudyConfig};
use ratweno::optimal::{
    aitken_optimal, classical_optimal, optimal_oracle, optimal_table, theorem_optimal, weight_matrices,
};
use ratweno::smoothness::{quadform_indicator, smoothness_indicator};
use ratweno::weights::{rational_general_weights, Scheme, SchemeConfig, SchemeKind};

type Outcome = Result<String, String>;

fn fr(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn frs(v: &[(i64, i64)]) -> Vec<BigRational> {
    v.iter().map(|&(n, d)| fr(n, d)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_weight_tables() -> Outcome {
    let mut rows = 0;
    for r in 2..=6 {
        for a in r..2 * r {
            for b in a - r..r {
                let oracle = optimal_oracle(r, a, b).map_err(|e| e.to_string())?;
                let aitken = aitken_optimal(r, a, b).map_err(|e| e.to_string())?;
                ensure(oracle == aitken, || format!("oracles differ at r={r} ({a},{b})"))?;
                rows += 1;
            }
        }
        let full = optimal_oracle(r, 2 * r - 1, r - 1).unwrap();
        ensure(classical_optimal(r).unwrap() == full.weights, || format!("classical r={r}"))?;
        for l in 1..=r {
            let (lo, hi) = theorem_optimal(r, l).unwrap();
            ensure(lo == optimal_oracle(r, lo.a, lo.b).unwrap(), || format!("closed form r={r} l={l} lower"))?;
            if let Some(hi) = hi {
                ensure(hi == optimal_oracle(r, hi.a, hi.b).unwrap(), || format!("closed form r={r} l={l} upper"))?;
            }
        }
    }
    ensure(classical_optimal(3).unwrap() == frs(&[(3, 16), (5, 8), (3, 16)]), || "r=3 optimal".into())?;
    let (lo, hi) = theorem_optimal(3, 2).unwrap();
    ensure(lo.weights == frs(&[(3, 8), (5, 8)]), || "C^4_1".into())?;
    ensure(hi.unwrap().weights == frs(&[(5, 8), (3, 8)]), || "C^4_2".into())?;
    let m = weight_matrices(4).unwrap();
    let printed = vec![
        frs(&[(3, 24), (3, 10), (1, 1), (0, 1), (0, 1), (0, 1)]),
        frs(&[(14, 24), (7, 10), (0, 1), (0, 1), (0, 1), (7, 24)]),
        frs(&[(7, 24), (0, 1), (0, 1), (0, 1), (7, 10), (14, 24)]),
        frs(&[(0, 1), (0, 1), (0, 1), (1, 1), (3, 10), (3, 24)]),
    ];
    ensure(m.combined() == printed, || "r=4 matrix".into())?;
    ensure(m.o_vec == frs(&[(1, 16), (7, 16), (7, 16), (1, 16)]), || "O^4".into())?;
    Ok(format!("{rows} rows, three routes agree; r=3 and r=4 values exact"))
}

fn window_signal(vals: Vec<f64>) -> SampledSignal {
    let g = UniformGrid::with_cells(0.0, 1.0, vals.len() - 1).unwrap();
    SampledSignal::new(g, vals).unwrap()
}

fn indicator_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for r in [3usize, 4] {
        for _ in 0..1000 {
            let vals: Vec<f64> = (0..2 * r + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = window_signal(vals);
            for k in 0..r {
                let a = smoothness_indicator(&s, r, r, k).unwrap();
                let b = quadform_indicator(&s, r, r, k).unwrap();
                worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max relative difference {worst:e}"))?;
    for r in 1..=6 {
        let c = window_signal(vec![-3.7; 2 * r + 1]);
        for k in 0..r {
            let v = smoothness_indicator(&c, r, r, k).unwrap();
            ensure(v == 0.0, || format!("constant data gives {v:e} (r={r})"))?;
        }
    }
    let lin = window_signal((0..7).map(|j| j as f64).collect());
    for k in 0..3 {
        let v = smoothness_indicator(&lin, 3, 3, k).unwrap();
        ensure(v == 1.0, || format!("linear data gives {v} (k={k})"))?;
    }
    Ok(format!("2 x 1000 windows, max relative difference {worst:.2e}"))
}

fn convexity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut engines = Vec::new();
    for kind in SchemeKind::ALL {
        for r in 1..=6 {
            if !kind.uses_r() && r > 1 {
                continue;
            }
            engines.push(Scheme::new(SchemeConfig::new(kind, r)).unwrap());
        }
    }
    let mut worst = 0.0f64;
    let total = 100_000;
    for n in 0..total {
        let e = &engines[n % engines.len()];
        let len = e.window_len();
        let h = 2f64.powi(-rng.gen_range(2..16));
        let window: Vec<f64> = match n % 5 {
            0 => (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            1 => {
                let cut = rng.gen_range(0..=len);
                (0..len)
                    .map(|i| rng.gen_range(-1.0..1.0) * h + if i >= cut { 1e6 } else { 0.0 })
                    .collect()
            }
            2 => (0..len).map(|_| rng.gen_range(-1.0..1.0) * 1e-300).collect(),
            3 => (0..len)
                .map(|_| rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-300..300)))
                .collect(),
            _ => {
                let base = rng.gen_range(-1.0..1.0);
                let mut v = vec![base; len];
                if rng.gen_bool(0.5) {
                    let i = rng.gen_range(0..len);
                    v[i] += rng.gen_range(-1.0..1.0) * 1e6;
                }
                v
            }
        };
        let w = e.weights(&window, h);
        for &o in &w.omegas {
            ensure(o >= 0.0 && o.is_finite(), || {
                format!("{} r={}: weight {o} on {window:?}", e.config().scheme, e.config().r)
            })?;
        }
        let dev = (w.sum() - 1.0).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-14, || format!("{}: sum deviates by {dev:e}", e.config().scheme))?;
    }
    Ok(format!("{total} windows over {} engines, max |sum - 1| = {worst:.1e}", engines.len()))
}

fn weight_limit_ladder() -> Outcome {
    let level = 10;
    let g = UniformGrid::new(0.0, 1.0, level, 1).unwrap();
    let j = g.n_cells() / 2;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for r in [3usize, 4] {
        let table = optimal_table(r).unwrap();
        let cfg = SchemeConfig::new(SchemeKind::Rational, r);
        for l0 in (1..r as i64).flat_map(|m| [m, -m]) {
            // unit step across [x_{j+l0-1}, x_{j+l0}]
            let cut = (j as i64 + l0) as usize;
            let vals = (0..g.n_nodes())
                .map(|i| g.node(i).sin() + if i >= cut { 1.0 } else { 0.0 })
                .collect();
            let s = SampledSignal::new(g, vals).unwrap();
            let w = rational_general_weights(&s, j, &cfg).unwrap().omegas;
            let expected = table.limit_row(l0).unwrap().dense_f64();
            for (a, b) in w.iter().zip(&expected) {
                worst = worst.max((a - b).abs());
            }
            ensure(worst <= 1e-4, || format!("r={r} l0={l0}: {w:?} vs {expected:?}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} step positions at h = 2^-10, max deviation {worst:.1e}"))
}

fn final_order(function: BuiltinFunction, kind: SchemeKind, r: usize, interval: (f64, f64), xi: i64) -> Result<f64, String> {
    let cfg = StudyConfig::new(function, SchemeConfig::new(kind, r), interval, (4, 8));
    let rep = convergence_study(&cfg).map_err(|e| e.to_string())?;
    match rep.final_order(xi) {
        Some(Order::Value(v)) => Ok(v),
        other => Err(format!("{function} {kind} xi={xi}: no order ({other:?})")),
    }
}

fn within(label: &str, v: f64, target: f64, tol: f64) -> Result<String, String> {
    let s = format!("{label} {v:.2} (target {target} ± {tol})");
    ensure((v - target).abs() <= tol, || s.clone())?;
    Ok(s)
}

fn table1() -> Outcome {
    use BuiltinFunction::F1;
    let iv = (-0.5, 0.5);
    let parts = [
        within("linear xi0", final_order(F1, SchemeKind::Linear, 3, iv, 0)?, 0.0, 0.5)?,
        within("linear xi2", final_order(F1, SchemeKind::Linear, 3, iv, 2)?, 6.04, 0.5)?,
        within("rational xi0", final_order(F1, SchemeKind::Rational, 3, iv, 0)?, 4.04, 0.5)?,
        within("rational xi1", final_order(F1, SchemeKind::Rational, 3, iv, 1)?, 5.98, 0.5)?,
        within("rational xi2", final_order(F1, SchemeKind::Rational, 3, iv, 2)?, 6.04, 0.5)?,
        within("weno xi1", final_order(F1, SchemeKind::Weno, 3, iv, 1)?, 4.04, 0.5)?,
    ];
    Ok(parts.join("; "))
}

fn table2() -> Outcome {
    use BuiltinFunction::F2;
    let iv = (-0.5, 0.5);
    let rat = final_order(F2, SchemeKind::Rational, 3, iv, 1)?;
    let weno = final_order(F2, SchemeKind::Weno, 3, iv, 1)?;
    let s = format!("rational xi1 {rat:.2} (>= 5.5), weno xi1 {weno:.2} (<= 4.6)");
    ensure(rat >= 5.5 && weno <= 4.6, || s.clone())?;
    Ok(s)
}

fn tables34() -> Outcome {
    use BuiltinFunction::{F1, F2};
    let iv = (-2.0, 2.0);
    let mut parts = vec![
        within("f1 xi1", final_order(F1, SchemeKind::Rational, 4, iv, 1)?, 6.1, 0.7)?,
        within("f1 xi2", final_order(F1, SchemeKind::Rational, 4, iv, 2)?, 7.8, 0.7)?,
    ];
    for xi in [1, 2] {
        let v = final_order(F2, SchemeKind::Rational, 4, iv, xi)?;
        let s = format!("f2 xi{xi} {v:.2} (>= 6.2)");
        ensure(v >= 6.2, || s.clone())?;
        parts.push(s);
    }
    Ok(parts.join("; "))
}

fn smooth_orders() -> Outcome {
    let mut parts = Vec::new();
    let checks = [
        (SchemeKind::Linear, 6.0),
        (SchemeKind::Weno, 6.0),
        (SchemeKind::Rational, 6.0),
        (SchemeKind::Rational2Family1, 2.0),
        (SchemeKind::Rational2Family2, 2.0),
        (SchemeKind::Rational4V3, 4.0),
        (SchemeKind::Rational4V4, 4.0),
    ];
    for (kind, target) in checks {
        let rep = smooth_study(BuiltinFunction::Sine, &SchemeConfig::new(kind, 3), (0.0, 16.0), (7, 11), 1)
            .map_err(|e| e.to_string())?;
        let orders: Vec<f64> = rep.orders().into_iter().map(|o| o.unwrap_or(f64::NAN)).collect();
        let s = format!(
            "{kind} [{}]",
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(", ")
        );
        ensure(orders.iter().all(|o| (o - target).abs() <= 0.3), || format!("{s} vs {target} ± 0.3"))?;
        parts.push(s);
    }
    Ok(parts.join("; "))
}

fn main() -> ExitCode {
    // build shared tables outside the timed sections
    let _ = sample(|x| x, &UniformGrid::new(0.0, 1.0, 2, 1).unwrap());
    let criteria: [(&str, fn() -> Outcome, f64); 8] = [
        ("1 exact weight tables", exact_weight_tables, 1.0),
        ("2 indicator cross-validation", indicator_cross_validation, 5.0),
        ("3 convexity of all weight families", convexity_suite, 30.0),
        ("4 weight-limit ladder", weight_limit_ladder, 5.0),
        ("5 f1 r=3 order table", table1, 10.0),
        ("6 f2 r=3 order trend", table2, 10.0),
        ("7 r=4 order trends on [-2, 2]", tables34, 30.0),
        ("8 smooth-region orders", smooth_orders, 10.0),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs_f64(limit) => {
                Err(format!("{detail}; took {:.2} s, limit {limit} s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({:.2} s)", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail} ({:.2} s)", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

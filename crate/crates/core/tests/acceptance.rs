//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints a PASS/FAIL line; exits non-zero if any fails.

mod common;

use std::f64::consts::E;
use std::process::ExitCode;

use common::{certified_matrix, counterexamples, family};
use groupsize::analysis::{h, series_s};
use groupsize::cli::main_with_args;
use groupsize::optimizer::{narrow_interval, optimize_family, sweep};
use groupsize::simulation::{analytic_group_prob, brute_force_integer_argmax, simulate_group};
use groupsize::verifier::{
    appendix_b_checks, default_p_grid, verify_conditions, AppendixReport, Branch, ScanConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn x_star(name: &str, param: &str, v: f64) -> Result<(f64, u64), String> {
    let (_, opt) =
        optimize_family(&family(name, param, v)).map_err(|e| format!("{name} {param}={v}: {e}"))?;
    Ok((opt.x_star, opt.k_star))
}

fn near(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name}: x* = {got}, expected {want} +- {tol}")
    })
}

fn yunus_endpoints() -> Outcome {
    let (x05, k05) = x_star("yunus", "p", 0.5)?;
    let (x1, k1) = x_star("yunus", "p", 1.0)?;
    near("yunus p=0.5", x05, 5.13, 0.01)?;
    near("yunus p=1", x1, 4.62, 0.01)?;
    ensure(k05 == 5 && k1 == 5, || format!("k* = {k05}, {k1}"))?;
    Ok(format!("x* = {x05:.4} / {x1:.4}, k* = 5"))
}

fn integer_plateau() -> Outcome {
    let mut count = 0;
    for (lo, hi, n) in [(0.5, 0.539, 40), (0.993, 1.0, 8)] {
        let rows = sweep("yunus", "p", lo, hi, 0.001).map_err(|e| e.to_string())?;
        ensure(rows.len() == n, || {
            format!("[{lo}, {hi}] gave {} grid points, expected {n}", rows.len())
        })?;
        for r in rows {
            let x = r
                .x_star
                .ok_or_else(|| format!("p = {} not certified", r.param_value))?;
            ensure(
                (4.5..5.5).contains(&x) && r.k_star_rounded == Some(5),
                || {
                    format!(
                        "p = {}: x* = {x}, rounded {:?}",
                        r.param_value, r.k_star_rounded
                    )
                },
            )?;
            count += 1;
        }
    }
    Ok(format!(
        "{count} grid points in [4.5, 5.5) with rounded k* = 5"
    ))
}

fn power_extremes() -> Outcome {
    let (big, _) = x_star("power", "r", 0.999)?;
    let (small, k) = x_star("power", "r", 0.501)?;
    near("power r=0.999", big, 503.45, 0.5)?;
    near("power r=0.501", small, 1.956, 0.01)?;
    Ok(format!("x* = {big:.3} / {small:.4} (k* floored at {k})"))
}

fn other_families() -> Outcome {
    let rows = sweep("xlnx", "p", 0.5, 0.75, 0.01).map_err(|e| e.to_string())?;
    let first = rows
        .first()
        .and_then(|r| r.x_star)
        .ok_or("xlnx p=0.5 not certified")?;
    let last = rows
        .last()
        .and_then(|r| r.x_star)
        .ok_or("xlnx p=0.75 not certified")?;
    ensure(rows.iter().all(|r| r.certified), || {
        "xlnx sweep has uncertified rows".into()
    })?;
    near("xlnx p=0.5", first, 5.17, 0.05)?;
    near("xlnx p=0.75", last, 25.52, 0.05)?;
    let mut lnln = Vec::new();
    for (p, want) in [(0.1, 18.23), (1.0, 22.28), (10.0, 309.77)] {
        let (x, _) = x_star("lnln", "p", p)?;
        near(&format!("lnln p={p}"), x, want, 0.5)?;
        lnln.push(x);
    }
    let (c0, _) = x_star("combo", "p", 0.5)?;
    let (c1, _) = x_star("combo", "p", 0.75)?;
    near("combo p=0.5", c0, 6.56, 0.05)?;
    near("combo p=0.75", c1, 18.67, 0.05)?;
    Ok(format!(
        "xlnx {first:.3}..{last:.3}; lnln {:.2}, {:.2}, {:.2}; combo {c0:.3}..{c1:.3}",
        lnln[0], lnln[1], lnln[2]
    ))
}

fn narrowing() -> Outcome {
    let coarse =
        narrow_interval("yunus", 0.5, 1.0, 0.001, E, E * E, 0.1).map_err(|e| e.to_string())?;
    ensure(coarse.x_lo == 3.4 && coarse.x_hi == 5.2, || {
        format!("step 0.1: ({}, {})", coarse.x_lo, coarse.x_hi)
    })?;
    let fine =
        narrow_interval("yunus", 0.5, 1.0, 0.001, E, E * E, 0.001).map_err(|e| e.to_string())?;
    ensure(
        (3.4..=3.486).contains(&fine.x_lo) && (5.135..=5.2).contains(&fine.x_hi),
        || format!("step 0.001: ({}, {})", fine.x_lo, fine.x_hi),
    )?;
    Ok(format!(
        "(3.4, 5.2); fine grid ({}, {})",
        fine.x_lo, fine.x_hi
    ))
}

fn check(report: &AppendixReport, name: &str) -> Result<f64, String> {
    let c = report
        .checks
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| format!("no check {name}"))?;
    ensure(c.passed, || format!("{name} failed: {}", c.detail))?;
    Ok(c.value)
}

fn appendix_checks() -> Outcome {
    let report = appendix_b_checks::<f64>(&default_p_grid(501)).map_err(|e| e.to_string())?;
    let failed: Vec<_> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    ensure(report.all_passed, || format!("failed: {failed:?}"))?;
    let max_e = check(&report, "h_p(e) < 1/2")?;
    let p_star = check(&report, "argmax_p h_p(e) = 3 W(1/3)")?;
    let min_e2 = check(&report, "h_p(e^2) >= 1")?;
    ensure((max_e - 0.1981).abs() <= 1e-3, || {
        format!("max h_p(e) = {max_e}")
    })?;
    ensure((p_star - 0.7729).abs() <= 1e-3, || {
        format!("argmax p = {p_star}")
    })?;
    ensure(min_e2 >= 1.0 - 1e-12, || format!("min h_p(e^2) = {min_e2}"))?;
    // recompute the endpoint identities directly
    let h_half = h(&family("yunus", "p", 0.5), E * E).map_err(|e| e.to_string())?;
    let h_one = h(&family("yunus", "p", 1.0), E * E).map_err(|e| e.to_string())?;
    ensure((h_half - E / 2.0).abs() <= 1e-12, || {
        format!("h_1/2(e^2) = {h_half}")
    })?;
    ensure((h_one - 1.0).abs() <= 1e-12, || {
        format!("h_1(e^2) = {h_one}")
    })?;
    Ok(format!(
        "max h_p(e) = {max_e:.4} at p = {p_star:.4}; min h_p(e^2) = {min_e2:.15}"
    ))
}

fn counterexample_rejection() -> Outcome {
    for (name, param, v) in counterexamples() {
        let fam = family(name, param, v);
        let cert =
            verify_conditions(&fam, &ScanConfig::for_family(&fam)).map_err(|e| e.to_string())?;
        ensure(cert.branch == Branch::None, || {
            format!("{name} {param}={v} certified as {:?}", cert.branch)
        })?;
    }
    Ok("power r = 1, 1.5, 2 and exp r = 1, 2 rejected".into())
}

fn series_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let y: f64 = rng.random_range(0.0..0.999);
        let s = series_s(y, 1e-13)
            .map_err(|e| format!("y = {y}: {e}"))?
            .value;
        // ln_1p keeps the oracle accurate for small y
        let closed = ((1.0 - y) * (-y).ln_1p() + y) / (y * y);
        ensure(s > 0.5 && s < 1.0, || {
            format!("S({y}) = {s} outside (1/2, 1)")
        })?;
        worst = worst.max((s - closed).abs());
    }
    ensure(worst < 1e-11, || format!("max deviation {worst:e}"))?;
    Ok(format!("1000 points, max deviation {worst:.1e}"))
}

fn fixed_point_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let matrix = certified_matrix();
    for &(name, param, v) in &matrix {
        let (_, opt) =
            optimize_family(&family(name, param, v)).map_err(|e| format!("{name} {v}: {e}"))?;
        let xs = [opt.x_star, opt.x_star_fixed_point, opt.x_star_golden];
        let spread = xs.iter().cloned().fold(f64::MIN, f64::max)
            - xs.iter().cloned().fold(f64::MAX, f64::min);
        ensure(spread <= 1e-6, || format!("{name} {param}={v}: {xs:?}"))?;
        worst = worst.max(spread);
    }
    Ok(format!("{} cases, max spread {worst:.1e}", matrix.len()))
}

/// (family, param, value, k, seed) with group probabilities well inside (0, 1).
const MC_CASES: [(&str, &str, f64, u64, u64); 20] = [
    ("yunus", "p", 0.5, 5, 1),
    ("yunus", "p", 0.5, 2, 2),
    ("yunus", "p", 0.5, 9, 3),
    ("yunus", "p", 0.75, 4, 4),
    ("yunus", "p", 0.75, 6, 5),
    ("yunus", "p", 1.0, 5, 6),
    ("yunus", "p", 1.0, 3, 7),
    ("yunus", "p", 1.0, 12, 8),
    ("power", "r", 0.75, 3, 9),
    ("power", "r", 0.9, 6, 10),
    ("power", "r", 0.9, 15, 11),
    ("xlnx", "p", 0.5, 5, 12),
    ("xlnx", "p", 0.6, 8, 13),
    ("xlnx", "p", 0.75, 26, 14),
    ("combo", "p", 0.5, 7, 15),
    ("combo", "p", 0.75, 19, 16),
    ("logpow", "p", 1.0, 5, 17),
    ("logpow", "p", 0.5, 9, 18),
    ("lnln", "p", 10.0, 310, 19),
    ("yunus", "p", 0.6, 5, 20),
];

fn oracle_equivalence() -> Outcome {
    for (name, param, v) in certified_matrix() {
        let fam = family(name, param, v);
        let (_, opt) = optimize_family(&fam).map_err(|e| e.to_string())?;
        let k_max = 2 * opt.x_star.ceil() as u64 + 10;
        let (k, _) = brute_force_integer_argmax(&fam, 2, k_max).map_err(|e| e.to_string())?;
        ensure(k == opt.k_star, || {
            format!(
                "{name} {param}={v}: brute force {k}, optimizer {}",
                opt.k_star
            )
        })?;
    }
    let mut worst_z = 0.0f64;
    for (name, param, v, k, seed) in MC_CASES {
        let fam = family(name, param, v);
        let est = simulate_group(&fam, k, 1_000_000, seed).map_err(|e| e.to_string())?;
        let exact = analytic_group_prob(&fam, k).map_err(|e| e.to_string())?;
        ensure(est.stderr > 0.0, || {
            format!("{name} {v} k={k}: degenerate estimate {}", est.estimate)
        })?;
        let z = (est.estimate - exact) / est.stderr;
        ensure(z.abs() <= 4.0, || {
            format!("{name} {param}={v} k={k} seed={seed}: z = {z:.2}")
        })?;
        worst_z = worst_z.max(z.abs());
    }
    let args = [
        "groupsize",
        "simulate",
        "--family",
        "yunus",
        "--p",
        "0.5",
        "--k",
        "5",
        "--seed",
        "2024",
    ];
    let run = || {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with_args(args, &mut out, &mut err);
        (code, out)
    };
    let (c1, a) = run();
    let (c2, b) = run();
    ensure(c1 == 0 && c2 == 0 && a == b, || {
        "repeated seeded runs differ".into()
    })?;
    Ok(format!("brute force = k* on all cases; 20 MC cases, max |z| = {worst_z:.2}; seeded output byte-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("yunus endpoints", yunus_endpoints),
        ("integer plateau", integer_plateau),
        ("power-family extremes", power_extremes),
        ("other families", other_families),
        ("interval narrowing", narrowing),
        ("analytic checks", appendix_checks),
        ("counterexample rejection", counterexample_rejection),
        ("series oracle", series_oracle),
        ("fixed-point equivalence", fixed_point_equivalence),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

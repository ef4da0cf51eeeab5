//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p poisson-moments --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use num_traits::ToPrimitive;
use poisson_moments::exact_arith::{pow_rat, rat, ratio, Rat};
use poisson_moments::identities::{run_all, GridLimits};
use poisson_moments::matching_lab::{
    check_sorted_optimality, expected_sorted_cost_exact, geometric_grid, mean_sorted_cost,
    scaling_experiment, RateCoupling,
};
use poisson_moments::oracles::{exact_moment_first_principles, mc_moment, MCEstimate};
use poisson_moments::{
    diagonal_moment, even_moment_general, moment, odd_moment_lemma2, odd_moment_lemma3,
    odd_moment_theorem4, MomentQuery,
};

/// Published seed for the Monte Carlo criteria.
const MC_SEED: u64 = 20_160_901;
/// Seed used for the single permitted rerun of a failing Monte Carlo point.
const MC_RESEED: u64 = 20_160_902;
const SIGMAS: f64 = 4.0;

const MC_SAMPLES: u64 = 1_000_000;
const MATCHING_INSTANCES: u64 = 500;
const MATCHING_MAX_N: usize = 7;
const MATCHING_REL_TOL: f64 = 1e-9;
const SCALING_TRIALS: u64 = 200;
const EXPECTED_COST_TRIALS: u64 = 100_000;

type Outcome = Result<String, String>;

fn q(k: u64, r: u64, a: u64, lambda: &Rat) -> MomentQuery {
    MomentQuery::new(k, r, a, lambda.clone()).expect("valid query")
}

fn f64_of(r: &Rat) -> f64 {
    r.to_f64().expect("finite")
}

fn ac1_triple_agreement() -> Outcome {
    let lambdas = [rat(1), ratio(1, 2), rat(3)];
    let mut checked = 0;
    for k in 1..=12 {
        for r in 0..=8 {
            for a in [1, 3, 5, 7] {
                for l in &lambdas {
                    let l2 = odd_moment_lemma2(k + r, k, a, l).map_err(|e| e.to_string())?;
                    let l3 = odd_moment_lemma3(k + r, k, a, l).map_err(|e| e.to_string())?;
                    let t4 = odd_moment_theorem4(k, r, a, l).map_err(|e| e.to_string())?;
                    if l2 != l3 || l3 != t4 {
                        return Err(format!(
                            "k={k} r={r} a={a} lambda={l}: {} / {} / {}",
                            l2.value, l3.value, t4.value
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} grid points, exact equality"))
}

fn ac2_diagonal() -> Outcome {
    let mut checked = 0;
    for lambda in [rat(1), ratio(2, 3)] {
        for k in 1..=20 {
            for a in 1..=10 {
                let m = moment(&q(k, 0, a, &lambda)).map_err(|e| e.to_string())?;
                let d = diagonal_moment(k, a, &lambda).map_err(|e| e.to_string())?;
                if m != d {
                    return Err(format!("k={k} a={a}: {} vs {}", m.value, d.value));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (k, a, lambda) points, exact equality"))
}

fn ac3_first_principles() -> Outcome {
    let mut checked = 0;
    for lambda in [rat(1), rat(2)] {
        for i in 1..=10u64 {
            for k in 1..=10u64 {
                for a in 1..=7 {
                    let oracle =
                        exact_moment_first_principles(i, k, a, &lambda).map_err(|e| e.to_string())?;
                    // |X_i - Y_k| and |X_k - Y_i| have the same law
                    let (lo, hi) = (i.min(k), i.max(k));
                    let dispatched = moment(&q(lo, hi - lo, a, &lambda)).map_err(|e| e.to_string())?;
                    let direct = if a % 2 == 0 {
                        even_moment_general(i, k, a, &lambda)
                    } else {
                        odd_moment_lemma2(i, k, a, &lambda)
                    }
                    .map_err(|e| e.to_string())?;
                    if oracle != dispatched.value || oracle != direct.value {
                        return Err(format!(
                            "i={i} k={k} a={a} lambda={lambda}: oracle {oracle}, dispatched {}, direct {}",
                            dispatched.value, direct.value
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} points, exact equality"))
}

fn ac4_identities() -> Outcome {
    let reports = run_all(GridLimits::default()).map_err(|e| e.to_string())?;
    let mut names = Vec::new();
    for r in &reports {
        if !r.all_passed {
            return Err(format!("{} failed at {:?}", r.name, r.first_failure));
        }
        names.push(format!("{}({})", r.name, r.parameter_set.len()));
    }
    Ok(names.join(", "))
}

fn ac5_spot_values() -> Outcome {
    for lambda in [rat(1), rat(2), ratio(1, 3)] {
        let expect = [(1, 1, 1), (2, 1, 2), (3, 1, 6)];
        for (a, _, c) in expect {
            let got = moment(&q(1, 0, a, &lambda)).map_err(|e| e.to_string())?.value;
            let want = rat(c) / pow_rat(&lambda, a as i64);
            if got != want {
                return Err(format!("E|X1-Y1|^{a} at lambda={lambda}: {got} != {want}"));
            }
        }
    }
    let got = moment(&q(1, 1, 1, &rat(1))).map_err(|e| e.to_string())?.value;
    if got != ratio(3, 2) {
        return Err(format!("E|X2-Y1| = {got}, expected 3/2"));
    }
    Ok("1/lambda, 2/lambda^2, 6/lambda^3 at lambda in {1, 2, 1/3}; E|X2-Y1| = 3/2".into())
}

/// (k, r) pairs; each is run for a in {1, 2, 3}.
const MC_GRID: [(u64, u64); 10] = [
    (1, 0),
    (1, 1),
    (1, 4),
    (2, 0),
    (2, 3),
    (3, 2),
    (5, 0),
    (5, 5),
    (8, 1),
    (10, 0),
];

fn mc_point(k: u64, r: u64, a: u64, seed: u64) -> Result<(MCEstimate, f64), String> {
    let exact = moment(&q(k, r, a, &rat(1))).map_err(|e| e.to_string())?.value;
    let est = mc_moment(k, r, a as f64, 1.0, MC_SAMPLES, seed).map_err(|e| e.to_string())?;
    Ok((est, f64_of(&exact)))
}

fn ac6_monte_carlo() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut reseeded = Vec::new();
    for (k, r) in MC_GRID {
        for a in 1..=3 {
            let (mut est, exact) = mc_point(k, r, a, MC_SEED)?;
            if !est.within(exact, SIGMAS) {
                reseeded.push(format!("(k={k},r={r},a={a}) z={:.2}", est.z_score(exact)));
                est = mc_point(k, r, a, MC_RESEED)?.0;
                if !est.within(exact, SIGMAS) {
                    return Err(format!(
                        "k={k} r={r} a={a}: mean {} exact {exact} z={:.2} after reseed",
                        est.mean,
                        est.z_score(exact)
                    ));
                }
            }
            worst = worst.max(est.z_score(exact).abs());
        }
    }
    let note = if reseeded.is_empty() {
        String::new()
    } else {
        format!("; reseeded {}", reseeded.join(" "))
    };
    Ok(format!(
        "30 points x {MC_SAMPLES} samples, seed {MC_SEED}, max |z| = {worst:.2}{note}"
    ))
}

fn ac7_matching_optimality() -> Outcome {
    let mut parts = Vec::new();
    for b in [1.0, 1.5, 2.0, 3.0] {
        let c = check_sorted_optimality(b, MATCHING_MAX_N, MATCHING_INSTANCES, MC_SEED, MATCHING_REL_TOL)
            .map_err(|e| e.to_string())?;
        if c.mismatches > 0 {
            return Err(format!("b={b}: {} of {} instances not optimal", c.mismatches, c.instances));
        }
        parts.push(format!("b={b} max gap {:.1e}", c.max_relative_gap));
    }
    // concave regime is reported only
    let c = check_sorted_optimality(0.5, MATCHING_MAX_N, MATCHING_INSTANCES, MC_SEED, MATCHING_REL_TOL)
        .map_err(|e| e.to_string())?;
    parts.push(format!(
        "[b=0.5 reported: {}/{} sorted suboptimal, max gap {:.3}]",
        c.mismatches, c.instances, c.max_relative_gap
    ));
    Ok(format!("{MATCHING_INSTANCES} instances, n <= {MATCHING_MAX_N}: {}", parts.join(", ")))
}

fn ac8_scaling_law() -> Outcome {
    let grid = geometric_grid(8, 4096, 2).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (b, tol, upper_only) in [(1.0, 0.10, false), (2.0, 0.10, false), (3.0, 0.15, false), (0.5, 0.10, true)] {
        let fit = scaling_experiment(b, &grid, SCALING_TRIALS, MC_SEED).map_err(|e| e.to_string())?;
        let target = 1.0 - b / 2.0;
        let ok = if upper_only {
            fit.slope <= target + tol
        } else {
            (fit.slope - target).abs() <= tol
        };
        let line = format!("b={b} slope {:.4} (target {target}, r2 {:.4})", fit.slope, fit.r_squared);
        if !ok {
            return Err(line);
        }
        parts.push(line);
    }
    Ok(parts.join(", "))
}

fn ac9_expected_cost() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [4u64, 16, 64] {
        for a in 1..=3u64 {
            let exact = f64_of(&expected_sorted_cost_exact(n, a).map_err(|e| e.to_string())?);
            let est = mean_sorted_cost(n, a as f64, RateCoupling::PointCount, EXPECTED_COST_TRIALS, MC_SEED)
                .map_err(|e| e.to_string())?;
            if !est.within(exact, SIGMAS) {
                return Err(format!(
                    "n={n} a={a}: mean {} exact {exact} z={:.2}",
                    est.mean,
                    est.z_score(exact)
                ));
            }
            worst = worst.max(est.z_score(exact).abs());
        }
    }
    Ok(format!("9 points x {EXPECTED_COST_TRIALS} trials, max |z| = {worst:.2}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1 exact triple agreement (odd a)", ac1_triple_agreement),
        ("AC2 diagonal Gamma formula", ac2_diagonal),
        ("AC3 first-principles oracle equivalence", ac3_first_principles),
        ("AC4 identity suites", ac4_identities),
        ("AC5 spot values", ac5_spot_values),
        ("AC6 Monte Carlo agreement (4 sigma)", ac6_monte_carlo),
        ("AC7 sorted matching optimal for b >= 1", ac7_matching_optimality),
        ("AC8 scaling law n^(1-b/2)", ac8_scaling_law),
        ("AC9 exact expected matching cost", ac9_expected_cost),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

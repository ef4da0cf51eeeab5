use std::fmt::Write as _;

use poisson_moments::exact_arith::{parse_rat, Rat};
use poisson_moments::identities::{run_all, run_suite, GridLimits, IdentityReport, Suite};
use poisson_moments::matching_lab::{geometric_grid, scaling_experiment_with, RateCoupling};
use poisson_moments::oracles::{exact_moment_first_principles, mc_moment};
use poisson_moments::{
    diagonal_moment, even_moment_general, moment, odd_moment_lemma2, odd_moment_lemma3,
    odd_moment_theorem4, sum_moments, sum_moments_termwise, Error, MomentQuery,
};
use serde_json::{json, Value};

use crate::output::{approx, fmt_f64, rat_json, rat_text, OutputRecord, Table};
use crate::{CliError, MatchingArgs, MomentArgs, SimulateArgs, SumArgs, VerifyArgs};

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CrossCheck(msg) => CliError::CrossCheck(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub fn parse_positive_rat(s: &str) -> Result<Rat, String> {
    let r = parse_rat(s).map_err(|e| e.to_string())?;
    if r > Rat::from_integer(0.into()) {
        Ok(r)
    } else {
        Err(format!("expected a positive rational, got `{s}`"))
    }
}

fn lambda_json(l: &Rat) -> Value {
    json!({ "num": l.numer().to_string(), "den": l.denom().to_string() })
}

pub fn cmd_moment(args: &MomentArgs) -> Result<OutputRecord, CliError> {
    let q = MomentQuery::new(args.k, args.r, args.a, args.lambda.clone())?;
    let value = moment(&q)?;

    let mut methods: Vec<(&str, Rat)> = Vec::new();
    if args.cross_check {
        let (i, k, a, l) = (q.k + q.r, q.k, q.a, &q.lambda);
        if a % 2 == 0 {
            methods.push(("even_general", even_moment_general(i, k, a, l)?.value));
        } else {
            methods.push(("theorem4", odd_moment_theorem4(k, q.r, a, l)?.value));
            methods.push(("lemma2", odd_moment_lemma2(i, k, a, l)?.value));
            methods.push(("lemma3", odd_moment_lemma3(i, k, a, l)?.value));
        }
        if q.r == 0 {
            methods.push(("diagonal", diagonal_moment(k, a, l)?.value));
        }
        methods.push(("first_principles", exact_moment_first_principles(i, k, a, l)?));
    }
    let agree = methods.iter().all(|(_, v)| *v == value.value);

    let mut rec = OutputRecord::new("moment")
        .param("k", q.k)
        .param("r", q.r)
        .param("a", q.a)
        .param("lambda", lambda_json(&q.lambda))
        .param("cross_check", args.cross_check);
    let checks: serde_json::Map<String, Value> = methods
        .iter()
        .map(|(name, v)| (name.to_string(), rat_json(v)))
        .collect();
    rec.result = json!({
        "moment": rat_json(&value.value),
        "normalized": rat_json(&value.normalized),
        "cross_check": if args.cross_check { json!({ "agree": agree, "methods": checks }) } else { Value::Null },
    });
    let status = match (args.cross_check, agree) {
        (false, _) => "none",
        (true, true) => "agree",
        (true, false) => "mismatch",
    };
    rec.table = Table {
        header: vec![
            "k", "r", "a", "lambda_num", "lambda_den", "num", "den", "decimal_approx", "cross_check",
        ],
        rows: vec![vec![
            q.k.to_string(),
            q.r.to_string(),
            q.a.to_string(),
            q.lambda.numer().to_string(),
            q.lambda.denom().to_string(),
            value.value.numer().to_string(),
            value.value.denom().to_string(),
            fmt_f64(approx(&value.value)),
            status.to_string(),
        ]],
    };
    let mut text = format!(
        "E|X_{} - Y_{}|^{} at lambda = {}: {}\n",
        q.k + q.r,
        q.k,
        q.a,
        q.lambda,
        rat_text(&value.value)
    );
    for (name, v) in &methods {
        let mark = if *v == value.value { "ok" } else { "MISMATCH" };
        let _ = writeln!(text, "  {name:<17} {}/{}  {mark}", v.numer(), v.denom());
    }
    if args.cross_check {
        let _ = writeln!(text, "cross-check: {status} ({} methods)", methods.len());
    }
    rec.text = text;

    if !agree {
        return Err(CliError::CrossCheckWithOutput(
            Box::new(rec),
            "closed-form routes disagree".into(),
        ));
    }
    Ok(rec)
}

pub fn cmd_sum(args: &SumArgs) -> Result<OutputRecord, CliError> {
    let value = sum_moments(args.n, args.a, &args.lambda)?;
    let termwise = if args.verify {
        Some(sum_moments_termwise(args.n, args.a, &args.lambda)?)
    } else {
        None
    };
    let verified = termwise.as_ref().map(|t| *t == value);

    let mut rec = OutputRecord::new("sum")
        .param("n", args.n)
        .param("a", args.a)
        .param("lambda", lambda_json(&args.lambda))
        .param("verify", args.verify);
    rec.result = json!({
        "sum": rat_json(&value.value),
        "normalized": rat_json(&value.normalized),
        "termwise": termwise.as_ref().map(|t| rat_json(&t.value)),
        "verified": verified,
    });
    rec.table = Table {
        header: vec!["n", "a", "lambda_num", "lambda_den", "num", "den", "decimal_approx", "verified"],
        rows: vec![vec![
            args.n.to_string(),
            args.a.to_string(),
            args.lambda.numer().to_string(),
            args.lambda.denom().to_string(),
            value.value.numer().to_string(),
            value.value.denom().to_string(),
            fmt_f64(approx(&value.value)),
            verified.map_or("none".into(), |v| v.to_string()),
        ]],
    };
    let mut text = format!(
        "sum_{{k=1..{}}} E|X_k - Y_k|^{} at lambda = {}: {}\n",
        args.n,
        args.a,
        args.lambda,
        rat_text(&value.value)
    );
    if let Some(v) = verified {
        let _ = writeln!(text, "term-by-term: {}", if v { "verified" } else { "MISMATCH" });
    }
    rec.text = text;
    if verified == Some(false) {
        return Err(CliError::CrossCheckWithOutput(
            Box::new(rec),
            "closed-form sum disagrees with term-by-term sum".into(),
        ));
    }
    Ok(rec)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(OutputRecord, bool), CliError> {
    let limits = GridLimits {
        max_a: args.max_a,
        max_k: args.max_k,
        max_n: args.max_n,
    };
    let reports: Vec<IdentityReport> = if args.suite == "all" {
        run_all(limits)?
    } else {
        let suite: Suite = args.suite.parse()?;
        run_suite(suite, limits)?
    };
    let all_passed = reports.iter().all(|r| r.all_passed);

    let mut rec = OutputRecord::new("verify")
        .param("suite", args.suite.clone())
        .param("max_a", args.max_a)
        .param("max_k", args.max_k)
        .param("max_n", args.max_n);
    rec.result = json!({ "all_passed": all_passed, "reports": reports });
    let tuple = |t: &Option<Vec<i64>>| {
        t.as_ref()
            .map(|v| v.iter().map(i64::to_string).collect::<Vec<_>>().join(";"))
            .unwrap_or_default()
    };
    rec.table = Table {
        header: vec!["identity", "points", "all_passed", "first_failure"],
        rows: reports
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    r.parameter_set.len().to_string(),
                    r.all_passed.to_string(),
                    tuple(&r.first_failure),
                ]
            })
            .collect(),
    };
    let mut text = String::new();
    for r in &reports {
        let status = if r.all_passed { "pass" } else { "FAIL" };
        let _ = write!(text, "{status}  {:<40} {:>5} points", r.name, r.parameter_set.len());
        if let Some(f) = &r.first_failure {
            let _ = write!(text, "  first failure at {f:?}");
        }
        text.push('\n');
    }
    rec.text = text;
    Ok((rec, all_passed))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<OutputRecord, CliError> {
    let est = mc_moment(args.k, args.r, args.b, args.lambda, args.samples, args.seed)?;
    let exact = if args.b.fract() == 0.0 && args.b >= 1.0 {
        let lambda = Rat::from_float(args.lambda)
            .ok_or_else(|| CliError::Usage("lambda is not finite".into()))?;
        let q = MomentQuery::new(args.k, args.r, args.b as u64, lambda)?;
        Some(moment(&q)?.value)
    } else {
        None
    };
    let z = exact.as_ref().map(|e| est.z_score(approx(e)));

    let mut rec = OutputRecord::new("simulate")
        .param("k", args.k)
        .param("r", args.r)
        .param("b", args.b)
        .param("lambda", args.lambda)
        .param("samples", args.samples)
        .param("seed", args.seed);
    rec.result = json!({
        "estimate": est,
        "exact": exact.as_ref().map(rat_json),
        "z_score": z,
    });
    let opt = |v: Option<String>| v.unwrap_or_default();
    rec.table = Table {
        header: vec![
            "k", "r", "b", "lambda", "samples", "seed", "mean", "stderr", "exact_num", "exact_den",
            "exact_approx", "z_score",
        ],
        rows: vec![vec![
            args.k.to_string(),
            args.r.to_string(),
            fmt_f64(args.b),
            fmt_f64(args.lambda),
            est.samples.to_string(),
            est.seed.to_string(),
            fmt_f64(est.mean),
            fmt_f64(est.stderr),
            opt(exact.as_ref().map(|e| e.numer().to_string())),
            opt(exact.as_ref().map(|e| e.denom().to_string())),
            opt(exact.as_ref().map(|e| fmt_f64(approx(e)))),
            opt(z.map(fmt_f64)),
        ]],
    };
    let mut text = format!(
        "E|X_{} - Y_{}|^{} at lambda = {}: mean {} +/- {} ({} samples, seed {})\n",
        args.k + args.r,
        args.k,
        args.b,
        args.lambda,
        fmt_f64(est.mean),
        fmt_f64(est.stderr),
        est.samples,
        est.seed
    );
    match (&exact, z) {
        (Some(e), Some(z)) => {
            let _ = writeln!(text, "exact {}  z = {z:.3}", rat_text(e));
        }
        _ => text.push_str("no closed form for a non-integer exponent\n"),
    }
    rec.text = text;
    Ok(rec)
}

pub fn cmd_matching(args: &MatchingArgs) -> Result<OutputRecord, CliError> {
    let grid = geometric_grid(args.n_min, args.n_max, args.grid_factor)?;
    let coupling = match args.rate {
        Some(l) => RateCoupling::Fixed(l),
        None => RateCoupling::PointCount,
    };
    let fit = scaling_experiment_with(args.b, &grid, args.trials, args.seed, coupling)?;

    let mut rec = OutputRecord::new("matching")
        .param("b", args.b)
        .param("n_min", args.n_min)
        .param("n_max", args.n_max)
        .param("grid_factor", args.grid_factor)
        .param("trials", args.trials)
        .param("seed", args.seed)
        .param("rate", args.rate);
    rec.result = json!({ "fit": fit, "target_slope": 1.0 - args.b / 2.0 });
    rec.table = Table {
        header: vec!["b", "n", "mean_cost", "stderr", "slope", "intercept", "r_squared"],
        rows: fit
            .n_grid
            .iter()
            .zip(&fit.mean_costs)
            .zip(&fit.stderrs)
            .map(|((n, m), s)| {
                vec![
                    fmt_f64(fit.b),
                    n.to_string(),
                    fmt_f64(*m),
                    fmt_f64(*s),
                    fmt_f64(fit.slope),
                    fmt_f64(fit.intercept),
                    fmt_f64(fit.r_squared),
                ]
            })
            .collect(),
    };
    let mut text = String::from("n\tmean_cost\tstderr\n");
    for ((n, m), s) in fit.n_grid.iter().zip(&fit.mean_costs).zip(&fit.stderrs) {
        let _ = writeln!(text, "{n}\t{}\t{}", fmt_f64(*m), fmt_f64(*s));
    }
    let _ = writeln!(
        text,
        "slope {:.4} (1 - b/2 = {}), intercept {:.4}, r^2 {:.4}",
        fit.slope,
        1.0 - args.b / 2.0,
        fit.intercept,
        fit.r_squared
    );
    rec.text = text;
    Ok(rec)
}

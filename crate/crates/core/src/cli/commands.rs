use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::Config;
use super::{fmt17, parse_range, BoundArgs, ConcentrationArgs, FunctionalSource, GlobalArgs, NetArgs, Output};
use crate::bounds::{loubenets_bound, theorem_bound, BoundVariant, TailBoundParams};
use crate::catalog;
use crate::error::{Error, Result};
use crate::io;
use crate::lhv::{self, classical_bounds, normalize, positivize_lower, BellFunctional};
use crate::montecarlo::{
    concentration_experiment, default_epsilon_grid, random_normalized_functional, sample_rng,
    tail_experiment, ExperimentConfig,
};
use crate::nets::{net_size_bound, HypercubeNet};
use crate::quantum::{behaviour_of, operator_norm, sample_haar_state, Assemblage, BellOperator};
use crate::scenario::Scenario;

type Outcome = (serde_json::Value, u64, i32);

/// Prints a record line; a closed stdout (e.g. `| head`) is not an error.
fn emit(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn load(source: &FunctionalSource) -> Result<(String, BellFunctional)> {
    match (&source.catalog, &source.file) {
        (Some(name), _) => Ok((name.clone(), catalog::get(name)?.functional)),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "functional".into());
            Ok((stem, io::functional_from_json(&text)?))
        }
        (None, None) => Err(Error::Config("pass --catalog NAME or --file PATH".into())),
    }
}

fn source_echo(source: &FunctionalSource) -> serde_json::Value {
    json!({
        "catalog": source.catalog,
        "file": source.file.as_ref().map(|p| p.display().to_string()),
    })
}

pub(super) fn classical_bound(source: &FunctionalSource, out: &mut Output) -> Result<Outcome> {
    let (name, t) = load(source)?;
    let (lo, hi) = classical_bounds(&t)?;
    println!("{name}: classical bounds ({lo}, {hi})");
    let normalized = normalize(&t)?;
    let path = out.write(&format!("{name}.normalized.json"), &(io::functional_to_json(&normalized)? + "\n"))?;
    println!("normalized form: {}", path.display());
    Ok((source_echo(source), 0, 0))
}

pub(super) fn positivize(source: &FunctionalSource, lower: bool, out: &mut Output) -> Result<Outcome> {
    let (name, t) = load(source)?;
    let p = if lower { positivize_lower(&t)? } else { lhv::positivize(&t)? };
    if let Some(crate::lhv::Transform::Positivize { theta, substituted }) = p.provenance().last() {
        println!("{name}: Θ = {theta}, {} substituted entries", substituted.len());
    }
    let (lo, hi) = p.bounds().expect("positivize records bounds");
    println!("positive form classical bounds ({lo}, {hi})");
    let path = out.write(&format!("{name}.positive.json"), &(io::functional_to_json(&p)? + "\n"))?;
    println!("positive form: {}", path.display());
    let mut echo = source_echo(source);
    echo["lower"] = json!(lower);
    Ok((echo, 0, 0))
}

fn experiment_config(cfg: &Config, global: &GlobalArgs) -> Result<ExperimentConfig> {
    let scenario = Scenario::new(cfg.optional("N", 2)?, cfg.optional("m", 2)?, cfg.optional("v", 2)?)?;
    let threshold: f64 = cfg.required("c")?;
    let samples: usize = cfg.required("samples")?;
    let seed = match global.seed {
        Some(s) => s,
        None => cfg.optional("seed", 0)?,
    };
    let mut config = ExperimentConfig::new(scenario, cfg.optional("d", 2)?, threshold, samples, seed);
    if let Some(list) = cfg.list("functionals") {
        config.functionals = list;
    }
    config.lp = cfg.optional("lp", false)?;
    config.cap = cfg.optional("b", 1.0)?;
    config.restarts = cfg.optional("restarts", config.restarts)?;
    config.max_sweeps = cfg.optional("sweeps", config.max_sweeps)?;
    config.projective_init = cfg.optional("projective", false)?;
    if cfg.contains("time_limit") {
        config.time_limit = Some(cfg.required("time_limit")?);
    }
    config.workers = global.workers;
    config.validate()?;
    Ok(config)
}

pub(super) fn tail(path: &Path, global: &GlobalArgs, out: &mut Output) -> Result<Outcome> {
    let cfg = Config::parse(&std::fs::read_to_string(path)?)?;
    let config = experiment_config(&cfg, global)?;
    let estimate = tail_experiment(&config)?;
    let header = json!({ "manifest": out.manifest_name() });
    let body = format!("{}\n{}", serde_json::to_string(&header)?, estimate.to_jsonl()?);
    let data = out.write("tail.jsonl", &body)?;
    let (lo, hi) = estimate.interval;
    println!(
        "p̂ = {} ({}/{} above c = {}), 95% Clopper–Pearson interval [{}, {}]",
        estimate.fraction, estimate.exceedances, estimate.completed, estimate.threshold, lo, hi
    );
    println!("estimator: {}{}", estimate.estimator, if estimate.partial { " (partial: time limit reached)" } else { "" });
    println!("records: {}", data.display());
    let mut echo = serde_json::to_value(&config)?;
    echo["workers"] = json!(global.workers);
    echo["wall_clock_secs"] = json!(estimate.wall_clock_secs);
    Ok((echo, config.seed, 0))
}

fn variants(requested: &[String]) -> Result<Vec<BoundVariant>> {
    if requested.is_empty() {
        return Ok(vec![BoundVariant::Theorem, BoundVariant::Derived]);
    }
    let mut out = Vec::new();
    for r in requested {
        if r == "all" {
            out.extend(BoundVariant::ALL);
        } else {
            out.push(BoundVariant::parse(r)?);
        }
    }
    Ok(out)
}

pub(super) fn bound(args: &BoundArgs, out: &mut Output) -> Result<Outcome> {
    let base = TailBoundParams {
        parties: args.parties,
        settings: args.settings,
        outcomes: args.outcomes,
        local_dim: args.dim,
        b: args.cap,
        c: args.threshold,
        delta: args.delta,
    };
    let mut points = vec![base];
    let sweep = if let Some(spec) = &args.sweep_parties {
        points = parse_range(spec)?
            .into_iter()
            .map(|n| TailBoundParams { parties: n as u32, ..base })
            .collect();
        Some("N")
    } else if let Some(spec) = &args.sweep_dim {
        points = parse_range(spec)?
            .into_iter()
            .map(|d| TailBoundParams { local_dim: d as u32, ..base })
            .collect();
        Some("d")
    } else {
        None
    };
    let variants = variants(&args.variant)?;
    let mut lines = String::new();
    let mut csv = format!("# manifest: {}\nN,m,v,d,b,c,delta,variant,log_value\n", out.manifest_name());
    for p in &points {
        for &v in &variants {
            let r = theorem_bound(p, v)?;
            let line = serde_json::to_string(&r)?;
            emit(&line);
            lines.push_str(&line);
            lines.push('\n');
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                p.parties,
                p.settings,
                p.outcomes,
                p.local_dim,
                fmt17(p.b),
                fmt17(p.c),
                fmt17(p.delta),
                v.name(),
                fmt17(r.log_value)
            ));
        }
    }
    out.write("bound.jsonl", &lines)?;
    if sweep.is_some() {
        out.write("bound_sweep.csv", &csv)?;
    }
    let echo = json!({
        "params": base,
        "variants": variants.iter().map(|v| v.name()).collect::<Vec<_>>(),
        "sweep": sweep,
        "sweep_parties": args.sweep_parties,
        "sweep_dim": args.sweep_dim,
    });
    Ok((echo, 0, 0))
}

pub(super) fn concentration(args: &ConcentrationArgs, global: &GlobalArgs, out: &mut Output) -> Result<Outcome> {
    let seed = global.seed.unwrap_or(0);
    let grid = default_epsilon_grid();
    let mut lines = String::new();
    let mut csv = format!(
        "# manifest: {}\nN,d,epsilon,empirical,standard_error,levy\n",
        out.manifest_name()
    );
    println!("{:>3} {:>24} {:>24} {:>24}", "N", "mean", "Tr(B)/d^N", "variance");
    for n in parse_range(&args.parties)? {
        let n = n as usize;
        let scenario = Scenario::new(n, args.settings, args.outcomes)?;
        let mut rng = sample_rng(seed, n);
        let t = random_normalized_functional(scenario, &mut rng)?;
        let a = Assemblage::random(scenario, args.dim, &mut rng)?;
        let rec = concentration_experiment(&t, &a, args.samples, &grid, &mut rng)?;
        println!(
            "{n:>3} {:>24} {:>24} {:>24}",
            fmt17(rec.mean),
            fmt17(rec.normalized_trace),
            fmt17(rec.variance)
        );
        for p in &rec.tail {
            csv.push_str(&format!(
                "{n},{},{},{},{},{}\n",
                args.dim,
                fmt17(p.epsilon),
                fmt17(p.empirical),
                fmt17(p.standard_error),
                fmt17(p.levy)
            ));
        }
        lines.push_str(&serde_json::to_string(&rec)?);
        lines.push('\n');
    }
    out.write("concentration.jsonl", &lines)?;
    out.write("concentration.csv", &csv)?;
    let echo = json!({
        "parties": args.parties,
        "dim": args.dim,
        "settings": args.settings,
        "outcomes": args.outcomes,
        "samples": args.samples,
    });
    Ok((echo, seed, 0))
}

pub(super) fn net_demo(args: &NetArgs, global: &GlobalArgs, out: &mut Output) -> Result<Outcome> {
    let seed = global.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = args.dim;
    let net = HypercubeNet::build(n, args.epsilon, args.budget, || {
        Some((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
    })?;
    let mut probe_rng = sample_rng(seed, 1);
    let mut uncovered = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..args.probes {
        let x: Vec<f64> = (0..n).map(|_| probe_rng.gen_range(-1.0..=1.0)).collect();
        match net.witness(&x) {
            Some((_, dist)) => worst = worst.max(dist),
            None => uncovered += 1,
        }
    }
    let bound = net_size_bound(n, args.epsilon);
    println!(
        "n = {n}, ε = {}, l = {}: {} net points (bound (2/ε+2)^n = {})",
        args.epsilon,
        net.resolution(),
        net.len(),
        bound.exp()
    );
    println!(
        "probes: {} covered within {} (max distance {}), {uncovered} in unsampled cells",
        args.probes - uncovered,
        args.epsilon,
        worst
    );
    out.write("net.json", &(net.to_json()? + "\n"))?;
    let echo = json!({
        "n": n,
        "epsilon": args.epsilon,
        "budget": args.budget,
        "probes": args.probes,
        "net_points": net.len(),
        "uncovered": uncovered,
    });
    Ok((echo, seed, 0))
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

pub(super) fn verify(corrupt: bool, global: &GlobalArgs, out: &mut Output) -> Result<Outcome> {
    let seed = global.seed.unwrap_or(0);
    let tol = global.tol;
    let mut checks = Vec::new();

    let mut entries = catalog::all();
    if corrupt {
        let e = &mut entries[3];
        let mut coeffs = e.functional.coeffs().to_vec();
        coeffs[0] += 1.0;
        e.functional = BellFunctional::new(e.scenario(), coeffs)?;
    }
    let report = catalog::verify_entries(&entries)?;
    let failing: Vec<_> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
    checks.push(Check {
        name: "catalog classical bounds",
        passed: failing.is_empty(),
        detail: if failing.is_empty() {
            report
                .checks
                .iter()
                .map(|c| format!("{} ({}, {})", c.name, c.enumerated.0, c.enumerated.1))
                .collect::<Vec<_>>()
                .join(", ")
        } else {
            format!("mismatch in {}", failing.join(", "))
        },
    });

    let positive_ok = entries.iter().all(|e| {
        normalize(&e.functional)
            .and_then(|n| lhv::positivize(&n))
            .map(|p| p.coeffs().iter().all(|&c| (-tol..=1.0 + tol).contains(&c)))
            .unwrap_or(false)
    });
    checks.push(Check {
        name: "positivized catalog in unit cube",
        passed: positive_ok,
        detail: "coefficients in [0, 1]".into(),
    });

    let s = Scenario::new(2, 2, 2)?;
    let mut rng = sample_rng(seed, 0);
    let mut worst_norm: f64 = 0.0;
    for _ in 0..20 {
        let t = random_normalized_functional(s, &mut rng)?;
        let a = Assemblage::random(s, 2, &mut rng)?;
        worst_norm = worst_norm.max(operator_norm(&t, &a, tol)?);
    }
    let ceiling = loubenets_bound(2, 2);
    checks.push(Check {
        name: "operator norm ceiling (2m−1)^N",
        passed: worst_norm <= ceiling + 1e-6,
        detail: format!("max over 20 random normalized (T, A): {worst_norm} ≤ {ceiling}"),
    });

    let mut worst_signal: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for _ in 0..10 {
        let psi = sample_haar_state(2, 3, &mut rng)?;
        let sc = Scenario::new(3, 2, 3)?;
        let a = Assemblage::random(sc, 2, &mut rng)?;
        let b = behaviour_of(&psi, &a)?;
        worst_signal = worst_signal.max(b.check_nonsignalling(tol).worst);
        let t = random_normalized_functional(s, &mut rng)?;
        let a2 = Assemblage::random(s, 2, &mut rng)?;
        worst_trace = worst_trace.max(BellOperator::new(&t, &a2)?.normalized_trace().abs());
    }
    checks.push(Check {
        name: "quantum behaviours non-signalling",
        passed: worst_signal <= tol,
        detail: format!("worst marginal deviation {worst_signal:e}"),
    });
    checks.push(Check {
        name: "maximally mixed state within local bound",
        passed: worst_trace <= 1.0 + tol,
        detail: format!("max |Tr(B)/d^N| = {worst_trace}"),
    });

    let mut expansion_ok = true;
    for _ in 0..20 {
        let delta = rng.gen_range(0.01..0.99);
        let p = TailBoundParams {
            parties: rng.gen_range(2..6),
            settings: rng.gen_range(1..4),
            outcomes: rng.gen_range(2..4),
            local_dim: rng.gen_range(2..40),
            b: rng.gen_range(1.0..10.0),
            c: 1.0 + delta + rng.gen_range(0.01..5.0),
            delta,
        };
        let th = theorem_bound(&p, BoundVariant::Theorem)?.log_value;
        let ap = theorem_bound(&p, BoundVariant::Appendix)?.log_value;
        expansion_ok &= ap >= th;
    }
    checks.push(Check {
        name: "expanded bound dominates theorem bound",
        passed: expansion_ok,
        detail: "20 random parameter points with b ≥ 1".into(),
    });

    let mut net_rng = sample_rng(seed, 2);
    let net = HypercubeNet::build(2, 0.5, 5_000, || {
        Some(vec![net_rng.gen_range(-1.0..=1.0), net_rng.gen_range(-1.0..=1.0)])
    })?;
    checks.push(Check {
        name: "net cardinality",
        passed: (net.len() as f64) <= net_size_bound(2, 0.5).exp(),
        detail: format!("{} ≤ 36", net.len()),
    });

    let mut report_text = String::new();
    for c in &checks {
        let line = format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        println!("{line}");
        report_text.push_str(&line);
        report_text.push('\n');
    }
    out.write("verify.txt", &report_text)?;
    let code = if checks.iter().all(|c| c.passed) { 0 } else { 1 };
    Ok((json!({ "corrupt_fixture": corrupt, "tol": tol }), seed, code))
}

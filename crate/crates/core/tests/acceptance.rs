//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use bellconc::bounds::{loubenets_bound, lipschitz_state, theorem_bound, BoundVariant, TailBoundParams};
use bellconc::catalog;
use bellconc::lhv::{classical_bounds, normalize};
use bellconc::montecarlo::{
    concentration_experiment, default_epsilon_grid, optimize_jointly, random_normalized_functional,
    random_start, sample_rng, tail_experiment, ExperimentConfig, SeesawOptions, ESTIMATOR_LABEL,
};
use bellconc::nets::{dist_assemblages, dist_functionals, net_size_bound, HypercubeNet};
use bellconc::quantum::{
    evaluate_q, operator_norm, sample_haar_state, Assemblage, BellOperator, CMatrix, Povm, PureState,
};
use bellconc::{BellFunctional, Scenario};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EIGEN_TOL: f64 = 1e-12;
const EIGEN_ITERS: usize = 100_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn run(id: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            o.passed = false;
            o.detail.push_str(&format!("; runtime {elapsed:.2?} exceeds {limit:?}"));
        }
    }
    println!(
        "{} {id:>2} {title} [{elapsed:.2?}]: {}",
        if o.passed { "PASS" } else { "FAIL" },
        o.detail
    );
    o.passed
}

fn catalog_bounds() -> Outcome {
    let expected = [("pent1", 2.0), ("pent2", 2.0), ("pent3", 2.0), ("i3322", 6.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, upper) in expected {
        let (_, hi) = classical_bounds(&catalog::get(name).unwrap().functional).unwrap();
        ok &= hi == upper;
        parts.push(format!("{name} {hi}"));
    }
    outcome(ok, parts.join(", "))
}

fn chsh_optimum() -> Outcome {
    const SEEDS: u64 = 20;
    const TOL: f64 = 1e-6;
    const MIN_HITS: u64 = 19;
    let t = normalize(&catalog::get("chsh").unwrap().functional).unwrap();
    let options = SeesawOptions {
        tol: 1e-13,
        projective_init: true,
        ..SeesawOptions::default()
    };
    let mut hits = 0;
    let mut worst_check: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = random_start(&t, 2, true, &mut rng).unwrap();
        let joint = optimize_jointly(&t, &start, &options, 200).unwrap();
        let (lambda, _) = BellOperator::new(&t, &joint.assemblage)
            .unwrap()
            .top_eigenpair(EIGEN_TOL, EIGEN_ITERS)
            .unwrap();
        let q = evaluate_q(&joint.state, &t, &joint.assemblage).unwrap();
        worst_check = worst_check.max((lambda - joint.value).abs()).max((q - joint.value).abs());
        if (joint.value - SQRT_2).abs() <= TOL && (lambda - SQRT_2).abs() <= TOL {
            hits += 1;
        }
    }
    outcome(
        hits >= MIN_HITS && worst_check <= TOL,
        format!("{hits}/{SEEDS} seeds within {TOL:e} of √2; eigenvalue cross-check deviation {worst_check:.1e}"),
    )
}

fn loubenets() -> Outcome {
    const COUNT: usize = 200;
    const SLACK: f64 = 1e-6;
    let s = Scenario::new(2, 2, 2).unwrap();
    let bound = loubenets_bound(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for i in 0..COUNT {
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let a = if i % 2 == 0 {
            Assemblage::random(s, 2, &mut rng).unwrap()
        } else {
            Assemblage::random_projective(s, 2, &mut rng).unwrap()
        };
        worst = worst.max(operator_norm(&t, &a, EIGEN_TOL).unwrap());
    }
    outcome(
        worst <= bound + SLACK,
        format!("max ‖𝔅‖ over {COUNT} normalized functionals = {worst:.6} ≤ {bound}"),
    )
}

fn mean_bound() -> Outcome {
    const PAIRS: usize = 20;
    const SAMPLES: usize = 10_000;
    const SLACK: f64 = 1e-9;
    let shapes = [(2, 2, 2, 2), (3, 2, 2, 2), (2, 3, 2, 2), (2, 2, 3, 2), (2, 2, 2, 3)];
    let mut worst_trace: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut ok = true;
    for i in 0..PAIRS {
        let (n, m, v, d) = shapes[i % shapes.len()];
        let s = Scenario::new(n, m, v).unwrap();
        let mut rng = sample_rng(4, i);
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let a = Assemblage::random(s, d, &mut rng).unwrap();
        let rec = concentration_experiment(&t, &a, SAMPLES, &[], &mut rng).unwrap();
        worst_trace = worst_trace.max(rec.normalized_trace.abs());
        worst_z = worst_z.max((rec.mean - rec.normalized_trace).abs() / rec.standard_error);
        ok &= rec.normalized_trace.abs() <= 1.0 + SLACK && rec.mean_consistent();
    }
    outcome(
        ok,
        format!("max |Tr 𝔅/d^N| = {worst_trace:.6}; max |mean − Tr 𝔅/d^N| = {worst_z:.2} SE over {PAIRS} pairs"),
    )
}

fn levy_concentration() -> Outcome {
    const SAMPLES: usize = 10_000;
    let grid = default_epsilon_grid();
    let s = |n| Scenario::new(n, 2, 2).unwrap();
    let mut variances = Vec::new();
    let mut below = true;
    for n in 2..=8 {
        let mut rng = sample_rng(5, n);
        let t = random_normalized_functional(s(n), &mut rng).unwrap();
        let a = Assemblage::random(s(n), 2, &mut rng).unwrap();
        let rec = concentration_experiment(&t, &a, SAMPLES, &grid, &mut rng).unwrap();
        below &= rec.below_levy();
        variances.push(rec.variance);
    }
    let decreasing = variances.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = variances.iter().map(|v| format!("{v:.2e}")).collect();
    outcome(
        below && decreasing,
        format!(
            "exceedance below Lévy + 3 SE: {below}; variance N=2..8 [{}] strictly decreasing: {decreasing}",
            shown.join(", ")
        ),
    )
}

fn perturb_assemblage<R: Rng>(a: &Assemblage, scale: f64, rng: &mut R) -> Assemblage {
    let s = a.scenario();
    let other = Assemblage::random(s, a.local_dim(), rng).unwrap();
    let povms = (0..s.parties())
        .map(|k| {
            (0..s.settings())
                .map(|x| {
                    let elems = (0..s.outcomes())
                        .map(|o| a.element(k, x, o) * Complex64::from(1.0 - scale) + other.element(k, x, o) * Complex64::from(scale))
                        .collect();
                    Povm::new(elems).unwrap()
                })
                .collect()
        })
        .collect();
    Assemblage::new(s, povms).unwrap()
}

fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0, |acc: f64, l| acc.max(l.abs()))
}

fn sup_operator_distance(a: &Assemblage, b: &Assemblage) -> f64 {
    let s = a.scenario();
    let mut worst: f64 = 0.0;
    for k in 0..s.parties() {
        for x in 0..s.settings() {
            for o in 0..s.outcomes() {
                worst = worst.max(spectral_norm(&(a.element(k, x, o) - b.element(k, x, o))));
            }
        }
    }
    worst
}

fn lipschitz_suite() -> Outcome {
    const PAIRS: usize = 1000;
    const SLACK: f64 = 1e-9;
    let shapes = [(2, 2, 2, 2), (3, 2, 2, 2), (2, 3, 2, 2), (2, 2, 3, 3), (2, 2, 2, 3)];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = [0usize; 4];
    let mut ratio = [0.0f64; 4];
    for i in 0..PAIRS {
        let (n, m, v, d) = shapes[i % shapes.len()];
        let s = Scenario::new(n, m, v).unwrap();
        let t = random_normalized_functional(s, &mut rng).unwrap();
        let a = Assemblage::random(s, d, &mut rng).unwrap();
        let psi = sample_haar_state(d, n, &mut rng).unwrap();
        let scale = 10f64.powf(rng.gen_range(-4.0..0.0));
        let q = evaluate_q(&psi, &t, &a).unwrap();
        let terms = ((m * v) as f64).powi(n as i32);

        // state
        let phi = {
            let amps: Vec<Complex64> = psi
                .amplitudes()
                .iter()
                .map(|z| z + Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
                .collect();
            PureState::new(d, n, amps).unwrap()
        };
        let dq = (evaluate_q(&phi, &t, &a).unwrap() - q).abs();
        let rhs = lipschitz_state(n as u32, m as u32) * psi.distance(&phi);
        violations[0] += (dq > rhs + SLACK) as usize;
        ratio[0] = ratio[0].max(dq / rhs);

        // assemblage, operator norm and parameter distance
        let b = t.max_abs_coeff();
        let a2 = perturb_assemblage(&a, scale, &mut rng);
        let dq = (evaluate_q(&psi, &t, &a2).unwrap() - q).abs();
        let rhs = b * n as f64 * terms * sup_operator_distance(&a, &a2);
        violations[1] += (dq > rhs + SLACK) as usize;
        ratio[1] = ratio[1].max(dq / rhs);
        let rhs = 2.0 * b * n as f64 * terms * (d * d) as f64 * dist_assemblages(&a, &a2).unwrap();
        violations[2] += (dq > rhs + SLACK) as usize;
        ratio[2] = ratio[2].max(dq / rhs);

        // functional
        let coeffs: Vec<f64> = t
            .coeffs()
            .iter()
            .map(|c| c + scale * rng.gen_range(-1.0..1.0))
            .collect();
        let t2 = BellFunctional::new(s, coeffs).unwrap();
        let b = t.max_abs_coeff().max(t2.max_abs_coeff());
        let dq = (evaluate_q(&psi, &t2, &a).unwrap() - q).abs();
        let rhs = b * terms * dist_functionals(&t, &t2, b).unwrap();
        violations[3] += (dq > rhs + SLACK) as usize;
        ratio[3] = ratio[3].max(dq / rhs);
    }
    outcome(
        violations.iter().all(|&v| v == 0),
        format!(
            "violations over {PAIRS} pairs each: state {}, assemblage (operator norm) {}, assemblage (parameters) {}, functional {}; max |ΔQ|/bound {:.3}, {:.3}, {:.3}, {:.3}",
            violations[0], violations[1], violations[2], violations[3], ratio[0], ratio[1], ratio[2], ratio[3]
        ),
    )
}

fn params(n: u32, m: u32, v: u32, d: u32, b: f64, c: f64, delta: f64) -> TailBoundParams {
    TailBoundParams {
        parties: n,
        settings: m,
        outcomes: v,
        local_dim: d,
        b,
        c,
        delta,
    }
}

/// Reference values from an independent arbitrary-precision evaluation, in
/// the order theorem, appendix, derived.
const REFERENCE: [((u32, u32, u32, u32, f64, f64, f64), [f64; 3]); 5] = [
    ((2, 2, 2, 2, 1.0, 2.0, 0.1), [444.62837315452683, 477.89006373681236, 444.62975454751102]),
    ((3, 2, 2, 2, 1.0, 1.5, 0.05), [1313.9119221025867, 1391.5425834234687, 1313.9119988466414]),
    ((2, 3, 2, 3, 2.0, 3.0, 0.2), [1564.6373798645773, 1689.3983169169765, 1564.6418555778461]),
    ((4, 2, 3, 5, 1.5, 2.5, 0.3), [29315.602008774749, 32206.256671959608, 29315.606746062075]),
    ((20, 2, 2, 37, 1.0, 2.0, 0.1), [46459320188230.288, 47221443648929.578, 46512522017614.135]),
];

fn tail_formulas() -> Outcome {
    const REL_TOL: f64 = 1e-12;
    let mut worst_rel: f64 = 0.0;
    for ((n, m, v, d, b, c, delta), expected) in REFERENCE {
        let p = params(n, m, v, d, b, c, delta);
        for (variant, want) in BoundVariant::ALL.into_iter().zip(expected) {
            let got = theorem_bound(&p, variant).unwrap().log_value;
            worst_rel = worst_rel.max((got - want).abs() / want.abs());
        }
    }
    let reference_ok = worst_rel <= REL_TOL;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut dominated = 0;
    for _ in 0..100 {
        let delta = rng.gen_range(0.01..0.99);
        let p = params(
            rng.gen_range(2..8),
            rng.gen_range(1..5),
            rng.gen_range(2..5),
            rng.gen_range(2..64),
            rng.gen_range(1.0..10.0),
            1.0 + delta + rng.gen_range(0.01..10.0),
            delta,
        );
        let th = theorem_bound(&p, BoundVariant::Theorem).unwrap().log_value;
        let ap = theorem_bound(&p, BoundVariant::Appendix).unwrap().log_value;
        dominated += (ap >= th) as usize;
    }

    let along_n: Vec<f64> = (2..=50)
        .map(|n| theorem_bound(&params(n, 2, 2, 37, 1.0, 2.0, 0.1), BoundVariant::Theorem).unwrap().log_value)
        .collect();
    let decay_n = along_n.windows(2).all(|w| w[1] < w[0]);
    let dims = [37, 100, 1_000, 10_000];
    let along_d: Vec<f64> = dims
        .iter()
        .map(|&d| theorem_bound(&params(3, 2, 2, d, 1.0, 2.0, 0.1), BoundVariant::Theorem).unwrap().log_value)
        .collect();
    let decay_d = along_d.windows(2).all(|w| w[1] < w[0]);

    outcome(
        reference_ok && dominated == 100 && decay_n && decay_d,
        format!(
            "reference points max rel. error {worst_rel:.1e}; appendix ≥ theorem at {dominated}/100 points; \
             decay in N (d=37, N=2..50): {decay_n} (log bound {:.3e} at N=2, {:.3e} at N=50); \
             decay in d (N=3, d=37..1e4): {decay_d} (log bound {:.3e} at d=37, {:.3e} at d=1e4)",
            along_n[0],
            along_n[along_n.len() - 1],
            along_d[0],
            along_d[along_d.len() - 1]
        ),
    )
}

fn epsilon_nets() -> Outcome {
    const PROBES: usize = 10_000;
    const OVERSAMPLE: usize = 24;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=6 {
        for eps in [0.5f64, 0.25] {
            let mut rng = sample_rng(8, n * 10 + (eps == 0.25) as usize);
            let cells = (2 * (1.0 / eps).ceil() as usize).pow(n as u32);
            let net = HypercubeNet::build(n, eps, OVERSAMPLE * cells, || {
                Some((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            })
            .unwrap();
            let mut covered = 0;
            for _ in 0..PROBES {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                if matches!(net.witness(&x), Some((_, dist)) if dist <= eps) {
                    covered += 1;
                }
            }
            let bound = net_size_bound(n, eps).exp();
            ok &= covered == PROBES && (net.len() as f64) <= bound;
            if covered != PROBES || n == 6 {
                parts.push(format!("n={n} ε={eps}: |net| {} ≤ {bound:.0}, {covered}/{PROBES} covered", net.len()));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn tail_sanity() -> Outcome {
    const SAMPLES: usize = 1000;
    let config = ExperimentConfig::new(Scenario::new(2, 2, 2).unwrap(), 2, 1.5, SAMPLES, 9);
    let estimate = tail_experiment(&config).unwrap();
    let high = estimate.at_threshold(1.5);
    let low = estimate.at_threshold(1.05);
    let jsonl = low.to_jsonl().unwrap();
    let flagged = low.estimator == ESTIMATOR_LABEL && jsonl.contains(ESTIMATOR_LABEL);
    let (lo, hi) = low.interval;
    let ok = high.completed == SAMPLES
        && high.exceedances == 0
        && high.fraction == 0.0
        && low.completed == SAMPLES
        && lo <= low.fraction
        && low.fraction <= hi
        && flagged;
    outcome(
        ok,
        format!(
            "functionals {:?}; c=1.5: p̂ = {} (CI upper {:.4}); c=1.05: p̂ = {} CI [{lo:.4}, {hi:.4}], estimator \"{}\"",
            config.functionals, high.fraction, high.interval.1, low.fraction, low.estimator
        ),
    )
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bellconc")
}

fn cli_run(dir: &Path, workers: &str, args: &[&str]) -> bool {
    Command::new(bin())
        .args(["--out", dir.to_str().unwrap(), "--seed", "11", "--workers", workers])
        .args(args)
        .env_remove("BELLCONC_OUT")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-repro");
    let _ = std::fs::remove_dir_all(&root);
    let config = root.join("tail.cfg");
    std::fs::create_dir_all(&root).unwrap();
    std::fs::write(&config, "N = 2\nm = 2\nv = 2\nd = 2\nfunctionals = chsh, pent1\nc = 1.2\nsamples = 40\nrestarts = 4\n").unwrap();
    let config = config.to_str().unwrap().to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["classical-bound", "--catalog", "i3322"],
        vec!["positivize", "--catalog", "chsh"],
        vec!["tail", "--config", &config],
        vec!["bound", "-d", "37", "--sweep-parties", "2:30", "--variant", "all"],
        vec!["concentration", "--parties", "2:5", "--samples", "2000"],
        vec!["net-demo", "-n", "3", "--epsilon", "0.25", "--budget", "20000"],
        vec!["verify"],
    ];
    let runs = [("a", "1"), ("b", "1"), ("c", "2")];
    let mut ok = true;
    for (label, workers) in runs {
        let dir = root.join(label);
        for args in &commands {
            ok &= cli_run(&dir, workers, args);
        }
    }
    let a = data_files(&root.join("a"));
    let same_b = a == data_files(&root.join("b"));
    let same_c = a == data_files(&root.join("c"));
    outcome(
        ok && same_b && same_c && a.len() >= 9,
        format!(
            "{} data files from {} commands; rerun identical: {same_b}; identical with 2 workers: {same_c}",
            a.len(),
            commands.len()
        ),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "catalog classical bounds", Some(secs(5)), catalog_bounds),
        run(2, "CHSH optimum by see-saw", Some(secs(10)), chsh_optimum),
        run(3, "operator norm ceiling", Some(secs(60)), loubenets),
        run(4, "mean over Haar states", None, mean_bound),
        run(5, "Lévy concentration", Some(secs(300)), levy_concentration),
        run(6, "Lipschitz suite", None, lipschitz_suite),
        run(7, "tail-bound formulas", Some(secs(1)), tail_formulas),
        run(8, "ε-net covering", Some(secs(30)), epsilon_nets),
        run(9, "empirical tail sanity", None, tail_sanity),
        run(10, "reproducibility", None, reproducibility),
    ];
    let failed = results.iter().filter(|&&r| !r).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

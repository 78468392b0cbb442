//! Empirical counterparts of the tail bounds: see-saw lower bounds on the
//! optimal violation of sampled states, tail-probability estimates and
//! concentration diagnostics.

mod seesaw;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

pub use seesaw::{
    optimize_jointly, optimize_state, random_start, seesaw_measurements, JointOptimum,
    SeesawOptions, SeesawResult,
};

use crate::bounds::{levy_tail, lipschitz_state};
use crate::catalog;
use crate::error::{Error, Result};
use crate::lhv::{best_functional, normalize, BellFunctional};
use crate::quantum::{
    behaviour_of, inner, sample_haar_state, Assemblage, BellOperator, PureState, DENSE_DIM_LIMIT,
};
use crate::scenario::Scenario;

/// Label carried by every tail estimate: the per-state value is a lower
/// bound on the optimal violation, so the fraction is biased downward.
pub const ESTIMATOR_LABEL: &str = "lower-bound estimator";

/// Best `|Q|` found for one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationBound {
    pub value: f64,
    /// Index into the functional list, or `None` for the LP refinement.
    pub functional: Option<usize>,
    /// +1 when `Q` itself was maximized, −1 for `−Q`.
    pub sign: f64,
    pub sweeps: usize,
    /// Best value of each restart (over functionals and signs).
    pub restart_values: Vec<f64>,
}

/// `max |Q(ψ, T, A)|` over the supplied functionals and `restarts` random
/// starting assemblages per functional and sign.
///
/// Restart `r` of functional `f` with sign `s` draws from its own stream of
/// a generator seeded once from `rng`, so raising `restarts` only adds runs.
pub fn violation_lower_bound<R: Rng + ?Sized>(
    state: &PureState,
    functionals: &[BellFunctional],
    restarts: usize,
    rng: &mut R,
    options: &SeesawOptions,
) -> Result<ViolationBound> {
    if functionals.is_empty() {
        return Err(Error::Precondition("empty functional list".into()));
    }
    if restarts == 0 {
        return Err(Error::Precondition("need at least one restart".into()));
    }
    let seed: u64 = rng.gen();
    let mut best = ViolationBound {
        value: f64::NEG_INFINITY,
        functional: None,
        sign: 1.0,
        sweeps: 0,
        restart_values: vec![f64::NEG_INFINITY; restarts],
    };
    for (fi, t) in functionals.iter().enumerate() {
        let negated = t.negated();
        for (si, (sign, functional)) in [(1.0, t), (-1.0, &negated)].into_iter().enumerate() {
            for r in 0..restarts {
                let mut stream = ChaCha8Rng::seed_from_u64(seed);
                stream.set_stream(((fi as u64) << 33) | ((si as u64) << 32) | r as u64);
                let start = random_start(functional, state.local_dim(), options.projective_init, &mut stream)?;
                let run = seesaw_measurements(state, functional, &start, options)?;
                best.sweeps += run.sweeps;
                best.restart_values[r] = best.restart_values[r].max(run.value);
                if run.value > best.value {
                    best.value = run.value;
                    best.functional = Some(fi);
                    best.sign = sign;
                }
            }
        }
    }
    Ok(best)
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta
/// function, to full double precision.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact binomial interval `[lo, hi]` at confidence `1 − alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let (x, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        beta_quantile(x, n - x + 1.0, alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        beta_quantile(x + 1.0, n - x, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub local_dim: usize,
    /// Catalog entries, used in normalized form.
    pub functionals: Vec<String>,
    /// Also fit the best functional of `𝒯_b` to each sample's best
    /// behaviour by linear programming.
    pub lp: bool,
    /// Coefficient cap `b` of the LP refinement.
    pub cap: f64,
    pub threshold: f64,
    pub samples: usize,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub projective_init: bool,
    pub seed: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    /// Stop after this many seconds and flag the result partial.
    pub time_limit: Option<f64>,
}

impl ExperimentConfig {
    /// Defaults for the catalog functionals of `scenario`.
    pub fn new(scenario: Scenario, local_dim: usize, threshold: f64, samples: usize, seed: u64) -> Self {
        Self {
            scenario,
            local_dim,
            functionals: catalog::for_scenario(scenario)
                .into_iter()
                .map(|e| e.name.to_string())
                .collect(),
            lp: false,
            cap: 1.0,
            threshold,
            samples,
            restarts: 20,
            max_sweeps: 200,
            projective_init: false,
            seed,
            workers: None,
            time_limit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.restarts == 0 {
            return Err(Error::Config("samples and restarts must be ≥ 1".into()));
        }
        if self.functionals.is_empty() && !self.lp {
            return Err(Error::Config("no functionals selected".into()));
        }
        if self.lp && !(self.cap > 0.0) {
            return Err(Error::Config(format!("cap must be > 0, got {}", self.cap)));
        }
        if self.local_dim < 2 {
            return Err(Error::Config("local dimension must be ≥ 2".into()));
        }
        Ok(())
    }

    fn seesaw_options(&self) -> SeesawOptions {
        SeesawOptions {
            max_sweeps: self.max_sweeps,
            tol: 1e-9,
            projective_init: self.projective_init,
        }
    }

    /// The normalized functionals named in the config.
    pub fn resolve_functionals(&self) -> Result<Vec<(String, BellFunctional)>> {
        self.functionals
            .iter()
            .map(|name| {
                let entry = catalog::get(name)?;
                if entry.scenario() != self.scenario {
                    return Err(Error::ScenarioMismatch(format!(
                        "catalog entry {name} lives in {:?}, experiment in {:?}",
                        entry.scenario(),
                        self.scenario
                    )));
                }
                Ok((name.clone(), normalize(&entry.functional)?))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub best_q: f64,
    pub best_functional_name: String,
    pub sign: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Spread (max − min) of the per-restart best values.
    pub restart_spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub estimator: String,
    pub threshold: f64,
    pub exceedances: u64,
    pub completed: usize,
    pub fraction: f64,
    /// 95% Clopper–Pearson interval.
    pub interval: (f64, f64),
    pub partial: bool,
    pub wall_clock_secs: f64,
    pub config: ExperimentConfig,
    pub samples: Vec<SampleRecord>,
}

impl TailEstimate {
    /// Re-thresholds the same per-sample values at another `c`.
    pub fn at_threshold(&self, threshold: f64) -> Self {
        let mut out = self.clone();
        out.threshold = threshold;
        out.config.threshold = threshold;
        out.exceedances = self.samples.iter().filter(|s| s.best_q > threshold).count() as u64;
        out.fraction = out.exceedances as f64 / self.completed.max(1) as f64;
        out.interval = if self.completed > 0 {
            clopper_pearson(out.exceedances, self.completed as u64, 0.05)
        } else {
            (0.0, 1.0)
        };
        out
    }

    /// One JSON line per sample followed by a summary line. Wall-clock time
    /// and worker count are left out so that reruns are byte-identical.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        let summary = serde_json::json!({
            "summary": {
                "estimator": self.estimator,
                "threshold": self.threshold,
                "exceedances": self.exceedances,
                "completed": self.completed,
                "fraction": self.fraction,
                "interval": [self.interval.0, self.interval.1],
                "partial": self.partial,
                "config": ExperimentConfig { workers: None, ..self.config.clone() },
            }
        });
        out.push_str(&serde_json::to_string(&summary)?);
        out.push('\n');
        Ok(out)
    }
}

/// Generator of sample `index`: the master seed on stream `index`.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_sample(
    config: &ExperimentConfig,
    functionals: &[(String, BellFunctional)],
    index: usize,
) -> Result<SampleRecord> {
    let mut rng = sample_rng(config.seed, index);
    let state = sample_haar_state(config.local_dim, config.scenario.parties(), &mut rng)?;
    let options = config.seesaw_options();
    let list: Vec<BellFunctional> = functionals.iter().map(|(_, t)| t.clone()).collect();
    let (mut best_q, mut name, mut sign, mut iterations, mut spread) = (0.0, String::new(), 1.0, 0, 0.0);
    if !list.is_empty() {
        let bound = violation_lower_bound(&state, &list, config.restarts, &mut rng, &options)?;
        best_q = bound.value;
        name = functionals[bound.functional.expect("non-empty list")].0.clone();
        sign = bound.sign;
        iterations = bound.sweeps;
        let lo = bound.restart_values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = bound.restart_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread = hi - lo;
    }
    if config.lp {
        // a fresh random assemblage, improved against the LP optimum of its
        // own behaviour
        let mut assemblage = Assemblage::random(config.scenario, config.local_dim, &mut rng)?;
        for _ in 0..config.restarts.min(5) {
            let fit = best_functional(&behaviour_of(&state, &assemblage)?, config.cap)?;
            let run = seesaw_measurements(&state, &fit.functional, &assemblage, &options)?;
            iterations += run.sweeps;
            assemblage = run.assemblage;
            if run.value > best_q {
                best_q = run.value;
                name = "lp".into();
                sign = 1.0;
            }
        }
    }
    Ok(SampleRecord {
        index,
        best_q,
        best_functional_name: name,
        sign,
        iterations,
        seed: config.seed,
        restart_spread: spread,
    })
}

/// Estimates `P(V_opt > c)` from below over `config.samples` Haar states.
pub fn tail_experiment(config: &ExperimentConfig) -> Result<TailEstimate> {
    config.validate()?;
    let functionals = config.resolve_functionals()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let chunk = 64;
    let mut samples = Vec::with_capacity(config.samples);
    let mut partial = false;
    for start in (0..config.samples).step_by(chunk) {
        if let Some(limit) = config.time_limit {
            if started.elapsed().as_secs_f64() > limit {
                partial = true;
                break;
            }
        }
        let end = (start + chunk).min(config.samples);
        let batch: Vec<Result<SampleRecord>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| run_sample(config, &functionals, i))
                .collect()
        });
        for r in batch {
            samples.push(r?);
        }
    }
    let completed = samples.len();
    let estimate = TailEstimate {
        estimator: ESTIMATOR_LABEL.into(),
        threshold: config.threshold,
        exceedances: 0,
        completed,
        fraction: 0.0,
        interval: (0.0, 1.0),
        partial,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        config: config.clone(),
        samples,
    };
    Ok(estimate.at_threshold(config.threshold))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub epsilon: f64,
    pub empirical: f64,
    pub standard_error: f64,
    /// `exp(levy_tail(2d^N − 1, Λ, ε))`, capped at 1.
    pub levy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    pub local_dim: usize,
    pub parties: usize,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub standard_error: f64,
    /// `Tr(𝔅)/d^N`, the exact mean over Haar states.
    pub normalized_trace: f64,
    pub tail: Vec<TailPoint>,
}

impl ConcentrationRecord {
    /// `|mean − Tr(𝔅)/d^N| ≤ 3·SE`.
    pub fn mean_consistent(&self) -> bool {
        (self.mean - self.normalized_trace).abs() <= 3.0 * self.standard_error
    }

    /// Empirical exceedance ≤ Lévy bound + 3 binomial standard errors at
    /// every grid point.
    pub fn below_levy(&self) -> bool {
        self.tail
            .iter()
            .all(|p| p.empirical <= p.levy + 3.0 * p.standard_error)
    }
}

/// The grid `ε ∈ {0.1, 0.2, …, 1.0}`.
pub fn default_epsilon_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Samples `Q(ψ, T, A)` over `samples` Haar states and compares its upper
/// deviations from the exact mean with Lévy's bound.
///
/// For `d^N ≤ DENSE_DIM_LIMIT` the Bell operator is assembled once and each
/// sample costs one matrix–vector product.
pub fn concentration_experiment<R: Rng + ?Sized>(
    functional: &BellFunctional,
    assemblage: &Assemblage,
    samples: usize,
    epsilons: &[f64],
    rng: &mut R,
) -> Result<ConcentrationRecord> {
    if samples < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let op = BellOperator::new(functional, assemblage)?;
    let (d, n) = (assemblage.local_dim(), assemblage.scenario().parties());
    let dense = if op.dim() <= DENSE_DIM_LIMIT {
        Some(op.to_dense()?)
    } else {
        None
    };
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let psi = sample_haar_state(d, n, rng)?;
        let q = match &dense {
            Some(b) => {
                let x = nalgebra::DVector::from_column_slice(psi.amplitudes());
                let bx = b * &x;
                inner(psi.amplitudes(), bx.as_slice()).re
            }
            None => op.expectation(&psi)?,
        };
        values.push(q);
    }
    let k = samples as f64;
    let mean = values.iter().sum::<f64>() / k;
    let variance = values.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let trace = op.normalized_trace();
    let lipschitz = lipschitz_state(n as u32, assemblage.scenario().settings() as u32);
    let sphere = 2.0 * (d as f64).powi(n as i32) - 1.0;
    let tail = epsilons
        .iter()
        .map(|&eps| {
            let p = values.iter().filter(|&&q| q - trace > eps).count() as f64 / k;
            TailPoint {
                epsilon: eps,
                empirical: p,
                standard_error: (p * (1.0 - p) / k).sqrt(),
                levy: levy_tail(sphere, lipschitz, eps).exp().min(1.0),
            }
        })
        .collect();
    Ok(ConcentrationRecord {
        local_dim: d,
        parties: n,
        samples,
        mean,
        variance,
        standard_error: (variance / k).sqrt(),
        normalized_trace: trace,
        tail,
    })
}

/// A random functional with coefficients uniform in `[−1, 1]`, normalized.
pub fn random_normalized_functional<R: Rng + ?Sized>(scenario: Scenario, rng: &mut R) -> Result<BellFunctional> {
    let coeffs = (0..scenario.behaviour_len())
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    normalize(&BellFunctional::new(scenario, coeffs)?)
}

//! Correlation scenarios, behaviours and the canonical index layout.
//!
//! A behaviour in scenario `(N, m, v)` is stored as a dense vector of length
//! `(m·v)^N`. The flat index of `p(a⃗|x⃗)` is
//!
//! ```text
//! idx = outcome_index(a⃗) · m^N + setting_index(x⃗)
//! outcome_index(a⃗) = Σᵢ aᵢ · v^(N−1−i)
//! setting_index(x⃗) = Σᵢ xᵢ · m^(N−1−i)
//! ```
//!
//! i.e. row-major with outcomes major and settings minor. Every module and
//! every file format in the crate uses this layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lhv::BellFunctional;

/// Default tolerance for probability constraints.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The triple `(N, m, v)`: parties, settings per party, outcomes per setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "N")]
    parties: usize,
    #[serde(rename = "m")]
    settings: usize,
    #[serde(rename = "v")]
    outcomes: usize,
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}

impl Scenario {
    pub fn new(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        if parties < 1 {
            return Err(Error::InvalidScenario("need at least one party".into()));
        }
        if settings < 1 {
            return Err(Error::InvalidScenario("need at least one setting".into()));
        }
        if outcomes < 2 {
            return Err(Error::InvalidScenario("need at least two outcomes".into()));
        }
        if checked_pow(settings * outcomes, parties).is_none() {
            return Err(Error::InvalidScenario(format!(
                "behaviour length ({}·{})^{} overflows",
                settings, outcomes, parties
            )));
        }
        Ok(Self {
            parties,
            settings,
            outcomes,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn settings(&self) -> usize {
        self.settings
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    /// `(m·v)^N`.
    pub fn behaviour_len(&self) -> usize {
        self.setting_tuples() * self.outcome_tuples()
    }

    /// `m^N`, the number of setting blocks.
    pub fn setting_tuples(&self) -> usize {
        self.settings.pow(self.parties as u32)
    }

    /// `v^N`, the number of joint outcomes per setting block.
    pub fn outcome_tuples(&self) -> usize {
        self.outcomes.pow(self.parties as u32)
    }

    fn check_tuple(&self, tuple: &[usize], limit: usize, what: &'static str) -> Result<()> {
        if tuple.len() != self.parties {
            return Err(Error::LengthMismatch {
                expected: self.parties,
                actual: tuple.len(),
            });
        }
        for (party, &value) in tuple.iter().enumerate() {
            if value >= limit {
                return Err(Error::IndexOutOfRange {
                    party,
                    what,
                    value,
                    limit,
                });
            }
        }
        Ok(())
    }

    /// Canonical flat index of `p(a⃗|x⃗)`.
    pub fn flat_index(&self, outcomes: &[usize], settings: &[usize]) -> Result<usize> {
        self.check_tuple(outcomes, self.outcomes, "outcome")?;
        self.check_tuple(settings, self.settings, "setting")?;
        Ok(self.outcome_index(outcomes) * self.setting_tuples() + self.setting_index(settings))
    }

    /// Inverse of [`Scenario::flat_index`].
    pub fn unflatten(&self, idx: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if idx >= self.behaviour_len() {
            return Err(Error::IndexOutOfRange {
                party: 0,
                what: "flat",
                value: idx,
                limit: self.behaviour_len(),
            });
        }
        let blocks = self.setting_tuples();
        Ok((
            self.outcome_tuple(idx / blocks),
            self.setting_tuple(idx % blocks),
        ))
    }

    /// Mixed-radix index of an outcome tuple (unchecked).
    pub fn outcome_index(&self, outcomes: &[usize]) -> usize {
        outcomes.iter().fold(0, |acc, &a| acc * self.outcomes + a)
    }

    /// Mixed-radix index of a setting tuple (unchecked).
    pub fn setting_index(&self, settings: &[usize]) -> usize {
        settings.iter().fold(0, |acc, &x| acc * self.settings + x)
    }

    pub fn outcome_tuple(&self, index: usize) -> Vec<usize> {
        digits(index, self.outcomes, self.parties)
    }

    pub fn setting_tuple(&self, index: usize) -> Vec<usize> {
        digits(index, self.settings, self.parties)
    }

    /// Flat index from pre-computed outcome and setting indices.
    #[inline]
    pub fn join(&self, outcome_index: usize, setting_index: usize) -> usize {
        outcome_index * self.setting_tuples() + setting_index
    }
}

/// Big-endian base-`radix` digits of `index`, `len` of them.
pub(crate) fn digits(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

/// A dense conditional probability vector `p(a⃗|x⃗)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Behaviour {
    scenario: Scenario,
    probs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// An entry outside `[−tol, 1+tol]`.
    Range { index: usize, value: f64 },
    /// A setting block whose outcomes do not sum to one.
    Normalization { setting_index: usize, sum: f64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn normalization_failures(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::Normalization { .. }))
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonSignallingReport {
    pub holds: bool,
    /// Largest absolute difference between marginals that should agree.
    pub worst: f64,
}

impl Behaviour {
    pub fn new(scenario: Scenario, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != scenario.behaviour_len() {
            return Err(Error::LengthMismatch {
                expected: scenario.behaviour_len(),
                actual: probs.len(),
            });
        }
        Ok(Self { scenario, probs })
    }

    /// `p ≡ 1/v^N`.
    pub fn uniform(scenario: Scenario) -> Self {
        let p = 1.0 / scenario.outcome_tuples() as f64;
        Self {
            scenario,
            probs: vec![p; scenario.behaviour_len()],
        }
    }

    /// Product behaviour `Πᵢ qᵢ(aᵢ|xᵢ)`; `local[i][x][a]` is party i's table.
    pub fn product(scenario: Scenario, local: &[Vec<Vec<f64>>]) -> Result<Self> {
        if local.len() != scenario.parties() {
            return Err(Error::LengthMismatch {
                expected: scenario.parties(),
                actual: local.len(),
            });
        }
        for table in local {
            if table.len() != scenario.settings()
                || table.iter().any(|row| row.len() != scenario.outcomes())
            {
                return Err(Error::DimensionMismatch(
                    "local table must be m × v".into(),
                ));
            }
        }
        let mut probs = vec![0.0; scenario.behaviour_len()];
        for oi in 0..scenario.outcome_tuples() {
            let a = scenario.outcome_tuple(oi);
            for si in 0..scenario.setting_tuples() {
                let x = scenario.setting_tuple(si);
                probs[scenario.join(oi, si)] = (0..scenario.parties())
                    .map(|k| local[k][x[k]][a[k]])
                    .product();
            }
        }
        Ok(Self { scenario, probs })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn get(&self, outcomes: &[usize], settings: &[usize]) -> Result<f64> {
        Ok(self.probs[self.scenario.flat_index(outcomes, settings)?])
    }

    /// Lists every entry outside `[−tol, 1+tol]` and every setting block whose
    /// sum differs from one by more than `tol`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let s = self.scenario;
        let mut violations = Vec::new();
        for (index, &value) in self.probs.iter().enumerate() {
            if !(value >= -tol && value <= 1.0 + tol) {
                violations.push(Violation::Range { index, value });
            }
        }
        for si in 0..s.setting_tuples() {
            let sum: f64 = (0..s.outcome_tuples())
                .map(|oi| self.probs[s.join(oi, si)])
                .sum();
            if !((sum - 1.0).abs() <= tol) {
                violations.push(Violation::Normalization {
                    setting_index: si,
                    sum,
                });
            }
        }
        ValidationReport { violations }
    }

    /// Compares, for every party `k`, the marginal of the other parties under
    /// each setting of `k` with the marginal under setting 0.
    pub fn check_nonsignalling(&self, tol: f64) -> NonSignallingReport {
        let s = self.scenario;
        let (n, m, v) = (s.parties(), s.settings(), s.outcomes());
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let out_stride = v.pow((n - 1 - k) as u32);
            let set_stride = m.pow((n - 1 - k) as u32);
            for oi in 0..s.outcome_tuples() {
                // enumerate only tuples with a_k = 0
                if (oi / out_stride) % v != 0 {
                    continue;
                }
                for si in 0..s.setting_tuples() {
                    if (si / set_stride) % m != 0 {
                        continue;
                    }
                    let marginal = |xk: usize| -> f64 {
                        (0..v)
                            .map(|ak| {
                                self.probs[s.join(oi + ak * out_stride, si + xk * set_stride)]
                            })
                            .sum()
                    };
                    let reference = marginal(0);
                    for xk in 1..m {
                        worst = worst.max((marginal(xk) - reference).abs());
                    }
                }
            }
        }
        NonSignallingReport {
            holds: worst <= tol,
            worst,
        }
    }
}

/// `Σ T_{a⃗|x⃗} p(a⃗|x⃗)`.
pub fn evaluate_functional(functional: &BellFunctional, behaviour: &Behaviour) -> Result<f64> {
    if functional.scenario() != behaviour.scenario() {
        return Err(Error::ScenarioMismatch(format!(
            "functional {:?} vs behaviour {:?}",
            functional.scenario(),
            behaviour.scenario()
        )));
    }
    Ok(functional
        .coeffs()
        .iter()
        .zip(behaviour.probs())
        .map(|(t, p)| t * p)
        .sum())
}

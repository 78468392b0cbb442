//! Local hidden variable models at finite size: deterministic strategies,
//! exact classical bounds by vertex enumeration, and the rewritings of a
//! functional that preserve which behaviours violate it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram};
use crate::scenario::{digits, evaluate_functional, Behaviour, Scenario};

/// Default cap on the number of deterministic strategies we enumerate.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// `v^{mN}`, the number of vertices of the local polytope.
pub fn strategy_count(scenario: Scenario) -> u128 {
    (scenario.outcomes() as u128)
        .checked_pow((scenario.settings() * scenario.parties()) as u32)
        .unwrap_or(u128::MAX)
}

fn check_cap(scenario: Scenario, cap: u64) -> Result<()> {
    let count = strategy_count(scenario);
    if count > cap as u128 {
        return Err(Error::EnumerationCap { count, cap });
    }
    Ok(())
}

/// One response table per party, mapping each setting to an outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    scenario: Scenario,
    /// `tables[k * m + x]` is party k's outcome on setting x.
    tables: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(scenario: Scenario, tables: Vec<Vec<usize>>) -> Result<Self> {
        if tables.len() != scenario.parties() {
            return Err(Error::LengthMismatch {
                expected: scenario.parties(),
                actual: tables.len(),
            });
        }
        let mut flat = Vec::with_capacity(scenario.parties() * scenario.settings());
        for (party, table) in tables.into_iter().enumerate() {
            if table.len() != scenario.settings() {
                return Err(Error::LengthMismatch {
                    expected: scenario.settings(),
                    actual: table.len(),
                });
            }
            if let Some(&value) = table.iter().find(|&&a| a >= scenario.outcomes()) {
                return Err(Error::IndexOutOfRange {
                    party,
                    what: "outcome",
                    value,
                    limit: scenario.outcomes(),
                });
            }
            flat.extend(table);
        }
        Ok(Self {
            scenario,
            tables: flat,
        })
    }

    /// Strategy number `index` in lexicographic order of the table entries.
    fn from_index(scenario: Scenario, index: u64) -> Self {
        let len = scenario.parties() * scenario.settings();
        Self {
            scenario,
            tables: digits(index as usize, scenario.outcomes(), len),
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn outcome(&self, party: usize, setting: usize) -> usize {
        self.tables[party * self.scenario.settings() + setting]
    }

    pub fn table(&self, party: usize) -> &[usize] {
        let m = self.scenario.settings();
        &self.tables[party * m..(party + 1) * m]
    }

    /// Outcome index chosen in each setting block, indexed by setting index.
    fn response(&self, out: &mut [usize]) {
        let s = self.scenario;
        let (n, m, v) = (s.parties(), s.settings(), s.outcomes());
        for (si, slot) in out.iter_mut().enumerate() {
            let mut rest = si;
            let mut oi = 0;
            let mut weight = 1;
            for k in (0..n).rev() {
                oi += self.tables[k * m + rest % m] * weight;
                rest /= m;
                weight *= v;
            }
            *slot = oi;
        }
    }

    /// The point-mass behaviour `p(a⃗|x⃗) = Πₖ [aₖ = tableₖ(xₖ)]`.
    pub fn behaviour(&self) -> Behaviour {
        let s = self.scenario;
        let mut probs = vec![0.0; s.behaviour_len()];
        let mut resp = vec![0; s.setting_tuples()];
        self.response(&mut resp);
        for (si, &oi) in resp.iter().enumerate() {
            probs[s.join(oi, si)] = 1.0;
        }
        Behaviour::new(s, probs).expect("length is correct by construction")
    }
}

/// Lazy iterator over all `v^{mN}` deterministic strategies.
pub struct Strategies {
    scenario: Scenario,
    next: u64,
    end: u64,
}

impl Iterator for Strategies {
    type Item = DeterministicStrategy;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let s = DeterministicStrategy::from_index(self.scenario, self.next);
        self.next += 1;
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Strategies {}

pub fn enumerate_strategies(scenario: Scenario) -> Result<Strategies> {
    enumerate_strategies_capped(scenario, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_strategies_capped(scenario: Scenario, cap: u64) -> Result<Strategies> {
    check_cap(scenario, cap)?;
    Ok(Strategies {
        scenario,
        next: 0,
        end: strategy_count(scenario) as u64,
    })
}

pub fn strategy_behaviour(strategy: &DeterministicStrategy) -> Behaviour {
    strategy.behaviour()
}

/// One step in the history of a functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// Coefficients divided by `scale`.
    Normalize { scale: f64 },
    /// Negative entries replaced through normalization of their setting
    /// block, then everything divided by `theta`.
    Positivize {
        theta: f64,
        /// Flat indices of the substituted (negative) entries.
        substituted: Vec<usize>,
    },
    /// Coefficients multiplied by −1.
    Negate,
}

/// A linear functional on behaviours, with optional cached classical bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    scenario: Scenario,
    coeffs: Vec<f64>,
    coeff_cap: Option<f64>,
    bounds: Option<(f64, f64)>,
    normalized: bool,
    provenance: Vec<Transform>,
}

impl BellFunctional {
    pub fn new(scenario: Scenario, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != scenario.behaviour_len() {
            return Err(Error::LengthMismatch {
                expected: scenario.behaviour_len(),
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            scenario,
            coeffs,
            coeff_cap: None,
            bounds: None,
            normalized: false,
            provenance: Vec::new(),
        })
    }

    pub fn zero(scenario: Scenario) -> Self {
        Self::new(scenario, vec![0.0; scenario.behaviour_len()]).unwrap()
    }

    /// Builds a functional from `(a⃗, x⃗, value)` triples; repeated entries add.
    pub fn from_entries<'a, I>(scenario: Scenario, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [usize], &'a [usize], f64)>,
    {
        let mut coeffs = vec![0.0; scenario.behaviour_len()];
        for (a, x, value) in entries {
            coeffs[scenario.flat_index(a, x)?] += value;
        }
        Self::new(scenario, coeffs)
    }

    /// Declares membership in 𝒯_b.
    pub fn with_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap >= 0.0) {
            return Err(Error::Precondition(format!("coefficient cap {cap} must be ≥ 0")));
        }
        let max = self.max_abs_coeff();
        if max > cap * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::Precondition(format!(
                "coefficient {max} exceeds cap {cap}"
            )));
        }
        self.coeff_cap = Some(cap);
        Ok(self)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, outcomes: &[usize], settings: &[usize]) -> Result<f64> {
        Ok(self.coeffs[self.scenario.flat_index(outcomes, settings)?])
    }

    pub fn coeff_cap(&self) -> Option<f64> {
        self.coeff_cap
    }

    /// Cached `(Δᵢ, Δᵤ)` if known.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn provenance(&self) -> &[Transform] {
        &self.provenance
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc: f64, c| acc.max(c.abs()))
    }

    /// The smallest cap `b` with this functional in 𝒯_b, or the declared one.
    pub fn effective_cap(&self) -> f64 {
        self.coeff_cap.unwrap_or_else(|| self.max_abs_coeff())
    }

    pub fn evaluate(&self, behaviour: &Behaviour) -> Result<f64> {
        evaluate_functional(self, behaviour)
    }

    /// `α·self + β·other`; cached metadata is dropped.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch(format!(
                "{:?} vs {:?}",
                self.scenario, other.scenario
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Self::new(self.scenario, coeffs)
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = -*c);
        out.bounds = self.bounds.map(|(lo, hi)| (-hi, -lo));
        out.provenance.push(Transform::Negate);
        out
    }

    /// Attaches bounds computed elsewhere (e.g. read from a file) without
    /// re-enumerating.
    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.bounds = Some((lower, upper));
        self.normalized = (lower.abs().max(upper.abs()) - 1.0).abs() <= 1e-12;
        self
    }

    pub(crate) fn with_provenance(mut self, provenance: Vec<Transform>) -> Self {
        self.provenance = provenance;
        self
    }
}

/// `(Δᵢ, Δᵤ)`: min and max of `T` over deterministic strategies.
pub fn classical_bounds(functional: &BellFunctional) -> Result<(f64, f64)> {
    classical_bounds_capped(functional, DEFAULT_ENUMERATION_CAP)
}

pub fn classical_bounds_capped(functional: &BellFunctional, cap: u64) -> Result<(f64, f64)> {
    let s = functional.scenario();
    check_cap(s, cap)?;
    let (n, m, v) = (s.parties(), s.settings(), s.outcomes());
    let blocks = s.setting_tuples();
    let total = strategy_count(s) as u64;
    let coeffs = functional.coeffs();

    // per setting tuple, the outcome index is Σₖ table[k][xₖ]·v^{N−1−k};
    // precompute which table slot and weight each (tuple, party) reads
    let mut slot = vec![0usize; blocks * n];
    let mut weight = vec![0usize; n];
    for k in 0..n {
        weight[k] = v.pow((n - 1 - k) as u32);
    }
    for si in 0..blocks {
        let x = s.setting_tuple(si);
        for k in 0..n {
            slot[si * n + k] = k * m + x[k];
        }
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut table = vec![0usize; n * m];
    for index in 0..total {
        if index > 0 {
            // odometer increment, last entry fastest
            for entry in table.iter_mut().rev() {
                *entry += 1;
                if *entry < v {
                    break;
                }
                *entry = 0;
            }
        }
        let mut value = 0.0;
        for si in 0..blocks {
            let row = &slot[si * n..(si + 1) * n];
            let oi: usize = row
                .iter()
                .zip(&weight)
                .map(|(&sl, &w)| table[sl] * w)
                .sum();
            value += coeffs[oi * blocks + si];
        }
        lo = lo.min(value);
        hi = hi.max(value);
    }
    Ok((lo, hi))
}

/// Returns `T / max{|Δᵢ|,|Δᵤ|}` with recomputed bounds.
pub fn normalize(functional: &BellFunctional) -> Result<BellFunctional> {
    let (lo, hi) = classical_bounds(functional)?;
    let scale = lo.abs().max(hi.abs());
    if !(scale > 1e-12) {
        return Err(Error::DegenerateFunctional(
            "functional vanishes on every local behaviour".into(),
        ));
    }
    let coeffs = functional.coeffs().iter().map(|c| c / scale).collect();
    let mut out = BellFunctional::new(functional.scenario(), coeffs)?;
    let (lo, hi) = classical_bounds(&out)?;
    out.bounds = Some((lo, hi));
    out.normalized = true;
    out.coeff_cap = functional.coeff_cap().map(|b| b / scale);
    let mut provenance = functional.provenance().to_vec();
    provenance.push(Transform::Normalize { scale });
    out.provenance = provenance;
    Ok(out)
}

/// Rewrites the inequality `T(p) ≤ Δᵤ` as an equivalent `T̃(p) ≤ 1` with all
/// coefficients of `T̃` in `[0, 1]`.
///
/// Every negative entry `(a⃗′|x⃗′)` is eliminated with
/// `P(a⃗′|x⃗′) = 1 − Σ_{a⃗ ≠ a⃗′} P(a⃗|x⃗′)`, where the sum runs over every joint
/// outcome different from `a⃗′`. The constants collect into
/// `Θ = Δᵤ − Σ_{T<0} T`, which then divides the result. For admissible `p`,
/// `T(p) > Δᵤ` iff `T̃(p) > 1`.
pub fn positivize(functional: &BellFunctional) -> Result<BellFunctional> {
    let s = functional.scenario();
    let (_, upper) = classical_bounds(functional)?;
    let blocks = s.setting_tuples();
    let outs = s.outcome_tuples();
    let coeffs = functional.coeffs();

    let mut shifted = coeffs.to_vec();
    let mut substituted = Vec::new();
    let mut negative_sum = 0.0;
    for si in 0..blocks {
        let mut block_shift = 0.0;
        for oi in 0..outs {
            let idx = s.join(oi, si);
            if coeffs[idx] < 0.0 {
                substituted.push(idx);
                negative_sum += coeffs[idx];
                block_shift -= coeffs[idx];
            }
        }
        if block_shift == 0.0 {
            continue;
        }
        for oi in 0..outs {
            let idx = s.join(oi, si);
            // a negative entry gets the shift of every other negative entry
            // of the block; its own term cancels
            shifted[idx] = coeffs[idx] + block_shift;
        }
    }

    let theta = upper - negative_sum;
    if !(theta > 1e-12) {
        return Err(Error::DegenerateFunctional(format!(
            "Θ = {theta} ≤ 0: functional is constant on admissible behaviours"
        )));
    }
    let scaled: Vec<f64> = shifted.iter().map(|c| c / theta).collect();
    if let Some(bad) = scaled.iter().find(|&&c| !(0.0..=1.0 + 1e-9).contains(&c)) {
        return Err(Error::Consistency(format!(
            "positivized coefficient {bad} outside [0, 1]"
        )));
    }
    let mut out = BellFunctional::new(s, scaled)?;
    let (lo, hi) = classical_bounds(&out)?;
    out.bounds = Some((lo, hi));
    out.normalized = (lo.abs().max(hi.abs()) - 1.0).abs() <= 1e-12;
    out.coeff_cap = Some(1.0);
    let mut provenance = functional.provenance().to_vec();
    provenance.push(Transform::Positivize { theta, substituted });
    out.provenance = provenance;
    Ok(out)
}

/// Positivizes the lower inequality `T(p) ≥ Δᵢ`, i.e. `−T(p) ≤ −Δᵢ`.
pub fn positivize_lower(functional: &BellFunctional) -> Result<BellFunctional> {
    positivize(&functional.negated())
}

/// Result of [`best_functional`].
#[derive(Clone, Debug)]
pub struct BestFunctional {
    pub functional: BellFunctional,
    pub value: f64,
}

/// Maximizes `T(p)` over functionals with `|T(λ)| ≤ 1` on every deterministic
/// strategy `λ` and every coefficient in `[−b, b]`.
pub fn best_functional(behaviour: &Behaviour, cap: f64) -> Result<BestFunctional> {
    best_functional_capped(behaviour, cap, DEFAULT_ENUMERATION_CAP)
}

pub fn best_functional_capped(
    behaviour: &Behaviour,
    cap: f64,
    enumeration_cap: u64,
) -> Result<BestFunctional> {
    if !(cap >= 0.0) {
        return Err(Error::Precondition(format!("coefficient cap {cap} must be ≥ 0")));
    }
    let s = behaviour.scenario();
    let strategies = enumerate_strategies_capped(s, enumeration_cap)?;
    let len = s.behaviour_len();
    let vertices = strategies.len();

    // variables: u (len) then w (len), T = u − w, 0 ≤ u, w ≤ b
    let cols = 2 * len;
    let rows = 2 * vertices + cols;
    if rows.saturating_mul(cols + rows) > lp::MAX_TABLEAU_ENTRIES {
        return Err(Error::Precondition(format!(
            "linear program with {rows} constraints is too large for the dense solver"
        )));
    }
    let mut program = LinearProgram::new(cols);
    let mut objective = vec![0.0; cols];
    for (j, &p) in behaviour.probs().iter().enumerate() {
        objective[j] = p;
        objective[len + j] = -p;
    }
    program.set_objective(objective);

    let mut resp = vec![0; s.setting_tuples()];
    for strategy in strategies {
        strategy.response(&mut resp);
        let mut upper = vec![0.0; cols];
        for (si, &oi) in resp.iter().enumerate() {
            let j = s.join(oi, si);
            upper[j] = 1.0;
            upper[len + j] = -1.0;
        }
        let lower: Vec<f64> = upper.iter().map(|c| -c).collect();
        program.add_le(upper, 1.0);
        program.add_le(lower, 1.0);
    }
    for j in 0..cols {
        let mut row = vec![0.0; cols];
        row[j] = 1.0;
        program.add_le(row, cap);
    }

    let solution = program.maximize()?;
    let coeffs: Vec<f64> = (0..len).map(|j| solution.x[j] - solution.x[len + j]).collect();
    let mut functional = BellFunctional::new(s, coeffs)?;
    let (lo, hi) = classical_bounds(&functional)?;
    functional.bounds = Some((lo, hi));
    functional.coeff_cap = Some(cap);
    let value = functional.evaluate(behaviour)?;
    Ok(BestFunctional { functional, value })
}

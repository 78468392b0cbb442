use rand::Rng;

use super::povm::{random_povm, random_projective, CMatrix, Povm};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// One POVM per (party, setting), all on `ℂ^d` with `v` outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Assemblage {
    scenario: Scenario,
    local_dim: usize,
    /// `povms[k * m + x]`
    povms: Vec<Povm>,
}

impl Assemblage {
    /// `povms[k][x]` is party k's measurement for setting x.
    pub fn new(scenario: Scenario, povms: Vec<Vec<Povm>>) -> Result<Self> {
        if povms.len() != scenario.parties() {
            return Err(Error::LengthMismatch {
                expected: scenario.parties(),
                actual: povms.len(),
            });
        }
        let local_dim = povms
            .first()
            .and_then(|p| p.first())
            .map(|p| p.dim())
            .ok_or_else(|| Error::Precondition("empty assemblage".into()))?;
        let mut flat = Vec::with_capacity(scenario.parties() * scenario.settings());
        for (k, party) in povms.into_iter().enumerate() {
            if party.len() != scenario.settings() {
                return Err(Error::LengthMismatch {
                    expected: scenario.settings(),
                    actual: party.len(),
                });
            }
            for (x, povm) in party.into_iter().enumerate() {
                if povm.dim() != local_dim || povm.outcomes() != scenario.outcomes() {
                    return Err(Error::DimensionMismatch(format!(
                        "party {k} setting {x}: POVM on ℂ^{} with {} outcomes, expected ℂ^{local_dim} with {}",
                        povm.dim(),
                        povm.outcomes(),
                        scenario.outcomes()
                    )));
                }
                flat.push(povm);
            }
        }
        Ok(Self {
            scenario,
            local_dim,
            povms: flat,
        })
    }

    /// Every party uses the same list of measurements.
    pub fn symmetric(scenario: Scenario, per_setting: Vec<Povm>) -> Result<Self> {
        Self::new(scenario, vec![per_setting; scenario.parties()])
    }

    /// Independent [`random_povm`] for every (party, setting).
    pub fn random<R: Rng + ?Sized>(scenario: Scenario, local_dim: usize, rng: &mut R) -> Result<Self> {
        Self::sampled(scenario, local_dim, rng, random_povm)
    }

    /// Independent [`random_projective`] for every (party, setting).
    pub fn random_projective<R: Rng + ?Sized>(
        scenario: Scenario,
        local_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::sampled(scenario, local_dim, rng, random_projective)
    }

    fn sampled<R: Rng + ?Sized>(
        scenario: Scenario,
        local_dim: usize,
        rng: &mut R,
        sampler: fn(usize, usize, &mut R) -> Result<Povm>,
    ) -> Result<Self> {
        let povms = (0..scenario.parties())
            .map(|_| {
                (0..scenario.settings())
                    .map(|_| sampler(local_dim, scenario.outcomes(), rng))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(scenario, povms)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn povm(&self, party: usize, setting: usize) -> &Povm {
        &self.povms[party * self.scenario.settings() + setting]
    }

    pub(crate) fn povm_mut(&mut self, party: usize, setting: usize) -> &mut Povm {
        let m = self.scenario.settings();
        &mut self.povms[party * m + setting]
    }

    pub fn element(&self, party: usize, setting: usize, outcome: usize) -> &CMatrix {
        self.povm(party, setting).element(outcome)
    }

    /// All POVMs in `(party, setting)` order.
    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        self.povms.iter().try_for_each(|p| p.validate(tol))
    }
}

//! JSON formats for functionals, behaviours, assemblages and states.
//!
//! Functionals and behaviours list their nonzero entries as
//! `{"a": [..], "x": [..], "value": ..}`; complex numbers are `[re, im]`
//! pairs and matrices are row-major lists of rows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lhv::{BellFunctional, Transform};
use crate::quantum::{Assemblage, CMatrix, Povm, PureState};
use crate::scenario::{Behaviour, Scenario};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub a: Vec<usize>,
    pub x: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalFile {
    pub scenario: Scenario,
    pub entries: Vec<Entry>,
    #[serde(default)]
    pub provenance: Vec<Transform>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BehaviourFile {
    pub scenario: Scenario,
    pub entries: Vec<Entry>,
}

fn entries(scenario: Scenario, values: &[f64], keep_zero: bool) -> Vec<Entry> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| keep_zero || v != 0.0)
        .map(|(idx, &value)| {
            let (a, x) = scenario.unflatten(idx).expect("index in range");
            Entry { a, x, value }
        })
        .collect()
}

fn dense(scenario: Scenario, entries: &[Entry]) -> Result<Vec<f64>> {
    let mut values = vec![0.0; scenario.behaviour_len()];
    for e in entries {
        values[scenario.flat_index(&e.a, &e.x)?] += e.value;
    }
    Ok(values)
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| json_error(what, &e))
}

/// Reformats a serde_json error as `what, line L, column C: message`.
pub(crate) fn json_error(what: &str, e: &serde_json::Error) -> Error {
    let full = e.to_string();
    let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m);
    Error::Parse(format!("{what}, line {}, column {}: {message}", e.line(), e.column()))
}

pub fn functional_to_json(functional: &BellFunctional) -> Result<String> {
    let s = functional.scenario();
    let file = FunctionalFile {
        scenario: s,
        entries: entries(s, functional.coeffs(), false),
        provenance: functional.provenance().to_vec(),
        bounds: functional.bounds(),
        cap: functional.coeff_cap(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn functional_from_json(text: &str) -> Result<BellFunctional> {
    let file: FunctionalFile = parse(text, "functional")?;
    let coeffs = dense(file.scenario, &file.entries)?;
    let mut t = BellFunctional::new(file.scenario, coeffs)?.with_provenance(file.provenance);
    if let Some(cap) = file.cap {
        t = t.with_cap(cap)?;
    }
    if let Some((lo, hi)) = file.bounds {
        t = t.with_bounds(lo, hi);
    }
    Ok(t)
}

pub fn behaviour_to_json(behaviour: &Behaviour) -> Result<String> {
    let s = behaviour.scenario();
    let file = BehaviourFile {
        scenario: s,
        entries: entries(s, behaviour.probs(), true),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn behaviour_from_json(text: &str) -> Result<Behaviour> {
    let file: BehaviourFile = parse(text, "behaviour")?;
    Behaviour::new(file.scenario, dense(file.scenario, &file.entries)?)
}

type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn matrix_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<Pair>], d: usize) -> Result<CMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch(format!("expected a {d}×{d} matrix")));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblageFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub parties: usize,
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `povms[k·m + x][a]`, each a row-major matrix.
    pub povms: Vec<Vec<Vec<Vec<Pair>>>>,
}

pub fn assemblage_to_json(assemblage: &Assemblage, seed: Option<u64>) -> Result<String> {
    let s = assemblage.scenario();
    let file = AssemblageFile {
        d: assemblage.local_dim(),
        parties: s.parties(),
        scenario: s,
        seed,
        povms: assemblage
            .povms()
            .iter()
            .map(|p| p.elements().iter().map(matrix_rows).collect())
            .collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn assemblage_from_json(text: &str) -> Result<Assemblage> {
    let file: AssemblageFile = parse(text, "assemblage")?;
    let s = file.scenario;
    if file.povms.len() != s.parties() * s.settings() || file.parties != s.parties() {
        return Err(Error::LengthMismatch {
            expected: s.parties() * s.settings(),
            actual: file.povms.len(),
        });
    }
    let mut flat = file.povms.iter().map(|elements| {
        let mats = elements
            .iter()
            .map(|rows| matrix_from_rows(rows, file.d))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(mats)
    });
    let mut povms = Vec::with_capacity(s.parties());
    for _ in 0..s.parties() {
        let row = (0..s.settings())
            .map(|_| flat.next().expect("length checked"))
            .collect::<Result<Vec<_>>>()?;
        povms.push(row);
    }
    Assemblage::new(s, povms)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub parties: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub amplitudes: Vec<Pair>,
}

pub fn state_to_json(state: &PureState, seed: Option<u64>) -> Result<String> {
    Ok(serde_json::to_string(&StateFile {
        d: state.local_dim(),
        parties: state.parties(),
        seed,
        amplitudes: state.amplitudes().iter().map(|&z| pair(z)).collect(),
    })?)
}

pub fn state_from_json(text: &str) -> Result<PureState> {
    let file: StateFile = parse(text, "state")?;
    PureState::new(
        file.d,
        file.parties,
        file.amplitudes.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
    )
}

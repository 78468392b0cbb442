//! Built-in Bell functionals with their classical bounds.
//!
//! Marginal terms such as `P(1_|0_)` are expanded onto joint probabilities
//! with the unmeasured party's setting fixed to 0. On non-signalling
//! behaviours every choice of that setting gives the same value.

use crate::error::{Error, Result};
use crate::lhv::{classical_bounds, BellFunctional};
use crate::scenario::Scenario;

pub const NAMES: [&str; 5] = ["chsh", "pent1", "pent2", "pent3", "i3322"];

/// Remote setting used when expanding marginal terms.
pub const MARGINAL_SETTING: usize = 0;

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub functional: BellFunctional,
    /// Documented `(Δᵢ, Δᵤ)`.
    pub bounds: (f64, f64),
    pub description: &'static str,
}

impl CatalogEntry {
    pub fn scenario(&self) -> Scenario {
        self.functional.scenario()
    }
}

/// A bipartite term `P(a b | x y)`; `None` marks a marginalized party.
type Term = ([Option<usize>; 2], [usize; 2]);

fn joint(a: usize, b: usize, x: usize, y: usize) -> Term {
    ([Some(a), Some(b)], [x, y])
}

/// `P(a_|x_)`
fn first(a: usize, x: usize) -> Term {
    ([Some(a), None], [x, MARGINAL_SETTING])
}

/// `P(_b|_y)`
fn second(b: usize, y: usize) -> Term {
    ([None, Some(b)], [MARGINAL_SETTING, y])
}

fn from_terms(scenario: Scenario, terms: &[Term]) -> BellFunctional {
    let v = scenario.outcomes();
    let mut coeffs = vec![0.0; scenario.behaviour_len()];
    for (outcomes, settings) in terms {
        let choices = |o: Option<usize>| -> Vec<usize> {
            match o {
                Some(a) => vec![a],
                None => (0..v).collect(),
            }
        };
        for a in choices(outcomes[0]) {
            for b in choices(outcomes[1]) {
                let idx = scenario
                    .flat_index(&[a, b], settings)
                    .expect("catalog indices are in range");
                coeffs[idx] += 1.0;
            }
        }
    }
    BellFunctional::new(scenario, coeffs).expect("length matches scenario")
}

fn pentagon_core() -> Vec<Term> {
    vec![
        joint(0, 0, 0, 0),
        joint(1, 1, 0, 1),
        joint(1, 0, 1, 1),
        joint(0, 0, 1, 0),
    ]
}

fn chsh() -> CatalogEntry {
    let s = Scenario::new(2, 2, 2).unwrap();
    let mut coeffs = vec![0.0; s.behaviour_len()];
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    let idx = s.flat_index(&[a, b], &[x, y]).unwrap();
                    coeffs[idx] = if a ^ b == x & y { 1.0 } else { -1.0 };
                }
            }
        }
    }
    CatalogEntry {
        name: "chsh",
        functional: BellFunctional::new(s, coeffs).unwrap(),
        bounds: (-2.0, 2.0),
        description: "CHSH: Σ_{xy} (−1)^{xy} ⟨A_x B_y⟩ with ⟨A_x B_y⟩ = P(a=b|xy) − P(a≠b|xy)",
    }
}

fn pent(name: &'static str, scenario: Scenario, last: Term, lower: f64, description: &'static str) -> CatalogEntry {
    let mut terms = pentagon_core();
    terms.push(last);
    CatalogEntry {
        name,
        functional: from_terms(scenario, &terms),
        bounds: (lower, 2.0),
        description,
    }
}

fn i3322() -> CatalogEntry {
    let s = Scenario::new(2, 3, 2).unwrap();
    let terms = vec![
        joint(0, 0, 0, 1),
        joint(0, 0, 0, 2),
        joint(0, 0, 1, 0),
        joint(0, 0, 1, 2),
        joint(0, 0, 2, 0),
        joint(0, 0, 2, 1),
        joint(0, 1, 1, 1),
        joint(1, 0, 1, 1),
        joint(1, 1, 1, 1),
        joint(0, 1, 2, 2),
        joint(1, 0, 2, 2),
        joint(1, 1, 2, 2),
        first(1, 0),
        first(1, 1),
        second(1, 0),
        second(1, 1),
    ];
    CatalogEntry {
        name: "i3322",
        functional: from_terms(s, &terms),
        bounds: (3.0, 6.0),
        description: "symmetric I3322 in positive form, ≤ 6",
    }
}

/// Looks up a catalog entry by name.
pub fn get(name: &str) -> Result<CatalogEntry> {
    let s222 = Scenario::new(2, 2, 2).unwrap();
    let s232 = Scenario::new(2, 3, 2).unwrap();
    match name {
        "chsh" => Ok(chsh()),
        "pent1" => Ok(pent(
            "pent1",
            s222,
            joint(1, 1, 0, 0),
            0.0,
            "pentagonal I1: P(00|00)+P(11|01)+P(10|11)+P(00|10)+P(11|00) ≤ 2",
        )),
        "pent2" => Ok(pent(
            "pent2",
            s222,
            second(1, 0),
            1.0,
            "pentagonal I2: P(00|00)+P(11|01)+P(10|11)+P(00|10)+P(_1|_0) ≤ 2",
        )),
        "pent3" => Ok(pent(
            "pent3",
            s232,
            joint(1, 1, 2, 0),
            0.0,
            "pentagonal I3: P(00|00)+P(11|01)+P(10|11)+P(00|10)+P(11|20) ≤ 2",
        )),
        "i3322" => Ok(i3322()),
        other => Err(Error::UnknownCatalogEntry(other.to_string())),
    }
}

/// All entries, in [`NAMES`] order.
pub fn all() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| get(n).expect("known name")).collect()
}

/// Entries living in `scenario`.
pub fn for_scenario(scenario: Scenario) -> Vec<CatalogEntry> {
    all().into_iter().filter(|e| e.scenario() == scenario).collect()
}

#[derive(Clone, Debug)]
pub struct EntryCheck {
    pub name: String,
    pub documented: (f64, f64),
    pub enumerated: (f64, f64),
}

impl EntryCheck {
    pub fn passed(&self) -> bool {
        self.documented == self.enumerated
    }
}

#[derive(Clone, Debug)]
pub struct CatalogReport {
    pub checks: Vec<EntryCheck>,
}

impl CatalogReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EntryCheck::passed)
    }

    /// The first failing entry as an error.
    pub fn into_result(self) -> Result<Self> {
        if let Some(bad) = self.checks.iter().find(|c| !c.passed()) {
            return Err(Error::CatalogMismatch {
                name: bad.name.clone(),
                expected: bad.documented,
                actual: bad.enumerated,
            });
        }
        Ok(self)
    }
}

/// Re-enumerates the classical bounds of `entries` and compares them with
/// the documented values. Coefficients are small integers, so the sums are
/// exact in floating point and the comparison is exact.
pub fn verify_entries(entries: &[CatalogEntry]) -> Result<CatalogReport> {
    let checks = entries
        .iter()
        .map(|e| {
            Ok(EntryCheck {
                name: e.name.to_string(),
                documented: e.bounds,
                enumerated: classical_bounds(&e.functional)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CatalogReport { checks })
}

pub fn verify_catalog() -> Result<CatalogReport> {
    verify_entries(&all())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::{normalize, positivize};

    #[test]
    fn documented_bounds_hold() {
        let report = verify_catalog().unwrap();
        assert_eq!(report.checks.len(), 5);
        for check in &report.checks {
            assert!(check.passed(), "{check:?}");
        }
    }

    #[test]
    fn corrupted_entry_is_named() {
        let mut entries = all();
        let mut coeffs = entries[3].functional.coeffs().to_vec();
        coeffs[0] += 1.0;
        entries[3].functional = BellFunctional::new(entries[3].scenario(), coeffs).unwrap();
        let err = verify_entries(&entries).unwrap().into_result().unwrap_err();
        match err {
            Error::CatalogMismatch { name, .. } => assert_eq!(name, "pent3"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(get("cglmp"), Err(Error::UnknownCatalogEntry(_))));
    }

    #[test]
    fn scenarios() {
        assert_eq!(get("pent1").unwrap().scenario(), Scenario::new(2, 2, 2).unwrap());
        assert_eq!(get("pent2").unwrap().scenario(), Scenario::new(2, 2, 2).unwrap());
        assert_eq!(get("pent3").unwrap().scenario(), Scenario::new(2, 3, 2).unwrap());
        assert_eq!(get("i3322").unwrap().scenario(), Scenario::new(2, 3, 2).unwrap());
        assert_eq!(for_scenario(Scenario::new(2, 2, 2).unwrap()).len(), 3);
    }

    #[test]
    fn pent3_uses_setting_two_only_for_first_party() {
        let e = get("pent3").unwrap();
        let s = e.scenario();
        for (idx, &c) in e.functional.coeffs().iter().enumerate() {
            if c != 0.0 {
                let (_, x) = s.unflatten(idx).unwrap();
                assert!(x[1] < 2);
            }
        }
        assert_eq!(e.functional.coeff(&[1, 1], &[2, 0]).unwrap(), 1.0);
    }

    #[test]
    fn pent2_marginal_expanded_with_setting_zero() {
        let e = get("pent2").unwrap();
        assert_eq!(e.functional.coeff(&[0, 1], &[0, 0]).unwrap(), 1.0);
        assert_eq!(e.functional.coeff(&[1, 1], &[0, 0]).unwrap(), 1.0);
        assert_eq!(e.functional.coeff(&[1, 1], &[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn normalized_forms_positivize_into_unit_cap() {
        for e in all() {
            let n = normalize(&e.functional).unwrap();
            let (lo, hi) = n.bounds().unwrap();
            assert!((lo.abs().max(hi.abs()) - 1.0).abs() < 1e-12);
            let p = positivize(&n).unwrap();
            assert!(p.coeffs().iter().all(|&c| (0.0..=1.0 + 1e-12).contains(&c)), "{}", e.name);
            assert!((p.bounds().unwrap().1 - 1.0).abs() < 1e-12);
        }
    }
}

//! Finds the functional with coefficients in `[−b, b]` and classical bound 1
//! that is most violated by a given quantum behaviour.
//!
//! ```sh
//! cargo run --release --example best_functional_lp
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use bellconc::lhv::{best_functional, classical_bounds};
use bellconc::quantum::{behaviour_of, Assemblage, Povm, PureState};
use bellconc::Scenario;

fn main() -> bellconc::Result<()> {
    let s = Scenario::new(2, 2, 2)?;
    let a = Assemblage::new(
        s,
        vec![
            vec![Povm::qubit_observable(0.0), Povm::qubit_observable(FRAC_PI_2)],
            vec![Povm::qubit_observable(FRAC_PI_4), Povm::qubit_observable(-FRAC_PI_4)],
        ],
    )?;
    let p = behaviour_of(&PureState::ghz(2, 2)?, &a)?;
    for cap in [0.25, 0.5, 1.0, 2.0] {
        let best = best_functional(&p, cap)?;
        let (lo, hi) = classical_bounds(&best.functional)?;
        println!(
            "b = {cap:<4}  T(p) = {:.9}  classical range ({lo:.6}, {hi:.6})",
            best.value
        );
    }
    Ok(())
}

//! Classical bounds of the built-in Bell functionals by enumerating every
//! deterministic strategy, plus a hand-built functional.
//!
//! ```sh
//! cargo run --release --example classical_bounds
//! ```

use bellconc::catalog;
use bellconc::lhv::{classical_bounds, normalize, strategy_count};
use bellconc::{BellFunctional, Scenario};

fn main() -> bellconc::Result<()> {
    for entry in catalog::all() {
        let s = entry.scenario();
        let (lo, hi) = classical_bounds(&entry.functional)?;
        println!(
            "{:<6} (N,m,v) = ({},{},{})  {:>5} strategies  bounds ({lo}, {hi})  documented {:?}",
            entry.name,
            s.parties(),
            s.settings(),
            s.outcomes(),
            strategy_count(s),
            entry.bounds
        );
    }

    // P(a = b | x = y = 0) for two parties: perfectly achievable classically.
    let s = Scenario::new(2, 2, 2)?;
    let t = BellFunctional::from_entries(s, [(&[0, 0][..], &[0, 0][..], 1.0), (&[1, 1][..], &[0, 0][..], 1.0)])?;
    println!("P(a=b|00): bounds {:?}", classical_bounds(&t)?);

    let chsh = catalog::get("chsh")?.functional;
    let n = normalize(&chsh)?;
    println!(
        "normalized CHSH: max |coeff| = {}, bounds {:?}",
        n.max_abs_coeff(),
        n.bounds()
    );
    Ok(())
}

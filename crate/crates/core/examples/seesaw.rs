//! See-saw optimization: alternate between the best state for fixed
//! measurements and the best measurements for a fixed state.
//!
//! ```sh
//! cargo run --release --example seesaw
//! ```

use bellconc::catalog;
use bellconc::lhv::normalize;
use bellconc::montecarlo::{optimize_jointly, random_start, seesaw_measurements, SeesawOptions};
use bellconc::quantum::{sample_haar_state, BellOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bellconc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let options = SeesawOptions {
        projective_init: true,
        ..SeesawOptions::default()
    };

    for name in ["chsh", "i3322"] {
        let t = normalize(&catalog::get(name)?.functional)?;
        let start = random_start(&t, 2, true, &mut rng)?;
        let joint = optimize_jointly(&t, &start, &options, 100)?;
        let check = BellOperator::new(&t, &joint.assemblage)?.top_eigenpair(1e-12, 10_000)?.0;
        println!(
            "{name}: joint optimum {:.9} after {} rounds (top eigenvalue {:.9})",
            joint.value, joint.rounds, check
        );
    }

    // Measurements only, for a fixed Haar-random two-qubit state.
    let t = normalize(&catalog::get("chsh")?.functional)?;
    let psi = sample_haar_state(2, 2, &mut rng)?;
    let start = random_start(&t, 2, true, &mut rng)?;
    let run = seesaw_measurements(&psi, &t, &start, &options)?;
    println!(
        "fixed random state: Q {:.6} → {:.6} in {} sweeps (converged: {})",
        run.trace[0], run.value, run.sweeps, run.converged
    );
    Ok(())
}

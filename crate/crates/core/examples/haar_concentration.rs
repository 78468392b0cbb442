//! Concentration of Q(ψ, T, A) over Haar-random states as the number of
//! qubits grows, compared with Lévy's bound.
//!
//! ```sh
//! cargo run --release --example haar_concentration
//! ```

use bellconc::montecarlo::{concentration_experiment, default_epsilon_grid, random_normalized_functional, sample_rng};
use bellconc::quantum::Assemblage;
use bellconc::Scenario;

const SAMPLES: usize = 4000;
const SEED: u64 = 2024;

fn main() -> bellconc::Result<()> {
    let grid = default_epsilon_grid();
    println!("{:>2} {:>10} {:>10} {:>11} {:>12} {:>12}", "N", "mean", "Tr/d^N", "variance", "P(>0.2)", "Lévy(0.2)");
    for n in 2..=7 {
        let s = Scenario::new(n, 2, 2)?;
        let mut rng = sample_rng(SEED, n);
        let t = random_normalized_functional(s, &mut rng)?;
        let a = Assemblage::random(s, 2, &mut rng)?;
        let rec = concentration_experiment(&t, &a, SAMPLES, &grid, &mut rng)?;
        let p = &rec.tail[1];
        println!(
            "{n:>2} {:>10.6} {:>10.6} {:>11.3e} {:>12.4e} {:>12.4e}",
            rec.mean, rec.normalized_trace, rec.variance, p.empirical, p.levy
        );
        assert!(rec.mean_consistent() && rec.below_levy());
    }
    Ok(())
}

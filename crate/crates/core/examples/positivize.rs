//! Rewrites an inequality `T ≤ Δᵤ` as an equivalent one with coefficients
//! in `[0, 1]` and classical maximum 1, then checks that both forms order a
//! few behaviours identically.
//!
//! ```sh
//! cargo run --release --example positivize
//! ```

use bellconc::catalog;
use bellconc::lhv::{classical_bounds, positivize, positivize_lower, Transform};
use bellconc::{Behaviour, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bellconc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["chsh", "i3322"] {
        let t = catalog::get(name)?.functional;
        let (lo, hi) = classical_bounds(&t)?;
        let p = positivize(&t)?;
        let theta = match p.provenance().last() {
            Some(Transform::Positivize { theta, .. }) => *theta,
            _ => unreachable!(),
        };
        println!("{name}: bounds ({lo}, {hi}) → Θ = {theta}, new bounds {:?}", p.bounds());
        let coeffs = p.coeffs();
        let (min, max) = coeffs
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &c| (a.min(c), b.max(c)));
        println!("  coefficients in [{min}, {max}]");

        // T(p) ≤ Δᵤ  ⇔  T⁺(p) ≤ 1 on random product behaviours.
        let s: Scenario = t.scenario();
        for _ in 0..3 {
            let local: Vec<Vec<Vec<f64>>> = (0..s.parties())
                .map(|_| {
                    (0..s.settings())
                        .map(|_| {
                            let w: Vec<f64> = (0..s.outcomes()).map(|_| rng.gen::<f64>()).collect();
                            let z: f64 = w.iter().sum();
                            w.into_iter().map(|x| x / z).collect()
                        })
                        .collect()
                })
                .collect();
            let b = Behaviour::product(s, &local)?;
            let (tv, pv) = (t.evaluate(&b)?, p.evaluate(&b)?);
            println!("  T = {tv:+.6}  T⁺ = {pv:.6}  (T − Δᵤ)/Θ + 1 = {:.6}", (tv - hi) / theta + 1.0);
        }
        let q = positivize_lower(&t)?;
        println!("  lower side: bounds {:?}", q.bounds());
    }
    Ok(())
}

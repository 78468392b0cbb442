//! Builds ε-nets of the cube [−1, 1]^n from random samples, one point per
//! occupied grid cell, and checks the covering property on fresh probes.
//!
//! ```sh
//! cargo run --release --example epsilon_net
//! ```

use bellconc::nets::{net_size_bound, HypercubeNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bellconc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=4 {
        for eps in [0.5f64, 0.25] {
            let cells = (2.0 * (1.0 / eps).ceil()).powi(n as i32) as usize;
            let net = HypercubeNet::build(n, eps, 30 * cells, || {
                Some((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            })?;
            let mut worst: f64 = 0.0;
            let mut missed = 0;
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                match net.witness(&x) {
                    Some((_, dist)) => worst = worst.max(dist),
                    None => missed += 1,
                }
            }
            println!(
                "n = {n}  ε = {eps:<4}  |net| = {:>4}  ≤ {:>6.0}   max probe distance {worst:.4}  uncovered {missed}",
                net.len(),
                net_size_bound(n, eps).exp()
            );
        }
    }
    Ok(())
}

//! Evaluates the log-domain tail bound on P(V_opt > c) in its three variants,
//! and follows it along N and d.
//!
//! ```sh
//! cargo run --release --example tail_bounds
//! ```

use bellconc::bounds::{lipschitz_param, regime_check, theorem_bound, BoundVariant, TailBoundParams};

fn main() -> bellconc::Result<()> {
    let base = TailBoundParams {
        parties: 3,
        settings: 2,
        outcomes: 2,
        local_dim: 37,
        b: 1.0,
        c: 2.0,
        delta: 0.1,
    };
    println!("d = 37 in the decay regime: {}", regime_check(37, 2, 2));
    let lambda = lipschitz_param(3, 2, 2, 37, 1.0);
    println!("parameter Lipschitz constant Λ = {:.6e}, net exponent n = {:?}", lambda.lambda, lambda.n);
    for v in BoundVariant::ALL {
        let r = theorem_bound(&base, v)?;
        println!("{:<9} log P ≤ {:.6e}  terms {:?}", v.name(), r.log_value, r.terms);
    }

    println!("\nalong N at d = 37 (theorem variant)");
    for n in [5, 20, 50, 200, 300, 400, 500] {
        let r = theorem_bound(&TailBoundParams { parties: n, ..base }, BoundVariant::Theorem)?;
        println!("  N = {n:<4} {:>14.6e}", r.log_value);
    }
    println!("\nalong d at N = 3 (theorem variant)");
    for d in [37, 1_000, 10_000, 1_000_000, 10_000_000, 100_000_000] {
        let r = theorem_bound(&TailBoundParams { local_dim: d, ..base }, BoundVariant::Theorem)?;
        println!("  d = {d:<10} {:>14.6e}", r.log_value);
    }

    match theorem_bound(&TailBoundParams { c: 1.05, ..base }, BoundVariant::Theorem) {
        Err(e) => println!("\nc = 1.05: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

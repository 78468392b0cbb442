//! CHSH on a maximally entangled qubit pair: the textbook measurements give
//! the normalized quantum value √2, and the largest eigenvalue of the Bell
//! operator confirms it.
//!
//! ```sh
//! cargo run --release --example chsh_tsirelson
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use bellconc::catalog;
use bellconc::lhv::normalize;
use bellconc::quantum::{behaviour_of, evaluate_q, Assemblage, BellOperator, Povm, PureState};

fn main() -> bellconc::Result<()> {
    let chsh = normalize(&catalog::get("chsh")?.functional)?;
    let s = chsh.scenario();
    let phi_plus = PureState::ghz(2, 2)?;

    // Observables in the x–z plane: Alice 0, π/2; Bob ±π/4.
    let alice = vec![Povm::qubit_observable(0.0), Povm::qubit_observable(FRAC_PI_2)];
    let bob = vec![Povm::qubit_observable(FRAC_PI_4), Povm::qubit_observable(-FRAC_PI_4)];
    let a = Assemblage::new(s, vec![alice, bob])?;

    let q = evaluate_q(&phi_plus, &chsh, &a)?;
    let behaviour = behaviour_of(&phi_plus, &a)?;
    println!("Q(Φ⁺) = {q:.12}  (√2 = {SQRT_2:.12})");
    println!("non-signalling deviation {:e}", behaviour.check_nonsignalling(1e-12).worst);

    let op = BellOperator::new(&chsh, &a)?;
    let (lambda, _) = op.top_eigenpair(1e-12, 10_000)?;
    println!("largest eigenvalue of 𝔅 = {lambda:.12}");
    println!("operator norm        = {:.12}", op.norm(1e-12, 10_000)?);
    println!("Tr(𝔅)/4              = {:.3e}", op.normalized_trace());
    Ok(())
}

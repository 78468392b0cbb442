//! Bell nonlocality numerics at desk scale.
//!
//! * [`scenario`]: index layout, behaviours, non-signalling checks.
//! * [`lhv`]: deterministic strategies, exact classical bounds, normalization
//!   and positive rewriting of functionals, optimal functional by LP.
//! * [`catalog`]: CHSH, the three pentagonal inequalities and `I₃₃₂₂`.
//! * [`quantum`]: Haar states, POVMs, Bell operators and Born behaviours.
//! * [`nets`]: ε-nets of the hypercube and parameter distances.
//! * [`bounds`]: Lipschitz constants and log-domain tail bounds.
//! * [`montecarlo`]: see-saw optimization and tail/concentration experiments.
//! * [`cli`]: the `bellconc` command line front end.

// `!(x > y)` also rejects NaN, which `x <= y` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod io;
pub mod lhv;
mod lp;
pub mod montecarlo;
pub mod nets;
pub mod quantum;
pub mod scenario;

pub use error::{Error, Result};
pub use lhv::BellFunctional;
pub use scenario::{Behaviour, Scenario};

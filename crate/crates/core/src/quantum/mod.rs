//! States, measurements and Bell operators on `(ℂ^d)^{⊗N}`.

mod assemblage;
mod operator;
mod povm;
mod state;

pub use assemblage::Assemblage;
pub use operator::{
    behaviour_of, bell_operator_apply, evaluate_q, operator_norm, BellOperator, DEFAULT_EIGEN_TOL,
    DEFAULT_MAX_ITERS, DENSE_DIM_LIMIT,
};
pub use povm::{random_povm, random_projective, CMatrix, Povm, POVM_TOL};
pub use state::{sample_haar_state, PureState, MAX_STATE_DIM};

pub(crate) use operator::{apply_local, LocalOps};
pub(crate) use povm::{hermitian_eigen, hermitian_fn, hermitian_part, spectral_projector};
pub(crate) use state::inner;

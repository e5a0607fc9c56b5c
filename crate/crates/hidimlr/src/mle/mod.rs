//! Cross-entropy loss, its derivatives, the three parametrizations of the
//! multinomial logistic model, and the Newton solver.
//!
//! The solver works in the K-dimensional orthogonal parametrization, where
//! the Hessian is nonsingular whenever the design has full column rank and
//! all fitted probabilities stay positive. The over-specified (K+1)-column
//! estimate and the reference-class estimate are recovered afterwards.

mod dataset;
mod fit;
mod loss;
mod qbasis;

pub use dataset::Dataset;
pub use fit::{check_balance, check_boundedness, fit_mle, FitConfig, FitResult};
pub use loss::{cross_entropy, per_obs_grad_hess, softmax_probs};
pub use qbasis::{build_q, QBasis};


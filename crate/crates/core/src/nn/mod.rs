//! Dense linear algebra, MLP forward/backward passes, optimizers, and the
//! finite-difference gradient oracle used as a test fixture everywhere.

mod dense;
mod mlp;
mod optimizer;

pub use dense::DenseMatrix;
pub use mlp::{
    finite_diff_grad, mlp_backward, mlp_backward_into, mlp_forward, Activation, ForwardTrace,
    GradientBuffer, Layer, MlpParams, FINITE_DIFF_STEP,
};
pub use optimizer::{OptAlgo, OptimizerState};

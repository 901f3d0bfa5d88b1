//! Observational tests of causal fairness hypotheses for data on a protected
//! attribute `S`, a mediator `D` and a binary outcome `A`.
//!
//! * [`tables`]: ingestion, joint distributions and conditional kernels.
//! * [`ivcore`]: IV inequalities, the compatible-kernel polytope and its
//!   response-function realization.
//! * [`scm`]: finite structural causal models used as exact oracles.
//! * [`bayes`]: Dirichlet posterior probability of the IV-compatible set.
//! * [`freq`]: chi-square based tests.
//! * [`bounds`]: controlled and natural direct effect bounds.
//! * [`audit`]: the end-to-end pipeline behind the command-line tool.

pub mod audit;
pub mod bayes;
pub mod bounds;
pub mod error;
pub mod freq;
pub mod ivcore;
pub mod scm;
pub mod tables;

pub use error::{Error, Result};
pub use tables::{
    conditional_kernel, empirical_joint, parse_long_csv, CategorySpace, Coding, ConditionalKernel, ContingencyTable3,
    JointDistribution,
};

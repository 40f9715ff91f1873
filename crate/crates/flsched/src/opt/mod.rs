//! Primal/dual optimization: losses and conjugates, the dual-decomposition
//! objective, local subproblem solvers with measurable inexactness, and the
//! two federated training loops.

pub mod loss;
pub mod problem;
pub mod solver;
pub mod train;

pub use loss::LossKind;
pub use problem::{Matrix, Problem, Regularizer};
pub use solver::{measure_beta, solve_local, BetaMeasure};
pub use train::{train_algorithm1, train_algorithm2, Algorithm2Options, ChannelSource, RoundRecord};

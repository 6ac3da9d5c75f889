//! Trajectory-representation and Copenhagen first-order energy transfer for
//! an impulsive perturbation of the infinite square well ground state.
//!
//! The trajectory side follows a particle along the microstate trajectory
//! generated by the quantum stationary Hamilton-Jacobi equation and finds
//! the energy it exchanges with a δ-function impulse confined to two thin
//! bands at the walls. The Copenhagen side is the ground-state matrix
//! element of the same perturbation. [`ensemble`] averages the former over
//! a uniform distribution of epochs; [`oracle`] holds the independent
//! brute-force checks.

pub mod eigenpair;
pub mod ensemble;
pub mod error;
pub mod kinematics;
pub mod model;
pub mod oracle;
pub mod perturbation;

pub use eigenpair::{CharacteristicValue, EigenPairContext};
pub use error::{Error, Result};
pub use kinematics::{ParticleSnapshot, SheetTime, TrajectoryClock, Wall, WallPoint};
pub use model::{Direction, ImpulseSpec, Microstate, WellModel};
pub use perturbation::{CaseWindow, CopenhagenE1, MatrixElementVariant, TrajectoryE1, TransferCase};

//! Particle swarm optimization under Star, Ring and Von Neumann communication
//! topologies, full-factorial hyperparameter campaigns scored by the AOCC
//! anytime metric, and Shapley attribution of each hyperparameter.
//!
//! The optimizer, benchmark and metric code is generic over [`Scalar`]
//! (`f32` or `f64`); campaigns and explanations run in `f64`.

pub mod bench;
pub mod campaign;
pub mod error;
pub mod metrics;
pub mod scalar;
pub mod seed;
pub mod swarm;
pub mod topology;
pub mod xplain;

pub use bench::{make_instance, ModalClass, ProblemId, ProblemInstance};
pub use error::{Error, Result};
pub use metrics::{aocc, log_scale_trace, AoccBounds};
pub use scalar::Scalar;
pub use swarm::{init_swarm, run, step, ConvergenceTrace, Hyperparameters, Particle, SwarmState};
pub use topology::{NeighborhoodAssignment, Topology};

pub type Instance = ProblemInstance<f64>;
pub type Instance32 = ProblemInstance<f32>;
pub type Params = Hyperparameters<f64>;
pub type Params32 = Hyperparameters<f32>;
pub type Trace = ConvergenceTrace<f64>;
pub type Trace32 = ConvergenceTrace<f32>;
pub type Swarm = SwarmState<f64>;
pub type Swarm32 = SwarmState<f32>;
pub type Bounds = AoccBounds<f64>;

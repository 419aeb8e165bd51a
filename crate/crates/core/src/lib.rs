//! Offloading analysis for vehicular edge computing on a High Altitude
//! Platform.
//!
//! Ground vehicles generate video frames as Poisson streams and either
//! process them on board (an M/D/1 queue each) or offload them over a mmWave
//! link to a HAP running an M/D/c queue. The crate solves both queues,
//! evaluates the probability that a frame meets its deadline, picks the
//! offloading factor that maximizes it, and ships a discrete-event simulator
//! that checks every analytical figure.

pub mod error;
pub mod latency;
pub mod link;
pub mod optimizer;
pub mod queueing;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use latency::{ComputeProfile, DeadlineBudget, DelayBreakdown};
pub use optimizer::{evaluate_at, feasible_range, optimize, Evaluation, FeasibleRange, OptimizationResult};
pub use queueing::{QueueSpec, StateDistribution, TailParams};
pub use scenario::{load_config, parse_config, write_config, BandwidthSharing, ScenarioConfig};
pub use sim::{simulate_mdc, simulate_system, SimConfig, SimStats};

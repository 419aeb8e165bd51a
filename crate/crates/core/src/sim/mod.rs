//! Seeded discrete-event simulation of the queues and of the full system.
//!
//! Random numbers come from ChaCha8 seeded with a 64-bit seed. Each source
//! draws from its own stream of that generator: stream 0 is the routing (or
//! the only arrival process for [`simulate_mdc`]), stream `1 + g` is GV `g`.

mod event;
mod mdc;
mod station;
mod stats;
mod system;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use event::{Class, EventList};
pub use mdc::simulate_mdc;
pub use station::{Started, Station};
pub use stats::{BatchMeans, Estimate, QueueStats, BATCHES};
pub use system::{simulate_system, simulate_system_traced, FrameRecord, Path, PathStats, SimConfig, SimStats};

/// Smallest frame budget a run accepts.
pub const MIN_FRAMES: u64 = 10_000;
/// Leading share of frames excluded from the statistics.
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_budget(frames: u64) -> Result<()> {
    if frames < MIN_FRAMES {
        return Err(Error::InvalidParameter {
            name: "frame_budget",
            reason: format!("must be at least {MIN_FRAMES}, got {frames}"),
        });
    }
    Ok(())
}

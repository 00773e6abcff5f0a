pub mod degrade;
pub mod extract;
pub mod fuse;
pub mod report;
pub mod score;
pub mod synth;
pub mod train;

use crate::failure::{CmdResult, FailExt, Failure};

/// Worker pool for the fan-out commands; `None` means one worker per
/// core.
pub fn make_pool(jobs: Option<usize>) -> CmdResult<rayon::ThreadPool> {
    let threads = match jobs {
        Some(0) => return Err(Failure::config("--jobs must be at least 1")),
        Some(n) => n,
        None => 0, // rayon default
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .or_config()
}

//! Thread-pool construction honouring the `FRACALC_THREADS` cap.

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "FRACALC_THREADS";

/// Worker count: the smaller of `cap`, `FRACALC_THREADS` and the number of
/// available cores. Unparseable or zero environment values are ignored.
pub fn thread_count(cap: Option<usize>) -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    let env = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    [Some(avail), env, cap.filter(|&n| n > 0)]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(1)
}

pub fn pool(cap: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cap))
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}

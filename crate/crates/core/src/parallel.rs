//! Worker-count control.
//!
//! Parallel kernels run on the ambient rayon pool. Every parallel reduction in
//! this crate splits work into fixed-size pieces and combines them in a fixed
//! order, so the pool size never changes a numeric result.

use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HYBRID_SAMPLER_THREADS";

/// Thread cap from [`THREADS_ENV`], if set.
pub fn thread_cap_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig {
                field: THREADS_ENV.into(),
                message: format!("expected a positive integer, got {v:?}"),
            }),
        },
        Err(_) => Ok(None),
    }
}

/// Run `f` inside a dedicated pool of `threads` workers (or the global pool
/// when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig {
                    field: THREADS_ENV.into(),
                    message: e.to_string(),
                })?;
            Ok(pool.install(f))
        }
    }
}

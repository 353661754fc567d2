//! Worker pool for independent runs and studies, capped by `BLOWUPLAB_THREADS`.
//! Results are always collected in input order, so output never depends on the
//! thread count.

use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const THREADS_VAR: &str = "BLOWUPLAB_THREADS";

fn parse_cap(v: &str) -> CliResult<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::Input(format!(
            "{THREADS_VAR} must be a positive integer, got '{v}'"
        ))),
    }
}

/// Thread cap from the environment; `None` lets rayon choose.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => parse_cap(&v).map(Some),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Input(format!("{THREADS_VAR}: {e}"))),
    }
}

pub fn pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

/// `f` over `items` on the capped pool, results in input order.
pub fn map_ordered<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> CliResult<Vec<R>> {
    let pool = pool()?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

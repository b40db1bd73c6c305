//! Thread cap for internal parallelism.

/// Environment variable holding the maximum number of worker threads.
pub const THREADS_ENV: &str = "RESETQ_THREADS";

/// Runs `f` on a pool sized by `RESETQ_THREADS`, or on the global pool when
/// the variable is unset or unparsable.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    match cap.filter(|&n| n > 0) {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

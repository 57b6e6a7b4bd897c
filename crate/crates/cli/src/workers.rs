use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::BenchError;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "RQI_WORKERS";

/// Worker count from [`WORKERS_ENV`], 1 when unset.
pub fn worker_count() -> Result<usize, BenchError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| BenchError::usage(format!("{WORKERS_ENV} must be a positive integer, got {s:?}"))),
    }
}

/// Evaluates `f(0..count)` on up to `workers` threads. The output is ordered
/// by index whatever the completion order.
pub fn parallel_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if workers <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..count).map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..workers.min(count) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let v = f(i);
                *slots[i].lock().expect("slot lock") = Some(v);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every index evaluated")).collect()
}

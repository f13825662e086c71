use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use canon_core::experiments::{Executor, Row};
use canon_core::Result;

/// Environment variable capping the number of sweep threads.
pub const THREADS_ENV: &str = "CANON_TILT_THREADS";

/// Runs sweep tasks on a scoped thread pool; results keep task order.
#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    threads: usize,
}

impl Threaded {
    pub fn new(threads: usize) -> Self {
        Self { threads: threads.max(1) }
    }

    /// `CANON_TILT_THREADS` if set to a positive integer, else the number of cores.
    pub fn from_env() -> Self {
        let cores = thread::available_parallelism().map_or(1, NonZeroUsize::get);
        let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&t| t > 0);
        Self::new(threads.unwrap_or(cores))
    }
}

impl Executor for Threaded {
    fn run(&self, tasks: usize, job: &(dyn Fn(usize) -> Result<Vec<Row>> + Sync)) -> Vec<Result<Vec<Row>>> {
        let workers = self.threads.min(tasks);
        if workers <= 1 {
            return (0..tasks).map(job).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<Vec<Row>>>>> = (0..tasks).map(|_| Mutex::new(None)).collect();
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks {
                        break;
                    }
                    let out = job(i);
                    *slots[i].lock().expect("slot lock") = Some(out);
                });
            }
        });
        slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every task ran")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use canon_core::experiments::Sequential;

    #[test]
    fn order_matches_sequential() {
        let job = |i: usize| -> Result<Vec<Row>> {
            let spin: u64 = (0..(50_000 * (7 - i as u64 % 7))).sum();
            Ok(vec![Row::new(i as u64, "x", (spin % 3) as f64 + i as f64)])
        };
        let a = Threaded::new(4).run(11, &job);
        let b = Sequential.run(11, &job);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn zero_threads_means_one() {
        assert_eq!(Threaded::new(0).threads, 1);
    }
}

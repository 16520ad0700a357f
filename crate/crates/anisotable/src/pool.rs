//! Scoped worker pool pulling batch indices from a shared counter.

use std::sync::atomic::{AtomicU64, Ordering};

use anisotable_core::exec::BatchExecutor;

#[derive(Clone, Copy, Debug)]
pub struct WorkerPool {
    workers: usize,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl BatchExecutor for WorkerPool {
    fn map_batches<T, F>(&self, batches: u64, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        let threads = (self.workers as u64).min(batches) as usize;
        if threads <= 1 {
            return (0..batches).map(task).collect();
        }
        let next = AtomicU64::new(0);
        let mut done: Vec<(u64, T)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|_| {
                    s.spawn(|| {
                        let mut local = Vec::new();
                        loop {
                            let b = next.fetch_add(1, Ordering::Relaxed);
                            if b >= batches {
                                break local;
                            }
                            local.push((b, task(b)));
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        done.sort_unstable_by_key(|(b, _)| *b);
        done.into_iter().map(|(_, t)| t).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_come_back_in_batch_order() {
        let pool = WorkerPool::new(4);
        let out = pool.map_batches(37, |b| b * b);
        assert_eq!(out, (0..37).map(|b| b * b).collect::<Vec<_>>());
        assert!(WorkerPool::new(3).map_batches(0, |b| b).is_empty());
    }
}

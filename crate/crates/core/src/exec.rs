//! Batch layout, executors and path sinks.
//!
//! A simulation call of `n` paths is cut into batches of [`BATCH_SIZE`]
//! paths. Batch `b` draws from its own generator keyed by
//! `batch_seed(stream_seed, b)`, and per-batch results are merged in batch
//! order, so the outcome does not depend on which worker ran which batch.

use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use crate::cone::ConeDomain;
use crate::error::Result;
use crate::point::Point;
use crate::sampler::{ExitRecord, PathSampler, SchemePolicy};
use crate::seed::{batch_rng, batch_seed, derive};

pub const BATCH_SIZE: u64 = 1 << 14;

pub fn batch_count(n: u64) -> u64 {
    n.div_ceil(BATCH_SIZE)
}

/// Path-id range covered by batch `b`.
pub fn batch_range(n: u64, b: u64) -> core::ops::Range<u64> {
    let lo = b * BATCH_SIZE;
    lo..((b + 1) * BATCH_SIZE).min(n)
}

/// Runs `task(batch)` for every batch and returns the results in batch order.
pub trait BatchExecutor: Sync {
    fn map_batches<T, F>(&self, batches: u64, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync;
}

/// Runs every batch on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl BatchExecutor for Serial {
    fn map_batches<T, F>(&self, batches: u64, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        (0..batches).map(task).collect()
    }
}

/// Accumulates exit records of one batch; batches are combined in order.
pub trait ExitSink: Send + Sized {
    fn record(&mut self, path_id: u64, rec: &ExitRecord);
    fn merge(&mut self, later: Self);
}

/// Counts of paths by the number of grid times they outlived.
///
/// `counts[k]` is the number of paths with `tau > grid[k-1]` and
/// `tau <= grid[k]` (with `grid[-1] = 0`, and `k = grid.len()` meaning the
/// path survived the whole grid).
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalLevels {
    grid: Vec<f64>,
    counts: Vec<u64>,
}

impl SurvivalLevels {
    /// `grid` must be increasing; its last entry should be the horizon.
    pub fn new(grid: Vec<f64>) -> Self {
        let k = grid.len();
        Self {
            grid,
            counts: alloc::vec![0; k + 1],
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Record `count` paths that outlived the whole grid.
    pub fn add_survivors(&mut self, count: u64) {
        let last = self.counts.len() - 1;
        self.counts[last] += count;
    }

    /// Number of paths with `tau > grid[k]`.
    pub fn survivors(&self, k: usize) -> u64 {
        self.counts[k + 1..].iter().sum()
    }
}

impl ExitSink for SurvivalLevels {
    fn record(&mut self, _: u64, rec: &ExitRecord) {
        let level = if rec.survived {
            self.grid.len()
        } else {
            self.grid.partition_point(|&g| g < rec.exit_time)
        };
        self.counts[level] += 1;
    }

    fn merge(&mut self, later: Self) {
        for (a, b) in self.counts.iter_mut().zip(later.counts) {
            *a += b;
        }
    }
}

/// Positions at the horizon of the paths that survived.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Survivors {
    pub total: u64,
    pub positions: Vec<Point>,
}

impl ExitSink for Survivors {
    fn record(&mut self, _: u64, rec: &ExitRecord) {
        self.total += 1;
        if rec.survived {
            self.positions.push(rec.post_exit);
        }
    }

    fn merge(&mut self, later: Self) {
        self.total += later.total;
        self.positions.extend(later.positions);
    }
}

/// `(X_{tau-}, X_tau)` of the paths that left by a jump.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JumpExits {
    pub total: u64,
    pub exits: Vec<(Point, Point)>,
}

impl ExitSink for JumpExits {
    fn record(&mut self, _: u64, rec: &ExitRecord) {
        self.total += 1;
        if rec.exit_kind == crate::sampler::ExitKind::Jump {
            self.exits.push((rec.pre_exit, rec.post_exit));
        }
    }

    fn merge(&mut self, later: Self) {
        self.total += later.total;
        self.exits.extend(later.exits);
    }
}

/// Every record with its path id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecordLog(pub Vec<(u64, ExitRecord)>);

impl ExitSink for RecordLog {
    fn record(&mut self, path_id: u64, rec: &ExitRecord) {
        self.0.push((path_id, *rec));
    }

    fn merge(&mut self, later: Self) {
        self.0.extend(later.0);
    }
}

impl<A: ExitSink, B: ExitSink> ExitSink for (A, B) {
    fn record(&mut self, path_id: u64, rec: &ExitRecord) {
        self.0.record(path_id, rec);
        self.1.record(path_id, rec);
    }

    fn merge(&mut self, later: Self) {
        self.0.merge(later.0);
        self.1.merge(later.1);
    }
}

/// One simulation call and the batches it used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamUse {
    pub call: u64,
    pub stream_seed: u64,
    pub batches: u64,
}

impl StreamUse {
    pub fn batch_seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.batches).map(|b| batch_seed(self.stream_seed, b))
    }
}

/// Hands out stream seeds in call order and dispatches batches.
pub struct Runner<'e, E: BatchExecutor> {
    exec: &'e E,
    master_seed: u64,
    policy: SchemePolicy,
    calls: Cell<u64>,
    log: RefCell<Vec<StreamUse>>,
}

impl<'e, E: BatchExecutor> Runner<'e, E> {
    pub fn new(exec: &'e E, master_seed: u64) -> Self {
        Self {
            exec,
            master_seed,
            policy: SchemePolicy::default(),
            calls: Cell::new(0),
            log: RefCell::new(Vec::new()),
        }
    }

    pub fn with_policy(mut self, policy: SchemePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn policy(&self) -> &SchemePolicy {
        &self.policy
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Streams consumed so far, in call order.
    pub fn streams(&self) -> Vec<StreamUse> {
        self.log.borrow().clone()
    }

    /// Reserve the next stream for `batches` batches.
    pub fn next_stream(&self, batches: u64) -> u64 {
        let call = self.calls.get();
        self.calls.set(call + 1);
        let stream_seed = derive(self.master_seed, call);
        self.log.borrow_mut().push(StreamUse {
            call,
            stream_seed,
            batches,
        });
        stream_seed
    }

    /// Run `n` paths from `x0` and fold their records into sinks.
    pub fn simulate<S, M>(
        &self,
        sampler: &PathSampler<'_>,
        domain: &ConeDomain,
        x0: Point,
        t_max: f64,
        n: u64,
        make: M,
    ) -> Result<S>
    where
        S: ExitSink,
        M: Fn() -> S + Sync,
    {
        let batches = batch_count(n);
        let stream = self.next_stream(batches);
        let parts = self.exec.map_batches(batches, |b| -> Result<S> {
            let mut rng = batch_rng(batch_seed(stream, b));
            let mut sink = make();
            for id in batch_range(n, b) {
                let rec = sampler.exit(domain, x0, t_max, &mut rng)?;
                sink.record(id, &rec);
            }
            Ok(sink)
        });
        let mut out = make();
        for part in parts {
            out.merge(part?);
        }
        Ok(out)
    }

    /// `n` independent increments over time `t`.
    pub fn increments(&self, sampler: &PathSampler<'_>, t: f64, n: u64) -> Result<Vec<Point>> {
        let batches = batch_count(n);
        let stream = self.next_stream(batches);
        let parts = self.exec.map_batches(batches, |b| -> Result<Vec<Point>> {
            let mut rng = batch_rng(batch_seed(stream, b));
            batch_range(n, b).map(|_| sampler.increment(t, &mut rng)).collect()
        });
        let mut out = Vec::with_capacity(n as usize);
        for part in parts {
            out.extend(part?);
        }
        Ok(out)
    }

    /// Generator for single-threaded post-processing (bootstrap and the like).
    pub fn aux_rng(&self) -> rand_chacha::ChaCha8Rng {
        batch_rng(batch_seed(self.next_stream(1), 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_cover_paths_exactly() {
        let n = 3 * BATCH_SIZE + 5;
        assert_eq!(batch_count(n), 4);
        let total: u64 = (0..4).map(|b| batch_range(n, b).count() as u64).sum();
        assert_eq!(total, n);
        assert_eq!(batch_count(0), 0);
    }

    #[test]
    fn runner_logs_streams_in_order() {
        let r = Runner::new(&Serial, 11);
        let a = r.next_stream(2);
        let b = r.next_stream(3);
        assert_ne!(a, b);
        let log = r.streams();
        assert_eq!(log.len(), 2);
        assert_eq!(log[1].batch_seeds().count(), 3);
    }
}

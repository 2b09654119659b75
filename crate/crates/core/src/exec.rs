//! Execution backend: a scoped thread pool when the `parallel` feature is on
//! and more than one worker is requested, otherwise a plain sequential loop.
//!
//! Work is expressed as a flat slice of independent tasks, each owning the
//! mutable state it touches. Any scheduler (including work stealing) is
//! permitted because tasks never share writable state; output therefore never
//! depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Worker-count policy plus the pool that realizes it.
pub struct Exec {
    threads: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Exec {
    /// `threads = 0` selects the detected logical core count.
    pub fn new(threads: usize) -> Exec {
        let threads = if threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            threads
        };
        #[cfg(feature = "parallel")]
        {
            let pool = if threads > 1 {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(threads)
                        .build()
                        .expect("worker pool construction failed"),
                )
            } else {
                None
            };
            Exec { threads, pool }
        }
        #[cfg(not(feature = "parallel"))]
        Exec { threads }
    }

    pub fn sequential() -> Exec {
        Exec::new(1)
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// True when tasks may actually run concurrently.
    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        false
    }

    /// Runs `f` once per task. Returns only after every task completes, so a
    /// call acts as a barrier between dependent phases.
    pub fn for_each<T, F>(&self, tasks: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            pool.install(|| tasks.par_iter_mut().for_each(&f));
            return;
        }
        tasks.iter_mut().for_each(f);
    }
}

/// Splits `data` into disjoint mutable windows at ascending `(start, len)`
/// positions. Gaps between windows are skipped; windows must not overlap.
pub(crate) fn split_windows<T>(
    data: &mut [T],
    windows: impl IntoIterator<Item = (usize, usize)>,
) -> Vec<&mut [T]> {
    let mut rest = data;
    let mut consumed = 0usize;
    let mut out = Vec::new();
    for (start, len) in windows {
        assert!(start >= consumed, "windows must be ascending and disjoint");
        let tail = std::mem::take(&mut rest);
        let (_, tail) = tail.split_at_mut(start - consumed);
        let (window, tail) = tail.split_at_mut(len);
        out.push(window);
        rest = tail;
        consumed = start + len;
    }
    out
}

/// [`split_windows`] for unit windows: one mutable element per index.
pub(crate) fn split_items<T>(
    data: &mut [T],
    indices: impl IntoIterator<Item = usize>,
) -> Vec<&mut T> {
    split_windows(data, indices.into_iter().map(|i| (i, 1)))
        .into_iter()
        .map(|w| {
            let [item] = w else { unreachable!() };
            item
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn for_each_runs_every_task() {
        for threads in [1, 4] {
            let exec = Exec::new(threads);
            let mut tasks: Vec<(usize, u64)> = (0..100).map(|i| (i, 0)).collect();
            exec.for_each(&mut tasks, |t| t.1 = (t.0 * 2) as u64);
            assert!(tasks.iter().all(|&(i, v)| v == (i * 2) as u64));
        }
    }

    #[test]
    fn zero_threads_detects_cores() {
        assert!(Exec::new(0).threads() >= 1);
    }

    #[test]
    fn split_windows_disjoint_views() {
        let mut data: Vec<u32> = (0..10).collect();
        let mut wins = split_windows(&mut data, [(1, 2), (5, 3)]);
        assert_eq!(wins.len(), 2);
        wins[0][0] = 100;
        wins[1][2] = 200;
        assert_eq!(data, vec![0, 100, 2, 3, 4, 5, 6, 200, 8, 9]);
    }

    #[test]
    fn split_items_one_element_each() {
        let mut data: Vec<u32> = (0..6).collect();
        let items = split_items(&mut data, [0, 3, 5]);
        assert_eq!(items.len(), 3);
        for item in items {
            *item += 10;
        }
        assert_eq!(data, vec![10, 1, 2, 13, 4, 15]);
    }
}

//! Execution policy: rayon data parallelism, or a sequential fallback when
//! the `parallel` feature is off or [`Exec::Sequential`] is requested.

/// How bulk work (census tables, oracle sweeps) is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Order-preserving filter-map over `0..n`.
    pub fn filter_map_range<R, F>(self, n: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> Option<R> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().filter_map(f).collect()
            }
            _ => (0..n).filter_map(f).collect(),
        }
    }

    /// Runs `f` on a pool of `jobs` workers (global pool when `None`).
    pub fn install<R: Send>(self, jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        if let (Exec::Parallel, Some(j)) = (self, jobs) {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
                return pool.install(f);
            }
        }
        let _ = jobs;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let a = Exec::Sequential.map(&items, |x| x * x);
        let b = Exec::Parallel.map(&items, |x| x * x);
        assert_eq!(a, b);
        let c = Exec::Parallel.install(Some(2), || Exec::Parallel.filter_map_range(100, |x| (x % 3 == 0).then_some(x)));
        assert_eq!(c, Exec::Sequential.filter_map_range(100, |x| (x % 3 == 0).then_some(x)));
    }
}

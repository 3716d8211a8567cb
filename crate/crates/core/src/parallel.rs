//! Data-parallel maps over independent work items. With the `parallel`
//! feature disabled every strategy runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent work items (random scenarios, index slices) are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..count`, preserving order.
    pub fn map_range<R, F>(self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
            _ => (0..count).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Maximum of `f` over `0..count` (0 for an empty range).
    pub fn max_range<F>(self, count: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.map_range(count, f).into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let f = |i: usize| (i * i) as f64;
        assert_eq!(Execution::Sequential.map_range(50, f), Execution::Parallel.map_range(50, f));
        assert_eq!(Execution::Parallel.max_range(10, f), 81.0);
        assert_eq!(Execution::Sequential.max_range(0, f), 0.0);
    }
}

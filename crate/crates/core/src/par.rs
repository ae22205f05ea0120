//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] dispatches to
//! rayon; without it every call runs sequentially. Results are always
//! collected in input order, so callers observe identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    pub fn map_slice<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn map_slice_mut<I, T, F>(self, items: &mut [I], f: F) -> Vec<T>
    where
        I: Send,
        T: Send,
        F: Fn(usize, &mut I) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items
                .par_iter_mut()
                .enumerate()
                .map(|(i, x)| f(i, x))
                .collect(),
            _ => items.iter_mut().enumerate().map(|(i, x)| f(i, x)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let seq = Execution::Sequential.map_range(1000, |i| (i as f64).sqrt());
        let par = Execution::Parallel.map_range(1000, |i| (i as f64).sqrt());
        assert_eq!(seq, par);

        let mut a: Vec<u32> = (0..100).collect();
        let mut b = a.clone();
        let ra = Execution::Sequential.map_slice_mut(&mut a, |i, x| {
            *x += i as u32;
            *x
        });
        let rb = Execution::Parallel.map_slice_mut(&mut b, |i, x| {
            *x += i as u32;
            *x
        });
        assert_eq!(ra, rb);
        assert_eq!(a, b);
    }
}

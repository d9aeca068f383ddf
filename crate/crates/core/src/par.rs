//! Order-preserving data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the map runs on rayon; without it, or when the
//! process-wide mode is switched to [`Mode::Sequential`], it is a plain loop.
//! Reductions are always done sequentially over the collected results, so
//! sums are bit-identical across modes and thread counts.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Parallel,
    Sequential,
}

static MODE: AtomicU8 = AtomicU8::new(0);

pub fn set_mode(mode: Mode) {
    MODE.store(
        match mode {
            Mode::Parallel => 0,
            Mode::Sequential => 1,
        },
        Ordering::Relaxed,
    );
}

pub fn mode() -> Mode {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == 0 {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "LORENTZ_VERIFY_THREADS";

/// Sizes the global pool from [`THREADS_ENV`]. Returns the thread count in
/// effect. Safe to call more than once; later calls cannot resize the pool.
pub fn init_from_env() -> usize {
    let requested = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        1
    }
}

/// Worker count in effect for [`map`].
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        if mode() == Mode::Parallel {
            return rayon::current_num_threads();
        }
    }
    1
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode() == Mode::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Fallible map; the first error in input order wins.
pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

pub fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_both_modes() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(&xs, |x| x * x);
        set_mode(Mode::Sequential);
        let b = map(&xs, |x| x * x);
        set_mode(Mode::Parallel);
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }

    #[test]
    fn try_map_reports_first_error() {
        let xs = [1, 2, 3, 4];
        let r: Result<Vec<i32>, i32> = try_map(&xs, |&x| if x >= 3 { Err(x) } else { Ok(x) });
        assert_eq!(r, Err(3));
    }

    #[test]
    fn sup_propagates_nan() {
        assert_eq!(sup([1.0, 3.0, 2.0]), 3.0);
        assert!(sup([1.0, f64::NAN]).is_nan());
    }
}

//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these run on the rayon pool; without
//! it they fall back to plain sequential iterators. Results always come back
//! in input order, so reductions done by callers are deterministic.

use crate::error::{Error, Result};

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Indexed map with per-worker scratch state.
#[cfg(feature = "parallel")]
pub fn map_range_init<S, U, I, F>(n: usize, init: I, f: F) -> Vec<U>
where
    U: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map_init(init, f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range_init<S, U, I, F>(n: usize, init: I, f: F) -> Vec<U>
where
    U: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> U + Sync + Send,
{
    let mut scratch = init();
    (0..n).map(|i| f(&mut scratch, i)).collect()
}

/// Map over a slice with per-worker scratch state built by `init`.
#[cfg(feature = "parallel")]
pub fn map_init<T, S, U, I, F>(data: &[T], init: I, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    data.par_iter().map_init(init, f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_init<T, S, U, I, F>(data: &[T], init: I, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> U + Sync + Send,
{
    let mut scratch = init();
    data.iter().map(|x| f(&mut scratch, x)).collect()
}

/// Mutable variant of [`map_init`].
#[cfg(feature = "parallel")]
pub fn for_each_mut<T, S, I, F>(data: &mut [T], init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut T) + Sync + Send,
{
    use rayon::prelude::*;
    data.par_iter_mut().enumerate().for_each_init(init, |s, (i, x)| f(s, i, x));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_mut<T, S, I, F>(data: &mut [T], init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut T) + Sync + Send,
{
    let mut scratch = init();
    for (i, x) in data.iter_mut().enumerate() {
        f(&mut scratch, i, x);
    }
}

/// Run `f` on a dedicated pool of `threads` workers (`None` = global pool).
#[cfg(feature = "parallel")]
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidArgument("thread count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == Some(0) {
        return Err(Error::InvalidArgument("thread count must be positive".into()));
    }
    Ok(f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_range(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
        let data: Vec<u32> = (0..500).collect();
        let w = with_threads(Some(3), || {
            map_init(
                &data,
                || 0u32,
                |s, &x| {
                    *s += 1;
                    x + 1
                },
            )
        })
        .unwrap();
        assert_eq!(w, (1..501).collect::<Vec<_>>());
    }
}

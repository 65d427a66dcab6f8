//! Data-parallel helpers with a sequential fallback.
//!
//! Every call site maps independent items and collects in input order, so
//! the result is identical whether rayon is enabled, and for any thread
//! count. Reductions over the mapped values are always performed
//! sequentially by the caller.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving input order in the output.
pub(crate) fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Map `f` over the index range `0..n`, preserving index order.
pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_slice_preserves_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let ys = map_slice(&xs, |x| x * 2);
        assert_eq!(ys, xs.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn map_range_preserves_order() {
        let ys = map_range(100, |i| i as i64 - 50);
        assert_eq!(ys[0], -50);
        assert_eq!(ys[99], 49);
    }
}

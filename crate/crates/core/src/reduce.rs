//! Fixed-shape reductions. Every sum in the crate that crosses a thread
//! boundary goes through here, so results do not depend on the worker count.

use num_complex::Complex64;
use rayon::prelude::*;

/// Leaf size of the pairwise tree and the parallel chunk length.
pub const CHUNK: usize = 1024;
const LEAF: usize = 8;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        let mut s = Complex64::new(0.0, 0.0);
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
}

/// Sum of `f(i)` for `i < n`. Chunks of [`CHUNK`] indices are summed in
/// parallel, each pairwise, and the chunk sums are then summed pairwise.
pub fn par_sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let nchunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let buf: Vec<f64> = (lo..hi).map(&f).collect();
            pairwise_sum(&buf)
        })
        .collect();
    pairwise_sum(&partial)
}

pub fn par_sum_c_by<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let nchunks = n.div_ceil(CHUNK);
    let partial: Vec<Complex64> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let buf: Vec<Complex64> = (lo..hi).map(&f).collect();
            pairwise_sum_c(&buf)
        })
        .collect();
    pairwise_sum_c(&partial)
}

/// Maximum of `f(i)` for `i < n` (0 when `n == 0`). Max is exact, so order
/// does not matter, but NaN is propagated deterministically.
pub fn par_max_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let vals: Vec<f64> = (0..n).into_par_iter().map(&f).collect();
    let mut m = 0.0f64;
    for v in vals {
        if v.is_nan() {
            return f64::NAN;
        }
        if v > m {
            m = v;
        }
    }
    m
}

/// Balanced binary reduction over `lo..hi`. The split points depend only on
/// the range, so the association order is fixed.
pub fn tree_reduce<T, L, C>(lo: usize, hi: usize, leaf: &L, combine: &C) -> Option<T>
where
    T: Send,
    L: Fn(usize) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    match hi.saturating_sub(lo) {
        0 => None,
        1 => Some(leaf(lo)),
        n => {
            let mid = lo + n / 2;
            let (a, b) = rayon::join(
                || tree_reduce(lo, mid, leaf, combine),
                || tree_reduce(mid, hi, leaf, combine),
            );
            match (a, b) {
                (Some(a), Some(b)) => Some(combine(a, b)),
                (a, None) => a,
                (None, b) => b,
            }
        }
    }
}

/// Worker count from `GRUSHIN_WORKERS`, if set and valid.
pub fn workers_from_env() -> Option<usize> {
    std::env::var("GRUSHIN_WORKERS").ok().and_then(|s| s.trim().parse().ok()).filter(|&n| n > 0)
}

/// Run `f` on a dedicated pool of `n` threads (global pool when `None`).
pub fn with_workers<R, F>(n: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match n {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_on_integers() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 49_995_000.0);
        assert_eq!(par_sum_by(xs.len(), |i| xs[i]), 49_995_000.0);
    }

    #[test]
    fn parallel_sum_is_worker_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let a = with_workers(Some(1), || par_sum_by(50_000, f));
        let b = with_workers(Some(7), || par_sum_by(50_000, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn tree_reduce_shape() {
        let s = tree_reduce(0, 100, &|i| i as u64, &|a, b| a + b);
        assert_eq!(s, Some(4950));
        assert_eq!(tree_reduce(3, 3, &|i| i, &|a, b| a + b), None);
    }
}

//! Data-parallel execution with a sequential fallback.
//!
//! Grid sweeps are embarrassingly parallel over nodes. With the `parallel`
//! feature (default) they run on rayon; without it the same entry points
//! run plain loops. Reductions are chunked with a fixed chunk size and the
//! partial sums are combined in index order, so results are bit-identical
//! across thread counts and across the two backends.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed reduction chunk; part of the numeric contract, do not tie to
/// thread count.
const CHUNK: usize = 1024;

fn chunk_ranges(n: usize) -> Vec<(usize, usize)> {
    let mut ranges = Vec::with_capacity(n.div_ceil(CHUNK));
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        ranges.push((start, end));
        start = end;
    }
    ranges
}

/// Order-preserving map over `0..n`, sequential backend.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Order-preserving map over `0..n`, rayon backend.
#[cfg(feature = "parallel")]
pub fn map_indexed_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Order-preserving map over `0..n` on the selected backend.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}

fn chunk_sum_f64<F: Fn(usize) -> f64>(range: (usize, usize), f: &F) -> f64 {
    let mut acc = 0.0;
    for i in range.0..range.1 {
        acc += f(i);
    }
    acc
}

fn chunk_sum_c64<F: Fn(usize) -> Complex64>(range: (usize, usize), f: &F) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in range.0..range.1 {
        acc += f(i);
    }
    acc
}

/// Deterministic chunked sum of `f(i)` over `0..n`, sequential backend.
pub fn sum_indexed_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    chunk_ranges(n).iter().map(|&r| chunk_sum_f64(r, &f)).sum()
}

/// Deterministic chunked sum of `f(i)` over `0..n`, rayon backend.
#[cfg(feature = "parallel")]
pub fn sum_indexed_par<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partials: Vec<f64> = chunk_ranges(n)
        .into_par_iter()
        .map(|r| chunk_sum_f64(r, &f))
        .collect();
    partials.iter().sum()
}

/// Deterministic chunked sum on the selected backend.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        sum_indexed_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sum_indexed_seq(n, f)
    }
}

/// Deterministic chunked complex sum, sequential backend.
pub fn csum_indexed_seq<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for r in chunk_ranges(n) {
        acc += chunk_sum_c64(r, &f);
    }
    acc
}

/// Deterministic chunked complex sum, rayon backend.
#[cfg(feature = "parallel")]
pub fn csum_indexed_par<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let partials: Vec<Complex64> = chunk_ranges(n)
        .into_par_iter()
        .map(|r| chunk_sum_c64(r, &f))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in partials {
        acc += p;
    }
    acc
}

/// Deterministic chunked complex sum on the selected backend.
pub fn csum_indexed<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        csum_indexed_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        csum_indexed_seq(n, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy(i: usize) -> f64 {
        let x = i as f64 * 0.618_033_988_749_894_9;
        (x.sin() * 1.0e8).fract() / ((i % 97) as f64 + 1.0)
    }

    #[test]
    fn sum_matches_plain_loop_to_roundoff() {
        let n = 10_000;
        let got = sum_indexed(n, noisy);
        let plain: f64 = (0..n).map(noisy).sum();
        assert!((got - plain).abs() < 1e-9 * plain.abs().max(1.0));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn par_and_seq_are_bit_identical() {
        let n = 50_001;
        assert_eq!(
            sum_indexed_par(n, noisy).to_bits(),
            sum_indexed_seq(n, noisy).to_bits()
        );
        let f = |i: usize| Complex64::new(noisy(i), noisy(i + 1));
        let a = csum_indexed_par(n, f);
        let b = csum_indexed_seq(n, f);
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(1000, |i| i * i);
        assert_eq!(v[37], 37 * 37);
        assert_eq!(v.len(), 1000);
    }
}

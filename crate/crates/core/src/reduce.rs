//! Deterministic reductions.
//!
//! Work is split into fixed-size chunks whose boundaries depend only on the
//! problem size, never on the number of worker threads. Each chunk is reduced
//! sequentially and chunk results are combined in index order, so the result
//! is bitwise identical for any rayon pool size.

use rayon::prelude::*;

/// Chunk length for all parallel reductions.
pub const CHUNK: usize = 4096;

/// Pairwise (cascade) summation in a fixed tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `Σ f(i)` for `i in 0..n`, evaluated in parallel and summed pairwise.
pub fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunk_sums: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let vals: Vec<f64> = (lo..hi).map(&f).collect();
            pairwise_sum(&vals)
        })
        .collect();
    pairwise_sum(&chunk_sums)
}

/// Several sums over the same index range in one pass.
pub fn par_sum_many<const K: usize, F>(n: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let chunks: Vec<[f64; K]> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let vals: Vec<[f64; K]> = (lo..hi).map(&f).collect();
            let mut out = [0.0; K];
            let mut col = Vec::with_capacity(vals.len());
            for (k, o) in out.iter_mut().enumerate() {
                col.clear();
                col.extend(vals.iter().map(|v| v[k]));
                *o = pairwise_sum(&col);
            }
            out
        })
        .collect();
    let mut out = [0.0; K];
    let mut col = Vec::with_capacity(chunks.len());
    for (k, o) in out.iter_mut().enumerate() {
        col.clear();
        col.extend(chunks.iter().map(|v| v[k]));
        *o = pairwise_sum(&col);
    }
    out
}

/// Minimum of `f(i)` over `0..n` with its index; NaN values are skipped and
/// ties resolve to the lowest index.
pub fn par_argmin<F>(n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunk_best: Vec<Option<(usize, f64)>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut best: Option<(usize, f64)> = None;
            for i in lo..hi {
                let v = f(i);
                if v.is_nan() {
                    continue;
                }
                match best {
                    Some((_, b)) if v >= b => {}
                    _ => best = Some((i, v)),
                }
            }
            best
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for cand in chunk_best.into_iter().flatten() {
        match best {
            Some((_, b)) if cand.1 >= b => {}
            _ => best = Some(cand),
        }
    }
    best
}

/// Maximum of `f(i)` with its index (lowest index on ties).
pub fn par_argmax<F>(n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    par_argmin(n, |i| -f(i)).map(|(i, v)| (i, -v))
}

/// Order-preserving parallel map.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

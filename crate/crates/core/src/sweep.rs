//! Read-only verification sweeps, optionally split across threads.
//!
//! The worker count comes from `SPHERE_DISC_THREADS` (default 1). Sweeps only
//! compute maxima, which are exact, so the result does not depend on it.

use std::thread;

pub const THREADS_ENV: &str = "SPHERE_DISC_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&k| k >= 1)
        .unwrap_or(1)
}

/// `max_{i in 0..len} f(i)`, or `-inf` for an empty range. NaN values are
/// propagated so that a broken input cannot pass a check silently.
pub fn max_over<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    max_over_with(thread_count(), len, f)
}

pub fn max_over_with<F>(threads: usize, len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let fold = |lo: usize, hi: usize| {
        (lo..hi).map(&f).fold(f64::NEG_INFINITY, |a, b| {
            if a.is_nan() || b.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        })
    };
    let threads = threads.clamp(1, len.max(1));
    if threads == 1 {
        return fold(0, len);
    }
    let chunk = len.div_ceil(threads);
    let parts: Vec<f64> = thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|k| {
                let fold = &fold;
                s.spawn(move || fold(k * chunk, ((k + 1) * chunk).min(len)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    parts.into_iter().fold(f64::NEG_INFINITY, |a, b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_the_result() {
        let f = |i: usize| ((i * 7919) % 1000) as f64 / 3.0;
        let one = max_over_with(1, 12345, f);
        for k in [2, 3, 8, 50] {
            assert_eq!(max_over_with(k, 12345, f), one);
        }
        assert_eq!(max_over_with(4, 0, f), f64::NEG_INFINITY);
        assert!(max_over_with(3, 10, |i| if i == 7 { f64::NAN } else { 0.0 }).is_nan());
    }
}

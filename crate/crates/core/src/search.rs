//! Parallel search over all assignments `Gⁿ`.
//!
//! Assignments are numbered in mixed radix with variable 0 as the fastest
//! digit. The space is cut into fixed-size chunks that workers take in any
//! order; the reported hit is always the least index, so results do not
//! depend on the number of workers.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::group::Elem;

const CHUNK: u64 = 4096;

/// `n^arity`, or `None` on overflow.
pub fn space_size(n: usize, arity: usize) -> Option<u64> {
    (0..arity).try_fold(1u64, |acc, _| acc.checked_mul(n as u64))
}

/// The assignment with the given index.
pub fn decode(mut index: u64, n: usize, arity: usize) -> Vec<Elem> {
    let mut out = Vec::with_capacity(arity);
    for _ in 0..arity {
        out.push(Elem((index % n as u64) as u32));
        index /= n as u64;
    }
    out
}

/// Advances to the next assignment; returns the highest digit that changed.
#[inline]
pub fn increment(assignment: &mut [Elem], n: usize) -> usize {
    for (i, d) in assignment.iter_mut().enumerate() {
        if d.index() + 1 < n {
            d.0 += 1;
            return i;
        }
        d.0 = 0;
    }
    assignment.len()
}

/// Least index in `0..total` whose assignment satisfies `hit`.
pub fn find_first<S, I, F>(n: usize, arity: usize, total: u64, init: I, hit: F) -> Option<u64>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &[Elem]) -> bool + Sync + Send,
{
    let best = AtomicU64::new(u64::MAX);
    let chunks = total.div_ceil(CHUNK);
    (0..chunks).into_par_iter().for_each_init(&init, |state, c| {
        let start = c * CHUNK;
        if start >= best.load(Ordering::Relaxed) {
            return;
        }
        let end = (start + CHUNK).min(total);
        let mut a = decode(start, n, arity);
        for idx in start..end {
            if hit(state, &a) {
                best.fetch_min(idx, Ordering::Relaxed);
                return;
            }
            increment(&mut a, n);
        }
    });
    match best.into_inner() {
        u64::MAX => None,
        i => Some(i),
    }
}

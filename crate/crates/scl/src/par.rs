//! Deterministic work distribution.
//!
//! Heavy sweeps (resolvent grids, quadrature layers) fan out across scoped
//! threads, but every result lands in its slot by index, so the output of
//! [`par_map`] is bit-identical to the serial map no matter how many workers
//! run. The worker count comes from `SCL_THREADS` when set, otherwise from
//! the machine.

use std::env;

/// Worker count: `SCL_THREADS` if set to a positive integer, otherwise the
/// available parallelism.
pub fn thread_count() -> usize {
    if let Ok(v) = env::var("SCL_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            if k >= 1 {
                return k;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Maps `f` over `0..len` in parallel, preserving index order exactly.
pub fn par_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = thread_count().min(len.max(1));
    if workers <= 1 || len <= 1 {
        return (0..len).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..len).map(|_| None).collect();
    let chunk = len.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slot) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (off, cell) in slot.iter_mut().enumerate() {
                    *cell = Some(f(w * chunk + off));
                }
            });
        }
    });
    out.into_iter()
        .map(|o| o.expect("every index visited"))
        .collect()
}

//! Counter-based random streams.
//!
//! Every Monte-Carlo unit of work (a sample path, a block) draws from its own
//! ChaCha stream selected by `(seed, stream)`, so results do not depend on how
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Number of items handled sequentially inside one parallel chunk.
///
/// Partial sums are formed per chunk in index order and the chunk results are
/// folded in chunk order, which keeps floating-point reductions reproducible.
pub const CHUNK: usize = 64;

/// Runs `samples` independent draws in parallel chunks and folds them deterministically.
///
/// Sample `k` receives the stream `(seed, k)`. Each chunk starts from `init()`,
/// `step` folds its samples in order, and chunk results are merged in chunk
/// order with `merge`.
pub fn par_accumulate<A, I, S, M>(samples: usize, seed: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut ChaCha8Rng, usize) + Sync,
    M: Fn(&mut A, A),
{
    use rayon::prelude::*;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for k in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = stream_rng(seed, k as u64);
                step(&mut acc, &mut rng, k);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn accumulation_is_independent_of_scheduling() {
        let run = || {
            par_accumulate(
                1000,
                42,
                || 0.0f64,
                |acc, rng, _| *acc += rng.random::<f64>(),
                |a, b| *a += b,
            )
        };
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let a: u64 = stream_rng(1, 0).random();
        let b: u64 = stream_rng(1, 1).random();
        assert_ne!(a, b);
    }
}

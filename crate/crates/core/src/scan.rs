//! Deterministic parallel sweeps over admissible words.
//!
//! Words of length `n` are split into lexicographically ordered prefix
//! chunks. The split depends only on the shift and `n`, chunks run on the
//! current rayon pool, and results come back in chunk order, so every
//! reduction built on top has a fixed tree shape whatever the thread count.

use rayon::prelude::*;

use crate::cocycle::{PrefixEvaluator, Potential};
use crate::scalar::{Scalar, PairwiseSum};
use crate::symbolic::{SftSpec, Symbol, WordCursor};

/// Lower bound on the number of prefix chunks per sweep.
pub const TARGET_CHUNKS: usize = 256;

/// Runs `work` on a cursor for each prefix chunk; results in chunk order.
pub fn map_chunks<R, F>(sft: &SftSpec, n: usize, work: F) -> Vec<R>
where
    R: Send,
    F: Fn(WordCursor<'_>) -> R + Sync + Send,
{
    if n == 0 {
        return Vec::new();
    }
    let prefixes = sft.prefix_partition(n, TARGET_CHUNKS);
    prefixes
        .par_iter()
        .map(|prefix| work(WordCursor::with_prefix(sft, prefix, n)))
        .collect()
}

/// Folds `visit(acc, word, s(word))` over every admissible `n`-word, one
/// accumulator per chunk.
pub fn fold_values<T, A, I, V>(sft: &SftSpec, n: usize, potential: &Potential<T>, init: I, visit: V) -> Vec<A>
where
    T: Scalar,
    A: Send,
    I: Fn() -> A + Sync + Send,
    V: Fn(&mut A, &[Symbol], T) + Sync + Send,
{
    map_chunks(sft, n, |mut cursor| {
        let mut acc = init();
        let mut eval = PrefixEvaluator::new(potential);
        while let Some(changed) = cursor.advance() {
            eval.sync(cursor.word(), changed);
            visit(&mut acc, cursor.word(), eval.value());
        }
        acc
    })
}

/// `s(w)` for every admissible `n`-word, lexicographic order.
pub fn collect_values<T: Scalar>(sft: &SftSpec, n: usize, potential: &Potential<T>) -> Vec<T> {
    fold_values(sft, n, potential, Vec::new, |acc: &mut Vec<T>, _, v| acc.push(v))
        .into_iter()
        .flatten()
        .collect()
}

/// Words and their values, lexicographic order.
pub fn collect_words_and_values<T: Scalar>(
    sft: &SftSpec,
    n: usize,
    potential: &Potential<T>,
) -> (Vec<Vec<Symbol>>, Vec<T>) {
    let chunks = fold_values(sft, n, potential, || (Vec::new(), Vec::new()), |acc, w, v| {
        acc.0.push(w.to_vec());
        acc.1.push(v);
    });
    let mut words = Vec::new();
    let mut values = Vec::new();
    for (w, v) in chunks {
        words.extend(w);
        values.extend(v);
    }
    (words, values)
}

/// Maximum of `s(w)` over admissible `n`-words.
pub fn max_value<T: Scalar>(sft: &SftSpec, n: usize, potential: &Potential<T>) -> T {
    fold_values(sft, n, potential, T::neg_infinity, |m: &mut T, _, v| *m = m.max(v))
        .into_iter()
        .fold(T::neg_infinity(), T::max)
}

/// Streaming log-sum-exp of `t·s(w)` for every `t` in `ts` (all `t ≥ 0`).
///
/// First pass: `max s`. Second pass: per-`t` pairwise sums of
/// `exp(t·(s − max s))`, reduced across chunks by a fixed balanced tree.
pub fn log_partition<T: Scalar>(sft: &SftSpec, n: usize, ts: &[T], potential: &Potential<T>) -> Vec<T> {
    let top = max_value(sft, n, potential);
    let partials = fold_values(
        sft,
        n,
        potential,
        || vec![PairwiseSum::new(); ts.len()],
        |sums: &mut Vec<PairwiseSum<T>>, _, s| {
            for (acc, &t) in sums.iter_mut().zip(ts) {
                acc.push((t * (s - top)).exp());
            }
        },
    );
    let totals: Vec<Vec<T>> = partials
        .into_iter()
        .map(|sums| sums.iter().map(PairwiseSum::total).collect())
        .collect();
    let reduced = crate::scalar::tree_reduce(totals, |a, b| a.iter().zip(&b).map(|(&x, &y)| x + y).collect())
        .unwrap_or_else(|| vec![T::zero(); ts.len()]);
    ts.iter().zip(reduced).map(|(&t, sum)| t * top + sum.ln()).collect()
}

#![allow(dead_code)]

use lyapmax::{Matrix64, MatrixSet64, Potential64, SftSpec, Symbol};
use proptest::prelude::*;

/// Irreducible shifts on 1..=3 symbols.
pub fn sft() -> impl Strategy<Value = SftSpec> {
    (1usize..=3)
        .prop_flat_map(|k| proptest::collection::vec(proptest::collection::vec(0u8..=1, k), k))
        .prop_filter_map("not an irreducible shift", |rows| {
            SftSpec::new(&rows).ok()?.require_irreducible().ok()
        })
}

/// Full shift or an irreducible shift on two or three symbols.
pub fn sft_at_least_two() -> impl Strategy<Value = SftSpec> {
    sft().prop_filter("needs two symbols", |s| s.k() >= 2)
}

/// `k` well-conditioned `d×d` matrices with entries in `[−2, 2]`.
pub fn matrix_set(k: usize, d: usize) -> impl Strategy<Value = MatrixSet64> {
    proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, d * d), k).prop_filter_map(
        "ill-conditioned",
        move |mats| {
            let mats: Vec<Matrix64> = mats
                .into_iter()
                .map(|m| Matrix64::from_row_major(d, m).unwrap())
                .collect();
            if mats.iter().any(|m| m.determinant().abs() < 0.05) {
                return None;
            }
            MatrixSet64::new(mats).ok()
        },
    )
}

pub fn sft_and_matrices() -> impl Strategy<Value = (SftSpec, MatrixSet64)> {
    sft().prop_flat_map(|s| {
        let k = s.k();
        (Just(s), matrix_set(k, 2))
    })
}

pub fn full_and_matrices() -> impl Strategy<Value = (SftSpec, MatrixSet64)> {
    (1usize..=3).prop_flat_map(|k| (Just(SftSpec::full(k).unwrap()), matrix_set(k, 2)))
}

/// Admissible word of length `len` built by a random walk driven by `picks`.
pub fn walk(sft: &SftSpec, picks: &[usize]) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(picks.len());
    for (i, &r) in picks.iter().enumerate() {
        let next = if i == 0 {
            r % sft.k()
        } else {
            let succ = sft.successors(out[i - 1]);
            succ[r % succ.len()]
        };
        out.push(next);
    }
    out
}

pub fn picks(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(any::<usize>(), len)
}

pub fn matrix_potential(ms: &MatrixSet64) -> Potential64 {
    Potential64::MatrixNorm(ms.clone())
}

pub fn shear() -> MatrixSet64 {
    MatrixSet64::from_nested(&[
        vec![vec![1.0, 1.0], vec![0.0, 1.0]],
        vec![vec![1.0, 0.0], vec![1.0, 1.0]],
    ])
    .unwrap()
}

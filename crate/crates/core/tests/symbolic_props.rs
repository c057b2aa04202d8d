mod common;

use lyapmax::symbolic::{close_word, enumerate_words, is_cyclically_admissible};
use lyapmax::{SftSpec, SymbolicError, Word};
use proptest::prelude::*;

fn power_count(sft: &SftSpec, n: usize) -> u128 {
    // 1ᵀ Mⁿ⁻¹ 1 by repeated vector-matrix products
    let k = sft.k();
    let mut v = vec![1u128; k];
    for _ in 1..n {
        v = (0..k)
            .map(|j| (0..k).filter(|&i| sft.allows(i, j)).map(|i| v[i]).sum())
            .collect();
    }
    v.iter().sum()
}

#[test]
fn word_counts_match_matrix_powers_up_to_twelve() {
    let sfts = [
        SftSpec::full(2).unwrap(),
        SftSpec::full(3).unwrap(),
        SftSpec::golden_mean(),
        SftSpec::new(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]).unwrap(),
    ];
    for sft in &sfts {
        for n in 1..=12 {
            assert_eq!(enumerate_words(n, sft).count() as u128, power_count(sft, n));
            assert_eq!(sft.count_words(n), power_count(sft, n));
        }
    }
}

proptest! {
    #[test]
    fn enumeration_counts_and_order(sft in common::sft(), n in 1usize..=7) {
        let words: Vec<Word> = enumerate_words(n, &sft).collect();
        prop_assert_eq!(words.len() as u128, power_count(&sft, n));
        prop_assert!(words.windows(2).all(|p| p[0].symbols() < p[1].symbols()));
        prop_assert!(words.iter().all(|w| sft.is_admissible(w.symbols())));
    }

    #[test]
    fn closing_is_sound(sft in common::sft(), picks in common::picks(1..=40)) {
        let symbols = common::walk(&sft, &picks);
        let w = Word::new(symbols.clone()).unwrap();
        match close_word(&w, &sft) {
            Ok(orbit) => {
                prop_assert!(is_cyclically_admissible(orbit.word(), &sft));
                let sub = orbit.word().symbols();
                prop_assert!(symbols.windows(sub.len()).any(|win| win == sub));
            }
            Err(SymbolicError::NoClosure) => prop_assert!(symbols.len() <= sft.k()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn long_words_always_close(sft in common::sft(), picks in common::picks(4..=60)) {
        let symbols = common::walk(&sft, &picks);
        prop_assume!(symbols.len() > sft.k());
        prop_assert!(close_word(&Word::new(symbols).unwrap(), &sft).is_ok());
    }

    #[test]
    fn concatenation_stays_admissible(sft in common::sft(), a in common::picks(1..=12), b in common::picks(1..=12)) {
        let u = common::walk(&sft, &a);
        let v = common::walk(&sft, &b);
        prop_assume!(sft.allows(*u.last().unwrap(), v[0]));
        let uv: Vec<_> = u.iter().chain(&v).copied().collect();
        prop_assert!(sft.is_admissible(&uv));
    }

    #[test]
    fn word_text_round_trips(sft in common::sft(), picks in common::picks(1..=20)) {
        let w = Word::new(common::walk(&sft, &picks)).unwrap();
        prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
    }
}

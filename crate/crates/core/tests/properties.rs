//! Property-based tests for the structural laws: word arithmetic, letter
//! statistics, cocycle factorization, convolution algebra, and inversion
//! round-trips on random inputs.

use proptest::prelude::*;

use freestate_core::boundary::{cocycle_p, measure_from};
use freestate_core::eigenstate::{canonical_params, CanonicalParams, CoefficientVector};
use freestate_core::smap::{apply_s, invert_s, OrthantPoint};
use freestate_core::spectral::GroupFunction;
use freestate_core::words::{Letter, ReducedWord};

fn letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((1..=rank, any::<bool>()), 0..=max_len).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(i, pos)| if pos { Letter::positive(i) } else { Letter::negative(i) })
            .collect()
    })
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = ReducedWord> {
    letters(rank, max_len).prop_map(move |ls| ReducedWord::from_letters(rank, ls).unwrap())
}

fn p21() -> CanonicalParams {
    let cv = CoefficientVector::new(vec![2.0, 1.0], 2.0).unwrap();
    canonical_params(&cv, 1e-10).unwrap()
}

proptest! {
    #[test]
    fn construction_always_reduces(ls in letters(3, 14)) {
        let w = ReducedWord::from_letters(3, ls.clone()).unwrap();
        for pair in w.letters().windows(2) {
            prop_assert_ne!(pair[0], pair[1].inverse());
        }
        prop_assert!(w.len() <= ls.len());
        // text round-trip
        let back = ReducedWord::parse(&w.tokens(), 3).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn group_laws(a in word(3, 8), b in word(3, 8), c in word(3, 8)) {
        let ab_c = a.concat(&b).unwrap().concat(&c).unwrap();
        let a_bc = a.concat(&b.concat(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!(a.concat(&a.inverse()).unwrap().is_identity());
        let inv_ab = a.concat(&b).unwrap().inverse();
        prop_assert_eq!(inv_ab, b.inverse().concat(&a.inverse()).unwrap());
    }

    #[test]
    fn statistics_are_inverse_invariant(w in word(3, 12)) {
        let inv = w.inverse();
        for i in 1..=3 {
            prop_assert_eq!(w.letter_count(i), inv.letter_count(i));
            for j in 1..=3 {
                if i < j {
                    prop_assert_eq!(w.gamma_pair(i, j), inv.gamma_pair(i, j));
                }
            }
        }
        prop_assert_eq!(w.gamma_total(), inv.gamma_total());
    }

    #[test]
    fn push_is_single_letter_concat(w in word(2, 10), i in 1usize..=2, pos in any::<bool>()) {
        let l = if pos { Letter::positive(i) } else { Letter::negative(i) };
        let single = ReducedWord::from_letters(2, [l]).unwrap();
        prop_assert_eq!(w.push(l).unwrap(), w.concat(&single).unwrap());
    }

    #[test]
    fn cocycle_factorizes(r in word(2, 4), s in word(2, 4), raw in letters(2, 14)) {
        let p = p21();
        let needed = r.len() + s.len() + 1;
        let prefix = ReducedWord::from_letters(2, raw).unwrap();
        prop_assume!(prefix.len() >= needed);
        let rs = r.concat(&s).unwrap();
        let lhs = cocycle_p(&p, &rs, &prefix).unwrap();
        let translated = r.inverse().concat(&prefix).unwrap();
        let rhs = cocycle_p(&p, &r, &prefix).unwrap() * cocycle_p(&p, &s, &translated).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn measure_of_any_cylinder_is_a_probability(raw in letters(2, 8)) {
        let p = p21();
        let m = measure_from(&p);
        let w = ReducedWord::from_letters(2, raw).unwrap();
        let mass = m.mu_hat(&w).unwrap();
        prop_assert!((0.0..=1.0).contains(&mass));
    }

    #[test]
    fn convolution_is_associative(
        fa in prop::collection::vec((word(2, 3), -2.0f64..2.0), 1..4),
        fb in prop::collection::vec((word(2, 3), -2.0f64..2.0), 1..4),
        fc in prop::collection::vec((word(2, 3), -2.0f64..2.0), 1..4),
    ) {
        let f = GroupFunction::from_terms(2, fa).unwrap();
        let g = GroupFunction::from_terms(2, fb).unwrap();
        let h = GroupFunction::from_terms(2, fc).unwrap();
        let left = f.convolve(&g).unwrap().convolve(&h).unwrap();
        let right = f.convolve(&g.convolve(&h).unwrap()).unwrap();
        let diff = left.sub(&right).unwrap();
        let scale = 1.0 + left.l2_norm();
        prop_assert!(diff.l2_norm() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inversion_round_trip(
        n in 2usize..=4,
        raw in prop::collection::vec(0.1f64..5.0, 4),
    ) {
        let x: Vec<f64> = raw.into_iter().take(n).collect();
        prop_assume!(x.len() == n);
        let p = OrthantPoint::new(x.clone()).unwrap();
        let q = apply_s(&p);
        let back = invert_s(&q, 1e-10).unwrap();
        for (a, b) in x.iter().zip(back.x()) {
            prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }
}

use amplify_core::decode::{
    cascade_unique_decode, list_decode_level, BruteForceBackend, LevelView, ListDecoderBackend, RoundingBackend,
};
use amplify_core::f2::{code_bias, random_balanced_code, within_list_radius};
use amplify_core::graphs::{cayley_graph, Group};
use amplify_core::lifting::{build_cascade, direct_sum_lift, Cascade};
use amplify_core::rpp::WideReplacementProduct;
use amplify_core::{Rational, Word};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cycle_product(n: u64) -> WideReplacementProduct {
    let g = cayley_graph(Group::Cyclic(n), &[1, n - 1]).unwrap();
    let h = cayley_graph(Group::Binary(2), &[1, 2]).unwrap();
    WideReplacementProduct::new(g, h, 2).unwrap()
}

fn cascade(n: u64, dim: usize, depth: usize, top: usize, seed: u64, eps0: Rational) -> Option<Cascade> {
    let base = random_balanced_code(dim, n as usize, eps0, seed).ok()?;
    build_cascade(&base, &cycle_product(n), depth, top).ok()
}

fn word(bits: u64, len: usize) -> Word {
    Word::from_u64(bits, len).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn encoding_is_linear_and_factors_through_the_base(
        n in prop::sample::select(vec![8u64, 16]),
        dim in 2usize..5,
        depth in 1usize..3,
        top in 2usize..5,
        seed in 0u64..1000,
        a in any::<u64>(),
        b in any::<u64>(),
    ) {
        let Some(c) = cascade(n, dim, depth, top, seed, Rational::new(3, 4)) else { return Ok(()) };
        let (ma, mb) = (word(a & ((1 << dim) - 1), dim), word(b & ((1 << dim) - 1), dim));
        let sum = ma.xor(&mb).unwrap();
        prop_assert_eq!(c.encode(&sum).unwrap(), c.encode(&ma).unwrap().xor(&c.encode(&mb).unwrap()).unwrap());
        let z0 = c.base().encode(&ma).unwrap();
        prop_assert_eq!(c.encode(&ma).unwrap(), c.lift_from_base(depth, &z0).unwrap());
        let mut z = z0;
        for i in 1..=depth {
            z = direct_sum_lift(&z, &c.level(i).walks).unwrap();
        }
        prop_assert_eq!(c.encode(&ma).unwrap(), z);
        let top_tuple = c.top().base_tuple(0).len();
        prop_assert_eq!(c.total_length(), top_tuple);
        prop_assert_eq!(c.total_length(), if depth == 1 { top } else { 2 * top });
    }

    #[test]
    fn unique_decoding_recovers_within_half_the_distance(
        seed in 0u64..40,
        message in 0u64..8,
        flips in any::<u64>(),
    ) {
        let Some(c) = cascade(64, 3, 2, 3, seed, Rational::new(1, 2)) else { return Ok(()) };
        let top = c.code(2);
        let eta = code_bias(top).unwrap();
        let dmin = top.min_distance().unwrap();
        let n = top.len();
        // The unique radius must sit inside the list radius for the top list to contain the truth.
        prop_assume!(within_list_radius((dmin - 1) / 2, n, eta));
        let m = word(message, 3);
        let mut y = c.encode(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(flips);
        let r = (flips as usize) % ((dmin - 1) / 2 + 1);
        for i in sample(&mut rng, n, r) {
            y.flip(i);
        }
        let decoded = cascade_unique_decode(&c, &BruteForceBackend, &y, eta).unwrap();
        prop_assert_eq!(decoded.codeword, Some(c.base().encode(&m).unwrap()));
    }

    #[test]
    fn list_decoders_agree_with_enumeration(seed in 0u64..1000, noise in any::<u64>()) {
        let Some(c) = cascade(8, 3, 1, 3, seed, Rational::new(3, 4)) else { return Ok(()) };
        let level = LevelView::of(&c, 1);
        let n = level.lifted.len();
        let mut rng = ChaCha8Rng::seed_from_u64(noise);
        let y = Word::random(n, &mut rng).unwrap();
        let eta = Rational::new(1, 64);
        let list = list_decode_level(&BruteForceBackend, &level, &y, eta).unwrap();
        let mut expected = Vec::new();
        for z in level.code.codewords().unwrap() {
            let lifted = direct_sum_lift(&z, level.walks).unwrap();
            if within_list_radius(lifted.hamming(&y).unwrap(), n, eta) {
                expected.push(z);
            }
        }
        expected.sort();
        prop_assert_eq!(list.words(), expected.clone());
        for e in &list.entries {
            prop_assert_eq!(&e.y, &direct_sum_lift(&e.z, level.walks).unwrap());
        }
        let rounding = RoundingBackend { l: 2, trials: 4, seed: noise };
        for z in rounding.decode(&level, &y, eta).unwrap().words() {
            prop_assert!(expected.contains(&z));
        }
    }
}

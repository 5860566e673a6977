use amplify_core::f2::{format_code, format_words, parse_code, parse_words, random_balanced_code};
use amplify_core::graphs::{cayley_graph, format_graph, format_rotation_table, parse_graph, Group};
use amplify_core::lifting::{format_walks, parse_tree, parse_walks, SplittingTree, WalkCollection};
use amplify_core::rpp::WideReplacementProduct;
use amplify_core::{Rational, Word};
use proptest::prelude::*;

#[test]
fn codes_round_trip() {
    let c = random_balanced_code(4, 24, Rational::new(2, 3), 3).unwrap();
    let back = parse_code(&format_code(&c)).unwrap();
    assert_eq!(back.rows(), c.rows());
    assert!(parse_code("code 2 3\n101\n").is_err());
}

#[test]
fn graphs_round_trip_in_both_forms() {
    let g = cayley_graph(Group::Cyclic(12), &[1, 11, 5, 7]).unwrap();
    for text in [format_graph(&g), format_rotation_table(&g)] {
        let back = parse_graph(&text).unwrap();
        assert_eq!((back.n(), back.degree()), (12, 4));
        for v in 0..12 {
            for j in 0..4 {
                assert_eq!(back.rot(v, j), g.rot(v, j));
            }
        }
    }
    assert_eq!(format_graph(&g), "cayley z12 1,11,5,7\n");
    assert!(parse_graph("graph 2 1\n0 0 1 0\n").is_err());
}

#[test]
fn product_walks_round_trip() {
    let g = cayley_graph(Group::Cyclic(6), &[1, 5]).unwrap();
    let h = cayley_graph(Group::Binary(2), &[1, 2]).unwrap();
    let p = WideReplacementProduct::new(g, h, 2).unwrap();
    let w = WalkCollection::from_walk_space(&p, 0, 2, 1 << 20).unwrap();
    let back = parse_walks(&format_walks(&w)).unwrap();
    assert_eq!((back.arity(), back.ground_size(), back.tuples()), (w.arity(), w.ground_size(), w.tuples()));
}

#[test]
fn every_tree_round_trips() {
    for k in 2..7 {
        for tree in SplittingTree::all(k).unwrap() {
            assert_eq!(parse_tree(&tree.to_string()).unwrap(), tree);
        }
    }
    assert!(parse_tree("tree 3\n0 0 2\n").is_err());
}

proptest! {
    #[test]
    fn words_round_trip(bits in prop::collection::vec(prop::collection::vec(0u8..2, 1..40), 0..6)) {
        let words: Vec<Word> = bits.iter().map(|b| Word::from_bits(b).unwrap()).collect();
        prop_assert_eq!(parse_words(&format_words(&words)).unwrap(), words);
    }

    #[test]
    fn explicit_walks_round_trip(arity in 1usize..5, ground in 1usize..30, raw in prop::collection::vec(any::<u32>(), 4..40)) {
        let count = raw.len() / arity;
        let tuples: Vec<u32> = raw[..count * arity].iter().map(|x| x % ground as u32).collect();
        let w = WalkCollection::explicit(arity, ground, tuples).unwrap();
        let back = parse_walks(&format_walks(&w)).unwrap();
        prop_assert_eq!(back.tuples(), w.tuples());
    }
}

//! Fixtures shared by the benchmarks under `benches/`.

use amplify_core::f2::random_balanced_code;
use amplify_core::graphs::{cayley_graph, Group};
use amplify_core::lifting::{build_cascade, Cascade};
use amplify_core::rpp::WideReplacementProduct;
use amplify_core::{LinearCode, Rational};

/// Cay(Z_n, ±1) with H = Cay(F_2^2, {1, 2}) at width 2.
pub fn cycle_product(n: u64) -> WideReplacementProduct {
    let g = cayley_graph(Group::Cyclic(n), &[1, n - 1]).expect("cycle");
    let h = cayley_graph(Group::Binary(2), &[1, 2]).expect("square");
    WideReplacementProduct::new(g, h, 2).expect("product")
}

/// Cay(Z_5, {1,4,2,3}) with H = Cay(F_2^4, {1,2,4,8,15}) at width 2.
pub fn k5_product() -> WideReplacementProduct {
    let g = cayley_graph(Group::Cyclic(5), &[1, 4, 2, 3]).expect("K5");
    let h = cayley_graph(Group::Binary(4), &[1, 2, 4, 8, 15]).expect("H");
    WideReplacementProduct::new(g, h, 2).expect("product")
}

pub fn base_code(dim: usize, n: usize) -> LinearCode {
    random_balanced_code(dim, n, Rational::new(1, 2), 0).expect("base code")
}

/// Two levels over the 64-cycle with top arity 3 and a dimension-3 base code.
pub fn decode_cascade() -> Cascade {
    build_cascade(&base_code(3, 64), &cycle_product(64), 2, 3).expect("cascade")
}

// SPDX-License-Identifier: Apache-2.0

//! Small gadget families used throughout the tests and examples.
//!
//! `toy()` has q = 2, k2 = k3 = 1. Only `G0` carries a self-loop, so
//! "there is a fixed point" holds on the glued dynamics exactly when some copy
//! is `G0`. `ntoy()` adds the arc `1 → 2` to `G0`, making it
//! non-deterministic. `toy_uniform()` has the same gadgets with constants
//! chosen so that the total is `2^(s+4)` for every `s`.

use super::{GammaConstants, GammaSpec};

pub const TOY_JSON: &str = r#"{"q":2,"k2":1,"k3":1,"constants":{"a":1,"b":1,"mu":1,"alpha":1,"log_q_alpha":0},"graphs":{"G0":{"size":4,"arcs":[[0,1],[1,1]]},"G1":{"size":4,"arcs":[[0,1],[1,2]]},"G2":{"size":3,"arcs":[[0,1]]},"G3":{"size":7,"arcs":[[0,1],[1,2],[2,3],[3,4],[4,5],[5,6],[6,0]]},"G4":{"size":4,"arcs":[[0,1],[1,2]]}}}"#;

pub const TOY_CONSTANTS: GammaConstants = GammaConstants {
    a: 1,
    b: 1,
    mu: 1,
    alpha: 1,
    log_q_alpha: 0,
};

/// `L(s) = 4·(2^(s+1) − 1) − 2^s`, giving `T = 2^(s+4)` with the toy gadgets.
pub const TOY_UNIFORM_CONSTANTS: GammaConstants = GammaConstants {
    a: 1,
    b: 4,
    mu: 1,
    alpha: 1,
    log_q_alpha: 0,
};

/// `(size, arcs)` for `G0 … G4`.
pub fn toy_gadgets() -> [(usize, Vec<(usize, usize)>); 5] {
    [
        (4, vec![(0, 1), (1, 1)]),
        (4, vec![(0, 1), (1, 2)]),
        (3, vec![(0, 1)]),
        (7, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 0)]),
        (4, vec![(0, 1), (1, 2)]),
    ]
}

pub fn toy() -> GammaSpec {
    GammaSpec::new(2, 1, 1, TOY_CONSTANTS, toy_gadgets()).expect("toy family is valid")
}

pub fn toy_uniform() -> GammaSpec {
    GammaSpec::new(2, 1, 1, TOY_UNIFORM_CONSTANTS, toy_gadgets()).expect("toy family is valid")
}

pub fn ntoy_gadgets() -> [(usize, Vec<(usize, usize)>); 5] {
    let mut g = toy_gadgets();
    g[0].1.push((1, 2));
    g
}

pub fn ntoy() -> GammaSpec {
    GammaSpec::new(2, 1, 1, TOY_CONSTANTS, ntoy_gadgets()).expect("ntoy family is valid")
}

pub fn ntoy_uniform() -> GammaSpec {
    GammaSpec::new(2, 1, 1, TOY_UNIFORM_CONSTANTS, ntoy_gadgets()).expect("ntoy family is valid")
}

/// Formulas over one to three variables: satisfiable, unsatisfiable and
/// tautologies.
pub const FORMULA_SUITE: &[&str] = &[
    "x1",
    "!x1",
    "x1 & !x1",
    "x1 | !x1",
    "x1 & x2",
    "x1 | x2",
    "!x1 & !x2",
    "(x1 | x2) & (!x1 | !x2)",
    "(x1 | x2) & (x1 | !x2) & (!x1 | x2) & (!x1 | !x2)",
    "(x1 | !x1) & (x2 | !x2)",
    "x1 & x2 & x3",
    "(x1 | x2 | x3) & !x1 & !x2 & !x3",
    "(x1 | !x2) & (x2 | !x3) & (x3 | !x1)",
    "!x1 & x2 & !x3",
    "x3",
];

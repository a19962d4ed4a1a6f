//! Shared fixtures for the benchmarks.

use aen_shaping::{
    build_constellation, gray_labels, BitLabeling, Constellation, Family, GOLDEN_LAMBDA,
};

/// A constellation with its Gray labeling.
pub fn labeled(family: Family, m: usize) -> (Constellation, BitLabeling) {
    let c = build_constellation(family, m, GOLDEN_LAMBDA).expect("valid size");
    let l = gray_labels(m).expect("power of two");
    (c, l)
}

//! Shared foundations: function classes, empirical distributions, bitstrings,
//! seeded random streams, and the little linear algebra the crate needs.

mod bits;
mod class;
mod linalg;
mod rng;

pub use bits::{decode_gamma, encode_gamma, gamma_len, BitCursor, BitString};
pub use class::{
    load_class, save_class, EmpiricalDistribution, FiniteFunctionClass, FunctionValues, LoadedClass,
};
pub use linalg::{second_moment_top_eig, top_eig_with_vector, Matrix};
pub use rng::RandomStream;

/// Number of bits needed for a fixed-width index into `n` items (0 for `n <= 1`).
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }
}

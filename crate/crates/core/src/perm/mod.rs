//! Permutation-sum formula for the normalized determinant.

mod formula;
mod group;

pub use formula::{
    pairwise_sum, perm_formula_d, perm_formula_d_sampled, perm_formula_d_sampled_table, perm_formula_d_table,
    perm_formula_d_with, sigma_delta_ratio, KahanSum, PermOptions, RatioKernel, SampledEstimate,
    DEFAULT_CHUNKS, DEFAULT_MAX_EXACT_N,
};
pub use group::{c_n, group_order, lex_permutations, GroupEnumerator, RowPermutation};

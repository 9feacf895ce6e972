//! Rotation-invariant expressions in the directions `v_ab`: products of
//! inner products `(v_ab, v_cd)` and triple products `det(v_ab, v_cd, v_ef)`
//! with exact rational coefficients, relabelings by the symmetric group,
//! and group averages.

mod eval;
mod expr;
mod n4;
mod term;

pub use eval::{averaged_expansion, eval_factor, eval_term, group_average, group_average_dirs, Directions};
pub use expr::{AngularExpression, FactorKind, FactorRecord, TermRecord};
pub use n4::{angular_d4, imag_part, real_part, IMAG_SUM_COEFFICIENT};
pub use term::{v, Factor, InvariantTerm, Monomial, PairIndex};

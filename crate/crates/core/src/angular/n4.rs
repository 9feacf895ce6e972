//! Closed angular expression of `D` for four points.
//!
//! ```text
//! Re D = 3/8 + 3/2 Av((v12,v13)) + 3/2 Av((v12,v13)(v14,v24))
//!            + 3/8 Av((v12,v34)(v13,v24)) + 1/2 Av((v12,v14)(v13,v23)(v24,v34))
//! Im D = -3/4 Av(det(v12,v13,v24)) - 3/4 Av(det(v12,v14,v23)(v24,v34))
//! ```
//!
//! `Av` is the mean over all 24 relabelings. Against the plain sum over the
//! relabelings the two imaginary coefficients read `-1/32` each.

use std::sync::OnceLock;

use super::eval::Directions;
use super::expr::AngularExpression;
use super::term::{v, Factor, InvariantTerm};
use crate::det::{DeterminantResult, Method};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::scalar::{Cplx, Real};
use crate::Coefficient;

/// Imaginary coefficients when `Av` is replaced by the unnormalized sum over Σ₄.
pub const IMAG_SUM_COEFFICIENT: (i64, i64) = (-1, 32);

fn q(n: i64, d: i64) -> Coefficient {
    Coefficient::new(n, d)
}

/// The real part as an averaged expression.
pub fn real_part() -> AngularExpression {
    AngularExpression::new(
        4,
        true,
        [
            InvariantTerm::constant(q(3, 8)),
            InvariantTerm::new(q(3, 2), vec![Factor::dot(v(1, 2), v(1, 3))]),
            InvariantTerm::new(q(3, 2), vec![Factor::dot(v(1, 2), v(1, 3)), Factor::dot(v(1, 4), v(2, 4))]),
            InvariantTerm::new(q(3, 8), vec![Factor::dot(v(1, 2), v(3, 4)), Factor::dot(v(1, 3), v(2, 4))]),
            InvariantTerm::new(
                q(1, 2),
                vec![Factor::dot(v(1, 2), v(1, 4)), Factor::dot(v(1, 3), v(2, 3)), Factor::dot(v(2, 4), v(3, 4))],
            ),
        ],
    )
    .expect("labels within 1..=4")
}

/// The imaginary part as an averaged expression.
pub fn imag_part() -> AngularExpression {
    let (num, den) = IMAG_SUM_COEFFICIENT;
    let c = q(num * 24, den);
    AngularExpression::new(
        4,
        true,
        [
            InvariantTerm::new(c, vec![Factor::det(v(1, 2), v(1, 3), v(2, 4))]),
            InvariantTerm::new(c, vec![Factor::det(v(1, 2), v(1, 4), v(2, 3)), Factor::dot(v(2, 4), v(3, 4))]),
        ],
    )
    .expect("labels within 1..=4")
}

fn expanded() -> &'static (AngularExpression, AngularExpression) {
    static CELL: OnceLock<(AngularExpression, AngularExpression)> = OnceLock::new();
    CELL.get_or_init(|| {
        (real_part().expanded().expect("n = 4"), imag_part().expanded().expect("n = 4"))
    })
}

/// `D` for four points from the angular expression.
pub fn angular_d4<T: Real>(c: &Configuration<T>) -> Result<DeterminantResult<T>> {
    if c.n() != 4 {
        return Err(Error::WrongN { expected: 4, got: c.n() });
    }
    let dirs = Directions::new(c);
    let (re, im) = expanded();
    Ok(DeterminantResult {
        d: Cplx::new(re.eval_dirs(&dirs)?, im.eval_dirs(&dirs)?),
        det_a: None,
        delta: None,
        method: Method::AngularN4,
        ill_conditioned: c.is_near_coincident(),
    })
}

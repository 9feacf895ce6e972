//! Formal products of dot and triple-product factors of direction vectors.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Coefficient;

/// The direction `v_ab` as an ordered pair of 1-based point labels.
/// Canonical when `a < b`; `v_ba = -v_ab` is resolved by [`PairIndex::oriented`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairIndex {
    a: u8,
    b: u8,
}

impl PairIndex {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b || a == 0 || b == 0 || a > u8::MAX as usize || b > u8::MAX as usize {
            return Err(Error::InvalidInput(format!("({a}, {b}) is not a pair of distinct labels")));
        }
        Ok(Self { a: a as u8, b: b as u8 })
    }


    pub fn a(self) -> usize {
        self.a as usize
    }

    pub fn b(self) -> usize {
        self.b as usize
    }

    pub fn max_label(self) -> usize {
        self.a.max(self.b) as usize
    }

    /// Canonical pair and the sign relating it to `self`.
    pub fn oriented(self) -> (Self, i64) {
        if self.a < self.b {
            (self, 1)
        } else {
            (Self { a: self.b, b: self.a }, -1)
        }
    }

    /// Replaces each label `x` by `perm[x - 1] + 1`.
    pub fn relabel(self, perm: &[usize]) -> Self {
        Self { a: (perm[self.a as usize - 1] + 1) as u8, b: (perm[self.b as usize - 1] + 1) as u8 }
    }
}

impl fmt::Display for PairIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}{}", self.a, self.b)
    }
}

/// `(v, w)` or `det(u, v, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Dot([PairIndex; 2]),
    Det([PairIndex; 3]),
}

impl Factor {
    pub fn dot(p: PairIndex, q: PairIndex) -> Self {
        Factor::Dot([p, q])
    }

    pub fn det(p: PairIndex, q: PairIndex, r: PairIndex) -> Self {
        Factor::Det([p, q, r])
    }

    pub fn pairs(&self) -> &[PairIndex] {
        match self {
            Factor::Dot(p) => p,
            Factor::Det(p) => p,
        }
    }

    pub fn slots(&self) -> usize {
        self.pairs().len()
    }

    pub fn is_det(&self) -> bool {
        matches!(self, Factor::Det(_))
    }

    pub fn max_label(&self) -> usize {
        self.pairs().iter().map(|p| p.max_label()).max().unwrap_or(0)
    }

    fn relabel(&self, perm: &[usize]) -> Self {
        match self {
            Factor::Dot(p) => Factor::Dot(p.map(|x| x.relabel(perm))),
            Factor::Det(p) => Factor::Det(p.map(|x| x.relabel(perm))),
        }
    }

    /// Canonical form of a single factor: `None` if the factor is identically
    /// zero, `Some((sign, None))` if it is identically one, otherwise the
    /// canonical factor with the sign it absorbed.
    fn canonical(&self) -> Option<(i64, Option<Factor>)> {
        match self {
            Factor::Dot(ps) => {
                let (p, s1) = ps[0].oriented();
                let (q, s2) = ps[1].oriented();
                let sign = s1 * s2;
                if p == q {
                    // unit vector with itself
                    return Some((sign, None));
                }
                let (p, q) = if p <= q { (p, q) } else { (q, p) };
                Some((sign, Some(Factor::Dot([p, q]))))
            }
            Factor::Det(ps) => {
                let mut sign = 1;
                let mut q = ps.map(|x| {
                    let (p, s) = x.oriented();
                    sign *= s;
                    p
                });
                if q[0] == q[1] || q[1] == q[2] || q[0] == q[2] {
                    return None;
                }
                // three directions among three points lie in their common plane
                let mut labels: Vec<u8> = q.iter().flat_map(|p| [p.a, p.b]).collect();
                labels.sort_unstable();
                labels.dedup();
                if labels.len() <= 3 {
                    return None;
                }
                // insertion sort, one sign flip per transposition
                for i in 1..3 {
                    let mut j = i;
                    while j > 0 && q[j - 1] > q[j] {
                        q.swap(j - 1, j);
                        sign = -sign;
                        j -= 1;
                    }
                }
                Some((sign, Some(Factor::Det(q))))
            }
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Dot([p, q]) => write!(f, "({p},{q})"),
            Factor::Det([p, q, r]) => write!(f, "det({p},{q},{r})"),
        }
    }
}

/// A product of factors without coefficient.
///
/// The canonical form of a monomial is the sorted list of canonical factors;
/// the total order on monomials is the lexicographic order of that list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<Factor>);

impl Monomial {
    pub fn constant() -> Self {
        Self(Vec::new())
    }

    pub fn new(factors: Vec<Factor>) -> Self {
        Self(factors)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn slots(&self) -> usize {
        self.0.iter().map(Factor::slots).sum()
    }

    pub fn det_count(&self) -> usize {
        self.0.iter().filter(|f| f.is_det()).count()
    }

    pub fn max_label(&self) -> usize {
        self.0.iter().map(Factor::max_label).max().unwrap_or(0)
    }

    /// Canonical monomial and sign, or `None` if identically zero.
    pub fn canonical(&self) -> Option<(i64, Monomial)> {
        let mut sign = 1;
        let mut out = Vec::with_capacity(self.0.len());
        for f in &self.0 {
            let (s, g) = f.canonical()?;
            sign *= s;
            out.extend(g);
        }
        out.sort_unstable();
        Some((sign, Monomial(out)))
    }

    /// Relabeled and canonicalized.
    pub fn relabel(&self, perm: &[usize]) -> Option<(i64, Monomial)> {
        Monomial(self.0.iter().map(|f| f.relabel(perm)).collect()).canonical()
    }

    /// Simplicity order used for basis listings: fewer triple products,
    /// then fewer slots, then the canonical order.
    pub fn simplicity_key(&self) -> (usize, usize, &Monomial) {
        (self.det_count(), self.slots(), self)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// A rational multiple of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InvariantTerm {
    pub coeff: Coefficient,
    pub monomial: Monomial,
}

impl InvariantTerm {
    pub fn new(coeff: Coefficient, factors: Vec<Factor>) -> Self {
        Self { coeff, monomial: Monomial(factors) }
    }

    pub fn constant(coeff: Coefficient) -> Self {
        Self { coeff, monomial: Monomial::constant() }
    }

    pub fn factors(&self) -> &[Factor] {
        self.monomial.factors()
    }

    pub fn slots(&self) -> usize {
        self.monomial.slots()
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Orientation signs folded into the coefficient, operands and factors
    /// sorted, identically vanishing triple products mapped to the zero term
    /// and self inner products removed. Idempotent.
    pub fn canonicalize(&self) -> InvariantTerm {
        match self.monomial.canonical() {
            Some((s, m)) if !self.coeff.is_zero() => {
                InvariantTerm { coeff: self.coeff * Coefficient::from_integer(s), monomial: m }
            }
            _ => InvariantTerm::constant(Coefficient::zero()),
        }
    }

    /// Substitutes `a -> perm[a-1]+1` in every pair (0-based `perm`), then canonicalizes.
    pub fn apply_relabeling(&self, perm: &[usize]) -> InvariantTerm {
        match self.monomial.relabel(perm) {
            Some((s, m)) if !self.coeff.is_zero() => {
                InvariantTerm { coeff: self.coeff * Coefficient::from_integer(s), monomial: m }
            }
            _ => InvariantTerm::constant(Coefficient::zero()),
        }
    }

    pub fn unit(monomial: Monomial) -> Self {
        Self { coeff: Coefficient::one(), monomial }
    }
}

impl fmt::Display for InvariantTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * {}", self.coeff, self.monomial)
    }
}

/// Shorthand constructors for tests and hard-coded formulas; labels are 1-based.
pub fn v(a: usize, b: usize) -> PairIndex {
    PairIndex::new(a, b).expect("distinct nonzero labels")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::lex_permutations;
    use std::collections::HashSet;

    fn q(n: i64, d: i64) -> Coefficient {
        Coefficient::new(n, d)
    }

    #[test]
    fn canonicalize_examples() {
        let t = InvariantTerm::new(q(1, 1), vec![Factor::dot(v(2, 1), v(1, 3))]).canonicalize();
        assert_eq!(t, InvariantTerm::new(q(-1, 1), vec![Factor::dot(v(1, 2), v(1, 3))]));

        let t = InvariantTerm::new(q(1, 1), vec![Factor::det(v(1, 3), v(1, 2), v(2, 4))]).canonicalize();
        assert_eq!(t, InvariantTerm::new(q(-1, 1), vec![Factor::det(v(1, 2), v(1, 3), v(2, 4))]));

        let t = InvariantTerm::new(q(1, 1), vec![Factor::det(v(1, 2), v(1, 2), v(3, 4))]).canonicalize();
        assert!(t.is_zero());

        let t = InvariantTerm::new(q(1, 1), vec![Factor::det(v(1, 2), v(3, 1), v(2, 3))]).canonicalize();
        assert!(t.is_zero(), "triangle directions are coplanar");

        let t = InvariantTerm::new(q(2, 3), vec![Factor::dot(v(2, 1), v(1, 2)), Factor::dot(v(3, 4), v(1, 2))])
            .canonicalize();
        assert_eq!(t, InvariantTerm::new(q(-2, 3), vec![Factor::dot(v(1, 2), v(3, 4))]));
    }

    #[test]
    fn det_sign_tracks_parity() {
        let base = [v(1, 2), v(1, 3), v(2, 4)];
        for p in lex_permutations(3) {
            let parity = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let f = Factor::det(base[p[0]], base[p[1]], base[p[2]]);
            let t = InvariantTerm::new(q(1, 1), vec![f]).canonicalize();
            assert_eq!(t.coeff, q(if parity % 2 == 0 { 1 } else { -1 }, 1));
        }
    }

    #[test]
    fn relabeling_examples() {
        let t = InvariantTerm::new(q(1, 1), vec![Factor::dot(v(1, 2), v(1, 3))]);
        assert_eq!(t.apply_relabeling(&[0, 1, 2, 3]), t);
        assert_eq!(
            t.apply_relabeling(&[1, 0, 2, 3]),
            InvariantTerm::new(q(-1, 1), vec![Factor::dot(v(1, 2), v(2, 3))])
        );
    }

    #[test]
    fn orbit_size_of_dot_at_common_vertex() {
        let t = InvariantTerm::new(q(1, 1), vec![Factor::dot(v(1, 2), v(1, 3))]);
        let orbit: HashSet<_> =
            lex_permutations(4).iter().map(|p| t.apply_relabeling(p).monomial).collect();
        // choice of the shared vertex (4) and of the unordered pair of far ends (3)
        assert_eq!(orbit.len(), 12);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let terms = [
            InvariantTerm::new(q(3, 2), vec![Factor::dot(v(4, 1), v(3, 2)), Factor::det(v(2, 4), v(1, 3), v(2, 1))]),
            InvariantTerm::new(q(-1, 5), vec![Factor::dot(v(3, 4), v(2, 1)), Factor::dot(v(2, 1), v(3, 4))]),
            InvariantTerm::constant(q(7, 1)),
        ];
        for t in terms {
            let c = t.canonicalize();
            assert_eq!(c.canonicalize(), c);
            assert!(c.factors().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn pair_validation() {
        assert!(PairIndex::new(1, 1).is_err());
        assert!(PairIndex::new(0, 2).is_err());
        assert_eq!(v(3, 1).oriented(), (v(1, 3), -1));
    }
}

use std::collections::BTreeMap;

use num_traits::Zero;

use super::term::{Factor, InvariantTerm, Monomial, PairIndex};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, UnitVector};
use crate::perm::lex_permutations;
use crate::scalar::Real;
use crate::Coefficient;

/// Unit vectors `v_ab`, `a < b`, of one configuration.
#[derive(Debug, Clone)]
pub struct Directions<T> {
    n: usize,
    vectors: Vec<UnitVector<T>>,
}

impl<T: Real> Directions<T> {
    pub fn new(c: &Configuration<T>) -> Self {
        let n = c.n();
        let mut vectors = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                // the lower triangle is never read; fill with the oriented vector anyway
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                vectors.push(if a == b { c.direction(0, 1) } else { c.direction(lo, hi) });
            }
        }
        Self { n, vectors }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `v_ab` for any ordered pair of labels within range.
    #[inline]
    pub fn get(&self, p: PairIndex) -> UnitVector<T> {
        let (q, s) = p.oriented();
        let v = self.vectors[(q.a() - 1) * self.n + q.b() - 1];
        if s < 0 {
            -v
        } else {
            v
        }
    }

    fn check(&self, max_label: usize) -> Result<()> {
        if max_label > self.n {
            return Err(Error::IndexOutOfRange { index: max_label, n: self.n });
        }
        Ok(())
    }

    #[inline]
    fn factor_unchecked(&self, f: &Factor) -> T {
        match f {
            Factor::Dot([p, q]) => self.get(*p).dot(self.get(*q)),
            Factor::Det([p, q, r]) => self.get(*p).triple(self.get(*q), self.get(*r)),
        }
    }

    pub fn factor(&self, f: &Factor) -> Result<T> {
        self.check(f.max_label())?;
        Ok(self.factor_unchecked(f))
    }

    pub fn monomial(&self, m: &Monomial) -> Result<T> {
        self.check(m.max_label())?;
        Ok(m.factors().iter().fold(T::one(), |acc, f| acc * self.factor_unchecked(f)))
    }

    pub fn term(&self, t: &InvariantTerm) -> Result<T> {
        Ok(coeff_to_real::<T>(t.coeff) * self.monomial(&t.monomial)?)
    }
}

pub(crate) fn coeff_to_real<T: Real>(c: Coefficient) -> T {
    T::from_i64(*c.numer()).expect("numerator") / T::from_i64(*c.denom()).expect("denominator")
}

/// Inner product or triple product of directions of `c`.
pub fn eval_factor<T: Real>(c: &Configuration<T>, f: &Factor) -> Result<T> {
    Directions::new(c).factor(f)
}

pub fn eval_term<T: Real>(c: &Configuration<T>, t: &InvariantTerm) -> Result<T> {
    Directions::new(c).term(t)
}

/// `Av(t)` written out exactly: `(1/n!) Σ_π π·t` with equal monomials
/// merged. An empty expansion means the average vanishes identically.
pub fn averaged_expansion(t: &InvariantTerm, n: usize) -> Result<Vec<InvariantTerm>> {
    if t.monomial.max_label() > n {
        return Err(Error::IndexOutOfRange { index: t.monomial.max_label(), n });
    }
    if n > 8 {
        return Err(Error::TooLarge { n, max: 8 });
    }
    let perms = lex_permutations(n);
    let order = Coefficient::from_integer(perms.len() as i64);
    let mut acc: BTreeMap<Monomial, Coefficient> = BTreeMap::new();
    for p in &perms {
        let r = t.apply_relabeling(p);
        if !r.is_zero() {
            *acc.entry(r.monomial).or_insert_with(Coefficient::zero) += r.coeff;
        }
    }
    Ok(acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(monomial, c)| InvariantTerm { coeff: c / order, monomial })
        .collect())
}

/// `(1/n!) Σ_{π∈Σ_n} eval(π·t)` over the configuration's own `n`.
pub fn group_average<T: Real>(c: &Configuration<T>, t: &InvariantTerm) -> Result<T> {
    group_average_dirs(&Directions::new(c), t)
}

pub fn group_average_dirs<T: Real>(dirs: &Directions<T>, t: &InvariantTerm) -> Result<T> {
    let expansion = averaged_expansion(t, dirs.n())?;
    expansion.iter().try_fold(T::zero(), |acc, s| Ok(acc + dirs.term(s)?))
}

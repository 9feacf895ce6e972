use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::eval::{averaged_expansion, Directions};
use super::term::{Factor, InvariantTerm, Monomial, PairIndex};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::scalar::Real;
use crate::Coefficient;

/// A rational combination of invariant terms over labels `1..=n`, each term
/// optionally wrapped in the group average `Av`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularExpression {
    n: usize,
    averaged: bool,
    terms: Vec<InvariantTerm>,
}

impl AngularExpression {
    /// Canonicalizes every term and merges terms with equal canonical form.
    pub fn new(n: usize, averaged: bool, terms: impl IntoIterator<Item = InvariantTerm>) -> Result<Self> {
        let mut merged: BTreeMap<Monomial, Coefficient> = BTreeMap::new();
        let mut order = Vec::new();
        for t in terms {
            if t.monomial.max_label() > n {
                return Err(Error::IndexOutOfRange { index: t.monomial.max_label(), n });
            }
            let c = t.canonicalize();
            if c.is_zero() {
                continue;
            }
            if !merged.contains_key(&c.monomial) {
                order.push(c.monomial.clone());
            }
            *merged.entry(c.monomial).or_insert_with(Coefficient::zero) += c.coeff;
        }
        let terms = order
            .into_iter()
            .filter_map(|m| {
                let coeff = merged[&m];
                (!coeff.is_zero()).then_some(InvariantTerm { coeff, monomial: m })
            })
            .collect();
        Ok(Self { n, averaged, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn averaged(&self) -> bool {
        self.averaged
    }

    pub fn terms(&self) -> &[InvariantTerm] {
        &self.terms
    }

    pub fn coefficient_of(&self, m: &Monomial) -> Coefficient {
        self.terms.iter().find(|t| &t.monomial == m).map(|t| t.coeff).unwrap_or_else(Coefficient::zero)
    }

    /// The same function written without `Av`, as an explicit sum of relabeled terms.
    pub fn expanded(&self) -> Result<AngularExpression> {
        if !self.averaged {
            return Ok(self.clone());
        }
        let mut all = Vec::new();
        for t in &self.terms {
            all.extend(averaged_expansion(t, self.n)?);
        }
        AngularExpression::new(self.n, false, all)
    }

    pub fn eval<T: Real>(&self, c: &Configuration<T>) -> Result<T> {
        if c.n() != self.n {
            return Err(Error::WrongN { expected: self.n, got: c.n() });
        }
        self.expanded()?.eval_dirs(&Directions::new(c))
    }

    /// Evaluates an expression that is already in expanded form.
    pub(crate) fn eval_dirs<T: Real>(&self, dirs: &Directions<T>) -> Result<T> {
        debug_assert!(!self.averaged);
        self.terms.iter().try_fold(T::zero(), |acc, t| Ok(acc + dirs.term(t)?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_records()).expect("plain data serializes")
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms.iter().map(TermRecord::from_term).collect()
    }

    /// Reads the JSON term list. `n` and `averaged` are not part of the list.
    pub fn from_json(json: &str, n: usize, averaged: bool) -> Result<Self> {
        let records: Vec<TermRecord> =
            serde_json::from_str(json).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::from_records(&records, n, averaged)
    }

    pub fn from_records(records: &[TermRecord], n: usize, averaged: bool) -> Result<Self> {
        let terms = records.iter().map(TermRecord::to_term).collect::<Result<Vec<_>>>()?;
        Self::new(n, averaged, terms)
    }
}

/// `{"coeff": [num, den], "factors": [{"kind": "dot"|"det", "pairs": [[a, b], ...]}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: [i64; 2],
    pub factors: Vec<FactorRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub kind: FactorKind,
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Dot,
    Det,
}

impl TermRecord {
    pub fn from_term(t: &InvariantTerm) -> Self {
        let factors = t
            .factors()
            .iter()
            .map(|f| FactorRecord {
                kind: if f.is_det() { FactorKind::Det } else { FactorKind::Dot },
                pairs: f.pairs().iter().map(|p| [p.a(), p.b()]).collect(),
            })
            .collect();
        Self { coeff: [*t.coeff.numer(), *t.coeff.denom()], factors }
    }

    pub fn to_term(&self) -> Result<InvariantTerm> {
        let [num, den] = self.coeff;
        if den == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let factors = self
            .factors
            .iter()
            .map(|f| {
                let pairs = f.pairs.iter().map(|&[a, b]| PairIndex::new(a, b)).collect::<Result<Vec<_>>>()?;
                match (f.kind, pairs.as_slice()) {
                    (FactorKind::Dot, &[p, q]) => Ok(Factor::dot(p, q)),
                    (FactorKind::Det, &[p, q, r]) => Ok(Factor::det(p, q, r)),
                    _ => Err(Error::InvalidInput(format!("{:?} factor with {} pairs", f.kind, pairs.len()))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InvariantTerm::new(Coefficient::new(num, den), factors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::term::v;

    #[test]
    fn merges_equal_canonical_forms() {
        let one = Coefficient::from_integer(1);
        let e = AngularExpression::new(
            4,
            true,
            [
                InvariantTerm::new(one, vec![Factor::dot(v(1, 2), v(1, 3))]),
                InvariantTerm::new(one, vec![Factor::dot(v(3, 1), v(2, 1))]),
                InvariantTerm::new(one, vec![Factor::dot(v(2, 1), v(1, 4))]),
                InvariantTerm::new(one, vec![Factor::dot(v(1, 2), v(1, 4))]),
            ],
        )
        .unwrap();
        assert_eq!(e.terms().len(), 1);
        assert_eq!(e.terms()[0].coeff, Coefficient::from_integer(2));
    }

    #[test]
    fn json_shape() {
        let e = AngularExpression::new(
            4,
            true,
            [InvariantTerm::new(Coefficient::new(-1, 32), vec![
                Factor::det(v(1, 2), v(1, 4), v(2, 3)),
                Factor::dot(v(2, 4), v(3, 4)),
            ])],
        )
        .unwrap();
        let value: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(
            value,
            serde_json::json!([{
                "coeff": [-1, 32],
                "factors": [
                    {"kind": "dot", "pairs": [[2, 4], [3, 4]]},
                    {"kind": "det", "pairs": [[1, 2], [1, 4], [2, 3]]}
                ]
            }])
        );
        assert_eq!(AngularExpression::from_json(&e.to_json(), 4, true).unwrap(), e);
    }

    #[test]
    fn rejects_malformed_records() {
        for bad in [
            r#"[{"coeff": [1, 0], "factors": []}]"#,
            r#"[{"coeff": [1, 2], "factors": [{"kind": "dot", "pairs": [[1, 2]]}]}]"#,
            r#"[{"coeff": [1, 2], "factors": [{"kind": "cross", "pairs": [[1, 2], [1, 3]]}]}]"#,
            r#"[{"coeff": [1, 2], "factors": [{"kind": "dot", "pairs": [[1, 1], [1, 3]]}]}]"#,
            r#"[{"coeff": [1, 2], "factors": [{"kind": "dot", "pairs": [[1, 5], [1, 3]]}]}]"#,
        ] {
            assert!(AngularExpression::from_json(bad, 4, true).is_err(), "{bad}");
        }
    }
}

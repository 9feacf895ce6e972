use std::collections::{HashMap, HashSet};

use crate::angular::{Factor, InvariantTerm, Monomial, PairIndex};
use crate::error::{Error, Result};
use crate::perm::lex_permutations;

/// Default cap on the number of raw candidate products.
pub const DEFAULT_RAW_CAP: usize = 10_000_000;

/// One representative per relabeling orbit of candidate products.
#[derive(Debug, Clone, PartialEq)]
pub struct TermBasis {
    pub n: usize,
    pub max_slots: usize,
    /// Orbit representatives in simplicity order; the constant comes first.
    pub reps: Vec<Monomial>,
    /// Orbits whose group average vanishes identically (some relabeling maps
    /// the product to its negative); kept out of `reps`.
    pub self_cancelling: Vec<Monomial>,
    /// Canonical products enumerated before orbit reduction.
    pub raw_count: usize,
    orbit_of: HashMap<Monomial, (usize, i64)>,
}

impl TermBasis {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn terms(&self) -> Vec<InvariantTerm> {
        self.reps.iter().cloned().map(InvariantTerm::unit).collect()
    }

    /// Column index of the orbit containing `m` and the sign `s` with
    /// `Av(m) = s · Av(reps[index])`. Accepts non-canonical input.
    pub fn locate(&self, m: &Monomial) -> Option<(usize, i64)> {
        let (s, canon) = m.canonical()?;
        let &(idx, t) = self.orbit_of.get(&canon)?;
        Some((idx, s * t))
    }
}

fn candidate_factors(n: usize) -> Vec<Factor> {
    let pairs: Vec<PairIndex> = (1..=n)
        .flat_map(|a| (a + 1..=n).map(move |b| PairIndex::new(a, b).expect("a < b")))
        .collect();
    let mut out = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            out.push(Factor::dot(pairs[i], pairs[j]));
        }
    }
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            for k in j + 1..pairs.len() {
                let f = Factor::det(pairs[i], pairs[j], pairs[k]);
                // drops the coplanar triangle triples
                if let Some((_, g)) = Monomial::new(vec![f]).canonical() {
                    if !g.is_constant() {
                        out.push(f);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// All products of canonical inner-product and triple-product factors over
/// labels `1..=n` using at most `max_slots` vector slots, reduced to one
/// representative (the least canonical form) per relabeling orbit.
pub fn enumerate_basis(n: usize, max_slots: usize) -> Result<TermBasis> {
    enumerate_basis_capped(n, max_slots, DEFAULT_RAW_CAP)
}

pub fn enumerate_basis_capped(n: usize, max_slots: usize, cap: usize) -> Result<TermBasis> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("basis enumeration needs n >= 3, got {n}")));
    }
    if n > 8 {
        return Err(Error::TooLarge { n, max: 8 });
    }
    let factors = candidate_factors(n);
    let mut raw: Vec<Monomial> = vec![Monomial::constant()];
    let mut stack: Vec<Factor> = Vec::new();
    fn grow(
        factors: &[Factor],
        start: usize,
        slots_left: usize,
        stack: &mut Vec<Factor>,
        raw: &mut Vec<Monomial>,
        cap: usize,
    ) -> Result<()> {
        for i in start..factors.len() {
            let f = factors[i];
            if f.slots() > slots_left {
                continue;
            }
            stack.push(f);
            if raw.len() >= cap {
                return Err(Error::BasisTooLarge { cap });
            }
            raw.push(Monomial::new(stack.clone()));
            grow(factors, i, slots_left - f.slots(), stack, raw, cap)?;
            stack.pop();
        }
        Ok(())
    }
    grow(&factors, 0, max_slots, &mut stack, &mut raw, cap)?;
    let raw_count = raw.len();

    let perms = lex_permutations(n);
    let mut seen: HashSet<Monomial> = HashSet::new();
    // representative -> (orbit members with sign relative to the representative, cancels)
    let mut orbits: Vec<(Monomial, Vec<(Monomial, i64)>, bool)> = Vec::new();
    for m in raw {
        let (_, m) = m.canonical().expect("candidates are nonzero");
        if seen.contains(&m) {
            continue;
        }
        let images: Vec<(i64, Monomial)> =
            perms.iter().map(|p| m.relabel(p).expect("relabeling preserves nonvanishing")).collect();
        let rep = images.iter().map(|(_, x)| x).min().expect("n! >= 1").clone();
        let mut members: HashMap<Monomial, i64> = HashMap::new();
        let mut cancels = false;
        let rep_sign = images.iter().find(|(_, x)| *x == rep).map(|(s, _)| *s).expect("rep is an image");
        for (s, x) in &images {
            // sign of x relative to rep: π·m = s·x and π'·m = rep_sign·rep
            let rel = s * rep_sign;
            match members.get(x) {
                Some(&prev) if prev != rel => cancels = true,
                _ => {
                    members.insert(x.clone(), rel);
                }
            }
        }
        seen.extend(members.keys().cloned());
        let mut members: Vec<(Monomial, i64)> = members.into_iter().collect();
        members.sort();
        orbits.push((rep, members, cancels));
    }

    orbits.sort_by(|a, b| a.0.simplicity_key().cmp(&b.0.simplicity_key()));
    let mut reps = Vec::new();
    let mut self_cancelling = Vec::new();
    let mut orbit_of = HashMap::new();
    for (rep, members, cancels) in orbits {
        if cancels {
            self_cancelling.push(rep);
            continue;
        }
        let idx = reps.len();
        for (m, s) in members {
            orbit_of.insert(m, (idx, s));
        }
        reps.push(rep);
    }
    Ok(TermBasis { n, max_slots, reps, self_cancelling, raw_count, orbit_of })
}

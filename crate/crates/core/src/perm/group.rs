//! The group `G` of permutations of ordered pairs that fix the first index,
//! realized as independent permutations of each row `{b : b != a}`.

use crate::error::{Error, Result};

/// `((n-1)!)^n`.
pub fn group_order(n: usize) -> Result<u128> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let f = factorial(n - 1).ok_or(Error::Overflow("group order"))?;
    (0..n).try_fold(1u128, |acc, _| acc.checked_mul(f)).ok_or(Error::Overflow("group order"))
}

/// `∏_{a=1}^{n-1} (a!)^2`.
pub fn c_n(n: usize) -> Result<u128> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let mut acc = 1u128;
    let mut fact = 1u128;
    for a in 1..n {
        fact = fact.checked_mul(a as u128).ok_or(Error::Overflow("c_n"))?;
        acc = acc
            .checked_mul(fact)
            .and_then(|x| x.checked_mul(fact))
            .ok_or(Error::Overflow("c_n"))?;
    }
    Ok(acc)
}

pub(crate) fn factorial(m: usize) -> Option<u128> {
    (1..=m as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// All permutations of `0..m` in lexicographic order.
pub fn lex_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..m).collect();
    let mut out = vec![cur.clone()];
    // standard next-permutation step
    loop {
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// One element of `G`: for each row `a`, a bijection `σ_a` of `{b : b != a}`.
/// Indices are 0-based; `image(a, a)` is `a` by convention.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowPermutation {
    rows: Vec<Vec<usize>>,
}

impl RowPermutation {
    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|_| (0..n).collect()).collect() }
    }

    /// Validates and wraps explicit row images.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n || row[a] != a {
                return Err(Error::InvalidInput(format!("row {} must fix its own index", a + 1)));
            }
            let mut seen = vec![false; n];
            for &b in row {
                if b >= n || std::mem::replace(&mut seen[b], true) {
                    return Err(Error::InvalidInput(format!("row {} is not a bijection", a + 1)));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// `σ_a(b)`, i.e. the second index of `σ(a, b)`.
    #[inline]
    pub fn image(&self, a: usize, b: usize) -> usize {
        self.rows[a][b]
    }
}

/// Precomputed row alphabets: the sorted set `{b != a}` and every
/// permutation of it, in lexicographic order of the permutation of positions.
#[derive(Debug, Clone)]
pub(crate) struct RowAlphabet {
    pub n: usize,
    pub radix: usize,
    /// `images[a][p][b]` is `σ_a(b)` for the `p`-th permutation of row `a`.
    pub images: Vec<Vec<Vec<usize>>>,
}

impl RowAlphabet {
    pub fn new(n: usize) -> Self {
        let perms = lex_permutations(n - 1);
        let images = (0..n)
            .map(|a| {
                let members: Vec<usize> = (0..n).filter(|&b| b != a).collect();
                perms
                    .iter()
                    .map(|p| {
                        let mut img: Vec<usize> = (0..n).collect();
                        for (k, &b) in members.iter().enumerate() {
                            img[b] = members[p[k]];
                        }
                        img
                    })
                    .collect()
            })
            .collect();
        Self { n, radix: perms.len(), images }
    }

    pub fn element(&self, digits: &[usize]) -> RowPermutation {
        RowPermutation { rows: (0..self.n).map(|a| self.images[a][digits[a]].clone()).collect() }
    }
}

/// Mixed-radix odometer over `n` digits of base `radix`, row 0 most significant.
pub(crate) fn decode(mut index: u64, n: usize, radix: usize, digits: &mut [usize]) {
    for k in (0..n).rev() {
        digits[k] = (index % radix as u64) as usize;
        index /= radix as u64;
    }
}

/// Advances the odometer; returns the most significant position that
/// changed, or `None` after the last element.
#[inline]
pub(crate) fn advance(digits: &mut [usize], radix: usize) -> Option<usize> {
    let mut k = digits.len();
    while k > 0 {
        k -= 1;
        digits[k] += 1;
        if digits[k] < radix {
            return Some(k);
        }
        digits[k] = 0;
    }
    None
}

/// Lazy enumeration of `G` in lexicographic order; O(n^2) state beyond the
/// shared row alphabets.
#[derive(Debug, Clone)]
pub struct GroupEnumerator {
    alphabet: RowAlphabet,
    digits: Vec<usize>,
    done: bool,
}

impl GroupEnumerator {
    pub fn new(n: usize) -> Result<Self> {
        group_order(n)?;
        Ok(Self { alphabet: RowAlphabet::new(n), digits: vec![0; n], done: false })
    }
}

impl Iterator for GroupEnumerator {
    type Item = RowPermutation;

    fn next(&mut self) -> Option<RowPermutation> {
        if self.done {
            return None;
        }
        let item = self.alphabet.element(&self.digits);
        self.done = advance(&mut self.digits, self.alphabet.radix).is_none();
        Some(item)
    }
}

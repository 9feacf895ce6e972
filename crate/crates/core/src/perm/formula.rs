//! `D = (1/c_n) Σ_{σ∈G} (σ·δ)/δ`, exactly or by uniform sampling of `G`.

use rand::Rng;
use rayon::prelude::*;

use super::group::{advance, c_n, decode, group_order, RowAlphabet, RowPermutation};
use crate::det::{delta, DeterminantResult, Method};
use crate::error::{Error, Result};
use crate::geometry::{direction_table, Configuration, DirectionTable};
use crate::parallel;
use crate::rng::stream_rng;
use crate::scalar::{Cplx, Real};

/// Largest `n` summed exactly unless the caller raises it.
pub const DEFAULT_MAX_EXACT_N: usize = 5;
/// Number of contiguous index ranges the exact sum is split into.
pub const DEFAULT_CHUNKS: usize = 256;
/// Samples drawn per random stream by the sampled estimator.
const SAMPLE_BLOCK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermOptions {
    pub max_exact_n: usize,
    pub chunks: usize,
}

impl Default for PermOptions {
    fn default() -> Self {
        Self { max_exact_n: DEFAULT_MAX_EXACT_N, chunks: DEFAULT_CHUNKS }
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<T> {
    sum: Cplx<T>,
    comp: Cplx<T>,
}

impl<T: Real> Default for KahanSum<T> {
    fn default() -> Self {
        let z = Cplx::new(T::zero(), T::zero());
        Self { sum: z, comp: z }
    }
}

impl<T: Real> KahanSum<T> {
    #[inline]
    pub fn add(&mut self, x: Cplx<T>) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> Cplx<T> {
        self.sum
    }
}

/// Tree reduction of partial sums in their given order.
pub fn pairwise_sum<T: Real>(xs: &[Cplx<T>]) -> Cplx<T> {
    match xs.len() {
        0 => Cplx::new(T::zero(), T::zero()),
        1 => xs[0],
        k => {
            let (l, r) = xs.split_at(k / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Per-configuration data for fast evaluation of `(σ·δ)/δ`.
///
/// `weight(a, b, c, d)` is `(t_ac - t_bd) / (t_ab - t_ba)` for `a < b`, the
/// factor contributed by pair `(a, b)` when `σ_a(b) = c` and `σ_b(a) = d`.
/// Each factor is invariant under rescaling the spinors of row `a` or `b`
/// up to the matching factor of the denominator, so the product is gauge
/// invariant.
pub struct RatioKernel<T> {
    n: usize,
    alphabet: RowAlphabet,
    weights: Vec<Cplx<T>>,
    delta: Cplx<T>,
}

impl<T: Real> RatioKernel<T> {
    pub fn new(table: &DirectionTable<T>) -> Result<Self> {
        let n = table.n();
        let delta = delta(table)?;
        let zero = Cplx::new(T::zero(), T::zero());
        let mut weights = vec![zero; n * n * n * n];
        for a in 0..n {
            for b in a + 1..n {
                let den = table.get(a, b).wedge(table.get(b, a));
                for c in (0..n).filter(|&c| c != a) {
                    for d in (0..n).filter(|&d| d != b) {
                        weights[((a * n + b) * n + c) * n + d] =
                            table.get(a, c).wedge(table.get(b, d)) / den;
                    }
                }
            }
        }
        Ok(Self { n, alphabet: RowAlphabet::new(n), weights, delta })
    }

    #[inline]
    fn weight(&self, a: usize, b: usize, c: usize, d: usize) -> Cplx<T> {
        let n = self.n;
        self.weights[((a * n + b) * n + c) * n + d]
    }

    pub fn delta(&self) -> Cplx<T> {
        self.delta
    }

    /// `(σ·δ)/δ` for an explicit group element.
    pub fn ratio(&self, sigma: &RowPermutation) -> Cplx<T> {
        assert_eq!(sigma.n(), self.n, "group element for the wrong n");
        let mut acc = Cplx::new(T::one(), T::zero());
        for a in 0..self.n {
            for b in a + 1..self.n {
                acc *= self.weight(a, b, sigma.image(a, b), sigma.image(b, a));
            }
        }
        acc
    }

    /// Product of the factors of pairs `(a, k)`, `a < k`, given the digits of rows `0..=k`.
    #[inline]
    fn column_factor(&self, digits: &[usize], k: usize) -> Cplx<T> {
        let img_k = &self.alphabet.images[k][digits[k]];
        let mut acc = Cplx::new(T::one(), T::zero());
        for a in 0..k {
            let img_a = &self.alphabet.images[a][digits[a]];
            acc *= self.weight(a, k, img_a[k], img_k[a]);
        }
        acc
    }

    /// Compensated sum of ratios over lexicographic indices `[start, end)`.
    pub fn range_sum(&self, start: u64, end: u64) -> Cplx<T> {
        let n = self.n;
        let mut acc = KahanSum::default();
        if start >= end {
            return acc.total();
        }
        let mut digits = vec![0usize; n];
        decode(start, n, self.alphabet.radix, &mut digits);
        // prefix[k]: product over all pairs (a, b) with b <= k
        let mut prefix = vec![Cplx::new(T::one(), T::zero()); n];
        let refresh = |prefix: &mut [Cplx<T>], digits: &[usize], from: usize| {
            for k in from..n {
                let before = if k == 0 { Cplx::new(T::one(), T::zero()) } else { prefix[k - 1] };
                prefix[k] = before * self.column_factor(digits, k);
            }
        };
        refresh(&mut prefix, &digits, 0);
        let mut idx = start;
        loop {
            acc.add(prefix[n - 1]);
            idx += 1;
            if idx == end {
                break;
            }
            let k = advance(&mut digits, self.alphabet.radix).expect("range lies inside G");
            refresh(&mut prefix, &digits, k);
        }
        acc.total()
    }

    /// Full sum over `G` split into `chunks` contiguous ranges.
    pub fn group_sum(&self, chunks: usize) -> Result<Cplx<T>> {
        let order = u64::try_from(group_order(self.n)?).map_err(|_| Error::Overflow("group order"))?;
        let chunks = (chunks.max(1) as u64).min(order);
        let bounds: Vec<(u64, u64)> = (0..chunks)
            .map(|i| (order * i / chunks, order * (i + 1) / chunks))
            .collect();
        let partials: Vec<Cplx<T>> = parallel::install(|| {
            bounds.par_iter().map(|&(s, e)| self.range_sum(s, e)).collect()
        });
        Ok(pairwise_sum(&partials))
    }

    fn random_ratio(&self, rng: &mut impl Rng, digits: &mut [usize]) -> Cplx<T> {
        for d in digits.iter_mut() {
            *d = rng.random_range(0..self.alphabet.radix);
        }
        (0..self.n).fold(Cplx::new(T::one(), T::zero()), |acc, k| acc * self.column_factor(digits, k))
    }
}

/// `(σ·δ)/δ` evaluated factor by factor.
pub fn sigma_delta_ratio<T: Real>(table: &DirectionTable<T>, sigma: &RowPermutation) -> Result<Cplx<T>> {
    if sigma.n() != table.n() {
        return Err(Error::WrongN { expected: table.n(), got: sigma.n() });
    }
    let mut acc = Cplx::new(T::one(), T::zero());
    let n = table.n();
    for a in 0..n {
        for b in a + 1..n {
            let den = table.get(a, b).wedge(table.get(b, a));
            if den == Cplx::new(T::zero(), T::zero()) {
                return Err(Error::DegenerateDelta { a: a + 1, b: b + 1 });
            }
            let num = table.get(a, sigma.image(a, b)).wedge(table.get(b, sigma.image(b, a)));
            acc *= num / den;
        }
    }
    Ok(acc)
}

fn to_real<T: Real>(x: u128) -> T {
    T::from_u128(x).unwrap_or_else(T::infinity)
}

/// Exact permutation-sum formula with default options.
pub fn perm_formula_d<T: Real>(c: &Configuration<T>) -> Result<DeterminantResult<T>> {
    perm_formula_d_with(c, PermOptions::default())
}

pub fn perm_formula_d_with<T: Real>(c: &Configuration<T>, opts: PermOptions) -> Result<DeterminantResult<T>> {
    perm_formula_d_table(&direction_table(c), opts)
}

pub fn perm_formula_d_table<T: Real>(
    table: &DirectionTable<T>,
    opts: PermOptions,
) -> Result<DeterminantResult<T>> {
    let n = table.n();
    if n > opts.max_exact_n {
        return Err(Error::TooLarge { n, max: opts.max_exact_n });
    }
    let kernel = RatioKernel::new(table)?;
    let sum = kernel.group_sum(opts.chunks)?;
    let d = sum / to_real::<T>(c_n(n)?);
    Ok(DeterminantResult {
        d,
        det_a: Some(d * kernel.delta()),
        delta: Some(kernel.delta()),
        method: Method::PermFormula,
        ill_conditioned: table.is_near_coincident(),
    })
}

/// Monte Carlo estimate of the permutation sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEstimate<T> {
    pub estimate: Cplx<T>,
    /// Standard error of the estimate, real and imaginary parts separately.
    pub stderr: Cplx<T>,
    pub samples: usize,
}

impl<T: Real> SampledEstimate<T> {
    /// Whether `target` lies within `k` standard errors in both components.
    /// A component whose spread is at round-off level (the imaginary part of
    /// a planar configuration) is compared up to `1024 ε max(1, |target|)`.
    pub fn covers(&self, target: Cplx<T>, k: T) -> bool {
        let diff = self.estimate - target;
        let floor = T::lit(1024.0) * T::epsilon() * target.norm().max(T::one());
        diff.re.abs() <= k * self.stderr.re + floor && diff.im.abs() <= k * self.stderr.im + floor
    }
}

/// `(|G|/c_n)` times the mean ratio over `samples` uniform draws from `G`.
pub fn perm_formula_d_sampled<T: Real>(
    c: &Configuration<T>,
    samples: usize,
    seed: u64,
) -> Result<SampledEstimate<T>> {
    perm_formula_d_sampled_table(&direction_table(c), samples, seed)
}

pub fn perm_formula_d_sampled_table<T: Real>(
    table: &DirectionTable<T>,
    samples: usize,
    seed: u64,
) -> Result<SampledEstimate<T>> {
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let n = table.n();
    let kernel = RatioKernel::new(table)?;
    let scale = to_real::<T>(group_order(n)?) / to_real::<T>(c_n(n)?);
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    // per block: (sum, sum of squares per component)
    let partials: Vec<(Cplx<T>, Cplx<T>)> = parallel::install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|blk| {
                let count = SAMPLE_BLOCK.min(samples - blk * SAMPLE_BLOCK);
                let mut rng = stream_rng(seed, blk as u64);
                let mut digits = vec![0usize; n];
                let mut sum = KahanSum::default();
                let mut sq = KahanSum::default();
                for _ in 0..count {
                    let r = kernel.random_ratio(&mut rng, &mut digits);
                    sum.add(r);
                    sq.add(Cplx::new(r.re * r.re, r.im * r.im));
                }
                (sum.total(), sq.total())
            })
            .collect()
    });
    let sums: Vec<_> = partials.iter().map(|p| p.0).collect();
    let sqs: Vec<_> = partials.iter().map(|p| p.1).collect();
    let m = T::from_count(samples);
    let mean = pairwise_sum(&sums) / m;
    let mean_sq = pairwise_sum(&sqs) / m;
    let stderr = if samples > 1 {
        let bessel = m / (m - T::one());
        let var = |ms: T, mu: T| ((ms - mu * mu) * bessel).max(T::zero());
        Cplx::new((var(mean_sq.re, mean.re) / m).sqrt(), (var(mean_sq.im, mean.im) / m).sqrt())
    } else {
        Cplx::new(T::infinity(), T::infinity())
    };
    Ok(SampledEstimate { estimate: mean * scale, stderr: stderr * scale, samples })
}

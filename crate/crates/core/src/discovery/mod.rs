//! Recovering angular expressions for `D` from sampled configurations:
//! enumerate candidate products, reduce them to relabeling orbits, evaluate
//! the group averages on random configurations and solve for rational
//! coefficients.

mod basis;
mod rational;
mod solve;
mod system;

pub use basis::{enumerate_basis, enumerate_basis_capped, TermBasis, DEFAULT_RAW_CAP};
pub use rational::best_rational;
pub use solve::{max_residual, solve_coefficients, ComponentFit, OrderedQr, RecoveredFormula, SolveOptions};
pub use system::{build_system, LinearSystem};

use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::harness::generate::{generate, GeneratorKind, GeneratorSpec};

/// Minimum pairwise distance of training and holdout configurations.
pub const TRAINING_MIN_SEPARATION: f64 = 0.05;
/// Holdout configurations are drawn from streams starting here.
const HOLDOUT_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryOptions {
    pub n: usize,
    pub max_slots: usize,
    pub seed: u64,
    /// Training rows per basis column; 1 gives the square system.
    pub row_factor: usize,
    pub holdout: usize,
    pub raw_cap: usize,
    pub solve: SolveOptions,
}

impl DiscoveryOptions {
    pub fn new(n: usize, max_slots: usize, seed: u64) -> Self {
        Self { n, max_slots, seed, row_factor: 3, holdout: 100, raw_cap: DEFAULT_RAW_CAP, solve: SolveOptions::default() }
    }
}

/// Training configurations: uniform in the unit ball, separated by at least
/// [`TRAINING_MIN_SEPARATION`].
pub fn training_configurations(n: usize, count: usize, seed: u64) -> Result<Vec<Configuration<f64>>> {
    sample(n, count, seed, 0)
}

pub fn holdout_configurations(n: usize, count: usize, seed: u64) -> Result<Vec<Configuration<f64>>> {
    sample(n, count, seed, HOLDOUT_STREAM_BASE)
}

fn sample(n: usize, count: usize, seed: u64, base: u64) -> Result<Vec<Configuration<f64>>> {
    let spec = GeneratorSpec::new(GeneratorKind::UniformBall, n, seed).with_min_separation(TRAINING_MIN_SEPARATION);
    (0..count as u64).map(|i| generate(&spec.with_stream(base + i))).collect()
}

/// The whole pipeline.
pub fn discover(opts: &DiscoveryOptions) -> Result<(TermBasis, RecoveredFormula)> {
    if opts.holdout == 0 {
        return Err(Error::InvalidSpec("the holdout set must not be empty".into()));
    }
    let basis = enumerate_basis_capped(opts.n, opts.max_slots, opts.raw_cap)?;
    let rows = basis.len() * opts.row_factor.max(1);
    let mut train = build_system(&basis, &training_configurations(opts.n, rows, opts.seed)?)?;
    train.seed = Some(opts.seed);
    let mut hold = build_system_unchecked(&basis, &holdout_configurations(opts.n, opts.holdout, opts.seed)?)?;
    hold.seed = Some(opts.seed);
    let formula = solve_coefficients(&basis, &train, &hold, &opts.solve)?;
    Ok((basis, formula))
}

/// Holdout sets may have fewer rows than columns.
fn build_system_unchecked(basis: &TermBasis, configs: &[Configuration<f64>]) -> Result<LinearSystem> {
    if configs.len() >= basis.len() {
        return build_system(basis, configs);
    }
    let mut padded = configs.to_vec();
    padded.resize(basis.len(), configs.first().cloned().expect("non-empty holdout"));
    let mut sys = build_system(basis, &padded)?;
    sys.matrix.truncate(configs.len());
    sys.rhs_re.truncate(configs.len());
    sys.rhs_im.truncate(configs.len());
    sys.configs.truncate(configs.len());
    Ok(sys)
}

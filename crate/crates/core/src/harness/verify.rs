//! Cross-method agreement on generated configurations.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::{generate, GeneratorKind, GeneratorSpec};
use super::report::ConfigDump;
use crate::angular::angular_d4;
use crate::det::{direct_d, Method};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::parallel;
use crate::perm::{perm_formula_d, perm_formula_d_sampled, DEFAULT_MAX_EXACT_N};
use crate::scalar::rel_dev;
use crate::Cplx;

/// Largest accepted deviation between methods.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;
/// At most this many disagreeing configurations are kept in a report.
pub const MAX_DUMPS: usize = 1000;

/// `D` of `c` by `method`. `samples` and `seed` only matter for the sampled estimator.
pub fn evaluate(c: &Configuration<f64>, method: Method, samples: usize, seed: u64) -> Result<Cplx<f64>> {
    Ok(match method {
        Method::Direct => direct_d(c)?.d,
        Method::PermFormula => perm_formula_d(c)?.d,
        Method::PermSampled => perm_formula_d_sampled(c, samples, seed)?.estimate,
        Method::AngularN4 => angular_d4(c)?.d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub generator: GeneratorKind,
    pub epsilon: Option<f64>,
    pub min_separation: f64,
    pub tolerance: f64,
}

impl VerifyOptions {
    pub fn new(n: usize, trials: u64, seed: u64, methods: Vec<Method>) -> Self {
        Self {
            n,
            trials,
            seed,
            methods,
            generator: GeneratorKind::UniformBall,
            epsilon: None,
            min_separation: 0.0,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    fn spec(&self, trial: u64) -> GeneratorSpec {
        let mut s = GeneratorSpec::new(self.generator, self.n, self.seed)
            .with_stream(trial)
            .with_min_separation(self.min_separation);
        s.epsilon = self.epsilon;
        s
    }

    fn check(&self) -> Result<()> {
        if self.methods.len() < 2 {
            return Err(Error::InvalidSpec("verification needs at least two methods".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::InvalidSpec(format!("method {} listed twice", m.name())));
            }
            match m {
                Method::PermSampled => {
                    return Err(Error::InvalidSpec("the sampled estimator is statistical; use eval".into()))
                }
                Method::PermFormula if self.n > DEFAULT_MAX_EXACT_N => {
                    return Err(Error::TooLarge { n: self.n, max: DEFAULT_MAX_EXACT_N })
                }
                Method::AngularN4 if self.n != 4 => return Err(Error::WrongN { expected: 4, got: self.n }),
                _ => {}
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidSpec("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    pub a: Method,
    pub b: Method,
    pub max_rel_dev: f64,
    pub mean_rel_dev: f64,
    pub worst_trial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub trial: u64,
    pub points: Vec<[f64; 3]>,
    /// `(method, re, im)` in the order of the requested methods.
    pub values: Vec<(Method, f64, f64)>,
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub generator: GeneratorKind,
    pub epsilon: Option<f64>,
    pub methods: Vec<Method>,
    pub tolerance: f64,
    pub pairs: Vec<PairStats>,
    pub max_rel_dev: f64,
    pub disagreement_count: u64,
    pub disagreements: Vec<Disagreement>,
    pub min_abs_d: f64,
    pub argmin: Option<ConfigDump>,
    pub wall_time_s: f64,
    pub evaluations_per_second: f64,
    pub passed: bool,
}

struct Trial {
    index: u64,
    config: Configuration<f64>,
    values: Vec<Cplx<f64>>,
}

/// Evaluates every method on `trials` generated configurations and records
/// the largest pairwise relative deviation `|a − b| / max(1, |a|)`.
pub fn verify_methods(opts: &VerifyOptions) -> Result<VerifyReport> {
    opts.check()?;
    let start = Instant::now();
    let trials: Vec<Trial> = parallel::install(|| {
        (0..opts.trials)
            .into_par_iter()
            .map(|index| {
                let config = generate(&opts.spec(index))?;
                let values = opts
                    .methods
                    .iter()
                    .map(|&m| evaluate(&config, m, 0, opts.seed))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Trial { index, config, values })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let wall = start.elapsed().as_secs_f64();

    let k = opts.methods.len();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let mut stats = PairStats {
                a: opts.methods[i],
                b: opts.methods[j],
                max_rel_dev: 0.0,
                mean_rel_dev: 0.0,
                worst_trial: 0,
            };
            for t in &trials {
                let dev = rel_dev(t.values[i], t.values[j]);
                stats.mean_rel_dev += dev;
                if !(dev <= stats.max_rel_dev) {
                    stats.max_rel_dev = dev;
                    stats.worst_trial = t.index;
                }
            }
            stats.mean_rel_dev /= trials.len().max(1) as f64;
            pairs.push(stats);
        }
    }

    let mut disagreements = Vec::new();
    let mut disagreement_count = 0;
    let mut max_dev = 0.0f64;
    let mut min_abs = f64::INFINITY;
    let mut argmin = None;
    for t in &trials {
        let mut dev = 0.0f64;
        for i in 0..k {
            for j in i + 1..k {
                let d = rel_dev(t.values[i], t.values[j]);
                if !(d <= dev) {
                    dev = d;
                }
            }
        }
        if !(dev <= max_dev) {
            max_dev = dev;
        }
        if !(dev <= opts.tolerance) {
            disagreement_count += 1;
            if disagreements.len() < MAX_DUMPS {
                disagreements.push(Disagreement {
                    trial: t.index,
                    points: t.config.to_arrays(),
                    values: opts.methods.iter().zip(&t.values).map(|(&m, v)| (m, v.re, v.im)).collect(),
                    max_rel_dev: dev,
                });
            }
        }
        let a = t.values[0].norm();
        if a < min_abs {
            min_abs = a;
            argmin = Some(ConfigDump::new(t.index, &t.config, t.values[0]));
        }
    }

    let evals = opts.trials as f64 * k as f64;
    Ok(VerifyReport {
        n: opts.n,
        trials: opts.trials,
        seed: opts.seed,
        generator: opts.generator,
        epsilon: opts.epsilon,
        methods: opts.methods.clone(),
        tolerance: opts.tolerance,
        pairs,
        max_rel_dev: max_dev,
        disagreement_count,
        disagreements,
        min_abs_d: min_abs,
        argmin,
        wall_time_s: wall,
        evaluations_per_second: if wall > 0.0 { evals / wall } else { f64::INFINITY },
        passed: disagreement_count == 0,
    })
}

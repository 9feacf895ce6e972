//! Large randomized scans of `|D| ≥ 1` and `det(A) ≠ 0`.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::{generate, GeneratorKind, GeneratorSpec};
use super::report::ConfigDump;
use crate::det::direct_d;
use crate::error::{Error, Result};
use crate::parallel;
use crate::Cplx;

/// By default a trial is a violation when `|D| < 1 − VIOLATION_MARGIN`.
pub const VIOLATION_MARGIN: f64 = 1e-9;
pub const CSV_HEADER: &str = "trial,epsilon,re,im,abs,flags";
/// At most this many findings of each kind are dumped in a report.
pub const MAX_FINDINGS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub generator: GeneratorKind,
    pub epsilon: Option<f64>,
    pub min_separation: f64,
    /// Trials with `|D|` below this are reported as violations.
    pub threshold: f64,
    /// Trials evaluated between two calls of the row sink.
    pub batch: u64,
}

impl ScanOptions {
    pub fn new(n: usize, trials: u64, seed: u64) -> Self {
        Self {
            n,
            trials,
            seed,
            generator: GeneratorKind::UniformBall,
            epsilon: None,
            min_separation: 0.0,
            threshold: 1.0 - VIOLATION_MARGIN,
            batch: 8192,
        }
    }

    fn spec(&self, trial: u64) -> GeneratorSpec {
        let mut s = GeneratorSpec::new(self.generator, self.n, self.seed)
            .with_stream(trial)
            .with_min_separation(self.min_separation);
        s.epsilon = self.epsilon;
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ScanFlags {
    /// `|D|` below the scan threshold.
    pub violation: bool,
    /// `det(A)` exactly zero, `D` not finite, or `δ` degenerate.
    pub singular: bool,
    pub ill_conditioned: bool,
}

impl ScanFlags {
    fn csv(self) -> String {
        let mut parts = Vec::new();
        if self.violation {
            parts.push("violation");
        }
        if self.singular {
            parts.push("singular");
        }
        if self.ill_conditioned {
            parts.push("ill_conditioned");
        }
        parts.join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub trial: u64,
    pub epsilon: Option<f64>,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub flags: ScanFlags,
}

impl ScanRow {
    pub fn to_csv(&self) -> String {
        let eps = self.epsilon.map(|e| format!("{e:e}")).unwrap_or_default();
        format!("{},{},{:e},{:e},{:e},{}", self.trial, eps, self.re, self.im, self.abs, self.flags.csv())
    }
}

/// Rows joined as CSV, with the header when `header` is set.
pub fn rows_to_csv(rows: &[ScanRow], header: bool) -> String {
    let mut out = String::new();
    if header {
        out.push_str(CSV_HEADER);
        out.push('\n');
    }
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub generator: GeneratorKind,
    pub epsilon: Option<f64>,
    pub threshold: f64,
    pub min_abs_d: f64,
    pub max_abs_d: f64,
    pub argmin: Option<ConfigDump>,
    pub violation_count: u64,
    pub violations: Vec<ConfigDump>,
    pub singular_count: u64,
    pub singular: Vec<ConfigDump>,
    pub ill_conditioned_count: u64,
    pub wall_time_s: f64,
    pub evaluations_per_second: f64,
}

impl ScanReport {
    pub fn has_findings(&self) -> bool {
        self.violation_count > 0 || self.singular_count > 0
    }
}

struct Evaluated {
    row: ScanRow,
    points: Vec<[f64; 3]>,
}

fn evaluate_trial(opts: &ScanOptions, trial: u64) -> Result<Evaluated> {
    let c = generate(&opts.spec(trial))?;
    let (d, singular, ill) = match direct_d(&c) {
        Ok(r) => {
            let det_zero = r.det_a.is_some_and(|a| a == Cplx::new(0.0, 0.0));
            (r.d, det_zero || !(r.d.re.is_finite() && r.d.im.is_finite()), r.ill_conditioned)
        }
        Err(Error::DegenerateDelta { .. }) => (Cplx::new(f64::NAN, f64::NAN), true, true),
        Err(e) => return Err(e),
    };
    let abs = d.norm();
    let flags = ScanFlags { violation: !(abs >= opts.threshold), singular, ill_conditioned: ill };
    Ok(Evaluated {
        row: ScanRow { trial, epsilon: opts.epsilon, re: d.re, im: d.im, abs, flags },
        points: c.to_arrays(),
    })
}

/// Evaluates `D` by direct elimination on `opts.trials` generated
/// configurations. Trial `i` uses random stream `i` of `opts.seed`, so the
/// report does not depend on the worker count. `sink` receives the rows in
/// trial order, one batch at a time.
pub fn scan_conjecture2(opts: &ScanOptions, mut sink: impl FnMut(&[ScanRow]) -> Result<()>) -> Result<ScanReport> {
    if !opts.threshold.is_finite() {
        return Err(Error::InvalidSpec("threshold must be finite".into()));
    }
    if opts.batch == 0 {
        return Err(Error::InvalidSpec("batch size must be positive".into()));
    }
    // fail early on an invalid generator spec
    generate(&opts.spec(0))?;
    let start = Instant::now();
    let mut report = ScanReport {
        n: opts.n,
        trials: opts.trials,
        seed: opts.seed,
        generator: opts.generator,
        epsilon: opts.epsilon,
        threshold: opts.threshold,
        min_abs_d: f64::INFINITY,
        max_abs_d: 0.0,
        argmin: None,
        violation_count: 0,
        violations: Vec::new(),
        singular_count: 0,
        singular: Vec::new(),
        ill_conditioned_count: 0,
        wall_time_s: 0.0,
        evaluations_per_second: 0.0,
    };
    let mut lo = 0;
    while lo < opts.trials {
        let hi = (lo + opts.batch).min(opts.trials);
        let batch: Vec<Evaluated> = parallel::install(|| {
            (lo..hi).into_par_iter().map(|t| evaluate_trial(opts, t)).collect::<Result<Vec<_>>>()
        })?;
        for e in &batch {
            let r = &e.row;
            let dump = || ConfigDump {
                trial: r.trial,
                points: e.points.clone(),
                re: r.re,
                im: r.im,
                abs: r.abs,
            };
            if r.abs < report.min_abs_d {
                report.min_abs_d = r.abs;
                report.argmin = Some(dump());
            }
            if r.abs > report.max_abs_d {
                report.max_abs_d = r.abs;
            }
            if r.flags.violation {
                report.violation_count += 1;
                if report.violations.len() < MAX_FINDINGS {
                    report.violations.push(dump());
                }
            }
            if r.flags.singular {
                report.singular_count += 1;
                if report.singular.len() < MAX_FINDINGS {
                    report.singular.push(dump());
                }
            }
            report.ill_conditioned_count += r.flags.ill_conditioned as u64;
        }
        let rows: Vec<ScanRow> = batch.into_iter().map(|e| e.row).collect();
        sink(&rows)?;
        lo = hi;
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.evaluations_per_second =
        if report.wall_time_s > 0.0 { opts.trials as f64 / report.wall_time_s } else { f64::INFINITY };
    Ok(report)
}

/// One near-degenerate scan per separation in `epsilons`; the other options
/// are taken from `base`, with the generator forced to `near_degenerate`.
pub fn epsilon_sweep(
    base: &ScanOptions,
    epsilons: &[f64],
    mut sink: impl FnMut(&[ScanRow]) -> Result<()>,
) -> Result<Vec<ScanReport>> {
    epsilons
        .iter()
        .map(|&eps| {
            let opts = ScanOptions { generator: GeneratorKind::NearDegenerate, epsilon: Some(eps), ..base.clone() };
            scan_conjecture2(&opts, &mut sink)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_scan_has_no_findings() {
        let mut rows = Vec::new();
        let mut o = ScanOptions::new(4, 500, 9);
        o.batch = 128;
        let r = scan_conjecture2(&o, |b| {
            rows.extend_from_slice(b);
            Ok(())
        })
        .unwrap();
        assert!(!r.has_findings());
        assert!(r.min_abs_d >= 1.0 - VIOLATION_MARGIN);
        assert_eq!(rows.len(), 500);
        assert!(rows.iter().enumerate().all(|(i, row)| row.trial == i as u64));
        let argmin = r.argmin.unwrap();
        assert_eq!(argmin.abs, r.min_abs_d);
        // the dump replays to the same value
        let d = direct_d(&argmin.configuration().unwrap()).unwrap().d;
        assert_eq!((d.re, d.im), (argmin.re, argmin.im));
    }

    #[test]
    fn independent_of_batching() {
        let run = |batch| {
            let mut o = ScanOptions::new(3, 300, 4);
            o.batch = batch;
            let mut rows = Vec::new();
            let mut r = scan_conjecture2(&o, |b| {
                rows.extend_from_slice(b);
                Ok(())
            })
            .unwrap();
            r.wall_time_s = 0.0;
            r.evaluations_per_second = 0.0;
            (r, rows)
        };
        assert_eq!(run(7), run(1000));
    }

    #[test]
    fn csv_rows() {
        let row = ScanRow {
            trial: 3,
            epsilon: Some(1e-3),
            re: 1.5,
            im: -0.25,
            abs: 1.5206906325745548,
            flags: ScanFlags { violation: false, singular: false, ill_conditioned: true },
        };
        assert_eq!(row.to_csv(), "3,1e-3,1.5e0,-2.5e-1,1.5206906325745548e0,ill_conditioned");
        assert!(rows_to_csv(&[row], true).starts_with(CSV_HEADER));
    }

    #[test]
    fn sweep_labels_rows() {
        let mut eps_seen = Vec::new();
        let reports = epsilon_sweep(&ScanOptions::new(4, 20, 1), &[1e-2, 1e-5], |b| {
            eps_seen.extend(b.iter().map(|r| r.epsilon.unwrap()));
            Ok(())
        })
        .unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(eps_seen.len(), 40);
        assert!(reports.iter().all(|r| r.generator == GeneratorKind::NearDegenerate));
        assert!(reports.iter().all(|r| !r.has_findings()), "{reports:?}");
    }

    #[test]
    fn invalid_generator_is_an_error() {
        let mut o = ScanOptions::new(4, 10, 1);
        o.generator = GeneratorKind::NearDegenerate;
        assert!(matches!(scan_conjecture2(&o, |_| Ok(())), Err(Error::InvalidSpec(_))));
    }
}

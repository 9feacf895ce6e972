//! Least squares by Householder QR with columns admitted in basis order.
//!
//! Column `j` is accepted as a pivot when its norm after projecting out the
//! accepted columns exceeds `rank_tol` times the larger of the largest pivot
//! so far and its own original norm. Rejected columns get coefficient zero,
//! so the solution is the basic solution supported on the earliest
//! independent columns.

use num_traits::Zero;
use serde::Serialize;

use super::basis::TermBasis;
use super::rational::best_rational;
use super::system::LinearSystem;
use crate::angular::{AngularExpression, InvariantTerm, Monomial, TermRecord};
use crate::error::{Error, Result};
use crate::Coefficient;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub rank_tol: f64,
    pub max_denominator: i64,
    pub rational_tol: f64,
    pub holdout_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { rank_tol: 1e-10, max_denominator: 4096, rational_tol: 1e-6, holdout_tol: 1e-7 }
    }
}

/// Factorization of a design matrix and the coefficients it yields.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedQr {
    pub selected: Vec<usize>,
    pub rejected: Vec<usize>,
    /// `|R_kk|` of the accepted columns, in order.
    pub pivots: Vec<f64>,
    cols: usize,
    // column-major transformed matrix and reflectors
    work: Vec<Vec<f64>>,
    reflectors: Vec<(usize, Vec<f64>, f64)>,
}

impl OrderedQr {
    pub fn factor(matrix: &[Vec<f64>], rank_tol: f64) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows < cols {
            return Err(Error::Underdetermined { rows, cols });
        }
        let mut work: Vec<Vec<f64>> = (0..cols).map(|j| matrix.iter().map(|r| r[j]).collect()).collect();
        let original: Vec<f64> = work.iter().map(|c| norm(c)).collect();
        let mut selected = Vec::new();
        let mut rejected = Vec::new();
        let mut pivots: Vec<f64> = Vec::new();
        let mut reflectors = Vec::new();
        for j in 0..cols {
            let k = selected.len();
            if k == rows {
                rejected.push(j);
                continue;
            }
            let tail = norm(&work[j][k..]);
            let scale = pivots.iter().copied().fold(original[j], f64::max);
            if !(tail > rank_tol * scale) || tail == 0.0 {
                rejected.push(j);
                continue;
            }
            let x0 = work[j][k];
            let alpha = if x0 >= 0.0 { -tail } else { tail };
            let mut v: Vec<f64> = work[j][k..].to_vec();
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|x| x * x).sum();
            let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
            for col in work.iter_mut().skip(j) {
                reflect(&mut col[k..], &v, beta);
            }
            work[j][k] = alpha;
            for x in &mut work[j][k + 1..] {
                *x = 0.0;
            }
            reflectors.push((k, v, beta));
            pivots.push(tail);
            selected.push(j);
        }
        Ok(Self { selected, rejected, pivots, cols, work, reflectors })
    }

    pub fn rank(&self) -> usize {
        self.selected.len()
    }

    /// Basic least-squares solution; zero on rejected columns.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = rhs.to_vec();
        for (k, v, beta) in &self.reflectors {
            reflect(&mut b[*k..], v, *beta);
        }
        let r = self.rank();
        let mut x_sel = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = b[i];
            for l in i + 1..r {
                s -= self.work[self.selected[l]][i] * x_sel[l];
            }
            x_sel[i] = s / self.work[self.selected[i]][i];
        }
        let mut x = vec![0.0; self.cols];
        for (l, &j) in self.selected.iter().enumerate() {
            x[j] = x_sel[l];
        }
        x
    }
}

fn norm(x: &[f64]) -> f64 {
    let m = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|&v| (v / m) * (v / m)).sum::<f64>().sqrt()
}

fn reflect(x: &mut [f64], v: &[f64], beta: f64) {
    let d: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
    let f = beta * d;
    for (a, b) in x.iter_mut().zip(v) {
        *a -= f * b;
    }
}

/// `max_i |M x - b|_i`.
pub fn max_residual(matrix: &[Vec<f64>], x: &[f64], rhs: &[f64]) -> f64 {
    matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| (row.iter().zip(x).map(|(m, c)| m * c).sum::<f64>() - b).abs())
        .fold(0.0, f64::max)
}

/// Fit of one component (real or imaginary part of `D`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentFit {
    pub float: Vec<f64>,
    #[serde(skip)]
    pub rational: Option<Vec<Coefficient>>,
    pub training_residual: f64,
    pub holdout_residual_float: f64,
    /// Holdout residual of the returned (rational if accepted) solution.
    pub holdout_residual: f64,
    pub rationalized: bool,
}

impl ComponentFit {
    fn fit(
        qr: &OrderedQr,
        train: &LinearSystem,
        rhs: &[f64],
        holdout: &LinearSystem,
        hold_rhs: &[f64],
        opts: &SolveOptions,
    ) -> Self {
        let float = qr.solve(rhs);
        let training_residual = max_residual(&train.matrix, &float, rhs);
        let holdout_residual_float = max_residual(&holdout.matrix, &float, hold_rhs);
        let candidate: Option<Vec<Coefficient>> = float
            .iter()
            .map(|&x| {
                best_rational(x, opts.max_denominator)
                    .filter(|q| (x - to_f64(*q)).abs() <= opts.rational_tol)
            })
            .collect();
        let mut fit = Self {
            float,
            rational: None,
            training_residual,
            holdout_residual_float,
            holdout_residual: holdout_residual_float,
            rationalized: false,
        };
        if let Some(q) = candidate {
            let qf: Vec<f64> = q.iter().map(|&c| to_f64(c)).collect();
            let res = max_residual(&holdout.matrix, &qf, hold_rhs);
            // rounding noise of the float fit is below 1e-12 on these systems
            if res <= opts.holdout_tol && res <= holdout_residual_float + 1e-12 {
                fit.rational = Some(q);
                fit.holdout_residual = res;
                fit.rationalized = true;
            }
        }
        fit
    }

    /// Returned coefficients as floats.
    pub fn values(&self) -> Vec<f64> {
        match &self.rational {
            Some(q) => q.iter().map(|&c| to_f64(c)).collect(),
            None => self.float.clone(),
        }
    }
}

pub(crate) fn to_f64(q: Coefficient) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Coefficients recovered for the real and imaginary parts over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredFormula {
    pub n: usize,
    pub max_slots: usize,
    pub basis: Vec<Monomial>,
    pub re: ComponentFit,
    pub im: ComponentFit,
    pub rank: usize,
    pub pivots: Vec<f64>,
    pub selected: Vec<usize>,
    pub dependent: Vec<usize>,
    pub rows: usize,
    pub holdout_rows: usize,
    pub seed: Option<u64>,
    /// Real part supported on even triple-product counts, imaginary on odd.
    pub parity_consistent: bool,
}

impl RecoveredFormula {
    fn expression(&self, fit: &ComponentFit) -> Option<AngularExpression> {
        let q = fit.rational.as_ref()?;
        let terms = self
            .basis
            .iter()
            .zip(q)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| InvariantTerm { coeff: *c, monomial: m.clone() });
        Some(AngularExpression::new(self.n, true, terms).expect("basis labels within n"))
    }

    /// The real part as an averaged expression, if rationalized.
    pub fn re_expression(&self) -> Option<AngularExpression> {
        self.expression(&self.re)
    }

    pub fn im_expression(&self) -> Option<AngularExpression> {
        self.expression(&self.im)
    }

    pub fn fully_rationalized(&self) -> bool {
        self.re.rationalized && self.im.rationalized
    }

    fn records(&self, fit: &ComponentFit) -> Vec<TermRecord> {
        let coeffs: Vec<Coefficient> = match &fit.rational {
            Some(q) => q.clone(),
            // nearest bounded fractions, flagged as unrationalized in the diagnostics
            None => fit.float.iter().map(|&x| best_rational(x, 1 << 20).unwrap_or_else(Coefficient::zero)).collect(),
        };
        self.basis
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| TermRecord::from_term(&InvariantTerm { coeff: c, monomial: m.clone() }))
            .collect()
    }

    /// `{"re": [...], "im": [...], "diagnostics": {...}}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let names = |idx: &[usize]| idx.iter().map(|&j| self.basis[j].to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "re": self.records(&self.re),
            "im": self.records(&self.im),
            "diagnostics": {
                "n": self.n,
                "max_slots": self.max_slots,
                "basis_size": self.basis.len(),
                "rank": self.rank,
                "pivots": self.pivots,
                "dependent_columns": names(&self.dependent),
                "training_residual": {"re": self.re.training_residual, "im": self.im.training_residual},
                "holdout_residual": {"re": self.re.holdout_residual, "im": self.im.holdout_residual},
                "holdout_residual_float": {"re": self.re.holdout_residual_float, "im": self.im.holdout_residual_float},
                "rationalized": {"re": self.re.rationalized, "im": self.im.rationalized},
                "parity_consistent": self.parity_consistent,
                "float_coefficients": {"re": self.re.float, "im": self.im.float},
                "rows": self.rows,
                "holdout_rows": self.holdout_rows,
                "seed": self.seed,
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("plain data serializes")
    }
}

/// Fits real and imaginary parts separately and validates on `holdout`.
pub fn solve_coefficients(
    basis: &TermBasis,
    sys: &LinearSystem,
    holdout: &LinearSystem,
    opts: &SolveOptions,
) -> Result<RecoveredFormula> {
    if sys.cols() != basis.len() || holdout.cols() != basis.len() {
        return Err(Error::InvalidInput("system columns do not match the basis".into()));
    }
    let qr = OrderedQr::factor(&sys.matrix, opts.rank_tol)?;
    let re = ComponentFit::fit(&qr, sys, &sys.rhs_re, holdout, &holdout.rhs_re, opts);
    let im = ComponentFit::fit(&qr, sys, &sys.rhs_im, holdout, &holdout.rhs_im, opts);
    let support_ok = |fit: &ComponentFit, parity: usize| {
        fit.values()
            .iter()
            .zip(&basis.reps)
            .all(|(c, m)| c.abs() <= 1e-8 || m.det_count() % 2 == parity)
    };
    let parity_consistent = support_ok(&re, 0) && support_ok(&im, 1);
    Ok(RecoveredFormula {
        n: basis.n,
        max_slots: basis.max_slots,
        basis: basis.reps.clone(),
        re,
        im,
        rank: qr.rank(),
        pivots: qr.pivots.clone(),
        selected: qr.selected.clone(),
        dependent: qr.rejected.clone(),
        rows: sys.rows(),
        holdout_rows: holdout.rows(),
        seed: sys.seed,
        parity_consistent,
    })
}

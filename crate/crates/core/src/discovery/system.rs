use rayon::prelude::*;

use super::basis::TermBasis;
use crate::angular::{averaged_expansion, AngularExpression, Directions};
use crate::det::direct_d;
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::parallel;

/// Rows are configurations, columns the group averages of the basis terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs_re: Vec<f64>,
    pub rhs_im: Vec<f64>,
    pub seed: Option<u64>,
    pub configs: Vec<Configuration<f64>>,
}

impl LinearSystem {
    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }
}

/// Explicit (expanded) forms of `Av(rep)` for every column.
pub(crate) struct ColumnEvaluator {
    n: usize,
    columns: Vec<AngularExpression>,
}

impl ColumnEvaluator {
    pub fn new(basis: &TermBasis) -> Result<Self> {
        let columns = basis
            .terms()
            .iter()
            .map(|t| AngularExpression::new(basis.n, false, averaged_expansion(t, basis.n)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: basis.n, columns })
    }

    pub fn row(&self, c: &Configuration<f64>) -> Result<Vec<f64>> {
        if c.n() != self.n {
            return Err(Error::WrongN { expected: self.n, got: c.n() });
        }
        let dirs = Directions::new(c);
        self.columns.iter().map(|e| e.eval_dirs(&dirs)).collect()
    }
}

/// `M[i][j] = Av(reps[j])` at `configs[i]`, right-hand sides from `direct_d`.
pub fn build_system(basis: &TermBasis, configs: &[Configuration<f64>]) -> Result<LinearSystem> {
    if configs.len() < basis.len() {
        return Err(Error::Underdetermined { rows: configs.len(), cols: basis.len() });
    }
    let eval = ColumnEvaluator::new(basis)?;
    let rows: Vec<(Vec<f64>, f64, f64)> = parallel::install(|| {
        configs
            .par_iter()
            .map(|c| {
                let d = direct_d(c)?.d;
                Ok((eval.row(c)?, d.re, d.im))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut sys = LinearSystem {
        matrix: Vec::with_capacity(rows.len()),
        rhs_re: Vec::with_capacity(rows.len()),
        rhs_im: Vec::with_capacity(rows.len()),
        seed: None,
        configs: configs.to_vec(),
    };
    for (row, re, im) in rows {
        sys.matrix.push(row);
        sys.rhs_re.push(re);
        sys.rhs_im.push(im);
    }
    Ok(sys)
}

//! The polynomials `p_a`, the coefficient matrix `A`, the denominator `δ`
//! and the normalized determinant `D = det(A) / δ`, all in homogeneous
//! coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{direction_table, Configuration, DirectionTable, Spinor};
use crate::scalar::{Cplx, Real};

/// `|det A|` and `|δ|` further apart than this factor mark a result as ill-conditioned.
pub const CONDITIONING_RATIO: f64 = 1e12;

/// Coefficients of a polynomial in `t`, highest power first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs<T> {
    pub coeffs: Vec<Cplx<T>>,
}

impl<T: Real> PolyCoeffs<T> {
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: Cplx<T>) -> Cplx<T> {
        self.coeffs.iter().fold(Cplx::new(T::zero(), T::zero()), |acc, &c| acc * t + c)
    }
}

/// Expands `∏ (u_b t - v_b)` by repeated convolution.
///
/// A finite root `[1 : t0]` contributes `t - t0`; a root at infinity
/// `[0 : v]` contributes the constant `-v`.
pub fn poly_from_roots<T: Real>(roots: &[Spinor<T>]) -> PolyCoeffs<T> {
    let zero = Cplx::new(T::zero(), T::zero());
    let mut coeffs = Vec::with_capacity(roots.len() + 1);
    coeffs.push(Cplx::new(T::one(), T::zero()));
    for r in roots {
        coeffs.push(zero);
        for k in (0..coeffs.len()).rev() {
            let hi = coeffs[k] * r.u;
            let lo = if k > 0 { coeffs[k - 1] * (-r.v) } else { zero };
            coeffs[k] = hi + lo;
        }
    }
    PolyCoeffs { coeffs }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    n: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Cplx::new(T::zero(), T::zero()); n * n] }
    }

    pub fn from_rows(rows: &[Vec<Cplx<T>>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Cplx<T>) {
        self.data[i * self.n + j] = z;
    }

    /// Determinant by LU elimination with partial (row) pivoting; closed
    /// form for n ≤ 2, which makes `D = 1` exact for two points.
    pub fn determinant(&self) -> Cplx<T> {
        let n = self.n;
        match n {
            0 => return Cplx::new(T::one(), T::zero()),
            1 => return self.data[0],
            2 => return self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => {}
        }
        let mut a = self.data.clone();
        let mut det = Cplx::new(T::one(), T::zero());
        for k in 0..n {
            let (piv, mag) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag == T::zero() {
                return Cplx::new(T::zero(), T::zero());
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f == Cplx::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in k + 1..n {
                    let s = a[k * n + j];
                    a[i * n + j] -= f * s;
                }
            }
        }
        det
    }
}

/// `A`: column `a` holds the coefficients of `p_a`, highest power first.
pub fn atiyah_matrix<T: Real>(table: &DirectionTable<T>) -> ComplexMatrix<T> {
    let n = table.n();
    let mut m = ComplexMatrix::zeros(n);
    let mut roots = Vec::with_capacity(n.saturating_sub(1));
    for a in 0..n {
        roots.clear();
        roots.extend((0..n).filter(|&b| b != a).map(|b| table.get(a, b)));
        let p = poly_from_roots(&roots);
        for (i, c) in p.coeffs.into_iter().enumerate() {
            m.set(i, a, c);
        }
    }
    m
}

/// `δ = ∏_{a<b} (t_ab - t_ba)` in homogeneous form.
pub fn delta<T: Real>(table: &DirectionTable<T>) -> Result<Cplx<T>> {
    let n = table.n();
    let mut acc = Cplx::new(T::one(), T::zero());
    for a in 0..n {
        for b in a + 1..n {
            let f = table.get(a, b).wedge(table.get(b, a));
            if f == Cplx::new(T::zero(), T::zero()) {
                return Err(Error::DegenerateDelta { a: a + 1, b: b + 1 });
            }
            acc *= f;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    PermFormula,
    PermSampled,
    AngularN4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::PermFormula => "perm",
            Method::PermSampled => "perm-sampled",
            Method::AngularN4 => "angular",
        }
    }
}

/// A value of `D` together with whatever intermediate quantities the method produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantResult<T> {
    pub d: Cplx<T>,
    pub det_a: Option<Cplx<T>>,
    pub delta: Option<Cplx<T>>,
    pub method: Method,
    pub ill_conditioned: bool,
}

/// `det(A) / δ` for a ready-made table.
pub fn direct_d_table<T: Real>(table: &DirectionTable<T>) -> Result<DeterminantResult<T>> {
    let dl = delta(table)?;
    let det_a = atiyah_matrix(table).determinant();
    let (ma, md) = (det_a.norm(), dl.norm());
    let ratio = T::lit(CONDITIONING_RATIO);
    let ill_conditioned = table.is_near_coincident()
        || ma == T::zero()
        || ma > md * ratio
        || md > ma * ratio;
    Ok(DeterminantResult {
        d: det_a / dl,
        det_a: Some(det_a),
        delta: Some(dl),
        method: Method::Direct,
        ill_conditioned,
    })
}

/// Normalized determinant of a configuration by direct elimination.
pub fn direct_d<T: Real>(c: &Configuration<T>) -> Result<DeterminantResult<T>> {
    direct_d_table(&direction_table(c))
}

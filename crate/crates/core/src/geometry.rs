//! Point configurations, unit directions and their stereographic images.
//!
//! Points are stored 0-based internally; every method that takes point
//! labels from the outside world (`label`, reports, file formats) uses
//! 1-based labels.

use std::ops::{Add, Mul, Neg, Sub};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Relative distance below which a pair of points is reported as near-coincident.
pub const NEAR_COINCIDENT_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn from_array([x, y, z]: [T; 3]) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm(self) -> T {
        // hypot-style scaling keeps tiny separations from underflowing
        let m = self.x.abs().max(self.y.abs()).max(self.z.abs());
        if m == T::zero() {
            return T::zero();
        }
        let (x, y, z) = (self.x / m, self.y / m, self.z / m);
        m * (x * x + y * y + z * z).sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self { x: self.x * s, y: self.y * s, z: self.z * s }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Narrow or widen the scalar type.
    pub fn cast<U: Real>(self) -> Point3<U> {
        let c = |t: T| U::from_f64(t.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan());
        Point3 { x: c(self.x), y: c(self.y), z: c(self.z) }
    }
}

impl<T: Real> Add for Point3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Point3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Point3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Point3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector<T>(Point3<T>);

impl<T: Real> UnitVector<T> {
    /// Normalizes `p`. Returns `None` for the zero vector.
    pub fn normalize(p: Point3<T>) -> Option<Self> {
        let len = p.norm();
        if len == T::zero() || !len.is_finite() {
            return None;
        }
        Some(Self(p.scale(T::one() / len)))
    }

    pub fn as_point(self) -> Point3<T> {
        self.0
    }

    pub fn x(self) -> T {
        self.0.x
    }

    pub fn y(self) -> T {
        self.0.y
    }

    pub fn z(self) -> T {
        self.0.z
    }

    pub fn dot(self, other: Self) -> T {
        self.0.dot(other.0)
    }

    /// Scalar triple product `det(self, b, c)`.
    pub fn triple(self, b: Self, c: Self) -> T {
        self.0.dot(b.0.cross(c.0))
    }
}

impl<T: Real> Neg for UnitVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Unit vector pointing from `a` toward `b`.
///
/// Fails with `CoincidentPoints { a: 1, b: 2 }` (argument positions) when
/// the points are equal.
pub fn direction<T: Real>(a: Point3<T>, b: Point3<T>) -> Result<UnitVector<T>> {
    UnitVector::normalize(b - a).ok_or(Error::CoincidentPoints { a: 1, b: 2 })
}

/// Homogeneous coordinates `[u : v]` of a point of the complex projective
/// line. The affine value is `v / u`; `u = 0` is the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor<T> {
    pub u: Cplx<T>,
    pub v: Cplx<T>,
}

impl<T: Real> Spinor<T> {
    pub fn new(u: Cplx<T>, v: Cplx<T>) -> Self {
        debug_assert!(
            u != Cplx::new(T::zero(), T::zero()) || v != Cplx::new(T::zero(), T::zero()),
            "[0:0] is not a projective point"
        );
        Self { u, v }
    }

    /// The affine point `[1 : t]`.
    pub fn finite(t: Cplx<T>) -> Self {
        Self::new(Cplx::new(T::one(), T::zero()), t)
    }

    /// The canonical point at infinity `[0 : 1]`.
    pub fn infinity() -> Self {
        Self::new(Cplx::new(T::zero(), T::zero()), Cplx::new(T::one(), T::zero()))
    }

    pub fn is_infinite(self) -> bool {
        self.u == Cplx::new(T::zero(), T::zero())
    }

    /// Affine value `v / u`, or `None` at infinity.
    pub fn value(self) -> Option<Cplx<T>> {
        (!self.is_infinite()).then(|| self.v / self.u)
    }

    /// Homogeneous difference `t_self - t_other`, i.e. the 2x2 determinant
    /// `v_self u_other - v_other u_self`.
    #[inline]
    pub fn wedge(self, other: Self) -> Cplx<T> {
        self.v * other.u - other.v * self.u
    }

    pub fn scaled(self, s: Cplx<T>) -> Self {
        Self::new(self.u * s, self.v * s)
    }
}

/// Stereographic projection from the north pole, returned as a spinor.
///
/// The lift `[1 - z : x + iy]` is used on the southern hemisphere and the
/// projectively equal `[x - iy : 1 + z]` on the northern one, so that
/// neither component is formed by cancellation.
pub fn stereographic<T: Real>(v: UnitVector<T>) -> Spinor<T> {
    let (x, y, z) = (v.x(), v.y(), v.z());
    let one = T::one();
    if z <= T::zero() {
        Spinor::new(Cplx::new(one - z, T::zero()), Cplx::new(x, y))
    } else {
        Spinor::new(Cplx::new(x, -y), Cplx::new(one + z, T::zero()))
    }
}

/// An ordered list of pairwise distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T> {
    points: Vec<Point3<T>>,
    near_coincident: bool,
}

impl<T: Real> Configuration<T> {
    pub fn new(points: Vec<Point3<T>>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i + 1));
        }
        let mut min_dist = T::infinity();
        let mut diameter = T::zero();
        for a in 0..n {
            for b in a + 1..n {
                let d = (points[b] - points[a]).norm();
                if d == T::zero() {
                    return Err(Error::CoincidentPoints { a: a + 1, b: b + 1 });
                }
                min_dist = min_dist.min(d);
                diameter = diameter.max(d);
            }
        }
        let near_coincident = min_dist < T::lit(NEAR_COINCIDENT_REL) * diameter;
        if near_coincident {
            warn!(
                "ill-conditioned configuration: minimum separation {:e} against diameter {:e}",
                min_dist.to_f64().unwrap_or(f64::NAN),
                diameter.to_f64().unwrap_or(f64::NAN)
            );
        }
        Ok(Self { points, near_coincident })
    }

    pub fn from_arrays(points: &[[T; 3]]) -> Result<Self> {
        Self::new(points.iter().copied().map(Point3::from_array).collect())
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point3<T>] {
        &self.points
    }

    pub fn to_arrays(&self) -> Vec<[T; 3]> {
        self.points.iter().map(|p| p.to_array()).collect()
    }

    /// Some pair is closer than `1e-12` times the diameter.
    pub fn is_near_coincident(&self) -> bool {
        self.near_coincident
    }

    /// `v_ab` for 0-based indices.
    pub fn direction(&self, a: usize, b: usize) -> UnitVector<T> {
        // distinctness was checked on construction
        direction(self.points[a], self.points[b]).expect("validated configuration")
    }

    /// Applies `f` to every point and revalidates.
    pub fn map_points(&self, f: impl Fn(Point3<T>) -> Point3<T>) -> Result<Self> {
        Self::new(self.points.iter().map(|&p| f(p)).collect())
    }

    /// Moves the point labelled `a` to label `perm[a]` (0-based bijection).
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n(), "relabeling has the wrong length");
        let mut points = self.points.clone();
        for (a, &pa) in perm.iter().enumerate() {
            points[pa] = self.points[a];
        }
        Self { points, near_coincident: self.near_coincident }
    }

    pub fn cast<U: Real>(&self) -> Result<Configuration<U>> {
        Configuration::new(self.points.iter().map(|p| p.cast()).collect())
    }
}

/// The spinors `t_ab` for all ordered pairs `a != b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionTable<T> {
    n: usize,
    entries: Vec<Spinor<T>>,
    near_coincident: bool,
}

impl<T: Real> DirectionTable<T> {
    pub fn from_configuration(c: &Configuration<T>) -> Self {
        let n = c.n();
        let filler = Spinor::infinity();
        let mut entries = vec![filler; n * n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    entries[a * n + b] = stereographic(c.direction(a, b));
                }
            }
        }
        Self { n, entries, near_coincident: c.is_near_coincident() }
    }

    /// Builds a table directly from spinors. `f(a, b)` is called for every
    /// ordered pair of distinct 0-based indices.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Spinor<T>) -> Self {
        let mut entries = vec![Spinor::infinity(); n * n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    entries[a * n + b] = f(a, b);
                }
            }
        }
        Self { n, entries, near_coincident: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `t_ab` for 0-based `a != b`.
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Spinor<T> {
        debug_assert!(a != b && a < self.n && b < self.n);
        self.entries[a * self.n + b]
    }

    /// `t_ab` for 1-based labels.
    pub fn label(&self, a: usize, b: usize) -> Result<Spinor<T>> {
        for i in [a, b] {
            if i == 0 || i > self.n {
                return Err(Error::IndexOutOfRange { index: i, n: self.n });
            }
        }
        if a == b {
            return Err(Error::InvalidInput(format!("t_{a}{b} is not defined")));
        }
        Ok(self.get(a - 1, b - 1))
    }

    /// Multiplies the homogeneous representative of `t_ab` by `s`.
    pub fn rescale(&mut self, a: usize, b: usize, s: Cplx<T>) {
        assert!(a != b);
        let n = self.n;
        self.entries[a * n + b] = self.entries[a * n + b].scaled(s);
    }

    pub fn is_near_coincident(&self) -> bool {
        self.near_coincident
    }
}

/// Convenience wrapper for [`DirectionTable::from_configuration`].
pub fn direction_table<T: Real>(c: &Configuration<T>) -> DirectionTable<T> {
    DirectionTable::from_configuration(c)
}

/// On-disk configuration: `{"points": [[x, y, z], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationFile {
    pub points: Vec<[f64; 3]>,
}

impl ConfigurationFile {
    pub fn parse(json: &str) -> Result<Configuration<f64>> {
        let file: ConfigurationFile =
            serde_json::from_str(json).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Configuration::from_arrays(&file.points)
    }

    pub fn from_configuration(c: &Configuration<f64>) -> Self {
        Self { points: c.to_arrays() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    fn projective_value(s: Spinor<f64>) -> Option<Cplx<f64>> {
        s.value()
    }

    #[test]
    fn direction_examples() {
        let v = direction(p(0., 0., 0.), p(0., 0., 2.)).unwrap();
        assert_eq!(v.as_point(), p(0., 0., 1.));
        let v = direction(p(0., 0., 0.), p(3., 4., 0.)).unwrap();
        assert!((v.x() - 0.6).abs() < 1e-15 && (v.y() - 0.8).abs() < 1e-15 && v.z() == 0.0);
        assert_eq!(
            direction(p(1., 1., 1.), p(1., 1., 1.)),
            Err(Error::CoincidentPoints { a: 1, b: 2 })
        );
    }

    #[test]
    fn stereographic_examples() {
        let north = stereographic(UnitVector::normalize(p(0., 0., 1.)).unwrap());
        assert!(north.is_infinite());
        assert_eq!(north.v, Cplx::new(2.0, 0.0));

        let south = stereographic(UnitVector::normalize(p(0., 0., -1.)).unwrap());
        assert_eq!(projective_value(south), Some(Cplx::new(0.0, 0.0)));

        let east = stereographic(UnitVector::normalize(p(1., 0., 0.)).unwrap());
        assert_eq!(projective_value(east), Some(Cplx::new(1.0, 0.0)));
    }

    #[test]
    fn two_point_tables() {
        let c = Configuration::from_arrays(&[[0., 0., 0.], [0., 0., 1.]]).unwrap();
        let t = direction_table(&c);
        assert!(t.label(1, 2).unwrap().is_infinite());
        assert_eq!(t.label(2, 1).unwrap().value(), Some(Cplx::new(0.0, 0.0)));

        let c = Configuration::from_arrays(&[[0., 0., 0.], [1., 0., 0.]]).unwrap();
        let t = direction_table(&c);
        assert_eq!(t.label(1, 2).unwrap().value(), Some(Cplx::new(1.0, 0.0)));
        assert_eq!(t.label(2, 1).unwrap().value(), Some(Cplx::new(-1.0, 0.0)));
        assert!(t.label(0, 1).is_err());
        assert!(t.label(1, 1).is_err());
    }

    #[test]
    fn configuration_validation() {
        assert_eq!(Configuration::<f64>::from_arrays(&[[0., 0., 0.]]), Err(Error::TooFewPoints(1)));
        assert_eq!(
            Configuration::from_arrays(&[[0., 0., 0.], [1., 0., 0.], [0., 0., 0.]]),
            Err(Error::CoincidentPoints { a: 1, b: 3 })
        );
        assert_eq!(
            Configuration::from_arrays(&[[0., 0., 0.], [f64::NAN, 0., 0.]]),
            Err(Error::NonFinite(2))
        );
        let c = Configuration::from_arrays(&[[0., 0., 0.], [1., 0., 0.], [1. + 1e-14, 0., 0.]])
            .unwrap();
        assert!(c.is_near_coincident());
    }

    #[test]
    fn relabel_moves_points() {
        let c = Configuration::from_arrays(&[[0., 0., 0.], [1., 0., 0.], [0., 1., 0.]]).unwrap();
        let r = c.relabel(&[2, 0, 1]);
        assert_eq!(r.points()[2], c.points()[0]);
        assert_eq!(r.points()[0], c.points()[1]);
        // v_ab of the relabelled configuration is v_{perm^-1(a) perm^-1(b)} of the original
        assert_eq!(r.direction(2, 0).as_point(), c.direction(0, 1).as_point());
    }

    #[test]
    fn file_format() {
        let c = ConfigurationFile::parse(r#"{"points": [[0,0,0],[1,2,3]]}"#).unwrap();
        assert_eq!(c.n(), 2);
        assert!(ConfigurationFile::parse(r#"{"points": [[0,0,0]]}"#).is_err());
        assert!(ConfigurationFile::parse(r#"{"points": [[0,0,0],[0,0,0]]}"#).is_err());
        assert!(ConfigurationFile::parse(r#"{"points": [[0,0]]}"#).is_err());
        let back = ConfigurationFile::parse(&ConfigurationFile::from_configuration(&c).to_json());
        assert_eq!(back.unwrap(), c);
    }

    fn unit() -> impl Strategy<Value = UnitVector<f64>> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter_map("zero vector", |(x, y, z)| {
                let q = p(x, y, z);
                (q.norm() > 1e-3).then(|| UnitVector::normalize(q)).flatten()
            })
    }

    proptest! {
        #[test]
        fn antipodal_spinors(v in unit()) {
            let s = stereographic(v);
            let t = stereographic(-v);
            // rows (u_ab, v_ab) and (conj v_ba, -conj u_ba) are dependent
            let det = s.u * (-t.u.conj()) - s.v * t.v.conj();
            prop_assert!(det.norm() < 1e-10);
            if let (Some(a), Some(b)) = (s.value(), t.value()) {
                if a.norm() > 1e-6 {
                    prop_assert!((b + a.conj().inv()).norm() < 1e-10 * (1.0 + b.norm()));
                }
            }
        }

        #[test]
        fn both_lifts_agree(v in unit()) {
            prop_assume!(v.z().abs() < 1.0 - 1e-9);
            let (x, y, z) = (v.x(), v.y(), v.z());
            let south = Spinor::new(Cplx::new(1.0 - z, 0.0), Cplx::new(x, y));
            let north = Spinor::new(Cplx::new(x, -y), Cplx::new(1.0 + z, 0.0));
            prop_assert!(south.wedge(north).norm() < 1e-12);
        }

        #[test]
        fn opposite_directions(a in prop::array::uniform3(-10.0f64..10.0),
                               b in prop::array::uniform3(-10.0f64..10.0)) {
            let (a, b) = (Point3::from_array(a), Point3::from_array(b));
            prop_assume!((a - b).norm() > 1e-6);
            let s = direction(a, b).unwrap().as_point() + direction(b, a).unwrap().as_point();
            prop_assert!(s.x.abs() <= 1e-15 && s.y.abs() <= 1e-15 && s.z.abs() <= 1e-15);
        }
    }
}

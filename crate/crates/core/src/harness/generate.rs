//! Seeded configuration generators.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Point3};
use crate::rng::{stream_rng, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    UniformBall,
    Gaussian,
    Collinear,
    NearDegenerate,
    Polygon,
    Tetrahedron,
    Square,
    Pyramid,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 8] = [
        GeneratorKind::UniformBall,
        GeneratorKind::Gaussian,
        GeneratorKind::Collinear,
        GeneratorKind::NearDegenerate,
        GeneratorKind::Polygon,
        GeneratorKind::Tetrahedron,
        GeneratorKind::Square,
        GeneratorKind::Pyramid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::UniformBall => "uniform_ball",
            GeneratorKind::Gaussian => "gaussian",
            GeneratorKind::Collinear => "collinear",
            GeneratorKind::NearDegenerate => "near_degenerate",
            GeneratorKind::Polygon => "polygon",
            GeneratorKind::Tetrahedron => "tetrahedron",
            GeneratorKind::Square => "square",
            GeneratorKind::Pyramid => "pyramid",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown generator kind {s:?}")))
    }
}

/// Everything needed to reproduce one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
    /// Random stream within the seed; scans use the trial index.
    #[serde(default)]
    pub stream: u64,
    /// Separation of the close pair for `near_degenerate`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Rejection threshold on the minimum pairwise distance (random kinds).
    #[serde(default)]
    pub min_separation: f64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        Self { kind, n, seed, stream: 0, epsilon: None, min_separation: 0.0 }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn with_min_separation(mut self, d: f64) -> Self {
        self.min_separation = d;
        self
    }
}

/// Uniformly random rotation from a normalized Gaussian quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub fn random(rng: &mut impl Rng) -> Self {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let len = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        Self::from_quaternion(q.map(|x| x / len))
    }

    fn from_quaternion([w, x, y, z]: [f64; 4]) -> Self {
        Self {
            m: [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ],
        }
    }

    pub fn apply(&self, p: Point3<f64>) -> Point3<f64> {
        let r = |i: usize| self.m[i][0] * p.x + self.m[i][1] * p.y + self.m[i][2] * p.z;
        Point3::new(r(0), r(1), r(2))
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Point3<f64> {
    loop {
        let p = Point3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let len = p.norm();
        if len > 1e-9 {
            return p.scale(1.0 / len);
        }
    }
}

pub fn uniform_in_ball(rng: &mut impl Rng) -> Point3<f64> {
    loop {
        let p = Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if p.dot(p) <= 1.0 {
            return p;
        }
    }
}

fn min_distance(points: &[Point3<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            best = best.min((points[b] - points[a]).norm());
        }
    }
    best
}

const MAX_REJECTIONS: usize = 100_000;

fn rejection(
    spec: &GeneratorSpec,
    rng: &mut StreamRng,
    mut draw: impl FnMut(&mut StreamRng) -> Vec<Point3<f64>>,
) -> Result<Configuration<f64>> {
    for _ in 0..MAX_REJECTIONS {
        let pts = draw(rng);
        if min_distance(&pts) > spec.min_separation {
            return Configuration::new(pts);
        }
    }
    Err(Error::InvalidSpec(format!(
        "could not place {} points with separation above {}",
        spec.n, spec.min_separation
    )))
}

fn require_n(spec: &GeneratorSpec, n: usize) -> Result<()> {
    if spec.n != n {
        return Err(Error::InvalidSpec(format!("{} needs n = {n}, got {}", spec.kind, spec.n)));
    }
    Ok(())
}

/// Deterministic in `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Configuration<f64>> {
    if spec.n < 2 {
        return Err(Error::InvalidSpec(format!("n = {} is below 2", spec.n)));
    }
    if !(spec.min_separation >= 0.0 && spec.min_separation.is_finite()) {
        return Err(Error::InvalidSpec("min_separation must be finite and nonnegative".into()));
    }
    let mut rng = stream_rng(spec.seed, spec.stream);
    let n = spec.n;
    match spec.kind {
        GeneratorKind::UniformBall => rejection(spec, &mut rng, |r| (0..n).map(|_| uniform_in_ball(r)).collect()),
        GeneratorKind::Gaussian => rejection(spec, &mut rng, |r| {
            (0..n)
                .map(|_| Point3::new(StandardNormal.sample(r), StandardNormal.sample(r), StandardNormal.sample(r)))
                .collect()
        }),
        GeneratorKind::Collinear => rejection(spec, &mut rng, |r| {
            let dir = random_unit(r);
            let origin = uniform_in_ball(r);
            (0..n).map(|_| origin + dir * r.random_range(-1.0..1.0)).collect()
        }),
        GeneratorKind::NearDegenerate => {
            let eps = spec
                .epsilon
                .ok_or_else(|| Error::InvalidSpec("near_degenerate needs epsilon".into()))?;
            if !(1e-9..=1e-1).contains(&eps) {
                return Err(Error::InvalidSpec(format!("epsilon {eps} outside [1e-9, 1e-1]")));
            }
            for _ in 0..MAX_REJECTIONS {
                let mut pts: Vec<_> = (0..n).map(|_| uniform_in_ball(&mut rng)).collect();
                pts[1] = pts[0] + random_unit(&mut rng) * eps;
                // only the designated pair may be closer than epsilon
                let others = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| (a, b) != (0, 1))
                    .all(|(a, b)| (pts[b] - pts[a]).norm() > eps.max(spec.min_separation));
                if others {
                    return Configuration::new(pts);
                }
            }
            Err(Error::InvalidSpec("could not isolate the close pair".into()))
        }
        GeneratorKind::Polygon => {
            let rot = Rotation::random(&mut rng);
            let step = std::f64::consts::TAU / n as f64;
            Configuration::new(
                (0..n)
                    .map(|k| rot.apply(Point3::new((step * k as f64).cos(), (step * k as f64).sin(), 0.0)))
                    .collect(),
            )
        }
        GeneratorKind::Tetrahedron => {
            require_n(spec, 4)?;
            let s = 1.0 / 3f64.sqrt();
            Configuration::from_arrays(&[[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]])
        }
        GeneratorKind::Square => {
            require_n(spec, 4)?;
            Configuration::from_arrays(&[[0.5, 0.5, 0.], [-0.5, 0.5, 0.], [-0.5, -0.5, 0.], [0.5, -0.5, 0.]])
        }
        GeneratorKind::Pyramid => {
            require_n(spec, 5)?;
            Configuration::from_arrays(&[
                [0.5, 0.5, 0.],
                [-0.5, 0.5, 0.],
                [-0.5, -0.5, 0.],
                [0.5, -0.5, 0.],
                [0., 0., 1.],
            ])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = GeneratorSpec::new(GeneratorKind::UniformBall, 4, 42);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(generate(&spec).unwrap(), generate(&spec.with_stream(1)).unwrap());
    }

    #[test]
    fn shapes_validate_n() {
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Tetrahedron, 5, 0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Pyramid, 5, 0)).is_ok());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::NearDegenerate, 4, 0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::NearDegenerate, 4, 0).with_epsilon(1.0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::UniformBall, 1, 0)).is_err());
    }

    #[test]
    fn near_degenerate_pair() {
        let c = generate(&GeneratorSpec::new(GeneratorKind::NearDegenerate, 4, 3).with_epsilon(1e-6)).unwrap();
        let d = (c.points()[1] - c.points()[0]).norm();
        assert!((d - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn separation_and_ball() {
        let spec = GeneratorSpec::new(GeneratorKind::UniformBall, 6, 9).with_min_separation(0.05);
        for s in 0..20 {
            let c = generate(&spec.with_stream(s)).unwrap();
            assert!(min_distance(c.points()) > 0.05);
            assert!(c.points().iter().all(|p| p.norm() <= 1.0));
        }
    }

    #[test]
    fn rotations_are_proper() {
        let mut rng = stream_rng(1, 2);
        for _ in 0..10 {
            let r = Rotation::random(&mut rng);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
            let p = Point3::new(0.3, -1.2, 2.0);
            assert!((r.apply(p).norm() - p.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn names_round_trip() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
        }
        assert_eq!("near-degenerate".parse::<GeneratorKind>().unwrap(), GeneratorKind::NearDegenerate);
        assert!("blob".parse::<GeneratorKind>().is_err());
    }
}

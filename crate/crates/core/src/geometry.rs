//! Points, lines and line charts in the complex projective plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, domains};

/// Threshold on `|p × q|` (normalized representatives) for projective equality.
pub const PROJECTIVE_EQ_TOL: f64 = 1e-10;
/// Threshold on `|l · p|` (normalized representatives) for incidence.
pub const INCIDENCE_TOL: f64 = 1e-9;
/// Minimum projective separation between the two defining points of a chart.
pub const CHART_SEPARATION: f64 = 0.1;

pub type Triple = [Complex64; 3];

pub(crate) fn cross(a: &Triple, b: &Triple) -> Triple {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Bilinear (not Hermitian) pairing, i.e. the value of a line at a point.
pub(crate) fn dot(a: &Triple, b: &Triple) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &Triple) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

fn max_modulus_index(a: &Triple) -> usize {
    let mut best = 0;
    for k in 1..3 {
        if a[k].norm() > a[best].norm() {
            best = k;
        }
    }
    best
}

/// Scale so the first coordinate of maximal modulus equals exactly one.
fn normalize(a: Triple) -> Result<Triple> {
    if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::ZeroVector);
    }
    let k = max_modulus_index(&a);
    if a[k].norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let s = a[k].inv();
    let mut out = [a[0] * s, a[1] * s, a[2] * s];
    out[k] = Complex64::new(1.0, 0.0);
    Ok(out)
}

/// Projective separation `|a × b| / (|a||b|)`, the sine of the angle between
/// the two representatives.
pub(crate) fn separation(a: &Triple, b: &Triple) -> f64 {
    norm(&cross(a, b)) / (norm(a) * norm(b))
}

/// A point `(x : y : z)` of the projective plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPoint {
    coords: Triple,
}

impl HomogeneousPoint {
    pub fn new(coords: Triple) -> Result<Self> {
        Ok(Self {
            coords: normalize(coords)?,
        })
    }

    pub fn from_real(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new([x.into(), y.into(), z.into()])
    }

    /// Normalized representative: the largest coordinate equals one.
    pub fn coords(&self) -> &Triple {
        &self.coords
    }

    pub fn projectively_eq(&self, other: &Self) -> bool {
        norm(&cross(&self.coords, &other.coords)) <= PROJECTIVE_EQ_TOL
    }
}

/// The line `a x + b y + c z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveLine {
    coeffs: Triple,
}

impl ProjectiveLine {
    pub fn new(coeffs: Triple) -> Result<Self> {
        Ok(Self {
            coeffs: normalize(coeffs)?,
        })
    }

    pub fn coeffs(&self) -> &Triple {
        &self.coeffs
    }

    /// `|l · p|` on normalized representatives.
    pub fn residual(&self, p: &HomogeneousPoint) -> f64 {
        dot(&self.coeffs, p.coords()).norm()
    }

    pub fn contains(&self, p: &HomogeneousPoint) -> bool {
        self.residual(p) <= INCIDENCE_TOL
    }

    pub fn projectively_eq(&self, other: &Self) -> bool {
        norm(&cross(&self.coeffs, &other.coeffs)) <= PROJECTIVE_EQ_TOL
    }

    /// Orthonormal (Hermitian) basis of the 2-dimensional subspace of
    /// representatives of points on the line.
    fn point_basis(&self) -> [Triple; 2] {
        let w: Triple = [
            self.coeffs[0].conj(),
            self.coeffs[1].conj(),
            self.coeffs[2].conj(),
        ];
        let wn = norm(&w);
        let w = [w[0] / wn, w[1] / wn, w[2] / wn];
        let herm = |a: &Triple, b: &Triple| -> Complex64 {
            a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
        };
        let mut candidates: Vec<Triple> = (0..3)
            .map(|k| {
                let mut e = [Complex64::new(0.0, 0.0); 3];
                e[k] = Complex64::new(1.0, 0.0);
                let c = herm(&w, &e);
                [e[0] - c * w[0], e[1] - c * w[1], e[2] - c * w[2]]
            })
            .collect();
        candidates.sort_by(|a, b| norm(b).total_cmp(&norm(a)));
        let first = candidates[0];
        let n1 = norm(&first);
        let u1 = [first[0] / n1, first[1] / n1, first[2] / n1];
        let second = candidates[1];
        let c = herm(&u1, &second);
        let v = [
            second[0] - c * u1[0],
            second[1] - c * u1[1],
            second[2] - c * u1[2],
        ];
        let n2 = norm(&v);
        [u1, [v[0] / n2, v[1] / n2, v[2] / n2]]
    }
}

/// Extended complex parameter on a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Finite(Complex64),
    Infinity,
}

impl Param {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Param::Finite(t) => Some(t),
            Param::Infinity => None,
        }
    }
}

/// Parametrization `t ↦ base + t·direction` of a line; `t = ∞` is `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineChart {
    line: ProjectiveLine,
    base: HomogeneousPoint,
    direction: HomogeneousPoint,
}

impl LineChart {
    pub fn new(
        line: ProjectiveLine,
        base: HomogeneousPoint,
        direction: HomogeneousPoint,
    ) -> Result<Self> {
        for p in [&base, &direction] {
            let residual = line.residual(p);
            if residual > INCIDENCE_TOL {
                return Err(Error::PointOffLine { residual });
            }
        }
        if norm(&cross(base.coords(), direction.coords())) < PROJECTIVE_EQ_TOL {
            return Err(Error::CoincidentPoints);
        }
        Ok(Self {
            line,
            base,
            direction,
        })
    }

    pub fn line(&self) -> &ProjectiveLine {
        &self.line
    }

    pub fn base(&self) -> &HomogeneousPoint {
        &self.base
    }

    pub fn direction(&self) -> &HomogeneousPoint {
        &self.direction
    }

    /// The (unnormalized) representative `base + t·direction`. This is the
    /// representative every restriction `f(base + t·direction)` refers to.
    pub fn representative(&self, t: Complex64) -> Triple {
        let b = self.base.coords();
        let d = self.direction.coords();
        [b[0] + t * d[0], b[1] + t * d[1], b[2] + t * d[2]]
    }

    pub fn point_at(&self, t: Param) -> HomogeneousPoint {
        match t {
            Param::Finite(t) => {
                HomogeneousPoint::new(self.representative(t)).expect("chart points are independent")
            }
            Param::Infinity => self.direction,
        }
    }
}

pub fn line_through(p: &HomogeneousPoint, q: &HomogeneousPoint) -> Result<ProjectiveLine> {
    let c = cross(p.coords(), q.coords());
    if norm(&c) <= PROJECTIVE_EQ_TOL {
        return Err(Error::CoincidentPoints);
    }
    ProjectiveLine::new(c)
}

pub fn intersect(l1: &ProjectiveLine, l2: &ProjectiveLine) -> Result<HomogeneousPoint> {
    let c = cross(l1.coeffs(), l2.coeffs());
    if norm(&c) <= PROJECTIVE_EQ_TOL {
        return Err(Error::CoincidentLines);
    }
    HomogeneousPoint::new(c)
}

/// A seeded chart on `line`. Base and direction are random unit combinations
/// of an orthonormal basis of the line, redrawn until their projective
/// separation is at least [`CHART_SEPARATION`].
pub fn chart_of(line: &ProjectiveLine, seed: u64) -> LineChart {
    let [u, v] = line.point_basis();
    let mut rng = rng::seeded(seed, domains::CHART);
    let draw = |rng: &mut rng::SeededRng| -> Triple {
        let a = rng::unit_disk(rng);
        let b = rng::unit_disk(rng);
        [
            a * u[0] + b * v[0],
            a * u[1] + b * v[1],
            a * u[2] + b * v[2],
        ]
    };
    loop {
        let base = draw(&mut rng);
        let direction = draw(&mut rng);
        if norm(&base) < 1e-3 || norm(&direction) < 1e-3 {
            continue;
        }
        let (Ok(base), Ok(direction)) = (
            HomogeneousPoint::new(base),
            HomogeneousPoint::new(direction),
        ) else {
            continue;
        };
        if separation(base.coords(), direction.coords()) < CHART_SEPARATION {
            continue;
        }
        if let Ok(chart) = LineChart::new(*line, base, direction) {
            return chart;
        }
    }
}

/// Inverse of [`LineChart::point_at`].
pub fn param_of_point(chart: &LineChart, p: &HomogeneousPoint) -> Result<Param> {
    let residual = chart.line().residual(p);
    if residual > INCIDENCE_TOL {
        return Err(Error::PointOffLine { residual });
    }
    let b = chart.base().coords();
    let d = chart.direction().coords();
    let w = cross(b, d);
    let wc: Triple = [w[0].conj(), w[1].conj(), w[2].conj()];
    // p ~ α b + β d  ⇒  p × d = α w,  p × b = -β w
    let alpha = dot(&cross(p.coords(), d), &wc);
    let beta = -dot(&cross(p.coords(), b), &wc);
    if alpha.norm() <= PROJECTIVE_EQ_TOL * beta.norm().max(norm(&w).powi(2)) {
        return Ok(Param::Infinity);
    }
    Ok(Param::Finite(beta / alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn i() -> Complex64 {
        c(0.0, 1.0)
    }

    #[test]
    fn line_through_axes_points() {
        let p = HomogeneousPoint::from_real(1.0, 0.0, 0.0).unwrap();
        let q = HomogeneousPoint::from_real(0.0, 1.0, 0.0).unwrap();
        let l = line_through(&p, &q).unwrap();
        let expected = ProjectiveLine::new([0.0.into(), 0.0.into(), 1.0.into()]).unwrap();
        assert!(l.projectively_eq(&expected));
        assert_eq!(l.coeffs()[2], c(1.0, 0.0));
    }

    #[test]
    fn line_through_same_point_fails() {
        let p = HomogeneousPoint::from_real(1.0, 0.0, 0.0).unwrap();
        assert_eq!(line_through(&p, &p), Err(Error::CoincidentPoints));
    }

    #[test]
    fn line_through_unit_root_point() {
        let p = HomogeneousPoint::new([c(1.0, 0.0), i(), c(0.0, 0.0)]).unwrap();
        let q = HomogeneousPoint::from_real(0.0, 0.0, 1.0).unwrap();
        let l = line_through(&p, &q).unwrap();
        let expected = ProjectiveLine::new([i(), c(-1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(l.projectively_eq(&expected));
    }

    #[test]
    fn intersect_examples() {
        let x = ProjectiveLine::new([1.0.into(), 0.0.into(), 0.0.into()]).unwrap();
        let y = ProjectiveLine::new([0.0.into(), 1.0.into(), 0.0.into()]).unwrap();
        let p = intersect(&x, &y).unwrap();
        assert!(p.projectively_eq(&HomogeneousPoint::from_real(0.0, 0.0, 1.0).unwrap()));
        assert_eq!(intersect(&x, &x), Err(Error::CoincidentLines));

        let l1 = ProjectiveLine::new([i(), c(-1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let l2 = ProjectiveLine::new([c(0.0, 0.0), i(), c(-1.0, 0.0)]).unwrap();
        let p = intersect(&l1, &l2).unwrap();
        let expected = HomogeneousPoint::new([c(1.0, 0.0), i(), i() * i()]).unwrap();
        assert!(p.projectively_eq(&expected));
    }

    #[test]
    fn chart_is_valid_and_deterministic() {
        let z = ProjectiveLine::new([0.0.into(), 0.0.into(), 1.0.into()]).unwrap();
        let a = chart_of(&z, 0);
        assert!(z.contains(a.base()) && z.contains(a.direction()));
        assert!(separation(a.base().coords(), a.direction().coords()) >= CHART_SEPARATION);
        assert_eq!(a, chart_of(&z, 0));
        let b = chart_of(&z, 1);
        assert!(z.contains(b.base()) && z.contains(b.direction()));
    }

    #[test]
    fn params_of_chart_points() {
        let l = ProjectiveLine::new([c(0.3, 0.1), c(-1.0, 0.2), c(0.5, 0.0)]).unwrap();
        let chart = chart_of(&l, 3);
        assert_eq!(
            param_of_point(&chart, chart.base()).unwrap(),
            Param::Finite(c(0.0, 0.0))
        );
        assert_eq!(
            param_of_point(&chart, chart.direction()).unwrap(),
            Param::Infinity
        );
        let p = chart.point_at(Param::Finite(c(2.0, 0.0)));
        let t = param_of_point(&chart, &p).unwrap().finite().unwrap();
        assert_relative_eq!(t.re, 2.0, epsilon = 1e-12);
        assert!(t.im.abs() < 1e-12);
    }

    #[test]
    fn param_of_point_off_line() {
        let z = ProjectiveLine::new([0.0.into(), 0.0.into(), 1.0.into()]).unwrap();
        let chart = chart_of(&z, 0);
        let p = HomogeneousPoint::from_real(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            param_of_point(&chart, &p),
            Err(Error::PointOffLine { .. })
        ));
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(
            HomogeneousPoint::from_real(0.0, 0.0, 0.0),
            Err(Error::ZeroVector)
        );
    }
}

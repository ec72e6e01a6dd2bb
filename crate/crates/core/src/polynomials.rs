//! Homogeneous trivariate forms, their restrictions to line charts, and
//! univariate root finding with multiplicities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{HomogeneousPoint, LineChart, Triple};
use crate::union_find::UnionFind;

/// Default clustering radius for roots.
pub const DEFAULT_CLUSTER_EPS: f64 = 1e-6;
/// Relative backward-error tolerance used to certify a multiple root.
pub const DEFAULT_MULTIPLICITY_TOL: f64 = 1e-10;
/// Coefficients below this fraction of the largest one are treated as zero
/// when trimming the leading end of a restriction.
pub const TRIM_TOL: f64 = 1e-12;
const MAX_ABERTH_ITERATIONS: usize = 200;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn monomial_count(degree: u32) -> usize {
    let d = degree as usize;
    (d + 1) * (d + 2) / 2
}

/// Homogeneous polynomial in `x, y, z` with dense coefficient storage.
///
/// Monomials are ordered by decreasing power of `x`, then decreasing power
/// of `y`; `x^a y^b z^c` sits at index `(d-a)(d-a+1)/2 + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivariateForm {
    degree: u32,
    coeffs: Vec<Complex64>,
}

impl TrivariateForm {
    pub fn zero(degree: u32) -> Self {
        Self {
            degree,
            coeffs: vec![zero(); monomial_count(degree)],
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![c],
        }
    }

    /// The linear form `a x + b y + c z`.
    pub fn linear(coeffs: &Triple) -> Self {
        let mut f = Self::zero(1);
        f.set(1, 0, 0, coeffs[0]);
        f.set(0, 1, 0, coeffs[1]);
        f.set(0, 0, 1, coeffs[2]);
        f
    }

    pub fn from_terms(degree: u32, terms: &[([u32; 3], Complex64)]) -> Result<Self> {
        let mut f = Self::zero(degree);
        for &([a, b, c], v) in terms {
            if a + b + c != degree {
                return Err(Error::ConfigInvalid(format!(
                    "monomial x^{a} y^{b} z^{c} does not have degree {degree}"
                )));
            }
            let idx = Self::index(degree, a, c);
            f.coeffs[idx] += v;
        }
        Ok(f)
    }

    fn index(degree: u32, a: u32, c: u32) -> usize {
        let r = (degree - a) as usize;
        r * (r + 1) / 2 + c as usize
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficient(&self, a: u32, b: u32, c: u32) -> Complex64 {
        assert_eq!(a + b + c, self.degree, "exponents must sum to the degree");
        self.coeffs[Self::index(self.degree, a, c)]
    }

    pub fn set(&mut self, a: u32, b: u32, c: u32, v: Complex64) {
        assert_eq!(a + b + c, self.degree, "exponents must sum to the degree");
        let idx = Self::index(self.degree, a, c);
        self.coeffs[idx] = v;
    }

    /// `(exponents, coefficient)` pairs in storage order.
    pub fn terms(&self) -> impl Iterator<Item = ([u32; 3], Complex64)> + '_ {
        let d = self.degree;
        (0..=d)
            .rev()
            .flat_map(move |a| (0..=d - a).rev().map(move |b| [a, b, d - a - b]))
            .zip(self.coeffs.iter().copied())
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Sum of coefficient moduli; bounds `|f|` on normalized points.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == zero())
    }

    /// Value at an arbitrary representative.
    pub fn eval_raw(&self, v: &Triple) -> Complex64 {
        let d = self.degree as usize;
        let pow = |x: Complex64| {
            let mut p = Vec::with_capacity(d + 1);
            let mut acc = one();
            for _ in 0..=d {
                p.push(acc);
                acc *= x;
            }
            p
        };
        let (px, py, pz) = (pow(v[0]), pow(v[1]), pow(v[2]));
        self.terms()
            .map(|([a, b, c], k)| k * px[a as usize] * py[b as usize] * pz[c as usize])
            .sum()
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for ([a1, b1, c1], k1) in self.terms() {
            if k1 == zero() {
                continue;
            }
            for ([a2, b2, c2], k2) in other.terms() {
                let idx = Self::index(out.degree, a1 + a2, c1 + c2);
                out.coeffs[idx] += k1 * k2;
                debug_assert_eq!(a1 + a2 + b1 + b2 + c1 + c2, out.degree);
            }
        }
        out
    }

    pub fn power(&self, k: u32) -> Self {
        let mut out = Self::constant(one());
        for _ in 0..k {
            out = out.multiply(self);
        }
        out
    }

    /// Partial derivative with respect to coordinate `var` (0 = x, 1 = y, 2 = z).
    pub fn partial(&self, var: usize) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.degree - 1);
        for (e, k) in self.terms() {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e;
            e2[var] -= 1;
            let idx = Self::index(out.degree, e2[0], e2[2]);
            out.coeffs[idx] += k * e[var] as f64;
        }
        out
    }
}

/// Value of `f` at the normalized representative of `p`. This choice fixes
/// the trivialization in which fibers `{s : s^m = F(p)}` are compared.
pub fn evaluate(f: &TrivariateForm, p: &HomogeneousPoint) -> Complex64 {
    f.eval_raw(p.coords())
}

pub fn multiply(f: &TrivariateForm, g: &TrivariateForm) -> TrivariateForm {
    f.multiply(g)
}

pub fn power(f: &TrivariateForm, k: u32) -> TrivariateForm {
    f.power(k)
}

pub fn gradient(f: &TrivariateForm, p: &HomogeneousPoint) -> Triple {
    [0, 1, 2].map(|v| f.partial(v).eval_raw(p.coords()))
}

/// Univariate polynomial, coefficients in ascending degree. The length of
/// the coefficient vector is the nominal degree plus one; leading
/// coefficients may vanish (roots at infinity).
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePoly {
    coeffs: Vec<Complex64>,
}

impl UnivariatePoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a polynomial needs at least one coefficient"
        );
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `Π (t - r)` over the given roots, with leading coefficient one.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::new(vec![one()]);
        for &r in roots {
            p = p.mul(&Self::new(vec![-r, one()]));
        }
        p
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Degree after dropping leading coefficients below `TRIM_TOL` relative
    /// to the largest coefficient. `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let max = self.max_coefficient();
        if max == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.norm() > TRIM_TOL * max)
    }

    /// Number of roots at infinity: nominal degree minus trimmed degree.
    pub fn infinity_deficiency(&self) -> usize {
        self.nominal_degree() - self.degree().unwrap_or(0)
    }

    /// True if every coefficient is below `rel_tol · reference`.
    pub fn is_negligible(&self, reference: f64, rel_tol: f64) -> bool {
        self.max_coefficient() <= rel_tol * reference
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(zero(), |acc, &c| acc * t + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, t: Complex64) -> (Complex64, Complex64) {
        let mut p = zero();
        let mut dp = zero();
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(vec![zero()]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::new(vec![one()]);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Taylor coefficients of `self` about `c`, i.e. `p(c + h) = Σ a_j h^j`.
    pub fn taylor_shift(&self, c: Complex64) -> Vec<Complex64> {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let next = a[j + 1];
                a[j] += c * next;
            }
        }
        a
    }

    fn trimmed(&self) -> Option<Vec<Complex64>> {
        self.degree().map(|d| self.coeffs[..=d].to_vec())
    }
}

/// A root together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
    /// Largest distance from `center` to a computed root of the cluster.
    pub radius: f64,
}

/// All roots of `q` (finite part) by Aberth–Ehrlich iteration.
pub fn aberth_roots(q: &UnivariatePoly) -> Result<Vec<Complex64>> {
    let Some(mut coeffs) = q.trimmed() else {
        return Err(Error::ZeroPolynomial);
    };
    let mut roots = Vec::new();
    // exact zeros at the low end are roots at the origin
    let zeros = coeffs.iter().take_while(|c| **c == zero()).count();
    roots.extend(std::iter::repeat_n(zero(), zeros));
    coeffs.drain(..zeros);
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let poly = UnivariatePoly::new(monic);
    let abs_coeffs: Vec<f64> = poly.coeffs.iter().map(|c| c.norm()).collect();
    let noise = |z: Complex64| -> f64 {
        let r = z.norm();
        let bound = abs_coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        8.0 * n as f64 * f64::EPSILON * bound
    };

    let radius = poly.coeffs[0].norm().powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius * (1.0 + 0.01 * k as f64 / n as f64), angle)
        })
        .collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_ABERTH_ITERATIONS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = poly.eval_with_derivative(z[i]);
            if p.norm() <= noise(z[i]) {
                done[i] = true;
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let ratio = p / dp;
            let mut w = ratio / (one() - ratio * repulsion);
            if !w.re.is_finite() || !w.im.is_finite() {
                // stationary point: nudge off it
                w = Complex64::new(1e-3 * (1.0 + z[i].norm()), 1e-3);
            }
            z[i] -= w;
            if w.norm() <= 1e-13 * (1.0 + z[i].norm()) {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            roots.extend(z);
            return Ok(roots);
        }
    }
    Err(Error::RootFindingDiverged {
        iterations: MAX_ABERTH_ITERATIONS,
    })
}

/// Checks whether the points `members` form a numerically multiple root of
/// `q`. Returns the refined center on success.
///
/// The center is polished by Newton's method on `q^(k-1)`, which has a simple
/// root there. The cluster is accepted when a coefficient perturbation of
/// relative size `tol` can make the center an exact `k`-fold root, i.e. when
/// each Taylor coefficient `a_j` (`j < k`) is below
/// `tol · max|q_i| · Σ_i C(i,j) |c|^(i-j)`.
fn certify_multiple_root(q: &UnivariatePoly, members: &[Complex64], tol: f64) -> Option<Complex64> {
    let k = members.len();
    let mut center = members.iter().sum::<Complex64>() / k as f64;
    let mut deriv = q.clone();
    for _ in 0..k - 1 {
        deriv = deriv.derivative();
    }
    let spread = members
        .iter()
        .map(|m| (m - center).norm())
        .fold(0.0, f64::max);
    for _ in 0..8 {
        let (v, dv) = deriv.eval_with_derivative(center);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.re.is_finite() || step.norm() > spread + 1e-12 * (1.0 + center.norm()) {
            break;
        }
        center -= step;
        if step.norm() <= 1e-15 * (1.0 + center.norm()) {
            break;
        }
    }
    let taylor = q.taylor_shift(center);
    let unit = UnivariatePoly::new(vec![
        Complex64::new(q.max_coefficient(), 0.0);
        q.coeffs.len()
    ]);
    let bounds = unit.taylor_shift(Complex64::new(center.norm(), 0.0));
    let ok = (0..k).all(|j| taylor[j].norm() <= tol * bounds[j].re);
    ok.then_some(center)
}

/// `(children, members)`; leaves have no children.
type DendrogramNode = (Option<(usize, usize)>, Vec<usize>);

/// Single-linkage dendrogram over the roots. Leaves are `0..n`.
fn dendrogram(roots: &[Complex64]) -> Vec<DendrogramNode> {
    let n = roots.len();
    let mut nodes: Vec<DendrogramNode> = (0..n).map(|i| (None, vec![i])).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push(((roots[i] - roots[j]).norm(), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut uf = UnionFind::new(n);
    let mut node_of_root: Vec<usize> = (0..n).collect();
    for (_, i, j) in edges {
        let (ri, rj) = (uf.find(i), uf.find(j));
        if ri == rj {
            continue;
        }
        let (a, b) = (node_of_root[ri], node_of_root[rj]);
        let mut members = nodes[a].1.clone();
        members.extend_from_slice(&nodes[b].1);
        nodes.push((Some((a, b)), members));
        uf.union(ri, rj);
        let r = uf.find(ri);
        node_of_root[r] = nodes.len() - 1;
    }
    nodes
}

/// Roots of `q` grouped into clusters with multiplicities.
///
/// Roots closer than `cluster_eps` are always merged. Wider clusters are
/// accepted when they certify as a multiple root (see
/// [`DEFAULT_MULTIPLICITY_TOL`]); a `k`-fold root perturbed by rounding
/// splits into a ring of radius about `ε^(1/k)`, far wider than any fixed
/// radius that still separates distinct roots.
pub fn roots_with_multiplicity(q: &UnivariatePoly, cluster_eps: f64) -> Result<Vec<RootCluster>> {
    roots_with_multiplicity_tol(q, cluster_eps, DEFAULT_MULTIPLICITY_TOL)
}

pub fn roots_with_multiplicity_tol(
    q: &UnivariatePoly,
    cluster_eps: f64,
    multiplicity_tol: f64,
) -> Result<Vec<RootCluster>> {
    let roots = aberth_roots(q)?;
    if roots.is_empty() {
        return Ok(Vec::new());
    }
    let nodes = dendrogram(&roots);
    let mut clusters = Vec::new();
    let mut stack = vec![nodes.len() - 1];
    while let Some(id) = stack.pop() {
        let (children, members) = &nodes[id];
        let points: Vec<Complex64> = members.iter().map(|&i| roots[i]).collect();
        let certified = if points.len() == 1 {
            Some(certify_multiple_root(q, &points, multiplicity_tol).unwrap_or(points[0]))
        } else {
            certify_multiple_root(q, &points, multiplicity_tol)
        };
        match (certified, children) {
            (Some(center), _) => clusters.push(RootCluster {
                center,
                multiplicity: points.len(),
                radius: points
                    .iter()
                    .map(|p| (p - center).norm())
                    .fold(0.0, f64::max),
            }),
            (None, Some((a, b))) => {
                stack.push(*b);
                stack.push(*a);
            }
            (None, None) => unreachable!("leaves always certify"),
        }
    }

    // forced merge at radius cluster_eps
    let n = clusters.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if (clusters[i].center - clusters[j].center).norm() <= cluster_eps {
                uf.union(i, j);
            }
        }
    }
    let mut merged: Vec<RootCluster> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = merged.len();
            merged.push(RootCluster {
                center: zero(),
                multiplicity: 0,
                radius: 0.0,
            });
        }
        let m = &mut merged[slot[r]];
        m.center += clusters[i].center * clusters[i].multiplicity as f64;
        m.multiplicity += clusters[i].multiplicity;
    }
    for m in &mut merged {
        m.center /= m.multiplicity as f64;
    }
    for (i, c) in clusters.iter().enumerate() {
        let m = &mut merged[slot[uf.find(i)]];
        m.radius = m.radius.max((c.center - m.center).norm() + c.radius);
    }
    merged.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
    });
    Ok(merged)
}

/// Restriction `t ↦ f(base + t·direction)` of a form to a chart.
pub fn restrict_to_line(f: &TrivariateForm, chart: &LineChart) -> UnivariatePoly {
    let b = chart.base().coords();
    let d = chart.direction().coords();
    let deg = f.degree() as usize;
    let powers = |k: usize| -> Vec<UnivariatePoly> {
        let lin = UnivariatePoly::new(vec![b[k], d[k]]);
        let mut out = Vec::with_capacity(deg + 1);
        let mut acc = UnivariatePoly::new(vec![one()]);
        for _ in 0..=deg {
            out.push(acc.clone());
            acc = acc.mul(&lin);
        }
        out
    };
    let (px, py, pz) = (powers(0), powers(1), powers(2));
    let mut out = vec![zero(); deg + 1];
    for ([a, bb, c], k) in f.terms() {
        if k == zero() {
            continue;
        }
        let term = px[a as usize].mul(&py[bb as usize]).mul(&pz[c as usize]);
        for (i, v) in term.coeffs.iter().enumerate() {
            out[i] += k * v;
        }
    }
    UnivariatePoly::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chart_of, ProjectiveLine};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn x() -> TrivariateForm {
        TrivariateForm::linear(&[one(), zero(), zero()])
    }
    fn y() -> TrivariateForm {
        TrivariateForm::linear(&[zero(), one(), zero()])
    }
    fn z() -> TrivariateForm {
        TrivariateForm::linear(&[zero(), zero(), one()])
    }

    fn add(f: &TrivariateForm, g: &TrivariateForm) -> TrivariateForm {
        let terms: Vec<_> = f.terms().chain(g.terms()).collect();
        TrivariateForm::from_terms(f.degree(), &terms).unwrap()
    }

    fn random_form(degree: u32, seed: u64) -> TrivariateForm {
        let mut rng = crate::rng::seeded(seed, 99);
        let mut f = TrivariateForm::zero(degree);
        let terms: Vec<_> = f.terms().map(|(e, _)| e).collect();
        for [a, b, cc] in terms {
            f.set(a, b, cc, crate::rng::unit_disk(&mut rng));
        }
        f
    }

    #[test]
    fn evaluate_examples() {
        let q = add(&add(&x().power(2), &y().power(2)), &z().power(2));
        let p = HomogeneousPoint::from_real(1.0, 0.0, 0.0).unwrap();
        assert_eq!(evaluate(&q, &p), one());
        let xyz = x().multiply(&y()).multiply(&z());
        let p = HomogeneousPoint::from_real(1.0, 1.0, 0.0).unwrap();
        assert_eq!(evaluate(&xyz, &p), zero());
        let cubic = add(&add(&x().power(3), &y().power(3)), &z().power(3));
        let p = HomogeneousPoint::from_real(1.0, -1.0, 0.0).unwrap();
        assert_eq!(evaluate(&cubic, &p), zero());
    }

    #[test]
    fn multiply_and_power() {
        let s = add(&x(), &y());
        let sq = power(&s, 2);
        assert_eq!(sq.coefficient(2, 0, 0), one());
        assert_eq!(sq.coefficient(1, 1, 0), c(2.0, 0.0));
        assert_eq!(sq.coefficient(0, 2, 0), one());
        assert_eq!(sq.coefficient(1, 0, 1), zero());

        let f = random_form(3, 1);
        assert_eq!(multiply(&f, &TrivariateForm::constant(one())), f);

        let a = power(&f, 3);
        let b = multiply(&f, &multiply(&f, &f));
        let scale = a.scale();
        for (u, v) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((u - v).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn gradient_examples() {
        let q = add(&add(&x().power(2), &y().power(2)), &z().power(2));
        let p = HomogeneousPoint::from_real(1.0, 0.0, 0.0).unwrap();
        assert_eq!(gradient(&q, &p), [c(2.0, 0.0), zero(), zero()]);

        let cubic = add(&add(&x().power(3), &y().power(3)), &z().power(3));
        let p = HomogeneousPoint::from_real(1.0, -1.0, 0.0).unwrap();
        assert_eq!(gradient(&cubic, &p), [c(3.0, 0.0), c(3.0, 0.0), zero()]);

        let f = random_form(4, 5);
        let p = HomogeneousPoint::new([c(0.3, -0.2), c(1.0, 0.0), c(-0.7, 0.4)]).unwrap();
        let g = gradient(&f, &p);
        let euler: Complex64 = (0..3).map(|k| p.coords()[k] * g[k]).sum();
        assert!((euler - evaluate(&f, &p) * 4.0).norm() <= 1e-10);
    }

    #[test]
    fn restriction_of_line_equation_vanishes() {
        let zl = ProjectiveLine::new([zero(), zero(), one()]).unwrap();
        let chart = chart_of(&zl, 0);
        let q = restrict_to_line(&z(), &chart);
        assert!(q.is_negligible(1.0, 1e-15));
        assert_eq!(q.degree(), None);
    }

    #[test]
    fn restriction_of_quadric_matches_quadratic_formula() {
        let f = random_form(2, 11);
        let l = ProjectiveLine::new([c(0.2, 0.7), c(-0.4, 0.1), c(1.0, -0.3)]).unwrap();
        let chart = chart_of(&l, 4);
        let q = restrict_to_line(&f, &chart);
        let [a0, a1, a2] = [
            q.coefficients()[0],
            q.coefficients()[1],
            q.coefficients()[2],
        ];
        let disc = (a1 * a1 - a0 * a2 * 4.0).sqrt();
        let mut expected = [(-a1 + disc) / (a2 * 2.0), (-a1 - disc) / (a2 * 2.0)];
        let clusters = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
        assert_eq!(clusters.len(), 2);
        for cl in &clusters {
            assert_eq!(cl.multiplicity, 1);
            let (k, d) = expected
                .iter()
                .enumerate()
                .map(|(k, e)| (k, (e - cl.center).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < 1e-10, "root mismatch {d}");
            expected[k] = c(f64::NAN, f64::NAN);
        }
        // and the restriction agrees with direct evaluation
        for t in [c(0.3, 0.2), c(-1.5, 2.0)] {
            let v = f.eval_raw(&chart.representative(t));
            assert!((v - q.eval(t)).norm() <= 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn root_clusters_examples() {
        let t4 = UnivariatePoly::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        let cl = roots_with_multiplicity(&t4, DEFAULT_CLUSTER_EPS).unwrap();
        assert_eq!(cl.len(), 1);
        assert_eq!((cl[0].center, cl[0].multiplicity), (zero(), 4));

        let q = UnivariatePoly::from_real(&[-1.0, 0.0, 1.0]);
        let cl = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
        assert_eq!(cl.len(), 2);
        assert!(cl.iter().all(|c| c.multiplicity == 1));

        // (t-1)^3 (t-2) = t^4 - 5t^3 + 9t^2 - 7t + 2
        let q = UnivariatePoly::from_real(&[2.0, -7.0, 9.0, -5.0, 1.0]);
        let cl = roots_with_multiplicity(&q, 1e-4).unwrap();
        assert_eq!(cl.len(), 2);
        assert!((cl[0].center - c(1.0, 0.0)).norm() < 1e-6 && cl[0].multiplicity == 3);
        assert!((cl[1].center - c(2.0, 0.0)).norm() < 1e-6 && cl[1].multiplicity == 1);
    }

    #[test]
    fn high_multiplicity_root_is_one_cluster() {
        let t0 = c(0.37, -0.81);
        let q = UnivariatePoly::new(vec![-t0, one()])
            .pow(10)
            .mul(&UnivariatePoly::new(vec![c(1.3, 0.2)]));
        let cl = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].multiplicity, 10);
        assert!((cl[0].center - t0).norm() < 1e-8);
    }

    #[test]
    fn mixed_multiplicities() {
        let a = c(0.5, 0.5);
        let b = c(-1.0, 0.25);
        let q = UnivariatePoly::new(vec![-a, one()])
            .pow(4)
            .mul(&UnivariatePoly::new(vec![-b, one()]).pow(2))
            .mul(&UnivariatePoly::from_roots(&[c(2.0, -1.0), c(0.0, 1.5)]));
        let cl = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
        let mut mults: Vec<usize> = cl.iter().map(|c| c.multiplicity).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 1, 2, 4]);
    }

    #[test]
    fn deficiency_counts_roots_at_infinity() {
        let q = UnivariatePoly::from_real(&[-1.0, 1.0, 0.0, 0.0]);
        assert_eq!(q.infinity_deficiency(), 2);
        let cl = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
        let total: usize = cl.iter().map(|c| c.multiplicity).sum();
        assert_eq!(total + q.infinity_deficiency(), q.nominal_degree());
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        let q = UnivariatePoly::from_real(&[0.0, 0.0]);
        assert_eq!(
            roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS),
            Err(Error::ZeroPolynomial)
        );
    }

    fn complex_strategy() -> impl Strategy<Value = Complex64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| c(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn restriction_commutes_with_products(
            df in 0u32..=2, dg in 0u32..=2, seed in 0u64..1000, lseed in 0u64..1000
        ) {
            let f = random_form(df, seed);
            let g = random_form(dg, seed + 7919);
            let line = ProjectiveLine::new([c(0.1, 1.0), c(-0.6, 0.2), c(0.8, -0.5)]).unwrap();
            let chart = chart_of(&line, lseed);
            let lhs = restrict_to_line(&f.multiply(&g), &chart);
            let rhs = restrict_to_line(&f, &chart).mul(&restrict_to_line(&g, &chart));
            let scale = rhs.max_coefficient().max(1e-300);
            for (u, v) in lhs.coefficients().iter().zip(rhs.coefficients()) {
                prop_assert!((u - v).norm() <= 1e-9 * scale);
            }
        }

        #[test]
        fn multiplicities_are_conserved(
            roots in prop::collection::vec(complex_strategy(), 1..8),
            mults in prop::collection::vec(1usize..4, 8),
            lead in complex_strategy(),
        ) {
            prop_assume!(lead.norm() > 0.1);
            let mut q = UnivariatePoly::new(vec![lead]);
            for (r, m) in roots.iter().zip(&mults) {
                q = q.mul(&UnivariatePoly::new(vec![-r, one()]).pow(*m as u32));
            }
            let cl = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
            let total: usize = cl.iter().map(|c| c.multiplicity).sum();
            prop_assert_eq!(total + q.infinity_deficiency(), q.nominal_degree());
        }

        #[test]
        fn separated_roots_are_simple(
            roots in prop::collection::vec(complex_strategy(), 1..10),
        ) {
            let eps = DEFAULT_CLUSTER_EPS;
            for i in 0..roots.len() {
                for j in i + 1..roots.len() {
                    prop_assume!((roots[i] - roots[j]).norm() >= 1e3 * eps);
                }
            }
            let q = UnivariatePoly::from_roots(&roots);
            let cl = roots_with_multiplicity(&q, eps).unwrap();
            prop_assert_eq!(cl.len(), roots.len());
            prop_assert!(cl.iter().all(|c| c.multiplicity == 1));
        }
    }
}

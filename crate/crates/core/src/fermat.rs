//! Fermat curves `x^μ + y^μ + z^μ`, their total inflection points and
//! tangent lines, and the degree-`b` branch curves built from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    chart_of, intersect, line_through, HomogeneousPoint, LineChart, ProjectiveLine,
};
use crate::polynomials::{
    evaluate, gradient, restrict_to_line, roots_with_multiplicity, TrivariateForm,
    DEFAULT_CLUSTER_EPS,
};
use crate::rng::{self, domains};
use crate::union_find::UnionFind;

/// `|F(P)| / scale(F)` below this counts as `P` lying on the curve.
pub const OFF_BRANCH_TOL: f64 = 1e-8;

/// `ζ_{2μ}^e = exp(πi·e/μ)`.
pub fn zeta_2mu_pow(mu: u32, e: i64) -> Complex64 {
    let e = e.rem_euclid(2 * mu as i64);
    Complex64::from_polar(1.0, std::f64::consts::PI * e as f64 / mu as f64)
}

/// Index `(μ, family, j)` of the total inflection point `P^μ_{family,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FermatTangentIndex {
    pub mu: u32,
    pub family: u8,
    pub j: u32,
}

impl FermatTangentIndex {
    pub fn new(mu: u32, family: u8, j: u32) -> Result<Self> {
        if mu < 2 {
            return Err(Error::ConfigInvalid(format!(
                "mu must be at least 2, got {mu}"
            )));
        }
        if !(1..=3).contains(&family) {
            return Err(Error::ConfigInvalid(format!(
                "family must be 1, 2 or 3, got {family}"
            )));
        }
        if !(1..=mu).contains(&j) {
            return Err(Error::ConfigInvalid(format!(
                "j must lie in 1..={mu}, got {j}"
            )));
        }
        Ok(Self { mu, family, j })
    }

    /// `ζ_{2μ}^{2j-1}`, the unit root appearing in the point and its tangent.
    pub fn unit(&self) -> Complex64 {
        zeta_2mu_pow(self.mu, 2 * self.j as i64 - 1)
    }
}

/// The tangent triple `(1,1), (2,1), (3,μ)`.
pub fn standard_triple(mu: u32) -> Result<[FermatTangentIndex; 3]> {
    Ok([
        FermatTangentIndex::new(mu, 1, 1)?,
        FermatTangentIndex::new(mu, 2, 1)?,
        FermatTangentIndex::new(mu, 3, mu)?,
    ])
}

/// Triple with one tangent line per family, `j = (j1, j2, j3)`.
pub fn triple_from_js(mu: u32, js: [u32; 3]) -> Result<[FermatTangentIndex; 3]> {
    Ok([
        FermatTangentIndex::new(mu, 1, js[0])?,
        FermatTangentIndex::new(mu, 2, js[1])?,
        FermatTangentIndex::new(mu, 3, js[2])?,
    ])
}

pub fn fermat_form(mu: u32) -> Result<TrivariateForm> {
    if mu < 2 {
        return Err(Error::ConfigInvalid(format!(
            "mu must be at least 2, got {mu}"
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    TrivariateForm::from_terms(
        mu,
        &[([mu, 0, 0], one), ([0, mu, 0], one), ([0, 0, mu], one)],
    )
}

pub fn inflection_point(idx: &FermatTangentIndex) -> HomogeneousPoint {
    let u = idx.unit();
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let coords = match idx.family {
        1 => [o, u, z],
        2 => [z, o, u],
        _ => [u, z, o],
    };
    HomogeneousPoint::new(coords).expect("unit coordinates")
}

/// Coefficients of the tangent line at [`inflection_point`].
fn tangent_coeffs(idx: &FermatTangentIndex) -> [Complex64; 3] {
    let u = idx.unit();
    let (m, z) = (Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0));
    match idx.family {
        1 => [u, m, z],
        2 => [z, u, m],
        _ => [m, z, u],
    }
}

pub fn tangent_line(idx: &FermatTangentIndex) -> ProjectiveLine {
    ProjectiveLine::new(tangent_coeffs(idx)).expect("unit coefficients")
}

/// The linear form defining [`tangent_line`], unnormalized.
pub fn tangent_form(idx: &FermatTangentIndex) -> TrivariateForm {
    TrivariateForm::linear(&tangent_coeffs(idx))
}

/// Chart on the tangent line with base at the tangency point. The direction
/// is the coordinate point the line passes through.
pub fn tangency_chart(idx: &FermatTangentIndex) -> LineChart {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let direction = match idx.family {
        1 => [z, z, o],
        2 => [o, z, z],
        _ => [z, o, z],
    };
    LineChart::new(
        tangent_line(idx),
        inflection_point(idx),
        HomogeneousPoint::new(direction).expect("coordinate point"),
    )
    .expect("tangency chart is valid")
}

/// Parameters of one member of the degree-`b` family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArtalFamilyConfig {
    pub b: u32,
    pub mu: u32,
    pub nu: u32,
    pub seed: u64,
    pub line_triple: [FermatTangentIndex; 3],
}

impl ArtalFamilyConfig {
    /// Config with the standard triple `(1,1), (2,1), (3,μ)`.
    pub fn new(b: u32, mu: u32, seed: u64) -> Result<Self> {
        Self::validate_degrees(b, mu)?;
        Self::with_triple(b, mu, seed, standard_triple(mu)?)
    }

    pub fn with_triple(
        b: u32,
        mu: u32,
        seed: u64,
        line_triple: [FermatTangentIndex; 3],
    ) -> Result<Self> {
        Self::validate_degrees(b, mu)?;
        let mut families: Vec<u8> = line_triple.iter().map(|i| i.family).collect();
        families.sort();
        families.dedup();
        if families.len() != 3 {
            return Err(Error::ConfigInvalid(
                "the three tangent lines must come from distinct families".into(),
            ));
        }
        if line_triple.iter().any(|i| i.mu != mu) {
            return Err(Error::ConfigInvalid("tangent indices must share mu".into()));
        }
        Ok(Self {
            b,
            mu,
            nu: b / mu,
            seed,
            line_triple,
        })
    }

    fn validate_degrees(b: u32, mu: u32) -> Result<()> {
        if b < 3 {
            return Err(Error::ConfigInvalid(format!(
                "b must be at least 3, got {b}"
            )));
        }
        if mu < 2 {
            return Err(Error::ConfigInvalid(format!(
                "mu must be at least 2, got {mu}"
            )));
        }
        if !b.is_multiple_of(mu) {
            return Err(Error::ConfigInvalid(format!(
                "mu = {mu} does not divide b = {b}"
            )));
        }
        Ok(())
    }

    pub fn lines(&self) -> [ProjectiveLine; 3] {
        self.line_triple.map(|i| tangent_line(&i))
    }

    pub fn js(&self) -> [u32; 3] {
        self.line_triple.map(|i| i.j)
    }
}

/// Random form of the given degree, coefficients uniform on the unit disk,
/// drawn in storage order.
pub fn seeded_form(degree: u32, seed: u64) -> TrivariateForm {
    let mut rng = rng::seeded(seed, domains::ARTAL_G);
    let mut g = TrivariateForm::zero(degree);
    let exps: Vec<[u32; 3]> = g.terms().map(|(e, _)| e).collect();
    for [a, b, c] in exps {
        g.set(a, b, c, rng::unit_disk(&mut rng));
    }
    g
}

/// `f₁·f₂·f₃·g + h_μ^ν` with `g` a seeded form of degree `b - 3` (`g = 1` for `b = 3`).
pub fn artal_branch_curve(cfg: &ArtalFamilyConfig) -> Result<TrivariateForm> {
    let cfg = ArtalFamilyConfig::with_triple(cfg.b, cfg.mu, cfg.seed, cfg.line_triple)?;
    let g = if cfg.b == 3 {
        TrivariateForm::constant(Complex64::new(1.0, 0.0))
    } else {
        seeded_form(cfg.b - 3, cfg.seed)
    };
    let product = cfg
        .line_triple
        .iter()
        .fold(g, |acc, idx| acc.multiply(&tangent_form(idx)));
    let h = fermat_form(cfg.mu)?.power(cfg.nu);
    let terms: Vec<_> = product.terms().chain(h.terms()).collect();
    TrivariateForm::from_terms(cfg.b, &terms)
}

/// Outcome of [`validate_k_artal`]; each flag is one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// Per line: the restriction of `B` has a single root of multiplicity `deg B`.
    pub totally_tangent: Vec<bool>,
    pub no_triple_points: bool,
    pub intersections_off_branch: bool,
    pub complement_connected: bool,
    pub degree_divisible: bool,
}

impl ValidityReport {
    pub fn all_pass(&self) -> bool {
        self.totally_tangent.iter().all(|&t| t)
            && self.no_triple_points
            && self.intersections_off_branch
            && self.complement_connected
            && self.degree_divisible
    }
}

fn is_totally_tangent(b: &TrivariateForm, line: &ProjectiveLine) -> bool {
    let deg = b.degree() as usize;
    for seed in 0..8 {
        let chart = chart_of(line, seed);
        let q = restrict_to_line(b, &chart);
        if q.is_negligible(b.scale(), 1e-12) {
            return false;
        }
        if q.infinity_deficiency() > 0 {
            continue;
        }
        return match roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS) {
            Ok(cl) => cl.len() == 1 && cl[0].multiplicity == deg,
            Err(_) => false,
        };
    }
    false
}

/// Checks that `B + Σ lines` is a `k`-Artal arrangement usable with a cover of degree `m`.
pub fn validate_k_artal(b: &TrivariateForm, lines: &[ProjectiveLine], m: u32) -> ValidityReport {
    let totally_tangent = lines.iter().map(|l| is_totally_tangent(b, l)).collect();

    let k = lines.len();
    let mut no_triple_points = true;
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                if let Ok(p) = intersect(&lines[i], &lines[j]) {
                    if lines[l].contains(&p) {
                        no_triple_points = false;
                    }
                } else {
                    no_triple_points = false;
                }
            }
        }
    }

    let scale = b.scale();
    let mut intersections_off_branch = true;
    let mut uf = UnionFind::new(k);
    for i in 0..k {
        for j in i + 1..k {
            match intersect(&lines[i], &lines[j]) {
                Ok(p) if evaluate(b, &p).norm() >= OFF_BRANCH_TOL * scale => {
                    uf.union(i, j);
                }
                _ => intersections_off_branch = false,
            }
        }
    }

    ValidityReport {
        totally_tangent,
        no_triple_points,
        intersections_off_branch,
        complement_connected: k > 0 && uf.classes() == 1,
        degree_divisible: m > 0 && b.degree().is_multiple_of(m),
    }
}

/// Smallest `|∇F| / scale(F)` over seeded sample points of the curve `F = 0`
/// near each of `points`.
///
/// Each sample restricts `F` to a random line through a point within 0.05
/// of the center and keeps the root nearest that point.
pub fn smoothness_spot_check(
    f: &TrivariateForm,
    points: &[HomogeneousPoint],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = rng::seeded(seed, domains::SMOOTHNESS);
    let scale = f.scale();
    let mut worst = f64::INFINITY;
    for p in points {
        let g = gradient(f, p);
        worst = worst.min(crate::geometry::norm(&g) / scale);
        let mut taken = 0;
        while taken < samples {
            let c = p.coords();
            let near = [0, 1, 2].map(|k| c[k] + rng::unit_disk(&mut rng) * 0.05);
            let dir = [0, 1, 2].map(|_| rng::unit_disk(&mut rng));
            let (Ok(near), Ok(dir)) = (HomogeneousPoint::new(near), HomogeneousPoint::new(dir))
            else {
                continue;
            };
            let Ok(line) = line_through(&near, &dir) else {
                continue;
            };
            let Ok(chart) = LineChart::new(line, near, dir) else {
                continue;
            };
            let q = restrict_to_line(f, &chart);
            let roots = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS)?;
            let Some(nearest) = roots
                .iter()
                .min_by(|a, b| a.center.norm().total_cmp(&b.center.norm()))
            else {
                continue;
            };
            let on_curve = chart.point_at(crate::geometry::Param::Finite(nearest.center));
            let g = gradient(f, &on_curve);
            worst = worst.min(crate::geometry::norm(&g) / scale);
            taken += 1;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::UnivariatePoly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fermat_form_coefficients() {
        let h2 = fermat_form(2).unwrap();
        assert_eq!(h2.coefficient(2, 0, 0), c(1.0, 0.0));
        assert_eq!(h2.coefficient(0, 2, 0), c(1.0, 0.0));
        assert_eq!(h2.coefficient(0, 0, 2), c(1.0, 0.0));
        assert_eq!(h2.coefficient(1, 1, 0), c(0.0, 0.0));
        let h3 = fermat_form(3).unwrap();
        assert_eq!(h3.terms().filter(|(_, v)| *v != c(0.0, 0.0)).count(), 3);
        assert!(fermat_form(1).is_err());
    }

    #[test]
    fn inflection_points_lie_on_curve_and_tangent() {
        for mu in 2..=6 {
            let h = fermat_form(mu).unwrap();
            for family in 1..=3 {
                for j in 1..=mu {
                    let idx = FermatTangentIndex::new(mu, family, j).unwrap();
                    let p = inflection_point(&idx);
                    assert!(
                        evaluate(&h, &p).norm() <= 1e-12,
                        "mu={mu} fam={family} j={j}"
                    );
                    assert!(tangent_line(&idx).residual(&p) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn inflection_point_coordinates() {
        let z6 = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let p = inflection_point(&FermatTangentIndex::new(3, 1, 1).unwrap());
        let expected = HomogeneousPoint::new([c(1.0, 0.0), z6, c(0.0, 0.0)]).unwrap();
        assert!(p.projectively_eq(&expected));
        let p = inflection_point(&FermatTangentIndex::new(3, 2, 1).unwrap());
        let expected = HomogeneousPoint::new([c(0.0, 0.0), c(1.0, 0.0), z6]).unwrap();
        assert!(p.projectively_eq(&expected));
    }

    #[test]
    fn tangent_line_coefficients() {
        for mu in 2..=5 {
            for j in 1..=mu {
                let idx = FermatTangentIndex::new(mu, 1, j).unwrap();
                let expected = ProjectiveLine::new([
                    zeta_2mu_pow(mu, 2 * j as i64 - 1),
                    c(-1.0, 0.0),
                    c(0.0, 0.0),
                ])
                .unwrap();
                assert!(tangent_line(&idx).projectively_eq(&expected));
            }
        }
    }

    #[test]
    fn fermat_restricts_to_pure_power_on_tangent() {
        for mu in 2..=6 {
            let h = fermat_form(mu).unwrap();
            for family in 1..=3 {
                for j in 1..=mu {
                    let idx = FermatTangentIndex::new(mu, family, j).unwrap();
                    let q = restrict_to_line(&h, &tangency_chart(&idx));
                    let coeffs = q.coefficients();
                    let lead = coeffs[mu as usize];
                    assert!((lead.norm() - 1.0).abs() <= 1e-12);
                    for k in 0..mu as usize {
                        assert!(coeffs[k].norm() <= 1e-12, "mu={mu} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn standard_tangent_triples_are_never_concurrent() {
        for mu in 2..=6 {
            for j1 in 1..=mu {
                for j2 in 1..=mu {
                    for j3 in 1..=mu {
                        let t = triple_from_js(mu, [j1, j2, j3]).unwrap();
                        let p = intersect(&tangent_line(&t[0]), &tangent_line(&t[1])).unwrap();
                        assert!(!tangent_line(&t[2]).contains(&p));
                    }
                }
            }
        }
    }

    #[test]
    fn cubic_member_has_unit_g() {
        let cfg = ArtalFamilyConfig::new(3, 3, 42).unwrap();
        let f = artal_branch_curve(&cfg).unwrap();
        let lines = cfg.line_triple.map(|i| tangent_form(&i));
        let product = lines[0].multiply(&lines[1]).multiply(&lines[2]);
        let h = fermat_form(3).unwrap();
        for ((e, v), ((_, p), (_, hh))) in f.terms().zip(product.terms().zip(h.terms())) {
            assert!((v - p - hh).norm() <= 1e-15, "{e:?}");
        }
    }

    #[test]
    fn branch_curve_is_totally_tangent_to_its_lines() {
        let cfg = ArtalFamilyConfig::new(4, 2, 7).unwrap();
        let f = artal_branch_curve(&cfg).unwrap();
        assert_eq!(f.degree(), 4);
        for idx in &cfg.line_triple {
            let q = restrict_to_line(&f, &tangency_chart(idx));
            let c = q.coefficients();
            assert!((c[4].norm() - 1.0).abs() <= 1e-12);
            for k in 0..4 {
                assert!(c[k].norm() <= 1e-12);
            }
            let clusters = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
            assert_eq!(clusters.len(), 1);
            assert_eq!(clusters[0].multiplicity, 4);
        }
    }

    #[test]
    fn branch_curve_is_seed_deterministic() {
        let a = artal_branch_curve(&ArtalFamilyConfig::new(6, 3, 9).unwrap()).unwrap();
        let b = artal_branch_curve(&ArtalFamilyConfig::new(6, 3, 9).unwrap()).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        let c = artal_branch_curve(&ArtalFamilyConfig::new(6, 3, 10).unwrap()).unwrap();
        assert_ne!(a.coefficients(), c.coefficients());
    }

    #[test]
    fn branch_curve_restriction_is_pure_power_in_any_chart() {
        for (b, mu) in [(4, 2), (6, 3), (6, 2)] {
            let cfg = ArtalFamilyConfig::new(b, mu, 3).unwrap();
            let f = artal_branch_curve(&cfg).unwrap();
            for line in cfg.lines() {
                let chart = chart_of(&line, 5);
                let q = restrict_to_line(&f, &chart);
                let cl = roots_with_multiplicity(&q, DEFAULT_CLUSTER_EPS).unwrap();
                assert_eq!(cl.len(), 1, "b={b} mu={mu}");
                assert_eq!(cl[0].multiplicity, b as usize);
                // compare against lc·(t - t_P)^b
                let lc = q.coefficients()[b as usize];
                let model = UnivariatePoly::new(vec![-cl[0].center, c(1.0, 0.0)])
                    .pow(b)
                    .mul(&UnivariatePoly::new(vec![lc]));
                for (u, v) in q.coefficients().iter().zip(model.coefficients()) {
                    assert!((u - v).norm() <= 1e-8 * q.max_coefficient());
                }
            }
        }
    }

    #[test]
    fn branch_curve_spot_check_smooth_near_tangencies() {
        let cfg = ArtalFamilyConfig::new(4, 2, 7).unwrap();
        let f = artal_branch_curve(&cfg).unwrap();
        let points: Vec<_> = cfg.line_triple.iter().map(inflection_point).collect();
        let worst = smoothness_spot_check(&f, &points, 20, 0).unwrap();
        assert!(worst > 1e-6, "gradient ratio {worst}");
    }

    #[test]
    fn invalid_configs() {
        assert!(ArtalFamilyConfig::new(6, 4, 0).is_err());
        assert!(ArtalFamilyConfig::new(2, 2, 0).is_err());
        let t = [
            FermatTangentIndex::new(2, 1, 1).unwrap(),
            FermatTangentIndex::new(2, 1, 2).unwrap(),
            FermatTangentIndex::new(2, 3, 1).unwrap(),
        ];
        assert!(ArtalFamilyConfig::with_triple(4, 2, 0, t).is_err());
        assert!(FermatTangentIndex::new(3, 4, 1).is_err());
        assert!(FermatTangentIndex::new(3, 1, 4).is_err());
    }

    #[test]
    fn validity_report_examples() {
        let h = fermat_form(3).unwrap();
        let lines = triple_from_js(3, [1, 1, 3])
            .unwrap()
            .map(|i| tangent_line(&i));
        let report = validate_k_artal(&h, &lines, 3);
        assert!(report.all_pass(), "{report:?}");

        // three concurrent lines through (0:0:1)
        let concurrent = [
            ProjectiveLine::new([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap(),
            ProjectiveLine::new([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap(),
            ProjectiveLine::new([c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap(),
        ];
        assert!(!validate_k_artal(&h, &concurrent, 3).no_triple_points);

        // a secant line
        let mut with_secant = lines.to_vec();
        with_secant.push(ProjectiveLine::new([c(0.3, 0.1), c(1.0, 0.0), c(-0.7, 0.2)]).unwrap());
        let report = validate_k_artal(&h, &with_secant, 3);
        assert_eq!(report.totally_tangent, vec![true, true, true, false]);
        assert!(!report.all_pass());

        assert!(!validate_k_artal(&h, &lines, 2).degree_divisible);
    }
}

//! Sheets of the cyclic cover `s^m = F(p)` over a line, branch points with
//! weighted multiplicities, and sheet transport along planned paths.
//!
//! On a chart `t ↦ base + t·direction` the fiber over `t` is the set of
//! `m`-th roots of `Q(t) = F(base + t·direction)`. Sheet `k` over the base
//! parameter is `s₀·ζ_m^k` with `s₀` the principal root, so labels follow
//! phase order. Since `s ↦ ζ_m·s` is a deck transformation, continuing one
//! sheet along a path determines all of them.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    chart_of, param_of_point, separation, HomogeneousPoint, LineChart, Param, ProjectiveLine,
    Triple, CHART_SEPARATION,
};
use crate::polynomials::{
    restrict_to_line, roots_with_multiplicity_tol, TrivariateForm, UnivariatePoly,
    DEFAULT_CLUSTER_EPS, DEFAULT_MULTIPLICITY_TOL,
};
use crate::rng::{self, domains};
use crate::union_find::UnionFind;

/// Bound on `|s^m - Q(t)| / (1 + |Q(t)|)` over accepted tracking steps.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Smallest admissible step length in the `t`-plane.
pub const MIN_STEP: f64 = 1e-12;
/// `|F(P)|` below this fraction of its coefficient bound counts as `P ∈ B`.
pub const ON_BRANCH_TOL: f64 = 1e-8;
const MAX_NEWTON: usize = 8;
const SEPARATION_FACTOR: f64 = 3.0;
const MAX_RELATIVE_CHANGE: f64 = 0.25;
const MATCH_TOL: f64 = 1e-6;
const MODERATE_PARAM: f64 = 50.0;
const MAX_PARAM: f64 = 1e6;
const CHART_ATTEMPTS: usize = 64;
const BASE_ATTEMPTS: usize = 1000;
const RING_MARGIN: f64 = 8.0;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `ζ_m^k = exp(2πi·k/m)`.
pub fn zeta(m: u32, k: i64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * k.rem_euclid(m as i64) as f64 / m as f64)
}

fn principal_root(z: Complex64, m: u32) -> Complex64 {
    Complex64::from_polar(z.norm().powf(1.0 / m as f64), z.arg() / m as f64)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The weighted divisor `Σ w_i·B_i` together with the cover degree `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBranchDivisor {
    m: u32,
    parts: Vec<(TrivariateForm, u32)>,
    f: TrivariateForm,
    n: u32,
}

impl WeightedBranchDivisor {
    pub fn new(m: u32, parts: Vec<(TrivariateForm, u32)>) -> Result<Self> {
        if m < 2 {
            return Err(Error::ConfigInvalid(format!(
                "cover degree must be at least 2, got {m}"
            )));
        }
        if parts.is_empty() {
            return Err(Error::ConfigInvalid("branch divisor has no parts".into()));
        }
        let mut total = 0u32;
        for (form, w) in &parts {
            if !(1..m).contains(w) {
                return Err(Error::ConfigInvalid(format!("weight {w} not in 1..{m}")));
            }
            if form.degree() == 0 || form.is_zero() {
                return Err(Error::ConfigInvalid(
                    "branch parts must be nonzero forms of positive degree".into(),
                ));
            }
            total += w * form.degree();
        }
        if !total.is_multiple_of(m) {
            return Err(Error::ConfigInvalid(format!(
                "weighted degree {total} is not divisible by m = {m}"
            )));
        }
        let f = parts.iter().fold(
            TrivariateForm::constant(Complex64::new(1.0, 0.0)),
            |acc, (form, w)| acc.multiply(&form.power(*w)),
        );
        Ok(Self {
            m,
            parts,
            f,
            n: total / m,
        })
    }

    /// The cover of degree `m` branched along `form` with weight one.
    pub fn single(form: TrivariateForm, m: u32) -> Result<Self> {
        Self::new(m, vec![(form, 1)])
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn parts(&self) -> &[(TrivariateForm, u32)] {
        &self.parts
    }

    /// The product `F = Π f_i^{w_i}`.
    pub fn form(&self) -> &TrivariateForm {
        &self.f
    }

    /// True if some part vanishes at `p` relative to its coefficient scale.
    pub fn contains_point(&self, p: &HomogeneousPoint, tol: f64) -> bool {
        self.parts
            .iter()
            .any(|(f, _)| f.eval_raw(p.coords()).norm() < tol * f.scale())
    }
}

/// Numerical knobs of the per-component computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingOptions {
    pub cluster_eps: f64,
    pub multiplicity_tol: f64,
    pub residual_tol: f64,
    pub on_branch_tol: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        Self {
            cluster_eps: DEFAULT_CLUSTER_EPS,
            multiplicity_tol: DEFAULT_MULTIPLICITY_TOL,
            residual_tol: RESIDUAL_TOL,
            on_branch_tol: ON_BRANCH_TOL,
        }
    }
}

/// A finite branch parameter with its weighted multiplicity `I_P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub param: Complex64,
    pub multiplicity: u32,
    /// Radius of the computed root cluster around `param`.
    pub spread: f64,
}

/// Everything needed to move sheets around on one line component.
#[derive(Debug, Clone)]
pub struct ComponentCoverData {
    pub component: usize,
    pub chart: LineChart,
    pub m: u32,
    pub n: u32,
    pub branch_points: Vec<BranchPoint>,
    pub base_param: Complex64,
    pub base_fiber: Vec<Complex64>,
    pub q: UnivariatePoly,
    pub clearance: f64,
    factors: Vec<(UnivariatePoly, u32)>,
    options: TrackingOptions,
}

/// [`component_data_with`] with default options and no points to avoid.
pub fn component_data(
    cover: &WeightedBranchDivisor,
    line: &ProjectiveLine,
    seed: u64,
) -> Result<ComponentCoverData> {
    component_data_with(cover, line, 0, seed, &[], &TrackingOptions::default())
}

/// Sheet data for `line`, labeled as component `component`.
///
/// Charts are redrawn until no branch point sits at `t = ∞`, every point of
/// `avoid` has a finite parameter, and all these parameters are moderate.
/// The clearance also keeps `avoid` points away from branch points, so they
/// can later serve as transport targets.
pub fn component_data_with(
    cover: &WeightedBranchDivisor,
    line: &ProjectiveLine,
    component: usize,
    seed: u64,
    avoid: &[HomogeneousPoint],
    options: &TrackingOptions,
) -> Result<ComponentCoverData> {
    let mut select = rng::seeded(seed, domains::CHART_SELECT);
    let mut fallback = None;
    for _ in 0..CHART_ATTEMPTS {
        let drawn = chart_of(line, select.gen::<u64>());
        let Some(first) = examine_chart(cover, drawn, component, avoid, options)? else {
            continue;
        };
        let centered = recenter(&first)
            .and_then(|chart| examine_chart(cover, chart, component, avoid, options).transpose());
        let candidate = match centered {
            Some(c) => c?,
            None => first,
        };
        if !candidate.rings_fit() {
            continue;
        }
        if candidate.extent <= MODERATE_PARAM {
            return candidate.assemble(component, cover.m, seed, options);
        }
        if candidate.extent <= MAX_PARAM && fallback.is_none() {
            fallback = Some(candidate);
        }
    }
    match fallback {
        Some(candidate) => candidate.assemble(component, cover.m, seed, options),
        None => Err(Error::DegenerateGeometry(format!(
            "no usable chart found on component {component}"
        ))),
    }
}

/// A chart with its restricted factors and branch data.
struct ChartCandidate {
    chart: LineChart,
    factors: Vec<(UnivariatePoly, u32)>,
    branch_points: Vec<BranchPoint>,
    avoid_params: Vec<Complex64>,
    extent: f64,
    clearance: f64,
}

impl ChartCandidate {
    /// Loops of radius `clearance/2` must enclose each computed root
    /// cluster with room to spare, or tracking sees the cluster's roots
    /// one by one.
    fn rings_fit(&self) -> bool {
        self.branch_points
            .iter()
            .all(|b| RING_MARGIN * b.spread <= self.clearance)
    }

    fn assemble(
        self,
        component: usize,
        m: u32,
        seed: u64,
        options: &TrackingOptions,
    ) -> Result<ComponentCoverData> {
        assemble(
            component,
            self.chart,
            m,
            self.factors,
            self.branch_points,
            &self.avoid_params,
            seed,
            options,
        )
    }
}

/// `None` when the chart has a branch point or an `avoid` point at infinity.
fn examine_chart(
    cover: &WeightedBranchDivisor,
    chart: LineChart,
    component: usize,
    avoid: &[HomogeneousPoint],
    options: &TrackingOptions,
) -> Result<Option<ChartCandidate>> {
    let mut factors = Vec::with_capacity(cover.parts.len());
    for (form, w) in &cover.parts {
        let q = restrict_to_line(form, &chart);
        if q.is_negligible(form.scale(), 1e-10) {
            return Err(Error::LineInsideBranchDivisor { component });
        }
        factors.push((q, *w));
    }
    if factors.iter().any(|(q, _)| q.infinity_deficiency() > 0) {
        return Ok(None);
    }
    let mut avoid_params = Vec::with_capacity(avoid.len());
    for p in avoid {
        match param_of_point(&chart, p)? {
            Param::Finite(t) => avoid_params.push(t),
            Param::Infinity => return Ok(None),
        }
    }
    let branch_points = branch_points_of(&factors, options)?;
    let params: Vec<Complex64> = branch_points.iter().map(|b| b.param).collect();
    let extent = params
        .iter()
        .chain(&avoid_params)
        .map(|t| t.norm())
        .fold(0.0, f64::max);
    let clearance = clearance_of(&params, &avoid_params);
    Ok(Some(ChartCandidate {
        chart,
        factors,
        branch_points,
        avoid_params,
        extent,
        clearance,
    }))
}

/// The chart with the same direction based at the centroid of the branch
/// parameters, where multiple roots are better conditioned.
fn recenter(c: &ChartCandidate) -> Option<LineChart> {
    if c.branch_points.is_empty() {
        return None;
    }
    let t0 =
        c.branch_points.iter().map(|b| b.param).sum::<Complex64>() / c.branch_points.len() as f64;
    let base = c.chart.point_at(Param::Finite(t0));
    if separation(base.coords(), c.chart.direction().coords()) < CHART_SEPARATION {
        return None;
    }
    LineChart::new(*c.chart.line(), base, *c.chart.direction()).ok()
}

fn clearance_of(params: &[Complex64], avoid: &[Complex64]) -> f64 {
    let mut clearance = f64::INFINITY;
    let mut diameter: f64 = 0.0;
    for (i, a) in params.iter().enumerate() {
        for b in &params[i + 1..] {
            let d = (a - b).norm();
            clearance = clearance.min(d / 2.0);
            diameter = diameter.max(d);
        }
        for t in avoid {
            clearance = clearance.min((a - t).norm());
        }
    }
    clearance.min(0.1 * diameter + 0.5)
}

impl ComponentCoverData {
    /// Sheet data for `Q = Π q_i^{w_i}` given directly as univariate factors,
    /// on the chart `[1 : t : 0]`. The nominal degree of `Q` need not be a
    /// multiple of `m`.
    pub fn from_polynomial(
        m: u32,
        factors: Vec<(UnivariatePoly, u32)>,
        seed: u64,
        options: &TrackingOptions,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::ConfigInvalid(format!(
                "cover degree must be at least 2, got {m}"
            )));
        }
        let (o, z) = (Complex64::new(1.0, 0.0), zero());
        let chart = LineChart::new(
            ProjectiveLine::new([z, z, o])?,
            HomogeneousPoint::new([o, z, z])?,
            HomogeneousPoint::new([z, o, z])?,
        )?;
        let branch_points = branch_points_of(&factors, options)?;
        assemble(0, chart, m, factors, branch_points, &[], seed, options)
    }

    /// The same data with base parameter `t` instead of the seeded one.
    pub fn with_base_param(mut self, t: Complex64) -> Result<Self> {
        if self.distance_to_branch(t) < self.clearance {
            return Err(Error::DegenerateGeometry(format!(
                "base parameter {t} is within the clearance of a branch point"
            )));
        }
        self.base_param = t;
        self.base_fiber = fiber(self.value(t), self.m)?;
        Ok(self)
    }

    pub fn options(&self) -> &TrackingOptions {
        &self.options
    }

    /// `Q(t)` evaluated through its factors.
    pub fn value(&self, t: Complex64) -> Complex64 {
        self.factors
            .iter()
            .map(|(q, w)| q.eval(t).powu(*w))
            .product()
    }

    /// `Q(t)` and `Q'(t)/Q(t)`.
    fn value_and_log_derivative(&self, t: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(1.0, 0.0);
        let mut log_der = zero();
        for (q, w) in &self.factors {
            let (v, d) = q.eval_with_derivative(t);
            value *= v.powu(*w);
            log_der += d / v * *w as f64;
        }
        (value, log_der)
    }

    fn distance_to_branch(&self, t: Complex64) -> f64 {
        self.branch_points
            .iter()
            .map(|b| (b.param - t).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// True if `t` lies on the branch locus relative to the factors' scale.
    pub fn on_branch(&self, t: Complex64) -> bool {
        self.factors.iter().any(|(q, _)| {
            let bound: f64 = q
                .coefficients()
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * t.norm().powi(k as i32))
                .sum();
            q.eval(t).norm() < self.options.on_branch_tol * bound
        })
    }
}

fn branch_points_of(
    factors: &[(UnivariatePoly, u32)],
    options: &TrackingOptions,
) -> Result<Vec<BranchPoint>> {
    let mut points: Vec<BranchPoint> = Vec::new();
    for (q, w) in factors {
        for c in roots_with_multiplicity_tol(q, options.cluster_eps, options.multiplicity_tol)? {
            let i = w * c.multiplicity as u32;
            match points
                .iter_mut()
                .find(|b| (b.param - c.center).norm() <= options.cluster_eps)
            {
                Some(b) => {
                    b.multiplicity += i;
                    b.spread = b.spread.max((b.param - c.center).norm() + c.radius);
                }
                None => points.push(BranchPoint {
                    param: c.center,
                    multiplicity: i,
                    spread: c.radius,
                }),
            }
        }
    }
    points.sort_by(|a, b| {
        a.param
            .re
            .total_cmp(&b.param.re)
            .then(a.param.im.total_cmp(&b.param.im))
    });
    Ok(points)
}

fn fiber(value: Complex64, m: u32) -> Result<Vec<Complex64>> {
    if value.norm() == 0.0 || !value.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "fiber value {value} is zero or not finite"
        )));
    }
    let s0 = principal_root(value, m);
    Ok((0..m as i64).map(|k| s0 * zeta(m, k)).collect())
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    component: usize,
    chart: LineChart,
    m: u32,
    factors: Vec<(UnivariatePoly, u32)>,
    branch_points: Vec<BranchPoint>,
    avoid: &[Complex64],
    seed: u64,
    options: &TrackingOptions,
) -> Result<ComponentCoverData> {
    let params: Vec<Complex64> = branch_points.iter().map(|b| b.param).collect();
    let clearance = clearance_of(&params, avoid);
    if clearance < 1e-8 {
        return Err(Error::DegenerateGeometry(format!(
            "clearance {clearance:e} on component {component} is too small"
        )));
    }

    let anchors: Vec<Complex64> = params.iter().chain(avoid).copied().collect();
    let center = if anchors.is_empty() {
        zero()
    } else {
        anchors.iter().sum::<Complex64>() / anchors.len() as f64
    };
    let spread = anchors
        .iter()
        .map(|t| (t - center).norm())
        .fold(0.0, f64::max);
    let radius = spread + 2.0 * clearance + 1.0;
    let mut rng = rng::seeded(seed, domains::BASE_PARAM);
    let base_param = (0..BASE_ATTEMPTS)
        .map(|_| center + rng::unit_disk(&mut rng) * radius)
        .find(|t| params.iter().all(|p| (p - t).norm() >= clearance))
        .ok_or_else(|| {
            Error::DegenerateGeometry(format!("no base parameter found on component {component}"))
        })?;

    let q = factors.iter().fold(
        UnivariatePoly::new(vec![Complex64::new(1.0, 0.0)]),
        |acc, (f, w)| acc.mul(&f.pow(*w)),
    );
    let mut data = ComponentCoverData {
        component,
        chart,
        m,
        n: (q.nominal_degree() / m as usize) as u32,
        branch_points,
        base_param,
        base_fiber: Vec::new(),
        q,
        clearance,
        factors,
        options: *options,
    };
    data.base_fiber = fiber(data.value(base_param), m)?;
    Ok(data)
}

/// One piece of a path in the `t`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathPiece {
    Segment {
        from: Complex64,
        to: Complex64,
    },
    /// `center + radius·exp(i(start_angle + σ·sweep))` for `σ ∈ [0, 1]`.
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl PathPiece {
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            PathPiece::Segment { from, to } => from + (to - from) * s,
            PathPiece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => center + Complex64::from_polar(radius, start_angle + s * sweep),
        }
    }

    /// `d point / d s`.
    pub fn velocity(&self, s: f64) -> Complex64 {
        match *self {
            PathPiece::Segment { from, to } => to - from,
            PathPiece::Arc {
                radius,
                start_angle,
                sweep,
                ..
            } => Complex64::i() * Complex64::from_polar(radius * sweep, start_angle + s * sweep),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            PathPiece::Segment { from, to } => (to - from).norm(),
            PathPiece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }
}

/// A path from the base parameter made of segments and detour arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub pieces: Vec<PathPiece>,
    pub clearance: f64,
}

impl PathPlan {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn then(mut self, other: PathPlan) -> PathPlan {
        self.pieces.extend(other.pieces);
        self
    }
}

/// Plan from the base parameter to `target`.
pub fn plan_path(data: &ComponentCoverData, target: Complex64) -> Result<PathPlan> {
    plan_between(data, data.base_param, target)
}

/// Straight segment from `from` to `to`, with a minor-arc detour around
/// every branch point closer to it than its detour radius
/// `min(clearance, |from - P|, |to - P|)`. Branch points on the segment
/// itself are passed on the left.
pub fn plan_between(data: &ComponentCoverData, from: Complex64, to: Complex64) -> Result<PathPlan> {
    let clearance = data.clearance;
    for b in &data.branch_points {
        if (b.param - to).norm() < MIN_STEP || (b.param - from).norm() < MIN_STEP {
            return Err(Error::DegenerateGeometry(format!(
                "path endpoint coincides with branch point {}",
                b.param
            )));
        }
    }
    let length = (to - from).norm();
    if length <= 1e-15 * (1.0 + from.norm()) {
        return Ok(PathPlan {
            pieces: Vec::new(),
            clearance,
        });
    }
    let dir = (to - from) / length;

    // (entry position along the segment, exit position, arc)
    let mut detours: Vec<(f64, f64, PathPiece)> = Vec::new();
    for b in &data.branch_points {
        let p = b.param;
        let r = clearance.min((from - p).norm()).min((to - p).norm());
        let u = (p - from) * dir.conj();
        let (along, h) = (u.re, u.im);
        if along < 0.0 || along > length || h.abs() >= r * (1.0 - 1e-9) {
            continue;
        }
        let half = (r * r - h * h).sqrt();
        let s1 = (along - half).max(0.0);
        let s2 = (along + half).min(length);
        let e1 = from + dir * s1;
        let e2 = from + dir * s2;
        let start_angle = (e1 - p).arg();
        let sweep = if h.abs() <= 1e-12 * r {
            -PI
        } else {
            let mut d = (e2 - p).arg() - start_angle;
            if d > PI {
                d -= TAU;
            } else if d <= -PI {
                d += TAU;
            }
            d
        };
        detours.push((
            s1,
            s2,
            PathPiece::Arc {
                center: p,
                radius: r,
                start_angle,
                sweep,
            },
        ));
    }
    detours.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut pieces = Vec::new();
    let mut cursor = 0.0;
    let mut at = from;
    for (s1, s2, arc) in detours {
        if s1 > cursor {
            let next = from + dir * s1;
            pieces.push(PathPiece::Segment { from: at, to: next });
        }
        pieces.push(arc);
        cursor = s2;
        at = arc.point(1.0);
    }
    if cursor < length {
        pieces.push(PathPiece::Segment { from: at, to });
    }
    Ok(PathPlan { pieces, clearance })
}

/// Result of transporting the base fiber along a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetTransport {
    pub target_param: Complex64,
    /// `values[k]` is the continuation of `base_fiber[k]`.
    pub values: Vec<Complex64>,
    pub max_residual: f64,
}

/// Continues every base-fiber value along `plan`.
pub fn track(data: &ComponentCoverData, plan: &PathPlan) -> Result<SheetTransport> {
    let start = data.base_fiber[0];
    let (end, max_residual) = continue_root(data, plan, start)?;
    let target_param = plan
        .pieces
        .last()
        .map(|p| p.point(1.0))
        .unwrap_or(data.base_param);
    let values = (0..data.m as i64).map(|k| end * zeta(data.m, k)).collect();
    Ok(SheetTransport {
        target_param,
        values,
        max_residual,
    })
}

/// [`plan_path`] followed by [`track`].
pub fn transport_to(data: &ComponentCoverData, target: Complex64) -> Result<SheetTransport> {
    track(data, &plan_path(data, target)?)
}

/// Continues one root `s` of `s^m = Q(t)` along `plan`; returns the final
/// value and the largest residual over accepted steps.
///
/// Euler predictor, Newton corrector. A step is accepted when the corrector
/// converges within eight iterations, the corrected value is at least three
/// times closer to its predictor than to any other sheet, and `Q` changes by
/// at most a quarter of its modulus.
pub fn continue_root(
    data: &ComponentCoverData,
    plan: &PathPlan,
    start: Complex64,
) -> Result<(Complex64, f64)> {
    let m = data.m;
    let mf = m as f64;
    let sheet_gap = 2.0 * (PI / mf).sin();
    let mut s = start;
    let mut max_residual: f64 = 0.0;
    let mut h_len = data.clearance / 4.0;
    for piece in &plan.pieces {
        let len = piece.length();
        if len == 0.0 {
            continue;
        }
        let mut sigma = 0.0;
        let (mut q_cur, mut log_der) = data.value_and_log_derivative(piece.point(0.0));
        let mut streak = 0;
        while sigma < 1.0 {
            let step = (h_len / len).min(1.0 - sigma);
            let last = sigma + step >= 1.0;
            let t0 = piece.point(sigma);
            let t1 = piece.point(if last { 1.0 } else { sigma + step });
            let predicted = s + s * log_der / mf * piece.velocity(sigma) * step;
            let (q_new, log_der_new) = data.value_and_log_derivative(t1);

            let mut x = predicted;
            let mut converged = false;
            for _ in 0..MAX_NEWTON {
                let xm1 = x.powu(m - 1);
                let dx = (xm1 * x - q_new) / (xm1 * mf);
                x -= dx;
                if !x.is_finite() {
                    break;
                }
                if dx.norm() <= 1e-14 * x.norm() {
                    converged = true;
                    break;
                }
            }
            let gentle = (q_new - q_cur).norm() <= MAX_RELATIVE_CHANGE * q_cur.norm();
            let separated = SEPARATION_FACTOR * (x - predicted).norm() <= sheet_gap * x.norm();
            if converged && gentle && separated {
                let residual = (x.powu(m) - q_new).norm() / (1.0 + q_new.norm());
                max_residual = max_residual.max(residual);
                s = x;
                sigma = if last { 1.0 } else { sigma + step };
                q_cur = q_new;
                log_der = log_der_new;
                streak += 1;
                if streak >= 4 {
                    h_len *= 2.0;
                    streak = 0;
                }
            } else {
                h_len /= 2.0;
                streak = 0;
                if h_len < MIN_STEP {
                    return Err(if converged && gentle {
                        Error::SheetCollision { at: t0 }
                    } else {
                        Error::StepUnderflow {
                            min_step: MIN_STEP,
                            at: t0,
                        }
                    });
                }
            }
        }
    }
    if max_residual > data.options.residual_tol {
        return Err(Error::StepUnderflow {
            min_step: MIN_STEP,
            at: plan
                .pieces
                .last()
                .map(|p| p.point(1.0))
                .unwrap_or(data.base_param),
        });
    }
    Ok((s, max_residual))
}

/// `k` with `after ≈ before·ζ_m^k`.
fn shift_between(before: Complex64, after: Complex64, m: u32) -> Result<u32> {
    let ratio = after / before;
    let k = (ratio.arg() * m as f64 / TAU).round() as i64;
    let k = k.rem_euclid(m as i64);
    if (ratio - zeta(m, k)).norm() > MATCH_TOL {
        return Err(Error::MatchingAmbiguous(format!(
            "transported value is not a root of unity multiple (ratio {ratio})"
        )));
    }
    Ok(k as u32)
}

/// Shift `k` of the tracked loop of radius `clearance/2` around branch
/// point `branch_index`: sheet `r` returns as sheet `r + k`.
pub fn local_shift(data: &ComponentCoverData, branch_index: usize) -> Result<u32> {
    let bp = data.branch_points.get(branch_index).ok_or_else(|| {
        Error::ConfigInvalid(format!("no branch point with index {branch_index}"))
    })?;
    let p = bp.param;
    let rho = data.clearance / 2.0;
    let ray = data.base_param - p;
    let entry = p + ray / ray.norm() * rho;
    let approach = plan_between(data, data.base_param, entry)?;
    let (s_entry, _) = continue_root(data, &approach, data.base_fiber[0])?;
    let lap = PathPlan {
        pieces: vec![PathPiece::Arc {
            center: p,
            radius: rho,
            start_angle: ray.arg(),
            sweep: TAU,
        }],
        clearance: data.clearance,
    };
    let (s_after, _) = continue_root(data, &lap, s_entry)?;
    let tracked = shift_between(s_entry, s_after, data.m)?;
    let expected = bp.multiplicity % data.m;
    if tracked != expected {
        return Err(Error::MonodromyMismatch {
            branch: branch_index,
            tracked: tracked as i64,
            expected: expected as i64,
        });
    }
    Ok(tracked)
}

/// Local monodromy at a branch point as a permutation `r ↦ perm[r]`.
pub fn local_monodromy(data: &ComponentCoverData, branch_index: usize) -> Result<Vec<usize>> {
    let k = local_shift(data, branch_index)? as usize;
    let m = data.m as usize;
    Ok((0..m).map(|r| (r + k) % m).collect())
}

/// Shift of a clockwise loop enclosing every finite branch point, i.e. the
/// local monodromy at `t = ∞`.
pub fn shift_at_infinity(data: &ComponentCoverData) -> Result<u32> {
    let params: Vec<Complex64> = data.branch_points.iter().map(|b| b.param).collect();
    let center = if params.is_empty() {
        data.base_param
    } else {
        params.iter().sum::<Complex64>() / params.len() as f64
    };
    let radius = params
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max)
        + data.clearance;
    let ray = data.base_param - center;
    let angle = if ray.norm() > 0.0 { ray.arg() } else { 0.0 };
    let entry = center + Complex64::from_polar(radius, angle);
    let approach = plan_between(data, data.base_param, entry)?;
    let (s_entry, _) = continue_root(data, &approach, data.base_fiber[0])?;
    let lap = PathPlan {
        pieces: vec![PathPiece::Arc {
            center,
            radius,
            start_angle: angle,
            sweep: -TAU,
        }],
        clearance: data.clearance,
    };
    let (s_after, _) = continue_root(data, &lap, s_entry)?;
    shift_between(s_entry, s_after, data.m)
}

/// Sum of all tracked local shifts, including the one at infinity, mod `m`.
/// Zero when the loops compose to the identity.
pub fn composed_shift(data: &ComponentCoverData) -> Result<u32> {
    let mut total = shift_at_infinity(data)? as u64;
    for i in 0..data.branch_points.len() {
        total += local_shift(data, i)? as u64;
    }
    Ok((total % data.m as u64) as u32)
}

/// Number of orbits of translations by `shifts` acting on `Z/m`.
pub fn orbit_count(m: u32, shifts: &[u32]) -> usize {
    let mut uf = UnionFind::new(m as usize);
    for &k in shifts {
        for r in 0..m {
            uf.union(r as usize, ((r + k) % m) as usize);
        }
    }
    uf.classes()
}

/// `gcd(m, I_P)` over all branch points, cross-checked against the orbit
/// count of the tracked local monodromies.
pub fn splitting_count(data: &ComponentCoverData) -> Result<u32> {
    let g = data
        .branch_points
        .iter()
        .fold(data.m as u64, |g, b| gcd(g, b.multiplicity as u64)) as u32;
    let shifts = (0..data.branch_points.len())
        .map(|i| local_shift(data, i))
        .collect::<Result<Vec<_>>>()?;
    let orbits = orbit_count(data.m, &shifts);
    if orbits != g as usize {
        return Err(Error::MonodromyMismatch {
            branch: usize::MAX,
            tracked: orbits as i64,
            expected: g as i64,
        });
    }
    Ok(g)
}

/// Sheet identification over an intersection point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetOffset {
    /// Sheet `k` of the first component meets sheet `k + offset` of the second.
    pub offset: u32,
    pub matching: Vec<(usize, usize)>,
    pub params: (Complex64, Complex64),
    pub max_residual: f64,
}

fn hermitian(a: &Triple, b: &Triple) -> Complex64 {
    (0..3).map(|k| a[k].conj() * b[k]).sum()
}

/// Offset between the sheets of two components over their common point `p`.
///
/// Both base fibers are transported to `p`'s parameter on their own chart
/// and rescaled to the normalized representative of `p`: if the chart
/// representative is `β·p̂` then `F` picks up `β^{mn}`, so fiber values pick
/// up `β^n`.
pub fn offset_at(
    data_i: &ComponentCoverData,
    data_j: &ComponentCoverData,
    p: &HomogeneousPoint,
) -> Result<SheetOffset> {
    if data_i.m != data_j.m || data_i.n != data_j.n {
        return Err(Error::ConfigInvalid(
            "components belong to different covers".into(),
        ));
    }
    let m = data_i.m;
    let param = |d: &ComponentCoverData| -> Result<Complex64> {
        param_of_point(&d.chart, p)?.finite().ok_or_else(|| {
            Error::DegenerateGeometry(format!(
                "intersection point at infinity of the chart on component {}",
                d.component
            ))
        })
    };
    let (ti, tj) = (param(data_i)?, param(data_j)?);
    if data_i.on_branch(ti) || data_j.on_branch(tj) {
        return Err(Error::IntersectionOnBranchLocus {
            i: data_i.component,
            j: data_j.component,
        });
    }
    let normalize = |d: &ComponentCoverData, t: Complex64| -> Result<(Vec<Complex64>, f64)> {
        let tr = transport_to(d, t)?;
        let rep = d.chart.representative(t);
        let beta = hermitian(p.coords(), &rep) / hermitian(p.coords(), p.coords());
        let scale = beta.powi(-(d.n as i32));
        Ok((
            tr.values.iter().map(|s| s * scale).collect(),
            tr.max_residual,
        ))
    };
    let (vi, ri) = normalize(data_i, ti)?;
    let (vj, rj) = normalize(data_j, tj)?;

    let mut matching = Vec::with_capacity(m as usize);
    let mut offset = None;
    for (k, s) in vi.iter().enumerate() {
        let mut dists: Vec<(f64, usize)> = vj
            .iter()
            .enumerate()
            .map(|(l, v)| ((s - v).norm(), l))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (best, l) = dists[0];
        let second = dists.get(1).map_or(f64::INFINITY, |d| d.0);
        if best > MATCH_TOL * s.norm() || second < 10.0 * best {
            return Err(Error::MatchingAmbiguous(format!(
                "sheet {k} of component {} has no clean partner on component {} \
                 (best {best:e}, second {second:e})",
                data_i.component, data_j.component
            )));
        }
        let a = (l as i64 - k as i64).rem_euclid(m as i64) as u32;
        if *offset.get_or_insert(a) != a {
            return Err(Error::MatchingAmbiguous(format!(
                "matching between components {} and {} is not a cyclic shift",
                data_i.component, data_j.component
            )));
        }
        matching.push((k, l));
    }
    Ok(SheetOffset {
        offset: offset.unwrap_or(0),
        matching,
        params: (ti, tj),
        max_residual: ri.max(rj),
    })
}

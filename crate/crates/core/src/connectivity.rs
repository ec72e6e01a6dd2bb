//! The gluing graph of an arrangement of lines and its connected number,
//! counted by union-find and, independently, by the offset subgroup.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermat::{
    artal_branch_curve, fermat_form, tangent_line, triple_from_js, ArtalFamilyConfig,
};
use crate::geometry::{chart_of, intersect, HomogeneousPoint, ProjectiveLine};
use crate::monodromy::{
    component_data_with, composed_shift, local_shift, offset_at, ComponentCoverData,
    TrackingOptions, WeightedBranchDivisor,
};
use crate::polynomials::restrict_to_line;
use crate::union_find::UnionFind;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A cyclic cover together with the lines `C = ΣC_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    pub cover: WeightedBranchDivisor,
    pub components: Vec<ProjectiveLine>,
    pub labels: Vec<Option<String>>,
}

impl Arrangement {
    pub fn new(cover: WeightedBranchDivisor, components: Vec<ProjectiveLine>) -> Result<Self> {
        let labels = vec![None; components.len()];
        Self::with_labels(cover, components, labels)
    }

    pub fn with_labels(
        cover: WeightedBranchDivisor,
        components: Vec<ProjectiveLine>,
        labels: Vec<Option<String>>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::ConfigInvalid("arrangement has no components".into()));
        }
        if labels.len() != components.len() {
            return Err(Error::ConfigInvalid(
                "one label slot per component required".into(),
            ));
        }
        for (i, a) in components.iter().enumerate() {
            for b in &components[i + 1..] {
                if a.projectively_eq(b) {
                    return Err(Error::ConfigInvalid(format!(
                        "component {i} appears twice in the arrangement"
                    )));
                }
            }
        }
        Ok(Self {
            cover,
            components,
            labels,
        })
    }

    /// The branch curve `B_{b,μ}` with its three tangent lines and `m = b`.
    pub fn artal(cfg: &ArtalFamilyConfig) -> Result<Self> {
        let cover = WeightedBranchDivisor::single(artal_branch_curve(cfg)?, cfg.b)?;
        let labels = cfg
            .line_triple
            .iter()
            .map(|i| Some(format!("L({},{})", i.family, i.j)))
            .collect();
        Self::with_labels(cover, cfg.lines().to_vec(), labels)
    }

    /// The Fermat curve of degree `μ` with the tangent lines at
    /// `P_{1,j₁}, P_{2,j₂}, P_{3,j₃}` and `m = μ`.
    pub fn fermat(mu: u32, js: [u32; 3]) -> Result<Self> {
        let triple = triple_from_js(mu, js)?;
        let cover = WeightedBranchDivisor::single(fermat_form(mu)?, mu)?;
        let labels = triple
            .iter()
            .map(|i| Some(format!("L({},{})", i.family, i.j)))
            .collect();
        Self::with_labels(cover, triple.map(|i| tangent_line(&i)).to_vec(), labels)
    }

    pub fn m(&self) -> u32 {
        self.cover.m()
    }
}

/// Seed and tolerances of a numerical run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub seed: u64,
    pub tracking: TrackingOptions,
}

impl EngineConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            tracking: TrackingOptions::default(),
        }
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

/// An intersection point of two components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub i: usize,
    pub j: usize,
    pub point: HomogeneousPoint,
}

/// Outcome of [`check_preconditions`].
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditions {
    /// Intersections off `B`, sorted by component pair.
    pub gluing_points: Vec<Intersection>,
    pub warnings: Vec<String>,
}

/// Checks that no component lies in `B` and that `C ∖ B` is connected.
pub fn check_preconditions(arr: &Arrangement, tol: f64) -> Result<Preconditions> {
    for (k, line) in arr.components.iter().enumerate() {
        let chart = chart_of(line, 0);
        for (form, _) in arr.cover.parts() {
            if restrict_to_line(form, &chart).is_negligible(form.scale(), 1e-10) {
                return Err(Error::ComponentInsideBranch { component: k });
            }
        }
    }
    let k = arr.components.len();
    let mut uf = UnionFind::new(k);
    let mut gluing_points = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let point = intersect(&arr.components[i], &arr.components[j])?;
            if arr.cover.contains_point(&point, tol) {
                warnings.push(format!(
                    "components {i} and {j} meet on the branch curve; no gluing there"
                ));
            } else {
                uf.union(i, j);
                gluing_points.push(Intersection { i, j, point });
            }
        }
    }
    if uf.classes() != 1 {
        return Err(Error::CurveMinusBranchDisconnected);
    }
    Ok(Preconditions {
        gluing_points,
        warnings,
    })
}

/// Per-component data surfaced in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub component: usize,
    pub label: Option<String>,
    pub branch_params: Vec<Complex64>,
    pub branch_multiplicities: Vec<u32>,
    /// Tracked local monodromy shifts, one per branch point.
    pub tracked_shifts: Vec<u32>,
    pub splitting: u32,
    /// Tracked shift around every branch point and infinity; zero when sound.
    pub composed_shift: u32,
    pub clearance: f64,
}

/// `(component i, sheet k) ~ (component i, sheet k + shift)` from a branch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntraEdge {
    pub component: usize,
    pub branch: usize,
    pub from: usize,
    pub to: usize,
}

/// `(i, sheet_i) ~ (j, sheet_j)` over the witness point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterEdge {
    pub i: usize,
    pub sheet_i: usize,
    pub j: usize,
    pub sheet_j: usize,
    pub witness: HomogeneousPoint,
}

/// Offset `a_P`: sheet `k` of `i` meets sheet `k + a_P` of `j` over `point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionOffset {
    pub i: usize,
    pub j: usize,
    pub point: HomogeneousPoint,
    pub offset: u32,
}

/// Nodes are `(component, sheet)`, stored as `component·m + sheet`.
#[derive(Debug, Clone, PartialEq)]
pub struct GluingGraph {
    pub m: u32,
    pub component_count: usize,
    pub intra_edges: Vec<IntraEdge>,
    pub inter_edges: Vec<InterEdge>,
    pub offsets: Vec<IntersectionOffset>,
    pub components: Vec<ComponentSummary>,
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

impl GluingGraph {
    pub fn node_count(&self) -> usize {
        self.component_count * self.m as usize
    }

    pub fn node(&self, component: usize, sheet: usize) -> usize {
        component * self.m as usize + sheet
    }

    /// Number of union-find classes.
    pub fn class_count(&self) -> usize {
        let mut uf = UnionFind::new(self.node_count());
        for e in &self.intra_edges {
            uf.union(self.node(e.component, e.from), self.node(e.component, e.to));
        }
        for e in &self.inter_edges {
            uf.union(self.node(e.i, e.sheet_i), self.node(e.j, e.sheet_j));
        }
        uf.classes()
    }
}

fn component_seed(seed: u64, component: usize) -> u64 {
    seed ^ (component as u64 + 1).wrapping_mul(0xA076_1D64_78BD_642F)
}

fn summarize(arr: &Arrangement, data: &ComponentCoverData) -> Result<ComponentSummary> {
    let tracked_shifts = (0..data.branch_points.len())
        .map(|b| local_shift(data, b))
        .collect::<Result<Vec<_>>>()?;
    let multiplicities: Vec<u32> = data.branch_points.iter().map(|b| b.multiplicity).collect();
    let splitting = multiplicities
        .iter()
        .fold(data.m as u64, |g, &i| gcd(g, i as u64)) as u32;
    Ok(ComponentSummary {
        component: data.component,
        label: arr.labels[data.component].clone(),
        branch_params: data.branch_points.iter().map(|b| b.param).collect(),
        branch_multiplicities: multiplicities,
        tracked_shifts,
        splitting,
        composed_shift: composed_shift(data)?,
        clearance: data.clearance,
    })
}

/// Builds per-component sheet data and the gluing graph.
pub fn gluing_graph(arr: &Arrangement, cfg: &EngineConfig) -> Result<GluingGraph> {
    let pre = check_preconditions(arr, cfg.tracking.on_branch_tol)?;
    let m = arr.m();
    let k = arr.components.len();

    let data = (0..k)
        .into_par_iter()
        .map(|c| {
            let avoid: Vec<HomogeneousPoint> = pre
                .gluing_points
                .iter()
                .filter(|x| x.i == c || x.j == c)
                .map(|x| x.point)
                .collect();
            component_data_with(
                &arr.cover,
                &arr.components[c],
                c,
                component_seed(cfg.seed, c),
                &avoid,
                &cfg.tracking,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let components = data
        .par_iter()
        .map(|d| summarize(arr, d))
        .collect::<Result<Vec<_>>>()?;

    let offsets = pre
        .gluing_points
        .par_iter()
        .map(|x| offset_at(&data[x.i], &data[x.j], &x.point).map(|o| (*x, o)))
        .collect::<Result<Vec<_>>>()?;

    let mut intra_edges = Vec::new();
    for s in &components {
        for (b, &shift) in s.tracked_shifts.iter().enumerate() {
            if shift == 0 {
                continue;
            }
            for r in 0..m as usize {
                intra_edges.push(IntraEdge {
                    component: s.component,
                    branch: b,
                    from: r,
                    to: (r + shift as usize) % m as usize,
                });
            }
        }
    }
    let mut inter_edges = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (x, o) in &offsets {
        max_residual = max_residual.max(o.max_residual);
        for &(sheet_i, sheet_j) in &o.matching {
            inter_edges.push(InterEdge {
                i: x.i,
                sheet_i,
                j: x.j,
                sheet_j,
                witness: x.point,
            });
        }
    }
    Ok(GluingGraph {
        m,
        component_count: k,
        intra_edges,
        inter_edges,
        offsets: offsets
            .iter()
            .map(|(x, o)| IntersectionOffset {
                i: x.i,
                j: x.j,
                point: x.point,
                offset: o.offset,
            })
            .collect(),
        components,
        max_residual,
        warnings: pre.warnings,
    })
}

/// Connected number from the offsets alone.
///
/// A spanning tree of the component graph, taken greedily in lexicographic
/// edge order, gauges its offsets to zero via potentials `φ_j = φ_i + a`.
/// Every other edge contributes the cycle sum `φ_i + a - φ_j`, every branch
/// point its multiplicity, and `c = gcd(m, all of these)`. Returns `c` and
/// the cycle sums.
pub fn offset_formula(graph: &GluingGraph) -> (usize, Vec<u32>) {
    let m = graph.m as i64;
    let k = graph.component_count;
    let mut edges: Vec<&IntersectionOffset> = graph.offsets.iter().collect();
    edges.sort_by_key(|e| (e.i, e.j));

    let mut uf = UnionFind::new(k);
    let mut tree: Vec<Vec<(usize, i64)>> = vec![Vec::new(); k];
    let mut non_tree = Vec::new();
    for e in &edges {
        if uf.union(e.i, e.j) {
            tree[e.i].push((e.j, e.offset as i64));
            tree[e.j].push((e.i, -(e.offset as i64)));
        } else {
            non_tree.push(*e);
        }
    }
    let mut phi: Vec<Option<i64>> = vec![None; k];
    for root in 0..k {
        if phi[root].is_some() {
            continue;
        }
        phi[root] = Some(0);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            let pu = phi[u].expect("visited");
            for &(v, a) in &tree[u] {
                if phi[v].is_none() {
                    phi[v] = Some((pu + a).rem_euclid(m));
                    stack.push(v);
                }
            }
        }
    }
    let cycle_sums: Vec<u32> = non_tree
        .iter()
        .map(|e| {
            let (pi, pj) = (phi[e.i].unwrap_or(0), phi[e.j].unwrap_or(0));
            (pi + e.offset as i64 - pj).rem_euclid(m) as u32
        })
        .collect();
    let mut g = m as u64;
    for s in &graph.components {
        for &i in &s.branch_multiplicities {
            g = gcd(g, i as u64);
        }
    }
    for &s in &cycle_sums {
        g = gcd(g, s as u64);
    }
    // disconnected component graphs contribute one copy of Z/m per piece
    let pieces = uf.classes();
    (pieces * g as usize, cycle_sums)
}

/// Full report of a connected-number computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectedNumberReport {
    pub c: usize,
    pub m: u32,
    pub per_component_splitting: Vec<u32>,
    pub offsets: Vec<IntersectionOffset>,
    pub cycle_sums: Vec<u32>,
    pub offset_method_c: usize,
    pub method_agreement: bool,
    pub completely_split: bool,
    pub components: Vec<ComponentSummary>,
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

fn report(graph: GluingGraph) -> ConnectedNumberReport {
    let c = graph.class_count();
    let (offset_method_c, cycle_sums) = offset_formula(&graph);
    let per_component_splitting = graph.components.iter().map(|s| s.splitting).collect();
    let completely_split = graph
        .components
        .iter()
        .all(|s| s.branch_multiplicities.iter().all(|i| i % graph.m == 0));
    ConnectedNumberReport {
        c,
        m: graph.m,
        per_component_splitting,
        offsets: graph.offsets,
        cycle_sums,
        offset_method_c,
        method_agreement: c == offset_method_c,
        completely_split,
        components: graph.components,
        max_residual: graph.max_residual,
        warnings: graph.warnings,
    }
}

/// Number of union-find classes of the gluing graph, with the offset count
/// computed alongside from the same data.
pub fn connected_number(arr: &Arrangement, cfg: &EngineConfig) -> Result<ConnectedNumberReport> {
    Ok(report(gluing_graph(arr, cfg)?))
}

/// Connected number by the offset formula only.
pub fn connected_number_via_offsets(arr: &Arrangement, cfg: &EngineConfig) -> Result<usize> {
    Ok(offset_formula(&gluing_graph(arr, cfg)?).0)
}

/// [`connected_number`], failing with a diagnostic dump when the two
/// methods disagree.
pub fn cross_check(arr: &Arrangement, cfg: &EngineConfig) -> Result<ConnectedNumberReport> {
    let r = connected_number(arr, cfg)?;
    if !r.method_agreement {
        let diagnostics = serde_json::to_string_pretty(&r).unwrap_or_default();
        return Err(Error::MethodDisagreement {
            union_find: r.c,
            offsets: r.offset_method_c,
            diagnostics,
        });
    }
    Ok(r)
}

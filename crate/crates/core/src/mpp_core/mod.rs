//! Parameter-space partitioning: probe, classify, build a critical region,
//! split the remainder, repeat.

mod builders;
pub mod eqcost;
pub mod qp;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::face_geometry::{build_optimal_face, chebyshev_center_face, chebyshev_center_region, remove_redundant, GeomError, HPolyhedron};
use crate::lp_engine::{lexicographic_solve, multiplicity_check, solve_lp, LpError, Multiplicity, StandardFormLP, Status, VertexSolution};
use crate::sparse_linalg::{permutation_from_partition, Permutation};
use crate::tol::Tolerances;

pub use builders::{build_cr_multiple, build_cr_unique, QpObjective};
pub use eqcost::{cone_violation, cost_cone, equivalent_cost_vector, CostCone, EquivalentCost};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MppError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    /// The probe's zero pattern does not describe a full-dimensional region.
    #[error("misclassified probe: {0}")]
    Misclassified(String),
    #[error("projection exceeded {0} rows")]
    ProjectionOverflow(usize),
    #[error("no equivalent cost vector with a unique optimum after 5 attempts")]
    EquivalentCostFailure,
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("invalid input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    UniqueNondegenerate,
    UniqueDegenerate,
    MultipleNondegenerate,
    MultipleDegenerate,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::UniqueNondegenerate => "unique-nondegenerate",
            Case::UniqueDegenerate => "unique-degenerate",
            Case::MultipleNondegenerate => "multiple-nondegenerate",
            Case::MultipleDegenerate => "multiple-degenerate",
        }
    }

    pub fn is_multiple(&self) -> bool {
        matches!(self, Case::MultipleNondegenerate | Case::MultipleDegenerate)
    }
}

/// How multiple optima are resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "costs")]
pub enum Resolution {
    /// Keep the solver's vertex.
    None,
    /// Auxiliary objectives on original variables, maximized in order.
    Lex(Vec<Vec<f64>>),
    /// One randomized auxiliary objective with a unique optimum.
    EqCost,
    /// Minimum-norm optimum via an auxiliary QP.
    Qp,
}

impl Resolution {
    pub fn name(&self) -> &'static str {
        match self {
            Resolution::None => "none",
            Resolution::Lex(_) => "lex",
            Resolution::EqCost => "eqcost",
            Resolution::Qp => "qp",
        }
    }
}

/// Norm minimized by the QP resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QpNorm {
    /// Original decision variables only.
    #[default]
    Original,
    /// Every standard-form variable, slacks included.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub resolution: Resolution,
    pub seed: u64,
    pub tol: Tolerances,
    /// Worker threads; 0 picks the rayon default.
    pub workers: usize,
    /// Box bound `U` on the dual set for equivalent cost vectors.
    pub eq_bound: f64,
    pub qp_norm: QpNorm,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            resolution: Resolution::EqCost,
            seed: 0,
            tol: Tolerances::default(),
            workers: 0,
            eq_bound: 1e6,
            qp_norm: QpNorm::Original,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPartition {
    pub j1: Vec<usize>,
    pub j0: Vec<usize>,
    pub j11: Option<Vec<usize>>,
    pub j10: Option<Vec<usize>>,
}

impl IndexPartition {
    /// `J1 = {j : x_j > tz}`.
    pub fn from_support(x: &[f64], tz: f64) -> Self {
        let j1 = (0..x.len()).filter(|&j| x[j] > tz).collect();
        let j0 = (0..x.len()).filter(|&j| x[j] <= tz).collect();
        IndexPartition { j1, j0, j11: None, j10: None }
    }

    pub fn n1(&self) -> usize {
        self.j1.len()
    }

    pub fn n0(&self) -> usize {
        self.j0.len()
    }

    pub fn n11(&self) -> Option<usize> {
        self.j11.as_ref().map(Vec::len)
    }

    pub fn n10(&self) -> Option<usize> {
        self.j10.as_ref().map(Vec::len)
    }

    /// Column permutation putting `J1` first.
    pub fn permutation(&self) -> Permutation {
        permutation_from_partition(&self.j1, self.j1.len() + self.j0.len()).expect("J1 is a valid index set")
    }

    /// Permutation of `J1` positions putting `J11` first.
    pub fn second_permutation(&self) -> Option<Permutation> {
        let j11 = self.j11.as_ref()?;
        let pos: Vec<usize> = j11.iter().map(|j| self.j1.binary_search(j).expect("J11 ⊆ J1")).collect();
        Some(permutation_from_partition(&pos, self.j1.len()).expect("J11 positions are valid"))
    }

    /// Zero set of the resolved solution: `J0 ∪ J10`.
    pub fn zero_set(&self) -> Vec<usize> {
        let mut z = self.j0.clone();
        if let Some(j10) = &self.j10 {
            z.extend_from_slice(j10);
        }
        z.sort_unstable();
        z
    }
}

/// `y = E θ + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub e_mat: DMatrix<f64>,
    pub e: Vec<f64>,
}

impl AffineMap {
    pub fn eval(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.e.len()).map(|i| self.e[i] + (0..theta.len()).map(|k| self.e_mat[(i, k)] * theta[k]).sum::<f64>()).collect()
    }
}

/// Primal and dual maps of a region. Duals follow `c + Aᵀλ + μ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTriple {
    /// Standard-form primal map (all `n` variables).
    pub x: AffineMap,
    /// Particular (least-norm) part of the row duals.
    pub lambda_p: AffineMap,
    /// Null-space basis of the row duals; empty when they are unique.
    pub z: DMatrix<f64>,
    /// Bound duals with the null-space part set to zero.
    pub mu: AffineMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRegion {
    pub id: usize,
    pub region: HPolyhedron,
    pub case: Case,
    pub partition: IndexPartition,
    pub solution: SolutionTriple,
    /// Zero set of the solution the map reproduces.
    pub zero_set: Vec<usize>,
    /// Zero set common to every optimal solution at the probe.
    pub optimal_active_set: Vec<usize>,
    pub mode_key: String,
    pub resolution: String,
    pub probe: Vec<f64>,
    pub radius: f64,
}

impl CriticalRegion {
    pub fn primal(&self, theta: &[f64]) -> Vec<f64> {
        self.solution.x.eval(theta)
    }

    pub fn primal_original(&self, lp: &StandardFormLP, theta: &[f64]) -> Vec<f64> {
        lp.recovery.apply(&self.primal(theta), theta)
    }

    /// Original-problem objective of the map at `theta`.
    pub fn objective(&self, lp: &StandardFormLP, theta: &[f64]) -> f64 {
        lp.original_objective(&self.primal(theta), theta)
    }

    /// Inequality rows of the general form that bind on the mode-key set.
    pub fn active_rows(&self, lp: &StandardFormLP) -> Vec<usize> {
        lp.active_rows(&self.key_set())
    }

    pub fn key_set(&self) -> Vec<usize> {
        parse_key(&self.mode_key)
    }
}

pub fn mode_key_of(set: &[usize]) -> String {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_key(key: &str) -> Vec<usize> {
    if key.is_empty() {
        return vec![];
    }
    key.split(',').filter_map(|t| t.parse().ok()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub fingerprint: String,
    pub regions: Vec<CriticalRegion>,
    pub infeasible: Vec<HPolyhedron>,
    pub unresolved: Vec<HPolyhedron>,
    pub config: PartitionConfig,
    /// Resolution actually used (eqcost falls back to qp when no vector is found).
    pub effective_resolution: Resolution,
    /// Standard-form auxiliary cost used by eqcost, if any.
    pub equivalent_cost: Option<Vec<f64>>,
    pub pops: usize,
    pub notes: Vec<String>,
}

impl Partition {
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }

    /// Region ids grouped by mode key, keys in sorted order.
    pub fn mode_groups(&self) -> BTreeMap<String, Vec<usize>> {
        let mut g: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for r in &self.regions {
            g.entry(r.mode_key.clone()).or_default().push(r.id);
        }
        g
    }

    pub fn merged_count(&self) -> usize {
        self.mode_groups().len()
    }

    /// Ids of regions whose closure contains `theta`.
    pub fn locate(&self, theta: &[f64], tol: f64) -> Vec<usize> {
        self.regions.iter().filter(|r| r.region.contains(theta, tol)).map(|r| r.id).collect()
    }

    pub fn region(&self, id: usize) -> Option<&CriticalRegion> {
        self.regions.iter().find(|r| r.id == id)
    }
}

/// SHA-256 over the standard-form data, hex encoded.
pub fn fingerprint(lp: &StandardFormLP) -> String {
    let mut h = Sha256::new();
    let mut put = |v: f64| h.update(v.to_bits().to_le_bytes());
    put(lp.m() as f64);
    put(lp.n() as f64);
    put(lp.q() as f64);
    for (i, j, v) in lp.a.triplets() {
        put(i as f64);
        put(j as f64);
        put(v);
    }
    for &v in &lp.w {
        put(v);
    }
    for (i, j, v) in lp.f.triplets() {
        put(i as f64);
        put(j as f64);
        put(v);
    }
    for &v in &lp.c {
        put(v);
    }
    hex::encode(h.finalize())
}

/// Result of classifying the optimum at a probe.
#[derive(Debug, Clone)]
pub struct Classification {
    pub multiplicity: Multiplicity,
    /// `J1/J0` from the vertex (unique) or the face's Chebyshev center (multiple).
    pub partition: IndexPartition,
    /// Zero set common to all optimal solutions.
    pub optimal_active_set: Vec<usize>,
    /// Canonical Chebyshev center of the optimal face, when multiple.
    pub face_center: Option<Vec<f64>>,
    pub degenerate: bool,
}

/// Classifies the optimum at `theta`. For multiple optima the optimal face is
/// built and its Chebyshev center defines `J1/J0`.
pub fn classify(lp: &StandardFormLP, theta: &[f64], vertex: &VertexSolution, tol: &Tolerances) -> Result<Classification, MppError> {
    if vertex.status != Status::Optimal {
        return Err(MppError::Input("classification needs an optimal vertex".into()));
    }
    let tz = tol.zero_for(&lp.rhs(theta));
    let mult = multiplicity_check(lp, vertex, theta, tol)?;
    match mult {
        Multiplicity::Unique => {
            let part = IndexPartition::from_support(&vertex.x, tz);
            let degenerate = part.n1() < lp.m();
            let zero = part.j0.clone();
            Ok(Classification { multiplicity: mult, partition: part, optimal_active_set: zero, face_center: None, degenerate })
        }
        Multiplicity::Multiple => {
            let face = build_optimal_face(lp, theta, vertex.objective, &vertex.x, tol)?;
            let (xc, _) = chebyshev_center_face(&face, tol)?;
            let mut part = IndexPartition::from_support(&xc, tz);
            // A split variable that is exactly zero at the center keeps its positive part.
            for &(p, q) in &lp.split_pairs {
                if xc[p] <= tz && xc[q] <= tz {
                    part.j1.push(p);
                    part.j0.retain(|&j| j != p);
                }
            }
            part.j1.sort_unstable();
            let degenerate = part.n1() < lp.m();
            Ok(Classification {
                multiplicity: mult,
                partition: part,
                optimal_active_set: face.implicit.clone(),
                face_center: Some(xc),
                degenerate,
            })
        }
    }
}

/// Minimum-norm optimum on the face `{x ≥ 0 : x_J0 = 0, Ax = b}` and the
/// resulting second-level split of `J1`.
pub fn resolve_multiplicity_qp(
    lp: &StandardFormLP,
    part: &IndexPartition,
    center: &[f64],
    theta: &[f64],
    obj: &QpObjective,
    tol: &Tolerances,
) -> Result<(IndexPartition, Vec<f64>), MppError> {
    let j1 = &part.j1;
    let a1 = DMatrix::from_fn(lp.m(), j1.len(), |i, k| lp.a_dense()[(i, j1[k])]);
    let h = DMatrix::from_fn(j1.len(), j1.len(), |i, k| obj.h[(j1[i], j1[k])]);
    let gfull = obj.g_at(theta);
    let g: Vec<f64> = j1.iter().map(|&j| gfull[j]).collect();
    let x0: Vec<f64> = j1.iter().map(|&j| center[j]).collect();
    let xs = qp::active_set_qp(&h, &g, &a1, &x0, 50 * (j1.len() + lp.m()) + 100)?;
    let tz = tol.zero_for(&lp.rhs(theta));
    let mut j11 = Vec::new();
    let mut j10 = Vec::new();
    let mut full = vec![0.0; lp.n()];
    for (k, &j) in j1.iter().enumerate() {
        full[j] = xs[k];
        if xs[k] > tz {
            j11.push(j);
        } else {
            j10.push(j);
        }
    }
    let mut out = part.clone();
    out.j11 = Some(j11);
    out.j10 = Some(j10);
    Ok((out, full))
}

/// Strategy-I split of `r` around the region `omega`: piece `i` keeps rows
/// `0..i` of `omega` and reverses row `i`. Thin pieces are dropped.
pub fn split_remainder(r: &HPolyhedron, omega: &HPolyhedron, min_radius: f64, tol: &Tolerances) -> Result<Vec<HPolyhedron>, MppError> {
    let omega = omega.normalized();
    let rn = r.normalized();
    let mut out = Vec::new();
    let mut acc = r.clone();
    for i in 0..omega.n_rows() {
        let a = omega.row(i);
        let t = omega.t[i];
        let in_r = (0..rn.n_rows()).any(|k| (rn.t[k] - t).abs() < 1e-12 && rn.row(k).iter().zip(&a).all(|(x, y)| (x - y).abs() < 1e-12));
        if !in_r {
            let mut piece = acc.clone();
            piece.push_row(&a.iter().map(|v| -v).collect::<Vec<_>>(), -t);
            if let Some((_, rad)) = chebyshev_center_region(&piece, tol)? {
                if rad >= min_radius {
                    out.push(remove_redundant(&piece, tol)?);
                }
            }
        }
        acc.push_row(&a, t);
    }
    Ok(out)
}

/// Unit directions for re-probing, fixed per dimension.
fn probe_directions(q: usize, count: usize) -> Vec<Vec<f64>> {
    if q == 0 {
        return vec![];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_d1ec);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..q).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 0.1 {
                break v.iter().map(|x| x / nrm).collect();
            }
        })
        .collect()
}

const REPROBES: usize = 8;
const INFEASIBLE_PROBES: usize = 5;

struct Context<'a> {
    lp: &'a StandardFormLP,
    tol: Tolerances,
    resolution: Resolution,
    aux: Vec<Vec<f64>>,
    qp_obj: Option<QpObjective>,
    min_radius: f64,
    directions: Vec<Vec<f64>>,
}

enum Probe {
    Infeasible,
    Failed(String),
    Built(Box<CriticalRegion>),
}

enum Outcome {
    Region(Box<CriticalRegion>, Vec<HPolyhedron>),
    Infeasible,
    Unresolved(String),
    Thin,
}

impl<'a> Context<'a> {
    fn probe(&self, r: &HPolyhedron, theta: &[f64]) -> Probe {
        match self.try_probe(r, theta) {
            Ok(p) => p,
            Err(e) => Probe::Failed(e.to_string()),
        }
    }

    fn try_probe(&self, r: &HPolyhedron, theta: &[f64]) -> Result<Probe, MppError> {
        let lp = self.lp;
        let tol = &self.tol;
        let sol = solve_lp(lp, theta, tol)?;
        match sol.status {
            Status::Infeasible => return Ok(Probe::Infeasible),
            Status::Unbounded => return Ok(Probe::Failed("LP unbounded at probe".into())),
            Status::Optimal => {}
        }
        let cls = classify(lp, theta, &sol, tol)?;
        let tz = tol.zero_for(&lp.rhs(theta));
        let multiple = cls.multiplicity == Multiplicity::Multiple;
        let (built, part, key_set) = match &self.resolution {
            Resolution::None => {
                let part = IndexPartition::from_support(&sol.x, tz);
                let b = builders::build_unique(lp, &part, r, tol)?;
                (b, part, cls.optimal_active_set.clone())
            }
            Resolution::Lex(_) | Resolution::EqCost => {
                let x = if multiple { lexicographic_solve(lp, &self.aux, theta, tol)?.x } else { sol.x.clone() };
                let part = IndexPartition::from_support(&x, tz);
                let b = builders::build_unique(lp, &part, r, tol)?;
                let z = part.j0.clone();
                (b, part, z)
            }
            Resolution::Qp => {
                if multiple {
                    let obj = self.qp_obj.as_ref().expect("QP weights prepared");
                    let center = cls.face_center.as_ref().expect("multiple optima carry a face center");
                    let (part, _) = resolve_multiplicity_qp(lp, &cls.partition, center, theta, obj, tol)?;
                    let b = builders::build_multiple(lp, &part, obj, r, tol)?;
                    let z = part.zero_set();
                    (b, part, z)
                } else {
                    let b = builders::build_unique(lp, &cls.partition, r, tol)?;
                    let z = cls.partition.j0.clone();
                    (b, cls.partition.clone(), z)
                }
            }
        };
        let case = match (multiple, built.case) {
            (true, Case::UniqueNondegenerate) if self.resolution == Resolution::None => Case::MultipleNondegenerate,
            (true, Case::UniqueDegenerate) if self.resolution == Resolution::None => Case::MultipleDegenerate,
            (_, c) => c,
        };
        let Some((_, radius)) = chebyshev_center_region(&built.region, tol)? else {
            return Ok(Probe::Failed("region is empty".into()));
        };
        if radius < self.min_radius {
            return Ok(Probe::Failed(format!("region radius {radius:.3e} below threshold")));
        }
        let scale = 1.0 + theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if built.region.violation(theta) > 1e-6 * scale {
            return Ok(Probe::Failed("probe lies outside its own region".into()));
        }
        let zero_set = part.zero_set();
        Ok(Probe::Built(Box::new(CriticalRegion {
            id: 0,
            region: built.region,
            case,
            partition: part,
            solution: built.solution,
            zero_set,
            optimal_active_set: cls.optimal_active_set,
            mode_key: mode_key_of(&key_set),
            resolution: self.resolution.name().to_string(),
            probe: theta.to_vec(),
            radius,
        })))
    }

    fn process(&self, r: &HPolyhedron) -> Outcome {
        let (center, rad) = match chebyshev_center_region(r, &self.tol) {
            Ok(Some(c)) => c,
            Ok(None) => return Outcome::Thin,
            Err(e) => return Outcome::Unresolved(e.to_string()),
        };
        if rad < self.min_radius {
            return Outcome::Thin;
        }
        let mut points = vec![center.clone()];
        for u in &self.directions {
            points.push(center.iter().zip(u).map(|(c, d)| c + 0.5 * rad * d).collect());
        }
        let mut infeasible = 0;
        let mut last_err = String::new();
        for (k, th) in points.iter().enumerate() {
            match self.probe(r, th) {
                Probe::Built(cr) => {
                    return match split_remainder(r, &cr.region, self.min_radius, &self.tol) {
                        Ok(children) => Outcome::Region(cr, children),
                        Err(e) => Outcome::Unresolved(e.to_string()),
                    };
                }
                Probe::Infeasible => infeasible += 1,
                Probe::Failed(e) => last_err = e,
            }
            if k + 1 == INFEASIBLE_PROBES && infeasible == INFEASIBLE_PROBES {
                return Outcome::Infeasible;
            }
        }
        Outcome::Unresolved(last_err)
    }
}

/// Partitions `r1` into critical regions.
pub fn partition(lp: &StandardFormLP, r1: &HPolyhedron, config: &PartitionConfig) -> Result<Partition, MppError> {
    if r1.dim() != lp.q() {
        return Err(MppError::Input(format!("search region has dimension {}, expected {}", r1.dim(), lp.q())));
    }
    let tol = config.tol;
    let (c0, r0) = chebyshev_center_region(r1, &tol)?.ok_or_else(|| MppError::Input("search region is empty".into()))?;
    if r0 <= 0.0 {
        return Err(MppError::Input("search region has no interior".into()));
    }
    let diameter = region_diameter(r1, &tol)?;
    let min_radius = tol.radius * diameter;

    let mut notes = Vec::new();
    let mut effective = config.resolution.clone();
    let mut aux = Vec::new();
    let mut equivalent_cost = None;
    match &config.resolution {
        Resolution::Lex(costs) => {
            for d in costs {
                if d.len() != lp.recovery.n_orig() {
                    return Err(MppError::Input(format!("auxiliary cost has {} entries, expected {}", d.len(), lp.recovery.n_orig())));
                }
                aux.push(lp.auxiliary_from_original(d));
            }
        }
        Resolution::EqCost => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            match equivalent_cost_vector(lp, &c0, config.eq_bound, &mut rng, &tol) {
                Ok(ec) => {
                    notes.push(format!("equivalent cost vector accepted after {} attempt(s)", ec.attempts));
                    equivalent_cost = Some(ec.d.clone());
                    aux.push(ec.d);
                }
                Err(MppError::EquivalentCostFailure) => {
                    notes.push("equivalent cost vector not found; fell back to qp".into());
                    effective = Resolution::Qp;
                }
                Err(e) => return Err(e),
            }
        }
        _ => {}
    }
    let qp_obj = match (&effective, config.qp_norm) {
        (Resolution::Qp, QpNorm::Original) => Some(QpObjective::original_norm(lp)),
        (Resolution::Qp, QpNorm::Standard) => Some(QpObjective::standard_norm(lp)),
        _ => None,
    };
    let ctx = Context { lp, tol, resolution: effective.clone(), aux, qp_obj, min_radius, directions: probe_directions(lp.q(), REPROBES) };

    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(config.workers).build().map_err(|e| MppError::Solver(format!("thread pool: {e}")))?;

    let mut regions = Vec::new();
    let mut infeasible = Vec::new();
    let mut unresolved = Vec::new();
    let mut pops = 0usize;
    let mut wave = vec![remove_redundant(r1, &tol)?];
    while !wave.is_empty() {
        let room = tol.max_pops.saturating_sub(pops);
        if room == 0 {
            notes.push(format!("pop cap {} reached", tol.max_pops));
            unresolved.append(&mut wave);
            break;
        }
        let rest = if wave.len() > room { wave.split_off(room) } else { Vec::new() };
        pops += wave.len();
        let outcomes: Vec<Outcome> = pool.install(|| wave.par_iter().map(|r| ctx.process(r)).collect());
        let mut next = Vec::new();
        for (r, out) in wave.into_iter().zip(outcomes) {
            match out {
                Outcome::Region(mut cr, children) => {
                    cr.id = regions.len();
                    regions.push(*cr);
                    next.extend(children);
                }
                Outcome::Infeasible => infeasible.push(r),
                Outcome::Unresolved(why) => {
                    notes.push(format!("unresolved region: {why}"));
                    unresolved.push(r);
                }
                Outcome::Thin => {}
            }
        }
        next.extend(rest);
        wave = next;
    }
    Ok(Partition {
        fingerprint: fingerprint(lp),
        regions,
        infeasible,
        unresolved,
        config: config.clone(),
        effective_resolution: effective,
        equivalent_cost,
        pops,
        notes,
    })
}

/// Largest distance between two points of a bounded polyhedron, estimated
/// from the extent along each axis.
fn region_diameter(r: &HPolyhedron, tol: &Tolerances) -> Result<f64, MppError> {
    use crate::lp_engine::simplex::{solve_inequality, SimplexOptions, SimplexStatus};
    let q = r.dim();
    let opts = SimplexOptions { max_iter: tol.max_iter, tol_feas: tol.feas, tol_dual: tol.dual };
    let mut sq = 0.0;
    for k in 0..q {
        let mut ext = [0.0; 2];
        for (s, sign) in [1.0, -1.0].iter().enumerate() {
            let mut cost = vec![0.0; q];
            cost[k] = -*sign;
            let (st, u) = solve_inequality(&cost, &r.m, &r.t, &opts)?;
            if st != SimplexStatus::Optimal {
                return Err(MppError::Input("search region must be bounded".into()));
            }
            ext[s] = u[k];
        }
        sq += (ext[0] - ext[1]).powi(2);
    }
    Ok(sq.sqrt())
}

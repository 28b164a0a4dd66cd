//! Flux-balance models: JSON loading, Michaelis–Menten uptake bounds,
//! conversion to a parametric LP and interpretation of partitions as
//! metabolic modes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::face_geometry::{chebyshev_center_region, HPolyhedron};
use crate::lp_engine::{to_standard_form, ColumnKind, GeneralLP, LpError, ParamLink, ParamRow, Sense, StandardFormLP, VarBound};
use crate::mpp_core::{fingerprint, Partition};
use crate::sparse_linalg::SparseMatrix;
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbaError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("duplicate {kind} id '{id}'")]
    Duplicate { kind: &'static str, id: String },
    #[error("unknown {kind} id '{id}' in {context}")]
    Unknown { kind: &'static str, id: String, context: String },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("partition was built for a different problem (hash {found}, model hash {expected})")]
    FingerprintMismatch { expected: String, found: String },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Parametric lower bound `v ≥ −θ[index]·vmax`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBound {
    pub index: usize,
    pub vmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub id: String,
    #[serde(default)]
    pub reversible: bool,
    #[serde(default)]
    pub lb: Option<f64>,
    #[serde(default)]
    pub ub: Option<f64>,
    #[serde(default)]
    pub param: Option<ParamBound>,
}

/// On-disk model layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub metabolites: Vec<String>,
    pub reactions: Vec<Reaction>,
    pub stoich: Vec<(String, String, f64)>,
    pub objective: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetabolicModel {
    pub metabolites: Vec<String>,
    pub reactions: Vec<Reaction>,
    /// `m′ × n′` stoichiometric matrix.
    pub stoich: SparseMatrix,
    pub objective: usize,
    /// Number of distinct parameters.
    pub q: usize,
}

impl MetabolicModel {
    pub fn n_metabolites(&self) -> usize {
        self.metabolites.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn reaction_index(&self, id: &str) -> Option<usize> {
        self.reactions.iter().position(|r| r.id == id)
    }

    /// Effective lower bound at `theta`, `None` when unbounded below.
    pub fn lower_bound(&self, j: usize, theta: &[f64]) -> Option<f64> {
        let r = &self.reactions[j];
        match r.param {
            Some(p) => Some(r.lb.unwrap_or(0.0) - theta[p.index] * p.vmax),
            None if r.reversible => r.lb,
            None => Some(r.lb.unwrap_or(0.0)),
        }
    }
}

pub fn load_model(path: &Path) -> Result<MetabolicModel, FbaError> {
    let text = std::fs::read_to_string(path).map_err(|e| FbaError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<MetabolicModel, FbaError> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| FbaError::Parse { line: e.line(), column: e.column(), msg: e.to_string() })?;
    build_model(file)
}

pub fn build_model(file: ModelFile) -> Result<MetabolicModel, FbaError> {
    let mut met_ix = HashMap::new();
    for (i, m) in file.metabolites.iter().enumerate() {
        if met_ix.insert(m.as_str(), i).is_some() {
            return Err(FbaError::Duplicate { kind: "metabolite", id: m.clone() });
        }
    }
    let mut rxn_ix = HashMap::new();
    for (j, r) in file.reactions.iter().enumerate() {
        if rxn_ix.insert(r.id.as_str(), j).is_some() {
            return Err(FbaError::Duplicate { kind: "reaction", id: r.id.clone() });
        }
    }
    let mut seen = HashSet::new();
    let mut trip = Vec::new();
    for (met, rxn, coeff) in &file.stoich {
        let i =
            *met_ix.get(met.as_str()).ok_or_else(|| FbaError::Unknown { kind: "metabolite", id: met.clone(), context: "stoich".into() })?;
        let j =
            *rxn_ix.get(rxn.as_str()).ok_or_else(|| FbaError::Unknown { kind: "reaction", id: rxn.clone(), context: "stoich".into() })?;
        if !seen.insert((i, j)) {
            return Err(FbaError::Invalid(format!("stoich entry ({met}, {rxn}) given twice")));
        }
        if !coeff.is_finite() {
            return Err(FbaError::Invalid(format!("stoich entry ({met}, {rxn}) is not finite")));
        }
        trip.push((i, j, *coeff));
    }
    let objective = *rxn_ix.get(file.objective.as_str()).ok_or_else(|| FbaError::Unknown {
        kind: "reaction",
        id: file.objective.clone(),
        context: "objective".into(),
    })?;

    let mut params = BTreeMap::new();
    for r in &file.reactions {
        if let (Some(l), Some(u)) = (r.lb, r.ub) {
            if l > u {
                return Err(FbaError::Invalid(format!("reaction {} has lb > ub", r.id)));
            }
        }
        if !r.reversible && r.lb.is_some_and(|l| l < 0.0) {
            return Err(FbaError::Invalid(format!("irreversible reaction {} has a negative lower bound", r.id)));
        }
        if let Some(p) = r.param {
            if !r.reversible {
                return Err(FbaError::Invalid(format!("parametric bound on irreversible reaction {}", r.id)));
            }
            if !(p.vmax > 0.0) {
                return Err(FbaError::Invalid(format!("reaction {} has non-positive vmax", r.id)));
            }
            params.entry(p.index).or_insert_with(Vec::new).push(r.id.clone());
        }
    }
    let q = params.len();
    if params.keys().copied().ne(0..q) {
        return Err(FbaError::Invalid(format!(
            "parameter indices must be 0..{q} without gaps, found {:?}",
            params.keys().collect::<Vec<_>>()
        )));
    }
    let stoich =
        SparseMatrix::from_triplets(file.metabolites.len(), file.reactions.len(), &trip).map_err(|e| FbaError::Invalid(e.to_string()))?;
    Ok(MetabolicModel { metabolites: file.metabolites, reactions: file.reactions, stoich, objective, q })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams {
    pub vmax: f64,
    pub km: f64,
    pub c: f64,
}

/// Maximum uptake `−vmax·C/(Km + C)`; uptake is negative.
pub fn michaelis_menten_lb(k: KineticParams) -> Result<f64, FbaError> {
    if !(k.vmax > 0.0) || !(k.km > 0.0) {
        return Err(FbaError::Domain(format!("vmax = {} and Km = {} must be positive", k.vmax, k.km)));
    }
    if !(k.c >= 0.0) {
        return Err(FbaError::Domain(format!("concentration {} is negative", k.c)));
    }
    Ok(-k.vmax * k.c / (k.km + k.c))
}

/// Scaled parameter value `θ = −lb/vmax` for a Michaelis–Menten bound.
pub fn scaled_uptake(k: KineticParams) -> Result<f64, FbaError> {
    Ok(-michaelis_menten_lb(k)? / k.vmax)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub index: usize,
    pub reactions: Vec<String>,
    pub vmax: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Legend {
    pub parameters: Vec<LegendEntry>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
}

/// Maximizes the objective flux subject to `Sv = 0` and the reaction bounds.
pub fn to_general_lp(model: &MetabolicModel) -> GeneralLP {
    let n = model.n_reactions();
    let q = model.q;
    let dense = model.stoich.to_dense();
    let eq = (0..model.n_metabolites()).map(|i| ParamRow { a: (0..n).map(|j| dense[(i, j)]).collect(), w: 0.0, f: vec![0.0; q] }).collect();
    let mut bounds = Vec::new();
    for (j, r) in model.reactions.iter().enumerate() {
        let lo = match (r.param, r.reversible) {
            (Some(_), _) => r.lb,
            (None, true) => r.lb,
            (None, false) => Some(r.lb.unwrap_or(0.0)),
        };
        let lo_param = r.param.map(|p| ParamLink { index: p.index, scale: -p.vmax });
        if lo.is_some() || r.ub.is_some() || lo_param.is_some() {
            bounds.push(VarBound { var: j, lo, hi: r.ub, lo_param });
        }
    }
    let mut c = vec![0.0; n];
    c[model.objective] = 1.0;
    GeneralLP { sense: Sense::Max, c, ineq: vec![], eq, bounds, q }
}

pub fn to_parametric_lp(model: &MetabolicModel) -> Result<(StandardFormLP, Legend), FbaError> {
    let lp = to_standard_form(&to_general_lp(model))?;
    let mut parameters: Vec<LegendEntry> = (0..model.q).map(|index| LegendEntry { index, reactions: vec![], vmax: vec![] }).collect();
    for r in &model.reactions {
        if let Some(p) = r.param {
            parameters[p.index].reactions.push(r.id.clone());
            parameters[p.index].vmax.push(p.vmax);
        }
    }
    let legend = Legend { parameters, box_lo: vec![0.0; model.q], box_hi: vec![1.0; model.q] };
    Ok((lp, legend))
}

/// Activity of one reaction inside a mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActiveReaction {
    pub id: String,
    /// +1 forward, −1 backward (uptake for exchanges).
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub key: String,
    pub regions: Vec<usize>,
    pub active: Vec<ActiveReaction>,
    pub never_active: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAdjacency {
    pub a: usize,
    pub b: usize,
    /// Reactions whose activity or direction differs between the two modes.
    pub changed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub problem_hash: String,
    pub modes: Vec<Mode>,
    pub adjacency: Vec<ModeAdjacency>,
}

/// Standard columns that carry the flux of each reaction.
fn reaction_columns(lp: &StandardFormLP, n_reactions: usize) -> Vec<Vec<usize>> {
    let mut cols = vec![Vec::new(); n_reactions];
    for (k, c) in lp.columns.iter().enumerate() {
        if let ColumnKind::Structural { var, .. } = *c {
            cols[var].push(k);
        }
    }
    cols
}

/// Groups the regions of `p` into metabolic modes.
///
/// A reaction is never active in a region when all of its columns lie in the
/// region's optimal active set and its flux at the probe is zero, so a
/// reaction pinned at a non-zero bound is not mistaken for an idle one.
pub fn metabolic_modes(p: &Partition, model: &MetabolicModel, legend: &Legend) -> Result<ModeReport, FbaError> {
    let (lp, _) = to_parametric_lp(model)?;
    let expected = fingerprint(&lp);
    if expected != p.fingerprint {
        return Err(FbaError::FingerprintMismatch { expected, found: p.fingerprint.clone() });
    }
    if legend.parameters.len() != model.q {
        return Err(FbaError::Invalid(format!("legend lists {} parameters, model has {}", legend.parameters.len(), model.q)));
    }
    let tol = Tolerances::default();
    let n = model.n_reactions();
    let cols = reaction_columns(&lp, n);

    struct Pattern {
        key: String,
        active: Vec<ActiveReaction>,
        never: Vec<String>,
    }
    let mut per_region = Vec::new();
    for cr in &p.regions {
        let v = cr.primal_original(&lp, &cr.probe);
        let tz = tol.zero_for(&lp.rhs(&cr.probe)) * 10.0;
        let astar: HashSet<usize> = cr.optimal_active_set.iter().copied().collect();
        let mut active = Vec::new();
        let mut never = Vec::new();
        let mut never_ix = Vec::new();
        let mut signs = Vec::new();
        for j in 0..n {
            if v[j].abs() > tz {
                let sign = if v[j] > 0.0 { 1 } else { -1 };
                active.push(ActiveReaction { id: model.reactions[j].id.clone(), sign });
                if model.reactions[j].reversible {
                    signs.push(format!("{}{}", j, if sign > 0 { '+' } else { '-' }));
                }
            } else if !cols[j].is_empty() && cols[j].iter().all(|c| astar.contains(c)) {
                never.push(model.reactions[j].id.clone());
                never_ix.push(j.to_string());
            }
        }
        let key = format!("{}|{}", never_ix.join(","), signs.join(","));
        per_region.push(Pattern { key, active, never });
    }

    let mut order: Vec<String> = Vec::new();
    let mut modes: Vec<Mode> = Vec::new();
    let mut mode_of = vec![0usize; p.regions.len()];
    for (k, pat) in per_region.iter().enumerate() {
        let idx = match order.iter().position(|s| *s == pat.key) {
            Some(i) => i,
            None => {
                order.push(pat.key.clone());
                modes.push(Mode { key: pat.key.clone(), regions: vec![], active: pat.active.clone(), never_active: pat.never.clone() });
                order.len() - 1
            }
        };
        modes[idx].regions.push(p.regions[k].id);
        mode_of[k] = idx;
    }

    let mut pairs = BTreeMap::new();
    for i in 0..p.regions.len() {
        for k in i + 1..p.regions.len() {
            let (a, b) = (mode_of[i].min(mode_of[k]), mode_of[i].max(mode_of[k]));
            if a == b || pairs.contains_key(&(a, b)) {
                continue;
            }
            if share_facet(&p.regions[i].region, &p.regions[k].region, &tol) {
                pairs.insert((a, b), changed_reactions(&modes[a], &modes[b]));
            }
        }
    }
    let adjacency = pairs.into_iter().map(|((a, b), changed)| ModeAdjacency { a, b, changed }).collect();
    Ok(ModeReport { problem_hash: p.fingerprint.clone(), modes, adjacency })
}

fn changed_reactions(a: &Mode, b: &Mode) -> Vec<String> {
    let sa: HashMap<&str, i8> = a.active.iter().map(|r| (r.id.as_str(), r.sign)).collect();
    let sb: HashMap<&str, i8> = b.active.iter().map(|r| (r.id.as_str(), r.sign)).collect();
    let mut out: Vec<String> = sa.keys().chain(sb.keys()).filter(|id| sa.get(*id) != sb.get(*id)).map(|s| s.to_string()).collect();
    out.sort();
    out.dedup();
    out
}

/// Two regions share a facet when a row of one is the reverse of a row of
/// the other and a thin slab around that hyperplane still holds a ball of
/// nearly the slab's half-width inside both.
pub fn share_facet(a: &HPolyhedron, b: &HPolyhedron, tol: &Tolerances) -> bool {
    let an = a.normalized();
    let bn = b.normalized();
    let eps = 1e-6;
    for i in 0..an.n_rows() {
        let row = an.row(i);
        let Some(k) = (0..bn.n_rows()).find(|&k| {
            let r = bn.row(k);
            r.iter().zip(&row).all(|(x, y)| (x + y).abs() < 1e-7) && (bn.t[k] + an.t[i]).abs() < 1e-7
        }) else {
            continue;
        };
        let mut slab = HPolyhedron::whole(an.dim());
        for (poly, skip) in [(&an, i), (&bn, k)] {
            for r in 0..poly.n_rows() {
                if r != skip {
                    slab.push_row(&poly.row(r), poly.t[r]);
                }
            }
        }
        slab.push_row(&row, an.t[i] + eps);
        slab.push_row(&row.iter().map(|v| -v).collect::<Vec<_>>(), -an.t[i] + eps);
        if let Ok(Some((_, r))) = chebyshev_center_region(&slab, tol) {
            if r >= 0.9 * eps {
                return true;
            }
        }
    }
    false
}

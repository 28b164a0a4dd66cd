//! JSON layouts for problem input and partition output.

use std::collections::BTreeMap;

use mplp::face_geometry::HPolyhedron;
use mplp::lp_engine::{GeneralLP, ParamRow, Sense, StandardFormLP, VarBound};
use mplp::mpp_core::{CriticalRegion, Partition, Resolution};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Sparse matrix as `[row, col, value]` entries plus its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplets {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Triplets { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// General-LP input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpFile {
    pub sense: Sense,
    pub c: Vec<f64>,
    #[serde(default)]
    pub ineq: Vec<ParamRow>,
    #[serde(default)]
    pub eq: Vec<ParamRow>,
    #[serde(default)]
    pub bounds: Vec<VarBound>,
    #[serde(rename = "box", default)]
    pub param_box: Option<BoxSpec>,
    /// Parameter count; inferred from the box or the rows when absent.
    #[serde(default)]
    pub q: Option<usize>,
}

impl LpFile {
    pub fn parameter_count(&self) -> usize {
        if let Some(q) = self.q {
            return q;
        }
        if let Some(b) = &self.param_box {
            return b.lo.len();
        }
        let rows = self.ineq.iter().chain(&self.eq).map(|r| r.f.len());
        let links = self.bounds.iter().filter_map(|b| b.lo_param.map(|p| p.index + 1));
        rows.chain(links).max().unwrap_or(0)
    }

    pub fn to_general(&self) -> GeneralLP {
        let q = self.parameter_count();
        let pad = |rows: &[ParamRow]| -> Vec<ParamRow> {
            rows.iter()
                .map(|r| {
                    let mut r = r.clone();
                    if r.f.is_empty() {
                        r.f = vec![0.0; q];
                    }
                    r
                })
                .collect()
        };
        GeneralLP { sense: self.sense, c: self.c.clone(), ineq: pad(&self.ineq), eq: pad(&self.eq), bounds: self.bounds.clone(), q }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSpec {
    #[serde(rename = "M")]
    pub m: Triplets,
    pub t: Vec<f64>,
}

impl HSpec {
    pub fn from_poly(p: &HPolyhedron) -> Self {
        HSpec { m: Triplets::from_dense(&p.m), t: p.t.clone() }
    }

    pub fn to_poly(&self) -> HPolyhedron {
        HPolyhedron::new(self.m.to_dense(), self.t.clone())
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        self.to_poly().contains(theta, tol)
    }
}

/// `y = Eθ + e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    #[serde(rename = "E")]
    pub e_mat: Triplets,
    pub e: Vec<f64>,
}

impl MapSpec {
    pub fn from_parts(e_mat: &DMatrix<f64>, e: &[f64]) -> Self {
        MapSpec { e_mat: Triplets::from_dense(e_mat), e: e.to_vec() }
    }

    pub fn eval(&self, theta: &[f64]) -> Vec<f64> {
        let mut y = self.e.clone();
        for &(i, j, v) in &self.e_mat.entries {
            y[i] += v * theta[j];
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSpec {
    /// Particular row duals `λ_p(θ)`.
    pub lambda_p: MapSpec,
    /// Dimension of the row-dual null space.
    #[serde(rename = "Z_cols")]
    pub z_cols: usize,
    /// Bound duals with the null-space part at zero.
    pub mu: MapSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub id: usize,
    pub mode_key: String,
    pub case: String,
    #[serde(rename = "H")]
    pub h: HSpec,
    /// Map of the original decision variables.
    pub primal_map: MapSpec,
    /// Original objective as `gᵀθ + g0`.
    pub objective_map: MapSpec,
    pub dual: DualSpec,
    pub zero_set: Vec<usize>,
    pub never_active: Vec<String>,
    pub probe: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSpec {
    pub input_kind: String,
    pub resolution: Resolution,
    pub effective_resolution: String,
    pub seed: u64,
    #[serde(rename = "box")]
    pub param_box: BoxSpec,
    pub tol_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub problem_hash: String,
    pub config: ConfigSpec,
    pub q: usize,
    pub variables: usize,
    pub regions: Vec<RegionSpec>,
    pub infeasible: Vec<HSpec>,
    pub unresolved: Vec<HSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<mplp::fba_adapter::ModeReport>,
}

/// Affine map of `f` sampled at 0 and the unit vectors (exact for affine `f`).
fn affine_of(q: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let zero = vec![0.0; q];
    let e = f(&zero);
    let mut e_mat = DMatrix::zeros(e.len(), q);
    for k in 0..q {
        let mut th = zero.clone();
        th[k] = 1.0;
        let y = f(&th);
        for i in 0..e.len() {
            e_mat[(i, k)] = y[i] - e[i];
        }
    }
    (e_mat, e)
}

pub fn region_spec(lp: &StandardFormLP, cr: &CriticalRegion, never_active: Vec<String>) -> RegionSpec {
    let q = lp.q();
    // The recovery map is affine, so composing it with the primal map stays affine.
    let x_std = &cr.solution.x;
    let primal =
        MapSpec::from_parts(&(lp.recovery.r.to_dense() * &x_std.e_mat + &lp.recovery.r_theta), &lp.recovery.apply(&x_std.e, &vec![0.0; q]));
    let (g, g0) = affine_of(q, |th| vec![cr.objective(lp, th)]);
    RegionSpec {
        id: cr.id,
        mode_key: cr.mode_key.clone(),
        case: cr.case.as_str().to_string(),
        h: HSpec::from_poly(&cr.region),
        primal_map: primal,
        objective_map: MapSpec::from_parts(&g, &g0),
        dual: DualSpec {
            lambda_p: MapSpec::from_parts(&cr.solution.lambda_p.e_mat, &cr.solution.lambda_p.e),
            z_cols: cr.solution.z.ncols(),
            mu: MapSpec::from_parts(&cr.solution.mu.e_mat, &cr.solution.mu.e),
        },
        zero_set: cr.zero_set.clone(),
        never_active,
        probe: cr.probe.clone(),
    }
}

pub fn partition_file(
    lp: &StandardFormLP,
    p: &Partition,
    config: ConfigSpec,
    never_active: &BTreeMap<usize, Vec<String>>,
    modes: Option<mplp::fba_adapter::ModeReport>,
) -> PartitionFile {
    let regions = p
        .regions
        .iter()
        .map(|cr| {
            let na = never_active.get(&cr.id).cloned().unwrap_or_else(|| cr.optimal_active_set.iter().map(|i| i.to_string()).collect());
            region_spec(lp, cr, na)
        })
        .collect();
    PartitionFile {
        problem_hash: p.fingerprint.clone(),
        config,
        q: lp.q(),
        variables: lp.recovery.n_orig(),
        regions,
        infeasible: p.infeasible.iter().map(HSpec::from_poly).collect(),
        unresolved: p.unresolved.iter().map(HSpec::from_poly).collect(),
        modes,
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn read_partition(text: &str) -> Result<PartitionFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("partition file, line {} column {}: {e}", e.line(), e.column())))
}

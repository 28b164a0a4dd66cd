//! Library side of the `mplp` command: configuration, file formats and the
//! three subcommands.

pub mod format;
pub mod polygon;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mplp::face_geometry::HPolyhedron;
use mplp::fba_adapter::{load_model, metabolic_modes, to_parametric_lp};
use mplp::lp_engine::to_standard_form;
use mplp::mpp_core::{partition, PartitionConfig, Resolution};
use mplp::Tolerances;
use serde::Serialize;
use thiserror::Error;

use format::{read_partition, to_json, BoxSpec, ConfigSpec, LpFile, PartitionFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("degenerate parameter box")]
    DegenerateBox,
    #[error("plot data requires two parameters")]
    NotPlanar,
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    GeneralLp,
    FbaModel,
}

impl InputKind {
    pub fn name(&self) -> &'static str {
        match self {
            InputKind::GeneralLp => "general-lp-json",
            InputKind::FbaModel => "fba-model-json",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub kind: InputKind,
    /// Overrides the box given by the input.
    pub param_box: Option<BoxSpec>,
    pub resolution: Resolution,
    pub seed: u64,
    pub tol_zero: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

/// Result of a partition run: the file written and whether the box is fully covered.
pub struct PartitionRun {
    pub file: PartitionFile,
    pub json: String,
    pub complete: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn check_box(b: &BoxSpec, q: usize) -> Result<(), CliError> {
    if b.lo.len() != q || b.hi.len() != q {
        return Err(CliError::Input(format!("parameter box has {} / {} bounds, problem has {q} parameters", b.lo.len(), b.hi.len())));
    }
    if b.lo.iter().chain(&b.hi).any(|v| !v.is_finite()) {
        return Err(CliError::Input("parameter box must be finite".into()));
    }
    if b.lo.iter().zip(&b.hi).any(|(l, h)| !(l < h)) {
        return Err(CliError::DegenerateBox);
    }
    Ok(())
}

pub fn cmd_partition(cfg: &RunConfig) -> Result<PartitionRun, CliError> {
    let text = read(&cfg.input)?;
    let mut tol = Tolerances::default();
    if let Some(z) = cfg.tol_zero {
        if !(z > 0.0) {
            return Err(CliError::Input("--tol-zero must be positive".into()));
        }
        tol.zero = z;
    }
    let (lp, input_box, model) = match cfg.kind {
        InputKind::GeneralLp => {
            let file: LpFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}, line {} column {}: {e}", cfg.input.display(), e.line(), e.column())))?;
            let lp = to_standard_form(&file.to_general()).map_err(|e| CliError::Input(e.to_string()))?;
            (lp, file.param_box.clone(), None)
        }
        InputKind::FbaModel => {
            let model = load_model(&cfg.input).map_err(|e| CliError::Input(e.to_string()))?;
            let (lp, legend) = to_parametric_lp(&model).map_err(|e| CliError::Input(e.to_string()))?;
            let b = BoxSpec { lo: legend.box_lo.clone(), hi: legend.box_hi.clone() };
            (lp, Some(b), Some((model, legend)))
        }
    };
    let q = lp.q();
    let param_box = cfg
        .param_box
        .clone()
        .or(input_box)
        .ok_or_else(|| CliError::Input("no parameter box: pass --box or add \"box\" to the input".into()))?;
    check_box(&param_box, q)?;

    let pcfg = PartitionConfig { resolution: cfg.resolution.clone(), seed: cfg.seed, tol, workers: cfg.workers, ..Default::default() };
    let r1 = HPolyhedron::from_box(&param_box.lo, &param_box.hi);
    let p = partition(&lp, &r1, &pcfg).map_err(|e| CliError::Solver(e.to_string()))?;

    let mut never = BTreeMap::new();
    let mut report = None;
    if let Some((model, legend)) = &model {
        let rep = metabolic_modes(&p, model, legend).map_err(|e| CliError::Solver(e.to_string()))?;
        for m in &rep.modes {
            for &id in &m.regions {
                never.insert(id, m.never_active.clone());
            }
        }
        report = Some(rep);
    }
    let config = ConfigSpec {
        input_kind: cfg.kind.name().to_string(),
        resolution: cfg.resolution.clone(),
        effective_resolution: p.effective_resolution.name().to_string(),
        seed: cfg.seed,
        param_box,
        tol_zero: tol.zero,
    };
    let file = format::partition_file(&lp, &p, config, &never, report);
    let json = to_json(&file)?;
    if let Some(out) = &cfg.out {
        std::fs::write(out, &json).map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(PartitionRun { complete: p.is_complete(), file, json })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalHit {
    pub region: usize,
    pub mode_key: String,
    pub x: Vec<f64>,
    pub objective: f64,
    pub lambda_p: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub theta: Vec<f64>,
    pub covered: bool,
    pub hits: Vec<EvalHit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest: Option<usize>,
    /// Largest normalized row violation of the nearest region.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

pub fn parse_theta(s: &str) -> Result<Vec<f64>, CliError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Input(format!("malformed parameter vector '{s}'"))),
    }
}

pub fn eval_partition(file: &PartitionFile, theta: &[f64]) -> Result<EvalReport, CliError> {
    if theta.len() != file.q {
        return Err(CliError::Input(format!("θ has {} entries, the partition has {} parameters", theta.len(), file.q)));
    }
    let hits: Vec<EvalHit> = file
        .regions
        .iter()
        .filter(|r| r.h.contains(theta, 1e-9))
        .map(|r| EvalHit {
            region: r.id,
            mode_key: r.mode_key.clone(),
            x: r.primal_map.eval(theta),
            objective: r.objective_map.eval(theta)[0],
            lambda_p: r.dual.lambda_p.eval(theta),
            mu: r.dual.mu.eval(theta),
        })
        .collect();
    let mut rep = EvalReport { theta: theta.to_vec(), covered: !hits.is_empty(), hits, infeasible: None, nearest: None, distance: None };
    if !rep.covered {
        if file.infeasible.iter().any(|h| h.contains(theta, 1e-9)) {
            rep.infeasible = Some(true);
        } else {
            let best = file.regions.iter().map(|r| (r.id, r.h.to_poly().normalized().violation(theta))).min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((id, d)) = best {
                rep.nearest = Some(id);
                rep.distance = Some(d);
            }
        }
    }
    Ok(rep)
}

pub fn cmd_eval(partition_path: &Path, theta: &str) -> Result<String, CliError> {
    let theta = parse_theta(theta)?;
    let file = read_partition(&read(partition_path)?)?;
    to_json(&eval_partition(&file, &theta)?)
}

fn push_polygon(out: &mut String, id: &str, key: &str, h: &HPolyhedron) {
    let v = polygon::polygon(h);
    let _ = write!(out, "{id} {}", if key.is_empty() { "-" } else { key });
    // Round-off below 1e-12 is noise for plotting; this also folds −0 into 0.
    let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    for p in v {
        let _ = write!(out, " {} {}", clean(p[0]), clean(p[1]));
    }
    out.push('\n');
}

/// One line per polygon: `id mode_key x1 y1 x2 y2 ...`, counterclockwise.
/// Infeasible and unresolved pieces use ids `infeasible-k` / `unresolved-k`.
pub fn plot_data(file: &PartitionFile) -> Result<String, CliError> {
    if file.q != 2 {
        return Err(CliError::NotPlanar);
    }
    let mut out = String::new();
    for r in &file.regions {
        push_polygon(&mut out, &r.id.to_string(), &r.mode_key, &r.h.to_poly());
    }
    for (k, h) in file.infeasible.iter().enumerate() {
        push_polygon(&mut out, &format!("infeasible-{k}"), "infeasible", &h.to_poly());
    }
    for (k, h) in file.unresolved.iter().enumerate() {
        push_polygon(&mut out, &format!("unresolved-{k}"), "unresolved", &h.to_poly());
    }
    Ok(out)
}

pub fn cmd_plot_data(partition_path: &Path) -> Result<String, CliError> {
    plot_data(&read_partition(&read(partition_path)?)?)
}

/// `lo1,lo2:hi1,hi2`.
pub fn parse_box(s: &str) -> Result<BoxSpec, CliError> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| CliError::Input(format!("box '{s}' must look like lo1,lo2:hi1,hi2")))?;
    let lo = parse_theta(lo)?;
    let hi = parse_theta(hi)?;
    if lo.len() != hi.len() {
        return Err(CliError::Input("box bounds differ in length".into()));
    }
    Ok(BoxSpec { lo, hi })
}

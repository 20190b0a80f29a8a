//! Report files: one JSON document per command, embedding the fully
//! resolved input so a report is a self-contained, re-runnable record, plus
//! plot-ready CSV side files for the sampled quantities. Nothing
//! time-dependent is written; identical resolved inputs produce identical
//! bytes.

use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::formats::{ComplexPair, InputDoc};
use toricpot_core::disklift::{CycleClassification, LiftVerdict};
use toricpot_core::ghflow::Trajectory;
use toricpot_core::potential::{Chain, CritClass, CritPoint, CritRun, FamilyCluster, FiberCertificate};

#[derive(Serialize)]
pub struct Report<R: Serialize> {
    pub command: String,
    pub input: InputDoc,
    pub results: R,
}

pub fn write_report<R: Serialize>(
    out_dir: &Path,
    name: &str,
    report: &Report<R>,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(report).expect("report serialization is total");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

pub fn pairs(zs: &[Complex64]) -> Vec<ComplexPair> {
    zs.iter().map(|&z| pair(z)).collect()
}

pub fn class_name(c: &CritClass) -> String {
    match c {
        CritClass::Nondegenerate => "nondegenerate".into(),
        CritClass::Degenerate { kernel_dim } => format!("degenerate(kernel {kernel_dim})"),
        CritClass::TotallyDegenerate => "totally-degenerate".into(),
    }
}

#[derive(Serialize)]
pub struct TermOut {
    pub exponent: Vec<i64>,
    pub coefficient: String,
    pub t_power: String,
}

#[derive(Serialize)]
pub struct BuildResults {
    pub dim: usize,
    pub lambda: Option<String>,
    pub term_count: usize,
    pub terms: Vec<TermOut>,
}

#[derive(Serialize)]
pub struct PointOut {
    pub y: Vec<ComplexPair>,
    pub class: String,
    pub scaled_residual: f64,
    pub val_proxy: Vec<f64>,
    pub basin_certified: bool,
}

impl PointOut {
    pub fn from_point(p: &CritPoint) -> Self {
        PointOut {
            y: pairs(&p.y),
            class: class_name(&p.class),
            scaled_residual: p.scaled_residual,
            val_proxy: p.val_proxy.clone(),
            basin_certified: p.basin_certified,
        }
    }
}

#[derive(Serialize)]
pub struct RunOut {
    pub t: f64,
    pub attempted: usize,
    pub converged: usize,
    pub rejected: usize,
    pub points: Vec<PointOut>,
}

impl RunOut {
    pub fn from_run(r: &CritRun) -> Self {
        RunOut {
            t: r.t,
            attempted: r.attempted,
            converged: r.converged,
            rejected: r.rejected,
            points: r.points.iter().map(PointOut::from_point).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct ChainOut {
    pub members: Vec<(usize, usize)>,
    pub valuations: Vec<f64>,
    pub r_squared: Vec<f64>,
    pub interior_slack: f64,
    pub class: String,
}

impl ChainOut {
    pub fn from_chain(c: &Chain) -> Self {
        ChainOut {
            members: c.members.clone(),
            valuations: c.valuations.clone(),
            r_squared: c.r_squared.clone(),
            interior_slack: c.interior_slack,
            class: class_name(&c.class),
        }
    }
}

#[derive(Serialize)]
pub struct FamilyOut {
    pub tangent: Vec<ComplexPair>,
    pub members_per_run: Vec<usize>,
    pub confirmed: bool,
}

impl FamilyOut {
    pub fn from_cluster(f: &FamilyCluster) -> Self {
        FamilyOut {
            tangent: pairs(&f.tangent),
            members_per_run: f.members_per_run.clone(),
            confirmed: f.confirmed,
        }
    }
}

#[derive(Serialize)]
pub struct EvidenceOut {
    pub t: f64,
    pub scaled_residual: f64,
    pub det_ratio: f64,
    pub sv_ratio: f64,
}

#[derive(Serialize)]
pub struct CertificateOut {
    pub valuations: Vec<f64>,
    pub r_squared: Vec<f64>,
    pub interior_slack: f64,
    pub label: String,
    pub small_resolution_hypothesis: bool,
    pub fresh_residual: f64,
    pub evidence: Vec<EvidenceOut>,
}

impl CertificateOut {
    pub fn from_cert(c: &FiberCertificate) -> Self {
        CertificateOut {
            valuations: c.valuations.clone(),
            r_squared: c.r_squared.clone(),
            interior_slack: c.interior_slack,
            label: c.label.to_string(),
            small_resolution_hypothesis: c.small_resolution_hypothesis,
            fresh_residual: c.fresh_residual,
            evidence: c
                .evidence
                .iter()
                .map(|e| EvidenceOut {
                    t: e.t,
                    scaled_residual: e.scaled_residual,
                    det_ratio: e.det_ratio,
                    sv_ratio: e.sv_ratio,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct CritResults {
    pub runs: Vec<RunOut>,
    pub chains: Vec<ChainOut>,
    pub families: Vec<FamilyOut>,
    pub certificates: Vec<CertificateOut>,
}

#[derive(Serialize)]
pub struct FamilyVerdictOut {
    pub index: usize,
    pub exact: bool,
    pub worst_sampled_residual: Option<f64>,
    pub samples: usize,
    pub tolerance: f64,
}

#[derive(Serialize)]
pub struct FamilyResults {
    pub families: Vec<FamilyVerdictOut>,
    pub all_verified: bool,
}

#[derive(Serialize)]
pub struct VerticesResults {
    pub dim: usize,
    pub count: usize,
    pub vertices: Vec<Vec<String>>,
}

#[derive(Serialize)]
pub struct FacetOut {
    pub normal: Vec<String>,
    pub offset: String,
}

#[derive(Serialize)]
pub struct GcResults {
    pub n: usize,
    pub parity: String,
    /// Coordinate labels "level:index" in polytope order.
    pub coordinates: Vec<String>,
    pub facets: Vec<FacetOut>,
    pub vertices: Vec<Vec<String>>,
    /// For rank-one top rows: exact vertex-set equality with the torus
    /// moment polytope of the degeneration.
    pub equals_moment_polytope: Option<bool>,
}

#[derive(Serialize)]
pub struct ContainsVerdict {
    pub point: Vec<String>,
    pub inside: bool,
    pub strictly_inside: bool,
    pub min_scaled_slack: f64,
}

#[derive(Serialize)]
pub struct ContainsResults {
    pub points: Vec<ContainsVerdict>,
}

#[derive(Serialize)]
pub struct GcValuesPointOut {
    pub index: usize,
    /// Torus moment readings ν₂ … ν_{n−1} (ν₂ signed).
    pub nu: Vec<f64>,
    /// Eigenvalue readings λ₁⁽²⁾ … λ₁⁽ⁿ⁻¹⁾ (first slot the signed ν₂).
    pub lambda1: Vec<f64>,
    /// Minimum scaled slack of the eigenvalue tuple in the pattern
    /// polytope; nonnegative within tolerance means membership.
    pub min_scaled_slack: f64,
    pub inside_pattern_polytope: bool,
}

#[derive(Serialize)]
pub struct GcValuesResults {
    pub n: usize,
    pub lambda: f64,
    pub points: Vec<GcValuesPointOut>,
    pub csv: String,
}

#[derive(Serialize)]
pub struct SegreImageOut {
    pub image: Vec<ComplexPair>,
    /// |Σ xᵢ²| relative to ‖x‖² — zero means the image lies on the quadric.
    pub quadric_residual: f64,
    pub involution_fixed: bool,
}

#[derive(Serialize)]
pub struct SegreResults {
    pub images: Vec<SegreImageOut>,
}

#[derive(Serialize)]
pub struct TrajectoryOut {
    pub start: Vec<ComplexPair>,
    pub outcome: String,
    pub steps: usize,
    pub s_end: f64,
    pub f_end: ComplexPair,
    /// max |Im f − Im f(start)| over the logged samples.
    pub im_f_drift: f64,
    pub csv: Option<String>,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct FlowResults {
    pub trajectories: Vec<TrajectoryOut>,
}

#[derive(Serialize)]
pub struct DiskVerdictOut {
    pub meets: String,
    pub beta: i64,
    pub multiplicities: std::collections::BTreeMap<String, i64>,
    pub maslov: i64,
    pub verdict: String,
    pub certificate: Option<i64>,
}

pub fn verdict_name(v: &LiftVerdict) -> (String, Option<i64>) {
    match v {
        LiftVerdict::LiftableSmooth => ("liftable-smooth".into(), None),
        LiftVerdict::LiftableAfterSmoothing => ("liftable-after-smoothing".into(), None),
        LiftVerdict::Obstructed { certificate } => ("obstructed".into(), Some(*certificate)),
    }
}

#[derive(Serialize)]
pub struct ConfigurationOut {
    pub chain: Vec<String>,
    pub attachment: String,
}

#[derive(Serialize)]
pub struct RejectedOut {
    pub chain: Vec<String>,
    pub attachment: String,
    pub pairing: i64,
}

#[derive(Serialize)]
pub struct ClassificationOut {
    pub smooth_anchors: Vec<String>,
    pub configurations: Vec<ConfigurationOut>,
    pub rejected: Vec<RejectedOut>,
}

impl ClassificationOut {
    pub fn from_classification(c: &CycleClassification) -> Self {
        ClassificationOut {
            smooth_anchors: c.smooth_anchors.clone(),
            configurations: c
                .configurations
                .iter()
                .map(|cfg| ConfigurationOut {
                    chain: cfg.chain.clone(),
                    attachment: cfg.attachment.clone(),
                })
                .collect(),
            rejected: c
                .rejected
                .iter()
                .map(|(cfg, p)| RejectedOut {
                    chain: cfg.chain.clone(),
                    attachment: cfg.attachment.clone(),
                    pairing: *p,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct DisksResults {
    pub verdicts: Vec<DiskVerdictOut>,
    pub classification: Option<ClassificationOut>,
}

/// Writes the per-point pattern/torus readings side file:
/// point id, ν₂…ν_{n−1}, λ₁⁽²⁾…λ₁⁽ⁿ⁻¹⁾, membership flag.
pub fn write_gc_values_csv(
    out_dir: &Path,
    name: &str,
    n: usize,
    rows: &[GcValuesPointOut],
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{name}.csv"));
    let mut file = std::fs::File::create(&path)?;
    let mut header = String::from("point");
    for k in 2..n {
        header.push_str(&format!(",nu{k}"));
    }
    for k in 2..n {
        header.push_str(&format!(",lambda1_{k}"));
    }
    header.push_str(",inside");
    writeln!(file, "{header}")?;
    for row in rows {
        let mut line = row.index.to_string();
        for v in &row.nu {
            line.push_str(&format!(",{v}"));
        }
        for v in &row.lambda1 {
            line.push_str(&format!(",{v}"));
        }
        line.push_str(if row.inside_pattern_polytope { ",1" } else { ",0" });
        writeln!(file, "{line}")?;
    }
    Ok(path)
}

/// Writes one trajectory CSV: s, chart coordinates, Re f, Im f, and the
/// field magnitude |V| = 1/|∇Re f|.
pub fn write_trajectory_csv(
    out_dir: &Path,
    name: &str,
    trajectory: &Trajectory,
    stride: usize,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{name}.csv"));
    let mut file = std::fs::File::create(&path)?;
    writeln!(
        file,
        "s,re_x1,im_x1,re_x2,im_x2,re_x3,im_x3,re_f,im_f,v_norm"
    )?;
    let stride = stride.max(1);
    let last = trajectory.samples.len().saturating_sub(1);
    for (i, s) in trajectory.samples.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let v_norm = if s.grad_norm > 0.0 { 1.0 / s.grad_norm } else { f64::INFINITY };
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{},{}",
            s.s,
            s.x[0].re,
            s.x[0].im,
            s.x[1].re,
            s.x[1].im,
            s.x[2].re,
            s.x[2].im,
            s.f.re,
            s.f.im,
            v_norm
        )?;
    }
    Ok(path)
}

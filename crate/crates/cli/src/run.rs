//! Command dispatch: reads an input document, applies command-line
//! overrides, runs the requested computation, and writes the report (plus
//! CSV side files). Exit codes: 0 success, 2 validation failure, 3 solver
//! non-convergence.

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use std::path::PathBuf;
use thiserror::Error;

use crate::formats::{rational_string, InputDoc, InputError, Kind, Overrides};
use crate::report::{
    pair, pairs, verdict_name, write_gc_values_csv, write_report, write_trajectory_csv,
    BuildResults, CertificateOut, ChainOut, ClassificationOut, ContainsResults, ContainsVerdict,
    CritResults, DiskVerdictOut, DisksResults, FacetOut, FamilyOut, FamilyResults,
    FamilyVerdictOut, FlowResults, GcResults, GcValuesPointOut, GcValuesResults, Report, RunOut,
    SegreImageOut, SegreResults, TermOut, TrajectoryOut, VerticesResults,
};
use toricpot_core::disklift::{classify_cycle, liftable, maslov, DiskError};
use toricpot_core::ghflow::{integrate, ChartPoint, FlowConfig, StopReason};
use toricpot_core::polytope::{gc_equals_moment_polytope, gc_polytope, GroupParity};
use toricpot_core::potential::{
    analyze, certify, verify_family_exact, verify_family_sampled, PotentialFunction,
};
use toricpot_core::quadric::{
    involution, lambda1, moment_nu, projectively_equal, segre, ProjPoint,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("io failure: {e}"))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    PotentialBuild,
    PotentialCrit,
    PotentialFamily,
    PolytopeVertices,
    PolytopeGc,
    PolytopeContains,
    QuadricGcValues,
    QuadricSegre,
    FlowRun,
    DisksClassify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PotentialBuild => "potential build",
            Command::PotentialCrit => "potential crit",
            Command::PotentialFamily => "potential family",
            Command::PolytopeVertices => "polytope vertices",
            Command::PolytopeGc => "polytope gc",
            Command::PolytopeContains => "polytope contains",
            Command::QuadricGcValues => "quadric gc-values",
            Command::QuadricSegre => "quadric segre",
            Command::FlowRun => "flow run",
            Command::DisksClassify => "disks classify",
        }
    }

    /// Base name for the report file (and CSV side files).
    pub fn stem(&self) -> &'static str {
        match self {
            Command::PotentialBuild => "build",
            Command::PotentialCrit => "crit",
            Command::PotentialFamily => "family",
            Command::PolytopeVertices => "vertices",
            Command::PolytopeGc => "gc",
            Command::PolytopeContains => "contains",
            Command::QuadricGcValues => "gc_values",
            Command::QuadricSegre => "segre",
            Command::FlowRun => "flow",
            Command::DisksClassify => "disks",
        }
    }

    fn kind(&self) -> Kind {
        match self {
            Command::PotentialBuild | Command::PotentialCrit | Command::PotentialFamily => {
                Kind::Potential
            }
            Command::PolytopeVertices | Command::PolytopeContains => Kind::Potential,
            Command::PolytopeGc => Kind::Gc,
            Command::QuadricGcValues | Command::QuadricSegre => Kind::Quadric,
            Command::FlowRun => Kind::Flow,
            Command::DisksClassify => Kind::Disks,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub overrides: Overrides,
}

pub struct Outcome {
    pub report_path: PathBuf,
    pub summary: String,
}

/// Executes one invocation end to end.
pub fn execute(inv: &Invocation) -> Result<Outcome, CliError> {
    let doc = InputDoc::from_path(&inv.input)?.resolve(&inv.overrides)?;
    if doc.kind != inv.command.kind() {
        return Err(invalid(format!(
            "field kind: \"{}\" document given to `{}` (expected kind \"{}\")",
            doc.kind,
            inv.command.name(),
            inv.command.kind()
        )));
    }
    doc.require_section()?;
    match inv.command {
        Command::PotentialBuild => potential_build(inv, doc),
        Command::PotentialCrit => potential_crit(inv, doc),
        Command::PotentialFamily => potential_family(inv, doc),
        Command::PolytopeVertices => polytope_vertices(inv, doc),
        Command::PolytopeGc => polytope_gc(inv, doc),
        Command::PolytopeContains => polytope_contains(inv, doc),
        Command::QuadricGcValues => quadric_gc_values(inv, doc),
        Command::QuadricSegre => quadric_segre(inv, doc),
        Command::FlowRun => flow_run(inv, doc),
        Command::DisksClassify => disks_classify(inv, doc),
    }
}

/// Runs an invocation, reporting to stdout/stderr, and returns the exit code.
pub fn run(inv: &Invocation) -> i32 {
    match execute(inv) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            println!("report: {}", outcome.report_path.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn finish<R: serde::Serialize>(
    inv: &Invocation,
    doc: InputDoc,
    results: R,
    summary: String,
) -> Result<Outcome, CliError> {
    let report = Report {
        command: inv.command.name().to_string(),
        input: doc,
        results,
    };
    let report_path = write_report(&inv.out_dir, inv.command.stem(), &report)?;
    Ok(Outcome { report_path, summary })
}

fn potential_build(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.polytope.as_ref().expect("section checked");
    let system = spec.build()?;
    let w = PotentialFunction::from_polytope(&system)
        .map_err(|e| invalid(format!("field polytope: {e}")))?;
    let terms: Vec<TermOut> = w
        .terms()
        .iter()
        .map(|t| TermOut {
            exponent: t.exponent.clone(),
            coefficient: format!("{}", t.coeff),
            t_power: rational_string(&t.t_power),
        })
        .collect();
    let results = BuildResults {
        dim: w.dim(),
        lambda: system.lambda.as_ref().map(rational_string),
        term_count: terms.len(),
        terms,
    };
    let summary = format!(
        "potential over a {}-dimensional polytope: {} terms",
        results.dim, results.term_count
    );
    finish(inv, doc, results, summary)
}

fn potential_crit(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.polytope.as_ref().expect("section checked");
    let system = spec.build()?;
    let w = PotentialFunction::from_polytope(&system)
        .map_err(|e| invalid(format!("field polytope: {e}")))?;
    let opts = doc.solver.options()?;
    let analysis = analyze(&w, &system, &doc.solver.t_samples, &opts)
        .map_err(|e| invalid(format!("field solver: {e}")))?;
    if analysis.runs.iter().all(|r| r.points.is_empty()) {
        return Err(CliError::Solver(
            "no critical points converged at any t sample".into(),
        ));
    }
    let certificates = certify(&analysis, &w, &system, &opts)
        .map_err(|e| invalid(format!("certification: {e}")))?;
    let results = CritResults {
        runs: analysis.runs.iter().map(RunOut::from_run).collect(),
        chains: analysis.chains.iter().map(ChainOut::from_chain).collect(),
        families: analysis.families.iter().map(FamilyOut::from_cluster).collect(),
        certificates: certificates.iter().map(CertificateOut::from_cert).collect(),
    };
    let nondeg = results
        .runs
        .first()
        .map(|r| r.points.iter().filter(|p| p.class == "nondegenerate").count())
        .unwrap_or(0);
    let confirmed = results.families.iter().filter(|f| f.confirmed).count();
    let summary = format!(
        "{} nondegenerate points at t={}, {} confirmed families, {} certificates",
        nondeg,
        results.runs.first().map(|r| r.t).unwrap_or(f64::NAN),
        confirmed,
        results.certificates.len()
    );
    finish(inv, doc, results, summary)
}

fn potential_family(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.polytope.as_ref().expect("section checked");
    let system = spec.build()?;
    let w = PotentialFunction::from_polytope(&system)
        .map_err(|e| invalid(format!("field polytope: {e}")))?;
    let family_specs = doc
        .families
        .as_ref()
        .filter(|f| !f.is_empty())
        .ok_or_else(|| invalid("field families: at least one family is required"))?;
    let mut out = Vec::new();
    let mut all = true;
    for (i, fam) in family_specs.iter().enumerate() {
        let components = fam.build(i)?;
        let exact = verify_family_exact(&w, &components)
            .map_err(|e| invalid(format!("field families[{i}]: {e}")))?;
        // Sample with an unreachable tolerance so the worst residual comes
        // back for the report; the verdict compares it here.
        let mut worst: f64 = 0.0;
        for &t in &doc.solver.t_samples {
            worst = worst.max(
                verify_family_sampled(&w, &components, t, fam.samples, f64::INFINITY, doc.solver.seed)
                    .map_err(|e| invalid(format!("field families[{i}]: {e}")))?,
            );
        }
        let ok = exact && worst <= fam.tolerance;
        all &= ok;
        out.push(FamilyVerdictOut {
            index: i,
            exact,
            worst_sampled_residual: Some(worst),
            samples: fam.samples,
            tolerance: fam.tolerance,
        });
    }
    let results = FamilyResults { families: out, all_verified: all };
    let summary = format!(
        "{}/{} families verified",
        results.families.iter().filter(|f| f.exact).count(),
        results.families.len()
    );
    finish(inv, doc, results, summary)
}

fn polytope_vertices(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.polytope.as_ref().expect("section checked");
    let system = spec.build()?;
    let results = VerticesResults {
        dim: system.dim(),
        count: system.vertices().len(),
        vertices: system
            .vertices()
            .iter()
            .map(|v| v.iter().map(rational_string).collect())
            .collect(),
    };
    let summary = format!("{} vertices in dimension {}", results.count, results.dim);
    finish(inv, doc, results, summary)
}

fn polytope_gc(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.gc.as_ref().expect("section checked");
    let top = spec.top_row_rationals()?;
    let (pattern, system) = gc_polytope(spec.n, &top)
        .map_err(|e| invalid(format!("field gc: {e}")))?;
    // The coincidence statement applies to rank-one top rows with positive
    // leading entry.
    let rank_one = top.first().map(|l| l.is_positive()).unwrap_or(false)
        && top.iter().skip(1).all(|x| x.is_zero());
    let equals = if rank_one && spec.n >= 4 {
        Some(
            gc_equals_moment_polytope(spec.n, &top[0])
                .map_err(|e| invalid(format!("field gc: {e}")))?,
        )
    } else {
        None
    };
    let results = GcResults {
        n: spec.n,
        parity: match pattern.parity {
            GroupParity::TypeB => "B".into(),
            GroupParity::TypeD => "D".into(),
        },
        coordinates: pattern
            .coordinates
            .iter()
            .map(|c| format!("{}:{}", c.level, c.index))
            .collect(),
        facets: system
            .facets()
            .iter()
            .map(|f| FacetOut {
                normal: f.normal.iter().map(|v| v.to_string()).collect(),
                offset: rational_string(&f.offset),
            })
            .collect(),
        vertices: system
            .vertices()
            .iter()
            .map(|v| v.iter().map(rational_string).collect())
            .collect(),
        equals_moment_polytope: equals,
    };
    let summary = format!(
        "pattern polytope for n={}: {} coordinates, {} vertices{}",
        spec.n,
        results.coordinates.len(),
        results.vertices.len(),
        match results.equals_moment_polytope {
            Some(true) => ", equals the torus moment polytope",
            Some(false) => ", DIFFERS from the torus moment polytope",
            None => "",
        }
    );
    finish(inv, doc, results, summary)
}

fn polytope_contains(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.polytope.as_ref().expect("section checked");
    let system = spec.build()?;
    let point_specs = doc
        .points
        .as_ref()
        .filter(|p| !p.is_empty())
        .ok_or_else(|| invalid("field points: at least one query point is required"))?;
    let mut out = Vec::new();
    for (i, p) in point_specs.iter().enumerate() {
        if p.len() != system.dim() {
            return Err(invalid(format!(
                "field points[{i}]: expected {} coordinates, got {}",
                system.dim(),
                p.len()
            )));
        }
        let coords: Result<Vec<_>, _> = p
            .iter()
            .enumerate()
            .map(|(j, s)| crate::formats::parse_rational(s, &format!("points[{i}][{j}]")))
            .collect();
        let coords = coords?;
        let floats: Vec<f64> = coords.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();
        out.push(ContainsVerdict {
            point: p.clone(),
            inside: system.contains(&coords, false),
            strictly_inside: system.contains(&coords, true),
            min_scaled_slack: system.min_scaled_slack(&floats),
        });
    }
    let inside = out.iter().filter(|v| v.inside).count();
    let results = ContainsResults { points: out };
    let summary = format!("{inside}/{} points inside", results.points.len());
    finish(inv, doc, results, summary)
}

fn complex(p: crate::formats::ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn quadric_gc_values(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.quadric.as_ref().expect("section checked");
    if spec.points.is_empty() {
        return Err(invalid("field quadric.points: at least one point is required"));
    }
    if spec.n < 4 {
        return Err(invalid("field quadric.n: need n >= 4"));
    }
    // Exact pattern polytope for membership checks, scale from the λ float
    // (fixtures use integral λ; a non-rational float is rejected).
    let lambda_rational = num_rational::BigRational::from_float(spec.lambda)
        .ok_or_else(|| invalid("field quadric.lambda: must be finite"))?;
    let mut top = vec![num_rational::BigRational::zero(); spec.n / 2];
    top[0] = lambda_rational;
    let (_, pattern_polytope) =
        gc_polytope(spec.n, &top).map_err(|e| invalid(format!("field quadric: {e}")))?;
    let mut rows = Vec::new();
    for (i, coords) in spec.points.iter().enumerate() {
        if coords.len() != spec.n {
            return Err(invalid(format!(
                "field quadric.points[{i}]: expected {} coordinates, got {}",
                spec.n,
                coords.len()
            )));
        }
        let p = ProjPoint::new(coords.iter().map(|&c| complex(c)).collect(), spec.lambda)
            .map_err(|e| invalid(format!("field quadric.points[{i}]: {e}")))?;
        let nu = moment_nu(&p);
        let mut l1 = vec![nu[0]];
        for k in 3..spec.n {
            l1.push(
                lambda1(&p, k)
                    .map_err(|e| invalid(format!("field quadric.points[{i}]: {e}")))?,
            );
        }
        let slack = pattern_polytope.min_scaled_slack(&l1);
        rows.push(GcValuesPointOut {
            index: i,
            nu,
            lambda1: l1,
            min_scaled_slack: slack,
            inside_pattern_polytope: slack > -1e-9,
        });
    }
    let csv_path = write_gc_values_csv(&inv.out_dir, inv.command.stem(), spec.n, &rows)?;
    let inside = rows.iter().filter(|r| r.inside_pattern_polytope).count();
    let results = GcValuesResults {
        n: spec.n,
        lambda: spec.lambda,
        points: rows,
        csv: csv_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let summary = format!(
        "{inside}/{} points inside the pattern polytope; values in {}",
        results.points.len(),
        results.csv
    );
    finish(inv, doc, results, summary)
}

fn quadric_segre(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.quadric.as_ref().expect("section checked");
    if spec.segre_pairs.is_empty() {
        return Err(invalid("field quadric.segre_pairs: at least one pair is required"));
    }
    let mut images = Vec::new();
    for (i, sp) in spec.segre_pairs.iter().enumerate() {
        let z = [complex(sp.z[0]), complex(sp.z[1])];
        let w = [complex(sp.w[0]), complex(sp.w[1])];
        let image = segre(&z, &w)
            .map_err(|e| invalid(format!("field quadric.segre_pairs[{i}]: {e}")))?;
        let norm2: f64 = image.coords().iter().map(|x| x.norm_sqr()).sum();
        let residual = image
            .coords()
            .iter()
            .map(|x| x * x)
            .sum::<Complex64>()
            .norm()
            / norm2;
        let fixed = involution(&image)
            .map(|conj| projectively_equal(&image, &conj, 1e-10))
            .unwrap_or(false);
        images.push(SegreImageOut {
            image: pairs(image.coords()),
            quadric_residual: residual,
            involution_fixed: fixed,
        });
    }
    let fixed = images.iter().filter(|i| i.involution_fixed).count();
    let results = SegreResults { images };
    let summary = format!(
        "{} images on the quadric, {fixed} fixed by the real involution",
        results.images.len()
    );
    finish(inv, doc, results, summary)
}

fn flow_run(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.flow.as_ref().expect("section checked");
    if spec.starts.is_empty() {
        return Err(invalid("field flow.starts: at least one start point is required"));
    }
    if !spec.lambda.is_finite() || spec.lambda <= 0.0 {
        return Err(invalid("field flow.lambda: must be positive and finite"));
    }
    if !spec.duration.is_finite() {
        return Err(invalid("field flow.duration: must be finite"));
    }
    let mut cfg = FlowConfig { lambda: spec.lambda, ..FlowConfig::default() };
    if let Some(rk) = spec.rk_tol {
        if !rk.is_finite() || rk <= 0.0 {
            return Err(invalid("field flow.rk_tol: must be positive"));
        }
        cfg.rk_tol = rk;
    }
    if let Some(g) = spec.guard {
        if !g.is_finite() || g <= 0.0 {
            return Err(invalid("field flow.guard: must be positive"));
        }
        cfg.guard = g;
    }
    let mut out = Vec::new();
    let mut failures = 0usize;
    for (i, start) in spec.starts.iter().enumerate() {
        let p0 = ChartPoint::new([complex(start[0]), complex(start[1]), complex(start[2])]);
        match integrate(&p0, spec.duration, &cfg) {
            Ok(traj) => {
                let csv = write_trajectory_csv(
                    &inv.out_dir,
                    &format!("{}_{i}", inv.command.stem()),
                    &traj,
                    spec.csv_stride,
                )?;
                let im0 = traj.samples[0].f.im;
                let drift = traj
                    .samples
                    .iter()
                    .map(|s| (s.f.im - im0).abs())
                    .fold(0.0, f64::max);
                let end = traj.endpoint();
                out.push(TrajectoryOut {
                    start: start.iter().map(|&c| pair(complex(c))).collect(),
                    outcome: match traj.stop {
                        StopReason::DurationReached => "duration-reached".into(),
                        StopReason::SingularFiberGuard => "singular-fiber-guard".into(),
                        StopReason::ChartHorizon => "chart-horizon".into(),
                    },
                    steps: traj.samples.len() - 1,
                    s_end: end.s,
                    f_end: pair(end.f),
                    im_f_drift: drift,
                    csv: csv
                        .file_name()
                        .map(|s| s.to_string_lossy().into_owned()),
                    error: None,
                });
            }
            Err(e) => {
                failures += 1;
                out.push(TrajectoryOut {
                    start: start.iter().map(|&c| pair(complex(c))).collect(),
                    outcome: "error".into(),
                    steps: 0,
                    s_end: 0.0,
                    f_end: [f64::NAN, f64::NAN],
                    im_f_drift: f64::NAN,
                    csv: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    if failures == spec.starts.len() {
        return Err(CliError::Solver("every trajectory failed".into()));
    }
    let results = FlowResults { trajectories: out };
    let summary = format!(
        "{}/{} trajectories integrated",
        results.trajectories.len() - failures,
        results.trajectories.len()
    );
    finish(inv, doc, results, summary)
}

fn disks_classify(inv: &Invocation, doc: InputDoc) -> Result<Outcome, CliError> {
    let spec = doc.disks.as_ref().expect("section checked");
    let boundary = spec.boundary()?;
    let mut verdicts = Vec::new();
    for class_spec in &spec.classes {
        let class = spec.class(&boundary, class_spec)?;
        let mu = maslov(&class, &boundary)
            .map_err(|e| invalid(format!("field disks.classes: {e}")))?;
        let (verdict, certificate) = match liftable(&class, &boundary) {
            Ok(v) => verdict_name(&v),
            Err(DiskError::NotSingleCurveFixture) => ("cycle-classification-applies".into(), None),
            Err(DiskError::CriterionNotEstablished(_)) => ("criterion-not-established".into(), None),
            Err(e) => return Err(invalid(format!("field disks.classes: {e}"))),
        };
        verdicts.push(DiskVerdictOut {
            meets: class_spec.meets.clone(),
            beta: class_spec.beta,
            multiplicities: class_spec.multiplicities.clone(),
            maslov: mu,
            verdict,
            certificate,
        });
    }
    let classification = if spec.anchors.is_empty() {
        None
    } else {
        match classify_cycle(&boundary, &spec.anchors) {
            Ok(c) => Some(ClassificationOut::from_classification(&c)),
            Err(DiskError::CriterionNotEstablished(msg)) => {
                return Err(invalid(format!(
                    "field disks.anchors: criterion not established: {msg}"
                )))
            }
            Err(e) => return Err(invalid(format!("field disks.anchors: {e}"))),
        }
    };
    let summary = match &classification {
        Some(c) => format!(
            "{} verdicts, {} singular configurations",
            verdicts.len(),
            c.configurations.len()
        ),
        None => format!("{} verdicts", verdicts.len()),
    };
    let results = DisksResults { verdicts, classification };
    finish(inv, doc, results, summary)
}

//! Input documents: a single human-writable TOML schema (JSON accepted for
//! machine round-trips) describing one problem instance plus solver
//! configuration. Every rational quantity travels as a "p/q" string so
//! exponents and offsets survive serialization exactly; floating-point is
//! reserved for genuinely numeric knobs (t samples, tolerances, flow data).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

use toricpot_core::disklift::{BoundaryCurve, DiskClass, SurfaceBoundary};
use toricpot_core::novikov::GaussianRational;
use toricpot_core::polytope::{Facet, FacetSystem};
use toricpot_core::potential::{FamilyComponent, SolverOptions};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse input: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
}

fn validation(msg: impl Into<String>) -> InputError {
    InputError::Validation(msg.into())
}

/// Parses "p", "-p", or "p/q" into an exact rational.
pub fn parse_rational(s: &str, field: &str) -> Result<BigRational, InputError> {
    let parse_int = |txt: &str| -> Result<BigInt, InputError> {
        BigInt::from_str(txt.trim())
            .map_err(|_| validation(format!("field {field}: {txt:?} is not an integer")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d.is_zero() {
                return Err(validation(format!("field {field}: zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse_int(num)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub fn rational_string(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Potential,
    Gc,
    Quadric,
    Flow,
    Disks,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Kind::Potential => "potential",
            Kind::Gc => "gc",
            Kind::Quadric => "quadric",
            Kind::Flow => "flow",
            Kind::Disks => "disks",
        };
        write!(f, "{name}")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetSpec {
    pub normal: Vec<i64>,
    /// Literal rational offset τ in ℓ(u) = ⟨normal, u⟩ − τ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<String>,
    /// Offset given as a rational multiple of the polytope scale λ; lets a
    /// single fixture serve every λ via the --lambda flag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_scale: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub dim: usize,
    /// Scale parameter λ as "p/q"; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    /// Asserted hypothesis flag, echoed into certificates; never derived.
    #[serde(default)]
    pub small_resolution: bool,
    pub facets: Vec<FacetSpec>,
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<FacetSystem, InputError> {
        let lambda = match &self.lambda {
            Some(s) => parse_rational(s, "polytope.lambda")?,
            None => BigRational::from_integer(BigInt::from(1)),
        };
        if !lambda.is_positive() {
            return Err(validation("field polytope.lambda: must be positive"));
        }
        if self.facets.is_empty() {
            return Err(validation("field polytope.facets: at least one facet is required"));
        }
        let mut facets = Vec::with_capacity(self.facets.len());
        for (i, f) in self.facets.iter().enumerate() {
            let offset = match (&f.offset, &f.offset_scale) {
                (Some(lit), None) => parse_rational(lit, &format!("facets[{i}].offset"))?,
                (None, Some(sc)) => {
                    parse_rational(sc, &format!("facets[{i}].offset_scale"))? * &lambda
                }
                (Some(_), Some(_)) => {
                    return Err(validation(format!(
                        "facets[{i}]: offset and offset_scale are mutually exclusive"
                    )))
                }
                (None, None) => {
                    return Err(validation(format!(
                        "facets[{i}]: one of offset or offset_scale is required"
                    )))
                }
            };
            facets.push(Facet::new(
                f.normal.iter().map(|&v| BigInt::from(v)).collect(),
                offset,
            ));
        }
        let system = FacetSystem::new(self.dim, facets, Some(lambda))
            .map_err(|e| validation(format!("field polytope.facets: {e}")))?;
        Ok(system.with_small_resolution(self.small_resolution))
    }

    /// Replaces the scale parameter; only legal when every offset is given
    /// relative to it, otherwise the offsets could not follow.
    pub fn rescale(&mut self, lambda: &str) -> Result<(), InputError> {
        if self.facets.iter().any(|f| f.offset.is_some()) {
            return Err(validation(
                "--lambda cannot rescale a polytope with literal facet offsets; \
                 use offset_scale entries",
            ));
        }
        parse_rational(lambda, "--lambda")?;
        self.lambda = Some(lambda.to_string());
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyComponentSpec {
    pub coeff_re: String,
    #[serde(default)]
    pub coeff_im: Option<String>,
    pub s_power: i64,
    pub t_power: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub components: Vec<FamilyComponentSpec>,
    /// Sample count for the numerical spot check.
    #[serde(default = "default_family_samples")]
    pub samples: usize,
    /// Residual tolerance for the spot check.
    #[serde(default = "default_family_tol")]
    pub tolerance: f64,
}

fn default_family_samples() -> usize {
    50
}

fn default_family_tol() -> f64 {
    1e-10
}

impl FamilySpec {
    pub fn build(&self, index: usize) -> Result<Vec<FamilyComponent>, InputError> {
        self.components
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let field = format!("families[{index}].components[{j}]");
                let re = parse_rational(&c.coeff_re, &format!("{field}.coeff_re"))?;
                let im = match &c.coeff_im {
                    Some(s) => parse_rational(s, &format!("{field}.coeff_im"))?,
                    None => BigRational::zero(),
                };
                let t_power = parse_rational(&c.t_power, &format!("{field}.t_power"))?;
                if t_power.is_negative() {
                    return Err(validation(format!("{field}.t_power: must be nonnegative")));
                }
                Ok(FamilyComponent {
                    coeff: GaussianRational::new(re, im),
                    s_power: c.s_power,
                    t_power,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcSpec {
    pub n: usize,
    /// Scale parameter λ as "p/q".
    pub lambda: String,
    /// Full top row (length n/2); defaults to (λ, 0, …, 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_row: Option<Vec<String>>,
}

impl GcSpec {
    pub fn lambda_rational(&self) -> Result<BigRational, InputError> {
        parse_rational(&self.lambda, "gc.lambda")
    }

    pub fn top_row_rationals(&self) -> Result<Vec<BigRational>, InputError> {
        match &self.top_row {
            Some(rows) => rows
                .iter()
                .enumerate()
                .map(|(i, s)| parse_rational(s, &format!("gc.top_row[{i}]")))
                .collect(),
            None => {
                if self.n < 3 {
                    return Err(validation("field gc.n: need n >= 3"));
                }
                let mut top = vec![BigRational::zero(); self.n / 2];
                top[0] = self.lambda_rational()?;
                Ok(top)
            }
        }
    }
}

/// One complex number as [re, im].
pub type ComplexPair = [f64; 2];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegrePairSpec {
    pub z: [ComplexPair; 2],
    pub w: [ComplexPair; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadricSpec {
    pub n: usize,
    #[serde(default = "default_scale")]
    pub lambda: f64,
    /// Homogeneous coordinate vectors, each of length n.
    #[serde(default)]
    pub points: Vec<Vec<ComplexPair>>,
    /// Pairs for the doubled-line embedding.
    #[serde(default)]
    pub segre_pairs: Vec<SegrePairSpec>,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    #[serde(default = "default_scale")]
    pub lambda: f64,
    /// Signed flow duration in pencil-clock units.
    pub duration: f64,
    /// Chart start points, three [re, im] coordinates each.
    pub starts: Vec<[ComplexPair; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rk_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<f64>,
    #[serde(default = "default_stride")]
    pub csv_stride: usize,
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub id: String,
    pub self_int: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    #[serde(default = "default_beta")]
    pub beta: i64,
    /// Id of the single boundary curve the base disk meets once.
    pub meets: String,
    /// Sphere multiplicities keyed by curve id; absent curves carry zero.
    #[serde(default)]
    pub multiplicities: BTreeMap<String, i64>,
}

fn default_beta() -> i64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisksSpec {
    pub curves: Vec<CurveSpec>,
    /// Attachment curves for cycle classification.
    #[serde(default)]
    pub anchors: Vec<String>,
    /// Classes for individual lift verdicts.
    #[serde(default)]
    pub classes: Vec<ClassSpec>,
}

impl DisksSpec {
    pub fn boundary(&self) -> Result<SurfaceBoundary, InputError> {
        SurfaceBoundary::new(
            self.curves
                .iter()
                .map(|c| BoundaryCurve::new(&c.id, c.self_int))
                .collect(),
        )
        .map_err(|e| validation(format!("field disks.curves: {e}")))
    }

    pub fn class(&self, boundary: &SurfaceBoundary, spec: &ClassSpec) -> Result<DiskClass, InputError> {
        let mut class = DiskClass::anchored(boundary, &spec.meets)
            .map_err(|e| validation(format!("field disks.classes.meets: {e}")))?;
        class.beta = spec.beta;
        for (id, &k) in &spec.multiplicities {
            class = class
                .with_multiplicity(boundary, id, k)
                .map_err(|e| validation(format!("field disks.classes.multiplicities: {e}")))?;
        }
        Ok(class)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_dedup")]
    pub dedup_tol: f64,
    #[serde(default = "default_span")]
    pub span: f64,
    #[serde(default = "default_t_samples")]
    pub t_samples: Vec<f64>,
}

fn default_seed() -> u64 {
    SolverOptions::default().seed
}
fn default_starts() -> usize {
    SolverOptions::default().starts
}
fn default_max_iter() -> usize {
    SolverOptions::default().max_iter
}
fn default_tolerance() -> f64 {
    SolverOptions::default().tol
}
fn default_dedup() -> f64 {
    SolverOptions::default().dedup_tol
}
fn default_span() -> f64 {
    SolverOptions::default().span
}
fn default_t_samples() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            seed: default_seed(),
            starts: default_starts(),
            max_iter: default_max_iter(),
            tolerance: default_tolerance(),
            dedup_tol: default_dedup(),
            span: default_span(),
            t_samples: default_t_samples(),
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> Result<SolverOptions, InputError> {
        if self.starts == 0 {
            return Err(validation("field solver.starts: must be positive"));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(validation("field solver.tolerance: must be positive"));
        }
        if self.t_samples.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(validation("field solver.t_samples: entries must lie in (0, 1)"));
        }
        Ok(SolverOptions {
            starts: self.starts,
            seed: self.seed,
            max_iter: self.max_iter,
            tol: self.tolerance,
            dedup_tol: self.dedup_tol,
            span: self.span,
        })
    }
}

/// Command-line overrides; every present value wins over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub tolerance: Option<f64>,
    pub t_samples: Option<Vec<f64>>,
    pub lambda: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gc: Option<GcSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadric: Option<QuadricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disks: Option<DisksSpec>,
    /// Claimed critical families to verify against the potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<FamilySpec>>,
    /// Rational query points for containment checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub solver: SolverSpec,
}

impl InputDoc {
    pub fn from_path(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        if is_json {
            serde_json::from_str(&text).map_err(|e| InputError::Parse(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| InputError::Parse(e.to_string()))
        }
    }

    /// Applies command-line overrides, producing the fully-resolved document
    /// that reports embed. Resolution is idempotent: re-reading an embedded
    /// document with no overrides reproduces it exactly.
    pub fn resolve(mut self, ov: &Overrides) -> Result<Self, InputError> {
        if let Some(seed) = ov.seed {
            self.solver.seed = seed;
        }
        if let Some(starts) = ov.starts {
            self.solver.starts = starts;
        }
        if let Some(tol) = ov.tolerance {
            self.solver.tolerance = tol;
        }
        if let Some(ts) = &ov.t_samples {
            self.solver.t_samples = ts.clone();
        }
        if let Some(lambda) = &ov.lambda {
            match (self.kind, &mut self.polytope, &mut self.gc) {
                (Kind::Potential, Some(p), _) => p.rescale(lambda)?,
                (Kind::Gc, _, Some(g)) => {
                    parse_rational(lambda, "--lambda")?;
                    g.lambda = lambda.clone();
                }
                _ => {
                    return Err(validation(
                        "--lambda applies to potential and gc documents only",
                    ))
                }
            }
        }
        Ok(self)
    }

    /// The section the document's kind requires must be present.
    pub fn require_section(&self) -> Result<(), InputError> {
        let ok = match self.kind {
            Kind::Potential => self.polytope.is_some(),
            Kind::Gc => self.gc.is_some(),
            Kind::Quadric => self.quadric.is_some(),
            Kind::Flow => self.flow.is_some(),
            Kind::Disks => self.disks.is_some(),
        };
        if ok {
            Ok(())
        } else {
            Err(validation(format!(
                "field {}: section required by kind = \"{}\" is missing",
                self.kind, self.kind
            )))
        }
    }
}

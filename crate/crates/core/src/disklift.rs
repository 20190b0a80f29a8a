//! Intersection arithmetic for lifting Maslov-index-two stable disks
//! through toric degenerations of surfaces.
//!
//! The central fiber's boundary is a cycle of rational curves with known
//! self-intersections; adjacent curves meet once, non-adjacent ones never.
//! A stable disk class is β + Σ kᵢ[Cᵢ]: a base disk β with β·β = 0 and
//! prescribed pairings against the boundary curves, plus sphere components
//! along boundary curves with multiplicities kᵢ ≥ 0. Whether such a class
//! lifts to nearby smooth fibers is decided by intersection positivity:
//! distinct holomorphic curves can never meet negatively, so a candidate
//! whose pairing with an already-lifted class is negative has no lift.
//!
//! Two boundary patterns are supported, matching the degenerations the
//! criterion is established for: a single (−2)-curve among otherwise
//! non-negative curves (the Hirzebruch surface F₂, where the verdict is the
//! sign of 1 − k), and cycles of (−1)/(−2)-curves (toric degenerations of
//! cubic surfaces, where the surviving singular configurations are the
//! connected (−2)-chains through the disk's attachment curve). Anything
//! else is reported as outside the criterion's established range.

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiskError {
    /// Boundary cycles need at least three curves.
    CycleTooShort { len: usize },
    DuplicateCurveId(String),
    UnknownCurveId(String),
    /// A pairing was requested between classes that do not carry matching
    /// intersection data.
    MissingPairingDatum(String),
    NegativeMultiplicity { index: usize },
    /// The boundary is not the single-(−2)-curve pattern the scalar
    /// criterion covers; cycle classification handles chain patterns.
    NotSingleCurveFixture,
    /// The boundary matches neither fixture pattern, so no liftability
    /// criterion is established for it.
    CriterionNotEstablished(String),
}

impl fmt::Display for DiskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiskError::CycleTooShort { len } => {
                write!(f, "boundary cycle has {len} curves, need at least 3")
            }
            DiskError::DuplicateCurveId(id) => write!(f, "duplicate curve id {id:?}"),
            DiskError::UnknownCurveId(id) => write!(f, "unknown curve id {id:?}"),
            DiskError::MissingPairingDatum(msg) => write!(f, "missing pairing datum: {msg}"),
            DiskError::NegativeMultiplicity { index } => {
                write!(f, "sphere multiplicity {index} is negative")
            }
            DiskError::NotSingleCurveFixture => {
                write!(f, "boundary is not a single-(-2)-curve pattern; classify the cycle instead")
            }
            DiskError::CriterionNotEstablished(msg) => {
                write!(f, "no liftability criterion established: {msg}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DiskError {}

/// One boundary curve: an identifier and its self-intersection number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryCurve {
    pub id: String,
    pub self_int: i64,
}

impl BoundaryCurve {
    pub fn new(id: &str, self_int: i64) -> Self {
        BoundaryCurve {
            id: id.to_string(),
            self_int,
        }
    }
}

/// The boundary cycle of the central fiber. Curve adjacency is implied by
/// the cyclic order: consecutive curves meet once, all other pairs are
/// disjoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceBoundary {
    curves: Vec<BoundaryCurve>,
}

impl SurfaceBoundary {
    pub fn new(curves: Vec<BoundaryCurve>) -> Result<Self, DiskError> {
        if curves.len() < 3 {
            return Err(DiskError::CycleTooShort { len: curves.len() });
        }
        for (i, c) in curves.iter().enumerate() {
            if curves[..i].iter().any(|d| d.id == c.id) {
                return Err(DiskError::DuplicateCurveId(c.id.clone()));
            }
        }
        Ok(SurfaceBoundary { curves })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn curves(&self) -> &[BoundaryCurve] {
        &self.curves
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.curves.iter().position(|c| c.id == id)
    }

    /// Gram entry Cᵢ·Cⱼ: the self-intersection on the diagonal, 1 for
    /// cyclically adjacent curves, 0 otherwise.
    pub fn intersection(&self, i: usize, j: usize) -> i64 {
        let n = self.curves.len();
        if i == j {
            return self.curves[i].self_int;
        }
        if (i + 1) % n == j || (j + 1) % n == i {
            1
        } else {
            0
        }
    }

    /// Ids of the (−2)-curves, in cycle order.
    pub fn minus_two_ids(&self) -> Vec<String> {
        self.curves
            .iter()
            .filter(|c| c.self_int == -2)
            .map(|c| c.id.clone())
            .collect()
    }
}

/// A stable-disk homology class b·β + Σ kᵢ[Cᵢ] over a fixed boundary:
/// `beta` copies of the base disk class (β·β = 0, β·Cᵢ prescribed by
/// `beta_pairings`) plus sphere components with multiplicities kᵢ ≥ 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiskClass {
    pub beta: i64,
    pub beta_pairings: Vec<i64>,
    pub multiplicities: Vec<i64>,
}

impl DiskClass {
    pub fn new(
        beta: i64,
        beta_pairings: Vec<i64>,
        multiplicities: Vec<i64>,
    ) -> Result<Self, DiskError> {
        if let Some(index) = multiplicities.iter().position(|&k| k < 0) {
            return Err(DiskError::NegativeMultiplicity { index });
        }
        Ok(DiskClass {
            beta,
            beta_pairings,
            multiplicities,
        })
    }

    /// The basic disk meeting exactly the named curve, once, with no sphere
    /// components.
    pub fn anchored(boundary: &SurfaceBoundary, anchor: &str) -> Result<Self, DiskError> {
        let idx = boundary
            .index_of(anchor)
            .ok_or_else(|| DiskError::UnknownCurveId(anchor.to_string()))?;
        let mut beta_pairings = vec![0; boundary.len()];
        beta_pairings[idx] = 1;
        Ok(DiskClass {
            beta: 1,
            beta_pairings,
            multiplicities: vec![0; boundary.len()],
        })
    }

    /// The same class with the named curve's sphere multiplicity set to k.
    pub fn with_multiplicity(
        mut self,
        boundary: &SurfaceBoundary,
        id: &str,
        k: i64,
    ) -> Result<Self, DiskError> {
        if k < 0 {
            return Err(DiskError::NegativeMultiplicity { index: 0 });
        }
        let idx = boundary
            .index_of(id)
            .ok_or_else(|| DiskError::UnknownCurveId(id.to_string()))?;
        self.multiplicities[idx] = k;
        Ok(self)
    }

    fn check_against(&self, boundary: &SurfaceBoundary) -> Result<(), DiskError> {
        if self.beta_pairings.len() != boundary.len() || self.multiplicities.len() != boundary.len()
        {
            return Err(DiskError::MissingPairingDatum(
                "class vectors do not match the boundary length".into(),
            ));
        }
        Ok(())
    }
}

/// Bilinear extension of the prescribed pairings:
/// (aβ + Σkᵢ Cᵢ)·(a′β + Σk′ⱼ Cⱼ) with β·β = 0, β·Cᵢ from the shared datum,
/// and Cᵢ·Cⱼ from the cycle. The two classes must carry the same β row.
pub fn pairing(a: &DiskClass, b: &DiskClass, boundary: &SurfaceBoundary) -> Result<i64, DiskError> {
    a.check_against(boundary)?;
    b.check_against(boundary)?;
    if a.beta_pairings != b.beta_pairings {
        return Err(DiskError::MissingPairingDatum(
            "the two classes prescribe different base-disk pairings".into(),
        ));
    }
    let n = boundary.len();
    let mut total = 0i64;
    // β·β = 0 contributes nothing.
    for i in 0..n {
        total += a.beta * b.multiplicities[i] * a.beta_pairings[i];
        total += b.beta * a.multiplicities[i] * a.beta_pairings[i];
        for j in 0..n {
            total += a.multiplicities[i] * b.multiplicities[j] * boundary.intersection(i, j);
        }
    }
    Ok(total)
}

/// Twice the pairing of the class with the sum of all boundary curves —
/// the Maslov index of the corresponding stable maps.
pub fn maslov(a: &DiskClass, boundary: &SurfaceBoundary) -> Result<i64, DiskError> {
    a.check_against(boundary)?;
    let boundary_sum = DiskClass {
        beta: 0,
        beta_pairings: a.beta_pairings.clone(),
        multiplicities: vec![1; boundary.len()],
    };
    Ok(2 * pairing(a, &boundary_sum, boundary)?)
}

/// Lifting verdict for a stable disk class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftVerdict {
    /// Lifts with smooth disk domain; the local moduli is a circle.
    LiftableSmooth,
    /// Lifts, but the generic fiber has no curve to carry the sphere
    /// component, so the domain node must be smoothed.
    LiftableAfterSmoothing,
    /// No lift: the class would meet the already-lifted class with the
    /// recorded negative intersection number, which is impossible for
    /// distinct holomorphic curves.
    Obstructed { certificate: i64 },
}

/// Verdict for β + k·[D] over a boundary with a single (−2)-curve D that
/// the base disk meets once: k = 0 lifts with smooth domain, k = 1 lifts
/// after smoothing the node, k ≥ 2 is obstructed because the pairing with
/// the k = 1 lift is (β + kD)·(β + D) = 1 − k < 0.
pub fn liftable(a: &DiskClass, boundary: &SurfaceBoundary) -> Result<LiftVerdict, DiskError> {
    a.check_against(boundary)?;
    let minus_two: Vec<usize> = (0..boundary.len())
        .filter(|&i| boundary.curves[i].self_int == -2)
        .collect();
    let [d] = minus_two.as_slice() else {
        return Err(DiskError::NotSingleCurveFixture);
    };
    let d = *d;
    let mut want = vec![0; boundary.len()];
    want[d] = 1;
    if a.beta != 1 || a.beta_pairings != want {
        return Err(DiskError::CriterionNotEstablished(
            "the criterion covers the basic disk meeting the (-2)-curve once".into(),
        ));
    }
    if (0..boundary.len()).any(|i| i != d && a.multiplicities[i] != 0) {
        return Err(DiskError::CriterionNotEstablished(
            "sphere components away from the (-2)-curve are not covered".into(),
        ));
    }
    let k = a.multiplicities[d];
    Ok(match k {
        0 => LiftVerdict::LiftableSmooth,
        1 => LiftVerdict::LiftableAfterSmoothing,
        _ => {
            let reference = DiskClass {
                beta: 1,
                beta_pairings: a.beta_pairings.clone(),
                multiplicities: want,
            };
            LiftVerdict::Obstructed {
                certificate: pairing(a, &reference, boundary)?,
            }
        }
    })
}

/// A singular configuration surviving the classification: the disk together
/// with a connected chain of (−2)-spheres through its attachment curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleConfiguration {
    /// Sphere components, in cycle order.
    pub chain: Vec<String>,
    /// The curve the disk component meets.
    pub attachment: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleClassification {
    /// Anchors whose basic smooth disk lifts (all of them — the smooth
    /// disk's obstruction space vanishes regardless of the cycle shape).
    pub smooth_anchors: Vec<String>,
    /// Singular configurations that pass the pairwise positivity test.
    pub configurations: Vec<CycleConfiguration>,
    /// Candidates rejected by the test, with the offending pairing value.
    pub rejected: Vec<(CycleConfiguration, i64)>,
}

/// Classify liftable stable-disk configurations over a cycle of (−1)- and
/// (−2)-curves. For each anchor (a curve the basic disk meets once) the
/// candidates are the connected chains of (−2)-curves containing the
/// anchor, taken with multiplicity one; candidates are admitted in order of
/// chain length if they pair non-negatively with every configuration
/// already admitted for the same anchor (starting from the smooth disk).
/// Distinct attachment choices within one chain are distinct records.
pub fn classify_cycle(
    boundary: &SurfaceBoundary,
    anchors: &[String],
) -> Result<CycleClassification, DiskError> {
    if let Some(c) = boundary
        .curves
        .iter()
        .find(|c| c.self_int != -1 && c.self_int != -2)
    {
        return Err(DiskError::CriterionNotEstablished(alloc::format!(
            "curve {:?} has self-intersection {}, outside the (-1)/(-2) cycle pattern",
            c.id,
            c.self_int
        )));
    }
    let n = boundary.len();
    let mut smooth_anchors = Vec::new();
    let mut configurations = Vec::new();
    let mut rejected = Vec::new();
    for anchor in anchors {
        let a_idx = boundary
            .index_of(anchor)
            .ok_or_else(|| DiskError::UnknownCurveId(anchor.clone()))?;
        smooth_anchors.push(anchor.clone());
        if boundary.curves[a_idx].self_int != -2 {
            // No (−2)-chain can contain the anchor; only the smooth disk.
            continue;
        }
        // Connected runs of (−2)-curves through the anchor: extend left and
        // right in the cycle as far as (−2)-curves reach.
        let is_m2 = |i: usize| boundary.curves[i % n].self_int == -2;
        let mut left = 0usize;
        while left + 1 < n && is_m2(a_idx + n - left - 1) {
            left += 1;
        }
        let mut right = 0usize;
        while right + 1 < n && is_m2(a_idx + right + 1) {
            right += 1;
        }
        // Candidate chains are arcs [a_idx − l, a_idx + r]; enumerate by
        // total length so shorter chains are admitted first.
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        for l in 0..=left {
            for r in 0..=right {
                if l + r + 1 > n {
                    continue;
                }
                let arc: Vec<usize> =
                    (0..=(l + r)).map(|o| (a_idx + n - l + o) % n).collect();
                if !candidates.contains(&arc) {
                    candidates.push(arc);
                }
            }
        }
        candidates.sort_by_key(Vec::len);
        let base = DiskClass::anchored(boundary, anchor)?;
        let mut accepted: Vec<DiskClass> = vec![base.clone()];
        for arc in candidates {
            let mut mult = vec![0; n];
            for &i in &arc {
                mult[i] = 1;
            }
            let cand = DiskClass {
                beta: 1,
                beta_pairings: base.beta_pairings.clone(),
                multiplicities: mult,
            };
            let mut verdict = Ok(());
            for prev in &accepted {
                let p = pairing(&cand, prev, boundary)?;
                if p < 0 {
                    verdict = Err(p);
                    break;
                }
            }
            let config = CycleConfiguration {
                chain: arc.iter().map(|&i| boundary.curves[i].id.clone()).collect(),
                attachment: anchor.clone(),
            };
            match verdict {
                Ok(()) => {
                    accepted.push(cand);
                    configurations.push(config);
                }
                Err(p) => rejected.push((config, p)),
            }
        }
    }
    Ok(CycleClassification {
        smooth_anchors,
        configurations,
        rejected,
    })
}

/// Boundary cycle of the Hirzebruch surface with a (−2)-section: the
/// section, a fiber, the opposite (+2)-section, the other fiber.
pub fn hirzebruch_boundary() -> SurfaceBoundary {
    SurfaceBoundary::new(vec![
        BoundaryCurve::new("D", -2),
        BoundaryCurve::new("F1", 0),
        BoundaryCurve::new("S", 2),
        BoundaryCurve::new("F2", 0),
    ])
    .expect("fixture cycle is valid")
}

/// Boundary cycle of the central fiber of a toric degeneration of cubic
/// surfaces: nine curves with self-intersections −1,−2,−2 repeated, so the
/// (−2)-curves form three adjacent pairs.
pub fn cubic_boundary() -> SurfaceBoundary {
    let ids = ["E1", "D1a", "D1b", "E2", "D2a", "D2b", "E3", "D3a", "D3b"];
    SurfaceBoundary::new(
        ids.iter()
            .enumerate()
            .map(|(i, id)| BoundaryCurve::new(id, if i % 3 == 0 { -1 } else { -2 }))
            .collect(),
    )
    .expect("fixture cycle is valid")
}

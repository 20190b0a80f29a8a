//! Moment polytopes in H-representation over exact rationals.
//!
//! A polytope is a list of facet inequalities ℓᵢ(u) = ⟨vᵢ,u⟩ − τᵢ ≥ 0 with
//! primitive integer normals vᵢ and rational offsets τᵢ. Construction
//! verifies the feasible set is nonempty and bounded. Vertex enumeration is
//! brute force over all dim-subsets of facets — instances here are tiny and
//! exactness matters more than speed.
//!
//! The module also builds the interlacing-pattern polytopes attached to the
//! odd/even orthogonal groups (triangular arrays with an absolute-value
//! column), reduced to explicit facet systems after eliminating entries the
//! pattern forces to constants.

use crate::linalg::{rational_kernel, rational_rank, rational_solve};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolytopeError {
    ZeroNormal { index: usize },
    DimensionMismatch { index: usize },
    Empty,
    Unbounded,
    /// Top-row data for a pattern polytope is malformed (length or ordering).
    BadTopRow(String),
    /// The pattern constraints contradict each other.
    InfeasiblePattern,
    NormalOverflow { index: usize },
}

impl fmt::Display for PolytopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolytopeError::ZeroNormal { index } => write!(f, "facet {index} has a zero normal"),
            PolytopeError::DimensionMismatch { index } => {
                write!(f, "facet {index} has the wrong number of normal components")
            }
            PolytopeError::Empty => write!(f, "feasible set is empty"),
            PolytopeError::Unbounded => write!(f, "feasible set is unbounded"),
            PolytopeError::BadTopRow(msg) => write!(f, "bad top row: {msg}"),
            PolytopeError::InfeasiblePattern => write!(f, "pattern constraints are contradictory"),
            PolytopeError::NormalOverflow { index } => {
                write!(f, "facet {index} normal does not fit in i64")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PolytopeError {}

/// One inequality ⟨normal, u⟩ − offset ≥ 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigRational,
}

impl Facet {
    pub fn new(normal: Vec<BigInt>, offset: BigRational) -> Self {
        Facet { normal, offset }
    }

    pub fn from_i64(normal: &[i64], offset: BigRational) -> Self {
        Facet {
            normal: normal.iter().map(|&x| BigInt::from(x)).collect(),
            offset,
        }
    }

    /// ℓ(u) = ⟨normal, u⟩ − offset, exact.
    pub fn eval(&self, u: &[BigRational]) -> BigRational {
        let dot: BigRational = self
            .normal
            .iter()
            .zip(u)
            .map(|(v, x)| BigRational::from_integer(v.clone()) * x)
            .sum();
        dot - &self.offset
    }

    /// ℓ(u) in floating point.
    pub fn eval_f64(&self, u: &[f64]) -> f64 {
        let dot: f64 = self
            .normal
            .iter()
            .zip(u)
            .map(|(v, x)| v.to_f64().unwrap_or(f64::NAN) * x)
            .sum();
        dot - self.offset.to_f64().unwrap_or(f64::NAN)
    }

    pub fn normal_i64(&self) -> Option<Vec<i64>> {
        self.normal.iter().map(|v| v.to_i64()).collect()
    }

    fn one_norm_f64(&self) -> f64 {
        self.normal
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN).abs())
            .sum()
    }
}

/// Bounded nonempty rational polytope {u : ℓᵢ(u) ≥ 0 ∀i}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetSystem {
    dim: usize,
    facets: Vec<Facet>,
    /// Optional overall scale the instance was built from (echoed in reports).
    pub lambda: Option<BigRational>,
    /// User-asserted hypothesis flag: the degeneration this polytope came
    /// from is Fano with a small resolution. Never derived, only echoed.
    pub small_resolution: bool,
    vertices: Vec<Vec<BigRational>>,
}

impl FacetSystem {
    /// Validates and canonicalizes the inequality list: nonzero normals,
    /// normals made primitive by gcd division (offsets divided along),
    /// then nonemptiness and boundedness established by enumeration.
    pub fn new(
        dim: usize,
        facets: Vec<Facet>,
        lambda: Option<BigRational>,
    ) -> Result<Self, PolytopeError> {
        let mut canon = Vec::with_capacity(facets.len());
        for (index, f) in facets.into_iter().enumerate() {
            if f.normal.len() != dim {
                return Err(PolytopeError::DimensionMismatch { index });
            }
            if f.normal.iter().all(|v| v.is_zero()) {
                return Err(PolytopeError::ZeroNormal { index });
            }
            let mut g = BigInt::zero();
            for v in &f.normal {
                g = num_integer::gcd(g, v.abs());
            }
            let offset = f.offset / BigRational::from_integer(g.clone());
            let normal: Vec<BigInt> = f.normal.into_iter().map(|v| v / &g).collect();
            canon.push(Facet { normal, offset });
        }
        let verts = enumerate_vertices(dim, &canon);
        let unbounded = has_recession_direction(dim, &canon);
        if !verts.is_empty() {
            if unbounded {
                return Err(PolytopeError::Unbounded);
            }
        } else if unbounded {
            // No basic feasible point but the recession cone is nontrivial:
            // decide emptiness exactly before blaming unboundedness.
            if fourier_motzkin_feasible(dim, &canon) {
                return Err(PolytopeError::Unbounded);
            }
            return Err(PolytopeError::Empty);
        } else if dim > 0 {
            return Err(PolytopeError::Empty);
        }
        let vertices = if dim == 0 { vec![Vec::new()] } else { verts };
        Ok(FacetSystem {
            dim,
            facets: canon,
            lambda,
            small_resolution: false,
            vertices,
        })
    }

    pub fn with_small_resolution(mut self, flag: bool) -> Self {
        self.small_resolution = flag;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// ℓᵢ(u), exact.
    pub fn ell(&self, i: usize, u: &[BigRational]) -> BigRational {
        self.facets[i].eval(u)
    }

    pub fn contains(&self, u: &[BigRational], strict: bool) -> bool {
        self.facets.iter().all(|f| {
            let v = f.eval(u);
            if strict { v.is_positive() } else { !v.is_negative() }
        })
    }

    /// min over facets of ℓᵢ(u)/‖vᵢ‖₁ at a floating-point u. Positive iff u
    /// is strictly interior, and the magnitude is a per-coordinate margin.
    pub fn min_scaled_slack(&self, u: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.eval_f64(u) / f.one_norm_f64())
            .fold(f64::INFINITY, f64::min)
    }

    /// All vertices, exactly computed, deduplicated, lexicographically sorted.
    pub fn vertices(&self) -> &[Vec<BigRational>] {
        &self.vertices
    }

    /// The translated polytope P + delta.
    pub fn translate(&self, delta: &[BigRational]) -> Result<Self, PolytopeError> {
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let shift: BigRational = f
                    .normal
                    .iter()
                    .zip(delta)
                    .map(|(v, d)| BigRational::from_integer(v.clone()) * d)
                    .sum();
                Facet::new(f.normal.clone(), &f.offset + shift)
            })
            .collect();
        let mut out = FacetSystem::new(self.dim, facets, self.lambda.clone())?;
        out.small_resolution = self.small_resolution;
        Ok(out)
    }

    /// Translates so every vertex coordinate is ≥ 0; returns the shift used.
    pub fn translate_to_nonnegative_orthant(&self) -> (Self, Vec<BigRational>) {
        let delta: Vec<BigRational> = (0..self.dim)
            .map(|j| {
                let mn = self
                    .vertices
                    .iter()
                    .map(|v| v[j].clone())
                    .min()
                    .unwrap_or_else(BigRational::zero);
                -mn
            })
            .collect();
        let t = self
            .translate(&delta)
            .expect("translation preserves validity");
        (t, delta)
    }

    /// ∞-norm diameter of the vertex set.
    pub fn diameter_linf(&self) -> BigRational {
        let mut best = BigRational::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                for (x, y) in a.iter().zip(b) {
                    let d = (x - y).abs();
                    if d > best {
                        best = d;
                    }
                }
            }
        }
        best
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance the rightmost index that can still move.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn normal_row(f: &Facet) -> Vec<BigRational> {
    f.normal
        .iter()
        .map(|v| BigRational::from_integer(v.clone()))
        .collect()
}

/// Exact brute-force vertex enumeration: every dim-subset of facets that
/// meets in a unique point contributes a candidate, kept when feasible.
fn enumerate_vertices(dim: usize, facets: &[Facet]) -> Vec<Vec<BigRational>> {
    let mut verts: Vec<Vec<BigRational>> = Vec::new();
    if dim == 0 || facets.len() < dim {
        return verts;
    }
    for subset in combinations(facets.len(), dim) {
        let a: Vec<Vec<BigRational>> = subset.iter().map(|&i| normal_row(&facets[i])).collect();
        let b: Vec<BigRational> = subset.iter().map(|&i| facets[i].offset.clone()).collect();
        let Some(u) = rational_solve(&a, &b) else {
            continue;
        };
        if facets.iter().all(|f| !f.eval(&u).is_negative()) && !verts.contains(&u) {
            verts.push(u);
        }
    }
    verts.sort();
    verts
}

/// Whether the recession cone {d : ⟨vᵢ,d⟩ ≥ 0 ∀i} contains a nonzero
/// direction. Exact: a lineality direction exists iff the normal matrix is
/// rank-deficient; otherwise the cone is pointed and every extreme ray is
/// cut out by dim−1 independent tight constraints.
fn has_recession_direction(dim: usize, facets: &[Facet]) -> bool {
    if dim == 0 {
        return false;
    }
    let rows: Vec<Vec<BigRational>> = facets.iter().map(normal_row).collect();
    if rational_rank(&rows) < dim {
        return true;
    }
    let ray_ok = |d: &[BigRational]| facets.iter().all(|f| !f.eval_homogeneous(d).is_negative());
    for subset in combinations(facets.len(), dim.saturating_sub(1)) {
        let a: Vec<Vec<BigRational>> = subset.iter().map(|&i| rows[i].clone()).collect();
        let ker = rational_kernel(&a, dim);
        if ker.len() != 1 {
            continue;
        }
        let d = &ker[0];
        let neg: Vec<BigRational> = d.iter().map(|x| -x.clone()).collect();
        if ray_ok(d) || ray_ok(&neg) {
            return true;
        }
    }
    false
}

impl Facet {
    /// ⟨normal, d⟩ without the offset, for recession-cone tests.
    fn eval_homogeneous(&self, d: &[BigRational]) -> BigRational {
        self.normal
            .iter()
            .zip(d)
            .map(|(v, x)| BigRational::from_integer(v.clone()) * x)
            .sum()
    }
}

/// Exact feasibility via Fourier–Motzkin elimination. Only used in the
/// corner case "no basic feasible point, nontrivial recession cone", so the
/// well-known blowup is irrelevant at our sizes.
fn fourier_motzkin_feasible(dim: usize, facets: &[Facet]) -> bool {
    // Rows (a, t) meaning ⟨a,u⟩ ≥ t.
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = facets
        .iter()
        .map(|f| (normal_row(f), f.offset.clone()))
        .collect();
    for var in (0..dim).rev() {
        let mut lower = Vec::new(); // a_var > 0
        let mut upper = Vec::new(); // a_var < 0
        let mut rest = Vec::new();
        for (a, t) in rows {
            if a[var].is_positive() {
                lower.push((a, t));
            } else if a[var].is_negative() {
                upper.push((a, t));
            } else {
                rest.push((a, t));
            }
        }
        for (al, tl) in &lower {
            for (au, tu) in &upper {
                let cl = al[var].clone();
                let cu = -au[var].clone();
                let mut a: Vec<BigRational> = (0..dim)
                    .map(|j| &al[j] * &cu + &au[j] * &cl)
                    .collect();
                a[var] = BigRational::zero();
                let t = tl * &cu + tu * &cl;
                rest.push((a, t));
            }
        }
        // Dedup exact duplicates to keep growth in check.
        rest.sort();
        rest.dedup();
        rows = rest;
    }
    rows.iter().all(|(_, t)| !t.is_positive())
}

/// Drops facets whose removal leaves the feasible set unchanged. Exact:
/// facet j is redundant iff ℓⱼ ≥ 0 on the subsystem without j, decided on
/// that subsystem's vertices and recession rays.
pub fn remove_redundant_facets(dim: usize, facets: Vec<Facet>) -> Vec<Facet> {
    let mut kept = facets;
    let mut j = 0;
    while j < kept.len() {
        let mut rest = kept.clone();
        let f = rest.remove(j);
        if is_nonnegative_on(dim, &rest, &f) {
            kept = rest;
        } else {
            j += 1;
        }
    }
    kept
}

fn is_nonnegative_on(dim: usize, facets: &[Facet], f: &Facet) -> bool {
    if dim == 0 {
        return !f.offset.is_positive();
    }
    // A recession direction of the subsystem along which ℓ decreases means
    // the minimum is −∞.
    let rows: Vec<Vec<BigRational>> = facets.iter().map(normal_row).collect();
    if rational_rank(&rows) < dim {
        // Subsystem contains a line; f must be constant along it or it dips
        // negative. Check f against the kernel.
        let ker = rational_kernel(&rows, dim);
        for d in &ker {
            if !f.eval_homogeneous(d).is_zero() {
                return false;
            }
        }
    }
    for subset in combinations(facets.len(), dim.saturating_sub(1)) {
        let a: Vec<Vec<BigRational>> = subset.iter().map(|&i| rows[i].clone()).collect();
        let ker = rational_kernel(&a, dim);
        if ker.len() != 1 {
            continue;
        }
        for d in [ker[0].clone(), ker[0].iter().map(|x| -x.clone()).collect()] {
            let feasible_ray = facets.iter().all(|g| !g.eval_homogeneous(&d).is_negative());
            if feasible_ray && f.eval_homogeneous(&d).is_negative() {
                return false;
            }
        }
    }
    enumerate_vertices(dim, facets)
        .iter()
        .all(|u| !f.eval(u).is_negative())
}

/// The chain polytope {bound ≥ x_d ≥ x_{d−1} ≥ … ≥ x₂ ≥ |x₁|} in d ≥ 2
/// coordinates — the moment polytope of the rank-3 quadric cone picture.
pub fn abs_chain_polytope(d: usize, bound: BigRational) -> Result<FacetSystem, PolytopeError> {
    assert!(d >= 2, "chain polytope needs at least two coordinates");
    let e = |j: usize, s: i64| -> Vec<i64> {
        let mut v = vec![0i64; d];
        v[j] = s;
        v
    };
    let mut facets = Vec::new();
    let mut top = vec![0i64; d];
    top[d - 1] = -1;
    facets.push(Facet::from_i64(&top, -bound.clone()));
    for j in 1..d - 1 {
        let mut v = e(j + 1, 1);
        v[j] = -1;
        facets.push(Facet::from_i64(&v, BigRational::zero()));
    }
    let mut v1 = e(1, 1);
    v1[0] = -1;
    facets.push(Facet::from_i64(&v1, BigRational::zero()));
    let mut v2 = e(1, 1);
    v2[0] = 1;
    facets.push(Facet::from_i64(&v2, BigRational::zero()));
    FacetSystem::new(d, facets, Some(bound))
}

// ---------------------------------------------------------------------------
// Interlacing patterns for the orthogonal groups.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupParity {
    /// n odd (n = 2m+1).
    TypeB,
    /// n even (n = 2m).
    TypeD,
}

/// A slot in the triangular array: the top row is level n, pattern rows are
/// levels n−1 down to 2; row k holds ⌊k/2⌋ entries indexed from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GcNode {
    pub level: usize,
    pub index: usize,
}

/// upper ≥ lower, or upper ≥ |lower| when `abs_lower` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcConstraint {
    pub upper: GcNode,
    pub lower: GcNode,
    pub abs_lower: bool,
}

#[derive(Clone, Debug)]
pub struct GcPattern {
    pub parity: GroupParity,
    pub n: usize,
    pub top_row: Vec<BigRational>,
    pub constraints: Vec<GcConstraint>,
    /// Entries whose inequalities use absolute value (last column of even
    /// rows; for n even also the final top-row slot).
    pub abs_marked: Vec<GcNode>,
    /// Entries pinned to constants by the pattern, with their values.
    pub forced: Vec<(GcNode, BigRational)>,
    /// Remaining entries, in the coordinate order of the emitted polytope.
    pub coordinates: Vec<GcNode>,
}

fn row_len(n: usize, k: usize) -> usize {
    let _ = n;
    k / 2
}

fn build_constraints(n: usize, parity: GroupParity) -> (Vec<GcConstraint>, Vec<GcNode>) {
    let m = n / 2;
    let marked = |node: GcNode| -> bool {
        if node.level == n {
            parity == GroupParity::TypeD && node.index == m
        } else {
            node.level.is_multiple_of(2) && node.index == node.level / 2
        }
    };
    let mut constraints = Vec::new();
    let mut marks = Vec::new();
    for k in (3..=n).rev() {
        let ju = row_len(n, k);
        let jl = row_len(n, k - 1);
        if k % 2 == 1 {
            // Odd upper row over even lower row: equal lengths; the lower
            // row's last entry is the absolute-value column.
            debug_assert_eq!(ju, jl);
            for i in 1..=ju {
                let lower = GcNode { level: k - 1, index: i };
                constraints.push(GcConstraint {
                    upper: GcNode { level: k, index: i },
                    lower,
                    abs_lower: marked(lower),
                });
            }
            for i in 1..ju {
                constraints.push(GcConstraint {
                    upper: GcNode { level: k - 1, index: i },
                    lower: GcNode { level: k, index: i + 1 },
                    abs_lower: false,
                });
            }
        } else {
            // Even upper row over odd lower row: lower row one shorter; the
            // upper row's last entry only appears under absolute value.
            debug_assert_eq!(jl + 1, ju);
            for i in 1..ju {
                constraints.push(GcConstraint {
                    upper: GcNode { level: k, index: i },
                    lower: GcNode { level: k - 1, index: i },
                    abs_lower: false,
                });
                let lower = GcNode { level: k, index: i + 1 };
                constraints.push(GcConstraint {
                    upper: GcNode { level: k - 1, index: i },
                    lower,
                    abs_lower: marked(lower),
                });
            }
        }
    }
    for k in 2..=n {
        for i in 1..=row_len(n, k) {
            let node = GcNode { level: k, index: i };
            if marked(node) {
                marks.push(node);
            }
        }
    }
    (constraints, marks)
}

#[derive(Clone, Debug, Default)]
struct Interval {
    lo: Option<BigRational>,
    hi: Option<BigRational>,
}

impl Interval {
    fn point(v: BigRational) -> Self {
        Interval { lo: Some(v.clone()), hi: Some(v) }
    }

    fn raise_lo(&mut self, v: BigRational) -> bool {
        match &self.lo {
            Some(cur) if *cur >= v => false,
            _ => {
                self.lo = Some(v);
                true
            }
        }
    }

    fn drop_hi(&mut self, v: BigRational) -> bool {
        match &self.hi {
            Some(cur) if *cur <= v => false,
            _ => {
                self.hi = Some(v);
                true
            }
        }
    }

    fn forced(&self) -> Option<BigRational> {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) if a == b => Some(a.clone()),
            _ => None,
        }
    }

    fn contradictory(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(a), Some(b)) if a > b)
    }
}

/// Builds the pattern polytope for the orthogonal group determined by n
/// (parity picks type B or D) with the given top row.
///
/// Entries the constraints force to single values are eliminated; the
/// remaining entries become coordinates ordered by (level, index), and the
/// surviving inequalities are emitted as facets with redundant ones removed.
pub fn gc_polytope(
    n: usize,
    top_row: &[BigRational],
) -> Result<(GcPattern, FacetSystem), PolytopeError> {
    if n < 3 {
        return Err(PolytopeError::BadTopRow("need n >= 3".into()));
    }
    let m = n / 2;
    let parity = if n % 2 == 1 { GroupParity::TypeB } else { GroupParity::TypeD };
    if top_row.len() != m {
        return Err(PolytopeError::BadTopRow(alloc::format!(
            "expected {m} top-row entries, got {}",
            top_row.len()
        )));
    }
    // Weakly decreasing; the final slot is |·|-compared for even n and
    // must be nonnegative for odd n.
    for i in 1..m {
        let bound = if parity == GroupParity::TypeD && i == m - 1 {
            top_row[i].abs()
        } else {
            top_row[i].clone()
        };
        if top_row[i - 1] < bound {
            return Err(PolytopeError::BadTopRow("entries must be weakly decreasing".into()));
        }
    }
    if parity == GroupParity::TypeB && top_row[m - 1].is_negative() {
        return Err(PolytopeError::BadTopRow("last entry must be >= 0 for odd n".into()));
    }

    let (constraints, abs_marked) = build_constraints(n, parity);

    // Interval-narrowing fixpoint to find entries forced to constants.
    let mut nodes: Vec<GcNode> = Vec::new();
    for k in 2..n {
        for i in 1..=row_len(n, k) {
            nodes.push(GcNode { level: k, index: i });
        }
    }
    let slot = |node: GcNode, nodes: &[GcNode]| nodes.iter().position(|&x| x == node);
    let mut ivals: Vec<Interval> = vec![Interval::default(); nodes.len()];
    let value_of = |node: GcNode, ivals: &[Interval], nodes: &[GcNode]| -> Interval {
        if node.level == n {
            Interval::point(top_row[node.index - 1].clone())
        } else {
            ivals[slot(node, nodes).unwrap()].clone()
        }
    };
    loop {
        let mut changed = false;
        for c in &constraints {
            let up = value_of(c.upper, &ivals, &nodes);
            let lo = value_of(c.lower, &ivals, &nodes);
            if let Some(j) = slot(c.lower, &nodes) {
                if let Some(uh) = up.hi.clone() {
                    changed |= ivals[j].drop_hi(uh.clone());
                    if c.abs_lower {
                        changed |= ivals[j].raise_lo(-uh);
                    }
                }
            }
            if let Some(j) = slot(c.upper, &nodes) {
                if c.abs_lower {
                    changed |= ivals[j].raise_lo(BigRational::zero());
                    if let Some(ll) = lo.lo.clone() {
                        if !ll.is_negative() {
                            changed |= ivals[j].raise_lo(ll);
                        }
                    }
                } else if let Some(ll) = lo.lo.clone() {
                    changed |= ivals[j].raise_lo(ll);
                }
            }
        }
        if ivals.iter().any(Interval::contradictory) {
            return Err(PolytopeError::InfeasiblePattern);
        }
        if !changed {
            break;
        }
    }

    let mut forced: Vec<(GcNode, BigRational)> = Vec::new();
    let mut coordinates: Vec<GcNode> = Vec::new();
    for (node, iv) in nodes.iter().zip(&ivals) {
        match iv.forced() {
            Some(v) => forced.push((*node, v)),
            None => coordinates.push(*node),
        }
    }
    coordinates.sort();

    // Emit facets over the surviving coordinates.
    enum Side {
        Const(BigRational),
        Var(usize),
    }
    let resolve = |node: GcNode| -> Side {
        if node.level == n {
            return Side::Const(top_row[node.index - 1].clone());
        }
        if let Some((_, v)) = forced.iter().find(|(f, _)| *f == node) {
            return Side::Const(v.clone());
        }
        Side::Var(coordinates.iter().position(|&c| c == node).unwrap())
    };
    let dim = coordinates.len();
    let unit = |j: usize, s: i64| -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); dim];
        v[j] = BigInt::from(s);
        v
    };
    let mut facets: Vec<Facet> = Vec::new();
    let push = |normal: Vec<BigInt>, offset: BigRational, facets: &mut Vec<Facet>| {
        let f = Facet::new(normal, offset);
        if !facets.contains(&f) {
            facets.push(f);
        }
    };
    for c in &constraints {
        match (resolve(c.upper), resolve(c.lower)) {
            (Side::Const(a), Side::Const(b)) => {
                let ok = if c.abs_lower { a >= b.abs() } else { a >= b };
                if !ok {
                    return Err(PolytopeError::InfeasiblePattern);
                }
            }
            (Side::Var(u), Side::Const(b)) => {
                let bound = if c.abs_lower { b.abs() } else { b };
                push(unit(u, 1), bound, &mut facets);
            }
            (Side::Const(a), Side::Var(l)) => {
                push(unit(l, -1), -a.clone(), &mut facets);
                if c.abs_lower {
                    push(unit(l, 1), -a, &mut facets);
                }
            }
            (Side::Var(u), Side::Var(l)) => {
                let mut v = unit(u, 1);
                v[l] = BigInt::from(-1);
                push(v, BigRational::zero(), &mut facets);
                if c.abs_lower {
                    let mut w = unit(u, 1);
                    w[l] = BigInt::from(1);
                    push(w, BigRational::zero(), &mut facets);
                }
            }
        }
    }
    let facets = remove_redundant_facets(dim, facets);
    let rank_one = top_row.iter().skip(1).all(BigRational::is_zero);
    let lambda = if rank_one { Some(top_row[0].clone()) } else { None };
    let system = FacetSystem::new(dim, facets, lambda)?;
    let pattern = GcPattern {
        parity,
        n,
        top_row: top_row.to_vec(),
        constraints,
        abs_marked,
        forced,
        coordinates,
    };
    Ok((pattern, system))
}

/// For the rank-one top row (λ, 0, …, 0), checks that the pattern polytope
/// equals the chain polytope {λ ≥ x_{n−2} ≥ … ≥ x₂ ≥ |x₁|} by exact
/// vertex-set comparison.
pub fn gc_equals_moment_polytope(n: usize, lambda: &BigRational) -> Result<bool, PolytopeError> {
    if n < 4 {
        return Err(PolytopeError::BadTopRow("comparison needs n >= 4".into()));
    }
    if !lambda.is_positive() {
        return Err(PolytopeError::BadTopRow("lambda must be positive".into()));
    }
    let m = n / 2;
    let mut top = vec![BigRational::zero(); m];
    top[0] = lambda.clone();
    let (_, gc) = gc_polytope(n, &top)?;
    let chain = abs_chain_polytope(n - 2, lambda.clone())?;
    Ok(gc.dim() == chain.dim() && gc.vertices() == chain.vertices())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// The octahedral fixture: eight facets at scale λ = 1.
    pub(crate) fn octahedron(lambda: i64) -> FacetSystem {
        let l = r(lambda);
        let data: [(&[i64; 3], i64); 8] = [
            (&[0, 1, 1], 0),
            (&[-1, 0, 0], -1),
            (&[0, -1, 0], -1),
            (&[1, 0, 1], 0),
            (&[0, 1, 0], 0),
            (&[-1, 0, -1], -1),
            (&[0, -1, -1], -1),
            (&[1, 0, 0], 0),
        ];
        let facets = data
            .iter()
            .map(|(v, t)| Facet::from_i64(*v, r(*t) * l.clone()))
            .collect();
        FacetSystem::new(3, facets, Some(l)).unwrap()
    }

    #[test]
    fn octahedron_vertices_match_expected_set() {
        let p = octahedron(1);
        let mut expected: Vec<Vec<BigRational>> = [
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 1, -1],
            [1, 1, 0],
            [0, 0, 0],
        ]
        .iter()
        .map(|v| v.iter().map(|&x| r(x)).collect())
        .collect();
        expected.sort();
        assert_eq!(p.vertices(), expected.as_slice());
    }

    #[test]
    fn vertices_have_enough_tight_facets() {
        let p = octahedron(1);
        for u in p.vertices() {
            let tight = (0..p.facets().len())
                .filter(|&i| p.ell(i, u).is_zero())
                .count();
            assert!(tight >= 3);
            assert!(p.contains(u, false));
            assert!(!p.contains(u, true));
        }
    }

    #[test]
    fn containment_examples() {
        let p = octahedron(1);
        let inside: Vec<BigRational> = [rq(1, 2), rq(1, 2), rq(0, 1)].to_vec();
        assert!(p.contains(&inside, true));
        let outside: Vec<BigRational> = [r(2), r(2), r(2)].to_vec();
        assert!(!p.contains(&outside, false));
    }

    #[test]
    fn construction_rejects_bad_systems() {
        // Unbounded: single halfspace in the plane.
        let f = vec![Facet::from_i64(&[1, 0], r(0))];
        assert_eq!(
            FacetSystem::new(2, f, None).unwrap_err(),
            PolytopeError::Unbounded
        );
        // Empty: u >= 1 and u <= 0.
        let f = vec![
            Facet::from_i64(&[1], r(1)),
            Facet::from_i64(&[-1], r(0)),
        ];
        assert_eq!(
            FacetSystem::new(1, f, None).unwrap_err(),
            PolytopeError::Empty
        );
        // Empty strip with a free second variable (no basic solution at all).
        let f = vec![
            Facet::from_i64(&[1, 0], r(1)),
            Facet::from_i64(&[-1, 0], r(0)),
        ];
        assert_eq!(
            FacetSystem::new(2, f, None).unwrap_err(),
            PolytopeError::Empty
        );
        // Zero normal.
        let f = vec![Facet::from_i64(&[0, 0], r(0))];
        assert!(matches!(
            FacetSystem::new(2, f, None).unwrap_err(),
            PolytopeError::ZeroNormal { index: 0 }
        ));
    }

    #[test]
    fn normals_are_made_primitive() {
        // 2u ≥ 1 and -2u ≥ -4 scale down to u ≥ 1/2, -u ≥ -2.
        let f = vec![
            Facet::from_i64(&[2], r(1)),
            Facet::from_i64(&[-2], r(-4)),
        ];
        let p = FacetSystem::new(1, f, None).unwrap();
        assert_eq!(p.facets()[0].normal, vec![BigInt::from(1)]);
        assert_eq!(p.facets()[0].offset, rq(1, 2));
        assert_eq!(p.facets()[1].offset, r(-2));
    }

    #[test]
    fn translation_shifts_vertices() {
        let p = octahedron(1);
        let delta = vec![r(1), r(2), r(-1)];
        let t = p.translate(&delta).unwrap();
        let shifted: Vec<Vec<BigRational>> = p
            .vertices()
            .iter()
            .map(|v| v.iter().zip(&delta).map(|(x, d)| x + d).collect())
            .collect();
        let mut shifted_sorted = shifted;
        shifted_sorted.sort();
        assert_eq!(t.vertices(), shifted_sorted.as_slice());
        let (nn, shift) = t.translate_to_nonnegative_orthant();
        assert!(nn
            .vertices()
            .iter()
            .all(|v| v.iter().all(|x| !x.is_negative())));
        assert_eq!(shift[2], r(2)); // third coordinate had min −2 after shift by −1
    }

    #[test]
    fn scaled_slack_tracks_interior_margin() {
        let p = octahedron(1);
        let s = p.min_scaled_slack(&[0.5, 0.5, 0.0]);
        assert!((s - 0.25).abs() < 1e-12); // binding facets have ‖v‖₁ = 2
        assert!(p.min_scaled_slack(&[2.0, 2.0, 2.0]) < 0.0);
    }

    #[test]
    fn diameter_of_octahedron() {
        assert_eq!(octahedron(1).diameter_linf(), r(2)); // (0,0,1) vs (1,1,-1)
    }

    #[test]
    fn redundant_facets_are_dropped() {
        // Unit square plus a slack inequality x + y ≥ -1.
        let facets = vec![
            Facet::from_i64(&[1, 0], r(0)),
            Facet::from_i64(&[0, 1], r(0)),
            Facet::from_i64(&[-1, 0], r(-1)),
            Facet::from_i64(&[0, -1], r(-1)),
            Facet::from_i64(&[1, 1], r(-1)),
        ];
        let kept = remove_redundant_facets(2, facets);
        assert_eq!(kept.len(), 4);
        assert!(kept.iter().all(|f| f.normal.iter().any(|v| v.is_zero())));
    }

    #[test]
    fn chain_polytope_shape() {
        let p = abs_chain_polytope(2, r(1)).unwrap();
        let mut expected: Vec<Vec<BigRational>> = [[0, 0], [1, 1], [-1, 1]]
            .iter()
            .map(|v| v.iter().map(|&x| r(x)).collect())
            .collect();
        expected.sort();
        assert_eq!(p.vertices(), expected.as_slice());
    }

    #[test]
    fn gc_pattern_rank_one_reduces_to_chain() {
        for (n, expect_dim) in [(4usize, 2usize), (5, 3), (6, 4), (7, 5)] {
            let m = n / 2;
            let mut top = vec![r(0); m];
            top[0] = r(1);
            let (pat, sys) = gc_polytope(n, &top).unwrap();
            assert_eq!(sys.dim(), expect_dim, "n={n}");
            // Exactly the chain facet count: one top bound, dim−2 ladder
            // steps, two absolute-value facets.
            assert_eq!(sys.facets().len(), expect_dim + 1, "n={n}");
            // All entries off the leading column are pinned to zero.
            for (node, v) in &pat.forced {
                assert!(node.index >= 2);
                assert!(v.is_zero());
            }
            assert!(pat.coordinates.iter().all(|c| c.index == 1));
        }
    }

    #[test]
    fn gc_polytope_of_zero_orbit_is_a_point() {
        let (pat, sys) = gc_polytope(4, &[r(0), r(0)]).unwrap();
        assert_eq!(sys.dim(), 0);
        assert_eq!(sys.vertices().len(), 1);
        assert!(pat.coordinates.is_empty());
        assert_eq!(pat.forced.len(), 2);
    }

    #[test]
    fn gc_matches_chain_polytope() {
        for n in [4usize, 5, 6] {
            for l in [r(1), r(2)] {
                assert!(gc_equals_moment_polytope(n, &l).unwrap(), "n={n} λ={l}");
            }
        }
    }

    #[test]
    fn gc_rejects_bad_top_rows() {
        assert!(gc_polytope(5, &[r(1)]).is_err()); // wrong length
        assert!(gc_polytope(5, &[r(0), r(1)]).is_err()); // not decreasing
        assert!(gc_polytope(5, &[r(1), r(-1)]).is_err()); // negative for odd n
        // Even n: |last| may be negative but must be dominated.
        assert!(gc_polytope(6, &[r(2), r(1), r(-1)]).is_ok());
        assert!(gc_polytope(6, &[r(2), r(1), r(-2)]).is_err());
    }

    #[test]
    fn gc_marks_absolute_value_column() {
        let (pat, _) = gc_polytope(6, &[r(1), r(0), r(0)]).unwrap();
        assert!(pat.abs_marked.contains(&GcNode { level: 2, index: 1 }));
        assert!(pat.abs_marked.contains(&GcNode { level: 4, index: 2 }));
        // Type D: the tilde slot of the top row is marked too.
        assert!(pat.abs_marked.contains(&GcNode { level: 6, index: 3 }));
        let (pat_b, _) = gc_polytope(5, &[r(1), r(0)]).unwrap();
        assert!(!pat_b.abs_marked.contains(&GcNode { level: 5, index: 2 }));
    }

    #[test]
    fn general_top_row_polytope_is_valid() {
        // Not rank one: every vertex must satisfy all constraints tightly
        // enough to be a genuine vertex.
        let (_, sys) = gc_polytope(5, &[r(3), r(1)]).unwrap();
        assert!(!sys.vertices().is_empty());
        for u in sys.vertices() {
            assert!(sys.contains(u, false));
        }
        assert!(sys.lambda.is_none());
    }
}

//! Laurent-type potential functions attached to a facet system, and the
//! numerical study of their critical points.
//!
//! For a polytope with facets ℓᵢ(u) = ⟨vᵢ,u⟩ − τᵢ ≥ 0 containing the
//! origin, the potential is W(y) = Σᵢ cᵢ T^{−τᵢ} y^{vᵢ} — one monomial per
//! facet, weighted by a power of the formal parameter T. Specializing
//! T = t ∈ (0,1) gives an ordinary function on the algebraic torus; its
//! critical points are found by damped Newton iteration in logarithmic
//! coordinates from many random starts, then classified by the rank of the
//! logarithmic Hessian. Critical points found at several values of t are
//! matched into chains, and the t-scaling exponents of their coordinates
//! ("valuations") are recovered by least-squares regression; a chain that
//! stays nondegenerate with valuations strictly inside the polytope yields
//! a machine-checkable certificate.

use crate::novikov::{GaussianRational, NovikovError};
use crate::polytope::FacetSystem;
use crate::linalg::{complex_det, complex_solve, pseudo_solve, singular_values};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
// Supplies f64 math methods when building without std; shadowed by the
// inherent methods otherwise.
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialError {
    /// A facet offset is positive, so its monomial would need a negative
    /// power of T; translate the polytope over the origin first.
    OriginOutside { facet: usize },
    /// A facet normal does not fit in machine integers.
    ExponentOverflow { facet: usize },
    BadParameter(String),
    Novikov(NovikovError),
    /// A claimed family leaves the region where the potential is defined.
    InadmissibleFamily(String),
}

impl fmt::Display for PotentialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialError::OriginOutside { facet } => write!(
                f,
                "facet {facet} has positive offset; translate the polytope to contain the origin"
            ),
            PotentialError::ExponentOverflow { facet } => {
                write!(f, "facet {facet} normal overflows i64")
            }
            PotentialError::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
            PotentialError::Novikov(e) => write!(f, "coefficient arithmetic: {e}"),
            PotentialError::InadmissibleFamily(msg) => write!(f, "inadmissible family: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PotentialError {}

impl From<NovikovError> for PotentialError {
    fn from(e: NovikovError) -> Self {
        PotentialError::Novikov(e)
    }
}

/// One monomial cᵢ T^{t_power} y^{exponent}.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTerm {
    pub exponent: Vec<i64>,
    pub t_power: BigRational,
    pub coeff: GaussianRational,
}

impl PotentialTerm {
    pub fn unit(exponent: Vec<i64>, t_power: BigRational) -> Self {
        PotentialTerm {
            exponent,
            t_power,
            coeff: GaussianRational::from_integer(1),
        }
    }
}

/// A finite sum of monomials in y₁^{±1},…,y_N^{±1} with T-power weights.
/// Terms are kept in a canonical order (exponent vector, then T-power) with
/// equal keys merged and zero coefficients dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialFunction {
    dim: usize,
    terms: Vec<PotentialTerm>,
}

impl PotentialFunction {
    pub fn new(dim: usize, terms: Vec<PotentialTerm>) -> Result<Self, PotentialError> {
        for t in &terms {
            if t.exponent.len() != dim {
                return Err(PotentialError::BadParameter(
                    "term exponent length differs from dimension".into(),
                ));
            }
            if t.t_power.is_negative() {
                return Err(PotentialError::Novikov(NovikovError::NegativeExponent));
            }
        }
        let mut map: BTreeMap<(Vec<i64>, BigRational), GaussianRational> = BTreeMap::new();
        for t in terms {
            let key = (t.exponent, t.t_power);
            match map.get_mut(&key) {
                Some(c) => *c = c.clone() + t.coeff,
                None => {
                    map.insert(key, t.coeff);
                }
            }
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((exponent, t_power), coeff)| PotentialTerm {
                exponent,
                t_power,
                coeff,
            })
            .collect();
        Ok(PotentialFunction { dim, terms })
    }

    /// One monomial per facet: T^{−τᵢ} y^{vᵢ}. Requires every offset ≤ 0,
    /// i.e. the origin inside the polytope.
    pub fn from_polytope(p: &FacetSystem) -> Result<Self, PotentialError> {
        let mut terms = Vec::with_capacity(p.facets().len());
        for (i, f) in p.facets().iter().enumerate() {
            if f.offset.is_positive() {
                return Err(PotentialError::OriginOutside { facet: i });
            }
            let exponent = f
                .normal_i64()
                .ok_or(PotentialError::ExponentOverflow { facet: i })?;
            terms.push(PotentialTerm::unit(exponent, -f.offset.clone()));
        }
        PotentialFunction::new(p.dim(), terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    /// Formal partial derivative ∂W/∂y_j, with monomial exponents shifted
    /// down by one in slot j.
    pub fn partial(&self, j: usize) -> PotentialFunction {
        assert!(j < self.dim);
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponent[j] != 0)
            .map(|t| {
                let mut exponent = t.exponent.clone();
                exponent[j] -= 1;
                PotentialTerm {
                    exponent,
                    t_power: t.t_power.clone(),
                    coeff: t.coeff.scale_int(t.exponent[j]),
                }
            })
            .collect();
        PotentialFunction::new(self.dim, terms).expect("derivative preserves validity")
    }

    /// The T-exponent each monomial picks up on the fiber over u: for the
    /// facet monomial this is ℓᵢ(u) = ⟨vᵢ,u⟩ − τᵢ.
    pub fn fiber_energies(&self, u: &[BigRational]) -> Vec<BigRational> {
        self.terms
            .iter()
            .map(|t| {
                let dot: BigRational = t
                    .exponent
                    .iter()
                    .zip(u)
                    .map(|(&v, x)| BigRational::from_integer(v.into()) * x)
                    .sum();
                dot + &t.t_power
            })
            .collect()
    }

    /// Numerical value at T = t, y given.
    pub fn eval_at(&self, t: f64, y: &[Complex64]) -> Result<Complex64, PotentialError> {
        if !(t > 0.0 && t < 1.0) {
            return Err(PotentialError::BadParameter("t must lie in (0,1)".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let mut v = term.coeff.to_complex()
                * t.powf(term.t_power.to_f64().unwrap_or(f64::NAN));
            for (e, yj) in term.exponent.iter().zip(y) {
                v *= yj.powi(*e as i32);
            }
            acc += v;
        }
        Ok(acc)
    }
}

impl fmt::Display for PotentialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let one = GaussianRational::from_integer(1);
            let mut wrote = false;
            if t.coeff != one {
                write!(f, "({})", t.coeff)?;
                wrote = true;
            }
            if !t.t_power.is_zero() {
                if wrote {
                    write!(f, "*")?;
                }
                write!(f, "T^({})", t.t_power)?;
                wrote = true;
            }
            for (j, &e) in t.exponent.iter().enumerate() {
                if e != 0 {
                    if wrote {
                        write!(f, "*")?;
                    }
                    if e == 1 {
                        write!(f, "y{}", j + 1)?;
                    } else {
                        write!(f, "y{}^{}", j + 1, e)?;
                    }
                    wrote = true;
                }
            }
            if !wrote {
                write!(f, "1")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Numerical critical-point search.
// ---------------------------------------------------------------------------

/// Classification thresholds, pinned here so reports and tests agree.
///
/// A Hessian counts as nondegenerate only when |det H| clears a relative
/// threshold against the largest entry AND the smallest singular value is
/// not vanishing relative to the largest. Before either ratio test, the
/// Hessian must clear an absolute floor against the scale of the potential's
/// own terms at the point: a Hessian that is zero to machine precision
/// produces pure rounding noise in both ratios, and certificates built on
/// noise do not survive independent re-evaluation.
pub const DET_RATIO_THRESHOLD: f64 = 1e-8;
pub const SV_RATIO_THRESHOLD: f64 = 1e-6;
pub const HESSIAN_FLOOR_RATIO: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CritClass {
    Nondegenerate,
    /// Hessian has nontrivial kernel but is not identically negligible.
    Degenerate { kernel_dim: usize },
    /// Every Hessian entry is below the noise floor set by the term scale.
    TotallyDegenerate,
}

#[derive(Clone, Debug)]
pub struct CritPoint {
    /// Torus coordinates.
    pub y: Vec<Complex64>,
    /// Logarithmic coordinates with Im parts wrapped to (−π, π].
    pub w: Vec<Complex64>,
    /// ‖∇‖∞ divided by the term scale at the point.
    pub scaled_residual: f64,
    pub hessian: Vec<Vec<Complex64>>,
    pub det: Complex64,
    /// Singular values of the Hessian, ascending.
    pub singular_values: Vec<f64>,
    /// Right-singular vector for the smallest singular value.
    pub kernel_direction: Vec<Complex64>,
    pub class: CritClass,
    /// For points reported nondegenerate: whether the Kantorovich-style
    /// bound ‖H⁻¹∇‖ · L ≤ σ_min/2 holds (L a third-derivative bound), so
    /// an exact critical point with invertible Hessian provably exists
    /// nearby. Iterates stalling near a higher-order degeneracy have a
    /// scale-invariantly "healthy" Hessian that fails this bound.
    pub basin_certified: bool,
    /// log|y_j| / log t — the finite-t shadow of the valuation.
    pub val_proxy: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CritRun {
    pub t: f64,
    pub points: Vec<CritPoint>,
    pub attempted: usize,
    pub converged: usize,
    /// Starts that met the residual tolerance but whose nondegeneracy could
    /// not be certified by the basin bound; discarded, never reported.
    pub rejected: usize,
    /// Deduplicated representatives of the rejected clusters. These sit near
    /// higher-order degeneracies of the critical set and seed the transverse
    /// probing stage that samples one-parameter critical families.
    pub rejected_reps: Vec<CritPoint>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence tolerance on the scaled gradient residual.
    pub tol: f64,
    /// Relative distance in y below which two points are identified.
    pub dedup_tol: f64,
    /// Moduli are sampled as t^s with s uniform in ±(this multiple of the
    /// polytope's ∞-diameter).
    pub span: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            starts: 200,
            seed: 7,
            max_iter: 100,
            tol: 1e-11,
            dedup_tol: 1e-6,
            span: 2.0,
        }
    }
}

/// The potential specialized at T = t, prepared for fast evaluation in
/// logarithmic coordinates w (y = e^w).
pub struct NumericPotential {
    dim: usize,
    /// (exponent vector, coefficient · t^{t_power}).
    terms: Vec<(Vec<f64>, Complex64)>,
    /// max over terms of ‖v‖₁ — enters the third-derivative bound.
    v1max: f64,
}

impl NumericPotential {
    pub fn from_potential(p: &PotentialFunction, t: f64) -> Result<Self, PotentialError> {
        if !(t > 0.0 && t < 1.0) {
            return Err(PotentialError::BadParameter("t must lie in (0,1)".into()));
        }
        let terms: Vec<(Vec<f64>, Complex64)> = p
            .terms
            .iter()
            .map(|term| {
                let c = term.coeff.to_complex()
                    * t.powf(term.t_power.to_f64().unwrap_or(f64::NAN));
                let e: Vec<f64> = term.exponent.iter().map(|&x| x as f64).collect();
                (e, c)
            })
            .collect();
        let v1max = terms
            .iter()
            .map(|(e, _)| e.iter().map(|x| x.abs()).sum::<f64>())
            .fold(1.0, f64::max);
        Ok(NumericPotential {
            dim: p.dim,
            terms,
            v1max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn term_values(&self, w: &[Complex64]) -> Vec<Complex64> {
        self.terms
            .iter()
            .map(|(e, c)| {
                let dot: Complex64 = e
                    .iter()
                    .zip(w)
                    .map(|(&vj, wj)| wj * vj)
                    .sum();
                c * dot.exp()
            })
            .collect()
    }

    pub fn eval(&self, w: &[Complex64]) -> Complex64 {
        self.term_values(w).iter().sum()
    }

    /// Σᵢ |term value| — the natural scale for residual and floor tests.
    pub fn term_scale(&self, w: &[Complex64]) -> f64 {
        self.term_values(w).iter().map(|v| v.norm()).sum()
    }

    /// Logarithmic gradient G_j = ∂F/∂w_j = Σᵢ vᵢⱼ · (term i).
    pub fn gradient(&self, w: &[Complex64]) -> Vec<Complex64> {
        let tv = self.term_values(w);
        (0..self.dim)
            .map(|j| {
                self.terms
                    .iter()
                    .zip(&tv)
                    .map(|((e, _), v)| v * e[j])
                    .sum()
            })
            .collect()
    }

    /// Logarithmic Hessian H_jk = Σᵢ vᵢⱼ vᵢₖ · (term i); complex symmetric.
    pub fn hessian(&self, w: &[Complex64]) -> Vec<Vec<Complex64>> {
        let tv = self.term_values(w);
        (0..self.dim)
            .map(|j| {
                (0..self.dim)
                    .map(|k| {
                        self.terms
                            .iter()
                            .zip(&tv)
                            .map(|((e, _), v)| v * (e[j] * e[k]))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    fn scaled_residual(&self, w: &[Complex64]) -> f64 {
        let g = self.gradient(w);
        let scale = self.term_scale(w).max(1e-300);
        g.iter().map(|x| x.norm()).fold(0.0, f64::max) / scale
    }

    /// Third-derivative tensor T_jkl = Σᵢ vᵢⱼ vᵢₖ vᵢₗ · (term i).
    fn third_form(&self, w: &[Complex64]) -> Vec<Vec<Vec<Complex64>>> {
        let tv = self.term_values(w);
        (0..self.dim)
            .map(|j| {
                (0..self.dim)
                    .map(|k| {
                        (0..self.dim)
                            .map(|l| {
                                self.terms
                                    .iter()
                                    .zip(&tv)
                                    .map(|((e, _), v)| v * (e[j] * e[k] * e[l]))
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// x reduced into [0, m), m > 0. The `%`-based form works in core builds.
fn rem_euclid_f64(x: f64, m: f64) -> f64 {
    let r = x % m;
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

fn wrap_to_principal(w: &[Complex64]) -> Vec<Complex64> {
    w.iter()
        .map(|z| {
            let mut im = rem_euclid_f64(z.im, 2.0 * core::f64::consts::PI);
            if im > core::f64::consts::PI {
                im -= 2.0 * core::f64::consts::PI;
            }
            Complex64::new(z.re, im)
        })
        .collect()
}

fn rel_dist_y(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / (1.0 + x.norm().max(y.norm())))
        .fold(0.0, f64::max)
}

/// Relative cutoff under which a Hessian singular direction is treated as
/// kernel during the Newton solve. Keeping the step out of the near-kernel
/// stops iterates from drifting along one-parameter critical families.
const NEWTON_PINV_CUT: f64 = 1e-8;
/// Scaled residual considered to be at the numerical noise floor.
const NEWTON_RES_FLOOR: f64 = 1e-16;

/// Damped Newton iteration on the logarithmic gradient, with the linear
/// solve done by truncated pseudo-inverse. Iterates keep polishing past the
/// tolerance until they hit the noise floor or stop improving, so rank
/// decisions at the final point are made far from the tolerance boundary.
/// Returns the final w when its scaled residual meets the tolerance.
fn newton(np: &NumericPotential, start: &[Complex64], opts: &SolverOptions) -> Option<Vec<Complex64>> {
    let n = np.dim;
    let mut w = start.to_vec();
    let mut res = np.scaled_residual(&w);
    for _ in 0..opts.max_iter {
        if res <= NEWTON_RES_FLOOR {
            break;
        }
        let g = np.gradient(&w);
        let h = np.hessian(&w);
        let step = pseudo_solve(&h, &g, NEWTON_PINV_CUT);
        if step.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        // Clamp absurd steps so a near-singular Hessian cannot fling the
        // iterate out of floating-point range.
        let mx = step.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let clamp = if mx > 20.0 { 20.0 / mx } else { 1.0 };
        let mut alpha = clamp;
        let mut accepted = false;
        for _ in 0..10 {
            let trial: Vec<Complex64> = (0..n).map(|j| w[j] - step[j] * alpha).collect();
            if trial.iter().any(|z| z.re.abs() > 60.0) {
                alpha *= 0.5;
                continue;
            }
            let tres = np.scaled_residual(&trial);
            if tres < res {
                w = trial;
                res = tres;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= opts.tol {
        Some(w)
    } else {
        None
    }
}

/// Newton iteration constrained to move transversally to a fixed direction:
/// the component of every step along `dir` is projected out. Near a
/// one-parameter critical family with tangent `dir`, the unconstrained
/// iteration can lower the residual by sliding along the family toward more
/// degenerate points; the projection removes that mode, so the iterate
/// converges onto the family at its current position.
fn newton_transverse(
    np: &NumericPotential,
    start: &[Complex64],
    dir: &[Complex64],
    opts: &SolverOptions,
) -> Option<Vec<Complex64>> {
    let n = np.dim;
    let dnorm2: f64 = dir.iter().map(|z| z.norm_sqr()).sum();
    if dnorm2 == 0.0 {
        return newton(np, start, opts);
    }
    let mut w = start.to_vec();
    let mut res = np.scaled_residual(&w);
    for _ in 0..opts.max_iter {
        if res <= NEWTON_RES_FLOOR {
            break;
        }
        let g = np.gradient(&w);
        let h = np.hessian(&w);
        let mut step = pseudo_solve(&h, &g, NEWTON_PINV_CUT);
        let along: Complex64 = dir.iter().zip(&step).map(|(d, s)| d.conj() * s).sum();
        for (sj, dj) in step.iter_mut().zip(dir) {
            *sj -= dj * (along / dnorm2);
        }
        if step.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        let mx = step.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let clamp = if mx > 20.0 { 20.0 / mx } else { 1.0 };
        let mut alpha = clamp;
        let mut accepted = false;
        for _ in 0..10 {
            let trial: Vec<Complex64> = (0..n).map(|j| w[j] - step[j] * alpha).collect();
            if trial.iter().any(|z| z.re.abs() > 60.0) {
                alpha *= 0.5;
                continue;
            }
            let tres = np.scaled_residual(&trial);
            if tres < res {
                w = trial;
                res = tres;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= opts.tol {
        Some(w)
    } else {
        None
    }
}

/// Directions v with T(v, v) = 0 for the third-derivative tensor at w — the
/// tangent cone of the critical set at a point where both the gradient and
/// the Hessian vanish. Solved by Gauss–Newton on the quadratic system plus
/// a random affine normalization, from several random starts; solutions are
/// canonicalized projectively and deduplicated.
fn tangent_cone_directions(
    np: &NumericPotential,
    w: &[Complex64],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Complex64>> {
    let n = np.dim;
    let t3 = np.third_form(w);
    let tscale = t3
        .iter()
        .flat_map(|m| m.iter().flat_map(|r| r.iter()))
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut dirs: Vec<Vec<Complex64>> = Vec::new();
    for _ in 0..40 {
        let a: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut ok = false;
        for _ in 0..60 {
            // Residual: n quadrics Q_j(v) = Σ T_jkl v_k v_l, plus ⟨a,v⟩ − 1.
            let mut f: Vec<Complex64> = (0..n)
                .map(|j| {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        for l in 0..n {
                            s += t3[j][k][l] * v[k] * v[l];
                        }
                    }
                    s
                })
                .collect();
            let aff: Complex64 =
                a.iter().zip(&v).map(|(x, y)| x * y).sum::<Complex64>() - 1.0;
            f.push(aff);
            let fn2: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if fn2 <= 1e-12 * tscale.max(1.0) {
                ok = true;
                break;
            }
            // Jacobian rows: dQ_j/dv_m = 2 Σ_l T_jml v_l; affine row: a_m.
            let mut jac: Vec<Vec<Complex64>> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|m| {
                            let mut s = Complex64::new(0.0, 0.0);
                            for l in 0..n {
                                s += t3[j][m][l] * v[l];
                            }
                            s * 2.0
                        })
                        .collect()
                })
                .collect();
            jac.push(a.clone());
            let step = pseudo_solve(&jac, &f, 1e-10);
            let sn = step.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !sn.is_finite() || sn > 1e6 {
                break;
            }
            for (vj, sj) in v.iter_mut().zip(&step) {
                *vj -= sj;
            }
            if sn < 1e-14 {
                // Stalled; final residual check happens next pass.
            }
        }
        if !ok {
            continue;
        }
        let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if vmax < 1e-8 {
            continue;
        }
        let cand = canonical_direction(&v);
        if dirs.iter().all(|d| direction_dist(d, &cand) > 1e-4) {
            dirs.push(cand);
        }
    }
    dirs
}

fn classify(np: &NumericPotential, w: &[Complex64]) -> CritPoint {
    let n = np.dim;
    let t_scale = np.term_scale(w);
    let h = np.hessian(w);
    let hess_max = h
        .iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let det = complex_det(&h);
    let (sv, kernel_direction) = singular_values(&h);
    let mut basin_certified = true;
    let class = if hess_max < HESSIAN_FLOOR_RATIO * t_scale {
        CritClass::TotallyDegenerate
    } else {
        let sv_max = sv.last().copied().unwrap_or(0.0);
        let kernel_dim = sv.iter().filter(|&&s| s < SV_RATIO_THRESHOLD * sv_max).count();
        let det_ok = det.norm() > DET_RATIO_THRESHOLD * hess_max.powi(n as i32);
        if det_ok && kernel_dim == 0 {
            // Both ratio tests are scale-invariant, so they also pass at an
            // iterate stalled near a point where the whole Hessian vanishes
            // (there H ≈ δ·H₁ with H₁ generic). Demand in addition that the
            // Newton step times a third-derivative bound stays below the
            // smallest singular value: then H is provably invertible on a
            // ball containing an exact critical point.
            let g = np.gradient(w);
            let sv_min = sv.first().copied().unwrap_or(0.0);
            basin_certified = match complex_solve(&h, &g) {
                Some(step) => {
                    let sn = step.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    let lip = t_scale * np.v1max.powi(3);
                    sn * lip <= 0.5 * sv_min
                }
                None => false,
            };
            CritClass::Nondegenerate
        } else {
            CritClass::Degenerate {
                kernel_dim: kernel_dim.max(1),
            }
        }
    };
    let wc = wrap_to_principal(w);
    let y: Vec<Complex64> = wc.iter().map(|z| z.exp()).collect();
    CritPoint {
        y,
        w: wc,
        scaled_residual: np.scaled_residual(w),
        hessian: h,
        det,
        singular_values: sv,
        kernel_direction,
        class,
        basin_certified,
        val_proxy: Vec::new(),
    }
}

fn lex_key(y: &[Complex64]) -> Vec<f64> {
    let q = |x: f64| (x / 1e-9).round() * 1e-9;
    y.iter().flat_map(|z| [q(z.re), q(z.im)]).collect()
}

/// Multistart search for critical points of the potential at T = t.
/// Deterministic for a fixed seed; converged points are deduplicated and
/// sorted lexicographically by coordinates.
pub fn find_critical_points(
    potential: &PotentialFunction,
    polytope: &FacetSystem,
    t: f64,
    opts: &SolverOptions,
) -> Result<CritRun, PotentialError> {
    if potential.dim == 0 {
        return Err(PotentialError::BadParameter(
            "no torus coordinates to solve in".into(),
        ));
    }
    let np = NumericPotential::from_potential(potential, t)?;
    let diam = polytope.diameter_linf().to_f64().unwrap_or(1.0).max(1.0);
    let exp_range = opts.span * diam;
    let ln_t = t.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut points: Vec<CritPoint> = Vec::new();
    let mut converged = 0usize;
    let mut rejected = 0usize;
    let mut rejected_reps: Vec<CritPoint> = Vec::new();
    let accept = |cp: CritPoint, points: &mut Vec<CritPoint>| {
        match points
            .iter_mut()
            .find(|p| rel_dist_y(&p.y, &cp.y) < opts.dedup_tol)
        {
            Some(existing) => {
                if cp.scaled_residual < existing.scaled_residual {
                    *existing = cp;
                }
            }
            None => points.push(cp),
        }
    };
    for _ in 0..opts.starts {
        let start: Vec<Complex64> = (0..np.dim)
            .map(|_| {
                let s: f64 = rng.gen_range(-exp_range..exp_range);
                let phase: f64 = rng.gen_range(0.0..2.0 * core::f64::consts::PI);
                Complex64::new(s * ln_t, phase)
            })
            .collect();
        let Some(w) = newton(&np, &start, opts) else {
            continue;
        };
        converged += 1;
        let mut cp = classify(&np, &w);
        cp.val_proxy = cp.y.iter().map(|z| z.norm().ln() / ln_t).collect();
        if cp.class == CritClass::Nondegenerate && !cp.basin_certified {
            rejected += 1;
            // Cluster the rejects; a loose radius suffices because stalled
            // iterates scatter around the degeneracy that trapped them.
            match rejected_reps
                .iter_mut()
                .find(|p| rel_dist_y(&p.y, &cp.y) < 1e-2)
            {
                Some(existing) => {
                    if cp.scaled_residual < existing.scaled_residual {
                        *existing = cp;
                    }
                }
                None => rejected_reps.push(cp),
            }
            continue;
        }
        accept(cp, &mut points);
    }
    // Transverse probing stage. Unconstrained iteration cannot land on a
    // positive-dimensional critical family away from its most degenerate
    // points: the residual decreases along the family, so iterates slide to
    // the locus that trapped the rejected starts. From each rejected cluster,
    // recover the tangent cone of the critical set out of third derivatives
    // and re-solve transversally to each cone direction from small offsets
    // along it, which parks the iterate on the family nearby.
    for rep in &rejected_reps {
        let dirs = tangent_cone_directions(&np, &rep.w, &mut rng);
        for dir in dirs.iter().take(6) {
            for eps in [0.1, -0.1, 0.2, -0.2] {
                let start: Vec<Complex64> =
                    rep.w.iter().zip(dir).map(|(wj, dj)| wj + dj * eps).collect();
                let Some(w) = newton_transverse(&np, &start, dir, opts) else {
                    continue;
                };
                let mut cp = classify(&np, &w);
                if matches!(cp.class, CritClass::Nondegenerate) {
                    // Either a true isolated point (already found by stage
                    // one if certified) or another stall; never report from
                    // this stage.
                    continue;
                }
                cp.val_proxy = cp.y.iter().map(|z| z.norm().ln() / ln_t).collect();
                accept(cp, &mut points);
            }
        }
    }
    points.sort_by(|a, b| {
        lex_key(&a.y)
            .partial_cmp(&lex_key(&b.y))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    rejected_reps.sort_by(|a, b| {
        lex_key(&a.y)
            .partial_cmp(&lex_key(&b.y))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(CritRun {
        t,
        points,
        attempted: opts.starts,
        converged,
        rejected,
        rejected_reps,
    })
}

// ---------------------------------------------------------------------------
// Degenerate families.
// ---------------------------------------------------------------------------

/// Canonical representative of a projective complex direction: scaled so
/// the largest-magnitude component equals 1.
fn canonical_direction(v: &[Complex64]) -> Vec<Complex64> {
    let mut best = 0usize;
    let mut best_norm = 0.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_norm {
            best_norm = z.norm();
            best = i;
        }
    }
    if best_norm == 0.0 {
        return v.to_vec();
    }
    let pivot = v[best];
    v.iter().map(|z| z / pivot).collect()
}

/// Distance between the complex lines spanned by `a` and `b`: the sine of
/// their principal angle. Identifies antipodal and phase-rotated vectors,
/// which keeps one family from splitting into several clusters when the
/// kernel pivot flips between members.
fn direction_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let cos = (inner.norm() / (na * nb)).min(1.0);
    (1.0 - cos * cos).sqrt()
}

#[derive(Clone, Debug)]
pub struct FamilyCluster {
    /// Canonical kernel direction shared by the cluster (w-space tangent).
    pub tangent: Vec<Complex64>,
    /// Number of member points in each run.
    pub members_per_run: Vec<usize>,
    /// A sample member (run index, point index) for each run that has one.
    pub samples: Vec<(usize, usize)>,
    /// True when stepping along the tangent and re-solving lands on a
    /// distinct critical point of the same degenerate kind.
    pub confirmed: bool,
}

/// Groups rank-one-degenerate points (kernel dimension 1, including totally
/// degenerate points with a clear smallest direction excluded — those have
/// no meaningful tangent) by their Hessian kernel direction, across runs.
pub fn cluster_families(runs: &[CritRun], potential: &PotentialFunction, opts: &SolverOptions) -> Vec<FamilyCluster> {
    let mut clusters: Vec<FamilyCluster> = Vec::new();
    for (ri, run) in runs.iter().enumerate() {
        for (pi, p) in run.points.iter().enumerate() {
            if !matches!(p.class, CritClass::Degenerate { kernel_dim: 1 }) {
                continue;
            }
            let dir = canonical_direction(&p.kernel_direction);
            match clusters
                .iter_mut()
                .find(|c| direction_dist(&c.tangent, &dir) < 1e-2)
            {
                Some(c) => {
                    c.members_per_run[ri] += 1;
                    if c.samples.iter().all(|&(r, _)| r != ri) {
                        c.samples.push((ri, pi));
                    }
                }
                None => {
                    let mut members_per_run = vec![0usize; runs.len()];
                    members_per_run[ri] = 1;
                    clusters.push(FamilyCluster {
                        tangent: dir,
                        members_per_run,
                        samples: vec![(ri, pi)],
                        confirmed: false,
                    });
                }
            }
        }
    }
    for c in &mut clusters {
        c.confirmed = !c.samples.is_empty()
            && c.samples.iter().all(|&(ri, pi)| {
                confirm_family_member(potential, runs, ri, pi, &c.tangent, opts)
            });
    }
    clusters
}

/// Steps off a degenerate point along its kernel direction and re-solves
/// transversally to it. A genuine one-parameter family yields a distinct
/// nearby critical point at the stepped-to position; an isolated degenerate
/// point leaves the transverse iteration nothing to converge to but itself.
fn confirm_family_member(
    potential: &PotentialFunction,
    runs: &[CritRun],
    ri: usize,
    pi: usize,
    tangent: &[Complex64],
    opts: &SolverOptions,
) -> bool {
    let run = &runs[ri];
    let p = &run.points[pi];
    let Ok(np) = NumericPotential::from_potential(potential, run.t) else {
        return false;
    };
    let scale = 1e-3 * (1.0 + p.w.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let tmax = tangent.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-12);
    for sign in [1.0, -1.0] {
        let start: Vec<Complex64> = p
            .w
            .iter()
            .zip(tangent)
            .map(|(wj, dj)| wj + dj * (sign * scale / tmax))
            .collect();
        let Some(w2) = newton_transverse(&np, &start, tangent, opts) else {
            continue;
        };
        let y2: Vec<Complex64> = wrap_to_principal(&w2).iter().map(|z| z.exp()).collect();
        if rel_dist_y(&p.y, &y2) > 5.0 * opts.dedup_tol {
            let cp = classify(&np, &w2);
            if !matches!(cp.class, CritClass::Nondegenerate) {
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Cross-t chains and valuation regression.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Chain {
    /// (run index, point index) per run the chain visits, in run order.
    pub members: Vec<(usize, usize)>,
    /// Least-squares slope of log|y_j| against log t, per coordinate.
    pub valuations: Vec<f64>,
    /// Coefficient of determination of each regression.
    pub r_squared: Vec<f64>,
    /// min over facets of ℓ(valuations)/‖v‖₁; positive means interior.
    pub interior_slack: f64,
    /// Nondegenerate only if every member point is.
    pub class: CritClass,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub runs: Vec<CritRun>,
    pub chains: Vec<Chain>,
    pub families: Vec<FamilyCluster>,
}

fn circular_dist(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let d = rem_euclid_f64(a - b, two_pi);
    d.min(two_pi - d)
}

fn point_signature_dist(a: &CritPoint, b: &CritPoint) -> f64 {
    let dv = a
        .val_proxy
        .iter()
        .zip(&b.val_proxy)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let dp = a
        .y
        .iter()
        .zip(&b.y)
        .map(|(x, y)| circular_dist(x.arg(), y.arg()))
        .fold(0.0, f64::max);
    dv + 0.5 * dp
}

fn regress(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let pred = my + slope * (x - mx);
            (y - pred) * (y - pred)
        })
        .sum();
    let r2 = if ss_tot < 1e-18 {
        if ss_res < 1e-12 { 1.0 } else { 0.0 }
    } else {
        1.0 - ss_res / ss_tot
    };
    (slope, r2)
}

/// Runs the solver at each t, matches points across runs by phase and
/// valuation proxy, regresses valuations, and clusters degenerate families.
pub fn analyze(
    potential: &PotentialFunction,
    polytope: &FacetSystem,
    ts: &[f64],
    opts: &SolverOptions,
) -> Result<Analysis, PotentialError> {
    if ts.is_empty() {
        return Err(PotentialError::BadParameter("need at least one t sample".into()));
    }
    let mut ts_sorted = ts.to_vec();
    ts_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let mut runs = Vec::with_capacity(ts_sorted.len());
    for &t in &ts_sorted {
        runs.push(find_critical_points(potential, polytope, t, opts)?);
    }

    // Greedy chain extension run by run.
    let mut chains_idx: Vec<Vec<(usize, usize)>> =
        (0..runs[0].points.len()).map(|pi| vec![(0, pi)]).collect();
    for ri in 1..runs.len() {
        let mut taken = vec![false; runs[ri].points.len()];
        for chain in &mut chains_idx {
            let &(lr, lp) = chain.last().unwrap();
            if lr != ri - 1 {
                continue;
            }
            let last = &runs[lr].points[lp];
            let mut best: Option<(usize, f64)> = None;
            for (pi, p) in runs[ri].points.iter().enumerate() {
                if taken[pi] {
                    continue;
                }
                let d = point_signature_dist(last, p);
                if d < 0.35 && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((pi, d));
                }
            }
            if let Some((pi, _)) = best {
                taken[pi] = true;
                chain.push((ri, pi));
            }
        }
        for (pi, t) in taken.iter().enumerate() {
            if !t {
                chains_idx.push(vec![(ri, pi)]);
            }
        }
    }

    let chains = chains_idx
        .into_iter()
        .map(|members| {
            let pts: Vec<&CritPoint> = members.iter().map(|&(r, p)| &runs[r].points[p]).collect();
            let ln_ts: Vec<f64> = members.iter().map(|&(r, _)| runs[r].t.ln()).collect();
            let dim = pts[0].y.len();
            let mut valuations = Vec::with_capacity(dim);
            let mut r_squared = Vec::with_capacity(dim);
            for j in 0..dim {
                let ys: Vec<f64> = pts.iter().map(|p| p.y[j].norm().ln()).collect();
                if members.len() >= 2 {
                    let (s, r2) = regress(&ln_ts, &ys);
                    valuations.push(s);
                    r_squared.push(r2);
                } else {
                    valuations.push(pts[0].val_proxy[j]);
                    r_squared.push(f64::NAN);
                }
            }
            let interior_slack = polytope.min_scaled_slack(&valuations);
            let class = if pts.iter().all(|p| p.class == CritClass::Nondegenerate) {
                CritClass::Nondegenerate
            } else if pts.iter().all(|p| p.class == CritClass::TotallyDegenerate) {
                CritClass::TotallyDegenerate
            } else {
                let k = pts
                    .iter()
                    .map(|p| match p.class {
                        CritClass::Degenerate { kernel_dim } => kernel_dim,
                        _ => 0,
                    })
                    .max()
                    .unwrap_or(1);
                CritClass::Degenerate { kernel_dim: k.max(1) }
            };
            Chain {
                members,
                valuations,
                r_squared,
                interior_slack,
                class,
            }
        })
        .collect();

    let families = cluster_families(&runs, potential, opts);
    Ok(Analysis {
        runs,
        chains,
        families,
    })
}

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------

/// Behavioral description attached to every certificate this module emits.
pub const CERT_LABEL: &str =
    "nondegenerate critical chain with interior valuations: the torus fiber over the \
     valuation point carries a nonvanishing critical value of the potential";

#[derive(Clone, Debug)]
pub struct CertEvidence {
    pub t: f64,
    pub y: Vec<Complex64>,
    pub scaled_residual: f64,
    /// |det H| / (max |H entry|)^dim.
    pub det_ratio: f64,
    /// σ_min / σ_max of the Hessian.
    pub sv_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct FiberCertificate {
    pub valuations: Vec<f64>,
    pub r_squared: Vec<f64>,
    pub interior_slack: f64,
    pub label: &'static str,
    /// Echo of the user-asserted hypothesis flag on the polytope; never
    /// derived here.
    pub small_resolution_hypothesis: bool,
    pub evidence: Vec<CertEvidence>,
    /// Largest scaled residual over a fresh gradient evaluation at every
    /// evidence point, independent of solver state.
    pub fresh_residual: f64,
}

/// Minimum interior slack (in valuation units) a chain must clear.
pub const CERT_INTERIOR_MARGIN: f64 = 1e-2;
/// Fresh re-evaluation must stay within this factor of the solver tolerance.
pub const CERT_FRESH_FACTOR: f64 = 100.0;

/// Builds certificates for every chain that is nondegenerate at each of its
/// points, spans every run, has interior valuations with margin, and whose
/// evidence survives a fresh residual evaluation.
pub fn certify(
    analysis: &Analysis,
    potential: &PotentialFunction,
    polytope: &FacetSystem,
    opts: &SolverOptions,
) -> Result<Vec<FiberCertificate>, PotentialError> {
    let mut certs = Vec::new();
    for chain in &analysis.chains {
        if chain.class != CritClass::Nondegenerate {
            continue;
        }
        if chain.members.len() != analysis.runs.len() {
            continue;
        }
        let interior_ok = chain.interior_slack > CERT_INTERIOR_MARGIN;
        if !interior_ok {
            continue;
        }
        let mut evidence = Vec::new();
        let mut fresh = 0.0f64;
        let mut sound = true;
        for &(ri, pi) in &chain.members {
            let run = &analysis.runs[ri];
            let p = &run.points[pi];
            let np = NumericPotential::from_potential(potential, run.t)?;
            let w: Vec<Complex64> = p.y.iter().map(|z| z.ln()).collect();
            let fr = np.scaled_residual(&w);
            fresh = fresh.max(fr);
            if fr > CERT_FRESH_FACTOR * opts.tol {
                sound = false;
                break;
            }
            let hess_max = p
                .hessian
                .iter()
                .flat_map(|r| r.iter())
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let n = p.y.len() as i32;
            let sv_max = p.singular_values.last().copied().unwrap_or(0.0);
            let sv_min = p.singular_values.first().copied().unwrap_or(0.0);
            evidence.push(CertEvidence {
                t: run.t,
                y: p.y.clone(),
                scaled_residual: p.scaled_residual,
                det_ratio: p.det.norm() / hess_max.powi(n).max(1e-300),
                sv_ratio: if sv_max > 0.0 { sv_min / sv_max } else { 0.0 },
            });
        }
        if !sound {
            continue;
        }
        certs.push(FiberCertificate {
            valuations: chain.valuations.clone(),
            r_squared: chain.r_squared.clone(),
            interior_slack: chain.interior_slack,
            label: CERT_LABEL,
            small_resolution_hypothesis: polytope.small_resolution,
            evidence,
            fresh_residual: fresh,
        });
    }
    Ok(certs)
}

// ---------------------------------------------------------------------------
// Exact verification of claimed one-parameter critical families.
// ---------------------------------------------------------------------------

/// One coordinate of a monomial family: y_j(s) = coeff · s^{s_power} ·
/// T^{t_power}.
#[derive(Clone, Debug)]
pub struct FamilyComponent {
    pub coeff: GaussianRational,
    pub s_power: i64,
    pub t_power: BigRational,
}

impl FamilyComponent {
    pub fn constant(c: GaussianRational) -> Self {
        FamilyComponent {
            coeff: c,
            s_power: 0,
            t_power: BigRational::zero(),
        }
    }
}

fn gaussian_pow(base: &GaussianRational, e: i64) -> Result<GaussianRational, PotentialError> {
    let mut b = base.clone();
    if e < 0 {
        let n = b.norm_sqr();
        if n.is_zero() {
            return Err(PotentialError::InadmissibleFamily(
                "zero coordinate cannot be inverted".into(),
            ));
        }
        b = b.conj().div_rational(&n);
    }
    let mut out = GaussianRational::from_integer(1);
    for _ in 0..e.unsigned_abs() {
        out = out * b.clone();
    }
    Ok(out)
}

/// Substitutes the monomial family into every partial derivative of the
/// potential and checks each vanishes identically as a Laurent polynomial
/// in s with coefficients in the Novikov ring. Exact; no sampling.
pub fn verify_family_exact(
    potential: &PotentialFunction,
    family: &[FamilyComponent],
) -> Result<bool, PotentialError> {
    if family.len() != potential.dim {
        return Err(PotentialError::BadParameter(
            "family component count differs from dimension".into(),
        ));
    }
    for j in 0..potential.dim {
        let dj = potential.partial(j);
        // Collect the coefficient of each (s-power, T-power) monomial.
        // Individual monomials may pick up negative T-exponents during
        // substitution even when the family is perfectly good; only the
        // merged coefficients matter, and they must all vanish.
        let mut by_monomial: BTreeMap<(i64, BigRational), GaussianRational> = BTreeMap::new();
        for term in dj.terms() {
            let mut coeff = term.coeff.clone();
            let mut s_exp = 0i64;
            let mut t_exp = term.t_power.clone();
            for (comp, &e) in family.iter().zip(&term.exponent) {
                if e == 0 {
                    continue;
                }
                coeff = coeff * gaussian_pow(&comp.coeff, e)?;
                s_exp += comp.s_power * e;
                t_exp += &comp.t_power * BigRational::from_integer(e.into());
            }
            let key = (s_exp, t_exp);
            match by_monomial.get_mut(&key) {
                Some(c) => *c = c.clone() + coeff,
                None => {
                    by_monomial.insert(key, coeff);
                }
            }
        }
        if by_monomial.values().any(|c| !c.is_zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Numerical spot check of a claimed family: samples points y(s) at several
/// moduli and phases of s and confirms the scaled gradient residual stays
/// below `tol` at each.
pub fn verify_family_sampled(
    potential: &PotentialFunction,
    family: &[FamilyComponent],
    t: f64,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<f64, PotentialError> {
    if family.len() != potential.dim {
        return Err(PotentialError::BadParameter(
            "family component count differs from dimension".into(),
        ));
    }
    let np = NumericPotential::from_potential(potential, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples.max(1) {
        let modulus = t.powf(rng.gen_range(0.1..0.9));
        let phase = rng.gen_range(0.0..2.0 * core::f64::consts::PI);
        let s = Complex64::from_polar(modulus, phase);
        let y: Vec<Complex64> = family
            .iter()
            .map(|c| {
                c.coeff.to_complex()
                    * s.powi(c.s_power as i32)
                    * t.powf(c.t_power.to_f64().unwrap_or(f64::NAN))
            })
            .collect();
        let w: Vec<Complex64> = y.iter().map(|z| z.ln()).collect();
        worst = worst.max(np.scaled_residual(&w));
    }
    if worst > tol {
        return Err(PotentialError::InadmissibleFamily(alloc::format!(
            "scaled residual {worst:.3e} exceeds tolerance"
        )));
    }
    Ok(worst)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn octahedron() -> FacetSystem {
        crate::polytope::tests::octahedron(1)
    }

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_integer(n)
    }

    #[test]
    fn potential_from_octahedron_has_expected_terms() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        // One monomial per facet: y₂y₃, T/y₁, T/y₂, y₁y₃, y₂, T/(y₁y₃),
        // T/(y₂y₃), y₁ — in canonical sorted order.
        let mut expected = vec![
            PotentialTerm::unit(vec![0, 1, 1], r(0)),
            PotentialTerm::unit(vec![-1, 0, 0], r(1)),
            PotentialTerm::unit(vec![0, -1, 0], r(1)),
            PotentialTerm::unit(vec![1, 0, 1], r(0)),
            PotentialTerm::unit(vec![0, 1, 0], r(0)),
            PotentialTerm::unit(vec![-1, 0, -1], r(1)),
            PotentialTerm::unit(vec![0, -1, -1], r(1)),
            PotentialTerm::unit(vec![1, 0, 0], r(0)),
        ];
        expected.sort_by_key(|a| (a.exponent.clone(), a.t_power.clone()));
        assert_eq!(w.terms(), expected.as_slice());
    }

    #[test]
    fn partial_derivative_matches_hand_computation() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let d1 = w.partial(0);
        // ∂W/∂y₁ = −T/y₁² + y₃ − T/(y₁²y₃) + 1.
        let expected = PotentialFunction::new(
            3,
            vec![
                PotentialTerm {
                    exponent: vec![-2, 0, 0],
                    t_power: r(1),
                    coeff: g(-1),
                },
                PotentialTerm::unit(vec![0, 0, 1], r(0)),
                PotentialTerm {
                    exponent: vec![-2, 0, -1],
                    t_power: r(1),
                    coeff: g(-1),
                },
                PotentialTerm::unit(vec![0, 0, 0], r(0)),
            ],
        )
        .unwrap();
        assert_eq!(d1, expected);
    }

    #[test]
    fn fiber_energies_at_center_are_equal() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let u = vec![rq(1, 2), rq(1, 2), r(0)];
        let energies = w.fiber_energies(&u);
        assert_eq!(energies.len(), 8);
        assert!(energies.iter().all(|e| *e == rq(1, 2)));
    }

    #[test]
    fn origin_must_be_inside() {
        // Shift the octahedron away from the origin: offsets go positive.
        let p = octahedron();
        let shifted = p.translate(&[r(5), r(5), r(5)]).unwrap();
        assert!(matches!(
            PotentialFunction::from_polytope(&shifted),
            Err(PotentialError::OriginOutside { .. })
        ));
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let np = NumericPotential::from_potential(&w, 0.3).unwrap();
        let w0 = vec![
            Complex64::new(0.21, 0.4),
            Complex64::new(-0.33, 1.1),
            Complex64::new(0.05, -0.7),
        ];
        let g = np.gradient(&w0);
        let h = np.hessian(&w0);
        let step = 1e-6;
        for j in 0..3 {
            let mut wp = w0.clone();
            let mut wm = w0.clone();
            wp[j] += Complex64::new(step, 0.0);
            wm[j] -= Complex64::new(step, 0.0);
            let fd = (np.eval(&wp) - np.eval(&wm)) / (2.0 * step);
            assert!((fd - g[j]).norm() < 1e-7, "gradient slot {j}");
            for k in 0..3 {
                let fdh = (np.gradient(&wp)[k] - np.gradient(&wm)[k]) / (2.0 * step);
                assert!((fdh - h[j][k]).norm() < 1e-6, "hessian {j},{k}");
            }
        }
    }

    #[test]
    fn symbolic_and_numeric_evaluation_agree() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let np = NumericPotential::from_potential(&w, 0.25).unwrap();
        let w0 = vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.4, 0.9),
            Complex64::new(0.3, -0.5),
        ];
        let y: Vec<Complex64> = w0.iter().map(|z| z.exp()).collect();
        let a = np.eval(&w0);
        let b = w.eval_at(0.25, &y).unwrap();
        assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    /// The isolated critical points sit at y₁ = ±√t, y₂ = y₁, y₃ = 1 with
    /// logarithmic Hessian ±√t·[[4,0,2],[0,4,2],[2,2,4]] (determinant
    /// ±32 t^{3/2}).
    #[test]
    fn isolated_critical_point_is_found_and_classified() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let t = 0.2f64;
        let np = NumericPotential::from_potential(&w, t).unwrap();
        let sq = t.sqrt();
        let start = vec![
            Complex64::new(sq.ln() + 0.03, 0.01),
            Complex64::new(sq.ln() - 0.02, -0.015),
            Complex64::new(0.02, 0.01),
        ];
        let opts = SolverOptions::default();
        let wc = newton(&np, &start, &opts).expect("newton converges");
        let cp = classify(&np, &wc);
        assert_eq!(cp.class, CritClass::Nondegenerate);
        assert!((cp.y[0] - Complex64::new(sq, 0.0)).norm() < 1e-8);
        assert!((cp.y[1] - Complex64::new(sq, 0.0)).norm() < 1e-8);
        assert!((cp.y[2] - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        let expected = [[4.0, 0.0, 2.0], [0.0, 4.0, 2.0], [2.0, 2.0, 4.0]];
        for j in 0..3 {
            for k in 0..3 {
                let want = sq * expected[j][k];
                assert!((cp.hessian[j][k] - Complex64::new(want, 0.0)).norm() < 1e-8);
            }
        }
        assert!((cp.det.norm() - 32.0 * t.powf(1.5)).abs() < 1e-8);
    }

    /// Points with y₂ = −y₁, y₃ = −1 are critical for every y₁, with a
    /// rank-2 Hessian whose kernel is the family tangent (1,1,0) in
    /// logarithmic coordinates.
    #[test]
    fn family_point_is_degenerate_with_expected_tangent() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let t = 0.2f64;
        let np = NumericPotential::from_potential(&w, t).unwrap();
        let y1 = Complex64::new(0.37, 0.11);
        let wstart = vec![y1.ln(), (-y1).ln(), Complex64::new(0.0, core::f64::consts::PI)];
        assert!(np.scaled_residual(&wstart) < 1e-14);
        let cp = classify(&np, &wstart);
        assert_eq!(cp.class, CritClass::Degenerate { kernel_dim: 1 });
        let dir = canonical_direction(&cp.kernel_direction);
        let want = [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!(direction_dist(&dir, &want) < 1e-6);
    }

    /// Where two families intersect (y₁² = −t) the Hessian vanishes
    /// identically; the floor guard must call this totally degenerate
    /// rather than trusting ratios of rounding noise.
    #[test]
    fn family_intersection_is_totally_degenerate() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let t = 0.2f64;
        let np = NumericPotential::from_potential(&w, t).unwrap();
        let y1 = Complex64::new(0.0, t.sqrt());
        let wpt = vec![y1.ln(), (-y1).ln(), Complex64::new(0.0, core::f64::consts::PI)];
        assert!(np.scaled_residual(&wpt) < 1e-12);
        let cp = classify(&np, &wpt);
        assert_eq!(cp.class, CritClass::TotallyDegenerate);
    }

    #[test]
    fn multistart_finds_both_isolated_points() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let p = octahedron();
        let run = find_critical_points(&w, &p, 0.2, &SolverOptions::default()).unwrap();
        assert!(run.converged > 0);
        let nondeg: Vec<&CritPoint> = run
            .points
            .iter()
            .filter(|p| p.class == CritClass::Nondegenerate)
            .collect();
        assert_eq!(nondeg.len(), 2, "exactly the ±√t pair");
        let sq = 0.2f64.sqrt();
        for p in &nondeg {
            assert!((p.y[0].norm() - sq).abs() < 1e-8);
            assert!((p.y[1].norm() - sq).abs() < 1e-8);
            assert!((p.y[2].norm() - 1.0).abs() < 1e-8);
            assert!((p.y[0] - p.y[1]).norm() < 1e-8);
            // val proxy (1/2, 1/2, 0).
            assert!((p.val_proxy[0] - 0.5).abs() < 1e-6);
            assert!((p.val_proxy[2]).abs() < 1e-6);
        }
        // And the two points differ by sign.
        assert!((nondeg[0].y[0] + nondeg[1].y[0]).norm() < 1e-8);
        // Degenerate family points show up too.
        assert!(run
            .points
            .iter()
            .any(|p| matches!(p.class, CritClass::Degenerate { .. })));
    }

    #[test]
    fn determinism_for_fixed_seed() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let p = octahedron();
        let a = find_critical_points(&w, &p, 0.2, &SolverOptions::default()).unwrap();
        let b = find_critical_points(&w, &p, 0.2, &SolverOptions::default()).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.y, y.y);
            assert_eq!(x.class, y.class);
        }
    }

    fn family1() -> Vec<FamilyComponent> {
        // y = (s, −s, −1).
        vec![
            FamilyComponent { coeff: g(1), s_power: 1, t_power: r(0) },
            FamilyComponent { coeff: g(-1), s_power: 1, t_power: r(0) },
            FamilyComponent::constant(g(-1)),
        ]
    }

    fn family2() -> Vec<FamilyComponent> {
        // y = (s, −s, T/s²).
        vec![
            FamilyComponent { coeff: g(1), s_power: 1, t_power: r(0) },
            FamilyComponent { coeff: g(-1), s_power: 1, t_power: r(0) },
            FamilyComponent { coeff: g(1), s_power: -2, t_power: r(1) },
        ]
    }

    fn family3() -> Vec<FamilyComponent> {
        // y = (s, T/s, −1).
        vec![
            FamilyComponent { coeff: g(1), s_power: 1, t_power: r(0) },
            FamilyComponent { coeff: g(1), s_power: -1, t_power: r(1) },
            FamilyComponent::constant(g(-1)),
        ]
    }

    #[test]
    fn exact_family_verification_accepts_true_families() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        for fam in [family1(), family2(), family3()] {
            assert!(verify_family_exact(&w, &fam).unwrap());
        }
    }

    #[test]
    fn exact_family_verification_rejects_wrong_family() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        // Flip the sign of the third coordinate of the first family.
        let wrong = vec![
            FamilyComponent { coeff: g(1), s_power: 1, t_power: r(0) },
            FamilyComponent { coeff: g(-1), s_power: 1, t_power: r(0) },
            FamilyComponent::constant(g(1)),
        ];
        assert!(!verify_family_exact(&w, &wrong).unwrap());
    }

    #[test]
    fn sampled_family_verification_agrees() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let worst = verify_family_sampled(&w, &family2(), 0.2, 25, 1e-9, 11).unwrap();
        assert!(worst < 1e-10);
    }

    #[test]
    fn analysis_builds_chains_families_and_certificates() {
        let w = PotentialFunction::from_polytope(&octahedron()).unwrap();
        let p = octahedron().with_small_resolution(true);
        let opts = SolverOptions::default();
        let analysis = analyze(&w, &p, &[0.2, 0.1, 0.05], &opts).unwrap();
        assert_eq!(analysis.runs.len(), 3);

        // Two full-length nondegenerate chains with valuations (.5,.5,0).
        let full: Vec<&Chain> = analysis
            .chains
            .iter()
            .filter(|c| c.class == CritClass::Nondegenerate && c.members.len() == 3)
            .collect();
        assert_eq!(full.len(), 2);
        for c in &full {
            assert!((c.valuations[0] - 0.5).abs() < 1e-6);
            assert!((c.valuations[1] - 0.5).abs() < 1e-6);
            assert!(c.valuations[2].abs() < 1e-6);
            assert!(c.r_squared.iter().all(|&r2| r2 > 1.0 - 1e-9));
            assert!(c.interior_slack > 0.2);
        }

        // Three degenerate families with the hand-computed tangents.
        let want_tangents = [
            [1.0, 1.0, 0.0],
            [1.0, 1.0, -2.0],
            [1.0, -1.0, 0.0],
        ];
        let confirmed: Vec<&FamilyCluster> =
            analysis.families.iter().filter(|f| f.confirmed).collect();
        assert!(confirmed.len() >= 3, "found {}", confirmed.len());
        for want in want_tangents {
            let wantc: Vec<Complex64> =
                want.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let wantc = canonical_direction(&wantc);
            assert!(
                confirmed
                    .iter()
                    .any(|f| direction_dist(&f.tangent, &wantc) < 1e-3),
                "missing tangent {want:?}"
            );
        }

        let certs = certify(&analysis, &w, &p, &opts).unwrap();
        assert_eq!(certs.len(), 2);
        for c in &certs {
            assert!(c.small_resolution_hypothesis);
            assert!(c.fresh_residual <= CERT_FRESH_FACTOR * opts.tol);
            assert_eq!(c.evidence.len(), 3);
            for e in &c.evidence {
                assert!(e.det_ratio > DET_RATIO_THRESHOLD);
                assert!(e.sv_ratio > SV_RATIO_THRESHOLD);
            }
        }
    }
}

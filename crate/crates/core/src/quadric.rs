//! Moment-map coordinates on projective quadrics and their degenerations.
//!
//! A point [x] ∈ ℙ^{n−1} with moment scale λ > 0 carries a real
//! skew-symmetric matrix with entries √−1·λ(x_i x̄_j − x̄_i x_j)/‖x‖². Two
//! families of functions are built from it:
//!
//! * torus coordinates ν_k = λ·Σ_{i≤k}|x_i|²/‖x‖² for k ≥ 3, together with
//!   the signed angular coordinate ν₂ = √−1·λ(x₁x̄₂ − x̄₁x₂)/‖x‖²;
//! * eigenvalue coordinates λ₁^{(k)}: the largest eigenvalue modulus of the
//!   leading k×k block, available in closed form because the matrix has
//!   rank ≤ 2.
//!
//! The stage maps interpolate between the two systems one coordinate at a
//! time; on the isotropic locus x₁² + … + x_k² = 0 the k-th coordinates of
//! consecutive stages agree, so the interpolation is continuous across the
//! quadric degenerations the stages correspond to.
//!
//! For n = 4 the module also provides the bilinear parametrization
//! ℙ¹×ℙ¹ → ℙ³ onto the smooth quadric Σ x_i² = 0 and the antiholomorphic
//! involution [x₁:x₂:x₃:x₄] ↦ [x̄₁:x̄₂:x̄₃:−x̄₄]; images of anti-diagonal
//! parameter pairs are exactly its fixed points.

use crate::linalg::hermitian_eigen;
use crate::novikov::GaussianRational;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
// Supplies f64 math methods when building without std; shadowed by the
// inherent methods otherwise.
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;
use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum QuadricError {
    /// Homogeneous coordinates must not all vanish.
    ZeroVector,
    /// The moment scale must be positive and finite.
    BadScale,
    /// Stage index outside the operation's valid range.
    BadStage { k: usize, n: usize },
    /// The closed-form square of an eigenvalue coordinate came out below
    /// zero by more than roundoff can explain; the amount is recorded.
    NegativeClosedForm { excess: f64 },
}

impl fmt::Display for QuadricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadricError::ZeroVector => write!(f, "homogeneous coordinates are all zero"),
            QuadricError::BadScale => write!(f, "moment scale must be positive and finite"),
            QuadricError::BadStage { k, n } => {
                write!(f, "stage {k} is outside the valid range for ambient dimension {n}")
            }
            QuadricError::NegativeClosedForm { excess } => {
                write!(f, "eigenvalue closed form negative beyond roundoff (excess {excess:e})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for QuadricError {}

/// A point of ℙ^{n−1} with the moment scale λ of the ambient projective
/// space attached. All derived quantities are invariant under rescaling the
/// homogeneous coordinates by any nonzero complex number.
#[derive(Clone, Debug)]
pub struct ProjPoint {
    x: Vec<Complex64>,
    lambda: f64,
}

impl ProjPoint {
    pub fn new(x: Vec<Complex64>, lambda: f64) -> Result<Self, QuadricError> {
        if x.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(QuadricError::ZeroVector);
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuadricError::ZeroVector);
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(QuadricError::BadScale);
        }
        Ok(ProjPoint { x, lambda })
    }

    /// Homogeneous coordinates, as given (not normalized).
    pub fn coords(&self) -> &[Complex64] {
        &self.x
    }

    /// Ambient homogeneous dimension n (the point lives in ℙ^{n−1}).
    pub fn ambient(&self) -> usize {
        self.x.len()
    }

    pub fn scale(&self) -> f64 {
        self.lambda
    }

    /// The same projective point with a different moment scale.
    pub fn with_scale(self, lambda: f64) -> Result<Self, QuadricError> {
        ProjPoint::new(self.x, lambda)
    }

    fn norm_sq(&self) -> f64 {
        self.x.iter().map(|z| z.norm_sqr()).sum()
    }

    /// λ·Σ_{i≤k} x_i²/‖x‖² — the quantity whose vanishing defines the
    /// isotropic locus of stage k.
    pub fn isotropy_defect(&self, k: usize) -> Complex64 {
        let s: Complex64 = self.x.iter().take(k).map(|z| z * z).sum();
        s * (self.lambda / self.norm_sq())
    }
}

/// Torus moment coordinates (ν₂, ν₃, …, ν_{n−1}).
///
/// ν₂ = √−1·λ(x₁x̄₂ − x̄₁x₂)/‖x‖² is real and signed; ν_k for k ≥ 3 is the
/// partial mass λ·Σ_{i≤k}|x_i|²/‖x‖². The vector has n − 2 entries.
pub fn moment_nu(p: &ProjPoint) -> Vec<f64> {
    let n = p.ambient();
    if n < 3 {
        return Vec::new();
    }
    let norm = p.norm_sq();
    let mut out = Vec::with_capacity(n - 2);
    out.push(nu2_value(p));
    let mut partial = p.x[0].norm_sqr() + p.x[1].norm_sqr();
    for k in 3..n {
        partial += p.x[k - 1].norm_sqr();
        out.push(p.lambda * partial / norm);
    }
    out
}

/// ν_k for a single k ≥ 2 (ν₂ is the signed angular coordinate).
pub fn nu_value(p: &ProjPoint, k: usize) -> Result<f64, QuadricError> {
    let n = p.ambient();
    if k < 2 || k > n {
        return Err(QuadricError::BadStage { k, n });
    }
    if k == 2 {
        return Ok(nu2_value(p));
    }
    let partial: f64 = p.x.iter().take(k).map(|z| z.norm_sqr()).sum();
    Ok(p.lambda * partial / p.norm_sq())
}

fn nu2_value(p: &ProjPoint) -> f64 {
    // √−1(x₁x̄₂ − x̄₁x₂) = −2·Im(x₁x̄₂), real.
    -2.0 * p.lambda * (p.x[0] * p.x[1].conj()).im / p.norm_sq()
}

/// The leading k×k block of the real skew-symmetric moment matrix, with
/// entries √−1·λ(x_i x̄_j − x̄_i x_j)/‖x‖².
#[allow(clippy::needless_range_loop)] // fills both triangles at once
pub fn so_moment(p: &ProjPoint, k: usize) -> Result<Vec<Vec<f64>>, QuadricError> {
    let n = p.ambient();
    if k < 2 || k > n {
        return Err(QuadricError::BadStage { k, n });
    }
    let norm = p.norm_sq();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let e = -2.0 * p.lambda * (p.x[i] * p.x[j].conj()).im / norm;
            m[i][j] = e;
            m[j][i] = -e;
        }
    }
    Ok(m)
}

/// Exact ν₂ for Gaussian-rational homogeneous coordinates.
pub fn nu2_exact(
    x: &[GaussianRational],
    lambda: &BigRational,
) -> Result<BigRational, QuadricError> {
    if x.len() < 2 || x.iter().all(GaussianRational::is_zero) {
        return Err(QuadricError::ZeroVector);
    }
    let norm: BigRational = x.iter().map(GaussianRational::norm_sqr).sum();
    let u = x[0].clone() * x[1].conj();
    Ok(-u.im * BigRational::from_integer(2.into()) * lambda / norm)
}

/// Exact leading k×k skew moment matrix for Gaussian-rational coordinates.
pub fn so_moment_exact(
    x: &[GaussianRational],
    lambda: &BigRational,
    k: usize,
) -> Result<Vec<Vec<BigRational>>, QuadricError> {
    let n = x.len();
    if k < 2 || k > n {
        return Err(QuadricError::BadStage { k, n });
    }
    if x.iter().all(GaussianRational::is_zero) {
        return Err(QuadricError::ZeroVector);
    }
    let norm: BigRational = x.iter().map(GaussianRational::norm_sqr).sum();
    let two = BigRational::from_integer(2.into());
    let mut m = vec![vec![BigRational::zero(); k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let u = x[i].clone() * x[j].conj();
            let e = -u.im * &two * lambda / &norm;
            m[i][j] = e.clone();
            m[j][i] = -e;
        }
    }
    Ok(m)
}

/// Relative tolerance below zero the closed-form square may reach before it
/// is treated as a formula violation rather than roundoff.
pub const CLOSED_FORM_SLACK: f64 = 1e-12;

/// Largest eigenvalue modulus λ₁^{(k)} of the leading k×k moment block,
/// k ≥ 3, via the rank-two closed form
/// (λ₁^{(k)})² = ν_k² − |λ·Σ_{i≤k}x_i²/‖x‖²|².
///
/// The right side is nonnegative by Cauchy–Schwarz; values within
/// `CLOSED_FORM_SLACK`·λ² below zero are clamped, anything lower is an
/// error.
pub fn lambda1(p: &ProjPoint, k: usize) -> Result<f64, QuadricError> {
    let n = p.ambient();
    if k < 3 || k > n {
        return Err(QuadricError::BadStage { k, n });
    }
    let nu = nu_value(p, k)?;
    let defect = p.isotropy_defect(k).norm_sqr();
    let disc = nu * nu - defect;
    let floor = -CLOSED_FORM_SLACK * p.lambda * p.lambda;
    if disc < floor {
        return Err(QuadricError::NegativeClosedForm { excess: floor - disc });
    }
    Ok(disc.max(0.0).sqrt())
}

/// Brute-force reference for `lambda1`: the largest eigenvalue of the
/// Hermitian matrix √−1·M for the real skew block M. Kept separate from the
/// closed form so the two routes can be compared.
pub fn lambda1_eigen(p: &ProjPoint, k: usize) -> Result<f64, QuadricError> {
    let n = p.ambient();
    if k < 3 || k > n {
        return Err(QuadricError::BadStage { k, n });
    }
    let m = so_moment(p, k)?;
    let herm: Vec<Vec<Complex64>> = (0..k)
        .map(|i| (0..k).map(|j| Complex64::new(0.0, m[i][j])).collect())
        .collect();
    let (eigs, _) = hermitian_eigen(&herm);
    Ok(eigs.last().copied().unwrap_or(0.0))
}

/// Values of the stage-k interpolating map.
#[derive(Clone, Debug, PartialEq)]
pub struct GcValues {
    /// Stage index k, 3 ≤ k ≤ n.
    pub stage: usize,
    /// (λ₁^{(2)}, …, λ₁^{(k−1)}, ν_k, …, ν_{n−1}) — eigenvalue coordinates
    /// below the stage, torus coordinates from the stage up; n − 2 entries.
    /// The first entry is the signed ν₂ (the pattern bottom slot allows
    /// either sign); all later eigenvalue entries are ≥ 0.
    pub values: Vec<f64>,
}

/// The stage-k map: eigenvalue coordinates λ₁^{(2)}, …, λ₁^{(k−1)} followed
/// by torus coordinates ν_k, …, ν_{n−1}. Stage 3 is the pure torus moment
/// map (the first slot λ₁^{(2)} equals ν₂ identically); stage n is the pure
/// eigenvalue system.
pub fn gc_values(p: &ProjPoint, stage: usize) -> Result<GcValues, QuadricError> {
    let n = p.ambient();
    if stage < 3 || stage > n {
        return Err(QuadricError::BadStage { k: stage, n });
    }
    let mut values = Vec::with_capacity(n.saturating_sub(2));
    values.push(nu2_value(p));
    for k in 3..n {
        if k < stage {
            values.push(lambda1(p, k)?);
        } else {
            values.push(nu_value(p, k)?);
        }
    }
    Ok(GcValues { stage, values })
}

/// Bilinear parametrization ℙ¹×ℙ¹ → ℙ³:
/// x₁ = z₀w₀ − z₁w₁, x₂ = √−1(z₀w₁ − z₁w₀), x₃ = z₀w₁ + z₁w₀,
/// x₄ = √−1(z₀w₀ + z₁w₁). The image satisfies Σ x_i² = 0 identically. The
/// returned point carries scale 1; adjust with `with_scale` if needed.
pub fn segre(z: &[Complex64; 2], w: &[Complex64; 2]) -> Result<ProjPoint, QuadricError> {
    if z.iter().all(|c| c.norm_sqr() == 0.0) || w.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(QuadricError::ZeroVector);
    }
    let i = Complex64::new(0.0, 1.0);
    let x = vec![
        z[0] * w[0] - z[1] * w[1],
        i * (z[0] * w[1] - z[1] * w[0]),
        z[0] * w[1] + z[1] * w[0],
        i * (z[0] * w[0] + z[1] * w[1]),
    ];
    ProjPoint::new(x, 1.0)
}

/// The antiholomorphic involution [x₁:x₂:x₃:x₄] ↦ [x̄₁:x̄₂:x̄₃:−x̄₄] of ℙ³.
/// Its fixed locus meets the quadric Σ x_i² = 0 in the image of the
/// anti-diagonal {w = z̄} under the bilinear parametrization.
pub fn involution(p: &ProjPoint) -> Result<ProjPoint, QuadricError> {
    let n = p.ambient();
    if n != 4 {
        return Err(QuadricError::BadStage { k: 4, n });
    }
    let x = vec![
        p.x[0].conj(),
        p.x[1].conj(),
        p.x[2].conj(),
        -p.x[3].conj(),
    ];
    ProjPoint::new(x, p.lambda)
}

/// Whether two points of the same projective space agree up to a complex
/// scalar: all 2×2 minors of the pair vanish relative to the coordinate
/// scales.
pub fn projectively_equal(a: &ProjPoint, b: &ProjPoint, tol: f64) -> bool {
    if a.ambient() != b.ambient() {
        return false;
    }
    let sa = a.x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sb = b.x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = (sa * sb).max(1e-300);
    let n = a.ambient();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a.x[i] * b.x[j] - a.x[j] * b.x[i]).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// A random point of ℙ^{n−1} with coordinates uniform in the unit square.
pub fn random_point<R: Rng>(n: usize, lambda: f64, rng: &mut R) -> Result<ProjPoint, QuadricError> {
    loop {
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if x.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6 {
            return ProjPoint::new(x, lambda);
        }
    }
}

/// A random point on the rank-r quadric {x₁² + … + x_r² = 0} ⊂ ℙ^{n−1},
/// 2 ≤ r ≤ n: the first r − 1 and the trailing coordinates are drawn at
/// random and x_r is solved from the quadric equation (random sign of the
/// square root); draws whose solved coordinate would be tiny are rejected
/// to stay clear of the deeper degeneration strata.
pub fn random_on_quadric<R: Rng>(
    n: usize,
    r: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<ProjPoint, QuadricError> {
    if r < 2 || r > n {
        return Err(QuadricError::BadStage { k: r, n });
    }
    loop {
        let mut x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let head: Complex64 = x.iter().take(r - 1).map(|z| z * z).sum();
        let head_mass: f64 = x.iter().take(r - 1).map(|z| z.norm_sqr()).sum();
        // Near-degenerate solve: the partial square sum nearly vanishes on
        // its own, which would park x_r near zero.
        if head.norm() < 1e-3 * head_mass.max(1e-6) {
            continue;
        }
        let root = (-head).sqrt();
        x[r - 1] = if rng.gen::<bool>() { root } else { -root };
        return ProjPoint::new(x, lambda);
    }
}

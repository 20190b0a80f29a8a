//! Arithmetic in the subring Λ₀ of the Novikov ring: finite formal sums
//! Σ aⱼ·T^{λⱼ} with rational exponents λⱼ ≥ 0 and Gaussian-rational
//! coefficients aⱼ, plus numeric evaluation at a real 0 < t < 1.
//!
//! Elements optionally carry a truncation level E: terms with exponent > E
//! are dropped, and any drop sets an explicit `truncated` flag so precision
//! loss is never silent. Operations combine levels by taking the minimum
//! (absence of a level means "no cutoff").

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
// Supplies f64 math methods when building without std; shadowed by the
// inherent methods otherwise.
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

/// A Gaussian rational a + b·i with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_rational(re: BigRational) -> Self {
        GaussianRational { re, im: BigRational::zero() }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn i() -> Self {
        GaussianRational { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -self.im.clone() }
    }

    /// |a + bi|² = a² + b², exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Division by a nonzero rational scalar.
    pub fn div_rational(&self, d: &BigRational) -> Self {
        GaussianRational { re: &self.re / d, im: &self.im / d }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Multiplication by a machine integer.
    pub fn scale_int(&self, n: i64) -> Self {
        let f = BigRational::from_integer(BigInt::from(n));
        GaussianRational { re: &self.re * &f, im: &self.im * &f }
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> Self {
        GaussianRational { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: Self) -> Self {
        GaussianRational { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> Self {
        GaussianRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> Self {
        GaussianRational { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "({}{}i)", self.re, self.im)
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NovikovError {
    /// A term exponent was negative; Λ₀ only holds nonnegative powers of T.
    NegativeExponent,
    /// Numeric evaluation requires 0 < t < 1.
    EvalOutOfRange,
}

impl fmt::Display for NovikovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NovikovError::NegativeExponent => write!(f, "term exponent must be >= 0"),
            NovikovError::EvalOutOfRange => write!(f, "evaluation point must satisfy 0 < t < 1"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NovikovError {}

/// Finite formal sum Σ aⱼ·T^{λⱼ}, kept in canonical form: exponents strictly
/// increasing, no zero coefficients, all exponents ≤ the truncation level.
///
/// Equality compares the mathematical value (terms), not the truncation
/// metadata.
#[derive(Clone, Debug)]
pub struct NovikovElement {
    terms: Vec<(BigRational, GaussianRational)>,
    truncation: Option<BigRational>,
    truncated: bool,
}

impl PartialEq for NovikovElement {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for NovikovElement {}

impl NovikovElement {
    pub fn zero() -> Self {
        NovikovElement { terms: Vec::new(), truncation: None, truncated: false }
    }

    pub fn one() -> Self {
        Self::t_power(BigRational::zero()).unwrap()
    }

    /// The monomial T^exp (exp ≥ 0).
    pub fn t_power(exp: BigRational) -> Result<Self, NovikovError> {
        Self::term(GaussianRational::from_integer(1), exp)
    }

    /// The single term coeff·T^exp.
    pub fn term(coeff: GaussianRational, exp: BigRational) -> Result<Self, NovikovError> {
        Self::from_terms([(exp, coeff)], None)
    }

    pub fn scalar(coeff: GaussianRational) -> Self {
        Self::term(coeff, BigRational::zero()).unwrap()
    }

    /// Builds an element from arbitrary (exponent, coefficient) pairs,
    /// canonicalizing: sort, merge equal exponents, drop zero coefficients,
    /// then apply the truncation level.
    pub fn from_terms<I>(terms: I, truncation: Option<BigRational>) -> Result<Self, NovikovError>
    where
        I: IntoIterator<Item = (BigRational, GaussianRational)>,
    {
        let mut v: Vec<(BigRational, GaussianRational)> = Vec::new();
        for (exp, coeff) in terms {
            if exp.is_negative() {
                return Err(NovikovError::NegativeExponent);
            }
            v.push((exp, coeff));
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(BigRational, GaussianRational)> = Vec::with_capacity(v.len());
        for (exp, coeff) in v {
            match merged.last_mut() {
                Some((e, c)) if *e == exp => {
                    *c = c.clone() + coeff;
                }
                _ => merged.push((exp, coeff)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        let mut out = NovikovElement { terms: merged, truncation: None, truncated: false };
        out.apply_truncation(truncation);
        Ok(out)
    }

    fn apply_truncation(&mut self, level: Option<BigRational>) {
        if let Some(e) = level {
            let before = self.terms.len();
            self.terms.retain(|(exp, _)| *exp <= e);
            if self.terms.len() != before {
                self.truncated = true;
            }
            self.truncation = Some(e);
        }
    }

    /// Re-truncates at the given level (tightening only has an effect; the
    /// stored level becomes the minimum of old and new).
    pub fn truncate_to(mut self, level: BigRational) -> Self {
        let combined = match self.truncation.take() {
            Some(old) => old.min(level),
            None => level,
        };
        self.apply_truncation(Some(combined));
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(BigRational, GaussianRational)] {
        &self.terms
    }

    pub fn truncation(&self) -> Option<&BigRational> {
        self.truncation.as_ref()
    }

    /// True when some operation on the way to this element dropped a term.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// T-adic valuation: the least exponent with nonzero coefficient.
    /// `None` encodes +∞ (the zero element).
    pub fn valuation(&self) -> Option<BigRational> {
        self.terms.first().map(|(e, _)| e.clone())
    }

    pub fn leading_coefficient(&self) -> Option<&GaussianRational> {
        self.terms.first().map(|(_, c)| c)
    }

    fn combined_level(&self, rhs: &Self) -> Option<BigRational> {
        match (&self.truncation, &rhs.truncation) {
            (Some(a), Some(b)) => Some(a.clone().min(b.clone())),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            let mut z = Self::zero();
            z.truncation = self.truncation.clone();
            z.truncated = self.truncated;
            return z;
        }
        NovikovElement {
            terms: self
                .terms
                .iter()
                .map(|(e, a)| (e.clone(), a.clone() * c.clone()))
                .collect(),
            truncation: self.truncation.clone(),
            truncated: self.truncated,
        }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&GaussianRational::from_integer(c))
    }

    /// Multiplication by T^exp (exp ≥ 0), shifting every exponent.
    pub fn shift(&self, exp: &BigRational) -> Result<Self, NovikovError> {
        if exp.is_negative() {
            return Err(NovikovError::NegativeExponent);
        }
        let mut out = NovikovElement {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e + exp, c.clone()))
                .collect(),
            truncation: None,
            truncated: self.truncated,
        };
        out.apply_truncation(self.truncation.clone());
        Ok(out)
    }

    /// Numeric evaluation Σ aⱼ·t^{λⱼ} at a real 0 < t < 1.
    pub fn eval(&self, t: f64) -> Result<Complex64, NovikovError> {
        if !(t > 0.0 && t < 1.0) {
            return Err(NovikovError::EvalOutOfRange);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (exp, coeff) in &self.terms {
            let e = exp.to_f64().unwrap_or(f64::NAN);
            acc += coeff.to_complex() * t.powf(e);
        }
        Ok(acc)
    }
}

impl Add for &NovikovElement {
    type Output = NovikovElement;
    fn add(self, rhs: &NovikovElement) -> NovikovElement {
        let level = self.combined_level(rhs);
        let mut out = NovikovElement::from_terms(
            self.terms.iter().chain(rhs.terms.iter()).cloned(),
            level,
        )
        .expect("canonical inputs have nonnegative exponents");
        out.truncated |= self.truncated || rhs.truncated;
        out
    }
}

impl Sub for &NovikovElement {
    type Output = NovikovElement;
    #[allow(clippy::suspicious_arithmetic_impl)] // a − b as a + (−b)
    fn sub(self, rhs: &NovikovElement) -> NovikovElement {
        self + &rhs.clone().neg()
    }
}

impl Neg for NovikovElement {
    type Output = NovikovElement;
    fn neg(mut self) -> NovikovElement {
        for (_, c) in self.terms.iter_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for &NovikovElement {
    type Output = NovikovElement;
    fn mul(self, rhs: &NovikovElement) -> NovikovElement {
        let level = self.combined_level(rhs);
        let products = self.terms.iter().flat_map(|(ea, ca)| {
            rhs.terms
                .iter()
                .map(move |(eb, cb)| (ea + eb, ca.clone() * cb.clone()))
        });
        let mut out = NovikovElement::from_terms(products, level)
            .expect("sums of nonnegative exponents are nonnegative");
        out.truncated |= self.truncated || rhs.truncated;
        out
    }
}

impl fmt::Display for NovikovElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exp, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let c = alloc::format!("{coeff}");
            if exp.is_zero() {
                write!(f, "{c}")?;
            } else {
                let e: String = if exp.is_one() {
                    String::new()
                } else if exp.denom().is_one() {
                    alloc::format!("^{}", exp)
                } else {
                    alloc::format!("^({})", exp)
                };
                if c == "1" {
                    write!(f, "T{e}")?;
                } else {
                    write!(f, "{c}T{e}")?;
                }
            }
        }
        if self.truncated {
            write!(f, " + O(T^>E)")?;
        }
        Ok(())
    }
}

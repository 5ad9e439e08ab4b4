//! Dense univariate polynomials over an exact field.
//!
//! The same container backs both `Q[y]` (the numerators and denominators of
//! base-field elements) and `K[x]`, the ring the key polynomials live in.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::basefield::KElem;
use crate::numeric::Rat;

/// Exact field arithmetic on references.
pub trait Field: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

impl Field for Rat {
    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        self.recip()
    }
    fn is_one(&self) -> bool {
        Rat::is_one(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisorZero,
    #[error("extension is transcendental; there is no minimal polynomial to reduce by")]
    NotAlgebraic,
    #[error("minimal polynomial must be monic of degree at least 1")]
    BadMinimalPolynomial,
}

/// Dense polynomial; `coeffs[k]` is the coefficient of `t^k`.
///
/// Trailing zeros are never stored, so the zero polynomial has no
/// coefficients and its degree is `None` (the `-inf` degree).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DensePoly<F> {
    coeffs: Vec<F>,
}

/// Polynomials in `x` over the valued base field.
pub type Poly = DensePoly<KElem>;

impl<F: Field> DensePoly<F> {
    pub fn zero() -> Self {
        DensePoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(F::one())
    }

    pub fn constant(c: F) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `t`.
    pub fn var() -> Self {
        Self::monomial(F::one(), 1)
    }

    pub fn monomial(c: F, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![F::zero(); k + 1];
        coeffs[k] = c;
        DensePoly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(F::is_zero) {
            coeffs.pop();
        }
        DensePoly { coeffs }
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    /// Coefficient of `t^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> F {
        self.coeffs.get(k).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&F> {
        self.coeffs.last()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_some_and(F::is_one)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Index of the lowest nonzero coefficient; `None` for zero.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![F::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        DensePoly { coeffs }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self), PolyError> {
        let dd = divisor.degree().ok_or(PolyError::DivisorZero)?;
        let lead_inv = divisor
            .leading_coeff()
            .and_then(F::inv)
            .ok_or(PolyError::DivisorZero)?;
        let monic = divisor.is_monic();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![F::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let top = &rem[k + dd];
            if top.is_zero() {
                continue;
            }
            let q = if monic { top.clone() } else { top.mul(&lead_inv) };
            for (j, d) in divisor.coeffs.iter().enumerate() {
                if !d.is_zero() {
                    rem[k + j] = rem[k + j].sub(&q.mul(d));
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    pub fn rem(&self, divisor: &Self) -> Result<Self, PolyError> {
        self.divmod(divisor).map(|(_, r)| r)
    }

    /// Monic associate; zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading_coeff().and_then(F::inv) {
            Some(inv) => self.scale(&inv),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor (zero when both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        let mut k = F::zero();
        for c in self.coeffs.iter().skip(1) {
            k = k.add(&F::one());
            out.push(c.mul(&k));
        }
        Self::from_coeffs(out)
    }

    /// Evaluate by Horner's rule in any ring the coefficients embed into.
    pub fn eval_with<T, E, A, M>(&self, at: &T, embed: E, add: A, mul: M, zero: T) -> T
    where
        E: Fn(&F) -> T,
        A: Fn(&T, &T) -> T,
        M: Fn(&T, &T) -> T,
    {
        self.coeffs
            .iter()
            .rev()
            .fold(zero, |acc, c| add(&mul(&acc, at), &embed(c)))
    }
}

impl<F: Field> Add for &DensePoly<F> {
    type Output = DensePoly<F>;
    fn add(self, rhs: &DensePoly<F>) -> DensePoly<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        DensePoly::from_coeffs(coeffs)
    }
}

impl<F: Field> Sub for &DensePoly<F> {
    type Output = DensePoly<F>;
    fn sub(self, rhs: &DensePoly<F>) -> DensePoly<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a.sub(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.neg(),
                (None, None) => unreachable!(),
            })
            .collect();
        DensePoly::from_coeffs(coeffs)
    }
}

impl<F: Field> Mul for &DensePoly<F> {
    type Output = DensePoly<F>;
    fn mul(self, rhs: &DensePoly<F>) -> DensePoly<F> {
        if self.is_zero() || rhs.is_zero() {
            return DensePoly::zero();
        }
        let mut coeffs = vec![F::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        DensePoly::from_coeffs(coeffs)
    }
}

impl<F: Field> Neg for &DensePoly<F> {
    type Output = DensePoly<F>;
    fn neg(self) -> DensePoly<F> {
        DensePoly {
            coeffs: self.coeffs.iter().map(F::neg).collect(),
        }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl<F: Field> $tr for DensePoly<F> {
            type Output = DensePoly<F>;
            fn $method(self, rhs: DensePoly<F>) -> DensePoly<F> {
                (&self).$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

/// Whether `x` is transcendental over `K` or algebraic with a given minimal
/// polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionConfig {
    Transcendental,
    Algebraic { minpoly: Poly },
}

impl ExtensionConfig {
    /// Algebraic extension by `minpoly`, which must be monic of degree >= 1.
    /// Irreducibility is trusted, not checked.
    pub fn algebraic(minpoly: Poly) -> Result<Self, PolyError> {
        match minpoly.degree() {
            Some(d) if d >= 1 && minpoly.is_monic() => Ok(ExtensionConfig::Algebraic { minpoly }),
            _ => Err(PolyError::BadMinimalPolynomial),
        }
    }

    /// Degree `N` of the minimal polynomial, if algebraic.
    pub fn degree(&self) -> Option<usize> {
        match self {
            ExtensionConfig::Transcendental => None,
            ExtensionConfig::Algebraic { minpoly } => minpoly.degree(),
        }
    }

    pub fn minpoly(&self) -> Option<&Poly> {
        match self {
            ExtensionConfig::Transcendental => None,
            ExtensionConfig::Algebraic { minpoly } => Some(minpoly),
        }
    }
}

/// The representative of `f` modulo the minimal polynomial, of degree < N.
pub fn poly_reduce(f: &Poly, ext: &ExtensionConfig) -> Result<Poly, PolyError> {
    let p = ext.minpoly().ok_or(PolyError::NotAlgebraic)?;
    f.rem(p)
}

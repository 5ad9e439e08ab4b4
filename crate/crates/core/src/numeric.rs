//! Exact rationals, values extended by `+inf`, and cyclic subgroups of the
//! rationals.
//!
//! Every value a valuation can take lives in [`Value`]: either an exact
//! rational or the distinguished infinity used for `v(0)` and for
//! pseudo-valuations.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("empty list of generators")]
    EmptyInput,
    #[error("zero entry at position {0} in list of generators")]
    ZeroEntry(usize),
    #[error("{sub} does not generate a subgroup of the group generated by {sup}")]
    NotASubgroup { sub: Box<Rat>, sup: Box<Rat> },
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
}

/// An exact rational number in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rat(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Rat> {
        if self.is_zero() {
            None
        } else {
            Some(Rat(self.0.recip()))
        }
    }

    /// The value as a machine integer, when it is one and fits.
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    /// The value as a natural number, when it is one and fits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.is_integer() {
            self.0.numer().to_u64()
        } else {
            None
        }
    }

    /// Exponent of the prime `p` in this rational; `None` for zero.
    pub fn p_adic_valuation(&self, p: u64) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let p = BigInt::from(p);
        Some(multiplicity(self.numer(), &p) - multiplicity(self.denom(), &p))
    }
}

fn multiplicity(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_integer(n)
    }
}

impl From<u64> for Rat {
    fn from(n: u64) -> Self {
        Rat::from_integer(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat(r)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);
rat_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericError::BadRational(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rat::new(n, d))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A valuation value: an exact rational or `+inf`.
///
/// Variant order gives the ordering: every finite value is below `Infinity`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Finite(Rat),
    Infinity,
}

impl Value {
    pub fn zero() -> Self {
        Value::Finite(Rat::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinity)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Value::Finite(r) => Some(r),
            Value::Infinity => None,
        }
    }

    /// `n * self`, with `0 * inf = 0` since it only ever scales exponents.
    pub fn scale(&self, n: &Rat) -> Value {
        match self {
            Value::Finite(r) => Value::Finite(r * n),
            Value::Infinity if n.is_zero() => Value::zero(),
            Value::Infinity => Value::Infinity,
        }
    }
}

impl From<Rat> for Value {
    fn from(r: Rat) -> Self {
        Value::Finite(r)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Finite(Rat::from(n))
    }
}

impl Add<&Value> for &Value {
    type Output = Value;
    fn add(self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
            _ => Value::Infinity,
        }
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        &self + &rhs
    }
}

impl Add<&Rat> for &Value {
    type Output = Value;
    fn add(self, rhs: &Rat) -> Value {
        match self {
            Value::Finite(a) => Value::Finite(a + rhs),
            Value::Infinity => Value::Infinity,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(r) => write!(f, "{r}"),
            Value::Infinity => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Value {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            Ok(Value::Infinity)
        } else {
            s.parse().map(Value::Finite)
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The positive generator of a cyclic subgroup of `(Q, +)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubgroupGen(Rat);

impl SubgroupGen {
    /// The group `g Z`; `g` is replaced by `|g|`. Returns `None` for zero.
    pub fn new(g: Rat) -> Option<Self> {
        if g.is_zero() {
            None
        } else {
            Some(SubgroupGen(g.abs()))
        }
    }

    pub fn generator(&self) -> &Rat {
        &self.0
    }

    /// Whether `r` is an integer multiple of the generator.
    pub fn contains(&self, r: &Rat) -> bool {
        (r / &self.0).is_integer()
    }
}

/// Generator of the subgroup of `Q` spanned by `values`.
///
/// All values are put over their least common denominator `D`; the gcd `G` of
/// the resulting numerators gives the generator `G / D`.
pub fn subgroup_generator(values: &[Rat]) -> Result<SubgroupGen, NumericError> {
    if values.is_empty() {
        return Err(NumericError::EmptyInput);
    }
    if let Some(pos) = values.iter().position(Rat::is_zero) {
        return Err(NumericError::ZeroEntry(pos));
    }
    let lcd = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let gcd = values.iter().fold(BigInt::zero(), |acc, v| {
        let scaled = v.numer() * (&lcd / v.denom());
        acc.gcd(&scaled)
    });
    Ok(SubgroupGen(Rat::new(gcd, lcd)))
}

/// Index `[sup : sub]` of the subgroup generated by `sub` inside the one
/// generated by `sup`.
pub fn subgroup_index(sub: &SubgroupGen, sup: &SubgroupGen) -> Result<u64, NumericError> {
    let ratio = &sub.0 / &sup.0;
    match ratio.to_u64() {
        Some(n) if n > 0 => Ok(n),
        _ => Err(NumericError::NotASubgroup {
            sub: Box::new(sub.0.clone()),
            sup: Box::new(sup.0.clone()),
        }),
    }
}

/// Minimum of two values.
pub fn min_value(a: Value, b: Value) -> Value {
    match a.cmp(&b) {
        Ordering::Greater => b,
        _ => a,
    }
}

//! The valued coefficient field `(K, v)`.
//!
//! Elements are reduced fractions of polynomials in `y` over the rationals.
//! Under [`BaseFieldConfig::FunctionField`] the valuation is the order of
//! vanishing at `y = 0`; under [`BaseFieldConfig::PAdic`] elements are
//! rational constants and the valuation is `v_p`.

use std::fmt;

use thiserror::Error;

use crate::numeric::{Rat, Value};
use crate::poly::{DensePoly, Field};

/// Polynomials in `y` with rational coefficients.
pub type YPoly = DensePoly<Rat>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaseFieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BaseFieldConfig {
    /// `Q(y)` with `v = ord_y`.
    FunctionField { var: String },
    /// `Q` with `v = v_p`.
    PAdic { p: u64 },
}

impl Default for BaseFieldConfig {
    fn default() -> Self {
        BaseFieldConfig::function_field()
    }
}

impl BaseFieldConfig {
    pub fn function_field() -> Self {
        BaseFieldConfig::FunctionField { var: "y".into() }
    }

    pub fn p_adic(p: u64) -> Result<Self, BaseFieldError> {
        if is_prime(p) {
            Ok(BaseFieldConfig::PAdic { p })
        } else {
            Err(BaseFieldError::NotPrime(p))
        }
    }

    /// Name of the base-field variable, if the field has one.
    pub fn var(&self) -> Option<&str> {
        match self {
            BaseFieldConfig::FunctionField { var } => Some(var),
            BaseFieldConfig::PAdic { .. } => None,
        }
    }

    /// Generator of the value group `v(K*)`; both supported valuations are
    /// normalized onto `Z`.
    pub fn value_group_generator(&self) -> Rat {
        Rat::one()
    }

    pub fn valuation(&self, a: &KElem) -> Value {
        base_valuation(a, self)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of `K`: `num / den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KElem {
    num: YPoly,
    den: YPoly,
}

impl KElem {
    pub fn new(num: YPoly, den: YPoly) -> Result<Self, BaseFieldError> {
        if den.is_zero() {
            return Err(BaseFieldError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: YPoly, den: YPoly) -> Self {
        if num.is_zero() {
            return KElem::zero();
        }
        if den.is_constant() {
            let inv = den.coeff(0).recip().expect("nonzero denominator");
            return KElem {
                num: if inv.is_one() { num } else { num.scale(&inv) },
                den: YPoly::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.divmod(&g).unwrap().0, den.divmod(&g).unwrap().0)
        };
        let lead = den.leading_coeff().unwrap().recip().unwrap();
        KElem {
            num: num.scale(&lead),
            den: den.scale(&lead),
        }
    }

    pub fn from_rat(r: Rat) -> Self {
        KElem {
            num: YPoly::constant(r),
            den: YPoly::one(),
        }
    }

    pub fn from_ypoly(p: YPoly) -> Self {
        KElem {
            num: p,
            den: YPoly::one(),
        }
    }

    /// The base-field variable `y`.
    pub fn y() -> Self {
        Self::from_ypoly(YPoly::var())
    }

    pub fn num(&self) -> &YPoly {
        &self.num
    }

    pub fn den(&self) -> &YPoly {
        &self.den
    }

    /// The rational value of a constant element.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    fn scaled(&self, c: &Rat) -> KElem {
        if c.is_one() {
            return self.clone();
        }
        KElem {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn checked_div(&self, rhs: &KElem) -> Result<KElem, BaseFieldError> {
        let inv = rhs.inv().ok_or(BaseFieldError::DivisionByZero)?;
        Ok(Field::mul(self, &inv))
    }
}

impl Field for KElem {
    fn zero() -> Self {
        KElem {
            num: YPoly::zero(),
            den: YPoly::one(),
        }
    }

    fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        if self.den == rhs.den {
            if self.den.is_one() {
                return Self::from_ypoly(&self.num + &rhs.num);
            }
            return Self::normalized(&self.num + &rhs.num, self.den.clone());
        }
        Self::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }

    fn sub(&self, rhs: &Self) -> Self {
        Field::add(self, &Field::neg(rhs))
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return KElem::zero();
        }
        if let Some(c) = rhs.as_rat() {
            return self.scaled(&c);
        }
        if let Some(c) = self.as_rat() {
            return rhs.scaled(&c);
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Self::from_ypoly(&self.num * &rhs.num);
        }
        Self::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }

    fn neg(&self) -> Self {
        KElem {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::normalized(self.den.clone(), self.num.clone()))
        }
    }

    fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }
}

impl From<Rat> for KElem {
    fn from(r: Rat) -> Self {
        KElem::from_rat(r)
    }
}

impl From<i64> for KElem {
    fn from(n: i64) -> Self {
        KElem::from_rat(Rat::from(n))
    }
}

impl fmt::Debug for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::format_kelem(self, "y"))
    }
}

impl fmt::Display for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::format_kelem(self, "y"))
    }
}

/// Exact field operation selected at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn base_arith(op: BaseOp, a: &KElem, b: &KElem) -> Result<KElem, BaseFieldError> {
    Ok(match op {
        BaseOp::Add => Field::add(a, b),
        BaseOp::Sub => Field::sub(a, b),
        BaseOp::Mul => Field::mul(a, b),
        BaseOp::Div => a.checked_div(b)?,
    })
}

/// `v(a)`, with `v(0) = inf`.
///
/// In the p-adic case a non-constant element (which the parser never
/// produces) is valued by the Gauss extension of `v_p` to `Q(y)`.
pub fn base_valuation(a: &KElem, cfg: &BaseFieldConfig) -> Value {
    if a.is_zero() {
        return Value::Infinity;
    }
    match cfg {
        BaseFieldConfig::FunctionField { .. } => {
            let n = a.num.order().unwrap() as i64;
            let d = a.den.order().unwrap() as i64;
            Value::from(n - d)
        }
        BaseFieldConfig::PAdic { p } => {
            let gauss = |q: &YPoly| {
                q.coeffs()
                    .iter()
                    .filter_map(|c| c.p_adic_valuation(*p))
                    .min()
                    .unwrap()
            };
            Value::from(gauss(&a.num) - gauss(&a.den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::kelem_strategy;
    use crate::text::parse_kelem;
    use proptest::prelude::*;

    fn k(s: &str) -> KElem {
        parse_kelem(s, &BaseFieldConfig::function_field()).unwrap()
    }

    fn q(s: &str) -> KElem {
        parse_kelem(s, &BaseFieldConfig::p_adic(3).unwrap()).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(base_arith(BaseOp::Mul, &k("y"), &k("y + 1")).unwrap(), k("y^2 + y"));
        assert_eq!(base_arith(BaseOp::Div, &k("y^2"), &k("y^3")).unwrap(), k("1/y"));
        assert_eq!(base_arith(BaseOp::Add, &q("1/2"), &q("1/3")).unwrap(), q("5/6"));
        assert_eq!(base_arith(BaseOp::Sub, &k("1/y"), &k("1/y")).unwrap(), KElem::zero());
        assert_eq!(
            base_arith(BaseOp::Div, &k("y"), &KElem::zero()),
            Err(BaseFieldError::DivisionByZero)
        );
    }

    #[test]
    fn canonical_form() {
        let a = k("(2*y^2 + 2*y)/(4*y)");
        assert_eq!(a.den(), &YPoly::one());
        assert_eq!(a, k("1/2*y + 1/2"));
        let b = k("(y + 1)/(3*y^2)");
        assert!(b.den().is_monic());
        assert_eq!(KElem::zero().den(), &YPoly::one());
        assert_eq!(k("0/(y + 1)"), KElem::zero());
    }

    #[test]
    fn valuation_examples() {
        let ff = BaseFieldConfig::function_field();
        assert_eq!(base_valuation(&k("y^2 + y^3"), &ff), Value::from(2));
        assert_eq!(base_valuation(&k("(1 + y)/y^2"), &ff), Value::from(-2));
        assert_eq!(base_valuation(&KElem::zero(), &ff), Value::Infinity);
        let p3 = BaseFieldConfig::p_adic(3).unwrap();
        assert_eq!(base_valuation(&q("18/5"), &p3), Value::from(2));
        assert_eq!(base_valuation(&q("5/18"), &p3), Value::from(-2));
    }

    #[test]
    fn p_adic_requires_prime() {
        assert!(BaseFieldConfig::p_adic(7).is_ok());
        assert_eq!(BaseFieldConfig::p_adic(9), Err(BaseFieldError::NotPrime(9)));
        assert_eq!(BaseFieldConfig::p_adic(1), Err(BaseFieldError::NotPrime(1)));
    }

    proptest! {
        #[test]
        fn ord_y_is_a_valuation(a in kelem_strategy(), b in kelem_strategy()) {
            let ff = BaseFieldConfig::function_field();
            let v = |e: &KElem| base_valuation(e, &ff);
            prop_assert_eq!(v(&Field::mul(&a, &b)), &v(&a) + &v(&b));
            prop_assert!(v(&Field::add(&a, &b)) >= v(&a).min(v(&b)));
            prop_assert_eq!(v(&a).is_infinite(), a.is_zero());
        }

        #[test]
        fn v_p_is_a_valuation(n1 in -200i64..200, d1 in 1i64..60, n2 in -200i64..200, d2 in 1i64..60) {
            let p5 = BaseFieldConfig::p_adic(5).unwrap();
            let a = KElem::from(Rat::new(n1, d1));
            let b = KElem::from(Rat::new(n2, d2));
            let v = |e: &KElem| base_valuation(e, &p5);
            prop_assert_eq!(v(&Field::mul(&a, &b)), &v(&a) + &v(&b));
            prop_assert!(v(&Field::add(&a, &b)) >= v(&a).min(v(&b)));
        }

        #[test]
        fn field_laws(a in kelem_strategy(), b in kelem_strategy()) {
            prop_assume!(!b.is_zero());
            let q = a.checked_div(&b).unwrap();
            prop_assert_eq!(Field::mul(&q, &b), a.clone());
            prop_assert_eq!(Field::sub(&Field::add(&a, &b), &b), a);
        }
    }
}

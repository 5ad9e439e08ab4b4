//! Truncated power series in `y` and a valuation oracle that substitutes a
//! series root `x = phi(y)` of the defining polynomial.

use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basefield::{KElem, YPoly};
use crate::numeric::{Rat, Value};
use crate::poly::{Field, Poly};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("square root needs constant term 1")]
    BadConstantTerm,
    #[error("defining polynomial must have degree at least 1 in x")]
    BadDefiningPolynomial,
    #[error("branch does not determine a unique root: ord P(branch) = {residual}, ord P'(branch) = {derivative}")]
    BadBranch { residual: String, derivative: String },
    #[error("precision policy needs 1 <= initial <= max and growth >= 2")]
    BadPolicy,
}

/// A power series known modulo `y^precision`.
#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Rat>,
    precision: usize,
}

/// Order of a series, or the statement that it vanishes to the stored
/// precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOrd {
    Exact(usize),
    InsufficientPrecision { precision: usize },
}

impl SeriesOrd {
    /// The order, or the precision as a lower bound for it.
    pub fn lower_bound(&self) -> usize {
        match *self {
            SeriesOrd::Exact(k) => k,
            SeriesOrd::InsufficientPrecision { precision } => precision,
        }
    }
}

impl Series {
    /// Coefficients past `precision` are dropped; missing ones are zero.
    pub fn from_coeffs(mut coeffs: Vec<Rat>, precision: usize) -> Self {
        coeffs.resize(precision, Rat::zero());
        Series { coeffs, precision }
    }

    pub fn zero(precision: usize) -> Self {
        Self::from_coeffs(vec![], precision)
    }

    pub fn one(precision: usize) -> Self {
        Self::from_coeffs(vec![Rat::one()], precision)
    }

    pub fn from_ypoly(p: &YPoly, precision: usize) -> Self {
        Self::from_coeffs(p.coeffs().iter().take(precision).cloned().collect(), precision)
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of `y^k`; zero past the precision.
    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn order(&self) -> SeriesOrd {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(k) => SeriesOrd::Exact(k),
            None => SeriesOrd::InsufficientPrecision {
                precision: self.precision,
            },
        }
    }

    /// The stored coefficients as a polynomial.
    pub fn truncation(&self) -> YPoly {
        YPoly::from_coeffs(self.coeffs.clone())
    }

    pub fn truncate(&self, precision: usize) -> Series {
        let p = precision.min(self.precision);
        Series::from_coeffs(self.coeffs[..p].to_vec(), p)
    }

    pub fn add(&self, other: &Series) -> Series {
        let p = self.precision.min(other.precision);
        Series::from_coeffs((0..p).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect(), p)
    }

    pub fn neg(&self) -> Series {
        Series::from_coeffs(self.coeffs.iter().map(|c| -c).collect(), self.precision)
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    /// `self - p` for an exact polynomial `p`.
    pub fn sub_poly(&self, p: &YPoly) -> Series {
        self.sub(&Series::from_ypoly(p, self.precision))
    }

    pub fn scale(&self, c: &Rat) -> Series {
        Series::from_coeffs(self.coeffs.iter().map(|a| a * c).collect(), self.precision)
    }

    /// Product; an operand of known order `k` lets the other lose `k` fewer
    /// digits.
    pub fn mul(&self, other: &Series) -> Series {
        let p = (self.precision + other.order().lower_bound())
            .min(other.precision + self.order().lower_bound());
        // Convolve integer numerators over a common denominator; adding
        // rationals term by term spends most of its time in gcds.
        let (na, da) = integral_parts(&self.coeffs);
        let (nb, db) = integral_parts(&other.coeffs);
        let mut out = vec![BigInt::zero(); p];
        for (i, a) in na.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in nb.iter().enumerate().take(p.saturating_sub(i)) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        let d = da * db;
        Series::from_coeffs(out.into_iter().map(|n| Rat::new(n, d.clone())).collect(), p)
    }

    /// Multiply by `y^k`.
    pub fn shift_up(&self, k: usize) -> Series {
        let mut c = vec![Rat::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        Series::from_coeffs(c, self.precision + k)
    }

    /// Divide by `y^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Series {
        assert!(self.coeffs.iter().take(k).all(Rat::is_zero), "not divisible by y^k");
        let k = k.min(self.precision);
        Series::from_coeffs(self.coeffs[k..].to_vec(), self.precision - k)
    }

    /// Multiplicative inverse of a unit (nonzero constant term), by Newton
    /// iteration `t <- t (2 - s t)`.
    pub fn inverse(&self) -> Option<Series> {
        let c0 = self.coeffs.first()?.recip()?;
        let p = self.precision;
        let two = Series::from_coeffs(vec![Rat::from(2i64)], p);
        let mut t = Series::from_coeffs(vec![c0], 1);
        while t.precision < p {
            let k = (2 * t.precision).min(p);
            let t_ext = Series::from_coeffs(t.coeffs, k);
            let st = self.truncate(k).mul(&t_ext).truncate(k);
            t = t_ext.mul(&two.truncate(k).sub(&st)).truncate(k);
        }
        Some(t)
    }

    pub fn pow(&self, e: u32) -> Series {
        let mut acc = Series::one(self.precision + e as usize * self.order().lower_bound());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.truncation();
        if !p.is_zero() {
            write!(f, "{} + ", text::format_ypoly(&p, "y"))?;
        }
        write!(f, "O(y^{})", self.precision)
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Square root with constant term 1, by solving `t^2 = s` one coefficient
/// at a time.
pub fn series_sqrt(s: &Series) -> Result<Series, OracleError> {
    if s.precision() == 0 || !s.coeff(0).is_one() {
        return Err(OracleError::BadConstantTerm);
    }
    let half = Rat::new(1, 2);
    let mut t = vec![Rat::one()];
    for n in 1..s.precision() {
        let mut acc = s.coeff(n);
        for k in 1..n {
            acc = acc - &t[k] * &t[n - k];
        }
        t.push(acc * &half);
    }
    Ok(Series::from_coeffs(t, s.precision()))
}

/// Index of the first nonzero coefficient.
pub fn series_ord(s: &Series) -> SeriesOrd {
    s.order()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub initial: usize,
    pub growth: usize,
    pub max: usize,
}

impl PrecisionPolicy {
    pub fn new(initial: usize, growth: usize, max: usize) -> Result<Self, OracleError> {
        if initial == 0 || initial > max || growth < 2 {
            return Err(OracleError::BadPolicy);
        }
        Ok(PrecisionPolicy { initial, growth, max })
    }

    pub fn for_depth(depth: usize) -> Self {
        PrecisionPolicy {
            initial: 2 * depth + 4,
            growth: 2,
            max: 512,
        }
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self::for_depth(4)
    }
}

/// Result of [`oracle_valuation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleValue {
    Exact(Value),
    /// `f(phi)` vanished to the largest precision allowed; carries the
    /// resulting lower bound. Usually means `f` is zero in `L`.
    AtLeast(Rat),
}

impl OracleValue {
    pub fn exact(&self) -> Option<&Value> {
        match self {
            OracleValue::Exact(v) => Some(v),
            OracleValue::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for OracleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleValue::Exact(v) => write!(f, "{v}"),
            OracleValue::AtLeast(b) => write!(f, ">= {b}"),
        }
    }
}

/// Numerators over the least common denominator.
fn integral_parts(c: &[Rat]) -> (Vec<BigInt>, BigInt) {
    let d = c.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let n = c.iter().map(|r| r.numer() * (&d / r.denom())).collect();
    (n, d)
}

/// `y^e * unit` for a nonzero polynomial.
fn split_order(p: &YPoly) -> (usize, YPoly) {
    let e = p.order().expect("nonzero");
    let unit = YPoly::from_coeffs(p.coeffs()[e..].to_vec());
    (e, unit)
}

/// A root `x = phi(y)` of the defining polynomial, refined from a branch
/// polynomial by Newton iteration.
#[derive(Debug, Clone)]
pub struct Parametrization {
    defining: Poly,
    /// Defining polynomial with coefficients cleared to `Q[y]`.
    integral: Vec<YPoly>,
    branch: YPoly,
    policy: PrecisionPolicy,
    /// `ord P'(phi)`.
    derivative_order: usize,
    phi: Series,
    /// Most precise root computed so far, shared between clones.
    best: Arc<RwLock<Series>>,
}

impl Parametrization {
    pub fn new(defining: Poly, branch: YPoly, policy: PrecisionPolicy) -> Result<Self, OracleError> {
        if defining.degree().is_none_or(|d| d == 0) {
            return Err(OracleError::BadDefiningPolynomial);
        }
        let common = defining.coeffs().iter().fold(YPoly::one(), |acc, c| {
            let g = acc.gcd(c.den());
            (&acc * c.den()).divmod(&g).expect("nonzero").0
        });
        let integral: Vec<YPoly> = defining
            .coeffs()
            .iter()
            .map(|c| {
                let q = common.divmod(c.den()).expect("nonzero").0;
                c.num() * &q
            })
            .collect();
        let mut par = Parametrization {
            defining,
            integral,
            branch,
            policy,
            derivative_order: 0,
            phi: Series::zero(0),
            best: Arc::new(RwLock::new(Series::zero(0))),
        };
        let probe = policy.initial.max(8);
        let b = Series::from_ypoly(&par.branch, probe);
        let residual = par.eval_integral(&b, false).order();
        let derivative = par.eval_integral(&b, true).order();
        let bad = || OracleError::BadBranch {
            residual: format!("{residual:?}"),
            derivative: format!("{derivative:?}"),
        };
        let SeriesOrd::Exact(e) = derivative else {
            return Err(bad());
        };
        if residual.lower_bound() <= 2 * e {
            return Err(bad());
        }
        par.derivative_order = e;
        par.phi = par.root_to(policy.initial);
        Ok(par)
    }

    pub fn defining(&self) -> &Poly {
        &self.defining
    }

    pub fn branch(&self) -> &YPoly {
        &self.branch
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    /// The root at the initial precision.
    pub fn phi(&self) -> &Series {
        &self.phi
    }

    /// `P(s)` or `P'(s)` using the cleared coefficients.
    fn eval_integral(&self, s: &Series, derivative: bool) -> Series {
        let p = s.precision();
        let coeffs: Vec<(usize, &YPoly)> = self.integral.iter().enumerate().collect();
        let mut acc = Series::zero(p);
        for &(k, c) in coeffs.iter().rev() {
            let c = if derivative {
                if k == 0 {
                    continue;
                }
                c * &YPoly::constant(Rat::from(k as u64))
            } else {
                c.clone()
            };
            acc = acc.mul(s).truncate(p).add(&Series::from_ypoly(&c, p));
        }
        acc
    }

    /// The root modulo `y^precision`.
    pub fn root_to(&self, precision: usize) -> Series {
        let start = {
            let best = self.best.read().expect("lock");
            if best.precision() >= precision {
                return best.truncate(precision);
            }
            if best.precision() == 0 {
                self.branch.clone()
            } else {
                best.truncation()
            }
        };
        let e = self.derivative_order;
        let w = precision + e;
        let mut phi = Series::from_ypoly(&start, w);
        loop {
            let r = self.eval_integral(&phi, false);
            let k = match r.order() {
                SeriesOrd::Exact(k) if k < w => k,
                _ => {
                    let root = phi.truncate(precision);
                    let mut best = self.best.write().expect("lock");
                    if best.precision() < precision {
                        *best = root.clone();
                    }
                    return root;
                }
            };
            let d = self.eval_integral(&phi, true);
            let unit = d.shift_down(e).inverse().expect("derivative order is stable");
            let delta = r.shift_down(e).mul(&unit).truncate(w - e);
            debug_assert!(k > 2 * e);
            phi = Series::from_coeffs(
                (0..w)
                    .map(|i| if i < w - e { &phi.coeffs[i] - &delta.coeff(i) } else { phi.coeffs[i].clone() })
                    .collect(),
                w,
            );
        }
    }
}

/// `ord_y f(phi(y), y)` with precision grown by the policy until it is
/// determined.
pub fn oracle_valuation(f: &Poly, par: &Parametrization) -> OracleValue {
    if f.is_zero() {
        return OracleValue::Exact(Value::Infinity);
    }
    // Clear denominators that vanish at y = 0 by a common power of y.
    let parts: Vec<Option<(YPoly, usize, YPoly)>> = f
        .coeffs()
        .iter()
        .map(|c: &KElem| {
            (!c.is_zero()).then(|| {
                let (e, unit) = split_order(c.den());
                (c.num().clone(), e, unit)
            })
        })
        .collect();
    let shift = parts.iter().flatten().map(|(_, e, _)| *e).max().unwrap_or(0);
    let policy = par.policy();
    let mut prec = policy.initial;
    loop {
        let phi = if prec == policy.initial { par.phi().clone() } else { par.root_to(prec) };
        let mut acc = Series::zero(prec + shift);
        let mut power = Series::one(prec + shift);
        for part in &parts {
            if let Some((num, e, unit)) = part {
                let unit_inv = Series::from_ypoly(unit, prec).inverse().expect("unit");
                let term = Series::from_ypoly(num, prec)
                    .mul(&unit_inv)
                    .shift_up(shift - e)
                    .mul(&power);
                acc = acc.add(&term);
            }
            power = power.mul(&phi);
        }
        let shift_r = Rat::from(shift as u64);
        match acc.order() {
            SeriesOrd::Exact(k) => {
                return OracleValue::Exact(Value::Finite(Rat::from(k as u64) - shift_r))
            }
            SeriesOrd::InsufficientPrecision { precision } if prec >= policy.max => {
                return OracleValue::AtLeast(Rat::from(precision as u64) - shift_r)
            }
            SeriesOrd::InsufficientPrecision { .. } => {
                prec = (prec * policy.growth).min(policy.max);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::testutil::rat_strategy;
    use crate::text::parse_poly_default as p;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn s(c: &[(i64, i64)], prec: usize) -> Series {
        Series::from_coeffs(c.iter().map(|&(n, d)| r(n, d)).collect(), prec)
    }

    #[test]
    fn sqrt_examples() {
        let t = series_sqrt(&s(&[(1, 1), (1, 1)], 4)).unwrap();
        assert_eq!(t, s(&[(1, 1), (1, 2), (-1, 8), (1, 16)], 4));
        assert_eq!(t.mul(&t), s(&[(1, 1), (1, 1)], 4));
        assert_eq!(series_sqrt(&Series::one(5)).unwrap(), Series::one(5));
        let t = series_sqrt(&s(&[(1, 1), (0, 1), (1, 1)], 6)).unwrap();
        assert_eq!(t, s(&[(1, 1), (0, 1), (1, 2), (0, 1), (-1, 8)], 6));
        assert_eq!(series_sqrt(&s(&[(2, 1)], 3)).unwrap_err(), OracleError::BadConstantTerm);
    }

    #[test]
    fn ord_examples() {
        assert_eq!(series_ord(&s(&[(0, 1), (0, 1), (0, 1), (1, 1), (0, 1), (-1, 1)], 8)), SeriesOrd::Exact(3));
        assert_eq!(series_ord(&Series::zero(4)), SeriesOrd::InsufficientPrecision { precision: 4 });
    }

    #[test]
    fn mul_tracks_precision() {
        let a = s(&[(0, 1), (1, 1)], 5);
        let b = s(&[(0, 1), (0, 1), (1, 1)], 4);
        assert_eq!(a.mul(&b).precision(), 5);
        assert_eq!(Series::zero(3).mul(&a).precision(), 4);
    }

    #[test]
    fn conic_root_matches_sqrt() {
        let par = catalog::conic_parametrization(PrecisionPolicy::for_depth(4));
        let root = par.root_to(12);
        let sq = series_sqrt(&s(&[(1, 1), (1, 1)], 12)).unwrap();
        let expected = sq.shift_up(1).neg().truncate(12);
        assert_eq!(root, expected);
    }

    #[test]
    fn oracle_examples() {
        let par = catalog::conic_parametrization(PrecisionPolicy::for_depth(4));
        assert_eq!(oracle_valuation(&p("x + y"), &par), OracleValue::Exact(Value::from(2)));
        assert_eq!(oracle_valuation(&p("x"), &par), OracleValue::Exact(Value::from(1)));
        assert_eq!(oracle_valuation(&p("x^2 - y^2 - y^3"), &par), OracleValue::AtLeast(r(512, 1)));
        assert_eq!(oracle_valuation(&Poly::zero(), &par), OracleValue::Exact(Value::Infinity));
        assert_eq!(oracle_valuation(&p("x/y"), &par), OracleValue::Exact(Value::from(0)));
        assert_eq!(oracle_valuation(&p("1/(y^2 + y^3)"), &par), OracleValue::Exact(Value::from(-2)));
    }

    #[test]
    fn oracle_grows_precision() {
        let par = catalog::conic_parametrization(PrecisionPolicy::new(4, 2, 64).unwrap());
        let u = catalog::conic_truncation(10);
        assert_eq!(oracle_valuation(u.key(10), &par), OracleValue::Exact(Value::from(10)));
    }

    #[test]
    fn oracle_agrees_with_conic_keys() {
        let depth = 6;
        let par = catalog::conic_parametrization(PrecisionPolicy::for_depth(depth));
        let b = catalog::conic_truncation(depth);
        for i in 1..=depth {
            assert_eq!(
                oracle_valuation(b.key(i), &par),
                OracleValue::Exact(Value::from(b.beta(i).clone()))
            );
        }
    }

    #[test]
    fn rejects_bad_branch() {
        let def = p("x^2 - y^2 - y^3");
        assert!(matches!(
            Parametrization::new(def.clone(), YPoly::zero(), PrecisionPolicy::default()),
            Err(OracleError::BadBranch { .. })
        ));
        assert!(matches!(
            Parametrization::new(def, YPoly::constant(r(1, 1)), PrecisionPolicy::default()),
            Err(OracleError::BadBranch { .. })
        ));
        assert_eq!(PrecisionPolicy::new(0, 2, 8).unwrap_err(), OracleError::BadPolicy);
    }

    #[test]
    fn rational_coefficients_in_defining_polynomial() {
        // Same curve, scaled by 1/(1 + y).
        let def = p("x^2/(1 + y) - y^2");
        let par = Parametrization::new(def, YPoly::from_coeffs(vec![r(0, 1), r(-1, 1)]), PrecisionPolicy::default())
            .unwrap();
        assert_eq!(oracle_valuation(&p("x + y"), &par), OracleValue::Exact(Value::from(2)));
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(tail in prop::collection::vec(rat_strategy(), 0..10)) {
            let mut c = vec![Rat::one()];
            c.extend(tail);
            let prec = c.len();
            let s = Series::from_coeffs(c, prec);
            let t = series_sqrt(&s).unwrap();
            prop_assert_eq!(t.mul(&t), s);
        }

        #[test]
        fn recomputation_does_not_revise(a in rat_strategy(), b in rat_strategy(), c in rat_strategy()) {
            let f = p(&format!("({a})*x + ({b})*y + ({c})*y^2"));
            let par = catalog::conic_parametrization(PrecisionPolicy::for_depth(3));
            let twice = catalog::conic_parametrization(PrecisionPolicy::new(20, 2, 1024).unwrap());
            if let OracleValue::Exact(v) = oracle_valuation(&f, &par) {
                prop_assert_eq!(OracleValue::Exact(v), oracle_valuation(&f, &twice));
            }
        }
    }
}

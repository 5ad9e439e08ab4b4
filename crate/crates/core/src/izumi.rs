//! Gauss valuations, closed-form Izumi constants between weight maps, the
//! comparison bounds built from them, and a seeded search for the supremum
//! of `mu(f) / mu'(f)` over random polynomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::basefield::{BaseFieldConfig, KElem, YPoly};
use crate::keybasis::{KeyError, WeightedBasis};
use crate::numeric::{Rat, Value};
use crate::oracle::{oracle_valuation, OracleValue, Parametrization};
use crate::poly::{poly_reduce, ExtensionConfig, Field, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IzumiError {
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error("expected a positive rational, got {0}")]
    NonPositive(Rat),
    #[error("levels must satisfy 1 <= j <= upper <= alpha, got j = {j}, upper = {upper}")]
    BadLevels { upper: usize, j: usize },
    #[error("power must be at least 1")]
    ZeroPower,
    #[error("closed form gives {formula} but division gives {direct}")]
    ConsistencyFailure { formula: Box<Rat>, direct: Box<Value> },
    #[error("basis fails validation: {0}")]
    InvalidBasis(String),
    #[error("normalized bound needs mu(x) >= 1 and mu'(x) >= 1, got {mu_x} and {mu_prime_x}")]
    NormalizationViolation { mu_x: Box<Rat>, mu_prime_x: Box<Rat> },
    #[error("corpus needs at least one sample and max degree at least 1")]
    BadCorpus,
    #[error("every sample was skipped ({skipped} of them)")]
    EmptyEffectiveCorpus { skipped: usize },
    #[error("denominator valuation vanishes while numerator is {numerator} at {witness}")]
    UnboundedRatioDetected { witness: String, numerator: Value },
}

fn positive(r: &Rat) -> Result<(), IzumiError> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(IzumiError::NonPositive(r.clone()))
    }
}

/// `ord_{v,beta}`: `x` gets weight `beta`, coefficients their base value.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussValuation {
    base: BaseFieldConfig,
    beta: Rat,
    ext: ExtensionConfig,
}

impl GaussValuation {
    pub fn new(base: BaseFieldConfig, beta: Rat) -> Result<Self, IzumiError> {
        positive(&beta)?;
        Ok(GaussValuation {
            base,
            beta,
            ext: ExtensionConfig::Transcendental,
        })
    }

    /// Evaluate on the remainder modulo the minimal polynomial instead of
    /// on the polynomial itself.
    pub fn on_extension(mut self, ext: ExtensionConfig) -> Self {
        self.ext = ext;
        self
    }

    pub fn base(&self) -> &BaseFieldConfig {
        &self.base
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }
}

/// `min_i v(c_i) + i beta` over the monomials of `f`; `inf` for zero.
pub fn gauss_value(f: &Poly, g: &GaussValuation) -> Value {
    let reduced;
    let f = match g.ext {
        ExtensionConfig::Transcendental => f,
        ref ext => {
            reduced = poly_reduce(f, ext).expect("algebraic");
            &reduced
        }
    };
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| &g.base.valuation(c) + &(&g.beta * &Rat::from(i as u64)))
        .min()
        .unwrap_or(Value::Infinity)
}

fn check_levels(basis: &WeightedBasis, upper: usize, j: usize) -> Result<(), IzumiError> {
    if j == 0 || j > upper || upper > basis.alpha() {
        return Err(IzumiError::BadLevels { upper, j });
    }
    Ok(())
}

/// `prod_{k=j}^{upper-1} m_k`.
fn ratio_product(basis: &WeightedBasis, upper: usize, j: usize) -> Result<Rat, IzumiError> {
    (j..upper).try_fold(Rat::one(), |acc, k| Ok(acc * Rat::from(basis.ratio(k)?)))
}

/// `omega_j(U_upper^ell) = (prod_{k=j}^{upper-1} m_k) * ell * beta_j`,
/// checked against the weight of the expanded power. `j = upper` is the
/// diagonal case `ell * beta_upper`.
pub fn key_power_weight(basis: &WeightedBasis, upper: usize, ell: u32, j: usize) -> Result<Rat, IzumiError> {
    check_levels(basis, upper, j)?;
    if ell == 0 {
        return Err(IzumiError::ZeroPower);
    }
    let formula = ratio_product(basis, upper, j)? * Rat::from(ell as u64) * basis.beta(j).clone();
    let direct = basis.weight_ring(&basis.key(upper).pow(ell), j)?;
    if direct != Value::Finite(formula.clone()) {
        return Err(IzumiError::ConsistencyFailure { formula: Box::new(formula), direct: Box::new(direct) });
    }
    Ok(formula)
}

/// `c(omega_upper, omega_j) = beta_upper / ((prod_{k=j}^{upper-1} m_k) beta_j)`.
pub fn izumi_step_constant(basis: &WeightedBasis, upper: usize, j: usize) -> Result<Rat, IzumiError> {
    check_levels(basis, upper, j)?;
    let denom = ratio_product(basis, upper, j)? * basis.beta(j).clone();
    Ok(basis.beta(upper) / &denom)
}

/// `<beta / beta'>`: the ratio when `beta > beta'`, else 1.
pub fn bracket_ratio(beta: &Rat, beta_prime: &Rat) -> Result<Rat, IzumiError> {
    positive(beta)?;
    positive(beta_prime)?;
    Ok(if beta > beta_prime {
        beta / beta_prime
    } else {
        Rat::one()
    })
}

/// Upper bound for `c(ord_{v,beta}, ord_{v',beta'})` given `c(v, v')`.
pub fn ord_comparison_bound(beta: &Rat, beta_prime: &Rat, c_base: &Rat) -> Result<Rat, IzumiError> {
    positive(c_base)?;
    Ok(bracket_ratio(beta, beta_prime)? * c_base.clone())
}

/// Upper bound for `c(mu, mu')` where `mu = omega_alpha` of the basis and
/// `mu'(x)` is given: `max(1/mu(x), 1/mu'(x)) c_base beta_alpha / deg U_alpha`.
/// The normalized form drops the leading factor and needs both values of
/// `x` to be at least 1.
pub fn extension_bound(
    basis: &WeightedBasis,
    mu_prime_x: &Rat,
    c_base: &Rat,
    normalized: bool,
) -> Result<Rat, IzumiError> {
    positive(mu_prime_x)?;
    positive(c_base)?;
    let report = basis.validate();
    if let Some(v) = report.violations.first() {
        return Err(IzumiError::InvalidBasis(format!(
            "step {} ({}): {}",
            v.step, v.condition, v.message
        )));
    }
    let alpha = basis.alpha();
    let top = basis.beta(alpha) / &Rat::from(basis.degree(alpha) as u64) * c_base.clone();
    let mu_x = basis.beta(1);
    if normalized {
        if mu_x < &Rat::one() || mu_prime_x < &Rat::one() {
            return Err(IzumiError::NormalizationViolation {
                mu_x: Box::new(mu_x.clone()),
                mu_prime_x: Box::new(mu_prime_x.clone()),
            });
        }
        return Ok(top);
    }
    let lead = mu_x.recip().unwrap().max(mu_prime_x.recip().unwrap());
    Ok(lead * top)
}

/// `c1 * c2`, the bound for a composite comparison.
pub fn chain_bound(c1: &Rat, c2: &Rat) -> Result<Rat, IzumiError> {
    positive(c1)?;
    positive(c2)?;
    Ok(c1 * c2)
}

/// Anything that assigns a value to a polynomial.
pub trait PolyValuation: Sync {
    fn value(&self, f: &Poly) -> Result<Value, IzumiError>;
    fn label(&self) -> String;
    fn base(&self) -> &BaseFieldConfig;
    /// Polynomials known to be extremal for this valuation.
    fn canonical_witnesses(&self) -> Vec<Poly> {
        Vec::new()
    }
}

/// `omega_level` of a basis as a [`PolyValuation`].
#[derive(Debug, Clone, Copy)]
pub struct WeightMap<'a> {
    pub basis: &'a WeightedBasis,
    pub level: usize,
}

impl<'a> WeightMap<'a> {
    pub fn new(basis: &'a WeightedBasis, level: usize) -> Result<Self, IzumiError> {
        basis.check_level(level)?;
        Ok(WeightMap { basis, level })
    }
}

impl PolyValuation for WeightMap<'_> {
    fn value(&self, f: &Poly) -> Result<Value, IzumiError> {
        Ok(self.basis.weight(f, self.level)?)
    }

    fn label(&self) -> String {
        format!("omega_{}", self.level)
    }

    fn base(&self) -> &BaseFieldConfig {
        self.basis.base()
    }

    /// The keys up to the level and their squares and cubes.
    fn canonical_witnesses(&self) -> Vec<Poly> {
        (1..=self.level)
            .flat_map(|i| (1..=3).map(move |l| self.basis.key(i).pow(l)))
            .collect()
    }
}

impl PolyValuation for GaussValuation {
    fn value(&self, f: &Poly) -> Result<Value, IzumiError> {
        Ok(gauss_value(f, self))
    }

    fn label(&self) -> String {
        format!("ord_{}", self.beta)
    }

    fn base(&self) -> &BaseFieldConfig {
        &self.base
    }

    fn canonical_witnesses(&self) -> Vec<Poly> {
        vec![Poly::var()]
    }
}

/// The oracle valuation. A value that stays undetermined at the maximal
/// precision is reported as `inf`.
pub struct OracleHandle {
    pub param: Parametrization,
    base: BaseFieldConfig,
}

impl OracleHandle {
    pub fn new(param: Parametrization) -> Self {
        OracleHandle {
            param,
            base: BaseFieldConfig::function_field(),
        }
    }
}

impl PolyValuation for OracleHandle {
    fn value(&self, f: &Poly) -> Result<Value, IzumiError> {
        Ok(match oracle_valuation(f, &self.param) {
            OracleValue::Exact(v) => v,
            OracleValue::AtLeast(_) => Value::Infinity,
        })
    }

    fn label(&self) -> String {
        "mu".into()
    }

    fn base(&self) -> &BaseFieldConfig {
        &self.base
    }

    fn canonical_witnesses(&self) -> Vec<Poly> {
        vec![Poly::var()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusConfig {
    pub seed: u64,
    pub samples: usize,
    pub max_degree: usize,
    /// Largest base valuation of a drawn coefficient.
    pub max_valuation: u32,
    /// Draw constant terms from the maximal ideal and drop samples whose
    /// values are not both positive.
    pub positive: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 42,
            samples: 10_000,
            max_degree: 8,
            max_valuation: 3,
            positive: true,
        }
    }
}

/// A coefficient of base valuation exactly `v`.
fn draw_coefficient(rng: &mut ChaCha8Rng, base: &BaseFieldConfig, v: u32) -> KElem {
    match base {
        BaseFieldConfig::FunctionField { .. } => {
            let mut c = vec![Rat::zero(); v as usize];
            let lead = rng.gen_range(1..=3i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
            c.push(Rat::from(lead));
            for _ in 0..rng.gen_range(0..=2) {
                c.push(Rat::from(rng.gen_range(-3..=3i64)));
            }
            KElem::from_ypoly(YPoly::from_coeffs(c))
        }
        BaseFieldConfig::PAdic { p } => {
            let p = *p as i64;
            let unit = loop {
                let u = rng.gen_range(1..=p * p + 1);
                if u % p != 0 {
                    break u;
                }
            };
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            KElem::from(Rat::from(sign * unit * p.pow(v)))
        }
    }
}

/// Sample `index` of the corpus; depends only on `seed ^ index`.
pub fn corpus_sample(cfg: &CorpusConfig, base: &BaseFieldConfig, index: u64) -> Poly {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ index);
    let degree = rng.gen_range(1..=cfg.max_degree.max(1));
    let coeffs = (0..=degree)
        .map(|k| {
            if k != degree && rng.gen_bool(0.3) {
                return <KElem as Field>::zero();
            }
            let low = if cfg.positive && k == 0 { 1 } else { 0 };
            let v = rng.gen_range(low..=cfg.max_valuation.max(low));
            draw_coefficient(&mut rng, base, v)
        })
        .collect();
    Poly::from_coeffs(coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessSource {
    Canonical(usize),
    Sample(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IzumiReport {
    pub numerator: String,
    pub denominator: String,
    pub sup_found: Rat,
    pub witness: Poly,
    pub source: WitnessSource,
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
    pub theoretical: Option<Rat>,
}

impl IzumiReport {
    /// `None` without a theoretical value.
    pub fn within_theoretical(&self) -> Option<bool> {
        self.theoretical.as_ref().map(|t| &self.sup_found <= t)
    }
}

enum Outcome {
    Ratio(Rat),
    Skipped,
}

fn evaluate(a: &dyn PolyValuation, b: &dyn PolyValuation, f: &Poly, positive: bool) -> Result<Outcome, IzumiError> {
    let (va, vb) = (a.value(f)?, b.value(f)?);
    let zero = Value::zero();
    if vb == zero && va > zero {
        return Err(IzumiError::UnboundedRatioDetected {
            witness: crate::text::format_poly(f, "x"),
            numerator: va,
        });
    }
    match (va, vb) {
        (Value::Finite(x), Value::Finite(y)) if !y.is_zero() && (!positive || (x.is_positive() && y.is_positive())) => {
            Ok(Outcome::Ratio(&x / &y))
        }
        _ => Ok(Outcome::Skipped),
    }
}

/// Largest `a(f) / b(f)` over the canonical witnesses of both valuations and
/// a seeded random corpus. Ties keep the earliest candidate, canonical
/// witnesses first.
pub fn empirical_izumi(
    a: &dyn PolyValuation,
    b: &dyn PolyValuation,
    corpus: &CorpusConfig,
    theoretical: Option<Rat>,
) -> Result<IzumiReport, IzumiError> {
    if corpus.samples == 0 || corpus.max_degree == 0 {
        return Err(IzumiError::BadCorpus);
    }
    let canonical: Vec<Poly> = a
        .canonical_witnesses()
        .into_iter()
        .chain(b.canonical_witnesses())
        .collect();
    let base = a.base().clone();
    let sampled: Vec<(Poly, Outcome)> = (0..corpus.samples as u64)
        .into_par_iter()
        .map(|j| {
            let f = corpus_sample(corpus, &base, j);
            let out = evaluate(a, b, &f, corpus.positive)?;
            Ok((f, out))
        })
        .collect::<Result<_, IzumiError>>()?;
    let mut best: Option<(Rat, Poly, WitnessSource)> = None;
    let mut skipped = 0;
    let mut consider = |ratio: Rat, f: &Poly, src: WitnessSource| {
        if best.as_ref().is_none_or(|(r, _, _)| &ratio > r) {
            best = Some((ratio, f.clone(), src));
        }
    };
    for (k, f) in canonical.iter().enumerate() {
        // Canonical witnesses are exempt from the positivity filter but not
        // from the zero-denominator check.
        if let Outcome::Ratio(r) = evaluate(a, b, f, false)? {
            consider(r, f, WitnessSource::Canonical(k));
        }
    }
    for (j, (f, out)) in sampled.iter().enumerate() {
        match out {
            Outcome::Ratio(r) => consider(r.clone(), f, WitnessSource::Sample(j as u64)),
            Outcome::Skipped => skipped += 1,
        }
    }
    let Some((sup_found, witness, source)) = best.filter(|_| skipped < corpus.samples) else {
        return Err(IzumiError::EmptyEffectiveCorpus { skipped });
    };
    Ok(IzumiReport {
        numerator: a.label(),
        denominator: b.label(),
        sup_found,
        witness,
        source,
        samples: corpus.samples,
        skipped,
        seed: corpus.seed,
        theoretical,
    })
}

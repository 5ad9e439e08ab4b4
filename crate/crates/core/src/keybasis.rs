//! Weighted bases `{U_i; beta_i}` of `K[x]`, adic expansions and weight maps.
//!
//! Levels are 1-based throughout the public API: level `i` uses the keys
//! `U_1, ..., U_i`. An exponent vector of an expansion at level `i` has
//! exactly `i` entries.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::basefield::{BaseFieldConfig, KElem, YPoly};
use crate::numeric::{self, NumericError, Rat, SubgroupGen, Value};
use crate::oracle::{Series, SeriesOrd};
use crate::poly::{poly_reduce, ExtensionConfig, Field, Poly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("a weighted basis needs at least one key")]
    Empty,
    #[error("the first key must be x")]
    FirstKeyNotX,
    #[error("key {step} is not monic in x")]
    NotMonic { step: usize },
    #[error("key {step} is constant")]
    ConstantKey { step: usize },
    #[error("weight of key {step} must be positive, got {beta}")]
    NonPositiveBeta { step: usize, beta: Rat },
    #[error("level {level} out of range 1..={alpha}")]
    LevelOutOfRange { level: usize, alpha: usize },
    #[error("expansion has level {found}, expected {expected}")]
    LevelMismatch { expected: usize, found: usize },
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("deg U_{next} is not a multiple of deg U_{step}")]
    UndefinedRatio { step: usize, next: usize },
    #[error("m_{step} = {m} is not divisible by n_{step} = {n}")]
    IndexPowerViolation { step: usize, m: u64, n: u64 },
    #[error("series must have zero constant term")]
    NonzeroConstantTerm,
    #[error("series precision {precision} does not exceed depth {depth}")]
    InsufficientPrecision { precision: usize, depth: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// A finite sum of terms `c * U_1^{a_1} ... U_l^{a_l}` with no constraint on
/// the exponents. Like terms are always combined and zero terms dropped.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FormalExpansion {
    level: usize,
    terms: BTreeMap<Vec<u32>, KElem>,
}

impl FormalExpansion {
    pub fn new(level: usize) -> Self {
        FormalExpansion {
            level,
            terms: BTreeMap::new(),
        }
    }

    /// Build from terms; exponent vectors shorter than `level` are padded with
    /// zeros. Panics if one is longer.
    pub fn from_terms(level: usize, terms: impl IntoIterator<Item = (Vec<u32>, KElem)>) -> Self {
        let mut e = Self::new(level);
        for (a, c) in terms {
            e.add_term(a, c);
        }
        e
    }

    pub fn constant(level: usize, c: KElem) -> Self {
        Self::from_terms(level, [(vec![], c)])
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, KElem> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> Option<&KElem> {
        self.terms.get(exps)
    }

    /// Add `c * U^a`, combining with an existing term.
    pub fn add_term(&mut self, mut a: Vec<u32>, c: KElem) {
        assert!(a.len() <= self.level, "exponent vector longer than level");
        a.resize(self.level, 0);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(a) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = Field::add(o.get(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &FormalExpansion) {
        for (a, c) in &other.terms {
            self.add_term(a.clone(), c.clone());
        }
    }

    /// The same sum viewed at another level. Panics when shrinking would drop
    /// a nonzero exponent.
    pub fn with_level(&self, level: usize) -> FormalExpansion {
        let terms = self.terms.iter().map(|(a, c)| {
            assert!(
                a.iter().skip(level).all(|&e| e == 0),
                "cannot drop key with nonzero exponent"
            );
            let mut a = a.clone();
            a.resize(level, 0);
            (a, c.clone())
        });
        FormalExpansion::from_terms(level, terms)
    }

    /// Product of two expansions at a common level.
    pub fn mul(&self, other: &FormalExpansion) -> FormalExpansion {
        let level = self.level.max(other.level);
        let mut out = FormalExpansion::new(level);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let mut e = vec![0; level];
                for (k, x) in a.iter().enumerate() {
                    e[k] += x;
                }
                for (k, x) in b.iter().enumerate() {
                    e[k] += x;
                }
                out.add_term(e, Field::mul(c, d));
            }
        }
        out
    }

    /// The terms attaining the minimum of `weight`.
    pub(crate) fn minimal_terms(&self, weight: impl Fn(&[u32], &KElem) -> Value) -> FormalExpansion {
        let weights: Vec<Value> = self.terms.iter().map(|(a, c)| weight(a, c)).collect();
        let Some(min) = weights.iter().min().cloned() else {
            return FormalExpansion::new(self.level);
        };
        let terms = self
            .terms
            .iter()
            .zip(&weights)
            .filter(|(_, w)| **w == min)
            .map(|((a, c), _)| (a.clone(), c.clone()));
        FormalExpansion::from_terms(self.level, terms)
    }
}

impl fmt::Debug for FormalExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[level {}] ", self.level)?;
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// An expansion satisfying the adic exponent constraints of its level.
///
/// Only produced by division ([`WeightedBasis::adic_expand`]), by the
/// substitution algorithms, or by [`WeightedBasis::check_adic`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AdicExpansion(FormalExpansion);

impl AdicExpansion {
    pub fn level(&self) -> usize {
        self.0.level
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, KElem> {
        &self.0.terms
    }

    pub fn as_formal(&self) -> &FormalExpansion {
        &self.0
    }

    pub fn into_formal(self) -> FormalExpansion {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Debug for AdicExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One key `U_i` with its weight, plus data derived at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyStep {
    key: Poly,
    beta: Rat,
    /// `deg U_{i+1} / deg U_i`; `None` for the last key or when not integral.
    m: Option<u64>,
    /// The `i`-adic expansion of `U_{i+1}`, which carries the `f_{i,j}`.
    recurrence: Option<AdicExpansion>,
}

impl KeyStep {
    pub fn key(&self) -> &Poly {
        &self.key
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }

    pub fn m(&self) -> Option<u64> {
        self.m
    }

    pub fn recurrence(&self) -> Option<&AdicExpansion> {
        self.recurrence.as_ref()
    }

    pub fn degree(&self) -> usize {
        self.key.degree().expect("keys are nonzero")
    }
}

/// A finite weighted basis over a configured base field. Immutable once
/// built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBasis {
    base: BaseFieldConfig,
    ext: ExtensionConfig,
    steps: Vec<KeyStep>,
}

impl WeightedBasis {
    /// Build a basis from `(U_i, beta_i)` pairs.
    ///
    /// Structural requirements (nonempty, `U_1 = x`, monic nonconstant keys,
    /// positive weights) are enforced here; the conditions of a weighted basis
    /// proper are checked by [`WeightedBasis::validate`].
    pub fn new(
        base: BaseFieldConfig,
        ext: ExtensionConfig,
        keys: Vec<(Poly, Rat)>,
    ) -> Result<Self, KeyError> {
        if keys.is_empty() {
            return Err(KeyError::Empty);
        }
        if keys[0].0 != Poly::var() {
            return Err(KeyError::FirstKeyNotX);
        }
        for (i, (key, beta)) in keys.iter().enumerate() {
            let step = i + 1;
            if key.is_constant() {
                return Err(KeyError::ConstantKey { step });
            }
            if !key.is_monic() {
                return Err(KeyError::NotMonic { step });
            }
            if !beta.is_positive() {
                return Err(KeyError::NonPositiveBeta {
                    step,
                    beta: beta.clone(),
                });
            }
        }
        let mut steps: Vec<KeyStep> = keys
            .into_iter()
            .map(|(key, beta)| KeyStep {
                key,
                beta,
                m: None,
                recurrence: None,
            })
            .collect();
        for i in 0..steps.len() - 1 {
            let (d, dn) = (steps[i].degree(), steps[i + 1].degree());
            if dn.is_multiple_of(d) {
                steps[i].m = Some((dn / d) as u64);
            }
        }
        let mut basis = WeightedBasis { base, ext, steps };
        for i in 0..basis.steps.len() - 1 {
            let next = basis.steps[i + 1].key.clone();
            let e = basis.expand_raw(&next, i + 1, false);
            basis.steps[i].recurrence = Some(AdicExpansion(e));
        }
        Ok(basis)
    }

    pub fn base(&self) -> &BaseFieldConfig {
        &self.base
    }

    pub fn ext(&self) -> &ExtensionConfig {
        &self.ext
    }

    pub fn steps(&self) -> &[KeyStep] {
        &self.steps
    }

    /// Number of keys.
    pub fn alpha(&self) -> usize {
        self.steps.len()
    }

    pub fn check_level(&self, level: usize) -> Result<(), KeyError> {
        if level == 0 || level > self.alpha() {
            Err(KeyError::LevelOutOfRange {
                level,
                alpha: self.alpha(),
            })
        } else {
            Ok(())
        }
    }

    /// `U_i`, 1-based.
    pub fn key(&self, i: usize) -> &Poly {
        &self.steps[i - 1].key
    }

    /// `beta_i`, 1-based.
    pub fn beta(&self, i: usize) -> &Rat {
        &self.steps[i - 1].beta
    }

    /// `m_i`, 1-based; an error when `i` is the last key or the degree ratio
    /// is not integral.
    pub fn ratio(&self, i: usize) -> Result<u64, KeyError> {
        self.check_level(i)?;
        self.steps[i - 1].m.ok_or(KeyError::UndefinedRatio { step: i, next: i + 1 })
    }

    pub fn degree(&self, i: usize) -> usize {
        self.steps[i - 1].degree()
    }

    /// The `i`-adic expansion of `U_{i+1}`, 1-based.
    pub fn recurrence(&self, i: usize) -> Option<&AdicExpansion> {
        self.steps.get(i.checked_sub(1)?)?.recurrence.as_ref()
    }

    /// The coefficients `f_{i,j}` of `U_{i+1} = sum_j U_i^j f_{i,j}` as
    /// expansions at level `i - 1`, keyed by `j`. The leading `f_{i,m_i} = 1`
    /// is included.
    pub fn recurrence_coefficients(&self, i: usize) -> BTreeMap<u32, FormalExpansion> {
        let mut out: BTreeMap<u32, FormalExpansion> = BTreeMap::new();
        if let Some(rec) = self.recurrence(i) {
            for (a, c) in rec.terms() {
                let mut rest = a.clone();
                let j = rest.pop().unwrap();
                out.entry(j)
                    .or_insert_with(|| FormalExpansion::new(i - 1))
                    .add_term(rest, c.clone());
            }
        }
        out
    }

    /// Expansion of `f`, or of its reduction when `reduce` is set.
    fn expand_raw(&self, f: &Poly, level: usize, reduce: bool) -> FormalExpansion {
        let (out, den) = self.expand_scaled(f, level, reduce);
        if den.is_one() {
            return out;
        }
        let d = KElem::from_ypoly(den);
        FormalExpansion::from_terms(
            level,
            out.terms
                .into_iter()
                .map(|(a, c)| (a, c.checked_div(&d).expect("nonzero denominator"))),
        )
    }

    /// The expansion of `d f` and `d`. With polynomial keys the division runs
    /// on `d f` for the common denominator `d` of the coefficients, which
    /// avoids rational-function gcds on every step; otherwise `d = 1`.
    fn expand_scaled(&self, f: &Poly, level: usize, reduce: bool) -> (FormalExpansion, YPoly) {
        let polynomial = |g: &Poly| g.coeffs().iter().all(KElem::is_polynomial);
        let keys_ok = self.steps[..level].iter().all(|s| polynomial(&s.key))
            && self.ext.minpoly().is_none_or(polynomial);
        let den = if keys_ok { common_denominator(f) } else { YPoly::one() };
        let f = if den.is_one() {
            f.clone()
        } else {
            let coeffs = f
                .coeffs()
                .iter()
                .map(|c| {
                    let (cofactor, _) = den.divmod(c.den()).expect("nonzero denominator");
                    KElem::from_ypoly(c.num() * &cofactor)
                })
                .collect();
            Poly::from_coeffs(coeffs)
        };
        let f = if reduce { self.to_field_element(&f) } else { f };
        let mut exps = vec![0u32; level];
        let mut out = FormalExpansion::new(level);
        self.expand_into(&f, level, &mut exps, &mut out);
        (out, den)
    }

    fn expand_into(&self, f: &Poly, top: usize, exps: &mut Vec<u32>, out: &mut FormalExpansion) {
        let Some(d) = f.degree() else { return };
        let Some(j) = (0..top).rev().find(|&j| self.steps[j].degree() <= d) else {
            out.add_term(exps.clone(), f.coeff(0));
            return;
        };
        let key = &self.steps[j].key;
        let mut rest = f.clone();
        let mut k = 0u32;
        while !rest.is_zero() {
            let (q, r) = rest.divmod(key).expect("keys are nonzero");
            if !r.is_zero() {
                exps[j] = k;
                self.expand_into(&r, j, exps, out);
            }
            rest = q;
            k += 1;
        }
        exps[j] = 0;
    }

    /// The representative of `f` in `L`: reduced modulo the minimal
    /// polynomial in the algebraic case, unchanged otherwise.
    pub fn to_field_element(&self, f: &Poly) -> Poly {
        match &self.ext {
            ExtensionConfig::Transcendental => f.clone(),
            ext @ ExtensionConfig::Algebraic { .. } => poly_reduce(f, ext).expect("algebraic"),
        }
    }

    /// The `level`-adic expansion of `f` as an element of `L`, by successive
    /// division by the keys.
    pub fn adic_expand(&self, f: &Poly, level: usize) -> Result<AdicExpansion, KeyError> {
        self.check_level(level)?;
        Ok(AdicExpansion(self.expand_raw(f, level, true)))
    }

    /// The `level`-adic expansion of `f` as a polynomial in `K[x]`, without
    /// reduction modulo the minimal polynomial.
    pub fn adic_expand_ring(&self, f: &Poly, level: usize) -> Result<AdicExpansion, KeyError> {
        self.check_level(level)?;
        Ok(AdicExpansion(self.expand_raw(f, level, false)))
    }

    /// Substitute the keys back into an expansion.
    pub fn expansion_eval(&self, e: &FormalExpansion) -> Result<Poly, KeyError> {
        if e.level() > self.alpha() {
            return Err(KeyError::LevelOutOfRange {
                level: e.level(),
                alpha: self.alpha(),
            });
        }
        let mut powers: Vec<Vec<Poly>> = vec![vec![Poly::one()]; e.level()];
        let mut acc = Poly::zero();
        for (a, c) in e.terms() {
            let mut term = Poly::constant(c.clone());
            for (j, &k) in a.iter().enumerate() {
                let pw = &mut powers[j];
                while pw.len() <= k as usize {
                    let next = pw.last().unwrap() * &self.steps[j].key;
                    pw.push(next);
                }
                term = &term * &pw[k as usize];
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// `v(c) + sum_j a_j beta_j`.
    pub fn term_weight(&self, a: &[u32], c: &KElem) -> Value {
        let exps: Rat = a
            .iter()
            .zip(&self.steps)
            .filter(|(k, _)| **k > 0)
            .fold(Rat::zero(), |acc, (k, s)| acc + &s.beta * &Rat::from(*k as u64));
        &self.base.valuation(c) + &exps
    }

    /// Minimum term weight of any expansion; `inf` when empty.
    pub fn expansion_weight(&self, e: &FormalExpansion) -> Value {
        e.terms()
            .iter()
            .map(|(a, c)| self.term_weight(a, c))
            .min()
            .unwrap_or(Value::Infinity)
    }

    /// The weight map `omega_level(f)`.
    pub fn weight(&self, f: &Poly, level: usize) -> Result<Value, KeyError> {
        self.check_level(level)?;
        Ok(self.scaled_weight(f, level, true))
    }

    fn scaled_weight(&self, f: &Poly, level: usize, reduce: bool) -> Value {
        let (e, den) = self.expand_scaled(f, level, reduce);
        let w = self.expansion_weight(&e);
        match self.base.valuation(&KElem::from_ypoly(den)) {
            Value::Finite(v) => &w + &-v,
            Value::Infinity => unreachable!("nonzero denominator"),
        }
    }

    /// `omega_level` on `K[x]` without reduction modulo the minimal
    /// polynomial.
    pub fn weight_ring(&self, f: &Poly, level: usize) -> Result<Value, KeyError> {
        self.check_level(level)?;
        Ok(self.scaled_weight(f, level, false))
    }

    /// The terms of the `level`-adic expansion of `f` of minimal weight.
    pub fn initial_form(&self, f: &Poly, level: usize) -> Result<AdicExpansion, KeyError> {
        if f.is_zero() {
            return Err(KeyError::ZeroInput);
        }
        let e = self.adic_expand(f, level)?;
        Ok(AdicExpansion(
            e.as_formal().minimal_terms(|a, c| self.term_weight(a, c)),
        ))
    }

    /// Accept `e` as an adic expansion if it satisfies the exponent
    /// constraints of its level: `a_j < m_j` for `j` below the level, and in
    /// the algebraic case `sum_j a_j deg U_j <= N`.
    pub fn check_adic(&self, e: FormalExpansion) -> Result<AdicExpansion, FormalExpansion> {
        if e.level() == 0 || e.level() > self.alpha() {
            return Err(e);
        }
        let bound = self.ext.degree();
        let ok = e.terms().keys().all(|a| {
            let below = a[..a.len() - 1]
                .iter()
                .zip(&self.steps)
                .all(|(k, s)| s.m.is_some_and(|m| (*k as u64) < m));
            let deg: usize = a
                .iter()
                .zip(&self.steps)
                .map(|(k, s)| *k as usize * s.degree())
                .sum();
            below && bound.is_none_or(|n| deg <= n)
        });
        if ok {
            Ok(AdicExpansion(e))
        } else {
            Err(e)
        }
    }

    /// Check every step against the conditions of a weighted basis.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut push = |step, condition, message: String| {
            violations.push(Violation {
                step,
                condition,
                message,
            })
        };
        if let Some(n) = self.ext.degree() {
            for (k, s) in self.steps.iter().enumerate() {
                if s.degree() > n {
                    push(
                        k + 1,
                        Condition::AlgebraicDegree,
                        format!("deg U_{} = {} exceeds N = {n}", k + 1, s.degree()),
                    );
                }
            }
        }
        let mut phi = SubgroupGen::new(self.base.value_group_generator()).expect("nonzero");
        for i in 1..=self.alpha() {
            let step = &self.steps[i - 1];
            let next_phi = numeric::subgroup_generator(&[phi.generator().clone(), step.beta.clone()])
                .expect("nonzero generators");
            let n_i = numeric::subgroup_index(&phi, &next_phi).expect("refinement");
            phi = next_phi;
            if i == self.alpha() {
                break;
            }
            let Some(m) = step.m else {
                push(
                    i,
                    Condition::Recurrence,
                    format!(
                        "deg U_{} = {} is not a multiple of deg U_{i} = {}",
                        i + 1,
                        self.degree(i + 1),
                        step.degree()
                    ),
                );
                continue;
            };
            let coeffs = self.recurrence_coefficients(i);
            let lead_ok = coeffs
                .get(&(m as u32))
                .is_some_and(|f| f.len() == 1 && f.coeff(&vec![0; i - 1]).is_some_and(KElem::is_one));
            if !lead_ok || coeffs.keys().any(|&j| j as u64 > m) {
                push(
                    i,
                    Condition::Recurrence,
                    format!("U_{} is not U_{i}^{m} plus lower U_{i}-adic terms", i + 1),
                );
            }
            let target = &step.beta * &Rat::from(m);
            for (&j, f) in &coeffs {
                if j as u64 == m {
                    continue;
                }
                let w = self.expansion_weight(f);
                let total = &w + &(&step.beta * &Rat::from(j as u64));
                if total != Value::Finite(target.clone()) {
                    push(
                        i,
                        Condition::Homogeneity,
                        format!("omega_{i}(f_{{{i},{j}}}) + {j}*beta_{i} = {total}, expected {target}"),
                    );
                }
            }
            let next_beta = &self.steps[i].beta;
            if next_beta <= &target {
                push(
                    i,
                    Condition::Growth,
                    format!("beta_{} = {next_beta} is not greater than m_{i}*beta_{i} = {target}", i + 1),
                );
            }
            if !m.is_multiple_of(n_i) {
                push(
                    i,
                    Condition::Shape,
                    format!("m_{i} = {m} is not divisible by n_{i} = {n_i}"),
                );
            }
            for &j in coeffs.keys() {
                if !(j as u64).is_multiple_of(n_i) {
                    push(
                        i,
                        Condition::Shape,
                        format!("f_{{{i},{j}}} is nonzero but n_{i} = {n_i} does not divide {j}"),
                    );
                }
            }
        }
        ValidationReport { violations }
    }

    /// Value-group chain `Phi_i`, indices `n_i` and quotients `p_i = m_i / n_i`.
    pub fn index_data(&self) -> Result<IndexData, KeyError> {
        let mut phi = SubgroupGen::new(self.base.value_group_generator()).expect("nonzero");
        let mut steps = Vec::with_capacity(self.alpha());
        for (k, s) in self.steps.iter().enumerate() {
            let next = numeric::subgroup_generator(&[phi.generator().clone(), s.beta.clone()])?;
            let n = numeric::subgroup_index(&phi, &next)?;
            let (p, condition_holds) = match s.m {
                Some(m) if m % n != 0 => {
                    return Err(KeyError::IndexPowerViolation { step: k + 1, m, n })
                }
                Some(m) => (Some(m / n), Some(m == n)),
                None => (None, None),
            };
            steps.push(IndexStep {
                generator: next.clone(),
                n,
                m: s.m,
                p,
                condition_holds,
            });
            phi = next;
        }
        Ok(IndexData { steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// (a): the recurrence `U_{i+1} = U_i^{m_i} + ...` with `deg f_{i,j} < deg U_i`.
    Recurrence,
    /// (c): every summand of the recurrence has weight `m_i beta_i`.
    Homogeneity,
    /// (e): `beta_{i+1} > m_i beta_i`.
    Growth,
    /// `deg U_i <= N` for algebraic extensions.
    AlgebraicDegree,
    /// `n_i` divides `m_i` and every `j` with `f_{i,j} != 0`.
    Shape,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Recurrence => "a",
            Condition::Homogeneity => "c",
            Condition::Growth => "e",
            Condition::AlgebraicDegree => "degree",
            Condition::Shape => "shape",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub step: usize,
    pub condition: Condition,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, step: usize, condition: Condition) -> bool {
        self.violations
            .iter()
            .any(|v| v.step == step && v.condition == condition)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexStep {
    /// Generator of `Phi_i`.
    pub generator: SubgroupGen,
    /// `[Phi_i : Phi_{i-1}]`.
    pub n: u64,
    pub m: Option<u64>,
    pub p: Option<u64>,
    /// `m_i == n_i`; `None` for the last key.
    pub condition_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexData {
    pub steps: Vec<IndexStep>,
}

impl IndexData {
    /// `m_k == n_k` for every `k < level`, which makes `omega_level` a
    /// valuation.
    pub fn condition_holds_below(&self, level: usize) -> bool {
        self.steps[..level - 1]
            .iter()
            .all(|s| s.condition_holds == Some(true))
    }
}

/// Keys read off a series root `phi(y)` of the minimal polynomial.
#[derive(Debug, Clone)]
pub struct TruncatedKeys {
    pub basis: WeightedBasis,
    /// `x - phi` when the tail of `phi` vanished to the available precision.
    pub exact_root: Option<Poly>,
}

impl TruncatedKeys {
    pub fn exact_root_flag(&self) -> bool {
        self.exact_root.is_some()
    }
}

/// Keys `x - (truncation of phi)` taken at every order where the truncation
/// changes, each weighted by the order of the remaining tail.
pub fn truncated_keys_from_series(
    phi: &Series,
    depth: usize,
    base: BaseFieldConfig,
    ext: ExtensionConfig,
) -> Result<TruncatedKeys, KeyError> {
    if phi.precision() > 0 && !phi.coeff(0).is_zero() {
        return Err(KeyError::NonzeroConstantTerm);
    }
    if phi.precision() <= depth {
        return Err(KeyError::InsufficientPrecision {
            precision: phi.precision(),
            depth,
        });
    }
    let mut keys = Vec::with_capacity(depth);
    let mut trunc = YPoly::zero();
    let mut exact_root = None;
    while keys.len() < depth {
        let tail = phi.sub_poly(&trunc);
        let key = &Poly::var() - &Poly::constant(KElem::from_ypoly(trunc.clone()));
        match tail.order() {
            SeriesOrd::Exact(ord) => {
                keys.push((key, Rat::from(ord as u64)));
                trunc = &trunc + &YPoly::monomial(phi.coeff(ord), ord);
            }
            SeriesOrd::InsufficientPrecision { .. } => {
                exact_root = Some(key);
                break;
            }
        }
    }
    Ok(TruncatedKeys {
        basis: WeightedBasis::new(base, ext, keys)?,
        exact_root,
    })
}

/// Monic lcm of the coefficient denominators.
fn common_denominator(f: &Poly) -> YPoly {
    f.coeffs()
        .iter()
        .filter(|c| !c.is_polynomial())
        .fold(YPoly::one(), |acc, c| {
            let g = acc.gcd(c.den());
            &acc * &c.den().divmod(&g).expect("nonzero gcd").0
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::testutil::{integral_poly_strategy, poly_strategy};
    use crate::text::parse_poly_default as p;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn ky(s: &str) -> KElem {
        p(s).coeff(0)
    }

    fn exp(level: usize, terms: &[(&[u32], &str)]) -> FormalExpansion {
        FormalExpansion::from_terms(level, terms.iter().map(|(a, c)| (a.to_vec(), ky(c))))
    }

    fn basis(keys: &[(&str, Rat)]) -> Result<WeightedBasis, KeyError> {
        WeightedBasis::new(
            BaseFieldConfig::function_field(),
            ExtensionConfig::Transcendental,
            keys.iter().map(|(k, b)| (p(k), b.clone())).collect(),
        )
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert_eq!(basis(&[]).unwrap_err(), KeyError::Empty);
        assert_eq!(basis(&[("x + y", r(1, 1))]).unwrap_err(), KeyError::FirstKeyNotX);
        assert_eq!(
            basis(&[("x", r(1, 1)), ("2*x^2 - y", r(3, 1))]).unwrap_err(),
            KeyError::NotMonic { step: 2 }
        );
        assert!(matches!(
            basis(&[("x", r(0, 1))]).unwrap_err(),
            KeyError::NonPositiveBeta { step: 1, .. }
        ));
    }

    #[test]
    fn validates_catalog_bases() {
        for b in [catalog::b1(), catalog::b2(), catalog::b3()] {
            let report = b.validate();
            assert!(report.is_valid(), "{:?}", report);
        }
    }

    #[test]
    fn reports_homogeneity_violation() {
        let b = basis(&[("x", r(1, 1)), ("x^2 - y", r(3, 1))]).unwrap();
        let report = b.validate();
        assert!(report.has(1, Condition::Homogeneity));
        assert!(!report.has(1, Condition::Growth));
    }

    #[test]
    fn reports_growth_violation() {
        let b = basis(&[("x", r(1, 2)), ("x^2 - y", r(1, 1))]).unwrap();
        let report = b.validate();
        assert!(report.has(1, Condition::Growth));
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn reports_degree_and_algebraic_violations() {
        let b = basis(&[("x", r(1, 1)), ("x^2 - y^2", r(3, 1)), ("x^3 - y^3", r(7, 1))]).unwrap();
        assert!(b.validate().has(2, Condition::Recurrence));
        assert!(b.ratio(2).is_err());

        let ext = ExtensionConfig::algebraic(p("x^2 - y^2 - y^3")).unwrap();
        let b = WeightedBasis::new(
            BaseFieldConfig::function_field(),
            ext,
            vec![(p("x"), r(1, 1)), (p("x^3 - y^3"), r(4, 1))],
        )
        .unwrap();
        assert!(b.validate().has(2, Condition::AlgebraicDegree));
    }

    #[test]
    fn reports_shape_violation() {
        // n_1 = 2 but U_2 has an odd U_1-power with nonzero coefficient.
        let b = basis(&[("x", r(1, 2)), ("x^2 + y*x - y", r(3, 2))]).unwrap();
        let report = b.validate();
        assert!(report.has(1, Condition::Shape));
        assert!(report.has(1, Condition::Homogeneity));
    }

    #[test]
    fn adic_expand_examples() {
        let b1 = catalog::b1();
        let e = b1.adic_expand(&p("x^3 + y*x"), 2).unwrap();
        assert_eq!(e.as_formal(), &exp(2, &[(&[1, 1], "1"), (&[1, 0], "2*y")]));
        let e = b1.adic_expand(&p("x^4"), 2).unwrap();
        assert_eq!(e.as_formal(), &exp(2, &[(&[0, 2], "1"), (&[0, 1], "2*y"), (&[0, 0], "y^2")]));
        for level in 1..=2 {
            let e = b1.adic_expand(&p("y + 3"), level).unwrap();
            assert_eq!(e.as_formal(), &FormalExpansion::constant(level, ky("y + 3")));
        }
        assert!(b1.adic_expand(&Poly::zero(), 1).unwrap().is_empty());
        assert_eq!(
            b1.adic_expand(&p("x"), 3).unwrap_err(),
            KeyError::LevelOutOfRange { level: 3, alpha: 2 }
        );
        assert!(b1.adic_expand(&p("x"), 0).is_err());
    }

    #[test]
    fn expansion_eval_examples() {
        let b1 = catalog::b1();
        assert_eq!(
            b1.expansion_eval(&exp(2, &[(&[1, 1], "1"), (&[1, 0], "2*y")])).unwrap(),
            p("x^3 + y*x")
        );
        assert!(b1.expansion_eval(&FormalExpansion::new(2)).unwrap().is_zero());
        assert_eq!(b1.expansion_eval(&FormalExpansion::constant(2, ky("y"))).unwrap(), p("y"));
    }

    #[test]
    fn weight_examples() {
        let b1 = catalog::b1();
        let f = p("x^3 + y*x");
        assert_eq!(b1.weight(&f, 1).unwrap(), Value::from(r(3, 2)));
        assert_eq!(b1.weight(&f, 2).unwrap(), Value::from(r(3, 2)));
        assert_eq!(b1.weight(&p("y^3/(1 + y)"), 2).unwrap(), Value::from(3));
        assert_eq!(b1.weight(&Poly::zero(), 2).unwrap(), Value::Infinity);
    }

    #[test]
    fn initial_form_examples() {
        let b1 = catalog::b1();
        let f = p("x^3 + y*x");
        let inf = b1.initial_form(&f, 2).unwrap();
        assert_eq!(inf.as_formal(), &exp(2, &[(&[1, 0], "2*y")]));
        let inf = b1.initial_form(&p("x^2 - y"), 1).unwrap();
        assert_eq!(inf.as_formal(), &exp(1, &[(&[2], "1"), (&[0], "-y")]));
        let inf = b1.initial_form(&p("x^2 - y"), 2).unwrap();
        assert_eq!(inf.as_formal(), &exp(2, &[(&[0, 1], "1")]));
        assert_eq!(b1.initial_form(&Poly::zero(), 1).unwrap_err(), KeyError::ZeroInput);
    }

    #[test]
    fn index_data_examples() {
        let d = catalog::b1().index_data().unwrap();
        assert_eq!((d.steps[0].n, d.steps[0].p, d.steps[0].condition_holds), (2, Some(1), Some(true)));
        assert_eq!(d.steps[0].generator.generator(), &r(1, 2));

        let d = catalog::b3().index_data().unwrap();
        assert_eq!((d.steps[0].n, d.steps[0].p, d.steps[0].condition_holds), (1, Some(2), Some(false)));
        assert!(!d.condition_holds_below(2));

        let d = catalog::b2().index_data().unwrap();
        let ns: Vec<_> = d.steps.iter().map(|s| s.n).collect();
        let ps: Vec<_> = d.steps.iter().map(|s| s.p).collect();
        assert_eq!(ns, vec![2, 2, 1]);
        assert_eq!(ps, vec![Some(1), Some(1), None]);
        assert_eq!(d.steps[2].generator.generator(), &r(1, 4));
        assert!(d.condition_holds_below(3));
    }

    #[test]
    fn index_power_violation() {
        // m_1 = 3 but beta_1 = 1/2 gives n_1 = 2.
        let b = basis(&[("x", r(1, 2)), ("x^3 - y^2", r(5, 1))]).unwrap();
        assert_eq!(
            b.index_data().unwrap_err(),
            KeyError::IndexPowerViolation { step: 1, m: 3, n: 2 }
        );
        assert!(b.validate().has(1, Condition::Shape));
    }

    #[test]
    fn b3_is_not_additive() {
        let b3 = catalog::b3();
        let lhs = b3.weight(&p("(x - y)*(x + y)"), 2).unwrap();
        let rhs = &b3.weight(&p("x - y"), 2).unwrap() + &b3.weight(&p("x + y"), 2).unwrap();
        assert_eq!(lhs, Value::from(3));
        assert_eq!(rhs, Value::from(2));
    }

    #[test]
    fn recurrence_coefficients_of_b2() {
        let b2 = catalog::b2();
        let f = b2.recurrence_coefficients(2);
        assert_eq!(f.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(f[&0], exp(1, &[(&[1], "y^2")]));
    }

    #[test]
    fn strict_growth_at_next_key() {
        for b in [catalog::b1(), catalog::b2()] {
            for i in 1..b.alpha() {
                let u = b.key(i + 1);
                assert!(b.weight(u, i).unwrap() < b.weight(u, i + 1).unwrap());
            }
        }
    }

    #[test]
    fn truncated_keys_examples() {
        let cfg = BaseFieldConfig::function_field;
        let tr = Series::from_coeffs(vec![r(0, 1), r(1, 1), r(1, 1)], 8);
        let out = truncated_keys_from_series(&tr, 3, cfg(), ExtensionConfig::Transcendental).unwrap();
        assert_eq!(out.basis.alpha(), 2);
        assert_eq!(out.basis.key(2), &p("x - y"));
        assert_eq!(out.basis.beta(2), &r(2, 1));
        assert_eq!(out.exact_root, Some(p("x - y - y^2")));

        let cube = Series::from_coeffs(vec![r(0, 1), r(0, 1), r(0, 1), r(1, 1)], 6);
        let out = truncated_keys_from_series(&cube, 2, cfg(), ExtensionConfig::Transcendental).unwrap();
        assert_eq!(out.basis.alpha(), 1);
        assert_eq!(out.basis.beta(1), &r(3, 1));
        assert_eq!(out.exact_root, Some(p("x - y^3")));

        let bad = Series::from_coeffs(vec![r(1, 1)], 6);
        assert_eq!(
            truncated_keys_from_series(&bad, 2, cfg(), ExtensionConfig::Transcendental).unwrap_err(),
            KeyError::NonzeroConstantTerm
        );
        assert!(matches!(
            truncated_keys_from_series(&tr, 9, cfg(), ExtensionConfig::Transcendental),
            Err(KeyError::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn conic_truncation_matches_closed_form() {
        let b = catalog::conic_truncation(4);
        let keys: Vec<_> = (1..=4).map(|i| b.key(i).clone()).collect();
        assert_eq!(
            keys,
            vec![p("x"), p("x + y"), p("x + y + y^2/2"), p("x + y + y^2/2 - y^3/8")]
        );
        let betas: Vec<_> = (1..=4).map(|i| b.beta(i).clone()).collect();
        assert_eq!(betas, (1..=4).map(|i| r(i, 1)).collect::<Vec<_>>());
        assert!(b.validate().is_valid());
    }

    fn bases() -> Vec<WeightedBasis> {
        vec![catalog::b1(), catalog::b2(), catalog::b3(), catalog::conic_truncation(4)]
    }

    proptest! {
        #[test]
        fn expansion_reconstructs_and_is_adic(f in poly_strategy(7)) {
            for b in bases() {
                for i in 1..=b.alpha() {
                    let e = b.adic_expand(&f, i).unwrap();
                    prop_assert_eq!(b.expansion_eval(e.as_formal()).unwrap(), b.to_field_element(&f));
                    prop_assert!(b.check_adic(e.into_formal()).is_ok());
                }
            }
        }

        #[test]
        fn weights_form_a_chain(f in poly_strategy(7)) {
            for b in bases() {
                for i in 1..b.alpha() {
                    prop_assert!(b.weight(&f, i).unwrap() <= b.weight(&f, i + 1).unwrap());
                }
            }
        }

        #[test]
        fn low_degree_expansions_are_stable(f in poly_strategy(7)) {
            for b in bases() {
                for i in 1..=b.alpha() {
                    if f.degree().is_none_or(|d| d < b.degree(i)) {
                        for j in i..=b.alpha() {
                            let ei = b.adic_expand(&f, i).unwrap().into_formal().with_level(j);
                            let ej = b.adic_expand(&f, j).unwrap().into_formal();
                            prop_assert_eq!(ei, ej);
                        }
                    }
                }
            }
        }

        #[test]
        fn weight_is_ultrametric_and_superadditive(f in integral_poly_strategy(5), g in integral_poly_strategy(5)) {
            for b in bases() {
                for i in 1..=b.alpha() {
                    let (wf, wg) = (b.weight_ring(&f, i).unwrap(), b.weight_ring(&g, i).unwrap());
                    prop_assert!(b.weight_ring(&(&f + &g), i).unwrap() >= wf.clone().min(wg.clone()));
                    prop_assert!(b.weight_ring(&(&f * &g), i).unwrap() >= &wf + &wg);
                }
            }
        }
    }

    #[test]
    fn keys_have_their_weight_at_higher_levels() {
        for b in bases() {
            for i in 1..=b.alpha() {
                for j in i..=b.alpha() {
                    assert_eq!(b.weight(b.key(i), j).unwrap(), Value::from(b.beta(i).clone()));
                }
            }
        }
    }
}

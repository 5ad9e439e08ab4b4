//! Conversion between `i`-adic and `(i+1)`-adic expansions by substituting
//! the key recurrences, with the formal weight recorded after every pass.

use std::fmt;

use thiserror::Error;

use crate::basefield::KElem;
use crate::keybasis::{AdicExpansion, FormalExpansion, KeyError, WeightedBasis};
use crate::numeric::{Rat, Value};
use crate::poly::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error("expansion violates the adic constraints of level {level}")]
    NotAdic { level: usize },
    #[error("no normal form after {passes} passes")]
    FuelExhausted { passes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Raise,
    Lower,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Raise => "raise",
            Direction::Lower => "lower",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub expansion: FormalExpansion,
    pub weight: Value,
}

/// The input, then the expansion after each pass that changed something.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteTrace {
    pub direction: Direction,
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    pub fn weights(&self) -> Vec<Value> {
        self.steps.iter().map(|s| s.weight.clone()).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].weight <= w[1].weight)
    }
}

/// Minimum over terms of `v(c) + sum_j a_j beta_j`; `inf` when empty.
pub fn formal_weight(e: &FormalExpansion, basis: &WeightedBasis) -> Result<Value, KeyError> {
    if e.level() > basis.alpha() {
        return Err(KeyError::LevelOutOfRange {
            level: e.level(),
            alpha: basis.alpha(),
        });
    }
    Ok(basis.expansion_weight(e))
}

/// `U_j^{m_j} = U_{j+1} - sum_{k < m_j} U_j^k f_{j,k}` as an expansion at
/// level `j + 1`, for 1-based `j`.
fn power_replacement(basis: &WeightedBasis, j: usize) -> Result<FormalExpansion, KeyError> {
    let m = basis.ratio(j)?;
    let rec = basis.recurrence(j).expect("j below alpha").as_formal();
    let mut out = FormalExpansion::new(j + 1);
    let mut top = vec![0; j + 1];
    top[j] = 1;
    out.add_term(top, KElem::one());
    for (a, c) in rec.terms() {
        if a[j - 1] as u64 != m {
            out.add_term(a.clone(), c.neg());
        }
    }
    Ok(out)
}

/// Replace `factor` in the monomial `a` by `repl`, accumulating into `out`.
fn substitute(
    out: &mut FormalExpansion,
    a: &[u32],
    c: &KElem,
    index: usize,
    factor: u32,
    repl: &FormalExpansion,
) {
    for (b, d) in repl.terms() {
        let mut e = a.to_vec();
        e[index] -= factor;
        for (k, x) in b.iter().enumerate() {
            e[k] += x;
        }
        out.add_term(e, Field::mul(c, d));
    }
}

struct Rewriter {
    /// Working level; exponent vectors have this length.
    level: usize,
    /// `m_j` and the replacement of `U_j^{m_j}` for 0-based `j` below the
    /// constrained range.
    powers: Vec<(u32, FormalExpansion)>,
    fuel: usize,
}

impl Rewriter {
    fn new(basis: &WeightedBasis, level: usize, constrained: usize, e: &FormalExpansion) -> Result<Rewriter, KeyError> {
        let powers = (1..=constrained)
            .map(|j| Ok((basis.ratio(j)? as u32, power_replacement(basis, j)?)))
            .collect::<Result<Vec<_>, KeyError>>()?;
        let degree = e
            .terms()
            .keys()
            .map(|a| a.iter().enumerate().map(|(k, x)| *x as usize * basis.degree(k + 1)).sum::<usize>())
            .max()
            .unwrap_or(0);
        let max_m = basis.steps().iter().filter_map(|s| s.m()).max().unwrap_or(1) as usize;
        Ok(Rewriter {
            level,
            powers,
            fuel: 10 * degree.max(1) * basis.alpha() * max_m,
        })
    }

    fn first_violation(&self, a: &[u32]) -> Option<usize> {
        self.powers.iter().enumerate().position(|(j, (m, _))| a[j] >= *m)
    }

    /// Rewrite one factor `U_j^{m_j}` at the smallest violating `j` of every
    /// violating term. Returns `None` when nothing violates.
    fn raise_pass(&self, e: &FormalExpansion) -> Option<FormalExpansion> {
        let mut out = FormalExpansion::new(self.level);
        let mut changed = false;
        for (a, c) in e.terms() {
            match self.first_violation(a) {
                Some(j) => {
                    changed = true;
                    let (m, repl) = &self.powers[j];
                    substitute(&mut out, a, c, j, *m, repl);
                }
                None => out.add_term(a.clone(), c.clone()),
            }
        }
        changed.then_some(out)
    }

    fn run(
        &self,
        start: FormalExpansion,
        direction: Direction,
        pass: impl Fn(&FormalExpansion) -> Option<FormalExpansion>,
        weight: impl Fn(&FormalExpansion) -> Value,
    ) -> Result<(FormalExpansion, RewriteTrace), RewriteError> {
        let mut steps = vec![TraceStep {
            weight: weight(&start),
            expansion: start.clone(),
        }];
        let mut cur = start;
        let mut passes = 0;
        while let Some(next) = pass(&cur) {
            passes += 1;
            if passes > self.fuel {
                return Err(RewriteError::FuelExhausted { passes: self.fuel });
            }
            steps.push(TraceStep {
                weight: weight(&next),
                expansion: next.clone(),
            });
            cur = next;
        }
        Ok((cur, RewriteTrace { direction, steps }))
    }
}

/// Convert an `i`-adic expansion into the `(i+1)`-adic expansion of the
/// same polynomial.
pub fn raise_expansion(
    e: &AdicExpansion,
    basis: &WeightedBasis,
) -> Result<(AdicExpansion, RewriteTrace), RewriteError> {
    let i = e.level();
    basis.check_level(i)?;
    basis.check_level(i + 1)?;
    let e = basis
        .check_adic(e.as_formal().clone())
        .map_err(|_| RewriteError::NotAdic { level: i })?;
    let start = e.as_formal().with_level(i + 1);
    let rw = Rewriter::new(basis, i + 1, i, &start)?;
    let (out, trace) = rw.run(start, Direction::Raise, |x| rw.raise_pass(x), |x| basis.expansion_weight(x))?;
    let out = basis
        .check_adic(out)
        .map_err(|_| RewriteError::NotAdic { level: i + 1 })?;
    Ok((out, trace))
}

/// Convert an `(i+1)`-adic expansion into the `i`-adic expansion of the
/// same polynomial. `U_{i+1}` counts with weight `m_i beta_i` in the trace.
pub fn lower_expansion(
    e: &AdicExpansion,
    basis: &WeightedBasis,
) -> Result<(AdicExpansion, RewriteTrace), RewriteError> {
    let top = e.level();
    basis.check_level(top)?;
    if top < 2 {
        return Err(KeyError::LevelOutOfRange { level: top - 1, alpha: basis.alpha() }.into());
    }
    let i = top - 1;
    let e = basis
        .check_adic(e.as_formal().clone())
        .map_err(|_| RewriteError::NotAdic { level: top })?;
    let m = basis.ratio(i)?;
    let virtual_beta = basis.beta(i) * &Rat::from(m);
    let rec = basis.recurrence(i).expect("i below alpha").as_formal().with_level(top);
    let rw = Rewriter::new(basis, top, i - 1, e.as_formal())?;
    let pass = |x: &FormalExpansion| {
        let mut out = FormalExpansion::new(top);
        let mut changed = false;
        for (a, c) in x.terms() {
            if a[i] > 0 {
                changed = true;
                substitute(&mut out, a, c, i, 1, &rec);
            } else if let Some(j) = rw.first_violation(a) {
                changed = true;
                let (mj, repl) = &rw.powers[j];
                substitute(&mut out, a, c, j, *mj, repl);
            } else {
                out.add_term(a.clone(), c.clone());
            }
        }
        changed.then_some(out)
    };
    let weight = |x: &FormalExpansion| {
        x.terms()
            .iter()
            .map(|(a, c)| {
                let below = basis.term_weight(&a[..i], c);
                &below + &(&virtual_beta * &Rat::from(a[i] as u64))
            })
            .min()
            .unwrap_or(Value::Infinity)
    };
    let (out, trace) = rw.run(e.into_formal(), Direction::Lower, pass, weight)?;
    let out = basis
        .check_adic(out.with_level(i))
        .map_err(|_| RewriteError::NotAdic { level: i })?;
    Ok((out, trace))
}

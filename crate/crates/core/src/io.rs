//! JSON documents for bases, parametrizations, expansions, traces and
//! reports. Rationals are written as exact strings, polynomials in the text
//! grammar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basefield::{BaseFieldConfig, BaseFieldError, KElem};
use crate::izumi::{IzumiReport, WitnessSource};
use crate::keybasis::{FormalExpansion, IndexData, KeyError, ValidationReport, WeightedBasis};
use crate::numeric::{Rat, Value};
use crate::oracle::{OracleError, Parametrization, PrecisionPolicy};
use crate::poly::{ExtensionConfig, Poly, PolyError};
use crate::rewrite::RewriteTrace;
use crate::text::{self, ParseError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error(transparent)]
    BaseField(#[from] BaseFieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("branch must be a polynomial in the base variable")]
    BadBranch,
}

fn parse_field(field: &str, text: &str, cfg: &BaseFieldConfig) -> Result<Poly, IoError> {
    text::parse_poly(text, cfg).map_err(|source| IoError::Parse {
        field: field.to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseDoc {
    FunctionField,
    PAdic(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    #[serde(rename = "U")]
    pub key: String,
    pub beta: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    pub base: BaseDoc,
    /// Name of the base-field variable; `y` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    /// Minimal polynomial of `x` for algebraic extensions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext: Option<String>,
    pub steps: Vec<StepDoc>,
}

impl BasisDoc {
    pub fn base_config(&self) -> Result<BaseFieldConfig, IoError> {
        Ok(match self.base {
            BaseDoc::FunctionField => BaseFieldConfig::FunctionField {
                var: self.var.clone().unwrap_or_else(|| "y".into()),
            },
            BaseDoc::PAdic(p) => BaseFieldConfig::p_adic(p)?,
        })
    }

    pub fn to_basis(&self) -> Result<WeightedBasis, IoError> {
        let cfg = self.base_config()?;
        let ext = match &self.ext {
            None => ExtensionConfig::Transcendental,
            Some(t) => ExtensionConfig::algebraic(parse_field("ext", t, &cfg)?)?,
        };
        let keys = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((parse_field(&format!("steps[{i}].U"), &s.key, &cfg)?, s.beta.clone())))
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(WeightedBasis::new(cfg, ext, keys)?)
    }

    pub fn from_basis(b: &WeightedBasis) -> Self {
        let var = text::var_name(b.base());
        let (base, var_field) = match b.base() {
            BaseFieldConfig::FunctionField { var } => {
                (BaseDoc::FunctionField, (var != "y").then(|| var.clone()))
            }
            BaseFieldConfig::PAdic { p } => (BaseDoc::PAdic(*p), None),
        };
        BasisDoc {
            base,
            var: var_field,
            ext: b.ext().minpoly().map(|m| text::format_poly(m, var)),
            steps: b
                .steps()
                .iter()
                .map(|s| StepDoc {
                    key: text::format_poly(s.key(), var),
                    beta: s.beta().clone(),
                })
                .collect(),
        }
    }
}

pub fn basis_from_json(json: &str) -> Result<WeightedBasis, IoError> {
    serde_json::from_str::<BasisDoc>(json)?.to_basis()
}

pub fn basis_to_json(b: &WeightedBasis) -> String {
    serde_json::to_string_pretty(&BasisDoc::from_basis(b)).expect("serializable")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDoc {
    /// Defining polynomial in `x` over `Q(y)`.
    pub defining: String,
    /// Initial approximation of the root, a polynomial in `y`.
    pub branch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PrecisionPolicy>,
}

impl ParamDoc {
    pub fn to_param(&self) -> Result<Parametrization, IoError> {
        let cfg = BaseFieldConfig::function_field();
        let defining = parse_field("defining", &self.defining, &cfg)?;
        let branch = parse_field("branch", &self.branch, &cfg)?;
        if !branch.is_constant() {
            return Err(IoError::BadBranch);
        }
        let b = branch.coeff(0);
        if !b.is_polynomial() {
            return Err(IoError::BadBranch);
        }
        let policy = match self.policy {
            Some(p) => PrecisionPolicy::new(p.initial, p.growth, p.max)?,
            None => PrecisionPolicy::default(),
        };
        Ok(Parametrization::new(defining, b.num().clone(), policy)?)
    }
}

pub fn param_from_json(json: &str) -> Result<Parametrization, IoError> {
    serde_json::from_str::<ParamDoc>(json)?.to_param()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionDoc {
    pub level: usize,
    pub terms: Vec<TermDoc>,
}

fn term_docs(e: &FormalExpansion, var: &str) -> Vec<TermDoc> {
    e.terms()
        .iter()
        .map(|(a, c)| TermDoc {
            exponents: a.clone(),
            coeff: text::format_kelem(c, var),
        })
        .collect()
}

fn expansion_from_terms(level: usize, terms: &[TermDoc], cfg: &BaseFieldConfig) -> Result<FormalExpansion, IoError> {
    let mut e = FormalExpansion::new(level);
    for (i, t) in terms.iter().enumerate() {
        if t.exponents.len() != level {
            return Err(KeyError::LevelMismatch {
                expected: level,
                found: t.exponents.len(),
            }
            .into());
        }
        let c: KElem = text::parse_kelem(&t.coeff, cfg).map_err(|source| IoError::Parse {
            field: format!("terms[{i}].coeff"),
            source,
        })?;
        e.add_term(t.exponents.clone(), c);
    }
    Ok(e)
}

impl ExpansionDoc {
    pub fn from_expansion(e: &FormalExpansion, cfg: &BaseFieldConfig) -> Self {
        ExpansionDoc {
            level: e.level(),
            terms: term_docs(e, text::var_name(cfg)),
        }
    }

    pub fn to_expansion(&self, cfg: &BaseFieldConfig) -> Result<FormalExpansion, IoError> {
        expansion_from_terms(self.level, &self.terms, cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStepDoc {
    pub terms: Vec<TermDoc>,
    pub weight: Value,
}

pub fn trace_doc(t: &RewriteTrace, cfg: &BaseFieldConfig) -> Vec<TraceStepDoc> {
    t.steps
        .iter()
        .map(|s| TraceStepDoc {
            terms: term_docs(&s.expansion, text::var_name(cfg)),
            weight: s.weight.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationDoc {
    pub step: usize,
    pub condition: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationDoc {
    pub valid: bool,
    pub violations: Vec<ViolationDoc>,
}

impl From<&ValidationReport> for ValidationDoc {
    fn from(r: &ValidationReport) -> Self {
        ValidationDoc {
            valid: r.is_valid(),
            violations: r
                .violations
                .iter()
                .map(|v| ViolationDoc {
                    step: v.step,
                    condition: v.condition.to_string(),
                    message: v.message.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexStepDoc {
    pub step: usize,
    pub generator: Rat,
    pub n: u64,
    pub m: Option<u64>,
    pub p: Option<u64>,
    pub m_equals_n: Option<bool>,
}

pub fn index_doc(d: &IndexData) -> Vec<IndexStepDoc> {
    d.steps
        .iter()
        .enumerate()
        .map(|(k, s)| IndexStepDoc {
            step: k + 1,
            generator: s.generator.generator().clone(),
            n: s.n,
            m: s.m,
            p: s.p,
            m_equals_n: s.condition_holds,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IzumiReportDoc {
    pub numerator: String,
    pub denominator: String,
    pub sup_found: Rat,
    pub witness: String,
    /// `canonical:<k>` or `sample:<j>`.
    pub witness_source: String,
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
    pub theoretical: Option<Rat>,
    pub within_theoretical: Option<bool>,
}

impl IzumiReportDoc {
    pub fn new(r: &IzumiReport, cfg: &BaseFieldConfig) -> Self {
        IzumiReportDoc {
            numerator: r.numerator.clone(),
            denominator: r.denominator.clone(),
            sup_found: r.sup_found.clone(),
            witness: text::format_poly(&r.witness, text::var_name(cfg)),
            witness_source: match r.source {
                WitnessSource::Canonical(k) => format!("canonical:{k}"),
                WitnessSource::Sample(j) => format!("sample:{j}"),
            },
            samples: r.samples,
            skipped: r.skipped,
            seed: r.seed,
            theoretical: r.theoretical.clone(),
            within_theoretical: r.within_theoretical(),
        }
    }
}

//! The `keyval` command line: argument parsing, file loading and rendering.
//!
//! [`run_command`] does all the work and returns the exit code with the
//! captured output, so it can be driven from tests without a subprocess.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use keyval_core::basefield::BaseFieldConfig;
use keyval_core::catalog;
use keyval_core::io::{self as kio, ExpansionDoc, IoError, IzumiReportDoc, ValidationDoc};
use keyval_core::izumi::{self, CorpusConfig, GaussValuation, IzumiError, WeightMap};
use keyval_core::keybasis::{FormalExpansion, KeyError, WeightedBasis};
use keyval_core::numeric::{Rat, Value};
use keyval_core::oracle::{oracle_valuation, OracleValue, Parametrization, PrecisionPolicy};
use keyval_core::poly::Poly;
use keyval_core::rewrite::{self, RewriteError, RewriteTrace};
use keyval_core::text;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "keyval", version, about = "Weighted bases, adic expansions and Izumi constants over Q(y) and Q_p")]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Include the rewrite trace (raise, lower).
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct BasisArg {
    /// Basis file (JSON).
    #[arg(long)]
    basis: PathBuf,
}

#[derive(Debug, Args)]
struct PolyArg {
    /// Polynomial in x, or "-" to read it from stdin.
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a basis against the weighted-basis conditions.
    Validate {
        #[command(flatten)]
        basis: BasisArg,
    },
    /// Adic expansion of a polynomial at a level.
    Expand {
        #[command(flatten)]
        basis: BasisArg,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Rewrite the level-adic expansion into the next level.
    Raise {
        #[command(flatten)]
        basis: BasisArg,
        /// Source level.
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Rewrite the level-adic expansion into the previous level.
    Lower {
        #[command(flatten)]
        basis: BasisArg,
        /// Source level.
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Weight map omega_level.
    Weight {
        #[command(flatten)]
        basis: BasisArg,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Minimal-weight part of the adic expansion.
    Initial {
        #[command(flatten)]
        basis: BasisArg,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Value groups, indices n_i and quotients m_i / n_i.
    Groups {
        #[command(flatten)]
        basis: BasisArg,
    },
    /// Gauss valuation ord_{v,beta}.
    Gauss {
        #[arg(long)]
        beta: Rat,
        /// Use v_p on Q instead of ord_y on Q(y).
        #[arg(long)]
        p: Option<u64>,
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Closed-form Izumi constant c(omega_upper, omega_lower).
    IzumiExact {
        #[command(flatten)]
        basis: BasisArg,
        #[arg(long)]
        upper: usize,
        #[arg(long)]
        lower: usize,
    },
    /// Upper bound for c(mu, mu') with mu the last weight map of the basis.
    IzumiBound {
        #[command(flatten)]
        basis: BasisArg,
        #[arg(long, default_value = "1")]
        mu_prime_x: Rat,
        #[arg(long, default_value = "1")]
        c_base: Rat,
        #[arg(long)]
        normalized: bool,
    },
    /// Seeded search for sup omega_upper(f) / omega_lower(f).
    IzumiSearch {
        #[command(flatten)]
        basis: BasisArg,
        #[arg(long)]
        upper: usize,
        #[arg(long)]
        lower: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
    },
    /// Valuation of a polynomial through a series root.
    Oracle {
        /// Parametrization file (JSON).
        #[arg(long)]
        param: PathBuf,
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Truncation keys of the conic x^2 - y^2 - y^3 against the oracle.
    ExampleConic {
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<KeyError> for Failure {
    fn from(e: KeyError) -> Self {
        match e {
            KeyError::IndexPowerViolation { .. } | KeyError::UndefinedRatio { .. } => Failure::Violation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<RewriteError> for Failure {
    fn from(e: RewriteError) -> Self {
        match e {
            RewriteError::Key(k) => k.into(),
            _ => Failure::Violation(e.to_string()),
        }
    }
}

impl From<IzumiError> for Failure {
    fn from(e: IzumiError) -> Self {
        match e {
            IzumiError::Key(k) => k.into(),
            IzumiError::BadLevels { .. } | IzumiError::BadCorpus | IzumiError::NonPositive(_) | IzumiError::ZeroPower => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Violation(e.to_string()),
        }
    }
}

/// Text output plus whether it reports a violation.
struct Rendered {
    text: String,
    violation: bool,
}

impl Rendered {
    fn ok(text: String) -> Self {
        Rendered { text, violation: false }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_basis(arg: &BasisArg) -> Result<WeightedBasis, Failure> {
    Ok(kio::basis_from_json(&read_file(&arg.basis)?)?)
}

fn load_param(path: &Path) -> Result<Parametrization, Failure> {
    Ok(kio::param_from_json(&read_file(path)?)?)
}

fn read_poly(arg: &PolyArg, cfg: &BaseFieldConfig, stdin: &mut dyn Read) -> Result<Poly, Failure> {
    let src = if arg.poly == "-" {
        let mut s = String::new();
        stdin
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        s
    } else {
        arg.poly.clone()
    };
    text::parse_poly(src.trim(), cfg).map_err(|e| Failure::Usage(format!("--poly: {e}")))
}

/// `c * U_1^a_1 * ...`, terms ordered by the exponent of the highest key
/// first.
pub fn format_expansion(e: &FormalExpansion, var: &str) -> String {
    if e.is_empty() {
        return "0".into();
    }
    let mut terms: Vec<_> = e.terms().iter().collect();
    terms.sort_by(|x, y| y.0.iter().rev().cmp(x.0.iter().rev()));
    let mut out = String::new();
    for (k, (a, c)) in terms.into_iter().enumerate() {
        let keys: Vec<String> = a
            .iter()
            .enumerate()
            .filter(|(_, x)| **x > 0)
            .map(|(j, x)| if *x == 1 { format!("U_{}", j + 1) } else { format!("U_{}^{x}", j + 1) })
            .collect();
        let mut coeff = text::format_kelem(c, var);
        // A single summand carries its sign out front; sums get parentheses.
        let negative = !coeff.contains(' ') && coeff.starts_with('-');
        if negative {
            coeff.remove(0);
        } else if coeff.contains(' ') && (k > 0 || !keys.is_empty()) {
            coeff = format!("({coeff})");
        }
        let body = match (coeff.as_str(), keys.is_empty()) {
            (_, true) => coeff.clone(),
            ("1", false) => keys.join("*"),
            (_, false) => format!("{coeff}*{}", keys.join("*")),
        };
        match (k, negative) {
            (0, true) => write!(out, "-{body}"),
            (0, false) => write!(out, "{body}"),
            (_, true) => write!(out, " - {body}"),
            (_, false) => write!(out, " + {body}"),
        }
        .unwrap();
    }
    out
}

fn pretty(j: &Json) -> String {
    serde_json::to_string_pretty(j).expect("serializable")
}

fn to_json<T: serde::Serialize>(t: &T) -> Json {
    serde_json::to_value(t).expect("serializable")
}

fn render_trace(trace: &RewriteTrace, var: &str) -> String {
    let mut s = String::new();
    for (k, step) in trace.steps.iter().enumerate() {
        writeln!(s, "{k:>3}  {:>8}  {}", step.weight.to_string(), format_expansion(&step.expansion, var)).unwrap();
    }
    s
}

fn run(cli: Cli, stdin: &mut dyn Read) -> Result<Rendered, Failure> {
    let json = cli.json;
    match cli.command {
        Command::Validate { basis } => {
            let b = load_basis(&basis)?;
            let report = b.validate();
            let text = if json {
                pretty(&to_json(&ValidationDoc::from(&report)))
            } else if report.is_valid() {
                format!("valid weighted basis with {} keys", b.alpha())
            } else {
                report
                    .violations
                    .iter()
                    .map(|v| format!("step {} ({}): {}", v.step, v.condition, v.message))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok(Rendered {
                text,
                violation: !report.is_valid(),
            })
        }
        Command::Expand { basis, level, poly } => {
            let b = load_basis(&basis)?;
            let f = read_poly(&poly, b.base(), stdin)?;
            let e = b.adic_expand(&f, level)?.into_formal();
            Ok(Rendered::ok(render_expansion(&e, b.base(), json)))
        }
        Command::Initial { basis, level, poly } => {
            let b = load_basis(&basis)?;
            let f = read_poly(&poly, b.base(), stdin)?;
            let e = b.initial_form(&f, level)?.into_formal();
            Ok(Rendered::ok(render_expansion(&e, b.base(), json)))
        }
        Command::Raise { basis, level, poly } => {
            let b = load_basis(&basis)?;
            let f = read_poly(&poly, b.base(), stdin)?;
            let e = b.adic_expand(&f, level)?;
            let (out, trace) = rewrite::raise_expansion(&e, &b)?;
            Ok(Rendered::ok(render_rewrite(out.as_formal(), &trace, b.base(), json, cli.trace)))
        }
        Command::Lower { basis, level, poly } => {
            let b = load_basis(&basis)?;
            let f = read_poly(&poly, b.base(), stdin)?;
            let e = b.adic_expand(&f, level)?;
            let (out, trace) = rewrite::lower_expansion(&e, &b)?;
            Ok(Rendered::ok(render_rewrite(out.as_formal(), &trace, b.base(), json, cli.trace)))
        }
        Command::Weight { basis, level, poly } => {
            let b = load_basis(&basis)?;
            let f = read_poly(&poly, b.base(), stdin)?;
            let w = b.weight(&f, level)?;
            Ok(Rendered::ok(if json {
                pretty(&json!({ "level": level, "weight": w }))
            } else {
                w.to_string()
            }))
        }
        Command::Groups { basis } => {
            let b = load_basis(&basis)?;
            let d = b.index_data()?;
            let rows = kio::index_doc(&d);
            if json {
                return Ok(Rendered::ok(pretty(&to_json(&rows))));
            }
            let opt = |x: Option<u64>| x.map_or("-".to_string(), |v| v.to_string());
            let mut s = format!("{:>4}  {:>8}  {:>4}  {:>4}  {:>4}  {}", "i", "Phi_i", "n_i", "m_i", "p_i", "m_i = n_i");
            for r in rows {
                let cond = r.m_equals_n.map_or("-".to_string(), |c| c.to_string());
                write!(
                    s,
                    "\n{:>4}  {:>8}  {:>4}  {:>4}  {:>4}  {}",
                    r.step,
                    format!("{}Z", r.generator),
                    r.n,
                    opt(r.m),
                    opt(r.p),
                    cond
                )
                .unwrap();
            }
            Ok(Rendered::ok(s))
        }
        Command::Gauss { beta, p, poly } => {
            let cfg = match p {
                Some(p) => BaseFieldConfig::p_adic(p).map_err(|e| Failure::Usage(e.to_string()))?,
                None => BaseFieldConfig::function_field(),
            };
            let f = read_poly(&poly, &cfg, stdin)?;
            let g = GaussValuation::new(cfg, beta.clone())?;
            let v = izumi::gauss_value(&f, &g);
            Ok(Rendered::ok(if json {
                pretty(&json!({ "beta": beta, "value": v }))
            } else {
                v.to_string()
            }))
        }
        Command::IzumiExact { basis, upper, lower } => {
            let b = load_basis(&basis)?;
            let c = izumi::izumi_step_constant(&b, upper, lower)?;
            Ok(Rendered::ok(if json {
                pretty(&json!({ "upper": upper, "lower": lower, "constant": c }))
            } else {
                c.to_string()
            }))
        }
        Command::IzumiBound {
            basis,
            mu_prime_x,
            c_base,
            normalized,
        } => {
            let b = load_basis(&basis)?;
            let bound = izumi::extension_bound(&b, &mu_prime_x, &c_base, normalized)?;
            Ok(Rendered::ok(if json {
                pretty(&json!({ "mu_prime_x": mu_prime_x, "c_base": c_base, "normalized": normalized, "bound": bound }))
            } else {
                bound.to_string()
            }))
        }
        Command::IzumiSearch {
            basis,
            upper,
            lower,
            seed,
            samples,
            max_degree,
        } => {
            let b = load_basis(&basis)?;
            let theoretical = izumi::izumi_step_constant(&b, upper, lower)?;
            let (a, d) = (WeightMap::new(&b, upper)?, WeightMap::new(&b, lower)?);
            let corpus = CorpusConfig {
                seed,
                samples,
                max_degree,
                ..CorpusConfig::default()
            };
            let report = izumi::empirical_izumi(&a, &d, &corpus, Some(theoretical))?;
            let doc = IzumiReportDoc::new(&report, b.base());
            let violation = doc.within_theoretical == Some(false);
            let text = if json {
                pretty(&to_json(&doc))
            } else {
                let theo = doc.theoretical.as_ref().map_or("-".into(), |t| t.to_string());
                [
                    format!("ratio        {} / {}", doc.numerator, doc.denominator),
                    format!("sup found    {}", doc.sup_found),
                    format!("theoretical  {theo}"),
                    format!("witness      {} ({})", doc.witness, doc.witness_source),
                    format!("samples      {} (skipped {})", doc.samples, doc.skipped),
                    format!("seed         {}", doc.seed),
                ]
                .join("\n")
            };
            Ok(Rendered { text, violation })
        }
        Command::Oracle { param, poly } => {
            let par = load_param(&param)?;
            let f = read_poly(&poly, &BaseFieldConfig::function_field(), stdin)?;
            let v = oracle_valuation(&f, &par);
            Ok(Rendered::ok(if json {
                match &v {
                    OracleValue::Exact(x) => pretty(&json!({ "value": x })),
                    OracleValue::AtLeast(b) => pretty(&json!({ "at_least": b })),
                }
            } else {
                v.to_string()
            }))
        }
        Command::ExampleConic { depth } => example_conic(depth, json),
    }
}

fn render_expansion(e: &FormalExpansion, cfg: &BaseFieldConfig, json: bool) -> String {
    if json {
        pretty(&to_json(&ExpansionDoc::from_expansion(e, cfg)))
    } else {
        format_expansion(e, text::var_name(cfg))
    }
}

fn render_rewrite(out: &FormalExpansion, trace: &RewriteTrace, cfg: &BaseFieldConfig, json: bool, with_trace: bool) -> String {
    if json {
        let mut j = json!({ "result": to_json(&ExpansionDoc::from_expansion(out, cfg)) });
        if with_trace {
            j["direction"] = json!(trace.direction.to_string());
            j["trace"] = to_json(&kio::trace_doc(trace, cfg));
        }
        return pretty(&j);
    }
    let var = text::var_name(cfg);
    let mut s = format_expansion(out, var);
    if with_trace {
        write!(s, "\n\n{} trace (pass, weight, expansion):\n{}", trace.direction, render_trace(trace, var)).unwrap();
        s.truncate(s.trim_end().len());
    }
    s
}

fn example_conic(depth: usize, json: bool) -> Result<Rendered, Failure> {
    if depth == 0 {
        return Err(Failure::Usage("--depth must be at least 1".into()));
    }
    let par = catalog::conic_parametrization(PrecisionPolicy::for_depth(depth));
    let basis = catalog::conic_truncation(depth);
    let mut rows = Vec::with_capacity(depth);
    let mut violation = false;
    for i in 1..=depth {
        let mu = oracle_valuation(basis.key(i), &par);
        violation |= mu != OracleValue::Exact(Value::from(basis.beta(i).clone()));
        rows.push((i, text::format_poly(basis.key(i), "y"), basis.beta(i).clone(), mu));
    }
    let text = if json {
        pretty(&Json::Array(
            rows.iter()
                .map(|(i, u, b, mu)| json!({ "i": i, "U": u, "beta": b, "oracle": mu.to_string() }))
                .collect(),
        ))
    } else {
        let mut s = format!("{:>3}  {:>6}  {:>6}  U_i", "i", "beta_i", "mu(U_i)");
        for (i, u, b, mu) in &rows {
            write!(s, "\n{i:>3}  {:>6}  {:>7}  {u}", b.to_string(), mu.to_string()).unwrap();
        }
        s
    };
    Ok(Rendered { text, violation })
}

/// Run one invocation. `argv[0]` is the program name.
pub fn run_command<I, S>(argv: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let msg = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: msg, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: msg }
            };
        }
    };
    match run(cli, stdin) {
        Ok(r) => Outcome {
            code: if r.violation { EXIT_VIOLATION } else { EXIT_OK },
            stdout: format!("{}\n", r.text),
            stderr: String::new(),
        },
        Err(Failure::Usage(m)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
        Err(Failure::Violation(m)) => Outcome {
            code: EXIT_VIOLATION,
            stdout: String::new(),
            stderr: format!("violation: {m}\n"),
        },
    }
}

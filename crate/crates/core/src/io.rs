//! JSON file formats and canonical serialization.
//!
//! Rationals are written as `"num/den"` strings (or `"num"`); objects are
//! emitted with sorted keys so outputs diff cleanly. Coefficients in model
//! files may be numbers or expressions over the file's `parameters`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{Rational, RationalMatrix};
use crate::embed::{AuxSpec, EmbedError, Evaluator, Function, FunctionFamily, GeneralSystem, PolyTerm, Term, Xi};
use crate::expr::{self, Bindings, ExprError};
use crate::qp::{BecVerdict, LvSystem, ModelError, QpSystem, Quasimonomial};
use crate::sim::VerifyReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_data() {
            FormatError::Schema(e.to_string())
        } else {
            FormatError::Json(e.to_string())
        }
    }
}

/// A number or an expression over parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Expr(String),
}

impl Scalar {
    pub fn resolve(&self, env: &Bindings) -> Result<f64, ExprError> {
        match self {
            Scalar::Num(v) => Ok(*v),
            Scalar::Expr(s) => expr::eval(s, env),
        }
    }
}

fn resolve_all(xs: &[Scalar], env: &Bindings) -> Result<Vec<f64>, ExprError> {
    xs.iter().map(|x| x.resolve(env)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub coef: Scalar,
    pub xexp: Vec<Rational>,
    #[serde(default)]
    pub fexp: Vec<Rational>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluatorFile {
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub name: String,
    pub evaluator: EvaluatorFile,
    pub derivatives: Vec<Vec<TermFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<Scalar>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslateFile {
    pub c: Vec<Scalar>,
    #[serde(default)]
    pub k: Vec<Scalar>,
}

/// On-disk form of a [`GeneralSystem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralFile {
    pub variables: Vec<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub functions: Vec<FunctionFile>,
    pub equations: Vec<Vec<TermFile>>,
    pub x0: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translate: Option<TranslateFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineParams {
    #[serde(default = "zero_scalar")]
    offset: Scalar,
    weights: Vec<Scalar>,
}

fn zero_scalar() -> Scalar {
    Scalar::Num(0.0)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyTermFile {
    coef: Scalar,
    exp: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyParams {
    terms: Vec<PolyTermFile>,
    #[serde(default)]
    power: Option<Rational>,
}

fn params<T: for<'de> Deserialize<'de>>(kind: &str, v: &Value) -> Result<T, FormatError> {
    serde_json::from_value(v.clone()).map_err(|e| FormatError::Schema(format!("parameters of {kind}: {e}")))
}

fn build_evaluator(file: &EvaluatorFile, env: &Bindings) -> Result<Evaluator, FormatError> {
    let affine = |p: AffineParams| -> Result<(f64, Vec<f64>), FormatError> {
        Ok((p.offset.resolve(env)?, resolve_all(&p.weights, env)?))
    };
    let poly = |p: &PolyParams| -> Result<Vec<PolyTerm>, FormatError> {
        p.terms
            .iter()
            .map(|t| Ok(PolyTerm { coef: t.coef.resolve(env)?, exponents: t.exp.clone() }))
            .collect()
    };
    let kind = file.kind.as_str();
    Ok(match kind {
        "exp_affine" => {
            let (offset, weights) = affine(params(kind, &file.params)?)?;
            Evaluator::ExpAffine { offset, weights }
        }
        "sin_affine" => {
            let (offset, weights) = affine(params(kind, &file.params)?)?;
            Evaluator::SinAffine { offset, weights }
        }
        "cos_affine" => {
            let (offset, weights) = affine(params(kind, &file.params)?)?;
            Evaluator::CosAffine { offset, weights }
        }
        "inverse_polynomial" => {
            let p: PolyParams = params(kind, &file.params)?;
            Evaluator::InversePolynomial { terms: poly(&p)? }
        }
        "polynomial_power" => {
            let p: PolyParams = params(kind, &file.params)?;
            let power = p.power.clone().ok_or_else(|| FormatError::Schema("polynomial_power needs a power".into()))?;
            Evaluator::PolynomialPower { terms: poly(&p)?, power }
        }
        "ode_augmented" => Evaluator::OdeAugmented,
        other => {
            return Err(FormatError::Schema(format!(
                "unknown evaluator kind {other:?}; expected exp_affine, inverse_polynomial, polynomial_power, \
                 sin_affine, cos_affine or ode_augmented"
            )))
        }
    })
}

fn build_term(t: &TermFile, r: usize, env: &Bindings) -> Result<Term, FormatError> {
    let f_exp = if t.fexp.is_empty() { vec![Rational::zero(); r] } else { t.fexp.clone() };
    Ok(Term::new(t.coef.resolve(env)?, t.xexp.clone(), f_exp))
}

/// A loaded model: the system plus the translation it asks for.
#[derive(Debug, Clone)]
pub struct LoadedGeneral {
    pub system: GeneralSystem,
    /// `(c, k)` of the requested positivity translation.
    pub shift: Option<(Vec<f64>, Vec<f64>)>,
    pub bindings: Bindings,
}

impl LoadedGeneral {
    pub fn shift_ref(&self) -> Option<(&[f64], &[f64])> {
        self.shift.as_ref().map(|(c, k)| (c.as_slice(), k.as_slice()))
    }
}

impl GeneralFile {
    /// Resolves expressions with the file's parameters, overridden by `overrides`.
    pub fn build(&self, overrides: &Bindings) -> Result<LoadedGeneral, FormatError> {
        let mut env = self.parameters.clone();
        for (k, v) in overrides {
            env.insert(k.clone(), *v);
        }
        let r = self.functions.len();
        let mut functions = Vec::with_capacity(r);
        for f in &self.functions {
            let derivatives = f
                .derivatives
                .iter()
                .map(|terms| terms.iter().map(|t| build_term(t, r, &env)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let mut func = Function::new(f.name.clone(), build_evaluator(&f.evaluator, &env)?, derivatives);
            if let Some(v) = &f.f0 {
                func.initial_value = Some(v.resolve(&env)?);
            }
            functions.push(func);
        }
        let equations = self
            .equations
            .iter()
            .map(|terms| terms.iter().map(|t| build_term(t, r, &env)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let x0 = resolve_all(&self.x0, &env)?;
        let system = GeneralSystem::new(self.variables.clone(), FunctionFamily::new(functions), equations, x0)?;
        let shift = match &self.translate {
            Some(t) => {
                let c = resolve_all(&t.c, &env)?;
                let k = if t.k.is_empty() { vec![0.0; r] } else { resolve_all(&t.k, &env)? };
                Some((c, k))
            }
            None => None,
        };
        Ok(LoadedGeneral { system, shift, bindings: env })
    }
}

pub fn parse_general(text: &str, overrides: &Bindings) -> Result<LoadedGeneral, FormatError> {
    let file: GeneralFile = serde_json::from_str(text)?;
    file.build(overrides)
}

/// A coefficient: a plain number when it is exactly a float, otherwise a
/// `"num/den"` string, so files round-trip without loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Coefficient {
    Float(f64),
    Exact(Rational),
}

impl Coefficient {
    fn from_rational(r: &Rational) -> Self {
        if r.is_f64() {
            Coefficient::Float(r.to_f64())
        } else {
            Coefficient::Exact(r.clone())
        }
    }

    fn into_rational(self) -> Result<Rational, FormatError> {
        match self {
            Coefficient::Float(x) => Rational::try_from_f64(x).map_err(|e| FormatError::Schema(e.to_string())),
            Coefficient::Exact(r) => Ok(r),
        }
    }
}

fn exact_vec(xs: Vec<Coefficient>) -> Result<Vec<Rational>, FormatError> {
    xs.into_iter().map(Coefficient::into_rational).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QpFile {
    variables: Vec<String>,
    lambda: Vec<Coefficient>,
    #[serde(rename = "A")]
    a: Vec<Vec<Coefficient>>,
    #[serde(rename = "B")]
    b: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<f64>>,
}

pub fn qp_to_json(sys: &QpSystem) -> Value {
    let file = QpFile {
        variables: sys.variables.clone(),
        lambda: sys.lambda.iter().map(Coefficient::from_rational).collect(),
        a: sys.a.row_vecs().iter().map(|r| r.iter().map(Coefficient::from_rational).collect()).collect(),
        b: sys.b.row_vecs(),
        x0: sys.initial_state.clone(),
    };
    serde_json::to_value(file).expect("plain data serializes")
}

pub fn qp_from_json(text: &str) -> Result<QpSystem, FormatError> {
    let file: QpFile = serde_json::from_str(text)?;
    let n = file.variables.len();
    let b = RationalMatrix::from_rows(file.b, n)
        .map_err(|e| FormatError::Schema(format!("B must have one column per variable: {e}")))?;
    let m = b.rows();
    let rows = file.a.into_iter().map(exact_vec).collect::<Result<Vec<_>, _>>()?;
    if let Some(row) = rows.iter().position(|r| r.len() != m) {
        return Err(FormatError::Schema(format!("A row {row} has {} entries, B has {m} rows", rows[row].len())));
    }
    let a = RationalMatrix::from_rows(rows, m).map_err(|e| FormatError::Schema(e.to_string()))?;
    Ok(QpSystem::new(file.variables, exact_vec(file.lambda)?, a, b, file.x0)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LvFile {
    variables: Vec<String>,
    lambda_prime: Vec<f64>,
    #[serde(rename = "A_prime")]
    a_prime: Vec<Vec<f64>>,
    quasimonomials: Vec<Quasimonomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z0: Option<Vec<f64>>,
    #[serde(default)]
    labels: Vec<String>,
}

pub fn lv_to_json(lv: &LvSystem) -> Value {
    let file = LvFile {
        variables: lv.variables.clone(),
        lambda_prime: lv.lambda_prime.clone(),
        a_prime: lv.a_prime.clone(),
        quasimonomials: lv.quasimonomials.clone(),
        z0: lv.z0.clone(),
        labels: lv.labels(),
    };
    serde_json::to_value(file).expect("plain data serializes")
}

pub fn lv_from_json(text: &str) -> Result<LvSystem, FormatError> {
    let file: LvFile = serde_json::from_str(text)?;
    if let Some(q) = file.quasimonomials.iter().find(|q| q.exponents.len() != file.variables.len()) {
        return Err(FormatError::Schema(format!(
            "quasimonomial has {} exponents for {} variables",
            q.exponents.len(),
            file.variables.len()
        )));
    }
    let lv = LvSystem {
        variables: file.variables,
        lambda_prime: file.lambda_prime,
        a_prime: file.a_prime,
        quasimonomials: file.quasimonomials,
        z0: file.z0,
    };
    lv.check()?;
    Ok(lv)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuxEntryFile {
    function: String,
    q: Rational,
    p: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuxFile {
    aux: Vec<AuxEntryFile>,
}

/// Reads an aux file; entries are matched to family functions by name.
pub fn aux_from_json(text: &str, sys: &GeneralSystem) -> Result<AuxSpec, FormatError> {
    let file: AuxFile = serde_json::from_str(text)?;
    let entries = file.aux.into_iter().map(|e| (e.function, e.p, e.q)).collect();
    assemble_aux(entries, sys)
}

pub fn aux_to_json(spec: &AuxSpec, sys: &GeneralSystem) -> Value {
    let aux = spec
        .aux
        .iter()
        .zip(&sys.family.functions)
        .map(|(xi, f)| AuxEntryFile { function: f.name.clone(), q: xi.q.clone(), p: xi.p.clone() })
        .collect();
    serde_json::to_value(AuxFile { aux }).expect("plain data serializes")
}

/// Parses inline `--aux` arguments of the form `[function:]q=2,p=1;0`.
/// Functions without an entry default to `q = 1, p = 0`.
pub fn aux_from_inline(args: &[String], sys: &GeneralSystem) -> Result<AuxSpec, FormatError> {
    let mut entries = Vec::new();
    for arg in args {
        let (name, body) = match arg.split_once(':') {
            Some((name, body)) if !name.contains('=') => (Some(name.trim().to_string()), body),
            _ => (None, arg.as_str()),
        };
        let name = match name {
            Some(n) => n,
            None if sys.r() == 1 => sys.family.functions[0].name.clone(),
            None => {
                return Err(FormatError::Schema(format!(
                    "--aux {arg:?} must name its function when the family has {} functions",
                    sys.r()
                )))
            }
        };
        let mut p = None;
        let mut q = None;
        for part in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) =
                part.split_once('=').ok_or_else(|| FormatError::Schema(format!("expected key=value, got {part:?}")))?;
            let rationals = || -> Result<Vec<Rational>, FormatError> {
                value
                    .split(';')
                    .map(|v| v.trim().parse::<Rational>().map_err(|e| FormatError::Schema(e.to_string())))
                    .collect()
            };
            match key.trim() {
                "p" => p = Some(rationals()?),
                "q" => {
                    q = Some(value.trim().parse::<Rational>().map_err(|e| FormatError::Schema(e.to_string()))?)
                }
                other => return Err(FormatError::Schema(format!("unknown aux key {other:?}; expected p or q"))),
            }
        }
        let q = q.ok_or(EmbedError::ZeroQ)?;
        let p = match p {
            Some(p) if p.len() == 1 && sys.n() > 1 && p[0].is_zero() => vec![Rational::zero(); sys.n()],
            Some(p) => p,
            None => vec![Rational::zero(); sys.n()],
        };
        entries.push((name, p, q));
    }
    assemble_aux(entries, sys)
}

fn assemble_aux(entries: Vec<(String, Vec<Rational>, Rational)>, sys: &GeneralSystem) -> Result<AuxSpec, FormatError> {
    let mut spec = AuxSpec::simplest(sys.n(), sys.r());
    let mut seen = vec![false; sys.r()];
    for (name, p, q) in entries {
        let u = sys
            .family
            .index_of(&name)
            .ok_or_else(|| FormatError::Schema(format!("aux entry for unknown function {name:?}")))?;
        if seen[u] {
            return Err(FormatError::Schema(format!("function {name:?} has two aux entries")));
        }
        seen[u] = true;
        spec.aux[u] = Xi::new(p, q)?;
    }
    spec.check(sys.n(), sys.r())?;
    Ok(spec)
}

pub fn bec_to_json(verdict: &BecVerdict) -> Value {
    json!({
        "equivalent": verdict.equivalent,
        "witness": verdict.witness.as_ref().map(RationalMatrix::row_vecs),
        "pairing": verdict.pairing,
        "diagnostic": verdict.diagnostic,
    })
}

pub fn report_to_json(report: &VerifyReport) -> Value {
    json!({
        "max_rel_dev": report.max_rel_dev,
        "per_variable": report.per_variable,
        "labels": report.labels,
        "truncated_at": report.truncated_at,
        "compared_points": report.compared_points,
        "dt": report.config.dt,
        "t0": report.config.t0,
        "t1": report.config.t1,
        "record_every": report.config.record_every,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Which of the three file formats a document is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    General,
    Glv,
    Lv,
}

pub fn detect_kind(text: &str) -> Result<FileKind, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v.as_object().ok_or_else(|| FormatError::Schema("top level must be an object".into()))?;
    if obj.contains_key("equations") {
        Ok(FileKind::General)
    } else if obj.contains_key("quasimonomials") {
        Ok(FileKind::Lv)
    } else if obj.contains_key("B") {
        Ok(FileKind::Glv)
    } else {
        Err(FormatError::Schema("cannot tell the system kind: expected \"equations\", \"B\" or \"quasimonomials\"".into()))
    }
}

//! Systems whose right-hand sides mix quasimonomials in the state with powers
//! of non-polynomial scalar functions.

use std::collections::HashMap;

use crate::algebra::{exact_sum, Rational};

use super::EmbedError;

/// `coef · ∏ₖ xₖ^x_exp[k] · ∏ᵤ fᵤ^f_exp[u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub x_exp: Vec<Rational>,
    pub f_exp: Vec<Rational>,
}

impl Term {
    pub fn new(coef: f64, x_exp: Vec<Rational>, f_exp: Vec<Rational>) -> Self {
        Term { coef, x_exp, f_exp }
    }

    /// Shorthand for integer exponents.
    pub fn ints(coef: f64, x_exp: &[i64], f_exp: &[i64]) -> Self {
        Term {
            coef,
            x_exp: x_exp.iter().map(|&e| Rational::from_integer(e)).collect(),
            f_exp: f_exp.iter().map(|&e| Rational::from_integer(e)).collect(),
        }
    }

    /// Evaluates the term; integer exponents accept any sign of the base,
    /// fractional ones need a positive base.
    pub fn eval(&self, x: &[f64], f: &[f64]) -> Result<f64, EmbedError> {
        let mut value = self.coef;
        for (e, &v) in self.x_exp.iter().zip(x).chain(self.f_exp.iter().zip(f)) {
            value *= pow_rational(v, e)?;
        }
        Ok(value)
    }

    fn key(&self) -> (Vec<Rational>, Vec<Rational>) {
        (self.x_exp.clone(), self.f_exp.clone())
    }
}

/// `base^e` for rational `e`, with the real-valued domain rules above.
pub fn pow_rational(base: f64, e: &Rational) -> Result<f64, EmbedError> {
    if e.is_zero() {
        return Ok(1.0);
    }
    if let Some(k) = e.to_i64() {
        if base == 0.0 && k < 0 {
            return Err(EmbedError::Domain(format!("zero raised to negative power {e}")));
        }
        return Ok(base.powi(k as i32));
    }
    if base > 0.0 {
        Ok(base.powf(e.to_f64()))
    } else {
        Err(EmbedError::Domain(format!("{base} raised to fractional power {e}")))
    }
}

/// Merges terms sharing the same exponents, summing coefficients exactly.
/// First-occurrence order is kept.
pub fn merge_terms(terms: Vec<Term>) -> Vec<Term> {
    let mut index: HashMap<(Vec<Rational>, Vec<Rational>), usize> = HashMap::new();
    let mut groups: Vec<(Term, Vec<f64>)> = Vec::new();
    for t in terms {
        match index.get(&t.key()) {
            Some(&i) => groups[i].1.push(t.coef),
            None => {
                index.insert(t.key(), groups.len());
                let c = t.coef;
                groups.push((t, vec![c]));
            }
        }
    }
    groups
        .into_iter()
        .map(|(mut t, coefs)| {
            t.coef = exact_sum(&coefs);
            t
        })
        .collect()
}

/// Monomial `coef · ∏ xₖ^eₖ` with non-negative integer exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coef: f64,
    pub exponents: Vec<u32>,
}

impl PolyTerm {
    fn eval(&self, x: &[f64]) -> f64 {
        self.exponents.iter().zip(x).fold(self.coef, |acc, (&e, &v)| acc * v.powi(e as i32))
    }
}

fn poly_eval(terms: &[PolyTerm], x: &[f64]) -> f64 {
    terms.iter().map(|t| t.eval(x)).sum()
}

/// How a family function is evaluated numerically.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    /// `exp(offset + Σ weightsₖ xₖ)`
    ExpAffine { offset: f64, weights: Vec<f64> },
    /// `1 / P(x)`
    InversePolynomial { terms: Vec<PolyTerm> },
    /// `P(x)^power`
    PolynomialPower { terms: Vec<PolyTerm>, power: Rational },
    /// `sin(offset + Σ weightsₖ xₖ)`
    SinAffine { offset: f64, weights: Vec<f64> },
    /// `cos(offset + Σ weightsₖ xₖ)`
    CosAffine { offset: f64, weights: Vec<f64> },
    /// No closed form; the value is integrated alongside the state.
    OdeAugmented,
}

impl Evaluator {
    pub fn kind(&self) -> &'static str {
        match self {
            Evaluator::ExpAffine { .. } => "exp_affine",
            Evaluator::InversePolynomial { .. } => "inverse_polynomial",
            Evaluator::PolynomialPower { .. } => "polynomial_power",
            Evaluator::SinAffine { .. } => "sin_affine",
            Evaluator::CosAffine { .. } => "cos_affine",
            Evaluator::OdeAugmented => "ode_augmented",
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Evaluator::OdeAugmented)
    }

    /// Closed-form value, or `None` for [`Evaluator::OdeAugmented`].
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let affine = |offset: f64, weights: &[f64]| offset + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        match self {
            Evaluator::ExpAffine { offset, weights } => Some(affine(*offset, weights).exp()),
            Evaluator::InversePolynomial { terms } => Some(1.0 / poly_eval(terms, x)),
            Evaluator::PolynomialPower { terms, power } => {
                let p = poly_eval(terms, x);
                Some(match power.to_i64() {
                    Some(k) => p.powi(k as i32),
                    None => p.powf(power.to_f64()),
                })
            }
            Evaluator::SinAffine { offset, weights } => Some(affine(*offset, weights).sin()),
            Evaluator::CosAffine { offset, weights } => Some(affine(*offset, weights).cos()),
            Evaluator::OdeAugmented => None,
        }
    }

    fn arity(&self) -> Option<usize> {
        match self {
            Evaluator::ExpAffine { weights, .. }
            | Evaluator::SinAffine { weights, .. }
            | Evaluator::CosAffine { weights, .. } => Some(weights.len()),
            Evaluator::InversePolynomial { terms } | Evaluator::PolynomialPower { terms, .. } => {
                terms.first().map(|t| t.exponents.len())
            }
            Evaluator::OdeAugmented => None,
        }
    }

    fn poly_terms(&self) -> &[PolyTerm] {
        match self {
            Evaluator::InversePolynomial { terms } | Evaluator::PolynomialPower { terms, .. } => terms,
            _ => &[],
        }
    }
}

/// One named function of the family together with its derivative
/// representation `∂f/∂xₛ = Σ b · x^e · f^ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: String,
    pub evaluator: Evaluator,
    /// Added to the evaluator's value; non-zero after an additive shift.
    pub plus: f64,
    /// `derivatives[s]` lists the terms of `∂f/∂xₛ`.
    pub derivatives: Vec<Vec<Term>>,
    /// Value at `t₀`; required for [`Evaluator::OdeAugmented`].
    pub initial_value: Option<f64>,
}

impl Function {
    pub fn new(name: impl Into<String>, evaluator: Evaluator, derivatives: Vec<Vec<Term>>) -> Self {
        Function { name: name.into(), evaluator, plus: 0.0, derivatives, initial_value: None }
    }

    pub fn with_initial_value(mut self, value: f64) -> Self {
        self.initial_value = Some(value);
        self
    }

    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        self.evaluator.eval(x).map(|v| v + self.plus)
    }
}

/// Functions closed under differentiation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionFamily {
    pub functions: Vec<Function>,
}

impl FunctionFamily {
    pub fn new(functions: Vec<Function>) -> Self {
        FunctionFamily { functions }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    /// Checks every derivative term refers to `n` state variables and only to
    /// functions of this family.
    pub fn check_closed(&self, n: usize) -> Result<(), EmbedError> {
        let r = self.len();
        let mut names = std::collections::HashSet::new();
        for f in &self.functions {
            if !names.insert(f.name.as_str()) {
                return Err(EmbedError::Malformed(format!("duplicate function name {:?}", f.name)));
            }
            if f.derivatives.len() != n {
                return Err(EmbedError::NotClosed(format!(
                    "function {:?} gives {} partial derivatives for {n} variables",
                    f.name,
                    f.derivatives.len()
                )));
            }
            for (s, terms) in f.derivatives.iter().enumerate() {
                for t in terms {
                    if t.x_exp.len() != n || t.f_exp.len() != r {
                        return Err(EmbedError::NotClosed(format!(
                            "∂{}/∂x{} has a term over {} variables and {} functions; family has {n} and {r}",
                            f.name,
                            s + 1,
                            t.x_exp.len(),
                            t.f_exp.len()
                        )));
                    }
                }
            }
            if let Some(k) = f.evaluator.arity() {
                if k != n {
                    return Err(EmbedError::Malformed(format!(
                        "evaluator of {:?} takes {k} arguments, system has {n} variables",
                        f.name
                    )));
                }
            }
            if f.evaluator.poly_terms().iter().any(|t| t.exponents.len() != n) {
                return Err(EmbedError::Malformed(format!("polynomial of {:?} has ragged exponents", f.name)));
            }
            if !f.evaluator.is_closed_form() && f.initial_value.is_none() {
                return Err(EmbedError::Malformed(format!(
                    "function {:?} has no closed form and no initial value",
                    f.name
                )));
            }
        }
        Ok(())
    }

    /// Indices of the functions carried as extra integration state.
    pub fn augmented(&self) -> Vec<usize> {
        (0..self.len()).filter(|&u| !self.functions[u].evaluator.is_closed_form()).collect()
    }
}

/// Change of coordinates applied by a positivity translation:
/// `x' = x + c` and `g = f/κ + k` per family function.
#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub c: Vec<f64>,
    pub k: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl Translation {
    pub fn identity(n: usize, r: usize) -> Self {
        Translation { c: vec![0.0; n], k: vec![0.0; r], kappa: vec![1.0; r] }
    }

    /// Maps original `(x, f)` values into translated coordinates.
    pub fn apply(&self, x: &[f64], f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let xs = x.iter().zip(&self.c).map(|(v, c)| v + c).collect();
        let gs = f.iter().zip(self.kappa.iter().zip(&self.k)).map(|(v, (kap, k))| v / kap + k).collect();
        (xs, gs)
    }

    /// The step `s` with `earlier.then(s) == self`.
    pub fn relative_to(&self, earlier: &Translation) -> Translation {
        let kappa: Vec<f64> = self.kappa.iter().zip(&earlier.kappa).map(|(a, b)| a / b).collect();
        Translation {
            c: self.c.iter().zip(&earlier.c).map(|(a, b)| a - b).collect(),
            k: self
                .k
                .iter()
                .zip(earlier.k.iter().zip(&kappa))
                .map(|(k, (k1, kap))| k - k1 / kap)
                .collect(),
            kappa,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Translation) -> Translation {
        Translation {
            c: self.c.iter().zip(&next.c).map(|(a, b)| a + b).collect(),
            kappa: self.kappa.iter().zip(&next.kappa).map(|(a, b)| a * b).collect(),
            k: self
                .k
                .iter()
                .zip(next.kappa.iter().zip(&next.k))
                .map(|(k1, (kap2, k2))| k1 / kap2 + k2)
                .collect(),
        }
    }
}

/// `ẋₛ = Σ a · x^i · f^j` over a [`FunctionFamily`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSystem {
    pub variables: Vec<String>,
    pub family: FunctionFamily,
    pub equations: Vec<Vec<Term>>,
    pub initial_state: Vec<f64>,
    /// Set once a positivity translation has been applied.
    pub translation: Option<Translation>,
}

impl GeneralSystem {
    /// Checks shapes and family closure; merges repeated terms per equation.
    pub fn new(
        variables: Vec<String>,
        family: FunctionFamily,
        equations: Vec<Vec<Term>>,
        initial_state: Vec<f64>,
    ) -> Result<Self, EmbedError> {
        let n = variables.len();
        let r = family.len();
        if n == 0 {
            return Err(EmbedError::Malformed("system has no variables".into()));
        }
        if equations.len() != n {
            return Err(EmbedError::Malformed(format!("{} equations for {n} variables", equations.len())));
        }
        if initial_state.len() != n {
            return Err(EmbedError::Malformed(format!(
                "initial state has {} entries for {n} variables",
                initial_state.len()
            )));
        }
        for (s, eq) in equations.iter().enumerate() {
            if eq.is_empty() {
                return Err(EmbedError::Malformed(format!("equation for {} has no terms", variables[s])));
            }
            if let Some(t) = eq.iter().find(|t| t.x_exp.len() != n || t.f_exp.len() != r) {
                return Err(EmbedError::Malformed(format!(
                    "term in equation for {} has {} x-exponents and {} f-exponents; expected {n} and {r}",
                    variables[s],
                    t.x_exp.len(),
                    t.f_exp.len()
                )));
            }
            if eq.iter().any(|t| !t.coef.is_finite()) {
                return Err(EmbedError::Malformed(format!("non-finite coefficient in equation for {}", variables[s])));
            }
        }
        family.check_closed(n)?;
        let mut family = family;
        for f in &mut family.functions {
            f.derivatives = std::mem::take(&mut f.derivatives).into_iter().map(merge_terms).collect();
        }
        let equations = equations.into_iter().map(merge_terms).collect();
        Ok(GeneralSystem { variables, family, equations, initial_state, translation: None })
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn r(&self) -> usize {
        self.family.len()
    }

    /// Initial integration vector: `x₀` followed by the initial values of the
    /// augmented functions.
    pub fn initial_vector(&self) -> Vec<f64> {
        let mut v = self.initial_state.clone();
        for u in self.family.augmented() {
            v.push(self.family.functions[u].initial_value.expect("checked on construction"));
        }
        v
    }

    /// Function values from the integration state `[x, augmented...]`.
    pub fn function_values(&self, state: &[f64]) -> Vec<f64> {
        let n = self.n();
        let x = &state[..n];
        let mut aug = state[n..].iter();
        self.family
            .functions
            .iter()
            .map(|f| match f.eval(x) {
                Some(v) => v,
                None => *aug.next().expect("state carries augmented values"),
            })
            .collect()
    }

    /// Function values at `x₀`.
    pub fn initial_function_values(&self) -> Vec<f64> {
        self.function_values(&self.initial_vector())
    }
}

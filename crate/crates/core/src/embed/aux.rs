//! Auxiliary variables `yᵤ = fᵤ^q ∏ₛ xₛ^pₛ` and the GLV system they produce.

use std::collections::{BTreeMap, HashMap};

use crate::algebra::{Rational, RationalMatrix};
use crate::qp::{QpSystem, Quasimonomial};

use super::system::GeneralSystem;
use super::EmbedError;

/// Group element `ξ(p, q): f ↦ f^q ∏ₛ xₛ^pₛ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Xi {
    pub p: Vec<Rational>,
    pub q: Rational,
}

impl Xi {
    pub fn new(p: Vec<Rational>, q: Rational) -> Result<Self, EmbedError> {
        if q.is_zero() {
            return Err(EmbedError::ZeroQ);
        }
        Ok(Xi { p, q })
    }

    pub fn identity(n: usize) -> Self {
        Xi { p: vec![Rational::zero(); n], q: Rational::one() }
    }

    /// `ξ(p₁,q₁) ∘ ξ(p₂,q₂) = ξ(p₁ + q₁p₂, q₁q₂)`.
    pub fn compose(&self, other: &Xi) -> Xi {
        assert_eq!(self.p.len(), other.p.len(), "ξ elements over different variable counts");
        Xi {
            p: self.p.iter().zip(&other.p).map(|(a, b)| a + &(&self.q * b)).collect(),
            q: &self.q * &other.q,
        }
    }

    pub fn inverse(&self) -> Xi {
        let q_inv = self.q.recip().expect("q is non-zero by construction");
        Xi { p: self.p.iter().map(|p| -(p * &q_inv)).collect(), q: q_inv }
    }
}

/// Free-standing composition, for symmetry with the group notation.
pub fn xi_compose(t1: &Xi, t2: &Xi) -> Xi {
    t1.compose(t2)
}

/// One auxiliary variable per family function, in family order.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSpec {
    pub aux: Vec<Xi>,
}

impl AuxSpec {
    pub fn new(aux: Vec<Xi>) -> Self {
        AuxSpec { aux }
    }

    /// `yᵤ = fᵤ` for every function.
    pub fn simplest(n: usize, r: usize) -> Self {
        AuxSpec { aux: vec![Xi::identity(n); r] }
    }

    /// Single-function spec from integer `p` (one per variable) and `q`.
    pub fn single(p: &[i64], q: i64) -> Result<Self, EmbedError> {
        let p = p.iter().map(|&v| Rational::from_integer(v)).collect();
        Ok(AuxSpec { aux: vec![Xi::new(p, Rational::from_integer(q))?] })
    }

    pub fn check(&self, n: usize, r: usize) -> Result<(), EmbedError> {
        if self.aux.len() != r {
            return Err(EmbedError::SpecMismatch(format!(
                "{} auxiliary definitions for {r} family functions",
                self.aux.len()
            )));
        }
        for xi in &self.aux {
            if xi.q.is_zero() {
                return Err(EmbedError::ZeroQ);
            }
            if xi.p.len() != n {
                return Err(EmbedError::SpecMismatch(format!("p has {} entries for {n} variables", xi.p.len())));
            }
        }
        Ok(())
    }
}

/// Rewrites a GLV exponent over `(x, y)` as an exponent over `(x, f)` by
/// substituting `yᵤ = fᵤ^qᵤ ∏ xₛ^pᵤₛ`.
pub fn original_exponents(spec: &AuxSpec, n: usize, qm: &Quasimonomial) -> Quasimonomial {
    let (xs, ys) = qm.exponents.split_at(n);
    let mut out: Vec<Rational> = xs.to_vec();
    for (v, xi) in ys.iter().zip(&spec.aux) {
        for (o, p) in out.iter_mut().zip(&xi.p) {
            *o += &(v * p);
        }
    }
    out.extend(ys.iter().zip(&spec.aux).map(|(v, xi)| v * &xi.q));
    Quasimonomial::new(out)
}

/// Inverse of [`original_exponents`]: `(i, j) ↦ (i − Σᵤ jᵤpᵤ/qᵤ, j/q)`.
pub fn glv_exponents(spec: &AuxSpec, n: usize, qm: &Quasimonomial) -> Quasimonomial {
    let (is, js) = qm.exponents.split_at(n);
    let ratios: Vec<Rational> = js.iter().zip(&spec.aux).map(|(j, xi)| j / &xi.q).collect();
    let mut out: Vec<Rational> = is.to_vec();
    for (ratio, xi) in ratios.iter().zip(&spec.aux) {
        for (o, p) in out.iter_mut().zip(&xi.p) {
            *o -= &(ratio * p);
        }
    }
    out.extend(ratios);
    Quasimonomial::new(out)
}

/// Per-capita rate `ẋ/x` of one GLV variable, keyed by `(x, f)` exponents.
#[derive(Default)]
struct Rate {
    terms: BTreeMap<Vec<Rational>, Rational>,
}

impl Rate {
    fn add(&mut self, key: Vec<Rational>, coef: Rational) {
        *self.terms.entry(key).or_insert_with(Rational::zero) += &coef;
    }
}

fn exact(x: f64) -> Rational {
    Rational::from_f64(x).expect("coefficients are checked finite")
}

/// Builds the GLV system in the variables `(x₁…xₙ, y₁…yᵣ)`.
///
/// Quasimonomials are collected structurally (a term contributes its
/// quasimonomial even when its coefficient vanishes), so the quasimonomial
/// set in `(x, f)` coordinates does not depend on `spec`.
pub fn introduce_aux(sys: &GeneralSystem, spec: &AuxSpec) -> Result<QpSystem, EmbedError> {
    let n = sys.n();
    let r = sys.r();
    spec.check(n, r)?;
    sys.family.check_closed(n)?;
    let unit = |s: usize, len: usize| -> Vec<Rational> {
        let mut v = vec![Rational::zero(); len];
        v[s] = Rational::one();
        v
    };

    let mut rates: Vec<Rate> = (0..n + r).map(|_| Rate::default()).collect();
    for (s, eq) in sys.equations.iter().enumerate() {
        let e_s = unit(s, n);
        for t in eq {
            let mut key: Vec<Rational> = t.x_exp.iter().zip(&e_s).map(|(i, d)| i - d).collect();
            key.extend(t.f_exp.iter().cloned());
            let coef = exact(t.coef);
            rates[s].add(key.clone(), coef.clone());
            for (u, xi) in spec.aux.iter().enumerate() {
                if !xi.p[s].is_zero() {
                    rates[n + u].add(key.clone(), &xi.p[s] * &coef);
                }
            }
        }
    }
    for (u, (f, xi)) in sys.family.functions.iter().zip(&spec.aux).enumerate() {
        let e_u = unit(u, r);
        for (s, eq) in sys.equations.iter().enumerate() {
            for t in eq {
                for d in &f.derivatives[s] {
                    let mut key: Vec<Rational> = t.x_exp.iter().zip(&d.x_exp).map(|(a, b)| a + b).collect();
                    key.extend(t.f_exp.iter().zip(&d.f_exp).zip(&e_u).map(|((a, b), one)| &(a + b) - one));
                    let coef = &xi.q * &(exact(t.coef) * exact(d.coef));
                    rates[n + u].add(key, coef);
                }
            }
        }
    }

    // union of non-constant quasimonomials, in GLV coordinates
    let mut columns: BTreeMap<Quasimonomial, Vec<Rational>> = BTreeMap::new();
    for rate in &rates {
        for key in rate.terms.keys() {
            if key.iter().all(Rational::is_zero) {
                continue;
            }
            let orig = Quasimonomial::new(key.clone());
            columns.entry(glv_exponents(spec, n, &orig)).or_insert_with(|| key.clone());
        }
    }
    if columns.is_empty() {
        return Err(EmbedError::Malformed("embedding produced no quasimonomials".into()));
    }
    let col_index: HashMap<Vec<Rational>, usize> =
        columns.values().enumerate().map(|(j, key)| (key.clone(), j)).collect();
    let m = columns.len();
    let mut lambda = vec![Rational::zero(); n + r];
    let mut a = RationalMatrix::zeros(n + r, m);
    for (v, rate) in rates.iter().enumerate() {
        for (key, total) in &rate.terms {
            if key.iter().all(Rational::is_zero) {
                lambda[v] = total.clone();
            } else {
                a[(v, col_index[key])] = total.clone();
            }
        }
    }
    let b_rows: Vec<Vec<Rational>> = columns.keys().map(|q| q.exponents.clone()).collect();
    let b = RationalMatrix::from_rows(b_rows, n + r)?;

    let mut variables = sys.variables.clone();
    variables.extend(sys.family.functions.iter().map(|f| aux_name(&f.name, &sys.variables)));
    let initial_state = aux_initial_state(sys, spec);
    Ok(QpSystem::new(variables, lambda, a, b, initial_state)?)
}

fn aux_name(function: &str, taken: &[String]) -> String {
    let mut name = format!("y_{function}");
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// `(x₀, y₀)` when every component is strictly positive.
pub fn aux_initial_state(sys: &GeneralSystem, spec: &AuxSpec) -> Option<Vec<f64>> {
    let x0 = &sys.initial_state;
    let f0 = sys.initial_function_values();
    aux_state(spec, x0, &f0)
}

/// `(x, y)` for given `x` and function values, or `None` off the positive orthant.
pub fn aux_state(spec: &AuxSpec, x: &[f64], f: &[f64]) -> Option<Vec<f64>> {
    if x.iter().chain(f).any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    let mut state = x.to_vec();
    for (xi, &fu) in spec.aux.iter().zip(f) {
        let log_y = xi.q.to_f64() * fu.ln()
            + xi.p.iter().zip(x).map(|(p, &xs)| p.to_f64() * xs.ln()).sum::<f64>();
        state.push(log_y.exp());
    }
    Some(state)
}

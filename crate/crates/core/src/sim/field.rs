//! Right-hand sides of the three system kinds as [`VectorField`]s.

use crate::algebra::Rational;
use crate::embed::{GeneralSystem, Term};
use crate::qp::{LvSystem, QpSystem};

use super::SimError;

/// An autonomous ODE `u̇ = F(u)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    fn labels(&self) -> Vec<String>;

    /// Whether every component must stay strictly positive.
    fn requires_positive(&self) -> bool;

    fn eval(&self, state: &[f64], out: &mut [f64]) -> Result<(), SimError>;

    fn rhs(&self, state: &[f64]) -> Result<Vec<f64>, SimError> {
        let mut out = vec![0.0; self.dim()];
        self.eval(state, &mut out)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
enum Exp {
    Int(i32),
    Real(f64),
}

impl Exp {
    fn from_rational(e: &Rational) -> Self {
        match e.to_i64().and_then(|k| i32::try_from(k).ok()) {
            Some(k) => Exp::Int(k),
            None => Exp::Real(e.to_f64()),
        }
    }

    fn pow(self, base: f64) -> Result<f64, SimError> {
        match self {
            Exp::Int(k) => {
                if base == 0.0 && k < 0 {
                    Err(SimError::Domain(format!("zero raised to power {k}")))
                } else {
                    Ok(base.powi(k))
                }
            }
            Exp::Real(e) => {
                if base > 0.0 {
                    Ok(base.powf(e))
                } else {
                    Err(SimError::Domain(format!("{base} raised to fractional power {e}")))
                }
            }
        }
    }
}

/// Sparse exponent vector: `(component, exponent)` for non-zero exponents.
#[derive(Debug, Clone)]
struct Monomial(Vec<(usize, Exp)>);

impl Monomial {
    fn compile(exps: &[Rational], offset: usize) -> Self {
        Monomial(
            exps.iter()
                .enumerate()
                .filter(|(_, e)| !e.is_zero())
                .map(|(k, e)| (k + offset, Exp::from_rational(e)))
                .collect(),
        )
    }

    fn eval(&self, values: &[f64]) -> Result<f64, SimError> {
        self.0.iter().try_fold(1.0, |acc, &(k, e)| Ok(acc * e.pow(values[k])?))
    }
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coef: f64,
    monomial: Monomial,
}

impl CompiledTerm {
    /// Exponents index into `[x..., f...]`.
    fn compile(t: &Term, n: usize) -> Self {
        let mut parts = Monomial::compile(&t.x_exp, 0).0;
        parts.extend(Monomial::compile(&t.f_exp, n).0);
        CompiledTerm { coef: t.coef, monomial: Monomial(parts) }
    }

    fn eval(&self, values: &[f64]) -> Result<f64, SimError> {
        Ok(self.coef * self.monomial.eval(values)?)
    }
}

fn check_dim(state: &[f64], dim: usize) -> Result<(), SimError> {
    if state.len() != dim {
        return Err(SimError::Dimension(format!("state has {} components, system has {dim}", state.len())));
    }
    Ok(())
}

fn check_positive(state: &[f64]) -> Result<(), SimError> {
    match state.iter().position(|&v| v.is_nan() || v <= 0.0) {
        Some(index) => Err(SimError::Domain(format!("component {index} = {} is not strictly positive", state[index]))),
        None => Ok(()),
    }
}

/// `ẋᵢ = xᵢ(λᵢ + Σⱼ Aᵢⱼ ∏ₖ xₖ^Bⱼₖ)`.
pub struct GlvField<'a> {
    sys: &'a QpSystem,
    rows: Vec<Monomial>,
    lambda: Vec<f64>,
    a: Vec<Vec<f64>>,
}

impl<'a> GlvField<'a> {
    pub fn new(sys: &'a QpSystem) -> Self {
        let rows = (0..sys.m()).map(|j| Monomial::compile(sys.b.row(j), 0)).collect();
        GlvField { sys, rows, lambda: sys.lambda_f64(), a: sys.a_f64() }
    }
}

impl VectorField for GlvField<'_> {
    fn dim(&self) -> usize {
        self.sys.n()
    }

    fn labels(&self) -> Vec<String> {
        self.sys.variables.clone()
    }

    fn requires_positive(&self) -> bool {
        true
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) -> Result<(), SimError> {
        check_dim(state, self.dim())?;
        check_positive(state)?;
        let qm: Vec<f64> = self.rows.iter().map(|r| r.eval(state)).collect::<Result<_, _>>()?;
        for (i, o) in out.iter_mut().enumerate() {
            let rate = self.lambda[i] + self.a[i].iter().zip(&qm).map(|(a, q)| a * q).sum::<f64>();
            *o = state[i] * rate;
        }
        Ok(())
    }
}

/// `żⱼ = zⱼ(λ'ⱼ + Σₖ A'ⱼₖ zₖ)`.
pub struct LvField<'a> {
    sys: &'a LvSystem,
}

impl<'a> LvField<'a> {
    pub fn new(sys: &'a LvSystem) -> Self {
        LvField { sys }
    }
}

impl VectorField for LvField<'_> {
    fn dim(&self) -> usize {
        self.sys.m()
    }

    fn labels(&self) -> Vec<String> {
        self.sys.labels()
    }

    fn requires_positive(&self) -> bool {
        true
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) -> Result<(), SimError> {
        check_dim(state, self.dim())?;
        check_positive(state)?;
        for (j, o) in out.iter_mut().enumerate() {
            let rate =
                self.sys.lambda_prime[j] + self.sys.a_prime[j].iter().zip(state).map(|(a, z)| a * z).sum::<f64>();
            *o = state[j] * rate;
        }
        Ok(())
    }
}

/// `ẋₛ = Σ a x^i f^j`, with augmented functions integrated through
/// `ḟ = Σₛ (∂f/∂xₛ) ẋₛ`. State layout: `[x..., augmented f...]`.
pub struct GeneralField<'a> {
    sys: &'a GeneralSystem,
    equations: Vec<Vec<CompiledTerm>>,
    /// Per augmented function, the compiled partial derivatives.
    augmented: Vec<Vec<Vec<CompiledTerm>>>,
    positive: bool,
}

impl<'a> GeneralField<'a> {
    /// Field that enforces positivity of the state, as required before an
    /// embedding.
    pub fn new(sys: &'a GeneralSystem) -> Self {
        Self::build(sys, true)
    }

    /// Field that accepts any real state the terms can be evaluated at.
    pub fn unconstrained(sys: &'a GeneralSystem) -> Self {
        Self::build(sys, false)
    }

    fn build(sys: &'a GeneralSystem, positive: bool) -> Self {
        let n = sys.n();
        let compile = |terms: &Vec<Term>| terms.iter().map(|t| CompiledTerm::compile(t, n)).collect();
        let equations = sys.equations.iter().map(compile).collect();
        let augmented = sys
            .family
            .augmented()
            .into_iter()
            .map(|u| sys.family.functions[u].derivatives.iter().map(compile).collect())
            .collect();
        GeneralField { sys, equations, augmented, positive }
    }
}

impl VectorField for GeneralField<'_> {
    fn dim(&self) -> usize {
        self.sys.n() + self.augmented.len()
    }

    fn labels(&self) -> Vec<String> {
        let mut labels = self.sys.variables.clone();
        for u in self.sys.family.augmented() {
            labels.push(self.sys.family.functions[u].name.clone());
        }
        labels
    }

    fn requires_positive(&self) -> bool {
        self.positive
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) -> Result<(), SimError> {
        check_dim(state, self.dim())?;
        let n = self.sys.n();
        let f = self.sys.function_values(state);
        if self.positive {
            check_positive(&state[..n])?;
            check_positive(&f)?;
        }
        let mut values = state[..n].to_vec();
        values.extend(&f);
        let sum = |terms: &[CompiledTerm]| -> Result<f64, SimError> {
            terms.iter().try_fold(0.0, |acc, t| Ok(acc + t.eval(&values)?))
        };
        for (o, eq) in out.iter_mut().zip(&self.equations) {
            *o = sum(eq)?;
        }
        for (a, partials) in self.augmented.iter().enumerate() {
            let mut rate = 0.0;
            for (s, terms) in partials.iter().enumerate() {
                rate += sum(terms)? * out[s];
            }
            out[n + a] = rate;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::RationalMatrix;
    use crate::qp::Quasimonomial;

    #[test]
    fn zero_lv_is_stationary() {
        let lv = LvSystem {
            variables: vec!["x".into(), "y".into()],
            lambda_prime: vec![0.0; 2],
            a_prime: vec![vec![0.0; 2]; 2],
            quasimonomials: vec![Quasimonomial::from_integers(&[1, 0]), Quasimonomial::from_integers(&[0, 1])],
            z0: None,
        };
        assert_eq!(LvField::new(&lv).rhs(&[0.3, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn glv_requires_positive_state() {
        let sys = QpSystem::from_f64(
            vec!["x".into()],
            &[1.0],
            &[vec![-1.0]],
            RationalMatrix::from_ratios(&[&[(1, 2)]]).unwrap(),
            None,
        )
        .unwrap();
        let field = GlvField::new(&sys);
        assert!(matches!(field.rhs(&[-1.0]), Err(SimError::Domain(_))));
        assert_eq!(field.rhs(&[4.0]).unwrap(), vec![4.0 * (1.0 - 2.0)]);
    }
}

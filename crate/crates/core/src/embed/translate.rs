//! Phase-space translation into the positive orthant and positivity checks.
//!
//! A shift `x' = x + c` is applied to every variable and `g = f/κ + k` to
//! every family function. Exponential-affine functions are renormalized so
//! that `g` keeps the original formula in the shifted variables; the constant
//! factor `κ = exp(−w·c)` moves into the coefficients. Every other evaluator
//! has its argument re-expanded about the new origin and `κ = 1`.

use crate::algebra::Rational;
use crate::qp::QpSystem;

use super::system::{merge_terms, Evaluator, FunctionFamily, GeneralSystem, PolyTerm, Term, Translation};
use super::EmbedError;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn shifted_power(name: &str, e: &Rational) -> Result<u32, EmbedError> {
    e.to_i64()
        .filter(|&k| k >= 0)
        .and_then(|k| u32::try_from(k).ok())
        .ok_or_else(|| EmbedError::FormatNotPreserved(format!("{name} has exponent {e}; shifts need non-negative integers")))
}

/// Expands `(v' − shift)^power` into `Σ coef · v'^t`.
fn binomial_expansion(power: u32, shift: f64) -> Vec<(u32, f64)> {
    (0..=power).map(|t| (t, binomial(power, t) * (-shift).powi((power - t) as i32))).collect()
}

/// Rewrites one term in translated coordinates, with `f = κ(g − k)`.
fn translate_term(
    term: &Term,
    sys: &GeneralSystem,
    c: &[f64],
    k: &[f64],
    kappa: &[f64],
) -> Result<Vec<Term>, EmbedError> {
    let mut out = vec![Term { coef: term.coef, x_exp: Vec::new(), f_exp: Vec::new() }];
    for (s, e) in term.x_exp.iter().enumerate() {
        if c[s] == 0.0 || e.is_zero() {
            for t in &mut out {
                t.x_exp.push(e.clone());
            }
            continue;
        }
        let power = shifted_power(&sys.variables[s], e)?;
        let expansion = binomial_expansion(power, c[s]);
        out = out
            .into_iter()
            .flat_map(|t| {
                expansion.iter().map(move |&(deg, w)| {
                    let mut x_exp = t.x_exp.clone();
                    x_exp.push(Rational::from_integer(i64::from(deg)));
                    Term { coef: t.coef * w, x_exp, f_exp: Vec::new() }
                })
            })
            .collect();
    }
    for (u, e) in term.f_exp.iter().enumerate() {
        let scale = if e.is_zero() { 1.0 } else { kappa[u].powf(e.to_f64()) };
        if k[u] == 0.0 || e.is_zero() {
            for t in &mut out {
                t.coef *= scale;
                t.f_exp.push(e.clone());
            }
            continue;
        }
        let power = shifted_power(&sys.family.functions[u].name, e)?;
        let expansion = binomial_expansion(power, k[u]);
        out = out
            .into_iter()
            .flat_map(|t| {
                expansion.iter().map(move |&(deg, w)| {
                    let mut f_exp = t.f_exp.clone();
                    f_exp.push(Rational::from_integer(i64::from(deg)));
                    Term { coef: t.coef * w * scale, x_exp: t.x_exp.clone(), f_exp }
                })
            })
            .collect();
    }
    Ok(out)
}

/// `P(x' − c)` as a polynomial in `x'`.
fn shift_polynomial(terms: &[PolyTerm], c: &[f64]) -> Vec<PolyTerm> {
    let mut out: Vec<PolyTerm> = Vec::new();
    for term in terms {
        let mut partial = vec![PolyTerm { coef: term.coef, exponents: Vec::new() }];
        for (s, &e) in term.exponents.iter().enumerate() {
            let expansion = if c[s] == 0.0 { vec![(e, 1.0)] } else { binomial_expansion(e, c[s]) };
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    expansion.iter().map(move |&(deg, w)| {
                        let mut exponents = p.exponents.clone();
                        exponents.push(deg);
                        PolyTerm { coef: p.coef * w, exponents }
                    })
                })
                .collect();
        }
        for p in partial {
            match out.iter_mut().find(|q| q.exponents == p.exponents) {
                Some(q) => q.coef += p.coef,
                None => out.push(p),
            }
        }
    }
    out
}

fn shift_affine(offset: f64, weights: &[f64], c: &[f64]) -> f64 {
    offset - weights.iter().zip(c).map(|(w, c)| w * c).sum::<f64>()
}

/// Translates `sys` by `x' = x + c` and `g = f/κ + k`.
///
/// Shifted variables and functions must appear with non-negative integer
/// exponents so the binomial expansion terminates.
pub fn positivity_translate(sys: &GeneralSystem, c: &[f64], k: &[f64]) -> Result<GeneralSystem, EmbedError> {
    let n = sys.n();
    let r = sys.r();
    if c.len() != n || k.len() != r {
        return Err(EmbedError::SpecMismatch(format!(
            "translation has {} shifts for {n} variables and {} for {r} functions",
            c.len(),
            k.len()
        )));
    }
    if c.iter().chain(k).any(|v| !v.is_finite()) {
        return Err(EmbedError::Malformed("translation components must be finite".into()));
    }

    let kappa: Vec<f64> = sys
        .family
        .functions
        .iter()
        .map(|f| match &f.evaluator {
            Evaluator::ExpAffine { weights, .. } if f.plus == 0.0 => {
                (-weights.iter().zip(c).map(|(w, c)| w * c).sum::<f64>()).exp()
            }
            _ => 1.0,
        })
        .collect();

    let mut equations = Vec::with_capacity(n);
    for eq in &sys.equations {
        let mut terms = Vec::new();
        for t in eq {
            terms.extend(translate_term(t, sys, c, k, &kappa)?);
        }
        equations.push(merge_terms(terms));
    }

    let mut functions = Vec::with_capacity(r);
    for (u, f) in sys.family.functions.iter().enumerate() {
        let mut g = f.clone();
        g.derivatives = Vec::with_capacity(n);
        for partial in &f.derivatives {
            let mut terms = Vec::new();
            for t in partial {
                for mut shifted in translate_term(t, sys, c, k, &kappa)? {
                    shifted.coef /= kappa[u];
                    terms.push(shifted);
                }
            }
            g.derivatives.push(merge_terms(terms));
        }
        g.evaluator = match &f.evaluator {
            Evaluator::ExpAffine { offset, weights } if f.plus == 0.0 => {
                Evaluator::ExpAffine { offset: *offset, weights: weights.clone() }
            }
            Evaluator::ExpAffine { offset, weights } => {
                Evaluator::ExpAffine { offset: shift_affine(*offset, weights, c), weights: weights.clone() }
            }
            Evaluator::SinAffine { offset, weights } => {
                Evaluator::SinAffine { offset: shift_affine(*offset, weights, c), weights: weights.clone() }
            }
            Evaluator::CosAffine { offset, weights } => {
                Evaluator::CosAffine { offset: shift_affine(*offset, weights, c), weights: weights.clone() }
            }
            Evaluator::InversePolynomial { terms } => Evaluator::InversePolynomial { terms: shift_polynomial(terms, c) },
            Evaluator::PolynomialPower { terms, power } => {
                Evaluator::PolynomialPower { terms: shift_polynomial(terms, c), power: power.clone() }
            }
            Evaluator::OdeAugmented => Evaluator::OdeAugmented,
        };
        g.plus = f.plus / kappa[u] + k[u];
        g.initial_value = f.initial_value.map(|v| v / kappa[u] + k[u]);
        functions.push(g);
    }

    let step = Translation { c: c.to_vec(), k: k.to_vec(), kappa };
    let translation = match &sys.translation {
        Some(previous) => previous.then(&step),
        None => step,
    };
    let initial_state = sys.initial_state.iter().zip(c).map(|(x, c)| x + c).collect();
    let mut out = GeneralSystem::new(sys.variables.clone(), FunctionFamily::new(functions), equations, initial_state)?;
    out.translation = Some(translation);
    Ok(out)
}

/// True iff every variable and every family function value is positive at
/// the integration state `[x, augmented...]`.
pub fn check_positivity_general(sys: &GeneralSystem, state: &[f64]) -> bool {
    let expected = sys.n() + sys.family.augmented().len();
    if state.len() != expected {
        return false;
    }
    let f = sys.function_values(state);
    state[..sys.n()].iter().chain(&f).all(|&v| v > 0.0)
}

/// True iff every GLV variable is positive at `state`.
pub fn check_positivity_qp(sys: &QpSystem, state: &[f64]) -> bool {
    state.len() == sys.n() && state.iter().all(|&v| v > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::system::Function;

    fn linear(coefs: &[(f64, i64)]) -> GeneralSystem {
        GeneralSystem::new(
            vec!["x".into()],
            FunctionFamily::default(),
            vec![coefs.iter().map(|&(a, e)| Term::ints(a, &[e], &[])).collect()],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn zero_shift_is_identity() {
        let sys = linear(&[(-1.0, 1), (1.0, 0)]);
        let out = positivity_translate(&sys, &[0.0], &[]).unwrap();
        assert_eq!(out.equations, sys.equations);
        assert_eq!(out.initial_state, sys.initial_state);
    }

    /// `ẋ = −x + 1` shifted by 2: substituting `x = x' − 2` by hand gives
    /// `ẋ' = −x' + 3`.
    #[test]
    fn linear_shift_matches_substitution() {
        let sys = linear(&[(-1.0, 1), (1.0, 0)]);
        let out = positivity_translate(&sys, &[2.0], &[]).unwrap();
        let mut eq = out.equations[0].clone();
        eq.sort_by(|a, b| a.x_exp.cmp(&b.x_exp));
        assert_eq!(eq, vec![Term::ints(3.0, &[0], &[]), Term::ints(-1.0, &[1], &[])]);
        assert_eq!(out.initial_state, vec![3.0]);
    }

    #[test]
    fn quadratic_shift_matches_direct_evaluation() {
        let sys = linear(&[(0.5, 2), (-3.0, 1), (1.0, 0)]);
        let c = 1.75;
        let out = positivity_translate(&sys, &[c], &[]).unwrap();
        for xp in [0.1, 1.0, 2.5, 7.0] {
            let lhs: f64 = out.equations[0].iter().map(|t| t.eval(&[xp], &[]).unwrap()).sum();
            let x = xp - c;
            let rhs = 0.5 * x * x - 3.0 * x + 1.0;
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn fractional_exponent_cannot_be_shifted() {
        let sys = GeneralSystem::new(
            vec!["x".into()],
            FunctionFamily::default(),
            vec![vec![Term::new(1.0, vec![Rational::new(1, 2).unwrap()], vec![])]],
            vec![1.0],
        )
        .unwrap();
        let err = positivity_translate(&sys, &[1.0], &[]);
        assert!(matches!(err, Err(EmbedError::FormatNotPreserved(_))));
        // unshifted variables may keep any exponent
        assert!(positivity_translate(&sys, &[0.0], &[]).is_ok());
    }

    #[test]
    fn additive_function_shift() {
        // ẋ = sin(x)², ∂sin/∂x = cos, ∂cos/∂x = −sin
        let s = Function::new(
            "s",
            Evaluator::SinAffine { offset: 0.0, weights: vec![1.0] },
            vec![vec![Term::ints(1.0, &[0], &[0, 1])]],
        );
        let co = Function::new(
            "c",
            Evaluator::CosAffine { offset: 0.0, weights: vec![1.0] },
            vec![vec![Term::ints(-1.0, &[0], &[1, 0])]],
        );
        let sys = GeneralSystem::new(
            vec!["x".into()],
            FunctionFamily::new(vec![s, co]),
            vec![vec![Term::ints(1.0, &[0], &[2, 0])]],
            vec![0.4],
        )
        .unwrap();
        let out = positivity_translate(&sys, &[0.5], &[2.0, 3.0]).unwrap();
        for xp in [0.6, 1.3, 2.0] {
            let g = out.function_values(&[xp]);
            let x = xp - 0.5;
            assert!((g[0] - (x.sin() + 2.0)).abs() < 1e-14);
            assert!((g[1] - (x.cos() + 3.0)).abs() < 1e-14);
            let rhs: f64 = out.equations[0].iter().map(|t| t.eval(&[xp], &g).unwrap()).sum();
            assert!((rhs - x.sin().powi(2)).abs() < 1e-12);
            let dg: f64 = out.family.functions[0].derivatives[0].iter().map(|t| t.eval(&[xp], &g).unwrap()).sum();
            assert!((dg - x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn positivity_checks() {
        let f = Function::new(
            "f",
            Evaluator::InversePolynomial {
                terms: vec![
                    PolyTerm { coef: 1.0, exponents: vec![0] },
                    PolyTerm { coef: 1.0, exponents: vec![1] },
                    PolyTerm { coef: 1.0, exponents: vec![2] },
                ],
            },
            vec![vec![Term::ints(-1.0, &[0], &[2]), Term::ints(-2.0, &[1], &[2])]],
        );
        let sys = GeneralSystem::new(
            vec!["x".into()],
            FunctionFamily::new(vec![f]),
            vec![vec![Term::ints(-1.0, &[1], &[1]), Term::ints(-1.0, &[2], &[1])]],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(sys.function_values(&[1.0]), vec![1.0 / 3.0]);
        assert!(check_positivity_general(&sys, &[1.0]));
        assert!(!check_positivity_general(&sys, &[0.0]));
        assert!(!check_positivity_general(&sys, &[-1.0]));
    }
}

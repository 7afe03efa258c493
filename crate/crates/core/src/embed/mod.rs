//! Embedding of systems with non-polynomial functions into GLV form.

mod aux;
mod system;
mod translate;

pub use aux::{aux_initial_state, aux_state, glv_exponents, introduce_aux, original_exponents, xi_compose, AuxSpec, Xi};
pub use system::{
    merge_terms, pow_rational, Evaluator, Function, FunctionFamily, GeneralSystem, PolyTerm, Term, Translation,
};
pub use translate::{check_positivity_general, check_positivity_qp, positivity_translate};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::qp::{ExpandedMap, LvSystem, ModelError, QpSystem, Quasimonomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("q must be nonzero")]
    ZeroQ,
    #[error("function family is not closed under differentiation: {0}")]
    NotClosed(String),
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("auxiliary specification does not fit the system: {0}")]
    SpecMismatch(String),
    #[error("translation does not preserve the quasipolynomial format: {0}")]
    FormatNotPreserved(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Every stage of the recasting of one [`GeneralSystem`].
#[derive(Debug, Clone)]
pub struct Recast {
    /// The system actually embedded (translated when a shift was requested).
    pub general: GeneralSystem,
    pub spec: AuxSpec,
    /// GLV system with quasimonomials in canonical order.
    pub glv: QpSystem,
    pub lv: LvSystem,
    /// Square exponent matrix aligned with `lv`'s variable order.
    pub map: ExpandedMap,
}

impl Recast {
    /// LV quasimonomials over the translated `(x, f)` variables.
    pub fn original_quasimonomials(&self) -> Vec<Quasimonomial> {
        let n = self.general.n();
        self.lv.quasimonomials.iter().map(|q| original_exponents(&self.spec, n, q)).collect()
    }

    /// The LV system reordered lexicographically by `(x, f)` exponents. This
    /// order depends only on the system and its derivative representation.
    pub fn lv_in_original_order(&self) -> (LvSystem, Vec<Quasimonomial>) {
        let originals = self.original_quasimonomials();
        let mut order: Vec<usize> = (0..originals.len()).collect();
        order.sort_by(|&i, &j| originals[i].cmp(&originals[j]));
        let sorted = order.iter().map(|&i| originals[i].clone()).collect();
        (self.lv.permuted(&order), sorted)
    }
}

/// Translates (optionally), introduces the auxiliary variables, embeds into
/// LV form and completes the exponent matrix.
pub fn recast(general: &GeneralSystem, shift: Option<(&[f64], &[f64])>, spec: &AuxSpec) -> Result<Recast, EmbedError> {
    let general = match shift {
        Some((c, k)) => positivity_translate(general, c, k)?,
        None => general.clone(),
    };
    let glv = introduce_aux(&general, spec)?.normalized()?.canonical();
    let lv = glv.lv_embed()?;
    let map = glv.expand_and_map()?;
    Ok(Recast { general, spec: spec.clone(), glv, lv, map })
}

use crate::embed::{aux_state, recast, AuxSpec, GeneralSystem, Recast};

use super::diffeo::QuasimonomialMap;
use super::field::{GeneralField, LvField};
use super::rk4::{integrate, IntegratorConfig};
use super::SimError;

/// Floor on the denominator of relative deviations.
pub const REL_FLOOR: f64 = 1e-12;

/// Outcome of [`verify_equivalence`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub max_rel_dev: f64,
    pub per_variable: Vec<f64>,
    /// LV variable labels over the GLV variables, aligned with `per_variable`.
    pub labels: Vec<String>,
    /// Time after which the comparison stopped, if either run lost positivity.
    pub truncated_at: Option<f64>,
    pub compared_points: usize,
    pub config: IntegratorConfig,
}

/// Integrates the original system and its LV normal form and compares the
/// LV trajectory with the quasimonomials of the original one.
///
/// `shift` is the positivity translation `(c, k)` applied before embedding;
/// the original system is integrated in its own coordinates and mapped
/// through the translation at each recorded time.
pub fn verify_equivalence(
    general: &GeneralSystem,
    shift: Option<(&[f64], &[f64])>,
    spec: &AuxSpec,
    cfg: &IntegratorConfig,
) -> Result<VerifyReport, SimError> {
    let recast = recast(general, shift, spec)?;
    verify_recast(general, &recast, cfg)
}

/// Same as [`verify_equivalence`] for an already computed [`Recast`].
pub fn verify_recast(general: &GeneralSystem, recast: &Recast, cfg: &IntegratorConfig) -> Result<VerifyReport, SimError> {
    let z0 = recast
        .lv
        .z0
        .clone()
        .ok_or_else(|| SimError::Domain("initial state is not strictly positive in embedding coordinates".into()))?;
    let original = integrate(&GeneralField::unconstrained(general), &general.initial_vector(), cfg)?;
    let lv = integrate(&LvField::new(&recast.lv), &z0, cfg)?;
    let map = QuasimonomialMap::new(recast.map.clone())?;
    let translation = match (&recast.general.translation, &general.translation) {
        (Some(total), Some(earlier)) => Some(total.relative_to(earlier)),
        (total, _) => total.clone(),
    };
    let n = general.n();

    let m = recast.lv.m();
    let mut per_variable = vec![0.0f64; m];
    let mut truncated_at = match (original.truncated_at, lv.truncated_at) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let mut compared = 0;
    for (k, (t, state)) in original.times.iter().zip(&original.states).enumerate() {
        let Some(z_lv) = lv.states.get(k) else { break };
        debug_assert!((lv.times[k] - t).abs() <= 1e-12 * t.abs().max(1.0));
        let f = general.function_values(state);
        let (x, g) = match &translation {
            Some(tr) => tr.apply(&state[..n], &f),
            None => (state[..n].to_vec(), f),
        };
        let mapped = aux_state(&recast.spec, &x, &g).and_then(|xt| map.forward(&xt).ok());
        let Some(z_mapped) = mapped else {
            truncated_at = Some(truncated_at.map_or(*t, |tr| tr.min(*t)));
            break;
        };
        for (dev, (a, b)) in per_variable.iter_mut().zip(z_lv.iter().zip(&z_mapped)) {
            *dev = dev.max((a - b).abs() / b.abs().max(REL_FLOOR));
        }
        compared += 1;
    }
    let max_rel_dev = per_variable.iter().copied().fold(0.0, f64::max);
    Ok(VerifyReport {
        max_rel_dev,
        per_variable,
        labels: recast.lv.labels(),
        truncated_at,
        compared_points: compared,
        config: *cfg,
    })
}

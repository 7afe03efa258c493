//! The quasimonomial map `z = x̃^𝓑` and its inverse on the positive orthant.

use crate::algebra::RationalMatrix;
use crate::qp::ExpandedMap;

use super::SimError;

/// Dummy components recovered by the inverse must equal 1 within this bound.
pub const MANIFOLD_TOL: f64 = 1e-9;

fn logs(v: &[f64]) -> Result<Vec<f64>, SimError> {
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x > 0.0 && x.is_finite() {
                Ok(x.ln())
            } else {
                Err(SimError::Domain(format!("component {i} = {x} is not strictly positive")))
            }
        })
        .collect()
}

/// `z_α = exp(Σ_β 𝓑_αβ ln x̃_β)`. A shorter `xtilde` is padded with ones, the
/// value of every dummy variable.
pub fn diffeo_forward(xtilde: &[f64], bexp: &RationalMatrix) -> Result<Vec<f64>, SimError> {
    if xtilde.len() > bexp.cols() {
        return Err(SimError::Dimension(format!(
            "{} components for a map over {} variables",
            xtilde.len(),
            bexp.cols()
        )));
    }
    let mut padded = xtilde.to_vec();
    padded.resize(bexp.cols(), 1.0);
    let ln_x = logs(&padded)?;
    Ok((0..bexp.rows())
        .map(|a| {
            bexp.row(a)
                .iter()
                .zip(&ln_x)
                .filter(|(b, _)| !b.is_zero())
                .map(|(b, l)| b.to_f64() * l)
                .sum::<f64>()
                .exp()
        })
        .collect())
}

/// Solves `ln x̃ = 𝓑⁻¹ ln z` and returns the genuine components. Fails when
/// `z` is off the image of the positive orthant with dummies fixed at 1.
pub fn diffeo_inverse(z: &[f64], map: &ExpandedMap) -> Result<Vec<f64>, SimError> {
    let inv = map.matrix.inverse().map_err(|e| SimError::Dimension(e.to_string()))?;
    let full = apply_inverse(z, &inv.to_f64_rows())?;
    if let Some((i, v)) = full.iter().enumerate().skip(map.genuine).find(|(_, v)| (*v - 1.0).abs() > MANIFOLD_TOL) {
        return Err(SimError::OffManifold(format!("dummy component {i} recovered as {v}")));
    }
    Ok(full[..map.genuine].to_vec())
}

fn apply_inverse(z: &[f64], inv: &[Vec<f64>]) -> Result<Vec<f64>, SimError> {
    if z.len() != inv.len() {
        return Err(SimError::Dimension(format!("{} components for a {}-dimensional map", z.len(), inv.len())));
    }
    let ln_z = logs(z)?;
    Ok(inv.iter().map(|row| row.iter().zip(&ln_z).map(|(a, l)| a * l).sum::<f64>().exp()).collect())
}

/// Precomputed forward and inverse maps for repeated use.
#[derive(Debug, Clone)]
pub struct QuasimonomialMap {
    map: ExpandedMap,
    inverse: Vec<Vec<f64>>,
}

impl QuasimonomialMap {
    pub fn new(map: ExpandedMap) -> Result<Self, SimError> {
        let inverse = map.matrix.inverse().map_err(|e| SimError::Dimension(e.to_string()))?.to_f64_rows();
        Ok(QuasimonomialMap { map, inverse })
    }

    pub fn forward(&self, xtilde: &[f64]) -> Result<Vec<f64>, SimError> {
        diffeo_forward(xtilde, &self.map.matrix)
    }

    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>, SimError> {
        let full = apply_inverse(z, &self.inverse)?;
        if let Some((i, v)) =
            full.iter().enumerate().skip(self.map.genuine).find(|(_, v)| (*v - 1.0).abs() > MANIFOLD_TOL)
        {
            return Err(SimError::OffManifold(format!("dummy component {i} recovered as {v}")));
        }
        Ok(full[..self.map.genuine].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_of(rows: &[&[i64]], genuine: usize) -> ExpandedMap {
        ExpandedMap { matrix: RationalMatrix::from_integers(rows).unwrap(), genuine, completion: vec![] }
    }

    #[test]
    fn identity_map() {
        let id = RationalMatrix::identity(3);
        let x = [0.5, 2.0, 3.0];
        let z = diffeo_forward(&x, &id).unwrap();
        for (a, b) in z.iter().zip(&x) {
            assert!((a - b).abs() < 1e-15);
        }
        let back = diffeo_inverse(&z, &map_of(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], 3)).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ones_map_to_ones() {
        let b = RationalMatrix::from_ratios(&[&[(1, 3), (-2, 1)], &[(5, 2), (7, 1)]]).unwrap();
        assert_eq!(diffeo_forward(&[1.0, 1.0], &b).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn off_manifold_detected() {
        // z = (x, x·d, d) with d the dummy
        let map = map_of(&[&[1, 0], &[1, 1]], 1);
        let z = diffeo_forward(&[2.0], &map.matrix).unwrap();
        assert!((diffeo_inverse(&z, &map).unwrap()[0] - 2.0).abs() < 1e-14);
        let perturbed = [z[0], z[1] * 1.01];
        assert!(matches!(diffeo_inverse(&perturbed, &map), Err(SimError::OffManifold(_))));
    }

    #[test]
    fn non_positive_rejected() {
        let id = RationalMatrix::identity(2);
        assert!(matches!(diffeo_forward(&[0.0, 1.0], &id), Err(SimError::Domain(_))));
    }
}

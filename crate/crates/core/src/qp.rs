//! Generalized Lotka-Volterra systems and their Lotka-Volterra embedding.
//!
//! A [`QpSystem`] is `ẋᵢ = xᵢ(λᵢ + Σⱼ Aᵢⱼ ∏ₖ xₖ^Bⱼₖ)`. Quasimonomial
//! transformations `x = x̂^C` act as `(λ, A, B) ↦ (C⁻¹λ, C⁻¹A, B·C)` and leave
//! `B·A`, `B·λ` and the quasimonomials themselves unchanged; those invariants
//! define the [`LvSystem`] `żⱼ = zⱼ(λ'ⱼ + Σₖ A'ⱼₖ zₖ)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{rationals_from_f64, rationals_to_f64, AlgebraError, Rational, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("quasimonomial row {0} is all zeros: constant term must live in λ")]
    ZeroRow(usize),
    #[error("system has no quasimonomials")]
    Empty,
    #[error("exponent matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("state component {index} = {value} is not strictly positive")]
    NonPositive { index: usize, value: f64 },
    #[error("transformation matrix is not invertible")]
    SingularTransform,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Exponent vector of one quasimonomial `∏ₖ xₖ^eₖ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quasimonomial {
    pub exponents: Vec<Rational>,
}

impl Quasimonomial {
    pub fn new(exponents: Vec<Rational>) -> Self {
        Quasimonomial { exponents }
    }

    pub fn from_integers(exps: &[i64]) -> Self {
        Quasimonomial { exponents: exps.iter().map(|&e| Rational::from_integer(e)).collect() }
    }

    pub fn is_constant(&self) -> bool {
        self.exponents.iter().all(Rational::is_zero)
    }

    /// `∏ xₖ^eₖ`; requires positive `x` wherever the exponent is non-zero.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, &xk)| match e.to_i64().and_then(|k| i32::try_from(k).ok()) {
                Some(k) => xk.powi(k),
                None => xk.powf(e.to_f64()),
            })
            .product()
    }

    /// Human-readable form like `x^-1*y` over the given variable names.
    pub fn display_with(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .exponents
            .iter()
            .zip(names)
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, name)| if e.is_one() { name.clone() } else { format!("{name}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// A system in GLV format. `a` is `n×m` (rows per variable), `b` is `m×n`.
///
/// Coefficients are exact rationals; floats convert without loss, so `B·A`
/// and `C⁻¹A` are exact and rounded only when an [`LvSystem`] is produced.
#[derive(Debug, Clone, PartialEq)]
pub struct QpSystem {
    pub variables: Vec<String>,
    pub lambda: Vec<Rational>,
    pub a: RationalMatrix,
    pub b: RationalMatrix,
    pub initial_state: Option<Vec<f64>>,
}

/// Outcome of [`QpSystem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    pub issues: Vec<String>,
    pub duplicate_rows: Vec<(usize, usize)>,
    pub zero_rows: Vec<usize>,
    /// The system with duplicate quasimonomials merged, when no hard issue remains.
    pub normalized: Option<QpSystem>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl QpSystem {
    /// Builds a system after checking that all dimensions agree.
    pub fn new(
        variables: Vec<String>,
        lambda: Vec<Rational>,
        a: RationalMatrix,
        b: RationalMatrix,
        initial_state: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let sys = QpSystem { variables, lambda, a, b, initial_state };
        if let Some(problem) = sys.dimension_problem() {
            return Err(ModelError::Dimension(problem));
        }
        Ok(sys)
    }

    /// Builds a system from float coefficients, converted exactly.
    pub fn from_f64(
        variables: Vec<String>,
        lambda: &[f64],
        a: &[Vec<f64>],
        b: RationalMatrix,
        initial_state: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let m = b.rows();
        if let Some(row) = a.iter().position(|r| r.len() != m) {
            return Err(ModelError::Dimension(format!("A row {row} has {} entries, B has {m} rows", a[row].len())));
        }
        let a = RationalMatrix::from_f64_rows(a, m)?;
        QpSystem::new(variables, rationals_from_f64(lambda)?, a, b, initial_state)
    }

    pub fn lambda_f64(&self) -> Vec<f64> {
        rationals_to_f64(&self.lambda)
    }

    pub fn a_f64(&self) -> Vec<Vec<f64>> {
        self.a.to_f64_rows()
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn m(&self) -> usize {
        self.b.rows()
    }

    fn dimension_problem(&self) -> Option<String> {
        let n = self.n();
        let m = self.m();
        if self.lambda.len() != n {
            return Some(format!("lambda has {} entries for {n} variables", self.lambda.len()));
        }
        if self.b.cols() != n {
            return Some(format!("B has {} columns for {n} variables", self.b.cols()));
        }
        if self.a.rows() != n {
            return Some(format!("A has {} rows for {n} variables", self.a.rows()));
        }
        if self.a.cols() != m {
            return Some(format!("A has {} columns, B has {m} rows", self.a.cols()));
        }
        if let Some(x0) = &self.initial_state {
            if x0.len() != n {
                return Some(format!("x0 has {} entries for {n} variables", x0.len()));
            }
        }
        None
    }

    pub fn quasimonomial(&self, j: usize) -> Quasimonomial {
        Quasimonomial::new(self.b.row(j).to_vec())
    }

    /// Reports well-formedness and merges duplicate quasimonomials.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport {
            n: self.n(),
            m: self.m(),
            rank: 0,
            issues: Vec::new(),
            duplicate_rows: Vec::new(),
            zero_rows: Vec::new(),
            normalized: None,
        };
        if let Some(problem) = self.dimension_problem() {
            report.issues.push(problem);
            return report;
        }
        if self.n() == 0 || self.m() == 0 {
            report.issues.push(ModelError::Empty.to_string());
            return report;
        }
        report.rank = self.b.rank();
        let mut first_seen: HashMap<&[Rational], usize> = HashMap::new();
        for j in 0..self.m() {
            let row = self.b.row(j);
            if row.iter().all(Rational::is_zero) {
                report.zero_rows.push(j);
                report.issues.push(ModelError::ZeroRow(j).to_string());
            }
            match first_seen.get(row) {
                Some(&i) => report.duplicate_rows.push((i, j)),
                None => {
                    first_seen.insert(row, j);
                }
            }
        }
        if report.issues.is_empty() {
            let merged = self.merge_duplicates();
            report.rank = merged.b.rank();
            report.m = merged.m();
            report.normalized = Some(merged);
        }
        report
    }

    /// Validates and returns the normalized system, or the first hard error.
    pub fn normalized(&self) -> Result<QpSystem, ModelError> {
        if let Some(problem) = self.dimension_problem() {
            return Err(ModelError::Dimension(problem));
        }
        if self.n() == 0 || self.m() == 0 {
            return Err(ModelError::Empty);
        }
        if let Some(j) = (0..self.m()).find(|&j| self.b.row(j).iter().all(Rational::is_zero)) {
            return Err(ModelError::ZeroRow(j));
        }
        Ok(self.merge_duplicates())
    }

    fn merge_duplicates(&self) -> QpSystem {
        let mut index: HashMap<Vec<Rational>, usize> = HashMap::new();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let mut columns: Vec<Vec<Rational>> = Vec::new();
        for j in 0..self.m() {
            let row = self.b.row(j).to_vec();
            let col = self.a.column(j);
            match index.get(&row) {
                Some(&k) => {
                    for (acc, v) in columns[k].iter_mut().zip(col) {
                        *acc += &v;
                    }
                }
                None => {
                    index.insert(row.clone(), rows.len());
                    rows.push(row);
                    columns.push(col);
                }
            }
        }
        let n = self.n();
        let a = RationalMatrix::from_rows(columns, n).expect("columns have n entries").transpose();
        QpSystem {
            variables: self.variables.clone(),
            lambda: self.lambda.clone(),
            a,
            b: RationalMatrix::from_rows(rows, n).expect("rows share the column count"),
            initial_state: self.initial_state.clone(),
        }
    }

    /// Reorders quasimonomials lexicographically (rows of B with columns of A).
    pub fn canonical(&self) -> QpSystem {
        let order = canonical_order(&self.b);
        self.permuted(&order)
    }

    /// New system whose quasimonomial `j` is this system's `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> QpSystem {
        let rows = order.iter().map(|&j| self.b.row(j).to_vec()).collect();
        QpSystem {
            variables: self.variables.clone(),
            lambda: self.lambda.clone(),
            a: RationalMatrix::from_rows(order.iter().map(|&j| self.a.column(j)).collect(), self.n())
                .expect("columns have n entries")
                .transpose(),
            b: RationalMatrix::from_rows(rows, self.n()).expect("rows share the column count"),
            initial_state: self.initial_state.clone(),
        }
    }

    /// The quasimonomials in canonical (lexicographic) order.
    pub fn qm_extract(&self) -> Vec<Quasimonomial> {
        let mut qms: Vec<Quasimonomial> = (0..self.m()).map(|j| self.quasimonomial(j)).collect();
        qms.sort();
        qms
    }

    /// Applies `x = x̂^C`: returns the system in the `x̂` variables.
    pub fn qm_transform(&self, c: &RationalMatrix) -> Result<QpSystem, ModelError> {
        let n = self.n();
        if c.shape() != (n, n) {
            return Err(ModelError::Dimension(format!(
                "transformation is {}x{}, system has {n} variables",
                c.rows(),
                c.cols()
            )));
        }
        let c_inv = c.inverse().map_err(|_| ModelError::SingularTransform)?;
        let b = self.b.mul(c)?;
        let a = c_inv.mul(&self.a)?;
        let lambda = c_inv.mul_vec(&self.lambda)?;
        let initial_state = match &self.initial_state {
            Some(x0) => {
                let logs = log_state(x0)?;
                let c_inv_f = c_inv.to_f64_rows();
                Some(c_inv_f.iter().map(|row| dot(row, &logs).exp()).collect())
            }
            None => None,
        };
        Ok(QpSystem { variables: self.variables.clone(), lambda, a, b, initial_state })
    }

    /// `A' = B·A`, `λ' = B·λ` with quasimonomials in canonical order.
    pub fn lv_embed(&self) -> Result<LvSystem, ModelError> {
        let sys = self.normalized()?.canonical();
        let a_prime = sys.b.mul(&sys.a)?.to_f64_rows();
        let lambda_prime = rationals_to_f64(&sys.b.mul_vec(&sys.lambda)?);
        let quasimonomials: Vec<Quasimonomial> = (0..sys.m()).map(|j| sys.quasimonomial(j)).collect();
        let z0 = match &sys.initial_state {
            Some(x0) => {
                log_state(x0)?;
                Some(quasimonomials.iter().map(|q| q.eval(x0)).collect())
            }
            None => None,
        };
        Ok(LvSystem { variables: sys.variables, lambda_prime, a_prime, quasimonomials, z0 })
    }

    /// Completes `B` to a square invertible matrix by appending unit-vector
    /// columns, one per dummy variable held at 1.
    pub fn expand_and_map(&self) -> Result<ExpandedMap, ModelError> {
        let n = self.n();
        let m = self.m();
        let rank = self.b.rank();
        if rank != n {
            return Err(ModelError::RankDeficient { rank, expected: n });
        }
        let mut matrix = self.b.clone();
        let mut completion = Vec::new();
        let mut current = rank;
        for j in 0..m {
            if current == m {
                break;
            }
            let mut unit = RationalMatrix::zeros(m, 1);
            unit[(j, 0)] = Rational::one();
            let candidate = matrix.hstack(&unit)?;
            let r = candidate.rank();
            if r > current {
                matrix = candidate;
                completion.push(j);
                current = r;
            }
        }
        if current != m {
            return Err(ModelError::RankDeficient { rank: current, expected: m });
        }
        Ok(ExpandedMap { matrix, genuine: n, completion })
    }

    /// The system over `n + dummies` variables whose exponent matrix is the
    /// square `𝓑`; dummy variables have zero dynamics and start at 1.
    pub fn padded(&self, map: &ExpandedMap) -> Result<QpSystem, ModelError> {
        let n = self.n();
        let m = self.m();
        if map.matrix.rows() != m || map.genuine != n {
            return Err(ModelError::Dimension("expanded map does not belong to this system".into()));
        }
        let mut variables = self.variables.clone();
        let mut lambda = self.lambda.clone();
        let mut rows = self.a.row_vecs();
        for d in 0..map.dummies() {
            variables.push(format!("_dummy{}", d + 1));
            lambda.push(Rational::zero());
            rows.push(vec![Rational::zero(); m]);
        }
        let a = RationalMatrix::from_rows(rows, m)?;
        let initial_state = self.initial_state.as_ref().map(|x0| {
            let mut x = x0.clone();
            x.resize(m, 1.0);
            x
        });
        QpSystem::new(variables, lambda, a, map.matrix.clone(), initial_state)
    }
}

/// The square exponent matrix `𝓑` and the dummy-variable bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedMap {
    pub matrix: RationalMatrix,
    pub genuine: usize,
    /// Unit-vector indices used for the appended columns.
    pub completion: Vec<usize>,
}

impl ExpandedMap {
    pub fn dummies(&self) -> usize {
        self.matrix.cols() - self.genuine
    }
}

/// The Lotka-Volterra normal form produced by [`QpSystem::lv_embed`].
#[derive(Debug, Clone, PartialEq)]
pub struct LvSystem {
    /// Names of the GLV variables the quasimonomials are written over.
    pub variables: Vec<String>,
    pub lambda_prime: Vec<f64>,
    pub a_prime: Vec<Vec<f64>>,
    pub quasimonomials: Vec<Quasimonomial>,
    pub z0: Option<Vec<f64>>,
}

impl LvSystem {
    pub fn m(&self) -> usize {
        self.quasimonomials.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.quasimonomials.iter().map(|q| q.display_with(&self.variables)).collect()
    }

    /// New system whose variable `j` is this system's `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> LvSystem {
        LvSystem {
            variables: self.variables.clone(),
            lambda_prime: order.iter().map(|&j| self.lambda_prime[j]).collect(),
            a_prime: order
                .iter()
                .map(|&i| order.iter().map(|&j| self.a_prime[i][j]).collect())
                .collect(),
            quasimonomials: order.iter().map(|&j| self.quasimonomials[j].clone()).collect(),
            z0: self.z0.as_ref().map(|z| order.iter().map(|&j| z[j]).collect()),
        }
    }

    pub fn check(&self) -> Result<(), ModelError> {
        let m = self.m();
        if m == 0 {
            return Err(ModelError::Empty);
        }
        if self.lambda_prime.len() != m || self.a_prime.len() != m || self.a_prime.iter().any(|r| r.len() != m)
        {
            return Err(ModelError::Dimension(format!("LV system with {m} variables has mismatched matrices")));
        }
        if let Some(z) = &self.z0 {
            if z.len() != m {
                return Err(ModelError::Dimension(format!("z0 has {} entries for {m} variables", z.len())));
            }
        }
        Ok(())
    }
}

/// Indices sorting the rows of `b` lexicographically.
pub fn canonical_order(b: &RationalMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..b.rows()).collect();
    order.sort_by(|&i, &j| b.row(i).cmp(b.row(j)));
    order
}

fn log_state(x: &[f64]) -> Result<Vec<f64>, ModelError> {
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(ModelError::NonPositive { index, value })
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Verdict of [`check_bec`].
#[derive(Debug, Clone, PartialEq)]
pub struct BecVerdict {
    pub equivalent: bool,
    /// `C` with `ln x₂ = C · ln x₁`, so that `qm_transform(sys2, C)` reproduces
    /// `sys1` up to quasimonomial order.
    pub witness: Option<RationalMatrix>,
    /// `pairing[i]` is the quasimonomial of `sys1` matched to quasimonomial `i`
    /// of `sys2` (canonical orders of both).
    pub pairing: Option<Vec<usize>>,
    pub diagnostic: Option<String>,
}

impl BecVerdict {
    fn rejected(msg: impl Into<String>) -> Self {
        BecVerdict { equivalent: false, witness: None, pairing: None, diagnostic: Some(msg.into()) }
    }
}

/// Decides whether two GLV systems lie in one equivalence class, comparing
/// coefficient invariants to `1e-12` relative to the larger of each entry and
/// the largest invariant entry.
pub fn check_bec(sys1: &QpSystem, sys2: &QpSystem) -> Result<BecVerdict, ModelError> {
    check_bec_with_tol(sys1, sys2, 1e-12)
}

pub fn check_bec_with_tol(sys1: &QpSystem, sys2: &QpSystem, rel_tol: f64) -> Result<BecVerdict, ModelError> {
    let s1 = sys1.normalized()?.canonical();
    let s2 = sys2.normalized()?.canonical();
    if s1.n() != s2.n() {
        return Ok(BecVerdict::rejected(format!("variable counts differ: {} vs {}", s1.n(), s2.n())));
    }
    if s1.m() != s2.m() {
        return Ok(BecVerdict::rejected(format!(
            "quasimonomial counts differ: {} vs {}",
            s1.m(),
            s2.m()
        )));
    }
    let lv1 = s1.lv_embed()?;
    let lv2 = s2.lv_embed()?;
    let mut search = PairingSearch::new(&s1, &s2, &lv1, &lv2, rel_tol);
    match search.run() {
        Some((pairing, witness)) => {
            Ok(BecVerdict { equivalent: true, witness, pairing: Some(pairing), diagnostic: None })
        }
        None => Ok(BecVerdict::rejected(
            "no quasimonomial pairing matches both the exponent structure and the invariants B·A, B·λ",
        )),
    }
}

struct PairingSearch<'a> {
    b1: &'a RationalMatrix,
    b2: &'a RationalMatrix,
    lv1: &'a LvSystem,
    lv2: &'a LvSystem,
    rel_tol: f64,
    /// Largest invariant magnitude; differences below `rel_tol · scale` are roundoff.
    scale: f64,
    /// Rows of `b2` visited first; a row basis when `b2` has full column rank.
    order: Vec<usize>,
    basis_len: usize,
    full_rank: bool,
    pairing: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl<'a> PairingSearch<'a> {
    fn new(s1: &'a QpSystem, s2: &'a QpSystem, lv1: &'a LvSystem, lv2: &'a LvSystem, rel_tol: f64) -> Self {
        let m = s2.m();
        let n = s2.n();
        let mut basis: Vec<usize> = Vec::new();
        let mut rank = 0;
        for i in 0..m {
            let mut rows: Vec<Vec<Rational>> = basis.iter().map(|&k| s2.b.row(k).to_vec()).collect();
            rows.push(s2.b.row(i).to_vec());
            let r = RationalMatrix::from_rows(rows, n).expect("consistent rows").rank();
            if r > rank {
                basis.push(i);
                rank = r;
            }
        }
        let full_rank = rank == n;
        let basis_len = basis.len();
        let mut order = basis.clone();
        order.extend((0..m).filter(|i| !basis.contains(i)));
        let scale = [lv1, lv2]
            .iter()
            .flat_map(|lv| lv.lambda_prime.iter().chain(lv.a_prime.iter().flatten()))
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        PairingSearch {
            b1: &s1.b,
            b2: &s2.b,
            lv1,
            lv2,
            rel_tol,
            scale,
            order,
            basis_len,
            full_rank,
            pairing: vec![None; m],
            used: vec![false; m],
        }
    }

    fn run(&mut self) -> Option<(Vec<usize>, Option<RationalMatrix>)> {
        self.assign(0)
    }

    fn close(&self, a: f64, b: f64) -> bool {
        a == b || (a - b).abs() <= self.rel_tol * a.abs().max(b.abs()).max(self.scale)
    }

    fn consistent(&self, i: usize, j: usize) -> bool {
        if !self.close(self.lv2.lambda_prime[i], self.lv1.lambda_prime[j]) {
            return false;
        }
        self.pairing.iter().enumerate().chain(std::iter::once((i, &Some(j)))).all(|(k, pk)| match pk {
            Some(l) => {
                self.close(self.lv2.a_prime[i][k], self.lv1.a_prime[j][*l])
                    && self.close(self.lv2.a_prime[k][i], self.lv1.a_prime[*l][j])
            }
            None => true,
        })
    }

    fn assign(&mut self, depth: usize) -> Option<(Vec<usize>, Option<RationalMatrix>)> {
        let m = self.order.len();
        if self.full_rank && depth == self.basis_len {
            return self.complete_from_basis();
        }
        if depth == m {
            let pairing = self.pairing.iter().map(|p| p.expect("complete")).collect();
            return Some((pairing, None));
        }
        let i = self.order[depth];
        for j in 0..m {
            if self.used[j] || !self.consistent(i, j) {
                continue;
            }
            self.pairing[i] = Some(j);
            self.used[j] = true;
            if let Some(found) = self.assign(depth + 1) {
                return Some(found);
            }
            self.pairing[i] = None;
            self.used[j] = false;
        }
        None
    }

    /// With the basis rows paired, `C` is forced; the rest of the pairing
    /// follows from the exponent rows.
    fn complete_from_basis(&self) -> Option<(Vec<usize>, Option<RationalMatrix>)> {
        let n = self.b2.cols();
        let basis = &self.order[..self.basis_len];
        let rows2: Vec<Vec<Rational>> = basis.iter().map(|&i| self.b2.row(i).to_vec()).collect();
        let rows1: Vec<Vec<Rational>> =
            basis.iter().map(|&i| self.b1.row(self.pairing[i].expect("basis paired")).to_vec()).collect();
        let m2 = RationalMatrix::from_rows(rows2, n).ok()?;
        let m1 = RationalMatrix::from_rows(rows1, n).ok()?;
        let c = m2.inverse().ok()?.mul(&m1).ok()?;
        if c.rank() != n {
            return None;
        }
        let b2c = self.b2.mul(&c).ok()?;
        let lookup: HashMap<&[Rational], usize> = (0..self.b1.rows()).map(|j| (self.b1.row(j), j)).collect();
        let mut pairing = vec![0; self.b2.rows()];
        let mut seen = vec![false; self.b1.rows()];
        for (i, slot) in pairing.iter_mut().enumerate() {
            let j = *lookup.get(b2c.row(i))?;
            if seen[j] {
                return None;
            }
            seen[j] = true;
            *slot = j;
        }
        let m = pairing.len();
        for i in 0..m {
            if !self.close(self.lv2.lambda_prime[i], self.lv1.lambda_prime[pairing[i]]) {
                return None;
            }
            for k in 0..m {
                if !self.close(self.lv2.a_prime[i][k], self.lv1.a_prime[pairing[i]][pairing[k]]) {
                    return None;
                }
            }
        }
        Some((pairing, Some(c)))
    }
}

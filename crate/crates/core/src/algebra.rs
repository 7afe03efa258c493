//! Exact rational scalars and dense rational matrices.
//!
//! Exponents and transformation matrices are kept in [`Rational`] so that
//! class invariants can be compared bit-exactly. Coefficients stay `f64`; the
//! mixed helpers at the bottom of this module ([`exact_dot`], [`exact_scale`])
//! lift every finite `f64` to its exact dyadic value, do the arithmetic
//! exactly and round once.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("entry count {got} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },
    #[error("invalid rational literal {0:?}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} has no exact rational value")]
    NotFinite(String),
}

/// Exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self, AlgebraError> {
        if den == 0 {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num.into(), den.into())))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Exact value of a finite float. Returns `None` for NaN and infinities.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    /// Like [`Rational::from_f64`], with an error for non-finite input.
    pub fn try_from_f64(x: f64) -> Result<Self, AlgebraError> {
        Self::from_f64(x).ok_or_else(|| AlgebraError::NotFinite(x.to_string()))
    }

    /// Nearest float (ties to even).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Whether the value is exactly some `f64`.
    pub fn is_f64(&self) -> bool {
        let x = self.to_f64();
        x.is_finite() && Self::from_f64(x).as_ref() == Some(self)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Integer value, if this rational is an integer that fits in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            Err(AlgebraError::DivisionByZero)
        } else {
            Ok(Rational(self.0.recip()))
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, AlgebraError> {
        Ok(self * &rhs.recip()?)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rational(BigRational::new(n, d)))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Rational(BigRational::from_integer(n)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(n) => Ok(Rational::from_integer(n)),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

/// Panics on a zero divisor, like integer division. Use
/// [`Rational::checked_div`] when the divisor comes from input.
impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        Rational(&self.0 / &rhs.0)
    }
}

impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Lexicographic comparison of exponent vectors.
pub fn lex_cmp(a: &[Rational], b: &[Rational]) -> Ordering {
    a.cmp(b)
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, AlgebraError> {
        if data.len() != rows * cols {
            return Err(AlgebraError::BadShape { rows, cols, got: data.len() });
        }
        Ok(RationalMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` disambiguates the zero-row case.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self, AlgebraError> {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for row in rows {
            if row.len() != cols {
                return Err(AlgebraError::BadShape { rows: nrows, cols, got: row.len() });
            }
            data.extend(row);
        }
        Ok(RationalMatrix { rows: nrows, cols, data })
    }

    /// Convenience constructor from small integer pairs `(num, den)`.
    pub fn from_ratios(rows: &[&[(i64, i64)]]) -> Result<Self, AlgebraError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&(n, d)| Rational::new(n, d)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows, cols)
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self, AlgebraError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&n| Rational::from_integer(n)).collect())
            .collect();
        Self::from_rows(rows, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Result<Self, AlgebraError> {
        if self.cols != rhs.rows {
            return Err(AlgebraError::DimensionMismatch {
                op: "mat_mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, AlgebraError> {
        if self.cols != v.len() {
            return Err(AlgebraError::DimensionMismatch {
                op: "mat_vec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Row echelon form by exact elimination; returns the pivot columns.
    fn echelon(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // largest magnitude pivot only limits coefficient growth
            let Some(p) = (r..self.rows)
                .filter(|&i| !self[(i, c)].is_zero())
                .max_by(|&i, &j| self[(i, c)].abs().cmp(&self[(j, c)].abs()))
            else {
                continue;
            };
            self.swap_rows(r, p);
            let pivot = self[(r, c)].clone();
            for i in (r + 1)..self.rows {
                if self[(i, c)].is_zero() {
                    continue;
                }
                let factor = &self[(i, c)] / &pivot;
                for j in c..self.cols {
                    let delta = &factor * &self[(r, j)];
                    self[(i, j)] -= &delta;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().echelon().len()
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        for c in 0..n {
            let p = (c..n)
                .filter(|&i| !aug[(i, c)].is_zero())
                .max_by(|&i, &j| aug[(i, c)].abs().cmp(&aug[(j, c)].abs()))
                .ok_or(AlgebraError::NotInvertible)?;
            aug.swap_rows(c, p);
            let inv_pivot = aug[(c, c)].recip()?;
            for j in 0..2 * n {
                aug[(c, j)] *= &inv_pivot;
            }
            for i in 0..n {
                if i == c || aug[(i, c)].is_zero() {
                    continue;
                }
                let factor = aug[(i, c)].clone();
                for j in 0..2 * n {
                    let delta = &factor * &aug[(c, j)];
                    aug[(i, j)] -= &delta;
                }
            }
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &RationalMatrix) -> Result<Self, AlgebraError> {
        if self.rows != rhs.rows {
            return Err(AlgebraError::DimensionMismatch {
                op: "hstack",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let rows = (0..self.rows)
            .map(|i| self.row(i).iter().chain(rhs.row(i)).cloned().collect())
            .collect();
        Self::from_rows(rows, self.cols + rhs.cols)
    }

    /// Exact matrix with the given float rows.
    pub fn from_f64_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self, AlgebraError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rational::try_from_f64(x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows, cols)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(Rational::to_f64).collect()).collect()
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.row_vecs()).finish()
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| panic!("non-finite coefficient {x}"))
}

/// Exact values of a float vector.
pub fn rationals_from_f64(xs: &[f64]) -> Result<Vec<Rational>, AlgebraError> {
    xs.iter().map(|&x| Rational::try_from_f64(x)).collect()
}

/// Nearest floats of a rational vector.
pub fn rationals_to_f64(xs: &[Rational]) -> Vec<f64> {
    xs.iter().map(Rational::to_f64).collect()
}

/// `Σ rᵢ·xᵢ` evaluated exactly and rounded once to `f64`.
///
/// Panics if any `xᵢ` is not finite.
pub fn exact_dot(rs: &[Rational], xs: &[f64]) -> f64 {
    assert_eq!(rs.len(), xs.len(), "exact_dot length mismatch");
    let mut acc = BigRational::zero();
    for (r, &x) in rs.iter().zip(xs) {
        if r.is_zero() || x == 0.0 {
            continue;
        }
        acc += &r.0 * exact(x);
    }
    Rational(acc).to_f64()
}

/// `r·x` evaluated exactly and rounded once.
pub fn exact_scale(r: &Rational, x: f64) -> f64 {
    exact_dot(std::slice::from_ref(r), &[x])
}

/// Exact sum of floats, rounded once.
pub fn exact_sum(xs: &[f64]) -> f64 {
    let ones = vec![Rational::one(); xs.len()];
    exact_dot(&ones, xs)
}

/// Product of floats evaluated exactly, rounded once.
pub fn exact_product(xs: &[f64]) -> f64 {
    let mut acc = BigRational::one();
    for &x in xs {
        acc *= exact(x);
    }
    Rational(acc).to_f64()
}

/// `B · A` for a rational `m×n` matrix and an `n×k` float matrix given by rows.
pub fn mul_rational_f64(b: &RationalMatrix, a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, AlgebraError> {
    let k = a.first().map_or(0, Vec::len);
    if b.cols() != a.len() || a.iter().any(|r| r.len() != k) {
        return Err(AlgebraError::DimensionMismatch {
            op: "mat_mul_mixed",
            left: b.shape(),
            right: (a.len(), k),
        });
    }
    let mut out = vec![vec![0.0; k]; b.rows()];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let col: Vec<f64> = a.iter().map(|r| r[j]).collect();
            *entry = exact_dot(b.row(i), &col);
        }
    }
    Ok(out)
}

/// `B · v` for a rational matrix and a float vector.
pub fn mul_rational_vec(b: &RationalMatrix, v: &[f64]) -> Result<Vec<f64>, AlgebraError> {
    if b.cols() != v.len() {
        return Err(AlgebraError::DimensionMismatch {
            op: "mat_vec_mixed",
            left: b.shape(),
            right: (v.len(), 1),
        });
    }
    Ok((0..b.rows()).map(|i| exact_dot(b.row(i), v)).collect())
}

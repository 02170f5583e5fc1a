//! Dense matrices and matrix polynomials over an exact or floating scalar
//! ring, nilpotent exponentials and right-acting differential operators.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{NumAssignRef, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{format_rational, Rational};
use crate::hermite::ScalarPolynomial;

pub trait Scalar:
    Clone + Debug + PartialEq + Send + Sync + NumAssignRef + Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn to_json(&self) -> Value;
    /// Preference for a Gauss–Jordan pivot; zero marks an unusable pivot.
    fn pivot_score(&self) -> f64;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&crate::exact::int(n))
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out *= other;
        out
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn pivot_score(&self) -> f64 {
        // Any nonzero pivot is exact; prefer small denominators to limit growth.
        if self.is_zero() {
            0.0
        } else {
            1.0 / (1.0 + self.denom().bits() as f64 + self.numer().bits() as f64)
        }
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_json(&self) -> Value {
        serde_json::json!(self)
    }
    fn pivot_score(&self) -> f64 {
        self.abs()
    }
}

/// Dense row-major matrix; indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.mul_ref(c))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| {
            let mut s = a.clone();
            s += b;
            s
        }))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| {
            let mut s = a.clone();
            s -= b;
            s
        }))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        *out.get_mut(i, j) += a.mul_ref(b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.rows), |acc, _| &acc * self)
    }

    /// [self, other] = self·other − other·self
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
        }
        self.solve(&Self::identity(self.rows))
    }

    /// Solves self·X = rhs by Gauss–Jordan elimination.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::DimensionMismatch("solve".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let pivot = (col..n)
                .map(|r| (r, a.get(r, col).pivot_score()))
                .filter(|(_, s)| *s > 0.0)
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(r, _)| r)
                .ok_or(Error::SingularMatrix)?;
            a.swap_rows(col, pivot);
            b.swap_rows(col, pivot);
            let inv = T::one() / a.get(col, col).clone();
            a.scale_row(col, &inv);
            b.scale_row(col, &inv);
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                a.sub_row_multiple(r, col, &f);
                b.sub_row_multiple(r, col, &f);
            }
        }
        Ok(b)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for c in 0..self.cols {
                self.data.swap(i * self.cols + c, j * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, i: usize, f: &T) {
        for c in 0..self.cols {
            *self.get_mut(i, c) *= f;
        }
    }

    fn sub_row_multiple(&mut self, target: usize, source: usize, f: &T) {
        for c in 0..self.cols {
            let v = self.get(source, c).mul_ref(f);
            *self.get_mut(target, c) -= v;
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect()))
                .collect(),
        )
    }
}

impl Matrix<Rational> {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| crate::exact::int(v)).collect())
                .collect(),
        )
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        self.checked_add(rhs).expect("matrix add")
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        self.checked_sub(rhs).expect("matrix sub")
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.checked_mul(rhs).expect("matrix mul")
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|a| -a.clone())
    }
}

/// Σ_k coeffs[k]·x^k with square N×N coefficients. Trailing zero
/// coefficients are trimmed, so the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial<T> {
    dim: usize,
    coeffs: Vec<Matrix<T>>,
}

pub type RatMatPoly = MatrixPolynomial<Rational>;

impl<T: Scalar> MatrixPolynomial<T> {
    pub fn new(dim: usize, mut coeffs: Vec<Matrix<T>>) -> Self {
        assert!(
            coeffs.iter().all(|c| c.rows == dim && c.cols == dim),
            "coefficient shape differs from {dim}x{dim}"
        );
        while coeffs.last().is_some_and(Matrix::is_zero) {
            coeffs.pop();
        }
        Self { dim, coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(Matrix::identity(dim))
    }

    pub fn constant(m: Matrix<T>) -> Self {
        let dim = m.rows;
        Self::new(dim, vec![m])
    }

    /// m·x^k
    pub fn monomial(m: Matrix<T>, k: usize) -> Self {
        let dim = m.rows;
        let mut coeffs = vec![Matrix::zeros(dim, dim); k];
        coeffs.push(m);
        Self::new(dim, coeffs)
    }

    /// x·I
    pub fn x(dim: usize) -> Self {
        Self::monomial(Matrix::identity(dim), 1)
    }

    /// Builds the polynomial whose (i, j) entry has coefficient list `f(i, j)`.
    pub fn from_entries(dim: usize, mut f: impl FnMut(usize, usize) -> Vec<T>) -> Self {
        let mut coeffs: Vec<Matrix<T>> = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for (k, c) in f(i, j).into_iter().enumerate() {
                    while coeffs.len() <= k {
                        coeffs.push(Matrix::zeros(dim, dim));
                    }
                    coeffs[k].set(i, j, c);
                }
            }
        }
        Self::new(dim, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Matrix<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Matrix<T> {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dim, self.dim))
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&Matrix<T>> {
        self.coeffs.last()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic_of_degree(&self, n: usize) -> bool {
        self.degree() == Some(n) && self.coeffs[n] == Matrix::identity(self.dim)
    }

    /// Coefficient list of entry (i, j).
    pub fn entry(&self, i: usize, j: usize) -> Vec<T> {
        let mut v: Vec<T> = self.coeffs.iter().map(|c| c.get(i, j).clone()).collect();
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
        v
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix polynomials of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(Self::new(
            self.dim,
            (0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect(),
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(Self::new(
            self.dim,
            (0..n).map(|k| &self.coeff(k) - &other.coeff(k)).collect(),
        ))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.dim));
        }
        let mut out = vec![Matrix::zeros(self.dim, self.dim); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Ok(Self::new(self.dim, out))
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.dim, self.coeffs.iter().map(|m| m.scale(c)).collect())
    }

    /// m·self
    pub fn left_mul(&self, m: &Matrix<T>) -> Self {
        Self::new(self.dim, self.coeffs.iter().map(|c| m * c).collect())
    }

    /// self·m
    pub fn right_mul(&self, m: &Matrix<T>) -> Self {
        Self::new(self.dim, self.coeffs.iter().map(|c| c * m).collect())
    }

    /// x·self
    pub fn mul_x(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![Matrix::zeros(self.dim, self.dim)];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(self.dim, coeffs)
    }

    /// Multiplies by a scalar polynomial given by its coefficient list.
    pub fn mul_scalar_poly(&self, p: &[T]) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut coeffs = vec![Matrix::zeros(self.dim, self.dim); k];
            coeffs.extend(self.coeffs.iter().map(|m| m.scale(c)));
            out = &out + &Self::new(self.dim, coeffs);
        }
        out
    }

    /// Entrywise transpose; powers of x are kept.
    pub fn transpose(&self) -> Self {
        Self::new(self.dim, self.coeffs.iter().map(Matrix::transpose).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.dim,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, m)| m.scale(&T::from_i64(k as i64)))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn evaluate(&self, x: &T) -> Matrix<T> {
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(x) + c;
        }
        acc
    }

    /// p(x + a), by Horner's scheme in the shifted variable.
    pub fn shift(&self, a: &T) -> Self {
        let mut acc = Self::zero(self.dim);
        let lin = vec![a.clone(), T::one()];
        for c in self.coeffs.iter().rev() {
            acc = &acc.mul_scalar_poly(&lin) + &Self::constant(c.clone());
        }
        acc
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U + Copy) -> MatrixPolynomial<U> {
        MatrixPolynomial::new(self.dim, self.coeffs.iter().map(|c| c.map(f)).collect())
    }

    pub fn to_f64(&self) -> MatrixPolynomial<f64> {
        self.map(Scalar::to_f64)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(Matrix::max_abs).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "dim": self.dim,
            "coeffs": self.coeffs.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }
}

impl RatMatPoly {
    /// Builds the polynomial from exact scalar-polynomial entries.
    pub fn from_scalar_entries(dim: usize, f: impl Fn(usize, usize) -> ScalarPolynomial) -> Self {
        Self::from_entries(dim, |i, j| f(i, j).coeffs().to_vec())
    }

    pub fn scalar_entry(&self, i: usize, j: usize) -> ScalarPolynomial {
        ScalarPolynomial::new(self.entry(i, j))
    }
}

impl<T: Scalar> Add for &MatrixPolynomial<T> {
    type Output = MatrixPolynomial<T>;
    fn add(self, rhs: Self) -> MatrixPolynomial<T> {
        self.checked_add(rhs).expect("matrix polynomial add")
    }
}

impl<T: Scalar> Sub for &MatrixPolynomial<T> {
    type Output = MatrixPolynomial<T>;
    fn sub(self, rhs: Self) -> MatrixPolynomial<T> {
        self.checked_sub(rhs).expect("matrix polynomial sub")
    }
}

impl<T: Scalar> Mul for &MatrixPolynomial<T> {
    type Output = MatrixPolynomial<T>;
    fn mul(self, rhs: Self) -> MatrixPolynomial<T> {
        self.checked_mul(rhs).expect("matrix polynomial mul")
    }
}

impl<T: Scalar> Neg for &MatrixPolynomial<T> {
    type Output = MatrixPolynomial<T>;
    fn neg(self) -> MatrixPolynomial<T> {
        self.scale(&-T::one())
    }
}

/// exp(sM) = Σ_{k<N} s^k M^k / k! as a polynomial in s.
pub fn nilpotent_exp<T: Scalar>(m: &Matrix<T>) -> Result<MatrixPolynomial<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("nilpotent_exp of non-square matrix".into()));
    }
    let n = m.rows();
    if !m.pow(n).is_zero() {
        return Err(Error::NotNilpotent(n));
    }
    let mut coeffs = Vec::with_capacity(n);
    let mut term = Matrix::identity(n);
    for k in 0..n {
        if k > 0 {
            term = (&term * m).scale(&(T::one() / T::from_i64(k as i64)));
        }
        coeffs.push(term.clone());
    }
    Ok(MatrixPolynomial::new(n, coeffs))
}

/// exp(sM) evaluated at a scalar s.
pub fn nilpotent_exp_at<T: Scalar>(m: &Matrix<T>, s: &T) -> Result<Matrix<T>> {
    Ok(nilpotent_exp(m)?.evaluate(s))
}

/// Second-order differential operator acting from the right:
/// Q ↦ Q″F₂ + Q′F₁ + QF₀.
#[derive(Clone, Debug, PartialEq)]
pub struct RightDiffOp<T> {
    pub f2: MatrixPolynomial<T>,
    pub f1: MatrixPolynomial<T>,
    pub f0: MatrixPolynomial<T>,
}

impl<T: Scalar> RightDiffOp<T> {
    pub fn new(
        f2: MatrixPolynomial<T>,
        f1: MatrixPolynomial<T>,
        f0: MatrixPolynomial<T>,
    ) -> Result<Self> {
        if f2.dim() != f1.dim() || f1.dim() != f0.dim() {
            return Err(Error::DimensionMismatch("operator coefficients".into()));
        }
        Ok(Self { f2, f1, f0 })
    }

    pub fn dim(&self) -> usize {
        self.f0.dim()
    }

    pub fn apply(&self, q: &MatrixPolynomial<T>) -> Result<MatrixPolynomial<T>> {
        apply_right_diffop(q, self)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.f2.checked_sub(&other.f2)?,
            self.f1.checked_sub(&other.f1)?,
            self.f0.checked_sub(&other.f0)?,
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            f2: self.f2.scale(c),
            f1: self.f1.scale(c),
            f0: self.f0.scale(c),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "F2": self.f2.to_json(),
            "F1": self.f1.to_json(),
            "F0": self.f0.to_json(),
        })
    }
}

pub fn apply_right_diffop<T: Scalar>(
    q: &MatrixPolynomial<T>,
    op: &RightDiffOp<T>,
) -> Result<MatrixPolynomial<T>> {
    let d1 = q.derivative();
    let d2 = d1.derivative();
    d2.checked_mul(&op.f2)?
        .checked_add(&d1.checked_mul(&op.f1)?)?
        .checked_add(&q.checked_mul(&op.f0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use proptest::prelude::*;

    fn a2() -> Matrix<Rational> {
        Matrix::from_i64_rows(&[&[0, 0], &[2, 0]])
    }

    #[test]
    fn basic_arithmetic() {
        let i = RatMatPoly::identity(3);
        assert!(i.derivative().is_zero());
        let x = RatMatPoly::x(3);
        assert_eq!(&x * &x, RatMatPoly::monomial(Matrix::identity(3), 2));
        assert_eq!(x.degree(), Some(1));
        assert_eq!(RatMatPoly::zero(2).degree(), None);
        assert!(x.checked_add(&RatMatPoly::x(2)).is_err());
    }

    #[test]
    fn nilpotent_exp_examples() {
        let z = Matrix::<Rational>::zeros(3, 3);
        assert_eq!(nilpotent_exp(&z).unwrap(), RatMatPoly::identity(3));
        let e = nilpotent_exp(&a2()).unwrap();
        assert_eq!(
            e,
            RatMatPoly::new(2, vec![Matrix::identity(2), a2()])
        );
        let full = Matrix::from_i64_rows(&[&[1, 0], &[0, 0]]);
        assert_eq!(nilpotent_exp(&full), Err(Error::NotNilpotent(2)));
    }

    #[test]
    fn inverse_and_solve() {
        let m = Matrix::from_i64_rows(&[&[0, 2, 1], &[1, 1, 0], &[3, 0, 5]]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(3));
        let singular = Matrix::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(singular.inverse(), Err(Error::SingularMatrix));
        let mf = m.to_f64();
        let invf = mf.inverse().unwrap();
        assert!((&(&mf * &invf) - &Matrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = RatMatPoly::new(
            2,
            vec![
                Matrix::from_i64_rows(&[&[1, 2], &[3, 4]]),
                Matrix::from_i64_rows(&[&[0, 1], &[1, 0]]),
                Matrix::from_i64_rows(&[&[5, 0], &[0, -1]]),
            ],
        );
        let a = rat(-3, 2);
        let shifted = p.shift(&a);
        for x in [int(0), int(1), rat(7, 5)] {
            assert_eq!(shifted.evaluate(&x), p.evaluate(&(&x + &a)));
        }
    }

    #[test]
    fn diffop_on_identity_and_x() {
        let n = 2;
        let j = Matrix::diagonal(&[int(1), int(2)]);
        let f1 = &RatMatPoly::x(n).scale(&int(-2)) + &RatMatPoly::constant(a2().scale(&int(2)));
        let op = RightDiffOp::new(
            RatMatPoly::identity(n),
            f1.clone(),
            RatMatPoly::constant(j.scale(&int(-2))),
        )
        .unwrap();
        assert_eq!(
            op.apply(&RatMatPoly::identity(n)).unwrap(),
            RatMatPoly::constant(j.scale(&int(-2)))
        );
        let expected = &f1 - &RatMatPoly::monomial(j.scale(&int(2)), 1);
        assert_eq!(op.apply(&RatMatPoly::x(n)).unwrap(), expected);
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
        proptest::collection::vec((-4i64..5, 1i64..4), n * n)
            .prop_map(move |v| Matrix::from_fn(n, n, |i, j| rat(v[i * n + j].0, v[i * n + j].1)))
    }

    fn small_poly(n: usize) -> impl Strategy<Value = RatMatPoly> {
        proptest::collection::vec(small_matrix(n), 0..4).prop_map(move |c| RatMatPoly::new(n, c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn leibniz_rule(p in small_poly(3), q in small_poly(3)) {
            let lhs = (&p * &q).derivative();
            let rhs = &(&p.derivative() * &q) + &(&p * &q.derivative());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn degree_adds_for_invertible_leading(p in small_poly(2), q in small_poly(2)) {
            if let (Some(dp), Some(dq)) = (p.degree(), q.degree()) {
                let lead = p.leading_coeff().unwrap() * q.leading_coeff().unwrap();
                if lead.inverse().is_ok() {
                    prop_assert_eq!((&p * &q).degree(), Some(dp + dq));
                }
            }
        }

        #[test]
        fn exp_is_additive(n in 1usize..6, s in -5i64..6, t in -5i64..6, q in 1i64..4) {
            let m = Matrix::from_fn(n, n, |i, j| if i > j { rat((i * 3 + j) as i64 - 2, 3) } else { int(0) });
            let (s, t) = (rat(s, q), rat(t, q));
            let lhs = &nilpotent_exp_at(&m, &s).unwrap() * &nilpotent_exp_at(&m, &t).unwrap();
            prop_assert_eq!(lhs, nilpotent_exp_at(&m, &(&s + &t)).unwrap());
        }
    }
}

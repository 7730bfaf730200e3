//! Small dense matrices over any [`Real`] scalar, plus `f64` solves backed by
//! nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::ad::Real;
use crate::error::{Error, Result};

/// Row-major square matrix over a generic scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Real> Mat<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                for c in 0..n {
                    out.data[r * n + c] += a * o.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: S) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Frobenius inner product `Σ a_rc b_rc`.
    pub fn frobenius(&self, o: &Self) -> S {
        self.data
            .iter()
            .zip(&o.data)
            .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn trace(&self) -> S {
        (0..self.n).fold(S::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Max-abs entry of the primal values.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.value().abs()))
    }

    /// Maximum absolute column sum of the primal values.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|c| (0..self.n).map(|r| self[(r, c)].value().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn map<T: Real>(&self, f: impl Fn(S) -> T) -> Mat<T> {
        Mat {
            n: self.n,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }

    pub fn values(&self) -> Mat<f64> {
        self.map(|a| a.value())
    }
}

impl Mat<f64> {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.n + c]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.n + c]
    }
}

/// 1-norm condition number `‖a‖₁‖a⁻¹‖₁`; infinite when `a` is singular.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    match a.clone().lu().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `a x = b`, rejecting matrices whose condition exceeds `max_condition`.
pub fn solve(
    a: &DMatrix<f64>,
    b: &[f64],
    what: &'static str,
    max_condition: f64,
) -> Result<Vec<f64>> {
    let lu = a.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        what,
        condition: f64::INFINITY,
    })?;
    let condition = norm1(a) * norm1(&inv);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::Singular { what, condition });
    }
    let x = a
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .ok_or(Error::Singular { what, condition })?;
    Ok(x.iter().cloned().collect())
}

/// Inverse with the same conditioning guard as [`solve`].
pub fn inverse(a: &DMatrix<f64>, what: &'static str, max_condition: f64) -> Result<DMatrix<f64>> {
    let inv = a.clone().lu().try_inverse().ok_or(Error::Singular {
        what,
        condition: f64::INFINITY,
    })?;
    let condition = norm1(a) * norm1(&inv);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::Singular { what, condition });
    }
    Ok(inv)
}

/// Gaussian elimination with partial pivoting over a generic scalar.
/// Pivot selection uses primal values, so derivatives propagate through the
/// solution.
pub fn solve_generic<S: Real>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = b.len();
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i][col]
                .value()
                .abs()
                .partial_cmp(&m[j][col].value().abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][col].value().abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= factor * v;
            }
            let v = rhs[col];
            rhs[r] -= factor * v;
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

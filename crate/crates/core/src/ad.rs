//! Forward-mode automatic differentiation.
//!
//! Model functions (Lagrangians, moment maps, gauge potentials, gauge maps)
//! are written once against the [`Real`] trait and evaluated either on plain
//! `f64` or on [`Dual`] numbers. Nesting `Dual<Dual<f64>>` gives mixed second
//! derivatives, which the Lagrangian equations of motion need for the mass
//! matrix.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Scalar field usable by every model function in the crate.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Embeds a constant.
    fn cst(x: f64) -> Self;
    /// The primal (non-infinitesimal) value.
    fn value(self) -> f64;

    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
}

impl Real for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// A dual number `re + du·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Self { re, du }
    }

    /// A variable seeded with unit tangent.
    pub fn var(re: T) -> Self {
        Self { re, du: T::one() }
    }

    pub fn constant(re: T) -> Self {
        Self { re, du: T::zero() }
    }

    fn chain(self, f: T, df: T) -> Self {
        Self { re: f, du: self.du * df }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.du + self.du * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let re = self.re * inv;
        Self::new(re, (self.du - re * o.du) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<T: Real> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(x: f64) -> Self {
        Self::constant(T::cst(x))
    }
    fn value(self) -> f64 {
        self.re.value()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, (s + s).recip())
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.re * self.re + x.re * x.re;
        Self::new(
            self.re.atan2(x.re),
            (x.re * self.du - self.re * x.du) / r2,
        )
    }
    fn scale(self, c: f64) -> Self {
        Self::new(self.re.scale(c), self.du.scale(c))
    }
}

pub type D1 = Dual<f64>;
pub type D2 = Dual<Dual<f64>>;

/// Lifts `x` into first-order duals with tangent `dir`.
pub fn seed(x: &[f64], dir: &[f64]) -> Vec<D1> {
    x.iter().zip(dir).map(|(&a, &b)| Dual::new(a, b)).collect()
}

/// Lifts `x` into constant first-order duals.
pub fn lift<T: Real>(x: &[T]) -> Vec<Dual<T>> {
    x.iter().map(|&a| Dual::constant(a)).collect()
}

/// Lifts `x` into second-order duals with inner tangent `inner` and outer
/// tangent `outer`. The `du.du` component of a result is the mixed second
/// directional derivative.
pub fn seed2(x: &[f64], inner: &[f64], outer: &[f64]) -> Vec<D2> {
    x.iter()
        .zip(inner)
        .zip(outer)
        .map(|((&a, &i), &o)| Dual::new(Dual::new(a, i), Dual::new(o, 0.0)))
        .collect()
}

/// Unit basis vector.
pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Gradient of a scalar function by `n` forward passes.
pub fn gradient(x: &[f64], f: impl Fn(&[D1]) -> D1) -> Vec<f64> {
    (0..x.len())
        .map(|i| f(&seed(x, &unit(x.len(), i))).du)
        .collect()
}

/// Jacobian-vector product of a vector function.
pub fn jvp(x: &[f64], dir: &[f64], f: impl Fn(&[D1]) -> Vec<D1>) -> Vec<f64> {
    f(&seed(x, dir)).into_iter().map(|d| d.du).collect()
}

/// Jacobian `J[r][c] = ∂f_r/∂x_c`.
pub fn jacobian(x: &[f64], f: impl Fn(&[D1]) -> Vec<D1>) -> Vec<Vec<f64>> {
    let cols: Vec<Vec<f64>> = (0..x.len())
        .map(|c| jvp(x, &unit(x.len(), c), &f))
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    (0..rows)
        .map(|r| cols.iter().map(|col| col[r]).collect())
        .collect()
}

/// Hessian of a scalar function via nested duals.
pub fn hessian(x: &[f64], f: impl Fn(&[D2]) -> D2) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = f(&seed2(x, &unit(n, i), &unit(n, j))).du.du;
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}

/// Central-difference derivative used as an independent oracle in tests and
/// for black-box evaluators that cannot be traced.
pub fn central_difference(x: &[f64], dir: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let h = 1e-5 * scale;
    let plus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + h * d).collect();
    let minus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - h * d).collect();
    (f(&plus) - f(&minus)) / (2.0 * h)
}

//! Lagrangians, Hamiltonians and the Legendre transformation between them.

use nalgebra::DMatrix;

use crate::ad::{self, Dual, Real, D2};
use crate::error::{Error, Result};
use crate::linalg;

/// Residual target for the Newton solves.
pub const LEGENDRE_TOL: f64 = 1e-12;
pub const LEGENDRE_MAX_ITER: usize = 50;
pub const LEGENDRE_MAX_CONDITION: f64 = 1e12;

/// `L(q, q̇, z)`.
pub trait Lagrangian {
    fn eval<S: Real>(&self, q: &[S], v: &[S], z: &[S]) -> S;
}

/// `H(q, p, z)`.
pub trait Hamiltonian {
    fn eval<S: Real>(&self, q: &[S], p: &[S], z: &[S]) -> S;

    /// `∇H` in the packed order `(q, p, z)`.
    fn gradient(&self, q: &[f64], p: &[f64], z: &[f64]) -> Vec<f64> {
        let x = [q, p, z].concat();
        let (n, m) = (q.len(), z.len());
        ad::gradient(&x, |d| self.eval(&d[..n], &d[n..2 * n], &d[2 * n..2 * n + m]))
    }

    /// `∂²H/∂p∂p`.
    fn momentum_hessian(&self, q: &[f64], p: &[f64], z: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (qd, zd) = (lift2(q), lift2(z));
        Ok(symmetric_second(p.len(), |i, j| {
            self.eval(&qd, &ad::seed2(p, &ad::unit(p.len(), i), &ad::unit(p.len(), j)), &zd)
                .du
                .du
        }))
    }
}

fn symmetric_second(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let x = f(i, j);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    m
}

/// Position-dependent terms `U(q)` of a Lagrangian `½m|q̇|² + U(q)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialTerm {
    None,
    /// `U = 1/r − (μ²/2k)/r²`.
    Kepler { mu: f64, k: usize },
    /// `U = −½ω²|q|²`.
    Oscillator { omega: f64 },
}

impl PotentialTerm {
    pub fn eval<S: Real>(&self, q: &[S]) -> S {
        let r2 = || q.iter().fold(S::zero(), |acc, &x| acc + x * x);
        match self {
            PotentialTerm::None => S::zero(),
            PotentialTerm::Kepler { mu, k } => {
                let r2 = r2();
                r2.sqrt().recip() - r2.recip().scale(mu * mu / (2.0 * *k as f64))
            }
            PotentialTerm::Oscillator { omega } => -r2().scale(0.5 * omega * omega),
        }
    }
}

/// `L = ½m|q̇|² + U(q)`, independent of `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanical {
    pub mass: f64,
    pub potential: PotentialTerm,
}

impl Mechanical {
    pub fn free() -> Self {
        Self {
            mass: 1.0,
            potential: PotentialTerm::None,
        }
    }

    pub fn kepler(mu: f64, k: usize) -> Self {
        Self {
            mass: 1.0,
            potential: PotentialTerm::Kepler { mu, k },
        }
    }

    pub fn oscillator(omega: f64) -> Self {
        Self {
            mass: 1.0,
            potential: PotentialTerm::Oscillator { omega },
        }
    }

    /// The exact Legendre dual `H = |p|²/2m − U(q)`.
    pub fn hamiltonian(&self) -> MechanicalHamiltonian {
        MechanicalHamiltonian(self.clone())
    }
}

fn half_square<S: Real>(v: &[S], c: f64) -> S {
    v.iter().fold(S::zero(), |acc, &x| acc + x * x).scale(0.5 * c)
}

impl Lagrangian for Mechanical {
    fn eval<S: Real>(&self, q: &[S], v: &[S], _z: &[S]) -> S {
        half_square(v, self.mass) + self.potential.eval(q)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MechanicalHamiltonian(pub Mechanical);

impl Hamiltonian for MechanicalHamiltonian {
    fn eval<S: Real>(&self, q: &[S], p: &[S], _z: &[S]) -> S {
        half_square(p, 1.0 / self.0.mass) - self.0.potential.eval(q)
    }
}

/// `H(q, p, z) = p·q̇* − L(q, q̇*, z)` with `∂L/∂q̇(q̇*) = p` solved by Newton.
/// `q̇*` is held fixed when `H` is traced, so first derivatives follow the
/// envelope theorem: `∂H/∂p = q̇*`, `∂H/∂(q, z) = −∂L/∂(q, z)`.
#[derive(Clone, Debug)]
pub struct LegendreHamiltonian<L>(pub L);

impl<L: Lagrangian> Hamiltonian for LegendreHamiltonian<L> {
    fn eval<S: Real>(&self, q: &[S], p: &[S], z: &[S]) -> S {
        let values = |x: &[S]| x.iter().map(|a| a.value()).collect::<Vec<f64>>();
        let vstar = match legendre(&self.0, &values(q), &values(p), &values(z), None) {
            Ok((_, v)) => v,
            Err(_) => return S::cst(f64::NAN),
        };
        let vs: Vec<S> = vstar.iter().map(|&x| S::cst(x)).collect();
        let pv = p.iter().zip(&vs).fold(S::zero(), |acc, (&a, &b)| acc + a * b);
        pv - self.0.eval(q, &vs, z)
    }

    /// Nested duals cannot see through the frozen `q̇*`; use `M(q̇*)⁻¹`.
    fn momentum_hessian(&self, q: &[f64], p: &[f64], z: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (_, v) = legendre(&self.0, q, p, z, None)?;
        let m = mass_matrix(&self.0, q, &v, z);
        let n = m.len();
        let inv = linalg::inverse(
            &DMatrix::from_fn(n, n, |r, c| m[r][c]),
            "Legendre Hessian",
            LEGENDRE_MAX_CONDITION,
        )?;
        Ok((0..n).map(|r| (0..n).map(|c| inv[(r, c)]).collect()).collect())
    }
}

/// `∂L/∂q̇` at `(q, v, z)`.
pub fn momentum<L: Lagrangian>(l: &L, q: &[f64], v: &[f64], z: &[f64]) -> Vec<f64> {
    let (qd, zd) = (ad::lift(q), ad::lift(z));
    (0..v.len())
        .map(|i| l.eval(&qd, &ad::seed(v, &ad::unit(v.len(), i)), &zd).du)
        .collect()
}

/// `∂²L/∂q̇∂q̇`.
pub fn mass_matrix<L: Lagrangian>(l: &L, q: &[f64], v: &[f64], z: &[f64]) -> Vec<Vec<f64>> {
    let (qd, zd) = (lift2(q), lift2(z));
    symmetric_second(v.len(), |i, j| {
        l.eval(&qd, &ad::seed2(v, &ad::unit(v.len(), i), &ad::unit(v.len(), j)), &zd)
            .du
            .du
    })
}

pub(crate) fn lift2(x: &[f64]) -> Vec<D2> {
    x.iter()
        .map(|&a| Dual::constant(Dual::constant(a)))
        .collect()
}

/// Newton iteration for `g(x) = target` with Jacobian `jac`.
fn newton(
    what: &'static str,
    mut x: Vec<f64>,
    target: &[f64],
    g: impl Fn(&[f64]) -> Vec<f64>,
    jac: impl Fn(&[f64]) -> Result<Vec<Vec<f64>>>,
) -> Result<Vec<f64>> {
    let n = x.len();
    let scale = target.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut residual = f64::INFINITY;
    for _ in 0..=LEGENDRE_MAX_ITER {
        let r: Vec<f64> = g(&x).iter().zip(target).map(|(a, b)| a - b).collect();
        residual = r.iter().fold(0.0, |m, v| m.max(v.abs()));
        if !residual.is_finite() {
            return Err(Error::NonFinite(what));
        }
        if residual <= LEGENDRE_TOL * scale {
            return Ok(x);
        }
        let m = jac(&x)?;
        let dm = DMatrix::from_fn(n, n, |r, c| m[r][c]);
        let step = linalg::solve(&dm, &r, "Legendre Hessian", LEGENDRE_MAX_CONDITION)?;
        for (xi, s) in x.iter_mut().zip(step) {
            *xi -= s;
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: LEGENDRE_MAX_ITER,
        residual,
    })
}

/// Solves `∂L/∂q̇ = p` by Newton from `guess` (default `q̇ = p`) and returns
/// `(H, q̇*)` with `H = p·q̇* − L`.
pub fn legendre<L: Lagrangian>(
    l: &L,
    q: &[f64],
    p: &[f64],
    z: &[f64],
    guess: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    let v0 = guess.map_or_else(|| p.to_vec(), <[f64]>::to_vec);
    let v = newton(
        "Legendre transform",
        v0,
        p,
        |v| momentum(l, q, v, z),
        |v| Ok(mass_matrix(l, q, v, z)),
    )?;
    Ok((linalg::dot(p, &v) - l.eval(q, &v, z), v))
}

/// Solves `∂H/∂p = q̇` by Newton from `guess` (default `p = q̇`) and returns
/// `(L, p*)` with `L = p*·q̇ − H`.
pub fn inverse_legendre<H: Hamiltonian>(
    h: &H,
    q: &[f64],
    v: &[f64],
    z: &[f64],
    guess: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    let n = v.len();
    let p0 = guess.map_or_else(|| v.to_vec(), <[f64]>::to_vec);
    let p = newton(
        "inverse Legendre transform",
        p0,
        v,
        |p| h.gradient(q, p, z)[n..2 * n].to_vec(),
        |p| h.momentum_hessian(q, p, z),
    )?;
    Ok((linalg::dot(&p, v) - h.eval(q, &p, z), p))
}

/// Energy function `q̇·∂L/∂q̇ − L` on a Lagrangian state.
pub fn energy<L: Lagrangian>(l: &L, q: &[f64], v: &[f64], z: &[f64]) -> f64 {
    linalg::dot(v, &momentum(l, q, v, z)) - l.eval(q, v, z)
}

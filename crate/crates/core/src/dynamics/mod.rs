//! Equations of motion on the Sternberg phase space and their Lagrangian
//! counterpart.
//!
//! Hamiltonian states are packed as `(q, p, z)` and Lagrangian states as
//! `(q, v, z)` with `v = q̇`.

mod diagnostics;
mod integrate;
mod models;

pub use diagnostics::{diagnose, DiagnosticsReport, Quantity, QuantityRecord};
pub use integrate::{integrate, Method, Trajectory, DEFAULT_RKF45_TOL};
pub use models::{
    energy, inverse_legendre, legendre, mass_matrix, momentum, Hamiltonian, Lagrangian,
    LegendreHamiltonian, Mechanical, MechanicalHamiltonian, PotentialTerm, LEGENDRE_MAX_CONDITION,
    LEGENDRE_MAX_ITER, LEGENDRE_TOL,
};

use nalgebra::DMatrix;

use crate::ad::{self, Dual, Real};
use crate::error::{check_dim, Error, Result};
use crate::gauge::{self, GaugeMap, GaugePotential, GaugeTransformed};
use crate::internal::InternalSpace;
use crate::linalg;

/// Condition limit for the mass matrix `∂²L/∂q̇²`.
pub const MASS_MAX_CONDITION: f64 = 1e10;
/// Condition limit for the Sternberg matrix.
pub const STERNBERG_MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianState {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub z: Vec<f64>,
}

impl LagrangianState {
    pub fn new(q: Vec<f64>, v: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        check_dim(q.len(), v.len())?;
        if q.iter().chain(&v).chain(&z).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Lagrangian state"));
        }
        Ok(Self { q, v, z })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [&self.q[..], &self.v[..], &self.z[..]].concat()
    }

    pub fn from_slice(x: &[f64], n: usize) -> Self {
        Self {
            q: x[..n].to_vec(),
            v: x[n..2 * n].to_vec(),
            z: x[2 * n..].to_vec(),
        }
    }
}

impl HamiltonianState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        check_dim(q.len(), p.len())?;
        if q.iter().chain(&p).chain(&z).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Hamiltonian state"));
        }
        Ok(Self { q, p, z })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [&self.q[..], &self.p[..], &self.z[..]].concat()
    }

    pub fn from_slice(x: &[f64], n: usize) -> Self {
        Self {
            q: x[..n].to_vec(),
            p: x[n..2 * n].to_vec(),
            z: x[2 * n..].to_vec(),
        }
    }
}

/// A charged particle: internal space, gauge chart and Lagrangian.
#[derive(Clone, Debug)]
pub struct System<I, A, L> {
    pub space: I,
    pub chart: A,
    pub lagrangian: L,
}

/// `∂_αΦ_a` indexed `[α][a]`, over any scalar.
fn moment_jacobian_generic<S: Real, I: InternalSpace>(space: &I, z: &[S]) -> Vec<Vec<S>> {
    (0..z.len())
        .map(|al| {
            let dz = dual_seed(z, al);
            space.moment(&dz).into_iter().map(|x| x.du).collect()
        })
        .collect()
}

/// `∂_jA_i^a` indexed `[j][i][a]`, over any scalar.
fn potential_jacobian_generic<S: Real, A: GaugePotential>(chart: &A, q: &[S]) -> Vec<Vec<Vec<S>>> {
    (0..q.len())
        .map(|j| {
            let dq = dual_seed(q, j);
            chart
                .potential(&dq)
                .into_iter()
                .map(|ai| ai.into_iter().map(|x| x.du).collect())
                .collect()
        })
        .collect()
}

fn dual_seed<S: Real>(x: &[S], k: usize) -> Vec<Dual<S>> {
    x.iter()
        .enumerate()
        .map(|(i, &a)| Dual::new(a, if i == k { S::one() } else { S::zero() }))
        .collect()
}

fn pair<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Coefficients `W` of `ω_Θ(u, w) = uᵀ W w` in the order `(q, p, z)`:
///
/// `dp_i∧dq^i + ½Ω_{αβ}dz^α∧dz^β − ½⟨∂_iA_j − ∂_jA_i, Φ⟩dq^i∧dq^j
///  + ⟨A_i, ∂_αΦ⟩dq^i∧dz^α`.
///
/// `Ω_{αβ}` is taken at the primal value of `z`; built-in charts have
/// constant internal forms.
pub fn sternberg_matrix_generic<S: Real, I: InternalSpace, A: GaugePotential>(
    space: &I,
    chart: &A,
    q: &[S],
    z: &[S],
) -> Vec<Vec<S>> {
    let (n, m) = (q.len(), z.len());
    let dim = 2 * n + m;
    let mut w = vec![vec![S::zero(); dim]; dim];
    for i in 0..n {
        w[n + i][i] = S::one();
        w[i][n + i] = -S::one();
    }
    let zv: Vec<f64> = z.iter().map(|x| x.value()).collect();
    let omega = space.omega(&zv);
    for a in 0..m {
        for b in 0..m {
            w[2 * n + a][2 * n + b] = S::cst(omega[a][b]);
        }
    }
    let phi = space.moment(z);
    let dphi = moment_jacobian_generic(space, z);
    let pot = chart.potential(q);
    let da = potential_jacobian_generic(chart, q);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let c: Vec<S> = da[i][j].iter().zip(&da[j][i]).map(|(&x, &y)| x - y).collect();
                w[i][j] = -pair(&c, &phi);
            }
        }
        for al in 0..m {
            let c = pair(&pot[i], &dphi[al]);
            w[i][2 * n + al] = c;
            w[2 * n + al][i] = -c;
        }
    }
    w
}

impl<I: InternalSpace, A: GaugePotential, L: Lagrangian> System<I, A, L> {
    pub fn base_dim(&self) -> usize {
        self.chart.base_dim()
    }

    pub fn internal_dim(&self) -> usize {
        self.space.dim()
    }

    pub fn check_domain(&self, q: &[f64], z: &[f64]) -> Result<()> {
        check_dim(self.base_dim(), q.len())?;
        self.chart.check_domain(q)?;
        self.space.check_domain(z)
    }

    pub fn sternberg_matrix(&self, state: &HamiltonianState) -> Result<Vec<Vec<f64>>> {
        self.check_domain(&state.q, &state.z)?;
        check_dim(self.base_dim(), state.p.len())?;
        Ok(sternberg_matrix_generic(&self.space, &self.chart, &state.q, &state.z))
    }

    /// `ẋ = W⁻¹∇H`, equivalently `ω_Θ(·, ẋ) = dH`.
    pub fn hamiltonian_rhs<H: Hamiltonian>(&self, h: &H, state: &HamiltonianState) -> Result<Vec<f64>> {
        let w = self.sternberg_matrix(state)?;
        let grad = h.gradient(&state.q, &state.p, &state.z);
        let d = w.len();
        let wm = DMatrix::from_fn(d, d, |r, c| w[r][c]);
        linalg::solve(&wm, &grad, "Sternberg form", STERNBERG_MAX_CONDITION)
    }

    /// Time derivative of `(q, v, z)`:
    ///
    /// `ż^α = (∂L/∂z^β − q̇^k⟨A_k, ∂_βΦ⟩) Ω^{βα}`,
    /// `d/dt ∂L/∂q̇^i = ∂L/∂q^i + q̇^j⟨∂_jA_i − ∂_iA_j, Φ⟩ + ż^α⟨A_i, ∂_αΦ⟩`,
    /// with the total derivative expanded through the mass matrix.
    pub fn lagrangian_rhs(&self, state: &LagrangianState) -> Result<Vec<f64>> {
        let parts = self.lagrangian_parts(state)?;
        let mut out = state.v.clone();
        out.extend(parts.vdot);
        out.extend(parts.zdot);
        Ok(out)
    }

    fn lagrangian_parts(&self, state: &LagrangianState) -> Result<LagrangianParts> {
        let (q, v, z) = (&state.q[..], &state.v[..], &state.z[..]);
        self.check_domain(q, z)?;
        check_dim(self.base_dim(), v.len())?;
        let (n, m) = (q.len(), z.len());
        let l = &self.lagrangian;
        let phi = self.space.moment(z);
        let dphi = self.space.moment_jacobian(z);
        let pot = self.chart.potential(q);
        let da = gauge::potential_jacobian(&self.chart, q);

        let x = [q, v, z].concat();
        let grad = ad::gradient(&x, |d| l.eval(&d[..n], &d[n..2 * n], &d[2 * n..]));
        let (dl_dq, dl_dz) = (&grad[..n], &grad[2 * n..]);

        let c: Vec<f64> = (0..m)
            .map(|b| dl_dz[b] - (0..n).map(|k| v[k] * linalg::dot(&pot[k], &dphi[b])).sum::<f64>())
            .collect();
        let zdot: Vec<f64> = if m == 0 {
            Vec::new()
        } else {
            let inv = self.space.omega_inv(z)?;
            (0..m).map(|al| (0..m).map(|b| c[b] * inv[b][al]).sum()).collect()
        };

        let force: Vec<f64> = (0..n)
            .map(|i| {
                let mut f = dl_dq[i];
                for j in 0..n {
                    let fji: Vec<f64> = da[j][i].iter().zip(&da[i][j]).map(|(a, b)| a - b).collect();
                    f += v[j] * linalg::dot(&fji, &phi);
                }
                for al in 0..m {
                    f += zdot[al] * linalg::dot(&pot[i], &dphi[al]);
                }
                f
            })
            .collect();
        let vdot = self.solve_mass(q, v, z, &zdot, &force)?;
        Ok(LagrangianParts {
            vdot,
            zdot,
            force,
            dl_dz: dl_dz.to_vec(),
        })
    }

    /// `v̇ = M⁻¹(force − ∂²L/∂q̇∂q·q̇ − ∂²L/∂q̇∂z·ż)`.
    fn solve_mass(&self, q: &[f64], v: &[f64], z: &[f64], zdot: &[f64], force: &[f64]) -> Result<Vec<f64>> {
        let n = q.len();
        let l = &self.lagrangian;
        let mass = mass_matrix(l, q, v, z);
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let qd = ad::seed2(q, &vec![0.0; n], v);
                let vd = ad::seed2(v, &ad::unit(n, i), &vec![0.0; n]);
                let zd = ad::seed2(z, &vec![0.0; z.len()], zdot);
                force[i] - l.eval(&qd, &vd, &zd).du.du
            })
            .collect();
        let mm = DMatrix::from_fn(n, n, |r, c| mass[r][c]);
        linalg::solve(&mm, &rhs, "mass matrix", MASS_MAX_CONDITION)
    }

    /// Max component difference between the covariant and the local form of
    /// the equations at a state. Two lines are compared:
    ///
    /// `(ż + Y_{q̇·A}) ⌟ Ω = ∂_z L` against the local `ż`, and
    /// `∂L/∂q^i + q̇^j⟨F_{ji}, Φ⟩ + {L, ⟨A_i, Φ⟩}_F` against the local force.
    pub fn covariant_residual(&self, state: &LagrangianState) -> Result<f64> {
        let parts = self.lagrangian_parts(state)?;
        let (q, v, z) = (&state.q[..], &state.v[..], &state.z[..]);
        let (n, m) = (q.len(), z.len());
        let l = &self.lagrangian;
        let alg = self.space.algebra();
        let phi = self.space.moment(z);
        let pot = self.chart.potential(q);
        let f = gauge::curvature(&self.chart, q)?;
        let mut worst: f64 = 0.0;

        if m > 0 {
            let va: Vec<f64> = (0..alg.dim())
                .map(|a| (0..n).map(|k| v[k] * pot[k][a]).sum())
                .collect();
            let y = self.space.action_field(&va, z);
            let omega = self.space.omega(z);
            for b in 0..m {
                let lhs: f64 = (0..m).map(|al| (parts.zdot[al] + y[al]) * omega[al][b]).sum();
                worst = worst.max((lhs - parts.dl_dz[b]).abs());
            }
        }

        let x = [q, v, z].concat();
        let grad = ad::gradient(&x, |d| l.eval(&d[..n], &d[n..2 * n], &d[2 * n..]));
        let inv = if m > 0 { self.space.omega_inv(z)? } else { Vec::new() };
        for i in 0..n {
            let mut rhs = grad[i];
            for j in 0..n {
                rhs += v[j] * linalg::dot(&f[j][i], &phi);
            }
            if m > 0 {
                // {L, ⟨A_i, Φ⟩}_F = Ω^{αβ} ∂_αL ∂_β⟨A_i, Φ⟩
                let ai = &pot[i];
                let dpair = ad::gradient(z, |d| {
                    let ph = self.space.moment(d);
                    ai.iter()
                        .zip(&ph)
                        .fold(ad::D1::zero(), |acc, (&a, &p)| acc + p.scale(a))
                });
                let dl_dz = &grad[2 * n..];
                rhs += crate::internal::bilinear(&inv, dl_dz, &dpair);
            }
            worst = worst.max((rhs - parts.force[i]).abs());
        }
        Ok(worst)
    }
}

struct LagrangianParts {
    vdot: Vec<f64>,
    zdot: Vec<f64>,
    force: Vec<f64>,
    dl_dz: Vec<f64>,
}

/// Abelian specialisation on `(q, v)`: `d/dt ∂L/∂q̇ = ∂L/∂q − q_e q̇⌟F`, with
/// `(q̇⌟F)_i = q̇^j F_{ji}` along generator `e₀`.
pub fn abelian_rhs<A: GaugePotential, L: Lagrangian>(
    chart: &A,
    lagrangian: &L,
    q_e: f64,
    q: &[f64],
    v: &[f64],
) -> Result<Vec<f64>> {
    if !chart.algebra().is_abelian() {
        return Err(Error::InvalidArgument("abelian_rhs needs an abelian algebra".into()));
    }
    let n = q.len();
    check_dim(chart.base_dim(), n)?;
    check_dim(n, v.len())?;
    let f = gauge::curvature(chart, q)?;
    let x = [q, v].concat();
    let grad = ad::gradient(&x, |d| lagrangian.eval(&d[..n], &d[n..], &[]));
    let force: Vec<f64> = (0..n)
        .map(|i| grad[i] - q_e * (0..n).map(|j| v[j] * f[j][i][0]).sum::<f64>())
        .collect();
    let mass = mass_matrix(lagrangian, q, v, &[]);
    let rhs: Vec<f64> = (0..n)
        .map(|i| {
            let qd = ad::seed2(q, &vec![0.0; n], v);
            let vd = ad::seed2(v, &ad::unit(n, i), &vec![0.0; n]);
            force[i] - lagrangian.eval(&qd, &vd, &[]).du.du
        })
        .collect();
    let mm = DMatrix::from_fn(n, n, |r, c| mass[r][c]);
    let vdot = linalg::solve(&mm, &rhs, "mass matrix", MASS_MAX_CONDITION)?;
    Ok([v, &vdot[..]].concat())
}

/// Integrates a system in its Lagrangian form.
pub fn integrate_lagrangian<I: InternalSpace, A: GaugePotential, L: Lagrangian>(
    system: &System<I, A, L>,
    state0: &LagrangianState,
    t_end: f64,
    method: Method,
) -> Result<Trajectory> {
    let n = system.base_dim();
    integrate(
        |_, y| system.lagrangian_rhs(&LagrangianState::from_slice(y, n)),
        &state0.to_vec(),
        0.0,
        t_end,
        method,
    )
}

/// Integrates a system in its Hamiltonian form.
pub fn integrate_hamiltonian<I: InternalSpace, A: GaugePotential, L: Lagrangian, H: Hamiltonian>(
    system: &System<I, A, L>,
    h: &H,
    state0: &HamiltonianState,
    t_end: f64,
    method: Method,
) -> Result<Trajectory> {
    let n = system.base_dim();
    integrate(
        |_, y| system.hamiltonian_rhs(h, &HamiltonianState::from_slice(y, n)),
        &state0.to_vec(),
        0.0,
        t_end,
        method,
    )
}

/// Legendre-paired Hamiltonian state of a Lagrangian state.
pub fn to_hamiltonian<L: Lagrangian>(l: &L, state: &LagrangianState) -> HamiltonianState {
    HamiltonianState {
        q: state.q.clone(),
        p: momentum(l, &state.q, &state.v, &state.z),
        z: state.z.clone(),
    }
}

/// Sup-norm difference of the `q` components of two trajectories sampled on
/// the same time grid.
pub fn q_difference(a: &Trajectory, b: &Trajectory, n: usize) -> Result<f64> {
    check_dim(a.states.len(), b.states.len())?;
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| linalg::max_abs_diff(&x[..n], &y[..n]))
        .fold(0.0, f64::max))
}

/// Integrates the system before and after the gauge transformation
/// `A → a A a⁻¹ + a d(a⁻¹)`, `z₀ → a(q₀)·z₀`, and returns the sup-norm
/// difference of `q(t)`.
pub fn gauge_covariance_check<I, A, L, M>(
    system: &System<I, A, L>,
    map: &M,
    state0: &LagrangianState,
    t_end: f64,
    method: Method,
) -> Result<f64>
where
    I: InternalSpace + Clone,
    A: GaugePotential + Clone,
    L: Lagrangian + Clone,
    M: GaugeMap + Clone,
{
    let original = integrate_lagrangian(system, state0, t_end, method)?;
    let moved = System {
        space: system.space.clone(),
        chart: GaugeTransformed::new(system.chart.clone(), map.clone())?,
        lagrangian: system.lagrangian.clone(),
    };
    let a0 = map.group_element(&state0.q)?;
    let z0 = system.space.act(&a0, &state0.z)?;
    let start = LagrangianState::new(state0.q.clone(), state0.v.clone(), z0)?;
    let transformed = integrate_lagrangian(&moved, &start, t_end, method)?;
    q_difference(&original, &transformed, system.base_dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{ConstantPotential, Potential, UniformField, WongPotential, ZeroPotential};
    use crate::internal::{PointOrbit, SphereOrbit};
    use crate::lie::LieAlgebra;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free_point(n: usize) -> System<PointOrbit, ZeroPotential, Mechanical> {
        System {
            space: PointOrbit::charge(0.0),
            chart: ZeroPotential { algebra: LieAlgebra::u1(), n },
            lagrangian: Mechanical::free(),
        }
    }

    fn lorentz() -> System<PointOrbit, UniformField, Mechanical> {
        System {
            space: PointOrbit::charge(1.0),
            chart: UniformField::new([0.0, 0.0, 2.0]),
            lagrangian: Mechanical::free(),
        }
    }

    fn wong() -> System<SphereOrbit, WongPotential, Mechanical> {
        System {
            space: SphereOrbit::new(1.0).unwrap(),
            chart: WongPotential::new(1.0, 0.3),
            lagrangian: Mechanical::free(),
        }
    }

    #[test]
    fn canonical_block_without_gauge_field() {
        let s = free_point(2);
        let w = s
            .sternberg_matrix(&HamiltonianState::new(vec![0.1, 0.2], vec![1.0, 2.0], vec![]).unwrap())
            .unwrap();
        let expect = vec![
            vec![0.0, 0.0, -1.0, 0.0],
            vec![0.0, 0.0, 0.0, -1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ];
        assert_eq!(w, expect);
    }

    #[test]
    fn abelian_qq_block_is_charge_times_curvature() {
        let s = lorentz();
        let st = HamiltonianState::new(vec![0.3, 0.1, -0.2], vec![0.0; 3], vec![]).unwrap();
        let w = s.sternberg_matrix(&st).unwrap();
        // q_e(∂_iA_j − ∂_jA_i) with B = 2 along z
        assert!((w[0][1] - 2.0).abs() < 1e-15 && (w[1][0] + 2.0).abs() < 1e-15);
        assert_eq!(w[0][2], 0.0);
    }

    #[test]
    fn sternberg_matrix_is_antisymmetric_and_invertible() {
        let s = wong();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let z = vec![rng.random_range(0.0..6.28), rng.random_range(-0.95..0.95)];
            let w = s.sternberg_matrix(&HamiltonianState::new(q, p, z).unwrap()).unwrap();
            for r in 0..8 {
                for c in 0..8 {
                    assert_eq!(w[r][c], -w[c][r]);
                }
            }
            let det = DMatrix::from_fn(8, 8, |r, c| w[r][c]).determinant();
            assert!(det.abs() > 1e-8);
        }
    }

    #[test]
    fn hamiltonian_rhs_examples() {
        let s = free_point(2);
        let h = Mechanical::free().hamiltonian();
        let st = HamiltonianState::new(vec![0.5, -0.5], vec![1.0, 2.0], vec![]).unwrap();
        assert_eq!(s.hamiltonian_rhs(&h, &st).unwrap(), vec![1.0, 2.0, 0.0, 0.0]);
        let h = Mechanical::oscillator(1.0).hamiltonian();
        let r = s.hamiltonian_rhs(&h, &st).unwrap();
        assert!(linalg::max_abs_diff(&r, &[1.0, 2.0, -0.5, 0.5]) < 1e-15);
    }

    #[test]
    fn lagrangian_rhs_examples() {
        let s = free_point(3);
        let st = LagrangianState::new(vec![0.1; 3], vec![1.0, 2.0, 3.0], vec![]).unwrap();
        assert_eq!(s.lagrangian_rhs(&st).unwrap(), vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);

        let s = lorentz();
        let st = LagrangianState::new(vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![]).unwrap();
        let r = s.lagrangian_rhs(&st).unwrap();
        // r'' = q_e r' × B
        let expect = linalg::cross(&[1.0, 0.0, 0.0], &[0.0, 0.0, 2.0]);
        assert!(linalg::max_abs_diff(&r[3..], &expect) < 1e-14);
        assert!((r[4] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn abelian_rhs_agrees_with_lagrangian_rhs() {
        let s = lorentz();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = abelian_rhs(&s.chart, &s.lagrangian, 1.0, &q, &v).unwrap();
            let b = s.lagrangian_rhs(&LagrangianState::new(q, v, vec![]).unwrap()).unwrap();
            assert!(linalg::max_abs_diff(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn covariant_residual_vanishes() {
        let s = lorentz();
        let st = LagrangianState::new(vec![0.3, 0.2, 0.1], vec![1.0, -0.5, 0.2], vec![]).unwrap();
        assert!(s.covariant_residual(&st).unwrap() < 1e-12);
        let s0 = free_point(3);
        assert_eq!(s0.covariant_residual(&st).unwrap(), 0.0);

        let s = wong();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let z = vec![rng.random_range(0.0..6.28), rng.random_range(-0.95..0.95)];
            let r = s.covariant_residual(&LagrangianState::new(q, v, z).unwrap()).unwrap();
            assert!(r < 1e-7, "{r}");
        }
    }

    #[test]
    fn covariant_residual_with_internal_coupling() {
        // L depends on z, so the internal bracket term contributes.
        #[derive(Clone)]
        struct Coupled;
        impl Lagrangian for Coupled {
            fn eval<S: Real>(&self, q: &[S], v: &[S], z: &[S]) -> S {
                let v2 = v.iter().fold(S::zero(), |a, &x| a + x * x);
                v2.scale(0.5) + z[1] * q[0].scale(0.2) + z[0].sin().scale(0.1)
            }
        }
        let s = System {
            space: SphereOrbit::new(1.0).unwrap(),
            chart: Potential::Constant(ConstantPotential {
                algebra: LieAlgebra::so3(),
                values: vec![vec![0.3, 0.0, 0.1], vec![0.0, 0.5, 0.0], vec![0.2, 0.0, -0.4]],
            }),
            lagrangian: Coupled,
        };
        let st = LagrangianState::new(vec![0.3, 0.2, 0.1], vec![1.0, -0.5, 0.2], vec![0.4, 0.3]).unwrap();
        assert!(s.covariant_residual(&st).unwrap() < 1e-12);
    }

    #[test]
    fn hamiltonian_and_lagrangian_rhs_agree() {
        let s = wong();
        let h = LegendreHamiltonian(Mechanical::free());
        let st = LagrangianState::new(vec![0.3, -0.2, 0.5], vec![0.4, 0.1, -0.3], vec![0.2, 0.4]).unwrap();
        let lr = s.lagrangian_rhs(&st).unwrap();
        let hr = s.hamiltonian_rhs(&h, &to_hamiltonian(&s.lagrangian, &st)).unwrap();
        // q̇ and ż agree directly; ṗ = v̇ for L = ½|v|²
        assert!(linalg::max_abs_diff(&lr, &hr) < 1e-12);
    }
}

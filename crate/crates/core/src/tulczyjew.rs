//! Classical and magnetized Tulczyjew triples in coordinates.
//!
//! Points of the Sternberg phase space are `x = (q, p, z)`; points of its
//! tangent bundle are `(x, ẋ) = (q, p, z, q̇, ṗ, ż)`. Cotangent points are
//! stored as `(base, fiber, base covector, fiber covector)` for a vector
//! bundle `E → X`, so that the canonical isomorphism `T*E* → T*E` is a
//! fixed permutation with one sign flip.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ad::{Dual, Real, D1};
use crate::dynamics::sternberg_matrix_generic;
use crate::error::{check_dim, Error, Result};
use crate::forms::{self, DifferentialForm};
use crate::gauge::{GaugePotential, ZeroPotential};
use crate::internal::{bilinear, InternalSpace, PointOrbit};
use crate::lie::LieAlgebra;

/// Default tolerance for the sampled operator identities.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Tolerance for the symplectic check on the canonical isomorphism.
pub const KAPPA_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CotangentPoint {
    pub base: Vec<f64>,
    pub fiber: Vec<f64>,
    pub base_covector: Vec<f64>,
    pub fiber_covector: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(
        base: Vec<f64>,
        fiber: Vec<f64>,
        base_covector: Vec<f64>,
        fiber_covector: Vec<f64>,
    ) -> Result<Self> {
        check_dim(base.len(), base_covector.len())?;
        check_dim(fiber.len(), fiber_covector.len())?;
        Ok(Self {
            base,
            fiber,
            base_covector,
            fiber_covector,
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [
            &self.base[..],
            &self.fiber[..],
            &self.base_covector[..],
            &self.fiber_covector[..],
        ]
        .concat()
    }

    pub fn from_slice(x: &[f64], base_dim: usize, fiber_dim: usize) -> Result<Self> {
        check_dim(2 * (base_dim + fiber_dim), x.len())?;
        let (b, f) = (base_dim, fiber_dim);
        Ok(Self {
            base: x[..b].to_vec(),
            fiber: x[b..b + f].to_vec(),
            base_covector: x[b + f..2 * b + f].to_vec(),
            fiber_covector: x[2 * b + f..].to_vec(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentLiftPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub z: Vec<f64>,
    pub qdot: Vec<f64>,
    pub pdot: Vec<f64>,
    pub zdot: Vec<f64>,
}

impl TangentLiftPoint {
    pub fn new(
        q: Vec<f64>,
        p: Vec<f64>,
        z: Vec<f64>,
        qdot: Vec<f64>,
        pdot: Vec<f64>,
        zdot: Vec<f64>,
    ) -> Result<Self> {
        let n = q.len();
        for len in [p.len(), qdot.len(), pdot.len()] {
            check_dim(n, len)?;
        }
        check_dim(z.len(), zdot.len())?;
        let pt = Self {
            q,
            p,
            z,
            qdot,
            pdot,
            zdot,
        };
        if pt.to_vec().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tangent point"));
        }
        Ok(pt)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [
            &self.q[..],
            &self.p[..],
            &self.z[..],
            &self.qdot[..],
            &self.pdot[..],
            &self.zdot[..],
        ]
        .concat()
    }

    pub fn from_slice(x: &[f64], n: usize, m: usize) -> Result<Self> {
        check_dim(2 * (2 * n + m), x.len())?;
        let d = 2 * n + m;
        Self::new(
            x[..n].to_vec(),
            x[n..2 * n].to_vec(),
            x[2 * n..d].to_vec(),
            x[d..d + n].to_vec(),
            x[d + n..d + 2 * n].to_vec(),
            x[d + 2 * n..].to_vec(),
        )
    }
}

/// `κ: T*E* → T*E`, `(q, α, p, û) ↦ (q, −û, p, α)`.
pub fn kappa(pt: &CotangentPoint) -> CotangentPoint {
    CotangentPoint {
        base: pt.base.clone(),
        fiber: pt.fiber_covector.iter().map(|x| -x).collect(),
        base_covector: pt.base_covector.clone(),
        fiber_covector: pt.fiber.clone(),
    }
}

/// `β_X(q, p, q̇, ṗ) = (q, p, ṗ, −q̇)`.
pub fn beta_classical(q: &[f64], p: &[f64], qdot: &[f64], pdot: &[f64]) -> Result<CotangentPoint> {
    CotangentPoint::new(q.to_vec(), p.to_vec(), pdot.to_vec(), qdot.iter().map(|x| -x).collect())
}

/// `α_X(q, p, q̇, ṗ) = (q, q̇, ṗ, p)`.
pub fn alpha_classical(q: &[f64], p: &[f64], qdot: &[f64], pdot: &[f64]) -> Result<CotangentPoint> {
    CotangentPoint::new(q.to_vec(), qdot.to_vec(), pdot.to_vec(), p.to_vec())
}

/// Covector `ẋ ⌟ ω_Θ` in the `(q, p, z)` order, over any scalar. `x` is the
/// packed tangent point.
fn sternberg_covector<S: Real, I: InternalSpace, A: GaugePotential>(
    space: &I,
    chart: &A,
    x: &[S],
    n: usize,
) -> Vec<S> {
    let d = x.len() / 2;
    let (base, vel) = x.split_at(d);
    let w = sternberg_matrix_generic(space, chart, &base[..n], &base[2 * n..]);
    (0..d)
        .map(|b| (0..d).fold(S::zero(), |acc, a| acc + vel[a] * w[a][b]))
        .collect()
}

fn check_point<I: InternalSpace, A: GaugePotential>(
    space: &I,
    chart: &A,
    pt: &TangentLiftPoint,
) -> Result<()> {
    check_dim(chart.base_dim(), pt.q.len())?;
    check_dim(space.dim(), pt.z.len())?;
    chart.check_domain(&pt.q)?;
    space.check_domain(&pt.z)
}

/// `β_𝓕` with base `(q, z)`, fiber `p`, covector
/// `(ṗ_i − ⟨q̇^j(∂_jA_i − ∂_iA_j), Φ⟩ − ⟨A_i, ż^α∂_αΦ⟩, ż^αΩ_{αβ} + ⟨q̇^iA_i, ∂_βΦ⟩)`
/// and fiber covector `−q̇`.
pub fn beta_magnetized<I: InternalSpace, A: GaugePotential>(
    space: &I,
    chart: &A,
    pt: &TangentLiftPoint,
) -> Result<CotangentPoint> {
    check_point(space, chart, pt)?;
    let n = pt.q.len();
    let c = sternberg_covector(space, chart, &pt.to_vec(), n);
    Ok(CotangentPoint {
        base: [&pt.q[..], &pt.z[..]].concat(),
        fiber: pt.p.clone(),
        base_covector: [&c[..n], &c[2 * n..]].concat(),
        fiber_covector: c[n..2 * n].to_vec(),
    })
}

/// `α_𝓕 = κ∘β_𝓕`.
pub fn alpha_magnetized<I: InternalSpace, A: GaugePotential>(
    space: &I,
    chart: &A,
    pt: &TangentLiftPoint,
) -> Result<CotangentPoint> {
    beta_magnetized(space, chart, pt).map(|b| kappa(&b))
}

/// Canonical Liouville form `ξ·dx` on a cotangent chart `(x, ξ)` of
/// dimension `2d`.
pub fn canonical_liouville(d: usize) -> DifferentialForm {
    DifferentialForm::new(1, 2 * d, move |x, v| {
        x[d..].iter().zip(&v[0][..d]).map(|(a, b)| a * b).sum()
    })
}

/// `dξ∧dx` on a cotangent chart `(x, ξ)` of dimension `2d`.
pub fn canonical_symplectic(d: usize) -> DifferentialForm {
    DifferentialForm::new(2, 2 * d, move |_, v| {
        let (u, w) = (v[0], v[1]);
        (0..d).map(|i| u[d + i] * w[i] - u[i] * w[d + i]).sum()
    })
}

/// Max deviation of `κ*ω_{T*E} − ω_{T*E*}` over random points and vector
/// pairs.
pub fn kappa_symplectic_residual(base_dim: usize, fiber_dim: usize, samples: usize, seed: u64) -> f64 {
    let (b, f) = (base_dim, fiber_dim);
    let d = b + f;
    let source = canonical_symplectic(d);
    let pulled = forms::pullback_ad(&canonical_symplectic(d), 2 * d, move |x| {
        let mut y = x[..b].to_vec();
        y.extend(x[2 * b + f..].iter().map(|&v| -v));
        y.extend_from_slice(&x[b + f..2 * b + f]);
        y.extend_from_slice(&x[b..b + f]);
        y
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let (x, u, w) = (uniform(&mut rng, 2 * d), uniform(&mut rng, 2 * d), uniform(&mut rng, 2 * d));
            (pulled.eval(&x, &[&u, &w]) - source.eval(&x, &[&u, &w])).abs()
        })
        .fold(0.0, f64::max)
}

/// The forms entering the magnetized triple.
#[derive(Clone, Debug)]
pub struct TripleForms {
    /// `ϑ_X = p·dq` on `(q, p, z)`.
    pub theta_x: DifferentialForm,
    /// `ω_Θ` on `(q, p, z)`.
    pub omega_theta: DifferentialForm,
    /// `Ω_Θ = Ω − d⟨A, Φ⟩`, pulled back to `(q, p, z)`.
    pub big_omega_theta: DifferentialForm,
    /// `ϑ^H = β*ϑ` on the tangent chart.
    pub theta_h: DifferentialForm,
    /// `ϑ^L = α*ϑ` on the tangent chart.
    pub theta_l: DifferentialForm,
    /// `ϑ̂ = p·q̇` on the tangent chart.
    pub theta_hat: DifferentialForm,
    /// `Ω_𝓕 = dϑ^H` assembled from derivatives of `ω_Θ`.
    pub omega_f: DifferentialForm,
}

/// Builds the Liouville forms and their companions for a space and chart.
pub fn liouville_forms<I, A>(space: &I, chart: &A) -> TripleForms
where
    I: InternalSpace + Clone + Send + Sync + 'static,
    A: GaugePotential + Clone + Send + Sync + 'static,
{
    let n = chart.base_dim();
    let m = space.dim();
    let d = 2 * n + m;
    let (sp, ch) = (Arc::new(space.clone()), Arc::new(chart.clone()));

    let theta_x = DifferentialForm::new(1, d, move |x, v| {
        (0..n).map(|i| x[n + i] * v[0][i]).sum()
    });

    let (s, c) = (sp.clone(), ch.clone());
    let omega_theta = DifferentialForm::two_form(d, move |x| {
        sternberg_matrix_generic(&*s, &*c, &x[..n], &x[2 * n..])
    });

    let (s, c) = (sp.clone(), ch.clone());
    let big_omega_theta = DifferentialForm::two_form(d, move |x| {
        let mut w = sternberg_matrix_generic(&*s, &*c, &x[..n], &x[2 * n..]);
        for i in 0..n {
            w[n + i][i] = 0.0;
            w[i][n + i] = 0.0;
        }
        w
    });

    let (s, c) = (sp.clone(), ch.clone());
    let theta_h = forms::pullback_ad(&canonical_liouville(d), 2 * d, move |x| {
        let cov = sternberg_covector(&*s, &*c, x, n);
        [&x[..d], &cov[..]].concat()
    });

    // α lands in T*F_♯ with base (q, q̇, z) and covector (β_q, p, β_z).
    let (s, c) = (sp.clone(), ch.clone());
    let theta_l = forms::pullback_ad(&canonical_liouville(d), 2 * d, move |x| {
        let cov = sternberg_covector(&*s, &*c, x, n);
        [
            &x[..n],
            &x[d..d + n],
            &x[2 * n..d],
            &cov[..n],
            &x[n..2 * n],
            &cov[2 * n..],
        ]
        .concat()
    });

    let theta_hat = DifferentialForm::function(2 * d, move |x| {
        (0..n).map(|i| x[n + i] * x[d + i]).sum()
    });

    let (s, c) = (sp, ch);
    let omega_f = DifferentialForm::new(2, 2 * d, move |x, v| {
        let (base, vel) = x.split_at(d);
        let w = sternberg_matrix_generic(&*s, &*c, &base[..n], &base[2 * n..]);
        // Ẇ = D_ẋ W along (q̇, ż); W does not depend on p.
        let qd: Vec<D1> = (0..n).map(|i| Dual::new(base[i], vel[i])).collect();
        let zd: Vec<D1> = (0..m).map(|a| Dual::new(base[2 * n + a], vel[2 * n + a])).collect();
        let wdot: Vec<Vec<f64>> = sternberg_matrix_generic(&*s, &*c, &qd, &zd)
            .into_iter()
            .map(|row| row.into_iter().map(|e| e.du).collect())
            .collect();
        let (u, w2) = (v[0], v[1]);
        bilinear(&wdot, &u[..d], &w2[..d]) + bilinear(&w, &u[d..], &w2[..d]) + bilinear(&w, &u[..d], &w2[d..])
    });

    TripleForms {
        theta_x,
        omega_theta,
        big_omega_theta,
        theta_h,
        theta_l,
        theta_hat,
        omega_f,
    }
}

/// `T*_f: (q, z, p, y) ↦ (q, p_j − y·Y_{A_j(q)}(z))`.
pub fn cotangent_map<I: InternalSpace, A: GaugePotential>(
    space: &I,
    chart: &A,
    q: &[f64],
    z: &[f64],
    p: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(chart.base_dim(), q.len())?;
    check_dim(q.len(), p.len())?;
    check_dim(space.dim(), z.len())?;
    check_dim(z.len(), y.len())?;
    chart.check_domain(q)?;
    space.check_domain(z)?;
    let pot = chart.potential(q);
    let reduced = p
        .iter()
        .zip(&pot)
        .map(|(pj, aj)| {
            let field = space.action_field(aj, z);
            pj - y.iter().zip(&field).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    Ok((q.to_vec(), reduced))
}

/// One row of an identity table.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn sample_residual(
    name: &str,
    lhs: &DifferentialForm,
    rhs: &DifferentialForm,
    points: &[(Vec<f64>, Vec<Vec<f64>>)],
    tolerance: f64,
) -> IdentityCheck {
    let k = lhs.degree();
    let max_residual = points
        .iter()
        .map(|(x, vs)| {
            let refs: Vec<&[f64]> = vs[..k].iter().map(Vec::as_slice).collect();
            (lhs.eval(x, &refs) - rhs.eval(x, &refs)).abs()
        })
        .fold(0.0, f64::max);
    IdentityCheck {
        name: name.to_string(),
        samples: points.len(),
        max_residual,
        tolerance,
    }
}

/// Samples the magnetized identities at `samples` random tangent points.
/// `base_sampler` draws `(q, z)` inside the chart domains; momenta,
/// velocities and test vectors are uniform in `[−1, 1]`.
pub fn magnetized_identities<I, A>(
    space: &I,
    chart: &A,
    mut base_sampler: impl FnMut(&mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>),
    samples: usize,
    seed: u64,
) -> Result<Vec<IdentityCheck>>
where
    I: InternalSpace + Clone + Send + Sync + 'static,
    A: GaugePotential + Clone + Send + Sync + 'static,
{
    let n = chart.base_dim();
    let m = space.dim();
    let d = 2 * n + m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    let mut alpha_kappa: f64 = 0.0;
    for _ in 0..samples {
        let (q, z) = base_sampler(&mut rng);
        check_dim(n, q.len())?;
        check_dim(m, z.len())?;
        chart.check_domain(&q)?;
        space.check_domain(&z)?;
        let mut x = q;
        x.extend(uniform(&mut rng, n));
        x.extend(z);
        x.extend(uniform(&mut rng, d));
        let vs: Vec<Vec<f64>> = (0..3).map(|_| uniform(&mut rng, 2 * d)).collect();

        let pt = TangentLiftPoint::from_slice(&x, n, m)?;
        let direct = alpha_magnetized(space, chart, &pt)?.to_vec();
        let composed = kappa(&beta_magnetized(space, chart, &pt)?).to_vec();
        alpha_kappa = alpha_kappa.max(crate::linalg::max_abs_diff(&direct, &composed));
        points.push((x, vs));
    }

    let f = liouville_forms(space, chart);
    let d_hat = forms::exterior_derivative(&f.theta_hat)?;
    let d_theta_h = forms::exterior_derivative(&f.theta_h)?;
    let d_theta_l = forms::exterior_derivative(&f.theta_l)?;
    let i_t_omega = forms::tangent_interior(&f.omega_theta);
    let i_t_big = forms::tangent_interior(&f.big_omega_theta);
    let d_t_theta = forms::tangent_lift(&f.theta_x)?;
    let d_t_omega = forms::tangent_lift(&f.omega_theta)?;

    let tol = IDENTITY_TOL;
    let mut rows = vec![
        IdentityCheck {
            name: "alpha = kappa o beta".into(),
            samples,
            max_residual: alpha_kappa,
            tolerance: 0.0,
        },
        sample_residual("theta_hat = i_T theta_X", &f.theta_hat, &forms::tangent_interior(&f.theta_x), &points, tol),
        sample_residual(
            "theta_L - theta_H = d theta_hat",
            &f.theta_l.sub(&f.theta_h)?,
            &d_hat,
            &points,
            tol,
        ),
        sample_residual("d theta_L = d theta_H", &d_theta_l, &d_theta_h, &points, tol),
        sample_residual("theta_H = i_T omega_Theta", &f.theta_h, &i_t_omega, &points, tol),
        sample_residual(
            "theta_L = d_T theta_X + i_T Omega_Theta",
            &f.theta_l,
            &d_t_theta.add(&i_t_big)?,
            &points,
            tol,
        ),
        sample_residual("Omega_F = d_T omega_Theta", &f.omega_f, &d_t_omega, &points, tol),
        sample_residual("Omega_F = d theta_H", &f.omega_f, &d_theta_h, &points, tol),
    ];
    if m == 0 && n > 0 && is_free(chart, &points, n) {
        rows.push(classical_beta_row(&points, n, samples));
    }
    Ok(rows)
}

fn is_free<A: GaugePotential>(chart: &A, points: &[(Vec<f64>, Vec<Vec<f64>>)], n: usize) -> bool {
    points
        .iter()
        .all(|(x, _)| chart.potential(&x[..n]).iter().flatten().all(|a| *a == 0.0))
}

/// Compares the pulled-back Liouville forms with `ṗ·dq − q̇·dp` and
/// `ṗ·dq + p·dq̇` when no gauge field is present.
fn classical_beta_row(points: &[(Vec<f64>, Vec<Vec<f64>>)], n: usize, samples: usize) -> IdentityCheck {
    let space = PointOrbit::charge(0.0);
    let chart = ZeroPotential {
        algebra: LieAlgebra::u1(),
        n,
    };
    let f = liouville_forms(&space, &chart);
    let d = 2 * n;
    let mut worst: f64 = 0.0;
    for (x, vs) in points {
        let v = &vs[0];
        let h: f64 = (0..n).map(|i| x[d + n + i] * v[i] - x[d + i] * v[n + i]).sum();
        let l: f64 = (0..n).map(|i| x[d + n + i] * v[i] + x[n + i] * v[d + i]).sum();
        worst = worst
            .max((f.theta_h.eval(x, &[v]) - h).abs())
            .max((f.theta_l.eval(x, &[v]) - l).abs());
    }
    IdentityCheck {
        name: "classical Liouville formulas".into(),
        samples,
        max_residual: worst,
        tolerance: 1e-12,
    }
}

/// The classical triple on `T*ℝⁿ`: the magnetized identities with a point
/// internal space and no gauge field, plus the symplectic check on `κ`.
pub fn classical_identities(n: usize, samples: usize, seed: u64) -> Result<Vec<IdentityCheck>> {
    let space = PointOrbit::charge(0.0);
    let chart = ZeroPotential {
        algebra: LieAlgebra::u1(),
        n,
    };
    let mut rows = magnetized_identities(
        &space,
        &chart,
        |rng| ((0..n).map(|_| rng.random_range(-2.0..2.0)).collect(), Vec::new()),
        samples,
        seed,
    )?;
    rows.push(IdentityCheck {
        name: "kappa symplectic".into(),
        samples: 2 * samples,
        max_residual: kappa_symplectic_residual(n, n, 2 * samples, seed ^ 0x5eed),
        tolerance: KAPPA_TOL,
    });
    Ok(rows)
}

//! The internal hamiltonian G-space `F` in a single chart.

use crate::ad::{self, Real, D1};
use crate::error::{check_dim, Error, Result};
use crate::lie::{DualElement, GroupElement, LieAlgebra};
use crate::linalg;

/// Distance from the sphere poles at which the cylinder chart is refused.
pub const POLE_MARGIN: f64 = 1e-6;

/// A hamiltonian G-space presented in one chart with coordinates `z^α`.
pub trait InternalSpace {
    fn algebra(&self) -> &LieAlgebra;

    /// Chart dimension `2m`.
    fn dim(&self) -> usize;

    /// `Ω_{αβ}(z)`, with `Ω(u, w) = uᵀ Ω w`.
    fn omega(&self, z: &[f64]) -> Vec<Vec<f64>>;

    /// Moment map `Φ(z)` in dual-basis coordinates.
    fn moment<S: Real>(&self, z: &[S]) -> Vec<S>;

    /// Infinitesimal action `Y_ξ(z)` as a chart vector.
    fn action_field(&self, xi: &[f64], z: &[f64]) -> Vec<f64>;

    fn check_domain(&self, z: &[f64]) -> Result<()>;

    /// True when `Ω` has constant canonical coefficients in this chart.
    fn is_darboux(&self) -> bool;

    /// Chart image of `a · z` under the group action.
    fn act(&self, a: &GroupElement, z: &[f64]) -> Result<Vec<f64>>;

    /// `Ω^{αβ}`, the matrix inverse of `Ω_{αβ}`.
    fn omega_inv(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        if n == 0 {
            return Ok(Vec::new());
        }
        let w = self.omega(z);
        let m = nalgebra::DMatrix::from_fn(n, n, |r, c| w[r][c]);
        let inv = linalg::inverse(&m, "internal symplectic form", 1e12)?;
        Ok((0..n).map(|r| (0..n).map(|c| inv[(r, c)]).collect()).collect())
    }

    /// `∂_αΦ_a` as `[α][a]`.
    fn moment_jacobian(&self, z: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|al| ad::jvp(z, &ad::unit(z.len(), al), |d| self.moment(d)))
            .collect()
    }
}

/// A single point of `𝔤*`, such as the orbit `{−q_e}` of the abelian case.
#[derive(Clone, Debug)]
pub struct PointOrbit {
    algebra: LieAlgebra,
    value: Vec<f64>,
}

impl PointOrbit {
    /// The point must be fixed by the coadjoint action.
    pub fn new(algebra: LieAlgebra, value: DualElement) -> Result<Self> {
        check_dim(algebra.dim(), value.coords.len())?;
        for a in 0..algebra.dim() {
            let moved = coadjoint_field(&algebra, &ad::unit(algebra.dim(), a), &value.coords);
            if moved.iter().any(|m| m.abs() > 1e-12) {
                return Err(Error::InvalidArgument(
                    "point orbit value is not fixed by the coadjoint action".into(),
                ));
            }
        }
        Ok(Self {
            algebra,
            value: value.coords,
        })
    }

    /// `u(1)` point orbit `Φ = −q_e`.
    pub fn charge(q_e: f64) -> Self {
        Self {
            algebra: LieAlgebra::u1(),
            value: vec![-q_e],
        }
    }

    /// `Φ = −μ e¹` in `so(2)*`; the only orbit type for `k = 1`.
    pub fn so2(mu: f64) -> Self {
        Self {
            algebra: LieAlgebra::so2k(1),
            value: vec![-mu],
        }
    }

    pub fn value(&self) -> &[f64] {
        &self.value
    }
}

impl InternalSpace for PointOrbit {
    fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    fn dim(&self) -> usize {
        0
    }

    fn omega(&self, _z: &[f64]) -> Vec<Vec<f64>> {
        Vec::new()
    }

    fn moment<S: Real>(&self, _z: &[S]) -> Vec<S> {
        self.value.iter().map(|&v| S::cst(v)).collect()
    }

    fn action_field(&self, _xi: &[f64], _z: &[f64]) -> Vec<f64> {
        Vec::new()
    }

    fn check_domain(&self, z: &[f64]) -> Result<()> {
        check_dim(0, z.len())
    }

    fn is_darboux(&self) -> bool {
        true
    }

    fn act(&self, _a: &GroupElement, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(0, z.len())?;
        Ok(Vec::new())
    }
}

/// Coadjoint orbit of radius `μ` in `so(3)*`, charted by cylinder
/// coordinates `z = (x, y)`: `Φ = (√(μ²−y²) cos x, √(μ²−y²) sin x, y)`.
/// The form is `Ω = dx∧dy`, the orientation for which `Y_ξ ⌟ Ω = ⟨ξ, dΦ⟩`
/// holds with the left coadjoint action. `x` is an unbounded angle.
#[derive(Clone, Debug)]
pub struct SphereOrbit {
    algebra: LieAlgebra,
    mu: f64,
}

impl SphereOrbit {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("orbit radius must be positive, got {mu}")));
        }
        Ok(Self {
            algebra: LieAlgebra::so3(),
            mu,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Chart coordinates of a point of `𝔤*` on the orbit.
    pub fn chart_of<S: Real>(&self, phi: &[S]) -> Vec<S> {
        vec![phi[1].atan2(phi[0]), phi[2]]
    }
}

impl InternalSpace for SphereOrbit {
    fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    fn dim(&self) -> usize {
        2
    }

    fn omega(&self, _z: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0], vec![-1.0, 0.0]]
    }

    fn moment<S: Real>(&self, z: &[S]) -> Vec<S> {
        let s = (S::cst(self.mu * self.mu) - z[1] * z[1]).sqrt();
        vec![s * z[0].cos(), s * z[0].sin(), z[1]]
    }

    fn action_field(&self, xi: &[f64], z: &[f64]) -> Vec<f64> {
        let phi = self.moment(z);
        let w = coadjoint_field(&self.algebra, xi, &phi);
        let rho2 = phi[0] * phi[0] + phi[1] * phi[1];
        vec![(phi[0] * w[1] - phi[1] * w[0]) / rho2, w[2]]
    }

    fn check_domain(&self, z: &[f64]) -> Result<()> {
        check_dim(2, z.len())?;
        if !z[0].is_finite() || !z[1].is_finite() {
            return Err(Error::NonFinite("sphere chart point"));
        }
        if z[1].abs() > self.mu - POLE_MARGIN {
            return Err(Error::Domain(format!(
                "sphere chart point y = {} is within {POLE_MARGIN:e} of a pole (μ = {})",
                z[1], self.mu
            )));
        }
        Ok(())
    }

    fn is_darboux(&self) -> bool {
        true
    }

    fn act(&self, a: &GroupElement, z: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(z)?;
        let phi = DualElement::new(self.moment(z))?;
        let moved = self.algebra.coadjoint(a, &phi)?;
        let mut out = self.chart_of(&moved.coords);
        // keep x on the branch nearest the input
        let tau = std::f64::consts::TAU;
        out[0] += tau * ((z[0] - out[0]) / tau).round();
        Ok(out)
    }
}

/// Built-in orbits selectable at runtime.
#[derive(Clone, Debug)]
pub enum Orbit {
    Point(PointOrbit),
    Sphere(SphereOrbit),
}

macro_rules! delegate {
    ($self:ident, $o:ident => $e:expr) => {
        match $self {
            Orbit::Point($o) => $e,
            Orbit::Sphere($o) => $e,
        }
    };
}

impl InternalSpace for Orbit {
    fn algebra(&self) -> &LieAlgebra {
        delegate!(self, o => o.algebra())
    }
    fn dim(&self) -> usize {
        delegate!(self, o => o.dim())
    }
    fn omega(&self, z: &[f64]) -> Vec<Vec<f64>> {
        delegate!(self, o => o.omega(z))
    }
    fn moment<S: Real>(&self, z: &[S]) -> Vec<S> {
        delegate!(self, o => o.moment(z))
    }
    fn action_field(&self, xi: &[f64], z: &[f64]) -> Vec<f64> {
        delegate!(self, o => o.action_field(xi, z))
    }
    fn check_domain(&self, z: &[f64]) -> Result<()> {
        delegate!(self, o => o.check_domain(z))
    }
    fn is_darboux(&self) -> bool {
        delegate!(self, o => o.is_darboux())
    }
    fn act(&self, a: &GroupElement, z: &[f64]) -> Result<Vec<f64>> {
        delegate!(self, o => o.act(a, z))
    }
}

/// `ad*_ξ μ` with `⟨ad*_ξ μ, η⟩ = −⟨μ, [ξ, η]⟩`, the generator of the left
/// coadjoint action.
pub fn coadjoint_field(algebra: &LieAlgebra, xi: &[f64], mu: &[f64]) -> Vec<f64> {
    let d = algebra.dim();
    (0..d)
        .map(|b| {
            let mut s = 0.0;
            for a in 0..d {
                for c in 0..d {
                    s -= xi[a] * algebra.structure_constant(c, a, b) * mu[c];
                }
            }
            s
        })
        .collect()
}

/// Max-abs residuals of the two moment-map identities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentResiduals {
    /// `|Y_ξ ⌟ Ω − ⟨ξ, dΦ⟩|`
    pub phi1: f64,
    /// `|Ω(Y_ξ1, Y_ξ2) − ⟨[ξ1, ξ2], Φ⟩|`
    pub phi2: f64,
}

pub fn check_moment_identities<I: InternalSpace>(
    space: &I,
    samples: &[Vec<f64>],
    xi_pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<MomentResiduals> {
    let alg = space.algebra();
    let mut out = MomentResiduals::default();
    for z in samples {
        space.check_domain(z)?;
        let w = space.omega(z);
        let phi = space.moment(z);
        let dphi = space.moment_jacobian(z);
        for (x1, x2) in xi_pairs {
            check_dim(alg.dim(), x1.len())?;
            check_dim(alg.dim(), x2.len())?;
            let y1 = space.action_field(x1, z);
            let y2 = space.action_field(x2, z);
            for beta in 0..space.dim() {
                let lhs: f64 = (0..space.dim()).map(|a| y1[a] * w[a][beta]).sum();
                let rhs = alg.pair_coords(x1, &dphi[beta]);
                out.phi1 = out.phi1.max((lhs - rhs).abs());
            }
            let lhs = bilinear(&w, &y1, &y2);
            let rhs = alg.pair_coords(&alg.bracket_coords(x1, x2), &phi);
            out.phi2 = out.phi2.max((lhs - rhs).abs());
        }
    }
    Ok(out)
}

/// `{f, g}_F = Ω^{αβ} ∂_αf ∂_βg`.
pub fn poisson_bracket<I: InternalSpace>(
    space: &I,
    f: impl Fn(&[D1]) -> D1,
    g: impl Fn(&[D1]) -> D1,
    z: &[f64],
) -> Result<f64> {
    space.check_domain(z)?;
    let inv = space.omega_inv(z)?;
    let df = ad::gradient(z, f);
    let dg = ad::gradient(z, g);
    Ok(bilinear(&inv, &df, &dg))
}

pub(crate) fn bilinear(m: &[Vec<f64>], u: &[f64], w: &[f64]) -> f64 {
    m.iter()
        .zip(u)
        .map(|(row, ui)| ui * linalg::dot(row, w))
        .sum()
}

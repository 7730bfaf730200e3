//! Chart-local gauge potentials `A_i(q) ∈ 𝔤`, their curvature, and gauge
//! transformations `A' = a A a⁻¹ + a ∂(a⁻¹)`.

use crate::ad::{self, Dual, Real};
use crate::error::{check_dim, Error, Result};
use crate::lie::{expm, GroupElement, LieAlgebra};
use crate::linalg::Mat;

/// Minimum angle to the excluded half-axis of a monopole patch.
pub const AXIS_MARGIN: f64 = 1e-3;

/// Re-expansion tolerance for transformed potentials.
pub const TRANSFORM_TOL: f64 = 1e-8;

pub trait GaugePotential {
    fn algebra(&self) -> &LieAlgebra;

    fn base_dim(&self) -> usize;

    /// `A_i^a(q)` indexed `[i][a]`.
    fn potential<S: Real>(&self, q: &[S]) -> Vec<Vec<S>>;

    fn check_domain(&self, q: &[f64]) -> Result<()>;
}

/// A smooth map `a: X → G ⊂ SO(N)`.
pub trait GaugeMap {
    fn order(&self) -> usize;

    fn matrix<S: Real>(&self, q: &[S]) -> Mat<S>;

    fn group_element(&self, q: &[f64]) -> Result<GroupElement> {
        GroupElement::new(self.matrix(q))
    }
}

/// `∂_jA_i^a` indexed `[j][i][a]`.
pub fn potential_jacobian<A: GaugePotential>(chart: &A, q: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = chart.base_dim();
    (0..n)
        .map(|j| {
            let dq = ad::seed(q, &ad::unit(n, j));
            chart
                .potential(&dq)
                .into_iter()
                .map(|ai| ai.into_iter().map(|x| x.du).collect())
                .collect()
        })
        .collect()
}

/// `F_{ji} = ∂_jA_i − ∂_iA_j + [A_j, A_i]`, indexed `[j][i][a]`.
///
/// This bracket order makes `F` transform as `a F a⁻¹` under the gauge law
/// above; it is the order that the equations of motion require.
pub fn curvature<A: GaugePotential>(chart: &A, q: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    check_dim(chart.base_dim(), q.len())?;
    chart.check_domain(q)?;
    let alg = chart.algebra();
    let a = chart.potential(q);
    let da = potential_jacobian(chart, q);
    let n = chart.base_dim();
    let mut f = vec![vec![vec![0.0; alg.dim()]; n]; n];
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let br = alg.bracket_coords(&a[j], &a[i]);
            for c in 0..alg.dim() {
                f[j][i][c] = da[j][i][c] - da[i][j][c] + br[c];
            }
        }
    }
    Ok(f)
}

/// `(F₂₃, F₃₁, F₁₂)` component `a` of a three-dimensional curvature.
pub fn magnetic_field(f: &[Vec<Vec<f64>>], a: usize) -> [f64; 3] {
    [f[1][2][a], f[2][0][a], f[0][1][a]]
}

/// `A = 0` on `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct ZeroPotential {
    pub algebra: LieAlgebra,
    pub n: usize,
}

impl GaugePotential for ZeroPotential {
    fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }
    fn base_dim(&self) -> usize {
        self.n
    }
    fn potential<S: Real>(&self, _q: &[S]) -> Vec<Vec<S>> {
        vec![vec![S::zero(); self.algebra.dim()]; self.n]
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        check_dim(self.n, q.len())
    }
}

/// Constant potentials `A_i`.
#[derive(Clone, Debug)]
pub struct ConstantPotential {
    pub algebra: LieAlgebra,
    pub values: Vec<Vec<f64>>,
}

impl GaugePotential for ConstantPotential {
    fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }
    fn base_dim(&self) -> usize {
        self.values.len()
    }
    fn potential<S: Real>(&self, _q: &[S]) -> Vec<Vec<S>> {
        self.values
            .iter()
            .map(|ai| ai.iter().map(|&x| S::cst(x)).collect())
            .collect()
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        check_dim(self.values.len(), q.len())
    }
}

/// Uniform field `B` in ℝ³ along generator `e₀` of an abelian algebra:
/// `A = ½ B × r`, so that `(F₂₃, F₃₁, F₁₂) = B`.
#[derive(Clone, Debug)]
pub struct UniformField {
    pub algebra: LieAlgebra,
    pub field: [f64; 3],
}

impl UniformField {
    pub fn new(field: [f64; 3]) -> Self {
        Self {
            algebra: LieAlgebra::u1(),
            field,
        }
    }
}

impl GaugePotential for UniformField {
    fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }
    fn base_dim(&self) -> usize {
        3
    }
    fn potential<S: Real>(&self, q: &[S]) -> Vec<Vec<S>> {
        let b = self.field;
        let half = |x: S, c: f64| x.scale(0.5 * c);
        let comps = [
            half(q[2], b[1]) - half(q[1], b[2]),
            half(q[0], b[2]) - half(q[2], b[0]),
            half(q[1], b[0]) - half(q[0], b[1]),
        ];
        comps
            .iter()
            .map(|&c| {
                let mut v = vec![S::zero(); self.algebra.dim()];
                v[0] = c;
                v
            })
            .collect()
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        check_dim(3, q.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Patch {
    /// Regular on `z > −∞` except the negative z half-axis.
    North,
    /// Regular except the positive z half-axis.
    South,
    /// North for `z ≥ 0`, south otherwise. Piecewise; only meant for
    /// curvature evaluation.
    Auto,
}

/// Wu–Yang monopole of strength `q_m` along `e₀`:
/// north `A = q_m(1 − z/r)(−y, x, 0)/(x² + y²)`,
/// south `A = −q_m(1 + z/r)(−y, x, 0)/(x² + y²)`.
/// Both have curvature `B = q_m r/r³`.
#[derive(Clone, Debug)]
pub struct Monopole {
    pub algebra: LieAlgebra,
    pub q_m: f64,
    pub patch: Patch,
}

impl Monopole {
    pub fn new(q_m: f64, patch: Patch) -> Self {
        Self {
            algebra: LieAlgebra::u1(),
            q_m,
            patch,
        }
    }

    fn resolved(&self, z: f64) -> Patch {
        match self.patch {
            Patch::Auto if z >= 0.0 => Patch::North,
            Patch::Auto => Patch::South,
            p => p,
        }
    }
}

impl GaugePotential for Monopole {
    fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }
    fn base_dim(&self) -> usize {
        3
    }
    fn potential<S: Real>(&self, q: &[S]) -> Vec<Vec<S>> {
        let (x, y, z) = (q[0], q[1], q[2]);
        let r = (x * x + y * y + z * z).sqrt();
        let rho2 = x * x + y * y;
        let f = match self.resolved(z.value()) {
            Patch::South => -(S::one() + z / r).scale(self.q_m),
            _ => (S::one() - z / r).scale(self.q_m),
        } / rho2;
        let d = self.algebra.dim();
        let comp = |c: S| {
            let mut v = vec![S::zero(); d];
            v[0] = c;
            v
        };
        vec![comp(-(f * y)), comp(f * x), comp(S::zero())]
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        check_dim(3, q.len())?;
        let r = crate::linalg::norm(q);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain("monopole potential at the origin".into()));
        }
        let cos = q[2] / r;
        let axis = match self.resolved(q[2]) {
            Patch::South => 1.0,
            _ => -1.0,
        };
        let angle = (cos * axis).clamp(-1.0, 1.0).acos();
        if angle < AXIS_MARGIN {
            return Err(Error::Domain(format!(
                "point is within angle {angle:.3e} of the excluded monopole axis"
            )));
        }
        Ok(())
    }
}

/// Non-abelian `su(2)` potential in ℝ³ with a uniform abelian-like part and
/// a constant offset: `A₁ = −½b q₂ e₃ + c e₁`, `A₂ = ½b q₁ e₃ + c e₂`,
/// `A₃ = c e₃`.
#[derive(Clone, Debug)]
pub struct WongPotential {
    pub algebra: LieAlgebra,
    pub strength: f64,
    pub offset: f64,
}

impl WongPotential {
    pub fn new(strength: f64, offset: f64) -> Self {
        Self {
            algebra: LieAlgebra::so3(),
            strength,
            offset,
        }
    }
}

impl GaugePotential for WongPotential {
    fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }
    fn base_dim(&self) -> usize {
        3
    }
    fn potential<S: Real>(&self, q: &[S]) -> Vec<Vec<S>> {
        let b = 0.5 * self.strength;
        let c = S::cst(self.offset);
        let z = S::zero();
        vec![
            vec![c, z, -q[1].scale(b)],
            vec![z, c, q[0].scale(b)],
            vec![z, z, c],
        ]
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        check_dim(3, q.len())
    }
}

/// Runtime-selectable built-in potentials.
#[derive(Clone, Debug)]
pub enum Potential {
    Zero(ZeroPotential),
    Constant(ConstantPotential),
    Uniform(UniformField),
    Monopole(Monopole),
    Wong(WongPotential),
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            Potential::Zero($p) => $e,
            Potential::Constant($p) => $e,
            Potential::Uniform($p) => $e,
            Potential::Monopole($p) => $e,
            Potential::Wong($p) => $e,
        }
    };
}

impl GaugePotential for Potential {
    fn algebra(&self) -> &LieAlgebra {
        delegate!(self, p => p.algebra())
    }
    fn base_dim(&self) -> usize {
        delegate!(self, p => p.base_dim())
    }
    fn potential<S: Real>(&self, q: &[S]) -> Vec<Vec<S>> {
        delegate!(self, p => p.potential(q))
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        delegate!(self, p => p.check_domain(q))
    }
}

/// How the phase `χ(q)` of an exponential gauge map depends on `q`.
#[derive(Clone, Debug, PartialEq)]
pub enum Phase {
    /// `χ = 1`.
    Constant,
    /// `χ = c·q`.
    Linear(Vec<f64>),
    /// `χ = atan2(q₂, q₁)`.
    Azimuth,
}

/// `a(q) = exp(χ(q) ξ)`.
#[derive(Clone, Debug)]
pub struct ExpMap {
    pub algebra: LieAlgebra,
    pub xi: Vec<f64>,
    pub phase: Phase,
}

impl ExpMap {
    pub fn constant(algebra: LieAlgebra, xi: Vec<f64>) -> Self {
        Self { algebra, xi, phase: Phase::Constant }
    }

    pub fn linear(algebra: LieAlgebra, xi: Vec<f64>, c: Vec<f64>) -> Self {
        Self { algebra, xi, phase: Phase::Linear(c) }
    }

    pub fn azimuth(algebra: LieAlgebra, xi: Vec<f64>) -> Self {
        Self { algebra, xi, phase: Phase::Azimuth }
    }

    /// The pointwise inverse `q ↦ a(q)⁻¹`.
    pub fn inverse(&self) -> Self {
        Self {
            algebra: self.algebra.clone(),
            xi: self.xi.iter().map(|x| -x).collect(),
            phase: self.phase.clone(),
        }
    }

    fn chi<S: Real>(&self, q: &[S]) -> S {
        match &self.phase {
            Phase::Constant => S::one(),
            Phase::Linear(c) => c
                .iter()
                .zip(q)
                .fold(S::zero(), |acc, (&ci, &qi)| acc + qi.scale(ci)),
            Phase::Azimuth => q[1].atan2(q[0]),
        }
    }
}

impl GaugeMap for ExpMap {
    fn order(&self) -> usize {
        self.algebra.order()
    }
    fn matrix<S: Real>(&self, q: &[S]) -> Mat<S> {
        if self.phase == Phase::Constant {
            return expm(&self.algebra.to_matrix(&self.xi)).map(S::cst);
        }
        let chi = self.chi(q);
        let xi: Vec<S> = self.xi.iter().map(|&x| chi.scale(x)).collect();
        expm(&self.algebra.to_matrix(&xi))
    }
}

/// `A'_i = a A_i a⁻¹ + a ∂_i(a⁻¹)` with `∂_i(a⁻¹) = (∂_i a)ᵀ`.
#[derive(Clone, Debug)]
pub struct GaugeTransformed<A, M> {
    pub inner: A,
    pub map: M,
}

impl<A: GaugePotential, M: GaugeMap> GaugeTransformed<A, M> {
    pub fn new(inner: A, map: M) -> Result<Self> {
        check_dim(inner.algebra().order(), map.order())?;
        Ok(Self { inner, map })
    }

    /// Max-abs re-expansion residual of `A'_i(q)`.
    pub fn expansion_residual(&self, q: &[f64]) -> f64 {
        let alg = self.inner.algebra();
        self.matrices(q)
            .iter()
            .map(|m| alg.expand(m).1)
            .fold(0.0, f64::max)
    }

    fn matrices<S: Real>(&self, q: &[S]) -> Vec<Mat<S>> {
        let alg = self.inner.algebra();
        let n = self.inner.base_dim();
        let inner = self.inner.potential(q);
        (0..n)
            .map(|i| {
                let dq: Vec<Dual<S>> = q
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| Dual::new(x, if k == i { S::one() } else { S::zero() }))
                    .collect();
                let ad = self.map.matrix(&dq);
                let a = ad.map(|x| x.re);
                let da = ad.map(|x| x.du);
                a.matmul(&alg.to_matrix(&inner[i]))
                    .matmul(&a.transpose())
                    .add(&a.matmul(&da.transpose()))
            })
            .collect()
    }
}

impl<A: GaugePotential, M: GaugeMap> GaugePotential for GaugeTransformed<A, M> {
    fn algebra(&self) -> &LieAlgebra {
        self.inner.algebra()
    }
    fn base_dim(&self) -> usize {
        self.inner.base_dim()
    }
    fn potential<S: Real>(&self, q: &[S]) -> Vec<Vec<S>> {
        let alg = self.inner.algebra();
        self.matrices(q)
            .iter()
            .map(|m| alg.expand(m).0)
            .collect()
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        self.inner.check_domain(q)?;
        let residual = self.expansion_residual(q);
        if residual > TRANSFORM_TOL {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(())
    }
}

/// Max-abs of `curvature(A') − a F a⁻¹` at `q`.
pub fn covariance_residual<A: GaugePotential, M: GaugeMap>(
    chart: &A,
    map: &M,
    q: &[f64],
) -> Result<f64>
where
    A: Clone,
    M: Clone,
{
    let alg = chart.algebra();
    let f = curvature(chart, q)?;
    let transformed = GaugeTransformed::new(chart.clone(), map.clone())?;
    let f2 = curvature(&transformed, q)?;
    let a = map.group_element(q)?;
    let mut worst: f64 = 0.0;
    for (row, row2) in f.iter().zip(&f2) {
        for (fji, fji2) in row.iter().zip(row2) {
            let x = alg.element(fji.clone())?;
            let moved = alg.adjoint(&a, &x)?;
            worst = worst.max(crate::linalg::max_abs_diff(&moved.coords, fji2));
        }
    }
    Ok(worst)
}

//! Matrix presentations of compact Lie algebras inside `so(N)`.
//!
//! An algebra is given by antisymmetric generators `T_a`; structure constants
//! are recovered from commutators, and dual elements are stored in the dual
//! basis `ê^a` so that `⟨ξ, μ⟩ = Σ ξ^a μ_a`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::ad::Real;
use crate::error::{check_dim, Error, Result};
use crate::linalg::Mat;

/// Tolerance used when re-expanding a matrix in the generator basis.
pub const EXPANSION_TOL: f64 = 1e-10;

#[derive(Debug)]
struct AlgebraData {
    name: String,
    order: usize,
    generators: Vec<Mat<f64>>,
    /// `c^c_{ab}` stored at `(c * dim + a) * dim + b`.
    structure: Vec<f64>,
    metric: Vec<Vec<f64>>,
    metric_inv: Vec<Vec<f64>>,
    gram_inv: Vec<Vec<f64>>,
}

/// A compact Lie algebra presented by matrix generators. Cheap to clone.
#[derive(Clone, Debug)]
pub struct LieAlgebra(Arc<AlgebraData>);

impl PartialEq for LieAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.name == other.0.name && self.0.generators == other.0.generators)
    }
}

/// `ξ ∈ 𝔤` as coefficients in the generator basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub coords: Vec<f64>,
}

/// `μ ∈ 𝔤*` as coefficients in the dual basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DualElement {
    pub coords: Vec<f64>,
}

/// An element of `G ⊂ SO(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    matrix: Mat<f64>,
}

impl AlgebraElement {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("algebra element"));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }
}

impl DualElement {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("dual element"));
        }
        Ok(Self { coords })
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl GroupElement {
    /// Validates orthogonality and unit determinant to 1e-10.
    pub fn new(matrix: Mat<f64>) -> Result<Self> {
        let n = matrix.order();
        let gtg = matrix.transpose().matmul(&matrix);
        let dev = gtg.sub(&Mat::identity(n)).max_abs();
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthogonal (‖gᵀg − I‖ = {dev:e})"
            )));
        }
        let det = matrix.to_dmatrix().determinant();
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix has determinant {det}, expected +1"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Mat::identity(n),
        }
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.matmul(&other.matrix),
        }
    }
}

/// Matrix exponential by scaling and squaring with a degree-8 Taylor core.
/// The scaled argument is kept below 1/32 in the 1-norm, where the truncated
/// tail is below 1e-19.
pub fn expm<S: Real>(x: &Mat<S>) -> Mat<S> {
    let n = x.order();
    let norm = x.norm1();
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 1.0 / 32.0 {
        squarings += 1;
    }
    let y = x.scale(S::cst(f64::powi(2.0, -squarings)));
    let eye = Mat::identity(n);
    let mut acc = eye.clone();
    for k in (1..=8).rev() {
        acc = eye.add(&y.matmul(&acc).scale(S::cst(1.0 / k as f64)));
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc);
    }
    acc
}

impl LieAlgebra {
    /// Builds an algebra from antisymmetric generators, recovering structure
    /// constants from commutators. Fails when the span is not closed under the
    /// bracket or a generator is not antisymmetric.
    pub fn from_generators(name: &str, generators: Vec<Mat<f64>>) -> Result<Self> {
        let dim = generators.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("algebra needs at least one generator".into()));
        }
        let order = generators[0].order();
        for t in &generators {
            check_dim(order, t.order())?;
            if t.add(&t.transpose()).max_abs() != 0.0 {
                return Err(Error::InvalidArgument("generator is not antisymmetric".into()));
            }
        }
        let gram = DMatrix::from_fn(dim, dim, |a, b| generators[a].frobenius(&generators[b]));
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("generators are linearly dependent".into()))?;
        let gram_inv: Vec<Vec<f64>> = (0..dim)
            .map(|a| (0..dim).map(|b| gram_inv[(a, b)]).collect())
            .collect();
        let metric: Vec<Vec<f64>> = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| -0.5 * generators[a].matmul(&generators[b]).trace())
                    .collect()
            })
            .collect();
        let metric_inv = DMatrix::from_fn(dim, dim, |a, b| metric[a][b])
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("trace form is degenerate".into()))?;
        let metric_inv = (0..dim)
            .map(|a| (0..dim).map(|b| metric_inv[(a, b)]).collect())
            .collect();

        let mut alg = AlgebraData {
            name: name.to_string(),
            order,
            generators,
            structure: vec![0.0; dim * dim * dim],
            metric,
            metric_inv,
            gram_inv,
        };
        for a in 0..dim {
            for b in 0..dim {
                let comm = commutator(&alg.generators[a], &alg.generators[b]);
                let (coords, residual) = expand_with(&alg, &comm);
                if residual > EXPANSION_TOL {
                    return Err(Error::NotInAlgebra { residual });
                }
                for (c, v) in coords.into_iter().enumerate() {
                    alg.structure[(c * dim + a) * dim + b] = v;
                }
            }
        }
        Ok(Self(Arc::new(alg)))
    }

    /// `u(1)` realised as `so(2)` with generator `E₁₂ − E₂₁`.
    pub fn u1() -> Self {
        Self::so(2).rename("u1")
    }

    /// `so(3) ≅ su(2)` with `(E_i)_{jk} = −ε_{ijk}`, so `[E₁, E₂] = E₃`.
    pub fn so3() -> Self {
        let gens = (0..3)
            .map(|i| Mat::from_fn(3, |j, k| -levi_civita(i, j, k)))
            .collect();
        Self::from_generators("so3", gens).expect("so(3) generators are valid")
    }

    /// `so(n)` with basis `E_ij − E_ji`, `i < j`, in lexicographic order.
    pub fn so(n: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                gens.push(Mat::from_fn(n, |r, c| {
                    if r == i && c == j {
                        1.0
                    } else if r == j && c == i {
                        -1.0
                    } else {
                        0.0
                    }
                }));
            }
        }
        Self::from_generators(&format!("so{n}"), gens).expect("so(n) generators are valid")
    }

    /// `so(2k)` as used by the magnetized Kepler problems.
    pub fn so2k(k: usize) -> Self {
        Self::so(2 * k)
    }

    fn rename(self, name: &str) -> Self {
        let d = &self.0;
        Self(Arc::new(AlgebraData {
            name: name.to_string(),
            order: d.order,
            generators: d.generators.clone(),
            structure: d.structure.clone(),
            metric: d.metric.clone(),
            metric_inv: d.metric_inv.clone(),
            gram_inv: d.gram_inv.clone(),
        }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn dim(&self) -> usize {
        self.0.generators.len()
    }

    /// Order `N` of the defining matrices.
    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn generators(&self) -> &[Mat<f64>] {
        &self.0.generators
    }

    /// `c^c_{ab}` with `[T_a, T_b] = c^c_{ab} T_c`.
    pub fn structure_constant(&self, c: usize, a: usize, b: usize) -> f64 {
        let d = self.dim();
        self.0.structure[(c * d + a) * d + b]
    }

    pub fn pairing_metric(&self) -> &[Vec<f64>] {
        &self.0.metric
    }

    pub fn is_abelian(&self) -> bool {
        self.0.structure.iter().all(|&c| c == 0.0)
    }

    pub fn basis(&self, a: usize) -> AlgebraElement {
        AlgebraElement {
            coords: crate::ad::unit(self.dim(), a),
        }
    }

    pub fn dual_basis(&self, a: usize) -> DualElement {
        DualElement {
            coords: crate::ad::unit(self.dim(), a),
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            coords: vec![0.0; self.dim()],
        }
    }

    pub fn element(&self, coords: Vec<f64>) -> Result<AlgebraElement> {
        check_dim(self.dim(), coords.len())?;
        AlgebraElement::new(coords)
    }

    /// Bracket in coordinates, `[x, y]^c = c^c_{ab} x^a y^b`.
    pub fn bracket_coords<S: Real>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let d = self.dim();
        let mut out = vec![S::zero(); d];
        for (c, o) in out.iter_mut().enumerate() {
            for a in 0..d {
                for b in 0..d {
                    let k = self.0.structure[(c * d + a) * d + b];
                    if k != 0.0 {
                        *o += x[a] * y[b] * S::cst(k);
                    }
                }
            }
        }
        out
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        check_dim(self.dim(), x.dim())?;
        check_dim(self.dim(), y.dim())?;
        Ok(AlgebraElement {
            coords: self.bracket_coords(&x.coords, &y.coords),
        })
    }

    /// `Σ x^a T_a`.
    pub fn to_matrix<S: Real>(&self, x: &[S]) -> Mat<S> {
        let n = self.order();
        let mut m = Mat::zeros(n);
        for (xa, t) in x.iter().zip(&self.0.generators) {
            for r in 0..n {
                for c in 0..n {
                    let v = t[(r, c)];
                    if v != 0.0 {
                        m[(r, c)] += *xa * S::cst(v);
                    }
                }
            }
        }
        m
    }

    /// Re-expands a matrix in the generator basis; returns the coordinates
    /// and the max-abs residual of the primal part.
    pub fn expand<S: Real>(&self, m: &Mat<S>) -> (Vec<S>, f64) {
        expand_with(&self.0, m)
    }

    pub fn exp(&self, x: &AlgebraElement) -> Result<GroupElement> {
        check_dim(self.dim(), x.dim())?;
        AlgebraElement::new(x.coords.clone())?;
        Ok(GroupElement {
            matrix: expm(&self.to_matrix(&x.coords)),
        })
    }

    /// `Ad_a x = a x a⁻¹`, re-expanded in the generator basis.
    pub fn adjoint(&self, a: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
        check_dim(self.dim(), x.dim())?;
        check_dim(self.order(), a.matrix.order())?;
        let m = a
            .matrix
            .matmul(&self.to_matrix(&x.coords))
            .matmul(&a.matrix.transpose());
        let (coords, residual) = self.expand(&m);
        if residual > EXPANSION_TOL {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(AlgebraElement { coords })
    }

    /// Matrix of `Ad_a` acting on coordinates: column `b` is `Ad_a e_b`.
    pub fn adjoint_matrix(&self, a: &GroupElement) -> Result<Vec<Vec<f64>>> {
        let d = self.dim();
        let cols = (0..d)
            .map(|b| self.adjoint(a, &self.basis(b)).map(|e| e.coords))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect())
    }

    /// Coadjoint action `Ad*_a μ = μ ∘ Ad_{a⁻¹}`, so that
    /// `⟨Ad_a ξ, Ad*_a μ⟩ = ⟨ξ, μ⟩`.
    pub fn coadjoint(&self, a: &GroupElement, mu: &DualElement) -> Result<DualElement> {
        check_dim(self.dim(), mu.coords.len())?;
        let adinv = self.adjoint_matrix(&a.inverse())?;
        let d = self.dim();
        let coords = (0..d)
            .map(|b| (0..d).map(|c| adinv[c][b] * mu.coords[c]).sum())
            .collect();
        Ok(DualElement { coords })
    }

    pub fn pair_coords<S: Real>(&self, xi: &[S], mu: &[S]) -> S {
        xi.iter()
            .zip(mu)
            .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn pair(&self, xi: &AlgebraElement, mu: &DualElement) -> Result<f64> {
        check_dim(self.dim(), xi.dim())?;
        check_dim(self.dim(), mu.coords.len())?;
        Ok(self.pair_coords(&xi.coords, &mu.coords))
    }

    /// Metric dual `ξ ↦ K ξ`.
    pub fn flat(&self, xi: &AlgebraElement) -> DualElement {
        DualElement {
            coords: mat_vec(&self.0.metric, &xi.coords),
        }
    }

    /// Inverse metric dual `μ ↦ K⁻¹ μ`.
    pub fn sharp(&self, mu: &DualElement) -> AlgebraElement {
        AlgebraElement {
            coords: mat_vec(&self.0.metric_inv, &mu.coords),
        }
    }

    /// `max_{a,b} ‖[T_a, T_b] − c^c_{ab} T_c‖`.
    pub fn commutator_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let comm = commutator(&self.0.generators[a], &self.0.generators[b]);
                let coords: Vec<f64> = (0..d).map(|c| self.structure_constant(c, a, b)).collect();
                worst = worst.max(comm.sub(&self.to_matrix(&coords)).max_abs());
            }
        }
        worst
    }

    /// Max-abs violation of the Jacobi identity on the structure constants.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let c = |k, i, j| self.structure_constant(k, i, j);
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for cc in 0..d {
                    for dd in 0..d {
                        let s: f64 = (0..d)
                            .map(|e| {
                                c(e, a, b) * c(dd, e, cc)
                                    + c(e, b, cc) * c(dd, e, a)
                                    + c(e, cc, a) * c(dd, e, b)
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

fn commutator(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    a.matmul(b).sub(&b.matmul(a))
}

fn expand_with<S: Real>(alg: &AlgebraData, m: &Mat<S>) -> (Vec<S>, f64) {
    let d = alg.generators.len();
    let proj: Vec<S> = alg
        .generators
        .iter()
        .map(|t| m.frobenius(&t.map(S::cst)))
        .collect();
    let coords: Vec<S> = (0..d)
        .map(|a| {
            (0..d).fold(S::zero(), |acc, b| acc + proj[b] * S::cst(alg.gram_inv[a][b]))
        })
        .collect();
    let n = alg.order;
    let mut residual: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let recon: f64 = coords
                .iter()
                .zip(&alg.generators)
                .map(|(x, t)| x.value() * t[(r, c)])
                .sum();
            residual = residual.max((m[(r, c)].value() - recon).abs());
        }
    }
    (coords, residual)
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn taylor_oracle(x: &Mat<f64>, terms: usize) -> Mat<f64> {
        let n = x.order();
        let mut acc = Mat::identity(n);
        let mut term = Mat::identity(n);
        for k in 1..terms {
            term = term.matmul(x).scale(1.0 / k as f64);
            acc = acc.add(&term);
        }
        acc
    }

    #[test]
    fn so3_bracket_of_e1_e2_is_e3() {
        let g = LieAlgebra::so3();
        let b = g.bracket(&g.basis(0), &g.basis(1)).unwrap();
        assert_eq!(b.coords, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn bracket_with_self_vanishes_and_u1_is_abelian() {
        let g = LieAlgebra::so3();
        let x = g.element(vec![0.3, -1.2, 2.5]).unwrap();
        assert!(g.bracket(&x, &x).unwrap().coords.iter().all(|c| c.abs() < 1e-15));
        let u = LieAlgebra::u1();
        assert!(u.is_abelian());
        let r = u.bracket(&u.basis(0), &u.basis(0).scaled(3.0)).unwrap();
        assert_eq!(r.coords, vec![0.0]);
    }

    #[test]
    fn bracket_rejects_dimension_mismatch() {
        let g = LieAlgebra::so3();
        let bad = AlgebraElement::new(vec![1.0]).unwrap();
        assert!(matches!(
            g.bracket(&g.basis(0), &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn structure_constants_are_consistent() {
        for g in [LieAlgebra::u1(), LieAlgebra::so3(), LieAlgebra::so2k(1), LieAlgebra::so2k(2)] {
            assert!(g.commutator_residual() <= 1e-12, "{}", g.name());
            assert!(g.jacobi_residual() <= 1e-12, "{}", g.name());
            let d = g.dim();
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        assert_eq!(g.structure_constant(c, a, b), -g.structure_constant(c, b, a));
                    }
                }
            }
        }
    }

    #[test]
    fn default_metric_is_identity_for_builtins() {
        for g in [LieAlgebra::u1(), LieAlgebra::so3(), LieAlgebra::so2k(2)] {
            for (a, row) in g.pairing_metric().iter().enumerate() {
                for (b, &v) in row.iter().enumerate() {
                    assert!((v - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let g = LieAlgebra::so3();
        assert_eq!(g.exp(&g.zero()).unwrap(), GroupElement::identity(3));
    }

    #[test]
    fn exp_quarter_turn_matches_taylor_oracle() {
        let g = LieAlgebra::so3();
        let x = g.basis(2).scaled(FRAC_PI_2);
        let r = g.exp(&x).unwrap();
        let oracle = taylor_oracle(&g.to_matrix(&x.coords), 30);
        assert!(r.matrix().sub(&oracle).max_abs() < 1e-13);
        assert!(r.matrix()[(0, 0)].abs() < 1e-14);
        assert!((r.matrix()[(0, 1)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_inverse_and_orthogonality() {
        let g = LieAlgebra::so2k(2);
        let x = g.element(vec![0.4, -1.1, 2.3, 0.2, 3.7, -0.9]).unwrap();
        let a = g.exp(&x).unwrap();
        let b = g.exp(&x.scaled(-1.0)).unwrap();
        let prod = a.compose(&b);
        assert!(prod.matrix().sub(&Mat::identity(4)).max_abs() < 1e-12);
        assert!(GroupElement::new(a.matrix().clone()).is_ok());
    }

    #[test]
    fn adjoint_examples() {
        let g = LieAlgebra::so3();
        let x = g.element(vec![0.1, 0.2, 0.3]).unwrap();
        let id = GroupElement::identity(3);
        assert!(crate::linalg::max_abs_diff(&g.adjoint(&id, &x).unwrap().coords, &x.coords) < 1e-15);

        let a = g.exp(&g.basis(2).scaled(FRAC_PI_2)).unwrap();
        let y = g.adjoint(&a, &g.basis(0)).unwrap();
        // Direct conjugation oracle: a E1 aᵀ compared entrywise with E2.
        let direct = a.matrix().matmul(&g.generators()[0]).matmul(&a.matrix().transpose());
        assert!(direct.sub(&g.generators()[1]).max_abs() < 1e-14);
        assert!(crate::linalg::max_abs_diff(&y.coords, &[0.0, 1.0, 0.0]) < 1e-14);

        let u = LieAlgebra::u1();
        let a = u.exp(&u.basis(0).scaled(0.7)).unwrap();
        assert!((u.adjoint(&a, &u.basis(0)).unwrap().coords[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn adjoint_rejects_results_outside_the_algebra() {
        // so(2) inside so(3): a rotation about e1 is orthogonal but does not
        // normalize the subalgebra.
        let so3 = LieAlgebra::so3();
        let sub = LieAlgebra::from_generators("so2", vec![so3.generators()[2].clone()]).unwrap();
        let a = so3.exp(&so3.basis(0).scaled(0.4)).unwrap();
        assert!(matches!(
            sub.adjoint(&a, &sub.basis(0)),
            Err(Error::NotInAlgebra { .. })
        ));
        assert!(GroupElement::new(Mat::from_fn(3, |r, c| if r == c { 2.0 } else { 0.0 })).is_err());
        let reflection = Mat::from_fn(3, |r, c| if r == c { if r == 0 { -1.0 } else { 1.0 } } else { 0.0 });
        assert!(GroupElement::new(reflection).is_err());
    }

    #[test]
    fn pairing_examples() {
        let g = LieAlgebra::so3();
        for a in 0..3 {
            for b in 0..3 {
                let p = g.pair(&g.basis(a), &g.dual_basis(b)).unwrap();
                assert_eq!(p, if a == b { 1.0 } else { 0.0 });
            }
        }
        let mu = DualElement::new(vec![0.3, -0.4, 1.5]).unwrap();
        assert_eq!(g.pair(&g.zero(), &mu).unwrap(), 0.0);
        let xi = g.element(vec![1.0, 2.0, -0.5]).unwrap();
        let p = g.pair(&xi, &mu).unwrap();
        assert!((g.pair(&xi.scaled(2.0), &mu).unwrap() - 2.0 * p).abs() < 1e-15);
        assert_eq!(g.sharp(&g.flat(&xi)), xi);
    }
}
